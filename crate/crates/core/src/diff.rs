//! Line-level diffing: LCS alignment and unified-diff rendering.
//!
//! The same alignment backs both patch rendering and the history miner's
//! modified-vs-removed classification, so the two stay consistent.

/// Longest common subsequence of two line slices as index pairs, computed by
/// dynamic programming. File-scale inputs only.
pub fn lcs_pairs(a: &[&str], b: &[&str]) -> Vec<(usize, usize)> {
    let n = a.len();
    let m = b.len();
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[at(i, j)] = if a[i] == b[j] {
                table[at(i + 1, j + 1)] + 1
            } else {
                table[at(i + 1, j)].max(table[at(i, j + 1)])
            };
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[at(i + 1, j)] >= table[at(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Equal(usize, usize),
    Delete(usize),
    Insert(usize),
}

fn diff_ops(a: &[&str], b: &[&str]) -> Vec<Op> {
    let pairs = lcs_pairs(a, b);
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    for (pi, pj) in pairs {
        while i < pi {
            ops.push(Op::Delete(i));
            i += 1;
        }
        while j < pj {
            ops.push(Op::Insert(j));
            j += 1;
        }
        ops.push(Op::Equal(i, j));
        i += 1;
        j += 1;
    }
    while i < a.len() {
        ops.push(Op::Delete(i));
        i += 1;
    }
    while j < b.len() {
        ops.push(Op::Insert(j));
        j += 1;
    }
    ops
}

fn split_lines(text: &str) -> (Vec<&str>, bool) {
    let ends_with_newline = text.ends_with('\n') || text.is_empty();
    (text.lines().collect(), ends_with_newline)
}

const NO_NEWLINE: &str = "\\ No newline at end of file";

/// Render a unified diff with the given number of context lines. Returns the
/// empty string iff the inputs are byte-identical.
pub fn unified_diff(
    before: &str,
    after: &str,
    from_label: &str,
    to_label: &str,
    context: usize,
) -> String {
    if before == after {
        return String::new();
    }
    let (a, a_nl) = split_lines(before);
    let (b, b_nl) = split_lines(after);
    let ops = diff_ops(&a, &b);

    // Indices of non-equal ops, used to group hunks.
    let changed: Vec<usize> = ops
        .iter()
        .enumerate()
        .filter(|(_, op)| !matches!(op, Op::Equal(_, _)))
        .map(|(k, _)| k)
        .collect();

    let mut out = format!("--- {from_label}\n+++ {to_label}\n");
    if changed.is_empty() {
        // Same lines, different trailing newline; emit a minimal hunk over
        // the last line.
        if let Some(last) = a.last() {
            out.push_str(&format!("@@ -{0},1 +{0},1 @@\n", a.len()));
            out.push_str(&format!("-{last}\n"));
            if !a_nl {
                out.push_str(NO_NEWLINE);
                out.push('\n');
            }
            out.push_str(&format!("+{last}\n"));
            if !b_nl {
                out.push_str(NO_NEWLINE);
                out.push('\n');
            }
        }
        return out;
    }

    // Group changed ops into hunks separated by more than 2*context equals.
    let mut groups: Vec<(usize, usize)> = Vec::new(); // op index ranges, inclusive
    let mut start = changed[0];
    let mut prev = changed[0];
    for &c in &changed[1..] {
        if c - prev > 2 * context {
            groups.push((start, prev));
            start = c;
        }
        prev = c;
    }
    groups.push((start, prev));

    for (gs, ge) in groups {
        let lo = gs.saturating_sub(context);
        let hi = (ge + context).min(ops.len().saturating_sub(1));

        let mut a_start = None;
        let mut b_start = None;
        let mut a_count = 0usize;
        let mut b_count = 0usize;
        let mut body = String::new();
        for op in &ops[lo..=hi] {
            match *op {
                Op::Equal(i, j) => {
                    a_start.get_or_insert(i + 1);
                    b_start.get_or_insert(j + 1);
                    a_count += 1;
                    b_count += 1;
                    body.push(' ');
                    body.push_str(a[i]);
                    body.push('\n');
                    if i + 1 == a.len() && !a_nl {
                        body.push_str(NO_NEWLINE);
                        body.push('\n');
                    }
                }
                Op::Delete(i) => {
                    a_start.get_or_insert(i + 1);
                    a_count += 1;
                    body.push('-');
                    body.push_str(a[i]);
                    body.push('\n');
                    if i + 1 == a.len() && !a_nl {
                        body.push_str(NO_NEWLINE);
                        body.push('\n');
                    }
                }
                Op::Insert(j) => {
                    b_start.get_or_insert(j + 1);
                    b_count += 1;
                    body.push('+');
                    body.push_str(b[j]);
                    body.push('\n');
                    if j + 1 == b.len() && !b_nl {
                        body.push_str(NO_NEWLINE);
                        body.push('\n');
                    }
                }
            }
        }
        let a_start = a_start.unwrap_or(1).min(a.len().max(1));
        let b_start = b_start.unwrap_or(1).min(b.len().max(1));
        // Empty sides use the conventional "line before" position.
        let a_pos = if a_count == 0 { a_start.saturating_sub(1) } else { a_start };
        let b_pos = if b_count == 0 { b_start.saturating_sub(1) } else { b_start };
        out.push_str(&format!("@@ -{a_pos},{a_count} +{b_pos},{b_count} @@\n"));
        out.push_str(&body);
    }
    out
}
