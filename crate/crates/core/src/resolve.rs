//! Version resolution for the pinning fixes.
//!
//! Both lookups run against immutable file-based snapshots so fixes are
//! deterministic and testable offline. A live DockerHub or apt backend would
//! implement the same query surface behind a different loader.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::ImageRef;

#[derive(Debug, Error)]
pub enum SnapshotLoadError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    BadRow {
        line: usize,
        source: serde_json::Error,
    },
}

/// One tag on a digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagEntry {
    pub tag_name: String,
    pub pushed_date: NaiveDate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegistryRow {
    image: String,
    digest: String,
    tag: String,
    pushed_date: NaiveDate,
}

/// Offline view of a container registry: image name -> digests -> tags.
#[derive(Debug, Clone, Default)]
pub struct RegistrySnapshot {
    entries: BTreeMap<String, BTreeMap<String, Vec<TagEntry>>>,
}

impl RegistrySnapshot {
    pub fn insert(&mut self, image: &str, digest: &str, tag: &str, pushed_date: NaiveDate) {
        self.entries
            .entry(image.to_string())
            .or_default()
            .entry(digest.to_string())
            .or_default()
            .push(TagEntry {
                tag_name: tag.to_string(),
                pushed_date,
            });
    }

    /// Load a JSON-lines fixture, one `{image, digest, tag, pushed_date}`
    /// object per line.
    pub fn load_jsonl(path: &Path) -> Result<RegistrySnapshot, SnapshotLoadError> {
        Self::from_reader(File::open(path)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<RegistrySnapshot, SnapshotLoadError> {
        let mut snap = RegistrySnapshot::default();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: RegistryRow = serde_json::from_str(&line)
                .map_err(|source| SnapshotLoadError::BadRow { line: i + 1, source })?;
            snap.insert(&row.image, &row.digest, &row.tag, row.pushed_date);
        }
        Ok(snap)
    }

    /// Digest the image's `latest` tag currently points at. This models the
    /// "build the image to obtain its digest" step at desk scale.
    fn latest_digest(&self, image: &str) -> Option<&str> {
        let digests = self.entries.get(image)?;
        digests
            .iter()
            .find(|(_, tags)| tags.iter().any(|t| t.tag_name == "latest"))
            .map(|(d, _)| d.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TagLookupError {
    #[error("image not found in registry snapshot")]
    ImageNotFound,
    #[error("no tag other than latest is assigned to the digest")]
    NoTagAvailable,
}

/// Resolve the tag to pin an untagged image to: among the tags sharing the
/// digest that `latest` points at, the most recently pushed one that is not
/// `latest` itself. Equal dates break toward the lexicographically last name.
pub fn resolve_image_tag(
    image: &ImageRef,
    registry: &RegistrySnapshot,
) -> Result<String, TagLookupError> {
    let digests = registry
        .entries
        .get(&image.name)
        .ok_or(TagLookupError::ImageNotFound)?;
    let digest = registry
        .latest_digest(&image.name)
        .ok_or(TagLookupError::NoTagAvailable)?;
    let tags = &digests[digest];
    tags.iter()
        .filter(|t| t.tag_name != "latest")
        .max_by(|a, b| {
            a.pushed_date
                .cmp(&b.pushed_date)
                .then_with(|| a.tag_name.cmp(&b.tag_name))
        })
        .map(|t| t.tag_name.clone())
        .ok_or(TagLookupError::NoTagAvailable)
}

/// One published package version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageRow {
    pub distribution: String,
    pub series: String,
    pub package: String,
    pub version: String,
    pub published_date: NaiveDate,
}

/// Offline view of the apt archive across publication dates.
#[derive(Debug, Clone, Default)]
pub struct PackageIndexSnapshot {
    rows: Vec<PackageRow>,
}

impl PackageIndexSnapshot {
    pub fn push(&mut self, row: PackageRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[PackageRow] {
        &self.rows
    }

    /// Load a JSON-lines fixture, one
    /// `{distribution, series, package, version, published_date}` per line.
    pub fn load_jsonl(path: &Path) -> Result<PackageIndexSnapshot, SnapshotLoadError> {
        Self::from_reader(File::open(path)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<PackageIndexSnapshot, SnapshotLoadError> {
        let mut snap = PackageIndexSnapshot::default();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: PackageRow = serde_json::from_str(&line)
                .map_err(|source| SnapshotLoadError::BadRow { line: i + 1, source })?;
            snap.push(row);
        }
        Ok(snap)
    }

    fn matching(&self, series: &str, package: &str) -> Vec<&PackageRow> {
        self.rows
            .iter()
            .filter(|r| r.distribution == "ubuntu" && r.series == series && r.package == package)
            .collect()
    }

    /// Versions the archive offers right now: the rows carrying the latest
    /// publication date for the package. Older patch releases drop out of the
    /// archive, which is exactly what makes wildcard degradation necessary.
    pub fn current_versions(&self, series: &str, package: &str) -> Vec<&str> {
        let rows = self.matching(series, package);
        let max_date = rows.iter().map(|r| r.published_date).max();
        match max_date {
            Some(d) => rows
                .iter()
                .filter(|r| r.published_date == d)
                .map(|r| r.version.as_str())
                .collect(),
            None => Vec::new(),
        }
    }
}

/// Version for (ubuntu, series, package) with the latest publication date not
/// after the cutoff. Equal dates break toward the lexicographically last
/// version string.
pub fn select_apt_version(
    package: &str,
    series: &str,
    cutoff: NaiveDate,
    index: &PackageIndexSnapshot,
) -> Option<String> {
    index
        .matching(series, package)
        .into_iter()
        .filter(|r| r.published_date <= cutoff)
        .max_by(|a, b| {
            a.published_date
                .cmp(&b.published_date)
                .then_with(|| a.version.cmp(&b.version))
        })
        .map(|r| r.version.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WildcardLevel {
    Exact,
    PatchWild,
    MinorWild,
}

/// A version string, possibly wildcarded in its trailing dot-segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionPattern {
    pub text: String,
    pub level: WildcardLevel,
}

impl VersionPattern {
    pub fn exact(version: &str) -> VersionPattern {
        VersionPattern {
            text: version.to_string(),
            level: WildcardLevel::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DegradeError {
    #[error("version has too few dot-segments to wildcard")]
    TooFewSegments,
}

/// Widen a version into a wildcard pattern. Debian version strings are not
/// strict semver; PATCH and MINOR are read as the last one and two
/// dot-separated segments of the full string, which reproduces the intended
/// behavior on real archive versions like `7.68.0-1ubuntu2.5`.
pub fn degrade_version(version: &str, level: WildcardLevel) -> Result<VersionPattern, DegradeError> {
    let segments: Vec<&str> = version.split('.').collect();
    let drop = match level {
        WildcardLevel::Exact => {
            return Ok(VersionPattern::exact(version));
        }
        WildcardLevel::PatchWild => 1,
        WildcardLevel::MinorWild => 2,
    };
    if segments.len() <= drop {
        return Err(DegradeError::TooFewSegments);
    }
    let kept = &segments[..segments.len() - drop];
    Ok(VersionPattern {
        text: format!("{}.*", kept.join(".")),
        level,
    })
}

/// Pure pattern predicate: `*` matches any suffix of trailing dot-segments.
pub fn pattern_matches(version: &str, pattern: &VersionPattern) -> bool {
    match pattern.level {
        WildcardLevel::Exact => version == pattern.text,
        _ => match pattern.text.strip_suffix('*') {
            Some(prefix) => version.starts_with(prefix),
            None => version == pattern.text,
        },
    }
}

/// Simulate `apt-get install pkg=pattern`: true iff a currently available
/// version of the package matches the pattern. Availability means the rows
/// with the latest publication date, since apt cannot install versions that
/// have already left the archive.
pub fn is_installable(
    package: &str,
    pattern: &VersionPattern,
    series: &str,
    index: &PackageIndexSnapshot,
) -> bool {
    index
        .current_versions(series, package)
        .iter()
        .any(|v| pattern_matches(v, pattern))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_image_ref;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn registry() -> RegistrySnapshot {
        let mut r = RegistrySnapshot::default();
        r.insert("ubuntu", "sha256:d1", "latest", date("2020-06-01"));
        r.insert("ubuntu", "sha256:d1", "20.04", date("2020-05-20"));
        r.insert("ubuntu", "sha256:d0", "18.04", date("2019-01-10"));
        r.insert("onlylatest", "sha256:d9", "latest", date("2021-01-01"));
        r
    }

    #[test]
    fn picks_most_recent_non_latest_tag() {
        let image = parse_image_ref("ubuntu").unwrap();
        assert_eq!(resolve_image_tag(&image, &registry()).unwrap(), "20.04");
    }

    #[test]
    fn only_latest_means_no_tag() {
        let image = parse_image_ref("onlylatest").unwrap();
        assert_eq!(
            resolve_image_tag(&image, &registry()),
            Err(TagLookupError::NoTagAvailable)
        );
    }

    #[test]
    fn unknown_image_is_an_error() {
        let image = parse_image_ref("nosuchimage").unwrap();
        assert_eq!(
            resolve_image_tag(&image, &registry()),
            Err(TagLookupError::ImageNotFound)
        );
    }

    #[test]
    fn date_tie_breaks_lexicographically_last() {
        let mut r = RegistrySnapshot::default();
        r.insert("ubuntu", "sha256:d1", "latest", date("2020-06-01"));
        r.insert("ubuntu", "sha256:d1", "20.04", date("2020-05-20"));
        r.insert("ubuntu", "sha256:d1", "focal", date("2020-05-20"));
        let image = parse_image_ref("ubuntu").unwrap();
        assert_eq!(resolve_image_tag(&image, &r).unwrap(), "focal");
    }

    fn index() -> PackageIndexSnapshot {
        let mut idx = PackageIndexSnapshot::default();
        for (series, version, d) in [
            ("focal", "7.68.0-1ubuntu2.5", "2021-05-10"),
            ("focal", "7.68.0-1ubuntu1.8", "2020-03-01"),
            ("focal", "7.68.0-1ubuntu2.14", "2022-03-01"),
            ("trusty", "7.35.0-1ubuntu2.20", "2018-11-02"),
        ] {
            idx.push(PackageRow {
                distribution: "ubuntu".to_string(),
                series: series.to_string(),
                package: "curl".to_string(),
                version: version.to_string(),
                published_date: date(d),
            });
        }
        idx
    }

    #[test]
    fn selects_closest_version_before_cutoff() {
        let idx = index();
        assert_eq!(
            select_apt_version("curl", "focal", date("2021-07-01"), &idx).as_deref(),
            Some("7.68.0-1ubuntu2.5")
        );
        assert_eq!(
            select_apt_version("curl", "trusty", date("2019-01-01"), &idx).as_deref(),
            Some("7.35.0-1ubuntu2.20")
        );
        assert_eq!(select_apt_version("wget", "focal", date("2021-07-01"), &idx), None);
    }

    #[test]
    fn degradation_levels() {
        assert_eq!(
            degrade_version("7.68.0-1ubuntu2.5", WildcardLevel::PatchWild)
                .unwrap()
                .text,
            "7.68.0-1ubuntu2.*"
        );
        assert_eq!(
            degrade_version("1.2.3", WildcardLevel::MinorWild).unwrap().text,
            "1.*"
        );
        assert_eq!(
            degrade_version("5", WildcardLevel::PatchWild),
            Err(DegradeError::TooFewSegments)
        );
        assert_eq!(
            degrade_version("1.2", WildcardLevel::MinorWild),
            Err(DegradeError::TooFewSegments)
        );
    }

    #[test]
    fn installability_checks_current_archive() {
        let idx = index();
        let patch = degrade_version("7.68.0-1ubuntu2.5", WildcardLevel::PatchWild).unwrap();
        assert!(is_installable("curl", &patch, "focal", &idx));
        let old_patch = degrade_version("7.68.0-1ubuntu1.8", WildcardLevel::PatchWild).unwrap();
        assert!(!is_installable("curl", &old_patch, "focal", &idx));
        let minor = degrade_version("7.68.0-1ubuntu1.8", WildcardLevel::MinorWild).unwrap();
        assert!(is_installable("curl", &minor, "focal", &idx));
        let wrong = VersionPattern {
            text: "9.*".to_string(),
            level: WildcardLevel::PatchWild,
        };
        assert!(!is_installable("curl", &wrong, "focal", &idx));
        let exact = VersionPattern::exact("7.35.0-1ubuntu2.20");
        assert!(is_installable("curl", &exact, "trusty", &idx));
    }

    #[test]
    fn degradation_widens_on_fixture_rows() {
        let idx = index();
        for row in idx.rows() {
            let exact = VersionPattern::exact(&row.version);
            let patch = degrade_version(&row.version, WildcardLevel::PatchWild).unwrap();
            let minor = degrade_version(&row.version, WildcardLevel::MinorWild).unwrap();
            for other in idx.rows() {
                let v = other.version.as_str();
                if pattern_matches(v, &exact) {
                    assert!(pattern_matches(v, &patch));
                }
                if pattern_matches(v, &patch) {
                    assert!(pattern_matches(v, &minor));
                }
            }
        }
    }
}
