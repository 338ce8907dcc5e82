//! On-disk project descriptor: a TOML file naming the project, its
//! repository, language scoping, and the release timeline.
//!
//! Dates are written as quoted `YYYY-MM-DD` strings. A `schema_version` field
//! guards against silently misreading future layouts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LanguageConfig, ReleaseSpec, Timeline};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSection {
    pub name: String,
    /// Path or clone URL of the project repository.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repo: Option<String>,
    /// Path of the tracker export file. Relative paths resolve against the
    /// descriptor's own directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectDescriptor {
    pub schema_version: u32,
    pub project: ProjectSection,
    #[serde(default)]
    pub languages: LanguageConfig,
    #[serde(rename = "release", default)]
    pub releases: Vec<ReleaseSpec>,
}

impl ProjectDescriptor {
    pub fn new(timeline: &Timeline, repo: Option<String>) -> Self {
        ProjectDescriptor {
            schema_version: SCHEMA_VERSION,
            project: ProjectSection {
                name: timeline.project.clone(),
                repo,
                export: None,
            },
            languages: timeline.languages.clone(),
            releases: timeline.releases.clone(),
        }
    }

    pub fn with_export(mut self, export: Option<String>) -> Self {
        self.project.export = export;
        self
    }

    /// Resolve a descriptor-relative path against the descriptor location.
    pub fn resolve(descriptor_path: &Path, entry: &str) -> std::path::PathBuf {
        let p = Path::new(entry);
        if p.is_absolute() {
            return p.to_path_buf();
        }
        match descriptor_path.parent() {
            Some(dir) => dir.join(p),
            None => p.to_path_buf(),
        }
    }

    pub fn timeline(&self) -> Timeline {
        Timeline {
            project: self.project.name.clone(),
            releases: self.releases.clone(),
            languages: self.languages.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::InputNotFound(path.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        Self::parse(&text).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let desc: ProjectDescriptor = toml::from_str(text)
            .map_err(|e| Error::Validation(format!("descriptor does not parse: {e}")))?;
        if desc.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported descriptor schema_version {} (this build reads {})",
                desc.schema_version, SCHEMA_VERSION
            )));
        }
        Ok(desc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_timeline;

    const SAMPLE: &str = r#"
schema_version = 1

[project]
name = "demo"
repo = "/tmp/demo-repo"

[languages]
filter = ["java"]
excluded = ["yaml", "xml"]

[[release]]
id = 1
name = "one"
start = "2020-01-01"
freeze = "2020-05-20"
release_date = "2020-06-30"

[[release]]
id = 2
name = "two"
start = "2020-07-01"
freeze = "2020-11-20"
release_date = "2020-12-30"
lts = true
"#;

    #[test]
    fn parses_sample_descriptor() {
        let d = ProjectDescriptor::parse(SAMPLE).unwrap();
        assert_eq!(d.project.name, "demo");
        assert_eq!(d.project.repo.as_deref(), Some("/tmp/demo-repo"));
        assert_eq!(d.releases.len(), 2);
        assert!(d.releases[1].lts);
        assert!(!d.releases[0].lts);
        let t = d.timeline();
        assert!(validate_timeline(&t).is_empty());
        assert_eq!(t.release(2).unwrap().freeze.to_string(), "2020-11-20");
    }

    #[test]
    fn round_trips_through_toml() {
        let d = ProjectDescriptor::parse(SAMPLE).unwrap();
        let again = ProjectDescriptor::parse(&d.to_toml()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn rejects_unknown_schema_version() {
        let bumped = SAMPLE.replace("schema_version = 1", "schema_version = 9");
        let err = ProjectDescriptor::parse(&bumped).unwrap_err();
        assert!(err.to_string().contains("schema_version 9"), "{err}");
    }

    #[test]
    fn relative_entries_resolve_against_the_descriptor_dir() {
        let at = Path::new("/data/proj/descriptor.toml");
        assert_eq!(
            ProjectDescriptor::resolve(at, "repo"),
            Path::new("/data/proj/repo")
        );
        assert_eq!(
            ProjectDescriptor::resolve(at, "/abs/repo"),
            Path::new("/abs/repo")
        );
    }

    #[test]
    fn export_entry_round_trips() {
        let d = ProjectDescriptor::parse(SAMPLE).unwrap().with_export(Some("bugs.json".into()));
        let again = ProjectDescriptor::parse(&d.to_toml()).unwrap();
        assert_eq!(again.project.export.as_deref(), Some("bugs.json"));
    }

    #[test]
    fn missing_file_is_input_not_found() {
        let err = ProjectDescriptor::load(Path::new("/nonexistent/d.toml")).unwrap_err();
        assert!(matches!(err, Error::InputNotFound(_)));
    }

    #[test]
    fn garbled_toml_is_a_validation_error() {
        let err = ProjectDescriptor::parse("schema_version = [").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
