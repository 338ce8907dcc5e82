//! Repository plumbing over the `git` binary: main-line history, snapshot
//! resolution for release windows, commit counting, and worktree
//! materialization of historical snapshots.
//!
//! Only the first-parent chain of `HEAD` is considered, so merge side
//! branches collapse into their merge commit. Commit instants use committer
//! timestamps.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{day_end_utc, day_start_utc, ReleaseSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitInfo {
    pub hash: String,
    pub timestamp: DateTime<Utc>,
    /// `Name <email>`, the identity used for contributor counting.
    pub author: String,
}

/// The two snapshots bracketing one release's development window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotPair {
    pub release_id: u32,
    /// Last main-line commit before the window opened.
    pub old_commit: String,
    /// Last main-line commit on or before the freeze date.
    pub new_commit: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessCounts {
    pub commits: u64,
    pub contributors: u64,
}

#[derive(Debug)]
pub struct RepoHandle {
    path: PathBuf,
    main_line: OnceLock<Vec<CommitInfo>>,
}

fn run_git(dir: &Path, args: &[&str]) -> Result<String> {
    let output = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(args)
        .output()
        .map_err(|e| Error::Git {
            action: args.first().unwrap_or(&"?").to_string(),
            repo: dir.to_path_buf(),
            detail: format!("could not run git: {e}"),
        })?;
    if !output.status.success() {
        return Err(Error::Git {
            action: args.first().unwrap_or(&"?").to_string(),
            repo: dir.to_path_buf(),
            detail: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(String::from_utf8_lossy(&output.stdout).into_owned())
}

impl RepoHandle {
    pub fn open(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::InputNotFound(path.to_path_buf()));
        }
        run_git(path, &["rev-parse", "--git-dir"])?;
        Ok(RepoHandle {
            path: path.to_path_buf(),
            main_line: OnceLock::new(),
        })
    }

    /// Clone `url` into `dest` and open the result.
    pub fn clone(url: &str, dest: &Path) -> Result<Self> {
        let parent = dest.parent().unwrap_or(Path::new("."));
        std::fs::create_dir_all(parent)?;
        run_git(
            parent,
            &["clone", "--quiet", url, &dest.to_string_lossy()],
        )?;
        Self::open(dest)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// First-parent history of `HEAD`, newest first. Cached after the first
    /// call; the repository is assumed quiescent for the life of the handle.
    pub fn main_line(&self) -> Result<&[CommitInfo]> {
        if let Some(cached) = self.main_line.get() {
            return Ok(cached);
        }
        let text = run_git(
            &self.path,
            &[
                "log",
                "--first-parent",
                "--format=%H%x1f%ct%x1f%an <%ae>",
                "HEAD",
            ],
        )?;
        let mut commits = Vec::new();
        for line in text.lines() {
            let mut parts = line.split('\x1f');
            let (Some(hash), Some(ts), Some(author)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::Git {
                    action: "log".into(),
                    repo: self.path.clone(),
                    detail: format!("unexpected log line: {line}"),
                });
            };
            let secs: i64 = ts.parse().map_err(|_| Error::Git {
                action: "log".into(),
                repo: self.path.clone(),
                detail: format!("bad timestamp in log line: {line}"),
            })?;
            commits.push(CommitInfo {
                hash: hash.to_string(),
                timestamp: Utc.timestamp_opt(secs, 0).single().ok_or_else(|| Error::Git {
                    action: "log".into(),
                    repo: self.path.clone(),
                    detail: format!("timestamp out of range: {secs}"),
                })?,
                author: author.to_string(),
            });
        }
        if commits.is_empty() {
            return Err(Error::Git {
                action: "log".into(),
                repo: self.path.clone(),
                detail: "repository has no commits on HEAD".into(),
            });
        }
        Ok(self.main_line.get_or_init(|| commits))
    }

    /// Find the snapshot pair for a release window. When history starts
    /// after the window opens, the oldest commit stands in for the old
    /// snapshot and a warning says so.
    pub fn resolve_snapshots(&self, release: &ReleaseSpec) -> Result<(SnapshotPair, Option<String>)> {
        let line = self.main_line()?;
        let start = day_start_utc(release.start);
        let freeze_end = day_end_utc(release.freeze);

        let new = line
            .iter()
            .find(|c| c.timestamp <= freeze_end)
            .ok_or_else(|| {
                Error::Extraction(format!(
                    "release '{}' freezes on {} but history only starts later",
                    release.name, release.freeze
                ))
            })?;
        let (old, warning) = match line.iter().find(|c| c.timestamp < start) {
            Some(c) => (c, None),
            None => (
                line.last().expect("non-empty history"),
                Some(format!(
                    "release '{}' starts {} but history begins later; using the first commit as the old snapshot",
                    release.name, release.start
                )),
            ),
        };
        Ok((
            SnapshotPair {
                release_id: release.id,
                old_commit: old.hash.clone(),
                new_commit: new.hash.clone(),
            },
            warning,
        ))
    }

    /// Commits and distinct authors inside the development window.
    pub fn count_commits(&self, release: &ReleaseSpec) -> Result<ProcessCounts> {
        let line = self.main_line()?;
        let start = day_start_utc(release.start);
        let end = day_end_utc(release.freeze);
        let mut commits = 0;
        let mut authors = std::collections::BTreeSet::new();
        for c in line {
            if c.timestamp >= start && c.timestamp <= end {
                commits += 1;
                authors.insert(c.author.as_str());
            }
        }
        Ok(ProcessCounts {
            commits,
            contributors: authors.len() as u64,
        })
    }

    /// Check out `commit` into a throwaway worktree. The checkout disappears
    /// when the returned handle drops.
    pub fn materialize(&self, commit: &str) -> Result<Worktree> {
        let dir = tempfile::tempdir()?;
        let root = dir.path().join("snapshot");
        run_git(
            &self.path,
            &[
                "worktree",
                "add",
                "--detach",
                "--quiet",
                &root.to_string_lossy(),
                commit,
            ],
        )?;
        Ok(Worktree {
            root,
            repo: self.path.clone(),
            _dir: dir,
        })
    }
}

pub struct Worktree {
    root: PathBuf,
    repo: PathBuf,
    _dir: tempfile::TempDir,
}

impl Worktree {
    pub fn root(&self) -> &Path {
        &self.root
    }
}

impl Drop for Worktree {
    fn drop(&mut self) {
        let _ = Command::new("git")
            .arg("-C")
            .arg(&self.repo)
            .args(["worktree", "remove", "--force"])
            .arg(&self.root)
            .output();
    }
}

/// Scripted construction of git repositories with controlled commit dates
/// and authors. Fixture and example plumbing, also used by the synthetic
/// project generator.
pub struct RepoBuilder {
    path: PathBuf,
}

impl RepoBuilder {
    pub fn init(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path)?;
        let output = Command::new("git")
            .arg("init")
            .arg("--quiet")
            .arg(path)
            .output()?;
        if !output.status.success() {
            return Err(Error::Git {
                action: "init".into(),
                repo: path.to_path_buf(),
                detail: String::from_utf8_lossy(&output.stderr).into_owned(),
            });
        }
        Ok(RepoBuilder {
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&self, rel: &str, content: &str) -> Result<()> {
        let p = self.path.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(p, content)?;
        Ok(())
    }

    pub fn remove(&self, rel: &str) -> Result<()> {
        std::fs::remove_file(self.path.join(rel))?;
        Ok(())
    }

    /// Stage everything and commit as `author` at the given instant.
    pub fn commit(&self, message: &str, when: DateTime<Utc>, author: &str, email: &str) -> Result<String> {
        run_git(&self.path, &["add", "-A"])?;
        let stamp = when.to_rfc3339();
        let output = Command::new("git")
            .arg("-C")
            .arg(&self.path)
            .args(["-c", "commit.gpgsign=false", "commit", "--quiet", "--allow-empty", "-m", message])
            .env("GIT_AUTHOR_NAME", author)
            .env("GIT_AUTHOR_EMAIL", email)
            .env("GIT_COMMITTER_NAME", author)
            .env("GIT_COMMITTER_EMAIL", email)
            .env("GIT_AUTHOR_DATE", &stamp)
            .env("GIT_COMMITTER_DATE", &stamp)
            .output()?;
        if !output.status.success() {
            return Err(Error::Git {
                action: "commit".into(),
                repo: self.path.clone(),
                detail: String::from_utf8_lossy(&output.stderr).into_owned(),
            });
        }
        Ok(run_git(&self.path, &["rev-parse", "HEAD"])?.trim().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn at(s: &str) -> DateTime<Utc> {
        format!("{s}T12:00:00Z").parse().unwrap()
    }

    fn release(id: u32, start: &str, freeze: &str) -> ReleaseSpec {
        ReleaseSpec {
            id,
            name: format!("r{id}"),
            start: d(start),
            freeze: d(freeze),
            release_date: d(freeze),
            lts: false,
        }
    }

    fn scripted_repo() -> (tempfile::TempDir, RepoHandle) {
        let dir = tempfile::tempdir().unwrap();
        let b = RepoBuilder::init(dir.path()).unwrap();
        b.write("a.java", "int a;\n").unwrap();
        b.commit("seed", at("2019-12-01"), "Ada", "ada@x").unwrap();
        b.write("a.java", "int a;\nint b;\n").unwrap();
        b.commit("grow", at("2020-02-10"), "Ada", "ada@x").unwrap();
        b.write("c.java", "int c;\n").unwrap();
        b.commit("more", at("2020-03-05"), "Brin", "brin@x").unwrap();
        b.write("c.java", "int c;\nint d;\n").unwrap();
        b.commit("late", at("2020-07-20"), "Ada", "ada@x").unwrap();
        let handle = RepoHandle::open(dir.path()).unwrap();
        (dir, handle)
    }

    #[test]
    fn main_line_is_newest_first_with_authors() {
        let (_dir, repo) = scripted_repo();
        let line = repo.main_line().unwrap();
        assert_eq!(line.len(), 4);
        assert!(line[0].timestamp > line[3].timestamp);
        assert_eq!(line[0].author, "Ada <ada@x>");
        assert_eq!(line[1].author, "Brin <brin@x>");
    }

    #[test]
    fn snapshots_bracket_the_window() {
        let (_dir, repo) = scripted_repo();
        let line = repo.main_line().unwrap();
        let (pair, warning) = repo
            .resolve_snapshots(&release(1, "2020-01-01", "2020-06-30"))
            .unwrap();
        assert!(warning.is_none());
        // Old: last commit before Jan 1 (the seed). New: last commit on or
        // before Jun 30 (the March one).
        assert_eq!(pair.old_commit, line[3].hash);
        assert_eq!(pair.new_commit, line[1].hash);
    }

    #[test]
    fn freeze_day_is_inclusive() {
        let (_dir, repo) = scripted_repo();
        let line = repo.main_line().unwrap();
        let (pair, _) = repo
            .resolve_snapshots(&release(1, "2020-01-01", "2020-03-05"))
            .unwrap();
        assert_eq!(pair.new_commit, line[1].hash);
    }

    #[test]
    fn prehistoric_start_falls_back_to_first_commit() {
        let (_dir, repo) = scripted_repo();
        let line = repo.main_line().unwrap();
        let (pair, warning) = repo
            .resolve_snapshots(&release(1, "2019-01-01", "2020-06-30"))
            .unwrap();
        assert_eq!(pair.old_commit, line[3].hash);
        assert!(warning.unwrap().contains("first commit"));
    }

    #[test]
    fn window_before_any_history_is_an_error() {
        let (_dir, repo) = scripted_repo();
        let err = repo
            .resolve_snapshots(&release(1, "2018-01-01", "2018-06-30"))
            .unwrap_err();
        assert!(matches!(err, Error::Extraction(_)));
    }

    #[test]
    fn commit_and_contributor_counting() {
        let (_dir, repo) = scripted_repo();
        let c = repo
            .count_commits(&release(1, "2020-01-01", "2020-06-30"))
            .unwrap();
        assert_eq!(c.commits, 2);
        assert_eq!(c.contributors, 2);

        let empty = repo
            .count_commits(&release(2, "2020-04-01", "2020-05-01"))
            .unwrap();
        assert_eq!(empty, ProcessCounts::default());
    }

    #[test]
    fn worktrees_materialize_history_and_clean_up() {
        let (_dir, repo) = scripted_repo();
        let line = repo.main_line().unwrap();
        let oldest = line.last().unwrap().hash.clone();
        let root;
        {
            let wt = repo.materialize(&oldest).unwrap();
            root = wt.root().to_path_buf();
            let content = std::fs::read_to_string(wt.root().join("a.java")).unwrap();
            assert_eq!(content, "int a;\n");
            assert!(!wt.root().join("c.java").exists());
        }
        assert!(!root.exists(), "worktree should vanish on drop");
    }

    #[test]
    fn opening_a_non_repo_fails() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("plain");
        std::fs::create_dir_all(&plain).unwrap();
        assert!(matches!(
            RepoHandle::open(&plain),
            Err(Error::Git { .. })
        ));
        assert!(matches!(
            RepoHandle::open(&dir.path().join("missing")),
            Err(Error::InputNotFound(_))
        ));
    }

    #[test]
    fn cloning_a_local_repo_works() {
        let (src, _repo) = scripted_repo();
        let dest = tempfile::tempdir().unwrap();
        let clone = RepoHandle::clone(
            &src.path().to_string_lossy(),
            &dest.path().join("c"),
        )
        .unwrap();
        assert_eq!(clone.main_line().unwrap().len(), 4);
    }
}
