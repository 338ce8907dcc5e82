//! Line counting: classify every line of a source file as code, comment, or
//! blank, then aggregate over a working tree.
//!
//! A line holding both code and a trailing comment counts as code. String
//! contents count as code even when they look like comment markers. Nested
//! block comments are not tracked (the first terminator closes the comment),
//! matching how most counting tools behave.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::language::{language_of, LanguageSpec};
use crate::model::LanguageConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Code,
    Comment,
    Blank,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCounts {
    pub code: u64,
    pub comment: u64,
    pub blank: u64,
}

impl LineCounts {
    pub fn total(&self) -> u64 {
        self.code + self.comment + self.blank
    }

    fn add(&mut self, other: &LineCounts) {
        self.code += other.code;
        self.comment += other.comment;
        self.blank += other.blank;
    }
}

#[derive(Debug, Clone, Copy)]
enum State {
    Normal,
    LineComment,
    Block,
    Str(char),
}

/// Classify each line of `text` under the lexical rules of `lang`.
pub fn classify_lines(text: &str, lang: &LanguageSpec) -> Vec<LineKind> {
    let mut out = Vec::new();
    let mut state = State::Normal;
    let mut has_code = false;
    let mut has_comment = false;
    let mut saw_any = false;

    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap();
        if c == '\n' {
            out.push(finish_line(has_code, has_comment));
            has_code = false;
            has_comment = false;
            saw_any = false;
            if matches!(state, State::LineComment) {
                state = State::Normal;
            }
            i += 1;
            continue;
        }
        saw_any = true;

        match state {
            State::Normal => {
                if let Some((open, _)) = lang.block_comment {
                    if rest.starts_with(open) {
                        has_comment = true;
                        state = State::Block;
                        i += open.len();
                        continue;
                    }
                }
                if let Some(lc) = lang.line_comment {
                    if rest.starts_with(lc) {
                        has_comment = true;
                        state = State::LineComment;
                        i += lc.len();
                        continue;
                    }
                }
                if lang.string_delims.contains(&c) {
                    has_code = true;
                    state = State::Str(c);
                } else if !c.is_whitespace() {
                    has_code = true;
                }
            }
            State::LineComment => {}
            State::Block => {
                let (_, close) = lang.block_comment.expect("in block state");
                if rest.starts_with(close) {
                    has_comment = true;
                    state = State::Normal;
                    i += close.len();
                    continue;
                }
                if !c.is_whitespace() {
                    has_comment = true;
                }
            }
            State::Str(delim) => {
                if !c.is_whitespace() {
                    has_code = true;
                }
                if c == '\\' {
                    // Skip the escaped character, but never past a newline.
                    let mut iter = rest.char_indices();
                    iter.next();
                    if let Some((j, esc)) = iter.next() {
                        if esc != '\n' {
                            i += j + esc.len_utf8();
                            continue;
                        }
                    }
                } else if c == delim {
                    state = State::Normal;
                }
            }
        }
        i += c.len_utf8();
    }
    if saw_any || (!text.is_empty() && !text.ends_with('\n')) {
        out.push(finish_line(has_code, has_comment));
    }
    out
}

fn finish_line(has_code: bool, has_comment: bool) -> LineKind {
    if has_code {
        LineKind::Code
    } else if has_comment {
        LineKind::Comment
    } else {
        LineKind::Blank
    }
}

pub fn line_counts(text: &str, lang: &LanguageSpec) -> LineCounts {
    let mut c = LineCounts::default();
    for kind in classify_lines(text, lang) {
        match kind {
            LineKind::Code => c.code += 1,
            LineKind::Comment => c.comment += 1,
            LineKind::Blank => c.blank += 1,
        }
    }
    c
}

/// The content of every code-classified line, in file order, with line
/// terminators stripped. This is the sequence change metrics diff over.
pub fn code_lines<'a>(text: &'a str, lang: &LanguageSpec) -> Vec<&'a str> {
    let kinds = classify_lines(text, lang);
    text.split('\n')
        .zip(kinds)
        .filter(|(_, k)| *k == LineKind::Code)
        .map(|(l, _)| l.strip_suffix('\r').unwrap_or(l))
        .collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LangTally {
    pub files: u64,
    pub lines: LineCounts,
}

/// Aggregated sizes of one working tree.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TreeSizes {
    /// Per counted language; excluded languages never appear here.
    pub per_language: BTreeMap<String, LangTally>,
    pub all: LangTally,
    pub filtered: LangTally,
    pub excluded_files: u64,
    pub binary_files: u64,
}

/// True when the head of the content looks like binary data.
pub fn is_binary(bytes: &[u8]) -> bool {
    bytes.iter().take(4096).any(|b| *b == 0)
}

/// Walk a tree and count lines per language and per scope. `.git` directories
/// and symlinks are ignored; binary files are tallied but not counted.
pub fn count_tree(root: &Path, languages: &LanguageConfig) -> Result<TreeSizes> {
    let mut sizes = TreeSizes::default();
    for entry in sorted_source_files(root) {
        let path = entry?;
        let lang = language_of(&path);
        if languages.is_excluded(lang.name) {
            sizes.excluded_files += 1;
            continue;
        }
        let bytes = std::fs::read(&path)?;
        if is_binary(&bytes) {
            sizes.binary_files += 1;
            continue;
        }
        let text = String::from_utf8_lossy(&bytes);
        let counts = line_counts(&text, lang);

        let tally = sizes.per_language.entry(lang.name.to_string()).or_default();
        tally.files += 1;
        tally.lines.add(&counts);
        sizes.all.files += 1;
        sizes.all.lines.add(&counts);
        if languages.is_filtered(lang.name) {
            sizes.filtered.files += 1;
            sizes.filtered.lines.add(&counts);
        }
    }
    Ok(sizes)
}

/// Regular files under `root` in deterministic order, skipping `.git`.
pub fn sorted_source_files(
    root: &Path,
) -> impl Iterator<Item = Result<std::path::PathBuf>> {
    walkdir::WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        // `.git` is a directory in a normal checkout and a pointer file in a
        // linked worktree; neither is source.
        .filter_entry(|e| e.file_name() != ".git")
        .filter_map(|entry| match entry {
            Ok(e) if e.file_type().is_file() => Some(Ok(e.into_path())),
            Ok(_) => None,
            Err(e) => Some(Err(crate::error::Error::Extraction(format!(
                "tree walk failed: {e}"
            )))),
        })
}
