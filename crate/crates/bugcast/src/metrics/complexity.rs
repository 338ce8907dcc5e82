//! Lexical cyclomatic complexity for brace-delimited languages.
//!
//! Functions are recognized by the shape `name ( params ) ... {` after
//! comments and strings are lexed away; no parser or type information is
//! involved. Complexity is 1 plus the count of `if`, `for`, `while`, `case`,
//! `catch`, `&&`, `||`, and `?` tokens in the body. The trade-off is the
//! usual one for lexical scanners: decision keywords inside macro bodies or
//! exotic syntax can miscount, and functions without a C-like signature
//! (lambdas, arrow functions, some generic return types) are not seen.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::metrics::language::{language_of, LanguageSpec};
use crate::metrics::loc::{is_binary, sorted_source_files};
use crate::model::{LanguageConfig, CC_THRESHOLDS};

/// One function found in a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    /// Path relative to the snapshot root, `/`-separated.
    pub file: String,
    pub language: String,
    pub name: String,
    /// Normalized `name(params)` text; the matching key across snapshots.
    pub signature: String,
    pub cc: u32,
    /// Hash of the body token stream, whitespace- and comment-insensitive.
    pub body_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    AndAnd,
    OrOr,
    Question,
    Other(char),
}

impl Tok {
    fn text(&self) -> std::borrow::Cow<'_, str> {
        use std::borrow::Cow;
        match self {
            Tok::Ident(s) | Tok::Num(s) | Tok::Str(s) => Cow::Borrowed(s),
            Tok::LParen => Cow::Borrowed("("),
            Tok::RParen => Cow::Borrowed(")"),
            Tok::LBrace => Cow::Borrowed("{"),
            Tok::RBrace => Cow::Borrowed("}"),
            Tok::AndAnd => Cow::Borrowed("&&"),
            Tok::OrOr => Cow::Borrowed("||"),
            Tok::Question => Cow::Borrowed("?"),
            Tok::Other(c) => Cow::Owned(c.to_string()),
        }
    }

    /// Variant discriminant mixed into body hashes so, say, the identifier
    /// `x` and the string `"x"` never hash alike.
    fn tag(&self) -> u8 {
        match self {
            Tok::Ident(_) => 1,
            Tok::Num(_) => 2,
            Tok::Str(_) => 3,
            Tok::LParen => 4,
            Tok::RParen => 5,
            Tok::LBrace => 6,
            Tok::RBrace => 7,
            Tok::AndAnd => 8,
            Tok::OrOr => 9,
            Tok::Question => 10,
            Tok::Other(_) => 11,
        }
    }
}

fn lex(text: &str, lang: &LanguageSpec) -> Vec<Tok> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let preprocessor = matches!(lang.name, "c" | "cpp" | "csharp");
    let mut line_start = true;

    while i < bytes.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap();

        if let Some((open, close)) = lang.block_comment {
            if rest.starts_with(open) {
                let after = &text[i + open.len()..];
                i += open.len() + after.find(close).map(|p| p + close.len()).unwrap_or(after.len());
                continue;
            }
        }
        if let Some(lc) = lang.line_comment {
            if rest.starts_with(lc) {
                i += rest.find('\n').unwrap_or(rest.len());
                continue;
            }
        }
        if preprocessor && line_start && c == '#' {
            i += rest.find('\n').unwrap_or(rest.len());
            continue;
        }
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        line_start = false;

        if lang.string_delims.contains(&c) {
            if c == '\'' && lang.name == "rust" {
                // Lifetimes look like unterminated char literals; only skip
                // real `'x'` / `'\x'` shapes.
                let tail: Vec<char> = rest.chars().take(4).collect();
                let consumed = match tail.as_slice() {
                    ['\'', '\\', _, '\''] => 4,
                    ['\'', a, '\'', ..] if *a != '\\' => 3,
                    _ => 0,
                };
                if consumed > 0 {
                    let len: usize = tail.iter().take(consumed).map(|c| c.len_utf8()).sum();
                    toks.push(Tok::Str(text[i..i + len].to_string()));
                    i += len;
                } else {
                    toks.push(Tok::Other('\''));
                    i += 1;
                }
                continue;
            }
            let mut j = i + c.len_utf8();
            while j < bytes.len() {
                let sc = text[j..].chars().next().unwrap();
                if sc == '\\' {
                    j += 1;
                    if let Some(esc) = text[j..].chars().next() {
                        j += esc.len_utf8();
                    }
                    continue;
                }
                j += sc.len_utf8();
                if sc == c || sc == '\n' {
                    break;
                }
            }
            toks.push(Tok::Str(text[i..j].to_string()));
            i = j;
            continue;
        }

        if c.is_alphabetic() || c == '_' || c == '$' {
            let end = rest
                .char_indices()
                .find(|(_, ch)| !(ch.is_alphanumeric() || *ch == '_' || *ch == '$'))
                .map(|(p, _)| p)
                .unwrap_or(rest.len());
            toks.push(Tok::Ident(rest[..end].to_string()));
            i += end;
            continue;
        }
        if c.is_ascii_digit() {
            let end = rest
                .char_indices()
                .find(|(_, ch)| !(ch.is_alphanumeric() || *ch == '_' || *ch == '.'))
                .map(|(p, _)| p)
                .unwrap_or(rest.len());
            toks.push(Tok::Num(rest[..end].to_string()));
            i += end;
            continue;
        }
        if rest.starts_with("&&") {
            toks.push(Tok::AndAnd);
            i += 2;
            continue;
        }
        if rest.starts_with("||") {
            toks.push(Tok::OrOr);
            i += 2;
            continue;
        }
        toks.push(match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '?' => Tok::Question,
            other => Tok::Other(other),
        });
        i += c.len_utf8();
    }
    toks
}

const DECISION_KEYWORDS: [&str; 5] = ["if", "for", "while", "case", "catch"];

/// Names that can never start a function definition.
const NON_FUNCTION_NAMES: [&str; 22] = [
    "if", "else", "for", "while", "do", "switch", "case", "catch", "try", "finally", "return",
    "throw", "new", "assert", "synchronized", "using", "lock", "match", "loop", "select",
    "defer", "func",
];

fn between_token_ok(t: &Tok) -> bool {
    match t {
        Tok::Ident(_) | Tok::Num(_) => true,
        Tok::Other(c) => matches!(c, ',' | ':' | '<' | '>' | '&' | '*' | '[' | ']' | '.' | '-' | '+' | '|' | '!' | '~'),
        _ => false,
    }
}

const MAX_BETWEEN_TOKENS: usize = 24;

struct OpenFn {
    name: String,
    signature: String,
    cc: u32,
    open_depth: i64,
    hasher: Sha256,
}

/// Scan one file's text for functions. Errors carry the reason the file is
/// unscannable (currently: unbalanced braces).
pub fn scan_functions(
    text: &str,
    lang: &'static LanguageSpec,
    file: &str,
) -> std::result::Result<Vec<FunctionRecord>, String> {
    let toks = lex(text, lang);
    let mut out = Vec::new();
    let mut stack: Vec<OpenFn> = Vec::new();
    let mut depth: i64 = 0;

    let mut i = 0;
    while i < toks.len() {
        if let Tok::Ident(name) = &toks[i] {
            let excluded = NON_FUNCTION_NAMES.contains(&name.as_str())
                || matches!(i.checked_sub(1).map(|p| &toks[p]), Some(Tok::Ident(p)) if p == "new")
                || matches!(i.checked_sub(1).map(|p| &toks[p]), Some(Tok::Other('@')));
            if !excluded && matches!(toks.get(i + 1), Some(Tok::LParen)) {
                if let Some((params_end, brace_idx)) = match_signature(&toks, i + 1) {
                    let params: Vec<String> = toks[i + 2..params_end]
                        .iter()
                        .map(|t| t.text().into_owned())
                        .filter(|r| !r.is_empty())
                        .collect();
                    let signature = format!("{name}({})", params.join(" "));
                    attr_tokens(&mut stack, &toks[i..=brace_idx]);
                    stack.push(OpenFn {
                        name: name.clone(),
                        signature,
                        cc: 1,
                        open_depth: depth,
                        hasher: Sha256::new(),
                    });
                    depth += 1;
                    i = brace_idx + 1;
                    continue;
                }
            }
        }

        match &toks[i] {
            Tok::LBrace => {
                attr_one(&mut stack, &toks[i]);
                depth += 1;
            }
            Tok::RBrace => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced braces (extra '}')".into());
                }
                if stack.last().map(|f| f.open_depth == depth).unwrap_or(false) {
                    let f = stack.pop().unwrap();
                    out.push(FunctionRecord {
                        file: file.to_string(),
                        language: lang.name.to_string(),
                        name: f.name,
                        signature: f.signature,
                        cc: f.cc,
                        body_hash: hex::encode(f.hasher.finalize())[..16].to_string(),
                    });
                } else {
                    attr_one(&mut stack, &toks[i]);
                }
            }
            t => attr_one(&mut stack, t),
        }
        i += 1;
    }

    if depth != 0 || !stack.is_empty() {
        return Err("unbalanced braces at end of file".into());
    }
    // File order, not completion order: nested functions close first.
    out.sort_by(|a, b| a.file.cmp(&b.file).then(a.signature.cmp(&b.signature)));
    Ok(out)
}

/// From the opening paren of a candidate, find the matching close paren and
/// the following `{`, tolerating modifier tokens in between.
fn match_signature(toks: &[Tok], lparen: usize) -> Option<(usize, usize)> {
    let mut depth = 0i32;
    let mut j = lparen;
    loop {
        match toks.get(j)? {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            Tok::LBrace | Tok::RBrace => return None,
            _ => {}
        }
        j += 1;
    }
    let params_end = j;
    let mut k = params_end + 1;
    let mut between = 0;
    loop {
        match toks.get(k)? {
            Tok::LBrace => return Some((params_end, k)),
            t if between_token_ok(t) => {
                between += 1;
                if between > MAX_BETWEEN_TOKENS {
                    return None;
                }
            }
            _ => return None,
        }
        k += 1;
    }
}

fn attr_tokens(stack: &mut [OpenFn], toks: &[Tok]) {
    for t in toks {
        attr_one(stack, t);
    }
}

fn attr_one(stack: &mut [OpenFn], tok: &Tok) {
    let Some(top) = stack.last_mut() else { return };
    match tok {
        Tok::Ident(name) if DECISION_KEYWORDS.contains(&name.as_str()) => top.cc += 1,
        Tok::AndAnd | Tok::OrOr | Tok::Question => top.cc += 1,
        _ => {}
    }
    top.hasher.update([tok.tag()]);
    top.hasher.update(tok.text().as_bytes());
    top.hasher.update([0x1f]);
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexitySummary {
    pub functions: u64,
    pub total_cc: u64,
    /// Functions with CC strictly above each of [`CC_THRESHOLDS`].
    pub over: [u64; 3],
}

pub fn summarize_functions<'a>(records: impl IntoIterator<Item = &'a FunctionRecord>) -> ComplexitySummary {
    let mut s = ComplexitySummary::default();
    for r in records {
        s.functions += 1;
        s.total_cc += r.cc as u64;
        for (slot, t) in s.over.iter_mut().zip(CC_THRESHOLDS) {
            if r.cc > t {
                *slot += 1;
            }
        }
    }
    s
}

#[derive(Debug, Clone, Default)]
pub struct TreeComplexity {
    pub records: Vec<FunctionRecord>,
    /// Files that failed the lexical scan, with reasons. They contribute no
    /// functions.
    pub skipped: Vec<(String, String)>,
}

impl TreeComplexity {
    pub fn summary_all(&self) -> ComplexitySummary {
        summarize_functions(self.records.iter())
    }

    pub fn summary_filtered(&self, languages: &LanguageConfig) -> ComplexitySummary {
        summarize_functions(
            self.records
                .iter()
                .filter(|r| languages.is_filtered(&r.language)),
        )
    }
}

/// Scan every brace-language file of a snapshot.
pub fn complexity_metrics(root: &std::path::Path, languages: &LanguageConfig) -> Result<TreeComplexity> {
    let mut out = TreeComplexity::default();
    for path in sorted_source_files(root) {
        let path = path?;
        let lang = language_of(&path);
        if !lang.brace_functions || languages.is_excluded(lang.name) {
            continue;
        }
        let rel = path
            .strip_prefix(root)
            .expect("walked path under root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let bytes = std::fs::read(&path)?;
        if is_binary(&bytes) {
            out.skipped.push((rel, "binary content".into()));
            continue;
        }
        let text = String::from_utf8_lossy(&bytes);
        match scan_functions(&text, lang, &rel) {
            Ok(mut recs) => out.records.append(&mut recs),
            Err(reason) => out.skipped.push((rel, reason)),
        }
    }
    out.records
        .sort_by(|a, b| a.file.cmp(&b.file).then(a.signature.cmp(&b.signature)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedFunctions {
    pub count: u64,
    pub over: [u64; 3],
}

/// Functions that are new or whose body changed between snapshots, matched
/// by file and signature. Repeated signatures in one file pair up
/// positionally. Deleted functions are ignored.
pub fn changed_function_metrics(old: &[FunctionRecord], new: &[FunctionRecord]) -> ChangedFunctions {
    let mut old_index: BTreeMap<(&str, &str), VecDeque<&FunctionRecord>> = BTreeMap::new();
    for r in old {
        old_index
            .entry((r.file.as_str(), r.signature.as_str()))
            .or_default()
            .push_back(r);
    }
    let mut out = ChangedFunctions::default();
    for r in new {
        let prior = old_index
            .get_mut(&(r.file.as_str(), r.signature.as_str()))
            .and_then(|q| q.pop_front());
        let changed = match prior {
            None => true,
            Some(p) => p.body_hash != r.body_hash,
        };
        if changed {
            out.count += 1;
            for (slot, t) in out.over.iter_mut().zip(CC_THRESHOLDS) {
                if r.cc > t {
                    *slot += 1;
                }
            }
        }
    }
    out
}
