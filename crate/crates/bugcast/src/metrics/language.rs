//! Static language table: extensions, comment syntax, and whether the
//! language defines brace-delimited functions our complexity scanner can see.

/// Lexical description of one language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageSpec {
    pub name: &'static str,
    pub extensions: &'static [&'static str],
    pub line_comment: Option<&'static str>,
    pub block_comment: Option<(&'static str, &'static str)>,
    pub string_delims: &'static [char],
    /// Functions are `name(...) { ... }` shaped, so the complexity scanner
    /// applies.
    pub brace_functions: bool,
}

pub static LANGUAGES: &[LanguageSpec] = &[
    LanguageSpec {
        name: "java",
        extensions: &["java"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '\''],
        brace_functions: true,
    },
    LanguageSpec {
        name: "c",
        extensions: &["c", "h"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '\''],
        brace_functions: true,
    },
    LanguageSpec {
        name: "cpp",
        extensions: &["cc", "cpp", "cxx", "hpp", "hh"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '\''],
        brace_functions: true,
    },
    LanguageSpec {
        name: "csharp",
        extensions: &["cs"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '\''],
        brace_functions: true,
    },
    LanguageSpec {
        name: "go",
        extensions: &["go"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '`'],
        brace_functions: true,
    },
    LanguageSpec {
        name: "javascript",
        extensions: &["js", "jsx", "mjs"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '\'', '`'],
        brace_functions: true,
    },
    LanguageSpec {
        name: "typescript",
        extensions: &["ts", "tsx"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"', '\'', '`'],
        brace_functions: true,
    },
    LanguageSpec {
        name: "rust",
        extensions: &["rs"],
        line_comment: Some("//"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['"'],
        brace_functions: true,
    },
    LanguageSpec {
        name: "python",
        extensions: &["py"],
        line_comment: Some("#"),
        block_comment: None,
        string_delims: &['"', '\''],
        brace_functions: false,
    },
    LanguageSpec {
        name: "shell",
        extensions: &["sh", "bash"],
        line_comment: Some("#"),
        block_comment: None,
        string_delims: &['"', '\''],
        brace_functions: false,
    },
    LanguageSpec {
        name: "yaml",
        extensions: &["yaml", "yml"],
        line_comment: Some("#"),
        block_comment: None,
        string_delims: &['"', '\''],
        brace_functions: false,
    },
    LanguageSpec {
        name: "xml",
        extensions: &["xml", "xsd", "xsl"],
        line_comment: None,
        block_comment: Some(("<!--", "-->")),
        string_delims: &[],
        brace_functions: false,
    },
    LanguageSpec {
        name: "html",
        extensions: &["html", "htm"],
        line_comment: None,
        block_comment: Some(("<!--", "-->")),
        string_delims: &[],
        brace_functions: false,
    },
    LanguageSpec {
        name: "json",
        extensions: &["json"],
        line_comment: None,
        block_comment: None,
        string_delims: &['"'],
        brace_functions: false,
    },
    LanguageSpec {
        name: "toml",
        extensions: &["toml"],
        line_comment: Some("#"),
        block_comment: None,
        string_delims: &['"', '\''],
        brace_functions: false,
    },
    LanguageSpec {
        name: "markdown",
        extensions: &["md", "markdown"],
        line_comment: None,
        block_comment: None,
        string_delims: &[],
        brace_functions: false,
    },
    LanguageSpec {
        name: "sql",
        extensions: &["sql"],
        line_comment: Some("--"),
        block_comment: Some(("/*", "*/")),
        string_delims: &['\''],
        brace_functions: false,
    },
    LanguageSpec {
        name: "properties",
        extensions: &["properties", "ini", "cfg"],
        line_comment: Some("#"),
        block_comment: None,
        string_delims: &[],
        brace_functions: false,
    },
];

/// Catch-all for unrecognized extensions: every non-blank line counts as code.
pub static OTHER: LanguageSpec = LanguageSpec {
    name: "other",
    extensions: &[],
    line_comment: None,
    block_comment: None,
    string_delims: &[],
    brace_functions: false,
};

/// Map a path to its language by extension, case-insensitively.
pub fn language_of(path: &std::path::Path) -> &'static LanguageSpec {
    let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
        return &OTHER;
    };
    let ext = ext.to_ascii_lowercase();
    LANGUAGES
        .iter()
        .find(|l| l.extensions.contains(&ext.as_str()))
        .unwrap_or(&OTHER)
}

pub fn by_name(name: &str) -> Option<&'static LanguageSpec> {
    LANGUAGES.iter().find(|l| l.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn extension_lookup() {
        assert_eq!(language_of(Path::new("src/A.java")).name, "java");
        assert_eq!(language_of(Path::new("src/A.JAVA")).name, "java");
        assert_eq!(language_of(Path::new("x/y.yml")).name, "yaml");
        assert_eq!(language_of(Path::new("x/pom.xml")).name, "xml");
        assert_eq!(language_of(Path::new("noext")).name, "other");
        assert_eq!(language_of(Path::new("weird.zzz")).name, "other");
    }

    #[test]
    fn extensions_are_unique_across_languages() {
        let mut seen = std::collections::BTreeSet::new();
        for l in LANGUAGES {
            for e in l.extensions {
                assert!(seen.insert(*e), "extension {e} mapped twice");
            }
        }
    }

    #[test]
    fn brace_function_languages() {
        assert!(by_name("java").unwrap().brace_functions);
        assert!(by_name("Java").unwrap().brace_functions);
        assert!(!by_name("python").unwrap().brace_functions);
        assert!(by_name("klingon").is_none());
    }
}
