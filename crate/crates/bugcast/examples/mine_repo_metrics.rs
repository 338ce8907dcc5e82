//! Script a small git repository, snapshot it at two release freezes, and
//! extract the full metric catalog for each release.
//!
//!     cargo run --example mine_repo_metrics

use bugcast::metrics::extract_all;
use bugcast::metrics::git::{RepoBuilder, RepoHandle};
use bugcast::model::{LanguageConfig, MetricCatalog, ReleaseSpec, Timeline};
use chrono::{NaiveDate, TimeZone, Utc};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let repo = RepoBuilder::init(dir.path())?;

    repo.write(
        "src/Parser.java",
        "class Parser {\n    int parse(int x) {\n        if (x > 0) {\n            return x;\n        }\n        return 0;\n    }\n}\n",
    )?;
    repo.write("tool.c", "int run(void) {\n    return 1;\n}\n")?;
    repo.commit(
        "initial layout",
        Utc.with_ymd_and_hms(2024, 1, 15, 9, 0, 0).unwrap(),
        "Ada",
        "ada@example.org",
    )?;

    repo.write(
        "src/Parser.java",
        "class Parser {\n    int parse(int x) {\n        if (x > 0) {\n            while (x > 10) {\n                x -= 1;\n            }\n            return x;\n        }\n        return 0;\n    }\n}\n",
    )?;
    repo.write("src/Lexer.java", "class Lexer {\n    int next() {\n        return -1;\n    }\n}\n")?;
    repo.commit(
        "grow the parser, add a lexer",
        Utc.with_ymd_and_hms(2024, 6, 20, 14, 30, 0).unwrap(),
        "Brin",
        "brin@example.org",
    )?;

    let timeline = Timeline {
        project: "minidemo".into(),
        releases: vec![
            ReleaseSpec {
                id: 1,
                name: "one".into(),
                start: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
                freeze: NaiveDate::from_ymd_opt(2024, 2, 1).unwrap(),
                release_date: NaiveDate::from_ymd_opt(2024, 2, 15).unwrap(),
                lts: false,
            },
            ReleaseSpec {
                id: 2,
                name: "two".into(),
                start: NaiveDate::from_ymd_opt(2024, 2, 16).unwrap(),
                freeze: NaiveDate::from_ymd_opt(2024, 7, 1).unwrap(),
                release_date: NaiveDate::from_ymd_opt(2024, 7, 15).unwrap(),
                lts: false,
            },
        ],
        languages: LanguageConfig {
            filter: vec!["java".into()],
            excluded: vec![],
        },
    };

    let handle = RepoHandle::open(dir.path())?;
    let catalog = MetricCatalog::standard();
    let (outcomes, failures) = extract_all(&handle, &timeline, &catalog, None);
    for (id, err) in &failures {
        println!("release {id} failed: {err}");
    }

    let shown = [
        "loc",
        "loc_filtered",
        "files",
        "functions",
        "new_loc",
        "modified_loc",
        "new_files",
        "new_modified_functions",
        "commits",
        "contributors",
        "functions_cc_over_10",
    ];
    for out in &outcomes {
        println!("release {}:", out.vector.release_id);
        for w in &out.warnings {
            println!("  warning: {w}");
        }
        for id in shown {
            println!("  {:<24} {}", id, out.vector.get(id).unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
