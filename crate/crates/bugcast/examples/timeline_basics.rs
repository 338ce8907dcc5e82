//! Build a release timeline by hand, validate it, and inspect the
//! date-inference windows each release owns.
//!
//!     cargo run --example timeline_basics

use bugcast::model::{
    day_start_utc, validate_timeline, LanguageConfig, ReleaseSpec, Timeline,
};
use chrono::NaiveDate;

fn day(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

fn main() {
    let timeline = Timeline {
        project: "demo".into(),
        releases: vec![
            ReleaseSpec {
                id: 1,
                name: "helium".into(),
                start: day(2023, 1, 9),
                freeze: day(2023, 5, 22),
                release_date: day(2023, 6, 26),
                lts: false,
            },
            ReleaseSpec {
                id: 2,
                name: "neon".into(),
                start: day(2023, 7, 10),
                freeze: day(2023, 11, 20),
                release_date: day(2023, 12, 18),
                lts: true,
            },
            ReleaseSpec {
                id: 3,
                name: "argon".into(),
                start: day(2024, 1, 8),
                freeze: day(2024, 5, 20),
                release_date: day(2024, 6, 24),
                lts: false,
            },
        ],
        languages: LanguageConfig {
            filter: vec!["java".into()],
            excluded: vec!["yaml".into()],
        },
    };

    let violations = validate_timeline(&timeline);
    if violations.is_empty() {
        println!("timeline ok: {} releases", timeline.releases.len());
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        return;
    }

    println!("\ndate-inference windows (freeze day-start boundaries):");
    for (i, r) in timeline.releases.iter().enumerate() {
        let lower = if i == 0 {
            "open".to_string()
        } else {
            day_start_utc(r.freeze).to_rfc3339()
        };
        let upper = timeline
            .releases
            .get(i + 1)
            .map(|next| day_start_utc(next.freeze).to_rfc3339())
            .unwrap_or_else(|| "open".into());
        println!(
            "  release {} {:<8} [{} .. {})  lts={}",
            r.id, r.name, lower, upper, r.lts
        );
    }

    println!("\nlookups:");
    println!("  position of id 2 -> {:?}", timeline.position(2));
    println!("  release named by id 3 -> {:?}", timeline.release(3).map(|r| &r.name));
}
