//! Deterministic synthetic project generator.
//!
//! Builds a real git repository with planted edits, a tracker export whose
//! bug counts follow a planted law, a descriptor, and the exact metric
//! vector each release should measure. Because every planted line is unique
//! within its file and each file takes either additions or removals in one
//! release window (never both), the line diff can only see the edits as
//! planted, which makes the recorded vectors usable as ground truth rather
//! than a re-measurement.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::metrics::git::RepoBuilder;
use crate::model::descriptor::ProjectDescriptor;
use crate::model::{
    day_start_utc, LanguageConfig, MetricCatalog, MetricVector, ReleaseSpec, Timeline,
    CC_THRESHOLDS,
};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub name: String,
    pub releases: usize,
    pub seed: u64,
    /// Multiplicative noise amplitude on the bug law.
    pub noise: f64,
    /// Start of the first release's development window.
    pub start: NaiveDate,
    /// 1-based release ordinal from which `new_loc_coef_late` applies.
    pub regime_change_at: Option<usize>,
    pub commits_coef: f64,
    pub new_loc_coef: f64,
    pub new_loc_coef_late: f64,
    /// Fraction of bugs exported without a release label.
    pub unlabeled_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            name: "synthetica".into(),
            releases: 10,
            seed: 42,
            noise: 0.05,
            start: NaiveDate::from_ymd_opt(2018, 1, 10).unwrap(),
            regime_change_at: None,
            commits_coef: 0.1,
            new_loc_coef: 0.05,
            new_loc_coef_late: 0.2,
            unlabeled_fraction: 0.2,
        }
    }
}

const AUTHORS: [(&str, &str); 5] = [
    ("Ada Kim", "ada@example.org"),
    ("Brin Osei", "brin@example.org"),
    ("Chen Diaz", "chen@example.org"),
    ("Dara Voss", "dara@example.org"),
    ("Eli Marsh", "eli@example.org"),
];

/// Weighted so every complexity threshold stays populated.
const DECISION_COUNTS: [usize; 11] = [0, 1, 2, 3, 5, 8, 11, 14, 17, 21, 24];

#[derive(Debug, Clone)]
struct Block {
    name: String,
    uid: u64,
    /// One `if` line per entry.
    decisions: Vec<String>,
    fillers: Vec<String>,
    java: bool,
}

impl Block {
    fn cc(&self) -> u32 {
        1 + self.decisions.len() as u32
    }

    fn code_lines(&self) -> u64 {
        4 + self.decisions.len() as u64 + self.fillers.len() as u64
    }

    fn render(&self, out: &mut String) {
        let (outer, inner) = if self.java { ("    ", "        ") } else { ("", "    ") };
        let kw = if self.java { "static int" } else { "int" };
        out.push_str(&format!("{outer}{kw} {}(int x) {{\n", self.name));
        out.push_str(&format!("{inner}int acc = x + {};\n", self.uid));
        for d in &self.decisions {
            out.push_str(&format!("{inner}{d}\n"));
        }
        for f in &self.fillers {
            out.push_str(&format!("{inner}{f}\n"));
        }
        out.push_str(&format!("{inner}return acc + {};\n", self.uid));
        out.push_str(&format!("{outer}}} // {}\n", self.name));
    }
}

#[derive(Debug, Clone)]
struct VFile {
    lang: &'static str,
    /// Java files carry a class wrapper (2 code lines); others do not.
    class_name: Option<String>,
    blocks: Vec<Block>,
    /// Plain non-function lines (yaml).
    plain: Vec<String>,
}

impl VFile {
    fn code_lines(&self) -> u64 {
        let wrapper = if self.class_name.is_some() { 2 } else { 0 };
        wrapper + self.blocks.iter().map(Block::code_lines).sum::<u64>() + self.plain.len() as u64
    }

    fn render(&self, path: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("// generated fixture {path}\n"));
        if let Some(class) = &self.class_name {
            out.push_str(&format!("public class {class} {{\n\n"));
        }
        for b in &self.blocks {
            b.render(&mut out);
            out.push('\n');
        }
        if let Some(class) = &self.class_name {
            out.push_str(&format!("}} // {class}\n"));
        }
        for l in &self.plain {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum FileOp {
    Write(String, String),
    Remove(String),
}

#[derive(Debug, Clone)]
pub struct PlannedCommit {
    pub when: DateTime<Utc>,
    pub author: &'static str,
    pub email: &'static str,
    pub message: String,
    pub ops: Vec<FileOp>,
}

#[derive(Debug, Clone)]
pub struct PlannedIssue {
    pub key: String,
    pub issue_type: &'static str,
    pub created: DateTime<Utc>,
    /// Release label; unlabeled bugs rely on the date rule.
    pub version: Option<String>,
}

/// Everything the generator decided, before anything touches disk.
#[derive(Debug, Clone)]
pub struct ProjectPlan {
    pub timeline: Timeline,
    pub truth: Vec<MetricVector>,
    pub planted_bugs: Vec<u64>,
    pub commits: Vec<PlannedCommit>,
    pub issues: Vec<PlannedIssue>,
}

/// Per-window change accounting, one scope pair at a time.
#[derive(Debug, Default, Clone)]
struct WindowCounts {
    new_loc: u64,
    modified_loc: u64,
    removed_loc: u64,
    new_loc_f: u64,
    modified_loc_f: u64,
    removed_loc_f: u64,
    new_files: u64,
    new_files_f: u64,
    touched: BTreeSet<String>,
    touched_f: BTreeSet<String>,
    /// (is_java, cc) of every function added or body-edited this window.
    changed: Vec<(bool, u32)>,
}

struct Generator {
    rng: ChaCha8Rng,
    counter: u64,
    files: BTreeMap<String, VFile>,
}

impl Generator {
    fn next(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }

    fn fresh_block(&mut self, java: bool, decisions: usize) -> Block {
        let uid = self.next();
        let name = format!("{}{uid}", if java { "calc" } else { "run" });
        let decisions = (0..decisions)
            .map(|_| {
                let p = self.rng.gen_range(1..9);
                let inc = self.next();
                if java {
                    format!("if (x > {p}) {{ acc += {inc}; }}")
                } else {
                    format!("if (x > {p}) {{ acc = acc + {inc}; }}")
                }
            })
            .collect();
        let fillers = (0..self.rng.gen_range(1..=6))
            .map(|j| format!("int f{j}x{uid} = acc * {};", self.next()))
            .collect();
        Block { name, uid, decisions, fillers, java }
    }

    fn random_block(&mut self, java: bool) -> Block {
        let d = *DECISION_COUNTS.choose(&mut self.rng).unwrap();
        self.fresh_block(java, d)
    }
}

fn snapshot_totals(files: &BTreeMap<String, VFile>, catalog_ids: &mut BTreeMap<String, f64>) {
    let mut loc = 0u64;
    let mut loc_f = 0u64;
    let mut nfiles = 0u64;
    let mut nfiles_f = 0u64;
    let mut functions = 0u64;
    let mut functions_f = 0u64;
    let mut total_cc = 0u64;
    let mut total_cc_f = 0u64;
    let mut over = [0u64; 3];
    let mut over_f = [0u64; 3];
    for f in files.values() {
        if f.lang == "yaml" {
            continue;
        }
        loc += f.code_lines();
        nfiles += 1;
        let java = f.lang == "java";
        if java {
            loc_f += f.code_lines();
            nfiles_f += 1;
        }
        for b in &f.blocks {
            functions += 1;
            total_cc += b.cc() as u64;
            if java {
                functions_f += 1;
                total_cc_f += b.cc() as u64;
            }
            for (i, t) in CC_THRESHOLDS.iter().enumerate() {
                if b.cc() > *t {
                    over[i] += 1;
                    if java {
                        over_f[i] += 1;
                    }
                }
            }
        }
    }
    catalog_ids.insert("loc".into(), loc as f64);
    catalog_ids.insert("loc_filtered".into(), loc_f as f64);
    catalog_ids.insert("files".into(), nfiles as f64);
    catalog_ids.insert("files_filtered".into(), nfiles_f as f64);
    catalog_ids.insert("functions".into(), functions as f64);
    catalog_ids.insert("functions_filtered".into(), functions_f as f64);
    catalog_ids.insert("total_cc".into(), total_cc as f64);
    catalog_ids.insert("total_cc_filtered".into(), total_cc_f as f64);
    for (i, t) in CC_THRESHOLDS.iter().enumerate() {
        catalog_ids.insert(format!("functions_cc_over_{t}"), over[i] as f64);
        catalog_ids.insert(format!("functions_cc_over_{t}_filtered"), over_f[i] as f64);
    }
}

fn window_totals(w: &WindowCounts, commits: u64, contributors: u64, v: &mut BTreeMap<String, f64>) {
    v.insert("new_loc".into(), w.new_loc as f64);
    v.insert("modified_loc".into(), w.modified_loc as f64);
    v.insert("removed_loc".into(), w.removed_loc as f64);
    v.insert("new_modified_loc".into(), (w.new_loc + w.modified_loc) as f64);
    v.insert("new_loc_filtered".into(), w.new_loc_f as f64);
    v.insert("modified_loc_filtered".into(), w.modified_loc_f as f64);
    v.insert("removed_loc_filtered".into(), w.removed_loc_f as f64);
    v.insert(
        "new_modified_loc_filtered".into(),
        (w.new_loc_f + w.modified_loc_f) as f64,
    );
    v.insert("new_files".into(), w.new_files as f64);
    v.insert("new_files_filtered".into(), w.new_files_f as f64);
    v.insert("modified_files".into(), w.touched.len() as f64);
    v.insert("modified_files_filtered".into(), w.touched_f.len() as f64);

    let count = w.changed.len() as u64;
    let count_f = w.changed.iter().filter(|(j, _)| *j).count() as u64;
    v.insert("new_modified_functions".into(), count as f64);
    v.insert("new_modified_functions_filtered".into(), count_f as f64);
    for t in CC_THRESHOLDS {
        let o = w.changed.iter().filter(|(_, cc)| *cc > t).count();
        let of = w.changed.iter().filter(|(j, cc)| *j && *cc > t).count();
        v.insert(format!("new_modified_functions_cc_over_{t}"), o as f64);
        v.insert(format!("new_modified_functions_cc_over_{t}_filtered"), of as f64);
    }

    v.insert("commits".into(), commits as f64);
    v.insert("contributors".into(), contributors as f64);

    for suffix in ["", "_filtered"] {
        let [nl, ml, rl, nf, mf] = ["new_loc", "modified_loc", "removed_loc", "new_files", "modified_files"]
            .map(|id| v[&format!("{id}{suffix}")]);
        v.insert(format!("new_modified_removed_loc{suffix}"), nl + ml + rl);
        v.insert(format!("new_removed_loc{suffix}"), nl + rl);
        v.insert(format!("new_modified_files{suffix}"), nf + mf);
    }
    let ccx: f64 = CC_THRESHOLDS
        .iter()
        .map(|t| v[&format!("functions_cc_over_{t}_filtered")])
        .sum();
    v.insert("cc_exceedances_filtered".into(), ccx);
}

/// Lays out the whole project in memory. Pure function of the config.
pub fn plan_project(cfg: &SynthConfig) -> Result<ProjectPlan> {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        counter: 0,
        files: BTreeMap::new(),
    };
    let catalog = MetricCatalog::standard();

    let releases: Vec<ReleaseSpec> = (0..cfg.releases)
        .map(|i| {
            let start = cfg.start + Duration::days(182 * i as i64);
            ReleaseSpec {
                id: i as u32 + 1,
                name: format!("v{}", i + 1),
                start,
                freeze: start + Duration::days(140),
                release_date: start + Duration::days(175),
                lts: false,
            }
        })
        .collect();
    let timeline = Timeline {
        project: cfg.name.clone(),
        releases,
        languages: LanguageConfig {
            filter: vec!["java".into()],
            excluded: vec!["yaml".into()],
        },
    };

    let mut commits: Vec<PlannedCommit> = Vec::new();

    // Baseline tree, committed before the first window opens.
    for (path, class, ccs) in [
        ("src/core/Alpha.java", "Alpha", vec![0, 1, 11]),
        ("src/core/Beta.java", "Beta", vec![3, 15]),
    ] {
        let blocks = ccs.into_iter().map(|d| g.fresh_block(true, d)).collect();
        g.files.insert(
            path.into(),
            VFile { lang: "java", class_name: Some(class.into()), blocks, plain: vec![] },
        );
    }
    let engine_blocks = vec![g.fresh_block(false, 0), g.fresh_block(false, 20)];
    g.files.insert(
        "native/engine.c".into(),
        VFile { lang: "c", class_name: None, blocks: engine_blocks, plain: vec![] },
    );
    let yaml_lines = (0..6).map(|_| format!("key{}: {}", g.next(), g.next())).collect();
    g.files.insert(
        "config/service.yaml".into(),
        VFile { lang: "yaml", class_name: None, blocks: vec![], plain: yaml_lines },
    );
    let baseline_ops: Vec<FileOp> = g
        .files
        .iter()
        .map(|(p, f)| FileOp::Write(p.clone(), f.render(p)))
        .collect();
    commits.push(PlannedCommit {
        when: day_start_utc(cfg.start - Duration::days(25)) + Duration::hours(10),
        author: AUTHORS[0].0,
        email: AUTHORS[0].1,
        message: "initial layout".into(),
        ops: baseline_ops,
    });

    let mut truth = Vec::new();
    let mut planted_bugs = Vec::new();
    let mut issues = Vec::new();
    let mut issue_no = 0usize;

    for (k, release) in timeline.releases.clone().iter().enumerate() {
        let mut w = WindowCounts::default();
        let n_commits = g.rng.gen_range(10..=20usize);

        // Eligible edit targets existed before this window opened.
        let pre_files: Vec<String> = g.files.keys().cloned().collect();
        let pre_functions: Vec<(String, String, bool, u64, u32)> = g
            .files
            .iter()
            .flat_map(|(p, f)| {
                f.blocks.iter().map(move |b| {
                    (p.clone(), b.name.clone(), b.java, b.code_lines(), b.cc())
                })
            })
            .collect();

        #[derive(Debug)]
        enum Edit {
            AddFn { path: String, block: Block },
            NewFile { path: String, file: VFile },
            ModifyFiller { path: String, name: String, idx: usize, line: String },
            BumpCc { path: String, name: String, line: String },
            RemoveFn { path: String, name: String },
            RemoveFile { path: String },
            TweakYaml { path: String, line: String },
        }

        let mut edits: Vec<Edit> = Vec::new();
        let mut append_files: BTreeSet<String> = BTreeSet::new();
        let mut removal_files: BTreeSet<String> = BTreeSet::new();
        let mut edited_fns: BTreeSet<(String, String)> = BTreeSet::new();

        // File removal first so nothing else targets the same file. Only
        // small generated files retire; anchors stay.
        if k % 4 == 2 {
            if let Some(path) = pre_files
                .iter()
                .find(|p| p.starts_with("src/gen/") && g.files[*p].blocks.len() <= 2)
            {
                removal_files.insert(path.clone());
                edits.push(Edit::RemoveFile { path: path.clone() });
            }
        }

        // Additions: functions appended to existing java files and the
        // occasional brand-new file.
        let add_fns = g.rng.gen_range(8..=16usize);
        let java_targets: Vec<String> = pre_files
            .iter()
            .filter(|p| g.files[*p].lang == "java" && !removal_files.contains(*p))
            .cloned()
            .collect();
        for _ in 0..add_fns {
            let path = java_targets.choose(&mut g.rng).unwrap().clone();
            append_files.insert(path.clone());
            let block = g.random_block(true);
            edits.push(Edit::AddFn { path, block });
        }
        for _ in 0..g.rng.gen_range(0..=2usize) {
            let uid = g.next();
            let class = format!("Mod{uid}");
            let path = format!("src/gen/{class}.java");
            let blocks = (0..g.rng.gen_range(2..=4usize))
                .map(|_| g.random_block(true))
                .collect();
            let file = VFile { lang: "java", class_name: Some(class), blocks, plain: vec![] };
            append_files.insert(path.clone());
            edits.push(Edit::NewFile { path, file });
        }
        if g.rng.gen_bool(0.5) {
            let path = "native/engine.c".to_string();
            if !removal_files.contains(&path) {
                append_files.insert(path.clone());
                let block = g.random_block(false);
                edits.push(Edit::AddFn { path, block });
            }
        }

        // Body edits: replace one filler line, or push the complexity up by
        // one decision. One edit per function per window.
        let mut editable: Vec<&(String, String, bool, u64, u32)> = pre_functions
            .iter()
            .filter(|(p, ..)| !removal_files.contains(p))
            .collect();
        editable.shuffle(&mut g.rng);
        let n_modify = g.rng.gen_range(3..=8usize).min(editable.len());
        for target in editable.drain(..n_modify) {
            let (path, name, ..) = target;
            let (uid, n_fillers) = {
                let block = g.files[path].blocks.iter().find(|b| b.name == *name).unwrap();
                (block.uid, block.fillers.len())
            };
            let idx = g.rng.gen_range(0..n_fillers);
            let line = format!("int f{idx}x{uid} = acc * {};", g.next());
            edited_fns.insert((path.clone(), name.clone()));
            edits.push(Edit::ModifyFiller {
                path: path.clone(),
                name: name.clone(),
                idx,
                line,
            });
        }
        let n_bump = g.rng.gen_range(1..=3usize).min(editable.len());
        for target in editable.drain(..n_bump) {
            let (path, name, java, _, _) = target;
            let p = g.rng.gen_range(1..9);
            let inc = g.next();
            let line = if *java {
                format!("if (x > {p}) {{ acc += {inc}; }}")
            } else {
                format!("if (x > {p}) {{ acc = acc + {inc}; }}")
            };
            edited_fns.insert((path.clone(), name.clone()));
            edits.push(Edit::BumpCc { path: path.clone(), name: name.clone(), line });
        }

        // Function removals: never from a file that grows this window, never
        // the file's last block, at most one per file.
        let mut removal_candidates: Vec<&(String, String, bool, u64, u32)> = pre_functions
            .iter()
            .filter(|(p, name, java, _, _)| {
                *java
                    && !append_files.contains(p)
                    && !removal_files.contains(p)
                    && !edited_fns.contains(&(p.clone(), name.clone()))
                    && g.files[p].blocks.len() >= 3
                    && g.files[p].blocks.last().map(|b| &b.name) != Some(name)
            })
            .collect();
        removal_candidates.shuffle(&mut g.rng);
        let mut removed_from: BTreeSet<String> = BTreeSet::new();
        let n_remove = g.rng.gen_range(0..=2usize);
        for target in removal_candidates.into_iter().take(n_remove) {
            let (path, name, ..) = target;
            if removed_from.insert(path.clone()) {
                edits.push(Edit::RemoveFn { path: path.clone(), name: name.clone() });
            }
        }

        for _ in 0..g.rng.gen_range(1..=2usize) {
            let line = format!("key{}: {}", g.next(), g.next());
            edits.push(Edit::TweakYaml { path: "config/service.yaml".into(), line });
        }

        // Scatter the edits over this window's commits.
        let contributors = g.rng.gen_range(2..=4usize).min(n_commits);
        let mut authors: Vec<(&str, &str)> =
            AUTHORS.choose_multiple(&mut g.rng, contributors).cloned().collect();
        authors.sort();
        let window_start = day_start_utc(release.start) + Duration::hours(9);
        let window_span = day_start_utc(release.freeze) + Duration::hours(18) - window_start;
        let mut per_commit: Vec<Vec<Edit>> = (0..n_commits).map(|_| Vec::new()).collect();
        for (i, e) in edits.into_iter().enumerate() {
            per_commit[i % n_commits].push(e);
        }

        for (i, batch) in per_commit.into_iter().enumerate() {
            let mut ops = Vec::new();
            let mut touched_paths: BTreeSet<String> = BTreeSet::new();
            for e in batch {
                match e {
                    Edit::AddFn { path, block } => {
                        let java = block.java;
                        let lines = block.code_lines();
                        w.new_loc += lines;
                        if java {
                            w.new_loc_f += lines;
                        }
                        w.changed.push((java, block.cc()));
                        mark_touched(&mut w, &path, java, &pre_files);
                        g.files.get_mut(&path).unwrap().blocks.push(block);
                        touched_paths.insert(path);
                    }
                    Edit::NewFile { path, file } => {
                        let java = file.lang == "java";
                        let lines = file.code_lines();
                        w.new_loc += lines;
                        w.new_files += 1;
                        if java {
                            w.new_loc_f += lines;
                            w.new_files_f += 1;
                        }
                        for b in &file.blocks {
                            w.changed.push((java, b.cc()));
                        }
                        g.files.insert(path.clone(), file);
                        touched_paths.insert(path);
                    }
                    Edit::ModifyFiller { path, name, idx, line } => {
                        let file = g.files.get_mut(&path).unwrap();
                        let java = file.lang == "java";
                        let block = file.blocks.iter_mut().find(|b| b.name == name).unwrap();
                        block.fillers[idx] = line;
                        w.modified_loc += 1;
                        if java {
                            w.modified_loc_f += 1;
                        }
                        w.changed.push((java, block.cc()));
                        mark_touched(&mut w, &path, java, &pre_files);
                        touched_paths.insert(path);
                    }
                    Edit::BumpCc { path, name, line } => {
                        let file = g.files.get_mut(&path).unwrap();
                        let java = file.lang == "java";
                        let block = file.blocks.iter_mut().find(|b| b.name == name).unwrap();
                        block.decisions.push(line);
                        w.new_loc += 1;
                        if java {
                            w.new_loc_f += 1;
                        }
                        w.changed.push((java, block.cc()));
                        mark_touched(&mut w, &path, java, &pre_files);
                        touched_paths.insert(path);
                    }
                    Edit::RemoveFn { path, name } => {
                        let file = g.files.get_mut(&path).unwrap();
                        let java = file.lang == "java";
                        let idx = file.blocks.iter().position(|b| b.name == name).unwrap();
                        let lines = file.blocks[idx].code_lines();
                        file.blocks.remove(idx);
                        w.removed_loc += lines;
                        if java {
                            w.removed_loc_f += lines;
                        }
                        mark_touched(&mut w, &path, java, &pre_files);
                        touched_paths.insert(path);
                    }
                    Edit::RemoveFile { path } => {
                        let file = g.files.remove(&path).unwrap();
                        let java = file.lang == "java";
                        w.removed_loc += file.code_lines();
                        if java {
                            w.removed_loc_f += file.code_lines();
                        }
                        ops.push(FileOp::Remove(path));
                    }
                    Edit::TweakYaml { path, line } => {
                        let file = g.files.get_mut(&path).unwrap();
                        if file.plain.len() > 3 && g.rng.gen_bool(0.5) {
                            let idx = g.rng.gen_range(0..file.plain.len());
                            file.plain[idx] = line;
                        } else {
                            file.plain.push(line);
                        }
                        touched_paths.insert(path);
                    }
                }
            }
            for p in touched_paths {
                let content = g.files[&p].render(&p);
                ops.push(FileOp::Write(p, content));
            }
            let frac = (i as f64 + 0.5) / n_commits as f64;
            let when = window_start
                + Duration::seconds((window_span.num_seconds() as f64 * frac) as i64);
            let (author, email) = authors[i % authors.len()];
            commits.push(PlannedCommit {
                when,
                author,
                email,
                message: format!("change set {}.{}", k + 1, i + 1),
                ops,
            });
        }

        // Ground truth for this release.
        let mut values = BTreeMap::new();
        snapshot_totals(&g.files, &mut values);
        window_totals(&w, n_commits as u64, contributors as u64, &mut values);
        let mut vector = MetricVector::new(release.id);
        vector.values = values;
        vector.conforms_to(&catalog)?;
        truth.push(vector.clone());

        // Planted bug law, then the export records realizing it.
        let loc_coef = match cfg.regime_change_at {
            Some(at) if k + 1 >= at => cfg.new_loc_coef_late,
            _ => cfg.new_loc_coef,
        };
        let law = cfg.commits_coef * n_commits as f64 + loc_coef * w.new_loc as f64;
        let eps = g.rng.gen_range(-cfg.noise..=cfg.noise);
        let bugs = (law * (1.0 + eps)).round().max(1.0) as u64;
        planted_bugs.push(bugs);

        let unlabeled = (bugs as f64 * cfg.unlabeled_fraction).round() as u64;
        let first_created = day_start_utc(release.freeze) + Duration::hours(1);
        for i in 0..bugs {
            issue_no += 1;
            issues.push(PlannedIssue {
                key: format!("SYN-{issue_no}"),
                issue_type: "Bug",
                created: first_created + Duration::minutes(13 * i as i64),
                version: if i < unlabeled { None } else { Some(release.name.clone()) },
            });
        }

        // Sometimes a config-only commit lands between freeze and the next
        // window; it must not disturb any metric.
        if g.rng.gen_bool(0.3) {
            let line = format!("key{}: {}", g.next(), g.next());
            let file = g.files.get_mut("config/service.yaml").unwrap();
            file.plain.push(line);
            let content = g.files["config/service.yaml"].render("config/service.yaml");
            commits.push(PlannedCommit {
                when: day_start_utc(release.freeze) + Duration::days(10),
                author: AUTHORS[0].0,
                email: AUTHORS[0].1,
                message: format!("post-freeze config touchup {}", k + 1),
                ops: vec![FileOp::Write("config/service.yaml".into(), content)],
            });
        }
    }

    // A couple of non-bug issues to exercise type filtering.
    for (i, days) in [40, 200].iter().enumerate() {
        issue_no += 1;
        issues.push(PlannedIssue {
            key: format!("SYN-{issue_no}"),
            issue_type: if i == 0 { "Task" } else { "Story" },
            created: day_start_utc(cfg.start) + Duration::days(*days),
            version: None,
        });
    }

    Ok(ProjectPlan { timeline, truth, planted_bugs, commits, issues })
}

fn mark_touched(w: &mut WindowCounts, path: &str, java: bool, pre_files: &[String]) {
    if pre_files.iter().any(|p| p == path) {
        w.touched.insert(path.to_string());
        if java {
            w.touched_f.insert(path.to_string());
        }
    }
}

/// A generated project on disk.
#[derive(Debug)]
pub struct SyntheticProject {
    pub root: PathBuf,
    pub repo_dir: PathBuf,
    pub descriptor_path: PathBuf,
    pub export_path: PathBuf,
    pub plan: ProjectPlan,
    pub head: String,
}

fn export_json(issues: &[PlannedIssue]) -> serde_json::Value {
    let list: Vec<serde_json::Value> = issues
        .iter()
        .map(|i| {
            let mut fields = serde_json::json!({
                "issuetype": {"name": i.issue_type},
                "created": i.created.to_rfc3339(),
            });
            if let Some(v) = &i.version {
                fields["versions"] = serde_json::json!([{"name": v}]);
            }
            serde_json::json!({"key": i.key, "fields": fields})
        })
        .collect();
    serde_json::json!({"total": list.len(), "issues": list})
}

/// Materializes a plan under `dir`: `repo/` with the planted history,
/// `descriptor.toml`, and `bugs.json`.
pub fn generate(dir: &Path, cfg: &SynthConfig) -> Result<SyntheticProject> {
    let plan = plan_project(cfg)?;
    let repo_dir = dir.join("repo");
    let builder = RepoBuilder::init(&repo_dir)?;
    let mut head = String::new();
    for c in &plan.commits {
        for op in &c.ops {
            match op {
                FileOp::Write(path, content) => builder.write(path, content)?,
                FileOp::Remove(path) => builder.remove(path)?,
            }
        }
        head = builder.commit(&c.message, c.when, c.author, c.email)?;
    }

    let descriptor_path = dir.join("descriptor.toml");
    let descriptor = ProjectDescriptor::new(&plan.timeline, Some("repo".into()))
        .with_export(Some("bugs.json".into()));
    descriptor.save(&descriptor_path)?;

    let export_path = dir.join("bugs.json");
    std::fs::write(
        &export_path,
        serde_json::to_string_pretty(&export_json(&plan.issues)).expect("serializable"),
    )?;

    Ok(SyntheticProject {
        root: dir.to_path_buf(),
        repo_dir,
        descriptor_path,
        export_path,
        plan,
        head,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{build_bug_history, parse_bug_export, ExportFormat, ParseOptions};
    use crate::metrics::extract_all;
    use crate::metrics::git::RepoHandle;
    use crate::model::validate_timeline;

    fn tiny(seed: u64) -> SynthConfig {
        SynthConfig { releases: 4, seed, ..SynthConfig::default() }
    }

    #[test]
    fn plans_are_deterministic_per_seed() {
        let a = plan_project(&tiny(7)).unwrap();
        let b = plan_project(&tiny(7)).unwrap();
        assert_eq!(a.planted_bugs, b.planted_bugs);
        assert_eq!(a.commits.len(), b.commits.len());
        for (x, y) in a.truth.iter().zip(&b.truth) {
            assert_eq!(x, y);
        }
        let c = plan_project(&tiny(8)).unwrap();
        assert_ne!(a.planted_bugs, c.planted_bugs);
    }

    #[test]
    fn planned_timelines_validate_and_vectors_conform() {
        let plan = plan_project(&SynthConfig::default()).unwrap();
        assert!(validate_timeline(&plan.timeline).is_empty());
        assert_eq!(plan.truth.len(), 10);
        let catalog = MetricCatalog::standard();
        for v in &plan.truth {
            v.conforms_to(&catalog).unwrap();
        }
    }

    #[test]
    fn thresholds_stay_monotone_across_seeds() {
        for seed in 0..10 {
            let plan = plan_project(&tiny(seed)).unwrap();
            for v in &plan.truth {
                for prefix in ["functions_cc_over", "new_modified_functions_cc_over"] {
                    for suffix in ["", "_filtered"] {
                        let at = |t: u32| v.get(&format!("{prefix}_{t}{suffix}")).unwrap();
                        assert!(at(10) >= at(15) && at(15) >= at(20), "seed {seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn derived_sums_hold_by_construction() {
        let plan = plan_project(&tiny(3)).unwrap();
        for v in &plan.truth {
            let g = |id: &str| v.get(id).unwrap();
            assert_eq!(g("new_modified_loc"), g("new_loc") + g("modified_loc"));
            assert_eq!(
                g("new_modified_removed_loc"),
                g("new_loc") + g("modified_loc") + g("removed_loc")
            );
            assert_eq!(g("new_modified_files"), g("new_files") + g("modified_files"));
            assert!(g("loc_filtered") <= g("loc"));
            assert!(g("new_modified_functions_filtered") <= g("new_modified_functions"));
        }
    }

    #[test]
    fn bug_law_holds_within_noise() {
        let cfg = SynthConfig::default();
        let plan = plan_project(&cfg).unwrap();
        for (i, v) in plan.truth.iter().enumerate() {
            let law = cfg.commits_coef * v.get("commits").unwrap()
                + cfg.new_loc_coef * v.get("new_loc").unwrap();
            let bugs = plan.planted_bugs[i] as f64;
            assert!(
                (bugs - law).abs() <= law * cfg.noise + 1.0,
                "release {}: bugs {bugs} vs law {law}",
                i + 1
            );
        }
    }

    #[test]
    fn regime_change_shifts_the_law() {
        let cfg = SynthConfig { regime_change_at: Some(6), ..SynthConfig::default() };
        let plan = plan_project(&cfg).unwrap();
        for (i, v) in plan.truth.iter().enumerate() {
            let coef = if i + 1 >= 6 { cfg.new_loc_coef_late } else { cfg.new_loc_coef };
            let law = cfg.commits_coef * v.get("commits").unwrap()
                + coef * v.get("new_loc").unwrap();
            let bugs = plan.planted_bugs[i] as f64;
            assert!((bugs - law).abs() <= law * cfg.noise + 1.0, "release {}", i + 1);
        }
    }

    #[test]
    fn export_reconstructs_planted_bug_counts() {
        let plan = plan_project(&tiny(11)).unwrap();
        let json = serde_json::to_vec(&export_json(&plan.issues)).unwrap();
        let parsed =
            parse_bug_export(&json, ExportFormat::Json, &ParseOptions::default()).unwrap();
        assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
        assert_eq!(parsed.non_bug_count(), 2);
        let (_, warnings) = crate::ingest::assign_all(&parsed.bugs, &plan.timeline);
        assert!(warnings.is_empty(), "{warnings:?}");
        let history = build_bug_history(&parsed.bugs, &plan.timeline).unwrap();
        for (i, r) in plan.timeline.releases.iter().enumerate() {
            let count = history.get(r.id).unwrap();
            assert_eq!(count.total(), plan.planted_bugs[i], "release {}", r.id);
            assert!(count.inferred > 0 || plan.planted_bugs[i] < 3, "release {}", r.id);
        }
    }

    #[test]
    fn extracted_metrics_equal_planted_truth() {
        let dir = tempfile::tempdir().unwrap();
        let project = generate(dir.path(), &tiny(19)).unwrap();
        let repo = RepoHandle::open(&project.repo_dir).unwrap();
        let catalog = MetricCatalog::standard();
        let (outcomes, failures) =
            extract_all(&repo, &project.plan.timeline, &catalog, None);
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(outcomes.len(), project.plan.truth.len());
        for (out, truth) in outcomes.iter().zip(&project.plan.truth) {
            for (id, want) in &truth.values {
                let got = out.vector.get(id).unwrap();
                assert_eq!(
                    got, *want,
                    "release {} metric {id}: extracted {got}, planted {want}",
                    truth.release_id
                );
            }
        }
    }

    #[test]
    fn generation_is_reproducible_on_disk() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let p1 = generate(d1.path(), &tiny(23)).unwrap();
        let p2 = generate(d2.path(), &tiny(23)).unwrap();
        assert_eq!(p1.head, p2.head, "same plan must give identical git history");
        let b1 = std::fs::read(&p1.export_path).unwrap();
        let b2 = std::fs::read(&p2.export_path).unwrap();
        assert_eq!(b1, b2);
    }
}
