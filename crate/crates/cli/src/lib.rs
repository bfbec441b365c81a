//! Batch pipeline commands behind the `dpm` binary.
//!
//! Every command is a function of its input files to its output files:
//! rerunning with the same inputs rewrites byte-identical outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use dpm_core::annotation::{load_scheme, to_sequence, validate_annotations, CodingScheme, DASequence, DASymbol};
use dpm_core::contrast::{contrast_with, ContrastReport};
use dpm_core::corpus::{
    apply_labels, corpus_stats, gap_from_minutes, parse_labels, parse_transcript, sessionize_corpus, Session,
    SessionMode, SessionSource,
};
use dpm_core::predict::{featurize, loocv, train_tree, LoocvReport, TreeModel, TreeParams};
use dpm_core::spm::{
    build_database, build_database_with_table, mine_with, MineOptions, MiningParams, PatternSetRecord, SymbolTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    PerGroup,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
    Md,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "json" => Some(Format::Json),
            "tsv" => Some(Format::Tsv),
            "md" => Some(Format::Md),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub transcripts: Option<PathBuf>,
    /// Session store written by `ingest`; used instead of `transcripts` when set.
    pub sessions: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub scheme: Option<PathBuf>,
    /// Pattern file (pattern set or contrast report) for `train`.
    pub patterns: Option<PathBuf>,
    pub gap_minutes: f64,
    pub resessionize: bool,
    pub params: MiningParams,
    pub scope: Scope,
    /// Explicit `(a, b)` group order for contrast/train.
    pub groups: Option<(String, String)>,
    pub tree: TreeParams,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub top_k: usize,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            transcripts: None,
            sessions: None,
            labels: None,
            scheme: None,
            patterns: None,
            gap_minutes: 15.0,
            resessionize: false,
            params: MiningParams::default(),
            scope: Scope::PerGroup,
            groups: None,
            tree: TreeParams::default(),
            out: PathBuf::from("out"),
            formats: vec![Format::Json],
            top_k: 10,
            parallel: true,
        }
    }
}

impl RunConfig {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn mine_options(&self) -> MineOptions {
        MineOptions {
            cmap_pruning: true,
            parallel: self.parallel,
        }
    }
}

/// Session store written by `ingest`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SessionStore {
    pub source: SessionSource,
    pub gap_ms: i64,
    pub sessions: Vec<Session>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(out: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Loads sessions from the store or the transcripts, then applies labels.
pub fn load_sessions(config: &RunConfig) -> Result<SessionStore> {
    let mut store = if let Some(path) = &config.sessions {
        serde_json::from_str::<SessionStore>(&read_text(path)?)
            .with_context(|| format!("parsing session store {}", path.display()))?
    } else {
        let path = config
            .transcripts
            .as_ref()
            .ok_or_else(|| anyhow!("no input: pass --transcripts or --sessions"))?;
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let turns = parse_transcript(BufReader::new(file)).with_context(|| format!("in {}", path.display()))?;
        let gap = gap_from_minutes(config.gap_minutes);
        let mode = if config.resessionize {
            SessionMode::Resessionize
        } else {
            SessionMode::PreferInput
        };
        let (sessions, source) =
            sessionize_corpus(&turns, gap, mode).with_context(|| format!("sessionizing {}", path.display()))?;
        SessionStore {
            source,
            gap_ms: gap.num_milliseconds(),
            sessions,
        }
    };
    if let Some(path) = &config.labels {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let labels = parse_labels(BufReader::new(file)).with_context(|| format!("in {}", path.display()))?;
        apply_labels(&mut store.sessions, &labels);
    }
    Ok(store)
}

pub fn load_scheme_file(config: &RunConfig) -> Result<CodingScheme> {
    let doc = config.scheme.as_deref().map(read_text).transpose()?;
    load_scheme(doc.as_deref()).with_context(|| match &config.scheme {
        Some(p) => format!("in scheme {}", p.display()),
        None => "in built-in scheme".into(),
    })
}

fn require_labels(sessions: &[Session]) -> Result<()> {
    let missing: Vec<&str> = sessions
        .iter()
        .filter(|s| s.group_label.is_none())
        .map(|s| s.session_id.as_str())
        .collect();
    if !missing.is_empty() {
        bail!(
            "{} session(s) have no group label: {}",
            missing.len(),
            missing.join(", ")
        );
    }
    Ok(())
}

fn sequences(sessions: &[Session], scheme: &CodingScheme) -> Result<Vec<DASequence>> {
    sessions
        .iter()
        .map(|s| to_sequence(s, scheme).with_context(|| format!("in session {}", s.session_id)))
        .collect()
}

fn by_group(seqs: &[DASequence]) -> BTreeMap<String, Vec<DASequence>> {
    let mut groups: BTreeMap<String, Vec<DASequence>> = BTreeMap::new();
    for s in seqs {
        groups
            .entry(s.group_label.clone().expect("labels checked"))
            .or_default()
            .push(s.clone());
    }
    groups
}

fn pick_groups(config: &RunConfig, groups: &BTreeMap<String, Vec<DASequence>>) -> Result<(String, String)> {
    let (a, b) = match &config.groups {
        Some(pair) => pair.clone(),
        None => {
            if groups.len() != 2 {
                bail!(
                    "contrast needs exactly two groups, found {} ({}); pass --groups A,B",
                    groups.len(),
                    groups.keys().cloned().collect::<Vec<_>>().join(", ")
                );
            }
            let mut it = groups.keys().cloned();
            (it.next().unwrap(), it.next().unwrap())
        }
    };
    for g in [&a, &b] {
        if !groups.contains_key(g) {
            bail!("group `{g}` has no sessions");
        }
    }
    Ok((a, b))
}

pub fn cmd_ingest(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let store = load_sessions(config)?;
    let mut written = Vec::new();
    write_file(&config.out, "sessions.json", &pretty(&store), &mut written)?;
    Ok(written)
}

pub fn cmd_stats(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let store = load_sessions(config)?;
    let stats = corpus_stats(&store.sessions);
    let mut written = Vec::new();
    if config.wants(Format::Json) {
        write_file(&config.out, "stats.json", &pretty(&stats.to_json()), &mut written)?;
    }
    if config.wants(Format::Tsv) {
        write_file(&config.out, "stats.tsv", &stats.to_tsv(), &mut written)?;
    }
    if config.wants(Format::Md) {
        write_file(&config.out, "stats.md", &stats.to_markdown(), &mut written)?;
    }
    Ok(written)
}

pub fn cmd_validate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let store = load_sessions(config)?;
    let scheme = load_scheme_file(config)?;
    let report = validate_annotations(&store.sessions, &scheme);
    let mut written = Vec::new();
    if config.wants(Format::Json) {
        write_file(&config.out, "validation.json", &pretty(&report), &mut written)?;
    }
    if config.wants(Format::Tsv) || config.wants(Format::Md) {
        write_file(&config.out, "validation.txt", &report.to_text(), &mut written)?;
    }
    Ok(written)
}

fn pattern_markdown(record: &PatternSetRecord, top_k: usize) -> String {
    let mut out = format!(
        "{} sequences, absolute threshold {}, {} patterns\n\n| pattern | support | rel |\n|---|---:|---:|\n",
        record.sequence_count,
        record.absolute_threshold,
        record.patterns.len()
    );
    let mut ranked: Vec<_> = record.patterns.iter().collect();
    ranked.sort_by_key(|p| std::cmp::Reverse(p.support));
    for p in ranked.into_iter().take(top_k) {
        let _ = writeln!(
            out,
            "| `{}` | {} | {:.2} |",
            p.symbols.join(" - "),
            p.support,
            p.rel_support
        );
    }
    out
}

/// Mines each group (or the pooled corpus) with identical parameters.
pub fn mine_groups(config: &RunConfig) -> Result<Vec<(String, PatternSetRecord, String)>> {
    let store = load_sessions(config)?;
    let scheme = load_scheme_file(config)?;
    let seqs = sequences(&store.sessions, &scheme)?;
    let groups: BTreeMap<String, Vec<DASequence>> = match config.scope {
        Scope::Pooled => BTreeMap::from([("pooled".to_string(), seqs)]),
        Scope::PerGroup => {
            require_labels(&store.sessions)?;
            by_group(&seqs)
        }
    };
    let mut out = Vec::new();
    for (name, group) in groups {
        let db = build_database(&group).with_context(|| format!("building database for {name}"))?;
        let (set, _) = mine_with(&db, &config.params, config.mine_options())?;
        let record = set.to_record(db.table(), &config.params, Some(&name));
        out.push((name, record, set.to_tsv(db.table())));
    }
    Ok(out)
}

pub fn cmd_mine(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, record, tsv) in mine_groups(config)? {
        let stem = format!("patterns_{}", file_safe(&name));
        if config.wants(Format::Json) {
            write_file(&config.out, &format!("{stem}.json"), &pretty(&record), &mut written)?;
        }
        if config.wants(Format::Tsv) {
            write_file(&config.out, &format!("{stem}.tsv"), &tsv, &mut written)?;
        }
        if config.wants(Format::Md) {
            write_file(
                &config.out,
                &format!("{stem}.md"),
                &pattern_markdown(&record, config.top_k),
                &mut written,
            )?;
        }
    }
    Ok(written)
}

/// Group sequences plus the contrast report between the two chosen groups.
pub struct Contrasted {
    pub sequences: Vec<DASequence>,
    pub report: ContrastReport,
}

pub fn run_contrast(config: &RunConfig) -> Result<Contrasted> {
    let store = load_sessions(config)?;
    require_labels(&store.sessions)?;
    let scheme = load_scheme_file(config)?;
    let seqs = sequences(&store.sessions, &scheme)?;
    let groups = by_group(&seqs);
    let (a, b) = pick_groups(config, &groups)?;
    let union: Vec<DASequence> = groups[&a].iter().chain(&groups[&b]).cloned().collect();
    let table = SymbolTable::from_sequences(&union);
    let db_a = build_database_with_table(table.clone(), &groups[&a])?;
    let db_b = build_database_with_table(table, &groups[&b])?;
    let report = contrast_with(&db_a, &db_b, &config.params, &a, &b, config.mine_options())?;
    Ok(Contrasted {
        sequences: union,
        report,
    })
}

pub fn cmd_contrast(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let Contrasted { report, .. } = run_contrast(config)?;
    let mut written = Vec::new();
    if config.wants(Format::Json) {
        write_file(&config.out, "contrast.json", &pretty(&report.to_json()), &mut written)?;
    }
    if config.wants(Format::Tsv) {
        write_file(&config.out, "contrast.tsv", &report.to_tsv(), &mut written)?;
    }
    if config.wants(Format::Md) {
        write_file(
            &config.out,
            "contrast.md",
            &report.to_markdown(config.top_k),
            &mut written,
        )?;
    }
    Ok(written)
}

/// Reads pattern symbol lists from a pattern-set or contrast JSON file.
pub fn read_pattern_file(path: &Path) -> Result<Vec<Vec<DASymbol>>> {
    let value: serde_json::Value =
        serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let mut lists = Vec::new();
    let sections: &[&str] = if value.get("patterns").is_some() {
        &["patterns"]
    } else {
        &["unique_to_a", "unique_to_b", "shared"]
    };
    for key in sections {
        let entries = value
            .get(key)
            .and_then(|v| v.as_array())
            .ok_or_else(|| anyhow!("{}: missing `{key}` array", path.display()))?;
        for e in entries {
            let syms: Vec<String> = serde_json::from_value(e.get("symbols").cloned().unwrap_or_default())
                .with_context(|| format!("{}: bad `symbols` entry", path.display()))?;
            let parsed = syms
                .iter()
                .map(|s| s.parse::<DASymbol>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("in {}", path.display()))?;
            lists.push(parsed);
        }
    }
    Ok(lists)
}

pub struct Trained {
    pub report: ContrastReport,
    pub model: TreeModel,
    pub loocv: LoocvReport,
    pub features_tsv: String,
}

pub fn run_train(config: &RunConfig) -> Result<Trained> {
    let Contrasted { sequences, report } = run_contrast(config)?;
    let patterns: Vec<Vec<DASymbol>> = match &config.patterns {
        Some(path) => read_pattern_file(path)?,
        None => report
            .all_patterns()
            .iter()
            .map(|p| p.iter().map(|s| s.parse()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?,
    };
    if patterns.is_empty() {
        bail!("no patterns to train on: the contrast produced an empty frequent set");
    }
    let features = featurize(&sequences, &patterns, config.params.max_gap)?;
    let model = train_tree(&features, config.tree)?;
    let cv = loocv(&features, config.tree)?;
    Ok(Trained {
        report,
        model,
        loocv: cv,
        features_tsv: features.to_tsv(),
    })
}

pub fn cmd_train(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let t = run_train(config)?;
    let mut written = Vec::new();
    write_file(&config.out, "features.tsv", &t.features_tsv, &mut written)?;
    write_file(
        &config.out,
        "tree.json",
        &format!("{}\n", t.model.to_json()),
        &mut written,
    )?;
    write_file(&config.out, "tree_rules.txt", &t.model.render_rules(), &mut written)?;
    if config.wants(Format::Json) {
        write_file(&config.out, "loocv.json", &pretty(&t.loocv), &mut written)?;
    }
    if config.wants(Format::Tsv) || config.wants(Format::Md) {
        write_file(&config.out, "loocv.tsv", &t.loocv.to_tsv(), &mut written)?;
    }
    Ok(written)
}

fn fmt_gap(g: Option<usize>) -> String {
    g.map_or("unbounded".into(), |g| g.to_string())
}

pub fn render_report(config: &RunConfig) -> Result<String> {
    let store = load_sessions(config)?;
    let scheme = load_scheme_file(config)?;
    let stats = corpus_stats(&store.sessions);
    let validation = validate_annotations(&store.sessions, &scheme);
    let p = &config.params;

    let mut md = String::from("# Dialogue-act pattern report\n\n## Settings\n\n");
    let _ = writeln!(
        md,
        "- sessions: {} ({})\n- session gap: {} ms\n- scheme: {} ({} acts)\n- min support: {}\n- max gap: {}\n- min length: {}\n- max length: {}\n- support scope: {}\n",
        store.sessions.len(),
        match store.source {
            SessionSource::Input => "input session ids",
            SessionSource::Recomputed => "recomputed from timestamps",
        },
        store.gap_ms,
        scheme.name,
        scheme.acts.len(),
        p.min_support,
        fmt_gap(p.max_gap),
        p.min_len,
        fmt_gap(p.max_len),
        match config.scope {
            Scope::PerGroup => "per group",
            Scope::Pooled => "pooled",
        }
    );
    md.push_str("## Corpus\n\n");
    md.push_str(&stats.to_markdown());
    let _ = writeln!(
        md,
        "\n## Annotation\n\n{} turns, {} valid, {} missing, {} unknown codes\n",
        validation.total_turns,
        validation.valid,
        validation.missing.len(),
        validation.unknown.len()
    );
    if !validation.is_clean() {
        md.push_str(
            "Pattern mining needs every turn annotated with a scheme code; fix the turns listed by `dpm validate`.\n",
        );
        return Ok(md);
    }

    md.push_str("## Frequent patterns\n\n");
    for (name, record, _) in mine_groups(config)? {
        let _ = writeln!(md, "### {name}\n");
        md.push_str(&pattern_markdown(&record, config.top_k));
        md.push('\n');
    }
    if store.sessions.iter().all(|s| s.group_label.is_some()) {
        let groups = store
            .sessions
            .iter()
            .filter_map(|s| s.group_label.clone())
            .collect::<std::collections::BTreeSet<_>>();
        if groups.len() == 2 || config.groups.is_some() {
            let t = run_train(config)?;
            md.push_str("## Contrast\n\n");
            md.push_str(&t.report.to_markdown(config.top_k));
            let _ = writeln!(
                md,
                "## Decision tree\n\n```\n{}```\n\nLeave-one-out accuracy: {}/{} ({:.3})\n",
                t.model.render_rules(),
                t.loocv.correct,
                t.loocv.total,
                t.loocv.accuracy
            );
        }
    }
    Ok(md)
}

pub fn cmd_report(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let md = render_report(config)?;
    let mut written = Vec::new();
    write_file(&config.out, "report.md", &md, &mut written)?;
    Ok(written)
}

/// Runs every stage into `config.out`.
pub fn cmd_run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = cmd_ingest(config)?;
    written.extend(cmd_stats(config)?);
    written.extend(cmd_validate(config)?);
    written.extend(cmd_mine(config)?);
    written.extend(cmd_contrast(config)?);
    written.extend(cmd_train(config)?);
    written.extend(cmd_report(config)?);
    Ok(written)
}
