//! Transcript records, sessionization and descriptive corpus statistics.
//!
//! Transcripts are JSONL: one turn per line with the fields `id`, `ts`,
//! `role`, `model`, `user`, `session`, `text`, `da` (and the optional
//! `da_secondary`). Timestamps are ISO 8601 UTC and are kept at millisecond
//! precision.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

pub use chrono::TimeDelta;
use chrono::{DateTime, SecondsFormat, Utc};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default sessionization threshold.
pub const DEFAULT_GAP_MINUTES: i64 = 15;

/// Group key used by [`corpus_stats`] for sessions without a label.
pub const UNLABELED_GROUP: &str = "(unlabeled)";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate turn id `{id}` (first seen on line {first})")]
    DuplicateId { line: usize, id: String, first: usize },
    #[error("line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("turns belong to more than one user ({0:?}); partition by user first")]
    MixedUsers(Vec<String>),
    #[error("some turns carry a session id and others do not (e.g. turn `{0}`); use resessionize mode")]
    PartialSessionIds(String),
    #[error("session `{session}`: {message}")]
    InvalidSession { session: String, message: String },
    #[error("labels line {line}: {message}")]
    Labels { line: usize, message: String },
    #[error("gap threshold must be positive")]
    NonPositiveGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Student,
    Chatbot,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Student, Role::Chatbot];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Student => "student",
            Role::Chatbot => "chatbot",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "student" => Some(Role::Student),
            "chatbot" => Some(Role::Chatbot),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub role: Role,
    /// Empty for student turns.
    pub model_name: String,
    pub user_id: String,
    pub session_id: Option<String>,
    pub text: String,
    /// Primary act code, role independent (`Q`, not `[t]Q`).
    pub da_code: Option<String>,
    /// Additional codes for multi-coded turns. Recorded, never mined.
    pub da_secondary: Option<String>,
}

impl DialogueTurn {
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// Wire form of a transcript line.
#[derive(Debug, Serialize, Deserialize)]
struct TurnRecord {
    id: Option<String>,
    ts: Option<String>,
    role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    user: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    session: Option<String>,
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    da: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    da_secondary: Option<String>,
}

fn field_err(line: usize, field: &'static str, message: impl Into<String>) -> CorpusError {
    CorpusError::Field {
        line,
        field,
        message: message.into(),
    }
}

/// Parses an ISO 8601 UTC timestamp, truncating to milliseconds.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    let dt = DateTime::parse_from_rfc3339(s).map_err(|e| format!("invalid timestamp `{s}`: {e}"))?;
    if dt.offset().local_minus_utc() != 0 {
        return Err(format!("timestamp `{s}` is not UTC"));
    }
    let utc = dt.with_timezone(&Utc);
    let millis = utc.timestamp_millis();
    DateTime::from_timestamp_millis(millis).ok_or_else(|| format!("timestamp `{s}` out of range"))
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn record_to_turn(rec: TurnRecord, line: usize) -> Result<DialogueTurn, CorpusError> {
    let id = rec.id.ok_or_else(|| field_err(line, "id", "missing"))?;
    if id.is_empty() {
        return Err(field_err(line, "id", "empty"));
    }
    let ts = rec.ts.ok_or_else(|| field_err(line, "ts", "missing"))?;
    let timestamp = parse_timestamp(&ts).map_err(|m| field_err(line, "ts", m))?;
    let role_str = rec.role.ok_or_else(|| field_err(line, "role", "missing"))?;
    let role = Role::parse(&role_str).ok_or_else(|| field_err(line, "role", format!("unknown role `{role_str}`")))?;
    let user_id = rec.user.ok_or_else(|| field_err(line, "user", "missing"))?;
    if user_id.is_empty() {
        return Err(field_err(line, "user", "empty"));
    }
    let da_code = rec.da.filter(|d| !d.is_empty());
    let text = rec.text.unwrap_or_default();
    if text.is_empty() && da_code.is_none() {
        return Err(field_err(line, "text", "empty text on an unannotated turn"));
    }
    if let Some(s) = &rec.session {
        if s.is_empty() {
            return Err(field_err(line, "session", "empty"));
        }
    }
    Ok(DialogueTurn {
        id,
        timestamp,
        role,
        model_name: rec.model.unwrap_or_default(),
        user_id,
        session_id: rec.session,
        text,
        da_code,
        da_secondary: rec.da_secondary.filter(|d| !d.is_empty()),
    })
}

/// Reads a JSONL transcript. Blank lines are skipped; line numbers are 1-based.
pub fn parse_transcript<R: BufRead>(source: R) -> Result<Vec<DialogueTurn>, CorpusError> {
    let mut turns = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| CorpusError::Io { line: lineno, source })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TurnRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: lineno,
            message: e.to_string(),
        })?;
        let turn = record_to_turn(rec, lineno)?;
        if let Some(&first) = seen.get(&turn.id) {
            return Err(CorpusError::DuplicateId {
                line: lineno,
                id: turn.id,
                first,
            });
        }
        seen.insert(turn.id.clone(), lineno);
        turns.push(turn);
    }
    Ok(turns)
}

pub fn parse_transcript_str(source: &str) -> Result<Vec<DialogueTurn>, CorpusError> {
    parse_transcript(source.as_bytes())
}

/// Writes turns back out in the JSONL transcript format.
pub fn write_transcript<W: Write>(turns: &[DialogueTurn], mut out: W) -> std::io::Result<()> {
    for t in turns {
        let rec = TurnRecord {
            id: Some(t.id.clone()),
            ts: Some(format_timestamp(&t.timestamp)),
            role: Some(t.role.as_str().to_string()),
            model: (!t.model_name.is_empty()).then(|| t.model_name.clone()),
            user: Some(t.user_id.clone()),
            session: t.session_id.clone(),
            text: Some(t.text.clone()),
            da: t.da_code.clone(),
            da_secondary: t.da_secondary.clone(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub user_id: String,
    pub turns: Vec<DialogueTurn>,
    pub group_label: Option<String>,
}

impl Session {
    pub fn words(&self) -> usize {
        self.turns.iter().map(DialogueTurn::word_count).sum()
    }
}

/// How session boundaries are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionMode {
    /// Keep input session ids when every turn carries one, otherwise recompute.
    PreferInput,
    /// Always recompute from timestamps, ignoring input session ids.
    Resessionize,
}

/// Which rule actually produced the sessions of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionSource {
    Input,
    Recomputed,
}

/// Minutes to a millisecond-precision duration.
pub fn gap_from_minutes(minutes: f64) -> TimeDelta {
    TimeDelta::milliseconds((minutes * 60_000.0).round() as i64)
}

pub fn default_gap() -> TimeDelta {
    TimeDelta::minutes(DEFAULT_GAP_MINUTES)
}

fn check_gap(gap: TimeDelta) -> Result<(), CorpusError> {
    if gap <= TimeDelta::zero() {
        return Err(CorpusError::NonPositiveGap);
    }
    Ok(())
}

fn sort_by_time(turns: &mut [DialogueTurn]) {
    // stable: equal timestamps keep file order
    turns.sort_by_key(|t| t.timestamp);
}

/// Splits one user's turns into sessions. A turn starts a new session iff its
/// gap from the previous turn is `>= gap`.
///
/// When every turn already has a session id (and `mode` is
/// [`SessionMode::PreferInput`]) the input grouping is kept and validated.
pub fn sessionize(
    turns: &[DialogueTurn],
    gap: TimeDelta,
    mode: SessionMode,
) -> Result<(Vec<Session>, SessionSource), CorpusError> {
    check_gap(gap)?;
    if turns.is_empty() {
        return Ok((Vec::new(), SessionSource::Recomputed));
    }
    let users: Vec<String> = turns
        .iter()
        .map(|t| t.user_id.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if users.len() > 1 {
        return Err(CorpusError::MixedUsers(users));
    }
    let user = users.into_iter().next().unwrap_or_default();

    let with_ids = turns.iter().filter(|t| t.session_id.is_some()).count();
    if mode == SessionMode::PreferInput && with_ids == turns.len() {
        return preserve_sessions(turns, &user, gap).map(|s| (s, SessionSource::Input));
    }
    if mode == SessionMode::PreferInput && with_ids > 0 {
        let missing = turns.iter().find(|t| t.session_id.is_none()).unwrap();
        return Err(CorpusError::PartialSessionIds(missing.id.clone()));
    }

    let mut sorted = turns.to_vec();
    sort_by_time(&mut sorted);
    let mut sessions: Vec<Session> = Vec::new();
    let mut current: Vec<DialogueTurn> = Vec::new();
    for turn in sorted {
        if let Some(prev) = current.last() {
            if turn.timestamp - prev.timestamp >= gap {
                sessions.push(close_session(&user, sessions.len() + 1, std::mem::take(&mut current)));
            }
        }
        current.push(turn);
    }
    sessions.push(close_session(&user, sessions.len() + 1, current));
    Ok((sessions, SessionSource::Recomputed))
}

fn close_session(user: &str, index: usize, mut turns: Vec<DialogueTurn>) -> Session {
    let session_id = format!("{user}#{index}");
    for t in &mut turns {
        t.session_id = Some(session_id.clone());
    }
    Session {
        session_id,
        user_id: user.to_string(),
        turns,
        group_label: None,
    }
}

fn preserve_sessions(turns: &[DialogueTurn], user: &str, gap: TimeDelta) -> Result<Vec<Session>, CorpusError> {
    let mut groups: BTreeMap<String, Vec<DialogueTurn>> = BTreeMap::new();
    for t in turns {
        groups
            .entry(t.session_id.clone().unwrap_or_default())
            .or_default()
            .push(t.clone());
    }
    let mut sessions = Vec::with_capacity(groups.len());
    for (session_id, mut ts) in groups {
        sort_by_time(&mut ts);
        for w in ts.windows(2) {
            let d = w[1].timestamp - w[0].timestamp;
            if d >= gap {
                return Err(CorpusError::InvalidSession {
                    session: session_id,
                    message: format!(
                        "gap of {} ms between turns `{}` and `{}` is not under the {} ms threshold",
                        d.num_milliseconds(),
                        w[0].id,
                        w[1].id,
                        gap.num_milliseconds()
                    ),
                });
            }
        }
        sessions.push(Session {
            session_id,
            user_id: user.to_string(),
            turns: ts,
            group_label: None,
        });
    }
    sessions.sort_by(|a, b| {
        a.turns[0]
            .timestamp
            .cmp(&b.turns[0].timestamp)
            .then_with(|| a.session_id.cmp(&b.session_id))
    });
    Ok(sessions)
}

/// Partitions turns by user and sessionizes each user independently.
/// Output is sorted by user id, then session order within the user.
pub fn sessionize_corpus(
    turns: &[DialogueTurn],
    gap: TimeDelta,
    mode: SessionMode,
) -> Result<(Vec<Session>, SessionSource), CorpusError> {
    check_gap(gap)?;
    let mut by_user: BTreeMap<&str, Vec<DialogueTurn>> = BTreeMap::new();
    for t in turns {
        by_user.entry(t.user_id.as_str()).or_default().push(t.clone());
    }
    // Decide the mode once for the whole corpus so a run is all-input or all-recomputed.
    let with_ids = turns.iter().filter(|t| t.session_id.is_some()).count();
    if mode == SessionMode::PreferInput && with_ids > 0 && with_ids < turns.len() {
        let missing = turns.iter().find(|t| t.session_id.is_none()).unwrap();
        return Err(CorpusError::PartialSessionIds(missing.id.clone()));
    }
    let source = if mode == SessionMode::PreferInput && with_ids > 0 {
        SessionSource::Input
    } else {
        SessionSource::Recomputed
    };
    let parts: Vec<Result<Vec<Session>, CorpusError>> = by_user
        .into_par_iter()
        .map(|(_, user_turns)| sessionize(&user_turns, gap, mode).map(|(s, _)| s))
        .collect();
    let mut sessions = Vec::new();
    let mut ids = HashSet::new();
    for part in parts {
        for s in part? {
            if !ids.insert(s.session_id.clone()) {
                return Err(CorpusError::InvalidSession {
                    session: s.session_id,
                    message: "session id used by more than one user".into(),
                });
            }
            sessions.push(s);
        }
    }
    Ok((sessions, source))
}

/// Reads `session_id<TAB>group_label` lines. Blank lines and `#` comments are skipped.
pub fn parse_labels<R: BufRead>(source: R) -> Result<BTreeMap<String, String>, CorpusError> {
    let mut labels = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| CorpusError::Io { line: lineno, source })?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split('\t');
        let (Some(sid), Some(label), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(CorpusError::Labels {
                line: lineno,
                message: "expected exactly two tab-separated columns".into(),
            });
        };
        let (sid, label) = (sid.trim(), label.trim());
        if sid.is_empty() || label.is_empty() {
            return Err(CorpusError::Labels {
                line: lineno,
                message: "empty session id or label".into(),
            });
        }
        if labels.insert(sid.to_string(), label.to_string()).is_some() {
            return Err(CorpusError::Labels {
                line: lineno,
                message: format!("session `{sid}` labelled twice"),
            });
        }
    }
    Ok(labels)
}

/// Attaches labels; returns the ids of sessions left without one.
pub fn apply_labels(sessions: &mut [Session], labels: &BTreeMap<String, String>) -> Vec<String> {
    let mut missing = Vec::new();
    for s in sessions.iter_mut() {
        s.group_label = labels.get(&s.session_id).cloned();
        if s.group_label.is_none() {
            missing.push(s.session_id.clone());
        }
    }
    missing
}

pub type Rational = Ratio<u64>;

/// Renders a rational at one decimal, rounding halves away from zero.
pub fn one_decimal(r: &Rational) -> String {
    let tenths = (r.numer() * 20 + r.denom()) / (2 * r.denom());
    format!("{}.{}", tenths / 10, tenths % 10)
}

fn mean(num: u64, den: u64) -> Option<Rational> {
    (den > 0).then(|| Rational::new(num, den))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupStats {
    pub session_count: u64,
    pub total_turns: u64,
    pub total_words: u64,
    pub turns_by_role: BTreeMap<Role, u64>,
    pub words_by_role: BTreeMap<Role, u64>,
}

impl GroupStats {
    pub fn mean_turns_per_session(&self) -> Option<Rational> {
        mean(self.total_turns, self.session_count)
    }

    pub fn mean_words_per_turn(&self) -> Option<Rational> {
        mean(self.total_words, self.total_turns)
    }

    pub fn mean_words_per_turn_by_role(&self) -> BTreeMap<Role, Option<Rational>> {
        Role::ALL
            .iter()
            .map(|r| {
                let turns = self.turns_by_role.get(r).copied().unwrap_or(0);
                let words = self.words_by_role.get(r).copied().unwrap_or(0);
                (*r, mean(words, turns))
            })
            .collect()
    }

    fn add_session(&mut self, s: &Session) {
        self.session_count += 1;
        for t in &s.turns {
            let w = t.word_count() as u64;
            self.total_turns += 1;
            self.total_words += w;
            *self.turns_by_role.entry(t.role).or_default() += 1;
            *self.words_by_role.entry(t.role).or_default() += w;
        }
    }
}

/// Per-group descriptive statistics, plus an `overall` aggregate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub groups: BTreeMap<String, GroupStats>,
    pub overall: GroupStats,
}

pub fn corpus_stats(sessions: &[Session]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for s in sessions {
        let key = s.group_label.clone().unwrap_or_else(|| UNLABELED_GROUP.to_string());
        stats.groups.entry(key).or_default().add_session(s);
        stats.overall.add_session(s);
    }
    stats
}

#[derive(Serialize)]
struct MeanJson {
    exact: String,
    value: f64,
    display: String,
}

fn mean_json(r: Option<Rational>) -> Option<MeanJson> {
    r.map(|r| MeanJson {
        exact: format!("{}/{}", r.numer(), r.denom()),
        value: *r.numer() as f64 / *r.denom() as f64,
        display: one_decimal(&r),
    })
}

#[derive(Serialize)]
struct GroupStatsJson {
    session_count: u64,
    total_turns: u64,
    total_words: u64,
    mean_turns_per_session: Option<MeanJson>,
    mean_words_per_turn: Option<MeanJson>,
    mean_words_per_turn_by_role: BTreeMap<&'static str, Option<MeanJson>>,
}

impl From<&GroupStats> for GroupStatsJson {
    fn from(g: &GroupStats) -> Self {
        GroupStatsJson {
            session_count: g.session_count,
            total_turns: g.total_turns,
            total_words: g.total_words,
            mean_turns_per_session: mean_json(g.mean_turns_per_session()),
            mean_words_per_turn: mean_json(g.mean_words_per_turn()),
            mean_words_per_turn_by_role: g
                .mean_words_per_turn_by_role()
                .into_iter()
                .map(|(r, m)| (r.as_str(), mean_json(m)))
                .collect(),
        }
    }
}

fn show(r: Option<Rational>) -> String {
    r.map(|r| one_decimal(&r)).unwrap_or_else(|| "n/a".into())
}

impl CorpusStats {
    pub fn to_json(&self) -> serde_json::Value {
        let groups: BTreeMap<&str, GroupStatsJson> = self.groups.iter().map(|(k, g)| (k.as_str(), g.into())).collect();
        serde_json::json!({
            "groups": groups,
            "overall": GroupStatsJson::from(&self.overall),
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "group\tsessions\tturns\tmean_turns_per_session\tmean_words_per_turn\tmean_words_student\tmean_words_chatbot\n",
        );
        let rows = self
            .groups
            .iter()
            .map(|(k, g)| (k.as_str(), g))
            .chain(std::iter::once(("overall", &self.overall)));
        for (name, g) in rows {
            let by_role = g.mean_words_per_turn_by_role();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                name,
                g.session_count,
                g.total_turns,
                show(g.mean_turns_per_session()),
                show(g.mean_words_per_turn()),
                show(by_role[&Role::Student]),
                show(by_role[&Role::Chatbot]),
            ));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| group | sessions | turns | turns/session | words/turn | student words/turn | chatbot words/turn |\n|---|---:|---:|---:|---:|---:|---:|\n",
        );
        let rows = self
            .groups
            .iter()
            .map(|(k, g)| (k.as_str(), g))
            .chain(std::iter::once(("overall", &self.overall)));
        for (name, g) in rows {
            let by_role = g.mean_words_per_turn_by_role();
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} |\n",
                name,
                g.session_count,
                g.total_turns,
                show(g.mean_turns_per_session()),
                show(g.mean_words_per_turn()),
                show(by_role[&Role::Student]),
                show(by_role[&Role::Chatbot]),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turn(id: &str, user: &str, ms: i64, role: Role, text: &str) -> DialogueTurn {
        DialogueTurn {
            id: id.into(),
            timestamp: DateTime::from_timestamp_millis(1_736_499_600_000 + ms).unwrap(),
            role,
            model_name: String::new(),
            user_id: user.into(),
            session_id: None,
            text: text.into(),
            da_code: None,
            da_secondary: None,
        }
    }

    const MIN: i64 = 60_000;

    #[test]
    fn parses_chatbot_line() {
        let src = r#"{"id":"t1","ts":"2025-01-10T09:00:00.000Z","role":"chatbot","model":"gpt-4o","user":"u1","text":"What did you do today?","da":"Q"}"#;
        let turns = parse_transcript_str(src).unwrap();
        assert_eq!(turns.len(), 1);
        assert_eq!(turns[0].role, Role::Chatbot);
        assert_eq!(turns[0].model_name, "gpt-4o");
        assert_eq!(turns[0].da_code.as_deref(), Some("Q"));
        assert_eq!(format_timestamp(&turns[0].timestamp), "2025-01-10T09:00:00.000Z");
    }

    #[test]
    fn empty_stream_is_empty() {
        assert!(parse_transcript_str("").unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_reported_at_second_line() {
        let src = concat!(
            r#"{"id":"t1","ts":"2025-01-10T09:00:00.000Z","role":"student","user":"u","text":"hi"}"#,
            "\n",
            r#"{"id":"t1","ts":"2025-01-10T09:00:01.000Z","role":"student","user":"u","text":"hi"}"#,
        );
        match parse_transcript_str(src) {
            Err(CorpusError::DuplicateId { line, id, first }) => {
                assert_eq!((line, id.as_str(), first), (2, "t1", 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_role_and_missing_fields() {
        let bad_role = r#"{"id":"t1","ts":"2025-01-10T09:00:00.000Z","role":"tutor","user":"u","text":"x"}"#;
        let err = parse_transcript_str(bad_role).unwrap_err();
        assert!(
            matches!(
                err,
                CorpusError::Field {
                    line: 1,
                    field: "role",
                    ..
                }
            ),
            "{err}"
        );

        let no_ts = r#"{"id":"t1","role":"student","user":"u","text":"x"}"#;
        let err = parse_transcript_str(no_ts).unwrap_err();
        assert!(matches!(err, CorpusError::Field { field: "ts", .. }));

        let bad_json = "{\"id\": ";
        assert!(matches!(
            parse_transcript_str(bad_json).unwrap_err(),
            CorpusError::Malformed { line: 1, .. }
        ));

        let non_utc = r#"{"id":"t1","ts":"2025-01-10T09:00:00.000+01:00","role":"student","user":"u","text":"x"}"#;
        assert!(matches!(
            parse_transcript_str(non_utc).unwrap_err(),
            CorpusError::Field { field: "ts", .. }
        ));
    }

    #[test]
    fn empty_text_needs_annotation() {
        let unannotated = r#"{"id":"t1","ts":"2025-01-10T09:00:00.000Z","role":"student","user":"u","text":""}"#;
        assert!(matches!(
            parse_transcript_str(unannotated).unwrap_err(),
            CorpusError::Field { field: "text", .. }
        ));
        let annotated = r#"{"id":"t1","ts":"2025-01-10T09:00:00.000Z","role":"student","user":"u","text":"","da":"R"}"#;
        assert_eq!(parse_transcript_str(annotated).unwrap().len(), 1);
    }

    #[test]
    fn boundary_is_strict() {
        let just_under = vec![
            turn("a", "u", 0, Role::Chatbot, "x"),
            turn("b", "u", 15 * MIN - 1, Role::Student, "x"),
            turn("c", "u", 2 * (15 * MIN - 1), Role::Chatbot, "x"),
        ];
        let (s, src) = sessionize(&just_under, default_gap(), SessionMode::PreferInput).unwrap();
        assert_eq!(src, SessionSource::Recomputed);
        assert_eq!(s.len(), 1);

        let exact = vec![
            turn("a", "u", 0, Role::Chatbot, "x"),
            turn("b", "u", 15 * MIN, Role::Student, "x"),
        ];
        let (s, _) = sessionize(&exact, default_gap(), SessionMode::PreferInput).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn three_turn_hand_trace() {
        // gaps: 10m (< 15m, same session), 20m (>= 15m, split)
        let turns = vec![
            turn("a", "u", 0, Role::Chatbot, "x"),
            turn("b", "u", 10 * MIN, Role::Student, "x"),
            turn("c", "u", 30 * MIN, Role::Chatbot, "x"),
        ];
        let (s, _) = sessionize(&turns, default_gap(), SessionMode::PreferInput).unwrap();
        let ids: Vec<Vec<&str>> = s
            .iter()
            .map(|s| s.turns.iter().map(|t| t.id.as_str()).collect())
            .collect();
        assert_eq!(ids, vec![vec!["a", "b"], vec!["c"]]);
        assert_eq!(s[0].session_id, "u#1");
        assert_eq!(s[1].session_id, "u#2");
    }

    #[test]
    fn single_turn_single_session() {
        let (s, _) = sessionize(
            &[turn("a", "u", 0, Role::Student, "x")],
            default_gap(),
            SessionMode::PreferInput,
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].turns.len(), 1);
    }

    #[test]
    fn mixed_users_rejected() {
        let turns = vec![
            turn("a", "u", 0, Role::Student, "x"),
            turn("b", "v", 1, Role::Student, "x"),
        ];
        assert!(matches!(
            sessionize(&turns, default_gap(), SessionMode::PreferInput),
            Err(CorpusError::MixedUsers(_))
        ));
        let (s, _) = sessionize_corpus(&turns, default_gap(), SessionMode::PreferInput).unwrap();
        assert_eq!(
            s.iter().map(|s| s.session_id.as_str()).collect::<Vec<_>>(),
            ["u#1", "v#1"]
        );
    }

    #[test]
    fn input_session_ids_win_unless_resessionized() {
        let mut turns = vec![
            turn("a", "u", 0, Role::Chatbot, "x"),
            turn("b", "u", MIN, Role::Student, "x"),
            turn("c", "u", 2 * MIN, Role::Chatbot, "x"),
        ];
        turns[0].session_id = Some("s1".into());
        turns[1].session_id = Some("s1".into());
        turns[2].session_id = Some("s2".into());
        let (s, src) = sessionize(&turns, default_gap(), SessionMode::PreferInput).unwrap();
        assert_eq!(src, SessionSource::Input);
        assert_eq!(
            s.iter().map(|s| s.session_id.as_str()).collect::<Vec<_>>(),
            ["s1", "s2"]
        );

        let (s, src) = sessionize(&turns, default_gap(), SessionMode::Resessionize).unwrap();
        assert_eq!(src, SessionSource::Recomputed);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].session_id, "u#1");
    }

    #[test]
    fn input_sessions_violating_gap_rejected() {
        let mut turns = vec![
            turn("a", "u", 0, Role::Chatbot, "x"),
            turn("b", "u", 20 * MIN, Role::Student, "x"),
        ];
        for t in &mut turns {
            t.session_id = Some("s1".into());
        }
        assert!(matches!(
            sessionize(&turns, default_gap(), SessionMode::PreferInput),
            Err(CorpusError::InvalidSession { .. })
        ));
    }

    #[test]
    fn partial_session_ids_rejected() {
        let mut turns = vec![
            turn("a", "u", 0, Role::Chatbot, "x"),
            turn("b", "u", MIN, Role::Student, "x"),
        ];
        turns[0].session_id = Some("s1".into());
        assert!(matches!(
            sessionize_corpus(&turns, default_gap(), SessionMode::PreferInput),
            Err(CorpusError::PartialSessionIds(id)) if id == "b"
        ));
    }

    #[test]
    fn labels_tsv() {
        let labels = parse_labels("u#1\tHP\n# comment\n\nu#2\tLP\n".as_bytes()).unwrap();
        assert_eq!(labels.len(), 2);
        assert!(parse_labels("u#1 HP\n".as_bytes()).is_err());
        assert!(parse_labels("u#1\tHP\nu#1\tLP\n".as_bytes()).is_err());
    }

    #[test]
    fn stats_means() {
        let mk = |n: usize, label: &str, sid: &str| Session {
            session_id: sid.into(),
            user_id: "u".into(),
            turns: (0..n)
                .map(|i| turn(&format!("{sid}-{i}"), "u", i as i64, Role::Student, "one two"))
                .collect(),
            group_label: Some(label.into()),
        };
        let stats = corpus_stats(&[mk(80, "HP", "a"), mk(90, "HP", "b")]);
        let hp = &stats.groups["HP"];
        assert_eq!(hp.mean_turns_per_session(), Some(Rational::new(85, 1)));
        assert_eq!(one_decimal(&hp.mean_turns_per_session().unwrap()), "85.0");
        assert_eq!(hp.total_turns, 170);

        let s = Session {
            session_id: "w".into(),
            user_id: "u".into(),
            turns: vec![
                turn("a", "u", 0, Role::Student, "I am hungry"),
                turn("b", "u", 1, Role::Chatbot, "yes"),
            ],
            group_label: None,
        };
        let stats = corpus_stats(&[s]);
        assert_eq!(stats.overall.mean_words_per_turn(), Some(Rational::new(2, 1)));
        assert_eq!(
            stats.groups[UNLABELED_GROUP].mean_words_per_turn_by_role()[&Role::Student],
            Some(Rational::new(3, 1))
        );
    }

    #[test]
    fn empty_stats_have_absent_means() {
        let stats = corpus_stats(&[]);
        assert!(stats.groups.is_empty());
        assert_eq!(stats.overall.session_count, 0);
        assert_eq!(stats.overall.mean_turns_per_session(), None);
        assert_eq!(stats.overall.mean_words_per_turn(), None);
        assert!(stats.to_tsv().contains("n/a"));
    }

    #[test]
    fn one_decimal_rounding() {
        assert_eq!(one_decimal(&Rational::new(250, 3)), "83.3");
        assert_eq!(one_decimal(&Rational::new(260, 3)), "86.7");
        assert_eq!(one_decimal(&Rational::new(1, 20)), "0.1");
        assert_eq!(one_decimal(&Rational::new(0, 1)), "0.0");
    }
}
