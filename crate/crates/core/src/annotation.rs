//! Coding schemes, role-prefixed dialogue-act symbols and annotation checks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Role, Session};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("scheme document: {0}")]
    Parse(String),
    #[error("duplicate act code `{0}`")]
    DuplicateCode(String),
    #[error("scheme has no acts")]
    NoActs,
    #[error("invalid act code `{0}`: must be nonempty and free of `[`, `]` and whitespace")]
    InvalidCode(String),
    #[error("invalid role prefix `{0}` for role {1}")]
    InvalidPrefix(String, Role),
    #[error("role prefix `{0}` used by more than one role")]
    DuplicatePrefix(String),
    #[error("unknown base scheme `{0}`")]
    UnknownBase(String),
    #[error("turn `{0}` has no dialogue-act annotation")]
    Unannotated(String),
    #[error("turn `{turn}` has code `{code}` which is not in the scheme")]
    UnknownCode { turn: String, code: String },
    #[error("malformed dialogue-act symbol `{0}`")]
    BadSymbol(String),
    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label lists are empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Act {
    pub code: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodingScheme {
    pub name: String,
    pub roles: BTreeMap<Role, String>,
    pub acts: Vec<Act>,
}

fn act(code: &str, label: &str, description: &str) -> Act {
    Act {
        code: code.into(),
        label: label.into(),
        description: description.into(),
    }
}

fn default_roles() -> BTreeMap<Role, String> {
    BTreeMap::from([(Role::Chatbot, "t".to_string()), (Role::Student, "s".to_string())])
}

impl Default for CodingScheme {
    fn default() -> Self {
        CodingScheme {
            name: "default".into(),
            roles: default_roles(),
            acts: vec![
                act("Q", "question", "Asks for information, an opinion or a clarification"),
                act("R", "response", "Answers or reacts to a preceding question or prompt"),
                act(
                    "F",
                    "feedback",
                    "Evaluates, corrects or acknowledges the other party's contribution",
                ),
                act("I", "inform", "Explains, gives information or models language"),
                act(
                    "M",
                    "management",
                    "Manages the task or the conversation itself (greetings, topic shifts, meta talk)",
                ),
                act("O", "other", "Anything not covered by the other codes"),
            ],
        }
    }
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c == '[' || c == ']' || c.is_whitespace())
}

impl CodingScheme {
    pub fn validate(&self) -> Result<(), AnnotationError> {
        if self.acts.is_empty() {
            return Err(AnnotationError::NoActs);
        }
        let mut seen = HashSet::new();
        for a in &self.acts {
            if !valid_token(&a.code) {
                return Err(AnnotationError::InvalidCode(a.code.clone()));
            }
            if !seen.insert(a.code.as_str()) {
                return Err(AnnotationError::DuplicateCode(a.code.clone()));
            }
        }
        let mut prefixes = HashSet::new();
        for role in Role::ALL {
            let p = self
                .roles
                .get(&role)
                .ok_or_else(|| AnnotationError::InvalidPrefix(String::new(), role))?;
            if !valid_token(p) {
                return Err(AnnotationError::InvalidPrefix(p.clone(), role));
            }
            if !prefixes.insert(p.as_str()) {
                return Err(AnnotationError::DuplicatePrefix(p.clone()));
            }
        }
        Ok(())
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.acts.iter().any(|a| a.code == code)
    }

    pub fn prefix(&self, role: Role) -> &str {
        self.roles.get(&role).map(String::as_str).unwrap_or_default()
    }

    pub fn symbol(&self, role: Role, code: &str) -> DASymbol {
        DASymbol::new(self.prefix(role), code)
    }

    pub fn to_toml(&self) -> String {
        let doc = SchemeDocument {
            name: Some(self.name.clone()),
            base: None,
            roles: Some(
                self.roles
                    .iter()
                    .map(|(r, p)| (r.as_str().to_string(), p.clone()))
                    .collect(),
            ),
            acts: self.acts.clone(),
        };
        toml::to_string(&doc).expect("scheme serializes")
    }
}

/// TOML scheme file:
///
/// ```toml
/// name = "oral-practice"
/// base = "default"          # optional: start from the built-in acts
/// [roles]
/// chatbot = "t"
/// student = "s"
/// [[acts]]
/// code = "SC"
/// label = "self-correction"
/// description = "Learner repairs their own utterance"
/// ```
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    roles: Option<BTreeMap<String, String>>,
    #[serde(default)]
    acts: Vec<Act>,
}

/// Loads a scheme from a TOML document, or returns the built-in default.
pub fn load_scheme(document: Option<&str>) -> Result<CodingScheme, AnnotationError> {
    let Some(text) = document else {
        return Ok(CodingScheme::default());
    };
    let doc: SchemeDocument = toml::from_str(text).map_err(|e| AnnotationError::Parse(e.to_string()))?;
    let mut scheme = match doc.base.as_deref() {
        None => CodingScheme {
            name: String::new(),
            roles: default_roles(),
            acts: Vec::new(),
        },
        Some("default") => CodingScheme::default(),
        Some(other) => return Err(AnnotationError::UnknownBase(other.into())),
    };
    scheme.name = doc.name.unwrap_or_else(|| "custom".into());
    if let Some(roles) = doc.roles {
        for (role, prefix) in roles {
            let r = Role::parse(&role).ok_or_else(|| AnnotationError::Parse(format!("unknown role `{role}`")))?;
            scheme.roles.insert(r, prefix);
        }
    }
    scheme.acts.extend(doc.acts);
    scheme.validate()?;
    Ok(scheme)
}

/// A role-prefixed act code, rendered `[t]Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DASymbol {
    pub role_prefix: String,
    pub act_code: String,
}

impl DASymbol {
    pub fn new(prefix: &str, code: &str) -> Self {
        DASymbol {
            role_prefix: prefix.into(),
            act_code: code.into(),
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DASymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]{}", self.role_prefix, self.act_code)
    }
}

impl FromStr for DASymbol {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AnnotationError::BadSymbol(s.to_string());
        let rest = s.strip_prefix('[').ok_or_else(bad)?;
        let (prefix, code) = rest.split_once(']').ok_or_else(bad)?;
        if !valid_token(prefix) || !valid_token(code) {
            return Err(bad());
        }
        Ok(DASymbol::new(prefix, code))
    }
}

impl Serialize for DASymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DASymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DASequence {
    pub session_id: String,
    pub group_label: Option<String>,
    pub symbols: Vec<DASymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TurnIssue {
    pub session_id: String,
    pub turn_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub total_turns: usize,
    pub valid: usize,
    pub missing: Vec<TurnIssue>,
    pub unknown: Vec<TurnIssue>,
    /// Per act code, counted over valid turns only.
    pub frequencies: BTreeMap<String, usize>,
    pub secondary_coded: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.unknown.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "turns: {}\nvalid: {}\nmissing: {}\nunknown: {}\nmulti-coded (secondary ignored): {}\n",
            self.total_turns,
            self.valid,
            self.missing.len(),
            self.unknown.len(),
            self.secondary_coded
        );
        for m in &self.missing {
            out.push_str(&format!("  missing  {} (session {})\n", m.turn_id, m.session_id));
        }
        for u in &self.unknown {
            out.push_str(&format!(
                "  unknown  {} (session {}): `{}`\n",
                u.turn_id,
                u.session_id,
                u.code.as_deref().unwrap_or("")
            ));
        }
        out.push_str("frequencies:\n");
        for (code, n) in &self.frequencies {
            out.push_str(&format!("  {code}\t{n}\n"));
        }
        out
    }
}

pub fn validate_annotations(sessions: &[Session], scheme: &CodingScheme) -> ValidationReport {
    let mut report = ValidationReport::default();
    for a in &scheme.acts {
        report.frequencies.insert(a.code.clone(), 0);
    }
    for s in sessions {
        for t in &s.turns {
            report.total_turns += 1;
            if t.da_secondary.is_some() {
                report.secondary_coded += 1;
            }
            match &t.da_code {
                None => report.missing.push(TurnIssue {
                    session_id: s.session_id.clone(),
                    turn_id: t.id.clone(),
                    code: None,
                }),
                Some(code) if !scheme.has_code(code) => report.unknown.push(TurnIssue {
                    session_id: s.session_id.clone(),
                    turn_id: t.id.clone(),
                    code: Some(code.clone()),
                }),
                Some(code) => {
                    report.valid += 1;
                    *report.frequencies.entry(code.clone()).or_default() += 1;
                }
            }
        }
    }
    let key = |i: &TurnIssue| (i.session_id.clone(), i.turn_id.clone());
    report.missing.sort_by_key(key);
    report.unknown.sort_by_key(key);
    report
}

/// Converts a session into its symbol sequence. Every turn must carry a code
/// from `scheme`.
pub fn to_sequence(session: &Session, scheme: &CodingScheme) -> Result<DASequence, AnnotationError> {
    let symbols = session
        .turns
        .iter()
        .map(|t| {
            let code = t
                .da_code
                .as_deref()
                .ok_or_else(|| AnnotationError::Unannotated(t.id.clone()))?;
            if !scheme.has_code(code) {
                return Err(AnnotationError::UnknownCode {
                    turn: t.id.clone(),
                    code: code.into(),
                });
            }
            Ok(scheme.symbol(t.role, code))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DASequence {
        session_id: session.session_id.clone(),
        group_label: session.group_label.clone(),
        symbols,
    })
}

/// Cohen's kappa between two annotators' label lists.
///
/// Computed exactly over integer counts: with `n` items, `agree` matching
/// items and `chance = sum_c count_a(c) * count_b(c)`,
/// kappa = (agree * n - chance) / (n^2 - chance).
pub fn cohen_kappa<L: Eq + Hash>(a: &[L], b: &[L]) -> Result<f64, AnnotationError> {
    if a.len() != b.len() {
        return Err(AnnotationError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AnnotationError::Empty);
    }
    let n = a.len() as i128;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as i128;
    let mut counts: HashMap<&L, (i128, i128)> = HashMap::new();
    for x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for y in b {
        counts.entry(y).or_default().1 += 1;
    }
    let chance: i128 = counts.values().map(|(ca, cb)| ca * cb).sum();
    let denom = n * n - chance;
    if denom == 0 {
        // chance agreement is 1, which forces observed agreement to 1 too
        return Ok(1.0);
    }
    Ok((agree * n - chance) as f64 / denom as f64)
}
