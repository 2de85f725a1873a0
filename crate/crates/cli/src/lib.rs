//! Job parsing, dispatch and report rendering for the `gi` binary.

use std::fmt::Display;
use std::path::Path;

use gi_core::abelianization::{extension_data, strong_ah_summand_count};
use gi_core::classify::{product_isomorphic, sft_morita, ClassifyError};
use gi_core::table::{
    baker, character_search, compose, equal, verify_relations, Arity, TableError,
};
use gi_core::{
    hk_check, invariants, product_homology, product_k_theory, validate, FgElement, FgGroup,
    IntMatrix, SearchBounds, SftError, SftMatrix,
};
use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Invariants,
    Homology,
    KGroups,
    HkCheck,
    Classify,
    Morita,
    Abelianization,
    StrongAh,
    RelationsCheck,
    CharacterSearch,
    BakerCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Invariants => "invariants",
            Command::Homology => "homology",
            Command::KGroups => "k-groups",
            Command::HkCheck => "hk-check",
            Command::Classify => "classify",
            Command::Morita => "morita",
            Command::Abelianization => "abelianization",
            Command::StrongAh => "strong-ah",
            Command::RelationsCheck => "relations-check",
            Command::CharacterSearch => "character-search",
            Command::BakerCheck => "baker-check",
        }
    }

    /// Number of factor lists the command consumes.
    pub fn input_count(&self) -> usize {
        match self {
            Command::Classify | Command::Morita => 2,
            Command::RelationsCheck | Command::CharacterSearch | Command::BakerCheck => 0,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub inputs: Vec<Vec<SftMatrix>>,
    /// Arity map for the table commands.
    pub arity: Option<Arity>,
    /// Target order for `character-search`.
    pub modulus: u64,
    pub format: OutputFormat,
    pub bounds: SearchBounds,
    pub index_bound: usize,
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("factor {factor}: {source}")]
    Validation {
        factor: usize,
        #[source]
        source: SftError,
    },
    #[error("factor {factor}: rows have different lengths")]
    Ragged { factor: usize },
    #[error("the factor list is empty")]
    NoFactors,
    #[error("{0}")]
    Arity(#[from] TableError),
    #[error("{0}")]
    Usage(String),
}

impl InputError {
    /// Short name of the failed condition, when the input was rejected by
    /// matrix validation.
    pub fn condition(&self) -> Option<&'static str> {
        match self {
            InputError::Validation { source, .. } => Some(source.condition()),
            InputError::Ragged { .. } => Some("ragged"),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    factors: Vec<Vec<Vec<i64>>>,
}

/// Reads a factor list from an inline JSON document (anything starting with
/// `{`) or from a file.
pub fn parse_input(source: &str) -> Result<Vec<SftMatrix>, InputError> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(Path::new(source)).map_err(|e| InputError::Io {
            path: source.to_string(),
            source: e,
        })?
    };
    let doc: InputDoc = serde_json::from_str(&text)?;
    if doc.factors.is_empty() {
        return Err(InputError::NoFactors);
    }
    doc.factors
        .iter()
        .enumerate()
        .map(|(factor, rows)| {
            let m = IntMatrix::try_from_rows(rows).ok_or(InputError::Ragged { factor })?;
            validate(m).map_err(|source| InputError::Validation { factor, source })
        })
        .collect()
}

/// Parses `2,3,5` into an arity map.
pub fn parse_arity(s: &str) -> Result<Arity, InputError> {
    let k: Result<Vec<u32>, _> = s.split(',').map(|x| x.trim().parse::<u32>()).collect();
    let k = k.map_err(|_| {
        InputError::Usage(format!(
            "arity list {s:?} is not a comma-separated list of integers"
        ))
    })?;
    Ok(Arity::new(k)?)
}

/// A rendered result: a headline plus named fields in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub headline: String,
    pub fields: Vec<(&'static str, Value)>,
}

impl Report {
    fn new(command: Command, headline: impl Into<String>) -> Self {
        Report {
            command: command.name(),
            headline: headline.into(),
            fields: Vec::new(),
        }
    }

    fn field(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((key, value.into()));
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(self.command));
        m.insert("result".into(), Value::from(self.headline.clone()));
        for (k, v) in &self.fields {
            m.insert((*k).into(), v.clone());
        }
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.headline.clone();
        out.push('\n');
        for (k, v) in &self.fields {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(&text_value(v));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.to_text(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) => format!(
            "[{}]",
            xs.iter().map(text_value).collect::<Vec<_>>().join(", ")
        ),
        Value::Object(m) => format!(
            "{{{}}}",
            m.iter()
                .map(|(k, v)| format!("{k}: {}", text_value(v)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        other => other.to_string(),
    }
}

/// Integer as a JSON number when it fits, otherwise as a decimal string.
fn num(x: &impl Display) -> Value {
    let s = x.to_string();
    match s.parse::<i64>() {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(s),
    }
}

fn group(g: &FgGroup) -> Value {
    Value::from(g.to_string())
}

fn element(g: &FgGroup, x: &FgElement) -> Value {
    Value::Array(g.coords(x).iter().map(num).collect())
}

/// Exit status of a finished job.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub exit_code: i32,
    /// Diagnostic for the error stream.
    pub diagnostic: Option<String>,
}

fn verdict(report: Report, ok: bool) -> Outcome {
    Outcome {
        report: Some(report),
        exit_code: if ok { EXIT_OK } else { EXIT_NEGATIVE },
        diagnostic: None,
    }
}

fn failure(code: i32, msg: impl Into<String>) -> Outcome {
    Outcome {
        report: None,
        exit_code: code,
        diagnostic: Some(msg.into()),
    }
}

pub fn run(job: &JobSpec) -> Outcome {
    if job.inputs.len() != job.command.input_count() {
        return failure(
            EXIT_INPUT,
            format!(
                "{} expects {} factor list(s), got {}",
                job.command.name(),
                job.command.input_count(),
                job.inputs.len()
            ),
        );
    }
    let needs_arity = job.command.input_count() == 0;
    let arity = match (&job.arity, needs_arity) {
        (Some(a), true) => Some(a),
        (None, true) => {
            return failure(
                EXIT_INPUT,
                format!("{} needs an arity list", job.command.name()),
            )
        }
        _ => None,
    };
    let c = job.command;
    match c {
        Command::Validate => {
            let f = &job.inputs[0];
            let sizes: Vec<Value> = f.iter().map(|a| Value::from(a.size())).collect();
            verdict(
                Report::new(c, format!("valid ({} factor(s))", f.len())).field("sizes", sizes),
                true,
            )
        }
        Command::Invariants => {
            let per: Vec<Value> = job.inputs[0]
                .iter()
                .map(|a| {
                    let inv = invariants(a);
                    let mut m = Map::new();
                    m.insert("bowen_franks".into(), group(&inv.bf));
                    m.insert("unit".into(), element(&inv.bf, &inv.unit));
                    m.insert("det".into(), num(&inv.det));
                    m.insert("det_sign".into(), Value::from(inv.det_sign));
                    m.insert("h1".into(), group(&inv.k1));
                    m.insert("primitive".into(), Value::from(a.is_primitive()));
                    Value::Object(m)
                })
                .collect();
            let headline = job.inputs[0]
                .iter()
                .map(|a| invariants(a).bf.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            verdict(Report::new(c, headline).field("factors", per), true)
        }
        Command::Homology => {
            let h = product_homology(&job.inputs[0]);
            let degrees: Vec<Value> = h
                .support()
                .into_iter()
                .map(|k| {
                    let mut m = Map::new();
                    m.insert("degree".into(), Value::from(k));
                    m.insert("group".into(), group(&h.degree(k)));
                    Value::Object(m)
                })
                .collect();
            let headline = h
                .support()
                .into_iter()
                .map(|k| format!("H_{k} = {}", h.degree(k)))
                .collect::<Vec<_>>()
                .join(", ");
            let headline = if headline.is_empty() {
                "all homology vanishes".to_string()
            } else {
                headline
            };
            let h0 = h.degree(0);
            verdict(
                Report::new(c, headline)
                    .field("degrees", degrees)
                    .field("unit", element(&h0, h.unit())),
                true,
            )
        }
        Command::KGroups => {
            let (k0, k1) = product_k_theory(&job.inputs[0]);
            verdict(
                Report::new(c, format!("K_0 = {k0}, K_1 = {k1}"))
                    .field("k0", group(&k0))
                    .field("k1", group(&k1)),
                true,
            )
        }
        Command::HkCheck => {
            let r = hk_check(&job.inputs[0]);
            let ok = r.holds();
            verdict(
                Report::new(c, ok.to_string())
                    .field("holds", ok)
                    .field("even_homology", group(&r.even_homology))
                    .field("k0", group(&r.k0))
                    .field("odd_homology", group(&r.odd_homology))
                    .field("k1", group(&r.k1)),
                ok,
            )
        }
        Command::Classify => {
            match product_isomorphic(&job.inputs[0], &job.inputs[1], &job.bounds) {
                Ok(v) => {
                    let headline = match (&v.witness, &v.reason) {
                        (Some(w), _) if w.is_identity() => {
                            "isomorphic (identity witness)".to_string()
                        }
                        (Some(_), _) => "isomorphic".to_string(),
                        (None, Some(r)) => format!("not isomorphic: {r}"),
                        (None, None) => "not isomorphic".to_string(),
                    };
                    let mut rep = Report::new(c, headline).field("isomorphic", v.isomorphic);
                    if let Some(w) = &v.witness {
                        rep = rep.field(
                            "permutation",
                            Value::Array(w.permutation.iter().map(|&s| Value::from(s)).collect()),
                        );
                        let maps: Vec<Value> = w
                            .maps
                            .iter()
                            .map(|m| {
                                Value::Array(
                                    m.images()
                                        .iter()
                                        .map(|x| element(m.codomain(), x))
                                        .collect(),
                                )
                            })
                            .collect();
                        rep = rep.field("generator_images", maps);
                    }
                    if let Some(r) = &v.reason {
                        rep = rep.field("reason", r.to_string());
                    }
                    verdict(rep, v.isomorphic)
                }
                Err(e @ ClassifyError::Bound { .. })
                | Err(e @ ClassifyError::NoFiniteReduction) => failure(EXIT_BOUND, e.to_string()),
            }
        }
        Command::Morita => {
            let (l, r) = (&job.inputs[0], &job.inputs[1]);
            if l.len() != 1 || r.len() != 1 {
                return failure(EXIT_INPUT, "morita compares two single factors");
            }
            let ok = sft_morita(&l[0], &r[0]);
            let headline = if ok {
                "Morita equivalent"
            } else {
                "not Morita equivalent"
            };
            verdict(Report::new(c, headline).field("morita_equivalent", ok), ok)
        }
        Command::Abelianization => {
            let e = extension_data(&job.inputs[0]);
            let g = e.middle_group();
            let classes: Vec<Value> = e
                .class_components
                .iter()
                .map(|&(p, t)| {
                    let mut m = Map::new();
                    m.insert("position".into(), Value::from(p + 1));
                    m.insert(
                        "tuple".into(),
                        Value::Array(
                            e.tuples[t]
                                .index
                                .iter()
                                .map(|&i| Value::from(i + 1))
                                .collect(),
                        ),
                    );
                    Value::Object(m)
                })
                .collect();
            verdict(
                Report::new(c, g.to_string())
                    .field("abelianization", group(&g))
                    .field("h1", group(&e.h1()))
                    .field("kernel_summands", e.j0().count())
                    .field("kernel_of_j", group(&e.kernel_of_j()))
                    .field("nonsplit_components", classes),
                true,
            )
        }
        Command::StrongAh => {
            let e = extension_data(&job.inputs[0]);
            let ok = e.kernel_of_j().is_trivial();
            let count = strong_ah_summand_count(&job.inputs[0]);
            verdict(
                Report::new(c, ok.to_string())
                    .field("strong_ah", ok)
                    .field("kernel_of_j", group(&e.kernel_of_j()))
                    .field("summand_count_criterion", count),
                ok,
            )
        }
        Command::RelationsCheck => {
            let a = arity.unwrap();
            let rep = verify_relations(a, job.index_bound);
            let ok = rep.all_hold();
            let families: Vec<Value> = rep
                .summary()
                .iter()
                .map(|(f, checked, held)| {
                    let mut m = Map::new();
                    m.insert("family".into(), Value::from(f.name()));
                    m.insert("checked".into(), Value::from(*checked));
                    m.insert("held".into(), Value::from(*held));
                    Value::Object(m)
                })
                .collect();
            let failures: Vec<Value> = rep
                .failures()
                .map(|o| {
                    Value::from(match &o.holds {
                        Ok(_) => o.relation.to_string(),
                        Err(e) => format!("{} ({e})", o.relation),
                    })
                })
                .collect();
            let headline = format!(
                "{}/{} relations hold",
                rep.outcomes.len() - failures.len(),
                rep.outcomes.len()
            );
            verdict(
                Report::new(c, headline)
                    .field("all_hold", ok)
                    .field("arity", arity_value(a))
                    .field("index_bound", job.index_bound)
                    .field("families", families)
                    .field("failures", failures),
                ok,
            )
        }
        Command::CharacterSearch => {
            let a = arity.unwrap();
            if job.modulus < 2 {
                return failure(EXIT_INPUT, "modulus must be at least 2");
            }
            let count = (job.modulus as f64).powi(a.n() as i32 + 1);
            if count > job.bounds.max_candidates as f64 {
                return failure(
                    EXIT_BOUND,
                    format!(
                        "character candidates {count} exceed the configured bound {}",
                        job.bounds.max_candidates
                    ),
                );
            }
            let r = character_search(a, job.modulus);
            let chars: Vec<Value> = r
                .characters
                .iter()
                .map(|ch| {
                    let mut m = Map::new();
                    m.insert(
                        "x".into(),
                        Value::Array(ch.x.iter().map(|&v| Value::from(v)).collect()),
                    );
                    m.insert("t".into(), Value::from(ch.t));
                    m.insert("surjective".into(), Value::from(ch.is_surjective()));
                    Value::Object(m)
                })
                .collect();
            let surj = r.characters.iter().filter(|ch| ch.is_surjective()).count();
            verdict(
                Report::new(
                    c,
                    format!("{} character(s), {surj} surjective", r.characters.len()),
                )
                .field("modulus", job.modulus)
                .field("index_independent", r.index_independent)
                .field("characters", chars),
                true,
            )
        }
        Command::BakerCheck => {
            let a = arity.unwrap();
            if a.n() < 3 {
                return failure(EXIT_INPUT, "baker-check needs at least three coordinates");
            }
            let run = || -> Result<bool, TableError> {
                let lhs = compose(&baker(1, 2, a, 1)?, &baker(2, 3, a, 1)?)?;
                equal(&lhs, &baker(1, 3, a, 1)?)
            };
            match run() {
                Ok(ok) => verdict(
                    Report::new(c, ok.to_string())
                        .field("holds", ok)
                        .field("arity", arity_value(a)),
                    ok,
                ),
                Err(e) => failure(EXIT_INPUT, e.to_string()),
            }
        }
    }
}

fn arity_value(a: &Arity) -> Value {
    Value::Array(a.values().iter().map(|&k| Value::from(k)).collect())
}
