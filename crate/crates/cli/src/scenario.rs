//! Scenario files: a small sectioned `key = value` format.
//!
//! ```text
//! # Alice-Bob geometry
//! [scenario]
//! distance = 1.0
//! t_alice = 0.8
//! t_bob = 0.9
//! dipole = 0.5
//!
//! [sphere.1]
//! radius = 10
//! density = 2.546479089470325
//! phi = 0.9
//! ```
//!
//! Every section is optional. Within a present section the keys listed
//! as required must appear; the rest take the defaults in the tables
//! below. Keys are lowercase identifiers; values are decimal numbers,
//! `true`/`false` or identifiers. `#` starts a comment anywhere on a line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nosig_core::gedanken::{Regime, Scenario, SphereArrangement, FULL_SPHERE};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: section [{name}] appears more than once")]
    DuplicateSection { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: key '{key}' repeated in [{section}]")]
    DuplicateKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("[{section}] is missing required key '{key}'")]
    MissingKey { section: String, key: String },
    #[error("line {line}: {section}.{key} = {value} violates {invariant}")]
    OutOfRange {
        line: usize,
        section: String,
        key: String,
        value: String,
        invariant: String,
    },
}

impl ParseError {
    /// Stable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::UnknownSection { .. } => "unknown-section",
            ParseError::DuplicateSection { .. } => "duplicate-section",
            ParseError::UnknownKey { .. } => "unknown-key",
            ParseError::DuplicateKey { .. } => "duplicate-key",
            ParseError::MissingKey { .. } => "missing-key",
            ParseError::OutOfRange { .. } => "out-of-range",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    pub count: usize,
    pub epsilon: f64,
    /// Branches of the entangled-trap model.
    pub branches: usize,
    /// Amplitude shared between branches in every trap.
    pub leak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSpec {
    pub label: String,
    pub arrangement: SphereArrangement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub grid: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_kraus: usize,
    pub max_outcomes: usize,
    pub overlap_trials: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            tolerance: 1e-10,
            grid: 50,
            min_dim: 2,
            max_dim: 8,
            max_kraus: 4,
            max_outcomes: 8,
            overlap_trials: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    /// Half-separation of the two particles.
    pub a: f64,
    pub width: f64,
    pub shift: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self {
            a: 10.0,
            width: 1.0,
            shift: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub traps: Option<TrapSpec>,
    pub spheres: Vec<SphereSpec>,
    pub sweep: SweepSpec,
    pub packets: PacketSpec,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Bool(bool),
    Ident(String),
}

#[derive(Debug, Clone)]
struct Entry {
    value: Value,
    raw: String,
    line: usize,
    col: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn parse_value(raw: &str, line: usize, col: usize) -> Result<Value, ParseError> {
    if raw.is_empty() {
        return Err(syntax(line, col, "missing value"));
    }
    match raw {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if is_ident(raw) {
        return Ok(Value::Ident(raw.to_string()));
    }
    let numeric = raw
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    match raw.parse::<f64>() {
        Ok(x) if numeric && x.is_finite() => Ok(Value::Number(x)),
        _ => Err(syntax(
            line,
            col,
            format!("'{raw}' is not a number, boolean or identifier"),
        )),
    }
}

/// Splits the text into sections; checks lexical structure only.
fn lex(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = full.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        let col0 = body[..indent].chars().count() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| {
                syntax(
                    line,
                    col0 + trimmed.chars().count(),
                    "expected ']' to close the section header",
                )
            })?;
            let valid = match name.split_once('.') {
                Some((head, label)) => is_ident(head) && is_label(label),
                None => is_ident(name),
            };
            if !valid {
                return Err(syntax(
                    line,
                    col0 + 1,
                    format!("invalid section name '{name}'"),
                ));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ParseError::DuplicateSection {
                    line,
                    name: name.to_string(),
                });
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let eq = trimmed
            .find('=')
            .ok_or_else(|| syntax(line, col0, "expected 'key = value' or a [section] header"))?;
        let key = trimmed[..eq].trim_end();
        if !is_ident(key) {
            return Err(syntax(line, col0, format!("invalid key '{key}'")));
        }
        let after = &trimmed[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let vcol = col0 + trimmed[..eq + 1].chars().count() + after[..lead].chars().count();
        let raw = after.trim();
        if raw.contains(char::is_whitespace) {
            return Err(syntax(
                line,
                vcol,
                format!("unexpected whitespace in value '{raw}'"),
            ));
        }
        let value = parse_value(raw, line, vcol)?;
        let section = sections.last_mut().ok_or_else(|| {
            syntax(
                line,
                col0,
                format!("key '{key}' appears before any section"),
            )
        })?;
        if section.entries.contains_key(key) {
            return Err(ParseError::DuplicateKey {
                line,
                section: section.name.clone(),
                key: key.to_string(),
            });
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value,
                raw: raw.to_string(),
                line,
                col: vcol,
            },
        );
    }
    Ok(sections)
}

/// Typed access to one section's entries, tracking which keys were used.
struct Reader<'a> {
    section: &'a Section,
}

impl<'a> Reader<'a> {
    fn new(section: &'a Section, known: &[&str]) -> Result<Self, ParseError> {
        if let Some((key, e)) = section
            .entries
            .iter()
            .find(|(k, _)| !known.contains(&k.as_str()))
        {
            return Err(ParseError::UnknownKey {
                line: e.line,
                section: section.name.clone(),
                key: key.clone(),
            });
        }
        Ok(Self { section })
    }

    fn missing(&self, key: &str) -> ParseError {
        ParseError::MissingKey {
            section: self.section.name.clone(),
            key: key.to_string(),
        }
    }

    fn out_of_range(&self, key: &str, invariant: &str) -> ParseError {
        let e = &self.section.entries[key];
        ParseError::OutOfRange {
            line: e.line,
            section: self.section.name.clone(),
            key: key.to_string(),
            value: e.raw.clone(),
            invariant: invariant.to_string(),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ParseError> {
        match self.section.entries.get(key) {
            None => Ok(None),
            Some(Entry {
                value: Value::Number(x),
                ..
            }) => Ok(Some(*x)),
            Some(e) => Err(syntax(
                e.line,
                e.col,
                format!("{key} expects a number, got '{}'", e.raw),
            )),
        }
    }

    fn integer(&self, key: &str) -> Result<Option<u64>, ParseError> {
        match self.section.entries.get(key) {
            None => Ok(None),
            Some(e) => e.raw.parse::<u64>().map(Some).map_err(|_| {
                syntax(
                    e.line,
                    e.col,
                    format!("{key} expects a non-negative integer, got '{}'", e.raw),
                )
            }),
        }
    }

    fn ident(&self, key: &str) -> Result<Option<(String, &Entry)>, ParseError> {
        match self.section.entries.get(key) {
            None => Ok(None),
            Some(
                e @ Entry {
                    value: Value::Ident(s),
                    ..
                },
            ) => Ok(Some((s.clone(), e))),
            Some(e) => Err(syntax(
                e.line,
                e.col,
                format!("{key} expects an identifier, got '{}'", e.raw),
            )),
        }
    }

    /// Number that must satisfy `ok`, else an out-of-range error naming `invariant`.
    fn checked(
        &self,
        key: &str,
        default: Option<f64>,
        ok: impl Fn(f64) -> bool,
        invariant: &str,
    ) -> Result<f64, ParseError> {
        match self.number(key)? {
            Some(x) if ok(x) => Ok(x),
            Some(_) => Err(self.out_of_range(key, invariant)),
            None => default.ok_or_else(|| self.missing(key)),
        }
    }

    fn checked_int(
        &self,
        key: &str,
        default: Option<u64>,
        ok: impl Fn(u64) -> bool,
        invariant: &str,
    ) -> Result<u64, ParseError> {
        match self.integer(key)? {
            Some(x) if ok(x) => Ok(x),
            Some(_) => Err(self.out_of_range(key, invariant)),
            None => default.ok_or_else(|| self.missing(key)),
        }
    }
}

const SCENARIO_KEYS: [&str; 9] = [
    "distance",
    "path_separation",
    "t_alice",
    "t_bob",
    "dipole",
    "quadrupole",
    "charge_bob",
    "mass_bob",
    "regime",
];

/// Required: `distance`, `t_alice`, `t_bob`, and `dipole` (electromagnetic)
/// or `quadrupole` (gravitational). Defaults: `regime = electromagnetic`,
/// `path_separation = 0`, the unused source `0`, `charge_bob = 1`,
/// `mass_bob = 1`.
fn read_scenario(section: &Section) -> Result<Scenario, ParseError> {
    let r = Reader::new(section, &SCENARIO_KEYS)?;
    let regime = match r.ident("regime")? {
        None => Regime::Electromagnetic,
        Some((s, _)) => s
            .parse()
            .map_err(|_| r.out_of_range("regime", "regime in {electromagnetic, gravitational}"))?,
    };
    let nonneg = |x: f64| x >= 0.0;
    let (need_dipole, need_quad) = match regime {
        Regime::Electromagnetic => (None, Some(0.0)),
        Regime::Gravitational => (Some(0.0), None),
    };
    Ok(Scenario {
        distance: r.checked("distance", None, |x| x > 0.0, "D > 0")?,
        path_separation: r.checked("path_separation", Some(0.0), nonneg, "d >= 0")?,
        t_alice: r.checked("t_alice", None, nonneg, "T_A >= 0")?,
        t_bob: r.checked("t_bob", None, nonneg, "T_B >= 0")?,
        dipole: r.checked("dipole", need_dipole, nonneg, "dipole >= 0")?,
        quadrupole: r.checked("quadrupole", need_quad, nonneg, "quadrupole >= 0")?,
        charge_bob: r.checked("charge_bob", Some(1.0), nonneg, "q_B >= 0")?,
        mass_bob: r.checked("mass_bob", Some(1.0), |x| x > 0.0, "m_B > 0")?,
        regime,
    })
}

/// Required: `count`, `epsilon`. Defaults: `branches = 1`, `leak = 0`.
fn read_traps(section: &Section) -> Result<TrapSpec, ParseError> {
    let r = Reader::new(section, &["count", "epsilon", "branches", "leak"])?;
    Ok(TrapSpec {
        count: r.checked_int("count", None, |n| n >= 1, "N >= 1")? as usize,
        epsilon: r.checked(
            "epsilon",
            None,
            |x| (0.0..1.0).contains(&x),
            "0 <= epsilon < 1",
        )?,
        branches: r.checked_int(
            "branches",
            Some(1),
            |n| (1..=8).contains(&n),
            "1 <= branches <= 8",
        )? as usize,
        leak: r.checked(
            "leak",
            Some(0.0),
            |x| (0.0..=1.0).contains(&x),
            "0 <= leak <= 1",
        )?,
    })
}

/// Required: `radius`, `density`, `phi`. Default: `solid_angle = 4 pi`.
fn read_sphere(section: &Section, label: &str) -> Result<SphereSpec, ParseError> {
    let r = Reader::new(section, &["radius", "density", "phi", "solid_angle"])?;
    let radius = r.checked("radius", None, |x| x > 0.0, "l > 0")?;
    let density = r.checked("density", None, |x| x > 0.0, "rho > 0")?;
    let phi = r.checked(
        "phi",
        None,
        |x| x > 0.0 && x < 1.0,
        "0 < phi < 1 (T_B = phi l spacelike)",
    )?;
    let solid_angle = r.checked(
        "solid_angle",
        Some(FULL_SPHERE),
        |x| x > 0.0 && x <= FULL_SPHERE,
        "0 < solid_angle <= 4 pi",
    )?;
    let arrangement =
        SphereArrangement::new(radius, density, phi, solid_angle).expect("ranges checked above");
    Ok(SphereSpec {
        label: label.to_string(),
        arrangement,
    })
}

/// All keys optional; defaults as in [`SweepSpec::default`].
fn read_sweep(section: &Section) -> Result<SweepSpec, ParseError> {
    let d = SweepSpec::default();
    let r = Reader::new(
        section,
        &[
            "trials",
            "seed",
            "tolerance",
            "grid",
            "min_dim",
            "max_dim",
            "max_kraus",
            "max_outcomes",
            "overlap_trials",
        ],
    )?;
    let min_dim = r.checked_int(
        "min_dim",
        Some(d.min_dim as u64),
        |n| n >= 2,
        "min_dim >= 2",
    )?;
    Ok(SweepSpec {
        trials: r.checked_int("trials", Some(d.trials as u64), |n| n >= 1, "trials >= 1")? as usize,
        seed: r.checked_int("seed", Some(d.seed), |_| true, "")?,
        tolerance: r.checked("tolerance", Some(d.tolerance), |x| x > 0.0, "tolerance > 0")?,
        grid: r.checked_int(
            "grid",
            Some(d.grid as u64),
            |n| (1..=200).contains(&n),
            "1 <= grid <= 200",
        )? as usize,
        min_dim: min_dim as usize,
        max_dim: r.checked_int(
            "max_dim",
            Some(d.max_dim.max(min_dim as usize) as u64),
            |n| n >= min_dim && n <= 16,
            "min_dim <= max_dim <= 16",
        )? as usize,
        max_kraus: r.checked_int(
            "max_kraus",
            Some(d.max_kraus as u64),
            |n| (1..=16).contains(&n),
            "1 <= max_kraus <= 16",
        )? as usize,
        max_outcomes: r.checked_int(
            "max_outcomes",
            Some(d.max_outcomes as u64),
            |n| n >= 2,
            "max_outcomes >= 2",
        )? as usize,
        overlap_trials: r.checked_int(
            "overlap_trials",
            Some(d.overlap_trials as u64),
            |n| n >= 1,
            "overlap_trials >= 1",
        )? as usize,
    })
}

/// All keys optional; defaults as in [`PacketSpec::default`].
fn read_packets(section: &Section) -> Result<PacketSpec, ParseError> {
    let d = PacketSpec::default();
    let r = Reader::new(section, &["a", "width", "shift"])?;
    Ok(PacketSpec {
        a: r.checked("a", Some(d.a), |x| x > 0.0, "a > 0")?,
        width: r.checked("width", Some(d.width), |x| x > 0.0, "width > 0")?,
        shift: r.checked("shift", Some(d.shift), |x| x >= 0.0, "shift >= 0")?,
    })
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ParseError> {
    let mut out = ScenarioFile::default();
    for section in lex(text)? {
        match section.name.split_once('.') {
            Some(("sphere", label)) => out.spheres.push(read_sphere(&section, label)?),
            Some(_) => {
                return Err(ParseError::UnknownSection {
                    line: section.line,
                    name: section.name,
                })
            }
            None => match section.name.as_str() {
                "scenario" => out.scenario = read_scenario(&section)?,
                "traps" => out.traps = Some(read_traps(&section)?),
                "sweep" => out.sweep = read_sweep(&section)?,
                "packets" => out.packets = read_packets(&section)?,
                _ => {
                    return Err(ParseError::UnknownSection {
                        line: section.line,
                        name: section.name,
                    })
                }
            },
        }
    }
    Ok(out)
}

/// Canonical text: fixed section and key order, every key written,
/// numbers in shortest round-trip form. `parse_scenario` of the output
/// gives back an equal value.
pub fn serialize_scenario(f: &ScenarioFile) -> String {
    let mut s = String::new();
    let s_ = &f.scenario;
    let _ = writeln!(s, "[scenario]");
    for (k, v) in [
        ("distance", s_.distance),
        ("path_separation", s_.path_separation),
        ("t_alice", s_.t_alice),
        ("t_bob", s_.t_bob),
        ("dipole", s_.dipole),
        ("quadrupole", s_.quadrupole),
        ("charge_bob", s_.charge_bob),
        ("mass_bob", s_.mass_bob),
    ] {
        let _ = writeln!(s, "{k} = {v:?}");
    }
    let _ = writeln!(s, "regime = {}", s_.regime.as_str());
    if let Some(t) = &f.traps {
        let _ = writeln!(s, "\n[traps]");
        let _ = writeln!(s, "count = {}", t.count);
        let _ = writeln!(s, "epsilon = {:?}", t.epsilon);
        let _ = writeln!(s, "branches = {}", t.branches);
        let _ = writeln!(s, "leak = {:?}", t.leak);
    }
    for sp in &f.spheres {
        let a = &sp.arrangement;
        let _ = writeln!(s, "\n[sphere.{}]", sp.label);
        let _ = writeln!(s, "radius = {:?}", a.radius());
        let _ = writeln!(s, "density = {:?}", a.density());
        let _ = writeln!(s, "phi = {:?}", a.phi());
        let _ = writeln!(s, "solid_angle = {:?}", a.solid_angle());
    }
    let w = &f.sweep;
    let _ = writeln!(s, "\n[sweep]");
    let _ = writeln!(s, "trials = {}", w.trials);
    let _ = writeln!(s, "seed = {}", w.seed);
    let _ = writeln!(s, "tolerance = {:?}", w.tolerance);
    let _ = writeln!(s, "grid = {}", w.grid);
    let _ = writeln!(s, "min_dim = {}", w.min_dim);
    let _ = writeln!(s, "max_dim = {}", w.max_dim);
    let _ = writeln!(s, "max_kraus = {}", w.max_kraus);
    let _ = writeln!(s, "max_outcomes = {}", w.max_outcomes);
    let _ = writeln!(s, "overlap_trials = {}", w.overlap_trials);
    let p = &f.packets;
    let _ = writeln!(s, "\n[packets]");
    let _ = writeln!(s, "a = {:?}", p.a);
    let _ = writeln!(s, "width = {:?}", p.width);
    let _ = writeln!(s, "shift = {:?}", p.shift);
    s
}
