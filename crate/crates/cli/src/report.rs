//! CSV tables and the console summary of a run.

use std::fmt::Write as _;

/// One CSV cell. Floats always print in `{:.16e}`, which round-trips.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Panics if the row width differs from the header's.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width for {:?}",
            self.header
        );
        self.rows.push(row);
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Below,
    AtMost,
    Equal,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtMost => "<=",
            Relation::Equal => "==",
        }
    }
}

/// A measured quantity compared against its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Below,
            limit,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            limit,
        }
    }

    /// Counts or flags that must match exactly.
    pub fn equal(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Equal,
            limit: expected,
        }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::Below => self.value < self.limit,
            Relation::AtMost => self.value <= self.limit,
            Relation::Equal => self.value == self.limit,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} {} {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            sig6(self.value),
            self.relation.symbol(),
            sig6(self.limit)
        )
    }
}

/// Six significant digits; integers print as integers.
pub fn sig6(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x:.5e}")
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Informational `name: value` lines for the console.
    pub notes: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new(table: Table) -> Self {
        Self {
            table,
            checks: Vec::new(),
            notes: Vec::new(),
            seed: None,
        }
    }

    pub fn note(&mut self, name: impl Into<String>, value: impl ToString) {
        self.notes.push((name.into(), value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Console text: the command, scenario digest, seed, checks and verdict.
pub fn render_summary(
    command: &str,
    scenario_sha256: Option<&str>,
    outcome: &Outcome,
    csv_path: &str,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command: {command}");
    let _ = writeln!(
        s,
        "scenario sha256: {}",
        scenario_sha256.unwrap_or("(defaults)")
    );
    if let Some(seed) = outcome.seed {
        let _ = writeln!(s, "seed: {seed}");
    }
    for (k, v) in &outcome.notes {
        let _ = writeln!(s, "{k}: {v}");
    }
    for c in &outcome.checks {
        let _ = writeln!(s, "{}", c.line());
    }
    let _ = writeln!(s, "csv: {csv_path}");
    let _ = writeln!(
        s,
        "verdict: {}",
        if outcome.passed() { "PASS" } else { "FAIL" }
    );
    s
}
