//! The seven subcommands. Each returns a CSV table plus pass/fail checks;
//! all numbers come from `nosig_core`.

use nosig_core::gedanken::{
    alice_coherence_ok, bob_can_decohere, entangled_traps_overlap, multi_sphere_stack,
    no_superluminal_window, ntrap_rows, planar_pair_example, random_block_model,
    release_coordination, sphere_overlap, uniform_coefficients, EntangledTrapModel, GedankenError,
    GridSpec, Regime, SphereArrangement, TrapArray, LINEARIZATION_BOUND, LINEAR_REGIME,
};
use nosig_core::nosignal::{
    overlap_scan, sweep, trial_seed, InitialStates, NoSignalError, SweepConfig,
};
use nosig_core::packets::quadrature::{
    compare_pair_translation, sample_comparisons, QuadratureError,
};
use nosig_core::packets::{com_counterexample, PacketError};
use thiserror::Error;

use crate::report::{Check, Outcome, Table};
use crate::scenario::{ScenarioFile, TrapSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyNosignal,
    Window,
    Ntrap,
    EntangledTraps,
    Sphere,
    Packets,
    ComExample,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyNosignal,
        Command::Window,
        Command::Ntrap,
        Command::EntangledTraps,
        Command::Sphere,
        Command::Packets,
        Command::ComExample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyNosignal => "verify-nosignal",
            Command::Window => "window",
            Command::Ntrap => "ntrap",
            Command::EntangledTraps => "entangled-traps",
            Command::Sphere => "sphere",
            Command::Packets => "packets",
            Command::ComExample => "com-example",
        }
    }
}

/// Command-line overrides of the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Replaces the command's primary tolerance.
    pub tolerance: Option<f64>,
    pub grid: Option<usize>,
    /// Sphere radii; each reuses the first sphere's density, phi and solid angle.
    pub radii: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("this command needs a [{0}] section in the scenario file")]
    MissingSection(&'static str),
    #[error("invalid option: {0}")]
    Option(String),
    #[error(transparent)]
    NoSignal(#[from] NoSignalError),
    #[error(transparent)]
    Gedanken(#[from] GedankenError),
    #[error(transparent)]
    Packet(#[from] PacketError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub type CommandResult = Result<Outcome, CommandError>;

pub fn run(cmd: Command, file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    if let Some(t) = opts.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CommandError::Option(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    if opts.trials == Some(0) {
        return Err(CommandError::Option("trials must be at least 1".into()));
    }
    match cmd {
        Command::VerifyNosignal => verify_nosignal(file, opts),
        Command::Window => window(file, opts),
        Command::Ntrap => ntrap(file, opts),
        Command::EntangledTraps => entangled_traps(file, opts),
        Command::Sphere => sphere(file, opts),
        Command::Packets => packets(file, opts),
        Command::ComExample => com_example(file, opts),
    }
}

fn traps(file: &ScenarioFile) -> Result<&TrapSpec, CommandError> {
    file.traps
        .as_ref()
        .ok_or(CommandError::MissingSection("traps"))
}

fn seed(file: &ScenarioFile, opts: &RunOptions) -> u64 {
    opts.seed.unwrap_or(file.sweep.seed)
}

/// Invariance of Alice's reduced state under random local channels, for
/// branch-form and entangled initial states, plus the joint-overlap scan.
pub fn verify_nosignal(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let w = &file.sweep;
    let tol = opts.tolerance.unwrap_or(w.tolerance);
    let seed = seed(file, opts);
    let mut table = Table::new(&[
        "initial",
        "trial",
        "seed",
        "sector",
        "kind",
        "kraus_count",
        "dim_f",
        "dim_b",
        "trace_distance",
    ]);
    let mut checks = Vec::new();
    for initial in [InitialStates::Branch, InitialStates::Entangled] {
        let report = sweep(&SweepConfig {
            trials: opts.trials.unwrap_or(w.trials),
            seed,
            min_dim: w.min_dim,
            max_dim: w.max_dim,
            max_kraus: w.max_kraus,
            max_outcomes: w.max_outcomes,
            initial,
        })?;
        for r in &report.records {
            table.push(vec![
                initial.as_str().into(),
                r.trial.into(),
                r.seed.into(),
                r.sector.as_str().into(),
                r.kind.as_str().into(),
                r.kraus_count.into(),
                r.dim_f.into(),
                r.dim_b.into(),
                r.trace_distance.into(),
            ]);
        }
        checks.push(Check::below(
            format!(
                "{} states: max trace distance (worst seed {})",
                initial.as_str(),
                report.worst_seed
            ),
            report.max_trace_distance,
            tol,
        ));
    }
    let scan = overlap_scan(w.overlap_trials, seed, w.min_dim, w.max_dim)?;
    checks.push(Check::below(
        "joint overlap: max |before - after|",
        scan.max_conservation_error,
        1e-12,
    ));
    checks.push(Check::equal(
        "factorizing evolutions violating |<B1|B2>| >= |<Psi1|Psi2>|",
        scan.bound_violations as f64,
        0.0,
    ));
    let mut out = Outcome::new(table);
    out.seed = Some(seed);
    out.checks = checks;
    out.note("overlap-scan trials", scan.trials);
    out.note("factorizing evolutions", scan.factorizing);
    out.note(
        "min bound margin",
        crate::report::sig6(scan.min_bound_margin),
    );
    Ok(out)
}

/// Exhaustive grid over both regimes, plus the file's own scenario point.
pub fn window(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let n = opts.grid.unwrap_or(file.sweep.grid);
    if n == 0 {
        return Err(CommandError::Option("grid must be at least 1".into()));
    }
    let mut table = Table::new(&["field", "value"]);
    table.push(vec!["grid_n".into(), n.into()]);
    let mut out_checks = Vec::new();
    let mut total = 0u64;
    for regime in Regime::ALL {
        let cert = no_superluminal_window(GridSpec { n }, regime);
        let r = regime.as_str();
        for (k, v) in [
            ("grid_points", cert.grid_points),
            ("evaluated", cert.evaluated),
            ("premise_holds", cert.premise_holds),
            ("bob_decoheres", cert.bob_decoheres),
            ("counterexamples", cert.counterexamples),
        ] {
            table.push(vec![format!("{r}.{k}").into(), v.into()]);
        }
        if let Some(p) = cert.first_counterexample {
            table.push(vec![
                format!("{r}.first_counterexample_distance").into(),
                p.distance.into(),
            ]);
        }
        total += cert.counterexamples;
        out_checks.push(Check::equal(
            format!("{r} grid counterexamples"),
            cert.counterexamples as f64,
            0.0,
        ));
        out_checks.push(Check::equal(
            format!("{r} grid points evaluated"),
            cert.evaluated as f64,
            cert.grid_points as f64,
        ));
    }
    table.push(vec!["counterexamples".into(), total.into()]);
    let s = &file.scenario;
    let premise = alice_coherence_ok(s) && s.in_causal_window();
    let bob = bob_can_decohere(s)?;
    let mut out = Outcome::new(table);
    out.checks = out_checks;
    out.note("scenario regime", s.regime.as_str());
    out.note("scenario: Alice coherent inside the causal window", premise);
    out.note("scenario: Bob can decohere", bob);
    out.checks.push(Check::equal(
        "scenario point contradicts the implication",
        (premise && bob) as u8 as f64,
        0.0,
    ));
    Ok(out)
}

/// Closed form, linearization and the dense model for `1..=N` traps.
pub fn ntrap(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let spec = traps(file)?;
    let tol = opts.tolerance.unwrap_or(1e-12);
    let rows = ntrap_rows(&TrapArray::new(spec.count, spec.epsilon, None)?)?;
    let mut table = Table::new(&[
        "count",
        "n_epsilon",
        "exact",
        "linearized",
        "linearization_error",
        "linear_regime",
        "brute_force",
        "brute_force_error",
    ]);
    let mut worst_dense: f64 = 0.0;
    let mut worst_linear: f64 = 0.0;
    let mut dense_rows = 0usize;
    for r in &rows {
        table.push(vec![
            r.count.into(),
            r.overlap.n_epsilon.into(),
            r.overlap.exact.into(),
            r.overlap.linearized.into(),
            r.linearization_error.into(),
            r.overlap.valid.into(),
            r.brute_force.into(),
            r.brute_force_error.into(),
        ]);
        if let Some(e) = r.brute_force_error {
            worst_dense = worst_dense.max(e);
            dense_rows += 1;
        }
        if r.overlap.valid {
            worst_linear = worst_linear.max(r.linearization_error);
        }
    }
    let mut out = Outcome::new(table);
    out.note("dense-model rows", dense_rows);
    out.checks
        .push(Check::below("dense model vs closed form", worst_dense, tol));
    out.checks.push(Check::at_most(
        format!("linearization error where N eps <= {LINEAR_REGIME}"),
        worst_linear,
        LINEARIZATION_BOUND,
    ));
    Ok(out)
}

/// Diagonal approximation of entangled trap overlaps against the exact
/// sum, for the file's model and seeded random ones, and the planar pair.
pub fn entangled_traps(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let spec = traps(file)?;
    let seed = seed(file, opts);
    let trials = opts.trials.unwrap_or(100);
    let mut table = Table::new(&[
        "model",
        "branches",
        "traps",
        "epsilon",
        "leak",
        "exact_re",
        "exact_im",
        "approx_re",
        "approx_im",
        "deviation",
        "cross_bound",
        "bound_holds",
    ]);
    let mut push = |label: String, m: &EntangledTrapModel, eps: f64, leak: f64| {
        let o = entangled_traps_overlap(m);
        table.push(vec![
            label.into(),
            m.coefficients().len().into(),
            m.traps().into(),
            eps.into(),
            leak.into(),
            o.exact.re.into(),
            o.exact.im.into(),
            o.approx.re.into(),
            o.approx.im.into(),
            o.deviation().into(),
            o.cross_bound.into(),
            o.bound_holds().into(),
        ]);
        o.bound_holds()
    };
    let model = EntangledTrapModel::block_model(
        uniform_coefficients(spec.branches),
        spec.count,
        spec.epsilon,
        spec.leak,
    )?;
    let mut failures = !push("file".into(), &model, spec.epsilon, spec.leak) as usize;
    let max_traps = spec.count.clamp(1, 8);
    for t in 0..trials {
        let (p, m) = random_block_model(trial_seed(seed, t as u64), 4, max_traps, 0.8)?;
        failures += !push(format!("random-{t}"), &m, p.eps, p.leak) as usize;
    }
    let pk = &file.packets;
    let pair = planar_pair_example(pk.a, pk.width, pk.shift)?;
    let mut out = Outcome::new(table);
    out.seed = Some(seed);
    out.note("planar pair exact", crate::report::sig6(pair.exact));
    out.note(
        "planar pair exp(-eps^2/4 delta^2)",
        crate::report::sig6(pair.gaussian),
    );
    out.note(
        "planar pair (1 - eps^2/8 delta^2)^2",
        crate::report::sig6(pair.squared_linear),
    );
    out.checks.push(Check::equal(
        format!(
            "models violating |exact - diagonal| <= cross bound (of {})",
            trials + 1
        ),
        failures as f64,
        0.0,
    ));
    out.checks.push(Check::below(
        "planar pair: |exact - gaussian|",
        pair.gaussian_error(),
        opts.tolerance.unwrap_or(1e-6),
    ));
    Ok(out)
}

/// Patch totals, their radius independence, an optional stack, and the
/// release timing.
pub fn sphere(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let first = file
        .spheres
        .first()
        .ok_or(CommandError::MissingSection("sphere.<label>"))?;
    let arrangements: Vec<(String, SphereArrangement)> = if opts.radii.is_empty() {
        file.spheres
            .iter()
            .map(|s| (s.label.clone(), s.arrangement))
            .collect()
    } else {
        let a = &first.arrangement;
        opts.radii
            .iter()
            .map(|&l| {
                SphereArrangement::new(l, a.density(), a.phi(), a.solid_angle())
                    .map(|s| (format!("{}@{l}", first.label), s))
            })
            .collect::<Result<_, _>>()?
    };
    let s = &file.scenario;
    let mut table = Table::new(&[
        "sphere",
        "radius",
        "density",
        "phi",
        "solid_angle",
        "trap_count",
        "displacement",
        "single",
        "total",
        "total_from_single",
    ]);
    let mut checks = Vec::new();
    let mut overlaps = Vec::new();
    for (label, a) in &arrangements {
        let o = sphere_overlap(a, s)?;
        table.push(vec![
            label.clone().into(),
            a.radius().into(),
            a.density().into(),
            a.phi().into(),
            a.solid_angle().into(),
            o.trap_count.into(),
            o.displacement.into(),
            o.single.into(),
            o.total.into(),
            o.total_from_single.into(),
        ]);
        overlaps.push(o);
    }
    if !opts.radii.is_empty() {
        let distinct = overlaps
            .iter()
            .filter(|o| o.total.to_bits() != overlaps[0].total.to_bits())
            .count();
        checks.push(Check::equal(
            "totals differing in any bit across radii",
            distinct as f64,
            0.0,
        ));
    }
    let worst = overlaps
        .iter()
        .map(|o| o.rounding_ratio())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "single^N vs closed form, in units of its rounding bound",
        worst,
        1.0,
    ));

    let sorted = arrangements
        .windows(2)
        .all(|w| w[1].1.radius() > w[0].1.radius());
    let mut out_notes = Vec::new();
    if arrangements.len() > 1 && sorted {
        let list: Vec<SphereArrangement> = arrangements.iter().map(|(_, a)| *a).collect();
        let stack = multi_sphere_stack(&list, s)?;
        out_notes.push(("stack total".to_string(), crate::report::sig6(stack.total)));
        out_notes.push((
            "stack min pair distance".to_string(),
            crate::report::sig6(stack.min_pair_distance),
        ));
    }
    let radii: Vec<f64> = arrangements.iter().map(|(_, a)| a.radius()).collect();
    let releases = release_coordination(&radii, s.t_alice);
    let inconsistent = releases.iter().filter(|r| !r.consistent()).count();
    let meeting = releases.iter().filter(|r| r.condition).count();
    out_notes.push((
        "releases meeting l > T_A + (l_max - l)".to_string(),
        format!("{meeting} of {}", releases.len()),
    ));
    checks.push(Check::equal(
        "releases meeting the condition yet not spacelike",
        inconsistent as f64,
        0.0,
    ));
    let mut out = Outcome::new(table);
    out.checks = checks;
    out.notes = out_notes;
    Ok(out)
}

/// Closed-form Gaussian overlaps against quadrature.
pub fn packets(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let seed = seed(file, opts);
    let tol = opts.tolerance.unwrap_or(1e-8);
    let mut table = Table::new(&[
        "case",
        "displacement",
        "width",
        "closed_form",
        "quadrature",
        "relative_error",
    ]);
    let samples = sample_comparisons(opts.trials.unwrap_or(50), seed)?;
    let pk = &file.packets;
    let pair = compare_pair_translation(pk.a, pk.width, pk.shift)?;
    let mut worst: f64 = 0.0;
    for (i, c) in samples.iter().enumerate() {
        table.push(vec![
            format!("single-{i}").into(),
            c.displacement.into(),
            c.width.into(),
            c.closed_form.into(),
            c.quadrature.into(),
            c.relative_error.into(),
        ]);
        worst = worst.max(c.relative_error);
    }
    table.push(vec![
        "pair-translation".into(),
        pair.displacement.into(),
        pair.width.into(),
        pair.closed_form.into(),
        pair.quadrature.into(),
        pair.relative_error.into(),
    ]);
    let mut out = Outcome::new(table);
    out.seed = Some(seed);
    out.checks.push(Check::below(
        "single packets: max relative error",
        worst,
        tol,
    ));
    out.checks.push(Check::below(
        "pair translation: relative error",
        pair.relative_error,
        tol,
    ));
    Ok(out)
}

/// Two configurations with equal center-of-mass statistics whose
/// two-particle states are nearly orthogonal.
pub fn com_example(file: &ScenarioFile, opts: &RunOptions) -> CommandResult {
    let pk = &file.packets;
    let r = com_counterexample(pk.a, pk.width)?;
    let tol = opts.tolerance.unwrap_or(1e-2);
    let mut table = Table::new(&["field", "value"]);
    let mean = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let rows = [
        ("a", pk.a),
        ("width", pk.width),
        ("com_mean_1_x", mean(&r.com_mean_1, 0)),
        ("com_mean_1_y", mean(&r.com_mean_1, 1)),
        ("com_mean_2_x", mean(&r.com_mean_2, 0)),
        ("com_mean_2_y", mean(&r.com_mean_2, 1)),
        ("com_spread", r.com_spread),
        ("full_overlap_exact", r.full_overlap_exact),
        ("quoted_value", r.quoted_value),
        ("exponent_ratio", r.exponent_ratio()),
    ];
    for (k, v) in rows {
        table.push(vec![k.into(), v.into()]);
    }
    let mut out = Outcome::new(table);
    out.note(
        "exponent ratio exact / quoted",
        crate::report::sig6(r.exponent_ratio()),
    );
    out.checks.push(Check::equal(
        "center-of-mass means differ",
        (r.com_mean_1 != r.com_mean_2) as u8 as f64,
        0.0,
    ));
    out.checks.push(Check::below(
        "exact two-particle overlap",
        r.full_overlap_exact,
        tol,
    ));
    out.checks.push(Check::below(
        "quoted overlap exp(-a^2/4 delta^2)",
        r.quoted_value,
        tol,
    ));
    Ok(out)
}
