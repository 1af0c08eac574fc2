//! The four run commands and manifest replay.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use debtrun_core::{
    classify_scenario, extract_discrete_barriers, extract_free_boundary, mc_default_discrete, mc_default_staggered,
    path_rng, simulate_path, solve_discrete_value, solve_staggered_value, solve_survival_staggered, Arrivals, BarrierCurve,
    BarrierPoint, BeliefSpec, DiscreteBarrierSet, DiscreteTenor, Error as CoreError, IntensitySpec, ModelParams, Outcome,
    RunThreshold, ScenarioRecord, SimMesh, SimPath, ValueSurface,
};
use serde::{Deserialize, Serialize};

use crate::config::{Command, ConfigErrors, RunConfig, Tenor};
use crate::output::{config_hash, num, Check, Inputs, Manifest, OutputDir, OutputRecord, Seeds, Table, MANIFEST_FILE, SCHEMA_VERSION};

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigErrors),
    Core { context: String, source: CoreError },
    Io { context: String, source: std::io::Error },
    /// A replayed run did not reproduce the recorded outputs.
    Mismatch(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core { source, .. } => match source {
                CoreError::InvalidParameter { .. } | CoreError::Configuration(_) | CoreError::Domain(_) => 2,
                CoreError::NonConvergence { .. } => 3,
                CoreError::Dependency(_) => 4,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Mismatch(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Core { context, source } => write!(f, "{context}: {source}"),
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
            CliError::Mismatch(files) => write!(f, "replay differs from the manifest in: {}", files.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

fn core(context: impl Into<String>) -> impl FnOnce(CoreError) -> CliError {
    let context = context.into();
    move |source| CliError::Core { context, source }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Options given on the command line rather than in the config.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Barrier CSV to use instead of solving (default-prob, simulate).
    pub barriers: Option<PathBuf>,
    /// Also write a gnuplot script.
    pub gnuplot: bool,
}

/// Results collected while a command runs.
#[derive(Default)]
struct Report {
    warnings: Vec<String>,
    checks: Vec<Check>,
}

/// Validates `config`, runs `command` into `out` and writes the manifest.
pub fn run(command: Command, config: &RunConfig, options: &RunOptions, out: &Path) -> Result<Manifest, CliError> {
    config.validate(command).map_err(CliError::Config)?;
    let mut dir = OutputDir::create(out).map_err(io(format!("creating {}", out.display())))?;
    let mut report = Report::default();
    match command {
        Command::Barriers => barriers(config, &mut dir, &mut report)?,
        Command::DefaultProb => default_prob(config, options, &mut dir, &mut report)?,
        Command::Simulate => simulate(config, options, &mut dir, &mut report)?,
        Command::CompareTenor => compare_tenor(config, &mut dir)?,
    }
    if options.gnuplot {
        dir.write("plot.gp", gnuplot_script(command, config).as_bytes())
            .map_err(io("writing plot.gp"))?;
    }
    let root = dir.root().to_path_buf();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "debtrun".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config_sha256: config_hash(config),
        config: config.clone(),
        seeds: Seeds { mc_seed: config.mc.seed },
        inputs: Inputs {
            barriers: options.barriers.clone(),
            gnuplot: options.gnuplot,
        },
        outputs: dir.into_records(),
        warnings: report.warnings,
        checks: report.checks,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    crate::output::write_atomic(&root.join(MANIFEST_FILE), &bytes).map_err(io("writing manifest"))?;
    Ok(manifest)
}

/// Re-runs a manifest into `out` and compares every output hash.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<Manifest, CliError> {
    let recorded = Manifest::load(manifest_path).map_err(io(format!("reading {}", manifest_path.display())))?;
    let options = RunOptions {
        barriers: recorded.inputs.barriers.clone(),
        gnuplot: recorded.inputs.gnuplot,
    };
    let fresh = run(recorded.command, &recorded.config, &options, out)?;
    let hashes = |records: &[OutputRecord]| -> BTreeMap<String, String> {
        records.iter().map(|r| (r.file.clone(), r.sha256.clone())).collect()
    };
    let (a, b) = (hashes(&recorded.outputs), hashes(&fresh.outputs));
    let differing: Vec<String> = a
        .keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if differing.is_empty() && recorded.config_sha256 == fresh.config_sha256 {
        Ok(fresh)
    } else {
        Err(CliError::Mismatch(differing))
    }
}

fn belief_label(b: &BeliefSpec) -> String {
    match b {
        BeliefSpec::Uniform => "uniform".into(),
        BeliefSpec::TruncatedNormal { mu, var } => format!("tn_mu{mu}_var{var}"),
    }
}

fn root_kind(kind: debtrun_core::RootKind) -> &'static str {
    match kind {
        debtrun_core::RootKind::Interior => "interior",
        debtrun_core::RootKind::Boundary => "boundary",
        debtrun_core::RootKind::Never => "never",
    }
}

/// Solved run barrier for one tenor.
enum Barrier {
    Discrete(DiscreteBarrierSet),
    Curve(BarrierCurve),
}

impl Barrier {
    fn threshold(&self) -> &dyn RunThreshold {
        match self {
            Barrier::Discrete(s) => s,
            Barrier::Curve(c) => c,
        }
    }

    fn warnings(&self) -> &[String] {
        match self {
            Barrier::Discrete(s) => &s.warnings,
            Barrier::Curve(c) => &c.warnings,
        }
    }

    fn csv(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        match self {
            Barrier::Discrete(s) => s.write_csv(&mut buf),
            Barrier::Curve(c) => c.write_csv(&mut buf),
        }
        .map_err(core("writing barrier file"))?;
        Ok(buf)
    }

    /// `(point, kind)` rows; an empty discrete set yields the insolvency
    /// barrier alone at `0` and `T`.
    fn rows(&self, params: &ModelParams) -> Vec<(BarrierPoint, Option<&'static str>)> {
        match self {
            Barrier::Discrete(s) if s.rows.is_empty() => [0.0, params.horizon]
                .into_iter()
                .map(|t| (BarrierPoint::from_ratio(params, t, f64::NAN), None))
                .collect(),
            Barrier::Discrete(s) => s.rows.iter().map(|r| (r.point, Some(root_kind(r.kind)))).collect(),
            Barrier::Curve(c) => c.samples.iter().map(|s| (s.point, Some(root_kind(s.kind)))).collect(),
        }
    }
}

fn solve_value(config: &RunConfig, params: &ModelParams, beliefs: &BeliefSpec, tenor: &Tenor) -> Result<ValueSurface, CliError> {
    let context = format!("solving {}", tenor.label());
    match tenor {
        Tenor::Discrete(d) => solve_discrete_value(params, beliefs, d, &config.grid, &config.solver),
        Tenor::Staggered(g) => solve_staggered_value(params, beliefs, g, &config.grid, &config.solver),
    }
    .map_err(core(context))
}

fn solve_barrier(config: &RunConfig, params: &ModelParams, beliefs: &BeliefSpec, tenor: &Tenor) -> Result<Barrier, CliError> {
    let surface = solve_value(config, params, beliefs, tenor)?;
    let context = format!("extracting barriers for {}", tenor.label());
    Ok(match tenor {
        Tenor::Discrete(d) => Barrier::Discrete(extract_discrete_barriers(&surface, params, d).map_err(core(context))?),
        Tenor::Staggered(_) => Barrier::Curve(extract_free_boundary(&surface, params).map_err(core(context))?),
    })
}

fn load_barrier(path: &Path, tenor: &Tenor) -> Result<Barrier, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Core {
        context: "loading barriers".into(),
        source: CoreError::Dependency(format!("{}: {e}", path.display())),
    })?;
    let context = format!("parsing {}", path.display());
    Ok(match tenor {
        Tenor::Discrete(_) => Barrier::Discrete(DiscreteBarrierSet::read_csv(&text).map_err(core(context))?),
        Tenor::Staggered(_) => Barrier::Curve(BarrierCurve::read_csv(&text).map_err(core(context))?),
    })
}

/// Barrier from `--barriers` when given, solved otherwise.
fn barrier_for(config: &RunConfig, options: &RunOptions, params: &ModelParams, tenor: &Tenor) -> Result<Barrier, CliError> {
    match &options.barriers {
        Some(path) => load_barrier(path, tenor),
        None => solve_barrier(config, params, &config.beliefs[0], tenor),
    }
}

fn barriers(config: &RunConfig, dir: &mut OutputDir, report: &mut Report) -> Result<(), CliError> {
    let params = config.model;
    let mut table = Table::new(&["tenor", "belief", "t", "x_star", "D_run", "D_ill", "D_ins", "kind"]);
    for (ti, tenor) in config.resolved_tenors().iter().enumerate() {
        let mut curves = Vec::new();
        for (bi, beliefs) in config.beliefs.iter().enumerate() {
            let barrier = solve_barrier(config, &params, beliefs, tenor)?;
            let (tl, bl) = (tenor.label(), belief_label(beliefs));
            report.warnings.extend(barrier.warnings().iter().map(|w| format!("{tl}/{bl}: {w}")));
            let rows = barrier.rows(&params);
            for (p, kind) in &rows {
                let x = (!p.x_star.is_nan()).then_some(p.x_star);
                table.row([
                    tl.clone(),
                    bl.clone(),
                    num(p.t),
                    num(x),
                    num(x.map(|_| p.d_run)),
                    num(x.map(|_| p.d_ill)),
                    num(p.d_ins),
                    kind.unwrap_or("").to_string(),
                ]);
            }
            dir.write(&format!("barrier_t{ti}_b{bi}.csv"), &barrier.csv()?)
                .map_err(io("writing barrier file"))?;
            curves.push((*beliefs, rows.iter().map(|(p, _)| p.x_star).collect::<Vec<f64>>()));
        }
        if curves.len() > 1 {
            report.checks.push(belief_ordering(&tenor.label(), &curves));
        }
    }
    dir.write("barriers.csv", &table.into_bytes()).map_err(io("writing barriers.csv"))
}

/// Uniform beliefs give the highest barrier among truncated normals of at
/// most its variance, and truncated-normal barriers fall with the variance.
fn belief_ordering(tenor: &str, curves: &[(BeliefSpec, Vec<f64>)]) -> Check {
    const TOL: f64 = 1e-12;
    const UNIFORM_VAR: f64 = 1.0 / 12.0;
    let mut normals: Vec<(f64, &Vec<f64>)> = curves
        .iter()
        .filter_map(|(b, xs)| match b {
            BeliefSpec::TruncatedNormal { var, .. } => Some((*var, xs)),
            BeliefSpec::Uniform => None,
        })
        .collect();
    normals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut failures = Vec::new();
    for w in normals.windows(2) {
        if w[0].1.iter().zip(w[1].1).any(|(hi, lo)| hi + TOL < *lo) {
            failures.push(format!("var {} below var {}", w[0].0, w[1].0));
        }
    }
    for (b, xs) in curves {
        if *b != BeliefSpec::Uniform {
            continue;
        }
        for (var, ys) in normals.iter().filter(|(v, _)| *v <= UNIFORM_VAR) {
            if xs.iter().zip(ys.iter()).any(|(u, n)| u + TOL < *n) {
                failures.push(format!("uniform below var {var}"));
            }
        }
    }
    Check {
        name: format!("belief_ordering/{tenor}"),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "barriers fall with belief variance; uniform on top".into()
        } else {
            failures.join("; ")
        },
    }
}

#[derive(Serialize, Deserialize)]
struct PdRecord {
    tenor: String,
    psi: f64,
    v0: f64,
    decomposition: debtrun_core::DefaultDecomposition,
    pd_pde: Option<f64>,
}

fn default_prob(config: &RunConfig, options: &RunOptions, dir: &mut OutputDir, report: &mut Report) -> Result<(), CliError> {
    let psis = if config.sweep.psi.is_empty() {
        vec![config.model.psi]
    } else {
        config.sweep.psi.clone()
    };
    let mc = config.mc;
    let mut table = Table::new(&[
        "tenor", "psi", "V0", "pd_total", "pd_ins", "pd_ill", "pd_blackcox", "ci", "se", "pd_pde",
    ]);
    let mut records = Vec::new();
    for tenor in config.resolved_tenors() {
        let label = tenor.label();
        for &psi in &psis {
            let params = ModelParams { psi, ..config.model };
            let barrier = barrier_for(config, options, &params, &tenor)?;
            report.warnings.extend(barrier.warnings().iter().map(|w| format!("{label}/psi {psi}: {w}")));
            let survival = match (&tenor, &barrier) {
                (Tenor::Staggered(g), Barrier::Curve(c)) if config.sweep.pde => Some(
                    solve_survival_staggered(&params, g, Some(c), &config.grid, config.sweep.variant)
                        .map_err(core(format!("survival for {label}")))?,
                ),
                _ => None,
            };
            for &v0 in &config.sweep.v0 {
                let context = format!("default probability for {label}, V0 {v0}");
                let d = match (&tenor, &barrier) {
                    (Tenor::Discrete(_), Barrier::Discrete(set)) => mc_default_discrete(&params, set, v0, mc.n_paths, mc.seed, mc.dt),
                    (Tenor::Staggered(g), Barrier::Curve(c)) => mc_default_staggered(&params, g, c, v0, mc.n_paths, mc.seed, mc.dt),
                    _ => unreachable!("barrier kind follows the tenor"),
                }
                .map_err(core(context.clone()))?;
                let pd_pde = survival
                    .as_ref()
                    .map(|s| s.pd(&params, v0))
                    .transpose()
                    .map_err(core(context))?;
                table.row([
                    label.clone(),
                    num(psi),
                    num(v0),
                    num(d.pd_total),
                    num(d.pd_insolvency),
                    num(d.pd_illiquidity),
                    num(d.pd_baseline_blackcox),
                    num(d.mc_halfwidth),
                    num(d.std_error),
                    num(pd_pde),
                ]);
                records.push(PdRecord {
                    tenor: label.clone(),
                    psi,
                    v0,
                    decomposition: d,
                    pd_pde,
                });
            }
        }
    }
    dir.write("default_prob.csv", &table.into_bytes())
        .map_err(io("writing default_prob.csv"))?;
    dir.write_json("default_prob.json", &records).map_err(io("writing default_prob.json"))
}

/// Scenario-frequency summary; frequencies are absent without scenarios.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub schema_version: u32,
    pub tenor: String,
    pub v0: f64,
    pub n_scenarios: usize,
    pub counts: BTreeMap<String, usize>,
    pub frequencies: BTreeMap<String, Option<f64>>,
    pub mean_payoff: Option<f64>,
}

fn event_label(rec: &ScenarioRecord, t: f64) -> &'static str {
    if rec.outcome == Outcome::IlliquidityDefault && rec.event_time == t {
        "illiquidity_default"
    } else if rec.unsuccessful_runs.contains(&t) {
        "unsuccessful_run"
    } else {
        "rollover"
    }
}

/// Rows `(t, X_t, event)` of one path, cut at its default time.
fn path_rows(path: &SimPath, rec: &ScenarioRecord) -> Vec<(f64, f64, &'static str)> {
    let end = match rec.outcome {
        Outcome::IlliquidityDefault | Outcome::InsolvencyDefault => rec.event_time,
        _ => f64::INFINITY,
    };
    let mut rows: Vec<(f64, f64, &'static str)> = Vec::new();
    let mut decisions = path.decisions.iter().peekable();
    for (k, (&t, &x)) in path.times.iter().zip(&path.x_values).enumerate() {
        while let Some(d) = decisions.next_if(|d| d.t < t) {
            if d.t <= end {
                rows.push((d.t, d.x, event_label(rec, d.t)));
            }
        }
        if t > end {
            break;
        }
        let mut event = "";
        if let Some(d) = decisions.next_if(|d| d.t == t) {
            event = event_label(rec, d.t);
        }
        if k + 1 == path.times.len() {
            event = match path.tau_ins {
                Some(_) => "insolvency_default",
                None if event.is_empty() => "maturity",
                None => event,
            };
        }
        rows.push((t, x, event));
    }
    rows
}

fn simulate(config: &RunConfig, options: &RunOptions, dir: &mut OutputDir, report: &mut Report) -> Result<(), CliError> {
    let params = config.model;
    let tenor = &config.resolved_tenors()[0];
    let barrier = barrier_for(config, options, &params, tenor)?;
    report.warnings.extend(barrier.warnings().iter().cloned());
    let (mesh, arrivals) = match tenor {
        Tenor::Discrete(d) => (SimMesh::new(params.horizon, config.mc.dt, d.dates()), Arrivals::Dates),
        Tenor::Staggered(g) => (SimMesh::new(params.horizon, config.mc.dt, &[]), Arrivals::Cox(g)),
    };
    let mesh = mesh.map_err(core("building the simulation mesh"))?;
    let v0 = config.simulate.v0;
    let mut paths = Table::new(&["path", "t", "V_t", "X_t", "event"]);
    let mut scenarios = Table::new(&["path", "outcome", "event_time", "payoff", "n_decisions", "n_unsuccessful_runs"]);
    let mut counts: BTreeMap<String, usize> = Outcome::ALL.iter().map(|o| (o.label().to_string(), 0)).collect();
    let mut payoff_sum = 0.0;
    let n = config.simulate.n_scenarios;
    for i in 0..n {
        let mut rng = path_rng(config.mc.seed, i as u64);
        let path = simulate_path(&params, arrivals, v0, &mesh, &mut rng).map_err(core("simulating"))?;
        let rec = classify_scenario(&path, barrier.threshold(), &params).map_err(core("classifying"))?;
        for (t, x, event) in path_rows(&path, &rec) {
            paths.row([i.to_string(), num(t), num(x * params.short_debt(t)), num(x), event.to_string()]);
        }
        scenarios.row([
            i.to_string(),
            rec.outcome.label().to_string(),
            num(rec.event_time),
            num(rec.payoff),
            path.decisions.len().to_string(),
            rec.unsuccessful_runs.len().to_string(),
        ]);
        *counts.get_mut(rec.outcome.label()).expect("every outcome counted") += 1;
        payoff_sum += rec.payoff;
    }
    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        tenor: tenor.label(),
        v0,
        n_scenarios: n,
        frequencies: counts
            .iter()
            .map(|(k, &c)| (k.clone(), (n > 0).then(|| c as f64 / n as f64)))
            .collect(),
        counts,
        mean_payoff: (n > 0).then(|| payoff_sum / n as f64),
    };
    dir.write("paths.csv", &paths.into_bytes()).map_err(io("writing paths.csv"))?;
    dir.write("scenarios.csv", &scenarios.into_bytes())
        .map_err(io("writing scenarios.csv"))?;
    dir.write_json("summary.json", &summary).map_err(io("writing summary.json"))
}

/// `sup |a - b|` and `sup |a - b| / |b|` over paired samples.
pub fn sup_gaps(a: &[f64], b: &[f64]) -> (f64, f64) {
    a.iter().zip(b).fold((0.0f64, 0.0f64), |(abs, rel), (u, v)| {
        let d = (u - v).abs();
        (abs.max(d), rel.max(d / v.abs()))
    })
}

fn compare_tenor(config: &RunConfig, dir: &mut OutputDir) -> Result<(), CliError> {
    let params = config.model;
    let beliefs = &config.beliefs[0];
    let xs = config.compare.ratios();
    let mut ns: Vec<usize> = Vec::new();
    let mut gs: Vec<f64> = Vec::new();
    for p in &config.compare.pairs {
        if !ns.contains(&p.n) {
            ns.push(p.n);
        }
        if !gs.contains(&p.g) {
            gs.push(p.g);
        }
    }
    let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
    let mut barrier_table = Table::new(&["curve", "t", "x_star"]);
    let tenors = ns
        .iter()
        .map(|&n| Tenor::Discrete(DiscreteTenor::equally_spaced(n, params.horizon)))
        .chain(gs.iter().map(|&g| Tenor::Staggered(IntensitySpec::Constant { g })));
    for tenor in tenors {
        let label = tenor.label();
        let surface = solve_value(config, &params, beliefs, &tenor)?;
        let last = surface.n_slices() - 1;
        let values = xs
            .iter()
            .map(|&x| surface.value_on_slice(last, x))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(core(format!("evaluating {label}")))?;
        let points = match &tenor {
            Tenor::Discrete(d) => extract_discrete_barriers(&surface, &params, d).map(|s| s.points()),
            Tenor::Staggered(_) => extract_free_boundary(&surface, &params).map(|c| c.points()),
        }
        .map_err(core(format!("extracting barriers for {label}")))?;
        for p in points {
            barrier_table.row([label.clone(), num(p.t), num(p.x_star)]);
        }
        curves.push((label, values));
    }
    let mut header = vec!["x".to_string()];
    header.extend(curves.iter().map(|(l, _)| l.clone()));
    let mut values = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (k, &x) in xs.iter().enumerate() {
        values.row(std::iter::once(num(x)).chain(curves.iter().map(|(_, v)| num(v[k]))));
    }
    let curve = |label: String| &curves.iter().find(|(l, _)| *l == label).expect("solved curve").1;
    let mut distances = Table::new(&["N", "g", "sup_abs", "sup_rel"]);
    for p in &config.compare.pairs {
        let d = curve(Tenor::Discrete(DiscreteTenor::equally_spaced(p.n, params.horizon)).label());
        let s = curve(Tenor::Staggered(IntensitySpec::Constant { g: p.g }).label());
        let (abs, rel) = sup_gaps(s, d);
        distances.row([p.n.to_string(), num(p.g), num(abs), num(rel)]);
    }
    dir.write("values.csv", &values.into_bytes()).map_err(io("writing values.csv"))?;
    dir.write("barrier_curves.csv", &barrier_table.into_bytes())
        .map_err(io("writing barrier_curves.csv"))?;
    dir.write("distances.csv", &distances.into_bytes())
        .map_err(io("writing distances.csv"))
}

fn gnuplot_script(command: Command, config: &RunConfig) -> String {
    let body = match command {
        Command::Barriers => "set xlabel 't'\nset ylabel 'barrier'\n\
             plot 'barriers.csv' using 3:5 with lines title 'D_run', \\\n\
             \x20    '' using 3:6 with lines dt 2 title 'D_ill', \\\n\
             \x20    '' using 3:7 with lines dt 4 title 'D_ins'\n"
            .to_string(),
        Command::DefaultProb => "set xlabel 'V0'\nset ylabel 'PD'\n\
             plot 'default_prob.csv' using 3:4 with linespoints title 'pd_total', \\\n\
             \x20    '' using 3:7 with lines dt 3 title 'Black-Cox'\n"
            .to_string(),
        Command::Simulate => "set xlabel 't'\nset ylabel 'V_t'\n\
             plot 'paths.csv' using 2:3 with lines title 'paths'\n"
            .to_string(),
        Command::CompareTenor => {
            let n = 1 + config.compare.pairs.len() * 2;
            format!(
                "set xlabel 'x'\nset ylabel 'U(0,x)'\n\
                 plot for [c=2:{n}] 'values.csv' using 1:c with lines title columnheader(c)\n"
            )
        }
    };
    format!("set datafile separator ','\nset key autotitle columnhead\n{body}")
}
