//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always show.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use debtrun_cli::{run, Command, RunConfig, RunOptions, TenorConfig};
use debtrun_core::*;

fn preset(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(format!("{name}.toml"));
    RunConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Parsed CSV: header and string rows.
struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let header = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn f(&self, row: &[String], name: &str) -> f64 {
        row[self.col(name)].parse().unwrap_or(f64::NAN)
    }

    fn s<'a>(&self, row: &'a [String], name: &str) -> &'a str {
        &row[self.col(name)]
    }
}

fn run_into(command: Command, config: &RunConfig, dir: &Path) {
    run(command, config, &RunOptions::default(), dir).unwrap_or_else(|e| panic!("{}: {e}", command.name()));
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn belief_specs() -> Vec<BeliefSpec> {
    preset("fig4").beliefs
}

/// Barrier ordering over sigma x psi x beliefs, both tenors.
fn criterion_1(tmp: &Path) -> Outcome {
    let (mut rows, mut violations, mut configs) = (0usize, 0usize, 0usize);
    for sigma in [0.2, 0.4] {
        for psi in [0.4, 0.6, 0.8] {
            let mut c = preset("fig2");
            c.model.sigma = sigma;
            c.model.psi = psi;
            c.beliefs = belief_specs();
            c.tenors.push(preset("fig3").tenors[0].clone());
            let dir = tmp.join(format!("c1_{sigma}_{psi}"));
            run_into(Command::Barriers, &c, &dir);
            configs += c.beliefs.len();
            let csv = Csv::read(&dir.join("barriers.csv"));
            for r in &csv.rows {
                let (run, ill, ins) = (csv.f(r, "D_run"), csv.f(r, "D_ill"), csv.f(r, "D_ins"));
                rows += 1;
                if !(ins <= ill && ill <= run) {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0 && rows > 0,
        format!("{configs} configurations x 2 tenors, {rows} barrier rows, {violations} violations"),
    )
}

/// Sup gap between the Green's representation and the discrete surface on
/// the final interval, over the nodes of the coarse grid with `x <= 12`.
fn greens_gap(p: &ModelParams, grid: Grid, stride: usize) -> f64 {
    let tenor = DiscreteTenor::new(vec![2.0, 4.0, 6.0, 8.0], p.horizon).unwrap();
    let s = solve_discrete_value(p, &BeliefSpec::Uniform, &tenor, &grid, &SolverOptions::default()).unwrap();
    let q = Quadrature::new(1e-13, 1e-11);
    let mut worst = 0.0f64;
    for n in (stride..s.n_slices()).step_by(stride).filter(|&n| s.time(n) > 8.0) {
        let t = s.time(n);
        for j in (stride..s.grid.n_y).step_by(stride) {
            let x = s.ratio(n, j);
            if x > 12.0 {
                break;
            }
            let g = greens_value(p, |u| p.boundary_value(u), |x| p.terminal_value(x), (8.0, 10.0), t, x, &q).unwrap();
            worst = worst.max((g - s.slice(n)[j]).abs());
        }
    }
    worst
}

fn criterion_2() -> Outcome {
    let c = preset("fig2");
    let coarse = greens_gap(&c.model, Grid::new(c.grid.y_max, 800, 2000).unwrap(), 1);
    let fine = greens_gap(&c.model, Grid::new(c.grid.y_max, 1600, 4000).unwrap(), 2);
    let ratio = coarse / fine;
    outcome(
        coarse < 1e-3 && ratio >= 1.8,
        format!("sup gap {coarse:.3e} at 800x2000, {fine:.3e} at 1600x4000 (ratio {ratio:.2})"),
    )
}

fn optimality(
    p: &ModelParams,
    tenor: TenorRef<'_>,
    barrier: &dyn RunThreshold,
    surface: &ValueSurface,
    x0: f64,
    seed: u64,
) -> (bool, String) {
    let (n, dt) = (200_000, 0.05);
    let run = |s: &dyn RunThreshold| strategy_payoff(p, &BeliefSpec::Uniform, tenor, s, x0 * p.s0, n, seed, dt).unwrap();
    let best = run(barrier);
    let u = surface.value_on_slice(surface.n_slices() - 1, x0).unwrap();
    let mut ok = (best.mean - u).abs() <= best.half_width;
    let mut worst_margin = f64::INFINITY;
    for factor in [0.8, 0.95, 1.05, 1.2] {
        let e = run(&Scaled { inner: barrier, factor });
        let margin = best.mean + 2.0 * best.half_width - e.mean;
        worst_margin = worst_margin.min(margin);
        ok &= margin >= 0.0;
    }
    (
        ok,
        format!(
            "U={u:.5} MC={:.5}+-{:.5}, min perturbation margin {worst_margin:.2e}",
            best.mean, best.half_width
        ),
    )
}

fn criterion_3() -> Outcome {
    let x0 = 3.0;
    let c2 = preset("fig2");
    let p = c2.model;
    let tenor = DiscreteTenor::new(vec![2.0, 4.0, 6.0, 8.0], p.horizon).unwrap();
    let s = solve_discrete_value(&p, &BeliefSpec::Uniform, &tenor, &c2.grid, &SolverOptions::default()).unwrap();
    let set = extract_discrete_barriers(&s, &p, &tenor).unwrap();
    let (ok2, d2) = optimality(&p, TenorRef::Discrete(tenor.dates()), &set, &s, x0, 31);

    let c3 = preset("fig3");
    let g = IntensitySpec::constant(0.4).unwrap();
    let s = solve_staggered_value(&c3.model, &BeliefSpec::Uniform, &g, &c3.grid, &SolverOptions::default()).unwrap();
    let curve = extract_free_boundary(&s, &c3.model).unwrap();
    let (ok3, d3) = optimality(&c3.model, TenorRef::Staggered(&g), &curve, &s, x0, 32);
    outcome(ok2 && ok3, format!("discrete: {d2}; staggered: {d3}"))
}

fn criterion_4(tmp: &Path) -> Outcome {
    let dir = tmp.join("c4");
    run_into(Command::CompareTenor, &preset("fig7"), &dir);
    let csv = Csv::read(&dir.join("distances.csv"));
    let gaps: Vec<(f64, f64)> = csv.rows.iter().map(|r| (csv.f(r, "g"), csv.f(r, "sup_rel"))).collect();
    let last = gaps.last().unwrap().1;
    let monotone = gaps.windows(2).all(|w| w[1].1 < w[0].1);
    let list: Vec<String> = gaps.iter().map(|(g, d)| format!("g={g}: {d:.2e}")).collect();
    outcome(last < 0.02 && monotone, format!("relative sup gaps {}", list.join(", ")))
}

fn criterion_5(tmp: &Path) -> Outcome {
    let mut c = preset("fig5d");
    c.tenors.retain(|t| matches!(t, TenorConfig::Staggered { .. }));
    c.sweep.v0 = vec![1.0, 2.0, 3.0, 4.0, 6.0];
    c.sweep.pde = true;
    c.sweep.variant = SurvivalVariant::Corrected;
    c.mc.n_paths = 100_000;
    c.mc.dt = 0.01;
    let dir = tmp.join("c5");
    run_into(Command::DefaultProb, &c, &dir);
    let csv = Csv::read(&dir.join("default_prob.csv"));
    let mut ok = true;
    let mut zs = Vec::new();
    for r in &csv.rows {
        let (mc, pde, se) = (csv.f(r, "pd_total"), csv.f(r, "pd_pde"), csv.f(r, "se"));
        let diff = (mc - pde).abs();
        ok &= diff <= 3.0 * se;
        zs.push(format!("{:.2}", diff / se));
    }
    outcome(ok && csv.rows.len() == 5, format!("|z| per V0: {}", zs.join(", ")))
}

fn default_prob_rows(csv: &Csv) -> BTreeMap<(String, String, String), Vec<String>> {
    csv.rows
        .iter()
        .map(|r| ((csv.s(r, "tenor").into(), csv.s(r, "psi").into(), csv.s(r, "V0").into()), r.clone()))
        .collect()
}

fn criterion_6(tmp: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // Beliefs: uniform on top of the matched-variance normal, normals falling
    // with their variance.
    let dir = tmp.join("c6_fig4");
    let c4 = preset("fig4");
    run_into(Command::Barriers, &c4, &dir);
    let csv = Csv::read(&dir.join("barriers.csv"));
    let mut by_belief: Vec<(String, Vec<f64>)> = Vec::new();
    for r in &csv.rows {
        let b = csv.s(r, "belief").to_string();
        match by_belief.iter_mut().find(|(l, _)| *l == b) {
            Some((_, xs)) => xs.push(csv.f(r, "x_star")),
            None => by_belief.push((b, vec![csv.f(r, "x_star")])),
        }
    }
    // Preset order: uniform, then variances 1/12, 0.05, 0.02, 0.01.
    let ordered = by_belief
        .windows(2)
        .all(|w| w[0].1.iter().zip(&w[1].1).all(|(hi, lo)| *hi >= lo - 1e-12));
    let gap0 = by_belief[0].1[0] - by_belief[1].1[0];
    ok &= ordered && by_belief.len() == 5;
    notes.push(format!("fig4 ordered={ordered} (uniform minus matched normal at t=0: {gap0:.3})"));

    // Discrete >= staggered >= Black-Cox within 3 SE.
    for panel in ["fig5a", "fig5b", "fig5c", "fig5d"] {
        let dir = tmp.join(format!("c6_{panel}"));
        let mut c = preset(panel);
        c.sweep.pde = false;
        run_into(Command::DefaultProb, &c, &dir);
        let csv = Csv::read(&dir.join("default_prob.csv"));
        let rows = default_prob_rows(&csv);
        let labels: Vec<String> = c.resolved_tenors().iter().map(|t| t.label()).collect();
        let mut fails = 0;
        for v0 in &c.sweep.v0 {
            let key = |tenor: &str| (tenor.to_string(), format!("{:?}", c.model.psi), format!("{v0:?}"));
            let (d, s) = (&rows[&key(&labels[0])], &rows[&key(&labels[1])]);
            let (pd_d, se_d) = (csv.f(d, "pd_total"), csv.f(d, "se"));
            let (pd_s, se_s, bc) = (csv.f(s, "pd_total"), csv.f(s, "se"), csv.f(s, "pd_blackcox"));
            if pd_d + 3.0 * (se_d * se_d + se_s * se_s).sqrt() < pd_s || pd_s + 3.0 * se_s < bc {
                fails += 1;
            }
        }
        ok &= fails == 0;
        notes.push(format!("{panel} ordering failures {fails}"));
    }

    // Illiquidity share falls as the firesale rate rises.
    for panel in ["fig6a", "fig6b"] {
        let dir = tmp.join(format!("c6_{panel}"));
        let c = preset(panel);
        run_into(Command::DefaultProb, &c, &dir);
        let csv = Csv::read(&dir.join("default_prob.csv"));
        let rows = default_prob_rows(&csv);
        let n = c.mc.n_paths as f64;
        let mut fails = 0;
        for tenor in c.resolved_tenors() {
            for v0 in &c.sweep.v0 {
                let ill: Vec<f64> = c
                    .sweep
                    .psi
                    .iter()
                    .map(|psi| csv.f(&rows[&(tenor.label(), format!("{psi:?}"), format!("{v0:?}"))], "pd_ill"))
                    .collect();
                for w in ill.windows(2) {
                    let se = ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / n).sqrt();
                    if w[1] > w[0] + 3.0 * se {
                        fails += 1;
                    }
                }
            }
        }
        ok &= fails == 0;
        notes.push(format!("{panel} psi monotonicity failures {fails}"));
    }
    outcome(ok, notes.join("; "))
}

fn trivial_examples(tmp: &Path) -> Vec<String> {
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };
    let p = ModelParams::reference();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    check("l_0", l_of_t(&p, 0.0).unwrap() == 1.0);
    check("l_10", close(l_of_t(&p, 10.0).unwrap(), 0.2f64.exp()));
    let flat = ModelParams { l0: 4.0, r_l: p.r_s, ..p };
    check("l_flat", l_of_t(&flat, 7.0).unwrap() == 2.0);
    check("theta_1", theta(&p, &BeliefSpec::Uniform, 1.0) == 0.6);
    check("theta_2", theta(&p, &BeliefSpec::Uniform, 2.0) == 1.0);
    check("recovery_mid", close(recovery_rate(&p, 0.0, 1.5).unwrap(), 0.45));
    check("recovery_cap", recovery_rate(&p, 0.0, 10.0).unwrap() == 1.0);
    check("recovery_T", close(recovery_rate(&p, 10.0, 1.0).unwrap(), 1.0 / (1.0 + 0.2f64.exp())));
    check("d_ins_0", close(insolvency_barrier(&p, 0.0).unwrap(), 0.8));
    check("d_ins_10", close(insolvency_barrier(&p, 10.0).unwrap(), 0.8 * 0.5f64.exp()));
    check("beta_0", insolvency_barrier(&ModelParams { beta: 0.0, ..p }, 1.0).is_err());
    check("kernel_boundary", greens_kernel(&p, 8.5, 1.0, 10.0, 1.3).unwrap() == 0.0);
    check("blackcox_on_barrier", blackcox_pd(&p, 0.8, p.horizon).unwrap() == 1.0);
    let calm = ModelParams {
        sigma: 1e-4,
        r_v: 0.2,
        ..p
    };
    check("blackcox_calm", blackcox_pd(&calm, 4.0, p.horizon).unwrap() < 1e-300);

    let g = IntensitySpec::constant(0.4).unwrap();
    let grid = Grid::new(6.0, 100, 200).unwrap();
    let s = solve_staggered_value(&p, &BeliefSpec::Uniform, &g, &grid, &SolverOptions::default()).unwrap();
    let curve = extract_free_boundary(&s, &p).unwrap();
    let quiet = SimPath {
        times: vec![0.0, p.horizon],
        x_values: vec![3.0, 3.0],
        decisions: vec![],
        tau_ins: None,
        crossed: vec![false],
    };
    check("stopping_no_arrivals", run_stopping_time(&quiet, &curve, p.horizon) == p.horizon);
    let d = mc_default_staggered(&p, &g, &curve, 0.5, 1000, 1, 0.05).unwrap();
    check("below_insolvency", d.pd_total == 1.0 && d.pd_insolvency == 1.0);
    let zero = IntensitySpec::constant(0.0).unwrap();
    let d = mc_default_staggered(&p, &zero, &curve, 4.0, 1000, 1, 0.05).unwrap();
    check("zero_intensity_no_illiquidity", d.pd_illiquidity == 0.0);

    // Command-level examples.
    let mut c = preset("fig2");
    c.mc.n_paths = 0;
    check("n_paths_zero", run(Command::DefaultProb, &c, &RunOptions::default(), &tmp.join("t_np")).is_err());
    let mut c = preset("fig2");
    c.tenors = vec![TenorConfig::Discrete {
        dates: Some(vec![]),
        count: None,
    }];
    let m = run(Command::Barriers, &c, &RunOptions::default(), &tmp.join("t_empty")).unwrap();
    check("empty_tenor_warning", m.warnings.len() == 1);
    let mut c = preset("fig2");
    c.simulate.n_scenarios = 0;
    let dir = tmp.join("t_zero");
    run_into(Command::Simulate, &c, &dir);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap();
    check(
        "zero_scenarios",
        summary["n_scenarios"] == 0 && summary["counts"].as_object().map_or(false, |m| m.len() == 4),
    );
    let mut c = preset("fig8");
    c.grid = Grid::new(6.0, 100, 200).unwrap();
    c.compare.pairs = vec![debtrun_cli::TenorPair { n: 0, g: 0.0 }];
    let dir = tmp.join("t_pair");
    run_into(Command::CompareTenor, &c, &dir);
    let values = Csv::read(&dir.join("values.csv"));
    let dist = Csv::read(&dir.join("distances.csv"));
    check("single_pair_shape", values.header.len() == 3 && dist.rows.len() == 1);
    check("zero_pair_identical", dist.f(&dist.rows[0], "sup_abs") == 0.0);
    failed
}

fn criterion_7(tmp: &Path) -> Outcome {
    let p = preset("fig5d").model;
    let v0 = 4.0;
    let exact = blackcox_pd(&p, v0, p.horizon).unwrap();
    let (mc, se) = mc_first_passage(&p, v0, 1_000_000, 71, 0.05).unwrap();
    let z = (mc - exact).abs() / se;

    // Long horizon and strong drift: no insolvency, early gaps uncensored.
    let q = ModelParams {
        sigma: 0.05,
        r_v: 0.2,
        horizon: 50.0,
        ..ModelParams::reference()
    };
    let g = IntensitySpec::constant(0.4).unwrap();
    let mesh = SimMesh::new(q.horizon, 0.05, &[]).unwrap();
    let mut gaps = Vec::new();
    for i in 0..2000 {
        let path = simulate_path(&q, Arrivals::Cox(&g), 20.0, &mesh, &mut path_rng(72, i)).unwrap();
        let mut prev = 0.0;
        for t in path.arrivals().into_iter().take(3) {
            gaps.push(t - prev);
            prev = t;
        }
    }
    let (ks, crit) = ks_exponential(&gaps, 0.4);
    let failed = trivial_examples(tmp);
    outcome(
        z < 3.0 && ks < crit && failed.is_empty(),
        format!(
            "Black-Cox {exact:.5} vs MC {mc:.5} (z {z:.2}); KS {ks:.4} < {crit:.4} on {} gaps; trivial failures {failed:?}",
            gaps.len()
        ),
    )
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_8(tmp: &Path) -> Outcome {
    let small = |mut c: RunConfig| {
        c.grid = Grid::new(6.0, 150, 300).unwrap();
        c.mc.n_paths = 2000;
        c.sweep.v0 = vec![2.0, 4.0];
        c.simulate.n_scenarios = 40;
        c
    };
    let runs = [
        (Command::Barriers, small(preset("fig4"))),
        (Command::DefaultProb, small(preset("fig5d"))),
        (Command::Simulate, small(preset("fig3"))),
        (Command::CompareTenor, small(preset("fig8"))),
    ];
    let mut differing = Vec::new();
    for (command, config) in &runs {
        let (a, b, r) = (
            tmp.join(format!("c8_{}_a", command.name())),
            tmp.join(format!("c8_{}_b", command.name())),
            tmp.join(format!("c8_{}_r", command.name())),
        );
        let options = RunOptions {
            barriers: None,
            gnuplot: true,
        };
        run(*command, config, &options, &a).unwrap();
        run(*command, config, &options, &b).unwrap();
        if dir_bytes(&a) != dir_bytes(&b) {
            differing.push(format!("{} re-run", command.name()));
        }
        match debtrun_cli::replay(&a.join(debtrun_cli::MANIFEST_FILE), &r) {
            Ok(_) if dir_bytes(&a) == dir_bytes(&r) => {}
            _ => differing.push(format!("{} replay", command.name())),
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands re-run and replayed; differing: {differing:?}", runs.len()),
    )
}

fn main() {
    // Accept and ignore libtest flags passed through by cargo.
    let tmp = tempfile::tempdir().unwrap();
    let root: PathBuf = tmp.path().to_path_buf();
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("barrier ordering", Box::new(|| criterion_1(&root))),
        ("green's function oracle", Box::new(criterion_2)),
        ("optimal stopping", Box::new(criterion_3)),
        ("tenor convergence", Box::new(|| criterion_4(&root))),
        ("survival pde vs mc", Box::new(|| criterion_5(&root))),
        ("figure invariants", Box::new(|| criterion_6(&root))),
        ("analytic baselines", Box::new(|| criterion_7(&root))),
        ("determinism", Box::new(|| criterion_8(&root))),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let status = if result.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!result.passed);
        println!(
            "criterion {} [{status}] {name} ({:.1}s): {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
