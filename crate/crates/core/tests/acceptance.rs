//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing every line so the workspace suite stays runnable;
//! set `ACCEPTANCE_STRICT=1` to exit nonzero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use ndarray::Array2;
use tappert_core::abc::TappertBoundary;
use tappert_core::harness::{compare_prepared, experiment_catalog, find_experiment, timing_report, Runner};
use tappert_core::scheme::{discrete_energy, SpeedField};
use tappert_core::{
    BoundaryKind, ExperimentSpec, FluxForm, Grid, Side, Simulation, SoundSpeedModel, SourceMode,
    WaveState, Waveform,
};

type Outcome = Result<(bool, String), tappert_core::Error>;

struct Report {
    passed: usize,
    failed: usize,
}

impl Report {
    fn line(&mut self, id: usize, title: &str, started: Instant, outcome: Outcome) {
        let secs = started.elapsed().as_secs_f64();
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {title}: {detail} ({secs:.1}s)");
    }
}

fn info(text: String) {
    println!("       info: {text}");
}

fn final_e(spec: &ExperimentSpec) -> Result<f64, tappert_core::Error> {
    let series = compare_prepared(&spec.prepare()?)?;
    Ok(series.final_relative().unwrap_or(f64::NAN))
}

fn constant_reduction() -> Outcome {
    let ly = 10.0;
    let medium = SoundSpeedModel::constant(1.0)?;
    let grid = Grid::new(10.0, ly, 0.05, 0.9, 1.0, 0.0)?;
    let tb = TappertBoundary::new(&grid, &medium, Side::Left, FluxForm::Conservative)?;
    let coef_zero = tb.coef_a().iter().all(|&a| a == 0.0);

    let mut spec = find_experiment("const-tappert")?;
    spec.h = 0.05;
    spec.cfl_number = 0.9;
    spec.source_mode = SourceMode::PlaneWave;
    spec.source.duration = 1.0;
    spec.t_final = 8.0;
    spec.stride = 1;
    let prep = spec.prepare()?;
    let series = compare_prepared(&prep)?;
    let peak = prep.source.amplitude;
    let residual = series.samples.iter().map(|s| s.max_abs).fold(0.0, f64::max) / peak;
    Ok((
        coef_zero && residual < 0.01,
        format!(
            "max|a| = {:.1e} (all zero: {coef_zero}), reflected max / incident peak = {residual:.3e} (< 1e-2)",
            tb.coef_a().iter().fold(0.0f64, |m, a| m.max(a.abs()))
        ),
    ))
}

fn causality() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    let mut failing = Vec::new();
    let mut literal = Vec::new();
    for mut spec in experiment_catalog() {
        spec.stride = 1;
        let prep = spec.prepare()?;
        let series = compare_prepared(&prep)?;
        let t_star = prep.t_star();
        let t_lit = prep.source.x / prep.c_max;
        let before = |limit: f64| {
            series
                .samples
                .iter()
                .filter(|s| s.time < limit)
                .map(|s| s.relative.unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max)
        };
        let e = before(t_star);
        if e > worst {
            worst = e;
            worst_name = spec.name.clone();
        }
        if e >= 1e-10 {
            failing.push(format!("{} {e:.2e}", spec.name));
        }
        literal.push(format!("{} {:.1e}", spec.name, before(t_lit)));
    }
    info(format!("max E before source-centre arrival x_s/c_max: {}", literal.join(", ")));
    let detail = if failing.is_empty() {
        format!("max E(t < t*) = {worst:.2e} ({worst_name}) < 1e-10 for all 12 runs")
    } else {
        format!("E(t < t*) >= 1e-10 for: {}", failing.join(", "))
    };
    Ok((failing.is_empty(), detail))
}

fn depth_averages() -> Outcome {
    let ly = 10.0;
    // Closed forms of the two depth integrals.
    let duct = 1.0 - 0.5 * (3.0 * PI).sqrt() * libm::erf(5.0 / 3.0f64.sqrt()) / ly;
    let erf_antiderivative = |s: f64| s * libm::erf(s) + (-s * s).exp() / PI.sqrt();
    let step = 4.0 - 1.5 * (1.0 + (erf_antiderivative(8.0) - erf_antiderivative(-2.0)) / ly);
    let got_duct = SoundSpeedModel::gaussian_duct(ly).depth_average(0.0, ly)?;
    let got_step = SoundSpeedModel::erf_step(ly).depth_average(0.0, ly)?;
    let r1 = (got_duct - duct).abs() / duct;
    let r2 = (got_step - step).abs() / step;
    info(format!(
        "printed values 0.8565 and 1.6521 differ from these profiles' averages by {:.2e} and {:.2e}",
        (got_duct - 0.8565).abs(),
        (got_step - 1.6521).abs()
    ));
    Ok((
        r1 < 1e-6 && r2 < 1e-6,
        format!(
            "duct {got_duct:.7} vs {duct:.7} (rel {r1:.1e}), erf step {got_step:.7} vs {step:.7} (rel {r2:.1e})"
        ),
    ))
}

fn headline() -> Outcome {
    let finals = |waveform: Waveform| -> Result<[f64; 4], tappert_core::Error> {
        let mut out = [0.0; 4];
        for (k, name) in ["exp1-tappert", "exp1-higdon2", "exp2-tappert", "exp2-higdon2"]
            .iter()
            .enumerate()
        {
            let mut spec = find_experiment(name)?;
            spec.source.waveform = waveform;
            out[k] = final_e(&spec)?;
        }
        Ok(out)
    };
    let [t1, h1, t2, h2] = finals(Waveform::SinSquared)?;
    let (gap1, gap2) = (h1 - t1, h2 - t2);
    let [zt1, zh1, zt2, zh2] = finals(Waveform::ZeroMean)?;
    info(format!(
        "zero-mean source: exp1 T {zt1:.4} H2 {zh1:.4} gap {:.4} ratio {:.2}; exp2 T {zt2:.4} H2 {zh2:.4} gap {:.4} ratio {:.2}",
        zh1 - zt1,
        zh1 / zt1,
        zh2 - zt2,
        zh2 / zt2
    ));
    Ok((
        t2 <= h2 && gap2 > gap1,
        format!(
            "exp2 E_T {t2:.4} vs E_H2 {h2:.4} (need <=); gap H2-T exp2 {gap2:.4} vs exp1 {gap1:.4} (need larger); ratio H2/T exp1 {:.2}, exp2 {:.2}",
            h1 / t1,
            h2 / t2
        ),
    ))
}

fn range_dependence() -> Outcome {
    let series = |name: &str| -> Result<_, tappert_core::Error> {
        let spec = find_experiment(name)?;
        compare_prepared(&spec.prepare()?)
    };
    let s1 = series("exp1-tappert")?;
    let s3 = series("exp3-tappert")?;
    const FLOOR: f64 = 1e-6;
    let mut max_ratio = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut matched = 0;
    for a in &s3.samples {
        let Some(b) = s1.at(a.time) else { continue };
        if let (Some(e3), Some(e1)) = (a.relative, b.relative) {
            if e3 > FLOOR && e1 > FLOOR {
                matched += 1;
                max_ratio = max_ratio.max(e3 / e1);
                min_ratio = min_ratio.min(e3 / e1);
            }
        }
    }
    let f3 = s3.final_relative().unwrap_or(f64::NAN);
    Ok((
        matched > 0 && max_ratio <= 2.0 && f3.is_finite(),
        format!(
            "exp3 Tappert ran unmodified, final E {f3:.4}; E3/E1 over {matched} matched times in [{min_ratio:.3}, {max_ratio:.3}] (max <= 2)"
        ),
    ))
}

fn stability() -> Outcome {
    const STEPS: usize = 10_000;
    let mut growth = Vec::new();
    let mut failing = Vec::new();
    for base in experiment_catalog().into_iter().filter(|e| e.name.ends_with("-tappert")) {
        let prefix = base.name.trim_end_matches("-tappert").to_string();
        for kind in ["tappert", "higdon2", "higdon3"] {
            let mut spec = find_experiment(&format!("{prefix}-{kind}"))?;
            spec.t_final = 0.0;
            let prep = spec.prepare()?;
            let mut runner = Runner::new(&prep, true)?;
            let initial = runner.simulation().state().max_abs();
            let mut peak = initial;
            for _ in 0..STEPS {
                runner.step()?;
                peak = peak.max(runner.simulation().state().max_abs());
            }
            let ratio = peak / initial;
            if !(ratio < 10.0) {
                failing.push(format!("{} {ratio:.1}x", spec.name));
            }
            growth.push(ratio);
        }
    }
    let worst = growth.iter().cloned().fold(0.0, f64::max);

    // Closed box, variable speed, all walls.
    let model = SoundSpeedModel::gaussian_duct(10.0);
    let grid = Grid::new(10.0, 10.0, 0.1, 0.9, 1.0, 0.0)?;
    let speed = SpeedField::new(&grid, &model)?;
    let bump = |x: f64, y: f64| (-((x - 4.0).powi(2) + (y - 6.0).powi(2)) * 2.0).exp();
    let u0 = Array2::from_shape_fn(grid.dim(), |(j, l)| bump(grid.x(j), grid.y(l)));
    let wall = BoundaryKind::HardWall;
    let state = WaveState::from_levels(u0.clone(), u0, grid.tau);
    let mut sim = Simulation::with_speed(grid.clone(), speed.clone(), &model, state, &wall, &wall)?;
    let e0 = discrete_energy(sim.state(), &speed, &grid);
    let mut drift = 0.0f64;
    for _ in 0..STEPS {
        sim.step()?;
        drift = drift.max((discrete_energy(sim.state(), &speed, &grid) - e0).abs() / e0);
    }
    let ok = failing.is_empty() && drift < 1e-10;
    let bounded = if failing.is_empty() {
        format!("all 12 runs bounded, worst max|u|/initial {worst:.2}")
    } else {
        format!("unbounded (>= 10x): {}", failing.join(", "))
    };
    Ok((ok, format!("{bounded}; closed-box energy drift {drift:.1e} (< 1e-10)")))
}

fn convergence() -> Outcome {
    let f = |s: f64| (-8.0 * (s - 3.0).powi(2)).exp();
    let error = |h: f64| -> Result<f64, tappert_core::Error> {
        let grid = Grid::new(10.0, 4.0 * h, h, 0.5, 1.0, 0.0)?;
        let model = SoundSpeedModel::constant(1.0)?;
        let level = |t: f64| Array2::from_shape_fn(grid.dim(), |(j, _)| f(grid.x(j) - t));
        let state = WaveState::from_levels(level(-grid.tau), level(0.0), grid.tau);
        let wall = BoundaryKind::HardWall;
        let mut sim = Simulation::new(grid.clone(), &model, state, &wall, &wall)?;
        let steps = (2.0 / grid.tau).round() as usize;
        sim.run_until(steps)?;
        let exact = level(grid.time(steps));
        Ok((&sim.state().u_curr - &exact).iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    };
    let (e1, e2) = (error(0.04)?, error(0.02)?);
    let factor = e1 / e2;
    Ok((
        (3.0..=5.0).contains(&factor),
        format!("max error {e1:.3e} at h = 0.04, {e2:.3e} at h = 0.02, factor {factor:.2} (in [3, 5])"),
    ))
}

fn cost_shape() -> Outcome {
    let spec = find_experiment("exp1-tappert")?;
    let report = timing_report(&spec, 10, 1000, 20)?;
    print!("{}", report.to_table().lines().map(|l| format!("       {l}\n")).collect::<String>());
    let row = |k: &str| report.row(k).expect("timing row").clone();
    let (tap, h1, h2, h3) = (row("tappert"), row("higdon1"), row("higdon2"), row("higdon3"));
    let flat = (tap.boundary_late - tap.boundary_early).abs() / tap.boundary_early;
    let order = tap.boundary_seconds / h1.boundary_seconds;
    let monotone = h1.boundary_seconds < h2.boundary_seconds && h2.boundary_seconds < h3.boundary_seconds;
    let base = row("interior-only").per_step_seconds;
    info(format!(
        "whole-step overhead over interior-only: tappert {:.0}%, higdon1 {:.0}%, higdon2 {:.0}%, higdon3 {:.0}%",
        100.0 * (tap.per_step_seconds / base - 1.0),
        100.0 * (h1.per_step_seconds / base - 1.0),
        100.0 * (h2.per_step_seconds / base - 1.0),
        100.0 * (h3.per_step_seconds / base - 1.0)
    ));
    Ok((
        flat <= 0.2 && (0.1..=10.0).contains(&order) && monotone,
        format!(
            "tappert boundary step 1000 vs 10 differs by {:.1}% (<= 20%); tappert/higdon1 = {order:.2} (0.1..10); higdon J=1,2,3: {:.2e} {:.2e} {:.2e} s (increasing)",
            100.0 * flat,
            h1.boundary_seconds,
            h2.boundary_seconds,
            h3.boundary_seconds
        ),
    ))
}

fn main() {
    let mut report = Report { passed: 0, failed: 0 };
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("constant-c reduction", constant_reduction),
        ("causality before t*", causality),
        ("depth-average speeds", depth_averages),
        ("Tappert vs Higdon-2 on exp2", headline),
        ("range dependence", range_dependence),
        ("stability and energy", stability),
        ("1D convergence", convergence),
        ("boundary cost shape", cost_shape),
    ];
    for (k, (title, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        report.line(k + 1, title, started, check());
    }
    println!("acceptance: {} passed, {} failed", report.passed, report.failed);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && report.failed > 0 {
        std::process::exit(1);
    }
}
