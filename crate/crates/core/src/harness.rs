//! Truncated-versus-extended experiment pairs, error measures, the
//! experiment catalogue and boundary timing.
//!
//! The truncated window is `0 < x < lx`, `0 < y < ly`, with the artificial
//! boundary on the left and hard walls elsewhere. The oracle run adds
//! `extension` to the left and closes it with a hard wall that no wave
//! reaches before `t_final`.

use std::fmt::Write as _;
use std::sync::mpsc;
use std::time::Instant;

use ndarray::{s, ArrayView2};

use crate::abc::{BoundaryKind, FluxForm};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::medium::SoundSpeedModel;
use crate::scheme::SpeedField;
use crate::simulation::Simulation;
use crate::snapshot::Snapshot;
use crate::source::{make_initial, PointForcing, SourceSpec};
use crate::state::WaveState;

pub const DEFAULT_T_FINAL: f64 = 20.0;
pub const DEFAULT_H: f64 = 0.1;
pub const DEFAULT_STRIDE: usize = 10;

/// Cells added beyond the computed extension.
const EXTENSION_MARGIN_CELLS: usize = 4;

/// How the initial field is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceMode {
    /// Homogeneous pre-phase at speed `c0`, then the main run from rest.
    #[default]
    Prephase,
    /// The same forcing injected into the main run in the real medium.
    Inject,
    /// A y-uniform, left-going pulse that left the line `x = source.x` at
    /// time `-duration`. Only meaningful where `c` is constant in x.
    PlaneWave,
}

impl SourceMode {
    pub fn label(self) -> &'static str {
        match self {
            SourceMode::Prephase => "prephase",
            SourceMode::Inject => "inject",
            SourceMode::PlaneWave => "plane",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "prephase" => Some(SourceMode::Prephase),
            "inject" => Some(SourceMode::Inject),
            "plane" => Some(SourceMode::PlaneWave),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub description: String,
    pub medium: SoundSpeedModel,
    pub source: SourceSpec,
    pub source_mode: SourceMode,
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub cfl_number: f64,
    pub t_final: f64,
    /// Left boundary of the truncated run.
    pub boundary: BoundaryKind,
    /// Length added to the left for the oracle; computed when `None`.
    pub extension: Option<f64>,
    pub stride: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lx", self.lx), ("ly", self.ly), ("h", self.h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final", "must be non-negative"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        if let Some(e) = self.extension {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::invalid("extension", "must be non-negative"));
            }
        }
        self.source.validate()
    }

    /// Resolves grids, the shared time step and the oracle extension.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let source = SourceSpec {
            c0: self.medium.speed(self.source.x, self.source.y)?,
            ..self.source.clone()
        };
        // Speed maximum over the nodes of the extended grid; tau depends on it.
        let c_over = |ext_cells: usize| -> Result<f64> {
            let ext = ext_cells as f64 * self.h;
            let g = Grid::new(self.lx + ext, self.ly, self.h, self.cfl_number, 1.0, -ext)?;
            let ys: Vec<f64> = (0..g.ny).map(|l| g.y(l)).collect();
            self.medium.max_speed_over((0..g.nx).map(|j| g.x(j)), &ys)
        };
        let ext_cells = match self.extension {
            Some(e) => (e / self.h - 1e-9).ceil() as usize,
            None => {
                let reach = |c: f64| {
                    ((c * self.t_final + source.support_radius()) / self.h - 1e-9).ceil() as usize
                        + EXTENSION_MARGIN_CELLS
                };
                let mut cells = reach(c_over(0)?);
                for _ in 0..32 {
                    let next = reach(c_over(cells)?);
                    if next <= cells {
                        break;
                    }
                    cells = next;
                }
                cells
            }
        };
        let c_max = c_over(ext_cells)?;
        let ext = ext_cells as f64 * self.h;
        let truncated = Grid::new(self.lx, self.ly, self.h, self.cfl_number, c_max, 0.0)?;
        let extended = Grid::new(self.lx + ext, self.ly, self.h, self.cfl_number, c_max, -ext)?;
        let steps = if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / truncated.tau - 1e-9).ceil() as usize
        };
        Ok(Prepared {
            spec: self.clone(),
            source,
            truncated,
            extended,
            ext_cells,
            c_max,
            steps,
        })
    }
}

/// A spec with its grids and step count fixed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: ExperimentSpec,
    /// Source with `c0` set to the medium speed at the source.
    pub source: SourceSpec,
    pub truncated: Grid,
    pub extended: Grid,
    pub ext_cells: usize,
    pub c_max: f64,
    pub steps: usize,
}

impl Prepared {
    pub fn tau(&self) -> f64 {
        self.truncated.tau
    }

    /// Earliest time any part of the initial pulse can reach the artificial
    /// boundary: distance from the edge of the source support to `x = 0`
    /// over `c_max`.
    pub fn t_star(&self) -> f64 {
        let support = match self.spec.source_mode {
            SourceMode::Inject => 0.0,
            _ => self.source.support_radius(),
        };
        (self.source.x - support).max(0.0) / self.c_max
    }

    pub fn grid(&self, truncated: bool) -> &Grid {
        if truncated {
            &self.truncated
        } else {
            &self.extended
        }
    }

    fn initial(&self, grid: &Grid) -> Result<WaveState> {
        match self.spec.source_mode {
            SourceMode::Prephase => make_initial(grid, &self.source),
            SourceMode::Inject => Ok(WaveState::zeros(grid)),
            SourceMode::PlaneWave => {
                let src = &self.source;
                let u = |x: f64, t: f64| {
                    if x > src.x {
                        0.0
                    } else {
                        src.amplitude * src.waveform.value(t + src.duration - (src.x - x) / src.c0, src.duration)
                    }
                };
                let level = |t: f64| {
                    ndarray::Array2::from_shape_fn(grid.dim(), |(j, _)| u(grid.x(j), t))
                };
                Ok(WaveState::from_levels(level(-grid.tau), level(0.0), grid.tau))
            }
        }
    }
}

/// One simulation of a prepared pair, reporting fields on the truncated
/// window only.
#[derive(Debug, Clone)]
pub struct Runner {
    sim: Simulation,
    first_column: usize,
    nx: usize,
}

impl Runner {
    pub fn new(prep: &Prepared, truncated: bool) -> Result<Self> {
        Self::with_boundary(prep, truncated, &prep.spec.boundary)
    }

    /// As [`Runner::new`] but with a different left boundary on the
    /// truncated run.
    pub fn with_boundary(prep: &Prepared, truncated: bool, left: &BoundaryKind) -> Result<Self> {
        let grid = prep.grid(truncated).clone();
        let wall = BoundaryKind::HardWall;
        let left = if truncated { left } else { &wall };
        let speed = SpeedField::new(&grid, &prep.spec.medium)?;
        let state = prep.initial(&grid)?;
        let mut sim = Simulation::with_speed(grid.clone(), speed, &prep.spec.medium, state, left, &wall)?;
        if prep.spec.source_mode == SourceMode::Inject {
            let c = prep.source.c0;
            sim = sim.with_forcing(PointForcing::new(&grid, &prep.source, c)?);
        }
        Ok(Runner {
            sim,
            first_column: if truncated { 0 } else { prep.ext_cells },
            nx: prep.truncated.nx,
        })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn step(&mut self) -> Result<()> {
        self.sim.step()
    }

    pub fn window(&self) -> ArrayView2<'_, f64> {
        self.sim
            .state()
            .u_curr
            .slice(s![self.first_column..self.first_column + self.nx, ..])
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            step: self.sim.step_index(),
            time: self.sim.state().time,
            field: self.window().to_owned(),
        }
    }

    /// Steps to `steps`, handing a window snapshot to `visit` at step 0,
    /// every `stride` steps and at the last step.
    pub fn run_with(
        &mut self,
        steps: usize,
        stride: usize,
        mut visit: impl FnMut(Snapshot) -> Result<()>,
    ) -> Result<()> {
        visit(self.snapshot())?;
        while self.sim.step_index() < steps {
            self.sim.step()?;
            let i = self.sim.step_index();
            if i % stride == 0 || i == steps {
                if self.sim.state().has_non_finite() {
                    return Err(Error::Unstable {
                        step: i,
                        max_abs: self.sim.state().max_abs(),
                    });
                }
                visit(self.snapshot())?;
            }
        }
        Ok(())
    }
}

/// Runs one side of the pair to `t_final` and collects its window snapshots.
pub fn run(spec: &ExperimentSpec, truncated: bool) -> Result<Vec<Snapshot>> {
    let prep = spec.prepare()?;
    let mut out = Vec::new();
    Runner::new(&prep, truncated)?.run_with(prep.steps, spec.stride, |s| {
        out.push(s);
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub step: usize,
    pub time: f64,
    /// Relative L1 error; `None` where the oracle window is zero but the
    /// truncated one is not.
    pub relative: Option<f64>,
    /// Max-abs error.
    pub max_abs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorSeries {
    pub samples: Vec<ErrorSample>,
}

impl ErrorSeries {
    pub fn last(&self) -> Option<&ErrorSample> {
        self.samples.last()
    }

    /// Relative error at the last sample, if defined.
    pub fn final_relative(&self) -> Option<f64> {
        self.last().and_then(|s| s.relative)
    }

    /// Sample nearest to `t`.
    pub fn at(&self, t: f64) -> Option<&ErrorSample> {
        self.samples.iter().min_by(|a, b| {
            (a.time - t)
                .abs()
                .partial_cmp(&(b.time - t).abs())
                .expect("finite times")
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,E,e\n");
        for s in &self.samples {
            let rel = match s.relative {
                Some(v) => format!("{v:.15e}"),
                None => "nan".into(),
            };
            writeln!(out, "{:.15e},{rel},{:.15e}", s.time, s.max_abs).expect("writing to a String");
        }
        out
    }
}

/// `(sum |u - u_E| / sum |u_E|, max |u - u_E|)` over two equal-shape windows.
pub fn error_measures(u: ArrayView2<f64>, u_ext: ArrayView2<f64>) -> Result<(Option<f64>, f64)> {
    if u.dim() != u_ext.dim() {
        return Err(Error::Contract(format!(
            "window shapes differ: {:?} vs {:?}",
            u.dim(),
            u_ext.dim()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut max = 0.0f64;
    for (a, b) in u.iter().zip(u_ext.iter()) {
        let d = (a - b).abs();
        num += d;
        den += b.abs();
        max = max.max(d);
    }
    let rel = if den > 0.0 {
        Some(num / den)
    } else if num == 0.0 {
        Some(0.0)
    } else {
        None
    };
    Ok((rel, max))
}

/// Pairs snapshots taken at the same steps.
pub fn error_series(truncated: &[Snapshot], extended: &[Snapshot]) -> Result<ErrorSeries> {
    if truncated.len() != extended.len() {
        return Err(Error::Contract(format!(
            "{} truncated snapshots but {} extended ones",
            truncated.len(),
            extended.len()
        )));
    }
    let mut samples = Vec::with_capacity(truncated.len());
    for (a, b) in truncated.iter().zip(extended) {
        samples.push(sample(a, b)?);
    }
    Ok(ErrorSeries { samples })
}

fn sample(a: &Snapshot, b: &Snapshot) -> Result<ErrorSample> {
    if a.step != b.step {
        return Err(Error::Contract(format!(
            "snapshot steps differ: {} vs {}",
            a.step, b.step
        )));
    }
    let (relative, max_abs) = error_measures(a.field.view(), b.field.view())?;
    Ok(ErrorSample {
        step: a.step,
        time: a.time,
        relative,
        max_abs,
    })
}

/// Runs the truncated and extended simulations concurrently and scores the
/// former against the latter at every snapshot.
pub fn compare(spec: &ExperimentSpec) -> Result<ErrorSeries> {
    compare_prepared(&spec.prepare()?)
}

pub fn compare_prepared(prep: &Prepared) -> Result<ErrorSeries> {
    let stride = prep.spec.stride;
    let steps = prep.steps;
    std::thread::scope(|scope| {
        let spawn = |truncated: bool| {
            let (tx, rx) = mpsc::sync_channel::<Snapshot>(4);
            let handle = scope.spawn(move || -> Result<()> {
                let mut runner = Runner::new(prep, truncated)?;
                runner.run_with(steps, stride, |snap| {
                    // A closed receiver means the other run failed.
                    tx.send(snap)
                        .map_err(|_| Error::Contract("comparison aborted".into()))
                })
            });
            (rx, handle)
        };
        let (rx_t, h_t) = spawn(true);
        let (rx_e, h_e) = spawn(false);
        let mut samples = Vec::new();
        let mut pairing = Ok(());
        for (a, b) in rx_t.iter().zip(rx_e.iter()) {
            match sample(&a, &b) {
                Ok(s) => samples.push(s),
                Err(e) => {
                    pairing = Err(e);
                    break;
                }
            }
        }
        drop(rx_t);
        drop(rx_e);
        let joined = |h: std::thread::ScopedJoinHandle<'_, Result<()>>| {
            h.join().unwrap_or_else(|_| Err(Error::Contract("simulation thread panicked".into())))
        };
        let (rt, re) = (joined(h_t), joined(h_e));
        // Report a real failure ahead of the abort it caused on the other side.
        match (rt, re) {
            (Err(e), _) if !matches!(e, Error::Contract(_)) => return Err(e),
            (_, Err(e)) if !matches!(e, Error::Contract(_)) => return Err(e),
            (Err(e), _) | (_, Err(e)) => return Err(e),
            _ => {}
        }
        pairing?;
        Ok(ErrorSeries { samples })
    })
}

/// The three waveguide experiments, each with Tappert, Higdon-2 and Higdon-3
/// boundaries, and a constant-speed control.
pub fn experiment_catalog() -> Vec<ExperimentSpec> {
    let (lx, ly) = (10.0, 10.0);
    let cases = [
        (
            "exp1",
            "Gaussian sound channel, minimum 0.5 at mid-depth",
            SoundSpeedModel::gaussian_duct(ly),
            (lx / 2.0, ly / 2.0),
            1.4,
        ),
        (
            "exp2",
            "erf step from c = 4 at the bottom to c = 1 at the top",
            SoundSpeedModel::erf_step(ly),
            (lx / 2.0, ly / 2.0),
            1.0,
        ),
        (
            "exp3",
            "range-dependent Gaussian trough at x = 0.7 lx",
            SoundSpeedModel::range_gaussian(lx),
            (0.75 * lx, ly / 2.0),
            1.4,
        ),
        (
            "const",
            "constant speed c = 1 control",
            SoundSpeedModel::Constant { c: 1.0 },
            (lx / 2.0, ly / 2.0),
            1.0,
        ),
    ];
    let mut out = Vec::new();
    for (prefix, what, medium, (x, y), duration) in cases {
        let c_bar = medium
            .depth_average_with_step(0.0, ly, DEFAULT_H / 10.0)
            .expect("catalogue media are defined on the window");
        let variants = [
            ("tappert", BoundaryKind::tappert(), "Tappert".to_string()),
            (
                "higdon2",
                BoundaryKind::higdon(2, c_bar),
                format!("Higdon J=2, C={c_bar:.4}"),
            ),
            (
                "higdon3",
                BoundaryKind::higdon(3, c_bar),
                format!("Higdon J=3, C={c_bar:.4}"),
            ),
        ];
        for (suffix, boundary, label) in variants {
            out.push(ExperimentSpec {
                name: format!("{prefix}-{suffix}"),
                description: format!("{what}; {label}"),
                medium: medium.clone(),
                source: SourceSpec {
                    x,
                    y,
                    duration,
                    amplitude: 1.0,
                    c0: 1.0,
                    waveform: Default::default(),
                },
                source_mode: SourceMode::Prephase,
                lx,
                ly,
                h: DEFAULT_H,
                cfl_number: crate::grid::DEFAULT_CFL_NUMBER,
                t_final: DEFAULT_T_FINAL,
                boundary,
                extension: None,
                stride: DEFAULT_STRIDE,
            });
        }
    }
    out
}

pub fn find_experiment(name: &str) -> Result<ExperimentSpec> {
    experiment_catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Configuration(format!("unknown experiment {name:?}")))
}

/// Median per-step wall times for one boundary kind.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub kind: String,
    /// Whole step: interior, walls and boundary.
    pub per_step_seconds: f64,
    /// Time inside the artificial boundary (update plus history).
    pub boundary_seconds: f64,
    /// `boundary_seconds` over a window around the early probe step.
    pub boundary_early: f64,
    /// `boundary_seconds` over a window around the late probe step.
    pub boundary_late: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    pub early_step: usize,
    pub late_step: usize,
}

impl TimingReport {
    pub fn row(&self, kind: &str) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,per_step_seconds\n");
        for r in &self.rows {
            writeln!(out, "{},{:.6e}", r.kind, r.per_step_seconds).expect("writing to a String");
        }
        out
    }

    /// Human-readable table with the boundary share by differencing.
    pub fn to_table(&self) -> String {
        let base = self.row("interior-only").map(|r| r.per_step_seconds);
        let mut out = format!(
            "{:<14} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
            "kind",
            "step_s",
            "minus_base_s",
            "boundary_s",
            format!("bnd@{}", self.early_step),
            format!("bnd@{}", self.late_step),
        );
        for r in &self.rows {
            let diff = base.map(|b| r.per_step_seconds - b).unwrap_or(f64::NAN);
            writeln!(
                out,
                "{:<14} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
                r.kind, r.per_step_seconds, diff, r.boundary_seconds, r.boundary_early, r.boundary_late
            )
            .expect("writing to a String");
        }
        out
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times interior-only, Tappert and Higdon J = 1, 2, 3 on the truncated grid
/// of `spec` over 11-step windows centred on `early_step` and `late_step`.
/// Each window restarts from a saved copy of the run, and repeats alternate
/// windows and kinds, so drifts in machine speed hit all samples alike.
pub fn timing_report(
    spec: &ExperimentSpec,
    early_step: usize,
    late_step: usize,
    repeats: usize,
) -> Result<TimingReport> {
    const HALF_WINDOW: usize = 5;
    if early_step < HALF_WINDOW || late_step < early_step + 2 * HALF_WINDOW || repeats == 0 {
        return Err(Error::invalid(
            "timing",
            "need 5 <= early_step, early_step + 10 <= late_step and repeats >= 1",
        ));
    }
    let prep = ExperimentSpec {
        t_final: 0.0,
        ..spec.clone()
    }
    .prepare()?;
    let c_bar = spec
        .medium
        .depth_average_with_step(0.0, spec.ly, spec.h / 10.0)?;
    let kinds = [
        ("interior-only", BoundaryKind::HardWall),
        ("tappert", BoundaryKind::tappert()),
        (
            "tappert-literal",
            BoundaryKind::Tappert {
                flux: FluxForm::Literal,
            },
        ),
        ("higdon1", BoundaryKind::higdon(1, c_bar)),
        ("higdon2", BoundaryKind::higdon(2, c_bar)),
        ("higdon3", BoundaryKind::higdon(3, c_bar)),
    ];
    let mut starts = Vec::with_capacity(kinds.len());
    for (_, kind) in &kinds {
        let mut runner = Runner::with_boundary(&prep, true, kind)?;
        let mut saved = Vec::with_capacity(2);
        for centre in [early_step, late_step] {
            while runner.simulation().step_index() + HALF_WINDOW + 1 < centre {
                runner.step()?;
            }
            saved.push(runner.clone());
        }
        starts.push(saved);
    }
    let mut samples: Vec<[Vec<f64>; 4]> = kinds.iter().map(|_| Default::default()).collect();
    for _ in 0..repeats {
        for (k, saved) in starts.iter().enumerate() {
            let [full, bnd, early, late] = &mut samples[k];
            for (w, start) in saved.iter().enumerate() {
                let mut runner = start.clone();
                for _ in 0..=2 * HALF_WINDOW {
                    let t0 = Instant::now();
                    runner.step()?;
                    let dt = t0.elapsed().as_secs_f64();
                    let b = runner.simulation().last_boundary_time().as_secs_f64();
                    full.push(dt);
                    bnd.push(b);
                    if w == 0 {
                        early.push(b);
                    } else {
                        late.push(b);
                    }
                }
            }
        }
    }
    let rows = kinds
        .iter()
        .zip(samples.iter_mut())
        .map(|((name, _), [full, bnd, early, late])| TimingRow {
            kind: name.to_string(),
            per_step_seconds: median(full),
            boundary_seconds: median(bnd),
            boundary_early: median(early),
            boundary_late: median(late),
        })
        .collect();
    Ok(TimingReport {
        rows,
        early_step,
        late_step,
    })
}
