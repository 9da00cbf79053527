//! Initial data from a short point-source pulse in a homogeneous medium.
//!
//! The pre-phase runs the interior scheme at constant speed `c0` on a
//! private square patch centred on the source cell. The patch is wide enough
//! that the numerical domain of dependence never reaches its edge, so the
//! result does not depend on which grid it is pasted into: a truncated grid
//! and its extended oracle receive bit-identical values on their overlap.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::WaveState;

/// Values below this fraction of the peak may be cut off at the grid edge.
const CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub x: f64,
    pub y: f64,
    /// Pulse length `d`.
    pub duration: f64,
    pub amplitude: f64,
    /// Speed of the homogeneous medium used during the pre-phase.
    pub c0: f64,
    pub waveform: Waveform,
}

/// Time profile of the source on `[0, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Waveform {
    /// `sin^2(pi t / d)`.
    #[default]
    SinSquared,
    /// `sin(2 pi t / d) sin^2(pi t / d)`, which integrates to zero and so
    /// leaves no static offset behind in a closed waveguide.
    ZeroMean,
}

impl Waveform {
    pub fn value(self, t: f64, duration: f64) -> f64 {
        match self {
            Waveform::SinSquared => pulse(t, duration),
            Waveform::ZeroMean => (2.0 * PI * t / duration).sin() * pulse(t, duration),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Waveform::SinSquared => "sin2",
            Waveform::ZeroMean => "zero-mean",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sin2" => Some(Waveform::SinSquared),
            "zero-mean" => Some(Waveform::ZeroMean),
            _ => None,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "pulse duration must be positive"));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::invalid("c0", "pre-phase speed must be positive"));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "amplitude must be finite"));
        }
        Ok(())
    }

    /// Radius reached by the pulse front at the end of the pre-phase.
    pub fn support_radius(&self) -> f64 {
        self.c0 * self.duration
    }

    /// Global cell indices `(column, row)` of the source node.
    pub fn cell(&self, h: f64) -> (i64, i64) {
        let cell = |v: f64| (v / h + 1e-9).floor() as i64;
        (cell(self.x), cell(self.y))
    }

    /// Grid node holding the source, which must not be on the outer ring.
    pub fn node(&self, grid: &Grid) -> Result<(usize, usize)> {
        let (cx, cy) = self.cell(grid.h);
        let j = grid.column_of_cell(cx);
        let inside = |i: usize, n: usize| i >= 1 && i + 1 < n;
        match j {
            Some(j) if cy >= 0 && inside(j, grid.nx) && inside(cy as usize, grid.ny) => {
                Ok((j, cy as usize))
            }
            _ => Err(Error::Configuration(format!(
                "source ({}, {}) is not strictly inside the grid",
                self.x, self.y
            ))),
        }
    }
}

/// `sin^2(pi t / d)` on `[0, d]`, zero elsewhere.
pub fn pulse(t: f64, duration: f64) -> f64 {
    if (0.0..=duration).contains(&t) {
        let s = (PI * t / duration).sin();
        s * s
    } else {
        0.0
    }
}

/// Point forcing added to `u_next` at one node: `tau^2 c^2 amplitude g(t) / h^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointForcing {
    pub node: (usize, usize),
    pub duration: f64,
    pub waveform: Waveform,
    scale: f64,
}

impl PointForcing {
    pub fn new(grid: &Grid, src: &SourceSpec, c: f64) -> Result<Self> {
        src.validate()?;
        let node = src.node(grid)?;
        let r = grid.tau * c / grid.h;
        Ok(PointForcing {
            node,
            duration: src.duration,
            waveform: src.waveform,
            scale: r * r * src.amplitude,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.scale * self.waveform.value(t, self.duration)
    }

    pub fn is_active(&self, t: f64) -> bool {
        t <= self.duration
    }
}

/// Runs the homogeneous pre-phase and returns its last two levels as the
/// initial state of the main run (clock reset to zero).
pub fn make_initial(grid: &Grid, src: &SourceSpec) -> Result<WaveState> {
    src.validate()?;
    let (sj, sl) = src.node(grid)?;
    let steps = (src.duration / grid.tau).floor() as usize + 1;
    let radius = steps + 2;
    let n = 2 * radius + 1;
    let r = grid.tau * src.c0 / grid.h;
    let weight = r * r;
    let forcing = weight * src.amplitude;

    let mut prev = Array2::<f64>::zeros((n, n));
    let mut curr = Array2::<f64>::zeros((n, n));
    let mut next = Array2::<f64>::zeros((n, n));
    for i in 0..steps {
        {
            let u = curr.as_slice().expect("standard layout");
            let up = prev.as_slice().expect("standard layout");
            let un = next.as_slice_mut().expect("standard layout");
            for a in 1..n - 1 {
                let row = a * n;
                for k in row + 1..row + n - 1 {
                    let lap = (u[k - n] + u[k + n]) + (u[k - 1] + u[k + 1]) - 4.0 * u[k];
                    un[k] = 2.0 * u[k] - up[k] + weight * lap;
                }
            }
        }
        next[[radius, radius]] += forcing * src.waveform.value(i as f64 * grid.tau, src.duration);
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }

    let peak = curr
        .iter()
        .chain(prev.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out_prev = Array2::zeros(grid.dim());
    let mut out_curr = Array2::zeros(grid.dim());
    let mut dropped = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let j = sj as i64 + a as i64 - radius as i64;
            let l = sl as i64 + b as i64 - radius as i64;
            if (0..grid.nx as i64).contains(&j) && (0..grid.ny as i64).contains(&l) {
                out_prev[[j as usize, l as usize]] = prev[[a, b]];
                out_curr[[j as usize, l as usize]] = curr[[a, b]];
            } else {
                dropped = dropped.max(prev[[a, b]].abs()).max(curr[[a, b]].abs());
            }
        }
    }
    if dropped > CUTOFF * peak {
        return Err(Error::Configuration(format!(
            "pre-phase wave reaches the grid edge (|u| = {dropped:.3e} vs peak {peak:.3e})"
        )));
    }
    Ok(WaveState::from_levels(out_prev, out_curr, grid.tau))
}
