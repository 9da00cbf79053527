//! Time-dependent Tappert boundary condition.
//!
//! For waves leaving through the boundary the condition reads, in the inward
//! coordinate `n`,
//!
//! ```text
//! u_n - u_t / c + a(y) I[u] + (1/2) I[(c u_y)_y] = 0,
//! a(y) = (c_yy - c_y^2 / c) / 4,     I[v](t) = int_0^inf v(t - s) ds.
//! ```
//!
//! It is discretised as a box scheme centred at `(t^{i+1/2}, h/2 inward of
//! the boundary node)`: the normal derivative is a time average across the
//! first two columns, the time derivative a space average over the same
//! pair. The history integrals are running sums of the pair average
//! `w = (u_b + u_{b+1}) / 2`; after level `i` has been accumulated,
//! `tau * sum_{m <= i} w^m` is a second-order approximation of `I[w]` at
//! `t^{i+1/2}`, so the update stays explicit in the single unknown
//! `u^{i+1}_b` and costs O(ny) per step regardless of how long it has run.

use crate::abc::{boundary_columns, inward};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::medium::SoundSpeedModel;
use crate::state::{Side, WaveState};

/// Discretisation of the `(c u_y)_y` history term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxForm {
    /// `D+_y (c_{l-1/2} D-_y w)`, second order and self-adjoint.
    #[default]
    Conservative,
    /// `(c_y / 4 + c / 2) D+_y D-_y w`, kept to compare against the expanded
    /// difference formula with its `c_y u_yy` term.
    Literal,
}

#[derive(Debug, Clone)]
pub struct TappertBoundary {
    side: Side,
    flux: FluxForm,
    h: f64,
    tau: f64,
    /// `(c_yy - c_y^2/c) / 4` per row.
    coef_a: Vec<f64>,
    /// `c` per row.
    coef_c: Vec<f64>,
    /// Conservative: `c` at the interior faces `y_{l+1/2}`, `l = 0..ny-1`.
    /// Literal: per-row factor multiplying the Laplacian history.
    flux_coef: Vec<f64>,
    acc_a: Vec<f64>,
    acc_d: Vec<f64>,
    /// Last level folded into the accumulators.
    synced_step: Option<usize>,
    scratch: Vec<f64>,
}

impl TappertBoundary {
    /// Coefficients are evaluated on the physical boundary line
    /// (`x = x_offset` on the left, `x = x_offset + lx` on the right).
    pub fn new(grid: &Grid, model: &SoundSpeedModel, side: Side, flux: FluxForm) -> Result<Self> {
        boundary_columns(side, grid.nx)?;
        let xb = match side {
            Side::Left => grid.x_offset,
            _ => grid.x_offset + grid.lx,
        };
        let ny = grid.ny;
        let mut coef_a = Vec::with_capacity(ny);
        let mut coef_c = Vec::with_capacity(ny);
        let mut flux_coef = Vec::with_capacity(ny);
        for l in 0..ny {
            let s = model.eval(xb, grid.y(l))?;
            coef_a.push(s.tappert_coefficient());
            coef_c.push(s.c);
            match flux {
                FluxForm::Conservative => {
                    if l + 1 < ny {
                        flux_coef.push(model.speed(xb, (l as f64 + 1.0) * grid.h)?);
                    }
                }
                FluxForm::Literal => flux_coef.push(0.25 * s.c_y + 0.5 * s.c),
            }
        }
        Ok(TappertBoundary {
            side,
            flux,
            h: grid.h,
            tau: grid.tau,
            coef_a,
            coef_c,
            flux_coef,
            acc_a: vec![0.0; ny],
            acc_d: vec![0.0; ny],
            synced_step: None,
            scratch: vec![0.0; ny],
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn flux_form(&self) -> FluxForm {
        self.flux
    }

    pub fn coef_a(&self) -> &[f64] {
        &self.coef_a
    }

    pub fn coef_c(&self) -> &[f64] {
        &self.coef_c
    }

    /// Running integral of the pair average, per row.
    pub fn acc_a(&self) -> &[f64] {
        &self.acc_a
    }

    /// Running integral of the y-flux term, per row.
    pub fn acc_d(&self) -> &[f64] {
        &self.acc_d
    }

    pub fn synced_step(&self) -> Option<usize> {
        self.synced_step
    }

    /// Folds the current level `u_curr` into the history integrals. Must be
    /// called once for the initial level and once after every `advance`.
    pub fn accumulate(&mut self, state: &WaveState) -> Result<()> {
        let step = state.step_index;
        match self.synced_step {
            Some(s) if s == step => {
                return Err(Error::Contract(format!(
                    "Tappert history already holds step {step}"
                )))
            }
            Some(s) if s + 1 != step => {
                return Err(Error::Contract(format!(
                    "Tappert history at step {s} cannot accept step {step}"
                )))
            }
            _ => {}
        }
        let (nx, ny) = state.dim();
        let (b, dir) = boundary_columns(self.side, nx)?;
        let u = &state.u_curr;
        let w = &mut self.scratch;
        let bi = inward(b, dir, 1);
        for l in 0..ny {
            w[l] = 0.5 * (u[[b, l]] + u[[bi, l]]);
        }
        let tau = self.tau;
        let inv_h2 = 1.0 / (self.h * self.h);
        for l in 0..ny {
            self.acc_a[l] += tau * w[l];
        }
        match self.flux {
            FluxForm::Conservative => {
                // Zero flux through the walls at y = 0 and y = ly.
                for l in 0..ny {
                    let up = if l + 1 < ny {
                        self.flux_coef[l] * (w[l + 1] - w[l])
                    } else {
                        0.0
                    };
                    let down = if l > 0 {
                        self.flux_coef[l - 1] * (w[l] - w[l - 1])
                    } else {
                        0.0
                    };
                    self.acc_d[l] += tau * (up - down) * inv_h2;
                }
            }
            FluxForm::Literal => {
                for l in 0..ny {
                    let above = if l + 1 < ny { w[l + 1] } else { w[l] };
                    let below = if l > 0 { w[l - 1] } else { w[l] };
                    self.acc_d[l] += tau * (above - 2.0 * w[l] + below) * inv_h2;
                }
            }
        }
        self.synced_step = Some(step);
        Ok(())
    }

    /// Solves the boundary condition for the boundary column of `u_next`.
    pub fn apply(&self, state: &mut WaveState) -> Result<()> {
        if self.synced_step != Some(state.step_index) {
            return Err(Error::Contract(format!(
                "Tappert history is at {:?} but the state is at step {}",
                self.synced_step, state.step_index
            )));
        }
        let (nx, ny) = state.dim();
        let (b, dir) = boundary_columns(self.side, nx)?;
        let bi = inward(b, dir, 1);
        let half_h = 0.5 / self.h;
        for l in 0..ny {
            let c = self.coef_c[l];
            let half_ct = 0.5 / (c * self.tau);
            let ub = state.u_curr[[b, l]];
            let ui = state.u_curr[[bi, l]];
            let ui_next = state.u_next[[bi, l]];
            let flux = match self.flux {
                FluxForm::Conservative => 0.5 * self.acc_d[l],
                FluxForm::Literal => self.flux_coef[l] * self.acc_d[l],
            };
            let rhs = (ui + ui_next - ub) * half_h - (ui_next - ub - ui) * half_ct
                + self.coef_a[l] * self.acc_a[l]
                + flux;
            state.u_next[[b, l]] = rhs / (half_h + half_ct);
        }
        state.mark_side(self.side);
        Ok(())
    }
}
