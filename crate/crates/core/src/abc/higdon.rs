//! Higdon absorbing conditions of arbitrary order.
//!
//! `prod_j (d/dt - C_j d/dn) u = 0` with `n` the inward coordinate. Each
//! factor is discretised one-sidedly, backward in time and inward in space:
//!
//! ```text
//! (1 - S_t) / tau - C_j (S_n - 1) / h
//! ```
//!
//! and the product is expanded into weights on a `(J+1) x (J+1)` lattice of
//! (time lag, inward offset). The weight at the origin multiplies the single
//! unknown `u^{n+1}_b`.

use std::collections::VecDeque;

use ndarray::{s, Array2};

use crate::abc::{boundary_columns, inward};
use crate::error::{Error, Result};
use crate::state::{Side, WaveState};

#[derive(Debug, Clone, PartialEq)]
pub struct HigdonStencil {
    order: usize,
    /// `weights[m * (order + 1) + k]` multiplies `u^{n+1-m}_{b+k}`.
    weights: Vec<f64>,
}

impl HigdonStencil {
    pub fn new(speeds: &[f64], tau: f64, h: f64) -> Result<Self> {
        Self::check_speeds(speeds)?;
        if !(tau > 0.0 && h > 0.0) {
            return Err(Error::invalid("tau", "steps must be positive"));
        }
        let order = speeds.len();
        let n = order + 1;
        let mut weights = vec![0.0; n * n];
        weights[0] = 1.0;
        let mut degree = 0;
        for &c in speeds {
            let mut next = vec![0.0; n * n];
            for m in 0..=degree {
                for k in 0..=degree {
                    let w = weights[m * n + k];
                    if w == 0.0 {
                        continue;
                    }
                    next[m * n + k] += w * (1.0 / tau + c / h);
                    next[(m + 1) * n + k] -= w / tau;
                    next[m * n + k + 1] -= w * c / h;
                }
            }
            weights = next;
            degree += 1;
        }
        Ok(HigdonStencil { order, weights })
    }

    pub(crate) fn check_speeds(speeds: &[f64]) -> Result<()> {
        if speeds.is_empty() {
            return Err(Error::invalid("order", "Higdon order must be at least 1"));
        }
        if let Some(c) = speeds.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("speeds", format!("speeds must be positive, got {c}")));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Weight of `u^{n+1-lag}` at `offset` columns inward.
    pub fn weight(&self, lag: usize, offset: usize) -> f64 {
        self.weights[lag * (self.order + 1) + offset]
    }

    pub fn pivot(&self) -> f64 {
        self.weights[0]
    }

    /// Residual of the discrete operator at the newest level of `levels`,
    /// where `levels[m][k]` is `u^{n+1-m}` at `k` columns inward.
    pub fn residual(&self, levels: &[Vec<f64>]) -> f64 {
        let n = self.order + 1;
        let mut r = 0.0;
        for m in 0..n {
            for k in 0..n {
                r += self.weights[m * n + k] * levels[m][k];
            }
        }
        r
    }
}

/// A Higdon condition on one side, with the boundary-slab history it needs.
#[derive(Debug, Clone)]
pub struct HigdonBoundary {
    side: Side,
    stencil: HigdonStencil,
    /// Slabs of the first `order + 1` columns (index 0 = boundary column),
    /// newest first; `history[0]` is level `newest_step`.
    history: VecDeque<Array2<f64>>,
    newest_step: usize,
}

impl HigdonBoundary {
    /// Seeds the history with the two levels held by `state`. Older levels
    /// are taken as zero, i.e. the boundary strip must be at rest before
    /// `u_prev`.
    pub fn new(stencil: HigdonStencil, side: Side, state: &WaveState) -> Result<Self> {
        let (nx, ny) = state.dim();
        let (b, dir) = boundary_columns(side, nx)?;
        if stencil.order() + 1 > nx {
            return Err(Error::invalid(
                "order",
                format!("order {} needs more than {nx} columns", stencil.order()),
            ));
        }
        let mut history = VecDeque::with_capacity(stencil.order() + 1);
        history.push_back(slab(&state.u_curr, b, dir, stencil.order()));
        history.push_back(slab(&state.u_prev, b, dir, stencil.order()));
        while history.len() < stencil.order() {
            history.push_back(Array2::zeros((stencil.order() + 1, ny)));
        }
        history.truncate(stencil.order().max(1));
        Ok(HigdonBoundary {
            side,
            stencil,
            history,
            newest_step: state.step_index,
        })
    }

    pub fn stencil(&self) -> &HigdonStencil {
        &self.stencil
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Solves each row of the boundary column of `u_next` independently.
    pub fn apply(&self, state: &mut WaveState) -> Result<()> {
        let order = self.stencil.order();
        if self.newest_step != state.step_index || self.history.len() < order {
            return Err(Error::Contract(format!(
                "Higdon history holds {} levels up to step {} but step {} needs {order}",
                self.history.len(),
                self.newest_step,
                state.step_index
            )));
        }
        let (nx, ny) = state.dim();
        let (b, dir) = boundary_columns(self.side, nx)?;
        let pivot = self.stencil.pivot();
        for l in 0..ny {
            let mut sum = 0.0;
            for k in 1..=order {
                sum += self.stencil.weight(0, k) * state.u_next[[inward(b, dir, k), l]];
            }
            for (lag, level) in self.history.iter().take(order).enumerate() {
                for k in 0..=order {
                    sum += self.stencil.weight(lag + 1, k) * level[[k, l]];
                }
            }
            state.u_next[[b, l]] = -sum / pivot;
        }
        state.mark_side(self.side);
        Ok(())
    }

    /// Pushes the newly completed level `u_curr`; call once after each
    /// `advance`.
    pub fn record(&mut self, state: &WaveState) -> Result<()> {
        if state.step_index != self.newest_step + 1 {
            return Err(Error::Contract(format!(
                "Higdon history at step {} cannot record step {}",
                self.newest_step, state.step_index
            )));
        }
        let (nx, _) = state.dim();
        let (b, dir) = boundary_columns(self.side, nx)?;
        let order = self.stencil.order();
        let mut recycled = if self.history.len() >= order {
            self.history.pop_back().expect("non-empty history")
        } else {
            Array2::zeros((order + 1, state.dim().1))
        };
        fill_slab(&mut recycled, &state.u_curr, b, dir);
        self.history.push_front(recycled);
        self.newest_step = state.step_index;
        Ok(())
    }
}

fn slab(u: &Array2<f64>, b: usize, dir: isize, order: usize) -> Array2<f64> {
    let mut out = Array2::zeros((order + 1, u.dim().1));
    fill_slab(&mut out, u, b, dir);
    out
}

fn fill_slab(out: &mut Array2<f64>, u: &Array2<f64>, b: usize, dir: isize) {
    for k in 0..out.dim().0 {
        out.slice_mut(s![k, ..]).assign(&u.slice(s![inward(b, dir, k), ..]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    #[test]
    fn first_order_weights_by_hand() {
        let (tau, h, c) = (0.03, 0.1, 0.8);
        let st = HigdonStencil::new(&[c], tau, h).unwrap();
        assert_eq!(st.pivot(), 1.0 / tau + c / h);
        assert_eq!(st.weight(1, 0), -1.0 / tau);
        assert_eq!(st.weight(0, 1), -c / h);
        assert_eq!(st.weight(1, 1), 0.0);

        // u^{n+1}_b = [u^n_b / tau + C u^{n+1}_{b+1} / h] / (1/tau + C/h)
        let g = Grid::new(1.0, 0.3, h, 0.9, 1.0, 0.0).unwrap();
        let mut state = WaveState::zeros(&g);
        state.u_curr.row_mut(0).fill(2.0);
        state.u_next.row_mut(1).fill(5.0);
        let hb = HigdonBoundary::new(st, Side::Left, &state).unwrap();
        hb.apply(&mut state).unwrap();
        let expect = (2.0 / tau + c * 5.0 / h) / (1.0 / tau + c / h);
        for &v in state.u_next.row(0) {
            assert!((v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(HigdonStencil::new(&[], 0.1, 0.1).is_err());
        assert!(HigdonStencil::new(&[1.0, 0.0], 0.1, 0.1).is_err());
        assert!(HigdonStencil::new(&[1.0, -2.0], 0.1, 0.1).is_err());
    }

    /// `u^n_j = f(C nτ + (j - 1/2) h)` with linear `f` is annihilated by the
    /// factor with speed C, hence by the whole product.
    #[test]
    fn second_order_annihilates_discrete_linear_wave() {
        let (tau, h) = (0.04, 0.1);
        let (c1, c2) = (0.9, 1.7);
        let st = HigdonStencil::new(&[c1, c2], tau, h).unwrap();
        let f = |s: f64| 3.0 - 2.5 * s;
        let n = 5usize;
        let levels: Vec<Vec<f64>> = (0..3)
            .map(|m| {
                (0..3)
                    .map(|k| f(c1 * (n + 1 - m) as f64 * tau + (k as f64 + 0.5) * h))
                    .collect()
            })
            .collect();
        let scale = st.pivot() * 3.0;
        assert!(st.residual(&levels).abs() < 1e-12 * scale, "{}", st.residual(&levels));
        // A cubic is not: each factor only lowers the degree by one.
        let q = |s: f64| s * s * s;
        let levels_q: Vec<Vec<f64>> = (0..3)
            .map(|m| {
                (0..3)
                    .map(|k| q(c1 * (n + 1 - m) as f64 * tau + (k as f64 + 0.5) * h))
                    .collect()
            })
            .collect();
        assert!(st.residual(&levels_q).abs() > 1e-6);
    }

    #[test]
    fn history_guard() {
        let g = Grid::new(1.0, 0.3, 0.1, 0.9, 1.0, 0.0).unwrap();
        let mut state = WaveState::zeros(&g);
        let st = HigdonStencil::new(&[1.0; 3], g.tau, g.h).unwrap();
        let mut hb = HigdonBoundary::new(st, Side::Right, &state).unwrap();
        hb.apply(&mut state).unwrap();
        assert!(matches!(hb.record(&state), Err(Error::Contract(_))));
        state.step_index = 1;
        hb.record(&state).unwrap();
        state.step_index = 3;
        assert!(matches!(hb.apply(&mut state), Err(Error::Contract(_))));
        assert!(matches!(hb.record(&state), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_data_gives_zero_boundary() {
        let g = Grid::new(1.0, 0.3, 0.1, 0.9, 1.0, 0.0).unwrap();
        let mut state = WaveState::zeros(&g);
        state.u_next.row_mut(g.nx - 1).fill(9.0);
        let st = HigdonStencil::new(&[1.0, 2.0], g.tau, g.h).unwrap();
        let hb = HigdonBoundary::new(st, Side::Right, &state).unwrap();
        hb.apply(&mut state).unwrap();
        assert!(state.u_next.row(g.nx - 1).iter().all(|&v| v == 0.0));
    }

    fn random_state(values: &[f64], nx: usize, ny: usize) -> WaveState {
        let lvl = |k: usize| {
            Array2::from_shape_vec((nx, ny), values[k * nx * ny..(k + 1) * nx * ny].to_vec())
                .unwrap()
        };
        let mut st = WaveState::from_levels(lvl(0), lvl(1), 0.05);
        st.u_next = lvl(2);
        st
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pivot_is_product_of_positive_factors(
            speeds in proptest::collection::vec(0.01f64..10.0, 1..6),
            tau in 1e-3f64..1.0,
            h in 1e-3f64..1.0,
        ) {
            let st = HigdonStencil::new(&speeds, tau, h).unwrap();
            let expect: f64 = speeds.iter().map(|c| 1.0 / tau + c / h).product();
            prop_assert!(st.pivot() > 0.0);
            prop_assert!((st.pivot() - expect).abs() <= 1e-12 * expect);
        }

        #[test]
        fn weights_sum_to_zero(speeds in proptest::collection::vec(0.1f64..4.0, 1..5)) {
            // Constants are annihilated by every factor.
            let st = HigdonStencil::new(&speeds, 0.05, 0.1).unwrap();
            let n = st.order() + 1;
            let total: f64 = (0..n).flat_map(|m| (0..n).map(move |k| (m, k)))
                .map(|(m, k)| st.weight(m, k)).sum();
            prop_assert!(total.abs() < 1e-9 * st.pivot());
        }

        #[test]
        fn apply_is_linear_and_row_local(
            values in proptest::collection::vec(-1.0f64..1.0, 3 * 6 * 5),
            alpha in -4.0f64..4.0,
            perm_seed in 0usize..120,
        ) {
            let (nx, ny) = (6, 5);
            let stencil = HigdonStencil::new(&[0.7, 1.1], 0.05, 0.1).unwrap();
            let run = |st: &mut WaveState| {
                let hb = HigdonBoundary::new(stencil.clone(), Side::Left, st).unwrap();
                hb.apply(st).unwrap();
                st.u_next.row(0).to_vec()
            };
            let mut base = random_state(&values, nx, ny);
            let out = run(&mut base);

            let scaled: Vec<f64> = values.iter().map(|v| alpha * v).collect();
            let mut st2 = random_state(&scaled, nx, ny);
            let out2 = run(&mut st2);
            for (a, b) in out.iter().zip(&out2) {
                prop_assert!((b - alpha * a).abs() < 1e-10);
            }

            // Permute rows of every level; the output permutes the same way.
            let mut perm: Vec<usize> = (0..ny).collect();
            let mut seed = perm_seed;
            for i in (1..ny).rev() {
                perm.swap(i, seed % (i + 1));
                seed /= i + 1;
            }
            let permute = |a: &Array2<f64>| Array2::from_shape_fn((nx, ny), |(j, l)| a[[j, perm[l]]]);
            let mut st3 = random_state(&values, nx, ny);
            st3.u_prev = permute(&st3.u_prev);
            st3.u_curr = permute(&st3.u_curr);
            st3.u_next = permute(&st3.u_next);
            let out3 = run(&mut st3);
            for l in 0..ny {
                prop_assert_eq!(out3[l], out[perm[l]]);
            }
        }
    }
}
