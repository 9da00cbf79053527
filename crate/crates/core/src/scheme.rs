//! Explicit second-order leapfrog update and hard-wall boundaries.

use ndarray::Array2;

use crate::error::Result;
use crate::grid::Grid;
use crate::medium::SoundSpeedModel;
use crate::state::{Side, WaveState};

/// Nodal sound speed cached on a grid, with the stencil weight
/// `(c tau / h)^2` precomputed.
#[derive(Debug, Clone)]
pub struct SpeedField {
    c: Array2<f64>,
    weight: Array2<f64>,
}

impl SpeedField {
    pub fn new(grid: &Grid, model: &SoundSpeedModel) -> Result<Self> {
        let mut c = Array2::zeros(grid.dim());
        for ((j, l), v) in c.indexed_iter_mut() {
            *v = model.speed(grid.x(j), grid.y(l))?;
        }
        Ok(Self::from_speeds(grid, c))
    }

    pub fn from_speeds(grid: &Grid, c: Array2<f64>) -> Self {
        let r = grid.tau / grid.h;
        let weight = c.mapv(|c| c * c * r * r);
        SpeedField { c, weight }
    }

    pub fn uniform(grid: &Grid, c: f64) -> Self {
        Self::from_speeds(grid, Array2::from_elem(grid.dim(), c))
    }

    pub fn c(&self) -> &Array2<f64> {
        &self.c
    }

    pub fn max(&self) -> f64 {
        self.c.iter().copied().fold(0.0, f64::max)
    }
}

/// Fills `u_next` at every node except the outermost ring:
/// `u_next = 2 u - u_prev + (c tau / h)^2 (sum of 4 neighbours - 4 u)`.
pub fn step_interior(state: &mut WaveState, speed: &SpeedField) {
    let (nx, ny) = state.dim();
    let u = state.u_curr.as_slice().expect("standard layout");
    let up = state.u_prev.as_slice().expect("standard layout");
    let w = speed.weight.as_slice().expect("standard layout");
    let un = state.u_next.as_slice_mut().expect("standard layout");
    for j in 1..nx - 1 {
        let row = j * ny;
        for k in row + 1..row + ny - 1 {
            let lap = (u[k - ny] + u[k + ny]) + (u[k - 1] + u[k + 1]) - 4.0 * u[k];
            un[k] = 2.0 * u[k] - up[k] + w[k] * lap;
        }
    }
    state.mark_interior();
}

/// Leapfrog update at node `(j, l)` where neighbours outside the grid are
/// mirrored across the cell face, i.e. take the node's own value. The sum is
/// grouped as in [`step_interior`] so both agree bit for bit.
fn update_with_mirrors(state: &mut WaveState, speed: &SpeedField, j: usize, l: usize) {
    let (nx, ny) = state.dim();
    let u = &state.u_curr;
    let centre = u[[j, l]];
    let west = if j > 0 { u[[j - 1, l]] } else { centre };
    let east = if j + 1 < nx { u[[j + 1, l]] } else { centre };
    let south = if l > 0 { u[[j, l - 1]] } else { centre };
    let north = if l + 1 < ny { u[[j, l + 1]] } else { centre };
    let lap = (west + east) + (south + north) - 4.0 * centre;
    state.u_next[[j, l]] = 2.0 * centre - state.u_prev[[j, l]] + speed.weight[[j, l]] * lap;
}

/// Zero-Neumann walls on the given sides. Ghost values are mirror images
/// across the wall face, so corners between two walls are mirrored twice.
pub fn apply_hard_wall(state: &mut WaveState, speed: &SpeedField, sides: &[Side]) {
    let (nx, ny) = state.dim();
    for &side in sides {
        match side {
            Side::Left | Side::Right => {
                let j = if side == Side::Left { 0 } else { nx - 1 };
                for l in 0..ny {
                    update_with_mirrors(state, speed, j, l);
                }
            }
            Side::Bottom | Side::Top => {
                let l = if side == Side::Bottom { 0 } else { ny - 1 };
                for j in 0..nx {
                    update_with_mirrors(state, speed, j, l);
                }
            }
        }
        state.mark_side(side);
    }
}

/// Leapfrog energy between the two known levels,
/// `sum[(1/c^2) ((u - u_prev)/tau)^2 + grad u . grad u_prev] h^2`.
/// Exactly conserved by the scheme in a closed hard-wall box.
pub fn discrete_energy(state: &WaveState, speed: &SpeedField, grid: &Grid) -> f64 {
    let (nx, ny) = state.dim();
    let u = &state.u_curr;
    let up = &state.u_prev;
    let h2 = grid.h * grid.h;
    let mut kinetic = 0.0;
    for (&c, (&a, &b)) in speed.c.iter().zip(u.iter().zip(up.iter())) {
        let v = (a - b) / grid.tau;
        kinetic += v * v / (c * c);
    }
    let mut potential = 0.0;
    for j in 0..nx {
        for l in 0..ny {
            if j + 1 < nx {
                potential += (u[[j + 1, l]] - u[[j, l]]) * (up[[j + 1, l]] - up[[j, l]]);
            }
            if l + 1 < ny {
                potential += (u[[j, l + 1]] - u[[j, l]]) * (up[[j, l + 1]] - up[[j, l]]);
            }
        }
    }
    // Gradients carry 1/h each, cells carry h^2: the potential part is unscaled.
    kinetic * h2 + potential
}
