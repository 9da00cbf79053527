//! Single-owner time-stepping driver.

use std::time::{Duration, Instant};

use crate::abc::{BoundaryKind, HigdonBoundary, HigdonStencil, TappertBoundary};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::medium::SoundSpeedModel;
use crate::scheme::{apply_hard_wall, step_interior, SpeedField};
use crate::source::PointForcing;
use crate::state::{Side, WaveState};

/// Steps between NaN/Inf scans of the field.
const FINITE_CHECK_STRIDE: usize = 16;

#[derive(Debug, Clone)]
enum ActiveBoundary {
    Wall,
    Tappert(TappertBoundary),
    Higdon(HigdonBoundary),
}

impl ActiveBoundary {
    fn new(
        kind: &BoundaryKind,
        side: Side,
        grid: &Grid,
        model: &SoundSpeedModel,
        state: &WaveState,
    ) -> Result<Self> {
        Ok(match kind {
            BoundaryKind::HardWall => ActiveBoundary::Wall,
            BoundaryKind::Tappert { flux } => {
                let mut t = TappertBoundary::new(grid, model, side, *flux)?;
                t.accumulate(state)?;
                ActiveBoundary::Tappert(t)
            }
            BoundaryKind::Higdon { speeds } => {
                let stencil = HigdonStencil::new(speeds, grid.tau, grid.h)?;
                ActiveBoundary::Higdon(HigdonBoundary::new(stencil, side, state)?)
            }
        })
    }

    fn apply(&self, state: &mut WaveState) -> Result<()> {
        match self {
            ActiveBoundary::Wall => Ok(()),
            ActiveBoundary::Tappert(t) => t.apply(state),
            ActiveBoundary::Higdon(hb) => hb.apply(state),
        }
    }

    fn after_advance(&mut self, state: &WaveState) -> Result<()> {
        match self {
            ActiveBoundary::Wall => Ok(()),
            ActiveBoundary::Tappert(t) => t.accumulate(state),
            ActiveBoundary::Higdon(hb) => hb.record(state),
        }
    }
}

/// A wave field on a grid with hard walls at `y = 0` and `y = ly` and a
/// configurable condition on each vertical side.
#[derive(Debug, Clone)]
pub struct Simulation {
    grid: Grid,
    speed: SpeedField,
    state: WaveState,
    left: ActiveBoundary,
    right: ActiveBoundary,
    walls: Vec<Side>,
    forcing: Option<PointForcing>,
    last_boundary_time: Duration,
}

impl Simulation {
    pub fn new(
        grid: Grid,
        model: &SoundSpeedModel,
        state: WaveState,
        left: &BoundaryKind,
        right: &BoundaryKind,
    ) -> Result<Self> {
        let speed = SpeedField::new(&grid, model)?;
        Self::with_speed(grid, speed, model, state, left, right)
    }

    /// As [`Simulation::new`] with a precomputed nodal speed.
    pub fn with_speed(
        grid: Grid,
        speed: SpeedField,
        model: &SoundSpeedModel,
        state: WaveState,
        left: &BoundaryKind,
        right: &BoundaryKind,
    ) -> Result<Self> {
        if state.dim() != grid.dim() {
            return Err(Error::invalid("state", "field shape does not match the grid"));
        }
        let c_max = speed.max();
        if c_max > grid.c_max * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "c_max",
                format!(
                    "medium reaches c = {c_max} but the time step was chosen for c_max = {}",
                    grid.c_max
                ),
            ));
        }
        let mut walls = vec![Side::Bottom, Side::Top];
        if *left == BoundaryKind::HardWall {
            walls.push(Side::Left);
        }
        if *right == BoundaryKind::HardWall {
            walls.push(Side::Right);
        }
        let left = ActiveBoundary::new(left, Side::Left, &grid, model, &state)?;
        let right = ActiveBoundary::new(right, Side::Right, &grid, model, &state)?;
        Ok(Simulation {
            grid,
            speed,
            state,
            left,
            right,
            walls,
            forcing: None,
            last_boundary_time: Duration::ZERO,
        })
    }

    /// Adds a point forcing to the main run (instead of a pre-phase).
    pub fn with_forcing(mut self, forcing: PointForcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn state(&self) -> &WaveState {
        &self.state
    }

    pub fn speed(&self) -> &SpeedField {
        &self.speed
    }

    pub fn step_index(&self) -> usize {
        self.state.step_index
    }

    /// Wall time spent in the artificial boundaries during the last step
    /// (apply plus history update).
    pub fn last_boundary_time(&self) -> Duration {
        self.last_boundary_time
    }

    pub fn step(&mut self) -> Result<()> {
        let state = &mut self.state;
        step_interior(state, &self.speed);
        if let Some(f) = &self.forcing {
            if f.is_active(state.time) {
                state.u_next[f.node] += f.value(state.time);
            }
        }
        apply_hard_wall(state, &self.speed, &self.walls);

        let t0 = Instant::now();
        self.left.apply(state)?;
        self.right.apply(state)?;
        let mut spent = t0.elapsed();

        state.advance()?;

        let t1 = Instant::now();
        self.left.after_advance(state)?;
        self.right.after_advance(state)?;
        spent += t1.elapsed();
        self.last_boundary_time = spent;

        if state.step_index % FINITE_CHECK_STRIDE == 0 && state.has_non_finite() {
            return Err(Error::Unstable {
                step: state.step_index,
                max_abs: state.max_abs(),
            });
        }
        Ok(())
    }

    /// Steps until `step_index == target`, checking finiteness at the end.
    pub fn run_until(&mut self, target: usize) -> Result<()> {
        while self.state.step_index < target {
            self.step()?;
        }
        if self.state.has_non_finite() {
            return Err(Error::Unstable {
                step: self.state.step_index,
                max_abs: self.state.max_abs(),
            });
        }
        Ok(())
    }
}
