use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// One of the four sides of the rectangular grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    fn bit(self) -> u8 {
        match self {
            Side::Left => 1 << 1,
            Side::Right => 1 << 2,
            Side::Bottom => 1 << 3,
            Side::Top => 1 << 4,
        }
    }
}

const INTERIOR: u8 = 1;
const COMPLETE: u8 = 0b1_1111;

/// Three consecutive time levels of the field, indexed `[column, row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u_prev: Array2<f64>,
    pub u_curr: Array2<f64>,
    pub u_next: Array2<f64>,
    pub step_index: usize,
    pub time: f64,
    tau: f64,
    filled: u8,
}

impl WaveState {
    pub fn zeros(grid: &Grid) -> Self {
        let shape = grid.dim();
        Self::from_levels(Array2::zeros(shape), Array2::zeros(shape), grid.tau)
    }

    /// State at step 0 with the two given levels as `u^{-1}` and `u^0`.
    pub fn from_levels(u_prev: Array2<f64>, u_curr: Array2<f64>, tau: f64) -> Self {
        assert_eq!(u_prev.dim(), u_curr.dim(), "level shapes differ");
        let u_next = Array2::zeros(u_curr.dim());
        WaveState {
            u_prev,
            u_curr,
            u_next,
            step_index: 0,
            time: 0.0,
            tau,
            filled: 0,
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        self.u_curr.dim()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub(crate) fn mark_interior(&mut self) {
        self.filled |= INTERIOR;
    }

    pub(crate) fn mark_side(&mut self, side: Side) {
        self.filled |= side.bit();
    }

    pub fn is_side_filled(&self, side: Side) -> bool {
        self.filled & side.bit() != 0
    }

    pub fn is_interior_filled(&self) -> bool {
        self.filled & INTERIOR != 0
    }

    /// Rotates the levels once `u_next` is complete.
    pub fn advance(&mut self) -> Result<()> {
        if self.filled != COMPLETE {
            let missing: Vec<String> = std::iter::once((INTERIOR, "interior".to_string()))
                .chain(Side::ALL.iter().map(|s| (s.bit(), format!("{s:?}"))))
                .filter(|(bit, _)| self.filled & bit == 0)
                .map(|(_, name)| name)
                .collect();
            return Err(Error::Contract(format!(
                "advance at step {} with unfilled parts of u_next: {}",
                self.step_index,
                missing.join(", ")
            )));
        }
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        std::mem::swap(&mut self.u_curr, &mut self.u_next);
        self.step_index += 1;
        self.time = self.step_index as f64 * self.tau;
        self.filled = 0;
        Ok(())
    }

    /// Swaps the two known levels, reversing the direction of time.
    pub fn reverse(&mut self) {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        self.filled = 0;
    }

    pub fn max_abs(&self) -> f64 {
        self.u_curr.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// NaN or infinity anywhere in the current level.
    pub fn has_non_finite(&self) -> bool {
        self.u_curr.iter().any(|v| !v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(state: &mut WaveState) {
        state.mark_interior();
        for s in Side::ALL {
            state.mark_side(s);
        }
    }

    fn level(v: f64) -> Array2<f64> {
        Array2::from_elem((3, 3), v)
    }

    #[test]
    fn advance_rotates_levels_and_clock() {
        let mut st = WaveState::from_levels(level(1.0), level(2.0), 0.5);
        st.step_index = 5;
        st.u_next.fill(3.0);
        filled(&mut st);
        st.advance().unwrap();
        assert_eq!(st.step_index, 6);
        assert_eq!(st.time, 3.0);
        assert_eq!(st.u_prev, level(2.0));
        assert_eq!(st.u_curr, level(3.0));
    }

    #[test]
    fn two_rotations_move_next_into_prev() {
        let mut st = WaveState::from_levels(level(1.0), level(2.0), 0.1);
        st.u_next.fill(7.0);
        filled(&mut st);
        st.advance().unwrap();
        st.u_next.fill(9.0);
        filled(&mut st);
        st.advance().unwrap();
        assert_eq!(st.u_prev, level(7.0));
        assert_eq!(st.u_curr, level(9.0));
    }

    #[test]
    fn advance_before_boundaries_is_rejected() {
        let mut st = WaveState::from_levels(level(0.0), level(0.0), 0.1);
        st.mark_interior();
        st.mark_side(Side::Top);
        let err = st.advance().unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(err.to_string().contains("Left"));
        assert_eq!(st.step_index, 0);
    }
}
