//! Artificial boundary conditions for a vertical (constant-x) boundary.
//!
//! Both families fill the outermost column of `u_next` after the interior and
//! the hard walls have been updated. They are written in terms of the inward
//! direction, so the same formulas serve the left and the right side.

mod higdon;
mod tappert;

pub use higdon::{HigdonBoundary, HigdonStencil};
pub use tappert::{FluxForm, TappertBoundary};

use crate::error::{Error, Result};
use crate::state::Side;

/// Column indices `(boundary, step inward)` for a vertical side.
pub(crate) fn boundary_columns(side: Side, nx: usize) -> Result<(usize, isize)> {
    match side {
        Side::Left => Ok((0, 1)),
        Side::Right => Ok((nx - 1, -1)),
        other => Err(Error::invalid(
            "side",
            format!("absorbing boundaries live on Left or Right, not {other:?}"),
        )),
    }
}

/// Column `k` cells inward from the boundary column.
#[inline]
pub(crate) fn inward(b: usize, dir: isize, k: usize) -> usize {
    (b as isize + dir * k as isize) as usize
}

/// Per-side boundary condition as configured by a user.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    HardWall,
    Tappert { flux: FluxForm },
    /// Higdon condition of order `speeds.len()`.
    Higdon { speeds: Vec<f64> },
}

impl BoundaryKind {
    pub fn tappert() -> Self {
        BoundaryKind::Tappert {
            flux: FluxForm::Conservative,
        }
    }

    pub fn higdon(order: usize, speed: f64) -> Self {
        BoundaryKind::Higdon {
            speeds: vec![speed; order],
        }
    }

    pub fn label(&self) -> String {
        match self {
            BoundaryKind::HardWall => "hardwall".into(),
            BoundaryKind::Tappert {
                flux: FluxForm::Conservative,
            } => "tappert".into(),
            BoundaryKind::Tappert {
                flux: FluxForm::Literal,
            } => "tappert-literal".into(),
            BoundaryKind::Higdon { speeds } => format!("higdon{}", speeds.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub side: Side,
    pub kind: BoundaryKind,
}

impl BoundarySpec {
    pub fn validate(&self) -> Result<()> {
        boundary_columns(self.side, 3)?;
        if let BoundaryKind::Higdon { speeds } = &self.kind {
            HigdonStencil::check_speeds(speeds)?;
        }
        Ok(())
    }
}
