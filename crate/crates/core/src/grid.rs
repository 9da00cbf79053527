use crate::error::{Error, Result};

/// Default fraction of the 2D CFL limit used to pick the time step.
pub const DEFAULT_CFL_NUMBER: f64 = 0.9;

/// Uniform cell-centred grid.
///
/// Column `j` (0-based) sits at `x = x_offset + (j + 1/2) h` and row `l` at
/// `y = (l + 1/2) h`, so the physical walls `x = x_offset`,
/// `x = x_offset + lx`, `y = 0` and `y = ly` lie on cell faces.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub tau: f64,
    pub nx: usize,
    pub ny: usize,
    pub x_offset: f64,
    /// `x_offset / h`, kept as an integer so that grids with different
    /// offsets produce bit-identical coordinates for the same physical column.
    offset_cells: i64,
    pub c_max: f64,
}

impl Grid {
    /// Builds a grid with `tau = cfl_number * h / (c_max * sqrt(2))`.
    pub fn new(
        lx: f64,
        ly: f64,
        h: f64,
        cfl_number: f64,
        c_max: f64,
        x_offset: f64,
    ) -> Result<Self> {
        for (name, v) in [("lx", lx), ("ly", ly), ("h", h), ("c_max", c_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(cfl_number > 0.0 && cfl_number <= 1.0) {
            return Err(Error::invalid(
                "cfl_number",
                format!("must lie in (0, 1], got {cfl_number}"),
            ));
        }
        let nx = cells(lx, h, "lx")?;
        let ny = cells(ly, h, "ly")?;
        let offset = x_offset / h;
        if (offset - offset.round()).abs() > 1e-6 {
            return Err(Error::invalid(
                "x_offset",
                format!("{x_offset} is not a multiple of h = {h}"),
            ));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::invalid("h", "grid needs at least 3 cells per direction"));
        }
        Ok(Grid {
            lx,
            ly,
            h,
            tau: cfl_number * h / (c_max * std::f64::consts::SQRT_2),
            nx,
            ny,
            x_offset,
            offset_cells: offset.round() as i64,
            c_max,
        })
    }

    pub fn x(&self, j: usize) -> f64 {
        ((self.offset_cells + j as i64) as f64 + 0.5) * self.h
    }

    pub fn y(&self, l: usize) -> f64 {
        (l as f64 + 0.5) * self.h
    }

    /// Column of this grid holding global cell index `cell` (cell 0 spans
    /// `[0, h]`), if present.
    pub fn column_of_cell(&self, cell: i64) -> Option<usize> {
        let j = cell - self.offset_cells;
        (0..self.nx as i64).contains(&j).then_some(j as usize)
    }

    pub fn offset_cells(&self) -> i64 {
        self.offset_cells
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.tau
    }

    /// `c_max * tau / h`; at most `1/sqrt(2)` by construction.
    pub fn courant(&self) -> f64 {
        self.c_max * self.tau / self.h
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
}

fn cells(len: f64, h: f64, name: &'static str) -> Result<usize> {
    let n = len / h;
    if (n - n.round()).abs() > 1e-6 * n.max(1.0) {
        return Err(Error::invalid(name, format!("{len} is not a multiple of h = {h}")));
    }
    Ok(n.round() as usize)
}
