//! Sound-speed fields for stratified waveguides.
//!
//! Every model returns the speed together with its first and second depth
//! derivatives, because the Tappert boundary needs `c_y` and `c_yy` along the
//! artificial boundary. Analytic profiles return closed forms; tabulated media
//! fall back to finite differences on the sample lattice.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Speed and its depth derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSample {
    pub c: f64,
    pub c_y: f64,
    pub c_yy: f64,
}

impl SpeedSample {
    /// `(c_yy - c_y^2 / c) / 4`, the zeroth-order coefficient of the Tappert
    /// boundary condition.
    pub fn tappert_coefficient(&self) -> f64 {
        0.25 * (self.c_yy - self.c_y * self.c_y / self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SoundSpeedModel {
    Constant {
        c: f64,
    },
    /// `c(y) = base - amplitude * exp(-(y - center)^2 / width)`.
    GaussianDuct {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `c(y) = top - drop * (1 + erf(y - center)) / 2`, a smooth step from
    /// `top` (deep) down to `top - drop` (shallow end of the y axis).
    ErfStep { top: f64, drop: f64, center: f64 },
    /// Range-dependent: `c(x) = base - amplitude * exp(-(x - center)^2 / width)`.
    RangeGaussian {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Tabulated(Arc<SpeedTable>),
}

impl SoundSpeedModel {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("c", format!("speed must be positive, got {c}")));
        }
        Ok(SoundSpeedModel::Constant { c })
    }

    /// Sound channel with its minimum `c = 0.5` on the midline of a guide of
    /// depth `ly`.
    pub fn gaussian_duct(ly: f64) -> Self {
        SoundSpeedModel::GaussianDuct {
            base: 1.0,
            amplitude: 0.5,
            center: 0.5 * ly,
            width: 3.0,
        }
    }

    /// Speed falling from 4 to 1 around `y = ly / 5`.
    pub fn erf_step(ly: f64) -> Self {
        SoundSpeedModel::ErfStep {
            top: 4.0,
            drop: 3.0,
            center: 0.2 * ly,
        }
    }

    /// Range-dependent dip centred at `x = 0.7 lx`.
    pub fn range_gaussian(lx: f64) -> Self {
        SoundSpeedModel::RangeGaussian {
            base: 1.0,
            amplitude: 0.5,
            center: 0.7 * lx,
            width: 3.0,
        }
    }

    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        Ok(SoundSpeedModel::Tabulated(Arc::new(SpeedTable::load(path)?)))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<SpeedSample> {
        let sample = match *self {
            SoundSpeedModel::Constant { c } => SpeedSample {
                c,
                c_y: 0.0,
                c_yy: 0.0,
            },
            SoundSpeedModel::GaussianDuct {
                base,
                amplitude,
                center,
                width,
            } => {
                let (g, g1, g2) = gaussian_bump(y - center, width);
                SpeedSample {
                    c: base - amplitude * g,
                    c_y: -amplitude * g1,
                    c_yy: -amplitude * g2,
                }
            }
            SoundSpeedModel::ErfStep { top, drop, center } => {
                let r = y - center;
                let density = (-r * r).exp() / PI.sqrt();
                SpeedSample {
                    c: top - 0.5 * drop * (1.0 + libm::erf(r)),
                    c_y: -drop * density,
                    c_yy: 2.0 * drop * r * density,
                }
            }
            SoundSpeedModel::RangeGaussian {
                base,
                amplitude,
                center,
                width,
            } => {
                let (g, _, _) = gaussian_bump(x - center, width);
                SpeedSample {
                    c: base - amplitude * g,
                    c_y: 0.0,
                    c_yy: 0.0,
                }
            }
            SoundSpeedModel::Tabulated(ref table) => table.eval(x, y)?,
        };
        Ok(sample)
    }

    pub fn speed(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(x, y).map(|s| s.c)
    }

    /// Depth mean of `c` on `[0, ly]` at range `x`, by the composite trapezoid
    /// rule with step at most `max_step`.
    pub fn depth_average_with_step(&self, x: f64, ly: f64, max_step: f64) -> Result<f64> {
        if !(ly > 0.0) {
            return Err(Error::invalid("ly", "depth must be positive"));
        }
        if !(max_step > 0.0) {
            return Err(Error::invalid("max_step", "quadrature step must be positive"));
        }
        let n = (ly / max_step).ceil().max(1.0) as usize;
        let dy = ly / n as f64;
        let mut sum = 0.5 * (self.speed(x, 0.0)? + self.speed(x, ly)?);
        for k in 1..n {
            sum += self.speed(x, k as f64 * dy)?;
        }
        Ok(sum * dy / ly)
    }

    /// Depth mean with a step of `ly / 2000`, fine enough for any grid with
    /// `h >= ly / 200`.
    pub fn depth_average(&self, x: f64, ly: f64) -> Result<f64> {
        self.depth_average_with_step(x, ly, ly / 2000.0)
    }

    /// Largest speed over a lattice of points.
    pub fn max_speed_over(
        &self,
        xs: impl IntoIterator<Item = f64>,
        ys: &[f64],
    ) -> Result<f64> {
        let mut c_max = 0.0f64;
        for x in xs {
            for &y in ys {
                c_max = c_max.max(self.speed(x, y)?);
            }
        }
        Ok(c_max)
    }

    pub fn is_range_independent(&self) -> bool {
        !matches!(
            self,
            SoundSpeedModel::RangeGaussian { .. } | SoundSpeedModel::Tabulated(_)
        )
    }
}

/// `exp(-r^2/w)` and its first two derivatives in `r`.
fn gaussian_bump(r: f64, width: f64) -> (f64, f64, f64) {
    let g = (-r * r / width).exp();
    let g1 = -2.0 * r / width * g;
    let g2 = (4.0 * r * r / (width * width) - 2.0 / width) * g;
    (g, g1, g2)
}

/// Speed sampled on a regular lattice, y-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedTable {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    c: Array2<f64>,
    c_y: Array2<f64>,
    c_yy: Array2<f64>,
}

impl SpeedTable {
    /// `values` is row-major with y varying fastest: `values[i * ny + k]` is
    /// the speed at `(x0 + i dx, y0 + k dy)`.
    pub fn from_samples(
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nx < 2 {
            return Err(Error::invalid("nx", "table needs at least 2 columns"));
        }
        if ny < 4 {
            return Err(Error::invalid("ny", "table needs at least 4 rows for c_yy"));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::invalid("dx", "table spacing must be positive"));
        }
        if values.len() != nx * ny {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", nx * ny, values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("values", format!("non-positive speed {bad}")));
        }
        let c = Array2::from_shape_vec((nx, ny), values).expect("shape checked above");
        let mut c_y = Array2::zeros((nx, ny));
        let mut c_yy = Array2::zeros((nx, ny));
        for i in 0..nx {
            let col = c.row(i);
            let col = col.as_slice().expect("standard layout");
            for k in 0..ny {
                c_y[[i, k]] = first_derivative(col, k, dy);
                c_yy[[i, k]] = second_derivative(col, k, dy);
            }
        }
        Ok(SpeedTable {
            x0,
            y0,
            dx,
            dy,
            c,
            c_y,
            c_yy,
        })
    }

    /// Samples an analytic model on a lattice.
    pub fn sample(
        model: &SoundSpeedModel,
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for k in 0..ny {
                values.push(model.speed(x0 + i as f64 * dx, y0 + k as f64 * dy)?);
            }
        }
        Self::from_samples(nx, ny, x0, y0, dx, dy, values)
    }

    /// Reads the plain-text format: a header line `nx ny x0 y0 dx dy`
    /// followed by `nx * ny` whitespace-separated speeds, y fastest.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|reason| Error::Parse {
            path: path.to_path_buf(),
            reason,
        })
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty file")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(format!("header needs 6 fields, found {}", fields.len()));
        }
        let nx: usize = fields[0].parse().map_err(|e| format!("nx: {e}"))?;
        let ny: usize = fields[1].parse().map_err(|e| format!("ny: {e}"))?;
        let mut geom = [0.0; 4];
        for (slot, raw) in geom.iter_mut().zip(&fields[2..]) {
            *slot = raw.parse().map_err(|e| format!("header value {raw:?}: {e}"))?;
        }
        let values = lines
            .flat_map(str::split_whitespace)
            .map(|v| v.parse::<f64>().map_err(|e| format!("value {v:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_samples(nx, ny, geom[0], geom[1], geom[2], geom[3], values)
            .map_err(|e| e.to_string())
    }

    pub fn extent(&self) -> ((f64, f64), (f64, f64)) {
        let (nx, ny) = self.c.dim();
        (
            (self.x0, self.x0 + (nx - 1) as f64 * self.dx),
            (self.y0, self.y0 + (ny - 1) as f64 * self.dy),
        )
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<SpeedSample> {
        let (nx, ny) = self.c.dim();
        let (i, fx) = locate(x, self.x0, self.dx, nx).ok_or(Error::OutOfDomain { x, y })?;
        let (k, fy) = locate(y, self.y0, self.dy, ny).ok_or(Error::OutOfDomain { x, y })?;
        let bilinear = |a: &Array2<f64>| {
            (1.0 - fx) * ((1.0 - fy) * a[[i, k]] + fy * a[[i, k + 1]])
                + fx * ((1.0 - fy) * a[[i + 1, k]] + fy * a[[i + 1, k + 1]])
        };
        Ok(SpeedSample {
            c: bilinear(&self.c),
            c_y: bilinear(&self.c_y),
            c_yy: bilinear(&self.c_yy),
        })
    }
}

/// Cell index and fractional offset of `x` on a lattice of `n` points;
/// `None` outside the lattice (a relative slack of 1e-9 cells is allowed).
fn locate(x: f64, x0: f64, dx: f64, n: usize) -> Option<(usize, f64)> {
    let s = (x - x0) / dx;
    let last = (n - 1) as f64;
    if !(s >= -1e-9 && s <= last + 1e-9) {
        return None;
    }
    let s = s.clamp(0.0, last);
    let i = (s.floor() as usize).min(n - 2);
    Some((i, s - i as f64))
}

fn first_derivative(f: &[f64], k: usize, d: f64) -> f64 {
    let n = f.len();
    if k == 0 {
        (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * d)
    } else if k == n - 1 {
        (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * d)
    } else {
        (f[k + 1] - f[k - 1]) / (2.0 * d)
    }
}

fn second_derivative(f: &[f64], k: usize, d: f64) -> f64 {
    let n = f.len();
    let d2 = d * d;
    if k == 0 {
        (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / d2
    } else if k == n - 1 {
        (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / d2
    } else {
        (f[k + 1] - 2.0 * f[k] + f[k - 1]) / d2
    }
}
