//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments run to the end of the line
//! experiment = exp2-higdon2
//! boundary.kind = higdon
//! boundary.order = 3
//! grid.h = 0.05
//! ```
//!
//! Every key is optional except `experiment`; unset keys keep the catalogue
//! entry's values. Higdon speeds left unset are the depth average of the
//! medium at the boundary.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::abc::{BoundaryKind, FluxForm};
use crate::error::{Error, Result};
use crate::harness::{find_experiment, ExperimentSpec, SourceMode};
use crate::medium::SoundSpeedModel;
use crate::source::Waveform;

pub const KEYS: &[&str] = &[
    "experiment",
    "boundary.kind",
    "boundary.order",
    "boundary.speeds",
    "boundary.flux",
    "grid.h",
    "grid.cfl_number",
    "grid.t_final",
    "grid.extension",
    "medium.table",
    "source.mode",
    "source.waveform",
    "source.x",
    "source.y",
    "source.duration",
    "output.dir",
    "output.stride",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindChoice {
    HardWall,
    Tappert,
    Higdon,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub boundary_kind: Option<KindChoice>,
    pub order: Option<usize>,
    pub speeds: Option<Vec<f64>>,
    pub flux: Option<FluxForm>,
    pub h: Option<f64>,
    pub cfl_number: Option<f64>,
    pub t_final: Option<f64>,
    pub extension: Option<f64>,
    pub medium_table: Option<PathBuf>,
    pub source_mode: Option<SourceMode>,
    pub waveform: Option<Waveform>,
    pub source_x: Option<f64>,
    pub source_y: Option<f64>,
    pub source_duration: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub stride: Option<usize>,
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::key(key, format!("cannot parse {value:?}: {e}")))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::key(key, format!("must be positive, got {value}")));
    }
    Ok(v)
}

fn non_negative(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::key(key, format!("must be non-negative, got {value}")));
    }
    Ok(v)
}

fn choice<T>(key: &str, value: &str, parsed: Option<T>, allowed: &str) -> Result<T> {
    parsed.ok_or_else(|| Error::key(key, format!("expected one of {allowed}, got {value:?}")))
}

impl RunConfig {
    /// Parses configuration text. Duplicate keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Configuration(format!("line {}: expected `key = value`, got {raw:?}", n + 1))
            })?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::key(key, "set more than once"));
            }
            cfg.set(key, value.trim())?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override on top of the parsed file.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            Error::Configuration(format!("override {assignment:?} is not `key=value`"))
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if value.is_empty() {
            return Err(Error::key(key, "empty value"));
        }
        match key {
            "experiment" => self.experiment = Some(value.to_string()),
            "boundary.kind" => {
                let parsed = match value {
                    "hardwall" => Some(KindChoice::HardWall),
                    "tappert" => Some(KindChoice::Tappert),
                    "higdon" => Some(KindChoice::Higdon),
                    _ => None,
                };
                self.boundary_kind = Some(choice(key, value, parsed, "hardwall, tappert, higdon")?);
            }
            "boundary.order" => {
                let j: usize = number(key, value)?;
                if j == 0 {
                    return Err(Error::key(key, "Higdon order must be at least 1"));
                }
                self.order = Some(j);
            }
            "boundary.speeds" => {
                let speeds = value
                    .split(',')
                    .map(|s| positive(key, s.trim()))
                    .collect::<Result<Vec<_>>>()?;
                self.speeds = Some(speeds);
            }
            "boundary.flux" => {
                let parsed = match value {
                    "conservative" => Some(FluxForm::Conservative),
                    "literal" => Some(FluxForm::Literal),
                    _ => None,
                };
                self.flux = Some(choice(key, value, parsed, "conservative, literal")?);
            }
            "grid.h" => self.h = Some(positive(key, value)?),
            "grid.cfl_number" => {
                let v = positive(key, value)?;
                if v > 1.0 {
                    return Err(Error::key(key, format!("must not exceed 1, got {value}")));
                }
                self.cfl_number = Some(v);
            }
            "grid.t_final" => self.t_final = Some(non_negative(key, value)?),
            "grid.extension" => self.extension = Some(non_negative(key, value)?),
            "medium.table" => self.medium_table = Some(PathBuf::from(value)),
            "source.mode" => {
                self.source_mode = Some(choice(
                    key,
                    value,
                    SourceMode::parse(value),
                    "prephase, inject, plane",
                )?)
            }
            "source.waveform" => {
                self.waveform = Some(choice(key, value, Waveform::parse(value), "sin2, zero-mean")?)
            }
            "source.x" => self.source_x = Some(non_negative(key, value)?),
            "source.y" => self.source_y = Some(non_negative(key, value)?),
            "source.duration" => self.source_duration = Some(positive(key, value)?),
            "output.dir" => self.out_dir = Some(PathBuf::from(value)),
            "output.stride" => {
                let s: usize = number(key, value)?;
                if s == 0 {
                    return Err(Error::key(key, "must be at least 1"));
                }
                self.stride = Some(s);
            }
            other => {
                return Err(Error::key(
                    other,
                    format!("unknown key; known keys are {}", KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Catalogue entry with every set key applied.
    pub fn resolve(&self) -> Result<ExperimentSpec> {
        let name = self
            .experiment
            .as_deref()
            .ok_or_else(|| Error::key("experiment", "required"))?;
        let mut spec = find_experiment(name).map_err(|e| Error::key("experiment", e.to_string()))?;
        if let Some(path) = &self.medium_table {
            spec.medium = SoundSpeedModel::load_table(path)
                .map_err(|e| Error::key("medium.table", e.to_string()))?;
        }
        if let Some(h) = self.h {
            spec.h = h;
        }
        if let Some(v) = self.cfl_number {
            spec.cfl_number = v;
        }
        if let Some(v) = self.t_final {
            spec.t_final = v;
        }
        if let Some(v) = self.extension {
            spec.extension = Some(v);
        }
        if let Some(v) = self.stride {
            spec.stride = v;
        }
        if let Some(v) = self.source_mode {
            spec.source_mode = v;
        }
        if let Some(v) = self.waveform {
            spec.source.waveform = v;
        }
        if let Some(v) = self.source_x {
            spec.source.x = v;
        }
        if let Some(v) = self.source_y {
            spec.source.y = v;
        }
        if let Some(v) = self.source_duration {
            spec.source.duration = v;
        }
        spec.boundary = self.resolve_boundary(&spec)?;
        spec.validate()?;
        Ok(spec)
    }

    fn resolve_boundary(&self, spec: &ExperimentSpec) -> Result<BoundaryKind> {
        let kind = self.boundary_kind.unwrap_or(match spec.boundary {
            BoundaryKind::HardWall => KindChoice::HardWall,
            BoundaryKind::Tappert { .. } => KindChoice::Tappert,
            BoundaryKind::Higdon { .. } => KindChoice::Higdon,
        });
        let misplaced = |key: &str, what: &str| {
            Err(Error::key(key, format!("only applies to {what} boundaries")))
        };
        if kind != KindChoice::Tappert && self.flux.is_some() {
            return misplaced("boundary.flux", "tappert");
        }
        if kind != KindChoice::Higdon {
            if self.order.is_some() {
                return misplaced("boundary.order", "higdon");
            }
            if self.speeds.is_some() {
                return misplaced("boundary.speeds", "higdon");
            }
        }
        Ok(match kind {
            KindChoice::HardWall => BoundaryKind::HardWall,
            KindChoice::Tappert => BoundaryKind::Tappert {
                flux: self.flux.unwrap_or(match spec.boundary {
                    BoundaryKind::Tappert { flux } => flux,
                    _ => FluxForm::Conservative,
                }),
            },
            KindChoice::Higdon => {
                let inherited = match &spec.boundary {
                    BoundaryKind::Higdon { speeds } => Some(speeds.len()),
                    _ => None,
                };
                match (&self.speeds, self.order) {
                    (Some(speeds), Some(j)) if speeds.len() != j => {
                        return Err(Error::key(
                            "boundary.speeds",
                            format!("{} speeds given for order {j}", speeds.len()),
                        ))
                    }
                    (Some(speeds), _) => BoundaryKind::Higdon {
                        speeds: speeds.clone(),
                    },
                    (None, order) => {
                        let j = order.or(inherited).ok_or_else(|| {
                            Error::key("boundary.order", "required when boundary.kind = higdon")
                        })?;
                        let c_bar = spec
                            .medium
                            .depth_average_with_step(0.0, spec.ly, spec.h / 10.0)?;
                        BoundaryKind::higdon(j, c_bar)
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: Error) -> String {
        match err {
            Error::ConfigKey { key, .. } => key,
            other => panic!("expected a key error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_takes_catalogue_defaults() {
        let spec = RunConfig::parse("experiment = exp1-tappert\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(spec.h, 0.1);
        assert_eq!(spec.cfl_number, 0.9);
        assert_eq!(spec.t_final, 20.0);
        assert_eq!(spec.stride, 10);
        assert_eq!(spec.boundary, BoundaryKind::tappert());
    }

    #[test]
    fn higdon_speeds_default_to_depth_average() {
        let text = "experiment = exp2-tappert\nboundary.kind = higdon\nboundary.order = 2\n";
        let spec = RunConfig::parse(text).unwrap().resolve().unwrap();
        let c_bar = spec.medium.depth_average(0.0, 10.0).unwrap();
        match spec.boundary {
            BoundaryKind::Higdon { speeds } => {
                assert_eq!(speeds.len(), 2);
                assert!((speeds[0] - c_bar).abs() < 1e-6);
                assert_eq!(speeds[0], speeds[1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_speeds_and_inherited_order() {
        let spec = RunConfig::parse("experiment = exp1-higdon3\nboundary.speeds = 0.5, 1, 2\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(
            spec.boundary,
            BoundaryKind::Higdon {
                speeds: vec![0.5, 1.0, 2.0]
            }
        );
        let spec = RunConfig::parse("experiment = exp1-higdon3\ngrid.h = 0.05")
            .unwrap()
            .resolve()
            .unwrap();
        assert!(matches!(spec.boundary, BoundaryKind::Higdon { ref speeds } if speeds.len() == 3));
    }

    #[test]
    fn errors_name_the_key() {
        let bad = |text: &str| key_of(RunConfig::parse(text).and_then(|c| c.resolve()).unwrap_err());
        assert_eq!(bad("experiment = exp1-tappert\ngrid.h = -0.1"), "grid.h");
        assert_eq!(bad("experiment = exp1-tappert\ngrid.hh = 0.1"), "grid.hh");
        assert_eq!(bad("grid.h = 0.1"), "experiment");
        assert_eq!(bad("experiment = nope"), "experiment");
        assert_eq!(bad("experiment = exp1-tappert\noutput.stride = ten"), "output.stride");
        assert_eq!(bad("experiment = exp1-tappert\nboundary.kind = higdon"), "boundary.order");
        assert_eq!(bad("experiment = exp1-tappert\nboundary.order = 2"), "boundary.order");
        assert_eq!(bad("experiment = exp1-higdon2\nboundary.flux = literal"), "boundary.flux");
        assert_eq!(
            bad("experiment = exp1-higdon2\nboundary.order = 3\nboundary.speeds = 1,2"),
            "boundary.speeds"
        );
        assert_eq!(bad("experiment = a\nexperiment = b"), "experiment");
        assert_eq!(bad("experiment = exp1-tappert\ngrid.cfl_number = 1.5"), "grid.cfl_number");
    }

    #[test]
    fn comments_blank_lines_and_overrides() {
        let text = "# header\n\nexperiment = exp2-tappert  # trailing\nsource.mode = inject\n";
        let mut cfg = RunConfig::parse(text).unwrap();
        cfg.apply_override("grid.t_final=3.5").unwrap();
        cfg.apply_override("boundary.flux = literal").unwrap();
        cfg.apply_override("source.waveform=zero-mean").unwrap();
        let spec = cfg.resolve().unwrap();
        assert_eq!(spec.t_final, 3.5);
        assert_eq!(spec.source_mode, SourceMode::Inject);
        assert_eq!(spec.source.waveform, Waveform::ZeroMean);
        assert_eq!(
            spec.boundary,
            BoundaryKind::Tappert {
                flux: FluxForm::Literal
            }
        );
        assert!(cfg.apply_override("no-equals-sign").is_err());
        assert!(RunConfig::parse("just words").is_err());
    }

    #[test]
    fn load_reports_missing_file() {
        let err = RunConfig::load("/nonexistent/run.cfg").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
