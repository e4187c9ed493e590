//! Experiment configuration, read from TOML and overridable field by field.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{load_polygon, make_square, make_test_polygon, make_triangle, PolygonModel, Vec2};
use crate::hna_space::SpaceParams;
use crate::operators::{OperatorConfig, OperatorKind};
use crate::quadrature::QuadConfig;
use crate::{HnaError, Result};

/// Wavenumbers above this need `allow_expensive`.
pub const MAX_DESK_K: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `test-quad`, `square` or `triangle`; ignored when `polygon_file` is set.
    pub builtin: String,
    pub polygon_file: Option<PathBuf>,
    /// Incidence angles, e.g. `"5pi/4"`, `"1.25pi"` or `"3.9"` (radians).
    pub alphas: Vec<String>,
    pub ks: Vec<f64>,
    pub ps: Vec<usize>,
    pub sigma: f64,
    /// `n = n_factor (p + 1)`.
    pub n_factor: usize,
    /// Constant in the requirement `n >= c p`.
    pub c: f64,
    /// `combined` or `star`.
    pub operator: String,
    pub eta: Option<f64>,
    pub star_center: Option<[f64; 2]>,
    pub out: PathBuf,
    pub boundary_points: usize,
    pub circle_points: usize,
    pub farfield_points: usize,
    pub ppw: Option<f64>,
    pub quad_order: Option<usize>,
    pub quad_layers: Option<usize>,
    pub reference_p: usize,
    pub allow_expensive: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            builtin: "test-quad".into(),
            polygon_file: None,
            alphas: vec!["5pi/4".into(), "5pi/3".into()],
            ks: vec![5.0, 10.0, 20.0],
            ps: vec![4],
            sigma: 0.15,
            n_factor: 2,
            c: 2.0,
            operator: "combined".into(),
            eta: None,
            star_center: None,
            out: PathBuf::from("out"),
            boundary_points: 100_000,
            circle_points: 30_000,
            farfield_points: 30_000,
            ppw: None,
            quad_order: None,
            quad_layers: None,
            reference_p: 7,
            allow_expensive: false,
            seed: 0,
        }
    }
}

/// Parses `pi`, `5pi/4`, `5*pi/4`, `-pi/2`, `1.25pi` or a plain number of radians.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || HnaError::Parse(format!("cannot read angle '{text}'"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if t.is_empty() {
        return Err(bad());
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HnaError::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Writes the effective configuration to `out/config.toml`.
    pub fn echo(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        let path = self.out.join("config.toml");
        std::fs::write(&path, self.to_toml())?;
        Ok(path)
    }

    pub fn alpha_values(&self) -> Result<Vec<f64>> {
        self.alphas.iter().map(|a| parse_angle(a)).collect()
    }

    pub fn polygon(&self) -> Result<PolygonModel> {
        match &self.polygon_file {
            Some(path) => load_polygon(path),
            None => builtin_polygon(&self.builtin),
        }
    }

    pub fn space_params(&self, p: usize) -> SpaceParams {
        SpaceParams {
            p,
            n: self.n_factor * (p + 1),
            sigma: self.sigma,
            c: self.c,
        }
    }

    pub fn quad(&self, p: usize) -> QuadConfig {
        let mut q = QuadConfig::for_degree(p);
        if let Some(v) = self.ppw {
            q.ppw = v;
        }
        if let Some(v) = self.quad_order {
            q.order = v;
        }
        if let Some(v) = self.quad_layers {
            q.layers = v;
        }
        q
    }

    pub fn operator_config(&self, poly: &PolygonModel) -> Result<OperatorConfig> {
        let kind = parse_operator(&self.operator)?;
        let center = match self.star_center {
            Some([x, y]) => Vec2::new(x, y),
            None => poly.star_center.unwrap_or_else(|| poly.vertex_centroid()),
        };
        Ok(OperatorConfig {
            kind,
            eta: self.eta,
            star_center: center,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.ks.is_empty() || self.ps.is_empty() {
            return Err(HnaError::Config("alphas, ks and ps must be non-empty".into()));
        }
        self.alpha_values()?;
        parse_operator(&self.operator)?;
        for &k in &self.ks {
            if !(k > 0.0) || !k.is_finite() {
                return Err(HnaError::Config(format!("wavenumber must be positive, got {k}")));
            }
            if k > MAX_DESK_K && !self.allow_expensive {
                return Err(HnaError::CostGuard(format!(
                    "k = {k} exceeds {MAX_DESK_K}; pass --allow-expensive to run it"
                )));
            }
        }
        if self.n_factor == 0 {
            return Err(HnaError::Config("n_factor must be positive".into()));
        }
        for &p in self.ps.iter().chain(std::iter::once(&self.reference_p)) {
            self.space_params(p).validate()?;
            self.quad(p).validate()?;
        }
        if self.boundary_points == 0 || self.circle_points == 0 || self.farfield_points == 0 {
            return Err(HnaError::Config("grid sizes must be positive".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return Err(HnaError::Config(format!("eta must be positive, got {eta}")));
            }
        }
        Ok(())
    }
}

pub fn parse_operator(name: &str) -> Result<OperatorKind> {
    match name {
        "combined" | "standard" => Ok(OperatorKind::StandardCombined),
        "star" => Ok(OperatorKind::StarCombined),
        other => Err(HnaError::Config(format!("unknown operator '{other}' (expected combined or star)"))),
    }
}

pub fn builtin_polygon(name: &str) -> Result<PolygonModel> {
    match name {
        "test-quad" => Ok(make_test_polygon()),
        "square" => Ok(make_square()),
        "triangle" => Ok(make_triangle()),
        other => Err(HnaError::Config(format!(
            "unknown builtin polygon '{other}' (expected test-quad, square or triangle)"
        ))),
    }
}
