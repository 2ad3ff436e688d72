//! Run configuration: a JSON file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shiftlab_core::expr::Expr;
use shiftlab_core::shiftlike::{Dynamics, IdentityMap};
use shiftlab_core::wandering::{Sign, WanderingMap};
use shiftlab_core::{ShiftLikeMap, C64};

use crate::error::CliError;

/// A complex number written either as `[re, im]` or as a bare real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexValue {
    pub fn to_c64(self) -> C64 {
        match self {
            ComplexValue::Pair([re, im]) => C64::new(re, im),
            ComplexValue::Real(re) => C64::new(re, 0.0),
        }
    }
}

/// `{"N":3,"nu":1,"a":[re,im],"f":"<expression>"}` or a preset such as
/// `{"preset":"wandering","a":0.25}` and `{"preset":"identity","N":2}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Sign of the constant term for the wandering preset: "+" or "-"; resolved when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<String>,
}

impl MapSpec {
    pub fn explicit(dim: usize, nu: usize, a: C64, f: &str) -> Self {
        MapSpec {
            dim: Some(dim),
            nu: Some(nu),
            a: Some(ComplexValue::Pair([a.re, a.im])),
            f: Some(f.to_string()),
            ..MapSpec::default()
        }
    }

    /// `f = 4z²`, `a = 0.5` on C².
    pub fn horseshoe() -> Self {
        MapSpec::explicit(2, 1, C64::new(0.5, 0.0), "mul(c(4), pow(var, 2))")
    }

    pub fn wandering(a: f64) -> Self {
        MapSpec { preset: Some("wandering".into()), a: Some(ComplexValue::Real(a)), ..MapSpec::default() }
    }

    pub fn resolve(&self) -> Result<Model, CliError> {
        let bad = |field: &str, message: String| CliError::Config { path: format!("map.{field}"), message };
        match self.preset.as_deref() {
            Some("wandering") => {
                let a = self.a.map(ComplexValue::to_c64).unwrap_or(C64::new(0.25, 0.0));
                if a.im != 0.0 {
                    return Err(bad("a", "the wandering example needs a real a".into()));
                }
                let sign = match self.sign.as_deref() {
                    None => None,
                    Some("+") => Some(Sign::Plus),
                    Some("-") => Some(Sign::Minus),
                    Some(other) => return Err(bad("sign", format!("expected \"+\" or \"-\", found {other:?}"))),
                };
                let m = WanderingMap::build(a.re, sign).map_err(|e| bad("a", e.to_string()))?;
                Ok(Model::Wandering(Box::new(m)))
            }
            Some("identity") => {
                let dim = self.dim.unwrap_or(2);
                let nu = self.nu.unwrap_or(1);
                if dim < 2 || nu == 0 || nu >= dim {
                    return Err(bad("N", "identity preset needs N >= 2 and 1 <= nu < N".into()));
                }
                Ok(Model::Identity { map: IdentityMap { dim }, nu })
            }
            Some(other) => Err(bad("preset", format!("unknown preset {other:?} (expected \"wandering\" or \"identity\")"))),
            None => {
                let dim = self.dim.ok_or_else(|| bad("N", "missing field".into()))?;
                let nu = self.nu.ok_or_else(|| bad("nu", "missing field".into()))?;
                let a = self.a.ok_or_else(|| bad("a", "missing field".into()))?.to_c64();
                let src = self.f.as_deref().ok_or_else(|| bad("f", "missing field".into()))?;
                let f = Expr::parse(src).map_err(|e| bad("f", e.to_string()))?;
                let map = ShiftLikeMap::new(dim, nu, a, f).map_err(|e| bad("N", e.to_string()))?;
                Ok(Model::Shift(map))
            }
        }
    }
}

/// A resolved map.
#[derive(Clone, Debug)]
pub enum Model {
    Shift(ShiftLikeMap),
    Identity { map: IdentityMap, nu: usize },
    Wandering(Box<WanderingMap>),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Shift(m) => m.dim(),
            Model::Identity { map, .. } => map.dim,
            Model::Wandering(_) => 3,
        }
    }

    pub fn nu(&self) -> usize {
        match self {
            Model::Shift(m) => m.nu(),
            Model::Identity { nu, .. } => *nu,
            Model::Wandering(_) => 1,
        }
    }

    pub fn dynamics(&self) -> &dyn Dynamics {
        match self {
            Model::Shift(m) => m,
            Model::Identity { map, .. } => map,
            Model::Wandering(w) => w.shift_like(),
        }
    }

    pub fn shift_like(&self) -> Option<&ShiftLikeMap> {
        match self {
            Model::Shift(m) => Some(m),
            Model::Wandering(w) => Some(w.shift_like()),
            Model::Identity { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitConfig {
    pub start: Option<Vec<ComplexValue>>,
    pub steps: usize,
    pub escape_radius: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig { start: None, steps: 10, escape_radius: 1e6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub r: f64,
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    /// Lattice points per real direction of the sampled coordinate plane.
    pub grid: usize,
    /// Zero-based coordinate varied by the grid; defaults to the last one.
    pub axis: Option<usize>,
    /// Values of the other coordinates; zeros by default.
    pub base: Option<Vec<ComplexValue>>,
    /// Keep only grid points that survive the largest `n`.
    pub surviving: bool,
    /// "min" or "sum".
    pub metric: String,
    /// Parameter-disk resolution for the area growth estimate; 0 disables it.
    pub volume_res: usize,
    /// Fail the run when the best lower estimate is below this value.
    pub min_h_lower: Option<f64>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            r: 1.0,
            n: vec![8],
            epsilon: vec![0.05],
            grid: 200,
            axis: None,
            base: None,
            surviving: true,
            metric: "min".into(),
            volume_res: 0,
            min_h_lower: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub m: i64,
    pub n_min: u32,
    pub n_max: u32,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { r: 0.5, big_r: 10.0, m: 2, n_min: 1, n_max: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub r: f64,
    pub probe: Option<ProbeConfig>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { r: 1.0, probe: Some(ProbeConfig::default()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JTableConfig {
    pub centers: Vec<ComplexValue>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Use `f_n(z) = f(nz)/n` in place of `f`.
    pub rescale: u32,
    pub density: usize,
    pub require_k_minus_2: bool,
}

impl Default for JTableConfig {
    fn default() -> Self {
        JTableConfig {
            centers: vec![
                ComplexValue::Pair([0.0, 0.0]),
                ComplexValue::Pair([3.0, 0.0]),
                ComplexValue::Pair([0.0, 3.0]),
            ],
            r: 0.5,
            big_r: 1.0,
            rescale: 1,
            density: shiftlab_core::winding::DEFAULT_GRID,
            require_k_minus_2: false,
        }
    }
}

/// Where the transition sets come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableSource {
    /// "full", "uniform" (|J| = k − 2) or a path to a `jtable.json` written by this tool.
    Named(String),
    /// `sets[i][l]` lists J(i,l), zero-based.
    Explicit { sets: Vec<Vec<Vec<usize>>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WordsConfig {
    pub table: TableSource,
    pub k: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    pub nu: usize,
    pub m_max: usize,
    /// Cross-check counts against exhaustive enumeration when `k^m ≤ 10⁶`.
    pub brute_force: bool,
}

impl Default for WordsConfig {
    fn default() -> Self {
        WordsConfig { table: TableSource::Named("uniform".into()), k: 10, dim: 3, nu: 1, m_max: 12, brute_force: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WanderingConfig {
    pub samples: usize,
    pub tol: f64,
    pub fixed_points: Vec<i64>,
    pub sweep: Vec<f64>,
    pub perturbations: usize,
    pub perturbation_radius: f64,
    pub steps: usize,
    /// Also render the default basin slice.
    pub render: bool,
}

impl Default for WanderingConfig {
    fn default() -> Self {
        WanderingConfig {
            samples: 10_000,
            tol: 1e-10,
            fixed_points: (-3..=3).collect(),
            sweep: (1..20).map(|i| i as f64 * 0.05).collect(),
            perturbations: 100,
            perturbation_radius: 0.05,
            steps: 200,
            render: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceConfig {
    pub origin: [ComplexValue; 3],
    pub u: [ComplexValue; 3],
    pub v: [ComplexValue; 3],
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
}

impl Default for SliceConfig {
    fn default() -> Self {
        let r = ComplexValue::Real;
        SliceConfig {
            origin: [r(0.0), r(0.0), r(0.0)],
            u: [r(1.0), r(0.5), r(0.0)],
            v: [r(0.0), r(0.5), r(1.0)],
            x_range: [-4.0, 4.0],
            y_range: [-4.0, 4.0],
        }
    }
}

impl SliceConfig {
    pub fn to_spec(&self) -> shiftlab_core::wandering::SliceSpec {
        let conv = |p: &[ComplexValue; 3]| p.map(ComplexValue::to_c64);
        shiftlab_core::wandering::SliceSpec {
            origin: conv(&self.origin),
            u: conv(&self.u),
            v: conv(&self.v),
            x_range: (self.x_range[0], self.x_range[1]),
            y_range: (self.y_range[0], self.y_range[1]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub slice: SliceConfig,
    pub max_iter: usize,
    pub conv_tol: f64,
    pub escape_radius: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        let p = shiftlab_core::wandering::ClassifyParams::default();
        RenderConfig {
            width: 256,
            height: 256,
            slice: SliceConfig::default(),
            max_iter: p.max_iter,
            conv_tol: p.conv_tol,
            escape_radius: p.escape_radius,
        }
    }
}

impl RenderConfig {
    pub fn params(&self) -> shiftlab_core::wandering::ClassifyParams {
        shiftlab_core::wandering::ClassifyParams {
            max_iter: self.max_iter,
            conv_tol: self.conv_tol,
            escape_radius: self.escape_radius,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: Option<MapSpec>,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    pub orbit: OrbitConfig,
    pub entropy: EntropyConfig,
    pub certify: CertifyConfig,
    pub jtable: JTableConfig,
    pub words: WordsConfig,
    pub wandering: WanderingConfig,
    pub render: RenderConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config {
                path,
                message: format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }
}
