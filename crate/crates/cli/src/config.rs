//! Run configuration: JSON schema with unknown-key rejection, dotted-path
//! `--set` overrides, and the resolved-config echo.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use ssh2d_core::circuit::PhaseConvention;
use ssh2d_core::model::Boundary;
use ssh2d_core::topology::{CurvatureMethod, TransportMode, ZakMode};
use ssh2d_core::{CircuitParams, ModelParams};
use std::path::Path;

fn default_a() -> f64 {
    1.0
}

/// Lattice-model parameter block.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub u: f64,
    pub t1: f64,
    pub v: f64,
    pub t2: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    /// Uniform gain strength (γ, −γ, −γ, γ); zero for the Hermitian model.
    #[serde(default)]
    pub gamma: f64,
    /// When present, use the two-gain pattern (γ, −γ, γ₂, −γ₂) instead.
    #[serde(default)]
    pub gamma2: Option<f64>,
}

impl ModelBlock {
    pub fn params(&self) -> ModelParams {
        let mut p = match self.gamma2 {
            Some(g2) => {
                ssh2d_core::model::ModelParams::two_gain(
                    self.u, self.t1, self.v, self.t2, self.mu, self.gamma, g2,
                )
            }
            None => ssh2d_core::model::ModelParams::uniform(
                self.u, self.t1, self.v, self.t2, self.mu, self.gamma,
            ),
        };
        p.a = self.a;
        p
    }
}

/// Constant-`ak_y` line scan block.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct LineBlock {
    #[serde(default)]
    pub aky: f64,
    pub samples: usize,
    /// `ak_x` range; defaults to the full zone [−π, π].
    #[serde(default)]
    pub akx_range: Option<[f64; 2]>,
}

/// Square momentum-grid block.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: usize,
    /// Bands to evaluate (berry); defaults to all four.
    #[serde(default)]
    pub bands: Option<Vec<usize>>,
    /// Curvature method: "kubo" (default), "finite-difference", "closed-form".
    #[serde(default)]
    pub method: Option<String>,
}

impl GridBlock {
    pub fn curvature_method(&self) -> Result<CurvatureMethod> {
        match self.method.as_deref() {
            None | Some("kubo") => Ok(CurvatureMethod::Kubo),
            Some("finite-difference") => Ok(CurvatureMethod::FiniteDifference),
            Some("closed-form") => Ok(CurvatureMethod::ClosedFormDerivatives),
            Some(other) => bail!("unknown curvature method `{other}`"),
        }
    }
}

/// Hopping-ratio sweep block (Wilson-loop staircase).
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// u/v ratio range.
    pub range: [f64; 2],
    pub samples: usize,
    /// Wilson-loop segments per ratio.
    #[serde(default = "default_segments")]
    pub segments: usize,
}

fn default_segments() -> usize {
    256
}

/// Chemical-potential sweep for the transport commands.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct TransportBlock {
    pub mu_range: [f64; 2],
    pub samples: usize,
    /// Grid points per side for the zone integral.
    pub grid: usize,
    #[serde(default)]
    pub temperature: Option<f64>,
    /// "low-t" (default) or "finite-t" weighting for the Nernst command.
    #[serde(default)]
    pub mode: Option<String>,
}

impl TransportBlock {
    pub fn transport_mode(&self) -> Result<TransportMode> {
        match self.mode.as_deref() {
            None | Some("low-t") => Ok(TransportMode::NernstLowT),
            Some("finite-t") => Ok(TransportMode::NernstFiniteT),
            Some(other) => bail!("unknown transport mode `{other}`"),
        }
    }
}

/// Two-point admittance request.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct AdmittanceBlock {
    pub beta: usize,
    pub beta_prime: usize,
    #[serde(default)]
    pub offset: [i64; 2],
    pub n: usize,
}

/// Circuit experiment block (SI units).
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct CircuitBlock {
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    pub r_values: Vec<f64>,
    pub omega_range: [f64; 2],
    pub samples: usize,
    #[serde(default)]
    pub kx: f64,
    #[serde(default)]
    pub ky: f64,
    #[serde(default)]
    pub inductor_loss: Option<f64>,
    #[serde(default)]
    pub admittance: Option<AdmittanceBlock>,
    /// Drive frequency used for the admittance evaluation; defaults to the
    /// middle of `omega_range`.
    #[serde(default)]
    pub omega: Option<f64>,
}

impl CircuitBlock {
    pub fn params(&self) -> CircuitParams {
        let omega = self
            .omega
            .unwrap_or_else(|| 0.5 * (self.omega_range[0] + self.omega_range[1]));
        let r = self.r_values.first().copied().unwrap_or(1.0);
        let mut c = ssh2d_core::circuit::CircuitParams::new(self.l1, self.l2, self.c, r, omega);
        c.inductor_loss = self.inductor_loss;
        c
    }
}

/// Finite-lattice block.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct LatticeBlock {
    pub nx: usize,
    pub ny: usize,
    /// "pbc" (default) or "obc".
    #[serde(default)]
    pub boundary: Option<String>,
}

impl LatticeBlock {
    pub fn boundary_condition(&self) -> Result<Boundary> {
        match self.boundary.as_deref() {
            None | Some("pbc") => Ok(Boundary::Pbc),
            Some("obc") => Ok(Boundary::Obc),
            Some(other) => bail!("unknown boundary `{other}`"),
        }
    }
}

/// Convention switches.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConventionsBlock {
    /// Wilson-loop mode: "determinant" (default) or "band-sum".
    #[serde(default)]
    pub wilson_mode: Option<String>,
    /// Circuit phase orientation: "as-printed" (default) or "transposed".
    #[serde(default)]
    pub circuit_convention: Option<String>,
    /// Self-orthogonality pairing reported as primary: "band-unconjugated"
    /// (default) or "component-unconjugated".
    #[serde(default)]
    pub self_orthogonality: Option<String>,
}

impl ConventionsBlock {
    pub fn wilson(&self) -> Result<ZakMode> {
        match self.wilson_mode.as_deref() {
            None | Some("determinant") => Ok(ZakMode::Determinant),
            Some("band-sum") => Ok(ZakMode::BandSum),
            Some(other) => bail!("unknown wilson mode `{other}`"),
        }
    }

    pub fn circuit(&self) -> Result<PhaseConvention> {
        match self.circuit_convention.as_deref() {
            None | Some("as-printed") => Ok(PhaseConvention::AsPrinted),
            Some("transposed") => Ok(PhaseConvention::Transposed),
            Some(other) => bail!("unknown circuit convention `{other}`"),
        }
    }

    pub fn component_pairing(&self) -> Result<bool> {
        match self.self_orthogonality.as_deref() {
            None | Some("band-unconjugated") => Ok(false),
            Some("component-unconjugated") => Ok(true),
            Some(other) => bail!("unknown self-orthogonality pairing `{other}`"),
        }
    }
}

/// Tolerance overrides for the exceptional-point classifier.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct TolerancesBlock {
    /// Relative eigenvalue-gap tolerance.
    #[serde(default)]
    pub ep_gap: Option<f64>,
    /// Eigenvector-overlap tolerance.
    #[serde(default)]
    pub ep_overlap: Option<f64>,
}

/// The complete run configuration.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the invoked subcommand.
    pub command: String,
    #[serde(default)]
    pub model: Option<ModelBlock>,
    #[serde(default)]
    pub line: Option<LineBlock>,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub transport: Option<TransportBlock>,
    #[serde(default)]
    pub circuit: Option<CircuitBlock>,
    #[serde(default)]
    pub lattice: Option<LatticeBlock>,
    #[serde(default)]
    pub conventions: Option<ConventionsBlock>,
    #[serde(default)]
    pub tolerances: Option<TolerancesBlock>,
    /// Subset of discrepancy checks for `validate`; defaults to all.
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

impl RunConfig {
    pub fn model(&self) -> Result<ModelParams> {
        let block = self.model.as_ref().ok_or_else(|| anyhow!("a `model` block is required"))?;
        let p = block.params();
        p.validate().map_err(|e| anyhow!("invalid model parameters: {e}"))?;
        Ok(p)
    }

    pub fn conventions(&self) -> ConventionsBlock {
        self.conventions.clone().unwrap_or_default()
    }
}

/// Parse a value for `--set`: JSON first, bare string as fallback.
fn parse_set_value(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()))
}

/// Apply one `key.path=value` override onto the raw JSON tree, creating
/// intermediate objects as needed.
fn apply_set(tree: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects key=value, got `{assignment}`"))?;
    let mut node = tree;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("--set path `{path}` descends into a non-object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parse_set_value(raw));
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!()
}

/// Load a config file, apply overrides, and produce the typed config plus
/// its resolved JSON text (used for the echo file and the hash).
pub fn load(path: &Path, sets: &[String]) -> Result<(RunConfig, String)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut tree: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("bad JSON in {}", path.display()))?;
    for assignment in sets {
        apply_set(&mut tree, assignment)?;
    }
    let config: RunConfig = serde_json::from_value(tree)
        .with_context(|| format!("invalid config {}", path.display()))?;
    let resolved = serde_json::to_string_pretty(&config).expect("config serializes");
    Ok((config, resolved))
}

/// FNV-1a 64-bit hash of the resolved config text — the provenance hash
/// stamped into every CSV header.
pub fn config_hash(resolved: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in resolved.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
