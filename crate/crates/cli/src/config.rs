//! Declarative run configuration: a sectioned key/value file (TOML),
//! canonicalized into JSON before hashing so reruns are addressable by
//! content.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use asq_core::dynamics::{BlowupThresholds, EvolutionConfig};
use asq_core::ineq::{random_band_limited, AmplitudeLaw};
use asq_core::{ManifoldKind, ManifoldSpec, NodalField, SpectralField};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldSection,
    pub initial: InitialProfile,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub blowup: BlowupSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSection {
    pub kind: ManifoldKind,
    pub resolution: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Constant {
        value: f64,
    },
    /// mean + amplitude·cos(mode·x) on 𝕋¹, separable cosines on 𝕋².
    Cosine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "default_mode")]
        mode: u32,
    },
    /// mean + amplitude·cos(colatitude) on 𝕊².
    Zonal {
        mean: f64,
        amplitude: f64,
    },
    /// mean + a mollified point mass of the given spectral width.
    Bump {
        mean: f64,
        amplitude: f64,
        width: f64,
    },
    /// mean + amplitude·(seeded band-limited noise).
    RandomBand {
        mean: f64,
        amplitude: f64,
        band: usize,
        seed: u64,
        #[serde(default = "default_decay")]
        decay: f64,
    },
}

fn default_mode() -> u32 {
    1
}

fn default_decay() -> f64 {
    1.0
}

impl InitialProfile {
    pub fn seed(&self) -> u64 {
        match self {
            InitialProfile::RandomBand { seed, .. } => *seed,
            _ => 0,
        }
    }

    pub fn materialize(&self, m: &ManifoldSpec) -> Result<NodalField> {
        match self {
            InitialProfile::Constant { value } => Ok(NodalField::constant(*m, *value)),
            InitialProfile::Cosine { mean, amplitude, mode } => {
                let k = *mode as f64;
                match m.kind {
                    ManifoldKind::Torus1D => {
                        Ok(NodalField::from_fn(*m, |x, _| mean + amplitude * (k * x).cos()))
                    }
                    ManifoldKind::Torus2D => Ok(NodalField::from_fn(*m, |x, y| {
                        mean + amplitude * (k * x).cos() * (k * y).cos()
                    })),
                    ManifoldKind::Sphere2D => Err(CliError::Config(
                        "the cosine profile is defined on tori; use zonal on the sphere".into(),
                    )),
                }
            }
            InitialProfile::Zonal { mean, amplitude } => match m.kind {
                ManifoldKind::Sphere2D => {
                    Ok(NodalField::from_fn(*m, |theta, _| mean + amplitude * theta.cos()))
                }
                _ => Err(CliError::Config("the zonal profile is defined on the sphere".into())),
            },
            InitialProfile::Bump { mean, amplitude, width } => {
                let mut f = SpectralField::zeros(*m);
                match m.kind {
                    ManifoldKind::Torus1D => {
                        for k in 0..=(m.band_limit() as i64) {
                            let a = amplitude * (-0.5 * (width * k as f64).powi(2)).exp();
                            f.set_torus_coeff(k, 0, num_complex_one() * a);
                        }
                    }
                    ManifoldKind::Torus2D => {
                        let b = m.band_limit() as i64;
                        for kx in 0..=b {
                            for ky in -b..=b {
                                if kx == 0 && ky < 0 {
                                    continue;
                                }
                                let lam = ((kx * kx + ky * ky) as f64).sqrt();
                                if lam as usize > m.band_limit() {
                                    continue;
                                }
                                let a = amplitude * (-0.5 * (width * lam).powi(2)).exp();
                                f.set_torus_coeff(kx, ky, num_complex_one() * a);
                            }
                        }
                    }
                    ManifoldKind::Sphere2D => {
                        for l in 0..=m.band_limit() {
                            let lam = ((l * (l + 1)) as f64).sqrt();
                            let a = amplitude
                                * ((2 * l + 1) as f64).sqrt()
                                * (-0.5 * (width * lam).powi(2)).exp();
                            f.set_sphere_coeff(l, 0, a);
                        }
                    }
                }
                let bump = f.synthesize();
                Ok(bump.map(|v| v + mean))
            }
            InitialProfile::RandomBand { mean, amplitude, band, seed, decay } => {
                if *band == 0 || *band > m.band_limit() {
                    return Err(CliError::Config(format!(
                        "random band must lie in 1..={}",
                        m.band_limit()
                    )));
                }
                let noise =
                    random_band_limited(m, *band, *seed, 0, AmplitudeLaw::PowerDecay(*decay));
                Ok(noise.synthesize().map(|v| mean + amplitude * v))
            }
        }
    }
}

fn num_complex_one() -> asq_core::Complex64 {
    asq_core::Complex64::new(1.0, 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub alpha: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// omitted → resolution default (π/band_limit)²
    pub eps_mollify: Option<f64>,
    pub dt_init: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_hs")]
    pub hs_norm_s: f64,
    #[serde(default = "default_true")]
    pub advection: bool,
}

fn default_gamma() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}
fn default_snapshot_every() -> usize {
    1
}
fn default_hs() -> f64 {
    2.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSection {
    pub grad_sup_max: Option<f64>,
    pub tail_fraction_max: Option<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn manifold_spec(&self) -> Result<ManifoldSpec> {
        ManifoldSpec::new(self.manifold.kind, self.manifold.resolution).map_err(CliError::from)
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        let e = &self.evolution;
        EvolutionConfig {
            alpha: e.alpha,
            kappa: e.kappa,
            gamma: e.gamma,
            eps_mollify: e.eps_mollify,
            dt_init: e.dt_init,
            cfl: e.cfl,
            t_end: e.t_end,
            dealias: e.dealias,
            snapshot_every: e.snapshot_every,
            hs_norm_s: e.hs_norm_s,
            blowup: BlowupThresholds {
                grad_sup_max: self.blowup.grad_sup_max,
                tail_fraction_max: self.blowup.tail_fraction_max.unwrap_or(0.1),
            },
            advection: e.advection,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold_spec()?;
        self.evolution_config().validate()?;
        Ok(())
    }

    /// Canonical content hash: the resolved config serialized as JSON with
    /// fixed field order, SHA-256, hex.
    pub fn canonical_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }
}
