//! Scenario files: model selection, initial data, experiment parameters.

use crate::error::{FtError, Result};
use crate::flux::{
    CubicSpline, EulerModel, FluxModel, PSystemModel, PressureLaw, ScalarFlux, ScalarModel, State,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// All randomness in the crate flows through this constructor so that a
/// (scenario, seed) pair fully determines every output byte.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PairStability,
    Census,
    IdentityFuzz,
    WeightAudit,
    Monotonicity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Scalar {
        flux: ScalarFluxSpec,
        range: [f64; 2],
    },
    Psystem {
        gamma: f64,
        v_domain: [f64; 2],
    },
    Euler {
        gamma: f64,
        #[serde(default = "default_rho_min")]
        rho_min: f64,
    },
}

fn default_rho_min() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarFluxSpec {
    Named(String),
    Table { spline: CubicSpline },
}

impl ModelSpec {
    /// Instantiate the model at working resolution `h`. For scalar laws the
    /// jittered approximant table is shared by both runs of a pair, so the
    /// grid seed is a pair-level quantity.
    pub fn build(&self, h: f64, grid_seed: u64) -> Result<FluxModel> {
        match self {
            ModelSpec::Scalar { flux, range } => {
                let f = match flux {
                    ScalarFluxSpec::Named(n) => match n.as_str() {
                        "burgers" => ScalarFlux::Burgers,
                        "cubic" => ScalarFlux::Cubic,
                        other => {
                            return Err(FtError::Scenario {
                                field: "model.flux".into(),
                                reason: format!("unknown flux `{other}`"),
                            })
                        }
                    },
                    ScalarFluxSpec::Table { spline } => {
                        spline.validate()?;
                        ScalarFlux::Spline(spline.clone())
                    }
                };
                if !(range[0] < range[1]) {
                    return Err(FtError::Scenario {
                        field: "model.range".into(),
                        reason: "need range[0] < range[1]".into(),
                    });
                }
                Ok(FluxModel::Scalar(ScalarModel::new(
                    f, range[0], range[1], h, grid_seed,
                )))
            }
            ModelSpec::Psystem { gamma, v_domain } => Ok(FluxModel::PSystem(PSystemModel::new(
                PressureLaw::PowerLaw { gamma: *gamma },
                v_domain[0],
                v_domain[1],
            )?)),
            ModelSpec::Euler { gamma, rho_min } => {
                Ok(FluxModel::Euler(EulerModel::new(*gamma, *rho_min)?))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialSpec {
    /// Two-state Riemann data with the jump at x = 0.
    Riemann { left: Vec<f64>, right: Vec<f64> },
    /// Explicit piecewise-constant data.
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// Smooth bump `baseline + amplitude exp(-(x-center)^2/width^2)`,
    /// sampled at spacing h over its support (first component only).
    Bump {
        center: f64,
        width: f64,
        amplitude: f64,
        baseline: Vec<f64>,
    },
    /// Seeded random BV profile: `pieces` constant pieces on jump positions
    /// drawn from a jittered grid over `span`, values uniform within
    /// `amplitude` of `around`, rescaled to respect the `tv` cap.
    Random {
        pieces: usize,
        amplitude: f64,
        tv: f64,
        span: [f64; 2],
        around: Vec<f64>,
    },
}

fn state_from(v: &[f64], dim: usize, field: &str) -> Result<State> {
    if v.len() != dim {
        return Err(FtError::Scenario {
            field: field.into(),
            reason: format!("expected {dim} components, got {}", v.len()),
        });
    }
    Ok(if dim == 1 {
        State::scalar(v[0])
    } else {
        State::pair(v[0], v[1])
    })
}

impl InitialSpec {
    /// Raw (pre-projection) piecewise-constant data.
    pub fn raw_profile(&self, dim: usize, h: f64, seed: u64) -> Result<(Vec<f64>, Vec<State>)> {
        match self {
            InitialSpec::Riemann { left, right } => Ok((
                vec![0.0],
                vec![
                    state_from(left, dim, "initial.left")?,
                    state_from(right, dim, "initial.right")?,
                ],
            )),
            InitialSpec::Piecewise { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(FtError::Scenario {
                        field: "initial.values".into(),
                        reason: "need one more value than breakpoints".into(),
                    });
                }
                if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
                    return Err(FtError::Scenario {
                        field: "initial.breakpoints".into(),
                        reason: "breakpoints must increase".into(),
                    });
                }
                let vals = values
                    .iter()
                    .map(|v| state_from(v, dim, "initial.values"))
                    .collect::<Result<Vec<_>>>()?;
                Ok((breakpoints.clone(), vals))
            }
            InitialSpec::Bump {
                center,
                width,
                amplitude,
                baseline,
            } => {
                let base = state_from(baseline, dim, "initial.baseline")?;
                // Support truncated where the bump falls below amplitude*1e-3.
                let half = width * (1e3f64.ln()).sqrt();
                let n = ((2.0 * half) / h).ceil() as usize;
                let mut xs = Vec::new();
                let mut vals = vec![base];
                for k in 0..=n {
                    let x = center - half + 2.0 * half * k as f64 / n as f64;
                    let u0 = base.comp(0)
                        + amplitude * (-((x - center) / width).powi(2)).exp();
                    let s = if dim == 1 {
                        State::scalar(u0)
                    } else {
                        State::pair(u0, base.comp(1))
                    };
                    xs.push(x);
                    vals.push(s);
                }
                xs.push(center + half + h);
                vals.push(base);
                Ok((xs, vals))
            }
            InitialSpec::Random {
                pieces,
                amplitude,
                tv,
                span,
                around,
            } => {
                let base = state_from(around, dim, "initial.around")?;
                let mut rng = seeded_rng(seed);
                let n = (*pieces).max(1);
                let mut xs = Vec::with_capacity(n);
                let cell = (span[1] - span[0]) / n as f64;
                for k in 0..n {
                    let jit = rng.gen_range(-0.3..0.3) * cell;
                    xs.push(span[0] + cell * (k as f64 + 0.5) + jit);
                }
                let mut vals = Vec::with_capacity(n + 1);
                vals.push(base);
                for _ in 0..n {
                    let s = match dim {
                        1 => State::scalar(base.comp(0) + rng.gen_range(-1.0..1.0) * amplitude),
                        _ => State::pair(
                            base.comp(0) + rng.gen_range(-1.0..1.0) * amplitude,
                            base.comp(1) + rng.gen_range(-1.0..1.0) * amplitude,
                        ),
                    };
                    vals.push(s);
                }
                // Close back to the baseline so variation has compact support.
                vals.push(base);
                xs.push(span[1]);
                // Rescale deviations if the TV cap is exceeded.
                let raw_tv: f64 = vals.windows(2).map(|w| w[1].dist1(&w[0])).sum();
                if raw_tv > *tv {
                    let scale = tv / raw_tv;
                    for v in vals.iter_mut() {
                        *v = match dim {
                            1 => State::scalar(
                                base.comp(0) + (v.comp(0) - base.comp(0)) * scale,
                            ),
                            _ => State::pair(
                                base.comp(0) + (v.comp(0) - base.comp(0)) * scale,
                                base.comp(1) + (v.comp(1) - base.comp(1)) * scale,
                            ),
                        };
                    }
                }
                Ok((xs, vals))
            }
        }
    }
}

fn default_kappa() -> f64 {
    0.1
}
fn default_k_const() -> f64 {
    10.0
}
fn default_c1_cap() -> f64 {
    16.0
}
fn default_seeds() -> usize {
    1
}
fn default_h_levels() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub kind: ExperimentKind,
    pub model: ModelSpec,
    /// Initial data of the two runs of a pair.
    pub initial: [InitialSpec; 2],
    pub h: f64,
    #[serde(default = "default_h_levels")]
    pub h_levels: usize,
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_kappa")]
    pub kappa1: f64,
    #[serde(default = "default_kappa")]
    pub kappa2: f64,
    #[serde(default = "default_k_const")]
    pub k_const: f64,
    #[serde(default)]
    pub c0: f64,
    /// Uniform bound of Eq.-type `|u| + |u'| + TV + TV'` accepted at load.
    #[serde(default = "default_c1_cap")]
    pub c1_cap: f64,
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let sc: Scenario = serde_json::from_str(&text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(FtError::Scenario {
                field: "h".into(),
                reason: "must be positive".into(),
            });
        }
        if !(self.t_end > 0.0) {
            return Err(FtError::Scenario {
                field: "t_end".into(),
                reason: "must be positive".into(),
            });
        }
        if self.h_levels == 0 || self.seeds == 0 {
            return Err(FtError::Scenario {
                field: "h_levels/seeds".into(),
                reason: "must be at least 1".into(),
            });
        }
        let model = self.model.build(self.h, self.seed)?;
        // Eigenvalue-band separation over the admissible state range.
        let states = self.scan_states(&model);
        model.band_scan(states.iter())?;
        // Uniform amplitude/TV cap (load-time Cone bound).
        let dim = model.n_families().min(2);
        let mut total = 0.0;
        for (k, spec) in self.initial.iter().enumerate() {
            let (_, vals) = spec.raw_profile(dim, self.h, self.seed.wrapping_add(k as u64))?;
            let tv: f64 = vals.windows(2).map(|w| w[1].dist1(&w[0])).sum();
            let amp = vals.iter().map(|v| v.norm1()).fold(0.0, f64::max);
            total += tv + amp;
            for v in &vals {
                model.check_state(v).map_err(|e| FtError::Scenario {
                    field: format!("initial[{k}]"),
                    reason: e.to_string(),
                })?;
            }
        }
        if total > self.c1_cap {
            return Err(FtError::Scenario {
                field: "initial".into(),
                reason: format!("amplitude + variation {total:.3} exceeds cap {}", self.c1_cap),
            });
        }
        Ok(())
    }

    /// Sample states across the model's admissible range for band scanning.
    fn scan_states(&self, model: &FluxModel) -> Vec<State> {
        let mut out = Vec::new();
        match model {
            FluxModel::Scalar(m) => {
                for k in 0..=64 {
                    let u = m.table.lo()
                        + (m.table.hi() - m.table.lo()) * k as f64 / 64.0;
                    out.push(State::scalar(u));
                }
            }
            FluxModel::PSystem(m) => {
                for k in 0..=64 {
                    let v = m.v_lo + (m.v_hi - m.v_lo) * k as f64 / 64.0;
                    out.push(State::pair(0.0, v));
                }
            }
            FluxModel::Euler(m) => {
                for k in 0..=64 {
                    let rho = m.rho_min + (3.0 - m.rho_min) * k as f64 / 64.0;
                    out.push(State::pair(rho, 0.0));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_loads_with_defaults() {
        let text = r#"{
            "name": "burgers_riemann",
            "kind": "pair_stability",
            "model": {"type": "scalar", "flux": "burgers", "range": [-2.0, 2.0]},
            "initial": [
                {"type": "riemann", "left": [1.0], "right": [-1.0]},
                {"type": "riemann", "left": [0.5], "right": [-0.5]}
            ],
            "h": 0.1,
            "t_end": 0.5
        }"#;
        let sc: Scenario = serde_json::from_str(text).unwrap();
        sc.validate().unwrap();
        assert_eq!(sc.kappa1, 0.1);
        assert_eq!(sc.k_const, 10.0);
        assert_eq!(sc.seeds, 1);
    }

    #[test]
    fn missing_t_end_names_the_field() {
        let text = r#"{
            "name": "x",
            "kind": "census",
            "model": {"type": "scalar", "flux": "burgers", "range": [-2.0, 2.0]},
            "initial": [
                {"type": "riemann", "left": [1.0], "right": [-1.0]},
                {"type": "riemann", "left": [0.5], "right": [-0.5]}
            ],
            "h": 0.1
        }"#;
        let err = serde_json::from_str::<Scenario>(text).unwrap_err();
        assert!(err.to_string().contains("t_end"), "{err}");
    }

    #[test]
    fn random_profile_is_deterministic_and_capped() {
        let spec = InitialSpec::Random {
            pieces: 8,
            amplitude: 1.0,
            tv: 2.0,
            span: [-2.0, 2.0],
            around: vec![0.5],
        };
        let (xs1, v1) = spec.raw_profile(1, 0.05, 42).unwrap();
        let (xs2, v2) = spec.raw_profile(1, 0.05, 42).unwrap();
        assert_eq!(xs1, xs2);
        assert_eq!(v1, v2);
        let tv: f64 = v1.windows(2).map(|w| w[1].dist1(&w[0])).sum();
        assert!(tv <= 2.0 + 1e-12);
    }
}
