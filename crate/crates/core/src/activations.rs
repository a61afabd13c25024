//! The ten benchmarked activation functions.
//!
//! Every piecewise kind uses `x >= 0` for its upper branch, and derivatives
//! at the breakpoint are the upper branch's one-sided value. Three kinds
//! carry one trainable scalar per layer: PReLU (negative slope), FReLU
//! (additive offset) and PFTS (hinge point).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivationKind {
    Relu,
    Swish,
    Tanh,
    LRelu,
    PRelu,
    Softplus,
    Elu,
    FRelu,
    Fts,
    Pfts,
}

impl ActivationKind {
    /// All kinds in canonical report order.
    pub const ALL: [ActivationKind; 10] = [
        ActivationKind::Relu,
        ActivationKind::Swish,
        ActivationKind::Tanh,
        ActivationKind::LRelu,
        ActivationKind::PRelu,
        ActivationKind::Softplus,
        ActivationKind::Elu,
        ActivationKind::FRelu,
        ActivationKind::Fts,
        ActivationKind::Pfts,
    ];

    /// Lowercase identifier used on the command line and in config files.
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Swish => "swish",
            ActivationKind::Tanh => "tanh",
            ActivationKind::LRelu => "lrelu",
            ActivationKind::PRelu => "prelu",
            ActivationKind::Softplus => "softplus",
            ActivationKind::Elu => "elu",
            ActivationKind::FRelu => "frelu",
            ActivationKind::Fts => "fts",
            ActivationKind::Pfts => "pfts",
        }
    }

    /// Human-readable name for reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "ReLU",
            ActivationKind::Swish => "Swish",
            ActivationKind::Tanh => "Tanh",
            ActivationKind::LRelu => "LReLU",
            ActivationKind::PRelu => "PReLU",
            ActivationKind::Softplus => "Softplus",
            ActivationKind::Elu => "ELU",
            ActivationKind::FRelu => "FReLU",
            ActivationKind::Fts => "FTS",
            ActivationKind::Pfts => "PFTS",
        }
    }

    pub fn index(self) -> usize {
        ActivationKind::ALL.iter().position(|&k| k == self).unwrap()
    }

    pub fn is_trainable(self) -> bool {
        matches!(
            self,
            ActivationKind::PRelu | ActivationKind::FRelu | ActivationKind::Pfts
        )
    }

    /// Kinds defined by cases split at x = 0.
    pub fn is_piecewise(self) -> bool {
        !matches!(
            self,
            ActivationKind::Swish | ActivationKind::Tanh | ActivationKind::Softplus
        )
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown activation '{s}' (expected one of: {})",
                    ActivationKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

/// Initial value of the trainable scalar; for fixed kinds, the fixed
/// hyperparameter (or 0 when the kind has none).
pub fn act_init_param(kind: ActivationKind) -> f64 {
    match kind {
        ActivationKind::PRelu => 0.25,
        ActivationKind::FRelu => -0.398,
        ActivationKind::Pfts => -0.20,
        ActivationKind::LRelu => 0.01,
        ActivationKind::Elu => 1.0,
        ActivationKind::Swish => 1.0,
        ActivationKind::Fts => -0.20,
        ActivationKind::Relu | ActivationKind::Tanh | ActivationKind::Softplus => 0.0,
    }
}

/// Kind plus hyperparameters. `alpha` is the LReLU/ELU constant, `beta` the
/// Swish constant, `t` the FTS hinge, `trainable_init` the starting value
/// of the PReLU/FReLU/PFTS parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
    pub trainable_init: f64,
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind) -> Self {
        ActivationSpec {
            kind,
            alpha: match kind {
                ActivationKind::Elu => 1.0,
                _ => 0.01,
            },
            beta: 1.0,
            t: -0.20,
            trainable_init: if kind.is_trainable() {
                act_init_param(kind)
            } else {
                0.0
            },
        }
    }

    pub fn is_trainable(&self) -> bool {
        self.kind.is_trainable()
    }

    /// Value the per-layer state starts at. Fixed kinds report their fixed
    /// hyperparameter here so the state is informative, but it is never read.
    pub fn initial_param(&self) -> f64 {
        match self.kind {
            ActivationKind::PRelu | ActivationKind::FRelu | ActivationKind::Pfts => {
                self.trainable_init
            }
            ActivationKind::LRelu | ActivationKind::Elu => self.alpha,
            ActivationKind::Swish => self.beta,
            ActivationKind::Fts => self.t,
            _ => 0.0,
        }
    }

    pub fn init_state(&self) -> ActivationState {
        ActivationState {
            value: self.initial_param(),
            grad: 0.0,
        }
    }

    /// f(x) with trainable parameter `param` (ignored by fixed kinds).
    pub fn forward(&self, x: f64, param: f64) -> f64 {
        match self.kind {
            ActivationKind::Relu => {
                if x >= 0.0 {
                    x
                } else {
                    0.0
                }
            }
            ActivationKind::Swish => x * sigmoid(self.beta * x),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::LRelu => {
                if x >= 0.0 {
                    x
                } else {
                    self.alpha * x
                }
            }
            ActivationKind::PRelu => {
                if x >= 0.0 {
                    x
                } else {
                    param * x
                }
            }
            ActivationKind::Softplus => softplus(x),
            ActivationKind::Elu => {
                if x >= 0.0 {
                    x
                } else {
                    self.alpha * x.exp_m1()
                }
            }
            ActivationKind::FRelu => {
                if x >= 0.0 {
                    x + param
                } else {
                    param
                }
            }
            ActivationKind::Fts => flatten_t(x, self.t),
            ActivationKind::Pfts => flatten_t(x, param),
        }
    }

    /// df/dx. At x = 0 piecewise kinds return the upper-branch slope.
    pub fn dinput(&self, x: f64, param: f64) -> f64 {
        match self.kind {
            ActivationKind::Relu => step(x, 1.0, 0.0),
            ActivationKind::Swish => {
                let s = sigmoid(self.beta * x);
                s + self.beta * x * s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::LRelu => step(x, 1.0, self.alpha),
            ActivationKind::PRelu => step(x, 1.0, param),
            ActivationKind::Softplus => sigmoid(x),
            ActivationKind::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    self.alpha * x.exp()
                }
            }
            ActivationKind::FRelu => step(x, 1.0, 0.0),
            ActivationKind::Fts | ActivationKind::Pfts => flatten_t_slope(x),
        }
    }

    /// df/dθ for the trainable scalar; zero for fixed kinds.
    pub fn dparam(&self, x: f64, _param: f64) -> f64 {
        match self.kind {
            ActivationKind::PRelu => {
                if x >= 0.0 {
                    0.0
                } else {
                    x
                }
            }
            ActivationKind::FRelu | ActivationKind::Pfts => 1.0,
            _ => 0.0,
        }
    }
}

impl Default for ActivationSpec {
    fn default() -> Self {
        ActivationSpec::new(ActivationKind::Relu)
    }
}

impl From<ActivationKind> for ActivationSpec {
    fn from(kind: ActivationKind) -> Self {
        ActivationSpec::new(kind)
    }
}

/// Per-layer trainable scalar and the gradient from the latest step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationState {
    pub value: f64,
    pub grad: f64,
}

fn step(x: f64, upper: f64, lower: f64) -> f64 {
    if x >= 0.0 {
        upper
    } else {
        lower
    }
}

/// Logistic sigmoid, evaluated without overflow for any finite input.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + eˣ) as max(x, 0) + ln(1 + e^-|x|).
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn flatten_t(x: f64, t: f64) -> f64 {
    if x >= 0.0 {
        x * sigmoid(x) + t
    } else {
        t
    }
}

/// Slope of the flatten-T family, written as σ(x)(1 − xσ(x)) + xσ(x).
fn flatten_t_slope(x: f64) -> f64 {
    if x >= 0.0 {
        let s = sigmoid(x);
        let swish = x * s;
        s * (1.0 - swish) + swish
    } else {
        0.0
    }
}

fn check_input(spec: &ActivationSpec, state: &ActivationState, x: f64) -> Result<()> {
    if x.is_nan() {
        return Err(Error::Domain(format!("{} received NaN input", spec.kind)));
    }
    if !state.value.is_finite() {
        return Err(Error::Domain(format!(
            "{} parameter is not finite ({})",
            spec.kind, state.value
        )));
    }
    Ok(())
}

pub fn act_forward(spec: &ActivationSpec, state: &ActivationState, x: f64) -> Result<f64> {
    check_input(spec, state, x)?;
    Ok(spec.forward(x, state.value))
}

pub fn act_dinput(spec: &ActivationSpec, state: &ActivationState, x: f64) -> Result<f64> {
    check_input(spec, state, x)?;
    Ok(spec.dinput(x, state.value))
}

pub fn act_dparam(spec: &ActivationSpec, state: &ActivationState, x: f64) -> Result<f64> {
    check_input(spec, state, x)?;
    Ok(spec.dparam(x, state.value))
}

// Config files describe an activation as {"kind": "pfts", "params": {...}}
// with every parameter optional.
#[derive(Serialize, Deserialize)]
struct SpecRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "ParamsRepr::is_empty")]
    params: ParamsRepr,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<f64>,
}

impl ParamsRepr {
    fn is_empty(&self) -> bool {
        self.alpha.is_none() && self.beta.is_none() && self.t.is_none() && self.init.is_none()
    }
}

impl Serialize for ActivationSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = ActivationSpec::new(self.kind);
        let differs = |a: f64, b: f64| (a != b).then_some(a);
        SpecRepr {
            kind: self.kind.name().to_string(),
            params: ParamsRepr {
                alpha: differs(self.alpha, d.alpha),
                beta: differs(self.beta, d.beta),
                t: differs(self.t, d.t),
                init: differs(self.trainable_init, d.trainable_init),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ActivationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Name(String),
            Full(SpecRepr),
        }
        let repr = match Either::deserialize(deserializer)? {
            Either::Name(kind) => SpecRepr {
                kind,
                params: ParamsRepr::default(),
            },
            Either::Full(r) => r,
        };
        let kind: ActivationKind = repr.kind.parse().map_err(serde::de::Error::custom)?;
        let mut spec = ActivationSpec::new(kind);
        let p = repr.params;
        spec.alpha = p.alpha.unwrap_or(spec.alpha);
        spec.beta = p.beta.unwrap_or(spec.beta);
        spec.t = p.t.unwrap_or(spec.t);
        spec.trainable_init = p.init.unwrap_or(spec.trainable_init);
        Ok(spec)
    }
}
