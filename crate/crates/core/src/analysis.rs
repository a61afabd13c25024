//! Finite-difference checks of the activation derivatives, Monte-Carlo mean
//! activation under standard-normal input, and a one-dimensional regression
//! demo that compares how well each activation fits a smooth target.

use std::fmt;
use std::str::FromStr;

use crate::activations::{ActivationKind, ActivationSpec};
use crate::error::{Error, Result};
use crate::network::{init_network, mse_loss, NetworkConfig};
use crate::numerics::{Matrix, RandomStream};

/// Probe points used by `gradcheck` and the acceptance suite.
pub const STANDARD_POINTS: [f64; 6] = [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0];
pub const DEFAULT_EPS: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// E[max(0, Z)] for Z ~ N(0, 1), i.e. 1/sqrt(2π).
pub const RELU_MEAN_ANALYTIC: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrt {
    Input,
    Param,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckPoint {
    pub x: f64,
    pub wrt: Wrt,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub kind: ActivationKind,
    pub param: f64,
    pub eps: f64,
    pub tolerance: f64,
    pub points: Vec<GradCheckPoint>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.points.iter().map(|p| p.rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            writeln!(
                f,
                "{} param={} d/d{} x={:+.4} analytic={:+.12e} numeric={:+.12e} rel_err={:.3e}",
                self.kind,
                self.param,
                match p.wrt {
                    Wrt::Input => "x",
                    Wrt::Param => "theta",
                },
                p.x,
                p.analytic,
                p.numeric,
                p.rel_error
            )?;
        }
        write!(
            f,
            "{} max_rel_err={:.3e} tol={:e} {}",
            self.kind,
            self.max_rel_error(),
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// |a − n| / max(1, |a|).
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1.0)
}

/// Compares the analytic input derivative (and, for trainable kinds, the
/// parameter derivative) with central differences at each point.
pub fn grad_check_activation(
    spec: &ActivationSpec,
    param: f64,
    points: &[f64],
    eps: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {eps}")));
    }
    if spec.kind.is_piecewise() {
        if let Some(x) = points.iter().find(|x| x.abs() < 100.0 * eps) {
            return Err(Error::Domain(format!(
                "point {x} is within {} of the {} breakpoint",
                100.0 * eps,
                spec.kind
            )));
        }
    }
    let mut out = Vec::new();
    for &x in points {
        let analytic = spec.dinput(x, param);
        let numeric = (spec.forward(x + eps, param) - spec.forward(x - eps, param)) / (2.0 * eps);
        out.push(GradCheckPoint {
            x,
            wrt: Wrt::Input,
            analytic,
            numeric,
            rel_error: relative_error(analytic, numeric),
        });
        if spec.is_trainable() {
            let analytic = spec.dparam(x, param);
            let numeric = (spec.forward(x, param + eps) - spec.forward(x, param - eps)) / (2.0 * eps);
            out.push(GradCheckPoint {
                x,
                wrt: Wrt::Param,
                analytic,
                numeric,
                rel_error: relative_error(analytic, numeric),
            });
        }
    }
    Ok(GradCheckReport {
        kind: spec.kind,
        param,
        eps,
        tolerance,
        points: out,
    })
}

/// Standard check for every kind at its default parameter.
pub fn grad_check_all() -> Vec<GradCheckReport> {
    ActivationKind::ALL
        .iter()
        .map(|&k| {
            let spec = ActivationSpec::new(k);
            grad_check_activation(&spec, spec.initial_param(), &STANDARD_POINTS, DEFAULT_EPS, DEFAULT_TOLERANCE)
                .expect("standard points avoid breakpoints")
        })
        .collect()
}

/// Mean of the activation over `n_samples` standard-normal inputs.
pub fn mc_mean_activation(spec: &ActivationSpec, param: f64, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Domain("Monte-Carlo estimate needs at least one sample".into()));
    }
    let mut rng = RandomStream::new(seed);
    let sum: f64 = (0..n_samples)
        .map(|_| spec.forward(rng.next_gaussian(), param))
        .sum();
    Ok(sum / n_samples as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanActivationRow {
    pub kind: ActivationKind,
    pub param: f64,
    pub n: usize,
    pub seed: u64,
    pub mean: f64,
}

pub const MEAN_ACTIVATION_HEADER: &str = "kind,param,n,seed,mean";

impl fmt::Display for MeanActivationRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.kind, self.param, self.n, self.seed, self.mean)
    }
}

/// Built-in 1-D regression targets. Except for `Constant` (always 0.5),
/// targets are divided by their largest magnitude on the domain so they span
/// at most `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target1d {
    Constant,
    /// x³ − 3x on [−2, 2].
    Cubic,
    /// x⁴ − 2x² + x/2 on [−2, 2].
    Quartic,
    /// sin(3x) on [−π, π].
    Sine,
}

impl Target1d {
    pub const ALL: [Target1d; 4] = [Target1d::Constant, Target1d::Cubic, Target1d::Quartic, Target1d::Sine];

    pub fn name(self) -> &'static str {
        match self {
            Target1d::Constant => "constant",
            Target1d::Cubic => "cubic",
            Target1d::Quartic => "quartic",
            Target1d::Sine => "sine",
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Target1d::Sine => (-std::f64::consts::PI, std::f64::consts::PI),
            _ => (-2.0, 2.0),
        }
    }

    fn raw(self, x: f64) -> f64 {
        match self {
            Target1d::Constant => 0.5,
            Target1d::Cubic => x * x * x - 3.0 * x,
            Target1d::Quartic => x.powi(4) - 2.0 * x * x + 0.5 * x,
            Target1d::Sine => (3.0 * x).sin(),
        }
    }

    /// Grid of `(x, scaled target)` pairs, `points` evenly spaced.
    pub fn sample(self, points: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain();
        let xs: Vec<f64> = (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.raw(x)).collect();
        let scale = match self {
            Target1d::Constant => 1.0,
            _ => ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(f64::MIN_POSITIVE),
        };
        xs.into_iter().zip(ys).map(|(x, y)| (x, y / scale)).collect()
    }
}

impl FromStr for Target1d {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target1d::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown target '{s}' (expected one of: constant, cubic, quartic, sine)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub grid_points: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            grid_points: 201,
            learning_rate: 0.01,
            batch_size: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub final_mse: f64,
    /// `(x, target, prediction)` over the training grid.
    pub curve: Vec<(f64, f64, f64)>,
    pub mse_history: Vec<f64>,
}

impl FitResult {
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("x,target,prediction\n");
        for (x, t, p) in &self.curve {
            s.push_str(&format!("{x},{t},{p}\n"));
        }
        s
    }
}

/// Fits a scalar MLP (linear output, no dropout) to `target` with SGD on the
/// half-MSE objective. Inputs are rescaled to `[-1, 1]`. Initialization uses
/// child stream 0 of `seed`, batch order child stream 1.
pub fn fit_1d_demo(
    target: Target1d,
    activation: ActivationSpec,
    hidden_widths: &[usize],
    epochs: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<FitResult> {
    if options.grid_points < 2 || options.batch_size == 0 {
        return Err(Error::Domain("fit needs at least two grid points and a positive batch size".into()));
    }
    let grid = target.sample(options.grid_points);
    let (lo, hi) = target.domain();
    let scaled: Vec<f64> = grid.iter().map(|(x, _)| 2.0 * (x - lo) / (hi - lo) - 1.0).collect();
    let inputs = Matrix::from_vec(grid.len(), 1, scaled)?;
    let targets = Matrix::from_vec(grid.len(), 1, grid.iter().map(|g| g.1).collect())?;

    let mut widths = hidden_widths.to_vec();
    widths.push(1);
    let config = NetworkConfig::new(format!("fit1d-{}", target.name()), 1, widths, activation, 0.0)?;
    let root = RandomStream::new(seed);
    let mut net = init_network(&config, &mut root.child(0))?;
    let mut rng = root.child(1);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    let mut mse_history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(options.batch_size) {
            let x = inputs.select_rows(chunk);
            let y = targets.select_rows(chunk);
            let (pred, cache) = net.forward_train(&x, &mut rng)?;
            let (_, grad) = mse_loss(&pred, &y)?;
            let grads = net.backward_from_output(&cache, &grad)?;
            net.sgd_step(&grads, options.learning_rate)?;
        }
        mse_history.push(mse_loss(&net.predict(&inputs)?, &targets)?.0);
    }
    let pred = net.predict(&inputs)?;
    let (final_mse, _) = mse_loss(&pred, &targets)?;
    let curve = grid
        .iter()
        .zip(pred.as_slice())
        .map(|(&(x, t), &p)| (x, t, p))
        .collect();
    Ok(FitResult {
        final_mse,
        curve,
        mse_history,
    })
}
