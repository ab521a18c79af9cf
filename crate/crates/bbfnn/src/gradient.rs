//! Per-sample gradient-descent updates for the five unit parameters, the
//! epoch/refine training drivers, and a finite-difference checking oracle.
//!
//! With `e = target − f(x)` and `β`, `A`, `B` from the kernel module, the
//! per-sample increments are
//!
//! ```text
//! Δw  = η·e·β
//! Δc  = η·e·w·β·(p+q)·(q·A − p·B)
//! Δd  = η·e·w·β·((x−c)/d)·(p+q)·(q·A − p·B)
//! Δp  = η·e·w·β·( ln(1/(B·p·d)) − q·(x−c)·(A+B) )
//! Δq  = η·e·w·β·( ln(1/(A·q·d)) + p·(x−c)·(A+B) )
//! ```
//!
//! The Δc slope factor is `q·A − p·B`, matching the corresponding factor in
//! Δd; the finite-difference oracle below rejects the `q·A + p·B` variant.

use crate::beta::{training_error, BetaError, BetaNetwork, BetaUnit};
use crate::data::Dataset;
use crate::evolution::{ParamBounds, ValueRange};
use crate::ConfigError;

/// Settings for the gradient phase: step size, epoch budget, stop threshold,
/// and the clamping box that keeps updated parameters valid.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub target_error: f64,
    pub param_bounds: ParamBounds,
}

impl GradientConfig {
    pub fn new(
        learning_rate: f64,
        max_iterations: usize,
        target_error: f64,
        param_bounds: ParamBounds,
    ) -> Result<Self, ConfigError> {
        let cfg = GradientConfig {
            learning_rate,
            max_iterations,
            target_error,
            param_bounds,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ConfigError::new(
                "learning_rate",
                format!(
                    "must be strictly positive and finite, got {}",
                    self.learning_rate
                ),
            ));
        }
        if self.max_iterations == 0 {
            return Err(ConfigError::new("max_iterations", "must be at least 1"));
        }
        if !(self.target_error.is_finite() && self.target_error >= 0.0) {
            return Err(ConfigError::new(
                "target_error",
                format!("must be non-negative and finite, got {}", self.target_error),
            ));
        }
        self.param_bounds.validate()
    }
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            learning_rate: 0.01,
            max_iterations: 2000,
            target_error: 0.01,
            param_bounds: ParamBounds::default(),
        }
    }
}

/// One unit's per-sample parameter increments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitGradient {
    pub d_weight: f64,
    pub d_center: f64,
    pub d_width: f64,
    pub d_p: f64,
    pub d_q: f64,
}

impl UnitGradient {
    pub const ZERO: UnitGradient = UnitGradient {
        d_weight: 0.0,
        d_center: 0.0,
        d_width: 0.0,
        d_p: 0.0,
        d_q: 0.0,
    };

    fn all_finite(&self) -> bool {
        self.d_weight.is_finite()
            && self.d_center.is_finite()
            && self.d_width.is_finite()
            && self.d_p.is_finite()
            && self.d_q.is_finite()
    }
}

/// The increments for one unit given a precomputed residual `error`.
/// Zero whenever the sample is outside the unit's open support, or when the
/// products overflow (treated as no-update rather than poisoning the state).
pub(crate) fn deltas_for_unit(
    unit: &BetaUnit,
    weight: f64,
    x: f64,
    error: f64,
    lr: f64,
) -> UnitGradient {
    let beta = unit.eval(x);
    if beta == 0.0 {
        return UnitGradient::ZERO;
    }
    let ab = match unit.ab_factors(x) {
        Ok(ab) => ab,
        Err(_) => return UnitGradient::ZERO,
    };
    let (a, b) = (ab.a, ab.b);
    let p = unit.shape_p();
    let q = unit.shape_q();
    let d = unit.width();
    let dx = x - unit.center();
    let slope = (p + q) * (q * a - p * b);
    let common = lr * error * weight * beta;
    let g = UnitGradient {
        d_weight: lr * error * beta,
        d_center: common * slope,
        d_width: common * (dx / d) * slope,
        d_p: common * (-(b * p * d).ln() - q * dx * (a + b)),
        d_q: common * (-(a * q * d).ln() + p * dx * (a + b)),
    };
    if g.all_finite() {
        g
    } else {
        UnitGradient::ZERO
    }
}

/// The increments for unit `unit_index` at sample `(x, target)`, with the
/// residual taken against the whole network's forward output.
pub fn unit_deltas(
    net: &BetaNetwork,
    unit_index: usize,
    x: f64,
    target: f64,
    lr: f64,
) -> UnitGradient {
    let e = target - net.forward(x);
    deltas_for_unit(
        &net.units()[unit_index],
        net.weights()[unit_index],
        x,
        e,
        lr,
    )
}

fn step_param(old: f64, delta: f64, range: &ValueRange) -> f64 {
    if delta == 0.0 {
        return old;
    }
    let next = old + delta;
    if next.is_finite() {
        range.clamp(next)
    } else {
        old
    }
}

fn step_weight(old: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return old;
    }
    let next = old + delta;
    if next.is_finite() {
        next
    } else {
        old
    }
}

/// One pass over the training set in stored order, updating every unit after
/// each sample (online regime). Updated parameters are clamped into
/// `cfg.param_bounds`, which keeps width, p, q strictly positive.
pub fn epoch(net: &BetaNetwork, train: &Dataset, cfg: &GradientConfig) -> BetaNetwork {
    let mut units = net.units().to_vec();
    let mut weights = net.weights().to_vec();
    let bounds = &cfg.param_bounds;
    let mut deltas = vec![UnitGradient::ZERO; units.len()];

    for s in train.iter() {
        let y: f64 = units
            .iter()
            .zip(&weights)
            .map(|(u, w)| w * u.eval(s.x))
            .sum();
        let e = s.target - y;
        // all units share the residual of the same forward pass
        for (i, (u, w)) in units.iter().zip(&weights).enumerate() {
            deltas[i] = deltas_for_unit(u, *w, s.x, e, cfg.learning_rate);
        }
        for (i, g) in deltas.iter().enumerate() {
            let u = &mut units[i];
            u.center = step_param(u.center, g.d_center, &bounds.center_range);
            u.width = step_param(u.width, g.d_width, &bounds.width_range);
            u.shape_p = step_param(u.shape_p, g.d_p, &bounds.p_range);
            u.shape_q = step_param(u.shape_q, g.d_q, &bounds.q_range);
            weights[i] = step_weight(weights[i], g.d_weight);
        }
    }
    BetaNetwork { units, weights }
}

/// Result of a refinement run: the best network seen, the number of epochs
/// actually executed, and that best network's training error.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome {
    pub network: BetaNetwork,
    pub iterations: usize,
    pub error: f64,
}

/// Runs epochs until the best-seen training error drops below
/// `cfg.target_error` or `cfg.max_iterations` epochs are spent. An input
/// that already meets the target is returned unchanged with zero iterations.
/// The returned network is the best seen, never worse than the input.
pub fn refine(
    net: &BetaNetwork,
    train: &Dataset,
    cfg: &GradientConfig,
) -> Result<RefineOutcome, BetaError> {
    let mut best = net.clone();
    let mut best_error = training_error(&best, train)?;
    let mut current = net.clone();
    let mut iterations = 0;

    while iterations < cfg.max_iterations && best_error >= cfg.target_error {
        current = epoch(&current, train, cfg);
        iterations += 1;
        let err = training_error(&current, train)?;
        if err < best_error {
            best = current.clone();
            best_error = err;
        }
    }
    Ok(RefineOutcome {
        network: best,
        iterations,
        error: best_error,
    })
}

/// Compares the four analytic kernel partials (∂β/∂c, ∂β/∂d, ∂β/∂p, ∂β/∂q)
/// against central finite differences with the given step, returning the
/// worst relative error. `x` must sit more than `10·step` inside both
/// support edges, where the kernel is smooth in all four parameters.
pub fn gradient_check(
    unit: &BetaUnit,
    weight: f64,
    x: f64,
    step: f64,
) -> Result<f64, BetaError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(BetaError::InvalidParameter {
            name: "step",
            value: step,
        });
    }
    let (x0, x1) = unit.support();
    if !(x - x0 > 10.0 * step && x1 - x > 10.0 * step) {
        return Err(BetaError::OutsideSupport { x });
    }

    let w = if weight != 0.0 { weight } else { 1.0 };
    let g = deltas_for_unit(unit, w, x, 1.0, 1.0);
    let analytic = [g.d_center / w, g.d_width / w, g.d_p / w, g.d_q / w];

    let (c, d, p, q) = (unit.center(), unit.width(), unit.shape_p(), unit.shape_q());
    let eval_with = |center: f64, width: f64, shape_p: f64, shape_q: f64| {
        BetaUnit {
            center,
            width,
            shape_p,
            shape_q,
        }
        .eval(x)
    };
    let h = 2.0 * step;
    let numeric = [
        (eval_with(c + step, d, p, q) - eval_with(c - step, d, p, q)) / h,
        (eval_with(c, d + step, p, q) - eval_with(c, d - step, p, q)) / h,
        (eval_with(c, d, p + step, q) - eval_with(c, d, p - step, q)) / h,
        (eval_with(c, d, p, q + step) - eval_with(c, d, p, q - step)) / h,
    ];

    // the kernel is bounded by 1, so a unit floor keeps the comparison
    // relative for steep partials and absolute near their zero crossings,
    // where central differences only resolve to rounding noise
    let worst = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(1.0))
        .fold(0.0f64, f64::max);
    Ok(worst)
}
