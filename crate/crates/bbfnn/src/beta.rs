//! The Beta activation kernel, network forward pass, output-weight solving,
//! and error measures.
//!
//! A Beta unit is a compactly supported asymmetric bump
//!
//! ```text
//! β(x) = [(p+q)(x−x0)/(d·p)]^p · [(p+q)(x1−x)/(d·q)]^q   for x in (x0, x1)
//! ```
//!
//! and exactly zero elsewhere, where the support edges are
//! `x0 = c − d·p/(p+q)` and `x1 = c + d·q/(p+q)`. The kernel peaks at 1 at
//! its center `c` for every choice of the shape exponents.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error, PartialEq)]
pub enum BetaError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("x = {x} is on or outside the support edge of the unit")]
    OutsideSupport { x: f64 },
    #[error("weights length {weights} does not match unit count {units}")]
    LengthMismatch { units: usize, weights: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("network has no units")]
    NoUnits,
    #[error("ridge must be non-negative, got {0}")]
    NegativeRidge(f64),
}

/// One hidden neuron: center, width, and the two shape exponents.
///
/// Construction enforces `width > 0`, `shape_p > 0`, `shape_q > 0`; evaluation
/// never fails after that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaUnit {
    pub(crate) center: f64,
    pub(crate) width: f64,
    pub(crate) shape_p: f64,
    pub(crate) shape_q: f64,
}

/// The auxiliary reciprocals used by the gradient formulas.
///
/// Strictly inside the support both factors are positive and satisfy
/// `1/a + 1/b = (p+q)·d`: they are reciprocal distances (scaled by `p+q`)
/// from `x` to the upper and lower support edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbFactors {
    pub a: f64,
    pub b: f64,
}

impl BetaUnit {
    pub fn new(center: f64, width: f64, shape_p: f64, shape_q: f64) -> Result<Self, BetaError> {
        if !center.is_finite() {
            return Err(BetaError::InvalidParameter {
                name: "center",
                value: center,
            });
        }
        for (name, value) in [("width", width), ("shape_p", shape_p), ("shape_q", shape_q)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(BetaError::InvalidParameter { name, value });
            }
        }
        Ok(BetaUnit {
            center,
            width,
            shape_p,
            shape_q,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn shape_p(&self) -> f64 {
        self.shape_p
    }

    pub fn shape_q(&self) -> f64 {
        self.shape_q
    }

    /// The closed support `[x0, x1]` outside of which the unit is zero.
    ///
    /// `x0 = c − d·p/(p+q)`, `x1 = c + d·q/(p+q)`; the support length is `d`.
    pub fn support(&self) -> (f64, f64) {
        let s = self.shape_p + self.shape_q;
        (
            self.center - self.width * self.shape_p / s,
            self.center + self.width * self.shape_q / s,
        )
    }

    /// Evaluates the kernel. Exactly 0 at and outside the support edges,
    /// exactly 1 at the center.
    pub fn eval(&self, x: f64) -> f64 {
        let (x0, x1) = self.support();
        if !(x > x0 && x < x1) {
            return 0.0;
        }
        let s = self.shape_p + self.shape_q;
        let dx = x - self.center;
        // (p+q)(x−x0)/(d·p) and (p+q)(x1−x)/(d·q), written so the center
        // gives exactly 1 and keeps the A1 kernel identities tight.
        let base_l = 1.0 + s * dx / (self.width * self.shape_p);
        let base_r = 1.0 - s * dx / (self.width * self.shape_q);
        if base_l <= 0.0 || base_r <= 0.0 {
            // Only reachable within rounding distance of an edge.
            return 0.0;
        }
        base_l.powf(self.shape_p) * base_r.powf(self.shape_q)
    }

    /// The gradient helper factors `a = 1/(q·d − (p+q)(x−c))` and
    /// `b = 1/(p·d + (p+q)(x−c))`, defined strictly inside the support.
    pub fn ab_factors(&self, x: f64) -> Result<AbFactors, BetaError> {
        let s = self.shape_p + self.shape_q;
        let dx = x - self.center;
        let a_den = self.shape_q * self.width - s * dx;
        let b_den = self.shape_p * self.width + s * dx;
        if !(a_den > 0.0 && b_den > 0.0) {
            return Err(BetaError::OutsideSupport { x });
        }
        Ok(AbFactors {
            a: 1.0 / a_den,
            b: 1.0 / b_den,
        })
    }
}

/// A single-hidden-layer network: Beta units and their output weights.
///
/// The forward pass is `f(x) = Σᵢ wᵢ·βᵢ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaNetwork {
    pub(crate) units: Vec<BetaUnit>,
    pub(crate) weights: Vec<f64>,
}

impl BetaNetwork {
    pub fn new(units: Vec<BetaUnit>, weights: Vec<f64>) -> Result<Self, BetaError> {
        if units.len() != weights.len() {
            return Err(BetaError::LengthMismatch {
                units: units.len(),
                weights: weights.len(),
            });
        }
        Ok(BetaNetwork { units, weights })
    }

    pub fn empty() -> Self {
        BetaNetwork {
            units: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn units(&self) -> &[BetaUnit] {
        &self.units
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Network output at `x`; an empty network returns 0.
    pub fn forward(&self, x: f64) -> f64 {
        self.units
            .iter()
            .zip(&self.weights)
            .map(|(unit, w)| w * unit.eval(x))
            .sum()
    }
}

/// Solves the output weights by ridge-regularized linear least squares:
/// the minimizer of `Σⱼ (tⱼ − Σᵢ wᵢβᵢ(xⱼ))² + ridge·‖w‖²`.
///
/// Uses an SVD of the (optionally ridge-augmented) design matrix, so a
/// rank-deficient design with `ridge = 0` yields the minimum-norm solution
/// rather than failing. Deterministic for fixed inputs.
pub fn solve_weights(
    units: &[BetaUnit],
    samples: &Dataset,
    ridge: f64,
) -> Result<Vec<f64>, BetaError> {
    if units.is_empty() {
        return Err(BetaError::NoUnits);
    }
    if samples.is_empty() {
        return Err(BetaError::EmptyDataset);
    }
    if !(ridge >= 0.0) {
        return Err(BetaError::NegativeRidge(ridge));
    }

    let n = samples.len();
    let k = units.len();
    let extra = if ridge > 0.0 { k } else { 0 };
    let sqrt_ridge = ridge.sqrt();

    let design = DMatrix::from_fn(n + extra, k, |row, col| {
        if row < n {
            units[col].eval(samples.samples()[row].x)
        } else if row - n == col {
            sqrt_ridge
        } else {
            0.0
        }
    });
    let rhs = DVector::from_fn(n + extra, |row, _| {
        if row < n {
            samples.samples()[row].target
        } else {
            0.0
        }
    });

    let svd = design.svd(true, true);
    let s_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let eps = f64::EPSILON * (n + extra).max(k) as f64 * s_max.max(1.0);
    let solution = svd
        .solve(&rhs, eps)
        .expect("SVD computed with both factor sets");
    Ok(solution.iter().copied().collect())
}

/// The training error `E = ½·Σⱼ (f(xⱼ) − tⱼ)²` over all samples in the set.
pub fn training_error(net: &BetaNetwork, samples: &Dataset) -> Result<f64, BetaError> {
    if samples.is_empty() {
        return Err(BetaError::EmptyDataset);
    }
    let sum: f64 = samples
        .iter()
        .map(|s| {
            let e = net.forward(s.x) - s.target;
            e * e
        })
        .sum();
    Ok(0.5 * sum)
}
