//! Ellipsoid classes of Toeplitz alternatives and their optimal weight plans.
//!
//! Two classes of correlation sequences are supported: the Sobolev-type
//! class `Σ j^{2α} σ_j² ≤ L` and the analytic class `Σ e^{2Aj} σ_j² ≤ L`.
//! For each, [`solve_weight_plan`] evaluates the closed-form solution of
//! the sup-inf weight design problem (truncation `T`, weights `w*_j`,
//! least-favorable correlations `σ*_j`), and [`separation_rate`] gives the
//! minimax radius `ψ̃(n, p)`.

mod oracle;

pub use oracle::{extremal_oracle, OracleSolution};

use crate::error::{Error, Result};
use crate::normal::normal_cdf;

/// Smoothness class of the alternative correlation sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipsoidClass {
    /// `Σ_j j^{2α} σ_j² ≤ L`, with `α > 1/4`.
    Polynomial { alpha: f64, l: f64 },
    /// `Σ_j e^{2Aj} σ_j² ≤ L`, with `A > 0`.
    Exponential { a: f64, l: f64 },
}

impl EllipsoidClass {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EllipsoidClass::Polynomial { alpha, l } => {
                if !(alpha > 0.25 && alpha.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "polynomial class requires alpha > 1/4, got {alpha}"
                    )));
                }
                check_radius_l(l)
            }
            EllipsoidClass::Exponential { a, l } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "exponential class requires A > 0, got {a}"
                    )));
                }
                check_radius_l(l)
            }
        }
    }

    pub fn l(&self) -> f64 {
        match *self {
            EllipsoidClass::Polynomial { l, .. } | EllipsoidClass::Exponential { l, .. } => l,
        }
    }

    /// Ellipsoid coefficient of lag `j`: `j^{2α}` or `e^{2Aj}`.
    pub fn penalty(&self, j: usize) -> f64 {
        match *self {
            EllipsoidClass::Polynomial { alpha, .. } => (j as f64).powf(2.0 * alpha),
            EllipsoidClass::Exponential { a, .. } => (2.0 * a * j as f64).exp(),
        }
    }

    /// Unfloored truncation length for radius `psi`.
    pub fn truncation_real(&self, psi: f64) -> f64 {
        match *self {
            EllipsoidClass::Polynomial { alpha, l } => {
                (l * (4.0 * alpha + 1.0)).powf(1.0 / (2.0 * alpha)) * psi.powf(-1.0 / alpha)
            }
            EllipsoidClass::Exponential { a, .. } => (1.0 / psi).ln() / a,
        }
    }

    /// Closed-form `λ(ψ)`.
    pub fn lambda(&self, psi: f64) -> f64 {
        match *self {
            EllipsoidClass::Polynomial { alpha, l } => {
                (2.0 * alpha + 1.0)
                    / (2.0 * alpha * (l * (4.0 * alpha + 1.0)).powf(1.0 / (2.0 * alpha)))
                    * psi.powf((2.0 * alpha + 1.0) / alpha)
            }
            EllipsoidClass::Exponential { a, .. } => a * psi * psi / (1.0 / psi).ln(),
        }
    }

    /// Closed-form `b(ψ)`, the square root of the rate-table entry.
    pub fn b_closed(&self, psi: f64) -> f64 {
        match *self {
            EllipsoidClass::Polynomial { alpha, l } => {
                (rate_constant(alpha, l) * psi.powf((4.0 * alpha + 1.0) / alpha)).sqrt()
            }
            EllipsoidClass::Exponential { a, .. } => {
                (a * psi.powi(4) / (2.0 * (1.0 / psi).ln())).sqrt()
            }
        }
    }

    /// Shape `1 − (j/T)^{2α}` or `(1 − e^{2A(j−T)})₊` of the critical profile.
    fn profile(&self, j: usize, t: usize) -> f64 {
        match *self {
            EllipsoidClass::Polynomial { alpha, .. } => {
                (1.0 - (j as f64 / t as f64).powf(2.0 * alpha)).max(0.0)
            }
            EllipsoidClass::Exponential { a, .. } => {
                (1.0 - (2.0 * a * (j as f64 - t as f64)).exp()).max(0.0)
            }
        }
    }
}

fn check_radius_l(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("class requires L > 0, got {l}")))
    }
}

/// `C(α, L) = (2α+1)(4α+1)^{−(1+1/(2α))} L^{−1/(2α)}`.
pub fn rate_constant(alpha: f64, l: f64) -> f64 {
    (2.0 * alpha + 1.0)
        * (4.0 * alpha + 1.0).powf(-(1.0 + 1.0 / (2.0 * alpha)))
        * l.powf(-1.0 / (2.0 * alpha))
}

/// An alternative class together with its separation radius `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidSpec {
    pub class: EllipsoidClass,
    pub psi: f64,
}

impl EllipsoidSpec {
    pub fn new(class: EllipsoidClass, psi: f64) -> Result<Self> {
        let spec = Self { class, psi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(alpha: f64, l: f64, psi: f64) -> Result<Self> {
        Self::new(EllipsoidClass::Polynomial { alpha, l }, psi)
    }

    pub fn exponential(a: f64, l: f64, psi: f64) -> Result<Self> {
        Self::new(EllipsoidClass::Exponential { a, l }, psi)
    }

    pub fn validate(&self) -> Result<()> {
        self.class.validate()?;
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::Parameter(format!(
                "separation radius must satisfy 0 < psi < 1, got {}",
                self.psi
            )));
        }
        Ok(())
    }

    /// Same class with a different radius.
    pub fn with_psi(&self, psi: f64) -> Result<Self> {
        Self::new(self.class, psi)
    }
}

/// Solved weight-design problem for one `(class, ψ, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPlan {
    pub spec: EllipsoidSpec,
    /// Number of active lags.
    pub t: usize,
    /// `w*_1..w*_T`, normalized so that `Σ w² = 1/2`.
    pub weights: Vec<f64>,
    pub lambda: f64,
    /// `√(½ Σ σ*_j⁴)`, equal to `Σ w*_j σ*_j²`.
    pub b_discrete: f64,
    pub b_closed: f64,
    /// `σ*_1..σ*_T`.
    pub sigma_star: Vec<f64>,
    /// `T` was reduced to `p − 1`.
    pub clamped: bool,
}

impl WeightPlan {
    /// Weights as given by the closed form, `λ/(2b)·profile(j)`, before the
    /// final rescaling.
    pub fn raw_weights(&self) -> Vec<f64> {
        self.sigma_star
            .iter()
            .map(|s| s * s / (2.0 * self.b_discrete))
            .collect()
    }

    /// `Σ_j w*_j σ_j²` for an arbitrary correlation sequence `σ_1, σ_2, …`.
    pub fn weighted_energy(&self, sigma: &[f64]) -> f64 {
        self.weights.iter().zip(sigma).map(|(w, s)| w * s * s).sum()
    }
}

/// Evaluates the closed-form weight plan for dimension `p`.
pub fn solve_weight_plan(spec: &EllipsoidSpec, p: usize) -> Result<WeightPlan> {
    spec.validate()?;
    if p < 3 {
        return Err(Error::Parameter(format!(
            "dimension must be p >= 3, got {p}"
        )));
    }
    let class = spec.class;
    let t_floor = class.truncation_real(spec.psi).floor();
    let (t, clamped) = if t_floor >= p as f64 {
        (p - 1, true)
    } else {
        (t_floor as usize, false)
    };
    if t < 2 {
        return Err(Error::DegenerateTruncation { t });
    }

    let lambda = class.lambda(spec.psi);
    let sigma_sq: Vec<f64> = (1..=t).map(|j| lambda * class.profile(j, t)).collect();
    let sigma_star: Vec<f64> = sigma_sq.iter().map(|s| s.sqrt()).collect();
    let b_discrete = (0.5 * sigma_sq.iter().map(|s| s * s).sum::<f64>()).sqrt();
    if !(b_discrete > 0.0 && b_discrete.is_finite()) {
        return Err(Error::DegenerateTruncation { t });
    }

    let raw: Vec<f64> = sigma_sq.iter().map(|s| s / (2.0 * b_discrete)).collect();
    let norm_sq: f64 = raw.iter().map(|w| w * w).sum();
    let scale = (0.5 / norm_sq).sqrt();
    let weights = raw.iter().map(|w| w * scale).collect();

    Ok(WeightPlan {
        spec: *spec,
        t,
        weights,
        lambda,
        b_discrete,
        b_closed: class.b_closed(spec.psi),
        sigma_star,
        clamped,
    })
}

/// Minimax separation rate `ψ̃(n, p)` of the class.
pub fn separation_rate(class: &EllipsoidClass, n: usize, p: usize) -> Result<f64> {
    class.validate()?;
    if n < 2 || p < 3 {
        return Err(Error::Parameter(format!(
            "separation rate requires n >= 2 and p >= 3, got n = {n}, p = {p}"
        )));
    }
    let np2 = (n as f64 * p as f64).powi(2);
    Ok(match *class {
        EllipsoidClass::Polynomial { alpha, l } => {
            (rate_constant(alpha, l) * np2).powf(-alpha / (4.0 * alpha + 1.0))
        }
        EllipsoidClass::Exponential { a, .. } => (2.0 * np2.ln() / (a * np2)).powf(0.25),
    })
}

/// Asymptotic type II error bound `Φ(n·p·(t − b))`.
pub fn sharp_type2_bound(n: usize, p: usize, t: f64, b: f64) -> f64 {
    normal_cdf(n as f64 * p as f64 * (t - b))
}
