//! Fourier symbol of the drift-perturbed logarithmic Laplacian
//!
//! The operator `½ ln(−d²/dx²) − b d/dx − a` acts on the mode `e^{ipx}` by
//! multiplication with `λ(p) = ln(|p|/e^a) − i b p`. Its modulus is bounded
//! below by a constant `C_{a,b} > 0` whenever `b ≠ 0`; that constant drives
//! every estimate in the fixed-point construction, so it is computed here by
//! a one-dimensional minimization and then certified by re-sampling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of the symbol at one frequency.
///
/// At `p = 0` the logarithm diverges; the symbol is represented by
/// [`SymbolValue::Infinite`], whose reciprocal is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolValue {
    Finite(Complex64),
    Infinite,
}

/// Sentinel for the symbol at the origin.
pub const INF_SYMBOL: SymbolValue = SymbolValue::Infinite;

impl SymbolValue {
    pub fn modulus(&self) -> f64 {
        match self {
            SymbolValue::Finite(z) => z.norm(),
            SymbolValue::Infinite => f64::INFINITY,
        }
    }

    pub fn reciprocal(&self) -> Complex64 {
        match self {
            SymbolValue::Finite(z) => z.inv(),
            SymbolValue::Infinite => Complex64::new(0.0, 0.0),
        }
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            SymbolValue::Finite(z) => Some(*z),
            SymbolValue::Infinite => None,
        }
    }
}

/// `λ_{a,b}(p) = ln(|p|/e^a) − i b p`.
pub fn symbol_lambda(p: f64, a: f64, b: f64) -> SymbolValue {
    if p == 0.0 {
        return INF_SYMBOL;
    }
    SymbolValue::Finite(Complex64::new(p.abs().ln() - a, -b * p))
}

/// Configuration of the scan + golden-section search for `C_{a,b}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BracketSearch {
    /// Log-spaced samples in the initial scan.
    pub scan_points: usize,
    /// Target width of the refined interval in `ln p`.
    pub log_tol: f64,
    pub max_refinements: usize,
    /// Log-spaced samples in the certificate pass.
    pub certify_points: usize,
    /// Relative slack allowed between certificate samples and the minimum.
    pub certify_tol: f64,
}

impl Default for BracketSearch {
    fn default() -> Self {
        Self {
            scan_points: 20_000,
            log_tol: 1e-10,
            max_refinements: 300,
            certify_points: 1_000_000,
            certify_tol: 1e-9,
        }
    }
}

/// Certified lower bound of `|λ_{a,b}|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub minimizer: f64,
    pub bracket: (f64, f64),
    /// Smallest modulus seen by the certificate pass.
    pub certificate_min: f64,
}

/// Search interval for the minimizer of `|λ_{a,b}(p)|` over `p > 0`.
pub fn default_bracket(a: f64, b: f64) -> (f64, f64) {
    let ea = a.exp();
    let hi = 1e2_f64.max(10.0 * ea).max(10.0 / b.abs());
    (1e-6 * ea, hi)
}

// Squared modulus in the variable t = ln p.
fn modulus_sq_log(t: f64, a: f64, b: f64) -> f64 {
    let re = t - a;
    let im = b * t.exp();
    re * re + im * im
}

fn log_spaced(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    let (tlo, thi) = (lo.ln(), hi.ln());
    tlo + (thi - tlo) * (i as f64) / ((n - 1) as f64)
}

/// Minimum over `p > 0` of `sqrt(ln²(p/e^a) + b²p²)`.
pub fn compute_lower_bound(a: f64, b: f64, search: &BracketSearch) -> Result<LowerBound> {
    if !a.is_finite() {
        return Err(Error::validation("a", "must be finite"));
    }
    if !b.is_finite() || b == 0.0 {
        return Err(Error::validation("b", "must be finite and nonzero"));
    }
    if search.scan_points < 3 || search.certify_points < 2 {
        return Err(Error::validation("search", "too few sample points"));
    }
    let (lo, hi) = default_bracket(a, b);
    let n = search.scan_points;

    let (imin, _) = (0..n)
        .map(|i| (i, modulus_sq_log(log_spaced(lo, hi, n, i), a, b)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if imin == 0 || imin == n - 1 {
        return Err(Error::BracketFailure {
            lo,
            hi,
            reason: "minimum of the scan lies on the bracket boundary".into(),
        });
    }

    // Golden-section refinement on [t_{i-1}, t_{i+1}].
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut left = log_spaced(lo, hi, n, imin - 1);
    let mut right = log_spaced(lo, hi, n, imin + 1);
    let mut x1 = right - inv_phi * (right - left);
    let mut x2 = left + inv_phi * (right - left);
    let mut f1 = modulus_sq_log(x1, a, b);
    let mut f2 = modulus_sq_log(x2, a, b);
    let mut steps = 0;
    while right - left > search.log_tol {
        if steps == search.max_refinements {
            return Err(Error::BracketFailure {
                lo,
                hi,
                reason: format!(
                    "interval width {:e} after {steps} refinements",
                    right - left
                ),
            });
        }
        if f1 < f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - inv_phi * (right - left);
            f1 = modulus_sq_log(x1, a, b);
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + inv_phi * (right - left);
            f2 = modulus_sq_log(x2, a, b);
        }
        steps += 1;
    }
    let t_star = 0.5 * (left + right);
    let value = modulus_sq_log(t_star, a, b).min(f1).min(f2).sqrt();

    let m = search.certify_points;
    let certificate_min = (0..m)
        .into_par_iter()
        .map(|i| modulus_sq_log(log_spaced(lo, hi, m, i), a, b))
        .min_by(|x, y| x.total_cmp(y))
        .map(f64::sqrt)
        .unwrap_or(f64::INFINITY);
    if certificate_min < value * (1.0 - search.certify_tol) {
        return Err(Error::BracketFailure {
            lo,
            hi,
            reason: format!("certificate sample {certificate_min} undercuts refined minimum {value}"),
        });
    }
    if !(value > 0.0) {
        return Err(Error::DegenerateModel(format!(
            "lower bound {value} is not positive"
        )));
    }

    Ok(LowerBound {
        value: value.min(certificate_min),
        minimizer: t_star.exp(),
        bracket: (lo, hi),
        certificate_min,
    })
}

/// Constants `a`, `b` of the operator together with the certified `C_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    a: f64,
    b: f64,
    c_ab: f64,
}

impl OperatorParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Self::with_search(a, b, &BracketSearch::default())
    }

    pub fn with_search(a: f64, b: f64, search: &BracketSearch) -> Result<Self> {
        let bound = compute_lower_bound(a, b, search)?;
        Ok(Self {
            a,
            b,
            c_ab: bound.value,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Certified lower bound `C_{a,b}` of `|λ_{a,b}|`.
    pub fn c_ab(&self) -> f64 {
        self.c_ab
    }

    pub fn symbol(&self, p: f64) -> SymbolValue {
        symbol_lambda(p, self.a, self.b)
    }
}

/// `ρ C / (M ‖𝒦‖₁ (‖u₀‖₂ + 1))`, the largest admissible coupling.
pub fn epsilon_max(rho: f64, c_ab: f64, m: f64, kernel_l1: f64, u0_l2: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::validation("rho", "must lie in (0, 1]"));
    }
    if !(c_ab > 0.0) || !c_ab.is_finite() {
        return Err(Error::validation("c_ab", "must be positive and finite"));
    }
    if !(u0_l2 >= 0.0) || !u0_l2.is_finite() {
        return Err(Error::validation("u0_l2", "must be nonnegative and finite"));
    }
    if m == 0.0 {
        return Err(Error::DegenerateModel("nonlinearity bound M is zero".into()));
    }
    if kernel_l1 == 0.0 {
        return Err(Error::DegenerateModel("kernel has zero L1 norm".into()));
    }
    if !(m > 0.0) || !(kernel_l1 > 0.0) {
        return Err(Error::validation("M/kernel_l1", "must be positive"));
    }
    Ok(rho * c_ab / (m * kernel_l1 * (u0_l2 + 1.0)))
}

/// Contraction rate `σ = ε M ‖𝒦‖₁ / C`.
pub fn sigma_rate(epsilon: f64, m: f64, kernel_l1: f64, c_ab: f64) -> f64 {
    epsilon * m * kernel_l1 / c_ab
}

/// All constants entering the admissibility condition and the contraction rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionConstants {
    pub epsilon: f64,
    pub rho: f64,
    pub m: f64,
    pub kernel_l1: f64,
    pub u0_l2: f64,
    pub c_ab: f64,
    pub sigma: f64,
    pub epsilon_max: f64,
}

impl ContractionConstants {
    pub fn new(
        epsilon: f64,
        rho: f64,
        m: f64,
        kernel_l1: f64,
        u0_l2: f64,
        c_ab: f64,
    ) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::validation("epsilon", "must be nonnegative and finite"));
        }
        let epsilon_max = epsilon_max(rho, c_ab, m, kernel_l1, u0_l2)?;
        Ok(Self {
            epsilon,
            rho,
            m,
            kernel_l1,
            u0_l2,
            c_ab,
            sigma: sigma_rate(epsilon, m, kernel_l1, c_ab),
            epsilon_max,
        })
    }

    pub fn is_admissible(&self) -> bool {
        self.epsilon <= self.epsilon_max
    }

    /// Upper bound `ε ‖𝒦‖₁ M (‖u₀‖₂ + 1) / C` on the norm of any image of the ball.
    pub fn image_bound(&self) -> f64 {
        self.epsilon * self.kernel_l1 * self.m * (self.u0_l2 + 1.0) / self.c_ab
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::Admissibility {
                epsilon: self.epsilon,
                epsilon_max: self.epsilon_max,
            })
        }
    }
}
