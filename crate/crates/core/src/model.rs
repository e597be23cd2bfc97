//! Sources, kernels and nonlinearities with closed-form constants.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpectralGrid};

fn one() -> f64 {
    1.0
}

/// Convolution kernel `𝒦`, a weighted probability density.
///
/// `gaussian` is sampled pointwise. `laplace` and `box` are not smooth, so
/// their samples are cell averages over `[x − dx/2, x + dx/2]`; the discrete
/// `l1` then equals the analytic one up to the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Gaussian {
        width: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    Laplace {
        rate: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    Box {
        halfwidth: f64,
        #[serde(default = "one")]
        weight: f64,
    },
}

impl KernelSpec {
    pub fn gaussian(width: f64) -> Self {
        KernelSpec::Gaussian { width, weight: 1.0 }
    }

    pub fn laplace(rate: f64) -> Self {
        KernelSpec::Laplace { rate, weight: 1.0 }
    }

    pub fn boxcar(halfwidth: f64) -> Self {
        KernelSpec::Box {
            halfwidth,
            weight: 1.0,
        }
    }

    fn weight(&self) -> f64 {
        match *self {
            KernelSpec::Gaussian { weight, .. }
            | KernelSpec::Laplace { weight, .. }
            | KernelSpec::Box { weight, .. } => weight,
        }
    }

    /// Analytic `‖𝒦‖₁`.
    pub fn l1_norm(&self) -> f64 {
        self.weight().abs()
    }

    pub fn validate(&self) -> Result<()> {
        let (name, shape) = match *self {
            KernelSpec::Gaussian { width, .. } => ("kernel.width", width),
            KernelSpec::Laplace { rate, .. } => ("kernel.rate", rate),
            KernelSpec::Box { halfwidth, .. } => ("kernel.halfwidth", halfwidth),
        };
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::validation(name, "must be positive and finite"));
        }
        let w = self.weight();
        if !w.is_finite() {
            return Err(Error::validation("kernel.weight", "must be finite"));
        }
        if w == 0.0 {
            return Err(Error::DegenerateModel("kernel weight is zero".into()));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Arc<SpectralGrid>) -> Result<GridFunction> {
        self.validate()?;
        let dx = grid.dx();
        let k = match *self {
            KernelSpec::Gaussian { width, weight } => {
                let c = weight / ((2.0 * PI).sqrt() * width);
                GridFunction::from_fn(grid, |x| c * (-x * x / (2.0 * width * width)).exp())
            }
            KernelSpec::Laplace { rate, weight } => {
                // ∫₀^y (α/2) e^{−α|s|} ds
                let cdf = |y: f64| -0.5 * y.signum() * (-rate * y.abs()).exp_m1();
                GridFunction::from_fn(grid, |x| {
                    weight * (cdf(x + 0.5 * dx) - cdf(x - 0.5 * dx)) / dx
                })
            }
            KernelSpec::Box { halfwidth, weight } => GridFunction::from_fn(grid, |x| {
                let lo = (x - 0.5 * dx).max(-halfwidth);
                let hi = (x + 0.5 * dx).min(halfwidth);
                weight * (hi - lo).max(0.0) / (2.0 * halfwidth * dx)
            }),
        };
        if k.norms().linf == 0.0 {
            return Err(Error::DegenerateModel(
                "sampled kernel vanishes on the grid".into(),
            ));
        }
        Ok(k)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Caller-supplied nonlinearity with a caller-supplied derivative bound.
#[derive(Clone)]
pub struct CustomNonlinearity {
    name: String,
    g: ScalarFn,
    dg: ScalarFn,
    m: f64,
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNonlinearity")
            .field("name", &self.name)
            .field("m", &self.m)
            .finish()
    }
}

impl PartialEq for CustomNonlinearity {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.m == other.m
    }
}

/// Nonlinearity `g` with `g(0) = 0` and `sup |g′| = M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// `β sin z`
    ScaledSine { beta: f64 },
    /// `β z / (1 + z²)`
    Rational { beta: f64 },
    /// `β tanh z`
    Tanh { beta: f64 },
    #[serde(skip)]
    Custom(CustomNonlinearity),
}

/// Interval and density used to verify derivative bounds by sampling.
pub const LIPSCHITZ_CHECK_RANGE: (f64, f64) = (-50.0, 50.0);
pub const LIPSCHITZ_CHECK_POINTS: usize = 100_001;

impl NonlinearitySpec {
    pub fn scaled_sine(beta: f64) -> Self {
        NonlinearitySpec::ScaledSine { beta }
    }

    pub fn rational(beta: f64) -> Self {
        NonlinearitySpec::Rational { beta }
    }

    pub fn tanh(beta: f64) -> Self {
        NonlinearitySpec::Tanh { beta }
    }

    /// Wraps a user nonlinearity after checking `g(0) = 0` and that the
    /// sampled `|g′|` never exceeds the claimed `m`.
    pub fn custom(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m: f64,
    ) -> Result<Self> {
        let spec = NonlinearitySpec::Custom(CustomNonlinearity {
            name: name.into(),
            g: Arc::new(g),
            dg: Arc::new(dg),
            m,
        });
        spec.validate()?;
        let (lo, hi) = LIPSCHITZ_CHECK_RANGE;
        let sampled = spec.sampled_derivative_sup(lo, hi, LIPSCHITZ_CHECK_POINTS);
        if sampled > m {
            return Err(Error::validation(
                "nonlinearity.m",
                format!("sampled sup |g'| = {sampled} exceeds the supplied bound {m}"),
            ));
        }
        Ok(spec)
    }

    pub fn family_name(&self) -> &str {
        match self {
            NonlinearitySpec::ScaledSine { .. } => "scaled_sine",
            NonlinearitySpec::Rational { .. } => "rational",
            NonlinearitySpec::Tanh { .. } => "tanh",
            NonlinearitySpec::Custom(c) => &c.name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NonlinearitySpec::ScaledSine { beta }
            | NonlinearitySpec::Rational { beta }
            | NonlinearitySpec::Tanh { beta } => {
                if !(*beta > 0.0) || !beta.is_finite() {
                    return Err(Error::validation(
                        "nonlinearity.beta",
                        "must be positive and finite",
                    ));
                }
            }
            NonlinearitySpec::Custom(c) => {
                if !(c.m > 0.0) || !c.m.is_finite() {
                    return Err(Error::validation("nonlinearity.m", "must be positive and finite"));
                }
                if (c.g)(0.0) != 0.0 {
                    return Err(Error::validation("nonlinearity", "g(0) must be exactly 0"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            NonlinearitySpec::ScaledSine { beta } => beta * z.sin(),
            NonlinearitySpec::Rational { beta } => beta * z / (1.0 + z * z),
            NonlinearitySpec::Tanh { beta } => beta * z.tanh(),
            NonlinearitySpec::Custom(c) => (c.g)(z),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            NonlinearitySpec::ScaledSine { beta } => beta * z.cos(),
            NonlinearitySpec::Rational { beta } => {
                let d = 1.0 + z * z;
                beta * (1.0 - z * z) / (d * d)
            }
            NonlinearitySpec::Tanh { beta } => {
                let c = z.cosh();
                beta / (c * c)
            }
            NonlinearitySpec::Custom(c) => (c.dg)(z),
        }
    }

    /// Analytic `M = sup |g′|`.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            // sup|cos| = 1, sup sech² = 1, and (1 − z²)/(1 + z²)² peaks at z = 0.
            NonlinearitySpec::ScaledSine { beta }
            | NonlinearitySpec::Rational { beta }
            | NonlinearitySpec::Tanh { beta } => *beta,
            NonlinearitySpec::Custom(c) => c.m,
        }
    }

    /// Maximum of `|g′|` on `n` equispaced points of `[lo, hi]`.
    pub fn sampled_derivative_sup(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let step = (hi - lo) / (n.max(2) - 1) as f64;
        (0..n.max(2))
            .map(|i| self.derivative(lo + step * i as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Closed-form `sup |g₁′ − g₂′|` when both belong to the same shipped family.
    pub fn derivative_gap_analytic(&self, other: &NonlinearitySpec) -> Option<f64> {
        use NonlinearitySpec::*;
        match (self, other) {
            (ScaledSine { beta: b1 }, ScaledSine { beta: b2 })
            | (Rational { beta: b1 }, Rational { beta: b2 })
            | (Tanh { beta: b1 }, Tanh { beta: b2 }) => Some((b1 - b2).abs()),
            _ => None,
        }
    }

    /// Pointwise `g(u)` on the real part of `u`.
    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        u.map_real(|z| self.eval(z))
    }
}

/// Source term `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// `A exp(−(x − c)² / (2w²))`
    GaussianBump {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `A [exp(−(x − c)²/(2w²)) − r⁻¹ exp(−(x − c)²/(2r²w²))]`, zero mean.
    DifferenceOfGaussians {
        center: f64,
        width: f64,
        ratio: f64,
        amplitude: f64,
    },
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        let (width, amplitude) = match *self {
            SourceSpec::GaussianBump {
                width, amplitude, ..
            } => (width, amplitude),
            SourceSpec::DifferenceOfGaussians {
                width,
                ratio,
                amplitude,
                ..
            } => {
                if !(ratio > 0.0) || ratio == 1.0 || !ratio.is_finite() {
                    return Err(Error::validation(
                        "source.ratio",
                        "must be positive, finite and different from 1",
                    ));
                }
                (width, amplitude)
            }
        };
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::validation("source.width", "must be positive and finite"));
        }
        if amplitude == 0.0 || !amplitude.is_finite() {
            return Err(Error::validation("source.amplitude", "must be nonzero and finite"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SourceSpec::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let s = (x - center) / width;
                amplitude * (-0.5 * s * s).exp()
            }
            SourceSpec::DifferenceOfGaussians {
                center,
                width,
                ratio,
                amplitude,
            } => {
                let s = (x - center) / width;
                let t = s / ratio;
                amplitude * ((-0.5 * s * s).exp() - (-0.5 * t * t).exp() / ratio)
            }
        }
    }

    pub fn sample(&self, grid: &Arc<SpectralGrid>) -> Result<GridFunction> {
        self.validate()?;
        let f = GridFunction::from_fn(grid, |x| self.eval(x));
        if f.l2() == 0.0 {
            return Err(Error::DegenerateModel("source vanishes on the grid".into()));
        }
        Ok(f)
    }
}

/// Everything besides the operator that defines one instance of the equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub source: SourceSpec,
    pub kernel: KernelSpec,
    pub nonlinearity: NonlinearitySpec,
    pub epsilon: f64,
    pub rho: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.kernel.validate()?;
        self.nonlinearity.validate()?;
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::validation("epsilon", "must be nonnegative and finite"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::validation("rho", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_nonlinearity(&self, nonlinearity: NonlinearitySpec) -> Self {
        Self {
            nonlinearity,
            ..self.clone()
        }
    }
}
