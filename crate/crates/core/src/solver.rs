//! Linear Fourier-division solve and the Picard iteration for the perturbation.
//!
//! Sign convention throughout: `L u = ½ ln(−d²/dx²) u − b u′ − a u`, the
//! linear problem is `L u₀ = f`, and the perturbation solves
//! `L u_p = ε 𝒦 ⋆ g(u₀ + u_p)`. At `p = 0` the symbol is infinite and its
//! reciprocal is taken to be zero, so that mode is dropped from every
//! solution and every residual.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction, SpectralGrid};
use crate::model::{ModelSpec, NonlinearitySpec};
use crate::operator::{ContractionConstants, OperatorParams};

/// Numerical tolerances shared by the solver entry points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub fp_tol: f64,
    pub linear_residual_tol: f64,
    /// Boundary samples above `decay_tol · ‖f‖∞` raise a warning.
    pub decay_tol: f64,
    pub zero_mode_tol: f64,
    /// Imaginary part allowed on real-valued results, relative to their sup norm.
    pub imag_tol: f64,
    pub max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fp_tol: 1e-10,
            linear_residual_tol: 1e-8,
            decay_tol: 1e-10,
            zero_mode_tol: 1e-10,
            imag_tol: 1e-10,
            max_iters: 10_000,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fp_tol", self.fp_tol),
            ("linear_residual_tol", self.linear_residual_tol),
            ("decay_tol", self.decay_tol),
            ("zero_mode_tol", self.zero_mode_tol),
            ("imag_tol", self.imag_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(
                    format!("tolerances.{name}"),
                    "must be positive and finite",
                ));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::validation("tolerances.max_iters", "must be positive"));
        }
        Ok(())
    }
}

/// Non-fatal conditions noticed during a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// The input does not decay at the box boundary.
    SlowDecay { ratio: f64 },
    /// The source has a visible `p = 0` component, which the solve discards.
    NontrivialZeroMode { magnitude: f64, relative: f64 },
}

/// The Fourier multiplier `λ_{a,b}` tabulated on one grid.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    params: OperatorParams,
    grid: Arc<SpectralGrid>,
    symbol: Vec<Complex64>,
    reciprocal: Vec<Complex64>,
    zero_slot: usize,
}

impl LinearOperator {
    pub fn new(params: OperatorParams, grid: &Arc<SpectralGrid>) -> Self {
        let n = grid.n_points();
        let mut symbol = Vec::with_capacity(n);
        let mut reciprocal = Vec::with_capacity(n);
        for k in 0..n {
            let s = params.symbol(grid.freq(k));
            // The infinite symbol never multiplies anything: its mode is
            // either rejected or dropped.
            symbol.push(s.finite().unwrap_or(Complex64::new(0.0, 0.0)));
            reciprocal.push(s.reciprocal());
        }
        Self {
            params,
            grid: Arc::clone(grid),
            symbol,
            reciprocal,
            zero_slot: 0,
        }
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Symbol value in storage slot `k`; zero stands in for the infinite value at `p = 0`.
    pub fn symbol_at(&self, k: usize) -> Complex64 {
        self.symbol[k]
    }

    pub fn reciprocal_at(&self, k: usize) -> Complex64 {
        self.reciprocal[k]
    }

    fn check_grid(&self, u: &GridFunction) -> Result<()> {
        if self.grid.same_as(u.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                n_left: self.grid.n_points(),
                len_left: self.grid.length(),
                n_right: u.grid().n_points(),
                len_right: u.grid().length(),
            })
        }
    }

    /// `L u` through the symbol. Inputs with a nonzero `p = 0` mode are
    /// outside the operator's domain and are refused.
    pub fn apply(&self, u: &GridFunction, zero_mode_tol: f64) -> Result<GridFunction> {
        self.check_grid(u)?;
        let uh = u.ft_forward()?;
        let magnitude = uh.values()[self.zero_slot].norm();
        let tol = zero_mode_tol * uh.l2();
        if magnitude > tol {
            return Err(Error::ZeroModePresent { magnitude, tol });
        }
        uh.multiply_modes(|k| self.symbol[k]).ft_inverse()
    }

    /// Spectral division `f̂ / λ`, on the frequency side.
    pub fn divide(&self, fh: &GridFunction) -> GridFunction {
        fh.multiply_modes(|k| self.reciprocal[k])
    }

    /// `‖(λ û − r̂)‖₂` with the `p = 0` mode excluded; both inputs frequency-side.
    pub fn residual_hat(&self, uh: &GridFunction, rhs_h: &GridFunction) -> f64 {
        let dp = self.grid.dp();
        let sq: f64 = (0..self.grid.n_points())
            .filter(|&k| k != self.zero_slot)
            .map(|k| (self.symbol[k] * uh.values()[k] - rhs_h.values()[k]).norm_sqr())
            .sum();
        (sq * dp).sqrt()
    }

    pub fn solve(&self, f: &GridFunction, tol: &Tolerances) -> Result<LinearSolveResult> {
        self.check_grid(f)?;
        let mut warnings = Vec::new();
        let decay = f.boundary_decay_ratio();
        if decay > tol.decay_tol {
            warnings.push(Warning::SlowDecay { ratio: decay });
        }
        let f = f.clone().into_real(tol.imag_tol)?;
        let fh = f.ft_forward()?;
        let f_l2 = f.l2();
        let zero = fh.values()[self.zero_slot].norm();
        let fh_l2 = fh.l2();
        if zero > tol.zero_mode_tol * fh_l2 {
            warnings.push(Warning::NontrivialZeroMode {
                magnitude: zero,
                relative: zero / fh_l2,
            });
        }
        let u0 = self.divide(&fh).ft_inverse_real(tol.imag_tol)?;
        let residual_l2 = self.residual_hat(&u0.ft_forward()?, &fh);
        let scale = if f_l2 > 0.0 { f_l2 } else { 1.0 };
        let residual_rel = residual_l2 / scale;
        if residual_rel > tol.linear_residual_tol {
            return Err(Error::ResidualTooLarge {
                residual: residual_rel,
                tol: tol.linear_residual_tol,
            });
        }
        let u0_l2 = u0.l2();
        Ok(LinearSolveResult {
            u0,
            residual_l2,
            residual_rel,
            u0_l2,
            warnings,
        })
    }
}

/// Solution of `L u₀ = f`.
#[derive(Debug, Clone)]
pub struct LinearSolveResult {
    pub u0: GridFunction,
    /// `‖L u₀ − f‖₂` over the nonzero modes.
    pub residual_l2: f64,
    /// `residual_l2 / ‖f‖₂` (absolute when `f ≡ 0`).
    pub residual_rel: f64,
    pub u0_l2: f64,
    pub warnings: Vec<Warning>,
}

/// `L u` with the default zero-mode tolerance.
pub fn apply_operator(u: &GridFunction, params: &OperatorParams) -> Result<GridFunction> {
    LinearOperator::new(*params, u.grid()).apply(u, Tolerances::default().zero_mode_tol)
}

/// Solves `L u₀ = f` by Fourier division.
pub fn solve_linear(f: &GridFunction, params: &OperatorParams) -> Result<LinearSolveResult> {
    LinearOperator::new(*params, f.grid()).solve(f, &Tolerances::default())
}

/// The map `v ↦ t_g v`, with everything independent of `v` precomputed.
///
/// `t_g v` solves `L u = ε 𝒦 ⋆ g(u₀ + v)`, i.e.
/// `û = ε √(2π) 𝒦̂ Ĝ / λ` with `G = g(u₀ + v)`.
#[derive(Debug, Clone)]
pub struct AuxiliaryMap {
    u0: GridFunction,
    nonlinearity: NonlinearitySpec,
    multiplier: Vec<Complex64>,
    rho: f64,
    imag_tol: f64,
}

impl AuxiliaryMap {
    pub fn new(
        op: &LinearOperator,
        u0: &GridFunction,
        model: &ModelSpec,
        imag_tol: f64,
    ) -> Result<Self> {
        op.check_grid(u0)?;
        let kh = model.kernel.sample(op.grid())?.ft_forward()?;
        let s = model.epsilon * (2.0 * PI).sqrt();
        let multiplier = (0..op.grid().n_points())
            .map(|k| kh.values()[k] * op.reciprocal_at(k) * s)
            .collect();
        Ok(Self {
            u0: u0.clone(),
            nonlinearity: model.nonlinearity.clone(),
            multiplier,
            rho: model.rho,
            imag_tol,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Pointwise `G = g(u₀ + v)`.
    pub fn nonlinear_term(&self, v: &GridFunction) -> Result<GridFunction> {
        Ok(self.nonlinearity.apply(&self.u0.add(v)?))
    }

    /// `t_g v` without the ball check.
    pub fn apply_unchecked(&self, v: &GridFunction) -> Result<GridFunction> {
        let gh = self.nonlinear_term(v)?.ft_forward()?;
        gh.multiply_modes(|k| self.multiplier[k])
            .ft_inverse_real(self.imag_tol)
    }

    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        let norm = v.l2();
        // Rescaled ball samples can land a few ulps outside.
        if norm > self.rho * (1.0 + 1e-12) {
            return Err(Error::BallViolation {
                norm,
                rho: self.rho,
            });
        }
        self.apply_unchecked(v)
    }
}

/// One application of `t_g`, building the map from scratch.
pub fn apply_t_g(
    v: &GridFunction,
    u0: &GridFunction,
    model: &ModelSpec,
    params: &OperatorParams,
) -> Result<GridFunction> {
    let op = LinearOperator::new(*params, v.grid());
    AuxiliaryMap::new(&op, u0, model, Tolerances::default().imag_tol)?.apply(v)
}

/// `‖L u − f − ε 𝒦 ⋆ g(u)‖₂` over the nonzero modes.
pub fn residual_main(u: &GridFunction, model: &ModelSpec, params: &OperatorParams) -> Result<f64> {
    let grid = u.grid();
    let op = LinearOperator::new(*params, grid);
    let f = model.source.sample(grid)?;
    let kh = model.kernel.sample(grid)?.ft_forward()?;
    let gh = model.nonlinearity.apply(u).ft_forward()?;
    let s = model.epsilon * (2.0 * PI).sqrt();
    let rhs = f
        .ft_forward()?
        .zip_with(&kh.zip_with(&gh, |a, b| a * b * s)?, |x, y| x + y)?;
    Ok(op.residual_hat(&u.ft_forward()?, &rhs))
}

/// Options for [`solve_fixed_point`].
#[derive(Debug, Clone, Default)]
pub struct FixedPointOptions {
    pub tolerances: Tolerances,
    /// Starting iterate; zero when absent. Must lie in the ball.
    pub initial: Option<GridFunction>,
    /// Keep every iterate in the result (memory grows with the iteration count).
    pub keep_iterates: bool,
}

/// Iteration trace of a fixed-point solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    #[serde(rename = "sigma")]
    pub sigma_theoretical: f64,
    pub increments: Vec<f64>,
    #[serde(rename = "ratios")]
    pub observed_ratios: Vec<f64>,
    #[serde(rename = "residual")]
    pub main_residual_l2: f64,
    pub u0_l2: f64,
    pub up_l2: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
    pub rho: f64,
    pub c_ab: f64,
    pub kernel_l1: f64,
    pub m: f64,
    /// `ε ‖𝒦‖₁ M (‖u₀‖₂ + 1) / C`.
    pub image_bound: f64,
    /// `‖u_p − t_g u_p‖₂` at the returned iterate.
    pub fixed_point_residual: f64,
    /// `σ/(1 − σ)` times the last increment.
    pub a_posteriori_bound: f64,
    pub linear_residual_l2: f64,
    pub source_l2: f64,
    pub fp_tol: f64,
    pub threads: usize,
    pub warnings: Vec<Warning>,
}

impl SolveReport {
    /// Largest observed ratio minus `σ`; nonpositive when the contraction estimate holds.
    pub fn worst_ratio_excess(&self) -> f64 {
        self.observed_ratios
            .iter()
            .map(|r| r - self.sigma_theoretical)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ratios_within(&self, ratio_tol: f64) -> bool {
        self.observed_ratios
            .iter()
            .all(|&r| r <= self.sigma_theoretical + ratio_tol)
    }

    /// Post-solve checks of the contraction estimate, the ball bounds and the residuals.
    pub fn invariant_checks(&self) -> Vec<InvariantCheck> {
        let max_ratio = self.observed_ratios.iter().copied().fold(0.0, f64::max);
        vec![
            InvariantCheck::new("ratio_le_sigma", max_ratio, self.sigma_theoretical + RATIO_TOL),
            InvariantCheck::new("up_in_ball", self.up_l2, self.rho),
            InvariantCheck::new("up_le_image_bound", self.up_l2, self.image_bound + 1e-8),
            InvariantCheck::new("fixed_point_residual", self.fixed_point_residual, self.fp_tol),
            InvariantCheck::new(
                "main_residual",
                self.main_residual_l2,
                MAIN_RESIDUAL_TOL * (self.source_l2 + 1.0),
            ),
        ]
    }
}

/// Slack allowed between observed step ratios and `σ`.
pub const RATIO_TOL: f64 = 1e-6;
/// Main-equation residual limit, relative to `‖f‖₂ + 1`.
pub const MAIN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl InvariantCheck {
    fn new(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            passed: value <= limit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub u0: GridFunction,
    pub u_p: GridFunction,
    /// `u₀ + u_p`
    pub u: GridFunction,
    pub constants: ContractionConstants,
    pub report: SolveReport,
    /// `v⁰, v¹, …` when requested.
    pub iterates: Option<Vec<GridFunction>>,
}

/// Linear solve plus the admissibility constants, without iterating.
pub fn prepare(
    model: &ModelSpec,
    params: &OperatorParams,
    grid: &Arc<SpectralGrid>,
    tol: &Tolerances,
) -> Result<(LinearOperator, LinearSolveResult, ContractionConstants)> {
    model.validate()?;
    tol.validate()?;
    let op = LinearOperator::new(*params, grid);
    let f = model.source.sample(grid)?;
    let linear = op.solve(&f, tol)?;
    let constants = ContractionConstants::new(
        model.epsilon,
        model.rho,
        model.nonlinearity.lipschitz_bound(),
        model.kernel.l1_norm(),
        linear.u0_l2,
        params.c_ab(),
    )?;
    Ok((op, linear, constants))
}

/// Picard iteration `v^{k+1} = t_g v^k` from `v⁰ = 0` (or the supplied start).
///
/// Stops once `‖v^{k+1} − v^k‖₂ ≤ fp_tol (1 − σ)/σ`, which bounds the distance
/// to the fixed point by `fp_tol`. Refuses to run when `ε > ε_max`.
pub fn solve_fixed_point(
    model: &ModelSpec,
    params: &OperatorParams,
    grid: &Arc<SpectralGrid>,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult> {
    let tol = opts.tolerances;
    let (op, linear, constants) = prepare(model, params, grid, &tol)?;
    constants.ensure_admissible()?;
    let map = AuxiliaryMap::new(&op, &linear.u0, model, tol.imag_tol)?;
    let sigma = constants.sigma;

    let mut v = match &opts.initial {
        Some(v0) => v0.clone().into_real(tol.imag_tol)?,
        None => GridFunction::zeros(grid, Domain::Space),
    };
    let mut iterates = opts.keep_iterates.then(|| vec![v.clone()]);
    let mut increments: Vec<f64> = Vec::new();

    if sigma > 0.0 {
        let threshold = tol.fp_tol * (1.0 - sigma) / sigma;
        loop {
            if increments.len() == tol.max_iters {
                return Err(Error::MaxItersExceeded {
                    iterations: tol.max_iters,
                    last_increment: increments.last().copied().unwrap_or(f64::NAN),
                });
            }
            let next = map.apply(&v)?;
            let inc = next.sub(&v)?.l2();
            increments.push(inc);
            v = next;
            if let Some(it) = iterates.as_mut() {
                it.push(v.clone());
            }
            if inc <= threshold {
                break;
            }
        }
    } else if opts.initial.is_some() {
        // ε = 0: the map is identically zero.
        let next = map.apply(&v)?;
        increments.push(next.sub(&v)?.l2());
        v = next;
        if let Some(it) = iterates.as_mut() {
            it.push(v.clone());
        }
    }

    let observed_ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let fixed_point_residual = map.apply_unchecked(&v)?.sub(&v)?.l2();
    let u = linear.u0.add(&v)?;
    let main_residual_l2 = residual_main(&u, model, params)?;
    let last = increments.last().copied().unwrap_or(0.0);
    let a_posteriori_bound = if sigma > 0.0 {
        sigma / (1.0 - sigma) * last
    } else {
        0.0
    };

    let report = SolveReport {
        iterations: increments.len(),
        sigma_theoretical: sigma,
        increments,
        observed_ratios,
        main_residual_l2,
        u0_l2: linear.u0_l2,
        up_l2: v.l2(),
        epsilon: constants.epsilon,
        epsilon_max: constants.epsilon_max,
        rho: constants.rho,
        c_ab: constants.c_ab,
        kernel_l1: constants.kernel_l1,
        m: constants.m,
        image_bound: constants.image_bound(),
        fixed_point_residual,
        a_posteriori_bound,
        linear_residual_l2: linear.residual_l2,
        source_l2: model.source.sample(grid)?.l2(),
        fp_tol: tol.fp_tol,
        threads: rayon::current_num_threads(),
        warnings: linear.warnings.clone(),
    };
    Ok(FixedPointResult {
        u0: linear.u0,
        u: u.clone(),
        u_p: v,
        constants,
        report,
        iterates,
    })
}
