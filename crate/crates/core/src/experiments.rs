//! Numerical checks of the contraction estimate, the norm bound of the
//! perturbation, and continuity with respect to the nonlinearity.
//!
//! Every experiment is deterministic for a fixed configuration and seed: random
//! draws happen sequentially on one seeded stream, and parallel work is
//! collected in index order.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction, SpectralGrid};
use crate::model::{ModelSpec, NonlinearitySpec};
use crate::operator::{ContractionConstants, OperatorParams};
use crate::solver::{
    prepare, solve_fixed_point, AuxiliaryMap, FixedPointOptions, Tolerances,
};

/// Frequencies above this cutoff are damped out of random ball elements.
const BALL_FIELD_CUTOFF: f64 = 4.0;

/// Draws smooth, decaying random elements of the ball `{‖v‖₂ ≤ ρ}`.
///
/// Each draw is a band-limited Gaussian field (Hermitian spectrum with
/// Gaussian damping past [`BALL_FIELD_CUTOFF`]), multiplied by a Gaussian
/// envelope of width `L/8`, then rescaled to `‖v‖₂ = ρ·U` with `U ~ (0, 1]`.
pub struct BallSampler {
    grid: Arc<SpectralGrid>,
    rho: f64,
    rng: ChaCha8Rng,
}

impl BallSampler {
    pub fn new(grid: &Arc<SpectralGrid>, rho: f64, seed: u64) -> Self {
        Self {
            grid: Arc::clone(grid),
            rho,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self) -> GridFunction {
        let n = self.grid.n_points();
        let mut spec = GridFunction::zeros(&self.grid, Domain::Frequency);
        let dp = self.grid.dp();
        let kmax = ((3.0 * BALL_FIELD_CUTOFF / dp).ceil() as usize).min(n / 2 - 1);
        {
            let vals = spec.values_mut();
            for k in 1..=kmax {
                let p = dp * k as f64;
                let damp = (-(p / BALL_FIELD_CUTOFF).powi(2)).exp();
                let re: f64 = self.rng.sample(StandardNormal);
                let im: f64 = self.rng.sample(StandardNormal);
                let c = Complex64::new(re, im) * damp;
                vals[k] = c;
                vals[n - k] = c.conj();
            }
            let r0: f64 = self.rng.sample(StandardNormal);
            vals[0] = Complex64::new(r0, 0.0);
        }
        let width = self.grid.length() / 8.0;
        let field = spec
            .ft_inverse()
            .expect("frequency-side input")
            .map(|z| Complex64::new(z.re, 0.0));
        let shaped = GridFunction::from_values(
            &self.grid,
            Domain::Space,
            field
                .values()
                .iter()
                .zip(self.grid.nodes())
                .map(|(z, x)| Complex64::new(z.re * (-0.5 * (x / width).powi(2)).exp(), 0.0))
                .collect(),
        )
        .expect("matching length");
        let u: f64 = 1.0 - self.rng.random::<f64>();
        let norm = shaped.l2();
        if norm == 0.0 {
            return shaped;
        }
        shaped.scale(self.rho * u / norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub trial: usize,
    /// `‖v₁ − v₂‖₂`
    pub input_distance: f64,
    /// `‖t_g v₁ − t_g v₂‖₂`
    pub output_distance: f64,
    /// Output over input distance; zero when the inputs coincide.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionAudit {
    pub sigma: f64,
    pub constants: ContractionConstants,
    pub rows: Vec<AuditRow>,
}

impl ContractionAudit {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "trial,input_distance,output_distance,ratio,sigma")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.trial, r.input_distance, r.output_distance, r.ratio, self.sigma
            )?;
        }
        Ok(())
    }
}

/// Measures `t_g` on one pair.
pub fn audit_pair(
    map: &AuxiliaryMap,
    trial: usize,
    v1: &GridFunction,
    v2: &GridFunction,
) -> Result<AuditRow> {
    let input_distance = v1.sub(v2)?.l2();
    let output_distance = map.apply(v1)?.sub(&map.apply(v2)?)?.l2();
    let ratio = if input_distance > 0.0 {
        output_distance / input_distance
    } else {
        0.0
    };
    Ok(AuditRow {
        trial,
        input_distance,
        output_distance,
        ratio,
    })
}

/// Draws `trials` pairs from the ball and records how much `t_g` contracts them.
pub fn run_contraction_audit(
    model: &ModelSpec,
    params: &OperatorParams,
    grid: &Arc<SpectralGrid>,
    tol: &Tolerances,
    trials: usize,
    seed: u64,
) -> Result<ContractionAudit> {
    let (op, linear, constants) = prepare(model, params, grid, tol)?;
    constants.ensure_admissible()?;
    let map = AuxiliaryMap::new(&op, &linear.u0, model, tol.imag_tol)?;
    let mut sampler = BallSampler::new(grid, model.rho, seed);
    let pairs: Vec<(GridFunction, GridFunction)> =
        (0..trials).map(|_| (sampler.draw(), sampler.draw())).collect();
    let rows = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (v1, v2))| audit_pair(&map, i, v1, v2))
        .collect::<Result<Vec<_>>>()?;
    Ok(ContractionAudit {
        sigma: constants.sigma,
        constants,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub sigma: f64,
    pub up_l2: f64,
    /// `ε ‖𝒦‖₁ M (‖u₀‖₂ + 1) / C`
    pub bound: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Error kind when the row could not be solved.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub epsilon_max: f64,
    pub rows: Vec<SweepRow>,
}

impl EpsilonSweep {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,sigma,up_l2,bound,iterations,residual,error")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
                r.epsilon,
                r.sigma,
                r.up_l2,
                r.bound,
                r.iterations,
                r.residual,
                r.error.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }
}

/// One fixed-point solve per `ε`. Failing rows are recorded, not propagated.
pub fn run_epsilon_sweep(
    template: &ModelSpec,
    params: &OperatorParams,
    grid: &Arc<SpectralGrid>,
    tol: &Tolerances,
    epsilons: &[f64],
) -> Result<EpsilonSweep> {
    let (_, _, probe) = prepare(&template.with_epsilon(0.0), params, grid, tol)?;
    let opts = FixedPointOptions {
        tolerances: *tol,
        ..FixedPointOptions::default()
    };
    let rows = epsilons
        .par_iter()
        .map(|&epsilon| {
            let sigma = crate::operator::sigma_rate(epsilon, probe.m, probe.kernel_l1, probe.c_ab);
            let bound = epsilon * probe.kernel_l1 * probe.m * (probe.u0_l2 + 1.0) / probe.c_ab;
            match solve_fixed_point(&template.with_epsilon(epsilon), params, grid, &opts) {
                Ok(r) => SweepRow {
                    epsilon,
                    sigma,
                    up_l2: r.report.up_l2,
                    bound,
                    iterations: r.report.iterations,
                    residual: r.report.main_residual_l2,
                    error: None,
                },
                Err(e) => SweepRow {
                    epsilon,
                    sigma,
                    up_l2: f64::NAN,
                    bound,
                    iterations: 0,
                    residual: f64::NAN,
                    error: Some(e.kind().to_string()),
                },
            }
        })
        .collect();
    Ok(EpsilonSweep {
        epsilon_max: probe.epsilon_max,
        rows,
    })
}

/// Points used to sample `|g₁′ − g₂′|` over the realized solution range.
pub const DERIVATIVE_GAP_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityExperimentResult {
    pub g1: NonlinearitySpec,
    pub g2: NonlinearitySpec,
    /// `‖u₁ − u₂‖₂`
    pub lhs: f64,
    /// `ε/(1 − σ) · ‖𝒦‖₁/C · (‖u₀‖₂ + 1) · ‖g₁′ − g₂′‖∞`
    pub rhs: f64,
    pub slack: f64,
    /// Contraction rate with `M = max(M₁, M₂)`.
    pub sigma: f64,
    pub m: f64,
    pub derivative_gap: f64,
    pub derivative_gap_sampled: f64,
    pub derivative_gap_analytic: Option<f64>,
    /// Interval over which the gap was sampled.
    pub sample_range: (f64, f64),
    pub epsilon: f64,
    pub u0_l2: f64,
}

impl ContinuityExperimentResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "g1,g2,epsilon,sigma,derivative_gap,lhs,rhs,slack"
        )?;
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            describe(&self.g1),
            describe(&self.g2),
            self.epsilon,
            self.sigma,
            self.derivative_gap,
            self.lhs,
            self.rhs,
            self.slack
        )?;
        Ok(())
    }
}

fn describe(g: &NonlinearitySpec) -> String {
    match g {
        NonlinearitySpec::ScaledSine { beta }
        | NonlinearitySpec::Rational { beta }
        | NonlinearitySpec::Tanh { beta } => format!("{}({beta})", g.family_name()),
        NonlinearitySpec::Custom(_) => g.family_name().to_string(),
    }
}

/// `sup |g₁′ − g₂′|` on `n` equispaced points of `[lo, hi]`.
pub fn sampled_derivative_gap(
    g1: &NonlinearitySpec,
    g2: &NonlinearitySpec,
    lo: f64,
    hi: f64,
    n: usize,
) -> f64 {
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let z = lo + step * i as f64;
            (g1.derivative(z) - g2.derivative(z)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Solves with `g₁` and with `g₂` and compares the difference of the
/// solutions with the continuity bound.
///
/// `model_a` and `model_b` must agree on everything but the nonlinearity.
pub fn run_continuity(
    model_a: &ModelSpec,
    model_b: &ModelSpec,
    params: &OperatorParams,
    grid: &Arc<SpectralGrid>,
    tol: &Tolerances,
) -> Result<ContinuityExperimentResult> {
    if model_a.with_nonlinearity(model_b.nonlinearity.clone()) != *model_b {
        return Err(Error::validation(
            "model_b",
            "continuity models may differ only in the nonlinearity",
        ));
    }
    let m = model_a
        .nonlinearity
        .lipschitz_bound()
        .max(model_b.nonlinearity.lipschitz_bound());
    let (_, linear, probe) = prepare(model_a, params, grid, tol)?;
    let constants = ContractionConstants::new(
        model_a.epsilon,
        model_a.rho,
        m,
        probe.kernel_l1,
        linear.u0_l2,
        probe.c_ab,
    )?;
    constants.ensure_admissible()?;

    let opts = FixedPointOptions {
        tolerances: *tol,
        ..FixedPointOptions::default()
    };
    let r1 = solve_fixed_point(model_a, params, grid, &opts)?;
    let r2 = solve_fixed_point(model_b, params, grid, &opts)?;
    let lhs = r1.u.sub(&r2.u)?.l2();

    let realized = r2.u.re();
    let lo = realized.iter().copied().fold(0.0, f64::min) - 1.0;
    let hi = realized.iter().copied().fold(0.0, f64::max) + 1.0;
    let sampled = sampled_derivative_gap(
        &model_a.nonlinearity,
        &model_b.nonlinearity,
        lo,
        hi,
        DERIVATIVE_GAP_POINTS,
    );
    let analytic = model_a
        .nonlinearity
        .derivative_gap_analytic(&model_b.nonlinearity);
    let gap = analytic.map_or(sampled, |a| a.max(sampled));

    let sigma = constants.sigma;
    let rhs = model_a.epsilon / (1.0 - sigma) * constants.kernel_l1 / constants.c_ab
        * (linear.u0_l2 + 1.0)
        * gap;
    Ok(ContinuityExperimentResult {
        g1: model_a.nonlinearity.clone(),
        g2: model_b.nonlinearity.clone(),
        lhs,
        rhs,
        slack: rhs - lhs,
        sigma,
        m,
        derivative_gap: gap,
        derivative_gap_sampled: sampled,
        derivative_gap_analytic: analytic,
        sample_range: (lo, hi),
        epsilon: model_a.epsilon,
        u0_l2: linear.u0_l2,
    })
}

/// Provenance written next to every experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub grid: ManifestGrid,
    pub platform: Platform,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifestGrid {
    pub n_points: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Platform {
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub version: String,
}

impl Platform {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KernelSpec, SourceSpec};

    fn base(epsilon: f64) -> ModelSpec {
        ModelSpec {
            source: SourceSpec::GaussianBump {
                center: 0.0,
                width: 1.0,
                amplitude: 1.0,
            },
            kernel: KernelSpec::gaussian(1.0),
            nonlinearity: NonlinearitySpec::scaled_sine(1.0),
            epsilon,
            rho: 1.0,
        }
    }

    fn setup() -> (Arc<SpectralGrid>, OperatorParams, f64) {
        let g = SpectralGrid::new(1024, 40.0).unwrap();
        let p = OperatorParams::new(0.0, 1.0).unwrap();
        let (_, _, k) = prepare(&base(0.0), &p, &g, &Tolerances::default()).unwrap();
        (g, p, k.epsilon_max)
    }

    #[test]
    fn ball_samples_are_inside_and_deterministic() {
        let g = SpectralGrid::new(512, 30.0).unwrap();
        let mut s1 = BallSampler::new(&g, 0.5, 42);
        let mut s2 = BallSampler::new(&g, 0.5, 42);
        for _ in 0..20 {
            let a = s1.draw();
            let b = s2.draw();
            assert!(a.l2() <= 0.5 * (1.0 + 1e-12));
            assert!(a.l2() > 0.0);
            assert_eq!(a.values(), b.values());
            assert_eq!(a.max_abs_imag(), 0.0);
        }
    }

    #[test]
    fn identical_pair_has_zero_ratio() {
        let (g, p, emax) = setup();
        let model = base(0.5 * emax);
        let (op, lin, _) = prepare(&model, &p, &g, &Tolerances::default()).unwrap();
        let map = AuxiliaryMap::new(&op, &lin.u0, &model, 1e-10).unwrap();
        let v = BallSampler::new(&g, 1.0, 1).draw();
        let row = audit_pair(&map, 0, &v, &v).unwrap();
        assert_eq!(row.ratio, 0.0);
        assert_eq!(row.input_distance, 0.0);
    }

    #[test]
    fn audit_ratio_tracks_sigma_when_epsilon_halves() {
        let (g, p, emax) = setup();
        let tol = Tolerances::default();
        let full = run_contraction_audit(&base(0.5 * emax), &p, &g, &tol, 20, 42).unwrap();
        let half = run_contraction_audit(&base(0.25 * emax), &p, &g, &tol, 20, 42).unwrap();
        assert!(full.max_ratio() <= full.sigma + 1e-8);
        assert!((half.sigma - 0.5 * full.sigma).abs() < 1e-15);
        assert!(half.max_ratio() <= half.sigma + 1e-8);
    }

    #[test]
    fn audit_refuses_inadmissible_epsilon() {
        let (g, p, emax) = setup();
        let r = run_contraction_audit(&base(2.0 * emax), &p, &g, &Tolerances::default(), 3, 1);
        assert!(matches!(r, Err(Error::Admissibility { .. })));
    }

    #[test]
    fn sweep_records_rows_and_failures() {
        let (g, p, emax) = setup();
        let eps = [0.0, 0.25 * emax, 0.5 * emax, 1.5 * emax];
        let sweep = run_epsilon_sweep(&base(0.0), &p, &g, &Tolerances::default(), &eps).unwrap();
        assert_eq!(sweep.rows.len(), 4);
        assert_eq!(sweep.rows[0].up_l2, 0.0);
        for r in &sweep.rows[..3] {
            assert!(r.error.is_none());
            assert!(r.up_l2 <= r.bound + 1e-8);
        }
        assert_eq!(sweep.rows[3].error.as_deref(), Some("admissibility"));
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn continuity_of_identical_nonlinearities_is_trivial() {
        let (g, p, emax) = setup();
        let m = base(0.5 * emax);
        let r = run_continuity(&m, &m, &p, &g, &Tolerances::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.slack, 0.0);
    }

    #[test]
    fn continuity_rejects_models_differing_elsewhere() {
        let (g, p, emax) = setup();
        let a = base(0.5 * emax);
        let b = base(0.4 * emax);
        assert!(run_continuity(&a, &b, &p, &g, &Tolerances::default()).is_err());
    }

    #[test]
    fn derivative_gap_sampling() {
        let a = NonlinearitySpec::scaled_sine(1.0);
        let b = NonlinearitySpec::tanh(1.0);
        // Same 1001-point grid evaluated with numpy; the peak sits just below π.
        let s = sampled_derivative_gap(&a, &b, 0.0, std::f64::consts::PI, 1001);
        assert!((s - 1.007_555_176_016_602).abs() < 1e-12, "{s}");
        let c = std::f64::consts::PI.cosh();
        assert!(s > 1.0 + 1.0 / (c * c));
    }
}
