//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use logdrift::experiments::{run_contraction_audit, run_continuity, run_epsilon_sweep};
use logdrift::solver::prepare;
use logdrift::{
    apply_operator, convolve_direct, convolve_fft, solve_fixed_point, solve_linear, symbol_lambda,
    FixedPointOptions, GridFunction, KernelSpec, ModelSpec, NonlinearitySpec, OperatorParams,
    SourceSpec, SpectralGrid, Tolerances,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_model(epsilon: f64) -> ModelSpec {
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

struct Setup {
    grid: Arc<SpectralGrid>,
    params: OperatorParams,
    tol: Tolerances,
    epsilon_max: f64,
}

fn setup() -> Result<Setup, String> {
    let grid = SpectralGrid::new(4096, 80.0).map_err(|e| e.to_string())?;
    let params = OperatorParams::new(0.0, 1.0).map_err(|e| e.to_string())?;
    let tol = Tolerances::default();
    let (_, _, k) = prepare(&reference_model(0.0), &params, &grid, &tol).map_err(|e| e.to_string())?;
    Ok(Setup {
        grid,
        params,
        tol,
        epsilon_max: k.epsilon_max,
    })
}

fn l2_without_zero_mode(r: &GridFunction) -> Result<f64, String> {
    let mut rh = r.ft_forward().map_err(|e| e.to_string())?;
    rh.values_mut()[0] = Complex64::new(0.0, 0.0);
    Ok(rh.l2())
}

fn manufactured_solution(s: &Setup) -> Outcome {
    let exact = SourceSpec::DifferenceOfGaussians {
        center: 0.5,
        width: 1.0,
        ratio: 2.0,
        amplitude: 1.0,
    }
    .sample(&s.grid)
    .map_err(|e| e.to_string())?;
    let f = apply_operator(&exact, &s.params).map_err(|e| e.to_string())?;
    let sol = solve_linear(&f, &s.params).map_err(|e| e.to_string())?;
    let rel = sol.u0.sub(&exact).map_err(|e| e.to_string())?.l2() / exact.l2();
    check(
        rel <= 1e-10 && sol.residual_l2 <= 1e-8,
        format!("relative error {rel:.2e}, linear residual {:.2e}", sol.residual_l2),
    )
}

/// Minimum of `|λ|` on a uniform grid in `p`, sharing nothing with the solver's search.
fn dense_grid_oracle(a: f64, b: f64) -> f64 {
    let (lo, hi, n) = (1e-6, 20.0, 20_000_000usize);
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let p: f64 = lo + h * i as f64;
            (p.ln() - a).hypot(b * p)
        })
        .fold(f64::INFINITY, f64::min)
}

fn symbol_lower_bound() -> Outcome {
    let mut worst_gap = f64::INFINITY;
    let mut c01 = f64::NAN;
    for (a, b) in [(0.0, 1.0), (1.0, 2.0), (-1.0, 0.5)] {
        let c = OperatorParams::new(a, b).map_err(|e| e.to_string())?.c_ab();
        if (a, b) == (0.0, 1.0) {
            c01 = c;
        }
        let n = 1_000_000;
        let (lo, hi) = (1e-10_f64.ln(), 1e8_f64.ln());
        let min = (0..n)
            .map(|i| {
                let p = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
                symbol_lambda(p, a, b).modulus()
            })
            .fold(f64::INFINITY, f64::min);
        worst_gap = worst_gap.min(min - c);
    }
    let oracle = dense_grid_oracle(0.0, 1.0);
    let diff = (c01 - oracle).abs();
    check(
        worst_gap >= -1e-9 && diff <= 1e-6,
        format!("min |λ| − C over samples {worst_gap:.2e}, C_(0,1) = {c01:.12} vs oracle {oracle:.12}"),
    )
}

fn contraction_audit(s: &Setup) -> Outcome {
    let m = reference_model(0.5 * s.epsilon_max);
    let audit = run_contraction_audit(&m, &s.params, &s.grid, &s.tol, 100, 42).map_err(|e| e.to_string())?;
    let max = audit.max_ratio();
    check(
        audit.rows.len() == 100 && audit.sigma < 1.0 && max <= audit.sigma + 1e-8,
        format!("{} pairs, max ratio {max:.6}, sigma {:.6}", audit.rows.len(), audit.sigma),
    )
}

fn fixed_point(s: &Setup) -> Outcome {
    let m = reference_model(0.5 * s.epsilon_max);
    let r = solve_fixed_point(&m, &s.params, &s.grid, &FixedPointOptions::default()).map_err(|e| e.to_string())?;
    let rep = &r.report;
    let max_ratio = rep.observed_ratios.iter().copied().fold(0.0, f64::max);

    let lu = apply_operator(&r.u_p, &s.params).map_err(|e| e.to_string())?;
    let k = m.kernel.sample(&s.grid).map_err(|e| e.to_string())?;
    let conv = convolve_direct(&k, &m.nonlinearity.apply(&r.u)).map_err(|e| e.to_string())?;
    let residual = l2_without_zero_mode(&lu.sub(&conv.scale(m.epsilon)).map_err(|e| e.to_string())?)?;
    let bound = m.epsilon * rep.kernel_l1 * rep.m * (rep.u0_l2 + 1.0) / rep.c_ab;

    check(
        rep.iterations > 1
            && max_ratio <= rep.sigma_theoretical
            && residual <= 1e-8
            && rep.up_l2 <= m.rho
            && rep.up_l2 <= bound + 1e-8,
        format!(
            "{} iterations, max step ratio {max_ratio:.6} vs sigma {:.6}, residual {residual:.2e}, |u_p| {:.6} vs bound {bound:.6}",
            rep.iterations, rep.sigma_theoretical, rep.up_l2
        ),
    )
}

fn epsilon_sweep(s: &Setup) -> Outcome {
    let eps: Vec<f64> = [0.125, 0.25, 0.5].iter().map(|f| f * s.epsilon_max).collect();
    let sweep = run_epsilon_sweep(&reference_model(0.0), &s.params, &s.grid, &s.tol, &eps).map_err(|e| e.to_string())?;
    let dominated = sweep
        .rows
        .iter()
        .all(|r| r.error.is_none() && r.up_l2 <= r.bound + 1e-8);
    let shrinking = sweep.rows.windows(2).all(|w| w[0].up_l2 < w[1].up_l2);
    let norms: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("{:.4}/{:.4}", r.up_l2, r.bound))
        .collect();
    check(
        sweep.rows.len() == 3 && dominated && shrinking,
        format!("|u_p| / bound at eps_max/8, /4, /2: {}", norms.join(", ")),
    )
}

fn continuity(s: &Setup) -> Outcome {
    let base = reference_model(0.5 * s.epsilon_max);
    let pairs = [
        NonlinearitySpec::scaled_sine(0.9),
        NonlinearitySpec::tanh(1.0),
        NonlinearitySpec::rational(1.0),
    ];
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for g2 in pairs {
        let other = base.with_nonlinearity(g2);
        let r = run_continuity(&base, &other, &s.params, &s.grid, &s.tol).map_err(|e| e.to_string())?;
        worst = worst.min(r.rhs + 1e-8 - r.lhs);
        parts.push(format!("{}: {:.3e} <= {:.3e}", r.g2.family_name(), r.lhs, r.rhs));
    }
    check(worst >= 0.0, parts.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut conv_err, mut parseval_err) = (0.0f64, 0.0f64);
    for n in [16usize, 64, 256, 1024] {
        for _ in 0..5 {
            let length = rng.random_range(1.0..60.0);
            let grid = SpectralGrid::new(n, length).map_err(|e| e.to_string())?;
            let mut field = || {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                GridFunction::from_real(&grid, &v)
            };
            let k = field().map_err(|e| e.to_string())?;
            let g = field().map_err(|e| e.to_string())?;
            let fast = convolve_fft(&k, &g).map_err(|e| e.to_string())?;
            let slow = convolve_direct(&k, &g).map_err(|e| e.to_string())?;
            conv_err = conv_err.max(fast.sub(&slow).map_err(|e| e.to_string())?.l2() / slow.l2());
            let kh = k.ft_forward().map_err(|e| e.to_string())?;
            parseval_err = parseval_err.max((kh.l2() - k.l2()).abs() / k.l2());
        }
    }
    check(
        conv_err <= 1e-10 && parseval_err <= 1e-12,
        format!("convolution rel err {conv_err:.2e}, Parseval rel err {parseval_err:.2e}"),
    )
}

fn refusal(s: &Setup) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = tmp.path().join("over.toml");
    let text = logdrift::config::DEFAULT_CONFIG.replace(
        "epsilon = { fraction_of_max = 0.5 }",
        "epsilon = { fraction_of_max = 1.01 }",
    );
    std::fs::write(&cfg_path, text).map_err(|e| e.to_string())?;
    let out_dir = tmp.path().join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_logdrift"))
        .arg("solve")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code();
    let no_artifacts = !out_dir.exists();

    let zero = GridFunction::zeros(&s.grid, logdrift::Domain::Space);
    let sol = solve_linear(&zero, &s.params).map_err(|e| e.to_string())?;
    let exact_zero = sol.u0.values().iter().all(|z| z.re == 0.0 && z.im == 0.0);
    check(
        code == Some(3) && no_artifacts && exact_zero,
        format!("exit code {code:?}, artifacts absent {no_artifacts}, zero source gives zero {exact_zero}"),
    )
}

fn main() -> ExitCode {
    let s = match setup() {
        Ok(s) => s,
        Err(e) => {
            println!("[FAIL] setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: [(&str, &dyn Fn() -> Outcome); 8] = [
        ("spectral solver recovers a manufactured solution", &|| manufactured_solution(&s)),
        ("certified symbol lower bound", &symbol_lower_bound),
        ("contraction audit on seeded pairs", &|| contraction_audit(&s)),
        ("fixed-point convergence and ball bounds", &|| fixed_point(&s)),
        ("epsilon sweep dominated by the linear bound", &|| epsilon_sweep(&s)),
        ("continuity bound for shipped nonlinearity pairs", &|| continuity(&s)),
        ("FFT and direct convolution agree, Parseval holds", &oracle_equivalence),
        ("refusal above epsilon_max, zero source gives zero", &|| refusal(&s)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("[PASS] criterion {}: {name} ({d}) [{secs:.2}s]", i + 1),
            Err(d) => {
                failures += 1;
                println!("[FAIL] criterion {}: {name} ({d}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
