use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use logdrift::config::RunConfig;
use logdrift::experiments::{
    run_contraction_audit, run_continuity, run_epsilon_sweep, Manifest, ManifestGrid, Platform,
};
use logdrift::{solve_fixed_point, FixedPointOptions, GridFunction, Result};
use serde_json::{json, Value};

/// Exit code when a run completes but one of its post-run checks fails.
const CHECK_FAILED: u8 = 5;
/// Slack on inequality checks in experiment outputs.
const EXPERIMENT_TOL: f64 = 1e-8;

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, f: &GridFunction) -> Result<()> {
    f.write_csv(BufWriter::new(File::create(path)?))
}

fn manifest(cfg: &RunConfig, experiment: &str, outputs: Vec<String>, notes: Vec<String>) -> Result<Value> {
    let m = Manifest {
        experiment: experiment.to_string(),
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        grid: ManifestGrid {
            n_points: cfg.grid.n_points,
            length: cfg.grid.length,
        },
        platform: Platform::current(),
        outputs,
        notes,
    };
    Ok(serde_json::to_value(m).expect("manifest serializes"))
}

pub fn inspect(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let k = r.constants;
    let body = json!({
        "config_hash": cfg.hash()?,
        "a": r.params.a(),
        "b": r.params.b(),
        "c_ab": k.c_ab,
        "kernel_l1": k.kernel_l1,
        "m": k.m,
        "u0_l2": k.u0_l2,
        "rho": k.rho,
        "epsilon": k.epsilon,
        "epsilon_max": k.epsilon_max,
        "sigma": k.sigma,
        "image_bound": k.image_bound(),
        "admissible": k.is_admissible(),
        "linear_residual_l2": r.linear.residual_l2,
        "warnings": r.linear.warnings,
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("json values serialize"));
    fs::create_dir_all(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("constants.json"), &body)?;
    Ok(0)
}

pub fn solve(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    r.constants.ensure_admissible()?;
    let opts = FixedPointOptions {
        tolerances: r.tolerances,
        ..FixedPointOptions::default()
    };
    let fp = solve_fixed_point(&r.model, &r.params, &r.grid, &opts)?;
    let checks = fp.report.invariant_checks();

    // Nothing is written until every fallible numerical step has succeeded.
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    write_csv(&out.join("u0.csv"), &fp.u0)?;
    write_csv(&out.join("up.csv"), &fp.u_p)?;
    write_csv(&out.join("u.csv"), &fp.u)?;
    let mut report = serde_json::to_value(&fp.report).expect("report serializes");
    report["checks"] = serde_json::to_value(&checks).expect("checks serialize");
    write_json(&out.join("report.json"), &report)?;
    let files = ["u0.csv", "up.csv", "u.csv", "report.json"].map(String::from).to_vec();
    write_json(&out.join("manifest.json"), &manifest(cfg, "solve", files, vec![])?)?;

    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    println!(
        "solve: {} iterations, sigma {:.6e}, |u_p| {:.6e}, residual {:.3e}",
        fp.report.iterations, fp.report.sigma_theoretical, fp.report.up_l2, fp.report.main_residual_l2
    );
    for c in &failed {
        eprintln!("check {} failed: {:e} > {:e}", c.name, c.value, c.limit);
    }
    Ok(if failed.is_empty() { 0 } else { CHECK_FAILED })
}

fn stamped(cfg: &RunConfig, experiment: &str) -> Result<(String, String)> {
    let h = cfg.short_hash()?;
    Ok((
        format!("{experiment}-{h}.csv"),
        format!("manifest-{experiment}-{h}.json"),
    ))
}

pub fn contraction(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let audit = run_contraction_audit(
        &r.model,
        &r.params,
        &r.grid,
        &r.tolerances,
        cfg.experiment.trials,
        cfg.seed,
    )?;
    let (csv, man) = stamped(cfg, "contraction")?;
    fs::create_dir_all(&cfg.output_dir)?;
    audit.write_csv(BufWriter::new(File::create(cfg.output_dir.join(&csv))?))?;
    write_json(
        &cfg.output_dir.join(man),
        &manifest(cfg, "contraction", vec![csv], vec![])?,
    )?;
    let max = audit.max_ratio();
    println!("contraction: {} pairs, max ratio {max:.6e}, sigma {:.6e}", audit.rows.len(), audit.sigma);
    Ok(if max <= audit.sigma + EXPERIMENT_TOL { 0 } else { CHECK_FAILED })
}

pub fn continuity(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let g2 = cfg
        .experiment
        .alternate_nonlinearity
        .clone()
        .unwrap_or_else(|| r.model.nonlinearity.clone());
    let model_b = r.model.with_nonlinearity(g2);
    let res = run_continuity(&r.model, &model_b, &r.params, &r.grid, &r.tolerances)?;
    let (csv, man) = stamped(cfg, "continuity")?;
    fs::create_dir_all(&cfg.output_dir)?;
    res.write_csv(BufWriter::new(File::create(cfg.output_dir.join(&csv))?))?;
    let notes = vec![format!(
        "sigma computed with M = max(M1, M2) = {}",
        res.m
    )];
    write_json(
        &cfg.output_dir.join(man),
        &manifest(cfg, "continuity", vec![csv], notes)?,
    )?;
    println!(
        "continuity: lhs {:.6e}, rhs {:.6e}, slack {:.6e}",
        res.lhs, res.rhs, res.slack
    );
    Ok(if res.slack >= -EXPERIMENT_TOL { 0 } else { CHECK_FAILED })
}

pub fn sweep(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let epsilons: Vec<f64> = cfg
        .experiment
        .sweep_fractions
        .iter()
        .map(|f| f * r.constants.epsilon_max)
        .collect();
    let sweep = run_epsilon_sweep(&r.model, &r.params, &r.grid, &r.tolerances, &epsilons)?;
    let (csv, man) = stamped(cfg, "sweep")?;
    fs::create_dir_all(&cfg.output_dir)?;
    sweep.write_csv(BufWriter::new(File::create(cfg.output_dir.join(&csv))?))?;
    write_json(
        &cfg.output_dir.join(man),
        &manifest(cfg, "sweep", vec![csv], vec![])?,
    )?;
    let ok = sweep
        .rows
        .iter()
        .all(|row| row.error.is_some() || row.up_l2 <= row.bound + EXPERIMENT_TOL);
    println!("sweep: {} rows, epsilon_max {:.6e}", sweep.rows.len(), sweep.epsilon_max);
    Ok(if ok { 0 } else { CHECK_FAILED })
}
