//! The four subcommands: generate, sweep, degeneracy, compare.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use efpqubo_core::anneal::{population_anneal, Schedule};
use efpqubo_core::efp::{design_matrix, relation_by_label, EfpConfig, ObservableRelation};
use efpqubo_core::encoding::{decode, degeneracy_profile, BitLayout, Scheme};
use efpqubo_core::events::{generate_events, JetEvent};
use efpqubo_core::pimc::{pimc_anneal, PimcConfig};
use efpqubo_core::qubo::assemble;
use efpqubo_core::regress::{lasso, mse_loss, quantile_summary, refine_from_coefficients, ridge};

use crate::config::{ExperimentConfig, Solver};
use crate::error::{CliError, CliResult};
use crate::io;

/// Brute force enumerates 2^n states; refuse beyond this.
const BRUTE_FORCE_BIT_LIMIT: usize = 24;

/// Deterministic per-grid-point seed.
pub fn point_seed(base: u64, lambda_idx: usize, run: usize) -> u64 {
    let mut z = base
        ^ (lambda_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (run as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Build (or load) the event sample for a config, applying the relation's
/// restriction when generating in-process.
pub fn prepare_events(
    config: &ExperimentConfig,
    relation: &ObservableRelation,
) -> CliResult<Vec<JetEvent>> {
    if let Some(path) = &config.events_file {
        return io::read_events(Path::new(path));
    }
    let raw = generate_events(
        config.events.n_events,
        (config.events.m_min, config.events.m_max),
        config.events.pt_total,
        config.events.angular_scale,
        config.seed,
    )?;
    if !config.apply_restriction {
        return Ok(raw);
    }
    let mut events = Vec::with_capacity(raw.len());
    for (i, ev) in raw.iter().enumerate() {
        events.push(relation.restriction.apply(ev, point_seed(config.seed, 3, i))?);
    }
    Ok(events)
}

/// `generate`: write the (restriction-preprocessed) event sample as JSONL.
pub fn cmd_generate(config: &ExperimentConfig, out_dir: &Path) -> CliResult<PathBuf> {
    let relation = relation_by_label(config.relation_label())?;
    let events = prepare_events(config, &relation)?;
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("events.jsonl");
    io::write_events(&path, &events)?;
    Ok(path)
}

/// One results row (the pinned CSV schema plus internal extras).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub relation: char,
    pub solver: Solver,
    pub scheme: String,
    pub lambda: f64,
    pub lambda_idx: usize,
    pub run: usize,
    pub nnz: usize,
    pub mse: f64,
    pub reg_loss: f64,
    pub wall_ms: u128,
    /// mse of the un-refined solution (equals `mse` when refinement is off
    /// or the solver is continuous).
    pub raw_mse: f64,
    /// Solver failed; numeric columns are NaN.
    pub failed: bool,
    pub coefficients: Vec<f64>,
}

fn bit_layout(config: &ExperimentConfig, k: usize) -> CliResult<BitLayout> {
    let scheme = Scheme::from_name(&config.scheme)?;
    Ok(BitLayout::power_of_two(scheme, config.exponent_range.0, config.exponent_range.1, k)?
        .with_cross_penalty(config.cross_penalty)?)
}

struct PointOutcome {
    coefficients: Vec<f64>,
    nnz: usize,
    mse: f64,
    reg_loss: f64,
    raw_mse: f64,
    anneal_diag: Option<Vec<efpqubo_core::anneal::StepDiagnostics>>,
    pimc_diag: Option<Vec<efpqubo_core::pimc::PimcStepDiagnostics>>,
}

fn solve_point(
    x: &[Vec<f64>],
    y: &[f64],
    config: &ExperimentConfig,
    lambda: f64,
    seed: u64,
) -> CliResult<PointOutcome> {
    match config.solver {
        Solver::Lasso | Solver::Ridge => {
            let result = if config.solver == Solver::Lasso {
                lasso(x, y, lambda)?
            } else {
                ridge(x, y, lambda)?
            };
            Ok(PointOutcome {
                nnz: result.support.len(),
                mse: result.mse,
                reg_loss: result.regularized_loss,
                raw_mse: result.mse,
                coefficients: result.coefficients,
                anneal_diag: None,
                pimc_diag: None,
            })
        }
        Solver::Anneal | Solver::Pimc | Solver::Brute => {
            let layout = bit_layout(config, x[0].len())?;
            if config.solver == Solver::Brute && layout.total_bits() > BRUTE_FORCE_BIT_LIMIT {
                return Err(CliError::capacity(format!(
                    "brute force limited to {BRUTE_FORCE_BIT_LIMIT} bits, problem has {}",
                    layout.total_bits()
                )));
            }
            let problem = assemble(x, y, &layout, lambda)?;
            let mut anneal_diag = None;
            let mut pimc_diag = None;
            let (bits, energy) = match config.solver {
                Solver::Anneal => {
                    let a = &config.anneal;
                    let schedule = Schedule::new(a.beta_0, a.beta_l, a.steps)?;
                    let result =
                        population_anneal(&problem, &schedule, a.r0, a.sweeps_per_step, seed)?;
                    anneal_diag = Some(result.diagnostics);
                    (result.best_bits, result.best_energy)
                }
                Solver::Pimc => {
                    let p = &config.pimc;
                    let pc = PimcConfig {
                        p_slices: p.p_slices,
                        steps: p.steps,
                        gamma_start: p.gamma_start,
                        gamma_end: p.gamma_end,
                        j_start: p.j_start,
                        j_end: p.j_end,
                        r0: p.r0,
                        temperature: p.temperature,
                        sweeps_per_step: p.sweeps_per_step,
                    };
                    let result = pimc_anneal(&problem, &pc, seed)?;
                    pimc_diag = Some(result.diagnostics);
                    (result.best_bits, result.best_energy)
                }
                _ => {
                    let (bits, energy, _ties) = problem.brute_force()?;
                    (bits, energy)
                }
            };
            let coefficients = decode(&bits, &layout)?;
            let raw_mse = mse_loss(x, y, &coefficients)?;
            if config.refine {
                let refined = refine_from_coefficients(x, y, &coefficients)?;
                let nnz = refined.support.len();
                Ok(PointOutcome {
                    nnz,
                    mse: refined.mse,
                    reg_loss: refined.mse + lambda * nnz as f64,
                    raw_mse,
                    coefficients: refined.coefficients,
                    anneal_diag,
                    pimc_diag,
                })
            } else {
                let nnz = coefficients.iter().filter(|c| **c != 0.0).count();
                Ok(PointOutcome {
                    nnz,
                    mse: raw_mse,
                    // unrefined bit-encoded solvers report the QUBO energy
                    reg_loss: energy,
                    raw_mse,
                    coefficients,
                    anneal_diag,
                    pimc_diag,
                })
            }
        }
    }
}

/// Run the full λ × run grid; row order is (λ index, run index).
pub fn run_sweep(config: &ExperimentConfig) -> CliResult<Vec<SweepRow>> {
    run_sweep_with_diag(config, None)
}

fn run_sweep_with_diag(
    config: &ExperimentConfig,
    diag_dir: Option<&Path>,
) -> CliResult<Vec<SweepRow>> {
    config.validate()?;
    let relation = relation_by_label(config.relation_label())?;
    let events = prepare_events(config, &relation)?;
    let efp_config = EfpConfig::default();
    let (x, y) = design_matrix(&events, &relation, &efp_config)?;

    let scheme_name = if config.solver.is_encoded() {
        config.scheme.clone()
    } else {
        "continuous".to_string()
    };

    let mut rows = Vec::with_capacity(config.lambda_grid.len() * config.runs);
    for (li, &lambda) in config.lambda_grid.iter().enumerate() {
        for run in 0..config.runs {
            let seed = point_seed(config.seed, li, run);
            let start = Instant::now();
            let outcome = solve_point(&x, &y, config, lambda, seed);
            let wall_ms = start.elapsed().as_millis();
            let row = match outcome {
                Ok(o) => {
                    if let Some(dir) = diag_dir {
                        if let Some(d) = &o.anneal_diag {
                            io::write_anneal_diagnostics(
                                &dir.join(format!("diag_anneal_l{li}_r{run}.csv")),
                                d,
                            )?;
                        }
                        if let Some(d) = &o.pimc_diag {
                            io::write_pimc_diagnostics(
                                &dir.join(format!("diag_pimc_l{li}_r{run}.csv")),
                                d,
                            )?;
                        }
                    }
                    SweepRow {
                        relation: config.relation_label(),
                        solver: config.solver,
                        scheme: scheme_name.clone(),
                        lambda,
                        lambda_idx: li,
                        run,
                        nnz: o.nnz,
                        mse: o.mse,
                        reg_loss: o.reg_loss,
                        wall_ms,
                        raw_mse: o.raw_mse,
                        failed: false,
                        coefficients: o.coefficients,
                    }
                }
                Err(e) if e.exit_code == 3 => return Err(e),
                Err(e) => {
                    // solver failure: flag the row and continue the sweep
                    eprintln!("warning: lambda={lambda} run={run}: {e}");
                    SweepRow {
                        relation: config.relation_label(),
                        solver: config.solver,
                        scheme: scheme_name.clone(),
                        lambda,
                        lambda_idx: li,
                        run,
                        nnz: 0,
                        mse: f64::NAN,
                        reg_loss: f64::NAN,
                        wall_ms,
                        raw_mse: f64::NAN,
                        failed: true,
                        coefficients: Vec::new(),
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Format the pinned results CSV.
pub fn results_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(io::RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:e},{},{},{:e},{:e},{}\n",
            r.relation, r.solver.name(), r.scheme, r.lambda, r.run, r.nnz, r.mse, r.reg_loss,
            r.wall_ms
        ));
    }
    out
}

/// Per-λ aggregates: mean nnz ± std, median/quartile mse.
pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("relation,solver,scheme,lambda,mean_nnz,std_nnz,median_mse,q25_mse,q75_mse\n");
    let mut li = 0;
    while li < rows.len() {
        let lambda = rows[li].lambda;
        let group: Vec<&SweepRow> =
            rows.iter().filter(|r| r.lambda_idx == rows[li].lambda_idx && !r.failed).collect();
        let count = rows.iter().filter(|r| r.lambda_idx == rows[li].lambda_idx).count();
        if !group.is_empty() {
            let nnzs: Vec<f64> = group.iter().map(|r| r.nnz as f64).collect();
            let mean = nnzs.iter().sum::<f64>() / nnzs.len() as f64;
            let var =
                nnzs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nnzs.len() as f64;
            let mses: Vec<f64> = group.iter().map(|r| r.mse).collect();
            let (med, q25, q75) = quantile_summary(&mses).unwrap();
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                rows[li].relation,
                rows[li].solver.name(),
                rows[li].scheme,
                lambda,
                mean,
                var.sqrt(),
                med,
                q25,
                q75
            ));
        }
        li += count;
    }
    out
}

/// `sweep`: run the grid and write results.csv, summary.csv and a config
/// echo; optionally problem.json and per-point diagnostics.
pub fn cmd_sweep(config: &ExperimentConfig, out_dir: &Path) -> CliResult<Vec<SweepRow>> {
    fs::create_dir_all(out_dir)?;
    if config.dump_problem && config.solver.is_encoded() {
        let relation = relation_by_label(config.relation_label())?;
        let events = prepare_events(config, &relation)?;
        let (x, y) = design_matrix(&events, &relation, &EfpConfig::default())?;
        let layout = bit_layout(config, x[0].len())?;
        let problem = assemble(&x, &y, &layout, config.lambda_grid[0])?;
        io::write_problem(&out_dir.join("problem.json"), &problem)?;
        io::write_layout(&out_dir.join("layout.json"), &layout)?;
    }
    let diag_dir = if config.diagnostics { Some(out_dir) } else { None };
    let rows = run_sweep_with_diag(config, diag_dir)?;
    fs::write(out_dir.join("results.csv"), results_csv(&rows))?;
    fs::write(out_dir.join("summary.csv"), summary_csv(&rows))?;
    // echo the fully-resolved config for provenance
    fs::write(out_dir.join("config_echo.json"), serde_json::to_string_pretty(config).unwrap())?;
    Ok(rows)
}

/// Degeneracy-profile configuration (subset of the experiment config).
#[derive(Debug, Deserialize)]
pub struct DegeneracyConfig {
    pub scheme: String,
    #[serde(default = "default_exponent_range")]
    pub exponent_range: (i32, i32),
    #[serde(default = "default_cross_penalty")]
    pub cross_penalty: f64,
}

fn default_exponent_range() -> (i32, i32) {
    (-3, 2)
}

fn default_cross_penalty() -> f64 {
    2.0
}

/// `degeneracy`: emit (value, penalty, count) rows for one coefficient block.
pub fn cmd_degeneracy(config: &DegeneracyConfig, out_dir: &Path) -> CliResult<PathBuf> {
    let scheme = Scheme::from_name(&config.scheme)?;
    let layout =
        BitLayout::power_of_two(scheme, config.exponent_range.0, config.exponent_range.1, 1)?
            .with_cross_penalty(config.cross_penalty)?;
    let profile = degeneracy_profile(&layout, 0)?;
    let mut out = String::from("value,penalty,count\n");
    for e in &profile {
        out.push_str(&format!("{:e},{:e},{}\n", e.value, e.penalty, e.count));
    }
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("degeneracy.csv");
    fs::write(&path, out)?;
    Ok(path)
}

/// Compare configuration: two sweep outputs and a join column.
#[derive(Debug, Deserialize)]
pub struct CompareConfig {
    pub left: String,
    pub right: String,
    #[serde(default = "default_join")]
    pub join: String,
}

fn default_join() -> String {
    "lambda".into()
}

#[derive(Debug)]
struct ParsedRow {
    lambda_key: String,
    nnz: usize,
    mse: f64,
}

fn read_results(path: &Path) -> CliResult<Vec<ParsedRow>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == io::RESULTS_HEADER => {}
        other => {
            return Err(CliError::config(format!(
                "{}: unexpected header {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CliError::config(format!(
                "{}:{}: expected 9 fields, got {}",
                path.display(),
                i + 2,
                fields.len()
            )));
        }
        let parse_err = |what: &str| {
            CliError::config(format!("{}:{}: invalid {what}", path.display(), i + 2))
        };
        rows.push(ParsedRow {
            lambda_key: fields[3].to_string(),
            nnz: fields[5].parse().map_err(|_| parse_err("nnz"))?,
            mse: fields[6].parse().map_err(|_| parse_err("mse"))?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::config(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

fn group_stats(rows: &[ParsedRow], by_nnz: bool) -> Vec<(String, f64, f64)> {
    // (key, mean nnz, median mse) in first-seen key order
    let mut keys: Vec<String> = Vec::new();
    for r in rows {
        let k = if by_nnz { r.nnz.to_string() } else { r.lambda_key.clone() };
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|k| {
            let members: Vec<&ParsedRow> = rows
                .iter()
                .filter(|r| {
                    if by_nnz {
                        r.nnz.to_string() == k
                    } else {
                        r.lambda_key == k
                    }
                })
                .collect();
            let mean_nnz =
                members.iter().map(|r| r.nnz as f64).sum::<f64>() / members.len() as f64;
            let mses: Vec<f64> =
                members.iter().map(|r| r.mse).filter(|m| m.is_finite()).collect();
            let median = if mses.is_empty() {
                f64::NAN
            } else {
                quantile_summary(&mses).unwrap().0
            };
            (k, mean_nnz, median)
        })
        .collect()
}

/// `compare`: join two sweep outputs on λ (or nnz); a grid mismatch errors,
/// listing the missing points.
pub fn cmd_compare(config: &CompareConfig, out_dir: &Path) -> CliResult<PathBuf> {
    let by_nnz = match config.join.as_str() {
        "lambda" => false,
        "nnz" => true,
        other => return Err(CliError::config(format!("join must be lambda or nnz, got {other}"))),
    };
    let left = read_results(Path::new(&config.left))?;
    let right = read_results(Path::new(&config.right))?;
    let ls = group_stats(&left, by_nnz);
    let rs = group_stats(&right, by_nnz);

    let missing_right: Vec<&str> = ls
        .iter()
        .filter(|(k, _, _)| !rs.iter().any(|(rk, _, _)| rk == k))
        .map(|(k, _, _)| k.as_str())
        .collect();
    let missing_left: Vec<&str> = rs
        .iter()
        .filter(|(k, _, _)| !ls.iter().any(|(lk, _, _)| lk == k))
        .map(|(k, _, _)| k.as_str())
        .collect();
    if !(missing_right.is_empty() && missing_left.is_empty()) {
        return Err(CliError::config(format!(
            "grid mismatch: missing from right: [{}]; missing from left: [{}]",
            missing_right.join(", "),
            missing_left.join(", ")
        )));
    }

    let key_name = if by_nnz { "nnz" } else { "lambda" };
    let mut out = format!(
        "{key_name},left_mean_nnz,left_median_mse,right_mean_nnz,right_median_mse\n"
    );
    for (k, mean_nnz, median) in &ls {
        let (_, r_nnz, r_med) = rs.iter().find(|(rk, _, _)| rk == k).unwrap();
        out.push_str(&format!("{k},{mean_nnz:e},{median:e},{r_nnz:e},{r_med:e}\n"));
    }
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("compare.csv");
    fs::write(&path, out)?;
    Ok(path)
}
