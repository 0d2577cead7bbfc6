//! One function per subcommand; each returns the table it emits.

use std::path::Path;

use purity_core::analysis::{fit_scaling, mse_decompose, quantum_fisher, tomography_theta2};
use purity_core::joint::max_fidelity;
use purity_core::protocols::{
    mc_average, simulate_trials, AdaptiveConfig, GreedyConfig, Protocol, StateSource,
    TomographyConfig,
};
use purity_core::{PurityPrior, UnitVector};

use crate::table::{count, flag, real, Table};
use crate::CliError;

pub fn joint_bound(
    n_list: &[u64],
    prior: &PurityPrior,
    blocks: Option<&Path>,
) -> Result<Table, CliError> {
    let mut table = Table::new(&["n", "f_max", "gap"]);
    let mut block_table = Table::new(&[
        "n",
        "two_j",
        "multiplicity",
        "a_weighted",
        "b_weighted",
        "r_j",
        "probability",
        "quadrature_error",
    ]);
    for &n in n_list {
        let res = max_fidelity(n, prior)?;
        table.push(vec![count(n), real(res.f_max), real(res.gap)]);
        for b in &res.blocks {
            block_table.push(vec![
                count(n),
                count(b.two_j),
                b.multiplicity.to_string(),
                real(b.weighted_a),
                real(b.weighted_b),
                real(b.r_j),
                real(b.probability),
                real(b.quadrature_error),
            ]);
        }
    }
    if let Some(path) = blocks {
        std::fs::write(path, block_table.to_csv())?;
    }
    Ok(table)
}

fn source_for(prior: &PurityPrior, fixed_r: Option<f64>) -> StateSource {
    match fixed_r {
        Some(r) => StateSource::FixedPurity(r),
        None => StateSource::Prior(prior.clone()),
    }
}

pub fn adaptive(
    n_list: &[u64],
    alpha: f64,
    prior: &PurityPrior,
    fixed_r: Option<f64>,
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "n", "n0", "n1", "mean_f", "stderr", "gap", "theta2", "theta4", "alpha_valid",
    ]);
    let source = source_for(prior, fixed_r);
    for &n in n_list {
        let cfg = AdaptiveConfig::new(n, alpha, prior.clone())?;
        if !cfg.alpha_in_window() {
            let (lo, hi) = AdaptiveConfig::alpha_window(prior.lambda());
            eprintln!(
                "warning: alpha = {alpha} is outside ({lo}, {hi}) for lambda = {}",
                prior.lambda()
            );
        }
        let (n0, n1, valid) = (
            cfg.tomography_copies(),
            cfg.measured_copies(),
            cfg.alpha_in_window(),
        );
        let s = mc_average(&Protocol::Adaptive(cfg), &source, trials, seed)?;
        table.push(vec![
            count(n),
            count(n0),
            count(n1),
            real(s.mean_fidelity),
            real(s.std_error),
            real(n as f64 * (1.0 - s.mean_fidelity)),
            real(s.mean_theta2),
            real(s.mean_theta4),
            flag(valid),
        ]);
    }
    Ok(table)
}

pub fn greedy(
    n_list: &[u64],
    prior: &PurityPrior,
    fixed_r: Option<f64>,
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(&["n", "mean_f", "stderr", "gap"]);
    let source = source_for(prior, fixed_r);
    for &n in n_list {
        let protocol = Protocol::Greedy(GreedyConfig {
            copies: n,
            axis: UnitVector::Z,
        });
        let s = mc_average(&protocol, &source, trials, seed)?;
        table.push(vec![
            count(n),
            real(s.mean_fidelity),
            real(s.std_error),
            real(n as f64 * (1.0 - s.mean_fidelity)),
        ]);
    }
    Ok(table)
}

pub fn tomography(
    n_list: &[u64],
    r_list: &[f64],
    prior: &PurityPrior,
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "n",
        "r",
        "mean_f",
        "stderr",
        "gap",
        "theta2",
        "theta2_stderr",
        "theta2_predicted",
        "theta4",
    ]);
    let sources: Vec<(String, StateSource, Option<f64>)> = if r_list.is_empty() {
        vec![("prior".into(), StateSource::Prior(prior.clone()), None)]
    } else {
        r_list
            .iter()
            .map(|&r| (real(r), StateSource::FixedPurity(r), Some(r)))
            .collect()
    };
    for &n in n_list {
        for (label, source, r) in &sources {
            let protocol = Protocol::Tomography(TomographyConfig { copies: n });
            let s = mc_average(&protocol, source, trials, seed)?;
            let predicted = match r {
                Some(r) if *r > 0.0 => real(tomography_theta2(*r, n)?),
                _ => String::new(),
            };
            table.push(vec![
                count(n),
                label.clone(),
                real(s.mean_fidelity),
                real(s.std_error),
                real(n as f64 * (1.0 - s.mean_fidelity)),
                real(s.mean_theta2),
                real(s.theta2_std_error),
                predicted,
                real(s.mean_theta4),
            ]);
        }
    }
    Ok(table)
}

pub fn crb(
    r_list: &[f64],
    n: u64,
    alpha: f64,
    prior: &PurityPrior,
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "r", "n", "n0", "n1", "mse", "variance", "bias_sq", "fisher", "n_mse_h", "n1_mse_h",
    ]);
    for &r in r_list {
        let cfg = AdaptiveConfig::new(n, alpha, prior.clone())?;
        let (n0, n1) = (cfg.tomography_copies(), cfg.measured_copies());
        let outcomes = simulate_trials(
            &Protocol::Adaptive(cfg),
            &StateSource::FixedPurity(r),
            trials,
            seed,
        )?;
        let estimates: Vec<f64> = outcomes.iter().map(|t| t.estimate.value).collect();
        let d = mse_decompose(&estimates, r)?;
        let h = quantum_fisher(r)?;
        table.push(vec![
            real(r),
            count(n),
            count(n0),
            count(n1),
            real(d.mse),
            real(d.variance),
            real(d.bias_sq),
            real(h),
            real(n as f64 * d.mse * h),
            real(n1 as f64 * d.mse * h),
        ]);
    }
    Ok(table)
}

/// Fits `1 − F ∝ N^p` to a table emitted by another subcommand.
pub fn fit(input: &Path, column: Option<&str>) -> Result<Table, CliError> {
    let mut reader = csv::Reader::from_path(input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Usage(e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let n_col = find("n").ok_or_else(|| CliError::Usage("input has no `n` column".into()))?;
    let f_col = match column {
        Some(c) => find(c).ok_or_else(|| CliError::Usage(format!("input has no `{c}` column")))?,
        None => find("f_max")
            .or_else(|| find("mean_f"))
            .ok_or_else(|| CliError::Usage("input has neither `f_max` nor `mean_f`".into()))?,
    };
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Usage(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            record[i]
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad number {:?}: {e}", &record[i])))
        };
        points.push((parse(n_col)?, 1.0 - parse(f_col)?));
    }
    let fit = fit_scaling(&points)?;
    let mut table = Table::new(&["coefficient", "exponent", "residual", "points"]);
    table.push(vec![
        real(fit.coefficient),
        real(fit.exponent),
        real(fit.residual),
        count(points.len() as u64),
    ]);
    Ok(table)
}
