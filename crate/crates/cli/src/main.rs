//! `purity-lab`: experiment runner for purity estimation studies.

mod commands;
mod table;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use purity_core::PurityPrior;

use table::{sha256_hex, RunManifest, Table};

const DEFAULT_SEED: u64 = 20_050_607;
const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<purity_core::Error> for CliError {
    fn from(e: purity_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "purity-lab", version, about = "Purity estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Prior exponent; 0 is the hard-sphere prior, 0.5 the Bures prior.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = parse_count)]
    trials: u64,
    /// Data file; a `.manifest` file is written next to it. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximal fidelity of the optimal joint measurement.
    JointBound {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list", value_delimiter = ',', value_parser = parse_count)]
        n_list: Vec<u64>,
        /// Also write per-block diagnostics to this file.
        #[arg(long)]
        blocks: Option<PathBuf>,
    },
    /// Tomography followed by a single-axis purity measurement.
    Adaptive {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list", value_delimiter = ',', value_parser = parse_count)]
        n_list: Vec<u64>,
        #[arg(long, default_value_t = 0.8)]
        alpha: f64,
        /// Draw states at this purity instead of from the prior.
        #[arg(long = "fixed-r")]
        fixed_r: Option<f64>,
    },
    /// All copies measured along one fixed axis.
    Greedy {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list", value_delimiter = ',', value_parser = parse_count)]
        n_list: Vec<u64>,
        #[arg(long = "fixed-r")]
        fixed_r: Option<f64>,
    },
    /// Three-axis tomography alone, with angular error statistics.
    Tomography {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list", value_delimiter = ',', value_parser = parse_count)]
        n_list: Vec<u64>,
        /// Fixed purities; the prior is used when empty.
        #[arg(long = "r-list", value_delimiter = ',')]
        r_list: Vec<f64>,
    },
    /// Mean square error of the adaptive estimate against the quantum Fisher information.
    Crb {
        #[command(flatten)]
        common: Common,
        #[arg(long = "r-list", value_delimiter = ',')]
        r_list: Vec<f64>,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 0.8)]
        alpha: f64,
    },
    /// Power-law fit of 1 − F against N from an emitted table.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Fidelity column; `f_max` or `mean_f` when absent.
        #[arg(long)]
        column: Option<String>,
    },
}

/// Accepts plain integers and exact scientific forms such as `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) {
        Ok(x as u64)
    } else {
        Err(format!("not a count: {s:?}"))
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn non_empty<T>(name: &str, xs: &[T]) -> Result<(), CliError> {
    if xs.is_empty() {
        Err(CliError::Usage(format!("--{name} must not be empty")))
    } else {
        Ok(())
    }
}

fn common_params(c: &Common) -> Vec<(String, String)> {
    vec![
        ("lambda".into(), c.lambda.to_string()),
        ("seed".into(), c.seed.to_string()),
        ("trials".into(), c.trials.to_string()),
    ]
}

fn execute(command: &Command) -> Result<(Table, Vec<(String, String)>), CliError> {
    let prior = |c: &Common| PurityPrior::new(c.lambda).map_err(CliError::from);
    match command {
        Command::JointBound {
            common,
            n_list,
            blocks,
        } => {
            non_empty("n-list", n_list)?;
            let t = commands::joint_bound(n_list, &prior(common)?, blocks.as_deref())?;
            let mut p = common_params(common);
            p.push(("n_list".into(), join(n_list)));
            Ok((t, p))
        }
        Command::Adaptive {
            common,
            n_list,
            alpha,
            fixed_r,
        } => {
            non_empty("n-list", n_list)?;
            let t = commands::adaptive(
                n_list,
                *alpha,
                &prior(common)?,
                *fixed_r,
                common.trials,
                common.seed,
            )?;
            let mut p = common_params(common);
            p.push(("n_list".into(), join(n_list)));
            p.push(("alpha".into(), alpha.to_string()));
            if let Some(r) = fixed_r {
                p.push(("fixed_r".into(), r.to_string()));
            }
            Ok((t, p))
        }
        Command::Greedy {
            common,
            n_list,
            fixed_r,
        } => {
            non_empty("n-list", n_list)?;
            let t = commands::greedy(n_list, &prior(common)?, *fixed_r, common.trials, common.seed)?;
            let mut p = common_params(common);
            p.push(("n_list".into(), join(n_list)));
            if let Some(r) = fixed_r {
                p.push(("fixed_r".into(), r.to_string()));
            }
            Ok((t, p))
        }
        Command::Tomography {
            common,
            n_list,
            r_list,
        } => {
            non_empty("n-list", n_list)?;
            let t =
                commands::tomography(n_list, r_list, &prior(common)?, common.trials, common.seed)?;
            let mut p = common_params(common);
            p.push(("n_list".into(), join(n_list)));
            p.push(("r_list".into(), join(r_list)));
            Ok((t, p))
        }
        Command::Crb {
            common,
            r_list,
            n,
            alpha,
        } => {
            non_empty("r-list", r_list)?;
            let t = commands::crb(r_list, *n, *alpha, &prior(common)?, common.trials, common.seed)?;
            let mut p = common_params(common);
            p.push(("r_list".into(), join(r_list)));
            p.push(("n".into(), n.to_string()));
            p.push(("alpha".into(), alpha.to_string()));
            Ok((t, p))
        }
        Command::Fit {
            input, column, ..
        } => {
            let t = commands::fit(input, column.as_deref())?;
            let mut p = vec![("input".into(), input.display().to_string())];
            if let Some(c) = column {
                p.push(("column".into(), c.clone()));
            }
            Ok((t, p))
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::JointBound { .. } => "joint-bound",
            Command::Adaptive { .. } => "adaptive",
            Command::Greedy { .. } => "greedy",
            Command::Tomography { .. } => "tomography",
            Command::Crb { .. } => "crb",
            Command::Fit { .. } => "fit",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::JointBound { common, .. }
            | Command::Adaptive { common, .. }
            | Command::Greedy { common, .. }
            | Command::Tomography { common, .. }
            | Command::Crb { common, .. }
            | Command::Fit { common, .. } => common,
        }
    }
}

fn write_outputs(out: Option<&Path>, data: &[u8], manifest: &RunManifest) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, data)?;
            std::fs::write(RunManifest::path_for(path), manifest.render())?;
        }
        None => std::io::stdout().write_all(data)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common().clone();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;

    let start = Instant::now();
    let (table, params) = pool.install(|| execute(&cli.command))?;
    let data = table.to_csv();
    let manifest = RunManifest {
        subcommand: cli.command.name().into(),
        params,
        version: env!("CARGO_PKG_VERSION"),
        duration_seconds: start.elapsed().as_secs_f64(),
        digest: sha256_hex(&data),
    };
    write_outputs(common.out.as_deref(), &data, &manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("purity-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("purity-lab").chain(args.iter().copied()))
            .expect("arguments parse")
    }

    fn csv_of(args: &[&str]) -> String {
        let (table, _) = execute(&parse(args).command).expect("command runs");
        String::from_utf8(table.to_csv()).unwrap()
    }

    fn cell(text: &str, row: usize, col: usize) -> String {
        text.lines().nth(row).unwrap().split(',').nth(col).unwrap().to_owned()
    }

    fn manifest_value(manifest: &str, key: &str) -> Option<String> {
        manifest
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}: ")).map(str::to_owned))
    }

    fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Vec<u8>, String) {
        let out = dir.join(name);
        let mut full = args.to_vec();
        let out_str = out.to_str().unwrap().to_owned();
        full.extend(["--out", &out_str]);
        run(parse(&full)).expect("command runs");
        let manifest = std::fs::read_to_string(RunManifest::path_for(&out)).unwrap();
        (std::fs::read(&out).unwrap(), manifest)
    }

    #[test]
    fn counts_accept_exact_scientific_forms() {
        assert_eq!(parse_count("1000"), Ok(1000));
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("").is_err());
    }

    #[test]
    fn single_copy_row_matches_closed_form() {
        let text = csv_of(&["joint-bound", "--lambda", "0", "--n-list", "1"]);
        assert_eq!(text.lines().next(), Some("n,f_max,gap"));
        let f: f64 = cell(&text, 1, 1).parse().unwrap();
        let expected = (0.75f64).hypot(3.0 * std::f64::consts::PI / 16.0);
        assert!((f - expected).abs() < 1e-9);
    }

    #[test]
    fn malformed_flags_are_usage_errors() {
        for args in [
            vec!["joint-bound", "--n-list", ""],
            vec!["crb", "--r-list", "0.5"],
            vec!["joint-bound", "--n-list", "3", "--seed", "-1"],
            vec!["no-such-command"],
        ] {
            let err = Cli::try_parse_from(std::iter::once("purity-lab").chain(args.clone()))
                .expect_err("rejected");
            assert_eq!(err.exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn invalid_values_exit_with_two() {
        for args in [
            vec!["joint-bound"],
            vec!["joint-bound", "--n-list", "3", "--lambda", "1.2"],
            vec!["adaptive", "--n-list", "100", "--alpha", "1.5"],
            vec!["crb", "--n", "1000"],
            vec!["greedy", "--n-list", "10", "--fixed-r", "1.5"],
            vec!["fit", "--input", "/nonexistent/table.csv"],
            vec!["joint-bound", "--n-list", "3", "--threads", "0"],
        ] {
            let err = run(parse(&args)).expect_err("rejected");
            assert_eq!(err.exit_code(), 2, "{args:?}: {err}");
        }
    }

    #[test]
    fn quadrature_failures_exit_with_three() {
        let err = CliError::from(purity_core::Error::QuadratureFailure {
            n: 10,
            two_j: 4,
            estimate: 0.5,
        });
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn alpha_outside_window_is_flagged() {
        let text = csv_of(&["adaptive", "--n-list", "1000", "--alpha", "0.55", "--trials", "20"]);
        assert_eq!(cell(&text, 1, 8), "false");
        let text = csv_of(&["adaptive", "--n-list", "1000", "--trials", "20"]);
        assert_eq!(cell(&text, 1, 8), "true");
    }

    #[test]
    fn manifest_digest_matches_data() {
        let dir = tempfile::tempdir().unwrap();
        let (data, manifest) = run_to(
            dir.path(),
            "adaptive.csv",
            &["adaptive", "--n-list", "1000,4000", "--trials", "200"],
        );
        assert_eq!(manifest_value(&manifest, "data_sha256"), Some(sha256_hex(&data)));
        assert_eq!(manifest_value(&manifest, "subcommand").as_deref(), Some("adaptive"));
        assert_eq!(
            manifest_value(&manifest, "param.seed"),
            Some(DEFAULT_SEED.to_string())
        );
        assert_eq!(
            manifest_value(&manifest, "param.n_list").as_deref(),
            Some("1000,4000")
        );
    }

    #[test]
    fn block_diagnostics_cover_every_spin() {
        let dir = tempfile::tempdir().unwrap();
        let blocks = dir.path().join("blocks.csv");
        csv_of(&["joint-bound", "--n-list", "4,5", "--blocks", blocks.to_str().unwrap()]);
        let text = std::fs::read_to_string(blocks).unwrap();
        assert!(text.starts_with("n,two_j,multiplicity,"));
        assert_eq!(text.lines().count(), 1 + 3 + 3);
    }

    #[test]
    fn fit_reads_emitted_table() {
        let dir = tempfile::tempdir().unwrap();
        run_to(dir.path(), "jb.csv", &["joint-bound", "--n-list", "250,500,1000,2000"]);
        let input = dir.path().join("jb.csv");
        let text = csv_of(&["fit", "--input", input.to_str().unwrap()]);
        let exponent: f64 = cell(&text, 1, 1).parse().unwrap();
        assert!((exponent + 1.0).abs() < 0.05, "{exponent}");
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let args = ["tomography", "--n-list", "300", "--r-list", "0.5,1", "--trials", "300"];
        let (a, ma) = run_to(dir.path(), "a.csv", &args);
        let (b, mb) = run_to(dir.path(), "b.csv", &args);
        assert_eq!(a, b);
        assert_eq!(
            manifest_value(&ma, "data_sha256"),
            manifest_value(&mb, "data_sha256")
        );
    }
}
