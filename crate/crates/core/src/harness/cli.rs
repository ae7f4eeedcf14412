//! `peps-forge` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 capacity exceeded.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::config::{GraphSpec, InstanceConfig, TensorSource, Tolerances};
use super::stats::binomial_sigma;
use super::sweep::{self, SweepParams};
use crate::dynamics::{self, CostInputs, RunMode, RunParams, Simulation};
use crate::error::{Error, Result};
use crate::hamiltonian;

#[derive(Debug, Parser)]
#[command(
    name = "peps-forge",
    version,
    about = "Simulate measurement-driven preparation of injective PEPS"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the preparation algorithm once and print the report as JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = RunMode::Bounded)]
        mode: RunMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run many seeds; CSV rows (one per trial) or a JSON summary.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// First run seed; trials use consecutive seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random instances (tensor seed offsets 0..N).
        #[arg(long, default_value_t = 1)]
        instances: u64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = RunMode::Bounded)]
        mode: RunMode,
        /// With CSV output, the summary goes to `<out>.summary.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Check the overlap bound on one instance, or on a built-in random suite.
    VerifyLemma1 {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Random instances per (topology, kappa_max) pair in the built-in suite.
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare simulated repair-loop termination with the closed form.
    VerifyLemma2 {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral gap of every intermediate Hamiltonian.
    GapScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every H_t as JSON terms to this file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Measurement-count and runtime bounds.
    CostModel {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "V")]
        vertices: Option<usize>,
        #[arg(long = "E")]
        edges: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Spectral gap; defaults to 1 without a config.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status of a command that completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 1,
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn check_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("--eps must lie in (0, 1), got {eps}")));
    }
    Ok(eps)
}

pub fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Run {
            config,
            seed,
            eps,
            mode,
            out,
        } => {
            let config = InstanceConfig::from_path(&config)?;
            let sim = Simulation::prepare(config.build_peps()?, config.c, config.tolerances.zero_tol)?;
            let params = RunParams {
                seed: seed.unwrap_or(config.seed),
                eps: check_eps(eps.unwrap_or(config.eps))?,
                mode,
            };
            emit(&out, &to_json(&sim.run(&params)?))?;
            Ok(Outcome::Success)
        }
        Command::Sweep {
            config,
            trials,
            seed,
            instances,
            eps,
            mode,
            out,
            format,
        } => {
            let config = InstanceConfig::from_path(&config)?;
            let params = SweepParams {
                trials,
                base_seed: seed.unwrap_or(config.seed),
                instances,
                eps: check_eps(eps.unwrap_or(config.eps))?,
                mode,
            };
            let result = sweep::run_sweep(&config, &params)?;
            match format {
                Format::Json => emit(&out, &to_json(&result))?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    sweep::write_csv(&result.rows, &mut buf)?;
                    emit(&out, &String::from_utf8(buf).expect("csv is utf-8"))?;
                    let summary = to_json(&result.summary);
                    match &out {
                        Some(path) => {
                            let mut name = path.clone().into_os_string();
                            name.push(".summary.json");
                            std::fs::write(PathBuf::from(name), summary)?;
                        }
                        None => eprint!("{summary}"),
                    }
                }
            }
            Ok(Outcome::Success)
        }
        Command::VerifyLemma1 {
            config,
            trials,
            seed,
            out,
        } => {
            let suite = match config {
                Some(path) => vec![InstanceConfig::from_path(&path)?],
                None => lemma1_suite(trials, seed),
            };
            let mut instances = Vec::with_capacity(suite.len());
            for c in &suite {
                let report = dynamics::lemma1_report(&c.build_peps()?)?;
                instances.push(Lemma1Instance {
                    name: c.name.clone().unwrap_or_default(),
                    passed: report.passed(),
                    min_margin: report.min_margin(),
                    report,
                });
            }
            let violations: usize = instances.iter().map(|i| i.report.violations).sum();
            let summary = Lemma1Summary {
                passed: violations == 0,
                instances: instances.len(),
                violations,
                min_margin: instances.iter().map(|i| i.min_margin).fold(f64::INFINITY, f64::min),
                results: instances,
            };
            emit(&out, &to_json(&summary))?;
            eprintln!(
                "verify-lemma1: {} ({} instances, {} violations, min margin {:.3e})",
                if summary.passed { "PASS" } else { "FAIL" },
                summary.instances,
                summary.violations,
                summary.min_margin
            );
            Ok(if summary.passed {
                Outcome::Success
            } else {
                Outcome::VerificationFailed
            })
        }
        Command::VerifyLemma2 {
            p,
            m,
            trials,
            seed,
            out,
        } => {
            let report = lemma2_check(p, m, trials, seed)?;
            emit(&out, &to_json(&report))?;
            eprintln!(
                "verify-lemma2: {} (empirical {:.5}, closed form {:.5}, {:.2} sigma)",
                if report.passed { "PASS" } else { "FAIL" },
                report.empirical,
                report.expected,
                report.deviation_sigmas
            );
            Ok(if report.passed {
                Outcome::Success
            } else {
                Outcome::VerificationFailed
            })
        }
        Command::GapScan {
            config,
            format,
            out,
            export,
        } => {
            let config = InstanceConfig::from_path(&config)?;
            let peps = config.build_peps()?;
            let sequence = hamiltonian::hamiltonian_sequence(&peps, config.c)?;
            let mut rows = Vec::with_capacity(sequence.len());
            for h in &sequence {
                let spectrum = h.spectrum()?;
                let lambda0 = spectrum.eigenvalues[0];
                let lambda1 = spectrum.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY);
                rows.push(GapRow {
                    step: h.step(),
                    vertex: h.step().checked_sub(1).map(|t| peps.vertex_at(t)),
                    lambda0,
                    lambda1,
                    gap: lambda1 - lambda0,
                    degeneracy: spectrum
                        .eigenvalues
                        .iter()
                        .filter(|&&l| l < config.tolerances.zero_tol)
                        .count(),
                    terms: h.terms().len(),
                });
            }
            if let Some(path) = export {
                let all: Vec<_> = sequence.iter().map(|h| h.export()).collect();
                std::fs::write(path, to_json(&all))?;
            }
            match format {
                Format::Json => emit(&out, &to_json(&rows))?,
                Format::Csv => {
                    let mut writer = csv::Writer::from_writer(Vec::new());
                    for r in &rows {
                        writer.serialize(r)?;
                    }
                    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
                    emit(&out, &String::from_utf8(bytes).expect("csv is utf-8"))?;
                }
            }
            Ok(Outcome::Success)
        }
        Command::CostModel {
            config,
            vertices,
            edges,
            kappa,
            eps,
            delta,
            d,
            k,
            out,
        } => {
            let inputs = match config {
                Some(path) => {
                    let config = InstanceConfig::from_path(&path)?;
                    let peps = config.build_peps()?;
                    let gap = match delta {
                        Some(g) => g,
                        None => Simulation::prepare(peps.clone(), config.c, config.tolerances.zero_tol)?.min_gap(),
                    };
                    let mut inputs = CostInputs::for_graph(
                        peps.graph(),
                        kappa.unwrap_or_else(|| peps.kappa()),
                        eps.unwrap_or(config.eps),
                        gap,
                    );
                    inputs.vertices = vertices.unwrap_or(inputs.vertices);
                    inputs.edges = edges.unwrap_or(inputs.edges);
                    inputs.physical_dim = d.unwrap_or(inputs.physical_dim);
                    inputs.degree = k.unwrap_or(inputs.degree);
                    inputs
                }
                None => {
                    let (Some(vertices), Some(kappa), Some(eps)) = (vertices, kappa, eps) else {
                        return Err(Error::InvalidInput(
                            "cost-model needs --config or all of --V, --kappa, --eps".into(),
                        ));
                    };
                    CostInputs {
                        vertices,
                        edges: edges.unwrap_or(vertices.saturating_sub(1).max(1)),
                        kappa,
                        eps,
                        gap: delta.unwrap_or(1.0),
                        physical_dim: d.unwrap_or(2),
                        degree: k.unwrap_or(2),
                    }
                }
            };
            let bounds = dynamics::cost_model(&inputs)?;
            let required = dynamics::required_alternations(inputs.kappa, inputs.vertices, inputs.eps).ok();
            emit(
                &out,
                &to_json(&CostReport {
                    inputs,
                    bounds,
                    required_alternations: required,
                }),
            )?;
            Ok(Outcome::Success)
        }
    }
}

#[derive(Debug, Serialize)]
struct Lemma1Instance {
    name: String,
    passed: bool,
    min_margin: f64,
    report: dynamics::Lemma1Report,
}

#[derive(Debug, Serialize)]
struct Lemma1Summary {
    passed: bool,
    instances: usize,
    violations: usize,
    min_margin: f64,
    results: Vec<Lemma1Instance>,
}

#[derive(Debug, Serialize)]
struct GapRow {
    step: usize,
    vertex: Option<usize>,
    lambda0: f64,
    lambda1: f64,
    gap: f64,
    degeneracy: usize,
    terms: usize,
}

#[derive(Debug, Serialize)]
struct CostReport {
    inputs: CostInputs,
    bounds: dynamics::CostBounds,
    required_alternations: Option<dynamics::Alternations>,
}

/// Random instances over chain-2/3/4 and ring-4 (D = 2) with
/// `kappa_max` in {1, 2, 5}, `per_cell` seeds each.
pub fn lemma1_suite(per_cell: u64, seed: u64) -> Vec<InstanceConfig> {
    let graphs = [
        ("chain2", GraphSpec::Chain { n: 2 }),
        ("chain3", GraphSpec::Chain { n: 3 }),
        ("chain4", GraphSpec::Chain { n: 4 }),
        ("ring4", GraphSpec::Ring { n: 4 }),
    ];
    let mut out = Vec::new();
    for (name, graph) in &graphs {
        for kappa_max in [1.0, 2.0, 5.0] {
            for i in 0..per_cell {
                let tensor_seed = seed.wrapping_add(i);
                out.push(InstanceConfig {
                    name: Some(format!("{name}-k{kappa_max}-s{tensor_seed}")),
                    graph: graph.clone(),
                    bond_dim: 2,
                    physical_dims: None,
                    tensors: TensorSource::RandomInjective {
                        kappa_max,
                        seed: tensor_seed,
                    },
                    order: None,
                    eps: 0.1,
                    c: 1.0,
                    tolerances: Tolerances::default(),
                    seed: 0,
                    expected: None,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Check {
    pub p: f64,
    pub m: u64,
    pub trials: u64,
    pub empirical: f64,
    pub expected: f64,
    pub sigma: f64,
    pub deviation_sigmas: f64,
    pub failure_bound: f64,
    /// Within 4 binomial standard deviations and below the exponential bound.
    pub passed: bool,
}

/// Monte Carlo termination frequency of the four-state chain vs the closed form.
pub fn lemma2_check(p: f64, m: u64, trials: u64, seed: u64) -> Result<Lemma2Check> {
    if trials == 0 {
        return Err(Error::InvalidInput("--trials must be positive".into()));
    }
    let expected = dynamics::p_term(p, m)?;
    let failure_bound = dynamics::p_fail_bound(p, m as f64)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        if dynamics::markov_simulate(p, m, &mut rng)?.terminated {
            hits += 1;
        }
    }
    let empirical = hits as f64 / trials as f64;
    let sigma = binomial_sigma(expected, trials);
    let deviation = (empirical - expected).abs();
    let deviation_sigmas = if sigma > 0.0 {
        deviation / sigma
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Lemma2Check {
        p,
        m,
        trials,
        empirical,
        expected,
        sigma,
        deviation_sigmas,
        failure_bound,
        passed: deviation_sigmas <= 4.0 && 1.0 - expected <= failure_bound + 1e-12,
    })
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
