//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed under
//! `cargo test`. Exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use peps_forge::dynamics::{self, RunMode, RunParams, Simulation};
use peps_forge::hamiltonian::{self, TermKind};
use peps_forge::harness::cli::lemma1_suite;
use peps_forge::harness::stats::{binomial_sigma, chi_square_homogeneity, histogram};
use peps_forge::harness::sweep::{self, SweepParams};
use peps_forge::harness::{GraphSpec, InstanceConfig, TensorSource, Tolerances};
use peps_forge::linalg;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const FIXTURES: [&str; 5] = ["chain2", "chain3", "chain4", "ring4", "grid2x2"];

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn fixture(name: &str) -> Result<InstanceConfig, String> {
    InstanceConfig::from_path(&fixture_path(name)).map_err(|e| format!("{name}: {e}"))
}

fn prepared(name: &str) -> Result<(InstanceConfig, Simulation), String> {
    let config = fixture(name)?;
    let peps = config.build_peps().map_err(|e| format!("{name}: {e}"))?;
    let sim = Simulation::prepare(peps, config.c, config.tolerances.zero_tol).map_err(|e| format!("{name}: {e}"))?;
    Ok((config, sim))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs as f64, || {
        format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn overlap_bound_suite() -> Outcome {
    let start = Instant::now();
    let suite = lemma1_suite(10, 1000);
    let (mut steps, mut violations, mut min_margin) = (0usize, 0usize, f64::INFINITY);
    for config in &suite {
        let peps = config.build_peps().map_err(|e| e.to_string())?;
        let report = dynamics::lemma1_report(&peps).map_err(|e| e.to_string())?;
        steps += report.steps.len();
        violations += report.violations;
        min_margin = min_margin.min(report.min_margin());
    }
    ensure(suite.len() >= 100, || format!("only {} instances", suite.len()))?;
    ensure(violations == 0, || format!("{violations} violations"))?;
    within(start.elapsed(), 60)?;
    Ok(format!(
        "{} instances, {steps} steps, 0 violations, min margin {min_margin:.2e}",
        suite.len()
    ))
}

fn termination_closed_form() -> Outcome {
    let start = Instant::now();
    let trials = 100_000u64;
    let mut worst = 0.0f64;
    for (i, p) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        for m in [1u64, 2, 4, 8] {
            let expected = dynamics::p_term(p, m).map_err(|e| e.to_string())?;
            let mut rng = ChaCha20Rng::seed_from_u64(0x5eed + 16 * i as u64 + m);
            let mut hits = 0u64;
            for _ in 0..trials {
                hits += u64::from(
                    dynamics::markov_simulate(p, m, &mut rng)
                        .map_err(|e| e.to_string())?
                        .terminated,
                );
            }
            let empirical = hits as f64 / trials as f64;
            let sigmas = (empirical - expected).abs() / binomial_sigma(expected, trials);
            worst = worst.max(sigmas);
            ensure(sigmas <= 4.0, || {
                format!("p={p} m={m}: {empirical} vs {expected} ({sigmas:.2} sigma)")
            })?;
            let bound = dynamics::p_fail_bound(p, m as f64).map_err(|e| e.to_string())?;
            ensure(1.0 - expected <= bound, || {
                format!("p={p} m={m}: exponential bound violated")
            })?;
        }
    }
    let mut grid = 0usize;
    for s in 1..=100u32 {
        for k in 1..=20u32 {
            let p = f64::from(k) * 0.05;
            let fail = dynamics::failure_probability(p, f64::from(s) / p);
            let limit = 1.0 / (2.0 * std::f64::consts::E * f64::from(s));
            ensure(fail <= limit, || format!("s={s} p={p}: {fail} > {limit}"))?;
            grid += 1;
        }
    }
    within(start.elapsed(), 30)?;
    Ok(format!(
        "20 cells within {worst:.2} sigma, {grid} grid points under 1/(2es)"
    ))
}

fn success_probability() -> Outcome {
    let start = Instant::now();
    let eps = 0.1;
    let config = InstanceConfig {
        name: Some("chain4-random".into()),
        graph: GraphSpec::Chain { n: 4 },
        bond_dim: 2,
        physical_dims: None,
        tensors: TensorSource::RandomInjective {
            kappa_max: 2.0,
            seed: 42,
        },
        order: None,
        eps,
        c: 1.0,
        tolerances: Tolerances::default(),
        seed: 0,
        expected: None,
    };
    let params = SweepParams {
        trials: 200,
        base_seed: 0,
        instances: 1,
        eps,
        mode: RunMode::Bounded,
    };
    let result = sweep::run_sweep(&config, &params).map_err(|e| e.to_string())?;
    let sigma = binomial_sigma(1.0 - eps, params.trials);
    let threshold = 1.0 - eps - 3.0 * sigma;
    let s = &result.summary;
    ensure(s.success_rate >= threshold, || {
        format!("success rate {} < {threshold:.4}", s.success_rate)
    })?;
    ensure(s.bound_violations == 0, || {
        format!("{} runs exceeded the measurement bound", s.bound_violations)
    })?;
    within(start.elapsed(), 300)?;
    let bound = result.rows[0].measurement_bound;
    Ok(format!(
        "success {:.3} >= {threshold:.3}, max measurements {} <= {bound:.1}",
        s.success_rate, s.max_measurements
    ))
}

fn end_to_end_fidelity() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut runs = 0u64;
    for name in FIXTURES {
        let (config, sim) = prepared(name)?;
        for seed in 0..20 {
            let report = sim
                .run(&RunParams {
                    seed,
                    eps: config.eps,
                    mode: RunMode::Bounded,
                })
                .map_err(|e| format!("{name}: {e}"))?;
            if let Some(f) = report.final_fidelity {
                ensure(f >= 1.0 - 1e-8, || format!("{name} seed {seed}: fidelity {f}"))?;
                worst = worst.min(f);
                runs += 1;
            }
        }
    }
    ensure(runs > 0, || "no successful runs".into())?;
    Ok(format!("{runs} successful runs, min fidelity 1 - {:.1e}", 1.0 - worst))
}

fn parent_hamiltonians() -> Outcome {
    let mut checked = 0usize;
    let mut worst_identity = 0.0f64;
    for name in FIXTURES {
        let config = fixture(name)?;
        let peps = config.build_peps().map_err(|e| e.to_string())?;
        let sequence = hamiltonian::hamiltonian_sequence(&peps, config.c).map_err(|e| e.to_string())?;
        for h in &sequence {
            let t = h.step();
            let spectrum = h.spectrum().map_err(|e| e.to_string())?;
            let ev = &spectrum.eigenvalues;
            ensure(ev[0] >= -1e-9, || format!("{name} H_{t} not PSD: {}", ev[0]))?;
            ensure(ev[0].abs() <= 1e-9, || format!("{name} H_{t} ground energy {}", ev[0]))?;
            let analysis = hamiltonian::ground_analysis(h, config.tolerances.zero_tol).map_err(|e| e.to_string())?;
            ensure(analysis.gap > 0.0, || format!("{name} H_{t} gap {}", analysis.gap))?;
            let (oracle, _) = peps.contract_partial(t).map_err(|e| e.to_string())?;
            let f = analysis.ground_state.fidelity(&oracle);
            ensure(f >= 1.0 - 1e-9, || format!("{name} H_{t} fidelity {f}"))?;
            checked += 1;
        }
        let untouched = vec![false; peps.graph().vertex_count()];
        for edge in 0..peps.graph().edges().len() {
            let projected = hamiltonian::parent_term(&peps, edge, &untouched).map_err(|e| e.to_string())?;
            let direct = hamiltonian::edge_pair_term(peps.graph(), edge);
            ensure(projected.kind == TermKind::EdgePair, || {
                format!("{name} edge {edge}: kind {:?}", projected.kind)
            })?;
            let diff = linalg::max_abs_diff(&projected.matrix, &direct.matrix);
            ensure(diff <= 1e-12, || {
                format!("{name} edge {edge}: identity parent term differs by {diff:.2e}")
            })?;
            worst_identity = worst_identity.max(diff);
        }
    }
    Ok(format!(
        "{checked} Hamiltonians, identity-term deviation {worst_identity:.1e}"
    ))
}

fn model_equivalence() -> Outcome {
    let trials = 10_000u64;
    let mut summaries = Vec::new();
    let mut distinct: Vec<f64> = Vec::new();
    for (i, name) in ["chain3", "chain4", "grid2x2"].into_iter().enumerate() {
        let (config, sim) = prepared(name)?;
        let (t, &p) = sim
            .overlaps()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one step");
        let mut full = Vec::with_capacity(trials as usize);
        for seed in 0..trials {
            let report = sim
                .run(&RunParams {
                    seed,
                    eps: config.eps,
                    mode: RunMode::UntilSuccess,
                })
                .map_err(|e| format!("{name}: {e}"))?;
            full.push(report.vertices[t].measurements);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(0xc41 + i as u64);
        let mut chain = Vec::with_capacity(trials as usize);
        for _ in 0..trials {
            chain.push(
                dynamics::markov_simulate(p, u64::MAX, &mut rng)
                    .map_err(|e| e.to_string())?
                    .measurements,
            );
        }
        let test = chi_square_homogeneity(&histogram(full), &histogram(chain));
        ensure(test.p_value > 0.001, || {
            format!("{name} step {t} (p={p:.4}): chi-square p-value {}", test.p_value)
        })?;
        if distinct.iter().all(|q| (q - p).abs() > 1e-6) {
            distinct.push(p);
        }
        summaries.push(format!("{name} p={p:.3} pv={:.3}", test.p_value));
    }
    ensure(distinct.len() >= 3, || "fewer than 3 distinct overlaps".into())?;
    Ok(summaries.join(", "))
}

fn determinism_and_round_trip() -> Outcome {
    for name in FIXTURES {
        let text = std::fs::read_to_string(fixture_path(name)).map_err(|e| e.to_string())?;
        let config = InstanceConfig::from_json(&text).map_err(|e| e.to_string())?;
        let again = InstanceConfig::from_json(&config.to_json()).map_err(|e| e.to_string())?;
        ensure(again == config, || format!("{name}: config does not round-trip"))?;
        ensure(config.to_json() == text, || {
            format!("{name}: serialization is not byte-stable")
        })?;

        let report = |c: &InstanceConfig| -> Result<String, String> {
            let (_, sim) = prepared(name)?;
            let r = sim
                .run(&RunParams {
                    seed: c.seed,
                    eps: c.eps,
                    mode: RunMode::Bounded,
                })
                .map_err(|e| e.to_string())?;
            serde_json::to_string(&r).map_err(|e| e.to_string())
        };
        ensure(report(&config)? == report(&again)?, || {
            format!("{name}: reports differ")
        })?;
    }
    let config = fixture("chain3")?;
    let params = SweepParams {
        trials: 50,
        base_seed: 3,
        instances: 1,
        eps: 0.1,
        mode: RunMode::Bounded,
    };
    let csv = || -> Result<Vec<u8>, String> {
        let result = sweep::run_sweep(&config, &params).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        sweep::write_csv(&result.rows, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    ensure(csv()? == csv()?, || "parallel sweep CSV differs between runs".into())?;
    Ok(format!(
        "{} fixtures round-trip, reports and sweep CSV byte-identical",
        FIXTURES.len()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("overlap lower bound on random instances", overlap_bound_suite),
        (
            "repair-loop termination closed form and bounds",
            termination_closed_form,
        ),
        (
            "bounded-mode success probability and measurement bound",
            success_probability,
        ),
        ("end-to-end fidelity after gauge restoration", end_to_end_fidelity),
        ("parent Hamiltonian spectra and ground states", parent_hamiltonians),
        ("full simulation matches the four-state chain", model_equivalence),
        ("determinism and config round-trip", determinism_and_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
