use std::path::PathBuf;

use peps_forge::dynamics::Simulation;
use peps_forge::harness::InstanceConfig;

const FIXTURES: [&str; 5] = ["chain2", "chain3", "chain4", "ring4", "grid2x2"];

fn load(name: &str) -> InstanceConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"));
    InstanceConfig::from_path(&path).unwrap()
}

fn assert_close(name: &str, what: &str, got: &[f64], want: &[f64]) {
    assert_eq!(got.len(), want.len(), "{name} {what} length");
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= 1e-9, "{name} {what}[{i}]: {g} vs pinned {w}");
    }
}

#[test]
fn pinned_oracle_values_reproduce() {
    for name in FIXTURES {
        let config = load(name);
        let expected = config.expected.clone().expect("fixtures pin oracle values");
        let peps = config.build_peps().unwrap();
        let kappa: Vec<f64> = peps.tensors().iter().map(|t| t.kappa).collect();
        assert_close(name, "kappa", &kappa, &expected.kappa);
        let sim = Simulation::prepare(peps, config.c, config.tolerances.zero_tol).unwrap();
        assert_close(name, "overlap", sim.overlaps(), &expected.overlap);
        let gaps: Vec<f64> = sim.analyses().iter().map(|a| a.gap).collect();
        assert_close(name, "gap", &gaps, &expected.gap);
    }
}

#[test]
fn fixtures_are_explicit_and_injective() {
    for name in FIXTURES {
        let config = load(name);
        assert!(
            matches!(config.tensors, peps_forge::harness::TensorSource::Explicit { .. }),
            "{name}"
        );
        let peps = config.build_peps().unwrap();
        let graph = peps.graph();
        assert!(graph.edges().iter().all(|e| e.bond_dim == 2));
        for t in peps.tensors() {
            assert!(t.sigma_min() > 0.0);
            assert!(t.kappa >= 1.0);
        }
        for t in 1..graph.vertex_count() - 1 {
            assert!(peps.z_ratio_bound(t).is_ok(), "{name} step {t}");
        }
    }
}
