//! Regenerates `fixtures/*.json`: random injective instances frozen into
//! explicit tensors, with their oracle values attached.
//!
//! `cargo run -p peps-forge --example make_fixtures -- <out_dir>`

use std::path::PathBuf;

use peps_forge::dynamics::Simulation;
use peps_forge::harness::{ExpectedValues, GraphSpec, InstanceConfig, TensorSource, Tolerances};

fn main() -> peps_forge::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&out)?;
    let specs = [
        ("chain2", GraphSpec::Chain { n: 2 }, 5.0, 11, None),
        ("chain3", GraphSpec::Chain { n: 3 }, 2.0, 12, None),
        ("chain4", GraphSpec::Chain { n: 4 }, 5.0, 13, None),
        ("ring4", GraphSpec::Ring { n: 4 }, 2.0, 14, Some(vec![1, 0, 2, 3])),
        ("grid2x2", GraphSpec::Grid { rows: 2, cols: 2 }, 5.0, 15, None),
    ];
    for (name, graph, kappa_max, seed, order) in specs {
        let config = InstanceConfig {
            name: Some(name.to_string()),
            graph,
            bond_dim: 2,
            physical_dims: None,
            tensors: TensorSource::RandomInjective { kappa_max, seed },
            order,
            eps: 0.1,
            c: 1.0,
            tolerances: Tolerances::default(),
            seed: 1,
            expected: None,
        };
        let mut fixture = config.materialize()?;
        let peps = fixture.build_peps()?;
        let sim = Simulation::prepare(peps.clone(), fixture.c, fixture.tolerances.zero_tol)?;
        fixture.expected = Some(ExpectedValues {
            kappa: peps.tensors().iter().map(|t| t.kappa).collect(),
            overlap: sim.overlaps().to_vec(),
            gap: sim.analyses().iter().map(|a| a.gap).collect(),
        });
        let path = out.join(format!("{name}.json"));
        std::fs::write(&path, fixture.to_json())?;
        println!("{} overlaps {:?}", path.display(), sim.overlaps());
    }
    Ok(())
}
