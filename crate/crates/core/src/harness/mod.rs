//! Instance generation, configuration, sweeps, statistics and the CLI.

pub mod cli;
pub mod config;
pub mod stats;
pub mod sweep;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix};
use crate::network::PepsTensor;

pub use config::{ExpectedValues, GraphSpec, InstanceConfig, TensorEntry, TensorSource, Tolerances};

/// Largest global dimension accepted unless `PEPS_FORGE_DIM_CAP` says otherwise.
pub const DEFAULT_DIM_CAP: usize = 4096;
pub const DIM_CAP_ENV: &str = "PEPS_FORGE_DIM_CAP";

pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// Fails when the product of `dims` exceeds [`dim_cap`].
pub fn check_capacity(what: &str, dims: &[usize]) -> Result<()> {
    let cap = dim_cap();
    let mut total: usize = 1;
    for &d in dims {
        total = total.saturating_mul(d);
    }
    if total > cap {
        return Err(Error::Capacity {
            what: what.to_string(),
            dim: total,
            cap,
        });
    }
    Ok(())
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// Orthonormal columns from the QR factor of a complex Gaussian matrix.
fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    gaussian_matrix(rows, cols, rng).qr().q()
}

/// A random injective `d x virtual_dim` tensor `W diag(sigma) V^dagger` with
/// singular values uniform in `[1 / kappa_max, 1]`.
pub fn generate_random_injective<R: Rng + ?Sized>(
    vertex: usize,
    physical_dim: usize,
    virtual_dim: usize,
    kappa_max: f64,
    rng: &mut R,
) -> Result<PepsTensor> {
    if physical_dim < virtual_dim {
        return Err(Error::InvalidInput(format!(
            "physical dimension {physical_dim} below virtual dimension {virtual_dim}"
        )));
    }
    if !(kappa_max >= 1.0) || !kappa_max.is_finite() {
        return Err(Error::InvalidInput(format!("kappa_max must be >= 1, got {kappa_max}")));
    }
    let left = random_isometry(physical_dim, virtual_dim, rng);
    let right = random_isometry(virtual_dim, virtual_dim, rng);
    let lo = 1.0 / kappa_max;
    let sigma: Vec<f64> = (0..virtual_dim)
        .map(|_| {
            if kappa_max == 1.0 {
                1.0
            } else {
                rng.random_range(lo..=1.0)
            }
        })
        .collect();
    let matrix = left * linalg::diag(&sigma) * right.adjoint();
    PepsTensor::canonicalize(vertex, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{condition_number, hermitian_eig, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kappa_one_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = generate_random_injective(0, 6, 4, 1.0, &mut rng).unwrap();
        assert!((t.kappa - 1.0).abs() < 1e-10);
        let gram = t.matrix.adjoint() * &t.matrix;
        assert!(max_abs_diff(&gram, &linalg::identity(4)) < 1e-10);
    }

    #[test]
    fn kappa_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let t = generate_random_injective(0, 4, 4, 3.0, &mut rng).unwrap();
            let k = condition_number(&t.matrix).unwrap();
            assert!((1.0..=3.0 + 1e-9).contains(&k));
            assert!((k - t.kappa).abs() < 1e-9);
        }
    }

    #[test]
    fn square_tensor_has_positive_definite_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = generate_random_injective(0, 4, 4, 2.0, &mut rng).unwrap();
        assert_eq!(t.positive.shape(), (4, 4));
        assert!(hermitian_eig(&t.positive).unwrap().eigenvalues[0] > 0.0);
        assert!(max_abs_diff(&(&t.isometry * &t.positive), &t.matrix) < 1e-10);
        let unitary = t.isometry.adjoint() * &t.isometry;
        assert!(max_abs_diff(&unitary, &linalg::identity(4)) < 1e-10);
    }

    #[test]
    fn generator_rejects_wide_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(generate_random_injective(0, 2, 4, 2.0, &mut rng).is_err());
    }
}
