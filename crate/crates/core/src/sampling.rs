//! Seeded random matrices.
//!
//! All generators are driven by a ChaCha stream so identical seeds give
//! bitwise-identical output on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::spectral::{C64, CMatrix, HermitianMatrix, Isometry, SpectralDecomposition};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a master seed (splitmix64 finalizer).
pub fn mix_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = C64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    m
}

/// Sample from the Gaussian unitary ensemble.
pub fn gaussian_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(dim, dim, rng);
    HermitianMatrix::hermitian_part(g)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// First `cols` columns of a Haar unitary.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Isometry {
    let u = random_unitary(rows, rng);
    Isometry::new(u.columns(0, cols).into_owned()).expect("columns of a unitary")
}

/// Random positive semidefinite matrix `G G*` normalized to unit trace.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(dim, dim, rng);
    let p = HermitianMatrix::hermitian_part(&g * g.adjoint());
    let t = p.trace();
    p.scale(1.0 / t)
}

/// Endpoints usable for sampling inside `interval`: closed ends as given,
/// open ends pulled in slightly.
fn sampling_bounds(interval: &Interval) -> Result<(f64, f64)> {
    if !interval.is_bounded() {
        return Err(Error::UnboundedInterval(interval.to_string()));
    }
    Ok((
        interval.clamp_inside(interval.lower),
        interval.clamp_inside(interval.upper),
    ))
}

pub fn random_hermitian_in(dim: usize, interval: &Interval, seed: u64) -> Result<HermitianMatrix> {
    random_hermitian_in_with(dim, interval, &mut rng_from_seed(seed))
}

/// Gaussian Hermitian matrix whose spectrum is affinely rescaled onto a
/// uniformly drawn closed subinterval of `interval`.
pub fn random_hermitian_in_with<R: Rng + ?Sized>(
    dim: usize,
    interval: &Interval,
    rng: &mut R,
) -> Result<HermitianMatrix> {
    if dim == 0 {
        return Err(Error::Empty);
    }
    let (lo, hi) = sampling_bounds(interval)?;
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let (c, d) = {
        let a = lo + u1 * (hi - lo);
        let b = lo + u2 * (hi - lo);
        (a.min(b), a.max(b))
    };
    if dim == 1 {
        return Ok(HermitianMatrix::scalar(1, c));
    }
    let g = gaussian_hermitian(dim, rng);
    let eig = g.eigen();
    let lmin = eig.eigenvalues[0];
    let lmax = eig.eigenvalues[dim - 1];
    let spread = lmax - lmin;
    let eigenvalues = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let t = if spread > 0.0 { (l - lmin) / spread } else { 0.5 };
            (c + t * (d - c)).clamp(lo, hi)
        })
        .collect();
    let rescaled = SpectralDecomposition {
        eigenvalues,
        eigenvectors: eig.eigenvectors,
    };
    Ok(HermitianMatrix::hermitian_part(rescaled.reconstruct()))
}

/// Hermitian matrix with prescribed eigenvalues and a Haar-random eigenbasis.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(eigenvalues: &[f64], rng: &mut R) -> HermitianMatrix {
    let u = random_unitary(eigenvalues.len(), rng);
    let d = SpectralDecomposition {
        eigenvalues: eigenvalues.to_vec(),
        eigenvectors: u,
    };
    HermitianMatrix::hermitian_part(d.reconstruct())
}
