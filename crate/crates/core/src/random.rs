//! Seeded random states and isometries.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed plus a stream
//! id, so results do not depend on scheduling.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{self, ComplexMatrix};
use crate::states::{validate_density, DensityMatrix, Ensemble, Member, PureState};

/// Smallest eigenvalue accepted by [`ginibre_full_rank`].
pub const FULL_RANK_FLOOR: f64 = 1e-3;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for a named substream; the name is hashed with 64-bit FNV-1a.
pub fn named_rng(seed: u64, label: &str) -> ChaCha8Rng {
    stream_rng(seed, fnv1a(label.as_bytes()))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `rows x cols` isometry (`cols <= rows`), by Gram-Schmidt
/// on a complex Gaussian matrix.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let mut v = ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng));
    for j in 0..cols {
        // two passes of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..rows).map(|i| v[(i, k)].conj() * v[(i, j)]).sum();
                for i in 0..rows {
                    let vik = v[(i, k)];
                    v[(i, j)] -= proj * vik;
                }
            }
        }
        let norm: f64 = (0..rows).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            v[(i, j)] /= norm;
        }
    }
    v
}

pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    haar_isometry(n, n, rng)
}

pub fn haar_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    let amp: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(amp).expect("Gaussian vector is nonzero")
}

/// `G G† / tr(G G†)` for an `n x n` complex Gaussian `G`.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    validate_density(w.unscale(tr)).expect("Ginibre matrix is a valid state")
}

/// Ginibre state resampled until its smallest eigenvalue is at least `floor`.
pub fn ginibre_full_rank<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> DensityMatrix {
    loop {
        let rho = ginibre(n, rng);
        let (vals, _) = linalg::hermitian_eigen(rho.matrix());
        if vals.last().copied().unwrap_or(0.0) >= floor {
            return rho;
        }
    }
}

/// `(1/√n) Σ_j e^{iθ_j} |j⟩` with independent uniform phases.
pub fn random_maximally_coherent<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    let s = 1.0 / (n as f64).sqrt();
    let amp = (0..n)
        .map(|_| C64::from_polar(s, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    PureState::new(amp).expect("unit vector by construction")
}

/// Mixture of `members` random maximally coherent states with random weights;
/// the ensemble is its own witness.
pub fn amc_witnessed<R: Rng + ?Sized>(n: usize, members: usize, rng: &mut R) -> Ensemble {
    let raw: Vec<f64> = (0..members).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let members = raw
        .iter()
        .map(|w| Member {
            weight: w / total,
            state: random_maximally_coherent(n, rng),
        })
        .collect();
    Ensemble::from_members(members).expect("mixture of valid states")
}

/// Random real correlation matrix: the Gram matrix of `n` random unit
/// vectors in `R^k`.
pub fn real_correlation<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> nalgebra::DMatrix<f64> {
    let vecs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum()
        }
    })
}
