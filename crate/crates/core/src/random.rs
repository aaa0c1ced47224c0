//! Seed derivation and Haar sampling.
//!
//! Every stochastic routine takes a master seed; trial `i` draws from a
//! ChaCha8 stream seeded with `derive_seed(master, i)`, so results do not
//! depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, C64};

pub type Rng = ChaCha8Rng;

/// splitmix64 finalizer over (master, index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(master: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, index))
}

pub fn complex_gaussian(rng: &mut Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Normalized complex Gaussian vector (Haar-distributed pure state).
pub fn haar_vector(dim: usize, rng: &mut Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar unitary: Gram-Schmidt on a Ginibre matrix. Column phases are fixed by
/// the orthogonalization itself (positive diagonal of R), which is what makes
/// the distribution Haar.
pub fn haar_unitary(dim: usize, rng: &mut Rng) -> CMatrix {
    orthonormalize_columns(&ginibre(dim, dim, rng))
}

/// Modified Gram-Schmidt on the columns of `m` (assumed full column rank).
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for c in 0..cols {
        let mut v = m.column(c);
        for _ in 0..2 {
            for u in &q {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|z| z / norm).collect());
    }
    CMatrix::from_fn(rows, cols, |r, c| q[c][r])
}
