//! Seeded random instances: Haar isometries, unitaries, states and POVMs.
//!
//! All generators take an explicit RNG. [`rng_from_seed`] and [`trial_rng`]
//! give the deterministic ChaCha streams used throughout the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{c, eigenvalues_hermitian, identity, ComplexMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from a master seed.
pub fn trial_rng(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Complex Gaussian matrix with i.i.d. entries of unit variance.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-distributed isometry `cols -> rows`, via QR of a Gaussian matrix with
/// the diagonal of `R` rotated to the positive reals.
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rng, rows, cols).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    haar_isometry(rng, d, d)
}

/// Haar-random unit column vector.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, 1);
    let n = g.norm();
    g / c(n, 0.0)
}

/// Random density matrix `G G^dag / Tr` with `G` a `d x rank` Gaussian matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m / c(tr, 0.0)
}

/// Density matrix with a prescribed spectrum in a Haar-random eigenbasis.
pub fn density_with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> ComplexMatrix {
    let d = spectrum.len();
    let u = haar_unitary(rng, d);
    let mut scaled = u.clone();
    for (j, &p) in spectrum.iter().enumerate() {
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= c(p, 0.0));
    }
    scaled * u.adjoint()
}

/// Random POVM on dimension `d`: `d + 1` weighted Haar rank-one operators,
/// rescaled so their sum is at most the identity, plus the deficit operator
/// as a final element when it is nonzero.
pub fn random_povm_elements<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<ComplexMatrix> {
    loop {
        let mut elems: Vec<ComplexMatrix> = (0..d + 1)
            .map(|_| {
                let v = random_ket(rng, d);
                let w: f64 = rng.random_range(0.05..1.0);
                (&v * v.adjoint()) * c(w, 0.0)
            })
            .collect();
        let sum = elems.iter().fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e);
        let top = eigenvalues_hermitian(&sum).expect("square")[0];
        elems.iter_mut().for_each(|e| *e /= c(top, 0.0));
        let deficit = identity(d) - sum / c(top, 0.0);
        let vals = eigenvalues_hermitian(&deficit).expect("square");
        if vals[d - 1] < -1e-12 {
            continue;
        }
        if vals[0] > 1e-12 {
            elems.push(deficit);
        }
        return elems;
    }
}

/// Projective POVM onto a Haar-random orthonormal basis.
pub fn random_basis_povm<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<ComplexMatrix> {
    let u = haar_unitary(rng, d);
    (0..d)
        .map(|j| {
            let v = u.column(j).into_owned();
            &v * v.adjoint()
        })
        .collect()
}
