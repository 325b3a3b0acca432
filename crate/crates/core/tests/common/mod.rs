//! Independent oracles and random-instance generators shared by the
//! integration suites.
#![allow(dead_code)]

use infobalance::objects::{random_instrument, Channel};
use infobalance::random::{haar_isometry, random_density, rng_from_seed, SeededRng};
use infobalance::tensor::{c, func_on_support, ComplexMatrix};
use infobalance::{Instrument, LabeledState};
use nalgebra::DVector;
use rand::Rng;

pub fn diag(v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
}

/// Kronecker product by four nested loops.
pub fn kron_loops(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for p in (0..dims.len()).rev() {
        out[p] = index % dims[p];
        index /= dims[p];
    }
    out
}

/// Partial trace by summing over every pair of full multi-indices that
/// agree on the traced factors.
pub fn partial_trace_brute(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let total: usize = dims.iter().product();
    let kept: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let dk: usize = kept.iter().product();
    let mut out = ComplexMatrix::zeros(dk, dk);
    let reduced = |d: &[usize]| keep.iter().fold(0, |acc, &p| acc * dims[p] + d[p]);
    for i in 0..total {
        let di = digits(i, dims);
        for j in 0..total {
            let dj = digits(j, dims);
            let traced_equal = (0..dims.len()).filter(|p| !keep.contains(p)).all(|p| di[p] == dj[p]);
            if traced_equal {
                out[(reduced(&di), reduced(&dj))] += m[(i, j)];
            }
        }
    }
    out
}

/// `-Σ λ log₂ λ` straight from a spectrum.
pub fn entropy_from_spectrum(spectrum: &[f64]) -> f64 {
    spectrum.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// `Σ_K |Tr(ρ K)|²`
pub fn fidelity_trace_formula(rho: &ComplexMatrix, ch: &Channel) -> f64 {
    ch.kraus()
        .iter()
        .map(|k| (rho * k).trace().norm_sqr())
        .sum()
}

pub fn random_spectrum(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    let zeros = rng.random_range(0..d);
    let mut v: Vec<f64> = (0..d)
        .map(|i| if i < zeros { 0.0 } else { rng.random_range(0.01..1.0) })
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn state(m: ComplexMatrix) -> LabeledState {
    LabeledState::on("Q", m).expect("valid random state")
}

/// Random state with rank drawn from `1..=d`.
pub fn random_state(rng: &mut SeededRng, d: usize) -> LabeledState {
    let rank = rng.random_range(1..=d);
    state(random_density(rng, d, rank))
}

/// Random `(d_in, d_out, n_outcomes, multiplicity)` at desk scale.
pub fn random_shape(rng: &mut SeededRng, single_kraus: bool) -> (usize, usize, usize, usize) {
    loop {
        let d_in = rng.random_range(1..=3);
        let d_out = rng.random_range(1..=3);
        let n = rng.random_range(1..=4);
        let mult = if single_kraus { 1 } else { rng.random_range(1..=3) };
        if d_out * n * mult >= d_in && d_in + d_out > 2 {
            return (d_in, d_out, n, mult);
        }
    }
}

pub fn random_case(seed: u64, single_kraus: bool) -> Instrument {
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let (d_in, d_out, n, mult) = random_shape(&mut rng, single_kraus);
    random_instrument(seed, d_in, d_out, n, mult).expect("feasible shape")
}

/// Instrument with POVM `{P_m}` and Kraus operators `W_{m,k} √P_m`, where
/// `W_m` is a random isometry `d -> d_out·mult`.
pub fn realize_povm(rng: &mut SeededRng, povm: &[ComplexMatrix], d_out: usize, mult: usize) -> Instrument {
    let d = povm[0].nrows();
    let lists = povm
        .iter()
        .map(|p| {
            let root = func_on_support(p, f64::sqrt).expect("psd");
            let w = haar_isometry(rng, d_out * mult, d);
            (0..mult)
                .map(|k| w.rows(k * d_out, d_out).into_owned() * &root)
                .collect()
        })
        .collect();
    Instrument::from_kraus_lists(d, d_out, lists).expect("valid realization")
}

