//! Built-in parameterized instruments and named input states.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::objects::{Channel, Instrument};
use crate::random::{ginibre, haar_unitary, random_density, rng_from_seed};
use crate::tensor::{c, func_on_support, identity, ComplexMatrix, LabeledState};
use rand::Rng;

pub const FAMILY_NAMES: [&str; 5] = ["filter", "partial-dephasing", "depolarizing", "projective", "measure-reprepare"];

fn diag(v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
}

fn unit_param(family: &str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ParameterOutOfRange {
            family: family.to_string(),
            value,
            domain: "[0, 1]".into(),
        });
    }
    Ok(value)
}

/// Two-outcome qubit filter of strength `s`: `E_0 = diag(1 - s, 1)`,
/// `E_1 = diag(√(1 - (1-s)²), 0)`. `s = 0` is the identity.
pub fn filter(s: f64) -> Result<Instrument> {
    let s = unit_param("filter", s)?;
    let t = 1.0 - s;
    Instrument::from_kraus_lists(
        2,
        2,
        vec![vec![diag(&[t, 1.0])], vec![diag(&[(1.0 - t * t).max(0.0).sqrt(), 0.0])]],
    )
}

/// Weak `Z` measurement: `E_{0/1} = diag(√((1±λ)/2), √((1∓λ)/2))`.
/// `λ = 1` is projective, `λ = 0` reveals nothing.
pub fn partial_dephasing(lambda: f64) -> Result<Instrument> {
    let l = unit_param("partial-dephasing", lambda)?;
    let (a, b) = (((1.0 + l) / 2.0).sqrt(), ((1.0 - l) / 2.0).sqrt());
    Instrument::from_kraus_lists(2, 2, vec![vec![diag(&[a, b])], vec![diag(&[b, a])]])
}

/// Single-outcome qubit depolarizing channel `ρ -> (1-p)ρ + p I/2`.
pub fn depolarizing(p: f64) -> Result<Instrument> {
    let p = unit_param("depolarizing", p)?;
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    let x = ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o]);
    let y = ComplexMatrix::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]);
    let z = diag(&[1.0, -1.0]);
    let w = c((p / 4.0).sqrt(), 0.0);
    let kraus = vec![identity(2) * c((1.0 - 0.75 * p).sqrt(), 0.0), x * w, y * w, z * w];
    Ok(Instrument::from_channel(&Channel::new(2, 2, kraus)?))
}

/// Projective qubit measurement along a Bloch axis tilted by `param·π/2`
/// from `Z` toward `X`.
pub fn projective(param: f64) -> Result<Instrument> {
    let t = unit_param("projective", param)? * FRAC_PI_2 / 2.0;
    let (cs, sn) = (t.cos(), t.sin());
    let up = ComplexMatrix::from_column_slice(2, 1, &[c(cs, 0.0), c(sn, 0.0)]);
    let down = ComplexMatrix::from_column_slice(2, 1, &[c(-sn, 0.0), c(cs, 0.0)]);
    Instrument::from_kraus_lists(2, 2, vec![vec![&up * up.adjoint()], vec![&down * down.adjoint()]])
}

/// Measure `Z`, then discard the post-measurement state for `I/2`.
pub fn measure_reprepare() -> Result<Instrument> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket_bra = |k: usize, m: usize| {
        let mut e = ComplexMatrix::zeros(2, 2);
        e[(k, m)] = c(h, 0.0);
        e
    };
    Instrument::from_kraus_lists(
        2,
        2,
        vec![vec![ket_bra(0, 0), ket_bra(1, 0)], vec![ket_bra(0, 1), ket_bra(1, 1)]],
    )
}

/// Splits `name[:param]`.
pub fn parse_family_spec(spec: &str) -> Result<(String, Option<f64>)> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p.trim().parse().map_err(|_| Error::Parse {
                location: "family parameter".into(),
                message: format!("`{p}` is not a number"),
            })?;
            (n, Some(v))
        }
        None => (spec, None),
    };
    if !FAMILY_NAMES.contains(&name) {
        return Err(Error::UnknownFamily(name.to_string()));
    }
    Ok((name.to_string(), param))
}

/// Instrument of a named family; `None` selects the default parameter.
pub fn family_instrument(name: &str, param: Option<f64>) -> Result<Instrument> {
    match name {
        "filter" => filter(param.unwrap_or(2.0 / 3.0)),
        "partial-dephasing" => partial_dephasing(param.unwrap_or(1.0)),
        "depolarizing" => depolarizing(param.unwrap_or(1.0)),
        "projective" => projective(param.unwrap_or(0.0)),
        "measure-reprepare" => measure_reprepare(),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

pub fn instrument_from_spec(spec: &str) -> Result<Instrument> {
    let (name, param) = parse_family_spec(spec)?;
    family_instrument(&name, param)
}

/// `E_m = √q_m U_m` (exactly reversible), perturbed by `eta` times a
/// Gaussian in every Kraus slot and renormalized to trace preservation.
pub fn perturbed_reversible(seed: u64, d: usize, n_outcomes: usize, multiplicity: usize, eta: f64) -> Result<Instrument> {
    if d == 0 || n_outcomes == 0 || multiplicity == 0 {
        return Err(Error::DimensionTooSmall("all dimensions must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let weights: Vec<f64> = (0..n_outcomes).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut lists: Vec<Vec<ComplexMatrix>> = weights
        .iter()
        .map(|w| {
            let u = haar_unitary(&mut rng, d) * c((w / total).sqrt(), 0.0);
            (0..multiplicity)
                .map(|k| {
                    let base = if k == 0 { u.clone() } else { ComplexMatrix::zeros(d, d) };
                    base + ginibre(&mut rng, d, d) * c(eta, 0.0)
                })
                .collect()
        })
        .collect();
    let gram = lists
        .iter()
        .flatten()
        .fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e.adjoint() * e);
    let fix = func_on_support(&gram, |x| 1.0 / x.sqrt())?;
    lists.iter_mut().flatten().for_each(|e| *e = &*e * &fix);
    Instrument::from_kraus_lists(d, d, lists)
}

/// Named input states: `maximally-mixed`, `pure`, `plus`, `diag:p0,p1,...`
/// (`diag:p` on a qubit means `diag(p, 1-p)`), `random:SEED`. Returns
/// `None` for anything else.
pub fn preset_state(spec: &str, d: usize) -> Option<Result<LabeledState>> {
    let matrix = match spec {
        "maximally-mixed" => Ok(identity(d) / c(d as f64, 0.0)),
        "pure" => {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(0, 0)] = c(1.0, 0.0);
            Ok(m)
        }
        "plus" => Ok(ComplexMatrix::from_element(d, d, c(1.0 / d as f64, 0.0))),
        _ => {
            if let Some(rest) = spec.strip_prefix("diag:") {
                parse_diag(rest, d)
            } else {
                let rest = spec.strip_prefix("random:")?;
                rest.parse::<u64>()
                    .map(|seed| random_density(&mut rng_from_seed(seed), d, d))
                    .map_err(|_| Error::Parse {
                        location: "state preset".into(),
                        message: format!("`{rest}` is not a seed"),
                    })
            }
        }
    };
    Some(matrix.and_then(|m| LabeledState::on(crate::tensor::names::Q, m)))
}

fn parse_diag(rest: &str, d: usize) -> Result<ComplexMatrix> {
    let mut vals = rest
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                location: "state preset".into(),
                message: format!("`{s}` is not a number"),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() == 1 && d == 2 {
        vals.push(1.0 - vals[0]);
    }
    if vals.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "diag preset has {} entries, instrument input dimension is {d}",
            vals.len()
        )));
    }
    Ok(diag(&vals))
}
