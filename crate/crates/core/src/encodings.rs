//! Classical encodings induced by POVMs on the reference system, joint
//! letter/outcome distributions, and the Holevo-bound check `I(X:M) ≤ ι`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dilation::DilationBundle;
use crate::error::{Error, Result};
use crate::measures::{MeasurementAnalysis, IDENTITY_TOL};
use crate::objects::{povm_of, Instrument, Povm, PurifiedInput, ZERO_PROB};
use crate::random::{random_povm_elements, trial_rng};
use crate::tensor::{func_on_support, kron, identity, names, partial_trace_matrix, trace, ComplexMatrix};

/// Tolerance on `Σ_x ρ_x = ρ` and on distribution normalization.
pub const ENCODING_TOL: f64 = 1e-9;

/// Letters `x` with unnormalized input states `ρ^Q_x = Tr_R[(P^R_x ⊗ 1) Ψ]`.
#[derive(Clone, Debug)]
pub struct Encoding {
    reference_povm: Povm,
    states: Vec<ComplexMatrix>,
    weights: Vec<f64>,
}

impl Encoding {
    pub fn alphabet(&self) -> Vec<&str> {
        self.reference_povm.elements().iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn reference_povm(&self) -> &Povm {
        &self.reference_povm
    }

    /// Unnormalized `ρ^Q_x`.
    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }

    /// `q(x) = Tr ρ^Q_x`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn ensemble_from_reference_povm(input: &PurifiedInput, povm_r: &Povm) -> Result<Encoding> {
    let (dr, dq) = (input.r_dim(), input.q_dim());
    if povm_r.dim() != dr {
        return Err(Error::DimensionMismatch(format!(
            "reference POVM on dimension {}, reference has dimension {dr}",
            povm_r.dim()
        )));
    }
    let joint = input.joint_state();
    let states: Vec<ComplexMatrix> = povm_r
        .elements()
        .iter()
        .map(|(_, p)| {
            let lifted = kron(p, &identity(dq)) * joint.matrix();
            crate::tensor::hermitize(&partial_trace_matrix(&lifted, &[dr, dq], &[1]))
        })
        .collect();
    let weights = states.iter().map(|s| trace(s).re).collect();
    Ok(Encoding {
        reference_povm: povm_r.clone(),
        states,
        weights,
    })
}

/// `p(x, m) = Tr[ℰ_m(ρ_x)]`, rows indexed by letters, columns by outcomes.
pub fn joint_distribution(enc: &Encoding, instr: &Instrument) -> Result<DMatrix<f64>> {
    if let Some(s) = enc.states.first() {
        if s.nrows() != instr.d_in() {
            return Err(Error::DimensionMismatch(format!(
                "encoding on dimension {}, instrument input dimension {}",
                s.nrows(),
                instr.d_in()
            )));
        }
    }
    let outcomes = instr.outcomes();
    Ok(DMatrix::from_fn(enc.len(), outcomes.len(), |x, m| {
        trace(&outcomes[m].apply(&enc.states[x])).re
    }))
}

/// `p(x, m) = Tr[ρ^R_m P^R_x] p(m)` from the conditional reference states of
/// a dilation.
pub fn joint_distribution_dual(enc: &Encoding, bundle: &DilationBundle) -> Result<DMatrix<f64>> {
    if enc.reference_povm.dim() != bundle.r_dim() {
        return Err(Error::DimensionMismatch(format!(
            "reference POVM on dimension {}, dilation reference dimension {}",
            enc.reference_povm.dim(),
            bundle.r_dim()
        )));
    }
    let mut p = DMatrix::zeros(enc.len(), bundle.n_outcomes());
    for m in 0..bundle.n_outcomes() {
        let pm = bundle.probabilities()[m];
        if pm <= ZERO_PROB {
            continue;
        }
        let rho_r = bundle.reduced_at(&[names::R], m)?;
        for (x, (_, px)) in enc.reference_povm.elements().iter().enumerate() {
            p[(x, m)] = trace(&(rho_r.matrix() * px)).re * pm;
        }
    }
    Ok(p)
}

/// `Σ p(x,m) log₂[p(x,m) / (p(x) p(m))]`, zero entries skipped.
pub fn classical_mutual_information(p: &DMatrix<f64>) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::BadDistribution("empty joint distribution".into()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -ZERO_PROB) {
        return Err(Error::BadDistribution(format!("entry {v} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > ENCODING_TOL {
        return Err(Error::BadDistribution(format!("entries sum to {total}")));
    }
    let rows: Vec<f64> = p.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = p.column_iter().map(|c| c.sum()).collect();
    let mut mi = 0.0;
    for x in 0..p.nrows() {
        for m in 0..p.ncols() {
            let v = p[(x, m)];
            if v > 0.0 {
                mi += v * (v / (rows[x] * cols[m])).log2();
            }
        }
    }
    Ok(mi)
}

/// Reference POVM whose induced ensemble is `ρ_x = √ρ P_x √ρ` ("pretty good"
/// encoding matched to `povm_q`).
///
/// With amplitude matrix `A` (`R x Q`), `B = conj(A)` has polar part
/// `W = B ρ^{-1/2}`; the element is `(W P_x W^dag)^T`, and the deficit
/// `1 - W W^dag` is added to the first element.
pub fn mirrored_povm(input: &PurifiedInput, povm_q: &Povm) -> Result<Povm> {
    if povm_q.dim() != input.q_dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVM on dimension {}, input has dimension {}",
            povm_q.dim(),
            input.q_dim()
        )));
    }
    let b = input.amplitude_matrix().map(|z| z.conj());
    let w = &b * func_on_support(input.rho().matrix(), |x| 1.0 / x.sqrt())?;
    let dr = input.r_dim();
    let mut elements: Vec<(String, ComplexMatrix)> = povm_q
        .elements()
        .iter()
        .map(|(l, p)| (l.clone(), (&w * p * w.adjoint()).transpose()))
        .collect();
    let deficit = (identity(dr) - &w * w.adjoint()).transpose();
    elements[0].1 += deficit;
    for (_, e) in &mut elements {
        *e = crate::tensor::hermitize(e);
    }
    Povm::new(dr, elements)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolevoReport {
    pub iota: f64,
    pub max_classical_mi: f64,
    pub margin: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// `I(X:M)` for the matched encoding of [`mirrored_povm`].
    pub matched_mi: f64,
    /// Largest `|p_forward - p_dual|` over all trials.
    pub route_residual: f64,
    pub all_within: bool,
}

fn numbered_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Random reference POVMs, one ChaCha stream per trial, plus the matched encoding.
pub fn holevo_check(input: &PurifiedInput, instr: &Instrument, n_trials: usize, seed: u64) -> Result<HolevoReport> {
    let analysis = MeasurementAnalysis::with_input(instr, input.clone())?;
    let iota = analysis.information_gain()?.clipped();
    let bundle = analysis.bundle();

    let evaluate = |povm: &Povm| -> Result<(f64, f64)> {
        let enc = ensemble_from_reference_povm(input, povm)?;
        let forward = joint_distribution(&enc, instr)?;
        let dual = joint_distribution_dual(&enc, bundle)?;
        let residual = (&forward - &dual).amax();
        Ok((classical_mutual_information(&forward)?, residual))
    };

    let matched = mirrored_povm(input, &povm_of(instr)?)?;
    let (matched_mi, mut route_residual) = evaluate(&matched)?;
    let mut best = matched_mi;
    for i in 0..n_trials {
        let mut rng = trial_rng(seed, i as u64 + 1);
        let elems = random_povm_elements(&mut rng, input.r_dim());
        let labels = numbered_labels(elems.len());
        let povm = Povm::new(input.r_dim(), labels.into_iter().zip(elems).collect())?;
        let (mi, res) = evaluate(&povm)?;
        best = best.max(mi);
        route_residual = route_residual.max(res);
    }
    Ok(HolevoReport {
        iota,
        max_classical_mi: best,
        margin: iota - best,
        n_trials,
        seed,
        matched_mi,
        route_residual,
        all_within: best <= iota + IDENTITY_TOL,
    })
}

impl HolevoReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn scaled(&self, factor: f64) -> HolevoReport {
        HolevoReport {
            iota: self.iota * factor,
            max_classical_mi: self.max_classical_mi * factor,
            margin: self.margin * factor,
            matched_mi: self.matched_mi * factor,
            ..self.clone()
        }
    }
}
