//! Indirect-measurement extension of an instrument.
//!
//! The instrument is realized by a single isometry
//! `V = Σ_{m,k} E_{m,k} ⊗ |m>^{X_A} ⊗ |k>^{A''}` from `Q` into
//! `Q' ⊗ X_A ⊗ A''`. Applying `1_R ⊗ V` to the purified input and reading
//! the register `X_A` gives, for each outcome, a pure conditional state
//! `Υ_m` on `[R, Q', A'']`. The averaged state
//! `Θ = Σ_m p(m) Υ_m ⊗ |m><m|` lives on `[R, Q', A'', X]`.
//!
//! Outcomes with fewer Kraus operators than the largest multiplicity are
//! zero-padded in `A''`.

use crate::error::{Error, Result};
use crate::objects::{Instrument, PurifiedInput, ZERO_PROB};
use crate::tensor::{
    c, eig_hermitian, identity, max_abs, names, outer, ComplexMatrix, LabeledState, Subsystem,
};

/// Isometry tolerance for [`unitary_completion`].
pub const ISOMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ConditionalState {
    /// Normalized `|Υ_m>`, index `(r·d_out + q)·mult + k`.
    pub ket: ComplexMatrix,
    pub state: LabeledState,
}

#[derive(Clone, Debug)]
pub struct DilationBundle {
    isometry: ComplexMatrix,
    d_r: usize,
    d_out: usize,
    multiplicity: usize,
    outcome_labels: Vec<String>,
    probs: Vec<f64>,
    conditional: Vec<Option<ConditionalState>>,
    theta_full: LabeledState,
}

/// `V` with row index `(q·n + m)·mult + k` for output basis `q`.
pub fn dilation_isometry(instr: &Instrument) -> ComplexMatrix {
    let n = instr.n_outcomes();
    let mult = instr.max_multiplicity();
    let d_out = instr.d_out();
    let mut v = ComplexMatrix::zeros(d_out * n * mult, instr.d_in());
    for (m, o) in instr.outcomes().iter().enumerate() {
        for (k, e) in o.kraus.iter().enumerate() {
            for q in 0..d_out {
                v.set_row((q * n + m) * mult + k, &e.row(q));
            }
        }
    }
    v
}

pub fn dilate(instr: &Instrument, input: &PurifiedInput) -> Result<DilationBundle> {
    instr.ensure_valid()?;
    if input.q_dim() != instr.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "instrument input dimension {}, state dimension {}",
            instr.d_in(),
            input.q_dim()
        )));
    }
    let v = dilation_isometry(instr);
    let n = instr.n_outcomes();
    let mult = instr.max_multiplicity();
    let (d_r, d_out) = (input.r_dim(), instr.d_out());

    // (1_R ⊗ V)|ψ>: amplitude matrix R x Q times V^T gives R x (Q' X_A A'').
    let big = input.amplitude_matrix() * v.transpose();

    let block = d_out * mult;
    let labels = vec![
        Subsystem::new(names::R, d_r),
        Subsystem::new(names::QP, d_out),
        Subsystem::new(names::APP, mult),
    ];
    let mut probs = Vec::with_capacity(n);
    let mut unnormalized = Vec::with_capacity(n);
    let mut conditional = Vec::with_capacity(n);
    for m in 0..n {
        let mut ket = ComplexMatrix::zeros(d_r * block, 1);
        for r in 0..d_r {
            for q in 0..d_out {
                for k in 0..mult {
                    ket[((r * d_out + q) * mult + k, 0)] = big[(r, (q * n + m) * mult + k)];
                }
            }
        }
        let p = ket.norm_squared();
        probs.push(p);
        conditional.push(if p > ZERO_PROB {
            let normalized = &ket / c(p.sqrt(), 0.0);
            let state = LabeledState::trusted(labels.clone(), outer(&normalized, &normalized), false);
            Some(ConditionalState {
                ket: normalized,
                state,
            })
        } else {
            None
        });
        unnormalized.push(ket);
    }

    let dim = d_r * block;
    let mut theta = ComplexMatrix::zeros(dim * n, dim * n);
    for (m, ket) in unnormalized.iter().enumerate() {
        for i in 0..dim {
            if ket[(i, 0)].norm() == 0.0 {
                continue;
            }
            for j in 0..dim {
                theta[(i * n + m, j * n + m)] = ket[(i, 0)] * ket[(j, 0)].conj();
            }
        }
    }
    let mut full_labels = labels;
    full_labels.push(Subsystem::new(names::X, n));
    Ok(DilationBundle {
        isometry: v,
        d_r,
        d_out,
        multiplicity: mult,
        outcome_labels: instr.labels().iter().map(|s| s.to_string()).collect(),
        probs,
        conditional,
        theta_full: LabeledState::trusted(full_labels, theta, false),
    })
}

impl DilationBundle {
    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcome_labels
    }

    pub fn n_outcomes(&self) -> usize {
        self.probs.len()
    }

    pub fn r_dim(&self) -> usize {
        self.d_r
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// `Θ` on `[R, Qp, App, X]`.
    pub fn theta_full(&self) -> &LabeledState {
        &self.theta_full
    }

    /// `Υ_m`, or `None` when `p(m)` is at most [`ZERO_PROB`].
    pub fn conditional(&self, m: usize) -> Option<&ConditionalState> {
        self.conditional.get(m).and_then(Option::as_ref)
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize> {
        self.outcome_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    /// Marginal of `Θ` (no outcome) or of `Υ_m` (outcome given) on `keep`.
    pub fn reduced(&self, keep: &[&str], outcome: Option<&str>) -> Result<LabeledState> {
        match outcome {
            None => self.theta_full.partial_trace(keep),
            Some(label) => {
                let m = self.outcome_index(label)?;
                self.reduced_at(keep, m)
            }
        }
    }

    /// As [`reduced`](Self::reduced) with an outcome index.
    pub fn reduced_at(&self, keep: &[&str], m: usize) -> Result<LabeledState> {
        let cond = self.conditional(m).ok_or_else(|| Error::ZeroProbabilityOutcome {
            label: self.outcome_labels[m].clone(),
            p: self.probs[m],
        })?;
        cond.state.partial_trace(keep)
    }
}

/// Square unitary whose leading columns are `v`.
pub fn unitary_completion(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = v.shape();
    if rows < cols {
        return Err(Error::NotIsometry(f64::INFINITY));
    }
    let defect = max_abs(&(v.adjoint() * v - identity(cols)));
    if defect > ISOMETRY_TOL {
        return Err(Error::NotIsometry(defect));
    }
    let complement = identity(rows) - v * v.adjoint();
    let eig = eig_hermitian(&complement)?;
    let mut u = ComplexMatrix::zeros(rows, rows);
    for j in 0..cols {
        u.set_column(j, &v.column(j));
    }
    for j in 0..rows - cols {
        u.set_column(cols + j, &eig.vectors.column(j));
    }
    Ok(u)
}
