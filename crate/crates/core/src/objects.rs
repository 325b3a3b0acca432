//! Instruments, POVMs, channels and purified inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::{haar_isometry, rng_from_seed};
use crate::tensor::{
    c, eig_hermitian, eigenvalues_hermitian, identity, is_finite, max_abs, names, outer,
    partial_trace_matrix, trace, ComplexMatrix, LabeledState, Subsystem,
};

/// Tolerance for trace preservation and POVM completeness.
pub const TP_TOL: f64 = 1e-8;
/// Outcomes at or below this probability have no conditional state.
pub const ZERO_PROB: f64 = 1e-12;

/// A CP map given by its Kraus operators, labeled by its outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeMap {
    pub label: String,
    pub kraus: Vec<ComplexMatrix>,
}

impl OutcomeMap {
    pub fn new(label: impl Into<String>, kraus: Vec<ComplexMatrix>) -> Self {
        OutcomeMap {
            label: label.into(),
            kraus,
        }
    }

    /// `Σ_k E_k^dag E_k`
    pub fn effect(&self) -> ComplexMatrix {
        let d = self.kraus[0].ncols();
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e.adjoint() * e)
    }

    /// `Σ_k E_k ρ E_k^dag`
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.kraus[0].nrows();
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e * rho * e.adjoint())
    }

    pub fn multiplicity(&self) -> usize {
        self.kraus.len()
    }
}

/// A finite-outcome quantum instrument from `Q` (dimension `d_in`) to `Q'`
/// (dimension `d_out`).
///
/// Construction checks shapes; trace preservation is checked by
/// [`Instrument::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    d_in: usize,
    d_out: usize,
    outcomes: Vec<OutcomeMap>,
}

impl Instrument {
    pub fn new(d_in: usize, d_out: usize, outcomes: Vec<OutcomeMap>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidInstrument("dimensions must be positive".into()));
        }
        if outcomes.is_empty() {
            return Err(Error::InvalidInstrument("no outcomes".into()));
        }
        for (i, o) in outcomes.iter().enumerate() {
            if outcomes[..i].iter().any(|p| p.label == o.label) {
                return Err(Error::InvalidInstrument(format!("duplicate outcome label `{}`", o.label)));
            }
            if o.kraus.is_empty() {
                return Err(Error::InvalidInstrument(format!("outcome `{}` has no Kraus operators", o.label)));
            }
            for (k, e) in o.kraus.iter().enumerate() {
                if e.shape() != (d_out, d_in) {
                    return Err(Error::InvalidInstrument(format!(
                        "outcome `{}` Kraus {k} is {}x{}, expected {d_out}x{d_in}",
                        o.label,
                        e.nrows(),
                        e.ncols()
                    )));
                }
                if !is_finite(e) {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(Instrument {
            d_in,
            d_out,
            outcomes,
        })
    }

    /// Labels `"0"`, `"1"`, ...
    pub fn from_kraus_lists(d_in: usize, d_out: usize, lists: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let outcomes = lists
            .into_iter()
            .enumerate()
            .map(|(m, k)| OutcomeMap::new(m.to_string(), k))
            .collect();
        Self::new(d_in, d_out, outcomes)
    }

    /// Single-outcome instrument realizing a channel.
    pub fn from_channel(channel: &Channel) -> Self {
        Instrument {
            d_in: channel.d_in,
            d_out: channel.d_out,
            outcomes: vec![OutcomeMap::new("0", channel.kraus.clone())],
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn outcomes(&self) -> &[OutcomeMap] {
        &self.outcomes
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|o| o.label.as_str()).collect()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.outcomes.iter().map(OutcomeMap::multiplicity).max().unwrap_or(1)
    }

    pub fn is_single_kraus(&self) -> bool {
        self.outcomes.iter().all(|o| o.kraus.len() == 1)
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o.label == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed {
            Ok(())
        } else {
            Err(Error::InvalidInstrument(report.failures().join("; ")))
        }
    }

    /// The average channel `Σ_m ℰ_m`.
    pub fn average_channel(&self) -> Channel {
        Channel {
            d_in: self.d_in,
            d_out: self.d_out,
            kraus: self.outcomes.iter().flat_map(|o| o.kraus.iter().cloned()).collect(),
        }
    }

    /// Same outcome maps with a new Kraus list for each outcome.
    pub fn with_kraus(&self, d_out: usize, lists: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let outcomes = self
            .outcomes
            .iter()
            .zip(lists)
            .map(|(o, k)| OutcomeMap::new(o.label.clone(), k))
            .collect();
        Instrument::new(self.d_in, d_out, outcomes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeCheck {
    pub label: String,
    /// `max(0, λ_max(Σ_k E^dag E) - 1)`
    pub excess: f64,
    pub trace_nonincreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Max absolute entry of `Σ_{m,k} E^dag E - I`.
    pub tp_deviation: f64,
    pub trace_preserving: bool,
    pub outcomes: Vec<OutcomeCheck>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.trace_preserving {
            out.push(format!(
                "trace preservation violated: max |sum E^dag E - I| = {:.6e}",
                self.tp_deviation
            ));
        }
        for o in self.outcomes.iter().filter(|o| !o.trace_nonincreasing) {
            out.push(format!(
                "outcome `{}` is not trace non-increasing (excess {:.6e})",
                o.label, o.excess
            ));
        }
        out
    }
}

pub fn validate(instr: &Instrument) -> ValidationReport {
    let d = instr.d_in;
    let mut total = ComplexMatrix::zeros(d, d);
    let mut outcomes = Vec::new();
    for o in &instr.outcomes {
        let eff = o.effect();
        let top = eigenvalues_hermitian(&eff).expect("square")[0];
        let excess = (top - 1.0).max(0.0);
        outcomes.push(OutcomeCheck {
            label: o.label.clone(),
            excess,
            trace_nonincreasing: excess <= TP_TOL,
        });
        total += eff;
    }
    let tp_deviation = max_abs(&(total - identity(d)));
    let trace_preserving = tp_deviation <= TP_TOL;
    let passed = trace_preserving && outcomes.iter().all(|o| o.trace_nonincreasing);
    ValidationReport {
        tp_deviation,
        trace_preserving,
        outcomes,
        passed,
    }
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    d: usize,
    elements: Vec<(String, ComplexMatrix)>,
}

impl Povm {
    pub fn new(d: usize, elements: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        for (label, e) in &elements {
            if e.shape() != (d, d) {
                return Err(Error::InvalidPovm(format!("element `{label}` is not {d}x{d}")));
            }
            if !is_finite(e) {
                return Err(Error::NonFinite);
            }
            let min = eigenvalues_hermitian(e)?[d - 1];
            if min < -TP_TOL || crate::tensor::hermiticity_defect(e) > TP_TOL {
                return Err(Error::InvalidPovm(format!("element `{label}` is not positive semidefinite")));
            }
            sum += e;
        }
        let dev = max_abs(&(sum - identity(d)));
        if dev > TP_TOL {
            return Err(Error::InvalidPovm(format!(
                "completeness violated: max |sum P - I| = {dev:.6e}"
            )));
        }
        Ok(Povm { d, elements })
    }

    /// Elements labeled `"0"`, `"1"`, ...
    pub fn from_elements(d: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(d, elements.into_iter().enumerate().map(|(i, e)| (i.to_string(), e)).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[(String, ComplexMatrix)] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|(_, p)| trace(&(rho * p)).re).collect()
    }
}

pub fn povm_of(instr: &Instrument) -> Result<Povm> {
    instr.ensure_valid()?;
    Povm::new(
        instr.d_in,
        instr
            .outcomes
            .iter()
            .map(|o| (o.label.clone(), o.effect()))
            .collect(),
    )
}

/// A CPTP map given by Kraus operators `d_out x d_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::new_unchecked(d_in, d_out, kraus)?;
        let dev = ch.tp_deviation();
        if dev > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving: max |sum K^dag K - I| = {dev:.6e}"
            )));
        }
        Ok(ch)
    }

    /// Shape checks only.
    pub fn new_unchecked(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                k.nrows(),
                k.ncols()
            )));
        }
        Ok(Channel { d_in, d_out, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Channel {
            d_in: d,
            d_out: d,
            kraus: vec![identity(d)],
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let (r, cl) = u.shape();
        Channel::new(cl, r, vec![u])
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn tp_deviation(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| acc + k.adjoint() * k);
        max_abs(&(sum - identity(self.d_in)))
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_out, self.d_out), |acc, k| acc + k * rho * k.adjoint())
    }

    /// `later ∘ self`
    pub fn then(&self, later: &Channel) -> Result<Channel> {
        if later.d_in != self.d_out {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}->{} with {}->{}",
                self.d_in, self.d_out, later.d_in, later.d_out
            )));
        }
        let kraus = later
            .kraus
            .iter()
            .flat_map(|l| self.kraus.iter().map(move |k| l * k))
            .collect();
        Ok(Channel {
            d_in: self.d_in,
            d_out: later.d_out,
            kraus,
        })
    }
}

fn check_state_dim(instr: &Instrument, rho: &LabeledState) -> Result<()> {
    if rho.dim() != instr.d_in {
        return Err(Error::DimensionMismatch(format!(
            "instrument input dimension {}, state dimension {}",
            instr.d_in,
            rho.dim()
        )));
    }
    Ok(())
}

pub fn outcome_probability(instr: &Instrument, label: &str, rho: &LabeledState) -> Result<f64> {
    check_state_dim(instr, rho)?;
    let m = instr.outcome_index(label)?;
    Ok(trace(&instr.outcomes[m].apply(rho.matrix())).re)
}

pub fn outcome_probabilities(instr: &Instrument, rho: &LabeledState) -> Result<Vec<f64>> {
    check_state_dim(instr, rho)?;
    Ok(instr
        .outcomes
        .iter()
        .map(|o| trace(&o.apply(rho.matrix())).re)
        .collect())
}

/// `ℰ_m(ρ) / p(m)` on `Q'`.
pub fn posterior_state(instr: &Instrument, label: &str, rho: &LabeledState) -> Result<LabeledState> {
    check_state_dim(instr, rho)?;
    let m = instr.outcome_index(label)?;
    let out = instr.outcomes[m].apply(rho.matrix());
    let p = trace(&out).re;
    if p <= ZERO_PROB {
        return Err(Error::ZeroProbabilityOutcome {
            label: label.to_string(),
            p,
        });
    }
    Ok(LabeledState::trusted(
        vec![Subsystem::new(names::QP, instr.d_out)],
        out / c(p, 0.0),
        false,
    ))
}

/// `Θ = Σ_m ℰ_m(ρ) ⊗ |m><m|` on `[Q', X]`.
pub fn theta_state(instr: &Instrument, rho: &LabeledState) -> Result<LabeledState> {
    check_state_dim(instr, rho)?;
    let n = instr.n_outcomes();
    let d = instr.d_out;
    let mut theta = ComplexMatrix::zeros(d * n, d * n);
    for (m, o) in instr.outcomes.iter().enumerate() {
        let block = o.apply(rho.matrix());
        for i in 0..d {
            for j in 0..d {
                theta[(i * n + m, j * n + m)] = block[(i, j)];
            }
        }
    }
    Ok(LabeledState::trusted(
        vec![Subsystem::new(names::QP, d), Subsystem::new(names::X, n)],
        theta,
        false,
    ))
}

/// A purification `|ψ>` on `R ⊗ Q` of an input state.
#[derive(Clone, Debug, PartialEq)]
pub struct PurifiedInput {
    rho: LabeledState,
    psi: ComplexMatrix,
    r_dim: usize,
}

impl PurifiedInput {
    /// Wraps a given unit vector on `R ⊗ Q` (R first).
    pub fn from_vector(psi: ComplexMatrix, r_dim: usize, q_dim: usize) -> Result<Self> {
        if psi.shape() != (r_dim * q_dim, 1) {
            return Err(Error::DimensionMismatch(format!(
                "purification vector has shape {:?}, expected ({}, 1)",
                psi.shape(),
                r_dim * q_dim
            )));
        }
        let norm = psi.norm();
        if (norm * norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidState(format!("purification has norm² {}", norm * norm)));
        }
        let full = outer(&psi, &psi);
        let rho = partial_trace_matrix(&full, &[r_dim, q_dim], &[1]);
        Ok(PurifiedInput {
            rho: LabeledState::trusted(vec![Subsystem::new(names::Q, q_dim)], rho, false),
            psi,
            r_dim,
        })
    }

    pub fn rho(&self) -> &LabeledState {
        &self.rho
    }

    /// Column vector, index `r * d_Q + q`.
    pub fn psi(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn r_dim(&self) -> usize {
        self.r_dim
    }

    pub fn q_dim(&self) -> usize {
        self.rho.dim()
    }

    /// `|ψ><ψ|` on `[R, Q]`.
    pub fn joint_state(&self) -> LabeledState {
        LabeledState::trusted(
            vec![Subsystem::new(names::R, self.r_dim), Subsystem::new(names::Q, self.q_dim())],
            outer(&self.psi, &self.psi),
            false,
        )
    }

    /// Amplitudes as an `R x Q` matrix.
    pub fn amplitude_matrix(&self) -> ComplexMatrix {
        let dq = self.q_dim();
        ComplexMatrix::from_fn(self.r_dim, dq, |r, q| self.psi[(r * dq + q, 0)])
    }
}

const STATE_NORM_TOL: f64 = 1e-10;

/// `|ψ> = Σ_i √λ_i |i>_R |v_i>_Q` with `d_R = d_Q`.
pub fn purify(rho: &LabeledState) -> PurifiedInput {
    let d = rho.dim();
    let eig = eig_hermitian(rho.matrix()).expect("state matrices are square");
    let mut psi = ComplexMatrix::zeros(d * d, 1);
    for (i, &lam) in eig.values.iter().enumerate() {
        let amp = lam.max(0.0).sqrt();
        for q in 0..d {
            psi[(i * d + q, 0)] = eig.vectors[(q, i)] * amp;
        }
    }
    PurifiedInput {
        rho: LabeledState::trusted(vec![Subsystem::new(names::Q, d)], rho.matrix().clone(), false),
        psi,
        r_dim: d,
    }
}

/// Haar-random isometry `d_in -> d_out·n_outcomes·multiplicity`, sliced
/// into `d_out x d_in` blocks `E_{m,k}` (block index `m·multiplicity + k`).
pub fn random_instrument(
    seed: u64,
    d_in: usize,
    d_out: usize,
    n_outcomes: usize,
    multiplicity: usize,
) -> Result<Instrument> {
    if d_in == 0 || d_out == 0 || n_outcomes == 0 || multiplicity == 0 {
        return Err(Error::DimensionTooSmall("all dimensions must be positive".into()));
    }
    let rows = d_out * n_outcomes * multiplicity;
    if rows < d_in {
        return Err(Error::DimensionTooSmall(format!(
            "d_out·n_outcomes·multiplicity = {rows} < d_in = {d_in}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let v = haar_isometry(&mut rng, rows, d_in);
    let lists = (0..n_outcomes)
        .map(|m| {
            (0..multiplicity)
                .map(|k| {
                    let start = (m * multiplicity + k) * d_out;
                    v.rows(start, d_out).into_owned()
                })
                .collect()
        })
        .collect();
    Instrument::from_kraus_lists(d_in, d_out, lists)
}
