//! Outcome-conditioned recovery: Petz transpose channels, entanglement
//! fidelity of the corrected map, and the Fano-type converse check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::MeasurementAnalysis;
use crate::objects::{outcome_probabilities, purify, Channel, Instrument, PurifiedInput, TP_TOL, ZERO_PROB};
use crate::tensor::{
    binary_entropy, c, eig_hermitian, func_on_support, ComplexMatrix, LabeledState, SUPPORT_CUTOFF,
};

/// Slack on `δ ≤ f(1 - F_e)`.
pub const FANO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryMember {
    pub label: String,
    /// Channel `Q' -> Q`.
    pub channel: Channel,
    /// Whether an off-support completion branch was appended.
    pub completed: bool,
}

/// One recovery channel per outcome label.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RecoveryFamily {
    members: Vec<RecoveryMember>,
}

impl RecoveryFamily {
    pub fn new(members: Vec<RecoveryMember>) -> Self {
        RecoveryFamily { members }
    }

    pub fn members(&self) -> &[RecoveryMember] {
        &self.members
    }

    pub fn get(&self, label: &str) -> Option<&RecoveryMember> {
        self.members.iter().find(|m| m.label == label)
    }

    pub fn any_completed(&self) -> bool {
        self.members.iter().any(|m| m.completed)
    }
}

/// Transpose channel of outcome `label` for input `ρ`:
/// `R_k = ρ^{1/2} E_k^dag ℰ_m(ρ)^{-1/2}`, plus a branch sending the kernel
/// of `ℰ_m(ρ)` to `ρ`.
pub fn petz_recovery(instr: &Instrument, rho: &LabeledState, label: &str) -> Result<RecoveryMember> {
    let probs = outcome_probabilities(instr, rho)?;
    let m = instr.outcome_index(label)?;
    if probs[m] <= ZERO_PROB {
        return Err(Error::ZeroProbabilityOutcome {
            label: label.to_string(),
            p: probs[m],
        });
    }
    let outcome = &instr.outcomes()[m];
    let sigma = outcome.apply(rho.matrix());
    let sigma_inv_sqrt = func_on_support(&sigma, |x| 1.0 / x.sqrt())?;
    let rho_sqrt = func_on_support(rho.matrix(), f64::sqrt)?;
    let mut kraus: Vec<ComplexMatrix> = outcome
        .kraus
        .iter()
        .map(|e| &rho_sqrt * e.adjoint() * &sigma_inv_sqrt)
        .collect();

    let sig = eig_hermitian(&sigma)?;
    let kernel: Vec<usize> = (0..sig.values.len()).filter(|&j| sig.values[j] <= SUPPORT_CUTOFF).collect();
    let completed = !kernel.is_empty();
    if completed {
        let target = eig_hermitian(rho.matrix())?;
        for (i, &lam) in target.values.iter().enumerate() {
            if lam <= SUPPORT_CUTOFF {
                continue;
            }
            let v = target.vectors.column(i);
            for &j in &kernel {
                let u = sig.vectors.column(j);
                kraus.push(v * u.adjoint() * c(lam.sqrt(), 0.0));
            }
        }
    }
    let channel = Channel::new_unchecked(instr.d_out(), instr.d_in(), kraus)?;
    let dev = channel.tp_deviation();
    if dev > TP_TOL {
        return Err(Error::InvalidChannel(format!(
            "recovery for outcome `{label}` not trace preserving ({dev:.3e})"
        )));
    }
    Ok(RecoveryMember {
        label: label.to_string(),
        channel,
        completed,
    })
}

/// Petz recovery for every outcome with `p(m) > 1e-12`.
pub fn petz_family(instr: &Instrument, rho: &LabeledState) -> Result<RecoveryFamily> {
    let probs = outcome_probabilities(instr, rho)?;
    let members = instr
        .outcomes()
        .iter()
        .zip(&probs)
        .filter(|(_, &p)| p > ZERO_PROB)
        .map(|(o, _)| petz_recovery(instr, rho, &o.label))
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryFamily::new(members))
}

/// `<ψ|(1 ⊗ 𝒞)(ψψ^dag)|ψ> = Σ_K |<ψ|(1 ⊗ K)|ψ>|²` for a given purification.
pub fn entanglement_fidelity_purified(input: &PurifiedInput, channel: &Channel) -> Result<f64> {
    let d = input.q_dim();
    if channel.d_in() != d || channel.d_out() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel {}->{} on a state of dimension {d}",
            channel.d_in(),
            channel.d_out()
        )));
    }
    let a = input.amplitude_matrix();
    Ok(channel
        .kraus()
        .iter()
        .map(|k| {
            // (1 ⊗ K)|ψ> has amplitude matrix A K^T.
            let image = &a * k.transpose();
            a.iter().zip(image.iter()).map(|(x, y)| x.conj() * y).sum::<num_complex::Complex64>().norm_sqr()
        })
        .sum())
}

/// Entanglement fidelity with the canonical purification of `ρ`.
pub fn entanglement_fidelity(rho: &LabeledState, channel: &Channel) -> Result<f64> {
    entanglement_fidelity_purified(&purify(rho), channel)
}

/// `Σ_m 𝓡_m ∘ ℰ_m` as a channel `Q -> Q`. Outcomes with `p(m) ≤ 1e-12` and
/// no family member are dropped.
pub fn corrected_channel(instr: &Instrument, rho: &LabeledState, family: &RecoveryFamily) -> Result<Channel> {
    let probs = outcome_probabilities(instr, rho)?;
    let mut kraus = Vec::new();
    for (o, &p) in instr.outcomes().iter().zip(&probs) {
        let member = match family.get(&o.label) {
            Some(member) => member,
            None if p <= ZERO_PROB => continue,
            None => return Err(Error::MissingOutcome(o.label.clone())),
        };
        let r = &member.channel;
        if r.d_in() != instr.d_out() || r.d_out() != instr.d_in() {
            return Err(Error::DimensionMismatch(format!(
                "recovery for `{}` is {}->{}, expected {}->{}",
                o.label,
                r.d_in(),
                r.d_out(),
                instr.d_out(),
                instr.d_in()
            )));
        }
        for rk in r.kraus() {
            for e in &o.kraus {
                kraus.push(rk * e);
            }
        }
    }
    Channel::new_unchecked(instr.d_in(), instr.d_in(), kraus)
}

pub fn corrected_fidelity(instr: &Instrument, rho: &LabeledState, family: &RecoveryFamily) -> Result<f64> {
    entanglement_fidelity(rho, &corrected_channel(instr, rho, family)?)
}

/// `f(x) = 2[h₂(x) + x log₂(d² - 1)]` with `x` clamped to `[0, 1]`.
pub fn fano_function(x: f64, d: usize) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let tail = if d > 1 { x * ((d * d - 1) as f64).log2() } else { 0.0 };
    2.0 * (binary_entropy(x) + tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FanoCheck {
    pub delta: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn fano_bound_check(instr: &Instrument, rho: &LabeledState, family: &RecoveryFamily) -> Result<FanoCheck> {
    let fidelity = corrected_fidelity(instr, rho, family)?;
    let delta = MeasurementAnalysis::new(instr, rho)?.disturbance()?.primary;
    let infidelity = (1.0 - fidelity).clamp(0.0, 1.0);
    let bound = fano_function(infidelity, instr.d_in());
    Ok(FanoCheck {
        delta,
        fidelity,
        infidelity,
        bound,
        holds: delta <= bound + FANO_TOL,
    })
}

/// Everything reported for one (instrument, state) pair by the recovery analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub delta: f64,
    pub fidelity: f64,
    /// `1 - 2√δ`
    pub optimal_threshold: f64,
    /// `1 - 4√δ`
    pub guaranteed_threshold: f64,
    pub meets_optimal: bool,
    pub meets_guaranteed: bool,
    pub completed: bool,
    pub fano: FanoCheck,
}

pub fn recovery_report(instr: &Instrument, rho: &LabeledState) -> Result<RecoveryReport> {
    let family = petz_family(instr, rho)?;
    let fano = fano_bound_check(instr, rho, &family)?;
    let eps = fano.delta.max(0.0);
    let optimal_threshold = 1.0 - 2.0 * eps.sqrt();
    let guaranteed_threshold = 1.0 - 4.0 * eps.sqrt();
    Ok(RecoveryReport {
        delta: fano.delta,
        fidelity: fano.fidelity,
        optimal_threshold,
        guaranteed_threshold,
        meets_optimal: fano.fidelity >= optimal_threshold - 1e-9,
        meets_guaranteed: fano.fidelity >= guaranteed_threshold - 1e-9,
        completed: family.any_completed(),
        fano,
    })
}
