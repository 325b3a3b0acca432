//! Entropic functionals of a measurement: information gain, disturbance,
//! missing information (noise), the Groenewold–Ozawa gain, their
//! single-outcome versions, and the balance report tying them together.
//!
//! Every quantity with two algebraic routes is computed both ways and the
//! disagreement is returned alongside the value (see [`RouteCheck`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dilation::{dilate, DilationBundle};
use crate::error::{Error, Result};
use crate::objects::{posterior_state, povm_of, purify, Instrument, Povm, PurifiedInput, ZERO_PROB};
use crate::tensor::{
    c, kron, matrix_entropy, names, partial_trace_matrix, trace, identity, LabeledState,
};

/// Residual allowed on every identity between entropic quantities.
pub const IDENTITY_TOL: f64 = 1e-9;

fn check_groups(s: &LabeledState, groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        for &name in *g {
            if s.position(name).is_none() {
                return Err(Error::UnknownLabel(name.to_string()));
            }
            if seen.contains(&name) {
                return Err(Error::LabelOverlap(name.to_string()));
            }
            seen.push(name);
        }
    }
    Ok(())
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

fn raw_entropy(s: &LabeledState, group: &[&str]) -> Result<f64> {
    if group.is_empty() {
        return Ok(0.0);
    }
    Ok(matrix_entropy(s.partial_trace(group)?.matrix()))
}

/// `S(A) + S(B) - S(AB)` without clipping.
pub fn mutual_information_unclipped(s: &LabeledState, a: &[&str], b: &[&str]) -> Result<f64> {
    check_groups(s, &[a, b])?;
    Ok(raw_entropy(s, a)? + raw_entropy(s, b)? - raw_entropy(s, &union(a, b))?)
}

/// Quantum mutual information `I(A:B)` in bits, clipped at zero.
pub fn mutual_information(s: &LabeledState, a: &[&str], b: &[&str]) -> Result<f64> {
    Ok(mutual_information_unclipped(s, a, b)?.max(0.0))
}

/// `S(AC) + S(BC) - S(ABC) - S(C)` without clipping.
pub fn conditional_mutual_information_unclipped(
    s: &LabeledState,
    a: &[&str],
    b: &[&str],
    cond: &[&str],
) -> Result<f64> {
    check_groups(s, &[a, b, cond])?;
    let ac = union(a, cond);
    let bc = union(b, cond);
    let abc = union(&ac, b);
    Ok(raw_entropy(s, &ac)? + raw_entropy(s, &bc)? - raw_entropy(s, &abc)? - raw_entropy(s, cond)?)
}

/// Conditional mutual information `I(A:B|C)` in bits, clipped at zero.
pub fn conditional_mutual_information(s: &LabeledState, a: &[&str], b: &[&str], cond: &[&str]) -> Result<f64> {
    Ok(conditional_mutual_information_unclipped(s, a, b, cond)?.max(0.0))
}

/// Coherent information `I_c(A -> B) = S(B) - S(AB)`. May be negative.
pub fn coherent_information(s: &LabeledState, from: &[&str], to: &[&str]) -> Result<f64> {
    check_groups(s, &[from, to])?;
    Ok(raw_entropy(s, to)? - raw_entropy(s, &union(from, to))?)
}

fn chi_unclipped(ensemble: &[(f64, &crate::tensor::ComplexMatrix)]) -> f64 {
    let d = ensemble[0].1.nrows();
    let mut avg = crate::tensor::ComplexMatrix::zeros(d, d);
    let mut members = 0.0;
    for (p, rho) in ensemble {
        avg += *rho * c(*p, 0.0);
        members += p * matrix_entropy(rho);
    }
    matrix_entropy(&avg) - members
}

/// Holevo χ of an ensemble `{(p, ρ)}`, clipped at zero.
pub fn chi_quantity(ensemble: &[(f64, LabeledState)]) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::BadDistribution("empty ensemble".into()));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.iter().any(|(p, _)| *p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > IDENTITY_TOL {
        return Err(Error::BadDistribution(format!("weights must be nonnegative and sum to 1 (sum {total})")));
    }
    let d = ensemble[0].1.dim();
    if let Some((_, s)) = ensemble.iter().find(|(_, s)| s.dim() != d) {
        return Err(Error::DimensionMismatch(format!("ensemble members of dimension {d} and {}", s.dim())));
    }
    let refs: Vec<(f64, &crate::tensor::ComplexMatrix)> = ensemble.iter().map(|(p, s)| (*p, s.matrix())).collect();
    Ok(chi_unclipped(&refs).max(0.0))
}

/// A quantity evaluated by two independent routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RouteCheck {
    pub primary: f64,
    pub secondary: f64,
}

impl RouteCheck {
    pub fn residual(&self) -> f64 {
        (self.primary - self.secondary).abs()
    }

    /// Primary route, clipped at zero.
    pub fn clipped(&self) -> f64 {
        self.primary.max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingleOutcome {
    pub iota_m: f64,
    pub delta_m: f64,
    pub noise_m: f64,
}

/// An instrument paired with an input state, with the purification,
/// POVM and dilation computed once.
#[derive(Clone, Debug)]
pub struct MeasurementAnalysis {
    instrument: Instrument,
    input: PurifiedInput,
    povm: Povm,
    bundle: DilationBundle,
}

impl MeasurementAnalysis {
    pub fn new(instr: &Instrument, rho: &LabeledState) -> Result<Self> {
        if rho.dim() != instr.d_in() {
            return Err(Error::DimensionMismatch(format!(
                "instrument input dimension {}, state dimension {}",
                instr.d_in(),
                rho.dim()
            )));
        }
        let input = purify(rho);
        Self::with_input(instr, input)
    }

    /// Uses a caller-supplied purification.
    pub fn with_input(instr: &Instrument, input: PurifiedInput) -> Result<Self> {
        let povm = povm_of(instr)?;
        let bundle = dilate(instr, &input)?;
        Ok(MeasurementAnalysis {
            instrument: instr.clone(),
            input,
            povm,
            bundle,
        })
    }

    pub fn instrument(&self) -> &Instrument {
        &self.instrument
    }

    pub fn input(&self) -> &PurifiedInput {
        &self.input
    }

    pub fn bundle(&self) -> &DilationBundle {
        &self.bundle
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn probabilities(&self) -> &[f64] {
        self.bundle.probabilities()
    }

    fn theta(&self) -> &LabeledState {
        self.bundle.theta_full()
    }

    fn input_entropy(&self) -> f64 {
        matrix_entropy(self.input.rho().matrix())
    }

    fn live_outcomes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probabilities()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > ZERO_PROB)
    }

    /// `ρ^R_m = Tr_Q[(1 ⊗ P_m) Ψ] / p(m)` from the POVM alone, with `p(m)`.
    pub fn reference_ensemble(&self) -> Vec<(f64, crate::tensor::ComplexMatrix)> {
        let joint = self.input.joint_state();
        let (dr, dq) = (self.input.r_dim(), self.input.q_dim());
        self.povm
            .elements()
            .iter()
            .filter_map(|(_, p_m)| {
                let lifted = kron(&identity(dr), p_m) * joint.matrix();
                let unnorm = partial_trace_matrix(&lifted, &[dr, dq], &[0]);
                let p = trace(&unnorm).re;
                (p > ZERO_PROB).then(|| (p, crate::tensor::hermitize(&unnorm) / c(p, 0.0)))
            })
            .collect()
    }

    /// ι: `I(R:X)` of `Θ^{RX}` vs. χ of the POVM-induced ensemble on `R`.
    pub fn information_gain(&self) -> Result<RouteCheck> {
        let primary = mutual_information_unclipped(self.theta(), &[names::R], &[names::X])?;
        let ens = self.reference_ensemble();
        let refs: Vec<_> = ens.iter().map(|(p, m)| (*p, m)).collect();
        Ok(RouteCheck {
            primary,
            secondary: chi_unclipped(&refs),
        })
    }

    /// δ: `S(ρ) - I_c(R -> Q'X)` vs. `I(R : A''X)`.
    pub fn disturbance(&self) -> Result<RouteCheck> {
        let ic = coherent_information(self.theta(), &[names::R], &[names::QP, names::X])?;
        let secondary = mutual_information_unclipped(self.theta(), &[names::R], &[names::APP, names::X])?;
        Ok(RouteCheck {
            primary: self.input_entropy() - ic,
            secondary,
        })
    }

    /// `S(ρ) - I_c(R -> Q')` with the outcomes discarded.
    pub fn disturbance_no_outcomes(&self) -> Result<f64> {
        let ic = coherent_information(self.theta(), &[names::R], &[names::QP])?;
        Ok(self.input_entropy() - ic)
    }

    /// Δ: `I(R : A'' | X)` vs. `Σ_m p(m) I(R : A'')` of the conditional states.
    pub fn noise(&self) -> Result<RouteCheck> {
        let primary =
            conditional_mutual_information_unclipped(self.theta(), &[names::R], &[names::APP], &[names::X])?;
        let mut secondary = 0.0;
        for (m, p) in self.live_outcomes() {
            let ra = self.bundle.reduced_at(&[names::R, names::APP], m)?;
            secondary += p * mutual_information_unclipped(&ra, &[names::R], &[names::APP])?;
        }
        Ok(RouteCheck { primary, secondary })
    }

    /// ι_G: `S(ρ) - Σ_m p(m) S(ρ^{Q'}_m)`. May be negative.
    pub fn groenewold_gain(&self) -> Result<f64> {
        let rho = self.input.rho();
        let mut avg = 0.0;
        for (m, p) in self.live_outcomes() {
            let label = &self.instrument.outcomes()[m].label;
            avg += p * matrix_entropy(posterior_state(&self.instrument, label, rho)?.matrix());
        }
        Ok(self.input_entropy() - avg)
    }

    /// `(ι_m, δ_m, Δ_m)` for the outcome at index `m`.
    pub fn single_outcome_at(&self, m: usize) -> Result<SingleOutcome> {
        let cond = self.bundle.conditional(m).ok_or_else(|| Error::ZeroProbabilityOutcome {
            label: self.bundle.outcome_labels()[m].clone(),
            p: self.probabilities()[m],
        })?;
        let s = &cond.state;
        let s_r_total = raw_entropy(self.theta(), &[names::R])?;
        let iota_m = s_r_total - raw_entropy(s, &[names::R])?;
        let delta_m = self.input_entropy() - coherent_information(s, &[names::R], &[names::QP])?;
        let noise_m = mutual_information_unclipped(s, &[names::R], &[names::APP])?;
        Ok(SingleOutcome {
            iota_m,
            delta_m,
            noise_m,
        })
    }

    pub fn single_outcome(&self, label: &str) -> Result<SingleOutcome> {
        let m = self.bundle.outcome_index(label)?;
        self.single_outcome_at(m)
    }

    pub fn balance_report(&self) -> Result<BalanceReport> {
        let iota = self.information_gain()?;
        let delta = self.disturbance()?;
        let noise = self.noise()?;
        let iota_g = self.groenewold_gain()?;
        let no_outcomes = self.disturbance_no_outcomes()?;

        let mut per_outcome = Vec::new();
        let mut excluded_outcomes = Vec::new();
        let mut excluded_weight = 0.0;
        let (mut avg_iota, mut avg_delta, mut avg_noise) = (0.0, 0.0, 0.0);
        let mut single_balance: f64 = 0.0;
        for (m, &p) in self.probabilities().iter().enumerate() {
            let label = self.bundle.outcome_labels()[m].clone();
            if p <= ZERO_PROB {
                excluded_weight += p;
                excluded_outcomes.push(label);
                continue;
            }
            let q = self.single_outcome_at(m)?;
            avg_iota += p * q.iota_m;
            avg_delta += p * q.delta_m;
            avg_noise += p * q.noise_m;
            single_balance = single_balance.max((q.iota_m + q.noise_m - q.delta_m).abs());
            per_outcome.push(OutcomeBalance {
                label,
                p,
                iota_m: q.iota_m,
                delta_m: q.delta_m,
                noise_m: q.noise_m.max(0.0),
            });
        }

        let residual_balance = (iota.primary + noise.primary - delta.primary).abs();
        let mut residual_routes = BTreeMap::new();
        residual_routes.insert("iota_routes".to_string(), iota.residual());
        residual_routes.insert("delta_routes".to_string(), delta.residual());
        residual_routes.insert("noise_routes".to_string(), noise.residual());
        residual_routes.insert("iota_outcome_average".to_string(), (avg_iota - iota.primary).abs());
        residual_routes.insert("delta_outcome_average".to_string(), (avg_delta - delta.primary).abs());
        residual_routes.insert("noise_outcome_average".to_string(), (avg_noise - noise.primary).abs());
        residual_routes.insert("single_outcome_balance".to_string(), single_balance);

        if residual_balance > IDENTITY_TOL {
            return Err(Error::IdentityViolated {
                name: "iota + noise = delta".into(),
                residual: residual_balance,
            });
        }
        Ok(BalanceReport {
            iota: iota.clipped(),
            delta: delta.clipped(),
            noise: noise.clipped(),
            iota_g,
            per_outcome,
            residual_balance,
            residual_routes,
            disturbance_no_outcomes: no_outcomes,
            excluded_weight,
            excluded_outcomes,
            unclipped: Unclipped {
                iota: iota.primary,
                delta: delta.primary,
                noise: noise.primary,
            },
        })
    }
}

pub fn information_gain(instr: &Instrument, rho: &LabeledState) -> Result<RouteCheck> {
    MeasurementAnalysis::new(instr, rho)?.information_gain()
}

pub fn disturbance(instr: &Instrument, rho: &LabeledState) -> Result<RouteCheck> {
    MeasurementAnalysis::new(instr, rho)?.disturbance()
}

pub fn disturbance_no_outcomes(instr: &Instrument, rho: &LabeledState) -> Result<f64> {
    MeasurementAnalysis::new(instr, rho)?.disturbance_no_outcomes()
}

pub fn noise_delta(instr: &Instrument, rho: &LabeledState) -> Result<RouteCheck> {
    MeasurementAnalysis::new(instr, rho)?.noise()
}

pub fn groenewold_gain(instr: &Instrument, rho: &LabeledState) -> Result<f64> {
    MeasurementAnalysis::new(instr, rho)?.groenewold_gain()
}

pub fn single_outcome_quantities(instr: &Instrument, rho: &LabeledState, label: &str) -> Result<SingleOutcome> {
    MeasurementAnalysis::new(instr, rho)?.single_outcome(label)
}

pub fn balance_report(instr: &Instrument, rho: &LabeledState) -> Result<BalanceReport> {
    MeasurementAnalysis::new(instr, rho)?.balance_report()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeBalance {
    pub label: String,
    pub p: f64,
    pub iota_m: f64,
    pub delta_m: f64,
    pub noise_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Unclipped {
    pub iota: f64,
    pub delta: f64,
    pub noise: f64,
}

/// Information balance of one (instrument, state) pair. Entropic fields in bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub iota: f64,
    pub delta: f64,
    pub noise: f64,
    pub iota_g: f64,
    pub per_outcome: Vec<OutcomeBalance>,
    /// `|ι + Δ - δ|`
    pub residual_balance: f64,
    pub residual_routes: BTreeMap<String, f64>,
    pub disturbance_no_outcomes: f64,
    /// Total probability of outcomes left out of `per_outcome`.
    pub excluded_weight: f64,
    pub excluded_outcomes: Vec<String>,
    pub unclipped: Unclipped,
}

impl BalanceReport {
    /// Multiplies every entropic field by `factor` (e.g. `ln 2` for nats).
    pub fn scaled(&self, factor: f64) -> BalanceReport {
        let mut r = self.clone();
        for x in [
            &mut r.iota,
            &mut r.delta,
            &mut r.noise,
            &mut r.iota_g,
            &mut r.residual_balance,
            &mut r.disturbance_no_outcomes,
            &mut r.unclipped.iota,
            &mut r.unclipped.delta,
            &mut r.unclipped.noise,
        ] {
            *x *= factor;
        }
        r.residual_routes.values_mut().for_each(|v| *v *= factor);
        for o in &mut r.per_outcome {
            o.iota_m *= factor;
            o.delta_m *= factor;
            o.noise_m *= factor;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self, unit: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<34}{:>14}", "quantity", unit);
        for (name, v) in [
            ("iota", self.iota),
            ("delta", self.delta),
            ("noise", self.noise),
            ("iota_g", self.iota_g),
            ("delta_no_outcomes", self.disturbance_no_outcomes),
        ] {
            let _ = writeln!(out, "{name:<34}{v:>14.6}");
        }
        let _ = writeln!(out, "{:<34}{:>14.3e}", "residual_balance", self.residual_balance);
        for (k, v) in &self.residual_routes {
            let _ = writeln!(out, "{:<34}{:>14.3e}", format!("residual.{k}"), v);
        }
        if self.excluded_weight > 0.0 || !self.excluded_outcomes.is_empty() {
            let _ = writeln!(
                out,
                "{:<34}{:>14.3e}  ({})",
                "excluded_weight",
                self.excluded_weight,
                self.excluded_outcomes.join(", ")
            );
        }
        out.push('\n');
        let _ = writeln!(out, "{:<12}{:>12}{:>14}{:>14}{:>14}", "outcome", "p", "iota_m", "delta_m", "noise_m");
        for o in &self.per_outcome {
            let _ = writeln!(
                out,
                "{:<12}{:>12.6}{:>14.6}{:>14.6}{:>14.6}",
                o.label, o.p, o.iota_m, o.delta_m, o.noise_m
            );
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "parameter,iota,delta,noise,iota_g,residual_balance"
    }

    /// Row for grid point `parameter`; `None` leaves the first column empty.
    pub fn csv_row(&self, parameter: Option<f64>) -> String {
        let mut fields = vec![parameter.map(csv_number).unwrap_or_default()];
        fields.extend(
            [self.iota, self.delta, self.noise, self.iota_g, self.residual_balance]
                .into_iter()
                .map(csv_number),
        );
        fields.join(",")
    }
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e6)`.
pub fn csv_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::{random_instrument, Channel};
    use crate::tensor::{ComplexMatrix, Subsystem};
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    fn two(name_a: &str, name_b: &str, m: ComplexMatrix) -> LabeledState {
        LabeledState::new(vec![Subsystem::new(name_a, 2), Subsystem::new(name_b, 2)], m).unwrap()
    }

    fn bell() -> LabeledState {
        let h = 0.5f64.sqrt();
        let ket = ComplexMatrix::from_column_slice(4, 1, &[c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]);
        LabeledState::pure(vec![Subsystem::new("A", 2), Subsystem::new("B", 2)], &ket).unwrap()
    }

    #[test]
    fn mutual_information_fixtures() {
        let prod = two("A", "B", kron(&diag(&[0.3, 0.7]), &diag(&[0.5, 0.5])));
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap() < 1e-12);
        assert!((mutual_information(&bell(), &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-12);
        let cc = two("A", "B", diag(&[0.5, 0.0, 0.0, 0.5]));
        assert!((mutual_information(&cc, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            mutual_information(&cc, &["A"], &["A"]).unwrap_err(),
            Error::LabelOverlap("A".into())
        );
    }

    #[test]
    fn conditional_mutual_information_fixtures() {
        let cc = two("A", "B", diag(&[0.5, 0.0, 0.0, 0.5]));
        let with_c = cc.tensor(&LabeledState::on("C", diag(&[1.0])).unwrap()).unwrap();
        let cmi = conditional_mutual_information(&with_c, &["A"], &["B"], &["C"]).unwrap();
        assert!((cmi - 1.0).abs() < 1e-12);
        // A and B independent given C
        let blocks = kron(&kron(&diag(&[0.2, 0.8]), &diag(&[0.6, 0.4])), &diag(&[1.0, 0.0]))
            + kron(&kron(&diag(&[0.9, 0.1]), &diag(&[0.3, 0.7])), &diag(&[0.0, 1.0]));
        let s = LabeledState::new(
            vec![Subsystem::new("A", 2), Subsystem::new("B", 2), Subsystem::new("C", 2)],
            blocks * c(0.5, 0.0),
        )
        .unwrap();
        assert!(conditional_mutual_information(&s, &["A"], &["B"], &["C"]).unwrap() < 1e-12);
        assert!(conditional_mutual_information(&s, &["A"], &["B"], &[]).unwrap() > 0.0);
    }

    #[test]
    fn coherent_information_fixtures() {
        assert!((coherent_information(&bell(), &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        let prod = two("A", "B", kron(&diag(&[0.9, 0.1]), &diag(&[1.0, 0.0])));
        let ic = coherent_information(&prod, &["A"], &["B"]).unwrap();
        assert!((ic + 0.4689955935892812).abs() < 1e-12);
        let mixed = two("A", "B", identity(4) * c(0.25, 0.0));
        assert!((coherent_information(&mixed, &["A"], &["B"]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_fixtures() {
        let s = LabeledState::on("R", diag(&[0.3, 0.7])).unwrap();
        assert!(chi_quantity(&[(0.4, s.clone()), (0.6, s.clone())]).unwrap() < 1e-12);
        let e0 = LabeledState::on("R", diag(&[1.0, 0.0])).unwrap();
        let e1 = LabeledState::on("R", diag(&[0.0, 1.0])).unwrap();
        assert!((chi_quantity(&[(0.5, e0.clone()), (0.5, e1)]).unwrap() - 1.0).abs() < 1e-12);
        let half = LabeledState::on("R", diag(&[0.5, 0.5])).unwrap();
        let chi = chi_quantity(&[(0.2, half), (0.8, e0)]).unwrap();
        assert!((chi - 0.26900).abs() < 1e-4);
        assert!(matches!(chi_quantity(&[(0.5, s)]), Err(Error::BadDistribution(_))));
    }

    fn projective() -> Instrument {
        Instrument::from_kraus_lists(2, 2, vec![vec![diag(&[1.0, 0.0])], vec![diag(&[0.0, 1.0])]]).unwrap()
    }

    fn filter() -> Instrument {
        Instrument::from_kraus_lists(
            2,
            2,
            vec![vec![diag(&[1.0 / 3.0, 1.0])], vec![diag(&[8f64.sqrt() / 3.0, 0.0])]],
        )
        .unwrap()
    }

    fn depolarizing() -> Instrument {
        let (o, i) = (c(0., 0.), c(0.5, 0.));
        let x = ComplexMatrix::from_row_slice(2, 2, &[o, i, i, o]);
        let y = ComplexMatrix::from_row_slice(2, 2, &[o, c(0., -0.5), c(0., 0.5), o]);
        let z = diag(&[0.5, -0.5]);
        Instrument::from_channel(&Channel::new(2, 2, vec![identity(2) * i, x, y, z]).unwrap())
    }

    fn state(v: &[f64]) -> LabeledState {
        LabeledState::on("Q", diag(v)).unwrap()
    }

    #[test]
    fn projective_on_maximally_mixed() {
        let a = MeasurementAnalysis::new(&projective(), &state(&[0.5, 0.5])).unwrap();
        assert!((a.information_gain().unwrap().primary - 1.0).abs() < 1e-12);
        assert!((a.disturbance().unwrap().primary - 1.0).abs() < 1e-12);
        assert!(a.noise().unwrap().primary.abs() < 1e-12);
        assert!((a.groenewold_gain().unwrap() - 1.0).abs() < 1e-12);
        // Θ^{RQ'} is classically correlated, so I_c(R -> Q') = 0.
        assert!((a.disturbance_no_outcomes().unwrap() - 1.0).abs() < 1e-12);
        for m in ["0", "1"] {
            let q = a.single_outcome(m).unwrap();
            assert!((q.iota_m - 1.0).abs() < 1e-12);
            assert!((q.delta_m - 1.0).abs() < 1e-12);
            assert!(q.noise_m.abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_on_maximally_mixed() {
        let r = balance_report(&depolarizing(), &state(&[0.5, 0.5])).unwrap();
        assert!(r.iota.abs() < 1e-12);
        assert!((r.delta - 2.0).abs() < 1e-12);
        assert!((r.noise - 2.0).abs() < 1e-12);
        // The output is again I/2, so S(ρ) - S(ℰ(ρ)) = 0.
        assert!(r.iota_g.abs() < 1e-12);
        assert!((r.disturbance_no_outcomes - r.delta).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_on_pure_input_has_negative_groenewold_gain() {
        let g = groenewold_gain(&depolarizing(), &state(&[1.0, 0.0])).unwrap();
        assert!((g + 1.0).abs() < 1e-12);
    }

    #[test]
    fn filter_fixture() {
        let a = MeasurementAnalysis::new(&filter(), &state(&[0.9, 0.1])).unwrap();
        let iota = a.information_gain().unwrap();
        assert!((iota.primary - 0.26900).abs() < 1e-4);
        assert!(iota.residual() < 1e-12);
        assert!((a.disturbance().unwrap().primary - iota.primary).abs() < 1e-12);
        let q = a.single_outcome("0").unwrap();
        assert!((q.iota_m + 0.53100).abs() < 1e-4);
        assert!((q.delta_m + 0.53100).abs() < 1e-4);
        assert!(q.noise_m.abs() < 1e-12);
    }

    #[test]
    fn measure_and_reprepare_groenewold_gain() {
        // E_{m,k} = |k><m| / √2 : outcome m prepares I/2.
        let h = 0.5f64.sqrt();
        let ket_bra = |k: usize, m: usize| {
            let mut e = ComplexMatrix::zeros(2, 2);
            e[(k, m)] = c(h, 0.0);
            e
        };
        let instr = Instrument::from_kraus_lists(
            2,
            2,
            vec![vec![ket_bra(0, 0), ket_bra(1, 0)], vec![ket_bra(0, 1), ket_bra(1, 1)]],
        )
        .unwrap();
        let plus = ComplexMatrix::from_element(2, 2, c(0.5, 0.0));
        let g = groenewold_gain(&instr, &LabeledState::on("Q", plus).unwrap()).unwrap();
        assert!((g + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_input_has_no_information_gain() {
        let instr = random_instrument(8, 3, 2, 3, 2).unwrap();
        let mut pure = ComplexMatrix::zeros(3, 3);
        pure[(1, 1)] = c(1.0, 0.0);
        let r = balance_report(&instr, &LabeledState::on("Q", pure).unwrap()).unwrap();
        assert!(r.iota < 1e-12 && r.delta < 1e-10 && r.noise < 1e-10);
    }

    #[test]
    fn unitary_instrument_is_undisturbing() {
        let u = crate::random::haar_unitary(&mut crate::random::rng_from_seed(2), 3);
        let instr = Instrument::from_channel(&Channel::unitary(u).unwrap());
        let rho = LabeledState::on("Q", diag(&[0.5, 0.3, 0.2])).unwrap();
        let a = MeasurementAnalysis::new(&instr, &rho).unwrap();
        assert!(a.disturbance().unwrap().primary.abs() < 1e-12);
        let q = a.single_outcome("0").unwrap();
        assert!(q.iota_m.abs() < 1e-12 && q.delta_m.abs() < 1e-12 && q.noise_m.abs() < 1e-12);
    }

    #[test]
    fn report_aggregates_and_scales() {
        let instr = random_instrument(21, 2, 2, 3, 2).unwrap();
        let rho = state(&[0.6, 0.4]);
        let r = balance_report(&instr, &rho).unwrap();
        assert!(r.residual_balance <= IDENTITY_TOL);
        assert!(r.residual_routes.values().all(|&v| v <= IDENTITY_TOL), "{:?}", r.residual_routes);
        let nats = r.scaled(std::f64::consts::LN_2);
        assert!((nats.delta - r.delta * std::f64::consts::LN_2).abs() < 1e-15);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["iota", "delta", "noise", "iota_g", "residual_balance", "per_outcome"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(r.to_table("bits").contains("iota_m"));
    }

    #[test]
    fn zero_probability_outcomes_are_excluded() {
        let r = balance_report(&projective(), &state(&[1.0, 0.0])).unwrap();
        assert_eq!(r.per_outcome.len(), 1);
        assert_eq!(r.excluded_outcomes, vec!["1".to_string()]);
        assert!(matches!(
            single_outcome_quantities(&projective(), &state(&[1.0, 0.0]), "1"),
            Err(Error::ZeroProbabilityOutcome { .. })
        ));
    }
}
