//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! A [`LabeledState`] is a density operator on an ordered list of named
//! subsystems. The matrix index of a joint basis vector is row-major in the
//! label order, so the first label is the most significant digit. Partial
//! traces and marginals are always requested by label name.
//!
//! Entropies are measured in bits.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Eigenvalues at or below this are dropped from entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-12;
/// Eigenvalues at or below this are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
/// Hermiticity, positivity and trace tolerance for states.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVE_TOL` make a matrix non-PSD for matrix functions.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Standard subsystem names.
pub mod names {
    pub const R: &str = "R";
    pub const Q: &str = "Q";
    pub const QP: &str = "Qp";
    pub const APP: &str = "App";
    pub const X: &str = "X";
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Subsystem {
            name: name.into(),
            dim,
        }
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// `(M + M^dag) / 2`
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute entry of `M - M^dag`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Outer product `|u><v|` of two column vectors.
pub fn outer(u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    u * v.adjoint()
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let lam = c(self.values[j], 0.0);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= lam);
        }
        scaled * self.vectors.adjoint()
    }
}

fn ensure_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Eigendecomposition of `(M + M^dag)/2`.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    ensure_square(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of `(M + M^dag)/2`, descending.
pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_square(m)?;
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let mut vals: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// `-Σ λ log₂ λ` over the given eigenvalues, skipping those at or below the cutoff.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Von Neumann entropy of a (possibly subnormalized) Hermitian matrix, unclipped.
pub fn matrix_entropy(m: &ComplexMatrix) -> f64 {
    // Non-square input cannot reach here through LabeledState.
    entropy_of_spectrum(&eigenvalues_hermitian(m).expect("square matrix"))
}

/// Applies `f` to eigenvalues above the support cutoff; the rest map to zero.
pub fn func_on_support(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -NEGATIVE_TOL {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    let n = eig.values.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam > SUPPORT_CUTOFF {
            let v = eig.vectors.column(j);
            out += (v * v.adjoint()) * c(f(lam), 0.0);
        }
    }
    Ok(out)
}

/// Projector onto the eigenvectors with eigenvalue above the support cutoff.
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    func_on_support(m, |_| 1.0)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Row-major enumeration of the index offsets spanned by `positions`.
fn offsets(dims: &[usize], strides: &[usize], positions: &[usize]) -> Vec<usize> {
    let count: usize = positions.iter().map(|&p| dims[p]).product();
    let mut out = Vec::with_capacity(count);
    for mut idx in 0..count {
        let mut off = 0;
        for &p in positions.iter().rev() {
            off += (idx % dims[p]) * strides[p];
            idx /= dims[p];
        }
        out.push(off);
    }
    out
}

/// Partial trace of a matrix on a tensor space with factor dimensions `dims`,
/// keeping the factors at the (ascending) positions in `keep`.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let st = strides(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_off = offsets(dims, &st, keep);
    let traced_off = offsets(dims, &st, &traced);
    let dk = kept_off.len();
    ComplexMatrix::from_fn(dk, dk, |a, b| {
        let (ra, cb) = (kept_off[a], kept_off[b]);
        traced_off.iter().map(|&t| m[(ra + t, cb + t)]).sum()
    })
}

/// A density operator on an ordered list of named subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledState {
    labels: Vec<Subsystem>,
    matrix: ComplexMatrix,
    subnormalized: bool,
}

impl LabeledState {
    /// Validated unit-trace state.
    pub fn new(labels: Vec<Subsystem>, matrix: ComplexMatrix) -> Result<Self> {
        Self::checked(labels, matrix, false)
    }

    /// Validated state with trace at most one.
    pub fn new_subnormalized(labels: Vec<Subsystem>, matrix: ComplexMatrix) -> Result<Self> {
        Self::checked(labels, matrix, true)
    }

    /// Single-subsystem state.
    pub fn on(name: &str, matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(vec![Subsystem::new(name, d)], matrix)
    }

    /// The scalar state `[1]` on no subsystems.
    pub fn trivial() -> Self {
        LabeledState {
            labels: vec![],
            matrix: ComplexMatrix::from_element(1, 1, c(1.0, 0.0)),
            subnormalized: false,
        }
    }

    /// Pure state `|v><v|` from a column vector.
    pub fn pure(labels: Vec<Subsystem>, ket: &ComplexMatrix) -> Result<Self> {
        Self::new(labels, outer(ket, ket))
    }

    fn checked(labels: Vec<Subsystem>, matrix: ComplexMatrix, subnormalized: bool) -> Result<Self> {
        check_labels(&labels)?;
        ensure_square(&matrix)?;
        let dim: usize = labels.iter().map(|l| l.dim).product();
        if matrix.nrows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "labels span dimension {dim}, matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let herm = hermiticity_defect(&matrix);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let min = eigenvalues_hermitian(&matrix)?.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        let tr = trace(&matrix).re;
        let trace_ok = if subnormalized {
            tr <= 1.0 + STATE_TOL
        } else {
            (tr - 1.0).abs() <= STATE_TOL
        };
        if !trace_ok {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        Ok(LabeledState {
            labels,
            matrix: hermitize(&matrix),
            subnormalized,
        })
    }

    /// Skips validation; for results of operations that preserve the invariants.
    pub(crate) fn trusted(labels: Vec<Subsystem>, matrix: ComplexMatrix, subnormalized: bool) -> Self {
        debug_assert_eq!(matrix.nrows(), labels.iter().map(|l| l.dim).product::<usize>());
        LabeledState {
            labels,
            matrix: hermitize(&matrix),
            subnormalized,
        }
    }

    pub fn labels(&self) -> &[Subsystem] {
        &self.labels
    }

    pub fn label_names(&self) -> Vec<&str> {
        self.labels.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.dim).collect()
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    pub fn subsystem_dim(&self, name: &str) -> Result<usize> {
        self.position(name)
            .map(|p| self.labels[p].dim)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Same matrix under new labels with the same total dimension.
    pub fn relabel(&self, labels: Vec<Subsystem>) -> Result<Self> {
        check_labels(&labels)?;
        let dim: usize = labels.iter().map(|l| l.dim).product();
        if dim != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "relabel to dimension {dim}, state has {}",
                self.dim()
            )));
        }
        Ok(LabeledState {
            labels,
            matrix: self.matrix.clone(),
            subnormalized: self.subnormalized,
        })
    }

    pub fn tensor(&self, other: &LabeledState) -> Result<LabeledState> {
        for l in &other.labels {
            if self.position(&l.name).is_some() {
                return Err(Error::DuplicateLabel(l.name.clone()));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(LabeledState {
            labels,
            matrix: kron(&self.matrix, &other.matrix),
            subnormalized: self.subnormalized || other.subnormalized,
        })
    }

    /// Reduced state on `keep`, in the original relative label order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<LabeledState> {
        let mut positions = Vec::with_capacity(keep.len());
        for name in keep {
            let p = self
                .position(name)
                .ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
            if positions.contains(&p) {
                return Err(Error::DuplicateLabel(name.to_string()));
            }
            positions.push(p);
        }
        positions.sort_unstable();
        let labels = positions.iter().map(|&p| self.labels[p].clone()).collect();
        let matrix = partial_trace_matrix(&self.matrix, &self.dims(), &positions);
        Ok(LabeledState::trusted(labels, matrix, self.subnormalized))
    }

    /// Von Neumann entropy in bits, clipped at zero.
    pub fn entropy(&self) -> f64 {
        matrix_entropy(&self.matrix).max(0.0)
    }

    /// Entropy of the marginal on `group`.
    pub fn marginal_entropy(&self, group: &[&str]) -> Result<f64> {
        if group.is_empty() {
            return Ok(0.0);
        }
        Ok(self.partial_trace(group)?.entropy())
    }
}

fn check_labels(labels: &[Subsystem]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if l.dim == 0 {
            return Err(Error::DimensionMismatch(format!("subsystem `{}` has dimension 0", l.name)));
        }
        if labels[..i].iter().any(|o| o.name == l.name) {
            return Err(Error::DuplicateLabel(l.name.clone()));
        }
    }
    Ok(())
}

pub fn tensor_product(a: &LabeledState, b: &LabeledState) -> Result<LabeledState> {
    a.tensor(b)
}

pub fn partial_trace(s: &LabeledState, keep: &[&str]) -> Result<LabeledState> {
    s.partial_trace(keep)
}

pub fn von_neumann_entropy(s: &LabeledState) -> f64 {
    s.entropy()
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    entropy_of_spectrum(&[x, 1.0 - x])
}
