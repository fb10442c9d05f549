//! Quantum-state data types: density matrices, pure states, probability
//! vectors, pure-state ensembles, bipartite states and Kraus channels.
//!
//! Bipartite states use the flat index `i * dim_b + j` for `|i⟩_A ⊗ |j⟩_B`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, ZERO};

/// Hermiticity, trace and positivity tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-9;
/// Eigenvalues at or below this are excluded from the rank.
pub const RANK_TOL: f64 = 1e-10;
/// Pure-state normalization tolerance.
pub const NORM_TOL: f64 = 1e-12;
/// Maximum entrywise error allowed when an ensemble rebuilds its target.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Ensemble members lighter than this are dropped.
pub const MIN_WEIGHT: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M†| = {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix does not have unit trace (|tr - 1| = {residual:.3e})")]
    NotUnitTrace { residual: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPSD { min_eigenvalue: f64 },
    #[error("state vector is not normalized (|‖ψ‖ - 1| = {residual:.3e})")]
    NotNormalized { residual: f64 },
    #[error("probability vector is invalid: {0}")]
    InvalidProbability(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not an isometry (max |V†V - I| = {residual:.3e})")]
    NotIsometry { residual: f64 },
    #[error("isometry shape {rows}x{cols} incompatible with state rank {rank}")]
    RankMismatch {
        rows: usize,
        cols: usize,
        rank: usize,
    },
    #[error("ensemble weights sum to {sum} instead of 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("ensemble does not reconstruct its target (max deviation {residual:.3e})")]
    ReconstructionFailed { residual: f64 },
    #[error("Kraus operators are not complete (max |ΣK†K - I| = {residual:.3e})")]
    NotComplete { residual: f64 },
    #[error("state is not pure (rank {rank})")]
    NotPure { rank: usize },
}

impl StateError {
    /// Short name of the violated invariant, used by the CLI.
    pub fn invariant(&self) -> &'static str {
        match self {
            StateError::NotSquare { .. } => "NotSquare",
            StateError::NotHermitian { .. } => "NotHermitian",
            StateError::NotUnitTrace { .. } => "NotUnitTrace",
            StateError::NotPSD { .. } => "NotPSD",
            StateError::NotNormalized { .. } => "NotNormalized",
            StateError::InvalidProbability(_) => "InvalidProbability",
            StateError::DimensionMismatch { .. } => "DimensionMismatch",
            StateError::NotIsometry { .. } => "NotIsometry",
            StateError::RankMismatch { .. } => "RankMismatch",
            StateError::WeightsNotNormalized { .. } => "WeightsNotNormalized",
            StateError::ReconstructionFailed { .. } => "ReconstructionFailed",
            StateError::NotComplete { .. } => "NotComplete",
            StateError::NotPure { .. } => "NotPure",
        }
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

/// Validate a square matrix as a density matrix. The stored matrix is the
/// Hermitian part of the input.
pub fn validate_density(mat: ComplexMatrix) -> Result<DensityMatrix, StateError> {
    let (rows, cols) = mat.shape();
    if rows != cols || rows == 0 {
        return Err(StateError::NotSquare { rows, cols });
    }
    let residual = linalg::hermitian_residual(&mat);
    if residual > DENSITY_TOL {
        return Err(StateError::NotHermitian { residual });
    }
    let tr = linalg::trace(&mat);
    let residual = (tr - C64::new(1.0, 0.0)).norm();
    if residual > DENSITY_TOL {
        return Err(StateError::NotUnitTrace { residual });
    }
    let herm = (&mat + mat.adjoint()).scale(0.5);
    let (values, _) = linalg::hermitian_eigen(&herm);
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -DENSITY_TOL {
        return Err(StateError::NotPSD { min_eigenvalue });
    }
    Ok(DensityMatrix { mat: herm })
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let mat = ComplexMatrix::identity(n, n).scale(1.0 / n as f64);
        DensityMatrix { mat }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            mat: linalg::outer(psi.amplitudes()),
        }
    }

    /// `diag(p)` for a probability vector.
    pub fn diagonal_state(p: &ProbabilityVector) -> Self {
        let n = p.dim();
        let mat = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(p.as_slice()[i], 0.0)
            } else {
                ZERO
            }
        });
        DensityMatrix { mat }
    }

    /// Convex mixture `Σ w_k ρ_k`, validated.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self, StateError> {
        let n = parts
            .first()
            .map(|(_, r)| r.dim())
            .ok_or(StateError::DimensionMismatch {
                expected: 1,
                got: 0,
            })?;
        let mut mat = ComplexMatrix::zeros(n, n);
        for (w, r) in parts {
            if r.dim() != n {
                return Err(StateError::DimensionMismatch {
                    expected: n,
                    got: r.dim(),
                });
            }
            mat += r.matrix().scale(*w);
        }
        validate_density(mat)
    }

    /// Eigenpairs sorted by descending eigenvalue; eigenvalues within
    /// tolerance of zero are clamped to exactly zero.
    pub fn eigen(&self) -> (Vec<f64>, ComplexMatrix) {
        let (mut values, vectors) = linalg::hermitian_eigen(&self.mat);
        for v in values.iter_mut() {
            if *v < RANK_TOL {
                *v = 0.0;
            }
        }
        (values, vectors)
    }

    pub fn rank(&self) -> usize {
        self.eigen().0.iter().filter(|&&v| v > RANK_TOL).count()
    }

    /// Diagonal in the reference basis, as a probability vector.
    pub fn diagonal(&self) -> ProbabilityVector {
        let p: Vec<f64> = self.mat.diagonal().iter().map(|z| z.re.max(0.0)).collect();
        let sum: f64 = p.iter().sum();
        ProbabilityVector {
            p: p.into_iter().map(|x| x / sum).collect(),
        }
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// If the state is pure, its vector (phase fixed as in [`fix_phase`]).
    pub fn as_pure(&self) -> Result<PureState, StateError> {
        let (values, vectors) = self.eigen();
        let rank = values.iter().filter(|&&v| v > RANK_TOL).count();
        if rank != 1 {
            return Err(StateError::NotPure { rank });
        }
        let mut amp: Vec<C64> = vectors.column(0).iter().copied().collect();
        fix_phase(&mut amp);
        PureState::normalized(amp)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.mat.iter().all(|z| z.im.abs() <= tol)
    }
}

/// Rotate the global phase so that the largest-magnitude amplitude is real
/// and positive (first one wins on ties). Returns the unit phase applied.
pub fn fix_phase(amp: &mut [C64]) -> C64 {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in amp.iter().enumerate() {
        let n = z.norm();
        if n > best_norm + 1e-12 {
            best = i;
            best_norm = n;
        }
    }
    if best_norm <= 0.0 {
        return C64::new(1.0, 0.0);
    }
    let phase = amp[best].conj() / best_norm;
    for z in amp.iter_mut() {
        *z *= phase;
    }
    amp[best] = C64::new(amp[best].norm(), 0.0);
    phase
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amp: Vec<C64>,
}

impl PureState {
    /// Accepts only vectors already normalized to within 1e-12.
    pub fn new(amp: Vec<C64>) -> Result<Self, StateError> {
        let residual = (linalg::norm_sqr(&amp).sqrt() - 1.0).abs();
        if amp.is_empty() || residual > NORM_TOL {
            return Err(StateError::NotNormalized { residual });
        }
        Ok(PureState { amp })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(mut amp: Vec<C64>) -> Result<Self, StateError> {
        let norm = linalg::norm_sqr(&amp).sqrt();
        if amp.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(StateError::NotNormalized { residual: 1.0 });
        }
        for z in amp.iter_mut() {
            *z /= norm;
        }
        Ok(PureState { amp })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amp = vec![ZERO; dim];
        amp[index] = C64::new(1.0, 0.0);
        PureState { amp }
    }

    pub fn from_real(values: &[f64]) -> Result<Self, StateError> {
        Self::normalized(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amp
    }

    pub fn projector(&self) -> ComplexMatrix {
        linalg::outer(&self.amp)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &PureState) -> f64 {
        linalg::inner(&self.amp, &other.amp).norm_sqr()
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<PureState, StateError> {
        if u.ncols() != self.dim() {
            return Err(StateError::DimensionMismatch {
                expected: self.dim(),
                got: u.ncols(),
            });
        }
        let v = u * nalgebra::DVector::from_column_slice(&self.amp);
        PureState::normalized(v.iter().copied().collect())
    }
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    /// Entries in `[-1e-12, 0)` are clamped to zero; the sum must be 1 within 1e-9.
    pub fn new(mut p: Vec<f64>) -> Result<Self, StateError> {
        if p.is_empty() {
            return Err(StateError::InvalidProbability("empty vector".into()));
        }
        for x in p.iter_mut() {
            if !x.is_finite() || *x < -1e-12 {
                return Err(StateError::InvalidProbability(format!(
                    "entry {x} is negative or non-finite"
                )));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > DENSITY_TOL {
            return Err(StateError::InvalidProbability(format!(
                "entries sum to {sum}"
            )));
        }
        Ok(ProbabilityVector { p })
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector {
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        ProbabilityVector { p }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Zero-pad to length `n` (no-op if already that long).
    pub fn padded(&self, n: usize) -> Self {
        let mut p = self.p.clone();
        if p.len() < n {
            p.resize(n, 0.0);
        }
        ProbabilityVector { p }
    }

    /// Largest deviation from the uniform vector.
    pub fn uniformity_residual(&self) -> f64 {
        let u = 1.0 / self.p.len() as f64;
        self.p.iter().map(|x| (x - u).abs()).fold(0.0, f64::max)
    }
}

/// `μ(ψ) = (|ψ_0|², …, |ψ_{n-1}|²)`.
pub fn coherence_vector(psi: &PureState) -> ProbabilityVector {
    let p: Vec<f64> = psi.amp.iter().map(|z| z.norm_sqr()).collect();
    let sum: f64 = p.iter().sum();
    ProbabilityVector {
        p: p.into_iter().map(|x| x / sum).collect(),
    }
}

/// A member of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub weight: f64,
    pub state: PureState,
}

/// Weighted pure states whose mixture reconstructs `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    target: DensityMatrix,
    members: Vec<Member>,
}

impl Ensemble {
    pub fn new(target: DensityMatrix, members: Vec<Member>) -> Result<Self, StateError> {
        let n = target.dim();
        for m in &members {
            if m.state.dim() != n {
                return Err(StateError::DimensionMismatch {
                    expected: n,
                    got: m.state.dim(),
                });
            }
            if m.weight.is_nan() || m.weight < 0.0 {
                return Err(StateError::InvalidProbability(format!(
                    "negative weight {}",
                    m.weight
                )));
            }
        }
        let sum: f64 = members.iter().map(|m| m.weight).sum();
        if (sum - 1.0).abs() > DENSITY_TOL {
            return Err(StateError::WeightsNotNormalized { sum });
        }
        let ens = Ensemble { target, members };
        let residual = ens.reconstruction_residual();
        if residual > RECONSTRUCTION_TOL {
            return Err(StateError::ReconstructionFailed { residual });
        }
        Ok(ens)
    }

    /// Build from states alone, with the target taken to be their mixture.
    pub fn from_members(members: Vec<Member>) -> Result<Self, StateError> {
        let n = members
            .first()
            .map(|m| m.state.dim())
            .ok_or(StateError::WeightsNotNormalized { sum: 0.0 })?;
        let mut mat = ComplexMatrix::zeros(n, n);
        for m in &members {
            mat += m.state.projector().scale(m.weight);
        }
        let target = validate_density(mat)?;
        Ensemble::new(target, members)
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mixture(&self) -> ComplexMatrix {
        let n = self.target.dim();
        let mut mat = ComplexMatrix::zeros(n, n);
        for m in &self.members {
            mat += m.state.projector().scale(m.weight);
        }
        mat
    }

    pub fn reconstruction_residual(&self) -> f64 {
        linalg::max_abs_diff(&self.mixture(), self.target.matrix())
    }

    /// `Σ_k p_k g(ψ_k)`.
    pub fn average<F: Fn(&PureState) -> f64>(&self, g: F) -> f64 {
        self.members.iter().map(|m| m.weight * g(&m.state)).sum()
    }
}

/// Pure-state decomposition of `rho` induced by the `m x r` isometry `v`:
/// `w_k = Σ_j v_kj √λ_j |e_j⟩` over the nonzero eigenpairs of `rho`.
pub fn ensemble_from_isometry(
    rho: &DensityMatrix,
    v: &ComplexMatrix,
) -> Result<Ensemble, StateError> {
    let (values, vectors) = rho.eigen();
    let rank = values.iter().filter(|&&x| x > RANK_TOL).count();
    let (rows, cols) = v.shape();
    if cols != rank || rows < cols {
        return Err(StateError::RankMismatch { rows, cols, rank });
    }
    let gram = v.adjoint() * v;
    let residual = linalg::max_abs_diff(&gram, &ComplexMatrix::identity(cols, cols));
    if residual > DENSITY_TOL {
        return Err(StateError::NotIsometry { residual });
    }
    let n = rho.dim();
    let sqrt_vals: Vec<f64> = values[..rank].iter().map(|x| x.sqrt()).collect();
    let members = (0..rows)
        .filter_map(|k| {
            let w: Vec<C64> = (0..n)
                .map(|i| {
                    (0..rank)
                        .map(|j| v[(k, j)] * sqrt_vals[j] * vectors[(i, j)])
                        .sum()
                })
                .collect();
            member_from_unnormalized(w)
        })
        .collect();
    Ensemble::new(rho.clone(), members)
}

/// `(|w|², w/|w|)`, or `None` for members below [`MIN_WEIGHT`].
pub fn member_from_unnormalized(w: Vec<C64>) -> Option<Member> {
    let weight = linalg::norm_sqr(&w);
    if weight < MIN_WEIGHT {
        return None;
    }
    let state = PureState::normalized(w).ok()?;
    Some(Member { weight, state })
}

/// Either a pure or a mixed state of an `A ⊗ B` system.
#[derive(Debug, Clone, PartialEq)]
pub enum BipartiteValue {
    Pure(PureState),
    Mixed(DensityMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    value: BipartiteValue,
}

impl BipartiteState {
    pub fn pure(dim_a: usize, dim_b: usize, psi: PureState) -> Result<Self, StateError> {
        Self::check(dim_a, dim_b, psi.dim())?;
        Ok(BipartiteState {
            dim_a,
            dim_b,
            value: BipartiteValue::Pure(psi),
        })
    }

    pub fn mixed(dim_a: usize, dim_b: usize, rho: DensityMatrix) -> Result<Self, StateError> {
        Self::check(dim_a, dim_b, rho.dim())?;
        Ok(BipartiteState {
            dim_a,
            dim_b,
            value: BipartiteValue::Mixed(rho),
        })
    }

    fn check(dim_a: usize, dim_b: usize, flat: usize) -> Result<(), StateError> {
        if dim_a * dim_b != flat || dim_a == 0 || dim_b == 0 {
            return Err(StateError::DimensionMismatch {
                expected: dim_a * dim_b,
                got: flat,
            });
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn value(&self) -> &BipartiteValue {
        &self.value
    }

    pub fn density(&self) -> DensityMatrix {
        match &self.value {
            BipartiteValue::Pure(psi) => DensityMatrix::from_pure(psi),
            BipartiteValue::Mixed(rho) => rho.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match &self.value {
            BipartiteValue::Pure(psi) => Some(psi),
            BipartiteValue::Mixed(_) => None,
        }
    }

    /// `ρ_A = tr_B ρ`.
    pub fn reduced_a(&self) -> DensityMatrix {
        partial_trace_b(&self.density(), self.dim_a, self.dim_b)
    }
}

pub fn partial_trace_b(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> DensityMatrix {
    let m = rho.matrix();
    let mat = ComplexMatrix::from_fn(dim_a, dim_a, |i, k| {
        (0..dim_b).map(|j| m[(i * dim_b + j, k * dim_b + j)]).sum()
    });
    DensityMatrix { mat }
}

/// Schmidt decomposition of a bipartite pure state.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Squared Schmidt coefficients, descending.
    pub lambda: ProbabilityVector,
    pub basis_a: Vec<PureState>,
    pub basis_b: Vec<PureState>,
}

impl Schmidt {
    pub fn reassemble(&self) -> Vec<C64> {
        let da = self.basis_a[0].dim();
        let db = self.basis_b[0].dim();
        let mut out = vec![ZERO; da * db];
        for ((l, a), b) in self
            .lambda
            .as_slice()
            .iter()
            .zip(&self.basis_a)
            .zip(&self.basis_b)
        {
            let s = l.sqrt();
            for i in 0..da {
                for j in 0..db {
                    out[i * db + j] += a.amplitudes()[i] * b.amplitudes()[j] * s;
                }
            }
        }
        out
    }
}

/// Schmidt decomposition via the SVD of the `dim_a x dim_b` coefficient matrix.
///
/// Each A-side vector has its largest amplitude real positive; the
/// compensating phase goes into the paired B-side vector.
pub fn schmidt(state: &BipartiteState) -> Result<Schmidt, StateError> {
    let psi = state.as_pure().ok_or_else(|| StateError::NotPure {
        rank: state.density().rank(),
    })?;
    let (da, db) = state.dims();
    let coeff = DMatrix::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let svd = coeff.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = da.min(db);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sq: Vec<f64> = order
        .iter()
        .map(|&i| svd.singular_values[i].powi(2))
        .collect();
    let total: f64 = sq.iter().sum();
    let lambda = ProbabilityVector::new(sq.iter().map(|x| x / total).collect())?;
    let mut basis_a = Vec::with_capacity(k);
    let mut basis_b = Vec::with_capacity(k);
    for &i in &order {
        let mut a: Vec<C64> = u.column(i).iter().copied().collect();
        // coeff = U Σ V†, so the B-side vector has components (V†)_{i,j}
        let mut b: Vec<C64> = v_t.row(i).iter().copied().collect();
        let rot = fix_phase(&mut a);
        for z in b.iter_mut() {
            *z *= rot.conj();
        }
        basis_a.push(PureState::normalized(a)?);
        basis_b.push(PureState::normalized(b)?);
    }
    Ok(Schmidt {
        lambda,
        basis_a,
        basis_b,
    })
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self, StateError> {
        let dim = kraus
            .first()
            .map(|k| k.nrows())
            .ok_or(StateError::NotComplete { residual: 1.0 })?;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &kraus {
            if k.shape() != (dim, dim) {
                return Err(StateError::DimensionMismatch {
                    expected: dim,
                    got: k.nrows(),
                });
            }
            sum += k.adjoint() * k;
        }
        let residual = linalg::max_abs_diff(&sum, &ComplexMatrix::identity(dim, dim));
        if residual > DENSITY_TOL {
            return Err(StateError::NotComplete { residual });
        }
        Ok(KrausChannel { dim, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.kraus
    }
}

/// `Λ(ρ) = Σ_l K_l ρ K_l†`.
pub fn apply_channel(
    rho: &DensityMatrix,
    channel: &KrausChannel,
) -> Result<DensityMatrix, StateError> {
    if rho.dim() != channel.dim() {
        return Err(StateError::DimensionMismatch {
            expected: channel.dim(),
            got: rho.dim(),
        });
    }
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in &channel.kraus {
        out += k * rho.matrix() * k.adjoint();
    }
    validate_density(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn real_matrix(n: usize, v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(n, n, &v.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        let rho = validate_density(real_matrix(2, &[0.5, 0.0, 0.0, 0.5])).unwrap();
        assert_eq!(rho.rank(), 2);
    }

    #[test]
    fn rejects_negative_eigenvalue() {
        let err = validate_density(real_matrix(2, &[0.5, 0.6, 0.6, 0.5])).unwrap_err();
        match err {
            StateError::NotPSD { min_eigenvalue } => assert!((min_eigenvalue + 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_trace() {
        let err = validate_density(real_matrix(2, &[1.0, 0.0, 0.0, 0.1])).unwrap_err();
        assert!(
            matches!(err, StateError::NotUnitTrace { residual } if (residual - 0.1).abs() < 1e-12)
        );
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let mut m = real_matrix(2, &[0.5, 0.1, 0.0, 0.5]);
        assert!(matches!(
            validate_density(m.clone()),
            Err(StateError::NotHermitian { .. })
        ));
        m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            validate_density(m),
            Err(StateError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn coherence_vector_examples() {
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        let mu = coherence_vector(&plus);
        assert!((mu.as_slice()[0] - 0.5).abs() < 1e-15);
        assert_eq!(
            coherence_vector(&PureState::basis(2, 0)).as_slice(),
            &[1.0, 0.0]
        );

        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let s = 1.0 / 3f64.sqrt();
        let f2 = PureState::new(vec![c(s), w * s, w * w * s]).unwrap();
        for x in coherence_vector(&f2).as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn schmidt_examples() {
        let phi = PureState::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let s = schmidt(&BipartiteState::pure(2, 2, phi).unwrap()).unwrap();
        assert!((s.lambda.as_slice()[0] - 0.5).abs() < 1e-14);
        assert!((s.lambda.as_slice()[1] - 0.5).abs() < 1e-14);

        let prod = PureState::basis(4, 1);
        let s = schmidt(&BipartiteState::pure(2, 2, prod).unwrap()).unwrap();
        assert!((s.lambda.as_slice()[0] - 1.0).abs() < 1e-14);
        assert!(s.lambda.as_slice()[1].abs() < 1e-14);

        let st = PureState::from_real(&[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()]).unwrap();
        let bip = BipartiteState::pure(2, 2, st.clone()).unwrap();
        let s = schmidt(&bip).unwrap();
        assert!((s.lambda.as_slice()[0] - 0.9).abs() < 1e-14);
        assert!((s.lambda.as_slice()[1] - 0.1).abs() < 1e-14);
        let back = s.reassemble();
        for (x, y) in back.iter().zip(st.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn schmidt_rejects_mixed() {
        let bip = BipartiteState::mixed(2, 2, DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(matches!(
            schmidt(&bip),
            Err(StateError::NotPure { rank: 4 })
        ));
    }

    #[test]
    fn isometry_examples() {
        let rho = DensityMatrix::maximally_mixed(2);
        let ens = ensemble_from_isometry(&rho, &ComplexMatrix::identity(2, 2)).unwrap();
        assert_eq!(ens.len(), 2);
        assert!((ens.members()[0].weight - 0.5).abs() < 1e-15);
        assert!(ens.members()[0].state.fidelity(&PureState::basis(2, 0)) > 1.0 - 1e-15);

        let h = real_matrix(
            2,
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        );
        let ens = ensemble_from_isometry(&rho, &h).unwrap();
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        let minus = PureState::from_real(&[1.0, -1.0]).unwrap();
        assert!((ens.members()[0].weight - 0.5).abs() < 1e-15);
        assert!(ens.members()[0].state.fidelity(&plus) > 1.0 - 1e-14);
        assert!(ens.members()[1].state.fidelity(&minus) > 1.0 - 1e-14);

        let zero = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let ens = ensemble_from_isometry(&zero, &ComplexMatrix::identity(1, 1)).unwrap();
        assert_eq!(ens.len(), 1);
        assert!((ens.members()[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isometry_errors() {
        let rho = DensityMatrix::maximally_mixed(2);
        let bad = real_matrix(2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            ensemble_from_isometry(&rho, &bad),
            Err(StateError::NotIsometry { .. })
        ));
        let wrong_rank = ComplexMatrix::identity(3, 1);
        assert!(matches!(
            ensemble_from_isometry(&rho, &wrong_rank),
            Err(StateError::RankMismatch { .. })
        ));
    }

    fn flip_channel() -> KrausChannel {
        let k1 = ComplexMatrix::identity(2, 2).scale(FRAC_1_SQRT_2);
        let k2 = real_matrix(2, &[0.0, 1.0, 1.0, 0.0]).scale(FRAC_1_SQRT_2);
        KrausChannel::new(vec![k1, k2]).unwrap()
    }

    #[test]
    fn channel_examples() {
        let zero = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let out = apply_channel(&zero, &flip_channel()).unwrap();
        assert!(
            linalg::max_abs_diff(out.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15
        );

        let mixed = DensityMatrix::maximally_mixed(2);
        let out = apply_channel(&mixed, &flip_channel()).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), mixed.matrix()) < 1e-15);

        let id = KrausChannel::new(vec![ComplexMatrix::identity(2, 2)]).unwrap();
        let rho = validate_density(real_matrix(2, &[0.7, 0.2, 0.2, 0.3])).unwrap();
        assert_eq!(apply_channel(&rho, &id).unwrap().matrix(), rho.matrix());

        let three = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            apply_channel(&three, &flip_channel()),
            Err(StateError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let k = ComplexMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(
            KrausChannel::new(vec![k]),
            Err(StateError::NotComplete { .. })
        ));
    }

    #[test]
    fn probability_vector_clamps_tiny_negatives() {
        let p = ProbabilityVector::new(vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(p.as_slice()[1], 0.0);
        assert!(ProbabilityVector::new(vec![1.1, -0.1]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = PureState::from_real(&[0.6, 0.8]).unwrap();
        let prod: Vec<C64> = [0.6, 0.8].iter().flat_map(|&x| [c(x), c(0.0)]).collect();
        let rho = DensityMatrix::from_pure(&PureState::new(prod).unwrap());
        let ra = partial_trace_b(&rho, 2, 2);
        assert!(linalg::max_abs_diff(ra.matrix(), &a.projector()) < 1e-15);
    }
}
