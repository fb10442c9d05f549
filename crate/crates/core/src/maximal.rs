//! Assisted maximally coherent (AMC) and assisted maximally entangled (AME)
//! states: explicit constructions and certification.
//!
//! A state is AMC when it is a mixture of pure states with uniform coherence
//! vectors, and AME when it is a mixture of pure states with uniform Schmidt
//! vectors. A uniform diagonal is necessary for AMC in every dimension and
//! sufficient in dimensions 2 and 3.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, ONE, ZERO};
use crate::measures::{self, lift_to_diagonal_pairs, Extension, SchmidtCorrelated};
use crate::roofs::Budget;
use crate::simplexfn::Builtin;
use crate::states::{
    self, coherence_vector, BipartiteState, DensityMatrix, Ensemble, Member, PureState, StateError,
    DENSITY_TOL, MIN_WEIGHT,
};

/// A certified witness may deviate from uniform by at most this much.
pub const WITNESS_UNIFORMITY_TOL: f64 = 1e-7;
/// Assistance values within this of `log₂ n` count as maximal.
pub const MAXIMALITY_TOL: f64 = 1e-6;
/// Entries outside the `|ii⟩⟨jj|` pattern below this are treated as zero.
pub const SCHMIDT_CORRELATED_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaximalError {
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("Bell index ({s}, {t}) out of range for n = {n}")]
    IndexOutOfRange { n: usize, s: usize, t: usize },
    #[error("AME certification needs equal local dimensions, got {dim_a}x{dim_b}")]
    DimensionMismatch { dim_a: usize, dim_b: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Hermitian positive semidefinite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    mat: ComplexMatrix,
}

impl CorrelationMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self, MaximalError> {
        let (r, c) = mat.shape();
        if r != c || r == 0 {
            return Err(MaximalError::InvalidCorrelation(format!("shape {r}x{c}")));
        }
        let herm = linalg::hermitian_residual(&mat);
        if herm > DENSITY_TOL {
            return Err(MaximalError::InvalidCorrelation(format!(
                "not Hermitian ({herm:.3e})"
            )));
        }
        for i in 0..r {
            if (mat[(i, i)] - ONE).norm() > DENSITY_TOL {
                return Err(MaximalError::InvalidCorrelation(format!(
                    "diagonal entry {i} is {}",
                    mat[(i, i)]
                )));
            }
        }
        let (vals, _) = linalg::hermitian_eigen(&mat);
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -DENSITY_TOL {
            return Err(MaximalError::InvalidCorrelation(format!(
                "smallest eigenvalue {min:.3e}"
            )));
        }
        Ok(CorrelationMatrix { mat })
    }

    /// `n ρ` for a state with uniform diagonal, with the diagonal set to 1.
    pub fn from_uniform_state(rho: &DensityMatrix) -> Result<Self, MaximalError> {
        let n = rho.dim();
        let mut mat = rho.matrix().scale(n as f64);
        for i in 0..n {
            mat[(i, i)] = ONE;
        }
        CorrelationMatrix::new(mat)
    }

    /// The two-dimensional rank-one correlation matrix with off-diagonal `e^{iα}`.
    pub fn rank_one_2(alpha: f64) -> Self {
        let e = C64::from_polar(1.0, alpha);
        CorrelationMatrix {
            mat: ComplexMatrix::from_row_slice(2, 2, &[ONE, e, e.conj(), ONE]),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }
}

/// `n` equal-weight columns of the Fourier matrix, mixing to `I/n`.
pub fn fourier_ensemble(n: usize) -> Ensemble {
    assert!(n >= 1, "dimension must be positive");
    let s = 1.0 / (n as f64).sqrt();
    let members = (0..n)
        .map(|k| {
            let amp = (0..n)
                .map(|j| C64::from_polar(s, TAU * ((k * j) % n) as f64 / n as f64))
                .collect();
            Member {
                weight: 1.0 / n as f64,
                state: PureState::new(amp).expect("Fourier column is a unit vector"),
            }
        })
        .collect();
    Ensemble::new(DensityMatrix::maximally_mixed(n), members)
        .expect("Fourier basis resolves the identity")
}

/// Split a 2x2 correlation matrix with off-diagonal `c = |c| e^{iφ}` into
/// `|c| R(φ) + (1-|c|)/2 R(0) + (1-|c|)/2 R(π)`; zero-weight terms are dropped.
pub fn decompose_correlation_2(
    c: &CorrelationMatrix,
) -> Result<Vec<(f64, CorrelationMatrix)>, MaximalError> {
    if c.dim() != 2 {
        return Err(MaximalError::InvalidCorrelation(format!(
            "expected dimension 2, got {}",
            c.dim()
        )));
    }
    let off = c.mat[(0, 1)];
    let modulus = off.norm().min(1.0);
    let rest = 0.5 * (1.0 - modulus);
    let mut terms = Vec::with_capacity(3);
    if modulus > 0.0 {
        terms.push((modulus, CorrelationMatrix::rank_one_2(off.arg())));
    }
    if rest > 0.0 {
        terms.push((rest, CorrelationMatrix::rank_one_2(0.0)));
        terms.push((rest, CorrelationMatrix::rank_one_2(std::f64::consts::PI)));
    }
    Ok(terms)
}

/// Sign patterns of the four maximally coherent real qutrit states.
pub const SIGN_PATTERNS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
];

/// Weights of [`SIGN_PATTERNS`] for a real qutrit state with diagonal 1/3.
/// The off-diagonals enter through the correlation matrix `3ρ`.
pub fn three_dim_weights(r12: f64, r13: f64, r23: f64) -> [f64; 4] {
    let (a, b, c) = (3.0 * r12, 3.0 * r13, 3.0 * r23);
    [
        0.25 * (1.0 + a + b + c),
        0.25 * (1.0 - a - b + c),
        0.25 * (1.0 - a + b - c),
        0.25 * (1.0 + a - b - c),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThreeDimOutcome {
    Decomposed(Ensemble),
    /// Some weight is negative; the state needs another route.
    Unavailable {
        weights: [f64; 4],
    },
}

/// Explicit decomposition of a real qutrit state with diagonal 1/3 into the
/// four sign-pattern states `(±1, ±1, ±1)/√3`.
pub fn decompose_3dim_real(rho: &DensityMatrix) -> Result<ThreeDimOutcome, MaximalError> {
    if rho.dim() != 3 {
        return Err(MaximalError::PreconditionFailed(format!(
            "dimension {} is not 3",
            rho.dim()
        )));
    }
    if !rho.is_real(DENSITY_TOL) {
        return Err(MaximalError::PreconditionFailed(
            "state has complex entries".into(),
        ));
    }
    let m = rho.matrix();
    for i in 0..3 {
        if (m[(i, i)].re - 1.0 / 3.0).abs() > DENSITY_TOL {
            return Err(MaximalError::PreconditionFailed(format!(
                "diagonal entry {i} is {} instead of 1/3",
                m[(i, i)].re
            )));
        }
    }
    let weights = three_dim_weights(m[(0, 1)].re, m[(0, 2)].re, m[(1, 2)].re);
    if weights.iter().any(|&w| w < -1e-12) {
        return Ok(ThreeDimOutcome::Unavailable { weights });
    }
    let members = weights
        .iter()
        .zip(SIGN_PATTERNS.iter())
        .filter(|(w, _)| **w >= MIN_WEIGHT)
        .map(|(&w, signs)| Member {
            weight: w,
            state: PureState::from_real(signs).expect("nonzero sign pattern"),
        })
        .collect();
    Ok(ThreeDimOutcome::Decomposed(Ensemble::new(
        rho.clone(),
        members,
    )?))
}

/// `|φ_st⟩ = (I ⊗ U_st^*) |φ⁺⟩` with `U_st = h^t g^s`, `h|j⟩ = |j+1⟩`,
/// `g|j⟩ = ω^j |j⟩`, `ω = e^{-2πi/n}`.
pub fn generalized_bell(n: usize, s: usize, t: usize) -> Result<BipartiteState, MaximalError> {
    if n == 0 || s >= n || t >= n {
        return Err(MaximalError::IndexOutOfRange { n, s, t });
    }
    let amp_scale = 1.0 / (n as f64).sqrt();
    let mut amp = vec![ZERO; n * n];
    for j in 0..n {
        // conj(ω^{sj}) = e^{2πi sj/n}
        let phase = TAU * ((s * j) % n) as f64 / n as f64;
        amp[j * n + (j + t) % n] = C64::from_polar(amp_scale, phase);
    }
    Ok(BipartiteState::pure(n, n, PureState::new(amp)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Amc,
    NotAmc,
    Ame,
    NotAme,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Amc => "AMC",
            Verdict::NotAmc => "NotAMC",
            Verdict::Ame => "AME",
            Verdict::NotAme => "NotAME",
            Verdict::Inconclusive => "Inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Verdict::Amc,
            Verdict::NotAmc,
            Verdict::Ame,
            Verdict::NotAme,
            Verdict::Inconclusive,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    DiagonalTest,
    /// Reduced state of A is not maximally mixed (AME only).
    MarginalTest,
    ConstructiveDecomposition,
    NumericalSearch,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::DiagonalTest => "DiagonalTest",
            Reason::MarginalTest => "MarginalTest",
            Reason::ConstructiveDecomposition => "ConstructiveDecomposition",
            Reason::NumericalSearch => "NumericalSearch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Reason::DiagonalTest,
            Reason::MarginalTest,
            Reason::ConstructiveDecomposition,
            Reason::NumericalSearch,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub reason: Reason,
    /// For positive verdicts, the worst member deviation from uniform; for
    /// negative ones, the size of the violated condition; for inconclusive
    /// ones, the shortfall of the assistance value.
    pub residual: f64,
    pub witness: Option<Ensemble>,
}

/// Worst deviation of any member's coherence vector from uniform.
pub fn amc_witness_residual(witness: &Ensemble) -> f64 {
    witness
        .members()
        .iter()
        .map(|m| coherence_vector(&m.state).uniformity_residual())
        .fold(0.0, f64::max)
}

/// Worst deviation of any member's Schmidt vector from uniform.
pub fn ame_witness_residual(
    witness: &Ensemble,
    dim_a: usize,
    dim_b: usize,
) -> Result<f64, StateError> {
    let mut worst: f64 = 0.0;
    for m in witness.members() {
        let st = BipartiteState::pure(dim_a, dim_b, m.state.clone())?;
        let lambda = states::schmidt(&st)?.lambda.padded(dim_a.max(dim_b));
        worst = worst.max(lambda.uniformity_residual());
    }
    Ok(worst)
}

pub fn certify_amc(rho: &DensityMatrix, budget: Budget) -> Certificate {
    let n = rho.dim();
    let m = rho.matrix();
    let diag_dev = (0..n)
        .map(|i| (m[(i, i)].re - 1.0 / n as f64).abs())
        .fold(0.0, f64::max);
    if diag_dev > DENSITY_TOL {
        return Certificate {
            verdict: Verdict::NotAmc,
            reason: Reason::DiagonalTest,
            residual: diag_dev,
            witness: None,
        };
    }
    if linalg::max_abs_diff(m, DensityMatrix::maximally_mixed(n).matrix()) <= 1e-12 {
        return positive_amc(fourier_ensemble(n), rho, Reason::ConstructiveDecomposition);
    }
    if n == 2 {
        if let Some(w) = correlation_2_witness(rho) {
            return positive_amc(w, rho, Reason::ConstructiveDecomposition);
        }
    }
    if n == 3 && rho.is_real(DENSITY_TOL) {
        if let Ok(ThreeDimOutcome::Decomposed(w)) = decompose_3dim_real(rho) {
            return positive_amc(w, rho, Reason::ConstructiveDecomposition);
        }
    }
    numerical_amc(rho, budget)
}

// Rebuild the witness against `rho` itself so reconstruction is checked
// against the caller's state.
fn positive_amc(witness: Ensemble, rho: &DensityMatrix, reason: Reason) -> Certificate {
    match Ensemble::new(rho.clone(), witness.members().to_vec()) {
        Ok(w) => Certificate {
            verdict: Verdict::Amc,
            reason,
            residual: amc_witness_residual(&w),
            witness: Some(w),
        },
        Err(_) => inconclusive(f64::NAN),
    }
}

fn inconclusive(residual: f64) -> Certificate {
    Certificate {
        verdict: Verdict::Inconclusive,
        reason: Reason::NumericalSearch,
        residual,
        witness: None,
    }
}

fn correlation_2_witness(rho: &DensityMatrix) -> Option<Ensemble> {
    let corr = CorrelationMatrix::from_uniform_state(rho).ok()?;
    let terms = decompose_correlation_2(&corr).ok()?;
    let members = terms
        .into_iter()
        .map(|(w, r)| {
            // R(α) = 2 |ψ⟩⟨ψ| with ψ = (1, e^{-iα}) / √2
            let e = r.mat[(0, 1)].conj();
            Member {
                weight: w,
                state: PureState::new(vec![C64::new(FRAC_1_SQRT_2, 0.0), e * FRAC_1_SQRT_2])
                    .expect("unit vector"),
            }
        })
        .collect();
    Ensemble::new(rho.clone(), members).ok()
}

fn numerical_amc(rho: &DensityMatrix, budget: Budget) -> Certificate {
    let n = rho.dim();
    let target = (n as f64).log2();
    let result =
        match measures::coherence(rho, &Builtin::Shannon, Extension::Assistance, budget, None) {
            Ok(r) => r,
            Err(_) => return inconclusive(f64::NAN),
        };
    if result.value < target - MAXIMALITY_TOL {
        return inconclusive(target - result.value);
    }
    let constraints = coherence_constraints(n);
    match polish(rho, &result.witness, &constraints) {
        Some(w) => {
            let residual = amc_witness_residual(&w);
            if residual <= WITNESS_UNIFORMITY_TOL {
                Certificate {
                    verdict: Verdict::Amc,
                    reason: Reason::NumericalSearch,
                    residual,
                    witness: Some(w),
                }
            } else {
                inconclusive(residual)
            }
        }
        None => inconclusive(target - result.value),
    }
}

pub fn certify_ame(state: &BipartiteState, budget: Budget) -> Result<Certificate, MaximalError> {
    let (da, db) = state.dims();
    if da != db {
        return Err(MaximalError::DimensionMismatch {
            dim_a: da,
            dim_b: db,
        });
    }
    let n = da;
    if let Some(mc) = SchmidtCorrelated::detect(state, SCHMIDT_CORRELATED_TOL) {
        let cert = certify_amc(&measures::compress_mc(&mc), budget);
        let verdict = match cert.verdict {
            Verdict::Amc => Verdict::Ame,
            Verdict::NotAmc => Verdict::NotAme,
            other => other,
        };
        let witness = match cert.witness {
            Some(w) => {
                let lifted = w
                    .members()
                    .iter()
                    .map(|m| Member {
                        weight: m.weight,
                        state: lift_to_diagonal_pairs(&m.state),
                    })
                    .collect();
                Some(Ensemble::new(state.density(), lifted)?)
            }
            None => None,
        };
        let residual = match &witness {
            Some(w) => ame_witness_residual(w, n, n)?,
            None => cert.residual,
        };
        return Ok(Certificate {
            verdict,
            reason: cert.reason,
            residual,
            witness,
        });
    }

    // every maximally entangled member has a maximally mixed marginal
    let marginal = state.reduced_a();
    let dev = linalg::max_abs_diff(
        marginal.matrix(),
        DensityMatrix::maximally_mixed(n).matrix(),
    );
    if dev > DENSITY_TOL {
        return Ok(Certificate {
            verdict: Verdict::NotAme,
            reason: Reason::MarginalTest,
            residual: dev,
            witness: None,
        });
    }

    let target = (n as f64).log2();
    let result = match measures::entanglement(
        state,
        &Builtin::Shannon,
        Extension::Assistance,
        budget,
        None,
    ) {
        Ok(r) => r,
        Err(_) => return Ok(inconclusive(f64::NAN)),
    };
    if result.value < target - MAXIMALITY_TOL {
        return Ok(inconclusive(target - result.value));
    }
    let rho = state.density();
    let constraints = entanglement_constraints(n);
    Ok(match polish(&rho, &result.witness, &constraints) {
        Some(w) => {
            let residual = ame_witness_residual(&w, n, n)?;
            if residual <= WITNESS_UNIFORMITY_TOL {
                Certificate {
                    verdict: Verdict::Ame,
                    reason: Reason::NumericalSearch,
                    residual,
                    witness: Some(w),
                }
            } else {
                inconclusive(residual)
            }
        }
        None => inconclusive(target - result.value),
    })
}

/// Quadratic forms `Q_i = |i⟩⟨i| - I/n`; `⟨ψ|Q_i|ψ⟩ = μ_i - 1/n`.
pub fn coherence_constraints(n: usize) -> Vec<ComplexMatrix> {
    (0..n)
        .map(|i| {
            let mut q = ComplexMatrix::identity(n, n).scale(-1.0 / n as f64);
            q[(i, i)] += ONE;
            q
        })
        .collect()
}

/// Quadratic forms whose expectations are the entries of `ρ_A - I/n` on
/// `n ⊗ n` (real and imaginary parts separately).
pub fn entanglement_constraints(n: usize) -> Vec<ComplexMatrix> {
    let id_b = ComplexMatrix::identity(n, n);
    let unit = |a: usize, b: usize, v: C64| {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(a, b)] = v;
        e
    };
    let mut out = Vec::new();
    for a in 0..n {
        let mut q = linalg::kron(&unit(a, a, ONE), &id_b);
        q -= ComplexMatrix::identity(n * n, n * n).scale(1.0 / n as f64);
        out.push(q);
        for b in (a + 1)..n {
            let re = (unit(a, b, ONE) + unit(b, a, ONE)).scale(0.5);
            let half_i = C64::new(0.0, 0.5);
            let im = unit(a, b, half_i) + unit(b, a, -half_i);
            out.push(linalg::kron(&re, &id_b));
            out.push(linalg::kron(&im, &id_b));
        }
    }
    out
}

const POLISH_TARGET: f64 = 1e-14;
const POLISH_MAX_ITERS: usize = 100;

fn normalized_residuals(rows: &[Vec<C64>], constraints: &[ComplexMatrix]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.len() * constraints.len());
    for w in rows {
        let norm2 = linalg::norm_sqr(w);
        let wv = nalgebra::DVector::from_column_slice(w);
        for q in constraints {
            let val = (wv.adjoint() * q * &wv)[(0, 0)].re;
            out.push(val / norm2);
        }
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Gauss-Newton refinement of a near-uniform witness. Members are rotated by
/// unitaries `W ↦ U W`, which preserves the mixture, until every normalized
/// constraint `⟨w|Q|w⟩/⟨w|w⟩` vanishes to round-off. Returns `None` if the
/// residual does not reach [`WITNESS_UNIFORMITY_TOL`].
pub fn polish(
    rho: &DensityMatrix,
    witness: &Ensemble,
    constraints: &[ComplexMatrix],
) -> Option<Ensemble> {
    let mut rows: Vec<Vec<C64>> = witness
        .members()
        .iter()
        .filter(|m| m.weight >= MIN_WEIGHT)
        .map(|m| {
            let s = m.weight.sqrt();
            m.state.amplitudes().iter().map(|z| z * s).collect()
        })
        .collect();
    let m = rows.len();
    let dim = rho.dim();
    let nq = constraints.len();
    let mut res = normalized_residuals(&rows, constraints);
    let mut err = max_abs(&res);
    let qw_cache = |rows: &[Vec<C64>]| -> Vec<Vec<nalgebra::DVector<C64>>> {
        rows.iter()
            .map(|w| {
                let wv = nalgebra::DVector::from_column_slice(w);
                constraints.iter().map(|q| q * &wv).collect()
            })
            .collect()
    };

    for _ in 0..POLISH_MAX_ITERS {
        if err <= POLISH_TARGET || m < 2 {
            break;
        }
        let qw = qw_cache(&rows);
        let norms: Vec<f64> = rows.iter().map(|w| linalg::norm_sqr(w)).collect();
        let pairs: Vec<(usize, usize)> = (0..m)
            .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
            .collect();
        let mut jac = DMatrix::<f64>::zeros(m * nq, 2 * pairs.len());
        // d r_{k,q} for δw_k = d
        let deriv = |k: usize, q: usize, d: &[C64], res: &[f64]| -> f64 {
            let w = &rows[k];
            let qwk = &qw[k][q];
            // ⟨Qw|d⟩ = ⟨w|Q|d⟩ for Hermitian Q
            let a: C64 = qwk.iter().zip(d).map(|(x, y)| x.conj() * y).sum();
            let b: C64 = w.iter().zip(d).map(|(x, y)| x.conj() * y).sum();
            2.0 * (a.re - res[k * nq + q] * b.re) / norms[k]
        };
        for (p, &(a, b)) in pairs.iter().enumerate() {
            let i = C64::new(0.0, 1.0);
            // symmetric generator: δw_a = i w_b, δw_b = i w_a
            let da: Vec<C64> = rows[b].iter().map(|z| i * z).collect();
            let db: Vec<C64> = rows[a].iter().map(|z| i * z).collect();
            // antisymmetric generator: δw_a = w_b, δw_b = -w_a
            let ea: Vec<C64> = rows[b].clone();
            let eb: Vec<C64> = rows[a].iter().map(|z| -z).collect();
            for q in 0..nq {
                jac[(a * nq + q, 2 * p)] = deriv(a, q, &da, &res);
                jac[(b * nq + q, 2 * p)] = deriv(b, q, &db, &res);
                jac[(a * nq + q, 2 * p + 1)] = deriv(a, q, &ea, &res);
                jac[(b * nq + q, 2 * p + 1)] = deriv(b, q, &eb, &res);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(res.len(), res.iter().map(|x| -x));
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd.solve(&rhs, smax * 1e-12).ok()?;

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let mut h = ComplexMatrix::zeros(m, m);
            for (p, &(a, b)) in pairs.iter().enumerate() {
                let x = step[2 * p] * scale;
                let y = step[2 * p + 1] * scale;
                h[(a, b)] += C64::new(x, -y);
                h[(b, a)] += C64::new(x, y);
            }
            let half_ih = h.scale(0.5) * C64::new(0.0, 1.0);
            let id = ComplexMatrix::identity(m, m);
            let u = linalg::solve(&(&id - &half_ih), &(&id + &half_ih))?;
            let wmat = ComplexMatrix::from_fn(m, dim, |k, j| rows[k][j]);
            let next = u * wmat;
            let cand: Vec<Vec<C64>> = (0..m)
                .map(|k| next.row(k).iter().copied().collect())
                .collect();
            if cand.iter().any(|w| linalg::norm_sqr(w) < MIN_WEIGHT) {
                scale *= 0.5;
                continue;
            }
            let cand_res = normalized_residuals(&cand, constraints);
            let cand_err = max_abs(&cand_res);
            if cand_err < err {
                rows = cand;
                res = cand_res;
                err = cand_err;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if err > WITNESS_UNIFORMITY_TOL {
        return None;
    }
    let members: Vec<Member> = rows
        .into_iter()
        .filter_map(states::member_from_unnormalized)
        .collect();
    Ensemble::new(rho.clone(), members).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(off: C64) -> DensityMatrix {
        states::validate_density(ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), off, off.conj(), C64::new(0.5, 0.0)],
        ))
        .unwrap()
    }

    fn qutrit_real(r12: f64, r13: f64, r23: f64) -> DensityMatrix {
        let t = 1.0 / 3.0;
        let v = [t, r12, r13, r12, t, r23, r13, r23, t];
        states::validate_density(ComplexMatrix::from_row_slice(
            3,
            3,
            &v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
        ))
        .unwrap()
    }

    fn small_budget() -> Budget {
        Budget {
            restarts: 8,
            sweeps: 200,
            seed: 5,
        }
    }

    #[test]
    fn fourier_members_are_orthonormal_and_uniform() {
        for n in 1..=16 {
            let ens = fourier_ensemble(n);
            assert!(ens.reconstruction_residual() < 1e-12);
            let members = ens.members();
            for (i, a) in members.iter().enumerate() {
                assert!(coherence_vector(&a.state).uniformity_residual() < 1e-12);
                for (j, b) in members.iter().enumerate() {
                    let g = linalg::inner(a.state.amplitudes(), b.state.amplitudes());
                    let want = if i == j { ONE } else { ZERO };
                    assert!((g - want).norm() < 1e-12, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn fourier_qubit_is_plus_minus() {
        let ens = fourier_ensemble(2);
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        let minus = PureState::from_real(&[1.0, -1.0]).unwrap();
        assert!(ens.members()[0].state.fidelity(&plus) > 1.0 - 1e-15);
        assert!(ens.members()[1].state.fidelity(&minus) > 1.0 - 1e-15);
    }

    fn corr2(off: C64) -> CorrelationMatrix {
        CorrelationMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[ONE, off, off.conj(), ONE],
        ))
        .unwrap()
    }

    fn recombine(terms: &[(f64, CorrelationMatrix)]) -> ComplexMatrix {
        terms
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, (w, c)| {
                acc + c.matrix().scale(*w)
            })
    }

    #[test]
    fn correlation_2_examples() {
        let t = decompose_correlation_2(&corr2(ONE)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0, 1.0);

        let t = decompose_correlation_2(&corr2(ZERO)).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[0].0 - 0.5).abs() < 1e-15 && (t[1].0 - 0.5).abs() < 1e-15);
        assert!((t[1].1.matrix()[(0, 1)] + ONE).norm() < 1e-15);

        let c = corr2(C64::new(0.0, 0.6));
        let t = decompose_correlation_2(&c).unwrap();
        let w: Vec<f64> = t.iter().map(|x| x.0).collect();
        assert!(
            (w[0] - 0.6).abs() < 1e-15 && (w[1] - 0.2).abs() < 1e-15 && (w[2] - 0.2).abs() < 1e-15
        );
        assert!((t[0].1.matrix()[(0, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(linalg::max_abs_diff(&recombine(&t), c.matrix()) < 1e-15);
    }

    #[test]
    fn correlation_2_rejects_other_dimensions() {
        let c = CorrelationMatrix::new(ComplexMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            decompose_correlation_2(&c),
            Err(MaximalError::InvalidCorrelation(_))
        ));
        assert!(CorrelationMatrix::new(ComplexMatrix::identity(2, 2).scale(0.5)).is_err());
    }

    #[test]
    fn three_dim_examples() {
        // (1,1,1)/√3 projector: all weight on the first pattern
        let t = 1.0 / 3.0;
        let ThreeDimOutcome::Decomposed(ens) = decompose_3dim_real(&qutrit_real(t, t, t)).unwrap()
        else {
            panic!("expected a decomposition");
        };
        assert_eq!(ens.len(), 1);
        assert!((ens.members()[0].weight - 1.0).abs() < 1e-15);
        assert!(ens.reconstruction_residual() <= 1e-12);

        let ThreeDimOutcome::Decomposed(ens) =
            decompose_3dim_real(&qutrit_real(0.0, 0.0, 0.0)).unwrap()
        else {
            panic!("expected a decomposition");
        };
        assert_eq!(ens.len(), 4);
        for m in ens.members() {
            assert!((m.weight - 0.25).abs() < 1e-15);
        }

        let ThreeDimOutcome::Decomposed(ens) =
            decompose_3dim_real(&qutrit_real(0.1, 0.1, 0.1)).unwrap()
        else {
            panic!("expected a decomposition");
        };
        let w: Vec<f64> = ens.members().iter().map(|m| m.weight).collect();
        let want = [0.475, 0.175, 0.175, 0.175];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{w:?}");
        }
        assert!(ens.reconstruction_residual() <= 1e-12);
    }

    #[test]
    fn three_dim_negative_weight_is_unavailable() {
        let h = -1.0 / 6.0;
        match decompose_3dim_real(&qutrit_real(h, h, h)).unwrap() {
            ThreeDimOutcome::Unavailable { weights } => assert!(weights[0] < 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn three_dim_preconditions() {
        let rho =
            states::validate_density(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(
                vec![C64::new(0.5, 0.0), C64::new(0.25, 0.0), C64::new(0.25, 0.0)],
            )))
            .unwrap();
        assert!(matches!(
            decompose_3dim_real(&rho),
            Err(MaximalError::PreconditionFailed(_))
        ));
        let mut rng = crate::random::stream_rng(1, 2);
        let complex = crate::random::amc_witnessed(3, 4, &mut rng);
        assert!(matches!(
            decompose_3dim_real(complex.target()),
            Err(MaximalError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn generalized_bell_qubits() {
        let s = FRAC_1_SQRT_2;
        let cases = [
            ((0, 0), [s, 0.0, 0.0, s]),
            ((1, 0), [s, 0.0, 0.0, -s]),
            ((0, 1), [0.0, s, s, 0.0]),
            ((1, 1), [0.0, s, -s, 0.0]),
        ];
        for ((si, ti), want) in cases {
            let st = generalized_bell(2, si, ti).unwrap();
            let want = PureState::from_real(&want).unwrap();
            assert!(
                st.as_pure().unwrap().fidelity(&want) > 1.0 - 1e-15,
                "({si},{ti})"
            );
        }
        assert!(matches!(
            generalized_bell(2, 2, 0),
            Err(MaximalError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn generalized_bell_average_is_maximally_mixed() {
        for n in 2..=4 {
            let mut sum = ComplexMatrix::zeros(n * n, n * n);
            for s in 0..n {
                for t in 0..n {
                    let st = generalized_bell(n, s, t).unwrap();
                    let lambda = states::schmidt(&st).unwrap().lambda;
                    assert!(lambda.uniformity_residual() < 1e-12);
                    sum += st.density().matrix().scale(1.0 / (n * n) as f64);
                }
            }
            assert!(
                linalg::max_abs_diff(&sum, DensityMatrix::maximally_mixed(n * n).matrix()) < 1e-12
            );
        }
    }

    #[test]
    fn maximally_mixed_states_are_amc() {
        for n in 2..=5 {
            let cert = certify_amc(&DensityMatrix::maximally_mixed(n), small_budget());
            assert_eq!(cert.verdict, Verdict::Amc);
            assert_eq!(cert.witness.as_ref().unwrap().len(), n);
        }
    }

    #[test]
    fn nonuniform_diagonal_is_not_amc() {
        let rho = DensityMatrix::diagonal_state(
            &states::ProbabilityVector::new(vec![0.5, 0.25, 0.25]).unwrap(),
        );
        let cert = certify_amc(&rho, small_budget());
        assert_eq!(cert.verdict, Verdict::NotAmc);
        assert_eq!(cert.reason, Reason::DiagonalTest);
        assert!((cert.residual - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_certificate_uses_three_terms() {
        let cert = certify_amc(&qubit(C64::new(0.3, 0.0)), small_budget());
        assert_eq!(cert.verdict, Verdict::Amc);
        assert_eq!(cert.reason, Reason::ConstructiveDecomposition);
        let w = cert.witness.unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.reconstruction_residual() < 1e-12);
        assert!(amc_witness_residual(&w) < 1e-15);
    }

    #[test]
    fn complex_qutrit_certified_numerically() {
        let mut rng = crate::random::stream_rng(2, 9);
        let ens = crate::random::amc_witnessed(3, 4, &mut rng);
        let cert = certify_amc(ens.target(), small_budget());
        assert_eq!(cert.verdict, Verdict::Amc, "{cert:?}");
        assert_eq!(cert.reason, Reason::NumericalSearch);
        assert!(cert.residual <= WITNESS_UNIFORMITY_TOL);
        assert!(cert.witness.unwrap().reconstruction_residual() <= 1e-8);
    }

    #[test]
    fn polish_reaches_round_off_from_perturbed_fourier() {
        let n = 3;
        let fourier = fourier_ensemble(n);
        // rotate the Fourier rows slightly: still a decomposition of I/3, no
        // longer uniform
        let mut rng = crate::random::stream_rng(8, 1);
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            crate::random::complex_gaussian(&mut rng) * 0.01
        });
        let h = (&g + g.adjoint()).scale(0.5) * C64::new(0.0, 1.0);
        let id = ComplexMatrix::identity(n, n);
        let u = linalg::solve(&(&id - &h), &(&id + &h)).unwrap();
        let wmat = ComplexMatrix::from_fn(n, n, |k, j| {
            fourier.members()[k].state.amplitudes()[j] * fourier.members()[k].weight.sqrt()
        });
        let rotated = u * wmat;
        let members = (0..n)
            .filter_map(|k| {
                states::member_from_unnormalized(rotated.row(k).iter().copied().collect())
            })
            .collect();
        let perturbed = Ensemble::new(DensityMatrix::maximally_mixed(n), members).unwrap();
        assert!(amc_witness_residual(&perturbed) > 1e-4);
        let fixed = polish(perturbed.target(), &perturbed, &coherence_constraints(n)).unwrap();
        assert!(amc_witness_residual(&fixed) < 1e-12);
        assert!(fixed.reconstruction_residual() < 1e-12);
    }

    #[test]
    fn maximally_correlated_states_are_ame() {
        for n in [2, 3] {
            let mc = measures::embed_mc(&DensityMatrix::maximally_mixed(n));
            let cert = certify_ame(&mc.to_bipartite(), small_budget()).unwrap();
            assert_eq!(cert.verdict, Verdict::Ame);
            assert!(cert.residual < 1e-12);
        }
    }

    #[test]
    fn bell_mixture_is_ame_numerically() {
        let a = generalized_bell(2, 0, 0).unwrap().density();
        let b = generalized_bell(2, 0, 1).unwrap().density();
        let rho = DensityMatrix::mixture(&[(0.3, &a), (0.7, &b)]).unwrap();
        let st = BipartiteState::mixed(2, 2, rho).unwrap();
        let cert = certify_ame(&st, small_budget()).unwrap();
        assert_eq!(cert.verdict, Verdict::Ame, "{cert:?}");
        assert_eq!(cert.reason, Reason::NumericalSearch);
        assert!(cert.residual <= WITNESS_UNIFORMITY_TOL);
    }

    #[test]
    fn schmidt_correlated_nonuniform_is_not_ame() {
        let rho = DensityMatrix::diagonal_state(
            &states::ProbabilityVector::new(vec![0.5, 0.25, 0.25]).unwrap(),
        );
        let st = measures::embed_mc(&rho).to_bipartite();
        let cert = certify_ame(&st, small_budget()).unwrap();
        assert_eq!(cert.verdict, Verdict::NotAme);
        assert_eq!(cert.reason, Reason::DiagonalTest);
    }

    #[test]
    fn product_state_fails_marginal_test() {
        let st =
            BipartiteState::mixed(2, 2, DensityMatrix::from_pure(&PureState::basis(4, 1))).unwrap();
        let cert = certify_ame(&st, small_budget()).unwrap();
        assert_eq!(cert.verdict, Verdict::NotAme);
        assert_eq!(cert.reason, Reason::MarginalTest);
    }

    #[test]
    fn unequal_dimensions_rejected() {
        let st = BipartiteState::mixed(2, 3, DensityMatrix::maximally_mixed(6)).unwrap();
        assert!(matches!(
            certify_ame(&st, small_budget()),
            Err(MaximalError::DimensionMismatch { dim_a: 2, dim_b: 3 })
        ));
    }
}
