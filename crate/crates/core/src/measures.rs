//! Coherence and entanglement quantities induced by a simplex function `f`:
//! pure-state values, convex roofs and assistance values, plus the
//! Schmidt-correlated embedding that links the two families.

use num_complex::Complex64 as C64;
use smallvec::SmallVec;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, ZERO};
use crate::roofs::{solve_roof, Budget, Direction, Objective, RoofError, RoofProblem, RoofResult};
use crate::simplexfn::SimplexFunction;
use crate::states::{
    self, coherence_vector, validate_density, BipartiteState, BipartiteValue, DensityMatrix,
    Ensemble, Member, PureState, StateError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Coherence,
    Entanglement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extension {
    PureOnly,
    ConvexRoof,
    Assistance,
}

impl std::str::FromStr for Extension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pure" => Ok(Extension::PureOnly),
            "convex" => Ok(Extension::ConvexRoof),
            "assist" => Ok(Extension::Assistance),
            other => Err(format!(
                "unknown extension {other:?} (expected pure, convex or assist)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Roof(#[from] RoofError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// `C_f(ψ) = f(μ(ψ))`.
pub fn c_pure(psi: &PureState, f: &dyn SimplexFunction) -> f64 {
    f.eval(coherence_vector(psi).as_slice())
}

/// `E_f(ψ) = f(λ(ψ))`, with `λ` zero-padded to `max(dim_a, dim_b)`.
pub fn e_pure(psi: &BipartiteState, f: &dyn SimplexFunction) -> Result<f64, StateError> {
    let (da, db) = psi.dims();
    let s = states::schmidt(psi)?;
    Ok(f.eval(s.lambda.padded(da.max(db)).as_slice()))
}

/// `w ↦ |w|² f(μ(w/|w|))`.
pub struct CoherenceObjective<'a> {
    f: &'a dyn SimplexFunction,
    dim: usize,
}

impl<'a> CoherenceObjective<'a> {
    pub fn new(f: &'a dyn SimplexFunction, dim: usize) -> Self {
        CoherenceObjective { f, dim }
    }
}

impl Objective for CoherenceObjective<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, amp: &[C64]) -> f64 {
        // renormalize so unit-norm round-off cannot leak into f
        let mut mu: SmallVec<[f64; 16]> = amp.iter().map(|z| z.norm_sqr()).collect();
        let norm2: f64 = mu.iter().sum();
        if norm2 == 0.0 {
            return 0.0;
        }
        blend_normalize(&mut mu, norm2, 0.0);
        self.f.eval(&mu)
    }

    fn eval_weighted(&self, w: &[C64]) -> f64 {
        self.eval_weighted_smoothed(w, 0.0)
    }

    fn smoothable(&self) -> bool {
        true
    }

    fn eval_weighted_smoothed(&self, w: &[C64], eps: f64) -> f64 {
        let mut mu: SmallVec<[f64; 16]> = w.iter().map(|z| z.norm_sqr()).collect();
        let norm2: f64 = mu.iter().sum();
        if norm2 == 0.0 {
            return 0.0;
        }
        blend_normalize(&mut mu, norm2, eps);
        norm2 * self.f.eval(&mu)
    }
}

// p ↦ (1 - ε) p / norm2 + ε / d
fn blend_normalize(p: &mut [f64], norm2: f64, eps: f64) {
    let shift = eps / p.len() as f64;
    let scale = (1.0 - eps) / norm2;
    for x in p.iter_mut() {
        *x = *x * scale + shift;
    }
}

/// `w ↦ |w|² f(λ(w/|w|))` on `A ⊗ B`, with `λ` from the smaller reduced state.
pub struct EntanglementObjective<'a> {
    f: &'a dyn SimplexFunction,
    dim_a: usize,
    dim_b: usize,
}

impl<'a> EntanglementObjective<'a> {
    pub fn new(f: &'a dyn SimplexFunction, dim_a: usize, dim_b: usize) -> Self {
        EntanglementObjective { f, dim_a, dim_b }
    }

    /// Unnormalized squared Schmidt coefficients, padded to `max(dA, dB)`.
    fn schmidt_weights(&self, w: &[C64]) -> SmallVec<[f64; 16]> {
        let (da, db) = (self.dim_a, self.dim_b);
        let small = da.min(db);
        let mut reduced: SmallVec<[C64; 16]> = SmallVec::from_elem(ZERO, small * small);
        if da <= db {
            // M M†
            for i in 0..da {
                for k in i..da {
                    let v: C64 = (0..db).map(|j| w[i * db + j] * w[k * db + j].conj()).sum();
                    reduced[i * small + k] = v;
                    reduced[k * small + i] = v.conj();
                }
            }
        } else {
            // (M† M)^T has the same spectrum
            for j in 0..db {
                for l in j..db {
                    let v: C64 = (0..da).map(|i| w[i * db + j] * w[i * db + l].conj()).sum();
                    reduced[j * small + l] = v;
                    reduced[l * small + j] = v.conj();
                }
            }
        }
        let mut lambda: SmallVec<[f64; 16]> = SmallVec::from_elem(0.0, da.max(db));
        linalg::hermitian_eigenvalues_into(small, &reduced, &mut lambda[..small]);
        for x in lambda.iter_mut() {
            *x = x.max(0.0);
        }
        lambda
    }
}

impl Objective for EntanglementObjective<'_> {
    fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn eval(&self, amp: &[C64]) -> f64 {
        let mut lambda = self.schmidt_weights(amp);
        let norm2: f64 = lambda.iter().sum();
        if norm2 == 0.0 {
            return 0.0;
        }
        blend_normalize(&mut lambda, norm2, 0.0);
        self.f.eval(&lambda)
    }

    fn eval_weighted(&self, w: &[C64]) -> f64 {
        self.eval_weighted_smoothed(w, 0.0)
    }

    fn smoothable(&self) -> bool {
        true
    }

    fn eval_weighted_smoothed(&self, w: &[C64], eps: f64) -> f64 {
        let mut lambda = self.schmidt_weights(w);
        let norm2: f64 = lambda.iter().sum();
        if norm2 == 0.0 {
            return 0.0;
        }
        blend_normalize(&mut lambda, norm2, eps);
        norm2 * self.f.eval(&lambda)
    }
}

/// Coherence of `rho` under the chosen extension. Assistance values carry
/// the bracket `f(diag ρ)`; convex roofs carry the bracket 0.
pub fn coherence(
    rho: &DensityMatrix,
    f: &dyn SimplexFunction,
    extension: Extension,
    budget: Budget,
    cardinality: Option<usize>,
) -> Result<RoofResult, MeasureError> {
    let objective = CoherenceObjective::new(f, rho.dim());
    match extension {
        Extension::PureOnly => {
            let psi = rho.as_pure()?;
            Ok(pure_result(rho, psi, c_pure_of(&objective)))
        }
        Extension::ConvexRoof | Extension::Assistance => {
            let direction = direction_of(extension);
            let mut result = solve_roof(&RoofProblem {
                rho,
                objective: &objective,
                direction,
                cardinality,
                budget,
            })?;
            result.bracket = Some(match extension {
                Extension::Assistance => f.eval(rho.diagonal().as_slice()),
                _ => 0.0,
            });
            Ok(result)
        }
    }
}

/// Entanglement of a bipartite state under the chosen extension. Assistance
/// with the concurrence function carries the bracket `√(2(1 - tr ρ_A²))`.
pub fn entanglement(
    state: &BipartiteState,
    f: &dyn SimplexFunction,
    extension: Extension,
    budget: Budget,
    cardinality: Option<usize>,
) -> Result<RoofResult, MeasureError> {
    let (da, db) = state.dims();
    let objective = EntanglementObjective::new(f, da, db);
    let rho = state.density();
    match extension {
        Extension::PureOnly => {
            let psi = match state.value() {
                BipartiteValue::Pure(psi) => psi.clone(),
                BipartiteValue::Mixed(rho) => rho.as_pure()?,
            };
            Ok(pure_result(&rho, psi, c_pure_of(&objective)))
        }
        Extension::ConvexRoof | Extension::Assistance => {
            let mut result = solve_roof(&RoofProblem {
                rho: &rho,
                objective: &objective,
                direction: direction_of(extension),
                cardinality,
                budget,
            })?;
            if extension == Extension::Assistance && f.name() == "concurrence" {
                result.bracket = Some(concurrence_assistance_bound(state));
            }
            Ok(result)
        }
    }
}

/// `√(2(1 - tr ρ_A²))`.
pub fn concurrence_assistance_bound(state: &BipartiteState) -> f64 {
    let purity = state.reduced_a().purity();
    (2.0 * (1.0 - purity)).max(0.0).sqrt()
}

/// `√(2(1 - Σ ρ_ii²))`.
pub fn concurrence_coherence_bound(rho: &DensityMatrix) -> f64 {
    let sq: f64 = rho.diagonal().as_slice().iter().map(|x| x * x).sum();
    (2.0 * (1.0 - sq)).max(0.0).sqrt()
}

fn direction_of(extension: Extension) -> Direction {
    match extension {
        Extension::Assistance => Direction::Max,
        _ => Direction::Min,
    }
}

fn c_pure_of<'o>(objective: &'o dyn Objective) -> impl Fn(&PureState) -> f64 + 'o {
    move |psi| objective.eval(psi.amplitudes())
}

fn pure_result(rho: &DensityMatrix, psi: PureState, g: impl Fn(&PureState) -> f64) -> RoofResult {
    let value = g(&psi);
    let witness = Ensemble::new(
        rho.clone(),
        vec![Member {
            weight: 1.0,
            state: psi,
        }],
    )
    .expect("a pure state is its own decomposition");
    RoofResult {
        value,
        witness,
        bracket: None,
        converged: true,
        iterations: 0,
    }
}

/// `Σ_ij ρ_ij |ii⟩⟨jj|`, stored by its `n x n` coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtCorrelated {
    coeff: DensityMatrix,
}

impl SchmidtCorrelated {
    pub fn new(coeff: ComplexMatrix) -> Result<Self, StateError> {
        Ok(SchmidtCorrelated {
            coeff: validate_density(coeff)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeff.dim()
    }

    pub fn coefficients(&self) -> &DensityMatrix {
        &self.coeff
    }

    /// The `n² x n²` bipartite density matrix.
    pub fn to_bipartite(&self) -> BipartiteState {
        let n = self.dim();
        let c = self.coeff.matrix();
        let mut big = ComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                big[(i * n + i, j * n + j)] = c[(i, j)];
            }
        }
        let rho = validate_density(big).expect("embedding preserves validity");
        BipartiteState::mixed(n, n, rho).expect("n² flat dimension")
    }

    /// Recognize a bipartite state supported on `span{|ii⟩}`; `None` if any
    /// entry outside that pattern exceeds `tol`.
    pub fn detect(state: &BipartiteState, tol: f64) -> Option<Self> {
        let (da, db) = state.dims();
        if da != db {
            return None;
        }
        let n = da;
        let rho = state.density();
        let m = rho.matrix();
        for r in 0..n * n {
            for c in 0..n * n {
                let on_pattern = r % (n + 1) == 0 && c % (n + 1) == 0;
                if !on_pattern && m[(r, c)].norm() > tol {
                    return None;
                }
            }
        }
        let coeff = ComplexMatrix::from_fn(n, n, |i, j| m[(i * n + i, j * n + j)]);
        SchmidtCorrelated::new(coeff).ok()
    }
}

/// `Σ ρ_ij |ii⟩⟨jj| ↦ Σ ρ_ij |i⟩⟨j|`.
pub fn compress_mc(mc: &SchmidtCorrelated) -> DensityMatrix {
    mc.coeff.clone()
}

/// `Σ ρ_ij |i⟩⟨j| ↦ Σ ρ_ij |ii⟩⟨jj|`.
pub fn embed_mc(rho: &DensityMatrix) -> SchmidtCorrelated {
    SchmidtCorrelated { coeff: rho.clone() }
}

/// `Σ_i c_i |i⟩ ↦ Σ_i c_i |ii⟩`.
pub fn lift_to_diagonal_pairs(psi: &PureState) -> PureState {
    let n = psi.dim();
    let mut amp = vec![ZERO; n * n];
    for (i, z) in psi.amplitudes().iter().enumerate() {
        amp[i * n + i] = *z;
    }
    PureState::new(amp).expect("lifting preserves the norm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplexfn::Builtin;

    fn budget() -> Budget {
        Budget {
            restarts: 8,
            sweeps: 100,
            seed: 3,
        }
    }

    fn bell(sign: f64, odd: bool) -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = if odd {
            [0.0, s, sign * s, 0.0]
        } else {
            [s, 0.0, 0.0, sign * s]
        };
        PureState::from_real(&v).unwrap()
    }

    #[test]
    fn c_pure_examples() {
        assert_eq!(c_pure(&PureState::basis(3, 0), &Builtin::Shannon), 0.0);
        let phases = [0.3, 1.7, -2.2, 0.9];
        let n = phases.len();
        let amp = phases
            .iter()
            .map(|&t| C64::from_polar(1.0 / (n as f64).sqrt(), t))
            .collect();
        let psi = PureState::new(amp).unwrap();
        assert!((c_pure(&psi, &Builtin::Shannon) - 2.0).abs() < 1e-12);
        let psi = PureState::from_real(&[0.9f64.sqrt(), 0.1f64.sqrt()]).unwrap();
        assert!((c_pure(&psi, &Builtin::Concurrence) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn e_pure_examples() {
        let phi = BipartiteState::pure(2, 2, bell(1.0, false)).unwrap();
        assert!((e_pure(&phi, &Builtin::Concurrence).unwrap() - 1.0).abs() < 1e-12);
        let prod = BipartiteState::pure(2, 2, PureState::basis(4, 0)).unwrap();
        for f in Builtin::ALL {
            assert!(e_pure(&prod, &f).unwrap().abs() < 1e-12);
        }
        for n in 2..5 {
            let mut amp = vec![0.0; n * n];
            for i in 0..n {
                amp[i * n + i] = 1.0;
            }
            let st = BipartiteState::pure(n, n, PureState::from_real(&amp).unwrap()).unwrap();
            assert!((e_pure(&st, &Builtin::Shannon).unwrap() - (n as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn entanglement_objective_matches_schmidt() {
        let mut rng = crate::random::stream_rng(9, 0);
        for (da, db) in [(2, 2), (2, 3), (3, 2), (3, 3), (4, 4)] {
            let psi = crate::random::haar_pure(da * db, &mut rng);
            let st = BipartiteState::pure(da, db, psi.clone()).unwrap();
            for f in Builtin::ALL {
                let obj = EntanglementObjective::new(&f, da, db);
                let direct = e_pure(&st, &f).unwrap();
                assert!(
                    (obj.eval(psi.amplitudes()) - direct).abs() < 1e-9,
                    "{da}x{db} {f}"
                );
                let scaled: Vec<C64> = psi.amplitudes().iter().map(|z| z * 0.5).collect();
                assert!((obj.eval_weighted(&scaled) - 0.25 * direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn maximally_mixed_qubit_convex_roof_is_zero() {
        let rho = DensityMatrix::maximally_mixed(2);
        let r = coherence(&rho, &Builtin::L1, Extension::ConvexRoof, budget(), None).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.bracket, Some(0.0));
    }

    #[test]
    fn maximally_mixed_qutrit_assistance_saturates() {
        let rho = DensityMatrix::maximally_mixed(3);
        let r = coherence(
            &rho,
            &Builtin::Shannon,
            Extension::Assistance,
            budget(),
            None,
        )
        .unwrap();
        assert!(r.value >= 3f64.log2() - 1e-6, "{}", r.value);
        assert!(r.tight());
    }

    #[test]
    fn pure_bell_state_either_extension() {
        let st = BipartiteState::pure(2, 2, bell(1.0, false)).unwrap();
        for ext in [
            Extension::PureOnly,
            Extension::ConvexRoof,
            Extension::Assistance,
        ] {
            let r = entanglement(&st, &Builtin::Concurrence, ext, budget(), None).unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "{ext:?}: {}", r.value);
        }
    }

    #[test]
    fn bell_mixture_has_full_assistance() {
        let rho = DensityMatrix::mixture(&[
            (0.3, &DensityMatrix::from_pure(&bell(1.0, false))),
            (0.7, &DensityMatrix::from_pure(&bell(1.0, true))),
        ])
        .unwrap();
        let st = BipartiteState::mixed(2, 2, rho).unwrap();
        let r = entanglement(
            &st,
            &Builtin::Concurrence,
            Extension::Assistance,
            budget(),
            None,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        assert!(r.value <= r.bracket.unwrap() + 1e-8);
    }

    #[test]
    fn maximally_mixed_two_qubits_assistance() {
        let st = BipartiteState::mixed(2, 2, DensityMatrix::maximally_mixed(4)).unwrap();
        let r = entanglement(
            &st,
            &Builtin::Concurrence,
            Extension::Assistance,
            budget(),
            None,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn pure_extension_rejects_mixed_input() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            coherence(&rho, &Builtin::L1, Extension::PureOnly, budget(), None),
            Err(MeasureError::State(StateError::NotPure { rank: 2 }))
        ));
    }

    #[test]
    fn schmidt_correlated_round_trip() {
        let rho = DensityMatrix::maximally_mixed(2);
        let mc = embed_mc(&rho);
        let big = mc.to_bipartite().density();
        assert!((big.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((big.matrix()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert_eq!(compress_mc(&mc), rho);

        let plus = DensityMatrix::from_pure(&PureState::from_real(&[1.0, 1.0]).unwrap());
        let phi = embed_mc(&plus).to_bipartite().density();
        let want = DensityMatrix::from_pure(&bell(1.0, false));
        assert!(linalg::max_abs_diff(phi.matrix(), want.matrix()) < 1e-15);

        let st = BipartiteState::mixed(2, 2, want).unwrap();
        let back = SchmidtCorrelated::detect(&st, 1e-10).unwrap();
        assert!(linalg::max_abs_diff(compress_mc(&back).matrix(), plus.matrix()) < 1e-15);

        let odd = BipartiteState::mixed(2, 2, DensityMatrix::from_pure(&bell(1.0, true))).unwrap();
        assert!(SchmidtCorrelated::detect(&odd, 1e-10).is_none());
    }

    #[test]
    fn schmidt_correlated_qutrit_coefficients_pass_through() {
        let mut rng = crate::random::stream_rng(4, 4);
        let rho = crate::random::ginibre(3, &mut rng);
        let mc = embed_mc(&rho);
        assert_eq!(compress_mc(&mc).matrix(), rho.matrix());
        let back = SchmidtCorrelated::detect(&mc.to_bipartite(), 1e-12).unwrap();
        assert!(linalg::max_abs_diff(back.coefficients().matrix(), rho.matrix()) < 1e-15);
    }
}
