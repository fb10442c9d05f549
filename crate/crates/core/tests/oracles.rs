//! Reference values from independent computations, frozen as constants.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use roofkit::linalg::{self, ComplexMatrix};
use roofkit::measures::{self, CoherenceObjective, Extension};
use roofkit::random::{self, FULL_RANK_FLOOR};
use roofkit::roofs::{oracle_roof, Budget, Direction};
use roofkit::simplexfn::Builtin;
use roofkit::states::{BipartiteState, DensityMatrix, PureState};

// From a separate NumPy 721x721 grid over two-member decompositions.
const L1_MAX_ZERO_PLUS: f64 = 0.866_025_403_784_438_8;
const L1_MIN_ZERO_PLUS: f64 = 0.5;
const CONCURRENCE_MAX_PLUS_MINUS: f64 = 1.0;
const CONCURRENCE_MIN_PLUS_MINUS: f64 = 0.4;

fn plus() -> PureState {
    PureState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
}

fn minus() -> PureState {
    PureState::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap()
}

fn zero_plus() -> DensityMatrix {
    let a = DensityMatrix::from_pure(&PureState::basis(2, 0));
    let b = DensityMatrix::from_pure(&plus());
    DensityMatrix::mixture(&[(0.5, &a), (0.5, &b)]).unwrap()
}

fn plus_minus() -> DensityMatrix {
    let a = DensityMatrix::from_pure(&plus());
    let b = DensityMatrix::from_pure(&minus());
    DensityMatrix::mixture(&[(0.7, &a), (0.3, &b)]).unwrap()
}

fn check(rho: &DensityMatrix, f: Builtin, ext: Extension, want: f64) {
    let r = measures::coherence(rho, &f, ext, Budget::default(), None).unwrap();
    assert!(
        (r.value - want).abs() <= 1e-6,
        "{f} {ext:?}: {} vs {want}",
        r.value
    );
    let direction = match ext {
        Extension::Assistance => Direction::Max,
        _ => Direction::Min,
    };
    let grid = oracle_roof(rho, &CoherenceObjective::new(&f, 2), direction, 721, 0);
    assert!((grid - want).abs() <= 1e-6, "grid {grid} vs {want}");
}

#[test]
fn frozen_zero_plus_l1() {
    check(
        &zero_plus(),
        Builtin::L1,
        Extension::Assistance,
        L1_MAX_ZERO_PLUS,
    );
    check(
        &zero_plus(),
        Builtin::L1,
        Extension::ConvexRoof,
        L1_MIN_ZERO_PLUS,
    );
}

#[test]
fn frozen_plus_minus_concurrence() {
    let rho = plus_minus();
    check(
        &rho,
        Builtin::Concurrence,
        Extension::Assistance,
        CONCURRENCE_MAX_PLUS_MINUS,
    );
    check(
        &rho,
        Builtin::Concurrence,
        Extension::ConvexRoof,
        CONCURRENCE_MIN_PLUS_MINUS,
    );
    let r = measures::coherence(
        &rho,
        &Builtin::Concurrence,
        Extension::Assistance,
        Budget::default(),
        None,
    )
    .unwrap();
    assert!(r.value <= r.bracket.unwrap() + 1e-8);
}

#[test]
fn maximally_mixed_qubit_grid_values() {
    let rho = DensityMatrix::maximally_mixed(2);
    let shannon = CoherenceObjective::new(&Builtin::Shannon, 2);
    assert!((oracle_roof(&rho, &shannon, Direction::Max, 721, 0) - 1.0).abs() <= 1e-6);
    assert!(oracle_roof(&rho, &shannon, Direction::Min, 721, 0).abs() <= 1e-9);
    let r = measures::coherence(
        &rho,
        &Builtin::L1,
        Extension::Assistance,
        Budget::default(),
        None,
    )
    .unwrap();
    assert!((r.value - 1.0).abs() <= 1e-9 && r.tight());
}

/// Eigenvalues of `√(√ρ ρ̃ √ρ)` in descending order, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
fn wootters_spectrum(rho: &DensityMatrix) -> Vec<f64> {
    let sy = ComplexMatrix::from_row_slice(2, 2, &[C64::ZERO, -C64::i(), C64::i(), C64::ZERO]);
    let yy = sy.kronecker(&sy);
    let m = rho.matrix();
    let flipped = &yy * m.conjugate() * &yy;
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let root = &vecs
        * ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            vals.iter().map(|v| C64::from(v.max(0.0).sqrt())),
        ))
        * vecs.adjoint();
    let inner = &root * flipped * &root;
    let inner = (&inner + inner.adjoint()).scale(0.5);
    let (mut s, _) = linalg::hermitian_eigen(&inner);
    s.iter_mut().for_each(|x| *x = x.max(0.0).sqrt());
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[test]
fn two_qubit_roofs_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let f = Builtin::Concurrence;
    for _ in 0..4 {
        let rho = random::ginibre_full_rank(4, FULL_RANK_FLOOR, &mut rng);
        let s = wootters_spectrum(&rho);
        let wootters = (s[0] - s[1] - s[2] - s[3]).max(0.0);
        let assistance: f64 = s.iter().sum();
        let st = BipartiteState::mixed(2, 2, rho).unwrap();
        let c = measures::entanglement(&st, &f, Extension::ConvexRoof, Budget::default(), None)
            .unwrap();
        let a = measures::entanglement(&st, &f, Extension::Assistance, Budget::default(), None)
            .unwrap();
        assert!(
            (c.value - wootters).abs() <= 1e-4,
            "convex roof {} vs Wootters {wootters}",
            c.value
        );
        assert!(
            (a.value - assistance).abs() <= 1e-4,
            "assistance {} vs tr R {assistance}",
            a.value
        );
    }
}
