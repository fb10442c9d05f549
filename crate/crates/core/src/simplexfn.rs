//! Symmetric concave functions on the probability simplex that vanish at the
//! vertices. Each one induces a pure-state coherence measure `f(μ(ψ))` and an
//! entanglement measure `f(λ(ψ))`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::states::ProbabilityVector;

/// Tolerance for the symmetry, concavity and vertex checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub trait SimplexFunction: Send + Sync {
    fn name(&self) -> &str;

    /// Value at a point of the simplex. Hot path; `p` is not re-validated.
    fn eval(&self, p: &[f64]) -> f64;

    /// Value at the uniform vector, which is the maximum over the simplex.
    fn max_value(&self, dim: usize) -> f64 {
        self.eval(&vec![1.0 / dim as f64; dim])
    }
}

/// The built-in members, by CLI name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Shannon,
    L1,
    Concurrence,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Shannon, Builtin::L1, Builtin::Concurrence];
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builtin::Shannon => "shannon",
            Builtin::L1 => "l1",
            Builtin::Concurrence => "concurrence",
        })
    }
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shannon" => Ok(Builtin::Shannon),
            "l1" => Ok(Builtin::L1),
            "concurrence" => Ok(Builtin::Concurrence),
            other => Err(format!(
                "unknown function {other:?} (expected shannon, l1 or concurrence)"
            )),
        }
    }
}

impl SimplexFunction for Builtin {
    fn name(&self) -> &str {
        match self {
            Builtin::Shannon => "shannon",
            Builtin::L1 => "l1",
            Builtin::Concurrence => "concurrence",
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Builtin::Shannon => shannon(p),
            Builtin::L1 => l1(p),
            Builtin::Concurrence => concurrence(p),
        }
    }

    fn max_value(&self, dim: usize) -> f64 {
        let n = dim as f64;
        match self {
            Builtin::Shannon => n.log2(),
            Builtin::L1 => n - 1.0,
            Builtin::Concurrence => (2.0 * (1.0 - 1.0 / n)).sqrt(),
        }
    }
}

// Base-2 entropy with 0 log 0 = 0.
fn shannon(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.max(0.0)
}

fn l1(p: &[f64]) -> f64 {
    let s: f64 = p.iter().map(|&x| x.max(0.0).sqrt()).sum();
    (s * s - 1.0).max(0.0)
}

fn concurrence(p: &[f64]) -> f64 {
    let sq: f64 = p.iter().map(|x| x * x).sum();
    (2.0 * (1.0 - sq)).max(0.0).sqrt()
}

/// Shannon entropy in bits.
pub fn f_shannon(p: &ProbabilityVector) -> f64 {
    shannon(p.as_slice())
}

/// `Σ_{i≠j} √(p_i p_j)`.
pub fn f_l1(p: &ProbabilityVector) -> f64 {
    l1(p.as_slice())
}

/// `√(2(1 - Σ p_i²))`.
pub fn f_concurrence(p: &ProbabilityVector) -> f64 {
    concurrence(p.as_slice())
}

/// Outcome of [`check_membership`].
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub dim: usize,
    pub trials: usize,
    pub symmetry_residual: f64,
    pub concavity_violation: f64,
    pub vertex_value: f64,
    pub max_value: f64,
    pub passed: bool,
}

fn random_simplex_point<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    // occasionally land on a face of the simplex
    if dim > 1 && rng.random_bool(0.2) {
        let k = rng.random_range(0..dim);
        x[k] = 0.0;
        if x.iter().all(|&v| v == 0.0) {
            x[(k + 1) % dim] = 1.0;
        }
    }
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}

/// Randomized spot check of symmetry, concavity and `f(e_1) = 0`.
/// Functions that vanish identically (max value 0) fail.
pub fn check_membership(
    f: &dyn SimplexFunction,
    dim: usize,
    trials: usize,
    seed: u64,
) -> MembershipReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symmetry_residual: f64 = 0.0;
    let mut concavity_violation: f64 = 0.0;

    // deterministic probes: midpoints of vertex pairs
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut ei = vec![0.0; dim];
            ei[i] = 1.0;
            let mut ej = vec![0.0; dim];
            ej[j] = 1.0;
            let mid: Vec<f64> = ei.iter().zip(&ej).map(|(a, b)| 0.5 * (a + b)).collect();
            let gap = 0.5 * (f.eval(&ei) + f.eval(&ej)) - f.eval(&mid);
            concavity_violation = concavity_violation.max(gap);
        }
    }

    for _ in 0..trials.max(1) {
        let p = random_simplex_point(dim, &mut rng);
        let q = random_simplex_point(dim, &mut rng);
        let mut perm = p.clone();
        perm.shuffle(&mut rng);
        symmetry_residual = symmetry_residual.max((f.eval(&p) - f.eval(&perm)).abs());

        let t: f64 = rng.random();
        let mix: Vec<f64> = p
            .iter()
            .zip(&q)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect();
        let gap = t * f.eval(&p) + (1.0 - t) * f.eval(&q) - f.eval(&mix);
        concavity_violation = concavity_violation.max(gap);
    }

    let mut vertex = vec![0.0; dim];
    vertex[0] = 1.0;
    let vertex_value = f.eval(&vertex);
    let max_value = f.max_value(dim);
    let passed = symmetry_residual <= MEMBERSHIP_TOL
        && concavity_violation <= MEMBERSHIP_TOL
        && vertex_value.abs() <= MEMBERSHIP_TOL
        && max_value > MEMBERSHIP_TOL;
    MembershipReport {
        dim,
        trials,
        symmetry_residual,
        concavity_violation,
        vertex_value,
        max_value,
        passed,
    }
}

/// A function that has passed [`check_membership`] (built-ins always do).
#[derive(Clone)]
pub struct CheckedFunction {
    inner: Arc<dyn SimplexFunction>,
}

impl CheckedFunction {
    pub fn builtin(b: Builtin) -> Self {
        CheckedFunction { inner: Arc::new(b) }
    }

    /// Admit a user-supplied function after a randomized membership check.
    pub fn custom(
        f: Arc<dyn SimplexFunction>,
        dim: usize,
        trials: usize,
        seed: u64,
    ) -> Result<Self, MembershipReport> {
        let report = check_membership(f.as_ref(), dim, trials, seed);
        if report.passed {
            Ok(CheckedFunction { inner: f })
        } else {
            Err(report)
        }
    }
}

impl fmt::Debug for CheckedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CheckedFunction({})", self.inner.name())
    }
}

impl SimplexFunction for CheckedFunction {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.inner.eval(p)
    }

    fn max_value(&self, dim: usize) -> f64 {
        self.inner.max_value(dim)
    }
}

impl From<Builtin> for CheckedFunction {
    fn from(b: Builtin) -> Self {
        CheckedFunction::builtin(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct SumOfSquares;
    impl SimplexFunction for SumOfSquares {
        fn name(&self) -> &str {
            "sumsq"
        }
        fn eval(&self, p: &[f64]) -> f64 {
            p.iter().map(|x| x * x).sum()
        }
    }

    struct Zero;
    impl SimplexFunction for Zero {
        fn name(&self) -> &str {
            "zero"
        }
        fn eval(&self, _: &[f64]) -> f64 {
            0.0
        }
    }

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn shannon_values() {
        assert_eq!(f_shannon(&pv(&[1.0, 0.0])), 0.0);
        assert!((f_shannon(&pv(&[0.5, 0.5])) - 1.0).abs() < 1e-15);
        let third = 1.0 / 3.0;
        assert!((f_shannon(&pv(&[third, third, third])) - 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn l1_values() {
        assert_eq!(f_l1(&pv(&[1.0, 0.0, 0.0])), 0.0);
        for n in 2..7 {
            let u = ProbabilityVector::uniform(n);
            assert!((f_l1(&u) - (n as f64 - 1.0)).abs() < 1e-12);
        }
        assert!((f_l1(&pv(&[0.9, 0.1])) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn concurrence_values() {
        assert_eq!(f_concurrence(&pv(&[1.0, 0.0])), 0.0);
        assert!((f_concurrence(&pv(&[0.5, 0.5])) - 1.0).abs() < 1e-15);
        let third = 1.0 / 3.0;
        assert!((f_concurrence(&pv(&[third, third, third])) - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn builtins_pass_membership() {
        for b in Builtin::ALL {
            for dim in [2, 3, 4] {
                let r = check_membership(&b, dim, 1000, 11);
                assert!(r.passed, "{b} dim {dim}: {r:?}");
            }
        }
    }

    #[test]
    fn convex_function_fails() {
        let r = check_membership(&SumOfSquares, 3, 100, 1);
        assert!(!r.passed);
        assert!(r.concavity_violation >= 0.25 - 1e-12);
    }

    #[test]
    fn zero_function_is_rejected() {
        let r = check_membership(&Zero, 3, 100, 1);
        assert!(!r.passed);
        assert!(CheckedFunction::custom(Arc::new(Zero), 3, 100, 1).is_err());
    }

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
        }
        assert!("renyi".parse::<Builtin>().is_err());
    }

    #[test]
    fn max_value_is_attained_at_uniform() {
        for b in Builtin::ALL {
            for n in 1..=8 {
                let u = vec![1.0 / n as f64; n];
                assert!((b.eval(&u) - b.max_value(n)).abs() < 1e-12, "{b} {n}");
            }
        }
    }
}
