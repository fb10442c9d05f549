//! Extremization of ensemble averages over all pure-state decompositions.
//!
//! A decomposition of `ρ = Σ_j λ_j |e_j⟩⟨e_j|` into `m` members is an `m x r`
//! isometry `V`: member `k` is `w_k = Σ_j V_kj √λ_j |e_j⟩` with weight
//! `|w_k|²`. Left-multiplying `V` by a unitary keeps it an isometry, and
//! two-row Givens rotations generate every such unitary, so the search works
//! directly on the rows `w_k` and touches only two of them per move.
//!
//! Objectives that can be smoothed are first driven through a sequence of
//! smoothed problems with L-BFGS steps `W ↦ C(Ω) W` (`C` the Cayley map),
//! which removes most of the slow creep of pair sweeps near kinks.
//!
//! `Min` gives convex roofs, `Max` gives assistance (concave-roof) values.
//! Local search only certifies one side: a `Max` value is a lower bound on
//! the true maximum and a `Min` value an upper bound on the true minimum.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, ZERO};
use crate::random;
use crate::states::{member_from_unnormalized, DensityMatrix, Ensemble, StateError, RANK_TOL};

/// Sweep improvement below which a search counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-9;
/// Largest default cardinality.
pub const MAX_DEFAULT_CARDINALITY: usize = 16;

const GOLDEN: f64 = 0.618_033_988_749_894_8;
// θ grid over (-π/2, π/2) in steps of π/8, excluding θ = 0
const THETA_STEPS: usize = 8;
const PHASES: [f64; 4] = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
const LINE_SEARCH_ITERS: usize = 32;
// Smoothed stages, solved by quasi-Newton steps before the exact objective
// takes over. Optimal members tend to sit on faces of the simplex where the
// exact objective has kinks, and pair sweeps alone creep there.
const SMOOTHING_SCHEDULE: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const MIN_SWEEPS_FOR_SMOOTHING: usize = 24;

/// A pure-state quantity to be averaged over ensembles.
pub trait Objective: Sync {
    /// Hilbert-space dimension of the states it accepts.
    fn dim(&self) -> usize;

    /// Value on a unit vector.
    fn eval(&self, amp: &[C64]) -> f64;

    /// `|w|² · eval(w / |w|)` for an unnormalized vector; zero for `w = 0`.
    fn eval_weighted(&self, w: &[C64]) -> f64 {
        let norm2 = linalg::norm_sqr(w);
        if norm2 == 0.0 {
            return 0.0;
        }
        let s = norm2.sqrt();
        let unit: Vec<C64> = w.iter().map(|z| z / s).collect();
        norm2 * self.eval(&unit)
    }

    /// Whether [`Objective::eval_weighted_smoothed`] differs from
    /// [`Objective::eval_weighted`].
    fn smoothable(&self) -> bool {
        false
    }

    /// A smoothed variant that tends to `eval_weighted` as `eps → 0`. When
    /// the objective is [`Objective::smoothable`], each restart first follows
    /// a decreasing `eps` schedule with quasi-Newton steps, and only then
    /// runs pair sweeps on the exact objective.
    fn eval_weighted_smoothed(&self, w: &[C64], eps: f64) -> f64 {
        let _ = eps;
        self.eval_weighted(w)
    }
}

/// Adapter for closures over unit vectors.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[C64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<F: Fn(&[C64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, amp: &[C64]) -> f64 {
        (self.f)(amp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Min => -1.0,
            Direction::Max => 1.0,
        }
    }

    /// True if `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Min => a < b,
            Direction::Max => a > b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            restarts: 32,
            sweeps: 200,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn with_seed(seed: u64) -> Self {
        Budget {
            seed,
            ..Budget::default()
        }
    }
}

pub struct RoofProblem<'a> {
    pub rho: &'a DensityMatrix,
    pub objective: &'a dyn Objective,
    pub direction: Direction,
    /// Number of ensemble members; `None` means `min(r², 16)` (at least `r`).
    pub cardinality: Option<usize>,
    pub budget: Budget,
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    pub value: f64,
    pub witness: Ensemble,
    /// Analytic bound on the other side of the true value, when known.
    pub bracket: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Values within this of their bracket are reported as tight.
pub const TIGHT_TOL: f64 = 1e-6;

impl RoofResult {
    pub fn tight(&self) -> bool {
        self.bracket
            .is_some_and(|b| (b - self.value).abs() <= TIGHT_TOL)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoofError {
    #[error("search budget must have at least one restart and one sweep")]
    BudgetZero,
    #[error("objective returned a non-finite value")]
    ObjectiveNaN,
    #[error("cardinality {cardinality} is below the state rank {rank}")]
    CardinalityTooSmall { cardinality: usize, rank: usize },
    #[error("objective dimension {objective} does not match state dimension {state}")]
    DimensionMismatch { objective: usize, state: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

pub fn default_cardinality(rank: usize) -> usize {
    (rank * rank).min(MAX_DEFAULT_CARDINALITY).max(rank)
}

/// Nonzero eigenpairs of `rho` folded into the columns `√λ_j |e_j⟩`.
fn weighted_eigenvectors(rho: &DensityMatrix) -> ComplexMatrix {
    let (values, vectors) = rho.eigen();
    let rank = values.iter().filter(|&&v| v > RANK_TOL).count();
    let n = rho.dim();
    ComplexMatrix::from_fn(n, rank, |i, j| vectors[(i, j)] * values[j].sqrt())
}

struct Search<'a> {
    objective: &'a dyn Objective,
    sign: f64,
    n: usize,
    m: usize,
    rows: Vec<C64>,
    vals: Vec<f64>,
    eps: f64,
    scratch_k: Vec<C64>,
    scratch_l: Vec<C64>,
}

impl<'a> Search<'a> {
    fn new(
        objective: &'a dyn Objective,
        sign: f64,
        basis: &ComplexMatrix,
        v: &ComplexMatrix,
    ) -> Self {
        let n = basis.nrows();
        let m = v.nrows();
        let w = v * basis.transpose();
        let mut rows = Vec::with_capacity(m * n);
        for k in 0..m {
            rows.extend(w.row(k).iter().copied());
        }
        let vals = (0..m)
            .map(|k| objective.eval_weighted(&rows[k * n..(k + 1) * n]))
            .collect();
        Search {
            objective,
            sign,
            n,
            m,
            rows,
            vals,
            eps: 0.0,
            scratch_k: vec![ZERO; n],
            scratch_l: vec![ZERO; n],
        }
    }

    fn total(&self) -> f64 {
        self.vals.iter().sum()
    }

    fn h(&self, w: &[C64]) -> f64 {
        if self.eps == 0.0 {
            self.objective.eval_weighted(w)
        } else {
            self.objective.eval_weighted_smoothed(w, self.eps)
        }
    }

    fn set_eps(&mut self, eps: f64) {
        self.eps = eps;
        let n = self.n;
        self.vals = (0..self.m)
            .map(|k| self.h(&self.rows[k * n..(k + 1) * n]))
            .collect();
    }

    /// Signed pair value after rotating rows `k`, `l` by `(θ, φ)`.
    fn trial(&mut self, k: usize, l: usize, theta: f64, phi: f64) -> f64 {
        let n = self.n;
        let (c, s) = (theta.cos(), theta.sin());
        let e = C64::from_polar(1.0, phi);
        let se = e * s;
        let sec = se.conj();
        for i in 0..n {
            let a = self.rows[k * n + i];
            let b = self.rows[l * n + i];
            self.scratch_k[i] = a * c - sec * b;
            self.scratch_l[i] = se * a + b * c;
        }
        let v = self.h(&self.scratch_k) + self.h(&self.scratch_l);
        self.sign * v
    }

    fn golden<F: FnMut(&mut Self, f64) -> f64>(
        &mut self,
        lo: f64,
        hi: f64,
        mut g: F,
    ) -> (f64, f64) {
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - GOLDEN * (b - a);
        let mut x2 = a + GOLDEN * (b - a);
        let mut f1 = g(self, x1);
        let mut f2 = g(self, x2);
        for _ in 0..LINE_SEARCH_ITERS {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - GOLDEN * (b - a);
                f1 = g(self, x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + GOLDEN * (b - a);
                f2 = g(self, x2);
            }
        }
        if f1 >= f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    }

    /// Optimize the rotation of rows `k`, `l`; returns the signed gain.
    fn refine_pair(&mut self, k: usize, l: usize) -> Result<f64, RoofError> {
        let base = self.sign * (self.vals[k] + self.vals[l]);
        let mut best = (0.0, 0.0, base);
        // nearest-to-identity probe, used when no grid point improves
        let mut near = (0.0, 0.0, f64::NEG_INFINITY);
        let step = PI / THETA_STEPS as f64;
        for &phi in &PHASES {
            for j in 1..THETA_STEPS {
                let theta = -FRAC_PI_2 + j as f64 * step;
                if j * 2 == THETA_STEPS {
                    continue;
                }
                let v = self.trial(k, l, theta, phi);
                if !v.is_finite() {
                    return Err(RoofError::ObjectiveNaN);
                }
                if v > best.2 {
                    best = (theta, phi, v);
                }
                if (j * 2 == THETA_STEPS - 2 || j * 2 == THETA_STEPS + 2) && v > near.2 {
                    near = (theta, phi, v);
                }
            }
        }
        let (theta0, phi0) = if best.2 > base {
            (best.0, best.1)
        } else {
            (0.0, near.1)
        };
        let (t1, _) = self.golden(theta0 - step, theta0 + step, |s, t| s.trial(k, l, t, phi0));
        let (p1, _) = self.golden(phi0 - FRAC_PI_8, phi0 + FRAC_PI_8, |s, p| {
            s.trial(k, l, t1, p)
        });
        let (t2, v2) = self.golden(t1 - step / 8.0, t1 + step / 8.0, |s, t| {
            s.trial(k, l, t, p1)
        });
        let mut pick = (t2, p1, v2);
        if best.2 > pick.2 {
            pick = best;
        }
        if !pick.2.is_finite() {
            return Err(RoofError::ObjectiveNaN);
        }
        if pick.2 > base {
            self.trial(k, l, pick.0, pick.1);
            let n = self.n;
            self.rows[k * n..(k + 1) * n].copy_from_slice(&self.scratch_k);
            self.rows[l * n..(l + 1) * n].copy_from_slice(&self.scratch_l);
            self.vals[k] = self.h(&self.scratch_k);
            self.vals[l] = self.h(&self.scratch_l);
            Ok(pick.2 - base)
        } else {
            Ok(0.0)
        }
    }

    /// Returns (sweeps run, converged).
    fn run(&mut self, sweeps: usize) -> Result<(usize, bool), RoofError> {
        if !self.total().is_finite() {
            return Err(RoofError::ObjectiveNaN);
        }
        if self.m < 2 {
            return Ok((0, true));
        }
        if self.objective.smoothable() && sweeps >= MIN_SWEEPS_FOR_SMOOTHING {
            for &eps in &SMOOTHING_SCHEDULE {
                self.set_eps(eps);
                self.quasi_newton(sweeps)?;
            }
            self.set_eps(0.0);
        }
        self.sweep_until_converged(sweeps)
    }

    fn sweep_until_converged(&mut self, sweeps: usize) -> Result<(usize, bool), RoofError> {
        for sweep in 1..=sweeps {
            let before = self.sign * self.total();
            for k in 0..self.m {
                for l in (k + 1)..self.m {
                    self.refine_pair(k, l)?;
                }
            }
            let gain = self.sign * self.total() - before;
            if gain < CONVERGENCE_TOL {
                return Ok((sweep, true));
            }
        }
        Ok((sweeps, false))
    }

    /// Signed objective and its gradient in the Lie algebra of `U(m)` at the
    /// current rows: `d/dt F(C(tΩ) W) = Re tr(X Ω)` for Hermitian `Ω`.
    fn signed_gradient(&self, rows: &[C64]) -> (f64, Vec<C64>) {
        let (m, n) = (self.m, self.n);
        let mut value = 0.0;
        let mut g = vec![ZERO; m * n];
        let mut probe = vec![ZERO; n];
        for k in 0..m {
            let w = &rows[k * n..(k + 1) * n];
            value += self.h(w);
            let step = 1e-7 * linalg::norm_sqr(w).sqrt();
            if step == 0.0 {
                continue;
            }
            probe.copy_from_slice(w);
            for i in 0..n {
                let orig = probe[i];
                let mut diff = [0.0; 2];
                for (slot, dir) in [C64::new(step, 0.0), C64::new(0.0, step)]
                    .into_iter()
                    .enumerate()
                {
                    probe[i] = orig + dir;
                    let up = self.h(&probe);
                    probe[i] = orig - dir;
                    let down = self.h(&probe);
                    diff[slot] = (up - down) / (2.0 * step);
                }
                probe[i] = orig;
                g[k * n + i] = C64::new(diff[0], diff[1]);
            }
        }
        // B = W G†, X = (i/2)(B - B†)
        let wm = ComplexMatrix::from_row_slice(m, n, rows);
        let gm = ComplexMatrix::from_row_slice(m, n, &g);
        let b = &wm * gm.adjoint();
        let x = (&b - b.adjoint()) * C64::new(0.0, 0.5 * self.sign);
        (self.sign * value, x.transpose().as_slice().to_vec())
    }

    fn rotated(&self, omega: &[C64], t: f64) -> Option<Vec<C64>> {
        let m = self.m;
        let om = ComplexMatrix::from_row_slice(m, m, omega) * C64::new(0.0, 0.5 * t);
        let id = ComplexMatrix::identity(m, m);
        let u = linalg::solve(&(&id - &om), &(&id + &om))?;
        let w = u * ComplexMatrix::from_row_slice(m, self.n, &self.rows);
        Some(w.transpose().as_slice().to_vec())
    }

    /// L-BFGS ascent of the signed (smoothed) objective over `W ↦ C(Ω) W`.
    fn quasi_newton(&mut self, max_iter: usize) -> Result<usize, RoofError> {
        const MEMORY: usize = 8;
        let dot =
            |a: &[C64], b: &[C64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum() };
        let (mut value, mut grad) = self.signed_gradient(&self.rows);
        let mut hist: std::collections::VecDeque<(Vec<C64>, Vec<C64>, f64)> = Default::default();
        let mut iters = 0;
        while iters < max_iter {
            iters += 1;
            let gnorm = dot(&grad, &grad).sqrt();
            if !gnorm.is_finite() {
                return Err(RoofError::ObjectiveNaN);
            }
            if gnorm < 1e-12 {
                break;
            }
            // two-loop recursion on the ascent direction
            let mut q = grad.clone();
            let mut alphas = Vec::with_capacity(hist.len());
            for (s, y, rho) in hist.iter().rev() {
                let a = rho * dot(s, &q);
                for (qi, yi) in q.iter_mut().zip(y) {
                    *qi -= yi * a;
                }
                alphas.push(a);
            }
            let scale = match hist.back() {
                Some((s, y, _)) => dot(s, y) / dot(y, y),
                None => 0.1 / gnorm,
            };
            for qi in q.iter_mut() {
                *qi *= scale;
            }
            for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
                let bcoef = rho * dot(y, &q);
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi += si * (a - bcoef);
                }
            }
            let mut dir = q;
            // q is a descent direction for -F; flip if curvature info misleads
            if dot(&dir, &grad) <= 0.0 {
                dir = grad.iter().map(|g| g * (0.1 / gnorm)).collect();
                hist.clear();
            }
            let slope = dot(&dir, &grad);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                if let Some(cand) = self.rotated(&dir, t) {
                    let v: f64 = self.sign
                        * (0..self.m)
                            .map(|k| self.h(&cand[k * self.n..(k + 1) * self.n]))
                            .sum::<f64>();
                    if v.is_finite() && v >= value + 1e-4 * t * slope {
                        accepted = Some(cand);
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some(cand) = accepted else { break };
            let (new_value, new_grad) = self.signed_gradient(&cand);
            let gain = new_value - value;
            self.rows = cand;
            let s: Vec<C64> = dir.iter().map(|d| d * t).collect();
            // the ascent is on F; store curvature pairs for -F
            let y: Vec<C64> = grad.iter().zip(&new_grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-16 {
                if hist.len() == MEMORY {
                    hist.pop_front();
                }
                hist.push_back((s, y, 1.0 / sy));
            }
            value = new_value;
            grad = new_grad;
            if gain < 1e-14 * value.abs().max(1.0) {
                break;
            }
        }
        let n = self.n;
        self.vals = (0..self.m)
            .map(|k| self.h(&self.rows[k * n..(k + 1) * n]))
            .collect();
        Ok(iters)
    }

    fn members(&self) -> Vec<crate::states::Member> {
        (0..self.m)
            .filter_map(|k| {
                member_from_unnormalized(self.rows[k * self.n..(k + 1) * self.n].to_vec())
            })
            .collect()
    }
}

struct RestartOutcome {
    value: f64,
    members: Vec<crate::states::Member>,
    sweeps: usize,
    converged: bool,
}

/// Multi-restart Givens-sweep search. Restart 0 starts from the eigenensemble
/// (padded with zero rows); the others start from Haar-random isometries
/// drawn from stream `i` of the seed.
pub fn solve_roof(prob: &RoofProblem<'_>) -> Result<RoofResult, RoofError> {
    let budget = prob.budget;
    if budget.restarts == 0 || budget.sweeps == 0 {
        return Err(RoofError::BudgetZero);
    }
    let rho = prob.rho;
    if prob.objective.dim() != rho.dim() {
        return Err(RoofError::DimensionMismatch {
            objective: prob.objective.dim(),
            state: rho.dim(),
        });
    }
    let basis = weighted_eigenvectors(rho);
    let rank = basis.ncols();
    let m = prob
        .cardinality
        .unwrap_or_else(|| default_cardinality(rank));
    if m < rank {
        return Err(RoofError::CardinalityTooSmall {
            cardinality: m,
            rank,
        });
    }
    let sign = prob.direction.sign();

    let outcomes: Vec<Result<RestartOutcome, RoofError>> = (0..budget.restarts)
        .into_par_iter()
        .map(|i| {
            let v = if i == 0 {
                ComplexMatrix::identity(m, rank)
            } else {
                let mut rng = random::stream_rng(budget.seed, i as u64);
                random::haar_isometry(m, rank, &mut rng)
            };
            let mut search = Search::new(prob.objective, sign, &basis, &v);
            let (sweeps, converged) = search.run(budget.sweeps)?;
            let members = search.members();
            // rank restarts by the value that will be reported, not the
            // running total, so more restarts can never look worse
            let value: f64 = members
                .iter()
                .map(|m| m.weight * prob.objective.eval(m.state.amplitudes()))
                .sum();
            if !value.is_finite() {
                return Err(RoofError::ObjectiveNaN);
            }
            Ok(RestartOutcome {
                value,
                members,
                sweeps,
                converged,
            })
        })
        .collect();

    let mut best: Option<RestartOutcome> = None;
    for outcome in outcomes {
        let outcome = outcome?;
        let replace = match &best {
            None => true,
            Some(b) => prob.direction.better(outcome.value, b.value),
        };
        if replace {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart");
    let witness = Ensemble::new(rho.clone(), best.members)?;
    let value = witness_value(&witness, prob.objective)?;
    Ok(RoofResult {
        value,
        witness,
        bracket: None,
        converged: best.converged,
        iterations: best.sweeps,
    })
}

/// `Σ_k p_k g(ψ_k)` over an ensemble.
pub fn witness_value(witness: &Ensemble, objective: &dyn Objective) -> Result<f64, RoofError> {
    let value: f64 = witness
        .members()
        .iter()
        .map(|m| m.weight * objective.eval(m.state.amplitudes()))
        .sum();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(RoofError::ObjectiveNaN)
    }
}

/// Brute-force reference for small instances.
///
/// Rank 2: exhaustive `samples x samples` grid over the two-member
/// decompositions `U(θ, φ)`, θ in `[0, π/2]`, φ in `[0, 2π]`. Rank 3 and up:
/// best of `samples` Haar-random isometries with `r²` rows.
pub fn oracle_roof(
    rho: &DensityMatrix,
    objective: &dyn Objective,
    direction: Direction,
    samples: usize,
    seed: u64,
) -> f64 {
    let (values, vectors) = rho.eigen();
    let rank = values.iter().filter(|&&v| v > RANK_TOL).count();
    let n = rho.dim();
    let column =
        |j: usize| -> Vec<C64> { (0..n).map(|i| vectors[(i, j)] * values[j].sqrt()).collect() };
    let average = |rows: &[Vec<C64>]| -> f64 {
        rows.iter()
            .map(|w| {
                let p = linalg::norm_sqr(w);
                if p < 1e-300 {
                    return 0.0;
                }
                let s = p.sqrt();
                let unit: Vec<C64> = w.iter().map(|z| z / s).collect();
                p * objective.eval(&unit)
            })
            .sum()
    };
    let pick = |acc: f64, v: f64| if direction.better(v, acc) { v } else { acc };
    let start = match direction {
        Direction::Min => f64::INFINITY,
        Direction::Max => f64::NEG_INFINITY,
    };
    match rank {
        0 => 0.0,
        1 => average(&[column(0)]),
        2 => {
            let a = column(0);
            let b = column(1);
            let steps = samples.max(2) - 1;
            let mut acc = start;
            for i in 0..=steps {
                let theta = FRAC_PI_2 * i as f64 / steps as f64;
                let (c, s) = (theta.cos(), theta.sin());
                for j in 0..=steps {
                    let phi = TAU * j as f64 / steps as f64;
                    let e = C64::from_polar(1.0, phi);
                    let w1: Vec<C64> = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| x * c - e.conj() * s * y)
                        .collect();
                    let w2: Vec<C64> = a.iter().zip(&b).map(|(x, y)| e * s * x + y * c).collect();
                    acc = pick(acc, average(&[w1, w2]));
                }
            }
            acc
        }
        r => {
            let m = r * r;
            let cols: Vec<Vec<C64>> = (0..r).map(column).collect();
            let mut rng = random::stream_rng(seed, u64::MAX);
            let mut acc = start;
            for _ in 0..samples.max(1) {
                let v = random::haar_isometry(m, r, &mut rng);
                let rows: Vec<Vec<C64>> = (0..m)
                    .map(|k| {
                        (0..n)
                            .map(|i| (0..r).map(|j| v[(k, j)] * cols[j][i]).sum())
                            .collect()
                    })
                    .collect();
                acc = pick(acc, average(&rows));
            }
            acc
        }
    }
}
