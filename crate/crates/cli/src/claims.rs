//! The `verify-paper` claim suite. Every row draws its randomness from its
//! own named substream of the run seed, so rows can run in parallel.

use rayon::prelude::*;
use roofkit::linalg::{self, ComplexMatrix};
use roofkit::maximal::{self, ThreeDimOutcome};
use roofkit::measures::{self, Extension};
use roofkit::random::{self, FULL_RANK_FLOOR};
use roofkit::roofs::Budget;
use roofkit::simplexfn::{Builtin, SimplexFunction};
use roofkit::states::{
    self, apply_channel, coherence_vector, BipartiteState, DensityMatrix, KrausChannel, PureState,
};

use rand::Rng;

use crate::report::Row;

const GINIBRE_QUBITS: usize = 8;
const GINIBRE_TWO_QUBITS: usize = 4;
const SCHMIDT_CORRELATED_PER_DIM: usize = 3;
const THREE_DIM_SAMPLES: usize = 20;

const GAP_TOL: f64 = 1e-3;
const EQUALITY_TOL: f64 = 2e-4;
const SATURATION_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-8;

struct Ctx {
    seed: u64,
    budget: Budget,
}

impl Ctx {
    fn rng(&self, label: &str) -> rand_chacha::ChaCha8Rng {
        random::named_rng(self.seed, label)
    }

    fn budget(&self, label: &str) -> Budget {
        Budget {
            seed: self.rng(&format!("{label}/budget")).random(),
            ..self.budget
        }
    }
}

type Claim = fn(&Ctx) -> Vec<Row>;

pub fn run(seed: u64, budget: Budget) -> Vec<Row> {
    let claims: [Claim; 9] = [
        fourier,
        saturation,
        non_monotonicity,
        coherence_gap,
        entanglement_gap,
        schmidt_correlated,
        three_dim_real,
        bell_average,
        bounds,
    ];
    let ctx = Ctx { seed, budget };
    claims
        .par_iter()
        .map(|c| c(&ctx))
        .collect::<Vec<_>>()
        .concat()
}

fn fourier(_: &Ctx) -> Vec<Row> {
    let mut row = Row::new(
        "a.fourier",
        "Fourier matrix F with its",
        "max residual, n=2..6",
    );
    let worst = (2..=6)
        .map(|n| {
            let ens = maximal::fourier_ensemble(n);
            let uniformity = ens
                .members()
                .iter()
                .map(|m| coherence_vector(&m.state).uniformity_residual())
                .fold(0.0, f64::max);
            ens.reconstruction_residual().max(uniformity)
        })
        .fold(0.0, f64::max);
    row.value = worst;
    row.tolerance = 1e-12;
    row.pass = worst <= 1e-12;
    vec![row]
}

fn saturation(ctx: &Ctx) -> Vec<Row> {
    let mut rows = Vec::new();
    for f in Builtin::ALL {
        for n in [2, 3] {
            let name = format!("b.saturation.{f}.n{n}");
            let mut row = Row::new(&name, "are AMC", format!("C_a[{f}](I/{n})"));
            let rho = DensityMatrix::maximally_mixed(n);
            row.tolerance = SATURATION_TOL;
            row.bracket = Some(f.max_value(n));
            match measures::coherence(&rho, &f, Extension::Assistance, ctx.budget(&name), None) {
                Ok(r) => {
                    row.value = r.value;
                    row.pass = r.value >= f.max_value(n) - SATURATION_TOL;
                }
                Err(e) => row.detail = e.to_string(),
            }
            rows.push(row);
        }
    }
    rows
}

/// `K₁ = I/√2`, `K₂ = (|0⟩⟨1| + |1⟩⟨0|)/√2`.
pub fn flip_channel() -> KrausChannel {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k1 = ComplexMatrix::identity(2, 2).scale(s);
    let mut k2 = ComplexMatrix::zeros(2, 2);
    k2[(0, 1)] = s.into();
    k2[(1, 0)] = s.into();
    KrausChannel::new(vec![k1, k2]).expect("complete Kraus set")
}

fn non_monotonicity(ctx: &Ctx) -> Vec<Row> {
    let zero = DensityMatrix::from_pure(&PureState::basis(2, 0));
    let out = apply_channel(&zero, &flip_channel()).expect("qubit channel on a qubit");
    Builtin::ALL
        .iter()
        .map(|f| {
            let name = format!("c.non-monotonicity.{f}");
            let mut row = Row::new(
                &name,
                "violates the monotonicity of coherence",
                format!("C_a[{f}](Λ(|0⟩⟨0|))"),
            );
            row.tolerance = SATURATION_TOL;
            let target = f.eval(&[0.5, 0.5]);
            row.bracket = Some(target);
            let before =
                measures::coherence(&zero, f, Extension::Assistance, ctx.budget(&name), None);
            let after =
                measures::coherence(&out, f, Extension::Assistance, ctx.budget(&name), None);
            match (before, after) {
                (Ok(b), Ok(a)) => {
                    row.value = a.value;
                    row.detail = format!("C_a(|0⟩⟨0|) = {}", b.value);
                    row.pass = b.value == 0.0 && a.value >= target - SATURATION_TOL;
                }
                (Err(e), _) | (_, Err(e)) => row.detail = e.to_string(),
            }
            row
        })
        .collect()
}

/// Smallest `C_a(lower) - C_c(upper)` over the states, or an error message.
fn min_gap<F>(
    states: &[F],
    solve: impl Fn(&F, Extension) -> Result<f64, String>,
) -> Result<f64, String> {
    let mut worst = f64::INFINITY;
    for s in states {
        let a = solve(s, Extension::Assistance)?;
        let c = solve(s, Extension::ConvexRoof)?;
        worst = worst.min(a - c);
    }
    Ok(worst)
}

fn gap_row(name: &str, anchor: &'static str, quantity: String, gap: Result<f64, String>) -> Row {
    let mut row = Row::new(name, anchor, quantity);
    row.tolerance = GAP_TOL;
    match gap {
        Ok(g) => {
            row.value = g;
            row.pass = g > GAP_TOL;
        }
        Err(e) => row.detail = e,
    }
    row
}

fn coherence_gap(ctx: &Ctx) -> Vec<Row> {
    let mut rng = ctx.rng("d.states");
    let states: Vec<DensityMatrix> = (0..GINIBRE_QUBITS)
        .map(|_| random::ginibre_full_rank(2, FULL_RANK_FLOOR, &mut rng))
        .collect();
    Builtin::ALL
        .iter()
        .map(|f| {
            let name = format!("d.gap.{f}");
            let budget = ctx.budget(&name);
            let gap = min_gap(&states, |rho, ext| {
                measures::coherence(rho, f, ext, budget, None)
                    .map(|r| r.value)
                    .map_err(|e| e.to_string())
            });
            gap_row(
                &name,
                "strictly larger than the coherence of convex roof",
                format!("min C_a-C_c[{f}], {GINIBRE_QUBITS} states"),
                gap,
            )
        })
        .collect()
}

fn entanglement_gap(ctx: &Ctx) -> Vec<Row> {
    let mut rng = ctx.rng("e.states");
    let states: Vec<BipartiteState> = (0..GINIBRE_TWO_QUBITS)
        .map(|_| {
            let rho = random::ginibre_full_rank(4, FULL_RANK_FLOOR, &mut rng);
            BipartiteState::mixed(2, 2, rho).expect("4 = 2x2")
        })
        .collect();
    let name = "e.gap.concurrence";
    let budget = ctx.budget(name);
    let f = Builtin::Concurrence;
    let gap = min_gap(&states, |st, ext| {
        measures::entanglement(st, &f, ext, budget, None)
            .map(|r| r.value)
            .map_err(|e| e.to_string())
    });
    vec![gap_row(
        name,
        "strictly larger than the entanglement of assistance",
        format!("min E_a-E_c[concurrence], {GINIBRE_TWO_QUBITS} states"),
        gap,
    )]
}

fn schmidt_correlated(ctx: &Ctx) -> Vec<Row> {
    let mut rng = ctx.rng("f.states");
    let states: Vec<DensityMatrix> = [2, 3]
        .iter()
        .flat_map(|&n| (0..SCHMIDT_CORRELATED_PER_DIM).map(move |_| n))
        .map(|n| random::ginibre(n, &mut rng))
        .collect();
    Builtin::ALL
        .iter()
        .map(|f| {
            let name = format!("f.schmidt-correlated.{f}");
            let budget = ctx.budget(&name);
            let mut row = Row::new(
                &name,
                "for Schmidt correlated states",
                format!("max |E-C|[{f}]"),
            );
            row.tolerance = EQUALITY_TOL;
            let mut worst: f64 = 0.0;
            for rho in &states {
                let st = measures::embed_mc(rho).to_bipartite();
                for ext in [Extension::Assistance, Extension::ConvexRoof] {
                    let e = measures::entanglement(&st, f, ext, budget, None);
                    let c = measures::coherence(rho, f, ext, budget, None);
                    match (e, c) {
                        (Ok(e), Ok(c)) => worst = worst.max((e.value - c.value).abs()),
                        (Err(err), _) | (_, Err(err)) => {
                            row.detail = err.to_string();
                            worst = f64::NAN;
                        }
                    }
                }
            }
            row.value = worst;
            row.pass = worst <= EQUALITY_TOL;
            row
        })
        .collect()
}

/// Real qutrit state `C/3` for a random real correlation matrix `C`.
pub fn random_real_uniform_qutrit<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let c = random::real_correlation(3, 3, rng);
    let m = ComplexMatrix::from_fn(3, 3, |i, j| (c[(i, j)] / 3.0).into());
    states::validate_density(m).expect("scaled correlation matrix is a state")
}

fn three_dim_real(ctx: &Ctx) -> Vec<Row> {
    let mut rng = ctx.rng("g.states");
    let mut row = Row::new(
        "g.three-dim-real",
        "is an example of mixed AMC state",
        "max reconstruction residual",
    );
    row.tolerance = 1e-10;
    let (mut decomposed, mut tried, mut worst, mut worst_uniformity) = (0, 0, 0.0f64, 0.0f64);
    while decomposed < THREE_DIM_SAMPLES && tried < 50 * THREE_DIM_SAMPLES {
        tried += 1;
        let rho = random_real_uniform_qutrit(&mut rng);
        match maximal::decompose_3dim_real(&rho) {
            Ok(ThreeDimOutcome::Decomposed(ens)) => {
                decomposed += 1;
                worst = worst.max(ens.reconstruction_residual());
                worst_uniformity = worst_uniformity.max(maximal::amc_witness_residual(&ens));
            }
            Ok(ThreeDimOutcome::Unavailable { .. }) => {}
            Err(e) => {
                row.detail = e.to_string();
                return vec![row];
            }
        }
    }
    row.value = worst;
    row.detail = format!("{decomposed} of {tried} sampled states had nonnegative weights");
    row.pass = decomposed == THREE_DIM_SAMPLES && worst <= 1e-10 && worst_uniformity <= 1e-12;
    vec![row]
}

fn bell_average(_: &Ctx) -> Vec<Row> {
    let mut row = Row::new(
        "h.bell-average",
        "average of generalized Bell states",
        "max deviation, n=2,3",
    );
    row.tolerance = 1e-12;
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let mut sum = ComplexMatrix::zeros(n * n, n * n);
        for s in 0..n {
            for t in 0..n {
                let st = maximal::generalized_bell(n, s, t).expect("indices in range");
                let lambda = states::schmidt(&st).expect("pure state").lambda;
                worst = worst.max(lambda.uniformity_residual());
                sum += st.density().matrix().scale(1.0 / (n * n) as f64);
            }
        }
        worst = worst.max(linalg::max_abs_diff(
            &sum,
            DensityMatrix::maximally_mixed(n * n).matrix(),
        ));
    }
    row.value = worst;
    row.pass = worst <= 1e-12;
    vec![row]
}

fn bounds(ctx: &Ctx) -> Vec<Row> {
    let mut rng = ctx.rng("i.states");
    let qubits: Vec<DensityMatrix> = (0..GINIBRE_QUBITS)
        .map(|_| random::ginibre_full_rank(2, FULL_RANK_FLOOR, &mut rng))
        .collect();
    let pairs: Vec<BipartiteState> = (0..GINIBRE_TWO_QUBITS)
        .map(|_| BipartiteState::mixed(2, 2, random::ginibre(4, &mut rng)).expect("4 = 2x2"))
        .collect();
    let f = Builtin::Concurrence;

    let mut coh = Row::new("i.bound.coherence", "one upper bound is", "max C_a - bound");
    let budget = ctx.budget("i.bound.coherence");
    coh.tolerance = BOUND_TOL;
    let mut excess = f64::NEG_INFINITY;
    for rho in &qubits {
        match measures::coherence(rho, &f, Extension::Assistance, budget, None) {
            Ok(r) => excess = excess.max(r.value - measures::concurrence_coherence_bound(rho)),
            Err(e) => coh.detail = e.to_string(),
        }
    }
    coh.value = excess;
    coh.pass = coh.detail.is_empty() && excess <= BOUND_TOL;

    let mut ent = Row::new(
        "i.bound.entanglement",
        "upper bound of entanglement of assistance",
        "max E_a - bound",
    );
    let budget = ctx.budget("i.bound.entanglement");
    ent.tolerance = BOUND_TOL;
    let mut excess = f64::NEG_INFINITY;
    for st in &pairs {
        match measures::entanglement(st, &f, Extension::Assistance, budget, None) {
            Ok(r) => excess = excess.max(r.value - measures::concurrence_assistance_bound(st)),
            Err(e) => ent.detail = e.to_string(),
        }
    }
    ent.value = excess;
    ent.pass = ent.detail.is_empty() && excess <= BOUND_TOL;
    vec![coh, ent]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherence_gap_holds_across_seeds() {
        for seed in 1..=5 {
            let ctx = Ctx {
                seed,
                budget: Budget::with_seed(seed),
            };
            for row in coherence_gap(&ctx) {
                assert!(row.pass, "seed {seed}: {} gap {}", row.name, row.value);
            }
        }
    }

    #[test]
    fn flip_channel_sends_zero_to_the_maximally_mixed_state() {
        let zero = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let out = apply_channel(&zero, &flip_channel()).unwrap();
        assert!(
            linalg::max_abs_diff(out.matrix(), DensityMatrix::maximally_mixed(2).matrix()) <= 1e-15
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        let again = apply_channel(&mixed, &flip_channel()).unwrap();
        assert!(linalg::max_abs_diff(again.matrix(), mixed.matrix()) <= 1e-15);
    }
}
