//! Convex-roof and assistance (concave-roof) quantities of coherence and
//! entanglement, computed by optimizing over pure-state decompositions, plus
//! constructions and certificates for assisted maximally coherent and
//! assisted maximally entangled states.

pub mod io;
pub mod linalg;
pub mod maximal;
pub mod measures;
pub mod random;
pub mod roofs;
pub mod simplexfn;
pub mod states;

pub use linalg::ComplexMatrix;
pub use maximal::{certify_amc, certify_ame, Certificate, Reason, Verdict};
pub use measures::{coherence, entanglement, Extension};
pub use roofs::{solve_roof, Budget, Direction, RoofResult};
pub use simplexfn::{Builtin, SimplexFunction};
pub use states::{BipartiteState, DensityMatrix, Ensemble, PureState};
