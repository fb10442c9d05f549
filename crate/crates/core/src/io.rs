//! JSON formats for states, ensembles and certificates.
//!
//! A state file is `{"kind": "density" | "pure", "dims": [n] | [nA, nB],
//! "data": ...}` where `data` holds `[re, im]` pairs: a flat list for pure
//! states, a list of rows for density matrices. Parsing always re-validates.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::maximal::{Certificate, Reason, Verdict};
use crate::states::{
    validate_density, BipartiteState, DensityMatrix, Ensemble, Member, PureState, StateError,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad format: {0}")]
    Format(String),
    #[error("invalid state ({inv}): {0}", inv = .0.invariant())]
    Invalid(#[from] StateError),
}

impl IoError {
    /// Name of the violated invariant, or of the format problem.
    pub fn invariant(&self) -> &'static str {
        match self {
            IoError::Json(_) => "json",
            IoError::Format(_) => "format",
            IoError::Invalid(e) => e.invariant(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateBody {
    Pure(PureState),
    Density(DensityMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    /// `[n]` for a single system, `[nA, nB]` for a bipartite one.
    pub dims: Vec<usize>,
    pub body: StateBody,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    kind: String,
    dims: Vec<usize>,
    data: Value,
}

type Pair = [f64; 2];

fn to_c(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: &C64) -> Pair {
    [z.re, z.im]
}

impl StateFile {
    pub fn flat_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn density(&self) -> DensityMatrix {
        match &self.body {
            StateBody::Pure(psi) => DensityMatrix::from_pure(psi),
            StateBody::Density(rho) => rho.clone(),
        }
    }

    pub fn bipartite(&self) -> Option<BipartiteState> {
        let &[a, b] = self.dims.as_slice() else {
            return None;
        };
        match &self.body {
            StateBody::Pure(psi) => BipartiteState::pure(a, b, psi.clone()).ok(),
            StateBody::Density(rho) => BipartiteState::mixed(a, b, rho.clone()).ok(),
        }
    }

    pub fn from_density(dims: Vec<usize>, rho: DensityMatrix) -> Self {
        StateFile {
            dims,
            body: StateBody::Density(rho),
        }
    }

    pub fn from_pure(dims: Vec<usize>, psi: PureState) -> Self {
        StateFile {
            dims,
            body: StateBody::Pure(psi),
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, data) = match &self.body {
            StateBody::Pure(psi) => (
                "pure",
                json!(psi.amplitudes().iter().map(pair).collect::<Vec<_>>()),
            ),
            StateBody::Density(rho) => ("density", json!(matrix_rows(rho.matrix()))),
        };
        let raw = RawState {
            kind: kind.into(),
            dims: self.dims.clone(),
            data,
        };
        serde_json::to_string_pretty(&raw).expect("state serializes")
    }
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(&m[(r, c)])).collect())
        .collect()
}

fn parse_vector(data: Value) -> Result<Vec<C64>, IoError> {
    let v: Vec<Pair> = serde_json::from_value(data)
        .map_err(|e| IoError::Format(format!("pure data must be a list of [re, im] pairs: {e}")))?;
    Ok(v.iter().map(to_c).collect())
}

pub fn parse_state(text: &str) -> Result<StateFile, IoError> {
    let raw: RawState = serde_json::from_str(text)?;
    if raw.dims.is_empty() || raw.dims.len() > 2 || raw.dims.contains(&0) {
        return Err(IoError::Format(format!(
            "dims must be [n] or [nA, nB] with positive entries, got {:?}",
            raw.dims
        )));
    }
    let n: usize = raw.dims.iter().product();
    let body = match raw.kind.as_str() {
        "pure" => {
            let amp = parse_vector(raw.data)?;
            if amp.len() != n {
                return Err(StateError::DimensionMismatch {
                    expected: n,
                    got: amp.len(),
                }
                .into());
            }
            StateBody::Pure(PureState::new(amp)?)
        }
        "density" => {
            let rows: Vec<Vec<Pair>> = serde_json::from_value(raw.data).map_err(|e| {
                IoError::Format(format!("density data must be rows of [re, im] pairs: {e}"))
            })?;
            if rows.iter().any(|r| r.len() != rows.len()) {
                return Err(StateError::NotSquare {
                    rows: rows.len(),
                    cols: rows
                        .iter()
                        .map(Vec::len)
                        .find(|&l| l != rows.len())
                        .unwrap_or(0),
                }
                .into());
            }
            if rows.len() != n {
                return Err(StateError::DimensionMismatch {
                    expected: n,
                    got: rows.len(),
                }
                .into());
            }
            let m = ComplexMatrix::from_fn(n, n, |r, c| to_c(&rows[r][c]));
            StateBody::Density(validate_density(m)?)
        }
        other => {
            return Err(IoError::Format(format!(
                "kind must be \"density\" or \"pure\", got {other:?}"
            )))
        }
    };
    Ok(StateFile {
        dims: raw.dims,
        body,
    })
}

fn members_json(ens: &Ensemble) -> Value {
    Value::Array(
        ens.members()
            .iter()
            .map(|m| {
                json!({
                    "weight": m.weight,
                    "state": m.state.amplitudes().iter().map(pair).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

/// `{"dims", "target", "members": [{"weight", "state"}]}`.
pub fn ensemble_to_json(ens: &Ensemble, dims: &[usize]) -> String {
    let v = json!({
        "dims": dims,
        "target": matrix_rows(ens.target().matrix()),
        "members": members_json(ens),
    });
    serde_json::to_string_pretty(&v).expect("ensemble serializes")
}

#[derive(Deserialize)]
struct RawMember {
    weight: f64,
    state: Vec<Pair>,
}

#[derive(Deserialize)]
struct RawEnsemble {
    dims: Vec<usize>,
    target: Vec<Vec<Pair>>,
    members: Vec<RawMember>,
}

/// Parse and re-validate an ensemble file; returns the dims and the ensemble.
pub fn parse_ensemble(text: &str) -> Result<(Vec<usize>, Ensemble), IoError> {
    let raw: RawEnsemble = serde_json::from_str(text)?;
    let n = raw.target.len();
    if raw.target.iter().any(|r| r.len() != n) {
        return Err(StateError::NotSquare { rows: n, cols: 0 }.into());
    }
    if raw.dims.iter().product::<usize>() != n {
        return Err(StateError::DimensionMismatch {
            expected: raw.dims.iter().product(),
            got: n,
        }
        .into());
    }
    let target = validate_density(ComplexMatrix::from_fn(n, n, |r, c| to_c(&raw.target[r][c])))?;
    let members = raw
        .members
        .iter()
        .map(|m| {
            Ok(Member {
                weight: m.weight,
                state: PureState::new(m.state.iter().map(to_c).collect())?,
            })
        })
        .collect::<Result<Vec<_>, StateError>>()?;
    Ok((raw.dims, Ensemble::new(target, members)?))
}

/// `{"verdict", "reason", "residual", "witness": [{"weight", "state"}] | null}`.
pub fn certificate_json(cert: &Certificate) -> Value {
    json!({
        "verdict": cert.verdict.as_str(),
        "reason": cert.reason.as_str(),
        "residual": finite_or_null(cert.residual),
        "witness": cert.witness.as_ref().map(members_json),
    })
}

/// Inverse of [`certificate_json`]; the witness is re-validated against `target`.
pub fn parse_certificate(v: &Value, target: &DensityMatrix) -> Result<Certificate, IoError> {
    let field = |k: &str| {
        v.get(k)
            .ok_or_else(|| IoError::Format(format!("missing field {k}")))
    };
    let verdict = field("verdict")?
        .as_str()
        .and_then(Verdict::parse)
        .ok_or_else(|| IoError::Format("unknown verdict".into()))?;
    let reason = field("reason")?
        .as_str()
        .and_then(Reason::parse)
        .ok_or_else(|| IoError::Format("unknown reason".into()))?;
    let residual = field("residual")?.as_f64().unwrap_or(f64::NAN);
    let witness = match field("witness")? {
        Value::Null => None,
        w => {
            let raw: Vec<RawMember> = serde_json::from_value(w.clone())?;
            let members = raw
                .iter()
                .map(|m| {
                    Ok(Member {
                        weight: m.weight,
                        state: PureState::new(m.state.iter().map(to_c).collect())?,
                    })
                })
                .collect::<Result<Vec<_>, StateError>>()?;
            Some(Ensemble::new(target.clone(), members)?)
        }
    };
    Ok(Certificate {
        verdict,
        reason,
        residual,
        witness,
    })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
