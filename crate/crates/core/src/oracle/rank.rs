//! Ascending degree scan for the SOS rank.

use serde::Serialize;
use serde_json::json;

use super::assemble::{assemble_dense, assemble_symmetric};
use super::ipm::IpmOptions;
use super::sdp::{sdp_feasible_with, SolveOptions, Status};
use super::OracleError;
use crate::model::KnapsackInstance;

pub const CONVENTION: &str = "paper-dual-side";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
pub enum Method {
    Dense,
    #[default]
    Symmetric,
}

impl std::str::FromStr for Method {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(Method::Dense),
            "symmetric" => Ok(Method::Symmetric),
            _ => Err(OracleError::Problem(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeOutcome {
    pub d: u32,
    pub status: Status,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankResult {
    pub inst: KnapsackInstance,
    pub rank: Option<u32>,
    pub per_degree: Vec<DegreeOutcome>,
    pub method: Method,
    /// A Marginal degree survived escalation; `rank` is then `None`.
    pub unresolved: bool,
}

impl RankResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.inst.n(),
            "q": self.inst.q_string(),
            "method": self.method,
            "per_degree": self.per_degree,
            "rank": self.rank,
            "unresolved": self.unresolved,
            "convention": CONVENTION,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RankOptions {
    pub method: Method,
    pub eps: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            method: Method::Symmetric,
            eps: 1e-8,
        }
    }
}

pub fn feasibility_at(
    inst: &KnapsackInstance,
    d: u32,
    opts: &RankOptions,
) -> Result<DegreeOutcome, OracleError> {
    let problem = match opts.method {
        Method::Dense => assemble_dense(inst, d)?,
        Method::Symmetric => assemble_symmetric(inst, d),
    };
    let base = SolveOptions {
        eps: opts.eps,
        ..SolveOptions::default()
    };
    let mut res = sdp_feasible_with(&problem, &base)?;
    if res.status == Status::Marginal {
        let tight = SolveOptions {
            ipm: IpmOptions {
                max_iter: 400,
                tol: 1e-13,
            },
            trace_escalations: 3,
            ..base
        };
        res = sdp_feasible_with(&problem, &tight)?;
    }
    Ok(DegreeOutcome {
        d,
        status: res.status,
        margin: res.margin,
    })
}

pub fn sos_rank(
    inst: &KnapsackInstance,
    dmax: u32,
    opts: &RankOptions,
) -> Result<RankResult, OracleError> {
    if u64::from(dmax) > inst.n() {
        return Err(OracleError::Problem(format!(
            "dmax {dmax} exceeds n = {}",
            inst.n()
        )));
    }
    let mut per_degree = Vec::new();
    let mut rank = None;
    let mut unresolved = false;
    for d in 0..=dmax {
        let out = feasibility_at(inst, d, opts)?;
        let status = out.status;
        per_degree.push(out);
        match status {
            Status::Feasible => {
                rank = Some(d);
                break;
            }
            Status::Marginal => {
                unresolved = true;
                break;
            }
            Status::Infeasible => {}
        }
    }
    Ok(RankResult {
        inst: inst.clone(),
        rank,
        per_degree,
        method: opts.method,
        unresolved,
    })
}
