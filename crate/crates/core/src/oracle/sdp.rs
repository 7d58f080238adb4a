//! Feasibility of Gram-matrix systems `sum_t c_t v_t^T X_{b_t} v_t = rhs`.
//!
//! Feasibility is decided by the residual distance
//! `delta = min { ||A(X) - b||_1 : X >= 0, tr X <= R }` with rows normalized to
//! unit scale. Exact certificates at the minimal degree usually have forced
//! zeros, so their Gram blocks sit on the boundary of the cone; the residual
//! distance is still zero there, unlike an eigenvalue margin.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rug::Rational;
use serde::Serialize;

use super::ipm::{self, ConicProblem, IpmOptions, RankOne, Row};
use super::OracleError;

#[derive(Clone, Debug, PartialEq)]
pub struct GramTerm {
    pub block: usize,
    pub coef: f64,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpConstraint {
    pub terms: Vec<GramTerm>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.blocks.iter().any(|&d| d == 0) {
            return Err(OracleError::Problem("block dimension 0".into()));
        }
        for c in &self.constraints {
            for t in &c.terms {
                let Some(&dim) = self.blocks.get(t.block) else {
                    return Err(OracleError::Problem(format!("undeclared block {}", t.block)));
                };
                if t.v.len() != dim {
                    return Err(OracleError::Problem(format!(
                        "vector of length {} on block of dimension {dim}",
                        t.v.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `A(X) - b` for a block assignment.
    pub fn residuals(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c
                    .terms
                    .iter()
                    .map(|t| {
                        let v = DVector::from_column_slice(&t.v);
                        t.coef * (v.transpose() * &x[t.block] * &v)[(0, 0)]
                    })
                    .sum();
                lhs - c.rhs.to_f64()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Feasible,
    Infeasible,
    Marginal,
}

#[derive(Clone, Debug)]
pub struct FeasibilityResult {
    pub status: Status,
    /// `-delta`: zero for feasible systems, negative for infeasible ones.
    pub margin: f64,
    /// Lower bound on `delta` from the dual objective.
    pub dual_bound: f64,
    pub witness: Option<Vec<DMatrix<f64>>>,
    /// Row multipliers of the final dual iterate; for infeasible systems they
    /// define a functional `y . b` that separates `b` from `A(PSD)`.
    pub dual: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_residual: f64,
    pub trace_bound: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub eps: f64,
    pub ipm: IpmOptions,
    pub trace_escalations: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps: 1e-8,
            ipm: IpmOptions::default(),
            trace_escalations: 4,
        }
    }
}

pub fn sdp_feasible(p: &SdpProblem, eps: f64) -> Result<FeasibilityResult, OracleError> {
    sdp_feasible_with(
        p,
        &SolveOptions {
            eps,
            ..SolveOptions::default()
        },
    )
}

pub fn sdp_feasible_with(
    p: &SdpProblem,
    opts: &SolveOptions,
) -> Result<FeasibilityResult, OracleError> {
    p.validate()?;
    let reduced = facial_reduce(p);
    if let Some(gap) = reduced.contradiction {
        return Ok(FeasibilityResult {
            status: Status::Infeasible,
            margin: -gap,
            dual_bound: gap,
            witness: None,
            dual: vec![],
            min_eigenvalue: f64::NAN,
            max_residual: gap,
            trace_bound: 0.0,
        });
    }
    let rp = &reduced.problem;
    let b_abs: f64 = rp.constraints.iter().map(|c| c.rhs.to_f64().abs()).sum();
    let mut trace_bound = 10.0 * (1.0 + b_abs);
    let mut result = solve_once(rp, trace_bound, opts);
    for _ in 0..opts.trace_escalations {
        if result.inner.status == Status::Feasible || !result.trace_active {
            break;
        }
        trace_bound *= 30.0;
        result = solve_once(rp, trace_bound, opts);
    }
    let mut out = result.inner;
    if let Some(w) = out.witness.take() {
        let full = reduced.expand(&w);
        out.max_residual = p.residuals(&full).iter().fold(0.0f64, |a, r| a.max(r.abs()));
        out.witness = Some(full);
    }
    Ok(out)
}

/// Problem restricted to the face left after removing directions forced to
/// zero by rows `sum_t c_t v_t^T X v_t = 0` with every `c_t > 0`.
struct Reduced {
    problem: SdpProblem,
    /// Per original block: orthonormal basis of the face, `None` if eliminated.
    bases: Vec<Option<DMatrix<f64>>>,
    /// Index of the reduced block for each surviving original block.
    index: Vec<Option<usize>>,
    contradiction: Option<f64>,
}

impl Reduced {
    fn expand(&self, z: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        self.bases
            .iter()
            .zip(&self.index)
            .map(|(u, idx)| match (u, idx) {
                (Some(u), Some(i)) => u * &z[*i] * u.transpose(),
                (Some(u), None) => DMatrix::zeros(u.nrows(), u.nrows()),
                (None, _) => unreachable!(),
            })
            .collect()
    }
}

fn facial_reduce(p: &SdpProblem) -> Reduced {
    let nb = p.blocks.len();
    // zero directions per block, in original coordinates
    let mut killed: Vec<Vec<DVector<f64>>> = vec![Vec::new(); nb];
    for c in &p.constraints {
        let active: Vec<&GramTerm> = c.terms.iter().filter(|t| t.coef != 0.0).collect();
        if c.rhs == 0 && !active.is_empty() && active.iter().all(|t| t.coef > 0.0) {
            for t in active {
                killed[t.block].push(DVector::from_column_slice(&t.v));
            }
        }
    }
    let mut bases = Vec::with_capacity(nb);
    for (b, &dim) in p.blocks.iter().enumerate() {
        bases.push(Some(complement_basis(dim, &killed[b])));
    }
    let mut index = vec![None; nb];
    let mut blocks = Vec::new();
    for b in 0..nb {
        let k = bases[b].as_ref().unwrap().ncols();
        if k > 0 {
            index[b] = Some(blocks.len());
            blocks.push(k);
        }
    }
    let mut constraints = Vec::new();
    let mut contradiction: Option<f64> = None;
    for c in &p.constraints {
        let mut terms = Vec::new();
        for t in c.terms.iter().filter(|t| t.coef != 0.0) {
            let Some(i) = index[t.block] else { continue };
            let u = bases[t.block].as_ref().unwrap();
            let w = u.transpose() * DVector::from_column_slice(&t.v);
            if w.amax() > 1e-12 * (1.0 + t.v.iter().fold(0.0f64, |a, x| a.max(x.abs()))) {
                terms.push(GramTerm {
                    block: i,
                    coef: t.coef,
                    v: w.iter().copied().collect(),
                });
            }
        }
        if terms.is_empty() {
            if c.rhs != 0 {
                let gap = c.rhs.to_f64().abs() / (1.0 + c.rhs.to_f64().abs());
                contradiction = Some(contradiction.map_or(gap, |g: f64| g.max(gap)));
            }
            continue;
        }
        constraints.push(SdpConstraint {
            terms,
            rhs: c.rhs.clone(),
        });
    }
    Reduced {
        problem: SdpProblem {
            blocks,
            constraints,
        },
        bases,
        index,
        contradiction,
    }
}

/// Orthonormal basis (as columns) of the orthogonal complement of `span(vs)`.
fn complement_basis(dim: usize, vs: &[DVector<f64>]) -> DMatrix<f64> {
    if vs.is_empty() {
        return DMatrix::identity(dim, dim);
    }
    // eigenvectors of sum v v^T with (numerically) zero eigenvalue
    let mut g = DMatrix::<f64>::zeros(dim, dim);
    for v in vs {
        let n = v.norm();
        if n > 0.0 {
            g.ger(1.0 / (n * n), v, v, 1.0);
        }
    }
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = (0..dim)
        .filter(|&k| eig.eigenvalues[k] <= 1e-10 * top)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

struct Attempt {
    inner: FeasibilityResult,
    trace_active: bool,
}

fn solve_once(p: &SdpProblem, trace_bound: f64, opts: &SolveOptions) -> Attempt {
    let m = p.constraints.len();
    let weights: Vec<f64> = p
        .constraints
        .iter()
        .map(|c| {
            let mag: f64 = c
                .terms
                .iter()
                .map(|t| t.coef.abs() * t.v.iter().map(|x| x * x).sum::<f64>())
                .sum();
            1.0 / (1.0 + c.rhs.to_f64().abs() + mag)
        })
        .collect();

    // lp variables: plus_i, minus_i for each row, then the trace slack
    let mut rows: Vec<Row> = p
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| Row {
            terms: c
                .terms
                .iter()
                .map(|t| RankOne {
                    block: t.block,
                    coef: t.coef * weights[i],
                    v: DVector::from_column_slice(&t.v),
                })
                .collect(),
            identity: vec![],
            lp: vec![(2 * i, 1.0), (2 * i + 1, -1.0)],
        })
        .collect();
    rows.push(Row {
        terms: vec![],
        identity: (0..p.blocks.len()).map(|b| (b, 1.0 / trace_bound)).collect(),
        lp: vec![(2 * m, 1.0)],
    });
    let mut b: Vec<f64> = p
        .constraints
        .iter()
        .zip(&weights)
        .map(|(c, w)| c.rhs.to_f64() * w)
        .collect();
    b.push(1.0);
    let mut c_lp = DVector::from_element(2 * m + 1, 1.0);
    c_lp[2 * m] = 0.0;
    let cp = ConicProblem {
        sdp_dims: p.blocks.clone(),
        lp_dim: 2 * m + 1,
        rows,
        b: DVector::from_vec(b),
        c_sdp: p.blocks.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
        c_lp,
    };
    let sol = ipm::solve(&cp, &opts.ipm);

    let delta = sol.primal_obj.max(0.0);
    let dual_bound = sol.dual_obj;
    let min_eigenvalue = sol
        .x
        .iter()
        .map(|x| SymmetricEigen::new(x.clone()).eigenvalues.min())
        .fold(f64::INFINITY, f64::min);
    let residuals = p.residuals(&sol.x);
    let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let trace_active = sol.x_lp[2 * m] < 1e-6;

    let eps = opts.eps;
    let status = if delta <= eps && min_eigenvalue >= -eps && max_residual <= 10.0 * eps * (1.0 + b_scale(p)) {
        Status::Feasible
    } else if dual_bound >= 1e3 * eps && sol.merit < 1e-6 {
        Status::Infeasible
    } else {
        Status::Marginal
    };
    let dual = sol
        .y
        .iter()
        .take(m)
        .zip(&weights)
        .map(|(y, w)| y * w)
        .collect();
    Attempt {
        inner: FeasibilityResult {
            status,
            margin: -delta,
            dual_bound,
            witness: (status == Status::Feasible).then_some(sol.x),
            dual,
            min_eigenvalue,
            max_residual,
            trace_bound,
        },
        trace_active,
    }
}

fn b_scale(p: &SdpProblem) -> f64 {
    p.constraints
        .iter()
        .map(|c| c.rhs.to_f64().abs())
        .fold(0.0, f64::max)
}
