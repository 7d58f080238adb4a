//! Infeasible-start primal-dual interior-point method for block SDPs with a
//! nonnegative-orthant part, HKM search direction with Mehrotra
//! predictor-corrector.
//!
//! Primal: `min <C, X> + c_lp . x` s.t. `A_i(X) + a_i . x = b_i`, `X >= 0`, `x >= 0`.
//! Each `A_i` restricted to a block is `alpha I + sum_t c_t v_t v_t^T`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct RankOne {
    pub block: usize,
    pub coef: f64,
    pub v: DVector<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct Row {
    pub terms: Vec<RankOne>,
    /// `(block, alpha)`: adds `alpha * I` on that block.
    pub identity: Vec<(usize, f64)>,
    pub lp: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct ConicProblem {
    pub sdp_dims: Vec<usize>,
    pub lp_dim: usize,
    pub rows: Vec<Row>,
    pub b: DVector<f64>,
    pub c_sdp: Vec<DMatrix<f64>>,
    pub c_lp: DVector<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct IpmOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            max_iter: 120,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IpmSolution {
    pub x: Vec<DMatrix<f64>>,
    pub x_lp: DVector<f64>,
    pub y: DVector<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub s_lp: DVector<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub converged: bool,
    /// `max(rp, rd, gap)` relative measures of the returned iterate.
    pub merit: f64,
    pub iterations: usize,
}

/// Per-block gathered terms, reused for every Schur assembly.
struct BlockTerms {
    v: DMatrix<f64>,
    coef: Vec<f64>,
    row: Vec<usize>,
}

impl ConicProblem {
    fn gather(&self) -> Vec<BlockTerms> {
        self.sdp_dims
            .iter()
            .enumerate()
            .map(|(b, &dim)| {
                let mut cols = Vec::new();
                let mut coef = Vec::new();
                let mut row = Vec::new();
                for (i, r) in self.rows.iter().enumerate() {
                    for t in r.terms.iter().filter(|t| t.block == b) {
                        cols.push(t.v.clone());
                        coef.push(t.coef);
                        row.push(i);
                    }
                }
                let v = if cols.is_empty() {
                    DMatrix::zeros(dim, 0)
                } else {
                    DMatrix::from_columns(&cols)
                };
                BlockTerms { v, coef, row }
            })
            .collect()
    }

    /// `A(X, x)`
    pub fn apply(&self, x: &[DMatrix<f64>], x_lp: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|r| {
                let mut acc = 0.0;
                for t in &r.terms {
                    acc += t.coef * (t.v.transpose() * &x[t.block] * &t.v)[(0, 0)];
                }
                for &(b, a) in &r.identity {
                    acc += a * x[b].trace();
                }
                for &(k, a) in &r.lp {
                    acc += a * x_lp[k];
                }
                acc
            }),
        )
    }

    /// `A^*(y)`
    pub fn adjoint(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mut out: Vec<DMatrix<f64>> = self
            .sdp_dims
            .iter()
            .map(|&d| DMatrix::zeros(d, d))
            .collect();
        let mut lp = DVector::zeros(self.lp_dim);
        for (i, r) in self.rows.iter().enumerate() {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            for t in &r.terms {
                out[t.block].ger(yi * t.coef, &t.v, &t.v, 1.0);
            }
            for &(b, a) in &r.identity {
                for k in 0..self.sdp_dims[b] {
                    out[b][(k, k)] += yi * a;
                }
            }
            for &(k, a) in &r.lp {
                lp[k] += yi * a;
            }
        }
        (out, lp)
    }

    fn objective(&self, x: &[DMatrix<f64>], x_lp: &DVector<f64>) -> f64 {
        x.iter()
            .zip(&self.c_sdp)
            .map(|(a, c)| a.dot(c))
            .sum::<f64>()
            + self.c_lp.dot(x_lp)
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// Largest `alpha` with `x + alpha dx >= 0` (infinite when `dx >= 0`).
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    if x.nrows() == 0 {
        return f64::INFINITY;
    }
    let Some(ch) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let linv = match l.clone().try_inverse() {
        Some(v) => v,
        None => return 0.0,
    };
    let w = &linv * dx * linv.transpose();
    let lmin = SymmetricEigen::new(sym(&w)).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(a, d)| -a / d)
        .fold(f64::INFINITY, f64::min)
}

pub fn solve(p: &ConicProblem, opts: &IpmOptions) -> IpmSolution {
    let m = p.rows.len();
    let terms = p.gather();
    let n_cone: usize = p.sdp_dims.iter().sum::<usize>() + p.lp_dim;
    let nb = p.sdp_dims.len();

    let bnorm = p.b.amax().max(1.0);
    let cnorm = p
        .c_sdp
        .iter()
        .map(|c| c.amax())
        .fold(p.c_lp.amax(), f64::max)
        .max(1.0);
    let xi = 10.0 * bnorm.max(1.0);
    let eta = 10.0 * cnorm;

    let mut x: Vec<DMatrix<f64>> = p.sdp_dims.iter().map(|&d| DMatrix::identity(d, d) * xi).collect();
    let mut s: Vec<DMatrix<f64>> = p.sdp_dims.iter().map(|&d| DMatrix::identity(d, d) * eta).collect();
    let mut x_lp = DVector::from_element(p.lp_dim, xi);
    let mut s_lp = DVector::from_element(p.lp_dim, eta);
    let mut y = DVector::zeros(m);
    let mut converged = false;
    let mut iterations = 0;
    type Snapshot = (Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>, DVector<f64>);
    let mut best: Option<(f64, Snapshot)> = None;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let ax = p.apply(&x, &x_lp);
        let rp = &p.b - &ax;
        let (aty, aty_lp) = p.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = (0..nb).map(|b| &p.c_sdp[b] - &s[b] - &aty[b]).collect();
        let rd_lp = &p.c_lp - &s_lp - &aty_lp;

        let gap: f64 = x.iter().zip(&s).map(|(a, b)| a.dot(b)).sum::<f64>() + x_lp.dot(&s_lp);
        let mu = gap / n_cone.max(1) as f64;
        let pobj = p.objective(&x, &x_lp);
        let dobj = p.b.dot(&y);
        let rp_rel = rp.amax() / (1.0 + bnorm);
        let rd_rel = rd.iter().map(|r| r.amax()).fold(rd_lp.amax(), f64::max) / (1.0 + cnorm);
        let gap_rel = gap.abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = rp_rel.max(rd_rel).max(gap_rel);
        let best_merit = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if merit < best_merit {
            best = Some((merit, (x.clone(), x_lp.clone(), y.clone(), s.clone(), s_lp.clone())));
        } else if merit > 1e3 * best_merit {
            // lost accuracy to Schur ill-conditioning near the boundary
            break;
        }
        if merit < opts.tol {
            converged = true;
            break;
        }

        let Some(sinv) = s.iter().map(inverse_spd).collect::<Option<Vec<_>>>() else {
            break;
        };

        // Schur complement M_ij = tr(A_i X A_j S^-1) + sum_k a_ik a_jk x_k / s_k
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for (b, bt) in terms.iter().enumerate() {
            let xs = &x[b] * &sinv[b];
            let xs_tr = xs.trace();
            if bt.v.ncols() > 0 {
                let vx = bt.v.transpose() * &x[b];
                let pm = &vx * &bt.v;
                let qm = bt.v.transpose() * &sinv[b] * &bt.v;
                let t = bt.v.ncols();
                for a in 0..t {
                    for c in 0..t {
                        mm[(bt.row[a], bt.row[c])] += bt.coef[a] * bt.coef[c] * pm[(a, c)] * qm[(a, c)];
                    }
                }
                let hm = &vx * &sinv[b] * &bt.v;
                for (i, r) in p.rows.iter().enumerate() {
                    for &(bb, al) in &r.identity {
                        if bb != b {
                            continue;
                        }
                        for a in 0..t {
                            let v = al * bt.coef[a] * hm[(a, a)];
                            mm[(i, bt.row[a])] += v;
                            mm[(bt.row[a], i)] += v;
                        }
                    }
                }
            }
            for (i, ri) in p.rows.iter().enumerate() {
                for &(bi, ai) in &ri.identity {
                    if bi != b {
                        continue;
                    }
                    for (j, rj) in p.rows.iter().enumerate() {
                        for &(bj, aj) in &rj.identity {
                            if bj == b {
                                mm[(i, j)] += ai * aj * xs_tr;
                            }
                        }
                    }
                }
            }
        }
        let dlp = DVector::from_iterator(p.lp_dim, x_lp.iter().zip(s_lp.iter()).map(|(a, b)| a / b));
        for (i, ri) in p.rows.iter().enumerate() {
            for &(k, a) in &ri.lp {
                for (j, rj) in p.rows.iter().enumerate() {
                    for &(k2, a2) in &rj.lp {
                        if k2 == k {
                            mm[(i, j)] += a * a2 * dlp[k];
                        }
                    }
                }
            }
        }
        let scale = mm.diagonal().amax().max(1e-300);
        let chol = Cholesky::new(mm.clone()).or_else(|| {
            let mut reg = mm.clone();
            for i in 0..m {
                reg[(i, i)] += 1e-12 * scale;
            }
            Cholesky::new(reg)
        });
        let Some(chol) = chol else {
            break;
        };

        // direction for a given target sigma*mu and second-order correction
        let direction = |sigma_mu: f64,
                         corr: Option<(&[DMatrix<f64>], &DVector<f64>)>|
         -> (Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>, DVector<f64>) {
            // G = sigma_mu S^-1 - X - X Rd S^-1 - corr
            let g: Vec<DMatrix<f64>> = (0..nb)
                .map(|b| {
                    let mut gb = &sinv[b] * sigma_mu - &x[b] - &x[b] * &rd[b] * &sinv[b];
                    if let Some((c, _)) = corr {
                        gb -= &c[b];
                    }
                    gb
                })
                .collect();
            let mut g_lp = DVector::from_iterator(
                p.lp_dim,
                (0..p.lp_dim).map(|k| sigma_mu / s_lp[k] - x_lp[k] - x_lp[k] * rd_lp[k] / s_lp[k]),
            );
            if let Some((_, c)) = corr {
                g_lp -= c;
            }
            let rhs = &rp - p.apply(&g, &g_lp);
            let mut dy = chol.solve(&rhs);
            // refinement against the operator form of M
            for _ in 0..3 {
                let (a, a_lp) = p.adjoint(&dy);
                let xa: Vec<DMatrix<f64>> = (0..nb).map(|b| &x[b] * &a[b] * &sinv[b]).collect();
                let xa_lp = a_lp.component_mul(&dlp);
                let r = &rhs - p.apply(&xa, &xa_lp);
                if r.amax() <= 1e-15 * rhs.amax() {
                    break;
                }
                dy += chol.solve(&r);
            }
            let (atdy, atdy_lp) = p.adjoint(&dy);
            let ds: Vec<DMatrix<f64>> = (0..nb).map(|b| &rd[b] - &atdy[b]).collect();
            let ds_lp = &rd_lp - &atdy_lp;
            let dx: Vec<DMatrix<f64>> = (0..nb)
                .map(|b| sym(&(&g[b] + &x[b] * &atdy[b] * &sinv[b])))
                .collect();
            let dx_lp = DVector::from_iterator(
                p.lp_dim,
                (0..p.lp_dim).map(|k| g_lp[k] + x_lp[k] * atdy_lp[k] / s_lp[k]),
            );
            (dx, dx_lp, dy, ds, ds_lp)
        };

        let steps = |dx: &[DMatrix<f64>], dx_lp: &DVector<f64>, ds: &[DMatrix<f64>], ds_lp: &DVector<f64>| {
            let ap = (0..nb)
                .map(|b| max_step_psd(&x[b], &dx[b]))
                .fold(max_step_lp(&x_lp, dx_lp), f64::min);
            let ad = (0..nb)
                .map(|b| max_step_psd(&s[b], &ds[b]))
                .fold(max_step_lp(&s_lp, ds_lp), f64::min);
            (ap, ad)
        };

        let (dxa, dxa_lp, _, dsa, dsa_lp) = direction(0.0, None);
        let (apa, ada) = steps(&dxa, &dxa_lp, &dsa, &dsa_lp);
        let apa = apa.min(1.0);
        let ada = ada.min(1.0);
        let gap_aff: f64 = (0..nb)
            .map(|b| (&x[b] + &dxa[b] * apa).dot(&(&s[b] + &dsa[b] * ada)))
            .sum::<f64>()
            + (&x_lp + &dxa_lp * apa).dot(&(&s_lp + &dsa_lp * ada));
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3);

        let corr: Vec<DMatrix<f64>> = (0..nb).map(|b| &dxa[b] * &dsa[b] * &sinv[b]).collect();
        let corr_lp = DVector::from_iterator(
            p.lp_dim,
            (0..p.lp_dim).map(|k| dxa_lp[k] * dsa_lp[k] / s_lp[k]),
        );
        let (dx, dx_lp, dy, ds, ds_lp) = direction(sigma * mu, Some((&corr, &corr_lp)));
        let (ap, ad) = steps(&dx, &dx_lp, &ds, &ds_lp);
        let gamma = 0.95;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);

        for b in 0..nb {
            x[b] += &dx[b] * ap;
            s[b] += &ds[b] * ad;
            x[b] = sym(&x[b]);
            s[b] = sym(&s[b]);
        }
        x_lp += &dx_lp * ap;
        s_lp += &ds_lp * ad;
        y += &dy * ad;
    }

    let mut merit = f64::INFINITY;
    if let Some((m, snap)) = best {
        merit = m;
        (x, x_lp, y, s, s_lp) = snap;
    }
    let primal_obj = p.objective(&x, &x_lp);
    let dual_obj = p.b.dot(&y);
    IpmSolution {
        x,
        x_lp,
        y,
        s,
        s_lp,
        primal_obj,
        dual_obj,
        converged,
        merit,
        iterations,
    }
}
