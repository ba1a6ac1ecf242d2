//! Dense semidefinite programming.
//!
//! `solve_standard` is an infeasible primal-dual interior-point method with
//! the HKM search direction and Mehrotra predictor-corrector steps for
//!
//! ```text
//! min <C, X>  s.t.  <A_k, X> = b_k,  X psd (block diagonal)
//! max b^T y   s.t.  sum_k y_k A_k + Z = C,  Z psd
//! ```
//!
//! `solve_feasibility` decides whether `{Q psd : <A_k, Q> = b_k}` is
//! nonempty. It solves an auxiliary problem that is strictly feasible on both
//! sides, so the interior-point method always has something to converge to,
//! and reads either a near-feasible `Q` or a Farkas certificate off the result.

use alloc::vec;
use alloc::vec::Vec;

use crate::deadline::Deadline;
use crate::linalg::{cholesky, cholesky_solve, lower_inverse, lu_solve, min_eigenvalue, sym_eigen, Mat};

/// Entry `(i, j)` with `i <= j` of a symmetric constraint matrix.
///
/// Off-diagonal entries stand for both `(i, j)` and `(j, i)`, so
/// `<A, X> = sum_diag v X_ii + sum_offdiag 2 v X_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Trace bound of the auxiliary feasibility problem, per unit of matrix dimension.
    pub trace_factor: f64,
    /// A run that stalls or breaks down still returns its best iterate when
    /// that iterate's accuracy is at most this.
    pub accept_tol: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            tol: 1e-9,
            max_iter: 200,
            trace_factor: 1e3,
            accept_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SdpFailure {
    #[error("iteration cap reached")]
    IterationCap,
    #[error("numerical breakdown")]
    Numerical,
    #[error("deadline expired")]
    Timeout,
}

/// Primal-dual optimum of a standard-form problem.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<Mat>,
    pub y: Vec<f64>,
    pub z: Vec<Mat>,
    pub iterations: usize,
    /// Largest of the relative primal, dual and gap residuals.
    pub accuracy: f64,
    /// False when `accuracy` only meets `accept_tol`.
    pub converged: bool,
}

/// Nonempty feasible set: a matrix per block.
#[derive(Clone, Debug)]
pub struct FeasiblePoint {
    pub blocks: Vec<Mat>,
    /// `max_k |<A_k, Q> - b_k|`.
    pub residual: f64,
    pub min_eig: f64,
}

/// Farkas certificate: `sum_k y_k A_k` is psd up to `min_eig` and `b^T y < 0`.
#[derive(Clone, Debug)]
pub struct Farkas {
    pub y: Vec<f64>,
    pub value: f64,
    pub min_eig: f64,
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(FeasiblePoint),
    Infeasible(Farkas),
    Unknown(SdpFailure),
}

/// Constraint with both triangles expanded, for products.
struct Row {
    full: Vec<(usize, usize, usize, f64)>,
}

fn expand(c: &Constraint) -> Row {
    let mut full = Vec::with_capacity(2 * c.entries.len());
    for e in &c.entries {
        full.push((e.block, e.i, e.j, e.value));
        if e.i != e.j {
            full.push((e.block, e.j, e.i, e.value));
        }
    }
    Row { full }
}

/// `<A, W>` for a possibly nonsymmetric block matrix `W`.
fn inner(row: &Row, w: &[Mat]) -> f64 {
    row.full.iter().map(|&(b, i, j, v)| v * w[b][(i, j)]).sum()
}

fn apply_a(rows: &[Row], w: &[Mat]) -> Vec<f64> {
    rows.iter().map(|r| inner(r, w)).collect()
}

fn apply_at(rows: &[Row], y: &[f64], sizes: &[usize]) -> Vec<Mat> {
    let mut out: Vec<Mat> = sizes.iter().map(|&n| Mat::zeros(n, n)).collect();
    for (r, &yk) in rows.iter().zip(y) {
        if yk == 0.0 {
            continue;
        }
        for &(b, i, j, v) in &r.full {
            out[b][(i, j)] += yk * v;
        }
    }
    out
}

fn blocks_dot(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_mul(a: &[Mat], b: &[Mat]) -> Vec<Mat> {
    a.iter().zip(b).map(|(x, y)| x.matmul(y)).collect()
}

fn blocks_norm(a: &[Mat]) -> f64 {
    libm::sqrt(blocks_dot(a, a))
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Largest `alpha` with `X + alpha D` psd, given the Cholesky factors of the blocks of `X`.
fn max_step(lx: &[Mat], d: &[Mat]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (l, db) in lx.iter().zip(d) {
        if l.rows() == 0 {
            continue;
        }
        let li = lower_inverse(l);
        let m = li.matmul(db).matmul(&li.transpose());
        let lam = min_eigenvalue(&m);
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    alpha
}

/// Solve a standard-form problem.
pub fn solve_standard(
    sizes: &[usize],
    cons: &[Constraint],
    c: &[Mat],
    settings: &SdpSettings,
    deadline: &dyn Deadline,
) -> Result<SdpSolution, SdpFailure> {
    let rows: Vec<Row> = cons.iter().map(expand).collect();
    let b: Vec<f64> = cons.iter().map(|c| c.rhs).collect();
    let m = rows.len();
    let ntot: usize = sizes.iter().sum();
    let nf = ntot.max(1) as f64;

    let row_norm = |r: &Row| libm::sqrt(r.full.iter().map(|e| e.3 * e.3).sum::<f64>());
    let max_a = rows.iter().map(row_norm).fold(0.0, f64::max);
    let zeta = rows
        .iter()
        .zip(&b)
        .map(|(r, bk)| nf * (1.0 + libm::fabs(*bk)) / (1.0 + row_norm(r)))
        .fold(libm::sqrt(nf).max(10.0), f64::max);
    let eta = libm::sqrt(nf).max(10.0).max(max_a).max(blocks_norm(c));

    let mut x: Vec<Mat> = sizes.iter().map(|&n| Mat::identity(n).scale(zeta)).collect();
    let mut z: Vec<Mat> = sizes.iter().map(|&n| Mat::identity(n).scale(eta)).collect();
    let mut y = vec![0.0; m];
    let bnorm = norm2(&b);
    let cnorm = blocks_norm(c);
    let mut best: Option<SdpSolution> = None;
    let fallback = |best: Option<SdpSolution>, e: SdpFailure| match best {
        Some(b) if b.accuracy <= settings.accept_tol => Ok(b),
        _ => Err(e),
    };
    // Degenerate problems (no strictly feasible point) lose accuracy after a
    // point; stop once the best iterate is this many steps old.
    const STALL: usize = 20;

    for iter in 0..settings.max_iter {
        if deadline.expired() {
            return Err(SdpFailure::Timeout);
        }
        let ax = apply_a(&rows, &x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bk, a)| bk - a).collect();
        let aty = apply_at(&rows, &y, sizes);
        let rd: Vec<Mat> = c
            .iter()
            .zip(&aty)
            .zip(&z)
            .map(|((cb, ab), zb)| cb.sub(ab).sub(zb))
            .collect();
        let xz = blocks_dot(&x, &z);
        let mu = xz / nf;
        let pobj = blocks_dot(c, &x);
        let dobj: f64 = b.iter().zip(&y).map(|(p, q)| p * q).sum();
        let pinf = norm2(&rp) / (1.0 + bnorm);
        let dinf = blocks_norm(&rd) / (1.0 + cnorm);
        let gap = libm::fabs(pobj - dobj) / (1.0 + libm::fabs(pobj) + libm::fabs(dobj));
        let comp = xz / (1.0 + libm::fabs(pobj) + libm::fabs(dobj));
        let accuracy = pinf.max(dinf).max(gap);
        if pinf <= settings.tol && dinf <= settings.tol && gap <= settings.tol && comp <= settings.tol {
            return Ok(SdpSolution {
                x,
                y,
                z,
                iterations: iter,
                accuracy,
                converged: true,
            });
        }
        if !(mu.is_finite() && pobj.is_finite() && dobj.is_finite()) {
            return fallback(best, SdpFailure::Numerical);
        }
        if best.as_ref().is_none_or(|b| accuracy < b.accuracy) {
            best = Some(SdpSolution {
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                iterations: iter,
                accuracy,
                converged: false,
            });
        } else if best.as_ref().is_some_and(|b| iter - b.iterations >= STALL) {
            return fallback(best, SdpFailure::IterationCap);
        }
        match step(&rows, &b, sizes, &mut x, &mut y, &mut z, &rd, mu, nf) {
            Ok(()) => {}
            Err(e) => return fallback(best, e),
        }
    }
    fallback(best, SdpFailure::IterationCap)
}

/// One predictor-corrector step in place.
#[allow(clippy::too_many_arguments)]
fn step(
    rows: &[Row],
    b: &[f64],
    sizes: &[usize],
    x: &mut [Mat],
    y: &mut [f64],
    z: &mut [Mat],
    rd: &[Mat],
    mu: f64,
    nf: f64,
) -> Result<(), SdpFailure> {
    let m = rows.len();
    let mut lz = Vec::with_capacity(z.len());
    let mut zi = Vec::with_capacity(z.len());
    for zb in z.iter() {
        let l = cholesky(zb).ok_or(SdpFailure::Numerical)?;
        let li = lower_inverse(&l);
        zi.push(li.transpose().matmul(&li).symmetrize());
        lz.push(l);
    }
    let mut lx = Vec::with_capacity(x.len());
    for xb in x.iter() {
        lx.push(cholesky(xb).ok_or(SdpFailure::Numerical)?);
    }

    // Schur complement M_kl = tr(A_k X A_l Z^-1).
    let mut schur = Mat::zeros(m, m);
    for k in 0..m {
        for l in k..m {
            let mut s = 0.0;
            for &(bk, p, q, a) in &rows[k].full {
                let xb = &x[bk];
                let zb = &zi[bk];
                for &(bl, r, t, cv) in &rows[l].full {
                    if bl == bk {
                        s += a * cv * xb[(q, r)] * zb[(t, p)];
                    }
                }
            }
            schur[(k, l)] = s;
            schur[(l, k)] = s;
        }
    }
    let schur_l = cholesky(&schur).or_else(|| {
        let reg = 1e-14 * (0..m).map(|i| schur[(i, i)]).fold(1e-300, f64::max);
        let mut s2 = schur.clone();
        for i in 0..m {
            s2[(i, i)] += reg;
        }
        cholesky(&s2)
    });
    let solve = |rhs: &[f64]| -> Option<Vec<f64>> {
        match &schur_l {
            Some(l) => Some(cholesky_solve(l, rhs)),
            None => lu_solve(&schur, rhs),
        }
    };

    let x_rd_zi: Vec<Mat> = blocks_mul(&blocks_mul(&x, &rd), &zi);
    let a_x_rd_zi = apply_a(&rows, &x_rd_zi);

    // Predictor.
    let rhs: Vec<f64> = (0..m).map(|k| b[k] + a_x_rd_zi[k]).collect();
    let dy = solve(&rhs).ok_or(SdpFailure::Numerical)?;
    let dz: Vec<Mat> = rd
        .iter()
        .zip(apply_at(&rows, &dy, sizes))
        .map(|(r, a)| r.sub(&a))
        .collect();
    let dx: Vec<Mat> = x
        .iter()
        .zip(&dz)
        .zip(&zi)
        .map(|((xb, dzb), zib)| xb.matmul(dzb).matmul(zib).add(xb).scale(-1.0).symmetrize())
        .collect();
    let ap = max_step(&lx, &dx).min(1.0);
    let ad = max_step(&lz, &dz).min(1.0);
    let mut xa = x.to_vec();
    let mut za = z.to_vec();
    for i in 0..xa.len() {
        xa[i].axpy(ap, &dx[i]);
        za[i].axpy(ad, &dz[i]);
    }
    let mu_aff = blocks_dot(&xa, &za) / nf;
    let sigma = libm::pow((mu_aff / mu).clamp(0.0, 1.0), 3.0);

    // Corrector.
    let dxdz_zi = blocks_mul(&blocks_mul(&dx, &dz), &zi);
    let a_corr = apply_a(&rows, &dxdz_zi);
    let a_zi = apply_a(&rows, &zi);
    let rhs: Vec<f64> = (0..m)
        .map(|k| b[k] - sigma * mu * a_zi[k] + a_x_rd_zi[k] + a_corr[k])
        .collect();
    let dy = solve(&rhs).ok_or(SdpFailure::Numerical)?;
    let dz: Vec<Mat> = rd
        .iter()
        .zip(apply_at(&rows, &dy, sizes))
        .map(|(r, a)| r.sub(&a))
        .collect();
    let mut dx = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut t = zi[i].scale(sigma * mu);
        t.axpy(-1.0, &x[i]);
        t.axpy(-1.0, &dxdz_zi[i]);
        t.axpy(-1.0, &x[i].matmul(&dz[i]).matmul(&zi[i]));
        dx.push(t.symmetrize());
    }
    let gamma = 0.95;
    let ap = (gamma * max_step(&lx, &dx)).min(1.0);
    let ad = (gamma * max_step(&lz, &dz)).min(1.0);
    for i in 0..x.len() {
        x[i].axpy(ap, &dx[i]);
        z[i].axpy(ad, &dz[i]);
    }
    for (yk, d) in y.iter_mut().zip(&dy) {
        *yk += ad * d;
    }
    Ok(())
}

/// Entries of `sum_k y_k A_k`.
pub fn adjoint(prob: &SdpProblem, y: &[f64]) -> Vec<Mat> {
    let rows: Vec<Row> = prob.constraints.iter().map(expand).collect();
    apply_at(&rows, y, &prob.blocks)
}

/// `max_k |<A_k, Q> - b_k|`.
pub fn residual(prob: &SdpProblem, q: &[Mat]) -> f64 {
    prob.constraints
        .iter()
        .map(|c| libm::fabs(inner(&expand(c), q) - c.rhs))
        .fold(0.0, f64::max)
}

fn sparse_dot(a: &Constraint, b: &Constraint) -> f64 {
    // Entries are few; a quadratic scan avoids building maps.
    let mut s = 0.0;
    for ea in &a.entries {
        for eb in &b.entries {
            if ea.block == eb.block && ea.i == eb.i && ea.j == eb.j {
                let w = if ea.i == ea.j { 1.0 } else { 2.0 };
                s += w * ea.value * eb.value;
            }
        }
    }
    s
}

/// Canonicalise entries: merge duplicates, orient `i <= j`, drop zeros.
fn canonical(c: &Constraint) -> Constraint {
    let mut es: Vec<Entry> = c
        .entries
        .iter()
        .map(|e| Entry {
            block: e.block,
            i: e.i.min(e.j),
            j: e.i.max(e.j),
            value: e.value,
        })
        .collect();
    es.sort_by(|a, b| (a.block, a.i, a.j).cmp(&(b.block, b.i, b.j)));
    let mut out: Vec<Entry> = Vec::with_capacity(es.len());
    for e in es {
        match out.last_mut() {
            Some(l) if (l.block, l.i, l.j) == (e.block, e.i, e.j) => l.value += e.value,
            _ => out.push(e),
        }
    }
    out.retain(|e| e.value != 0.0);
    Constraint {
        entries: out,
        rhs: c.rhs,
    }
}

enum Reduced {
    Rows { keep: Vec<usize>, scale: Vec<f64> },
    Inconsistent { y: Vec<f64> },
}

/// Drop linearly dependent rows; detect inconsistent ones.
fn reduce_rows(cons: &[Constraint], tol: f64) -> Reduced {
    let m = cons.len();
    let scale: Vec<f64> = cons.iter().map(|c| libm::sqrt(sparse_dot(c, c))).collect();
    let bmax = cons
        .iter()
        .zip(&scale)
        .map(|(c, s)| if *s > 0.0 { libm::fabs(c.rhs) / s } else { libm::fabs(c.rhs) })
        .fold(0.0, f64::max)
        .max(1.0);
    let mut keep: Vec<usize> = Vec::new();
    // Cholesky factor of the Gram matrix of the kept, unit-scaled rows.
    let mut l: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        if scale[k] == 0.0 {
            if libm::fabs(cons[k].rhs) > tol * bmax {
                let mut y = vec![0.0; m];
                y[k] = -libm::copysign(1.0, cons[k].rhs);
                return Reduced::Inconsistent { y };
            }
            continue;
        }
        let g: Vec<f64> = keep
            .iter()
            .map(|&j| sparse_dot(&cons[j], &cons[k]) / (scale[j] * scale[k]))
            .collect();
        let mut zv = vec![0.0; keep.len()];
        for i in 0..keep.len() {
            let mut s = g[i];
            for t in 0..i {
                s -= l[i][t] * zv[t];
            }
            zv[i] = s / l[i][i];
        }
        let d = 1.0 - zv.iter().map(|v| v * v).sum::<f64>();
        if d <= 1e-10 {
            // Dependent: unit row k = sum_j c_j unit row j with c = L^-T z.
            let mut cv = zv.clone();
            for i in (0..keep.len()).rev() {
                let mut s = cv[i];
                for t in i + 1..keep.len() {
                    s -= l[t][i] * cv[t];
                }
                cv[i] = s / l[i][i];
            }
            let bk = cons[k].rhs / scale[k];
            let pred: f64 = keep
                .iter()
                .zip(&cv)
                .map(|(&j, c)| c * cons[j].rhs / scale[j])
                .sum();
            let gap = bk - pred;
            if libm::fabs(gap) > 1e3 * tol * bmax {
                // y: +1 on row k, -c_j on rows j (unit scale), sign chosen so b^T y < 0.
                let sgn = -libm::copysign(1.0, gap);
                let mut y = vec![0.0; m];
                y[k] = sgn / scale[k];
                for (&j, c) in keep.iter().zip(&cv) {
                    y[j] = -sgn * c / scale[j];
                }
                return Reduced::Inconsistent { y };
            }
            continue;
        }
        zv.push(libm::sqrt(d));
        l.push(zv);
        keep.push(k);
    }
    Reduced::Rows { keep, scale }
}

/// Decide feasibility of `{Q psd : <A_k, Q> = b_k}`.
pub fn solve_feasibility(
    prob: &SdpProblem,
    settings: &SdpSettings,
    deadline: &dyn Deadline,
) -> Feasibility {
    let cons: Vec<Constraint> = prob.constraints.iter().map(canonical).collect();
    let prob = SdpProblem {
        blocks: prob.blocks.clone(),
        constraints: cons,
    };
    let m = prob.constraints.len();
    let nblocks = prob.blocks.len();
    let ntot: usize = prob.blocks.iter().sum();

    let (keep, scale) = match reduce_rows(&prob.constraints, 1e-9) {
        Reduced::Inconsistent { y } => return certify_farkas(&prob, y, f64::INFINITY),
        Reduced::Rows { keep, scale } => (keep, scale),
    };

    let bmax = keep
        .iter()
        .map(|&k| libm::fabs(prob.constraints[k].rhs) / scale[k])
        .fold(0.0, f64::max);
    if bmax == 0.0 {
        // Q = 0 is feasible.
        return Feasibility::Feasible(FeasiblePoint {
            blocks: prob.blocks.iter().map(|&n| Mat::zeros(n, n)).collect(),
            residual: 0.0,
            min_eig: 0.0,
        });
    }

    // Auxiliary problem in unit scale, Q = X + (1 - s) I:
    //   min s  s.t.  <A_k, X> - s <A_k, I> = b_k - <A_k, I>,  tr X + r = T,  X, s, r >= 0.
    let s_block = nblocks;
    let r_block = nblocks + 1;
    let mut sizes = prob.blocks.clone();
    sizes.push(1);
    sizes.push(1);
    let trace_bound = settings.trace_factor * (ntot as f64 + 1.0);
    let mut aux: Vec<Constraint> = Vec::with_capacity(keep.len() + 1);
    for &k in &keep {
        let c = &prob.constraints[k];
        let sk = scale[k];
        let a_i: f64 = c.entries.iter().filter(|e| e.i == e.j).map(|e| e.value).sum::<f64>() / sk;
        let mut entries: Vec<Entry> = c
            .entries
            .iter()
            .map(|e| Entry {
                value: e.value / sk,
                ..*e
            })
            .collect();
        if a_i != 0.0 {
            entries.push(Entry {
                block: s_block,
                i: 0,
                j: 0,
                value: -a_i,
            });
        }
        aux.push(Constraint {
            entries,
            rhs: c.rhs / sk / bmax - a_i,
        });
    }
    let mut tr_entries: Vec<Entry> = Vec::with_capacity(ntot + 1);
    for (b, &n) in prob.blocks.iter().enumerate() {
        for i in 0..n {
            tr_entries.push(Entry {
                block: b,
                i,
                j: i,
                value: 1.0,
            });
        }
    }
    tr_entries.push(Entry {
        block: r_block,
        i: 0,
        j: 0,
        value: 1.0,
    });
    aux.push(Constraint {
        entries: tr_entries,
        rhs: trace_bound,
    });
    let mut cmat: Vec<Mat> = sizes.iter().map(|&n| Mat::zeros(n, n)).collect();
    cmat[s_block][(0, 0)] = 1.0;

    let sol = match solve_standard(&sizes, &aux, &cmat, settings, deadline) {
        Ok(s) => s,
        Err(e) => return Feasibility::Unknown(e),
    };
    let s = sol.x[s_block][(0, 0)];
    let r = sol.x[r_block][(0, 0)];
    let t = 1.0 - s;
    // Thresholds follow the accuracy actually reached; callers replay
    // feasible points and certify Farkas vectors independently.
    let feas_tol = 1e-8f64.max(10.0 * sol.accuracy);

    if t >= -feas_tol {
        let mut blocks = Vec::with_capacity(nblocks);
        for b in 0..nblocks {
            let mut q = sol.x[b].clone();
            for i in 0..q.rows() {
                q[(i, i)] += t;
            }
            blocks.push(q.scale(bmax).symmetrize());
        }
        let min_eig = blocks
            .iter()
            .filter(|q| q.rows() > 0)
            .map(min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        let residual = residual(&prob, &blocks);
        return Feasibility::Feasible(FeasiblePoint {
            blocks,
            residual,
            min_eig: if min_eig.is_finite() { min_eig } else { 0.0 },
        });
    }
    if t < -10.0 * feas_tol && r > 1e-3 * trace_bound {
        // Map the dual multipliers of the kept rows back to the original rows.
        let mut y = vec![0.0; m];
        for (idx, &k) in keep.iter().enumerate() {
            y[k] = -sol.y[idx] / scale[k];
        }
        return certify_farkas(&prob, y, trace_bound * bmax);
    }
    Feasibility::Unknown(SdpFailure::Numerical)
}

/// Validate a Farkas candidate: normalise to `tr(sum y_k A_k) = 1` and require
/// `b^T y < 0` with the psd violation too small to matter within trace `bound`.
fn certify_farkas(prob: &SdpProblem, y: Vec<f64>, bound: f64) -> Feasibility {
    let e = adjoint(prob, &y);
    let tr: f64 = e.iter().map(Mat::trace).sum();
    let norm = if tr > 0.0 { tr } else { 1.0 };
    let y: Vec<f64> = y.iter().map(|v| v / norm).collect();
    let value: f64 = prob.constraints.iter().zip(&y).map(|(c, v)| c.rhs * v).sum();
    let min_eig = e
        .iter()
        .filter(|b| b.rows() > 0)
        .map(|b| min_eigenvalue(&b.scale(1.0 / norm)))
        .fold(f64::INFINITY, f64::min);
    let min_eig = if min_eig.is_finite() { min_eig } else { 0.0 };
    let violation = if bound.is_finite() { (-min_eig).max(0.0) * bound } else if min_eig < -1e-12 { f64::INFINITY } else { 0.0 };
    if value < 0.0 && violation <= 0.5 * libm::fabs(value) {
        Feasibility::Infeasible(Farkas { y, value, min_eig })
    } else {
        Feasibility::Unknown(SdpFailure::Numerical)
    }
}

/// Projection of a symmetric matrix onto the psd cone.
pub fn psd_projection(a: &Mat) -> Mat {
    let (vals, vecs) = sym_eigen(a);
    let n = a.rows();
    let mut out = Mat::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += lam * vecs[(i, k)] * vecs[(j, k)];
            }
        }
    }
    out
}
