//! Infeasible-start primal-dual interior-point method with the
//! Nesterov-Todd search direction and Mehrotra predictor-corrector steps.
//!
//! Each iteration works in scaled coordinates where both `X_b` and `Z_b`
//! become the same diagonal matrix. The Newton system then reads
//! `BᵀB dy − Aᵀ dw = g`, `A dy = rb`, where column `i` of `B` stacks
//! `G_bᵀ F_{b,i} G_b`. `B` is block diagonal over groups of variables that
//! share a block; each group is factored by QR, and the equality constraints
//! are eliminated through the small matrix `A (BᵀB)⁻¹ Aᵀ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{accumulate, inner, BlockProblem, SolveReport, SolveStatus, SymEntry};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative duality gap and absolute residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Initial iterates are `X_b = Z_b = initial_scale · I`, `y = 0`, `λ = 0`.
    pub initial_scale: f64,
    /// Norm beyond which iterates are declared divergent.
    pub divergence: f64,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.95,
            initial_scale: 1.0,
            divergence: 1e10,
            verbose: false,
        }
    }
}

/// Solves with default options and the given tolerance.
pub fn solve(p: &BlockProblem, tol: f64) -> Result<SolveReport> {
    solve_with(
        p,
        &SolverOptions {
            tol,
            ..Default::default()
        },
    )
}

type Entries = Vec<(usize, usize, f64)>;

/// Full (both triangles) entry list of a symmetric sparse matrix.
fn full_entries(f: &[SymEntry]) -> Entries {
    let mut out = Vec::with_capacity(2 * f.len());
    for e in f {
        out.push((e.row, e.col, e.value));
        if e.row != e.col {
            out.push((e.col, e.row, e.value));
        }
    }
    out
}

struct BlockData {
    size: usize,
    vars: Vec<usize>,
    full: Vec<Entries>,
    sparse: Vec<Vec<SymEntry>>,
    constant: DMatrix<f64>,
}

/// Variables coupled through shared blocks, with the blocks they touch and
/// the row offset of each block in the stacked scaled basis.
struct Cluster {
    vars: Vec<usize>,
    blocks: Vec<(usize, usize)>,
    rows: usize,
}

struct Workspace {
    blocks: Vec<BlockData>,
    clusters: Vec<Cluster>,
    /// `(cluster, position within cluster)` per variable.
    slot: Vec<(usize, usize)>,
    /// Kept equality rows and their right-hand sides.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    kept: Vec<usize>,
    n: usize,
    /// Factored `[Σ_b F_{b,i}•F_{b,j}]` per cluster.
    basis_gram: Vec<Cholesky<f64, Dyn>>,
    /// Factored `A Aᵀ`.
    row_gram: Option<Cholesky<f64, Dyn>>,
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

fn svec_len(size: usize) -> usize {
    size * (size + 1) / 2
}

/// Writes the symmetric `m` as `(m_ij √2 for i < j, m_ii)` column by column,
/// so that dot products of vectors equal trace inner products.
fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let mut k = 0;
    for j in 0..m.ncols() {
        for i in 0..j {
            out[k] = std::f64::consts::FRAC_1_SQRT_2 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
        out[k] = m[(j, j)];
        k += 1;
    }
}

fn smat(v: &[f64], size: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(size, size);
    let mut k = 0;
    for j in 0..size {
        for i in 0..j {
            let x = std::f64::consts::FRAC_1_SQRT_2 * v[k];
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
        m[(j, j)] = v[k];
        k += 1;
    }
    m
}

fn nonsingular_upper(r: &DMatrix<f64>) -> bool {
    let scale = r.diagonal().amax();
    scale > 0.0 && scale.is_finite() && r.diagonal().iter().all(|d| d.abs() > 1e-15 * scale)
}

impl Workspace {
    fn new(p: &BlockProblem) -> Result<Option<Self>> {
        let n = p.num_vars;
        let mut parent: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::with_capacity(p.blocks.len());
        for b in &p.blocks {
            let vars: Vec<usize> = b.terms.iter().map(|t| t.0).collect();
            for w in vars.windows(2) {
                let (r0, r1) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if r0 != r1 {
                    parent[r0.max(r1)] = r0.min(r1);
                }
            }
            let mut constant = DMatrix::zeros(b.size, b.size);
            accumulate(&mut constant, &b.constant, 1.0);
            blocks.push(BlockData {
                size: b.size,
                vars,
                full: b.terms.iter().map(|t| full_entries(&t.1)).collect(),
                sparse: b.terms.iter().map(|t| t.1.clone()).collect(),
                constant,
            });
        }
        let mut root_to_cluster = vec![usize::MAX; n];
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut slot = vec![(0, 0); n];
        for v in 0..n {
            let r = find(&mut parent, v);
            if root_to_cluster[r] == usize::MAX {
                root_to_cluster[r] = clusters.len();
                clusters.push(Cluster {
                    vars: Vec::new(),
                    blocks: Vec::new(),
                    rows: 0,
                });
            }
            let c = root_to_cluster[r];
            slot[v] = (c, clusters[c].vars.len());
            clusters[c].vars.push(v);
        }
        for (k, bd) in blocks.iter().enumerate() {
            if let Some(&v) = bd.vars.first() {
                let c = &mut clusters[slot[v].0];
                c.blocks.push((k, c.rows));
                c.rows += svec_len(bd.size);
            }
        }

        // Drop linearly dependent equality rows (modified Gram-Schmidt).
        let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut kept = Vec::new();
        for (k, r) in p.equalities.iter().enumerate() {
            let mut a = DVector::zeros(n);
            for &(v, c) in &r.entries {
                a[v] += c;
            }
            let norm0 = a.norm();
            let mut beta = r.rhs;
            for (q, qb) in &basis {
                let t = q.dot(&a);
                a.axpy(-t, q, 1.0);
                beta -= t * qb;
            }
            let norm = a.norm();
            if norm <= 1e-10 * norm0.max(1.0) {
                if beta.abs() > 1e-9 * (1.0 + r.rhs.abs()) {
                    return Ok(None);
                }
                continue;
            }
            basis.push((a / norm, beta / norm));
            let mut merged: Vec<(usize, f64)> = Vec::new();
            for &(v, c) in &r.entries {
                match merged.iter_mut().find(|e| e.0 == v) {
                    Some(e) => e.1 += c,
                    None => merged.push((v, c)),
                }
            }
            rows.push(merged);
            rhs.push(r.rhs);
            kept.push(k);
        }
        let mut gram: Vec<DMatrix<f64>> = clusters
            .iter()
            .map(|c| DMatrix::zeros(c.vars.len(), c.vars.len()))
            .collect();
        for bd in &blocks {
            for (j, fj) in bd.full.iter().enumerate() {
                let mut dense = DMatrix::<f64>::zeros(bd.size, bd.size);
                for &(r, c, v) in fj {
                    dense[(r, c)] += v;
                }
                let (cj, sj) = slot[bd.vars[j]];
                for (i, fi) in bd.sparse.iter().enumerate() {
                    let (_, si) = slot[bd.vars[i]];
                    gram[cj][(si, sj)] += inner(fi, &dense);
                }
            }
        }
        let basis_gram = gram
            .into_iter()
            .map(Cholesky::new)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Error::InvalidProblem(
                    "basis matrices of a variable group are linearly dependent".into(),
                )
            })?;
        let row_gram = if rows.is_empty() {
            None
        } else {
            let mut dense = DMatrix::<f64>::zeros(rows.len(), n);
            for (k, r) in rows.iter().enumerate() {
                for &(v, c) in r {
                    dense[(k, v)] += c;
                }
            }
            Cholesky::new(&dense * dense.transpose())
        };
        Ok(Some(Workspace {
            blocks,
            clusters,
            slot,
            rows,
            rhs,
            kept,
            n,
            basis_gram,
            row_gram,
        }))
    }

    /// `Σ_v y_v F_v` for one block.
    fn linear(&self, b: usize, y: &DVector<f64>) -> DMatrix<f64> {
        let bd = &self.blocks[b];
        let mut m = DMatrix::zeros(bd.size, bd.size);
        for (k, &v) in bd.vars.iter().enumerate() {
            let s = y[v];
            if s != 0.0 {
                for &(r, c, val) in &bd.full[k] {
                    m[(r, c)] += s * val;
                }
            }
        }
        m
    }

    /// `Σ_b F_{b,v} • M_b`, scattered over variables.
    fn adjoint(&self, mats: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (bd, m) in self.blocks.iter().zip(mats) {
            for (k, &v) in bd.vars.iter().enumerate() {
                out[v] += inner(&bd.sparse[k], m);
            }
        }
        out
    }

    fn a_times(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|r| r.iter().map(|&(v, c)| c * y[v]).sum()),
        )
    }

    fn at_times(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (r, wk) in self.rows.iter().zip(w.iter()) {
            for &(v, c) in r {
                out[v] += c * wk;
            }
        }
        out
    }

    fn gather(&self, c: &Cluster, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(c.vars.len(), c.vars.iter().map(|&i| v[i]))
    }

    /// Least-norm `ΔX` with `Σ_b F_{b,v}•ΔX_b = res_v`.
    fn dual_correction(&self, res: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut coef = DVector::zeros(self.n);
        for (c, ch) in self.clusters.iter().zip(&self.basis_gram) {
            let sol = ch.solve(&self.gather(c, res));
            for (k, &v) in c.vars.iter().enumerate() {
                coef[v] = sol[k];
            }
        }
        (0..self.blocks.len())
            .map(|k| self.linear(k, &coef))
            .collect()
    }

    /// Least-norm `Δy` with `A Δy = res`, added to `dy`.
    fn project_primal(&self, dy: &mut DVector<f64>, res: &DVector<f64>) {
        if let Some(ch) = &self.row_gram {
            let t = ch.solve(res);
            *dy += self.at_times(&t);
        }
    }

    /// Stacked scaled basis `B` per cluster: column `i` holds
    /// `svec(G_bᵀ F_{b,i} G_b)` for every block of the cluster.
    fn scaled_basis(&self, g: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        self.clusters
            .iter()
            .map(|c| {
                let mut bm = DMatrix::<f64>::zeros(c.rows.max(c.vars.len()), c.vars.len());
                let mut buf = Vec::new();
                for &(k, offset) in &c.blocks {
                    let bd = &self.blocks[k];
                    let gt = g[k].transpose();
                    buf.resize(svec_len(bd.size), 0.0);
                    let mut acc = DMatrix::<f64>::zeros(bd.size, bd.size);
                    for (t, &v) in bd.vars.iter().enumerate() {
                        // Gᵀ F G = A + Aᵀ with A = Σ_e v_e g_r g_cᵀ over the
                        // stored entries, diagonal ones at half weight.
                        acc.fill(0.0);
                        for e in &bd.sparse[t] {
                            let w = if e.row == e.col {
                                0.5 * e.value
                            } else {
                                e.value
                            };
                            acc.ger(w, &gt.column(e.row), &gt.column(e.col), 1.0);
                        }
                        let mat = &acc + acc.transpose();
                        svec_into(&mat, &mut buf);
                        bm.view_mut((offset, self.slot[v].1), (buf.len(), 1))
                            .copy_from_slice(&buf);
                    }
                }
                bm
            })
            .collect()
    }

    /// `Bᵀ svec(M)`, scattered over variables.
    fn bt_apply(&self, bmat: &[DMatrix<f64>], mats: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        let mut buf = Vec::new();
        for (c, bm) in self.clusters.iter().zip(bmat) {
            let mut v = DVector::zeros(bm.nrows());
            for &(k, offset) in &c.blocks {
                buf.resize(svec_len(self.blocks[k].size), 0.0);
                svec_into(&mats[k], &mut buf);
                v.rows_mut(offset, buf.len()).copy_from_slice(&buf);
            }
            let local = bm.tr_mul(&v);
            for (k, &var) in c.vars.iter().enumerate() {
                out[var] = local[k];
            }
        }
        out
    }

    /// `smat(B y)` per block; blocks without variables get zero.
    fn b_apply(&self, bmat: &[DMatrix<f64>], y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.size, b.size))
            .collect();
        for (c, bm) in self.clusters.iter().zip(bmat) {
            let v = bm * self.gather(c, y);
            for &(k, offset) in &c.blocks {
                let len = svec_len(self.blocks[k].size);
                out[k] = smat(&v.as_slice()[offset..offset + len], self.blocks[k].size);
            }
        }
        out
    }

    /// Applies `R⁻ᵀ` (`transpose = true`) or `R⁻¹` cluster by cluster.
    fn r_solve(&self, r: &[DMatrix<f64>], v: &DVector<f64>, transpose: bool) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (c, rc) in self.clusters.iter().zip(r) {
            let local = self.gather(c, v);
            let sol = if transpose {
                rc.tr_solve_upper_triangular(&local)
            } else {
                rc.solve_upper_triangular(&local)
            }
            .expect("nonsingular triangular factor");
            for (k, &var) in c.vars.iter().enumerate() {
                out[var] = sol[k];
            }
        }
        out
    }
}

/// Nesterov-Todd scaling of one block: `G` and `λ` with `Gᵀ Z G = G⁻¹ X G⁻ᵀ
/// = diag(λ)`, together with `G⁻¹`.
struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl Scaling {
    fn new(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Self> {
        let lx = Cholesky::new(x.clone())?.l();
        let lz = Cholesky::new(z.clone())?.l();
        let svd = (lx.transpose() * lz).svd(true, false);
        let u = svd.u?;
        let lambda = svd.singular_values;
        if lambda.iter().any(|s| !(*s > 0.0)) {
            return None;
        }
        let mut g = &lx * &u;
        for (j, s) in lambda.iter().enumerate() {
            g.column_mut(j).scale_mut(1.0 / s.sqrt());
        }
        let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(x.nrows(), x.nrows()))?;
        let mut g_inv = u.transpose() * lx_inv;
        for (i, s) in lambda.iter().enumerate() {
            g_inv.row_mut(i).scale_mut(s.sqrt());
        }
        Some(Scaling { g, g_inv, lambda })
    }

    /// `Gᵀ M G`.
    fn to_scaled_primal(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        sym(&(self.g.transpose() * m * &self.g))
    }

    /// `G⁻¹ M G⁻ᵀ`.
    fn to_scaled_dual(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        sym(&(&self.g_inv * m * self.g_inv.transpose()))
    }

    /// `G M Gᵀ`.
    fn from_scaled_dual(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        sym(&(&self.g * m * self.g.transpose()))
    }

    /// Largest `α` with `diag(λ) + α D ⪰ 0` (infinite if unbounded).
    fn max_step(&self, d: &DMatrix<f64>) -> f64 {
        let n = self.lambda.len();
        let s = DMatrix::from_fn(n, n, |i, j| {
            d[(i, j)] / (self.lambda[i] * self.lambda[j]).sqrt()
        });
        let min = sym(&s)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / min
        }
    }

    /// Solves `diag(λ) ∘ D = rhs` for the symmetrized product `∘`.
    fn lyapunov(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.lambda.len();
        DMatrix::from_fn(n, n, |i, j| {
            2.0 * rhs[(i, j)] / (self.lambda[i] + self.lambda[j])
        })
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn inf_norm(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

struct Iterate {
    y: DVector<f64>,
    w: DVector<f64>,
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    rel_gap: f64,
}

/// Search direction in scaled coordinates.
struct Direction {
    dy: DVector<f64>,
    dw: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
}

pub fn solve_with(p: &BlockProblem, opts: &SolverOptions) -> Result<SolveReport> {
    if !(opts.tol >= 1e-10) {
        return Err(Error::InvalidProblem(format!(
            "tolerance {} below 1e-10",
            opts.tol
        )));
    }
    p.validate()?;
    let Some(ws) = Workspace::new(p)? else {
        return Ok(infeasible_report(p));
    };
    let n = ws.n;
    let m = ws.rows.len();
    let nb = ws.blocks.len();
    let big_n: usize = ws.blocks.iter().map(|b| b.size).sum();
    let c = DVector::from_column_slice(&p.objective);
    let f = -&c;
    let b = DVector::from_column_slice(&ws.rhs);

    let s0 = opts.initial_scale;
    let mut it = Iterate {
        y: DVector::zeros(n),
        w: DVector::zeros(m),
        x: ws
            .blocks
            .iter()
            .map(|b| DMatrix::identity(b.size, b.size) * s0)
            .collect(),
        z: ws
            .blocks
            .iter()
            .map(|b| DMatrix::identity(b.size, b.size) * s0)
            .collect(),
    };

    let measure = |it: &Iterate| -> (Measures, Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>) {
        let rp: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| ws.linear(k, &it.y) - &ws.blocks[k].constant - &it.z[k])
            .collect();
        let rb = &b - ws.a_times(&it.y);
        let rd = &f - ws.adjoint(&it.x) - ws.at_times(&it.w);
        let pobj = c.dot(&it.y);
        let f0x: f64 = ws
            .blocks
            .iter()
            .zip(&it.x)
            .map(|(bd, x)| dot(&bd.constant, x))
            .sum();
        let dobj = -(f0x + b.dot(&it.w));
        let pinf =
            inf_norm(rp.iter().flat_map(|r| r.iter().copied())).max(inf_norm(rb.iter().copied()));
        let dinf = inf_norm(rd.iter().copied());
        let rel_gap = (dobj - pobj).abs() / (1.0 + pobj.abs());
        (
            Measures {
                pobj,
                dobj,
                pinf,
                dinf,
                rel_gap,
            },
            rp,
            rb,
            rd,
        )
    };

    let mut status = SolveStatus::NumericalTrouble;
    let mut iterations = 0;
    let mut best: Option<(f64, Iterate)> = None;
    let score = |m: &Measures| m.rel_gap.max(m.pinf).max(m.dinf);

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let (ms, rp, rb, rd) = measure(&it);
        if opts.verbose {
            eprintln!(
                "{iter:3} pobj {:+.10e} dobj {:+.10e} gap {:.2e} pinf {:.2e} dinf {:.2e}",
                ms.pobj, ms.dobj, ms.rel_gap, ms.pinf, ms.dinf
            );
        }
        debug_assert!({
            // dobj − pobj = Σ X•Z + rdᵀy + Σ X•Rp − wᵀrb, so the gap net of
            // residual terms is never negative.
            let xz: f64 = it.x.iter().zip(&it.z).map(|(x, z)| dot(x, z)).sum();
            let resid = rd.dot(&it.y) + it.x.iter().zip(&rp).map(|(x, r)| dot(x, r)).sum::<f64>()
                - it.w.dot(&rb);
            let net = ms.dobj - ms.pobj - resid;
            (net - xz).abs() <= 1e-8 * (1.0 + xz.abs() + ms.pobj.abs() + resid.abs())
                && xz >= -1e-12
        });
        if ms.rel_gap <= opts.tol
            && ms.pinf <= opts.tol
            && ms.dinf <= opts.tol
            && ms.dobj >= ms.pobj - opts.tol
        {
            status = SolveStatus::Optimal;
            break;
        }
        let sc = score(&ms);
        if best.as_ref().map_or(true, |(s, _)| sc < *s) {
            best = Some((
                sc,
                Iterate {
                    y: it.y.clone(),
                    w: it.w.clone(),
                    x: it.x.clone(),
                    z: it.z.clone(),
                },
            ));
        }
        if iter == opts.max_iter {
            break;
        }
        let xnorm =
            it.x.iter()
                .map(|x| inf_norm(x.iter().copied()))
                .fold(0.0, f64::max);
        if xnorm.max(inf_norm(it.w.iter().copied())) > opts.divergence
            || inf_norm(it.y.iter().copied()) > opts.divergence
        {
            status = SolveStatus::Infeasible;
            break;
        }

        let mu: f64 = it.x.iter().zip(&it.z).map(|(x, z)| dot(x, z)).sum::<f64>() / big_n as f64;
        let Some(sc): Option<Vec<Scaling>> =
            it.x.iter()
                .zip(&it.z)
                .map(|(x, z)| Scaling::new(x, z))
                .collect()
        else {
            break;
        };
        let gs: Vec<DMatrix<f64>> = sc.iter().map(|s| s.g.clone()).collect();
        let bmat = ws.scaled_basis(&gs);
        let rfac: Vec<DMatrix<f64>> = bmat.iter().map(|bm| bm.clone().qr().r()).collect();
        if !rfac.iter().all(nonsingular_upper) {
            break;
        }
        let rps: Vec<DMatrix<f64>> = (0..nb).map(|k| sc[k].to_scaled_primal(&rp[k])).collect();
        // Equalities are eliminated through A H⁻¹ Aᵀ = CᵀC with C = R⁻ᵀAᵀ,
        // H = BᵀB = RᵀR.
        let (kat, eq_r) = if m > 0 {
            let mut cmat = DMatrix::zeros(n, m);
            for k in 0..m {
                let mut a = DVector::zeros(n);
                for &(v, cv) in &ws.rows[k] {
                    a[v] += cv;
                }
                cmat.set_column(k, &ws.r_solve(&rfac, &a, true));
            }
            let mut kat = DMatrix::zeros(n, m);
            for k in 0..m {
                kat.set_column(k, &ws.r_solve(&rfac, &cmat.column(k).clone_owned(), false));
            }
            let rc = cmat.qr().r();
            if !nonsingular_upper(&rc) {
                break;
            }
            (kat, Some(rc))
        } else {
            (DMatrix::zeros(n, 0), None)
        };
        let reduced = |g: &DVector<f64>, r: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
            let kg = ws.r_solve(&rfac, &ws.r_solve(&rfac, g, true), false);
            match &eq_r {
                Some(rc) => {
                    let rhs = r - ws.a_times(&kg);
                    let t = rc.tr_solve_upper_triangular(&rhs).expect("nonsingular");
                    let dw = rc.solve_upper_triangular(&t).expect("nonsingular");
                    (&kg + &kat * &dw, dw)
                }
                None => (kg, DVector::zeros(0)),
            }
        };

        // Given the scaled target `D = dX̃ + dZ̃`, solves
        // Bᵀ(D − R̃p − B dy) + Aᵀdw = rd and A dy = rb.
        let direction = |target: &[DMatrix<f64>]| -> Direction {
            let r: Vec<DMatrix<f64>> = target.iter().zip(&rps).map(|(t, q)| t - q).collect();
            let g = ws.bt_apply(&bmat, &r) - &rd;
            let (mut dy, mut dw) = reduced(&g, &rb);
            for _ in 0..2 {
                let r1 = &g + ws.at_times(&dw) - ws.bt_apply(&bmat, &ws.b_apply(&bmat, &dy));
                let r2 = &rb - ws.a_times(&dy);
                let (ey, ew) = reduced(&r1, &r2);
                dy += ey;
                dw += ew;
            }
            if m > 0 {
                let res = &rb - ws.a_times(&dy);
                ws.project_primal(&mut dy, &res);
            }
            let bdy = ws.b_apply(&bmat, &dy);
            let dz: Vec<DMatrix<f64>> = (0..nb).map(|k| &bdy[k] + &rps[k]).collect();
            let mut dx: Vec<DMatrix<f64>> = (0..nb).map(|k| &target[k] - &dz[k]).collect();
            // Round-off would otherwise accumulate in the dual residual, which
            // must shrink exactly by (1 − α) per step.
            let orig: Vec<DMatrix<f64>> = (0..nb).map(|k| sc[k].from_scaled_dual(&dx[k])).collect();
            let res = &rd - ws.adjoint(&orig) - ws.at_times(&dw);
            for (k, corr) in ws.dual_correction(&res).iter().enumerate() {
                dx[k] += sc[k].to_scaled_dual(corr);
            }
            Direction { dy, dw, dx, dz }
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let ap = (0..nb)
                .map(|k| sc[k].max_step(&d.dz[k]))
                .fold(f64::INFINITY, f64::min);
            let ad = (0..nb)
                .map(|k| sc[k].max_step(&d.dx[k]))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // Predictor: target −diag(λ).
        let target: Vec<DMatrix<f64>> = sc
            .iter()
            .map(|s| -DMatrix::from_diagonal(&s.lambda))
            .collect();
        let pred = direction(&target);
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff: f64 = (0..nb)
            .map(|k| {
                let v = DMatrix::from_diagonal(&sc[k].lambda);
                dot(&(&v + &pred.dx[k] * ad), &(&v + &pred.dz[k] * ap))
            })
            .sum::<f64>()
            / big_n as f64;
        let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powf(expon);

        // Corrector: λ ∘ (dX̃ + dZ̃) = σμI − λ² − dX̃ₐ ∘ dZ̃ₐ.
        let target: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| {
                let lam = &sc[k].lambda;
                let mut rhs = -sym(&(&pred.dx[k] * &pred.dz[k]));
                for i in 0..lam.len() {
                    rhs[(i, i)] += sigma * mu - lam[i] * lam[i];
                }
                sc[k].lyapunov(&rhs)
            })
            .collect();
        let d = direction(&target);
        let (ap, ad) = steps(&d);
        let gamma = opts.step_fraction.max(0.9 + 0.09 * ap.min(ad).min(1.0));
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if opts.verbose {
            eprintln!("    mu {mu:.2e} sigma {sigma:.2e} ap {ap:.2e} ad {ad:.2e}");
        }
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        it.y.axpy(ap, &d.dy, 1.0);
        it.w.axpy(ad, &d.dw, 1.0);
        for k in 0..nb {
            it.z[k] += (ws.linear(k, &d.dy) + &rp[k]) * ap;
            it.x[k] += sc[k].from_scaled_dual(&d.dx[k]) * ad;
        }
    }

    if status == SolveStatus::NumericalTrouble {
        if let Some((_, b)) = best {
            it = b;
        }
        let (ms, ..) = measure(&it);
        if ms.rel_gap <= 1e-6 && ms.pinf <= 1e-6 && ms.dinf <= 1e-6 {
            status = SolveStatus::NearOptimal;
        }
    }
    let (ms, ..) = measure(&it);
    let mut multipliers = vec![0.0; p.equalities.len()];
    for (k, &orig) in ws.kept.iter().enumerate() {
        multipliers[orig] = -it.w[k];
    }
    Ok(SolveReport {
        status,
        primal_objective: ms.pobj,
        dual_objective: ms.dobj,
        gap: ms.dobj - ms.pobj,
        relative_gap: ms.rel_gap,
        primal_infeasibility: ms.pinf,
        dual_infeasibility: ms.dinf,
        iterations,
        variables: it.y.iter().copied().collect(),
        multipliers,
        dual_matrices: it.x,
    })
}

fn infeasible_report(p: &BlockProblem) -> SolveReport {
    SolveReport {
        status: SolveStatus::Infeasible,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        gap: f64::NAN,
        relative_gap: f64::NAN,
        primal_infeasibility: f64::INFINITY,
        dual_infeasibility: f64::NAN,
        iterations: 0,
        variables: vec![0.0; p.num_vars],
        multipliers: vec![0.0; p.equalities.len()],
        dual_matrices: p
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.size, b.size))
            .collect(),
    }
}
