//! Primal-dual interior-point solver for linear matrix inequalities.
//!
//! Problems arrive as "minimize `c·y + c₀` subject to affine blocks
//! `F_k(y) ⪰ 0` and linear equalities". Equalities are eliminated first; the
//! remaining free variables `z` define
//!
//! ```text
//!   (D)  min  c·z        s.t.  Z = F₀ + Σ z_i F_i ⪰ 0
//!   (P)  max −⟨F₀, X⟩   s.t.  ⟨F_i, X⟩ = c_i,  X ⪰ 0
//! ```
//!
//! and any feasible `X` certifies `c·z ≥ −⟨F₀, X⟩`. Iterations follow the
//! infeasible-start HKM direction with a Mehrotra predictor-corrector step;
//! all blocks are dense and the Schur complement is formed from the sparse
//! coefficient patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use faer::{Mat, Side};
use log::debug;
use serde::{Deserialize, Serialize};

use super::{SdpProblem, SolveStatus};
use crate::error::{Error, Result};
use crate::moments::{LinearFunctional, VarId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Relative primal/dual residual accepted as feasible.
    pub feasibility_tol: f64,
    /// Relative duality gap accepted as optimal.
    pub gap_tol: f64,
    /// Looser thresholds reported as near-optimal when the strict ones are
    /// not reached.
    pub near_feasibility_tol: f64,
    pub near_gap_tol: f64,
    /// Threshold for the normalized infeasibility certificates.
    pub infeasibility_tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Limits guarding memory: the Schur complement is dense.
    pub max_variables: usize,
    pub max_block_dim: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-8,
            gap_tol: 1e-7,
            near_feasibility_tol: 1e-6,
            near_gap_tol: 1e-5,
            infeasibility_tol: 1e-8,
            max_iterations: 120,
            step_fraction: 0.95,
            max_variables: 12_000,
            max_block_dim: 2_000,
        }
    }
}

/// Prefix of the environment variables overriding individual options, e.g.
/// `BOXCERT_GAP_TOL=1e-8`.
pub const ENV_PREFIX: &str = "BOXCERT_";

impl SolverOptions {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Applies `BOXCERT_<FIELD>` overrides; values are parsed as JSON.
    pub fn with_env_overrides(&self) -> Result<Self> {
        self.with_overrides(|key| std::env::var(format!("{ENV_PREFIX}{}", key.to_uppercase())).ok())
    }

    pub fn with_overrides<F: Fn(&str) -> Option<String>>(&self, lookup: F) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            for (key, slot) in map.iter_mut() {
                if let Some(raw) = lookup(key) {
                    *slot = serde_json::from_str(&raw).map_err(|e| {
                        Error::InvalidParameter(format!("option {key}: cannot parse '{raw}': {e}"))
                    })?;
                }
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Stricter tolerances for points on the boundary of the quantum set.
    pub fn tightened(&self) -> Self {
        SolverOptions {
            feasibility_tol: self.feasibility_tol * 0.1,
            gap_tol: self.gap_tol * 0.1,
            max_iterations: self.max_iterations + 60,
            step_fraction: self.step_fraction.max(0.98),
            ..self.clone()
        }
    }
}

/// Result of one solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub status: SolveStatus,
    /// Lower bound `c₀ − ⟨F₀, X⟩` from the certificate `X`; equals the
    /// relaxation minimum at optimality.
    pub value: f64,
    /// Objective at the moment iterate, `c₀ + c·z`.
    pub moment_objective: f64,
    /// Moment values by variable id (identity pinned to one).
    pub moments: Vec<f64>,
    /// Certificate blocks `X_k`, row-major.
    pub dual_certificate: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
    pub seconds: f64,
}

/// Abstract solver contract: linear objective, affine PSD blocks, equalities.
pub trait ConicSolver {
    fn solve(&self, problem: &SdpProblem) -> Result<Solution>;
}

/// Dense interior-point solver.
#[derive(Clone, Debug, Default)]
pub struct InteriorPointSolver {
    pub options: SolverOptions,
}

impl InteriorPointSolver {
    pub fn new(options: SolverOptions) -> Self {
        InteriorPointSolver { options }
    }
}

impl ConicSolver for InteriorPointSolver {
    fn solve(&self, problem: &SdpProblem) -> Result<Solution> {
        solve_problem(problem, &self.options)
    }
}

// ---------------------------------------------------------------------------
// Equality elimination

struct Reduction {
    /// Original ids of the remaining free variables.
    free: Vec<VarId>,
    /// Eliminated variables as functionals of the free ones.
    substitutions: BTreeMap<VarId, LinearFunctional>,
    objective: LinearFunctional,
    blocks: Vec<(usize, Vec<LinearFunctional>)>,
}

enum Reduced {
    Ok(Reduction),
    Infeasible(String),
}

fn substitute(f: &LinearFunctional, subs: &BTreeMap<VarId, LinearFunctional>) -> LinearFunctional {
    if f.terms().all(|(id, _)| !subs.contains_key(&id)) {
        return f.clone();
    }
    let mut out = LinearFunctional::constant(f.constant);
    for (id, c) in f.terms() {
        match subs.get(&id) {
            Some(g) => out.add_scaled(g, c),
            None => out.add(id, c),
        }
    }
    out.pruned(1e-15)
}

fn reduce(problem: &SdpProblem) -> Reduced {
    let mut subs: BTreeMap<VarId, LinearFunctional> = BTreeMap::new();
    for eq in &problem.equalities {
        let f = substitute(&eq.functional, &subs);
        let scale = f.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
        let rhs = eq.value - f.constant;
        if scale <= 1e-12 {
            if rhs.abs() > 1e-9 * (1.0 + eq.value.abs()) {
                return Reduced::Infeasible(format!(
                    "equality '{}' reduces to 0 = {rhs}",
                    eq.label
                ));
            }
            continue;
        }
        let (pivot, pc) = f
            .terms()
            .fold((0, 0.0f64), |best, (id, c)| if c.abs() > best.1.abs() { (id, c) } else { best });
        let mut expr = LinearFunctional::constant(rhs / pc);
        for (id, c) in f.terms() {
            if id != pivot {
                expr.add(id, -c / pc);
            }
        }
        let single = BTreeMap::from([(pivot, expr.clone())]);
        for g in subs.values_mut() {
            *g = substitute(g, &single);
        }
        subs.insert(pivot, expr);
    }

    let blocks: Vec<(usize, Vec<LinearFunctional>)> = problem
        .blocks
        .iter()
        .map(|b| {
            let n = b.dim;
            let mut entries = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let mut f = substitute(&b.entries[i * n + j], &subs);
                    if i != j {
                        f.add_scaled(&substitute(&b.entries[j * n + i], &subs), 1.0);
                        f = f.scaled(0.5);
                    }
                    entries.push(f);
                }
            }
            (n, entries)
        })
        .collect();
    let objective = substitute(&problem.objective, &subs);

    let in_blocks: BTreeSet<VarId> = blocks
        .iter()
        .flat_map(|(_, e)| e.iter().flat_map(|f| f.terms().map(|(id, _)| id)))
        .collect();
    Reduced::Ok(Reduction {
        free: in_blocks.into_iter().collect(),
        substitutions: subs,
        objective,
        blocks,
    })
}

// ---------------------------------------------------------------------------
// Dense block helpers

type Blocks = Vec<Mat<f64>>;

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut s = 0.0;
            for j in 0..x.ncols() {
                for i in 0..x.nrows() {
                    s += x[(i, j)] * y[(i, j)];
                }
            }
            s
        })
        .sum()
}

fn fro(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn symmetrize(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn cholesky_lower(m: &Mat<f64>) -> Option<Mat<f64>> {
    m.llt(Side::Lower).ok().map(|f| f.L().to_owned())
}

fn inverse_from_lower(l: &Mat<f64>) -> Mat<f64> {
    let n = l.nrows();
    let mut linv = Mat::<f64>::identity(n, n);
    l.solve_lower_triangular_in_place(&mut linv);
    let inv = linv.transpose() * &linv;
    symmetrize(&inv)
}

/// Largest `α` with `M + α Δ ⪰ 0`, given `M = L Lᵀ`.
fn max_step(l: &Mat<f64>, delta: &Mat<f64>) -> f64 {
    let mut w = delta.clone();
    l.solve_lower_triangular_in_place(&mut w);
    let mut wt = w.transpose().to_owned();
    l.solve_lower_triangular_in_place(&mut wt);
    let w = symmetrize(&wt);
    let lambda = w
        .self_adjoint_eigenvalues(Side::Lower)
        .ok()
        .and_then(|v| v.first().copied())
        .unwrap_or(f64::NEG_INFINITY);
    if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    }
}

/// Sparse symmetric coefficient pattern of one variable in one block.
struct Pattern {
    var: usize,
    /// Full symmetric entry list.
    entries: Vec<(u32, u32, f64)>,
}

struct BlockData {
    dim: usize,
    constant: Mat<f64>,
    patterns: Vec<Pattern>,
}

struct Lmi {
    blocks: Vec<BlockData>,
    cost: Vec<f64>,
    m: usize,
}

impl Lmi {
    fn new(red: &Reduction) -> Self {
        let pos: BTreeMap<VarId, usize> =
            red.free.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let blocks = red
            .blocks
            .iter()
            .map(|(n, entries)| {
                let n = *n;
                let mut constant = Mat::<f64>::zeros(n, n);
                let mut per_var: BTreeMap<usize, Vec<(u32, u32, f64)>> = BTreeMap::new();
                for i in 0..n {
                    for j in 0..n {
                        let f = &entries[i * n + j];
                        constant[(i, j)] = f.constant;
                        for (id, c) in f.terms() {
                            per_var
                                .entry(pos[&id])
                                .or_default()
                                .push((i as u32, j as u32, c));
                        }
                    }
                }
                BlockData {
                    dim: n,
                    constant,
                    patterns: per_var
                        .into_iter()
                        .map(|(var, entries)| Pattern { var, entries })
                        .collect(),
                }
            })
            .collect();
        let cost = red
            .free
            .iter()
            .map(|&id| red.objective.coefficient(id))
            .collect();
        Lmi {
            blocks,
            cost,
            m: red.free.len(),
        }
    }

    /// `F₀ + Σ z_i F_i`.
    fn affine(&self, z: &[f64]) -> Blocks {
        self.blocks
            .iter()
            .map(|b| {
                let mut out = b.constant.clone();
                for p in &b.patterns {
                    let v = z[p.var];
                    if v != 0.0 {
                        for &(i, j, c) in &p.entries {
                            out[(i as usize, j as usize)] += c * v;
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// `Σ z_i F_i` without the constant.
    fn linear(&self, z: &[f64]) -> Blocks {
        self.blocks
            .iter()
            .map(|b| {
                let mut out = Mat::<f64>::zeros(b.dim, b.dim);
                for p in &b.patterns {
                    let v = z[p.var];
                    if v != 0.0 {
                        for &(i, j, c) in &p.entries {
                            out[(i as usize, j as usize)] += c * v;
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// `(⟨F_i, X⟩)_i`.
    fn adjoint(&self, x: &Blocks) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (b, xb) in self.blocks.iter().zip(x) {
            for p in &b.patterns {
                let mut s = 0.0;
                for &(i, j, c) in &p.entries {
                    s += c * xb[(i as usize, j as usize)];
                }
                out[p.var] += s;
            }
        }
        out
    }

    fn constant_blocks(&self) -> Blocks {
        self.blocks.iter().map(|b| b.constant.clone()).collect()
    }

    /// Schur complement `M_ij = Σ_k tr(F_i X F_j Z⁻¹)`.
    fn schur(&self, x: &Blocks, h: &Blocks) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.m, self.m);
        for ((b, xb), hb) in self.blocks.iter().zip(x).zip(h) {
            let pats = &b.patterns;
            for (a, pi) in pats.iter().enumerate() {
                for pj in &pats[a..] {
                    let mut s = 0.0;
                    for &(p, q, ca) in &pi.entries {
                        let (p, q) = (p as usize, q as usize);
                        for &(r, t, cb) in &pj.entries {
                            s += ca * cb * xb[(q, r as usize)] * hb[(t as usize, p)];
                        }
                    }
                    let (i, j) = (pi.var.min(pj.var), pi.var.max(pj.var));
                    m[(j, i)] += s;
                    if i != j {
                        m[(i, j)] += s;
                    }
                }
            }
        }
        m
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Factored {
    llt: Option<faer::linalg::solvers::Llt<f64>>,
    lblt: Option<faer::linalg::solvers::Lblt<f64>>,
}

impl Factored {
    fn new(mut m: Mat<f64>) -> Self {
        if let Ok(f) = m.llt(Side::Lower) {
            return Factored {
                llt: Some(f),
                lblt: None,
            };
        }
        let n = m.nrows();
        let diag_max = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        for i in 0..n {
            m[(i, i)] += 1e-13 * diag_max;
        }
        if let Ok(f) = m.llt(Side::Lower) {
            return Factored {
                llt: Some(f),
                lblt: None,
            };
        }
        Factored {
            llt: None,
            lblt: Some(m.lblt(Side::Lower)),
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        use faer::linalg::solvers::Solve;
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = match (&self.llt, &self.lblt) {
            (Some(f), _) => f.solve(&b),
            (_, Some(f)) => f.solve(&b),
            _ => unreachable!(),
        };
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

struct IpmOutcome {
    status: SolveStatus,
    z: Vec<f64>,
    x: Blocks,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    relative_gap: f64,
}

fn ipm(lmi: &Lmi, opts: &SolverOptions) -> IpmOutcome {
    let m = lmi.m;
    let dims: Vec<usize> = lmi.blocks.iter().map(|b| b.dim).collect();
    let ntot: usize = dims.iter().sum();
    let f0 = lmi.constant_blocks();
    let f0_norm = fro(&f0);
    let c_norm = norm(&lmi.cost);

    let mut scale = 10f64.max((ntot as f64).sqrt());
    scale = scale.max(f0_norm).max(c_norm);
    let mut x: Blocks = dims.iter().map(|&n| Mat::<f64>::identity(n, n) * faer::Scale(scale)).collect();
    let mut zmat: Blocks = dims.iter().map(|&n| Mat::<f64>::identity(n, n) * faer::Scale(scale)).collect();
    let mut z = vec![0.0; m];

    let mut best: Option<(f64, IpmOutcome)> = None;
    let mut status = SolveStatus::NumericalFailure;
    let mut iterations = 0;
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for it in 0..opts.max_iterations {
        iterations = it + 1;
        // residuals
        let fz = lmi.affine(&z);
        let rd: Blocks = fz.iter().zip(&zmat).map(|(a, b)| a - b).collect();
        let fx = lmi.adjoint(&x);
        let rp: Vec<f64> = lmi.cost.iter().zip(&fx).map(|(c, v)| c - v).collect();
        let pobj = -inner(&f0, &x);
        let dobj: f64 = lmi.cost.iter().zip(&z).map(|(c, v)| c * v).sum();
        let mu = inner(&x, &zmat) / ntot as f64;
        let pres = norm(&rp) / (1.0 + c_norm);
        let dres = fro(&rd) / (1.0 + f0_norm);
        let gap = (dobj - pobj).abs() / (1.0 + dobj.abs() + pobj.abs());
        last = (pres, dres, gap);
        debug!(
            "it {it:3}  pobj {pobj:+.9e}  dobj {dobj:+.9e}  gap {gap:.2e}  pres {pres:.2e}  dres {dres:.2e}  mu {mu:.2e}"
        );

        if pres <= opts.feasibility_tol && dres <= opts.feasibility_tol && gap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        // track the best near-optimal iterate in case progress stalls
        if pres <= opts.near_feasibility_tol && dres <= opts.near_feasibility_tol && gap <= opts.near_gap_tol {
            let merit = pres.max(dres).max(gap);
            if best.as_ref().is_none_or(|(b, _)| merit < *b) {
                best = Some((
                    merit,
                    IpmOutcome {
                        status: SolveStatus::NearOptimal,
                        z: z.clone(),
                        x: x.clone(),
                        iterations,
                        primal_residual: pres,
                        dual_residual: dres,
                        relative_gap: gap,
                    },
                ));
            }
        }
        // infeasibility certificates
        let f0x = inner(&f0, &x);
        if f0x < 0.0 && norm(&fx) / -f0x <= opts.infeasibility_tol {
            status = SolveStatus::Infeasible;
            break;
        }
        if dobj < 0.0 && (fro(&rd) + f0_norm) / -dobj <= opts.infeasibility_tol {
            status = SolveStatus::Unbounded;
            break;
        }

        // factorizations
        let Some(lx) = x.iter().map(cholesky_lower).collect::<Option<Vec<_>>>() else {
            break;
        };
        let Some(lz) = zmat.iter().map(cholesky_lower).collect::<Option<Vec<_>>>() else {
            break;
        };
        let h: Blocks = lz.iter().map(inverse_from_lower).collect();
        let schur = Factored::new(lmi.schur(&x, &h));

        let direction = |rc: &Blocks| -> (Vec<f64>, Blocks, Blocks) {
            // G = (Rc − X Rd) Z⁻¹
            let g: Blocks = rc
                .iter()
                .zip(&x)
                .zip(&rd)
                .zip(&h)
                .map(|(((rcb, xb), rdb), hb)| (rcb - xb * rdb) * hb)
                .collect();
            let fg = lmi.adjoint(&g);
            let rhs: Vec<f64> = fg.iter().zip(&rp).map(|(a, b)| a - b).collect();
            let dz = schur.solve(&rhs);
            let lin = lmi.linear(&dz);
            let dzm: Blocks = rd.iter().zip(&lin).map(|(a, b)| a + b).collect();
            let dx: Blocks = rc
                .iter()
                .zip(&x)
                .zip(&dzm)
                .zip(&h)
                .map(|(((rcb, xb), dzb), hb)| symmetrize(&((rcb - xb * dzb) * hb)))
                .collect();
            (dz, dx, dzm)
        };
        let steps = |dx: &Blocks, dzm: &Blocks| -> (f64, f64) {
            let ap = lx
                .iter()
                .zip(dx)
                .map(|(l, d)| max_step(l, d))
                .fold(f64::INFINITY, f64::min);
            let ad = lz
                .iter()
                .zip(dzm)
                .map(|(l, d)| max_step(l, d))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // predictor
        let xz: Blocks = x.iter().zip(&zmat).map(|(a, b)| a * b).collect();
        let rc_aff: Blocks = xz.iter().map(|m| m * faer::Scale(-1.0)).collect();
        let (_, dx_a, dzm_a) = direction(&rc_aff);
        let (ap, ad) = steps(&dx_a, &dzm_a);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff: Blocks = x.iter().zip(&dx_a).map(|(a, d)| a + d * faer::Scale(ap)).collect();
        let z_aff: Blocks = zmat.iter().zip(&dzm_a).map(|(a, d)| a + d * faer::Scale(ad)).collect();
        let mu_aff = inner(&x_aff, &z_aff) / ntot as f64;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // corrector
        let rc: Blocks = xz
            .iter()
            .zip(&dx_a)
            .zip(&dzm_a)
            .map(|((xzb, dxb), dzb)| {
                let n = xzb.nrows();
                let mut r = Mat::<f64>::identity(n, n) * faer::Scale(sigma * mu);
                r -= xzb;
                r -= dxb * dzb;
                r
            })
            .collect();
        let (dz, dx, dzm) = direction(&rc);
        let (ap, ad) = steps(&dx, &dzm);
        let gamma = opts.step_fraction;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        for (a, d) in x.iter_mut().zip(&dx) {
            *a += d * faer::Scale(ap);
        }
        for (a, d) in zmat.iter_mut().zip(&dzm) {
            *a += d * faer::Scale(ad);
        }
        for (a, d) in z.iter_mut().zip(&dz) {
            *a += ad * d;
        }
    }

    if status == SolveStatus::NumericalFailure {
        if let Some((_, out)) = best {
            return out;
        }
    }
    IpmOutcome {
        status,
        z,
        x,
        iterations,
        primal_residual: last.0,
        dual_residual: last.1,
        relative_gap: last.2,
    }
}

/// `min t  s.t.  F(z) + t·1 ⪰ 0`; a positive optimum proves infeasibility.
fn phase_one(lmi: &Lmi, opts: &SolverOptions) -> Option<f64> {
    let t = lmi.m;
    let blocks = lmi
        .blocks
        .iter()
        .map(|b| {
            let mut patterns: Vec<Pattern> = b
                .patterns
                .iter()
                .map(|p| Pattern {
                    var: p.var,
                    entries: p.entries.clone(),
                })
                .collect();
            patterns.push(Pattern {
                var: t,
                entries: (0..b.dim as u32).map(|i| (i, i, 1.0)).collect(),
            });
            BlockData {
                dim: b.dim,
                constant: b.constant.clone(),
                patterns,
            }
        })
        .collect();
    let mut cost = vec![0.0; t + 1];
    cost[t] = 1.0;
    let aux = Lmi {
        blocks,
        cost,
        m: t + 1,
    };
    let out = ipm(&aux, opts);
    matches!(out.status, SolveStatus::Optimal | SolveStatus::NearOptimal).then(|| out.z[t])
}

pub(crate) fn solve_problem(problem: &SdpProblem, opts: &SolverOptions) -> Result<Solution> {
    let start = Instant::now();
    for b in &problem.blocks {
        if b.dim > opts.max_block_dim {
            return Err(Error::SolverLimit(format!(
                "block '{}' has dimension {} > {}",
                b.name, b.dim, opts.max_block_dim
            )));
        }
        if b.entries.len() != b.dim * b.dim {
            return Err(Error::Dimension(format!("block '{}' is not square", b.name)));
        }
    }
    let red = match reduce(problem) {
        Reduced::Ok(r) => r,
        Reduced::Infeasible(why) => {
            debug!("{why}");
            return Ok(Solution {
                status: SolveStatus::Infeasible,
                value: f64::NAN,
                moment_objective: f64::NAN,
                moments: Vec::new(),
                dual_certificate: None,
                iterations: 0,
                primal_residual: f64::NAN,
                dual_residual: f64::NAN,
                relative_gap: f64::NAN,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    };
    if red.free.len() > opts.max_variables {
        return Err(Error::SolverLimit(format!(
            "{} free variables > {}",
            red.free.len(),
            opts.max_variables
        )));
    }
    let free: BTreeSet<VarId> = red.free.iter().copied().collect();
    let dangling = red
        .objective
        .terms()
        .any(|(id, c)| c != 0.0 && !free.contains(&id));

    let lmi = Lmi::new(&red);
    debug!(
        "solving: {} variables, blocks {:?}",
        lmi.m,
        lmi.blocks.iter().map(|b| b.dim).collect::<Vec<_>>()
    );
    let mut out = ipm(&lmi, opts);
    if dangling && out.status != SolveStatus::Infeasible {
        out.status = SolveStatus::Unbounded;
    }
    if out.status == SolveStatus::NumericalFailure {
        if let Some(t) = phase_one(&lmi, opts) {
            debug!("phase one optimum {t:e}");
            if t > opts.near_feasibility_tol.max(1e-7) {
                out.status = SolveStatus::Infeasible;
            }
        }
    }

    // moments in original ids
    let mut moments = vec![0.0; problem.num_vars.max(1)];
    moments[0] = 1.0;
    for (k, &id) in red.free.iter().enumerate() {
        moments[id] = out.z[k];
    }
    for (&id, f) in &red.substitutions {
        moments[id] = f.evaluate(&moments);
    }
    moments[0] = 1.0;

    let f0 = lmi.constant_blocks();
    let value = red.objective.constant - inner(&f0, &out.x);
    let moment_objective = problem.objective.evaluate(&moments);
    let certificate = out
        .x
        .iter()
        .map(|b| {
            let n = b.nrows();
            (0..n * n).map(|k| b[(k / n, k % n)]).collect()
        })
        .collect();
    let solved = matches!(out.status, SolveStatus::Optimal | SolveStatus::NearOptimal);
    Ok(Solution {
        status: out.status,
        value: if solved { value } else { f64::NAN },
        moment_objective: if solved { moment_objective } else { f64::NAN },
        moments,
        dual_certificate: solved.then_some(certificate),
        iterations: out.iterations,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
        relative_gap: out.relative_gap,
        seconds: start.elapsed().as_secs_f64(),
    })
}
