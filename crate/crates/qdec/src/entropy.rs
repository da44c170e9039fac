//! Entropic quantities: the exact von Neumann family, optimization-based
//! min/2/max entropies, smoothing over fidelity-distance balls, and the
//! asymptotic-equipartition bound.
//!
//! All logarithms are base 2. Conditional min- and 2-entropies are computed
//! by feasible-point optimizers, so every reported conditional value is a
//! certified one-sided bound: `h_min`/`h_2` report lower bounds on the true
//! entropy (any feasible σ witnesses one), and `h_max` — computed as
//! `−H_min(A|C)` on a purification — reports an upper bound.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::random::Sampler;
use crate::tensor::{fidelity_distance, DensityOperator};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;
type Mat = CMat<f64>;

const EIG_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Optimizer,
    Oracle,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerDiagnostics {
    pub iterations: usize,
    pub restarts: usize,
    pub final_gradient_norm: f64,
    /// Primal-dual gap on `tr σ` when a dual witness was constructed.
    pub certified_gap: Option<f64>,
}

/// Value in bits plus how it was obtained.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyReport {
    pub value: f64,
    pub method: Method,
    pub optimizer: Option<OptimizerDiagnostics>,
}

impl EntropyReport {
    fn closed(value: f64) -> Self {
        Self {
            value,
            method: Method::ClosedForm,
            optimizer: None,
        }
    }
}

// ---------------------------------------------------------------------------
// von Neumann family (closed form)
// ---------------------------------------------------------------------------

fn entropy_of_eigs(eigs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &l in eigs {
        if l > 1e-15 {
            h -= l * l.log2();
        }
    }
    h
}

/// `H(ρ) = −tr[ρ log ρ]` of the state as given.
pub fn von_neumann_of(rho: &DensityOperator<f64>) -> f64 {
    entropy_of_eigs(&rho.eigenvalues())
}

/// `H(labels)_ρ`: von Neumann entropy of the marginal.
pub fn von_neumann(rho: &DensityOperator<f64>, of: &[&str]) -> Result<EntropyReport> {
    let marg = rho.marginal(of)?;
    Ok(EntropyReport::closed(von_neumann_of(&marg)))
}

fn h_of(rho: &DensityOperator<f64>, of: &[&str]) -> Result<f64> {
    Ok(von_neumann_of(&rho.marginal(of)?))
}

/// `H(A|B) = H(AB) − H(B)`.
pub fn conditional_entropy(
    rho: &DensityOperator<f64>,
    a: &[&str],
    b: &[&str],
) -> Result<EntropyReport> {
    let mut ab: Vec<&str> = a.to_vec();
    ab.extend_from_slice(b);
    Ok(EntropyReport::closed(h_of(rho, &ab)? - h_of(rho, b)?))
}

/// `I(A;B) = H(A) + H(B) − H(AB)`.
pub fn mutual_information(
    rho: &DensityOperator<f64>,
    a: &[&str],
    b: &[&str],
) -> Result<EntropyReport> {
    let mut ab: Vec<&str> = a.to_vec();
    ab.extend_from_slice(b);
    Ok(EntropyReport::closed(
        h_of(rho, a)? + h_of(rho, b)? - h_of(rho, &ab)?,
    ))
}

/// `I(A;B|C) = I(A;BC) − I(A;C)`.
pub fn conditional_mutual_information(
    rho: &DensityOperator<f64>,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<EntropyReport> {
    let mut bc: Vec<&str> = b.to_vec();
    bc.extend_from_slice(c);
    let i_abc = mutual_information(rho, a, &bc)?.value;
    let i_ac = mutual_information(rho, a, c)?.value;
    Ok(EntropyReport::closed(i_abc - i_ac))
}

/// Coherent information `I(A⟩B) = −H(A|B)`.
pub fn coherent_information(
    rho: &DensityOperator<f64>,
    a: &[&str],
    b: &[&str],
) -> Result<EntropyReport> {
    Ok(EntropyReport::closed(-conditional_entropy(rho, a, b)?.value))
}

// ---------------------------------------------------------------------------
// Conditional min- and 2-entropy optimizers
// ---------------------------------------------------------------------------

/// The state grouped as `[A..., B...]` with `B` trailing, so that σ^B embeds
/// as `I_A ⊗ σ`. The `B×B` blocks `ρ_{aa'}` drive the structured products
/// that keep the optimizers cheap at large `|A|`.
struct CondProblem {
    rho: Mat,
    blocks: Vec<Mat>,
    dim_a: usize,
    dim_b: usize,
}

impl CondProblem {
    fn build(rho: &DensityOperator<f64>, condition_on: &[&str]) -> Result<Self> {
        let b_space = rho.space().restrict(condition_on)?;
        let a_space = rho.space().without(condition_on)?;
        if a_space.n_systems() == 0 {
            return Err(Error::UnknownLabel(
                "conditioning on every system leaves nothing".into(),
            ));
        }
        let mut order = a_space.labels();
        order.extend(b_space.labels());
        let perm = rho.permuted(&order)?;
        let mat = perm.matrix().clone();
        let (da, db) = (a_space.dim(), b_space.dim());
        let mut blocks = Vec::with_capacity(da * da);
        for a in 0..da {
            for ap in 0..da {
                blocks.push(Mat::from_fn(db, db, |i, j| mat[(a * db + i, ap * db + j)]));
            }
        }
        Ok(Self {
            rho: mat,
            blocks,
            dim_a: da,
            dim_b: db,
        })
    }

    fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn block(&self, a: usize, ap: usize) -> &Mat {
        &self.blocks[a * self.dim_a + ap]
    }

    fn embed_b(&self, m: &Mat) -> Mat {
        linalg::kron(&linalg::identity::<f64>(self.dim_a), m)
    }

    fn trace_a(&self, m: &Mat) -> Mat {
        let (da, db) = (self.dim_a, self.dim_b);
        Mat::from_fn(db, db, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..da {
                acc += m[(a * db + i, a * db + j)];
            }
            acc
        })
    }

    /// `Y = (I⊗σ)^{-1/2} ρ (I⊗σ)^{-1/2}` using σ's (floored) eigensystem;
    /// built blockwise as `S ρ_{aa'} S`.
    fn y_of(&self, inv_sqrt_b: &Mat) -> Mat {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut y = Mat::zeros(da * db, da * db);
        for a in 0..da {
            for ap in 0..da {
                let blk = inv_sqrt_b * self.block(a, ap) * inv_sqrt_b;
                for i in 0..db {
                    for j in 0..db {
                        y[(a * db + i, ap * db + j)] = blk[(i, j)];
                    }
                }
            }
        }
        y
    }

    /// `tr[XρXρ] = Σ_{aa'} tr[S ρ_{aa'} S ρ_{a'a}]` without the full product.
    fn h2_value(&self, inv_sqrt_b: &Mat) -> f64 {
        let da = self.dim_a;
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..da {
            for ap in 0..da {
                let left = inv_sqrt_b * self.block(a, ap) * inv_sqrt_b;
                acc += linalg::trace(&(left * self.block(ap, a)));
            }
        }
        acc.re
    }

    /// `W = tr_A[ρ (I⊗S) ρ] = Σ_{aa'} ρ_{aa'} S ρ_{a'a}`.
    fn h2_outer(&self, inv_sqrt_b: &Mat) -> Mat {
        let da = self.dim_a;
        let db = self.dim_b;
        let mut w = Mat::zeros(db, db);
        for a in 0..da {
            for ap in 0..da {
                w += self.block(a, ap) * inv_sqrt_b * self.block(ap, a);
            }
        }
        w
    }
}

fn floored_inv_sqrt(sigma: &Mat) -> Mat {
    linalg::hermitian_fn(sigma, |l| 1.0 / l.max(EIG_FLOOR).sqrt())
}

/// Daleckii–Krein divided differences for `t ↦ t^{-1/2}` at floored
/// eigenvalues, contracted against `W` to give the gradient of the composite
/// objective with respect to σ.
fn grad_through_inv_sqrt(sigma: &Mat, w: &Mat) -> Mat {
    let (vals, vecs) = linalg::eigh(sigma);
    let n = vals.len();
    let f = |x: f64| 1.0 / x.max(EIG_FLOOR).sqrt();
    let w_tilde = vecs.adjoint() * w * &vecs;
    let mut g_tilde = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (vals[i].max(EIG_FLOOR), vals[j].max(EIG_FLOOR));
            let phi = if (a - b).abs() > 1e-12 * (a + b).max(1e-300) {
                (f(a) - f(b)) / (a - b)
            } else {
                -0.5 / (a * a.sqrt())
            };
            g_tilde[(i, j)] = C64::new(phi, 0.0) * w_tilde[(i, j)];
        }
    }
    let g = &vecs * g_tilde * vecs.adjoint();
    linalg::hermitize(&g)
}

/// Retraction onto normalized positive-definite matrices.
fn retract(sigma: &Mat) -> Mat {
    let clamped = linalg::hermitian_fn(sigma, |l| l.max(EIG_FLOOR));
    let tr = linalg::trace(&clamped).re;
    clamped / C64::new(tr, 0.0)
}

struct DescentOutcome {
    sigma: Mat,
    objective: f64,
    iterations: usize,
    final_gradient_norm: f64,
}

/// Projected-gradient descent with backtracking, accept-on-improvement.
fn descend(
    start: &Mat,
    max_iters: usize,
    objective: impl Fn(&Mat) -> f64,
    gradient: impl Fn(&Mat) -> Mat,
) -> DescentOutcome {
    let mut sigma = retract(start);
    let mut value = objective(&sigma);
    let mut eta = 0.1f64;
    let mut iterations = 0usize;
    let mut grad_norm = f64::NAN;
    while iterations < max_iters && eta > 1e-13 {
        iterations += 1;
        let g = gradient(&sigma);
        // project out the trace direction (σ stays normalized)
        let db = sigma.nrows() as f64;
        let g_tangent = &g
            - &(linalg::identity::<f64>(sigma.nrows())
                * (linalg::trace(&g) / C64::new(db, 0.0)));
        grad_norm = g_tangent.norm();
        if grad_norm < 1e-13 {
            break;
        }
        let cand = retract(&(&sigma - &(g_tangent.clone() * C64::new(eta / grad_norm.max(1e-30), 0.0))));
        let cand_value = objective(&cand);
        if cand_value < value - 1e-15 {
            sigma = cand;
            value = cand_value;
            eta *= 1.3;
        } else {
            eta *= 0.4;
        }
    }
    DescentOutcome {
        sigma,
        objective: value,
        iterations,
        final_gradient_norm: grad_norm,
    }
}

fn optimizer_starts(problem: &CondProblem, extra: &[Mat]) -> Vec<Mat> {
    let db = problem.dim_b;
    let mut starts = vec![
        retract(&problem.trace_a(&problem.rho)),
        linalg::identity::<f64>(db) / C64::new(db as f64, 0.0),
    ];
    let mut sampler = Sampler::new(0xE47 ^ (db as u64).wrapping_mul(0x9e37));
    for _ in 0..2 {
        let g = crate::random::random_matrix::<f64>(db, db, &mut sampler);
        starts.push(retract(&(g.adjoint() * &g)));
    }
    starts.extend_from_slice(extra);
    starts
}

pub(crate) struct CondOptimum {
    pub value_bits: f64,
    pub sigma: Mat,
    pub diagnostics: OptimizerDiagnostics,
}

/// Hermitian basis of the `d×d` matrices (dimension `d²` over the reals).
fn hermitian_basis(d: usize) -> Vec<Mat> {
    let mut basis = Vec::with_capacity(d * d);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        let mut m = Mat::zeros(d, d);
        m[(i, i)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut re = Mat::zeros(d, d);
            re[(i, j)] = C64::new(inv_sqrt2, 0.0);
            re[(j, i)] = C64::new(inv_sqrt2, 0.0);
            basis.push(re);
            let mut im = Mat::zeros(d, d);
            im[(i, j)] = C64::new(0.0, inv_sqrt2);
            im[(j, i)] = C64::new(0.0, -inv_sqrt2);
            basis.push(im);
        }
    }
    basis
}

/// Log-barrier Newton solver for the min-entropy SDP
/// `min tr σ s.t. I⊗σ ⪰ ρ, σ ⪰ 0` in the unnormalized σ. Every iterate is
/// strictly feasible, so the returned trace is a certified upper bound on
/// the optimum. Returns `(tr σ, σ, newton_steps)`.
fn h_min_barrier(problem: &CondProblem, warm: Option<&Mat>) -> (f64, Mat, usize) {
    let (da, db) = (problem.dim_a, problem.dim_b);
    let n = da * db;
    let basis = hermitian_basis(db);
    let m = basis.len();

    let feasibility = |sigma: &Mat| -> Option<(Vec<f64>, Mat, Vec<f64>, Mat)> {
        let big = problem.embed_b(sigma) - &problem.rho;
        let (dvals, v) = linalg::eigh(&big);
        if dvals[0] <= 0.0 {
            return None;
        }
        let (svals, w) = linalg::eigh(sigma);
        if svals[0] <= 0.0 {
            return None;
        }
        Some((dvals, v, svals, w))
    };
    let barrier_value = |t: f64, sigma: &Mat| -> Option<f64> {
        let (dvals, _, svals, _) = feasibility(sigma)?;
        let mut f = t * linalg::trace(sigma).re;
        for x in dvals.iter().chain(svals.iter()) {
            f -= x.ln();
        }
        Some(f)
    };

    // strictly feasible start
    let lmax = linalg::largest_eigval(&problem.rho);
    let mut sigma = linalg::identity::<f64>(db) * C64::new(lmax + 0.1, 0.0);
    if let Some(ws) = warm {
        // inflate the warm start slightly to clear the boundary
        let cand = ws * C64::new(1.02, 0.0) + linalg::identity::<f64>(db) * C64::new(1e-6, 0.0);
        if feasibility(&cand).is_some() {
            sigma = cand;
        }
    }

    let mut t = 1.0f64;
    let gap_target = 1e-11;
    let mut newton_steps = 0usize;
    while ((n + db) as f64) / t > gap_target {
        // Newton iterations at this barrier weight
        for _ in 0..40 {
            newton_steps += 1;
            let (dvals, v, svals, w) = match feasibility(&sigma) {
                Some(x) => x,
                None => break,
            };
            // transformed basis elements
            let g_k: Vec<Mat> = basis
                .iter()
                .map(|h| v.adjoint() * problem.embed_b(h) * &v)
                .collect();
            let s_k: Vec<Mat> = basis.iter().map(|h| w.adjoint() * h * &w).collect();
            let mut grad = nalgebra::DVector::<f64>::zeros(m);
            for k in 0..m {
                let mut g = t * linalg::trace(&basis[k]).re;
                for p in 0..n {
                    g -= g_k[k][(p, p)].re / dvals[p];
                }
                for p in 0..db {
                    g -= s_k[k][(p, p)].re / svals[p];
                }
                grad[k] = g;
            }
            let mut hess = nalgebra::DMatrix::<f64>::zeros(m, m);
            for k in 0..m {
                for l in k..m {
                    let mut h = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            h += (g_k[k][(p, q)] * g_k[l][(q, p)]).re / (dvals[p] * dvals[q]);
                        }
                    }
                    for p in 0..db {
                        for q in 0..db {
                            h += (s_k[k][(p, q)] * s_k[l][(q, p)]).re / (svals[p] * svals[q]);
                        }
                    }
                    hess[(k, l)] = h;
                    hess[(l, k)] = h;
                }
            }
            for k in 0..m {
                hess[(k, k)] += 1e-12;
            }
            let step = match hess.clone().lu().solve(&grad) {
                Some(s) => s,
                None => break,
            };
            let decrement = grad.dot(&step);
            if !decrement.is_finite() || decrement.abs() < 1e-13 {
                break;
            }
            let mut delta = Mat::zeros(db, db);
            for k in 0..m {
                delta += &basis[k] * C64::new(step[k], 0.0);
            }
            // backtracking line search on the barrier function
            let f0 = barrier_value(t, &sigma).unwrap_or(f64::INFINITY);
            let mut alpha = 1.0f64;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &sigma - &(delta.clone() * C64::new(alpha, 0.0));
                if let Some(f) = barrier_value(t, &cand) {
                    if f < f0 - 1e-15 {
                        sigma = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted || decrement < 1e-11 {
                break;
            }
        }
        t *= 8.0;
    }
    let trace = linalg::trace(&sigma).re;
    let normalized = sigma.clone() / C64::new(trace, 0.0);
    (trace, normalized, newton_steps)
}

/// Core of `H_min(A|B)`: minimizes `λ_max((I⊗σ)^{-1/2} ρ (I⊗σ)^{-1/2})`
/// over normalized σ ≻ 0. The best objective is `min tr σ` of the SDP.
fn h_min_core(problem: &CondProblem, extra_starts: &[Mat], max_iters: usize) -> CondOptimum {
    let objective = |sigma: &Mat| {
        let y = problem.y_of(&floored_inv_sqrt(sigma));
        linalg::largest_eigval(&y)
    };
    let gradient = |sigma: &Mat| {
        let isq = floored_inv_sqrt(sigma);
        let y = problem.y_of(&isq);
        let (_, vecs) = linalg::eigh(&y);
        let v = vecs.column(vecs.ncols() - 1).into_owned();
        // w = ρ (I⊗σ^{-1/2}) v ; W = tr_A[w v† + v w†], contracted through
        // the derivative of σ ↦ σ^{-1/2}
        let x = problem.embed_b(&isq);
        let w: CVec<f64> = &problem.rho * (&x * &v);
        let n = v.len();
        let outer = Mat::from_fn(n, n, |i, j| w[i] * v[j].conj() + v[i] * w[j].conj());
        grad_through_inv_sqrt(sigma, &problem.trace_a(&outer))
    };
    let mut best: Option<DescentOutcome> = None;
    let mut total_iters = 0usize;
    let starts = optimizer_starts(problem, extra_starts);
    let n_starts = starts.len();
    for start in starts {
        let out = descend(&start, max_iters, objective, gradient);
        total_iters += out.iterations;
        if best.as_ref().is_none_or(|b| out.objective < b.objective) {
            best = Some(out);
        }
    }
    let mut best = best.expect("at least one start");
    // interior-point polish: the first-order iterate seeds a log-barrier
    // Newton solve of the underlying SDP, which reaches ~1e-10 accuracy;
    // only worth its cubic cost at moderate dimensions
    if problem.dim() <= 48 {
        let warm = best.sigma.clone() * C64::new(best.objective, 0.0);
        let (trace, sigma_polished, steps) = h_min_barrier(problem, Some(&warm));
        total_iters += steps;
        if trace.is_finite() && trace > 0.0 && trace < best.objective {
            best.objective = trace;
            best.sigma = sigma_polished;
        }
    }
    // dual witness: X = α·uu† with u = (I⊗σ)^{-1/2} v, α chosen so tr_A X ⪯ I
    let certified_gap = {
        let isq = floored_inv_sqrt(&best.sigma);
        let y = problem.y_of(&isq);
        let (_, vecs) = linalg::eigh(&y);
        let v = vecs.column(vecs.ncols() - 1).into_owned();
        let u: CVec<f64> = problem.embed_b(&isq) * v;
        let n = u.len();
        let uu = Mat::from_fn(n, n, |i, j| u[i] * u[j].conj());
        let tb = problem.trace_a(&uu);
        let lmax = linalg::largest_eigval(&tb);
        if lmax > 1e-300 {
            let dual = (u.dotc(&(&problem.rho * &u))).re / lmax;
            Some((best.objective - dual).max(0.0))
        } else {
            None
        }
    };
    CondOptimum {
        value_bits: -best.objective.max(1e-300).log2(),
        sigma: best.sigma,
        diagnostics: OptimizerDiagnostics {
            iterations: total_iters,
            restarts: n_starts,
            final_gradient_norm: best.final_gradient_norm,
            certified_gap,
        },
    }
}

/// Core of `H₂(A|B)`: minimizes `tr[((I⊗σ)^{-1/2} ρ)²] = tr[XρXρ]`.
fn h_2_core(problem: &CondProblem, extra_starts: &[Mat], max_iters: usize) -> CondOptimum {
    let objective = |sigma: &Mat| problem.h2_value(&floored_inv_sqrt(sigma));
    let gradient = |sigma: &Mat| {
        let isq = floored_inv_sqrt(sigma);
        let w = problem.h2_outer(&isq) * C64::new(2.0, 0.0);
        grad_through_inv_sqrt(sigma, &w)
    };
    let mut best: Option<DescentOutcome> = None;
    let mut total_iters = 0usize;
    let starts = optimizer_starts(problem, extra_starts);
    let n_starts = starts.len();
    for start in starts {
        let out = descend(&start, max_iters, objective, gradient);
        total_iters += out.iterations;
        if best.as_ref().is_none_or(|b| out.objective < b.objective) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    CondOptimum {
        value_bits: -best.objective.max(1e-300).log2(),
        sigma: best.sigma,
        diagnostics: OptimizerDiagnostics {
            iterations: total_iters,
            restarts: n_starts,
            final_gradient_norm: best.final_gradient_norm,
            certified_gap: None,
        },
    }
}

/// Conditional min-entropy `H_min(A|B) = −log min{tr σ : ρ ≤ I⊗σ}`.
///
/// With no conditioning labels this is `−log λ_max` in closed form. The
/// optimizer reports a feasible value, hence a lower bound on the entropy.
pub fn h_min(rho: &DensityOperator<f64>, condition_on: &[&str]) -> Result<EntropyReport> {
    if condition_on.is_empty() {
        let lmax = linalg::largest_eigval(rho.matrix());
        return Ok(EntropyReport::closed(-lmax.max(1e-300).log2()));
    }
    let problem = CondProblem::build(rho, condition_on)?;
    let opt = h_min_core(&problem, &[], 400);
    Ok(EntropyReport {
        value: opt.value_bits,
        method: Method::Optimizer,
        optimizer: Some(opt.diagnostics),
    })
}

/// Conditional 2-entropy `H₂(A|B) = −log inf_σ tr[((I⊗σ)^{-1/2} ρ)²]`.
///
/// The optimizer is seeded with the min-entropy optimum, which guarantees the
/// reported ordering `H_min ≤ H₂` (the min-entropy witness is feasible here
/// with an objective no larger than its own).
pub fn h_2(rho: &DensityOperator<f64>, condition_on: &[&str]) -> Result<EntropyReport> {
    if condition_on.is_empty() {
        return Ok(EntropyReport::closed(-rho.purity().max(1e-300).log2()));
    }
    let problem = CondProblem::build(rho, condition_on)?;
    // the min-entropy witness seeds the search, which pins the reported
    // ordering H_min ≤ H₂; skipped at large dimension where the seed's
    // eigendecompositions dominate the cost
    let seeds = if problem.dim() <= 32 {
        vec![h_min_core(&problem, &[], 200).sigma]
    } else {
        Vec::new()
    };
    let opt = h_2_core(&problem, &seeds, 400);
    Ok(EntropyReport {
        value: opt.value_bits,
        method: Method::Optimizer,
        optimizer: Some(opt.diagnostics),
    })
}

/// Conditional max-entropy `H_max(A|B) = −H_min(A|C)` on a purification.
///
/// Unconditional case in closed form: `2·log Σ√λ` (Rényi-½ entropy).
pub fn h_max(rho: &DensityOperator<f64>, condition_on: &[&str]) -> Result<EntropyReport> {
    if condition_on.is_empty() {
        let s: f64 = rho
            .eigenvalues()
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum();
        return Ok(EntropyReport::closed(2.0 * s.max(1e-300).log2()));
    }
    let purifier = rho.space().fresh_label("#pmax");
    let psi = rho.purify(&purifier)?;
    let a_labels = rho.space().without(condition_on)?;
    let mut keep = a_labels.labels();
    keep.push(&purifier);
    let reduced = psi.marginal(&keep)?;
    let report = h_min(&reduced, &[&purifier])?;
    Ok(EntropyReport {
        value: -report.value,
        method: report.method,
        optimizer: report.optimizer,
    })
}

// ---------------------------------------------------------------------------
// Smoothing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyKind {
    Min,
    Two,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingStrategy {
    /// Zero out small eigenvalues of the joint state (subnormalized member).
    Truncate,
    /// Mix toward `π^A ⊗ ρ^B` (normalized member).
    Flatten,
    /// Evaluate both and keep the better bound.
    Best,
}

fn eval_kind(
    kind: EntropyKind,
    rho: &DensityOperator<f64>,
    condition_on: &[&str],
) -> Result<EntropyReport> {
    match kind {
        EntropyKind::Min => h_min(rho, condition_on),
        EntropyKind::Two => h_2(rho, condition_on),
        EntropyKind::Max => h_max(rho, condition_on),
    }
}

fn truncation_members(rho: &DensityOperator<f64>, eps: f64) -> Vec<DensityOperator<f64>> {
    // removable trace budget from d_F ≤ ε: F = 1 − removed ⇒ removed ≤ 1 − √(1−ε²)
    let budget = 1.0 - (1.0 - eps * eps).max(0.0).sqrt();
    let (vals, vecs) = linalg::eigh(rho.matrix());
    let d = vals.len();
    let mut members = Vec::new();
    let mut removed = 0.0;
    let mut cut = 0usize; // number of smallest eigenvalues dropped
    while cut < d {
        let next = vals[cut].max(0.0);
        if removed + next > budget + 1e-15 {
            break;
        }
        removed += next;
        cut += 1;
        let mut m = Mat::zeros(d, d);
        for k in cut..d {
            let col = vecs.column(k);
            let w = C64::new(vals[k].max(0.0), 0.0);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += w * col[i] * col[j].conj();
                }
            }
        }
        if let Ok(state) = DensityOperator::subnormalized(rho.space().clone(), m) {
            members.push(state);
        }
    }
    members
}

fn flatten_members(
    rho: &DensityOperator<f64>,
    condition_on: &[&str],
    eps: f64,
) -> Result<Vec<DensityOperator<f64>>> {
    let a_space = rho.space().without(condition_on)?;
    let target = if condition_on.is_empty() {
        DensityOperator::maximally_mixed(rho.space().clone())
    } else {
        let pi_a = DensityOperator::maximally_mixed(a_space);
        let rho_b = rho.marginal(condition_on)?;
        let prod = pi_a.tensor(&rho_b)?;
        prod.permuted(&rho.space().labels())?
    };
    let mut members = Vec::new();
    for k in 1..=16 {
        let t = k as f64 / 16.0;
        let m = rho.matrix() * C64::new(1.0 - t, 0.0) + target.matrix() * C64::new(t, 0.0);
        let cand = DensityOperator::from_parts_unchecked(rho.space().clone(), m);
        if fidelity_distance(rho, &cand)? <= eps + 1e-12 {
            members.push(cand);
        }
    }
    Ok(members)
}

#[derive(Clone, Debug)]
pub struct SmoothReport {
    pub report: EntropyReport,
    /// The ball member achieving the reported bound.
    pub member: DensityOperator<f64>,
    /// Fidelity distance of the member from the input state.
    pub member_distance: f64,
}

/// Smooth entropy bound over the ε-ball `{ρ̃ : tr ρ̃ ≤ 1, d_F(ρ, ρ̃) ≤ ε}`.
///
/// For `Min`/`Two` the result is a certified lower bound on the smooth value
/// (achieved by the returned member); for `Max` it is an upper bound. Members
/// are generated along fixed truncation/flattening sweeps, so the bound is
/// monotone in ε by construction. `ε = 0` reproduces the unsmoothed value.
pub fn smooth(
    kind: EntropyKind,
    rho: &DensityOperator<f64>,
    condition_on: &[&str],
    eps: f64,
    strategy: SmoothingStrategy,
) -> Result<SmoothReport> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::HypothesisViolated(format!(
            "smoothing radius {eps} outside [0,1]"
        )));
    }
    if eps == 0.0 {
        return Ok(SmoothReport {
            report: eval_kind(kind, rho, condition_on)?,
            member: rho.clone(),
            member_distance: 0.0,
        });
    }
    // fidelity-distance slack for eigensolver noise: F known to ~1e-11 means
    // d_F known to ~√(2e-11)
    const BALL_TOL: f64 = 5e-6;
    let mut members: Vec<DensityOperator<f64>> = vec![rho.clone()];
    match strategy {
        SmoothingStrategy::Truncate => members.extend(truncation_members(rho, eps)),
        SmoothingStrategy::Flatten => members.extend(flatten_members(rho, condition_on, eps)?),
        SmoothingStrategy::Best => {
            members.extend(truncation_members(rho, eps));
            members.extend(flatten_members(rho, condition_on, eps)?);
        }
    }
    let maximize = !matches!(kind, EntropyKind::Max);
    let mut best: Option<(EntropyReport, DensityOperator<f64>, f64)> = None;
    for member in members {
        let dist = fidelity_distance(rho, &member)?;
        if dist > eps + BALL_TOL {
            continue;
        }
        let report = eval_kind(kind, &member, condition_on)?;
        let better = match &best {
            None => true,
            Some((b, _, _)) => {
                if maximize {
                    report.value > b.value
                } else {
                    report.value < b.value
                }
            }
        };
        if better {
            best = Some((report, member, dist));
        }
    }
    let (report, member, member_distance) = best.expect("ball contains the center");
    Ok(SmoothReport {
        report,
        member,
        member_distance,
    })
}

// ---------------------------------------------------------------------------
// Fully quantum asymptotic equipartition bound
// ---------------------------------------------------------------------------

/// Finite-n rate bound: `H(A|B) − 4·log η·√(log(2/ε²)/n)` with
/// `η = 2√|A| + 1`, valid for `n ≥ (8/5)·log(2/ε²)`.
pub fn aep_bound(h_ab: f64, dim_a: usize, n: usize, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::HypothesisViolated(format!("ε = {eps} not in (0,1)")));
    }
    let log_term = (2.0 / (eps * eps)).log2();
    if (n as f64) < 1.6 * log_term {
        return Err(Error::HypothesisViolated(format!(
            "n = {n} below the threshold (8/5)·log(2/ε²) = {:.3}",
            1.6 * log_term
        )));
    }
    let eta = 2.0 * (dim_a as f64).sqrt() + 1.0;
    Ok(h_ab - 4.0 * eta.log2() * (log_term / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::tensor::{fidelity, maximally_entangled, LabeledSpace, PureState};

    fn qubit(l: &str) -> LabeledSpace {
        LabeledSpace::single(l, 2)
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        for d in [2usize, 3, 5] {
            let pi = DensityOperator::maximally_mixed(LabeledSpace::single("A", d));
            assert!((von_neumann_of(&pi) - (d as f64).log2()).abs() < 1e-10);
        }
    }

    #[test]
    fn conditional_entropy_of_epr_is_minus_one() {
        let phi = maximally_entangled::<f64>("A", "A'", 2).unwrap().to_density();
        let h = conditional_entropy(&phi, &["A"], &["A'"]).unwrap();
        assert!((h.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_tripartite_identities() {
        let mut s = random::Sampler::new(60);
        let space = LabeledSpace::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        for _ in 0..20 {
            let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
            let rho = psi.to_density();
            let h_a = h_of(&rho, &["A"]).unwrap();
            let h_bc = h_of(&rho, &["B", "C"]).unwrap();
            assert!((h_a - h_bc).abs() < 1e-9);
            let h_ab = conditional_entropy(&rho, &["A"], &["B"]).unwrap().value;
            let h_ac = conditional_entropy(&rho, &["A"], &["C"]).unwrap().value;
            assert!((h_ab + h_ac).abs() < 1e-9);
            let coh = coherent_information(&rho, &["A"], &["B"]).unwrap().value;
            let i_ab = mutual_information(&rho, &["A"], &["B"]).unwrap().value;
            let i_ac = mutual_information(&rho, &["A"], &["C"]).unwrap().value;
            assert!((coh - 0.5 * (i_ab - i_ac)).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_subadditivity_on_random_states() {
        let mut s = random::Sampler::new(61);
        let space = LabeledSpace::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        for _ in 0..200 {
            let rho = random::random_density::<f64>(&space, 4, &mut s).unwrap();
            let i = conditional_mutual_information(&rho, &["A"], &["B"], &["C"])
                .unwrap()
                .value;
            assert!(i > -1e-9, "SSA violated: {i}");
        }
    }

    #[test]
    fn h_min_of_product_with_mixed_conditioner() {
        let mut s = random::Sampler::new(62);
        let pi_a = DensityOperator::<f64>::maximally_mixed(qubit("A"));
        let sigma_b = random::random_density::<f64>(&qubit("B"), 2, &mut s).unwrap();
        let rho = pi_a.tensor(&sigma_b).unwrap();
        let r = h_min(&rho, &["B"]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "H_min {} vs 1", r.value);
    }

    #[test]
    fn h_min_unconditional_closed_forms() {
        let psi = PureState::<f64>::basis_state(qubit("A"), 0).unwrap().to_density();
        assert!(h_min(&psi, &[]).unwrap().value.abs() < 1e-10);
        let pi = DensityOperator::<f64>::maximally_mixed(qubit("A"));
        assert!((h_min(&pi, &[]).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn h_min_of_epr_is_minus_one() {
        let phi = maximally_entangled::<f64>("A", "B", 2).unwrap().to_density();
        let r = h_min(&phi, &["B"]).unwrap();
        assert!((r.value + 1.0).abs() < 1e-4, "H_min {} vs -1", r.value);
    }

    #[test]
    fn h_2_closed_and_product_cases() {
        let pi = DensityOperator::<f64>::maximally_mixed(LabeledSpace::single("A", 4));
        assert!((h_2(&pi, &[]).unwrap().value - 2.0).abs() < 1e-10);
        let mut s = random::Sampler::new(63);
        let sigma_b = random::random_density::<f64>(&qubit("B"), 2, &mut s).unwrap();
        let rho = DensityOperator::<f64>::maximally_mixed(qubit("A"))
            .tensor(&sigma_b)
            .unwrap();
        let r = h_2(&rho, &["B"]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "H₂ {} vs 1", r.value);
    }

    #[test]
    fn h_max_of_maximally_mixed() {
        let pi = DensityOperator::<f64>::maximally_mixed(LabeledSpace::single("A", 3));
        assert!((h_max(&pi, &[]).unwrap().value - 3.0f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn h_max_of_epr_via_duality() {
        let phi = maximally_entangled::<f64>("A", "B", 2).unwrap().to_density();
        let r = h_max(&phi, &["B"]).unwrap();
        assert!((r.value + 1.0).abs() < 1e-4, "H_max {} vs -1", r.value);
    }

    #[test]
    fn ordering_chain_on_random_states() {
        let mut s = random::Sampler::new(64);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        for _ in 0..25 {
            let rho = random::random_density::<f64>(&space, 3, &mut s).unwrap();
            let hmin = h_min(&rho, &["B"]).unwrap().value;
            let h2 = h_2(&rho, &["B"]).unwrap().value;
            let h = conditional_entropy(&rho, &["A"], &["B"]).unwrap().value;
            let hmax = h_max(&rho, &["B"]).unwrap().value;
            assert!(hmin <= h2 + 1e-6, "H_min {hmin} vs H₂ {h2}");
            assert!(hmin <= h + 1e-6, "H_min {hmin} vs H {h}");
            assert!(h <= hmax + 1e-6, "H {h} vs H_max {hmax}");
        }
    }

    #[test]
    fn h_max_duality_is_purification_invariant() {
        let mut s = random::Sampler::new(65);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        let rho = random::random_density::<f64>(&space, 3, &mut s).unwrap();
        let direct = h_max(&rho, &["B"]).unwrap().value;
        // different purification: rotate the purifier
        let psi = rho.purify("P").unwrap();
        let u = random::haar_unitary_op::<f64>(&LabeledSpace::single("P", 3), &mut s);
        let rotated = u.apply_to_pure(&psi).unwrap();
        let reduced = rotated.marginal(&["A", "P"]).unwrap();
        let via_other = -h_min(&reduced, &["P"]).unwrap().value;
        assert!(
            (direct - via_other).abs() < 1e-6,
            "duality mismatch {direct} vs {via_other}"
        );
    }

    #[test]
    fn h_max_operational_identity_qubit() {
        // 2^{H_max(A|B)} = |A| max_σ F(ρ, π⊗σ)² on a random two-qubit state
        let mut s = random::Sampler::new(66);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        let rho = random::random_density::<f64>(&space, 2, &mut s).unwrap();
        let hmax = h_max(&rho, &["B"]).unwrap().value;
        let pi_a = DensityOperator::<f64>::maximally_mixed(qubit("A"));
        let mut best = 0.0f64;
        // Bloch-ball grid over σ^B
        let steps = 14;
        for ix in 0..steps {
            for iy in 0..steps {
                for iz in 0..steps {
                    let r = |i: usize| 2.0 * (i as f64 + 0.5) / steps as f64 - 1.0;
                    let (x, y, z) = (r(ix), r(iy), r(iz));
                    if x * x + y * y + z * z >= 1.0 {
                        continue;
                    }
                    let m = Mat::from_row_slice(
                        2,
                        2,
                        &[
                            C64::new(0.5 * (1.0 + z), 0.0),
                            C64::new(0.5 * x, -0.5 * y),
                            C64::new(0.5 * x, 0.5 * y),
                            C64::new(0.5 * (1.0 - z), 0.0),
                        ],
                    );
                    let sigma = DensityOperator::from_parts_unchecked(qubit("B"), m);
                    let prod = pi_a.tensor(&sigma).unwrap();
                    let f = fidelity(&rho, &prod).unwrap();
                    best = best.max(f * f * 2.0);
                }
            }
        }
        assert!(
            (2.0f64.powf(hmax) - best).abs() < 0.02,
            "2^Hmax {} vs |A|max F² {}",
            2.0f64.powf(hmax),
            best
        );
    }

    #[test]
    fn operational_min_entropy_identity_qubit() {
        // 2^{−H_min(A|B)} = |A|·max_F F((I⊗F)(ρ), Φ)² with the max searched
        // over channels F^{B→A'} (decoder-search oracle, a lower bound)
        use crate::channel::Channel;
        let mut s = random::Sampler::new(660);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        let rho = random::random_density::<f64>(&space, 2, &mut s).unwrap();
        let hmin = h_min(&rho, &["B"]).unwrap().value;
        let target = crate::linalg::exp2(-hmin);
        let phi = maximally_entangled::<f64>("A", "A'", 2).unwrap().to_density();
        let b_space = LabeledSpace::single("B", 2);
        let aprime = LabeledSpace::single("A'", 2);
        let mut best = 0.0f64;
        let mut stine = random::haar_unitary::<f64>(8, &mut s);
        let eval = |v: &Mat| -> f64 {
            // channel from the first two columns of an 8×8 unitary: B → A'⊗G
            let kraus: Vec<Mat> = (0..4)
                .map(|g| Mat::from_fn(2, 2, |r, c| v[(r * 4 + g, c)]))
                .collect();
            let f = Channel::new(b_space.clone(), aprime.clone(), kraus).unwrap();
            let out = f.apply(&rho).unwrap();
            let fv = fidelity(&out.permuted(&["A", "A'"]).unwrap(), &phi).unwrap();
            2.0 * fv * fv
        };
        let mut val = eval(&stine.columns(0, 2).into_owned());
        let mut step = 0.5f64;
        for r in 0..4000 {
            if r % 1000 == 999 {
                stine = random::haar_unitary::<f64>(8, &mut s);
                val = eval(&stine.columns(0, 2).into_owned());
                step = 0.5;
            }
            let i = s.below(8);
            let mut j = s.below(8);
            if i == j {
                j = (j + 1) % 8;
            }
            let phase = 2.0 * std::f64::consts::PI * s.uniform();
            let rot = C64::new(phase.cos(), phase.sin());
            let mut cand = stine.clone();
            for col in 0..8 {
                let ai = cand[(i, col)];
                let aj = cand[(j, col)];
                cand[(i, col)] = C64::new(step.cos(), 0.0) * ai + rot * C64::new(step.sin(), 0.0) * aj;
                cand[(j, col)] =
                    -rot.conj() * C64::new(step.sin(), 0.0) * ai + C64::new(step.cos(), 0.0) * aj;
            }
            let v = eval(&cand.columns(0, 2).into_owned());
            if v > val {
                val = v;
                stine = cand;
            } else {
                step = (step * 0.995).max(1e-3);
            }
            best = best.max(val);
        }
        // any channel lower-bounds the operational value, and the search
        // should essentially attain it
        assert!(best <= target + 1e-6, "searched {best} above 2^(-Hmin) {target}");
        assert!(
            best >= target - 5e-3,
            "decoder search {best} did not reach 2^(-Hmin) {target}"
        );
    }

    #[test]
    fn smooth_zero_radius_is_unsmoothed() {
        let mut s = random::Sampler::new(67);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        let rho = random::random_density::<f64>(&space, 3, &mut s).unwrap();
        let plain = h_2(&rho, &["B"]).unwrap().value;
        let sm = smooth(EntropyKind::Two, &rho, &["B"], 0.0, SmoothingStrategy::Best).unwrap();
        assert!((sm.report.value - plain).abs() < 1e-9);
    }

    #[test]
    fn truncation_smoothing_improves_near_pure_h2() {
        // near-pure state: tiny eigenvalues suppress H₂; truncating them
        // strictly increases the reported lower bound
        let mut s = random::Sampler::new(68);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
        let m = psi.to_density().matrix() * C64::new(0.99, 0.0)
            + linalg::identity::<f64>(4) * C64::new(0.01 / 4.0, 0.0);
        let tr = linalg::trace(&m).re;
        let rho = DensityOperator::from_parts_unchecked(space, m / C64::new(tr, 0.0));
        let plain = h_2(&rho, &[]).unwrap().value;
        let sm = smooth(
            EntropyKind::Two,
            &rho,
            &[],
            0.2,
            SmoothingStrategy::Truncate,
        )
        .unwrap();
        assert!(
            sm.report.value > plain + 1e-7,
            "smoothing didn't help: {} vs {}",
            sm.report.value,
            plain
        );
        assert!(sm.member_distance <= 0.2 + 1e-5);
        assert!(sm.member.trace() <= 1.0 + 1e-9);
    }

    #[test]
    fn smoothing_is_monotone_in_radius() {
        let mut s = random::Sampler::new(69);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        for _ in 0..5 {
            let rho = random::random_density::<f64>(&space, 4, &mut s).unwrap();
            let mut last = f64::NEG_INFINITY;
            for eps in [0.0, 0.05, 0.1, 0.2, 0.4] {
                let sm = smooth(EntropyKind::Two, &rho, &["B"], eps, SmoothingStrategy::Best)
                    .unwrap();
                assert!(
                    sm.report.value >= last - 1e-7,
                    "not monotone at ε={eps}: {} < {last}",
                    sm.report.value
                );
                last = sm.report.value;
            }
        }
    }

    #[test]
    fn aep_bound_examples() {
        // n → ∞ limit approaches H(A|B)
        let h = 0.7;
        let b = aep_bound(h, 2, 100_000_000, 0.1).unwrap();
        assert!((b - h).abs() < 1e-2);
        // explicit formula evaluation
        let b = aep_bound(h, 2, 10_000, 0.1).unwrap();
        let eta: f64 = 2.0 * 2.0f64.sqrt() + 1.0;
        let expect = h - 4.0 * eta.log2() * ((200.0f64).log2() / 1e4).sqrt();
        assert!((b - expect).abs() < 1e-12);
        // below threshold errors out
        assert!(aep_bound(h, 2, 3, 0.01).is_err());
    }

    #[test]
    fn aep_respected_by_iid_maximally_mixed() {
        // per-copy smooth H_min of π^{⊗n} is exactly log d ≥ the AEP bound
        let d = 2usize;
        for n in [20usize, 50, 200] {
            let bound = aep_bound(1.0, d, n, 0.1).unwrap();
            let exact_per_copy = 1.0; // H_min(π^{⊗n}) = n·log d exactly
            assert!(exact_per_copy >= bound - 1e-12);
        }
    }
}
