//! Decoupling experiments: Monte-Carlo estimates of the averaged
//! trace-distance left-hand side against analytic right-hand sides, the
//! concentration tail, the named corollaries, and randomness destruction.

use crate::channel::Channel;
use crate::entropy::{self, EntropyKind, SmoothingStrategy};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::random::{self, Sampler};
use crate::tensor::{trace_distance, DensityOperator, LabeledSpace, LinearOp};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Haar,
    Clifford,
}

/// Record of one Monte-Carlo decoupling run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecouplingExperiment {
    pub sampler_kind: SamplerKind,
    pub n_samples: usize,
    pub seed: u64,
    pub eps: f64,
    /// Per-sample `‖T(U·ρ) − ω^E ⊗ ρ^R‖₁`, each in [0, 2].
    pub samples: Vec<f64>,
    pub mean: f64,
    pub max: f64,
    pub std: f64,
    pub rhs: f64,
}

impl DecouplingExperiment {
    /// Monte-Carlo slack `3·std/√n` used by the bound checks.
    pub fn three_sigma(&self) -> f64 {
        3.0 * self.std / (self.n_samples as f64).sqrt()
    }

    pub fn bound_satisfied(&self) -> bool {
        self.mean <= self.rhs + self.three_sigma()
    }
}

/// Smooth 2-entropy lower bound used by the decoupling right-hand sides.
fn h2_smooth(rho: &DensityOperator<f64>, cond: &[&str], eps: f64) -> Result<f64> {
    Ok(
        entropy::smooth(EntropyKind::Two, rho, cond, eps, SmoothingStrategy::Best)?
            .report
            .value,
    )
}

/// Analytic right-hand side `2^{−½H₂^ε(A'|E)_ω − ½H₂^ε(A|R)_ρ} (+ 8ε)`.
///
/// The smooth entropies enter through certified lower bounds, so the value is
/// a valid upper bound on the true smooth right-hand side. `ε = 0` gives the
/// unsmoothed bound.
pub fn rhs(rho: &DensityOperator<f64>, r_labels: &[&str], t: &Channel, eps: f64) -> Result<f64> {
    let omega = t.choi_state()?;
    let e_labels = t.out_space().labels();
    let h2_ae = h2_smooth(&omega, &e_labels, eps)?;
    let h2_ar = h2_smooth(rho, r_labels, eps)?;
    let additive = if eps > 0.0 { 8.0 * eps } else { 0.0 };
    Ok(linalg::exp2(-0.5 * h2_ae - 0.5 * h2_ar) + additive)
}

fn draw_unitary(kind: SamplerKind, dim: usize, sampler: &mut Sampler) -> Result<CMat<f64>> {
    match kind {
        SamplerKind::Haar => Ok(random::haar_unitary::<f64>(dim, sampler)),
        SamplerKind::Clifford => {
            let n_qubits = match dim {
                2 => 1,
                4 => 2,
                _ => {
                    return Err(Error::Unsupported(format!(
                        "clifford sampler needs |A| in {{2, 4}}, got {dim}"
                    )))
                }
            };
            random::clifford_sample(n_qubits, sampler)
        }
    }
}

/// Monte-Carlo mean of `‖T(U·ρ^{AR}) − ω^E ⊗ ρ^R‖₁` over sampled unitaries
/// on the channel's input labels. Per-sample work runs on forked sub-seeded
/// samplers and is aggregated in index order, so results are deterministic
/// under any thread schedule.
pub fn lhs_mc(
    rho: &DensityOperator<f64>,
    t: &Channel,
    kind: SamplerKind,
    n_samples: usize,
    eps: f64,
    sampler: &mut Sampler,
) -> Result<DecouplingExperiment> {
    if n_samples == 0 {
        return Err(Error::HypothesisViolated("n_samples must be ≥ 1".into()));
    }
    let a_space = t.in_space().clone();
    let a_labels = a_space.labels();
    let r_space = rho.space().without(&a_labels)?;
    let r_labels = r_space.labels();
    let seed = sampler.seed();

    // target ω^E ⊗ ρ^R, permuted to the channel-output label order
    let pi_a = DensityOperator::maximally_mixed(a_space.clone());
    let omega_e = t.apply(&pi_a)?;
    let rho_r = rho.marginal(&r_labels)?;
    let probe = t.apply(rho)?;
    let target = omega_e.tensor(&rho_r)?.permuted(&probe.space().labels())?;

    let rhs_value = rhs(rho, &r_labels, t, eps)?;

    let seeds: Vec<u64> = (0..n_samples).map(|_| sampler.fork_seed()).collect();
    let samples: Vec<f64> = seeds
        .into_par_iter()
        .map(|s| {
            let mut local = Sampler::new(s);
            let u = draw_unitary(kind, a_space.dim(), &mut local)?;
            let u_op = LinearOp::new(a_space.clone(), a_space.clone(), u)?;
            let rotated = u_op.conjugate_density(rho)?;
            let out = t.apply(&rotated)?;
            trace_distance(&out, &target)
        })
        .collect::<Result<Vec<f64>>>()?;

    // samples of a TP channel are trace distances of states, hence in [0, 2];
    // general CP maps can exceed 2 on single draws (only the mean is bounded)
    let sample_cap = if t.is_trace_preserving() { 2.0 + 1e-9 } else { f64::INFINITY };
    for &v in &samples {
        if !(0.0..=sample_cap).contains(&v) {
            return Err(Error::InvalidState(format!(
                "trace-distance sample {v} outside [0, 2]"
            )));
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let max = samples.iter().cloned().fold(0.0, f64::max);
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(DecouplingExperiment {
        sampler_kind: kind,
        n_samples,
        seed,
        eps,
        samples,
        mean,
        max,
        std: var.sqrt(),
        rhs: rhs_value,
    })
}

/// Concentration experiment: empirical tail fraction of samples exceeding
/// `rhs + r` against the analytic `2·exp(−|A|r²/(16K²‖ρ^A‖∞))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationOutcome {
    pub empirical_tail: f64,
    pub analytic_bound: f64,
    pub lipschitz_k: f64,
    pub threshold: f64,
    pub experiment: DecouplingExperiment,
}

pub fn concentration(
    rho: &DensityOperator<f64>,
    t: &Channel,
    n_samples: usize,
    r: f64,
    sampler: &mut Sampler,
) -> Result<ConcentrationOutcome> {
    let exp = lhs_mc(rho, t, SamplerKind::Haar, n_samples, 0.0, sampler)?;
    let threshold = exp.rhs + r;
    let tail =
        exp.samples.iter().filter(|&&x| x > threshold).count() as f64 / exp.n_samples as f64;
    let a_labels = t.in_space().labels();
    let rho_a = rho.marginal(&a_labels)?;
    let norm_inf = linalg::largest_eigval(rho_a.matrix());
    let k = t.lipschitz_k();
    let dim_a = t.in_space().dim() as f64;
    let bound = 2.0 * (-(dim_a * r * r) / (16.0 * k * k * norm_inf)).exp();
    Ok(ConcentrationOutcome {
        empirical_tail: tail,
        analytic_bound: bound.min(1e18),
        lipschitz_k: k,
        threshold,
        experiment: exp,
    })
}

// ---------------------------------------------------------------------------
// Corollaries
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorollaryKind {
    /// Trace out `A₂` of `A = A₁A₂`.
    Fqsw,
    /// Rank-`|E|` block measurement into `E ⊗ X`.
    Merge,
    /// Scaled conjugation by a fixed rank-`|E|` partial isometry.
    Subspace,
    /// Restrict to a subspace `E₁E₂` and trace out `E₂`.
    ProjectiveMerge,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CorollaryParams {
    pub kind: CorollaryKind,
    /// Input dimension `|A|`.
    pub dim_a: usize,
    /// `|A₁|` (fqsw), `|E|` (merge, subspace), `|E₁|` (projective-merge).
    pub split: usize,
    /// `|E₂|` for projective-merge; ignored elsewhere.
    pub split2: usize,
    /// Reference dimension `|R|`.
    pub dim_r: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorollaryRun {
    pub params: CorollaryParams,
    /// Closed-form right-hand side from the corollary statement.
    pub rhs_closed: f64,
    /// Generic right-hand side through `H₂` of the Choi state.
    pub rhs_generic: f64,
    pub experiment: DecouplingExperiment,
}

/// Block partial isometry `A → E` mapping `|b·|E| + e⟩ ↦ |e⟩` for block `b`.
fn block_isometry(a_space: &LabeledSpace, e_space: &LabeledSpace, block: usize) -> CMat<f64> {
    let da = a_space.dim();
    let de = e_space.dim();
    let mut m = CMat::<f64>::zeros(de, da);
    for e in 0..de {
        m[(e, block * de + e)] = C64::new(1.0, 0.0);
    }
    m
}

/// The corollary's specialized channel plus the closed-form factor
/// `2^{−H₂(A'|E)_ω}` of its right-hand side.
pub fn corollary_channel(params: &CorollaryParams) -> Result<(Channel, f64)> {
    match params.kind {
        CorollaryKind::Fqsw => {
            let (d1, da) = (params.split, params.dim_a);
            if da % d1 != 0 {
                return Err(Error::DimensionMismatch(format!(
                    "|A| = {da} not divisible by |A1| = {d1}"
                )));
            }
            let d2 = da / d1;
            let space = LabeledSpace::new([("A1", d1), ("A2", d2)])?;
            let ch = Channel::trace_out(&space, &["A2"])?;
            Ok((ch, d1 as f64 / d2 as f64))
        }
        CorollaryKind::Merge => {
            let (de, da) = (params.split, params.dim_a);
            if da % de != 0 {
                return Err(Error::DimensionMismatch(format!(
                    "|A| = {da} not divisible by |E| = {de}"
                )));
            }
            let n = da / de;
            let a_space = LabeledSpace::single("A", da);
            let e_space = LabeledSpace::single("E", de);
            let x_space = LabeledSpace::single("X", n);
            let out = e_space.tensor(&x_space)?;
            let mut kraus = Vec::with_capacity(n);
            for i in 0..n {
                let m = block_isometry(&a_space, &e_space, i);
                let mut k = CMat::<f64>::zeros(de * n, da);
                for e in 0..de {
                    for a in 0..da {
                        k[(e * n + i, a)] = m[(e, a)];
                    }
                }
                kraus.push(k);
            }
            let ch = Channel::new(a_space, out, kraus)?;
            Ok((ch, de as f64))
        }
        CorollaryKind::Subspace => {
            let (de, da) = (params.split, params.dim_a);
            if de > da {
                return Err(Error::DimensionMismatch(format!(
                    "|E| = {de} exceeds |A| = {da}"
                )));
            }
            let a_space = LabeledSpace::single("A", da);
            let e_space = LabeledSpace::single("E", de);
            let v = block_isometry(&a_space, &e_space, 0);
            let scale = da as f64 / de as f64;
            let ch = Channel::new_cp(a_space, e_space, vec![v * C64::new(scale.sqrt(), 0.0)])?;
            Ok((ch, de as f64))
        }
        CorollaryKind::ProjectiveMerge => {
            let (d1, d2, da) = (params.split, params.split2, params.dim_a);
            let de = d1 * d2;
            if de > da {
                return Err(Error::DimensionMismatch(format!(
                    "|E1E2| = {de} exceeds |A| = {da}"
                )));
            }
            let a_space = LabeledSpace::single("A", da);
            let e_space = LabeledSpace::new([("E1", d1), ("E2", d2)])?;
            let v = block_isometry(&a_space, &e_space, 0);
            let scale = da as f64 / de as f64;
            let embed = Channel::new_cp(
                a_space.clone(),
                e_space.clone(),
                vec![v * C64::new(scale.sqrt(), 0.0)],
            )?;
            // compose with trace-out of E2
            let drop = Channel::trace_out(&e_space, &["E2"])?;
            let mut kraus = Vec::new();
            for kd in drop.kraus() {
                for ke in embed.kraus() {
                    kraus.push(kd * ke);
                }
            }
            let ch = Channel::new_cp(a_space, e_space.without(&["E2"])?, kraus)?;
            Ok((ch, d1 as f64 / d2 as f64))
        }
    }
}

/// Runs a corollary instance end to end: builds the specialized channel,
/// draws a random rank-`input_rank` input `ρ^{AR}`, evaluates both
/// right-hand-side routes, and runs the Monte-Carlo left-hand side.
pub fn corollary_run(
    params: &CorollaryParams,
    input_rank: usize,
    kind: SamplerKind,
    n_samples: usize,
    sampler: &mut Sampler,
) -> Result<CorollaryRun> {
    let (channel, closed_factor) = corollary_channel(params)?;
    let r_space = LabeledSpace::single("R", params.dim_r);
    let joint = channel.in_space().tensor(&r_space)?;
    let rho = random::random_density::<f64>(&joint, input_rank, sampler)?;
    corollary_run_on(params, &rho, &channel, closed_factor, kind, n_samples, sampler)
}

pub fn corollary_run_on(
    params: &CorollaryParams,
    rho: &DensityOperator<f64>,
    channel: &Channel,
    closed_factor: f64,
    kind: SamplerKind,
    n_samples: usize,
    sampler: &mut Sampler,
) -> Result<CorollaryRun> {
    let a_labels = channel.in_space().labels();
    let r_space = rho.space().without(&a_labels)?;
    let r_labels = r_space.labels();
    let h2_ar = entropy::h_2(rho, &r_labels)?.value;
    let rhs_closed = (closed_factor * linalg::exp2(-h2_ar)).sqrt();
    let experiment = lhs_mc(rho, channel, kind, n_samples, 0.0, sampler)?;
    Ok(CorollaryRun {
        params: *params,
        rhs_closed,
        rhs_generic: experiment.rhs,
        experiment,
    })
}

// ---------------------------------------------------------------------------
// Randomness destruction
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomizeOutcome {
    /// `2^k`, the number of mixing unitaries.
    pub n_unitaries: usize,
    /// Dimension of the Weyl subspace actually used.
    pub subspace_dim: usize,
    /// Best achieved `‖2^{-k} Σ U_i·ρ − ξ ⊗ ρ^B‖₁` over the sampled `U`.
    pub residual: f64,
    /// Theorem bound `2√δ₁ + δ₂` (infinite at ε = 0).
    pub bound: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// Destroys correlations with `B` by mixing over `2^k` unitaries
/// `U_i = V_i U`: the `V_i` are Weyl operators on a dimension-`D` subspace
/// (identity on the complement) and `U` is searched over `n_candidates` Haar
/// samples. `subspace_dim = None` takes `D = ⌈2^{H_max^ε(A) + 2·log(1/ε)}⌉`
/// from the bound derivation; explicit values support the desk-scale
/// instances whose formula-D would exceed `|A|`.
pub fn randomize_destroy(
    rho: &DensityOperator<f64>,
    b_labels: &[&str],
    k: u32,
    eps: f64,
    subspace_dim: Option<usize>,
    n_candidates: usize,
    sampler: &mut Sampler,
) -> Result<(Vec<CMat<f64>>, RandomizeOutcome)> {
    let a_space = rho.space().without(b_labels)?;
    let dim_a = a_space.dim();
    let a_labels = a_space.labels();
    let rho_a = rho.marginal(&a_labels)?;
    let hmax_eps = entropy::smooth(EntropyKind::Max, &rho_a, &[], eps, SmoothingStrategy::Best)?
        .report
        .value;
    let d = match subspace_dim {
        Some(d) => d,
        None => {
            if eps <= 0.0 {
                return Err(Error::HypothesisViolated(
                    "ε must be positive to derive the subspace dimension".into(),
                ));
            }
            let log_d = hmax_eps + 2.0 * (1.0 / eps).log2();
            linalg::exp2(log_d).ceil() as usize
        }
    };
    if d == 0 || d > dim_a {
        return Err(Error::DimensionMismatch(format!(
            "subspace dimension D = {d} outside 1..=|A| = {dim_a}; the construction needs D ≤ |A|"
        )));
    }
    let n_unitaries = 1usize << k;
    if n_unitaries > d * d {
        return Err(Error::DimensionMismatch(format!(
            "2^k = {n_unitaries} exceeds the D² = {} Weyl operators on the subspace",
            d * d
        )));
    }

    // Weyl operators on the D-dim subspace, identity on the complement
    let weyls = random::weyl_operators::<f64>(d);
    let v_ops: Vec<CMat<f64>> = weyls
        .iter()
        .take(n_unitaries)
        .map(|w| {
            let mut full = linalg::identity::<f64>(dim_a);
            for i in 0..d {
                for j in 0..d {
                    full[(i, j)] = w[(i, j)];
                }
            }
            full
        })
        .collect();

    // ξ = P/D: maximally mixed on the subspace
    let mut xi = CMat::<f64>::zeros(dim_a, dim_a);
    for i in 0..d {
        xi[(i, i)] = C64::new(1.0 / d as f64, 0.0);
    }
    let xi = DensityOperator::from_parts_unchecked(a_space.clone(), xi);
    let rho_b = rho.marginal(b_labels)?;
    let target = xi.tensor(&rho_b)?;

    let h2_eps = entropy::smooth(EntropyKind::Two, rho, b_labels, eps, SmoothingStrategy::Best)?
        .report
        .value;
    let (delta1, delta2, bound) = if eps > 0.0 {
        let log_d = (d as f64).log2();
        let d1 = 3.0 * linalg::exp2(0.5 * (hmax_eps - log_d)) + 24.0 * eps;
        let d2 = 3.0 * linalg::exp2(0.5 * (log_d - k as f64 - h2_eps)) + 24.0 * eps;
        (d1, d2, 2.0 * d1.sqrt() + d2)
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };

    let mut best_residual = f64::INFINITY;
    let mut best_u = linalg::identity::<f64>(dim_a);
    for _ in 0..n_candidates.max(1) {
        let u = random::haar_unitary::<f64>(dim_a, sampler);
        let u_op = LinearOp::new(a_space.clone(), a_space.clone(), u.clone())?;
        let rotated = u_op.conjugate_density(rho)?;
        let mut mixed = CMat::<f64>::zeros(rotated.matrix().nrows(), rotated.matrix().ncols());
        for v in &v_ops {
            let v_op = LinearOp::new(a_space.clone(), a_space.clone(), v.clone())?;
            let term = v_op.conjugate_density(&rotated)?;
            mixed += term.matrix();
        }
        mixed /= C64::new(n_unitaries as f64, 0.0);
        let chi = DensityOperator::from_parts_unchecked(rotated.space().clone(), mixed);
        let dist = trace_distance(&chi.permuted(&target.space().labels())?, &target)?;
        if dist < best_residual {
            best_residual = dist;
            best_u = u;
        }
    }

    let unitaries: Vec<CMat<f64>> = v_ops.iter().map(|v| v * &best_u).collect();
    Ok((
        unitaries,
        RandomizeOutcome {
            n_unitaries,
            subspace_dim: d,
            residual: best_residual,
            bound,
            delta1,
            delta2,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::maximally_entangled;

    #[test]
    fn invariant_input_gives_zero_lhs_for_trace_out() {
        // ρ = π^A ⊗ ρ^R with T = trace-out: every sample is exactly 0
        let mut s = Sampler::new(70);
        let a_space = LabeledSpace::new([("A1", 2), ("A2", 2)]).unwrap();
        let pi_a = DensityOperator::<f64>::maximally_mixed(a_space.clone());
        let rho_r =
            random::random_density::<f64>(&LabeledSpace::single("R", 2), 2, &mut s).unwrap();
        let rho = pi_a.tensor(&rho_r).unwrap();
        let t = Channel::trace_out(&a_space, &["A2"]).unwrap();
        let exp = lhs_mc(&rho, &t, SamplerKind::Haar, 20, 0.0, &mut s).unwrap();
        assert!(exp.max < 1e-12, "max sample {}", exp.max);
    }

    #[test]
    fn fqsw_instance_respects_bound() {
        let mut s = Sampler::new(71);
        let params = CorollaryParams {
            kind: CorollaryKind::Fqsw,
            dim_a: 4,
            split: 2,
            split2: 1,
            dim_r: 2,
        };
        let run = corollary_run(&params, 1, SamplerKind::Haar, 100, &mut s).unwrap();
        assert!(
            run.experiment.bound_satisfied(),
            "mean {} rhs {} (+3σ {})",
            run.experiment.mean,
            run.experiment.rhs,
            run.experiment.three_sigma()
        );
    }

    #[test]
    fn fqsw_product_instance_rhs_is_half() {
        // ρ = π^A ⊗ π^R, 2/2 split: H₂(A|R) = 2 so rhs = √(2^{-2}) = 1/2
        let a_space = LabeledSpace::new([("A1", 2), ("A2", 2)]).unwrap();
        let rho = DensityOperator::<f64>::maximally_mixed(a_space.clone())
            .tensor(&DensityOperator::maximally_mixed(LabeledSpace::single("R", 2)))
            .unwrap();
        let t = Channel::trace_out(&a_space, &["A2"]).unwrap();
        let v = rhs(&rho, &["R"], &t, 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-6, "rhs {v}");
    }

    #[test]
    fn corollary_closed_forms_match_generic() {
        let mut s = Sampler::new(72);
        let cases = [
            CorollaryParams {
                kind: CorollaryKind::Fqsw,
                dim_a: 4,
                split: 2,
                split2: 1,
                dim_r: 2,
            },
            CorollaryParams {
                kind: CorollaryKind::Merge,
                dim_a: 4,
                split: 2,
                split2: 1,
                dim_r: 2,
            },
            CorollaryParams {
                kind: CorollaryKind::Subspace,
                dim_a: 4,
                split: 4,
                split2: 1,
                dim_r: 2,
            },
            CorollaryParams {
                kind: CorollaryKind::ProjectiveMerge,
                dim_a: 4,
                split: 2,
                split2: 2,
                dim_r: 2,
            },
        ];
        for params in cases {
            let run = corollary_run(&params, 2, SamplerKind::Haar, 4, &mut s).unwrap();
            assert!(
                (run.rhs_closed - run.rhs_generic).abs() < 1e-8,
                "{:?}: closed {} vs generic {}",
                params.kind,
                run.rhs_closed,
                run.rhs_generic
            );
        }
    }

    #[test]
    fn subspace_with_full_dimension_is_unitary_case() {
        // |E| = |A|: ω is pure and the channel is the full-space rotation
        let params = CorollaryParams {
            kind: CorollaryKind::Subspace,
            dim_a: 4,
            split: 4,
            split2: 1,
            dim_r: 2,
        };
        let (ch, factor) = corollary_channel(&params).unwrap();
        assert_eq!(factor, 4.0);
        let choi = ch.choi_state().unwrap();
        assert!((choi.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn concentration_trivial_threshold() {
        let mut s = Sampler::new(73);
        let a_space = LabeledSpace::new([("A1", 2), ("A2", 2)]).unwrap();
        let joint = a_space.tensor(&LabeledSpace::single("R", 2)).unwrap();
        let rho = random::random_density::<f64>(&joint, 1, &mut s).unwrap();
        let t = Channel::trace_out(&a_space, &["A2"]).unwrap();
        assert!((t.lipschitz_k() - 1.0).abs() < 1e-12);
        let out = concentration(&rho, &t, 40, 2.0, &mut s).unwrap();
        // distances are ≤ 2 so a threshold of rhs + 2 is never exceeded
        assert_eq!(out.empirical_tail, 0.0);
    }

    #[test]
    fn concentration_tail_below_bound_at_dim_16() {
        let mut s = Sampler::new(74);
        let a_space = LabeledSpace::new([("A1", 4), ("A2", 4)]).unwrap();
        let joint = a_space.tensor(&LabeledSpace::single("R", 2)).unwrap();
        let rho = random::random_density::<f64>(&joint, 1, &mut s).unwrap();
        let t = Channel::trace_out(&a_space, &["A2"]).unwrap();
        let out = concentration(&rho, &t, 150, 0.35, &mut s).unwrap();
        assert!(
            out.empirical_tail <= out.analytic_bound + 1e-12,
            "tail {} bound {}",
            out.empirical_tail,
            out.analytic_bound
        );
    }

    #[test]
    fn clifford_and_haar_means_agree_for_every_corollary() {
        let mut s = Sampler::new(75);
        let kinds = [
            CorollaryKind::Fqsw,
            CorollaryKind::Merge,
            CorollaryKind::Subspace,
            CorollaryKind::ProjectiveMerge,
        ];
        for kind in kinds {
            let params = CorollaryParams {
                kind,
                dim_a: 4,
                split: 2,
                split2: 2,
                dim_r: 2,
            };
            let (channel, _) = corollary_channel(&params).unwrap();
            let joint = channel
                .in_space()
                .tensor(&LabeledSpace::single("R", 2))
                .unwrap();
            let rho = random::random_density::<f64>(&joint, 1, &mut s).unwrap();
            let haar = lhs_mc(&rho, &channel, SamplerKind::Haar, 300, 0.0, &mut s).unwrap();
            let cliff = lhs_mc(&rho, &channel, SamplerKind::Clifford, 300, 0.0, &mut s).unwrap();
            let joint_sigma =
                (haar.std * haar.std / 300.0 + cliff.std * cliff.std / 300.0).sqrt();
            assert!(
                (haar.mean - cliff.mean).abs() <= 3.0 * joint_sigma + 1e-9,
                "{kind:?}: haar {} clifford {} 3σ {}",
                haar.mean,
                cliff.mean,
                3.0 * joint_sigma
            );
        }
    }

    #[test]
    fn rhs_exponential_part_monotone_in_smoothing() {
        let mut s = Sampler::new(80);
        let a_space = LabeledSpace::new([("A1", 2), ("A2", 2)]).unwrap();
        let joint = a_space.tensor(&LabeledSpace::single("R", 2)).unwrap();
        let rho = random::random_density::<f64>(&joint, 2, &mut s).unwrap();
        let t = Channel::trace_out(&a_space, &["A2"]).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.0, 0.05, 0.1, 0.2] {
            let additive = if eps > 0.0 { 8.0 * eps } else { 0.0 };
            let core = rhs(&rho, &["R"], &t, eps).unwrap() - additive;
            assert!(
                core <= last + 1e-9,
                "rhs core not monotone at ε={eps}: {core} > {last}"
            );
            last = core;
        }
    }

    #[test]
    fn full_weyl_mixing_decouples_exactly() {
        // k = 2·log|A| with D = |A|: complete depolarization, residual 0
        let mut s = Sampler::new(76);
        let space = LabeledSpace::new([("A", 2), ("B", 2)]).unwrap();
        let rho = random::random_density::<f64>(&space, 2, &mut s).unwrap();
        let (us, out) = randomize_destroy(&rho, &["B"], 2, 0.25, Some(2), 3, &mut s).unwrap();
        assert_eq!(us.len(), 4);
        assert!(out.residual < 1e-9, "residual {}", out.residual);
    }

    #[test]
    fn product_state_k0_residual_is_marginal_distance() {
        let mut s = Sampler::new(77);
        let rho_a =
            random::random_density::<f64>(&LabeledSpace::single("A", 2), 2, &mut s).unwrap();
        let rho_b =
            random::random_density::<f64>(&LabeledSpace::single("B", 2), 2, &mut s).unwrap();
        let rho = rho_a.tensor(&rho_b).unwrap();
        let (_, out) = randomize_destroy(&rho, &["B"], 0, 0.25, Some(2), 1, &mut s).unwrap();
        // k = 0 leaves a single unitary: ‖Uρ_AU† − π‖₁ is the spectral
        // distance to π, independent of the sampled U
        let eigs = rho_a.eigenvalues();
        let expect: f64 = eigs.iter().map(|l| (l - 0.5).abs()).sum();
        assert!((out.residual - expect).abs() < 1e-9);
    }

    #[test]
    fn epr_randomization_respects_bound() {
        let mut s = Sampler::new(78);
        let rho = maximally_entangled::<f64>("A", "B", 2).unwrap().to_density();
        let (_, out) = randomize_destroy(&rho, &["B"], 2, 0.2, Some(2), 8, &mut s).unwrap();
        if out.bound <= 2.0 {
            assert!(
                out.residual <= out.bound,
                "residual {} bound {}",
                out.residual,
                out.bound
            );
        }
        // full Weyl set on the qubit: output is π ⊗ ρ^B exactly
        assert!(out.residual < 1e-9);
    }

    #[test]
    fn formula_subspace_dimension_errors_when_too_large() {
        let mut s = Sampler::new(79);
        let rho = maximally_entangled::<f64>("A", "B", 2).unwrap().to_density();
        let err = randomize_destroy(&rho, &["B"], 2, 0.05, None, 1, &mut s);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }
}
