//! The acceptance suite: executable checks at pinned tolerances, one result
//! per criterion, runnable from the CLI (`qdec suite`) and from the
//! integration tests. Brute-force oracles used by the checks live here so
//! they stay independent of the implementation paths they certify.

use crate::channel::Channel;
use crate::coding;
use crate::decouple::{self, CorollaryKind, CorollaryParams, SamplerKind};
use crate::entropy;
use crate::error::Result;
use crate::linalg::{self, CMat, CVec};
use crate::locking;
use crate::random::{self, Sampler};
use crate::tensor::{
    fidelity, maximally_entangled, trace_distance, uhlmann_isometry, DensityOperator,
    LabeledSpace, PureState,
};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;
type Mat = CMat<f64>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:2} {:<28} {:>7.1}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.details
        )
    }
}

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "haar-second-moment"),
    (2, "decoupling-bound"),
    (3, "corollary-closed-forms"),
    (4, "entropy-oracles"),
    (5, "uhlmann"),
    (6, "oneshot-coding-soundness"),
    (7, "degenerate-reductions"),
    (8, "rate-formulas"),
    (9, "locking-properties"),
    (10, "appendix-property-suite"),
];

pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let (name, outcome) = match id {
        1 => ("haar-second-moment", criterion_moments(seed)?),
        2 => ("decoupling-bound", criterion_decoupling(seed)?),
        3 => ("corollary-closed-forms", criterion_corollaries(seed)?),
        4 => ("entropy-oracles", criterion_entropy_oracles(seed)?),
        5 => ("uhlmann", criterion_uhlmann(seed)?),
        6 => ("oneshot-coding-soundness", criterion_coding(seed)?),
        7 => ("degenerate-reductions", criterion_reductions(seed)?),
        8 => ("rate-formulas", criterion_rates(seed)?),
        9 => ("locking-properties", criterion_locking(seed)?),
        10 => ("appendix-property-suite", criterion_appendix(seed)?),
        _ => {
            return Err(crate::error::Error::Unsupported(format!(
                "criterion {id} (valid: 1..=10)"
            )))
        }
    };
    Ok(CriterionResult {
        id,
        name: name.to_string(),
        passed: outcome.0,
        details: outcome.1,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(seed: u64) -> Result<Vec<CriterionResult>> {
    (1..=10).map(|id| run_criterion(id, seed)).collect()
}

type Outcome = (bool, String);

// ---------------------------------------------------------------------------
// 1. Haar second moment (Monte-Carlo 3σ) and exact Clifford 2-design
// ---------------------------------------------------------------------------

fn criterion_moments(seed: u64) -> Result<Outcome> {
    let mut parent = Sampler::new(seed ^ 0x01);
    let mut worst_ratio = 0.0f64;
    let n_samples = 100_000;
    for &d in &[2usize, 3, 4] {
        let seeds: Vec<u64> = (0..20).map(|_| parent.fork_seed()).collect();
        let ratios: Vec<f64> = seeds
            .into_par_iter()
            .map(|s| {
                let mut local = Sampler::new(s);
                let m = random::random_matrix::<f64>(d * d, d * d, &mut local);
                let (_, _, expect) = random::haar_second_moment(&m).unwrap();
                let mut draw = local.fork();
                let (mean, sem) =
                    random::second_moment_mc(&m, d, n_samples, move || {
                        random::haar_unitary::<f64>(d, &mut draw)
                    });
                let err = (&mean - &expect).norm();
                let sigma = sem.norm().max(1e-12);
                err / sigma
            })
            .collect();
        for r in ratios {
            worst_ratio = worst_ratio.max(r);
        }
    }
    let mc_pass = worst_ratio <= 3.0;

    // exact 2-design check at |A| ∈ {2, 4}
    let mut worst_exact = 0.0f64;
    for &(d, q) in &[(2usize, 1usize), (4, 2)] {
        for _ in 0..20 {
            let m = random::random_matrix::<f64>(d * d, d * d, &mut parent);
            let avg = random::clifford_second_moment(&m, q)?;
            let (_, _, expect) = random::haar_second_moment(&m)?;
            worst_exact = worst_exact.max((avg - expect).norm());
        }
    }
    let exact_pass = worst_exact <= 1e-9;
    Ok((
        mc_pass && exact_pass,
        format!(
            "worst MC error {worst_ratio:.2}σ (≤3σ); worst Clifford deviation {worst_exact:.2e} (≤1e-9)"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 2. Decoupling bound over 50 trace-out instances
// ---------------------------------------------------------------------------

fn criterion_decoupling(seed: u64) -> Result<Outcome> {
    let mut parent = Sampler::new(seed ^ 0x02);
    let a_space = LabeledSpace::new([("A1", 2), ("A2", 2)])?;
    let t = Channel::trace_out(&a_space, &["A2"])?;
    let mut violations = 0usize;
    let mut worst_margin = f64::NEG_INFINITY;
    let seeds: Vec<(u64, usize, usize)> = (0..50)
        .map(|i| {
            let dim_r = if i % 2 == 0 { 2 } else { 4 };
            let rank = 1 + (i % 3);
            (parent.fork_seed(), dim_r, rank)
        })
        .collect();
    let runs: Vec<(f64, f64, f64)> = seeds
        .into_par_iter()
        .map(|(s, dim_r, rank)| {
            let mut local = Sampler::new(s);
            let joint = a_space
                .tensor(&LabeledSpace::single("R", dim_r))
                .unwrap();
            let rho = random::random_density::<f64>(&joint, rank, &mut local).unwrap();
            let exp =
                decouple::lhs_mc(&rho, &t, SamplerKind::Haar, 500, 0.0, &mut local).unwrap();
            (exp.mean, exp.rhs, exp.three_sigma())
        })
        .collect();
    for (mean, rhs, slack) in runs {
        let margin = mean - rhs - slack;
        worst_margin = worst_margin.max(margin);
        if margin > 0.0 {
            violations += 1;
        }
    }
    // invariant instance: π^A ⊗ ρ^R gives LHS exactly 0
    let pi_a = DensityOperator::<f64>::maximally_mixed(a_space.clone());
    let rho_r = random::random_density::<f64>(&LabeledSpace::single("R", 2), 2, &mut parent)?;
    let rho = pi_a.tensor(&rho_r)?;
    let exp = decouple::lhs_mc(&rho, &t, SamplerKind::Haar, 50, 0.0, &mut parent)?;
    let exact_zero = exp.max <= 1e-12;
    Ok((
        violations == 0 && exact_zero,
        format!(
            "0 violations in 50 instances (worst margin {worst_margin:.2e}); invariant-instance max sample {:.2e}",
            exp.max
        ),
    ))
}

// ---------------------------------------------------------------------------
// 3. Corollary closed forms vs generic Choi-entropy route
// ---------------------------------------------------------------------------

fn criterion_corollaries(seed: u64) -> Result<Outcome> {
    let mut parent = Sampler::new(seed ^ 0x03);
    let kinds = [
        CorollaryKind::Fqsw,
        CorollaryKind::Merge,
        CorollaryKind::Subspace,
        CorollaryKind::ProjectiveMerge,
    ];
    let mut worst = 0.0f64;
    for kind in kinds {
        let mut cases: Vec<(u64, CorollaryParams, usize)> = Vec::new();
        for i in 0..20usize {
            let dim_r = if i % 2 == 0 { 2 } else { 3 };
            let rank = 1 + (i % 2);
            let params = match kind {
                CorollaryKind::Fqsw => CorollaryParams {
                    kind,
                    dim_a: 4,
                    split: 2,
                    split2: 1,
                    dim_r,
                },
                CorollaryKind::Merge => CorollaryParams {
                    kind,
                    dim_a: if i % 3 == 0 { 6 } else { 4 },
                    split: 2,
                    split2: 1,
                    dim_r,
                },
                CorollaryKind::Subspace => CorollaryParams {
                    kind,
                    dim_a: 4,
                    split: if i % 3 == 0 { 2 } else { 4 },
                    split2: 1,
                    dim_r,
                },
                CorollaryKind::ProjectiveMerge => CorollaryParams {
                    kind,
                    dim_a: if i % 3 == 0 { 6 } else { 4 },
                    split: 2,
                    split2: 2,
                    dim_r,
                },
            };
            cases.push((parent.fork_seed(), params, rank));
        }
        let devs: Vec<f64> = cases
            .into_par_iter()
            .map(|(s, params, rank)| {
                let mut local = Sampler::new(s);
                let run =
                    decouple::corollary_run(&params, rank, SamplerKind::Haar, 2, &mut local)
                        .unwrap();
                (run.rhs_closed - run.rhs_generic).abs()
            })
            .collect();
        for d in devs {
            worst = worst.max(d);
        }
    }
    Ok((
        worst <= 1e-8,
        format!("worst closed-vs-generic deviation {worst:.2e} over 80 instances (≤1e-8)"),
    ))
}

// ---------------------------------------------------------------------------
// 4. Entropy optimizers vs Bloch-grid oracles; ordering chain
// ---------------------------------------------------------------------------

fn bloch_sigma(x: f64, y: f64, z: f64) -> Mat {
    Mat::from_row_slice(
        2,
        2,
        &[
            C64::new(0.5 * (1.0 + z), 0.0),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            C64::new(0.5 * (1.0 - z), 0.0),
        ],
    )
}

/// Brute-force oracle for conditional min/2 entropy of a two-qubit state
/// conditioned on its second system: dense Bloch-ball grid with one local
/// refinement pass.
pub fn bloch_grid_oracle(rho: &DensityOperator<f64>, cond: &str, two_entropy: bool) -> f64 {
    let labels = rho.space().labels();
    let a_label: Vec<&str> = labels.iter().copied().filter(|l| *l != cond).collect();
    let mut order = a_label.clone();
    order.push(cond);
    let grouped = rho.permuted(&order).unwrap();
    let rmat = grouped.matrix().clone();
    let objective = |x: f64, y: f64, z: f64| -> f64 {
        let sigma = bloch_sigma(x, y, z);
        let isq = linalg::hermitian_fn(&sigma, |l| 1.0 / l.max(1e-12).sqrt());
        let xfull = linalg::kron(&linalg::identity::<f64>(2), &isq);
        let ymat = &xfull * &rmat * &xfull;
        if two_entropy {
            linalg::trace(&(&ymat * &rmat)).re
        } else {
            linalg::largest_eigval(&ymat)
        }
    };
    let steps = 34usize;
    // coarse pass keeps several candidate basins
    let mut candidates: Vec<(f64, (f64, f64, f64))> = Vec::new();
    for ix in 0..steps {
        for iy in 0..steps {
            for iz in 0..steps {
                let r = |i: usize| 2.0 * (i as f64 + 0.5) / steps as f64 - 1.0;
                let (x, y, z) = (r(ix), r(iy), r(iz));
                if x * x + y * y + z * z >= 0.9999 {
                    continue;
                }
                let v = objective(x, y, z);
                candidates.push((v, (x, y, z)));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    candidates.truncate(6);
    let mut best = candidates[0].0;
    // nested refinement around each surviving candidate
    for &(_, start) in &candidates {
        let mut center = start;
        let mut span = 2.0 / steps as f64;
        for _ in 0..4 {
            let fine = 9usize;
            let mut local_best = f64::INFINITY;
            let mut local_pt = center;
            for ix in 0..fine {
                for iy in 0..fine {
                    for iz in 0..fine {
                        let r = |i: usize, c: f64| {
                            c + span * (i as f64 / (fine - 1) as f64 - 0.5)
                        };
                        let (x, y, z) = (r(ix, center.0), r(iy, center.1), r(iz, center.2));
                        if x * x + y * y + z * z >= 0.9999 {
                            continue;
                        }
                        let v = objective(x, y, z);
                        if v < local_best {
                            local_best = v;
                            local_pt = (x, y, z);
                        }
                    }
                }
            }
            center = local_pt;
            span /= 3.0;
            best = best.min(local_best);
        }
    }
    -best.max(1e-300).log2()
}

fn criterion_entropy_oracles(seed: u64) -> Result<Outcome> {
    let mut parent = Sampler::new(seed ^ 0x04);
    let space = LabeledSpace::new([("A", 2), ("B", 2)])?;
    // optimizer vs oracle on 30 random states
    let seeds: Vec<(u64, usize)> = (0..30).map(|i| (parent.fork_seed(), 1 + i % 4)).collect();
    let devs: Vec<(f64, f64)> = seeds
        .into_par_iter()
        .map(|(s, rank)| {
            let mut local = Sampler::new(s);
            let rho = random::random_density::<f64>(&space, rank, &mut local).unwrap();
            let hmin_opt = entropy::h_min(&rho, &["B"]).unwrap().value;
            let hmin_oracle = bloch_grid_oracle(&rho, "B", false);
            let h2_opt = entropy::h_2(&rho, &["B"]).unwrap().value;
            let h2_oracle = bloch_grid_oracle(&rho, "B", true);
            ((hmin_opt - hmin_oracle).abs(), (h2_opt - h2_oracle).abs())
        })
        .collect();
    let worst_hmin = devs.iter().map(|d| d.0).fold(0.0, f64::max);
    let worst_h2 = devs.iter().map(|d| d.1).fold(0.0, f64::max);

    // ordering chain on 10³ random states
    let seeds: Vec<(u64, usize)> = (0..1000).map(|i| (parent.fork_seed(), 1 + i % 4)).collect();
    let worst_violation = seeds
        .into_par_iter()
        .map(|(s, rank)| {
            let mut local = Sampler::new(s);
            let rho = random::random_density::<f64>(&space, rank, &mut local).unwrap();
            let hmin = entropy::h_min(&rho, &["B"]).unwrap().value;
            let h2 = entropy::h_2(&rho, &["B"]).unwrap().value;
            let h = entropy::conditional_entropy(&rho, &["A"], &["B"]).unwrap().value;
            let hmax = entropy::h_max(&rho, &["B"]).unwrap().value;
            (hmin - h2).max(hmin - h).max(h - hmax)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    let pass = worst_hmin <= 1e-3 && worst_h2 <= 1e-3 && worst_violation <= 1e-6;
    Ok((
        pass,
        format!(
            "oracle gaps: H_min {worst_hmin:.2e}, H₂ {worst_h2:.2e} (≤1e-3); worst chain violation {worst_violation:.2e} (≤1e-6)"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 5. Uhlmann overlap and the 2√ε corollary
// ---------------------------------------------------------------------------

fn criterion_uhlmann(seed: u64) -> Result<Outcome> {
    let mut parent = Sampler::new(seed ^ 0x05);
    let seeds: Vec<u64> = (0..100).map(|_| parent.fork_seed()).collect();
    let outcomes: Vec<(f64, bool)> = seeds
        .into_par_iter()
        .map(|s| {
            let mut local = Sampler::new(s);
            let da = 2 + (s % 2) as usize; // |A| ∈ {2, 3}
            let sab = LabeledSpace::new([("A", da), ("B", 3)]).unwrap();
            let sac = LabeledSpace::new([("A", da), ("C", 4)]).unwrap();
            let psi = random::random_pure::<f64>(&sab, &mut local).unwrap();
            let phi = random::random_pure::<f64>(&sac, &mut local).unwrap();
            let v = uhlmann_isometry(&psi, &phi, &["A"]).unwrap();
            let (amp, out_space) = v.apply_vector(&psi).unwrap();
            let f = fidelity(
                &psi.marginal(&["A"]).unwrap(),
                &phi.marginal(&["A"]).unwrap(),
            )
            .unwrap();
            let phi_p = phi.permuted(&out_space.labels()).unwrap();
            let overlap = phi_p.amplitudes().dotc(&amp).norm();
            // corollary distance check
            let eps = trace_distance(
                &psi.marginal(&["A"]).unwrap(),
                &phi.marginal(&["A"]).unwrap(),
            )
            .unwrap();
            let d = amp.len();
            let moved = DensityOperator::from_parts_unchecked(
                out_space,
                Mat::from_fn(d, d, |i, j| amp[i] * amp[j].conj()),
            );
            let moved = moved.permuted(&phi.space().labels()).unwrap();
            let dist =
                linalg::trace_norm_hermitian(&(moved.matrix() - phi.to_density().matrix()));
            ((overlap - f).abs(), dist <= 2.0 * eps.sqrt() + 1e-9)
        })
        .collect();
    let worst = outcomes.iter().map(|o| o.0).fold(0.0, f64::max);
    let all_bounded = outcomes.iter().all(|o| o.1);
    Ok((
        worst <= 1e-8 && all_bounded,
        format!(
            "worst |overlap − ‖√ρ√σ‖₁| = {worst:.2e} (≤1e-8); 2√ε corollary held in all 100 pairs: {all_bounded}"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 6. One-shot coding: exact δ instance and bound soundness over seeds
// ---------------------------------------------------------------------------

fn near_unitary_channel(dim: usize, env: usize, sampler: &mut Sampler) -> Result<Channel> {
    let u = random::haar_unitary::<f64>(dim * env, sampler);
    let kraus: Vec<Mat> = (0..env)
        .map(|e| Mat::from_fn(dim, dim, |r, c| u[(r * env + e, c)]))
        .collect();
    Channel::new(
        LabeledSpace::single("A'", dim),
        LabeledSpace::single("C", dim),
        kraus,
    )
}

fn criterion_coding(seed: u64) -> Result<Outcome> {
    // exact-δ instance: message |A| = 4 maximally entangled with Bob's share,
    // identity channel at d = 16, σ = Φ
    let psi = maximally_entangled::<f64>("A", "B", 4)?;
    let channel = Channel::relabel(
        LabeledSpace::single("A'", 16),
        LabeledSpace::single("C", 16),
    )?;
    let sigma = maximally_entangled::<f64>("A''", "A'", 16)?;
    let mut s0 = Sampler::new(seed ^ 0x06);
    let art = coding::oneshot_code(&psi, &["A"], &["B"], &channel, &sigma, 0.0, &mut s0)?;
    let exact = (art.delta1 - 1.5).abs() < 1e-9 && (art.delta2 - 0.375).abs() < 1e-9;

    // 20 seeded instances; assert soundness wherever a bound is non-vacuous
    let mut parent = Sampler::new(seed ^ 0x60);
    let seeds: Vec<u64> = (0..20).map(|_| parent.fork_seed()).collect();
    let runs: Vec<(f64, f64, f64, f64, f64)> = seeds
        .into_par_iter()
        .map(|s| {
            let mut local = Sampler::new(s);
            let channel = near_unitary_channel(64, 2, &mut local).unwrap();
            let psi = maximally_entangled::<f64>("A", "B", 2).unwrap();
            let sigma = maximally_entangled::<f64>("A''", "A'", 64).unwrap();
            let art =
                coding::oneshot_code(&psi, &["A"], &["B"], &channel, &sigma, 0.0, &mut local)
                    .unwrap();
            (
                art.achieved,
                art.theorem_bound,
                art.decoupling_achieved,
                2.0 * art.delta1.sqrt() + art.delta2,
                art.delta1,
            )
        })
        .collect();
    let mut endtoend_checked = 0usize;
    let mut decoupling_checked = 0usize;
    let mut sound = true;
    let mut worst_achieved = 0.0f64;
    for (achieved, bound, dec_achieved, dec_bound, _d1) in &runs {
        worst_achieved = worst_achieved.max(*achieved);
        if *bound < 2.0 {
            endtoend_checked += 1;
            sound &= achieved <= bound;
        }
        if *dec_bound < 2.0 {
            decoupling_checked += 1;
            sound &= dec_achieved <= dec_bound;
        }
    }
    Ok((
        exact && sound,
        format!(
            "identity instance δ₁ = {:.3}, δ₂ = {:.4} (expect 1.5, 0.375); \
             {decoupling_checked}/20 non-vacuous decoupling bounds respected, \
             {endtoend_checked} end-to-end bounds < 2 respected; worst achieved {worst_achieved:.3}",
            art.delta1, art.delta2
        ),
    ))
}

// ---------------------------------------------------------------------------
// 7. Degenerate reductions to the plain one-shot code
// ---------------------------------------------------------------------------

fn criterion_reductions(seed: u64) -> Result<Outcome> {
    // unitary 4-dim channel so every Markov condition triggers immediately
    // and the sampled-unitary streams can be compared one-to-one
    let mut worst_side = 0.0f64;
    let mut worst_bcast = 0.0f64;
    for k in 0..3u64 {
        let mut setup = Sampler::new(seed ^ (0x07 + k));
        let u = random::haar_unitary::<f64>(4, &mut setup);
        let plain = Channel::new(
            LabeledSpace::single("A'", 4),
            LabeledSpace::single("C", 4),
            vec![u.clone()],
        )?;
        let psi = maximally_entangled::<f64>("A", "B", 2)?;
        let sigma = maximally_entangled::<f64>("A''", "A'", 4)?;

        let mut s_plain = Sampler::new(900 + k);
        let plain_art =
            coding::oneshot_code(&psi, &["A"], &["B"], &plain, &sigma, 0.0, &mut s_plain)?;

        // side information with |S| = 1
        let s_space = LabeledSpace::single("S", 1);
        let in_space = LabeledSpace::single("A'", 4).tensor(&s_space)?;
        let side = Channel::new(in_space, LabeledSpace::single("C", 4), vec![u.clone()])?;
        let phi = PureState::<f64>::basis_state(LabeledSpace::new([("S", 1), ("S'", 1)])?, 0)?;
        let sigma_side = {
            let trivial = PureState::<f64>::basis_state(LabeledSpace::single("S", 1), 0)?;
            sigma.tensor(&trivial)?
        };
        let mut s_side = Sampler::new(900 + k);
        let side_art = coding::sideinfo_oneshot_code(
            &psi,
            &["A"],
            &["B"],
            &side,
            "S",
            &phi,
            &sigma_side,
            &[],
            0.0,
            &mut s_side,
        )?;
        worst_side = worst_side
            .max((plain_art.achieved - side_art.achieved).abs())
            .max((plain_art.delta1 - side_art.delta1).abs())
            .max((plain_art.delta2 - side_art.delta2).abs());

        // broadcast with a trivial second receiver
        let out_space = LabeledSpace::single("C", 4).tensor(&LabeledSpace::single("C2", 1))?;
        let bcast = Channel::new(LabeledSpace::single("A'", 4), out_space, vec![u.clone()])?;
        let psi2 = PureState::<f64>::basis_state(LabeledSpace::single("A2", 1), 0)?;
        let sigma_b = {
            let trivial = PureState::<f64>::basis_state(LabeledSpace::single("A2''", 1), 0)?;
            sigma.tensor(&trivial)?
        };
        let rx1 = coding::BroadcastReceiver {
            psi: &psi,
            a_labels: vec!["A"],
            b_labels: vec!["B"],
            app_labels: vec!["A''"],
            c_labels: vec!["C"],
        };
        let rx2 = coding::BroadcastReceiver {
            psi: &psi2,
            a_labels: vec!["A2"],
            b_labels: vec![],
            app_labels: vec!["A2''"],
            c_labels: vec!["C2"],
        };
        let mut s_bcast = Sampler::new(900 + k);
        let bcast_art =
            coding::broadcast_oneshot_code(&rx1, &rx2, &bcast, &sigma_b, &[], 0.0, &mut s_bcast)?;
        worst_bcast = worst_bcast.max((plain_art.achieved - bcast_art.achieved).abs());
    }
    Ok((
        worst_side <= 1e-8 && worst_bcast <= 1e-8,
        format!(
            "side-info |S|=1 worst mismatch {worst_side:.2e}; broadcast trivial-receiver worst mismatch {worst_bcast:.2e} (≤1e-8)"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 8. Rate formulas: dephasing optimum, Pauli side-info, Marton identity
// ---------------------------------------------------------------------------

/// The qubit Pauli channel whose side information reveals which Pauli acts.
pub fn pauli_sideinfo_channel() -> Result<(Channel, PureState<f64>)> {
    let in_space = LabeledSpace::new([("A'", 2), ("S", 4)])?;
    let out_space = LabeledSpace::single("C", 2);
    let paulis = [
        Mat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
        Mat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        Mat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), -C64::i(), C64::i(), C64::new(0.0, 0.0)]),
        Mat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]),
    ];
    let mut kraus = Vec::with_capacity(4);
    for (i, p) in paulis.iter().enumerate() {
        // N_i = P_i ⊗ ⟨i|_S on the ordered [A', S] input
        let mut k = Mat::zeros(2, 8);
        for r in 0..2 {
            for c in 0..2 {
                k[(r, c * 4 + i)] = p[(r, c)];
            }
        }
        kraus.push(k);
    }
    let channel = Channel::new(in_space, out_space, kraus)?;
    let phi = maximally_entangled::<f64>("S", "S'", 4)?;
    Ok((channel, phi))
}

/// Dense random-sampling oracle over pure side-information inputs
/// `σ = (W ⊗ V)·Φ`: Haar samples plus local polish of the best few.
fn pure_sigma_oracle(
    channel: &Channel,
    phi: &PureState<f64>,
    n_samples: usize,
    sampler: &mut Sampler,
) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let v = coding::sideinfo_capacity_search(channel, "S", phi, 2, 1, 1, 0, sampler)?;
        best = best.max(v);
    }
    // polish: short ascents from fresh starts
    for _ in 0..24 {
        let v = coding::sideinfo_capacity_search(channel, "S", phi, 2, 1, 1, 400, sampler)?;
        best = best.max(v);
    }
    Ok(best)
}

fn criterion_rates(seed: u64) -> Result<Outcome> {
    let mut parent = Sampler::new(seed ^ 0x08);

    // dephasing channel: searched ½·I(A;C) optimum vs grid oracle, both ≈ ½
    let dephasing = Channel::dephasing(LabeledSpace::single("A'", 2), 1.0)?;
    let searched = coding::ea_capacity_search(&dephasing, 8, 800, &mut parent)?;
    // grid oracle over Schmidt angle and output basis, with nested refinement
    let space = LabeledSpace::single("A", 2).tensor(dephasing.in_space())?;
    let eval_point = |theta: f64, alpha: f64, beta: f64| -> Result<f64> {
        // |σ⟩ = cosθ|0⟩|v₀⟩ + sinθ|1⟩|v₁⟩ with v's an arbitrary basis
        let v0 = [
            C64::new(alpha.cos(), 0.0),
            C64::new(alpha.sin() * beta.cos(), alpha.sin() * beta.sin()),
        ];
        let v1 = [-v0[1].conj(), v0[0]];
        let mut amp = CVec::<f64>::zeros(4);
        for k in 0..2 {
            amp[k] = C64::new(theta.cos(), 0.0) * v0[k];
            amp[2 + k] = C64::new(theta.sin(), 0.0) * v1[k];
        }
        let sigma = PureState::new(space.clone(), amp)?;
        Ok(coding::ea_rate_point(&dephasing, &sigma)?.half_mutual)
    };
    let mut oracle = f64::NEG_INFINITY;
    let mut oracle_pt = (0.0, 0.0, 0.0);
    let steps = 24usize;
    for it in 0..steps {
        for ia in 0..steps {
            for ib in 0..steps {
                let theta = std::f64::consts::FRAC_PI_2 * (it as f64) / (steps - 1) as f64;
                let alpha = std::f64::consts::PI * (ia as f64) / (steps - 1) as f64;
                let beta = 2.0 * std::f64::consts::PI * (ib as f64) / (steps - 1) as f64;
                let v = eval_point(theta, alpha, beta)?;
                if v > oracle {
                    oracle = v;
                    oracle_pt = (theta, alpha, beta);
                }
            }
        }
    }
    let mut span = std::f64::consts::FRAC_PI_2 / (steps - 1) as f64;
    for _ in 0..4 {
        let fine = 9usize;
        let center = oracle_pt;
        for it in 0..fine {
            for ia in 0..fine {
                for ib in 0..fine {
                    let off = |i: usize| span * (i as f64 / (fine - 1) as f64 - 0.5);
                    let v = eval_point(
                        center.0 + off(it),
                        center.1 + off(ia),
                        center.2 + 2.0 * off(ib),
                    )?;
                    if v > oracle {
                        oracle = v;
                        oracle_pt = (center.0 + off(it), center.1 + off(ia), center.2 + 2.0 * off(ib));
                    }
                }
            }
        }
        span /= 3.0;
    }
    let dephasing_ok = (searched - 0.5).abs() <= 1e-3 && (oracle - 0.5).abs() <= 1e-3;

    // Pauli channel with revealed error: mixed inputs reach the capacity 1,
    // pure inputs stay strictly below
    let (pauli, phi) = pauli_sideinfo_channel()?;
    let mixed = coding::sideinfo_capacity_search(&pauli, "S", &phi, 2, 4, 24, 1500, &mut parent)?;
    let pure_oracle = pure_sigma_oracle(&pauli, &phi, 4000, &mut parent)?;
    let mut pure_searches = Vec::new();
    for _ in 0..6 {
        pure_searches.push(coding::sideinfo_capacity_search(
            &pauli,
            "S",
            &phi,
            2,
            1,
            4,
            800,
            &mut parent,
        )?);
    }
    let pure_max = pure_searches.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // the capacity is 1 and mixed inputs must essentially reach it; every
    // pure-input value (dense oracle and searches alike) must stay below
    // 0.99 of it, reproducing the pure-state impossibility qualitatively
    let pauli_ok = mixed >= 0.99 && pure_oracle <= 0.99 && pure_max <= 0.99;

    // Marton sum-rate identity on every evaluated σ
    let in_space = LabeledSpace::new([("X1", 2), ("X2", 2)])?;
    let out_space = LabeledSpace::new([("C1", 2), ("C2", 2)])?;
    let splitter = Channel::relabel(in_space.clone(), out_space)?;
    let mut worst_identity = 0.0f64;
    for _ in 0..20 {
        let space = LabeledSpace::new([("A1", 2), ("A2", 2)])?.tensor(&in_space)?;
        let sigma = random::random_density::<f64>(&space, 2, &mut parent)?;
        let region =
            coding::marton_region(&splitter, &sigma, &["A1"], &["A2"], &["C1"], &["C2"])?;
        let lhs = 0.5 * (region.h_a1a2 + region.coherent1 + region.coherent2);
        worst_identity = worst_identity.max((lhs - region.sum_max).abs());
    }
    let marton_ok = worst_identity <= 1e-9;

    Ok((
        dephasing_ok && pauli_ok && marton_ok,
        format!(
            "dephasing: search {searched:.4}, oracle {oracle:.4} (≈0.5); \
             side-info: mixed {mixed:.3} (≥0.99), pure oracle {pure_oracle:.3}, pure searches ≤ {pure_max:.3}; \
             Marton identity worst {worst_identity:.1e}"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 9. Locking properties
// ---------------------------------------------------------------------------

fn criterion_locking(seed: u64) -> Result<Outcome> {
    let n_messages = 16;
    let configs = [(16usize, 1usize), (8, 2), (4, 4)];
    let mut medians = Vec::new();
    let mut helstrom_ok = true;
    let mut af_ok = true;
    for &(dim_c, dim_k) in &configs {
        let seeds: Vec<u64> = (0..10).map(|i| seed ^ (0x09 + i)).collect();
        let runs: Vec<(f64, bool, bool)> = seeds
            .into_par_iter()
            .map(|s| {
                let mut local = Sampler::new(s);
                let scheme = locking::build_scheme(n_messages, dim_c, dim_k, &mut local).unwrap();
                let hel = (scheme.pairwise_min_helstrom().unwrap() - 1.0).abs() <= 1e-8;
                let (out, _) = locking::leakage(&scheme, 48, 1200, &mut local).unwrap();
                let af = locking::accessible_info_bound(out.value, n_messages);
                (out.value, hel, af >= out.mutual_information - 1e-9)
            })
            .collect();
        let mut vals: Vec<f64> = runs.iter().map(|r| r.0).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(0.5 * (vals[4] + vals[5]));
        helstrom_ok &= runs.iter().all(|r| r.1);
        af_ok &= runs.iter().all(|r| r.2);
    }
    let monotone = medians[0] > medians[1] && medians[1] > medians[2];
    Ok((
        monotone && helstrom_ok && af_ok,
        format!(
            "median leakage by |K| ∈ {{1,2,4}}: {:.3} > {:.3} > {:.3}; Helstrom-with-key = 1: {helstrom_ok}; AF ≥ measured MI: {af_ok}",
            medians[0], medians[1], medians[2]
        ),
    ))
}

// ---------------------------------------------------------------------------
// 10. Appendix property suite
// ---------------------------------------------------------------------------

fn random_psd(dim: usize, sampler: &mut Sampler) -> Mat {
    let g = random::random_matrix::<f64>(dim, dim, sampler);
    g.adjoint() * g
}

fn criterion_appendix(seed: u64) -> Result<Outcome> {
    let trials = 1000usize;
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, violations: usize, worst: f64| {
        if violations > 0 {
            failures.push(format!("{name}: {violations} violations (worst {worst:.2e})"));
        }
    };

    // swap trick: tr[MN] = tr[(M⊗N)F]
    {
        let mut s = Sampler::new(seed ^ 0xA01);
        let f = random::swap_operator::<f64>(3);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let m = random::random_matrix::<f64>(3, 3, &mut s);
            let n = random::random_matrix::<f64>(3, 3, &mut s);
            let lhs = linalg::trace(&(&m * &n));
            let rhs = linalg::trace(&(linalg::kron(&m, &n) * &f));
            let d = (lhs - rhs).norm();
            worst = worst.max(d);
            if d > 1e-10 {
                viol += 1;
            }
        }
        check("swap-trick", viol, worst);
    }

    // purity-ratio bound: 1/|A| ≤ tr[ξ²]/tr[ξ_B²] ≤ |A|
    {
        let mut s = Sampler::new(seed ^ 0xA02);
        let space = LabeledSpace::new([("A", 2), ("B", 3)])?;
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let xi = DensityOperator::from_parts_unchecked(space.clone(), random_psd(6, &mut s));
            let full = linalg::trace(&(xi.matrix() * xi.matrix())).re;
            let xb = xi.partial_trace(&["A"]).unwrap();
            let part = linalg::trace(&(xb.matrix() * xb.matrix())).re;
            let ratio = full / part;
            let slack = (0.5 - ratio).max(ratio - 2.0);
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("tr2-bounded", viol, worst);
    }

    // ‖M‖₁ ≤ √(tr σ · tr[σ^{-1/4}Mσ^{-1/2}Mσ^{-1/4}]) for Hermitian M, σ ≻ 0
    {
        let mut s = Sampler::new(seed ^ 0xA03);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let m = linalg::hermitize(&random::random_matrix::<f64>(3, 3, &mut s));
            let sigma = random_psd(3, &mut s) + linalg::identity::<f64>(3) * C64::new(0.05, 0.0);
            let q = linalg::hermitian_fn(&sigma, |l| l.powf(-0.25));
            let inner = &q * &m * &q;
            let bound = (linalg::trace(&sigma).re
                * linalg::trace(&(&inner * &inner)).re)
                .sqrt();
            let slack = linalg::trace_norm_hermitian(&m) - bound;
            worst = worst.max(slack);
            if slack > 1e-8 {
                viol += 1;
            }
        }
        check("pseudo-jensen", viol, worst);
    }

    // ‖ψ − φ‖₁ ≤ 2‖|ψ⟩ − |φ⟩‖₂
    {
        let mut s = Sampler::new(seed ^ 0xA04);
        let space = LabeledSpace::single("A", 4);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
            let phi = random::random_pure::<f64>(&space, &mut s).unwrap();
            let lhs = trace_distance(&psi.to_density(), &phi.to_density()).unwrap();
            let rhs = 2.0 * (psi.amplitudes() - phi.amplitudes()).norm();
            let slack = lhs - rhs;
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("onenorm-twonorm", viol, worst);
    }

    // ‖NM‖₂ ≤ ‖N‖₂ ‖M‖∞
    {
        let mut s = Sampler::new(seed ^ 0xA05);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let m = random::random_matrix::<f64>(4, 3, &mut s); // A→B
            let n = random::random_matrix::<f64>(2, 4, &mut s); // B→C
            let slack = (&n * &m).norm() - n.norm() * linalg::op_norm_inf(&m);
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("norm-prod-matrices", viol, worst);
    }

    // ‖M‖₁ ≥ |tr[VM]| for random partial isometries; polar attains equality
    {
        let mut s = Sampler::new(seed ^ 0xA06);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for t in 0..trials {
            let m = random::random_matrix::<f64>(3, 4, &mut s);
            let tn = linalg::trace_norm(&m);
            // random partial isometry 4×3 from a Haar unitary block
            let u = random::haar_unitary::<f64>(4, &mut s);
            let v = u.columns(0, 3).into_owned();
            let attained = linalg::trace(&(&v * &m)).norm();
            let slack = attained - tn;
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
            if t % 10 == 0 {
                let polar = linalg::polar_maximizer(&m);
                let eq = (linalg::trace(&(&polar * &m)).re - tn).abs();
                worst = worst.max(eq);
                if eq > 1e-9 {
                    viol += 1;
                }
            }
        }
        check("tracenorm-maxu", viol, worst);
    }

    // tr_B[PρP] ≤ ρ^A for 0 ≤ P^B ≤ I
    {
        let mut s = Sampler::new(seed ^ 0xA07);
        let space = LabeledSpace::new([("A", 2), ("B", 3)])?;
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let rho = DensityOperator::from_parts_unchecked(space.clone(), random_psd(6, &mut s));
            let p = {
                let raw = random_psd(3, &mut s);
                let lmax = linalg::largest_eigval(&raw);
                raw / C64::new(lmax.max(1e-12), 0.0)
            };
            let p_full = linalg::kron(&linalg::identity::<f64>(2), &p);
            let inner = DensityOperator::from_parts_unchecked(
                space.clone(),
                &p_full * rho.matrix() * &p_full,
            );
            let diff = rho.partial_trace(&["B"]).unwrap().matrix()
                - inner.partial_trace(&["B"]).unwrap().matrix();
            let slack = -linalg::eigvals(&diff)[0];
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("fiou", viol, worst);
    }

    // multidecoupling: ‖ρ − σ⊗τ^B⊗η‖₁ ≤ 2ε₁ + ε₂
    {
        let mut s = Sampler::new(seed ^ 0xA08);
        let sa = LabeledSpace::single("A", 2);
        let sb = LabeledSpace::single("B", 2);
        let sc = LabeledSpace::single("C", 2);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let joint = sa.tensor(&sb)?.tensor(&sc)?;
            let rho = random::random_density::<f64>(&joint, 2, &mut s).unwrap();
            let sigma = random::random_density::<f64>(&sa, 2, &mut s).unwrap();
            let omega = random::random_density::<f64>(&sb.tensor(&sc)?, 2, &mut s).unwrap();
            let tau = random::random_density::<f64>(&sa.tensor(&sb)?, 2, &mut s).unwrap();
            let eta = random::random_density::<f64>(&sc, 2, &mut s).unwrap();
            let eps1 = trace_distance(&rho, &sigma.tensor(&omega)?)?;
            let eps2 = trace_distance(&rho, &tau.tensor(&eta)?)?;
            let tau_b = tau.partial_trace(&["A"])?;
            let product = sigma.tensor(&tau_b)?.tensor(&eta)?;
            let lhs = trace_distance(&rho, &product)?;
            let slack = lhs - (2.0 * eps1 + eps2);
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("multidecoupling", viol, worst);
    }

    // Fuchs-van de Graaf
    {
        let mut s = Sampler::new(seed ^ 0xA09);
        let space = LabeledSpace::single("A", 3);
        let mut viol = 0;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let rho = random::random_density::<f64>(&space, 2, &mut s).unwrap();
            let sig = random::random_density::<f64>(&space, 3, &mut s).unwrap();
            let f = fidelity(&rho, &sig).unwrap();
            let td = trace_distance(&rho, &sig).unwrap();
            let lower = (1.0 - td / 2.0) - f;
            let upper = f * f - (1.0 - td * td / 4.0);
            let slack = lower.max(upper);
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("fuchs-van-de-graaf", viol, worst);
    }

    // Fannes on close pairs: |H(ρ) − H(σ)| ≤ T·log|A| + η(T) for T ≤ 1/e
    {
        let mut s = Sampler::new(seed ^ 0xA0A);
        let space = LabeledSpace::single("A", 4);
        let mut viol = 0;
        let mut worst = 0.0f64;
        let mut tested = 0usize;
        while tested < trials {
            let rho = random::random_density::<f64>(&space, 4, &mut s).unwrap();
            // small Hermitian perturbation, renormalized
            let pert = linalg::hermitize(&random::random_matrix::<f64>(4, 4, &mut s))
                * C64::new(0.02, 0.0);
            let m = rho.matrix() + pert;
            let m = linalg::hermitian_fn(&m, |l| l.max(0.0));
            let tr = linalg::trace(&m).re;
            let sig = DensityOperator::from_parts_unchecked(space.clone(), m / C64::new(tr, 0.0));
            let t = trace_distance(&rho, &sig).unwrap();
            if !(1e-12..=1.0 / std::f64::consts::E).contains(&t) {
                continue;
            }
            tested += 1;
            let dh = (entropy::von_neumann_of(&rho) - entropy::von_neumann_of(&sig)).abs();
            let bound = t * 2.0 + (-t * t.log2());
            let slack = dh - bound;
            worst = worst.max(slack);
            if slack > 1e-9 {
                viol += 1;
            }
        }
        check("fannes", viol, worst);
    }

    let passed = failures.is_empty();
    let details = if passed {
        format!("10 lemmas × {trials} randomized trials, zero violations")
    } else {
        failures.join("; ")
    };
    Ok((passed, details))
}
