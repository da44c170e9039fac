//! Information locking: random-unitary schemes, adversarial measurement
//! search, and the key-size / accessible-information formulas.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::random::{self, Sampler};
use crate::tensor::{helstrom, DensityOperator, LabeledSpace, PureState};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;

/// Locking scheme: `N` orthonormal messages embedded by a global unitary into
/// cyphertext ⊗ key, with the key share traced away for the adversary.
pub struct LockingScheme {
    pub n_messages: usize,
    pub dim_c: usize,
    pub dim_k: usize,
    pub unitary: CMat<f64>,
    /// Encoded pure states on `[C, K]`.
    pub encoded: Vec<PureState<f64>>,
    /// Adversary's view: marginals on `C`.
    pub cyphertexts: Vec<DensityOperator<f64>>,
}

impl LockingScheme {
    /// Smallest pairwise trace distance between encoded joint states
    /// (2 for a valid scheme: orthogonal encodings are perfectly
    /// distinguishable with the key).
    pub fn pairwise_min_distance(&self) -> Result<f64> {
        let mut min = 2.0f64;
        for i in 0..self.n_messages {
            for j in (i + 1)..self.n_messages {
                let d = crate::tensor::trace_distance(
                    &self.encoded[i].to_density(),
                    &self.encoded[j].to_density(),
                )?;
                min = min.min(d);
            }
        }
        Ok(min)
    }

    /// Smallest pairwise Helstrom guess probability with the key available.
    pub fn pairwise_min_helstrom(&self) -> Result<f64> {
        let mut min = 1.0f64;
        for i in 0..self.n_messages {
            for j in (i + 1)..self.n_messages {
                let h = helstrom(
                    &self.encoded[i].to_density(),
                    &self.encoded[j].to_density(),
                )?;
                min = min.min(h.p_guess);
            }
        }
        Ok(min)
    }
}

/// Embeds `n` computational-basis messages through a Haar-random unitary on
/// cyphertext ⊗ key.
pub fn build_scheme(
    n_messages: usize,
    dim_c: usize,
    dim_k: usize,
    sampler: &mut Sampler,
) -> Result<LockingScheme> {
    let total = dim_c * dim_k;
    if n_messages > total {
        return Err(Error::DimensionMismatch(format!(
            "{n_messages} messages exceed the total dimension {total}"
        )));
    }
    let space = LabeledSpace::new([("C", dim_c), ("K", dim_k)])?;
    let u = random::haar_unitary::<f64>(total, sampler);
    let mut encoded = Vec::with_capacity(n_messages);
    let mut cyphertexts = Vec::with_capacity(n_messages);
    for m in 0..n_messages {
        let amp = crate::linalg::CVec::<f64>::from_column_slice(u.column(m).as_slice());
        let state = PureState::new(space.clone(), amp)?;
        cyphertexts.push(state.partial_trace(&["K"])?);
        encoded.push(state);
    }
    Ok(LockingScheme {
        n_messages,
        dim_c,
        dim_k,
        unitary: u,
        encoded,
        cyphertexts,
    })
}

/// Locking criterion value of one complete orthonormal-basis measurement:
/// `‖M(ω^{MC}) − M(π^C) ⊗ ω^M‖₁ = Σ_{m,x} |⟨b_x|ρ_m|b_x⟩ − 1/|C|| / N`
/// (measuring π in any orthonormal basis is uniform).
pub fn leakage_of_basis(cyphertexts: &[DensityOperator<f64>], basis: &CMat<f64>) -> f64 {
    let n = cyphertexts.len() as f64;
    let dim_c = basis.nrows();
    let uniform = 1.0 / dim_c as f64;
    let mut total = 0.0;
    for rho in cyphertexts {
        for x in 0..dim_c {
            let col = basis.column(x);
            let mut p = C64::new(0.0, 0.0);
            for a in 0..dim_c {
                for b in 0..dim_c {
                    p += col[a].conj() * rho.matrix()[(a, b)] * col[b];
                }
            }
            total += (p.re - uniform).abs();
        }
    }
    total / n
}

/// Classical mutual information (bits) of the measurement's joint
/// message-outcome distribution.
pub fn measurement_mutual_information(
    cyphertexts: &[DensityOperator<f64>],
    basis: &CMat<f64>,
) -> f64 {
    let n = cyphertexts.len();
    let dim_c = basis.nrows();
    let mut joint = vec![vec![0.0f64; dim_c]; n];
    for (m, rho) in cyphertexts.iter().enumerate() {
        for x in 0..dim_c {
            let col = basis.column(x);
            let mut p = C64::new(0.0, 0.0);
            for a in 0..dim_c {
                for b in 0..dim_c {
                    p += col[a].conj() * rho.matrix()[(a, b)] * col[b];
                }
            }
            joint[m][x] = (p.re / n as f64).max(0.0);
        }
    }
    let p_m = 1.0 / n as f64;
    let mut p_x = vec![0.0f64; dim_c];
    for row in &joint {
        for (x, v) in row.iter().enumerate() {
            p_x[x] += v;
        }
    }
    let mut mi = 0.0;
    for row in joint.iter() {
        for (x, &p) in row.iter().enumerate() {
            if p > 1e-15 && p_x[x] > 1e-15 {
                mi += p * (p / (p_m * p_x[x])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Outcome of the adversarial measurement search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeakageOutcome {
    /// Best criterion value found — a lower bound on the true supremum.
    pub value: f64,
    /// Mutual information of the best measurement's joint distribution.
    pub mutual_information: f64,
    pub restarts: usize,
    pub iterations: usize,
}

/// Searches complete orthonormal measurements for the largest locking
/// criterion value. Bases are parametrized by a unitary; ascent proposes
/// random two-column Givens rotations and accepts improvements; restarts run
/// in parallel on forked sub-seeds with max aggregation, so more restarts
/// never decrease the reported value.
pub fn leakage(
    scheme: &LockingScheme,
    restarts: usize,
    iterations: usize,
    sampler: &mut Sampler,
) -> Result<(LeakageOutcome, CMat<f64>)> {
    let dim_c = scheme.dim_c;
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| sampler.fork_seed()).collect();
    let runs: Vec<(f64, CMat<f64>)> = seeds
        .into_par_iter()
        .map(|seed| {
            let mut local = Sampler::new(seed);
            ascend_basis(&scheme.cyphertexts, dim_c, iterations, &mut local)
        })
        .collect();
    let (mut best_val, mut best_basis) = (f64::NEG_INFINITY, linalg::identity::<f64>(dim_c));
    for (v, b) in runs {
        if v > best_val {
            best_val = v;
            best_basis = b;
        }
    }
    let mi = measurement_mutual_information(&scheme.cyphertexts, &best_basis);
    Ok((
        LeakageOutcome {
            value: best_val,
            mutual_information: mi,
            restarts: restarts.max(1),
            iterations,
        },
        best_basis,
    ))
}

/// Hill climb over orthonormal bases with incremental Givens updates.
fn ascend_basis(
    cyphertexts: &[DensityOperator<f64>],
    dim_c: usize,
    iterations: usize,
    sampler: &mut Sampler,
) -> (f64, CMat<f64>) {
    let n = cyphertexts.len() as f64;
    let uniform = 1.0 / dim_c as f64;
    let mut basis = random::haar_unitary::<f64>(dim_c, sampler);
    // Q_m = B†ρ_mB, kept in sync with the accepted basis
    let mut qs: Vec<CMat<f64>> = cyphertexts
        .iter()
        .map(|rho| basis.adjoint() * rho.matrix() * &basis)
        .collect();
    let objective = |qs: &[CMat<f64>]| -> f64 {
        let mut total = 0.0;
        for q in qs {
            for x in 0..dim_c {
                total += (q[(x, x)].re - uniform).abs();
            }
        }
        total / n
    };
    let mut value = objective(&qs);
    let mut step = 0.6f64;
    if dim_c == 1 {
        return (value, basis);
    }
    for _ in 0..iterations {
        let i = sampler.below(dim_c);
        let mut j = sampler.below(dim_c);
        if i == j {
            j = (j + 1) % dim_c;
        }
        let phase = 2.0 * std::f64::consts::PI * sampler.uniform();
        let c = step.cos();
        let s = C64::new(phase.cos(), phase.sin()) * C64::new(step.sin(), 0.0);
        // objective delta: only diagonal entries i and j change
        let mut cand_value = value;
        for q in &qs {
            let (qi, qj) = (q[(i, i)].re, q[(j, j)].re);
            let cross = (s * q[(i, j)]).re;
            let new_i = c * c * qi + s.norm_sqr() * qj + 2.0 * c * cross;
            let new_j = s.norm_sqr() * qi + c * c * qj - 2.0 * c * cross;
            cand_value += ((new_i - uniform).abs() + (new_j - uniform).abs()
                - (qi - uniform).abs()
                - (qj - uniform).abs())
                / n;
        }
        if cand_value > value + 1e-15 {
            value = cand_value;
            // apply the rotation to the basis columns and to every Q
            for row in 0..dim_c {
                let bi = basis[(row, i)];
                let bj = basis[(row, j)];
                basis[(row, i)] = C64::new(c, 0.0) * bi + s * bj;
                basis[(row, j)] = -s.conj() * bi + C64::new(c, 0.0) * bj;
            }
            for q in &mut qs {
                for row in 0..dim_c {
                    let qi = q[(row, i)];
                    let qj = q[(row, j)];
                    q[(row, i)] = C64::new(c, 0.0) * qi + s * qj;
                    q[(row, j)] = -s.conj() * qi + C64::new(c, 0.0) * qj;
                }
                for col in 0..dim_c {
                    let qi = q[(i, col)];
                    let qj = q[(j, col)];
                    q[(i, col)] = C64::new(c, 0.0) * qi + s.conj() * qj;
                    q[(j, col)] = -s * qi + C64::new(c, 0.0) * qj;
                }
            }
        } else {
            step = (step * 0.995).max(5e-3);
        }
    }
    (value, basis)
}

/// Key-size requirement of the headline locking statement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KeyRequirement {
    /// `(32/ε)·√(log(4N²/ε)·ln(1/ε))`.
    pub dim_k_lower: f64,
    /// `8√2/ε`.
    pub n_lower: f64,
    /// Whether `ε ≤ e⁻²` and `N` meets `n_lower`.
    pub hypothesis_satisfied: bool,
}

pub fn key_requirement(n_messages: usize, eps: f64) -> Result<KeyRequirement> {
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::HypothesisViolated(format!("ε = {eps} not in (0,1)")));
    }
    let n = n_messages as f64;
    let dim_k_lower = 32.0 / eps * ((4.0 * n * n / eps).log2() * (1.0 / eps).ln()).sqrt();
    let n_lower = 8.0 * 2.0f64.sqrt() / eps;
    let hypothesis_satisfied = eps <= (-2.0f64).exp() && n >= n_lower;
    Ok(KeyRequirement {
        dim_k_lower,
        n_lower,
        hypothesis_satisfied,
    })
}

fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Accessible-information bound `ε·log N + 2η(1−ε) + 2η(ε)` implied by an
/// ε-locking criterion value.
pub fn accessible_info_bound(eps_lock: f64, n_messages: usize) -> f64 {
    eps_lock * (n_messages as f64).log2() + 2.0 * eta(1.0 - eps_lock) + 2.0 * eta(eps_lock)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cyphertext_leaks_nothing() {
        let mut s = Sampler::new(100);
        let scheme = build_scheme(3, 1, 4, &mut s).unwrap();
        let (out, _) = leakage(&scheme, 4, 50, &mut s).unwrap();
        assert!(out.value < 1e-12, "leakage {}", out.value);
    }

    #[test]
    fn product_omega_gives_zero_for_every_basis() {
        // ρ_m^C = π for all m: criterion value is 0 for any basis
        let mut s = Sampler::new(101);
        let space = LabeledSpace::single("C", 4);
        let cyphertexts: Vec<DensityOperator<f64>> = (0..4)
            .map(|_| DensityOperator::maximally_mixed(space.clone()))
            .collect();
        for _ in 0..5 {
            let basis = random::haar_unitary::<f64>(4, &mut s);
            assert!(leakage_of_basis(&cyphertexts, &basis) < 1e-12);
        }
    }

    #[test]
    fn orthonormal_cyphertexts_leak_fully() {
        // trivial key: the adversary can measure in the encoded basis and
        // the criterion reaches 2(N−1)/N
        let mut s = Sampler::new(102);
        let n = 4;
        let scheme = build_scheme(n, 4, 1, &mut s).unwrap();
        let expect = 2.0 * (n as f64 - 1.0) / n as f64;
        // the encoding unitary's columns are the optimal basis
        let direct = leakage_of_basis(&scheme.cyphertexts, &scheme.unitary);
        assert!((direct - expect).abs() < 1e-9, "direct {direct}");
        let (out, _) = leakage(&scheme, 24, 600, &mut s).unwrap();
        assert!(out.value > 0.85 * expect, "searched {} vs {expect}", out.value);
        assert!(out.value <= expect + 1e-9);
    }

    #[test]
    fn scheme_invariants_and_helstrom() {
        let mut s = Sampler::new(103);
        let scheme = build_scheme(8, 4, 2, &mut s).unwrap();
        assert!((scheme.pairwise_min_distance().unwrap() - 2.0).abs() < 1e-8);
        assert!((scheme.pairwise_min_helstrom().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn key_brings_leakage_down() {
        // median over matched seeds: dim_k = 2 leaks less than dim_k = 1 at
        // the same total dimension
        let mut vals1 = Vec::new();
        let mut vals2 = Vec::new();
        for seed in 0..5u64 {
            let mut s1 = Sampler::new(1000 + seed);
            let scheme1 = build_scheme(8, 8, 1, &mut s1).unwrap();
            let (o1, _) = leakage(&scheme1, 12, 400, &mut s1).unwrap();
            vals1.push(o1.value);
            let mut s2 = Sampler::new(1000 + seed);
            let scheme2 = build_scheme(8, 4, 2, &mut s2).unwrap();
            let (o2, _) = leakage(&scheme2, 12, 400, &mut s2).unwrap();
            vals2.push(o2.value);
        }
        vals1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(
            vals2[2] < vals1[2],
            "medians: no key {} vs key {}",
            vals1[2],
            vals2[2]
        );
    }

    #[test]
    fn more_restarts_never_decrease_leakage() {
        let mut s = Sampler::new(104);
        let scheme = build_scheme(6, 4, 2, &mut s).unwrap();
        let mut s1 = Sampler::new(7);
        let (few, _) = leakage(&scheme, 4, 200, &mut s1).unwrap();
        let mut s2 = Sampler::new(7);
        let (many, _) = leakage(&scheme, 12, 200, &mut s2).unwrap();
        assert!(many.value >= few.value - 1e-12);
    }

    #[test]
    fn key_requirement_formulas() {
        let kr = key_requirement(1 << 16, 0.01).unwrap();
        let expect =
            3200.0 * ((4.0 * (65536.0f64 * 65536.0) / 0.01).log2() * (100.0f64).ln()).sqrt();
        assert!((kr.dim_k_lower - expect).abs() < 1e-6);
        assert!(kr.hypothesis_satisfied);
        let kr = key_requirement(4, 0.2).unwrap();
        assert!(!kr.hypothesis_satisfied); // ε > e⁻²
    }

    #[test]
    fn accessible_info_bound_vanishes_at_zero() {
        assert_eq!(accessible_info_bound(0.0, 16), 0.0);
        assert!(accessible_info_bound(0.1, 16) > 0.0);
    }

    #[test]
    fn alicki_fannes_bound_dominates_measured_mi() {
        for seed in 0..3u64 {
            let mut local = Sampler::new(200 + seed);
            let scheme = build_scheme(8, 4, 2, &mut local).unwrap();
            let (out, _) = leakage(&scheme, 12, 400, &mut local).unwrap();
            let bound = accessible_info_bound(out.value, scheme.n_messages);
            assert!(
                bound >= out.mutual_information - 1e-9,
                "AF bound {bound} vs measured MI {}",
                out.mutual_information
            );
        }
    }
}
