//! The duality between vectors and operators, plus the Uhlmann machinery
//! built on it.

use super::{LabeledSpace, LinearOp, PureState};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::scalar::Scalar;
use num_complex::Complex;

/// Maximally entangled state `(1/√d) Σ_i |ii⟩` on two fresh labels.
pub fn maximally_entangled<T: Scalar>(a: &str, b: &str, d: usize) -> Result<PureState<T>> {
    let space = LabeledSpace::new([(a, d), (b, d)])?;
    let mut amp = CVec::<T>::zeros(d * d);
    let w = Complex::new(T::one() / T::from_u(d).sqrt(), T::zero());
    for i in 0..d {
        amp[i * d + i] = w;
    }
    PureState::new(space, amp)
}

/// Turns a multipartite vector into an operator: `op(|a⟩|b⟩) = |b⟩⟨a|` on the
/// canonical bases, with `from` becoming the input (bra) side and the
/// remaining labels the output (ket) side. Label order inside each side
/// follows the state's own space.
pub fn op_of_vec<T: Scalar>(psi: &PureState<T>, from: &[&str]) -> Result<LinearOp<T>> {
    let in_space = psi.space().restrict(from)?;
    let out_space = psi.space().without(from)?;
    let mut order: Vec<&str> = in_space.labels();
    order.extend(out_space.labels());
    let perm = psi.permuted(&order)?;
    let din = in_space.dim();
    let dout = out_space.dim();
    let mut mat = CMat::<T>::zeros(dout, din);
    for a in 0..din {
        for b in 0..dout {
            mat[(b, a)] = perm.amplitudes()[a * dout + b];
        }
    }
    LinearOp::new(in_space, out_space, mat)
}

/// Inverse of [`op_of_vec`]: `vec(|b⟩⟨a|) = |a⟩|b⟩`. The resulting space is
/// the operator's input labels followed by its output labels.
pub fn vec_of_op<T: Scalar>(op: &LinearOp<T>) -> Result<PureState<T>> {
    let space = op.in_space().tensor(op.out_space())?;
    let din = op.in_space().dim();
    let dout = op.out_space().dim();
    let mut amp = CVec::<T>::zeros(din * dout);
    for a in 0..din {
        for b in 0..dout {
            amp[a * dout + b] = op.matrix()[(b, a)];
        }
    }
    PureState::new(space, amp)
}

/// Schmidt decomposition across the bipartition `(left, rest)`.
pub struct SchmidtDecomposition<T: Scalar> {
    /// Nonnegative, descending, squared-sum 1.
    pub coefficients: Vec<T>,
    /// `dim(left) × k` orthonormal columns.
    pub left_basis: CMat<T>,
    /// `dim(right) × k` orthonormal columns.
    pub right_basis: CMat<T>,
    pub left_space: LabeledSpace,
    pub right_space: LabeledSpace,
}

impl<T: Scalar> SchmidtDecomposition<T> {
    /// `Σ_k c_k |l_k⟩|r_k⟩` as a state on `[left..., right...]`.
    pub fn reconstruct(&self) -> Result<PureState<T>> {
        let space = self.left_space.tensor(&self.right_space)?;
        let dl = self.left_space.dim();
        let dr = self.right_space.dim();
        let mut amp = CVec::<T>::zeros(dl * dr);
        for (k, &c) in self.coefficients.iter().enumerate() {
            let w = Complex::new(c, T::zero());
            for i in 0..dl {
                for j in 0..dr {
                    amp[i * dr + j] += w * self.left_basis[(i, k)] * self.right_basis[(j, k)];
                }
            }
        }
        PureState::new(space, amp)
    }
}

pub fn schmidt<T: Scalar>(psi: &PureState<T>, left: &[&str]) -> Result<SchmidtDecomposition<T>> {
    let left_space = psi.space().restrict(left)?;
    let right_space = psi.space().without(left)?;
    let mut order = left_space.labels();
    order.extend(right_space.labels());
    let perm = psi.permuted(&order)?;
    let dl = left_space.dim();
    let dr = right_space.dim();
    let m = CMat::<T>::from_fn(dl, dr, |i, j| perm.amplitudes()[i * dr + j]);
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let k = svd.singular_values.len();
    let coefficients: Vec<T> = svd.singular_values.iter().copied().collect();
    // ψ = Σ σ_k u_k ⊗ (v_t row k)ᵀ ; right basis columns are the rows of v_t.
    let right_basis = CMat::<T>::from_fn(dr, k, |j, kk| vt[(kk, j)]);
    Ok(SchmidtDecomposition {
        coefficients,
        left_basis: u,
        right_basis,
        left_space,
        right_space,
    })
}

/// Uhlmann partial isometry between the purifying systems of two states.
///
/// `psi` and `phi` must share the systems in `shared` (same labels, same
/// dimensions). The returned operator `V` maps `psi`'s non-shared systems to
/// `phi`'s non-shared systems, is a full-rank partial isometry (kernel
/// completed deterministically), and satisfies
/// `|⟨phi|V|psi⟩| = F(psi_shared, phi_shared)`.
pub fn uhlmann_isometry<T: Scalar>(
    psi: &PureState<T>,
    phi: &PureState<T>,
    shared: &[&str],
) -> Result<LinearOp<T>> {
    let sh_psi = psi.space().restrict(shared)?;
    for (label, dim) in sh_psi.systems() {
        if phi.space().dim_of(label)? != *dim {
            return Err(Error::DimensionMismatch(format!(
                "shared system {label} has dimension {} in one state and {dim} in the other",
                phi.space().dim_of(label)?
            )));
        }
    }
    // align phi's shared side to psi's order
    let m_psi = op_of_vec(psi, shared)?;
    let shared_order: Vec<&str> = sh_psi.labels();
    let phi_aligned = {
        let mut order = shared_order.clone();
        let rest = phi.space().without(shared)?;
        order.extend(rest.labels());
        phi.permuted(&order)?
    };
    let m_phi = op_of_vec(&phi_aligned, shared)?;
    // cross operator on the purifiers: tr[V (Mψ Mφ†)] = ⟨φ|V|ψ⟩
    let cross = m_psi.matrix() * m_phi.matrix().adjoint();
    let v = linalg::polar_maximizer(&cross);
    LinearOp::new(
        m_psi.out_space().clone(),
        m_phi.out_space().clone(),
        v,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::tensor::{fidelity, trace_distance};

    type C = Complex<f64>;

    #[test]
    fn vec_of_scaled_identity_is_maximally_entangled() {
        let d = 3;
        let m = linalg::identity::<f64>(d) * C::new(1.0 / (d as f64).sqrt(), 0.0);
        let op = LinearOp::new(
            LabeledSpace::single("A", d),
            LabeledSpace::single("B", d),
            m,
        )
        .unwrap();
        let v = vec_of_op(&op).unwrap();
        let phi = maximally_entangled::<f64>("A", "B", d).unwrap();
        assert!((v.overlap(&phi).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn op_vec_mutual_inverses() {
        let mut s = random::Sampler::new(31);
        let space = LabeledSpace::new([("A", 2), ("B", 3)]).unwrap();
        let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
        let op = op_of_vec(&psi, &["A"]).unwrap();
        let back = vec_of_op(&op).unwrap();
        assert!((back.overlap(&psi).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn op_identity_lemma() {
        // √|A| op(ψ) |Φ⟩^{AA'} = |ψ⟩^{A'B}
        let mut s = random::Sampler::new(32);
        let space = LabeledSpace::new([("A", 3), ("B", 2)]).unwrap();
        let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
        let op = op_of_vec(&psi, &["A"]).unwrap(); // A -> B
        let phi = maximally_entangled::<f64>("A", "A'", 3).unwrap();
        let (mut amp, out_space) = op.apply_vector(&phi).unwrap();
        amp *= C::new(3.0f64.sqrt(), 0.0);
        let moved = PureState::new(out_space, amp).unwrap();
        // moved lives on [B, A']; compare against ψ^{A'B} with A' relabeled
        let expect = psi.renamed("A", "A'").unwrap();
        let moved = moved.permuted(&["A'", "B"]).unwrap();
        let expect = expect.permuted(&["A'", "B"]).unwrap();
        assert!((moved.overlap(&expect).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vec_isometry_lemma() {
        // tr[N†M] = vec(N)† vec(M), checked on the raw vec encoding
        let enc = |mm: &CMat<f64>| {
            let mut amp = CVec::<f64>::zeros(6);
            for a in 0..2 {
                for b in 0..3 {
                    amp[a * 3 + b] = mm[(b, a)];
                }
            }
            amp
        };
        let mut s = random::Sampler::new(33);
        let m = random::random_matrix::<f64>(3, 2, &mut s);
        let n = random::random_matrix::<f64>(3, 2, &mut s);
        let lhs = linalg::trace(&(n.adjoint() * &m));
        let rhs = enc(&n).dotc(&enc(&m));
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn op_switcheroo() {
        // op_{A→B}(ψ)|φ⟩^{AC} = op_{A→C}(φ)|ψ⟩^{AB}
        let mut s = random::Sampler::new(34);
        let sab = LabeledSpace::new([("A", 2), ("B", 3)]).unwrap();
        let sac = LabeledSpace::new([("A", 2), ("C", 4)]).unwrap();
        let psi = random::random_pure::<f64>(&sab, &mut s).unwrap();
        let phi = random::random_pure::<f64>(&sac, &mut s).unwrap();
        let (lhs, lsp) = op_of_vec(&psi, &["A"]).unwrap().apply_vector(&phi).unwrap();
        let (rhs, rsp) = op_of_vec(&phi, &["A"]).unwrap().apply_vector(&psi).unwrap();
        // lhs on [B... wait: op ψ: A->B applied to φ^{AC} gives [B, C]; rhs gives [C, B]
        let lperm = lsp.order_of(&["B", "C"]).unwrap();
        let lmap = lsp.permutation_map(&lperm);
        let rperm = rsp.order_of(&["B", "C"]).unwrap();
        let rmap = rsp.permutation_map(&rperm);
        let mut l2 = CVec::<f64>::zeros(lhs.len());
        let mut r2 = CVec::<f64>::zeros(rhs.len());
        for i in 0..lhs.len() {
            l2[lmap[i]] = lhs[i];
            r2[rmap[i]] = rhs[i];
        }
        assert!((l2 - r2).norm() < 1e-10);
    }

    #[test]
    fn schmidt_of_product_state_is_rank_one() {
        let a = PureState::<f64>::basis_state(LabeledSpace::single("A", 2), 1).unwrap();
        let mut s = random::Sampler::new(35);
        let b = random::random_pure::<f64>(&LabeledSpace::single("B", 3), &mut s).unwrap();
        let prod = a.tensor(&b).unwrap();
        let dec = schmidt(&prod, &["A"]).unwrap();
        assert!((dec.coefficients[0] - 1.0).abs() < 1e-10);
        for c in &dec.coefficients[1..] {
            assert!(c.abs() < 1e-10);
        }
    }

    #[test]
    fn schmidt_reconstruction() {
        let mut s = random::Sampler::new(36);
        let space = LabeledSpace::new([("A", 3), ("B", 4)]).unwrap();
        let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
        let dec = schmidt(&psi, &["A"]).unwrap();
        let back = dec.reconstruct().unwrap();
        assert!((back.overlap(&psi).unwrap().norm() - 1.0).abs() < 1e-9);
        let sq: f64 = dec.coefficients.iter().map(|c| c * c).sum();
        assert!((sq - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uhlmann_identity_case() {
        let mut s = random::Sampler::new(37);
        let space = LabeledSpace::new([("A", 2), ("B", 3)]).unwrap();
        let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
        let phi = psi.renamed("B", "C").unwrap();
        let v = uhlmann_isometry(&psi, &phi, &["A"]).unwrap();
        let moved = v.apply_to_pure_normalized(&psi).unwrap();
        let overlap = moved.permuted(&["A", "C"]).unwrap().overlap(&phi.permuted(&["A", "C"]).unwrap()).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uhlmann_overlap_equals_fidelity() {
        let mut s = random::Sampler::new(38);
        for _ in 0..20 {
            let sab = LabeledSpace::new([("A", 2), ("B", 4)]).unwrap();
            let sac = LabeledSpace::new([("A", 2), ("C", 3)]).unwrap();
            let psi = random::random_pure::<f64>(&sab, &mut s).unwrap();
            let phi = random::random_pure::<f64>(&sac, &mut s).unwrap();
            let v = uhlmann_isometry(&psi, &phi, &["A"]).unwrap();
            v.assert_partial_isometry().unwrap();
            let (amp, out_space) = v.apply_vector(&psi).unwrap();
            let f = fidelity(
                &psi.marginal(&["A"]).unwrap(),
                &phi.marginal(&["A"]).unwrap(),
            )
            .unwrap();
            // overlap with amp (not normalized): ⟨φ|V|ψ⟩
            let phi_p = phi.permuted(&out_space.labels().as_slice()).unwrap();
            let overlap = phi_p.amplitudes().dotc(&amp).norm();
            assert!((overlap - f).abs() < 1e-8, "overlap {overlap} vs fidelity {f}");
        }
    }

    #[test]
    fn uhlmann_degenerate_zero_overlap_still_partial_isometry() {
        // orthogonal marginals: the cross operator vanishes and the kernel
        // completion must still return a valid partial isometry
        let zero = PureState::<f64>::basis_state(LabeledSpace::single("A", 2), 0).unwrap();
        let one = PureState::<f64>::basis_state(LabeledSpace::single("A", 2), 1).unwrap();
        let mut s = random::Sampler::new(40);
        let b = random::random_pure::<f64>(&LabeledSpace::single("B", 3), &mut s).unwrap();
        let c = random::random_pure::<f64>(&LabeledSpace::single("C", 2), &mut s).unwrap();
        let psi = zero.tensor(&b).unwrap();
        let phi = one.tensor(&c).unwrap();
        let v = uhlmann_isometry(&psi, &phi, &["A"]).unwrap();
        v.assert_partial_isometry().unwrap();
        let (amp, out_space) = v.apply_vector(&psi).unwrap();
        let phi_p = phi.permuted(&out_space.labels()).unwrap();
        assert!(phi_p.amplitudes().dotc(&amp).norm() < 1e-10);
    }

    #[test]
    fn uhlmann_two_sqrt_eps_bound() {
        let mut s = random::Sampler::new(39);
        for _ in 0..20 {
            let sab = LabeledSpace::new([("A", 3), ("B", 3)]).unwrap();
            let sac = LabeledSpace::new([("A", 3), ("C", 4)]).unwrap();
            let psi = random::random_pure::<f64>(&sab, &mut s).unwrap();
            let phi = random::random_pure::<f64>(&sac, &mut s).unwrap();
            let eps = trace_distance(
                &psi.marginal(&["A"]).unwrap(),
                &phi.marginal(&["A"]).unwrap(),
            )
            .unwrap();
            let v = uhlmann_isometry(&psi, &phi, &["A"]).unwrap();
            let (amp, out_space) = v.apply_vector(&psi).unwrap();
            let moved = crate::tensor::DensityOperator::from_parts_unchecked(
                out_space.clone(),
                {
                    let d = amp.len();
                    CMat::<f64>::from_fn(d, d, |i, j| amp[i] * amp[j].conj())
                },
            );
            let moved = moved.permuted(&phi.space().labels().as_slice()).unwrap();
            let dist = linalg::trace_norm_hermitian(&(moved.matrix() - phi.to_density().matrix()));
            assert!(dist <= 2.0 * eps.sqrt() + 1e-8, "dist {dist} vs 2√ε {}", 2.0 * eps.sqrt());
        }
    }
}
