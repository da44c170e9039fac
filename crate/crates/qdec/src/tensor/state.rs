use super::LabeledSpace;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::scalar::Scalar;
use num_complex::Complex;

/// Normalized state vector over a labeled space.
#[derive(Clone, Debug)]
pub struct PureState<T: Scalar> {
    space: LabeledSpace,
    amp: CVec<T>,
}

impl<T: Scalar> PureState<T> {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(space: LabeledSpace, amp: CVec<T>) -> Result<Self> {
        if amp.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude length {} vs space dimension {}",
                amp.len(),
                space.dim()
            )));
        }
        let norm = amp.norm();
        if (norm.to_f64() - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "pure state norm {} not 1",
                norm.to_f64()
            )));
        }
        Ok(Self { space, amp })
    }

    /// Normalizes the vector; errors on (numerically) zero input.
    pub fn normalized(space: LabeledSpace, amp: CVec<T>) -> Result<Self> {
        let norm = amp.norm();
        if norm.to_f64() < 1e-14 {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        let amp = amp * Complex::new(T::one() / norm, T::zero());
        Self::new(space, amp)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(space: LabeledSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range {}",
                space.dim()
            )));
        }
        let mut amp = CVec::<T>::zeros(space.dim());
        amp[index] = Complex::new(T::one(), T::zero());
        Self::new(space, amp)
    }

    pub fn space(&self) -> &LabeledSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVec<T> {
        &self.amp
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        if self.space.dim() != other.space.dim() {
            return Err(Error::DimensionMismatch("overlap of unequal spaces".into()));
        }
        Ok(self.amp.dotc(&other.amp))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        let amp = linalg::kron_vec(&self.amp, &other.amp);
        Self::new(space, amp)
    }

    pub fn permuted(&self, labels: &[&str]) -> Result<Self> {
        let order = self.space.order_of(labels)?;
        let map = self.space.permutation_map(&order);
        let mut amp = CVec::<T>::zeros(self.amp.len());
        for (old, &new) in map.iter().enumerate() {
            amp[new] = self.amp[old];
        }
        Ok(Self {
            space: self.space.reordered(&order),
            amp,
        })
    }

    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            space: self.space.renamed(from, to)?,
            amp: self.amp.clone(),
        })
    }

    pub fn to_density(&self) -> DensityOperator<T> {
        let d = self.dim();
        let mut mat = CMat::<T>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = self.amp[i] * self.amp[j].conj();
            }
        }
        DensityOperator {
            space: self.space.clone(),
            mat,
        }
    }

    /// Reduced density operator after discarding `drop`.
    pub fn partial_trace(&self, drop: &[&str]) -> Result<DensityOperator<T>> {
        let keep_space = self.space.without(drop)?;
        if keep_space.n_systems() == self.space.n_systems() {
            return Ok(self.to_density());
        }
        let keep_labels = keep_space.labels();
        let mut order_labels: Vec<&str> = keep_labels.clone();
        let drop_space = self.space.restrict(drop)?;
        order_labels.extend(drop_space.labels());
        let perm = self.permuted(&order_labels)?;
        let dk = keep_space.dim();
        let dd = self.space.dim() / dk;
        let mut mat = CMat::<T>::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = Complex::new(T::zero(), T::zero());
                for d in 0..dd {
                    acc += perm.amp[i * dd + d] * perm.amp[j * dd + d].conj();
                }
                mat[(i, j)] = acc;
            }
        }
        Ok(DensityOperator {
            space: keep_space,
            mat,
        })
    }

    /// Marginal on `keep` (trace out everything else).
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityOperator<T>> {
        let drop = self.space.without(keep)?;
        self.partial_trace(&drop.labels())
    }
}

/// Density operator (or subnormalized positive operator) over a labeled space.
#[derive(Clone, Debug)]
pub struct DensityOperator<T: Scalar> {
    space: LabeledSpace,
    mat: CMat<T>,
}

impl<T: Scalar> DensityOperator<T> {
    pub const STRUCT_TOL: f64 = 1e-10;
    /// Slightly looser PSD tolerance: eigensolver noise on dim ~100 spaces.
    pub const PSD_TOL: f64 = 1e-9;

    fn validate(space: &LabeledSpace, mat: &CMat<T>, subnormalized: bool) -> Result<()> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} vs space dimension {}",
                mat.nrows(),
                mat.ncols(),
                space.dim()
            )));
        }
        let herm_dev = (mat - mat.adjoint()).norm().to_f64();
        if herm_dev > Self::STRUCT_TOL * (1.0 + mat.norm().to_f64()) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm_dev:.3e})"
            )));
        }
        let min_eig = linalg::eigvals(mat).first().copied().unwrap_or_else(T::zero);
        if min_eig.to_f64() < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                min_eig.to_f64()
            )));
        }
        let tr = linalg::trace(mat).re.to_f64();
        if subnormalized {
            if tr > 1.0 + Self::STRUCT_TOL {
                return Err(Error::InvalidState(format!("trace {tr} exceeds 1")));
            }
        } else if (tr - 1.0).abs() > Self::STRUCT_TOL {
            return Err(Error::InvalidState(format!("trace {tr} not 1")));
        }
        Ok(())
    }

    pub fn new(space: LabeledSpace, mat: CMat<T>) -> Result<Self> {
        Self::validate(&space, &mat, false)?;
        Ok(Self { space, mat })
    }

    /// Relaxed variant allowing `tr ≤ 1` (smoothing-ball members).
    pub fn subnormalized(space: LabeledSpace, mat: CMat<T>) -> Result<Self> {
        Self::validate(&space, &mat, true)?;
        Ok(Self { space, mat })
    }

    /// No validation; for internal intermediate values known to be valid.
    pub fn from_parts_unchecked(space: LabeledSpace, mat: CMat<T>) -> Self {
        Self { space, mat }
    }

    /// Maximally mixed state π on the space.
    pub fn maximally_mixed(space: LabeledSpace) -> Self {
        let d = space.dim();
        let mat = CMat::<T>::identity(d, d) * Complex::new(T::one() / T::from_u(d), T::zero());
        Self { space, mat }
    }

    pub fn space(&self) -> &LabeledSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn trace(&self) -> T {
        linalg::trace(&self.mat).re
    }

    pub fn purity(&self) -> T {
        linalg::trace(&(&self.mat * &self.mat)).re
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::eigvals(&self.mat)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        let mat = linalg::kron(&self.mat, &other.mat);
        Ok(Self { space, mat })
    }

    pub fn permuted(&self, labels: &[&str]) -> Result<Self> {
        let order = self.space.order_of(labels)?;
        let map = self.space.permutation_map(&order);
        let d = self.mat.nrows();
        let mut mat = CMat::<T>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat[(map[i], map[j])] = self.mat[(i, j)];
            }
        }
        Ok(Self {
            space: self.space.reordered(&order),
            mat,
        })
    }

    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            space: self.space.renamed(from, to)?,
            mat: self.mat.clone(),
        })
    }

    /// Partial trace over `drop`. Trace is preserved.
    pub fn partial_trace(&self, drop: &[&str]) -> Result<Self> {
        if drop.is_empty() {
            return Ok(self.clone());
        }
        let keep_space = self.space.without(drop)?;
        let mut order_labels = keep_space.labels();
        let drop_space = self.space.restrict(drop)?;
        order_labels.extend(drop_space.labels());
        let perm = self.permuted(&order_labels)?;
        let dk = keep_space.dim();
        let dd = self.space.dim() / dk;
        let mut mat = CMat::<T>::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = Complex::new(T::zero(), T::zero());
                for d in 0..dd {
                    acc += perm.mat[(i * dd + d, j * dd + d)];
                }
                mat[(i, j)] = acc;
            }
        }
        Ok(Self {
            space: keep_space,
            mat,
        })
    }

    /// Marginal on `keep`.
    pub fn marginal(&self, keep: &[&str]) -> Result<Self> {
        let drop = self.space.without(keep)?;
        self.partial_trace(&drop.labels())
    }

    /// Purification with purifier dimension equal to the numerical rank
    /// (eigenvalue cutoff 1e-12). The purifier label must be fresh.
    pub fn purify(&self, purifier_label: &str) -> Result<PureState<T>> {
        if self.space.has(purifier_label) {
            return Err(Error::LabelCollision(purifier_label.to_string()));
        }
        let cutoff = T::from_f(1e-12);
        let (vals, vecs) = linalg::eigh(&self.mat);
        let kept: Vec<(T, usize)> = vals
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, v)| v > cutoff)
            .map(|(i, v)| (v, i))
            .collect();
        let rank = kept.len().max(1);
        let purifier = LabeledSpace::single(purifier_label, rank);
        let space = self.space.tensor(&purifier)?;
        let d = self.dim();
        let mut amp = CVec::<T>::zeros(d * rank);
        for (k, &(v, col)) in kept.iter().enumerate() {
            let w = Complex::new(v.sqrt(), T::zero());
            for i in 0..d {
                amp[i * rank + k] += w * vecs[(i, col)];
            }
        }
        PureState::normalized(space, amp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::maximally_entangled;

    type PS = PureState<f64>;
    type DO = DensityOperator<f64>;
    type C = Complex<f64>;

    fn qubit(label: &str) -> LabeledSpace {
        LabeledSpace::single(label, 2)
    }

    #[test]
    fn tensor_of_maximally_mixed_is_uniform_diagonal() {
        let pa = DO::maximally_mixed(qubit("A"));
        let pb = DO::maximally_mixed(qubit("B"));
        let pab = pa.tensor(&pb).unwrap();
        assert_eq!(pab.space().dim(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.25 } else { 0.0 };
                assert!((pab.matrix()[(i, j)] - C::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = PS::basis_state(qubit("A"), 0).unwrap();
        let one = PS::basis_state(qubit("B"), 1).unwrap();
        let prod = zero.tensor(&one).unwrap();
        // |01⟩ sits at flat index 1
        assert!((prod.amplitudes()[1] - C::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_multiplies_under_tensor() {
        let mut sampler = crate::random::Sampler::new(7);
        let rho = crate::random::random_density::<f64>(&qubit("A"), 2, &mut sampler).unwrap();
        let sigma = crate::random::random_density::<f64>(&LabeledSpace::single("B", 3), 2, &mut sampler).unwrap();
        let joint = rho.tensor(&sigma).unwrap();
        assert!((joint.trace() - rho.trace() * sigma.trace()).abs() < 1e-10);
    }

    #[test]
    fn maximally_entangled_marginal_is_mixed() {
        let phi = maximally_entangled::<f64>("A", "A'", 2).unwrap();
        let marg = phi.partial_trace(&["A'"]).unwrap();
        let pi = DO::maximally_mixed(qubit("A"));
        assert!((marg.matrix() - pi.matrix()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut sampler = crate::random::Sampler::new(1);
        let rho = crate::random::random_density::<f64>(&qubit("A"), 2, &mut sampler).unwrap();
        let sigma = crate::random::random_density(&qubit("B"), 2, &mut sampler).unwrap();
        let joint = rho.tensor(&sigma).unwrap();
        let back = joint.partial_trace(&["B"]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_adjoint_identity() {
        // tr[Z · tr_B ρ] = tr[(Z ⊗ I) ρ] for random Z
        let mut sampler = crate::random::Sampler::new(3);
        let space = LabeledSpace::new([("A", 2), ("B", 3)]).unwrap();
        let rho = crate::random::random_density::<f64>(&space, 4, &mut sampler).unwrap();
        let z = crate::random::random_matrix::<f64>(2, 2, &mut sampler);
        let lhs = linalg::trace(&(&z * rho.partial_trace(&["B"]).unwrap().matrix().clone())).re;
        let zfull = linalg::kron(&z, &linalg::identity::<f64>(3));
        let rhs = linalg::trace(&(&zfull * rho.matrix().clone())).re;
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn reduced_eigenvalues_match_schmidt_squares() {
        let mut sampler = crate::random::Sampler::new(11);
        let space = LabeledSpace::new([("A", 3), ("B", 4)]).unwrap();
        let psi = crate::random::random_pure::<f64>(&space, &mut sampler).unwrap();
        let marg = psi.partial_trace(&["B"]).unwrap();
        let mut eigs: Vec<f64> = marg.eigenvalues();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let schmidt = crate::tensor::schmidt(&psi, &["A"]).unwrap();
        for (e, s) in eigs.iter().zip(schmidt.coefficients.iter()) {
            assert!((e - s * s).abs() < 1e-9);
        }
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let pi = DO::maximally_mixed(qubit("A"));
        let psi = pi.purify("P").unwrap();
        let marg = psi.partial_trace(&["P"]).unwrap();
        assert!((marg.matrix() - pi.matrix()).norm() < 1e-9);
        let schmidt = crate::tensor::schmidt(&psi, &["A"]).unwrap();
        for c in &schmidt.coefficients {
            assert!((c - 1.0 / 2.0f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn purify_pure_state_uses_trivial_purifier() {
        let psi = PS::basis_state(qubit("A"), 1).unwrap();
        let rho = psi.to_density();
        let purified = rho.purify("P").unwrap();
        assert_eq!(purified.space().dim_of("P").unwrap(), 1);
    }

    #[test]
    fn purify_random_low_rank() {
        let mut sampler = crate::random::Sampler::new(5);
        let space = LabeledSpace::single("A", 4);
        let rho = crate::random::random_density::<f64>(&space, 3, &mut sampler).unwrap();
        let psi = rho.purify("P").unwrap();
        assert_eq!(psi.space().dim_of("P").unwrap(), 3);
        let marg = psi.partial_trace(&["P"]).unwrap();
        assert!((marg.matrix() - rho.matrix()).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_states() {
        let space = qubit("A");
        let mat = CMat::<f64>::identity(2, 2); // trace 2
        assert!(DO::new(space.clone(), mat.clone()).is_err());
        assert!(DO::subnormalized(space.clone(), mat).is_err());
        let amp = CVec::<f64>::from_element(2, C::new(1.0, 0.0)); // norm √2
        assert!(PS::new(space, amp).is_err());
    }
}
