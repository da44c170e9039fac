//! Dense complex linear-algebra helpers shared by every module.

use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

pub fn identity<T: Scalar>(d: usize) -> CMat<T> {
    CMat::<T>::identity(d, d)
}

/// Modulus of a complex scalar without requiring `T: Float`.
pub fn cmod<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

pub fn dagger<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    m.adjoint()
}

pub fn trace<T: Scalar>(m: &CMat<T>) -> Complex<T> {
    m.diagonal().sum()
}

pub fn kron<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

pub fn kron_vec<T: Scalar>(a: &CVec<T>, b: &CVec<T>) -> CVec<T> {
    let mut out = CVec::<T>::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Hermitian part `(M + M†)/2`; cheap guard before eigendecompositions.
pub fn hermitize<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * Complex::new(T::from_f(0.5), T::zero())
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// ascending order with matching orthonormal eigenvector columns.
pub fn eigh<T: Scalar>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let h = hermitize(m);
    let se = h.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals: Vec<T> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::<T>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues only, ascending.
pub fn eigvals<T: Scalar>(m: &CMat<T>) -> Vec<T> {
    let h = hermitize(m);
    let mut vals: Vec<T> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

pub fn largest_eigval<T: Scalar>(m: &CMat<T>) -> T {
    *eigvals(m).last().expect("nonempty spectrum")
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_fn<T: Scalar>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let (vals, vecs) = eigh(m);
    let d = vals.len();
    let mut diag = CMat::<T>::zeros(d, d);
    for i in 0..d {
        diag[(i, i)] = Complex::new(f(vals[i]), T::zero());
    }
    &vecs * diag * vecs.adjoint()
}

/// Positive-semidefinite square root (negative eigenvalues clipped to zero).
pub fn psd_sqrt<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    hermitian_fn(m, |x| if x > T::zero() { x.sqrt() } else { T::zero() })
}

/// `M^{-1/2}` on the eigenspaces above `floor`; zero on the rest.
pub fn psd_inv_sqrt<T: Scalar>(m: &CMat<T>, floor: T) -> CMat<T> {
    hermitian_fn(m, |x| {
        if x > floor {
            T::one() / x.sqrt()
        } else {
            T::zero()
        }
    })
}

pub fn singular_values<T: Scalar>(m: &CMat<T>) -> Vec<T> {
    let mut sv: Vec<T> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Trace norm `‖M‖₁ = tr√(M†M)`, the sum of singular values.
pub fn trace_norm<T: Scalar>(m: &CMat<T>) -> T {
    singular_values(m).into_iter().fold(T::zero(), |a, s| a + s)
}

/// Trace norm of a Hermitian matrix via its eigenvalues.
pub fn trace_norm_hermitian<T: Scalar>(m: &CMat<T>) -> T {
    eigvals(m).into_iter().fold(T::zero(), |a, x| a + x.abs())
}

/// Operator norm (largest singular value).
pub fn op_norm_inf<T: Scalar>(m: &CMat<T>) -> T {
    singular_values(m).into_iter().next().unwrap_or_else(T::zero)
}

pub fn frobenius<T: Scalar>(m: &CMat<T>) -> T {
    m.norm()
}

/// Full SVD `M = U Σ V†` with square unitary factors; thin factors from
/// nalgebra are completed to orthonormal bases.
pub fn svd_full<T: Scalar>(m: &CMat<T>) -> (CMat<T>, Vec<T>, CMat<T>) {
    let svd = m.clone().svd(true, true);
    let u_thin = svd.u.expect("svd u");
    let vt_thin = svd.v_t.expect("svd v_t");
    let sv: Vec<T> = svd.singular_values.iter().copied().collect();
    let u = complete_orthonormal(&u_thin, m.nrows());
    let v = complete_orthonormal(&vt_thin.adjoint(), m.ncols());
    (u, sv, v)
}

/// Extends the orthonormal columns of `cols` to an orthonormal basis of the
/// `dim`-dimensional space by Gram-Schmidt against canonical basis vectors.
pub fn complete_orthonormal<T: Scalar>(cols: &CMat<T>, dim: usize) -> CMat<T> {
    let tol = T::from_f(1e-9);
    let mut basis: Vec<CVec<T>> = Vec::with_capacity(dim);
    for j in 0..cols.ncols().min(dim) {
        let c = CVec::<T>::from_column_slice(cols.column(j).as_slice());
        // drop numerically null columns (thin SVD of a rank-deficient matrix)
        if c.norm() > tol {
            basis.push(c.clone() * Complex::new(T::one() / c.norm(), T::zero()));
        }
    }
    let mut cand = 0usize;
    while basis.len() < dim {
        assert!(cand < 2 * dim, "orthonormal completion failed");
        let mut v = CVec::<T>::zeros(dim);
        v[cand % dim] = Complex::new(T::one(), T::zero());
        if cand >= dim {
            // second sweep with a phase twist in case of unlucky alignment
            v[(cand + 1) % dim] = Complex::new(T::zero(), T::one());
        }
        cand += 1;
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let n = v.norm();
        if n > tol {
            basis.push(v * Complex::new(T::one() / n, T::zero()));
        }
    }
    let mut out = CMat::<T>::zeros(dim, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// The partial isometry `V` maximizing `|tr[V M]|`; attains `‖M‖₁`.
///
/// `M` is `r × c`; the result is `c × r` and has full rank `min(r, c)`, the
/// kernel completed deterministically through [`complete_orthonormal`].
pub fn polar_maximizer<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    let (u, _sv, v) = svd_full(m);
    let k = m.nrows().min(m.ncols());
    let mut out = CMat::<T>::zeros(m.ncols(), m.nrows());
    for j in 0..k {
        let vj = v.column(j);
        let uj = u.column(j);
        for a in 0..m.ncols() {
            for b in 0..m.nrows() {
                out[(a, b)] += vj[a] * uj[b].conj();
            }
        }
    }
    out
}

pub fn log2<T: Scalar>(x: T) -> T {
    x.ln() / T::from_f(std::f64::consts::LN_2)
}

pub fn exp2<T: Scalar>(x: T) -> T {
    (x * T::from_f(std::f64::consts::LN_2)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    type M = CMat<f64>;
    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn eigh_orthonormal_on_degenerate_spectrum() {
        // 4x4 identity-like with a doubly degenerate eigenvalue
        let m = M::from_diagonal_element(4, 4, c(1.0, 0.0))
            + M::from_fn(4, 4, |i, j| {
                if i < 2 && j < 2 && i != j {
                    c(0.5, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
        let (_vals, vecs) = eigh(&m);
        let gram = vecs.adjoint() * &vecs;
        assert!((gram - identity::<f64>(4)).norm() < 1e-10);
    }

    #[test]
    fn trace_norm_matches_hermitian_route() {
        let m = M::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(-0.4, 0.0)]);
        assert!((trace_norm(&m) - trace_norm_hermitian(&m)).abs() < 1e-10);
    }

    #[test]
    fn polar_maximizer_attains_trace_norm() {
        let m = M::from_row_slice(
            2,
            3,
            &[c(0.3, 0.1), c(-0.2, 0.4), c(0.0, 0.9), c(1.0, 0.0), c(0.2, -0.3), c(0.5, 0.5)],
        );
        let v = polar_maximizer(&m);
        let vv = v.adjoint() * &v;
        // partial isometry: (V†V)² = V†V
        assert!((&vv * &vv - vv.clone()).norm() < 1e-9);
        let prod: M = &v * &m;
        let attained = trace(&prod).re;
        assert!((attained - trace_norm(&m)).abs() < 1e-9);
    }
}
