use super::DensityOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::Scalar;
use num_complex::Complex;

fn check_same_dim<T: Scalar>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Fidelity `F(ρ, σ) = ‖√ρ√σ‖₁`.
pub fn fidelity<T: Scalar>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T> {
    check_same_dim(rho, sigma)?;
    let sr = linalg::psd_sqrt(rho.matrix());
    let ss = linalg::psd_sqrt(sigma.matrix());
    Ok(linalg::trace_norm(&(&sr * &ss)))
}

/// Trace distance `‖ρ − σ‖₁ ∈ [0, 2]`.
pub fn trace_distance<T: Scalar>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T> {
    check_same_dim(rho, sigma)?;
    Ok(linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}

/// Fidelity distance `d_F(ρ, σ) = √(1 − F²)`.
pub fn fidelity_distance<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
) -> Result<T> {
    let f = fidelity(rho, sigma)?;
    let f = if f > T::one() { T::one() } else { f };
    Ok((T::one() - f * f).max(T::zero()).sqrt())
}

/// Optimal two-outcome discrimination of equiprobable `ρ` vs `σ`.
pub struct Helstrom<T: Scalar> {
    /// `½ + ¼‖ρ − σ‖₁`.
    pub p_guess: T,
    /// POVM element for guessing `ρ`: projector onto the positive eigenspace
    /// of `ρ − σ`. The complement `I − M` guesses `σ`.
    pub povm_rho: CMat<T>,
    pub povm_sigma: CMat<T>,
}

/// Helstrom's optimal measurement for distinguishing two equiprobable states.
pub fn helstrom<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
) -> Result<Helstrom<T>> {
    check_same_dim(rho, sigma)?;
    let delta = rho.matrix() - sigma.matrix();
    let (vals, vecs) = linalg::eigh(&delta);
    let d = vals.len();
    let mut proj = CMat::<T>::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v > T::zero() {
            let col = vecs.column(k);
            for i in 0..d {
                for j in 0..d {
                    proj[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
    }
    let dist = vals.iter().fold(T::zero(), |a, &x| a + x.abs());
    let p_guess = T::from_f(0.5) + T::from_f(0.25) * dist;
    let povm_sigma = linalg::identity::<T>(d) - &proj;
    Ok(Helstrom {
        p_guess,
        povm_rho: proj,
        povm_sigma,
    })
}

/// Success probability of a given two-element POVM on equiprobable `ρ`, `σ`.
pub fn povm_success<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    m_rho: &CMat<T>,
) -> Result<T> {
    check_same_dim(rho, sigma)?;
    let d = rho.dim();
    let m_sigma = linalg::identity::<T>(d) - m_rho;
    let half = Complex::new(T::from_f(0.5), T::zero());
    let p = linalg::trace(&((m_rho * rho.matrix()) * half + (&m_sigma * sigma.matrix()) * half));
    Ok(p.re)
}
