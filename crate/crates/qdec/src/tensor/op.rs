use super::{DensityOperator, LabeledSpace, PureState};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::Scalar;
use num_complex::Complex;

/// Linear operator between labeled spaces (matrix is `out_dim × in_dim`).
#[derive(Clone, Debug)]
pub struct LinearOp<T: Scalar> {
    in_space: LabeledSpace,
    out_space: LabeledSpace,
    mat: CMat<T>,
}

impl<T: Scalar> LinearOp<T> {
    pub const ISOMETRY_TOL: f64 = 1e-8;

    pub fn new(in_space: LabeledSpace, out_space: LabeledSpace, mat: CMat<T>) -> Result<Self> {
        if mat.ncols() != in_space.dim() || mat.nrows() != out_space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} vs spaces {} -> {}",
                mat.nrows(),
                mat.ncols(),
                in_space.dim(),
                out_space.dim()
            )));
        }
        Ok(Self {
            in_space,
            out_space,
            mat,
        })
    }

    pub fn identity(space: LabeledSpace) -> Self {
        let d = space.dim();
        Self {
            in_space: space.clone(),
            out_space: space,
            mat: CMat::<T>::identity(d, d),
        }
    }

    pub fn in_space(&self) -> &LabeledSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &LabeledSpace {
        &self.out_space
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            in_space: self.out_space.clone(),
            out_space: self.in_space.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            in_space: self.in_space.tensor(&other.in_space)?,
            out_space: self.out_space.tensor(&other.out_space)?,
            mat: linalg::kron(&self.mat, &other.mat),
        })
    }

    /// `self ∘ other` (apply `other` first). Spaces must have equal
    /// dimensions; labels are taken from `other.in` and `self.out`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.in_space.dim() != other.out_space.dim() {
            return Err(Error::DimensionMismatch("composition".into()));
        }
        Ok(Self {
            in_space: other.in_space.clone(),
            out_space: self.out_space.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    /// `V†V` idempotency deviation; small iff the operator is a partial isometry.
    pub fn partial_isometry_deviation(&self) -> T {
        let vv = self.mat.adjoint() * &self.mat;
        (&vv * &vv - vv).norm()
    }

    pub fn is_partial_isometry(&self) -> bool {
        self.partial_isometry_deviation().to_f64() <= Self::ISOMETRY_TOL
    }

    pub fn assert_partial_isometry(&self) -> Result<()> {
        let dev = self.partial_isometry_deviation().to_f64();
        if dev > Self::ISOMETRY_TOL {
            return Err(Error::InvalidOperator(format!(
                "claimed partial isometry deviates by {dev:.3e}"
            )));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        let tol = T::from_f(1e-9);
        linalg::singular_values(&self.mat)
            .into_iter()
            .filter(|s| *s > tol)
            .count()
    }

    pub fn renamed_in(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            in_space: self.in_space.renamed(from, to)?,
            out_space: self.out_space.clone(),
            mat: self.mat.clone(),
        })
    }

    pub fn renamed_out(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            in_space: self.in_space.clone(),
            out_space: self.out_space.renamed(from, to)?,
            mat: self.mat.clone(),
        })
    }

    /// How this operator acts on a host space: index maps for grouping the
    /// host as `[in..., rest...]` and for splicing the output labels back in
    /// at the position of the first input label.
    fn embedding_plan(&self, host: &LabeledSpace) -> Result<EmbeddingPlan> {
        let in_labels = self.in_space.labels();
        for l in &in_labels {
            let hd = host.dim_of(l)?;
            let od = self.in_space.dim_of(l)?;
            if hd != od {
                return Err(Error::DimensionMismatch(format!(
                    "label {l}: host dim {hd} vs operator dim {od}"
                )));
            }
        }
        let rest = host.without(&in_labels)?;
        for l in self.out_space.labels() {
            if rest.has(l) {
                return Err(Error::LabelCollision(l.to_string()));
            }
        }
        let mut grouped: Vec<&str> = in_labels.clone();
        let rest_labels = rest.labels();
        grouped.extend(rest_labels.iter());
        let order_in = host.order_of(&grouped)?;
        let pre_map = host.permutation_map(&order_in);

        let interim = self.out_space.tensor(&rest)?;
        let first_in = in_labels[0];
        let mut final_labels: Vec<String> = Vec::new();
        for (l, _) in host.systems() {
            if l == first_in {
                for ol in self.out_space.labels() {
                    final_labels.push(ol.to_string());
                }
            } else if !in_labels.contains(&l.as_str()) {
                final_labels.push(l.clone());
            }
        }
        let final_refs: Vec<&str> = final_labels.iter().map(|s| s.as_str()).collect();
        let order_out = interim.order_of(&final_refs)?;
        let post_map = interim.permutation_map(&order_out);
        let final_space = interim.reordered(&order_out);
        Ok(EmbeddingPlan {
            pre_map,
            post_map,
            final_space,
            dim_rest: rest.dim(),
        })
    }

    /// Core of the identity-embedded application: reshapes the grouped vector
    /// to an `in × rest` matrix and multiplies, avoiding the full
    /// `op ⊗ I` matrix.
    fn apply_grouped(&self, plan: &EmbeddingPlan, amp: &crate::linalg::CVec<T>) -> crate::linalg::CVec<T> {
        let din = self.in_space.dim();
        let dout = self.out_space.dim();
        let drest = plan.dim_rest;
        let mut grouped = CMat::<T>::zeros(din, drest);
        for (orig, &g) in plan.pre_map.iter().enumerate() {
            grouped[(g / drest, g % drest)] = amp[orig];
        }
        let moved = &self.mat * grouped;
        let mut out = crate::linalg::CVec::<T>::zeros(dout * drest);
        for o in 0..dout {
            for r in 0..drest {
                out[plan.post_map[o * drest + r]] = moved[(o, r)];
            }
        }
        out
    }

    /// Embeds the operator into `host` (a space containing all input labels),
    /// acting as identity elsewhere. Returns the full matrix together with
    /// the resulting space: input labels are replaced by the output labels at
    /// the position of the first input label.
    ///
    /// Output labels must not collide with the untouched part of `host`.
    pub fn embedded(&self, host: &LabeledSpace) -> Result<(CMat<T>, LabeledSpace)> {
        let plan = self.embedding_plan(host)?;
        let dout = self.out_space.dim();
        let drest = plan.dim_rest;
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = CMat::<T>::zeros(plan.final_space.dim(), host.dim());
        for (orig, &g) in plan.pre_map.iter().enumerate() {
            let (i, r) = (g / drest, g % drest);
            for o in 0..dout {
                let v = self.mat[(o, i)];
                if v != zero {
                    out[(plan.post_map[o * drest + r], orig)] = v;
                }
            }
        }
        Ok((out, plan.final_space))
    }

    /// Applies the operator to a pure state, acting as identity on labels the
    /// operator does not mention. The result is not renormalized.
    pub fn apply_vector(
        &self,
        psi: &PureState<T>,
    ) -> Result<(crate::linalg::CVec<T>, LabeledSpace)> {
        let plan = self.embedding_plan(psi.space())?;
        let out = self.apply_grouped(&plan, psi.amplitudes());
        Ok((out, plan.final_space))
    }

    /// Applies to a pure state; errors if the output norm is not 1.
    pub fn apply_to_pure(&self, psi: &PureState<T>) -> Result<PureState<T>> {
        let (amp, space) = self.apply_vector(psi)?;
        PureState::new(space, amp)
    }

    /// Applies to a pure state and renormalizes.
    pub fn apply_to_pure_normalized(&self, psi: &PureState<T>) -> Result<PureState<T>> {
        let (amp, space) = self.apply_vector(psi)?;
        PureState::normalized(space, amp)
    }

    /// Conjugation `V ρ V†` with identity embedding; no renormalization.
    /// Applied column-by-column so the full embedded matrix is never built.
    pub fn conjugate_density(&self, rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        let plan = self.embedding_plan(rho.space())?;
        let d_in = rho.dim();
        let d_out = plan.final_space.dim();
        // Y = M ρ
        let mut y = CMat::<T>::zeros(d_out, d_in);
        for c in 0..d_in {
            let col = crate::linalg::CVec::<T>::from_column_slice(rho.matrix().column(c).as_slice());
            y.set_column(c, &self.apply_grouped(&plan, &col));
        }
        // Z = Y M† = (M Y†)†
        let y_adj = y.adjoint();
        let mut z = CMat::<T>::zeros(d_out, d_out);
        for c in 0..d_out {
            let col = crate::linalg::CVec::<T>::from_column_slice(y_adj.column(c).as_slice());
            z.set_column(c, &self.apply_grouped(&plan, &col));
        }
        Ok(DensityOperator::from_parts_unchecked(
            plan.final_space,
            z.adjoint(),
        ))
    }
}

/// Precomputed index maps for embedding an operator into a host space.
struct EmbeddingPlan {
    /// host index → grouped `[in..., rest...]` index
    pre_map: Vec<usize>,
    /// grouped `[out..., rest...]` index → final index
    post_map: Vec<usize>,
    final_space: LabeledSpace,
    dim_rest: usize,
}
