//! Labeled multipartite linear algebra: states, operators, metrics, and the
//! purification machinery everything else builds on.
//!
//! Every state and operator carries a [`LabeledSpace`]: an ordered list of
//! named subsystems with explicit dimensions. The canonical basis of a space
//! is the computational basis in label order; all basis-dependent operations
//! (`op`/`vec` duality, maximally entangled states) refer to it.

mod duality;
mod metrics;
mod op;
mod state;

pub use duality::{maximally_entangled, op_of_vec, schmidt, uhlmann_isometry, vec_of_op, SchmidtDecomposition};
pub use metrics::{fidelity, fidelity_distance, helstrom, povm_success, trace_distance, Helstrom};
pub use op::LinearOp;
pub use state::{DensityOperator, PureState};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ordered list of `(label, dimension)` pairs describing a tensor factorization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSpace {
    systems: Vec<(String, usize)>,
}

impl LabeledSpace {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let systems: Vec<(String, usize)> =
            systems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (label, dim) in &systems {
            if *dim == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "system {label} has dimension 0"
                )));
            }
        }
        for i in 0..systems.len() {
            for j in (i + 1)..systems.len() {
                if systems[i].0 == systems[j].0 {
                    return Err(Error::LabelCollision(systems[i].0.clone()));
                }
            }
        }
        Ok(Self { systems })
    }

    /// Single-system space.
    pub fn single(label: impl Into<String>, dim: usize) -> Self {
        Self::new([(label.into(), dim)]).expect("single system")
    }

    /// The zero-system space (total dimension 1).
    pub fn empty() -> Self {
        Self { systems: Vec::new() }
    }

    pub fn n_systems(&self) -> usize {
        self.systems.len()
    }

    pub fn dim(&self) -> usize {
        self.systems.iter().map(|(_, d)| d).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|&(_, d)| d).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn systems(&self) -> &[(String, usize)] {
        &self.systems
    }

    pub fn has(&self, label: &str) -> bool {
        self.systems.iter().any(|(l, _)| l == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.systems[self.position(label)?].1)
    }

    /// Product of the dimensions of `labels`.
    pub fn dim_of_all(&self, labels: &[&str]) -> Result<usize> {
        let mut d = 1usize;
        for l in labels {
            d *= self.dim_of(l)?;
        }
        Ok(d)
    }

    /// Concatenation; label sets must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for (l, _) in &other.systems {
            if self.has(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        Ok(Self { systems })
    }

    /// Subspace of the given labels, keeping this space's order.
    pub fn restrict(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.position(l)?;
        }
        Ok(Self {
            systems: self
                .systems
                .iter()
                .filter(|(l, _)| labels.contains(&l.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Complement of `labels`, keeping this space's order.
    pub fn without(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.position(l)?;
        }
        Ok(Self {
            systems: self
                .systems
                .iter()
                .filter(|(l, _)| !labels.contains(&l.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Renames a label in place.
    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        self.position(from)?;
        if from != to && self.has(to) {
            return Err(Error::LabelCollision(to.to_string()));
        }
        Ok(Self {
            systems: self
                .systems
                .iter()
                .map(|(l, d)| {
                    if l == from {
                        (to.to_string(), *d)
                    } else {
                        (l.clone(), *d)
                    }
                })
                .collect(),
        })
    }

    /// A label not present in this space, derived from `base`.
    pub fn fresh_label(&self, base: &str) -> String {
        if !self.has(base) {
            return base.to_string();
        }
        let mut k = 0usize;
        loop {
            let cand = format!("{base}{k}");
            if !self.has(&cand) {
                return cand;
            }
            k += 1;
        }
    }

    /// Row-major strides in label order (first label varies slowest).
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.dims();
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        strides
    }

    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        let strides = self.strides();
        let dims = self.dims();
        (0..dims.len())
            .map(|k| (flat / strides[k]) % dims[k])
            .collect()
    }

    /// Index map for reordering systems: `order[k]` is the old position of
    /// the system at new position `k`. Returns `map` with
    /// `map[old_flat] = new_flat`.
    pub fn permutation_map(&self, order: &[usize]) -> Vec<usize> {
        let dims = self.dims();
        let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
        let mut new_strides = vec![1usize; new_dims.len()];
        for k in (0..new_dims.len().saturating_sub(1)).rev() {
            new_strides[k] = new_strides[k + 1] * new_dims[k + 1];
        }
        let total = self.dim();
        let old_strides = self.strides();
        let mut map = vec![0usize; total];
        for old in 0..total {
            let mut new = 0usize;
            for (k, &p) in order.iter().enumerate() {
                let digit = (old / old_strides[p]) % dims[p];
                new += digit * new_strides[k];
            }
            map[old] = new;
        }
        map
    }

    /// System permutation bringing this space to the given label order.
    pub fn order_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        if labels.len() != self.systems.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation over {} labels on a {}-system space",
                labels.len(),
                self.systems.len()
            )));
        }
        let mut order = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if order.contains(&p) {
                return Err(Error::LabelCollision(l.to_string()));
            }
            order.push(p);
        }
        Ok(order)
    }

    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            systems: order.iter().map(|&p| self.systems[p].clone()).collect(),
        }
    }
}

impl std::fmt::Display for LabeledSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .systems
            .iter()
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}
