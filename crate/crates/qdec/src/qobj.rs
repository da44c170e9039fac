//! File formats: QOBJ-JSON for states/operators and CHAN-JSON for channels.
//!
//! QOBJ-JSON: `{"labels":[["A",2],["R",2]], "kind":"density"|"pure"|"op",
//! "matrix":[[[re,im],…],…]}` with row-major complex entries. Pure states are
//! written as a single-column matrix (a 1×d row is accepted on input).
//! CHAN-JSON: `{"in":[["A",2]], "out":[["C",2]], "kraus":[matrix,…]}`.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::tensor::{DensityOperator, LabeledSpace, LinearOp, PureState};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QObjKind {
    Density,
    Pure,
    Op,
}

/// Serialized labeled object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QObj {
    pub labels: Vec<(String, usize)>,
    pub kind: QObjKind,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

fn matrix_to_rows(m: &CMat<f64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMat<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::InvalidState("empty matrix".into()));
    }
    let ncols = rows[0].len();
    for r in rows {
        if r.len() != ncols {
            return Err(Error::InvalidState("ragged matrix".into()));
        }
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl QObj {
    pub fn space(&self) -> Result<LabeledSpace> {
        LabeledSpace::new(self.labels.iter().map(|(l, d)| (l.clone(), *d)))
    }

    pub fn from_density(rho: &DensityOperator<f64>) -> Self {
        Self {
            labels: rho.space().systems().to_vec(),
            kind: QObjKind::Density,
            matrix: matrix_to_rows(rho.matrix()),
        }
    }

    pub fn from_pure(psi: &PureState<f64>) -> Self {
        let col: Vec<Vec<[f64; 2]>> = psi
            .amplitudes()
            .iter()
            .map(|z| vec![[z.re, z.im]])
            .collect();
        Self {
            labels: psi.space().systems().to_vec(),
            kind: QObjKind::Pure,
            matrix: col,
        }
    }

    /// Square operator on a single space.
    pub fn from_op(op: &LinearOp<f64>) -> Result<Self> {
        if op.in_space() != op.out_space() {
            return Err(Error::Unsupported(
                "QOBJ op encoding covers square operators on one space".into(),
            ));
        }
        Ok(Self {
            labels: op.in_space().systems().to_vec(),
            kind: QObjKind::Op,
            matrix: matrix_to_rows(op.matrix()),
        })
    }

    pub fn to_density(&self) -> Result<DensityOperator<f64>> {
        if self.kind != QObjKind::Density {
            return Err(Error::InvalidState(format!(
                "expected a density QOBJ, found {:?}",
                self.kind
            )));
        }
        DensityOperator::new(self.space()?, rows_to_matrix(&self.matrix)?)
    }

    pub fn to_pure(&self) -> Result<PureState<f64>> {
        if self.kind != QObjKind::Pure {
            return Err(Error::InvalidState(format!(
                "expected a pure QOBJ, found {:?}",
                self.kind
            )));
        }
        let m = rows_to_matrix(&self.matrix)?;
        let amp: CVec<f64> = if m.ncols() == 1 {
            CVec::from_column_slice(m.column(0).as_slice())
        } else if m.nrows() == 1 {
            CVec::from_fn(m.ncols(), |j, _| m[(0, j)])
        } else {
            return Err(Error::InvalidState("pure QOBJ must be a vector".into()));
        };
        PureState::new(self.space()?, amp)
    }

    /// Loads whichever state kind the file declares, as a density operator.
    pub fn to_state(&self) -> Result<DensityOperator<f64>> {
        match self.kind {
            QObjKind::Density => self.to_density(),
            QObjKind::Pure => Ok(self.to_pure()?.to_density()),
            QObjKind::Op => Err(Error::InvalidState("op QOBJ is not a state".into())),
        }
    }

    pub fn to_op(&self) -> Result<LinearOp<f64>> {
        if self.kind != QObjKind::Op {
            return Err(Error::InvalidState(format!(
                "expected an op QOBJ, found {:?}",
                self.kind
            )));
        }
        let space = self.space()?;
        LinearOp::new(space.clone(), space, rows_to_matrix(&self.matrix)?)
    }
}

/// Serialized channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChanObj {
    #[serde(rename = "in")]
    pub in_labels: Vec<(String, usize)>,
    pub out: Vec<(String, usize)>,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChanObj {
    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            in_labels: ch.in_space().systems().to_vec(),
            out: ch.out_space().systems().to_vec(),
            kraus: ch.kraus().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let in_space = LabeledSpace::new(self.in_labels.iter().map(|(l, d)| (l.clone(), *d)))?;
        let out_space = LabeledSpace::new(self.out.iter().map(|(l, d)| (l.clone(), *d)))?;
        let kraus = self
            .kraus
            .iter()
            .map(|rows| rows_to_matrix(rows))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(in_space, out_space, kraus)
    }
}

pub fn read_qobj(path: &std::path::Path) -> Result<QObj> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_channel(path: &std::path::Path) -> Result<Channel> {
    let text = std::fs::read_to_string(path)?;
    let obj: ChanObj = serde_json::from_str(&text)?;
    obj.to_channel()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;

    #[test]
    fn channel_roundtrip() {
        let ch = Channel::depolarizing(LabeledSpace::single("A", 2), 0.3).unwrap();
        let obj = ChanObj::from_channel(&ch);
        let text = serde_json::to_string(&obj).unwrap();
        let back: ChanObj = serde_json::from_str(&text).unwrap();
        let ch2 = back.to_channel().unwrap();
        assert_eq!(ch.kraus().len(), ch2.kraus().len());
        for (a, b) in ch.kraus().iter().zip(ch2.kraus().iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn density_qobj_roundtrip(seed in 0u64..1000, rank in 1usize..4) {
            let mut s = random::Sampler::new(seed);
            let space = LabeledSpace::new([("A", 2), ("B", 3)]).unwrap();
            let rho = random::random_density::<f64>(&space, rank, &mut s).unwrap();
            let obj = QObj::from_density(&rho);
            let text = serde_json::to_string(&obj).unwrap();
            let back: QObj = serde_json::from_str(&text).unwrap();
            let rho2 = back.to_density().unwrap();
            prop_assert!((rho.matrix() - rho2.matrix()).norm() < 1e-15);
            prop_assert_eq!(rho.space().labels(), rho2.space().labels());
        }

        #[test]
        fn pure_qobj_roundtrip(seed in 0u64..1000) {
            let mut s = random::Sampler::new(seed);
            let space = LabeledSpace::new([("A", 2), ("R", 2)]).unwrap();
            let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
            let obj = QObj::from_pure(&psi);
            let text = serde_json::to_string(&obj).unwrap();
            let back: QObj = serde_json::from_str(&text).unwrap();
            let psi2 = back.to_pure().unwrap();
            prop_assert!((psi.overlap(&psi2).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }
}
