//! CPTP maps as first-class objects with Stinespring dilations, complementary
//! channels, and Choi states.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::random::{haar_unitary, Sampler};
use crate::tensor::{
    maximally_entangled, trace_distance, DensityOperator, LabeledSpace, LinearOp, PureState,
};
use num_complex::Complex;

type C64 = Complex<f64>;

/// Completely positive map stored as a Kraus set.
///
/// Trace preservation is checked at construction for [`Channel::new`]; the
/// decoupling experiments also accept general CP maps built with
/// [`Channel::new_cp`] (the decoupling bound does not need TP).
#[derive(Clone, Debug)]
pub struct Channel {
    in_space: LabeledSpace,
    out_space: LabeledSpace,
    kraus: Vec<CMat<f64>>,
    trace_preserving: bool,
    /// Exact Lipschitz-style constant `max ‖T(X)‖₁ / ‖X‖₁` when structurally
    /// known (trace-out channels have 1); `None` means use the generic bound.
    known_k: Option<f64>,
}

pub struct ChannelDiagnostics {
    pub tp_deviation: f64,
    pub choi_hermiticity: f64,
    pub kraus_count: usize,
    pub trace_preserving: bool,
}

impl Channel {
    pub const TP_TOL: f64 = 1e-9;

    pub fn new(
        in_space: LabeledSpace,
        out_space: LabeledSpace,
        kraus: Vec<CMat<f64>>,
    ) -> Result<Self> {
        let ch = Self::new_cp(in_space, out_space, kraus)?;
        let dev = ch.tp_deviation();
        if dev > Self::TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self {
            trace_preserving: true,
            ..ch
        })
    }

    /// General CP map; no trace-preservation requirement.
    pub fn new_cp(
        in_space: LabeledSpace,
        out_space: LabeledSpace,
        kraus: Vec<CMat<f64>>,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus set".into()));
        }
        for k in &kraus {
            if k.nrows() != out_space.dim() || k.ncols() != in_space.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {}x{} vs spaces {} -> {}",
                    k.nrows(),
                    k.ncols(),
                    in_space.dim(),
                    out_space.dim()
                )));
            }
        }
        Ok(Self {
            in_space,
            out_space,
            kraus,
            trace_preserving: false,
            known_k: None,
        })
    }

    /// Identity channel on `space`.
    pub fn identity(space: LabeledSpace) -> Self {
        let d = space.dim();
        Self {
            in_space: space.clone(),
            out_space: space,
            kraus: vec![linalg::identity::<f64>(d)],
            trace_preserving: true,
            known_k: Some(1.0),
        }
    }

    /// Identity channel that renames its system.
    pub fn relabel(in_space: LabeledSpace, out_space: LabeledSpace) -> Result<Self> {
        if in_space.dim() != out_space.dim() {
            return Err(Error::DimensionMismatch("relabel dimensions".into()));
        }
        let d = in_space.dim();
        Ok(Self {
            in_space,
            out_space,
            kraus: vec![linalg::identity::<f64>(d)],
            trace_preserving: true,
            known_k: Some(1.0),
        })
    }

    /// Partial-trace channel dropping `drop` from `space`.
    pub fn trace_out(space: &LabeledSpace, drop: &[&str]) -> Result<Self> {
        let keep = space.without(drop)?;
        let drop_space = space.restrict(drop)?;
        let dk = keep.dim();
        let dd = drop_space.dim();
        // Kraus: ⟨e|_drop in the grouped order [keep..., drop...]
        let mut grouped = keep.labels();
        grouped.extend(drop_space.labels());
        let order = space.order_of(&grouped)?;
        let map = space.permutation_map(&order);
        let mut kraus = Vec::with_capacity(dd);
        for e in 0..dd {
            let mut k = CMat::<f64>::zeros(dk, space.dim());
            for (orig, &g) in map.iter().enumerate() {
                if g % dd == e {
                    k[(g / dd, orig)] = C64::new(1.0, 0.0);
                }
            }
            kraus.push(k);
        }
        Ok(Self {
            in_space: space.clone(),
            out_space: keep,
            kraus,
            trace_preserving: true,
            known_k: Some(1.0),
        })
    }

    /// Conjugation by a fixed operator, scaled: `ξ ↦ s·VξV†`.
    pub fn conjugation(v: &LinearOp<f64>, scale: f64) -> Self {
        let k = v.matrix() * C64::new(scale.sqrt(), 0.0);
        Self {
            in_space: v.in_space().clone(),
            out_space: v.out_space().clone(),
            kraus: vec![k],
            trace_preserving: false,
            known_k: None,
        }
    }

    /// Depolarizing channel `ρ ↦ (1−p)ρ + p·π` on `space` (any dimension).
    pub fn depolarizing(space: LabeledSpace, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("probability {p}")));
        }
        let d = space.dim();
        let ws = crate::random::weyl_operators::<f64>(d);
        // Weyl twirl is exact depolarization
        let mut kraus = Vec::with_capacity(d * d);
        for (i, w) in ws.into_iter().enumerate() {
            let weight = if i == 0 {
                (1.0 - p + p / ((d * d) as f64)).sqrt()
            } else {
                (p / ((d * d) as f64)).sqrt()
            };
            kraus.push(w * C64::new(weight, 0.0));
        }
        Self::new(space.clone(), space, kraus)
    }

    /// Qubit dephasing channel; `p = 1` gives Kraus `{√½·I, √½·Z}`.
    pub fn dephasing(space: LabeledSpace, p: f64) -> Result<Self> {
        if space.dim() != 2 {
            return Err(Error::Unsupported("dephasing is a qubit channel".into()));
        }
        let id = linalg::identity::<f64>(2) * C64::new((1.0 - p / 2.0).sqrt(), 0.0);
        let mut z = CMat::<f64>::zeros(2, 2);
        z[(0, 0)] = C64::new(1.0, 0.0);
        z[(1, 1)] = C64::new(-1.0, 0.0);
        let z = z * C64::new((p / 2.0).sqrt(), 0.0);
        Self::new(space.clone(), space, vec![id, z])
    }

    pub fn in_space(&self) -> &LabeledSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &LabeledSpace {
        &self.out_space
    }

    pub fn kraus(&self) -> &[CMat<f64>] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn tp_deviation(&self) -> f64 {
        let d = self.in_space.dim();
        let mut sum = CMat::<f64>::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        (sum - linalg::identity::<f64>(d)).norm()
    }

    /// TP and Choi-Hermiticity diagnostics.
    pub fn validate(&self) -> Result<ChannelDiagnostics> {
        let tp_deviation = self.tp_deviation();
        if self.trace_preserving && tp_deviation > Self::TP_TOL {
            return Err(Error::NotTracePreserving(tp_deviation));
        }
        let choi = self.choi_state()?;
        let m = choi.matrix();
        let choi_hermiticity = (m - m.adjoint()).norm();
        Ok(ChannelDiagnostics {
            tp_deviation,
            choi_hermiticity,
            kraus_count: self.kraus.len(),
            trace_preserving: tp_deviation <= Self::TP_TOL,
        })
    }

    /// Stinespring dilation `U: in → out ⊗ E` with `|E|` = Kraus count.
    pub fn stinespring(&self, env_label: &str) -> Result<LinearOp<f64>> {
        if self.out_space.has(env_label) {
            return Err(Error::LabelCollision(env_label.to_string()));
        }
        let ne = self.kraus.len();
        let din = self.in_space.dim();
        let dout = self.out_space.dim();
        let env = LabeledSpace::single(env_label, ne);
        let out = self.out_space.tensor(&env)?;
        let mut mat = CMat::<f64>::zeros(dout * ne, din);
        for (i, k) in self.kraus.iter().enumerate() {
            for r in 0..dout {
                for c in 0..din {
                    mat[(r * ne + i, c)] = k[(r, c)];
                }
            }
        }
        LinearOp::new(self.in_space.clone(), out, mat)
    }

    /// Complementary channel `in → E` (trace the Stinespring output over the
    /// channel output).
    pub fn complementary(&self, env_label: &str) -> Result<Channel> {
        let ne = self.kraus.len();
        let din = self.in_space.dim();
        let dout = self.out_space.dim();
        let env = LabeledSpace::single(env_label, ne);
        // Kraus of the complement: K_j[i, a] = N_i[j, a] for each output j
        let mut kraus = Vec::with_capacity(dout);
        for j in 0..dout {
            let mut k = CMat::<f64>::zeros(ne, din);
            for (i, n) in self.kraus.iter().enumerate() {
                for a in 0..din {
                    k[(i, a)] = n[(j, a)];
                }
            }
            kraus.push(k);
        }
        Ok(Channel {
            in_space: self.in_space.clone(),
            out_space: env,
            kraus,
            trace_preserving: self.trace_preserving,
            known_k: None,
        })
    }

    /// Applies the channel to a density operator, acting as identity on
    /// labels it does not mention.
    pub fn apply(&self, rho: &DensityOperator<f64>) -> Result<DensityOperator<f64>> {
        let mut acc: Option<(CMat<f64>, LabeledSpace)> = None;
        for k in &self.kraus {
            let op = LinearOp::new(self.in_space.clone(), self.out_space.clone(), k.clone())?;
            let (full, space) = op.embedded(rho.space())?;
            let term = &full * rho.matrix() * full.adjoint();
            match &mut acc {
                None => acc = Some((term, space)),
                Some((m, _)) => *m += term,
            }
        }
        let (mat, space) = acc.expect("nonempty Kraus set");
        Ok(DensityOperator::from_parts_unchecked(space, mat))
    }

    /// Applies to a pure state (returns the generally mixed output).
    pub fn apply_to_pure(&self, psi: &PureState<f64>) -> Result<DensityOperator<f64>> {
        self.apply(&psi.to_density())
    }

    /// Choi state `ω = (T ⊗ I)(Φ)` with an auto-derived mirror label;
    /// output space is `[out..., mirror]`.
    pub fn choi_state(&self) -> Result<DensityOperator<f64>> {
        let mirror = self
            .out_space
            .fresh_label(&format!("{}*", self.in_space.labels().join("")));
        self.choi_state_with(&mirror)
    }

    pub fn choi_state_with(&self, mirror_label: &str) -> Result<DensityOperator<f64>> {
        let din = self.in_space.dim();
        let phi = maximally_entangled::<f64>("#in", mirror_label, din)?;
        // view the #in factor as the channel's (possibly composite) input space
        let space = self
            .in_space
            .tensor(&LabeledSpace::single(mirror_label, din))?;
        let phi = PureState::new(space, phi.amplitudes().clone())?;
        self.apply(&phi.to_density())
    }

    /// Tensor product of two channels on disjoint labels.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let in_space = self.in_space.tensor(&other.in_space)?;
        let out_space = self.out_space.tensor(&other.out_space)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        Ok(Channel {
            in_space,
            out_space,
            kraus,
            trace_preserving: self.trace_preserving && other.trace_preserving,
            known_k: match (self.known_k, other.known_k) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
        })
    }

    /// Upper bound on `max ‖T(X)‖₁ / ‖X‖₁` over Hermitian `X`: exact for
    /// trace-out-style channels (1), `Σ‖N_i‖∞²` otherwise.
    pub fn lipschitz_k(&self) -> f64 {
        if let Some(k) = self.known_k {
            return k;
        }
        if self.trace_preserving {
            return 1.0;
        }
        self.kraus
            .iter()
            .map(|k| {
                let s = linalg::op_norm_inf(k);
                s * s
            })
            .sum()
    }
}

/// Lower bound on the diamond-norm distance `‖N₁ − N₂‖⋄` by alternating
/// maximization over pure inputs `σ^{AA'}`: the output trace distance is the
/// Helstrom value for the current input, and the input is improved by random
/// local rotations with accept-on-improvement.
pub fn diamond_lower_bound(
    n1: &Channel,
    n2: &Channel,
    restarts: usize,
    iterations: usize,
    sampler: &mut Sampler,
) -> Result<f64> {
    if n1.in_space().dim() != n2.in_space().dim() || n1.out_space().dim() != n2.out_space().dim() {
        return Err(Error::DimensionMismatch("diamond bound spaces".into()));
    }
    let d = n1.in_space().dim();
    let a_label = "#a";
    let in_space = LabeledSpace::single(a_label, d).tensor(&LabeledSpace::single("#a'", d))?;
    let host = |ch: &Channel| -> Result<Channel> {
        let mut hosted = Channel::new_cp(
            LabeledSpace::single(a_label, d),
            LabeledSpace::single("#c", ch.out_space().dim()),
            ch.kraus().to_vec(),
        )?;
        hosted.trace_preserving = ch.trace_preserving;
        Ok(hosted)
    };
    let h1 = host(n1)?;
    let h2 = host(n2)?;
    let objective = |psi: &PureState<f64>| -> Result<f64> {
        let o1 = h1.apply_to_pure(psi)?;
        let o2 = h2.apply_to_pure(psi)?;
        trace_distance(&o1, &o2)
    };

    let mut best = 0.0f64;
    for r in 0..restarts {
        // structured starts first: |00⟩ and Φ
        let mut psi = match r {
            0 => PureState::basis_state(in_space.clone(), 0)?,
            1 => {
                let phi = maximally_entangled::<f64>(a_label, "#a'", d)?;
                PureState::new(in_space.clone(), phi.amplitudes().clone())?
            }
            _ => crate::random::random_pure(&in_space, sampler)?,
        };
        let mut val = objective(&psi)?;
        let mut step = 0.5f64;
        for _ in 0..iterations {
            let g = haar_unitary::<f64>(2, sampler);
            let i = sampler.below(d * d);
            let mut j = sampler.below(d * d);
            if i == j {
                j = (j + 1) % (d * d);
            }
            let mut amp = psi.amplitudes().clone();
            let (ai, aj) = (amp[i], amp[j]);
            let phase = {
                let z = g[(0, 1)];
                let n = z.norm();
                if n > 1e-12 {
                    z / C64::new(n, 0.0)
                } else {
                    C64::new(1.0, 0.0)
                }
            };
            let c = C64::new(step.cos(), 0.0);
            let s = C64::new(step.sin(), 0.0) * phase;
            amp[i] = c * ai + s * aj;
            amp[j] = -s.conj() * ai + c * aj;
            if let Ok(cand) = PureState::normalized(in_space.clone(), amp) {
                let v = objective(&cand)?;
                if v > val {
                    val = v;
                    psi = cand;
                } else {
                    step *= 0.995;
                }
            }
        }
        best = best.max(val);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn qubit(l: &str) -> LabeledSpace {
        LabeledSpace::single(l, 2)
    }

    fn pauli(which: usize) -> CMat<f64> {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        match which {
            0 => CMat::from_row_slice(2, 2, &[o, z, z, o]),
            1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
            2 => CMat::from_row_slice(2, 2, &[z, -C64::i(), C64::i(), z]),
            _ => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    #[test]
    fn identity_channel_is_valid() {
        let ch = Channel::identity(qubit("A"));
        let diag = ch.validate().unwrap();
        assert!(diag.trace_preserving);
        assert!(diag.tp_deviation < 1e-12);
    }

    #[test]
    fn half_identity_kraus_rejected() {
        let k = linalg::identity::<f64>(2) * C64::new(0.5, 0.0);
        let err = Channel::new(qubit("A"), qubit("A"), vec![k]);
        assert!(matches!(err, Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn random_isometry_conjugation_is_valid() {
        let mut s = random::Sampler::new(50);
        let u = random::haar_unitary::<f64>(4, &mut s);
        let v = u.columns(0, 2).into_owned();
        let ch = Channel::new(qubit("A"), LabeledSpace::single("C", 4), vec![v]).unwrap();
        assert!(ch.validate().unwrap().trace_preserving);
    }

    #[test]
    fn stinespring_of_identity() {
        let ch = Channel::identity(qubit("A"));
        let u = ch.stinespring("E").unwrap();
        u.assert_partial_isometry().unwrap();
        assert_eq!(u.out_space().dim_of("E").unwrap(), 1);
        let comp = ch.complementary("E").unwrap();
        let mut s = random::Sampler::new(51);
        let rho = random::random_density::<f64>(&qubit("A"), 2, &mut s).unwrap();
        let out = comp.apply(&rho).unwrap();
        assert_eq!(out.dim(), 1);
        assert!((out.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stinespring_recovers_channel_and_complement() {
        let mut s = random::Sampler::new(52);
        let ch = Channel::depolarizing(qubit("A"), 0.37).unwrap();
        let u = ch.stinespring("E").unwrap();
        u.assert_partial_isometry().unwrap();
        let rho = random::random_density::<f64>(&qubit("A"), 2, &mut s).unwrap();
        let dilated = u.conjugate_density(&rho).unwrap();
        let via_dilation = dilated.partial_trace(&["E"]).unwrap();
        let direct = ch.apply(&rho).unwrap();
        assert!((via_dilation.matrix() - direct.matrix()).norm() < 1e-9);
        let comp = ch.complementary("E").unwrap();
        let via_dilation_e = dilated.partial_trace(&["A"]).unwrap();
        let direct_e = comp.apply(&rho).unwrap();
        assert!((via_dilation_e.matrix() - direct_e.matrix()).norm() < 1e-9);
    }

    #[test]
    fn fully_depolarizing_complement_entropy_matches_output_entropy() {
        // 4 Pauli Kraus at weight 1/2 each: |E| = 4, and since the dilated
        // state of a pure input is pure on CE, H(E) = H(C) = H(π) = 1
        let kraus: Vec<CMat<f64>> = (0..4).map(|i| pauli(i) * C64::new(0.5, 0.0)).collect();
        let ch = Channel::new(qubit("A"), qubit("A"), kraus).unwrap();
        let comp = ch.complementary("E").unwrap();
        assert_eq!(comp.out_space().dim(), 4);
        let psi = PureState::<f64>::basis_state(qubit("A"), 0).unwrap();
        let out = comp.apply_to_pure(&psi).unwrap();
        let h = crate::entropy::von_neumann_of(&out);
        let h_c = crate::entropy::von_neumann_of(&ch.apply_to_pure(&psi).unwrap());
        assert!((h - h_c).abs() < 1e-9, "H(E) {h} vs H(C) {h_c}");
        assert!((h - 1.0).abs() < 1e-9, "complement entropy {h}");
    }

    #[test]
    fn dephasing_complement_output_is_diagonal() {
        // dephasing in its projector-Kraus representation {|0⟩⟨0|, |1⟩⟨1|};
        // the environment then records the basis index so the complement
        // output is diagonal
        let mut p0 = CMat::<f64>::zeros(2, 2);
        p0[(0, 0)] = C64::new(1.0, 0.0);
        let mut p1 = CMat::<f64>::zeros(2, 2);
        p1[(1, 1)] = C64::new(1.0, 0.0);
        let ch = Channel::new(qubit("A"), qubit("A"), vec![p0, p1]).unwrap();
        let mut s = random::Sampler::new(53);
        let psi = random::random_pure::<f64>(&qubit("A"), &mut s).unwrap();
        let comp = ch.complementary("E").unwrap();
        let out = comp.apply_to_pure(&psi).unwrap();
        let m = out.matrix();
        assert!(m[(0, 1)].norm() < 1e-10 && m[(1, 0)].norm() < 1e-10);
        // {√½I, √½Z} generates the same channel, complement equivalent up to
        // an isometry on E (equal Choi spectra)
        let zch = Channel::dephasing(qubit("A"), 1.0).unwrap();
        let mut s1: Vec<f64> = ch.complementary("E").unwrap().choi_state().unwrap().eigenvalues();
        let mut s2: Vec<f64> = zch.complementary("E").unwrap().choi_state().unwrap().eigenvalues();
        s1.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s2.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in s1.iter().zip(s2.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn apply_acts_as_identity_on_other_labels() {
        let mut s = random::Sampler::new(54);
        let space = LabeledSpace::new([("R", 2), ("A", 2)]).unwrap();
        let rho = random::random_density::<f64>(&space, 3, &mut s).unwrap();
        let ch = Channel::identity(qubit("A"));
        let out = ch.apply(&rho).unwrap();
        assert!((out.matrix() - rho.matrix()).norm() < 1e-12);
        let dep = Channel::depolarizing(qubit("A"), 1.0).unwrap();
        let out = dep.apply(&rho).unwrap();
        let r_before = rho.marginal(&["R"]).unwrap();
        let r_after = out.marginal(&["R"]).unwrap();
        assert!((r_before.matrix() - r_after.matrix()).norm() < 1e-10);
        assert!((out.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kraus_sum_oracle_matches_apply() {
        let mut s = random::Sampler::new(55);
        let ch = Channel::depolarizing(qubit("A"), 0.3).unwrap();
        let rho = random::random_density::<f64>(&qubit("A"), 2, &mut s).unwrap();
        let direct = ch.apply(&rho).unwrap();
        let mut acc = CMat::<f64>::zeros(2, 2);
        for k in ch.kraus() {
            acc += k * rho.matrix() * k.adjoint();
        }
        assert!((direct.matrix() - &acc).norm() < 1e-12);
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let ch = Channel::identity(qubit("A"));
        let choi = ch.choi_state().unwrap();
        assert!((choi.purity() - 1.0).abs() < 1e-10);
        assert!((choi.trace() - 1.0).abs() < 1e-10);
        let marg = choi.partial_trace(&["A"]).unwrap();
        assert!((marg.matrix()
            - DensityOperator::<f64>::maximally_mixed(marg.space().clone()).matrix())
        .norm()
            < 1e-10);
    }

    #[test]
    fn choi_of_trace_out_has_expected_purity() {
        // tr[ω²] = 1/|A₂| for the channel tracing out A₂ of A = A₁A₂
        let space = LabeledSpace::new([("A1", 2), ("A2", 4)]).unwrap();
        let ch = Channel::trace_out(&space, &["A2"]).unwrap();
        let choi = ch.choi_state().unwrap();
        assert!((choi.trace() - 1.0).abs() < 1e-10);
        assert!((choi.purity() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn choi_matches_direct_formula_on_random_channel() {
        let mut s = random::Sampler::new(56);
        let u = random::haar_unitary::<f64>(8, &mut s);
        // random channel qubit -> qubit with 4-dim environment
        let kraus: Vec<CMat<f64>> = (0..4)
            .map(|e| CMat::from_fn(2, 2, |r, c| u[(r * 4 + e, c)]))
            .collect();
        let ch = Channel::new(qubit("A"), qubit("C"), kraus.clone()).unwrap();
        let choi = ch.choi_state_with("M").unwrap();
        // direct: (1/d) Σ_ij N|i⟩⟨j|N† ⊗ |i⟩⟨j|
        let mut direct = CMat::<f64>::zeros(4, 4);
        for k in &kraus {
            for i in 0..2 {
                for j in 0..2 {
                    for r in 0..2 {
                        for c in 0..2 {
                            direct[(r * 2 + i, c * 2 + j)] += k[(r, i)] * k[(c, j)].conj() * 0.5;
                        }
                    }
                }
            }
        }
        let perm = choi.permuted(&["C", "M"]).unwrap();
        assert!((perm.matrix() - &direct).norm() < 1e-10);
    }

    #[test]
    fn complement_of_complement_preserves_choi_spectrum() {
        let ch = Channel::dephasing(qubit("A"), 0.7).unwrap();
        let comp2 = ch.complementary("E").unwrap().complementary("C2").unwrap();
        let mut s1: Vec<f64> = ch.choi_state().unwrap().eigenvalues();
        let mut s2: Vec<f64> = comp2.choi_state().unwrap().eigenvalues();
        s1.retain(|x| x.abs() > 1e-10);
        s2.retain(|x| x.abs() > 1e-10);
        s1.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s2.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(s1.len(), s2.len());
        for (a, b) in s1.iter().zip(s2.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn diamond_bound_same_channel_is_zero() {
        let ch = Channel::depolarizing(qubit("A"), 0.4).unwrap();
        let mut s = random::Sampler::new(57);
        let v = diamond_lower_bound(&ch, &ch, 2, 50, &mut s).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn diamond_bound_identity_vs_bitflip_is_two() {
        let id = Channel::identity(qubit("A"));
        let flip = Channel::new(qubit("A"), qubit("A"), vec![pauli(1)]).unwrap();
        let mut s = random::Sampler::new(58);
        let v = diamond_lower_bound(&id, &flip, 4, 200, &mut s).unwrap();
        assert!(v > 2.0 - 1e-9, "bound {v}");
    }

    #[test]
    fn diamond_bound_identity_vs_depolarizing_matches_dense_search() {
        let id = Channel::identity(qubit("A"));
        let dep = Channel::depolarizing(qubit("A"), 0.5).unwrap();
        let mut s = random::Sampler::new(59);
        let v = diamond_lower_bound(&id, &dep, 6, 400, &mut s).unwrap();
        // dense random-input oracle
        let space = LabeledSpace::new([("#a", 2), ("#a'", 2)]).unwrap();
        let h_dep = Channel::new_cp(
            LabeledSpace::single("#a", 2),
            LabeledSpace::single("#c", 2),
            dep.kraus().to_vec(),
        )
        .unwrap();
        let h_id = Channel::new_cp(
            LabeledSpace::single("#a", 2),
            LabeledSpace::single("#c", 2),
            id.kraus().to_vec(),
        )
        .unwrap();
        let mut oracle = 0.0f64;
        for _ in 0..20_000 {
            let psi = random::random_pure::<f64>(&space, &mut s).unwrap();
            let d = trace_distance(
                &h_id.apply_to_pure(&psi).unwrap(),
                &h_dep.apply_to_pure(&psi).unwrap(),
            )
            .unwrap();
            oracle = oracle.max(d);
        }
        assert!(v >= oracle - 5e-3, "search {v} vs oracle {oracle}");
    }
}
