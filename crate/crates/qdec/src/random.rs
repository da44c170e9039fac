//! Seeded sources of random unitaries, 2-designs, Weyl operators, random
//! states, and the operator-Chernoff experiment.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::scalar::Scalar;
use crate::tensor::{DensityOperator, LabeledSpace, LinearOp, PureState};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::sync::OnceLock;

/// Reproducible random stream: identical seed ⇒ identical sample stream.
///
/// Samplers are single-owner streams. Parallel work forks children with
/// [`Sampler::fork`]; the fork counter makes the child seeds part of the
/// parent's deterministic state.
#[derive(Clone, Debug)]
pub struct Sampler {
    seed: u64,
    fork_counter: u64,
    rng: ChaCha12Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            fork_counter: 0,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Identifier of the underlying stream algorithm.
    pub fn algorithm(&self) -> &'static str {
        "chacha12"
    }

    /// Child sampler with a sub-seed derived from this sampler's seed and
    /// fork counter. Does not consume the parent's RNG stream.
    pub fn fork(&mut self) -> Sampler {
        self.fork_counter += 1;
        Sampler::new(splitmix64(self.seed ^ splitmix64(self.fork_counter)))
    }

    /// Seed a child without constructing it (for `rayon` maps).
    pub fn fork_seed(&mut self) -> u64 {
        self.fork_counter += 1;
        splitmix64(self.seed ^ splitmix64(self.fork_counter))
    }

    pub fn gaussian<T: Scalar>(&mut self) -> T {
        // Box-Muller on the uniform stream keeps the scalar generic.
        loop {
            let u1: f64 = self.rng.gen::<f64>();
            let u2: f64 = self.rng.gen::<f64>();
            if u1 > 1e-300 {
                let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                return T::from_f(z);
            }
        }
    }

    pub fn complex_gaussian<T: Scalar>(&mut self) -> Complex<T> {
        let re: T = self.gaussian();
        let im: T = self.gaussian();
        Complex::new(re, im) * Complex::new(T::from_f(std::f64::consts::FRAC_1_SQRT_2), T::zero())
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// Complex Ginibre matrix (i.i.d. standard complex Gaussian entries).
pub fn random_matrix<T: Scalar>(rows: usize, cols: usize, sampler: &mut Sampler) -> CMat<T> {
    CMat::<T>::from_fn(rows, cols, |_, _| sampler.complex_gaussian())
}

/// Haar-random unitary via QR of a Ginibre matrix with phase-fixed diagonal.
pub fn haar_unitary<T: Scalar>(d: usize, sampler: &mut Sampler) -> CMat<T> {
    let g = random_matrix::<T>(d, d, sampler);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut phases = CMat::<T>::zeros(d, d);
    for i in 0..d {
        let rd = r[(i, i)];
        let n = linalg::cmod(rd);
        phases[(i, i)] = if n > T::from_f(1e-300) {
            rd / Complex::new(n, T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
    }
    q * phases
}

/// Haar-random unitary wrapped as an operator on `space`.
pub fn haar_unitary_op<T: Scalar>(space: &LabeledSpace, sampler: &mut Sampler) -> LinearOp<T> {
    let u = haar_unitary::<T>(space.dim(), sampler);
    LinearOp::new(space.clone(), space.clone(), u).expect("square operator")
}

/// Haar-random pure state.
pub fn random_pure<T: Scalar>(space: &LabeledSpace, sampler: &mut Sampler) -> Result<PureState<T>> {
    let g = CVec::<T>::from_fn(space.dim(), |_, _| sampler.complex_gaussian());
    PureState::normalized(space.clone(), g)
}

/// Random density operator induced by tracing a Haar-random pure state over
/// a purifier of dimension `rank`.
pub fn random_density<T: Scalar>(
    space: &LabeledSpace,
    rank: usize,
    sampler: &mut Sampler,
) -> Result<DensityOperator<T>> {
    if rank == 0 {
        return Err(Error::DimensionMismatch("rank 0 density".into()));
    }
    let purifier = space.fresh_label("#p");
    let joint = space.tensor(&LabeledSpace::single(&purifier, rank))?;
    let psi = random_pure::<T>(&joint, sampler)?;
    psi.partial_trace(&[&purifier])
}

/// Swap operator `F` on the doubled space, `F |i⟩|j⟩ = |j⟩|i⟩`.
pub fn swap_operator<T: Scalar>(d: usize) -> CMat<T> {
    let mut f = CMat::<T>::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = Complex::new(T::one(), T::zero());
        }
    }
    f
}

/// Closed form of the Haar average `∫ U⊗² M (U⊗²)† dU = αI + βF`.
///
/// Returns `(α, β, αI + βF)`; the coefficients are complex for general `M`.
/// `m` must act on a doubled space of total dimension `d²`. At `d = 1` the
/// average is `tr M` itself (I = F there).
pub fn haar_second_moment<T: Scalar>(
    m: &CMat<T>,
) -> Result<(Complex<T>, Complex<T>, CMat<T>)> {
    let dd = m.nrows();
    if m.ncols() != dd {
        return Err(Error::DimensionMismatch("second moment of non-square".into()));
    }
    let d = (dd as f64).sqrt().round() as usize;
    if d * d != dd {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dd} is not a perfect square"
        )));
    }
    let tr_m = linalg::trace(m);
    if d == 1 {
        let out = CMat::<T>::from_element(1, 1, tr_m);
        return Ok((tr_m, Complex::new(T::zero(), T::zero()), out));
    }
    let f = swap_operator::<T>(d);
    let tr_mf = linalg::trace(&(m * &f));
    let dt = T::from_u(d);
    // tr M = α d² + β d ; tr[MF] = α d + β d²
    let det = Complex::new(dt * dt * dt * dt - dt * dt, T::zero()); // d⁴ - d²
    let d1 = Complex::new(dt, T::zero());
    let d2 = Complex::new(dt * dt, T::zero());
    let alpha = (tr_m * d2 - tr_mf * d1) / det;
    let beta = (tr_mf * d2 - tr_m * d1) / det;
    let mut out = f * beta;
    for i in 0..dd {
        out[(i, i)] += alpha;
    }
    Ok((alpha, beta, out))
}

/// Monte-Carlo average of `U⊗² M (U⊗²)†` with `n` sampled unitaries from
/// `draw`, together with the entrywise standard error of the mean.
pub fn second_moment_mc<T: Scalar>(
    m: &CMat<T>,
    d: usize,
    n: usize,
    mut draw: impl FnMut() -> CMat<T>,
) -> (CMat<T>, CMat<T>) {
    let dd = d * d;
    let mut sum = CMat::<T>::zeros(dd, dd);
    let mut sum_sq = nalgebra::DMatrix::<T>::zeros(dd, dd);
    for _ in 0..n {
        let u = draw();
        let u2 = linalg::kron(&u, &u);
        let x = &u2 * m * u2.adjoint();
        for i in 0..dd {
            for j in 0..dd {
                sum[(i, j)] += x[(i, j)];
                sum_sq[(i, j)] += x[(i, j)].norm_sqr();
            }
        }
    }
    let nt = T::from_u(n);
    let mean = sum / Complex::new(nt, T::zero());
    // entrywise std of the mean: sqrt(Var/n) on |entry|
    let sem = nalgebra::DMatrix::<T>::from_fn(dd, dd, |i, j| {
        let var = (sum_sq[(i, j)] / nt - mean[(i, j)].norm_sqr()).max(T::zero());
        (var / nt).sqrt()
    });
    let sem_c = CMat::<T>::from_fn(dd, dd, |i, j| Complex::new(sem[(i, j)], T::zero()));
    (mean, sem_c)
}

// ---------------------------------------------------------------------------
// Clifford groups
// ---------------------------------------------------------------------------

fn c64(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn gate_h() -> CMat<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c64(s, 0.0), c64(s, 0.0), c64(s, 0.0), c64(-s, 0.0)])
}

fn gate_s() -> CMat<f64> {
    CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0)])
}

fn gate_cnot(control_first: bool) -> CMat<f64> {
    let mut m = CMat::zeros(4, 4);
    for c in 0..2 {
        for t in 0..2 {
            let (i, o) = if control_first {
                (c * 2 + t, c * 2 + (t ^ c))
            } else {
                (t * 2 + c, (t ^ c) * 2 + c)
            };
            m[(o, i)] = c64(1.0, 0.0);
        }
    }
    m
}

/// Canonicalize a matrix modulo global phase and round for hashing.
fn phase_canonical_key(m: &CMat<f64>) -> Vec<(i64, i64)> {
    let mut phase = c64(1.0, 0.0);
    for v in m.iter() {
        if v.norm() > 1e-6 {
            phase = v / v.norm();
            break;
        }
    }
    let inv = phase.conj();
    m.iter()
        .map(|v| {
            let w = v * inv;
            ((w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64)
        })
        .collect()
}

fn clifford_generators(n_qubits: usize) -> Vec<CMat<f64>> {
    match n_qubits {
        1 => vec![gate_h(), gate_s()],
        2 => {
            let id = linalg::identity::<f64>(2);
            vec![
                linalg::kron(&gate_h(), &id),
                linalg::kron(&id, &gate_h()),
                linalg::kron(&gate_s(), &id),
                linalg::kron(&id, &gate_s()),
                gate_cnot(true),
                gate_cnot(false),
            ]
        }
        _ => Vec::new(),
    }
}

fn enumerate_clifford(n_qubits: usize) -> Vec<CMat<f64>> {
    use std::collections::HashMap;
    let gens = clifford_generators(n_qubits);
    let d = 1usize << n_qubits;
    let id = linalg::identity::<f64>(d);
    let mut seen: HashMap<Vec<(i64, i64)>, usize> = HashMap::new();
    let mut elements = vec![id.clone()];
    seen.insert(phase_canonical_key(&id), 0);
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for e in &frontier {
            for g in &gens {
                let prod = g * e;
                let key = phase_canonical_key(&prod);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                    e.insert(elements.len());
                    elements.push(prod.clone());
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    elements
}

static CLIFFORD_1: OnceLock<Vec<CMat<f64>>> = OnceLock::new();
static CLIFFORD_2: OnceLock<Vec<CMat<f64>>> = OnceLock::new();

/// Full Clifford group modulo phase: 24 single-qubit elements, 11520
/// two-qubit elements, enumerated by closure over the gate generators.
pub fn clifford_group(n_qubits: usize) -> Result<&'static Vec<CMat<f64>>> {
    match n_qubits {
        1 => Ok(CLIFFORD_1.get_or_init(|| enumerate_clifford(1))),
        2 => Ok(CLIFFORD_2.get_or_init(|| enumerate_clifford(2))),
        _ => Err(Error::Unsupported(format!(
            "clifford sampling limited to 1 or 2 qubits, got {n_qubits}"
        ))),
    }
}

/// Random Clifford element. One qubit draws uniformly from the enumerated
/// 24-element group; two qubits multiply out a random word of length 40 in
/// the generators {H, S, CNOT} (both qubit placements), whose 2-design
/// quality is verified by the moment test rather than assumed.
pub fn clifford_sample(n_qubits: usize, sampler: &mut Sampler) -> Result<CMat<f64>> {
    match n_qubits {
        1 => {
            let group = clifford_group(1)?;
            Ok(group[sampler.below(group.len())].clone())
        }
        2 => {
            let gens = clifford_generators(2);
            let mut u = linalg::identity::<f64>(4);
            for _ in 0..40 {
                u = &gens[sampler.below(gens.len())] * u;
            }
            Ok(u)
        }
        _ => Err(Error::Unsupported(format!(
            "clifford sampling limited to 1 or 2 qubits, got {n_qubits}"
        ))),
    }
}

/// Exact average of `U⊗² M (U⊗²)†` over the full Clifford group.
pub fn clifford_second_moment(m: &CMat<f64>, n_qubits: usize) -> Result<CMat<f64>> {
    let group = clifford_group(n_qubits)?;
    let dd = m.nrows();
    let mut sum = CMat::<f64>::zeros(dd, dd);
    for u in group.iter() {
        let u2 = linalg::kron(u, u);
        sum += &u2 * m * u2.adjoint();
    }
    Ok(sum / c64(group.len() as f64, 0.0))
}

// ---------------------------------------------------------------------------
// Weyl operators
// ---------------------------------------------------------------------------

/// The `d²` Weyl (generalized Pauli) unitaries `X^a Z^b`, with the identity
/// first. Pairwise trace-orthogonal: `tr[U_i† U_j] = d·δ_ij`.
pub fn weyl_operators<T: Scalar>(d: usize) -> Vec<CMat<T>> {
    let mut out = Vec::with_capacity(d * d);
    let two_pi = T::from_f(2.0 * std::f64::consts::PI);
    for a in 0..d {
        for b in 0..d {
            let mut m = CMat::<T>::zeros(d, d);
            for j in 0..d {
                // X^a Z^b |j⟩ = ω^{jb} |j+a⟩
                let angle = two_pi * T::from_u(j * b) / T::from_u(d);
                m[((j + a) % d, j)] = Complex::new(angle.cos(), angle.sin());
            }
            out.push(m);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Operator-Chernoff experiment
// ---------------------------------------------------------------------------

/// A rank-one measurement ensemble: unit vectors with weights summing to the
/// space dimension (`Σ w_x |ψ_x⟩⟨ψ_x| = I` for a complete measurement).
pub struct MeasurementEnsemble<T: Scalar> {
    pub weights: Vec<T>,
    pub vectors: Vec<CVec<T>>,
    pub dim: usize,
}

impl<T: Scalar> MeasurementEnsemble<T> {
    /// Ensemble of an orthonormal-basis measurement (columns of `basis`).
    pub fn from_basis(basis: &CMat<T>) -> Self {
        let d = basis.nrows();
        Self {
            weights: vec![T::one(); d],
            vectors: (0..d)
                .map(|j| CVec::<T>::from_column_slice(basis.column(j).as_slice()))
                .collect(),
            dim: d,
        }
    }

    /// Haar-random rank-one ensemble with `n` outcomes (weights uniform
    /// d/n), drawn from unitary columns; complete exactly when `d` divides
    /// `n`.
    pub fn random(d: usize, n: usize, sampler: &mut Sampler) -> Self {
        let mut vectors = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut produced = 0usize;
        while produced < n {
            let u = haar_unitary::<T>(d, sampler);
            for j in 0..d {
                if produced >= n {
                    break;
                }
                vectors.push(CVec::<T>::from_column_slice(u.column(j).as_slice()));
                weights.push(T::from_u(d) / T::from_u(n));
                produced += 1;
            }
        }
        Self {
            weights,
            vectors,
            dim: d,
        }
    }
}

/// Checks the quasi-measurement operator inequality
/// `(|C|/n) Σ_x |ψ_x⟩⟨ψ_x| ≤ k·I` by an eigenvalue test (tolerance 1e-8).
pub fn quasi_check<T: Scalar>(vectors: &[CVec<T>], dim: usize, k: T) -> bool {
    let n = vectors.len();
    let mut s = CMat::<T>::zeros(dim, dim);
    for v in vectors {
        for i in 0..dim {
            for j in 0..dim {
                s[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    s *= Complex::new(T::from_u(dim) / T::from_u(n), T::zero());
    let lmax = linalg::largest_eigval(&s);
    lmax <= k + T::from_f(1e-8)
}

pub struct ChernoffOutcome<T: Scalar> {
    pub violation_rate: T,
    pub analytic_bound: T,
    pub trials: usize,
}

/// Samples `trials` batches of `n` i.i.d. measurement vectors (drawn from the
/// ensemble with probability `w_x/|C|`) and reports how often the batch fails
/// to be an `(n,k)`-quasi-measurement, against the operator-Chernoff tail
/// `2|C| exp(−n(k−1)²/(|C|·2·ln2))`.
pub fn chernoff_experiment<T: Scalar>(
    ensemble: &MeasurementEnsemble<T>,
    n: usize,
    k: T,
    trials: usize,
    sampler: &mut Sampler,
) -> ChernoffOutcome<T> {
    let d = ensemble.dim;
    // cumulative distribution over outcomes
    let total: T = ensemble.weights.iter().fold(T::zero(), |a, &w| a + w);
    let mut violations = 0usize;
    for _ in 0..trials {
        let mut batch = Vec::with_capacity(n);
        for _ in 0..n {
            let mut r = T::from_f(sampler.uniform()) * total;
            let mut idx = 0usize;
            for (i, &w) in ensemble.weights.iter().enumerate() {
                if r <= w {
                    idx = i;
                    break;
                }
                r -= w;
                idx = i;
            }
            batch.push(ensemble.vectors[idx].clone());
        }
        if !quasi_check(&batch, d, k) {
            violations += 1;
        }
    }
    let dc = d as f64;
    let kf = k.to_f64();
    let bound = 2.0 * dc * (-(n as f64) * (kf - 1.0) * (kf - 1.0) / (dc * 2.0 * std::f64::consts::LN_2)).exp();
    ChernoffOutcome {
        violation_rate: T::from_u(violations) / T::from_u(trials),
        analytic_bound: T::from_f(bound.min(1e18)),
        trials,
    }
}
