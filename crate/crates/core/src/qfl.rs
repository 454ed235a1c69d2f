//! Toy quantum federated learning.
//!
//! A parameterized circuit on at most [`MAX_PQC_QUBITS`] qubits is simulated
//! exactly; shot noise is modelled by sampling the readout qubit. Devices
//! run local SGD with parameter-shift gradients and a server averages the
//! resulting parameter vectors. The bound calculators at the end of the
//! module are diagnostics and take their constants as inputs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use rand_core::RngCore;

use crate::math::{self, PI};
use crate::rng::{self, Rng};
use crate::{Error, Result};

pub const MAX_PQC_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// `exp(-i θ[param] / 2 · σ_axis)` on `qubit`.
    Rot { axis: Axis, qubit: usize, param: usize },
    /// `RY(x[feature])` on `qubit`; angle encoding of an input feature.
    Encode { qubit: usize, feature: usize },
    Cz(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PqcCircuit {
    n_qubits: usize,
    n_params: usize,
    n_features: usize,
    readout: usize,
    gates: Vec<Gate>,
}

impl PqcCircuit {
    /// Empty circuit measuring `Z` on qubit 0.
    pub fn new(n_qubits: usize, n_params: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::argument("circuit needs at least one qubit"));
        }
        if n_qubits > MAX_PQC_QUBITS {
            return Err(Error::Resource {
                what: "circuit qubits",
                requested: n_qubits as u64,
                limit: MAX_PQC_QUBITS as u64,
            });
        }
        Ok(Self {
            n_qubits,
            n_params,
            n_features: 0,
            readout: 0,
            gates: Vec::new(),
        })
    }

    pub fn with_readout(mut self, qubit: usize) -> Result<Self> {
        self.check_qubit(qubit)?;
        self.readout = qubit;
        Ok(self)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::argument(alloc::format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::Rot { qubit, param, .. } => {
                self.check_qubit(qubit)?;
                if param >= self.n_params {
                    return Err(Error::argument(alloc::format!(
                        "parameter {param} out of range for {} parameters",
                        self.n_params
                    )));
                }
            }
            Gate::Encode { qubit, feature } => {
                self.check_qubit(qubit)?;
                self.n_features = self.n_features.max(feature + 1);
            }
            Gate::Cz(a, b) => {
                self.check_qubit(a)?;
                self.check_qubit(b)?;
                if a == b {
                    return Err(Error::argument("CZ needs two distinct qubits"));
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn readout(&self) -> usize {
        self.readout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// `layers` rounds of per-qubit RY and RZ followed by a CZ ring.
    pub fn ansatz(n_qubits: usize, layers: usize) -> Result<Self> {
        let mut c = Self::new(n_qubits, 2 * n_qubits * layers)?;
        c.push_ansatz(layers, 0)?;
        Ok(c)
    }

    fn push_ansatz(&mut self, layers: usize, first_param: usize) -> Result<()> {
        let q = self.n_qubits;
        let mut p = first_param;
        for _ in 0..layers {
            for qubit in 0..q {
                for axis in [Axis::Y, Axis::Z] {
                    self.push(Gate::Rot { axis, qubit, param: p })?;
                    p += 1;
                }
            }
            if q == 2 {
                self.push(Gate::Cz(0, 1))?;
            } else if q > 2 {
                for a in 0..q {
                    self.push(Gate::Cz(a, (a + 1) % q))?;
                }
            }
        }
        Ok(())
    }

    /// Angle-encoding classifier: qubit `i` encodes feature `i % n_features`,
    /// followed by [`PqcCircuit::ansatz`].
    pub fn classifier(n_qubits: usize, layers: usize, n_features: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::argument("classifier needs at least one feature"));
        }
        let mut c = Self::new(n_qubits, 2 * n_qubits * layers)?;
        for qubit in 0..n_qubits {
            c.push(Gate::Encode {
                qubit,
                feature: qubit % n_features,
            })?;
        }
        c.n_features = c.n_features.max(n_features);
        c.push_ansatz(layers, 0)?;
        Ok(c)
    }
}

/// Random circuit in which every parameter drives exactly one rotation,
/// interleaved with random CZ gates.
pub fn random_circuit<R: RngCore + ?Sized>(n_qubits: usize, n_params: usize, rng: &mut R) -> Result<PqcCircuit> {
    let mut c = PqcCircuit::new(n_qubits, n_params)?;
    for param in 0..n_params {
        let axis = [Axis::X, Axis::Y, Axis::Z][rng::index(rng, 3)];
        c.push(Gate::Rot {
            axis,
            qubit: rng::index(rng, n_qubits),
            param,
        })?;
        if n_qubits > 1 && rng::index(rng, 3) == 0 {
            let a = rng::index(rng, n_qubits);
            let b = (a + 1 + rng::index(rng, n_qubits - 1)) % n_qubits;
            c.push(Gate::Cz(a, b))?;
        }
    }
    Ok(c)
}

/// Measurement budget per expectation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Infinite shots: the exact expectation.
    Exact,
    Finite(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("inf"),
            Shots::Finite(h) => write!(f, "{h}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" || s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(h) if h > 0 => Ok(Shots::Finite(h)),
            _ => Err(Error::argument(alloc::format!("invalid shot count `{s}`"))),
        }
    }
}

fn rotation(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    let c = math::cos(theta / 2.0);
    let s = math::sin(theta / 2.0);
    let z = Complex64::new(0.0, 0.0);
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [[Complex64::new(c, -s), z], [z, Complex64::new(c, s)]],
    }
}

fn apply_1q(state: &mut [Complex64], qubit: usize, m: &[[Complex64; 2]; 2]) {
    let bit = 1usize << qubit;
    for i in 0..state.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (a, b) = (state[i], state[j]);
            state[i] = m[0][0] * a + m[0][1] * b;
            state[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_cz(state: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in state.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

fn check_inputs(c: &PqcCircuit, theta: &[f64], x: &[f64]) -> Result<()> {
    if theta.len() != c.n_params {
        return Err(Error::argument(alloc::format!(
            "expected {} parameters, got {}",
            c.n_params,
            theta.len()
        )));
    }
    if x.len() < c.n_features {
        return Err(Error::argument(alloc::format!(
            "expected {} features, got {}",
            c.n_features,
            x.len()
        )));
    }
    Ok(())
}

/// Final statevector; `shift` adds an angle to the rotation at one gate
/// position only.
fn simulate(c: &PqcCircuit, theta: &[f64], x: &[f64], shift: Option<(usize, f64)>) -> Vec<Complex64> {
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << c.n_qubits];
    state[0] = Complex64::new(1.0, 0.0);
    for (g, gate) in c.gates.iter().enumerate() {
        match *gate {
            Gate::Rot { axis, qubit, param } => {
                let extra = match shift {
                    Some((pos, s)) if pos == g => s,
                    _ => 0.0,
                };
                apply_1q(&mut state, qubit, &rotation(axis, theta[param] + extra));
            }
            Gate::Encode { qubit, feature } => apply_1q(&mut state, qubit, &rotation(Axis::Y, x[feature])),
            Gate::Cz(a, b) => apply_cz(&mut state, a, b),
        }
    }
    state
}

/// Probability that the readout qubit is measured as `|0⟩`.
fn prob_zero(c: &PqcCircuit, state: &[Complex64]) -> f64 {
    let bit = 1usize << c.readout;
    let p: f64 = state
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    p.clamp(0.0, 1.0)
}

fn estimate<R: RngCore + ?Sized>(p0: f64, shots: Shots, rng: &mut R) -> f64 {
    match shots {
        Shots::Exact => 2.0 * p0 - 1.0,
        Shots::Finite(h) => {
            let mut plus = 0u64;
            for _ in 0..h {
                if rng::uniform(rng) < p0 {
                    plus += 1;
                }
            }
            (2.0 * plus as f64 - h as f64) / h as f64
        }
    }
}

/// `⟨0|U†(θ, x) Z U(θ, x)|0⟩` on the readout qubit.
pub fn exact_expectation(c: &PqcCircuit, theta: &[f64], x: &[f64]) -> Result<f64> {
    check_inputs(c, theta, x)?;
    Ok(2.0 * prob_zero(c, &simulate(c, theta, x, None)) - 1.0)
}

/// Mean of `shots` sampled `±1` readouts (exact for [`Shots::Exact`]).
pub fn shot_expectation<R: RngCore + ?Sized>(
    c: &PqcCircuit,
    theta: &[f64],
    x: &[f64],
    shots: Shots,
    rng: &mut R,
) -> Result<f64> {
    check_inputs(c, theta, x)?;
    if shots == Shots::Finite(0) {
        return Err(Error::argument("shot count must be at least 1"));
    }
    Ok(estimate(prob_zero(c, &simulate(c, theta, x, None)), shots, rng))
}

/// Parameter-shift gradient of the readout expectation. Each rotation is
/// shifted by `±π/2` on its own, and each shifted circuit gets fresh shots.
pub fn parameter_shift_gradient<R: RngCore + ?Sized>(
    c: &PqcCircuit,
    theta: &[f64],
    x: &[f64],
    shots: Shots,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_inputs(c, theta, x)?;
    if shots == Shots::Finite(0) {
        return Err(Error::argument("shot count must be at least 1"));
    }
    let mut grad = vec![0.0; c.n_params];
    for (g, gate) in c.gates.iter().enumerate() {
        if let Gate::Rot { param, .. } = *gate {
            let plus = estimate(prob_zero(c, &simulate(c, theta, x, Some((g, PI / 2.0)))), shots, rng);
            let minus = estimate(prob_zero(c, &simulate(c, theta, x, Some((g, -PI / 2.0)))), shots, rng);
            grad[param] += 0.5 * (plus - minus);
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    /// Label in `{-1, +1}`.
    pub y: f64,
}

/// Squared error `(⟨Z⟩ - y)²` averaged over `data`, using exact expectations.
pub fn mean_loss(c: &PqcCircuit, theta: &[f64], data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::argument("empty dataset"));
    }
    let mut total = 0.0;
    for s in data {
        let e = exact_expectation(c, theta, &s.x)?;
        total += (e - s.y) * (e - s.y);
    }
    Ok(total / data.len() as f64)
}

/// Fraction of samples whose label matches the sign of `⟨Z⟩` (zero counts
/// as `+1`).
pub fn accuracy(c: &PqcCircuit, theta: &[f64], data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::argument("empty dataset"));
    }
    let mut hits = 0usize;
    for s in data {
        let e = exact_expectation(c, theta, &s.x)?;
        let pred = if e >= 0.0 { 1.0 } else { -1.0 };
        if pred == s.y {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Gradient estimate of the squared-error loss over `batch`.
pub fn loss_gradient<R: RngCore + ?Sized>(
    c: &PqcCircuit,
    theta: &[f64],
    batch: &[Sample],
    shots: Shots,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::argument("empty batch"));
    }
    let mut grad = vec![0.0; c.n_params];
    let scale = 2.0 / batch.len() as f64;
    for s in batch {
        let e = shot_expectation(c, theta, &s.x, shots, rng)?;
        let de = parameter_shift_gradient(c, theta, &s.x, shots, rng)?;
        for (g, d) in grad.iter_mut().zip(de) {
            *g += scale * (e - s.y) * d;
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdParams {
    pub iters: usize,
    pub lr: f64,
    pub shots: Shots,
    /// Mini-batch size; samples are drawn with replacement.
    pub batch: usize,
}

/// `iters` steps of `θ ← θ - η ĝ` on mini-batches of `data`.
pub fn local_sgd<R: RngCore + ?Sized>(
    c: &PqcCircuit,
    theta0: &[f64],
    params: &SgdParams,
    data: &[Sample],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::argument("device has no data"));
    }
    if params.batch == 0 {
        return Err(Error::argument("batch size must be at least 1"));
    }
    let mut theta = theta0.to_vec();
    let mut batch = Vec::with_capacity(params.batch);
    for _ in 0..params.iters {
        batch.clear();
        for _ in 0..params.batch {
            batch.push(data[rng::index(rng, data.len())].clone());
        }
        let g = loss_gradient(c, &theta, &batch, params.shots, rng)?;
        for (t, gi) in theta.iter_mut().zip(g) {
            *t -= params.lr * gi;
        }
    }
    Ok(theta)
}

/// Coordinate-wise mean of the device parameter vectors.
pub fn fedavg(thetas: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = thetas.first().ok_or_else(|| Error::argument("no parameter vectors to average"))?;
    if thetas.iter().any(|t| t.len() != first.len()) {
        return Err(Error::argument("parameter vectors differ in length"));
    }
    // Running mean, so identical inputs come back unchanged.
    let mut mean = first.clone();
    for (k, t) in thetas.iter().enumerate().skip(1) {
        for (m, v) in mean.iter_mut().zip(t) {
            *m += (v - *m) / (k + 1) as f64;
        }
    }
    Ok(mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataSplit {
    #[default]
    Iid,
    /// Each device holds 80% of one label and 20% of the other.
    NonIid,
}

impl DataSplit {
    pub fn name(self) -> &'static str {
        match self {
            DataSplit::Iid => "iid",
            DataSplit::NonIid => "non_iid",
        }
    }
}

impl fmt::Display for DataSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(DataSplit::Iid),
            "non_iid" | "non-iid" => Ok(DataSplit::NonIid),
            _ => Err(Error::argument(alloc::format!("unknown data split `{s}`"))),
        }
    }
}

/// One point of the two-feature toy task: `x ∈ [0, π]²`, label `+1` below
/// the anti-diagonal `x0 + x1 = π` and `-1` above it.
pub fn synthetic_sample<R: RngCore + ?Sized>(rng: &mut R) -> Sample {
    let x0 = rng::uniform_range(rng, 0.0, PI);
    let x1 = rng::uniform_range(rng, 0.0, PI);
    Sample {
        y: if x0 + x1 < PI { 1.0 } else { -1.0 },
        x: vec![x0, x1],
    }
}

/// Samples for `n_devices` devices. Under [`DataSplit::NonIid`] even devices
/// favour label `+1` and odd devices label `-1`.
pub fn partition_data(seed: u64, n_devices: usize, per_device: usize, split: DataSplit) -> Vec<Vec<Sample>> {
    (0..n_devices)
        .map(|n| {
            let mut rng = rng::indexed_stream(seed, "qfl-data", n as u64);
            match split {
                DataSplit::Iid => (0..per_device).map(|_| synthetic_sample(&mut rng)).collect(),
                DataSplit::NonIid => {
                    let major = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let want_major = (per_device * 4 + 2) / 5;
                    let mut quota = [want_major, per_device - want_major];
                    let mut out = Vec::with_capacity(per_device);
                    while out.len() < per_device {
                        let s = synthetic_sample(&mut rng);
                        let slot = usize::from(s.y != major);
                        if quota[slot] > 0 {
                            quota[slot] -= 1;
                            out.push(s);
                        }
                    }
                    out
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedConfig {
    pub n_devices: usize,
    pub rounds: usize,
    /// Local iterations per device; length `n_devices`.
    pub local_iters: Vec<usize>,
    pub lr: f64,
    pub shots: Shots,
    pub batch: usize,
    pub split: DataSplit,
    pub seed: u64,
    pub n_qubits: usize,
    pub layers: usize,
    pub samples_per_device: usize,
    pub test_samples: usize,
}

impl Default for FedConfig {
    fn default() -> Self {
        Self {
            n_devices: 5,
            rounds: 30,
            local_iters: vec![5; 5],
            lr: 0.1,
            shots: Shots::Finite(100),
            batch: 4,
            split: DataSplit::Iid,
            seed: 0,
            n_qubits: 4,
            layers: 2,
            samples_per_device: 64,
            test_samples: 200,
        }
    }
}

impl FedConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_devices", self.n_devices),
            ("rounds", self.rounds),
            ("batch", self.batch),
            ("n_qubits", self.n_qubits),
            ("layers", self.layers),
            ("samples_per_device", self.samples_per_device),
            ("test_samples", self.test_samples),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::config(alloc::format!("{name} must be at least 1")));
            }
        }
        if self.local_iters.len() != self.n_devices {
            return Err(Error::config(alloc::format!(
                "local_iters has {} entries for {} devices",
                self.local_iters.len(),
                self.n_devices
            )));
        }
        if self.local_iters.contains(&0) {
            return Err(Error::config("local_iters entries must be at least 1"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::config("lr must be positive"));
        }
        if self.shots == Shots::Finite(0) {
            return Err(Error::config("shots must be at least 1"));
        }
        if self.n_qubits > MAX_PQC_QUBITS {
            return Err(Error::Resource {
                what: "circuit qubits",
                requested: self.n_qubits as u64,
                limit: MAX_PQC_QUBITS as u64,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 0 is the initial model.
    pub round: usize,
    pub global_loss: f64,
    pub global_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedRunRecord {
    pub shots: Shots,
    pub n_devices: usize,
    pub split: DataSplit,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    pub final_params: Vec<f64>,
}

impl FedRunRecord {
    pub fn final_loss(&self) -> f64 {
        self.rounds.last().map_or(f64::NAN, |r| r.global_loss)
    }

    pub fn label(&self) -> String {
        alloc::format!("H={} N={} {} seed={}", self.shots, self.n_devices, self.split, self.seed)
    }
}

/// Initial global parameters, uniform in `[-0.5, 0.5)`.
pub fn initial_params(seed: u64, n_params: usize) -> Vec<f64> {
    let mut rng = rng::stream(seed, "qfl-init");
    (0..n_params).map(|_| rng::uniform_range(&mut rng, -0.5, 0.5)).collect()
}

/// Full-participation federated training. Evaluation uses exact
/// expectations on a held-out IID test set.
pub fn run_qfl(cfg: &FedConfig) -> Result<FedRunRecord> {
    cfg.validate()?;
    let circuit = PqcCircuit::classifier(cfg.n_qubits, cfg.layers, 2)?;
    let data = partition_data(cfg.seed, cfg.n_devices, cfg.samples_per_device, cfg.split);
    let mut test_rng = rng::stream(cfg.seed, "qfl-test");
    let test: Vec<Sample> = (0..cfg.test_samples).map(|_| synthetic_sample(&mut test_rng)).collect();
    let mut theta = initial_params(cfg.seed, circuit.n_params());

    let evaluate = |round: usize, theta: &[f64]| -> Result<RoundRecord> {
        Ok(RoundRecord {
            round,
            global_loss: mean_loss(&circuit, theta, &test)?,
            global_accuracy: accuracy(&circuit, theta, &test)?,
        })
    };
    let mut rounds = vec![evaluate(0, &theta)?];
    for k in 0..cfg.rounds {
        let mut locals = Vec::with_capacity(cfg.n_devices);
        for (n, device_data) in data.iter().enumerate() {
            let mut rng: Rng = rng::indexed_stream(cfg.seed, "qfl-local", (k * cfg.n_devices + n) as u64);
            let params = SgdParams {
                iters: cfg.local_iters[n],
                lr: cfg.lr,
                shots: cfg.shots,
                batch: cfg.batch,
            };
            locals.push(local_sgd(&circuit, &theta, &params, device_data, &mut rng)?);
        }
        theta = fedavg(&locals)?;
        rounds.push(evaluate(k + 1, &theta)?);
    }
    Ok(FedRunRecord {
        shots: cfg.shots,
        n_devices: cfg.n_devices,
        split: cfg.split,
        seed: cfg.seed,
        rounds,
        final_params: theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoiseBoundInputs {
    /// Bernoulli variance cap, in `(0, 1/4]`.
    pub nu: f64,
    /// Number of distinct observable eigenvalues.
    pub n_z: u32,
    /// Parameter count.
    pub dims: usize,
    pub tr_z2: f64,
    pub shots: u64,
}

impl ShotNoiseBoundInputs {
    /// Single-qubit Pauli-Z readout with `ν = 1/4`.
    pub fn pauli_z(dims: usize, shots: u64) -> Self {
        Self {
            nu: 0.25,
            n_z: 2,
            dims,
            tr_z2: 2.0,
            shots,
        }
    }
}

/// Shot-noise variance bound `ν N_z D Tr(Z²) / (2H)`.
pub fn lemma4_bound(inp: &ShotNoiseBoundInputs) -> Result<f64> {
    if inp.shots == 0 {
        return Err(Error::argument("shot count must be positive"));
    }
    if !(inp.nu > 0.0 && inp.nu <= 0.25) {
        return Err(Error::argument("nu must lie in (0, 1/4]"));
    }
    if inp.n_z == 0 || inp.dims == 0 || !(inp.tr_z2 > 0.0) {
        return Err(Error::argument("bound inputs must be positive"));
    }
    Ok(inp.nu * f64::from(inp.n_z) * inp.dims as f64 * inp.tr_z2 / (2.0 * inp.shots as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceBoundInputs {
    /// Smoothness constant `L`.
    pub smoothness: f64,
    /// PL constant `μ`.
    pub pl_constant: f64,
    pub c1: f64,
    pub sigma: f64,
    pub batch: usize,
    /// Gradient diversity `λ`.
    pub diversity: f64,
    pub lr: f64,
    pub rounds: usize,
    pub local_iters: Vec<usize>,
    /// `f(θ̄) - f*` at the start of training.
    pub f_init_minus_fstar: f64,
}

impl ConvergenceBoundInputs {
    pub fn n_devices(&self) -> usize {
        self.local_iters.len()
    }

    pub fn mean_local_iters(&self) -> f64 {
        self.local_iters.iter().sum::<usize>() as f64 / self.local_iters.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pl_constant > 0.0 && self.smoothness >= self.pl_constant) {
            return Err(Error::argument("need L >= mu > 0"));
        }
        if self.batch == 0 || self.rounds == 0 || self.local_iters.is_empty() || self.local_iters.contains(&0) {
            return Err(Error::argument("counts must be at least 1"));
        }
        if !(self.lr > 0.0) {
            return Err(Error::argument("lr must be positive"));
        }
        Ok(())
    }
}

/// Right-hand side of the federated convergence bound, with the shot-noise
/// contribution supplied by the caller.
pub fn theorem1_rhs(inp: &ConvergenceBoundInputs, shot_term: f64) -> Result<f64> {
    inp.validate()?;
    let l = inp.smoothness;
    let eta = inp.lr;
    let s2 = inp.sigma * inp.sigma;
    let n = inp.n_devices() as f64;
    let b = inp.batch as f64;
    let t = inp.mean_local_iters();
    let optimization = 2.0 * inp.f_init_minus_fstar / (eta * inp.rounds as f64 * t);
    let sampling = l * eta * s2 / (n * b);
    let drift = 2.0 * eta * eta * s2 * l * l * (t + 1.0) * (1.0 + 1.0 / n) / b;
    Ok(optimization + sampling + drift + shot_term)
}

/// Left-hand side of the step-size condition, maximized over devices. The
/// step size is admissible when the value is `<= 0`.
pub fn step_size_condition(inp: &ConvergenceBoundInputs) -> Result<f64> {
    inp.validate()?;
    let l = inp.smoothness;
    let eta = inp.lr;
    let n = inp.n_devices() as f64;
    let lam = inp.diversity;
    let t = *inp.local_iters.iter().max().unwrap_or(&1) as f64;
    Ok(-eta / 2.0
        + lam * (n + 1.0) * l * l * eta * eta * eta * (2.0 * inp.c1 + t * (t + 1.0)) / (2.0 * n)
        + lam * l * eta * eta * (inp.c1 / n + 1.0) / 2.0)
}

/// Order estimate of the iterations needed to reach error `δ` under
/// gradient variance `V`: `⌈const · (ln(1/δ) + V/(δμ)) · L/μ⌉`.
pub fn shot_noise_iterations_with_constant(delta: f64, mu: f64, l: f64, v: f64, constant: f64) -> Result<u64> {
    if !(delta > 0.0 && mu > 0.0 && l > 0.0 && v >= 0.0 && constant > 0.0) {
        return Err(Error::argument("delta, mu, L and the constant must be positive and V non-negative"));
    }
    let raw = constant * (math::ln(1.0 / delta) + v / (delta * mu)) * (l / mu);
    // Absorb rounding so exact integers are not bumped up by one ulp.
    let k = math::ceil(raw - 1e-9 * math::abs(raw));
    Ok(if k < 1.0 { 1 } else { k as u64 })
}

/// [`shot_noise_iterations_with_constant`] with unit constant.
pub fn shot_noise_iterations(delta: f64, mu: f64, l: f64, v: f64) -> Result<u64> {
    shot_noise_iterations_with_constant(delta, mu, l, v, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(axis: Axis) -> PqcCircuit {
        let mut c = PqcCircuit::new(1, 1).unwrap();
        c.push(Gate::Rot { axis, qubit: 0, param: 0 }).unwrap();
        c
    }

    #[test]
    fn identity_circuit_reads_plus_one() {
        let c = PqcCircuit::new(3, 0).unwrap();
        assert_eq!(exact_expectation(&c, &[], &[]).unwrap(), 1.0);
    }

    #[test]
    fn ry_gives_cosine() {
        let c = single(Axis::Y);
        for t in [0.0, 0.3, PI / 2.0, 2.5] {
            assert!((exact_expectation(&c, &[t], &[]).unwrap() - math::cos(t)).abs() < 1e-12);
        }
        assert!(exact_expectation(&c, &[PI / 2.0], &[]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rz_leaves_z_alone() {
        let c = single(Axis::Z);
        assert!((exact_expectation(&c, &[1.1], &[]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_rule_on_single_rotation() {
        let c = single(Axis::Y);
        let mut r = rng::from_seed(0);
        let g0 = parameter_shift_gradient(&c, &[0.0], &[], Shots::Exact, &mut r).unwrap();
        assert!(g0[0].abs() < 1e-12);
        let g1 = parameter_shift_gradient(&c, &[PI / 2.0], &[], Shots::Exact, &mut r).unwrap();
        assert!((g1[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_shot_is_plus_minus_one() {
        let c = single(Axis::Y);
        let mut r = rng::from_seed(4);
        for _ in 0..20 {
            let e = shot_expectation(&c, &[1.0], &[], Shots::Finite(1), &mut r).unwrap();
            assert!(e == 1.0 || e == -1.0);
        }
    }

    #[test]
    fn deterministic_outcome_has_no_noise() {
        let c = single(Axis::X);
        let mut r = rng::from_seed(1);
        for h in [1, 7, 100] {
            assert_eq!(shot_expectation(&c, &[PI], &[], Shots::Finite(h), &mut r).unwrap(), -1.0);
        }
    }

    #[test]
    fn input_validation() {
        let mut c = PqcCircuit::new(2, 1).unwrap();
        assert!(c.push(Gate::Rot { axis: Axis::X, qubit: 2, param: 0 }).is_err());
        assert!(c.push(Gate::Rot { axis: Axis::X, qubit: 0, param: 1 }).is_err());
        assert!(c.push(Gate::Cz(1, 1)).is_err());
        assert!(exact_expectation(&c, &[0.0, 0.0], &[]).is_err());
        assert!(matches!(PqcCircuit::new(13, 0), Err(Error::Resource { .. })));
        c.push(Gate::Encode { qubit: 0, feature: 1 }).unwrap();
        assert!(exact_expectation(&c, &[0.0], &[0.5]).is_err());
    }

    #[test]
    fn ansatz_shape() {
        let c = PqcCircuit::ansatz(4, 2).unwrap();
        assert_eq!(c.n_params(), 16);
        let cz = c.gates().iter().filter(|g| matches!(g, Gate::Cz(..))).count();
        assert_eq!(cz, 8);
        let cl = PqcCircuit::classifier(4, 2, 2).unwrap();
        assert_eq!(cl.n_features(), 2);
        assert_eq!(cl.gates()[2], Gate::Encode { qubit: 2, feature: 0 });
    }

    #[test]
    fn fedavg_examples() {
        assert_eq!(fedavg(&[vec![0.0], vec![2.0]]).unwrap(), vec![1.0]);
        let v = vec![0.1, -0.2, 0.3];
        assert_eq!(fedavg(&[v.clone(), v.clone(), v.clone()]).unwrap(), v);
        assert!(fedavg(&[]).is_err());
        assert!(fedavg(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn zero_lr_keeps_params() {
        let c = PqcCircuit::classifier(2, 1, 2).unwrap();
        let data = partition_data(0, 1, 8, DataSplit::Iid).remove(0);
        let theta = initial_params(0, c.n_params());
        let p = SgdParams {
            iters: 3,
            lr: 0.0,
            shots: Shots::Finite(10),
            batch: 2,
        };
        let out = local_sgd(&c, &theta, &p, &data, &mut rng::from_seed(0)).unwrap();
        assert_eq!(out, theta);
    }

    #[test]
    fn one_step_is_exact_gradient_step() {
        let c = PqcCircuit::classifier(2, 1, 2).unwrap();
        let s = synthetic_sample(&mut rng::from_seed(3));
        let theta = initial_params(3, c.n_params());
        let p = SgdParams {
            iters: 1,
            lr: 0.2,
            shots: Shots::Exact,
            batch: 1,
        };
        let out = local_sgd(&c, &theta, &p, core::slice::from_ref(&s), &mut rng::from_seed(0)).unwrap();
        let e = exact_expectation(&c, &theta, &s.x).unwrap();
        let de = parameter_shift_gradient(&c, &theta, &s.x, Shots::Exact, &mut rng::from_seed(0)).unwrap();
        for d in 0..theta.len() {
            let want = theta[d] - 0.2 * 2.0 * (e - s.y) * de[d];
            assert!((out[d] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn non_iid_split_is_skewed() {
        let parts = partition_data(9, 4, 50, DataSplit::NonIid);
        for (n, part) in parts.iter().enumerate() {
            assert_eq!(part.len(), 50);
            let pos = part.iter().filter(|s| s.y > 0.0).count();
            assert_eq!(pos, if n % 2 == 0 { 40 } else { 10 });
        }
    }

    #[test]
    fn labels_follow_the_diagonal() {
        let mut r = rng::from_seed(2);
        for _ in 0..100 {
            let s = synthetic_sample(&mut r);
            assert_eq!(s.y > 0.0, s.x[0] + s.x[1] < PI);
        }
    }

    #[test]
    fn single_device_single_round_is_local_sgd() {
        let cfg = FedConfig {
            n_devices: 1,
            rounds: 1,
            local_iters: vec![2],
            shots: Shots::Finite(20),
            n_qubits: 2,
            layers: 1,
            samples_per_device: 16,
            test_samples: 10,
            seed: 5,
            ..FedConfig::default()
        };
        let rec = run_qfl(&cfg).unwrap();
        let c = PqcCircuit::classifier(2, 1, 2).unwrap();
        let data = partition_data(5, 1, 16, DataSplit::Iid);
        let p = SgdParams {
            iters: 2,
            lr: cfg.lr,
            shots: cfg.shots,
            batch: cfg.batch,
        };
        let want = local_sgd(
            &c,
            &initial_params(5, c.n_params()),
            &p,
            &data[0],
            &mut rng::indexed_stream(5, "qfl-local", 0),
        )
        .unwrap();
        assert_eq!(rec.final_params, want);
        assert_eq!(rec.rounds.len(), 2);
    }

    #[test]
    fn fed_config_rejections() {
        let bad = [
            FedConfig { rounds: 0, ..FedConfig::default() },
            FedConfig { lr: 0.0, ..FedConfig::default() },
            FedConfig { local_iters: vec![1; 4], ..FedConfig::default() },
            FedConfig { shots: Shots::Finite(0), ..FedConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn shot_noise_bound_examples() {
        let b = lemma4_bound(&ShotNoiseBoundInputs::pauli_z(4, 100)).unwrap();
        assert!((b - 0.02).abs() < 1e-15);
        let b2 = lemma4_bound(&ShotNoiseBoundInputs::pauli_z(4, 200)).unwrap();
        assert!((b2 - b / 2.0).abs() < 1e-15);
        assert!(lemma4_bound(&ShotNoiseBoundInputs::pauli_z(4, 0)).is_err());
    }

    fn bound_inputs() -> ConvergenceBoundInputs {
        ConvergenceBoundInputs {
            smoothness: 2.0,
            pl_constant: 0.5,
            c1: 1.0,
            sigma: 0.3,
            batch: 4,
            diversity: 1.0,
            lr: 0.01,
            rounds: 30,
            local_iters: vec![5; 5],
            f_init_minus_fstar: 1.0,
        }
    }

    #[test]
    fn convergence_bound_terms() {
        let base = bound_inputs();
        let many = ConvergenceBoundInputs {
            rounds: 1_000_000,
            sigma: 0.0,
            ..base.clone()
        };
        assert!(theorem1_rhs(&many, 0.0).unwrap() < 1e-3);
        let more_devices = ConvergenceBoundInputs {
            local_iters: vec![5; 10],
            ..base.clone()
        };
        assert!(theorem1_rhs(&more_devices, 0.0).unwrap() < theorem1_rhs(&base, 0.0).unwrap());
        let lo = lemma4_bound(&ShotNoiseBoundInputs::pauli_z(16, 100)).unwrap();
        let hi = lemma4_bound(&ShotNoiseBoundInputs::pauli_z(16, 1)).unwrap();
        assert!(theorem1_rhs(&base, lo).unwrap() <= theorem1_rhs(&base, hi).unwrap());
        assert!(theorem1_rhs(&ConvergenceBoundInputs { pl_constant: 3.0, ..base }, 0.0).is_err());
    }

    #[test]
    fn small_step_sizes_are_admissible() {
        let inp = bound_inputs();
        assert!(step_size_condition(&inp).unwrap() <= 0.0);
        let big = ConvergenceBoundInputs { lr: 10.0, ..inp };
        assert!(step_size_condition(&big).unwrap() > 0.0);
    }

    #[test]
    fn iteration_estimate() {
        let e = core::f64::consts::E;
        assert_eq!(shot_noise_iterations(1.0 / e, 1.0, 1.0, 0.0).unwrap(), 1);
        let a = shot_noise_iterations(0.1, 0.5, 2.0, 0.01).unwrap();
        let b = shot_noise_iterations(0.05, 0.5, 2.0, 0.01).unwrap();
        assert!(b > a);
        assert!(shot_noise_iterations(0.0, 1.0, 1.0, 0.0).is_err());
    }
}
