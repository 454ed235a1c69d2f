//! Exact statevector QAOA.
//!
//! Basis index `x` encodes the bitstring with qubit `i` at bit `i`; the spin
//! of qubit `i` is `z_i = 1 - 2 x_i`, matching [`qubo_to_ising`]. The cost
//! layer is diagonal, so the Ising energy of every basis state is tabulated
//! once in a [`CostDiagonal`] and reused by every layer and expectation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;
use crate::qubo::{qubo_to_ising, IsingHamiltonian, QuboProblem};
use crate::rng;
use crate::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

fn check_budget(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Resource {
            what: "qubit count",
            requested: n_qubits as u64,
            limit: MAX_QUBITS as u64,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaoaConfig {
    /// Number of alternating cost/mixer layers.
    pub layers: usize,
    /// Initial step of the gradient descent on `(gamma, beta)`.
    pub lr: f64,
    pub max_iters: usize,
    /// Readout shots after optimization.
    pub shots: u64,
    pub seed: u64,
    /// Step of the central finite-difference gradient.
    pub grad_eps: f64,
    /// Stop once an accepted step improves the objective by less than this
    /// (in units of the normalized Hamiltonian).
    pub tol: f64,
    /// Halve the step until the objective does not increase.
    pub backtracking: bool,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            lr: 0.1,
            max_iters: 150,
            shots: 1024,
            seed: 0,
            grad_eps: 1e-4,
            tol: 1e-6,
            backtracking: true,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::config("QAOA needs at least one layer"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::config("QAOA learning rate must be positive"));
        }
        if self.shots == 0 {
            return Err(Error::config("QAOA needs at least one readout shot"));
        }
        if !(self.grad_eps.is_finite() && self.grad_eps > 0.0) {
            return Err(Error::config("finite-difference step must be positive"));
        }
        Ok(())
    }
}

/// Ising energy of every computational basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDiagonal {
    n_qubits: usize,
    energies: Vec<f64>,
}

impl CostDiagonal {
    pub fn from_ising(h: &IsingHamiltonian) -> Result<Self> {
        let n = h.n_spins();
        check_budget(n)?;
        let energies = (0..1u64 << n).map(|x| h.energy_bits(x)).collect();
        Ok(Self { n_qubits: n, energies })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Affine map `(E - shift) * factor` applied to every entry.
    pub fn normalized(&self, shift: f64, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            energies: self.energies.iter().map(|e| (e - shift) * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Equal superposition `H^n |0...0>`.
    pub fn init_uniform(n_qubits: usize) -> Result<Self> {
        check_budget(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / math::sqrt(dim as f64), 0.0);
        Ok(Self {
            n_qubits,
            amps: vec![a; dim],
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        check_budget(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(Error::argument("basis index out of range"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. The caller
    /// is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::argument("amplitude count must be a power of two"));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        check_budget(n_qubits)?;
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|x> -> exp(-i gamma E(x)) |x>` for the tabulated energies.
    pub fn apply_cost_diagonal(&mut self, diag: &CostDiagonal, gamma: f64) {
        debug_assert_eq!(diag.n_qubits, self.n_qubits);
        for (a, &e) in self.amps.iter_mut().zip(&diag.energies) {
            let phi = -gamma * e;
            *a *= Complex64::new(math::cos(phi), math::sin(phi));
        }
    }

    /// Cost layer evaluated directly from the Hamiltonian.
    pub fn apply_cost_layer(&mut self, h: &IsingHamiltonian, gamma: f64) -> Result<()> {
        if h.n_spins() != self.n_qubits {
            return Err(Error::argument("Hamiltonian and state differ in qubit count"));
        }
        for (x, a) in self.amps.iter_mut().enumerate() {
            let phi = -gamma * h.energy_bits(x as u64);
            *a *= Complex64::new(math::cos(phi), math::sin(phi));
        }
        Ok(())
    }

    /// `RX(2 beta) = exp(-i beta X)` on every qubit.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        let (c, s) = (math::cos(beta), math::sin(beta));
        let minus_i_s = Complex64::new(0.0, -s);
        for k in 0..self.n_qubits {
            let stride = 1usize << k;
            for block in (0..self.amps.len()).step_by(stride << 1) {
                for i in block..block + stride {
                    let a = self.amps[i];
                    let b = self.amps[i + stride];
                    self.amps[i] = a * c + b * minus_i_s;
                    self.amps[i + stride] = a * minus_i_s + b * c;
                }
            }
        }
    }

    /// `<psi| H_C |psi>` for the tabulated energies.
    pub fn expectation(&self, diag: &CostDiagonal) -> f64 {
        self.amps
            .iter()
            .zip(&diag.energies)
            .map(|(a, e)| a.norm_sqr() * e)
            .sum()
    }

    /// Draws `shots` i.i.d. measurement outcomes; returns outcome counts.
    pub fn sample(&self, shots: u64, seed: u64) -> BTreeMap<u64, u64> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let mut rng = rng::from_seed(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng::uniform(&mut rng) * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            *counts.entry(idx as u64).or_insert(0) += 1;
        }
        counts
    }
}

/// Splits a parameter vector `[gamma_1..gamma_p, beta_1..beta_p]`.
fn split_params(params: &[f64]) -> (&[f64], &[f64]) {
    params.split_at(params.len() / 2)
}

/// State after `p` QAOA layers from the uniform superposition.
pub fn qaoa_state(diag: &CostDiagonal, gammas: &[f64], betas: &[f64]) -> StateVector {
    let mut s = StateVector::init_uniform(diag.n_qubits).expect("diagonal respects budget");
    for (&g, &b) in gammas.iter().zip(betas) {
        s.apply_cost_diagonal(diag, g);
        s.apply_mixer_layer(b);
    }
    s
}

pub fn qaoa_expectation(diag: &CostDiagonal, gammas: &[f64], betas: &[f64]) -> f64 {
    qaoa_state(diag, gammas, betas).expectation(diag)
}

fn objective(diag: &CostDiagonal, params: &[f64]) -> f64 {
    let (g, b) = split_params(params);
    qaoa_expectation(diag, g, b)
}

/// Central finite-difference gradient of the QAOA objective over the
/// parameter vector `[gammas.., betas..]`.
pub fn finite_difference_gradient(diag: &CostDiagonal, params: &[f64], eps: f64) -> Vec<f64> {
    let mut work = params.to_vec();
    (0..params.len())
        .map(|k| {
            work[k] = params[k] + eps;
            let up = objective(diag, &work);
            work[k] = params[k] - eps;
            let down = objective(diag, &work);
            work[k] = params[k];
            (up - down) / (2.0 * eps)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaoaResult {
    pub n_qubits: usize,
    /// Best sampled bitstring, qubit `i` at bit `i`.
    pub best_bits: u64,
    pub best_energy: f64,
    /// Whether `best_bits` satisfies the feasibility predicate (true when
    /// none was supplied).
    pub best_feasible: bool,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `<H_C>` after every outer iteration, in the Hamiltonian's own units.
    pub objective_trace: Vec<f64>,
    pub sample_counts: BTreeMap<u64, u64>,
    /// False when `max_iters` ran out before the stopping rule fired.
    pub converged: bool,
}

impl QaoaResult {
    pub fn best_bitstring(&self) -> Vec<bool> {
        crate::qubo::unpack_bits(self.best_bits, self.n_qubits)
    }
}

/// Optimizes `(gamma, beta)` by gradient descent on the exact expectation,
/// then samples the final state and returns the lowest-energy sample.
///
/// The angle dynamics run on `(H - offset) / max|coefficient|` so the
/// learning rate is independent of the problem's units; reported energies
/// and the trace use the original Hamiltonian. When `feasible` is given,
/// feasible samples are preferred over infeasible ones regardless of energy.
pub fn optimize(
    h: &IsingHamiltonian,
    cfg: &QaoaConfig,
    feasible: Option<&dyn Fn(u64) -> bool>,
) -> Result<QaoaResult> {
    cfg.validate()?;
    let raw = CostDiagonal::from_ising(h)?;
    let scale = match h.max_abs_coefficient() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let diag = raw.normalized(h.offset, 1.0 / scale);
    let to_raw = |v: f64| v * scale + h.offset;

    let p = cfg.layers;
    let mut init = rng::stream(cfg.seed, "qaoa-init");
    let mut params: Vec<f64> = (0..2 * p)
        .map(|_| rng::uniform_range(&mut init, 0.0, math::PI / 4.0))
        .collect();
    let mut current = objective(&diag, &params);
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        let grad = finite_difference_gradient(&diag, &params, cfg.grad_eps);
        let mut step = cfg.lr;
        let mut accepted = None;
        for _ in 0..32 {
            let cand: Vec<f64> = params.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
            let value = objective(&diag, &cand);
            if !cfg.backtracking || value <= current {
                accepted = Some((cand, value));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, value)) = accepted else {
            // no descent direction at any tried step length
            trace.push(to_raw(current));
            converged = true;
            break;
        };
        let improvement = current - value;
        params = cand;
        current = value;
        trace.push(to_raw(current));
        if math::abs(improvement) < cfg.tol {
            converged = true;
            break;
        }
    }

    let (gammas, betas) = split_params(&params);
    let state = qaoa_state(&diag, gammas, betas);
    let counts = state.sample(cfg.shots, rng::derive_seed(cfg.seed, "qaoa-sample"));
    let is_ok = |x: u64| feasible.is_none_or(|f| f(x));
    let (best_bits, best_energy) = counts
        .keys()
        .map(|&x| (x, raw.energies[x as usize]))
        .min_by(|a, b| {
            // feasible first, then energy, then the smaller bitstring
            is_ok(b.0)
                .cmp(&is_ok(a.0))
                .then(a.1.total_cmp(&b.1))
                .then(a.0.cmp(&b.0))
        })
        .expect("at least one shot");

    Ok(QaoaResult {
        n_qubits: h.n_spins(),
        best_bits,
        best_energy,
        best_feasible: is_ok(best_bits),
        gammas: gammas.to_vec(),
        betas: betas.to_vec(),
        objective_trace: trace,
        sample_counts: counts,
        converged,
    })
}

/// Runs QAOA on a QUBO: converts to spin form, filters channel-selection
/// samples by feasibility and reports the QUBO energy of the chosen sample.
pub fn solve_qubo(q: &QuboProblem, cfg: &QaoaConfig) -> Result<QaoaResult> {
    let h = qubo_to_ising(q);
    let feasible = |x: u64| q.is_feasible_bits(x);
    let mut res = optimize(&h, cfg, Some(&feasible))?;
    res.best_energy = q.energy_bits(res.best_bits);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn uniform_amplitudes() {
        let s = StateVector::init_uniform(1).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|&a| close(a, Complex64::new(r, 0.0))));
        let s = StateVector::init_uniform(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        let r = 1.0 / math::sqrt(8.0);
        assert!(s.amplitudes().iter().all(|&a| close(a, Complex64::new(r, 0.0))));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(matches!(StateVector::init_uniform(21), Err(Error::Resource { .. })));
    }

    #[test]
    fn zero_angles_are_identity() {
        let h = IsingHamiltonian {
            linear: vec![0.3, -1.2],
            quadratic: vec![(0, 1, 0.7)],
            offset: 2.0,
        };
        let diag = CostDiagonal::from_ising(&h).unwrap();
        let amps: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let s0 = StateVector::from_amplitudes(amps).unwrap();
        let mut s = s0.clone();
        s.apply_cost_diagonal(&diag, 0.0);
        s.apply_mixer_layer(0.0);
        assert!(s.amplitudes().iter().zip(s0.amplitudes()).all(|(a, b)| close(*a, *b)));

        let mut z = s0.clone();
        z.apply_cost_layer(&IsingHamiltonian::zero(2), 1.3).unwrap();
        assert!(z.amplitudes().iter().zip(s0.amplitudes()).all(|(a, b)| close(*a, *b)));
    }

    #[test]
    fn cost_layer_keeps_probabilities() {
        let h = IsingHamiltonian {
            linear: vec![0.5, 1.0, -0.25],
            quadratic: vec![(0, 2, 1.5)],
            offset: 0.0,
        };
        let mut s = StateVector::init_uniform(3).unwrap();
        s.apply_mixer_layer(0.4);
        let before = s.probabilities();
        s.apply_cost_layer(&h, 0.9).unwrap();
        for (a, b) in before.iter().zip(s.probabilities()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mixer_at_half_pi_flips_every_qubit() {
        for n in 1..=4 {
            let mut s = StateVector::basis(n, 0).unwrap();
            s.apply_mixer_layer(math::PI / 2.0);
            let all_ones = (1usize << n) - 1;
            let mut phase = Complex64::new(1.0, 0.0);
            for _ in 0..n {
                phase *= Complex64::new(0.0, -1.0);
            }
            for (k, &a) in s.amplitudes().iter().enumerate() {
                let expected = if k == all_ones { phase } else { Complex64::new(0.0, 0.0) };
                assert!(close(a, expected), "n={n} k={k} a={a}");
            }
        }
    }

    #[test]
    fn expectation_of_uniform_and_basis_states() {
        let h = IsingHamiltonian {
            linear: vec![1.0, -2.0, 0.5],
            quadratic: vec![(0, 1, 0.25), (1, 2, -1.0)],
            offset: 3.0,
        };
        let diag = CostDiagonal::from_ising(&h).unwrap();
        let mean = diag.energies().iter().sum::<f64>() / 8.0;
        let u = StateVector::init_uniform(3).unwrap();
        assert!((u.expectation(&diag) - mean).abs() < 1e-12);
        // sum_z z_i = 0 over the hypercube, so the mean is the offset
        assert!((mean - 3.0).abs() < 1e-12);
        for x in 0..8 {
            let b = StateVector::basis(3, x).unwrap();
            assert!((b.expectation(&diag) - h.energy_bits(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_basis_state_is_deterministic() {
        let s = StateVector::basis(3, 5).unwrap();
        let counts = s.sample(500, 9);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&5], 500);
    }

    #[test]
    fn sampling_reproducible() {
        let mut s = StateVector::init_uniform(3).unwrap();
        s.apply_mixer_layer(0.3);
        assert_eq!(s.sample(1000, 4), s.sample(1000, 4));
    }

    #[test]
    fn single_qubit_prefers_bit_zero() {
        // I_0 = 1: E(z=+1) = 1, E(z=-1) = -1, so the minimum is bit value 1.
        // With I_0 = -1 it is bit value 0.
        for (coef, expected_bit) in [(1.0, 1u64), (-1.0, 0u64)] {
            let h = IsingHamiltonian {
                linear: vec![coef],
                quadratic: vec![],
                offset: 0.0,
            };
            let cfg = QaoaConfig {
                layers: 1,
                seed: 3,
                ..QaoaConfig::default()
            };
            let res = optimize(&h, &cfg, None).unwrap();
            let majority = res
                .sample_counts
                .iter()
                .max_by_key(|(_, &c)| c)
                .map(|(&x, _)| x)
                .unwrap();
            assert_eq!(majority, expected_bit);
            assert_eq!(res.best_bits, expected_bit);
            assert_eq!(res.best_energy, -1.0);
        }
    }

    #[test]
    fn zero_hamiltonian_returns_offset() {
        let mut h = IsingHamiltonian::zero(3);
        h.offset = -4.5;
        let res = optimize(&h, &QaoaConfig::default(), None).unwrap();
        assert_eq!(res.best_energy, -4.5);
        assert!(res.converged);
        assert!(res.objective_trace.iter().all(|&v| (v + 4.5).abs() < 1e-12));
    }

    #[test]
    fn trace_is_monotone_and_bounded() {
        let h = IsingHamiltonian {
            linear: vec![0.4, -0.9, 0.2, 0.6],
            quadratic: vec![(0, 1, 1.0), (1, 2, -0.5), (2, 3, 0.8), (0, 3, 0.3)],
            offset: 0.0,
        };
        let cfg = QaoaConfig {
            max_iters: 40,
            ..QaoaConfig::default()
        };
        let res = optimize(&h, &cfg, None).unwrap();
        assert!(res.objective_trace.len() <= 40);
        for w in res.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert_eq!(res.best_energy, h.energy_bits(res.best_bits));
    }

    #[test]
    fn invalid_config_rejected() {
        let h = IsingHamiltonian::zero(1);
        for cfg in [
            QaoaConfig { layers: 0, ..QaoaConfig::default() },
            QaoaConfig { lr: 0.0, ..QaoaConfig::default() },
            QaoaConfig { shots: 0, ..QaoaConfig::default() },
        ] {
            assert!(matches!(optimize(&h, &cfg, None), Err(Error::Config(_))));
        }
    }
}
