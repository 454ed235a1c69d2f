//! Block coordinate descent over channel selection and power allocation.
//!
//! Each BCD iteration runs a channel half-step and a power half-step. A
//! half-step sweeps the device blocks in index order; every block QUBO is
//! rebuilt against the current allocation, solved, decoded and accepted
//! only if the true sum-rate does not drop. The reported trace is therefore
//! non-decreasing and always evaluated on the exact rate expression.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::baselines::{brute_force_qubo, greedy_allocation, sca_power_allocation};
use crate::math;
use crate::qaoa::{self, QaoaConfig};
use crate::qubo::{
    build_channel_qubo, build_power_qubo, decode_solution, unpack_bits, Decoded, PenaltyConfig,
    PowerSurrogate, QuboProblem,
};
use crate::rng;
use crate::scenario::{
    device_rates, AllocationState, ChannelState, NetworkScenario, RadioParams,
};
use crate::{Error, Result};

/// How block sub-problems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// QAOA on every block QUBO, starting from a round-robin allocation.
    Qaoa,
    /// QAOA on every block QUBO, starting from the greedy allocation.
    GreedySeeded,
    /// Exhaustive minimization of every block QUBO.
    Exact,
    /// Classical BCD: own-rate best response for channels, SCA for powers,
    /// starting from the greedy allocation.
    Sca,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::Qaoa, Solver::GreedySeeded, Solver::Exact, Solver::Sca];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Qaoa => "qaoa",
            Solver::GreedySeeded => "greedy-seeded",
            Solver::Exact => "exact",
            Solver::Sca => "sca",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::argument(alloc::format!("unknown solver `{s}`")))
    }
}

/// Which blocks of variables BCD updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BcdMode {
    #[default]
    Joint,
    ChannelOnly,
    PowerOnly,
}

impl BcdMode {
    pub const ALL: [BcdMode; 3] = [BcdMode::Joint, BcdMode::ChannelOnly, BcdMode::PowerOnly];

    pub fn name(self) -> &'static str {
        match self {
            BcdMode::Joint => "joint",
            BcdMode::ChannelOnly => "channel-only",
            BcdMode::PowerOnly => "power-only",
        }
    }

    fn updates_channels(self) -> bool {
        self != BcdMode::PowerOnly
    }

    fn updates_powers(self) -> bool {
        self != BcdMode::ChannelOnly
    }
}

impl fmt::Display for BcdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BcdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BcdMode::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::argument(alloc::format!("unknown BCD mode `{s}`")))
    }
}

/// Partition of the devices into sub-problem blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockPlan {
    /// One block holding every device.
    Monolithic,
    /// Consecutive groups of this many devices.
    Groups(usize),
}

impl BlockPlan {
    pub fn blocks(self, n_devices: usize) -> Vec<Vec<usize>> {
        let size = match self {
            BlockPlan::Monolithic => n_devices.max(1),
            BlockPlan::Groups(k) => k.max(1),
        };
        (0..n_devices)
            .collect::<Vec<_>>()
            .chunks(size)
            .map(|c| c.to_vec())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Round completion time: the slowest upload.
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyModel {
    /// Upload payload per device.
    pub model_bits: f64,
    pub aggregation: Aggregation,
}

impl LatencyModel {
    /// Payload of `n_params` parameters at `bits_per_param` bits each.
    pub fn from_params(bits_per_param: u32, n_params: usize) -> Self {
        Self {
            model_bits: f64::from(bits_per_param) * n_params as f64,
            aggregation: Aggregation::Max,
        }
    }
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self::from_params(32, 20)
    }
}

/// Upload latency of an allocation given per-device rates. Returns
/// `f64::INFINITY` when any transmitting device has zero rate and zero when
/// no device transmits.
pub fn latency_from_rates(alloc: &AllocationState, rates: &[f64], lm: &LatencyModel) -> f64 {
    let times: Vec<f64> = alloc
        .transmitting()
        .map(|(n, _)| {
            if rates[n] > 0.0 {
                lm.model_bits / rates[n]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    if times.is_empty() {
        return 0.0;
    }
    match lm.aggregation {
        Aggregation::Max => times.iter().fold(0.0, |m: f64, &t| m.max(t)),
        Aggregation::Mean => times.iter().sum::<f64>() / times.len() as f64,
    }
}

/// System upload latency in seconds (see [`latency_from_rates`]).
pub fn latency(
    radio: &RadioParams,
    state: &ChannelState,
    alloc: &AllocationState,
    lm: &LatencyModel,
) -> f64 {
    let rates = device_rates(state, alloc, radio.noise_w, radio.bandwidth_hz);
    latency_from_rates(alloc, &rates, lm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdConfig {
    pub solver: Solver,
    pub mode: BcdMode,
    pub max_iters: usize,
    /// Relative sum-rate change regarded as stalled.
    pub tol: f64,
    /// Consecutive stalled iterations before stopping.
    pub patience: usize,
    pub q_bits: u32,
    pub penalties: PenaltyConfig,
    pub surrogate: PowerSurrogate,
    pub blocks: BlockPlan,
    /// QAOA settings; the seed is replaced per block (see [`block_seed`]).
    pub qaoa: QaoaConfig,
    pub sca_iters: usize,
    pub latency: LatencyModel,
    pub seed: u64,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            solver: Solver::Qaoa,
            mode: BcdMode::Joint,
            max_iters: 20,
            tol: 1e-3,
            patience: 3,
            q_bits: 3,
            penalties: PenaltyConfig::default(),
            surrogate: PowerSurrogate::default(),
            blocks: BlockPlan::Groups(1),
            qaoa: QaoaConfig::default(),
            sca_iters: 50,
            latency: LatencyModel::default(),
            seed: 0,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::config("tol must be non-negative"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience must be at least 1"));
        }
        if !(self.latency.model_bits.is_finite() && self.latency.model_bits > 0.0) {
            return Err(Error::config("model_bits must be positive"));
        }
        if let BlockPlan::Groups(0) = self.blocks {
            return Err(Error::config("block size must be at least 1"));
        }
        self.penalties.validate()?;
        self.qaoa.validate()
    }
}

/// Which half of a BCD iteration a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfStep {
    Channel,
    Power,
}

impl HalfStep {
    fn label(self) -> &'static str {
        match self {
            HalfStep::Channel => "bcd-channel",
            HalfStep::Power => "bcd-power",
        }
    }
}

/// Seed of the QAOA run for block `block` of sweep `sweep`.
pub fn block_seed(seed: u64, half: HalfStep, sweep: usize, block: usize) -> u64 {
    rng::derive_indexed(
        rng::derive_indexed(seed, half.label(), sweep as u64),
        "block",
        block as u64,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSweep {
    pub alloc: AllocationState,
    /// Sum of the QUBO energies of the solved blocks.
    pub energy: f64,
    pub accepted: usize,
    pub rejected: usize,
}

fn solve_qubo_block(q: &QuboProblem, solver: Solver, qaoa: &QaoaConfig, seed: u64) -> Result<(u64, f64)> {
    match solver {
        Solver::Exact => {
            let r = brute_force_qubo(q)?;
            Ok((r.best_bits, r.best_energy))
        }
        _ => {
            let cfg = QaoaConfig { seed, ..qaoa.clone() };
            let r = qaoa::solve_qubo(q, &cfg)?;
            Ok((r.best_bits, r.best_energy))
        }
    }
}

fn current_rate(radio: &RadioParams, state: &ChannelState, alloc: &AllocationState) -> f64 {
    device_rates(state, alloc, radio.noise_w, radio.bandwidth_hz).iter().sum()
}

/// Sweeps `blocks` in order, solving each block's QUBO with every other
/// device frozen, and keeps a block update only if the true sum-rate does
/// not decrease.
///
/// In the channel half-step silent devices are evaluated at `P_max`; a
/// device newly given a channel transmits at that power.
pub fn solve_block_decomposed(
    radio: &RadioParams,
    state: &ChannelState,
    current: &AllocationState,
    blocks: &[Vec<usize>],
    half: HalfStep,
    cfg: &BcdConfig,
    sweep: usize,
) -> Result<BlockSweep> {
    let mut alloc = current.clone();
    let mut rate = current_rate(radio, state, &alloc);
    let mut out = BlockSweep {
        alloc: alloc.clone(),
        energy: 0.0,
        accepted: 0,
        rejected: 0,
    };
    for (b, block) in blocks.iter().enumerate() {
        let seed = block_seed(cfg.seed, half, sweep, b);
        let candidate = match half {
            HalfStep::Channel => {
                let mut probe = alloc.clone();
                for &d in block {
                    if probe.power_w[d] == 0.0 {
                        probe.power_w[d] = radio.p_max_w;
                    }
                }
                let q = build_channel_qubo(radio, state, &probe, block, &cfg.penalties)?;
                let (bits, energy) = solve_qubo_block(&q, cfg.solver, &cfg.qaoa, seed)?;
                out.energy += energy;
                match decode_solution(&q, &unpack_bits(bits, q.n_vars()))? {
                    Decoded::Channels { choices, conflicts } if conflicts.is_empty() => {
                        let mut cand = alloc.clone();
                        for (d, ch) in choices {
                            match ch {
                                Some(c) => cand.assign(d, c, probe.power_w[d]),
                                None => cand.silence(d),
                            }
                        }
                        Some(cand)
                    }
                    _ => None,
                }
            }
            HalfStep::Power => {
                let q = build_power_qubo(
                    radio,
                    state,
                    &alloc,
                    block,
                    cfg.q_bits,
                    &cfg.penalties,
                    cfg.surrogate,
                )?;
                let (bits, energy) = solve_qubo_block(&q, cfg.solver, &cfg.qaoa, seed)?;
                out.energy += energy;
                match decode_solution(&q, &unpack_bits(bits, q.n_vars()))? {
                    Decoded::Powers(powers) => {
                        let mut cand = alloc.clone();
                        for (d, p) in powers {
                            match cand.channel_of[d] {
                                Some(_) if p > 0.0 => cand.power_w[d] = p,
                                _ => cand.silence(d),
                            }
                        }
                        Some(cand)
                    }
                    Decoded::Channels { .. } => None,
                }
            }
        };
        match candidate {
            Some(cand) => {
                let r = current_rate(radio, state, &cand);
                if r >= rate {
                    alloc = cand;
                    rate = r;
                    out.accepted += 1;
                } else {
                    out.rejected += 1;
                }
            }
            None => out.rejected += 1,
        }
    }
    out.alloc = alloc;
    Ok(out)
}

/// Classical channel half-step: each device in turn moves to the channel
/// maximizing its own rate, kept only if the sum-rate does not drop.
fn best_response_channels(
    radio: &RadioParams,
    state: &ChannelState,
    current: &AllocationState,
) -> BlockSweep {
    let mut alloc = current.clone();
    let mut rate = current_rate(radio, state, &alloc);
    let (mut accepted, mut rejected) = (0, 0);
    for d in 0..alloc.n_devices() {
        let power = if alloc.power_w[d] > 0.0 { alloc.power_w[d] } else { radio.p_max_w };
        let mut best = (0, f64::NEG_INFINITY);
        for c in 0..state.n_channels() {
            let s = state.legit_gain(d, c) * power
                / (radio.noise_w + crate::scenario::interference(state, &alloc, d, c));
            if s > best.1 {
                best = (c, s);
            }
        }
        let mut cand = alloc.clone();
        cand.assign(d, best.0, power);
        let r = current_rate(radio, state, &cand);
        if r >= rate {
            alloc = cand;
            rate = r;
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    BlockSweep {
        alloc,
        energy: 0.0,
        accepted,
        rejected,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdIteration {
    /// 1-based iteration index.
    pub iter: usize,
    pub sum_rate: f64,
    pub latency_s: f64,
    pub channel_energy: Option<f64>,
    pub power_energy: Option<f64>,
    /// Whether any block update was kept in this iteration.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdTrace {
    pub solver: Solver,
    pub mode: BcdMode,
    pub seed: u64,
    /// Fingerprint of the scenario and channel block the run used.
    pub scenario_id: u64,
    pub initial: AllocationState,
    pub initial_sum_rate: f64,
    pub iterations: Vec<BcdIteration>,
    pub final_alloc: AllocationState,
    pub converged: bool,
    /// Wall-clock runtime, filled in by callers that can measure it.
    pub wall_clock_s: Option<f64>,
}

impl BcdTrace {
    pub fn final_sum_rate(&self) -> f64 {
        self.iterations.last().map_or(self.initial_sum_rate, |i| i.sum_rate)
    }

    pub fn final_latency(&self) -> f64 {
        self.iterations.last().map_or(f64::NAN, |i| i.latency_s)
    }

    pub fn label(&self) -> String {
        alloc::format!("{}/{}", self.solver, self.mode)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            label: self.label(),
            scenario_id: self.scenario_id,
            final_sum_rate: self.final_sum_rate(),
            final_latency_s: self.final_latency(),
            iterations: self.iterations.len(),
            converged: self.converged,
            wall_clock_s: self.wall_clock_s,
        }
    }
}

/// Stable fingerprint of a scenario and a channel realization.
pub fn scenario_fingerprint(scn: &NetworkScenario, state: &ChannelState) -> u64 {
    let mut bytes = Vec::new();
    let cfg = scn.config();
    for v in [cfg.n_devices as u64, cfg.n_channels as u64, cfg.seed, state.block_index()] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in [cfg.noise_dbm, cfg.bandwidth_hz, cfg.p_max_dbm] {
        bytes.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    for n in 0..state.n_devices() {
        for c in 0..state.n_channels() {
            bytes.extend_from_slice(&state.legit_gain(n, c).to_bits().to_le_bytes());
        }
    }
    for g in state.interf_gain_table() {
        bytes.extend_from_slice(&g.to_bits().to_le_bytes());
    }
    rng::fnv1a(&bytes)
}

/// Initial allocation used by `solver`.
pub fn initial_allocation(solver: Solver, radio: &RadioParams, state: &ChannelState) -> AllocationState {
    match solver {
        Solver::Qaoa | Solver::Exact => {
            AllocationState::round_robin(state.n_devices(), state.n_channels(), radio.p_max_w)
        }
        Solver::GreedySeeded | Solver::Sca => greedy_allocation(radio, state),
    }
}

/// Runs BCD from the solver's initial allocation.
pub fn bcd_optimize(scn: &NetworkScenario, state: &ChannelState, cfg: &BcdConfig) -> Result<BcdTrace> {
    let radio = scn.radio();
    let init = initial_allocation(cfg.solver, &radio, state);
    bcd_optimize_from(&radio, state, init, cfg, scenario_fingerprint(scn, state))
}

/// Runs BCD from an explicit starting allocation.
pub fn bcd_optimize_from(
    radio: &RadioParams,
    state: &ChannelState,
    init: AllocationState,
    cfg: &BcdConfig,
    scenario_id: u64,
) -> Result<BcdTrace> {
    cfg.validate()?;
    init.check_feasible(state.n_channels(), radio.p_max_w)?;
    let blocks = cfg.blocks.blocks(state.n_devices());
    let mut alloc = init.clone();
    let initial_sum_rate = current_rate(radio, state, &alloc);
    let mut prev = initial_sum_rate;
    let mut iterations = Vec::new();
    let mut stalled = 0;
    let mut converged = false;

    for it in 0..cfg.max_iters {
        let mut accepted = false;
        let mut channel_energy = None;
        let mut power_energy = None;
        if cfg.mode.updates_channels() {
            let sweep = match cfg.solver {
                Solver::Sca => best_response_channels(radio, state, &alloc),
                _ => solve_block_decomposed(radio, state, &alloc, &blocks, HalfStep::Channel, cfg, it)?,
            };
            if cfg.solver != Solver::Sca {
                channel_energy = Some(sweep.energy);
            }
            accepted |= sweep.accepted > 0;
            alloc = sweep.alloc;
        }
        if cfg.mode.updates_powers() {
            match cfg.solver {
                Solver::Sca => {
                    let before = current_rate(radio, state, &alloc);
                    let out = sca_power_allocation(radio, state, &alloc, cfg.sca_iters)?;
                    if current_rate(radio, state, &out.alloc) >= before {
                        alloc = out.alloc;
                        accepted = true;
                    }
                }
                _ => {
                    let sweep =
                        solve_block_decomposed(radio, state, &alloc, &blocks, HalfStep::Power, cfg, it)?;
                    power_energy = Some(sweep.energy);
                    accepted |= sweep.accepted > 0;
                    alloc = sweep.alloc;
                }
            }
        }

        let rates = device_rates(state, &alloc, radio.noise_w, radio.bandwidth_hz);
        let sum_rate: f64 = rates.iter().sum();
        iterations.push(BcdIteration {
            iter: it + 1,
            sum_rate,
            latency_s: latency_from_rates(&alloc, &rates, &cfg.latency),
            channel_energy,
            power_energy,
            accepted,
        });
        let rel = math::abs(sum_rate - prev) / prev.max(f64::MIN_POSITIVE);
        prev = sum_rate;
        stalled = if rel < cfg.tol { stalled + 1 } else { 0 };
        if stalled >= cfg.patience {
            converged = true;
            break;
        }
    }

    Ok(BcdTrace {
        solver: cfg.solver,
        mode: cfg.mode,
        seed: cfg.seed,
        scenario_id,
        initial: init,
        initial_sum_rate,
        iterations,
        final_alloc: alloc,
        converged,
        wall_clock_s: None,
    })
}

/// Relative improvement of `a` over `b`: `(a - b) / b`.
pub fn relative_improvement(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b) / b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    pub scenario_id: u64,
    pub final_sum_rate: f64,
    pub final_latency_s: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Informational only.
    pub wall_clock_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseImprovement {
    /// Index of the run being compared.
    pub run: usize,
    /// Index of the reference run.
    pub baseline: usize,
    /// `(rate_run - rate_baseline) / rate_baseline`.
    pub sum_rate_gain: f64,
    /// `(latency_baseline - latency_run) / latency_baseline`.
    pub latency_reduction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub runs: Vec<RunSummary>,
    /// Every ordered pair of distinct runs.
    pub pairs: Vec<PairwiseImprovement>,
}

impl ComparisonReport {
    pub fn pair(&self, run: usize, baseline: usize) -> Option<&PairwiseImprovement> {
        self.pairs.iter().find(|p| p.run == run && p.baseline == baseline)
    }
}

/// Percentage-style comparison of runs on the same scenario.
pub fn compare_runs(traces: &[BcdTrace]) -> Result<ComparisonReport> {
    compare_summaries(traces.iter().map(BcdTrace::summary).collect())
}

/// [`compare_runs`] on already summarized runs.
pub fn compare_summaries(runs: Vec<RunSummary>) -> Result<ComparisonReport> {
    if runs.len() < 2 {
        return Err(Error::argument("comparison needs at least two runs"));
    }
    if runs.iter().any(|r| r.scenario_id != runs[0].scenario_id) {
        return Err(Error::argument("runs come from different scenarios"));
    }
    let mut pairs = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        for (j, b) in runs.iter().enumerate() {
            if i == j {
                continue;
            }
            let lat = if a.final_latency_s == b.final_latency_s {
                0.0
            } else {
                (b.final_latency_s - a.final_latency_s) / b.final_latency_s
            };
            pairs.push(PairwiseImprovement {
                run: i,
                baseline: j,
                sum_rate_gain: relative_improvement(a.final_sum_rate, b.final_sum_rate),
                latency_reduction: lat,
            });
        }
    }
    Ok(ComparisonReport { runs, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn names_round_trip() {
        for s in Solver::ALL {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
        }
        for m in BcdMode::ALL {
            assert_eq!(m.name().parse::<BcdMode>().unwrap(), m);
        }
        assert!("annealer".parse::<Solver>().is_err());
    }

    #[test]
    fn block_plans() {
        assert_eq!(BlockPlan::Monolithic.blocks(3), vec![vec![0, 1, 2]]);
        assert_eq!(BlockPlan::Groups(2).blocks(5), vec![vec![0, 1], vec![2, 3], vec![4]]);
    }

    #[test]
    fn latency_examples() {
        let mut alloc = AllocationState::silent(2);
        alloc.assign(0, 0, 0.1);
        let lm = LatencyModel {
            model_bits: 1e6,
            aggregation: Aggregation::Max,
        };
        assert_eq!(latency_from_rates(&alloc, &[1e6, 0.0], &lm), 1.0);
        alloc.assign(1, 0, 0.1);
        assert_eq!(latency_from_rates(&alloc, &[1e6, 0.0], &lm), f64::INFINITY);
        let rates = [1e6, 4e6];
        let max = latency_from_rates(&alloc, &rates, &lm);
        let doubled = latency_from_rates(&alloc, &[2e6, 8e6], &lm);
        assert_eq!(doubled, max / 2.0);
        let mean = latency_from_rates(
            &alloc,
            &rates,
            &LatencyModel {
                aggregation: Aggregation::Mean,
                ..lm
            },
        );
        assert!(max >= mean);
        assert_eq!(latency_from_rates(&AllocationState::silent(2), &[0.0, 0.0], &lm), 0.0);
    }

    #[test]
    fn default_payload_is_640_bits() {
        assert_eq!(LatencyModel::default().model_bits, 640.0);
    }

    #[test]
    fn improvement_arithmetic() {
        assert_eq!(relative_improvement(80.0, 40.0), 1.0);
        assert_eq!(relative_improvement(40.0, 40.0), 0.0);
        assert_eq!(relative_improvement(40.0, 80.0), -0.5);
    }

    #[test]
    fn bad_configs() {
        let bad = [
            BcdConfig { max_iters: 0, ..BcdConfig::default() },
            BcdConfig { patience: 0, ..BcdConfig::default() },
            BcdConfig { blocks: BlockPlan::Groups(0), ..BcdConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }
}
