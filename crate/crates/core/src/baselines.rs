//! Classical reference solvers: exhaustive oracles, greedy channel
//! placement and SCA power control.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::qubo::{power_step, QuboProblem};
use crate::scenario::{
    device_rates, interference, rate_from_sinr, sum_rate, AllocationState, ChannelState,
    RadioParams,
};
use crate::{Error, Result};

/// Variable limit of [`brute_force_qubo`].
pub const MAX_BRUTE_FORCE_VARS: usize = 22;
/// Joint-grid size limit of [`brute_force_allocation`].
pub const MAX_ALLOCATION_GRID: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct QuboBruteForceReport {
    pub best_bits: u64,
    pub best_energy: f64,
    pub evaluated: u64,
}

/// Exact QUBO minimum by full enumeration. Ties resolve to the smallest
/// bitstring read as an integer.
pub fn brute_force_qubo(q: &QuboProblem) -> Result<QuboBruteForceReport> {
    let n = q.n_vars();
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(Error::Resource {
            what: "QUBO variable count",
            requested: n as u64,
            limit: MAX_BRUTE_FORCE_VARS as u64,
        });
    }
    let mut best = (0u64, q.energy_bits(0));
    for x in 1..1u64 << n {
        let e = q.energy_bits(x);
        if e < best.1 {
            best = (x, e);
        }
    }
    Ok(QuboBruteForceReport {
        best_bits: best.0,
        best_energy: best.1,
        evaluated: 1 << n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceReport {
    pub best_alloc: AllocationState,
    /// True sum-rate of `best_alloc`, bits/s.
    pub best_value: f64,
    pub evaluated: u64,
}

/// Zero plus eight levels log-spaced over 30 dB up to `P_max`.
pub fn default_power_grid(p_max_w: f64) -> Vec<f64> {
    let mut levels = vec![0.0];
    levels.extend((0..8).rev().map(|k| p_max_w * math::powf(10.0, -3.0 * k as f64 / 7.0)));
    levels
}

/// Every level reachable by a `q_bits` power code.
pub fn quantized_power_grid(p_max_w: f64, q_bits: u32) -> Vec<f64> {
    let step = power_step(p_max_w, q_bits);
    (0..1u64 << q_bits).map(|k| step * k as f64).collect()
}

/// Maximizes the true sum-rate over every joint choice of channel (or none)
/// and grid power per device.
///
/// A device on a channel at zero grid power is treated as silent. Ties keep
/// the first configuration in enumeration order.
pub fn brute_force_allocation(
    radio: &RadioParams,
    state: &ChannelState,
    power_levels: &[f64],
) -> Result<BruteForceReport> {
    if power_levels.is_empty() {
        return Err(Error::argument("power grid is empty"));
    }
    if power_levels
        .iter()
        .any(|&p| !(p.is_finite() && p >= 0.0 && p <= radio.p_max_w * (1.0 + 1e-12)))
    {
        return Err(Error::argument("power levels must lie in [0, P_max]"));
    }
    let n = state.n_devices();
    let levels = power_levels.len() as u64;
    let options = (state.n_channels() as u64 + 1) * levels;
    let total = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(options));
    let total = match total {
        Some(t) if t <= MAX_ALLOCATION_GRID => t,
        _ => {
            return Err(Error::Resource {
                what: "allocation grid size",
                requested: total.unwrap_or(u64::MAX),
                limit: MAX_ALLOCATION_GRID,
            })
        }
    };

    let mut digits = vec![0u64; n];
    let mut alloc = AllocationState::silent(n);
    let mut best: Option<(AllocationState, f64)> = None;
    for idx in 0..total {
        if idx > 0 {
            // mixed-radix increment
            for d in digits.iter_mut() {
                *d += 1;
                if *d < options {
                    break;
                }
                *d = 0;
            }
        }
        for (dev, &o) in digits.iter().enumerate() {
            let ch = (o / levels) as usize;
            let p = power_levels[(o % levels) as usize];
            if ch == 0 || p == 0.0 {
                alloc.silence(dev);
            } else {
                alloc.assign(dev, ch - 1, p);
            }
        }
        let v = sum_rate(state, &alloc, radio.noise_w, radio.bandwidth_hz);
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((alloc.clone(), v));
        }
    }
    let (best_alloc, best_value) = best.expect("grid is non-empty");
    Ok(BruteForceReport {
        best_alloc,
        best_value,
        evaluated: total,
    })
}

/// Greedy channel placement at full power.
///
/// Devices are visited by decreasing best legitimate gain (index order on
/// ties); each takes the channel maximizing its own rate given the devices
/// already placed.
pub fn greedy_allocation(radio: &RadioParams, state: &ChannelState) -> AllocationState {
    let n = state.n_devices();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        state
            .best_channel(b)
            .1
            .total_cmp(&state.best_channel(a).1)
            .then(a.cmp(&b))
    });
    let mut alloc = AllocationState::silent(n);
    for dev in order {
        let mut best = (0, f64::NEG_INFINITY);
        for c in 0..state.n_channels() {
            let s = state.legit_gain(dev, c) * radio.p_max_w
                / (radio.noise_w + interference(state, &alloc, dev, c));
            let r = rate_from_sinr(s, radio.bandwidth_hz);
            if r > best.1 {
                best = (c, r);
            }
        }
        alloc.assign(dev, best.0, radio.p_max_w);
    }
    alloc
}

/// One SCA round's separable surrogate, evaluated at the round's starting
/// point and at its maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateStep {
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    /// Final allocation; channels are those of the start point.
    pub alloc: AllocationState,
    pub surrogate: Vec<SurrogateStep>,
    /// True sum-rate at the start and after every round.
    pub true_sum_rate: Vec<f64>,
}

/// Smallest power SCA assigns to a transmitting device, relative to `P_max`.
pub const SCA_POWER_FLOOR: f64 = 1e-3;

/// Successive convex approximation of the power sub-problem.
///
/// Each round freezes all interference at the current iterate. Device `m`
/// on channel `c` then maximizes the concave surrogate
/// `B log2(1 + a_m p) - pi_m p`, where `a_m = h_mc / (sigma^2 + I_m)` and
/// `pi_m` is the first-order rate loss `m` causes its co-channel neighbours
/// per watt. The maximizer has the closed form `B / (ln2 pi_m) - 1 / a_m`,
/// clipped to `[SCA_POWER_FLOOR * P_max, P_max]`. All devices update
/// simultaneously, so the round's surrogate never decreases.
pub fn sca_power_allocation(
    radio: &RadioParams,
    state: &ChannelState,
    start: &AllocationState,
    iters: usize,
) -> Result<ScaOutcome> {
    start.check_feasible(state.n_channels(), radio.p_max_w)?;
    let scale = radio.bandwidth_hz / math::LN_2;
    let floor = SCA_POWER_FLOOR * radio.p_max_w;
    let mut alloc = start.clone();
    let mut surrogate = Vec::with_capacity(iters);
    let mut true_trace = vec![sum_rate(state, &alloc, radio.noise_w, radio.bandwidth_hz)];

    for _ in 0..iters {
        let members: Vec<(usize, usize)> = alloc.transmitting().collect();
        let base: Vec<f64> = (0..alloc.n_devices())
            .map(|m| match alloc.channel_of[m] {
                Some(c) => radio.noise_w + interference(state, &alloc, m, c),
                None => radio.noise_w,
            })
            .collect();
        let mut next = alloc.clone();
        let mut step = SurrogateStep { before: 0.0, after: 0.0 };
        let mut max_change: f64 = 0.0;
        for &(m, c) in &members {
            let a = state.legit_gain(m, c) / base[m];
            let price: f64 = members
                .iter()
                .filter(|&&(k, ck)| k != m && ck == c)
                .map(|&(k, _)| {
                    let signal = state.legit_gain(k, c) * alloc.power_w[k];
                    scale * state.interf_gain(m, k, c) * signal / (base[k] * (base[k] + signal))
                })
                .sum();
            let p_opt = if price <= 0.0 || a == 0.0 {
                radio.p_max_w
            } else {
                scale / price - 1.0 / a
            }
            .clamp(floor, radio.p_max_w);
            let f = |p: f64| radio.bandwidth_hz * math::log2(1.0 + a * p) - price * p;
            step.before += f(alloc.power_w[m]);
            step.after += f(p_opt);
            max_change = max_change.max(math::abs(p_opt - alloc.power_w[m]) / radio.p_max_w);
            next.power_w[m] = p_opt;
        }
        alloc = next;
        surrogate.push(step);
        true_trace.push(sum_rate(state, &alloc, radio.noise_w, radio.bandwidth_hz));
        if max_change < 1e-9 {
            break;
        }
    }
    Ok(ScaOutcome {
        alloc,
        surrogate,
        true_sum_rate: true_trace,
    })
}

/// Per-device rates of an allocation, re-exported for reporting.
pub fn rates(radio: &RadioParams, state: &ChannelState, alloc: &AllocationState) -> Vec<f64> {
    device_rates(state, alloc, radio.noise_w, radio.bandwidth_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radio() -> RadioParams {
        RadioParams {
            noise_w: 1e-14,
            bandwidth_hz: 1e6,
            p_max_w: 0.1,
        }
    }

    #[test]
    fn diag_qubo_minimum() {
        let mut q = QuboProblem::generic(2);
        q.add(0, 0, 1.0);
        q.add(1, 1, -1.0);
        let r = brute_force_qubo(&q).unwrap();
        assert_eq!(r.best_bits, 0b10);
        assert_eq!(r.best_energy, -1.0);
        assert_eq!(r.evaluated, 4);
    }

    #[test]
    fn zero_qubo_ties_to_lowest() {
        let mut q = QuboProblem::generic(2);
        q.set_offset(2.5);
        let r = brute_force_qubo(&q).unwrap();
        assert_eq!((r.best_bits, r.best_energy), (0, 2.5));
    }

    #[test]
    fn qubo_budget() {
        let q = QuboProblem::generic(23);
        assert!(matches!(brute_force_qubo(&q), Err(Error::Resource { .. })));
    }

    #[test]
    fn grids() {
        let g = default_power_grid(0.1);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 0.1);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(quantized_power_grid(0.1, 2).len(), 4);
    }

    #[test]
    fn single_device_brute_force_and_greedy() {
        let st = ChannelState::from_gains(1, 3, vec![1e-12, 5e-12, 2e-12], |_, _, _| 0.0).unwrap();
        let r = brute_force_allocation(&radio(), &st, &[0.0, 0.05, 0.1]).unwrap();
        assert_eq!(r.best_alloc.channel_of, vec![Some(1)]);
        assert_eq!(r.best_alloc.power_w, vec![0.1]);
        assert_eq!(r.evaluated, 12);
        let g = greedy_allocation(&radio(), &st);
        assert_eq!(g.channel_of, vec![Some(1)]);
        assert_eq!(g.power_w, vec![0.1]);
    }

    #[test]
    fn allocation_budget() {
        let st = ChannelState::from_gains(8, 4, vec![1e-12; 32], |_, _, _| 1e-13).unwrap();
        let r = brute_force_allocation(&radio(), &st, &default_power_grid(0.1));
        assert!(matches!(r, Err(Error::Resource { .. })));
    }

    #[test]
    fn sca_single_device_goes_to_full_power() {
        let st = ChannelState::from_gains(1, 1, vec![1e-12], |_, _, _| 0.0).unwrap();
        let mut start = AllocationState::silent(1);
        start.assign(0, 0, 0.05);
        let out = sca_power_allocation(&radio(), &st, &start, 10).unwrap();
        assert_eq!(out.alloc.power_w, vec![0.1]);
        assert!(out.surrogate.len() <= 2);
    }

    #[test]
    fn sca_symmetric_pair_stays_symmetric() {
        let st = ChannelState::from_gains(2, 1, vec![1e-12, 1e-12], |_, _, _| 4e-13).unwrap();
        let mut start = AllocationState::silent(2);
        start.assign(0, 0, 0.05);
        start.assign(1, 0, 0.05);
        let out = sca_power_allocation(&radio(), &st, &start, 50).unwrap();
        assert_eq!(out.alloc.power_w[0], out.alloc.power_w[1]);
        for s in &out.surrogate {
            assert!(s.after >= s.before - 1e-9 * s.before.abs());
        }
    }
}
