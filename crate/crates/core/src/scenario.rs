//! Uplink NOMA network geometry, block-fading channel evolution and rate
//! evaluation.
//!
//! Powers are stored in linear watts throughout; dBm appears only in
//! [`ScenarioConfig`]. Channel gains follow `h = pathloss * shadowing * |g|`
//! where `g` is the complex small-scale coefficient of the link.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;
use crate::rng;
use crate::{Error, Result};

/// Default reference path loss at 1 m, in dB.
pub const DEFAULT_REFERENCE_LOSS_DB: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_devices: usize,
    pub n_channels: usize,
    /// Radius of the disc around the base station holding the devices.
    pub cell_radius_m: f64,
    pub pathloss_exponent: f64,
    /// Path loss at the 1 m reference distance.
    pub reference_loss_db: f64,
    pub shadowing_sigma_db: f64,
    /// Correlation factor between successive fading blocks, in `[0, 1)`.
    pub epsilon: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
    pub p_max_dbm: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_devices: 50,
            n_channels: 4,
            cell_radius_m: 500.0,
            pathloss_exponent: 3.5,
            reference_loss_db: DEFAULT_REFERENCE_LOSS_DB,
            shadowing_sigma_db: 8.0,
            epsilon: 0.6,
            noise_dbm: -114.0,
            bandwidth_hz: 1e6,
            p_max_dbm: 20.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_devices == 0 {
            return Err(Error::config("n_devices must be at least 1"));
        }
        if self.n_channels == 0 {
            return Err(Error::config("n_channels must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon must lie in [0, 1)"));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::config("bandwidth_hz must be positive"));
        }
        if !(self.cell_radius_m.is_finite() && self.cell_radius_m > 0.0) {
            return Err(Error::config("cell_radius_m must be positive"));
        }
        if !(self.shadowing_sigma_db.is_finite() && self.shadowing_sigma_db >= 0.0) {
            return Err(Error::config("shadowing_sigma_db must be non-negative"));
        }
        for (name, v) in [
            ("pathloss_exponent", self.pathloss_exponent),
            ("reference_loss_db", self.reference_loss_db),
            ("noise_dbm", self.noise_dbm),
            ("p_max_dbm", self.p_max_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::config(alloc::format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn noise_w(&self) -> f64 {
        math::dbm_to_watts(self.noise_dbm)
    }

    pub fn p_max_w(&self) -> f64 {
        math::dbm_to_watts(self.p_max_dbm)
    }
}

/// Link-budget constants shared by every rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub noise_w: f64,
    pub bandwidth_hz: f64,
    pub p_max_w: f64,
}

/// Static part of a scenario: geometry and the large-scale (path loss times
/// shadowing) component of every link. Fixed for the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    config: ScenarioConfig,
    positions: Vec<[f64; 2]>,
    legit_large: Vec<f64>,
    interf_large: Vec<f64>,
}

/// Maps `(from, to, channel)` with `from != to` onto a dense index.
#[inline]
fn interf_index(n_devices: usize, n_channels: usize, from: usize, to: usize, c: usize) -> usize {
    debug_assert_ne!(from, to);
    let to_adj = if to < from { to } else { to - 1 };
    (from * (n_devices - 1) + to_adj) * n_channels + c
}

impl NetworkScenario {
    /// Rebuilds a scenario from stored parts, e.g. a snapshot file.
    pub fn from_parts(
        config: ScenarioConfig,
        positions: Vec<[f64; 2]>,
        legit_large: Vec<f64>,
        interf_large: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let (n, c) = (config.n_devices, config.n_channels);
        if positions.len() != n {
            return Err(Error::config("positions length does not match n_devices"));
        }
        if legit_large.len() != n * c {
            return Err(Error::config("legitimate gain table has the wrong size"));
        }
        if interf_large.len() != n * (n - 1) * c {
            return Err(Error::config("interference gain table has the wrong size"));
        }
        if legit_large
            .iter()
            .chain(&interf_large)
            .any(|g| !(g.is_finite() && *g >= 0.0))
        {
            return Err(Error::config("large-scale gains must be finite and non-negative"));
        }
        Ok(Self {
            config,
            positions,
            legit_large,
            interf_large,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn n_devices(&self) -> usize {
        self.config.n_devices
    }

    pub fn n_channels(&self) -> usize {
        self.config.n_channels
    }

    pub fn noise_w(&self) -> f64 {
        self.config.noise_w()
    }

    pub fn p_max_w(&self) -> f64 {
        self.config.p_max_w()
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.config.bandwidth_hz
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn radio(&self) -> RadioParams {
        RadioParams {
            noise_w: self.noise_w(),
            bandwidth_hz: self.bandwidth_hz(),
            p_max_w: self.p_max_w(),
        }
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    /// Large-scale gain of device `n` to the BS on channel `c`.
    pub fn legit_large(&self, n: usize, c: usize) -> f64 {
        self.legit_large[n * self.config.n_channels + c]
    }

    /// Large-scale gain of the interference link from device `from` onto the
    /// reception of device `to` on channel `c`.
    pub fn interf_large(&self, from: usize, to: usize, c: usize) -> f64 {
        self.interf_large[interf_index(self.config.n_devices, self.config.n_channels, from, to, c)]
    }

    pub fn legit_large_table(&self) -> &[f64] {
        &self.legit_large
    }

    pub fn interf_large_table(&self) -> &[f64] {
        &self.interf_large
    }

    /// Distance of device `n` from the base station at the origin.
    pub fn distance_m(&self, n: usize) -> f64 {
        let [x, y] = self.positions[n];
        math::sqrt(x * x + y * y)
    }

    /// Fading state at block 0, drawn from the scenario seed.
    pub fn initial_state(&self) -> ChannelState {
        let mut rng = rng::indexed_stream(self.config.seed, "fading", 0);
        let legit: Vec<Complex64> = (0..self.legit_large.len())
            .map(|_| rng::complex_normal(&mut rng))
            .collect();
        let interf: Vec<Complex64> = (0..self.interf_large.len())
            .map(|_| rng::complex_normal(&mut rng))
            .collect();
        ChannelState::from_fading(self, 0, legit, interf)
    }

    /// Advances the fading process one block with the configured correlation.
    pub fn advance(&self, state: &ChannelState) -> Result<ChannelState> {
        advance_fading(self, state, self.config.epsilon)
    }
}

/// Per-block channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    block_index: u64,
    n_devices: usize,
    n_channels: usize,
    fading_legit: Vec<Complex64>,
    fading_interf: Vec<Complex64>,
    legit_gain: Vec<f64>,
    interf_gain: Vec<f64>,
}

impl ChannelState {
    fn from_fading(
        scn: &NetworkScenario,
        block_index: u64,
        fading_legit: Vec<Complex64>,
        fading_interf: Vec<Complex64>,
    ) -> Self {
        let legit_gain = scn
            .legit_large
            .iter()
            .zip(&fading_legit)
            .map(|(l, g)| l * g.norm())
            .collect();
        let interf_gain = scn
            .interf_large
            .iter()
            .zip(&fading_interf)
            .map(|(l, g)| l * g.norm())
            .collect();
        Self {
            block_index,
            n_devices: scn.n_devices(),
            n_channels: scn.n_channels(),
            fading_legit,
            fading_interf,
            legit_gain,
            interf_gain,
        }
    }

    /// Builds a state directly from gain tables, without a fading process.
    ///
    /// `legit_gain` is indexed `[n * C + c]`; `interf_gain(from, to, c)` is
    /// queried for every ordered pair `from != to`. Such a state cannot be
    /// advanced.
    pub fn from_gains(
        n_devices: usize,
        n_channels: usize,
        legit_gain: Vec<f64>,
        mut interf_gain: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        if n_devices == 0 || n_channels == 0 {
            return Err(Error::argument("state needs at least one device and channel"));
        }
        if legit_gain.len() != n_devices * n_channels {
            return Err(Error::argument("legitimate gain table has the wrong size"));
        }
        let mut interf = vec![0.0; n_devices * (n_devices - 1) * n_channels];
        for from in 0..n_devices {
            for to in (0..n_devices).filter(|&t| t != from) {
                for c in 0..n_channels {
                    interf[interf_index(n_devices, n_channels, from, to, c)] =
                        interf_gain(from, to, c);
                }
            }
        }
        if legit_gain
            .iter()
            .chain(&interf)
            .any(|g| !(g.is_finite() && *g >= 0.0))
        {
            return Err(Error::argument("gains must be finite and non-negative"));
        }
        Ok(Self {
            block_index: 0,
            n_devices,
            n_channels,
            fading_legit: Vec::new(),
            fading_interf: Vec::new(),
            legit_gain,
            interf_gain: interf,
        })
    }

    pub fn block_index(&self) -> u64 {
        self.block_index
    }

    pub fn n_devices(&self) -> usize {
        self.n_devices
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn legit_gain(&self, n: usize, c: usize) -> f64 {
        self.legit_gain[n * self.n_channels + c]
    }

    pub fn interf_gain(&self, from: usize, to: usize, c: usize) -> f64 {
        self.interf_gain[interf_index(self.n_devices, self.n_channels, from, to, c)]
    }

    pub fn legit_fading(&self) -> &[Complex64] {
        &self.fading_legit
    }

    pub fn interf_fading(&self) -> &[Complex64] {
        &self.fading_interf
    }

    pub fn interf_gain_table(&self) -> &[f64] {
        &self.interf_gain
    }

    /// Best legitimate gain of device `n` over all channels, with the channel.
    pub fn best_channel(&self, n: usize) -> (usize, f64) {
        let row = &self.legit_gain[n * self.n_channels..(n + 1) * self.n_channels];
        row.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (c, &g)| if g > best.1 { (c, g) } else { best })
    }
}

/// Validates a config and draws the static scenario plus its block-0 state.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<(NetworkScenario, ChannelState)> {
    cfg.validate()?;
    let (n, c) = (cfg.n_devices, cfg.n_channels);

    let mut geo = rng::stream(cfg.seed, "geometry");
    let positions: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let r = cfg.cell_radius_m * math::sqrt(rng::uniform(&mut geo));
            let phi = 2.0 * math::PI * rng::uniform(&mut geo);
            [r * math::cos(phi), r * math::sin(phi)]
        })
        .collect();

    let pathloss_db: Vec<f64> = positions
        .iter()
        .map(|[x, y]| {
            let d = math::sqrt(x * x + y * y).max(1.0);
            cfg.reference_loss_db + 10.0 * cfg.pathloss_exponent * math::log10(d)
        })
        .collect();

    let mut shadow = rng::stream(cfg.seed, "shadowing");
    let mut large = |device: usize| {
        let shadow_db = cfg.shadowing_sigma_db * rng::standard_normal(&mut shadow);
        math::db_to_linear(-(pathloss_db[device] + shadow_db))
    };
    let mut legit_large = Vec::with_capacity(n * c);
    for dev in 0..n {
        for _ in 0..c {
            legit_large.push(large(dev));
        }
    }
    // The interference link from `from` reaches the BS over the same path as
    // `from`'s own signal, with independent shadowing per victim.
    let mut interf_large = Vec::with_capacity(n * (n - 1) * c);
    for from in 0..n {
        for _to in (0..n).filter(|&t| t != from) {
            for _ in 0..c {
                interf_large.push(large(from));
            }
        }
    }

    let scn = NetworkScenario::from_parts(cfg.clone(), positions, legit_large, interf_large)?;
    let state = scn.initial_state();
    Ok((scn, state))
}

/// One step of the first-order autoregressive (Jakes) fading recursion.
#[inline]
pub fn jakes_step(g: Complex64, epsilon: f64, innovation: Complex64) -> Complex64 {
    g * epsilon + innovation * math::sqrt(1.0 - epsilon * epsilon)
}

/// Advances every fading coefficient from block `b` to `b + 1`.
///
/// Innovations are drawn from the stream `(seed, "fading", b + 1)`, so the
/// trajectory is a pure function of the scenario seed.
pub fn advance_fading(
    scn: &NetworkScenario,
    state: &ChannelState,
    epsilon: f64,
) -> Result<ChannelState> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::argument("epsilon must lie in [0, 1)"));
    }
    if state.fading_legit.len() != scn.legit_large.len()
        || state.fading_interf.len() != scn.interf_large.len()
    {
        return Err(Error::argument("state carries no fading process for this scenario"));
    }
    let next = state.block_index + 1;
    let mut rng = rng::indexed_stream(scn.seed(), "fading", next);
    let legit = state
        .fading_legit
        .iter()
        .map(|&g| jakes_step(g, epsilon, rng::complex_normal(&mut rng)))
        .collect();
    let interf = state
        .fading_interf
        .iter()
        .map(|&g| jakes_step(g, epsilon, rng::complex_normal(&mut rng)))
        .collect();
    Ok(ChannelState::from_fading(scn, next, legit, interf))
}

/// Channel selection and transmit power of every device in one block.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationState {
    pub channel_of: Vec<Option<usize>>,
    pub power_w: Vec<f64>,
}

impl AllocationState {
    /// Every device silent: no channel, zero power.
    pub fn silent(n_devices: usize) -> Self {
        Self {
            channel_of: vec![None; n_devices],
            power_w: vec![0.0; n_devices],
        }
    }

    /// Device `n` on channel `n mod C`, all at `power_w`.
    pub fn round_robin(n_devices: usize, n_channels: usize, power_w: f64) -> Self {
        Self {
            channel_of: (0..n_devices).map(|n| Some(n % n_channels)).collect(),
            power_w: vec![power_w; n_devices],
        }
    }

    pub fn n_devices(&self) -> usize {
        self.channel_of.len()
    }

    pub fn assign(&mut self, n: usize, channel: usize, power_w: f64) {
        self.channel_of[n] = Some(channel);
        self.power_w[n] = power_w;
    }

    pub fn silence(&mut self, n: usize) {
        self.channel_of[n] = None;
        self.power_w[n] = 0.0;
    }

    /// Devices holding a channel.
    pub fn transmitting(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.channel_of
            .iter()
            .enumerate()
            .filter_map(|(n, c)| c.map(|c| (n, c)))
    }

    /// Checks the at-most-one-channel encoding, channel range and power
    /// bounds. A small relative slack absorbs rounding in decoded powers.
    pub fn check_feasible(&self, n_channels: usize, p_max_w: f64) -> Result<()> {
        if self.channel_of.len() != self.power_w.len() {
            return Err(Error::argument("channel and power vectors differ in length"));
        }
        let cap = p_max_w * (1.0 + 1e-12);
        for (n, (&ch, &p)) in self.channel_of.iter().zip(&self.power_w).enumerate() {
            if !(p.is_finite() && (0.0..=cap).contains(&p)) {
                return Err(Error::argument(alloc::format!(
                    "device {n}: power {p} W outside [0, {p_max_w}]"
                )));
            }
            match ch {
                Some(c) if c >= n_channels => {
                    return Err(Error::argument(alloc::format!(
                        "device {n}: channel {c} out of range"
                    )))
                }
                Some(_) if p == 0.0 => {
                    return Err(Error::argument(alloc::format!(
                        "device {n}: holds a channel with zero power"
                    )))
                }
                None if p != 0.0 => {
                    return Err(Error::argument(alloc::format!(
                        "device {n}: transmits without a channel"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, n_channels: usize, p_max_w: f64) -> bool {
        self.check_feasible(n_channels, p_max_w).is_ok()
    }
}

/// Co-channel interference seen at the BS when decoding device `n` on `c`.
pub fn interference(state: &ChannelState, alloc: &AllocationState, n: usize, c: usize) -> f64 {
    alloc
        .channel_of
        .iter()
        .enumerate()
        .filter(|&(m, ch)| m != n && *ch == Some(c))
        .map(|(m, _)| state.interf_gain(m, n, c) * alloc.power_w[m])
        .sum()
}

/// Received SINR of device `n` on channel `c`; zero unless `n` uses `c`.
pub fn sinr(
    state: &ChannelState,
    alloc: &AllocationState,
    noise_w: f64,
    n: usize,
    c: usize,
) -> f64 {
    if alloc.channel_of[n] != Some(c) {
        return 0.0;
    }
    state.legit_gain(n, c) * alloc.power_w[n] / (noise_w + interference(state, alloc, n, c))
}

/// Shannon rate `B log2(1 + sinr)` in bits/s.
#[inline]
pub fn rate_from_sinr(sinr: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * math::log2(1.0 + sinr)
}

/// Achievable rate of device `n` on channel `c`, in bits/s.
pub fn rate(
    state: &ChannelState,
    alloc: &AllocationState,
    noise_w: f64,
    bandwidth_hz: f64,
    n: usize,
    c: usize,
) -> f64 {
    rate_from_sinr(sinr(state, alloc, noise_w, n, c), bandwidth_hz)
}

/// Rate of every device on its selected channel (zero for silent devices).
pub fn device_rates(
    state: &ChannelState,
    alloc: &AllocationState,
    noise_w: f64,
    bandwidth_hz: f64,
) -> Vec<f64> {
    let n_ch = state.n_channels();
    // Received interference per (victim, channel) is accumulated once per
    // co-channel pair instead of rescanning all devices per victim.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_ch];
    for (n, c) in alloc.transmitting() {
        members[c].push(n);
    }
    let mut rates = vec![0.0; alloc.n_devices()];
    for (c, devs) in members.iter().enumerate() {
        for &n in devs {
            let interf: f64 = devs
                .iter()
                .filter(|&&m| m != n)
                .map(|&m| state.interf_gain(m, n, c) * alloc.power_w[m])
                .sum();
            let s = state.legit_gain(n, c) * alloc.power_w[n] / (noise_w + interf);
            rates[n] = rate_from_sinr(s, bandwidth_hz);
        }
    }
    rates
}

/// Network sum-rate in bits/s.
pub fn sum_rate(
    state: &ChannelState,
    alloc: &AllocationState,
    noise_w: f64,
    bandwidth_hz: f64,
) -> f64 {
    device_rates(state, alloc, noise_w, bandwidth_hz).iter().sum()
}

/// Sum-rate using the scenario's noise power and bandwidth.
pub fn scenario_sum_rate(scn: &NetworkScenario, state: &ChannelState, alloc: &AllocationState) -> f64 {
    sum_rate(state, alloc, scn.noise_w(), scn.bandwidth_hz())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(n: usize, c: usize, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n_devices: n,
            n_channels: c,
            seed,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small_cfg(0, 1, 0);
        assert!(generate_scenario(&cfg).is_err());
        cfg.n_devices = 1;
        cfg.n_channels = 0;
        assert!(generate_scenario(&cfg).is_err());
        cfg.n_channels = 1;
        cfg.epsilon = 1.0;
        assert!(generate_scenario(&cfg).is_err());
        cfg.epsilon = 0.6;
        cfg.bandwidth_hz = 0.0;
        assert!(matches!(generate_scenario(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn single_device_has_no_interference_links() {
        let (scn, state) = generate_scenario(&small_cfg(1, 1, 5)).unwrap();
        assert_eq!(scn.legit_large_table().len(), 1);
        assert!(scn.interf_large_table().is_empty());
        assert!(state.interf_gain_table().is_empty());
        assert!(state.legit_gain(0, 0) > 0.0);
    }

    #[test]
    fn default_preset_shape() {
        let cfg = ScenarioConfig {
            seed: 11,
            ..ScenarioConfig::default()
        };
        let (scn, state) = generate_scenario(&cfg).unwrap();
        assert_eq!((scn.n_devices(), scn.n_channels()), (50, 4));
        assert_eq!(scn.config().epsilon, 0.6);
        assert!((scn.p_max_w() - 0.1).abs() < 1e-15);
        assert_eq!(state.interf_gain_table().len(), 50 * 49 * 4);
        assert!(scn.positions().iter().all(|[x, y]| x * x + y * y <= 500.0 * 500.0));
    }

    #[test]
    fn same_seed_same_scenario() {
        let a = generate_scenario(&small_cfg(6, 3, 42)).unwrap();
        let b = generate_scenario(&small_cfg(6, 3, 42)).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&small_cfg(6, 3, 43)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn gains_follow_large_scale_times_fading_magnitude() {
        let (scn, state) = generate_scenario(&small_cfg(3, 2, 9)).unwrap();
        for n in 0..3 {
            for c in 0..2 {
                let g = state.legit_fading()[n * 2 + c];
                assert_eq!(state.legit_gain(n, c), scn.legit_large(n, c) * g.norm());
            }
        }
        let next = scn.advance(&state).unwrap();
        assert_eq!(next.block_index(), 1);
        assert_eq!(scn.legit_large(0, 0), scn.legit_large(0, 0));
        assert_ne!(next.legit_gain(0, 0), state.legit_gain(0, 0));
    }

    #[test]
    fn epsilon_zero_discards_history() {
        let (scn, state) = generate_scenario(&small_cfg(2, 1, 1)).unwrap();
        let a = advance_fading(&scn, &state, 0.0).unwrap();
        // Same innovations, different history: at epsilon 0 the result must not
        // depend on the previous coefficients.
        let mut other = state.clone();
        for g in other.fading_legit.iter_mut() {
            *g = Complex64::new(5.0, -3.0);
        }
        let b = advance_fading(&scn, &other, 0.0).unwrap();
        assert_eq!(a.legit_fading(), b.legit_fading());
    }

    #[test]
    fn synthetic_state_cannot_advance() {
        let (scn, _) = generate_scenario(&small_cfg(1, 1, 1)).unwrap();
        let st = ChannelState::from_gains(1, 1, vec![1.0], |_, _, _| 0.0).unwrap();
        assert!(advance_fading(&scn, &st, 0.5).is_err());
    }

    #[test]
    fn sinr_of_unused_channel_is_zero() {
        let st = ChannelState::from_gains(1, 2, vec![1e-12, 1e-12], |_, _, _| 0.0).unwrap();
        let mut alloc = AllocationState::silent(1);
        alloc.assign(0, 0, 0.1);
        assert_eq!(sinr(&st, &alloc, 1e-15, 0, 1), 0.0);
        assert!(sinr(&st, &alloc, 1e-15, 0, 0) > 0.0);
    }

    #[test]
    fn single_device_sinr_value() {
        // 2e-13 * 0.1 / 10^-14.4, evaluated by hand: 5.02377...
        let noise = math::dbm_to_watts(-114.0);
        let st = ChannelState::from_gains(1, 1, vec![2e-13], |_, _, _| 0.0).unwrap();
        let mut alloc = AllocationState::silent(1);
        alloc.assign(0, 0, 0.1);
        let s = sinr(&st, &alloc, noise, 0, 0);
        assert!((s - 5.023_772_863_019_165).abs() < 1e-9, "{s}");
    }

    #[test]
    fn interference_lowers_sinr() {
        let st = ChannelState::from_gains(2, 1, vec![1e-12, 1e-12], |_, _, _| 1e-12).unwrap();
        let mut alone = AllocationState::silent(2);
        alone.assign(0, 0, 0.1);
        let mut shared = alone.clone();
        shared.assign(1, 0, 0.1);
        let noise = 1e-14;
        assert!(sinr(&st, &shared, noise, 0, 0) < sinr(&st, &alone, noise, 0, 0));
        assert!(sinr(&st, &shared, noise, 1, 0) < 1e-12 * 0.1 / noise);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_from_sinr(1.0, 1e6), 1e6);
        assert_eq!(rate_from_sinr(0.0, 1e6), 0.0);
        assert_eq!(rate_from_sinr(3.0, 2e6), 4e6);
    }

    #[test]
    fn empty_allocation_has_zero_sum_rate() {
        let (scn, st) = generate_scenario(&small_cfg(4, 2, 3)).unwrap();
        assert_eq!(scenario_sum_rate(&scn, &st, &AllocationState::silent(4)), 0.0);
    }

    #[test]
    fn single_device_sum_rate_is_its_rate() {
        let (scn, st) = generate_scenario(&small_cfg(1, 3, 8)).unwrap();
        let (c, _) = st.best_channel(0);
        let mut alloc = AllocationState::silent(1);
        alloc.assign(0, c, scn.p_max_w());
        let r = rate(&st, &alloc, scn.noise_w(), scn.bandwidth_hz(), 0, c);
        assert_eq!(scenario_sum_rate(&scn, &st, &alloc), r);
    }

    #[test]
    fn feasibility_checks() {
        let mut a = AllocationState::silent(2);
        assert!(a.is_feasible(2, 0.1));
        a.channel_of[0] = Some(1);
        assert!(!a.is_feasible(2, 0.1), "channel without power");
        a.power_w[0] = 0.1;
        assert!(a.is_feasible(2, 0.1));
        a.power_w[0] = 0.2;
        assert!(!a.is_feasible(2, 0.1));
        a.power_w[0] = 0.1;
        a.channel_of[0] = Some(2);
        assert!(!a.is_feasible(2, 0.1));
    }
}
