//! QUBO models for the two allocation sub-problems and their spin form.
//!
//! Both builders minimize `-lambda_rate * linearized_rate + penalties`, with
//! every penalty non-negative so constraint violations always raise the
//! energy. The linearization freezes the interference seen by each device at
//! the current allocation iterate.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::scenario::{interference, AllocationState, ChannelState, RadioParams};
use crate::{Error, Result};

/// Largest number of power bits per device accepted by [`build_power_qubo`].
pub const MAX_Q_BITS: u32 = 16;

/// Semantic meaning of one QUBO variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuboVar {
    /// Device `device` transmits on `channel`.
    Channel { device: usize, channel: usize },
    /// Bit `bit` (weight `2^bit`) of the power code of `device`.
    PowerBit { device: usize, bit: u32 },
    /// Plain variable without allocation meaning.
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuboKind {
    ChannelSelection,
    /// Power decoded as `step_w * sum_i 2^i x_i`.
    PowerAllocation { q_bits: u32, step_w: f64 },
    Generic,
}

/// `min x^T Q x + offset` over `x in {0,1}^n` with `Q` stored upper
/// triangular (diagonal included).
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n_vars: usize,
    q: Vec<f64>,
    offset: f64,
    kind: QuboKind,
    var_map: Vec<QuboVar>,
}

impl QuboProblem {
    pub fn new(kind: QuboKind, var_map: Vec<QuboVar>) -> Self {
        let n = var_map.len();
        Self {
            n_vars: n,
            q: vec![0.0; n * n],
            offset: 0.0,
            kind,
            var_map,
        }
    }

    /// Zero problem over `n_vars` anonymous variables.
    pub fn generic(n_vars: usize) -> Self {
        Self::new(QuboKind::Generic, (0..n_vars).map(QuboVar::Index).collect())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn kind(&self) -> QuboKind {
        self.kind
    }

    pub fn var_map(&self) -> &[QuboVar] {
        &self.var_map
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    /// Adds `v` to the coupling of `x_i x_j`; `(j, i)` folds onto `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.q[i * self.n_vars + j] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.q[i * self.n_vars + j]
    }

    /// Non-zero upper-triangular entries `(i, j, value)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_vars;
        (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = self.q[i * n + j];
                (v != 0.0).then_some((i, j, v))
            })
            .collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.q.iter().fold(0.0, |m: f64, v| m.max(math::abs(*v)))
    }

    /// `x^T Q x + offset`, accumulated row by row.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n_vars {
            return Err(Error::argument(alloc::format!(
                "bitstring has {} entries, problem has {} variables",
                x.len(),
                self.n_vars
            )));
        }
        let n = self.n_vars;
        let mut e = self.offset;
        for i in (0..n).filter(|&i| x[i]) {
            let row = &self.q[i * n..(i + 1) * n];
            for j in (i..n).filter(|&j| x[j]) {
                e += row[j];
            }
        }
        Ok(e)
    }

    /// Energy of the bitstring packed into an integer, variable `i` at bit
    /// `i`. Requires `n_vars <= 64`.
    pub fn energy_bits(&self, bits: u64) -> f64 {
        debug_assert!(self.n_vars <= 64);
        let n = self.n_vars;
        let mut e = self.offset;
        for i in (0..n).filter(|&i| bits >> i & 1 == 1) {
            let row = &self.q[i * n..(i + 1) * n];
            for j in (i..n).filter(|&j| bits >> j & 1 == 1) {
                e += row[j];
            }
        }
        e
    }

    /// For channel-selection problems: no device selects two channels.
    /// Always true for other kinds.
    pub fn is_feasible_bits(&self, bits: u64) -> bool {
        if self.kind != QuboKind::ChannelSelection {
            return true;
        }
        let mut seen: Vec<usize> = Vec::new();
        for (i, var) in self.var_map.iter().enumerate() {
            if let QuboVar::Channel { device, .. } = *var {
                if bits >> i & 1 == 1 {
                    if seen.contains(&device) {
                        return false;
                    }
                    seen.push(device);
                }
            }
        }
        true
    }

    /// Devices covered by this problem, in variable order.
    pub fn devices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for var in &self.var_map {
            let d = match *var {
                QuboVar::Channel { device, .. } | QuboVar::PowerBit { device, .. } => device,
                QuboVar::Index(_) => continue,
            };
            if !out.contains(&d) {
                out.push(d);
            }
        }
        out
    }
}

/// `sum_i I_i z_i + sum_{i<j} J_ij z_i z_j + offset` over `z in {-1,+1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian {
    pub linear: Vec<f64>,
    /// Couplings `(i, j, J_ij)` with `i < j`.
    pub quadratic: Vec<(usize, usize, f64)>,
    pub offset: f64,
}

impl IsingHamiltonian {
    pub fn zero(n: usize) -> Self {
        Self {
            linear: vec![0.0; n],
            quadratic: Vec::new(),
            offset: 0.0,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.linear.len()
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.linear.len() {
            return Err(Error::argument("spin vector length mismatch"));
        }
        let mut e = self.offset;
        for (i, &h) in self.linear.iter().enumerate() {
            e += h * f64::from(spins[i]);
        }
        for &(i, j, w) in &self.quadratic {
            e += w * f64::from(spins[i]) * f64::from(spins[j]);
        }
        Ok(e)
    }

    /// Energy of the spin configuration `z_i = 1 - 2 x_i` for the packed
    /// bitstring `x`.
    pub fn energy_bits(&self, bits: u64) -> f64 {
        let spin = |i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = self.offset;
        for (i, &h) in self.linear.iter().enumerate() {
            e += h * spin(i);
        }
        for &(i, j, w) in &self.quadratic {
            e += w * spin(i) * spin(j);
        }
        e
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.quadratic.iter().map(|(_, _, w)| w))
            .fold(0.0, |m: f64, v| m.max(math::abs(*v)))
    }

    /// Multiplies every coefficient, the offset included, by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            linear: self.linear.iter().map(|h| h * factor).collect(),
            quadratic: self.quadratic.iter().map(|&(i, j, w)| (i, j, w * factor)).collect(),
            offset: self.offset * factor,
        }
    }
}

/// Substitutes `x_i = (1 - z_i) / 2` into the QUBO.
pub fn qubo_to_ising(p: &QuboProblem) -> IsingHamiltonian {
    let n = p.n_vars;
    let mut h = IsingHamiltonian::zero(n);
    h.offset = p.offset;
    for i in 0..n {
        let d = p.q[i * n + i];
        // Q_ii x_i = Q_ii/2 - Q_ii/2 z_i
        h.offset += d / 2.0;
        h.linear[i] -= d / 2.0;
        for j in i + 1..n {
            let w = p.q[i * n + j];
            if w == 0.0 {
                continue;
            }
            // Q_ij x_i x_j = Q_ij/4 (1 - z_i - z_j + z_i z_j)
            h.offset += w / 4.0;
            h.linear[i] -= w / 4.0;
            h.linear[j] -= w / 4.0;
            h.quadratic.push((i, j, w / 4.0));
        }
    }
    h
}

/// Penalty weights of the QUBO builders. All weights must be non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    /// Weight on the negated linearized sum-rate term.
    pub lambda_rate: f64,
    /// Weight on `(sum_c zeta_nc - 1)^2` per device. `None` selects ten
    /// times the largest rate coefficient magnitude of the problem.
    pub lambda_one_channel: Option<f64>,
    /// Weight on `((P_max - p_n) / P_max)^2` per device, which is largest at
    /// the all-zero power code. Zero disables the term.
    pub lambda_power_feas: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda_rate: 1.0,
            lambda_one_channel: None,
            lambda_power_feas: 0.0,
        }
    }
}

impl PenaltyConfig {
    pub const AUTO_ONE_CHANNEL_FACTOR: f64 = 10.0;

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.lambda_rate)
            || !self.lambda_one_channel.is_none_or(ok)
            || !ok(self.lambda_power_feas)
        {
            return Err(Error::config("penalty weights must be finite and non-negative"));
        }
        Ok(())
    }
}

/// How the power sub-problem linearizes the sum-rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerSurrogate {
    /// Own-rate term only: `B h_n p_n / (ln2 (sigma^2 + I_n))`. Every device
    /// then prefers full power.
    LowSinr,
    /// Own-rate term minus the first-order rate loss each device inflicts on
    /// its co-channel neighbours at the current iterate.
    InterferencePriced,
    /// Slope of the chord of the true sum-rate between silence and full
    /// power, others frozen. Exact at both end points, so a lone device
    /// chooses between them as the true objective would.
    #[default]
    Chord,
}

fn check_devices(state: &ChannelState, alloc: &AllocationState, devices: &[usize]) -> Result<()> {
    if alloc.n_devices() != state.n_devices() {
        return Err(Error::argument("allocation and channel state disagree on N"));
    }
    for (k, &d) in devices.iter().enumerate() {
        if d >= state.n_devices() {
            return Err(Error::argument(alloc::format!("device {d} out of range")));
        }
        if devices[..k].contains(&d) {
            return Err(Error::argument(alloc::format!("device {d} listed twice")));
        }
    }
    Ok(())
}

/// Linearized rate coefficient of device `n` on channel `c`:
/// `B h_nc p_n / (ln2 (sigma^2 + I_nc))` with the interference taken from
/// `alloc` (excluding `n` itself).
pub fn channel_rate_coefficient(
    radio: &RadioParams,
    state: &ChannelState,
    alloc: &AllocationState,
    n: usize,
    c: usize,
) -> f64 {
    let denom = math::LN_2 * (radio.noise_w + interference(state, alloc, n, c));
    radio.bandwidth_hz * state.legit_gain(n, c) * alloc.power_w[n] / denom
}

/// Channel-selection QUBO over `devices`, with powers and the interference
/// of all other assignments frozen at `alloc`.
///
/// Variable `k * C + c` means `devices[k]` transmits on channel `c`.
pub fn build_channel_qubo(
    radio: &RadioParams,
    state: &ChannelState,
    alloc: &AllocationState,
    devices: &[usize],
    penalties: &PenaltyConfig,
) -> Result<QuboProblem> {
    penalties.validate()?;
    check_devices(state, alloc, devices)?;
    let n_ch = state.n_channels();
    let var_map = devices
        .iter()
        .flat_map(|&device| (0..n_ch).map(move |channel| QuboVar::Channel { device, channel }))
        .collect();
    let mut qubo = QuboProblem::new(QuboKind::ChannelSelection, var_map);

    let mut max_coef: f64 = 0.0;
    for (k, &n) in devices.iter().enumerate() {
        for c in 0..n_ch {
            let a = penalties.lambda_rate * channel_rate_coefficient(radio, state, alloc, n, c);
            max_coef = max_coef.max(a);
            qubo.add(k * n_ch + c, k * n_ch + c, -a);
        }
    }

    let lambda = penalties.lambda_one_channel.unwrap_or(if max_coef > 0.0 {
        PenaltyConfig::AUTO_ONE_CHANNEL_FACTOR * max_coef
    } else {
        1.0
    });
    // lambda (sum_c z_c - 1)^2 = lambda (1 - sum_c z_c + 2 sum_{c<y} z_c z_y)
    if lambda != 0.0 {
        for k in 0..devices.len() {
            qubo.add_offset(lambda);
            for c in 0..n_ch {
                qubo.add(k * n_ch + c, k * n_ch + c, -lambda);
                for y in c + 1..n_ch {
                    qubo.add(k * n_ch + c, k * n_ch + y, 2.0 * lambda);
                }
            }
        }
    }
    Ok(qubo)
}

/// Quantization step `P_max / (2^q - 1)` of the power code.
pub fn power_step(p_max_w: f64, q_bits: u32) -> f64 {
    p_max_w / ((1u64 << q_bits) - 1) as f64
}

/// Decodes the `q_bits`-bit power code `code` into watts.
pub fn decode_power(code: u64, step_w: f64) -> f64 {
    step_w * code as f64
}

/// Derivative of the linearized sum-rate with respect to the power of
/// device `n`, in bits/s per watt.
pub fn power_rate_slope(
    radio: &RadioParams,
    state: &ChannelState,
    alloc: &AllocationState,
    n: usize,
    surrogate: PowerSurrogate,
) -> f64 {
    let Some(c) = alloc.channel_of[n] else {
        return 0.0;
    };
    if surrogate == PowerSurrogate::Chord {
        return chord_slope(radio, state, alloc, n, c);
    }
    let scale = radio.bandwidth_hz / math::LN_2;
    let own = scale * state.legit_gain(n, c) / (radio.noise_w + interference(state, alloc, n, c));
    if surrogate == PowerSurrogate::LowSinr {
        return own;
    }
    let price: f64 = alloc
        .transmitting()
        .filter(|&(m, ch)| m != n && ch == c)
        .map(|(m, _)| {
            let base = radio.noise_w + interference(state, alloc, m, c);
            let signal = state.legit_gain(m, c) * alloc.power_w[m];
            scale * state.interf_gain(n, m, c) * signal / (base * (base + signal))
        })
        .sum();
    own - price
}

fn chord_slope(radio: &RadioParams, state: &ChannelState, alloc: &AllocationState, n: usize, c: usize) -> f64 {
    let b = radio.bandwidth_hz;
    let p_max = radio.p_max_w;
    let own_den = radio.noise_w + interference(state, alloc, n, c);
    let mut gain = b * math::log2(1.0 + state.legit_gain(n, c) * p_max / own_den);
    for (m, _) in alloc.transmitting().filter(|&(m, ch)| m != n && ch == c) {
        let g = state.interf_gain(n, m, c);
        // interference at m without n's current contribution
        let base = radio.noise_w + interference(state, alloc, m, c) - g * alloc.power_w[n];
        let signal = state.legit_gain(m, c) * alloc.power_w[m];
        gain -= b * (math::log2(1.0 + signal / base) - math::log2(1.0 + signal / (base + g * p_max)));
    }
    gain / p_max
}

/// Binarized power QUBO over `devices` with channels fixed by `alloc`.
///
/// Variable `k * q_bits + i` is bit `i` of the power code of `devices[k]`;
/// the decoded power `step * sum_i 2^i x_i` never exceeds `P_max`.
pub fn build_power_qubo(
    radio: &RadioParams,
    state: &ChannelState,
    alloc: &AllocationState,
    devices: &[usize],
    q_bits: u32,
    penalties: &PenaltyConfig,
    surrogate: PowerSurrogate,
) -> Result<QuboProblem> {
    if q_bits == 0 || q_bits > MAX_Q_BITS {
        return Err(Error::Resource {
            what: "power bits per device",
            requested: u64::from(q_bits),
            limit: u64::from(MAX_Q_BITS),
        });
    }
    penalties.validate()?;
    check_devices(state, alloc, devices)?;
    let step = power_step(radio.p_max_w, q_bits);
    let qb = q_bits as usize;
    let var_map = devices
        .iter()
        .flat_map(|&device| (0..q_bits).map(move |bit| QuboVar::PowerBit { device, bit }))
        .collect();
    let mut qubo = QuboProblem::new(QuboKind::PowerAllocation { q_bits, step_w: step }, var_map);

    let u = step / radio.p_max_w;
    let lp = penalties.lambda_power_feas;
    for (k, &n) in devices.iter().enumerate() {
        let slope = penalties.lambda_rate * power_rate_slope(radio, state, alloc, n, surrogate);
        for i in 0..qb {
            let w_i = (1u64 << i) as f64;
            let v = k * qb + i;
            qubo.add(v, v, -slope * step * w_i);
            if lp != 0.0 {
                // lp (1 - u sum_i 2^i x_i)^2
                qubo.add(v, v, lp * (u * u * w_i * w_i - 2.0 * u * w_i));
                for j in i + 1..qb {
                    let w_j = (1u64 << j) as f64;
                    qubo.add(v, k * qb + j, lp * 2.0 * u * u * w_i * w_j);
                }
            }
        }
        if lp != 0.0 {
            qubo.add_offset(lp);
        }
    }
    Ok(qubo)
}

/// Allocation fragment recovered from a QUBO solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Channels {
        /// `(device, selected channel)` for every device in the problem.
        choices: Vec<(usize, Option<usize>)>,
        /// Devices whose row selects more than one channel.
        conflicts: Vec<usize>,
    },
    Powers(Vec<(usize, f64)>),
}

impl Decoded {
    pub fn is_feasible(&self) -> bool {
        match self {
            Decoded::Channels { conflicts, .. } => conflicts.is_empty(),
            Decoded::Powers(_) => true,
        }
    }
}

/// Inverts the variable map of `p` for the bitstring `x`.
pub fn decode_solution(p: &QuboProblem, x: &[bool]) -> Result<Decoded> {
    if x.len() != p.n_vars {
        return Err(Error::argument("bitstring length does not match the problem"));
    }
    match p.kind {
        QuboKind::ChannelSelection => {
            let mut choices: Vec<(usize, Option<usize>)> =
                p.devices().into_iter().map(|d| (d, None)).collect();
            let mut conflicts = Vec::new();
            for (var, &bit) in p.var_map.iter().zip(x) {
                let QuboVar::Channel { device, channel } = *var else {
                    continue;
                };
                if !bit {
                    continue;
                }
                let slot = choices.iter_mut().find(|(d, _)| *d == device).expect("device listed");
                if slot.1.is_some() {
                    if !conflicts.contains(&device) {
                        conflicts.push(device);
                    }
                } else {
                    slot.1 = Some(channel);
                }
            }
            Ok(Decoded::Channels { choices, conflicts })
        }
        QuboKind::PowerAllocation { step_w, .. } => {
            let mut powers: Vec<(usize, u64)> = p.devices().into_iter().map(|d| (d, 0)).collect();
            for (var, &bit) in p.var_map.iter().zip(x) {
                if let (QuboVar::PowerBit { device, bit: i }, true) = (*var, bit) {
                    let slot = powers.iter_mut().find(|(d, _)| *d == device).expect("device listed");
                    slot.1 |= 1 << i;
                }
            }
            Ok(Decoded::Powers(
                powers
                    .into_iter()
                    .map(|(d, code)| (d, decode_power(code, step_w)))
                    .collect(),
            ))
        }
        QuboKind::Generic => Err(Error::argument("generic QUBO has no allocation meaning")),
    }
}

/// Unpacks the low `n` bits of `bits` (variable `i` at bit `i`).
pub fn unpack_bits(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// Packs a bitstring into an integer (variable `i` at bit `i`).
pub fn pack_bits(x: &[bool]) -> u64 {
    x.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| if b { acc | 1 << i } else { acc })
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
    fn energy_examples() {
        let mut q = QuboProblem::generic(2);
        assert_eq!(q.energy(&[false, false]).unwrap(), 0.0);
        q.add(0, 0, 1.0);
        q.add(0, 1, -2.0);
        q.add(1, 1, 3.0);
        assert_eq!(q.energy(&[true, true]).unwrap(), 2.0);
        assert_eq!(q.energy_bits(0b11), 2.0);
        q.set_offset(4.0);
        assert_eq!(q.energy(&[false, false]).unwrap(), 4.0);
        assert!(matches!(q.energy(&[true]), Err(Error::Argument(_))));
    }

    #[test]
    fn lower_triangle_folds_up() {
        let mut q = QuboProblem::generic(3);
        q.add(2, 0, 1.5);
        assert_eq!(q.get(0, 2), 1.5);
        assert_eq!(q.triplets(), vec![(0, 2, 1.5)]);
    }

    #[test]
    fn single_variable_ising() {
        let mut q = QuboProblem::generic(1);
        q.add(0, 0, 3.0);
        let h = qubo_to_ising(&q);
        assert_eq!(h.linear, vec![-1.5]);
        assert_eq!(h.offset, 1.5);
        assert!(h.quadratic.is_empty());
        assert_eq!(h.energy(&[-1]).unwrap(), 3.0);
        assert_eq!(h.energy(&[1]).unwrap(), 0.0);
    }

    #[test]
    fn zero_qubo_gives_zero_ising() {
        let h = qubo_to_ising(&QuboProblem::generic(4));
        assert_eq!(h, IsingHamiltonian::zero(4));
    }

    #[test]
    fn one_device_one_channel_without_penalty() {
        let st = ChannelState::from_gains(1, 1, vec![2e-12], |_, _, _| 0.0).unwrap();
        let mut alloc = AllocationState::silent(1);
        alloc.assign(0, 0, 0.1);
        let pen = PenaltyConfig {
            lambda_one_channel: Some(0.0),
            ..PenaltyConfig::default()
        };
        let q = build_channel_qubo(&radio(), &st, &alloc, &[0], &pen).unwrap();
        let expected = -1e6 * 2e-12 * 0.1 / (math::LN_2 * 1e-14);
        assert_eq!(q.n_vars(), 1);
        assert!((q.get(0, 0) - expected).abs() < 1e-9 * expected.abs());
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn lambda_rate_scales_rate_entries_only() {
        let st = ChannelState::from_gains(2, 2, vec![1e-12, 2e-12, 3e-12, 4e-12], |_, _, _| 1e-13)
            .unwrap();
        let alloc = AllocationState::round_robin(2, 2, 0.1);
        let base = PenaltyConfig {
            lambda_one_channel: Some(5.0),
            ..PenaltyConfig::default()
        };
        let doubled = PenaltyConfig {
            lambda_rate: 2.0,
            ..base
        };
        let a = build_channel_qubo(&radio(), &st, &alloc, &[0, 1], &base).unwrap();
        let b = build_channel_qubo(&radio(), &st, &alloc, &[0, 1], &doubled).unwrap();
        for i in 0..4 {
            let rate_a = a.get(i, i) + 5.0;
            let rate_b = b.get(i, i) + 5.0;
            assert!((rate_b - 2.0 * rate_a).abs() <= 1e-9 * rate_a.abs());
            for j in i + 1..4 {
                assert_eq!(a.get(i, j), b.get(i, j));
            }
        }
        assert_eq!(a.offset(), b.offset());
    }

    #[test]
    fn channel_qubo_has_no_cross_device_couplings() {
        let st = ChannelState::from_gains(3, 2, vec![1e-12; 6], |_, _, _| 1e-13).unwrap();
        let alloc = AllocationState::round_robin(3, 2, 0.1);
        let q = build_channel_qubo(&radio(), &st, &alloc, &[0, 1, 2], &PenaltyConfig::default())
            .unwrap();
        for (i, j, _) in q.triplets() {
            assert_eq!(i / 2, j / 2, "coupling between devices at ({i}, {j})");
        }
    }

    #[test]
    fn power_code_decoding() {
        let step = power_step(0.1, 3);
        assert!((decode_power(0b101, step) - 0.1 * 5.0 / 7.0).abs() < 1e-15);
        assert_eq!(decode_power(0b111, step), 0.1);
        assert_eq!(power_step(0.1, 1), 0.1);
    }

    #[test]
    fn q_bits_guard() {
        let st = ChannelState::from_gains(1, 1, vec![1e-12], |_, _, _| 0.0).unwrap();
        let alloc = AllocationState::round_robin(1, 1, 0.1);
        let pen = PenaltyConfig::default();
        for q in [0, 17] {
            let r = build_power_qubo(&radio(), &st, &alloc, &[0], q, &pen, PowerSurrogate::LowSinr);
            assert!(matches!(r, Err(Error::Resource { .. })));
        }
    }

    #[test]
    fn decode_power_example() {
        let st = ChannelState::from_gains(1, 1, vec![1e-12], |_, _, _| 0.0).unwrap();
        let alloc = AllocationState::round_robin(1, 1, 0.1);
        let q = build_power_qubo(
            &radio(),
            &st,
            &alloc,
            &[0],
            3,
            &PenaltyConfig::default(),
            PowerSurrogate::LowSinr,
        )
        .unwrap();
        let Decoded::Powers(p) = decode_solution(&q, &[true, false, true]).unwrap() else {
            panic!("expected powers");
        };
        assert_eq!(p.len(), 1);
        assert!((p[0].1 - 0.1 * 5.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn decode_channels() {
        let st = ChannelState::from_gains(2, 2, vec![1e-12; 4], |_, _, _| 0.0).unwrap();
        let alloc = AllocationState::round_robin(2, 2, 0.1);
        let q = build_channel_qubo(&radio(), &st, &alloc, &[0, 1], &PenaltyConfig::default())
            .unwrap();
        let d = decode_solution(&q, &[false, true, true, false]).unwrap();
        assert_eq!(
            d,
            Decoded::Channels {
                choices: vec![(0, Some(1)), (1, Some(0))],
                conflicts: vec![]
            }
        );
        let d = decode_solution(&q, &[false, false, true, true]).unwrap();
        assert!(!d.is_feasible());
        let Decoded::Channels { choices, conflicts } = d else { unreachable!() };
        assert_eq!(choices[0], (0, None));
        assert_eq!(conflicts, vec![1]);
        assert!(q.is_feasible_bits(0b0110));
        assert!(!q.is_feasible_bits(0b1100));
    }

    #[test]
    fn power_penalty_is_largest_at_zero_code() {
        let st = ChannelState::from_gains(1, 1, vec![0.0], |_, _, _| 0.0).unwrap();
        let alloc = AllocationState::round_robin(1, 1, 0.1);
        let pen = PenaltyConfig {
            lambda_power_feas: 3.0,
            ..PenaltyConfig::default()
        };
        let q = build_power_qubo(&radio(), &st, &alloc, &[0], 2, &pen, PowerSurrogate::LowSinr)
            .unwrap();
        // zero legit gain: energy is the penalty alone, 3 (1 - k/3)^2
        for code in 0..4u64 {
            let expected = 3.0 * (1.0 - code as f64 / 3.0) * (1.0 - code as f64 / 3.0);
            assert!((q.energy_bits(code) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn bit_packing() {
        let x = [true, false, true, true];
        assert_eq!(pack_bits(&x), 0b1101);
        assert_eq!(unpack_bits(0b1101, 4), x.to_vec());
    }
}
