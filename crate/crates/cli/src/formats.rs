//! Text formats written and read by the CLI.
//!
//! Every file starts with `# key=value` metadata lines, the first of which
//! is `# schema=<name>/<version>`, followed by a CSV table with a header
//! row. Floats are written in shortest round-trip form, so a file read back
//! reproduces the stored values bit for bit.

use std::fmt::Write as _;

use noma_qfl_core::orchestrator::{BcdTrace, RunSummary};
use noma_qfl_core::qfl::FedRunRecord;
use noma_qfl_core::qubo::QuboProblem;
use noma_qfl_core::scenario::{AllocationState, NetworkScenario, ScenarioConfig};

use crate::{CliError, CliResult};

pub const SCENARIO_SCHEMA: &str = "noma-qfl-scenario/1";
pub const TRACE_SCHEMA: &str = "noma-qfl-trace/1";
pub const ALLOCATION_SCHEMA: &str = "noma-qfl-allocation/1";
pub const QFL_SCHEMA: &str = "noma-qfl-qfl/1";
pub const BASELINE_SCHEMA: &str = "noma-qfl-baseline/1";
pub const QUBO_SCHEMA: &str = "noma-qfl-qubo/1";

/// Metadata block plus CSV body of one file.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Document {
    pub fn new(schema: &str, header: &[&str]) -> Self {
        Self {
            meta: vec![("schema".into(), schema.into())],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.header.len());
        self.rows.push(fields);
    }

    pub fn get(&self, key: &str) -> CliResult<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| CliError::Runtime(format!("missing metadata key `{key}`")))
    }

    pub fn parse_meta<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| CliError::Runtime(format!("invalid value `{v}` for `{key}`")))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).unwrap();
        for r in &self.rows {
            w.write_record(r).unwrap();
        }
        out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
        out
    }

    pub fn parse(text: &str, schema: &str) -> CliResult<Self> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else { break };
            body_start += line.len() + 1;
            let (k, v) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| CliError::Runtime(format!("malformed metadata line `{line}`")))?;
            meta.push((k.to_string(), v.to_string()));
        }
        let doc_schema = meta.first().filter(|(k, _)| k == "schema").map(|(_, v)| v.as_str());
        if doc_schema != Some(schema) {
            return Err(CliError::Runtime(format!(
                "expected schema `{schema}`, found `{}`",
                doc_schema.unwrap_or("none")
            )));
        }
        let mut rd = csv::Reader::from_reader(&text.as_bytes()[body_start.min(text.len())..]);
        let header = rd
            .headers()
            .map_err(|e| CliError::Runtime(format!("bad CSV header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = rd
            .records()
            .map(|r| {
                r.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::Runtime(format!("bad CSV row: {e}")))
            })
            .collect::<CliResult<_>>()?;
        Ok(Self { meta, header, rows })
    }
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Runtime(format!("invalid {what} `{s}`")))
}

pub fn scenario_snapshot(scn: &NetworkScenario, config_hash: &str) -> String {
    let c = scn.config();
    let mut d = Document::new(SCENARIO_SCHEMA, &["kind", "device", "peer", "channel", "value"]);
    d.meta("config_hash", config_hash)
        .meta("seed", c.seed)
        .meta("n_devices", c.n_devices)
        .meta("n_channels", c.n_channels)
        .meta("epsilon", c.epsilon)
        .meta("cell_radius_m", c.cell_radius_m)
        .meta("pathloss_exponent", c.pathloss_exponent)
        .meta("reference_loss_db", c.reference_loss_db)
        .meta("shadowing_sigma_db", c.shadowing_sigma_db)
        .meta("noise_dbm", c.noise_dbm)
        .meta("bandwidth_hz", c.bandwidth_hz)
        .meta("p_max_dbm", c.p_max_dbm);
    let e = String::new;
    for (n, [x, y]) in scn.positions().iter().enumerate() {
        d.row(vec!["position_x".into(), n.to_string(), e(), e(), f(*x)]);
        d.row(vec!["position_y".into(), n.to_string(), e(), e(), f(*y)]);
    }
    for n in 0..c.n_devices {
        for ch in 0..c.n_channels {
            d.row(vec!["legit".into(), n.to_string(), e(), ch.to_string(), f(scn.legit_large(n, ch))]);
        }
    }
    for from in 0..c.n_devices {
        for to in (0..c.n_devices).filter(|&t| t != from) {
            for ch in 0..c.n_channels {
                d.row(vec![
                    "interf".into(),
                    from.to_string(),
                    to.to_string(),
                    ch.to_string(),
                    f(scn.interf_large(from, to, ch)),
                ]);
            }
        }
    }
    d.render()
}

pub fn read_scenario_snapshot(text: &str) -> CliResult<NetworkScenario> {
    let d = Document::parse(text, SCENARIO_SCHEMA)?;
    let cfg = ScenarioConfig {
        n_devices: d.parse_meta("n_devices")?,
        n_channels: d.parse_meta("n_channels")?,
        cell_radius_m: d.parse_meta("cell_radius_m")?,
        pathloss_exponent: d.parse_meta("pathloss_exponent")?,
        reference_loss_db: d.parse_meta("reference_loss_db")?,
        shadowing_sigma_db: d.parse_meta("shadowing_sigma_db")?,
        epsilon: d.parse_meta("epsilon")?,
        noise_dbm: d.parse_meta("noise_dbm")?,
        bandwidth_hz: d.parse_meta("bandwidth_hz")?,
        p_max_dbm: d.parse_meta("p_max_dbm")?,
        seed: d.parse_meta("seed")?,
    };
    cfg.validate()?;
    let (n, c) = (cfg.n_devices, cfg.n_channels);
    let mut positions = vec![[f64::NAN; 2]; n];
    let mut legit = vec![f64::NAN; n * c];
    let mut interf = vec![f64::NAN; n * n.saturating_sub(1) * c];
    for r in &d.rows {
        if r.len() != 5 {
            return Err(CliError::Runtime("snapshot row has the wrong width".into()));
        }
        let dev: usize = num(&r[1], "device")?;
        if dev >= n {
            return Err(CliError::Runtime(format!("device {dev} out of range")));
        }
        let value: f64 = num(&r[4], "value")?;
        let channel = || -> CliResult<usize> {
            let ch: usize = num(&r[3], "channel")?;
            if ch >= c {
                return Err(CliError::Runtime(format!("channel {ch} out of range")));
            }
            Ok(ch)
        };
        match r[0].as_str() {
            "position_x" => positions[dev][0] = value,
            "position_y" => positions[dev][1] = value,
            "legit" => legit[dev * c + channel()?] = value,
            "interf" => {
                let to: usize = num(&r[2], "peer")?;
                if to >= n || to == dev {
                    return Err(CliError::Runtime(format!("invalid interference peer {to}")));
                }
                let to_adj = if to < dev { to } else { to - 1 };
                interf[(dev * (n - 1) + to_adj) * c + channel()?] = value;
            }
            other => return Err(CliError::Runtime(format!("unknown snapshot record `{other}`"))),
        }
    }
    if positions.iter().flatten().chain(&legit).chain(&interf).any(|v| v.is_nan()) {
        return Err(CliError::Runtime("snapshot is incomplete".into()));
    }
    Ok(NetworkScenario::from_parts(cfg, positions, legit, interf)?)
}

/// Trace rows: iteration 0 is the starting allocation.
pub fn trace_csv(trace: &BcdTrace, initial_latency_s: f64, config_hash: &str) -> String {
    let mut d = Document::new(
        TRACE_SCHEMA,
        &["iter", "sum_rate_bps", "latency_s", "channel_energy", "power_energy", "accepted"],
    );
    d.meta("solver", trace.solver)
        .meta("mode", trace.mode)
        .meta("seed", trace.seed)
        .meta("scenario_id", format!("{:016x}", trace.scenario_id))
        .meta("config_hash", config_hash)
        .meta("converged", trace.converged);
    d.row(vec![
        "0".into(),
        f(trace.initial_sum_rate),
        f(initial_latency_s),
        String::new(),
        String::new(),
        String::new(),
    ]);
    for it in &trace.iterations {
        d.row(vec![
            it.iter.to_string(),
            f(it.sum_rate),
            f(it.latency_s),
            opt(it.channel_energy),
            opt(it.power_energy),
            it.accepted.to_string(),
        ]);
    }
    d.render()
}

pub fn read_trace_summary(text: &str) -> CliResult<RunSummary> {
    let d = Document::parse(text, TRACE_SCHEMA)?;
    let last = d.rows.last().ok_or_else(|| CliError::Runtime("trace has no rows".into()))?;
    let id = d.get("scenario_id")?;
    Ok(RunSummary {
        label: format!("{}/{}", d.get("solver")?, d.get("mode")?),
        scenario_id: u64::from_str_radix(id, 16)
            .map_err(|_| CliError::Runtime(format!("invalid scenario id `{id}`")))?,
        final_sum_rate: num(&last[1], "sum-rate")?,
        final_latency_s: num(&last[2], "latency")?,
        iterations: d.rows.len() - 1,
        converged: d.parse_meta("converged")?,
        wall_clock_s: None,
    })
}

pub fn allocation_csv(alloc: &AllocationState, rates: &[f64]) -> String {
    let mut d = Document::new(ALLOCATION_SCHEMA, &["device", "channel", "power_w", "rate_bps"]);
    for (n, rate) in rates.iter().enumerate().take(alloc.n_devices()) {
        d.row(vec![
            n.to_string(),
            alloc.channel_of[n].map(|c| c.to_string()).unwrap_or_default(),
            f(alloc.power_w[n]),
            f(*rate),
        ]);
    }
    d.render()
}

/// One row per training round; the untrained model is not listed.
pub fn qfl_csv(rec: &FedRunRecord, config_hash: &str) -> String {
    let mut d = Document::new(
        QFL_SCHEMA,
        &["round", "global_loss", "global_accuracy", "shots", "n_devices", "split", "seed"],
    );
    d.meta("config_hash", config_hash);
    for r in rec.rounds.iter().skip(1) {
        d.row(vec![
            r.round.to_string(),
            f(r.global_loss),
            f(r.global_accuracy),
            rec.shots.to_string(),
            rec.n_devices.to_string(),
            rec.split.to_string(),
            rec.seed.to_string(),
        ]);
    }
    d.render()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub method: String,
    pub sum_rate_bps: f64,
    pub latency_s: f64,
    pub evaluated: Option<u64>,
}

pub fn baseline_csv(rows: &[BaselineRow], notes: &[(String, String)], config_hash: &str) -> String {
    let mut d = Document::new(BASELINE_SCHEMA, &["method", "sum_rate_bps", "latency_s", "evaluated"]);
    d.meta("config_hash", config_hash);
    for (k, v) in notes {
        d.meta(k, v);
    }
    for r in rows {
        d.row(vec![
            r.method.clone(),
            f(r.sum_rate_bps),
            f(r.latency_s),
            r.evaluated.map(|e| e.to_string()).unwrap_or_default(),
        ]);
    }
    d.render()
}

/// Upper-triangular non-zero entries of a QUBO.
pub fn qubo_triplets(q: &QuboProblem, layout: &str) -> String {
    let mut d = Document::new(QUBO_SCHEMA, &["i", "j", "value"]);
    d.meta("n_vars", q.n_vars()).meta("offset", q.offset()).meta("layout", layout);
    for (i, j, v) in q.triplets() {
        d.row(vec![i.to_string(), j.to_string(), f(v)]);
    }
    d.render()
}

pub fn read_qubo_triplets(text: &str) -> CliResult<QuboProblem> {
    let d = Document::parse(text, QUBO_SCHEMA)?;
    let n: usize = d.parse_meta("n_vars")?;
    let mut q = QuboProblem::generic(n);
    q.set_offset(d.parse_meta("offset")?);
    for r in &d.rows {
        let (i, j): (usize, usize) = (num(&r[0], "row")?, num(&r[1], "column")?);
        if i >= n || j >= n {
            return Err(CliError::Runtime(format!("entry ({i}, {j}) out of range")));
        }
        q.add(i, j, num(&r[2], "value")?);
    }
    Ok(q)
}
