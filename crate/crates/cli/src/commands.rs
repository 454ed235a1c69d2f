//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use noma_qfl_core::baselines::{
    brute_force_allocation, greedy_allocation, quantized_power_grid, sca_power_allocation,
};
use noma_qfl_core::orchestrator::{
    bcd_optimize, compare_summaries, initial_allocation, latency, BcdMode, RunSummary,
};
use noma_qfl_core::qfl::run_qfl;
use noma_qfl_core::qubo::build_channel_qubo;
use noma_qfl_core::scenario::{device_rates, generate_scenario, sum_rate, NetworkScenario};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, PRESETS};
use crate::formats::{self, BaselineRow};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "noma-qfl", version, about = "NOMA uplink resource allocation and quantum federated learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file layered over the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base preset: paper-small (N=50), paper-mid (N=200) or paper-large (N=500).
    #[arg(long, global = true, value_parser = PRESETS)]
    pub preset: Option<String>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scenario and write its snapshot.
    Scenario,
    /// Run block coordinate descent and write the trace.
    Optimize {
        /// Scenario snapshot to replay instead of generating one.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, value_parser = ["qaoa", "greedy-seeded", "exact", "sca"])]
        solver: Option<String>,
        /// Block mode; `all` runs the three modes.
        #[arg(long, value_parser = ["joint", "channel-only", "power-only", "all"])]
        mode: Option<String>,
        /// Also write the all-device channel QUBO at the starting allocation.
        #[arg(long)]
        export_qubo: bool,
    },
    /// Evaluate greedy, SCA and (when small enough) exhaustive search.
    Baseline {
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Federated training sweep over shot counts and data splits.
    Qfl {
        /// Comma-separated shot counts; 0 means exact expectations.
        #[arg(long, value_delimiter = ',')]
        shots: Option<Vec<u64>>,
    },
    /// Summarize trace files into comparison tables.
    Report {
        /// Directory holding `trace-*.csv` files; defaults to `--out`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Runs a parsed command and returns the files it wrote.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let mut cfg = ExperimentConfig::resolve(cli.config.as_deref(), cli.preset.as_deref(), cli.seed)?;
    match &cli.command {
        Command::Scenario => cmd_scenario(&cfg, &cli.out),
        Command::Optimize {
            snapshot,
            solver,
            mode,
            export_qubo,
        } => {
            if let Some(s) = solver {
                cfg.bcd.solver = s.clone();
            }
            let modes = match mode.as_deref() {
                Some("all") => BcdMode::ALL.to_vec(),
                Some(m) => vec![m.parse()?],
                None => vec![cfg.bcd.mode.parse()?],
            };
            cmd_optimize(&cfg, snapshot.as_deref(), &modes, *export_qubo, &cli.out)
        }
        Command::Baseline { snapshot } => cmd_baseline(&cfg, snapshot.as_deref(), &cli.out),
        Command::Qfl { shots } => {
            if let Some(h) = shots {
                cfg.qfl.shots = h.clone();
                cfg.validate()?;
            }
            cmd_qfl(&cfg, &cli.out)
        }
        Command::Report { input } => cmd_report(input.as_deref().unwrap_or(&cli.out), &cli.out),
    }
}

fn short_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file so readers never see partial output.
fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Scenario from a snapshot or generated from the configuration, plus the
/// key used in output file names.
fn load_scenario(cfg: &ExperimentConfig, snapshot: Option<&Path>) -> CliResult<(NetworkScenario, String)> {
    match snapshot {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("cannot read snapshot {}: {e}", path.display())))?;
            let scn = formats::read_scenario_snapshot(&text)?;
            Ok((scn, short_hash(&[cfg.to_toml().as_bytes(), text.as_bytes()])))
        }
        None => {
            let (scn, _) = generate_scenario(&cfg.scenario_config())?;
            Ok((scn, cfg.hash()))
        }
    }
}

pub fn cmd_scenario(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let (scn, _) = generate_scenario(&cfg.scenario_config())?;
    let hash = cfg.hash();
    let path = write_file(
        out,
        &format!("scenario-s{}-{hash}.csv", cfg.seed),
        &formats::scenario_snapshot(&scn, &hash),
    )?;
    println!(
        "scenario n_devices={} n_channels={} epsilon={} seed={} -> {}",
        scn.n_devices(),
        scn.n_channels(),
        scn.config().epsilon,
        cfg.seed,
        path.display()
    );
    Ok(vec![path])
}

pub fn cmd_optimize(
    cfg: &ExperimentConfig,
    snapshot: Option<&Path>,
    modes: &[BcdMode],
    export_qubo: bool,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let base = cfg.bcd_config()?;
    let (scn, key) = load_scenario(cfg, snapshot)?;
    let state = scn.initial_state();
    let radio = scn.radio();
    let mut written = Vec::new();

    if export_qubo {
        let start = initial_allocation(base.solver, &radio, &state);
        let devices: Vec<usize> = (0..scn.n_devices()).collect();
        let q = build_channel_qubo(&radio, &state, &start, &devices, &base.penalties)?;
        let layout = format!("var = device * {} + channel", scn.n_channels());
        written.push(write_file(
            out,
            &format!("qubo-channel-s{}-{key}.csv", cfg.seed),
            &formats::qubo_triplets(&q, &layout),
        )?);
    }

    for &mode in modes {
        let bcd = noma_qfl_core::orchestrator::BcdConfig { mode, ..base.clone() };
        let t0 = Instant::now();
        let mut trace = bcd_optimize(&scn, &state, &bcd)?;
        let wall = t0.elapsed().as_secs_f64();
        trace.wall_clock_s = Some(wall);
        let init_latency = latency(&radio, &state, &trace.initial, &bcd.latency);
        let stem = format!("{}-{}-s{}-{key}", bcd.solver, mode, cfg.seed);
        written.push(write_file(
            out,
            &format!("trace-{stem}.csv"),
            &formats::trace_csv(&trace, init_latency, &key),
        )?);
        written.push(write_file(out, &format!("trace-{stem}.csv.runtime"), &format!("wall_clock_s={wall}\n"))?);
        let rates = device_rates(&state, &trace.final_alloc, radio.noise_w, radio.bandwidth_hz);
        written.push(write_file(
            out,
            &format!("alloc-{stem}.csv"),
            &formats::allocation_csv(&trace.final_alloc, &rates),
        )?);
        println!(
            "optimize solver={} mode={} final_sum_rate_bps={:.6e} iterations={} converged={} latency_s={:.6e} runtime_s={:.3}",
            bcd.solver,
            mode,
            trace.final_sum_rate(),
            trace.iterations.len(),
            trace.converged,
            trace.final_latency(),
            wall
        );
    }
    Ok(written)
}

pub fn cmd_baseline(cfg: &ExperimentConfig, snapshot: Option<&Path>, out: &Path) -> CliResult<Vec<PathBuf>> {
    let bcd = cfg.bcd_config()?;
    let (scn, key) = load_scenario(cfg, snapshot)?;
    let state = scn.initial_state();
    let radio = scn.radio();
    let rate = |a| sum_rate(&state, a, radio.noise_w, radio.bandwidth_hz);
    let mut rows = Vec::new();
    let mut notes = Vec::new();

    let greedy = greedy_allocation(&radio, &state);
    rows.push(BaselineRow {
        method: "greedy".into(),
        sum_rate_bps: rate(&greedy),
        latency_s: latency(&radio, &state, &greedy, &bcd.latency),
        evaluated: None,
    });
    let sca = sca_power_allocation(&radio, &state, &greedy, bcd.sca_iters)?;
    rows.push(BaselineRow {
        method: "sca".into(),
        sum_rate_bps: rate(&sca.alloc),
        latency_s: latency(&radio, &state, &sca.alloc, &bcd.latency),
        evaluated: Some(sca.surrogate.len() as u64),
    });
    match brute_force_allocation(&radio, &state, &quantized_power_grid(radio.p_max_w, bcd.q_bits)) {
        Ok(bf) => rows.push(BaselineRow {
            method: "brute_force".into(),
            sum_rate_bps: bf.best_value,
            latency_s: latency(&radio, &state, &bf.best_alloc, &bcd.latency),
            evaluated: Some(bf.evaluated),
        }),
        Err(noma_qfl_core::Error::Resource { requested, limit, .. }) => {
            let size = if requested == u64::MAX {
                "more than 2^64".to_string()
            } else {
                requested.to_string()
            };
            notes.push(("brute_force".into(), format!("skipped: grid of {size} points exceeds {limit}")));
        }
        Err(e) => return Err(e.into()),
    }
    let path = write_file(
        out,
        &format!("baseline-s{}-{key}.csv", cfg.seed),
        &formats::baseline_csv(&rows, &notes, &key),
    )?;
    for r in &rows {
        println!(
            "baseline method={} sum_rate_bps={:.6e} latency_s={:.6e}",
            r.method, r.sum_rate_bps, r.latency_s
        );
    }
    for (k, v) in &notes {
        println!("baseline {k}: {v}");
    }
    Ok(vec![path])
}

pub fn cmd_qfl(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let runs = cfg.fed_configs()?;
    let hash = cfg.hash();
    // runs are independent; each writes its own file
    let records = std::thread::scope(|s| {
        let handles: Vec<_> = runs.iter().map(|fc| s.spawn(move || run_qfl(fc))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut written = Vec::new();
    for rec in &records {
        let name = format!("qfl-H{}-{}-s{}-{hash}.csv", rec.shots, rec.split, rec.seed);
        written.push(write_file(out, &name, &formats::qfl_csv(rec, &hash))?);
        let last = rec.rounds.last().expect("at least the initial round");
        println!(
            "qfl shots={} split={} rounds={} final_loss={:.6} final_accuracy={:.4}",
            rec.shots,
            rec.split,
            rec.rounds.len() - 1,
            last.global_loss,
            last.global_accuracy
        );
    }
    Ok(written)
}

fn fmt_pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

pub fn cmd_report(input: &Path, out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", input.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trace-") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Runtime(format!("no trace files in {}", input.display())));
    }

    let mut key_parts = Vec::new();
    let mut groups: BTreeMap<u64, Vec<(RunSummary, String)>> = BTreeMap::new();
    for path in &files {
        let text = fs::read_to_string(path)?;
        let mut summary = formats::read_trace_summary(&text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let runtime_path = path.with_extension("csv.runtime");
        summary.wall_clock_s = fs::read_to_string(runtime_path)
            .ok()
            .and_then(|t| t.trim().strip_prefix("wall_clock_s=").and_then(|v| v.parse().ok()));
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        key_parts.push(name.clone().into_bytes());
        key_parts.push(text.into_bytes());
        groups.entry(summary.scenario_id).or_default().push((summary, name));
    }

    let mut doc = formats::Document::new(
        "noma-qfl-report/1",
        &[
            "scenario_id",
            "run",
            "file",
            "final_sum_rate_bps",
            "final_latency_s",
            "iterations",
            "converged",
            "reference",
            "sum_rate_improvement_pct",
            "latency_reduction_pct",
        ],
    );
    let mut md = String::from("# Run comparison\n\n");
    for (id, runs) in &groups {
        let summaries: Vec<RunSummary> = runs.iter().map(|(s, _)| s.clone()).collect();
        let reference = summaries
            .iter()
            .position(|s| s.label.starts_with("sca/"))
            .unwrap_or(0);
        let report = (summaries.len() > 1)
            .then(|| compare_summaries(summaries.clone()))
            .transpose()?;
        writeln!(md, "## Scenario {id:016x}\n").unwrap();
        md.push_str("| run | final sum-rate (Mbps) | latency (ms) | iterations | converged | improvement vs reference (%) | runtime (s, informational) |\n");
        md.push_str("|---|---|---|---|---|---|---|\n");
        for (i, (s, file)) in runs.iter().enumerate() {
            let pair = report.as_ref().and_then(|r| (i != reference).then(|| r.pair(i, reference)).flatten());
            let (gain, lat) = pair
                .map(|p| (fmt_pct(p.sum_rate_gain), fmt_pct(p.latency_reduction)))
                .unwrap_or_default();
            doc.row(vec![
                format!("{id:016x}"),
                s.label.clone(),
                file.clone(),
                format!("{:e}", s.final_sum_rate),
                format!("{:e}", s.final_latency_s),
                s.iterations.to_string(),
                s.converged.to_string(),
                if pair.is_some() { summaries[reference].label.clone() } else { String::new() },
                gain.clone(),
                lat,
            ]);
            writeln!(
                md,
                "| {} | {:.3} | {:.4} | {} | {} | {} | {} |",
                s.label,
                s.final_sum_rate / 1e6,
                s.final_latency_s * 1e3,
                s.iterations,
                s.converged,
                gain,
                s.wall_clock_s.map(|w| format!("{w:.3}")).unwrap_or_default()
            )
            .unwrap();
        }
        if let Some(r) = &report {
            md.push_str("\nPairwise sum-rate improvement (row over column, %):\n\n|  |");
            for s in &r.runs {
                write!(md, " {} |", s.label).unwrap();
            }
            md.push_str("\n|---|");
            md.push_str(&"---|".repeat(r.runs.len()));
            md.push('\n');
            for (i, a) in r.runs.iter().enumerate() {
                write!(md, "| {} |", a.label).unwrap();
                for j in 0..r.runs.len() {
                    let cell = r.pair(i, j).map(|p| fmt_pct(p.sum_rate_gain)).unwrap_or_default();
                    write!(md, " {cell} |").unwrap();
                }
                md.push('\n');
            }
        }
        md.push('\n');
    }
    md.push_str("Runtimes are wall-clock measurements of this machine and are not part of any CSV output.\n");

    let refs: Vec<&[u8]> = key_parts.iter().map(Vec::as_slice).collect();
    let key = short_hash(&refs);
    let csv_path = write_file(out, &format!("report-{key}.csv"), &doc.render())?;
    let md_path = write_file(out, &format!("report-{key}.md"), &md)?;
    println!("report runs={} scenarios={} -> {}", files.len(), groups.len(), md_path.display());
    Ok(vec![csv_path, md_path])
}
