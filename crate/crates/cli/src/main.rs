//! Command-line front end: configuration handling, subcommand dispatch and
//! CSV/report emission for the antibunched-source simulator.

// Negated comparisons in validation guards are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use antibunch_core::{
    build_output_state, fit_ratio_model, hom_overlap_from_delay, phase_scan, predicted_g2,
    run_pair_and_report, suppression_factor, three_photon_contamination, two_source_rates,
    visibility, SourceSpec,
};
use config::Config;

#[derive(Parser)]
#[command(
    name = "antibunch",
    about = "Simulate and analyze a quantum-interference antibunched photon source",
    version
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    /// Write the primary artifact (CSV) here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write the key=value report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Flag overrides applied on top of defaults and the config file.
#[derive(Args)]
struct Overrides {
    /// key=value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Coherent amplitude α.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Pair amplitude g = γ² of the down-conversion source.
    #[arg(long = "gamma", global = true, value_name = "PAIR_AMP")]
    pair_amp: Option<f64>,

    /// Relative phase φ in radians (π = maximum antibunching).
    #[arg(long, global = true)]
    phi: Option<f64>,

    /// Mode overlap v in [0, 1].
    #[arg(long = "overlap", global = true, value_name = "V")]
    overlap_v: Option<f64>,

    /// Per-mode photon cutoff.
    #[arg(long, global = true)]
    cutoff: Option<u8>,

    /// Pulse repetition rate in Hz.
    #[arg(long = "rep-rate-hz", global = true)]
    rep_rate_hz: Option<f64>,

    /// Counting-run duration in seconds.
    #[arg(long = "duration-s", global = true)]
    duration_s: Option<f64>,

    /// Detector efficiency per photon.
    #[arg(long, global = true)]
    efficiency: Option<f64>,

    /// Histogram bin width in nanoseconds.
    #[arg(long = "bin-ns", global = true)]
    bin_ns: Option<f64>,

    /// Peak integration half-window in nanoseconds.
    #[arg(long = "window-ns", global = true)]
    window_ns: Option<f64>,

    /// Side peaks integrated on each side of zero delay.
    #[arg(long = "side-peaks", global = true)]
    side_peaks: Option<u32>,

    /// Random stream seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of deterministic simulation shards.
    #[arg(long, global = true)]
    shards: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the engine and closed-form g2(0) of the configured source.
    G2,
    /// Sweep the relative phase and write phi,g2_engine,g2_closed,p2,mean_n.
    PhaseScan {
        /// Grid points over one full 2π period.
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Run the destructive/constructive counting pair; write histogram CSVs
    /// and the ratio report.
    Hbt,
    /// Invert a measured ratio pair into (rho, v).
    Fit {
        /// Antibunched central/side ratio.
        #[arg(long)]
        g2min: f64,
        /// Bunched central/side ratio.
        #[arg(long)]
        g2max: f64,
    },
    /// Print gate-feed rate scaling and contamination for matched sources.
    Rates,
    /// Sweep the signal–idler delay and write delay_ps,v_hom,g2.
    HomScan {
        /// Grid points across the full sweep.
        #[arg(long, default_value_t = 61)]
        points: usize,
        /// Half-span of the delay sweep in nanoseconds.
        #[arg(long = "delay-span-ns", default_value_t = 0.003)]
        delay_span_ns: f64,
    },
}

fn resolve_config(overrides: &Overrides) -> Result<Config> {
    let mut config = match &overrides.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(value) = overrides.$field {
                config.$field = value;
            })*
        };
    }
    apply!(
        alpha, pair_amp, phi, overlap_v, cutoff, rep_rate_hz, duration_s, efficiency, bin_ns,
        window_ns, side_peaks, seed, shards
    );
    Ok(config)
}

/// Write an artifact to a file (with the resolved-config header) or stdout.
fn emit(target: Option<&Path>, header: &str, body: &str) -> Result<()> {
    match target {
        Some(path) => std::fs::write(path, format!("{header}{body}"))
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn warn_on_truncation(spec: &SourceSpec) -> Result<()> {
    if let Some(loss) = build_output_state(spec)?.truncation_warning() {
        eprintln!("warning: truncation loss {loss:.3e} exceeds 1e-6; raise the cutoff");
    }
    Ok(())
}

fn cmd_g2(config: &Config, report: Option<&Path>) -> Result<()> {
    let spec = config.source_spec()?;
    let out = build_output_state(&spec)?;
    let g2_engine = out.g2()?;
    let closed = spec
        .rho()
        .map(|rho| predicted_g2(rho, spec.overlap_v, spec.effective_phi()));
    let mut body = format!("g2_engine={g2_engine}\n");
    let _ = writeln!(
        body,
        "g2_closed_form={}",
        closed.map_or("nan".into(), |v| v.to_string())
    );
    let _ = writeln!(body, "p2={}", out.p2());
    let _ = writeln!(body, "mean_n={}", out.mean_photon_number());
    let _ = writeln!(body, "truncation_loss={}", out.truncation_loss());
    emit(report, &config.header(), &body)
}

fn cmd_phase_scan(config: &Config, points: usize, out: Option<&Path>) -> Result<()> {
    if points < 2 {
        bail!("phase scan needs at least 2 points");
    }
    let spec = config.source_spec()?;
    warn_on_truncation(&spec)?;
    let grid: Vec<f64> = (0..points)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (points - 1) as f64)
        .collect();
    let rows = phase_scan(&spec, &grid)?;
    let mut body = String::from("phi,g2_engine,g2_closed,p2,mean_n\n");
    for row in rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            row.phi, row.g2_engine, row.g2_closed_form, row.p2, row.mean_n
        );
    }
    emit(out, &config.header(), &body)
}

fn cmd_hbt(config: &Config, out: Option<&Path>, report: Option<&Path>) -> Result<()> {
    let spec = config.source_spec()?;
    let detectors = config.detector_model()?;
    let run = config.run_config()?;
    warn_on_truncation(&spec)?;
    let (pair, anti_hist, bun_hist) = run_pair_and_report(&spec, &detectors, &run)?;
    match out {
        Some(path) => {
            emit(Some(path), &config.header(), &anti_hist.to_csv())?;
            let bunched_path = sibling_path(path, "_bunched");
            emit(Some(&bunched_path), &config.header(), &bun_hist.to_csv())?;
        }
        None => {
            print!("{}", anti_hist.to_csv());
        }
    }
    emit(report, &config.header(), &pair.to_key_values())
}

fn cmd_fit(config: &Config, g2min: f64, g2max: f64, report: Option<&Path>) -> Result<()> {
    let fit = fit_ratio_model(g2min, g2max)?;
    let vis = visibility(g2min, g2max)?;
    let suppression = suppression_factor(g2min)?;
    let mut body = format!("rho_fit={}\nv_fit={}\n", fit.rho, fit.v);
    let _ = writeln!(body, "v_clamped={}", fit.clamped);
    let _ = writeln!(body, "visibility={vis}");
    let _ = writeln!(body, "suppression_factor={suppression}");
    emit(report, &config.header(), &body)
}

fn cmd_rates(config: &Config, report: Option<&Path>) -> Result<()> {
    let spec = config.source_spec()?;
    let gamma = spec.pair_amp.norm().sqrt();
    let rates = two_source_rates(spec.alpha, num_complex::Complex64::new(gamma, 0.0))?;
    let contamination = three_photon_contamination(spec.alpha, spec.overlap_v)?;
    let mut body = rates.to_key_values();
    body.push_str(&contamination.to_key_values());
    let _ = writeln!(
        body,
        "single_photon_prob_per_pulse={}",
        rates.single_photon_prob_per_pulse
    );
    let _ = writeln!(body, "desired_rate={}", contamination.desired_rate);
    let _ = writeln!(body, "contamination_rate={}", contamination.contamination_rate);
    emit(report, &config.header(), &body)
}

fn cmd_hom_scan(
    config: &Config,
    points: usize,
    delay_span_ns: f64,
    out: Option<&Path>,
) -> Result<()> {
    if points < 2 {
        bail!("delay scan needs at least 2 points");
    }
    if !(delay_span_ns > 0.0) {
        bail!("--delay-span-ns must be positive");
    }
    let base = config.source_spec()?;
    let mut body = String::from("delay_ps,v_hom,g2\n");
    for k in 0..points {
        let frac = k as f64 / (points - 1) as f64;
        let delay_ns = -delay_span_ns + 2.0 * delay_span_ns * frac;
        let spec = SourceSpec {
            hom_delay: delay_ns * 1e-9,
            ..base.clone()
        };
        let v_hom = hom_overlap_from_delay(spec.hom_delay, spec.coherence_time);
        let g2 = build_output_state(&spec)?.g2()?;
        let _ = writeln!(body, "{},{},{}", delay_ns * 1e3, v_hom, g2);
    }
    emit(out, &config.header(), &body)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = resolve_config(&cli.overrides)?;
    let out = cli.out.as_deref();
    let report = cli.report.as_deref();
    match cli.command {
        Command::G2 => cmd_g2(&config, report),
        Command::PhaseScan { points } => cmd_phase_scan(&config, points, out),
        Command::Hbt => cmd_hbt(&config, out, report),
        Command::Fit { g2min, g2max } => cmd_fit(&config, g2min, g2max, report),
        Command::Rates => cmd_rates(&config, report),
        Command::HomScan {
            points,
            delay_span_ns,
        } => cmd_hom_scan(&config, points, delay_span_ns, out),
    }
}
