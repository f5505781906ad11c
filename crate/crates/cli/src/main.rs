//! Command line front end: sample spectra, tabulate densities, run the
//! verification suites, and persist reproducible run manifests.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use spherical_rmt::error::Result as RmtResult;
use spherical_rmt::grid::DensityGrid;
use spherical_rmt::integral_eq;
use spherical_rmt::manifest::RunManifest;
use spherical_rmt::oracles;
use spherical_rmt::sampler::{self, Ensemble};
use spherical_rmt::{gue, Error};

use config::{env_seed, parse_config_file, OutputFormat, PartialConfig, RunConfig};

const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "spherical-rmt",
    about = "Fixed trace square ensemble: sampling, level densities, and verification suites",
    version
)]
struct Cli {
    /// key=value configuration file; flags override file entries,
    /// SPHERICAL_RMT_SEED overrides both
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Matrix sizes, comma separated (e.g. 10,50,100)
    #[arg(long = "N", visible_alias = "n", global = true, value_delimiter = ',')]
    n: Option<Vec<u32>>,

    /// Number of Monte Carlo samples
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Histogram bin count
    #[arg(long, global = true)]
    bins: Option<u32>,

    /// Master seed for all random streams
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; sampling output is bit-identical for any value
    #[arg(long, global = true)]
    streams: Option<u32>,

    /// Output directory
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Data file format
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Ensemble for density/sample commands
    #[arg(long, global = true, value_enum)]
    ensemble: Option<config::EnsembleArg>,

    /// Verify the digests recorded in <out-dir>/manifest.json instead of
    /// running the command
    #[arg(long, global = true, default_value_t = false)]
    verify_manifest: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Estimate a level density histogram and write it as plot-ready data
    Density,
    /// Check every Selberg-family closed form against its oracle
    VerifySelberg,
    /// Check the radial mixing equation against exact GUE densities
    VerifyIntegralEq,
    /// Reproduce the semicircle convergence data (level density overlays)
    SemicircleReport,
    /// Estimate the top-eigenvalue ratio ⟨max x²⟩/⟨x₁²⟩
    Ratio,
    /// Write raw sampled spectra
    Sample,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::VerifySelberg => "verify-selberg",
            Command::VerifyIntegralEq => "verify-integral-eq",
            Command::SemicircleReport => "semicircle-report",
            Command::Ratio => "ratio",
            Command::Sample => "sample",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.verify_manifest {
        return run_verify_manifest(&cli);
    }

    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    if cfg.streams > 0 {
        // worker count only affects scheduling, never the sampled values
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.streams as usize)
            .build_global()
        {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    match run_command(cli.command, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut layered = PartialConfig::default();
    if let Some(path) = &cli.config {
        layered = layered.overlay(parse_config_file(path)?);
    }
    let flags = PartialConfig {
        n: cli.n.clone(),
        samples: cli.samples,
        bins: cli.bins,
        seed: cli.seed,
        streams: cli.streams,
        out_dir: cli.out_dir.clone(),
        format: cli.format,
        ensemble: cli.ensemble,
    };
    layered = layered.overlay(flags);
    if let Some(seed) = env_seed()? {
        layered.seed = Some(seed);
    }
    layered.resolve()
}

fn run_verify_manifest(cli: &Cli) -> ExitCode {
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = dir.join("manifest.json");
    match RunManifest::read(&path).and_then(|m| m.verify_outputs(&dir)) {
        Ok(mismatches) if mismatches.is_empty() => {
            println!("manifest {} verified: all digests match", path.display());
            ExitCode::SUCCESS
        }
        Ok(mismatches) => {
            for m in &mismatches {
                eprintln!("digest mismatch: {m}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Runs a command; Ok(false) means the run completed but a verification
/// failed (exit status 1 with the JSON detail already on disk).
fn run_command(command: Command, cfg: &RunConfig) -> RmtResult<bool> {
    fs::create_dir_all(&cfg.out_dir)?;
    let mut manifest = RunManifest::new(
        command.name(),
        cfg.seed,
        cfg.n.clone(),
        cfg.samples,
        effective_streams(cfg),
        cfg.bins,
    );
    let passed = match command {
        Command::Density => run_density(cfg, &mut manifest)?,
        Command::VerifySelberg => run_verify_selberg(cfg, &mut manifest)?,
        Command::VerifyIntegralEq => run_verify_integral_eq(cfg, &mut manifest)?,
        Command::SemicircleReport => run_semicircle_report(cfg, &mut manifest)?,
        Command::Ratio => run_ratio(cfg, &mut manifest)?,
        Command::Sample => run_sample(cfg, &mut manifest)?,
    };
    manifest.write(&cfg.out_dir)?;
    Ok(passed)
}

fn effective_streams(cfg: &RunConfig) -> u32 {
    if cfg.streams > 0 {
        cfg.streams
    } else {
        rayon::current_num_threads() as u32
    }
}

fn density_support(n: u32, ensemble: Ensemble) -> (f64, f64) {
    match ensemble {
        Ensemble::FixedTrace => (-1.0, 1.0),
        Ensemble::Gue => {
            let half = gue::gue_support_halfwidth(n);
            (-half, half)
        }
    }
}

fn write_density_data(
    cfg: &RunConfig,
    manifest: &mut RunManifest,
    stem: &str,
    grid: &DensityGrid,
    n: u32,
    kind: &str,
) -> RmtResult<()> {
    match cfg.format {
        OutputFormat::Csv => {
            let name = format!("{stem}.csv");
            let mut buf = Vec::new();
            grid.write_csv(&mut buf, n, kind)?;
            fs::write(cfg.out_dir.join(&name), buf)?;
            manifest.record_output(&cfg.out_dir, &name)?;
        }
        OutputFormat::Json => {
            let name = format!("{stem}.json");
            #[derive(Serialize)]
            struct GridJson<'a> {
                schema_version: u32,
                n: u32,
                kind: &'a str,
                mass: f64,
                points: &'a [f64],
                values: &'a [f64],
            }
            let doc = GridJson {
                schema_version: REPORT_SCHEMA_VERSION,
                n,
                kind,
                mass: grid.mass(),
                points: grid.points(),
                values: grid.values(),
            };
            write_json(&cfg.out_dir.join(&name), &doc)?;
            manifest.record_output(&cfg.out_dir, &name)?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> RmtResult<()> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| Error::inconsistency("write_json", e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run_density(cfg: &RunConfig, manifest: &mut RunManifest) -> RmtResult<bool> {
    for &n in &cfg.n {
        let batch = sampler::sample_batch(n, cfg.ensemble, cfg.samples, cfg.seed)?;
        manifest.eigensolver_retries += batch.eigensolver_retries;
        let hist =
            sampler::estimate_density(&batch.samples, cfg.bins as usize, density_support(n, cfg.ensemble))?;
        write_density_data(
            cfg,
            manifest,
            &format!("density_N{n}"),
            &hist.grid,
            n,
            cfg.ensemble.tag(),
        )?;
    }
    Ok(true)
}

fn run_sample(cfg: &RunConfig, manifest: &mut RunManifest) -> RmtResult<bool> {
    for &n in &cfg.n {
        let batch = sampler::sample_batch(n, cfg.ensemble, cfg.samples, cfg.seed)?;
        manifest.eigensolver_retries += batch.eigensolver_retries;
        let name = format!("samples_N{n}.csv");
        let mut out = String::new();
        out.push_str(&format!(
            "# ensemble={} N={} samples={} seed={}\n",
            cfg.ensemble.tag(),
            n,
            cfg.samples,
            cfg.seed
        ));
        out.push_str("index");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (i, s) in batch.samples.iter().enumerate() {
            out.push_str(&i.to_string());
            for v in s.eigenvalues() {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        fs::write(cfg.out_dir.join(&name), out)?;
        manifest.record_output(&cfg.out_dir, &name)?;
    }
    Ok(true)
}

fn run_ratio(cfg: &RunConfig, manifest: &mut RunManifest) -> RmtResult<bool> {
    #[derive(Serialize)]
    struct RatioRow {
        n: u32,
        samples: u64,
        ratio: f64,
        std_error: f64,
    }
    #[derive(Serialize)]
    struct RatioReport {
        schema_version: u32,
        seed: u64,
        rows: Vec<RatioRow>,
    }
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let est = sampler::top_eigenvalue_ratio(n, cfg.samples, cfg.seed)?;
        rows.push(RatioRow { n, samples: cfg.samples, ratio: est.value, std_error: est.std_error });
    }
    let report = RatioReport { schema_version: REPORT_SCHEMA_VERSION, seed: cfg.seed, rows };
    write_json(&cfg.out_dir.join("ratio.json"), &report)?;
    manifest.record_output(&cfg.out_dir, "ratio.json")?;
    Ok(true)
}

fn run_verify_selberg(cfg: &RunConfig, manifest: &mut RunManifest) -> RmtResult<bool> {
    #[derive(Serialize)]
    struct SelbergReport {
        schema_version: u32,
        seed: u64,
        pass: bool,
        rows: Vec<oracles::SelbergCheck>,
    }
    let rows = oracles::verify_selberg_report(cfg.seed)?;
    let pass = rows.iter().all(|r| r.pass);
    let report = SelbergReport { schema_version: REPORT_SCHEMA_VERSION, seed: cfg.seed, pass, rows };
    write_json(&cfg.out_dir.join("selberg_report.json"), &report)?;
    manifest.record_output(&cfg.out_dir, "selberg_report.json")?;
    if !pass {
        eprintln!("verify-selberg failed; detail in selberg_report.json");
    }
    Ok(pass)
}

fn write_overlay_csv(
    cfg: &RunConfig,
    manifest: &mut RunManifest,
    name: &str,
    header: &str,
    overlay: &[(f64, f64, f64)],
) -> RmtResult<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push_str("x,estimated,reference\n");
    for (x, est, reference) in overlay {
        out.push_str(&format!("{x},{est},{reference}\n"));
    }
    fs::write(cfg.out_dir.join(name), out)?;
    manifest.record_output(&cfg.out_dir, name)?;
    Ok(())
}

fn run_verify_integral_eq(cfg: &RunConfig, manifest: &mut RunManifest) -> RmtResult<bool> {
    #[derive(Serialize)]
    struct IntegralEqDoc {
        schema_version: u32,
        seed: u64,
        pass: bool,
        rows: Vec<integral_eq::IntegralEqReport>,
    }
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let report =
            integral_eq::verify_integral_equation(n, cfg.samples, cfg.bins as usize, cfg.seed)?;
        manifest.eigensolver_retries += report.eigensolver_retries;
        let header = format!(
            "# N={} kind=forward_vs_gue samples={} bins={} seed={}\n",
            n, cfg.samples, cfg.bins, cfg.seed
        );
        write_overlay_csv(cfg, manifest, &format!("integral_eq_N{n}.csv"), &header, &report.overlay)?;
        rows.push(report);
    }
    let pass = rows.iter().all(|r| r.pass);
    let doc = IntegralEqDoc { schema_version: REPORT_SCHEMA_VERSION, seed: cfg.seed, pass, rows };
    write_json(&cfg.out_dir.join("integral_eq_report.json"), &doc)?;
    manifest.record_output(&cfg.out_dir, "integral_eq_report.json")?;
    if !pass {
        eprintln!("verify-integral-eq failed; detail in integral_eq_report.json");
    }
    Ok(pass)
}

fn run_semicircle_report(cfg: &RunConfig, manifest: &mut RunManifest) -> RmtResult<bool> {
    #[derive(Serialize)]
    struct SemicircleDoc {
        schema_version: u32,
        seed: u64,
        pass: bool,
        monotone: bool,
        rows: Vec<integral_eq::SemicircleRow>,
    }
    let report = integral_eq::semicircle_convergence_report(
        &cfg.n,
        cfg.samples,
        cfg.bins as usize,
        cfg.seed,
    )?;
    for row in &report.rows {
        manifest.eigensolver_retries += row.eigensolver_retries;
        let header = format!(
            "# N={} kind=rho_vs_semicircle samples={} bins={} seed={}\n",
            row.n, cfg.samples, cfg.bins, cfg.seed
        );
        write_overlay_csv(
            cfg,
            manifest,
            &format!("semicircle_N{}.csv", row.n),
            &header,
            &row.overlay,
        )?;
    }
    let doc = SemicircleDoc {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: cfg.seed,
        pass: report.pass,
        monotone: report.monotone,
        rows: report.rows,
    };
    write_json(&cfg.out_dir.join("semicircle_report.json"), &doc)?;
    manifest.record_output(&cfg.out_dir, "semicircle_report.json")?;
    if !doc.pass {
        eprintln!("semicircle-report failed; detail in semicircle_report.json");
    }
    Ok(doc.pass)
}
