use std::error::Error;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use kleinian::checks::{box_counting_dimension, resolved_scales, sample_limit_set};
use kleinian::config::RunConfig;
use kleinian::measure::{build_orbital_measure, schedule_s};
use kleinian::orbit::{enumerate_orbit, estimate_delta_with, DeltaOptions, OrbitTable};
use kleinian::render::{render_heatmap, render_points, ChartView};
use kleinian::verify::{run_suites, SUITES};

type CliResult<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "kleinian", version, about = "Orbits, critical exponents and Patterson measures of Kleinian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `run.out_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Orbit radius; overrides `run.radius`.
    #[arg(long, value_name = "R")]
    radius: Option<f64>,
    /// Seed for resampling and subsampling; overrides `run.seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the orbit; writes orbit.csv and orbit_summary.json.
    Orbit(Common),
    /// Estimate the critical exponent; writes delta.txt.
    Delta(Common),
    /// Build the orbital measure; writes measure.csv.
    Measure(Common),
    /// Box-counting dimension of a limit-set sample; writes dimension.txt.
    Dimension(Common),
    /// Plot the limit set (or the measure) in the chart; writes a PPM image.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 800)]
        width: usize,
        #[arg(long, default_value_t = 800)]
        height: usize,
        /// Bin measure weights on a log colour scale instead of plotting points.
        #[arg(long)]
        heatmap: bool,
    },
    /// Run verification suites; writes verify.txt and exits 1 if a check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite to run (repeatable); all suites by default.
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
    },
}

fn load(common: &Common) -> CliResult<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(r) = common.radius {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(format!("--radius {r} must be finite and >= 0").into());
        }
        cfg.radius = r;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn orbit(cfg: &RunConfig) -> CliResult<OrbitTable> {
    let table = enumerate_orbit(&cfg.generators()?, cfg.radius, cfg.atom_cap)?;
    if table.truncated() {
        eprintln!(
            "warning: atom cap {} reached; atoms stored to radius {:.4} of {}",
            cfg.atom_cap,
            table.stored_radius(),
            cfg.radius
        );
    }
    Ok(table)
}

fn cmd_orbit(common: &Common) -> CliResult<()> {
    let (cfg, out) = load(common)?;
    let table = orbit(&cfg)?;
    table.write_csv(BufWriter::new(File::create(out.join("orbit.csv"))?))?;
    let bands = table.histogram().unit_bands();
    let mut s = String::from("{\n");
    writeln!(s, "  \"preset\": \"{}\",", cfg.preset.kind().name())?;
    writeln!(s, "  \"radius\": {:?},", cfg.radius)?;
    writeln!(s, "  \"orbit_points\": {},", table.histogram().total())?;
    writeln!(s, "  \"stored_atoms\": {},", table.len())?;
    writeln!(s, "  \"stored_radius\": {:?},", table.stored_radius())?;
    writeln!(s, "  \"truncated\": {},", table.truncated())?;
    writeln!(s, "  \"band_counts\": [")?;
    for (j, n) in bands.iter().enumerate() {
        let sep = if j + 1 < bands.len() { "," } else { "" };
        writeln!(s, "    {{\"band\": [{j}, {}], \"count\": {n}}}{sep}", j + 1)?;
    }
    s.push_str("  ]\n}\n");
    fs::write(out.join("orbit_summary.json"), &s)?;
    println!(
        "{} orbit points within {}, {} stored",
        table.histogram().total(),
        cfg.radius,
        table.len()
    );
    Ok(())
}

fn cmd_delta(common: &Common) -> CliResult<()> {
    let (cfg, out) = load(common)?;
    let start = Instant::now();
    let table = orbit(&cfg)?;
    let opts = DeltaOptions {
        seed: cfg.seed,
        ..DeltaOptions::default()
    };
    let d = estimate_delta_with(&table, opts)?;
    let mut s = String::new();
    writeln!(s, "delta_hat: {:?}", d.delta_hat)?;
    match d.series_estimate {
        Some(x) => writeln!(s, "series_estimate: {x:?}")?,
        None => writeln!(s, "series_estimate: none")?,
    }
    writeln!(s, "bootstrap_sd: {:?}", d.bootstrap_sd)?;
    writeln!(s, "slope_se: {:?}", d.slope_se)?;
    writeln!(s, "r_squared: {:?}", d.r_squared)?;
    writeln!(s, "fit_range: [{:?}, {:?}]", d.fit_range.0, d.fit_range.1)?;
    writeln!(s, "fit_points: {}", d.points)?;
    writeln!(s, "orbit_points: {}", table.histogram().total())?;
    fs::write(out.join("delta.txt"), &s)?;
    print!("{s}");
    println!("runtime: {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_measure(common: &Common) -> CliResult<()> {
    let (cfg, out) = load(common)?;
    let table = orbit(&cfg)?;
    let d = estimate_delta_with(&table, DeltaOptions { seed: cfg.seed, ..DeltaOptions::default() })?;
    let mu = build_orbital_measure(&table, schedule_s(d.delta_hat, table.stored_radius(), cfg.schedule_c))?;
    for w in &mu.warnings {
        eprintln!("warning: {w}");
    }
    mu.write_csv(BufWriter::new(File::create(out.join("measure.csv"))?))?;
    println!("{} atoms at s = {:.6}, R = {}", mu.len(), mu.s_used, mu.r_used);
    Ok(())
}

fn sample_depth(cfg: &RunConfig) -> f64 {
    cfg.sample_depth.unwrap_or((cfg.radius - 7.0).max(5.0))
}

fn cmd_dimension(common: &Common) -> CliResult<()> {
    let (cfg, out) = load(common)?;
    let table = orbit(&cfg)?;
    let depth = sample_depth(&cfg);
    let sample = sample_limit_set(&table, depth)?;
    let bd = box_counting_dimension(&sample, &resolved_scales(depth, 2f64.sqrt()))?;
    let mut s = String::new();
    writeln!(s, "box_dimension: {:?}", bd.dim)?;
    writeln!(s, "degenerate: {}", bd.degenerate)?;
    writeln!(s, "points: {}", sample.len())?;
    writeln!(s, "sample_depth: {depth:?}")?;
    for (scale, count) in &bd.counts {
        writeln!(s, "count: {scale:?} {count}")?;
    }
    fs::write(out.join("dimension.txt"), &s)?;
    print!("{s}");
    Ok(())
}

fn cmd_render(common: &Common, width: usize, height: usize, heatmap: bool) -> CliResult<()> {
    if width == 0 || height == 0 {
        return Err(kleinian::error::Error::Argument(format!("image size {width}x{height} is empty")).into());
    }
    let (cfg, out) = load(common)?;
    let table = orbit(&cfg)?;
    let view = ChartView::default();
    let (bytes, name) = if heatmap {
        let d = estimate_delta_with(&table, DeltaOptions { seed: cfg.seed, ..DeltaOptions::default() })?;
        let mu = build_orbital_measure(&table, schedule_s(d.delta_hat, table.stored_radius(), cfg.schedule_c))?;
        (render_heatmap(&mu, width, height, view)?, "heatmap.ppm")
    } else {
        // A shallower orbit than the configured depth still gives a picture.
        let depth = sample_depth(&cfg).min(table.stored_radius() - 5.0).max(5.0);
        let sample = sample_limit_set(&table, depth)?;
        (render_points(&sample.points, width, height, view)?, "limit_set.ppm")
    };
    fs::write(out.join(name), bytes)?;
    println!("wrote {}", out.join(name).display());
    Ok(())
}

fn cmd_verify(common: &Common, suites: &[String]) -> CliResult<bool> {
    let (cfg, out) = load(common)?;
    let suites: Vec<String> = if suites.is_empty() {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        suites.to_vec()
    };
    let report = run_suites(&cfg, &suites)?;
    fs::write(out.join("verify.txt"), report.to_text())?;
    print!("{}", report.summary());
    Ok(!report.any_failed())
}

fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Orbit(c) => cmd_orbit(c)?,
        Command::Delta(c) => cmd_delta(c)?,
        Command::Measure(c) => cmd_measure(c)?,
        Command::Dimension(c) => cmd_dimension(c)?,
        Command::Render { common, width, height, heatmap } => cmd_render(common, *width, *height, *heatmap)?,
        Command::Verify { common, suites } => return cmd_verify(common, suites),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
