use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use rsu_trust::fuzzy::{Assessor, FuzzyConfig, FuzzyEngine, LookupGrid, LookupTable};
use rsu_trust::presets::{preset, PRESET_NAMES};
use rsu_trust::report::{aggregate, write_aggregate, SeedRun, SummaryReport};
use rsu_trust::sim::{
    artifact_header, fuzzy_config_hash, run, write_histogram, SimConfig, Snapshot, Trace,
};
use rsu_trust::AssessmentMode;

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "rsutrust", version, about = "Fuzzy RSU trust experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one preset with one seed.
    Run(RunArgs),
    /// Run one preset over several seeds in parallel.
    Sweep(SweepArgs),
    /// Precompute the assessment grid and write it as a lookup cache.
    ExportLookup(ExportArgs),
    /// List the shipped presets.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fuzzy,
    Fixed,
}

impl From<ModeArg> for AssessmentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fuzzy => AssessmentMode::Fuzzy,
            ModeArg::Fixed => AssessmentMode::Fixed,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    preset: String,
    /// Overrides the preset's assessment mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, env = "RSUTRUST_OUT", default_value = "rsutrust-out")]
    out: PathBuf,
    #[arg(long)]
    fuzzy_config: Option<PathBuf>,
    /// Lookup cache to assess from; built and written if it does not exist.
    #[arg(long)]
    lookup_cache: Option<PathBuf>,
    #[arg(long)]
    trace_cadence: Option<f64>,
    /// Also write the trace as gnuplot data blocks, one per vehicle.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated seeds; `a-b` is an inclusive range.
    #[arg(long, required = true)]
    seeds: String,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    fuzzy_config: Option<PathBuf>,
    /// Destination file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

fn io_fail(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::ExportLookup(a) => cmd_export(a),
        Cmd::Presets => {
            for n in PRESET_NAMES {
                println!("{n}\t{}", preset(n).expect("listed").description);
            }
            Ok(())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rsutrust: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = |p: &str| Failure::Usage(format!("invalid seed {p:?} in --seeds"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if b < a {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("--seeds needs at least one seed".into()));
    }
    Ok(out)
}

fn load_fuzzy(path: Option<&Path>) -> Result<FuzzyConfig, Failure> {
    match path {
        None => Ok(FuzzyConfig::default()),
        Some(p) => FuzzyConfig::load(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
    }
}

/// Loads the cache when present, otherwise builds and stores it. The
/// cache's first line records which fuzzy config produced it.
fn lookup_assessor(
    path: &Path,
    fuzzy: &FuzzyConfig,
    engine: &FuzzyEngine,
) -> Result<LookupTable, Failure> {
    let tag = format!("fuzzy_config_hash={}", fuzzy_config_hash(fuzzy));
    if path.exists() {
        let f = File::open(path).map_err(io_fail(path))?;
        let mut r = BufReader::new(f);
        let mut first = String::new();
        r.read_line(&mut first).map_err(io_fail(path))?;
        if first.trim() != format!("# {tag}") {
            return Err(Failure::Config(format!(
                "{}: lookup cache was built from a different fuzzy config",
                path.display()
            )));
        }
        return LookupTable::read_from(r)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
    }
    let t = LookupTable::build(engine, LookupGrid::default())
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    write_file(path, |w| t.write_to(w, Some(&tag)))?;
    Ok(t)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), Failure> {
    let f = File::create(path).map_err(io_fail(path))?;
    let mut w = BufWriter::new(f);
    body(&mut w).and_then(|_| w.flush()).map_err(io_fail(path))
}

struct Prepared {
    name: String,
    config: SimConfig,
    fuzzy: FuzzyConfig,
    assessor: Box<dyn Assessor>,
}

/// Resolves everything a run needs before any file is written.
fn prepare(c: &Common) -> Result<Prepared, Failure> {
    let p = preset(&c.preset).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown preset {:?}; available: {}",
            c.preset,
            PRESET_NAMES.join(", ")
        ))
    })?;
    let mut config = p.config;
    if let Some(m) = c.mode {
        config.mode = m.into();
    }
    if let Some(d) = c.duration {
        config.duration_s = d;
    }
    if let Some(t) = c.trace_cadence {
        config.trace_cadence_s = t;
    }
    config.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let fuzzy = load_fuzzy(c.fuzzy_config.as_deref())?;
    let engine = FuzzyEngine::from_config(&fuzzy).map_err(|e| Failure::Config(e.to_string()))?;
    let assessor: Box<dyn Assessor> = match &c.lookup_cache {
        Some(path) => Box::new(lookup_assessor(path, &fuzzy, &engine)?),
        None => Box::new(engine),
    };
    Ok(Prepared {
        name: p.name.to_string(),
        config,
        fuzzy,
        assessor,
    })
}

fn write_gnuplot(trace: &Trace, vehicles: usize, w: &mut impl Write, header: &str) -> io::Result<()> {
    writeln!(w, "# {header}")?;
    writeln!(w, "# blocks by vehicle id; columns: time_s trust")?;
    for v in 0..vehicles {
        writeln!(w, "# vehicle {v}")?;
        for s in trace.series(v) {
            writeln!(w, "{:.3} {:.6}", s.time_s, s.trust)?;
        }
        writeln!(w)?;
        writeln!(w)?;
    }
    Ok(())
}

fn write_artifacts(
    dir: &Path,
    p: &Prepared,
    cfg: &SimConfig,
    trace: &Trace,
    gnuplot: bool,
) -> Result<SummaryReport, Failure> {
    fs::create_dir_all(dir).map_err(io_fail(dir))?;
    let header = artifact_header(&p.name, cfg, &p.fuzzy);
    let f = |n: &str| dir.join(n);
    write_file(&f("config.toml"), |w| {
        writeln!(w, "# {header}")?;
        w.write_all(cfg.to_toml_string().as_bytes())
    })?;
    write_file(&f("trace.csv"), |w| trace.write_trace(w, &header))?;
    write_file(&f("verdicts.csv"), |w| trace.write_verdicts(w, &header))?;
    write_file(&f("transitions.csv"), |w| trace.write_transitions(w, &header))?;
    for (name, at) in [("density_start.csv", Snapshot::Start), ("density_end.csv", Snapshot::End)] {
        let bins = trace.snapshot_density(at, 0.05);
        write_file(&f(name), |w| write_histogram(&bins, w, &header))?;
    }
    let summary = SummaryReport::from_trace(cfg, trace, false);
    write_file(&f("summary.csv"), |w| summary.write_csv(w, &header))?;
    if gnuplot {
        write_file(&f("trace.dat"), |w| write_gnuplot(trace, cfg.vehicles, w, &header))?;
    }
    Ok(summary)
}

fn print_summary(s: &SummaryReport) {
    let opt = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{t:.0}"));
    println!("vehicle role      initial  final    min      disputes wins losses t_max  t_block");
    for d in &s.drivers {
        println!(
            "{:<7} {:<9} {:<8.4} {:<8.4} {:<8.4} {:<8} {:<4} {:<6} {:<6} {}",
            d.vehicle,
            d.role,
            d.initial_trust,
            d.final_trust,
            d.min_trust,
            d.disputes,
            d.wins,
            d.losses,
            opt(d.time_to_max),
            opt(d.time_to_blacklist)
        );
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let p = prepare(&a.common)?;
    let cfg = SimConfig {
        seed: a.seed,
        ..p.config.clone()
    };
    let trace = run(&cfg, p.assessor.as_ref()).map_err(|e| Failure::Runtime(e.to_string()))?;
    let summary = write_artifacts(&a.common.out, &p, &cfg, &trace, a.common.gnuplot)?;
    println!("{}", artifact_header(&p.name, &cfg, &p.fuzzy));
    print_summary(&summary);
    println!("artifacts in {}", a.common.out.display());
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let seeds = parse_seeds(&a.seeds)?;
    let p = prepare(&a.common)?;
    let out = &a.common.out;
    let results: Vec<(SeedRun, Option<Failure>)> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SimConfig {
                seed,
                ..p.config.clone()
            };
            let result = run(&cfg, p.assessor.as_ref());
            let written = match &result {
                Ok(t) => write_artifacts(&out.join(format!("seed-{seed}")), &p, &cfg, t, a.common.gnuplot)
                    .err(),
                Err(e) => Some(Failure::Runtime(format!("seed {seed}: {e}"))),
            };
            (SeedRun { seed, result }, written)
        })
        .collect();
    let mut failed = 0;
    let mut runs = Vec::with_capacity(results.len());
    for (r, err) in results {
        if let Some(e) = err {
            eprintln!("rsutrust: seed {}: {}", r.seed, e.message());
            failed += 1;
        }
        runs.push(r);
    }
    let rows = aggregate(&p.config, &runs);
    let header = format!(
        "preset={} seeds={} mode={} config_hash={}",
        p.name,
        seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        p.config.mode,
        rsu_trust::sim::config_hash(&p.config, &p.fuzzy)
    );
    let path = out.join("aggregate.csv");
    fs::create_dir_all(out).map_err(io_fail(out))?;
    write_file(&path, |w| write_aggregate(&rows, w, &header))?;
    println!("{header}");
    println!("vehicle role      runs mean_final stddev  blacklist_rate max_trust_rate");
    for r in &rows {
        println!(
            "{:<7} {:<9} {:<4} {:<10.4} {:<7.4} {:<14.3} {:.3}",
            r.vehicle, r.role, r.runs, r.mean_final, r.stddev_final, r.blacklist_rate, r.max_trust_rate
        );
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} seeds failed", seeds.len())));
    }
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<(), Failure> {
    let fuzzy = load_fuzzy(a.fuzzy_config.as_deref())?;
    let engine = FuzzyEngine::from_config(&fuzzy).map_err(|e| Failure::Config(e.to_string()))?;
    let t = LookupTable::build(&engine, LookupGrid::default())
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let tag = format!("fuzzy_config_hash={}", fuzzy_config_hash(&fuzzy));
    write_file(&a.out, |w| t.write_to(w, Some(&tag)))?;
    println!("wrote {} rows to {}", t.len(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("1,2,5").unwrap(), [1, 2, 5]);
        assert_eq!(parse_seeds("3-6").unwrap(), [3, 4, 5, 6]);
        assert_eq!(parse_seeds("1, 4-5").unwrap(), [1, 4, 5]);
        assert!(matches!(parse_seeds(""), Err(Failure::Usage(_))));
        assert!(matches!(parse_seeds("5-2"), Err(Failure::Usage(_))));
        assert!(matches!(parse_seeds("x"), Err(Failure::Usage(_))));
    }
}
