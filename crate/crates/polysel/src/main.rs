use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use polysel::config::Config;
use polysel::experiments::{
    run_ci, run_coverage_check, run_floor_curves, run_heatmap, run_length_curve, run_quantile_study,
};
use polysel::io::{create_dir, read_matrix, read_vector, write_csv, Manifest};
use polysel::sim::{derive_seed, substream};
use rand::Rng;

#[derive(Parser)]
#[command(name = "polysel", version, about = "Selective confidence intervals after the Lasso")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Interval length as a function of the observed value.
    Lengthcurve(Common),
    /// Asymptotic quantile floors of the interval length.
    Floorcurves(Common),
    /// Fraction of draws certified to have infinite expected length.
    Heatmap(Common),
    /// Empirical quantiles of the interval length with reciprocal fits.
    Quantiles(Common),
    /// Monte Carlo coverage of both intervals.
    Coverage(Common),
    /// Intervals for a dataset read from CSV.
    Ci {
        #[command(flatten)]
        common: Common,
        /// Design matrix CSV, one row per observation.
        #[arg(long)]
        x: Option<PathBuf>,
        /// Response CSV, one value per row.
        #[arg(long)]
        y: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    Ok(cfg)
}

fn finish(mut manifest: Manifest, out: &Path, files: &[&str]) -> Result<()> {
    manifest.outputs = files.iter().map(|f| (*f).to_owned()).collect();
    manifest.write(out)?;
    for note in manifest.notes.iter().take(3) {
        eprintln!("note: {note}");
    }
    if manifest.notes.len() > 3 {
        eprintln!("note: {} more in manifest.json", manifest.notes.len() - 3);
    }
    println!("wrote {} and manifest.json to {}", files.join(", "), out.display());
    Ok(())
}

fn run(command: Command) -> Result<()> {
    let (name, common) = match &command {
        Command::Lengthcurve(c) => ("lengthcurve", c),
        Command::Floorcurves(c) => ("floorcurves", c),
        Command::Heatmap(c) => ("heatmap", c),
        Command::Quantiles(c) => ("quantiles", c),
        Command::Coverage(c) => ("coverage", c),
        Command::Ci { common, .. } => ("ci", common),
    };
    let mut cfg = load(common)?;
    let out = common.out.clone();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers)
        .build()
        .context("building the worker pool")?;
    create_dir(&out)?;

    match command {
        Command::Lengthcurve(_) => {
            let spec = &cfg.lengthcurve;
            let curve = run_length_curve(&spec.set()?, spec.variance, cfg.scenario.alpha, &spec.grid.values())?;
            write_csv(&out.join("lengthcurve.csv"), &curve.rows)?;
            let mut m = Manifest::new(name, &cfg);
            m.count("rows", curve.rows.len());
            m.count("skipped", curve.notes.len());
            m.notes = curve.notes;
            finish(m, &out, &["lengthcurve.csv"])
        }
        Command::Floorcurves(_) => {
            let spec = &cfg.floorcurves;
            let rows = run_floor_curves(
                &spec.thetas,
                spec.variance,
                spec.upper,
                &spec.kappas.values(),
                cfg.scenario.alpha,
            )?;
            write_csv(&out.join("floorcurves.csv"), &rows)?;
            finish(Manifest::new(name, &cfg), &out, &["floorcurves.csv"])
        }
        Command::Heatmap(_) => {
            let res = pool.install(|| run_heatmap(&cfg.scenario, &cfg.heatmap))?;
            write_csv(&out.join("heatmap.csv"), &res.cells)?;
            write_csv(&out.join("heatmap_reps.csv"), &res.records)?;
            let mut m = Manifest::new(name, &cfg);
            m.count("draws", res.records.len());
            m.count("redraws", res.total_redraws());
            for c in &res.cells {
                println!(
                    "p={:<4} lambda={:<6} certified={:.3} ratio=[{}, {}]",
                    c.p,
                    c.lambda,
                    c.fraction_certified,
                    c.min_ratio.map_or("-".into(), |v| format!("{v:.3}")),
                    c.max_ratio.map_or("-".into(), |v| format!("{v:.3}")),
                );
            }
            finish(m, &out, &["heatmap.csv", "heatmap_reps.csv"])
        }
        Command::Quantiles(_) => {
            let res = pool.install(|| run_quantile_study(&cfg.scenario, &cfg.quantiles))?;
            write_csv(&out.join("quantiles.csv"), &res.rows)?;
            write_csv(&out.join("quantiles_reps.csv"), &res.records)?;
            let mut m = Manifest::new(name, &cfg);
            for s in &res.summaries {
                m.count(&format!("accepted[{}]", s.label), s.accepted);
                m.count(&format!("empty_models[{}]", s.label), s.empty_models);
                m.count(&format!("fallbacks[{}]", s.label), s.fallbacks);
                m.count(&format!("r_squared[{}]", s.label), s.fit.r_squared);
                println!(
                    "norm {:<14} a={:.4} b={:.4} R2={:.4} empty={} fallbacks={}",
                    s.label, s.fit.a, s.fit.b, s.fit.r_squared, s.empty_models, s.fallbacks
                );
            }
            m.count("redraws", res.records.iter().map(|r| r.redraws).sum::<usize>());
            finish(m, &out, &["quantiles.csv", "quantiles_reps.csv"])
        }
        Command::Coverage(_) => {
            let res = pool.install(|| run_coverage_check(&cfg.scenario, &cfg.coverage))?;
            write_csv(&out.join("coverage.csv"), &res.rows)?;
            write_csv(&out.join("coverage_reps.csv"), &res.records)?;
            let mut m = Manifest::new(name, &cfg);
            m.count("redraws", res.records.iter().map(|r| r.redraws).sum::<usize>());
            for r in &res.rows {
                println!(
                    "{:<40} nominal={:.3} empirical={:.4} n={}",
                    r.conditioning, r.nominal, r.empirical, r.accepted_reps
                );
            }
            finish(m, &out, &["coverage.csv", "coverage_reps.csv"])
        }
        Command::Ci { x, y, .. } => {
            if let Some(x) = x {
                cfg.ci.x = Some(x);
            }
            if let Some(y) = y {
                cfg.ci.y = Some(y);
            }
            let (Some(xp), Some(yp)) = (&cfg.ci.x, &cfg.ci.y) else {
                bail!("ci needs a design and a response: pass --x and --y or set ci.x and ci.y");
            };
            let xm = read_matrix(xp, cfg.ci.has_headers)?;
            let yv = read_vector(yp, cfg.ci.has_headers)?;
            let u: f64 = substream(derive_seed(cfg.scenario.seed, "ci/empty-model"), 0).random();
            let report = run_ci(
                &xm,
                &yv,
                cfg.scenario.lambda,
                cfg.ci.position,
                cfg.ci.sigma2,
                cfg.scenario.alpha,
                cfg.scenario.cap,
                u,
            )?;
            write_csv(&out.join("ci.csv"), &report.rows)?;
            for r in &report.rows {
                println!(
                    "{:<24} [{}, {}]  estimate={} model={} signs={} certificate={}",
                    r.conditioning, r.lower, r.upper, r.estimate, r.model, r.signs, r.verdict
                );
            }
            let mut m = Manifest::new(name, &cfg);
            if report.sigma2_estimated {
                m.notes.push("noise variance estimated from the full-model residuals".into());
            }
            finish(m, &out, &["ci.csv"])
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
