use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use junction_core::basis::{dimension, FockBasis};
use junction_core::config::{AnalysisSettings, RunConfig};
use junction_core::runner::{run_ensemble, RunReport};
use junction_core::spectral::surmise_mean;
use junction_core::Error;

/// Floquet junctions between ergodic and localized domains in a driven
/// boson chain.
#[derive(Parser)]
#[command(name = "junction", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed for the disorder realizations.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Particle number(s), comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    particles: Vec<u32>,
    /// Number of sites.
    #[arg(long = "L")]
    sites: Option<usize>,
    /// Disorder strength(s), comma separated.
    #[arg(long = "W", value_delimiter = ',')]
    w: Vec<f64>,
    /// Disorder realizations per case.
    #[arg(long)]
    realizations: Option<usize>,
    /// Midpoint substeps per drive period.
    #[arg(long = "K")]
    steps_per_period: Option<usize>,
    /// Worker threads (the JUNCTION_WORKERS variable takes precedence).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Fock-space dimension, optionally the listing.
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        particles: Option<u32>,
        #[arg(long = "L")]
        sites: Option<usize>,
        /// Print every configuration with its 1-based index.
        #[arg(long)]
        list: bool,
    },
    /// Floquet operator, quasienergies, modes and H_eff.
    Floquet(Single),
    /// Adjacency graph of H_eff, degrees and density.
    Graph(Single),
    /// Spacing-ratio statistics over the ensemble.
    Levels(Single),
    /// Participation ratios of the Floquet modes.
    Pr(Single),
    /// Classical stability chart and Poincare sections.
    Classical {
        #[command(flatten)]
        common: Common,
        /// Only the stability chart.
        #[arg(long)]
        chart: bool,
        /// Only the Poincare sections.
        #[arg(long)]
        poincare: bool,
    },
    /// Emulated stroboscopic spectroscopy in the single-particle sector.
    Spectroscopy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Overrides,
        /// Number of stroboscopic samples.
        #[arg(long = "Q")]
        q: Option<usize>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        /// Relative peak threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Hardcore-boson limit: fermionic effective matrix and spin couplings.
    Jw(Single),
    /// Full run as configured.
    Ensemble(Single),
    /// Stability chart and Poincare insets.
    #[command(name = "reproduce-fig1")]
    ReproduceFig1 {
        #[command(flatten)]
        common: Common,
    },
    /// H_eff, graphs and degree distributions for N = 2.
    #[command(name = "reproduce-fig2")]
    ReproduceFig2(Single),
    /// Mode amplitudes, participation ratios and level statistics for N = 2.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3(Single),
}

#[derive(Args)]
struct Single {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: Overrides,
}

fn load(common: &Common, default_dir: &str) -> Result<RunConfig, Error> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig {
            output: PathBuf::from("out").join(default_dir),
            ..RunConfig::default()
        },
    };
    if let Some(out) = &common.out {
        config.output = out.clone();
    }
    if let Some(seed) = common.seed {
        config.ensemble.base_seed = seed;
    }
    Ok(config)
}

fn apply(config: &mut RunConfig, o: &Overrides) {
    if !o.particles.is_empty() {
        config.model.particles = o.particles.clone();
    }
    if let Some(l) = o.sites {
        config.model.sites = l;
    }
    if !o.w.is_empty() {
        config.model.w = o.w.clone();
    }
    if let Some(r) = o.realizations {
        config.ensemble.realizations = r;
    }
    if let Some(k) = o.steps_per_period {
        config.propagator.steps_per_period = k;
    }
    if let Some(w) = o.workers {
        config.ensemble.workers = Some(w);
    }
}

/// Single-realization commands run one realization unless asked otherwise.
fn single(args: &Single, name: &str, toggles: impl Fn(&mut AnalysisSettings)) -> Result<RunConfig, Error> {
    let mut config = load(&args.common, name)?;
    if args.model.realizations.is_none() {
        config.ensemble.realizations = 1;
    }
    apply(&mut config, &args.model);
    only(&mut config, toggles);
    Ok(config)
}

fn only(config: &mut RunConfig, toggles: impl Fn(&mut AnalysisSettings)) {
    let mut a = AnalysisSettings::none(config.analysis.cutoff);
    a.r_bins = config.analysis.r_bins;
    toggles(&mut a);
    config.analysis = a;
}

fn report(r: &RunReport) {
    for c in &r.manifest.cases {
        let mut line = format!("N={} W={}: {} realizations", c.particles, c.w, c.realizations_ok);
        if let Some(d) = c.mean_density {
            line += &format!(", mean density {d:.4}");
        }
        if let (Some(k), Some(v)) = (c.mean_degree, c.degree_variance) {
            line += &format!(", mean degree {k:.3} (variance {v:.3})");
        }
        if let Some(m) = c.mean_r {
            line += &format!(", mean r {m:.4}");
        }
        println!("{line}");
    }
    for f in &r.manifest.failures {
        eprintln!("failed: {} realization {} (seed {}): {}", f.case, f.realization, f.seed, f.error);
    }
    println!("output: {}", r.dir.display());
}

fn execute(config: RunConfig) -> Result<i32, Error> {
    let r = run_ensemble(&config)?;
    report(&r);
    if config.analysis.rstats && !r.manifest.cases.is_empty() {
        println!(
            "reference means: GOE {:.4}, Poisson {:.4}",
            surmise_mean(true, 4000),
            surmise_mean(false, 4000)
        );
    }
    Ok(r.exit_code())
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Basis {
            common,
            particles,
            sites,
            list,
        } => {
            let config = match &common.config {
                Some(path) => Some(RunConfig::from_file(path)?),
                None => None,
            };
            let n = particles
                .or_else(|| config.as_ref().map(|c| c.model.particles[0]))
                .unwrap_or(2);
            let l = sites.or_else(|| config.as_ref().map(|c| c.model.sites)).unwrap_or(12);
            println!("{}", dimension(n, l)?);
            if list || common.out.is_some() {
                let basis = FockBasis::enumerate(n, l)?;
                if list {
                    for (i, s) in basis.states().iter().enumerate() {
                        println!("{} {}", i + 1, s);
                    }
                }
                if let Some(out) = &common.out {
                    std::fs::create_dir_all(out)?;
                    basis.write_csv(std::io::BufWriter::new(std::fs::File::create(out.join("basis.csv"))?))?;
                }
            }
            Ok(0)
        }
        Command::Floquet(args) => execute(single(&args, "floquet", |a| a.floquet = true)?),
        Command::Graph(args) => execute(single(&args, "graph", |a| {
            a.floquet = true;
            a.graph = true;
        })?),
        Command::Pr(args) => execute(single(&args, "pr", |a| {
            a.floquet = true;
            a.pr = true;
        })?),
        Command::Jw(args) => execute(single(&args, "jw", |a| a.jw = true)?),
        Command::Levels(args) => {
            let mut config = load(&args.common, "levels")?;
            apply(&mut config, &args.model);
            only(&mut config, |a| {
                a.floquet = true;
                a.rstats = true;
            });
            execute(config)
        }
        Command::Classical { common, chart, poincare } => {
            let mut config = load(&common, "classical")?;
            only(&mut config, |a| a.classical = true);
            if chart || poincare {
                config.classical.chart = chart;
                config.classical.poincare = poincare;
            }
            execute(config)
        }
        Command::Spectroscopy {
            common,
            model,
            q,
            noise_sigma,
            threshold,
        } => {
            let mut config = load(&common, "spectroscopy")?;
            apply(&mut config, &model);
            only(&mut config, |a| a.spectroscopy = true);
            if let Some(q) = q {
                config.spectroscopy.q = q;
            }
            if let Some(s) = noise_sigma {
                config.spectroscopy.noise_sigma = s;
            }
            if let Some(t) = threshold {
                config.spectroscopy.threshold = t;
            }
            execute(config)
        }
        Command::Ensemble(args) => {
            let mut config = load(&args.common, "ensemble")?;
            apply(&mut config, &args.model);
            execute(config)
        }
        Command::ReproduceFig1 { common } => {
            let mut config = load(&common, "fig1")?;
            only(&mut config, |a| a.classical = true);
            execute(config)
        }
        Command::ReproduceFig2(args) => {
            let mut config = load(&args.common, "fig2")?;
            config.model.particles = vec![2];
            config.model.w = vec![config.model.g0, 10.0 * config.model.g0];
            apply(&mut config, &args.model);
            only(&mut config, |a| {
                a.floquet = true;
                a.graph = true;
            });
            execute(config)
        }
        Command::ReproduceFig3(args) => {
            let mut config = load(&args.common, "fig3")?;
            config.model.particles = vec![2];
            config.model.w = vec![config.model.g0, 10.0 * config.model.g0];
            apply(&mut config, &args.model);
            only(&mut config, |a| {
                a.floquet = true;
                a.pr = true;
                a.rstats = true;
            });
            execute(config)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
