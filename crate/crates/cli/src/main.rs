//! `sibmm`: loss bounds for credit portfolios under dependence uncertainty.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use sibmm::portfolio::{beta_params, LgdSpec, ModelFamily, Portfolio, Scenario};
use sibmm::profile::{write_curves_csv, DefaultProfile};
use sibmm::risk::{borrower_model, dkw_epsilon, envelope_profiles, risk_report, sup_cdf_distance};
use sibmm::simulate::{exact_loss_distribution, simulate_losses, SimConfig};
use sibmm::tolerance::PROFILE_GRID_KNOTS;

/// Chain violations beyond this many pooled standard errors fail `bounds`.
const CHAIN_SLACK: f64 = 3.0;

#[derive(Parser)]
#[command(name = "sibmm", version, about = "AVaR bounds for credit portfolios in stochastically increasing Bernoulli mixture models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate lower/upper bound portfolios and benchmarks; write report.csv, report.txt, meta.json.
    Bounds(RunArgs),
    /// Write default integral functions and conditional pds per model.
    Curves {
        #[command(flatten)]
        run: RunArgs,
        /// Borrower whose curves are written (default: first with positive exposure).
        #[arg(long)]
        borrower: Option<String>,
        #[arg(long, default_value_t = PROFILE_GRID_KNOTS)]
        knots: usize,
    },
    /// Parse the scenario and portfolio and print resolved parameters.
    Validate(RunArgs),
    /// Compare Monte Carlo losses with the exact distribution (at most 20 borrowers).
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Model family to check (default: first in the scenario).
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_enum, default_value_t = Bound::Lower)]
        bound: Bound,
        #[arg(long, default_value_t = 32)]
        quad_nodes: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    Lower,
    Upper,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the scenario value, then to all cores.
    #[arg(long, env = "SIBMM_WORKERS")]
    workers: Option<usize>,
}

/// An error that maps to exit status 2.
#[derive(Debug)]
struct InvariantViolation(String);

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvariantViolation {}

struct Loaded {
    scenario: Scenario,
    portfolio: Portfolio,
    cfg: SimConfig,
    config_sha256: String,
}

impl RunArgs {
    fn load(&self) -> Result<Loaded> {
        let raw = fs::read(&self.scenario).with_context(|| format!("reading {}", self.scenario.display()))?;
        let mut scenario =
            Scenario::load(&self.scenario).with_context(|| format!("loading {}", self.scenario.display()))?;
        if let Some(n) = self.samples {
            scenario.mc.samples = n;
        }
        if let Some(s) = self.seed {
            scenario.mc.seed = s;
        }
        if let Some(w) = self.workers {
            scenario.mc.workers = Some(w);
        }
        scenario.validate()?;
        let mut hasher = Sha256::new();
        hasher.update(&raw);
        if let Some(p) = scenario.portfolio_path() {
            hasher.update(fs::read(&p).with_context(|| format!("reading {}", p.display()))?);
        }
        let config_sha256 = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        let portfolio = scenario.build_portfolio()?;
        let workers = scenario
            .mc
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cfg = SimConfig::new(scenario.mc.samples, scenario.mc.seed, workers);
        Ok(Loaded {
            scenario,
            portfolio,
            cfg,
            config_sha256,
        })
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    command: &'static str,
    scenario: String,
    config_sha256: &'a str,
    seed: u64,
    samples: usize,
    workers: usize,
    wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a sibmm::RiskReport>,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn bounds(args: &RunArgs) -> Result<()> {
    let start = Instant::now();
    let l = args.load()?;
    let out = args.out_dir()?;
    let report = risk_report(&l.scenario, &l.portfolio, l.cfg)?;
    let text = report.to_text();
    write(&out.join("report.csv"), report.to_csv())?;
    write(&out.join("report.txt"), &text)?;
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        command: "bounds",
        scenario: args.scenario.display().to_string(),
        config_sha256: &l.config_sha256,
        seed: l.cfg.seed,
        samples: l.cfg.samples,
        workers: l.cfg.workers,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        report: Some(&report),
    };
    write(&out.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    print!("{text}");
    let violations = report.chain_violations(CHAIN_SLACK);
    if !violations.is_empty() {
        return Err(InvariantViolation(format!("ordering chain broken:\n  {}", violations.join("\n  "))).into());
    }
    Ok(())
}

fn file_stem(model: ModelFamily) -> String {
    serde_json::to_value(model)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "model".into())
}

fn curves(args: &RunArgs, borrower: Option<&str>, knots: usize) -> Result<()> {
    let l = args.load()?;
    let out = args.out_dir()?;
    let b = match borrower {
        Some(name) => l
            .portfolio
            .borrowers()
            .iter()
            .find(|b| b.name == name)
            .with_context(|| format!("no borrower named `{name}`"))?,
        None => l
            .portfolio
            .borrowers()
            .iter()
            .find(|b| b.exposure_weight > 0.0)
            .context("portfolio has no borrower with positive exposure")?,
    };
    let mut written = Vec::new();
    for &model in &l.scenario.models {
        let m = borrower_model(model, b)?;
        let mut curves: Vec<(&str, &DefaultProfile)> = vec![("lower", &m.envelope.lower)];
        curves.extend(m.members.iter().map(|(n, p)| (*n, p)));
        curves.push(("upper", &m.envelope.upper));
        let path = out.join(format!("curves_{}.csv", file_stem(model)));
        write_curves_csv(fs::File::create(&path)?, &curves, knots)?;
        written.push(path);
    }
    let ind = DefaultProfile::independent(b.pd)?;
    let com = DefaultProfile::comonotone(b.pd)?;
    let path = out.join("curves_benchmarks.csv");
    write_curves_csv(fs::File::create(&path)?, &[("independent", &ind), ("comonotone", &com)], knots)?;
    written.push(path);
    println!("borrower `{}` (pd {})", b.name, b.pd);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn validate(args: &RunArgs) -> Result<()> {
    let l = args.load()?;
    let s = &l.scenario;
    println!("scenario: {}", s.label);
    println!(
        "models: {}",
        s.models.iter().map(|m| m.label()).collect::<Vec<_>>().join(", ")
    );
    println!("confidence levels: {:?}", s.alphas);
    println!("mc: {} samples, seed {}, {} workers", l.cfg.samples, l.cfg.seed, l.cfg.workers);
    let borrowers = l.portfolio.borrowers();
    let identical = borrowers.iter().all(|b| {
        let a = &borrowers[0];
        b.pd == a.pd && b.lgd == a.lgd && b.corr_interval == a.corr_interval && b.exposure_weight == a.exposure_weight
    });
    println!("{} borrowers{}", borrowers.len(), if identical && borrowers.len() > 1 { " (identical)" } else { "" });
    println!("expected loss: {:.4}%", 100.0 * l.portfolio.expected_loss());
    println!(
        "{:<22} {:>9} {:>8} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7}  lgd",
        "name", "pd%", "e%", "rho%", "rho_lo%", "rho_hi%", "theta", "th_lo", "th_hi"
    );
    let shown = if identical { &borrowers[..1] } else { borrowers };
    for b in shown {
        let lgd = match b.lgd {
            LgdSpec::Deterministic { value } => format!("{value}"),
            LgdSpec::Beta { mean, vol } => {
                let (a, c) = beta_params(mean, vol)?;
                format!("Beta({a:.4}, {c:.4})")
            }
        };
        println!(
            "{:<22} {:>9.4} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>7.3} {:>7.3} {:>7.3}  {}",
            b.name,
            100.0 * b.pd,
            100.0 * b.exposure_weight,
            100.0 * b.asset_corr,
            100.0 * b.corr_interval.0,
            100.0 * b.corr_interval.1,
            b.matched_theta(),
            b.theta_interval.0,
            b.theta_interval.1,
            lgd
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleSummary {
    model: &'static str,
    bound: &'static str,
    borrowers: usize,
    samples: usize,
    seed: u64,
    sup_cdf_distance: f64,
    dkw_epsilon_999: f64,
    pass: bool,
}

fn oracle(args: &RunArgs, model: Option<&str>, bound: Bound, quad_nodes: usize) -> Result<()> {
    let l = args.load()?;
    let out = args.out_dir()?;
    let family = match model {
        Some(name) => serde_json::from_value::<ModelFamily>(serde_json::Value::String(name.into()))
            .with_context(|| format!("unknown model `{name}`"))?,
        None => l.scenario.models[0],
    };
    let (lower, upper) = envelope_profiles(family, &l.portfolio)?;
    let (profiles, bound_name) = match bound {
        Bound::Lower => (lower, "lower"),
        Bound::Upper => (upper, "upper"),
    };
    let exact = exact_loss_distribution(&profiles, &l.portfolio, quad_nodes)?;
    let mut csv = String::from("loss,probability\n");
    for (x, w) in exact.points().iter().zip(exact.weights().unwrap_or_default()) {
        csv.push_str(&format!("{x:.12e},{w:.12e}\n"));
    }
    write(&out.join("exact.csv"), csv)?;
    let mc = simulate_losses(&profiles, &l.portfolio, l.cfg)?;
    let d = sup_cdf_distance(&mc, &exact);
    let eps = dkw_epsilon(mc.len(), 0.999);
    let summary = OracleSummary {
        model: family.label(),
        bound: bound_name,
        borrowers: l.portfolio.len(),
        samples: l.cfg.samples,
        seed: l.cfg.seed,
        sup_cdf_distance: d,
        dkw_epsilon_999: eps,
        pass: d <= eps,
    };
    write(&out.join("oracle.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!(
        "{} {} bound, {} borrowers: sup |F_mc - F_exact| = {d:.5}, DKW band {eps:.5}: {}",
        family.label(),
        bound_name,
        l.portfolio.len(),
        if summary.pass { "pass" } else { "FAIL" }
    );
    if !summary.pass {
        bail!(InvariantViolation("Monte Carlo distribution outside the DKW band".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Curves { run, borrower, knots } => curves(run, borrower.as_deref(), *knots),
        Command::Validate(a) => validate(a),
        Command::Oracle {
            run,
            model,
            bound,
            quad_nodes,
        } => oracle(run, model.as_deref(), *bound, *quad_nodes),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvariantViolation>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
