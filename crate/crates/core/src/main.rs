use clap::{Args, Parser, Subcommand};
use covkg::cli::{self, RunConfig, StateChoice, Suite};
use covkg::report::Report;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "covkg", version, about = "Checks for the locally covariant Klein-Gordon field on a lattice cylinder")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// key = value configuration file; built-in defaults otherwise
    #[arg(long)]
    config: Option<PathBuf>,
    /// write the JSON report here
    #[arg(long)]
    json: Option<PathBuf>,
    /// directory for CSV output
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// suites to run, comma separated
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run check suites on the base grid
    Verify {
        /// suites (same as --suite)
        names: Vec<String>,
        #[command(flatten)]
        common: Common,
        /// write solution fields (t,x,value) here
        #[arg(long)]
        dump_fields: Option<PathBuf>,
    },
    /// Rerun suites on dyadically refined grids and fit orders
    Converge {
        #[command(flatten)]
        common: Common,
        /// number of grids, starting at the configured one
        #[arg(long, default_value_t = 3)]
        refine: usize,
    },
    /// CSV data for plots: relative evolution, stress integrand, Wick profiles
    Plotdata {
        #[command(flatten)]
        common: Common,
    },
    /// Relative Cauchy evolution suites
    Rce {
        #[command(flatten)]
        common: Common,
    },
    /// Wick square of one state against the vacuum
    Wick {
        #[command(flatten)]
        common: Common,
        /// vacuum or thermal:BETA
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        mu: Option<f64>,
    },
}

fn load(common: &Common) -> covkg::Result<RunConfig> {
    match &common.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn suites(names: &[String], fallback: &[Suite]) -> covkg::Result<Vec<Suite>> {
    if names.is_empty() {
        return Ok(fallback.to_vec());
    }
    names.iter().flat_map(|n| n.split(',')).filter(|n| !n.is_empty()).map(|n| n.parse()).collect()
}

fn csv_dir(common: &Common, cfg: &RunConfig) -> Option<PathBuf> {
    common.csv_dir.clone().or_else(|| cfg.output_dir.clone())
}

fn finish(report: &Report, json: Option<&Path>) -> covkg::Result<ExitCode> {
    for r in &report.records {
        println!("{}", r.line());
    }
    for row in &report.convergence {
        if row.measured.last().is_some_and(|&e| e <= covkg::tolerances::ROUNDOFF_FLOOR) {
            println!("  order {:<40} n_x {:?}  at round-off", row.name, row.n_x);
            continue;
        }
        let ord: Vec<String> = row.orders.iter().map(|p| format!("{p:.2}")).collect();
        println!("  order {:<40} n_x {:?}  p [{}]", row.name, row.n_x, ord.join(", "));
    }
    let fails = report.failures();
    println!("{} records, {} failed: {}", report.records.len(), fails.len(), if report.pass { "PASS" } else { "FAIL" });
    for f in fails {
        println!("  failed: {} [{}]", f.name, f.anchor);
    }
    if let Some(p) = json {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(report).map_err(|e| covkg::Error::Io(e.to_string()))?;
        std::fs::write(p, text)?;
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: Cli) -> covkg::Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify { names, common, dump_fields } => {
            let cfg = load(&common)?;
            let mut all = names;
            all.extend(common.suite.iter().cloned());
            let list = suites(&all, &cfg.suites)?;
            let report = cli::verify(&cfg, &list, dump_fields.as_deref());
            finish(&report, common.json.as_deref())
        }
        Cmd::Converge { common, refine } => {
            let cfg = load(&common)?;
            let list: Vec<Suite> = suites(&common.suite, &cfg.suites)?.into_iter().filter(|s| cli::suites::has_orders(*s)).collect();
            let report = cli::converge(&cfg, &list, refine);
            finish(&report, common.json.as_deref())
        }
        Cmd::Plotdata { common } => {
            let cfg = load(&common)?;
            let dir = csv_dir(&common, &cfg).unwrap_or_else(|| PathBuf::from("plotdata"));
            for f in cli::plotdata(&cfg, &dir)? {
                println!("{}", dir.join(f).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Rce { common } => {
            let cfg = load(&common)?;
            let rce = [Suite::RceInvariance, Suite::RceDerivative, Suite::RceDivergence];
            let list = suites(&common.suite, &rce)?;
            if let Some(bad) = list.iter().find(|s| !matches!(s, Suite::RceInvariance | Suite::RceTriple | Suite::RceDerivative | Suite::RceDivergence)) {
                return Err(covkg::Error::Config(format!("'{bad}' is not a relative Cauchy evolution suite")));
            }
            let report = cli::verify(&cfg, &list, None);
            finish(&report, common.json.as_deref())
        }
        Cmd::Wick { common, state, mu } => {
            let cfg = load(&common)?;
            let choice = match state {
                Some(s) => s.parse()?,
                None => cfg.wick_state,
            };
            let beta = match choice {
                StateChoice::Vacuum => None,
                StateChoice::Thermal(b) => Some(b),
            };
            let mu = mu.unwrap_or(cfg.wick_mu[0]);
            let dir = csv_dir(&common, &cfg);
            let report = cli::wick_summary(&cfg, beta, mu, dir.as_deref())?;
            finish(&report, common.json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("covkg: {e}");
            ExitCode::from(2)
        }
    }
}
