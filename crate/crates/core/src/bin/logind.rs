use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use logical_induction::deduction::DeductiveProcess;
use logical_induction::harness::check::check_trace;
use logical_induction::harness::io::{
    format_exploitation_report, read_certificates, read_trace, write_certificates, write_trace,
};
use logical_induction::harness::{
    evaluate_experiment, format_report, load_scenario, scenarios, HarnessError, Scenario, EXPERIMENTS,
};
use logical_induction::rational::{parse_rational, Rational};
use logical_induction::trading::{evaluate_exploitation, load_strategy, Trader};

#[derive(Parser)]
#[command(name = "logind", version, about = "Run and check logical-induction markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its price trace and certificates.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Certificate file; defaults to `<out>.cert.csv`.
        #[arg(long)]
        certificates: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<u64>,
        /// Print one line per posted day.
        #[arg(long)]
        verbose: bool,
    },
    /// Measure whether strategies exploit a stored trace.
    ExploitEval {
        trace: PathBuf,
        /// A strategy file or a directory of `*.strategy` files.
        traders: PathBuf,
        #[arg(long)]
        horizon: u64,
        /// Scenario supplying the deductive process; none means no facts.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Directory for per-trader report files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment and write its report.
    Experiment {
        name: String,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Diagonal threshold (paradox).
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        horizon: Option<u64>,
        /// Bin count (net_update).
        #[arg(long)]
        bins: Option<u32>,
        /// Deferral function, e.g. `n+10` (net_update).
        #[arg(long)]
        delay: Option<String>,
        /// Leave out the trader the property depends on.
        #[arg(long)]
        control: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a stored trace.
    Check {
        trace: PathBuf,
        #[arg(long)]
        certificates: Option<PathBuf>,
        /// Replay the scenario and re-verify every day.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        resolution: Option<String>,
    },
}

fn open(path: &Path) -> Result<fs::File, HarnessError> {
    fs::File::open(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>, HarnessError> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn rat(field: &str, text: &str) -> Result<Rational, HarnessError> {
    parse_rational(text).map_err(|e| HarnessError::Config(format!("--{field}: {e}")))
}

fn cert_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".cert.csv");
    PathBuf::from(s)
}

fn with_horizon(mut s: Scenario, horizon: Option<u64>) -> Result<Scenario, HarnessError> {
    if let Some(h) = horizon {
        if h == 0 {
            return Err(HarnessError::Config("--horizon must be at least 1".into()));
        }
        s.horizon = h;
    }
    Ok(s)
}

fn run(
    scenario: &Path,
    out: &Path,
    certificates: Option<PathBuf>,
    horizon: Option<u64>,
    verbose: bool,
) -> Result<u8, HarnessError> {
    let s = with_horizon(load_scenario(scenario)?, horizon)?;
    let trace = s.run_with(|c| {
        if verbose {
            eprintln!(
                "day {}: value {} after {} evaluations",
                c.day, c.max_value, c.evaluations
            );
        }
    })?;
    write_trace(create(out)?, &trace.pricings)?;
    let cert = certificates.unwrap_or_else(|| cert_path(out));
    write_certificates(create(&cert)?, &trace.certificates, &s.member_names())?;
    println!(
        "{} days written to {} (certificates: {})",
        trace.horizon(),
        out.display(),
        cert.display()
    );
    Ok(0)
}

fn strategies(path: &Path) -> Result<Vec<Trader>, HarnessError> {
    if !path.is_dir() {
        return Ok(vec![load_strategy(path)?]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "strategy"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::Config(format!(
            "no .strategy files in {}",
            path.display()
        )));
    }
    files.iter().map(|f| Ok(load_strategy(f)?)).collect()
}

fn exploit_eval(
    trace: &Path,
    traders: &Path,
    horizon: u64,
    scenario: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<u8, HarnessError> {
    let market = read_trace(open(trace)?)?;
    let (process, rules) = match scenario {
        Some(p) => {
            let s = load_scenario(&p)?;
            (s.process, s.rules)
        }
        None => (DeductiveProcess::empty(), Vec::new()),
    };
    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
    }
    for t in strategies(traders)? {
        let report = evaluate_exploitation(&t, &market, &process, &rules, horizon)?;
        let text = format_exploitation_report(&report);
        match &out {
            Some(dir) => write_text(&dir.join(format!("{}.report.csv", t.name())), &text)?,
            None => print!("{text}"),
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    name: &str,
    scenario: Option<PathBuf>,
    p: Option<String>,
    horizon: Option<u64>,
    bins: Option<u32>,
    delay: Option<String>,
    control: bool,
    out: Option<PathBuf>,
) -> Result<u8, HarnessError> {
    if !EXPERIMENTS.contains(&name) {
        return Err(HarnessError::Config(format!(
            "unknown experiment `{name}` (known: {})",
            EXPERIMENTS.join(", ")
        )));
    }
    let mut s = match &scenario {
        Some(path) => load_scenario(path)?,
        None => match name {
            "paradox" => scenarios::paradox(
                &p.as_deref()
                    .map_or(Ok(logical_induction::rational::half()), |t| rat("p", t))?,
                control,
            )?,
            "net_update" => scenarios::net_update(bins.unwrap_or(8), delay.as_deref().unwrap_or("n+10"))?,
            other => scenarios::default_for(other)?,
        },
    };
    if scenario.is_some() {
        let table = s
            .experiments
            .entry(name.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
        let toml::Value::Table(t) = table else {
            return Err(HarnessError::Config(format!("[experiment.{name}] must be a table")));
        };
        if let Some(p) = &p {
            rat("p", p)?;
            t.insert("p".into(), p.clone().into());
        }
        if let Some(b) = bins {
            t.insert("bins".into(), i64::from(b).into());
        }
        if let Some(d) = &delay {
            t.insert("deferral".into(), d.clone().into());
        }
        if control && name == "paradox" {
            t.insert("control".into(), true.into());
        }
    }
    let s = with_horizon(s, horizon)?;
    let start = std::time::Instant::now();
    let trace = s.run()?;
    let mut report = evaluate_experiment(name, &s, &trace)?;
    report.runtime = start.elapsed();
    let text = format_report(&report);
    match &out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    eprintln!("{name}: {}", if report.passed() { "pass" } else { "fail" });
    Ok(if report.passed() { 0 } else { 1 })
}

fn check(
    trace: &Path,
    certificates: Option<PathBuf>,
    scenario: Option<PathBuf>,
    resolution: Option<String>,
) -> Result<u8, HarnessError> {
    let pricings = read_trace(open(trace)?)?;
    let certs = certificates.map(|p| read_certificates(open(&p)?)).transpose()?;
    let scenario = scenario.map(|p| load_scenario(&p)).transpose()?;
    let resolution = resolution.map(|r| rat("resolution", &r)).transpose()?;
    let report = check_trace(&pricings, scenario.as_ref(), certs.as_deref(), resolution.as_ref())?;
    for issue in &report.issues {
        println!("{issue}");
    }
    println!(
        "{} days, {} replayed, {} issues: {}",
        report.days,
        report.replayed,
        report.issues.len(),
        if report.passed() { "pass" } else { "fail" }
    );
    Ok(if report.passed() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            certificates,
            horizon,
            verbose,
        } => run(&scenario, &out, certificates, horizon, verbose),
        Command::ExploitEval {
            trace,
            traders,
            horizon,
            scenario,
            out,
        } => exploit_eval(&trace, &traders, horizon, scenario, out),
        Command::Experiment {
            name,
            scenario,
            p,
            horizon,
            bins,
            delay,
            control,
            out,
        } => experiment(&name, scenario, p, horizon, bins, delay, control, out),
        Command::Check {
            trace,
            certificates,
            scenario,
            resolution,
        } => check(&trace, certificates, scenario, resolution),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
