use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contact_shield::baselines::MethodId;
use contact_sim::audit::audit_run;
use contact_sim::fuzz::fuzz_scenario;
use contact_sim::pack::write_pack;
use contact_sim::report::{report_rows, run_batch, summary_table, write_report, Job, Outcome, ReportRow};
use contact_sim::run::{run_scenario, write_log};
use contact_sim::{scenario_files, Scenario, SimError};

#[derive(Parser)]
#[command(name = "sim", about = "Replay human motion against a shielded manipulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with one method and write the step log.
    Run(RunArgs),
    /// Run every scenario of a directory with several methods.
    Compare(CompareArgs),
    /// Audit shielded methods on fuzzed humans around a scenario.
    Fuzz(FuzzArgs),
    /// Write the bundled scenario pack.
    Pack {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Method id; defaults to the scenario's.
    #[arg(long)]
    method: Option<MethodId>,
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated seconds.
    #[arg(long)]
    horizon: Option<f64>,
    /// Step log CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scenario_dir: PathBuf,
    /// Comma-separated method ids, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Seeds per (scenario, method), counting up from the scenario seed.
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[arg(long)]
    audit: bool,
    /// Add the mean verification time column.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    horizon: Option<f64>,
    /// Report CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct FuzzArgs {
    /// Scenario providing the robot, path and environment.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 1.5)]
    horizon: f64,
    #[arg(long, default_value = "sara,dynamicSSM")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_methods(list: &str) -> Result<Vec<MethodId>, SimError> {
    if list.trim() == "all" {
        return Ok(MethodId::ALL.to_vec());
    }
    list.split(',').map(|m| m.trim().parse().map_err(SimError::Scenario)).collect()
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, SimError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| SimError::io(p.clone(), e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn workers(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Whether a provably safe method failed its audit.
fn unsound(rows: &[ReportRow]) -> bool {
    rows.iter().any(|r| {
        r.method.is_provably_safe()
            && (r.violations.unwrap_or(0) > 0
                || r.structural_mismatches > 0
                || (r.method == MethodId::DynamicSsm && r.contact_instants.unwrap_or(0) > 0))
    })
}

fn run(args: RunArgs) -> Result<bool, SimError> {
    let mut scn = Scenario::from_file(&args.scenario)?;
    if let Some(dt) = args.dt {
        scn.dt = dt;
    }
    if let Some(h) = args.horizon {
        scn.horizon = h;
    }
    if let Some(seed) = args.seed {
        scn.seed = seed;
    }
    scn.validate()?;
    let method = args.method.unwrap_or(scn.method);
    let result = run_scenario(&scn, method)?;
    write_log(&result, output(&args.out)?)?;
    let audit = if args.audit { Some(audit_run(&scn, &result)?) } else { None };
    let rows = report_rows(&[Outcome { run: result, audit }]);
    eprint!("{}", summary_table(&rows));
    Ok(args.audit && unsound(&rows))
}

fn compare(args: CompareArgs) -> Result<bool, SimError> {
    let methods = parse_methods(&args.methods)?;
    let mut scenarios = Vec::new();
    for file in scenario_files(&args.scenario_dir)? {
        let mut scn = Scenario::from_file(&file)?;
        if let Some(h) = args.horizon {
            scn.horizon = h;
            scn.validate()?;
        }
        scenarios.push(scn);
    }
    let mut jobs = Vec::new();
    for (k, scn) in scenarios.iter().enumerate() {
        for &method in &methods {
            for r in 0..args.repeats {
                jobs.push(Job { scenario: k, method, seed: scn.seed + r });
            }
        }
    }
    let outcomes = run_batch(&scenarios, &jobs, args.audit, workers(args.workers))?;
    let rows = report_rows(&outcomes);
    write_report(&rows, output(&args.out)?, args.timing)?;
    eprint!("{}", summary_table(&rows));
    Ok(args.audit && unsound(&rows))
}

fn fuzz(args: FuzzArgs) -> Result<bool, SimError> {
    let base = Scenario::from_file(&args.scenario)?;
    let methods = parse_methods(&args.methods)?;
    let scenarios =
        (0..args.count).map(|k| fuzz_scenario(&base, args.seed + k, args.horizon)).collect::<Result<Vec<_>, _>>()?;
    let mut jobs = Vec::new();
    for (k, scn) in scenarios.iter().enumerate() {
        jobs.extend(methods.iter().map(|&method| Job { scenario: k, method, seed: scn.seed }));
    }
    let outcomes = run_batch(&scenarios, &jobs, true, workers(args.workers))?;
    let mut bad = false;
    for &method in &methods {
        let of = || outcomes.iter().filter(move |o| o.run.method == method);
        let violations: usize = of().map(|o| o.audit.as_ref().expect("audited").violation_count()).sum();
        let contacts: usize = of().map(|o| o.audit.as_ref().expect("audited").contact_instants).sum();
        let resting: usize = of().map(|o| o.audit.as_ref().expect("audited").resting_contact_instants).sum();
        let mismatches: usize = of().map(|o| o.run.structural_mismatches).sum();
        println!(
            "{:<17} traces={} violations={violations} contact_instants={contacts} resting_contacts={resting} structural_mismatches={mismatches}",
            method.name(),
            args.count
        );
        if method.is_provably_safe()
            && (violations > 0 || mismatches > 0 || (method == MethodId::DynamicSsm && contacts > 0))
        {
            bad = true;
        }
    }
    Ok(bad)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Fuzz(a) => fuzz(a),
        Command::Pack { out } => write_pack(&out).map(|_| false),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("audit found violations by a provably safe method");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
