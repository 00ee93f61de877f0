use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use daas_cli::loc_audit::{loc_audit, BUDGET};
use daas_cli::{execute, App, RunRequest, ServiceOverride};
use daas_core::compute::Policy;
use daas_core::{ClockMode, SimTime};

#[derive(Parser)]
#[command(name = "daas", version, about = "Run the bundled drone applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Virtual,
    Wall,
}

#[derive(Subcommand)]
enum Command {
    /// Run one application and write its metrics
    Run {
        app: App,
        /// Environment configuration (defaults to the app's bundled config)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Placement policy for every scheduler resource
        #[arg(long, value_parser = |s: &str| s.parse::<Policy>())]
        scheduler: Option<Policy>,
        /// Mission length in seconds
        #[arg(long, default_value_t = 120.0)]
        duration: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "virtual")]
        mode: Mode,
        /// Altitude disturbance amplitude in metres; 0 disables it
        #[arg(long)]
        disturbance: Option<f64>,
        /// Service time override, `compute:analytic=ms`; repeatable
        #[arg(long = "service-time")]
        service_times: Vec<ServiceOverride>,
    },
    /// Count API statements in each bundled application
    LocAudit,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::LocAudit => {
            let report = loc_audit();
            for line in &report {
                let verdict = if line.passes() { "pass" } else { "FAIL" };
                println!("{:<20} {:>3} statements (budget {BUDGET}) {verdict}", line.app, line.statements);
            }
            if report.iter().all(|l| l.passes()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run {
            app,
            config,
            scheduler,
            duration,
            seed,
            out,
            mode,
            disturbance,
            service_times,
        } => {
            if !(duration.is_finite() && duration > 0.0) {
                eprintln!("error: --duration must be > 0");
                return ExitCode::from(1);
            }
            let mut req = RunRequest::new(app, config.unwrap_or_else(|| app.default_config().into()), out);
            req.scheduler = scheduler;
            req.duration = SimTime::from_secs_f64(duration);
            req.seed = seed;
            req.mode = match mode {
                Mode::Virtual => ClockMode::Virtual,
                Mode::Wall => ClockMode::Wall,
            };
            req.disturbance = disturbance;
            req.service_overrides = service_times;
            match execute(&req) {
                Ok(outcome) => {
                    print!("{}", outcome.summary.render());
                    if let Some(rss) = outcome.metrics.peak_rss_bytes {
                        println!("peak_rss_bytes: {rss}");
                    }
                    println!("wall_time_s: {:.3}", outcome.metrics.wall_time.as_secs_f64());
                    println!("outputs: {}", req.out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(if e.is_validation() { 1 } else { 2 })
                }
            }
        }
    }
}
