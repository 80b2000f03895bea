use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lipcalm_cli::reproduce::reproduce;
use lipcalm_cli::{family_packings, run, scenario_schema, write_outputs, CliError, Scenario};

#[derive(Parser)]
#[command(name = "lipcalm", version, about = "Calmness and Lipschitz upper semicontinuity moduli")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file; writes report.json and CSV traces.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Run a built-in example and compare with its known values.
    Reproduce {
        example_id: String,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Family kinds and their parameter packing.
    ListFamilies,
    /// JSON Schema of scenario files.
    Schema,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Keep the first radius and halve it this many times minus one.
    #[arg(long)]
    schedule_levels: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) {
        if let Some(levels) = self.schedule_levels {
            let r0 = s.schedule.radii.first().copied().unwrap_or(0.1);
            s.schedule.radii = (0..levels).map(|k| r0 * 0.5f64.powi(k as i32)).collect();
        }
        if let Some(seed) = self.seed {
            s.schedule.seed = seed;
        }
        if let Some(n) = self.samples {
            s.schedule.samples_per_radius = n;
        }
    }
}

fn summary(report: &lipcalm_cli::RunReport) {
    use lipcalm_cli::AnalysisResult as R;
    for (i, r) in report.results.iter().enumerate() {
        let line = match r {
            R::Lipusc { estimate } => format!("lipusc = {} ({:?})", estimate.value, estimate.classification),
            R::Calmness { x, estimate } => format!("clm at {x:?} = {} ({:?})", estimate.value, estimate.classification),
            R::SupCalmness { result } => {
                format!("sup clm over {} points = {}", result.points.len(), result.estimate.value)
            }
            R::ExactQp { result } => {
                format!("qp modulus = {} ({} certificates)", result.value, result.certificates.len())
            }
            R::ExactSublevel { result } => format!("sublevel modulus = {}", result.value),
            R::Hypotheses { verdict } => {
                format!("premises hold: {} (violated {:?})", verdict.applicable, verdict.violated_premises())
            }
            R::VerifyEquality { report } => format!(
                "lipusc = {}, sup clm = {}, verdict {:?}",
                report.lipusc.value, report.sup_calmness.estimate.value, report.verdict
            ),
        };
        println!("[{i}] {line}");
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, opts } => {
            let text = std::fs::read_to_string(&scenario).map_err(|e| CliError::io(&scenario, e))?;
            let mut s = Scenario::from_json(&text)?;
            opts.apply(&mut s);
            s.validate()?;
            let report = run(&s)?;
            summary(&report);
            let written = write_outputs(&report, opts.out_dir.as_deref())?;
            for p in written {
                println!("wrote {}", p.display());
            }
        }
        Command::Reproduce { example_id, opts } => {
            let (report, table) = reproduce(&example_id, |s| opts.apply(s))?;
            let out = opts
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(lipcalm_cli::report::DEFAULT_OUT_DIR).join(&example_id));
            write_outputs(&report, Some(&out))?;
            println!("{example_id}");
            print!("{table}");
            println!(
                "{} ({} of {} rows pass)",
                if table.passed() { "PASS" } else { "FAIL" },
                table.rows.iter().filter(|r| r.pass).count(),
                table.rows.len()
            );
        }
        Command::ListFamilies => {
            for (name, layout) in family_packings() {
                println!("{name:<22} {layout}");
            }
        }
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&scenario_schema()).expect("schema serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
