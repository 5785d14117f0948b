use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hvopt_core::config::{parse_assignment, parse_config_text};
use hvopt_core::harness::{apply_overrides, race_on, run_batch, sweep_on, OptimizerSpec, RunRecord, RunSpec};
use hvopt_core::objectives::{objective_by_id, Objective};
use hvopt_core::output::{race_json, sweep_json, trace_csv, trace_file_name, TraceTable};
use hvopt_core::plot::{loss_curves_svg, race_svgs, trajectory_svg, Series};
use hvopt_core::verify::{run_suites, VerifyOptions};
use hvopt_core::OptError;

const TOY_RACE: [&str; 4] = ["f1", "f2", "f3", "f4"];
const LR_GRID: &str = "lr=0.1,0.01,0.001,0.0001";

#[derive(Parser, Debug)]
#[command(name = "hvopt", version, about = "Hidden-vector optimizer benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run each optimizer once and write its per-step CSV.
    Trace(RunArgs),
    /// Race optimizers on each objective and write CSVs, a JSON summary and loss curves.
    Race(RunArgs),
    /// Evaluate a hyperparameter grid and flag the lowest final loss.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Grid dimension `key=v1,v2,...`; repeatable. Defaults to a learning-rate grid.
        #[arg(long = "grid")]
        grid: Vec<String>,
    },
    /// Run the hidden-vector property suites.
    Verify {
        /// Randomized trials per suite.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// Render SVG plots from trace CSV files.
    Plot {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output directory.
        #[arg(long, env = "HVOPT_OUT", default_value = "hvopt-out")]
        out: PathBuf,
        /// Base name of the written SVGs; defaults to the first file's stem.
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Objective ids, comma separated (f1, f2, f2-fig3, f3, f4, logistic-N-D-SEED[-bB]).
    #[arg(long, value_delimiter = ',')]
    objective: Vec<String>,
    /// Optimizer ids, comma separated (hvadam, adam, adabelief, sgdm).
    #[arg(long, alias = "optimizer", value_delimiter = ',')]
    optimizers: Vec<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Hyperparameter override `key=value`, optionally `optimizer.key=value`; repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
    /// Flat `key=value` config file, applied before any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "HVOPT_OUT", default_value = "hvopt-out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    record_every: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// HVAdam hidden-vector step-size schedule.
    #[arg(long, value_parser = ["exponential", "linear"])]
    schedule: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Verify,
    Usage(String),
    Numeric(String),
}

impl From<OptError> for Failure {
    fn from(e: OptError) -> Self {
        match e {
            OptError::NonFinite { .. } => Failure::Numeric(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl RunArgs {
    fn objectives(&self, default: &[&str]) -> Result<Vec<Box<dyn Objective>>, Failure> {
        let ids: Vec<String> = if self.objective.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.objective.clone()
        };
        Ok(ids.iter().map(|id| objective_by_id(id)).collect::<Result<_, _>>()?)
    }

    fn overrides(&self) -> Result<Vec<(String, String)>, Failure> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        for item in &self.set {
            pairs.push(parse_assignment(item)?);
        }
        let flags = [
            ("steps", self.steps.map(|x| x.to_string())),
            ("seed", self.seed.map(|x| x.to_string())),
            ("record_every", self.record_every.map(|x| x.to_string())),
            ("tolerance", self.tolerance.map(|x| x.to_string())),
            ("hvadam.schedule", self.schedule.clone()),
        ];
        pairs.extend(flags.into_iter().filter_map(|(k, v)| Some((k.to_string(), v?))));
        Ok(pairs)
    }

    /// One spec per optimizer on `obj`, with every override applied.
    fn specs(&self, obj: &dyn Objective, default: &[&str]) -> Result<Vec<RunSpec>, Failure> {
        let ids: Vec<String> = if self.optimizers.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.optimizers.clone()
        };
        let mut specs = ids.iter().map(|id| RunSpec::toy(obj, id)).collect::<Result<Vec<_>, _>>()?;
        apply_overrides(&mut specs, &self.overrides()?)?;
        Ok(specs)
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn optimum_2d(obj: &dyn Objective) -> Option<(f64, f64)> {
    let o = obj.optimum();
    (obj.dim() == 2).then(|| (o[0], o[1]))
}

fn first_step(rec: &RunRecord) -> String {
    rec.summary.first_step_within_tol.map_or("never".into(), |t| t.to_string())
}

fn numeric_check(records: &[RunRecord]) -> Result<(), Failure> {
    let aborted: Vec<String> = records
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("{} {}: {f}", r.objective, r.optimizer.id())))
        .collect();
    if aborted.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(aborted.join("; ")))
    }
}

fn cmd_trace(args: &RunArgs) -> Result<(), Failure> {
    let mut records = Vec::new();
    for obj in args.objectives(&["f2"])? {
        let specs = args.specs(obj.as_ref(), &["hvadam"])?;
        for rec in run_batch(obj.as_ref(), &specs) {
            let rec = rec?;
            let csv = args.out.join(trace_file_name(&rec.objective, rec.optimizer.id()));
            write(&csv, &trace_csv(&rec))?;
            if args.plot {
                let stem = format!("{}_{}", rec.objective, rec.optimizer.id());
                write(&args.out.join(format!("{stem}_loss.svg")), &loss_curves_svg(&stem, &[Series::loss(&rec)]))?;
                if let Some(path) = Series::trajectory(&rec) {
                    let svg = trajectory_svg(&stem, &[path], optimum_2d(obj.as_ref()));
                    write(&args.out.join(format!("{stem}_trajectory.svg")), &svg)?;
                }
            }
            println!(
                "{} {}: steps={} final_loss={:.6e} best_loss={:.6e} first_step_within_tol={} -> {}",
                rec.objective,
                rec.optimizer.id(),
                rec.summary.steps_completed,
                rec.summary.final_loss,
                rec.summary.best_loss,
                first_step(&rec),
                csv.display()
            );
            records.push(rec);
        }
    }
    numeric_check(&records)
}

fn cmd_race(args: &RunArgs) -> Result<(), Failure> {
    let mut records = Vec::new();
    for obj in args.objectives(&TOY_RACE)? {
        let specs = args.specs(obj.as_ref(), &OptimizerSpec::IDS)?;
        let table = race_on(obj.as_ref(), &specs)?;
        for rec in &table.records {
            write(&args.out.join(trace_file_name(&rec.objective, rec.optimizer.id())), &trace_csv(rec))?;
        }
        let stem = format!("{}_race", table.objective);
        write(&args.out.join(format!("{stem}.json")), &race_json(&table))?;
        let (loss, paths) = race_svgs(&table, optimum_2d(obj.as_ref()));
        write(&args.out.join(format!("{stem}_loss.svg")), &loss)?;
        if let (true, Some(paths)) = (args.plot, paths) {
            write(&args.out.join(format!("{stem}_trajectory.svg")), &paths)?;
        }
        println!("{}", table.objective);
        for e in &table.entries {
            println!(
                "  {:>2}. {:<10} first_step_within_tol={:<6} final_loss={:.6e}",
                e.rank,
                e.optimizer.id(),
                e.summary.first_step_within_tol.map_or("never".into(), |t| t.to_string()),
                e.summary.final_loss
            );
        }
        records.extend(table.records);
    }
    numeric_check(&records)
}

fn parse_grid(items: &[String]) -> Result<Vec<(String, Vec<String>)>, Failure> {
    let items: Vec<String> = if items.is_empty() { vec![LR_GRID.to_string()] } else { items.to_vec() };
    items
        .iter()
        .map(|item| {
            let (k, v) = parse_assignment(item)?;
            let values: Vec<String> =
                v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
            Ok((k, values))
        })
        .collect()
}

fn cmd_sweep(args: &RunArgs, grid: &[String]) -> Result<(), Failure> {
    let grid = parse_grid(grid)?;
    let mut failed = Vec::new();
    for obj in args.objectives(&["f2"])? {
        for base in args.specs(obj.as_ref(), &["hvadam"])? {
            let entries = sweep_on(obj.as_ref(), &base, &grid)?;
            let name = format!("{}_{}_sweep.json", obj.id(), base.optimizer.id());
            write(&args.out.join(name), &sweep_json(&obj.id(), &entries))?;
            println!("{} {}", obj.id(), base.optimizer.id());
            for e in &entries {
                let assign: Vec<String> = e.assignments.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!(
                    "  {:<28} final_loss={:.6e}{}{}",
                    assign.join(" "),
                    e.summary.final_loss,
                    if e.failed { " aborted" } else { "" },
                    if e.best { " best" } else { "" }
                );
                if e.failed {
                    failed.push(format!("{} {} {}", obj.id(), base.optimizer.id(), assign.join(" ")));
                }
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(failed.join("; ")))
    }
}

fn cmd_verify(seeds: u64) -> Result<(), Failure> {
    let report = run_suites(&VerifyOptions { seeds, ..VerifyOptions::default() });
    print!("{}", report.render());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn cmd_plot(files: &[PathBuf], out: &Path, name: Option<&str>) -> Result<(), Failure> {
    let mut losses = Vec::new();
    let mut paths = Vec::new();
    for file in files {
        let text =
            fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
        let table = TraceTable::parse(&text)?;
        let label = file.file_stem().map_or("trace".into(), |s| s.to_string_lossy().into_owned());
        losses.extend(Series::loss_from_table(&label, &table));
        paths.push(Series::trajectory_from_table(&label, &table));
    }
    let stem = name.map(String::from).unwrap_or_else(|| {
        files[0].file_stem().map_or("plot".into(), |s| s.to_string_lossy().into_owned())
    });
    let loss_path = out.join(format!("{stem}_loss.svg"));
    write(&loss_path, &loss_curves_svg(&stem, &losses))?;
    println!("{}", loss_path.display());
    if let Some(paths) = paths.into_iter().collect::<Option<Vec<_>>>() {
        let path = out.join(format!("{stem}_trajectory.svg"));
        write(&path, &trajectory_svg(&stem, &paths, None))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Trace(args) => cmd_trace(args),
        Command::Race(args) => cmd_race(args),
        Command::Sweep { run, grid } => cmd_sweep(run, grid),
        Command::Verify { seeds } => cmd_verify(*seeds),
        Command::Plot { files, out, name } => cmd_plot(files, out, name.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical abort: {msg}");
            ExitCode::from(3)
        }
    }
}
