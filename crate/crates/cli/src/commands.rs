use std::path::{Path, PathBuf};

use macroplace::netlist::bookshelf::{read_placement, write_bookshelf};
use macroplace::netlist::{gen_synthetic, validate, SyntheticSpec};
use macroplace::placers::check_legal;
use macroplace::stats::{correlation_report, read_metrics_csv};

use crate::args::{json_arg, Cli, Command, ExperimentArgs, GenArgs, PlaceArgs, RenderArgs, StatsArgs, ValidateArgs};
use crate::error::{CliError, Result};
use crate::render::render_svg;
use crate::runner::{load_input, run_experiment, write_json, Outcome, RunEntry, REPORT_FILE};
use crate::spec::{ExperimentSpec, InputSpec};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Place(a) => cmd_place(&a),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::Render(a) => cmd_render(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn summarize(outcome: &Outcome, out: &Path) {
    for c in &outcome.report.configs {
        for r in &c.runs {
            match r {
                RunEntry::Ok(r) => println!(
                    "{} seed {}: proxy {:.6} hpwl {:.3} {}",
                    c.name,
                    r.seed,
                    r.proxy.total,
                    r.hpwl,
                    if r.legal { "legal" } else { "ILLEGAL" }
                ),
                RunEntry::Failed { seed, error } => println!("{} seed {seed}: failed: {error}", c.name),
            }
        }
    }
    println!("report: {}", out.join(REPORT_FILE).display());
}

/// Runs the single-config experiment described by the flags. A failed run's own
/// error decides the exit code.
pub fn cmd_place(args: &PlaceArgs) -> Result<()> {
    let spec = args.to_spec()?;
    let outcome = run_experiment(&spec, &args.out, args.jobs)?;
    summarize(&outcome, &args.out);
    match outcome.errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&args.spec)?;
    let out = args.out.clone().or_else(|| spec.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let outcome = run_experiment(&spec, &out, args.jobs)?;
    summarize(&outcome, &out);
    let failed = outcome.report.failures.len();
    if failed > 0 {
        for f in &outcome.report.failures {
            eprintln!("{} seed {}: {}", f.config, f.seed, f.error);
        }
        return Err(CliError::RunsFailed { failed, total: spec.configs.len() * spec.seeds.len() });
    }
    Ok(())
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let spec = args.input.to_spec()?;
    let (netlist, own) = match &spec {
        InputSpec::Bookshelf { aux } => macroplace::netlist::bookshelf::parse_bookshelf(aux)?,
        InputSpec::Synthetic(s) => {
            let (nl, pl) = gen_synthetic(s)?;
            (nl, Some(pl))
        }
    };
    let placement = match &args.placement {
        Some(p) => Some(read_placement(&netlist, p)?),
        None => own,
    };
    let svg = render_svg(&netlist, placement.as_ref());
    std::fs::write(&args.out, svg).map_err(|e| CliError::io(&args.out, e))
}

pub fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let table = read_metrics_csv(&args.csv)?;
    let report = correlation_report(&table).map_err(macroplace::Error::from)?;
    print!("{}", report.to_table());
    let out = args.out.clone().unwrap_or_else(|| {
        let stem = args.csv.file_stem().map_or("metrics".into(), |s| s.to_string_lossy().into_owned());
        args.csv.with_file_name(format!("{stem}.stats.json"))
    });
    write_json(&out, &report)
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec: SyntheticSpec = json_arg(&args.synthetic)?;
    let (nl, pl) = gen_synthetic(&spec)?;
    let aux = write_bookshelf(&nl, Some(&pl), &args.out, &args.name)?;
    println!("{}", aux.display());
    Ok(())
}

/// Prints every netlist violation (exit 1 if any) and, as information only, overlaps
/// and out-of-canvas macros in the input placement.
pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let inst = load_input(&args.input.to_spec()?)?;
    let violations = validate(&inst.netlist);
    for v in &violations {
        println!("violation: {v}");
    }
    let legality = check_legal(&inst.netlist, &inst.placement, None);
    for v in &legality {
        println!("placement: {v:?}");
    }
    println!(
        "{} nodes, {} nets: {} violation(s), {} placement issue(s)",
        inst.netlist.num_nodes(),
        inst.netlist.num_nets(),
        violations.len(),
        legality.len()
    );
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::InvalidNetlist(violations.len()))
    }
}
