use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ovf_core::actuation::{default_kappa, fold_force_profile, fold_travel};
use ovf_core::export::{profile_svg, write_profile_csv, write_sweep_csv};
use ovf_core::fold_geometry::{
    cross_section, load_params, sweep_design_space, thickness_report, valley_gap, DEFAULT_M, DEFAULT_T,
};
use ovf_core::harness::{net_metrics, run_bench, write_bench_csv, BenchConfig};
use ovf_core::materials::Catalogue;
use ovf_core::plans::{build_plan, Direction, PlanKind};
use ovf_core::sim::{run_plan_partial, Scenario};
use ovf_core::{Error, FrictionMode};

#[derive(Parser)]
#[command(name = "ovf", version, about = "Origami variable-friction surface design and gripper simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fold pattern design tools.
    #[command(subcommand)]
    Design(DesignCmd),
    /// Cross-section profiles.
    #[command(subcommand)]
    Profile(ProfileCmd),
    /// Gripper simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Benchmark matrix.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum DesignCmd {
    /// Thickness change over an alpha × l grid.
    Sweep {
        /// Radians.
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long)]
        l_min: f64,
        #[arg(long)]
        l_max: f64,
        #[arg(long)]
        steps: usize,
        /// k / l.
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        #[arg(long, default_value_t = DEFAULT_T)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_M)]
        m: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Thicknesses, valley gaps, fold travel and peak force of one design.
    Report {
        #[arg(long)]
        params: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hf,
    Lf,
}

impl From<ModeArg> for FrictionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hf => FrictionMode::Hf,
            ModeArg::Lf => FrictionMode::Lf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Csv,
}

#[derive(Subcommand)]
enum ProfileCmd {
    Emit {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// Runs a plan on a scenario and writes the trajectory.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// translate | rotate
        #[arg(long)]
        plan: PlanKind,
        /// distal | proximal | clockwise | counterclockwise
        #[arg(long)]
        direction: Direction,
        #[arg(long, default_value_t = 1)]
        cycles: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_JAM: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn design(cmd: DesignCmd) -> Result<(), Error> {
    match cmd {
        DesignCmd::Sweep { alpha_min, alpha_max, l_min, l_max, steps, ratio, t, m, out } => {
            let grid = sweep_design_space((alpha_min, alpha_max), (l_min, l_max), ratio, t, m, steps)?;
            write_sweep_csv(&grid, create(&out)?)?;
            let min = grid.min_cell();
            println!("{} cells; minimum delta_h {:.4} mm at alpha {:.4} rad, l {:.4} mm", grid.cells.len(), min.delta_h, min.alpha, min.l);
        }
        DesignCmd::Report { params } => {
            let p = load_params(&params)?;
            let th = thickness_report(&p)?;
            let profile = fold_force_profile(&p, default_kappa(), 201)?;
            println!("h_HF         {:.4} mm", th.h_hf);
            println!("h_LF         {:.4} mm", th.h_lf);
            println!("delta_h      {:.4} mm", th.delta_h);
            println!("valley_gap_HF {:.4} mm", valley_gap(&p, FrictionMode::Hf)?);
            println!("valley_gap_LF {:.4} mm", valley_gap(&p, FrictionMode::Lf)?);
            println!("fold_travel  {:.4} mm", fold_travel(&p)?);
            println!("peak_force   {:.4} N", profile.peak());
        }
    }
    Ok(())
}

fn profile(cmd: ProfileCmd) -> Result<(), Error> {
    let ProfileCmd::Emit { params, mode, format, out } = cmd;
    let p = load_params(&params)?;
    let cs = cross_section(&p, mode.into())?;
    match format {
        Format::Csv => write_profile_csv(&cs, create(&out)?)?,
        Format::Svg => std::fs::write(&out, profile_svg(&cs))?,
    }
    Ok(())
}

fn sim(cmd: SimCmd) -> Result<(), (Error, u8)> {
    let SimCmd::Run { scenario, plan, direction, cycles, out } = cmd;
    let fail = |e: Error| {
        let c = exit_code(&e);
        (e, c)
    };
    let sc = Scenario::load(&scenario).map_err(fail)?;
    let g = sc.gripper(&Catalogue::default()).map_err(fail)?;
    let plan = build_plan(&g, plan, direction, cycles).map_err(fail)?;
    let w = match sc.initial_world(&g, 0, plan.phases[0].modes(), plan.start) {
        Ok(w) => w,
        Err(e @ Error::Kinematic(_)) => return Err((e, EXIT_JAM)),
        Err(e) => return Err(fail(e)),
    };
    let (log, err) = run_plan_partial(&g, &w, &plan);
    create(&out).and_then(|f| log.write_csv(f)).map_err(fail)?;
    let (t, r) = net_metrics(&log);
    println!("{} steps; translation {t:.3} mm; rotation {r:.3} deg", log.len());
    match err {
        None => Ok(()),
        // Errors raised while stepping stop the run; the log up to there is kept.
        Some(e @ Error::InPhase { .. }) => {
            eprintln!("partial trajectory written to {}", out.display());
            Err((e, EXIT_JAM))
        }
        Some(e) => Err(fail(e)),
    }
}

fn bench(cmd: BenchCmd) -> Result<(), Error> {
    let BenchCmd::Run { config, out } = cmd;
    let cfg = BenchConfig::load(&config)?;
    let rows = run_bench(&cfg, &Catalogue::default())?;
    write_bench_csv(&rows, create(&out)?)?;
    let jams: usize = rows.iter().map(|r| r.jams).sum();
    println!("{} cells, {} jammed trials", rows.len(), jams);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code would collide with the jam code.
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let coded = |e: Error| {
        let c = exit_code(&e);
        (e, c)
    };
    let res = match cli.command {
        Command::Design(c) => design(c).map_err(coded),
        Command::Profile(c) => profile(c).map_err(coded),
        Command::Sim(c) => sim(c),
        Command::Bench(c) => bench(c).map_err(coded),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, code)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
