//! Command-line front end: solve a configured problem, verify the residuals
//! of its defining conditions, run a grid-refinement study, or compare the
//! reconstruction against an independent finite-difference solve.
//!
//! Exit codes: 0 on success, 2 on configuration or solver errors, 3 when a
//! verification threshold is exceeded.

use clap::{Parser, Subcommand};
use mixfrac::oracle::fd_solve;
use mixfrac::{solve_problem, verify_conditions, DiscretizationConfig, Func, ProblemSpec};
use serde::Deserialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mixfrac", about = "mixed fractional-diffusion / wave solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write a sampled field as CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path (overrides [output].path)
        #[arg(long)]
        output: Option<PathBuf>,
        /// sample grid resolution (overrides [output].grid)
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Solve and evaluate the residuals of all defining conditions.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// largest acceptable residual
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
    /// Solve on a sequence of grids and report trace differences.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// comma-separated cell counts, e.g. 16,32,64
        #[arg(long, default_value = "16,32,64")]
        grids: String,
    },
    /// Compare the square-region reconstruction with a finite-difference
    /// solve of the same initial-boundary-value problem.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 512)]
        ny: usize,
        /// largest acceptable deviation on the probe set
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
}

#[derive(Deserialize)]
struct ConfigFile {
    problem: ProblemSection,
    #[serde(default)]
    discretization: DiscretizationSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Deserialize)]
struct ProblemSection {
    lambda: f64,
    phi1: String,
    phi2: String,
    a1: String,
    a2: String,
    a3: String,
    coupling: Option<f64>,
}

#[derive(Deserialize, Default)]
struct DiscretizationSection {
    n: Option<usize>,
    quad_tol: Option<f64>,
    series_tol: Option<f64>,
    z_cutoff: Option<f64>,
}

#[derive(Deserialize, Default)]
struct OutputSection {
    path: Option<PathBuf>,
    grid: Option<usize>,
}

fn load_config(path: &PathBuf) -> Result<(ProblemSpec, DiscretizationConfig, OutputSection), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg: ConfigFile =
        toml::from_str(&text).map_err(|e| format!("cannot parse config: {e}"))?;
    let func = |src: &String, name: &str| {
        Func::from_expr(src, "t").map_err(|e| format!("bad expression for {name}: {e}"))
    };
    let spec = ProblemSpec {
        lambda: cfg.problem.lambda,
        phi1: func(&cfg.problem.phi1, "phi1")?,
        phi2: func(&cfg.problem.phi2, "phi2")?,
        a1: func(&cfg.problem.a1, "a1")?,
        a2: func(&cfg.problem.a2, "a2")?,
        a3: func(&cfg.problem.a3, "a3")?,
        coupling: cfg.problem.coupling,
    };
    let d = DiscretizationConfig::default();
    let disc = DiscretizationConfig {
        n: cfg.discretization.n.unwrap_or(d.n),
        quad_tol: cfg.discretization.quad_tol.unwrap_or(d.quad_tol),
        series_tol: cfg.discretization.series_tol.unwrap_or(d.series_tol),
        z_cutoff: cfg.discretization.z_cutoff.unwrap_or(d.z_cutoff),
    };
    Ok((spec, disc, cfg.output))
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    let fail = |msg: String| (2u8, msg);
    match cli.command {
        Command::Solve { config, output, grid } => {
            let (spec, disc, out) = load_config(&config).map_err(fail)?;
            let field = solve_problem(&spec, &disc).map_err(|e| fail(e.to_string()))?;
            let m = grid.or(out.grid).unwrap_or(32);
            let samples = field.sample_grid(m).map_err(|e| fail(e.to_string()))?;
            let path = output
                .or(out.path)
                .unwrap_or_else(|| PathBuf::from("solution.csv"));
            let mut w = std::io::BufWriter::new(
                std::fs::File::create(&path)
                    .map_err(|e| fail(format!("cannot create {}: {e}", path.display())))?,
            );
            writeln!(w, "x,y,u,domain").map_err(|e| fail(e.to_string()))?;
            for p in &samples {
                writeln!(w, "{},{},{},{}", p.x, p.y, p.u, p.domain.tag())
                    .map_err(|e| fail(e.to_string()))?;
            }
            println!(
                "solved: lambda = {}, n = {}, {} samples -> {}",
                spec.lambda,
                disc.n,
                samples.len(),
                path.display()
            );
            Ok(())
        }
        Command::Verify { config, threshold } => {
            let (spec, disc, _) = load_config(&config).map_err(fail)?;
            let field = solve_problem(&spec, &disc).map_err(|e| fail(e.to_string()))?;
            let diag = verify_conditions(&field).map_err(|e| fail(e.to_string()))?;
            println!("{}", diag.report());
            if diag.max_residual() > threshold {
                return Err((
                    3,
                    format!(
                        "worst residual {:.3e} exceeds threshold {threshold:.3e}",
                        diag.max_residual()
                    ),
                ));
            }
            Ok(())
        }
        Command::Converge { config, grids } => {
            let (spec, disc, _) = load_config(&config).map_err(fail)?;
            let ns: Vec<usize> = grids
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| fail(format!("bad --grids list: {e}")))?;
            if ns.len() < 2 {
                return Err(fail("--grids needs at least two cell counts".into()));
            }
            let mut prev: Option<(usize, mixfrac::SolutionField)> = None;
            for &n in &ns {
                let field = solve_problem(&spec, &DiscretizationConfig { n, ..disc })
                    .map_err(|e| fail(e.to_string()))?;
                if let Some((pn, pf)) = &prev {
                    // compare the lateral traces on the coarse nodes
                    let mut worst = 0.0f64;
                    for k in 0..=*pn {
                        let r = k * n / pn;
                        worst = worst
                            .max((pf.traces.tau2[k] - field.traces.tau2[r]).abs())
                            .max((pf.traces.tau3[k] - field.traces.tau3[r]).abs());
                    }
                    println!("n = {pn:5} vs {n:5}: max trace difference {worst:.3e}");
                }
                prev = Some((n, field));
            }
            Ok(())
        }
        Command::Oracle { config, nx, ny, threshold } => {
            let (spec, disc, _) = load_config(&config).map_err(fail)?;
            let field = solve_problem(&spec, &disc).map_err(|e| fail(e.to_string()))?;
            let tt = &field.traces;
            let fd = fd_solve(
                spec.lambda,
                nx,
                ny,
                |x| mixfrac::hyperbolic::interp(&tt.tau1, x),
                |y| mixfrac::hyperbolic::interp(&tt.tau2, y),
                |y| mixfrac::hyperbolic::interp(&tt.tau3, y),
                |_, _| 0.0,
            )
            .map_err(|e| fail(e.to_string()))?;
            // compare away from y = 0, where the finite-difference start-up
            // error dominates
            let mut worst = 0.0f64;
            for &y in &[0.5, 0.75, 1.0] {
                for k in 1..8 {
                    let x = k as f64 / 8.0;
                    let u = field.eval_square(x, y).map_err(|e| fail(e.to_string()))?;
                    worst = worst.max((u - fd.eval(x, y)).abs());
                }
            }
            println!("max |reconstruction - finite differences| on probes: {worst:.3e}");
            if worst > threshold {
                return Err((3, format!("deviation {worst:.3e} exceeds threshold {threshold:.3e}")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
