//! Thin command-line front end; all functionality lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relstring::convexity::collapse_profile;
use relstring::dalembert::detect_collapse;
use relstring::error::Error;
use relstring::output;
use relstring::run::{run, OutputFormat, RunConfig};
use relstring::scenarios;
use relstring::wiggly;

#[derive(Parser)]
#[command(
    name = "relstring",
    about = "Closed relativistic strings: exact d'Alembert evolution, diagnostics, collapse analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario (or sampled input data) and write frames,
    /// diagnostics and a manifest
    Run {
        /// scenario name (see list-scenarios)
        #[arg(long)]
        scenario: Option<String>,
        /// scenario parameter, repeatable: --param R=1
        #[arg(long = "param")]
        params: Vec<String>,
        /// sampled-curve CSV (header s,x1..xn[,v1..vn]) instead of a scenario
        #[arg(long)]
        input: Option<PathBuf>,
        /// grid nodes per slice
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        /// number of frames in [t0, t1]
        #[arg(long, default_value_t = 50)]
        frames: usize,
        /// output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// csv or json
        #[arg(long, default_value = "csv")]
        format: String,
        /// collapse-detection tolerance (relative to the period)
        #[arg(long, default_value_t = 1e-6)]
        collapse_tol: f64,
        /// singular-set speed threshold
        #[arg(long, default_value_t = 1e-6)]
        singular_tol: f64,
    },
    /// Zig-zag + corner-smooth a piecewise-linear loop file and report the
    /// convergence of the approximants
    Wiggly {
        /// polyline CSV: vertex rows s,x1..xn, last row repeats the first
        #[arg(long)]
        input: PathBuf,
        /// zig-zag densities to run (even), comma separated
        #[arg(long, default_value = "2,4,8,16,32")]
        k: String,
        /// corner window width
        #[arg(long)]
        ell: f64,
        /// sup-norm budget (0 < eta < ell/3)
        #[arg(long)]
        eta: f64,
        /// samples per period in the output
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Blow-up profile ratios near the collapse of a scenario
    Profile {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        /// rescaling offsets delta as fractions of the period, comma separated
        #[arg(long, default_value = "0.04,0.02,0.01")]
        deltas: String,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        /// optional output CSV (stdout table is always printed)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks; nonzero exit if any fails
    Verify,
    /// List registered scenarios and their parameters
    ListScenarios,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io(_) => 2,
        Error::Scenario(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(_)) {
                eprintln!("run `relstring --help` for usage");
            }
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run {
            scenario,
            params,
            input,
            grid,
            t0,
            t1,
            frames,
            out,
            format,
            collapse_tol,
            singular_tol,
        } => {
            let format = match format.as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => return Err(Error::Config(format!("unknown format '{other}'"))),
            };
            let config = RunConfig {
                scenario,
                parameters: output::parse_params(&params)?,
                input,
                grid,
                t0,
                t1,
                frames,
                out_dir: out,
                format,
                collapse_tol,
                singular_tol,
            };
            let summary = run(&config)?;
            println!(
                "wrote {} frames to {} (energy {} -> {})",
                summary.frames_written,
                summary.out_dir.display(),
                output::fmt_f64(summary.energy_first),
                output::fmt_f64(summary.energy_last),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Wiggly {
            input,
            k,
            ell,
            eta,
            grid,
            out,
        } => {
            let pl = output::read_polyline_csv(&input)?;
            let params = wiggly::SmoothingParams::new(ell, eta)?;
            let ks: Vec<usize> = k
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Config(format!("bad k '{v}': {e}")))
                })
                .collect::<Result<_, _>>()?;
            let e = pl.period();
            let mut table = String::from("k,sup_deviation,bound\n");
            let mut last_pair = None;
            for &kk in &ks {
                let pair = wiggly::approximate_string(&pl, &pl, kk, &params)?;
                let mut sup: f64 = 0.0;
                for j in 0..grid {
                    let s = e * j as f64 / grid as f64;
                    let p = pair.a().eval(s);
                    let q = pl.eval_vec(s);
                    sup = sup.max(relstring::vecn::dist(&p, &q));
                }
                let bound = e / kk as f64 + 2.0 * eta;
                table.push_str(&format!(
                    "{kk},{},{}\n",
                    output::fmt_f64(sup),
                    output::fmt_f64(bound)
                ));
                println!("k = {kk:3}: sup |a_k - a| = {sup:.6} (bound {bound:.6})");
                last_pair = Some(pair);
            }
            output::write_file(&out.join("convergence.csv"), &table)?;
            if let Some(pair) = last_pair {
                let mut s = String::from("s");
                for d in 1..=pair.dim() {
                    s.push_str(&format!(",x{d}"));
                }
                s.push('\n');
                for j in 0..grid {
                    let x = e * j as f64 / grid as f64;
                    s.push_str(&output::fmt_f64(x));
                    for v in pair.a().eval(x) {
                        s.push(',');
                        s.push_str(&output::fmt_f64(v));
                    }
                    s.push('\n');
                }
                output::write_file(&out.join("smoothed_a.csv"), &s)?;
            }
            println!("wrote convergence table to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile {
            scenario,
            params,
            deltas,
            grid,
            out,
        } => {
            let name = scenario
                .ok_or_else(|| Error::Config("profile needs --scenario".into()))?;
            let built = scenarios::build_scenario(&name, &output::parse_params(&params)?)?;
            let pair = built.pair;
            let e = pair.period();
            let t_bar = built
                .spec
                .expected
                .get("collapse_time")
                .copied()
                .unwrap_or(e / 4.0);
            let check = detect_collapse(&pair, t_bar, grid, 1e-6);
            let p = check.point.clone().ok_or(Error::NoCollapseAtTbar {
                t: t_bar,
                spread: check.max_spread,
            })?;
            let ds: Vec<f64> = deltas
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad delta '{v}': {e}")))
                })
                .collect::<Result<_, _>>()?;
            let times: Vec<f64> = ds.iter().map(|d| t_bar - d * e).collect();
            let prof = collapse_profile(&pair, t_bar, &p, &times, grid)?;
            let mut table = String::from("delta,max_ratio,min_ratio,spread\n");
            println!("collapse at t = {t_bar} toward ({})",
                p.iter().map(|v| output::fmt_f64(*v)).collect::<Vec<_>>().join(", "));
            for pr in &prof {
                println!(
                    "delta = {:9.5}: ratio in [{:.6}, {:.6}], spread = {:.6}",
                    pr.delta,
                    pr.min_ratio,
                    pr.max_ratio,
                    pr.spread()
                );
                table.push_str(&format!(
                    "{},{},{},{}\n",
                    output::fmt_f64(pr.delta),
                    output::fmt_f64(pr.max_ratio),
                    output::fmt_f64(pr.min_ratio),
                    output::fmt_f64(pr.spread())
                ));
            }
            if let Some(path) = out {
                output::write_file(&path, &table)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let results = relstring::verify::run_all();
            let mut all_pass = true;
            for r in &results {
                println!("{}", r.line());
                all_pass &= r.passed;
            }
            if all_pass {
                println!("all {} criteria passed", results.len());
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::ListScenarios => {
            for (name, schema) in scenarios::list_scenarios() {
                println!("{name:16} {schema}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
