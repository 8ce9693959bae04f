//! `netsync`: Kron-reduce, classify, certify, simulate, and sweep coupled
//! nonlinear-circuit networks from netlist JSON files.
//!
//! Exit codes: 0 success (for `certify`: the certificate passes), 1 certify
//! fail/conditional/inconclusive, 2 any error. All outputs are deterministic
//! functions of the inputs and flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use netsync_core::certificate::{certify, xi_surface, SweepConfig};
use netsync_core::network::parse_netlist;
use netsync_core::numerics::Tolerances;
use netsync_core::oscillator;
use netsync_core::reduction::{classify, default_probes, kron_reduce, kron_reduce_uniform};
use netsync_core::simulator::{assess_sync, integrate, realize_coupling, CoupledSystem, Method, SimOptions};

#[derive(Parser)]
#[command(name = "netsync", version, about = "Synchronization analysis of nonlinear circuits coupled through passive LTI networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk45,
    Rk4,
}

#[derive(Subcommand)]
enum Command {
    /// Kron-reduce the netlist (symbolically for uniform shunt-free networks,
    /// numerically at s = j*omega otherwise).
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Evaluation frequency in rad/s; forces the numeric path.
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Classify the coupling network and report the extracted parameters.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the small-gain synchronization certificate.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        omega_min: f64,
        #[arg(long, default_value_t = 1e3)]
        omega_max: f64,
        #[arg(long, default_value_t = 4000)]
        points: usize,
    },
    /// Integrate the coupled circuits and report the synchronization error.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        /// Trajectory CSV path; the summary JSON lands next to it.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 200.0)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Rk45)]
        method: MethodArg,
        /// Fixed step for rk4 (ignored by rk45).
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Relative synchronization threshold on the error tail.
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
        #[arg(long, default_value_t = 2001)]
        output_points: usize,
        /// Comma-separated full initial state override.
        #[arg(long)]
        x0: Option<String>,
    },
    /// Sweep the homogeneous-star coupling strength xi(R_net, L_net).
    Surface {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        r_min: f64,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        l_min: f64,
        #[arg(long, default_value_t = 10.0)]
        l_max: f64,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        omega_min: f64,
        #[arg(long, default_value_t = 1e3)]
        omega_max: f64,
        #[arg(long, default_value_t = 4000)]
        points: usize,
        /// Export the loop-gain magnitude curve sigma*|F(j omega)| at one
        /// fixed "R,L" point instead of the xi grid (CSV: omega,magnitude).
        #[arg(long)]
        bode: Option<String>,
    },
}

fn tolerances() -> Result<Tolerances, String> {
    let mut tol = Tolerances::default();
    if let Ok(v) = std::env::var("NETSYNC_TOL") {
        let parsed: f64 = v
            .parse()
            .map_err(|_| format!("NETSYNC_TOL must be a positive number, got '{v}'"))?;
        if parsed <= 0.0 {
            return Err(format!("NETSYNC_TOL must be positive, got {parsed}"));
        }
        tol.structural_tol = parsed;
    }
    Ok(tol)
}

fn print_ignoring_closed_pipe(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print_ignoring_closed_pipe(text);
            Ok(())
        }
    }
}

fn read_netlist(path: &Path) -> Result<netsync_core::Netlist, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    parse_netlist(&text).map_err(|e| e.to_string())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * k as f64 / (n - 1) as f64))
        .collect()
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run() -> Result<i32, String> {
    let cli = Cli::parse();
    let tol = tolerances()?;
    match cli.command {
        Command::Reduce { input, output, omega } => {
            let net = read_netlist(&input)?;
            let symbolic = if omega.is_none() && net.shunts.is_empty() {
                kron_reduce_uniform(&net, &tol).ok()
            } else {
                None
            };
            let json = if let Some((y_series, lap)) = symbolic {
                serde_json::json!({
                    "kind": "symbolic",
                    "dim": lap.nrows(),
                    "boundary": net.names[..net.n_boundary].to_vec(),
                    "y_series": {"num": y_series.num().coeffs(), "den": y_series.den().coeffs()},
                    "laplacian": (0..lap.nrows())
                        .map(|i| (0..lap.ncols()).map(|j| lap[(i, j)]).collect::<Vec<f64>>())
                        .collect::<Vec<_>>(),
                })
            } else {
                let w = omega.unwrap_or(1.0);
                let adm = netsync_core::assemble_admittance(&net).map_err(|e| e.to_string())?;
                let m = adm.eval(Complex64::new(0.0, w)).map_err(|e| e.to_string())?;
                let red = kron_reduce(&m, net.n_boundary, &tol).map_err(|e| e.to_string())?;
                let dim = red.y.dim();
                serde_json::json!({
                    "kind": "numeric",
                    "omega": w,
                    "dim": dim,
                    "boundary": net.names[..net.n_boundary].to_vec(),
                    "entries": (0..dim)
                        .flat_map(|i| (0..dim).map(move |j| (i, j)))
                        .map(|(i, j)| vec![red.y.get(i, j).re, red.y.get(i, j).im])
                        .collect::<Vec<_>>(),
                })
            };
            emit(&output, &serde_json::to_string_pretty(&json).unwrap())?;
            Ok(0)
        }
        Command::Classify { input, output } => {
            let net = read_netlist(&input)?;
            let class = classify(&net, &default_probes(), &tol).map_err(|e| e.to_string())?;
            emit(&output, &serde_json::to_string_pretty(&class.to_json()).unwrap())?;
            Ok(0)
        }
        Command::Certify { input, output, omega_min, omega_max, points } => {
            let net = read_netlist(&input)?;
            let osc = oscillator::from_config(&net.oscillator).map_err(|e| e.to_string())?;
            let class = classify(&net, &default_probes(), &tol).map_err(|e| e.to_string())?;
            let cfg = SweepConfig { omega_min, omega_max, points, ..Default::default() };
            let report = certify(&class, &osc, &cfg).map_err(|e| e.to_string())?;
            emit(&output, &serde_json::to_string_pretty(&report.to_json()).unwrap())?;
            Ok(report.verdict.exit_code())
        }
        Command::Simulate {
            input,
            output,
            t_end,
            method,
            dt,
            threshold,
            output_points,
            x0,
        } => {
            let net = read_netlist(&input)?;
            let osc = oscillator::from_config(&net.oscillator).map_err(|e| e.to_string())?;
            let class = classify(&net, &default_probes(), &tol).map_err(|e| e.to_string())?;
            let coupling = realize_coupling(&class, &tol).map_err(|e| e.to_string())?;
            let sys = CoupledSystem::new(class.n, osc, coupling).map_err(|e| e.to_string())?;
            let state0 = match x0 {
                None => sys.default_initial_state(),
                Some(text) => {
                    let vals: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
                    let vals = vals.map_err(|e| format!("parsing --x0: {e}"))?;
                    if vals.len() != sys.state_len() {
                        return Err(format!(
                            "--x0 has {} entries, system expects {} ({:?})",
                            vals.len(),
                            sys.state_len(),
                            sys.state_labels()
                        ));
                    }
                    nalgebra::DVector::from_vec(vals)
                }
            };
            let sim_method = match method {
                MethodArg::Rk45 => Method::Rk45 { rtol: 1e-6, atol: 1e-9 },
                MethodArg::Rk4 => Method::Rk4 { dt },
            };
            let opts = SimOptions { t_end, method: sim_method, output_points, ..Default::default() };
            let traj = integrate(&sys, &state0, &opts).map_err(|e| e.to_string())?;
            let summary = assess_sync(&traj, threshold, &sim_method);
            let summary_json = serde_json::json!({
                "final_error": summary.final_error,
                "initial_error": summary.initial_error,
                "synchronized": summary.synchronized,
                "threshold": summary.threshold,
                "t_end": summary.t_end,
                "method": summary.method,
                "max_tail_error": summary.max_tail_error,
            });
            let summary_text = serde_json::to_string_pretty(&summary_json).unwrap();
            match &output {
                Some(path) => {
                    fs::write(path, traj.csv()).map_err(|e| format!("writing {}: {e}", path.display()))?;
                    let summary_path = summary_sibling(path);
                    fs::write(&summary_path, &summary_text)
                        .map_err(|e| format!("writing {}: {e}", summary_path.display()))?;
                    print_ignoring_closed_pipe(&summary_text);
                }
                None => {
                    print_ignoring_closed_pipe(traj.csv().trim_end());
                    print_ignoring_closed_pipe(&summary_text);
                }
            }
            Ok(0)
        }
        Command::Surface {
            input,
            output,
            r_min,
            r_max,
            l_min,
            l_max,
            grid,
            n,
            omega_min,
            omega_max,
            points,
            bode,
        } => {
            let net = read_netlist(&input)?;
            let osc = oscillator::from_config(&net.oscillator).map_err(|e| e.to_string())?;
            let cfg = SweepConfig { omega_min, omega_max, points, ..Default::default() };
            if let Some(spec) = bode {
                let parts: Vec<&str> = spec.split(',').collect();
                if parts.len() != 2 {
                    return Err("--bode expects \"R,L\"".into());
                }
                let r: f64 = parts[0].trim().parse().map_err(|e| format!("parsing --bode R: {e}"))?;
                let l: f64 = parts[1].trim().parse().map_err(|e| format!("parsing --bode L: {e}"))?;
                let z_net = netsync_core::RationalFunction::from_poly(
                    netsync_core::Polynomial::new(vec![r, l]),
                );
                let f = osc.z_osc.parallel(&z_net).map_err(|e| e.to_string())?;
                let mut csv = format!("# loop-gain magnitude at r_net = {r}, l_net = {l}, n = {n}\nomega,magnitude\n");
                for k in 0..cfg.points {
                    let w = 10f64.powf(
                        cfg.omega_min.log10()
                            + (cfg.omega_max.log10() - cfg.omega_min.log10()) * k as f64
                                / (cfg.points - 1) as f64,
                    );
                    let m = f
                        .eval(Complex64::new(0.0, w))
                        .map(|v| v.norm() * osc.sigma)
                        .map_err(|e| e.to_string())?;
                    csv.push_str(&format!("{},{}\n", fmt17(w), fmt17(m)));
                }
                emit(&output, &csv)?;
                return Ok(0);
            }
            let r_grid = log_grid(r_min, r_max, grid);
            let l_grid = log_grid(l_min, l_max, grid);
            let cells = xi_surface(&r_grid, &l_grid, &osc, n, &cfg).map_err(|e| e.to_string())?;
            let mut csv = format!("# xi surface, n = {n}\nr_net,l_net,xi\n");
            for cell in cells {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt17(cell.r_net),
                    fmt17(cell.l_net),
                    fmt17(cell.xi)
                ));
            }
            emit(&output, &csv)?;
            Ok(0)
        }
    }
}

fn summary_sibling(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    csv_path.with_file_name(format!("{stem}_summary.json"))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
