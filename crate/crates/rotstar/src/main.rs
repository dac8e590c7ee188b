//! Command-line interface: radial stars, the mass curve, rotating
//! branch continuation, the gamma = 4/3 experiments, and the gravity
//! solver self-test.
//!
//! Exit codes: 0 success (including branch terminations by the
//! density/support dichotomy), 1 solver or internal failure, 2
//! invalid input.

use clap::{Parser, Subcommand};
use rotstar::config::RunConfig;
use rotstar::continuation;
use rotstar::diagnostics;
use rotstar::eos::EquationOfState;
use rotstar::error::Error;
use rotstar::gravity;
use rotstar::poly43;
use rotstar::radial;
use rotstar::rotation::{RotationProfile, TableProfile};
use serde_json::json;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "rotstar", version, about = "Rotating self-gravitating equilibria")]
struct Cli {
    /// Configuration file (key = value lines, # comments).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Worker threads (fallback: ROTSTAR_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one non-rotating star at central enthalpy a.
    Radial {
        #[arg(long)]
        a: f64,
    },
    /// Tabulate M(a), M'(a), R(a), E(a) over a grid of central values.
    MassCurve {
        #[arg(long)]
        a_min: f64,
        #[arg(long)]
        a_max: f64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Logarithmic grid spacing.
        #[arg(long)]
        log: bool,
    },
    /// Continue the rotating branch in kappa at fixed mass.
    Branch {
        /// Built-in profile name (inverse-square, uniform) or a CSV
        /// table path with rows s,omega.
        #[arg(long)]
        omega: String,
        /// Central enthalpy of the non-rotating star fixing the mass.
        #[arg(long)]
        mass_a: f64,
        /// Largest kappa^2 (default: 0.5 |alpha_0| / sup j).
        #[arg(long)]
        kappa2_max: Option<f64>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Ball solution, kernel checks, and the degeneracy probe at
    /// gamma = 4/3.
    Poly43 {
        #[arg(long)]
        probe_kappa: Option<f64>,
    },
    /// Uniform-sphere oracle test of the gravity solver.
    SphereTest {
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        #[arg(long, default_value_t = 16)]
        order: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => 2,
                _ => 1,
            }
        }
    });
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    // CLI flag, then environment, then config file
    let threads = cli.threads.or_else(|| {
        std::env::var("ROTSTAR_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        cfg.threads = Some(t);
    }
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    match cli.cmd {
        Cmd::Radial { a } => cmd_radial(a, &cfg, &out_dir),
        Cmd::MassCurve { a_min, a_max, n, log } => cmd_mass_curve(a_min, a_max, n, log, &cfg, &out_dir),
        Cmd::Branch {
            omega,
            mass_a,
            kappa2_max,
            steps,
        } => cmd_branch(&omega, mass_a, kappa2_max, steps, &cfg, &out_dir),
        Cmd::Poly43 { probe_kappa } => cmd_poly43(probe_kappa, &cfg, &out_dir),
        Cmd::SphereTest { resolution, order } => cmd_sphere_test(resolution, order, &out_dir),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Config(format!("write {}: {e}", path.display())))
}

fn cmd_radial(a: f64, cfg: &RunConfig, out_dir: &Path) -> Result<(), Error> {
    if !(a > 0.0) {
        return Err(Error::Config(format!("--a must be > 0 (got {a})")));
    }
    let eos = EquationOfState::white_dwarf();
    let sol = radial::solve_radial(a, &eos, &cfg.radial)?;
    let energy = diagnostics::energy_radial(&sol);
    let alpha = -sol.mass / sol.radius;

    let mut csv = String::from("r,w,u,rho\n");
    let n = 1000;
    for i in 0..=n {
        let r = sol.radius * i as f64 / n as f64;
        let (w, _) = sol.w(r);
        csv.push_str(&format!("{},{},{},{}\n", r, w, sol.u(r), sol.rho(r)));
    }
    write_text(&out_dir.join("radial_profile.csv"), &csv)?;

    let summary = json!({
        "a": a,
        "R": sol.radius,
        "M": sol.mass,
        "E": energy.energy,
        "virial_residual": energy.virial_residual / energy.energy.abs().max(1e-300),
        "alpha": alpha,
    });
    let text = serde_json::to_string_pretty(&summary).unwrap();
    write_text(&out_dir.join("radial_summary.json"), &text)?;
    println!("{text}");
    Ok(())
}

fn cmd_mass_curve(
    a_min: f64,
    a_max: f64,
    n: usize,
    log: bool,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(), Error> {
    if !(a_min > 0.0 && a_max >= a_min && n >= 1) {
        return Err(Error::Config(
            "need 0 < a-min <= a-max and n >= 1".to_string(),
        ));
    }
    let grid: Vec<f64> = if n == 1 {
        vec![a_min]
    } else if log {
        (0..n)
            .map(|i| a_min * (a_max / a_min).powf(i as f64 / (n - 1) as f64))
            .collect()
    } else {
        (0..n)
            .map(|i| a_min + (a_max - a_min) * i as f64 / (n - 1) as f64)
            .collect()
    };

    let eos = EquationOfState::white_dwarf();
    use rayon::prelude::*;
    struct Row {
        a: f64,
        ok: Option<(f64, f64, f64, f64)>, // (R, M, M', E)
    }
    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&a| {
            let entry = (|| -> Result<(f64, f64, f64, f64), Error> {
                let sol = radial::solve_radial(a, &eos, &cfg.radial)?;
                let var = radial::solve_variational(&sol)?;
                let e = diagnostics::energy_radial(&sol).energy;
                Ok((sol.radius, sol.mass, var.mass_derivative, e))
            })();
            Row {
                a,
                ok: entry.ok(),
            }
        })
        .collect();

    let mut csv = String::from("a,R,M,Mprime,E\n");
    for row in &rows {
        match row.ok {
            Some((r, m, mp, e)) => csv.push_str(&format!("{},{},{},{},{}\n", row.a, r, m, mp, e)),
            None => csv.push_str(&format!("{},,,,\n", row.a)),
        }
    }

    let ok: Vec<(&f64, &(f64, f64, f64, f64))> = rows
        .iter()
        .filter_map(|r| r.ok.as_ref().map(|e| (&r.a, e)))
        .collect();
    let monotone = ok.windows(2).all(|w| w[1].1 .1 > w[0].1 .1)
        && ok.iter().all(|(_, e)| e.2 > 0.0);

    // least-squares slope of log M vs log a on the small-a subset
    let fit_pts: Vec<(f64, f64)> = {
        let small: Vec<(f64, f64)> = ok
            .iter()
            .filter(|(a, _)| **a <= 1e-2)
            .map(|(a, e)| (a.ln(), e.1.ln()))
            .collect();
        if small.len() >= 2 {
            small
        } else {
            ok.iter().map(|(a, e)| (a.ln(), e.1.ln())).collect()
        }
    };
    let slope = if fit_pts.len() >= 2 {
        let m = fit_pts.len() as f64;
        let sx: f64 = fit_pts.iter().map(|p| p.0).sum();
        let sy: f64 = fit_pts.iter().map(|p| p.1).sum();
        let sxx: f64 = fit_pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = fit_pts.iter().map(|p| p.0 * p.1).sum();
        Some((m * sxy - sx * sy) / (m * sxx - sx * sx))
    } else {
        None
    };

    let footer = json!({
        "monotone": monotone,
        "fitted_small_a_slope": slope,
        "points_ok": ok.len(),
        "points_total": rows.len(),
    });
    csv.push_str(&format!("# {}\n", serde_json::to_string(&footer).unwrap()));
    write_text(&out_dir.join("mass_curve.csv"), &csv)?;
    println!("{}", serde_json::to_string_pretty(&footer).unwrap());

    if ok.len() * 10 < rows.len() * 9 {
        return Err(Error::NumericsError(format!(
            "only {}/{} mass-curve points succeeded",
            ok.len(),
            rows.len()
        )));
    }
    Ok(())
}

fn load_profile(omega: &str) -> Result<RotationProfile, Error> {
    match RotationProfile::from_name(omega) {
        Ok(p) => Ok(p),
        Err(_) if Path::new(omega).exists() => {
            let file = fs::File::open(omega)
                .map_err(|e| Error::Config(format!("cannot open {omega}: {e}")))?;
            Ok(RotationProfile::Table(TableProfile::from_csv(
                std::io::BufReader::new(file),
            )?))
        }
        Err(e) => Err(e),
    }
}

fn cmd_branch(
    omega: &str,
    mass_a: f64,
    kappa2_max: Option<f64>,
    steps: usize,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(), Error> {
    if !(mass_a > 0.0) || steps == 0 {
        return Err(Error::Config("need --mass-a > 0 and --steps >= 1".into()));
    }
    let profile = load_profile(omega)?;
    let verdict = profile.check_admissible();
    if !verdict.admissible {
        return Err(Error::Config(format!(
            "rotation profile not admissible: {}",
            verdict.reasons.join("; ")
        )));
    }

    let eos = EquationOfState::white_dwarf();
    let star = radial::solve_radial(mass_a, &eos, &cfg.radial)?;
    let init = continuation::radial_to_field(&star, cfg.scf.nr, cfg.scf.nz);
    let m_target = init.mass();
    let alpha0 = -star.mass / star.radius;
    let sup_j = profile.sup_j();
    let k2_max = kappa2_max.unwrap_or(0.5 * alpha0.abs() / sup_j);

    let start = continuation::scf_solve(&init, 0.0, &profile, m_target, &eos, &cfg.scf)?;
    let schedule: Vec<f64> = (1..=steps)
        .map(|i| (k2_max * i as f64 / steps as f64).sqrt())
        .collect();
    let (points, mut report) =
        continuation::continue_branch(&start, &schedule, &profile, m_target, &eos, &cfg.scf)?;

    let n_guard = cfg.scf.n_guard.unwrap_or(10.0 / start.margin.max(1e-12));
    let audit = continuation::support_bound_audit(&points, n_guard);
    report.c0 = Some(audit.c0);

    let mut jsonl = String::new();
    for p in &points {
        jsonl.push_str(&serde_json::to_string(&p.record()).unwrap());
        jsonl.push('\n');
    }
    write_text(&out_dir.join("branch.jsonl"), &jsonl)?;

    for (i, p) in points.iter().enumerate() {
        if i % 5 == 0 || i + 1 == points.len() {
            let path = out_dir.join(format!("density_{i:03}.csv"));
            let mut f = fs::File::create(&path)
                .map_err(|e| Error::Config(format!("create {}: {e}", path.display())))?;
            gravity::write_field_csv(&mut f, &p.rho.grid, &p.rho.values)
                .map_err(|e| Error::Config(format!("write {}: {e}", path.display())))?;
        }
    }

    let term = json!({
        "report": report,
        "support_audit": audit,
        "mass_target": m_target,
        "alpha0": alpha0,
        "kappa2_max": k2_max,
    });
    let text = serde_json::to_string_pretty(&term).unwrap();
    write_text(&out_dir.join("termination.json"), &text)?;
    println!("{text}");
    Ok(())
}

fn cmd_poly43(probe_kappa: Option<f64>, cfg: &RunConfig, out_dir: &Path) -> Result<(), Error> {
    let ball = poly43::solve_u0()?;
    let kernel = poly43::kernel_checks(&ball);
    let probe = match probe_kappa {
        Some(k) => Some(poly43::degeneracy_probe(k, &cfg.scf)?),
        None => None,
    };
    let report = json!({
        "central": ball.central,
        "surface_slope": ball.surface_slope,
        "mass": ball.mass,
        "kernel": kernel,
        "probe": probe,
    });
    let text = serde_json::to_string_pretty(&report).unwrap();
    write_text(&out_dir.join("poly43_report.json"), &text)?;
    println!("{text}");
    Ok(())
}

fn cmd_sphere_test(resolution: usize, order: usize, out_dir: &Path) -> Result<(), Error> {
    if resolution < 16 || order % 2 != 0 {
        return Err(Error::Config(
            "need --resolution >= 16 and even --order".into(),
        ));
    }
    let report = gravity::sphere_test(resolution, order)?;
    let text = serde_json::to_string_pretty(&report).unwrap();
    write_text(&out_dir.join("sphere_test.json"), &text)?;
    println!("{text}");
    // also echo a terse pass line for scripting
    let mut out = std::io::stdout();
    let _ = writeln!(
        out,
        "sphere-test: max_rel_err = {}, observed_order = {}",
        report.max_rel_err, report.observed_order
    );
    Ok(())
}
