//! Fixed-mass self-consistent-field (SCF) solver for rotating
//! equilibria rho = h^{-1}([U + kappa^2 j + alpha]_+), and branch
//! continuation in the rotation intensity kappa with an O_N guard
//! (alpha + kappa^2 sup j < -1/N) and dichotomy detection: either the
//! central density blows up or the support grows to the domain edge.

use crate::diagnostics::weighted_norm;
use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::gravity::{self, AxisymGrid, DensityField, PotentialField};
use crate::rotation::RotationProfile;

/// Converged fixed-mass equilibrium at one rotation intensity.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub rho: DensityField,
    pub kappa: f64,
    pub alpha: f64,
    pub mass: f64,
    pub rho_max: f64,
    /// Equatorial support radius (sub-grid, by linear crossing).
    pub r_eq: f64,
    /// Polar support radius.
    pub r_pole: f64,
    /// Final relative sup-norm residual of the fixed-point map.
    pub residual: f64,
    /// O_N margin: -(alpha + kappa^2 sup j).
    pub margin: f64,
    /// Weighted norm sup <x>^s |rho| with s = 4.
    pub weighted_norm: f64,
    pub iterations: usize,
}

/// JSON record for one accepted branch point.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BranchRecord {
    pub kappa: f64,
    pub alpha: f64,
    pub mass: f64,
    pub rho_max: f64,
    pub r_eq: f64,
    pub r_pole: f64,
    pub residual: f64,
    pub margin: f64,
}

impl BranchPoint {
    pub fn record(&self) -> BranchRecord {
        BranchRecord {
            kappa: self.kappa,
            alpha: self.alpha,
            mass: self.mass,
            rho_max: self.rho_max,
            r_eq: self.r_eq,
            r_pole: self.r_pole,
            residual: self.residual,
            margin: self.margin,
        }
    }
}

/// SCF iteration parameters.
#[derive(Debug, Clone, Copy)]
pub struct SCFConfig {
    /// Picard damping theta in (0, 1]; halved on residual oscillation.
    pub damping: f64,
    pub max_iter: usize,
    /// Relative sup-norm residual target.
    pub residual_tol: f64,
    /// Relative mass tolerance for the accepted point.
    pub mass_tol: f64,
    /// O_N guard parameter N; None picks N so the start margin is 10/N.
    pub n_guard: Option<f64>,
    pub nr: usize,
    pub nz: usize,
    pub multipole_order: usize,
}

impl Default for SCFConfig {
    fn default() -> Self {
        SCFConfig {
            damping: 0.5,
            max_iter: 400,
            residual_tol: 1e-5,
            mass_tol: 1e-8,
            n_guard: None,
            nr: 129,
            nz: 129,
            multipole_order: 16,
        }
    }
}

impl SCFConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config("scf.damping must be in (0, 1]".into()));
        }
        if self.residual_tol <= 0.0 || self.mass_tol <= 0.0 {
            return Err(Error::Config("scf tolerances must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("scf.max_iter must be > 0".into()));
        }
        if self.multipole_order % 2 != 0 {
            return Err(Error::Config("scf.multipole_order must be even".into()));
        }
        Ok(())
    }
}

/// Phi = U + kappa^2 j(r): gravitational plus centrifugal potential.
pub fn effective_potential(
    rho: &DensityField,
    kappa: f64,
    profile: &RotationProfile,
    order: usize,
) -> Result<PotentialField> {
    let mut phi = gravity::potential(rho, order)?;
    let g = phi.grid;
    let k2 = kappa * kappa;
    if k2 != 0.0 {
        for i in 0..g.nr {
            let jr = profile.j(g.r(i));
            for j in 0..g.nz {
                phi.values[g.idx(i, j)] += k2 * jr;
            }
        }
    }
    Ok(phi)
}

/// Grid mass of the candidate density inv([phi + alpha]_+).
fn mass_at_alpha(phi: &PotentialField, alpha: f64, inv: &dyn Fn(f64) -> f64) -> f64 {
    let mut cand = DensityField::zeros(phi.grid);
    for (v, &p) in cand.values.iter_mut().zip(&phi.values) {
        *v = inv((p + alpha).max(0.0));
    }
    cand.mass()
}

/// Solve G(alpha) = int h^{-1}([Phi + alpha]_+) = M_target for alpha.
/// G is nondecreasing in alpha. `alpha_max` caps the admissible range:
/// pass 0.0 to demand a negative constant (bound states), or +inf to
/// allow any.
pub(crate) fn alpha_for_mass_in(
    phi: &PotentialField,
    m_target: f64,
    inv: &dyn Fn(f64) -> f64,
    alpha_max: f64,
) -> Result<f64> {
    assert!(m_target > 0.0);
    let phi_max = phi.values.iter().cloned().fold(f64::MIN, f64::max);
    // below -phi_max the positive part vanishes and G = 0
    let mut lo = -phi_max;
    let mut g_lo = 0.0;
    let mut hi;
    let mut g_hi;
    if alpha_max.is_finite() {
        hi = alpha_max;
        g_hi = mass_at_alpha(phi, hi, inv);
        if g_hi < m_target {
            return Err(Error::MassUnreachable {
                target: m_target,
                alpha_min: lo,
            });
        }
    } else {
        // expand upward until the mass is bracketed
        let mut step = phi_max.abs().max(1.0);
        hi = lo + step;
        g_hi = mass_at_alpha(phi, hi, inv);
        let mut tries = 0;
        while g_hi < m_target {
            step *= 2.0;
            hi += step;
            g_hi = mass_at_alpha(phi, hi, inv);
            tries += 1;
            if tries > 200 {
                return Err(Error::MassUnreachable {
                    target: m_target,
                    alpha_min: lo,
                });
            }
        }
    }

    let tol = 1e-10 * m_target;
    let mut alpha = 0.5 * (lo + hi);
    for iter in 0..200 {
        // secant guess once the bracket is tight, bisection otherwise
        alpha = if iter > 20 && (g_hi - g_lo).abs() > 0.0 {
            let sec = lo + (m_target - g_lo) * (hi - lo) / (g_hi - g_lo);
            if sec.is_finite() && sec > lo && sec < hi {
                sec
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let g = mass_at_alpha(phi, alpha, inv);
        if (g - m_target).abs() <= tol {
            return Ok(alpha);
        }
        if g < m_target {
            lo = alpha;
            g_lo = g;
        } else {
            hi = alpha;
            g_hi = g;
        }
        if hi - lo <= 1e-15 * (1.0 + alpha.abs()) {
            return Ok(alpha);
        }
    }
    Ok(alpha)
}

/// Constant alpha < 0 so the candidate density matches the target mass.
pub fn alpha_for_mass(phi: &PotentialField, m_target: f64, eos: &EquationOfState) -> Result<f64> {
    alpha_for_mass_in(phi, m_target, &|t| eos.enthalpy_inv_pos(t), 0.0)
}

/// Last crossing of `threshold` along a sampled ray, with linear
/// interpolation between nodes for sub-grid resolution.
/// Locate the support edge along one grid line. Near the edge the
/// white-dwarf density behaves like (distance)^{3/2}, so rho^{2/3} is
/// asymptotically linear there; extrapolating its zero from the last
/// two interior nodes gives a sub-cell estimate instead of snapping to
/// the outermost node carrying mass.
fn crossing_radius(coords: impl Fn(usize) -> f64, vals: impl Fn(usize) -> f64, n: usize, threshold: f64) -> f64 {
    for k in (0..n).rev() {
        if vals(k) > threshold {
            if k + 1 >= n {
                return coords(k);
            }
            let w0 = vals(k).powf(2.0 / 3.0);
            if k >= 1 && vals(k - 1) > vals(k) {
                let wm = vals(k - 1).powf(2.0 / 3.0);
                let slope = (wm - w0) / (coords(k) - coords(k - 1));
                let edge = coords(k) + w0 / slope;
                return edge.clamp(coords(k), coords(k + 1));
            }
            // fallback: linear crossing of the threshold itself
            let v0 = vals(k);
            let v1 = vals(k + 1);
            let t = if v0 > v1 { (v0 - threshold) / (v0 - v1) } else { 0.0 };
            return coords(k) + t * (coords(k + 1) - coords(k));
        }
    }
    0.0
}

fn equatorial_radius_interp(rho: &DensityField, threshold: f64) -> f64 {
    let g = rho.grid;
    crossing_radius(|i| g.r(i), |i| rho.values[g.idx(i, 0)], g.nr, threshold)
}

fn polar_radius_interp(rho: &DensityField, threshold: f64) -> f64 {
    let g = rho.grid;
    crossing_radius(|j| g.z(j), |j| rho.values[g.idx(0, j)], g.nz, threshold)
}

/// Internals shared by the white-dwarf SCF and the gamma = 4/3 probe:
/// the centrifugal grid term, the density update t -> rho, whether the
/// potential is re-centered by subtracting its value at the origin,
/// and the admissible upper bound for alpha.
pub(crate) struct ScfCore<'a> {
    pub centrifugal: &'a dyn Fn(f64) -> f64,
    pub inv: &'a dyn Fn(f64) -> f64,
    pub subtract_center: bool,
    pub alpha_max: f64,
}

/// Raw iteration outcome; convergence is reported, not enforced.
pub(crate) struct ScfRun {
    pub rho: DensityField,
    pub alpha: f64,
    pub residual: f64,
    pub history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Per-sweep projections of the iterate increment onto `mode`.
    pub mode_drift: Vec<f64>,
}

/// Damped fixed-point iteration rho <- (1 - theta) rho + theta *
/// inv([Phi + alpha]_+), with alpha re-solved every sweep so the mass
/// constraint holds along the whole iteration. `guard(alpha)` may veto
/// a sweep (O_N membership); `mode` is an optional direction whose
/// increment projections are recorded.
pub(crate) fn scf_iterate(
    core: &ScfCore,
    initial: &DensityField,
    m_target: f64,
    cfg: &SCFConfig,
    guard: Option<&dyn Fn(f64) -> Result<()>>,
    mode: Option<&DensityField>,
) -> Result<ScfRun> {
    cfg.validate()?;
    let g = initial.grid;
    let mut rho = initial.clone();
    // normalize the start to the target mass
    let m0 = rho.mass();
    if m0 <= 0.0 {
        return Err(Error::Domain("SCF initial density has zero mass".into()));
    }
    let scale = m_target / m0;
    for v in rho.values.iter_mut() {
        *v *= scale;
    }

    // L2 grid weight r dr dz for mode projections
    let mode_norm2 = mode.map(|m| {
        let mut s = 0.0;
        for i in 0..g.nr {
            for j in 0..g.nz {
                let v = m.values[g.idx(i, j)];
                s += v * v * g.r(i);
            }
        }
        s.max(1e-300)
    });

    let mut theta = cfg.damping;
    let mut history = Vec::new();
    let mut mode_drift = Vec::new();
    let mut alpha = 0.0;
    let mut prev_res = f64::INFINITY;

    for iter in 1..=cfg.max_iter {
        let mut phi = gravity::potential(&rho, cfg.multipole_order)?;
        for i in 0..g.nr {
            let c = (core.centrifugal)(g.r(i));
            for j in 0..g.nz {
                phi.values[g.idx(i, j)] += c;
            }
        }
        if core.subtract_center {
            let phi0 = phi.values[g.idx(0, 0)];
            for v in phi.values.iter_mut() {
                *v -= phi0;
            }
        }
        alpha = alpha_for_mass_in(&phi, m_target, core.inv, core.alpha_max)?;
        if let Some(guard) = guard {
            guard(alpha)?;
        }

        let rho_max = rho.max_value().max(1e-300);
        let mut res = 0.0f64;
        let mut drift = 0.0f64;
        for i in 0..g.nr {
            for j in 0..g.nz {
                let k = g.idx(i, j);
                let cand = (core.inv)((phi.values[k] + alpha).max(0.0));
                let diff = cand - rho.values[k];
                res = res.max(diff.abs());
                if let Some(m) = mode {
                    drift += theta * diff * m.values[k] * g.r(i);
                }
                rho.values[k] += theta * diff;
            }
        }
        let res = res / rho_max;
        history.push(res);
        if let Some(n2) = mode_norm2 {
            mode_drift.push(drift / n2);
        }

        if res <= cfg.residual_tol {
            return Ok(ScfRun {
                alpha,
                residual: res,
                history,
                converged: true,
                iterations: iter,
                mode_drift,
                rho,
            });
        }
        // halve the damping when the residual oscillates upward
        if res > prev_res * 1.02 && theta > 0.05 {
            theta *= 0.5;
        }
        prev_res = res;
    }

    let residual = *history.last().unwrap();
    Ok(ScfRun {
        alpha,
        residual,
        history,
        converged: false,
        iterations: cfg.max_iter,
        mode_drift,
        rho,
    })
}

/// Solve the fixed-mass problem at one kappa for the given EOS and
/// rotation profile. The O_N margin -(alpha + kappa^2 sup j) is
/// asserted every sweep against the guard parameter N.
pub fn scf_solve(
    initial: &DensityField,
    kappa: f64,
    profile: &RotationProfile,
    m_target: f64,
    eos: &EquationOfState,
    cfg: &SCFConfig,
) -> Result<BranchPoint> {
    let sup_j = profile.sup_j();
    if !sup_j.is_finite() {
        return Err(Error::Domain(
            "rotation profile has unbounded j; not admissible".into(),
        ));
    }
    let k2 = kappa * kappa;
    let n_guard = cfg.n_guard;
    let guard = move |alpha: f64| -> Result<()> {
        let margin = -(alpha + k2 * sup_j);
        let floor = n_guard.map(|n| 1.0 / n).unwrap_or(0.0);
        if margin <= floor {
            return Err(Error::GuardViolation { value: margin });
        }
        Ok(())
    };
    let centrifugal = move |r: f64| k2 * profile.j(r);
    let inv = |t: f64| eos.enthalpy_inv_pos(t);
    let core = ScfCore {
        centrifugal: &centrifugal,
        inv: &inv,
        subtract_center: false,
        alpha_max: 0.0,
    };
    let run = scf_iterate(&core, initial, m_target, cfg, Some(&guard), None)?;
    if !run.converged {
        return Err(Error::NoConvergence {
            iters: run.iterations,
            residual: run.residual,
        });
    }
    Ok(finish_point(run, kappa, sup_j))
}

fn finish_point(run: ScfRun, kappa: f64, sup_j: f64) -> BranchPoint {
    let rho_max = run.rho.max_value();
    let thr = 1e-8 * rho_max;
    let mass = run.rho.mass();
    let margin = -(run.alpha + kappa * kappa * sup_j);
    let wn = weighted_norm(&run.rho, 4.0);
    BranchPoint {
        r_eq: equatorial_radius_interp(&run.rho, thr),
        r_pole: polar_radius_interp(&run.rho, thr),
        kappa,
        alpha: run.alpha,
        mass,
        rho_max,
        residual: run.residual,
        margin,
        weighted_norm: wn,
        iterations: run.iterations,
        rho: run.rho,
    }
}

/// Why a continuation run stopped.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum TerminationReason {
    ScheduleExhausted,
    /// rho_max exceeded 10^3 times the starting central density.
    DensityGrowth,
    /// Equatorial support exceeded 0.9 R_dom after two enlargements.
    SupportGrowth,
    /// The O_N margin was exhausted.
    GuardViolation,
    /// Step halving drove the kappa step below resolution.
    StepUnderflow,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TerminationReport {
    pub reason: TerminationReason,
    pub kappa_reached: f64,
    pub points_accepted: usize,
    pub detail: String,
    /// Calibration constant of the support-bound audit (see
    /// `support_bound_audit`), when performed.
    pub c0: Option<f64>,
}

/// Continue the branch along an increasing kappa schedule, warm-starting
/// each solve from the previous accepted density. Steps are halved on
/// non-convergence; the domain is enlarged (at most twice) when the
/// support hits the grid boundary.
pub fn continue_branch(
    start: &BranchPoint,
    kappa_schedule: &[f64],
    profile: &RotationProfile,
    m_target: f64,
    eos: &EquationOfState,
    cfg: &SCFConfig,
) -> Result<(Vec<BranchPoint>, TerminationReport)> {
    if kappa_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("kappa schedule must be increasing".into()));
    }
    if let Some(&k0) = kappa_schedule.first() {
        if k0 < start.kappa {
            return Err(Error::Config(
                "kappa schedule must start at or above the start point".into(),
            ));
        }
    }
    let rho_c0 = start.rho.values[start.rho.grid.idx(0, 0)].max(1e-300);
    let mut cfg = *cfg;
    if cfg.n_guard.is_none() {
        // pick N so the start sits well inside O_N: margin_0 = 10/N
        cfg.n_guard = Some(10.0 / start.margin.max(1e-12));
    }

    let mut points: Vec<BranchPoint> = vec![start.clone()];
    let mut enlargements = 0usize;
    let kappa_span = kappa_schedule.last().copied().unwrap_or(start.kappa) - start.kappa;

    let finish = |points: Vec<BranchPoint>, reason, detail: String| {
        let report = TerminationReport {
            reason,
            kappa_reached: points.last().map(|p| p.kappa).unwrap_or(start.kappa),
            points_accepted: points.len(),
            detail,
            c0: None,
        };
        Ok((points, report))
    };

    for &kappa_target in kappa_schedule {
        if kappa_target <= points.last().unwrap().kappa {
            continue; // schedule value already covered (e.g. start itself)
        }
        // adaptive sub-stepping toward kappa_target
        let mut kappa_try = kappa_target;
        'substep: loop {
            let warm = points.last().unwrap().rho.clone();
            match scf_solve(&warm, kappa_try, profile, m_target, eos, &cfg) {
                Ok(pt) => {
                    // dichotomy thresholds
                    if pt.rho_max > 1e3 * rho_c0 {
                        let d = format!(
                            "rho_max {} exceeded 1000x the initial central density {}",
                            pt.rho_max, rho_c0
                        );
                        let mut pts = points;
                        pts.push(pt);
                        return finish(pts, TerminationReason::DensityGrowth, d);
                    }
                    if enlargements >= 2 && pt.r_eq > 0.9 * pt.rho.grid.r_dom {
                        let d = format!(
                            "equatorial radius {} exceeds 0.9 R_dom after {enlargements} enlargements",
                            pt.r_eq
                        );
                        let mut pts = points;
                        pts.push(pt);
                        return finish(pts, TerminationReason::SupportGrowth, d);
                    }
                    points.push(pt);
                    if kappa_try >= kappa_target {
                        break 'substep;
                    }
                    kappa_try = kappa_target;
                }
                Err(Error::NoConvergence { .. }) => {
                    let base = points.last().unwrap().kappa;
                    let step = 0.5 * (kappa_try - base);
                    if step < 1e-6 * kappa_span.max(1e-12) {
                        return finish(
                            points,
                            TerminationReason::StepUnderflow,
                            format!("kappa step underflow near kappa = {base}"),
                        );
                    }
                    kappa_try = base + step;
                }
                Err(Error::GuardViolation { value }) => {
                    return finish(
                        points,
                        TerminationReason::GuardViolation,
                        format!("O_N margin exhausted ({value}) at kappa = {kappa_try}"),
                    );
                }
                Err(Error::DomainOverflow { r_eq, r_dom }) => {
                    if enlargements >= 2 {
                        return finish(
                            points,
                            TerminationReason::SupportGrowth,
                            format!("support ({r_eq}) reached the domain edge ({r_dom}) after {enlargements} enlargements"),
                        );
                    }
                    enlargements += 1;
                    let last = points.last_mut().unwrap();
                    last.rho = enlarge(&last.rho, 1.5);
                }
                Err(e) => return Err(e),
            }
        }
    }
    finish(
        points,
        TerminationReason::ScheduleExhausted,
        "schedule completed".into(),
    )
}

/// Resample a density on a domain grown by `factor` (same node count).
fn enlarge(rho: &DensityField, factor: f64) -> DensityField {
    let g = rho.grid;
    let big = AxisymGrid::new(g.nr, g.nz, g.r_dom * factor, g.z_dom * factor);
    DensityField::from_fn(big, |r, z| rho.interp(r, z))
}

/// Support-bound audit: every accepted point must satisfy
/// r_supp <= C0 * N * ||rho||_s, with C0 calibrated once from the
/// first point (safety factor 2 on its own ratio).
#[derive(Debug, Clone, serde::Serialize)]
pub struct SupportAudit {
    pub c0: f64,
    pub n_guard: f64,
    pub max_ratio: f64,
    pub passed: bool,
}

pub fn support_bound_audit(points: &[BranchPoint], n_guard: f64) -> SupportAudit {
    assert!(!points.is_empty());
    let ratio = |p: &BranchPoint| {
        let r_supp = p.r_eq.max(p.r_pole);
        r_supp / (n_guard * p.weighted_norm.max(1e-300))
    };
    let c0 = 2.0 * ratio(&points[0]);
    let max_ratio = points.iter().map(ratio).fold(0.0, f64::max);
    SupportAudit {
        c0,
        n_guard,
        max_ratio,
        passed: max_ratio <= c0,
    }
}

/// Discretize a radial star on a half-plane grid sized to its support.
pub fn radial_to_field(sol: &crate::radial::RadialSolution, nr: usize, nz: usize) -> DensityField {
    let dom = 2.0 * sol.radius;
    let grid = AxisymGrid::new(nr, nz, dom, dom);
    DensityField::from_fn(grid, |r, z| {
        let s = (r * r + z * z).sqrt();
        sol.rho(s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{solve_radial, RadialConfig};

    fn wd() -> EquationOfState {
        EquationOfState::white_dwarf()
    }

    fn small_cfg() -> SCFConfig {
        SCFConfig {
            max_iter: 300,
            ..SCFConfig::default()
        }
    }

    #[test]
    fn effective_potential_zero_density_is_j() {
        let grid = AxisymGrid::new(33, 33, 4.0, 4.0);
        let rho = DensityField::zeros(grid);
        let p = RotationProfile::InverseSquare;
        let phi = effective_potential(&rho, 1.0, &p, 8).unwrap();
        for i in 0..grid.nr {
            let r = grid.r(i);
            for j in 0..grid.nz {
                assert!((phi.values[grid.idx(i, j)] - p.j(r)).abs() < 1e-14);
            }
        }
        // j -> 1/2 far out
        assert!((p.j(1e6) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn effective_potential_linear_in_kappa_squared() {
        let grid = AxisymGrid::new(33, 33, 4.0, 4.0);
        let rho = DensityField::from_fn(grid, |r, z| {
            let s2 = r * r + z * z;
            (1.0 - s2).max(0.0)
        });
        let p = RotationProfile::InverseSquare;
        let k = 0.7;
        let phi0 = effective_potential(&rho, 0.0, &p, 8).unwrap();
        let phik = effective_potential(&rho, k, &p, 8).unwrap();
        for i in 0..grid.nr {
            let expect = k * k * p.j(grid.r(i));
            for j in 0..grid.nz {
                let idx = grid.idx(i, j);
                assert!((phik.values[idx] - phi0.values[idx] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn alpha_matches_radial_oracle() {
        let sol = solve_radial(1.0, &wd(), &RadialConfig::default()).unwrap();
        let rho = radial_to_field(&sol, 129, 129);
        let m_target = rho.mass();
        let phi = effective_potential(&rho, 0.0, &RotationProfile::InverseSquare, 16).unwrap();
        let alpha = alpha_for_mass(&phi, m_target, &wd()).unwrap();
        let expect = -sol.mass / sol.radius;
        assert!(
            (alpha - expect).abs() < 1e-3 * expect.abs(),
            "alpha = {alpha}, expected {expect}"
        );
    }

    #[test]
    fn alpha_monotone_in_mass_and_unreachable() {
        let grid = AxisymGrid::new(49, 49, 4.0, 4.0);
        let rho = DensityField::from_fn(grid, |r, z| (1.0 - r * r - z * z).max(0.0));
        let phi = effective_potential(&rho, 0.0, &RotationProfile::InverseSquare, 8).unwrap();
        let m = rho.mass();
        let a1 = alpha_for_mass(&phi, 0.5 * m, &wd()).unwrap();
        let a2 = alpha_for_mass(&phi, 0.8 * m, &wd()).unwrap();
        assert!(a1 < a2, "G monotone requires alpha increasing with mass");
        // a huge target cannot be reached with alpha < 0
        assert!(matches!(
            alpha_for_mass(&phi, 1e9, &wd()),
            Err(Error::MassUnreachable { .. })
        ));
    }

    #[test]
    fn scf_kappa_zero_matches_radial() {
        let sol = solve_radial(1.0, &wd(), &RadialConfig::default()).unwrap();
        let init = radial_to_field(&sol, 129, 129);
        let m_target = init.mass();
        let cfg = small_cfg();
        let pt = scf_solve(&init, 0.0, &RotationProfile::InverseSquare, m_target, &wd(), &cfg)
            .unwrap();
        let g = pt.rho.grid;
        let mut max_dev = 0.0f64;
        for i in 0..g.nr {
            for j in 0..g.nz {
                let s = (g.r(i).powi(2) + g.z(j).powi(2)).sqrt();
                max_dev = max_dev.max((pt.rho.values[g.idx(i, j)] - sol.rho(s)).abs());
            }
        }
        assert!(
            max_dev <= 1e-3 * pt.rho_max,
            "max deviation {max_dev} vs rho_max {}",
            pt.rho_max
        );
        assert!((pt.mass - m_target).abs() <= 1e-8 * m_target);
        assert!(pt.margin > 0.0);

        // basin test: perturbed start reaches the same fixed point
        let mut init2 = init.clone();
        for v in init2.values.iter_mut() {
            *v *= 1.1;
        }
        let pt2 = scf_solve(&init2, 0.0, &RotationProfile::InverseSquare, m_target, &wd(), &cfg)
            .unwrap();
        let dev: f64 = pt
            .rho
            .values
            .iter()
            .zip(&pt2.rho.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-3 * pt.rho_max, "basin deviation {dev}");
    }

    #[test]
    fn scf_small_kappa_is_oblate() {
        let sol = solve_radial(1.0, &wd(), &RadialConfig::default()).unwrap();
        let init = radial_to_field(&sol, 129, 129);
        let m_target = init.mass();
        let profile = RotationProfile::InverseSquare;
        let alpha0 = -sol.mass / sol.radius;
        // kappa^2 sup j = 0.05 |alpha0|
        let kappa = (0.05 * alpha0.abs() / profile.sup_j()).sqrt();
        let pt = scf_solve(&init, kappa, &profile, m_target, &wd(), &small_cfg()).unwrap();
        assert!(
            pt.r_eq >= pt.r_pole,
            "centrifugal support should be equatorial: r_eq = {}, r_pole = {}",
            pt.r_eq,
            pt.r_pole
        );
        assert!(pt.margin > 0.0);
    }

    #[test]
    fn branch_trivial_schedule() {
        let sol = solve_radial(1.0, &wd(), &RadialConfig::default()).unwrap();
        let init = radial_to_field(&sol, 129, 129);
        let m_target = init.mass();
        let cfg = small_cfg();
        let start = scf_solve(&init, 0.0, &RotationProfile::InverseSquare, m_target, &wd(), &cfg)
            .unwrap();
        let (pts, report) = continue_branch(
            &start,
            &[0.0],
            &RotationProfile::InverseSquare,
            m_target,
            &wd(),
            &cfg,
        )
        .unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(report.reason, TerminationReason::ScheduleExhausted);
    }
}
