//! Energies and identity checks for radial stars: the total energy
//! E = int H(rho) - D, the virial identity, the dE/da = alpha M'(a)
//! identity, and the weighted sup-norm on axisymmetric fields.

use crate::eos::EquationOfState;
use crate::error::Result;
use crate::gravity::DensityField;
use crate::quad::simpson_uniform;
use crate::radial::{self, RadialConfig, RadialSolution};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Energy integrals of one radial star, with both virial forms.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct EnergyReport {
    /// E = Hint - D.
    pub energy: f64,
    /// Integral of H(rho) over space.
    pub hint: f64,
    /// Double-layer potential energy (1/2) iint rho rho' / |x-y|.
    pub d_energy: f64,
    /// Integral of 4H - 3 rho h over space.
    pub virial_rhs: f64,
    /// 3 times the pressure integral.
    pub pressure_virial_lhs: f64,
    /// |E - virial_rhs|.
    pub virial_residual: f64,
    /// |3 int p - D|.
    pub pressure_residual: f64,
}

/// Energies of a solved radial star.
pub fn energy_radial(sol: &RadialSolution) -> EnergyReport {
    energy_of_radial_density(|r| sol.rho(r), sol.radius, &sol.eos)
}

/// Energies of an arbitrary radial density supported in [0, radius].
/// The potential is rebuilt from rho by interior/exterior quadrature,
/// independent of any field equation the density may satisfy.
pub fn energy_of_radial_density(
    rho: impl Fn(f64) -> f64,
    radius: f64,
    eos: &EquationOfState,
) -> EnergyReport {
    let n = 4096usize; // intervals; nodes n+1
    let h = radius / n as f64;

    let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let rho_n: Vec<f64> = r.iter().map(|&ri| rho(ri)).collect();
    let rho_m: Vec<f64> = (0..n).map(|i| rho((i as f64 + 0.5) * h)).collect();

    // cumulative integrals with per-interval Simpson (midpoint sampled)
    let mut c_inner = vec![0.0; n + 1]; // int_0^r rho s^2 ds
    for i in 0..n {
        let a = r[i];
        let b = r[i + 1];
        let m = 0.5 * (a + b);
        c_inner[i + 1] = c_inner[i]
            + h / 6.0 * (rho_n[i] * a * a + 4.0 * rho_m[i] * m * m + rho_n[i + 1] * b * b);
    }
    let mut c_outer = vec![0.0; n + 1]; // int_r^R rho s ds
    for i in (0..n).rev() {
        let a = r[i];
        let b = r[i + 1];
        let m = 0.5 * (a + b);
        c_outer[i] = c_outer[i + 1]
            + h / 6.0 * (rho_n[i] * a + 4.0 * rho_m[i] * m + rho_n[i + 1] * b);
    }

    let potential: Vec<f64> = (0..=n)
        .map(|i| {
            let inner = if i == 0 { 0.0 } else { c_inner[i] / r[i] };
            FOUR_PI * (inner + c_outer[i])
        })
        .collect();

    let hint_vals: Vec<f64> = (0..=n)
        .map(|i| eos.pressure_potential(rho_n[i]).unwrap_or(0.0) * r[i] * r[i])
        .collect();
    let d_vals: Vec<f64> = (0..=n)
        .map(|i| rho_n[i] * potential[i] * r[i] * r[i])
        .collect();
    let virial_vals: Vec<f64> = (0..=n)
        .map(|i| {
            let big_h = eos.pressure_potential(rho_n[i]).unwrap_or(0.0);
            let hh = eos.enthalpy(rho_n[i]).unwrap_or(0.0);
            (4.0 * big_h - 3.0 * rho_n[i] * hh) * r[i] * r[i]
        })
        .collect();
    let p_vals: Vec<f64> = (0..=n)
        .map(|i| eos.pressure(rho_n[i]).unwrap_or(0.0) * r[i] * r[i])
        .collect();

    let hint = FOUR_PI * simpson_uniform(&hint_vals, h);
    let d_energy = 0.5 * FOUR_PI * simpson_uniform(&d_vals, h);
    let virial_rhs = FOUR_PI * simpson_uniform(&virial_vals, h);
    let pressure_virial_lhs = 3.0 * FOUR_PI * simpson_uniform(&p_vals, h);
    let energy = hint - d_energy;

    EnergyReport {
        energy,
        hint,
        d_energy,
        virial_rhs,
        pressure_virial_lhs,
        virial_residual: (energy - virial_rhs).abs(),
        pressure_residual: (pressure_virial_lhs - d_energy).abs(),
    }
}

/// Result of the dE/da = alpha M'(a) identity check.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DeDaCheck {
    /// Centered finite difference of E over a(1 +- delta).
    pub lhs: f64,
    /// alpha(a) M'(a) with alpha = -M/R.
    pub rhs: f64,
    pub rel_err: f64,
    pub alpha: f64,
}

/// Check dE/da = alpha M'(a) by centered differences.
pub fn de_da_check(
    a: f64,
    delta: f64,
    eos: &EquationOfState,
    cfg: &RadialConfig,
) -> Result<DeDaCheck> {
    let base = radial::solve_radial(a, eos, cfg)?;
    let hi = radial::solve_radial(a * (1.0 + delta), eos, cfg)?;
    let lo = radial::solve_radial(a * (1.0 - delta), eos, cfg)?;
    let e_hi = energy_radial(&hi).energy;
    let e_lo = energy_radial(&lo).energy;
    let lhs = (e_hi - e_lo) / (2.0 * a * delta);

    // inside the star h(rho) = U + alpha, and u(R) = 0 with U = M/r
    // outside forces alpha = -M/R
    let alpha = -base.mass / base.radius;
    let var = radial::solve_variational(&base)?;
    let rhs = alpha * var.mass_derivative;
    let rel_err = (lhs - rhs).abs() / rhs.abs().max(1e-300);
    Ok(DeDaCheck {
        lhs,
        rhs,
        rel_err,
        alpha,
    })
}

/// Weighted sup-norm sup_x <x>^s |f(x)| with <x> = (1 + |x|^2)^{1/2},
/// taken over the grid nodes. Requires s > 3.
pub fn weighted_norm(field: &DensityField, s: f64) -> f64 {
    assert!(s > 3.0, "weight exponent must exceed 3");
    let grid = &field.grid;
    let mut best = 0.0f64;
    for i in 0..grid.nr {
        let r = grid.r(i);
        for j in 0..grid.nz {
            let z = grid.z(j);
            let x2 = r * r + z * z;
            let w = (1.0 + x2).powf(0.5 * s) * field.values[grid.idx(i, j)].abs();
            best = best.max(w);
        }
    }
    best
}
