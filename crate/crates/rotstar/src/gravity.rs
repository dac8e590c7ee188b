//! Axisymmetric Newtonian potential U = 1/|.| * rho on a cylindrical
//! half-plane grid, by Legendre multipole expansion of the Green
//! function (even degrees only: axial plus equatorial symmetry).

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, legendre_all};
use rayon::prelude::*;
use std::io::{BufRead, Write};

/// Uniform cylindrical grid over r in [0, R_dom], zeta in [0, Z_dom].
/// Fields stored on it are even in zeta (equatorial symmetry plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymGrid {
    pub nr: usize,
    pub nz: usize,
    pub r_dom: f64,
    pub z_dom: f64,
}

impl AxisymGrid {
    pub fn new(nr: usize, nz: usize, r_dom: f64, z_dom: f64) -> Self {
        assert!(nr >= 2 && nz >= 2);
        assert!(r_dom > 0.0 && z_dom > 0.0);
        AxisymGrid { nr, nz, r_dom, z_dom }
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.r_dom / (self.nr - 1) as f64
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        self.z_dom / (self.nz - 1) as f64
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.dz()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    pub fn len(&self) -> usize {
        self.nr * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Axisymmetric density samples rho(r, zeta) >= 0 on the half plane.
#[derive(Debug, Clone)]
pub struct DensityField {
    pub grid: AxisymGrid,
    pub values: Vec<f64>,
}

/// Axisymmetric potential samples U(r, zeta).
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub grid: AxisymGrid,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn zeros(grid: AxisymGrid) -> Self {
        DensityField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Fill from a function of (r, zeta).
    pub fn from_fn(grid: AxisymGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for i in 0..grid.nr {
            for j in 0..grid.nz {
                values[grid.idx(i, j)] = f(grid.r(i), grid.z(j));
            }
        }
        DensityField { grid, values }
    }

    /// Bilinear interpolation; zero outside the domain.
    pub fn interp(&self, r: f64, z: f64) -> f64 {
        let g = &self.grid;
        let z = z.abs();
        if r < 0.0 || r > g.r_dom || z > g.z_dom {
            return 0.0;
        }
        let fr = (r / g.dr()).min((g.nr - 1) as f64 - 1e-12);
        let fz = (z / g.dz()).min((g.nz - 1) as f64 - 1e-12);
        let i = fr as usize;
        let j = fz as usize;
        let tr = fr - i as f64;
        let tz = fz - j as f64;
        let v00 = self.values[g.idx(i, j)];
        let v10 = self.values[g.idx(i + 1, j)];
        let v01 = self.values[g.idx(i, j + 1)];
        let v11 = self.values[g.idx(i + 1, j + 1)];
        v00 * (1.0 - tr) * (1.0 - tz)
            + v10 * tr * (1.0 - tz)
            + v01 * (1.0 - tr) * tz
            + v11 * tr * tz
    }

    /// Catmull-Rom cubic interpolation, with even reflection across
    /// the axis and the equator; zero outside the domain. Used for
    /// quadrature sampling, where the bilinear kinks would dominate
    /// the error budget.
    pub fn interp_cubic(&self, r: f64, z: f64) -> f64 {
        let g = &self.grid;
        let z = z.abs();
        if r < 0.0 || r > g.r_dom || z > g.z_dom {
            return 0.0;
        }
        let fr = (r / g.dr()).min((g.nr - 1) as f64 - 1e-12);
        let fz = (z / g.dz()).min((g.nz - 1) as f64 - 1e-12);
        let i = fr as usize;
        let j = fz as usize;
        let tr = fr - i as f64;
        let tz = fz - j as f64;
        // even reflection below zero, clamp at the outer edge
        let map = |k: isize, n: usize| -> usize {
            let k = if k < 0 { -k } else { k } as usize;
            k.min(n - 1)
        };
        let cr = |p: [f64; 4], t: f64| -> f64 {
            0.5 * (2.0 * p[1]
                + (-p[0] + p[2]) * t
                + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * t * t
                + (-p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3]) * t * t * t)
        };
        let mut col = [0.0; 4];
        for (c, dj) in col.iter_mut().zip(-1isize..=2) {
            let jj = map(j as isize + dj, g.nz);
            let mut row = [0.0; 4];
            for (v, di) in row.iter_mut().zip(-1isize..=2) {
                let ii = map(i as isize + di, g.nr);
                *v = self.values[g.idx(ii, jj)];
            }
            *c = cr(row, tr);
        }
        cr(col, tz)
    }

    /// Total mass 2 * 2 pi * iint rho r dr dzeta (trapezoid; the factor
    /// 2 covers zeta < 0).
    pub fn mass(&self) -> f64 {
        let g = &self.grid;
        let mut total = 0.0;
        for i in 0..g.nr {
            let wr = if i == 0 || i == g.nr - 1 { 0.5 } else { 1.0 };
            let r = g.r(i);
            let mut col = 0.0;
            for j in 0..g.nz {
                let wz = if j == 0 || j == g.nz - 1 { 0.5 } else { 1.0 };
                col += wz * self.values[g.idx(i, j)];
            }
            total += wr * r * col;
        }
        4.0 * std::f64::consts::PI * total * g.dr() * g.dz()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest r with density above threshold on the equator.
    pub fn equatorial_radius(&self, threshold: f64) -> f64 {
        let g = &self.grid;
        for i in (0..g.nr).rev() {
            if self.values[g.idx(i, 0)] > threshold {
                return g.r(i);
            }
        }
        0.0
    }

    /// Largest zeta with density above threshold on the axis.
    pub fn polar_radius(&self, threshold: f64) -> f64 {
        let g = &self.grid;
        for j in (0..g.nz).rev() {
            if self.values[g.idx(0, j)] > threshold {
                return g.z(j);
            }
        }
        0.0
    }

    /// True if the support touches the outer grid boundary.
    pub fn support_touches_boundary(&self) -> bool {
        let g = &self.grid;
        let thr = 1e-14 * self.max_value();
        (0..g.nz).any(|j| self.values[g.idx(g.nr - 1, j)] > thr)
            || (0..g.nr).any(|i| self.values[g.idx(i, g.nz - 1)] > thr)
    }
}

/// Compute U = 1/|.| * rho by Legendre expansion with even degrees
/// 0..=order. Errors with DomainOverflow if the support touches the
/// grid boundary.
pub fn potential(rho: &DensityField, order: usize) -> Result<PotentialField> {
    assert!(order % 2 == 0, "multipole cutoff must be even");
    let g = rho.grid;
    if rho.support_touches_boundary() {
        return Err(Error::DomainOverflow {
            r_eq: rho.equatorial_radius(1e-14 * rho.max_value()),
            r_dom: g.r_dom,
        });
    }

    let n_even = order / 2 + 1;
    let s_max = (g.r_dom * g.r_dom + g.z_dom * g.z_dom).sqrt();
    let ns = 4 * g.nr.max(g.nz);
    let ds = s_max / (ns - 1) as f64;

    // angular moments g_l(s) = 2 int_0^1 rho(s, mu) P_l(mu) dmu (even l)
    let n_mu = (2 * order + 16).max(32);
    let (mu_nodes, mu_weights) = gauss_legendre(n_mu);
    let mut pl = vec![0.0; order + 1];
    let mut moments = vec![vec![0.0; ns]; n_even]; // [l/2][k]
    for k in 0..ns {
        let s = k as f64 * ds;
        for (q, w) in mu_nodes.iter().zip(&mu_weights) {
            let mu = 0.5 * (q + 1.0); // map [-1,1] -> [0,1]
            let wq = 0.5 * w;
            let rr = s * (1.0 - mu * mu).max(0.0).sqrt();
            let zz = s * mu;
            let val = rho.interp_cubic(rr, zz);
            if val == 0.0 {
                continue;
            }
            legendre_all(order, mu, &mut pl);
            for le in 0..n_even {
                moments[le][k] += 2.0 * wq * val * pl[2 * le];
            }
        }
    }

    // radial moment integrals, trapezoid on the spherical grid:
    //   inner_l(s) = int_0^s g_l t^{l+2} dt
    //   outer_l(s) = int_s^smax g_l t^{1-l} dt
    let mut inner = vec![vec![0.0; ns]; n_even];
    let mut outer = vec![vec![0.0; ns]; n_even];
    for le in 0..n_even {
        let l = 2 * le as i32;
        let f_in = |k: usize| {
            let s = k as f64 * ds;
            moments[le][k] * s.powi(l + 2)
        };
        let f_out = |k: usize| {
            if k == 0 {
                0.0 // g_l(0) s^{1-l}: zero in the limit for every even l > 0,
                    // and g_0 * s -> 0 for l = 0
            } else {
                let s = k as f64 * ds;
                moments[le][k] * s.powi(1 - l)
            }
        };
        for k in 1..ns {
            inner[le][k] = inner[le][k - 1] + 0.5 * ds * (f_in(k - 1) + f_in(k));
        }
        for k in (0..ns - 1).rev() {
            outer[le][k] = outer[le][k + 1] + 0.5 * ds * (f_out(k) + f_out(k + 1));
        }
    }

    let eval = |s: f64, mu: f64, pl: &mut [f64]| -> f64 {
        legendre_all(order, mu, pl);
        let fk = (s / ds).min((ns - 1) as f64 - 1e-12);
        let k = fk as usize;
        let t = fk - k as f64;
        let mut u = 0.0;
        for le in 0..n_even {
            let l = 2 * le as i32;
            let a = inner[le][k] * (1.0 - t) + inner[le][k + 1] * t;
            let b = outer[le][k] * (1.0 - t) + outer[le][k + 1] * t;
            let term = if s == 0.0 {
                if l == 0 {
                    b
                } else {
                    0.0
                }
            } else {
                a / s.powi(l + 1) + b * s.powi(l)
            };
            u += pl[2 * le as usize] * term;
        }
        2.0 * std::f64::consts::PI * u
    };

    let values: Vec<f64> = (0..g.nr)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut pl = vec![0.0; order + 1];
            let r = g.r(i);
            (0..g.nz)
                .map(|j| {
                    let z = g.z(j);
                    let s = (r * r + z * z).sqrt();
                    let mu = if s == 0.0 { 0.0 } else { z / s };
                    eval(s, mu, &mut pl)
                })
                .collect::<Vec<_>>()
        })
        .collect();

    Ok(PotentialField { grid: g, values })
}

/// Validation report of the analytic uniform-sphere oracle.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SphereTestReport {
    pub resolution: usize,
    pub order: usize,
    pub max_rel_err: f64,
    /// Error at half resolution, for the convergence estimate.
    pub max_rel_err_coarse: f64,
    /// log2(err_coarse / err_fine).
    pub observed_order: f64,
}

fn sphere_max_rel_err(resolution: usize, order: usize) -> Result<f64> {
    let ball_r = 1.0;
    let grid = AxisymGrid::new(resolution, resolution, 2.0 * ball_r, 2.0 * ball_r);
    // ramp the edge over ~1.5 cells so grid quadratures see a smooth field
    // C^2 smootherstep edge over ~3.5 cells: mass-symmetric about the
    // ball radius, so the model deviates from the sharp ball only at
    // O(delta^2), while the grid quadratures see a smooth field
    let delta = 3.5 * grid.dr();
    let rho = DensityField::from_fn(grid, |r, z| {
        let s = (r * r + z * z).sqrt();
        let t = ((ball_r + 0.5 * delta - s) / delta).clamp(0.0, 1.0);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    });
    let u = potential(&rho, order)?;
    let mass = 4.0 / 3.0 * std::f64::consts::PI * ball_r.powi(3);
    let mut max_rel = 0.0f64;
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            let s = (grid.r(i).powi(2) + grid.z(j).powi(2)).sqrt();
            let exact = if s <= ball_r {
                2.0 * std::f64::consts::PI * (ball_r * ball_r - s * s / 3.0)
            } else {
                mass / s
            };
            let rel = (u.values[grid.idx(i, j)] - exact).abs() / exact;
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}

/// Compare the multipole solver against the analytic uniform-ball
/// potential, and estimate the convergence order under refinement.
pub fn sphere_test(resolution: usize, order: usize) -> Result<SphereTestReport> {
    let fine = sphere_max_rel_err(resolution, order)?;
    let coarse = sphere_max_rel_err(resolution / 2, order)?;
    Ok(SphereTestReport {
        resolution,
        order,
        max_rel_err: fine,
        max_rel_err_coarse: coarse,
        observed_order: (coarse / fine).log2(),
    })
}

/// Write a field snapshot as UTF-8 CSV with '#'-prefixed grid metadata.
pub fn write_field_csv(w: &mut impl Write, grid: &AxisymGrid, values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "# nr = {}", grid.nr)?;
    writeln!(w, "# nz = {}", grid.nz)?;
    writeln!(w, "# R_dom = {}", grid.r_dom)?;
    writeln!(w, "# Z_dom = {}", grid.z_dom)?;
    writeln!(w, "r,zeta,value")?;
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            writeln!(w, "{},{},{}", grid.r(i), grid.z(j), values[grid.idx(i, j)])?;
        }
    }
    Ok(())
}

/// Read a snapshot written by `write_field_csv`.
pub fn read_field_csv(r: impl BufRead) -> Result<DensityField> {
    let mut nr = None;
    let mut nz = None;
    let mut r_dom = None;
    let mut z_dom = None;
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::Config(format!("snapshot read: {e}")))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.splitn(2, '=');
            let key = parts.next().unwrap_or("").trim();
            let val = parts.next().unwrap_or("").trim();
            match key {
                "nr" => nr = val.parse::<usize>().ok(),
                "nz" => nz = val.parse::<usize>().ok(),
                "R_dom" => r_dom = val.parse::<f64>().ok(),
                "Z_dom" => z_dom = val.parse::<f64>().ok(),
                _ => {}
            }
            continue;
        }
        if line.starts_with("r,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!("bad snapshot row: {line}")));
        }
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad snapshot value: {line}")))?;
        rows.push(v);
    }
    let (nr, nz, r_dom, z_dom) = match (nr, nz, r_dom, z_dom) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(Error::Config("snapshot missing grid metadata".into())),
    };
    if rows.len() != nr * nz {
        return Err(Error::Config(format!(
            "snapshot has {} values, expected {}",
            rows.len(),
            nr * nz
        )));
    }
    Ok(DensityField {
        grid: AxisymGrid::new(nr, nz, r_dom, z_dom),
        values: rows,
    })
}
