//! Angular velocity profiles omega(s), their cumulative centrifugal
//! function j(r) = int_0^r s omega^2(s) ds, and the admissibility
//! conditions required of rotation profiles:
//!   (1) s omega^2(s) integrable on (0, inf),
//!   (2) omega^2 not compactly supported,
//!   (3) r (sup j - j(r)) -> 0 as r -> inf.

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use std::io::BufRead;

#[derive(Debug, Clone)]
pub enum RotationProfile {
    /// omega(s) = (1 + s^2)^{-1}; admissible, sup j = 1/2.
    InverseSquare,
    /// omega = 1; not admissible (s omega^2 is not integrable).
    Uniform,
    /// Tabulated profile with monotone cubic interpolation and a
    /// power-law tail fitted to the last decade of the table.
    Table(TableProfile),
}

/// Per-condition admissibility verdict with a human-readable trail.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Admissibility {
    pub integrable: bool,
    pub not_compactly_supported: bool,
    pub tail_vanishes: bool,
    pub admissible: bool,
    /// True when the verdict relied on extrapolation beyond a table.
    pub extrapolated: bool,
    pub reasons: Vec<String>,
}

impl RotationProfile {
    /// Look up a named built-in profile.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "inverse-square" => Ok(RotationProfile::InverseSquare),
            "uniform" => Ok(RotationProfile::Uniform),
            other => Err(Error::Config(format!(
                "unknown rotation profile '{other}' (built-ins: inverse-square, uniform)"
            ))),
        }
    }

    pub fn omega(&self, s: f64) -> f64 {
        match self {
            RotationProfile::InverseSquare => 1.0 / (1.0 + s * s),
            RotationProfile::Uniform => 1.0,
            RotationProfile::Table(t) => t.omega(s),
        }
    }

    /// j(r) = int_0^r s omega^2(s) ds.
    pub fn j(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self {
            // closed form: int s (1+s^2)^{-2} ds = (1 - (1+r^2)^{-1}) / 2
            RotationProfile::InverseSquare => 0.5 * r * r / (1.0 + r * r),
            RotationProfile::Uniform => 0.5 * r * r,
            RotationProfile::Table(t) => t.j(r),
        }
    }

    /// sup_r j(r); infinite when s omega^2 is not integrable.
    pub fn sup_j(&self) -> f64 {
        match self {
            RotationProfile::InverseSquare => 0.5,
            RotationProfile::Uniform => f64::INFINITY,
            RotationProfile::Table(t) => t.sup_j(),
        }
    }

    /// Evaluate the three rotation-profile conditions.
    pub fn check_admissible(&self) -> Admissibility {
        match self {
            RotationProfile::InverseSquare => Admissibility {
                integrable: true,
                not_compactly_supported: true,
                tail_vanishes: true, // r (sup j - j) = r / (2 (1 + r^2))
                admissible: true,
                extrapolated: false,
                reasons: vec![],
            },
            RotationProfile::Uniform => Admissibility {
                integrable: false,
                not_compactly_supported: true,
                tail_vanishes: false,
                admissible: false,
                extrapolated: false,
                reasons: vec!["s omega^2(s) is not integrable".into()],
            },
            RotationProfile::Table(t) => t.check_admissible(),
        }
    }
}

/// Tabulated omega(s) with Fritsch-Carlson monotone cubic interpolation.
#[derive(Debug, Clone)]
pub struct TableProfile {
    s: Vec<f64>,
    omega: Vec<f64>,
    /// Interpolant tangents.
    slope: Vec<f64>,
    /// Cumulative j at the table nodes.
    j_nodes: Vec<f64>,
    /// Power-law tail omega ~ c s^p beyond the table, if fittable.
    tail: Option<(f64, f64)>,
}

impl TableProfile {
    pub fn new(s: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if s.len() != omega.len() || s.len() < 2 {
            return Err(Error::Config(
                "rotation table needs >= 2 rows of equal length".into(),
            ));
        }
        if s[0] < 0.0 || s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "rotation table abscissae must be nonnegative and increasing".into(),
            ));
        }
        if omega.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Config("rotation table omega must be >= 0".into()));
        }
        let slope = monotone_tangents(&s, &omega);
        let mut t = TableProfile {
            s,
            omega,
            slope,
            j_nodes: vec![],
            tail: None,
        };
        t.tail = t.fit_tail();
        t.j_nodes = t.cumulative_j();
        Ok(t)
    }

    /// Parse a two-column CSV (s, omega); '#' comments and a header
    /// line are allowed.
    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut s = Vec::new();
        let mut w = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(|e| Error::Config(format!("table read: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Config(format!("bad table row: {line}")));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    s.push(a);
                    w.push(b);
                }
                _ => {
                    if s.is_empty() {
                        continue; // header
                    }
                    return Err(Error::Config(format!("bad table row: {line}")));
                }
            }
        }
        TableProfile::new(s, w)
    }

    fn omega(&self, x: f64) -> f64 {
        let n = self.s.len();
        if x <= self.s[0] {
            return self.omega[0];
        }
        if x >= self.s[n - 1] {
            return match self.tail {
                Some((c, p)) => c * x.powf(p),
                None => 0.0,
            };
        }
        let k = match self.s.partition_point(|&v| v <= x) {
            0 => 0,
            i => i - 1,
        };
        let h = self.s[k + 1] - self.s[k];
        let t = (x - self.s[k]) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        (h00 * self.omega[k]
            + h10 * h * self.slope[k]
            + h01 * self.omega[k + 1]
            + h11 * h * self.slope[k + 1])
            .max(0.0)
    }

    /// Exact integral of s omega(s)^2 over the cubic interpolant
    /// (4-point Gauss-Legendre per segment: degree-7 integrand).
    fn segment_j(&self, a: f64, b: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(4);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| {
                let s = mid + half * x;
                let om = self.omega(s);
                w * half * s * om * om
            })
            .sum()
    }

    fn cumulative_j(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.s.len()];
        // contribution below the first node: omega constant there
        let w0 = self.omega[0];
        let mut acc = 0.5 * self.s[0] * self.s[0] * w0 * w0;
        out[0] = acc;
        for k in 0..self.s.len() - 1 {
            acc += self.segment_j(self.s[k], self.s[k + 1]);
            out[k + 1] = acc;
        }
        out
    }

    fn j(&self, r: f64) -> f64 {
        let n = self.s.len();
        if r <= self.s[0] {
            let w0 = self.omega[0];
            return 0.5 * r * r * w0 * w0;
        }
        if r >= self.s[n - 1] {
            return self.j_nodes[n - 1] + self.tail_j(self.s[n - 1], r);
        }
        let k = match self.s.partition_point(|&v| v <= r) {
            0 => 0,
            i => i - 1,
        };
        self.j_nodes[k] + self.segment_j(self.s[k], r)
    }

    /// Integral of s omega^2 over [a, b] in the power-law tail.
    fn tail_j(&self, a: f64, b: f64) -> f64 {
        match self.tail {
            None => 0.0,
            Some((c, p)) => {
                let q = 2.0 * p + 2.0;
                if q.abs() < 1e-12 {
                    c * c * (b / a).ln()
                } else {
                    c * c * (b.powf(q) - a.powf(q)) / q
                }
            }
        }
    }

    fn sup_j(&self) -> f64 {
        let n = self.s.len();
        match self.tail {
            None => self.j_nodes[n - 1],
            Some((_, p)) if p < -1.0 => {
                // finite tail integral
                let a = self.s[n - 1];
                let q = 2.0 * p + 2.0;
                let (c, _) = self.tail.unwrap();
                self.j_nodes[n - 1] - c * c * a.powf(q) / q
            }
            Some(_) => f64::INFINITY,
        }
    }

    /// Least-squares power law over the last decade of the table.
    fn fit_tail(&self) -> Option<(f64, f64)> {
        let n = self.s.len();
        if self.omega[n - 1] <= 0.0 {
            return None; // table ends at zero: compactly supported
        }
        let s_hi = self.s[n - 1];
        let s_lo = s_hi / 10.0;
        let pts: Vec<(f64, f64)> = self
            .s
            .iter()
            .zip(&self.omega)
            .filter(|(&s, &w)| s >= s_lo && s > 0.0 && w > 0.0)
            .map(|(&s, &w)| (s.ln(), w.ln()))
            .collect();
        if pts.len() < 2 {
            return Some((self.omega[n - 1], 0.0));
        }
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = m * sxx - sx * sx;
        if denom.abs() < 1e-30 {
            return Some((self.omega[n - 1], 0.0));
        }
        let p = (m * sxy - sx * sy) / denom;
        let lnc = (sy - p * sx) / m;
        Some((lnc.exp(), p))
    }

    fn check_admissible(&self) -> Admissibility {
        let mut reasons = Vec::new();
        let (integrable, tail_vanishes, compact) = match self.tail {
            None => (true, true, true),
            Some((_, p)) => (p < -1.0, p < -1.5, false),
        };
        if compact {
            reasons.push("omega^2(s) is compactly supported".into());
        }
        if !integrable {
            reasons.push("s omega^2(s) is not integrable".into());
        }
        if integrable && !tail_vanishes {
            reasons.push("r (sup j - j(r)) does not vanish at infinity".into());
        }
        let not_compactly_supported = !compact;
        let admissible = integrable && not_compactly_supported && tail_vanishes;
        Admissibility {
            integrable,
            not_compactly_supported,
            tail_vanishes,
            admissible,
            extrapolated: true,
            reasons,
        }
    }
}

/// Fritsch-Carlson tangents for a monotone cubic interpolant.
fn monotone_tangents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n - 1];
    for k in 0..n - 1 {
        d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    }
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for k in 1..n - 1 {
        m[k] = if d[k - 1] * d[k] <= 0.0 {
            0.0
        } else {
            0.5 * (d[k - 1] + d[k])
        };
    }
    for k in 0..n - 1 {
        if d[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let alpha = m[k] / d[k];
        let beta = m[k + 1] / d[k];
        let s2 = alpha * alpha + beta * beta;
        if s2 > 9.0 {
            let tau = 3.0 / s2.sqrt();
            m[k] = tau * alpha * d[k];
            m[k + 1] = tau * beta * d[k];
        }
    }
    m
}
