//! Scalar equation-of-state algebra: the relativistically degenerate
//! white-dwarf pressure law and pure polytropes, in code units with
//! all physical constants set to 1.
//!
//! For the white dwarf, with x = s^{1/3}:
//!   p(s)  = integral of sigma^4 / sqrt(1 + sigma^2) over [0, x]
//!   p'(s) = s^{2/3} / (3 sqrt(1 + s^{2/3}))
//!   h(s)  = sqrt(1 + s^{2/3}) - 1
//!   h^{-1}(t) = (2t + t^2)^{3/2}
//!   (h^{-1})'(t) = 3 (1 + t) sqrt(2t + t^2)
//!   H(s)  = integral of h over [0, s]
//!
//! For a polytrope p = s^gamma (gamma > 1):
//!   h(s) = gamma/(gamma-1) s^{gamma-1},  H(s) = s^gamma/(gamma-1).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquationOfState {
    WhiteDwarf,
    Polytrope { gamma: f64 },
}

impl EquationOfState {
    pub fn white_dwarf() -> Self {
        EquationOfState::WhiteDwarf
    }

    pub fn polytrope(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "polytrope exponent must be > 1, got {gamma}"
            )));
        }
        Ok(EquationOfState::Polytrope { gamma })
    }

    fn check_nonneg(v: f64, what: &str) -> Result<()> {
        if v < 0.0 || v.is_nan() {
            return Err(Error::Domain(format!("{what} must be >= 0, got {v}")));
        }
        Ok(())
    }

    /// Pressure p(s).
    pub fn pressure(&self, s: f64) -> Result<f64> {
        Self::check_nonneg(s, "density")?;
        Ok(match *self {
            EquationOfState::WhiteDwarf => wd_pressure(s),
            EquationOfState::Polytrope { gamma } => s.powf(gamma),
        })
    }

    /// dp/ds.
    pub fn pressure_prime(&self, s: f64) -> Result<f64> {
        Self::check_nonneg(s, "density")?;
        Ok(match *self {
            EquationOfState::WhiteDwarf => {
                let x2 = s.powf(2.0 / 3.0);
                x2 / (3.0 * (1.0 + x2).sqrt())
            }
            EquationOfState::Polytrope { gamma } => {
                if s == 0.0 {
                    0.0
                } else {
                    gamma * s.powf(gamma - 1.0)
                }
            }
        })
    }

    /// Specific enthalpy h(s), the primitive of p'(s)/s with h(0) = 0.
    pub fn enthalpy(&self, s: f64) -> Result<f64> {
        Self::check_nonneg(s, "density")?;
        Ok(match *self {
            EquationOfState::WhiteDwarf => {
                // sqrt(1+x^2) - 1 written without cancellation
                let x2 = s.powf(2.0 / 3.0);
                x2 / ((1.0 + x2).sqrt() + 1.0)
            }
            EquationOfState::Polytrope { gamma } => {
                if s == 0.0 {
                    0.0
                } else {
                    gamma / (gamma - 1.0) * s.powf(gamma - 1.0)
                }
            }
        })
    }

    /// Inverse enthalpy s = h^{-1}(t).
    pub fn enthalpy_inv(&self, t: f64) -> Result<f64> {
        Self::check_nonneg(t, "enthalpy")?;
        Ok(self.enthalpy_inv_raw(t))
    }

    /// d(h^{-1})/dt.
    pub fn enthalpy_inv_prime(&self, t: f64) -> Result<f64> {
        Self::check_nonneg(t, "enthalpy")?;
        Ok(self.enthalpy_inv_prime_raw(t))
    }

    /// Pressure potential H(s), the primitive of h with H(0) = 0.
    pub fn pressure_potential(&self, s: f64) -> Result<f64> {
        Self::check_nonneg(s, "density")?;
        Ok(match *self {
            EquationOfState::WhiteDwarf => wd_pressure_potential(s),
            EquationOfState::Polytrope { gamma } => s.powf(gamma) / (gamma - 1.0),
        })
    }

    /// h^{-1} on the clamped positive part; infallible, for solver loops.
    #[inline]
    pub fn enthalpy_inv_pos(&self, t: f64) -> f64 {
        self.enthalpy_inv_raw(t.max(0.0))
    }

    #[inline]
    fn enthalpy_inv_raw(&self, t: f64) -> f64 {
        match *self {
            EquationOfState::WhiteDwarf => (t * (2.0 + t)).powf(1.5),
            EquationOfState::Polytrope { gamma } => {
                ((gamma - 1.0) / gamma * t).powf(1.0 / (gamma - 1.0))
            }
        }
    }

    #[inline]
    pub(crate) fn enthalpy_inv_prime_raw(&self, t: f64) -> f64 {
        match *self {
            EquationOfState::WhiteDwarf => 3.0 * (1.0 + t) * (t * (2.0 + t)).sqrt(),
            EquationOfState::Polytrope { gamma } => {
                let m = 1.0 / (gamma - 1.0);
                if t == 0.0 {
                    if m > 1.0 {
                        0.0
                    } else if m == 1.0 {
                        (gamma - 1.0) / gamma
                    } else {
                        f64::INFINITY
                    }
                } else {
                    m * ((gamma - 1.0) / gamma).powf(m) * t.powf(m - 1.0)
                }
            }
        }
    }
}

/// Closed form of the white-dwarf pressure with a series branch for
/// small x = s^{1/3}, where the closed form loses digits to cancellation.
fn wd_pressure(s: f64) -> f64 {
    let x = s.cbrt();
    if x < 0.2 {
        // p = sum_k (-1)^k binom(2k,k)/4^k x^{5+2k}/(5+2k)
        let x2 = x * x;
        let x5 = x2 * x2 * x;
        x5 * (1.0 / 5.0
            + x2 * (-1.0 / 14.0
                + x2 * (1.0 / 24.0
                    + x2 * (-5.0 / 176.0
                        + x2 * (35.0 / 1664.0
                            + x2 * (-63.0 / 3840.0
                                + x2 * (231.0 / 17408.0 + x2 * (-429.0 / 38912.0))))))))
    } else {
        let q = (1.0 + x * x).sqrt();
        x.powi(3) * q / 4.0 - 3.0 / 8.0 * x * q + 3.0 / 8.0 * x.asinh()
    }
}

/// Closed form of H(s) = (3/8)[x(1+2x^2) sqrt(1+x^2) - asinh x] - s
/// with a small-x series branch.
fn wd_pressure_potential(s: f64) -> f64 {
    let x = s.cbrt();
    if x < 0.2 {
        // H = 3 * integral of x^2 (sqrt(1+x^2)-1) dx
        let x2 = x * x;
        let x5 = x2 * x2 * x;
        x5 * (3.0 / 10.0
            + x2 * (-3.0 / 56.0
                + x2 * (1.0 / 48.0
                    + x2 * (-15.0 / 1408.0
                        + x2 * (21.0 / 3328.0
                            + x2 * (-63.0 / 15360.0 + x2 * (99.0 / 34816.0)))))))
    } else {
        let q = (1.0 + x * x).sqrt();
        3.0 / 8.0 * (x * (1.0 + 2.0 * x * x) * q - x.asinh()) - s
    }
}
