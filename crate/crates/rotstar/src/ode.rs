//! Adaptive Dormand-Prince 5(4) integrator with dense output and
//! event location. Small fixed-dimension systems only; state vectors
//! are plain `Vec<f64>`.

use crate::error::{Error, Result};

/// Right-hand side of y' = f(r, y).
pub trait Rhs {
    fn eval(&self, r: f64, y: &[f64], dy: &mut [f64]);
}

impl<F: Fn(f64, &[f64], &mut [f64])> Rhs for F {
    fn eval(&self, r: f64, y: &[f64], dy: &mut [f64]) {
        self(r, y, dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_min: 0.0,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted step with its quartic interpolation coefficients.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub r0: f64,
    pub r1: f64,
    cont: [Vec<f64>; 5],
}

impl DenseStep {
    /// Evaluate the interpolant at r in [r0, r1].
    pub fn eval_into(&self, r: f64, out: &mut [f64]) {
        let h = self.r1 - self.r0;
        let theta = if h == 0.0 { 0.0 } else { (r - self.r0) / h };
        let th1 = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + th1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + th1 * self.cont[4][i])));
        }
    }
}

/// Integration result: endpoint state plus the dense-output trail.
#[derive(Debug, Clone)]
pub struct Solution {
    pub dim: usize,
    pub r_end: f64,
    pub y_end: Vec<f64>,
    pub steps: Vec<DenseStep>,
    /// True when the terminal event stopped the integration.
    pub stopped_by_event: bool,
}

impl Solution {
    pub fn r_start(&self) -> f64 {
        self.steps.first().map(|s| s.r0).unwrap_or(self.r_end)
    }

    /// Evaluate the solution anywhere in the covered interval.
    pub fn eval_into(&self, r: f64, out: &mut [f64]) {
        debug_assert!(!self.steps.is_empty());
        if r >= self.r_end {
            out.copy_from_slice(&self.y_end);
            return;
        }
        // binary search for the step containing r
        let idx = match self
            .steps
            .binary_search_by(|s| s.r1.partial_cmp(&r).unwrap())
        {
            Ok(i) => (i + 1).min(self.steps.len() - 1),
            Err(i) => i.min(self.steps.len() - 1),
        };
        self.steps[idx].eval_into(r, out);
    }

    pub fn eval(&self, r: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(r, &mut out);
        out
    }

    /// All zeros of a scalar function of (r, y) along the trail, in order.
    /// Each dense step is scanned on a subgrid, brackets refined by bisection.
    pub fn zeros_of(&self, f: impl Fn(f64, &[f64]) -> f64) -> Vec<f64> {
        let mut zeros = Vec::new();
        let mut buf = vec![0.0; self.dim];
        let subdiv = 8;
        let mut prev_r = self.r_start();
        self.eval_into(prev_r, &mut buf);
        let mut prev_v = f(prev_r, &buf);
        for step in &self.steps {
            for k in 1..=subdiv {
                let r = step.r0 + (step.r1 - step.r0) * k as f64 / subdiv as f64;
                let r = r.min(self.r_end);
                self.eval_into(r, &mut buf);
                let v = f(r, &buf);
                if prev_v == 0.0 {
                    zeros.push(prev_r);
                } else if prev_v * v < 0.0 {
                    zeros.push(self.bisect(&f, prev_r, r, prev_v, &mut buf));
                }
                prev_r = r;
                prev_v = v;
                if r >= self.r_end {
                    break;
                }
            }
        }
        zeros
    }

    fn bisect(
        &self,
        f: &impl Fn(f64, &[f64]) -> f64,
        mut lo: f64,
        mut hi: f64,
        v_lo: f64,
        buf: &mut [f64],
    ) -> f64 {
        let mut sign_lo = v_lo.signum();
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            self.eval_into(mid, buf);
            let v = f(mid, buf);
            if v == 0.0 {
                return mid;
            }
            if v.signum() == sign_lo {
                lo = mid;
                sign_lo = v.signum();
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrate y' = f(r, y) from (r0, y0) to r_max.
///
/// If `terminal` is given, integration stops at the first falling zero
/// (positive to non-positive) of the event function; the final step is
/// truncated at the refined root.
pub fn integrate(
    rhs: &impl Rhs,
    r0: f64,
    y0: &[f64],
    r_max: f64,
    opts: &OdeOptions,
    terminal: Option<&dyn Fn(f64, &[f64]) -> f64>,
) -> Result<Solution> {
    let dim = y0.len();
    let mut r = r0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];

    rhs.eval(r, &y, &mut k1);
    let mut h = opts.h_init.unwrap_or_else(|| {
        let fn_norm = k1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if fn_norm > 1e-300 {
            (y_norm.max(opts.atol) / fn_norm).min(r_max - r0)
        } else {
            r_max - r0
        };
        1e-3 * scale
    });
    h = h.min(r_max - r0).max(f64::MIN_POSITIVE);

    let mut steps = Vec::new();
    let mut event_prev = terminal.map(|ev| ev(r, &y));

    let mut n_steps = 0usize;
    while r < r_max {
        n_steps += 1;
        if n_steps > opts.max_steps {
            return Err(Error::NumericsError(format!(
                "step budget exhausted at r = {r}"
            )));
        }
        if h < opts.h_min || r + h == r {
            return Err(Error::StiffnessFailure { r, h });
        }
        if r + h > r_max {
            h = r_max - r;
        }

        for i in 0..dim {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs.eval(r + C2 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs.eval(r + C3 * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs.eval(r + C4 * h, &ytmp, &mut k4);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs.eval(r + C5 * h, &ytmp, &mut k5);
        for i in 0..dim {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs.eval(r + h, &ytmp, &mut k6);
        for i in 0..dim {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs.eval(r + h, &y1, &mut k7);

        let mut err = 0.0f64;
        for i in 0..dim {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / dim as f64).sqrt();

        if err <= 1.0 {
            // accept: build dense coefficients
            let mut cont = [
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
            ];
            for i in 0..dim {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let step = DenseStep {
                r0: r,
                r1: r + h,
                cont,
            };

            if let (Some(ev), Some(prev)) = (terminal, event_prev) {
                let v1 = ev(r + h, &y1);
                if prev > 0.0 && v1 <= 0.0 {
                    // refine the falling crossing on the dense output
                    let sol_like = step.clone();
                    let mut buf = vec![0.0; dim];
                    let mut lo = r;
                    let mut hi = r + h;
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        sol_like.eval_into(mid, &mut buf);
                        if ev(mid, &buf) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let r_root = 0.5 * (lo + hi);
                    sol_like.eval_into(r_root, &mut buf);
                    let mut trunc = step;
                    trunc.r1 = r_root;
                    steps.push(trunc);
                    return Ok(Solution {
                        dim,
                        r_end: r_root,
                        y_end: buf,
                        steps,
                        stopped_by_event: true,
                    });
                }
                event_prev = Some(v1);
            }

            steps.push(step);
            r += h;
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
        }
    }

    Ok(Solution {
        dim,
        r_end: r,
        y_end: y,
        steps,
        stopped_by_event: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let rhs = |_r: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let sol = integrate(&rhs, 0.0, &[1.0], 5.0, &OdeOptions::default(), None).unwrap();
        assert!((sol.y_end[0] - (-5.0f64).exp()).abs() < 1e-9);
        // dense output mid-interval
        let y = sol.eval(2.345);
        assert!((y[0] - (-2.345f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_event() {
        // y'' = -y, start at y=1, y'=0; first falling zero of y at pi/2.
        let rhs = |_r: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let ev = |_r: f64, y: &[f64]| y[0];
        let sol = integrate(
            &rhs,
            0.0,
            &[1.0, 0.0],
            10.0,
            &OdeOptions::default(),
            Some(&ev),
        )
        .unwrap();
        assert!(sol.stopped_by_event);
        assert!((sol.r_end - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn zeros_of_sine() {
        let rhs = |_r: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let sol = integrate(
            &rhs,
            0.0,
            &[0.0, 1.0],
            10.0,
            &OdeOptions::default(),
            None,
        )
        .unwrap();
        let zeros = sol.zeros_of(|_r, y| y[0]);
        // zeros of sin on (0, 10]: pi, 2pi, 3pi (the r=0 start is recorded too)
        let interior: Vec<f64> = zeros.into_iter().filter(|z| *z > 0.1).collect();
        assert_eq!(interior.len(), 3);
        for (k, z) in interior.iter().enumerate() {
            assert!((z - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-9);
        }
    }
}
