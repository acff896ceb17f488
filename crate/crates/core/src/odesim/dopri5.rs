//! Dormand-Prince 5(4) stepper with dense output and a PI step controller,
//! following the classic DOPRI5 implementation of Hairer and Wanner.

use crate::model::OdeSystem;

use super::SimError;

// Butcher tableau.
const A21: f64 = 0.2;
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

// Embedded error coefficients (5th minus 4th order solution).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step controller constants.
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

const MAX_STEPS: u64 = 100_000_000;

pub(super) struct Dopri5<'a> {
    odes: &'a OdeSystem,
    rtol: f64,
    atol: f64,
    hmax: f64,
    pub t: f64,
    pub y: Vec<f64>,
    k1: Vec<f64>,
    h: f64,
    facold: f64,
    rejected: bool,
    steps_taken: u64,
    // Step span covered by the dense-output coefficients below.
    span_start: f64,
    span_h: f64,
    rcont: [Vec<f64>; 5],
    scratch: Scratch,
}

struct Scratch {
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k5: Vec<f64>,
    k6: Vec<f64>,
    k7: Vec<f64>,
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl<'a> Dopri5<'a> {
    /// Sets up the stepper at `t = 0` and chooses the initial step size from
    /// the local derivative magnitudes. `hmax` caps the step and the span of
    /// the integration (the driver additionally clamps onto target times).
    pub fn new(
        odes: &'a OdeSystem,
        y0: Vec<f64>,
        rtol: f64,
        atol: f64,
        hmax: f64,
    ) -> Result<Self, SimError> {
        let n = odes.dim();
        let mut k1 = vec![0.0; n];
        odes.eval(&y0, &mut k1);
        if !k1.iter().all(|v| v.is_finite()) {
            return Err(SimError::NonFinite { t: 0.0 });
        }
        let mut stepper = Dopri5 {
            odes,
            rtol,
            atol,
            hmax,
            t: 0.0,
            y: y0,
            k1,
            h: 0.0,
            facold: 1e-4,
            rejected: false,
            steps_taken: 0,
            span_start: 0.0,
            span_h: 0.0,
            rcont: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            scratch: Scratch {
                k2: vec![0.0; n],
                k3: vec![0.0; n],
                k4: vec![0.0; n],
                k5: vec![0.0; n],
                k6: vec![0.0; n],
                k7: vec![0.0; n],
                ytmp: vec![0.0; n],
                ynew: vec![0.0; n],
            },
        };
        stepper.h = stepper.initial_step();
        Ok(stepper)
    }

    /// Hairer's `hinit`: a cheap estimate of the largest step consistent
    /// with the tolerances, from f(y0) and one Euler probe.
    fn initial_step(&mut self) -> f64 {
        let n = self.y.len();
        if n == 0 {
            return self.hmax;
        }
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..n {
            let sk = self.atol + self.rtol * self.y[i].abs();
            dnf += (self.k1[i] / sk) * (self.k1[i] / sk);
            dny += (self.y[i] / sk) * (self.y[i] / sk);
        }
        let mut h0 = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h0 = h0.min(self.hmax);
        for i in 0..n {
            self.scratch.ytmp[i] = self.y[i] + h0 * self.k1[i];
        }
        self.odes.eval(&self.scratch.ytmp, &mut self.scratch.k2);
        let mut der2 = 0.0;
        for i in 0..n {
            let sk = self.atol + self.rtol * self.y[i].abs();
            let d = (self.scratch.k2[i] - self.k1[i]) / sk;
            der2 += d * d;
        }
        let der2 = der2.sqrt() / h0;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.hmax)
    }

    /// Advances by one accepted step, retrying with smaller steps on error
    /// test failures. `t_stop` truncates the step so integration lands on it
    /// exactly. Returns the time reached.
    pub fn step(&mut self, t_stop: f64) -> Result<f64, SimError> {
        let n = self.y.len();
        loop {
            self.steps_taken += 1;
            if self.steps_taken > MAX_STEPS {
                return Err(SimError::StepLimitExceeded { t: self.t });
            }
            let tiny = 10.0 * f64::EPSILON * self.t.abs().max(1.0);
            if self.h < tiny {
                return Err(SimError::StepSizeUnderflow { t: self.t });
            }
            let mut h = self.h.min(self.hmax);
            let mut last = false;
            if self.t + h >= t_stop {
                h = t_stop - self.t;
                last = true;
            }

            let s = &mut self.scratch;
            for i in 0..n {
                s.ytmp[i] = self.y[i] + h * A21 * self.k1[i];
            }
            self.odes.eval(&s.ytmp, &mut s.k2);
            for i in 0..n {
                s.ytmp[i] = self.y[i] + h * (A31 * self.k1[i] + A32 * s.k2[i]);
            }
            self.odes.eval(&s.ytmp, &mut s.k3);
            for i in 0..n {
                s.ytmp[i] = self.y[i] + h * (A41 * self.k1[i] + A42 * s.k2[i] + A43 * s.k3[i]);
            }
            self.odes.eval(&s.ytmp, &mut s.k4);
            for i in 0..n {
                s.ytmp[i] = self.y[i]
                    + h * (A51 * self.k1[i] + A52 * s.k2[i] + A53 * s.k3[i] + A54 * s.k4[i]);
            }
            self.odes.eval(&s.ytmp, &mut s.k5);
            for i in 0..n {
                s.ytmp[i] = self.y[i]
                    + h * (A61 * self.k1[i]
                        + A62 * s.k2[i]
                        + A63 * s.k3[i]
                        + A64 * s.k4[i]
                        + A65 * s.k5[i]);
            }
            self.odes.eval(&s.ytmp, &mut s.k6);
            for i in 0..n {
                s.ynew[i] = self.y[i]
                    + h * (A71 * self.k1[i]
                        + A73 * s.k3[i]
                        + A74 * s.k4[i]
                        + A75 * s.k5[i]
                        + A76 * s.k6[i]);
            }
            self.odes.eval(&s.ynew, &mut s.k7);

            let mut err = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * self.k1[i]
                        + E3 * s.k3[i]
                        + E4 * s.k4[i]
                        + E5 * s.k5[i]
                        + E6 * s.k6[i]
                        + E7 * s.k7[i]);
                let sc = self.atol + self.rtol * self.y[i].abs().max(s.ynew[i].abs());
                let q = e / sc;
                err += q * q;
            }
            let err = if n == 0 { 0.0 } else { (err / n as f64).sqrt() };
            if !err.is_finite() {
                return Err(SimError::NonFinite { t: self.t });
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                // Accepted: build dense-output coefficients for this span.
                self.facold = err.max(1e-4);
                for i in 0..n {
                    let ydiff = s.ynew[i] - self.y[i];
                    let bspl = h * self.k1[i] - ydiff;
                    self.rcont[0][i] = self.y[i];
                    self.rcont[1][i] = ydiff;
                    self.rcont[2][i] = bspl;
                    self.rcont[3][i] = ydiff - h * s.k7[i] - bspl;
                    self.rcont[4][i] = h
                        * (D1 * self.k1[i]
                            + D3 * s.k3[i]
                            + D4 * s.k4[i]
                            + D5 * s.k5[i]
                            + D6 * s.k6[i]
                            + D7 * s.k7[i]);
                }
                self.span_start = self.t;
                self.span_h = h;
                let t_new = if last { t_stop } else { self.t + h };
                if !s.ynew.iter().all(|v| v.is_finite()) {
                    return Err(SimError::NonFinite { t: t_new });
                }
                self.t = t_new;
                std::mem::swap(&mut self.y, &mut s.ynew);
                // FSAL: reuse the last stage unless clamping moves the state.
                std::mem::swap(&mut self.k1, &mut s.k7);
                let mut clamped = false;
                for v in self.y.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                        clamped = true;
                    }
                }
                if clamped {
                    self.odes.eval(&self.y, &mut self.k1);
                }

                let fac =
                    (fac11 / self.facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut hnew = h / fac;
                if self.rejected {
                    hnew = hnew.min(h);
                }
                self.rejected = false;
                self.h = hnew.min(self.hmax);
                return Ok(self.t);
            }

            self.rejected = true;
            self.h = h / (fac11 / SAFE).min(1.0 / FAC_MIN);
        }
    }

    /// Interpolates the solution at time `t` within the last accepted step.
    pub fn dense(&self, t: f64, out: &mut [f64]) {
        if self.span_h == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let theta = ((t - self.span_start) / self.span_h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
    }
}
