//! Embedded Dormand–Prince 5(4) pair with a continuous fourth-order
//! interpolant and PI step-size control. Generic over the state dimension so
//! the same core serves the scalar equation (as a 2-vector) and the small
//! auxiliary systems used by the criteria kernels.

use super::OdeError;
use crate::ode::Tolerances;

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

// b_5th - b_4th
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub const DEFAULT_MAX_STEPS: usize = 5_000_000;

/// One accepted step with its interpolant in the nested Horner basis
/// `u(th) = r0 + th*(r1 + th1*(r2 + th*(r3 + th1*r4)))`, `th1 = 1 - th`.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            let [r0, r1, r2, r3, r4] = [
                self.rcont[0][i],
                self.rcont[1][i],
                self.rcont[2][i],
                self.rcont[3][i],
                self.rcont[4][i],
            ];
            *o = r0 + th * (r1 + th1 * (r2 + th * (r3 + th1 * r4)));
        }
        out
    }

    /// Time derivative of the interpolant.
    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            let [_, r1, r2, r3, r4] = [
                self.rcont[0][i],
                self.rcont[1][i],
                self.rcont[2][i],
                self.rcont[3][i],
                self.rcont[4][i],
            ];
            let d = r1 + (1.0 - 2.0 * th) * r2 + th * (2.0 - 3.0 * th) * r3
                + 2.0 * th * th1 * (th1 - th) * r4;
            *o = d / self.h;
        }
        out
    }

    /// Build a cubic Hermite segment in the same basis from endpoint values
    /// and derivatives (used for solutions assembled by quadrature).
    pub fn hermite(t0: f64, t1: f64, y0: [f64; N], y1: [f64; N], d0: [f64; N], d1: [f64; N]) -> Self {
        let h = t1 - t0;
        let mut rcont = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y1[i] - y0[i];
            rcont[0][i] = y0[i];
            rcont[1][i] = dy;
            rcont[2][i] = h * d0[i] - dy;
            rcont[3][i] = 2.0 * dy - h * (d0[i] + d1[i]);
            rcont[4][i] = 0.0;
        }
        DenseStep { t0, h, rcont }
    }
}

/// Dense-output solution over one integration span; steps are contiguous in
/// integration order (forward or backward).
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
    pub t_start: f64,
    pub t_end: f64,
    pub y_start: [f64; N],
    pub y_end: [f64; N],
    pub tol: Tolerances,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl<const N: usize> DenseSolution<N> {
    pub fn span(&self) -> (f64, f64) {
        if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        }
    }

    fn locate(&self, t: f64) -> &DenseStep<N> {
        let (lo, hi) = self.span();
        let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        assert!(
            t >= lo - slack && t <= hi + slack,
            "dense output queried at t = {t} outside span [{lo}, {hi}]"
        );
        let forward = self.t_start <= self.t_end;
        // binary search on step start times in integration order
        let idx = self
            .steps
            .partition_point(|s| if forward { s.t0 + s.h < t } else { s.t0 + s.h > t });
        let idx = idx.min(self.steps.len() - 1);
        &self.steps[idx]
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        self.locate(t).eval(t)
    }

    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        self.locate(t).eval_derivative(t)
    }

    /// Node states (step boundaries) in integration order, including both
    /// endpoints.
    pub fn nodes(&self) -> Vec<(f64, [f64; N])> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push((self.t_start, self.y_start));
        for s in &self.steps {
            out.push((s.t0 + s.h, s.eval(s.t0 + s.h)));
        }
        if let Some(last) = out.last_mut() {
            last.0 = self.t_end;
            last.1 = self.y_end;
        }
        out
    }
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    direction: f64,
    tol: &Tolerances,
    h_max: f64,
) -> Result<f64, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
{
    let sc = |y: &[f64; N], i: usize| tol.abs + tol.rel * y[i].abs();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        dnf += (f0[i] / sc(y0, i)).powi(2);
        dny += (y0[i] / sc(y0, i)).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    h = h.min(h_max) * direction;
    // one explicit Euler probe to estimate the second derivative scale
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h * f0[i];
    }
    let f1 = rhs(t0 + h, &y1)?;
    let mut der2 = 0.0;
    for i in 0..N {
        der2 += ((f1[i] - f0[i]) / sc(y0, i)).powi(2);
    }
    let der2 = der2.sqrt() / h.abs();
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h.abs() * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h.abs()).min(h1).min(h_max) * direction)
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` (either direction) with
/// dense output on every accepted step.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
    max_steps: usize,
) -> Result<DenseSolution<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
{
    assert!(t0 != t1, "empty integration span");
    assert!(tol.rel > 0.0 && tol.abs > 0.0, "tolerances must be positive");
    let direction = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    let mut h = initial_step(&mut rhs, t0, &y, &k1, direction, &tol, span)?;
    let mut facold: f64 = 1e-4;
    let mut steps: Vec<DenseStep<N>> = Vec::new();
    let mut n_accepted = 0usize;
    let mut n_rejected = 0usize;

    let mut k2;
    let mut k3;
    let mut k4;
    let mut k5;
    let mut k6;
    let mut k7;

    loop {
        if n_accepted + n_rejected > max_steps {
            return Err(OdeError::MaxStepsExceeded { t });
        }
        if h.abs() < 16.0 * f64::EPSILON * (1.0 + t.abs()) {
            return Err(OdeError::StepSizeUnderflow { t });
        }
        let mut last = false;
        if (t + h - t1) * direction >= 0.0 {
            h = t1 - t;
            last = true;
        }

        let stage = |y: &[f64; N], coeffs: &[(f64, &[f64; N])], h: f64| {
            let mut out = *y;
            for i in 0..N {
                let mut acc = 0.0;
                for (a, k) in coeffs {
                    acc += a * k[i];
                }
                out[i] += h * acc;
            }
            out
        };

        let ys = stage(&y, &[(A21, &k1)], h);
        k2 = rhs(t + C2 * h, &ys)?;
        let ys = stage(&y, &[(A31, &k1), (A32, &k2)], h);
        k3 = rhs(t + C3 * h, &ys)?;
        let ys = stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h);
        k4 = rhs(t + C4 * h, &ys)?;
        let ys = stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h);
        k5 = rhs(t + C5 * h, &ys)?;
        let ys = stage(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h,
        );
        k6 = rhs(t + h, &ys)?;
        let y_next = stage(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            h,
        );
        k7 = rhs(t + h, &y_next)?;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.abs + tol.rel * y[i].abs().max(y_next[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // accept: build the dense-output coefficients
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_next[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            steps.push(DenseStep { t0: t, h, rcont });
            n_accepted += 1;
            t += h;
            y = y_next;
            k1 = k7; // FSAL
            if last {
                return Ok(DenseSolution {
                    steps,
                    t_start: t0,
                    t_end: t1,
                    y_start: y0,
                    y_end: y,
                    tol,
                    n_accepted,
                    n_rejected,
                });
            }
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = err.max(1e-4);
            h /= fac;
        } else {
            n_rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
}

/// Classical fourth-order Runge–Kutta with a fixed step count and
/// Kahan-compensated state accumulation. No dense output; used where the
/// endpoint state must be resolved near the round-off floor (period maps).
pub fn endpoint_fixed_rk4<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    n_steps: usize,
) -> Result<[f64; N], OdeError>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
{
    assert!(n_steps > 0);
    let h = (t1 - t0) / n_steps as f64;
    let mut y = y0;
    let mut comp = [0.0; N]; // Kahan carry
    for step in 0..n_steps {
        let t = t0 + step as f64 * h;
        let k1 = rhs(t, &y)?;
        let mut ys = y;
        for i in 0..N {
            ys[i] = y[i] + 0.5 * h * k1[i];
        }
        let k2 = rhs(t + 0.5 * h, &ys)?;
        for i in 0..N {
            ys[i] = y[i] + 0.5 * h * k2[i];
        }
        let k3 = rhs(t + 0.5 * h, &ys)?;
        for i in 0..N {
            ys[i] = y[i] + h * k3[i];
        }
        let k4 = rhs(t + h, &ys)?;
        for i in 0..N {
            let incr = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            let adj = incr - comp[i];
            let sum = y[i] + adj;
            comp[i] = (sum - y[i]) - adj;
            y[i] = sum;
        }
    }
    Ok(y)
}
