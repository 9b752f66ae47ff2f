//! Zero location on dense output: sign-change bracketing plus bisection,
//! with near-tangency flagging.

use serde::Serialize;

use super::Trajectory;
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroKind {
    /// Bracketed by a sign change of the interpolant.
    Simple,
    /// |x| dipped below the tangency threshold without a sign change.
    Suspect,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Zero {
    pub t: f64,
    pub kind: ZeroKind,
}

/// Ordered list of located zeros.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ZeroList {
    pub zeros: Vec<Zero>,
}

impl ZeroList {
    pub fn simple_zeros(&self) -> Vec<f64> {
        self.zeros
            .iter()
            .filter(|z| z.kind == ZeroKind::Simple)
            .map(|z| z.t)
            .collect()
    }

    pub fn has_suspect(&self) -> bool {
        self.zeros.iter().any(|z| z.kind == ZeroKind::Suspect)
    }

    pub fn first_simple(&self) -> Option<f64> {
        self.zeros
            .iter()
            .find(|z| z.kind == ZeroKind::Simple)
            .map(|z| z.t)
    }

    pub fn last_simple(&self) -> Option<f64> {
        self.zeros
            .iter()
            .rev()
            .find(|z| z.kind == ZeroKind::Simple)
            .map(|z| z.t)
    }
}

const SAMPLES_PER_STEP: usize = 16;
const SUSPECT_FACTOR: f64 = 1e-8;

pub(super) fn find_zeros(traj: &Trajectory, window: Interval, t_tol: f64) -> ZeroList {
    let (span_lo, span_hi) = traj.span();
    let lo = window.lo.max(span_lo);
    let hi = window.hi.min(span_hi);
    if lo >= hi {
        return ZeroList::default();
    }
    let scale = traj.amplitude().max(f64::MIN_POSITIVE);
    let suspect_level = SUSPECT_FACTOR * scale;

    // collect samples over every dense step intersecting [lo, hi]
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for step in &traj.dense().steps {
        let (s0, s1) = if step.h >= 0.0 {
            (step.t0, step.t0 + step.h)
        } else {
            (step.t0 + step.h, step.t0)
        };
        let a = s0.max(lo);
        let b = s1.min(hi);
        if a >= b {
            continue;
        }
        for i in 0..=SAMPLES_PER_STEP {
            let t = a + (b - a) * i as f64 / SAMPLES_PER_STEP as f64;
            samples.push((t, step.eval(t)[0]));
        }
    }
    samples.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());
    samples.dedup_by(|u, v| (u.0 - v.0).abs() <= f64::EPSILON * (1.0 + u.0.abs()));

    let mut zeros: Vec<Zero> = Vec::new();
    let push = |z: Zero, zeros: &mut Vec<Zero>| {
        let radius = 1e-9 * (1.0 + z.t.abs());
        if let Some(last) = zeros.last() {
            if (last.t - z.t).abs() <= radius {
                return;
            }
        }
        zeros.push(z);
    };

    let refine = |mut a: f64, mut fa: f64, mut b: f64| -> f64 {
        // bisection on the dense output; no re-integration
        let target = t_tol.max(f64::EPSILON) * (1.0 + a.abs().max(b.abs()));
        while (b - a).abs() > target {
            let m = 0.5 * (a + b);
            let fm = traj.x(m);
            if fm == 0.0 {
                return m;
            }
            if (fa < 0.0) == (fm < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };

    let mut i = 0;
    while i + 1 < samples.len() {
        let (t0, x0) = samples[i];
        let (t1, x1) = samples[i + 1];
        if x0 == 0.0 {
            push(
                Zero {
                    t: t0,
                    kind: ZeroKind::Simple,
                },
                &mut zeros,
            );
        } else if x0 * x1 < 0.0 {
            let z = refine(t0, x0, t1);
            push(
                Zero {
                    t: z,
                    kind: ZeroKind::Simple,
                },
                &mut zeros,
            );
        } else if x0.abs() <= suspect_level {
            // local minimum of |x| below the tangency threshold
            let prev_larger = i == 0 || samples[i - 1].1.abs() >= x0.abs();
            let next_larger = x1.abs() >= x0.abs();
            if prev_larger && next_larger {
                push(
                    Zero {
                        t: t0,
                        kind: ZeroKind::Suspect,
                    },
                    &mut zeros,
                );
            }
        }
        i += 1;
    }
    if let Some(&(t_last, x_last)) = samples.last() {
        if x_last == 0.0 {
            push(
                Zero {
                    t: t_last,
                    kind: ZeroKind::Simple,
                },
                &mut zeros,
            );
        }
    }

    ZeroList { zeros }
}

/// Zero scan for a plain callable (test functions, residuals): dense uniform
/// sampling plus bisection, counting geometrically distinct zeros once.
pub fn scan_zeros_fn<F>(mut f: F, lo: f64, hi: f64, n_samples: usize, cluster_radius: f64) -> Vec<f64>
where
    F: FnMut(f64) -> f64,
{
    assert!(n_samples >= 2);
    let mut values: Vec<(f64, f64)> = Vec::with_capacity(n_samples + 1);
    for i in 0..=n_samples {
        let t = lo + (hi - lo) * i as f64 / n_samples as f64;
        values.push((t, f(t)));
    }
    let scale = values
        .iter()
        .map(|(_, v)| v.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let touch_level = 1e-9 * scale;

    let mut zeros: Vec<f64> = Vec::new();
    let push = |z: f64, zeros: &mut Vec<f64>| {
        let radius = cluster_radius * (1.0 + z.abs());
        if let Some(&last) = zeros.last() {
            if (z - last).abs() <= radius {
                return;
            }
        }
        zeros.push(z);
    };

    for i in 0..values.len() {
        let (t0, x0) = values[i];
        if x0.abs() <= touch_level {
            push(t0, &mut zeros);
            continue;
        }
        if i + 1 == values.len() {
            break;
        }
        let (t1, x1) = values[i + 1];
        if x0 * x1 < 0.0 {
            let (mut a, mut fa, mut b) = (t0, x0, t1);
            let target = 1e-12 * (1.0 + a.abs().max(b.abs()));
            while (b - a).abs() > target {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    break;
                }
                if (fa < 0.0) == (fm < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            push(0.5 * (a + b), &mut zeros);
        }
    }
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_counts_distinct_zeros() {
        let zs = scan_zeros_fn(|t| (t - 1.0) * (t - 2.0) * (t - 3.0), 0.0, 4.0, 512, 1e-7);
        assert_eq!(zs.len(), 3);
        assert!((zs[0] - 1.0).abs() < 1e-9);
        assert!((zs[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn scan_counts_tangency_once() {
        let zs = scan_zeros_fn(|t: f64| (t - 1.0) * (t - 1.0), 0.0, 2.0, 4096, 1e-6);
        assert_eq!(zs.len(), 1, "{zs:?}");
    }

    #[test]
    fn scan_counts_endpoint_zero() {
        let zs = scan_zeros_fn(|t: f64| t.sin(), 0.0, 3.0, 512, 1e-7);
        assert_eq!(zs.len(), 1);
        assert!(zs[0].abs() < 1e-9);
    }
}
