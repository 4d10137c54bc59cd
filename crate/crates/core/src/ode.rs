//! Adaptive Dormand–Prince 5(4) integrator for complex linear systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-13,
            rtol: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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

// Error weights: fifth-order minus embedded fourth-order coefficients.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
    out.copy_from_slice(y);
    for &(w, k) in terms {
        if w == 0.0 {
            continue;
        }
        let s = h * w;
        for (o, kv) in out.iter_mut().zip(k) {
            *o += s * kv;
        }
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (either direction).
/// `f` writes the derivative into its last argument.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y0: &[C64], tol: Tolerance) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 || n == 0 {
        return Ok(y);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut h = dir * (span.abs() * 1e-3).min(1e-2);

    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);

    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        if steps >= tol.max_steps {
            return Err(Error::InvalidArgument(format!(
                "integrator exceeded {} steps",
                tol.max_steps
            )));
        }
        steps += 1;
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }

        let (k0, rest) = k.split_at_mut(1);
        let (k1, rest) = rest.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, rest) = rest.split_at_mut(1);
        let (k4, rest) = rest.split_at_mut(1);
        let (k5, k6) = rest.split_at_mut(1);
        let (k0, k1, k2, k3, k4, k5, k6) = (
            &mut k0[0], &mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0], &mut k5[0], &mut k6[0],
        );

        combine(&y, h, &[(A21, k0)], &mut tmp);
        f(t + C2 * h, &tmp, k1);
        combine(&y, h, &[(A31, k0), (A32, k1)], &mut tmp);
        f(t + C3 * h, &tmp, k2);
        combine(&y, h, &[(A41, k0), (A42, k1), (A43, k2)], &mut tmp);
        f(t + C4 * h, &tmp, k3);
        combine(&y, h, &[(A51, k0), (A52, k1), (A53, k2), (A54, k3)], &mut tmp);
        f(t + C5 * h, &tmp, k4);
        combine(
            &y,
            h,
            &[(A61, k0), (A62, k1), (A63, k2), (A64, k3), (A65, k4)],
            &mut tmp,
        );
        f(t + h, &tmp, k5);
        combine(
            &y,
            h,
            &[(A71, k0), (A73, k2), (A74, k3), (A75, k4), (A76, k5)],
            &mut y_new,
        );
        f(t + h, &y_new, k6);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h * (E1 * k0[i] + E3 * k2[i] + E4 * k3[i] + E5 * k4[i] + E6 * k5[i] + E7 * k6[i]);
            let scale = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(k0, k6);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}
