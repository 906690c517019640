//! Adaptive Dormand–Prince 5(4) integrator.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 5_000_000;

/// Integrates the autonomous system `y' = f(y)` from `y0` over `[0, t_end]`
/// (or `[t_end, 0]`). The local error per step is kept below `tol·max|y|`,
/// so small trajectories near an equilibrium are resolved to the same
/// relative accuracy as large ones.
pub fn dopri45(f: impl Fn(&[f64], &mut [f64]), y0: &[f64], t_end: f64, tol: f64) -> Result<Vec<f64>> {
    let n = y0.len();
    let mut y = y0.to_vec();
    if t_end == 0.0 {
        return Ok(y);
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let g = |y: &[f64], dy: &mut [f64]| {
        f(y, dy);
        if dir < 0.0 {
            dy.iter_mut().for_each(|d| *d = -*d);
        }
    };

    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    g(&y, &mut k[0]);
    let mut t = 0.0;
    let mut h = (span * 1e-3).min(0.01 * tol.powf(0.2)).max(span * 1e-12);
    for _ in 0..MAX_STEPS {
        if t >= span {
            return Ok(y);
        }
        let last = t + h >= span;
        if last {
            h = span - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            g(&tmp, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        let mut ymax: f64 = 0.0;
        for i in 0..n {
            let mut s5 = y[i];
            let mut e = 0.0;
            for j in 0..7 {
                s5 += h * B5[j] * k[j][i];
                e += h * (B5[j] - B4[j]) * k[j][i];
            }
            y5[i] = s5;
            err = err.max(e.abs());
            ymax = ymax.max(s5.abs()).max(y[i].abs());
        }
        let sc = tol * ymax.max(f64::MIN_POSITIVE);
        let ratio = err / sc;
        if ratio <= 1.0 {
            t = if last { span } else { t + h };
            y.copy_from_slice(&y5);
            // first-same-as-last: the stage at c = 1 is f(y_{n+1})
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
        }
        let fac = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < span * 1e-15 {
            return Err(Error::Convergence(format!("ODE step size underflow at t = {}", dir * t)));
        }
    }
    Err(Error::Convergence(format!("ODE exceeded {MAX_STEPS} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        let y = dopri45(|y, d| d[0] = y[0], &[1.0], 2.0, 1e-12).unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-10);
        let y = dopri45(|y, d| d[0] = y[0], &[1.0], -2.0, 1e-12).unwrap();
        assert!((y[0] - (-2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator() {
        let y = dopri45(
            |y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            &[1.0, 0.0],
            std::f64::consts::TAU,
            1e-13,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }
}
