//! Adaptive Dormand-Prince 5(4) integration of small fixed-size systems.
//!
//! Steps are clamped so requested output times are hit exactly; no dense
//! output is used.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError<E> {
    #[error("step size underflow at t = {t} (h = {h})")]
    Underflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    Budget(usize),
    #[error(transparent)]
    Rhs(E),
}

/// Accepted step times and states.
pub type StepPath<const N: usize> = (Vec<f64>, Vec<[f64; N]>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    /// Initial trial step.
    pub h0: f64,
    /// Mixed absolute/relative local error target.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { h0: 1e-2, tol: 1e-12, max_steps: 5_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    /// Integrate `y' = f(t, y)` from `(t0, y0)` and record the state at each
    /// time in `outputs`, which must be monotone in the direction of
    /// integration. The first output may equal `t0`.
    pub fn solve_at<const N: usize, F, Er>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
    ) -> Result<Vec<[f64; N]>, StepError<Er>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Er>,
    {
        let mut out = Vec::with_capacity(outputs.len());
        let Some(&t_last) = outputs.last() else {
            return Ok(out);
        };
        let dir = if t_last >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y).map_err(StepError::Rhs)?;
        let mut h = self.h0.abs().max(1e-14) * dir;
        let mut steps = 0usize;

        for &target in outputs {
            while (target - t) * dir > 0.0 {
                let remaining = target - t;
                let clamp = (h - remaining) * dir >= 0.0;
                let h_used = if clamp { remaining } else { h };
                steps += 1;
                if steps > self.max_steps {
                    return Err(StepError::Budget(self.max_steps));
                }
                let (y_new, k7, err) = self.step(&mut f, t, &y, &k1, h_used)?;
                let accepted = err <= 1.0;
                if accepted {
                    t = if clamp { target } else { t + h_used };
                    y = y_new;
                    k1 = k7;
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let h_next = h_used * if accepted { fac } else { fac.min(1.0) };
                // a clamped remainder may legitimately be tiny; only
                // rejections signal underflow
                if !accepted && h_next.abs() < 1e-15 * t.abs().max(1.0) {
                    return Err(StepError::Underflow { t, h: h_next });
                }
                // an accepted clamped step says nothing about the natural step
                if !(clamp && accepted) {
                    h = h_next;
                } else if fac < 1.0 {
                    h *= fac;
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    /// Integrate to `t_end`, recording every accepted step (including the
    /// initial point).
    pub fn solve_steps<const N: usize, F, Er>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
    ) -> Result<StepPath<N>, StepError<Er>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Er>,
    {
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut ts = vec![t0];
        let mut ys = vec![y0];
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y).map_err(StepError::Rhs)?;
        let mut h = self.h0.abs().max(1e-14) * dir;
        let mut steps = 0usize;
        while (t_end - t) * dir > 0.0 {
            let remaining = t_end - t;
            let mut clamp = false;
            if (h - remaining) * dir >= 0.0 {
                h = remaining;
                clamp = true;
            }
            steps += 1;
            if steps > self.max_steps {
                return Err(StepError::Budget(self.max_steps));
            }
            let (y_new, k7, err) = self.step(&mut f, t, &y, &k1, h)?;
            if err <= 1.0 {
                t = if clamp { t_end } else { t + h };
                y = y_new;
                k1 = k7;
                ts.push(t);
                ys.push(y);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if err <= 1.0 { fac } else { fac.min(1.0) };
            if err > 1.0 && h.abs() < 1e-15 * t.abs().max(1.0) {
                return Err(StepError::Underflow { t, h });
            }
        }
        Ok((ts, ys))
    }

    #[allow(clippy::type_complexity)]
    fn step<const N: usize, F, Er>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
    ) -> Result<([f64; N], [f64; N], f64), StepError<Er>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], Er>,
    {
        let mut k = [[0.0; N]; 7];
        k[0] = *k1;
        for s in 1..7 {
            let mut ys = *y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                *yi += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys).map_err(StepError::Rhs)?;
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        let mut y_new = *y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += A[6][j] * k[j][i];
            }
            *yi += h * acc;
        }
        let mut sum = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            let scale = self.tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            let r = h * e / scale;
            sum += r * r;
        }
        let err = (sum / N as f64).sqrt();
        let err = if err.is_finite() { err } else { f64::INFINITY };
        Ok((y_new, k[6], err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_decay() {
        let ig = Dopri5 { tol: 1e-12, ..Default::default() };
        let ys = ig
            .solve_at(|_, y: &[f64; 1]| Ok::<_, Infallible>([-y[0]]), 0.0, [1.0], &[0.0, 1.0, 3.0])
            .unwrap();
        assert_eq!(ys[0][0], 1.0);
        assert!((ys[1][0] - (-1.0f64).exp()).abs() < 1e-11);
        assert!((ys[2][0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn backward_rotation() {
        let ig = Dopri5::default();
        let (ts, ys) = ig
            .solve_steps(
                |_, y: &[f64; 2]| Ok::<_, Infallible>([y[1], -y[0]]),
                0.0,
                [1.0, 0.0],
                -std::f64::consts::PI,
            )
            .unwrap();
        assert_eq!(*ts.last().unwrap(), -std::f64::consts::PI);
        let y = ys.last().unwrap();
        assert!((y[0] + 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn sample_times_hit_by_rounding() {
        // uniform free fall: the natural steps land within rounding of the
        // output times, leaving remainders near 1e-17
        let times: Vec<f64> = (0..=400).map(|i| 10.0 * i as f64 / 400.0).collect();
        let ig = Dopri5 { tol: 1e-12, ..Dopri5::default() };
        let ys = ig.solve_at(|_, y: &[f64; 2]| Ok::<_, ()>([y[1], 1.0]), 0.0, [1.0, 0.3], &times).unwrap();
        let t = 10.0;
        assert!((ys[400][0] - (1.0 + 0.3 * t + 0.5 * t * t)).abs() < 1e-10);
    }

    #[test]
    fn rhs_errors_propagate() {
        let ig = Dopri5::default();
        let r = ig.solve_at(
            |t, y: &[f64; 1]| if t > 0.5 { Err("boom") } else { Ok([y[0]]) },
            0.0,
            [1.0],
            &[1.0],
        );
        assert_eq!(r, Err(StepError::Rhs("boom")));
    }
}
