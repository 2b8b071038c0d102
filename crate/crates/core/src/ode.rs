//! Adaptive Dormand–Prince 5(4) stepping of `dv/dt = A v`, used when the
//! generator is too close to defective for the spectral sum.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::model::C64;
use crate::observables::Survival;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-9, atol: 1e-12, max_steps: 5_000_000 }
    }
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates from `t = 0` and returns the state at each requested time.
/// `times` must be ascending and non-negative.
pub fn integrate_linear(
    generator: &Array2<C64>,
    v0: &Array1<C64>,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<Array1<C64>>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Integration("times must be ascending and non-negative".into()));
    }
    let scale = generator.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-12);
    let mut h = 0.01 / scale;
    let mut t = 0.0;
    let mut v = v0.clone();
    let mut k1 = generator.dot(&v);
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            if steps >= tol.max_steps {
                return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            let (next, k7, err) = dp_step(generator, &v, &k1, step, tol);
            steps += 1;
            if err <= 1.0 {
                t = if last { target } else { t + step };
                v = next;
                k1 = k7;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = step * factor;
            }
            if h < 1e-14 * target.max(1.0) {
                return Err(Error::Integration(format!("step size underflow at t = {t}")));
            }
        }
        out.push(v.clone());
    }
    Ok(out)
}

fn dp_step(
    a: &Array2<C64>,
    v: &Array1<C64>,
    k1: &Array1<C64>,
    h: f64,
    tol: Tolerances,
) -> (Array1<C64>, Array1<C64>, f64) {
    let k2 = a.dot(&(v + &(k1 * (h * A21))));
    let k3 = a.dot(&(v + &(k1 * (h * A31) + &k2 * (h * A32))));
    let k4 = a.dot(&(v + &(k1 * (h * A41) + &k2 * (h * A42) + &k3 * (h * A43))));
    let k5 = a.dot(&(v + &(k1 * (h * A51) + &k2 * (h * A52) + &k3 * (h * A53) + &k4 * (h * A54))));
    let k6 = a.dot(
        &(v + &(k1 * (h * A61) + &k2 * (h * A62) + &k3 * (h * A63) + &k4 * (h * A64) + &k5 * (h * A65))),
    );
    let next = v + &(k1 * (h * B1) + &k3 * (h * B3) + &k4 * (h * B4) + &k5 * (h * B5) + &k6 * (h * B6));
    let k7 = a.dot(&next);
    let err_vec = k1 * (h * E1) + &k3 * (h * E3) + &k4 * (h * E4) + &k5 * (h * E5) + &k6 * (h * E6) + &k7 * (h * E7);
    let mut acc = 0.0;
    for ((e, y0), y1) in err_vec.iter().zip(v.iter()).zip(next.iter()) {
        let sc = tol.atol + tol.rtol * y0.norm().max(y1.norm());
        acc += (e.norm() / sc).powi(2);
    }
    let err = (acc / v.len() as f64).sqrt();
    (next, k7, err)
}

/// A survival curve evaluated by direct integration from `t = 0`.
#[derive(Clone, Debug)]
pub struct SteppedCurve {
    pub generator: Array2<C64>,
    pub initial: Array1<C64>,
    pub functional: Array1<C64>,
    pub tol: Tolerances,
}

impl SteppedCurve {
    pub fn values(&self, times: &[f64]) -> Result<Vec<f64>> {
        Ok(integrate_linear(&self.generator, &self.initial, times, self.tol)?
            .iter()
            .map(|v| self.functional.dot(v).re)
            .collect())
    }
}

impl Survival for SteppedCurve {
    fn survival(&self, t: f64) -> f64 {
        self.values(&[t]).map(|v| v[0]).unwrap_or(f64::NAN)
    }

    fn survival_many(&self, times: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
        let mut out = vec![f64::NAN; times.len()];
        if let Ok(vals) = self.values(&sorted) {
            for (slot, v) in order.into_iter().zip(vals) {
                out[slot] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_decay_and_rotation() {
        let a = array![[c(-0.3, 2.0)]];
        let out = integrate_linear(&a, &array![c(1.0, 0.0)], &[0.0, 1.0, 7.5], Tolerances::default()).unwrap();
        for (t, v) in [0.0, 1.0, 7.5].iter().zip(&out) {
            let exact = (c(-0.3, 2.0) * *t).exp();
            assert!((v[0] - exact).norm() < 1e-8, "t={t}: {} vs {exact}", v[0]);
        }
    }

    #[test]
    fn jordan_block() {
        // exp([[l,1],[0,l]] t) e2 = (t e^{lt}, e^{lt})
        let a = array![[c(-0.5, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]];
        let out = integrate_linear(&a, &array![c(0.0, 0.0), c(1.0, 0.0)], &[4.0], Tolerances::default()).unwrap();
        let e = (-2.0f64).exp();
        assert!((out[0][0].re - 4.0 * e).abs() < 1e-8);
        assert!((out[0][1].re - e).abs() < 1e-8);
    }

    #[test]
    fn rejects_unsorted_times() {
        let a = array![[c(-1.0, 0.0)]];
        assert!(integrate_linear(&a, &array![c(1.0, 0.0)], &[2.0, 1.0], Tolerances::default()).is_err());
    }
}
