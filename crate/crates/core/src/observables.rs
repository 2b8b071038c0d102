//! Absorption probability, absorption time and the speedup measures built on
//! them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{self, Engine};
use crate::error::{Error, Result};
use crate::liouville::DensityMatrix;
use crate::model::NetworkSpec;

/// Population remaining in the network, `Tr rho(t)` or its reduced/classical
/// analogue.
pub trait Survival: Send + Sync {
    fn survival(&self, t: f64) -> f64;

    fn survival_many(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.survival(t)).collect()
    }

    fn p_absorbed(&self, t: f64) -> f64 {
        clamp_probability(1.0 - self.survival(t))
    }
}

const CLAMP_SLACK: f64 = 1e-10;

/// Snaps values within `1e-10` outside `[0, 1]` back onto the interval and
/// leaves larger excursions visible.
pub fn clamp_probability(p: f64) -> f64 {
    if (-CLAMP_SLACK..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + CLAMP_SLACK {
        1.0
    } else {
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    FullFls,
    Reduced,
    Classical,
}

#[derive(Clone, Debug)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub p_absorbed: Vec<f64>,
    pub spec: NetworkSpec,
    pub dephasing: f64,
    pub provenance: Provenance,
}

impl ObservableSeries {
    pub fn from_survival(
        spec: NetworkSpec,
        dephasing: f64,
        provenance: Provenance,
        times: &[f64],
        survival: &[f64],
    ) -> Result<Self> {
        if times.len() != survival.len() {
            return Err(Error::InvalidSpec("time grid and values differ in length".into()));
        }
        if survival.iter().any(|s| !s.is_finite()) {
            return Err(Error::Integration("non-finite survival value".into()));
        }
        Ok(ObservableSeries {
            times: times.to_vec(),
            p_absorbed: survival.iter().map(|s| clamp_probability(1.0 - s)).collect(),
            spec,
            dephasing,
            provenance,
        })
    }

    /// Largest decrease between consecutive samples (zero for a monotone
    /// series).
    pub fn max_decrease(&self) -> f64 {
        self.p_absorbed.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max)
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.max_decrease() <= tol
    }

    /// CSV with columns `time, p_absorbed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "p_absorbed"])?;
        for (t, p) in self.times.iter().zip(&self.p_absorbed) {
            w.write_record([t.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `P_A(t_i) = 1 - Tr rho(t_i)` for an evolved trajectory.
pub fn absorption_probability(states: &[DensityMatrix], times: &[f64], dephasing: f64) -> Result<ObservableSeries> {
    let spec = states
        .first()
        .map(|s| s.spec)
        .ok_or_else(|| Error::InvalidSpec("empty trajectory".into()))?;
    let survival: Vec<f64> = states.iter().map(DensityMatrix::trace).collect();
    ObservableSeries::from_survival(spec, dephasing, Provenance::FullFls, times, &survival)
}

/// `2000` uniform points over `[0, 10 N_S / Gamma]` (or `[0, 100 N_S / J]`
/// without a trap).
pub fn default_time_grid(spec: &NetworkSpec, points: usize) -> Vec<f64> {
    let ns = spec.total_sites() as f64;
    let tmax = if spec.trap_rate > 0.0 { 10.0 * ns / spec.trap_rate } else { 100.0 * ns / spec.hopping };
    uniform_grid(tmax, points)
}

pub fn uniform_grid(tmax: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| tmax * i as f64 / (points - 1) as f64).collect(),
    }
}

pub const DEFAULT_POINTS: usize = 2000;

/// Latest time searched for `P_A = 1/2`: `100 N_S / Gamma`.
pub fn absorption_horizon(spec: &NetworkSpec) -> f64 {
    if spec.trap_rate > 0.0 {
        100.0 * spec.total_sites() as f64 / spec.trap_rate
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauMethod {
    Bracketed,
    MinimizedCost,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionResult {
    pub tau: f64,
    pub converged: bool,
    pub method: TauMethod,
    /// `P_A(tau) - 1/2`.
    pub residual: f64,
}

pub const TAU_TOLERANCE: f64 = 1e-8;
const RESIDUAL_TOLERANCE: f64 = 1e-6;

fn bracket(curve: &dyn Survival, horizon: f64) -> Result<(f64, f64)> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::HorizonExceeded { horizon });
    }
    let mut lo = 0.0;
    let mut hi = (horizon / 1024.0).min(1.0);
    loop {
        if curve.p_absorbed(hi) >= 0.5 {
            return Ok((lo, hi));
        }
        if hi >= horizon {
            return Err(Error::HorizonExceeded { horizon });
        }
        lo = hi;
        hi = (hi * 2.0).min(horizon);
    }
}

/// Time at which half of the population has been absorbed, found by
/// bisection on the monotone `P_A(t)` down to `1e-8 / J`.
pub fn absorption_time(curve: &dyn Survival, horizon: f64) -> Result<AbsorptionResult> {
    let (mut lo, mut hi) = bracket(curve, horizon)?;
    while hi - lo > TAU_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if curve.p_absorbed(mid) >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let residual = curve.p_absorbed(tau) - 0.5;
    Ok(AbsorptionResult {
        tau,
        converged: residual.abs() <= RESIDUAL_TOLERANCE,
        method: TauMethod::Bracketed,
        residual,
    })
}

/// Minimizes `C(t) = (1/2 - P_A(t))^2` with a one-dimensional Nelder–Mead
/// simplex started from the best point of a coarse scan.
pub fn absorption_time_by_cost(curve: &dyn Survival, horizon: f64) -> Result<AbsorptionResult> {
    let (_, hi) = bracket(curve, horizon)?;
    let cost = |t: f64| {
        let d = 0.5 - curve.p_absorbed(t.max(0.0));
        d * d
    };
    const SCAN: usize = 256;
    let step = hi / SCAN as f64;
    let start = (1..=SCAN)
        .map(|i| i as f64 * step)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap_or(hi);
    let tau = nelder_mead_1d(cost, start, 0.5 * step, 1e-10, 10_000);
    let residual = curve.p_absorbed(tau) - 0.5;
    Ok(AbsorptionResult {
        tau,
        converged: residual.abs() <= RESIDUAL_TOLERANCE,
        method: TauMethod::MinimizedCost,
        residual,
    })
}

fn nelder_mead_1d<F: Fn(f64) -> f64>(f: F, x0: f64, step: f64, xtol: f64, max_iter: usize) -> f64 {
    let (mut best, mut worst) = ((x0, f(x0)), (x0 + step, f(x0 + step)));
    for _ in 0..max_iter {
        if best.1 > worst.1 {
            std::mem::swap(&mut best, &mut worst);
        }
        if (worst.0 - best.0).abs() <= xtol {
            break;
        }
        // in one dimension the centroid of the kept vertices is the best point
        let c = best.0;
        let r = c + (c - worst.0);
        let fr = f(r);
        worst = if fr < best.1 {
            let e = c + 2.0 * (c - worst.0);
            let fe = f(e);
            if fe < fr { (e, fe) } else { (r, fr) }
        } else {
            let (k, limit) = if fr < worst.1 { (c + 0.5 * (r - c), fr) } else { (c + 0.5 * (worst.0 - c), worst.1) };
            let fk = f(k);
            if fk <= limit {
                (k, fk)
            } else {
                // shrink toward the best vertex
                let s = c + 0.5 * (worst.0 - c);
                (s, f(s))
            }
        };
    }
    if best.1 <= worst.1 {
        best.0
    } else {
        worst.0
    }
}

/// `S = 1 - tau(Delta_opt) / tau(Delta = 0)` with `Delta_opt = sqrt(N - 1) J`.
/// With dephasing this is the dephasing-dependent speedup `S(gamma)`.
pub fn speedup(spec: &NetworkSpec, dephasing: f64, engine: Engine) -> Result<f64> {
    let opt = engine::absorption_time_for(&spec.with_defect(spec.optimal_defect()), dephasing, engine)?;
    let zero = engine::absorption_time_for(&spec.with_defect(0.0), dephasing, engine)?;
    Ok(speedup_from_times(opt.tau, zero.tau))
}

pub fn speedup_from_times(tau_opt: f64, tau_zero: f64) -> f64 {
    1.0 - tau_opt / tau_zero
}

pub const CRITICAL_LENGTH_COEFFICIENT: f64 = 12.5;

/// Largest branch length `L* = 12.5 / ln N` for which defect tuning still
/// speeds up absorption.
pub fn critical_length(branches: usize) -> Result<f64> {
    if branches <= 1 {
        return Err(Error::InvalidSpec(format!("critical length needs N >= 2, got {branches}")));
    }
    Ok(CRITICAL_LENGTH_COEFFICIENT / (branches as f64).ln())
}
