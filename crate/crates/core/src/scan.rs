//! Parameter sweeps over defect energy, dephasing and network size, run in
//! parallel with deterministic row order.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{self, absorption_time_estimate};
use crate::engine::{absorption_time_for, Engine};
use crate::error::{Error, Result};
use crate::model::{NetworkKind, NetworkSpec};
use crate::observables::speedup;

/// One point of a sweep. Field names on disk are
/// `kind,N,L,J,delta,gamma,gamma_trap,tau,speedup,engine,converged`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub kind: NetworkKind,
    #[serde(rename = "N")]
    pub branches: usize,
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub delta: f64,
    pub gamma: f64,
    pub gamma_trap: f64,
    /// `NaN` when the point failed.
    pub tau: f64,
    /// Empty unless requested.
    pub speedup: Option<f64>,
    pub engine: Engine,
    pub converged: bool,
}

pub const RESULT_COLUMNS: [&str; 11] =
    ["kind", "N", "L", "J", "delta", "gamma", "gamma_trap", "tau", "speedup", "engine", "converged"];

impl ResultRow {
    fn new(spec: &NetworkSpec, gamma: f64, engine: Engine) -> Self {
        ResultRow {
            kind: spec.kind,
            branches: spec.branches,
            length: spec.length,
            hopping: spec.hopping,
            delta: spec.defect,
            gamma,
            gamma_trap: spec.trap_rate,
            tau: f64::NAN,
            speedup: None,
            engine,
            converged: false,
        }
    }

    pub fn spec(&self) -> NetworkSpec {
        NetworkSpec::new(self.kind, self.branches, self.length)
            .with_hopping(self.hopping)
            .with_defect(self.delta)
            .with_trap_rate(self.gamma_trap)
    }
}

/// Cartesian sweep over `gammas x deltas` (gamma-major) for one network.
#[derive(Clone, Debug)]
pub struct SweepJob {
    pub base: NetworkSpec,
    pub deltas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub engine: Engine,
    pub with_speedup: bool,
}

impl SweepJob {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.gammas.iter().flat_map(|&g| self.deltas.iter().map(move |&d| (g, d))).collect()
    }
}

/// Runs every point; a point that fails is reported with `converged = false`
/// instead of aborting the sweep.
pub fn run_sweep(job: &SweepJob) -> Result<Vec<ResultRow>> {
    job.base.validate()?;
    let engine = job.engine.resolve(&job.base)?;
    let speedups: BTreeMap<u64, Option<f64>> = if job.with_speedup {
        job.gammas
            .par_iter()
            .map(|&g| (g.to_bits(), speedup(&job.base, g, engine).ok()))
            .collect()
    } else {
        BTreeMap::new()
    };
    let rows = job
        .points()
        .into_par_iter()
        .map(|(g, d)| {
            let spec = job.base.with_defect(d);
            let mut row = ResultRow::new(&spec, g, engine);
            if let Ok(r) = absorption_time_for(&spec, g, engine) {
                row.tau = r.tau;
                row.converged = r.converged;
            }
            row.speedup = speedups.get(&g.to_bits()).copied().flatten();
            row
        })
        .collect();
    Ok(rows)
}

/// Speedup `S` over a grid of `(N, L)` at fixed dephasing. Each row carries
/// `delta = sqrt(N - 1) J` and `tau(delta)`.
pub fn heatmap_speedup(
    template: &NetworkSpec,
    branches: &[usize],
    lengths: &[usize],
    gamma: f64,
    engine: Engine,
) -> Result<Vec<ResultRow>> {
    let cells: Vec<NetworkSpec> = branches
        .iter()
        .flat_map(|&n| lengths.iter().map(move |&l| (n, l)))
        .map(|(n, l)| {
            let mut s = *template;
            s.branches = n;
            s.length = l;
            s.with_defect(s.optimal_defect())
        })
        .collect();
    for s in &cells {
        s.validate()?;
    }
    let engine = engine.resolve(template)?;
    Ok(cells
        .into_par_iter()
        .map(|spec| {
            let mut row = ResultRow::new(&spec, gamma, engine);
            let opt = absorption_time_for(&spec, gamma, engine);
            let zero = absorption_time_for(&spec.with_defect(0.0), gamma, engine);
            if let (Ok(o), Ok(z)) = (opt, zero) {
                row.tau = o.tau;
                row.speedup = Some(1.0 - o.tau / z.tau);
                row.converged = o.converged && z.converged;
            }
            row
        })
        .collect())
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != RESULT_COLUMNS {
        return Err(Error::Config(format!("unexpected header {header:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Quantum absorption time next to the three classical estimates, all as
/// `tau` (classical ones are `ln 2` times the mean first-passage time).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRow {
    pub gamma: f64,
    pub tau_quantum: f64,
    /// `NaN` for `L = 1`.
    pub tau_closed_form: f64,
    pub tau_inverse: f64,
    pub tau_wtd: f64,
}

pub fn classical_comparison(spec: &NetworkSpec, gammas: &[f64], engine: Engine) -> Result<Vec<ClassicalRow>> {
    spec.validate()?;
    let engine = engine.resolve(spec)?;
    gammas
        .par_iter()
        .map(|&g| {
            let model = classical::build_rate_model(spec, g)?;
            let quantum = absorption_time_for(spec, g, engine).map(|r| r.tau).unwrap_or(f64::NAN);
            let closed = match classical::mfpt_closed_form(spec, g) {
                Ok(t) => absorption_time_estimate(t),
                Err(Error::InvalidSpec(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            Ok(ClassicalRow {
                gamma: g,
                tau_quantum: quantum,
                tau_closed_form: closed,
                tau_inverse: absorption_time_estimate(classical::mfpt_via_inverse(&model)?),
                tau_wtd: absorption_time_estimate(classical::mfpt_via_wtd(&model)?.exact),
            })
        })
        .collect()
}

pub fn write_classical<W: Write>(rows: &[ClassicalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["gamma", "tau_quantum", "tau_closed_form", "tau_inverse", "tau_wtd"])?;
    }
    w.flush()?;
    Ok(())
}

/// `n` points spaced evenly in `log10` between `lo` and `hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_roundtrip() {
        let job = SweepJob {
            base: NetworkSpec::chain(3, 2),
            deltas: vec![0.0, 1.0],
            gammas: vec![0.0, 0.5],
            engine: Engine::Auto,
            with_speedup: true,
        };
        let rows = run_sweep(&job).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[1].gamma, rows[1].delta), (0.0, 1.0));
        assert_eq!(rows[0].engine, Engine::FullFls);
        assert!(rows.iter().all(|r| r.converged && r.speedup.is_some()));
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,N,L,J,delta,gamma,gamma_trap,tau,speedup,engine,converged\n"));
        assert!(text.lines().nth(1).unwrap().starts_with("chain,3,2,1.0,0.0,0.0,0.1,"));
        assert_eq!(read_rows(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn failures_do_not_abort() {
        let job = SweepJob {
            base: NetworkSpec::chain(3, 2),
            deltas: vec![0.0],
            gammas: vec![0.0, 1.0],
            engine: Engine::Classical,
            with_speedup: false,
        };
        let rows = run_sweep(&job).unwrap();
        assert!(!rows[0].converged && rows[0].tau.is_nan());
        assert!(rows[1].converged);
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",NaN,,classical,false"));
    }

    #[test]
    fn sweep_is_deterministic() {
        let job = SweepJob {
            base: NetworkSpec::star(3, 3),
            deltas: linspace(0.0, 2.0, 5),
            gammas: vec![0.1],
            engine: Engine::Auto,
            with_speedup: false,
        };
        assert_eq!(run_sweep(&job).unwrap(), run_sweep(&job).unwrap());
    }

    #[test]
    fn classical_csv_columns() {
        let rows = classical_comparison(&NetworkSpec::chain(3, 3), &[5.0], Engine::Auto).unwrap();
        let mut buf = Vec::new();
        write_classical(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("gamma,tau_quantum,tau_closed_form,tau_inverse,tau_wtd\n"));
        let r = rows[0];
        assert!((r.tau_closed_form - r.tau_inverse).abs() < 1e-9 * r.tau_inverse);
        assert!((r.tau_wtd - r.tau_inverse).abs() < 1e-8 * r.tau_inverse);
    }

    #[test]
    fn spacing_helpers() {
        let g = logspace(1.0, 10.0, 5);
        assert!((g[0] - 1.0).abs() < 1e-15 && (g[4] - 10.0).abs() < 1e-12);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
