//! Randomized self-checks: physical invariants of the evolution and the
//! cross-engine identities that tie the solvers together.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{build_rate_model, mfpt_closed_form, mfpt_via_inverse, mfpt_via_recurrence, mfpt_via_wtd};
use crate::engine::{self, Engine};
use crate::error::Result;
use crate::liouville::{build_liouvillian, diagonalize, DensityMatrix};
use crate::model::{build_hamiltonian, initial_state, NetworkKind, NetworkSpec, C64};
use crate::observables::{default_time_grid, Survival};
use crate::reduced::{build_reduced_generator, reduced_survival};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub violations: Vec<String>,
    /// Largest deviation seen, in the units of the suite's tolerance.
    pub worst: f64,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, checks: 0, violations: Vec::new(), worst: 0.0 }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, value: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if value.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = self.worst.max(value);
        }
        if value.is_nan() || value > tol {
            self.violations.push(format!("{}: {value:.3e} > {tol:.1e}", what()));
        }
    }

    fn fail(&mut self, what: String) {
        self.checks += 1;
        self.violations.push(what);
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<14} {} checks={} violations={} worst={:.3e}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks,
            self.violations.len(),
            self.worst
        )
    }
}

pub const INVARIANT_TOL: f64 = 1e-10;
pub const ISOMORPHISM_TOL: f64 = 1e-7;
pub const REDUCED_TOL: f64 = 1e-8;
pub const MFPT_REL_TOL: f64 = 1e-7;

/// A network with `N in 3..=6`, `L in 2..=5`, `Delta in [0, 3]`,
/// `Gamma in [0.05, 1]` (units of `J`).
pub fn random_spec(rng: &mut impl Rng, kind: NetworkKind) -> NetworkSpec {
    NetworkSpec::new(kind, rng.gen_range(3..=6), rng.gen_range(2..=5))
        .with_defect(rng.gen_range(0.0..3.0))
        .with_trap_rate(rng.gen_range(0.05..1.0))
}

fn grid(spec: &NetworkSpec, points: usize) -> Vec<f64> {
    default_time_grid(spec, points)
}

/// Trace and `P_A` monotonicity, Hermiticity and positivity of `rho(t)`,
/// `Re Lambda <= 0` and closure of the spectrum under conjugation.
pub fn invariant_suite(seed: u64, draws: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("invariants");
    for d in 0..draws {
        let kind = if rng.gen_bool(0.5) { NetworkKind::ExtendedStar } else { NetworkKind::AsymmetricChain };
        let mut spec = random_spec(&mut rng, kind);
        spec.branches = rng.gen_range(3..=4);
        spec.length = rng.gen_range(1..=3);
        let gamma = if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..1.0) };
        let tag = |what: &str| format!("draw {d} {kind} N={} L={} gamma={gamma:.3}: {what}", spec.branches, spec.length);

        let liouv = build_liouvillian(&build_hamiltonian(&spec)?, gamma)?;
        let prop = match diagonalize(&liouv) {
            Ok(p) => p,
            Err(e) => {
                rep.fail(tag(&format!("diagonalization failed: {e}")));
                continue;
            }
        };
        let lambdas = prop.eigenvalues();
        rep.check(prop.max_growth_rate(), INVARIANT_TOL, || tag("Re Lambda"));
        let pair_gap = lambdas
            .iter()
            .map(|l| lambdas.iter().map(|m| (m - l.conj()).norm() / l.norm().max(1.0)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        rep.check(pair_gap, 1e-8, || tag("conjugate pairing"));

        let rho0 = initial_state(&spec)?;
        let n = rho0.dim();
        let c = prop.coefficients(&rho0.to_vector());
        let times = grid(&spec, 200);
        let mut last_trace = f64::INFINITY;
        for &t in &times {
            let v = prop.apply_coefficients(t, &c);
            let m = Array2::from_shape_fn((n, n), |(x, y)| v[x * n + y]);
            let herm = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .map(|(x, y)| (m[[x, y]] - m[[y, x]].conj()).norm())
                .fold(0.0, f64::max);
            rep.check(herm, INVARIANT_TOL, || tag(&format!("Hermiticity at t={t:.3}")));
            let trace: C64 = m.diag().sum();
            rep.check(trace.im.abs(), INVARIANT_TOL, || tag("imaginary trace"));
            rep.check(trace.re - last_trace, INVARIANT_TOL, || tag(&format!("trace increase at t={t:.3}")));
            last_trace = trace.re;
            let rho = DensityMatrix::from_vector(&v, spec);
            let min_eig = rho.min_eigenvalue()?;
            rep.check(-min_eig, INVARIANT_TOL, || tag(&format!("negative eigenvalue at t={t:.3}")));
        }
        let series = engine::simulate(&spec, gamma, Engine::FullFls, &times)?;
        rep.check(series.max_decrease(), INVARIANT_TOL, || tag("P_A decrease"));
    }
    Ok(rep)
}

fn max_gap(a: &dyn Survival, b: &dyn Survival, times: &[f64]) -> f64 {
    a.survival_many(times)
        .iter()
        .zip(b.survival_many(times))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Star and chain built from the same draw have identical `P_A(t)` without
/// dephasing.
pub fn isomorphism_suite(seed: u64, draws: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("isomorphism");
    for d in 0..draws {
        let star = random_spec(&mut rng, NetworkKind::ExtendedStar);
        let chain = NetworkSpec { kind: NetworkKind::AsymmetricChain, ..star };
        let times = grid(&star, 400);
        let a = engine::survival(&star, 0.0, Engine::FullFls)?;
        let b = engine::survival(&chain, 0.0, Engine::FullFls)?;
        let gap = max_gap(a.as_ref(), b.as_ref(), &times);
        rep.check(gap, ISOMORPHISM_TOL, || format!("draw {d} N={} L={}", star.branches, star.length));
    }
    Ok(rep)
}

/// Reduced star equations against the full Liouvillian on the same draws as
/// [`isomorphism_suite`], at `gamma in {0, 0.05, 0.5}`.
pub fn reduced_suite(seed: u64, draws: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("reduced");
    for d in 0..draws {
        let spec = random_spec(&mut rng, NetworkKind::ExtendedStar);
        let times = grid(&spec, 400);
        for gamma in [0.0, 0.05 * spec.hopping, 0.5 * spec.hopping] {
            let full = engine::survival(&spec, gamma, Engine::FullFls)?;
            let red = reduced_survival(&build_reduced_generator(&spec, gamma)?)?;
            let gap = max_gap(full.as_ref(), red.as_ref(), &times);
            rep.check(gap, REDUCED_TOL, || {
                format!("draw {d} N={} L={} gamma={gamma}", spec.branches, spec.length)
            });
        }
    }
    Ok(rep)
}

/// Closed form, inverse rate matrix and waiting-time recursion give the same
/// mean first-passage time. `gamma in [0.5, 50]`, `L in 2..=10`, `N in 3..=8`.
pub fn classical_suite(seed: u64, draws: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("classical");
    for d in 0..draws {
        let kind = if rng.gen_bool(0.5) { NetworkKind::ExtendedStar } else { NetworkKind::AsymmetricChain };
        let spec = NetworkSpec::new(kind, rng.gen_range(3..=8), rng.gen_range(2..=10))
            .with_defect(rng.gen_range(0.0..3.0))
            .with_trap_rate(rng.gen_range(0.05..1.0));
        let gamma = 10f64.powf(rng.gen_range(0.5f64.log10()..50f64.log10()));
        let model = build_rate_model(&spec, gamma)?;
        let closed = mfpt_closed_form(&spec, gamma)?;
        let inverse = mfpt_via_inverse(&model)?;
        let recurrence = mfpt_via_recurrence(&model)?;
        let wtd = mfpt_via_wtd(&model)?;
        let rel = |x: f64| (x - closed).abs() / closed;
        let tag = || format!("draw {d} {kind} N={} L={} gamma={gamma:.3}", spec.branches, spec.length);
        rep.check(rel(inverse), MFPT_REL_TOL, || format!("{} inverse", tag()));
        rep.check(rel(recurrence), MFPT_REL_TOL, || format!("{} recurrence", tag()));
        rep.check(rel(wtd.exact), MFPT_REL_TOL, || format!("{} wtd", tag()));
        rep.check(rel(wtd.finite_difference), 1e-5, || format!("{} wtd finite difference", tag()));
    }
    Ok(rep)
}

/// Everything above with the draw counts used by the command-line tool.
pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        invariant_suite(seed, 12)?,
        isomorphism_suite(seed, 20)?,
        reduced_suite(seed, 20)?,
        classical_suite(seed, 50)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_bookkeeping() {
        let mut r = SuiteReport::new("x");
        r.check(1e-12, 1e-10, || "a".into());
        assert!(r.passed());
        r.check(f64::NAN, 1e-10, || "nan".into());
        assert!(!r.passed());
        assert!(r.worst.is_nan());
        assert!(r.to_string().contains("FAIL"));
    }

    #[test]
    fn small_runs_pass() {
        assert!(classical_suite(1, 5).unwrap().passed());
        let inv = invariant_suite(2, 2).unwrap();
        assert!(inv.passed(), "{:?}", inv.violations);
    }

    #[test]
    fn draws_depend_only_on_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(random_spec(&mut a, NetworkKind::ExtendedStar), random_spec(&mut b, NetworkKind::ExtendedStar));
    }
}
