//! Choice of solver: full Liouville space, the reduced star equations, or
//! the classical rate equations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical;
use crate::error::{Error, Result};
use crate::liouville::{build_liouvillian, survival_curve};
use crate::model::{build_hamiltonian, initial_state, NetworkKind, NetworkSpec};
use crate::observables::{absorption_horizon, absorption_time, AbsorptionResult, ObservableSeries, Provenance, Survival};
use crate::reduced::{build_reduced_generator, reduced_survival};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    /// Full `N_S^2` Liouville space.
    #[serde(rename = "full")]
    FullFls,
    /// `1 + 2L + 2L^2` symmetric-subspace equations; stars only.
    #[serde(rename = "reduced")]
    Reduced,
    /// Rate equations of the strong-dephasing limit.
    #[serde(rename = "classical")]
    Classical,
    /// Reduced for stars, full for chains.
    #[serde(rename = "auto")]
    Auto,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::FullFls => "full",
            Engine::Reduced => "reduced",
            Engine::Classical => "classical",
            Engine::Auto => "auto",
        }
    }

    /// Resolves `Auto` and rejects `Reduced` on a chain.
    pub fn resolve(self, spec: &NetworkSpec) -> Result<Engine> {
        match (self, spec.kind) {
            (Engine::Auto, NetworkKind::ExtendedStar) => Ok(Engine::Reduced),
            (Engine::Auto, NetworkKind::AsymmetricChain) => Ok(Engine::FullFls),
            (Engine::Reduced, NetworkKind::AsymmetricChain) => {
                Err(Error::WrongKind { expected: NetworkKind::ExtendedStar.as_str(), found: spec.kind.as_str() })
            }
            (e, _) => Ok(e),
        }
    }

    pub fn provenance(self) -> Provenance {
        match self {
            Engine::Reduced => Provenance::Reduced,
            Engine::Classical => Provenance::Classical,
            _ => Provenance::FullFls,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "fls" | "full-fls" => Ok(Engine::FullFls),
            "reduced" => Ok(Engine::Reduced),
            "classical" => Ok(Engine::Classical),
            "auto" => Ok(Engine::Auto),
            other => Err(Error::Config(format!("unknown engine '{other}'"))),
        }
    }
}

/// Surviving population `1 - P_A(t)` for the tip-localized start.
pub fn survival(spec: &NetworkSpec, dephasing: f64, engine: Engine) -> Result<Box<dyn Survival>> {
    spec.validate()?;
    if !(dephasing.is_finite() && dephasing >= 0.0) {
        return Err(Error::InvalidSpec(format!("dephasing must be finite and non-negative, got {dephasing}")));
    }
    match engine.resolve(spec)? {
        Engine::FullFls => {
            let h = build_hamiltonian(spec)?;
            let l = build_liouvillian(&h, dephasing)?;
            survival_curve(&l, &initial_state(spec)?)
        }
        Engine::Reduced => reduced_survival(&build_reduced_generator(spec, dephasing)?),
        Engine::Classical => {
            Ok(Box::new(classical::build_rate_model(spec, dephasing)?.survival_curve()?) as Box<dyn Survival>)
        }
        Engine::Auto => unreachable!("resolved above"),
    }
}

pub fn simulate(spec: &NetworkSpec, dephasing: f64, engine: Engine, times: &[f64]) -> Result<ObservableSeries> {
    let resolved = engine.resolve(spec)?;
    let curve = survival(spec, dephasing, resolved)?;
    ObservableSeries::from_survival(*spec, dephasing, resolved.provenance(), times, &curve.survival_many(times))
}

/// `tau` with `P_A(tau) = 1/2`, searched up to `100 N_S / Gamma`.
pub fn absorption_time_for(spec: &NetworkSpec, dephasing: f64, engine: Engine) -> Result<AbsorptionResult> {
    let curve = survival(spec, dephasing, engine)?;
    absorption_time(curve.as_ref(), absorption_horizon(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for e in [Engine::FullFls, Engine::Reduced, Engine::Classical, Engine::Auto] {
            assert_eq!(e.as_str().parse::<Engine>().unwrap(), e);
        }
        assert!("spectral".parse::<Engine>().is_err());
    }

    #[test]
    fn resolution() {
        let star = NetworkSpec::star(3, 2);
        let chain = NetworkSpec::chain(3, 2);
        assert_eq!(Engine::Auto.resolve(&star).unwrap(), Engine::Reduced);
        assert_eq!(Engine::Auto.resolve(&chain).unwrap(), Engine::FullFls);
        assert!(matches!(Engine::Reduced.resolve(&chain), Err(Error::WrongKind { .. })));
        assert_eq!(Engine::Classical.resolve(&chain).unwrap(), Engine::Classical);
    }

    #[test]
    fn classical_needs_dephasing() {
        let spec = NetworkSpec::chain(3, 3);
        assert!(matches!(survival(&spec, 0.0, Engine::Classical), Err(Error::ClassicalLimitUndefined(_))));
    }

    #[test]
    fn engines_agree_on_star() {
        let spec = NetworkSpec::star(3, 3).with_defect(0.7);
        let full = absorption_time_for(&spec, 0.2, Engine::FullFls).unwrap();
        let red = absorption_time_for(&spec, 0.2, Engine::Reduced).unwrap();
        assert!((full.tau - red.tau).abs() < 1e-6 * full.tau, "{} vs {}", full.tau, red.tau);
    }
}
