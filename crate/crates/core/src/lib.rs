//! Exciton absorption on extended stars and asymmetric chains with a single
//! trapping site and Haken–Strobl–Reineker pure dephasing.
//!
//! The density matrix obeys
//! `d rho/dt = -i (H rho - rho H^dagger) - gamma (1 - delta_xy) rho_xy`
//! with an effective non-Hermitian `H` whose trap carries `-i Gamma / 2`.
//! Three solvers are available through [`Engine`]: the full Liouville space,
//! a reduced set of `1 + 2L + 2L^2` equations for stars, and the rate
//! equations of the strong-dephasing limit.
//!
//! ```no_run
//! use exciton_trap::{absorption_time_for, Engine, NetworkSpec};
//!
//! let spec = NetworkSpec::star(5, 5).with_defect(2.0);
//! let tau = absorption_time_for(&spec, 0.1, Engine::Auto).unwrap().tau;
//! println!("tau = {tau:.2}");
//! ```

pub mod classical;
pub mod config;
pub mod engine;
pub mod error;
pub mod liouville;
pub mod model;
pub mod observables;
pub mod ode;
pub mod reduced;
pub mod scan;
pub mod spectral;
pub mod validate;

pub use classical::{build_rate_model, classical_rates, ClassicalRates, RateModel};
pub use engine::{absorption_time_for, simulate, survival, Engine};
pub use error::{Error, Result};
pub use liouville::{build_liouvillian, DensityMatrix, Liouvillian};
pub use model::{build_hamiltonian, initial_state, Hamiltonian, NetworkKind, NetworkSpec, SiteIndex, C64};
pub use observables::{
    absorption_time, critical_length, speedup, AbsorptionResult, ObservableSeries, Provenance, Survival,
};
pub use reduced::{build_reduced_generator, ReducedGenerator, ReducedState};
pub use scan::{ResultRow, SweepJob};
pub use spectral::{ModalCurve, Propagator};
