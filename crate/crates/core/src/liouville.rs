//! Pure-dephasing master equation in Fock–Liouville form.
//!
//! `d rho_xy / dt = -i (H rho - rho H^dagger)_xy - gamma (1 - delta_xy) rho_xy`
//!
//! Density matrices are vectorized row-major: `rho_xy` sits at `x * n + y`.

use std::io::Write;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, NetworkSpec, C64};
use crate::ode::{self, SteppedCurve, Tolerances};
use crate::observables::Survival;
use crate::spectral::{ModalCurve, Propagator};

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: Array2<C64>,
    pub spec: NetworkSpec,
}

impl DensityMatrix {
    pub fn pure(psi: &Array1<C64>, spec: NetworkSpec) -> Self {
        let n = psi.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        DensityMatrix { matrix, spec }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|v| v.re).sum()
    }

    pub fn to_vector(&self) -> Array1<C64> {
        self.matrix.iter().cloned().collect()
    }

    /// Rebuilds `rho` from its row-major vector and re-symmetrizes it to
    /// `(rho + rho^dagger) / 2`.
    pub fn from_vector(v: &Array1<C64>, spec: NetworkSpec) -> Self {
        let n = (v.len() as f64).sqrt().round() as usize;
        assert_eq!(n * n, v.len(), "vector length is not a square");
        let raw = Array2::from_shape_fn((n, n), |(i, j)| v[i * n + j]);
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (raw[[i, j]] + raw[[j, i]].conj()));
        DensityMatrix { matrix, spec }
    }

    /// Largest `|rho_xy - conj(rho_yx)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                err = err.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        err
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = Array2::from_shape_fn(self.matrix.dim(), |(i, j)| {
            0.5 * (self.matrix[[i, j]] + self.matrix[[j, i]].conj())
        });
        let (w, _) = herm.eigh(UPLO::Lower)?;
        Ok(w.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|v| v.re).collect()
    }
}

/// Dense `N_S^2 x N_S^2` generator.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub matrix: Array2<C64>,
    pub dephasing: f64,
    pub spec: NetworkSpec,
}

impl Liouvillian {
    /// Number of sites `N_S`; the generator acts on `N_S^2` entries.
    pub fn sites(&self) -> usize {
        self.spec.total_sites()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Array1<C64> {
        self.matrix.dot(&rho.to_vector())
    }
}

pub fn build_liouvillian(h: &Hamiltonian, dephasing: f64) -> Result<Liouvillian> {
    if !(dephasing.is_finite() && dephasing >= 0.0) {
        return Err(Error::InvalidSpec(format!("dephasing must be non-negative, got {dephasing}")));
    }
    let n = h.dim();
    let hm = &h.matrix;
    let minus_i = C64::new(0.0, -1.0);
    let mut l = Array2::<C64>::zeros((n * n, n * n));
    for x in 0..n {
        for y in 0..n {
            let row = x * n + y;
            for z in 0..n {
                // -i H_xz rho_zy
                if hm[[x, z]] != C64::new(0.0, 0.0) {
                    l[[row, z * n + y]] += minus_i * hm[[x, z]];
                }
                // +i rho_xz (H^dagger)_zy = +i rho_xz conj(H_yz)
                if hm[[y, z]] != C64::new(0.0, 0.0) {
                    l[[row, x * n + z]] -= minus_i * hm[[y, z]].conj();
                }
            }
            if x != y {
                l[[row, row]] -= dephasing;
            }
        }
    }
    Ok(Liouvillian { matrix: l, dephasing, spec: h.spec })
}

pub fn diagonalize(liouvillian: &Liouvillian) -> Result<Propagator> {
    Propagator::from_generator(&liouvillian.matrix)
}

/// `rho(t)` at each requested time from the spectral sum.
pub fn evolve(prop: &Propagator, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    check_times(times)?;
    if prop.dim() != rho0.dim() * rho0.dim() {
        return Err(Error::InvalidSpec("propagator and density matrix dimensions differ".into()));
    }
    let c = prop.coefficients(&rho0.to_vector());
    Ok(times
        .iter()
        .map(|&t| DensityMatrix::from_vector(&prop.apply_coefficients(t, &c), rho0.spec))
        .collect())
}

/// Like [`evolve`] but steps the equation directly when the generator is
/// near-defective.
pub fn evolve_with_fallback(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    match diagonalize(liouvillian) {
        Ok(prop) => evolve(&prop, rho0, times),
        Err(Error::NearDefective { .. }) => evolve_stepped(liouvillian, rho0, times),
        Err(e) => Err(e),
    }
}

/// Adaptive Dormand–Prince integration of the vectorized equation.
pub fn evolve_stepped(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    check_times(times)?;
    let states = ode::integrate_linear(&liouvillian.matrix, &rho0.to_vector(), times, Tolerances::default())?;
    Ok(states.iter().map(|v| DensityMatrix::from_vector(v, rho0.spec)).collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidSpec("times must be finite, non-negative and ascending".into()));
    }
    Ok(())
}

/// Row-major vector selecting the diagonal, so that `<trace|rho>> = Tr rho`.
pub fn trace_functional(sites: usize) -> Array1<C64> {
    let mut f = Array1::<C64>::zeros(sites * sites);
    for x in 0..sites {
        f[x * sites + x] = C64::new(1.0, 0.0);
    }
    f
}

/// Surviving population `Tr rho(t)` as a function of time, spectral when the
/// generator allows it and stepped otherwise.
pub fn survival_curve(liouvillian: &Liouvillian, rho0: &DensityMatrix) -> Result<Box<dyn Survival>> {
    let functional = trace_functional(liouvillian.sites());
    let v0 = rho0.to_vector();
    match diagonalize(liouvillian) {
        Ok(prop) => Ok(Box::new(prop.project(&v0, &functional)) as Box<dyn Survival>),
        Err(Error::NearDefective { .. }) => Ok(Box::new(SteppedCurve {
            generator: liouvillian.matrix.clone(),
            initial: v0,
            functional,
            tol: Tolerances::default(),
        })),
        Err(e) => Err(e),
    }
}

pub fn modal_survival(prop: &Propagator, rho0: &DensityMatrix) -> ModalCurve {
    prop.project(&rho0.to_vector(), &trace_functional(rho0.dim()))
}

/// Writes the spectrum as CSV with columns `k, re_lambda, im_lambda`.
pub fn write_spectrum<W: Write>(prop: &Propagator, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "re_lambda", "im_lambda"])?;
    for (k, l) in prop.eigenvalues().iter().enumerate() {
        w.write_record([k.to_string(), l.re.to_string(), l.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
