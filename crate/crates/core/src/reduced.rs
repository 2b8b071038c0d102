//! Closed equations for branch-summed quantities of the extended star.
//!
//! With `b` running over branches and positions `s, s'` over `1..=L`:
//!
//! * `P0 = rho_{00,00}` (core population)
//! * `P_ss' = sum_b rho_{bs,bs'}` (intra-branch block)
//! * `C_ss' = sum_{b != b'} rho_{bs,b's'}` (inter-branch coherences)
//! * `K_s = sum_b rho_{bs,00}` and `K*_s = sum_b rho_{00,bs}`
//!
//! These `1 + 2L + 2L^2` variables obey a linear system `dv/dt = G v` whose
//! size does not depend on `N`. The uniform site energy cancels from every
//! equation, so `h` carries only the hoppings and the tip defect.
//!
//! Vector layout: `[P0, P (row-major), C (row-major), K, K*]`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::liouville::DensityMatrix;
use crate::model::{NetworkSpec, SiteIndex, C64};
use crate::observables::{ObservableSeries, Provenance, Survival};
use crate::ode::{SteppedCurve, Tolerances};
use crate::spectral::Propagator;

pub fn reduced_dim(length: usize) -> usize {
    1 + 2 * length + 2 * length * length
}

#[derive(Clone, Copy, Debug)]
struct Layout {
    l: usize,
}

impl Layout {
    fn p0(self) -> usize {
        0
    }
    fn p(self, s: usize, t: usize) -> usize {
        1 + s * self.l + t
    }
    fn c(self, s: usize, t: usize) -> usize {
        1 + self.l * self.l + s * self.l + t
    }
    fn k(self, s: usize) -> usize {
        1 + 2 * self.l * self.l + s
    }
    fn kc(self, s: usize) -> usize {
        1 + 2 * self.l * self.l + self.l + s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    pub core: C64,
    pub intra: Array2<C64>,
    pub inter: Array2<C64>,
    pub core_branch: Array1<C64>,
    pub branch_core: Array1<C64>,
}

impl ReducedState {
    /// Image of the uniform tip superposition: `P_LL = 1`, `C_LL = N - 1`,
    /// everything else zero.
    pub fn initial(spec: &NetworkSpec) -> Result<Self> {
        spec.require_star()?;
        spec.validate()?;
        let l = spec.length;
        let mut state = Self::zeros(l);
        state.intra[[l - 1, l - 1]] = C64::new(1.0, 0.0);
        state.inter[[l - 1, l - 1]] = C64::new(spec.branches as f64 - 1.0, 0.0);
        Ok(state)
    }

    fn zeros(l: usize) -> Self {
        ReducedState {
            core: C64::new(0.0, 0.0),
            intra: Array2::zeros((l, l)),
            inter: Array2::zeros((l, l)),
            core_branch: Array1::zeros(l),
            branch_core: Array1::zeros(l),
        }
    }

    /// Sums a full star density matrix into the reduced variables.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let spec = rho.spec;
        spec.require_star()?;
        let (n, l) = (spec.branches, spec.length);
        let idx = |b: usize, s: usize| {
            SiteIndex::Branch { branch: b + 1, position: s + 1 }.flat(&spec).expect("site in range")
        };
        let m = &rho.matrix;
        let mut state = Self::zeros(l);
        state.core = m[[0, 0]];
        for s in 0..l {
            for b in 0..n {
                state.core_branch[s] += m[[idx(b, s), 0]];
                state.branch_core[s] += m[[0, idx(b, s)]];
            }
            for t in 0..l {
                for b in 0..n {
                    for bp in 0..n {
                        let v = m[[idx(b, s), idx(bp, t)]];
                        if b == bp {
                            state.intra[[s, t]] += v;
                        } else {
                            state.inter[[s, t]] += v;
                        }
                    }
                }
            }
        }
        Ok(state)
    }

    pub fn length(&self) -> usize {
        self.core_branch.len()
    }

    pub fn to_vector(&self) -> Array1<C64> {
        let l = self.length();
        let lay = Layout { l };
        let mut v = Array1::<C64>::zeros(reduced_dim(l));
        v[lay.p0()] = self.core;
        for s in 0..l {
            for t in 0..l {
                v[lay.p(s, t)] = self.intra[[s, t]];
                v[lay.c(s, t)] = self.inter[[s, t]];
            }
            v[lay.k(s)] = self.core_branch[s];
            v[lay.kc(s)] = self.branch_core[s];
        }
        v
    }

    pub fn from_vector(v: &Array1<C64>, length: usize) -> Self {
        assert_eq!(v.len(), reduced_dim(length));
        let lay = Layout { l: length };
        let mut state = Self::zeros(length);
        state.core = v[lay.p0()];
        for s in 0..length {
            for t in 0..length {
                state.intra[[s, t]] = v[lay.p(s, t)];
                state.inter[[s, t]] = v[lay.c(s, t)];
            }
            state.core_branch[s] = v[lay.k(s)];
            state.branch_core[s] = v[lay.kc(s)];
        }
        state
    }

    /// `P0 + sum_s P_ss`, the population still in the network.
    pub fn survival(&self) -> f64 {
        self.core.re + self.intra.diag().iter().map(|v| v.re).sum::<f64>()
    }
}

#[derive(Clone, Debug)]
pub struct ReducedGenerator {
    pub matrix: Array2<C64>,
    /// Intra-branch Hamiltonian: hoppings `J`, defect at `(L, L)`.
    pub branch_hamiltonian: Array2<f64>,
    pub spec: NetworkSpec,
    pub dephasing: f64,
}

impl ReducedGenerator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn branch_hamiltonian(spec: &NetworkSpec) -> Array2<f64> {
    let l = spec.length;
    let mut h = Array2::<f64>::zeros((l, l));
    for s in 0..l.saturating_sub(1) {
        h[[s, s + 1]] = spec.hopping;
        h[[s + 1, s]] = spec.hopping;
    }
    h[[l - 1, l - 1]] = spec.defect;
    h
}

pub fn build_reduced_generator(spec: &NetworkSpec, dephasing: f64) -> Result<ReducedGenerator> {
    spec.require_star()?;
    spec.validate()?;
    if !(dephasing.is_finite() && dephasing >= 0.0) {
        return Err(Error::InvalidSpec(format!("dephasing must be non-negative, got {dephasing}")));
    }
    let l = spec.length;
    let lay = Layout { l };
    let h = branch_hamiltonian(spec);
    let j = spec.hopping;
    let n = spec.branches as f64;
    let trap = spec.trap_rate;
    let i = C64::new(0.0, 1.0);
    let mut g = Array2::<C64>::zeros((reduced_dim(l), reduced_dim(l)));

    // core population
    g[[lay.p0(), lay.p0()]] += -trap;
    g[[lay.p0(), lay.k(0)]] += -i * j;
    g[[lay.p0(), lay.kc(0)]] += i * j;

    // P and C share the commutator with h; they differ in the K coupling
    // weight and in whether the diagonal is dephased.
    for (block, weight) in [(0usize, 1.0), (1usize, n - 1.0)] {
        let at = |s: usize, t: usize| if block == 0 { lay.p(s, t) } else { lay.c(s, t) };
        for s in 0..l {
            for t in 0..l {
                let row = at(s, t);
                for u in 0..l {
                    g[[row, at(u, t)]] += -i * h[[s, u]];
                    g[[row, at(s, u)]] += i * h[[u, t]];
                }
                if t == 0 {
                    g[[row, lay.k(s)]] += i * j * weight;
                }
                if s == 0 {
                    g[[row, lay.kc(t)]] += -i * j * weight;
                }
                if block == 1 || s != t {
                    g[[row, row]] += -dephasing;
                }
            }
        }
    }

    let decay = -(0.5 * trap + dephasing);
    for s in 0..l {
        let (rk, rkc) = (lay.k(s), lay.kc(s));
        g[[rk, rk]] += decay;
        g[[rkc, rkc]] += decay;
        for u in 0..l {
            g[[rk, lay.k(u)]] += -i * h[[s, u]];
            g[[rkc, lay.kc(u)]] += i * h[[s, u]];
        }
        g[[rk, lay.p(s, 0)]] += i * j;
        g[[rk, lay.c(s, 0)]] += i * j;
        g[[rkc, lay.p(0, s)]] += -i * j;
        g[[rkc, lay.c(0, s)]] += -i * j;
        if s == 0 {
            g[[rk, lay.p0()]] += -i * j * n;
            g[[rkc, lay.p0()]] += i * j * n;
        }
    }

    Ok(ReducedGenerator { matrix: g, branch_hamiltonian: h, spec: *spec, dephasing })
}

/// Selects `P0 + sum_s P_ss`.
pub fn survival_functional(length: usize) -> Array1<C64> {
    let lay = Layout { l: length };
    let mut f = Array1::<C64>::zeros(reduced_dim(length));
    f[lay.p0()] = C64::new(1.0, 0.0);
    for s in 0..length {
        f[lay.p(s, s)] = C64::new(1.0, 0.0);
    }
    f
}

/// Survival of the uniform tip state, spectral when possible.
pub fn reduced_survival(generator: &ReducedGenerator) -> Result<Box<dyn Survival>> {
    let v0 = ReducedState::initial(&generator.spec)?.to_vector();
    let functional = survival_functional(generator.spec.length);
    match Propagator::from_generator(&generator.matrix) {
        Ok(prop) => Ok(Box::new(prop.project(&v0, &functional))),
        Err(Error::NearDefective { .. }) => Ok(Box::new(SteppedCurve {
            generator: generator.matrix.clone(),
            initial: v0,
            functional,
            tol: Tolerances::default(),
        })),
        Err(e) => Err(e),
    }
}

/// Reduced states of the uniform tip state at each time.
pub fn evolve_reduced_states(generator: &ReducedGenerator, times: &[f64]) -> Result<Vec<ReducedState>> {
    let v0 = ReducedState::initial(&generator.spec)?.to_vector();
    let l = generator.spec.length;
    let vecs = match Propagator::from_generator(&generator.matrix) {
        Ok(prop) => {
            let c = prop.coefficients(&v0);
            times.iter().map(|&t| prop.apply_coefficients(t, &c)).collect()
        }
        Err(Error::NearDefective { .. }) => {
            crate::ode::integrate_linear(&generator.matrix, &v0, times, Tolerances::default())?
        }
        Err(e) => return Err(e),
    };
    Ok(vecs.iter().map(|v| ReducedState::from_vector(v, l)).collect())
}

/// `P_A(t) = 1 - P0(t) - sum_s P_ss(t)` on the requested grid.
pub fn evolve_reduced(generator: &ReducedGenerator, times: &[f64]) -> Result<ObservableSeries> {
    let curve = reduced_survival(generator)?;
    ObservableSeries::from_survival(
        generator.spec,
        generator.dephasing,
        Provenance::Reduced,
        times,
        &curve.survival_many(times),
    )
}
