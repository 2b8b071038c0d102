//! Strong-dephasing limit: both networks become directed chains of `L + 1`
//! effective sites with a trap on the first one.
//!
//! Site 0 is the trap (star core / chain site 0) and site `L` the defect end
//! where the walker starts. Bond `m` joins sites `m` and `m + 1`; `right[m]`
//! is the rate away from the trap and `left[m]` the rate back toward it.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Solve, UPLO};

use crate::error::{Error, Result};
use crate::model::{NetworkKind, NetworkSpec, C64};
use crate::observables::{ObservableSeries, Provenance, Survival};
use crate::spectral::ModalCurve;

/// `k_A = 2 J^2 gamma / (gamma^2 + Delta^2)`, `k_B = 2 J^2 / gamma`,
/// `k_C = 2 J^2 / (gamma + Gamma / 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalRates {
    pub k_a: f64,
    pub k_b: f64,
    pub k_c: f64,
}

pub fn classical_rates(hopping: f64, dephasing: f64, defect: f64, trap_rate: f64) -> Result<ClassicalRates> {
    if !(dephasing.is_finite() && dephasing > 0.0) {
        return Err(Error::ClassicalLimitUndefined(dephasing));
    }
    let j2 = 2.0 * hopping * hopping;
    Ok(ClassicalRates {
        k_a: j2 * dephasing / (dephasing * dephasing + defect * defect),
        k_b: j2 / dephasing,
        k_c: j2 / (dephasing + 0.5 * trap_rate),
    })
}

#[derive(Clone, Debug)]
pub struct RateModel {
    /// Column convention: `dP/dt = K P`.
    pub matrix: Array2<f64>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub trap_rate: f64,
    pub rates: ClassicalRates,
    pub origin: NetworkKind,
    pub spec: NetworkSpec,
}

impl RateModel {
    /// Assembles `K` for arbitrary bond rates. `right` and `left` must have
    /// one entry per bond.
    pub fn from_bonds(
        right: Vec<f64>,
        left: Vec<f64>,
        trap_rate: f64,
        rates: ClassicalRates,
        origin: NetworkKind,
        spec: NetworkSpec,
    ) -> Self {
        assert_eq!(right.len(), left.len());
        let m = right.len() + 1;
        let mut k = Array2::<f64>::zeros((m, m));
        k[[0, 0]] = -trap_rate;
        for b in 0..m - 1 {
            k[[b + 1, b]] += right[b];
            k[[b, b]] -= right[b];
            k[[b, b + 1]] += left[b];
            k[[b + 1, b + 1]] -= left[b];
        }
        RateModel { matrix: k, right, left, trap_rate, rates, origin, spec }
    }

    pub fn sites(&self) -> usize {
        self.matrix.nrows()
    }

    /// 1 for the chain, 0 for the star.
    pub fn chain_flag(&self) -> u8 {
        u8::from(self.origin == NetworkKind::AsymmetricChain)
    }

    /// Population vector with the walker on the defect end.
    pub fn initial_populations(&self) -> Array1<f64> {
        let mut p = Array1::zeros(self.sites());
        p[self.sites() - 1] = 1.0;
        p
    }

    /// Total population `sum_s P_s(t)` as a sum of real exponentials, using
    /// the detailed-balance similarity `D^{-1} K D` which is symmetric for a
    /// birth-death chain.
    pub fn survival_curve(&self) -> Result<ModalCurve> {
        let m = self.sites();
        let mut d = vec![1.0; m];
        for b in 0..m - 1 {
            if !(self.right[b] > 0.0 && self.left[b] > 0.0) {
                return Err(Error::InvalidSpec("rate model needs positive bond rates".into()));
            }
            d[b + 1] = d[b] * (self.right[b] / self.left[b]).sqrt();
        }
        let sym = Array2::from_shape_fn((m, m), |(i, j)| self.matrix[[i, j]] * d[j] / d[i]);
        let (lambda, u) = sym.eigh(UPLO::Lower)?;
        let p0 = self.initial_populations();
        let mut weights = Array1::<C64>::zeros(m);
        for k in 0..m {
            let outgoing: f64 = (0..m).map(|i| d[i] * u[[i, k]]).sum();
            let incoming: f64 = (0..m).map(|i| u[[i, k]] * p0[i] / d[i]).sum();
            weights[k] = C64::new(outgoing * incoming, 0.0);
        }
        Ok(ModalCurve { rates: lambda.mapv(|l| C64::new(l, 0.0)), weights })
    }
}

/// Directed chain equivalent of `spec` at dephasing `gamma`.
///
/// The trap bond carries `N k_C` in both directions for the chain; for the
/// star it carries `N k_C` away from the core and `k_C` toward it. Interior
/// bonds carry `k_B` and the defect bond `k_A`. When `L = 1` the single bond
/// is both trap and defect bond and uses
/// `2 J^2 g / (g^2 + Delta^2)` with `g = gamma + Gamma / 2` in place of `k_C`.
pub fn build_rate_model(spec: &NetworkSpec, dephasing: f64) -> Result<RateModel> {
    spec.validate()?;
    let rates = classical_rates(spec.hopping, dephasing, spec.defect, spec.trap_rate)?;
    let l = spec.length;
    let n = spec.branches as f64;
    let mut right = vec![rates.k_b; l];
    let mut left = vec![rates.k_b; l];
    right[l - 1] = rates.k_a;
    left[l - 1] = rates.k_a;
    let trap_bond = if l == 1 {
        let g = dephasing + 0.5 * spec.trap_rate;
        2.0 * spec.hopping * spec.hopping * g / (g * g + spec.defect * spec.defect)
    } else {
        rates.k_c
    };
    right[0] = n * trap_bond;
    left[0] = match spec.kind {
        NetworkKind::ExtendedStar => trap_bond,
        NetworkKind::AsymmetricChain => n * trap_bond,
    };
    Ok(RateModel::from_bonds(right, left, spec.trap_rate, rates, spec.kind, *spec))
}

pub fn evolve_rates(model: &RateModel, times: &[f64], dephasing: f64) -> Result<ObservableSeries> {
    let curve = model.survival_curve()?;
    ObservableSeries::from_survival(model.spec, dephasing, Provenance::Classical, times, &curve.survival_many(times))
}

/// Mean first-passage time in closed form,
/// `N_S/Gamma + 1/k_A + (L+1)(L-2)/(2 k_B) + (L/k_C)(1 + delta_ch (1-N)/N)`,
/// where `N_S` is the size of the original network. Valid for `L >= 2`.
pub fn mfpt_closed_form(spec: &NetworkSpec, dephasing: f64) -> Result<f64> {
    spec.validate()?;
    if spec.length < 2 {
        return Err(Error::InvalidSpec("closed-form MFPT needs L >= 2".into()));
    }
    if spec.trap_rate <= 0.0 {
        return Err(Error::SingularRateMatrix);
    }
    let r = classical_rates(spec.hopping, dephasing, spec.defect, spec.trap_rate)?;
    let l = spec.length as f64;
    let n = spec.branches as f64;
    let chain = if spec.kind == NetworkKind::AsymmetricChain { 1.0 } else { 0.0 };
    Ok(spec.total_sites() as f64 / spec.trap_rate
        + 1.0 / r.k_a
        + (l + 1.0) * (l - 2.0) / (2.0 * r.k_b)
        + l / r.k_c * (1.0 + chain * (1.0 - n) / n))
}

/// `tau ~ ln 2 * MFPT`.
pub fn absorption_time_estimate(mfpt: f64) -> f64 {
    std::f64::consts::LN_2 * mfpt
}

/// `-sum_s [K^{-1} P(0)]_s` by a direct linear solve.
pub fn mfpt_via_inverse(model: &RateModel) -> Result<f64> {
    if model.trap_rate <= 0.0 {
        return Err(Error::SingularRateMatrix);
    }
    let rhs = -model.initial_populations();
    let x = model.matrix.solve(&rhs).map_err(|_| Error::SingularRateMatrix)?;
    Ok(x.sum())
}

/// `r_1 = 1/Gamma`, `r_m = r_{m-1} k^right_{m-1} / k^left_m`.
pub fn recurrence_amplitudes(model: &RateModel) -> Result<Vec<f64>> {
    if model.trap_rate <= 0.0 {
        return Err(Error::SingularRateMatrix);
    }
    let mut r = Vec::with_capacity(model.sites());
    r.push(1.0 / model.trap_rate);
    for b in 0..model.sites() - 1 {
        let prev = r[b];
        r.push(prev * model.right[b] / model.left[b]);
    }
    Ok(r)
}

/// `sum_m r_m + sum_m (1 / (r_m k^right_m)) sum_{n > m} r_n`.
pub fn mfpt_via_recurrence(model: &RateModel) -> Result<f64> {
    let r = recurrence_amplitudes(model)?;
    let mut tail: f64 = r.iter().sum();
    let mut total = tail;
    for (rm, right) in r.iter().zip(&model.right) {
        tail -= rm;
        total += tail / (rm * right);
    }
    Ok(total)
}

/// Waiting-time description on the chain extended by an absorbing virtual
/// site (index 0) fed by the trap at rate `Gamma`.
#[derive(Clone, Debug)]
pub struct LaplaceWtd {
    /// `(L + 2) x (L + 2)` augmented rate matrix.
    pub augmented: Array2<f64>,
    /// Total escape rate out of each site (zero for the virtual site).
    pub escape: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WtdMfpt {
    /// `-phi'(0)` from differentiating the recursion exactly.
    pub exact: f64,
    /// `-phi'(0)` from a central difference in `z`.
    pub finite_difference: f64,
}

impl LaplaceWtd {
    pub fn new(model: &RateModel) -> Self {
        let m = model.sites();
        let mut k = Array2::<f64>::zeros((m + 1, m + 1));
        k.slice_mut(ndarray::s![1.., 1..]).assign(&model.matrix);
        k[[0, 1]] = model.trap_rate;
        let escape = (0..=m).map(|j| -k[[j, j]]).collect();
        LaplaceWtd { augmented: k, escape }
    }

    pub fn dim(&self) -> usize {
        self.escape.len()
    }

    /// `Q_ij(z) = K~_ij / (z + k_j)` for `i != j`: Laplace transform of the
    /// density of hopping `j -> i` as the first move out of `j`. Columns of
    /// absorbing sites are zero.
    pub fn q(&self, z: f64) -> Array2<f64> {
        self.q_with(z, |kij, denom| kij / denom)
    }

    fn dq(&self, z: f64) -> Array2<f64> {
        self.q_with(z, |kij, denom| -kij / (denom * denom))
    }

    fn q_with(&self, z: f64, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j || self.escape[j] == 0.0 {
                0.0
            } else {
                f(self.augmented[[i, j]], z + self.escape[j])
            }
        })
    }

    /// First-passage transforms `phi_i(z)` to the virtual site, `phi_0 = 1`.
    pub fn phi(&self, z: f64) -> Result<Vec<f64>> {
        let q = self.q(z);
        let (a, b) = self.system(&q);
        let x = a.solve(&b).map_err(|_| Error::RecursionNonConvergent { z })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::RecursionNonConvergent { z });
        }
        Ok(std::iter::once(1.0).chain(x.iter().cloned()).collect())
    }

    /// `phi_i = phi_{i+1} Q_{i+1,i} + phi_{i-1} Q_{i-1,i}` for the transient
    /// sites, written as `A phi = b` with `phi_0 = 1` moved to the right.
    fn system(&self, q: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
        let n = self.dim() - 1;
        let mut a = Array2::<f64>::eye(n);
        let mut b = Array1::<f64>::zeros(n);
        for i in 1..=n {
            if i < n {
                a[[i - 1, i]] = -q[[i + 1, i]];
            }
            if i > 1 {
                a[[i - 1, i - 2]] = -q[[i - 1, i]];
            } else {
                b[0] = q[[0, 1]];
            }
        }
        (a, b)
    }

    /// `d phi / dz` at `z`, from `A phi' = b' - A' phi`.
    pub fn phi_derivative(&self, z: f64) -> Result<Vec<f64>> {
        let q = self.q(z);
        let dq = self.dq(z);
        let (a, _) = self.system(&q);
        let (da_plus_eye, db) = self.system(&dq);
        let da = da_plus_eye - Array2::<f64>::eye(a.nrows());
        let phi = self.phi(z)?;
        let phi_t = Array1::from_iter(phi[1..].iter().cloned());
        let rhs = &db - &da.dot(&phi_t);
        let x = a.solve(&rhs).map_err(|_| Error::RecursionNonConvergent { z })?;
        Ok(std::iter::once(0.0).chain(x.iter().cloned()).collect())
    }
}

/// `-d phi_{L+1} / dz` at `z = 0`, exactly and by central difference with
/// step `1e-6 / MFPT`.
pub fn mfpt_via_wtd(model: &RateModel) -> Result<WtdMfpt> {
    if model.trap_rate <= 0.0 {
        return Err(Error::SingularRateMatrix);
    }
    let wtd = LaplaceWtd::new(model);
    let last = wtd.dim() - 1;
    let exact = -wtd.phi_derivative(0.0)?[last];
    let h = 1e-6 / exact;
    let plus = wtd.phi(h)?[last];
    let minus = wtd.phi(-h)?[last];
    Ok(WtdMfpt { exact, finite_difference: -(plus - minus) / (2.0 * h) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_by_substitution() {
        let r = classical_rates(1.0, 1.0, 0.0, 0.1).unwrap();
        assert!((r.k_a - 2.0).abs() < 1e-15);
        assert!((r.k_b - 2.0).abs() < 1e-15);
        assert!((r.k_c - 2.0 / 1.05).abs() < 1e-15);
        assert!(classical_rates(1.0, 0.0, 0.0, 0.1).is_err());
        let far = classical_rates(1.0, 1.0, 1e6, 0.1).unwrap();
        assert!(far.k_a < 1e-11);
        let strong = classical_rates(1.0, 1e4, 1.0, 0.1).unwrap();
        assert!((strong.k_a / strong.k_b - 1.0).abs() < 1e-7);
        assert!((strong.k_c / strong.k_b - 1.0).abs() < 1e-5);
    }

    #[test]
    fn chain_model_bonds() {
        let spec = NetworkSpec::chain(5, 4).with_defect(1.0);
        let m = build_rate_model(&spec, 2.0).unwrap();
        let r = m.rates;
        assert_eq!(m.sites(), 5);
        assert_eq!((m.right[0], m.left[0]), (5.0 * r.k_c, 5.0 * r.k_c));
        assert_eq!((m.right[1], m.left[2]), (r.k_b, r.k_b));
        assert_eq!((m.right[3], m.left[3]), (r.k_a, r.k_a));
        assert_eq!(m.chain_flag(), 1);
    }

    #[test]
    fn star_model_is_anisotropic() {
        let spec = NetworkSpec::star(5, 4);
        let m = build_rate_model(&spec, 2.0).unwrap();
        assert!((m.right[0] - 5.0 * m.rates.k_c).abs() < 1e-14);
        assert_eq!(m.left[0], m.rates.k_c);
        assert_eq!(m.chain_flag(), 0);
    }

    #[test]
    fn column_sums_and_signs() {
        for spec in [NetworkSpec::star(4, 6), NetworkSpec::chain(3, 2), NetworkSpec::star(3, 1)] {
            let m = build_rate_model(&spec.with_defect(0.5), 0.7).unwrap();
            for j in 0..m.sites() {
                let sum: f64 = m.matrix.column(j).sum();
                let expect = if j == 0 { -spec.trap_rate } else { 0.0 };
                assert!((sum - expect).abs() < 1e-12);
                for i in 0..m.sites() {
                    if i == j {
                        assert!(m.matrix[[i, j]] <= 0.0);
                    } else {
                        assert!(m.matrix[[i, j]] >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn recurrence_amplitude_shapes() {
        let star = build_rate_model(&NetworkSpec::star(5, 4), 1.5).unwrap();
        let r = recurrence_amplitudes(&star).unwrap();
        assert!((r[0] - 10.0).abs() < 1e-12);
        assert!(r[1..].iter().all(|v| (v - 50.0).abs() < 1e-9));
        let chain = build_rate_model(&NetworkSpec::chain(5, 4), 1.5).unwrap();
        assert!(recurrence_amplitudes(&chain).unwrap().iter().all(|v| (v - 10.0).abs() < 1e-12));
    }

    #[test]
    fn plateau_terms() {
        let star = NetworkSpec::star(5, 5);
        let chain = NetworkSpec::chain(5, 5);
        let plateau = |s: &NetworkSpec| absorption_time_estimate(s.total_sites() as f64 / s.trap_rate);
        assert!((plateau(&star) - 180.2).abs() < 0.1);
        assert!((plateau(&chain) - 41.6).abs() < 0.1);
    }

    #[test]
    fn singular_without_trap() {
        let m = build_rate_model(&NetworkSpec::chain(3, 3).with_trap_rate(0.0), 1.0).unwrap();
        assert!(matches!(mfpt_via_inverse(&m), Err(Error::SingularRateMatrix)));
        assert!(matches!(mfpt_via_recurrence(&m), Err(Error::SingularRateMatrix)));
        assert!(mfpt_via_wtd(&m).is_err());
        assert!(mfpt_closed_form(&NetworkSpec::chain(3, 3).with_trap_rate(0.0), 1.0).is_err());
    }

    #[test]
    fn closed_form_needs_two_sites() {
        assert!(mfpt_closed_form(&NetworkSpec::chain(3, 1), 1.0).is_err());
        assert!(mfpt_closed_form(&NetworkSpec::chain(3, 2), 0.0).is_err());
    }

    #[test]
    fn wtd_boundary_values() {
        let m = build_rate_model(&NetworkSpec::star(4, 5).with_defect(1.0), 3.0).unwrap();
        let wtd = LaplaceWtd::new(&m);
        assert_eq!(wtd.dim(), 7);
        let phi = wtd.phi(0.0).unwrap();
        assert_eq!(phi[0], 1.0);
        assert!(phi.iter().all(|p| (p - 1.0).abs() < 1e-12));
        let q = wtd.q(0.0);
        for j in 1..wtd.dim() {
            assert!((q.column(j).sum() - 1.0).abs() < 1e-12);
        }
    }
}
