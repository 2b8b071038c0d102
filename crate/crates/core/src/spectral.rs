//! Left/right eigendecomposition of a linear generator and the spectral sum
//! `exp(A t) = sum_k exp(lambda_k t) |R_k><L_k| / <L_k|R_k>`.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use ndarray_linalg::{Eig, Inverse};

use crate::error::{Error, Result};
use crate::model::C64;
use crate::observables::Survival;

/// Smallest accepted `|<L_k|R_k>| / (|L_k| |R_k|)`.
pub const NEAR_DEFECTIVE_RCOND: f64 = 1e-10;

/// Spectral decomposition of a generator, reusable for any time.
///
/// Left eigenvectors are the rows of the inverse right-eigenvector matrix, so
/// the stored normalizers `<L_k|R_k>` are one up to roundoff.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigenvalues: Array1<C64>,
    right: Array2<C64>,
    left: Array2<C64>,
    normalizers: Array1<C64>,
}

impl Propagator {
    pub fn from_generator(generator: &Array2<C64>) -> Result<Self> {
        if generator.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Linalg("generator has non-finite entries".into()));
        }
        let (eigenvalues, right) = generator.eig()?;
        let left = right.inv().map_err(|_| Error::NearDefective { mode: 0, rcond: 0.0 })?;
        let mut normalizers = Array1::<C64>::zeros(eigenvalues.len());
        for k in 0..eigenvalues.len() {
            let l = left.row(k);
            let r = right.column(k);
            let overlap = l.dot(&r);
            let scale = norm(l) * norm(r);
            let rcond = overlap.norm() / scale;
            if !rcond.is_finite() || rcond < NEAR_DEFECTIVE_RCOND {
                return Err(Error::NearDefective { mode: k, rcond });
            }
            normalizers[k] = overlap;
        }
        Ok(Propagator { eigenvalues, right, left, normalizers })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &Array1<C64> {
        &self.eigenvalues
    }

    /// Right eigenvectors as columns.
    pub fn right(&self) -> &Array2<C64> {
        &self.right
    }

    /// Left eigenvectors as rows.
    pub fn left(&self) -> &Array2<C64> {
        &self.left
    }

    pub fn normalizers(&self) -> &Array1<C64> {
        &self.normalizers
    }

    /// Largest real part of the spectrum.
    pub fn max_growth_rate(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Modal amplitudes `<L_k|v0> / <L_k|R_k>`.
    pub fn coefficients(&self, v0: &Array1<C64>) -> Array1<C64> {
        let c = self.left.dot(v0);
        c / &self.normalizers
    }

    pub fn apply(&self, t: f64, v0: &Array1<C64>) -> Array1<C64> {
        let c = self.coefficients(v0);
        self.apply_coefficients(t, &c)
    }

    pub(crate) fn apply_coefficients(&self, t: f64, c: &Array1<C64>) -> Array1<C64> {
        let scaled: Array1<C64> = c
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(ck, lk)| ck * (lk * t).exp())
            .collect();
        self.right.dot(&scaled)
    }

    /// `exp(A t)` assembled from the spectral sum.
    pub fn matrix_exp(&self, t: f64) -> Array2<C64> {
        let mut scaled = self.right.clone();
        for (k, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
            let f = (self.eigenvalues[k] * t).exp() / self.normalizers[k];
            col.mapv_inplace(|v| v * f);
        }
        scaled.dot(&self.left)
    }

    /// Max-entry deviation of the `t = 0` spectral sum from the identity.
    pub fn reconstruction_error(&self) -> f64 {
        let id = self.matrix_exp(0.0);
        let mut err: f64 = 0.0;
        for ((i, j), v) in id.indexed_iter() {
            let expect = if i == j { 1.0 } else { 0.0 };
            err = err.max((v - C64::new(expect, 0.0)).norm());
        }
        err
    }

    /// Collapses the evolution of `v0` projected on `functional` into a sum of
    /// exponentials, `f(t) = sum_k w_k exp(lambda_k t)`.
    pub fn project(&self, v0: &Array1<C64>, functional: &Array1<C64>) -> ModalCurve {
        let c = self.coefficients(v0);
        let f_r = functional.dot(&self.right);
        ModalCurve { rates: self.eigenvalues.clone(), weights: f_r * c }
    }
}

fn norm(v: ArrayView1<'_, C64>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `f(t) = Re sum_k w_k exp(lambda_k t)`, evaluated in `O(n)` per time.
#[derive(Clone, Debug)]
pub struct ModalCurve {
    pub rates: Array1<C64>,
    pub weights: Array1<C64>,
}

impl ModalCurve {
    pub fn value(&self, t: f64) -> f64 {
        self.rates.iter().zip(self.weights.iter()).map(|(l, w)| (w * (l * t).exp()).re).sum()
    }
}

impl Survival for ModalCurve {
    fn survival(&self, t: f64) -> f64 {
        self.value(t)
    }
}
