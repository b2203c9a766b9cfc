//! Periodic spectral grid on the torus `x ∈ L·[-π, π)`.
//!
//! Transform convention (used everywhere in the crate):
//!
//! ```text
//! forward:  f̂_m = Σ_j f_j · exp(-2πi·j·m/N)          (unnormalized)
//! inverse:  f_j = (1/N) Σ_m f̂_m · exp(+2πi·j·m/N)
//! ```
//!
//! Spectra are stored in FFT-native order: index `j < N/2` holds mode
//! `m = j`, index `j >= N/2` holds `m = j - N`. The Nyquist mode `m = -N/2`
//! sits at index `N/2`. Mode `m` has physical wavenumber `k_m = m / L`.
//! A pure exponential `exp(i·m·x/L)` sampled on the nodes transforms to a
//! single coefficient of modulus `N`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, KbkError, Result};

/// Immutable periodic grid. Cloning is cheap (shared storage).
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

struct GridData {
    l: f64,
    n: usize,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    odd_wavenumbers: Vec<f64>,
    quad_weight: f64,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("L", &self.0.l)
            .field("N", &self.0.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n && self.0.l == other.0.l
    }
}

impl Grid {
    /// Builds the grid with `n` nodes on the period `2πL`; node 0 sits at `-πL`.
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(KbkError::InvalidDomainScale(l));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(KbkError::InvalidGridSize(n));
        }
        let dx = 2.0 * PI * l / n as f64;
        let nodes = (0..n).map(|j| l * (-PI + 2.0 * PI * j as f64 / n as f64)).collect();
        let wavenumbers: Vec<f64> = (0..n).map(|j| mode_number(j, n) as f64 / l).collect();
        let mut odd_wavenumbers = wavenumbers.clone();
        odd_wavenumbers[n / 2] = 0.0;

        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(n);
        let fft_inverse = planner.plan_fft_inverse(n);

        Ok(Grid(Arc::new(GridData {
            l,
            n,
            nodes,
            wavenumbers,
            odd_wavenumbers,
            quad_weight: dx,
            fft_forward,
            fft_inverse,
        })))
    }

    /// Domain scale `L` (period is `2πL`).
    pub fn l(&self) -> f64 {
        self.0.l
    }

    pub fn len(&self) -> usize {
        self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        2.0 * PI * self.0.l
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0.nodes
    }

    /// Wavenumbers `k_m = m/L` in FFT-native order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    /// Wavenumbers with the Nyquist entry set to zero, for odd-order operators.
    pub fn odd_wavenumbers(&self) -> &[f64] {
        &self.0.odd_wavenumbers
    }

    /// Trapezoid weight `2πL/N`; also the node spacing.
    pub fn quad_weight(&self) -> f64 {
        self.0.quad_weight
    }

    /// Integer mode number stored at spectral index `j`.
    pub fn mode_number(&self, j: usize) -> i64 {
        mode_number(j, self.0.n)
    }

    pub fn forward(&self, field: &[f64]) -> Result<Vec<Complex64>> {
        check_len(self.0.n, field.len())?;
        let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.0.fft_forward.process(&mut buf);
        Ok(buf)
    }

    /// Inverse transform, returning the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<f64>> {
        let buf = self.inverse_complex(spectrum)?;
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// Inverse transform without discarding the imaginary part.
    pub fn inverse_complex(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.0.n, spectrum.len())?;
        let mut buf = spectrum.to_vec();
        self.0.fft_inverse.process(&mut buf);
        let scale = 1.0 / self.0.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(buf)
    }

    /// Forward transform of a complex field.
    pub fn forward_complex(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.0.n, field.len())?;
        let mut buf = field.to_vec();
        self.0.fft_forward.process(&mut buf);
        Ok(buf)
    }

    /// Transforms two real fields with one complex FFT (`a + i·b` packing).
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let n = self.0.n;
        check_len(n, a.len())?;
        check_len(n, b.len())?;
        let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.0.fft_forward.process(&mut z);
        let mut a_hat = vec![Complex64::default(); n];
        let mut b_hat = vec![Complex64::default(); n];
        for m in 0..n {
            let zm = z[m];
            let zc = z[(n - m) % n].conj();
            a_hat[m] = 0.5 * (zm + zc);
            b_hat[m] = Complex64::new(0.0, -0.5) * (zm - zc);
        }
        Ok((a_hat, b_hat))
    }

    /// Inverse of two conjugate-symmetric spectra with one complex FFT.
    pub fn inverse_pair(
        &self,
        a_hat: &[Complex64],
        b_hat: &[Complex64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.0.n;
        check_len(n, a_hat.len())?;
        check_len(n, b_hat.len())?;
        let i = Complex64::i();
        let mut z: Vec<Complex64> = a_hat.iter().zip(b_hat).map(|(&x, &y)| x + i * y).collect();
        self.0.fft_inverse.process(&mut z);
        let scale = 1.0 / n as f64;
        Ok(z.iter().map(|w| (w.re * scale, w.im * scale)).unzip())
    }

    /// Multiplies mode `m` by `(i·k_m)^order`; the Nyquist mode is zeroed for odd orders.
    pub fn spectral_derivative(&self, spectrum: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
        check_len(self.0.n, spectrum.len())?;
        if !(1..=4).contains(&order) {
            return Err(KbkError::UnsupportedOrder(order));
        }
        let ks = if order % 2 == 1 {
            &self.0.odd_wavenumbers
        } else {
            &self.0.wavenumbers
        };
        Ok(spectrum
            .iter()
            .zip(ks)
            .map(|(&s, &k)| s * Complex64::new(0.0, k).powu(order))
            .collect())
    }

    /// Physical-space derivative of a real field.
    pub fn derivative(&self, field: &[f64], order: u32) -> Result<Vec<f64>> {
        let spec = self.forward(field)?;
        self.inverse(&self.spectral_derivative(&spec, order)?)
    }

    /// Periodic trapezoid rule: `quad_weight · Σ field_j`.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        check_len(self.0.n, field.len())?;
        Ok(self.0.quad_weight * field.iter().sum::<f64>())
    }

    /// Same quadrature for complex-valued densities.
    pub fn integrate_complex(&self, field: &[Complex64]) -> Result<Complex64> {
        check_len(self.0.n, field.len())?;
        Ok(self.0.quad_weight * field.iter().sum::<Complex64>())
    }

    /// `true` exactly for modes with `|m| <= fraction·N/2`.
    pub fn dealias_mask(&self, fraction: f64) -> Result<Vec<bool>> {
        dealias_mask(self.0.n, fraction)
    }
}

/// De-aliasing mask for `n` modes in FFT-native order.
pub fn dealias_mask(n: usize, fraction: f64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(KbkError::InvalidParameter(format!(
            "dealias fraction must be in (0, 1], got {fraction}"
        )));
    }
    let cutoff = fraction * (n / 2) as f64;
    Ok((0..n)
        .map(|j| (mode_number(j, n).unsigned_abs() as f64) <= cutoff + 1e-12)
        .collect())
}

fn mode_number(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn small_grid_layout() {
        let g = Grid::new(1.0, 8).unwrap();
        assert_eq!(g.nodes()[0], -PI);
        assert!((g.nodes()[4]).abs() < 1e-15);
        let mut natural: Vec<f64> = g.wavenumbers().to_vec();
        natural.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(natural, vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(g.wavenumbers()[4], -4.0);
        assert_eq!(g.odd_wavenumbers()[4], 0.0);
    }

    #[test]
    fn soliton_grid_weight() {
        let g = Grid::new(15.0, 1 << 11).unwrap();
        assert!((g.quad_weight() - 30.0 * PI / 2048.0).abs() < 1e-16);
        assert!((g.quad_weight() * g.len() as f64 - g.period()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid::new(1.0, 7), Err(KbkError::InvalidGridSize(7))));
        assert!(matches!(Grid::new(1.0, 4), Err(KbkError::InvalidGridSize(4))));
        assert!(matches!(Grid::new(0.0, 8), Err(KbkError::InvalidDomainScale(_))));
        assert!(matches!(Grid::new(-1.0, 8), Err(KbkError::InvalidDomainScale(_))));
    }

    #[test]
    fn transforms_reject_wrong_length() {
        let g = Grid::new(1.0, 16).unwrap();
        assert!(g.forward(&[0.0; 8]).is_err());
        assert!(g.inverse(&[Complex64::default(); 32]).is_err());
        assert!(g.integrate(&[1.0; 3]).is_err());
    }

    #[test]
    fn zero_and_cosine_spectra() {
        let g = Grid::new(1.0, 16).unwrap();
        assert!(g.forward(&[0.0; 16]).unwrap().iter().all(|z| z.norm() == 0.0));

        let f: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        let spec = g.forward(&f).unwrap();
        for (j, z) in spec.iter().enumerate() {
            let m = g.mode_number(j);
            if m.abs() == 1 {
                assert!((z.norm() - 8.0).abs() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12, "mode {m} = {z}");
            }
        }
    }

    #[test]
    fn single_exponential_has_modulus_n() {
        let g = Grid::new(2.0, 32).unwrap();
        let m0 = 3;
        let re: Vec<f64> = g.nodes().iter().map(|x| (m0 as f64 * x / 2.0).cos()).collect();
        let im: Vec<f64> = g.nodes().iter().map(|x| (m0 as f64 * x / 2.0).sin()).collect();
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let spec = g.forward_complex(&z).unwrap();
        assert!((spec[m0].norm() - 32.0).abs() < 1e-11);
    }

    #[test]
    fn round_trip_smooth_field() {
        let g = Grid::new(1.0, 64).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x.sin().exp()).collect();
        let back = g.inverse(&g.forward(&f).unwrap()).unwrap();
        let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max_abs_diff(&f, &back) / scale < 1e-13);
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = Grid::new(1.5, 32).unwrap();
        let a: Vec<f64> = g.nodes().iter().map(|x| (x / 1.5).cos().exp()).collect();
        let b: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x / 1.5).sin()).collect();
        let (ah, bh) = g.forward_pair(&a, &b).unwrap();
        let ah1 = g.forward(&a).unwrap();
        let bh1 = g.forward(&b).unwrap();
        for j in 0..32 {
            assert!((ah[j] - ah1[j]).norm() < 1e-12);
            assert!((bh[j] - bh1[j]).norm() < 1e-12);
        }
        let (a2, b2) = g.inverse_pair(&ah, &bh).unwrap();
        assert!(max_abs_diff(&a, &a2) < 1e-14);
        assert!(max_abs_diff(&b, &b2) < 1e-14);
    }

    #[test]
    fn derivatives_of_trig_functions() {
        let l = 2.5;
        let g = Grid::new(l, 32).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| (x / l).sin()).collect();
        let df = g.derivative(&f, 1).unwrap();
        let exact: Vec<f64> = g.nodes().iter().map(|x| (x / l).cos() / l).collect();
        assert!(max_abs_diff(&df, &exact) < 1e-13);

        let g1 = Grid::new(1.0, 16).unwrap();
        let c: Vec<f64> = g1.nodes().iter().map(|x| x.cos()).collect();
        let d2 = g1.derivative(&c, 2).unwrap();
        let minus_c: Vec<f64> = c.iter().map(|x| -x).collect();
        assert!(max_abs_diff(&d2, &minus_c) < 1e-13);
    }

    #[test]
    fn odd_derivative_kills_nyquist() {
        let g = Grid::new(1.0, 8).unwrap();
        let mut spec = vec![Complex64::default(); 8];
        spec[4] = Complex64::new(1.0, 0.0);
        assert_eq!(g.spectral_derivative(&spec, 1).unwrap()[4], Complex64::default());
        assert_eq!(g.spectral_derivative(&spec, 3).unwrap()[4], Complex64::default());
        assert!((g.spectral_derivative(&spec, 2).unwrap()[4].re + 16.0).abs() < 1e-12);
        assert!(matches!(
            g.spectral_derivative(&spec, 5),
            Err(KbkError::UnsupportedOrder(5))
        ));
        assert!(g.spectral_derivative(&spec, 0).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::new(1.0, 8).unwrap();
        assert!((g.integrate(&[1.0; 8]).unwrap() - 2.0 * PI).abs() < 1e-14);

        let g = Grid::new(3.0, 64).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|x| (x / 3.0).sin()).collect();
        assert!(g.integrate(&s).unwrap().abs() < 1e-14);

        // ∫ sech²(x) over [-15π, 15π] = 2·tanh(15π)
        let g = Grid::new(15.0, 1 << 11).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| 1.0 / x.cosh().powi(2)).collect();
        let exact = 2.0 * (15.0 * PI).tanh();
        assert!((g.integrate(&f).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn dealias_masks() {
        let g = Grid::new(1.0, 16).unwrap();
        assert!(g.dealias_mask(1.0).unwrap().iter().all(|&b| b));
        assert!(g.dealias_mask(0.0).is_err());
        assert!(g.dealias_mask(1.5).is_err());

        let mask = dealias_mask(12, 2.0 / 3.0).unwrap();
        for (j, &keep) in mask.iter().enumerate() {
            assert_eq!(keep, mode_number(j, 12).abs() <= 4, "j = {j}");
        }
        let twice: Vec<bool> = mask.iter().zip(&mask).map(|(a, b)| *a && *b).collect();
        assert_eq!(twice, mask);
    }
}
