//! Uniform periodic grid on `[−L/2, L/2)` and sampled functions on it.
//!
//! The transform approximates `φ̂(p) = (2π)^{-1/2} ∫ φ(x) e^{−ipx} dx` by a
//! rectangle rule: a DFT scaled by `dx/√(2π)` with the phase factor
//! `e^{ip_k L/2} = (−1)^k` accounting for the left endpoint `−L/2`.
//! Frequencies are stored in FFT order: `k = 0, 1, …, N/2−1, −N/2, …, −1`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Which side of the transform a [`GridFunction`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Space,
    Frequency,
}

pub struct SpectralGrid {
    n_points: usize,
    length: f64,
    dx: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(n_points: usize, length: f64) -> Result<Arc<Self>> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::validation(
                "n_points",
                format!("{n_points} is not a power of two >= 2"),
            ));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::validation("length", "must be positive and finite"));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n_points,
            length,
            dx: length / n_points as f64,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        }))
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Frequency spacing `2π/L`.
    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber of storage slot `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn freq(&self, k: usize) -> f64 {
        self.dp() * self.wavenumber(k) as f64
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.freq(k)).collect()
    }

    /// Index of the node `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }

    fn check_same(&self, other: &SpectralGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                n_left: self.n_points,
                len_left: self.length,
                n_right: other.n_points,
                len_right: other.length,
            })
        }
    }
}

/// `l1`, `l2` and `linf` norms under the rectangle rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Samples of a function on the nodes (space side) or the frequency lattice.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<SpectralGrid>,
    domain: Domain,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(grid: &Arc<SpectralGrid>, domain: Domain) -> Self {
        Self {
            grid: Arc::clone(grid),
            domain,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points],
        }
    }

    pub fn from_values(
        grid: &Arc<SpectralGrid>,
        domain: Domain,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::validation(
                "values",
                format!("length {} != n_points {}", values.len(), grid.n_points),
            ));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            domain,
            values,
        })
    }

    pub fn from_real(grid: &Arc<SpectralGrid>, values: &[f64]) -> Result<Self> {
        Self::from_values(
            grid,
            Domain::Space,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Samples a real function at the nodes.
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            domain: Domain::Space,
            values: (0..grid.n_points)
                .map(|j| Complex64::new(f(grid.node(j)), 0.0))
                .collect(),
        }
    }

    /// Samples a complex function on the frequency lattice.
    pub fn from_freq_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            grid: Arc::clone(grid),
            domain: Domain::Frequency,
            values: (0..grid.n_points).map(|k| f(grid.freq(k))).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Quadrature weight: `dx` on the space side, `2π/L` on the frequency side.
    pub fn measure(&self) -> f64 {
        match self.domain {
            Domain::Space => self.grid.dx,
            Domain::Frequency => self.grid.dp(),
        }
    }

    pub fn norms(&self) -> Norms {
        let w = self.measure();
        let (l1, sq, linf) = self.values.iter().fold((0.0, 0.0, 0.0_f64), |acc, z| {
            let m = z.norm();
            (acc.0 + m, acc.1 + z.norm_sqr(), acc.2.max(m))
        });
        Norms {
            l1: l1 * w,
            l2: (sq * w).sqrt(),
            linf,
        }
    }

    pub fn l2(&self) -> f64 {
        self.norms().l2
    }

    fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.domain != other.domain {
            return Err(Error::validation("domain", "space/frequency mismatch"));
        }
        Ok(())
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GridFunction> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        Self {
            grid: Arc::clone(&self.grid),
            domain: self.domain,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Applies a real function to the real part, pointwise.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        self.map(|z| Complex64::new(f(z.re), 0.0))
    }

    /// Multiplies each frequency slot by `m(k)`.
    pub fn multiply_modes(&self, m: impl Fn(usize) -> Complex64) -> GridFunction {
        Self {
            grid: Arc::clone(&self.grid),
            domain: self.domain,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, &z)| z * m(k))
                .collect(),
        }
    }

    /// Largest boundary sample relative to the sup norm.
    pub fn boundary_decay_ratio(&self) -> f64 {
        let linf = self.norms().linf;
        if linf == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / linf
    }

    /// Discrete approximation of the continuum transform.
    pub fn ft_forward(&self) -> Result<GridFunction> {
        if self.domain != Domain::Space {
            return Err(Error::validation("domain", "forward transform needs a space-side input"));
        }
        let mut buf = self.values.clone();
        self.grid.forward.process(&mut buf);
        let scale = self.grid.dx / (2.0 * PI).sqrt();
        for (k, z) in buf.iter_mut().enumerate() {
            let sign = if self.grid.wavenumber(k) % 2 == 0 { 1.0 } else { -1.0 };
            *z *= scale * sign;
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            domain: Domain::Frequency,
            values: buf,
        })
    }

    /// Exact inverse of [`GridFunction::ft_forward`].
    pub fn ft_inverse(&self) -> Result<GridFunction> {
        if self.domain != Domain::Frequency {
            return Err(Error::validation("domain", "inverse transform needs a frequency-side input"));
        }
        let scale = (2.0 * PI).sqrt() / self.grid.length;
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &z)| {
                let sign = if self.grid.wavenumber(k) % 2 == 0 { 1.0 } else { -1.0 };
                z * (scale * sign)
            })
            .collect();
        self.grid.inverse.process(&mut buf);
        Ok(Self {
            grid: Arc::clone(&self.grid),
            domain: Domain::Space,
            values: buf,
        })
    }

    /// Inverse transform of a spectrum expected to describe a real function.
    ///
    /// Fails with [`Error::ImaginaryResidue`] when the imaginary part exceeds
    /// `rel_tol` times the sup norm of the result; otherwise the imaginary part
    /// is dropped.
    pub fn ft_inverse_real(&self, rel_tol: f64) -> Result<GridFunction> {
        let out = self.ft_inverse()?;
        out.into_real(rel_tol)
    }

    /// Drops the imaginary part after checking it is negligible.
    pub fn into_real(self, rel_tol: f64) -> Result<GridFunction> {
        let linf = self.norms().linf;
        let residue = self.max_abs_imag();
        if residue > rel_tol * linf {
            return Err(Error::ImaginaryResidue {
                residue,
                tol: rel_tol * linf,
            });
        }
        Ok(self.map(|z| Complex64::new(z.re, 0.0)))
    }

    /// Writes `x,re,im` (or `p,re,im` on the frequency side) with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let axis = match self.domain {
            Domain::Space => "x",
            Domain::Frequency => "p",
        };
        writeln!(w, "{axis},re,im")?;
        for (i, z) in self.values.iter().enumerate() {
            let coord = match self.domain {
                Domain::Space => self.grid.node(i),
                Domain::Frequency => self.grid.freq(i),
            };
            writeln!(w, "{:.16e},{:.16e},{:.16e}", coord, z.re, z.im)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`GridFunction::write_csv`].
    pub fn read_csv<R: BufRead>(grid: &Arc<SpectralGrid>, r: R) -> Result<GridFunction> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty csv".into()))??;
        let domain = match header.trim() {
            "x,re,im" => Domain::Space,
            "p,re,im" => Domain::Frequency,
            other => return Err(Error::Parse(format!("unexpected header `{other}`"))),
        };
        let mut values = Vec::with_capacity(grid.n_points);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("row {row}: expected 3 columns")));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {row}: {e}")))
            };
            values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        Self::from_values(grid, domain, values)
    }
}

/// Periodic convolution through the transform: `ft_inverse(√(2π) K̂ Ĝ)`.
pub fn convolve_fft(k: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    k.check_compatible(g)?;
    let kh = k.ft_forward()?;
    let gh = g.ft_forward()?;
    let s = (2.0 * PI).sqrt();
    kh.zip_with(&gh, |a, b| a * b * s)?.ft_inverse()
}

/// `O(N²)` periodic quadrature `Σ_j K(x_i − x_j) G(x_j) dx`, with the
/// difference wrapped back into `[−L/2, L/2)`.
pub fn convolve_direct(k: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    k.check_compatible(g)?;
    if k.domain != Domain::Space {
        return Err(Error::validation("domain", "convolution needs space-side inputs"));
    }
    let n = k.grid.n_points;
    let half = n / 2;
    let dx = k.grid.dx;
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                // x_i − x_j = (i − j) dx lands on node (i − j + N/2) mod N.
                let m = (i + n + half - j) % n;
                acc += k.values[m] * g.values[j];
            }
            acc * dx
        })
        .collect();
    GridFunction::from_values(&k.grid, Domain::Space, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, l: f64) -> Arc<SpectralGrid> {
        SpectralGrid::new(n, l).unwrap()
    }

    fn random_real(g: &Arc<SpectralGrid>, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..g.n_points()).map(|_| rng.random_range(-1.0..1.0)).collect();
        GridFunction::from_real(g, &v).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = grid(4096, 80.0);
        assert!((g.dx() * 4096.0 - 80.0).abs() <= f64::EPSILON * 80.0);
        assert_eq!(g.node(0), -40.0);
        assert_eq!(g.node(g.origin_index()), 0.0);
        assert_eq!(g.freqs().iter().filter(|&&p| p == 0.0).count(), 1);
        assert_eq!(g.wavenumber(2048), -2048);
        assert!(SpectralGrid::new(100, 1.0).is_err());
        assert!(SpectralGrid::new(64, -1.0).is_err());
    }

    #[test]
    fn zero_transforms_to_zero() {
        let g = grid(64, 10.0);
        let z = GridFunction::zeros(&g, Domain::Space);
        assert!(z.ft_forward().unwrap().values().iter().all(|v| v.norm() == 0.0));
        let zf = GridFunction::zeros(&g, Domain::Frequency);
        assert!(zf.ft_inverse().unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gaussian_is_self_reciprocal() {
        let g = grid(4096, 80.0);
        let f = GridFunction::from_fn(&g, |x| (-0.5 * x * x).exp());
        let fh = f.ft_forward().unwrap();
        let err = (0..g.n_points())
            .map(|k| {
                let p = g.freq(k);
                (fh.values()[k] - Complex64::new((-0.5 * p * p).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "max error {err:e}");
    }

    #[test]
    fn box_transform_matches_sinc() {
        // Grid-aligned box with half weights at the jumps: the rectangle
        // rule then reproduces the trapezoid rule for the discontinuity.
        let g = grid(4096, 64.0);
        let dx = g.dx();
        let f = GridFunction::from_fn(&g, |x| {
            if (x.abs() - 1.0).abs() < 0.5 * dx {
                0.5
            } else if x.abs() < 1.0 {
                1.0
            } else {
                0.0
            }
        });
        let fh = f.ft_forward().unwrap();
        for k in [1usize, 5, 17, 40, 4095, 4000] {
            let p = g.freq(k);
            let exact = (2.0 / PI).sqrt() * p.sin() / p;
            // Trapezoid error for a kink-free integrand with jumps is O(p² dx²).
            let tol = 0.1 * (1.0 + p * p) * dx * dx;
            assert!((fh.values()[k].re - exact).abs() < tol.max(1e-12), "p={p}");
            assert!(fh.values()[k].im.abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_inversion_matches_direct_sum() {
        let g = grid(64, 8.0);
        let mut f = GridFunction::zeros(&g, Domain::Frequency);
        f.values_mut()[1] = Complex64::new(1.0, 0.0);
        let u = f.ft_inverse().unwrap();
        let p1 = g.freq(1);
        for j in 0..g.n_points() {
            let x = g.node(j);
            // f(x) = (2π)^{-1/2} Σ_k F_k e^{i p_k x} dp
            let direct = (0..g.n_points()).fold(Complex64::new(0.0, 0.0), |acc, k| {
                acc + f.values()[k] * Complex64::from_polar(1.0, g.freq(k) * x)
            }) * (g.dp() / (2.0 * PI).sqrt());
            assert!((u.values()[j] - direct).norm() < 1e-14);
            let analytic = Complex64::from_polar((2.0 * PI).sqrt() / g.length(), p1 * x);
            assert!((u.values()[j] - analytic).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_parseval_on_random_input() {
        let g = grid(1024, 20.0);
        let f = random_real(&g, 7);
        let fh = f.ft_forward().unwrap();
        let back = fh.ft_inverse().unwrap();
        let n = f.l2();
        assert!(back.sub(&f).unwrap().l2() <= 1e-12 * n);
        assert!(back.max_abs_imag() <= 1e-10 * n);
        assert!((fh.l2() - n).abs() <= 1e-12 * n);
    }

    #[test]
    fn imaginary_residue_is_detected() {
        let g = grid(64, 8.0);
        let mut f = GridFunction::zeros(&g, Domain::Frequency);
        f.values_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(f.ft_inverse_real(1e-10), Err(Error::ImaginaryResidue { .. })));
    }

    #[test]
    fn fourier_sup_bounded_by_l1() {
        let g = grid(512, 16.0);
        let f = random_real(&g, 11);
        let bound = f.norms().l1 / (2.0 * PI).sqrt() + 1e-10;
        assert!(f.ft_forward().unwrap().norms().linf <= bound);
    }

    #[test]
    fn norms_of_zero_step_and_gaussian() {
        let g = grid(4096, 80.0);
        let z = GridFunction::zeros(&g, Domain::Space);
        assert_eq!(
            z.norms(),
            Norms {
                l1: 0.0,
                l2: 0.0,
                linf: 0.0
            }
        );
        // dx = 1/64 on this grid, so [-1, 1) holds exactly 128 nodes.
        let aligned = grid(4096, 64.0);
        let step = GridFunction::from_fn(&aligned, |x| if (-1.0..1.0).contains(&x) { 1.0 } else { 0.0 });
        let n = step.norms();
        assert!((n.l1 - 2.0).abs() < 1e-12);
        assert!((n.l2 - 2f64.sqrt()).abs() < 1e-12);
        let gauss = GridFunction::from_fn(&g, |x| (-0.5 * x * x).exp());
        let n = gauss.norms();
        assert!((n.l1 - (2.0 * PI).sqrt()).abs() < 1e-8);
        assert!((n.l2 - PI.powf(0.25)).abs() < 1e-8);
        assert_eq!(n.linf, 1.0);
    }

    #[test]
    fn convolution_with_zero_and_delta() {
        let g = grid(256, 16.0);
        let gf = random_real(&g, 3);
        let zero = GridFunction::zeros(&g, Domain::Space);
        assert_eq!(convolve_fft(&zero, &gf).unwrap().l2(), 0.0);
        assert_eq!(convolve_direct(&zero, &gf).unwrap().l2(), 0.0);

        let mut delta = GridFunction::zeros(&g, Domain::Space);
        delta.values_mut()[g.origin_index()] = Complex64::new(1.0 / g.dx(), 0.0);
        let c = convolve_fft(&delta, &gf).unwrap();
        assert!(c.sub(&gf).unwrap().norms().linf < 1e-10);
        let d = convolve_direct(&delta, &gf).unwrap();
        assert!(d.sub(&gf).unwrap().norms().linf < 1e-12);
    }

    #[test]
    fn shifted_delta_shifts_output() {
        let g = grid(128, 12.0);
        let gf = random_real(&g, 5);
        let shift = 7;
        let mut delta = GridFunction::zeros(&g, Domain::Space);
        delta.values_mut()[g.origin_index() + shift] = Complex64::new(1.0 / g.dx(), 0.0);
        let c = convolve_fft(&delta, &gf).unwrap();
        let n = g.n_points();
        for i in 0..n {
            let expected = gf.values()[(i + n - shift) % n];
            assert!((c.values()[i] - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn gaussian_convolution_closed_form() {
        let g = grid(2048, 60.0);
        let (s1, s2) = (0.8_f64, 1.5_f64);
        let k = GridFunction::from_fn(&g, |x| (-x * x / (2.0 * s1 * s1)).exp());
        let h = GridFunction::from_fn(&g, |x| (-x * x / (2.0 * s2 * s2)).exp());
        let c = convolve_fft(&k, &h).unwrap();
        let s = (s1 * s1 + s2 * s2).sqrt();
        let amp = (2.0 * PI).sqrt() * s1 * s2 / s;
        for j in (0..g.n_points()).step_by(97) {
            let x = g.node(j);
            if x.abs() > 20.0 {
                continue;
            }
            let exact = amp * (-x * x / (2.0 * s * s)).exp();
            assert!((c.values()[j].re - exact).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn direct_convolution_commutes() {
        let g = grid(256, 10.0);
        let a = random_real(&g, 1);
        let b = random_real(&g, 2);
        let ab = convolve_direct(&a, &b).unwrap();
        let ba = convolve_direct(&b, &a).unwrap();
        assert!(ab.sub(&ba).unwrap().norms().linf < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridFunction::zeros(&grid(64, 8.0), Domain::Space);
        let b = GridFunction::zeros(&grid(128, 8.0), Domain::Space);
        assert!(matches!(convolve_fft(&a, &b), Err(Error::GridMismatch { .. })));
        assert!(matches!(convolve_direct(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = grid(32, 4.0);
        let f = random_real(&g, 9).map(|z| z * Complex64::new(1.0, 0.25));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,re,im\n"));
        assert_eq!(text.lines().count(), 33);
        let back = GridFunction::read_csv(&g, &buf[..]).unwrap();
        assert_eq!(back.values(), f.values());
        let fh = f.ft_forward().unwrap();
        let mut buf = Vec::new();
        fh.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"p,re,im\n"));
        assert_eq!(GridFunction::read_csv(&g, &buf[..]).unwrap().domain(), Domain::Frequency);
    }
}
