//! Fast discrete sine transform (DST-I) machinery for node-centered
//! Dirichlet problems on the square.
//!
//! The interior nodes of an N-cell grid carry (N−1)² unknowns; the 5-point
//! Laplacian with homogeneous Dirichlet data diagonalizes in the DST-I basis
//! with per-direction eigenvalues λ_k = 4 sin²(kπ/2N)/h². This module wraps
//! rustfft with the odd-extension trick (complex FFT of length 2N), exposes
//! the 2-D transform pair, a Poisson solve, and the discrete H⁻¹ norm
//! ‖R‖_{H⁻¹}² = (R, (−Δ_h)⁻¹R)_{L²_h} used by the error diagnostics.

use crate::field::{Centering, Grid, ScalarField};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// DST-I plan on the interior nodes of a square grid (owns scratch buffers,
/// so transform methods take `&mut self`).
pub struct SineTransform {
    /// Cells per direction.
    n: usize,
    /// Cell width.
    h: f64,
    /// Interior nodes per direction (N−1).
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    transpose: Vec<f64>,
}

impl SineTransform {
    #[must_use]
    pub fn new(grid: Grid) -> Self {
        let n = grid.n;
        assert!(n >= 2, "sine transform needs at least one interior node");
        let fft = FftPlanner::new().plan_fft_forward(2 * n);
        let scratch_len = fft.get_inplace_scratch_len();
        SineTransform {
            n,
            h: grid.h(),
            m: n - 1,
            fft,
            buf: vec![Complex64::default(); 2 * n],
            scratch: vec![Complex64::default(); scratch_len],
            transpose: vec![0.0; (n - 1) * (n - 1)],
        }
    }

    /// Interior nodes per direction.
    #[must_use]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Per-direction Laplacian eigenvalue λ_k = 4 sin²(kπ/2N)/h², 1 ≤ k ≤ N−1.
    #[must_use]
    pub fn lambda(&self, k: usize) -> f64 {
        debug_assert!(k >= 1 && k <= self.m);
        let s = (k as f64 * std::f64::consts::PI / (2.0 * self.n as f64)).sin();
        4.0 * s * s / (self.h * self.h)
    }

    /// Unnormalized 1-D DST-I in place: x_k ← Σ_j x_j sin(jkπ/N).
    fn dst_row(&mut self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.m);
        let two_n = 2 * self.n;
        self.buf[0] = Complex64::default();
        self.buf[self.n] = Complex64::default();
        for (j, &x) in row.iter().enumerate() {
            self.buf[j + 1] = Complex64::new(x, 0.0);
            self.buf[two_n - 1 - j] = Complex64::new(-x, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (k, x) in row.iter_mut().enumerate() {
            *x = -0.5 * self.buf[k + 1].im;
        }
    }

    fn transpose_square(&mut self, a: &mut [f64]) {
        let m = self.m;
        for j in 0..m {
            for i in 0..m {
                self.transpose[i * m + j] = a[j * m + i];
            }
        }
        a.copy_from_slice(&self.transpose);
    }

    /// Unnormalized 2-D DST-I of an m×m row-major interior array.
    pub fn dst2(&mut self, a: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(a.len(), m * m);
        for j in 0..m {
            let mut row = a[j * m..(j + 1) * m].to_vec();
            self.dst_row(&mut row);
            a[j * m..(j + 1) * m].copy_from_slice(&row);
        }
        self.transpose_square(a);
        for j in 0..m {
            let mut row = a[j * m..(j + 1) * m].to_vec();
            self.dst_row(&mut row);
            a[j * m..(j + 1) * m].copy_from_slice(&row);
        }
        self.transpose_square(a);
    }

    /// Inverse of [`SineTransform::dst2`] (DST-I is involutive up to (N/2)²).
    pub fn idst2(&mut self, a: &mut [f64]) {
        self.dst2(a);
        let scale = (2.0 / self.n as f64) * (2.0 / self.n as f64);
        for v in a.iter_mut() {
            *v *= scale;
        }
    }

    /// Extract the interior nodes of a node-centered field, row-major.
    #[must_use]
    pub fn interior(&self, field: &ScalarField) -> Vec<f64> {
        assert_eq!(field.centering, Centering::Node);
        assert_eq!(field.nx, self.n + 1);
        let m = self.m;
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            for i in 0..m {
                out[j * m + i] = field.at(i + 1, j + 1);
            }
        }
        out
    }

    /// Write interior values back into a node-centered field (boundary rows
    /// untouched).
    pub fn scatter_interior(&self, vals: &[f64], field: &mut ScalarField) {
        assert_eq!(field.centering, Centering::Node);
        assert_eq!(field.nx, self.n + 1);
        let m = self.m;
        assert_eq!(vals.len(), m * m);
        for j in 0..m {
            for i in 0..m {
                field.set(i + 1, j + 1, vals[j * m + i]);
            }
        }
    }

    /// Solve −Δ_h φ = r with φ = 0 on ∂Ω for a node-centered right-hand side;
    /// returns φ on nodes (zero boundary ring).
    pub fn solve_poisson(&mut self, rhs: &ScalarField) -> ScalarField {
        let mut a = self.interior(rhs);
        self.dst2(&mut a);
        let m = self.m;
        for l in 1..=m {
            let ll = self.lambda(l);
            for k in 1..=m {
                a[(l - 1) * m + (k - 1)] /= self.lambda(k) + ll;
            }
        }
        self.idst2(&mut a);
        let mut phi = ScalarField::zeros(Grid::new(self.n, self.h * self.n as f64), Centering::Node);
        self.scatter_interior(&a, &mut phi);
        phi
    }

    /// Discrete H⁻¹ norm of a node-centered residual: with φ the Dirichlet
    /// Poisson solution of −Δ_h φ = R, returns √(h² Σ φR) computed in
    /// spectral space (Parseval: h²(2/N)² Σ R̂²/Λ).
    pub fn h_minus1_norm(&mut self, r: &ScalarField) -> f64 {
        let mut a = self.interior(r);
        self.dst2(&mut a);
        let m = self.m;
        let mut s = 0.0;
        for l in 1..=m {
            let ll = self.lambda(l);
            for k in 1..=m {
                let v = a[(l - 1) * m + (k - 1)];
                s += v * v / (self.lambda(k) + ll);
            }
        }
        let scale = (2.0 / self.n as f64) * (2.0 / self.n as f64);
        (self.h * self.h * scale * s).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct O(m²) DST-I for cross-checking the FFT path.
    fn dst_direct(x: &[f64], n: usize) -> Vec<f64> {
        let m = x.len();
        (1..=m)
            .map(|k| {
                (1..=m)
                    .map(|j| x[j - 1] * (j as f64 * k as f64 * PI / n as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dst_row_matches_direct_sum() {
        let g = Grid::new(8, 1.0);
        let mut t = SineTransform::new(g);
        let mut x: Vec<f64> = (0..7).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let want = dst_direct(&x, 8);
        t.dst_row(&mut x);
        for (a, b) in x.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn dst2_round_trip() {
        let g = Grid::new(13, 0.7);
        let mut t = SineTransform::new(g);
        let m = t.m();
        let orig: Vec<f64> = (0..m * m).map(|i| ((i as f64) * 0.11).cos()).collect();
        let mut a = orig.clone();
        t.dst2(&mut a);
        t.idst2(&mut a);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_exact_for_discrete_eigenfunction() {
        // sin(kπx/L)sin(lπy/L) sampled on nodes satisfies
        // −Δ_h φ = (λ_k+λ_l) φ exactly.
        let g = Grid::new(24, 2.0);
        let mut t = SineTransform::new(g);
        let (k, l) = (3usize, 5usize);
        let lam = t.lambda(k) + t.lambda(l);
        let phi_exact = ScalarField::from_fn(g, Centering::Node, |x, y| {
            (k as f64 * PI * x / 2.0).sin() * (l as f64 * PI * y / 2.0).sin()
        });
        let rhs = ScalarField::from_fn(g, Centering::Node, |x, y| {
            lam * (k as f64 * PI * x / 2.0).sin() * (l as f64 * PI * y / 2.0).sin()
        });
        let phi = t.solve_poisson(&rhs);
        for (a, b) in phi.data.iter().zip(&phi_exact.data) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn poisson_exact_for_biquadratic() {
        // x(L−x)y(L−y) is quadratic per direction, so the 5-point stencil has
        // no truncation error and the discrete solve reproduces it exactly.
        let g = Grid::new(16, 1.0);
        let mut t = SineTransform::new(g);
        let rhs = ScalarField::from_fn(g, Centering::Node, |x, y| {
            2.0 * (y * (1.0 - y) + x * (1.0 - x))
        });
        let phi = t.solve_poisson(&rhs);
        let exact = ScalarField::from_fn(g, Centering::Node, |x, y| {
            x * (1.0 - x) * y * (1.0 - y)
        });
        for (a, b) in phi.data.iter().zip(&exact.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_second_order_for_smooth_solution() {
        // φ* = sin(πx)sin(πy)exp(x) is not a discrete eigenfunction; the
        // nodal error of the 5-point solve must contract at order 2.
        let exact_phi = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin() * x.exp();
        let rhs_fn = |x: f64, y: f64| {
            let s = (PI * x).sin();
            let c = (PI * x).cos();
            let sy = (PI * y).sin();
            let ex = x.exp();
            let phi_xx = ex * (s + 2.0 * PI * c - PI * PI * s) * sy;
            let phi_yy = -PI * PI * s * sy * ex;
            -(phi_xx + phi_yy)
        };
        let mut errs = Vec::new();
        for &n in &[16usize, 32] {
            let g = Grid::new(n, 1.0);
            let mut t = SineTransform::new(g);
            let rhs = ScalarField::from_fn(g, Centering::Node, rhs_fn);
            let phi = t.solve_poisson(&rhs);
            let mut e = 0.0f64;
            for j in 0..phi.ny {
                for i in 0..phi.nx {
                    let (x, y) = phi.coord(i, j);
                    e = e.max((phi.at(i, j) - exact_phi(x, y)).abs());
                }
            }
            errs.push(e);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.9, "poisson order {order}, errs {errs:?}");
    }

    #[test]
    fn h_minus1_of_eigenfunction_has_closed_form() {
        // For R = sin(πx)sin(πy) on the unit square the discrete identity is
        // ‖R‖_{H⁻¹} = ‖R‖_{L²_h}/√Λ with Λ = 8 sin²(πh/2)/h².
        let n = 64usize;
        let g = Grid::new(n, 1.0);
        let mut t = SineTransform::new(g);
        let r = ScalarField::from_fn(g, Centering::Node, |x, y| (PI * x).sin() * (PI * y).sin());
        let h = g.h();
        let lam = 8.0 * (PI * h / 2.0).sin().powi(2) / (h * h);
        let l2: f64 = {
            let s: f64 = t.interior(&r).iter().map(|v| v * v).sum();
            (h * h * s).sqrt()
        };
        let got = t.h_minus1_norm(&r);
        assert!(
            (got - l2 / lam.sqrt()).abs() < 1e-12,
            "H⁻¹ {got} vs closed form {}",
            l2 / lam.sqrt()
        );
    }

    #[test]
    fn h_minus1_matches_direct_poisson_pairing() {
        let g = Grid::new(20, 1.5);
        let mut t = SineTransform::new(g);
        let r = ScalarField::from_fn(g, Centering::Node, |x, y| {
            (x - 0.7).tanh() * (3.0 * y).sin()
        });
        let phi = t.solve_poisson(&r);
        let h2 = g.h() * g.h();
        let pairing: f64 = phi
            .data
            .iter()
            .zip(&r.data)
            .map(|(p, rr)| p * rr)
            .sum::<f64>()
            * h2;
        let got = t.h_minus1_norm(&r);
        assert!((got - pairing.sqrt()).abs() < 1e-12);
    }
}
