//! Closed interface curves, their differential geometry, and tubular
//! neighborhood (chart) coordinates.
//!
//! Curves are truncated Fourier series X₀: 𝕋¹ → ℝ², s ∈ [0,1). The
//! orientation is normalized at construction so that the parametrization is
//! counterclockwise; then n(s) = R₉₀τ(s) (rotation by +90°) points from the
//! outside region Ω⁻ into the enclosed region Ω⁺, the signed distance d_Γ is
//! positive in Ω⁺, and a circle of radius R enclosing Ω⁺ has curvature
//! H = 1/R. These three conventions interlock and are pinned by tests; all
//! downstream sign bookkeeping (Gibbs–Thomson, jump brackets, normal
//! velocity V = −∂_t d_Γ) relies on them.

use crate::field::{Centering, ScalarField};
use crate::{InterlimitError, Result};
use std::io::{BufRead, Write};
use std::path::Path;

/// Largest admissible number of Fourier modes per coordinate.
pub const MAX_FOURIER_MODES: usize = 32;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Wrap a parameter value into [0, 1).
#[inline]
#[must_use]
pub fn wrap_param(s: f64) -> f64 {
    s - s.floor()
}

/// Closed curve given by truncated Fourier series per coordinate:
/// x(s) = ax[0] + Σ_k ax[k] cos(2πks) + bx[k] sin(2πks), likewise y(s).
#[derive(Debug, Clone)]
pub struct InterfaceCurve {
    ax: Vec<f64>,
    bx: Vec<f64>,
    ay: Vec<f64>,
    by: Vec<f64>,
    /// True if the input parametrization was clockwise and got flipped
    /// (s ↦ −s, i.e. sine coefficients negated) during normalization.
    reversed: bool,
    /// Number of cached uniform samples.
    n_s: usize,
    /// X₀(s_j) at s_j = j/n_s.
    samples: Vec<(f64, f64)>,
    /// ∂_sX₀(s_j).
    d_samples: Vec<(f64, f64)>,
}

impl InterfaceCurve {
    /// Validate and build a curve from Fourier coefficients (index k, with
    /// `bx[0]`/`by[0]` ignored). Checks mode count, immersion on samples,
    /// and simplicity (pairwise segment intersection on the sample polygon);
    /// normalizes orientation to counterclockwise.
    pub fn new(
        ax: Vec<f64>,
        bx: Vec<f64>,
        ay: Vec<f64>,
        by: Vec<f64>,
        n_s: usize,
    ) -> Result<Self> {
        let kmax = ax.len().saturating_sub(1);
        if ax.len() != bx.len() || ax.len() != ay.len() || ax.len() != by.len() || ax.is_empty() {
            return Err(InterlimitError::Config(
                "curve coefficient vectors must share a common length ≥ 1".into(),
            ));
        }
        if kmax > MAX_FOURIER_MODES {
            return Err(InterlimitError::Config(format!(
                "curve uses {kmax} Fourier modes, maximum is {MAX_FOURIER_MODES}"
            )));
        }
        if n_s < 16.max(8 * kmax) {
            return Err(InterlimitError::Config(format!(
                "curve sampling n_s = {n_s} too coarse for {kmax} modes"
            )));
        }
        let mut curve = InterfaceCurve {
            ax,
            bx,
            ay,
            by,
            reversed: false,
            n_s,
            samples: Vec::new(),
            d_samples: Vec::new(),
        };
        curve.resample();
        // Orientation: make the sample polygon counterclockwise (positive
        // shoelace area) so that R₉₀τ points into the enclosed region.
        let area = curve.polygon_area();
        if area == 0.0 {
            return Err(InterlimitError::Config(
                "curve encloses no area (degenerate)".into(),
            ));
        }
        if area < 0.0 {
            for b in curve.bx.iter_mut().chain(curve.by.iter_mut()) {
                *b = -*b;
            }
            curve.reversed = true;
            curve.resample();
        }
        // Immersion on samples.
        for (j, &(dx, dy)) in curve.d_samples.iter().enumerate() {
            if (dx * dx + dy * dy).sqrt() <= 1e-12 {
                return Err(InterlimitError::Config(format!(
                    "degenerate parametrization: |∂_sX₀| ≈ 0 at s = {}",
                    j as f64 / n_s as f64
                )));
            }
        }
        // Simplicity: no proper intersection between non-adjacent segments
        // of the sample polygon.
        if curve.polygon_self_intersects() {
            return Err(InterlimitError::Config(
                "curve is not simple (sample polygon self-intersects)".into(),
            ));
        }
        Ok(curve)
    }

    /// Circle of radius `r` around `center`, counterclockwise.
    pub fn circle(center: (f64, f64), r: f64, n_s: usize) -> Result<Self> {
        if r <= 0.0 {
            return Err(InterlimitError::Config("circle radius must be positive".into()));
        }
        let ax = vec![center.0, r];
        let bx = vec![0.0, 0.0];
        let ay = vec![center.1, 0.0];
        let by = vec![0.0, r];
        Self::new(ax, bx, ay, by, n_s)
    }

    /// Radially perturbed circle r(s) = R(1 + a cos(2πms)), exact Fourier
    /// coefficients via product-to-sum identities.
    pub fn perturbed_circle(
        center: (f64, f64),
        r: f64,
        mode: usize,
        amplitude: f64,
        n_s: usize,
    ) -> Result<Self> {
        if mode == 0 || mode + 1 > MAX_FOURIER_MODES {
            return Err(InterlimitError::Config(format!(
                "perturbation mode {mode} out of range"
            )));
        }
        let kmax = mode + 1;
        let mut ax = vec![0.0; kmax + 1];
        let bx = vec![0.0; kmax + 1];
        let mut ay = vec![0.0; kmax + 1];
        let mut by = vec![0.0; kmax + 1];
        ax[0] = center.0;
        ay[0] = center.1;
        ax[1] += r;
        by[1] += r;
        let half = 0.5 * amplitude * r;
        // r(s)cos = R cos(2πs) + aR/2 [cos(2π(m+1)s) + cos(2π(m−1)s)]
        ax[mode + 1] += half;
        if mode >= 2 {
            ax[mode - 1] += half;
        } else {
            // m = 1: cos(0·) term is a constant shift.
            ax[0] += half;
        }
        // r(s)sin = R sin(2πs) + aR/2 [sin(2π(m+1)s) − sin(2π(m−1)s)]
        by[mode + 1] += half;
        if mode >= 2 {
            by[mode - 1] -= half;
        }
        Self::new(ax, bx, ay, by, n_s)
    }

    fn resample(&mut self) {
        self.samples = (0..self.n_s)
            .map(|j| self.point(j as f64 / self.n_s as f64))
            .collect();
        self.d_samples = (0..self.n_s)
            .map(|j| self.dpoint(j as f64 / self.n_s as f64))
            .collect();
    }

    fn polygon_area(&self) -> f64 {
        let n = self.samples.len();
        let mut a = 0.0;
        for j in 0..n {
            let (x0, y0) = self.samples[j];
            let (x1, y1) = self.samples[(j + 1) % n];
            a += x0 * y1 - x1 * y0;
        }
        0.5 * a
    }

    fn polygon_self_intersects(&self) -> bool {
        let n = self.samples.len();
        let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| -> f64 {
            (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
        };
        for i in 0..n {
            let a = self.samples[i];
            let b = self.samples[(i + 1) % n];
            for j in (i + 2)..n {
                // Skip the wraparound-adjacent pair (last segment vs first).
                if i == 0 && j == n - 1 {
                    continue;
                }
                let c = self.samples[j];
                let d = self.samples[(j + 1) % n];
                let o1 = orient(a, b, c);
                let o2 = orient(a, b, d);
                let o3 = orient(c, d, a);
                let o4 = orient(c, d, b);
                if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                    return true;
                }
            }
        }
        false
    }

    /// Highest Fourier mode index.
    #[must_use]
    pub fn kmax(&self) -> usize {
        self.ax.len() - 1
    }

    /// Whether orientation normalization flipped the input parametrization.
    #[must_use]
    pub fn reversed(&self) -> bool {
        self.reversed
    }

    /// Number of cached uniform samples.
    #[must_use]
    pub fn n_samples(&self) -> usize {
        self.n_s
    }

    /// Cached point samples X₀(j/n_s).
    #[must_use]
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// X₀(s).
    #[must_use]
    pub fn point(&self, s: f64) -> (f64, f64) {
        let mut x = self.ax[0];
        let mut y = self.ay[0];
        for k in 1..self.ax.len() {
            let (sn, cs) = (TWO_PI * k as f64 * s).sin_cos();
            x += self.ax[k] * cs + self.bx[k] * sn;
            y += self.ay[k] * cs + self.by[k] * sn;
        }
        (x, y)
    }

    /// ∂_sX₀(s).
    #[must_use]
    pub fn dpoint(&self, s: f64) -> (f64, f64) {
        let mut x = 0.0;
        let mut y = 0.0;
        for k in 1..self.ax.len() {
            let w = TWO_PI * k as f64;
            let (sn, cs) = (w * s).sin_cos();
            x += w * (-self.ax[k] * sn + self.bx[k] * cs);
            y += w * (-self.ay[k] * sn + self.by[k] * cs);
        }
        (x, y)
    }

    /// ∂_ssX₀(s).
    #[must_use]
    pub fn ddpoint(&self, s: f64) -> (f64, f64) {
        let mut x = 0.0;
        let mut y = 0.0;
        for k in 1..self.ax.len() {
            let w = TWO_PI * k as f64;
            let (sn, cs) = (w * s).sin_cos();
            x -= w * w * (self.ax[k] * cs + self.bx[k] * sn);
            y -= w * w * (self.ay[k] * cs + self.by[k] * sn);
        }
        (x, y)
    }

    /// Parametrization speed |∂_sX₀(s)|.
    #[must_use]
    pub fn speed(&self, s: f64) -> f64 {
        let (dx, dy) = self.dpoint(s);
        (dx * dx + dy * dy).sqrt()
    }

    /// Unit tangent and unit normal n = R₉₀τ (points into the enclosed
    /// region Ω⁺). Errors on degenerate parametrization.
    pub fn tangent_normal(&self, s: f64) -> Result<((f64, f64), (f64, f64))> {
        let (dx, dy) = self.dpoint(s);
        let q = (dx * dx + dy * dy).sqrt();
        if q <= 1e-12 {
            return Err(InterlimitError::Config(format!(
                "degenerate parametrization: |∂_sX₀({s})| ≤ 1e-12"
            )));
        }
        let tau = (dx / q, dy / q);
        Ok((tau, (-tau.1, tau.0)))
    }

    /// Signed curvature H(s); for a circle of radius R enclosing Ω⁺ this is
    /// +1/R (equivalently H = −Δd_Γ on Γ).
    pub fn curvature(&self, s: f64) -> Result<f64> {
        let (dx, dy) = self.dpoint(s);
        let q2 = dx * dx + dy * dy;
        if q2.sqrt() <= 1e-12 {
            return Err(InterlimitError::Config(format!(
                "degenerate parametrization: |∂_sX₀({s})| ≤ 1e-12"
            )));
        }
        let (ddx, ddy) = self.ddpoint(s);
        Ok((dx * ddy - dy * ddx) / (q2 * q2.sqrt()))
    }

    /// Maximum |H| over the cached samples.
    #[must_use]
    pub fn max_abs_curvature(&self) -> f64 {
        (0..self.n_s)
            .map(|j| self.curvature(j as f64 / self.n_s as f64).map_or(f64::INFINITY, f64::abs))
            .fold(0.0, f64::max)
    }

    /// Curve length ∫₀¹ |∂_sX₀| ds (trapezoid over the uniform samples,
    /// spectrally accurate for smooth curves).
    #[must_use]
    pub fn length(&self) -> f64 {
        self.d_samples
            .iter()
            .map(|&(dx, dy)| (dx * dx + dy * dy).sqrt())
            .sum::<f64>()
            / self.n_s as f64
    }

    /// Minimal self-distance: smallest chord |X₀(s_i) − X₀(s_j)| over sample
    /// pairs whose arc separation exceeds the chord by more than the factor
    /// π/2 (the antipodal-circle ratio). Pairs that are close simply because
    /// they are neighbors along the curve are excluded — those are governed
    /// by the curvature bound — so this detects thin necks only. Returns
    /// +∞ when no pair qualifies (e.g. any circle).
    #[must_use]
    pub fn min_self_distance(&self) -> f64 {
        let n = self.n_s;
        // Cumulative arc length at the samples (midpoint rule per segment).
        let mut cum = vec![0.0; n + 1];
        for j in 0..n {
            let (dx, dy) = self.d_samples[j];
            cum[j + 1] = cum[j] + (dx * dx + dy * dy).sqrt() / n as f64;
        }
        let total = cum[n];
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let arc = (cum[j] - cum[i]).min(total - (cum[j] - cum[i]));
                let (xi, yi) = self.samples[i];
                let (xj, yj) = self.samples[j];
                let chord = ((xi - xj) * (xi - xj) + (yi - yj) * (yi - yj)).sqrt();
                if arc > 1.6 * chord && chord < best {
                    best = chord;
                }
            }
        }
        best
    }

    /// Minimal distance from the curve samples to the boundary of [0, l]².
    #[must_use]
    pub fn min_distance_to_square_boundary(&self, l: f64) -> f64 {
        self.samples
            .iter()
            .map(|&(x, y)| x.min(l - x).min(y).min(l - y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Export Fourier coefficients as CSV `k,ax,bx,ay,by`.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "k,ax,bx,ay,by")?;
        for k in 0..self.ax.len() {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                k, self.ax[k], self.bx[k], self.ay[k], self.by[k]
            )?;
        }
        Ok(())
    }

    /// Import a curve from the CSV written by [`InterfaceCurve::to_csv`].
    pub fn from_csv(path: &Path, n_s: usize) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut ax = Vec::new();
        let mut bx = Vec::new();
        let mut ay = Vec::new();
        let mut by = Vec::new();
        for (ln, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if ln == 0 {
                if line.trim() != "k,ax,bx,ay,by" {
                    return Err(InterlimitError::Io(format!(
                        "{}: bad curve CSV header",
                        path.display()
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(InterlimitError::Io(format!(
                    "{}:{}: expected k,ax,bx,ay,by",
                    path.display(),
                    ln + 1
                )));
            }
            let k: usize = cols[0].trim().parse().map_err(|e| {
                InterlimitError::Io(format!("{}:{}: {}", path.display(), ln + 1, e))
            })?;
            if k != ax.len() {
                return Err(InterlimitError::Io(format!(
                    "{}:{}: modes must be listed in order 0,1,…",
                    path.display(),
                    ln + 1
                )));
            }
            let mut vals = [0.0f64; 4];
            for (slot, col) in vals.iter_mut().zip(&cols[1..]) {
                *slot = col.trim().parse().map_err(|e| {
                    InterlimitError::Io(format!("{}:{}: {}", path.display(), ln + 1, e))
                })?;
            }
            ax.push(vals[0]);
            bx.push(vals[1]);
            ay.push(vals[2]);
            by.push(vals[3]);
        }
        Self::new(ax, bx, ay, by, n_s)
    }
}

/// Result of a nearest-point query against a chart's curve.
#[derive(Debug, Clone, Copy)]
pub struct NearestPoint {
    /// Recovered curve parameter S(x) ∈ [0, 1).
    pub s: f64,
    /// Projected point X₀(S(x)).
    pub point: (f64, f64),
    /// Signed distance d_Γ(x): positive in the enclosed region Ω⁺.
    pub signed: f64,
    /// Newton refinement converged (otherwise the dense-sample fallback
    /// value is reported).
    pub newton_converged: bool,
    /// |d_Γ(x)| < 2δ, i.e. x lies in the chart's tube Γ(2δ).
    pub in_tube: bool,
}

/// Tubular-neighborhood chart Γ(2δ) around a curve, with nearest-point
/// projection accelerated by the curve's dense sampling plus Newton
/// refinement on (x − X₀(s))·∂_sX₀(s) = 0.
#[derive(Debug, Clone)]
pub struct TubularChart {
    curve: InterfaceCurve,
    delta: f64,
    /// Bounding box of the samples inflated by 2δ: (xmin, xmax, ymin, ymax).
    bbox: (f64, f64, f64, f64),
}

impl TubularChart {
    /// Validate the projection invariants: 2δ < 1/max|H| and 2δ < half the
    /// minimal self-distance of the curve.
    pub fn new(curve: InterfaceCurve, delta: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(InterlimitError::Config("chart half-width δ must be positive".into()));
        }
        let max_h = curve.max_abs_curvature();
        if 2.0 * delta >= 1.0 / max_h {
            return Err(InterlimitError::Config(format!(
                "tube too wide: 2δ = {} exceeds curvature radius bound {}",
                2.0 * delta,
                1.0 / max_h
            )));
        }
        let min_self = curve.min_self_distance();
        if 2.0 * delta >= 0.5 * min_self {
            return Err(InterlimitError::Config(format!(
                "tube too wide: 2δ = {} exceeds half the minimal self-distance {}",
                2.0 * delta,
                0.5 * min_self
            )));
        }
        let mut bbox = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in curve.samples() {
            bbox.0 = bbox.0.min(x);
            bbox.1 = bbox.1.max(x);
            bbox.2 = bbox.2.min(y);
            bbox.3 = bbox.3.max(y);
        }
        bbox.0 -= 2.0 * delta;
        bbox.1 += 2.0 * delta;
        bbox.2 -= 2.0 * delta;
        bbox.3 += 2.0 * delta;
        Ok(TubularChart { curve, delta, bbox })
    }

    #[must_use]
    pub fn curve(&self) -> &InterfaceCurve {
        &self.curve
    }

    /// Tube half-width parameter δ (the chart covers Γ(2δ) = {|d_Γ| < 2δ}).
    #[must_use]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Whether x lies inside the sample bounding box inflated by 2δ.
    #[must_use]
    pub fn in_bbox(&self, x: (f64, f64)) -> bool {
        x.0 >= self.bbox.0 && x.0 <= self.bbox.1 && x.1 >= self.bbox.2 && x.1 <= self.bbox.3
    }

    /// Nearest-point projection: coarse argmin over the cached samples, then
    /// ≤ 20 Newton steps on g(s) = (x − X₀(s))·∂_sX₀(s) = 0 with step
    /// tolerance 1e−12. On Newton failure the dense-sample values are
    /// returned with `newton_converged = false`.
    #[must_use]
    pub fn project(&self, x: (f64, f64)) -> NearestPoint {
        let c = &self.curve;
        let n = c.n_samples();
        let mut j0 = 0usize;
        let mut best = f64::INFINITY;
        for (j, &(px, py)) in c.samples().iter().enumerate() {
            let d2 = (x.0 - px) * (x.0 - px) + (x.1 - py) * (x.1 - py);
            if d2 < best {
                best = d2;
                j0 = j;
            }
        }
        let mut s = j0 as f64 / n as f64;
        let mut converged = false;
        for _ in 0..20 {
            let p = c.point(s);
            let dp = c.dpoint(s);
            let ddp = c.ddpoint(s);
            let rx = x.0 - p.0;
            let ry = x.1 - p.1;
            let g = rx * dp.0 + ry * dp.1;
            let gp = -(dp.0 * dp.0 + dp.1 * dp.1) + rx * ddp.0 + ry * ddp.1;
            if gp.abs() < 1e-300 {
                break;
            }
            let step = g / gp;
            s = wrap_param(s - step);
            if step.abs() < 1e-12 {
                converged = true;
                break;
            }
        }
        let (s, point) = if converged {
            (s, c.point(s))
        } else {
            (j0 as f64 / n as f64, c.samples()[j0])
        };
        // Orthogonality of x − X₀(s*) to τ makes (x − X₀)·n the signed
        // distance; the sign is positive on the n (enclosed) side.
        let signed = match c.tangent_normal(s) {
            Ok((_, nrm)) => (x.0 - point.0) * nrm.0 + (x.1 - point.1) * nrm.1,
            Err(_) => f64::NAN,
        };
        NearestPoint {
            s,
            point,
            signed,
            newton_converged: converged,
            in_tube: signed.abs() < 2.0 * self.delta,
        }
    }

    /// Signed distance d_Γ(x) (positive inside Ω⁺); accurate to the Newton
    /// tolerance inside the tube, dense-sample accurate far away.
    #[must_use]
    pub fn signed_distance(&self, x: (f64, f64)) -> f64 {
        self.project(x).signed
    }

    /// Signed distance clamped to ±2δ; the flag reports whether the clamp
    /// was applied (x outside Γ(2δ) or outside the bounding box).
    #[must_use]
    pub fn signed_distance_clamped(&self, x: (f64, f64)) -> (f64, bool) {
        let w = 2.0 * self.delta;
        if !self.in_bbox(x) {
            // Far query: sign from the nearest sample, magnitude clamped.
            let d = self.signed_distance(x);
            return (d.clamp(-w, w), true);
        }
        let d = self.signed_distance(x);
        if d.abs() < w {
            (d, false)
        } else {
            (d.clamp(-w, w), true)
        }
    }

    /// Chart coordinates (r, s) = (d_Γ(x), S(x)); errors if |d_Γ(x)| ≥ 2δ.
    pub fn chart_coords(&self, x: (f64, f64)) -> Result<(f64, f64)> {
        let np = self.project(x);
        if !np.in_tube {
            return Err(InterlimitError::Config(format!(
                "point ({}, {}) outside the chart tube Γ(2δ), d_Γ = {}",
                x.0, x.1, np.signed
            )));
        }
        Ok((np.signed, np.s))
    }

    /// Chart map X(r, s) = X₀(s) + r·n(s).
    #[must_use]
    pub fn chart_point(&self, r: f64, s: f64) -> (f64, f64) {
        let p = self.curve.point(s);
        let (_, nrm) = self
            .curve
            .tangent_normal(s)
            .expect("validated curve has no degenerate samples");
        (p.0 + r * nrm.0, p.1 + r * nrm.1)
    }

    /// Chart Jacobian J(r, s) = |∂_sX₀(s)|·(1 − H(s)r) > 0 for |r| < 2δ
    /// (the determinant of D_{(s,r)}X; for a circle of radius R this is
    /// 2πR(1 − r/R) under the inward-normal convention).
    pub fn jacobian(&self, r: f64, s: f64) -> Result<f64> {
        if r.abs() >= 2.0 * self.delta {
            return Err(InterlimitError::Config(format!(
                "jacobian queried outside the tube: |r| = {} ≥ 2δ = {}",
                r.abs(),
                2.0 * self.delta
            )));
        }
        let q = self.curve.speed(s);
        let h = self.curve.curvature(s)?;
        Ok(q * (1.0 - h * r))
    }

    /// Stretched variable ρ(x) = (d_Γ(x) − ε·h(S(x)))/ε; errors outside the
    /// tube.
    pub fn stretched_rho(&self, x: (f64, f64), eps: f64, h: &dyn Fn(f64) -> f64) -> Result<f64> {
        if eps <= 0.0 {
            return Err(InterlimitError::Config("stretched variable needs ε > 0".into()));
        }
        let (r, s) = self.chart_coords(x)?;
        Ok((r - eps * h(s)) / eps)
    }
}

/// Tangential projection of the discrete gradient of a node-centered field:
/// ∇^Γu(x) = (I − n⊗n)∇u(x) with n = n(S(x)). The query point is snapped to
/// the nearest grid node; central differences require an interior node.
pub fn surface_gradient(
    u: &ScalarField,
    chart: &TubularChart,
    x: (f64, f64),
) -> Result<(f64, f64)> {
    if u.centering != Centering::Node {
        return Err(InterlimitError::Config(
            "surface_gradient expects a node-centered field".into(),
        ));
    }
    let h = u.grid.h();
    let i = (x.0 / h).round() as isize;
    let j = (x.1 / h).round() as isize;
    if i < 1 || j < 1 || i as usize >= u.nx - 1 || j as usize >= u.ny - 1 {
        return Err(InterlimitError::Config(format!(
            "point ({}, {}) too close to the grid boundary for the gradient stencil",
            x.0, x.1
        )));
    }
    let (i, j) = (i as usize, j as usize);
    let node = (u.grid.node(i), u.grid.node(j));
    let np = chart.project(node);
    if !np.in_tube {
        return Err(InterlimitError::Config(format!(
            "point ({}, {}) outside the chart tube Γ(2δ)",
            x.0, x.1
        )));
    }
    let gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * h);
    let gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * h);
    let (_, nrm) = chart.curve().tangent_normal(np.s)?;
    let ndot = nrm.0 * gx + nrm.1 * gy;
    Ok((gx - ndot * nrm.0, gy - ndot * nrm.1))
}
