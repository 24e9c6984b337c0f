//! Double-well potential f, optimal profile θ₀, surface tension σ, cut-off ξ.
//!
//! The optimal profile is the unique increasing heteroclinic of
//! −θ₀″ + f′(θ₀) = 0 with θ₀(±∞) = ±1, θ₀(0) = 0. For the standard quartic
//! f(s) = ¼(s²−1)² the closed form θ₀(ρ) = tanh(ρ/√2) applies; other symmetric
//! quartics are handled through the first-order reduction θ₀′ = √(2f(θ₀)).

use crate::tolerances;
use crate::{InterlimitError, Result};
use std::io::{BufRead, Write};
use std::path::Path;

/// Quartic double-well potential f(s) = a₄s⁴ + a₃s³ + a₂s² + a₁s + a₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub a4: f64,
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl Potential {
    /// The standard quartic f(s) = ¼(s²−1)² = ¼s⁴ − ½s² + ¼.
    #[must_use]
    pub fn standard_quartic() -> Self {
        Potential { a4: 0.25, a3: 0.0, a2: -0.5, a1: 0.0, a0: 0.25 }
    }

    /// Whether this is exactly the standard quartic (closed forms apply).
    #[must_use]
    pub fn is_standard_quartic(&self) -> bool {
        *self == Potential::standard_quartic()
    }

    /// f(s)
    #[must_use]
    pub fn f(&self, s: f64) -> f64 {
        (((self.a4 * s + self.a3) * s + self.a2) * s + self.a1) * s + self.a0
    }

    /// f′(s)
    #[must_use]
    pub fn df(&self, s: f64) -> f64 {
        ((4.0 * self.a4 * s + 3.0 * self.a3) * s + 2.0 * self.a2) * s + self.a1
    }

    /// f″(s)
    #[must_use]
    pub fn d2f(&self, s: f64) -> f64 {
        (12.0 * self.a4 * s + 6.0 * self.a3) * s + 2.0 * self.a2
    }

    /// f‴(s)
    #[must_use]
    pub fn d3f(&self, s: f64) -> f64 {
        24.0 * self.a4 * s + 6.0 * self.a3
    }

    /// f⁗ (constant for a quartic)
    #[must_use]
    pub fn d4f(&self) -> f64 {
        24.0 * self.a4
    }

    /// Exponential decay rate of the profile tails: 0.9·min(√f″(−1), √f″(1)).
    ///
    /// Any rate strictly inside (0, min√f″(±1)) is admissible for the tail
    /// model; 0.9 of the bound keeps the fitted tail amplitude finite.
    #[must_use]
    pub fn decay_rate(&self) -> f64 {
        0.9 * self.d2f(-1.0).min(self.d2f(1.0)).max(0.0).sqrt()
    }
}

/// Names of the double-well conditions a [`Potential`] can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialViolation {
    /// f(1) ≠ 0 or f(−1) ≠ 0
    WellsNotZero,
    /// f′(1) ≠ 0 or f′(−1) ≠ 0
    WellsNotCritical,
    /// f″(±1) ≤ 0
    WellsNotConvex,
    /// odd coefficients nonzero (f(s) ≠ f(−s))
    NotSymmetric,
    /// f⁗ ≤ 0
    FourthDerivativeNotPositive,
    /// f(s) ≤ 0 somewhere strictly between the wells
    NotPositiveBetweenWells,
}

/// Check all double-well conditions; the report is empty iff the potential is
/// admissible. Conditions are evaluated exactly (polynomial arithmetic) up to
/// a fixed roundoff allowance.
#[must_use]
pub fn validate_potential(p: &Potential) -> Vec<PotentialViolation> {
    const EPS: f64 = 1e-12;
    let mut report = Vec::new();
    if p.f(1.0).abs() > EPS || p.f(-1.0).abs() > EPS {
        report.push(PotentialViolation::WellsNotZero);
    }
    if p.df(1.0).abs() > EPS || p.df(-1.0).abs() > EPS {
        report.push(PotentialViolation::WellsNotCritical);
    }
    if p.d2f(1.0) <= EPS || p.d2f(-1.0) <= EPS {
        report.push(PotentialViolation::WellsNotConvex);
    }
    if p.a3.abs() > EPS || p.a1.abs() > EPS {
        report.push(PotentialViolation::NotSymmetric);
    }
    if p.d4f() <= EPS {
        report.push(PotentialViolation::FourthDerivativeNotPositive);
    }
    // Positivity strictly between the wells, sampled densely; the endpoints
    // themselves are the double zeros.
    let mut positive = true;
    for k in 1..2000 {
        let s = -1.0 + 2.0 * (k as f64) / 2000.0;
        if s.abs() > 1.0 - 1e-9 {
            continue;
        }
        if p.f(s) <= 0.0 {
            positive = false;
            break;
        }
    }
    if !positive {
        report.push(PotentialViolation::NotPositiveBetweenWells);
    }
    report
}

/// Sampled optimal profile with derivatives, tail metadata, and provenance.
#[derive(Debug, Clone)]
pub struct Profile {
    /// Uniform grid ρ_i over [−ρ_max, ρ_max].
    pub rho: Vec<f64>,
    /// θ₀(ρ_i)
    pub theta0: Vec<f64>,
    /// θ₀′(ρ_i)
    pub dtheta0: Vec<f64>,
    /// θ₀″(ρ_i)
    pub ddtheta0: Vec<f64>,
    /// Tail decay rate α of |θ₀² − 1| + |θ₀′| ≤ C_tail·e^{−α|ρ|}.
    pub alpha: f64,
    /// Fitted tail amplitude.
    pub c_tail: f64,
    /// True when the tanh closed form was used.
    pub analytic: bool,
}

impl Profile {
    /// Grid spacing of the uniform ρ grid.
    #[must_use]
    pub fn h(&self) -> f64 {
        self.rho[1] - self.rho[0]
    }

    /// θ₀ at an arbitrary ρ by cubic Hermite interpolation of the samples
    /// (values and stored derivatives); clamps to ±1 outside the grid using
    /// the tail model sign.
    #[must_use]
    pub fn eval_theta0(&self, rho: f64) -> f64 {
        let n = self.rho.len();
        let (lo, hi) = (self.rho[0], self.rho[n - 1]);
        if rho <= lo {
            return self.theta0[0] + (rho - lo) * self.dtheta0[0];
        }
        if rho >= hi {
            return self.theta0[n - 1] + (rho - hi) * self.dtheta0[n - 1];
        }
        let h = self.h();
        let i = (((rho - lo) / h).floor() as usize).min(n - 2);
        let t = (rho - (lo + i as f64 * h)) / h;
        let (y0, y1) = (self.theta0[i], self.theta0[i + 1]);
        let (m0, m1) = (self.dtheta0[i] * h, self.dtheta0[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    /// θ₀′ at an arbitrary ρ (Hermite on the derivative samples with θ₀″ as
    /// slope data; linear tail decay outside the window).
    #[must_use]
    pub fn eval_dtheta0(&self, rho: f64) -> f64 {
        let n = self.rho.len();
        let (lo, hi) = (self.rho[0], self.rho[n - 1]);
        if rho <= lo {
            return self.dtheta0[0] * (self.alpha * (rho - lo)).exp();
        }
        if rho >= hi {
            return self.dtheta0[n - 1] * (-self.alpha * (rho - hi)).exp();
        }
        let h = self.h();
        let i = (((rho - lo) / h).floor() as usize).min(n - 2);
        let t = (rho - (lo + i as f64 * h)) / h;
        let (y0, y1) = (self.dtheta0[i], self.dtheta0[i + 1]);
        let (m0, m1) = (self.ddtheta0[i] * h, self.ddtheta0[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    /// Export as CSV with header `rho,theta0,dtheta0,ddtheta0`.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "rho,theta0,dtheta0,ddtheta0")?;
        for i in 0..self.rho.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.rho[i], self.theta0[i], self.dtheta0[i], self.ddtheta0[i]
            )?;
        }
        Ok(())
    }

    /// Import from CSV produced by [`Profile::to_csv`]. The tail metadata is
    /// re-fitted for the given potential; `analytic` is conservatively false.
    pub fn from_csv(path: &Path, p: &Potential) -> Result<Profile> {
        let file = std::fs::File::open(path)?;
        let mut rho = Vec::new();
        let mut theta0 = Vec::new();
        let mut dtheta0 = Vec::new();
        let mut ddtheta0 = Vec::new();
        for (ln, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if ln == 0 {
                if line.trim() != "rho,theta0,dtheta0,ddtheta0" {
                    return Err(InterlimitError::Io(format!(
                        "{}: bad profile CSV header",
                        path.display()
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(InterlimitError::Io(format!(
                    "{}:{}: expected 4 columns",
                    path.display(),
                    ln + 1
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| {
                    InterlimitError::Io(format!("{}:{}: {}", path.display(), ln + 1, e))
                })
            };
            rho.push(parse(cols[0])?);
            theta0.push(parse(cols[1])?);
            dtheta0.push(parse(cols[2])?);
            ddtheta0.push(parse(cols[3])?);
        }
        if rho.len() < 3 {
            return Err(InterlimitError::Io(format!(
                "{}: profile too short",
                path.display()
            )));
        }
        let alpha = p.decay_rate();
        let c_tail = fit_tail(&rho, &theta0, &dtheta0, alpha);
        Ok(Profile { rho, theta0, dtheta0, ddtheta0, alpha, c_tail, analytic: false })
    }
}

fn fit_tail(rho: &[f64], theta0: &[f64], dtheta0: &[f64], alpha: f64) -> f64 {
    let mut c = 0.0f64;
    for i in 0..rho.len() {
        let decay = ((theta0[i] * theta0[i] - 1.0).abs() + dtheta0[i].abs())
            * (alpha * rho[i].abs()).exp();
        c = c.max(decay);
    }
    c
}

/// Solve for the optimal profile on a uniform grid of `n` nodes over
/// [−ρ_max, ρ_max].
///
/// For the standard quartic the closed form θ₀ = tanh(ρ/√2) is used
/// (`analytic = true`); otherwise the first-order reduction θ₀′ = √(2f(θ₀))
/// is integrated from θ₀(0) = 0 with high-order substeps and mirrored by the
/// potential's symmetry.
pub fn solve_theta0(p: &Potential, rho_max: f64, n: usize) -> Result<Profile> {
    let report = validate_potential(p);
    if !report.is_empty() {
        return Err(InterlimitError::Config(format!(
            "potential violates double-well conditions: {report:?}"
        )));
    }
    if rho_max < 10.0 {
        return Err(InterlimitError::Config(format!(
            "rho_max = {rho_max} < 10 leaves too much profile tail outside the window"
        )));
    }
    if n < 1001 || n % 2 == 0 {
        return Err(InterlimitError::Config(format!(
            "profile grid n = {n} must be odd and at least 1001"
        )));
    }

    let h = 2.0 * rho_max / (n - 1) as f64;
    let rho: Vec<f64> = (0..n).map(|i| -rho_max + i as f64 * h).collect();

    let (theta0, dtheta0, ddtheta0, analytic) = if p.is_standard_quartic() {
        let s2 = std::f64::consts::SQRT_2;
        let th: Vec<f64> = rho.iter().map(|&r| (r / s2).tanh()).collect();
        // θ₀′ = (1 − θ₀²)/√2 and θ₀″ = f′(θ₀) = θ₀³ − θ₀ for the closed form.
        let dth: Vec<f64> = th.iter().map(|&t| (1.0 - t * t) / s2).collect();
        let ddth: Vec<f64> = th.iter().map(|&t| t * t * t - t).collect();
        (th, dth, ddth, true)
    } else {
        let half = integrate_profile_half(p, rho_max, (n - 1) / 2, h)?;
        // Mirror by oddness of θ₀ (the potential is symmetric).
        let m = (n - 1) / 2;
        let mut th = vec![0.0; n];
        let mut dth = vec![0.0; n];
        for k in 0..=m {
            th[m + k] = half[k];
            th[m - k] = -half[k];
            let d = (2.0 * p.f(half[k])).max(0.0).sqrt();
            dth[m + k] = d;
            dth[m - k] = d;
        }
        let ddth: Vec<f64> = th.iter().map(|&t| p.df(t)).collect();
        (th, dth, ddth, false)
    };

    let alpha = p.decay_rate();
    let c_tail = fit_tail(&rho, &theta0, &dtheta0, alpha);
    let profile =
        Profile { rho, theta0, dtheta0, ddtheta0, alpha, c_tail, analytic };

    // Invariants: monotone, pinned center, residual below tolerance.
    let m = (n - 1) / 2;
    if profile.theta0[m].abs() > tolerances::PROFILE_ODE_RESIDUAL_TOL {
        return Err(InterlimitError::Solver("profile center θ₀(0) ≠ 0".into()));
    }
    for i in 1..n {
        if profile.theta0[i] <= profile.theta0[i - 1] {
            return Err(InterlimitError::Solver(format!(
                "profile not strictly increasing at ρ = {}",
                profile.rho[i]
            )));
        }
    }
    for i in 0..n {
        let res = -profile.ddtheta0[i] + p.df(profile.theta0[i]);
        if res.abs() > tolerances::PROFILE_ODE_RESIDUAL_TOL {
            return Err(InterlimitError::Solver(format!(
                "profile ODE residual {res:.3e} at ρ = {}",
                profile.rho[i]
            )));
        }
    }
    Ok(profile)
}

/// Integrate θ′ = √(2f(θ)), θ(0) = 0 on [0, ρ_max] with `m` grid intervals of
/// width `h`, using classical RK4 with 32 substeps per interval. Near the well
/// the right-hand side vanishes linearly, so the integration is smooth; the
/// state is clamped into (−1, 1) to guard the square root.
fn integrate_profile_half(p: &Potential, _rho_max: f64, m: usize, h: f64) -> Result<Vec<f64>> {
    let rhs = |t: f64| (2.0 * p.f(t.clamp(-1.0, 1.0))).max(0.0).sqrt();
    let sub = 32;
    let dt = h / sub as f64;
    let mut out = Vec::with_capacity(m + 1);
    let mut t = 0.0f64;
    out.push(t);
    for _ in 0..m {
        for _ in 0..sub {
            let k1 = rhs(t);
            let k2 = rhs(t + 0.5 * dt * k1);
            let k3 = rhs(t + 0.5 * dt * k2);
            let k4 = rhs(t + dt * k3);
            t += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !(t.is_finite()) {
                return Err(InterlimitError::Solver(
                    "profile quadrature diverged (potential ill-conditioned)".into(),
                ));
            }
            if t >= 1.0 {
                t = 1.0 - 1e-16;
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// Surface tension σ = ½∫θ₀′² dρ by composite Simpson quadrature over the
/// profile grid plus the analytic exponential tail correction
/// ∫_{ρ>ρ_max} θ₀′² ≈ θ₀′(ρ_max)²/(2√f″(1)) on each side (decay model).
#[must_use]
pub fn sigma(pr: &Profile, p: &Potential) -> f64 {
    let n = pr.rho.len();
    let h = pr.h();
    let sq: Vec<f64> = pr.dtheta0.iter().map(|d| d * d).collect();
    // Composite Simpson (n odd).
    let mut s = sq[0] + sq[n - 1];
    for (i, &v) in sq.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let integral = s * h / 3.0;
    let rate_r = p.d2f(1.0).max(0.0).sqrt();
    let rate_l = p.d2f(-1.0).max(0.0).sqrt();
    let tail = if rate_r > 0.0 && rate_l > 0.0 {
        sq[n - 1] / (2.0 * rate_r) + sq[0] / (2.0 * rate_l)
    } else {
        0.0
    };
    0.5 * (integral + tail)
}

/// Planar-layer energy per unit interface length,
/// e₀ = ∫ (½θ₀′(ρ)² + f(θ₀(ρ))) dρ, by the same Simpson-plus-tail quadrature
/// as [`sigma`]. Equipartition ½θ₀′² = f(θ₀) along the optimal profile makes
/// e₀ = ∫θ₀′² dρ = 2σ; keeping both terms lets the quadrature serve as an
/// independent oracle for the concentrated energy E^ε → e₀·|Γ|.
#[must_use]
pub fn layer_energy_density(pr: &Profile, p: &Potential) -> f64 {
    let n = pr.rho.len();
    let h = pr.h();
    let en: Vec<f64> = pr
        .dtheta0
        .iter()
        .zip(pr.theta0.iter())
        .map(|(d, th)| 0.5 * d * d + p.f(*th))
        .collect();
    let mut s = en[0] + en[n - 1];
    for (i, &v) in en.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let integral = s * h / 3.0;
    let rate_r = p.d2f(1.0).max(0.0).sqrt();
    let rate_l = p.d2f(-1.0).max(0.0).sqrt();
    let tail = if rate_r > 0.0 && rate_l > 0.0 {
        en[n - 1] / (2.0 * rate_r) + en[0] / (2.0 * rate_l)
    } else {
        0.0
    };
    integral + tail
}

/// Quintic smoothstep s₂(t) = 6t⁵ − 15t⁴ + 10t³ clamped to [0, 1].
#[must_use]
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        ((6.0 * t - 15.0) * t + 10.0) * t * t * t
    }
}

/// Derivative of [`smoothstep`].
#[must_use]
pub fn smoothstep_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// C² cut-off: ξ = 1 on |s| ≤ δ, ξ = 0 on |s| ≥ 2δ, quintic-smoothstep blend
/// on each transition band. Satisfies 0 ≥ s·ξ′(s) ≥ −4 (the extremum of
/// −(1+t)·s₂′(t) is ≈ −2.85).
#[must_use]
pub fn cutoff_xi(s: f64, delta: f64) -> f64 {
    assert!(delta > 0.0, "cutoff_xi: δ must be positive");
    let a = s.abs();
    if a <= delta {
        1.0
    } else if a >= 2.0 * delta {
        0.0
    } else {
        1.0 - smoothstep((a - delta) / delta)
    }
}

/// Derivative ξ′(s) of [`cutoff_xi`] (closed form of the quintic band).
#[must_use]
pub fn cutoff_xi_deriv(s: f64, delta: f64) -> f64 {
    assert!(delta > 0.0, "cutoff_xi_deriv: δ must be positive");
    let a = s.abs();
    if a <= delta || a >= 2.0 * delta {
        0.0
    } else {
        -smoothstep_deriv((a - delta) / delta) / delta * s.signum()
    }
}

/// Monotone switch η with η = 0 on (−∞, −1], η = 1 on [1, ∞): the same quintic
/// smoothstep family rescaled to the band [−1, 1].
#[must_use]
pub fn switch_eta(rho: f64) -> f64 {
    smoothstep(0.5 * (rho + 1.0))
}
