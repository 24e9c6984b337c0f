//! Time integration of the coupled Stokes/Cahn–Hilliard system with energy
//! diagnostics.
//!
//! One step of the splitting scheme: the Cahn–Hilliard update is
//! semi-implicit convex splitting (−εΔc^{n+1} implicit, the nonlinearity
//! linearized around cⁿ with a stabilization s ≥ max|f″|/ε, convection
//! vⁿ·∇cⁿ explicit with upwind-biased second-order differences), solved
//! exactly per Fourier-sine mode; the stationary Stokes system is then
//! re-solved with the capillary force μ∇c of the new state, so every
//! [`State`] carries the velocity consistent with its own (c, μ). Boundary
//! rows c = −1, μ = 0 are enforced bitwise after every update.

use crate::dst::SineTransform;
use crate::field::{Centering, Grid, ScalarField, VectorField};
use crate::geometry::{InterfaceCurve, TubularChart};
use crate::potential::{cutoff_xi, Potential, Profile};
use crate::stokes::{korn_form_parts, velocity_grad_sq, StokesSolver};
use crate::tolerances::{CFL_LIMIT, MAX_ABS_C};
use crate::{InterlimitError, Result};

/// Parameters of a diffuse-interface run.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub grid: Grid,
    /// Interface width ε (length units).
    pub epsilon: f64,
    /// Slip coefficient α₀ > 0.
    pub alpha0: f64,
    /// Time step Δt.
    pub dt: f64,
    /// Final time T.
    pub t_final: f64,
    pub potential: Potential,
    /// Initial interface position.
    pub curve: InterfaceCurve,
    /// Tubular half-width δ of the initial-data chart.
    pub delta: f64,
    /// Admissible relative algebraic residual of the Stokes solves.
    pub stokes_tol: f64,
    /// Snapshot cadence in steps (0 = no snapshots).
    pub snapshot_every: usize,
}

impl SimParams {
    /// Documented default time step Δt = 0.1·ε·(L/N).
    #[must_use]
    pub fn default_dt(epsilon: f64, grid: Grid) -> f64 {
        0.1 * epsilon * grid.h()
    }

    /// Check the parameter invariants; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        let h = self.grid.h();
        if self.epsilon < 3.0 * h {
            return Err(InterlimitError::Config(format!(
                "ε = {} resolves fewer than 3 cells (h = {h}); refine the grid",
                self.epsilon
            )));
        }
        if self.epsilon < 5.0 * h {
            warnings.push(format!(
                "ε/h = {:.2} < 5: layer is marginally resolved",
                self.epsilon / h
            ));
        }
        if self.alpha0 <= 0.0 {
            return Err(InterlimitError::Config(format!(
                "slip coefficient α₀ must be positive (got {})",
                self.alpha0
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(InterlimitError::Config(format!(
                "time step Δt must be positive (got {})",
                self.dt
            )));
        }
        if self.t_final < self.dt {
            return Err(InterlimitError::Config(format!(
                "final time {} shorter than one step {}",
                self.t_final, self.dt
            )));
        }
        if self.delta <= 0.0 {
            return Err(InterlimitError::Config(format!(
                "tubular half-width δ must be positive (got {})",
                self.delta
            )));
        }
        let wall = self.curve.min_distance_to_square_boundary(self.grid.l);
        if wall <= 5.0 * self.delta {
            return Err(InterlimitError::Config(format!(
                "initial curve is {wall:.4} from ∂Ω; need > 5δ = {:.4}",
                5.0 * self.delta
            )));
        }
        let violations = crate::potential::validate_potential(&self.potential);
        if !violations.is_empty() {
            return Err(InterlimitError::Config(format!(
                "potential violates well assumptions: {violations:?}"
            )));
        }
        Ok(warnings)
    }
}

/// Discrete state of the coupled system at one time level: c and μ on grid
/// nodes, the MAC velocity, and the cell pressure.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub c: ScalarField,
    pub mu: ScalarField,
    pub v: VectorField,
    pub p: ScalarField,
}

/// Per-step telemetry.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// Δt·max|vⁿ|/h for the convection step.
    pub cfl: f64,
    /// True when the CFL number exceeds the guard (explicit convection).
    pub cfl_violation: bool,
    pub stokes_residual: f64,
    pub stokes_iterations: usize,
}

/// One diagnostics record (the `diagnostics.csv` column set).
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    /// ∫|∇μ|² of the current state (implicit dissipation channel).
    pub grad_mu_sq: f64,
    /// ∫|∇v|² of the previous state's velocity (the one that advected c).
    pub grad_v_sq: f64,
    /// α₀∫_{∂Ω}|v|² of the previous state's velocity.
    pub slip_sq: f64,
    /// ∫c dx (not conserved under these boundary conditions).
    pub mass: f64,
    pub max_velocity: f64,
    /// Length of the c = 0 level set by marching squares.
    pub interface_length: f64,
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,energy,grad_mu_sq,grad_v_sq,slip_sq,mass,max_velocity,interface_length";

impl DiagnosticsRow {
    #[must_use]
    pub fn csv_line(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.energy,
            self.grad_mu_sq,
            self.grad_v_sq,
            self.slip_sq,
            self.mass,
            self.max_velocity,
            self.interface_length
        )
    }
}

/// Ginzburg–Landau energy E = (ε/2)∫|∇c|² + ε⁻¹∫f(c), midpoint quadrature
/// (gradient from edge averages, f at the cell-interpolated value).
#[must_use]
pub fn phase_energy(c: &ScalarField, epsilon: f64, potential: &Potential) -> f64 {
    assert_eq!(c.centering, Centering::Node);
    let n = c.grid.n;
    let h = c.grid.h();
    let mut e = 0.0;
    for j in 0..n {
        for i in 0..n {
            let c00 = c.at(i, j);
            let c10 = c.at(i + 1, j);
            let c01 = c.at(i, j + 1);
            let c11 = c.at(i + 1, j + 1);
            let dx = (c10 - c00 + c11 - c01) / (2.0 * h);
            let dy = (c01 - c00 + c11 - c10) / (2.0 * h);
            let cm = 0.25 * (c00 + c10 + c01 + c11);
            e += (0.5 * epsilon * (dx * dx + dy * dy)
                + potential.f(cm) / epsilon)
                * h
                * h;
        }
    }
    e
}

/// Energy of a state under the given parameters.
#[must_use]
pub fn energy(st: &State, p: &SimParams) -> f64 {
    phase_energy(&st.c, p.epsilon, &p.potential)
}

/// Edge-based Dirichlet form ∫|∇u|² for a node field (boundary edges
/// included; equals the sine-spectral form when u vanishes on ∂Ω).
#[must_use]
pub fn node_grad_sq(u: &ScalarField) -> f64 {
    assert_eq!(u.centering, Centering::Node);
    let n = u.grid.n;
    let h = u.grid.h();
    let mut s = 0.0;
    for j in 0..=n {
        for i in 0..n {
            let d = (u.at(i + 1, j) - u.at(i, j)) / h;
            s += d * d * h * h;
        }
    }
    for j in 0..n {
        for i in 0..=n {
            let d = (u.at(i, j + 1) - u.at(i, j)) / h;
            s += d * d * h * h;
        }
    }
    s
}

/// Chemical potential μ = −εΔ_h c + ε⁻¹f′(c) at interior nodes (zero on
/// ∂Ω, matching the essential μ condition of the flow).
#[must_use]
pub fn chemical_potential(c: &ScalarField, epsilon: f64, potential: &Potential) -> ScalarField {
    assert_eq!(c.centering, Centering::Node);
    let n = c.grid.n;
    let h2 = c.grid.h() * c.grid.h();
    let mut mu = ScalarField::zeros(c.grid, Centering::Node);
    for j in 1..n {
        for i in 1..n {
            let lap = (c.at(i + 1, j) + c.at(i - 1, j) + c.at(i, j + 1) + c.at(i, j - 1)
                - 4.0 * c.at(i, j))
                / h2;
            mu.set(i, j, -epsilon * lap + potential.df(c.at(i, j)) / epsilon);
        }
    }
    mu
}

/// Capillary body force μ∇c at the velocity points, in the well-balanced
/// form μ_face·∇_h(c at cells): a constant μ yields an exact discrete
/// gradient, which the Stokes solver absorbs into the pressure (no spurious
/// currents). Wall-face entries stay zero (those rows carry the traction
/// condition).
#[must_use]
pub fn capillary_force(c: &ScalarField, mu: &ScalarField) -> (ScalarField, ScalarField) {
    assert_eq!(c.centering, Centering::Node);
    assert_eq!(mu.centering, Centering::Node);
    let grid = c.grid;
    let n = grid.n;
    let h = grid.h();
    let cell = |f: &ScalarField, i: usize, j: usize| {
        0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) + f.at(i + 1, j + 1))
    };
    let mut fx = ScalarField::zeros(grid, Centering::FaceX);
    let mut fy = ScalarField::zeros(grid, Centering::FaceY);
    for j in 0..n {
        for i in 1..n {
            let mu_face = 0.5 * (cell(mu, i - 1, j) + cell(mu, i, j));
            fx.set(i, j, mu_face * (cell(c, i, j) - cell(c, i - 1, j)) / h);
        }
    }
    for j in 1..n {
        for i in 0..n {
            let mu_face = 0.5 * (cell(mu, i, j - 1) + cell(mu, i, j));
            fy.set(i, j, mu_face * (cell(c, i, j) - cell(c, i, j - 1)) / h);
        }
    }
    (fx, fy)
}

/// Stabilization constant s = max|f″| over the reachable range, divided by
/// ε (recomputed per step from the current max|c|).
fn stabilization(c_max: f64, epsilon: f64, potential: &Potential) -> f64 {
    let m = c_max.max(1.0);
    let mut fpp = 0.0f64;
    for k in 0..=400 {
        let s = -m + 2.0 * m * k as f64 / 400.0;
        fpp = fpp.max(potential.d2f(s).abs());
    }
    fpp / epsilon
}

/// Upwind-biased second-order convection vⁿ·∇cⁿ at an interior node.
fn convection_at(c: &ScalarField, vn: (f64, f64), i: usize, j: usize) -> f64 {
    let n = c.grid.n;
    let h2 = 2.0 * c.grid.h();
    let (un, wn) = vn;
    let dcx = if un >= 0.0 && i >= 2 {
        (3.0 * c.at(i, j) - 4.0 * c.at(i - 1, j) + c.at(i - 2, j)) / h2
    } else if un < 0.0 && i + 2 <= n {
        (-3.0 * c.at(i, j) + 4.0 * c.at(i + 1, j) - c.at(i + 2, j)) / h2
    } else {
        (c.at(i + 1, j) - c.at(i - 1, j)) / h2
    };
    let dcy = if wn >= 0.0 && j >= 2 {
        (3.0 * c.at(i, j) - 4.0 * c.at(i, j - 1) + c.at(i, j - 2)) / h2
    } else if wn < 0.0 && j + 2 <= n {
        (-3.0 * c.at(i, j) + 4.0 * c.at(i, j + 1) - c.at(i, j + 2)) / h2
    } else {
        (c.at(i, j + 1) - c.at(i, j - 1)) / h2
    };
    un * dcx + wn * dcy
}

/// Semi-implicit convex-splitting Cahn–Hilliard update (the CH half of a
/// step): advances c one Δt under the velocity v and recovers the new μ,
/// both with exact boundary rows (c = −1, μ = 0). Solved per sine mode with
/// the lifted variable c̃ = c + 1.
pub fn cahn_hilliard_update(
    c: &ScalarField,
    v: &VectorField,
    p: &SimParams,
    dst: &mut SineTransform,
) -> Result<(ScalarField, ScalarField)> {
    let n = p.grid.n;
    let m = dst.m();
    let dt = p.dt;
    let eps = p.epsilon;
    let s = stabilization(c.max_abs(), eps, &p.potential);

    // r₁ = c̃ⁿ/Δt − vⁿ·∇cⁿ and w = ε⁻¹f′(cⁿ) − s·c̃ⁿ at interior nodes.
    let mut r1 = vec![0.0; m * m];
    let mut w = vec![0.0; m * m];
    for j in 1..n {
        for i in 1..n {
            let idx = (j - 1) * m + (i - 1);
            let cij = c.at(i, j);
            let conv = convection_at(c, v.at_node(i, j), i, j);
            r1[idx] = (cij + 1.0) / dt - conv;
            w[idx] = p.potential.df(cij) / eps - s * (cij + 1.0);
        }
    }
    dst.dst2(&mut r1);
    dst.dst2(&mut w);
    let mut mu_hat = vec![0.0; m * m];
    for ky in 1..=m {
        let ly = dst.lambda(ky);
        for kx in 1..=m {
            let lam = dst.lambda(kx) + ly;
            let idx = (ky - 1) * m + (kx - 1);
            let chat = (r1[idx] - lam * w[idx]) / (1.0 / dt + lam * (eps * lam + s));
            mu_hat[idx] = (eps * lam + s) * chat + w[idx];
            r1[idx] = chat; // reuse the buffer for ĉ
        }
    }
    dst.idst2(&mut r1);
    dst.idst2(&mut mu_hat);
    let mut c_new = ScalarField::zeros(p.grid, Centering::Node);
    for v in c_new.data.iter_mut() {
        *v = -1.0;
    }
    let mut mu_new = ScalarField::zeros(p.grid, Centering::Node);
    for j in 1..n {
        for i in 1..n {
            let idx = (j - 1) * m + (i - 1);
            c_new.set(i, j, r1[idx] - 1.0);
            mu_new.set(i, j, mu_hat[idx]);
        }
    }
    Ok((c_new, mu_new))
}

/// A configured simulation: validated parameters plus the cached Stokes
/// factorization, sine transform, and profile.
pub struct Simulation {
    params: SimParams,
    profile: Profile,
    chart: TubularChart,
    stokes: StokesSolver,
    dst: SineTransform,
    zero_g: ScalarField,
}

impl Simulation {
    /// Validate parameters and build the cached solvers; returns the
    /// simulation together with any non-fatal warnings.
    pub fn new(params: SimParams, profile: Profile) -> Result<(Self, Vec<String>)> {
        let warnings = params.validate()?;
        let chart = TubularChart::new(params.curve.clone(), params.delta)?;
        let stokes = StokesSolver::new(params.grid, params.alpha0)?;
        let dst = SineTransform::new(params.grid);
        let zero_g = ScalarField::zeros(params.grid, Centering::Cell);
        Ok((
            Simulation { params, profile, chart, stokes, dst, zero_g },
            warnings,
        ))
    }

    #[must_use]
    pub fn params(&self) -> &SimParams {
        &self.params
    }

    #[must_use]
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Initial phase field c⁰ = ξ(d)·θ₀(d/ε) + (1 − ξ(d))·sign(d) with d the
    /// signed distance to the initial curve (positive inside); boundary rows
    /// exactly −1.
    #[must_use]
    pub fn initial_c(&self) -> ScalarField {
        let grid = self.params.grid;
        let n = grid.n;
        let eps = self.params.epsilon;
        let delta = self.params.delta;
        let mut c = ScalarField::zeros(grid, Centering::Node);
        for j in 0..=n {
            for i in 0..=n {
                let x = c.coord(i, j);
                let (d, clamped) = self.chart.signed_distance_clamped(x);
                let val = if clamped {
                    if d > 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    let xi = cutoff_xi(d, delta);
                    let far = if d >= 0.0 { 1.0 } else { -1.0 };
                    xi * self.profile.eval_theta0(d / eps) + (1.0 - xi) * far
                };
                c.set(i, j, val);
            }
        }
        for i in 0..=n {
            c.set(i, 0, -1.0);
            c.set(i, n, -1.0);
            c.set(0, i, -1.0);
            c.set(n, i, -1.0);
        }
        c
    }

    /// Initial state: layered c⁰, μ⁰ from the discrete potential relation, and
    /// (v, p) from the Stokes solve with the capillary force of (c⁰, μ⁰).
    pub fn init_state(&self) -> Result<State> {
        let c = self.initial_c();
        let mu = chemical_potential(&c, self.params.epsilon, &self.params.potential);
        let (fx, fy) = capillary_force(&c, &mu);
        let sol = self
            .stokes
            .solve(&fx, &fy, &self.zero_g, None, self.params.stokes_tol)?;
        Ok(State { t: 0.0, c, mu, v: sol.v, p: sol.p })
    }

    /// Advance one Δt: explicit convection by the state's own velocity,
    /// convex-splitting Cahn–Hilliard update, then the Stokes solve with the
    /// new capillary force. Aborts with a self-check error when max|c|
    /// leaves the admissible band.
    pub fn step(&mut self, st: &State) -> Result<(State, StepInfo)> {
        let cfl = st.v.max_abs() * self.params.dt / self.params.grid.h();
        let (c_new, mu_new) = cahn_hilliard_update(&st.c, &st.v, &self.params, &mut self.dst)?;
        let cmax = c_new.max_abs();
        if cmax > MAX_ABS_C {
            return Err(InterlimitError::SelfCheck(format!(
                "max|c| = {cmax:.6} exceeds {MAX_ABS_C} at t = {:.6e} (CFL {cfl:.3}); \
                 the run left the admissible phase band",
                st.t + self.params.dt
            )));
        }
        let (fx, fy) = capillary_force(&c_new, &mu_new);
        let sol = self
            .stokes
            .solve(&fx, &fy, &self.zero_g, None, self.params.stokes_tol)?;
        let info = StepInfo {
            cfl,
            cfl_violation: cfl > CFL_LIMIT,
            stokes_residual: sol.residual,
            stokes_iterations: sol.iterations,
        };
        Ok((
            State {
                t: st.t + self.params.dt,
                c: c_new,
                mu: mu_new,
                v: sol.v,
                p: sol.p,
            },
            info,
        ))
    }
}

/// Diagnostics row for the current state; the previous state supplies the
/// velocity that advected c over the step (its dissipation pairs with the
/// energy decrement in the discrete law).
#[must_use]
pub fn diagnostics(st: &State, st_prev: &State, p: &SimParams) -> DiagnosticsRow {
    let (_, slip) = korn_form_parts(&st_prev.v, p.alpha0);
    DiagnosticsRow {
        t: st.t,
        energy: energy(st, p),
        grad_mu_sq: node_grad_sq(&st.mu),
        grad_v_sq: velocity_grad_sq(&st_prev.v),
        slip_sq: slip,
        mass: st.c.integral(),
        max_velocity: st.v.max_abs(),
        interface_length: interface_length(&st.c),
    }
}

/// Length of the zero level set of a node field by marching squares
/// (linear interpolation on cell edges; saddle cells disambiguated by the
/// cell-center average).
#[must_use]
pub fn interface_length(c: &ScalarField) -> f64 {
    assert_eq!(c.centering, Centering::Node);
    let n = c.grid.n;
    let h = c.grid.h();
    let mut len = 0.0;
    let cross = |a: f64, b: f64| a / (a - b); // zero position along an edge
    for j in 0..n {
        for i in 0..n {
            let v00 = c.at(i, j);
            let v10 = c.at(i + 1, j);
            let v11 = c.at(i + 1, j + 1);
            let v01 = c.at(i, j + 1);
            let x0 = c.grid.node(i);
            let y0 = c.grid.node(j);
            // Edge crossings: bottom, right, top, left.
            let mut pts: [Option<(f64, f64)>; 4] = [None; 4];
            if (v00 > 0.0) != (v10 > 0.0) {
                pts[0] = Some((x0 + h * cross(v00, v10), y0));
            }
            if (v10 > 0.0) != (v11 > 0.0) {
                pts[1] = Some((x0 + h, y0 + h * cross(v10, v11)));
            }
            if (v11 > 0.0) != (v01 > 0.0) {
                pts[2] = Some((x0 + h * (1.0 - cross(v11, v01)), y0 + h));
            }
            if (v01 > 0.0) != (v00 > 0.0) {
                pts[3] = Some((x0, y0 + h * (1.0 - cross(v01, v00))));
            }
            let found: Vec<(usize, (f64, f64))> = pts
                .iter()
                .enumerate()
                .filter_map(|(k, p)| p.map(|q| (k, q)))
                .collect();
            let seg = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            match found.len() {
                2 => len += seg(found[0].1, found[1].1),
                4 => {
                    // Saddle: connect consistently with the center sign.
                    let center = 0.25 * (v00 + v10 + v01 + v11);
                    if (center > 0.0) == (v00 > 0.0) {
                        len += seg(pts[0].unwrap(), pts[1].unwrap());
                        len += seg(pts[2].unwrap(), pts[3].unwrap());
                    } else {
                        len += seg(pts[3].unwrap(), pts[0].unwrap());
                        len += seg(pts[1].unwrap(), pts[2].unwrap());
                    }
                }
                _ => {}
            }
        }
    }
    len
}
