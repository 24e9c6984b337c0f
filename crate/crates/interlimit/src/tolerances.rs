//! Pinned numerical tolerances.
//!
//! Every acceptance-grade comparison in the crate reads its tolerance from
//! here so the accepted error budget is visible in one place. Values are
//! absolute unless the name says otherwise.

/// Sup-norm agreement of the computed profile with the closed form tanh(ρ/√2)
/// on [−12, 12] (default quartic potential).
pub const PROFILE_SUP_TOL: f64 = 1e-8;

/// Relative agreement of the surface-tension constant σ with √2/3.
pub const SIGMA_REL_TOL: f64 = 1e-6;

/// Residual of the profile ODE −θ₀″ + f′(θ₀) on the profile grid.
pub const PROFILE_ODE_RESIDUAL_TOL: f64 = 1e-8;

/// Minimal decay order of the differentiated-ODE (null eigenfunction)
/// residual under grid halving.
pub const NULL_EIGENFUNCTION_MIN_ORDER: f64 = 1.9;

/// |∇d_Γ| = 1 agreement for Newton-refined signed distances.
pub const EIKONAL_TOL: f64 = 1e-8;

/// Chart round-trip x → (r,s) → x agreement.
pub const CHART_ROUNDTRIP_TOL: f64 = 1e-10;

/// Grid-scaled factor for the second-order geometry identities
/// (Δd_Γ|_Γ = −H and ∇S·∇d_Γ = 0): tolerance = factor · h².
pub const GEOMETRY_H2_FACTOR: f64 = 5.0;

/// Homogeneous Stokes problem: max |v|, |p| of the solved zero problem.
pub const STOKES_ZERO_TOL: f64 = 1e-10;

/// Minimal L² convergence order of the manufactured Stokes solution.
pub const STOKES_MMS_MIN_ORDER: f64 = 1.9;

/// Interior Korn term of a rigid rotation (algebraically zero stencils).
pub const KORN_RIGID_TOL: f64 = 1e-12;

/// Relative stability band for the fitted Korn constant under refinement.
pub const KORN_CONST_STABILITY: f64 = 0.20;

/// Gradient capillary force (μ ≡ const) must produce |v| below this.
pub const WELL_BALANCED_V_TOL: f64 = 1e-8;

/// Per-step energy increase allowance (convex splitting: none beyond roundoff).
pub const ENERGY_STEP_TOL: f64 = 1e-10;

/// Relative slack for the accumulated energy–dissipation inequality.
pub const ENERGY_BUDGET_REL_TOL: f64 = 1e-8;

/// Relative mismatch allowed between E^ε(c⁰) and e₀·(interface length),
/// e₀ = ∫(½θ₀′² + f(θ₀)) dρ the planar layer energy per unit length.
pub const ENERGY_CONCENTRATION_REL_TOL: f64 = 0.05;

/// Grid-independence of the 1D minimal eigenvalue under node doubling.
pub const EIGEN_1D_GRID_TOL: f64 = 1e-6;

/// Minimal correlation of the 1D near-null eigenvector with θ₀′.
pub const EIGEN_CORRELATION_MIN: f64 = 0.99;

/// Residual ‖Tx − λx‖₂ ≤ tol·max(1, ‖T‖∞) of the 1D shift-invert eigensolve
/// (the 1e−10 target scaled by the reduced matrix norm; an absolute reading
/// is unreachable once ‖T‖ ≳ 1e6 because floating-point noise alone is of
/// order eps·‖T‖).
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Minimum node count of a 1D eigenvalue grid across (−δ, δ).
pub const EIGEN_MIN_NODES: usize = 400;

/// Minimum number of 1D eigenvalue-grid nodes per interface width ε.
pub const EIGEN_MIN_NODES_PER_EPS: f64 = 20.0;

/// Agreement of the shift-invert minimal eigenvalue with a dense symmetric
/// eigensolve of the same reduced matrix (2001-node oracle), relative to
/// max(1, |λ|).
pub const EIGEN_ORACLE_TOL: f64 = 1e-7;

/// Relative agreement of the fitted scan constant with the second-order
/// discretization prediction k²·(∫f″(θ₀)²θ₀′²dρ)/(24σ) at mesh h = kε².
pub const FD_EIGEN_PREDICTION_RTOL: f64 = 0.15;

/// Near-null 2D sample: the quadratic form value may not exceed
/// factor·ε·‖ψ‖²_{L²}.
pub const NULL_DIRECTION_LHS_FACTOR: f64 = 10.0;

/// Admissible boundary trace (relative to 1 + max|ψ|) of 2D spectral samples.
pub const BOUNDARY_TRACE_TOL: f64 = 1e-12;

/// Single-mode layer decomposition on tube samples: remainder and amplitude
/// error relative to the mode scale (pure projection algebra, no sampling).
pub const DECOMP_MODE_TOL: f64 = 1e-12;

/// Single-mode recovery through bilinear grid sampling (adds interpolation
/// and quadrature error to the projection).
pub const DECOMP_SAMPLED_REL_TOL: f64 = 0.02;

/// Maximal ‖ψ^R‖/‖ψ‖ on Γ(δ) for diffuse-run layer errors (θ₀′ dominance).
pub const DECOMP_REMAINDER_RATIO_MAX: f64 = 0.5;

/// Uniform bound for the decomposition weight β(s) = (∫θ₀′²dρ)^{−1/2}
/// (limit value (2σ)^{−1/2} ≈ 1.030 for the default quartic).
pub const BETA_SUP_BOUND: f64 = 1.10;

/// Sharp/diffuse radius-error reduction band when ε halves.
pub const RADIUS_ERROR_RATIO_BAND: (f64, f64) = (1.5, 3.0);

/// Minimal fitted ε-order for the H⁻¹ and L² error norms.
pub const CONVERGENCE_MIN_ORDER: f64 = 0.8;

/// Maximal least-squares residual of the log–log order fit.
pub const CONVERGENCE_FIT_RESIDUAL_MAX: f64 = 0.15;

/// Radius drift band for the frozen-interface (σ = 0) control run.
pub const CONTROL_RADIUS_DRIFT_REL: f64 = 0.02;

/// Sharp-reference consistency: one-sided flux rederivation vs the ODE rhs.
pub const SHARP_FLUX_TOL: f64 = 1e-8;

/// Gibbs–Thomson interface value σ/R reproduced by the composed μ.
pub const GIBBS_THOMSON_TOL: f64 = 1e-12;

/// Pivot guard for the Sturm-sequence eigenvalue count.
pub const STURM_PIVOT_GUARD: f64 = 1e-300;

/// Default relative tolerance of iterative/algebraic linear solves.
pub const LINEAR_SOLVE_TOL: f64 = 1e-11;

/// CFL number above which the explicit convection step flags a violation.
pub const CFL_LIMIT: f64 = 0.5;

/// Empirical |c| bound; beyond this the quartic scheme is considered broken.
pub const MAX_ABS_C: f64 = 1.1;
