//! Run configuration: a flat `key = value` file (one key per line, `#`
//! comments), strict unknown-key rejection, and assembly into solver
//! parameters.
//!
//! Every key has a default, so the empty file is a valid configuration; the
//! command line supplies the run mode and may override the output directory,
//! seed, thread count, and plot-script switch. [`RunConfig::echo`] prints the
//! complete effective configuration in the same `key = value` syntax — the
//! `config.echo` artifact of each run directory — and parses back to an
//! identical configuration, which is what makes reruns auditable.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::diffuse::SimParams;
use crate::error::InterlimitError;
use crate::field::Grid;
use crate::geometry::InterfaceCurve;
use crate::potential::Potential;
use crate::Result;

/// Which top-level operation the binary performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Solve the planar layer profile and report its invariants.
    Profile,
    /// Manufactured-solution and coercivity checks of the Stokes solver.
    StokesCheck,
    /// Time-step the coupled diffuse system, logging diagnostics.
    Simulate,
    /// Spectral instruments: the 1D eigenvalue scan and the 2D bound.
    Spectral,
    /// Radial sharp-interface reference trajectory.
    Sharp,
    /// ε-sweep against the sharp reference with fitted convergence orders.
    Converge,
}

impl RunMode {
    /// All modes, in the order they are documented.
    pub const ALL: [RunMode; 6] = [
        RunMode::Profile,
        RunMode::StokesCheck,
        RunMode::Simulate,
        RunMode::Spectral,
        RunMode::Sharp,
        RunMode::Converge,
    ];
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RunMode::Profile => "profile",
            RunMode::StokesCheck => "stokes-check",
            RunMode::Simulate => "simulate",
            RunMode::Spectral => "spectral",
            RunMode::Sharp => "sharp",
            RunMode::Converge => "converge",
        };
        f.write_str(name)
    }
}

impl FromStr for RunMode {
    type Err = InterlimitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "profile" => Ok(RunMode::Profile),
            "stokes-check" => Ok(RunMode::StokesCheck),
            "simulate" => Ok(RunMode::Simulate),
            "spectral" => Ok(RunMode::Spectral),
            "sharp" => Ok(RunMode::Sharp),
            "converge" => Ok(RunMode::Converge),
            other => Err(InterlimitError::Config(format!(
                "unknown run mode `{other}` (expected one of: profile, stokes-check, \
                 simulate, spectral, sharp, converge)"
            ))),
        }
    }
}

/// Shape of the initial interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Circle,
    /// Circle with a single radial Fourier perturbation mode.
    PerturbedCircle,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Circle => "circle",
            CurveKind::PerturbedCircle => "perturbed-circle",
        })
    }
}

impl FromStr for CurveKind {
    type Err = InterlimitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(CurveKind::Circle),
            "perturbed-circle" => Ok(CurveKind::PerturbedCircle),
            other => Err(InterlimitError::Config(format!(
                "unknown curve kind `{other}` (expected `circle` or `perturbed-circle`)"
            ))),
        }
    }
}

/// Complete, flat run configuration (defaults + file + command line).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    /// Grid cells per side.
    pub grid_n: usize,
    /// Domain side length L of [0, L]².
    pub domain_length: f64,
    /// Interface width ε.
    pub epsilon: f64,
    /// Slip coefficient α₀.
    pub alpha0: f64,
    /// Time step; `None` selects the documented default 0.1·ε·h.
    pub dt: Option<f64>,
    /// Final time T.
    pub t_final: f64,
    pub potential: Potential,
    pub curve: CurveKind,
    pub curve_center: (f64, f64),
    pub curve_radius: f64,
    /// Fourier mode of the perturbed circle.
    pub curve_mode: usize,
    /// Relative perturbation amplitude of the perturbed circle.
    pub curve_amplitude: f64,
    /// Dense parameter samples of the curve representation.
    pub curve_samples: usize,
    /// Tubular half-width δ of the interface chart.
    pub delta: f64,
    /// Relative algebraic tolerance of the Stokes solves.
    pub stokes_tol: f64,
    /// Snapshot cadence in steps (0 = none).
    pub snapshot_every: usize,
    /// Interface widths of the converge sweep (strictly decreasing) and the
    /// spectral 1D scan.
    pub epsilons: Vec<f64>,
    /// Fixed grid size for converge-mode runs; `None` ties N to ε.
    pub converge_n: Option<usize>,
    /// Surface-tension override for the sharp reference; `None` computes σ
    /// from the profile. `0` freezes the reference interface (control runs).
    pub sigma: Option<f64>,
    /// Outer radius of the radial sharp model; `None` selects L/2.
    pub r_out: Option<f64>,
    /// Sharp trajectory stops once R drops below this radius.
    pub r_stop: f64,
    /// Half-width of the layer-profile table in stretched units.
    pub profile_rho_max: f64,
    /// Nodes of the layer-profile table.
    pub profile_nodes: usize,
    /// Random zero-trace samples drawn by the spectral 2D bound.
    pub spectral_samples: usize,
    /// Seed of every randomized instrument.
    pub seed: u64,
    /// Worker threads for sweep members (1 = serial, required for bitwise
    /// reproducibility of sweep scheduling).
    pub threads: usize,
    /// Emit companion gnuplot scripts next to each CSV.
    pub gnuplot: bool,
    /// Output directory (one subdirectory per run).
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: RunMode::Simulate,
            grid_n: 128,
            domain_length: 1.0,
            epsilon: 0.05,
            alpha0: 1.0,
            dt: None,
            t_final: 0.01,
            potential: Potential::standard_quartic(),
            curve: CurveKind::Circle,
            curve_center: (0.5, 0.5),
            curve_radius: 0.25,
            curve_mode: 3,
            curve_amplitude: 0.1,
            curve_samples: 512,
            delta: 0.1,
            stokes_tol: 1e-10,
            snapshot_every: 0,
            epsilons: vec![0.08, 0.04, 0.02],
            converge_n: None,
            sigma: None,
            r_out: None,
            r_stop: 0.0,
            profile_rho_max: 12.0,
            profile_nodes: 2001,
            spectral_samples: 50,
            seed: 0,
            threads: 1,
            gnuplot: false,
            out_dir: "out".into(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, val: &str, line: usize) -> Result<T> {
    val.parse().map_err(|_| {
        InterlimitError::Config(format!("config line {line}: cannot parse `{val}` for `{key}`"))
    })
}

fn parse_opt_f64(key: &str, val: &str, line: usize) -> Result<Option<f64>> {
    if val == "auto" { Ok(None) } else { parse_num(key, val, line).map(Some) }
}

fn parse_opt_usize(key: &str, val: &str, line: usize) -> Result<Option<usize>> {
    if val == "auto" { Ok(None) } else { parse_num(key, val, line).map(Some) }
}

fn parse_bool(key: &str, val: &str, line: usize) -> Result<bool> {
    match val {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(InterlimitError::Config(format!(
            "config line {line}: `{key}` must be `true` or `false`, got `{val}`"
        ))),
    }
}

fn opt_str<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "auto".into(), |x| x.to_string())
}

impl RunConfig {
    /// Parse a configuration text: defaults overlaid with `key = value`
    /// lines. `#` starts a comment (full-line or trailing); unknown and
    /// duplicated keys are hard errors.
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, val)) = body.split_once('=') else {
                return Err(InterlimitError::Config(format!(
                    "config line {line}: expected `key = value`, got `{body}`"
                )));
            };
            let key = key.trim();
            let val = val.trim();
            if !seen.insert(key.to_string()) {
                return Err(InterlimitError::Config(format!(
                    "config line {line}: duplicate key `{key}`"
                )));
            }
            match key {
                "mode" => cfg.mode = val.parse()?,
                "grid_n" => cfg.grid_n = parse_num(key, val, line)?,
                "domain_length" => cfg.domain_length = parse_num(key, val, line)?,
                "epsilon" => cfg.epsilon = parse_num(key, val, line)?,
                "alpha0" => cfg.alpha0 = parse_num(key, val, line)?,
                "dt" => cfg.dt = parse_opt_f64(key, val, line)?,
                "t_final" => cfg.t_final = parse_num(key, val, line)?,
                "potential_a4" => cfg.potential.a4 = parse_num(key, val, line)?,
                "potential_a3" => cfg.potential.a3 = parse_num(key, val, line)?,
                "potential_a2" => cfg.potential.a2 = parse_num(key, val, line)?,
                "potential_a1" => cfg.potential.a1 = parse_num(key, val, line)?,
                "potential_a0" => cfg.potential.a0 = parse_num(key, val, line)?,
                "curve" => cfg.curve = val.parse()?,
                "curve_center_x" => cfg.curve_center.0 = parse_num(key, val, line)?,
                "curve_center_y" => cfg.curve_center.1 = parse_num(key, val, line)?,
                "curve_radius" => cfg.curve_radius = parse_num(key, val, line)?,
                "curve_mode" => cfg.curve_mode = parse_num(key, val, line)?,
                "curve_amplitude" => cfg.curve_amplitude = parse_num(key, val, line)?,
                "curve_samples" => cfg.curve_samples = parse_num(key, val, line)?,
                "delta" => cfg.delta = parse_num(key, val, line)?,
                "stokes_tol" => cfg.stokes_tol = parse_num(key, val, line)?,
                "snapshot_every" => cfg.snapshot_every = parse_num(key, val, line)?,
                "epsilons" => {
                    let mut eps = Vec::new();
                    for part in val.split(',') {
                        eps.push(parse_num(key, part.trim(), line)?);
                    }
                    cfg.epsilons = eps;
                }
                "converge_n" => cfg.converge_n = parse_opt_usize(key, val, line)?,
                "sigma" => cfg.sigma = parse_opt_f64(key, val, line)?,
                "r_out" => cfg.r_out = parse_opt_f64(key, val, line)?,
                "r_stop" => cfg.r_stop = parse_num(key, val, line)?,
                "profile_rho_max" => cfg.profile_rho_max = parse_num(key, val, line)?,
                "profile_nodes" => cfg.profile_nodes = parse_num(key, val, line)?,
                "spectral_samples" => cfg.spectral_samples = parse_num(key, val, line)?,
                "seed" => cfg.seed = parse_num(key, val, line)?,
                "threads" => cfg.threads = parse_num(key, val, line)?,
                "gnuplot" => cfg.gnuplot = parse_bool(key, val, line)?,
                "out_dir" => cfg.out_dir = val.to_string(),
                other => {
                    return Err(InterlimitError::Config(format!(
                        "config line {line}: unknown key `{other}`"
                    )));
                }
            }
        }
        Ok(cfg)
    }

    /// Read and parse a configuration file.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            InterlimitError::Io(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        RunConfig::parse_str(&text)
    }

    /// The effective configuration in parseable `key = value` form.
    #[must_use]
    pub fn echo(&self) -> String {
        let mut s = String::from("# effective configuration (defaults + file + command line)\n");
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("mode", self.mode.to_string());
        kv("grid_n", self.grid_n.to_string());
        kv("domain_length", self.domain_length.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("alpha0", self.alpha0.to_string());
        kv("dt", opt_str(self.dt));
        kv("t_final", self.t_final.to_string());
        kv("potential_a4", self.potential.a4.to_string());
        kv("potential_a3", self.potential.a3.to_string());
        kv("potential_a2", self.potential.a2.to_string());
        kv("potential_a1", self.potential.a1.to_string());
        kv("potential_a0", self.potential.a0.to_string());
        kv("curve", self.curve.to_string());
        kv("curve_center_x", self.curve_center.0.to_string());
        kv("curve_center_y", self.curve_center.1.to_string());
        kv("curve_radius", self.curve_radius.to_string());
        kv("curve_mode", self.curve_mode.to_string());
        kv("curve_amplitude", self.curve_amplitude.to_string());
        kv("curve_samples", self.curve_samples.to_string());
        kv("delta", self.delta.to_string());
        kv("stokes_tol", self.stokes_tol.to_string());
        kv("snapshot_every", self.snapshot_every.to_string());
        kv(
            "epsilons",
            self.epsilons.iter().map(f64::to_string).collect::<Vec<_>>().join(", "),
        );
        kv("converge_n", opt_str(self.converge_n));
        kv("sigma", opt_str(self.sigma));
        kv("r_out", opt_str(self.r_out));
        kv("r_stop", self.r_stop.to_string());
        kv("profile_rho_max", self.profile_rho_max.to_string());
        kv("profile_nodes", self.profile_nodes.to_string());
        kv("spectral_samples", self.spectral_samples.to_string());
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        kv("gnuplot", self.gnuplot.to_string());
        kv("out_dir", self.out_dir.clone());
        s
    }

    /// Structural invariants that do not need a grid or a profile. The
    /// resolution checks (ε vs h and the curve-in-domain conditions)
    /// live in [`SimParams::validate`] and the chart constructor.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("domain_length", self.domain_length),
            ("epsilon", self.epsilon),
            ("alpha0", self.alpha0),
            ("delta", self.delta),
            ("curve_radius", self.curve_radius),
            ("stokes_tol", self.stokes_tol),
            ("profile_rho_max", self.profile_rho_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(InterlimitError::Config(format!(
                    "`{name}` must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(InterlimitError::Config(format!(
                "`t_final` must be nonnegative and finite, got {}",
                self.t_final
            )));
        }
        if !(self.r_stop >= 0.0) || !self.r_stop.is_finite() {
            return Err(InterlimitError::Config(format!(
                "`r_stop` must be nonnegative and finite, got {}",
                self.r_stop
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(InterlimitError::Config(format!(
                    "`dt` must be positive and finite, got {dt}"
                )));
            }
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(InterlimitError::Config(format!(
                    "`sigma` must be nonnegative and finite, got {s}"
                )));
            }
        }
        if let Some(r) = self.r_out {
            if !(r > self.curve_radius) || !r.is_finite() {
                return Err(InterlimitError::Config(format!(
                    "`r_out` must exceed the interface radius {}, got {r}",
                    self.curve_radius
                )));
            }
        }
        if self.grid_n < 8 {
            return Err(InterlimitError::Config(format!(
                "`grid_n` must be at least 8, got {}",
                self.grid_n
            )));
        }
        if let Some(n) = self.converge_n {
            if n < 8 {
                return Err(InterlimitError::Config(format!(
                    "`converge_n` must be at least 8, got {n}"
                )));
            }
        }
        if self.curve_samples < 16 {
            return Err(InterlimitError::Config(format!(
                "`curve_samples` must be at least 16, got {}",
                self.curve_samples
            )));
        }
        if self.curve == CurveKind::PerturbedCircle && self.curve_mode == 0 {
            return Err(InterlimitError::Config(
                "`curve_mode` must be at least 1 for a perturbed circle".into(),
            ));
        }
        if self.threads == 0 {
            return Err(InterlimitError::Config("`threads` must be at least 1".into()));
        }
        for w in self.epsilons.windows(2) {
            if !(w[1] < w[0]) {
                return Err(InterlimitError::Config(format!(
                    "`epsilons` must be strictly decreasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        for &e in &self.epsilons {
            if !(e > 0.0) || !e.is_finite() {
                return Err(InterlimitError::Config(format!(
                    "`epsilons` entries must be positive and finite, got {e}"
                )));
            }
        }
        if self.mode == RunMode::Converge && self.epsilons.len() < 3 {
            return Err(InterlimitError::Config(format!(
                "converge mode needs at least 3 interface widths in `epsilons`, got {}",
                self.epsilons.len()
            )));
        }
        Ok(())
    }

    /// Build the configured interface curve.
    pub fn build_curve(&self) -> Result<InterfaceCurve> {
        match self.curve {
            CurveKind::Circle => {
                InterfaceCurve::circle(self.curve_center, self.curve_radius, self.curve_samples)
            }
            CurveKind::PerturbedCircle => InterfaceCurve::perturbed_circle(
                self.curve_center,
                self.curve_radius,
                self.curve_mode,
                self.curve_amplitude,
                self.curve_samples,
            ),
        }
    }

    /// Solver parameters at the configured grid and interface width.
    pub fn sim_params(&self) -> Result<SimParams> {
        let grid = Grid::new(self.grid_n, self.domain_length);
        self.sim_params_on(grid, self.epsilon)
    }

    /// Solver parameters at an explicit grid and width (converge sweeps).
    /// An explicit `dt` applies verbatim to every sweep member; `auto`
    /// re-derives 0.1·ε·h per member.
    pub fn sim_params_on(&self, grid: Grid, epsilon: f64) -> Result<SimParams> {
        Ok(SimParams {
            grid,
            epsilon,
            alpha0: self.alpha0,
            dt: self.dt.unwrap_or_else(|| SimParams::default_dt(epsilon, grid)),
            t_final: self.t_final,
            potential: self.potential,
            curve: self.build_curve()?,
            delta: self.delta,
            stokes_tol: self.stokes_tol,
            snapshot_every: self.snapshot_every,
        })
    }

    /// Converge-mode grid for one sweep member: N = ⌈16L/ε⌉ rounded up to a
    /// multiple of 8 (constant layer resolution across the sweep), unless
    /// `converge_n` fixes N.
    #[must_use]
    pub fn converge_grid(&self, epsilon: f64) -> Grid {
        let n = self.converge_n.unwrap_or_else(|| {
            let raw = (16.0 * self.domain_length / epsilon).ceil() as usize;
            raw.div_ceil(8) * 8
        });
        Grid::new(n, self.domain_length)
    }

    /// Outer radius of the radial sharp model (default L/2).
    #[must_use]
    pub fn effective_r_out(&self) -> f64 {
        self.r_out.unwrap_or(0.5 * self.domain_length)
    }
}

// --------------------------------------------------------------------------
