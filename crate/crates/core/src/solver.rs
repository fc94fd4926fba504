//! Discretized fixed-point operator
//!
//! ```text
//! T_i(u, v)(t) = γ_i(t) α_i[u_i] + δ_i(t) β_i[u_i] + ∫₀¹ k_i(t, s) g_i(s) f_i(u, v, |u'|/|r'|, |v'|/|r'|)(s) ds
//! ```
//!
//! on a graded grid, and damped Picard iteration for its fixed points.
//!
//! The composed nonlinearity is sampled at the nodes (plus `t = 0`, where
//! the boundary value `α_i[u_i]` is used) and interpolated linearly. With the
//! panel moments `∫ s^k g φ` of the hat functions precomputed, one
//! application costs `O(N)` through prefix sums of
//! `A(t) = ∫₀ᵗ s g F̃` and `B(t) = ∫ₜ¹ (1 - ρs) g F̃`:
//! `F(t) = γ(t) A(t) + t B(t)` and `F'(t) = γ' A(t) + B(t)`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::BoxPair;
use crate::error::{Error, Result};
use crate::mesh::{Grid, MeshFunction};
use crate::problem::ProblemSpec;
use crate::quadrature::integrate;

/// `(u, v)` on a common grid.
pub type State = [MeshFunction; 2];

/// Hat-function moments of one equation's weight on every panel.
#[derive(Debug, Clone)]
struct Moments {
    /// `∫ g φ_L`, `∫ g φ_R`, `∫ s g φ_L`, `∫ s g φ_R` per panel.
    m0l: Vec<f64>,
    m0r: Vec<f64>,
    m1l: Vec<f64>,
    m1r: Vec<f64>,
}

/// The operator `T` bound to a problem and a grid.
#[derive(Debug, Clone)]
pub struct Operator<'a> {
    spec: &'a ProblemSpec,
    grid: Grid,
    /// `0, t_1, ..., t_N`.
    ext: Vec<f64>,
    /// `|r'(t_j)|` at the grid nodes.
    scale: Vec<f64>,
    moments: [Moments; 2],
}

/// Result of one application of `T`.
#[derive(Debug, Clone)]
pub struct Applied {
    pub state: State,
    /// `α_i[w_i]` of the argument, the values at `t = 0`.
    pub at_zero: [f64; 2],
    /// Negative arguments of `f` replaced by zero.
    pub clamped: usize,
}

/// Minimum number of grid nodes accepted by the solver.
pub const MIN_NODES: usize = 64;

/// Points that must be grid nodes: functional atoms and kinks, windows, `1/2`.
fn special_points(spec: &ProblemSpec) -> Vec<f64> {
    let mut pts = vec![0.5];
    for eq in spec.equations() {
        pts.extend(eq.alpha.breakpoints());
        pts.extend(eq.beta.breakpoints());
        pts.push(eq.window.a());
        pts.push(eq.window.b());
    }
    pts
}

/// The solver grid with `n` graded nodes plus the problem's special points.
pub fn solver_grid(spec: &ProblemSpec, n: usize) -> Result<Grid> {
    if n < MIN_NODES {
        return Err(Error::InvalidParameter(format!("mesh needs at least {MIN_NODES} nodes, got {n}")));
    }
    Grid::graded(n, spec.quad().grading_exponent, &special_points(spec))
}

/// Constant initial state `(c₁, c₂)`.
pub fn constant_state(grid: &Grid, c: [f64; 2]) -> State {
    [MeshFunction::constant(grid, c[0]), MeshFunction::constant(grid, c[1])]
}

impl<'a> Operator<'a> {
    pub fn new(spec: &'a ProblemSpec, grid: Grid) -> Result<Self> {
        if grid.len() < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least {MIN_NODES} nodes, got {}",
                grid.len()
            )));
        }
        let mut ext = Vec::with_capacity(grid.len() + 1);
        ext.push(0.0);
        ext.extend_from_slice(grid.nodes());
        let geom = spec.geometry();
        let scale = grid
            .nodes()
            .iter()
            .map(|&t| geom.gradient_scale(t))
            .collect::<Result<Vec<_>>>()?;
        let m = |i: usize| -> Result<Moments> {
            let g = spec.weight_g(i);
            let quad = spec.quad();
            let per_panel: Vec<[f64; 4]> = ext
                .par_windows(2)
                .map(|w| -> Result<[f64; 4]> {
                    let (a, b) = (w[0], w[1]);
                    let h = b - a;
                    let q = |k: f64, left: bool| {
                        integrate(
                            |s| {
                                let phi = if left { (b - s) / h } else { (s - a) / h };
                                Ok(g.eval(s)? * s.powf(k) * phi)
                            },
                            a,
                            b,
                            quad,
                        )
                        .map(|r| r.value)
                    };
                    Ok([q(0.0, true)?, q(0.0, false)?, q(1.0, true)?, q(1.0, false)?])
                })
                .collect::<Result<_>>()?;
            Ok(Moments {
                m0l: per_panel.iter().map(|p| p[0]).collect(),
                m0r: per_panel.iter().map(|p| p[1]).collect(),
                m1l: per_panel.iter().map(|p| p[2]).collect(),
                m1r: per_panel.iter().map(|p| p[3]).collect(),
            })
        };
        let moments = [m(0)?, m(1)?];
        Ok(Self {
            spec,
            grid,
            ext,
            scale,
            moments,
        })
    }

    /// Operator on [`solver_grid`] with `n` nodes.
    pub fn with_nodes(spec: &'a ProblemSpec, n: usize) -> Result<Self> {
        Self::new(spec, solver_grid(spec, n)?)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    fn check(&self, state: &State) -> Result<()> {
        for w in state {
            if w.grid() != Some(&self.grid) {
                return Err(Error::InvalidParameter("state does not live on the operator's grid".into()));
            }
        }
        Ok(())
    }

    /// One application of `T`.
    pub fn apply(&self, state: &State) -> Result<Applied> {
        self.check(state)?;
        let spec = self.spec;
        let n = self.grid.len();
        let alpha = [0, 1].map(|i| spec.equation(i).alpha.apply_mesh(&state[i]));
        let beta = [0, 1].map(|i| spec.equation(i).beta.apply_mesh(&state[i]));

        // Arguments of f at 0, t_1, ..., t_N.
        let mut clamped = 0usize;
        let mut clamp = |x: f64| {
            if x < 0.0 {
                clamped += 1;
                0.0
            } else {
                x
            }
        };
        let mut args = Vec::with_capacity(n + 1);
        args.push([clamp(alpha[0]), clamp(alpha[1]), 0.0, 0.0]);
        let (u, v) = (&state[0], &state[1]);
        for j in 0..n {
            let sc = self.scale[j];
            args.push([
                clamp(u.values()[j]),
                clamp(v.values()[j]),
                u.derivs()[j].abs() / sc,
                v.derivs()[j].abs() / sc,
            ]);
        }

        let mut out: Vec<MeshFunction> = Vec::with_capacity(2);
        for i in 0..2 {
            let eq = spec.equation(i);
            let f = &eq.envelope.f;
            let ft: Vec<f64> = args.iter().map(|a| f.eval(a[0], a[1], a[2], a[3])).collect();
            if let Some(j) = ft.iter().position(|y| !y.is_finite()) {
                return Err(Error::Evaluation(format!(
                    "f{} is not finite at (u, v, z1, z2) = {:?}",
                    i + 1,
                    args[j]
                )));
            }
            let m = &self.moments[i];
            let bc = &eq.bc;
            let rho = -bc.gamma_prime();
            // a[j] = ∫₀^{t_j} s g F̃, b[j] = ∫_{t_j}^1 (1 - ρs) g F̃ on the extended grid.
            let mut a = vec![0.0; n + 1];
            for p in 0..n {
                a[p + 1] = a[p] + m.m1l[p] * ft[p] + m.m1r[p] * ft[p + 1];
            }
            let mut b = vec![0.0; n + 1];
            for p in (0..n).rev() {
                b[p] = b[p + 1] + (m.m0l[p] - rho * m.m1l[p]) * ft[p] + (m.m0r[p] - rho * m.m1r[p]) * ft[p + 1];
            }
            let (gp, dp) = (bc.gamma_prime(), bc.delta_prime());
            let mut values = Vec::with_capacity(n);
            let mut derivs = Vec::with_capacity(n);
            for j in 1..=n {
                let t = self.ext[j];
                values.push(bc.gamma(t) * alpha[i] + bc.delta(t) * beta[i] + bc.gamma(t) * a[j] + t * b[j]);
                derivs.push(gp * alpha[i] + dp * beta[i] + gp * a[j] + b[j]);
            }
            out.push(MeshFunction::new(&self.grid, values, derivs)?);
        }
        let [ou, ov]: [MeshFunction; 2] = out.try_into().expect("two components");
        Ok(Applied {
            state: [ou, ov],
            at_zero: alpha,
            clamped,
        })
    }

    /// `‖(u, v) - T(u, v)‖_∞` over node values.
    pub fn residual(&self, state: &State) -> Result<f64> {
        let t = self.apply(state)?;
        Ok(values_distance(state, &t.state))
    }
}

fn values_distance(x: &State, y: &State) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for (a, b) in x[i].values().iter().zip(y[i].values()) {
            d = d.max((a - b).abs());
        }
    }
    d
}

fn state_distance(x: &State, y: &State) -> f64 {
    x[0].distance(&y[0]).max(x[1].distance(&y[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSettings {
    /// Damping `θ ∈ (0, 1]`.
    pub damping: f64,
    pub max_iters: usize,
    /// Stop when the update (values and `ω`-weighted derivatives) drops below this.
    pub tol: f64,
    /// Convergence also requires `‖state - T(state)‖_∞` below this.
    pub residual_tol: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iters: 20_000,
            tol: 1e-12,
            residual_tol: 1e-9,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!("damping θ = {} must lie in (0, 1]", self.damping)));
        }
        if !(self.tol > 0.0 && self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    /// Update below tolerance but residual above its tolerance, or iteration cap hit.
    NotConverged,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// `x ← (1-θ) x + θ T(x)`.
    Picard,
    /// Shape iteration `w ← T(c w)/‖T(c w)‖` with the amplitudes `c` chosen
    /// so that `‖T_i(c w)‖ = c_i`; reaches fixed points that repel Picard.
    Normalized,
}

/// The cone conditions evaluated on the grid for one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeDiagnostics {
    pub sup_norm: f64,
    /// `min_{[a,b]} w`.
    pub window_min: f64,
    /// `a ‖w‖_∞`.
    pub window_bound: f64,
    pub window_ok: bool,
    /// `sup t(1-t)|w'(t)|`.
    pub omega_derivative: f64,
    /// `4 w(1/2)`.
    pub omega_bound: f64,
    pub omega_ok: bool,
    pub alpha: f64,
    pub alpha_ok: bool,
    pub beta: f64,
    pub beta_ok: bool,
}

impl ConeDiagnostics {
    pub fn all_ok(&self) -> bool {
        self.window_ok && self.omega_ok && self.alpha_ok && self.beta_ok
    }
}

/// Residuals of the boundary conditions at the ODE level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryResiduals {
    /// `|w(t_1) - α[w]|` at the first grid node.
    pub at_zero: f64,
    /// `|c w(1) + d w'(1) - β[w]|`.
    pub at_one: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Zero,
    /// `‖w_i‖ ≤ ρ_i` for both components.
    InsideRho,
    /// Outside the ρ-box with `min_{[a_i,b_i]} w_i < s_i` for both components.
    BetweenRhoAndS,
    /// `min_{[a_i,b_i]} w_i ≥ s_i` for some component.
    BeyondS,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub outcome: Outcome,
    pub converged: bool,
    pub strategy: Strategy,
    pub iterations: usize,
    pub last_update: f64,
    /// `‖state - T(state)‖_∞`, recomputed on the returned state.
    pub residual: f64,
    /// The returned state is `T` of the last iterate.
    pub polished: bool,
    pub clamped: usize,
    pub nodes: usize,
    pub cone: [ConeDiagnostics; 2],
    pub boundary: [BoundaryResiduals; 2],
    pub region: Option<Region>,
    /// `(iteration, update)` samples.
    pub trace: Vec<(usize, f64)>,
    #[serde(skip)]
    pub state: State,
}

impl SolutionReport {
    pub fn cone_ok(&self) -> bool {
        self.cone.iter().all(|c| c.all_ok())
    }

    pub fn is_zero(&self) -> bool {
        self.cone.iter().all(|c| c.sup_norm == 0.0)
    }
}

fn cone_diagnostics(spec: &ProblemSpec, state: &State) -> [ConeDiagnostics; 2] {
    [0, 1].map(|i| {
        let eq = spec.equation(i);
        let w = &state[i];
        let alpha = eq.alpha.apply_mesh(w);
        let beta = eq.beta.apply_mesh(w);
        let sup = w.sup_norm().max(alpha.abs());
        let (a, b) = (eq.window.a(), eq.window.b());
        let mut window_min = f64::INFINITY;
        let mut omega: f64 = 0.0;
        for ((&t, &x), &dx) in w.nodes().iter().zip(w.values()).zip(w.derivs()) {
            if (a..=b).contains(&t) {
                window_min = window_min.min(x);
            }
            omega = omega.max(t * (1.0 - t) * dx.abs());
        }
        let slack = 1e-10 * sup;
        let omega_bound = 4.0 * w.eval(0.5);
        ConeDiagnostics {
            sup_norm: sup,
            window_min,
            window_bound: a * sup,
            window_ok: window_min >= a * sup - slack,
            omega_derivative: omega,
            omega_bound,
            omega_ok: omega <= omega_bound + slack,
            alpha,
            alpha_ok: alpha >= -slack,
            beta,
            beta_ok: beta >= -slack,
        }
    })
}

fn boundary_residuals(spec: &ProblemSpec, state: &State) -> [BoundaryResiduals; 2] {
    [0, 1].map(|i| {
        let eq = spec.equation(i);
        let w = &state[i];
        let n = w.len();
        let alpha = eq.alpha.apply_mesh(w);
        let beta = eq.beta.apply_mesh(w);
        BoundaryResiduals {
            at_zero: (w.values()[0] - alpha).abs(),
            at_one: (eq.bc.c() * w.values()[n - 1] + eq.bc.d() * w.derivs()[n - 1] - beta).abs(),
        }
    })
}

fn region(cone: &[ConeDiagnostics; 2], boxes: Option<&BoxPair>) -> Option<Region> {
    if cone.iter().all(|c| c.sup_norm == 0.0) {
        return Some(Region::Zero);
    }
    let b = boxes?;
    if (0..2).all(|i| cone[i].sup_norm <= b.rho[i]) {
        Some(Region::InsideRho)
    } else if (0..2).all(|i| cone[i].window_min < b.s[i]) {
        Some(Region::BetweenRhoAndS)
    } else {
        Some(Region::BeyondS)
    }
}

/// How an iteration ended.
struct Run {
    state: State,
    strategy: Strategy,
    reached_tol: bool,
    diverged: bool,
    iterations: usize,
    last_update: f64,
    trace: Vec<(usize, f64)>,
}

/// Fills in the diagnostics of a final state.
fn report(op: &Operator<'_>, run: Run, settings: &SolveSettings) -> Result<SolutionReport> {
    let spec = op.spec;
    let Run {
        state,
        strategy,
        reached_tol,
        diverged,
        iterations,
        last_update,
        trace,
    } = run;
    let (state, residual, polished, clamped) = if diverged {
        (state, f64::INFINITY, false, 0)
    } else {
        let r0 = op.residual(&state)?;
        let polished = op.apply(&state)?;
        let r1 = op.residual(&polished.state)?;
        if r1 <= r0 {
            (polished.state, r1, true, polished.clamped)
        } else {
            (state, r0, false, polished.clamped)
        }
    };
    let converged = !diverged && reached_tol && residual <= settings.residual_tol;
    let outcome = if diverged {
        Outcome::Diverged
    } else if converged {
        Outcome::Converged
    } else {
        Outcome::NotConverged
    };
    let cone = cone_diagnostics(spec, &state);
    Ok(SolutionReport {
        outcome,
        converged,
        strategy,
        iterations,
        last_update,
        residual,
        polished,
        clamped,
        nodes: op.grid.len(),
        cone,
        boundary: boundary_residuals(spec, &state),
        region: region(&cone, spec.boxes()),
        trace,
        state,
    })
}

/// Damped Picard iteration from `initial`.
pub fn solve(op: &Operator<'_>, initial: &State, settings: &SolveSettings) -> Result<SolutionReport> {
    settings.validate()?;
    op.check(initial)?;
    let theta = settings.damping;
    let mut state = initial.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut update = f64::INFINITY;
    let mut reached = false;
    let mut diverged = false;
    let mut iterations = 0;
    for k in 1..=settings.max_iters {
        iterations = k;
        let t = match op.apply(&state) {
            Ok(t) => t.state,
            Err(Error::Evaluation(_)) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut next = state.clone();
        for i in 0..2 {
            let (tv, td) = (t[i].values(), t[i].derivs());
            for (x, y) in next[i].values_mut().iter_mut().zip(tv) {
                *x = (1.0 - theta) * *x + theta * y;
            }
            for (x, y) in next[i].derivs_mut().iter_mut().zip(td) {
                *x = (1.0 - theta) * *x + theta * y;
            }
        }
        update = state_distance(&state, &next);
        state = next;
        if k <= 10 || k % 50 == 0 {
            trace.push((k, update));
        }
        let blown = state.iter().any(|w| !(w.sup_norm() < 1e150));
        let growing = k > 50 && update > settings.tol && update > 10.0 * history[k - 51];
        history.push(update);
        if !update.is_finite() || blown || growing {
            diverged = true;
            break;
        }
        if update < settings.tol {
            reached = true;
            break;
        }
    }
    if trace.last().map(|p| p.0) != Some(iterations) {
        trace.push((iterations, update));
    }
    let run = Run {
        state,
        strategy: Strategy::Picard,
        reached_tol: reached,
        diverged,
        iterations,
        last_update: update,
        trace,
    };
    report(op, run, settings)
}

/// `T_i(x)` scaled so that component `i` of `x = c ∘ w` reproduces its amplitude.
fn amplitude_ratio(op: &Operator<'_>, w: &State, c: [f64; 2], i: usize) -> Result<f64> {
    let x = scale_state(w, c);
    let t = op.apply(&x)?;
    Ok(t.state[i].sup_norm() / c[i])
}

fn scale_state(w: &State, c: [f64; 2]) -> State {
    [0, 1].map(|i| {
        let mut m = w[i].clone();
        for x in m.values_mut() {
            *x *= c[i];
        }
        for x in m.derivs_mut() {
            *x *= c[i];
        }
        m
    })
}

fn normalized(x: &State) -> Option<State> {
    let n = [x[0].sup_norm(), x[1].sup_norm()];
    if n.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    Some(scale_state(x, [1.0 / n[0], 1.0 / n[1]]))
}

/// Amplitude `c_i` with `‖T_i(c ∘ w)‖ = c_i`, by bracketing and geometric bisection.
/// Overflow counts as "too large".
fn find_amplitude(op: &Operator<'_>, w: &State, c: [f64; 2], i: usize) -> Option<f64> {
    let above = |x: f64| -> bool {
        let mut cc = c;
        cc[i] = x;
        match amplitude_ratio(op, w, cc, i) {
            Ok(r) if r.is_finite() => r >= 1.0,
            _ => true,
        }
    };
    let (mut lo, mut hi) = (c[i], c[i]);
    if above(c[i]) {
        loop {
            lo *= 0.5;
            if lo < 1e-150 {
                return None;
            }
            if !above(lo) {
                break;
            }
            hi = lo;
        }
    } else {
        loop {
            hi *= 2.0;
            if hi > 1e150 {
                return None;
            }
            if above(hi) {
                break;
            }
            lo = hi;
        }
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((lo * hi).sqrt())
}

/// Shape iteration for fixed points that repel Picard iteration.
pub fn solve_normalized(op: &Operator<'_>, shape: &State, settings: &SolveSettings) -> Result<Option<SolutionReport>> {
    settings.validate()?;
    op.check(shape)?;
    let Some(mut w) = normalized(shape) else {
        return Ok(None);
    };
    let mut c = [1.0, 1.0];
    let mut trace = Vec::new();
    let mut update = f64::INFINITY;
    let mut reached = false;
    let mut iterations = 0;
    let max = settings.max_iters.min(2000);
    for k in 1..=max {
        iterations = k;
        for i in 0..2 {
            match find_amplitude(op, &w, c, i) {
                Some(ci) => c[i] = ci,
                None => return Ok(None),
            }
        }
        let x = scale_state(&w, c);
        let t = op.apply(&x)?;
        let Some(next) = normalized(&t.state) else {
            return Ok(None);
        };
        update = state_distance(&w, &next);
        w = next;
        if k <= 10 || k % 50 == 0 {
            trace.push((k, update));
        }
        if !update.is_finite() {
            return Ok(None);
        }
        if update < settings.tol {
            reached = true;
            break;
        }
    }
    trace.push((iterations, update));
    let state = scale_state(&w, c);
    let run = Run {
        state,
        strategy: Strategy::Normalized,
        reached_tol: reached,
        diverged: false,
        iterations,
        last_update: update,
        trace,
    };
    report(op, run, settings).map(Some)
}

/// Minimum sup-norm distance between reported solutions.
pub const DISTINCT: f64 = 1e-4;

/// Picard from constants at the `ρ`, `s` and `θ` scales plus one shape
/// iteration; returns the distinct converged solutions inside the cone.
pub fn multi_start(op: &Operator<'_>, boxes: &BoxPair, settings: &SolveSettings) -> Result<Vec<SolutionReport>> {
    let mut seeds = vec![boxes.rho.map(|x| 0.5 * x), boxes.rho, boxes.s];
    if let Some(th) = boxes.theta {
        seeds.push(th);
    }
    let grid = op.grid().clone();
    let mut found: Vec<SolutionReport> = Vec::new();
    let keep = |r: SolutionReport, found: &mut Vec<SolutionReport>| {
        if r.converged && r.cone_ok() && found.iter().all(|f| values_distance(&f.state, &r.state) > DISTINCT) {
            found.push(r);
        }
    };
    for c in seeds {
        let r = solve(op, &constant_state(&grid, c), settings)?;
        keep(r, &mut found);
    }
    if let Some(r) = solve_normalized(op, &constant_state(&grid, [1.0, 1.0]), settings)? {
        keep(r, &mut found);
    }
    Ok(found)
}

/// Writes `t,u,u_prime,v,v_prime,r,u_of_r,grad_u_of_r,v_of_r,grad_v_of_r`, one row per node.
pub fn write_csv<W: Write>(out: &mut W, spec: &ProblemSpec, state: &State) -> io::Result<()> {
    writeln!(out, "t,u,u_prime,v,v_prime,r,u_of_r,grad_u_of_r,v_of_r,grad_v_of_r")?;
    let geom = spec.geometry();
    let (u, v) = (&state[0], &state[1]);
    for j in 0..u.len() {
        let t = u.nodes()[j];
        let r = geom.map_radius(t).map_err(io::Error::other)?;
        let sc = geom.gradient_scale(t).map_err(io::Error::other)?;
        let (uj, du, vj, dv) = (u.values()[j], u.derivs()[j], v.values()[j], v.derivs()[j]);
        writeln!(
            out,
            "{t:e},{uj:e},{du:e},{vj:e},{dv:e},{r:e},{uj:e},{:e},{vj:e},{:e}",
            du.abs() / sc,
            dv.abs() / sc
        )?;
    }
    Ok(())
}
