//! Constrained minimization by a projected, preconditioned gradient flow.
//!
//! Each step moves along the tangential part of the Sobolev gradient, rescales
//! back onto the constraint and is accepted by Armijo backtracking, so the
//! recorded energies never increase. Every `symmetrize_every` steps the
//! iterate is replaced by the rearrangement of its absolute value when that
//! does not raise the energy.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{constraint_gradient, constraint_value, energy_and_gradient, total_energy, EnergyBreakdown, Family, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::{Axis, Field, GridSpec};
use crate::rearrange::schwarz_rearrange;

/// Metric used to turn the energy derivative into a descent direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preconditioner {
    /// Plain L2 gradient.
    Identity,
    /// H1 Riesz map `(W + a K)^{-1}`, with `K` the discrete Dirichlet form.
    #[default]
    Sobolev,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Initial step size.
    pub tau0: f64,
    /// Backtracking factor in (0, 1).
    pub backtrack: f64,
    /// Relative energy change over 10 accepted steps regarded as a stall.
    pub stall_tol: f64,
    /// Gradient residual tolerance, relative to the gradient's own size.
    pub grad_tol: f64,
    /// Symmetrization period in steps; 0 disables it.
    pub symmetrize_every: usize,
    pub seed: u64,
    pub preconditioner: Preconditioner,
    pub record_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 50_000,
            tau0: 1e-2,
            backtrack: 0.5,
            stall_tol: 1e-10,
            grad_tol: 1e-6,
            symmetrize_every: 100,
            seed: 0,
            preconditioner: Preconditioner::Sobolev,
            record_trace: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tau0", self.tau0)?;
        positive("stall_tol", self.stall_tol)?;
        positive("grad_tol", self.grad_tol)?;
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidParameter(format!("backtrack must lie in (0, 1), got {}", self.backtrack)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub constraint_error: f64,
    pub step_size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    EnergyStall,
    LineSearchFailed,
    MaxIters,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::EnergyStall => "energy_stall",
            StopReason::LineSearchFailed => "line_search_failed",
            StopReason::MaxIters => "max_iters",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub minimizer: Field,
    pub energy: EnergyBreakdown,
    pub m_value: f64,
    /// Lagrange multiplier; `None` unless every constraint is `s^2`.
    pub beta: Option<f64>,
    /// Euler-Lagrange residual; `None` outside the stuart and badiale_rolando families.
    pub el_residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub constraint_error: f64,
    /// Tangential gradient in the preconditioner's dual norm, relative to the full gradient.
    pub gradient_residual: f64,
    pub stop_reason: StopReason,
    pub symmetrizations: usize,
    pub trace: Vec<TraceRow>,
    /// The infimum over a bounded grid can exceed the whole-space value by a
    /// truncation error; compare mass curves on one fixed grid.
    pub grid_extent: f64,
}

// ------------------------------------------------------------ preconditioner

/// 1D stiffness matrix of an axis as (diagonal, super-diagonal).
fn axis_stiffness(axis: &Axis) -> (Vec<f64>, Vec<f64>) {
    let n = axis.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for f in &axis.faces {
        let k = f.weight / (f.h * f.h);
        match (f.a, f.b) {
            (Some(a), Some(b)) if a == b => {}
            (Some(a), Some(b)) => {
                diag[a] += k;
                diag[b] += k;
                off[a.min(b)] -= k;
            }
            (Some(a), None) | (None, Some(a)) => diag[a] += k,
            (None, None) => {}
        }
    }
    (diag, off)
}

/// Factored tridiagonal system `W + a K` (Thomas algorithm).
struct Tridiag {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiag {
    fn new(weights: &[f64], diag: &[f64], off: &[f64], a: f64) -> Self {
        let n = weights.len();
        let mut inv_pivot = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let upper: Vec<f64> = off.iter().map(|&o| a * o).collect();
        let mut prev = 0.0;
        for i in 0..n {
            let mut piv = weights[i] + a * diag[i];
            if i > 0 {
                lower[i] = upper[i - 1] * prev;
                piv -= lower[i] * upper[i - 1];
            }
            prev = 1.0 / piv;
            inv_pivot[i] = prev;
        }
        Tridiag { lower, inv_pivot, upper }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 1..n {
            x[i] -= self.lower[i] * x[i - 1];
        }
        x[n - 1] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) * self.inv_pivot[i];
        }
    }
}

/// `W + a (K_s x W_w + W_s x K_w)` diagonalized through the axis eigenbases.
struct Kron {
    qs: DMatrix<f64>,
    qw: DMatrix<f64>,
    lambda_s: Vec<f64>,
    lambda_w: Vec<f64>,
    inv_sqrt_ws: Vec<f64>,
    inv_sqrt_ww: Vec<f64>,
    a: f64,
}

/// Eigenbasis of `W^{-1/2} (K + hardy W / x^2) W^{-1/2}` for one axis.
fn axis_eigen(axis: &Axis, hardy: f64) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let n = axis.len();
    let (mut diag, off) = axis_stiffness(axis);
    for i in 0..n {
        diag[i] += hardy * axis.weights[i] / (axis.coords[i] * axis.coords[i]);
    }
    let isw: Vec<f64> = axis.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i] * isw[i] * isw[i];
        if i + 1 < n {
            let v = off[i] * isw[i] * isw[i + 1];
            m[(i, i + 1)] = v;
            m[(i + 1, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(m);
    (eig.eigenvectors, eig.eigenvalues.iter().copied().collect(), isw)
}

impl Kron {
    fn apply(&self, x: &mut [f64]) {
        let (ns, nw) = (self.lambda_s.len(), self.lambda_w.len());
        let y = DMatrix::from_fn(ns, nw, |i, j| x[i * nw + j] * self.inv_sqrt_ws[i] * self.inv_sqrt_ww[j]);
        let mut z = self.qs.tr_mul(&y) * &self.qw;
        for i in 0..ns {
            for j in 0..nw {
                z[(i, j)] /= 1.0 + self.a * (self.lambda_s[i] + self.lambda_w[j]);
            }
        }
        let y = &self.qs * z * self.qw.transpose();
        for i in 0..ns {
            for j in 0..nw {
                x[i * nw + j] = y[(i, j)] * self.inv_sqrt_ws[i] * self.inv_sqrt_ww[j];
            }
        }
    }
}

enum Metric {
    Identity(Vec<f64>),
    Tridiag(Vec<Tridiag>),
    Kron(Vec<Kron>),
}

impl Metric {
    fn new(p: &ProblemSpec, kind: Preconditioner) -> Self {
        let grid = p.grid();
        if kind == Preconditioner::Identity {
            return Metric::Identity(grid.weights().to_vec());
        }
        let pref = p.kinetic_prefactor();
        let scale: Vec<f64> = p
            .lagrangians()
            .iter()
            .map(|j| 2.0 * pref * j.quadratic_coefficient().unwrap_or(1.0))
            .collect();
        match grid.spec() {
            GridSpec::Cylindrical { .. } => {
                let (sa, wa) = (&grid.axes()[0], &grid.axes()[1]);
                // The Hardy weight mu / s^2 only depends on s and joins the s-axis block.
                let hardy = 2.0 * pref * p.hardy() / scale[0].max(f64::MIN_POSITIVE);
                let (qs, lambda_s, inv_sqrt_ws) = axis_eigen(sa, hardy);
                let (qw, lambda_w, inv_sqrt_ww) = axis_eigen(wa, 0.0);
                Metric::Kron(
                    scale
                        .iter()
                        .map(|&a| Kron {
                            qs: qs.clone(),
                            qw: qw.clone(),
                            lambda_s: lambda_s.clone(),
                            lambda_w: lambda_w.clone(),
                            inv_sqrt_ws: inv_sqrt_ws.clone(),
                            inv_sqrt_ww: inv_sqrt_ww.clone(),
                            a,
                        })
                        .collect(),
                )
            }
            _ => {
                let axis = &grid.axes()[0];
                let (diag, off) = axis_stiffness(axis);
                Metric::Tridiag(scale.iter().map(|&a| Tridiag::new(&axis.weights, &diag, &off, a)).collect())
            }
        }
    }

    /// `M^{-1} x` for a raw (weight-carrying) derivative `x`.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        match self {
            Metric::Identity(w) => {
                let n = w.len();
                for (i, v) in out.iter_mut().enumerate() {
                    *v /= w[i % n];
                }
            }
            Metric::Tridiag(blocks) => {
                let n = x.len() / blocks.len();
                for (c, t) in blocks.iter().enumerate() {
                    t.solve(&mut out[c * n..(c + 1) * n]);
                }
            }
            Metric::Kron(blocks) => {
                let n = x.len() / blocks.len();
                for (c, k) in blocks.iter().enumerate() {
                    k.apply(&mut out[c * n..(c + 1) * n]);
                }
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multiplies an L2 gradient by the quadrature weights.
fn to_raw(g: &Field) -> Vec<f64> {
    let w = g.grid().weights();
    let n = w.len();
    g.values().iter().enumerate().map(|(i, v)| v * w[i % n]).collect()
}

// ------------------------------------------------------------------ helpers

/// Rescales `u` onto `{G = c}`: exactly for homogeneous densities, by
/// bisection on the scale factor otherwise.
pub fn project(p: &ProblemSpec, u: &Field, c: f64) -> Result<Field> {
    if u.is_zero() {
        return Err(Error::Precondition("cannot project the zero field onto the constraint".into()));
    }
    let g0 = constraint_value(p, u);
    if let Some(deg) = p.constraint_homogeneity() {
        return Ok(u.scaled((c / g0).powf(1.0 / deg)));
    }
    let at = |rho: f64| constraint_value(p, &u.scaled(rho));
    let (mut lo, mut hi) = (0.0, 1.0);
    while at(hi) < c {
        lo = hi;
        hi *= 2.0;
        if hi > 1e150 {
            return Err(Error::Solver("constraint not reachable by rescaling".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid) < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (vl, vh) = (at(lo), at(hi));
    let rho = if (c - vl).abs() < (vh - c).abs() { lo } else { hi };
    Ok(u.scaled(rho))
}

/// Gaussian bump with a seeded radial perturbation, scaled onto `{G = c}`.
pub fn initial_guess(p: &ProblemSpec, c: f64, seed: u64) -> Result<Field> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("constraint level must be positive, got {c}")));
    }
    let grid = p.grid();
    let extent = match *grid.spec() {
        GridSpec::Cylindrical { s_max, w_max, .. } => s_max.min(w_max),
        ref s => s.extent(),
    };
    let sigma = extent / 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = p.components();
    let amps: Vec<[f64; 3]> = (0..m).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let u = Field::from_fn(grid.clone(), m, |comp, x| {
        let r = x[0].hypot(x[1]);
        let wobble: f64 = amps[comp]
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * r / extent).cos())
            .sum();
        (-0.5 * (r / sigma).powi(2)).exp() * (1.0 + 0.1 * wobble)
    });
    project(p, &u, c)
}

/// `beta = <I'(u), u> / |u|_2^2`.
pub fn lagrange_multiplier(p: &ProblemSpec, u: &Field) -> Result<f64> {
    if !p.is_l2_constrained() {
        return Err(Error::Precondition("the multiplier is defined for L2 constraints".into()));
    }
    if u.is_zero() {
        return Err(Error::Precondition("the multiplier is undefined at u = 0".into()));
    }
    let (_, g) = energy_and_gradient(p, u)?;
    Ok(g.dot(u)? / u.norm2_sq())
}

/// `|I'(u) - beta u|_2 / |u|_2`, i.e. the residual of
/// `-Delta u + mu u / s^2 - f(x, u) = beta u` for quadratic j.
pub fn el_residual(p: &ProblemSpec, u: &Field, beta: f64) -> Result<f64> {
    if !matches!(p.family(), Family::Stuart | Family::BadialeRolando) {
        return Err(Error::Precondition(format!("no Euler-Lagrange residual for the {} family", p.family())));
    }
    let (_, g) = energy_and_gradient(p, u)?;
    let r = g.add_scaled(-beta, u)?;
    Ok((r.norm2_sq() / u.norm2_sq()).sqrt())
}

// -------------------------------------------------------------------- solver

const ARMIJO: f64 = 1e-4;
const STALL_WINDOW: usize = 10;
const MAX_STEP: f64 = 1e6;

struct State {
    u: Field,
    e: EnergyBreakdown,
    raw: Vec<f64>,
}

fn state(p: &ProblemSpec, u: Field) -> Result<State> {
    let (e, g) = energy_and_gradient(p, &u)?;
    Ok(State { raw: to_raw(&g), u, e })
}

fn rel_error(value: f64, c: f64) -> f64 {
    (value - c).abs() / c
}

/// Minimizes the problem's energy on `{G = c}`.
///
/// A run that stops without meeting the gradient tolerance is returned with
/// `converged = false`; only a non-finite starting energy is an error.
pub fn minimize_constrained(p: &ProblemSpec, c: f64, cfg: &SolveConfig, init: Option<&Field>) -> Result<SolveResult> {
    cfg.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("constraint level must be positive, got {c}")));
    }
    let start = match init {
        Some(u) => {
            if **u.grid() != **p.grid() || u.components() != p.components() {
                return Err(Error::GridMismatch);
            }
            project(p, u, c)?
        }
        None => initial_guess(p, c, cfg.seed)?,
    };
    let metric = Metric::new(p, cfg.preconditioner);
    let can_symmetrize = cfg.symmetrize_every > 0 && !p.grid().is_cylindrical();

    let mut s = state(p, start)?;
    let mut tau = cfg.tau0;
    let mut trace = Vec::new();
    let mut energies = vec![s.e.total];
    let mut residuals = Vec::new();
    let mut symmetrizations = 0;
    let mut iterations = 0;
    let mut residual;
    let stop;

    loop {
        // Tangential Sobolev gradient.
        let q = to_raw(&constraint_gradient(p, &s.u));
        let dg = metric.apply(&s.raw);
        let dq = metric.apply(&q);
        let gg = dot(&s.raw, &dg);
        let qq = dot(&q, &dq);
        let beta_g = if qq > 0.0 { dot(&q, &dg) / qq } else { 0.0 };
        let dir: Vec<f64> = dg.iter().zip(&dq).map(|(a, b)| a - beta_g * b).collect();
        let slope = dot(&s.raw, &dir).max(0.0);
        residual = if gg > 0.0 { (slope / gg).sqrt() } else { 0.0 };
        residuals.push(residual);

        if residual <= cfg.grad_tol {
            stop = StopReason::Converged;
            break;
        }
        let k = energies.len() - 1;
        if k >= STALL_WINDOW {
            let de = (energies[k - STALL_WINDOW] - energies[k]).abs();
            let r_then = residuals[residuals.len() - 1 - STALL_WINDOW];
            if de <= cfg.stall_tol * energies[k].abs().max(f64::MIN_POSITIVE) && residual > 0.5 * r_then {
                stop = StopReason::EnergyStall;
                break;
            }
        }
        if iterations >= cfg.max_iters {
            stop = StopReason::MaxIters;
            break;
        }

        // Armijo backtracking along the projected path.
        let mut accepted = None;
        let mut t = tau;
        while t > 1e-18 * cfg.tau0 {
            let mut trial = s.u.clone();
            for (v, d) in trial.values_mut().iter_mut().zip(&dir) {
                *v -= t * d;
            }
            if let Ok(trial) = project(p, &trial, c) {
                if let Ok(e) = total_energy(p, &trial) {
                    if e.total.is_finite() && e.total <= s.e.total - ARMIJO * t * slope {
                        accepted = Some(trial);
                        break;
                    }
                }
            }
            t *= cfg.backtrack;
        }
        let Some(next) = accepted else {
            stop = StopReason::LineSearchFailed;
            break;
        };
        iterations += 1;
        s = state(p, next)?;
        tau = (t / cfg.backtrack).min(MAX_STEP);

        if can_symmetrize && iterations % cfg.symmetrize_every == 0 {
            let cand = schwarz_rearrange(&s.u.map(f64::abs)).and_then(|r| project(p, &r, c));
            if let Ok(cand) = cand {
                if let Ok(e) = total_energy(p, &cand) {
                    if e.total <= s.e.total {
                        s = state(p, cand)?;
                        symmetrizations += 1;
                    }
                }
            }
        }
        energies.push(s.e.total);
        if cfg.record_trace {
            trace.push(TraceRow {
                iter: iterations,
                energy: s.e.total,
                constraint_error: rel_error(s.e.constraint_value, c),
                step_size: t,
            });
        }
    }

    let constraint_error = rel_error(s.e.constraint_value, c);
    let beta = if p.is_l2_constrained() { Some(lagrange_multiplier(p, &s.u)?) } else { None };
    let el = match (p.family(), beta) {
        (Family::Stuart | Family::BadialeRolando, Some(b)) => Some(el_residual(p, &s.u, b)?),
        _ => None,
    };
    Ok(SolveResult {
        energy: s.e,
        m_value: s.e.total,
        beta,
        el_residual: el,
        iterations,
        converged: stop == StopReason::Converged && constraint_error <= 1e-8,
        constraint_error,
        gradient_residual: residual,
        stop_reason: stop,
        symmetrizations,
        trace,
        grid_extent: p.grid().spec().extent(),
        minimizer: s.u,
    })
}
