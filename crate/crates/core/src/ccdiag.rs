//! Concentration-compactness diagnostics: mass-energy curves, monotonicity
//! and subadditivity checks, negativity certificates, decay and inequality
//! audits.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::energy::{coulomb_energy, total_energy, Family, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::{dirichlet, lp_norm, resample_coscaled, sphere_area, Field, Grid, GridSpec, ResampleMode};
use crate::solve::{minimize_constrained, SolveConfig, SolveResult};

/// Number of seeded cold starts tried at every point of a sweep.
pub const MULTISTART: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub c: f64,
    pub m: f64,
    pub beta: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Sampled mass-energy curve `c -> m(c)`.
#[derive(Clone, Debug)]
pub struct MCCurve {
    pub points: Vec<CurvePoint>,
    /// Minimizer behind each point, when the curve was computed.
    pub minimizers: Vec<Field>,
}

impl MCCurve {
    /// Curve from raw values, e.g. a reference curve or a test fixture.
    pub fn from_values(c: &[f64], m: &[f64]) -> Result<Self> {
        if c.len() != m.len() || c.is_empty() {
            return Err(Error::InvalidParameter("c and m must be nonempty and of equal length".into()));
        }
        check_ascending(c)?;
        let points = c
            .iter()
            .zip(m)
            .map(|(&c, &m)| CurvePoint { c, m, beta: None, iterations: 0, converged: true })
            .collect();
        Ok(MCCurve { points, minimizers: Vec::new() })
    }

    pub fn c_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.c).collect()
    }

    pub fn m_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Linear interpolation in `c` with `m(0) = 0`; constant beyond the last point.
    pub fn interpolate(&self, c: f64) -> f64 {
        let mut prev = (0.0, 0.0);
        for p in &self.points {
            if c <= p.c {
                let (c0, m0) = prev;
                return if p.c == c0 { p.m } else { m0 + (c - c0) / (p.c - c0) * (p.m - m0) };
            }
            prev = (p.c, p.m);
        }
        prev.1
    }
}

fn check_ascending(c: &[f64]) -> Result<()> {
    if c.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("constraint levels must be positive".into()));
    }
    if c.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("constraint levels must be strictly increasing".into()));
    }
    Ok(())
}

fn better(a: &SolveResult, b: &SolveResult) -> bool {
    match (a.converged, b.converged) {
        (true, false) => true,
        (false, true) => false,
        _ => a.m_value < b.m_value,
    }
}

/// Minimizes at every level of `c_list`: a warm start from the previous
/// minimizer plus [`MULTISTART`] seeded cold starts, keeping the lowest
/// converged energy. Non-converged points are flagged, not fatal.
pub fn scan_mass_curve(p: &ProblemSpec, c_list: &[f64], cfg: &SolveConfig) -> Result<MCCurve> {
    if c_list.is_empty() {
        return Err(Error::InvalidParameter("empty list of constraint levels".into()));
    }
    check_ascending(c_list)?;
    let mut points = Vec::with_capacity(c_list.len());
    let mut minimizers: Vec<Field> = Vec::with_capacity(c_list.len());
    for &c in c_list {
        let warm = minimizers.last().cloned();
        let mut starts: Vec<(u64, Option<Field>)> = (0..MULTISTART).map(|k| (cfg.seed.wrapping_add(k), None)).collect();
        if let Some(w) = warm {
            starts.insert(0, (cfg.seed, Some(w)));
        }
        let runs: Vec<Result<SolveResult>> = starts
            .par_iter()
            .map(|(seed, init)| {
                let cfg = SolveConfig { seed: *seed, ..cfg.clone() };
                minimize_constrained(p, c, &cfg, init.as_ref())
            })
            .collect();
        let mut best: Option<SolveResult> = None;
        for r in runs {
            let r = r?;
            if best.as_ref().is_none_or(|b| better(&r, b)) {
                best = Some(r);
            }
        }
        let r = best.expect("at least one start");
        points.push(CurvePoint { c, m: r.m_value, beta: r.beta, iterations: r.iterations, converged: r.converged });
        minimizers.push(r.minimizer);
    }
    Ok(MCCurve { points, minimizers })
}

/// Worst violation of `m(c2) <= m(c1) + tol` over all pairs `c1 < c2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneReport {
    pub monotone: bool,
    /// `(c1, c2, m(c2) - m(c1))` for the pair with the largest defect.
    pub worst: Option<(f64, f64, f64)>,
}

pub fn check_monotone(curve: &MCCurve, tol: f64) -> Result<MonotoneReport> {
    if curve.len() < 2 {
        return Err(Error::InvalidParameter("monotonicity needs at least two curve points".into()));
    }
    let mut worst: Option<(f64, f64, f64)> = None;
    for (i, a) in curve.points.iter().enumerate() {
        for b in &curve.points[i + 1..] {
            let defect = b.m - a.m;
            if worst.is_none_or(|w| defect > w.2) {
                worst = Some((a.c, b.c, defect));
            }
        }
    }
    Ok(MonotoneReport { monotone: worst.is_none_or(|w| w.2 <= tol), worst })
}

/// Reference curve `m_inf` for the subadditivity inequalities.
#[derive(Clone, Debug)]
pub enum ProblemAtInfinity {
    /// `m_inf = 0`, as for nonlinearities vanishing at infinity.
    Zero,
    Curve(MCCurve),
    /// Translation-invariant problems: `m_inf = m`.
    Autonomous,
}

impl ProblemAtInfinity {
    fn eval(&self, own: &MCCurve, c: f64) -> f64 {
        match self {
            ProblemAtInfinity::Zero => 0.0,
            ProblemAtInfinity::Curve(k) => k.interpolate(c),
            ProblemAtInfinity::Autonomous => own.interpolate(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CCReport {
    pub monotone: bool,
    pub monotone_worst: Option<(f64, f64, f64)>,
    pub subadditive: bool,
    /// `(c, lambda, m(c) - m(lambda) - m_inf(c - lambda))` with the largest defect.
    pub subadditive_worst: Option<(f64, f64, f64)>,
    /// `min over (c, lambda) of m(lambda) + m_inf(c - lambda) - m(c)`.
    pub strict_margin: f64,
    /// `m(c) - m_inf(c)` maximized over c (the `lambda = 0` endpoint with `m(0) = 0`).
    pub endpoint_defect: f64,
    pub tol: f64,
    pub notes: Vec<String>,
}

impl CCReport {
    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let triple = |t: Option<(f64, f64, f64)>| {
            t.map_or_else(|| "none".to_string(), |(a, b, d)| format!("{a:.16e},{b:.16e},{d:.16e}"))
        };
        let mut kv = vec![
            ("monotone".to_string(), self.monotone.to_string()),
            ("monotone_worst".to_string(), triple(self.monotone_worst)),
            ("subadditive".to_string(), self.subadditive.to_string()),
            ("subadditive_worst".to_string(), triple(self.subadditive_worst)),
            ("strict_margin".to_string(), format!("{:.16e}", self.strict_margin)),
            ("endpoint_defect".to_string(), format!("{:.16e}", self.endpoint_defect)),
            ("tol".to_string(), format!("{:.16e}", self.tol)),
        ];
        for (i, n) in self.notes.iter().enumerate() {
            kv.push((format!("note{i}"), n.clone()));
        }
        kv
    }
}

/// Default additive tolerance for curve inequalities: `1e-6 max |m|`.
pub fn default_tol(curve: &MCCurve) -> f64 {
    1e-6 * curve.points.iter().map(|p| p.m.abs()).fold(0.0, f64::max)
}

/// Large inequality `m(c) <= m(lambda) + m_inf(c - lambda)` over curve points
/// `0 < lambda < c`, the strict margin and the `lambda = 0` endpoint.
pub fn check_subadditivity(curve: &MCCurve, m_inf: &ProblemAtInfinity, tol: f64) -> Result<CCReport> {
    if curve.len() < 2 {
        return Err(Error::InvalidParameter("subadditivity needs at least two curve points".into()));
    }
    let mono = check_monotone(curve, tol)?;
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut margin = f64::INFINITY;
    for (j, pc) in curve.points.iter().enumerate() {
        for pl in &curve.points[..j] {
            let defect = pc.m - pl.m - m_inf.eval(curve, pc.c - pl.c);
            if worst.is_none_or(|w| defect > w.2) {
                worst = Some((pc.c, pl.c, defect));
            }
            margin = margin.min(-defect);
        }
    }
    let endpoint_defect = curve
        .points
        .iter()
        .map(|p| p.m - m_inf.eval(curve, p.c))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut notes = Vec::new();
    if curve.points.iter().any(|p| !p.converged) {
        notes.push("some curve points did not converge".to_string());
    }
    if matches!(m_inf, ProblemAtInfinity::Autonomous) {
        notes.push("problem at infinity equals the problem itself; the lambda = 0 endpoint is trivial".to_string());
    }
    Ok(CCReport {
        monotone: mono.monotone,
        monotone_worst: mono.worst,
        subadditive: worst.is_none_or(|w| w.2 <= tol),
        subadditive_worst: worst,
        strict_margin: margin,
        endpoint_defect,
        tol,
        notes,
    })
}

/// A violation of `m(lambda c) <= lambda^alpha m(c) + tol`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneityViolation {
    pub c: f64,
    pub lambda: f64,
    pub m_lambda_c: f64,
    pub bound: f64,
}

/// Checks `m(lambda c) <= lambda^alpha m(c) + tol` on every pair of curve points.
///
/// `alpha` is measured in units of the constraint level `c`.
pub fn homogeneity_bound_check(curve: &MCCurve, alpha: f64, tol: f64) -> Result<Vec<HomogeneityViolation>> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be at least 1, got {alpha}")));
    }
    if curve.len() < 2 {
        return Err(Error::Precondition("no comparable pairs (c, lambda c) with lambda > 1".into()));
    }
    let mut out = Vec::new();
    for (i, a) in curve.points.iter().enumerate() {
        for b in &curve.points[i..] {
            let lambda = b.c / a.c;
            let bound = lambda.powf(alpha) * a.m;
            if b.m > bound + tol {
                out.push(HomogeneityViolation { c: a.c, lambda, m_lambda_c: b.m, bound });
            }
        }
    }
    Ok(out)
}

// -------------------------------------------------------------- certificates

/// One row of a certificate scan: parameter, exact energy, analytic upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub param: f64,
    pub exact: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub rows: Vec<ScanRow>,
    /// Parameter with the lowest exact energy.
    pub best_param: f64,
    pub value: f64,
    pub success: bool,
    /// Largest deviation of the constraint from its target across the scan.
    pub constraint_check: f64,
}

fn finish(rows: Vec<ScanRow>, constraint_check: f64) -> Certificate {
    let best = rows
        .iter()
        .copied()
        .min_by(|a, b| a.exact.total_cmp(&b.exact))
        .unwrap_or(ScanRow { param: f64::NAN, exact: f64::NAN, bound: f64::NAN });
    Certificate { best_param: best.param, value: best.exact, success: best.exact < 0.0, rows, constraint_check }
}

fn check_params(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() || v.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("{name} grid must be nonempty and positive")));
    }
    Ok(())
}

/// Scans `J(w_t)` along `w_t(x) = t^(3/2) w(t x)` against the bound
/// `C t^6 int w^6 + C t^2 int |grad w|^2 - t D(w)`.
///
/// Each `w_t` lives on the grid co-scaled by `1/t`, where the scaling is exact.
pub fn certificate_choquard(p: &ProblemSpec, c: f64, w_seed: &Field, t_grid: &[f64]) -> Result<Certificate> {
    if p.family() != Family::Choquard {
        return Err(Error::InvalidProblem("the choquard certificate needs a choquard problem".into()));
    }
    check_params("t", t_grid)?;
    let mass = w_seed.norm2_sq();
    if (mass - c).abs() > 1e-8 * c {
        return Err(Error::Precondition(format!("seed mass {mass:.6e} differs from c = {c:.6e}")));
    }
    let cg = p.lagrangians()[0].growth().c;
    let w6 = lp_norm(w_seed, 6.0, 0)?.powi(6);
    let grad = dirichlet(w_seed);
    let d = coulomb_energy(w_seed)?;
    let rows: Vec<Result<(ScanRow, f64)>> = t_grid
        .par_iter()
        .map(|&t| {
            let wt = resample_coscaled(w_seed, t, ResampleMode::MassPreserving)?;
            let pt = p.with_grid(wt.grid().clone())?;
            let e = total_energy(&pt, &wt)?;
            let bound = cg * t.powi(6) * w6 + cg * t * t * grad - t * d;
            Ok((ScanRow { param: t, exact: e.total, bound }, (e.constraint_value - c).abs() / c))
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    let mut dev = 0.0f64;
    for r in rows {
        let (row, e) = r?;
        dev = dev.max(e);
        out.push(row);
    }
    Ok(finish(out, dev))
}

/// `int_{R^N} G(e^{-|x|^p}) dx` by one-dimensional quadrature.
fn gaussian_normalizer(g: &dyn crate::energy::ConstraintTerm, n: usize, p: f64) -> f64 {
    let r_end = 50f64.powf(1.0 / p);
    let m = 200_000;
    let h = r_end / m as f64;
    let f = |r: f64| g.value((-r.powf(p)).exp()) * r.powi(n as i32 - 1);
    let mut s = f(0.0) + f(r_end);
    for i in 1..m {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sphere_area(n) * s * h / 3.0
}

/// Scans `J((Upsilon^theta, 0, ..., 0))` with
/// `Upsilon^theta(x) = theta^(N/p^2) d^(-1/p) exp(-theta |x|^p)` and
/// `d = int G_1(e^{-|x|^p})`, so that `int G_1(Upsilon^theta) = 1` for every theta.
///
/// Each profile is sampled on the grid co-scaled by `theta^(-1/p)`, which keeps
/// its resolution fixed. The bound column is the kinetic part alone.
pub fn certificate_quasilinear(p: &ProblemSpec, theta_grid: &[f64]) -> Result<Certificate> {
    if p.family() != Family::Quasilinear {
        return Err(Error::InvalidProblem("the quasilinear certificate needs a quasilinear problem".into()));
    }
    check_params("theta", theta_grid)?;
    let g1 = p.constraints()[0].clone();
    let pe = g1
        .homogeneity()
        .ok_or_else(|| Error::Precondition(format!("{} is not homogeneous", g1.name())))?;
    let grid = p.grid();
    let n = grid.dim();
    let d = gaussian_normalizer(g1.as_ref(), n, pe);
    let m = p.components();
    let rows: Vec<Result<(ScanRow, f64)>> = theta_grid
        .par_iter()
        .map(|&theta| {
            let scaled = Grid::new(grid.spec().scaled(theta.powf(-1.0 / pe)))?;
            let amp = theta.powf(n as f64 / (pe * pe)) / d.powf(1.0 / pe);
            let u = Field::from_fn(scaled.clone(), m, |comp, x| {
                if comp == 0 {
                    amp * (-theta * x[0].hypot(x[1]).powf(pe)).exp()
                } else {
                    0.0
                }
            });
            let pt = p.with_grid(scaled)?;
            let e = total_energy(&pt, &u)?;
            let g: f64 = u.component(0).iter().zip(u.grid().weights()).map(|(v, w)| w * g1.value(*v)).sum();
            let kinetic = e.kinetic_prefactor * e.j_term + e.hardy_term;
            Ok((ScanRow { param: theta, exact: e.total, bound: kinetic }, (g - 1.0).abs()))
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    let mut dev = 0.0f64;
    for r in rows {
        let (row, e) = r?;
        dev = dev.max(e);
        out.push(row);
    }
    Ok(finish(out, dev))
}

// ----------------------------------------------------------------- rho_0

#[derive(Clone, Debug)]
pub struct Rho0Estimate {
    pub rho0: f64,
    pub lo: f64,
    pub hi: f64,
    pub m_lo: f64,
    pub m_hi: f64,
    /// `m` at `2 rho0`.
    pub m_at_double: f64,
    /// Minimizer at `2 rho0`.
    pub minimizer_at_double: Field,
    /// Every evaluation in call order, with `c = rho`.
    pub evaluations: Vec<CurvePoint>,
}

/// Bisection on `rho` for the sign change of `m_rho`; stops at a bracket of
/// relative width 1%. Warm starts follow the localized branch from the right end.
pub fn estimate_rho0(p: &ProblemSpec, bracket: (f64, f64), cfg: &SolveConfig, tol: f64) -> Result<Rho0Estimate> {
    if p.family() != Family::BadialeRolando {
        return Err(Error::InvalidProblem("rho0 estimation is defined for badiale_rolando".into()));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("bad bracket ({lo}, {hi})")));
    }
    let mut evaluations = Vec::new();
    let mut eval = |rho: f64, init: Option<&Field>| -> Result<SolveResult> {
        let r = minimize_constrained(p, rho, cfg, init)?;
        evaluations.push(CurvePoint { c: rho, m: r.m_value, beta: r.beta, iterations: r.iterations, converged: r.converged });
        Ok(r)
    };
    let r_hi = eval(hi, None)?;
    let mut m_hi = r_hi.m_value;
    let mut warm = r_hi.minimizer;
    let m_lo0 = eval(lo, Some(&warm))?.m_value;
    if !(m_hi <= -tol && m_lo0 >= -tol) {
        return Err(Error::NoSignChange { lo, hi, m_lo: m_lo0, m_hi });
    }
    let mut m_lo = m_lo0;
    while (hi - lo) / hi > 0.01 {
        let mid = 0.5 * (lo + hi);
        let r = eval(mid, Some(&warm))?;
        if r.m_value <= -tol {
            hi = mid;
            m_hi = r.m_value;
            warm = r.minimizer;
        } else {
            lo = mid;
            m_lo = r.m_value;
        }
    }
    let rho0 = 0.5 * (lo + hi);
    let dbl = eval(2.0 * rho0, Some(&warm))?;
    Ok(Rho0Estimate {
        rho0,
        lo,
        hi,
        m_lo,
        m_hi,
        m_at_double: dbl.m_value,
        minimizer_at_double: dbl.minimizer,
        evaluations,
    })
}

// ------------------------------------------------------------ decay, audits

/// `M = max r^(N/p) u(r)` over the nodes of a nonnegative, radially
/// non-increasing field (first component).
pub fn decay_check(u: &Field, n: usize, p: f64) -> Result<f64> {
    let grid = u.grid();
    if grid.is_cylindrical() {
        return Err(Error::UnsupportedGrid("decay check needs a line or radial grid".into()));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let v = u.component(0);
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let slack = 1e-10 * vmax;
    if v.iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("decay check needs a nonnegative field".into()));
    }
    let rad = grid.radius();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| rad[a].total_cmp(&rad[b]));
    if order.windows(2).any(|w| v[w[1]] > v[w[0]] + slack) {
        return Err(Error::Precondition("decay check needs a radially non-increasing field".into()));
    }
    let e = n as f64 / p;
    Ok(order.iter().map(|&i| rad[i].powf(e) * v[i]).fold(0.0, f64::max))
}

/// Sharp Hardy-Littlewood-Sobolev constant for `iint f(x) f(y) / |x - y|` in
/// R^3 with `f` in `L^(6/5)`: `(4/3) (16/pi)^(1/3)`.
pub fn sharp_hls_constant() -> f64 {
    4.0 / 3.0 * (16.0 / PI).cbrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityAudit {
    /// `D(u) / |u|_{12/5}^4`.
    pub q1: f64,
    /// `|u|_{12/5}^4 / (|u|_2^3 |u|_{H^1})`.
    pub q2: f64,
    /// `|u|_{10/3}^{10/3} / (|u|_2^{4/3} |grad u|_2^2)`.
    pub q3: f64,
    pub hls_constant: f64,
    pub q1_within_hls: bool,
}

pub fn inequality_audit(u: &Field) -> Result<InequalityAudit> {
    if !matches!(u.grid().spec(), GridSpec::Radial { dim: 3, .. }) {
        return Err(Error::UnsupportedGrid("inequality audit needs a radial grid in R^3".into()));
    }
    if u.is_zero() {
        return Err(Error::Precondition("inequality audit of the zero field".into()));
    }
    let d = coulomb_energy(u)?;
    let l125 = lp_norm(u, 12.0 / 5.0, 0)?;
    let l2 = lp_norm(u, 2.0, 0)?;
    let grad2 = dirichlet(u);
    let h1 = (l2 * l2 + grad2).sqrt();
    let q1 = d / l125.powi(4);
    let q2 = l125.powi(4) / (l2.powi(3) * h1);
    let e = 2.0 + 4.0 / 3.0;
    let q3 = lp_norm(u, e, 0)?.powf(e) / (l2.powf(4.0 / 3.0) * grad2);
    let c = sharp_hls_constant();
    Ok(InequalityAudit { q1, q2, q3, hls_constant: c, q1_within_hls: q1 <= c })
}

/// `sup` over nodes with `|x| > radius` of the mass in the unit (s, w)-disk
/// around the node, an upper bound for the mass in the unit ball.
pub fn tail_mass(u: &Field, radius: f64) -> f64 {
    let grid = u.grid();
    let w = grid.weights();
    let pts: Vec<[f64; 2]> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let v = u.component(0);
    (0..grid.len())
        .filter(|&i| grid.radius()[i] > radius)
        .map(|i| {
            let x = pts[i];
            (0..grid.len())
                .filter(|&j| (pts[j][0] - x[0]).hypot(pts[j][1] - x[1]) < 1.0)
                .map(|j| w[j] * v[j] * v[j])
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::catalog::{FCoupled, FPower, FQuarticSextic, JQuadratic};
    use crate::grid::{resample, resample_coscaled, Grid, ResampleMode};
    use std::sync::Arc;

    fn curve(m: &[f64]) -> MCCurve {
        let c: Vec<f64> = (1..=m.len()).map(|i| i as f64).collect();
        MCCurve::from_values(&c, m).unwrap()
    }

    #[test]
    fn monotone_checks() {
        let r = check_monotone(&curve(&[-1.0, -2.0, -1.0, -3.0]), 0.0).unwrap();
        assert!(!r.monotone);
        assert_eq!(r.worst.unwrap(), (2.0, 3.0, 1.0));
        assert!(check_monotone(&curve(&[2.0, 2.0, 2.0]), 0.0).unwrap().monotone);
        assert!(check_monotone(&curve(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn subadditivity_with_zero_matches_monotone() {
        for m in [vec![-1.0, -2.0, -1.0, -3.0], vec![-0.1, -0.5, -0.7], vec![0.0, 0.3, -0.2, 0.1]] {
            let k = curve(&m);
            let mono = check_monotone(&k, 0.0).unwrap();
            let sub = check_subadditivity(&k, &ProblemAtInfinity::Zero, 0.0).unwrap();
            let (c1, c2, d) = mono.worst.unwrap();
            let (c, lambda, d2) = sub.subadditive_worst.unwrap();
            assert_eq!((lambda, c, d2), (c1, c2, d));
            assert_eq!(sub.monotone, sub.subadditive);
        }
    }

    #[test]
    fn endpoint_and_autonomous() {
        // m(c) = -c^3: strictly subadditive.
        let k = curve(&[-1.0, -8.0, -27.0]);
        let r = check_subadditivity(&k, &ProblemAtInfinity::Autonomous, 0.0).unwrap();
        assert!(r.subadditive && r.strict_margin > 0.0);
        assert_eq!(r.endpoint_defect, 0.0);
        // Linear curve: the large inequality holds with equality.
        let lin = curve(&[-1.0, -2.0, -3.0]);
        let r = check_subadditivity(&lin, &ProblemAtInfinity::Autonomous, 1e-12).unwrap();
        assert!(r.subadditive && r.strict_margin.abs() < 1e-12);
        let r = check_subadditivity(&lin, &ProblemAtInfinity::Curve(curve(&[-0.5, -1.0, -1.5])), 0.0).unwrap();
        assert_eq!(r.endpoint_defect, -0.5);
    }

    #[test]
    fn homogeneity_checks() {
        let k = curve(&[-1.0, -4.0, -9.0]);
        assert!(homogeneity_bound_check(&k, 2.0, 1e-12).unwrap().is_empty());
        let bad = MCCurve::from_values(&[1.0, 2.0], &[-1.0, -0.5]).unwrap();
        let v = homogeneity_bound_check(&bad, 2.0, 0.0).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].lambda, v[0].bound), (2.0, -4.0));
        assert!(homogeneity_bound_check(&curve(&[-1.0]), 2.0, 0.0).is_err());
    }

    #[test]
    fn interpolation() {
        let k = MCCurve::from_values(&[1.0, 3.0], &[-1.0, -5.0]).unwrap();
        assert_eq!(k.interpolate(0.5), -0.5);
        assert_eq!(k.interpolate(2.0), -3.0);
        assert_eq!(k.interpolate(10.0), -5.0);
        assert!(MCCurve::from_values(&[1.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn decay_gaussian() {
        let g = Grid::new(GridSpec::Radial { dim: 3, r_max: 10.0, n: 20000 }).unwrap();
        let u = Field::from_radial(g, |r| (-r * r).exp());
        let m = decay_check(&u, 3, 2.0).unwrap();
        let exact = 0.75f64.powf(0.75) * (-0.75f64).exp();
        // Node sampling of the maximum costs O(h^2).
        assert!((m - exact).abs() < 1e-7, "{m} vs {exact}");
        let bumpy = u.map(|x| x * 0.0 + 1.0).add_scaled(-1.0, &u).unwrap();
        assert!(decay_check(&bumpy, 3, 2.0).is_err());
    }

    #[test]
    fn decay_compact_and_tail() {
        let g = Grid::new(GridSpec::Radial { dim: 3, r_max: 4.0, n: 400 }).unwrap();
        let u = Field::from_radial(g.clone(), |r| (1.0 - r).max(0.0));
        let m = decay_check(&u, 3, 2.0).unwrap();
        // Attained strictly inside the support.
        let i = g.radius().iter().zip(u.values()).position(|(&r, &v)| (r.powf(1.5) * v - m).abs() < 1e-15).unwrap();
        assert!(u.values()[i] > 0.0 && i > 0);
        // Tail consistency: int_{r > R} u^2 <= M^2 int_{r > R} r^{-3}.
        let w = g.weights();
        for cut in [0.2, 0.5, 0.8] {
            let tail: f64 = (0..g.len()).filter(|&j| g.radius()[j] > cut).map(|j| w[j] * u.values()[j].powi(2)).sum();
            let bound: f64 = (0..g.len()).filter(|&j| g.radius()[j] > cut).map(|j| w[j] * m * m * g.radius()[j].powi(-3)).sum();
            assert!(tail <= bound);
        }
    }

    #[test]
    fn hls_audit() {
        let g = Grid::new(GridSpec::radial_default(3)).unwrap();
        let u = Field::from_radial(g.clone(), |r| (-r * r).exp());
        let a = inequality_audit(&u).unwrap();
        assert!(a.q1_within_hls && a.q1 < 0.99 * a.hls_constant);
        // Lieb's optimizer f = (1 + r^2)^(-5/2) nearly attains the constant.
        let opt = Field::from_radial(g, |r| (1.0 + r * r).powf(-1.25));
        let b = inequality_audit(&opt).unwrap();
        assert!(b.q1 <= b.hls_constant && b.q1 > 0.99 * b.hls_constant, "{} vs {}", b.q1, b.hls_constant);
        // Scale invariance of q3.
        let ut = resample(&u, 2.0, ResampleMode::MassPreserving).unwrap();
        let c = inequality_audit(&ut).unwrap();
        assert!((c.q3 / a.q3 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hls_closed_form() {
        // pi^(1/2) Gamma(1) / Gamma(5/2) * (Gamma(3/2) / Gamma(3))^(-2/3)
        let sqrt_pi = PI.sqrt();
        let oracle = sqrt_pi / (0.75 * sqrt_pi) * (0.5 * sqrt_pi / 2.0).powf(-2.0 / 3.0);
        assert!((sharp_hls_constant() - oracle).abs() < 1e-14);
    }

    #[test]
    fn choquard_certificate() {
        let g = Grid::new(GridSpec::Radial { dim: 3, r_max: 20.0, n: 1024 }).unwrap();
        let p = ProblemSpec::builder(Family::Choquard, g.clone()).build().unwrap();
        let w = Field::from_radial(g, |r| (-r * r).exp());
        let w = w.scaled(1.0 / w.norm2_sq().sqrt());
        let ts = [1e-3, 0.05, 0.1, 0.2, 0.4, 0.8];
        let cert = certificate_choquard(&p, 1.0, &w, &ts).unwrap();
        assert!(cert.success && cert.best_param < 1.0);
        assert!(cert.constraint_check < 1e-12);
        let d = coulomb_energy(&w).unwrap();
        assert!((cert.rows[0].exact / 1e-3 + d).abs() < 0.05 * d);
        assert!(cert.rows.iter().all(|r| r.bound >= r.exact));
    }

    #[test]
    fn quasilinear_certificate() {
        let g = Grid::new(GridSpec::line_default()).unwrap();
        let f = Arc::new(FCoupled { a0: 1.0, tau: 0.0, sigma: 1.0, beta: 0.0, p: 2.0, m: 1, r0: 1.0, delta: 1.0 });
        let p = ProblemSpec::builder(Family::Quasilinear, g).nonlinearity(f).build().unwrap();
        let thetas = [1e-3, 1e-2, 0.1, 1.0];
        let cert = certificate_quasilinear(&p, &thetas).unwrap();
        assert!(cert.constraint_check <= 1e-6, "{}", cert.constraint_check);
        assert!(cert.success);
    }

    #[test]
    fn zero_nonlinearity_curve() {
        let g = Grid::new(GridSpec::Line { x_max: 5.0, n: 128 }).unwrap();
        let p = ProblemSpec::builder(Family::Stuart, g).build().unwrap();
        let k = scan_mass_curve(&p, &[0.5, 1.0, 2.0], &SolveConfig::default()).unwrap();
        // Ghost zeros at both ends: eigenvalues 4/h^2 sin^2(k pi / (2 (n + 1))).
        let h = 10.0 / 128.0;
        let lambda = 4.0 / (h * h) * (PI / (2.0 * 129.0)).sin().powi(2);
        for pt in &k.points {
            assert!(pt.converged);
            assert!((pt.m - pt.c * lambda / 2.0).abs() < 1e-8 * pt.m, "{} vs {}", pt.m, pt.c * lambda / 2.0);
        }
    }

    #[test]
    fn stuart_sweep() {
        let g = Grid::new(GridSpec::Line { x_max: 40.0, n: 1024 }).unwrap();
        let f = Arc::new(FPower { a: 1.0, d: 1.0, alpha: 0.5, r0: 1.0, delta: 1.0 });
        let p = ProblemSpec::builder(Family::Stuart, g).lagrangian(Arc::new(JQuadratic { growth: Default::default() })).nonlinearity(f).build().unwrap();
        let k = scan_mass_curve(&p, &[0.5, 1.0, 2.0, 4.0], &SolveConfig::default()).unwrap();
        assert!(k.points.iter().all(|pt| pt.converged && pt.m < 0.0));
        let tol = 1e-6 * k.points[3].m.abs();
        assert!(check_monotone(&k, tol).unwrap().monotone);
    }

    fn br_problem() -> ProblemSpec {
        let g = Grid::new(GridSpec::Cylindrical { k: 2, dim: 3, s_max: 16.0, w_max: 16.0, ns: 64, nw: 64 }).unwrap();
        ProblemSpec::builder(Family::BadialeRolando, g)
            .nonlinearity(Arc::new(FQuarticSextic { a: 1.0, b: 1.0 }))
            .hardy(1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn br_rho0_and_dilation() {
        let p = br_problem();
        let est = estimate_rho0(&p, (250.0, 2000.0), &SolveConfig::default(), 1e-8).unwrap();
        assert!((est.hi - est.lo) / est.hi <= 0.01);
        assert!(est.m_hi < 0.0 && est.m_lo >= -1e-8);
        assert!(est.m_at_double < 0.0);

        let u = &est.minimizer_at_double;
        let e = total_energy(&p, u).unwrap();
        for t in [1.5, 2.0, 3.0] {
            let v = resample_coscaled(u, t, ResampleMode::Dilation).unwrap();
            let pv = p.with_grid(v.grid().clone()).unwrap();
            let ev = total_energy(&pv, &v).unwrap();
            let kin = e.kinetic_prefactor * e.j_term + e.hardy_term;
            let predicted = t.powf(1.0 - 2.0 / 3.0) * kin - t * e.f_term;
            assert!((ev.total - predicted).abs() <= 1e-3 * predicted.abs(), "t={t}: {} vs {predicted}", ev.total);
            assert!((ev.constraint_value / e.constraint_value - t).abs() < 1e-12 * t);
        }
    }
}
