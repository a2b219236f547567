//! Problem definitions and the discrete energy
//! `J(u) = k sum_c int j_c(u_c, |grad u_c|) + k mu int u^2/|y|^2 - int F(|x|, u) - D(u)`
//! together with its L2 gradient.
//!
//! Gradients live on the staggered faces of the grid: on each face the value
//! is the average of the two adjacent nodes and the derivative is their
//! difference quotient. The gradient returned by [`energy_gradient`] is the
//! exact derivative of this discrete energy divided by the quadrature weights.

pub mod catalog;
pub mod coulomb;

use std::fmt;
use std::sync::Arc;

pub use catalog::{ConstraintTerm, Lagrangian, Nonlinearity, Params};
pub use coulomb::{coulomb_bilinear, coulomb_energy, coulomb_potential};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Choquard,
    Quasilinear,
    Stuart,
    BadialeRolando,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Choquard, Family::Quasilinear, Family::Stuart, Family::BadialeRolando];

    pub fn name(self) -> &'static str {
        match self {
            Family::Choquard => "choquard",
            Family::Quasilinear => "quasilinear",
            Family::Stuart => "stuart",
            Family::BadialeRolando => "badiale_rolando",
        }
    }

    pub fn from_name(name: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownEntry(name.to_string()))
    }

    pub fn kinetic_prefactor(self) -> f64 {
        match self {
            Family::Choquard | Family::Quasilinear => 1.0,
            Family::Stuart | Family::BadialeRolando => 0.5,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully specified minimization problem (up to the constraint level `c`).
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    family: Family,
    grid: Arc<Grid>,
    components: usize,
    lagrangians: Vec<Arc<dyn Lagrangian>>,
    nonlinearity: Option<Arc<dyn Nonlinearity>>,
    constraints: Vec<Arc<dyn ConstraintTerm>>,
    hardy: f64,
}

pub struct ProblemBuilder {
    family: Family,
    grid: Arc<Grid>,
    components: Option<usize>,
    lagrangians: Vec<Arc<dyn Lagrangian>>,
    nonlinearity: Option<Arc<dyn Nonlinearity>>,
    constraints: Vec<Arc<dyn ConstraintTerm>>,
    hardy: f64,
}

impl ProblemBuilder {
    pub fn components(mut self, m: usize) -> Self {
        self.components = Some(m);
        self
    }

    /// One Lagrangian shared by every component.
    pub fn lagrangian(mut self, j: Arc<dyn Lagrangian>) -> Self {
        self.lagrangians = vec![j];
        self
    }

    pub fn lagrangians(mut self, js: Vec<Arc<dyn Lagrangian>>) -> Self {
        self.lagrangians = js;
        self
    }

    pub fn nonlinearity(mut self, f: Arc<dyn Nonlinearity>) -> Self {
        self.nonlinearity = Some(f);
        self
    }

    /// One constraint density shared by every component.
    pub fn constraint(mut self, g: Arc<dyn ConstraintTerm>) -> Self {
        self.constraints = vec![g];
        self
    }

    pub fn constraints(mut self, gs: Vec<Arc<dyn ConstraintTerm>>) -> Self {
        self.constraints = gs;
        self
    }

    pub fn hardy(mut self, mu: f64) -> Self {
        self.hardy = mu;
        self
    }

    pub fn build(self) -> Result<ProblemSpec> {
        let m = self
            .components
            .or_else(|| self.nonlinearity.as_ref().map(|f| f.components()))
            .unwrap_or(1);
        let lagrangians = broadcast(self.lagrangians, m, "Lagrangians", || {
            Arc::new(catalog::JQuadratic { growth: Default::default() }) as Arc<dyn Lagrangian>
        })?;
        let constraints = broadcast(self.constraints, m, "constraint terms", || {
            Arc::new(catalog::GSquare) as Arc<dyn ConstraintTerm>
        })?;
        let spec = ProblemSpec {
            family: self.family,
            grid: self.grid,
            components: m,
            lagrangians,
            nonlinearity: self.nonlinearity,
            constraints,
            hardy: self.hardy,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn broadcast<T: Clone>(v: Vec<T>, m: usize, what: &str, default: impl Fn() -> T) -> Result<Vec<T>> {
    match v.len() {
        0 => Ok(vec![default(); m]),
        1 => Ok(vec![v[0].clone(); m]),
        n if n == m => Ok(v),
        n => Err(Error::InvalidProblem(format!("{n} {what} given for {m} components"))),
    }
}

fn is_square(g: &dyn ConstraintTerm) -> bool {
    [-1.7, 0.3, 1.0, 2.5].iter().all(|&s| g.value(s) == s * s)
}

impl ProblemSpec {
    pub fn builder(family: Family, grid: Arc<Grid>) -> ProblemBuilder {
        ProblemBuilder {
            family,
            grid,
            components: None,
            lagrangians: Vec::new(),
            nonlinearity: None,
            constraints: Vec::new(),
            hardy: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        let m = self.components;
        if m == 0 {
            return bad("at least one component is required".into());
        }
        if let Some(f) = &self.nonlinearity {
            if f.components() != m {
                return bad(format!("nonlinearity {} couples {} components, problem has {m}", f.name(), f.components()));
            }
        }
        if !(self.hardy.is_finite() && self.hardy >= 0.0) {
            return bad(format!("Hardy coefficient must be a nonnegative number, got {}", self.hardy));
        }
        if self.hardy != 0.0 && self.family != Family::BadialeRolando {
            return bad(format!("a Hardy term is only defined for badiale_rolando, not {}", self.family));
        }
        let spec = self.grid.spec();
        let l2 = self.constraints.iter().all(|g| is_square(g.as_ref()));
        match self.family {
            Family::Choquard => {
                if !matches!(spec, GridSpec::Radial { dim: 3, .. }) {
                    return bad("choquard needs a radial grid in R^3".into());
                }
                if m != 1 {
                    return bad("choquard is a scalar problem".into());
                }
            }
            Family::Quasilinear => {
                if matches!(spec, GridSpec::Cylindrical { .. }) {
                    return bad("quasilinear needs a line or radial grid".into());
                }
            }
            Family::Stuart => {
                if matches!(spec, GridSpec::Cylindrical { .. }) {
                    return bad("stuart needs a line or radial grid".into());
                }
                if m != 1 {
                    return bad("stuart is a scalar problem".into());
                }
            }
            Family::BadialeRolando => {
                match *spec {
                    GridSpec::Cylindrical { k, .. } if k >= 2 => {}
                    _ => return bad("badiale_rolando needs a cylindrical grid with k >= 2".into()),
                }
                if m != 1 {
                    return bad("badiale_rolando is a scalar problem".into());
                }
                if let Some(f) = &self.nonlinearity {
                    if !f.is_autonomous() {
                        return bad(format!("badiale_rolando needs an autonomous nonlinearity, got {}", f.name()));
                    }
                }
            }
        }
        if self.family != Family::Quasilinear && !l2 {
            return bad(format!("{} is constrained by the L2 norm (G_square)", self.family));
        }
        if self.grid.is_cylindrical() {
            for j in &self.lagrangians {
                if j.quadratic_coefficient().is_none() {
                    return bad(format!(
                        "cylindrical grids support only Lagrangians of the form a t^2, got {}",
                        j.name()
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn lagrangians(&self) -> &[Arc<dyn Lagrangian>] {
        &self.lagrangians
    }

    pub fn nonlinearity(&self) -> Option<&Arc<dyn Nonlinearity>> {
        self.nonlinearity.as_ref()
    }

    pub fn constraints(&self) -> &[Arc<dyn ConstraintTerm>] {
        &self.constraints
    }

    pub fn hardy(&self) -> f64 {
        self.hardy
    }

    pub fn kinetic_prefactor(&self) -> f64 {
        self.family.kinetic_prefactor()
    }

    /// True when every constraint density is `s^2`.
    pub fn is_l2_constrained(&self) -> bool {
        self.constraints.iter().all(|g| is_square(g.as_ref()))
    }

    /// Common homogeneity degree of all constraint densities, if any.
    pub fn constraint_homogeneity(&self) -> Option<f64> {
        let p = self.constraints[0].homogeneity()?;
        self.constraints.iter().all(|g| g.homogeneity() == Some(p)).then_some(p)
    }

    /// Same problem on another grid of the same kind.
    pub fn with_grid(&self, grid: Arc<Grid>) -> Result<ProblemSpec> {
        let mut p = self.clone();
        p.grid = grid;
        p.validate()?;
        Ok(p)
    }

    fn check_field(&self, u: &Field) -> Result<()> {
        if **u.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        if u.components() != self.components {
            return Err(Error::InvalidParameter(format!(
                "field has {} components, problem has {}",
                u.components(),
                self.components
            )));
        }
        Ok(())
    }
}

/// Itemized energy. `hardy_term` already includes the kinetic prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub j_term: f64,
    pub f_term: f64,
    pub coulomb_term: f64,
    pub hardy_term: f64,
    pub kinetic_prefactor: f64,
    pub total: f64,
    pub constraint_value: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic_prefactor: f64, j_term: f64, hardy_term: f64, f_term: f64, coulomb_term: f64, constraint_value: f64) -> Self {
        EnergyBreakdown {
            j_term,
            f_term,
            coulomb_term,
            hardy_term,
            kinetic_prefactor,
            total: kinetic_prefactor * j_term + hardy_term - f_term - coulomb_term,
            constraint_value,
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Energy and, when requested, the raw derivative `dE/du_i` (not yet divided by weights).
fn evaluate(p: &ProblemSpec, u: &Field, want_grad: bool) -> Result<(EnergyBreakdown, Option<Vec<f64>>)> {
    p.check_field(u)?;
    let grid = p.grid();
    let n = grid.len();
    let m = p.components;
    let w = grid.weights();
    let pref = p.kinetic_prefactor();
    let mut raw = if want_grad { Some(vec![0.0; n * m]) } else { None };

    let mut j_term = 0.0;
    for c in 0..m {
        let j = p.lagrangians[c].as_ref();
        let v = u.component(c);
        let mut missing = false;
        let mut g = raw.as_mut().map(|r| &mut r[c * n..(c + 1) * n]);
        grid.for_each_face(|_, f| {
            let ua = f.a.map_or(0.0, |i| v[i]);
            let ub = f.b.map_or(0.0, |i| v[i]);
            let s = 0.5 * (ua + ub);
            let d = (ub - ua) / f.h;
            j_term += f.weight * j.value(s, d.abs());
            if let Some(g) = g.as_deref_mut() {
                match j.partials(s, d.abs()) {
                    Some((js, jt)) => {
                        let flux = jt * sign(d) / f.h;
                        if let Some(a) = f.a {
                            g[a] += pref * f.weight * (0.5 * js - flux);
                        }
                        if let Some(b) = f.b {
                            g[b] += pref * f.weight * (0.5 * js + flux);
                        }
                    }
                    None => missing = true,
                }
            }
        });
        if missing {
            return Err(Error::InvalidProblem(format!("Lagrangian {} provides no partials", j.name())));
        }
    }

    let mut f_term = 0.0;
    if let Some(f) = &p.nonlinearity {
        let radius = grid.radius();
        let mut s = vec![0.0; m];
        let mut fk = vec![0.0; m];
        for i in 0..n {
            for c in 0..m {
                s[c] = u.values()[c * n + i];
            }
            f_term += w[i] * f.value(radius[i], &s);
            if let Some(g) = raw.as_mut() {
                if !f.partials(radius[i], &s, &mut fk) {
                    return Err(Error::InvalidProblem(format!("nonlinearity {} provides no partials", f.name())));
                }
                for c in 0..m {
                    g[c * n + i] -= w[i] * fk[c];
                }
            }
        }
    }

    let mut hardy_term = 0.0;
    if p.hardy != 0.0 {
        let coef = pref * p.hardy;
        for i in 0..n {
            let s = grid.point(i)[0];
            let inv = 1.0 / (s * s);
            let v = u.values()[i];
            hardy_term += coef * w[i] * v * v * inv;
            if let Some(g) = raw.as_mut() {
                g[i] += 2.0 * coef * w[i] * v * inv;
            }
        }
    }

    let mut coulomb_term = 0.0;
    if p.family == Family::Choquard {
        let phi = coulomb_potential(u)?;
        let v = u.values();
        let ph = phi.values();
        for i in 0..n {
            coulomb_term += w[i] * v[i] * v[i] * ph[i];
        }
        if let Some(g) = raw.as_mut() {
            for i in 0..n {
                g[i] -= 4.0 * w[i] * ph[i] * v[i];
            }
        }
    }

    let constraint_value = constraint_value(p, u);
    let e = EnergyBreakdown::new(pref, j_term, hardy_term, f_term, coulomb_term, constraint_value);
    if !e.total.is_finite() || !constraint_value.is_finite() {
        return Err(Error::NonFinite(format!("energy ({e:?})")));
    }
    if let Some(g) = &raw {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("energy gradient".into()));
        }
    }
    Ok((e, raw))
}

pub fn total_energy(p: &ProblemSpec, u: &Field) -> Result<EnergyBreakdown> {
    Ok(evaluate(p, u, false)?.0)
}

/// L2 gradient of the total energy (derivative divided by quadrature weights).
pub fn energy_gradient(p: &ProblemSpec, u: &Field) -> Result<Field> {
    Ok(energy_and_gradient(p, u)?.1)
}

pub fn energy_and_gradient(p: &ProblemSpec, u: &Field) -> Result<(EnergyBreakdown, Field)> {
    let (e, raw) = evaluate(p, u, true)?;
    let mut g = raw.expect("gradient requested");
    let w = p.grid().weights();
    let n = w.len();
    for (idx, v) in g.iter_mut().enumerate() {
        *v /= w[idx % n];
    }
    Ok((e, Field::from_values(p.grid().clone(), p.components, g)?))
}

/// `sum_k int G_k(u_k)`.
pub fn constraint_value(p: &ProblemSpec, u: &Field) -> f64 {
    let w = p.grid().weights();
    let n = w.len();
    let mut s = 0.0;
    for (c, g) in p.constraints.iter().enumerate() {
        let v = &u.values()[c * n..(c + 1) * n];
        for i in 0..n {
            s += w[i] * g.value(v[i]);
        }
    }
    s
}

/// L2 gradient of the constraint functional, `G_k'(u_k)` pointwise.
pub fn constraint_gradient(p: &ProblemSpec, u: &Field) -> Field {
    let n = u.nodes();
    let mut out = u.clone();
    for (c, g) in p.constraints.iter().enumerate() {
        for v in &mut out.values_mut()[c * n..(c + 1) * n] {
            *v = g.derivative(*v);
        }
    }
    out
}

// ------------------------------------------------------------ coupling checks

/// Sample ranges for [`validate_coupling`]. Every component ranges over `s`
/// (nonnegative values: rearranged fields are nonnegative), increments over `steps`.
#[derive(Clone, Debug)]
pub struct SampleBox {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub steps: Vec<f64>,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            r: vec![0.0, 0.5, 1.0, 3.0, 10.0],
            s: vec![0.0, 0.1, 0.5, 1.0, 2.0],
            steps: vec![0.05, 0.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingCondition {
    /// `F(r, s + h e_i + k e_j) + F(r, s) >= F(r, s + h e_i) + F(r, s + k e_j)`.
    CrossSupermodular { i: usize, j: usize },
    /// `F(r1, s + h e_i) + F(r0, s) <= F(r1, s) + F(r0, s + h e_i)` for `r0 < r1`.
    RadialMonotone { i: usize, r1: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingViolation {
    pub condition: CouplingCondition,
    pub r: f64,
    pub s: Vec<f64>,
    pub h: f64,
    pub k: f64,
    /// Signed slack of the inequality; negative means violated.
    pub defect: f64,
}

#[derive(Clone, Debug, Default)]
pub struct CouplingReport {
    pub checked: usize,
    pub violations: Vec<CouplingViolation>,
}

impl CouplingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_coupling(f: &dyn Nonlinearity, sample: &SampleBox) -> CouplingReport {
    let m = f.components();
    let mut report = CouplingReport::default();
    // Cartesian product of the per-component samples.
    let total = sample.s.len().pow(m as u32);
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            (0..m)
                .map(|_| {
                    let v = sample.s[idx % sample.s.len()];
                    idx /= sample.s.len();
                    v
                })
                .collect()
        })
        .collect();
    let shifted = |s: &[f64], i: usize, h: f64| {
        let mut t = s.to_vec();
        t[i] += h;
        t
    };
    let tol = |vals: [f64; 4]| 1e-12 * (1.0 + vals.iter().map(|v| v.abs()).fold(0.0, f64::max));
    for s in &points {
        for &r in &sample.r {
            for i in 0..m {
                for j in (i + 1)..m {
                    for &h in &sample.steps {
                        for &k in &sample.steps {
                            let a = f.value(r, &shifted(&shifted(s, i, h), j, k));
                            let b = f.value(r, s);
                            let c = f.value(r, &shifted(s, i, h));
                            let d = f.value(r, &shifted(s, j, k));
                            let defect = a + b - c - d;
                            report.checked += 1;
                            if defect < -tol([a, b, c, d]) {
                                report.violations.push(CouplingViolation {
                                    condition: CouplingCondition::CrossSupermodular { i, j },
                                    r,
                                    s: s.clone(),
                                    h,
                                    k,
                                    defect,
                                });
                            }
                        }
                    }
                }
            }
            for &r1 in sample.r.iter().filter(|&&r1| r1 > r) {
                for i in 0..m {
                    for &h in &sample.steps {
                        let sh = shifted(s, i, h);
                        let a = f.value(r1, s);
                        let b = f.value(r, &sh);
                        let c = f.value(r1, &sh);
                        let d = f.value(r, s);
                        let defect = a + b - c - d;
                        report.checked += 1;
                        if defect < -tol([a, b, c, d]) {
                            report.violations.push(CouplingViolation {
                                condition: CouplingCondition::RadialMonotone { i, r1 },
                                r,
                                s: s.clone(),
                                h,
                                k: 0.0,
                                defect,
                            });
                        }
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dirichlet, laplacian, GridSpec};
    use approx::assert_relative_eq;
    use catalog::{FCoupled, FPower, JQuadratic};
    use std::f64::consts::PI;

    fn jq() -> Arc<dyn Lagrangian> {
        Arc::new(JQuadratic { growth: Default::default() })
    }

    #[test]
    fn family_names_roundtrip() {
        for f in Family::ALL {
            assert_eq!(Family::from_name(f.name()).unwrap(), f);
        }
        assert!(Family::from_name("schrodinger").is_err());
    }

    #[test]
    fn family_grid_compatibility() {
        let line = Grid::new(GridSpec::Line { x_max: 10.0, n: 64 }).unwrap();
        let r3 = Grid::new(GridSpec::Radial { dim: 3, r_max: 10.0, n: 64 }).unwrap();
        let cyl = Grid::new(GridSpec::Cylindrical { k: 2, dim: 3, s_max: 5.0, w_max: 5.0, ns: 16, nw: 16 }).unwrap();
        assert!(ProblemSpec::builder(Family::Choquard, line.clone()).build().is_err());
        assert!(ProblemSpec::builder(Family::Choquard, r3.clone()).build().is_ok());
        assert!(ProblemSpec::builder(Family::Stuart, cyl.clone()).build().is_err());
        assert!(ProblemSpec::builder(Family::BadialeRolando, line.clone()).build().is_err());
        assert!(ProblemSpec::builder(Family::BadialeRolando, cyl.clone()).hardy(1.0).build().is_ok());
        assert!(ProblemSpec::builder(Family::Stuart, line.clone()).hardy(1.0).build().is_err());
        let quartic = catalog::lagrangian("j_quad_plus_quartic", &Params::new()).unwrap();
        assert!(ProblemSpec::builder(Family::BadialeRolando, cyl).lagrangian(quartic).build().is_err());
        let gp = catalog::constraint("G_power", &[("p".to_string(), 3.0)].into()).unwrap();
        assert!(ProblemSpec::builder(Family::Stuart, line.clone()).constraint(gp.clone()).build().is_err());
        assert!(ProblemSpec::builder(Family::Quasilinear, line).constraint(gp).build().is_ok());
    }

    #[test]
    fn zero_field_zero_energy() {
        let g = Grid::new(GridSpec::Radial { dim: 3, r_max: 10.0, n: 64 }).unwrap();
        let p = ProblemSpec::builder(Family::Choquard, g.clone()).build().unwrap();
        let z = Field::zeros(g, 1);
        let e = total_energy(&p, &z).unwrap();
        assert_eq!(e, EnergyBreakdown::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(energy_gradient(&p, &z).unwrap().is_zero());
    }

    #[test]
    fn choquard_gaussian_closed_forms() {
        let g = Grid::new(GridSpec::radial_default(3)).unwrap();
        let p = ProblemSpec::builder(Family::Choquard, g.clone()).lagrangian(jq()).build().unwrap();
        let u = Field::from_radial(g, |r| (-r * r).exp());
        let e = total_energy(&p, &u).unwrap();
        assert_relative_eq!(e.j_term, 3.0 * PI.powf(1.5) / (2.0 * 2f64.sqrt()), max_relative = 1e-4);
        assert_relative_eq!(e.coulomb_term, PI.powf(2.5) / 4.0, max_relative = 1e-8);
        assert_relative_eq!(e.constraint_value, (PI / 2.0).powf(1.5), max_relative = 1e-10);
        assert_eq!(e.total, e.j_term - e.coulomb_term);
    }

    #[test]
    fn quadratic_gradient_is_laplacian() {
        let g = Grid::new(GridSpec::Line { x_max: 10.0, n: 400 }).unwrap();
        let u = Field::from_fn(g.clone(), 1, |_, x| (-x[0] * x[0]).exp() * (1.0 + 0.2 * x[0]));
        let lap = laplacian(&u);
        for (fam, factor) in [(Family::Quasilinear, -2.0), (Family::Stuart, -1.0)] {
            let p = ProblemSpec::builder(fam, g.clone()).build().unwrap();
            let grad = energy_gradient(&p, &u).unwrap();
            for (a, b) in grad.values().iter().zip(lap.values()) {
                assert!((a - factor * b).abs() < 1e-9 * (1.0 + b.abs()));
            }
            assert_relative_eq!(total_energy(&p, &u).unwrap().j_term, dirichlet(&u), max_relative = 1e-14);
        }
    }

    #[test]
    fn stuart_far_bump_energy_below_kinetic() {
        let g = Grid::new(GridSpec::Line { x_max: 40.0, n: 2048 }).unwrap();
        let f = Arc::new(FPower { a: 1.0, d: 1.0, alpha: 0.5, r0: 5.0, delta: 0.1 });
        let p = ProblemSpec::builder(Family::Stuart, g.clone()).nonlinearity(f).build().unwrap();
        let u = Field::from_fn(g, 1, |_, x| {
            let y = x[0] - 20.0;
            if y.abs() < 2.0 {
                0.1 * (PI * y / 4.0).cos().powi(2)
            } else {
                0.0
            }
        });
        let e = total_energy(&p, &u).unwrap();
        assert!(e.f_term >= 0.0);
        assert!(e.total <= 0.5 * e.j_term);
    }

    fn fd_check(p: &ProblemSpec, u: &Field, seed: u64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grad = energy_gradient(p, u).unwrap();
        for _ in 0..5 {
            let c: f64 = rng.gen_range(0.5..2.0);
            let a: Vec<f64> = (0..u.components()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let phi = Field::from_fn(u.grid().clone(), u.components(), |k, x| {
                a[k] * (-(x[0] - 0.3).powi(2) / c - x[1] * x[1] / c).exp()
            });
            let eps = 1e-5;
            let ep = total_energy(p, &u.add_scaled(eps, &phi).unwrap()).unwrap().total;
            let em = total_energy(p, &u.add_scaled(-eps, &phi).unwrap()).unwrap().total;
            let fd = (ep - em) / (2.0 * eps);
            let an = grad.dot(&phi).unwrap();
            assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "{}: fd {fd} vs {an}", p.family());
        }
    }

    #[test]
    fn gradient_matches_differences_small() {
        let r3 = Grid::new(GridSpec::Radial { dim: 3, r_max: 12.0, n: 256 }).unwrap();
        let p = ProblemSpec::builder(Family::Choquard, r3.clone()).build().unwrap();
        fd_check(&p, &Field::from_radial(r3, |r| (-r * r / 2.0).exp()), 1);

        let line = Grid::new(GridSpec::Line { x_max: 10.0, n: 256 }).unwrap();
        let f = Arc::new(FCoupled { a0: 1.0, tau: 0.5, sigma: 1.0, beta: 0.5, p: 2.0, m: 2, r0: 1.0, delta: 1.0 });
        let j = catalog::lagrangian("j_weighted", &[("b".to_string(), 1.5)].into()).unwrap();
        let p = ProblemSpec::builder(Family::Quasilinear, line.clone()).nonlinearity(f).lagrangian(j).build().unwrap();
        let u = Field::from_fn(line, 2, |k, x| (1.0 + k as f64) * (-x[0] * x[0] / 3.0).exp());
        fd_check(&p, &u, 2);

        let cyl = Grid::new(GridSpec::Cylindrical { k: 2, dim: 3, s_max: 6.0, w_max: 6.0, ns: 48, nw: 48 }).unwrap();
        let f = catalog::nonlinearity("F_quartic_sextic", &Params::new()).unwrap();
        let p = ProblemSpec::builder(Family::BadialeRolando, cyl.clone()).nonlinearity(f).hardy(1.0).build().unwrap();
        let u = Field::from_fn(cyl, 1, |_, x| x[0] * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp());
        fd_check(&p, &u, 3);
    }

    #[test]
    fn coupling_checks() {
        let f = FCoupled { a0: 1.0, tau: 1.0, sigma: 1.0, beta: 0.5, p: 2.0, m: 2, r0: 1.0, delta: 1.0 };
        let rep = validate_coupling(&f, &SampleBox::default());
        assert!(rep.passed(), "{:?}", rep.violations.first());
        assert!(rep.checked > 0);

        #[derive(Debug)]
        struct Anti;
        impl Nonlinearity for Anti {
            fn name(&self) -> String {
                "anti".into()
            }
            fn components(&self) -> usize {
                2
            }
            fn value(&self, _r: f64, s: &[f64]) -> f64 {
                -s[0] * s[1]
            }
            fn partials(&self, _r: f64, _s: &[f64], _o: &mut [f64]) -> bool {
                false
            }
            fn is_autonomous(&self) -> bool {
                true
            }
            fn radially_nonincreasing(&self) -> bool {
                true
            }
            fn delta(&self) -> f64 {
                1.0
            }
        }
        let rep = validate_coupling(&Anti, &SampleBox::default());
        assert!(!rep.passed());
        for v in &rep.violations {
            assert!(matches!(v.condition, CouplingCondition::CrossSupermodular { .. }));
            assert_relative_eq!(v.defect, -v.h * v.k, max_relative = 1e-12);
        }
    }

    #[test]
    fn radial_monotone_exponential_weight() {
        #[derive(Debug)]
        struct ExpWeight;
        impl Nonlinearity for ExpWeight {
            fn name(&self) -> String {
                "exp".into()
            }
            fn components(&self) -> usize {
                1
            }
            fn value(&self, r: f64, s: &[f64]) -> f64 {
                (-r).exp() * s[0] * s[0]
            }
            fn partials(&self, r: f64, s: &[f64], o: &mut [f64]) -> bool {
                o[0] = 2.0 * (-r).exp() * s[0];
                true
            }
            fn is_autonomous(&self) -> bool {
                false
            }
            fn radially_nonincreasing(&self) -> bool {
                true
            }
            fn delta(&self) -> f64 {
                1.0
            }
        }
        assert!(validate_coupling(&ExpWeight, &SampleBox::default()).passed());
    }
}
