//! Field surgeries: Schwarz rearrangement, plateau insertion, dip filling,
//! truncation, far-field bumps and disjoint mass addition.

use std::f64::consts::PI;

use crate::energy::{constraint_value, coulomb_potential, total_energy, EnergyBreakdown, Family, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::{dirichlet, sphere_area, Axis, Field, Grid, GridSpec};

/// Before/after bookkeeping of a surgery.
#[derive(Clone, Debug, PartialEq)]
pub struct SurgeryReport {
    pub surgery: String,
    pub mass_before: f64,
    pub mass_after: f64,
    pub energy_before: EnergyBreakdown,
    pub energy_after: EnergyBreakdown,
    pub description: String,
    /// Surgery-specific quantities (plateau width, added mass, ...).
    pub details: Vec<(String, f64)>,
}

impl SurgeryReport {
    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

// ------------------------------------------------------------- rearrangement

/// Groups of nodes sharing the same |x|, ordered by increasing radius.
fn shells(grid: &Grid) -> Vec<Vec<usize>> {
    let n = grid.len();
    match grid.spec() {
        GridSpec::Radial { .. } => (0..n).map(|i| vec![i]).collect(),
        GridSpec::Line { .. } => {
            let mut out = Vec::with_capacity(n / 2 + 1);
            if n % 2 == 1 {
                out.push(vec![n / 2]);
            }
            for i in n.div_ceil(2)..n {
                out.push(vec![n - 1 - i, i]);
            }
            out
        }
        GridSpec::Cylindrical { .. } => unreachable!("checked by callers"),
    }
}

/// Symmetric decreasing rearrangement of |u|, component by component.
///
/// Cells are sorted by decreasing |u| (ties by radius, then index), which
/// defines a step distribution in cumulative measure. Each shell receives the
/// average of that distribution over its own measure interval, so already
/// rearranged input is returned unchanged and `int |u|` is preserved exactly.
pub fn schwarz_rearrange(u: &Field) -> Result<Field> {
    let grid = u.grid();
    if grid.is_cylindrical() {
        return Err(Error::UnsupportedGrid("no rearrangement on cylindrical grids".into()));
    }
    let n = grid.len();
    let w = grid.weights();
    let rad = grid.radius();
    let sh = shells(grid);
    let mut out = Field::zeros(grid.clone(), u.components());
    for c in 0..u.components() {
        let a: Vec<f64> = u.component(c).iter().map(|v| v.abs()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[j].total_cmp(&a[i]).then(rad[i].total_cmp(&rad[j])).then(i.cmp(&j))
        });
        let dst = out.component_mut(c);
        // Sorted cell k covers [start, start + w) in cumulative measure.
        let mut k = 0;
        let mut start = 0.0;
        let mut filled = 0.0;
        for shell in &sh {
            let measure: f64 = shell.iter().map(|&i| w[i]).sum();
            let end = filled + measure;
            let mut acc = 0.0;
            let mut covered = filled;
            let mut single = k < n;
            let first = if k < n { a[order[k]] } else { 0.0 };
            while k < n && covered < end {
                let cell_end = start + w[order[k]];
                let upto = cell_end.min(end);
                acc += (upto - covered) * a[order[k]];
                single &= a[order[k]] == first;
                covered = upto;
                if cell_end <= end {
                    start = cell_end;
                    k += 1;
                }
            }
            let value = if single { first } else if measure > 0.0 { acc / measure } else { 0.0 };
            for &i in shell {
                dst[i] = value;
            }
            filled = end;
        }
    }
    Ok(out)
}

// --------------------------------------------------------- line-grid helpers

fn line_axis(u: &Field) -> Result<&Axis> {
    match u.grid().spec() {
        GridSpec::Line { .. } => Ok(&u.grid().axes()[0]),
        other => Err(Error::UnsupportedGrid(format!("surgery needs a line grid, got {}", other.kind_name()))),
    }
}

fn check_problem_field(p: &ProblemSpec, u: &Field) -> Result<()> {
    if **u.grid() != **p.grid() || u.components() != p.components() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Where the plateau of [`plateau_insert`] starts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlateauAnchor {
    /// First node at or beyond this radius.
    Radius(f64),
    /// First node where u drops to this level or below.
    Level(f64),
}

/// How many nodes past the anchor are tried as the plateau start.
const PLATEAU_CANDIDATES: usize = 64;

/// Inserts a plateau of height `u(rho)` on both sides of an even, radially
/// non-increasing line field and shifts the outer part outward by the
/// plateau length, adding exactly `target_mass` to the first component's
/// constraint.
///
/// The shifted outer part is linearly interpolated, so the field depends
/// continuously and monotonically on the plateau length, which is solved for
/// by bisection. A fractional shift smooths the outer part slightly; among
/// the nodes just past the anchor, `rho` is the one whose solution perturbs
/// the j-term least.
pub fn plateau_insert(p: &ProblemSpec, u: &Field, target_mass: f64, anchor: PlateauAnchor) -> Result<(Field, SurgeryReport)> {
    check_problem_field(p, u)?;
    let axis = line_axis(u)?;
    if !(target_mass.is_finite() && target_mass >= 0.0) {
        return Err(Error::InvalidParameter(format!("target mass must be nonnegative, got {target_mass}")));
    }
    let n = axis.len();
    let v = u.component(0);
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let slack = 1e-12 * vmax;
    if v.iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("plateau insertion needs a nonnegative field".into()));
    }
    if (0..n).any(|i| (v[i] - v[n - 1 - i]).abs() > slack) {
        return Err(Error::Precondition("plateau insertion needs an even field".into()));
    }
    let half: Vec<usize> = (n.div_ceil(2)..n).collect();
    if half.windows(2).any(|w| v[w[1]] > v[w[0]] + slack) {
        return Err(Error::Precondition("plateau insertion needs a field non-increasing in |x|".into()));
    }
    let k0 = match anchor {
        PlateauAnchor::Radius(rho) => half.iter().position(|&i| axis.coords[i] >= rho),
        PlateauAnchor::Level(delta) => half.iter().position(|&i| v[i] <= delta),
    }
    .ok_or_else(|| Error::Precondition(format!("anchor {anchor:?} lies outside the grid")))?;
    if v[half[k0]] == 0.0 {
        return Err(Error::Precondition("u vanishes at the plateau anchor".into()));
    }
    let energy_before = total_energy(p, u)?;
    let mass_before = energy_before.constraint_value;

    let mut best: Option<(f64, Field, usize, f64)> = None;
    let mut first_err = None;
    let last = if target_mass == 0.0 { k0 + 1 } else { (k0 + PLATEAU_CANDIDATES).min(half.len()) };
    for k in k0..last {
        if v[half[k]] == 0.0 {
            break;
        }
        match plateau_at(p, u, &half, k, target_mass, mass_before) {
            Ok((w, ell)) => {
                let cost = (total_energy(p, &w)?.j_term - energy_before.j_term).abs();
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    best = Some((cost, w, k, ell));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((_, w, k, ell)) = best else {
        return Err(first_err.unwrap_or(Error::Precondition("u vanishes at the plateau anchor".into())));
    };
    let rho = axis.coords[half[k]];
    let height = v[half[k]];
    let energy_after = total_energy(p, &w)?;
    let report = SurgeryReport {
        surgery: "plateau_insert".into(),
        mass_before,
        mass_after: energy_after.constraint_value,
        energy_before,
        energy_after,
        description: format!("plateau of length {ell:.6e} at |x| = {rho:.6} with height {height:.6e}"),
        details: vec![("rho".into(), rho), ("height".into(), height), ("w_len".into(), ell)],
    };
    Ok((w, report))
}

/// Plateau starting at `half[k]`, with its length solved for exact mass gain.
fn plateau_at(p: &ProblemSpec, u: &Field, half: &[usize], k: usize, target_mass: f64, mass_before: f64) -> Result<(Field, f64)> {
    let axis = &u.grid().axes()[0];
    let n = axis.len();
    let h = axis.h;
    let v = u.component(0);
    let rho = axis.coords[half[k]];
    let height = v[half[k]];
    let extent = axis.coords[n - 1];
    let g = p.constraints()[0].as_ref();

    let build = |ell: f64| {
        let mut w = u.clone();
        let dst = w.component_mut(0);
        for &i in &half[k + 1..] {
            let x = axis.coords[i] - ell;
            let val = if x <= rho { height } else { axis.interpolate(v, x) };
            dst[i] = val;
            dst[n - 1 - i] = val;
        }
        w
    };
    let gain = |ell: f64| constraint_value(p, &build(ell)) - mass_before;
    let too_long = |ell: f64| Error::PlateauExceedsExtent { anchor: half[k], cells: (ell / h).ceil() as usize };

    if target_mass == 0.0 {
        return Ok((u.clone(), 0.0));
    }
    let mut lo = 0.0;
    let mut hi = (target_mass / (2.0 * g.value(height))).max(h);
    while gain(hi) < target_mass {
        lo = hi;
        hi *= 2.0;
        if hi > extent - rho {
            return Err(too_long(hi));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gain(mid) < target_mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Mass of u pushed past the grid end by the shift.
    let dropped: f64 = half.iter().filter(|&&i| axis.coords[i] > extent - hi).map(|&i| 2.0 * h * g.value(v[i])).sum();
    if dropped > 1e-8 * mass_before {
        return Err(too_long(hi));
    }
    Ok((build(hi), hi))
}

/// Raises `u` to the level `u(x1)` on `[x1, x2]` (first component).
pub fn fill_dip(p: &ProblemSpec, u: &Field, x1: f64, x2: f64) -> Result<(Field, SurgeryReport)> {
    check_problem_field(p, u)?;
    let axis = line_axis(u)?;
    if !(x1 < x2) {
        return Err(Error::InvalidParameter(format!("need x1 < x2, got [{x1}, {x2}]")));
    }
    let v = u.component(0);
    let level = axis.interpolate(v, x1);
    let level2 = axis.interpolate(v, x2);
    let cell_jump = |x: f64| {
        let i = (((x - axis.coords[0]) / axis.h).floor().max(0.0) as usize).min(axis.len() - 2);
        (v[i + 1] - v[i]).abs()
    };
    let tol = cell_jump(x1).max(cell_jump(x2)) + 1e-14 * level.abs();
    if (level - level2).abs() > tol {
        return Err(Error::Precondition(format!("u(x1) = {level:.6e} and u(x2) = {level2:.6e} differ")));
    }
    let inside: Vec<usize> = (0..axis.len()).filter(|&i| axis.coords[i] >= x1 && axis.coords[i] <= x2).collect();
    let slack = tol;
    if let Some(&i) = inside.iter().find(|&&i| v[i] > level + slack) {
        return Err(Error::Precondition(format!(
            "no dip between x1 and x2: u({:.6}) = {:.6e} exceeds u(x1) = {level:.6e}",
            axis.coords[i], v[i]
        )));
    }
    let g = p.constraints()[0].as_ref();
    let mut w = u.clone();
    let mut added = 0.0;
    {
        let dst = w.component_mut(0);
        for &i in &inside {
            added += axis.weights[i] * (g.value(level) - g.value(v[i]));
            dst[i] = level;
        }
    }
    let energy_before = total_energy(p, u)?;
    let energy_after = total_energy(p, &w)?;
    let report = SurgeryReport {
        surgery: "fill_dip".into(),
        mass_before: energy_before.constraint_value,
        mass_after: energy_after.constraint_value,
        energy_before,
        energy_after,
        description: format!("filled [{x1}, {x2}] at level {level:.6e}"),
        details: vec![
            ("level".into(), level),
            ("added_mass".into(), added),
            ("dirichlet_before".into(), dirichlet(u)),
            ("dirichlet_after".into(), dirichlet(&w)),
        ],
    };
    Ok((w, report))
}

/// Cuts `u` off smoothly (cos^2 taper on `[0.9 R, R]`) and restores its L2 norm.
pub fn truncate_renormalize(u: &Field, r_cut: f64) -> Result<Field> {
    let grid = u.grid();
    if !(r_cut > 0.0 && r_cut <= grid.spec().extent()) {
        return Err(Error::InvalidParameter(format!(
            "cutoff radius {r_cut} must lie in (0, {}]",
            grid.spec().extent()
        )));
    }
    let before = u.norm2_sq();
    if before == 0.0 {
        return Err(Error::Precondition("cannot renormalize the zero field".into()));
    }
    let inner = 0.9 * r_cut;
    let cutoff = |r: f64| {
        if r <= inner {
            1.0
        } else if r >= r_cut {
            0.0
        } else {
            (0.5 * PI * (r - inner) / (r_cut - inner)).cos().powi(2)
        }
    };
    let n = u.nodes();
    let mut out = u.clone();
    for (idx, val) in out.values_mut().iter_mut().enumerate() {
        *val *= cutoff(grid.radius()[idx % n]);
    }
    let after = out.norm2_sq();
    if after == 0.0 {
        return Err(Error::Precondition(format!("u vanishes inside |x| < {r_cut}")));
    }
    if after != before {
        let s = (before / after).sqrt();
        for val in out.values_mut() {
            *val *= s;
        }
    }
    Ok(out)
}

// --------------------------------------------------------- far-field bumps

/// Composite Simpson rule.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

const QUAD_INTERVALS: usize = 4000;

/// Seed profile: cos^2 cap of radius 1.
fn seed(rho: f64) -> f64 {
    if rho < 1.0 {
        (0.5 * PI * rho).cos().powi(2)
    } else {
        0.0
    }
}

/// A compactly supported bump `v(x) = t^(N/2) u(t (x - y0))` obtained by
/// shrinking the cos^2 seed `u` of mass `d`, together with a certified
/// bracket of its local energy.
#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldBump {
    pub dim: usize,
    pub mass: f64,
    /// Shrink factor; the bump radius is `1 / t0`.
    pub t0: f64,
    pub radius: f64,
    pub amplitude: f64,
    /// Distance |y0| of the bump center from the origin.
    pub center: f64,
    /// Dirichlet integral of the unshrunk seed.
    pub seed_dirichlet: f64,
    /// `(1/2) int |grad v|^2 = t0^2 (1/2) int |grad u|^2`.
    pub kinetic: f64,
    pub i_lo: f64,
    pub i_hi: f64,
}

impl FarFieldBump {
    /// Bump with the given mass, shrink factor and center in R^dim, no energy bracket.
    pub fn new(dim: usize, mass: f64, t0: f64, center: f64) -> Self {
        let omega = sphere_area(dim);
        let nm1 = (dim - 1) as i32;
        let i2 = omega * simpson(|r| seed(r).powi(2) * r.powi(nm1), 0.0, 1.0, QUAD_INTERVALS);
        let ig = omega * simpson(|r| 0.25 * PI * PI * (PI * r).sin().powi(2) * r.powi(nm1), 0.0, 1.0, QUAD_INTERVALS);
        let a_seed = (mass / i2).sqrt();
        let seed_dirichlet = a_seed * a_seed * ig;
        FarFieldBump {
            dim,
            mass,
            t0,
            radius: 1.0 / t0,
            amplitude: a_seed * t0.powf(dim as f64 / 2.0),
            center,
            seed_dirichlet,
            kinetic: 0.5 * t0 * t0 * seed_dirichlet,
            i_lo: f64::NAN,
            i_hi: f64::NAN,
        }
    }

    /// Value at distance `dist` from the bump center.
    pub fn profile(&self, dist: f64) -> f64 {
        self.amplitude * seed(dist / self.radius)
    }

    /// `int F(r_fixed, v)` over the bump.
    fn f_integral(&self, f: &dyn crate::energy::Nonlinearity, r_fixed: f64) -> f64 {
        let omega = sphere_area(self.dim);
        let nm1 = (self.dim - 1) as i32;
        omega
            * simpson(|rho| f.value(r_fixed, &[self.profile(rho)]) * rho.powi(nm1), 0.0, self.radius, QUAD_INTERVALS)
    }

    /// Samples the bump (centered at `+center`) on a line grid, rescaled to exact discrete mass.
    pub fn on_line(&self, grid: &std::sync::Arc<Grid>) -> Result<Field> {
        if !matches!(grid.spec(), GridSpec::Line { .. }) {
            return Err(Error::UnsupportedGrid("bumps materialize on line grids only".into()));
        }
        let mut v = Field::from_fn(grid.clone(), 1, |_, x| self.profile((x[0] - self.center).abs()));
        let m = v.norm2_sq();
        if m == 0.0 {
            return Err(Error::Precondition("bump narrower than the grid spacing".into()));
        }
        let s = (self.mass / m).sqrt();
        for x in v.values_mut() {
            *x *= s;
        }
        Ok(v)
    }
}

fn grid_spacing(grid: &Grid) -> f64 {
    grid.axes()[0].h
}

/// Shrinks the seed until its kinetic energy is at most `eps` and its height
/// at most the nonlinearity's `delta`, and places it beyond radius `r0`.
pub fn far_field_bump(p: &ProblemSpec, d: f64, r0: f64, eps: f64) -> Result<(FarFieldBump, SurgeryReport)> {
    if p.family() != Family::Stuart {
        return Err(Error::InvalidProblem("far-field bumps are built for the stuart family".into()));
    }
    if !(d > 0.0 && eps > 0.0 && r0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("need d > 0, eps > 0, R0 >= 0; got {d}, {eps}, {r0}")));
    }
    let grid = p.grid();
    let dim = grid.dim();
    let delta = p.nonlinearity().map_or(f64::INFINITY, |f| f.delta());
    let probe = FarFieldBump::new(dim, d, 1.0, 0.0);
    let a_seed = probe.amplitude;
    let mut t = (2.0 * eps / probe.seed_dirichlet).sqrt();
    if delta.is_finite() {
        t = t.min((delta / a_seed).powf(2.0 / dim as f64));
    }
    let h = grid_spacing(grid);
    let margin = 2.0 * h;
    let room = grid.spec().extent() - h - r0 - margin;
    if room <= 0.0 {
        return Err(Error::BumpDoesNotFit { achieved_i_hi: f64::INFINITY, epsilon: eps });
    }
    t = t.max(2.0 / room);
    let mut bump = FarFieldBump::new(dim, d, t, 0.0);
    bump.center = r0 + bump.radius + margin;
    let (f_lo, f_hi) = match p.nonlinearity() {
        None => (0.0, 0.0),
        Some(f) => {
            if !f.radially_nonincreasing() {
                return Err(Error::InvalidProblem(format!("{} is not radially non-increasing", f.name())));
            }
            let near = bump.center - bump.radius;
            let far = bump.center + bump.radius;
            (bump.f_integral(f.as_ref(), far), bump.f_integral(f.as_ref(), near))
        }
    };
    bump.i_lo = bump.kinetic - f_hi;
    bump.i_hi = bump.kinetic - f_lo;
    if bump.i_hi > eps {
        return Err(Error::BumpDoesNotFit { achieved_i_hi: bump.i_hi, epsilon: eps });
    }
    let energy_after = EnergyBreakdown::new(p.kinetic_prefactor(), 2.0 * bump.kinetic, 0.0, f_lo, 0.0, d);
    let report = SurgeryReport {
        surgery: "far_field_bump".into(),
        mass_before: 0.0,
        mass_after: d,
        energy_before: EnergyBreakdown::new(p.kinetic_prefactor(), 0.0, 0.0, 0.0, 0.0, 0.0),
        energy_after,
        description: format!(
            "bump of radius {:.6} centered at |y0| = {:.6}; energy in [{:.6e}, {:.6e}] (total reports the upper end)",
            bump.radius, bump.center, bump.i_lo, bump.i_hi
        ),
        details: vec![
            ("t0".into(), bump.t0),
            ("radius".into(), bump.radius),
            ("center".into(), bump.center),
            ("sup".into(), bump.amplitude),
            ("i_lo".into(), bump.i_lo),
            ("i_hi".into(), bump.i_hi),
        ],
    };
    Ok((bump, report))
}

/// Adds a far-field bump of mass `c - |u|^2` with support disjoint from `u`.
///
/// For local energies the result satisfies `I(u + v) = I(u) + I(v) <= I(u) + eps`;
/// the bump is shrunk further if its discrete energy exceeds `eps`.
pub fn add_disjoint_mass(p: &ProblemSpec, u: &Field, c: f64, eps: f64) -> Result<(Field, SurgeryReport)> {
    check_problem_field(p, u)?;
    let axis = line_axis(u)?;
    let energy_before = total_energy(p, u)?;
    let mass_u = energy_before.constraint_value;
    if !(mass_u < c) {
        return Err(Error::Precondition(format!("field mass {mass_u:.6e} is not below the target {c:.6e}")));
    }
    let v0 = u.component(0);
    let support = (0..axis.len())
        .filter(|&i| v0[i] != 0.0)
        .map(|i| axis.coords[i].abs())
        .fold(0.0f64, f64::max);
    let r0 = support + 0.5 * axis.h;
    let mut target = eps;
    for _ in 0..30 {
        let (bump, _) = far_field_bump(p, c - mass_u, r0, target)?;
        let v = bump.on_line(p.grid())?;
        let overlap = v0.iter().zip(v.values()).any(|(a, b)| *a != 0.0 && *b != 0.0);
        if overlap {
            return Err(Error::Precondition("bump overlaps the field support".into()));
        }
        let ev = total_energy(p, &v)?;
        if ev.total > eps {
            target *= 0.5;
            continue;
        }
        let w = u.add_scaled(1.0, &v)?;
        let energy_after = total_energy(p, &w)?;
        let report = SurgeryReport {
            surgery: "add_disjoint_mass".into(),
            mass_before: mass_u,
            mass_after: constraint_value(p, &w),
            energy_before,
            energy_after,
            description: format!(
                "added mass {:.6e} in a bump of radius {:.6} at x = {:.6}",
                c - mass_u,
                bump.radius,
                bump.center
            ),
            details: vec![
                ("bump_mass".into(), ev.constraint_value),
                ("bump_energy".into(), ev.total),
                ("bump_j_term".into(), ev.j_term),
                ("center".into(), bump.center),
                ("radius".into(), bump.radius),
                ("i_hi".into(), bump.i_hi),
            ],
        };
        return Ok((w, report));
    }
    Err(Error::BumpDoesNotFit { achieved_i_hi: target, epsilon: eps })
}

/// Coulomb interaction of a radial field with a separated bump in R^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossTerm {
    /// `D(u + v) - D(u) - D(v) = 2 iint u^2(x) v^2(y) / |x - y|`.
    pub value: f64,
    /// Point-charge approximation `2 m_u m_v / L`.
    pub far_field: f64,
    pub separation: f64,
}

/// Cross term between a radial field `u` in R^3 and a bump centered at distance `L`:
/// `2 int v^2(s) (2 pi s / L) int_{|L - s|}^{L + s} Phi_u(r) r dr ds`.
pub fn coulomb_cross_term(u: &Field, bump: &FarFieldBump) -> Result<CrossTerm> {
    if bump.dim != 3 {
        return Err(Error::InvalidParameter("the Coulomb cross term lives in R^3".into()));
    }
    let phi = coulomb_potential(u)?;
    let grid = u.grid();
    let axis = &grid.axes()[0];
    let last = axis.coords[axis.len() - 1];
    let q = u.norm2_sq();
    let phi_at = |r: f64| {
        if r >= last {
            q / r
        } else {
            axis.interpolate(phi.values(), r)
        }
    };
    let l = bump.center;
    let inner = |s: f64| simpson(|r| phi_at(r) * r, (l - s).abs(), l + s, 400);
    let value = 2.0 * simpson(|s| bump.profile(s).powi(2) * 2.0 * PI * s / l * inner(s), 0.0, bump.radius, 400);
    Ok(CrossTerm { value, far_field: 2.0 * q * bump.mass / l, separation: l })
}
