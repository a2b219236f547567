//! Built-in Lagrangians, nonlinearities and constraint terms, selected by name.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Named numeric parameters of a catalog entry.
pub type Params = BTreeMap<String, f64>;

/// Constants of the upper growth bounds `j(s, t) <= C |s|^6 + C t^2` and
/// `j(s, t) <= beta t^p` for `s, t` in `[0, alpha]`. They are configuration,
/// not derived from `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConstants {
    pub c: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl Default for GrowthConstants {
    fn default() -> Self {
        GrowthConstants { c: 1.0, beta: 1.0, alpha: 1.0 }
    }
}

/// Gradient Lagrangian `j(s, t)` with `s` the field value and `t = |grad u|`.
pub trait Lagrangian: Send + Sync + Debug {
    fn name(&self) -> String;
    fn value(&self, s: f64, t: f64) -> f64;
    /// `(j_s, j_t)`, or `None` if the Lagrangian is evaluation-only.
    fn partials(&self, s: f64, t: f64) -> Option<(f64, f64)>;
    /// Coercivity exponent `p` and constant `nu` in `j(s, t) >= nu t^p`.
    fn coercivity(&self) -> (f64, f64);
    fn growth(&self) -> GrowthConstants;
    /// `Some(a)` when `j(s, t) = a t^2` for every `s`.
    fn quadratic_coefficient(&self) -> Option<f64> {
        None
    }
}

/// Lower-bound record `F(r, s) >= A (1 + r)^(-d) s^(2 + alpha)` for
/// `s in [0, delta]`, `r >= r0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayBound {
    pub a: f64,
    pub d: f64,
    pub alpha: f64,
    pub r0: f64,
    pub delta: f64,
}

/// Lower-bound record `F(r, s) >= mu_f r^(-tau) s_j^(sigma + p)` for `r > r0`, `|s| <= delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBound {
    pub mu_f: f64,
    pub tau: f64,
    pub sigma: f64,
    pub delta: f64,
    pub r0: f64,
}

/// Nonlinearity `F(r, s_1, ..., s_m)` with radial weight argument `r = |x|`.
pub trait Nonlinearity: Send + Sync + Debug {
    fn name(&self) -> String;
    /// Number of field components the nonlinearity couples.
    fn components(&self) -> usize;
    fn value(&self, r: f64, s: &[f64]) -> f64;
    /// Writes `f_k = dF/ds_k` into `out`; returns `false` if partials are unavailable.
    fn partials(&self, r: f64, s: &[f64], out: &mut [f64]) -> bool;
    /// True when `F` does not depend on `r`.
    fn is_autonomous(&self) -> bool;
    /// True when `r -> F(r, s)` is non-increasing for every `s >= 0`.
    fn radially_nonincreasing(&self) -> bool;
    /// Amplitude below which `F` is known to be nonnegative.
    fn delta(&self) -> f64;
    fn decay_bound(&self) -> Option<DecayBound> {
        None
    }
    fn power_bound(&self) -> Option<PowerBound> {
        None
    }
}

/// Constraint density `G_k(s) >= gamma |s|^p`, `G_k(0) = 0`.
pub trait ConstraintTerm: Send + Sync + Debug {
    fn name(&self) -> String;
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
    fn gamma(&self) -> f64;
    /// Degree `p` if `G(l s) = l^p G(s)` for `l > 0`.
    fn homogeneity(&self) -> Option<f64>;
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

// ---------------------------------------------------------------- Lagrangians

#[derive(Clone, Debug)]
pub struct JQuadratic {
    pub growth: GrowthConstants,
}

impl Lagrangian for JQuadratic {
    fn name(&self) -> String {
        "j_quadratic".into()
    }
    fn value(&self, _s: f64, t: f64) -> f64 {
        t * t
    }
    fn partials(&self, _s: f64, t: f64) -> Option<(f64, f64)> {
        Some((0.0, 2.0 * t))
    }
    fn coercivity(&self) -> (f64, f64) {
        (2.0, 1.0)
    }
    fn growth(&self) -> GrowthConstants {
        self.growth
    }
    fn quadratic_coefficient(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Regularized p-Laplacian density `(t^2 + eps)^(p/2) - eps^(p/2)`.
#[derive(Clone, Debug)]
pub struct JPLaplace {
    pub p: f64,
    pub growth: GrowthConstants,
}

impl JPLaplace {
    pub const EPS: f64 = 1e-12;
}

impl Lagrangian for JPLaplace {
    fn name(&self) -> String {
        format!("j_plaplace(p={})", self.p)
    }
    fn value(&self, _s: f64, t: f64) -> f64 {
        (t * t + Self::EPS).powf(self.p / 2.0) - Self::EPS.powf(self.p / 2.0)
    }
    fn partials(&self, _s: f64, t: f64) -> Option<(f64, f64)> {
        Some((0.0, self.p * t * (t * t + Self::EPS).powf(self.p / 2.0 - 1.0)))
    }
    fn coercivity(&self) -> (f64, f64) {
        // Below p = 2 the regularization costs a little coercivity near t = 0.
        (self.p, if self.p >= 2.0 { 1.0 } else { 0.99 })
    }
    fn growth(&self) -> GrowthConstants {
        self.growth
    }
    fn quadratic_coefficient(&self) -> Option<f64> {
        (self.p == 2.0).then_some(1.0)
    }
}

/// `t^2 + t^4 / 4`.
#[derive(Clone, Debug)]
pub struct JQuadPlusQuartic {
    pub growth: GrowthConstants,
}

impl Lagrangian for JQuadPlusQuartic {
    fn name(&self) -> String {
        "j_quad_plus_quartic".into()
    }
    fn value(&self, _s: f64, t: f64) -> f64 {
        t * t + 0.25 * t.powi(4)
    }
    fn partials(&self, _s: f64, t: f64) -> Option<(f64, f64)> {
        Some((0.0, 2.0 * t + t.powi(3)))
    }
    fn coercivity(&self) -> (f64, f64) {
        (2.0, 1.0)
    }
    fn growth(&self) -> GrowthConstants {
        self.growth
    }
}

/// Amplitude-dependent stiffness `(1 + b s^2 / (1 + s^2)) t^2`, `b >= 0`.
#[derive(Clone, Debug)]
pub struct JWeighted {
    pub b: f64,
    pub growth: GrowthConstants,
}

impl Lagrangian for JWeighted {
    fn name(&self) -> String {
        format!("j_weighted(b={})", self.b)
    }
    fn value(&self, s: f64, t: f64) -> f64 {
        (1.0 + self.b * s * s / (1.0 + s * s)) * t * t
    }
    fn partials(&self, s: f64, t: f64) -> Option<(f64, f64)> {
        let q = 1.0 + s * s;
        let ds = self.b * 2.0 * s / (q * q);
        Some((ds * t * t, 2.0 * (1.0 + self.b * s * s / q) * t))
    }
    fn coercivity(&self) -> (f64, f64) {
        (2.0, 1.0)
    }
    fn growth(&self) -> GrowthConstants {
        self.growth
    }
}

// ------------------------------------------------------------- Nonlinearities

/// `A (1 + r)^(-d) |s|^(2 + alpha)`, single component.
#[derive(Clone, Debug)]
pub struct FPower {
    pub a: f64,
    pub d: f64,
    pub alpha: f64,
    pub r0: f64,
    pub delta: f64,
}

impl Nonlinearity for FPower {
    fn name(&self) -> String {
        format!("F_power(A={},d={},alpha={},r0={},delta={})", self.a, self.d, self.alpha, self.r0, self.delta)
    }
    fn components(&self) -> usize {
        1
    }
    fn value(&self, r: f64, s: &[f64]) -> f64 {
        self.a * (1.0 + r).powf(-self.d) * s[0].abs().powf(2.0 + self.alpha)
    }
    fn partials(&self, r: f64, s: &[f64], out: &mut [f64]) -> bool {
        out[0] = self.a * (1.0 + r).powf(-self.d) * (2.0 + self.alpha) * s[0].abs().powf(self.alpha) * s[0];
        true
    }
    fn is_autonomous(&self) -> bool {
        self.d == 0.0
    }
    fn radially_nonincreasing(&self) -> bool {
        self.a >= 0.0 && self.d >= 0.0
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn decay_bound(&self) -> Option<DecayBound> {
        Some(DecayBound { a: self.a, d: self.d, alpha: self.alpha, r0: self.r0, delta: self.delta })
    }
}

/// Cooperative system nonlinearity with weight `a(r) = a0 (1 + r)^(-tau)`:
///
/// `F = a/(p+sigma) sum_k |s_k|^(p+sigma) + 2 beta a/(p+sigma) sum_{i != j} |s_i|^q |s_j|^q`,
/// `q = (p + sigma) / 2`.
#[derive(Clone, Debug)]
pub struct FCoupled {
    pub a0: f64,
    pub tau: f64,
    pub sigma: f64,
    pub beta: f64,
    pub p: f64,
    pub m: usize,
    pub r0: f64,
    pub delta: f64,
}

impl FCoupled {
    fn weight(&self, r: f64) -> f64 {
        self.a0 * (1.0 + r).powf(-self.tau)
    }
}

impl Nonlinearity for FCoupled {
    fn name(&self) -> String {
        format!(
            "F_coupled(a0={},tau={},sigma={},beta={},p={},m={})",
            self.a0, self.tau, self.sigma, self.beta, self.p, self.m
        )
    }
    fn components(&self) -> usize {
        self.m
    }
    fn value(&self, r: f64, s: &[f64]) -> f64 {
        let e = self.p + self.sigma;
        let q = e / 2.0;
        let a = self.weight(r);
        let diag: f64 = s.iter().map(|x| x.abs().powf(e)).sum();
        let mut cross = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if i != j {
                    cross += s[i].abs().powf(q) * s[j].abs().powf(q);
                }
            }
        }
        a / e * diag + 2.0 * self.beta * a / e * cross
    }
    fn partials(&self, r: f64, s: &[f64], out: &mut [f64]) -> bool {
        let e = self.p + self.sigma;
        let q = e / 2.0;
        let a = self.weight(r);
        for k in 0..s.len() {
            let sk = s[k];
            let mut v = a * sk.abs().powf(e - 1.0) * sign(sk);
            if sk != 0.0 {
                let others: f64 = (0..s.len()).filter(|&j| j != k).map(|j| s[j].abs().powf(q)).sum();
                v += 2.0 * self.beta * a * sk.abs().powf(q - 1.0) * sign(sk) * others;
            }
            out[k] = v;
        }
        true
    }
    fn is_autonomous(&self) -> bool {
        self.tau == 0.0
    }
    fn radially_nonincreasing(&self) -> bool {
        self.a0 >= 0.0 && self.tau >= 0.0 && self.beta >= 0.0
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn power_bound(&self) -> Option<PowerBound> {
        let mu_f = self.a0 / (self.p + self.sigma) * (self.r0 / (1.0 + self.r0)).powf(self.tau);
        Some(PowerBound { mu_f, tau: self.tau, sigma: self.sigma, delta: self.delta, r0: self.r0 })
    }
}

/// Autonomous `a s^4 / 4 - b |s|^6 / 6`: focusing at small amplitude,
/// saturating at `|s| = sqrt(a / b)`.
#[derive(Clone, Debug)]
pub struct FQuarticSextic {
    pub a: f64,
    pub b: f64,
}

impl Nonlinearity for FQuarticSextic {
    fn name(&self) -> String {
        format!("F_quartic_sextic(a={},b={})", self.a, self.b)
    }
    fn components(&self) -> usize {
        1
    }
    fn value(&self, _r: f64, s: &[f64]) -> f64 {
        let s2 = s[0] * s[0];
        self.a * s2 * s2 / 4.0 - self.b * s2 * s2 * s2 / 6.0
    }
    fn partials(&self, _r: f64, s: &[f64], out: &mut [f64]) -> bool {
        let x = s[0];
        out[0] = self.a * x.powi(3) - self.b * x.powi(5);
        true
    }
    fn is_autonomous(&self) -> bool {
        true
    }
    fn radially_nonincreasing(&self) -> bool {
        true
    }
    fn delta(&self) -> f64 {
        // F >= 0 exactly for s^2 <= 3a / (2b).
        (1.5 * self.a / self.b).sqrt()
    }
}

// ----------------------------------------------------------------- Constraints

#[derive(Clone, Debug)]
pub struct GSquare;

impl ConstraintTerm for GSquare {
    fn name(&self) -> String {
        "G_square".into()
    }
    fn value(&self, s: f64) -> f64 {
        s * s
    }
    fn derivative(&self, s: f64) -> f64 {
        2.0 * s
    }
    fn gamma(&self) -> f64 {
        1.0
    }
    fn homogeneity(&self) -> Option<f64> {
        Some(2.0)
    }
}

#[derive(Clone, Debug)]
pub struct GPower {
    pub p: f64,
}

impl ConstraintTerm for GPower {
    fn name(&self) -> String {
        format!("G_power(p={})", self.p)
    }
    fn value(&self, s: f64) -> f64 {
        s.abs().powf(self.p)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.p * s.abs().powf(self.p - 1.0) * sign(s)
    }
    fn gamma(&self) -> f64 {
        1.0
    }
    fn homogeneity(&self) -> Option<f64> {
        Some(self.p)
    }
}

// --------------------------------------------------------------------- lookup

#[derive(Clone, Copy)]
struct ParamSpec {
    name: &'static str,
    default: Option<f64>,
    doc: &'static str,
}

struct Entry {
    name: &'static str,
    kind: &'static str,
    summary: &'static str,
    params: &'static [ParamSpec],
}

const GROWTH: [ParamSpec; 3] = [
    ParamSpec { name: "C", default: Some(1.0), doc: "constant in j <= C|s|^6 + C t^2" },
    ParamSpec { name: "beta", default: Some(1.0), doc: "constant in j <= beta t^p near 0" },
    ParamSpec { name: "alpha", default: Some(1.0), doc: "range of the bound j <= beta t^p" },
];

const ENTRIES: &[Entry] = &[
    Entry { name: "j_quadratic", kind: "lagrangian", summary: "t^2", params: &GROWTH },
    Entry {
        name: "j_plaplace",
        kind: "lagrangian",
        summary: "(t^2 + 1e-12)^(p/2) - 1e-12^(p/2)",
        params: &[
            ParamSpec { name: "p", default: None, doc: "exponent, p > 1" },
            GROWTH[0],
            GROWTH[1],
            GROWTH[2],
        ],
    },
    Entry { name: "j_quad_plus_quartic", kind: "lagrangian", summary: "t^2 + t^4/4", params: &GROWTH },
    Entry {
        name: "j_weighted",
        kind: "lagrangian",
        summary: "(1 + b s^2/(1 + s^2)) t^2",
        params: &[
            ParamSpec { name: "b", default: Some(1.0), doc: "stiffening, b >= 0" },
            GROWTH[0],
            GROWTH[1],
            GROWTH[2],
        ],
    },
    Entry {
        name: "F_power",
        kind: "nonlinearity",
        summary: "A (1 + r)^(-d) |s|^(2 + alpha)",
        params: &[
            ParamSpec { name: "A", default: None, doc: "amplitude" },
            ParamSpec { name: "d", default: Some(0.0), doc: "radial decay exponent" },
            ParamSpec { name: "alpha", default: None, doc: "excess power over 2" },
            ParamSpec { name: "r0", default: Some(1.0), doc: "radius beyond which the lower bound holds" },
            ParamSpec { name: "delta", default: Some(1.0), doc: "amplitude range of the lower bound" },
        ],
    },
    Entry {
        name: "F_coupled",
        kind: "nonlinearity",
        summary: "a/(p+sigma) sum|s_k|^(p+sigma) + 2 beta a/(p+sigma) sum_{i!=j} |s_i s_j|^((p+sigma)/2), a = a0 (1+r)^(-tau)",
        params: &[
            ParamSpec { name: "a0", default: None, doc: "weight at the origin" },
            ParamSpec { name: "tau", default: None, doc: "weight decay exponent, 0 <= tau < p" },
            ParamSpec { name: "sigma", default: None, doc: "excess power over p" },
            ParamSpec { name: "beta", default: None, doc: "coupling strength, beta >= 0" },
            ParamSpec { name: "p", default: None, doc: "base exponent, p > 1" },
            ParamSpec { name: "m", default: Some(2.0), doc: "number of components" },
            ParamSpec { name: "r0", default: Some(1.0), doc: "radius beyond which the lower bound holds" },
            ParamSpec { name: "delta", default: Some(1.0), doc: "amplitude range of the lower bound" },
        ],
    },
    Entry {
        name: "F_quartic_sextic",
        kind: "nonlinearity",
        summary: "a s^4/4 - b |s|^6/6 (autonomous)",
        params: &[
            ParamSpec { name: "a", default: Some(1.0), doc: "quartic coefficient, a > 0" },
            ParamSpec { name: "b", default: Some(1.0), doc: "sextic coefficient, b > 0" },
        ],
    },
    Entry { name: "G_square", kind: "constraint", summary: "s^2", params: &[] },
    Entry {
        name: "G_power",
        kind: "constraint",
        summary: "|s|^p",
        params: &[ParamSpec { name: "p", default: None, doc: "homogeneity degree, p > 1" }],
    },
];

fn entry(kind: &str, name: &str) -> Result<&'static Entry> {
    ENTRIES
        .iter()
        .find(|e| e.kind == kind && e.name == name)
        .ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

/// Resolves parameters against an entry schema: unknown keys and missing
/// required values are errors, absent optional values take their default.
fn resolve(e: &Entry, given: &Params) -> Result<BTreeMap<&'static str, f64>> {
    for key in given.keys() {
        if !e.params.iter().any(|p| p.name == key) {
            return Err(Error::InvalidParameter(format!("`{}` has no parameter `{key}`", e.name)));
        }
    }
    let mut out = BTreeMap::new();
    for p in e.params {
        let v = match (given.get(p.name), p.default) {
            (Some(&v), _) => v,
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::InvalidParameter(format!("`{}` requires parameter `{}`", e.name, p.name)))
            }
        };
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("`{}`: parameter `{}` is not finite", e.name, p.name)));
        }
        out.insert(p.name, v);
    }
    Ok(out)
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

pub fn lagrangian(name: &str, params: &Params) -> Result<Arc<dyn Lagrangian>> {
    let e = entry("lagrangian", name)?;
    let v = resolve(e, params)?;
    let growth = GrowthConstants { c: v["C"], beta: v["beta"], alpha: v["alpha"] };
    require(growth.c > 0.0 && growth.beta > 0.0 && growth.alpha > 0.0, || {
        format!("`{name}`: growth constants must be positive")
    })?;
    Ok(match name {
        "j_quadratic" => Arc::new(JQuadratic { growth }),
        "j_plaplace" => {
            let p = v["p"];
            require(p > 1.0, || format!("`j_plaplace` needs p > 1, got {p}"))?;
            Arc::new(JPLaplace { p, growth })
        }
        "j_quad_plus_quartic" => Arc::new(JQuadPlusQuartic { growth }),
        "j_weighted" => {
            let b = v["b"];
            require(b >= 0.0, || format!("`j_weighted` needs b >= 0, got {b}"))?;
            Arc::new(JWeighted { b, growth })
        }
        _ => unreachable!("catalog entry without constructor"),
    })
}

pub fn nonlinearity(name: &str, params: &Params) -> Result<Arc<dyn Nonlinearity>> {
    let e = entry("nonlinearity", name)?;
    let v = resolve(e, params)?;
    Ok(match name {
        "F_power" => {
            let f = FPower { a: v["A"], d: v["d"], alpha: v["alpha"], r0: v["r0"], delta: v["delta"] };
            require(f.alpha > -1.0, || format!("`F_power` needs alpha > -1, got {}", f.alpha))?;
            require(f.d >= 0.0, || format!("`F_power` needs d >= 0, got {}", f.d))?;
            require(f.delta > 0.0, || "`F_power` needs delta > 0".into())?;
            Arc::new(f)
        }
        "F_coupled" => {
            let m = v["m"];
            require(m >= 1.0 && m.fract() == 0.0, || format!("`F_coupled` needs integer m >= 1, got {m}"))?;
            let f = FCoupled {
                a0: v["a0"],
                tau: v["tau"],
                sigma: v["sigma"],
                beta: v["beta"],
                p: v["p"],
                m: m as usize,
                r0: v["r0"],
                delta: v["delta"],
            };
            require(f.p > 1.0, || format!("`F_coupled` needs p > 1, got {}", f.p))?;
            require(f.sigma >= 0.0, || format!("`F_coupled` needs sigma >= 0, got {}", f.sigma))?;
            require(f.tau >= 0.0 && f.tau < f.p, || format!("`F_coupled` needs 0 <= tau < p, got {}", f.tau))?;
            require(f.beta >= 0.0, || format!("`F_coupled` needs beta >= 0, got {}", f.beta))?;
            require(f.r0 > 0.0 && f.delta > 0.0, || "`F_coupled` needs r0, delta > 0".into())?;
            Arc::new(f)
        }
        "F_quartic_sextic" => {
            let f = FQuarticSextic { a: v["a"], b: v["b"] };
            require(f.a > 0.0 && f.b > 0.0, || "`F_quartic_sextic` needs a, b > 0".into())?;
            Arc::new(f)
        }
        _ => unreachable!("catalog entry without constructor"),
    })
}

pub fn constraint(name: &str, params: &Params) -> Result<Arc<dyn ConstraintTerm>> {
    let e = entry("constraint", name)?;
    let v = resolve(e, params)?;
    Ok(match name {
        "G_square" => Arc::new(GSquare),
        "G_power" => {
            let p = v["p"];
            require(p > 1.0, || format!("`G_power` needs p > 1, got {p}"))?;
            Arc::new(GPower { p })
        }
        _ => unreachable!("catalog entry without constructor"),
    })
}

/// Human-readable listing of every built-in entry and its parameter schema.
pub fn listing() -> String {
    let mut out = String::new();
    for (kind, title) in [("lagrangian", "Lagrangians"), ("nonlinearity", "Nonlinearities"), ("constraint", "Constraints")] {
        out.push_str(title);
        out.push_str(":\n");
        for e in ENTRIES.iter().filter(|e| e.kind == kind) {
            let names: Vec<&str> = e.params.iter().map(|p| p.name).collect();
            out.push_str(&format!("  {}({})  = {}\n", e.name, names.join(", "), e.summary));
            for p in e.params {
                let def = p.default.map_or("required".to_string(), |d| format!("default {d}"));
                out.push_str(&format!("      {:<6} {} [{}]\n", p.name, p.doc, def));
            }
        }
    }
    out
}

/// Violations of the structural assumptions on `j` found on a sample grid.
pub fn audit_lagrangian(j: &dyn Lagrangian, s_samples: &[f64], t_samples: &[f64]) -> Vec<String> {
    let (p, nu) = j.coercivity();
    let mut out = Vec::new();
    for &s in s_samples {
        for (i, &t) in t_samples.iter().enumerate() {
            let v = j.value(s, t);
            if v < nu * t.powf(p) * (1.0 - 1e-12) {
                out.push(format!("coercivity fails at s={s}, t={t}: {v} < {}", nu * t.powf(p)));
            }
            if s < 0.0 && j.value(s, t) > j.value(-s, t) * (1.0 + 1e-12) {
                out.push(format!("j(-|s|, t) > j(|s|, t) at s={s}, t={t}"));
            }
            if i + 1 < t_samples.len() {
                let t2 = t_samples[i + 1];
                if t2 > t && j.value(s, t2) < v {
                    out.push(format!("not non-decreasing in t at s={s} between {t} and {t2}"));
                }
                let mid = j.value(s, 0.5 * (t + t2));
                if mid > 0.5 * (v + j.value(s, t2)) * (1.0 + 1e-12) + 1e-300 {
                    out.push(format!("midpoint convexity fails at s={s} between {t} and {t2}"));
                }
            }
        }
    }
    out
}
