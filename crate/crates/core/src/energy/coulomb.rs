//! Coulomb self-energy `D(u) = iint u^2(x) u^2(y) / |x - y|` for radial fields in R^3.
//!
//! The energy is evaluated in field form, `D = (4 pi)^2 int_0^inf B(R)^2 / R^2 dR`
//! with `B(R) = int_0^R rho r^2 dr` the enclosed charge per steradian. `B` is
//! accumulated at the nodes with a fourth-order stencil, the `R` integral
//! uses the midpoint rule on the nodes plus the exact exterior tail
//! `T^2 / R_max` with `T` the total charge. The resulting discrete form is a positive
//! semidefinite quadratic form in `rho`, so Cauchy-Schwarz holds exactly, and
//! the potential is its exact discrete derivative.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

const FOUR_PI_SQ: f64 = 16.0 * PI * PI;

/// Visits the nonzero entries `(k, j, coefficient)` of the increment operator
/// mapping `b_j = rho_j r_j^2` to `int_{r_(k-1)}^{r_k} b` (from 0 when k = 0).
fn for_each_increment(n: usize, h: f64, mut f: impl FnMut(usize, usize, f64)) {
    let c = h / 24.0;
    // Even mirror b_{-1} = b_0, b_{-2} = b_1; zero beyond the last node.
    f(0, 0, 13.0 * c);
    f(0, 1, -c);
    f(1, 0, 12.0 * c);
    f(1, 1, 13.0 * c);
    if n > 2 {
        f(1, 2, -c);
    }
    for k in 2..n {
        f(k, k - 2, -c);
        f(k, k - 1, 13.0 * c);
        f(k, k, 13.0 * c);
        if k + 1 < n {
            f(k, k + 1, -c);
        }
    }
}

struct Radial3 {
    h: f64,
    r: Vec<f64>,
}

impl Radial3 {
    fn of(u: &Field) -> Result<Self> {
        match *u.grid().spec() {
            GridSpec::Radial { dim: 3, .. } => {}
            ref other => {
                return Err(Error::UnsupportedGrid(format!(
                    "Coulomb energy needs a radial grid in R^3, got {} grid in dimension {}",
                    other.kind_name(),
                    other.dim()
                )))
            }
        }
        if u.components() != 1 {
            return Err(Error::InvalidParameter("Coulomb energy acts on single-component fields".into()));
        }
        let axis = &u.grid().axes()[0];
        Ok(Radial3 { h: axis.h, r: axis.coords.clone() })
    }

    fn n(&self) -> usize {
        self.r.len()
    }

    /// Enclosed charge at every node and the total charge.
    fn enclosed(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let n = self.n();
        let b: Vec<f64> = (0..n).map(|i| u[i] * u[i] * self.r[i] * self.r[i]).collect();
        let total = self.h * b.iter().sum::<f64>();
        let mut inc = vec![0.0; n];
        for_each_increment(n, self.h, |k, j, c| inc[k] += c * b[j]);
        let mut acc = 0.0;
        for v in inc.iter_mut() {
            acc += *v;
            *v = acc;
        }
        (inc, total)
    }

    fn r_max(&self) -> f64 {
        self.h * self.n() as f64
    }
}

/// Potential `Phi(x) = int u^2(y) / |x - y| dy`, as the exact discrete
/// derivative `Phi_j = (dD/d rho_j) / (2 w_j)`.
pub fn coulomb_potential(u: &Field) -> Result<Field> {
    let g = Radial3::of(u)?;
    let n = g.n();
    let (b, total) = g.enclosed(u.values());
    // z_k = sum_{q >= k} 2 h B_q / r_q^2
    let mut z = vec![0.0; n];
    let mut acc = 0.0;
    for q in (0..n).rev() {
        acc += 2.0 * g.h * b[q] / (g.r[q] * g.r[q]);
        z[q] = acc;
    }
    let mut pt = vec![0.0; n];
    for_each_increment(n, g.h, |k, j, coef| pt[j] += coef * z[k]);
    // dD/d rho_j = (4 pi)^2 r_j^2 [(P^T z)_j + 2 T h / R_max], divided by 2 w_j = 8 pi r_j^2 h.
    let tail = 2.0 * total / g.r_max();
    let values = pt.into_iter().map(|v| 2.0 * PI * (v / g.h + tail)).collect();
    Field::from_values(u.grid().clone(), 1, values)
}

pub fn coulomb_energy(u: &Field) -> Result<f64> {
    coulomb_bilinear(u, u)
}

/// `D(v, w) = iint v^2(x) w^2(y) / |x - y|`.
pub fn coulomb_bilinear(v: &Field, w: &Field) -> Result<f64> {
    let g = Radial3::of(v)?;
    Radial3::of(w)?;
    v.same_shape(w)?;
    let (bv, tv) = g.enclosed(v.values());
    let (bw, tw) = if std::ptr::eq(v, w) { (bv.clone(), tv) } else { g.enclosed(w.values()) };
    let s: f64 = (0..g.n()).map(|q| g.h * bv[q] * bw[q] / (g.r[q] * g.r[q])).sum();
    Ok(FOUR_PI_SQ * (s + tv * tw / g.r_max()))
}
