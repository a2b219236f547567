//! Symmetry-reduced grids and discrete fields.
//!
//! Three symmetry classes are supported:
//!
//! * `Radial { dim }`: radial functions on R^dim, nodes at r_i = (i + 1/2) h;
//! * `Line`: functions on R, nodes symmetric about 0;
//! * `Cylindrical { k, dim }`: functions of (|y|, |z|) with y in R^k and z in R^(dim-k).
//!
//! Quadrature folds the symmetry measure into per-node weights, e.g.
//! `w_i = |S^(N-1)| r_i^(N-1) h` on a radial grid. Every grid also carries a
//! list of staggered faces on which gradients live; see [`Face`].

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest admissible node count per axis.
pub const MIN_NODES: usize = 16;

/// Area of the unit sphere S^(d-1) in R^d (d = 1 gives the two-point measure 2).
pub fn sphere_area(d: usize) -> f64 {
    assert!(d >= 1);
    // 2 pi^(d/2) / Gamma(d/2)
    let gamma_half = |n: usize| -> f64 {
        // Gamma(n/2) for n >= 1
        let mut g = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
        let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
        while x < n as f64 / 2.0 - 1e-12 {
            g *= x;
            x += 1.0;
        }
        g
    };
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Line {
        x_max: f64,
        n: usize,
    },
    Radial {
        dim: usize,
        r_max: f64,
        n: usize,
    },
    Cylindrical {
        k: usize,
        dim: usize,
        s_max: f64,
        w_max: f64,
        ns: usize,
        nw: usize,
    },
}

impl GridSpec {
    pub fn line_default() -> Self {
        GridSpec::Line { x_max: 40.0, n: 4096 }
    }

    pub fn radial_default(dim: usize) -> Self {
        GridSpec::Radial { dim, r_max: 20.0, n: 2048 }
    }

    pub fn cylindrical_default(k: usize, dim: usize) -> Self {
        GridSpec::Cylindrical { k, dim, s_max: 20.0, w_max: 20.0, ns: 256, nw: 256 }
    }

    pub fn validate(&self) -> Result<()> {
        let ext_ok = |e: f64| e.is_finite() && e > 0.0;
        match *self {
            GridSpec::Line { x_max, n } => {
                if !ext_ok(x_max) {
                    return Err(Error::InvalidGrid(format!("x_max must be positive, got {x_max}")));
                }
                if n < MIN_NODES {
                    return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes, got {n}")));
                }
            }
            GridSpec::Radial { dim, r_max, n } => {
                if dim == 0 {
                    return Err(Error::InvalidGrid("radial dimension must be at least 1".into()));
                }
                if !ext_ok(r_max) {
                    return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
                }
                if n < MIN_NODES {
                    return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes, got {n}")));
                }
            }
            GridSpec::Cylindrical { k, dim, s_max, w_max, ns, nw } => {
                if k == 0 || k >= dim {
                    return Err(Error::InvalidGrid(format!(
                        "cylinder split needs 1 <= k < N, got k = {k}, N = {dim}"
                    )));
                }
                if !ext_ok(s_max) || !ext_ok(w_max) {
                    return Err(Error::InvalidGrid("cylinder extents must be positive".into()));
                }
                if ns < MIN_NODES || nw < MIN_NODES {
                    return Err(Error::InvalidGrid(format!(
                        "need at least {MIN_NODES} nodes per axis, got {ns} x {nw}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension N.
    pub fn dim(&self) -> usize {
        match *self {
            GridSpec::Line { .. } => 1,
            GridSpec::Radial { dim, .. } | GridSpec::Cylindrical { dim, .. } => dim,
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GridSpec::Line { n, .. } | GridSpec::Radial { n, .. } => n,
            GridSpec::Cylindrical { ns, nw, .. } => ns * nw,
        }
    }

    /// Same node counts, all extents multiplied by `factor`.
    ///
    /// Nodes of the scaled grid are the original nodes times `factor`, which
    /// is what makes `resample` exact between co-scaled grids.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        match &mut s {
            GridSpec::Line { x_max, .. } => *x_max *= factor,
            GridSpec::Radial { r_max, .. } => *r_max *= factor,
            GridSpec::Cylindrical { s_max, w_max, .. } => {
                *s_max *= factor;
                *w_max *= factor;
            }
        }
        s
    }

    /// Largest |x| represented (the radius of the bounding box corner for cylinders).
    pub fn extent(&self) -> f64 {
        match *self {
            GridSpec::Line { x_max, .. } => x_max,
            GridSpec::Radial { r_max, .. } => r_max,
            GridSpec::Cylindrical { s_max, w_max, .. } => s_max.hypot(w_max),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GridSpec::Line { .. } => "line",
            GridSpec::Radial { .. } => "radial",
            GridSpec::Cylindrical { .. } => "cylindrical",
        }
    }
}

/// A staggered face between two nodes. `None` is a ghost node carrying the
/// value zero (Dirichlet closure); `a == b` marks the mirror face at a
/// symmetry axis, where the derivative vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub a: Option<usize>,
    pub b: Option<usize>,
    /// Measure of the dual cell attached to the face.
    pub weight: f64,
    /// Distance between the two nodes.
    pub h: f64,
}

/// One-dimensional building block of every grid.
#[derive(Clone, Debug)]
pub struct Axis {
    pub h: f64,
    pub coords: Vec<f64>,
    pub weights: Vec<f64>,
    pub faces: Vec<Face>,
    /// Whether the axis starts at a symmetry axis (half-line) or covers R.
    pub half_line: bool,
}

impl Axis {
    fn full_line(x_max: f64, n: usize) -> Self {
        let h = 2.0 * x_max / n as f64;
        let coords = (0..n).map(|i| -x_max + (i as f64 + 0.5) * h).collect();
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(Face { a: None, b: Some(0), weight: h, h });
        for i in 0..n - 1 {
            faces.push(Face { a: Some(i), b: Some(i + 1), weight: h, h });
        }
        faces.push(Face { a: Some(n - 1), b: None, weight: h, h });
        Axis { h, coords, weights: vec![h; n], faces, half_line: false }
    }

    /// Half-line carrying the measure |S^(d-1)| r^(d-1) dr.
    fn half_line(d: usize, r_max: f64, n: usize) -> Self {
        let h = r_max / n as f64;
        let omega = sphere_area(d);
        let dm1 = (d - 1) as i32;
        let coords: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let weights = coords.iter().map(|&r| omega * r.powi(dm1) * h).collect();
        let mut faces = Vec::with_capacity(n + 1);
        // Mirror face over [0, h/2]: zero derivative, exact shell measure.
        faces.push(Face {
            a: Some(0),
            b: Some(0),
            weight: omega * (0.5 * h).powi(d as i32) / d as f64,
            h,
        });
        for i in 0..n {
            let rf = (i + 1) as f64 * h;
            let b = if i + 1 < n { Some(i + 1) } else { None };
            faces.push(Face { a: Some(i), b, weight: omega * rf.powi(dm1) * h, h });
        }
        Axis { h, coords, weights, faces, half_line: true }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Linear interpolation with even extension at a half-line origin and
    /// zero extension one cell beyond either end.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let n = self.len();
        let x0 = self.coords[0];
        let mut pos = (x - x0) / self.h;
        if self.half_line && x < 0.0 {
            pos = (-x - x0) / self.h;
        }
        if pos < 0.0 {
            if self.half_line {
                // |x| < h/2 and even extension: constant.
                return values[0];
            }
            return if pos <= -1.0 { 0.0 } else { values[0] * (1.0 + pos) };
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i >= n {
            return 0.0;
        }
        let left = values[i];
        let right = if i + 1 < n { values[i + 1] } else { 0.0 };
        if frac == 0.0 {
            left
        } else {
            left + frac * (right - left)
        }
    }
}

/// Immutable grid with precomputed coordinates, weights and faces.
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    axes: Vec<Axis>,
    weights: Vec<f64>,
    radius: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let axes = match spec {
            GridSpec::Line { x_max, n } => vec![Axis::full_line(x_max, n)],
            GridSpec::Radial { dim, r_max, n } => vec![Axis::half_line(dim, r_max, n)],
            GridSpec::Cylindrical { k, dim, s_max, w_max, ns, nw } => {
                vec![Axis::half_line(k, s_max, ns), Axis::half_line(dim - k, w_max, nw)]
            }
        };
        let (weights, radius) = if axes.len() == 1 {
            let a = &axes[0];
            (a.weights.clone(), a.coords.iter().map(|x| x.abs()).collect())
        } else {
            let (s, w) = (&axes[0], &axes[1]);
            let mut wt = Vec::with_capacity(s.len() * w.len());
            let mut rad = Vec::with_capacity(s.len() * w.len());
            for i in 0..s.len() {
                for j in 0..w.len() {
                    wt.push(s.weights[i] * w.weights[j]);
                    rad.push(s.coords[i].hypot(w.coords[j]));
                }
            }
            (wt, rad)
        };
        Ok(Arc::new(Grid { spec, axes, weights, radius }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Euclidean distance |x| of each node from the origin.
    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn is_cylindrical(&self) -> bool {
        self.axes.len() == 2
    }

    /// Node coordinates: (x, 0) on a line, (r, 0) radially, (s, w) on a cylinder.
    pub fn point(&self, i: usize) -> [f64; 2] {
        if self.axes.len() == 1 {
            [self.axes[0].coords[i], 0.0]
        } else {
            let nw = self.axes[1].len();
            [self.axes[0].coords[i / nw], self.axes[1].coords[i % nw]]
        }
    }

    /// Axis tag (0 or 1) and face data for every face of the grid.
    pub fn for_each_face(&self, mut f: impl FnMut(usize, Face)) {
        if self.axes.len() == 1 {
            for &face in &self.axes[0].faces {
                f(0, face);
            }
            return;
        }
        let (sa, wa) = (&self.axes[0], &self.axes[1]);
        let nw = wa.len();
        for face in &sa.faces {
            for j in 0..nw {
                f(
                    0,
                    Face {
                        a: face.a.map(|i| i * nw + j),
                        b: face.b.map(|i| i * nw + j),
                        weight: face.weight * wa.weights[j],
                        h: face.h,
                    },
                );
            }
        }
        for i in 0..sa.len() {
            for face in &wa.faces {
                f(
                    1,
                    Face {
                        a: face.a.map(|j| i * nw + j),
                        b: face.b.map(|j| i * nw + j),
                        weight: sa.weights[i] * face.weight,
                        h: face.h,
                    },
                );
            }
        }
    }

    /// Quadrature of a nodal integrand.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: values.len(),
                components: 1,
                nodes: self.len(),
            });
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Linear (bilinear on cylinders) interpolation of nodal values at a point.
    pub fn interpolate(&self, values: &[f64], x: [f64; 2]) -> f64 {
        if self.axes.len() == 1 {
            return self.axes[0].interpolate(values, x[0]);
        }
        let (sa, wa) = (&self.axes[0], &self.axes[1]);
        let nw = wa.len();
        // Interpolate along w for the two bracketing s rows, then along s.
        let ps = (x[0].abs() - sa.coords[0]) / sa.h;
        let row = |i: usize| wa.interpolate(&values[i * nw..(i + 1) * nw], x[1]);
        if ps < 0.0 {
            return row(0);
        }
        let i = ps.floor() as usize;
        let frac = ps - i as f64;
        if i >= sa.len() {
            return 0.0;
        }
        let left = row(i);
        if frac == 0.0 {
            return left;
        }
        let right = if i + 1 < sa.len() { row(i + 1) } else { 0.0 };
        left + frac * (right - left)
    }
}

/// Discrete, possibly multi-component function on a grid.
///
/// Values are stored component-major: `values[c * n + i]`.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    components: usize,
    values: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.components == other.components && self.values == other.values
    }
}

impl Field {
    pub fn zeros(grid: Arc<Grid>, components: usize) -> Self {
        assert!(components >= 1, "a field needs at least one component");
        let n = grid.len() * components;
        Field { grid, components, values: vec![0.0; n] }
    }

    pub fn from_values(grid: Arc<Grid>, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParameter("a field needs at least one component".into()));
        }
        if values.len() != grid.len() * components {
            return Err(Error::ShapeMismatch {
                expected: grid.len() * components,
                got: values.len(),
                components,
                nodes: grid.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite field value {v}")));
        }
        Ok(Field { grid, components, values })
    }

    /// Builds a field from `f(component, point)`; see [`Grid::point`].
    pub fn from_fn(grid: Arc<Grid>, components: usize, f: impl Fn(usize, [f64; 2]) -> f64) -> Self {
        let n = grid.len();
        let mut values = Vec::with_capacity(n * components);
        for c in 0..components {
            for i in 0..n {
                values.push(f(c, grid.point(i)));
            }
        }
        Field { grid, components, values }
    }

    /// Single-component field from a profile of |x|.
    pub fn from_radial(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.radius().iter().map(|&r| f(r)).collect();
        Field { grid, components: 1, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.nodes();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.nodes();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &Field) -> Result<Field> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (o, v) in out.values.iter_mut().zip(&other.values) {
            *o += a * v;
        }
        Ok(out)
    }

    /// Weighted inner product summed over components.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.same_shape(other)?;
        Ok(weighted_dot(self.grid.weights(), &self.values, &other.values))
    }

    /// Squared L2 norm summed over components.
    pub fn norm2_sq(&self) -> f64 {
        weighted_dot(self.grid.weights(), &self.values, &self.values)
    }

    pub fn integrate(&self, component: usize) -> Result<f64> {
        self.check_component(component)?;
        self.grid.integrate(self.component(component))
    }

    fn check_component(&self, component: usize) -> Result<()> {
        if component >= self.components {
            return Err(Error::InvalidParameter(format!(
                "component {component} out of range (field has {})",
                self.components
            )));
        }
        Ok(())
    }
}

pub(crate) fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = w.len();
    let mut s = 0.0;
    for c in 0..a.len() / n {
        let (ac, bc) = (&a[c * n..(c + 1) * n], &b[c * n..(c + 1) * n]);
        for i in 0..n {
            s += w[i] * ac[i] * bc[i];
        }
    }
    s
}

/// L^p norm of one component; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(u: &Field, p: f64, component: usize) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p norm needs p >= 1, got {p}")));
    }
    u.check_component(component)?;
    let v = u.component(component);
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    let s: f64 = u.grid.weights().iter().zip(v).map(|(w, x)| w * x.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// L^p norm of the pointwise Euclidean magnitude |u| = (sum_k u_k^2)^(1/2).
pub fn lp_norm_vec(u: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p norm needs p >= 1, got {p}")));
    }
    let n = u.nodes();
    let mag: Vec<f64> = (0..n)
        .map(|i| (0..u.components).map(|c| u.values[c * n + i].powi(2)).sum::<f64>().sqrt())
        .collect();
    if p.is_infinite() {
        return Ok(mag.iter().fold(0.0f64, |m, &x| m.max(x)));
    }
    let s: f64 = u.grid.weights().iter().zip(&mag).map(|(w, x)| w * x.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Derivative along |x| (line: d/dx; cylinders: magnitude of both partials).
///
/// Centered differences in the interior, one-sided at the far ends, and the
/// even mirror next to a symmetry axis.
pub fn radial_derivative(u: &Field) -> Field {
    let grid = u.grid.clone();
    let n = grid.len();
    let mut out = Field::zeros(grid.clone(), u.components);
    let diff1 = |axis: &Axis, v: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        let m = axis.len();
        let h = axis.h;
        if i == 0 {
            if axis.half_line {
                (v(1) - v(0)) / (2.0 * h)
            } else {
                (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
            }
        } else if i == m - 1 {
            (3.0 * v(m - 1) - 4.0 * v(m - 2) + v(m - 3)) / (2.0 * h)
        } else {
            (v(i + 1) - v(i - 1)) / (2.0 * h)
        }
    };
    for c in 0..u.components {
        let src = u.component(c);
        let dst = &mut out.values[c * n..(c + 1) * n];
        if grid.axes.len() == 1 {
            let axis = &grid.axes[0];
            let v = |i: usize| src[i];
            for (i, d) in dst.iter_mut().enumerate() {
                *d = diff1(axis, &v, i);
            }
        } else {
            let (sa, wa) = (&grid.axes[0], &grid.axes[1]);
            let nw = wa.len();
            for i in 0..sa.len() {
                for j in 0..nw {
                    let ds = diff1(sa, &|ii: usize| src[ii * nw + j], i);
                    let dw = diff1(wa, &|jj: usize| src[i * nw + jj], j);
                    dst[i * nw + j] = ds.hypot(dw);
                }
            }
        }
    }
    out
}

/// Discrete Laplacian consistent with the face-based Dirichlet form:
/// `-sum_i w_i u_i (lap u)_i = sum_f W_f ((u_b - u_a)/h)^2`.
pub fn laplacian(u: &Field) -> Field {
    let grid = u.grid.clone();
    let n = grid.len();
    let w = grid.weights();
    let mut out = Field::zeros(grid.clone(), u.components);
    for c in 0..u.components {
        let src = u.component(c);
        let dst = &mut out.values[c * n..(c + 1) * n];
        grid.for_each_face(|_, f| {
            let ua = f.a.map_or(0.0, |i| src[i]);
            let ub = f.b.map_or(0.0, |i| src[i]);
            let flux = f.weight * (ub - ua) / (f.h * f.h);
            if let Some(a) = f.a {
                dst[a] += flux;
            }
            if let Some(b) = f.b {
                dst[b] -= flux;
            }
        });
        for i in 0..n {
            dst[i] /= w[i];
        }
    }
    out
}

/// Discrete Dirichlet integral sum_k int |grad u_k|^2 on the staggered faces.
pub fn dirichlet(u: &Field) -> f64 {
    let grid = u.grid();
    let mut s = 0.0;
    for c in 0..u.components {
        let v = u.component(c);
        grid.for_each_face(|_, f| {
            let ua = f.a.map_or(0.0, |i| v[i]);
            let ub = f.b.map_or(0.0, |i| v[i]);
            let d = (ub - ua) / f.h;
            s += f.weight * d * d;
        });
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResampleMode {
    /// x -> t^(N/2) u(t x): preserves the L2 norm.
    MassPreserving,
    /// x -> u(t^(-1/N) x): multiplies every integral of a local density by t.
    Dilation,
}

/// Resamples `u` onto `target` (which may equal `u.grid()`).
pub fn resample_onto(u: &Field, target: Arc<Grid>, t: f64, mode: ResampleMode) -> Result<Field> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("scaling factor must be positive, got {t}")));
    }
    let src = u.grid();
    if std::mem::discriminant(src.spec()) != std::mem::discriminant(target.spec())
        || src.dim() != target.dim()
    {
        return Err(Error::GridMismatch);
    }
    let nd = src.dim() as f64;
    let (factor, amp) = match mode {
        ResampleMode::MassPreserving => (t, t.powf(nd / 2.0)),
        ResampleMode::Dilation => (t.powf(-1.0 / nd), 1.0),
    };
    let n = target.len();
    let mut values = Vec::with_capacity(n * u.components);
    for c in 0..u.components {
        let v = u.component(c);
        for i in 0..n {
            let p = target.point(i);
            values.push(amp * src.interpolate(v, [factor * p[0], factor * p[1]]));
        }
    }
    Ok(Field { grid: target, components: u.components, values })
}

/// Resamples on the same grid.
pub fn resample(u: &Field, t: f64, mode: ResampleMode) -> Result<Field> {
    resample_onto(u, u.grid.clone(), t, mode)
}

/// Resamples onto the co-scaled grid on which the operation is exact: extent / t
/// for mass-preserving scaling, extent * t^(1/N) for dilation.
pub fn resample_coscaled(u: &Field, t: f64, mode: ResampleMode) -> Result<Field> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("scaling factor must be positive, got {t}")));
    }
    let spec = u.grid.spec();
    let factor = match mode {
        ResampleMode::MassPreserving => 1.0 / t,
        ResampleMode::Dilation => t.powf(1.0 / spec.dim() as f64),
    };
    let target = Grid::new(spec.scaled(factor))?;
    resample_onto(u, target, t, mode)
}
