//! Vertex-enumerated polytopes.
//!
//! A [`Polytope`] is the convex hull of an explicit list of vertices
//! `v^0, …, v^{M-1}` (indices are zero-based). The two structured kinds used
//! throughout the experiments, the standard simplex and the ℓ1-ball, never
//! materialize their vertices: a vertex is a signed, scaled basis vector.
//!
//! Vertex order of the ℓ1-ball is interleaved: `+C e_1, -C e_1, +C e_2, …`.
//! Solvers visit vertices in index order unless given a permutation.
//!
//! Explicit vertex lists may contain redundant (non-extreme) points. The
//! solvers are still correct since the list spans the hull, but any rate
//! constant that depends on `M` uses the list length.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::hull;

/// Largest vertex count accepted by [`Polytope::facial_distance`].
pub const FACIAL_DISTANCE_MAX_VERTICES: usize = 12;

/// Default vertex count up to which the diameter is computed exactly.
pub const DEFAULT_DIAMETER_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeKind {
    StandardSimplex {
        dim: usize,
    },
    L1Ball {
        dim: usize,
        radius: f64,
    },
    /// Rows are vertices.
    Explicit {
        vertices: Array2<f64>,
    },
}

/// Borrowed view of a single vertex.
#[derive(Debug, Clone, Copy)]
pub enum Vertex<'a> {
    /// `scale * e_coord`
    Axis {
        coord: usize,
        scale: f64,
    },
    Dense(ArrayView1<'a, f64>),
}

impl Vertex<'_> {
    pub fn to_dense(&self, dim: usize) -> Array1<f64> {
        match *self {
            Vertex::Axis { coord, scale } => {
                let mut v = Array1::zeros(dim);
                v[coord] = scale;
                v
            }
            Vertex::Dense(v) => v.to_owned(),
        }
    }

    pub fn dot(&self, x: ArrayView1<f64>) -> f64 {
        match *self {
            Vertex::Axis { coord, scale } => scale * x[coord],
            Vertex::Dense(v) => v.dot(&x),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match *self {
            Vertex::Axis { scale, .. } => scale * scale,
            Vertex::Dense(v) => v.dot(&v),
        }
    }

    /// ‖v − x‖²
    pub fn dist_sq(&self, x: ArrayView1<f64>) -> f64 {
        match *self {
            Vertex::Axis { coord, scale } => x
                .iter()
                .enumerate()
                .map(|(k, &xk)| {
                    let diff = if k == coord { scale - xk } else { xk };
                    diff * diff
                })
                .sum(),
            Vertex::Dense(v) => v.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(),
        }
    }
}

/// Diameter value, flagged when it is only the centroid upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diameter {
    pub value: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    kind: PolytopeKind,
    diameter_cap: usize,
}

impl Polytope {
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("simplex dimension must be positive".into()));
        }
        Ok(Self::from_kind(PolytopeKind::StandardSimplex { dim }))
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("l1-ball dimension must be positive".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidConfig(format!("l1-ball radius must be positive, got {radius}")));
        }
        Ok(Self::from_kind(PolytopeKind::L1Ball { dim, radius }))
    }

    /// Polytope spanned by the rows of `vertices`.
    pub fn explicit(vertices: Array2<f64>) -> Result<Self> {
        if vertices.nrows() == 0 || vertices.ncols() == 0 {
            return Err(Error::InvalidConfig("explicit polytope needs at least one vertex".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("vertices must be finite".into()));
        }
        Ok(Self::from_kind(PolytopeKind::Explicit { vertices }))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidConfig("vertices have differing lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Self::explicit(arr)
    }

    fn from_kind(kind: PolytopeKind) -> Self {
        Polytope { kind, diameter_cap: DEFAULT_DIAMETER_CAP }
    }

    pub fn with_diameter_cap(mut self, cap: usize) -> Self {
        self.diameter_cap = cap;
        self
    }

    pub fn kind(&self) -> &PolytopeKind {
        &self.kind
    }

    pub fn num_vertices(&self) -> usize {
        match &self.kind {
            PolytopeKind::StandardSimplex { dim } => *dim,
            PolytopeKind::L1Ball { dim, .. } => 2 * dim,
            PolytopeKind::Explicit { vertices } => vertices.nrows(),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            PolytopeKind::StandardSimplex { dim } | PolytopeKind::L1Ball { dim, .. } => *dim,
            PolytopeKind::Explicit { vertices } => vertices.ncols(),
        }
    }

    /// Borrowed vertex `i`; no allocation for the structured kinds.
    pub fn vertex_ref(&self, i: usize) -> Result<Vertex<'_>> {
        let count = self.num_vertices();
        if i >= count {
            return Err(Error::IndexOutOfRange { index: i, count });
        }
        Ok(self.vertex_unchecked(i))
    }

    pub(crate) fn vertex_unchecked(&self, i: usize) -> Vertex<'_> {
        match &self.kind {
            PolytopeKind::StandardSimplex { .. } => Vertex::Axis { coord: i, scale: 1.0 },
            PolytopeKind::L1Ball { radius, .. } => {
                Vertex::Axis { coord: i / 2, scale: if i.is_multiple_of(2) { *radius } else { -*radius } }
            }
            PolytopeKind::Explicit { vertices } => Vertex::Dense(vertices.row(i)),
        }
    }

    /// Dense copy of vertex `i`.
    pub fn vertex(&self, i: usize) -> Result<Array1<f64>> {
        Ok(self.vertex_ref(i)?.to_dense(self.dim()))
    }

    /// sup over x, y in the polytope of ‖x − y‖.
    pub fn diameter(&self) -> Diameter {
        match &self.kind {
            PolytopeKind::StandardSimplex { dim } => {
                Diameter { value: if *dim >= 2 { 2f64.sqrt() } else { 0.0 }, exact: true }
            }
            PolytopeKind::L1Ball { radius, .. } => Diameter { value: 2.0 * radius, exact: true },
            PolytopeKind::Explicit { vertices } => {
                let m = vertices.nrows();
                if m <= self.diameter_cap {
                    let mut best = 0.0_f64;
                    for i in 0..m {
                        for j in i + 1..m {
                            let diff = &vertices.row(i) - &vertices.row(j);
                            best = best.max(diff.dot(&diff));
                        }
                    }
                    Diameter { value: best.sqrt(), exact: true }
                } else {
                    let centroid = vertices.mean_axis(ndarray::Axis(0)).expect("nonempty");
                    let radius = vertices
                        .rows()
                        .into_iter()
                        .map(|r| {
                            let diff = &r - &centroid;
                            diff.dot(&diff)
                        })
                        .fold(0.0_f64, f64::max)
                        .sqrt();
                    Diameter { value: 2.0 * radius, exact: false }
                }
            }
        }
    }

    /// ⟨g, v^j⟩ for every vertex.
    pub fn vertex_dots(&self, g: ArrayView1<f64>) -> Vec<f64> {
        match &self.kind {
            PolytopeKind::StandardSimplex { .. } => g.to_vec(),
            PolytopeKind::L1Ball { radius, .. } => g.iter().flat_map(|&gi| [radius * gi, -radius * gi]).collect(),
            PolytopeKind::Explicit { vertices } => vertices.dot(&g).to_vec(),
        }
    }

    /// Index of the vertex minimizing ⟨g, v⟩; lowest index on ties.
    pub fn linear_minimizer(&self, g: ArrayView1<f64>) -> usize {
        let dots = self.vertex_dots(g);
        let mut best = 0;
        for (j, &v) in dots.iter().enumerate() {
            if v < dots[best] {
                best = j;
            }
        }
        best
    }

    /// Σ_j λ_j v^j.
    pub fn combine(&self, lambda: &[f64]) -> Result<Array1<f64>> {
        if lambda.len() != self.num_vertices() {
            return Err(Error::DimensionMismatch { expected: self.num_vertices(), got: lambda.len() });
        }
        let mut x = Array1::zeros(self.dim());
        match &self.kind {
            PolytopeKind::StandardSimplex { .. } => {
                x.iter_mut().zip(lambda).for_each(|(xi, &l)| *xi = l);
            }
            PolytopeKind::L1Ball { radius, .. } => {
                for (k, xi) in x.iter_mut().enumerate() {
                    *xi = radius * (lambda[2 * k] - lambda[2 * k + 1]);
                }
            }
            PolytopeKind::Explicit { vertices } => {
                for (row, &l) in vertices.rows().into_iter().zip(lambda) {
                    if l != 0.0 {
                        x.scaled_add(l, &row);
                    }
                }
            }
        }
        Ok(x)
    }

    /// Membership test with absolute tolerance `tol`.
    pub fn contains(&self, x: ArrayView1<f64>, tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.kind {
            PolytopeKind::StandardSimplex { .. } => x.iter().all(|&v| v >= -tol) && (x.sum() - 1.0).abs() <= tol,
            PolytopeKind::L1Ball { radius, .. } => x.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol,
            PolytopeKind::Explicit { vertices } => {
                let points: Vec<Vec<f64>> =
                    vertices.rows().into_iter().map(|r| r.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
                let res = hull::min_norm_combination(&points, &[0..points.len()], 1e-20, 100_000);
                res.value.sqrt() <= tol * (1.0 + x.dot(&x).sqrt())
            }
        }
    }

    /// Euclidean projection onto the polytope.
    pub fn project(&self, y: ArrayView1<f64>) -> Result<Array1<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: y.len() });
        }
        match &self.kind {
            PolytopeKind::StandardSimplex { .. } => {
                let mut x = y.to_vec();
                hull::project_simplex_in_place(&mut x, 1.0);
                Ok(Array1::from_vec(x))
            }
            PolytopeKind::L1Ball { radius, .. } => Ok(project_l1_ball(y, *radius)),
            PolytopeKind::Explicit { vertices } => {
                let points: Vec<Vec<f64>> =
                    vertices.rows().into_iter().map(|r| r.iter().zip(y).map(|(a, b)| a - b).collect()).collect();
                let res = hull::min_norm_combination(&points, &[0..points.len()], 1e-24, 200_000);
                self.combine(&res.weights)
            }
        }
    }

    /// Facial distance: the minimum over proper nonempty faces F of
    /// dist(F, conv(V \ F)). Exponential in `M`; capped at
    /// [`FACIAL_DISTANCE_MAX_VERTICES`].
    pub fn facial_distance(&self) -> Result<f64> {
        let m = self.num_vertices();
        if m > FACIAL_DISTANCE_MAX_VERTICES {
            return Err(Error::UnsupportedSize(format!(
                "facial distance enumerates faces; {m} vertices exceeds cap {FACIAL_DISTANCE_MAX_VERTICES}"
            )));
        }
        let (points, faces) = match &self.kind {
            PolytopeKind::StandardSimplex { .. } => {
                let faces: Vec<u32> = (1..(1u32 << m) - 1).collect();
                (self.dense_vertices(), faces)
            }
            PolytopeKind::L1Ball { dim, .. } => {
                // each coordinate: absent, +, or −
                let mut faces = Vec::new();
                for code in 1..3usize.pow(*dim as u32) {
                    let mut mask = 0u32;
                    let mut c = code;
                    for k in 0..*dim {
                        match c % 3 {
                            1 => mask |= 1 << (2 * k),
                            2 => mask |= 1 << (2 * k + 1),
                            _ => {}
                        }
                        c /= 3;
                    }
                    faces.push(mask);
                }
                (self.dense_vertices(), faces)
            }
            PolytopeKind::Explicit { .. } => {
                let extreme = extreme_points(&self.dense_vertices());
                let k = extreme.len();
                let faces = if k < 2 {
                    Vec::new()
                } else {
                    (1..(1u32 << k) - 1).filter(|&mask| is_face(&extreme, mask)).collect()
                };
                (extreme, faces)
            }
        };
        if faces.is_empty() {
            return Err(Error::NoProperFace);
        }
        let mut best = f64::INFINITY;
        for mask in faces {
            let (inside, outside) = split(&points, mask);
            if outside.is_empty() {
                continue;
            }
            best = best.min(hull::hull_distance(&inside, &outside));
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::NoProperFace)
        }
    }

    fn dense_vertices(&self) -> Vec<Vec<f64>> {
        (0..self.num_vertices()).map(|i| self.vertex_unchecked(i).to_dense(self.dim()).to_vec()).collect()
    }
}

/// Projection onto {‖x‖₁ ≤ radius}: identity inside, otherwise simplex
/// projection of |y| onto the radius-scaled simplex with signs restored.
pub fn project_l1_ball(y: ArrayView1<f64>, radius: f64) -> Array1<f64> {
    let norm1: f64 = y.iter().map(|v| v.abs()).sum();
    if norm1 <= radius {
        return y.to_owned();
    }
    let mut mag: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    hull::project_simplex_in_place(&mut mag, radius);
    y.iter().zip(mag).map(|(s, m)| m.copysign(*s)).collect()
}

fn split(points: &[Vec<f64>], mask: u32) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (j, p) in points.iter().enumerate() {
        if mask & (1 << j) != 0 {
            inside.push(p.clone());
        } else {
            outside.push(p.clone());
        }
    }
    (inside, outside)
}

const FACE_SEPARATION_TOL: f64 = 1e-6;

/// Distinct points that are vertices of the hull.
fn extreme_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let dup = distinct
            .iter()
            .any(|q| q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= FACE_SEPARATION_TOL);
        if !dup {
            distinct.push(p.clone());
        }
    }
    if distinct.len() <= 1 {
        return distinct;
    }
    (0..distinct.len()).filter(|&j| is_face(&distinct, 1 << j)).map(|j| distinct[j].clone()).collect()
}

/// Whether the points selected by `mask` are exactly the points lying on some
/// supporting hyperplane. With T the selected set and t0 ∈ T, project every
/// u ∉ T onto the orthogonal complement of span{t − t0}; a normal c exists with
/// ⟨c, ·⟩ constant on T and strictly smaller off T iff the origin lies outside
/// the hull of those projections (Gordan's alternative).
fn is_face(points: &[Vec<f64>], mask: u32) -> bool {
    let (inside, outside) = split(points, mask);
    if inside.is_empty() || outside.is_empty() {
        return false;
    }
    let t0 = &inside[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for t in &inside[1..] {
        let mut r: Vec<f64> = t.iter().zip(t0).map(|(a, b)| a - b).collect();
        orthogonalize(&mut r, &basis);
        let n = norm(&r);
        if n > 1e-12 {
            r.iter_mut().for_each(|v| *v /= n);
            basis.push(r);
        }
    }
    let projected: Vec<Vec<f64>> = outside
        .iter()
        .map(|u| {
            let mut r: Vec<f64> = u.iter().zip(t0).map(|(a, b)| a - b).collect();
            orthogonalize(&mut r, &basis);
            r
        })
        .collect();
    if projected.iter().any(|r| norm(r) <= FACE_SEPARATION_TOL) {
        return false;
    }
    let res = hull::min_norm_combination(&projected, &[0..projected.len()], 1e-18, 200_000);
    res.value.max(0.0).sqrt() > FACE_SEPARATION_TOL
}

fn orthogonalize(r: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}
