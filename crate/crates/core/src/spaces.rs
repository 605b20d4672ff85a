//! Finite-dimensional normed spaces and their duals.
//!
//! A [`Space`] is `R^n` carrying one of the norms `l1`, `l2`, `linf`, or a
//! polyhedral norm whose unit ball is the convex hull of a centrally symmetric
//! vertex list. Functionals act on vectors through the standard pairing
//! `<f, v> = sum_i f_i v_i`, so the dual space is again `R^n` with the dual
//! norm. Every supremum over either unit ball is either closed-form or a finite
//! maximum over extreme points.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Largest dimension for which the `2^n` sign vectors of a cube are enumerated.
pub const MAX_CUBE_DIM: usize = 20;

/// Upper limit on the number of vertex subsets inspected when computing the
/// facets of a polyhedral ball.
const MAX_FACET_SUBSETS: u64 = 20_000_000;

const VERTEX_TOL: f64 = 1e-12;

/// An element of the space `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

/// An element of the dual space `E*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Functional(pub Vec<f64>);

macro_rules! coord_newtype {
    ($t:ident) => {
        impl $t {
            pub fn new(coords: Vec<f64>) -> Self {
                $t(coords)
            }

            pub fn zeros(dim: usize) -> Self {
                $t(vec![0.0; dim])
            }

            /// The `i`-th coordinate unit vector.
            pub fn unit(dim: usize, i: usize) -> Self {
                let mut c = vec![0.0; dim];
                c[i] = 1.0;
                $t(c)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &[f64] {
                &self.0
            }

            pub fn scaled(&self, c: f64) -> Self {
                $t(self.0.iter().map(|x| c * x).collect())
            }

            pub fn add(&self, other: &Self) -> Self {
                $t(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                $t(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|&x| x == 0.0)
            }

            /// Euclidean length of the coordinate sequence (independent of the space norm).
            pub fn euclid(&self) -> f64 {
                self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
        }

        impl From<Vec<f64>> for $t {
            fn from(v: Vec<f64>) -> Self {
                $t(v)
            }
        }
    };
}

coord_newtype!(Vector);
coord_newtype!(Functional);

/// The standard pairing `<f, v>`.
pub fn pairing(f: &Functional, v: &Vector) -> f64 {
    dot(&f.0, &v.0)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Which norm the space carries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormSpec {
    L1,
    L2,
    Linf,
    /// Unit ball given as the convex hull of these vertices.
    Polyhedral(Vec<Vec<f64>>),
}

impl NormSpec {
    /// The exponent `q` of an `l_q` norm, `None` for polyhedral norms.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            NormSpec::L1 => Some(1.0),
            NormSpec::L2 => Some(2.0),
            NormSpec::Linf => Some(f64::INFINITY),
            NormSpec::Polyhedral(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    dim: usize,
    norm: NormSpec,
}

/// A finite-dimensional real normed space together with its dual.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct Space {
    dim: usize,
    spec: NormSpec,
    /// Polyhedral only: deduplicated vertices of the unit ball.
    vertices: Vec<Vector>,
    /// Polyhedral only: outward facet normals `a` with `a . v <= 1` on the ball;
    /// these are the extreme points of the dual ball.
    facets: Vec<Functional>,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.spec == other.spec
    }
}

impl TryFrom<SpaceRepr> for Space {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        Space::new(r.dim, r.norm)
    }
}

impl From<Space> for SpaceRepr {
    fn from(s: Space) -> Self {
        SpaceRepr {
            dim: s.dim,
            norm: s.spec,
        }
    }
}

impl Space {
    /// Builds a space, validating the norm specification.
    pub fn new(dim: usize, spec: NormSpec) -> Result<Space> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        match spec {
            NormSpec::Polyhedral(ref verts) => {
                let vertices = validate_vertices(dim, verts)?;
                let facets = compute_facets(dim, &vertices)?;
                Ok(Space {
                    dim,
                    spec,
                    vertices,
                    facets,
                })
            }
            _ => Ok(Space {
                dim,
                spec,
                vertices: Vec::new(),
                facets: Vec::new(),
            }),
        }
    }

    pub fn l1(dim: usize) -> Space {
        Space::new(dim, NormSpec::L1).expect("dim >= 1")
    }

    pub fn l2(dim: usize) -> Space {
        Space::new(dim, NormSpec::L2).expect("dim >= 1")
    }

    pub fn linf(dim: usize) -> Space {
        Space::new(dim, NormSpec::Linf).expect("dim >= 1")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn is_l2(&self) -> bool {
        matches!(self.spec, NormSpec::L2)
    }

    /// True when both unit balls have finitely many extreme points.
    pub fn is_polytopal(&self) -> bool {
        !self.is_l2()
    }

    fn check(&self, got: usize) -> Result<()> {
        if got == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            })
        }
    }

    pub fn check_vector(&self, v: &Vector) -> Result<()> {
        self.check(v.dim())
    }

    pub fn check_functional(&self, f: &Functional) -> Result<()> {
        self.check(f.dim())
    }

    pub fn norm(&self, v: &Vector) -> Result<f64> {
        self.check_vector(v)?;
        Ok(self.norm_of(&v.0))
    }

    pub fn dual_norm(&self, f: &Functional) -> Result<f64> {
        self.check_functional(f)?;
        Ok(self.dual_norm_of(&f.0))
    }

    /// Norm of raw coordinates; the caller guarantees the length.
    pub(crate) fn norm_of(&self, x: &[f64]) -> f64 {
        match &self.spec {
            NormSpec::L1 => x.iter().map(|a| a.abs()).sum(),
            NormSpec::L2 => x.iter().map(|a| a * a).sum::<f64>().sqrt(),
            NormSpec::Linf => x.iter().fold(0.0, |m, a| m.max(a.abs())),
            // Minkowski gauge of the vertex hull: the largest facet functional.
            NormSpec::Polyhedral(_) => self
                .facets
                .iter()
                .fold(0.0, |m, a| m.max(dot(&a.0, x))),
        }
    }

    pub(crate) fn dual_norm_of(&self, f: &[f64]) -> f64 {
        match &self.spec {
            NormSpec::L1 => f.iter().fold(0.0, |m, a| m.max(a.abs())),
            NormSpec::L2 => f.iter().map(|a| a * a).sum::<f64>().sqrt(),
            NormSpec::Linf => f.iter().map(|a| a.abs()).sum(),
            NormSpec::Polyhedral(_) => self
                .vertices
                .iter()
                .fold(0.0, |m, v| m.max(dot(f, &v.0).abs())),
        }
    }

    /// Extreme points of the closed unit ball of `E`.
    pub fn extreme_points(&self) -> Result<Vec<Vector>> {
        match &self.spec {
            NormSpec::L1 => Ok(signed_units(self.dim).into_iter().map(Vector).collect()),
            NormSpec::Linf => Ok(sign_vectors(self.dim)?.into_iter().map(Vector).collect()),
            NormSpec::Polyhedral(_) => Ok(self.vertices.clone()),
            NormSpec::L2 => Err(Error::Unsupported(
                "the l2 unit ball has infinitely many extreme points".into(),
            )),
        }
    }

    /// Extreme points of the closed unit ball of `E*`.
    pub fn dual_extreme_points(&self) -> Result<Vec<Functional>> {
        match &self.spec {
            NormSpec::L1 => Ok(sign_vectors(self.dim)?
                .into_iter()
                .map(Functional)
                .collect()),
            NormSpec::Linf => Ok(signed_units(self.dim)
                .into_iter()
                .map(Functional)
                .collect()),
            NormSpec::Polyhedral(_) => Ok(self.facets.clone()),
            NormSpec::L2 => Err(Error::Unsupported(
                "the l2 dual ball has infinitely many extreme points".into(),
            )),
        }
    }

    /// One representative of each antipodal pair of extreme points of `B_E`.
    pub(crate) fn half_extreme_points(&self) -> Result<Vec<Vector>> {
        Ok(self
            .extreme_points()?
            .into_iter()
            .filter(|v| leading_positive(&v.0))
            .collect())
    }

    pub(crate) fn half_dual_extreme_points(&self) -> Result<Vec<Functional>> {
        Ok(self
            .dual_extreme_points()?
            .into_iter()
            .filter(|f| leading_positive(&f.0))
            .collect())
    }

    /// A functional of dual norm one attaining the norm of `x`.
    pub fn norming_functional(&self, x: &Vector) -> Result<Functional> {
        self.check_vector(x)?;
        if x.is_zero() {
            let e = Functional::unit(self.dim, 0);
            let n = self.dual_norm_of(&e.0);
            return Ok(e.scaled(1.0 / n));
        }
        let c = &x.0;
        let f = match &self.spec {
            NormSpec::L1 => c.iter().map(|a| sign(*a)).collect(),
            NormSpec::L2 => {
                let n = self.norm_of(c);
                c.iter().map(|a| a / n).collect()
            }
            NormSpec::Linf => {
                let i = argmax_abs(c);
                let mut f = vec![0.0; self.dim];
                f[i] = sign(c[i]);
                f
            }
            NormSpec::Polyhedral(_) => {
                let mut best = 0;
                let mut val = f64::NEG_INFINITY;
                for (k, a) in self.facets.iter().enumerate() {
                    let t = dot(&a.0, c);
                    if t > val {
                        val = t;
                        best = k;
                    }
                }
                self.facets[best].0.clone()
            }
        };
        Ok(Functional(f))
    }

    /// A vector of the unit ball at which `f` attains its dual norm.
    pub fn norming_vector(&self, f: &Functional) -> Result<Vector> {
        self.check_functional(f)?;
        let c = &f.0;
        if f.is_zero() {
            let e = Vector::unit(self.dim, 0);
            let n = self.norm_of(&e.0);
            return Ok(e.scaled(1.0 / n));
        }
        let v = match &self.spec {
            NormSpec::L1 => {
                let i = argmax_abs(c);
                let mut v = vec![0.0; self.dim];
                v[i] = sign(c[i]);
                v
            }
            NormSpec::L2 => {
                let n = self.dual_norm_of(c);
                c.iter().map(|a| a / n).collect()
            }
            NormSpec::Linf => c.iter().map(|a| sign(*a)).collect(),
            NormSpec::Polyhedral(_) => {
                let mut best = &self.vertices[0];
                let mut val = f64::NEG_INFINITY;
                for v in &self.vertices {
                    let t = dot(c, &v.0);
                    if t > val {
                        val = t;
                        best = v;
                    }
                }
                best.0.clone()
            }
        };
        Ok(Vector(v))
    }

    /// `count` functionals of dual norm one: normalized isotropic Gaussian
    /// directions, deterministic in `seed`.
    pub fn sample_dual_sphere(&self, count: usize, seed: u64) -> Vec<Functional> {
        let mut rng = seeded(seed);
        (0..count)
            .map(|_| {
                let g = gaussian_direction(&mut rng, self.dim);
                let n = self.dual_norm_of(&g);
                Functional(g.into_iter().map(|x| x / n).collect())
            })
            .collect()
    }

    /// `count` vectors of norm one, deterministic in `seed`.
    pub fn sample_sphere(&self, count: usize, seed: u64) -> Vec<Vector> {
        let mut rng = seeded(seed);
        (0..count)
            .map(|_| {
                let g = gaussian_direction(&mut rng, self.dim);
                let n = self.norm_of(&g);
                Vector(g.into_iter().map(|x| x / n).collect())
            })
            .collect()
    }

    /// Coordinate functionals rescaled to dual norm one.
    pub fn unit_coordinate_functionals(&self) -> Vec<Functional> {
        (0..self.dim)
            .map(|i| {
                let e = Functional::unit(self.dim, i);
                let n = self.dual_norm_of(&e.0);
                e.scaled(1.0 / n)
            })
            .collect()
    }
}

pub(crate) fn gaussian_direction<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if g.iter().any(|x| x.abs() > 1e-300) {
            return g;
        }
    }
}

fn sign(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn argmax_abs(c: &[f64]) -> usize {
    let mut best = 0;
    for (i, a) in c.iter().enumerate() {
        if a.abs() > c[best].abs() {
            best = i;
        }
    }
    best
}

fn leading_positive(c: &[f64]) -> bool {
    c.iter()
        .find(|a| a.abs() > VERTEX_TOL)
        .is_some_and(|a| *a > 0.0)
}

/// `+e_1, -e_1, +e_2, -e_2, ...`
fn signed_units(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = s;
            out.push(v);
        }
    }
    out
}

/// All `2^dim` vectors with entries `+-1`, in lexicographic order with `+1` first.
fn sign_vectors(dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim > MAX_CUBE_DIM {
        return Err(Error::Unsupported(format!(
            "cube vertex enumeration limited to dimension {MAX_CUBE_DIM}"
        )));
    }
    Ok((0..1u64 << dim)
        .map(|mask| {
            (0..dim)
                .map(|i| {
                    if mask >> (dim - 1 - i) & 1 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect()
        })
        .collect())
}

fn validate_vertices(dim: usize, verts: &[Vec<f64>]) -> Result<Vec<Vector>> {
    if verts.is_empty() {
        return Err(Error::InvalidSpace("empty vertex list".into()));
    }
    let mut out: Vec<Vector> = Vec::new();
    for v in verts {
        if v.len() != dim {
            return Err(Error::InvalidSpace(format!(
                "vertex {v:?} has length {}, expected {dim}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpace(format!("vertex {v:?} is not finite")));
        }
        if v.iter().all(|x| x.abs() <= VERTEX_TOL) {
            return Err(Error::InvalidSpace("zero vector in vertex list".into()));
        }
        if !out.iter().any(|w| close(&w.0, v)) {
            out.push(Vector(v.clone()));
        }
    }
    for v in &out {
        let neg: Vec<f64> = v.0.iter().map(|x| -x).collect();
        if !out.iter().any(|w| close(&w.0, &neg)) {
            return Err(Error::InvalidSpace(format!(
                "vertex list is not closed under negation: missing -{:?}",
                v.0
            )));
        }
    }
    let m = DMatrix::from_fn(out.len(), dim, |i, j| out[i].0[j]);
    let sv = m.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|s| **s > 1e-9 * smax.max(1.0)).count();
    if rank < dim {
        return Err(Error::InvalidSpace(format!(
            "vertex list spans a subspace of dimension {rank} < {dim}"
        )));
    }
    Ok(out)
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= VERTEX_TOL * (1.0 + x.abs().max(y.abs())))
}

/// Facet normals of the symmetric polytope `conv(vertices)`: every normal `a`
/// of a hyperplane `a . x = 1` through `dim` linearly independent vertices
/// with `a . v <= 1` for all vertices.
fn compute_facets(dim: usize, vertices: &[Vector]) -> Result<Vec<Functional>> {
    let n = vertices.len();
    if binomial(n as u64, dim as u64) > MAX_FACET_SUBSETS {
        return Err(Error::InvalidSpace(format!(
            "{n} vertices in dimension {dim} is too many for facet enumeration"
        )));
    }
    let mut facets: Vec<Functional> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let m = DMatrix::from_fn(dim, dim, |i, j| vertices[idx[i]].0[j]);
        if let Some(inv) = m.clone().try_inverse() {
            let a = inv * nalgebra::DVector::from_element(dim, 1.0);
            let a: Vec<f64> = a.iter().copied().collect();
            if a.iter().all(|x| x.is_finite()) {
                let ok = vertices.iter().all(|v| dot(&a, &v.0) <= 1.0 + 1e-9);
                let residual = (&m * nalgebra::DVector::from_column_slice(&a))
                    .iter()
                    .fold(0.0f64, |r, x| r.max((x - 1.0).abs()));
                if ok && residual <= 1e-9 && !facets.iter().any(|f| approx_eq(&f.0, &a, 1e-9)) {
                    facets.push(Functional(a));
                }
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    if facets.is_empty() {
        return Err(Error::InvalidSpace("no facets found".into()));
    }
    Ok(facets)
}

fn approx_eq(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 || k > n {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
