//! Certified intervals and search budgets shared by the estimators.

use serde::{Deserialize, Serialize};

use crate::spaces::{Functional, Vector};

/// How a bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Finite maximum over extreme points of a unit ball.
    ExactVertices,
    /// Maximum over sign patterns of signed sums.
    ExactSigns,
    /// Largest singular value (Euclidean spaces, `p = 2`).
    ExactSpectral,
    /// Closed form for mutually orthogonal functionals on a Euclidean space.
    ExactOrthogonal,
    /// One functional: the weak norm is its dual norm.
    ExactSingleton,
    /// Lower bound from search; the upper bound, if finite, is structural.
    SearchLower,
    /// Upper bound from a structural inequality.
    StructuralUpper,
    /// Sampling plus local ascent; the upper bound equals the lower bound and is not certified.
    HeuristicTight,
    /// Search lower bound joined with a structural upper bound.
    Bracket,
}

impl Method {
    /// True when `lower == upper` is a proof, not a guess.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Method::ExactVertices
                | Method::ExactSigns
                | Method::ExactSpectral
                | Method::ExactOrthogonal
                | Method::ExactSingleton
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactVertices => "exact_vertices",
            Method::ExactSigns => "exact_signs",
            Method::ExactSpectral => "exact_spectral",
            Method::ExactOrthogonal => "exact_orthogonal",
            Method::ExactSingleton => "exact_singleton",
            Method::SearchLower => "search_lower",
            Method::StructuralUpper => "structural_upper",
            Method::HeuristicTight => "heuristic_tight",
            Method::Bracket => "bracket",
        }
    }
}

/// The object that reproduces a bound when re-evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A point of `B_E` attaining a weak-norm supremum.
    Vector(Vector),
    /// A sign pattern for the signed-sum formula.
    Signs(Vec<i8>),
    /// A point of `B_{E*}` attaining a uniform norm.
    Functional(Functional),
    /// A feasible tuple of functionals.
    Tuple(Vec<Functional>),
}

impl Witness {
    pub fn size(&self) -> usize {
        match self {
            Witness::Vector(_) | Witness::Functional(_) => 1,
            Witness::Signs(s) => s.len(),
            Witness::Tuple(t) => t.len(),
        }
    }
}

/// An interval `[lower, upper]` containing a norm, with provenance.
///
/// An infinite `upper` means no upper bound is known; it serializes as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    #[serde(with = "infinite_as_null")]
    pub upper: f64,
    pub method: Method,
    pub witness: Option<Witness>,
}

impl NormEstimate {
    pub fn exact(value: f64, method: Method, witness: Option<Witness>) -> Self {
        NormEstimate {
            lower: value,
            upper: value,
            method,
            witness,
        }
    }

    pub fn zero() -> Self {
        NormEstimate::exact(0.0, Method::Bracket, None)
    }

    pub fn is_exact(&self) -> bool {
        self.method.is_exact()
    }

    pub fn has_upper(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn witness_size(&self) -> usize {
        self.witness.as_ref().map_or(0, Witness::size)
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Effort limits for the search-based estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Multistart restarts / refinement rounds.
    pub restarts: usize,
    /// Largest witness tuple explored.
    pub tuple_max: usize,
    /// Random sphere samples in candidate pools.
    pub samples: usize,
    /// Ascent steps per restart.
    pub steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            restarts: 32,
            tuple_max: 8,
            samples: 64,
            steps: 500,
        }
    }
}

impl Budget {
    /// A cheaper budget for batch property checks.
    pub fn light() -> Self {
        Budget {
            restarts: 8,
            tuple_max: 4,
            samples: 24,
            steps: 100,
        }
    }
}
