//! Banach algebras generated by multiplication operators and weighted
//! composition operators `T_g` on finite atomic models of `L^p_μ(Ω, E)`.
//!
//! The crate builds the symbolic elements `b = Σ a_g T_g`, materializes them
//! as dense matrices (directly, through the regular representation on
//! `ℓ^p(G, L^p_μ(Ω, E))`, or along a single trajectory), computes their
//! operator norms by exact kernels, SVD, power iteration and closed-form
//! formulas, and checks the norm identities and inequalities that hold for
//! metrically free actions.
//!
//! Module map:
//! - [`measure`]: atoms, groups, actions, cocycles and freeness.
//! - [`algebra`]: coefficients, symbolic elements, characters.
//! - [`assembly`]: coordinate matrices for the three representations.
//! - [`norm`]: operator p-norms and the closed-form `L^∞` / `L¹` formulas.
//! - [`verify`]: theorem-level checks producing [`verify::CheckReport`]s.
//! - [`scenario`]: scenario files and suite runs behind the `wco` binary.
//! - [`corpus`]: generated scenario families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub mod algebra;
pub mod assembly;
pub mod corpus;
pub mod measure;
pub mod norm;
pub mod par;
pub mod scenario;
pub mod verify;

pub use num_complex::Complex64;

pub use algebra::{Character, Coefficient, SymbolicElement};
pub use assembly::{AssembledOperator, Provenance};
pub use measure::{FiniteGroup, FreenessVerdict, GroupAction, MeasureSpace};
pub use norm::{Guarantee, Method, NormResult};
pub use verify::CheckReport;

/// A Lebesgue exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("invalid exponent {0}: expected a real p >= 1 or \"inf\"")]
pub struct InvalidExponent(pub String);

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);
    pub const INF: Exponent = Exponent::Infinity;

    pub fn finite(p: f64) -> Result<Self, InvalidExponent> {
        if p.is_nan() || p < 1.0 {
            return Err(InvalidExponent(p.to_string()));
        }
        if p.is_infinite() {
            return Ok(Exponent::Infinity);
        }
        Ok(Exponent::Finite(p))
    }

    /// The finite value of `p`, `None` for ∞.
    pub fn value(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn is(self, p: f64) -> bool {
        matches!(self, Exponent::Finite(q) if q == p)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Sort key placing ∞ after every finite exponent.
    pub fn sort_key(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Ordinary vector p-norm of real magnitudes.
    pub fn vector_norm(self, v: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Exponent::Infinity => v.into_iter().fold(0.0, |m, x| m.max(x.abs())),
            Exponent::Finite(1.0) => v.into_iter().map(f64::abs).sum(),
            Exponent::Finite(2.0) => v.into_iter().map(|x| x * x).sum::<f64>().sqrt(),
            Exponent::Finite(p) => {
                let v: Vec<f64> = v.into_iter().map(f64::abs).collect();
                let m = v.iter().cloned().fold(0.0, f64::max);
                if m == 0.0 {
                    return 0.0;
                }
                m * v.iter().map(|x| (x / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    pub fn complex_norm(self, v: &[Complex64]) -> f64 {
        self.vector_norm(v.iter().map(|z| z.norm()))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = InvalidExponent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinity);
        }
        let p: f64 = t.parse().map_err(|_| InvalidExponent(s.to_string()))?;
        Exponent::finite(p)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
