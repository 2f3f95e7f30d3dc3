//! Dense coordinate matrices for symbolic elements.
//!
//! Three realizations are built:
//! - direct, on `L^p_μ(Ω, E)`, size `N·d`;
//! - regular, on `ℓ^p(G, L^p_μ(Ω, E))`, size `|G|·N·d`, ordered (group slot, atom, E-coordinate);
//! - trajectory at an atom `x`, on `ℓ^p(G, E)`, size `|G|·d`.
//!
//! For finite `p` the direct matrix is conjugated by `W = diag(μ(x)^{1/p} I_d)`
//! so that the space norm becomes the unweighted p-norm of coordinates, with
//! `E = ℓ^p_d`. For `p = ∞` raw coordinates are used.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{automorphism_apply, Coefficient, SymbolicElement};
use crate::measure::{FiniteGroup, GroupAction};
use crate::{Complex64, Exponent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("invalid exponent {0}")]
    InvalidExponent(Exponent),
    #[error("atom index {atom} out of range for {atoms} atoms")]
    InvalidAtom { atom: usize, atoms: usize },
    #[error("vector of length {found} applied to operator of size {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

pub type Result<T> = std::result::Result<T, AssemblyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Direct,
    Regular,
    Trajectory(usize),
    /// A matrix supplied by the caller rather than assembled from an element.
    Raw,
}

/// A square matrix acting on coordinates whose norm is the plain p-norm.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    matrix: DMatrix<Complex64>,
    p: Exponent,
    provenance: Provenance,
    source: Option<SymbolicElement>,
}

impl AssembledOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>, p: Exponent) -> Result<Self> {
        check_exponent(p)?;
        if !matrix.is_square() {
            return Err(AssemblyError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            p,
            provenance: Provenance::Raw,
            source: None,
        })
    }

    /// Real matrix from rows, for tests and small hand-built operators.
    pub fn from_real_rows(rows: &[&[f64]], p: Exponent) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let matrix = DMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::from_matrix(matrix, p)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn source(&self) -> Option<&SymbolicElement> {
        self.source.as_ref()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Same matrix read at another exponent.
    pub fn at_exponent(&self, p: Exponent) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self { p, ..self.clone() })
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.matrix.ncols() {
            return Err(AssemblyError::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }

    /// Column-major `[re, im]` pairs.
    pub fn dump(&self) -> Vec<[f64; 2]> {
        self.matrix.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn max_abs_diff(&self, other: &AssembledOperator) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_exponent(p: Exponent) -> Result<()> {
    match p {
        Exponent::Finite(q) if !(q >= 1.0 && q.is_finite()) => Err(AssemblyError::InvalidExponent(p)),
        _ => Ok(()),
    }
}

fn add_block(m: &mut DMatrix<Complex64>, row: usize, col: usize, block: &DMatrix<Complex64>, s: f64) {
    let d = block.nrows();
    for i in 0..d {
        for j in 0..d {
            m[(row + i, col + j)] += block[(i, j)] * s;
        }
    }
}

/// `Σ_g Diag(a_g)·P_g(p)` in unweighted coordinates.
///
/// `P_g(p)` sends block `α_g⁻¹(x)` to block `x` with the cocycle
/// `(μ(α_g⁻¹(x))/μ(x))^{1/p}`; the result is then conjugated by
/// `W = diag(μ(x)^{1/p})`.
pub fn assemble_direct(b: &SymbolicElement, p: Exponent) -> Result<AssembledOperator> {
    check_exponent(p)?;
    let action = b.action();
    let space = action.space();
    let (n, d) = (space.len(), b.dim());
    let mut m = DMatrix::zeros(n * d, n * d);
    for (&g, a) in b.terms() {
        for x in 0..n {
            let y = action.backward(g, x);
            let scale = match p {
                Exponent::Finite(_) => {
                    let cocycle = action.rn_cocycle(g, p, x).expect("finite exponent");
                    let inv_p = p.reciprocal();
                    cocycle * space.weight(x).powf(inv_p) / space.weight(y).powf(inv_p)
                }
                Exponent::Infinity => 1.0,
            };
            add_block(&mut m, x * d, y * d, a.block(x), scale);
        }
    }
    Ok(AssembledOperator {
        matrix: m,
        p,
        provenance: Provenance::Direct,
        source: Some(b.clone()),
    })
}

/// Multiplication operator `ā` on `ℓ^p(G, D)`: slot `h` carries `T̂_h(a)`.
pub fn regular_multiplier(
    action: &Arc<GroupAction>,
    a: &Coefficient,
    p: Exponent,
) -> Result<DMatrix<Complex64>> {
    check_exponent(p)?;
    let order = action.group().order();
    let slot = action.space().len() * a.dim();
    let mut m = DMatrix::zeros(order * slot, order * slot);
    for h in 0..order {
        let moved = automorphism_apply(action, h, a).expect("coefficient matches the action");
        let elem = SymbolicElement::new(action.clone(), a.dim(), [(0, moved)])
            .expect("coefficient matches the action");
        let block = assemble_direct(&elem, p)?.into_matrix();
        m.view_mut((h * slot, h * slot), (slot, slot)).copy_from(&block);
    }
    Ok(m)
}

/// Right translation `(V_g ξ)(h) = ξ(h·g)` on `ℓ^p(G, D)` with `D` of dimension `slot`.
pub fn regular_translation(group: &FiniteGroup, g: usize, slot: usize) -> DMatrix<Complex64> {
    let order = group.order();
    let mut m = DMatrix::zeros(order * slot, order * slot);
    for h in 0..order {
        let src = group.mul(h, g);
        for i in 0..slot {
            m[(h * slot + i, src * slot + i)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// `b̄ = Σ_g ā_g V_g` on `ℓ^p(G, L^p_μ(Ω, E))`.
pub fn assemble_regular(b: &SymbolicElement, p: Exponent) -> Result<AssembledOperator> {
    check_exponent(p)?;
    let action = b.action();
    let group = action.group();
    let slot = action.space().len() * b.dim();
    let size = group.order() * slot;
    let mut m = DMatrix::zeros(size, size);
    for (&g, a) in b.terms() {
        let mult = regular_multiplier(action, a, p)?;
        let shift = regular_translation(group, g, slot);
        m += mult * shift;
    }
    Ok(AssembledOperator {
        matrix: m,
        p,
        provenance: Provenance::Regular,
        source: Some(b.clone()),
    })
}

/// The trajectorial representation `π_x(b)` on `ℓ^p(G, E)`:
/// `(π_x(a)ξ)_h = a(α_h⁻¹(x))ξ_h` and `(π_x(T_g)ξ)_h = ξ_{h·g}`. No weights enter.
pub fn assemble_trajectory(b: &SymbolicElement, x: usize, p: Exponent) -> Result<AssembledOperator> {
    check_exponent(p)?;
    let action = b.action();
    let atoms = action.space().len();
    if x >= atoms {
        return Err(AssemblyError::InvalidAtom { atom: x, atoms });
    }
    let group = action.group();
    let d = b.dim();
    let order = group.order();
    let mut m = DMatrix::zeros(order * d, order * d);
    for (&g, a) in b.terms() {
        for h in 0..order {
            let block = a.block(action.backward(h, x));
            add_block(&mut m, h * d, group.mul(h, g) * d, block, 1.0);
        }
    }
    Ok(AssembledOperator {
        matrix: m,
        p,
        provenance: Provenance::Trajectory(x),
        source: Some(b.clone()),
    })
}
