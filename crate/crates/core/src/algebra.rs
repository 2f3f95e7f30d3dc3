//! Symbolic elements `b = Σ_{g∈F} a_g T_g` before a choice of exponent.
//!
//! Coefficients are multiplication operators `a ∈ L^∞_μ(Ω, L(E))` stored as one
//! `d×d` complex block per atom. The product follows the covariance rule
//! `(a T_g)(c T_h) = a·T̂_g(c) T_{g·h}` with `(T̂_g c)(x) = c(α_g⁻¹(x))`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::measure::{FiniteGroup, GroupAction, MeasureSpace};
use crate::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("coefficient lives on a different measure space")]
    SpaceMismatch,
    #[error("elements are built over different group actions")]
    ActionMismatch,
    #[error("coefficient dimension {found} does not match {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("character is defined on a different group")]
    GroupMismatch,
    #[error("expected {expected} atom blocks, found {found}")]
    BlockCount { expected: usize, found: usize },
    #[error("group element {0} out of range")]
    BadElement(usize),
    #[error("not a character: {0}")]
    NotCharacter(String),
    #[error("characters are only enumerated for abelian groups")]
    NonAbelianGroup,
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// A multiplication operator: one `d×d` block per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    space: Arc<MeasureSpace>,
    dim: usize,
    blocks: Vec<DMatrix<Complex64>>,
}

impl Coefficient {
    pub fn new(space: Arc<MeasureSpace>, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.len() != space.len() {
            return Err(AlgebraError::BlockCount {
                expected: space.len(),
                found: blocks.len(),
            });
        }
        let dim = blocks[0].nrows();
        for b in &blocks {
            if b.nrows() != dim || b.ncols() != dim || dim == 0 {
                return Err(AlgebraError::DimMismatch {
                    expected: dim,
                    found: b.ncols().max(b.nrows()),
                });
            }
        }
        Ok(Self { space, dim, blocks })
    }

    /// Scalar (`d = 1`) coefficient from real values.
    pub fn scalar(space: Arc<MeasureSpace>, values: &[f64]) -> Result<Self> {
        let blocks = values
            .iter()
            .map(|&v| DMatrix::from_element(1, 1, Complex64::new(v, 0.0)))
            .collect();
        Self::new(space, blocks)
    }

    pub fn complex_scalar(space: Arc<MeasureSpace>, values: &[Complex64]) -> Result<Self> {
        let blocks = values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
        Self::new(space, blocks)
    }

    pub fn zero(space: Arc<MeasureSpace>, dim: usize) -> Self {
        let blocks = vec![DMatrix::zeros(dim, dim); space.len()];
        Self { space, dim, blocks }
    }

    pub fn identity(space: Arc<MeasureSpace>, dim: usize) -> Self {
        let blocks = vec![DMatrix::identity(dim, dim); space.len()];
        Self { space, dim, blocks }
    }

    /// The same block at every atom.
    pub fn constant(space: Arc<MeasureSpace>, block: DMatrix<Complex64>) -> Self {
        let dim = block.nrows();
        let blocks = vec![block; space.len()];
        Self { space, dim, blocks }
    }

    /// `block` at atom `x`, zero elsewhere.
    pub fn point(space: Arc<MeasureSpace>, x: usize, block: DMatrix<Complex64>) -> Self {
        let dim = block.nrows();
        let mut blocks = vec![DMatrix::zeros(dim, dim); space.len()];
        blocks[x] = block;
        Self { space, dim, blocks }
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, x: usize) -> &DMatrix<Complex64> {
        &self.blocks[x]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let blocks = self.blocks.iter().map(|b| b * c).collect();
        Self {
            blocks,
            ..self.clone()
        }
    }

    /// Pointwise product `(a·c)(x) = a(x) c(x)`.
    pub fn mul(&self, other: &Coefficient) -> Result<Self> {
        self.compatible(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, c)| a * c)
            .collect();
        Ok(Self {
            blocks,
            ..self.clone()
        })
    }

    pub fn add(&self, other: &Coefficient) -> Result<Self> {
        self.compatible(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, c)| a + c)
            .collect();
        Ok(Self {
            blocks,
            ..self.clone()
        })
    }

    /// Largest blockwise deviation, for tolerance comparisons.
    pub fn max_abs_diff(&self, other: &Coefficient) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, c)| a.iter().zip(c.iter()).map(|(u, v)| (u - v).norm()))
            .fold(0.0, f64::max)
    }

    /// The same blocks over a re-weighted copy of the atoms.
    pub fn rehomed(&self, space: Arc<MeasureSpace>) -> Result<Self> {
        if space.labels() != self.space.labels() {
            return Err(AlgebraError::SpaceMismatch);
        }
        Ok(Self {
            space,
            ..self.clone()
        })
    }

    fn compatible(&self, other: &Coefficient) -> Result<()> {
        if self.space.labels() != other.space.labels() {
            return Err(AlgebraError::SpaceMismatch);
        }
        if self.dim != other.dim {
            return Err(AlgebraError::DimMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// `T̂_g(a) = T_g a T_g⁻¹`, i.e. `(T̂_g a)(x) = a(α_g⁻¹(x))`.
pub fn automorphism_apply(action: &GroupAction, g: usize, a: &Coefficient) -> Result<Coefficient> {
    if a.space.labels() != action.space().labels() {
        return Err(AlgebraError::SpaceMismatch);
    }
    if g >= action.group().order() {
        return Err(AlgebraError::BadElement(g));
    }
    let blocks = (0..a.blocks.len())
        .map(|x| a.blocks[action.backward(g, x)].clone())
        .collect();
    Ok(Coefficient {
        blocks,
        ..a.clone()
    })
}

/// A finite sum `Σ a_g T_g`. Terms whose blocks are all exactly zero are pruned.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicElement {
    action: Arc<GroupAction>,
    dim: usize,
    terms: BTreeMap<usize, Coefficient>,
}

impl SymbolicElement {
    pub fn zero(action: Arc<GroupAction>, dim: usize) -> Self {
        Self {
            action,
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn new(
        action: Arc<GroupAction>,
        dim: usize,
        terms: impl IntoIterator<Item = (usize, Coefficient)>,
    ) -> Result<Self> {
        let mut out = Self::zero(action, dim);
        for (g, a) in terms {
            out.add_term(g, a)?;
        }
        Ok(out)
    }

    /// `1·T_g`
    pub fn translation(action: Arc<GroupAction>, dim: usize, g: usize) -> Result<Self> {
        let one = Coefficient::identity(action.space().clone(), dim);
        Self::new(action, dim, [(g, one)])
    }

    /// Accumulates `a·T_g` into the element.
    pub fn add_term(&mut self, g: usize, a: Coefficient) -> Result<()> {
        if g >= self.action.group().order() {
            return Err(AlgebraError::BadElement(g));
        }
        if a.space.labels() != self.action.space().labels() {
            return Err(AlgebraError::SpaceMismatch);
        }
        if a.dim != self.dim {
            return Err(AlgebraError::DimMismatch {
                expected: self.dim,
                found: a.dim,
            });
        }
        let merged = match self.terms.remove(&g) {
            Some(prev) => prev.add(&a)?,
            None => a,
        };
        if !merged.is_zero() {
            self.terms.insert(g, merged);
        }
        Ok(())
    }

    pub fn action(&self) -> &Arc<GroupAction> {
        &self.action
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<usize, Coefficient> {
        &self.terms
    }

    /// The support `F`.
    pub fn support(&self) -> Vec<usize> {
        self.terms.keys().copied().collect()
    }

    /// `N_g(b)`: the coefficient at `T_g`, zero off the support.
    pub fn fourier_coefficient(&self, g: usize) -> Coefficient {
        self.terms
            .get(&g)
            .cloned()
            .unwrap_or_else(|| Coefficient::zero(self.action.space().clone(), self.dim))
    }

    pub fn is_symbolically_zero(&self) -> bool {
        self.terms.values().all(Coefficient::is_zero)
    }

    /// `N_e(b)·T_e`
    pub fn identity_component(&self) -> Self {
        let mut out = Self::zero(self.action.clone(), self.dim);
        if let Some(a) = self.terms.get(&0) {
            out.terms.insert(0, a.clone());
        }
        out
    }

    /// Covariance product: `Σ_{g,h} a_g·T̂_g(c_h) T_{g·h}`.
    pub fn multiply(&self, other: &SymbolicElement) -> Result<Self> {
        if *self.action != *other.action {
            return Err(AlgebraError::ActionMismatch);
        }
        if self.dim != other.dim {
            return Err(AlgebraError::DimMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let group = self.action.group();
        let mut out = Self::zero(self.action.clone(), self.dim);
        for (&g, a) in &self.terms {
            for (&h, c) in &other.terms {
                let moved = automorphism_apply(&self.action, g, c)?;
                out.add_term(group.mul(g, h), a.mul(&moved)?)?;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &SymbolicElement) -> Result<Self> {
        if *self.action != *other.action {
            return Err(AlgebraError::ActionMismatch);
        }
        let mut out = self.clone();
        for (&g, c) in &other.terms {
            out.add_term(g, c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.action.clone(), self.dim);
        for (&g, a) in &self.terms {
            let scaled = a.scale(c);
            if !scaled.is_zero() {
                out.terms.insert(g, scaled);
            }
        }
        out
    }

    /// `Σ a_g χ(g) T_g`
    pub fn character_twist(&self, chi: &Character) -> Result<Self> {
        if chi.group != **self.action.group() {
            return Err(AlgebraError::GroupMismatch);
        }
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|(&g, a)| (g, a.scale(chi.values[g])))
                .collect(),
            ..self.clone()
        })
    }

    /// The same coefficients over another weighting of the atoms, with the
    /// action transported along.
    pub fn with_space(&self, space: Arc<MeasureSpace>) -> Result<Self> {
        let action = Arc::new(
            self.action
                .with_space(space.clone())
                .map_err(|_| AlgebraError::SpaceMismatch)?,
        );
        let terms = self
            .terms
            .iter()
            .map(|(&g, a)| Ok((g, a.rehomed(space.clone())?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            action,
            dim: self.dim,
            terms,
        })
    }

    /// Largest blockwise deviation over the union of supports.
    pub fn max_abs_diff(&self, other: &SymbolicElement) -> f64 {
        let keys: std::collections::BTreeSet<usize> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.into_iter()
            .map(|g| {
                self.fourier_coefficient(g)
                    .max_abs_diff(&other.fourier_coefficient(g))
            })
            .fold(0.0, f64::max)
    }
}

/// A unitary character `χ: G → 𝕋`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    group: FiniteGroup,
    values: Vec<Complex64>,
}

impl Character {
    const TOL: f64 = 1e-12;

    pub fn new(group: FiniteGroup, values: Vec<Complex64>) -> Result<Self> {
        let n = group.order();
        if values.len() != n {
            return Err(AlgebraError::NotCharacter(format!(
                "{} values for a group of order {n}",
                values.len()
            )));
        }
        if (values[0] - Complex64::new(1.0, 0.0)).norm() > Self::TOL {
            return Err(AlgebraError::NotCharacter("χ(e) ≠ 1".into()));
        }
        for g in 0..n {
            if (values[g].norm() - 1.0).abs() > Self::TOL {
                return Err(AlgebraError::NotCharacter(format!("|χ({g})| ≠ 1")));
            }
            for h in 0..n {
                if (values[group.mul(g, h)] - values[g] * values[h]).norm() > Self::TOL {
                    return Err(AlgebraError::NotCharacter(format!(
                        "χ({g}·{h}) ≠ χ({g})χ({h})"
                    )));
                }
            }
        }
        Ok(Self { group, values })
    }

    pub fn trivial(group: FiniteGroup) -> Self {
        let values = vec![Complex64::new(1.0, 0.0); group.order()];
        Self { group, values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, g: usize) -> Complex64 {
        self.values[g]
    }

    pub fn conj(&self) -> Self {
        Self {
            group: self.group.clone(),
            values: self.values.iter().map(Complex64::conj).collect(),
        }
    }

    /// All `|G|` characters of an abelian group.
    ///
    /// Picks a generating set greedily (largest element order first, skipping
    /// elements already generated), assigns each generator every root of unity
    /// of its order, and keeps the assignments that extend to a homomorphism.
    pub fn enumerate(group: &FiniteGroup) -> Result<Vec<Character>> {
        if !group.is_abelian() {
            return Err(AlgebraError::NonAbelianGroup);
        }
        let n = group.order();
        let mut by_order: Vec<usize> = (1..n).collect();
        by_order.sort_by_key(|&g| (std::cmp::Reverse(group.element_order(g)), g));
        let mut gens: Vec<usize> = Vec::new();
        for g in by_order {
            if !group.generated_subgroup(&gens).contains(&g) {
                gens.push(g);
            }
        }
        let orders: Vec<usize> = gens.iter().map(|&g| group.element_order(g)).collect();

        // Exponent vector (k_1, ..., k_r) ↦ χ(gen_i) = exp(2πi k_i / ord_i).
        let mut out: Vec<Character> = Vec::new();
        let mut ks = vec![0usize; gens.len()];
        loop {
            if let Some(values) = extend_character(group, &gens, &orders, &ks) {
                if !out.iter().any(|c| close(&c.values, &values)) {
                    out.push(Character {
                        group: group.clone(),
                        values,
                    });
                }
            }
            // odometer increment
            let mut i = 0;
            loop {
                if i == ks.len() {
                    return Ok(out);
                }
                ks[i] += 1;
                if ks[i] < orders[i] {
                    break;
                }
                ks[i] = 0;
                i += 1;
            }
        }
    }
}

fn close(a: &[Complex64], b: &[Complex64]) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).norm() < 1e-9)
}

/// Walks the Cayley graph from `e` along generators and returns the values if
/// the assignment is consistent.
fn extend_character(
    group: &FiniteGroup,
    gens: &[usize],
    orders: &[usize],
    ks: &[usize],
) -> Option<Vec<Complex64>> {
    let n = group.order();
    let gen_vals: Vec<Complex64> = ks
        .iter()
        .zip(orders)
        .map(|(&k, &o)| Complex64::from_polar(1.0, TAU * k as f64 / o as f64))
        .collect();
    let mut values: Vec<Option<Complex64>> = vec![None; n];
    values[0] = Some(Complex64::new(1.0, 0.0));
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        let vx = values[x].unwrap();
        for (&s, &vs) in gens.iter().zip(&gen_vals) {
            let y = group.mul(x, s);
            let vy = vx * vs;
            match values[y] {
                Some(prev) if (prev - vy).norm() > 1e-9 => return None,
                Some(_) => {}
                None => {
                    values[y] = Some(vy);
                    stack.push(y);
                }
            }
        }
    }
    let values: Vec<Complex64> = values.into_iter().collect::<Option<_>>()?;
    // homomorphism on the full table
    for g in 0..n {
        for h in 0..n {
            if (values[group.mul(g, h)] - values[g] * values[h]).norm() > 1e-9 {
                return None;
            }
        }
    }
    Some(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z3_omega3() -> Arc<GroupAction> {
        let space = Arc::new(MeasureSpace::from_weights(&[0.5, 0.25, 0.25]).unwrap());
        let perms = (0..3).map(|g| (0..3).map(|x| (x + g) % 3).collect()).collect();
        Arc::new(GroupAction::new(Arc::new(FiniteGroup::cyclic(3)), space, perms).unwrap())
    }

    fn reals(c: &Coefficient) -> Vec<f64> {
        c.blocks().iter().map(|b| b[(0, 0)].re).collect()
    }

    #[test]
    fn automorphism_examples() {
        let act = z3_omega3();
        let a = Coefficient::scalar(act.space().clone(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(automorphism_apply(&act, 0, &a).unwrap(), a);
        assert_eq!(reals(&automorphism_apply(&act, 1, &a).unwrap()), vec![3.0, 1.0, 2.0]);
        let c = Coefficient::scalar(act.space().clone(), &[5.0, 5.0, 5.0]).unwrap();
        for g in 0..3 {
            assert_eq!(automorphism_apply(&act, g, &c).unwrap(), c);
        }
        let other = Arc::new(MeasureSpace::from_weights(&[1.0, 1.0]).unwrap());
        let wrong = Coefficient::scalar(other, &[1.0, 1.0]).unwrap();
        assert_eq!(
            automorphism_apply(&act, 1, &wrong).unwrap_err(),
            AlgebraError::SpaceMismatch
        );
    }

    #[test]
    fn automorphism_group_law() {
        let act = z3_omega3();
        let a = Coefficient::scalar(act.space().clone(), &[1.0, -2.0, 7.0]).unwrap();
        for g in 0..3 {
            for h in 0..3 {
                let lhs = automorphism_apply(&act, act.group().mul(g, h), &a).unwrap();
                let inner = automorphism_apply(&act, h, &a).unwrap();
                assert_eq!(lhs, automorphism_apply(&act, g, &inner).unwrap());
            }
        }
    }

    #[test]
    fn multiply_examples() {
        let act = z3_omega3();
        let sp = act.space().clone();
        let tg = SymbolicElement::translation(act.clone(), 1, 1).unwrap();
        let tginv = SymbolicElement::translation(act.clone(), 1, 2).unwrap();
        let e = SymbolicElement::translation(act.clone(), 1, 0).unwrap();
        assert_eq!(tg.multiply(&tginv).unwrap(), e);

        let a = Coefficient::scalar(sp.clone(), &[1.0, 2.0, 3.0]).unwrap();
        let b = Coefficient::scalar(sp.clone(), &[4.0, 0.5, -1.0]).unwrap();
        let ae = SymbolicElement::new(act.clone(), 1, [(0, a.clone())]).unwrap();
        let be = SymbolicElement::new(act.clone(), 1, [(0, b.clone())]).unwrap();
        let prod = ae.multiply(&be).unwrap();
        assert_eq!(reals(&prod.fourier_coefficient(0)), vec![4.0, 1.0, -3.0]);

        let ones = Coefficient::scalar(sp.clone(), &[1.0, 1.0, 1.0]).unwrap();
        let x = SymbolicElement::new(act.clone(), 1, [(1, ones)]).unwrap();
        let y = SymbolicElement::new(act.clone(), 1, [(1, a)]).unwrap();
        let xy = x.multiply(&y).unwrap();
        assert_eq!(xy.support(), vec![2]);
        assert_eq!(reals(&xy.fourier_coefficient(2)), vec![3.0, 1.0, 2.0]);
        assert!(xy.fourier_coefficient(0).is_zero());
    }

    #[test]
    fn multiply_rejects_mismatches() {
        let act = z3_omega3();
        let other = {
            let perms = vec![vec![0, 1, 2], vec![0, 1, 2]];
            Arc::new(
                GroupAction::new(Arc::new(FiniteGroup::cyclic(2)), act.space().clone(), perms)
                    .unwrap(),
            )
        };
        let a = SymbolicElement::translation(act.clone(), 1, 1).unwrap();
        let b = SymbolicElement::translation(other, 1, 1).unwrap();
        assert_eq!(a.multiply(&b).unwrap_err(), AlgebraError::ActionMismatch);
        let c = SymbolicElement::translation(act, 2, 1).unwrap();
        assert!(matches!(a.multiply(&c), Err(AlgebraError::DimMismatch { .. })));
    }

    #[test]
    fn zero_terms_are_pruned() {
        let act = z3_omega3();
        let z = Coefficient::zero(act.space().clone(), 1);
        let b = SymbolicElement::new(act.clone(), 1, [(1, z)]).unwrap();
        assert!(b.terms().is_empty());
        assert!(b.is_symbolically_zero());
        assert!(SymbolicElement::zero(act.clone(), 1).is_symbolically_zero());

        // near-zero values are kept
        let tiny = Coefficient::scalar(act.space().clone(), &[1e-300, 0.0, 0.0]).unwrap();
        let b = SymbolicElement::new(act.clone(), 1, [(1, tiny)]).unwrap();
        assert!(!b.is_symbolically_zero());

        let a = Coefficient::scalar(act.space().clone(), &[1.0, 1.0, 1.0]).unwrap();
        let b = SymbolicElement::new(act, 1, [(0, a.clone()), (1, a.scale((-1.0).into()))]).unwrap();
        assert!(!b.is_symbolically_zero());
    }

    #[test]
    fn fourier_coefficient_examples() {
        let act = z3_omega3();
        let a = Coefficient::scalar(act.space().clone(), &[1.0, 2.0, 3.0]).unwrap();
        let b = SymbolicElement::new(act, 1, [(0, a.clone())]).unwrap();
        assert_eq!(b.fourier_coefficient(0), a);
        assert!(b.fourier_coefficient(1).is_zero());
    }

    #[test]
    fn characters_of_small_groups() {
        for n in 1..=6 {
            let g = FiniteGroup::cyclic(n);
            let chars = Character::enumerate(&g).unwrap();
            assert_eq!(chars.len(), n);
            for c in &chars {
                Character::new(g.clone(), c.values().to_vec()).unwrap();
            }
        }
        let v4 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        let chars = Character::enumerate(&v4).unwrap();
        assert_eq!(chars.len(), 4);
        let z2z3 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(3));
        assert_eq!(Character::enumerate(&z2z3).unwrap().len(), 6);
        assert_eq!(
            Character::enumerate(&FiniteGroup::symmetric(3)).unwrap_err(),
            AlgebraError::NonAbelianGroup
        );
        assert!(Character::new(FiniteGroup::cyclic(2), vec![1.0.into(), Complex64::i()]).is_err());
    }

    #[test]
    fn character_twist_examples() {
        let act = z3_omega3();
        let sp = act.space().clone();
        let ae = Coefficient::scalar(sp.clone(), &[1.0, 2.0, 3.0]).unwrap();
        let ag = Coefficient::scalar(sp, &[1.0, 1.0, 1.0]).unwrap();
        let b = SymbolicElement::new(act.clone(), 1, [(0, ae.clone()), (1, ag.clone())]).unwrap();
        let group = (**act.group()).clone();
        assert_eq!(b.character_twist(&Character::trivial(group.clone())).unwrap(), b);

        let omega = Complex64::from_polar(1.0, TAU / 3.0);
        let chi = Character::new(group.clone(), vec![1.0.into(), omega, omega * omega]).unwrap();
        let twisted = b.character_twist(&chi).unwrap();
        assert_eq!(twisted.fourier_coefficient(0), ae);
        assert!(twisted.fourier_coefficient(1).max_abs_diff(&ag.scale(omega)) == 0.0);
        let back = twisted.character_twist(&chi.conj()).unwrap();
        assert!(back.max_abs_diff(&b) <= 1e-12);

        let wrong = Character::trivial(FiniteGroup::cyclic(2));
        assert_eq!(b.character_twist(&wrong).unwrap_err(), AlgebraError::GroupMismatch);
    }

    fn random_element(rng: &mut ChaCha8Rng, act: &Arc<GroupAction>, dim: usize) -> SymbolicElement {
        let n = act.space().len();
        let mut b = SymbolicElement::zero(act.clone(), dim);
        for g in 0..act.group().order() {
            if rng.random_bool(0.6) {
                let blocks = (0..n)
                    .map(|_| {
                        DMatrix::from_fn(dim, dim, |_, _| {
                            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        })
                    })
                    .collect();
                b.add_term(g, Coefficient::new(act.space().clone(), blocks).unwrap())
                    .unwrap();
            }
        }
        b
    }

    fn s3_on_cosets(subgroup_index: usize) -> Arc<GroupAction> {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let h = &s3.subgroups()[subgroup_index];
        let perms = GroupAction::coset_action(s3.clone(), h);
        let n = perms[0].len();
        let w: Vec<f64> = (0..n).map(|i| 0.3 + i as f64).collect();
        Arc::new(GroupAction::new(s3, Arc::new(MeasureSpace::from_weights(&w).unwrap()), perms).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn multiply_is_associative(seed in any::<u64>(), dim in 1usize..=2, sub in 0usize..6) {
            let act = s3_on_cosets(sub);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_element(&mut rng, &act, dim);
            let b = random_element(&mut rng, &act, dim);
            let c = random_element(&mut rng, &act, dim);
            let lhs = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let rhs = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        }

        #[test]
        fn fourier_of_product_is_convolution(seed in any::<u64>(), dim in 1usize..=2, sub in 0usize..6) {
            let act = s3_on_cosets(sub);
            let group = act.group().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_element(&mut rng, &act, dim);
            let b = random_element(&mut rng, &act, dim);
            let prod = a.multiply(&b).unwrap();
            for k in 0..group.order() {
                // Σ_{g·h=k} a_g·T̂_g(b_h), with h = g⁻¹k
                let mut acc = Coefficient::zero(act.space().clone(), dim);
                for g in 0..group.order() {
                    let h = group.mul(group.inv(g), k);
                    let moved = automorphism_apply(&act, g, &b.fourier_coefficient(h)).unwrap();
                    acc = acc.add(&a.fourier_coefficient(g).mul(&moved).unwrap()).unwrap();
                }
                prop_assert!(prod.fourier_coefficient(k).max_abs_diff(&acc) <= 1e-12);
            }
        }

        #[test]
        fn twist_scales_fourier_coefficients(seed in any::<u64>(), n in 2usize..=6) {
            let perms = (0..n).map(|g| (0..n).map(|x| (x + g) % n).collect()).collect();
            let act = Arc::new(GroupAction::new(
                Arc::new(FiniteGroup::cyclic(n)),
                Arc::new(MeasureSpace::uniform(n).unwrap()),
                perms,
            ).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_element(&mut rng, &act, 1);
            for chi in Character::enumerate(act.group()).unwrap() {
                let t = b.character_twist(&chi).unwrap();
                for g in 0..n {
                    let expect = b.fourier_coefficient(g).scale(chi.value(g));
                    prop_assert_eq!(t.fourier_coefficient(g), expect);
                }
            }
        }
    }
}
