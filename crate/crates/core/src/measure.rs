//! Finite atomic measure spaces, finite groups given by Cayley tables, and
//! measure-class-preserving actions of those groups by atom permutations.
//!
//! Atom order is fixed at construction and defines coordinate order in every
//! downstream matrix. Group element `0` is always the identity.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::Exponent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("measure space must contain at least one atom")]
    EmptySpace,
    #[error("atom {label:?} has non-positive or non-finite weight {weight}")]
    NonpositiveWeight { label: String, weight: f64 },
    #[error("duplicate atom label {0:?}")]
    DuplicateLabel(String),
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("no permutation supplied for group element {0}")]
    MissingElement(usize),
    #[error("permutation for the identity element is not the identity")]
    IdentityNotFixed,
    #[error("perm[{g}*{h}] != perm[{g}] o perm[{h}]")]
    NotHomomorphism { g: usize, h: usize },
    #[error("permutation for element {g} is not a bijection of {atoms} atoms")]
    NotPermutation { g: usize, atoms: usize },
    #[error("the Radon-Nikodym cocycle is undefined for p = inf")]
    InfiniteExponent,
    #[error("index {index} out of range for {what} of size {size}")]
    OutOfRange { what: &'static str, index: usize, size: usize },
    #[error("space with {atoms} atoms exceeds the enumeration bound {bound}")]
    SpaceTooLarge { atoms: usize, bound: usize },
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// A finite measure space: labelled atoms with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new<S: Into<String>>(atoms: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let mut labels = Vec::new();
        let mut weights = Vec::new();
        let mut seen = HashSet::new();
        for (label, weight) in atoms {
            let label = label.into();
            if !(weight.is_finite() && weight > 0.0) {
                return Err(MeasureError::NonpositiveWeight { label, weight });
            }
            if !seen.insert(label.clone()) {
                return Err(MeasureError::DuplicateLabel(label));
            }
            labels.push(label);
            weights.push(weight);
        }
        if labels.is_empty() {
            return Err(MeasureError::EmptySpace);
        }
        Ok(Self { labels, weights })
    }

    /// Atoms labelled `x0, x1, ...` with the given weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().enumerate().map(|(i, &w)| (format!("x{i}"), w)))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0 / n.max(1) as f64; n])
    }

    /// Same atoms, new weights.
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(MeasureError::OutOfRange {
                what: "weight vector",
                index: weights.len(),
                size: self.len(),
            });
        }
        Self::new(self.labels.iter().cloned().zip(weights.iter().copied()))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let w: Vec<f64> = self.weights.iter().map(|w| w * c).collect();
        self.reweighted(&w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// μ(Δ) for a set of atom indices.
    pub fn measure_of(&self, atoms: impl IntoIterator<Item = usize>) -> f64 {
        atoms.into_iter().map(|x| self.weights[x]).sum()
    }
}

/// A finite group given by its Cayley table; `g·h = cayley[g][h]`, identity at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteGroup {
    cayley: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates closure, identity at index 0, inverses and associativity.
    pub fn from_cayley(cayley: Vec<Vec<usize>>) -> Result<Self> {
        let n = cayley.len();
        if n == 0 {
            return Err(MeasureError::InvalidGroup("empty table".into()));
        }
        for (g, row) in cayley.iter().enumerate() {
            if row.len() != n {
                return Err(MeasureError::InvalidGroup(format!(
                    "row {g} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&k| k >= n) {
                return Err(MeasureError::InvalidGroup(format!(
                    "row {g} contains element {bad} outside 0..{n}"
                )));
            }
        }
        for (g, row) in cayley.iter().enumerate() {
            if cayley[0][g] != g || row[0] != g {
                return Err(MeasureError::InvalidGroup(format!(
                    "element 0 is not an identity for {g}"
                )));
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for (g, row) in cayley.iter().enumerate() {
            match (0..n).find(|&h| row[h] == 0 && cayley[h][g] == 0) {
                Some(h) => inverse.push(h),
                None => {
                    return Err(MeasureError::InvalidGroup(format!(
                        "element {g} has no two-sided inverse"
                    )))
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]] {
                        return Err(MeasureError::InvalidGroup(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Self { cayley, inverse })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        Self::from_cayley(table).expect("cyclic table is a group")
    }

    /// Direct product; element `(a, b)` has index `a * |H| + b`.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (m, n) = (g.order(), h.order());
        let table = (0..m * n)
            .map(|x| {
                (0..m * n)
                    .map(|y| g.mul(x / n, y / n) * n + h.mul(x % n, y % n))
                    .collect()
            })
            .collect();
        Self::from_cayley(table).expect("product of groups is a group")
    }

    /// The symmetric group on `k` letters, elements ordered lexicographically
    /// by permutation (identity first). Composition is `(σ·τ)(i) = σ(τ(i))`.
    pub fn symmetric(k: usize) -> Self {
        let perms = all_permutations(k);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index(&t.iter().map(|&i| s[i]).collect()))
                    .collect()
            })
            .collect();
        Self::from_cayley(table).expect("symmetric group table is a group")
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub const fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g][h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|g| (0..n).all(|h| self.cayley[g][h] == self.cayley[h][g]))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &s in gens {
                let y = self.mul(x, s);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.order()).filter(|&g| seen[g]).collect()
    }

    /// All subgroups, found by brute force over subsets closed under the
    /// product. Only meant for tiny groups.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        assert!(n <= 16, "subgroup enumeration is exponential in the order");
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask & 1 == 0 {
                continue;
            }
            let elems: Vec<usize> = (0..n).filter(|&g| mask >> g & 1 == 1).collect();
            let closed = elems
                .iter()
                .all(|&a| elems.iter().all(|&b| mask >> self.mul(a, b) & 1 == 1));
            if closed {
                out.push(elems);
            }
        }
        out
    }
}

pub(crate) fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// An action `g ↦ α_g` of a finite group on the atoms of a measure space.
///
/// `perm[g][x] = α_g(x)`; the homomorphism law is `α_{g·h} = α_g ∘ α_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    space: Arc<MeasureSpace>,
    perm: Vec<Vec<usize>>,
    inv_perm: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(
        group: Arc<FiniteGroup>,
        space: Arc<MeasureSpace>,
        perms: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = space.len();
        if perms.len() < group.order() {
            return Err(MeasureError::MissingElement(perms.len()));
        }
        if perms.len() > group.order() {
            return Err(MeasureError::OutOfRange {
                what: "group",
                index: perms.len() - 1,
                size: group.order(),
            });
        }
        let mut inv_perm = Vec::with_capacity(perms.len());
        for (g, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(MeasureError::NotPermutation { g, atoms: n });
            }
            let mut inv = vec![usize::MAX; n];
            for (x, &y) in p.iter().enumerate() {
                if y >= n || inv[y] != usize::MAX {
                    return Err(MeasureError::NotPermutation { g, atoms: n });
                }
                inv[y] = x;
            }
            inv_perm.push(inv);
        }
        if perms[0].iter().enumerate().any(|(x, &y)| x != y) {
            return Err(MeasureError::IdentityNotFixed);
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let gh = group.mul(g, h);
                if (0..n).any(|x| perms[gh][x] != perms[g][perms[h][x]]) {
                    return Err(MeasureError::NotHomomorphism { g, h });
                }
            }
        }
        Ok(Self {
            group,
            space,
            perm: perms,
            inv_perm,
        })
    }

    /// The action of `G` on its left cosets `G/H`, `α_g(kH) = gkH`.
    /// Atoms are cosets ordered by their smallest representative.
    pub fn coset_action(group: Arc<FiniteGroup>, subgroup: &[usize]) -> Vec<Vec<usize>> {
        let n = group.order();
        let mut coset_of = vec![usize::MAX; n];
        let mut count = 0;
        for k in 0..n {
            if coset_of[k] == usize::MAX {
                for &h in subgroup {
                    coset_of[group.mul(k, h)] = count;
                }
                count += 1;
            }
        }
        let reps: Vec<usize> = (0..count)
            .map(|c| (0..n).find(|&k| coset_of[k] == c).unwrap())
            .collect();
        (0..n)
            .map(|g| reps.iter().map(|&k| coset_of[group.mul(g, k)]).collect())
            .collect()
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perm
    }

    /// α_g(x)
    #[inline]
    pub fn forward(&self, g: usize, x: usize) -> usize {
        self.perm[g][x]
    }

    /// α_g⁻¹(x)
    #[inline]
    pub fn backward(&self, g: usize, x: usize) -> usize {
        self.inv_perm[g][x]
    }

    /// Setwise image α_g(Δ).
    pub fn image(&self, g: usize, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.perm[g][x]).collect();
        out.sort_unstable();
        out
    }

    /// The same action over a different weighting of the same atoms.
    pub fn with_space(&self, space: Arc<MeasureSpace>) -> Result<Self> {
        if space.labels() != self.space.labels() {
            return Err(MeasureError::OutOfRange {
                what: "atom labels",
                index: space.len(),
                size: self.space.len(),
            });
        }
        Ok(Self {
            space,
            ..self.clone()
        })
    }

    /// `(μ(α_g⁻¹(x)) / μ(x))^{1/p}`, the scalar multiplying `f(α_g⁻¹(x))` in
    /// the isometry `T_g` on `L^p_μ`.
    pub fn rn_cocycle(&self, g: usize, p: Exponent, x: usize) -> Result<f64> {
        let p = p.value().ok_or(MeasureError::InfiniteExponent)?;
        self.check_element(g)?;
        self.check_atom(x)?;
        let ratio = self.space.weight(self.backward(g, x)) / self.space.weight(x);
        Ok(ratio.powf(1.0 / p))
    }

    pub fn fixed_atoms(&self, g: usize) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&x| self.perm[g][x] == x)
            .collect()
    }

    /// Metrical freedom on an atomic space: every non-identity element moves
    /// every atom. Any positive-measure set contains a single atom, and for a
    /// one-atom set condition (iii) on `{g, h}` reads `α_{h⁻¹g}(ω) ≠ ω`.
    pub fn check_metrically_free(&self) -> FreenessVerdict {
        for g in 1..self.group.order() {
            if let Some(&x) = self.fixed_atoms(g).first() {
                return FreenessVerdict::not_free(g, x);
            }
        }
        FreenessVerdict::free()
    }

    /// Literal enumeration of the definition: for every finite `F ⊆ G` with at
    /// least two elements and every nonempty `Δ`, search for a nonempty
    /// `Δ' ⊆ Δ` whose images under `F` are pairwise disjoint.
    pub fn check_metrically_free_direct(&self, max_subset_atoms: usize) -> Result<FreenessVerdict> {
        let n = self.space.len();
        let m = self.group.order();
        if n > max_subset_atoms || n > 20 || m > 20 {
            return Err(MeasureError::SpaceTooLarge {
                atoms: n,
                bound: max_subset_atoms.min(20),
            });
        }
        // Δ ordered by size so the first failing set is a singleton.
        let mut deltas: Vec<u32> = (1u32..(1 << n)).collect();
        deltas.sort_by_key(|d| (d.count_ones(), *d));
        let image_mask = |g: usize, set: u32| -> u32 {
            (0..n)
                .filter(|&x| set >> x & 1 == 1)
                .fold(0u32, |acc, x| acc | 1 << self.perm[g][x])
        };
        for f_mask in 1u32..(1 << m) {
            if f_mask.count_ones() < 2 {
                continue;
            }
            let f: Vec<usize> = (0..m).filter(|&g| f_mask >> g & 1 == 1).collect();
            for &delta in &deltas {
                let found = submasks(delta).any(|sub| {
                    let images: Vec<u32> = f.iter().map(|&g| image_mask(g, sub)).collect();
                    images.iter().enumerate().all(|(i, a)| {
                        images[i + 1..]
                            .iter()
                            .all(|b| self.space.measure_of(bits(a & b)) == 0.0)
                    })
                });
                if !found {
                    let x = delta.trailing_zeros() as usize;
                    // α_{g_i}(x) = α_{g_j}(x) for some i ≠ j, so g_j⁻¹g_i fixes x.
                    for (i, &gi) in f.iter().enumerate() {
                        for &gj in &f[i + 1..] {
                            if self.perm[gi][x] == self.perm[gj][x] {
                                let h = self.group.mul(self.group.inv(gj), gi);
                                return Ok(FreenessVerdict::not_free(h, x));
                            }
                        }
                    }
                    unreachable!("a failing singleton always has a colliding pair");
                }
            }
        }
        Ok(FreenessVerdict::free())
    }

    fn check_element(&self, g: usize) -> Result<()> {
        if g >= self.group.order() {
            return Err(MeasureError::OutOfRange {
                what: "group",
                index: g,
                size: self.group.order(),
            });
        }
        Ok(())
    }

    fn check_atom(&self, x: usize) -> Result<()> {
        if x >= self.space.len() {
            return Err(MeasureError::OutOfRange {
                what: "space",
                index: x,
                size: self.space.len(),
            });
        }
        Ok(())
    }
}

fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done || sub == 0 {
            return None;
        }
        let cur = sub;
        sub = (sub - 1) & mask;
        if sub == 0 {
            done = true;
        }
        Some(cur)
    })
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| mask >> i & 1 == 1)
}

/// Outcome of a freeness check; a witness `(g, x)` has `g ≠ e` and `α_g(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FreenessVerdict {
    pub free: bool,
    pub witness: Option<(usize, usize)>,
}

impl FreenessVerdict {
    fn free() -> Self {
        Self {
            free: true,
            witness: None,
        }
    }

    fn not_free(g: usize, x: usize) -> Self {
        Self {
            free: false,
            witness: Some((g, x)),
        }
    }
}
