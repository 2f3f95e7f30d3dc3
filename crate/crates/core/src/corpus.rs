//! Deterministic scenario families: small groups acting freely and non-freely
//! on at most six atoms, with random and adversarial coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Coefficient, SymbolicElement};
use crate::measure::{FiniteGroup, GroupAction, MeasureSpace};
use crate::scenario::{Scenario, Tolerances};
use crate::{Complex64, Exponent};

pub const MAX_ATOMS: usize = 6;
pub const MAX_DIM: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("bounds exceeded: {0}")]
    BoundsExceeded(String),
    #[error("generated action {id} is mislabeled: declared free = {declared}")]
    Mislabeled { id: String, declared: bool },
    #[error("internal construction failed: {0}")]
    Construction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupDescriptor {
    Cyclic(usize),
    KleinFour,
    Symmetric3,
}

impl GroupDescriptor {
    pub fn build(self) -> FiniteGroup {
        match self {
            GroupDescriptor::Cyclic(n) => FiniteGroup::cyclic(n),
            GroupDescriptor::KleinFour => {
                let z2 = FiniteGroup::cyclic(2);
                FiniteGroup::product(&z2, &z2)
            }
            GroupDescriptor::Symmetric3 => FiniteGroup::symmetric(3),
        }
    }

    /// `Z2..Z6`, `Z2xZ2` and `S3`.
    pub fn all() -> Vec<GroupDescriptor> {
        let mut v: Vec<_> = (2..=6).map(GroupDescriptor::Cyclic).collect();
        v.push(GroupDescriptor::KleinFour);
        v.push(GroupDescriptor::Symmetric3);
        v
    }

    fn slug(self) -> String {
        self.to_string().to_lowercase()
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Cyclic(n) => write!(f, "Z{n}"),
            GroupDescriptor::KleinFour => f.write_str("Z2xZ2"),
            GroupDescriptor::Symmetric3 => f.write_str("S3"),
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, CorpusError> {
        match s.trim() {
            "Z2xZ2" | "Z2×Z2" | "V4" => Ok(GroupDescriptor::KleinFour),
            "S3" => Ok(GroupDescriptor::Symmetric3),
            t => t
                .strip_prefix('Z')
                .and_then(|n| n.parse().ok())
                .filter(|n| (2..=MAX_ATOMS).contains(n))
                .map(GroupDescriptor::Cyclic)
                .ok_or_else(|| CorpusError::BoundsExceeded(format!("unsupported group {s:?}"))),
        }
    }
}

impl TryFrom<String> for GroupDescriptor {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, CorpusError> {
        s.parse()
    }
}

impl From<GroupDescriptor> for String {
    fn from(g: GroupDescriptor) -> String {
        g.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Freeness {
    FreeOnly,
    NonFreeOnly,
    #[default]
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub max_atoms: usize,
    pub groups: Vec<GroupDescriptor>,
    pub freeness: Freeness,
    pub dims: Vec<usize>,
    pub draws: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            max_atoms: MAX_ATOMS,
            groups: GroupDescriptor::all(),
            freeness: Freeness::Mixed,
            dims: vec![1, 2],
            draws: 12,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ActionKind {
    Rotation,
    RightTranslation,
    TwoOrbits,
    Trivial,
    Coset(usize),
    OrbitPlusFixed,
}

impl ActionKind {
    fn slug(self) -> String {
        match self {
            ActionKind::Rotation => "rotation".into(),
            ActionKind::RightTranslation => "right_translation".into(),
            ActionKind::TwoOrbits => "two_orbits".into(),
            ActionKind::Trivial => "trivial".into(),
            ActionKind::Coset(i) => format!("coset{i}"),
            ActionKind::OrbitPlusFixed => "orbit_plus_fixed".into(),
        }
    }
}

struct ActionTemplate {
    kind: ActionKind,
    free: bool,
    perms: Vec<Vec<usize>>,
}

fn atoms_of(perms: &[Vec<usize>]) -> usize {
    perms[0].len()
}

/// Disjoint union of two actions: atoms of `b` follow those of `a`.
fn union(a: &[Vec<usize>], b: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let off = atoms_of(a);
    a.iter()
        .zip(b)
        .map(|(pa, pb)| pa.iter().copied().chain(pb.iter().map(|&y| y + off)).collect())
        .collect()
}

fn templates(desc: GroupDescriptor, group: &Arc<FiniteGroup>, max_atoms: usize) -> Vec<ActionTemplate> {
    let n = group.order();
    let mut out = Vec::new();
    let regular = match desc {
        // α_g(k) = k·g⁻¹
        GroupDescriptor::Symmetric3 => (0..n)
            .map(|g| (0..n).map(|k| group.mul(k, group.inv(g))).collect())
            .collect(),
        _ => GroupAction::coset_action(group.clone(), &[0]),
    };
    if n <= max_atoms {
        let kind = match desc {
            GroupDescriptor::Symmetric3 => ActionKind::RightTranslation,
            _ => ActionKind::Rotation,
        };
        out.push(ActionTemplate { kind, free: true, perms: regular.clone() });
    }
    if 2 * n <= max_atoms {
        out.push(ActionTemplate {
            kind: ActionKind::TwoOrbits,
            free: true,
            perms: union(&regular, &regular),
        });
    }
    let trivial_atoms = max_atoms.min(3);
    out.push(ActionTemplate {
        kind: ActionKind::Trivial,
        free: false,
        perms: vec![(0..trivial_atoms).collect(); n],
    });
    let proper: Vec<Vec<usize>> = group
        .subgroups()
        .into_iter()
        .filter(|h| h.len() > 1 && h.len() < n)
        .collect();
    for (i, h) in proper.iter().enumerate() {
        if n / h.len() <= max_atoms {
            out.push(ActionTemplate {
                kind: ActionKind::Coset(i),
                free: false,
                perms: GroupAction::coset_action(group.clone(), h),
            });
        }
    }
    if n < max_atoms {
        let point = vec![vec![0]; n];
        out.push(ActionTemplate {
            kind: ActionKind::OrbitPlusFixed,
            free: false,
            perms: union(&regular, &point),
        });
    }
    out
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| round3(rng.random_range(0.25..2.0))).collect()
}

fn random_block(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(round3(rng.random_range(-1.0..1.0)), round3(rng.random_range(-1.0..1.0)))
    })
}

fn diag_block(d: usize, c: f64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal_element(d, d, Complex64::new(c, 0.0))
}

fn checks_for(free: bool, abelian: bool) -> Vec<String> {
    let mut v = vec!["regular_isomorphism", "trajectory_norm"];
    if free {
        v.extend([
            "formula_agreement",
            "interpolation",
            "measure_isomorphism",
            "property_double_star",
            "property_star",
        ]);
        if abelian {
            v.push("character_symmetry");
        }
    } else {
        v.push("property_star_failure_search");
    }
    v.sort_unstable();
    v.into_iter().map(String::from).collect()
}

fn exponents_for(free: bool) -> Vec<Exponent> {
    let mut v = vec![Exponent::ONE, Exponent::TWO];
    if free {
        v.push(Exponent::finite(3.0).expect("3 is a valid exponent"));
    }
    v.push(Exponent::INF);
    v
}

fn err<E: fmt::Display>(e: E) -> CorpusError {
    CorpusError::Construction(e.to_string())
}

/// Draw 0 is adversarial: `a·T_e − a·T_g` with `g` the first non-identity
/// element and `a` the identity. On rotations with `d = 1` draw 0 is instead
/// the running example: weights `(1/2, …)`, `a_e = (1, …, n)`, `a_1 = 1`.
/// Later draws are random.
fn draw_element(
    action: &Arc<GroupAction>,
    kind: ActionKind,
    d: usize,
    draw: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SymbolicElement, CorpusError> {
    let space = action.space().clone();
    let n = space.len();
    let order = action.group().order();
    let mut terms = BTreeMap::new();
    if draw == 0 && kind == ActionKind::Rotation {
        let ramp: Vec<Complex64> = (0..n).map(|x| Complex64::new((x + 1) as f64, 0.0)).collect();
        let ae = Coefficient::new(
            space.clone(),
            ramp.iter().map(|&c| diag_block(d, 1.0) * c).collect(),
        )
        .map_err(err)?;
        terms.insert(0, ae);
        terms.insert(1, Coefficient::identity(space, d));
    } else if draw == 0 {
        terms.insert(0, Coefficient::identity(space.clone(), d));
        terms.insert(1, Coefficient::identity(space, d).scale(Complex64::new(-1.0, 0.0)));
    } else {
        for g in 0..order {
            if rng.random_bool(0.6) {
                let blocks = (0..n).map(|_| random_block(rng, d)).collect();
                terms.insert(g, Coefficient::new(space.clone(), blocks).map_err(err)?);
            }
        }
        if terms.is_empty() {
            let g = rng.random_range(0..order);
            let blocks = (0..n).map(|_| random_block(rng, d)).collect();
            terms.insert(g, Coefficient::new(space, blocks).map_err(err)?);
        }
    }
    SymbolicElement::new(action.clone(), d, terms).map_err(err)
}

fn weights_for(kind: ActionKind, draw: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if draw == 0 && kind == ActionKind::Rotation {
        let rest = 0.5 / (n - 1) as f64;
        std::iter::once(0.5).chain(std::iter::repeat_n(rest, n - 1)).collect()
    } else {
        random_weights(rng, n)
    }
}

fn validate(spec: &CorpusSpec) -> Result<(), CorpusError> {
    if spec.max_atoms == 0 || spec.max_atoms > MAX_ATOMS {
        return Err(CorpusError::BoundsExceeded(format!(
            "max_atoms = {} (allowed 1..={MAX_ATOMS})",
            spec.max_atoms
        )));
    }
    if let Some(&d) = spec.dims.iter().find(|&&d| d == 0 || d > MAX_DIM) {
        return Err(CorpusError::BoundsExceeded(format!("dim {d} (allowed 1..={MAX_DIM})")));
    }
    if let Some(GroupDescriptor::Cyclic(n)) = spec
        .groups
        .iter()
        .find(|g| matches!(g, GroupDescriptor::Cyclic(n) if !(2..=MAX_ATOMS).contains(n)))
    {
        return Err(CorpusError::BoundsExceeded(format!("Z{n} (allowed Z2..Z{MAX_ATOMS})")));
    }
    Ok(())
}

/// Generates the scenario family. Each generated action's freeness label is
/// confirmed with the literal subset enumerator before any scenario is built.
pub fn generate(spec: &CorpusSpec) -> Result<Vec<Scenario>, CorpusError> {
    validate(spec)?;
    let mut out = Vec::new();
    for (gi, &desc) in spec.groups.iter().enumerate() {
        let group = Arc::new(desc.build());
        for (ti, t) in templates(desc, &group, spec.max_atoms).into_iter().enumerate() {
            let wanted = match spec.freeness {
                Freeness::FreeOnly => t.free,
                Freeness::NonFreeOnly => !t.free,
                Freeness::Mixed => true,
            };
            if !wanted {
                continue;
            }
            let n = atoms_of(&t.perms);
            let base_id = format!("{}_{}", desc.slug(), t.kind.slug());
            let uniform = Arc::new(MeasureSpace::uniform(n).map_err(err)?);
            let probe = GroupAction::new(group.clone(), uniform, t.perms.clone()).map_err(err)?;
            let verdict = probe.check_metrically_free_direct(MAX_ATOMS).map_err(err)?;
            if verdict.free != t.free {
                return Err(CorpusError::Mislabeled { id: base_id, declared: t.free });
            }
            for &d in &spec.dims {
                for draw in 0..spec.draws {
                    let stream = ((gi as u64) << 48) ^ ((ti as u64) << 40) ^ ((d as u64) << 32) ^ draw as u64;
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                    let weights = weights_for(t.kind, draw, n, &mut rng);
                    let space = Arc::new(
                        MeasureSpace::new(weights.iter().enumerate().map(|(x, &w)| (format!("x{x}"), w)))
                            .map_err(err)?,
                    );
                    let action = Arc::new(
                        GroupAction::new(group.clone(), space.clone(), t.perms.clone()).map_err(err)?,
                    );
                    let element = draw_element(&action, t.kind, d, draw, &mut rng)?;
                    let space2 = space.reweighted(&random_weights(&mut rng, n)).map_err(err)?;
                    let id = if draw == 0 && d == 1 && t.kind == ActionKind::Rotation {
                        base_id.clone()
                    } else {
                        format!("{base_id}_d{d}_{draw:03}")
                    };
                    out.push(Scenario {
                        id,
                        dim: d,
                        seed: spec.seed.wrapping_add(draw as u64),
                        exponents: exponents_for(t.free),
                        checks: checks_for(t.free, group.is_abelian()),
                        action,
                        element,
                        space2: Some(space2),
                        tolerances: Tolerances::default(),
                        trials: 16,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Writes each scenario as `<id>.json` into `dir`, creating it if needed.
pub fn write_scenarios(dir: &Path, scenarios: &[Scenario]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    scenarios
        .iter()
        .map(|s| {
            let path = dir.join(format!("{}.json", s.id));
            let text = serde_json::to_string_pretty(&s.to_file()).map_err(std::io::Error::other)?;
            std::fs::write(&path, text + "\n")?;
            Ok(path)
        })
        .collect()
}
