//! Theorem-level checks on symbolic elements.
//!
//! Every equality check compares two independently computed quantities
//! (formula against matrix, direct against regular, regular against the
//! supremum over trajectories, one measure against another). Tolerances follow
//! the ladder in [`crate::norm::ladder_tolerance`] and are scaled by
//! `max(1, |lhs|, |rhs|)`. When a side is only a power-iteration lower bound,
//! a verdict is never drawn from its uncertain direction without saying so in
//! `details`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{AlgebraError, Character, Coefficient, SymbolicElement};
use crate::assembly::{assemble_direct, assemble_regular, assemble_trajectory, AssemblyError};
use crate::measure::{GroupAction, MeasureSpace};
use crate::norm::{
    formula_norm_l1, formula_norm_linf, interpolation_upper_bound, ladder_norm, ladder_tolerance,
    norm_exact, Guarantee, NormError, NormResult,
};
use crate::{Complex64, Exponent};

/// Absolute slack for one-sided inequalities, scaled like the ladder.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Bound on the norm of a symbolically zero element.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("action is not metrically free (g = {g} fixes atom {x})")]
    ActionNotFree { g: usize, x: usize },
    #[error("action is metrically free; no property (*) violation can exist")]
    ActionIsFree,
    #[error("group is not abelian; its characters do not separate the algebra")]
    NonAbelianGroup,
    #[error("second measure must carry the same atom labels")]
    AtomMismatch,
    #[error("check needs an exponent in (1, inf), got {0}")]
    UnsupportedExponent(Exponent),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

pub type Result<T> = std::result::Result<T, CheckError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub scenario_id: String,
    pub p: Exponent,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub details: Value,
}

impl CheckReport {
    fn new(name: &str, p: Exponent, passed: bool, lhs: f64, rhs: f64, tolerance: f64, details: Value) -> Self {
        Self {
            check_name: name.to_string(),
            scenario_id: String::new(),
            p,
            passed,
            lhs,
            rhs,
            tolerance,
            details,
        }
    }

    pub fn with_scenario(mut self, id: impl Into<String>) -> Self {
        self.scenario_id = id.into();
        self
    }
}

fn scaled(tol: f64, a: f64, b: f64) -> f64 {
    tol * 1f64.max(a.abs()).max(b.abs())
}

fn require_free(action: &GroupAction) -> Result<()> {
    match action.check_metrically_free().witness {
        Some((g, x)) => Err(CheckError::ActionNotFree { g, x }),
        None => Ok(()),
    }
}

fn direct_norm(b: &SymbolicElement, p: Exponent) -> Result<NormResult> {
    Ok(ladder_norm(&assemble_direct(b, p)?))
}

fn regular_norm(b: &SymbolicElement, p: Exponent) -> Result<NormResult> {
    Ok(ladder_norm(&assemble_regular(b, p)?))
}

fn method_json(r: &NormResult) -> Value {
    json!({ "method": r.method, "guarantee": r.guarantee })
}

/// `‖Σ a_g T_g‖ ≥ ‖a_e‖`. Allowed on non-free actions, where it can fail.
pub fn check_property_star(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    let op = assemble_direct(b, p)?;
    let lhs = ladder_norm(&op);
    let rhs = direct_norm(&b.identity_component(), p)?;
    let tol = scaled(INEQUALITY_TOL, lhs.value, rhs.value);
    let holds = lhs.value >= rhs.value - tol;
    let (passed, verdict) = if holds || lhs.is_upper_bound() {
        (holds, if holds { "holds" } else { "violated" })
    } else {
        let upper = interpolation_upper_bound(op.matrix(), p);
        if upper < rhs.value - tol {
            (false, "violated")
        } else {
            (false, "inconclusive")
        }
    };
    Ok(CheckReport::new(
        "property_star",
        p,
        passed,
        lhs.value,
        rhs.value,
        tol,
        json!({ "verdict": verdict, "lhs_norm": method_json(&lhs), "rhs_norm": method_json(&rhs) }),
    ))
}

fn point_minus_shift(action: &Arc<GroupAction>, dim: usize, g: usize, x: usize) -> SymbolicElement {
    let space = action.space().clone();
    let id = DMatrix::identity(dim, dim);
    let plus = Coefficient::point(space.clone(), x, id.clone());
    let minus = Coefficient::point(space, x, -id);
    SymbolicElement::new(action.clone(), dim, [(0, plus), (g, minus)]).expect("valid element")
}

fn random_coefficient(rng: &mut ChaCha8Rng, space: &Arc<MeasureSpace>, dim: usize) -> Coefficient {
    let blocks = (0..space.len())
        .map(|_| {
            DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
        })
        .collect();
    Coefficient::new(space.clone(), blocks).expect("blocks match the space")
}

/// Searches for `b` with `‖b‖ < ‖a_e‖` on a non-free action. `passed` means a
/// violation was found. The deterministic candidates `1_x T_e − 1_x T_g` for
/// every fixed pair `α_g(x) = x` come first, followed by `trials` random draws
/// supported on the fixed atoms of a random element.
pub fn check_property_star_failure_search(
    action: &Arc<GroupAction>,
    dim: usize,
    p: Exponent,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let verdict = action.check_metrically_free();
    if verdict.free {
        return Err(CheckError::ActionIsFree);
    }
    let order = action.group().order();
    let mut candidates: Vec<(Value, SymbolicElement)> = Vec::new();
    for g in 1..order {
        for x in action.fixed_atoms(g) {
            candidates.push((
                json!({ "kind": "point_minus_shift", "g": g, "atom": x }),
                point_minus_shift(action, dim, g, x),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = action.space().clone();
    for t in 0..trials {
        let g = rng.random_range(1..order);
        let fixed = action.fixed_atoms(g);
        let mut b = SymbolicElement::zero(action.clone(), dim);
        let ae = random_coefficient(&mut rng, &space, dim);
        let ag = random_coefficient(&mut rng, &space, dim);
        // Restrict to fixed atoms, where T_g acts as the identity.
        let mask = |c: &Coefficient| {
            let blocks = (0..space.len())
                .map(|x| {
                    if fixed.contains(&x) {
                        c.block(x).clone()
                    } else {
                        DMatrix::zeros(dim, dim)
                    }
                })
                .collect();
            Coefficient::new(space.clone(), blocks).expect("blocks match the space")
        };
        b.add_term(0, mask(&ae))?;
        b.add_term(g, mask(&ag))?;
        candidates.push((json!({ "kind": "random", "trial": t, "g": g }), b));
    }

    let mut best: Option<(f64, f64, f64, Value)> = None;
    for (desc, b) in candidates {
        let r = check_property_star(&b, p)?;
        // Rank by relative violation so coefficient scale does not decide.
        let rel = (r.rhs - r.lhs) / r.rhs.max(ZERO_TOL);
        if best.as_ref().is_none_or(|(v, ..)| rel > *v) {
            best = Some((rel, r.lhs, r.rhs, desc));
        }
    }
    let (_, lhs, rhs, desc) = best.expect("a non-free action has at least one fixed pair");
    let violation = rhs - lhs;
    let tol = scaled(INEQUALITY_TOL, lhs, rhs);
    Ok(CheckReport::new(
        "property_star_failure_search",
        p,
        violation > tol,
        lhs,
        rhs,
        tol,
        json!({ "best_candidate": desc, "violation": violation, "witness": verdict.witness }),
    ))
}

/// `b = 0 ⇔ N_g(b) = 0 for all g`, on free actions.
pub fn check_property_double_star(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    require_free(b.action())?;
    let norm = direct_norm(b, p)?;
    let scale = b
        .terms()
        .values()
        .flat_map(|a| a.blocks().iter().flat_map(|m| m.iter().map(|z| z.norm())))
        .fold(0.0, f64::max);
    let (passed, threshold, direction) = if b.is_symbolically_zero() {
        (norm.value <= ZERO_TOL, ZERO_TOL, "zero_implies_zero_norm")
    } else if norm.guarantee == Guarantee::LowerBound {
        let t = INEQUALITY_TOL * scale;
        (norm.value > t, t, "nonzero_coefficient_implies_positive_norm")
    } else {
        (norm.value > 0.0, 0.0, "nonzero_coefficient_implies_positive_norm")
    };
    Ok(CheckReport::new(
        "property_double_star",
        p,
        passed,
        norm.value,
        threshold,
        threshold,
        json!({ "direction": direction, "coefficient_scale": scale, "norm": method_json(&norm) }),
    ))
}

fn equality_report(
    name: &str,
    p: Exponent,
    lhs: f64,
    rhs: f64,
    details: Value,
) -> CheckReport {
    let tol = scaled(ladder_tolerance(p), lhs, rhs);
    CheckReport::new(name, p, (lhs - rhs).abs() <= tol, lhs, rhs, tol, details)
}

/// `‖Σ a_g T_g‖ = ‖Σ χ(g) a_g T_g‖` for every character of an abelian group.
/// `rhs` is the twisted norm farthest from `lhs`.
pub fn check_character_symmetry(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    let group = b.action().group();
    let chars = Character::enumerate(group).map_err(|e| match e {
        AlgebraError::NonAbelianGroup => CheckError::NonAbelianGroup,
        e => e.into(),
    })?;
    let base = direct_norm(b, p)?.value;
    let mut worst = base;
    let mut per_character = Vec::with_capacity(chars.len());
    for (i, chi) in chars.iter().enumerate() {
        let twisted = direct_norm(&b.character_twist(chi)?, p)?.value;
        if (twisted - base).abs() > (worst - base).abs() {
            worst = twisted;
        }
        per_character.push(json!({ "character": i, "norm": twisted }));
    }
    Ok(equality_report(
        "character_symmetry",
        p,
        base,
        worst,
        json!({ "characters": per_character }),
    ))
}

/// Direct against regular representation: equal on free actions, and
/// `‖b‖ ≤ ‖b̄‖` in general.
pub fn check_regular_isomorphism(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    let free = b.action().check_metrically_free().free;
    let lhs = direct_norm(b, p)?;
    let rhs = regular_norm(b, p)?;
    if free {
        return Ok(equality_report(
            "regular_isomorphism",
            p,
            lhs.value,
            rhs.value,
            json!({ "mode": "equality", "direct": method_json(&lhs), "regular": method_json(&rhs) }),
        ));
    }
    let tol = scaled(ladder_tolerance(p), lhs.value, rhs.value);
    let certain = rhs.is_upper_bound() && lhs.is_upper_bound();
    Ok(CheckReport::new(
        "regular_isomorphism",
        p,
        lhs.value <= rhs.value + tol,
        lhs.value,
        rhs.value,
        tol,
        json!({ "mode": "direct_le_regular", "certified": certain,
                "direct": method_json(&lhs), "regular": method_json(&rhs) }),
    ))
}

/// `‖b̄‖ = max_x ‖π_x(b)‖`.
pub fn check_trajectory_norm(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    let lhs = regular_norm(b, p)?.value;
    let n = b.action().space().len();
    let mut per_atom = Vec::with_capacity(n);
    let mut rhs = 0.0f64;
    for x in 0..n {
        let v = ladder_norm(&assemble_trajectory(b, x, p)?).value;
        per_atom.push(v);
        rhs = rhs.max(v);
    }
    Ok(equality_report(
        "trajectory_norm",
        p,
        lhs,
        rhs,
        json!({ "per_atom": per_atom }),
    ))
}

/// `‖b‖_p ≤ ‖b‖₁^{1/p} ‖b‖_∞^{1-1/p}` with the two endpoint norms taken from
/// the closed-form formulas.
pub fn check_interpolation(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    if p.is_infinite() || p.is(1.0) {
        return Err(CheckError::UnsupportedExponent(p));
    }
    require_free(b.action())?;
    let lhs = direct_norm(b, p)?;
    let l1 = formula_norm_l1(b)?.value;
    let linf = formula_norm_linf(b)?.value;
    let t = p.reciprocal();
    let rhs = l1.powf(t) * linf.powf(1.0 - t);
    let tol = scaled(INEQUALITY_TOL, lhs.value, rhs);
    Ok(CheckReport::new(
        "interpolation",
        p,
        lhs.value <= rhs + tol,
        lhs.value,
        rhs,
        tol,
        json!({ "norm_l1": l1, "norm_linf": linf, "lhs_norm": method_json(&lhs) }),
    ))
}

/// The same symbolic element over two mutually absolutely continuous measures
/// on the same atoms has the same norm.
pub fn check_measure_isomorphism(
    b: &SymbolicElement,
    space2: &MeasureSpace,
    p: Exponent,
) -> Result<CheckReport> {
    if space2.labels() != b.action().space().labels() {
        return Err(CheckError::AtomMismatch);
    }
    require_free(b.action())?;
    let other = b.with_space(Arc::new(space2.clone()))?;
    let lhs = direct_norm(b, p)?.value;
    let rhs = direct_norm(&other, p)?.value;
    Ok(equality_report(
        "measure_isomorphism",
        p,
        lhs,
        rhs,
        json!({ "weights_1": b.action().space().weights(), "weights_2": space2.weights() }),
    ))
}

/// Closed-form norm against the exact matrix norm: the `L^∞` formula at
/// `p = ∞` and the `L¹` formula at `p = 1`.
pub fn check_formula_agreement(b: &SymbolicElement, p: Exponent) -> Result<CheckReport> {
    let formula = if p.is_infinite() {
        formula_norm_linf(b)?
    } else if p.is(1.0) {
        formula_norm_l1(b)?
    } else {
        return Err(CheckError::UnsupportedExponent(p));
    };
    let exact = norm_exact(&assemble_direct(b, p)?)?;
    Ok(equality_report(
        "formula_agreement",
        p,
        formula.value,
        exact.value,
        json!({ "formula": method_json(&formula), "witness_atom": formula.witness_atom }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteGroup;

    fn rotation3() -> Arc<GroupAction> {
        let space = Arc::new(MeasureSpace::from_weights(&[0.5, 0.25, 0.25]).unwrap());
        let perms = (0..3).map(|g| (0..3).map(|x| (x + g) % 3).collect()).collect();
        Arc::new(GroupAction::new(Arc::new(FiniteGroup::cyclic(3)), space, perms).unwrap())
    }

    fn trivial_z2(atoms: usize) -> Arc<GroupAction> {
        let space = Arc::new(MeasureSpace::uniform(atoms).unwrap());
        let id: Vec<usize> = (0..atoms).collect();
        Arc::new(GroupAction::new(Arc::new(FiniteGroup::cyclic(2)), space, vec![id.clone(), id]).unwrap())
    }

    fn swap_two_fix_one() -> Arc<GroupAction> {
        let space = Arc::new(MeasureSpace::new([("a", 0.2), ("b", 0.3), ("c", 0.5)]).unwrap());
        Arc::new(
            GroupAction::new(
                Arc::new(FiniteGroup::cyclic(2)),
                space,
                vec![vec![0, 1, 2], vec![1, 0, 2]],
            )
            .unwrap(),
        )
    }

    fn e_minus_g(action: &Arc<GroupAction>) -> SymbolicElement {
        let n = action.space().len();
        let sp = action.space().clone();
        SymbolicElement::new(
            action.clone(),
            1,
            [
                (0, Coefficient::scalar(sp.clone(), &vec![1.0; n]).unwrap()),
                (1, Coefficient::scalar(sp, &vec![-1.0; n]).unwrap()),
            ],
        )
        .unwrap()
    }

    fn running(action: &Arc<GroupAction>) -> SymbolicElement {
        let sp = action.space().clone();
        SymbolicElement::new(
            action.clone(),
            1,
            [
                (0, Coefficient::scalar(sp.clone(), &[1.0, 2.0, 3.0]).unwrap()),
                (1, Coefficient::scalar(sp, &[1.0, 1.0, 1.0]).unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn property_star_examples() {
        let r = check_property_star(&e_minus_g(&trivial_z2(1)), Exponent::INF).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (0.0, 1.0, false));

        let r = check_property_star(&e_minus_g(&rotation3()), Exponent::INF).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (2.0, 1.0, true));

        let act = rotation3();
        let a = Coefficient::scalar(act.space().clone(), &[1.0, -4.0, 2.0]).unwrap();
        let b = SymbolicElement::new(act, 1, [(0, a)]).unwrap();
        let r = check_property_star(&b, Exponent::Finite(3.0)).unwrap();
        assert!(r.passed);
        assert!((r.lhs - r.rhs).abs() < 1e-9);
    }

    #[test]
    fn failure_search_examples() {
        let r = check_property_star_failure_search(&trivial_z2(3), 1, Exponent::INF, 8, 1).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 1.0);
        assert_eq!(
            check_property_star_failure_search(&rotation3(), 1, Exponent::INF, 8, 1).unwrap_err(),
            CheckError::ActionIsFree
        );
        let r = check_property_star_failure_search(&swap_two_fix_one(), 1, Exponent::ONE, 8, 1).unwrap();
        assert!(r.passed);
        assert_eq!(r.details["best_candidate"]["atom"], 2);
    }

    #[test]
    fn double_star_examples() {
        let act = rotation3();
        let r = check_property_double_star(&SymbolicElement::zero(act.clone(), 1), Exponent::INF).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs, 0.0);
        let r = check_property_double_star(&e_minus_g(&act), Exponent::INF).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs, 2.0);
        let tiny = Coefficient::scalar(act.space().clone(), &[1e-15, 0.0, 0.0]).unwrap();
        let b = SymbolicElement::new(act.clone(), 1, [(1, tiny)]).unwrap();
        for p in [Exponent::ONE, Exponent::INF, Exponent::Finite(3.0)] {
            let r = check_property_double_star(&b, p).unwrap();
            assert!(r.passed, "{p}");
            assert!((r.lhs - 1e-15).abs() < 1e-25);
            assert_eq!(r.details["coefficient_scale"], 1e-15);
        }
        assert!(matches!(
            check_property_double_star(&e_minus_g(&trivial_z2(2)), Exponent::INF),
            Err(CheckError::ActionNotFree { .. })
        ));
    }

    #[test]
    fn character_symmetry_examples() {
        let b = running(&rotation3());
        let r = check_character_symmetry(&b, Exponent::INF).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs, 4.0);
        assert_eq!(r.rhs, 4.0);
        assert!(check_character_symmetry(&b, Exponent::TWO).unwrap().passed);

        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let perms = GroupAction::coset_action(s3.clone(), &[0]);
        let act = Arc::new(GroupAction::new(s3, Arc::new(MeasureSpace::uniform(6).unwrap()), perms).unwrap());
        let b = SymbolicElement::translation(act, 1, 1).unwrap();
        assert_eq!(
            check_character_symmetry(&b, Exponent::INF).unwrap_err(),
            CheckError::NonAbelianGroup
        );
    }

    #[test]
    fn regular_isomorphism_examples() {
        let act = rotation3();
        let e = SymbolicElement::translation(act.clone(), 1, 0).unwrap();
        let r = check_regular_isomorphism(&e, Exponent::ONE).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (1.0, 1.0, true));
        let r = check_regular_isomorphism(&running(&act), Exponent::INF).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (4.0, 4.0, true));
        let r = check_regular_isomorphism(&e_minus_g(&trivial_z2(3)), Exponent::INF).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (0.0, 2.0, true));
        assert_eq!(r.details["mode"], "direct_le_regular");
    }

    #[test]
    fn trajectory_examples() {
        let act = rotation3();
        let e = SymbolicElement::translation(act.clone(), 1, 0).unwrap();
        let r = check_trajectory_norm(&e, Exponent::TWO).unwrap();
        assert!(r.passed);
        assert!((r.lhs - 1.0).abs() < 1e-12);
        let r = check_trajectory_norm(&running(&act), Exponent::INF).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 4.0));
        let a = Coefficient::scalar(act.space().clone(), &[1.0, -7.0, 2.0]).unwrap();
        let diag = SymbolicElement::new(act, 1, [(0, a)]).unwrap();
        let r = check_trajectory_norm(&diag, Exponent::ONE).unwrap();
        assert_eq!((r.lhs, r.rhs), (7.0, 7.0));
    }

    #[test]
    fn interpolation_examples() {
        let act = rotation3();
        let tg = SymbolicElement::translation(act.clone(), 1, 1).unwrap();
        for p in [Exponent::TWO, Exponent::Finite(3.0), Exponent::Finite(1.5)] {
            let r = check_interpolation(&tg, p).unwrap();
            assert!(r.passed);
            assert!((r.lhs - 1.0).abs() < 1e-8 && (r.rhs - 1.0).abs() < 1e-12);
        }
        let a = Coefficient::scalar(act.space().clone(), &[1.0, -7.0, 2.0]).unwrap();
        let diag = SymbolicElement::new(act.clone(), 1, [(0, a)]).unwrap();
        let r = check_interpolation(&diag, Exponent::TWO).unwrap();
        assert!((r.lhs - 7.0).abs() < 1e-12 && (r.rhs - 7.0).abs() < 1e-12);

        let r = check_interpolation(&running(&act), Exponent::TWO).unwrap();
        assert!(r.passed);
        assert!((r.rhs - 4.0).abs() < 1e-12);
        assert!(r.lhs <= 4.0);
        assert!(check_interpolation(&running(&act), Exponent::INF).is_err());
    }

    #[test]
    fn measure_isomorphism_examples() {
        let act = rotation3();
        let b = running(&act);
        let same = check_measure_isomorphism(&b, act.space(), Exponent::TWO).unwrap();
        assert!(same.passed);
        let scaled_space = act.space().scaled(7.0).unwrap();
        assert!(check_measure_isomorphism(&b, &scaled_space, Exponent::Finite(3.0)).unwrap().passed);
        let uniform = act.space().reweighted(&[1.0 / 3.0; 3]).unwrap();
        let r = check_measure_isomorphism(&b, &uniform, Exponent::ONE).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs, 4.0);
        assert_eq!(r.rhs, formula_norm_l1(&b).unwrap().value);
        let other = MeasureSpace::new([("p", 1.0), ("q", 1.0), ("r", 1.0)]).unwrap();
        assert_eq!(
            check_measure_isomorphism(&b, &other, Exponent::ONE).unwrap_err(),
            CheckError::AtomMismatch
        );
    }

    #[test]
    fn formula_agreement_on_running_example() {
        let b = running(&rotation3());
        let r = check_formula_agreement(&b, Exponent::INF).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (4.0, 4.0, true));
        let r = check_formula_agreement(&b, Exponent::ONE).unwrap();
        assert!(r.passed);
        assert!(check_formula_agreement(&b, Exponent::TWO).is_err());
    }
}
