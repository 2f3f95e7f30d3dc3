//! Operator p-norms of assembled matrices, plus the closed-form norms of
//! `Σ a_g T_g` on `L^∞` and `L¹` for metrically free actions.
//!
//! Matrices act on coordinates carrying the plain p-norm, so:
//! - `p = 1`: max absolute column sum (exact);
//! - `p = ∞`: max absolute row sum (exact);
//! - `p = 2`: largest singular value;
//! - other `p`: restarted nonlinear power iteration with the dual-norm
//!   update, which only ever certifies a lower bound.
//!
//! The sampling oracle [`norm_brute_force`] shares no code with the power
//! iteration and exists to cross-check it.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::SymbolicElement;
use crate::assembly::AssembledOperator;
use crate::par::Execution;
use crate::{Complex64, Exponent};

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_ITERS: usize = 5000;
pub const BRUTE_FORCE_MAX_DIM: usize = 64;
const SIGN_PATTERN_MAX_DIM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactRowsum,
    ExactColsum,
    Svd,
    PowerIteration,
    FormulaLinf,
    FormulaL1,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    Exact,
    UpperAndLowerAgree,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub method: Method,
    pub guarantee: Guarantee,
    pub iterations: usize,
    pub restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_atom: Option<usize>,
}

impl NormResult {
    fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            method,
            guarantee: Guarantee::Exact,
            iterations: 0,
            restarts: 0,
            witness_atom: None,
        }
    }

    /// Whether the value is certified from above as well as below.
    pub fn is_upper_bound(&self) -> bool {
        self.guarantee != Guarantee::LowerBound
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("exponent {0} not supported by this method")]
    UnsupportedExponent(Exponent),
    #[error("power iteration did not settle within the iteration budget (best {:.6e})", best.value)]
    NoConvergence { best: NormResult },
    #[error("operator of size {size} exceeds the brute-force bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("closed-form norm requires a metrically free action (g = {g} fixes atom {x})")]
    ActionNotFree { g: usize, x: usize },
}

impl NormError {
    /// For `NoConvergence`, the best value found is still a valid lower bound.
    pub fn into_best(self) -> std::result::Result<NormResult, NormError> {
        match self {
            NormError::NoConvergence { best } => Ok(best),
            e => Err(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, NormError>;

fn max_row_sum(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_col_sum(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Exact norms at `p ∈ {1, ∞}`.
pub fn norm_exact(op: &AssembledOperator) -> Result<NormResult> {
    match op.p() {
        Exponent::Infinity => Ok(NormResult::exact(max_row_sum(op.matrix()), Method::ExactRowsum)),
        p if p.is(1.0) => Ok(NormResult::exact(max_col_sum(op.matrix()), Method::ExactColsum)),
        p => Err(NormError::UnsupportedExponent(p)),
    }
}

/// `‖M‖_{1→1}^{1/p}·‖M‖_{∞→∞}^{1-1/p}`, a certified upper bound for every p.
pub fn interpolation_upper_bound(m: &DMatrix<Complex64>, p: Exponent) -> f64 {
    let t = p.reciprocal();
    max_col_sum(m).powf(t) * max_row_sum(m).powf(1.0 - t)
}

/// Operator p-norm by the best available method.
///
/// `p ∈ {1, ∞}` delegate to [`norm_exact`], `p = 2` uses the SVD, and every
/// other `p` runs the restarted power iteration, reported as a lower bound.
pub fn norm_p(op: &AssembledOperator, restarts: usize, tol: f64, max_iters: usize) -> Result<NormResult> {
    norm_p_with(op, restarts, tol, max_iters, Execution::default())
}

pub fn norm_p_with(
    op: &AssembledOperator,
    restarts: usize,
    tol: f64,
    max_iters: usize,
    exec: Execution,
) -> Result<NormResult> {
    let p = op.p();
    if p.is_infinite() || p.is(1.0) {
        return norm_exact(op);
    }
    if p.is(2.0) {
        return Ok(NormResult {
            guarantee: Guarantee::UpperAndLowerAgree,
            ..NormResult::exact(spectral_norm(op.matrix()), Method::Svd)
        });
    }
    let p = p.value().ok_or(NormError::UnsupportedExponent(p))?;
    let restarts = restarts.max(1);

    // A p-norm of a block-diagonal matrix is the max over its blocks, and
    // iterating per block avoids local maxima that straddle blocks.
    let blocks = connected_blocks(op.matrix());
    let runs: Vec<(PowerRun, bool)> = exec.map(&blocks, |idx| {
        let sub = op.matrix().select_rows(idx).select_columns(idx);
        power_iteration(&sub, p, restarts, tol, max_iters)
    });
    let mut best = 0.0f64;
    let mut iterations = 0;
    let mut converged = true;
    for (run, ok) in runs {
        best = best.max(run.value);
        iterations += run.iterations;
        converged &= ok;
    }
    let result = NormResult {
        value: best,
        method: Method::PowerIteration,
        guarantee: Guarantee::LowerBound,
        iterations,
        restarts,
        witness_atom: None,
    };
    if converged {
        Ok(result)
    } else {
        Err(NormError::NoConvergence { best: result })
    }
}

/// Index sets of the connected components of the sparsity graph of `m`
/// (`i ~ j` when `m[i,j] ≠ 0` or `m[j,i] ≠ 0`), each sorted ascending.
pub fn connected_blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != Complex64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

struct PowerRun {
    value: f64,
    iterations: usize,
}

/// `w_i = sgn(v_i)|v_i|^{r-1} / ‖v‖_r^{r-1}`, so `‖w‖_{r'} = 1` and `⟨w, v⟩ = ‖v‖_r`.
fn dual_vector(v: &DVector<Complex64>, r: f64) -> DVector<Complex64> {
    let norm = Exponent::Finite(r).complex_norm(v.as_slice());
    if norm == 0.0 {
        return DVector::zeros(v.len());
    }
    v.map(|z| {
        let a = z.norm();
        if a == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (z / a) * (a / norm).powf(r - 1.0)
        }
    })
}

fn p_normalize(v: DVector<Complex64>, p: f64) -> DVector<Complex64> {
    let n = Exponent::Finite(p).complex_norm(v.as_slice());
    if n == 0.0 {
        v
    } else {
        v / Complex64::new(n, 0.0)
    }
}

/// Restarted power iteration for `max ‖Mx‖_p / ‖x‖_p`; returns the best value
/// and whether every restart settled within `max_iters`.
fn power_iteration(m: &DMatrix<Complex64>, p: f64, restarts: usize, tol: f64, max_iters: usize) -> (PowerRun, bool) {
    let n = m.ncols();
    if n == 0 {
        return (PowerRun { value: 0.0, iterations: 0 }, true);
    }
    let q = p / (p - 1.0);
    let adjoint = m.adjoint();
    let norm_p = |v: &DVector<Complex64>| Exponent::Finite(p).complex_norm(v.as_slice());

    let mut best = 0.0f64;
    let mut total_iters = 0;
    let mut all_converged = true;
    for r in 0..restarts {
        let start = start_vector(m, r, p);
        let mut x = p_normalize(start, p);
        if norm_p(&x) == 0.0 {
            continue;
        }
        let mut gamma = 0.0f64;
        let mut converged = false;
        for _ in 0..max_iters {
            total_iters += 1;
            let y = m * &x;
            let g = norm_p(&y);
            best = best.max(g);
            if g == 0.0 {
                converged = true;
                break;
            }
            let z = &adjoint * dual_vector(&y, p);
            let zq = Exponent::Finite(q).complex_norm(z.as_slice());
            let zx = z.dotc(&x).re;
            let stalled = (g - gamma).abs() <= tol * g.max(1e-300);
            gamma = g;
            if zq <= zx * (1.0 + tol) || stalled {
                converged = true;
                break;
            }
            x = dual_vector(&z, q);
        }
        all_converged &= converged;
    }
    (PowerRun { value: best, iterations: total_iters }, all_converged)
}

/// Deterministic starting vectors: all ones, the column of largest p-norm,
/// then seeded random complex vectors.
fn start_vector(m: &DMatrix<Complex64>, restart: usize, p: f64) -> DVector<Complex64> {
    let n = m.ncols();
    match restart {
        0 => DVector::from_element(n, Complex64::new(1.0, 0.0)),
        1 => {
            let j = (0..n)
                .max_by(|&a, &b| {
                    let na = Exponent::Finite(p).complex_norm(m.column(a).as_slice());
                    let nb = Exponent::Finite(p).complex_norm(m.column(b).as_slice());
                    na.total_cmp(&nb).then(b.cmp(&a))
                })
                .unwrap_or(0);
            DVector::from_fn(n, |i, _| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
        }
        r => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + r as u64);
            DVector::from_fn(n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
        }
    }
}

/// Sampling oracle: random complex unit vectors, enumerable extreme points of
/// the unit ball (basis vectors for `p = 1`, real sign patterns for `p = ∞`
/// up to 12 coordinates), then a shrinking random-perturbation climb from the
/// best sample using the second half of the budget.
pub fn norm_brute_force(op: &AssembledOperator, samples: usize, seed: u64) -> Result<NormResult> {
    let m = op.matrix();
    let n = m.ncols();
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(NormError::TooLarge {
            size: n,
            bound: BRUTE_FORCE_MAX_DIM,
        });
    }
    let p = op.p();
    let ratio = |v: &DVector<Complex64>| {
        let d = p.complex_norm(v.as_slice());
        if d == 0.0 {
            0.0
        } else {
            p.complex_norm((m * v).as_slice()) / d
        }
    };
    let mut best = 0.0f64;
    let mut best_vec = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let consider = |v: DVector<Complex64>, best: &mut f64, best_vec: &mut DVector<Complex64>| {
        let r = ratio(&v);
        if r > *best {
            *best = r;
            *best_vec = v;
        }
    };

    for j in 0..n {
        let e = DVector::from_fn(n, |i, _| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        consider(e, &mut best, &mut best_vec);
    }
    if p.is_infinite() && n <= SIGN_PATTERN_MAX_DIM && n > 0 {
        // first coordinate fixed to +1: ±v give the same ratio
        for mask in 0u32..(1 << (n - 1)) {
            let v = DVector::from_fn(n, |i, _| {
                let neg = i > 0 && mask >> (i - 1) & 1 == 1;
                Complex64::new(if neg { -1.0 } else { 1.0 }, 0.0)
            });
            consider(v, &mut best, &mut best_vec);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_budget = samples - samples / 2;
    for _ in 0..random_budget {
        let v = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        consider(v, &mut best, &mut best_vec);
    }

    let climb_budget = samples / 2;
    let mut radius = 0.5;
    let scale = p.complex_norm(best_vec.as_slice()).max(1e-300);
    let mut current = best_vec.map(|z| z / scale);
    let mut since_improvement = 0;
    for _ in 0..climb_budget {
        let trial = DVector::from_fn(n, |i, _| {
            current[i]
                + Complex64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius))
        });
        let r = ratio(&trial);
        if r > best {
            best = r;
            let s = p.complex_norm(trial.as_slice()).max(1e-300);
            current = trial.map(|z| z / s);
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement > 40 {
                radius *= 0.7;
                since_improvement = 0;
                if radius < 1e-9 {
                    radius = 0.5;
                }
            }
        }
    }

    Ok(NormResult {
        value: best,
        method: Method::BruteForce,
        guarantee: Guarantee::LowerBound,
        iterations: samples,
        restarts: 0,
        witness_atom: None,
    })
}

fn require_free(b: &SymbolicElement) -> Result<()> {
    let verdict = b.action().check_metrically_free();
    match verdict.witness {
        Some((g, x)) => Err(NormError::ActionNotFree { g, x }),
        None => Ok(()),
    }
}

/// Max over atoms, ties broken by the lowest atom index.
fn max_over_atoms(n: usize, f: impl Fn(usize) -> f64) -> (f64, Option<usize>) {
    let mut best = (0.0, None);
    for x in 0..n {
        let v = f(x);
        if best.1.is_none() || v > best.0 {
            best = (v, Some(x));
        }
    }
    best
}

/// `‖Σ a_g T_g‖` on `L^∞_μ(Ω, ℓ^∞_d)`: the esssup over atoms of the norm of
/// the concatenated block `[a_{g_1}(x) | … | a_{g_k}(x)]` from the max-norm
/// product ball, i.e. its max absolute row sum. For `d = 1` this is
/// `max_x Σ_g |a_g(x)|`.
pub fn formula_norm_linf(b: &SymbolicElement) -> Result<NormResult> {
    require_free(b)?;
    let n = b.action().space().len();
    let d = b.dim();
    let (value, witness) = max_over_atoms(n, |x| {
        (0..d)
            .map(|i| {
                b.terms()
                    .values()
                    .map(|a| a.block(x).row(i).iter().map(|z| z.norm()).sum::<f64>())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    });
    Ok(NormResult {
        witness_atom: witness,
        ..NormResult::exact(value, Method::FormulaLinf)
    })
}

/// `‖Σ a_g T_g‖` on `L¹_μ(Ω, ℓ¹_d)`: the esssup over atoms of the max absolute
/// row sum of `[a_{g_1}(α_{g_1}(x))* | … ]`. For `d = 1` this is
/// `max_x Σ_g |a_g(α_g(x))|`, independent of the weights.
pub fn formula_norm_l1(b: &SymbolicElement) -> Result<NormResult> {
    require_free(b)?;
    let action = b.action();
    let n = action.space().len();
    let d = b.dim();
    let (value, witness) = max_over_atoms(n, |x| {
        // row i of a* is column i of a
        (0..d)
            .map(|i| {
                b.terms()
                    .iter()
                    .map(|(&g, a)| {
                        a.block(action.forward(g, x))
                            .column(i)
                            .iter()
                            .map(|z| z.norm())
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    });
    Ok(NormResult {
        witness_atom: witness,
        ..NormResult::exact(value, Method::FormulaL1)
    })
}

/// Norm at the operator's exponent along the tolerance ladder: exact at
/// `p ∈ {1, ∞}`, SVD at 2, power iteration (lower bound) otherwise.
pub fn ladder_norm(op: &AssembledOperator) -> NormResult {
    match norm_p(op, DEFAULT_RESTARTS, DEFAULT_TOL, DEFAULT_MAX_ITERS) {
        Ok(r) => r,
        Err(e) => e.into_best().expect("only non-convergence can fail here"),
    }
}

/// Equality tolerance matched to how a norm was obtained: 1e-9 exact,
/// 1e-6 with an SVD, 1e-4 with power iteration.
pub fn ladder_tolerance(p: Exponent) -> f64 {
    if p.is_infinite() || p.is(1.0) {
        1e-9
    } else if p.is(2.0) {
        1e-6
    } else {
        1e-4
    }
}
