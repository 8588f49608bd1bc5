//! Exponent thresholds for polygamy and monogamy of powered measures.
//!
//! With pair values mᵢ = M(ρ_{AB_i}) and global value G = M(ρ_{A|B₁…B_{n−1}}):
//!
//! * f(α) = Σᵢ mᵢ^α over entangled pairs, strictly decreasing when all mᵢ < 1;
//! * α₀ solves f(α₀) = 1 on (0, cap], where cap = 2 for concurrence and √2
//!   for entanglement of formation. Since G ≤ 1, Gᵅ ≤ 1 ≤ f(α) on [0, α₀];
//! * g(α) = f(α) − G^α, and α₁ is its leftmost zero on [α₀, cap];
//! * β₀ is found from the same equation as α₀ on the unassisted pair values,
//!   and certifies the assisted form because mᵢ ≤ m_a,ᵢ.
//!
//! Pairs at or below `ENTANGLED_TOL` are left out of every sum, so no 0⁰
//! convention is needed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    self, coa, concurrence_pure, wootters_margin, MeasureKind, MeasureVector, ENTANGLED_TOL,
};
use crate::roof::{self, RestartBudget};
use crate::states::{isotropic_mixture, PartitionSpec, PureState};

/// Bisection stops once the defining function is this close to zero.
pub const RESIDUAL_TARGET: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 200;
/// Grid step for the α₁ crossing scan.
pub const SCAN_STEP: f64 = 1e-3;
/// Slack used when checking inequalities pointwise.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdKind {
    #[serde(rename = "alpha0_c")]
    Alpha0C,
    #[serde(rename = "alpha0_e")]
    Alpha0E,
    #[serde(rename = "alpha1_c")]
    Alpha1C,
    #[serde(rename = "alpha1_e")]
    Alpha1E,
    #[serde(rename = "beta0")]
    Beta0,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub kind: ThresholdKind,
    pub threshold: f64,
    pub bracket: (f64, f64),
    /// |defining function| at the threshold.
    pub residual: f64,
    pub iterations: usize,
    /// α₀ clamped at the cap because f(cap) ≥ 1 (some pair equals 1).
    pub saturated: bool,
    /// Sign changes of g seen on the scan grid (α₁ only).
    pub sign_changes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    NoEntangledPair,
    OnePair,
    TwoOrMorePairs,
    AllPairs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseClassification {
    pub entangled_pairs: Vec<usize>,
    pub case: Case,
}

impl CaseClassification {
    /// At least two entangled pairs, which is what the threshold finders need.
    pub fn has_two_or_more(&self) -> bool {
        self.entangled_pairs.len() >= 2
    }
}

pub fn f_of_alpha(mv: &MeasureVector, alpha: f64) -> f64 {
    mv.entangled_pairs().map(|(_, p)| p.powf(alpha)).sum()
}

pub fn g_of_alpha(mv: &MeasureVector, alpha: f64) -> Result<f64> {
    if mv.global <= ENTANGLED_TOL {
        return Err(Error::DegenerateGlobal(mv.global));
    }
    Ok(f_of_alpha(mv, alpha) - mv.global.powf(alpha))
}

pub fn classify(mv: &MeasureVector) -> CaseClassification {
    let entangled_pairs: Vec<usize> = mv.entangled_pairs().map(|(i, _)| i).collect();
    let k = entangled_pairs.len();
    let case = match k {
        0 => Case::NoEntangledPair,
        1 => Case::OnePair,
        _ if k == mv.pairs.len() => Case::AllPairs,
        _ => Case::TwoOrMorePairs,
    };
    CaseClassification {
        entangled_pairs,
        case,
    }
}

fn require_two_pairs(mv: &MeasureVector) -> Result<()> {
    let entangled = mv.entangled_pairs().count();
    if entangled < 2 {
        return Err(Error::HypothesisNotMet { entangled });
    }
    Ok(())
}

struct Bisection {
    root: f64,
    bracket: (f64, f64),
    residual: f64,
    iterations: usize,
}

/// Bisection for a sign change of `h` with `h(lo) > 0 ≥ h(hi)`.
fn bisect_decreasing(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Bisection {
    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    let mut h_mid = h(mid);
    let h_hi = h(hi);
    if h_hi.abs() <= RESIDUAL_TARGET {
        return Bisection {
            root: hi,
            bracket: (lo, hi),
            residual: h_hi.abs(),
            iterations,
        };
    }
    while iterations < MAX_BISECTIONS {
        iterations += 1;
        mid = 0.5 * (lo + hi);
        h_mid = h(mid);
        if h_mid.abs() <= RESIDUAL_TARGET || mid <= lo || mid >= hi {
            break;
        }
        if h_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Bisection {
        root: mid,
        bracket: (lo, hi),
        residual: h_mid.abs(),
        iterations,
    }
}

fn alpha_kind(
    kind: MeasureKind,
    first: ThresholdKind,
    second: ThresholdKind,
) -> Result<ThresholdKind> {
    match kind {
        MeasureKind::Concurrence => Ok(first),
        MeasureKind::EoF => Ok(second),
        MeasureKind::ConcurrenceOfAssistance => Err(Error::UnsupportedMeasure(
            "exponent thresholds are defined for concurrence and EoF pair values",
        )),
    }
}

fn solve_unit_crossing(mv: &MeasureVector, kind: ThresholdKind) -> Result<ThresholdResult> {
    require_two_pairs(mv)?;
    if let Some(p) = mv.pairs.iter().find(|&&p| p > 1.0 + 1e-12) {
        return Err(Error::DomainError(format!("pair value {p} exceeds 1")));
    }
    let cap = mv.kind.exponent_cap();
    let h = |a: f64| f_of_alpha(mv, a) - 1.0;
    let h_cap = h(cap);
    if h_cap > RESIDUAL_TARGET {
        return Ok(ThresholdResult {
            kind,
            threshold: cap,
            bracket: (cap, cap),
            residual: h_cap,
            iterations: 0,
            saturated: true,
            sign_changes: None,
        });
    }
    let b = bisect_decreasing(h, 0.0, cap);
    Ok(ThresholdResult {
        kind,
        threshold: b.root,
        bracket: b.bracket,
        residual: b.residual,
        iterations: b.iterations,
        saturated: false,
        sign_changes: None,
    })
}

/// α₀ with f(α₀) = 1; polygamy of M^α holds on [0, α₀].
pub fn find_alpha0(mv: &MeasureVector) -> Result<ThresholdResult> {
    let kind = alpha_kind(mv.kind, ThresholdKind::Alpha0C, ThresholdKind::Alpha0E)?;
    solve_unit_crossing(mv, kind)
}

/// β₀ from the unassisted pair values. `assisted` must dominate them
/// pairwise (up to a 1e-6 slack for numerically estimated assisted values).
pub fn find_beta0(pairs: &MeasureVector, assisted: &MeasureVector) -> Result<ThresholdResult> {
    alpha_kind(pairs.kind, ThresholdKind::Beta0, ThresholdKind::Beta0)?;
    if pairs.pairs.len() != assisted.pairs.len() {
        return Err(Error::WrongDimension {
            expected: pairs.pairs.len(),
            got: assisted.pairs.len(),
        });
    }
    if let Some((m, a)) = pairs
        .pairs
        .iter()
        .zip(&assisted.pairs)
        .find(|(m, a)| **a < **m - 1e-6)
    {
        return Err(Error::InvariantViolation(format!(
            "assisted value {a} below unassisted value {m}"
        )));
    }
    solve_unit_crossing(pairs, ThresholdKind::Beta0)
}

/// Leftmost zero of g on [α₀, cap]: grid scan with `SCAN_STEP`, then bisection.
pub fn find_alpha1(mv: &MeasureVector) -> Result<ThresholdResult> {
    let kind = alpha_kind(mv.kind, ThresholdKind::Alpha1C, ThresholdKind::Alpha1E)?;
    let alpha0 = find_alpha0(mv)?;
    if mv.global <= ENTANGLED_TOL {
        return Err(Error::DegenerateGlobal(mv.global));
    }
    let cap = mv.kind.exponent_cap();
    let g = |a: f64| f_of_alpha(mv, a) - mv.global.powf(a);

    let lo = alpha0.threshold;
    let steps = ((cap - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| {
            if k == steps {
                cap
            } else {
                lo + k as f64 * SCAN_STEP
            }
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&a| g(a)).collect();

    let sign = |v: f64| -> i8 {
        if v.abs() <= RESIDUAL_TARGET {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    // A crossing is a grid point at zero or a strict +→− / −→+ transition.
    let mut sign_changes = 0;
    let mut first: Option<(usize, usize)> = None;
    let mut last_nonzero: Option<(usize, i8)> = None;
    for (k, &v) in values.iter().enumerate() {
        let s = sign(v);
        if s == 0 {
            sign_changes += 1;
            first.get_or_insert((k, k));
            last_nonzero = None;
            continue;
        }
        if let Some((kp, sp)) = last_nonzero {
            if sp != s {
                sign_changes += 1;
                first.get_or_insert((kp, k));
            }
        }
        last_nonzero = Some((k, s));
    }
    let (a, b) = first.ok_or(Error::NoSignChange { lo, hi: cap })?;
    let result = if a == b {
        Bisection {
            root: grid[a],
            bracket: (grid[a], grid[a]),
            residual: values[a].abs(),
            iterations: 0,
        }
    } else if values[a] > 0.0 {
        bisect_decreasing(g, grid[a], grid[b])
    } else {
        bisect_decreasing(|x| -g(x), grid[a], grid[b])
    };
    Ok(ThresholdResult {
        kind,
        threshold: result.root,
        bracket: result.bracket,
        residual: result.residual,
        iterations: result.iterations,
        saturated: false,
        sign_changes: Some(sign_changes),
    })
}

/// Exact W-mixture entanglement onset t* = (6√2 − 3)/7, root of 7t² + 6t − 9.
pub fn example1_onset() -> f64 {
    (6.0 * std::f64::consts::SQRT_2 - 3.0) / 7.0
}

/// α₀(t) = 1 / log₂(3 / (2t − √(9 − 6t − 3t²))) for the W mixture at weight t.
pub fn alpha0_closed_form_example1(t: f64) -> Result<f64> {
    if !(t > example1_onset() && t <= 1.0) {
        return Err(Error::DomainError(format!(
            "t = {t} outside (t*, 1] with t* = {:.6}",
            example1_onset()
        )));
    }
    let denom = 2.0 * t - (9.0 - 6.0 * t - 3.0 * t * t).max(0.0).sqrt();
    Ok(1.0 / (3.0 / denom).log2())
}

/// Smallest t in [0, 1] at which the (focus, first partner) marginal of
/// `(1 − t)/2ⁿ I + t|base⟩⟨base|` becomes entangled.
pub fn entanglement_threshold_t(base: &PureState, part: &PartitionSpec) -> Result<f64> {
    let pair = [part.focus(), part.partners()[0]];
    let margin = |t: f64| -> Result<f64> {
        wootters_margin(&isotropic_mixture(t, base)?.partial_trace(&pair)?)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if margin(lo)? > 0.0 || margin(hi)? <= 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if margin(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Inequality checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// G^α ≥ Σ mᵢ^α
    MonogamyGe,
    /// G^α ≤ Σ mᵢ^α
    PolygamyLe,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    pub alpha: f64,
    pub global_pow: f64,
    pub pair_sum: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub relation: Relation,
    pub case: Case,
    pub points: Vec<RegionPoint>,
    pub all_hold: bool,
}

/// Pointwise check of `relation` with slack `INEQUALITY_SLACK`.
///
/// With a single entangled pair the comparison is against that pair alone:
/// G^α ≥ m^α for α ≥ 0 and G^α ≤ m^α for α ≤ 0. With no entangled pair the
/// sum is empty and only G^α ≥ 0 is meaningful.
pub fn verify_region(mv: &MeasureVector, alphas: &[f64], relation: Relation) -> RegionReport {
    let case = classify(mv).case;
    let points: Vec<RegionPoint> = alphas
        .iter()
        .map(|&alpha| {
            let global_pow = mv.global.powf(alpha);
            let pair_sum = f_of_alpha(mv, alpha);
            let holds = match relation {
                Relation::MonogamyGe => global_pow >= pair_sum - INEQUALITY_SLACK,
                Relation::PolygamyLe => global_pow <= pair_sum + INEQUALITY_SLACK,
            };
            RegionPoint {
                alpha,
                global_pow,
                pair_sum,
                holds,
            }
        })
        .collect();
    let all_hold = points.iter().all(|p| p.holds);
    RegionReport {
        relation,
        case,
        points,
        all_hold,
    }
}

/// `n` evenly spaced points on [lo, hi], both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoaPolygamyReport {
    pub global_sq: f64,
    pub assisted_sq_sum: f64,
    pub squared_holds: bool,
    pub beta0: Option<f64>,
    /// Points of C^β ≤ Σ C_a^β checked on [0, β₀]; empty without β₀.
    pub beta_points: Vec<RegionPoint>,
    pub beta_holds: bool,
    pub all_hold: bool,
}

/// C²(ψ_{A|B…}) ≤ Σ C_a²(ρ_{AB_i}), plus C^β ≤ Σ C_a^β on a 20-point grid
/// over [0, β₀] when β₀ exists.
pub fn verify_coa_polygamy(state: &PureState, part: &PartitionSpec) -> Result<CoaPolygamyReport> {
    let global = concurrence_pure(state, part)?;
    let mut pairs_c = Vec::new();
    let mut pairs_a = Vec::new();
    for &b in part.partners() {
        let rho = state.reduced(&[part.focus(), b])?;
        pairs_c.push(measures::concurrence_mixed(&rho)?);
        pairs_a.push(coa(&rho)?);
    }
    let assisted_sq_sum: f64 = pairs_a.iter().map(|a| a * a).sum();
    let global_sq = global * global;
    let squared_holds = global_sq <= assisted_sq_sum + INEQUALITY_SLACK;

    let c_mv = MeasureVector::new(MeasureKind::Concurrence, global, pairs_c)?;
    let a_mv = MeasureVector::new(MeasureKind::ConcurrenceOfAssistance, global, pairs_a)?;
    let (beta0, beta_points) = match find_beta0(&c_mv, &a_mv) {
        Ok(t) => {
            let pts = linspace(0.0, t.threshold, 20)
                .into_iter()
                .map(|beta| {
                    let global_pow = global.powf(beta);
                    let pair_sum = f_of_alpha(&a_mv, beta);
                    RegionPoint {
                        alpha: beta,
                        global_pow,
                        pair_sum,
                        holds: global_pow <= pair_sum + INEQUALITY_SLACK,
                    }
                })
                .collect();
            (Some(t.threshold), pts)
        }
        Err(Error::HypothesisNotMet { .. }) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    let beta_holds = beta_points.iter().all(|p| p.holds);
    Ok(CoaPolygamyReport {
        global_sq,
        assisted_sq_sum,
        squared_holds,
        beta0,
        beta_points,
        beta_holds,
        all_hold: squared_holds && beta_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedComparison {
    pub beta: f64,
    /// E^β(ψ_{A|B…}), equal to E_a^β for a pure state.
    pub lhs: f64,
    /// Lower bounds on E_a(ρ_{AB_i}) from the roof maximizer.
    pub assisted: Vec<f64>,
    /// Σ E_a^β
    pub unweighted_rhs: f64,
    /// Σ βⁱ E_a^β with i counted from 1.
    pub weighted_rhs: f64,
    pub unweighted_holds: bool,
    pub weighted_holds: bool,
    /// E_a(ρ_{AB_i}) ≤ Σ_{j>i} E_a(ρ_{AB_j}) for i = 1..n−2.
    pub ordering_condition_met: bool,
    /// The weighted inequality is established only for β ∈ [0, 1] under the
    /// ordering condition.
    pub weighted_applicable: bool,
    /// β⁽ⁱ⁾ < 1, so the weights shrink the right-hand side.
    pub weights_shrink_rhs: bool,
}

/// Compares E_a^β(ψ) ≤ Σ E_a^β(ρ_{AB_i}) against the Hamming-weighted bound
/// Σ βⁱ E_a^β(ρ_{AB_i}) at a given β.
pub fn compare_weighted_polygamy(
    state: &PureState,
    part: &PartitionSpec,
    beta: f64,
    budget: &RestartBudget,
) -> Result<WeightedComparison> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::BadParameter(format!("beta = {beta}")));
    }
    let lhs = measures::eof_pure(state, part)?.powf(beta);
    let assisted = part
        .partners()
        .iter()
        .map(|&b| roof::eoa(&state.reduced(&[part.focus(), b])?, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_comparison(beta, lhs, assisted))
}

/// The arithmetic of [`compare_weighted_polygamy`] on given E_a values.
pub fn weighted_comparison(beta: f64, lhs: f64, assisted: Vec<f64>) -> WeightedComparison {
    let pow = |x: f64| if x > ENTANGLED_TOL { x.powf(beta) } else { 0.0 };
    let unweighted_rhs: f64 = assisted.iter().map(|&x| pow(x)).sum();
    let weighted_rhs: f64 = assisted
        .iter()
        .enumerate()
        .map(|(i, &x)| beta.powi(i as i32 + 1) * pow(x))
        .sum();
    let n = assisted.len();
    let ordering_condition_met = (0..n.saturating_sub(1))
        .all(|i| assisted[i] <= assisted[i + 1..].iter().sum::<f64>() + 1e-6);
    WeightedComparison {
        beta,
        lhs,
        unweighted_rhs,
        weighted_rhs,
        unweighted_holds: lhs <= unweighted_rhs + INEQUALITY_SLACK,
        weighted_holds: lhs <= weighted_rhs + INEQUALITY_SLACK,
        ordering_condition_met,
        weighted_applicable: (0.0..=1.0).contains(&beta) && ordering_condition_met,
        weights_shrink_rhs: beta < 1.0,
        assisted,
    }
}
