//! Seeded ensemble checks of the polygamy and monogamy relations.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use polygamy::exponents::{
    f_of_alpha, find_alpha0, find_alpha1, g_of_alpha, linspace, verify_coa_polygamy, verify_region,
    Relation,
};
use polygamy::measures::{coa, concurrence_mixed, measure_vector, MeasureKind, MeasureVector};
use polygamy::roof::{roof_optimize, Direction, RestartBudget, RoofMeasure};
use polygamy::states::{derive_seed, haar_random_pure, random_rank2_two_qubit, PartitionSpec};
use polygamy::Result;

const MAX_REPORTED_FAILURES: usize = 10;
const ORACLE_STREAM: u64 = 2;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub three_qubit: usize,
    pub four_qubit: usize,
    pub oracle: bool,
    /// Rank-2 two-qubit states for the oracle suite.
    pub oracle_states: usize,
    pub slack: f64,
    pub unit_tol: f64,
    pub oracle_tol: f64,
    pub order_tol: f64,
    pub grid_points: usize,
}

impl VerifyConfig {
    pub fn new(seed: u64, ensemble: usize) -> Self {
        Self {
            seed,
            three_qubit: ensemble,
            four_qubit: 2 * ensemble / 5,
            oracle: false,
            oracle_states: ensemble,
            slack: 1e-9,
            unit_tol: 1e-10,
            oracle_tol: 2e-3,
            order_tol: 1e-6,
            grid_points: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub state: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteSummary {
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub three_qubit_states: usize,
    pub four_qubit_states: usize,
    /// Haar draws skipped for having fewer than two entangled pairs.
    pub rejected_draws: usize,
    pub oracle_states: usize,
    pub suites: BTreeMap<String, SuiteSummary>,
    pub checked: usize,
    pub passed: usize,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteSummary> {
        self.suites.get(name)
    }
}

struct Check {
    suite: String,
    ok: bool,
    detail: String,
}

fn check(suite: impl Into<String>, ok: bool, detail: impl FnOnce() -> String) -> Check {
    Check {
        suite: suite.into(),
        ok,
        detail: if ok { String::new() } else { detail() },
    }
}

struct Sample {
    label: String,
    state: polygamy::states::PureState,
    part: PartitionSpec,
    concurrence: MeasureVector,
    eof: MeasureVector,
}

fn draw_ensemble(seed: u64, n_qubits: usize, count: usize) -> Result<(Vec<Sample>, usize)> {
    let stream = derive_seed(seed, n_qubits as u64);
    let part = PartitionSpec::with_focus(n_qubits, 0)?;
    let mut out = Vec::with_capacity(count);
    let mut draw = 0u64;
    let mut rejected = 0;
    while out.len() < count {
        let state = haar_random_pure(n_qubits, derive_seed(stream, draw))?;
        let c = measure_vector(&state.clone().into(), &part, MeasureKind::Concurrence, None)?;
        let e = measure_vector(&state.clone().into(), &part, MeasureKind::EoF, None)?;
        if c.entangled_pairs().count() >= 2 && e.entangled_pairs().count() >= 2 {
            out.push(Sample {
                label: format!("{n_qubits}q#{draw}"),
                state,
                part: part.clone(),
                concurrence: c,
                eof: e,
            });
        } else {
            rejected += 1;
        }
        draw += 1;
    }
    Ok((out, rejected))
}

fn relation_checks(s: &Sample, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for mv in [&s.concurrence, &s.eof] {
        let name = mv.kind.name();
        let cap = mv.kind.exponent_cap();
        let a0 = find_alpha0(mv)?;
        let alpha0 = a0.threshold;
        let f0 = f_of_alpha(mv, alpha0);
        checks.push(check(
            format!("alpha0_unit_crossing/{name}"),
            alpha0 > 0.0 && alpha0 <= cap && (a0.saturated || (f0 - 1.0).abs() <= cfg.unit_tol),
            || format!("alpha0 = {alpha0}, f(alpha0) - 1 = {:e}", f0 - 1.0),
        ));

        let below = linspace(0.0, alpha0, cfg.grid_points);
        let above = linspace(alpha0, cap, cfg.grid_points);
        let sandwich_bad = below
            .iter()
            .find(|&&a| f_of_alpha(mv, a) < 1.0 - cfg.unit_tol)
            .or_else(|| {
                above
                    .iter()
                    .find(|&&a| f_of_alpha(mv, a) > 1.0 + cfg.unit_tol)
            });
        checks.push(check(
            format!("f_sandwich/{name}"),
            sandwich_bad.is_none(),
            || {
                let a = *sandwich_bad.unwrap();
                format!("f({a}) = {}", f_of_alpha(mv, a))
            },
        ));

        let dense = linspace(0.0, cap, 200);
        let rising = dense
            .windows(2)
            .find(|w| f_of_alpha(mv, w[1]) > f_of_alpha(mv, w[0]) + 1e-15);
        checks.push(check(
            format!("f_monotone/{name}"),
            rising.is_none(),
            || {
                format!(
                    "f rises on [{}, {}]",
                    rising.unwrap()[0],
                    rising.unwrap()[1]
                )
            },
        ));

        let poly = verify_region(mv, &below, Relation::PolygamyLe);
        checks.push(check(
            format!("polygamy_below_alpha0/{name}"),
            poly.all_hold,
            || {
                let p = poly.points.iter().find(|p| !p.holds).unwrap();
                format!(
                    "alpha {}: global^a {} > sum {}",
                    p.alpha, p.global_pow, p.pair_sum
                )
            },
        ));

        let mono_hi = if mv.kind == MeasureKind::EoF {
            SQRT_2 + 2.0
        } else {
            4.0
        };
        let mono = verify_region(
            mv,
            &linspace(cap, mono_hi, cfg.grid_points),
            Relation::MonogamyGe,
        );
        checks.push(check(
            format!("monogamy_above_cap/{name}"),
            mono.all_hold,
            || {
                let p = mono.points.iter().find(|p| !p.holds).unwrap();
                format!(
                    "alpha {}: global^a {} < sum {}",
                    p.alpha, p.global_pow, p.pair_sum
                )
            },
        ));

        let reversal = [-2.0, -1.0, -0.5]
            .into_iter()
            .find(|&a| mv.global.powf(a) + cfg.slack >= f_of_alpha(mv, a));
        checks.push(check(
            format!("negative_exponent/{name}"),
            reversal.is_none(),
            || {
                let a = reversal.unwrap();
                format!(
                    "alpha {a}: global^a {} vs sum {}",
                    mv.global.powf(a),
                    f_of_alpha(mv, a)
                )
            },
        ));

        let a1 = find_alpha1(mv);
        let (ok, detail) = match &a1 {
            Ok(r) => {
                let g = g_of_alpha(mv, r.threshold)?;
                (
                    alpha0 <= r.threshold && r.threshold <= cap && g.abs() <= 1e-8,
                    format!("alpha1 = {}, alpha0 = {alpha0}, g = {g:e}", r.threshold),
                )
            }
            Err(e) => (false, e.to_string()),
        };
        checks.push(check(format!("alpha1_bracket/{name}"), ok, || detail));
    }

    let coa_report = verify_coa_polygamy(&s.state, &s.part)?;
    checks.push(check("coa_polygamy", coa_report.all_hold, || {
        format!(
            "C^2 = {}, sum Ca^2 = {}, beta0 = {:?}, beta grid ok = {}",
            coa_report.global_sq,
            coa_report.assisted_sq_sum,
            coa_report.beta0,
            coa_report.beta_holds
        )
    }));
    Ok(checks)
}

fn oracle_checks(index: usize, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let rho = random_rank2_two_qubit(derive_seed(
        derive_seed(cfg.seed, ORACLE_STREAM),
        index as u64,
    ))?;
    let part = PartitionSpec::with_focus(2, 0)?;
    let budget = RestartBudget::default();
    let c = concurrence_mixed(&rho)?;
    let ca = coa(&rho)?;
    let lo = roof_optimize(
        &rho,
        &part,
        RoofMeasure::Concurrence,
        Direction::Min,
        &budget,
    )?
    .value;
    let hi = roof_optimize(
        &rho,
        &part,
        RoofMeasure::Concurrence,
        Direction::Max,
        &budget,
    )?
    .value;
    let tol = cfg.order_tol;
    Ok(vec![
        check(
            "oracle_min_vs_wootters",
            (lo - c).abs() <= cfg.oracle_tol,
            || format!("roof min {lo} vs C {c}"),
        ),
        check(
            "oracle_max_vs_lambda_sum",
            (hi - ca).abs() <= cfg.oracle_tol,
            || format!("roof max {hi} vs sum of lambdas {ca}"),
        ),
        check(
            "oracle_ordering",
            lo <= c + tol && c <= hi + tol && c <= lo + tol && hi <= ca + tol,
            || format!("roof min {lo}, C {c}, roof max {hi}, Ca {ca}"),
        ),
    ])
}

fn tally(suites: &mut BTreeMap<String, SuiteSummary>, label: &str, checks: Vec<Check>) {
    for c in checks {
        let entry = suites.entry(c.suite).or_default();
        entry.checked += 1;
        if c.ok {
            entry.passed += 1;
        } else if entry.failures.len() < MAX_REPORTED_FAILURES {
            entry.failures.push(Failure {
                state: label.to_string(),
                detail: c.detail,
            });
        }
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let (three, rej3) = draw_ensemble(cfg.seed, 3, cfg.three_qubit)?;
    let (four, rej4) = draw_ensemble(cfg.seed, 4, cfg.four_qubit)?;
    let samples: Vec<Sample> = three.into_iter().chain(four).collect();

    let results: Vec<Result<Vec<Check>>> = samples
        .par_iter()
        .map(|s| relation_checks(s, cfg))
        .collect();
    let mut suites = BTreeMap::new();
    for (s, r) in samples.iter().zip(results) {
        tally(&mut suites, &s.label, r?);
    }

    let oracle_states = if cfg.oracle { cfg.oracle_states } else { 0 };
    let oracle: Vec<Result<Vec<Check>>> = (0..oracle_states)
        .into_par_iter()
        .map(|k| oracle_checks(k, cfg))
        .collect();
    for (k, r) in oracle.into_iter().enumerate() {
        tally(&mut suites, &format!("rank2#{k}"), r?);
    }

    let checked = suites.values().map(|s| s.checked).sum();
    let passed = suites.values().map(|s| s.passed).sum();
    Ok(VerifyReport {
        seed: cfg.seed,
        three_qubit_states: cfg.three_qubit,
        four_qubit_states: cfg.four_qubit,
        rejected_draws: rej3 + rej4,
        oracle_states,
        suites,
        checked,
        passed,
        all_passed: checked == passed,
    })
}
