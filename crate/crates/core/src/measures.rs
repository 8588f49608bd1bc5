//! Closed-form bipartite entanglement measures for qubit states.
//!
//! Two-qubit mixed states use the Wootters spectrum: the square roots
//! λ₁ ≥ … ≥ λ₄ of the eigenvalues of ρρ̃, where ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
//! Concurrence is max(0, λ₁ − λ₂ − λ₃ − λ₄), concurrence of assistance is
//! Σλᵢ, and entanglement of formation is h((1 + √(1 − C²))/2).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, sigma_y, singular_values, tensor, CMatrix, PSD_CLAMP};
use crate::roof::{self, Direction, RestartBudget, RoofMeasure};
use crate::states::{DensityMatrix, PartitionSpec, PureState, State};

/// A pair counts as entangled when its measure exceeds this.
pub const ENTANGLED_TOL: f64 = 1e-9;
/// Eigenvalues of a trace-one state below this are rounding noise.
pub const RANK_FLOOR: f64 = 1e-14;
/// Purity tolerance under which a mixed input is treated as pure.
pub const PURITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Concurrence,
    ConcurrenceOfAssistance,
    #[serde(rename = "eof")]
    EoF,
}

impl MeasureKind {
    /// Upper end of the exponent window in which α₀ and α₁ are sought.
    pub fn exponent_cap(self) -> f64 {
        match self {
            MeasureKind::EoF => std::f64::consts::SQRT_2,
            _ => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Concurrence => "concurrence",
            MeasureKind::ConcurrenceOfAssistance => "coa",
            MeasureKind::EoF => "eof",
        }
    }
}

/// Global value M(ρ_{A|B₁…B_{n−1}}) and pair values M(ρ_{AB_i}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureVector {
    pub kind: MeasureKind,
    pub global: f64,
    pub pairs: Vec<f64>,
    /// Set when the global value came from the numerical roof optimizer.
    pub approximate: bool,
}

impl MeasureVector {
    pub fn new(kind: MeasureKind, global: f64, pairs: Vec<f64>) -> Result<Self> {
        if !global.is_finite() || global < 0.0 {
            return Err(Error::InvariantViolation(format!("global value {global}")));
        }
        if let Some(p) = pairs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvariantViolation(format!("pair value {p}")));
        }
        Ok(Self {
            kind,
            global,
            pairs,
            approximate: false,
        })
    }

    pub fn entangled_pairs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pairs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > ENTANGLED_TOL)
    }
}

pub fn concurrence_pure(state: &PureState, part: &PartitionSpec) -> Result<f64> {
    check_partition(state.n_qubits(), part)?;
    let rho_a = state.reduced(&[part.focus()])?;
    Ok((2.0 * (1.0 - rho_a.purity())).max(0.0).sqrt())
}

pub fn eof_pure(state: &PureState, part: &PartitionSpec) -> Result<f64> {
    check_partition(state.n_qubits(), part)?;
    von_neumann_entropy(&state.reduced(&[part.focus()])?)
}

fn check_partition(n_qubits: usize, part: &PartitionSpec) -> Result<()> {
    if part.n_qubits() != n_qubits {
        return Err(Error::BadPartition(format!(
            "partition covers {} qubits, state has {}",
            part.n_qubits(),
            n_qubits
        )));
    }
    Ok(())
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != 2 {
        return Err(Error::WrongDimension {
            expected: 4,
            got: rho.dim(),
        });
    }
    Ok(())
}

/// ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    require_two_qubits(rho)?;
    let yy = tensor(&sigma_y(), &sigma_y());
    Ok(&(&yy * &rho.matrix().conj()) * &yy)
}

/// Wootters λ's, descending.
///
/// The λ's are the square roots of the eigenvalues of the Hermitian product
/// √ρ ρ̃ √ρ = M M† with M = √ρ √ρ̃, so they are taken as the singular values
/// of M. Eigenvalues of ρ below `RANK_FLOOR` are treated as exact zeros.
pub fn wootters_lambdas(rho: &DensityMatrix) -> Result<[f64; 4]> {
    require_two_qubits(rho)?;
    let eig = hermitian_eig(rho.matrix())?;
    let min_eig = eig.values.last().copied().unwrap_or(0.0);
    if min_eig < -PSD_CLAMP {
        return Err(Error::NotPsd { min_eig });
    }
    let root = eig.reconstruct_with(|x| if x > RANK_FLOOR { x.sqrt() } else { 0.0 });
    let yy = tensor(&sigma_y(), &sigma_y());
    let root_flipped = &(&yy * &root.conj()) * &yy;
    let sv = singular_values(&(&root * &root_flipped))?;
    let mut lambdas = [0.0; 4];
    lambdas.copy_from_slice(&sv);
    Ok(lambdas)
}

/// λ₁ − λ₂ − λ₃ − λ₄ without clamping; positive exactly when entangled.
pub fn wootters_margin(rho: &DensityMatrix) -> Result<f64> {
    let l = wootters_lambdas(rho)?;
    Ok(l[0] - l[1] - l[2] - l[3])
}

pub fn concurrence_mixed(rho: &DensityMatrix) -> Result<f64> {
    Ok(wootters_margin(rho)?.max(0.0))
}

/// Concurrence of assistance of a two-qubit state, Σλᵢ.
pub fn coa(rho: &DensityMatrix) -> Result<f64> {
    Ok(wootters_lambdas(rho)?.iter().sum())
}

/// −x log₂x − (1−x) log₂(1−x), with 0·log 0 = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!("binary entropy argument {x}")));
    }
    Ok(xlog2x(x) + xlog2x(1.0 - x))
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = hermitian_eig(rho.matrix())?;
    Ok(eig.values.iter().map(|&v| xlog2x(v)).sum::<f64>().max(0.0))
}

/// EoF of a two-qubit state with concurrence `c`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    xlog2x(x) + xlog2x(1.0 - x)
}

pub fn eof_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence_mixed(rho)?))
}

fn pair_value(rho: &DensityMatrix, kind: MeasureKind) -> Result<f64> {
    match kind {
        MeasureKind::Concurrence => concurrence_mixed(rho),
        MeasureKind::ConcurrenceOfAssistance => coa(rho),
        MeasureKind::EoF => eof_two_qubit(rho),
    }
}

/// Pair values from the two-qubit marginals `{A, B_i}`; the global value from
/// the pure-state formula, or from the roof optimizer when the input is mixed
/// and `roof_budget` is given.
pub fn measure_vector(
    state: &State,
    part: &PartitionSpec,
    kind: MeasureKind,
    roof_budget: Option<&RestartBudget>,
) -> Result<MeasureVector> {
    check_partition(state.n_qubits(), part)?;
    let pairs = part
        .partners()
        .iter()
        .map(|&b| pair_value(&state.reduced(&[part.focus(), b])?, kind))
        .collect::<Result<Vec<_>>>()?;

    let pure = match state {
        State::Pure(p) => Some(p.clone()),
        State::Mixed(m) => m.as_pure(PURITY_TOL),
    };
    let (global, approximate) = match pure {
        Some(p) => {
            let g = match kind {
                MeasureKind::Concurrence | MeasureKind::ConcurrenceOfAssistance => {
                    concurrence_pure(&p, part)?
                }
                MeasureKind::EoF => eof_pure(&p, part)?,
            };
            (g, false)
        }
        None => {
            let budget = roof_budget.ok_or(Error::UnsupportedGlobalMeasure(kind.name()))?;
            let rho = state.to_density();
            let (measure, direction) = match kind {
                MeasureKind::Concurrence => (RoofMeasure::Concurrence, Direction::Min),
                MeasureKind::ConcurrenceOfAssistance => (RoofMeasure::Concurrence, Direction::Max),
                MeasureKind::EoF => (RoofMeasure::EoF, Direction::Min),
            };
            let res = roof::roof_optimize(&rho, part, measure, direction, budget)?;
            (res.value, true)
        }
    };
    let mut mv = MeasureVector::new(kind, global, pairs)?;
    mv.approximate = approximate;
    Ok(mv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::states::{haar_random_pure, isotropic_mixture, w3, w_class_state};
    use approx::assert_abs_diff_eq;

    fn bell() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_real(&[h, 0.0, 0.0, h]).unwrap()
    }

    fn basis(n: usize, idx: usize) -> PureState {
        let mut v = vec![0.0; 1 << n];
        v[idx] = 1.0;
        PureState::from_real(&v).unwrap()
    }

    fn example2() -> PureState {
        let a = 1.0 / 10f64.sqrt();
        w_class_state(
            a,
            &[
                1.0 / 15f64.sqrt(),
                a,
                (2.0 / 15f64).sqrt(),
                (3.0 / 5f64).sqrt(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn pure_concurrence_examples() {
        let p3 = PartitionSpec::with_focus(3, 0).unwrap();
        assert_abs_diff_eq!(
            concurrence_pure(&w3(), &p3).unwrap(),
            2.0 * 2f64.sqrt() / 3.0,
            epsilon = 1e-12
        );
        assert_eq!(concurrence_pure(&basis(3, 0), &p3).unwrap(), 0.0);
        let p4 = PartitionSpec::with_focus(4, 0).unwrap();
        assert_abs_diff_eq!(
            concurrence_pure(&example2(), &p4).unwrap(),
            2f64.sqrt() / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn spin_flip_examples() {
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(spin_flip(&mm).unwrap().max_abs_diff(mm.matrix()) < 1e-15);
        let f = spin_flip(&basis(2, 0).to_density()).unwrap();
        assert!(f.max_abs_diff(basis(2, 3).to_density().matrix()) < 1e-15);
        let b = bell().to_density();
        assert!(spin_flip(&b).unwrap().max_abs_diff(b.matrix()) < 1e-15);
        assert!(spin_flip(&w3().to_density()).is_err());
    }

    #[test]
    fn lambda_examples() {
        let rho_ab = w3().reduced(&[0, 1]).unwrap();
        let l = wootters_lambdas(&rho_ab).unwrap();
        assert_abs_diff_eq!(l[0], 2.0 / 3.0, epsilon = 1e-7);
        for &x in &l[1..] {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-7);
        }
        let l = wootters_lambdas(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        for x in l {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-12);
        }
        let l = wootters_lambdas(&basis(2, 0).to_density()).unwrap();
        for x in l {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-7);
        }
    }

    /// X-state closed form 2 max(0, |ρ₀₁,₁₀| − √(ρ₀₀,₀₀ ρ₁₁,₁₁)) for the AB
    /// marginal of the W mixture at weight t.
    fn example1_pair_concurrence(t: f64) -> f64 {
        (2.0 * t / 3.0 - ((3.0 - 2.0 * t - t * t) / 12.0).sqrt()).max(0.0)
    }

    #[test]
    fn mixed_concurrence_examples() {
        let rho_ab = w3().reduced(&[0, 1]).unwrap();
        assert_abs_diff_eq!(
            concurrence_mixed(&rho_ab).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-10
        );
        let rho = isotropic_mixture(0.9, &w3())
            .unwrap()
            .partial_trace(&[0, 1])
            .unwrap();
        let cm = concurrence_mixed(&rho).unwrap();
        assert_abs_diff_eq!(cm, 0.419_722_436_226_800, epsilon = 1e-12);
        assert_abs_diff_eq!(cm, example1_pair_concurrence(0.9), epsilon = 1e-12);
        for t in [0.8, 0.85, 0.95, 1.0] {
            let rho = isotropic_mixture(t, &w3())
                .unwrap()
                .partial_trace(&[0, 2])
                .unwrap();
            assert_abs_diff_eq!(
                concurrence_mixed(&rho).unwrap(),
                example1_pair_concurrence(t),
                epsilon = 1e-10
            );
        }
        assert_abs_diff_eq!(
            concurrence_mixed(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn coa_examples() {
        let rho_ab = w3().reduced(&[0, 1]).unwrap();
        assert_abs_diff_eq!(coa(&rho_ab).unwrap(), 2.0 / 3.0, epsilon = 1e-7);
        assert_abs_diff_eq!(coa(&bell().to_density()).unwrap(), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(
            coa(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!(binary_entropy(1.2).is_err());
        let rho_a = w3().reduced(&[0]).unwrap();
        assert_abs_diff_eq!(
            von_neumann_entropy(&rho_a).unwrap(),
            0.918296,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            von_neumann_entropy(&bell().to_density()).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn eof_examples() {
        let rho_ab = w3().reduced(&[0, 1]).unwrap();
        assert_abs_diff_eq!(eof_two_qubit(&rho_ab).unwrap(), 0.550048, epsilon = 1e-6);
        assert_abs_diff_eq!(
            eof_two_qubit(&bell().to_density()).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        assert_eq!(eof_two_qubit(&basis(2, 1).to_density()).unwrap(), 0.0);

        let p3 = PartitionSpec::with_focus(3, 0).unwrap();
        assert_abs_diff_eq!(eof_pure(&w3(), &p3).unwrap(), 0.918296, epsilon = 1e-6);
        assert_abs_diff_eq!(eof_pure(&basis(3, 0), &p3).unwrap(), 0.0, epsilon = 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |Φ⁺⟩ ⊗ |0⟩
        let phi0 = PureState::from_real(&[h, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0]).unwrap();
        assert_abs_diff_eq!(eof_pure(&phi0, &p3).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn measure_vector_examples() {
        let p3 = PartitionSpec::with_focus(3, 0).unwrap();
        let w: State = w3().into();
        let mv = measure_vector(&w, &p3, MeasureKind::Concurrence, None).unwrap();
        assert_abs_diff_eq!(mv.global, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-12);
        for p in &mv.pairs {
            assert_abs_diff_eq!(*p, 2.0 / 3.0, epsilon = 1e-10);
        }
        let mv = measure_vector(&w, &p3, MeasureKind::EoF, None).unwrap();
        assert_abs_diff_eq!(mv.global, 0.918296, epsilon = 1e-6);
        for p in &mv.pairs {
            assert_abs_diff_eq!(*p, 0.550048, epsilon = 1e-6);
        }

        let p4 = PartitionSpec::with_focus(4, 0).unwrap();
        let mv = measure_vector(&example2().into(), &p4, MeasureKind::Concurrence, None).unwrap();
        let expected = [6f64.sqrt() / 15.0, 2.0 * 2f64.sqrt() / 15.0, 0.4];
        for (p, e) in mv.pairs.iter().zip(expected) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn mixed_global_needs_roof() {
        let rho: State = isotropic_mixture(0.9, &w3()).unwrap().into();
        let p3 = PartitionSpec::with_focus(3, 0).unwrap();
        assert!(matches!(
            measure_vector(&rho, &p3, MeasureKind::Concurrence, None),
            Err(Error::UnsupportedGlobalMeasure(_))
        ));
        // A pure state stored as a density matrix is recognized as pure.
        let pure_mixed: State = w3().to_density().into();
        let mv = measure_vector(&pure_mixed, &p3, MeasureKind::Concurrence, None).unwrap();
        assert!(!mv.approximate);
        assert_abs_diff_eq!(mv.global, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn pure_and_mixed_concurrence_agree() {
        let p2 = PartitionSpec::with_focus(2, 0).unwrap();
        for seed in 0..1000 {
            let s = haar_random_pure(2, seed).unwrap();
            let a = concurrence_pure(&s, &p2).unwrap();
            let b = concurrence_mixed(&s.to_density()).unwrap();
            assert!((a - b).abs() <= 1e-8, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn concurrence_below_coa_and_eof_monotone() {
        let mut pairs = Vec::new();
        for seed in 0..300 {
            let rho = crate::states::random_rank2_two_qubit(seed).unwrap();
            let cm = concurrence_mixed(&rho).unwrap();
            assert!(cm <= coa(&rho).unwrap() + 1e-12);
            pairs.push((cm, eof_two_qubit(&rho).unwrap()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
    }

    #[test]
    fn ckw_and_coa_polygamy_on_random_three_qubit_states() {
        let p3 = PartitionSpec::with_focus(3, 0).unwrap();
        for seed in 0..1000 {
            let s = haar_random_pure(3, seed).unwrap();
            let global = concurrence_pure(&s, &p3).unwrap();
            let rab = s.reduced(&[0, 1]).unwrap();
            let rac = s.reduced(&[0, 2]).unwrap();
            let (cab, cac) = (
                concurrence_mixed(&rab).unwrap(),
                concurrence_mixed(&rac).unwrap(),
            );
            assert!(
                global * global >= cab * cab + cac * cac - 1e-9,
                "seed {seed}"
            );
            let (aab, aac) = (coa(&rab).unwrap(), coa(&rac).unwrap());
            assert!(
                global * global <= aab * aab + aac * aac + 1e-9,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn complex_amplitudes_supported() {
        let h = 0.5;
        let s = PureState::new(vec![c(h, 0.0), c(0.0, h), c(0.0, -h), c(h, 0.0)]).unwrap();
        let p2 = PartitionSpec::with_focus(2, 0).unwrap();
        let a = concurrence_pure(&s, &p2).unwrap();
        let b = concurrence_mixed(&s.to_density()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }
}
