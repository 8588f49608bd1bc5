//! Pure and mixed n-qubit states, partitions, random sampling and the
//! JSON state-file format.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, hermitian_eig, CMatrix, C64};

pub const MAX_QUBITS: usize = 5;
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates length `2^n` with `1 ≤ n ≤ 5` and unit norm within `1e-10`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Scales a nonzero vector to unit norm before validating.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: CMatrix::outer(&self.amplitudes),
        }
    }

    /// Reduced state on `keep` (ascending order), computed from amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        let keep = linalg::normalize_keep(keep, n)?;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        // Rows of the dk × dt coefficient matrix; ρ = M M†.
        let mut coeffs = vec![c(0.0, 0.0); dk * dt];
        for i in 0..dk {
            for e in 0..dt {
                coeffs[i * dt + e] =
                    self.amplitudes[linalg::compose_index(n, &keep, i, &traced, e)];
            }
        }
        let mut m = CMatrix::zeros(dk);
        for i in 0..dk {
            for j in i..dk {
                let s: C64 = (0..dt)
                    .map(|e| coeffs[i * dt + e] * coeffs[j * dt + e].conj())
                    .sum();
                m[(i, j)] = s;
                m[(j, i)] = s.conj();
            }
        }
        Ok(DensityMatrix {
            n_qubits: keep.len(),
            matrix: m,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity (eigenvalues ≥ −1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(matrix.dim())?;
        let dev = matrix.hermiticity_deviation();
        if dev > linalg::HERMITIAN_TOL {
            return Err(Error::InvariantViolation(format!(
                "density matrix not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvariantViolation(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -linalg::PSD_CLAMP {
            return Err(Error::InvariantViolation(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let d = 1usize << n_qubits;
        Self::new(CMatrix::identity(d).scale(1.0 / d as f64))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(&self.matrix, self.n_qubits, keep)?;
        let kept = linalg::normalize_keep(keep, self.n_qubits)?.len();
        Ok(DensityMatrix {
            n_qubits: kept,
            matrix: m,
        })
    }

    /// The dominant eigenvector when the state is pure within `tol` in purity.
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        if (self.purity() - 1.0).abs() > tol {
            return None;
        }
        let eig = hermitian_eig(&self.matrix).ok()?;
        PureState::normalized(eig.vector(0)).ok()
    }
}

/// Either kind of state, as read from a state file.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn n_qubits(&self) -> usize {
        match self {
            State::Pure(p) => p.n_qubits(),
            State::Mixed(m) => m.n_qubits(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.to_density(),
            State::Mixed(m) => m.clone(),
        }
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        match self {
            State::Pure(p) => p.reduced(keep),
            State::Mixed(m) => m.partial_trace(keep),
        }
    }
}

impl From<PureState> for State {
    fn from(p: PureState) -> Self {
        State::Pure(p)
    }
}

impl From<DensityMatrix> for State {
    fn from(m: DensityMatrix) -> Self {
        State::Mixed(m)
    }
}

/// Focus qubit A and its ordered partners B₁…B_{n−1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    focus: usize,
    partners: Vec<usize>,
}

impl PartitionSpec {
    pub fn new(n_qubits: usize, focus: usize, partners: Vec<usize>) -> Result<Self> {
        if focus >= n_qubits {
            return Err(Error::BadIndex {
                index: focus,
                n_qubits,
            });
        }
        if partners.len() + 1 != n_qubits {
            return Err(Error::BadPartition(format!(
                "{} partners given for {} qubits",
                partners.len(),
                n_qubits
            )));
        }
        let mut seen = vec![false; n_qubits];
        seen[focus] = true;
        for &p in &partners {
            if p >= n_qubits {
                return Err(Error::BadIndex { index: p, n_qubits });
            }
            if seen[p] {
                return Err(Error::BadPartition(format!("qubit {p} listed twice")));
            }
            seen[p] = true;
        }
        Ok(Self { focus, partners })
    }

    /// Partners in ascending index order.
    pub fn with_focus(n_qubits: usize, focus: usize) -> Result<Self> {
        let partners = (0..n_qubits).filter(|&q| q != focus).collect();
        Self::new(n_qubits, focus, partners)
    }

    pub fn focus(&self) -> usize {
        self.focus
    }

    pub fn partners(&self) -> &[usize] {
        &self.partners
    }

    pub fn n_qubits(&self) -> usize {
        self.partners.len() + 1
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::BadParameter(format!(
            "dimension {dim} is not a power of two ≥ 2"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::BadParameter(format!(
            "{n} qubits exceeds the cap of {MAX_QUBITS}"
        )));
    }
    Ok(n)
}

/// `a|0…0⟩ + Σ bᵢ|0…1ᵢ…0⟩` with one coefficient per qubit (qubit i carries the 1).
pub fn w_class_state(a: f64, b: &[f64]) -> Result<PureState> {
    let n = b.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::BadParameter(format!("{n} qubits")));
    }
    let norm_sq = a * a + b.iter().map(|x| x * x).sum::<f64>();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            norm: norm_sq.sqrt(),
        });
    }
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = c(a, 0.0);
    for (i, &bi) in b.iter().enumerate() {
        amps[1 << (n - 1 - i)] = c(bi, 0.0);
    }
    PureState::new(amps)
}

/// The 3-qubit W state (|100⟩ + |010⟩ + |001⟩)/√3.
pub fn w3() -> PureState {
    let s = 1.0 / 3f64.sqrt();
    w_class_state(0.0, &[s, s, s]).expect("W state is normalized")
}

/// `(1 − t)/2ⁿ · I + t |base⟩⟨base|`
pub fn isotropic_mixture(t: f64, base: &PureState) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::BadParameter(format!(
            "mixing weight t = {t} outside [0, 1]"
        )));
    }
    let d = 1usize << base.n_qubits();
    let noise = CMatrix::identity(d).scale((1.0 - t) / d as f64);
    let proj = CMatrix::outer(base.amplitudes()).scale(t);
    DensityMatrix::new(&noise + &proj)
}

/// Normalized vector of i.i.d. standard complex Gaussians, using ChaCha8
/// seeded from `seed`.
pub fn haar_random_pure(n_qubits: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_pure_with(n_qubits, &mut rng)
}

pub fn haar_random_pure_with<R: rand::Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> Result<PureState> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::BadParameter(format!("{n_qubits} qubits")));
    }
    let amps = (0..1usize << n_qubits)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        })
        .collect();
    PureState::normalized(amps)
}

/// Rank ≤ 2 two-qubit state: the {0, 1} marginal of a random 3-qubit pure state.
pub fn random_rank2_two_qubit(seed: u64) -> Result<DensityMatrix> {
    haar_random_pure(3, seed)?.reduced(&[0, 1])
}

/// Derives an independent per-item seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// State files
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    kind: String,
    n_qubits: usize,
    amplitudes: Option<Vec<[f64; 2]>>,
    matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn field_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("field `{field}`"),
        msg: msg.into(),
    }
}

pub fn parse_state(text: &str) -> Result<State> {
    let raw: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        msg: e.to_string(),
    })?;
    if !(1..=MAX_QUBITS).contains(&raw.n_qubits) {
        return Err(field_err(
            "n_qubits",
            format!("{} outside 1..=5", raw.n_qubits),
        ));
    }
    let dim = 1usize << raw.n_qubits;
    match raw.kind.as_str() {
        "pure" => {
            let amps = raw
                .amplitudes
                .ok_or_else(|| field_err("amplitudes", "missing for kind \"pure\""))?;
            if amps.len() != dim {
                return Err(field_err(
                    "amplitudes",
                    format!("expected {dim} entries, found {}", amps.len()),
                ));
            }
            let amps = amps.into_iter().map(|[re, im]| c(re, im)).collect();
            PureState::new(amps)
                .map(State::Pure)
                .map_err(|e| Error::InvariantViolation(e.to_string()))
        }
        "mixed" => {
            let rows = raw
                .matrix
                .ok_or_else(|| field_err("matrix", "missing for kind \"mixed\""))?;
            if rows.len() != dim {
                return Err(field_err(
                    "matrix",
                    format!("expected {dim} rows, found {}", rows.len()),
                ));
            }
            let mut data = Vec::with_capacity(dim * dim);
            for (i, row) in rows.into_iter().enumerate() {
                if row.len() != dim {
                    return Err(field_err(
                        "matrix",
                        format!("row {i}: expected {dim} entries, found {}", row.len()),
                    ));
                }
                data.extend(row.into_iter().map(|[re, im]| c(re, im)));
            }
            let m = CMatrix::from_vec(dim, data)?;
            DensityMatrix::new(m)
                .map(State::Mixed)
                .map_err(|e| match e {
                    Error::InvariantViolation(_) => e,
                    other => Error::InvariantViolation(other.to_string()),
                })
        }
        other => Err(field_err("kind", format!("unknown kind {other:?}"))),
    }
}

pub fn load_state(path: impl AsRef<Path>) -> Result<State> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text)
}

/// 17 significant digits, which round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_pair(z: C64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

pub fn format_state(state: &State) -> String {
    let mut out = String::new();
    match state {
        State::Pure(p) => {
            let _ = writeln!(
                out,
                "{{\n  \"kind\": \"pure\",\n  \"n_qubits\": {},",
                p.n_qubits()
            );
            out.push_str("  \"amplitudes\": [\n");
            let entries: Vec<String> = p
                .amplitudes()
                .iter()
                .map(|&z| format!("    {}", fmt_pair(z)))
                .collect();
            out.push_str(&entries.join(",\n"));
            out.push_str("\n  ]\n}\n");
        }
        State::Mixed(m) => {
            let _ = writeln!(
                out,
                "{{\n  \"kind\": \"mixed\",\n  \"n_qubits\": {},",
                m.n_qubits()
            );
            out.push_str("  \"matrix\": [\n");
            let rows: Vec<String> = (0..m.dim())
                .map(|i| {
                    let row: Vec<String> = m.matrix().row(i).iter().map(|&z| fmt_pair(z)).collect();
                    format!("    [{}]", row.join(", "))
                })
                .collect();
            out.push_str(&rows.join(",\n"));
            out.push_str("\n  ]\n}\n");
        }
    }
    out
}

pub fn save_state(state: &State, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_state(state))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn w3_amplitudes() {
        let w = w3();
        let s = 1.0 / 3f64.sqrt();
        let expected = [0.0, s, s, 0.0, s, 0.0, 0.0, 0.0];
        for (z, e) in w.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(z.re, e, epsilon = 1e-15);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn w_class_product_and_example_two() {
        let p = w_class_state(1.0, &[0.0; 4]).unwrap();
        assert_eq!(p.amplitudes()[0], c(1.0, 0.0));
        assert!(p.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));

        let a = 1.0 / 10f64.sqrt();
        let b = [
            1.0 / 15f64.sqrt(),
            a,
            (2.0 / 15f64).sqrt(),
            (3.0 / 5f64).sqrt(),
        ];
        let s = w_class_state(a, &b).unwrap();
        assert_eq!(s.n_qubits(), 4);
        assert_abs_diff_eq!(s.amplitudes()[0b1000].re, b[0], epsilon = 0.0);
        assert_abs_diff_eq!(s.amplitudes()[0b0001].re, b[3], epsilon = 0.0);
        assert!(w_class_state(0.5, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn isotropic_mixture_limits_and_spectrum() {
        let w = w3();
        let pure = isotropic_mixture(1.0, &w).unwrap();
        assert_abs_diff_eq!(pure.purity(), 1.0, epsilon = 1e-10);
        let mixed = isotropic_mixture(0.0, &w).unwrap();
        assert_abs_diff_eq!(mixed.purity(), 1.0 / 8.0, epsilon = 1e-10);

        let rho = isotropic_mixture(0.9, &w).unwrap();
        let eig = hermitian_eig(rho.matrix()).unwrap();
        assert_abs_diff_eq!(eig.values[0], 0.9125, epsilon = 1e-12);
        for &v in &eig.values[1..] {
            assert_abs_diff_eq!(v, 0.0125, epsilon = 1e-12);
        }
        assert!(isotropic_mixture(1.5, &w).is_err());
    }

    #[test]
    fn haar_is_deterministic_and_normalized() {
        let a = haar_random_pure(1, 7).unwrap();
        let b = haar_random_pure(1, 7).unwrap();
        assert_eq!(a, b);
        let s = haar_random_pure(3, 1234).unwrap();
        let norm: f64 = s.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        assert!(haar_random_pure(6, 0).is_err());
    }

    #[test]
    fn haar_first_amplitude_mean() {
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|i| {
                haar_random_pure(2, derive_seed(99, i))
                    .unwrap()
                    .amplitudes()[0]
                    .norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.25).abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn reduced_matches_dense_partial_trace() {
        let s = haar_random_pure(4, 21).unwrap();
        for keep in [vec![0], vec![1, 3], vec![0, 2, 3]] {
            let a = s.reduced(&keep).unwrap();
            let b = s.to_density().partial_trace(&keep).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        }
    }

    #[test]
    fn partition_validation() {
        assert!(PartitionSpec::new(3, 0, vec![1, 2]).is_ok());
        assert!(PartitionSpec::new(3, 0, vec![1, 1]).is_err());
        assert!(PartitionSpec::new(3, 0, vec![0, 1]).is_err());
        assert!(PartitionSpec::new(3, 3, vec![0, 1]).is_err());
        assert!(PartitionSpec::new(3, 0, vec![1]).is_err());
        assert_eq!(
            PartitionSpec::with_focus(4, 2).unwrap().partners(),
            &[0, 1, 3]
        );
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w3.json");
        let w: State = w3().into();
        save_state(&w, &path).unwrap();
        assert_eq!(load_state(&path).unwrap(), w);

        let rho: State = isotropic_mixture(0.37, &haar_random_pure(2, 4).unwrap())
            .unwrap()
            .into();
        save_state(&rho, &path).unwrap();
        assert_eq!(load_state(&path).unwrap(), rho);
    }

    #[test]
    fn file_errors() {
        let bad_trace =
            r#"{"kind":"mixed","n_qubits":1,"matrix":[[[0.5,0],[0,0]],[[0,0],[0.4,0]]]}"#;
        assert!(matches!(
            parse_state(bad_trace),
            Err(Error::InvariantViolation(_))
        ));

        let pure = r#"{"kind":"pure","n_qubits":1,"amplitudes":[[0.6,0],[0,0.8]]}"#;
        assert!(matches!(parse_state(pure), Ok(State::Pure(_))));

        let short = r#"{"kind":"pure","n_qubits":2,"amplitudes":[[1,0]]}"#;
        match parse_state(short) {
            Err(Error::Parse { location, .. }) => assert!(location.contains("amplitudes")),
            other => panic!("unexpected {other:?}"),
        }

        let broken = "{\n  \"kind\": \"pure\",\n  \"n_qubits\": ,\n}";
        match parse_state(broken) {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line 3")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
