//! Occupation-number (Fock) representation of bosonic mode states.
//!
//! A [`PureState`] lives in a single total-particle-number sector: its
//! amplitudes are indexed by a [`FockBasis`] holding every occupation vector
//! with a fixed mode count and total. Mixtures across sectors are kept as
//! ensembles ([`MixedState`]) rather than as density matrices over the direct
//! sum, since no state here carries coherences between different totals.
//!
//! Basis vectors are ordered lexicographically descending on occupations,
//! e.g. `(2,0), (1,1), (0,2)`, so indices are stable across runs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Allowed deviation of a state norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Allowed deviation of ensemble weights from summing to 1.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Tolerance used when validating density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-8;

/// Particle counts per mode, in mode order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FockVector(Vec<usize>);

impl FockVector {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self(occupations)
    }

    pub fn occupations(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// Total particle number, the superselection sector label.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Occupations of the listed modes, in the listed order.
    pub fn select(&self, modes: &[usize]) -> FockVector {
        FockVector(modes.iter().map(|&m| self.0[m]).collect())
    }
}

impl From<Vec<usize>> for FockVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Every occupation vector with `modes` modes and `total` particles.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    total: usize,
    vectors: Vec<FockVector>,
    index: HashMap<FockVector, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.total == other.total
    }
}

/// Enumerates the sector basis in lexicographically descending order.
pub fn enumerate_basis(modes: usize, total: usize) -> Result<FockBasis> {
    if modes == 0 {
        return Err(Error::NoModes);
    }
    let mut vectors = Vec::new();
    let mut current = vec![0; modes];
    fill(&mut current, 0, total, &mut vectors);
    let index = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    Ok(FockBasis {
        modes,
        total,
        vectors,
        index,
    })
}

fn fill(current: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<FockVector>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(FockVector(current.to_vec()));
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n;
        fill(current, pos + 1, remaining - n, out);
    }
}

/// Number of ways to place `total` bosons in `modes` modes.
pub fn sector_dimension(modes: usize, total: usize) -> usize {
    if modes == 0 {
        return 0;
    }
    // C(total + modes - 1, modes - 1), built incrementally to stay exact
    let k = modes - 1;
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (total as u128 + i) / i;
    }
    acc as usize
}

impl FockBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[FockVector] {
        &self.vectors
    }

    pub fn index_of(&self, v: &FockVector) -> Option<usize> {
        self.index.get(v).copied()
    }
}

/// Normalized state confined to one total-particle-number sector.
#[derive(Clone, Debug)]
pub struct PureState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector; rejects anything not normalized within [`NORM_TOLERANCE`].
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: amplitudes.len(),
            });
        }
        let state = Self { basis, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                norm,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(state)
    }

    /// Builds a state from `(occupations, amplitude)` terms. Repeated labels add.
    ///
    /// All labels must share mode count and total; the result must already be
    /// normalized.
    pub fn from_terms<I, V>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, Complex64)>,
        V: Into<FockVector>,
    {
        let terms: Vec<(FockVector, Complex64)> =
            terms.into_iter().map(|(v, a)| (v.into(), a)).collect();
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("state needs at least one term".into()))?;
        let (modes, total) = (first.0.modes(), first.0.total());
        let basis = Arc::new(enumerate_basis(modes, total)?);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (v, a) in &terms {
            if v.modes() != modes {
                return Err(Error::ModeCountMismatch(modes, v.modes()));
            }
            if v.total() != total {
                return Err(Error::InvalidArgument(format!(
                    "term {v} has {} particles, expected {total}; superpositions across sectors are not allowed",
                    v.total()
                )));
            }
            let i = basis.index_of(v).expect("label within enumerated sector");
            amplitudes[i] += a;
        }
        Self::new(basis, amplitudes)
    }

    /// The all-empty state on `modes` modes.
    pub fn vacuum(modes: usize) -> Result<Self> {
        let basis = Arc::new(enumerate_basis(modes, 0)?);
        Self::new(basis, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub(crate) fn shared_basis(&self) -> Arc<FockBasis> {
        Arc::clone(&self.basis)
    }

    pub fn modes(&self) -> usize {
        self.basis.modes
    }

    pub fn total(&self) -> usize {
        self.basis.total
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of a basis label; zero for labels outside this sector.
    pub fn amplitude(&self, occupations: &[usize]) -> Complex64 {
        self.basis
            .index_of(&FockVector(occupations.to_vec()))
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `(label, amplitude)` pairs in basis order.
    pub fn iter(&self) -> impl Iterator<Item = (&FockVector, Complex64)> + '_ {
        self.basis.vectors.iter().zip(self.amplitudes.iter().copied())
    }

    /// Largest componentwise amplitude difference; infinite if sectors differ.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        if self.basis != other.basis {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Tensor product; modes of `self` come first.
    pub fn tensor(&self, right: &PureState) -> PureState {
        let modes = self.modes() + right.modes();
        let total = self.total() + right.total();
        let basis = Arc::new(enumerate_basis(modes, total).expect("modes > 0"));
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (u, a) in self.iter() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, b) in right.iter() {
                let mut occ = u.0.clone();
                occ.extend_from_slice(&v.0);
                let i = basis.index_of(&FockVector(occ)).expect("sector label");
                amplitudes[i] = a * b;
            }
        }
        PureState { basis, amplitudes }
    }

    /// Reorders modes: mode `i` of the result is mode `permutation[i]` of `self`.
    ///
    /// Bosonic amplitudes pick up no sign.
    pub fn permute_modes(&self, permutation: &[usize]) -> Result<PureState> {
        validate_permutation(permutation, self.modes())?;
        let basis = self.shared_basis();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (v, a) in self.iter() {
            let moved = v.select(permutation);
            let i = basis.index_of(&moved).expect("same sector");
            amplitudes[i] = a;
        }
        Ok(PureState { basis, amplitudes })
    }

    /// Keeps only basis states accepted by `keep` and renormalizes.
    ///
    /// Returns the projection probability and the renormalized state, which
    /// is `None` when nothing survives.
    pub fn project(&self, keep: impl Fn(&FockVector) -> bool) -> (f64, Option<PureState>) {
        let mut amplitudes = self.amplitudes.clone();
        for (amp, v) in amplitudes.iter_mut().zip(&self.basis.vectors) {
            if !keep(v) {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        let prob: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if prob <= 0.0 {
            return (0.0, None);
        }
        let scale = 1.0 / prob.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        (
            prob,
            Some(PureState {
                basis: self.shared_basis(),
                amplitudes,
            }),
        )
    }

    /// Reduced density matrix on `kept_modes` (traces out the rest).
    pub fn reduced_density(&self, kept_modes: &[usize]) -> Result<DensityMatrix> {
        let modes = self.modes();
        let mut seen = vec![false; modes];
        for &m in kept_modes {
            if m >= modes {
                return Err(Error::ModeOutOfRange { index: m, modes });
            }
            if seen[m] {
                return Err(Error::InvalidBipartition(modes));
            }
            seen[m] = true;
        }
        if kept_modes.is_empty() || kept_modes.len() == modes {
            return Err(Error::InvalidBipartition(modes));
        }
        let traced: Vec<usize> = (0..modes).filter(|m| !seen[*m]).collect();

        // rows indexed by kept occupations, columns by environment occupations
        let mut kept_labels: BTreeMap<FockVector, usize> = BTreeMap::new();
        let mut env_groups: HashMap<FockVector, Vec<(FockVector, Complex64)>> = HashMap::new();
        for (v, a) in self.iter() {
            let k = v.select(kept_modes);
            kept_labels.entry(k.clone()).or_insert(0);
            if a.norm_sqr() > 0.0 {
                env_groups.entry(v.select(&traced)).or_default().push((k, a));
            }
        }
        for (i, slot) in kept_labels.values_mut().enumerate() {
            *slot = i;
        }
        let dim = kept_labels.len();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for group in env_groups.values() {
            for (k1, a1) in group {
                let i = kept_labels[k1];
                for (k2, a2) in group {
                    let j = kept_labels[k2];
                    rho[(i, j)] += a1 * a2.conj();
                }
            }
        }
        Ok(DensityMatrix {
            labels: kept_labels.into_keys().collect(),
            matrix: rho,
        })
    }
}

pub(crate) fn validate_permutation(permutation: &[usize], modes: usize) -> Result<()> {
    if permutation.len() != modes {
        return Err(Error::InvalidPermutation(modes));
    }
    let mut seen = vec![false; modes];
    for &p in permutation {
        if p >= modes || seen[p] {
            return Err(Error::InvalidPermutation(modes));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Inverse of a permutation given as "new position i takes old index p[i]".
pub fn invert_permutation(permutation: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; permutation.len()];
    for (i, &p) in permutation.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Weighted ensemble of pure states, one sector per component.
#[derive(Clone, Debug)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidWeights("empty ensemble".into()))?;
        let modes = first.1.modes();
        let mut sum = 0.0;
        for (w, s) in &components {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidWeights(format!("weight {w} is not a probability")));
            }
            if s.modes() != modes {
                return Err(Error::ModeCountMismatch(modes, s.modes()));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(Self { components })
    }

    pub fn pure(state: PureState) -> Self {
        Self {
            components: vec![(1.0, state)],
        }
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn modes(&self) -> usize {
        self.components[0].1.modes()
    }

    /// Density matrix of the sector with `total` particles, unnormalized
    /// (its trace is the sector weight).
    pub fn sector_density(&self, total: usize) -> DMatrix<Complex64> {
        let basis = enumerate_basis(self.modes(), total).expect("modes > 0");
        let mut rho = DMatrix::zeros(basis.len(), basis.len());
        for (w, s) in self.components.iter().filter(|(_, s)| s.total() == total) {
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            rho += (&v * v.adjoint()) * Complex64::new(*w, 0.0);
        }
        rho
    }
}

/// Density matrix over a list of occupation labels.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    labels: Vec<FockVector>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(labels: Vec<FockVector>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != labels.len() {
            return Err(Error::InvalidDensity(format!(
                "{}x{} matrix for {} labels",
                matrix.nrows(),
                matrix.ncols(),
                labels.len()
            )));
        }
        Ok(Self { labels, matrix })
    }

    /// Diagonal density matrix with unnamed labels; convenient for tests.
    pub fn diagonal(weights: &[f64]) -> Self {
        let labels = (0..weights.len()).map(|i| FockVector(vec![i])).collect();
        let matrix = DMatrix::from_fn(weights.len(), weights.len(), |i, j| {
            if i == j {
                Complex64::new(weights[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self { labels, matrix }
    }

    pub fn labels(&self) -> &[FockVector] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks trace 1, Hermiticity and positivity within `tolerance`.
    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tolerance || tr.im.abs() > tolerance {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let skew = (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > tolerance {
            return Err(Error::InvalidDensity(format!("not Hermitian ({skew:e})")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tolerance {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e} < 0")));
        }
        Ok(())
    }

    pub fn von_neumann_entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }
}

/// `-Σ λ log₂ λ` over the spectrum, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.validate(DENSITY_TOLERANCE)?;
    let s: f64 = rho
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    Ok(s.max(0.0))
}
