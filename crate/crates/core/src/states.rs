//! State families and the two-copy arrangement shared between the parties.
//!
//! Each copy is a two-mode state. The first copy occupies modes `(a, b)`, the
//! second `(A, B)`. Alice holds `a` and `A`, Bob holds `b` and `B`; inside a
//! [`TwoCopyArrangement`] the four modes are stored in party order
//! `(a, A, b, B)`. [`COPY_TO_PARTY`] is the single place that ordering is
//! defined.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, MixedState, PureState, WEIGHT_TOLERANCE};
use crate::optics::MAX_SECTOR_TOTAL;

/// Mode permutation from copy order `(a, b, A, B)` to party order `(a, A, b, B)`.
pub const COPY_TO_PARTY: [usize; 4] = [0, 2, 1, 3];

/// Alice's modes `(a, A)` in party order.
pub const ALICE_MODES: [usize; 2] = [0, 1];

/// Bob's modes `(b, B)` in party order.
pub const BOB_MODES: [usize; 2] = [2, 3];

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Ground state of `n` non-interacting bosons split symmetrically over two
/// modes: square-rooted binomial weights on `|k, n − k⟩`.
pub fn bec_state(n: usize) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("bec_state needs at least one particle".into()));
    }
    let norm = 0.5f64.powi(n as i32);
    let mut binom = 1.0f64;
    let mut terms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        terms.push((vec![k, n - k], real((binom * norm).sqrt())));
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    PureState::from_terms(terms)
}

/// `(|n − m, m⟩ + |m, n − m⟩)/√2`; needs `2m < n` so the two kets differ.
pub fn noon_state(n: usize, m: usize) -> Result<PureState> {
    if 2 * m >= n {
        return Err(Error::InvalidArgument(format!(
            "noon_state needs 0 <= m < N/2, got N={n}, m={m}"
        )));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_terms([(vec![n - m, m], real(h)), (vec![m, n - m], real(h))])
}

/// `c|20⟩ + √(1 − 2c²)|11⟩ + c|02⟩` for `0 ≤ c ≤ 1/√2`.
pub fn squeezed_state(c: f64) -> Result<PureState> {
    let max = std::f64::consts::FRAC_1_SQRT_2;
    if !(0.0..=max + 1e-12).contains(&c) {
        return Err(Error::InvalidArgument(format!(
            "squeezed_state needs 0 <= c <= 1/sqrt(2), got {c}"
        )));
    }
    let c = c.min(max);
    let middle = (1.0 - 2.0 * c * c).max(0.0).sqrt();
    PureState::from_terms([
        (vec![2, 0], real(c)),
        (vec![1, 1], real(middle)),
        (vec![0, 2], real(c)),
    ])
}

/// `p|ψ+⟩⟨ψ+| + (1 − p)|ψ−⟩⟨ψ−|` with `|ψ±⟩ = (|01⟩ ± |10⟩)/√2`.
///
/// Zero-weight components are dropped, so `p = 0` and `p = 1` give
/// single-component ensembles.
pub fn toy_mixed_state(p: f64) -> Result<MixedState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0, 1], got {p}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::from_terms([(vec![0, 1], real(h)), (vec![1, 0], real(h))])?;
    let minus = PureState::from_terms([(vec![0, 1], real(h)), (vec![1, 0], real(-h))])?;
    let components = [(p, plus), (1.0 - p, minus)]
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .collect();
    MixedState::new(components)
}

impl From<PureState> for MixedState {
    fn from(s: PureState) -> Self {
        MixedState::pure(s)
    }
}

/// Amplitudes of one ensemble component restricted to Alice holding
/// `alice_total` particles. Rows index Alice's `m_A` (so `(alice_total − row, row)`),
/// columns Bob's `m_B`.
#[derive(Clone, Debug)]
pub struct SectorBlock {
    pub alice_total: usize,
    pub bob_total: usize,
    pub amplitudes: DMatrix<Complex64>,
}

/// Four-mode composite in party order `(a, A, b, B)`.
#[derive(Clone, Debug)]
pub struct TwoCopyArrangement {
    components: Vec<(f64, PureState)>,
    copy_totals: (usize, usize),
    blocks: Arc<Vec<Vec<SectorBlock>>>,
}

impl TwoCopyArrangement {
    /// Wraps an ensemble already in party order.
    ///
    /// Every component must have four modes and `N + N'` particles.
    pub fn from_components(components: Vec<(f64, PureState)>, copy_totals: (usize, usize)) -> Result<Self> {
        let total = copy_totals.0 + copy_totals.1;
        if total > MAX_SECTOR_TOTAL {
            return Err(Error::InvalidArgument(format!(
                "{total} particles exceeds the supported maximum of {MAX_SECTOR_TOTAL}"
            )));
        }
        for (_, s) in &components {
            if s.modes() != 4 {
                return Err(Error::ModeCountMismatch(4, s.modes()));
            }
            if s.total() != total {
                return Err(Error::InvalidArgument(format!(
                    "component has {} particles, arrangement expects {total}",
                    s.total()
                )));
            }
        }
        // reuse the ensemble weight checks
        let components = MixedState::new(components)?.components().to_vec();
        let blocks = components.iter().map(|(_, s)| sector_blocks(s)).collect();
        Ok(Self {
            components,
            copy_totals,
            blocks: Arc::new(blocks),
        })
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    /// Particle numbers `(N, N')` of the two copies.
    pub fn copy_totals(&self) -> (usize, usize) {
        self.copy_totals
    }

    pub fn total(&self) -> usize {
        self.copy_totals.0 + self.copy_totals.1
    }

    pub fn is_pure(&self) -> bool {
        self.components.len() == 1
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self.components.as_slice() {
            [(_, s)] => Some(s),
            _ => None,
        }
    }

    /// Nonzero Alice-sector blocks, one list per ensemble component.
    pub fn blocks(&self) -> &[Vec<SectorBlock>] {
        &self.blocks
    }

    /// Probability that Alice holds `k` particles, for `k = 0..=total`.
    pub fn alice_particle_distribution(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.total() + 1];
        for ((w, _), blocks) in self.components.iter().zip(self.blocks.iter()) {
            for b in blocks {
                q[b.alice_total] += w * b.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
            }
        }
        q
    }

    /// Conditions on Alice holding exactly `alice_particles`; returns the
    /// probability of that event and the renormalized arrangement.
    pub fn project_alice_total(&self, alice_particles: usize) -> Result<(f64, TwoCopyArrangement)> {
        const MIN_PROBABILITY: f64 = 1e-12;
        let keep = |v: &crate::fock::FockVector| {
            let o = v.occupations();
            o[0] + o[1] == alice_particles
        };
        let mut probability = 0.0;
        let mut parts = Vec::new();
        for (w, s) in &self.components {
            let (p, projected) = s.project(keep);
            probability += w * p;
            if let Some(proj) = projected {
                parts.push((w * p, proj));
            }
        }
        if probability <= MIN_PROBABILITY || alice_particles > self.total() {
            return Err(Error::ZeroProjection {
                particles: alice_particles,
                probability,
            });
        }
        let mut components: Vec<_> = parts.into_iter().map(|(w, s)| (w / probability, s)).collect();
        renormalize_weights(&mut components);
        let arrangement = Self::from_components(components, self.copy_totals)?;
        Ok((probability, arrangement))
    }

    /// True when every component keeps the second copy's particle number
    /// (`n_A + n_B`) fixed. Correlations then depend only on phase
    /// differences between the parties.
    pub fn has_fixed_second_copy_number(&self) -> bool {
        self.components.iter().all(|(_, s)| {
            let mut seen = None;
            s.iter().filter(|(_, a)| a.norm_sqr() > 0.0).all(|(v, _)| {
                let o = v.occupations();
                let n = o[1] + o[3];
                *seen.get_or_insert(n) == n
            })
        })
    }
}

fn renormalize_weights(components: &mut [(f64, PureState)]) {
    let sum: f64 = components.iter().map(|(w, _)| w).sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE / 10.0 {
        components.iter_mut().for_each(|(w, _)| *w /= sum);
    }
}

fn sector_blocks(state: &PureState) -> Vec<SectorBlock> {
    let total = state.total();
    let mut blocks: Vec<SectorBlock> = (0..=total)
        .map(|m| SectorBlock {
            alice_total: m,
            bob_total: total - m,
            amplitudes: DMatrix::zeros(m + 1, total - m + 1),
        })
        .collect();
    for (v, a) in state.iter() {
        let o = v.occupations();
        let m = o[0] + o[1];
        blocks[m].amplitudes[(o[1], o[3])] += a;
    }
    blocks
        .into_iter()
        .filter(|b| b.amplitudes.iter().any(|a| a.norm_sqr() > 0.0))
        .collect()
}

/// Tensor product of two two-mode copies, rearranged so Alice owns `(a, A)`
/// and Bob owns `(b, B)`. Ensemble weights multiply.
pub fn two_copy(first: impl Into<MixedState>, second: impl Into<MixedState>) -> Result<TwoCopyArrangement> {
    let first: MixedState = first.into();
    let second: MixedState = second.into();
    let n1 = single_total(&first)?;
    let n2 = single_total(&second)?;
    let mut components = Vec::new();
    for (w1, s1) in first.components() {
        for (w2, s2) in second.components() {
            let joined = s1.tensor(s2).permute_modes(&COPY_TO_PARTY)?;
            components.push((w1 * w2, joined));
        }
    }
    renormalize_weights(&mut components);
    TwoCopyArrangement::from_components(components, (n1, n2))
}

fn single_total(state: &MixedState) -> Result<usize> {
    if state.modes() != 2 {
        return Err(Error::ModeCountMismatch(2, state.modes()));
    }
    let n = state.components()[0].1.total();
    if state.components().iter().any(|(_, s)| s.total() != n) {
        return Err(Error::InvalidArgument(
            "each copy must have a definite particle number".into(),
        ));
    }
    Ok(n)
}

/// Vacuum on two modes; the trivial copy.
pub fn vacuum_copy() -> PureState {
    PureState::vacuum(2).expect("two modes")
}

/// Every two-mode basis state of `total` particles with equal weight; used to
/// build separable reference ensembles in tests and diagnostics.
pub fn number_sector_basis(total: usize) -> Vec<PureState> {
    let basis = enumerate_basis(2, total).expect("two modes");
    basis
        .vectors()
        .iter()
        .map(|v| PureState::from_terms([(v.occupations().to_vec(), real(1.0))]).expect("basis state"))
        .collect()
}
