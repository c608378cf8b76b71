//! Binned local observables, joint outcome distributions and the CHSH-type
//! Bell combination.
//!
//! Each party sends its two modes through a beamsplitter and counts
//! `(n, m)` particles in the two output ports. The outcome is binned to ±1 by
//! [`epsilon`]. Correlations are evaluated sector by sector: a component with
//! Alice holding `M` particles is an `(M + 1) × (T − M + 1)` amplitude block,
//! and both measurements act on it as small dense matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{MixedState, NORM_TOLERANCE};
use crate::optics::{BeamsplitterParams, LiftCache};
use crate::states::TwoCopyArrangement;

/// Probabilities this far below zero are treated as rounding noise.
pub const PROBABILITY_FLOOR: f64 = -1e-12;

/// Sharp-binning sign `(−1)^{m + (m+n)(m+n+1)/2}` of outcome `(n, m)`.
pub fn epsilon(n: usize, m: usize) -> i8 {
    let t = n + m;
    if (m + t * (t + 1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// How a party's outcome `(n, m)` is turned into a real weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// [`epsilon`] on every outcome.
    #[default]
    Sharp,
    /// [`epsilon`] on single-particle outcomes, zero elsewhere. This is the
    /// observable of the one-particle toy model, which never looks outside
    /// that sector.
    SingleParticleSector,
}

impl Binning {
    pub fn weight(self, n: usize, m: usize) -> f64 {
        match self {
            Binning::Sharp => f64::from(epsilon(n, m)),
            Binning::SingleParticleSector if n + m == 1 => f64::from(epsilon(n, m)),
            Binning::SingleParticleSector => 0.0,
        }
    }
}

/// One party's beamsplitter setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasurementSetting {
    pub params: BeamsplitterParams,
}

impl MeasurementSetting {
    pub fn new(params: BeamsplitterParams) -> Self {
        Self { params }
    }

    pub fn balanced(phase: f64) -> Self {
        Self::new(BeamsplitterParams::balanced(phase))
    }

    pub fn phase(&self) -> f64 {
        self.params.phase()
    }
}

/// Two settings per party.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellSettings {
    pub alice: (MeasurementSetting, MeasurementSetting),
    pub bob: (MeasurementSetting, MeasurementSetting),
}

impl BellSettings {
    /// Balanced beamsplitters at phases `[φ_A1, φ_A2, φ_B1, φ_B2]`.
    pub fn balanced(angles: [f64; 4]) -> Self {
        let [a1, a2, b1, b2] = angles.map(MeasurementSetting::balanced);
        Self {
            alice: (a1, a2),
            bob: (b1, b2),
        }
    }

    /// Phases `[φ_A1, φ_A2, φ_B1, φ_B2]` with one transmissivity amplitude per
    /// party.
    pub fn with_transmissivity(angles: [f64; 4], alpha_alice: f64, alpha_bob: f64) -> Result<Self> {
        let a = |phase, alpha| BeamsplitterParams::with_alpha(alpha, phase).map(MeasurementSetting::new);
        Ok(Self {
            alice: (a(angles[0], alpha_alice)?, a(angles[1], alpha_alice)?),
            bob: (a(angles[2], alpha_bob)?, a(angles[3], alpha_bob)?),
        })
    }

    pub fn angles(&self) -> [f64; 4] {
        [
            self.alice.0.phase(),
            self.alice.1.phase(),
            self.bob.0.phase(),
            self.bob.1.phase(),
        ]
    }

    /// Same transmissivities, new phases.
    pub fn with_angles(&self, angles: [f64; 4]) -> Self {
        let s = |m: MeasurementSetting, phase| MeasurementSetting::new(m.params.with_phase(phase));
        Self {
            alice: (s(self.alice.0, angles[0]), s(self.alice.1, angles[1])),
            bob: (s(self.bob.0, angles[2]), s(self.bob.1, angles[3])),
        }
    }

    /// Adds `offset` to all four phases.
    pub fn shifted(&self, offset: f64) -> Self {
        self.with_angles(self.angles().map(|a| a + offset))
    }
}

/// Probabilities of `(n_c, m_C, n_d, m_D)`: Alice's two output ports, then
/// Bob's.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointDistribution {
    total: usize,
    entries: BTreeMap<[usize; 4], f64>,
}

impl JointDistribution {
    /// Validates and clamps an outcome table.
    pub fn new(total: usize, entries: BTreeMap<[usize; 4], f64>) -> Result<Self> {
        let mut clean = BTreeMap::new();
        let mut sum = 0.0;
        for (key, p) in entries {
            if key.iter().sum::<usize>() != total {
                return Err(Error::InvalidArgument(format!(
                    "outcome {key:?} does not hold {total} particles"
                )));
            }
            if p < PROBABILITY_FLOOR || !p.is_finite() {
                return Err(Error::NegativeProbability(p));
            }
            let p = p.max(0.0);
            sum += p;
            clean.insert(key, p);
        }
        if (sum - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                norm: sum,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(Self { total, entries: clean })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn entries(&self) -> &BTreeMap<[usize; 4], f64> {
        &self.entries
    }

    pub fn probability(&self, outcome: [usize; 4]) -> f64 {
        self.entries.get(&outcome).copied().unwrap_or(0.0)
    }

    /// Σ w_A(n_c, m_C) w_B(n_d, m_D) P.
    pub fn expectation(&self, binning: Binning) -> f64 {
        self.entries
            .iter()
            .map(|([nc, mc, nd, md], p)| binning.weight(*nc, *mc) * binning.weight(*nd, *md) * p)
            .sum()
    }

    /// Alice's marginal over `(n_c, m_C)`.
    pub fn alice_marginal(&self) -> BTreeMap<(usize, usize), f64> {
        let mut out = BTreeMap::new();
        for ([nc, mc, _, _], p) in &self.entries {
            *out.entry((*nc, *mc)).or_insert(0.0) += p;
        }
        out
    }

    /// Bob's marginal over `(n_d, m_D)`.
    pub fn bob_marginal(&self) -> BTreeMap<(usize, usize), f64> {
        let mut out = BTreeMap::new();
        for ([_, _, nd, md], p) in &self.entries {
            *out.entry((*nd, *md)).or_insert(0.0) += p;
        }
        out
    }
}

/// Every outcome `(n, m)` one party can record when the pair holds `total`
/// particles.
pub fn party_outcomes(total: usize) -> Vec<(usize, usize)> {
    (0..=total)
        .flat_map(|t| (0..=t).map(move |m| (t - m, m)))
        .collect()
}

/// Evaluates measurements with a shared lift cache.
///
/// The cache is keyed by transmissivity, so one evaluator per fixed-α sweep
/// keeps it small.
#[derive(Debug, Default)]
pub struct BellEvaluator {
    cache: LiftCache,
}

impl BellEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cache(&self) -> &LiftCache {
        &self.cache
    }

    /// Calls `f(weight, alice_total, bob_total, output_amplitudes)` for every
    /// nonzero sector block of every ensemble component.
    fn for_each_output_block(
        &self,
        state: &TwoCopyArrangement,
        alice: &MeasurementSetting,
        bob: &MeasurementSetting,
        mut f: impl FnMut(f64, usize, usize, &DMatrix<Complex64>),
    ) {
        let total = state.total();
        let mut alice_ops: Vec<Option<DMatrix<Complex64>>> = vec![None; total + 1];
        let mut bob_ops: Vec<Option<DMatrix<Complex64>>> = vec![None; total + 1];
        for ((w, _), blocks) in state.components().iter().zip(state.blocks()) {
            for b in blocks {
                let ua = alice_ops[b.alice_total]
                    .get_or_insert_with(|| self.cache.measurement_matrix(&alice.params, b.alice_total));
                let ub = bob_ops[b.bob_total]
                    .get_or_insert_with(|| self.cache.measurement_matrix(&bob.params, b.bob_total));
                let out = &*ua * &b.amplitudes * ub.transpose();
                f(*w, b.alice_total, b.bob_total, &out);
            }
        }
    }

    pub fn joint_distribution(
        &self,
        state: &TwoCopyArrangement,
        alice: &MeasurementSetting,
        bob: &MeasurementSetting,
    ) -> JointDistribution {
        let mut entries = BTreeMap::new();
        self.for_each_output_block(state, alice, bob, |w, ma, mb, out| {
            for ka in 0..=ma {
                for kb in 0..=mb {
                    let p = w * out[(ka, kb)].norm_sqr();
                    *entries.entry([ma - ka, ka, mb - kb, kb]).or_insert(0.0) += p;
                }
            }
        });
        JointDistribution {
            total: state.total(),
            entries,
        }
    }

    pub fn correlation(
        &self,
        state: &TwoCopyArrangement,
        alice: &MeasurementSetting,
        bob: &MeasurementSetting,
    ) -> f64 {
        self.correlation_with(state, alice, bob, Binning::Sharp)
    }

    pub fn correlation_with(
        &self,
        state: &TwoCopyArrangement,
        alice: &MeasurementSetting,
        bob: &MeasurementSetting,
        binning: Binning,
    ) -> f64 {
        let mut e = 0.0;
        self.for_each_output_block(state, alice, bob, |w, ma, mb, out| {
            for ka in 0..=ma {
                let sa = binning.weight(ma - ka, ka);
                if sa == 0.0 {
                    continue;
                }
                for kb in 0..=mb {
                    e += w * sa * binning.weight(mb - kb, kb) * out[(ka, kb)].norm_sqr();
                }
            }
        });
        e
    }

    /// `E11 + E12 + E21 − E22` without the absolute value.
    pub fn chsh(&self, state: &TwoCopyArrangement, settings: &BellSettings) -> f64 {
        let (a1, a2) = &settings.alice;
        let (b1, b2) = &settings.bob;
        self.correlation(state, a1, b1) + self.correlation(state, a1, b2) + self.correlation(state, a2, b1)
            - self.correlation(state, a2, b2)
    }

    pub fn bell_term(&self, state: &TwoCopyArrangement, settings: &BellSettings) -> f64 {
        self.chsh(state, settings).abs()
    }

    /// Bell term after conditioning on Alice holding `alice_particles`.
    pub fn postselected_bell_term(
        &self,
        state: &TwoCopyArrangement,
        settings: &BellSettings,
        alice_particles: usize,
    ) -> Result<f64> {
        let (_, projected) = state.project_alice_total(alice_particles)?;
        Ok(self.bell_term(&projected, settings))
    }
}

pub fn joint_distribution(
    state: &TwoCopyArrangement,
    alice: &MeasurementSetting,
    bob: &MeasurementSetting,
) -> JointDistribution {
    BellEvaluator::new().joint_distribution(state, alice, bob)
}

pub fn correlation(state: &TwoCopyArrangement, alice: &MeasurementSetting, bob: &MeasurementSetting) -> f64 {
    BellEvaluator::new().correlation(state, alice, bob)
}

pub fn correlation_with(
    state: &TwoCopyArrangement,
    alice: &MeasurementSetting,
    bob: &MeasurementSetting,
    binning: Binning,
) -> f64 {
    BellEvaluator::new().correlation_with(state, alice, bob, binning)
}

pub fn bell_term(state: &TwoCopyArrangement, settings: &BellSettings) -> f64 {
    BellEvaluator::new().bell_term(state, settings)
}

pub fn postselected_bell_term(
    state: &TwoCopyArrangement,
    settings: &BellSettings,
    alice_particles: usize,
) -> Result<f64> {
    BellEvaluator::new().postselected_bell_term(state, settings, alice_particles)
}

/// Correlation of a single two-mode copy when Alice counts mode `a` and Bob
/// counts mode `b` directly, each binned with `ε(n, 0)`.
pub fn number_basis_correlation(state: &MixedState) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::ModeCountMismatch(2, state.modes()));
    }
    Ok(state
        .components()
        .iter()
        .flat_map(|(w, s)| {
            s.iter().map(move |(v, a)| {
                let o = v.occupations();
                w * a.norm_sqr() * f64::from(epsilon(o[0], 0) * epsilon(o[1], 0))
            })
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::PureState;
    use crate::optics::apply_beamsplitter;
    use crate::states::{bec_state, noon_state, toy_mixed_state, two_copy, vacuum_copy};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn pair(n: usize) -> TwoCopyArrangement {
        two_copy(bec_state(n).unwrap(), bec_state(n).unwrap()).unwrap()
    }

    fn bal(phase: f64) -> MeasurementSetting {
        MeasurementSetting::balanced(phase)
    }

    // Route through the full four-mode state, independent of the block code.
    fn brute_distribution(state: &TwoCopyArrangement, a: &MeasurementSetting, b: &MeasurementSetting) -> BTreeMap<[usize; 4], f64> {
        let mut out = BTreeMap::new();
        for (w, s) in state.components() {
            let s = apply_beamsplitter(s, (0, 1), &a.params).unwrap();
            let s = apply_beamsplitter(&s, (2, 3), &b.params).unwrap();
            for (v, amp) in s.iter() {
                let o = v.occupations();
                *out.entry([o[0], o[1], o[2], o[3]]).or_insert(0.0) += w * amp.norm_sqr();
            }
        }
        out
    }

    #[test]
    fn epsilon_table() {
        assert_eq!(epsilon(0, 0), 1);
        assert_eq!(epsilon(1, 0), -1);
        assert_eq!(epsilon(0, 1), 1);
        assert_eq!(epsilon(2, 0), -1);
        assert_eq!(epsilon(1, 1), 1);
        assert_eq!(epsilon(0, 2), -1);
    }

    #[test]
    fn epsilon_matches_exponent() {
        for t in 0..=12usize {
            for m in 0..=t {
                let exponent = (m + t * (t + 1) / 2) as i32;
                assert_eq!(f64::from(epsilon(t - m, m)), (-1f64).powi(exponent));
            }
        }
    }

    #[test]
    fn binning_weights() {
        assert_eq!(Binning::SingleParticleSector.weight(0, 0), 0.0);
        assert_eq!(Binning::SingleParticleSector.weight(1, 0), -1.0);
        assert_eq!(Binning::SingleParticleSector.weight(0, 1), 1.0);
        assert_eq!(Binning::SingleParticleSector.weight(1, 1), 0.0);
    }

    #[test]
    fn outcome_count() {
        for t in 1..=8usize {
            let expected = (t as f64 / 2.0 + 1.0) * (t as f64 + 1.0);
            assert_eq!(party_outcomes(t).len() as f64, expected);
        }
    }

    #[test]
    fn distribution_matches_full_state_route() {
        let states = [
            pair(1),
            pair(2),
            two_copy(noon_state(3, 1).unwrap(), bec_state(2).unwrap()).unwrap(),
            two_copy(toy_mixed_state(0.3).unwrap(), toy_mixed_state(0.8).unwrap()).unwrap(),
        ];
        let a = MeasurementSetting::new(BeamsplitterParams::with_alpha(0.6, 0.7).unwrap());
        let b = bal(2.1);
        for s in &states {
            let fast = joint_distribution(s, &a, &b);
            let brute = brute_distribution(s, &a, &b);
            for (k, p) in &brute {
                assert_abs_diff_eq!(fast.probability(*k), *p, epsilon = 1e-13);
            }
            let sum: f64 = fast.entries().values().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_particle_pair_sectors() {
        // Alice ends up with 0, 1 or 2 particles with probabilities ¼, ½, ¼
        let d = joint_distribution(&pair(1), &bal(0.0), &bal(0.0));
        let by_alice = |m: usize| -> f64 {
            d.entries().iter().filter(|(k, _)| k[0] + k[1] == m).map(|(_, p)| p).sum()
        };
        assert_abs_diff_eq!(by_alice(0), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(by_alice(1), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(by_alice(2), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn vacuum_pair() {
        let s = two_copy(vacuum_copy(), vacuum_copy()).unwrap();
        let d = joint_distribution(&s, &bal(0.3), &bal(1.0));
        assert_eq!(d.entries().len(), 1);
        assert_abs_diff_eq!(d.probability([0, 0, 0, 0]), 1.0);
    }

    #[test]
    fn closed_forms() {
        let noon = two_copy(noon_state(2, 0).unwrap(), noon_state(2, 0).unwrap()).unwrap();
        for (fa, fb) in [(0.0, 0.0), (0.3, 2.0), (4.0, 1.1), (-1.0, 5.5)] {
            let d: f64 = fa - fb;
            // the ε table makes odd N negative: E_N = (−1)^N sin^{2N}(Δ/2)
            assert_abs_diff_eq!(correlation(&pair(1), &bal(fa), &bal(fb)), -(d / 2.0).sin().powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(correlation(&pair(2), &bal(fa), &bal(fb)), (d / 2.0).sin().powi(4), epsilon = 1e-12);
            assert_abs_diff_eq!(correlation(&noon, &bal(fa), &bal(fb)), d.cos().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn toy_correlation_balanced() {
        for p in [0.0, 0.25, 0.5, 1.0] {
            let s = two_copy(toy_mixed_state(p).unwrap(), toy_mixed_state(p).unwrap()).unwrap();
            for d in [0.0, 1.0, 2.5] {
                let e = correlation_with(&s, &bal(d), &bal(0.0), Binning::SingleParticleSector);
                assert_abs_diff_eq!(e, 2.0 * (p - 0.5).powi(2) * d.cos(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_numbers_are_uncorrelated() {
        for (n1, n2) in [(1, 2), (2, 1), (1, 3), (2, 3)] {
            let s = two_copy(bec_state(n1).unwrap(), bec_state(n2).unwrap()).unwrap();
            for (fa, fb) in [(0.0, 0.0), (0.7, 2.9)] {
                assert_abs_diff_eq!(correlation(&s, &bal(fa), &bal(fb)), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn no_signalling() {
        let s = two_copy(bec_state(2).unwrap(), noon_state(3, 1).unwrap()).unwrap();
        let a = bal(0.4);
        let m1 = joint_distribution(&s, &a, &bal(0.0)).alice_marginal();
        let m2 = joint_distribution(&s, &a, &MeasurementSetting::new(BeamsplitterParams::with_alpha(0.3, 2.0).unwrap()))
            .alice_marginal();
        for (k, p) in &m1 {
            assert_abs_diff_eq!(*p, m2.get(k).copied().unwrap_or(0.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn bell_term_at_equal_settings() {
        let s = BellSettings::balanced([0.4, 0.4, 1.9, 1.9]);
        let e = correlation(&pair(1), &bal(0.4), &bal(1.9));
        assert_abs_diff_eq!(bell_term(&pair(1), &s), (2.0 * e).abs(), epsilon = 1e-12);
    }

    #[test]
    fn single_particle_pair_reaches_one_plus_root_two() {
        // E = sin²(Δ/2): three terms give sin²(3π/8), the subtracted one sin²(π/8)
        let s = BellSettings::balanced([0.0, PI / 2.0, 5.0 * PI / 4.0, 3.0 * PI / 4.0]);
        assert_abs_diff_eq!(bell_term(&pair(1), &s), 1.0 + 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn postselection_projects_onto_entangled_pair() {
        let s = pair(1);
        // (|1001⟩ + |0110⟩)/√2 has E = cos Δ, which reaches 2√2
        let (_, proj) = s.project_alice_total(1).unwrap();
        let e = correlation(&proj, &bal(0.6), &bal(0.0));
        assert_abs_diff_eq!(e, (0.6f64).cos(), epsilon = 1e-12);
        let settings = BellSettings::balanced([0.0, PI / 2.0, PI / 4.0 + PI, -PI / 4.0 + PI]);
        let v = postselected_bell_term(&s, &settings, 1).unwrap();
        assert_abs_diff_eq!(v, 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert!(postselected_bell_term(&s, &settings, 2).unwrap() <= 2.0 + 1e-12);
        assert!(matches!(
            postselected_bell_term(&s, &settings, 3),
            Err(Error::ZeroProjection { .. })
        ));
    }

    #[test]
    fn number_basis_on_single_copy() {
        for p in [0.0, 0.3, 1.0] {
            let e = number_basis_correlation(&toy_mixed_state(p).unwrap()).unwrap();
            assert_abs_diff_eq!(e, -1.0, epsilon = 1e-15);
        }
        let three = MixedState::pure(PureState::vacuum(3).unwrap());
        assert!(number_basis_correlation(&three).is_err());
    }

    #[test]
    fn distribution_validation() {
        let mut e = BTreeMap::new();
        e.insert([1, 0, 0, 0], 1.0 + 1e-13);
        e.insert([0, 1, 0, 0], -1e-13);
        let d = JointDistribution::new(1, e).unwrap();
        assert_eq!(d.probability([0, 1, 0, 0]), 0.0);

        let mut e = BTreeMap::new();
        e.insert([1, 0, 0, 0], 1.1);
        e.insert([0, 1, 0, 0], -0.1);
        assert!(matches!(JointDistribution::new(1, e), Err(Error::NegativeProbability(_))));

        let mut e = BTreeMap::new();
        e.insert([1, 1, 0, 0], 1.0);
        assert!(JointDistribution::new(1, e).is_err());

        let mut e = BTreeMap::new();
        e.insert([1, 0, 0, 0], 0.5);
        assert!(matches!(JointDistribution::new(1, e), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn settings_helpers() {
        let s = BellSettings::balanced([0.1, 0.2, 0.3, 0.4]);
        assert_eq!(s.angles(), [0.1, 0.2, 0.3, 0.4]);
        let shifted = s.shifted(1.0).angles();
        for (a, b) in shifted.iter().zip([1.1, 1.2, 1.3, 1.4]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let t = BellSettings::with_transmissivity([0.0; 4], 0.6, 0.8).unwrap();
        assert_abs_diff_eq!(t.alice.1.params.alpha(), 0.6);
        assert_abs_diff_eq!(t.bob.0.params.alpha(), 0.8);
        assert!(BellSettings::with_transmissivity([0.0; 4], 1.2, 0.8).is_err());
    }
}
