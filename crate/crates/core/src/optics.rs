//! Two-mode beamsplitters acting on Fock states.
//!
//! A beamsplitter with transmissivity amplitudes `alpha`, `beta` and phase
//! `phase` (φ) maps the input creation operators `a†`, `A†` to output ports
//!
//! ```text
//! c† = α a† + β e^{-iφ} A†
//! C† = β a† − α e^{-iφ} A†
//! ```
//!
//! so the output number state `|n, m⟩_{cC}` expands over input occupations as
//! `(c†)^n (C†)^m / √(n! m!) |0,0⟩`. Measuring the output ports in the number
//! basis turns an input amplitude vector `ψ` into `W† ψ`, where
//! `W[j][k] = ⟨j | out_k⟩` is the lift of the single-particle matrix to one
//! particle-number sector. The lift never mixes sectors.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, FockBasis, FockVector, PureState};

/// Largest sector total the factorial table supports.
pub const MAX_SECTOR_TOTAL: usize = 34;

const PARAM_TOLERANCE: f64 = 1e-12;

fn factorials() -> &'static [f64; MAX_SECTOR_TOTAL + 1] {
    static TABLE: OnceLock<[f64; MAX_SECTOR_TOTAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_SECTOR_TOTAL + 1];
        for i in 1..=MAX_SECTOR_TOTAL {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let f = factorials();
    f[n] / (f[k] * f[n - k])
}

/// One party's beamsplitter: amplitudes `alpha`, `beta` and phase in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BeamsplitterParams {
    alpha: f64,
    beta: f64,
    phase: f64,
}

impl BeamsplitterParams {
    pub fn new(alpha: f64, beta: f64, phase: f64) -> Result<Self> {
        let ok = alpha.is_finite()
            && beta.is_finite()
            && phase.is_finite()
            && alpha >= 0.0
            && beta >= 0.0
            && (alpha * alpha + beta * beta - 1.0).abs() <= PARAM_TOLERANCE;
        if !ok {
            return Err(Error::InvalidBeamsplitter { alpha, beta });
        }
        Ok(Self { alpha, beta, phase })
    }

    /// 50:50 beamsplitter, `α = β = 1/√2`.
    pub fn balanced(phase: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: h,
            beta: h,
            phase,
        }
    }

    /// Beamsplitter with `β = √(1 − α²)`.
    pub fn with_alpha(alpha: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidBeamsplitter { alpha, beta: f64::NAN });
        }
        Self::new(alpha, (1.0 - alpha * alpha).max(0.0).sqrt(), phase)
    }

    /// `α = |cos θ|`, `β = |sin θ|`; any real `θ` is valid.
    pub fn from_mixing_angle(theta: f64, phase: f64) -> Self {
        Self {
            alpha: theta.cos().abs(),
            beta: theta.sin().abs(),
            phase,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self { phase, ..*self }
    }
}

/// `[[α, β e^{-iφ}], [β, −α e^{-iφ}]]`: row `k` gives output creation
/// operator `k` in terms of the input creation operators.
pub fn single_particle_matrix(params: &BeamsplitterParams) -> Matrix2<Complex64> {
    let BeamsplitterParams { alpha, beta, phase } = *params;
    let e = Complex64::from_polar(1.0, -phase);
    Matrix2::new(
        Complex64::new(alpha, 0.0),
        e * beta,
        Complex64::new(beta, 0.0),
        -e * alpha,
    )
}

/// Arbitrary two-mode unitary in the same row convention as
/// [`single_particle_matrix`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeTransform {
    matrix: Matrix2<Complex64>,
}

impl ModeTransform {
    pub fn from_params(params: &BeamsplitterParams) -> Self {
        Self {
            matrix: single_particle_matrix(params),
        }
    }

    pub fn from_matrix(matrix: Matrix2<Complex64>) -> Result<Self> {
        let dev = (matrix.adjoint() * matrix - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev.is_nan() || dev > PARAM_TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    /// The transform undoing this one.
    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `W[j][k] = ⟨j | out_k⟩` over the two-mode sector with `total` particles.
    pub fn sector_lift(&self, total: usize) -> Result<DMatrix<Complex64>> {
        sector_lift(&self.matrix, total)
    }
}

fn sector_lift(u: &Matrix2<Complex64>, total: usize) -> Result<DMatrix<Complex64>> {
    if total > MAX_SECTOR_TOTAL {
        return Err(Error::InvalidArgument(format!(
            "sector total {total} exceeds the supported maximum {MAX_SECTOR_TOTAL}"
        )));
    }
    let f = factorials();
    let dim = total + 1;
    // sector basis in descending order: index i <-> (total - i, i)
    let mut w = DMatrix::<Complex64>::zeros(dim, dim);
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    for k in 0..dim {
        let (n, m) = (total - k, k);
        let norm_out = (f[n] * f[m]).sqrt();
        for r in 0..=n {
            let first = u00.powu(r as u32) * u01.powu((n - r) as u32) * binomial(n, r);
            for s in 0..=m {
                let second = u10.powu(s as u32) * u11.powu((m - s) as u32) * binomial(m, s);
                let p = r + s;
                let q = total - p;
                w[(q, k)] += first * second * ((f[p] * f[q]).sqrt() / norm_out);
            }
        }
    }
    Ok(w)
}

/// Input-occupation expansion `⟨n_a, m_A | n_out, m_out⟩` of one output
/// number state, indexed by the descending sector basis
/// `(total, 0), (total − 1, 1), …, (0, total)`.
pub fn measurement_projector_amplitudes(
    n_out: usize,
    m_out: usize,
    params: &BeamsplitterParams,
    total: usize,
) -> Result<Vec<Complex64>> {
    if n_out + m_out != total {
        return Err(Error::SectorMismatch {
            n: n_out,
            m: m_out,
            total,
        });
    }
    let w = ModeTransform::from_params(params).sector_lift(total)?;
    Ok(w.column(m_out).iter().copied().collect())
}

/// Sends modes `pair.0`, `pair.1` of `state` through the beamsplitter and
/// returns the state in the output-port number basis (output `c` replaces
/// `pair.0`, output `C` replaces `pair.1`).
pub fn apply_beamsplitter(
    state: &PureState,
    pair: (usize, usize),
    params: &BeamsplitterParams,
) -> Result<PureState> {
    apply_transform(state, pair, &ModeTransform::from_params(params))
}

/// [`apply_beamsplitter`] for an arbitrary two-mode unitary.
pub fn apply_transform(
    state: &PureState,
    pair: (usize, usize),
    transform: &ModeTransform,
) -> Result<PureState> {
    let modes = state.modes();
    let (i, j) = pair;
    for idx in [i, j] {
        if idx >= modes {
            return Err(Error::ModeOutOfRange { index: idx, modes });
        }
    }
    if i == j {
        return Err(Error::DegenerateModePair(i, j));
    }
    let basis: &FockBasis = state.basis();
    let mut lifts: HashMap<usize, DMatrix<Complex64>> = HashMap::new();
    let mut out = vec![Complex64::new(0.0, 0.0); basis.len()];
    for (v, a) in state.iter() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let occ = v.occupations();
        let t = occ[i] + occ[j];
        if let std::collections::hash_map::Entry::Vacant(e) = lifts.entry(t) {
            e.insert(transform.sector_lift(t)?);
        }
        let w = &lifts[&t];
        let row = occ[j];
        let mut target = occ.to_vec();
        for k in 0..=t {
            let coeff = w[(row, k)].conj();
            if coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            target[i] = t - k;
            target[j] = k;
            let idx = basis
                .index_of(&FockVector::new(target.clone()))
                .expect("particle number is conserved");
            out[idx] += coeff * a;
        }
    }
    PureState::new(state.shared_basis(), out)
}

type LiftKey = (u64, u64, usize);

/// Per-sector measurement matrices shared across evaluations.
///
/// Entries are keyed by `(α, β, total)`; the phase enters as a diagonal
/// factor applied on lookup, so the cache stays small under continuous phase
/// optimization. Concurrent misses may compute the same entry twice; the
/// first insert wins.
#[derive(Debug, Default)]
pub struct LiftCache {
    entries: RwLock<HashMap<LiftKey, Arc<DMatrix<Complex64>>>>,
}

impl LiftCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().map(|e| e.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn phase_free_adjoint(&self, params: &BeamsplitterParams, total: usize) -> Arc<DMatrix<Complex64>> {
        let key = (params.alpha.to_bits(), params.beta.to_bits(), total);
        if let Some(hit) = self.entries.read().ok().and_then(|e| e.get(&key).cloned()) {
            return hit;
        }
        let w0 = ModeTransform::from_params(&params.with_phase(0.0))
            .sector_lift(total)
            .expect("sector total within table");
        let computed = Arc::new(w0.adjoint());
        match self.entries.write() {
            Ok(mut e) => Arc::clone(e.entry(key).or_insert(computed)),
            Err(_) => computed,
        }
    }

    /// `W†` for the given setting and sector: maps input amplitudes (descending
    /// sector basis) to output-port amplitudes.
    pub fn measurement_matrix(&self, params: &BeamsplitterParams, total: usize) -> DMatrix<Complex64> {
        let base = self.phase_free_adjoint(params, total);
        let mut m = (*base).clone();
        for q in 1..=total {
            let phase = Complex64::from_polar(1.0, q as f64 * params.phase);
            m.column_mut(q).iter_mut().for_each(|x| *x *= phase);
        }
        m
    }
}

/// Two-mode number basis for one sector, exposed for callers assembling
/// per-sector blocks.
pub fn two_mode_sector(total: usize) -> FockBasis {
    enumerate_basis(2, total).expect("two modes")
}
