//! Entanglement accessible under the superselection rule.
//!
//! The pair is projected onto each fixed number of particles on Alice's side;
//! the von Neumann entropy of Alice's reduced state is averaged with the
//! projection probabilities as weights.

use crate::error::{Error, Result};
use crate::fock::von_neumann_entropy;
use crate::states::{TwoCopyArrangement, ALICE_MODES};

/// Projections less likely than this are skipped.
const MIN_SECTOR_PROBABILITY: f64 = 1e-14;

/// `Σ_M q_M S(ρ_A | M)` in bits, for a pure arrangement.
pub fn projected_entropy(state: &TwoCopyArrangement) -> Result<f64> {
    if state.as_pure().is_none() {
        return Err(Error::InvalidArgument("projected entropy needs a pure state".into()));
    }
    let q = state.alice_particle_distribution();
    let mut total = 0.0;
    for (m, &qm) in q.iter().enumerate() {
        if qm <= MIN_SECTOR_PROBABILITY {
            continue;
        }
        let (_, projected) = state.project_alice_total(m)?;
        let pure = projected.as_pure().expect("projection of a pure state is pure");
        let rho = pure.reduced_density(&ALICE_MODES)?;
        total += qm * von_neumann_entropy(&rho)?;
    }
    Ok(total)
}
