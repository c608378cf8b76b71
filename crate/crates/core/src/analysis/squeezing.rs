//! Spin-squeezing parameter of a two-mode state.
//!
//! With `S_z = ½(a†a − b†b)`, `S_x = ½(a†b + b†a)` and
//! `S_y = (i/2)(a†b − b†a)`, `E_S² = N Var(S_z) / (⟨S_x⟩² + ⟨S_y⟩²)`.
//! `E_S < 1` certifies spin squeezing.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::PureState;

/// Mean-spin lengths below this leave `E_S` undefined.
pub const MIN_MEAN_SPIN: f64 = 1e-12;

/// Spin component whose variance enters the numerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinComponent {
    /// Number difference between the modes.
    Z,
    /// Relative phase quadrature orthogonal to `S_x`.
    Y,
}

/// Amplitudes `c[n_a]` of `|n_a, N − n_a⟩`.
fn coefficients(state: &PureState) -> Vec<Complex64> {
    let n = state.total();
    (0..=n).map(|na| state.amplitude(&[na, n - na])).collect()
}

/// `a†b ψ` in the same coefficient layout.
fn raise(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    for na in 0..n {
        out[na + 1] = c[na] * (((na + 1) * (n - na)) as f64).sqrt();
    }
    out
}

/// `b†a ψ`.
fn lower(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    for na in 1..=n {
        out[na - 1] = c[na] * ((na * (n - na + 1)) as f64).sqrt();
    }
    out
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(⟨S⟩, Var S)` from `S ψ`.
fn moments(c: &[Complex64], s_psi: &[Complex64]) -> (f64, f64) {
    let mean = inner(c, s_psi).re;
    let second = inner(s_psi, s_psi).re;
    (mean, (second - mean * mean).max(0.0))
}

/// `E_S` with the `S_z` variance.
pub fn squeezing_parameter(state: &PureState) -> Result<f64> {
    squeezing_parameter_along(state, SpinComponent::Z)
}

/// `E_S` with the variance of the given component in the numerator.
pub fn squeezing_parameter_along(state: &PureState, component: SpinComponent) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::ModeCountMismatch(2, state.modes()));
    }
    let n = state.total();
    let c = coefficients(state);
    let up = raise(&c);
    let down = lower(&c);
    let half = Complex64::new(0.5, 0.0);
    let i_half = Complex64::new(0.0, 0.5);
    let sx: Vec<_> = up.iter().zip(&down).map(|(u, d)| half * (u + d)).collect();
    let sy: Vec<_> = up.iter().zip(&down).map(|(u, d)| i_half * (u - d)).collect();
    let sz: Vec<_> = c
        .iter()
        .enumerate()
        .map(|(na, x)| x * (0.5 * (2.0 * na as f64 - n as f64)))
        .collect();
    let (mx, _) = moments(&c, &sx);
    let (my, var_y) = moments(&c, &sy);
    let (_, var_z) = moments(&c, &sz);
    let mean_spin = mx * mx + my * my;
    if mean_spin <= MIN_MEAN_SPIN {
        return Err(Error::UndefinedSqueezing(mean_spin));
    }
    let variance = match component {
        SpinComponent::Z => var_z,
        SpinComponent::Y => var_y,
    };
    Ok((n as f64 * variance / mean_spin).sqrt())
}
