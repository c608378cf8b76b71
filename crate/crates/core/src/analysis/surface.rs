//! Bell-term landscapes over two of the four phases.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{BellEvaluator, MeasurementSetting};
use crate::error::{Error, Result};
use crate::optics::BeamsplitterParams;
use crate::states::TwoCopyArrangement;

/// `φ_A1` and `φ_B2` stay at `fixed`; `φ_A2` and `φ_B1` sweep their ranges
/// with `resolution` points each, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceSpec {
    pub fixed: [f64; 2],
    pub sweep: [(f64, f64); 2],
    pub resolution: usize,
    pub alpha: f64,
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self {
            fixed: [0.0, 0.0],
            sweep: [(0.0, TAU), (0.0, TAU)],
            resolution: 101,
            alpha: FRAC_1_SQRT_2,
        }
    }
}

/// Row-major table: row `i` is `φ_A2 = first_axis[i]`, column `j` is
/// `φ_B1 = second_axis[j]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Surface {
    pub fixed: [f64; 2],
    pub first_axis: Vec<f64>,
    pub second_axis: Vec<f64>,
    pub values: Vec<f64>,
}

impl Surface {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.second_axis.len() + j]
    }

    /// Largest cell as `(value, i, j)`; ties go to the first in row-major
    /// order.
    pub fn max(&self) -> (f64, usize, usize) {
        let cols = self.second_axis.len();
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        (v, k / cols, k % cols)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn bell_surface(state: &TwoCopyArrangement, spec: &SurfaceSpec) -> Result<Surface> {
    let n = spec.resolution;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("surface resolution must be at least 2, got {n}")));
    }
    let setting = |phase| BeamsplitterParams::with_alpha(spec.alpha, phase).map(MeasurementSetting::new);
    let a1 = setting(spec.fixed[0])?;
    let b2 = setting(spec.fixed[1])?;
    let first_axis = axis(spec.sweep[0], n);
    let second_axis = axis(spec.sweep[1], n);
    let a2: Vec<_> = first_axis.iter().map(|&p| setting(p)).collect::<Result<_>>()?;
    let b1: Vec<_> = second_axis.iter().map(|&p| setting(p)).collect::<Result<_>>()?;

    let ev = BellEvaluator::new();
    let e_a1_b2 = ev.correlation(state, &a1, &b2);
    let e_a1_b1: Vec<f64> = b1.iter().map(|b| ev.correlation(state, &a1, b)).collect();
    let e_a2_b2: Vec<f64> = a2.iter().map(|a| ev.correlation(state, a, &b2)).collect();
    let values = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (e_a1_b1[j] + e_a1_b2 + ev.correlation(state, &a2[i], &b1[j]) - e_a2_b2[i]).abs()
        })
        .collect();
    Ok(Surface {
        fixed: spec.fixed,
        first_axis,
        second_axis,
        values,
    })
}
