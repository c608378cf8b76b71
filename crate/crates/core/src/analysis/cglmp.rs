//! CGLMP inequality for `d`-outcome measurements.
//!
//! `I_d = Σ_{k<⌊d/2⌋} (1 − 2k/(d−1)) [P(A1=B1+k) + P(B1=A2+k+1) + P(A2=B2+k)
//! + P(B2=A1+k) − P(A1=B1−k−1) − P(B1=A2−k) − P(A2=B2−k−1) − P(B2=A1−k−1)]`
//! with outcomes compared mod `d`. Local models give `I_d ≤ 2`.

use std::f64::consts::TAU;

use serde::Serialize;

use super::optimize::{angle_grid, grid_argmax, MIN_GRID_POINTS, REFINE_DIAMETER};
use super::simplex::{minimize, SimplexOptions};
use crate::bell::{BellEvaluator, BellSettings, JointDistribution, MeasurementSetting};
use crate::error::{Error, Result};
use crate::states::TwoCopyArrangement;

/// Local-realistic bound on `I_d`.
pub const CGLMP_BOUND: f64 = 2.0;

/// Ranks outcomes `(n, m)` of a sector by decreasing `n − m`, which is `m`
/// itself; with `d = T + 1` every sector fits.
pub fn default_outcome_map(_n: usize, m: usize) -> usize {
    m
}

/// `P((o_A − o_B) mod d = r)` for `r = 0..d`.
fn difference_profile(dist: &JointDistribution, map: &dyn Fn(usize, usize) -> usize, d: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; d];
    for ([nc, mc, nd, md], p) in dist.entries() {
        let (oa, ob) = (map(*nc, *mc), map(*nd, *md));
        if oa >= d || ob >= d {
            return Err(Error::InvalidArgument(format!(
                "outcome map sends ({nc}, {mc}) or ({nd}, {md}) outside 0..{d}"
            )));
        }
        out[(oa + d - ob) % d] += p;
    }
    Ok(out)
}

/// `I_d` from difference profiles ordered `[A1B1, A1B2, A2B1, A2B2]`.
fn combine(profiles: [&[f64]; 4], d: usize) -> f64 {
    let [d11, d12, d21, d22] = profiles;
    let at = |p: &[f64], r: isize| p[r.rem_euclid(d as isize) as usize];
    (0..d / 2)
        .map(|k| {
            let w = 1.0 - 2.0 * k as f64 / (d - 1) as f64;
            let k = k as isize;
            let plus = at(d11, k) + at(d21, -(k + 1)) + at(d22, k) + at(d12, -k);
            let minus = at(d11, -k - 1) + at(d21, k) + at(d22, -k - 1) + at(d12, k + 1);
            w * (plus - minus)
        })
        .sum()
}

/// `I_d` for the four distributions `[A1B1, A1B2, A2B1, A2B2]`.
pub fn cglmp_value(
    dists: &[JointDistribution; 4],
    outcome_map: &dyn Fn(usize, usize) -> usize,
    d: usize,
) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("CGLMP needs d >= 2, got {d}")));
    }
    let p: Vec<Vec<f64>> = dists
        .iter()
        .map(|x| difference_profile(x, outcome_map, d))
        .collect::<Result<_>>()?;
    Ok(combine([&p[0], &p[1], &p[2], &p[3]], d))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CglmpResult {
    pub value: f64,
    pub settings: BellSettings,
    pub d: usize,
    pub grid_resolution: usize,
    pub refined: bool,
}

impl CglmpResult {
    pub fn violates(&self) -> bool {
        self.value > CGLMP_BOUND
    }
}

fn distributions(ev: &BellEvaluator, state: &TwoCopyArrangement, s: &BellSettings) -> [JointDistribution; 4] {
    let (a1, a2) = (&s.alice.0, &s.alice.1);
    let (b1, b2) = (&s.bob.0, &s.bob.1);
    [
        ev.joint_distribution(state, a1, b1),
        ev.joint_distribution(state, a1, b2),
        ev.joint_distribution(state, a2, b1),
        ev.joint_distribution(state, a2, b2),
    ]
}

/// Maximizes `I_d` over balanced settings with the default outcome map and
/// `d = T + 1`.
pub fn optimize_cglmp(state: &TwoCopyArrangement, grid_points: usize, refine: bool) -> Result<CglmpResult> {
    let g = grid_points;
    if g < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least {MIN_GRID_POINTS} points per angle, got {g}"
        )));
    }
    let d = state.total() + 1;
    let map = default_outcome_map;
    let ev = BellEvaluator::new();
    let grid = angle_grid(g);
    let profiles: Vec<Vec<f64>> = (0..g * g)
        .map(|k| {
            let dist = ev.joint_distribution(
                state,
                &MeasurementSetting::balanced(grid[k / g]),
                &MeasurementSetting::balanced(grid[k % g]),
            );
            difference_profile(&dist, &map, d)
        })
        .collect::<Result<_>>()?;
    let covariant = state.has_fixed_second_copy_number();
    let dims = if covariant { 3 } else { 4 };
    let (_, idx) = grid_argmax(g, dims, |i| {
        let [a1, a2, b1, b2] = if covariant { [0, i[0], i[1], i[2]] } else { [i[0], i[1], i[2], i[3]] };
        let p = |a: usize, b: usize| profiles[a * g + b].as_slice();
        combine([p(a1, b1), p(a1, b2), p(a2, b1), p(a2, b2)], d)
    });

    let to_settings = |x: &[f64]| {
        let angles = if covariant { [0.0, x[0], x[1], x[2]] } else { [x[0], x[1], x[2], x[3]] };
        BellSettings::balanced(angles.map(|a| a.rem_euclid(TAU)))
    };
    let value_at = |s: &BellSettings| cglmp_value(&distributions(&ev, state, s), &map, d);
    let mut best_x: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
    let mut best = value_at(&to_settings(&best_x))?;
    if refine {
        let r = minimize(
            |x| value_at(&to_settings(x)).map(|v| -v).unwrap_or(f64::INFINITY),
            &best_x,
            SimplexOptions {
                step: TAU / g as f64,
                diameter: REFINE_DIAMETER,
                ..Default::default()
            },
        );
        if -r.value > best {
            best = -r.value;
            best_x = r.point;
        }
    }
    let settings = to_settings(&best_x);
    let value = value_at(&settings)?;
    debug_assert!((value - best).abs() < 1e-9);
    Ok(CglmpResult {
        value,
        settings,
        d,
        grid_resolution: g,
        refined: refine,
    })
}
