//! Maximizing the Bell term over measurement settings.
//!
//! A grid search over tabulated correlations finds the best cell; a simplex
//! run started there polishes it. When the second copy has a fixed particle
//! number, correlations depend on phase differences only, so `φ_A1` is pinned
//! to zero and three angles remain free.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::simplex::{minimize, SimplexOptions};
use crate::bell::{BellEvaluator, BellSettings, MeasurementSetting};
use crate::error::{Error, Result};
use crate::optics::BeamsplitterParams;
use crate::states::TwoCopyArrangement;

pub const MIN_GRID_POINTS: usize = 8;
pub const DEFAULT_GRID_POINTS: usize = 64;
/// Simplex termination: all vertices within this many radians of the best.
pub const REFINE_DIAMETER: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizeOptions {
    pub grid_points: usize,
    pub refine: bool,
    /// Transmissivity amplitude of both parties when it is not optimized.
    pub alpha: f64,
    /// Also optimize each party's transmissivity `α = |cos θ|`.
    pub co_optimize_transmissivity: bool,
    /// Number of `θ` values per party in the coarse transmissivity scan.
    pub transmissivity_grid: usize,
    /// Extra simplex runs from seeded random starts.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            refine: true,
            alpha: FRAC_1_SQRT_2,
            co_optimize_transmissivity: false,
            transmissivity_grid: 9,
            restarts: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_value: f64,
    pub best_settings: BellSettings,
    pub grid_resolution: usize,
    pub refined: bool,
    /// Best value found on the grid alone.
    pub grid_value: f64,
    pub transmissivity_optimized: bool,
}

/// Grid points `0, 2π/g, …` on one angle axis.
pub fn angle_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 * TAU / points as f64).collect()
}

/// Exhaustive search over `dims` grid indices in `0..points`.
///
/// Returns the largest value and the lexicographically smallest index tuple
/// reaching it, whatever the worker scheduling.
pub fn grid_argmax<F>(points: usize, dims: usize, f: F) -> (f64, Vec<usize>)
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if dims == 0 {
        return (f(&[]), Vec::new());
    }
    let better = |a: (f64, Vec<usize>), b: (f64, Vec<usize>)| match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    };
    (0..points)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0; dims];
            idx[0] = first;
            let mut best = (f64::NEG_INFINITY, idx.clone());
            loop {
                let v = f(&idx);
                if v > best.0 {
                    best = (v, idx.clone());
                }
                // odometer over the trailing indices
                let mut k = dims - 1;
                loop {
                    if k == 0 {
                        return best;
                    }
                    idx[k] += 1;
                    if idx[k] < points {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        .reduce(|| (f64::NEG_INFINITY, vec![usize::MAX; dims]), better)
}

/// `E(iδ, jδ)` for all grid pairs, row-major in Alice's index.
pub fn correlation_table(
    evaluator: &BellEvaluator,
    state: &TwoCopyArrangement,
    points: usize,
    alpha_alice: f64,
    alpha_bob: f64,
) -> Result<Vec<f64>> {
    let grid = angle_grid(points);
    let alice: Vec<MeasurementSetting> = grid
        .iter()
        .map(|&p| BeamsplitterParams::with_alpha(alpha_alice, p).map(MeasurementSetting::new))
        .collect::<Result<_>>()?;
    let bob: Vec<MeasurementSetting> = grid
        .iter()
        .map(|&p| BeamsplitterParams::with_alpha(alpha_bob, p).map(MeasurementSetting::new))
        .collect::<Result<_>>()?;
    Ok((0..points * points)
        .into_par_iter()
        .map(|k| evaluator.correlation(state, &alice[k / points], &bob[k % points]))
        .collect())
}

/// CHSH value from a correlation table at grid indices `[a1, a2, b1, b2]`.
fn tabulated_bell(table: &[f64], points: usize, [a1, a2, b1, b2]: [usize; 4]) -> f64 {
    let e = |a: usize, b: usize| table[a * points + b];
    (e(a1, b1) + e(a1, b2) + e(a2, b1) - e(a2, b2)).abs()
}

fn full_indices(free: &[usize], covariant: bool) -> [usize; 4] {
    if covariant {
        [0, free[0], free[1], free[2]]
    } else {
        [free[0], free[1], free[2], free[3]]
    }
}

/// Transmissivity angles when co-optimized, then Alice's and Bob's `α`.
type AlphaPair = (Option<(f64, f64)>, f64, f64);

fn alpha_of(theta: f64) -> f64 {
    theta.cos().abs().min(1.0)
}

/// Free parameters: the unpinned angles, then `θ_A, θ_B` when the
/// transmissivity is optimized.
struct Layout {
    covariant: bool,
    co_optimize: bool,
    fixed_alpha: f64,
}

impl Layout {
    fn angle_dims(&self) -> usize {
        if self.covariant {
            3
        } else {
            4
        }
    }

    fn settings(&self, x: &[f64]) -> Result<BellSettings> {
        let d = self.angle_dims();
        let angles = if self.covariant {
            [0.0, x[0], x[1], x[2]]
        } else {
            [x[0], x[1], x[2], x[3]]
        };
        let angles = angles.map(|a| a.rem_euclid(TAU));
        let (aa, ab) = if self.co_optimize {
            (alpha_of(x[d]), alpha_of(x[d + 1]))
        } else {
            (self.fixed_alpha, self.fixed_alpha)
        };
        BellSettings::with_transmissivity(angles, aa, ab)
    }
}

/// Grid plus refinement with balanced beamsplitters.
pub fn optimize_bell(state: &TwoCopyArrangement, grid_points: usize, refine: bool) -> Result<OptimizationResult> {
    optimize_bell_with(
        state,
        &OptimizeOptions {
            grid_points,
            refine,
            ..Default::default()
        },
    )
}

pub fn optimize_bell_with(state: &TwoCopyArrangement, options: &OptimizeOptions) -> Result<OptimizationResult> {
    let g = options.grid_points;
    if g < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least {MIN_GRID_POINTS} points per angle, got {g}"
        )));
    }
    if options.co_optimize_transmissivity && options.transmissivity_grid < 2 {
        return Err(Error::InvalidArgument("transmissivity grid needs at least 2 points".into()));
    }
    BeamsplitterParams::with_alpha(options.alpha, 0.0)?;

    let layout = Layout {
        covariant: state.has_fixed_second_copy_number(),
        co_optimize: options.co_optimize_transmissivity,
        fixed_alpha: options.alpha,
    };
    let free = layout.angle_dims();
    let step = TAU / g as f64;

    // coarse stage
    let thetas: Vec<f64> = if layout.co_optimize {
        let k = options.transmissivity_grid;
        (0..k).map(|i| i as f64 * FRAC_PI_2 / (k - 1) as f64).collect()
    } else {
        vec![]
    };
    let evaluator = BellEvaluator::new();
    let mut coarse: Option<(f64, Vec<f64>)> = None;
    let alpha_pairs: Vec<AlphaPair> = if layout.co_optimize {
        thetas
            .iter()
            .flat_map(|&ta| thetas.iter().map(move |&tb| (Some((ta, tb)), alpha_of(ta), alpha_of(tb))))
            .collect()
    } else {
        vec![(None, options.alpha, options.alpha)]
    };
    for (thetas, aa, ab) in alpha_pairs {
        // the cache is keyed by transmissivity; start fresh for each pair
        let local = BellEvaluator::new();
        let ev = if layout.co_optimize { &local } else { &evaluator };
        let table = correlation_table(ev, state, g, aa, ab)?;
        let (value, idx) = grid_argmax(g, free, |i| tabulated_bell(&table, g, full_indices(i, layout.covariant)));
        if coarse.as_ref().is_none_or(|(best, _)| value > *best) {
            let mut x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            if let Some((ta, tb)) = thetas {
                x.extend([ta, tb]);
            }
            coarse = Some((value, x));
        }
    }
    let (grid_value, mut best_x) = coarse.expect("at least one transmissivity pair");

    let objective = |x: &[f64]| -> f64 {
        match layout.settings(x) {
            Ok(s) if layout.co_optimize => -BellEvaluator::new().bell_term(state, &s),
            Ok(s) => -evaluator.bell_term(state, &s),
            Err(_) => f64::INFINITY,
        }
    };
    let simplex = SimplexOptions {
        step,
        diameter: REFINE_DIAMETER,
        ..Default::default()
    };

    let mut best_value = grid_value;
    if options.refine {
        let r = minimize(objective, &best_x, simplex);
        if -r.value > best_value {
            best_value = -r.value;
            best_x = r.point;
        }
        if options.restarts > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let starts: Vec<Vec<f64>> = (0..options.restarts)
                .map(|_| {
                    let mut x: Vec<f64> = (0..free).map(|_| rng.gen_range(0.0..TAU)).collect();
                    if layout.co_optimize {
                        x.extend([rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(0.0..FRAC_PI_2)]);
                    }
                    x
                })
                .collect();
            let runs: Vec<_> = starts.par_iter().map(|x0| minimize(objective, x0, simplex)).collect();
            for r in runs {
                if -r.value > best_value {
                    best_value = -r.value;
                    best_x = r.point;
                }
            }
        }
    }

    let best_settings = layout.settings(&best_x)?;
    // report the value at the wrapped, validated settings
    let best_value = BellEvaluator::new().bell_term(state, &best_settings);
    Ok(OptimizationResult {
        best_value,
        best_settings,
        grid_resolution: g,
        refined: options.refine,
        grid_value,
        transmissivity_optimized: layout.co_optimize,
    })
}

/// Optimizes the Bell term of the state conditioned on Alice holding
/// `alice_particles`.
pub fn optimize_postselected(
    state: &TwoCopyArrangement,
    alice_particles: usize,
    options: &OptimizeOptions,
) -> Result<OptimizationResult> {
    let (_, projected) = state.project_alice_total(alice_particles)?;
    optimize_bell_with(&projected, options)
}
