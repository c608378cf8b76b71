//! `reproduce ITEM`: regenerates one dataset and compares it with the quoted
//! numbers. Mismatches are reported in `<item>_report.json`, never through
//! the exit code.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};
use std::path::{Path, PathBuf};

use serde::Serialize;
use ssrbell::analysis::optimize::DEFAULT_GRID_POINTS;
use ssrbell::analysis::{
    bell_surface, optimize_bell_with, optimize_postselected, projected_entropy, squeezing_parameter_along,
    OptimizationResult, OptimizeOptions, SpinComponent, Surface,
};
use ssrbell::bell::{correlation_with, number_basis_correlation};
use ssrbell::{
    bec_state, bell_term, correlation, noon_state, squeezed_state, toy_mixed_state, two_copy,
    BeamsplitterParams, BellSettings, Binning, MeasurementSetting, TwoCopyArrangement,
};

use crate::commands::{surface_spec, write_surface, DEFAULT_SURFACE_RESOLUTION};
use crate::config::{FamilyParams, ReproduceItem, RunConfig};
use crate::error::Result;
use crate::output::{write_csv, write_json};
use crate::report::{Check, OptimumReport, CLASSICAL_BOUND, VIOLATION_MARGIN};

/// Ceiling used for "no violation" claims.
const NO_VIOLATION: f64 = CLASSICAL_BOUND + VIOLATION_MARGIN;

struct Context {
    dir: PathBuf,
    resolution: usize,
    options: OptimizeOptions,
}

#[derive(Serialize)]
struct NamedOptimum {
    label: String,
    #[serde(flatten)]
    optimum: OptimumReport,
}

#[derive(Serialize)]
pub struct ItemReport {
    item: ReproduceItem,
    all_pass: bool,
    grid_points: usize,
    surface_resolution: usize,
    refined: bool,
    files: Vec<String>,
    optima: Vec<NamedOptimum>,
    checks: Vec<Check>,
}

impl ItemReport {
    pub fn all_pass(&self) -> bool {
        self.all_pass
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }
}

struct Builder<'a> {
    ctx: &'a Context,
    files: Vec<String>,
    optima: Vec<NamedOptimum>,
    checks: Vec<Check>,
}

impl<'a> Builder<'a> {
    fn new(ctx: &'a Context) -> Self {
        Self {
            ctx,
            files: Vec::new(),
            optima: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.ctx.dir.join(name)
    }

    fn optimize(&mut self, label: &str, state: &TwoCopyArrangement) -> Result<OptimizationResult> {
        let options = self.ctx.options;
        self.optimize_with(label, state, &options)
    }

    fn optimize_with(
        &mut self,
        label: &str,
        state: &TwoCopyArrangement,
        options: &OptimizeOptions,
    ) -> Result<OptimizationResult> {
        let r = optimize_bell_with(state, options)?;
        self.optimum(label, &r);
        Ok(r)
    }

    fn optimum(&mut self, label: &str, r: &OptimizationResult) {
        self.optima.push(NamedOptimum {
            label: label.to_string(),
            optimum: r.into(),
        });
    }

    /// Surface through the optimum's fixed angles, written as `<name>.csv`.
    fn surface(
        &mut self,
        name: &str,
        state: &TwoCopyArrangement,
        params: &FamilyParams,
        fixed: [f64; 2],
    ) -> Result<Surface> {
        let spec = surface_spec(state, Some(fixed), self.ctx.resolution, self.ctx.options.alpha)?;
        let surface = bell_surface(state, &spec)?;
        let path = self.path(&format!("{name}.csv"));
        self.files.push(format!("{name}.json"));
        write_surface(&path, &surface, &spec, params, true)?;
        Ok(surface)
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn finish(self, item: ReproduceItem) -> ItemReport {
        ItemReport {
            item,
            all_pass: self.checks.iter().all(|c| c.pass),
            grid_points: self.ctx.options.grid_points,
            surface_resolution: self.ctx.resolution,
            refined: self.ctx.options.refine,
            files: self.files,
            optima: self.optima,
            checks: self.checks,
        }
    }
}

fn fixed_of(r: &OptimizationResult) -> [f64; 2] {
    let a = r.best_settings.angles();
    [a[0], a[3]]
}

fn bec_pair(n: usize, n2: usize) -> Result<TwoCopyArrangement> {
    Ok(two_copy(bec_state(n)?, bec_state(n2)?)?)
}

fn noon_pair(n: usize, m: usize) -> Result<TwoCopyArrangement> {
    Ok(two_copy(noon_state(n, m)?, noon_state(n, m)?)?)
}

fn squeezed_pair(c: f64) -> Result<TwoCopyArrangement> {
    let s = squeezed_state(c)?;
    Ok(two_copy(s.clone(), s)?)
}

/// Largest amount by which the sequence decreases from one entry to the next.
fn worst_drop(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

/// Largest amount by which the sequence increases.
fn worst_rise(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Deterministic sample of setting pairs spread over the torus.
fn angle_pairs(count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let k = k as f64;
            ((0.731 * k).rem_euclid(TAU), (1.917 * k + 0.2).rem_euclid(TAU))
        })
        .collect()
}

fn fig2(b: &mut Builder) -> Result<()> {
    let rows = [
        (1, 2.41, [0.0, 1.57, 3.93, 2.36]),
        (2, 2.36, [0.0, 1.07, 3.68, 2.60]),
        (3, 2.24, [0.0, 1.00, 3.64, 2.68]),
    ];
    let mut optima = Vec::new();
    for (n, quoted, angles) in rows {
        let state = bec_pair(n, n)?;
        let params = FamilyParams::Bec { n, n2: None };
        let r = b.optimize(&format!("bec_N{n}"), &state)?;
        b.surface(&format!("fig2_bec_N{n}"), &state, &params, fixed_of(&r))?;
        b.check(Check::within(format!("optimum_N{n}"), r.best_value, quoted, 0.01));
        let at_caption = bell_term(&state, &BellSettings::balanced(angles));
        b.check(Check::within(format!("caption_angles_N{n}"), at_caption, quoted, 0.02));
        optima.push(r.best_value);
    }
    b.check(Check::property(
        "optimum_non_increasing_N1_to_N3",
        "largest rise of the optimum from N to N+1",
        worst_rise(&optima),
        0.0,
    ));
    Ok(())
}

fn fig3(b: &mut Builder) -> Result<()> {
    let n20 = noon_pair(2, 0)?;
    let n41 = noon_pair(4, 1)?;
    let r20 = b.optimize("noon_N2_m0", &n20)?;
    let r41 = b.optimize("noon_N4_m1", &n41)?;
    b.check(Check::within("optimum_N2_m0", r20.best_value, 2.41, 0.01));
    b.check(Check::within("optimum_N4_m1", r41.best_value, 2.41, 0.01));
    let caption = bell_term(&n20, &BellSettings::balanced([-0.13, 0.65, 0.26, -0.52]));
    b.check(Check::within("caption_angles_N2_m0", caption, 2.41, 0.02));

    // both surfaces through the same fixed angles so they can be compared cell by cell
    let fixed = fixed_of(&r20);
    let s20 = b.surface("fig3_noon_N2_m0", &n20, &FamilyParams::Noon { n: 2, m: 0, n2: None }, fixed)?;
    let s41 = b.surface("fig3_noon_N4_m1", &n41, &FamilyParams::Noon { n: 4, m: 1, n2: None }, fixed)?;
    let diff = s20
        .values
        .iter()
        .zip(&s41.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    b.check(Check::property("surfaces_N2_m0_and_N4_m1_identical", "largest cell difference", diff, 1e-10));

    for (n, m) in [(3, 0), (3, 1), (4, 0)] {
        let state = noon_pair(n, m)?;
        let r = b.optimize(&format!("noon_N{n}_m{m}"), &state)?;
        if (n, m) == (3, 0) {
            b.check(Check::within("optimum_N3_m0", r.best_value, 1.71, 0.01));
            b.surface("fig3_noon_N3_m0", &state, &FamilyParams::Noon { n, m, n2: None }, fixed_of(&r))?;
        }
        b.check(Check::at_most(format!("no_violation_N{n}_m{m}"), r.best_value, NO_VIOLATION));
    }
    Ok(())
}

fn fig4(b: &mut Builder) -> Result<()> {
    let mut cs: Vec<f64> = (0..=14).map(|k| 0.05 * k as f64).collect();
    cs.push(FRAC_1_SQRT_2);
    let mut rows = Vec::new();
    for &c in &cs {
        let single = squeezed_state(c)?;
        let sz = squeezing_parameter_along(&single, SpinComponent::Z).unwrap_or(f64::NAN);
        let sy = squeezing_parameter_along(&single, SpinComponent::Y).unwrap_or(f64::NAN);
        let r = b.optimize(&format!("squeezed_c{c:.4}"), &squeezed_pair(c)?)?;
        rows.push([c, sz, sy, r.best_value]);
    }
    let path = b.path("fig4_squeezing.csv");
    write_csv(&path, &["c", "e_s_sz", "e_s_sy", "bell_max"], rows.iter().map(|r| r.to_vec()))?;

    let bell: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    b.check(Check::property(
        "bell_max_monotone_in_c",
        "largest drop of the optimum between neighbouring c",
        worst_drop(&bell),
        1e-9,
    ));
    let weak: Vec<&[f64; 4]> = rows.iter().filter(|r| r[0] > 0.0 && r[0] < 0.5).collect();
    let min_of = |k: usize| weak.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
    b.check(Check::at_least("bell_detects_weak_states", min_of(3), NO_VIOLATION));
    b.check(Check::at_least("sz_form_not_squeezed_for_weak_states", min_of(1), 1.0));
    b.check(Check::at_least("sy_form_not_squeezed_for_weak_states", min_of(2), 1.0));
    b.check(Check::at_most("no_violation_c0", rows[0][3], NO_VIOLATION));
    Ok(())
}

fn squeezed_captions(b: &mut Builder, prefix: &str, quoted: &[(f64, f64)]) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for &(c, target) in quoted {
        let state = squeezed_pair(c)?;
        let r = b.optimize(&format!("squeezed_c{c}"), &state)?;
        b.surface(&format!("{prefix}_squeezed_c{c}"), &state, &FamilyParams::Squeezed { c }, fixed_of(&r))?;
        b.check(Check::within(format!("optimum_c{c}"), r.best_value, target, 0.002));
        values.push(r.best_value);
    }
    Ok(values)
}

fn fig5(b: &mut Builder) -> Result<()> {
    let values = squeezed_captions(b, "fig5", &[(0.6, 2.394), (0.65, 2.405), (0.7, 2.413)])?;
    b.check(Check::property("optimum_increasing_in_c", "largest drop between listed c", worst_drop(&values), 0.0));
    Ok(())
}

fn fig6(b: &mut Builder) -> Result<()> {
    let values = squeezed_captions(b, "fig6", &[(0.1, 2.032), (0.2, 2.116), (0.3, 2.220), (0.4, 2.307)])?;
    b.check(Check::property("optimum_increasing_in_c", "largest drop between listed c", worst_drop(&values), 0.0));

    let flat = squeezed_pair(0.0)?;
    let r = b.optimize("squeezed_c0", &flat)?;
    let s = b.surface("fig6_squeezed_c0", &flat, &FamilyParams::Squeezed { c: 0.0 }, fixed_of(&r))?;
    let spread = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - s.min();
    b.check(Check::property("flat_landscape_c0", "max minus min over the surface", spread, 1e-10));
    b.check(Check::at_most("no_violation_c0", r.best_value, NO_VIOLATION));
    Ok(())
}

fn toy(b: &mut Builder) -> Result<()> {
    let ps: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
    let alpha_sqs: [f64; 3] = [0.3, 0.5, 0.7];
    let pairs = angle_pairs(16);
    let mut rows = Vec::new();
    let mut worst = [0.0f64; 3];
    for &p in &ps {
        let state = two_copy(toy_mixed_state(p)?, toy_mixed_state(p)?)?;
        for (k, &a2) in alpha_sqs.iter().enumerate() {
            let alpha = a2.sqrt();
            for &(fa, fb) in &pairs {
                let setting = |phase| BeamsplitterParams::with_alpha(alpha, phase).map(MeasurementSetting::new);
                let e = correlation_with(&state, &setting(fa)?, &setting(fb)?, Binning::SingleParticleSector);
                let formula = 8.0 * (p - 0.5).powi(2) * a2 * (1.0 - a2) * (fa - fb).cos();
                worst[k] = worst[k].max((e - formula).abs());
                rows.push(vec![p, a2, fa, fb, e, formula]);
            }
        }
    }
    let path = b.path("toy_correlations.csv");
    write_csv(&path, &["p", "alpha_sq", "phi_a", "phi_b", "correlation", "formula"], rows)?;
    for (k, a2) in alpha_sqs.iter().enumerate() {
        b.check(Check::property(
            format!("formula_alpha_sq_{a2}"),
            "largest deviation from 8(p-1/2)^2 a^2 b^2 cos(phi_a - phi_b)",
            worst[k],
            1e-10,
        ));
    }
    for &p in &ps {
        let e = number_basis_correlation(&toy_mixed_state(p)?)?;
        b.check(Check::within(format!("single_copy_number_basis_p{p}"), e, -1.0, 1e-12));
    }
    let separable = two_copy(toy_mixed_state(0.5)?, toy_mixed_state(0.5)?)?;
    let r = b.optimize("toy_p0.5", &separable)?;
    b.check(Check::at_most("no_violation_p0.5", r.best_value, NO_VIOLATION));
    Ok(())
}

fn mixed_n(b: &mut Builder) -> Result<()> {
    let listed = [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5), (2, 6), (3, 4)];
    let pairs = angle_pairs(16);
    let mut rows = Vec::new();
    for (n, n2) in listed {
        let state = bec_pair(n, n2)?;
        let mut worst = 0.0f64;
        for &(fa, fb) in &pairs {
            let e = correlation(&state, &MeasurementSetting::balanced(fa), &MeasurementSetting::balanced(fb));
            worst = worst.max(e.abs());
            rows.push(vec![n as f64, n2 as f64, fa, fb, e]);
        }
        b.check(Check::property(
            format!("uncorrelated_N{n}_N{n2}"),
            "largest |E| over the sampled settings",
            worst,
            1e-12,
        ));
    }
    let path = b.path("mixedN_correlations.csv");
    write_csv(&path, &["n", "n2", "phi_a", "phi_b", "correlation"], rows)?;

    // Swapping the copies swaps which mode enters each beamsplitter first, so
    // the same physical measurement has alpha and beta exchanged.
    let (fwd, bwd) = (bec_pair(1, 2)?, bec_pair(2, 1)?);
    let mut worst = 0.0f64;
    for &(fa, fb) in &pairs {
        let m = |alpha: f64, phase| BeamsplitterParams::with_alpha(alpha, phase).map(MeasurementSetting::new);
        let there = correlation(&fwd, &m(0.4, fa)?, &m(0.85, fb)?);
        let back = correlation(&bwd, &m((1.0 - 0.16f64).sqrt(), fa)?, &m((1.0 - 0.7225f64).sqrt(), fb)?);
        worst = worst.max((there - back).abs());
    }
    b.check(Check::property(
        "copy_order_symmetry_N1_N2_unbalanced",
        "largest |E(1,2) - E(2,1)| with alpha and beta exchanged",
        worst,
        1e-12,
    ));

    let options = OptimizeOptions {
        co_optimize_transmissivity: true,
        ..b.ctx.options
    };
    let r = b.optimize_with("bec_N1_N2_co_optimized", &fwd, &options)?;
    b.check(Check::at_most("no_violation_N1_N2_co_optimized", r.best_value, NO_VIOLATION));
    Ok(())
}

fn postselect(b: &mut Builder) -> Result<()> {
    let state = bec_pair(1, 1)?;
    let r = optimize_postselected(&state, 1, &b.ctx.options)?;
    b.optimum("bec_N1_postselected_alice_1", &r);
    b.check(Check::within("postselected_N1", r.best_value, 2.0 * SQRT_2, 1e-6));
    let full = b.optimize("bec_N1", &state)?;
    b.check(Check::within("unrestricted_N1", full.best_value, 1.0 + SQRT_2, 1e-3));
    Ok(())
}

fn entropy(b: &mut Builder) -> Result<()> {
    let bec: Vec<f64> = (1..=9)
        .map(|n| Ok(projected_entropy(&bec_pair(n, n)?)?))
        .collect::<Result<_>>()?;
    let path = b.path("entropy_bec.csv");
    write_csv(&path, &["n", "projected_entropy"], bec.iter().enumerate().map(|(k, &s)| vec![(k + 1) as f64, s]))?;

    let peak = bec
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &s)| if s > acc.1 { (k, s) } else { acc })
        .0
        + 1;
    b.check(Check::within("bec_peak_n", peak as f64, 2.0, 0.0));
    b.check(Check::property(
        "bec_decreasing_after_n2",
        "largest rise from N to N+1 for N >= 2",
        worst_rise(&bec[1..]),
        0.0,
    ));
    b.check(Check::at_most("bec_n9_near_zero", bec[8], 0.05));

    let noon: Vec<f64> = (2..=4)
        .map(|n| Ok(projected_entropy(&noon_pair(n, 0)?)?))
        .collect::<Result<_>>()?;
    let path = b.path("entropy_noon.csv");
    write_csv(&path, &["n", "projected_entropy"], noon.iter().enumerate().map(|(k, &s)| vec![(k + 2) as f64, s]))?;
    let spread = noon.iter().copied().fold(f64::NEG_INFINITY, f64::max) - noon.iter().copied().fold(f64::INFINITY, f64::min);
    b.check(Check::property("noon_m0_constant_n2_to_n4", "max minus min", spread, 1e-9));
    Ok(())
}

/// Runs `item`, writing files under `dir`. Surface resolution, refinement,
/// restarts and seed come from `cfg`; the grid is the default 64 points.
pub fn run_item(item: ReproduceItem, cfg: &RunConfig, dir: &Path) -> Result<ItemReport> {
    let ctx = Context {
        dir: dir.to_path_buf(),
        resolution: cfg.resolution.unwrap_or(DEFAULT_SURFACE_RESOLUTION),
        options: OptimizeOptions {
            grid_points: DEFAULT_GRID_POINTS,
            refine: cfg.refine,
            restarts: cfg.restarts,
            seed: cfg.seed,
            ..Default::default()
        },
    };
    let mut b = Builder::new(&ctx);
    match item {
        ReproduceItem::Fig2 => fig2(&mut b)?,
        ReproduceItem::Fig3 => fig3(&mut b)?,
        ReproduceItem::Fig4 => fig4(&mut b)?,
        ReproduceItem::Fig5 => fig5(&mut b)?,
        ReproduceItem::Fig6 => fig6(&mut b)?,
        ReproduceItem::Toy => toy(&mut b)?,
        ReproduceItem::MixedN => mixed_n(&mut b)?,
        ReproduceItem::Postselect => postselect(&mut b)?,
        ReproduceItem::Entropy => entropy(&mut b)?,
    }
    let name = format!("{item}_report.json");
    b.files.push(name.clone());
    let report = b.finish(item);
    write_json(&dir.join(name), &report)?;
    Ok(report)
}

/// The `reproduce` command: output directory from `--out`, default `reproduce`.
pub fn reproduce(item: ReproduceItem, cfg: &RunConfig) -> Result<String> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("reproduce"));
    let report = run_item(item, cfg, &dir)?;
    let mut text: String = report.checks.iter().map(|c| c.line() + "\n").collect();
    let passed = report.checks.iter().filter(|c| c.pass).count();
    text.push_str(&format!(
        "{item}: {} ({passed}/{} checks), report in {}\n",
        if report.all_pass { "PASS" } else { "FAIL" },
        report.checks.len(),
        dir.join(format!("{item}_report.json")).display()
    ));
    Ok(text)
}
