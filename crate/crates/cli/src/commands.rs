//! The `surface`, `optimize`, `entropy`, `squeezing` and `cglmp` commands.
//! Each returns the text to print on stdout.

use std::path::{Path, PathBuf};

use serde::Serialize;
use ssrbell::analysis::cglmp::CGLMP_BOUND;
use ssrbell::analysis::optimize::DEFAULT_GRID_POINTS;
use ssrbell::analysis::{
    bell_surface, optimize_bell_with, optimize_cglmp, projected_entropy, squeezing_parameter_along, OptimizeOptions,
    SpinComponent, Surface, SurfaceSpec,
};
use ssrbell::TwoCopyArrangement;

use crate::config::{FamilyParams, RunConfig};
use crate::error::Result;
use crate::family::{arrangement, single_copy};
use crate::output::{sidecar_path, to_json, write_csv, write_json};
use crate::report::{is_violation, OptimumReport, SettingsReport};

/// Points per axis of a surface unless configured.
pub const DEFAULT_SURFACE_RESOLUTION: usize = 101;

fn optimize_options(cfg: &RunConfig, co_optimize: bool) -> OptimizeOptions {
    OptimizeOptions {
        grid_points: cfg.resolution.unwrap_or(DEFAULT_GRID_POINTS),
        refine: cfg.refine,
        alpha: cfg.alpha,
        co_optimize_transmissivity: co_optimize,
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..Default::default()
    }
}

/// Prints JSON to `out` when given, else returns it for stdout.
fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<String> {
    match out {
        Some(path) => {
            write_json(path, value)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(to_json(value)),
    }
}

#[derive(Serialize)]
pub struct FixedAngles {
    pub phi_a1: f64,
    pub phi_b2: f64,
}

#[derive(Serialize)]
pub struct SurfaceSidecar {
    pub command: &'static str,
    pub state: FamilyParams,
    pub alpha: f64,
    pub angle1: &'static str,
    pub angle2: &'static str,
    pub fixed_angles: FixedAngles,
    pub fixed_from_optimum: bool,
    pub resolution: usize,
    pub sweep: [(f64, f64); 2],
    pub max_value: f64,
    pub max_at: [f64; 2],
    pub min_value: f64,
    pub violation: bool,
}

/// Writes `surface` as CSV at `path` plus its JSON sidecar.
pub fn write_surface(
    path: &Path,
    surface: &Surface,
    spec: &SurfaceSpec,
    state: &FamilyParams,
    fixed_from_optimum: bool,
) -> Result<SurfaceSidecar> {
    let rows = surface.first_axis.iter().enumerate().flat_map(|(i, &a2)| {
        surface
            .second_axis
            .iter()
            .enumerate()
            .map(move |(j, &b1)| vec![a2, b1, surface.value(i, j)])
    });
    write_csv(path, &["angle1", "angle2", "bell_term"], rows)?;
    let (max_value, i, j) = surface.max();
    let sidecar = SurfaceSidecar {
        command: "surface",
        state: state.clone(),
        alpha: spec.alpha,
        angle1: "phi_a2",
        angle2: "phi_b1",
        fixed_angles: FixedAngles {
            phi_a1: spec.fixed[0],
            phi_b2: spec.fixed[1],
        },
        fixed_from_optimum,
        resolution: spec.resolution,
        sweep: spec.sweep,
        max_value,
        max_at: [surface.first_axis[i], surface.second_axis[j]],
        min_value: surface.min(),
        violation: is_violation(max_value),
    };
    write_json(&sidecar_path(path), &sidecar)?;
    Ok(sidecar)
}

/// Surface through the optimum's `φ_A1`, `φ_B2`, or through given angles.
pub fn surface_spec(
    state: &TwoCopyArrangement,
    fixed: Option<[f64; 2]>,
    resolution: usize,
    alpha: f64,
) -> Result<SurfaceSpec> {
    let fixed = match fixed {
        Some(f) => f,
        None => {
            let opts = OptimizeOptions {
                alpha,
                ..Default::default()
            };
            let best = optimize_bell_with(state, &opts)?.best_settings.angles();
            [best[0], best[3]]
        }
    };
    Ok(SurfaceSpec {
        fixed,
        resolution,
        alpha,
        ..Default::default()
    })
}

pub fn surface(cfg: &RunConfig) -> Result<String> {
    let state = arrangement(&cfg.params)?;
    let resolution = cfg.resolution.unwrap_or(DEFAULT_SURFACE_RESOLUTION);
    let spec = surface_spec(&state, cfg.fixed_angles, resolution, cfg.alpha)?;
    let surface = bell_surface(&state, &spec)?;
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("surface.csv"));
    let sidecar = write_surface(&path, &surface, &spec, &cfg.params, cfg.fixed_angles.is_none())?;
    Ok(format!(
        "max bell_term {} at phi_a2={} phi_b1={}\nwrote {} and {}\n",
        sidecar.max_value,
        sidecar.max_at[0],
        sidecar.max_at[1],
        path.display(),
        sidecar_path(&path).display()
    ))
}

#[derive(Serialize)]
struct OptimizeOutput<'a> {
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    result: OptimumReport,
    co_optimized: Option<OptimumReport>,
}

pub fn optimize(cfg: &RunConfig) -> Result<String> {
    let state = arrangement(&cfg.params)?;
    let fixed = optimize_bell_with(&state, &optimize_options(cfg, false))?;
    let co = if cfg.co_optimize {
        Some(OptimumReport::from(&optimize_bell_with(&state, &optimize_options(cfg, true))?))
    } else {
        None
    };
    let report = OptimizeOutput {
        command: "optimize",
        config: cfg,
        result: (&fixed).into(),
        co_optimized: co,
    };
    emit(cfg.out.as_deref(), &report)
}

#[derive(Serialize)]
struct EntropyOutput<'a> {
    command: &'static str,
    state: &'a FamilyParams,
    projected_entropy: f64,
    alice_particle_distribution: Vec<f64>,
}

pub fn entropy(cfg: &RunConfig) -> Result<String> {
    let state = arrangement(&cfg.params)?;
    let report = EntropyOutput {
        command: "entropy",
        state: &cfg.params,
        projected_entropy: projected_entropy(&state)?,
        alice_particle_distribution: state.alice_particle_distribution(),
    };
    emit(cfg.out.as_deref(), &report)
}

/// `E_S` along one component, or why it is undefined.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezingValue {
    pub value: Option<f64>,
    pub squeezed: Option<bool>,
    pub undefined_reason: Option<String>,
}

pub fn squeezing_value(state: &ssrbell::PureState, component: SpinComponent) -> SqueezingValue {
    match squeezing_parameter_along(state, component) {
        Ok(v) => SqueezingValue {
            value: Some(v),
            squeezed: Some(v < 1.0),
            undefined_reason: None,
        },
        Err(e) => SqueezingValue {
            value: None,
            squeezed: None,
            undefined_reason: Some(e.to_string()),
        },
    }
}

#[derive(Serialize)]
struct SqueezingOutput<'a> {
    command: &'static str,
    state: &'a FamilyParams,
    particles: usize,
    /// Variance of the number difference in the numerator.
    sz_variance: SqueezingValue,
    /// Variance of the phase quadrature orthogonal to the mean spin.
    sy_variance: SqueezingValue,
}

pub fn squeezing(cfg: &RunConfig) -> Result<String> {
    let s = single_copy(&cfg.params)?;
    let report = SqueezingOutput {
        command: "squeezing",
        state: &cfg.params,
        particles: s.total(),
        sz_variance: squeezing_value(&s, SpinComponent::Z),
        sy_variance: squeezing_value(&s, SpinComponent::Y),
    };
    emit(cfg.out.as_deref(), &report)
}

#[derive(Serialize)]
struct CglmpOutput<'a> {
    command: &'static str,
    state: &'a FamilyParams,
    outcome_map: &'static str,
    d: usize,
    value: f64,
    bound: f64,
    violation: bool,
    settings: SettingsReport,
    grid_resolution: usize,
    refined: bool,
}

pub fn cglmp(cfg: &RunConfig) -> Result<String> {
    let state = arrangement(&cfg.params)?;
    let r = optimize_cglmp(&state, cfg.resolution.unwrap_or(DEFAULT_GRID_POINTS), cfg.refine)?;
    let report = CglmpOutput {
        command: "cglmp",
        state: &cfg.params,
        outcome_map: "(n, m) -> m",
        d: r.d,
        value: r.value,
        bound: CGLMP_BOUND,
        violation: r.violates(),
        settings: (&r.settings).into(),
        grid_resolution: r.grid_resolution,
        refined: r.refined,
    };
    emit(cfg.out.as_deref(), &report)
}
