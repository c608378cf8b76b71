//! Serializable report records shared by the commands.

use serde::Serialize;
use ssrbell::analysis::OptimizationResult;
use ssrbell::BellSettings;

/// Local-realistic bound on the Bell term.
pub const CLASSICAL_BOUND: f64 = 2.0;

/// Values within this of the bound are rounding, not violation.
pub const VIOLATION_MARGIN: f64 = 1e-9;

/// `value` exceeds the classical bound by more than rounding.
pub fn is_violation(value: f64) -> bool {
    value > CLASSICAL_BOUND + VIOLATION_MARGIN
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingsReport {
    pub phi_a1: f64,
    pub phi_a2: f64,
    pub phi_b1: f64,
    pub phi_b2: f64,
    pub alpha_alice: f64,
    pub alpha_bob: f64,
}

impl From<&BellSettings> for SettingsReport {
    fn from(s: &BellSettings) -> Self {
        let [phi_a1, phi_a2, phi_b1, phi_b2] = s.angles();
        Self {
            phi_a1,
            phi_a2,
            phi_b1,
            phi_b2,
            alpha_alice: s.alice.0.params.alpha(),
            alpha_bob: s.bob.0.params.alpha(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimumReport {
    pub best_value: f64,
    pub best_settings: SettingsReport,
    pub grid_resolution: usize,
    pub refined: bool,
    pub grid_value: f64,
    pub transmissivity_optimized: bool,
    pub violation: bool,
}

impl From<&OptimizationResult> for OptimumReport {
    fn from(r: &OptimizationResult) -> Self {
        Self {
            best_value: r.best_value,
            best_settings: (&r.best_settings).into(),
            grid_resolution: r.grid_resolution,
            refined: r.refined,
            grid_value: r.grid_value,
            transmissivity_optimized: r.transmissivity_optimized,
            violation: is_violation(r.best_value),
        }
    }
}

/// One comparison against a quoted number or a stated property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    #[serde(flatten)]
    pub expectation: Expectation,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Within { target: f64, tolerance: f64 },
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    /// A property measured by a deviation that must stay within `tolerance`.
    Property { description: String, tolerance: f64 },
}

impl Check {
    pub fn within(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expectation: Expectation::Within { target, tolerance },
            pass: (measured - target).abs() <= tolerance,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expectation: Expectation::AtMost { bound },
            pass: measured <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expectation: Expectation::AtLeast { bound },
            pass: measured >= bound,
        }
    }

    /// `deviation` is how far the property is from holding; zero or less is exact.
    pub fn property(name: impl Into<String>, description: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured: deviation,
            expectation: Expectation::Property {
                description: description.into(),
                tolerance,
            },
            pass: deviation <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let detail = match &self.expectation {
            Expectation::Within { target, tolerance } => format!("{} vs {target} ± {tolerance}", self.measured),
            Expectation::AtMost { bound } => format!("{} <= {bound}", self.measured),
            Expectation::AtLeast { bound } => format!("{} >= {bound}", self.measured),
            Expectation::Property { description, tolerance } => {
                format!("{description}: deviation {} (tolerance {tolerance})", self.measured)
            }
        };
        format!("{verdict} {}: {detail}", self.name)
    }
}
