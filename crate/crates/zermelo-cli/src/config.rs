//! Scenario files: a flat JSON document describing one navigation problem.
//! Unknown keys are rejected so typos in numeric experiments surface
//! immediately.

use serde::Deserialize;
use zermelo::geometry::Vec2;
use zermelo::kkt::{Damping, SolveOptions};
use zermelo::trajectory::{ellipse_domain, Ellipse};
use zermelo::windfield::{compute_bounds, WindBounds, WindField};

#[derive(Debug)]
pub enum ScenarioError {
    Io(std::io::Error),
    Parse(serde_json::Error),
    Invalid(String),
    /// The wind reaches the airspeed somewhere in the flight domain.
    Infeasible {
        c0: f64,
        airspeed: f64,
    },
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Io(e) => write!(f, "cannot read config: {e}"),
            ScenarioError::Parse(e) => write!(f, "config parse error: {e}"),
            ScenarioError::Invalid(m) => write!(f, "invalid scenario: {m}"),
            ScenarioError::Infeasible { c0, airspeed } => {
                write!(
                    f,
                    "infeasible scenario: wind bound {c0} reaches airspeed {airspeed}"
                )
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<Damping>,
    pub speed_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub h: Option<f64>,
    pub ell: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "x_O")]
    pub x_o: Vec2,
    #[serde(rename = "x_D")]
    pub x_d: Vec2,
    pub airspeed: f64,
    pub wind: WindField,
    #[serde(rename = "N")]
    pub n: usize,
    pub solver: Option<SolverConfig>,
    pub graph: Option<GraphConfig>,
    pub seed: Option<u64>,
}

/// A scenario with its derived quantities: flight domain, wind bounds over
/// it, and resolved solver options.
pub struct Prepared {
    pub scenario: Scenario,
    pub l_tilde: f64,
    pub domain: Ellipse,
    pub wind_bounds: WindBounds,
    pub solve_options: SolveOptions,
    pub graph_h: f64,
    pub graph_ell: f64,
    pub graph_k: usize,
    pub seed: u64,
}

pub fn load(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(ScenarioError::Io)?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(ScenarioError::Parse)?;
    Ok(scenario)
}

/// Validate the scenario and derive the flight domain. The domain depends
/// on the wind bound and the bound is taken over the domain, so the pair
/// is resolved by a short monotone fixed-point iteration; if the bound
/// climbs to the airspeed the scenario is infeasible.
pub fn prepare(scenario: Scenario, seed_override: Option<u64>) -> Result<Prepared, ScenarioError> {
    if !(scenario.airspeed > 0.0) {
        return Err(ScenarioError::Invalid("airspeed must be positive".into()));
    }
    if scenario.x_o == scenario.x_d {
        return Err(ScenarioError::Invalid(
            "origin and destination coincide".into(),
        ));
    }
    if scenario.n < 2 {
        return Err(ScenarioError::Invalid("N must be at least 2".into()));
    }
    let l_tilde = scenario.x_d.dist(scenario.x_o);
    let v_bar = scenario.airspeed;

    // Seed slightly positive: a field that vanishes on the direct segment
    // (a shear, say) would otherwise lock the domain in its degenerate
    // fixed point and never see the off-axis wind.
    let mut c0 = 0.05 * v_bar;
    let mut resolved = None;
    for _ in 0..60 {
        let domain = ellipse_domain(scenario.x_o, scenario.x_d, v_bar, c0).map_err(|_| {
            ScenarioError::Infeasible {
                c0,
                airspeed: v_bar,
            }
        })?;
        let wb = compute_bounds(&scenario.wind, &domain, 80, 1.1)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if wb.c0 >= v_bar {
            return Err(ScenarioError::Infeasible {
                c0: wb.c0,
                airspeed: v_bar,
            });
        }
        let settled = (wb.c0 - c0).abs() <= 1e-9 * v_bar;
        c0 = wb.c0;
        resolved = Some(wb);
        if settled {
            break;
        }
    }
    let wind_bounds = resolved.expect("bound iteration ran");
    let domain = wind_bounds.domain.clone();

    let defaults = SolveOptions::for_scale(l_tilde, v_bar);
    let solve_options = match &scenario.solver {
        None => defaults,
        Some(s) => SolveOptions {
            tol_abs: s.tol_abs.unwrap_or(defaults.tol_abs),
            tol_rel: s.tol_rel.unwrap_or(defaults.tol_rel),
            max_iter: s.max_iter.unwrap_or(defaults.max_iter),
            damping: s.damping.unwrap_or(defaults.damping),
            speed_floor: s.speed_floor.unwrap_or(defaults.speed_floor),
        },
    };
    let (graph_h, graph_ell, graph_k) = match &scenario.graph {
        None => (l_tilde / 10.0, 2.5 * l_tilde / 10.0, 8),
        Some(g) => {
            let h = g.h.unwrap_or(l_tilde / 10.0);
            (h, g.ell.unwrap_or(2.5 * h), g.k.unwrap_or(8))
        }
    };
    let seed = seed_override.or(scenario.seed).unwrap_or(0);
    Ok(Prepared {
        l_tilde,
        domain,
        wind_bounds,
        solve_options,
        graph_h,
        graph_ell,
        graph_k,
        seed,
        scenario,
    })
}
