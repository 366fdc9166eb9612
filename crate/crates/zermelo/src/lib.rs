//! Time-optimal route planning through a stationary planar wind field.
//!
//! An aircraft flies with constant airspeed through a smooth wind field; the
//! task is to find the route from origin to destination with minimal flight
//! duration. The toolkit combines two stages:
//!
//! 1. a global search that builds a densely connected digraph over the
//!    admissible region and enumerates shortest simple paths (Yen's
//!    algorithm) as candidate routes ([`global_search`]), and
//! 2. a Newton-KKT (SQP) refinement of each candidate on a piecewise-linear
//!    path discretization with a constant-ground-speed constraint ([`kkt`]).
//!
//! The remaining modules supply the machinery convergence analysis is built
//! on: analytic wind fields with exact derivatives up to third order
//! ([`windfield`]), path discretization and norm machinery ([`trajectory`]),
//! the travel-time integrand with its closed-form derivative cascades
//! ([`functional`]), and the quantitative constants of the convergence
//! theory together with randomized bound verification ([`bounds`]).
//!
//! ```
//! use zermelo::functional::KKTIterate;
//! use zermelo::kkt::{solve, SolveOptions};
//! use zermelo::trajectory::straight_line;
//! use zermelo::windfield::WindField;
//! use zermelo::Vec2;
//!
//! let wind = WindField::GaussianVortex {
//!     center: Vec2::new(0.5, 0.0),
//!     amplitude: 0.35,
//!     width: 0.35,
//! };
//! let start = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 16).unwrap();
//! let report = solve(
//!     &KKTIterate::feasible_start(start),
//!     &wind,
//!     1.0,
//!     &SolveOptions::for_scale(1.0, 1.0),
//! );
//! assert!(report.converged());
//! assert!(report.final_t(&wind, 1.0).unwrap() < 1.0);
//! ```

pub mod bounds;
pub mod functional;
pub mod geometry;
pub mod global_search;
pub mod kkt;
pub mod linalg;
pub mod trajectory;
pub mod windfield;

pub use geometry::Vec2;
