//! Path discretization with fixed endpoints, norm machinery, and the
//! elliptic flight domain.
//!
//! Paths live on the pseudo-time interval [0,1] as piecewise-linear
//! functions over a uniform grid; their derivative is constant per
//! interval. A state pairs a path with the ground-speed scalar `L` that the
//! constant-speed constraint ties it to; a direction is a state
//! perturbation with pinned endpoints. L2 quantities of piecewise-linear /
//! piecewise-constant functions are integrated exactly.

use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Relative feasibility tolerance on the per-interval speed constraint.
pub const FEAS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryError {
    CoincidentEndpoints,
    ZeroLengthInterval { interval: usize },
    WindExceedsAirspeed,
    InvalidEllipse,
}

impl fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectoryError::CoincidentEndpoints => {
                write!(f, "origin and destination coincide")
            }
            TrajectoryError::ZeroLengthInterval { interval } => {
                write!(
                    f,
                    "zero-length interval {interval} cannot be reparametrized"
                )
            }
            TrajectoryError::WindExceedsAirspeed => {
                write!(f, "wind bound must stay below the airspeed")
            }
            TrajectoryError::InvalidEllipse => {
                write!(f, "ellipse major sum must cover the focal distance")
            }
        }
    }
}

impl std::error::Error for TrajectoryError {}

/// Piecewise-linear path on a uniform grid over [0,1] with fixed endpoints.
///
/// Only the `N-1` interior nodes are stored; node 0 and node N are the
/// origin and destination and never move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    x_o: Vec2,
    x_d: Vec2,
    interior: Vec<Vec2>,
}

impl Path {
    pub fn new(x_o: Vec2, x_d: Vec2, interior: Vec<Vec2>) -> Self {
        Path { x_o, x_d, interior }
    }

    /// Build a path from an explicit polyline including both endpoints.
    pub fn from_polyline(vertices: &[Vec2]) -> Self {
        assert!(vertices.len() >= 2, "polyline needs at least two vertices");
        Path {
            x_o: vertices[0],
            x_d: *vertices.last().unwrap(),
            interior: vertices[1..vertices.len() - 1].to_vec(),
        }
    }

    pub fn n_intervals(&self) -> usize {
        self.interior.len() + 1
    }

    pub fn x_o(&self) -> Vec2 {
        self.x_o
    }

    pub fn x_d(&self) -> Vec2 {
        self.x_d
    }

    pub fn interior(&self) -> &[Vec2] {
        &self.interior
    }

    /// Node `i` for `i = 0..=N`; endpoints included.
    pub fn node(&self, i: usize) -> Vec2 {
        let n = self.n_intervals();
        if i == 0 {
            self.x_o
        } else if i == n {
            self.x_d
        } else {
            self.interior[i - 1]
        }
    }

    pub fn nodes(&self) -> Vec<Vec2> {
        (0..=self.n_intervals()).map(|i| self.node(i)).collect()
    }

    /// Path derivative on interval `i` (constant there): `N * (node_{i+1} - node_i)`.
    pub fn velocity(&self, i: usize) -> Vec2 {
        let n = self.n_intervals() as f64;
        (self.node(i + 1) - self.node(i)) * n
    }

    /// Evaluate the path at pseudo-time `tau` in [0,1].
    pub fn position(&self, tau: f64) -> Vec2 {
        let n = self.n_intervals();
        let scaled = (tau * n as f64).clamp(0.0, n as f64);
        let i = (scaled.floor() as usize).min(n - 1);
        let s = scaled - i as f64;
        self.node(i).lerp(self.node(i + 1), s)
    }

    /// Total polyline length.
    pub fn arc_length(&self) -> f64 {
        (0..self.n_intervals())
            .map(|i| (self.node(i + 1) - self.node(i)).norm())
            .sum()
    }
}

/// State `z = (L, xi)`: the ground-speed scalar together with a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    l: f64,
    path: Path,
    feasible: bool,
}

impl State {
    /// The feasibility flag records whether the speed constraint holds on
    /// every interval at construction time (relative to [`FEAS_TOL`]).
    pub fn new(l: f64, path: Path) -> Self {
        let feasible = feasibility_residual(l, &path) <= FEAS_TOL;
        State { l, path, feasible }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn n_intervals(&self) -> usize {
        self.path.n_intervals()
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    /// `max_i | ||xi_tau,i||^2 - L^2 | / L^2`.
    pub fn feasibility_residual(&self) -> f64 {
        feasibility_residual(self.l, &self.path)
    }

    /// `|L| + sup ||xi|| + max_i ||xi_tau,i||`. The supremum of the norm of
    /// a piecewise-linear function is attained at a node.
    pub fn norm_zinf(&self) -> f64 {
        let sup_xi = self
            .path
            .nodes()
            .iter()
            .map(|p| p.norm())
            .fold(0.0, f64::max);
        let sup_v = (0..self.n_intervals())
            .map(|i| self.path.velocity(i).norm())
            .fold(0.0, f64::max);
        self.l.abs() + sup_xi + sup_v
    }

    /// `|L| + ||xi||_L2 + ||xi_tau||_L2` with exact piecewise integrals.
    pub fn norm_z2(&self) -> f64 {
        let nodes = self.path.nodes();
        self.l.abs() + l2_norm_pl(&nodes) + l2_norm_pc_velocity(&nodes)
    }

    /// Apply a direction: `z + delta`, keeping the grid and endpoints.
    pub fn offset(&self, dir: &Direction) -> State {
        assert_eq!(dir.dnodes.len() + 1, self.n_intervals());
        let interior: Vec<Vec2> = self
            .path
            .interior
            .iter()
            .zip(&dir.dnodes)
            .map(|(p, d)| *p + *d)
            .collect();
        State::new(
            self.l + dir.dl,
            Path::new(self.path.x_o, self.path.x_d, interior),
        )
    }

    /// JSON object `{x_O, x_D, N, nodes, L}` with the full node list.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<[f64; 2]> = self.path.nodes().iter().map(|p| [p.x, p.y]).collect();
        serde_json::json!({
            "x_O": [self.path.x_o.x, self.path.x_o.y],
            "x_D": [self.path.x_d.x, self.path.x_d.y],
            "N": self.n_intervals(),
            "nodes": nodes,
            "L": self.l,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Option<State> {
        let nodes = v.get("nodes")?.as_array()?;
        let vertices: Option<Vec<Vec2>> = nodes
            .iter()
            .map(|p| {
                let a = p.as_array()?;
                Some(Vec2::new(a.first()?.as_f64()?, a.get(1)?.as_f64()?))
            })
            .collect();
        let l = v.get("L")?.as_f64()?;
        Some(State::new(l, Path::from_polyline(&vertices?)))
    }

    /// CSV with columns `tau,x,y`, one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,x,y\n");
        let n = self.n_intervals();
        for (i, p) in self.path.nodes().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(i as f64 / n as f64),
                fmt_f64(p.x),
                fmt_f64(p.y)
            ));
        }
        out
    }
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn feasibility_residual(l: f64, path: &Path) -> f64 {
    let l2 = l * l;
    (0..path.n_intervals())
        .map(|i| (path.velocity(i).norm_sq() - l2).abs())
        .fold(0.0, f64::max)
        / l2.max(f64::MIN_POSITIVE)
}

/// State perturbation `(dL, d xi)` with zero displacement at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dl: f64,
    pub dnodes: Vec<Vec2>,
}

impl Direction {
    pub fn zero(n_intervals: usize) -> Self {
        Direction {
            dl: 0.0,
            dnodes: vec![Vec2::ZERO; n_intervals - 1],
        }
    }

    pub fn n_intervals(&self) -> usize {
        self.dnodes.len() + 1
    }

    /// Displacement at interior node `j` (1-based like path nodes).
    pub fn dnode(&self, i: usize) -> Vec2 {
        let n = self.n_intervals();
        if i == 0 || i == n {
            Vec2::ZERO
        } else {
            self.dnodes[i - 1]
        }
    }

    pub fn velocity(&self, i: usize) -> Vec2 {
        let n = self.n_intervals() as f64;
        (self.dnode(i + 1) - self.dnode(i)) * n
    }

    /// Value of the displacement field at `tau`.
    pub fn value(&self, tau: f64) -> Vec2 {
        let n = self.n_intervals();
        let scaled = (tau * n as f64).clamp(0.0, n as f64);
        let i = (scaled.floor() as usize).min(n - 1);
        let s = scaled - i as f64;
        self.dnode(i).lerp(self.dnode(i + 1), s)
    }

    fn full_nodes(&self) -> Vec<Vec2> {
        let n = self.n_intervals();
        (0..=n).map(|i| self.dnode(i)).collect()
    }

    pub fn norm_zinf(&self) -> f64 {
        let sup = self.dnodes.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let sup_v = (0..self.n_intervals())
            .map(|i| self.velocity(i).norm())
            .fold(0.0, f64::max);
        self.dl.abs() + sup + sup_v
    }

    pub fn norm_z2(&self) -> f64 {
        let nodes = self.full_nodes();
        self.dl.abs() + l2_norm_pl(&nodes) + l2_norm_pc_velocity(&nodes)
    }

    /// Exact `||d xi||_L2` of the displacement field.
    pub fn l2_value(&self) -> f64 {
        l2_norm_pl(&self.full_nodes())
    }

    /// Exact `||d xi_tau||_L2`.
    pub fn l2_velocity(&self) -> f64 {
        l2_norm_pc_velocity(&self.full_nodes())
    }

    /// Coefficient layout shared with the KKT solver: `[dL, n1x, n1y, ...]`.
    pub fn to_coeffs(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(1 + 2 * self.dnodes.len());
        c.push(self.dl);
        for p in &self.dnodes {
            c.push(p.x);
            c.push(p.y);
        }
        c
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(
            coeffs.len() % 2 == 1,
            "coefficient vector must have odd length"
        );
        let dnodes = coeffs[1..]
            .chunks_exact(2)
            .map(|c| Vec2::new(c[0], c[1]))
            .collect();
        Direction {
            dl: coeffs[0],
            dnodes,
        }
    }

    pub fn scale(&self, s: f64) -> Direction {
        Direction {
            dl: self.dl * s,
            dnodes: self.dnodes.iter().map(|p| *p * s).collect(),
        }
    }

    pub fn add(&self, o: &Direction) -> Direction {
        assert_eq!(self.dnodes.len(), o.dnodes.len());
        Direction {
            dl: self.dl + o.dl,
            dnodes: self
                .dnodes
                .iter()
                .zip(&o.dnodes)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

/// Difference `a - b` of two states on the same grid with equal endpoints;
/// the result is a valid zero-boundary direction.
pub fn state_delta(a: &State, b: &State) -> Direction {
    assert_eq!(a.n_intervals(), b.n_intervals(), "grid mismatch");
    assert_eq!(a.path.x_o, b.path.x_o);
    assert_eq!(a.path.x_d, b.path.x_d);
    Direction {
        dl: a.l - b.l,
        dnodes: a
            .path
            .interior
            .iter()
            .zip(&b.path.interior)
            .map(|(p, q)| *p - *q)
            .collect(),
    }
}

/// Exact `||f||_L2` of the piecewise-linear function through `nodes` on a
/// uniform grid over [0,1]. Per interval the integrand is quadratic, so
/// `int = (|a|^2 + a.b + |b|^2) / (3N)`.
pub fn l2_norm_pl(nodes: &[Vec2]) -> f64 {
    let n = nodes.len() - 1;
    let mut acc = 0.0;
    for i in 0..n {
        let a = nodes[i];
        let b = nodes[i + 1];
        acc += (a.norm_sq() + a.dot(b) + b.norm_sq()) / 3.0;
    }
    (acc / n as f64).sqrt()
}

/// Exact `||f_tau||_L2` of the same function (derivative is constant per
/// interval).
pub fn l2_norm_pc_velocity(nodes: &[Vec2]) -> f64 {
    let n = nodes.len() - 1;
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += ((nodes[i + 1] - nodes[i]) * nf).norm_sq();
    }
    (acc / nf).sqrt()
}

/// Elliptic flight domain: all `x` with `|x - f_a| + |x - f_b| <= major_sum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub focus_a: Vec2,
    pub focus_b: Vec2,
    pub major_sum: f64,
}

impl Ellipse {
    pub fn new(focus_a: Vec2, focus_b: Vec2, major_sum: f64) -> Result<Self, TrajectoryError> {
        if !(major_sum > 0.0) || major_sum < focus_a.dist(focus_b) {
            return Err(TrajectoryError::InvalidEllipse);
        }
        Ok(Ellipse {
            focus_a,
            focus_b,
            major_sum,
        })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.dist(self.focus_a) + p.dist(self.focus_b)
            <= self.major_sum + 1e-9 * self.major_sum.max(1.0)
    }

    pub fn center(&self) -> Vec2 {
        (self.focus_a + self.focus_b) * 0.5
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        let a = self.major_sum * 0.5;
        let c = self.focus_a.dist(self.focus_b) * 0.5;
        (a, (a * a - c * c).max(0.0).sqrt())
    }

    /// Axis-aligned bounding box (the ellipse axes are generally tilted, so
    /// this is the exact box of the tilted ellipse).
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let (a, b) = self.semi_axes();
        let c = self.center();
        let d = self.focus_b - self.focus_a;
        let (cos_t, sin_t) = if d.norm() > 0.0 {
            let u = d.unit();
            (u.x, u.y)
        } else {
            (1.0, 0.0)
        };
        // Extent of a rotated ellipse along each axis.
        let ex = ((a * cos_t).powi(2) + (b * sin_t).powi(2)).sqrt();
        let ey = ((a * sin_t).powi(2) + (b * cos_t).powi(2)).sqrt();
        (c - Vec2::new(ex, ey), c + Vec2::new(ex, ey))
    }
}

/// Straight-line state: uniformly spaced nodes on the segment, `L` equal to
/// its length. The default feasible initializer.
pub fn straight_line(x_o: Vec2, x_d: Vec2, n: usize) -> Result<State, TrajectoryError> {
    assert!(n >= 1);
    if x_o == x_d {
        return Err(TrajectoryError::CoincidentEndpoints);
    }
    let interior = (1..n).map(|i| x_o.lerp(x_d, i as f64 / n as f64)).collect();
    Ok(State::new(x_d.dist(x_o), Path::new(x_o, x_d, interior)))
}

/// Constant-ground-speed representative: same polyline geometry with nodes
/// equally spaced in arc length, and `L` the total length.
pub fn reparametrize_constant_speed(path: &Path) -> Result<State, TrajectoryError> {
    let n = path.n_intervals();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for i in 0..n {
        let seg = (path.node(i + 1) - path.node(i)).norm();
        if seg == 0.0 {
            return Err(TrajectoryError::ZeroLengthInterval { interval: i });
        }
        cumulative.push(cumulative[i] + seg);
    }
    let total = cumulative[n];
    let mut interior = Vec::with_capacity(n - 1);
    let mut seg = 0usize;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while seg + 1 < n && cumulative[seg + 1] < target {
            seg += 1;
        }
        let t = (target - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]);
        interior.push(path.node(seg).lerp(path.node(seg + 1), t));
    }
    Ok(State::new(
        total,
        Path::new(path.x_o(), path.x_d(), interior),
    ))
}

/// Transfer a state onto `m` uniform intervals: piecewise-linear
/// interpolation in pseudo-time followed by constant-speed
/// reparametrization.
pub fn resample(state: &State, m: usize) -> Result<State, TrajectoryError> {
    assert!(m >= 1);
    let vertices: Vec<Vec2> = (0..=m)
        .map(|j| state.path().position(j as f64 / m as f64))
        .collect();
    reparametrize_constant_speed(&Path::from_polyline(&vertices))
}

/// Flight domain from the path-length bound: an ellipse with the endpoints
/// as foci and major sum `L_tilde * (v + c0) / (v - c0)`.
pub fn ellipse_domain(
    x_o: Vec2,
    x_d: Vec2,
    v_bar: f64,
    c0: f64,
) -> Result<Ellipse, TrajectoryError> {
    if c0 >= v_bar {
        return Err(TrajectoryError::WindExceedsAirspeed);
    }
    let l_tilde = x_d.dist(x_o);
    Ellipse::new(x_o, x_d, l_tilde * (v_bar + c0) / (v_bar - c0))
}
