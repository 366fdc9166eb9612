//! Analytic wind fields with exact derivatives up to third order and
//! supremum bounds over a flight domain.
//!
//! Every built-in kind is smooth, so the regularity the travel-time
//! derivative cascades need ("three times continuously differentiable")
//! holds everywhere. Derivative tensors follow the convention
//! `t[i][j..] = d^k w_i / dx_j ...` and are symmetric in the spatial
//! indices.

use crate::geometry::{Mat2, Tensor3, Tensor4, Vec2};
use crate::trajectory::Ellipse;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum WindError {
    /// The domain has no extent: nothing to take a supremum over.
    DegenerateDomain,
    GridTooCoarse,
}

impl fmt::Display for WindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindError::DegenerateDomain => write!(f, "degenerate domain: zero-length focal axis"),
            WindError::GridTooCoarse => {
                write!(f, "bound sampling needs at least 2 grid points per axis")
            }
        }
    }
}

impl std::error::Error for WindError {}

/// A stationary planar wind field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WindField {
    /// `w(x) = v` everywhere.
    Constant { vector: Vec2 },
    /// `w(x) = A x`.
    LinearShear { matrix: Mat2 },
    /// Rotational field `w(x) = a * rot90(x - c) * exp(-|x - c|^2 / (2 s^2))`.
    ///
    /// Smooth, bounded, decaying; vanishes at its own center. A vortex
    /// placed between origin and destination splits the route candidates
    /// into pass-left / pass-right families, which is what the global
    /// search stage is exercised on.
    GaussianVortex {
        center: Vec2,
        amplitude: f64,
        width: f64,
    },
    /// Pointwise sum of component fields.
    Superposition { components: Vec<WindField> },
}

impl WindField {
    pub fn zero() -> Self {
        WindField::Constant { vector: Vec2::ZERO }
    }

    /// Wind vector at `x`.
    pub fn eval(&self, x: Vec2) -> Vec2 {
        match self {
            WindField::Constant { vector } => *vector,
            WindField::LinearShear { matrix } => matrix.mul_vec(x),
            WindField::GaussianVortex {
                center,
                amplitude,
                width,
            } => {
                let r = x - *center;
                let phi = (-r.norm_sq() / (2.0 * width * width)).exp();
                r.perp() * (*amplitude * phi)
            }
            WindField::Superposition { components } => {
                components.iter().fold(Vec2::ZERO, |acc, c| acc + c.eval(x))
            }
        }
    }

    /// Jacobian `dw_i/dx_j` at `x`.
    pub fn jacobian(&self, x: Vec2) -> Mat2 {
        match self {
            WindField::Constant { .. } => Mat2::ZERO,
            WindField::LinearShear { matrix } => *matrix,
            WindField::GaussianVortex {
                center,
                amplitude,
                width,
            } => {
                let r = x - *center;
                let s2 = width * width;
                let phi = (-r.norm_sq() / (2.0 * s2)).exp();
                let pr = r.perp();
                let rv = [r.x, r.y];
                let prv = [pr.x, pr.y];
                let mut m = Mat2::ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        m.0[i][j] = amplitude * phi * (PERP[i][j] - prv[i] * rv[j] / s2);
                    }
                }
                m
            }
            WindField::Superposition { components } => components
                .iter()
                .fold(Mat2::ZERO, |acc, c| acc.add(&c.jacobian(x))),
        }
    }

    /// Second derivative tensor at `x`.
    pub fn hessian(&self, x: Vec2) -> Tensor3 {
        match self {
            WindField::Constant { .. } | WindField::LinearShear { .. } => Tensor3::ZERO,
            WindField::GaussianVortex {
                center,
                amplitude,
                width,
            } => {
                let r = x - *center;
                let s2 = width * width;
                let phi = (-r.norm_sq() / (2.0 * s2)).exp();
                let pr = r.perp();
                let rv = [r.x, r.y];
                let prv = [pr.x, pr.y];
                let mut t = Tensor3::ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            let g =
                                -(PERP[i][j] * rv[k] + PERP[i][k] * rv[j] + prv[i] * DELTA[j][k])
                                    / s2
                                    + prv[i] * rv[j] * rv[k] / (s2 * s2);
                            t.0[i][j][k] = amplitude * phi * g;
                        }
                    }
                }
                t
            }
            WindField::Superposition { components } => components
                .iter()
                .fold(Tensor3::ZERO, |acc, c| acc.add(&c.hessian(x))),
        }
    }

    /// Third derivative tensor at `x`.
    pub fn third(&self, x: Vec2) -> Tensor4 {
        match self {
            WindField::Constant { .. } | WindField::LinearShear { .. } => Tensor4::ZERO,
            WindField::GaussianVortex {
                center,
                amplitude,
                width,
            } => {
                let r = x - *center;
                let s2 = width * width;
                let s4 = s2 * s2;
                let phi = (-r.norm_sq() / (2.0 * s2)).exp();
                let pr = r.perp();
                let rv = [r.x, r.y];
                let prv = [pr.x, pr.y];
                let mut t = Tensor4::ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            // G_{ijk} as in `hessian`, differentiated in x_l.
                            let g =
                                -(PERP[i][j] * rv[k] + PERP[i][k] * rv[j] + prv[i] * DELTA[j][k])
                                    / s2
                                    + prv[i] * rv[j] * rv[k] / s4;
                            for l in 0..2 {
                                let dg = -(PERP[i][j] * DELTA[k][l]
                                    + PERP[i][k] * DELTA[j][l]
                                    + PERP[i][l] * DELTA[j][k])
                                    / s2
                                    + (PERP[i][l] * rv[j] * rv[k]
                                        + prv[i] * DELTA[j][l] * rv[k]
                                        + prv[i] * rv[j] * DELTA[k][l])
                                        / s4;
                                t.0[i][j][k][l] = amplitude * phi * (dg - rv[l] * g / s2);
                            }
                        }
                    }
                }
                t
            }
            WindField::Superposition { components } => components
                .iter()
                .fold(Tensor4::ZERO, |acc, c| acc.add(&c.third(x))),
        }
    }

    /// A characteristic length over which the field varies; used to size
    /// finite-difference steps and sampling regions.
    pub fn length_scale(&self) -> f64 {
        match self {
            WindField::Constant { .. } | WindField::LinearShear { .. } => 1.0,
            WindField::GaussianVortex { width, .. } => *width,
            WindField::Superposition { components } => components
                .iter()
                .map(|c| c.length_scale())
                .fold(f64::INFINITY, f64::min)
                .min(1.0),
        }
    }

    /// Box within which the field shows its structure.
    fn sample_region(&self) -> (Vec2, f64) {
        match self {
            WindField::Constant { .. } | WindField::LinearShear { .. } => (Vec2::ZERO, 2.0),
            WindField::GaussianVortex { center, width, .. } => (*center, 3.0 * width),
            WindField::Superposition { components } => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for c in components {
                    let (ctr, rad) = c.sample_region();
                    lo.x = lo.x.min(ctr.x - rad);
                    lo.y = lo.y.min(ctr.y - rad);
                    hi.x = hi.x.max(ctr.x + rad);
                    hi.y = hi.y.max(ctr.y + rad);
                }
                let ctr = (lo + hi) * 0.5;
                ((lo + hi) * 0.5, (hi - ctr).x.max((hi - ctr).y).max(1.0))
            }
        }
    }
}

const PERP: [[f64; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];
const DELTA: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    /// Exact suprema.
    Analytic,
    /// Grid maxima times the safety factor: an estimate, not a certificate.
    Sampled,
}

/// Supremum bounds of a field and its derivatives over a domain.
///
/// `c0` bounds the wind speed, `c1..c3` the derivative tensors in the
/// Frobenius norm (an upper bound on the spectral norm, so the direction of
/// the inequality is preserved).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindBounds {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub domain: Ellipse,
    pub method: BoundMethod,
    pub safety_factor: f64,
}

impl WindBounds {
    /// `v_lower^2 = v^2 - c0^2`.
    pub fn v_lower(&self, v_bar: f64) -> f64 {
        (v_bar * v_bar - self.c0 * self.c0).sqrt()
    }

    /// `v_upper^2 = v^2 + c0^2`.
    pub fn v_upper(&self, v_bar: f64) -> f64 {
        (v_bar * v_bar + self.c0 * self.c0).sqrt()
    }

    /// Whether `c0 <= v / sqrt(5)` holds, the hypothesis under which the
    /// rounded derivative-bound constants are valid.
    pub fn within_bound_hypothesis(&self, v_bar: f64) -> bool {
        self.c0 <= v_bar / 5.0f64.sqrt()
    }
}

/// Supremum bounds over `domain`. Constant and linear-shear fields get
/// exact values; everything else is sampled on a uniform grid over the
/// domain's bounding box (points outside discarded) and inflated by
/// `safety_factor`.
pub fn compute_bounds(
    field: &WindField,
    domain: &Ellipse,
    grid_resolution: usize,
    safety_factor: f64,
) -> Result<WindBounds, WindError> {
    if grid_resolution < 2 {
        return Err(WindError::GridTooCoarse);
    }
    if !(domain.major_sum > 0.0) {
        return Err(WindError::DegenerateDomain);
    }
    match field {
        WindField::Constant { vector } => Ok(WindBounds {
            c0: vector.norm(),
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            domain: domain.clone(),
            method: BoundMethod::Analytic,
            safety_factor,
        }),
        WindField::LinearShear { matrix } => Ok(WindBounds {
            c0: shear_speed_supremum(matrix, domain),
            c1: matrix.frobenius(),
            c2: 0.0,
            c3: 0.0,
            domain: domain.clone(),
            method: BoundMethod::Analytic,
            safety_factor,
        }),
        _ => {
            let (lo, hi) = domain.bounding_box();
            let mut c = [0.0f64; 4];
            let mut kept = 0usize;
            for ix in 0..grid_resolution {
                for iy in 0..grid_resolution {
                    let fx = if grid_resolution > 1 {
                        ix as f64 / (grid_resolution - 1) as f64
                    } else {
                        0.5
                    };
                    let fy = if grid_resolution > 1 {
                        iy as f64 / (grid_resolution - 1) as f64
                    } else {
                        0.5
                    };
                    let p = Vec2::new(lo.x + (hi.x - lo.x) * fx, lo.y + (hi.y - lo.y) * fy);
                    if !domain.contains(p) {
                        continue;
                    }
                    kept += 1;
                    c[0] = c[0].max(field.eval(p).norm());
                    c[1] = c[1].max(field.jacobian(p).frobenius());
                    c[2] = c[2].max(field.hessian(p).frobenius());
                    c[3] = c[3].max(field.third(p).frobenius());
                }
            }
            if kept == 0 {
                return Err(WindError::DegenerateDomain);
            }
            Ok(WindBounds {
                c0: c[0] * safety_factor,
                c1: c[1] * safety_factor,
                c2: c[2] * safety_factor,
                c3: c[3] * safety_factor,
                domain: domain.clone(),
                method: BoundMethod::Sampled,
                safety_factor,
            })
        }
    }
}

/// `sup_{x in domain} |A x|`. The norm is convex, so the supremum sits on
/// the boundary; on the boundary parametrization it is a degree-2 trig
/// polynomial, maximized by a dense scan plus local golden-section
/// refinement.
fn shear_speed_supremum(a: &Mat2, domain: &Ellipse) -> f64 {
    let (sa, sb) = domain.semi_axes();
    let ctr = domain.center();
    let d = domain.focus_b - domain.focus_a;
    let u = if d.norm() > 0.0 {
        d.unit()
    } else {
        Vec2::new(1.0, 0.0)
    };
    let point = |theta: f64| {
        let e1 = u * (sa * theta.cos());
        let e2 = u.perp() * (sb * theta.sin());
        ctr + e1 + e2
    };
    let val = |theta: f64| a.mul_vec(point(theta)).norm_sq();
    let scans = 4096;
    let mut best = (0.0f64, 0.0f64);
    for i in 0..scans {
        let th = 2.0 * std::f64::consts::PI * i as f64 / scans as f64;
        let v = val(th);
        if v > best.1 {
            best = (th, v);
        }
    }
    // Golden-section refinement around the best scan point.
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (
        best.0 - 2.0 * std::f64::consts::PI / scans as f64,
        best.0 + 2.0 * std::f64::consts::PI / scans as f64,
    );
    for _ in 0..80 {
        let x1 = hi - gr * (hi - lo);
        let x2 = lo + gr * (hi - lo);
        if val(x1) > val(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    val(0.5 * (lo + hi)).sqrt().max(best.1.sqrt())
}

/// Result of the finite-difference self-check of a field's derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct FieldVerifyReport {
    pub sample_count: usize,
    /// Max relative error per derivative order (1..3).
    pub max_rel_err: [f64; 3],
    pub pass: bool,
}

pub const FIELD_VERIFY_TOL: f64 = 1e-5;

/// Check each derivative order against central finite differences of the
/// next lower order at random sample points.
pub fn verify_field(field: &WindField, sample_count: usize, seed: u64) -> FieldVerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (center, radius) = field.sample_region();
    let scale = field.length_scale();
    let h = 1e-4 * scale;
    let mut max_err = [0.0f64; 3];

    for _ in 0..sample_count {
        let x = center
            + Vec2::new(
                rng.gen_range(-radius..radius),
                rng.gen_range(-radius..radius),
            );
        let steps = [Vec2::new(h, 0.0), Vec2::new(0.0, h)];

        // Order 1: dw/dx_j vs (w(x+h e_j) - w(x-h e_j)) / 2h.
        let jac = field.jacobian(x);
        let scale1 = jac.frobenius().max(field.eval(x).norm() / scale).max(1e-9);
        for (j, e) in steps.iter().enumerate() {
            let fd = (field.eval(x + *e) - field.eval(x - *e)) / (2.0 * h);
            let fdv = [fd.x, fd.y];
            for i in 0..2 {
                max_err[0] = max_err[0].max((jac.0[i][j] - fdv[i]).abs() / scale1);
            }
        }

        // Order 2 vs FD of the Jacobian.
        let hess = field.hessian(x);
        let scale2 = hess.frobenius().max(jac.frobenius() / scale).max(1e-9);
        for (k, e) in steps.iter().enumerate() {
            let jp = field.jacobian(x + *e);
            let jm = field.jacobian(x - *e);
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (jp.0[i][j] - jm.0[i][j]) / (2.0 * h);
                    max_err[1] = max_err[1].max((hess.0[i][j][k] - fd).abs() / scale2);
                }
            }
        }

        // Order 3 vs FD of the Hessian.
        let third = field.third(x);
        let scale3 = third.frobenius().max(hess.frobenius() / scale).max(1e-9);
        for (l, e) in steps.iter().enumerate() {
            let tp = field.hessian(x + *e);
            let tm = field.hessian(x - *e);
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let fd = (tp.0[i][j][k] - tm.0[i][j][k]) / (2.0 * h);
                        max_err[2] = max_err[2].max((third.0[i][j][k][l] - fd).abs() / scale3);
                    }
                }
            }
        }
    }

    FieldVerifyReport {
        sample_count,
        max_rel_err: max_err,
        pass: max_err.iter().all(|e| *e <= FIELD_VERIFY_TOL),
    }
}
