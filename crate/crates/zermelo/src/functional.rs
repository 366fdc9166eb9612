//! The travel-time functional and its derivatives.
//!
//! Pointwise, the time rate along a path is the positive root of
//! `g f^2 + 2 (xi_tau . w) f - xi_tau . xi_tau = 0` with
//! `g = vbar^2 - w.w`, split as `f = f1 + f2` into a tailwind term
//! `f1 = -(xi_tau . w) / g` and a length term `f2 = sqrt(F) / g` with
//! `F = (xi_tau . w)^2 + g (xi_tau . xi_tau)`.
//!
//! The directional derivatives of `f1`, `f2`, `g`, and `F` through third
//! order are implemented term by term from their closed forms, not
//! algebraically simplified, so each summand can be audited against its
//! derivation. The only reshuffling is in the third derivative of `g`,
//! which is evaluated as the full symmetric trilinear form (the collapsed
//! two-term shorthand is not the exact derivative and would break the
//! finite-difference consistency checks).
//!
//! The discrete travel time integrates `f` with a midpoint rule using
//! [`QUAD_SUBSAMPLES`] sub-samples per grid interval; its gradient and
//! Hessian are exact derivatives of that discrete quantity, since the
//! quadrature nodes are fixed.

use crate::geometry::Vec2;
use crate::trajectory::{Direction, State};
use crate::windfield::WindField;
use nalgebra::DMatrix;
use std::fmt;

/// Midpoint-rule sub-samples per grid interval.
pub const QUAD_SUBSAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    WindExceedsAirspeed,
    SpeedBelowFloor { speed: f64, floor: f64 },
    ShapeMismatch,
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::WindExceedsAirspeed => write!(f, "wind speed reaches the airspeed"),
            KernelError::SpeedBelowFloor { speed, floor } => {
                write!(
                    f,
                    "path speed {speed} below the floor {floor} required by third-order formulas"
                )
            }
            KernelError::ShapeMismatch => write!(f, "mismatched discretization sizes"),
        }
    }
}

impl std::error::Error for KernelError {}

/// A direction for pointwise kernel derivatives: displacement of the path
/// value and of the path derivative.
pub type KernelDir = (Vec2, Vec2);

/// All pointwise data needed by the derivative cascades: position,
/// velocity, the wind with its derivatives at the position, and the
/// airspeed.
#[derive(Debug, Clone)]
pub struct PointwiseKernel {
    pub xi: Vec2,
    pub xi_tau: Vec2,
    pub w: Vec2,
    pub w_x: crate::geometry::Mat2,
    pub w_xx: crate::geometry::Tensor3,
    pub w_xxx: crate::geometry::Tensor4,
    pub v_bar: f64,
    g: f64,
    s: f64,
    q: f64,
    big_f: f64,
}

impl PointwiseKernel {
    pub fn new(field: &WindField, xi: Vec2, xi_tau: Vec2, v_bar: f64) -> Result<Self, KernelError> {
        let w = field.eval(xi);
        let g = v_bar * v_bar - w.norm_sq();
        if g <= 0.0 {
            return Err(KernelError::WindExceedsAirspeed);
        }
        let s = xi_tau.dot(w);
        let q = xi_tau.norm_sq();
        Ok(PointwiseKernel {
            xi,
            xi_tau,
            w,
            w_x: field.jacobian(xi),
            w_xx: field.hessian(xi),
            w_xxx: field.third(xi),
            v_bar,
            g,
            s,
            q,
            big_f: s * s + g * q,
        })
    }

    // --- directional derivatives of g = vbar^2 - w.w ---

    fn gp(&self, a: Vec2) -> f64 {
        -2.0 * self.w.dot(self.w_x.mul_vec(a))
    }

    fn gpp(&self, a: Vec2, b: Vec2) -> f64 {
        -2.0 * self.w_x.mul_vec(a).dot(self.w_x.mul_vec(b)) - 2.0 * self.w_xx.contract(self.w, a, b)
    }

    /// Symmetric trilinear third derivative of `g`.
    fn gppp(&self, a: Vec2, b: Vec2, d: Vec2) -> f64 {
        -2.0 * (self.w_xx.apply2(a, b).dot(self.w_x.mul_vec(d))
            + self.w_xx.apply2(a, d).dot(self.w_x.mul_vec(b))
            + self.w_xx.apply2(b, d).dot(self.w_x.mul_vec(a))
            + self.w_xxx.contract(self.w, a, b, d))
    }

    // --- directional derivatives of F = s^2 + g q ---

    fn fp(&self, d: KernelDir) -> f64 {
        let (a, at) = d;
        let v = self.xi_tau;
        2.0 * self.s * (at.dot(self.w) + v.dot(self.w_x.mul_vec(a)))
            + self.gp(a) * self.q
            + 2.0 * self.g * v.dot(at)
    }

    fn fpp(&self, d1: KernelDir, d2: KernelDir) -> f64 {
        let (a, at) = d1;
        let (b, bt) = d2;
        let v = self.xi_tau;
        let w = self.w;
        let jx = |u: Vec2| self.w_x.mul_vec(u);
        2.0 * self.s * at.dot(jx(b))
            + 2.0 * v.dot(jx(b)) * at.dot(w)
            + 2.0 * bt.dot(w) * at.dot(w)
            + 2.0 * v.dot(jx(b)) * v.dot(jx(a))
            + 2.0 * self.s * self.w_xx.contract(v, a, b)
            + 2.0 * bt.dot(w) * v.dot(jx(a))
            + 2.0 * self.s * bt.dot(jx(a))
            + self.gpp(a, b) * self.q
            + 2.0 * self.gp(a) * bt.dot(v)
            + 2.0 * self.gp(b) * v.dot(at)
            + 2.0 * self.g * bt.dot(at)
    }

    /// `F'''[d, d][e]`: the first direction is repeated.
    fn fppp(&self, d: KernelDir, e: KernelDir) -> f64 {
        let (a, at) = d;
        let (b, bt) = e;
        let v = self.xi_tau;
        let w = self.w;
        let jx = |u: Vec2| self.w_x.mul_vec(u);
        let hw = |p: Vec2, u: Vec2, t: Vec2| self.w_xx.contract(p, u, t);
        4.0 * bt.dot(w) * at.dot(jx(a))
            + 4.0 * v.dot(jx(b)) * at.dot(jx(a))
            + 4.0 * self.s * hw(at, a, b)
            + 4.0 * at.dot(jx(b)) * v.dot(jx(a))
            + 4.0 * at.dot(w) * bt.dot(jx(a))
            + 4.0 * at.dot(w) * hw(v, a, b)
            + 4.0 * at.dot(w) * at.dot(jx(b))
            + 4.0 * v.dot(jx(a)) * bt.dot(jx(a))
            + 4.0 * v.dot(jx(a)) * hw(v, a, b)
            + 2.0 * bt.dot(w) * hw(v, a, a)
            + 2.0 * v.dot(jx(b)) * hw(v, a, a)
            + 2.0 * self.s * self.w_xxx.contract(v, a, a, b)
            + 2.0 * self.s * hw(bt, a, a)
            + self.gppp(a, a, b) * self.q
            + 2.0 * self.gpp(a, a) * bt.dot(v)
            + 4.0 * self.gpp(a, b) * at.dot(v)
            + 4.0 * self.gp(a) * at.dot(bt)
            + 2.0 * self.gp(b) * at.dot(at)
    }

    // --- directional derivatives of f1 = -s / g ---

    fn df1(&self, d: KernelDir) -> f64 {
        let (a, at) = d;
        let g = self.g;
        g.powi(-2) * self.s * self.gp(a)
            - self.xi_tau.dot(self.w_x.mul_vec(a)) / g
            - self.w.dot(at) / g
    }

    fn ddf1(&self, d1: KernelDir, d2: KernelDir) -> f64 {
        let (a, at) = d1;
        let (b, bt) = d2;
        let v = self.xi_tau;
        let w = self.w;
        let g = self.g;
        let g2 = g * g;
        let g3 = g2 * g;
        let jx = |u: Vec2| self.w_x.mul_vec(u);
        -2.0 / g3 * self.gp(b) * self.s * self.gp(a)
            + bt.dot(w) * self.gp(a) / g2
            + v.dot(jx(b)) * self.gp(a) / g2
            + self.s * self.gpp(a, b) / g2
            + self.gp(b) * v.dot(jx(a)) / g2
            - bt.dot(jx(a)) / g
            - self.w_xx.contract(v, a, b) / g
            + self.gp(b) * w.dot(at) / g2
            - at.dot(jx(b)) / g
    }

    /// `f1'''[d, d][e]`.
    fn dddf1(&self, d: KernelDir, e: KernelDir) -> f64 {
        let (a, at) = d;
        let (dd, dt) = e;
        let v = self.xi_tau;
        let w = self.w;
        let g = self.g;
        let g2 = g * g;
        let g3 = g2 * g;
        let g4 = g3 * g;
        let jx = |u: Vec2| self.w_x.mul_vec(u);
        let hw = |p: Vec2, u: Vec2, t: Vec2| self.w_xx.contract(p, u, t);
        let gpa = self.gp(a);
        let gpd = self.gp(dd);
        let gaa = self.gpp(a, a);
        let gad = self.gpp(a, dd);
        6.0 / g4 * gpd * gpa * gpa * self.s
            - 4.0 / g3 * gpa * gad * self.s
            - 2.0 / g3 * gpd * gaa * self.s
            + self.gppp(a, a, dd) * self.s / g2
            - 2.0 / g3 * gpa * gpa * v.dot(jx(dd))
            + gaa * v.dot(jx(dd)) / g2
            - 4.0 / g3 * gpd * gpa * v.dot(jx(a))
            + 2.0 * gad * v.dot(jx(a)) / g2
            + 2.0 * gpa * hw(v, a, dd) / g2
            + gpd * hw(v, a, a) / g2
            - self.w_xxx.contract(v, a, a, dd) / g
            - 2.0 / g3 * gpa * gpa * dt.dot(w)
            + gaa * dt.dot(w) / g2
            + 2.0 * gpa * dt.dot(jx(a)) / g2
            - hw(dt, a, a) / g
            - 4.0 / g3 * gpd * gpa * at.dot(w)
            + 2.0 * gad * at.dot(w) / g2
            + 2.0 * gpa * at.dot(jx(dd)) / g2
            + 2.0 * gpd * at.dot(jx(a)) / g2
            - 2.0 * hw(at, a, dd) / g
    }

    // --- directional derivatives of f2 = sqrt(F) / g ---

    fn df2(&self, d: KernelDir) -> f64 {
        let (a, _) = d;
        let g = self.g;
        -self.gp(a) * self.big_f.sqrt() / (g * g) + 0.5 / g / self.big_f.sqrt() * self.fp(d)
    }

    fn ddf2(&self, d1: KernelDir, d2: KernelDir) -> f64 {
        let (a, _) = d1;
        let (b, _) = d2;
        let g = self.g;
        let g2 = g * g;
        let g3 = g2 * g;
        let fr = self.big_f.sqrt();
        let f_m12 = 1.0 / fr;
        let f_m32 = f_m12 / self.big_f;
        2.0 / g3 * self.gp(b) * self.gp(a) * fr
            - self.gpp(a, b) * fr / g2
            - 0.5 / g2 * self.gp(a) * f_m12 * self.fp(d2)
            - 0.5 / g2 * self.gp(b) * f_m12 * self.fp(d1)
            + 0.5 / g * f_m12 * self.fpp(d1, d2)
            - 0.25 / g * f_m32 * self.fp(d1) * self.fp(d2)
    }

    /// `f2'''[d, d][e]`, term by term as derived (repeated-pair terms kept
    /// as separate summands).
    fn dddf2(&self, d: KernelDir, e: KernelDir) -> f64 {
        let (a, _) = d;
        let (b, _) = e;
        let g = self.g;
        let g2 = g * g;
        let g3 = g2 * g;
        let g4 = g3 * g;
        let fr = self.big_f.sqrt();
        let f_m12 = 1.0 / fr;
        let f_m32 = f_m12 / self.big_f;
        let f_m52 = f_m32 / self.big_f;
        let gpa = self.gp(a);
        let gpb = self.gp(b);
        let gaa = self.gpp(a, a);
        let gab = self.gpp(a, b);
        let fp_d = self.fp(d);
        let fp_e = self.fp(e);
        let fpp_dd = self.fpp(d, d);
        let fpp_de = self.fpp(d, e);
        -6.0 / g4 * gpb * gpa * gpa * fr
            + 4.0 / g3 * gpa * gab * fr
            + gpa * gpa * f_m12 * fp_e / g3
            + 2.0 / g3 * gpb * gaa * fr
            - self.gppp(a, a, b) * fr / g2
            - 0.5 / g2 * gaa * f_m12 * fp_e
            + gpb * gpa * f_m12 * fp_d / g3
            - 0.5 / g2 * gab * f_m12 * fp_d
            + 0.25 / g2 * gpa * f_m32 * fp_d * fp_e
            - 0.5 / g2 * gpa * f_m12 * fpp_de
            + gpb * gpa * f_m12 * fp_d / g3
            - 0.5 / g2 * gab * f_m12 * fp_d
            + 0.25 / g2 * gpa * f_m32 * fp_d * fp_e
            - 0.5 / g2 * gpa * f_m12 * fpp_de
            + 0.25 / g2 * gpb * f_m32 * fp_d * fp_d
            + 0.375 / g * f_m52 * fp_d * fp_d * fp_e
            - 0.5 / g * f_m32 * fp_d * fpp_de
            - 0.5 / g2 * gpb * f_m12 * fpp_dd
            - 0.25 / g * f_m32 * fpp_dd * fp_e
            + 0.5 / g * f_m12 * self.fppp(d, e)
    }
}

/// Pointwise values of the integrand and its building blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub g: f64,
    pub big_f: f64,
}

/// Evaluate `f = f1 + f2` and the auxiliary quantities.
pub fn kernel_f(k: &PointwiseKernel) -> KernelValues {
    let f1 = -k.s / k.g;
    let f2 = k.big_f.sqrt() / k.g;
    KernelValues {
        f: f1 + f2,
        f1,
        f2,
        g: k.g,
        big_f: k.big_f,
    }
}

/// First directional derivative `f'[d]`.
pub fn kernel_d1(k: &PointwiseKernel, d: KernelDir) -> f64 {
    k.df1(d) + k.df2(d)
}

/// Second directional derivative `f''[d1][d2]`; bilinear and symmetric.
pub fn kernel_d2(k: &PointwiseKernel, d1: KernelDir, d2: KernelDir) -> f64 {
    k.ddf1(d1, d2) + k.ddf2(d1, d2)
}

/// Third directional derivative `f'''[d, d][e]` with the first direction
/// repeated. The formulas carry inverse powers of the path speed, so the
/// speed must stay above `speed_floor`.
pub fn kernel_d3(
    k: &PointwiseKernel,
    d: KernelDir,
    e: KernelDir,
    speed_floor: f64,
) -> Result<f64, KernelError> {
    let speed = k.xi_tau.norm();
    if speed < speed_floor {
        return Err(KernelError::SpeedBelowFloor {
            speed,
            floor: speed_floor,
        });
    }
    Ok(k.dddf1(d, e) + k.dddf2(d, e))
}

/// Number of state coefficients: `L` plus two per interior node.
pub fn n_coeffs(n_intervals: usize) -> usize {
    2 * (n_intervals - 1) + 1
}

/// Iterate over quadrature points of one interval, calling
/// `body(sub_position, kernel)` where `sub_position` is the midpoint
/// fraction within the interval.
fn for_quadrature<F>(
    state: &State,
    field: &WindField,
    v_bar: f64,
    mut body: F,
) -> Result<(), KernelError>
where
    F: FnMut(usize, f64, &PointwiseKernel) -> Result<(), KernelError>,
{
    let n = state.n_intervals();
    for i in 0..n {
        let a = state.path().node(i);
        let b = state.path().node(i + 1);
        let v = state.path().velocity(i);
        for q in 0..QUAD_SUBSAMPLES {
            let s = (q as f64 + 0.5) / QUAD_SUBSAMPLES as f64;
            let x = a.lerp(b, s);
            let k = PointwiseKernel::new(field, x, v, v_bar)?;
            body(i, s, &k)?;
        }
    }
    Ok(())
}

/// Discrete travel time: midpoint quadrature of `f` along the path.
pub fn travel_time(state: &State, field: &WindField, v_bar: f64) -> Result<f64, KernelError> {
    let wgt = 1.0 / (state.n_intervals() * QUAD_SUBSAMPLES) as f64;
    let mut t = 0.0;
    for_quadrature(state, field, v_bar, |_, _, k| {
        t += wgt * kernel_f(k).f;
        Ok(())
    })?;
    Ok(t)
}

/// Gradient of the discrete travel time over the state coefficients
/// `[L, n1x, n1y, ...]`. The `L` slot is zero: the travel time does not
/// depend on the speed scalar.
pub fn travel_time_gradient(
    state: &State,
    field: &WindField,
    v_bar: f64,
) -> Result<Vec<f64>, KernelError> {
    let n = state.n_intervals();
    let nf = n as f64;
    let wgt = 1.0 / (n * QUAD_SUBSAMPLES) as f64;
    let mut grad = vec![0.0; n_coeffs(n)];
    let ex = Vec2::new(1.0, 0.0);
    let ey = Vec2::new(0.0, 1.0);
    for_quadrature(state, field, v_bar, |i, s, k| {
        let dfdx = Vec2::new(
            kernel_d1(k, (ex, Vec2::ZERO)),
            kernel_d1(k, (ey, Vec2::ZERO)),
        );
        let dfdv = Vec2::new(
            kernel_d1(k, (Vec2::ZERO, ex)),
            kernel_d1(k, (Vec2::ZERO, ey)),
        );
        // Chain rule: x = (1-s) a + s b, v = N (b - a).
        let into = |grad: &mut [f64], node: usize, g: Vec2| {
            if node >= 1 && node < n {
                grad[1 + 2 * (node - 1)] += g.x;
                grad[2 + 2 * (node - 1)] += g.y;
            }
        };
        into(&mut grad, i, (dfdx * (1.0 - s) - dfdv * nf) * wgt);
        into(&mut grad, i + 1, (dfdx * s + dfdv * nf) * wgt);
        Ok(())
    })?;
    Ok(grad)
}

/// Hessian of the discrete travel time over the state coefficients.
/// Symmetric by construction; the `L` row and column are zero.
pub fn travel_time_hessian(
    state: &State,
    field: &WindField,
    v_bar: f64,
) -> Result<DMatrix<f64>, KernelError> {
    let n = state.n_intervals();
    let nf = n as f64;
    let nz = n_coeffs(n);
    let wgt = 1.0 / (n * QUAD_SUBSAMPLES) as f64;
    let mut hess = DMatrix::zeros(nz, nz);
    let ex = Vec2::new(1.0, 0.0);
    let ey = Vec2::new(0.0, 1.0);
    for_quadrature(state, field, v_bar, |i, s, k| {
        // Local directions for moving node i resp. node i+1 by a unit
        // coordinate step.
        let local: [(usize, KernelDir); 4] = [
            (i, (ex * (1.0 - s), -ex * nf)),
            (i, (ey * (1.0 - s), -ey * nf)),
            (i + 1, (ex * s, ex * nf)),
            (i + 1, (ey * s, ey * nf)),
        ];
        let coeff = |node: usize, axis: usize| -> Option<usize> {
            (node >= 1 && node < n).then(|| 1 + 2 * (node - 1) + axis)
        };
        for (p, &(node_p, dir_p)) in local.iter().enumerate() {
            let Some(row) = coeff(node_p, p % 2) else {
                continue;
            };
            for (r, &(node_r, dir_r)) in local.iter().enumerate().skip(p) {
                let Some(col) = coeff(node_r, r % 2) else {
                    continue;
                };
                let val = wgt * kernel_d2(k, dir_p, dir_r);
                hess[(row, col)] += val;
                if row != col {
                    hess[(col, row)] += val;
                }
            }
        }
        Ok(())
    })?;
    Ok(hess)
}

/// Directional first derivative `T'[d]` by the same quadrature.
pub fn travel_time_d1(
    state: &State,
    field: &WindField,
    v_bar: f64,
    d: &Direction,
) -> Result<f64, KernelError> {
    if d.n_intervals() != state.n_intervals() {
        return Err(KernelError::ShapeMismatch);
    }
    let n = state.n_intervals();
    let wgt = 1.0 / (n * QUAD_SUBSAMPLES) as f64;
    let mut acc = 0.0;
    for_quadrature(state, field, v_bar, |i, s, k| {
        let dx = d.dnode(i).lerp(d.dnode(i + 1), s);
        acc += wgt * kernel_d1(k, (dx, d.velocity(i)));
        Ok(())
    })?;
    Ok(acc)
}

/// Directional second derivative `T''[d1][d2]`.
pub fn travel_time_d2(
    state: &State,
    field: &WindField,
    v_bar: f64,
    d1: &Direction,
    d2: &Direction,
) -> Result<f64, KernelError> {
    if d1.n_intervals() != state.n_intervals() || d2.n_intervals() != state.n_intervals() {
        return Err(KernelError::ShapeMismatch);
    }
    let n = state.n_intervals();
    let wgt = 1.0 / (n * QUAD_SUBSAMPLES) as f64;
    let mut acc = 0.0;
    for_quadrature(state, field, v_bar, |i, s, k| {
        let dx1 = d1.dnode(i).lerp(d1.dnode(i + 1), s);
        let dx2 = d2.dnode(i).lerp(d2.dnode(i + 1), s);
        acc += wgt * kernel_d2(k, (dx1, d1.velocity(i)), (dx2, d2.velocity(i)));
        Ok(())
    })?;
    Ok(acc)
}

/// Directional third derivative `T'''[d, d][e]`.
pub fn travel_time_d3(
    state: &State,
    field: &WindField,
    v_bar: f64,
    d: &Direction,
    e: &Direction,
    speed_floor: f64,
) -> Result<f64, KernelError> {
    if d.n_intervals() != state.n_intervals() || e.n_intervals() != state.n_intervals() {
        return Err(KernelError::ShapeMismatch);
    }
    let n = state.n_intervals();
    let wgt = 1.0 / (n * QUAD_SUBSAMPLES) as f64;
    let mut acc = 0.0;
    for_quadrature(state, field, v_bar, |i, s, k| {
        let dx = d.dnode(i).lerp(d.dnode(i + 1), s);
        let ex = e.dnode(i).lerp(e.dnode(i + 1), s);
        acc += wgt * kernel_d3(k, (dx, d.velocity(i)), (ex, e.velocity(i)), speed_floor)?;
        Ok(())
    })?;
    Ok(acc)
}

// --- constraint machinery ---

/// Per-interval constraint values `h_i = ||xi_tau,i||^2 - L^2`.
pub fn constraint(state: &State) -> Vec<f64> {
    let l2 = state.l() * state.l();
    (0..state.n_intervals())
        .map(|i| state.path().velocity(i).norm_sq() - l2)
        .collect()
}

/// `h'(z)[dz]_i = 2 xi_tau,i . d xi_tau,i - 2 L dL`.
pub fn constraint_d1(state: &State, d: &Direction) -> Result<Vec<f64>, KernelError> {
    if d.n_intervals() != state.n_intervals() {
        return Err(KernelError::ShapeMismatch);
    }
    Ok((0..state.n_intervals())
        .map(|i| 2.0 * state.path().velocity(i).dot(d.velocity(i)) - 2.0 * state.l() * d.dl)
        .collect())
}

/// `h''[d1][d2]_i = 2 d xi_tau,i . d~ xi_tau,i - 2 dL dL~`; independent of
/// the state since `h` is quadratic.
pub fn constraint_d2(d1: &Direction, d2: &Direction) -> Result<Vec<f64>, KernelError> {
    if d1.n_intervals() != d2.n_intervals() {
        return Err(KernelError::ShapeMismatch);
    }
    Ok((0..d1.n_intervals())
        .map(|i| 2.0 * d1.velocity(i).dot(d2.velocity(i)) - 2.0 * d1.dl * d2.dl)
        .collect())
}

/// Constraint Jacobian `A` (one row per interval) over the state
/// coefficients.
pub fn constraint_jacobian(state: &State) -> DMatrix<f64> {
    let n = state.n_intervals();
    let nf = n as f64;
    let mut a = DMatrix::zeros(n, n_coeffs(n));
    for i in 0..n {
        a[(i, 0)] = -2.0 * state.l();
        let v = state.path().velocity(i) * (2.0 * nf);
        if i >= 1 {
            // d h_i / d n_i = -2 N xi_tau,i
            a[(i, 1 + 2 * (i - 1))] = -v.x;
            a[(i, 2 + 2 * (i - 1))] = -v.y;
        }
        if i < n - 1 {
            a[(i, 1 + 2 * i)] = v.x;
            a[(i, 2 + 2 * i)] = v.y;
        }
    }
    a
}

// --- multiplier, iterate, residual ---

/// Piecewise-constant Lagrange multiplier, one value per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    pub values: Vec<f64>,
}

impl Multiplier {
    pub fn zeros(n_intervals: usize) -> Self {
        Multiplier {
            values: vec![0.0; n_intervals],
        }
    }

    pub fn n_intervals(&self) -> usize {
        self.values.len()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Function-space `L^2` norm of the piecewise-constant multiplier.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// `int lambda p dtau` for a piecewise-constant partner `p`.
    pub fn pair(&self, p: &[f64]) -> f64 {
        assert_eq!(p.len(), self.values.len());
        self.values.iter().zip(p).map(|(l, v)| l * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// The full Newton unknown `chi = (z, lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KKTIterate {
    pub z: State,
    pub lambda: Multiplier,
}

impl KKTIterate {
    pub fn new(z: State, lambda: Multiplier) -> Self {
        assert_eq!(z.n_intervals(), lambda.n_intervals(), "grid mismatch");
        KKTIterate { z, lambda }
    }

    pub fn feasible_start(z: State) -> Self {
        let n = z.n_intervals();
        KKTIterate::new(z, Multiplier::zeros(n))
    }

    pub fn norm_yinf(&self) -> f64 {
        self.z.norm_zinf() + self.lambda.norm_linf()
    }

    pub fn norm_y2(&self) -> f64 {
        self.z.norm_z2() + self.lambda.norm_l2()
    }
}

/// `|| a - b ||_Y2` for iterates on the same grid.
pub fn y2_distance(a: &KKTIterate, b: &KKTIterate) -> f64 {
    let dz = crate::trajectory::state_delta(&a.z, &b.z);
    let dl = Multiplier {
        values: a
            .lambda
            .values
            .iter()
            .zip(&b.lambda.values)
            .map(|(x, y)| x - y)
            .collect(),
    };
    dz.norm_z2() + dl.norm_l2()
}

/// `|| a - b ||_Yinf`.
pub fn yinf_distance(a: &KKTIterate, b: &KKTIterate) -> f64 {
    let dz = crate::trajectory::state_delta(&a.z, &b.z);
    let dl = a
        .lambda
        .values
        .iter()
        .zip(&b.lambda.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    dz.norm_zinf() + dl
}

/// The KKT residual `F(chi)`: the total derivative of the Lagrangian
/// `T(xi) + sum_i lambda_i h_i(z)` over the state coefficients, and the
/// raw constraint values. Residual coefficients are stored against the
/// nodal basis without mass weighting; norms are plain Euclidean.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub grad_z: Vec<f64>,
    pub grad_lambda: Vec<f64>,
}

impl Residual {
    pub fn norm(&self) -> f64 {
        self.grad_z
            .iter()
            .chain(&self.grad_lambda)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Evaluate `F(chi)`.
pub fn lagrangian_grad(
    chi: &KKTIterate,
    field: &WindField,
    v_bar: f64,
) -> Result<Residual, KernelError> {
    if chi.z.n_intervals() != chi.lambda.n_intervals() {
        return Err(KernelError::ShapeMismatch);
    }
    let mut grad_z = travel_time_gradient(&chi.z, field, v_bar)?;
    let a = constraint_jacobian(&chi.z);
    for i in 0..a.nrows() {
        let li = chi.lambda.values[i];
        for j in 0..a.ncols() {
            grad_z[j] += li * a[(i, j)];
        }
    }
    Ok(Residual {
        grad_z,
        grad_lambda: constraint(&chi.z),
    })
}
