//! Quantitative constants of the convergence theory, constructive
//! witnesses for regularity and the inf-sup condition, a discrete
//! coercivity estimate, and a randomized search for bound violations.
//!
//! Everything evaluated verbatim from a closed formula is tagged
//! `formula`; the kernel coercivity constant has no closed form and is
//! estimated from the discrete reduced Hessian, so it and every constant
//! downstream of it (`kappa` through `r_c`) are tagged `estimated`.

use crate::functional::{
    constraint_d1, constraint_d2, kernel_d1, kernel_d2, kernel_d3, travel_time_d2, travel_time_d3,
    KKTIterate, KernelError, Multiplier, PointwiseKernel,
};
use crate::geometry::Vec2;
use crate::kkt::assemble;
use crate::linalg::{min_eig_generalized, nullspace};
use crate::trajectory::{Direction, Ellipse, State};
use crate::windfield::{WindBounds, WindField};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsError {
    RadiusTooLarge,
    RadiusExceedsDirectionConstant,
    DirectionConditionViolated { interval: usize },
    NonPositiveDirectionBound,
    RankDeficientConstraint,
    Kernel(KernelError),
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::RadiusTooLarge => {
                write!(f, "neighborhood radius must stay below the direct distance")
            }
            BoundsError::RadiusExceedsDirectionConstant => {
                write!(
                    f,
                    "neighborhood radius must stay below the direction constant c"
                )
            }
            BoundsError::DirectionConditionViolated { interval } => {
                write!(
                    f,
                    "progress condition xi_tau . u >= c fails on interval {interval}"
                )
            }
            BoundsError::NonPositiveDirectionBound => {
                write!(f, "direction constant c must be positive")
            }
            BoundsError::RankDeficientConstraint => {
                write!(f, "constraint Jacobian is rank deficient")
            }
            BoundsError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BoundsError {}

impl From<KernelError> for BoundsError {
    fn from(e: KernelError) -> Self {
        BoundsError::Kernel(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Formula,
    Estimated,
    Sampled,
}

/// Every constant of the convergence theory, with the inputs it was
/// computed from.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSet {
    pub v_bar: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Direct origin-destination distance.
    pub l_tilde: f64,
    /// Path-length sandwich for a global optimum.
    pub l_low: f64,
    pub l_high: f64,
    /// Neighborhood radius all `R`-dependent constants are evaluated at.
    pub r: f64,
    /// First-derivative bound: `|f'| <= alpha0 |xi_tau| |dxi| + alpha1 |dxi_tau|`.
    pub alpha0: f64,
    pub alpha1: f64,
    /// Second-derivative bound coefficients.
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Third-derivative bound coefficients.
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    /// `|T'''| <= big_gamma (|dxi|^2 + |dxi_tau|^2) |Dxi|_C`.
    pub big_gamma: f64,
    /// `|T''| <= b_upper |dz|^2`.
    pub b_upper: f64,
    /// Discrete kernel-coercivity estimate (no closed form exists).
    pub b_lower_est: f64,
    /// Second-derivative Lipschitz constants of the tailwind/length terms.
    pub beta_hat1: f64,
    pub beta_hat2: f64,
    pub b_hat: f64,
    /// Progress direction and its lower bound `xi_tau . u >= c` at the optimum.
    pub u: Vec2,
    pub c: f64,
    pub kappa: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega: f64,
    /// Largest radius satisfying the neighborhood caps and `omega < 2`.
    pub r_c: f64,
    pub binding_cap: String,
    /// Whether `c0 <= v / sqrt(5)` holds, the hypothesis behind the rounded
    /// beta/gamma constants.
    pub formulas_valid: bool,
}

fn ratio(v_bar: f64, c0: f64) -> f64 {
    (v_bar + c0) / (v_bar - c0)
}

/// `Gamma(R)`: the max of the four bracketed third-derivative terms.
fn big_gamma_at(wb: &WindBounds, v_bar: f64, l_tilde: f64, r: f64) -> f64 {
    let vl = wb.v_lower(v_bar);
    let g0 = 2.0 / vl.powi(4)
        * (37.0 * wb.c1.powi(3) + 21.0 * wb.c1 * wb.c2 * vl + 2.0 * wb.c3 * vl * vl);
    let g1 = (29.0 * wb.c1 * wb.c1 + 7.0 * vl * wb.c2) / vl.powi(3);
    let g2 = (57.0 * wb.c1 * wb.c1 + 13.0 * vl * wb.c2) / vl.powi(3);
    let g3 = 40.0 * wb.c1 / (vl * vl);
    let g4 = 20.0 * wb.c1 / (vl * vl);
    let g5 = 18.0 / vl;
    let rat = ratio(v_bar, wb.c0);
    let lm = l_tilde - r;
    [
        (rat * l_tilde + r) * g0 + g2 / 2.0,
        g4 / lm + g2 / 2.0,
        g1 + g3 / (2.0 * lm),
        g3 / (2.0 * lm) + g5 / (lm * lm),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn b_upper_at(wb: &WindBounds, v_bar: f64, l_tilde: f64, r: f64) -> f64 {
    let vl = wb.v_lower(v_bar);
    let beta0 = 14.0 * wb.c1 * wb.c1 / vl.powi(3) + 4.0 * wb.c2 / (vl * vl);
    let beta1 = 7.0 * wb.c1 / (vl * vl);
    let beta2 = 4.0 / vl;
    beta1 + ((ratio(v_bar, wb.c0) * l_tilde + r) * beta0).max(beta2 / (l_tilde + r))
}

/// Inf-sup constant
/// `kappa(R) = (c - R) [3/8 + 2 ((v+c0)/(v-c0) + R/L~)^2]^{-1/2}`.
pub fn kappa_of(
    r: f64,
    c: f64,
    wb: &WindBounds,
    v_bar: f64,
    l_tilde: f64,
) -> Result<f64, BoundsError> {
    if c <= 0.0 {
        return Err(BoundsError::NonPositiveDirectionBound);
    }
    if r >= c {
        return Err(BoundsError::RadiusExceedsDirectionConstant);
    }
    let q = ratio(v_bar, wb.c0) + r / l_tilde;
    Ok((c - r) / (0.375 + 2.0 * q * q).sqrt())
}

fn omega1_at(b_lower: f64, b_upper: f64, kappa: f64, r: f64) -> f64 {
    2.0f64.sqrt()
        * (4.0 / b_lower)
            .max((1.0 + 4.0 * (b_upper + r) / b_lower) / kappa)
            .max((b_upper + r) / (kappa * kappa))
}

/// Evaluate every constant at radius `r`, given the coercivity estimate
/// and the progress-direction data measured at the optimum.
pub fn compute_constants(
    wb: &WindBounds,
    v_bar: f64,
    l_tilde: f64,
    r: f64,
    b_lower_est: f64,
    u: Vec2,
    c: f64,
) -> Result<BoundSet, BoundsError> {
    if r >= l_tilde {
        return Err(BoundsError::RadiusTooLarge);
    }
    let vl = wb.v_lower(v_bar);
    let vu2 = v_bar * v_bar + wb.c0 * wb.c0;
    let (c0, c1, c2, c3) = (wb.c0, wb.c1, wb.c2, wb.c3);
    let v4 = v_bar.powi(4);
    let v2 = v_bar * v_bar;

    let l_low = l_tilde;
    let l_high = ratio(v_bar, c0) * l_tilde;

    let alpha0 = 21.0 * c1 / (4.0 * vl * vl);
    let alpha1 = 7.0 / (2.0 * vl);
    let beta0 = 14.0 * c1 * c1 / vl.powi(3) + 4.0 * c2 / (vl * vl);
    let beta1 = 7.0 * c1 / (vl * vl);
    let beta2 = 4.0 / vl;
    let gamma0 = 2.0 / vl.powi(4) * (37.0 * c1.powi(3) + 21.0 * c1 * c2 * vl + 2.0 * c3 * vl * vl);
    let gamma1 = (29.0 * c1 * c1 + 7.0 * vl * c2) / vl.powi(3);
    let gamma2 = (57.0 * c1 * c1 + 13.0 * vl * c2) / vl.powi(3);
    let gamma3 = 40.0 * c1 / (vl * vl);
    let gamma4 = 20.0 * c1 / (vl * vl);
    let gamma5 = 18.0 / vl;

    let big_gamma = big_gamma_at(wb, v_bar, l_tilde, r);
    let b_upper = b_upper_at(wb, v_bar, l_tilde, r);

    let beta_hat1 = 4.0 / vl.powi(12)
        * (5.0
            + 80.0 * c0 * c1 * v4
            + 8.0 * c0 * c1 * v2
            + 12.0 * c0 * c1
            + 16.0 * c0 * c2
            + 4.0 * c0 * c3
            + 16.0 * c1 * c1
            + 12.0 * c1 * c2
            + 4.0 * c1
            + 4.0 * c2
            + 2.0 * c3);
    // The optimum length is only known to lie in [l_low, l_high]; the
    // conservative interval ends enter where the formula needs L* -+ R.
    let lm = l_low - r;
    let lp = l_high + r;
    let beta_hat2 = 4.0 / vl.powi(12)
        * (20.0
            + 10.0 * c1
            + 7.0 * c2
            + c3
            + 10.0 * c0 * c1
            + 36.0 * c0 * c1 * v2
            + 88.0 * c0 * c1 * v4
            + 20.0 * c0 * c2
            + 8.0 * c0 * c3
            + 20.0 * c1 * c1
            + 24.0 * c1 * c2
            + (3.0 / (vl * lm)
                + 6.0 / (vl.powi(3) * lm.powi(3))
                + 6.0 / (vl.powi(5) * lm.powi(5)))
                * (vu2 * lp + 2.0 * c0 * c1 * lp * lp));
    let b_hat = beta_hat1.max(beta_hat2);

    let kappa = kappa_of(r, c, wb, v_bar, l_tilde)?;
    let omega1 = omega1_at(b_lower_est, b_upper, kappa, r);
    let omega2 = (8.0 + b_hat) * r;
    let omega = omega1 * omega2;

    let mut bs = BoundSet {
        v_bar,
        c0,
        c1,
        c2,
        c3,
        l_tilde,
        l_low,
        l_high,
        r,
        alpha0,
        alpha1,
        beta0,
        beta1,
        beta2,
        gamma0,
        gamma1,
        gamma2,
        gamma3,
        gamma4,
        gamma5,
        big_gamma,
        b_upper,
        b_lower_est,
        beta_hat1,
        beta_hat2,
        b_hat,
        u,
        c,
        kappa,
        omega1,
        omega2,
        omega,
        r_c: 0.0,
        binding_cap: String::new(),
        formulas_valid: wb.within_bound_hypothesis(v_bar),
    };
    let (or, binding) = omegas_and_radius(&bs);
    bs.r_c = or.r_c;
    bs.binding_cap = binding;
    Ok(bs)
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaRadius {
    pub omega1: f64,
    pub omega2: f64,
    pub omega: f64,
    pub r_c: f64,
}

fn wind_bounds_of(bs: &BoundSet) -> WindBounds {
    WindBounds {
        c0: bs.c0,
        c1: bs.c1,
        c2: bs.c2,
        c3: bs.c3,
        domain: Ellipse {
            focus_a: Vec2::ZERO,
            focus_b: Vec2::new(bs.l_tilde, 0.0),
            major_sum: bs.l_high.max(bs.l_tilde),
        },
        method: crate::windfield::BoundMethod::Sampled,
        safety_factor: 1.0,
    }
}

/// Largest radius on a bisection grid satisfying the three neighborhood
/// caps (`R < B/(2 Gamma(R))`, `R < B/40`, `R < L~/2`) together with
/// `omega1(R) omega2(R) < 2`, plus the radius needed by `kappa` (`R < c`).
/// All conditions are monotone in `R`, so the feasible set is an interval.
/// Also returns which condition binds at the result; a zero radius is
/// reported, not an error.
pub fn omegas_and_radius(bs: &BoundSet) -> (OmegaRadius, String) {
    let wb = wind_bounds_of(bs);
    let omegas = |r: f64| -> Option<(f64, f64)> {
        let kappa = kappa_of(r, bs.c, &wb, bs.v_bar, bs.l_tilde).ok()?;
        let o1 = omega1_at(
            bs.b_lower_est,
            b_upper_at(&wb, bs.v_bar, bs.l_tilde, r),
            kappa,
            r,
        );
        let o2 = (8.0 + bs.b_hat) * r;
        Some((o1, o2))
    };
    let feasible = |r: f64| -> bool {
        if r <= 0.0 {
            return true;
        }
        if r >= bs.b_lower_est / 40.0 || r >= bs.l_tilde / 2.0 || r >= bs.c {
            return false;
        }
        if r >= bs.b_lower_est / (2.0 * big_gamma_at(&wb, bs.v_bar, bs.l_tilde, r)) {
            return false;
        }
        match omegas(r) {
            Some((o1, o2)) => o1 * o2 < 2.0,
            None => false,
        }
    };

    let cap = (bs.b_lower_est / 40.0)
        .min(bs.l_tilde / 2.0)
        .min(bs.c)
        .max(0.0)
        * (1.0 - 1e-12);
    if cap <= 0.0 || !feasible(cap * 1e-9) {
        return (
            OmegaRadius {
                omega1: bs.omega1,
                omega2: bs.omega2,
                omega: bs.omega,
                r_c: 0.0,
            },
            "no positive radius satisfies the caps".to_string(),
        );
    }
    let mut lo = cap * 1e-9;
    let mut hi = cap;
    if feasible(hi) {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let r_c = lo;

    // Which condition binds at r_c: smallest headroom wins.
    let (o1, o2) = omegas(r_c).unwrap_or((bs.omega1, bs.omega2));
    let caps = [
        (
            "R < B_lower / (2 Gamma)",
            bs.b_lower_est / (2.0 * big_gamma_at(&wb, bs.v_bar, bs.l_tilde, r_c)) - r_c,
        ),
        ("R < B_lower / 40", bs.b_lower_est / 40.0 - r_c),
        ("R < L_tilde / 2", bs.l_tilde / 2.0 - r_c),
        ("R < c", bs.c - r_c),
        (
            "omega < 2",
            (2.0 - o1 * o2) / (o1 * (8.0 + bs.b_hat)).max(1e-300),
        ),
    ];
    let binding = caps
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
        .0
        .to_string();
    (
        OmegaRadius {
            omega1: o1,
            omega2: o2,
            omega: o1 * o2,
            r_c,
        },
        binding,
    )
}

/// Default working radius: the largest value under the three neighborhood
/// caps, shrunk by one percent.
pub fn default_radius(wb: &WindBounds, v_bar: f64, l_tilde: f64, b_lower: f64) -> f64 {
    let feasible = |r: f64| {
        r < b_lower / 40.0
            && r < l_tilde / 2.0
            && r < b_lower / (2.0 * big_gamma_at(wb, v_bar, l_tilde, r))
    };
    let mut lo = 0.0f64;
    let mut hi = (b_lower / 40.0).min(l_tilde / 2.0);
    if feasible(hi * (1.0 - 1e-12)) {
        lo = hi * (1.0 - 1e-12);
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    lo * 0.99
}

/// Z2-type mass matrix over the state coefficients: identity on the `L`
/// slot, hat-function mass plus first-derivative stiffness on the node
/// coordinates. Induces `dL^2 + |dxi|_L2^2 + |dxi_tau|_L2^2`.
fn z2_mass_matrix(n: usize) -> DMatrix<f64> {
    let nz = crate::functional::n_coeffs(n);
    let nf = n as f64;
    let mut m = DMatrix::zeros(nz, nz);
    m[(0, 0)] = 1.0;
    for i in 1..n {
        for axis in 0..2 {
            let row = 1 + 2 * (i - 1) + axis;
            m[(row, row)] = 2.0 / (3.0 * nf) + 2.0 * nf;
            if i + 1 < n {
                let col = 1 + 2 * i + axis;
                m[(row, col)] = 1.0 / (6.0 * nf) - nf;
                m[(col, row)] = 1.0 / (6.0 * nf) - nf;
            }
        }
    }
    m
}

/// Discrete surrogate for the kernel coercivity constant: the smallest
/// eigenvalue of the reduced Lagrangian Hessian, scaled by the Z2 mass of
/// the constraint kernel basis. Positive at isolated minima.
pub fn estimate_coercivity(
    chi: &KKTIterate,
    field: &WindField,
    v_bar: f64,
) -> Result<f64, BoundsError> {
    let l_tilde = chi.z.path().x_d().dist(chi.z.path().x_o());
    let sys = assemble(chi, field, v_bar, 1e-6 * l_tilde)?;
    let z = nullspace(&sys.a);
    if z.ncols() != sys.a.ncols() - sys.a.nrows() {
        return Err(BoundsError::RankDeficientConstraint);
    }
    let m = z2_mass_matrix(chi.z.n_intervals());
    let h_red = z.transpose() * &sys.h * &z;
    let m_red = z.transpose() * &m * &z;
    Ok(min_eig_generalized(&h_red, &m_red))
}

/// Smallest eigenvalue of the plain reduced Hessian `Z^T H Z` (second-order
/// optimality check without mass scaling).
pub fn reduced_hessian_min_eig(
    chi: &KKTIterate,
    field: &WindField,
    v_bar: f64,
) -> Result<f64, BoundsError> {
    let l_tilde = chi.z.path().x_d().dist(chi.z.path().x_o());
    let sys = assemble(chi, field, v_bar, 1e-6 * l_tilde)?;
    let z = nullspace(&sys.a);
    if z.ncols() != sys.a.ncols() - sys.a.nrows() {
        return Err(BoundsError::RankDeficientConstraint);
    }
    Ok(crate::linalg::min_eig_symmetric(
        &(z.transpose() * &sys.h * &z),
    ))
}

/// Direction built by the constructive inf-sup argument, together with the
/// quantities it certifies.
#[derive(Debug, Clone)]
pub struct InfSupWitness {
    pub direction: Direction,
    /// `<lambda, h'(z)[dz]>` with the integral pairing.
    pub pairing: f64,
    pub lambda_l2: f64,
    /// Composite `sqrt(dL^2 + |dxi|^2 + |dxi_tau|^2)` the estimate is
    /// stated against.
    pub dz_composite: f64,
    /// `pairing / (lambda_l2 * dz_composite)`; guaranteed `>= kappa`.
    pub ratio: f64,
    /// Ratio against the summed Z2 norm, for reference.
    pub ratio_sum_norm: f64,
}

/// Build the inf-sup witness direction for multiplier `lambda` at state
/// `z`: `dxi_tau = (1/2)(lambda - mean) u` plus the matching `dL`.
/// `c_lower` must bound `xi_tau . u` from below on every interval.
pub fn infsup_witness(
    z: &State,
    lambda: &Multiplier,
    u: Vec2,
    c_lower: f64,
) -> Result<InfSupWitness, BoundsError> {
    if c_lower <= 0.0 {
        return Err(BoundsError::NonPositiveDirectionBound);
    }
    let n = z.n_intervals();
    if lambda.n_intervals() != n {
        return Err(BoundsError::Kernel(KernelError::ShapeMismatch));
    }
    let u = u.unit();
    let b: Vec<f64> = (0..n).map(|i| z.path().velocity(i).dot(u)).collect();
    if let Some(i) = b.iter().position(|bi| *bi < c_lower * (1.0 - 1e-12)) {
        return Err(BoundsError::DirectionConditionViolated { interval: i });
    }
    let mean_l = lambda.mean();
    let tilde: Vec<f64> = lambda.values.iter().map(|l| l - mean_l).collect();
    let mean_b_tilde = b.iter().zip(&tilde).map(|(bi, t)| bi * t).sum::<f64>() / n as f64;
    let dl = 0.5 / z.l() * (mean_b_tilde - c_lower * mean_l);
    // d xi_tau,i = (1/2) tilde_i u; nodes by cumulative sums (closure at
    // the far end holds because tilde has zero mean).
    let mut dnodes = Vec::with_capacity(n - 1);
    let mut acc = Vec2::ZERO;
    for t in tilde.iter().take(n - 1) {
        acc += u * (0.5 * t / n as f64);
        dnodes.push(acc);
    }
    let direction = Direction { dl, dnodes };

    let hp = constraint_d1(z, &direction)?;
    let pairing = lambda.pair(&hp);
    let lambda_l2 = lambda.norm_l2();
    // Construction identity: pairing = int b tilde^2 + c_lower mean^2
    //                                >= c_lower |lambda|_L2^2.
    debug_assert!(pairing >= c_lower * lambda_l2 * lambda_l2 * (1.0 - 1e-9) - 1e-300);
    let dz_composite =
        (dl * dl + direction.l2_value().powi(2) + direction.l2_velocity().powi(2)).sqrt();
    let denom = (lambda_l2 * dz_composite).max(1e-300);
    let ratio = pairing / denom;
    let ratio_sum_norm = pairing / (lambda_l2 * direction.norm_z2()).max(1e-300);
    Ok(InfSupWitness {
        direction,
        pairing,
        lambda_l2,
        dz_composite,
        ratio,
        ratio_sum_norm,
    })
}

#[derive(Debug, Clone)]
pub struct RegularityWitness {
    pub direction: Direction,
    /// `max_i |h'(z)[dz]_i - rhs_i|`.
    pub max_residual: f64,
}

/// Solve `h'(z)[dz] = rhs` constructively along the progress direction
/// `u`, requiring `b = xi_tau . u >= c > 0` per interval.
pub fn regularity_witness(
    z: &State,
    rhs: &[f64],
    u: Vec2,
    c: f64,
) -> Result<RegularityWitness, BoundsError> {
    if c <= 0.0 {
        return Err(BoundsError::NonPositiveDirectionBound);
    }
    let n = z.n_intervals();
    if rhs.len() != n {
        return Err(BoundsError::Kernel(KernelError::ShapeMismatch));
    }
    let u = u.unit();
    let b: Vec<f64> = (0..n).map(|i| z.path().velocity(i).dot(u)).collect();
    if let Some(i) = b
        .iter()
        .position(|bi| *bi < c * (1.0 - 1e-12) || *bi <= 0.0)
    {
        return Err(BoundsError::DirectionConditionViolated { interval: i });
    }
    let mean_binv_f = b.iter().zip(rhs).map(|(bi, f)| f / (2.0 * bi)).sum::<f64>() / n as f64;
    let mean_binv = b.iter().map(|bi| 1.0 / bi).sum::<f64>() / n as f64;
    let dl = -mean_binv_f / (z.l() * mean_binv);
    let g: Vec<f64> = b
        .iter()
        .zip(rhs)
        .map(|(bi, f)| (f / 2.0 + z.l() * dl) / bi)
        .collect();
    let mut dnodes = Vec::with_capacity(n - 1);
    let mut acc = Vec2::ZERO;
    for gi in g.iter().take(n - 1) {
        acc += u * (gi / n as f64);
        dnodes.push(acc);
    }
    let direction = Direction { dl, dnodes };
    let hp = constraint_d1(z, &direction)?;
    let max_residual = hp
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RegularityWitness {
        direction,
        max_residual,
    })
}

/// One bound family checked by the violation search.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed |value| / bound: sharpness of the inequality.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub families: Vec<FamilyReport>,
    pub total_samples: usize,
    pub total_violations: usize,
}

impl ViolationReport {
    pub fn pass(&self) -> bool {
        self.total_violations == 0
    }
}

fn sample_in_domain(rng: &mut ChaCha8Rng, domain: &Ellipse) -> Vec2 {
    let (_, b_semi) = domain.semi_axes();
    if b_semi < 1e-9 * domain.major_sum {
        // Degenerate ellipse: sample on the focal segment.
        let t = rng.gen_range(0.0..1.0);
        return domain.focus_a.lerp(domain.focus_b, t);
    }
    let (lo, hi) = domain.bounding_box();
    loop {
        let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if domain.contains(p) {
            return p;
        }
    }
}

fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec2 {
    Vec2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random smooth zero-boundary direction scaled to a target sup norm of
/// value plus derivative (the norm the neighborhood bounds are stated in).
fn smooth_direction(rng: &mut ChaCha8Rng, n: usize, target_xinf: f64) -> Direction {
    let coef: Vec<(Vec2, usize)> = (1..=3).map(|m| (rand_vec(rng, 1.0), m)).collect();
    let field = |tau: f64| {
        coef.iter().fold(Vec2::ZERO, |acc, (c, m)| {
            acc + *c * (std::f64::consts::PI * *m as f64 * tau).sin()
        })
    };
    let raw = Direction {
        dl: 0.0,
        dnodes: (1..n).map(|i| field(i as f64 / n as f64)).collect(),
    };
    let xinf = raw.norm_zinf().max(1e-12);
    raw.scale(target_xinf / xinf)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize, scale: f64, with_dl: bool) -> Direction {
    Direction {
        dl: if with_dl {
            rng.gen_range(-scale..scale)
        } else {
            0.0
        },
        dnodes: (0..n - 1).map(|_| rand_vec(rng, scale)).collect(),
    }
}

/// Direction for the integrated-bound families: half the draws are smooth
/// low-frequency fields (the integrand keeps one sign, which probes the
/// bound's sharp side), half are rough per-node noise (which probes the
/// derivative-heavy terms).
fn probe_direction(rng: &mut ChaCha8Rng, n: usize, with_dl: bool) -> Direction {
    let mut d = if rng.gen_bool(0.5) {
        smooth_direction(rng, n, 1.0)
    } else {
        random_direction(rng, n, 1.0, false)
    };
    if with_dl {
        d.dl = rng.gen_range(-1.0..1.0);
    }
    d
}

/// State inside the Zinf ball of radius `r` around the optimum: smooth
/// path perturbation plus an `L` shift, the Zinf budget split between
/// them. Returns the state and the unused part of the budget (available
/// for the multiplier when sampling in Y).
fn sample_state_in_neighborhood(
    rng: &mut ChaCha8Rng,
    chi_star: &KKTIterate,
    r: f64,
) -> (State, f64) {
    let n = chi_star.z.n_intervals();
    let rho = rng.gen_range(0.2..1.0) * r;
    let split = rng.gen_range(0.2..0.8);
    let path_budget = rho * split;
    let dl_budget = rho * (1.0 - split) * rng.gen_range(0.0..1.0);
    let mut dir = smooth_direction(rng, n, path_budget);
    dir.dl = dl_budget * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let state = chi_star.z.offset(&dir);
    (state, r - rho)
}

/// Randomized search for violations of the derivative bounds. Kernels are
/// sampled inside the domain the wind bounds were computed over; states
/// are sampled inside the `R`-neighborhood of `chi_star`. The sample
/// budget is split evenly across the six families and, within a family,
/// across independently seeded workers.
pub fn violation_search(
    bs: &BoundSet,
    chi_star: &KKTIterate,
    field: &WindField,
    v_bar: f64,
    domain: &Ellipse,
    sample_budget: usize,
    seed: u64,
) -> Result<ViolationReport, BoundsError> {
    const WORKERS: usize = 4;
    let families = [
        "first-derivative (alpha)",
        "second-derivative (beta)",
        "third-derivative (gamma)",
        "T-third (Gamma)",
        "T-second (B_upper)",
        "Lagrangian-Hessian (B_upper + R)",
    ];
    let per_family = sample_budget / families.len();
    let mut reports = Vec::new();
    for (fi, name) in families.iter().enumerate() {
        let chunk = per_family / WORKERS;
        let mut results: Vec<Result<(usize, f64), BoundsError>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..WORKERS)
                .map(|w| {
                    let worker_seed = seed
                        .wrapping_mul(0x9e3779b97f4a7c15)
                        .wrapping_add((fi * WORKERS + w) as u64);
                    scope.spawn(move || {
                        run_family(fi, bs, chi_star, field, v_bar, domain, chunk, worker_seed)
                    })
                })
                .collect();
            for h in handles {
                results.push(h.join().expect("violation-search worker panicked"));
            }
        });
        let mut violations = 0;
        let mut max_ratio = 0.0f64;
        for r in results {
            let (v, m) = r?;
            violations += v;
            max_ratio = max_ratio.max(m);
        }
        reports.push(FamilyReport {
            family: name.to_string(),
            samples: chunk * WORKERS,
            violations,
            max_ratio,
        });
    }
    Ok(ViolationReport {
        total_samples: reports.iter().map(|f| f.samples).sum(),
        total_violations: reports.iter().map(|f| f.violations).sum(),
        families: reports,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_family(
    family: usize,
    bs: &BoundSet,
    chi_star: &KKTIterate,
    field: &WindField,
    v_bar: f64,
    domain: &Ellipse,
    samples: usize,
    seed: u64,
) -> Result<(usize, f64), BoundsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut max_ratio = 0.0f64;
    let n = chi_star.z.n_intervals();
    let l_tilde = bs.l_tilde;
    let r = bs.r;
    let slack = 1.0 + 1e-12;

    for _ in 0..samples {
        let (value, bound) = match family {
            // Pointwise kernel bounds: any position in the domain, any
            // nonzero speed.
            0..=2 => {
                let x = sample_in_domain(&mut rng, domain);
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                let mag = l_tilde * 10f64.powf(rng.gen_range(-1.0..0.5));
                let v = Vec2::new(angle.cos(), angle.sin()) * mag;
                let k = PointwiseKernel::new(field, x, v, v_bar)?;
                let d = (rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0));
                match family {
                    0 => {
                        let val = kernel_d1(&k, d);
                        (
                            val.abs(),
                            bs.alpha0 * mag * d.0.norm() + bs.alpha1 * d.1.norm(),
                        )
                    }
                    1 => {
                        let e = (rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0));
                        let val = kernel_d2(&k, d, e);
                        let b = bs.beta0 * mag * d.0.norm() * e.0.norm()
                            + bs.beta1 * (d.0.norm() * e.1.norm() + d.1.norm() * e.0.norm())
                            + bs.beta2 / mag * d.1.norm() * e.1.norm();
                        (val.abs(), b)
                    }
                    _ => {
                        let e = (rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0));
                        let val = kernel_d3(&k, d, e, 1e-9 * l_tilde)?;
                        let b = (bs.gamma0 * mag * d.0.norm_sq()
                            + bs.gamma2 * d.0.norm() * d.1.norm()
                            + bs.gamma4 / mag * d.1.norm_sq())
                            * e.0.norm()
                            + (bs.gamma1 * d.0.norm_sq()
                                + bs.gamma3 / mag * d.0.norm() * d.1.norm()
                                + bs.gamma5 / (mag * mag) * d.1.norm_sq())
                                * e.1.norm();
                        (val.abs(), b)
                    }
                }
            }
            // |T'''(xi)[d]^2[e]| <= Gamma (|dxi|^2 + |dxi_tau|^2) |e|_C for
            // paths within Xinf-distance R of the optimum path. Each sample
            // runs a short stochastic ascent on the ratio over the two
            // directions: the inequality must hold for every direction, so
            // an adversarial probe is the honest way to measure sharpness
            // (and to catch a corrupted constant).
            3 => {
                let rho = rng.gen_range(0.2..1.0);
                let offset = smooth_direction(&mut rng, n, r * rho);
                let state = chi_star.z.offset(&offset);
                let ratio_of = |d: &Direction, e: &Direction| -> Result<f64, BoundsError> {
                    let val = travel_time_d3(&state, field, v_bar, d, e, 1e-9 * l_tilde)?;
                    let b = bs.big_gamma
                        * (d.l2_value().powi(2) + d.l2_velocity().powi(2))
                        * e.norm_zinf();
                    Ok(val.abs() / b.max(1e-300))
                };
                let best = if rng.gen_bool(0.5) {
                    // Single-node probe: the bound's velocity channel is its
                    // sharpest, and a hat displacement perpendicular to the
                    // local path velocity drives it without paying for any
                    // spread in the L2 factors. Ascend over the two node
                    // vectors only.
                    let node = rng.gen_range(1..n);
                    let v_hat = state.path().velocity(node.min(n - 1)).unit();
                    let mut a = v_hat.perp() + rand_vec(&mut rng, 0.2);
                    let mut w = v_hat.perp() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let local = |a: Vec2, w: Vec2| -> Result<f64, BoundsError> {
                        let mut da = vec![Vec2::ZERO; n - 1];
                        da[node - 1] = a;
                        let mut dw = vec![Vec2::ZERO; n - 1];
                        dw[node - 1] = w;
                        ratio_of(
                            &Direction {
                                dl: 0.0,
                                dnodes: da,
                            },
                            &Direction {
                                dl: 0.0,
                                dnodes: dw,
                            },
                        )
                    };
                    let mut best = local(a, w)?;
                    let mut scale = 0.5f64;
                    for _ in 0..20 {
                        let ac = a + rand_vec(&mut rng, scale);
                        let wc = w + rand_vec(&mut rng, scale);
                        let cand = local(ac, wc)?;
                        if cand > best {
                            best = cand;
                            a = ac;
                            w = wc;
                        } else {
                            scale *= 0.8;
                        }
                    }
                    best
                } else {
                    // Spread probe with stochastic ascent over all nodes.
                    let mut d = probe_direction(&mut rng, n, false);
                    let mut e = probe_direction(&mut rng, n, false);
                    let mut best = ratio_of(&d, &e)?;
                    let mut scale = 1.0f64;
                    for _ in 0..16 {
                        let mut dc = d.clone();
                        let mut ec = e.clone();
                        for p in dc.dnodes.iter_mut().chain(ec.dnodes.iter_mut()) {
                            if rng.gen_bool(0.3) {
                                *p += rand_vec(&mut rng, scale);
                            }
                        }
                        let cand = ratio_of(&dc, &ec)?;
                        if cand > best {
                            best = cand;
                            d = dc;
                            e = ec;
                        } else {
                            scale *= 0.8;
                        }
                    }
                    best
                };
                (best, 1.0)
            }
            // |T''(xi)[d]^2| <= B_upper |d|_Z2^2 in the Zinf neighborhood.
            4 => {
                let (state, _) = sample_state_in_neighborhood(&mut rng, chi_star, r);
                let d = probe_direction(&mut rng, n, true);
                let val = travel_time_d2(&state, field, v_bar, &d, &d)?;
                (val.abs(), bs.b_upper * d.norm_z2().powi(2))
            }
            // |L_zz(chi)[d]^2| <= (B_upper + R) |d|_Z2^2 with the
            // function-space multiplier bounded by the leftover Yinf budget.
            _ => {
                let (state, budget_left) = sample_state_in_neighborhood(&mut rng, chi_star, r);
                let lam_bound = budget_left.max(0.0);
                let lambda = Multiplier {
                    values: (0..n)
                        .map(|_| rng.gen_range(-1.0..1.0) * lam_bound)
                        .collect(),
                };
                let d = probe_direction(&mut rng, n, true);
                let t2 = travel_time_d2(&state, field, v_bar, &d, &d)?;
                let h2 = constraint_d2(&d, &d)?;
                let val = t2 + lambda.pair(&h2);
                (val.abs(), (bs.b_upper + r) * d.norm_z2().powi(2))
            }
        };
        let ratio = value / bound.max(1e-300);
        if ratio > slack {
            violations += 1;
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok((violations, max_ratio))
}

impl BoundSet {
    /// JSON with a provenance tag per constant: `formula` for verbatim
    /// formula evaluations, `estimated` for the coercivity estimate and
    /// everything downstream of it, and the wind-bound inputs tagged by
    /// how they were obtained.
    pub fn to_json(&self, wind_method: crate::windfield::BoundMethod) -> serde_json::Value {
        let wind_prov = match wind_method {
            crate::windfield::BoundMethod::Analytic => Provenance::Formula,
            crate::windfield::BoundMethod::Sampled => Provenance::Sampled,
        };
        let mut constants = serde_json::Map::new();
        let mut put = |name: &str, value: f64, prov: Provenance| {
            constants.insert(
                name.to_string(),
                serde_json::json!({ "value": value, "provenance": prov }),
            );
        };
        put("c0", self.c0, wind_prov);
        put("c1", self.c1, wind_prov);
        put("c2", self.c2, wind_prov);
        put("c3", self.c3, wind_prov);
        put("l_tilde", self.l_tilde, Provenance::Formula);
        put("l_low", self.l_low, Provenance::Formula);
        put("l_high", self.l_high, Provenance::Formula);
        put("alpha0", self.alpha0, Provenance::Formula);
        put("alpha1", self.alpha1, Provenance::Formula);
        put("beta0", self.beta0, Provenance::Formula);
        put("beta1", self.beta1, Provenance::Formula);
        put("beta2", self.beta2, Provenance::Formula);
        put("gamma0", self.gamma0, Provenance::Formula);
        put("gamma1", self.gamma1, Provenance::Formula);
        put("gamma2", self.gamma2, Provenance::Formula);
        put("gamma3", self.gamma3, Provenance::Formula);
        put("gamma4", self.gamma4, Provenance::Formula);
        put("gamma5", self.gamma5, Provenance::Formula);
        put("big_gamma", self.big_gamma, Provenance::Formula);
        put("b_upper", self.b_upper, Provenance::Formula);
        put("beta_hat1", self.beta_hat1, Provenance::Formula);
        put("beta_hat2", self.beta_hat2, Provenance::Formula);
        put("b_hat", self.b_hat, Provenance::Formula);
        put("b_lower_est", self.b_lower_est, Provenance::Estimated);
        put("c", self.c, Provenance::Estimated);
        put("kappa", self.kappa, Provenance::Estimated);
        put("omega1", self.omega1, Provenance::Estimated);
        put("omega2", self.omega2, Provenance::Estimated);
        put("omega", self.omega, Provenance::Estimated);
        put("r", self.r, Provenance::Estimated);
        put("r_c", self.r_c, Provenance::Estimated);
        serde_json::json!({
            "v_bar": self.v_bar,
            "u": [self.u.x, self.u.y],
            "formulas_valid": self.formulas_valid,
            "binding_cap": self.binding_cap,
            "constants": serde_json::Value::Object(constants),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kkt::{solve, SolveOptions};
    use crate::trajectory::straight_line;
    use crate::windfield::{compute_bounds, BoundMethod};

    fn unit_bounds(c0: f64, c1: f64, c2: f64, c3: f64) -> WindBounds {
        WindBounds {
            c0,
            c1,
            c2,
            c3,
            domain: Ellipse::new(Vec2::ZERO, Vec2::new(1.0, 0.0), 2.0).unwrap(),
            method: BoundMethod::Analytic,
            safety_factor: 1.0,
        }
    }

    #[test]
    fn constants_zero_derivative_wind() {
        // c1 = c2 = c3 = 0 and v_lower = v_bar = 1: only gamma5 = 18
        // survives, so Gamma = 18 / (L~ - R)^2.
        let wb = unit_bounds(0.0, 0.0, 0.0, 0.0);
        let bs = compute_constants(&wb, 1.0, 1.0, 0.25, 1.0, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert_eq!(bs.gamma0, 0.0);
        assert_eq!(bs.gamma4, 0.0);
        assert_eq!(bs.gamma5, 18.0);
        assert!((bs.big_gamma - 18.0 / (0.75f64 * 0.75)).abs() < 1e-12);
        assert_eq!(bs.l_high, bs.l_tilde);
        assert!(bs.formulas_valid);
    }

    #[test]
    fn constants_beta_alpha_examples() {
        let wb = unit_bounds(0.0, 1.0, 0.0, 0.0);
        let bs = compute_constants(&wb, 1.0, 1.0, 0.1, 1.0, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!((bs.beta0 - 14.0).abs() < 1e-12);
        assert!((bs.beta1 - 7.0).abs() < 1e-12);
        assert!((bs.beta2 - 4.0).abs() < 1e-12);
        assert!((bs.alpha0 - 21.0 / 4.0).abs() < 1e-12);
        assert!((bs.alpha1 - 3.5).abs() < 1e-12);
    }

    #[test]
    fn constants_l_high_ratio() {
        let wb = unit_bounds(1.0 / 3.0, 0.0, 0.0, 0.0);
        let bs = compute_constants(&wb, 1.0, 1.0, 0.1, 1.0, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!((bs.l_high - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_formula_values() {
        let wb = unit_bounds(0.0, 0.0, 0.0, 0.0);
        let k = kappa_of(0.0, 1.0, &wb, 1.0, 1.0).unwrap();
        assert!((k - (19.0f64 / 8.0).powf(-0.5)).abs() < 1e-12);
        assert!((k - 0.64888568).abs() < 1e-6);

        // c0 = v/3: ratio 2, kappa = c [3/8 + 8]^{-1/2}.
        let wb = unit_bounds(1.0 / 3.0, 0.0, 0.0, 0.0);
        let k = kappa_of(0.0, 0.7, &wb, 1.0, 1.0).unwrap();
        assert!((k - 0.7 * (0.375f64 + 8.0).powf(-0.5)).abs() < 1e-12);

        // R -> c drives kappa to zero; beyond c is an error.
        let k = kappa_of(0.7 - 1e-9, 0.7, &wb, 1.0, 1.0).unwrap();
        assert!(k < 1e-8);
        assert!(kappa_of(0.8, 0.7, &wb, 1.0, 1.0).is_err());
    }

    #[test]
    fn omega1_formula_example() {
        // B_lower = 4, kappa = 1, B_upper + R = 1:
        // omega1 = sqrt(2) max{1, 2, 1} = 2 sqrt(2).
        let o1 = omega1_at(4.0, 0.9, 1.0, 0.1);
        assert!((o1 - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn omega2_is_linear_and_rc_positive() {
        let wb = unit_bounds(0.0, 0.0, 0.0, 0.0);
        let bs = compute_constants(&wb, 1.0, 1.0, 0.1, 1.0, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!((bs.omega2 - (8.0 + bs.b_hat) * 0.1).abs() < 1e-12);
        assert!(bs.r_c > 0.0, "R_C must be positive when omega1 is finite");
        assert!(!bs.binding_cap.is_empty());
    }

    #[test]
    fn kappa_decreasing_gamma_increasing_in_radius() {
        let wb = unit_bounds(0.2, 0.5, 0.3, 0.1);
        let mut last_kappa = f64::INFINITY;
        let mut last_gamma = 0.0;
        for i in 0..20 {
            let r = 0.02 * i as f64;
            let k = kappa_of(r, 0.9, &wb, 1.0, 1.0).unwrap();
            assert!(k < last_kappa);
            last_kappa = k;
            let g = big_gamma_at(&wb, 1.0, 1.0, r);
            assert!(g >= last_gamma);
            last_gamma = g;
        }
    }

    fn converged_vortex() -> (KKTIterate, WindField) {
        let field = WindField::GaussianVortex {
            center: Vec2::new(0.5, 0.0),
            amplitude: 0.35,
            width: 0.35,
        };
        let s = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 12).unwrap();
        let report = solve(
            &KKTIterate::feasible_start(s),
            &field,
            1.0,
            &SolveOptions::for_scale(1.0, 1.0),
        );
        assert!(report.converged());
        (report.final_iterate, field)
    }

    #[test]
    fn coercivity_positive_at_zero_wind_optimum() {
        let s = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 8).unwrap();
        let chi = KKTIterate::feasible_start(s);
        let est = estimate_coercivity(&chi, &WindField::zero(), 1.0).unwrap();
        assert!(est > 0.0, "estimate {est}");
    }

    #[test]
    fn coercivity_sign_invariant_under_rescaling() {
        // Same geometry in scaled units: the sign must not change.
        let scale = 1000.0;
        let s = straight_line(Vec2::ZERO, Vec2::new(scale, 0.0), 8).unwrap();
        let chi = KKTIterate::feasible_start(s);
        let est = estimate_coercivity(&chi, &WindField::zero(), scale).unwrap();
        assert!(est > 0.0);
    }

    #[test]
    fn coercivity_positive_at_vortex_optimum() {
        let (chi, field) = converged_vortex();
        let est = estimate_coercivity(&chi, &field, 1.0).unwrap();
        assert!(est > 0.0, "estimate {est}");
        let plain = reduced_hessian_min_eig(&chi, &field, 1.0).unwrap();
        assert!(plain > 0.0);
    }

    #[test]
    fn regularity_witness_reproduces_rhs() {
        let z = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 10).unwrap();
        let u = Vec2::new(1.0, 0.0);
        let w = regularity_witness(&z, &[0.0; 10], u, 0.9).unwrap();
        assert_eq!(w.direction.dl, 0.0);
        assert!(w.direction.dnodes.iter().all(|p| p.norm() == 0.0));

        let w = regularity_witness(&z, &[0.3; 10], u, 0.9).unwrap();
        assert!(w.max_residual <= 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let rhs: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = regularity_witness(&z, &rhs, u, 0.9).unwrap();
            assert!(w.max_residual <= 1e-10, "residual {}", w.max_residual);
        }
    }

    #[test]
    fn regularity_witness_rejects_bad_direction() {
        let z = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 6).unwrap();
        let err = regularity_witness(&z, &[0.1; 6], Vec2::new(-1.0, 0.0), 0.5).unwrap_err();
        assert!(matches!(
            err,
            BoundsError::DirectionConditionViolated { .. }
        ));
    }

    #[test]
    fn infsup_witness_achieves_kappa() {
        let z = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 10).unwrap();
        let u = Vec2::new(1.0, 0.0);
        let wb = unit_bounds(0.0, 0.0, 0.0, 0.0);
        let kappa = kappa_of(0.0, 1.0, &wb, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let lambda = Multiplier {
                values: (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let w = infsup_witness(&z, &lambda, u, 1.0).unwrap();
            assert!(
                w.ratio >= kappa * (1.0 - 1e-10),
                "ratio {} below kappa {kappa}",
                w.ratio
            );
        }
    }

    #[test]
    fn infsup_witness_special_multipliers() {
        // Constant lambda: the fluctuation part vanishes and the pairing
        // reduces to the mean term.
        let z = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 6).unwrap();
        let lambda = Multiplier {
            values: vec![0.7; 6],
        };
        let w = infsup_witness(&z, &lambda, Vec2::new(1.0, 0.0), 1.0).unwrap();
        for p in &w.direction.dnodes {
            assert!(p.norm() < 1e-15);
        }
        assert!((w.pairing - 0.7 * 0.7).abs() < 1e-12);

        // Zero-mean lambda: no dL contribution from the mean term.
        let lambda = Multiplier {
            values: vec![0.5, -0.5, 0.5, -0.5, 0.5, -0.5],
        };
        let w = infsup_witness(&z, &lambda, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!(w.pairing > 0.0);
    }

    #[test]
    fn violation_search_passes_and_catches_corruption() {
        let (chi, field) = converged_vortex();
        let domain =
            crate::trajectory::ellipse_domain(Vec2::ZERO, Vec2::new(1.0, 0.0), 1.0, 0.3).unwrap();
        let wb = compute_bounds(&field, &domain, 60, 1.1).unwrap();
        assert!(wb.within_bound_hypothesis(1.0), "c0 = {}", wb.c0);
        let b_lower = estimate_coercivity(&chi, &field, 1.0).unwrap();
        assert!(b_lower > 0.0);
        let u = Vec2::new(1.0, 0.0);
        let c = (0..chi.z.n_intervals())
            .map(|i| chi.z.path().velocity(i).dot(u))
            .fold(f64::INFINITY, f64::min);
        let r = default_radius(&wb, 1.0, 1.0, b_lower);
        assert!(r > 0.0);
        let bs = compute_constants(&wb, 1.0, 1.0, r, b_lower, u, c).unwrap();

        let rep = violation_search(&bs, &chi, &field, 1.0, &domain, 6000, 12345).unwrap();
        assert!(rep.pass(), "{rep:#?}");
        for f in &rep.families {
            assert!(f.max_ratio <= 1.0 + 1e-12);
            assert!(f.max_ratio > 0.0, "family {} never exercised", f.family);
        }

        // Falsification control: corrupting Gamma by 1e-3 must produce
        // violations in the T''' family.
        let mut corrupt = bs.clone();
        corrupt.big_gamma *= 1e-3;
        let rep = violation_search(&corrupt, &chi, &field, 1.0, &domain, 6000, 12345).unwrap();
        assert!(rep.total_violations > 0);
    }

    #[test]
    fn violation_search_zero_wind_degenerate_domain() {
        // Zero wind: all wind constants vanish, the flight domain collapses
        // to the segment, and the remaining bounds are the metric ones.
        let field = WindField::zero();
        let s = straight_line(Vec2::ZERO, Vec2::new(1.0, 0.0), 10).unwrap();
        let chi = KKTIterate::feasible_start(s);
        let domain =
            crate::trajectory::ellipse_domain(Vec2::ZERO, Vec2::new(1.0, 0.0), 1.0, 0.0).unwrap();
        let wb = compute_bounds(&field, &domain, 40, 1.1).unwrap();
        let b_lower = estimate_coercivity(&chi, &field, 1.0).unwrap();
        let r = default_radius(&wb, 1.0, 1.0, b_lower);
        let bs =
            compute_constants(&wb, 1.0, 1.0, r, b_lower, Vec2::new(1.0, 0.0), 1.0).unwrap();
        let rep = violation_search(&bs, &chi, &field, 1.0, &domain, 3000, 5).unwrap();
        assert!(rep.pass(), "{rep:#?}");
    }

    #[test]
    fn boundset_serializes_with_provenance() {
        let wb = unit_bounds(0.1, 0.2, 0.1, 0.05);
        let bs = compute_constants(&wb, 1.0, 1.0, 0.05, 0.8, Vec2::new(1.0, 0.0), 0.9).unwrap();
        let json = bs.to_json(BoundMethod::Sampled);
        assert_eq!(json["constants"]["alpha0"]["provenance"], "formula");
        assert_eq!(json["constants"]["b_lower_est"]["provenance"], "estimated");
        assert_eq!(json["constants"]["omega1"]["provenance"], "estimated");
        assert_eq!(json["constants"]["c0"]["provenance"], "sampled");
        assert!(json["constants"]["kappa"]["value"].as_f64().unwrap() > 0.0);
    }
}
