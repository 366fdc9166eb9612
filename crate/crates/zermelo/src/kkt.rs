//! Newton-KKT iteration on the constrained travel-time problem.
//!
//! Each step assembles the saddle-point system
//!
//! ```text
//! [ H   A^T ] [dz]       [ grad_z L ]        H = T'' + sum_i lambda_i h_i''
//! [ A   0   ] [dl]  = -  [ h(z)     ],       A = h'(z)
//! ```
//!
//! and solves it with a dense symmetric-indefinite factorization. A
//! factorization breakdown is reported as a singular step; it signals that
//! the saddle-point solvability conditions fail at the iterate.

use crate::functional::{
    constraint_jacobian, lagrangian_grad, travel_time, travel_time_hessian, KKTIterate,
    KernelError, Multiplier, Residual,
};
use crate::linalg::SymmetricIndefinite;
use crate::trajectory::Direction;
use crate::windfield::WindField;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Damping {
    None,
    ArmijoHalving,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    pub damping: Damping,
    pub speed_floor: f64,
}

impl SolveOptions {
    /// Defaults scaled to the problem: `tol_abs = 1e-10 L~ / v`,
    /// `speed_floor = 1e-6 L~`.
    pub fn for_scale(l_tilde: f64, v_bar: f64) -> Self {
        SolveOptions {
            tol_abs: 1e-10 * l_tilde / v_bar,
            tol_rel: 1e-12,
            max_iter: 50,
            damping: Damping::None,
            speed_floor: 1e-6 * l_tilde,
        }
    }

    pub fn with_damping(mut self, damping: Damping) -> Self {
        self.damping = damping;
        self
    }

    /// Tightened copy for runs whose final iterate serves as the optimum
    /// proxy in contraction diagnostics.
    pub fn tightened(mut self, factor: f64) -> Self {
        self.tol_abs /= factor;
        self.tol_rel /= factor;
        self
    }
}

/// Assembled Newton system at one iterate.
pub struct KKTSystem {
    pub h: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub rhs_z: DVector<f64>,
    pub rhs_lambda: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    Singular,
    Kernel(KernelError),
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::Singular => write!(f, "saddle-point system is singular"),
            StepError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for StepError {}

impl From<KernelError> for StepError {
    fn from(e: KernelError) -> Self {
        StepError::Kernel(e)
    }
}

/// Assemble the saddle-point system at `chi`. Requires every interval
/// speed to stay above `speed_floor` (the integrand derivatives blow up at
/// zero speed).
pub fn assemble(
    chi: &KKTIterate,
    field: &WindField,
    v_bar: f64,
    speed_floor: f64,
) -> Result<KKTSystem, KernelError> {
    let n = chi.z.n_intervals();
    if chi.lambda.n_intervals() != n {
        return Err(KernelError::ShapeMismatch);
    }
    for i in 0..n {
        let speed = chi.z.path().velocity(i).norm();
        if speed < speed_floor {
            return Err(KernelError::SpeedBelowFloor {
                speed,
                floor: speed_floor,
            });
        }
    }
    let mut h = travel_time_hessian(&chi.z, field, v_bar)?;
    // h_i'' contributes 2 d xi_tau,i . d~ xi_tau,i - 2 dL dL~ per interval,
    // weighted by lambda_i. The velocity part couples neighbouring nodes.
    let nf = n as f64;
    let l_col = 0usize;
    for i in 0..n {
        let li = chi.lambda.values[i];
        if li == 0.0 {
            continue;
        }
        h[(l_col, l_col)] += -2.0 * li;
        // d xi_tau,i picks up +-N from the two adjacent nodes.
        let idx = |node: usize, axis: usize| -> Option<usize> {
            (node >= 1 && node < n).then(|| 1 + 2 * (node - 1) + axis)
        };
        let contrib = 2.0 * li * nf * nf;
        for axis in 0..2 {
            let left = idx(i, axis);
            let right = idx(i + 1, axis);
            if let Some(a) = left {
                h[(a, a)] += contrib;
            }
            if let Some(b) = right {
                h[(b, b)] += contrib;
            }
            if let (Some(a), Some(b)) = (left, right) {
                h[(a, b)] -= contrib;
                h[(b, a)] -= contrib;
            }
        }
    }
    let a = constraint_jacobian(&chi.z);
    let res = lagrangian_grad(chi, field, v_bar)?;
    Ok(KKTSystem {
        h,
        a,
        rhs_z: -DVector::from_vec(res.grad_z),
        rhs_lambda: -DVector::from_vec(res.grad_lambda),
    })
}

/// Solve the assembled saddle system for `(dz, dlambda)`. Verifies the
/// linear residual to `1e-10 |rhs|` with one refinement pass.
pub fn newton_step(sys: &KKTSystem) -> Result<(DVector<f64>, DVector<f64>), StepError> {
    let nz = sys.h.nrows();
    let m = sys.a.nrows();
    let dim = nz + m;
    let mut full = DMatrix::zeros(dim, dim);
    full.view_mut((0, 0), (nz, nz)).copy_from(&sys.h);
    full.view_mut((nz, 0), (m, nz)).copy_from(&sys.a);
    full.view_mut((0, nz), (nz, m))
        .copy_from(&sys.a.transpose());
    let mut rhs = DVector::zeros(dim);
    rhs.rows_mut(0, nz).copy_from(&sys.rhs_z);
    rhs.rows_mut(nz, m).copy_from(&sys.rhs_lambda);

    let factor = SymmetricIndefinite::factor(&full).map_err(|_| StepError::Singular)?;
    let mut x = factor.solve(&rhs);
    let rhs_norm = rhs.norm().max(1e-300);
    for _ in 0..2 {
        let res = &rhs - &full * &x;
        if res.norm() <= 1e-10 * rhs_norm {
            break;
        }
        x += factor.solve(&res);
    }
    if (&rhs - &full * &x).norm() > 1e-10 * rhs_norm {
        return Err(StepError::Singular);
    }
    Ok((x.rows(0, nz).into_owned(), x.rows(nz, m).into_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Singular,
    InfeasibleKernel,
}

/// One accepted iterate in the solve log.
#[derive(Debug, Clone, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub residual: f64,
    /// Y2 distance to the final iterate; filled once the run ends.
    pub y2_to_final: f64,
    pub step_norm: f64,
    pub mu: f64,
    pub t: f64,
    pub feasibility: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub records: Vec<IterRecord>,
    pub status: SolveStatus,
    pub final_iterate: KKTIterate,
    /// Iterate snapshots, index-aligned with `records`.
    pub snapshots: Vec<KKTIterate>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_t(&self, field: &WindField, v_bar: f64) -> Result<f64, KernelError> {
        travel_time(&self.final_iterate.z, field, v_bar)
    }

    /// CSV log with columns `iter,residual,step_norm,mu,T,feasibility`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,residual,step_norm,mu,T,feasibility\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter,
                crate::trajectory::fmt_f64(r.residual),
                crate::trajectory::fmt_f64(r.step_norm),
                crate::trajectory::fmt_f64(r.mu),
                crate::trajectory::fmt_f64(r.t),
                crate::trajectory::fmt_f64(r.feasibility),
            ));
        }
        out
    }
}

fn apply_step(chi: &KKTIterate, dz: &DVector<f64>, dl: &DVector<f64>, mu: f64) -> KKTIterate {
    let dir = Direction::from_coeffs(dz.as_slice()).scale(mu);
    let z = chi.z.offset(&dir);
    let lambda = Multiplier {
        values: chi
            .lambda
            .values
            .iter()
            .zip(dl.iter())
            .map(|(l, d)| l + mu * d)
            .collect(),
    };
    KKTIterate::new(z, lambda)
}

const MU_MIN: f64 = 9.5367431640625e-7; // 2^-20

/// Newton iteration `chi <- chi + mu * dchi` until the residual drops
/// below `tol_abs + tol_rel * |F(chi0)|`. With Armijo halving, `mu` is cut
/// until the residual norm decreases; running out of damping at
/// `mu < 2^-20` reports an infeasible kernel.
pub fn solve(chi0: &KKTIterate, field: &WindField, v_bar: f64, opts: &SolveOptions) -> SolveReport {
    assert!(chi0.z.n_intervals() >= 2, "solver requires N >= 2");
    let mut chi = chi0.clone();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();

    let eval = |chi: &KKTIterate| -> Result<(Residual, f64), KernelError> {
        let r = lagrangian_grad(chi, field, v_bar)?;
        let t = travel_time(&chi.z, field, v_bar)?;
        Ok((r, t))
    };

    let (mut res, mut t_now) = match eval(&chi) {
        Ok(v) => v,
        Err(_) => {
            return SolveReport {
                records,
                status: SolveStatus::InfeasibleKernel,
                final_iterate: chi.clone(),
                snapshots,
            }
        }
    };
    let mut res_norm = res.norm();
    let tol = opts.tol_abs + opts.tol_rel * res_norm;
    let log = |records: &mut Vec<IterRecord>,
               snapshots: &mut Vec<KKTIterate>,
               iter: usize,
               chi: &KKTIterate,
               res_norm: f64,
               step_norm: f64,
               mu: f64,
               t: f64| {
        records.push(IterRecord {
            iter,
            residual: res_norm,
            y2_to_final: 0.0,
            step_norm,
            mu,
            t,
            feasibility: chi.z.feasibility_residual(),
        });
        snapshots.push(chi.clone());
    };
    log(
        &mut records,
        &mut snapshots,
        0,
        &chi,
        res_norm,
        0.0,
        0.0,
        t_now,
    );

    let mut status = SolveStatus::MaxIter;
    if res_norm <= tol {
        status = SolveStatus::Converged;
    } else {
        for iter in 1..=opts.max_iter {
            let sys = match assemble(&chi, field, v_bar, opts.speed_floor) {
                Ok(s) => s,
                Err(_) => {
                    status = SolveStatus::InfeasibleKernel;
                    break;
                }
            };
            let (dz, dl) = match newton_step(&sys) {
                Ok(s) => s,
                Err(StepError::Singular) => {
                    status = SolveStatus::Singular;
                    break;
                }
                Err(StepError::Kernel(_)) => {
                    status = SolveStatus::InfeasibleKernel;
                    break;
                }
            };
            let step_norm = (dz.norm_squared() + dl.norm_squared()).sqrt();

            let mut mu = 1.0;
            let accepted = loop {
                let cand = apply_step(&chi, &dz, &dl, mu);
                match eval(&cand) {
                    Ok((r, t)) => {
                        let rn = r.norm();
                        if opts.damping == Damping::None || rn < res_norm {
                            break Some((cand, r, rn, t, mu));
                        }
                    }
                    Err(_) => {
                        if opts.damping == Damping::None {
                            status = SolveStatus::InfeasibleKernel;
                            break None;
                        }
                    }
                }
                mu *= 0.5;
                if mu < MU_MIN {
                    status = SolveStatus::InfeasibleKernel;
                    break None;
                }
            };
            let Some((cand, r, rn, t, mu)) = accepted else {
                break;
            };
            chi = cand;
            res = r;
            res_norm = rn;
            t_now = t;
            log(
                &mut records,
                &mut snapshots,
                iter,
                &chi,
                res_norm,
                mu * step_norm,
                mu,
                t_now,
            );
            if res_norm <= tol {
                status = SolveStatus::Converged;
                break;
            }
        }
    }
    let _ = &res;

    let mut report = SolveReport {
        records,
        status,
        final_iterate: chi,
        snapshots,
    };
    for i in 0..report.records.len() {
        report.records[i].y2_to_final =
            crate::functional::y2_distance(&report.snapshots[i], &report.final_iterate);
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticsError {
    NotConverged,
    TooFewIterates,
}

impl fmt::Display for DiagnosticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticsError::NotConverged => write!(f, "diagnostics need a converged run"),
            DiagnosticsError::TooFewIterates => {
                write!(f, "too few iterates for contraction ratios")
            }
        }
    }
}

impl std::error::Error for DiagnosticsError {}

#[derive(Debug, Clone)]
pub struct ContractionDiagnostics {
    /// `|e_{k+1}| / |e_k|` in the Y2 norm, with the final iterate standing
    /// in for the optimum.
    pub ratios: Vec<f64>,
    /// `|e_{k+1}| / |e_k|^2` for quadratic-order estimation.
    pub quadratic_quotients: Vec<f64>,
}

/// Contraction ratios of a converged run. The optimum proxy is the final
/// iterate, so callers should solve with a tolerance well below the one
/// whose contraction they want to observe (see
/// [`SolveOptions::tightened`]).
pub fn contraction_diagnostics(
    report: &SolveReport,
) -> Result<ContractionDiagnostics, DiagnosticsError> {
    if report.status != SolveStatus::Converged {
        return Err(DiagnosticsError::NotConverged);
    }
    // records include iterate 0; distances to the final iterate, whose own
    // entry is excluded.
    let errs: Vec<f64> = report.records[..report.records.len() - 1]
        .iter()
        .map(|r| r.y2_to_final)
        .collect();
    if errs.len() < 2 {
        return Err(DiagnosticsError::TooFewIterates);
    }
    let ratios = errs.windows(2).map(|w| w[1] / w[0]).collect();
    let quadratic_quotients = errs.windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
    Ok(ContractionDiagnostics {
        ratios,
        quadratic_quotients,
    })
}
