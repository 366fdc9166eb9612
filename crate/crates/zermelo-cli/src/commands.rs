//! The five subcommands. Each run computes everything first and writes
//! its artifacts in one pass at the end, closing with a manifest that
//! records the config hash, seed, and timings.

use crate::config::Prepared;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::Instant;
use zermelo::bounds::{compute_constants, default_radius, estimate_coercivity, violation_search};
use zermelo::functional::{
    kernel_d1, kernel_d2, kernel_d3, kernel_f, y2_distance, KKTIterate, Multiplier, PointwiseKernel,
};
use zermelo::geometry::Vec2;
use zermelo::global_search::global_optimize;
use zermelo::kkt::{solve, SolveReport, SolveStatus};
use zermelo::trajectory::{fmt_f64, straight_line, Direction, State};
use zermelo::windfield::verify_field;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

/// Collects output files and timings; everything is written at the end of
/// the run by the single writer.
pub struct RunContext {
    out_dir: std::path::PathBuf,
    files: Vec<(String, Vec<u8>)>,
    timings: Vec<(String, f64)>,
    config_sha256: String,
    subcommand: String,
    seed: u64,
    quiet: bool,
}

impl RunContext {
    pub fn new(
        subcommand: &str,
        config_path: &Path,
        out_dir: &Path,
        seed: u64,
        quiet: bool,
    ) -> std::io::Result<Self> {
        let bytes = std::fs::read(config_path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        Ok(RunContext {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
            timings: Vec::new(),
            config_sha256: format!("{:x}", hasher.finalize()),
            subcommand: subcommand.to_string(),
            seed,
            quiet,
        })
    }

    fn add_file(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    fn add_timing(&mut self, name: &str, since: Instant) {
        self.timings
            .push((name.to_string(), since.elapsed().as_secs_f64() * 1e3));
    }

    fn say(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }

    /// Write every artifact plus the manifest.
    fn finish(mut self) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        let manifest = serde_json::json!({
            "subcommand": self.subcommand,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "timings_ms": self.timings.iter().map(|(n, t)| (n.clone(), serde_json::json!(t))).collect::<serde_json::Map<_, _>>(),
            "outputs": self.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        });
        self.files.push((
            "manifest.json".to_string(),
            serde_json::to_vec_pretty(&manifest).expect("manifest serializes"),
        ));
        for (name, contents) in &self.files {
            std::fs::write(self.out_dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn trajectory_files(ctx: &mut RunContext, prefix: &str, state: &State) {
    ctx.add_file(
        &format!("{prefix}.json"),
        serde_json::to_vec_pretty(&state.to_json()).expect("state serializes"),
    );
    ctx.add_file(&format!("{prefix}.csv"), state.to_csv());
}

/// `solve`: Newton refinement from the constant-speed straight start.
pub fn cmd_solve(mut ctx: RunContext, prep: &Prepared) -> i32 {
    let clock = Instant::now();
    let field = &prep.scenario.wind;
    let v_bar = prep.scenario.airspeed;
    let start = straight_line(prep.scenario.x_o, prep.scenario.x_d, prep.scenario.n)
        .expect("endpoints validated");
    let report = solve(
        &KKTIterate::feasible_start(start),
        field,
        v_bar,
        &prep.solve_options,
    );
    ctx.add_timing("solve", clock);

    ctx.add_file("solve_report.csv", report.to_csv());
    trajectory_files(&mut ctx, "trajectory", &report.final_iterate.z);
    let converged = report.converged();
    match report.final_t(field, v_bar) {
        Ok(t) => ctx.say(&format!(
            "solve: {:?} after {} iterations, T = {}",
            report.status,
            report.iterations(),
            fmt_f64(t)
        )),
        Err(e) => ctx.say(&format!("solve: {:?} ({e})", report.status)),
    }
    if ctx.finish().is_err() {
        return EXIT_CHECK_FAILED;
    }
    if converged {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}

/// `global`: two-stage pipeline, candidate table plus best trajectory.
pub fn cmd_global(mut ctx: RunContext, prep: &Prepared) -> i32 {
    let clock = Instant::now();
    let field = &prep.scenario.wind;
    let v_bar = prep.scenario.airspeed;
    let result = match global_optimize(
        field,
        v_bar,
        prep.scenario.x_o,
        prep.scenario.x_d,
        &prep.domain,
        prep.graph_h,
        prep.graph_ell,
        prep.graph_k,
        prep.scenario.n,
        &prep.solve_options,
    ) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("global stage failed: {e}");
            return EXIT_SOLVER;
        }
    };
    ctx.add_timing("global", clock);

    ctx.add_file("candidates.csv", result.to_csv());
    ctx.add_file(
        "graph_stats.json",
        serde_json::to_vec_pretty(&result.stats).expect("stats serialize"),
    );
    let best = result.best();
    let ok = best
        .refined
        .as_ref()
        .is_some_and(|r| r.status == SolveStatus::Converged);
    if let Some(r) = &best.refined {
        ctx.say(&format!(
            "global: best of {} candidates: T = {} ({:?})",
            result.ranked.len(),
            fmt_f64(r.t),
            r.status
        ));
    }
    if let Some(state) = best.refined.as_ref().and_then(|r| r.state.as_ref()) {
        trajectory_files(&mut ctx, "best_trajectory", state);
    }
    if ctx.finish().is_err() {
        return EXIT_CHECK_FAILED;
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}

/// `verify`: field-derivative finite differences, kernel-derivative finite
/// differences, and the randomized bound-violation search.
pub fn cmd_verify(mut ctx: RunContext, prep: &Prepared) -> i32 {
    let field = &prep.scenario.wind;
    let v_bar = prep.scenario.airspeed;
    let seed = ctx.seed;

    let clock = Instant::now();
    let field_report = verify_field(field, 200, seed);
    ctx.add_timing("verify_field", clock);

    // Kernel derivatives against finite differences at random samples in
    // the flight domain.
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = [0.0f64; 3];
    let (lo, hi) = prep.domain.bounding_box();
    let mut sampled = 0;
    while sampled < 200 {
        let x = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if !prep.domain.contains(x) {
            continue;
        }
        sampled += 1;
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let mag = prep.l_tilde * rng.gen_range(0.3..1.5);
        let v = Vec2::new(ang.cos(), ang.sin()) * mag;
        let Ok(k) = PointwiseKernel::new(field, x, v, v_bar) else {
            continue;
        };
        let d = (
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        let e = (
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        let rel = |a: f64, b: f64, floor: f64| (a - b).abs() / a.abs().max(b.abs()).max(floor);
        let f_scale = kernel_f(&k).f.abs();
        let f_at = |t: f64| {
            kernel_f(&PointwiseKernel::new(field, x + d.0 * t, v + d.1 * t, v_bar).unwrap()).f
        };
        let h = 1e-6 * prep.l_tilde.max(1.0);
        worst[0] = worst[0].max(rel(
            kernel_d1(&k, d),
            (f_at(h) - f_at(-h)) / (2.0 * h),
            3e-3 * f_scale,
        ));
        let d1_at = |t: f64| {
            let kk = PointwiseKernel::new(field, x + e.0 * t, v + e.1 * t, v_bar).unwrap();
            kernel_d1(&kk, d)
        };
        worst[1] = worst[1].max(rel(
            kernel_d2(&k, d, e),
            (d1_at(h) - d1_at(-h)) / (2.0 * h),
            1e-2 * f_scale,
        ));
        let h3 = 1e-3 * prep.l_tilde.max(1.0);
        let d2_at = |t: f64| {
            let kk = PointwiseKernel::new(field, x + e.0 * t, v + e.1 * t, v_bar).unwrap();
            kernel_d2(&kk, d, d)
        };
        worst[2] = worst[2].max(rel(
            kernel_d3(&k, d, e, 1e-9 * prep.l_tilde).unwrap(),
            (d2_at(h3) - d2_at(-h3)) / (2.0 * h3),
            1e-1 * f_scale,
        ));
    }
    let kernel_pass = worst[0] <= 1e-7 && worst[1] <= 1e-5 && worst[2] <= 1e-3;
    ctx.add_timing("kernel_fd", clock);

    // Bound violations around the scenario's refined optimum.
    let clock = Instant::now();
    let start = straight_line(prep.scenario.x_o, prep.scenario.x_d, prep.scenario.n)
        .expect("endpoints validated");
    let report = solve(
        &KKTIterate::feasible_start(start),
        field,
        v_bar,
        &prep.solve_options,
    );
    let violations = if report.converged() {
        let chi = &report.final_iterate;
        let u = (prep.scenario.x_d - prep.scenario.x_o) / prep.l_tilde;
        let c = (0..chi.z.n_intervals())
            .map(|i| chi.z.path().velocity(i).dot(u))
            .fold(f64::INFINITY, f64::min);
        match estimate_coercivity(chi, field, v_bar) {
            Ok(b_lower) if b_lower > 0.0 && c > 0.0 => {
                let r = default_radius(&prep.wind_bounds, v_bar, prep.l_tilde, b_lower);
                compute_constants(&prep.wind_bounds, v_bar, prep.l_tilde, r, b_lower, u, c)
                    .ok()
                    .and_then(|bs| {
                        violation_search(&bs, chi, field, v_bar, &prep.domain, 30_000, seed).ok()
                    })
            }
            _ => None,
        }
    } else {
        None
    };
    ctx.add_timing("violation_search", clock);

    let bounds_pass = violations.as_ref().map(|v| v.pass());
    let all_pass = field_report.pass && kernel_pass && bounds_pass.unwrap_or(false);
    let doc = serde_json::json!({
        "field_fd": field_report,
        "kernel_fd": {
            "samples": sampled,
            "worst_rel_err": worst,
            "tolerances": [1e-7, 1e-5, 1e-3],
            "pass": kernel_pass,
        },
        "bound_violations": violations,
        "pass": all_pass,
    });
    ctx.add_file(
        "verify_report.json",
        serde_json::to_vec_pretty(&doc).expect("report serializes"),
    );
    ctx.say(&format!(
        "verify: field fd {:?}, kernel fd {:?}, bounds {:?}",
        field_report.pass, kernel_pass, bounds_pass
    ));
    if ctx.finish().is_err() {
        return EXIT_CHECK_FAILED;
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// `bounds`: every theoretical constant at the scenario's optimum.
pub fn cmd_bounds(mut ctx: RunContext, prep: &Prepared) -> i32 {
    let field = &prep.scenario.wind;
    let v_bar = prep.scenario.airspeed;
    let clock = Instant::now();
    let start = straight_line(prep.scenario.x_o, prep.scenario.x_d, prep.scenario.n)
        .expect("endpoints validated");
    let report = solve(
        &KKTIterate::feasible_start(start),
        field,
        v_bar,
        &prep.solve_options,
    );
    if !report.converged() {
        eprintln!("bounds: refinement failed ({:?})", report.status);
        ctx.add_file("solve_report.csv", report.to_csv());
        let _ = ctx.finish();
        return EXIT_SOLVER;
    }
    let chi = &report.final_iterate;
    let u = (prep.scenario.x_d - prep.scenario.x_o) / prep.l_tilde;
    let c = (0..chi.z.n_intervals())
        .map(|i| chi.z.path().velocity(i).dot(u))
        .fold(f64::INFINITY, f64::min);
    let b_lower = match estimate_coercivity(chi, field, v_bar) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("bounds: coercivity estimate failed: {e}");
            return EXIT_SOLVER;
        }
    };
    let r = default_radius(&prep.wind_bounds, v_bar, prep.l_tilde, b_lower);
    let bs = match compute_constants(&prep.wind_bounds, v_bar, prep.l_tilde, r, b_lower, u, c) {
        Ok(bs) => bs,
        Err(e) => {
            eprintln!("bounds: {e}");
            return EXIT_SOLVER;
        }
    };
    ctx.add_timing("bounds", clock);
    ctx.add_file(
        "bounds.json",
        serde_json::to_vec_pretty(&bs.to_json(prep.wind_bounds.method)).expect("serializes"),
    );
    ctx.say(&format!(
        "bounds: kappa = {}, omega = {}, R_C = {} (binding: {})",
        fmt_f64(bs.kappa),
        fmt_f64(bs.omega),
        fmt_f64(bs.r_c),
        bs.binding_cap
    ));
    if bs.r_c < 1e-6 * prep.l_tilde {
        ctx.say("bounds: note: the certified radius is impractically small; the Lipschitz constant omega2 dominates");
    }
    if ctx.finish().is_err() {
        return EXIT_CHECK_FAILED;
    }
    EXIT_OK
}

/// `study`: contraction rates over a ladder of starting radii around the
/// scenario's optimum.
pub fn cmd_study(mut ctx: RunContext, prep: &Prepared) -> i32 {
    let field = &prep.scenario.wind;
    let v_bar = prep.scenario.airspeed;
    let n = prep.scenario.n;
    let clock = Instant::now();
    let start =
        straight_line(prep.scenario.x_o, prep.scenario.x_d, n).expect("endpoints validated");
    let reference = solve(
        &KKTIterate::feasible_start(start),
        field,
        v_bar,
        &prep.solve_options.clone().tightened(100.0),
    );
    if !reference.converged() {
        eprintln!("study: reference solve failed ({:?})", reference.status);
        return EXIT_SOLVER;
    }
    let chi_star = &reference.final_iterate;

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let radii: Vec<f64> = (0..12)
        .map(|i| prep.l_tilde * 10f64.powf(-3.5 + i as f64 * 3.2 / 11.0))
        .collect();
    let mut csv = String::from("start_radius,iterations,status,observed_ratio,in_basin\n");
    let mut r_empirical = 0.0f64;
    let mut unbroken = true;
    for r in &radii {
        let (status, iters, ratio, in_basin) =
            study_probe(chi_star, field, v_bar, prep, *r, &mut rng);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(*r),
            iters,
            status,
            fmt_f64(ratio),
            in_basin
        ));
        if unbroken && in_basin && ratio < 1.0 {
            r_empirical = *r;
        } else {
            unbroken = false;
        }
    }
    ctx.add_timing("study", clock);
    ctx.add_file("study.csv", csv);
    ctx.add_file(
        "study_summary.json",
        serde_json::to_vec_pretty(&serde_json::json!({
            "r_empirical": r_empirical,
            "radii": radii,
        }))
        .expect("serializes"),
    );
    ctx.say(&format!("study: R_empirical = {}", fmt_f64(r_empirical)));
    if ctx.finish().is_err() {
        return EXIT_CHECK_FAILED;
    }
    EXIT_OK
}

/// One study run: perturb the optimum by a random direction of Yinf size
/// `radius`, resolve, and measure the worst contraction ratio toward the
/// reference optimum.
fn study_probe(
    chi_star: &KKTIterate,
    field: &zermelo::windfield::WindField,
    v_bar: f64,
    prep: &Prepared,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> (String, usize, f64, bool) {
    let n = chi_star.z.n_intervals();
    // Random smooth direction plus L and multiplier shifts, scaled so the
    // Yinf norm of the perturbation equals the radius.
    let coef: Vec<(Vec2, usize)> = (1..=3)
        .map(|m| {
            (
                Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                m,
            )
        })
        .collect();
    let fieldp = |tau: f64| {
        coef.iter().fold(Vec2::ZERO, |acc, (c, m)| {
            acc + *c * (std::f64::consts::PI * *m as f64 * tau).sin()
        })
    };
    let mut dir = Direction {
        dl: rng.gen_range(-0.3..0.3),
        dnodes: (1..n).map(|i| fieldp(i as f64 / n as f64)).collect(),
    };
    let dlam: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let lam_inf = dlam.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let total = dir.norm_zinf() + lam_inf;
    let scale = radius / total.max(1e-300);
    dir = dir.scale(scale);
    let lambda = Multiplier {
        values: chi_star
            .lambda
            .values
            .iter()
            .zip(&dlam)
            .map(|(l, d)| l + d * scale)
            .collect(),
    };
    let start = KKTIterate::new(chi_star.z.offset(&dir), lambda);

    let report: SolveReport = solve(&start, field, v_bar, &prep.solve_options);
    let errs: Vec<f64> = report
        .snapshots
        .iter()
        .map(|s| y2_distance(s, chi_star))
        .collect();
    let mut ratio: f64 = 0.0;
    for w in errs.windows(2) {
        if w[0] > 1e-13 {
            ratio = ratio.max(w[1] / w[0]);
        }
    }
    let in_basin = report.converged()
        && errs
            .last()
            .map(|e| *e <= 1e-6 * prep.l_tilde)
            .unwrap_or(false);
    let status = serde_json::to_value(report.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    (status, report.iterations(), ratio, in_basin)
}
