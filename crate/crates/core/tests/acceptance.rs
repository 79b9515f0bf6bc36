//! End-to-end acceptance checks. Every test prints one `PASS` or `FAIL`
//! line before asserting, so `cargo test --test acceptance -- --nocapture`
//! gives a one-line-per-criterion report.

use std::time::{Duration, Instant};

use accel_kit::accel::{
    anderson_explicit_update, anderson_step, approx_inverse_jacobian, crop_explicit_update,
    crop_step_with_trial, solve, CropState, Depth, HistoryWindow, JacobianFlavor, Method,
    SolveOptions, SolveReport, SolveStatus, StepResidual,
};
use accel_kit::bench::{rfactor_sweep, ExperimentConfig};
use accel_kit::krylov::{cr_solve, gmres_solve, minimal_residual_solve, orthomin_solve};
use accel_kit::linalg::{norm2, qr_factor, sub, DenseMatrix, RANK_TOL};
use accel_kit::problems::{build_problem, Problem, ProblemSpec};
use accel_kit::rng::SplitMix64;

fn verdict(id: u32, title: &str, ok: bool, detail: &str, elapsed: Duration) {
    println!(
        "{} criterion {id}: {title} [{detail}; {:.3} s]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
}

fn opts(depth: Depth, tol: f64, maxit: usize) -> SolveOptions {
    SolveOptions {
        depth,
        tol,
        maxit,
        ..SolveOptions::default()
    }
}

fn random_linear(n: usize, seed: u64, symmetric: bool) -> Problem {
    build_problem(&ProblemSpec::LinearRandom {
        n,
        seed,
        shift: 2.0,
        symmetric,
    })
    .unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    norm2(&sub(a, b)) / norm2(b).max(f64::MIN_POSITIVE)
}

/// Largest gap between two residual traces over their common prefix,
/// measured relative to the initial residual `‖r₀‖`.
fn trace_gap(a: &[f64], b: &[f64]) -> f64 {
    let r0 = b[0];
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / r0)
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_anderson_iterates_equal_crop_anderson() {
    let t = Instant::now();
    let mut cases = vec![(
        build_problem(&ProblemSpec::SmallNonlinear).unwrap(),
        vec![0.1, 0.1],
    )];
    for seed in 0..10 {
        cases.push((random_linear(10, seed, false), vec![0.0; 10]));
    }
    let mut o = opts(Depth::Untruncated, 1e-10, 100);
    o.record_iterates = true;
    let mut worst = 0.0_f64;
    let mut compared = 0;
    for (p, x0) in &cases {
        let a = solve(p, x0, Method::Anderson, &o).unwrap();
        let c = solve(p, x0, Method::CropAnderson, &o).unwrap();
        let usable = if c.status == SolveStatus::Breakdown {
            c.iterates.len() - 1
        } else {
            c.iterates.len()
        };
        for (xa, xc) in a.iterates.iter().zip(&c.iterates).take(usable) {
            worst = worst.max(rel_diff(xc, xa));
            compared += 1;
        }
    }
    let elapsed = t.elapsed();
    verdict(
        1,
        "Anderson iterates equal CROP-Anderson trial iterates",
        worst <= 1e-8 && compared > cases.len() && elapsed < Duration::from_secs(1),
        &format!("{compared} iterates, worst relative gap {worst:.2e}"),
        elapsed,
    );
}

#[test]
fn criterion_02_crop_matches_gmres() {
    let t = Instant::now();
    let mut worst = 0.0_f64;
    let mut count_gap = 0usize;
    for seed in 0..10 {
        let p = random_linear(30, seed, false);
        let (a, b) = p.linear_parts().unwrap();
        let x0 = vec![0.0; 30];
        let crop = solve(&p, &x0, Method::Crop, &opts(Depth::Untruncated, 1e-10, 200)).unwrap();
        let (_, g) = gmres_solve(a, b, &x0, 1e-10, 200).unwrap();
        worst = worst.max(trace_gap(&crop.control_norms(), &g.residual_norms));
        count_gap = count_gap.max(crop.iterations.abs_diff(g.iterations()));
    }
    let elapsed = t.elapsed();
    verdict(
        2,
        "untruncated CROP residuals equal GMRES residuals",
        worst <= 1e-8 && count_gap <= 1 && elapsed < Duration::from_secs(5),
        &format!("worst gap {worst:.2e} of ||r0||, iteration count gap {count_gap}"),
        elapsed,
    );
}

#[test]
fn criterion_03_crop_matches_truncated_krylov() {
    let t = Instant::now();
    let tridiag = build_problem(&ProblemSpec::LinearTridiag { n: 100 }).unwrap();
    let nonsym = random_linear(30, 7, false);
    let sym = random_linear(30, 11, true);

    let crop_trace = |p: &Problem, m: usize| {
        let x0 = vec![0.0; p.dimension()];
        solve(p, &x0, Method::Crop, &opts(Depth::Finite(m), 1e-10, 300))
            .unwrap()
            .control_norms()
    };

    let mut orthomin_gap = 0.0_f64;
    for p in [&tridiag, &nonsym] {
        let (a, b) = p.linear_parts().unwrap();
        let x0 = vec![0.0; p.dimension()];
        for m in 1..=3 {
            let (_, om) = orthomin_solve(a, b, &x0, m - 1, 1e-10, 300).unwrap();
            orthomin_gap = orthomin_gap.max(trace_gap(&crop_trace(p, m), &om.residual_norms));
        }
    }

    let mut symmetric_gap = 0.0_f64;
    for p in [&tridiag, &sym] {
        let (a, b) = p.linear_parts().unwrap();
        let x0 = vec![0.0; p.dimension()];
        let (_, mr) = minimal_residual_solve(a, b, &x0, 1e-10, 300).unwrap();
        let (_, cr) = cr_solve(a, b, &x0, 1e-10, 300).unwrap();
        symmetric_gap = symmetric_gap.max(trace_gap(&crop_trace(p, 1), &mr.residual_norms));
        symmetric_gap = symmetric_gap.max(trace_gap(&crop_trace(p, 2), &cr.residual_norms));
    }
    let elapsed = t.elapsed();
    verdict(
        3,
        "CROP(m) matches ORTHOMIN(m-1), minimal residual and CR",
        orthomin_gap <= 1e-7 && symmetric_gap <= 1e-8 && elapsed < Duration::from_secs(5),
        &format!("ORTHOMIN gap {orthomin_gap:.2e}, MR/CR gap {symmetric_gap:.2e} of ||r0||"),
        elapsed,
    );
}

fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    let data: Vec<f64> = (0..n * n).map(|_| rng.normal()).collect();
    let g = DenseMatrix::from_col_major(n, n, data).unwrap();
    qr_factor(&g, RANK_TOL).unwrap().q
}

#[test]
fn criterion_04_q_linear_factor() {
    let t = Instant::now();
    let n = 20;
    let q = random_orthogonal(n, 404);
    let qtq = q.transpose().matmul(&q).sub(&DenseMatrix::identity(n));
    assert!(qtq.frobenius_norm() < 1e-12);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| f64::from(u8::from(i == j)) - 0.5 * q[(i, j)])
                .collect()
        })
        .collect();
    let b = SplitMix64::new(405).uniform_vec(n, -1.0, 1.0);
    let p = build_problem(&ProblemSpec::LinearCustom { a: rows, b }).unwrap();

    let mut worst_ratio = 0.0_f64;
    let mut worst_q = 0.0_f64;
    for depth in [
        Depth::Finite(1),
        Depth::Finite(2),
        Depth::Finite(3),
        Depth::Untruncated,
    ] {
        let r = solve(&p, &vec![0.0; n], Method::Crop, &opts(depth, 1e-10, 200)).unwrap();
        let norms = r.control_norms();
        for w in norms.windows(2) {
            worst_ratio = worst_ratio.max(w[1] / w[0]);
        }
        worst_q = worst_q.max(r.diagnostics.unwrap().q_factor_estimate);
    }
    let elapsed = t.elapsed();
    verdict(
        4,
        "CROP residual ratios bounded by ||I - A|| = 0.5",
        worst_ratio <= 0.5 * (1.0 + 1e-10) && worst_q <= 0.5,
        &format!("largest ratio {worst_ratio:.6}, q estimate {worst_q:.6}"),
        elapsed,
    );
}

fn suite() -> Vec<(Problem, Vec<f64>)> {
    let specs = [
        ProblemSpec::LinearTridiag { n: 100 },
        ProblemSpec::LinearSevendiag { n: 100 },
        ProblemSpec::LinearSmall2x2,
        ProblemSpec::LinearRandom {
            n: 30,
            seed: 5,
            shift: 2.0,
            symmetric: false,
        },
        ProblemSpec::DominantLinear { n: 100, mu: 0.01 },
        ProblemSpec::SmallNonlinear,
        ProblemSpec::Bratu {
            grid: 20,
            lambda: 0.5,
        },
        ProblemSpec::DelayNep {
            beta: 0.1,
            tau: 1.0,
            quad_nodes: 32,
        },
    ];
    specs
        .iter()
        .map(|s| {
            let p = build_problem(s).unwrap();
            let x0 = match s {
                ProblemSpec::SmallNonlinear => vec![0.1, 0.1],
                ProblemSpec::LinearSmall2x2 => vec![0.3, -0.2],
                ProblemSpec::DelayNep { .. } => vec![1.0; p.dimension()],
                _ => vec![0.0; p.dimension()],
            };
            (p, x0)
        })
        .collect()
}

#[test]
fn criterion_05_monotone_control_residuals() {
    let t = Instant::now();
    let mut worst = 0.0_f64;
    let mut where_ = String::new();
    for (p, x0) in suite() {
        for depth in [
            Depth::Finite(1),
            Depth::Finite(2),
            Depth::Finite(5),
            Depth::Untruncated,
        ] {
            let r = solve(&p, &x0, Method::Crop, &opts(depth, 1e-10, 100)).unwrap();
            for w in r.control_norms().windows(2) {
                let growth = (w[1] - w[0]) / w[0];
                if growth > worst {
                    worst = growth;
                    where_ = format!("{} m={depth}", p.label());
                }
            }
        }
    }
    verdict(
        5,
        "CROP control residuals never increase",
        worst <= 1e-12,
        &format!("largest relative increase {worst:.2e} {where_}"),
        t.elapsed(),
    );
}

fn check_count(
    label: &str,
    r: &SolveReport,
    target: usize,
    slack: usize,
    out: &mut Vec<String>,
) -> bool {
    let ok = r.status == SolveStatus::Converged && r.iterations.abs_diff(target) <= slack;
    out.push(format!("{label}: {} at {}", r.status.name(), r.iterations));
    ok
}

#[test]
fn criterion_06_small_nonlinear_regression() {
    let t = Instant::now();
    let p = build_problem(&ProblemSpec::SmallNonlinear).unwrap();
    let x0 = [0.1, 0.1];
    let run = |m: Method, d: Depth| solve(&p, &x0, m, &opts(d, 1e-10, 100)).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    ok &= check_count(
        "Anderson(1)",
        &run(Method::Anderson, Depth::Finite(1)),
        32,
        2,
        &mut notes,
    );
    ok &= check_count(
        "Anderson(2)",
        &run(Method::Anderson, Depth::Finite(2)),
        9,
        2,
        &mut notes,
    );
    ok &= check_count(
        "rCROP(1)",
        &run(Method::RCrop, Depth::Finite(1)),
        4,
        2,
        &mut notes,
    );
    ok &= check_count(
        "rCROP(2)",
        &run(Method::RCrop, Depth::Finite(2)),
        4,
        2,
        &mut notes,
    );
    for (label, d) in [
        ("CROP(inf)", Depth::Untruncated),
        ("CROP(2)", Depth::Finite(2)),
    ] {
        let r = run(Method::Crop, d);
        ok &= r.status == SolveStatus::Breakdown && r.iterations == 2;
        notes.push(format!("{label}: {} at {}", r.status.name(), r.iterations));
    }
    let elapsed = t.elapsed();
    verdict(
        6,
        "small nonlinear system iteration counts",
        ok && elapsed < Duration::from_secs(1),
        &notes.join(", "),
        elapsed,
    );
}

#[test]
fn criterion_07_dominant_linear_regression() {
    let t = Instant::now();
    let p = build_problem(&ProblemSpec::DominantLinear { n: 100, mu: 0.01 }).unwrap();
    let x0 = vec![0.0; 100];
    let cases = [
        (Depth::Untruncated, 6.28e-8, 18),
        (Depth::Finite(2), 9.56e-11, 19),
        (Depth::Finite(1), 5.19e-11, 32),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (depth, real, its) in cases {
        let r = solve(&p, &x0, Method::Crop, &opts(depth, 1e-10, 100)).unwrap();
        let real_ok = (real / 10.0..=real * 10.0).contains(&r.final_real_residual);
        ok &= r.status == SolveStatus::Converged && real_ok && r.iterations.abs_diff(its) <= 3;
        notes.push(format!(
            "CROP({depth}): {} at {}, real {:.3e}",
            r.status.name(),
            r.iterations,
            r.final_real_residual
        ));
    }
    let elapsed = t.elapsed();
    verdict(
        7,
        "weakly nonlinear problem real residual at control convergence",
        ok && elapsed < Duration::from_secs(2),
        &notes.join(", "),
        elapsed,
    );
}

#[test]
fn criterion_08_linear_control_residual_identities() {
    let t = Instant::now();
    let problems = [
        build_problem(&ProblemSpec::LinearTridiag { n: 100 }).unwrap(),
        build_problem(&ProblemSpec::LinearSevendiag { n: 100 }).unwrap(),
        random_linear(30, 3, false),
        random_linear(30, 4, true),
    ];
    let mut worst_control = 0.0_f64;
    let mut worst_trial = 0.0_f64;
    for p in &problems {
        let (a, b) = p.linear_parts().unwrap();
        let n = p.dimension();
        let b_norm = norm2(b);
        let x0 = vec![0.0; n];
        for depth in [
            Depth::Finite(1),
            Depth::Finite(2),
            Depth::Finite(3),
            Depth::Untruncated,
        ] {
            let mut state = CropState::new(p, x0.clone(), depth, 1.0);
            for _ in 0..100 {
                let (x_c, f_c) = state.current();
                if norm2(f_c) < 1e-10 {
                    break;
                }
                let real: Vec<f64> = sub(b, &a.apply(x_c));
                worst_control = worst_control.max(norm2(&sub(f_c, &real)) / b_norm);
                // (I − A)·f_C
                let expected = sub(f_c, &a.apply(f_c));
                let (x_t, f_t) = state.trial(p);
                worst_trial = worst_trial.max(norm2(&sub(&f_t, &expected)));
                state
                    .step_with_trial(p, x_t, f_t, StepResidual::Control)
                    .unwrap();
            }
        }
    }
    verdict(
        8,
        "linear control residual equals b - A x_C and trial residual equals (I - A) f_C",
        worst_control <= 1e-10 && worst_trial <= 1e-10,
        &format!("control gap {worst_control:.2e} of ||b||, trial gap {worst_trial:.2e}"),
        t.elapsed(),
    );
}

#[test]
fn criterion_09_bratu() {
    let t = Instant::now();
    let p = build_problem(&ProblemSpec::Bratu {
        grid: 100,
        lambda: 0.5,
    })
    .unwrap();
    let x0 = vec![0.0; p.dimension()];
    let o = opts(Depth::Finite(2), 1e-10, 400);
    let anderson = solve(&p, &x0, Method::Anderson, &o).unwrap();
    let crop = solve(&p, &x0, Method::Crop, &o).unwrap();
    let rcrop = solve(&p, &x0, Method::RCrop, &o).unwrap();
    let all_converged = [&anderson, &crop, &rcrop]
        .iter()
        .all(|r| r.status == SolveStatus::Converged);
    let gap = (crop.final_real_residual - rcrop.final_real_residual).abs();
    let elapsed = t.elapsed();
    let detail = [
        ("Anderson(2)", &anderson),
        ("CROP(2)", &crop),
        ("rCROP(2)", &rcrop),
    ]
    .iter()
    .map(|(l, r)| {
        format!(
            "{l}: {} at {}, real {:.3e}",
            r.status.name(),
            r.iterations,
            r.final_real_residual
        )
    })
    .collect::<Vec<_>>()
    .join(", ");
    verdict(
        9,
        "Bratu problem on a 100x100 grid",
        all_converged && gap <= 1e-6 && elapsed < Duration::from_secs(60),
        &format!("{detail}, CROP/rCROP gap {gap:.2e}"),
        elapsed,
    );
}

#[test]
fn criterion_10_delay_eigenproblem() {
    let t = Instant::now();
    let p = build_problem(&ProblemSpec::DelayNep {
        beta: 0.1,
        tau: 1.0,
        quad_nodes: 32,
    })
    .unwrap();
    let x0 = vec![1.0; p.dimension()];
    let crop = solve(&p, &x0, Method::Crop, &opts(Depth::Untruncated, 1e-10, 100)).unwrap();
    let rcrop = solve(&p, &x0, Method::RCrop, &opts(Depth::Finite(3), 1e-10, 100)).unwrap();
    let rca = solve(
        &p,
        &x0,
        Method::RCropAnderson,
        &opts(Depth::Finite(5), 1e-10, 100),
    )
    .unwrap();
    let ok = crop.status == SolveStatus::Breakdown
        && crop.iterations == 4
        && rcrop.status == SolveStatus::Converged
        && rca.status == SolveStatus::Converged;
    let elapsed = t.elapsed();
    verdict(
        10,
        "delay eigenproblem: control breakdown, real-residual variants converge",
        ok && elapsed < Duration::from_secs(5),
        &format!(
            "CROP(inf): {} at {} (real {:.3e}), rCROP(3): {} at {} (real {:.3e}), rCROP-Anderson(5): {} at {}",
            crop.status.name(),
            crop.iterations,
            crop.final_real_residual,
            rcrop.status.name(),
            rcrop.iterations,
            rcrop.final_real_residual,
            rca.status.name(),
            rca.iterations
        ),
        elapsed,
    );
}

#[test]
fn criterion_11_fixed_point_rfactor_sweep() {
    let t = Instant::now();
    let cfg = ExperimentConfig::from_json(
        r#"{
            "problem": {"kind": "linear_small2x2"},
            "methods": [{"method": "fixed_point"}],
            "tol": 1e-16,
            "maxit": 100,
            "sweep": {"angle_samples": 64, "seed": 2024, "low": -0.5, "high": 0.5}
        }"#,
    )
    .unwrap();
    let out = rfactor_sweep(&cfg, None).unwrap();
    assert_eq!(out.rows.len(), 64);
    let checked: Vec<_> = out.rows.iter().filter(|r| r.angle.abs() > 0.05).collect();
    let bad: Vec<_> = checked
        .iter()
        .filter(|r| (r.r_factor - 2.0 / 3.0).abs() > 0.01)
        .collect();
    let worst = checked
        .iter()
        .map(|r| (r.r_factor - 2.0 / 3.0).abs())
        .fold(0.0, f64::max);
    let bad_angles = bad
        .iter()
        .map(|r| format!("{:.3}", r.angle))
        .collect::<Vec<_>>()
        .join(" ");
    verdict(
        11,
        "fixed-point r-factor equals 2/3 away from the e1 direction",
        bad.is_empty(),
        &format!(
            "{} of {} angles off by more than 0.01 (worst {worst:.3}); angles: {bad_angles}",
            bad.len(),
            checked.len()
        ),
        t.elapsed(),
    );
}

fn random_window(rng: &mut SplitMix64, n: usize, len: usize) -> HistoryWindow {
    let mut w = HistoryWindow::new(Depth::Untruncated);
    for _ in 0..len {
        w.push(rng.uniform_vec(n, -1.0, 1.0), rng.uniform_vec(n, -1.0, 1.0));
    }
    w
}

#[test]
fn criterion_12_explicit_and_multisecant_forms() {
    let t = Instant::now();
    let dummy = build_problem(&ProblemSpec::LinearTridiag { n: 8 }).unwrap();
    let mut rng = SplitMix64::new(1212);
    let (mut anderson_gap, mut crop_gap, mut jacobian_gap) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..100 {
        let n = 8;
        let len = 2 + i % 5;
        let beta = rng.uniform(0.2, 1.5);

        let w = random_window(&mut rng, n, len);
        let qr_path = anderson_step(&w, beta).unwrap().x_next;
        let explicit = anderson_explicit_update(&w, beta).unwrap();
        anderson_gap = anderson_gap.max(rel_diff(&explicit, &qr_path));

        // CROP: stored window plus a trial pair.
        let stored = random_window(&mut rng, n, len - 1);
        let x_t = rng.uniform_vec(n, -1.0, 1.0);
        let f_t = rng.uniform_vec(n, -1.0, 1.0);
        let step = crop_step_with_trial(
            &stored,
            x_t.clone(),
            f_t.clone(),
            StepResidual::Control,
            &dummy,
        )
        .unwrap();
        let mut full = stored.clone();
        full.push(x_t.clone(), f_t.clone());
        let explicit = crop_explicit_update(&full).unwrap();
        crop_gap = crop_gap.max(rel_diff(&explicit, &step.x_next));

        let g = approx_inverse_jacobian(&full, JacobianFlavor::Crop).unwrap();
        let via_jacobian = sub(&x_t, &g.matvec(&f_t));
        jacobian_gap = jacobian_gap.max(rel_diff(&via_jacobian, &step.x_next));
    }
    verdict(
        12,
        "least-squares updates equal explicit pseudoinverse and multisecant forms",
        anderson_gap <= 1e-9 && crop_gap <= 1e-9 && jacobian_gap <= 1e-9,
        &format!(
            "Anderson gap {anderson_gap:.2e}, CROP gap {crop_gap:.2e}, inverse Jacobian gap {jacobian_gap:.2e}"
        ),
        t.elapsed(),
    );
}
