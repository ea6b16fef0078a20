//! End-to-end acceptance gate.
//!
//! Eight criteria cover the crate's public guarantees: the laminar depth
//! anchors, exactness of the trivial family, certified residual orders,
//! agreement between the closed forms and the finite-difference oracle,
//! reconstruction of the third-order forcing, the irrotational limit,
//! physical field properties at calibrated amplitude, and qualitative
//! parameter trends. Every criterion prints one PASS/FAIL line (visible
//! with `cargo test --test acceptance -- --nocapture`); the test fails if
//! any criterion fails or overruns its runtime budget.

use std::any::Any;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shearwaves::calibrate::{select_b, select_btilde};
use shearwaves::coeffs::{
    btilde_surface_gain, second_order_coeffs, second_order_forcing, third_order_coeffs,
};
use shearwaves::expansion::{first_order_term, second_order_term, third_order_term, Expansion};
use shearwaves::fields::{
    curvature_transition, flow_field_grid, pressure, streamline, surface_profile, velocity,
};
use shearwaves::laminar::{FlowParams, LaminarState};
use shearwaves::oracle::{
    extract_b_coefficient, interior_b3_forcing, measure_solvability_defect, solve_mode_bvp,
    surface_b3_robin, uniform_p_nodes, ModeBvp, OperatorKind,
};
use shearwaves::residual::{fit_residual_order, residual_norms, Grid, DEFAULT_B_LADDER};

const G: f64 = 9.8;
const P0: f64 = -2.0;

fn state(gamma: f64) -> LaminarState<f64> {
    let params = FlowParams::new(gamma, P0, G).unwrap();
    LaminarState::from_params(params).unwrap()
}

fn default_grid() -> Grid<f64> {
    Grid::new(256, 128, P0).unwrap()
}

/// Least-squares slope of ln(y) against ln(b).
fn loglog_slope(bs: &[f64], ys: &[f64]) -> f64 {
    let n = bs.len() as f64;
    let xs: Vec<f64> = bs.iter().map(|b| b.ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ls.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Max |got − want| over the slices, relative to max |want|.
fn rel_max_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let worst = got.iter().zip(want).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    worst / scale
}

/// Splits samples at q = 0 and q = π/3 into cos q and cos 3q coefficients.
fn cos1_cos3(at_zero: f64, at_third: f64) -> (f64, f64) {
    let k3 = (0.5 * at_zero - at_third) / 1.5;
    (at_zero - k3, k3)
}

/// Depth of the bifurcating laminar flow hits the two reference anchors.
fn depth_anchors() -> (bool, String) {
    let cases = [(-1.5, 0.80072, 5e-4), (1.5, 0.758042, 5e-5)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (gamma, want, tol) in cases {
        let depth = state(gamma).laminar_height(0.0);
        let err = (depth - want as f64).abs();
        ok &= err <= tol;
        parts.push(format!("γ={gamma}: depth {depth:.7} vs {want} (err {err:.1e}, tol {tol:.0e})"));
    }
    (ok, parts.join("; "))
}

/// Every admissible laminar flow satisfies the governing equations to
/// rounding, with its own hydraulic head in the surface condition.
fn laminar_exactness() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a);
    let grid = default_grid();
    let mut worst_interior = 0.0f64;
    let mut worst_boundary = 0.0f64;
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 && attempts < 200 {
        attempts += 1;
        let gamma: f64 = rng.gen_range(-4.5..3.0);
        let params = FlowParams::new(gamma, P0, G).unwrap();
        let floor = params.lambda_floor();
        let lambda = rng.gen_range((floor + 0.5)..(floor + 30.0));
        let st = match LaminarState::with_lambda(params, lambda) {
            Ok(st) => st,
            Err(_) => continue, // singular-locus draw
        };
        let e = Expansion::new(st, 1, 0.0, 0.0).unwrap();
        let rep = residual_norms(&e, &grid);
        worst_interior = worst_interior.max(rep.max_interior);
        worst_boundary = worst_boundary.max(rep.max_surface).max(rep.max_bed);
        checked += 1;
    }
    let ok = checked == 20 && worst_interior <= 1e-10 && worst_boundary <= 1e-10;
    (
        ok,
        format!(
            "{checked} random (γ, λ) states: max interior residual {worst_interior:.2e}, \
             max boundary residual {worst_boundary:.2e} (bound 1e-10)"
        ),
    )
}

/// Residual norms scale as the first dropped power of b, and the surviving
/// third-order surface content is the solvability constant.
fn residual_order_certification() -> (bool, String) {
    let grid = default_grid();
    let mut ok = true;
    let mut slope_notes = Vec::new();
    let mut worst_coef_rel = 0.0f64;
    for gamma in [-4.5, -1.5, 0.0, 1.5, 3.0] {
        let st = state(gamma);
        for order in 1..=3usize {
            let fit = fit_residual_order(&st, order, 0.0, &DEFAULT_B_LADDER, &grid).unwrap();
            let (want_int, tol_int) = match order {
                1 => (2.0, 0.1),
                2 => (3.0, 0.1),
                _ => (4.0, 0.15),
            };
            let (want_sur, tol_sur) = match order {
                1 => (2.0, 0.1),
                2 => (3.0, 0.1),
                _ => (3.0, 0.1),
            };
            let int_ok = (fit.interior.slope - want_int).abs() <= tol_int;
            let sur_ok = (fit.surface.slope - want_sur).abs() <= tol_sur;
            if !(int_ok && sur_ok) {
                slope_notes.push(format!(
                    "γ={gamma} order {order}: interior {:.3} (want {want_int}±{tol_int}), \
                     surface {:.3} (want {want_sur}±{tol_sur})",
                    fit.interior.slope, fit.surface.slope
                ));
            }
            ok &= int_ok && sur_ok;
        }
        // The b³ cos q coefficient of the order-3 surface residual (with the
        // auxiliary parameter off) is minus the solvability constant.
        let c0 = extract_b_coefficient(&st, 3, 0.0, OperatorKind::Surface, 3, 0.0, 0.0).unwrap();
        let c3 =
            extract_b_coefficient(&st, 3, 0.0, OperatorKind::Surface, 3, PI / 3.0, 0.0).unwrap();
        let (k1, _) = cos1_cos3(c0.value, c3.value);
        let btilde0 = third_order_coeffs(&st).unwrap().btilde0;
        let rel = (k1 + btilde0).abs() / btilde0.abs();
        worst_coef_rel = worst_coef_rel.max(rel);
        ok &= rel <= 0.01 && c0.well_conditioned && c3.well_conditioned;
    }
    let slopes = if slope_notes.is_empty() {
        "all slopes within tolerance".to_string()
    } else {
        slope_notes.join("; ")
    };
    (
        ok,
        format!(
            "five vorticities, orders 1–3: {slopes}; surface b³cos q coefficient matches the \
             solvability constant to {worst_coef_rel:.2e} relative (bound 1e-2)"
        ),
    )
}

/// The finite-difference oracle reproduces the closed second-order mode
/// profiles and converges at second order.
fn oracle_equivalence() -> (bool, String) {
    let mut ok = true;
    let mut worst_err = 0.0f64;
    let mut ratio_lo = f64::INFINITY;
    let mut ratio_hi = 0.0f64;
    for gamma in [-1.5, 0.0, 1.5] {
        let st = state(gamma);
        let c2 = second_order_coeffs(&st).unwrap();
        let forcing = second_order_forcing(&st).unwrap();
        let closed_mode = |n: usize, nodes: &[f64]| -> Vec<f64> {
            nodes
                .iter()
                .map(|&p| {
                    let t0 = second_order_term(&st, &c2, 0.0, p);
                    let th = second_order_term(&st, &c2, PI / 2.0, p);
                    if n == 0 {
                        0.5 * (t0 + th)
                    } else {
                        0.5 * (t0 - th)
                    }
                })
                .collect()
        };
        for n in [0usize, 2] {
            let robin = if n == 0 { forcing.g0 } else { forcing.g2 };
            let mut errs = Vec::new();
            for np in [4096usize, 1025, 2049] {
                let nodes = uniform_p_nodes(P0, np);
                let f: Vec<f64> = nodes
                    .iter()
                    .map(|&p| if n == 0 { forcing.f0(p) } else { forcing.f2(p) })
                    .collect();
                let sol = solve_mode_bvp(&st, &ModeBvp::new(n, f, robin).unwrap()).unwrap();
                errs.push(rel_max_err(&sol, &closed_mode(n, &nodes)));
            }
            worst_err = worst_err.max(errs[0]);
            ok &= errs[0] <= 1e-6;
            let ratio = errs[1] / errs[2];
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
            ok &= (3.7..=4.3).contains(&ratio);
        }
    }
    (
        ok,
        format!(
            "modes 0 and 2 at three vorticities: worst relative error {worst_err:.2e} at 4096 \
             nodes (bound 1e-6); halving ratios in [{ratio_lo:.2}, {ratio_hi:.2}] (want 4±0.3)"
        ),
    )
}

/// The numerically reconstructed third-order forcing drives the oracle to
/// the closed cos 3q profile, and the cos q problem exhibits the predicted
/// solvability defect.
fn forcing_reconstruction() -> (bool, String) {
    let mut ok = true;
    let mut worst_profile = 0.0f64;
    let mut worst_defect = 0.0f64;
    for gamma in [-4.5, -1.5, 0.0, 1.5, 3.0] {
        let st = state(gamma);
        let c3 = third_order_coeffs(&st).unwrap();
        let fine_nodes = uniform_p_nodes(P0, 4097);
        let (_, f3_fine) = interior_b3_forcing(&st, &fine_nodes).unwrap();
        let (_, g3) = surface_b3_robin(&st).unwrap();
        let fd_fine = solve_mode_bvp(&st, &ModeBvp::new(3, f3_fine.clone(), g3).unwrap()).unwrap();
        let f3_coarse: Vec<f64> = f3_fine.iter().copied().step_by(2).collect();
        let fd_coarse = solve_mode_bvp(&st, &ModeBvp::new(3, f3_coarse, g3).unwrap()).unwrap();
        let coarse_nodes = uniform_p_nodes(P0, 2049);
        let rich: Vec<f64> = (0..coarse_nodes.len())
            .map(|j| (4.0 * fd_fine[2 * j] - fd_coarse[j]) / 3.0)
            .collect();
        let closed: Vec<f64> = coarse_nodes
            .iter()
            .map(|&p| {
                let t0 = third_order_term(&st, &c3, 0.0, 0.0, p);
                let th = third_order_term(&st, &c3, 0.0, PI / 3.0, p);
                (0.5 * t0 - th) / 1.5
            })
            .collect();
        let err = rel_max_err(&rich, &closed);
        worst_profile = worst_profile.max(err);
        ok &= err <= 1e-5;

        let defect = measure_solvability_defect(&st, 0.0, 4097).unwrap();
        let rel = (defect + c3.btilde0).abs() / c3.btilde0.abs();
        worst_defect = worst_defect.max(rel);
        ok &= rel <= 0.01;
    }
    (
        ok,
        format!(
            "five vorticities: cos 3q profile from reconstructed forcing matches the closed \
             form to {worst_profile:.2e} relative (bound 1e-5); cos q solvability defect \
             matches the annihilation constant to {worst_defect:.2e} relative (bound 1e-2)"
        ),
    )
}

/// The rotational closed forms degenerate to the irrotational ones as the
/// vorticity vanishes.
fn irrotational_limit() -> (bool, String) {
    let s0 = state(0.0);
    let c2_0 = second_order_coeffs(&s0).unwrap();
    let c3_0 = third_order_coeffs(&s0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11b1);
    let mut worst = 0.0f64;
    for eps in [1e-7, -1e-7] {
        let se = state(eps);
        let c2_e = second_order_coeffs(&se).unwrap();
        let c3_e = third_order_coeffs(&se).unwrap();
        for _ in 0..100 {
            let q = rng.gen_range(-PI..PI);
            let p = rng.gen_range(P0..0.0);
            let pairs = [
                (se.laminar_height(p), s0.laminar_height(p)),
                (first_order_term(&se, q, p), first_order_term(&s0, q, p)),
                (
                    second_order_term(&se, &c2_e, q, p),
                    second_order_term(&s0, &c2_0, q, p),
                ),
                (
                    third_order_term(&se, &c3_e, 0.0, q, p),
                    third_order_term(&s0, &c3_0, 0.0, q, p),
                ),
            ];
            for (got, want) in pairs {
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }
    (
        worst <= 1e-5,
        format!(
            "closed forms at |γ| = 1e-7 vs the γ = 0 path: worst relative deviation \
             {worst:.2e} over 200 random strip points (bound 1e-5)"
        ),
    )
}

/// Physical fields at calibrated amplitude behave like water waves: zero
/// mean elevation, symmetric vertical velocity, no stagnation, pressure
/// maximal beneath the crest, nested streamlines, and a surface pressure
/// one order smaller than the truncation.
fn field_properties() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for gamma in [-1.5, 1.5] {
        let st = state(gamma);
        let cal = select_b(&st, 2, 1e-3).unwrap();
        let e2 = Expansion::new(st, 2, cal.b, 0.0).unwrap();

        let prof = surface_profile(&e2, 512).unwrap();
        let mean = prof.eta.iter().sum::<f64>() / prof.eta.len() as f64;
        ok &= mean.abs() <= 1e-12;

        // Vertical velocity vanishes on the bed and under crest and trough.
        let mut worst_v = 0.0f64;
        for i in 0..=16 {
            let q = -PI + 2.0 * PI * (i as f64) / 16.0;
            let (_, v) = velocity(&e2, q, P0).unwrap();
            worst_v = worst_v.max(v.abs());
        }
        for q in [0.0, PI, -PI] {
            for j in 0..=8 {
                let p = P0 * (1.0 - (j as f64) / 8.0);
                let (_, v) = velocity(&e2, q, p).unwrap();
                worst_v = worst_v.max(v.abs());
            }
        }
        ok &= worst_v <= 1e-12;

        // No stagnation: the wave outruns every fluid particle.
        let field = flow_field_grid(&e2, &default_grid()).unwrap();
        let min_cu = field
            .rel_horizontal
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        ok &= min_cu > 0.0;

        // Bottom pressure peaks beneath the crest.
        let bed: Vec<f64> = (0..=128)
            .map(|i| pressure(&e2, -PI + 2.0 * PI * (i as f64) / 128.0, P0).unwrap())
            .collect();
        let at_crest = bed[64];
        ok &= bed.iter().enumerate().all(|(i, &v)| i == 64 || v <= at_crest);
        ok &= at_crest > bed[0];

        // Streamlines are nested between bed and surface.
        let lines: Vec<_> = [P0, -1.5, -1.0, -0.5, 0.0]
            .iter()
            .map(|&l| streamline(&e2, l, 64).unwrap())
            .collect();
        for pair in lines.windows(2) {
            ok &= pair[0]
                .heights
                .iter()
                .zip(&pair[1].heights)
                .all(|(lower, upper)| lower < upper);
        }

        // Surface pressure decays one power of b faster than the expansion
        // order; the third order needs the annihilating auxiliary parameter.
        let c3 = third_order_coeffs(&st).unwrap();
        let btilde_star = c3.btilde0 / btilde_surface_gain(&st);
        let mut slopes = Vec::new();
        for order in 1..=3usize {
            let btilde = if order == 3 { btilde_star } else { 0.0 };
            let maxima: Vec<f64> = DEFAULT_B_LADDER
                .iter()
                .map(|&b| {
                    let e = Expansion::new(st, order, b, btilde).unwrap();
                    (0..64)
                        .map(|i| {
                            let q = -PI + 2.0 * PI * (i as f64) / 64.0;
                            pressure(&e, q, 0.0).unwrap().abs()
                        })
                        .fold(0.0f64, f64::max)
                })
                .collect();
            let slope = loglog_slope(&DEFAULT_B_LADDER, &maxima);
            ok &= (slope - (order as f64 + 1.0)).abs() <= 0.15;
            slopes.push(format!("{slope:.2}"));
        }
        notes.push(format!(
            "γ={gamma}: b={:.4}, mean elevation {mean:.1e}, max |v| on symmetry lines \
             {worst_v:.1e}, min relative flow {min_cu:.3}, surface-pressure slopes [{}]",
            cal.b,
            slopes.join(", ")
        ));
    }
    (ok, notes.join("; "))
}

/// Calibrated amplitude and the inter-order gaps follow the qualitative
/// trends of the approximation: amplitude peaks at moderate negative
/// vorticity, successive orders agree better at strong vorticity, and the
/// third order moves the inflection curve without moving the wave height.
fn parameter_trends() -> (bool, String) {
    let mut ok = true;

    // At the five reference vorticities, the calibrated amplitude rises
    // from strong negative vorticity to its moderate-negative peak and
    // falls monotonically across the positive range; the first-order
    // calibration sits below the second-order one, and the wave-height gap
    // between the two orders closes at both ends of the range, where the
    // waves themselves are small.
    let gs = [-4.5, -1.5, 0.0, 1.5, 3.0];
    let mut b2s = Vec::new();
    let mut gaps = Vec::new();
    for &gamma in &gs {
        let st = state(gamma);
        let b1 = select_b(&st, 1, 1e-3).unwrap().b;
        let b2 = select_b(&st, 2, 1e-3).unwrap().b;
        let h1 = surface_profile(&Expansion::new(st, 1, b1, 0.0).unwrap(), 256)
            .unwrap()
            .height;
        let h2 = surface_profile(&Expansion::new(st, 2, b2, 0.0).unwrap(), 256)
            .unwrap()
            .height;
        ok &= b1 < b2;
        b2s.push(b2);
        gaps.push((h1 - h2).abs());
    }
    ok &= b2s[0] < b2s[1];
    ok &= b2s[1] > b2s[2] && b2s[2] > b2s[3] && b2s[3] > b2s[4];
    ok &= gaps[0].max(gaps[4]) < gaps[1].min(gaps[2]);

    let st = state(1.5);
    let b = select_b(&st, 2, 1e-3).unwrap().b;
    let btilde = select_btilde(&st, b).unwrap().btilde;
    let e2 = Expansion::new(st, 2, b, 0.0).unwrap();
    let e3 = Expansion::new(st, 3, b, btilde).unwrap();
    let h2 = surface_profile(&e2, 256).unwrap().height;
    let h3 = surface_profile(&e3, 256).unwrap().height;
    let height_shift = (h3 - h2).abs() / h2;
    ok &= height_shift < 0.05;
    let roots2 = curvature_transition(&e2, 9).unwrap()[4].roots.clone();
    let roots3 = curvature_transition(&e3, 9).unwrap()[4].roots.clone();
    ok &= roots2.len() == 1 && roots3.len() == 1;
    let root_shift = if roots2.len() == 1 && roots3.len() == 1 {
        (roots3[0] - roots2[0]).abs()
    } else {
        0.0
    };
    ok &= root_shift > 1e-6;

    (
        ok,
        format!(
            "calibrated b at γ = (−4.5, −1.5, 0, 1.5, 3): [{}]; order-1/2 height gaps: [{}]; \
             order-2/3 height shift {height_shift:.2e} with mid-depth inflection shift \
             {root_shift:.2e} rad",
            b2s.iter()
                .map(|b| format!("{b:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            gaps.iter()
                .map(|g| format!("{g:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn panic_text(payload: &(dyn Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, Option<f64>, fn() -> (bool, String)); 8] = [
        ("laminar depth anchors", Some(1.0), depth_anchors),
        ("laminar family exactness", Some(5.0), laminar_exactness),
        ("residual order certification", Some(60.0), residual_order_certification),
        ("finite-difference oracle equivalence", Some(30.0), oracle_equivalence),
        ("third-order forcing reconstruction", None, forcing_reconstruction),
        ("irrotational limit consistency", None, irrotational_limit),
        ("calibrated field properties", Some(10.0), field_properties),
        ("qualitative parameter trends", None, parameter_trends),
    ];

    let mut failures = Vec::new();
    for (name, budget, body) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body));
        let seconds = start.elapsed().as_secs_f64();
        let (mut passed, detail) = match outcome {
            Ok(pair) => pair,
            Err(payload) => (false, format!("panicked: {}", panic_text(&*payload))),
        };
        let timing = match budget {
            Some(limit) => {
                if seconds > limit {
                    passed = false;
                }
                format!("{seconds:.2}s, budget {limit:.0}s")
            }
            None => format!("{seconds:.2}s"),
        };
        let verdict = if passed { "PASS" } else { "FAIL" };
        let line = format!("[{verdict}] {name} ({timing}): {detail}");
        println!("{line}");
        if !passed {
            failures.push(line);
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance criteria failed:\n{}",
        failures.join("\n")
    );
}
