//! Physical fields of a truncated expansion: surface profile, velocity,
//! pressure, streamlines, and the curvature-transition curve.
//!
//! All fields live on the rectangle `[−π, π) × [p0, 0]`. Velocity and
//! pressure divide by `h_p`, so they demand `h_p > 0` at the evaluation
//! point and report [`Error::Stagnation`] otherwise; the expansion itself
//! stays well-defined there.

use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::real::{lit, Real};
use crate::residual::Grid;

/// Intervals of the sign-change scan for curvature roots.
pub const CURVATURE_SCAN_INTERVALS: usize = 256;
/// Absolute bisection tolerance on curvature roots.
pub const CURVATURE_ROOT_TOL: f64 = 1e-10;

/// Wave surface over one period: mean-zero elevation, mean depth, and
/// crest-to-trough height.
#[derive(Debug, Clone)]
pub struct SurfaceProfile<F> {
    /// Uniform angles on `[−π, π)`.
    pub q_nodes: Vec<F>,
    /// Surface elevation about the discrete mean (mean-zero by construction).
    pub eta: Vec<F>,
    /// Discrete mean of `h(·, 0)`; exact for the trigonometric surface as
    /// every nonzero mode averages to zero on the uniform grid.
    pub depth: F,
    /// Crest-to-trough height `h(0, 0) − h(π, 0)`.
    pub height: F,
}

/// Samples the surface over one wavelength.
pub fn surface_profile<F: Real>(expansion: &Expansion<F>, nq: usize) -> Result<SurfaceProfile<F>> {
    if nq < 8 {
        return Err(Error::InvalidInput(format!(
            "surface profile needs at least 8 angles, got {nq}"
        )));
    }
    let row = expansion.height_row(F::zero());
    let two_pi = F::PI() + F::PI();
    let q_nodes: Vec<F> = (0..nq)
        .map(|i| -F::PI() + two_pi * lit::<F>(i as f64) / lit::<F>(nq as f64))
        .collect();
    let heights: Vec<F> = q_nodes.iter().map(|&q| row.partials(q).h).collect();
    let mut depth = F::zero();
    for &h in &heights {
        depth += h;
    }
    depth = depth / lit::<F>(nq as f64);
    let eta = heights.iter().map(|&h| h - depth).collect();
    let height = row.partials(F::zero()).h - row.partials(F::PI()).h;
    Ok(SurfaceProfile { q_nodes, eta, depth, height })
}

fn require_in_strip<F: Real>(expansion: &Expansion<F>, p: F) -> Result<()> {
    let p0 = expansion.state.params.p0;
    if !(p >= p0 && p <= F::zero()) {
        return Err(Error::Domain {
            quantity: "p",
            detail: format!("pressure level {p} outside the strip [{p0}, 0]"),
        });
    }
    Ok(())
}

/// Velocity field in the frame of the wave: `(1/h_p, −h_q/h_p)`.
///
/// The first component is the horizontal velocity relative to the wave
/// speed; it is positive wherever the flow is stagnation-free. At `b = 0`
/// it reduces to the laminar profile `(r(p), 0)`.
pub fn velocity<F: Real>(expansion: &Expansion<F>, q: F, p: F) -> Result<(F, F)> {
    require_in_strip(expansion, p)?;
    let pt = expansion.partials(q, p);
    if !(pt.h_p > F::zero()) {
        return Err(Error::Stagnation {
            q: q.as_f64(),
            p: p.as_f64(),
            b: expansion.b.as_f64(),
        });
    }
    Ok((pt.h_p.recip(), -pt.h_q / pt.h_p))
}

/// Pressure above atmospheric:
/// `−(1 + h_q²)/(2 h_p²) − g·h − γ·p + Q*/2`.
///
/// On the surface this equals `−𝓑₀[h]/(2 h_p²)`, so it vanishes exactly as
/// fast as the surface residual — one order in `b` beyond the expansion
/// order once amplitudes are calibrated.
pub fn pressure<F: Real>(expansion: &Expansion<F>, q: F, p: F) -> Result<F> {
    require_in_strip(expansion, p)?;
    let pt = expansion.partials(q, p);
    if !(pt.h_p > F::zero()) {
        return Err(Error::Stagnation {
            q: q.as_f64(),
            p: p.as_f64(),
            b: expansion.b.as_f64(),
        });
    }
    let g = expansion.state.params.g;
    let gamma = expansion.state.params.gamma;
    let half = lit::<F>(0.5);
    Ok(-(F::one() + pt.h_q * pt.h_q) / ((pt.h_p * pt.h_p) + (pt.h_p * pt.h_p)) - g * pt.h
        - gamma * p
        + half * expansion.state.q_star)
}

/// One streamline (level curve of the pressure variable), sampled over two
/// wavelengths for plotting.
#[derive(Debug, Clone)]
pub struct Streamline<F> {
    /// Uniform angles on `[−2π, 2π)`.
    pub q_nodes: Vec<F>,
    /// Heights `h(q, p_level)`.
    pub heights: Vec<F>,
}

/// Samples the streamline at one pressure level with `nq` points per
/// wavelength (two wavelengths total).
pub fn streamline<F: Real>(
    expansion: &Expansion<F>,
    p_level: F,
    nq: usize,
) -> Result<Streamline<F>> {
    if nq < 8 {
        return Err(Error::InvalidInput(format!(
            "streamline needs at least 8 angles per wavelength, got {nq}"
        )));
    }
    require_in_strip(expansion, p_level)?;
    let row = expansion.height_row(p_level);
    let two_pi = F::PI() + F::PI();
    let step = two_pi / lit::<F>(nq as f64);
    let n = 2 * nq;
    let mut q_nodes = Vec::with_capacity(n);
    let mut heights = Vec::with_capacity(n);
    for i in 0..n {
        let q = -two_pi + step * lit::<F>(i as f64);
        q_nodes.push(q);
        heights.push(row.partials(q).h);
    }
    Ok(Streamline { q_nodes, heights })
}

/// Curvature roots on one pressure level.
#[derive(Debug, Clone)]
pub struct CurvatureLevel<F> {
    pub p: F,
    /// Angles in `(0, π)` where `h_qq(·, p)` changes sign. Empty when the
    /// level has no sign change — in particular on the bed, where the
    /// curvature vanishes identically.
    pub roots: Vec<F>,
}

/// Locates the inflection angles of the streamlines: for each of
/// `np_levels` uniform pressure levels spanning `[p0, 0]`, the roots of
/// `q ↦ h_qq(q, p)` on `(0, π)` (the sign is even in `q`, so one half
/// period determines the curve).
pub fn curvature_transition<F: Real>(
    expansion: &Expansion<F>,
    np_levels: usize,
) -> Result<Vec<CurvatureLevel<F>>> {
    if np_levels < 2 {
        return Err(Error::InvalidInput(format!(
            "curvature transition needs at least 2 levels, got {np_levels}"
        )));
    }
    let p0 = expansion.state.params.p0;
    let tol = lit::<F>(CURVATURE_ROOT_TOL);
    let m = CURVATURE_SCAN_INTERVALS;
    let mut out = Vec::with_capacity(np_levels);
    for j in 0..np_levels {
        let p = p0 * (F::one() - lit::<F>(j as f64) / lit::<F>((np_levels - 1) as f64));
        let row = expansion.height_row(p);
        let value = |q: F| row.partials(q).h_qq;
        let samples: Vec<F> = (0..=m)
            .map(|i| value(F::PI() * lit::<F>(i as f64) / lit::<F>(m as f64)))
            .collect();
        let mut roots = Vec::new();
        let scale = samples.iter().fold(F::zero(), |a, v| a.max(v.abs()));
        if scale > F::zero() {
            for i in 0..m {
                let (qa, qb) = (
                    F::PI() * lit::<F>(i as f64) / lit::<F>(m as f64),
                    F::PI() * lit::<F>((i + 1) as f64) / lit::<F>(m as f64),
                );
                if i > 0 && samples[i] == F::zero() {
                    roots.push(qa);
                    continue;
                }
                if samples[i] * samples[i + 1] < F::zero() {
                    let (mut lo, mut hi) = (qa, qb);
                    let mut flo = samples[i];
                    while hi - lo > tol {
                        let mid = (lo + hi) / lit::<F>(2.0);
                        let fmid = value(mid);
                        if flo * fmid <= F::zero() {
                            hi = mid;
                        } else {
                            lo = mid;
                            flo = fmid;
                        }
                    }
                    roots.push((lo + hi) / lit::<F>(2.0));
                }
            }
        }
        out.push(CurvatureLevel { p, roots });
    }
    Ok(out)
}

/// Velocity and pressure sampled over a grid, row-major in `p` (index
/// `[p][q]`, matching the grid's node vectors).
#[derive(Debug, Clone)]
pub struct FlowFieldGrid<F> {
    /// `1/h_p`: horizontal velocity relative to the wave speed.
    pub rel_horizontal: Vec<Vec<F>>,
    /// `−h_q/h_p`: vertical velocity.
    pub vertical: Vec<Vec<F>>,
    /// Pressure above atmospheric.
    pub pressure_excess: Vec<Vec<F>>,
}

/// Evaluates velocity and pressure on every grid node, failing at the
/// first stagnation point encountered.
pub fn flow_field_grid<F: Real>(
    expansion: &Expansion<F>,
    grid: &Grid<F>,
) -> Result<FlowFieldGrid<F>> {
    let g = expansion.state.params.g;
    let gamma = expansion.state.params.gamma;
    let half = lit::<F>(0.5);
    let q_half_head = half * expansion.state.q_star;
    let np = grid.p_nodes().len();
    let nq = grid.q_nodes().len();
    let mut rel_horizontal = vec![vec![F::zero(); nq]; np];
    let mut vertical = vec![vec![F::zero(); nq]; np];
    let mut pressure_excess = vec![vec![F::zero(); nq]; np];
    for (jp, &p) in grid.p_nodes().iter().enumerate() {
        let row = expansion.height_row(p);
        for (iq, &q) in grid.q_nodes().iter().enumerate() {
            let pt = row.partials(q);
            if !(pt.h_p > F::zero()) {
                return Err(Error::Stagnation {
                    q: q.as_f64(),
                    p: p.as_f64(),
                    b: expansion.b.as_f64(),
                });
            }
            rel_horizontal[jp][iq] = pt.h_p.recip();
            vertical[jp][iq] = -pt.h_q / pt.h_p;
            pressure_excess[jp][iq] = -(F::one() + pt.h_q * pt.h_q)
                / ((pt.h_p * pt.h_p) + (pt.h_p * pt.h_p))
                - g * pt.h
                - gamma * p
                + q_half_head;
        }
    }
    Ok(FlowFieldGrid { rel_horizontal, vertical, pressure_excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{btilde_surface_gain, third_order_coeffs};
    use crate::laminar::{FlowParams, LaminarState};

    fn state(gamma: f64) -> LaminarState<f64> {
        let params = FlowParams::new(gamma, -2.0, 9.8).unwrap();
        LaminarState::from_params(params).unwrap()
    }

    fn expansion(gamma: f64, order: usize, b: f64) -> Expansion<f64> {
        Expansion::new(state(gamma), order, b, 0.0).unwrap()
    }

    #[test]
    fn first_order_depth_matches_laminar_anchors() {
        for (gamma, depth) in [(-1.5, 0.800_718_57), (1.5, 0.758_035_30)] {
            let e = expansion(gamma, 1, 0.01);
            let s = surface_profile(&e, 64).unwrap();
            assert!(
                (s.depth - depth).abs() < 1e-6,
                "gamma={gamma}: depth {} vs {depth}",
                s.depth
            );
        }
    }

    #[test]
    fn elevation_is_mean_zero_and_height_is_crest_to_trough() {
        let e = expansion(-1.5, 2, 0.03);
        let s = surface_profile(&e, 128).unwrap();
        let mean: f64 = s.eta.iter().sum::<f64>() / s.eta.len() as f64;
        assert!(mean.abs() <= 1e-12);
        let crest = e.evaluate_height(0.0, 0.0);
        let trough = e.evaluate_height(std::f64::consts::PI, 0.0);
        assert!((s.height - (crest - trough)).abs() <= 1e-14);
        assert!(s.height > 0.0);
    }

    #[test]
    fn laminar_flow_has_shear_profile_and_hydrostatic_pressure() {
        let st = state(0.0);
        let e = Expansion::new(st, 2, 0.0, 0.0).unwrap();
        for p in [-2.0, -1.3, -0.4, 0.0] {
            let (cu, v) = velocity(&e, 0.7, p).unwrap();
            assert!((cu - st.r_profile(p)).abs() <= 1e-12);
            assert_eq!(v, 0.0);
        }
        let bed_pressure = pressure(&e, 0.3, st.params.p0).unwrap();
        let hydrostatic = st.params.g * st.laminar_height(0.0);
        assert!(
            (bed_pressure - hydrostatic).abs() <= 1e-12,
            "bed pressure {bed_pressure} vs hydrostatic {hydrostatic}"
        );
        let surface_pressure = pressure(&e, 0.3, 0.0).unwrap();
        assert!(surface_pressure.abs() <= 1e-12);
    }

    #[test]
    fn vertical_velocity_is_odd_and_vanishes_on_symmetry_lines() {
        let e = expansion(1.5, 2, 0.04);
        let pi = std::f64::consts::PI;
        for p in [-1.7, -0.8, 0.0] {
            for q in [0.0, pi, -pi] {
                let (_, v) = velocity(&e, q, p).unwrap();
                assert!(v.abs() <= 1e-14, "v({q},{p}) = {v}");
            }
            for q in [0.4, 1.1, 2.8] {
                let (_, v_plus) = velocity(&e, q, p).unwrap();
                let (_, v_minus) = velocity(&e, -q, p).unwrap();
                assert!((v_plus + v_minus).abs() <= 1e-13);
                let p_plus = pressure(&e, q, p).unwrap();
                let p_minus = pressure(&e, -q, p).unwrap();
                assert!((p_plus - p_minus).abs() <= 1e-12);
            }
        }
        // On the bed the wave modes vanish, so the flow is horizontal.
        for q in [0.4, 1.1, 2.8] {
            let (_, v) = velocity(&e, q, -2.0).unwrap();
            assert!(v.abs() <= 1e-13);
        }
    }

    #[test]
    fn stagnation_is_reported_not_evaluated() {
        // At γ = 0 the trough column has h_p ∝ 1 − b·cosh(H(p)), which
        // turns negative once cosh exceeds 1/b.
        let e = expansion(0.0, 1, 0.999);
        let pi = std::f64::consts::PI;
        match velocity(&e, pi, -1.7) {
            Err(Error::Stagnation { b, .. }) => assert_eq!(b, 0.999),
            other => panic!("expected stagnation, got {other:?}"),
        }
        assert!(matches!(pressure(&e, pi, -1.7), Err(Error::Stagnation { .. })));
    }

    #[test]
    fn surface_pressure_shrinks_one_order_past_the_expansion() {
        // On the surface the pressure is the surface residual over 2h_p²;
        // the third-order family needs the surface-annihilating auxiliary
        // parameter for its cos q defect to vanish.
        let st = state(1.5);
        let pi = std::f64::consts::PI;
        let bs = [1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2];
        for order in 1..=3usize {
            let btilde = if order == 3 {
                let c3 = third_order_coeffs(&st).unwrap();
                c3.btilde0 / btilde_surface_gain(&st)
            } else {
                0.0
            };
            let logs: Vec<(f64, f64)> = bs
                .iter()
                .map(|&b| {
                    let e = Expansion::new(st, order, b, btilde).unwrap();
                    let max_p = (0..64)
                        .map(|i| {
                            let q = -pi + 2.0 * pi * i as f64 / 64.0;
                            pressure(&e, q, 0.0).unwrap().abs()
                        })
                        .fold(0.0f64, f64::max);
                    (b.ln(), max_p.ln())
                })
                .collect();
            let n = logs.len() as f64;
            let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |a, v| (a.0 + v.0, a.1 + v.1));
            let (sxx, sxy): (f64, f64) = logs
                .iter()
                .fold((0.0, 0.0), |a, v| (a.0 + v.0 * v.0, a.1 + v.0 * v.1));
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            let expected = (order + 1) as f64;
            assert!(
                (slope - expected).abs() <= 0.15,
                "order {order}: surface pressure slope {slope} vs {expected}"
            );
        }
    }

    #[test]
    fn streamlines_are_nested_and_periodic() {
        let e = expansion(-1.5, 2, 0.03);
        let lower = streamline(&e, -1.2, 64).unwrap();
        let upper = streamline(&e, -0.6, 64).unwrap();
        assert_eq!(lower.q_nodes.len(), 128);
        for i in 0..lower.heights.len() {
            assert!(lower.heights[i] < upper.heights[i]);
        }
        // Two-wavelength window repeats with period 2π (64 samples).
        for i in 0..64 {
            assert!((lower.heights[i] - lower.heights[i + 64]).abs() <= 1e-13);
        }
        let bed = streamline(&e, -2.0, 64).unwrap();
        assert!(bed.heights.iter().all(|h| h.abs() <= 1e-14));
    }

    #[test]
    fn curvature_transition_sits_at_quarter_period_for_first_order() {
        let e = expansion(1.5, 1, 0.02);
        let levels = curvature_transition(&e, 9).unwrap();
        assert_eq!(levels.len(), 9);
        assert!(levels[0].roots.is_empty(), "bed curvature vanishes identically");
        let pi_half = std::f64::consts::FRAC_PI_2;
        for level in &levels[1..] {
            assert_eq!(level.roots.len(), 1, "level p={}", level.p);
            assert!((level.roots[0] - pi_half).abs() <= 1e-9);
        }
    }

    #[test]
    fn curvature_transition_is_single_rooted_and_continuous_at_second_order() {
        let e = expansion(-1.5, 2, 0.03);
        let levels = curvature_transition(&e, 17).unwrap();
        let mut prev: Option<f64> = None;
        for level in &levels[1..] {
            assert_eq!(level.roots.len(), 1, "level p={}", level.p);
            let root = level.roots[0];
            assert!(root > 0.0 && root < std::f64::consts::PI);
            if let Some(prev_root) = prev {
                assert!(
                    (root - prev_root).abs() < 0.2,
                    "transition jumped from {prev_root} to {root}"
                );
            }
            prev = Some(root);
        }
    }

    #[test]
    fn field_grid_matches_pointwise_evaluation() {
        let e = expansion(1.5, 2, 0.04);
        let grid = Grid::new(16, 9, -2.0).unwrap();
        let fields = flow_field_grid(&e, &grid).unwrap();
        for (jp, &p) in grid.p_nodes().iter().enumerate() {
            for (iq, &q) in grid.q_nodes().iter().enumerate() {
                let (cu, v) = velocity(&e, q, p).unwrap();
                let pr = pressure(&e, q, p).unwrap();
                assert_eq!(fields.rel_horizontal[jp][iq], cu);
                assert_eq!(fields.vertical[jp][iq], v);
                assert_eq!(fields.pressure_excess[jp][iq], pr);
                assert!(cu > 0.0);
            }
        }
        // Vertical velocity mirrors the wave's symmetry: rising ahead of
        // the crest, sinking behind, for the first-order-dominated shape.
        for (jp, &p) in grid.p_nodes().iter().enumerate() {
            if p == -2.0 {
                continue;
            }
            for (iq, &q) in grid.q_nodes().iter().enumerate() {
                if q > 0.05 && q < std::f64::consts::PI - 0.05 {
                    assert!(fields.vertical[jp][iq] > 0.0, "v({q},{p}) sign");
                }
                if q < -0.05 && q > -std::f64::consts::PI + 0.05 {
                    assert!(fields.vertical[jp][iq] < 0.0, "v({q},{p}) sign");
                }
            }
        }
    }

    #[test]
    fn out_of_strip_levels_are_rejected() {
        let e = expansion(1.5, 1, 0.01);
        assert!(matches!(velocity(&e, 0.0, 0.5), Err(Error::Domain { .. })));
        assert!(matches!(pressure(&e, 0.0, -2.5), Err(Error::Domain { .. })));
        assert!(matches!(streamline(&e, 1e-3, 64), Err(Error::Domain { .. })));
    }
}
