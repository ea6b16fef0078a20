//! Amplitude and auxiliary-parameter calibration.
//!
//! Two knobs are tuned against the residual norms on the default grid:
//!
//! * the amplitude `b` (orders 1 and 2) is chosen so the larger of the two
//!   residual RMS norms hits a requested level ε, searching from below so a
//!   non-monotone residual profile still yields the smallest such amplitude;
//! * the auxiliary parameter `B̃` (order 3, at fixed `b`) minimizes the sum
//!   of squared residual norms by golden-section search. Its closed-form
//!   optimum — the value annihilating the surface cos q defect — seeds the
//!   search bracket.
//!
//! Order-3 calibration composes the two: pick `b` from the order-2 family,
//! then select `B̃` at that amplitude.

use crate::coeffs::{btilde_surface_gain, third_order_coeffs};
use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::laminar::{FlowParams, LaminarState};
use crate::real::{lit, Real};
use crate::residual::{residual_norms, Grid, ResidualReport};

/// Absolute bisection tolerance on the amplitude.
pub const B_TOLERANCE: f64 = 1e-10;
/// Relative golden-section tolerance on the auxiliary parameter.
pub const BTILDE_REL_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance on the stagnation threshold.
pub const STAGNATION_B_TOLERANCE: f64 = 1e-6;
/// Points in the pre-bisection bracket scan.
pub const BRACKET_SCAN_POINTS: usize = 64;

/// Which residual norm was the larger one at the calibrated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingNorm {
    Interior,
    Surface,
}

/// A calibrated parameter set together with its achieved residual level.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationResult<F> {
    pub gamma: F,
    pub b: F,
    pub btilde: F,
    /// max(rms interior, rms surface) at the calibrated parameters.
    pub achieved_eps: F,
    pub binding_norm: BindingNorm,
    /// Largest amplitude keeping `h_p > 0` on the default grid
    /// (+∞ when no stagnation occurs below b = 1).
    pub b_max_stagnation: F,
}

fn grid_min_hp<F: Real>(e: &Expansion<F>, grid: &Grid<F>) -> F {
    let mut min = F::infinity();
    for &p in grid.p_nodes() {
        let row = e.height_row(p);
        for &q in grid.q_nodes() {
            min = min.min(row.partials(q).h_p);
        }
    }
    min
}

/// Largest amplitude (to within 1e−6) at which the expansion family keeps
/// `h_p > 0` everywhere on the default grid. Amplitudes are probed up to
/// b = 1; families that never stagnate below that return +∞ as a sentinel.
pub fn stagnation_threshold<F: Real>(
    state: &LaminarState<F>,
    order: usize,
    btilde: F,
) -> Result<F> {
    let grid = Grid::default_for(state.params.p0);
    let positive = |b: F| -> Result<bool> {
        let e = Expansion::new(*state, order, b, btilde)?;
        Ok(grid_min_hp(&e, &grid) > F::zero())
    };
    if positive(F::one())? {
        return Ok(F::infinity());
    }
    let mut lo = F::zero();
    let mut hi = F::one();
    let tol = lit::<F>(STAGNATION_B_TOLERANCE);
    while hi - lo > tol {
        let mid = (lo + hi) / lit::<F>(2.0);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn norms_at<F: Real>(
    state: &LaminarState<F>,
    order: usize,
    b: F,
    btilde: F,
    grid: &Grid<F>,
) -> Result<ResidualReport<F>> {
    let e = Expansion::new(*state, order, b, btilde)?;
    Ok(residual_norms(&e, grid))
}

fn binding<F: Real>(report: &ResidualReport<F>) -> (F, BindingNorm) {
    if report.rms_interior >= report.rms_surface {
        (report.rms_interior, BindingNorm::Interior)
    } else {
        (report.rms_surface, BindingNorm::Surface)
    }
}

/// Selects the amplitude at which the binding residual norm of the order-1
/// or order-2 family reaches `epsilon`.
///
/// The amplitude range `(0, min(stagnation threshold, 1)]` is scanned for
/// the first crossing and the bracket bisected to 1e−10, so the smallest
/// admissible amplitude is returned even if the norm is locally
/// non-monotone. Fails with [`Error::UnreachableEpsilon`] when even the
/// largest admissible amplitude stays below `epsilon`.
pub fn select_b<F: Real>(
    state: &LaminarState<F>,
    order: usize,
    epsilon: F,
) -> Result<CalibrationResult<F>> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "amplitude selection applies to orders 1 and 2, got {order} \
             (order 3 composes amplitude and auxiliary-parameter selection)"
        )));
    }
    if !epsilon.is_finite() || epsilon <= F::zero() {
        return Err(Error::InvalidInput(format!(
            "target residual level must be positive and finite, got {epsilon}"
        )));
    }
    let grid = Grid::default_for(state.params.p0);
    let threshold = stagnation_threshold(state, order, F::zero())?;
    let cap = if threshold.is_finite() { threshold } else { F::one() };

    let value = |b: F| -> Result<F> { Ok(binding(&norms_at(state, order, b, F::zero(), &grid)?).0) };
    let at_cap = value(cap)?;
    if at_cap < epsilon {
        return Err(Error::UnreachableEpsilon {
            requested: epsilon.as_f64(),
            achievable: at_cap.as_f64(),
        });
    }

    let scan = lit::<F>(BRACKET_SCAN_POINTS as f64);
    let mut lo = F::zero();
    let mut hi = cap;
    for i in 1..=BRACKET_SCAN_POINTS {
        let b = cap * lit::<F>(i as f64) / scan;
        if value(b)? >= epsilon {
            hi = b;
            break;
        }
        lo = b;
    }
    let tol = lit::<F>(B_TOLERANCE);
    while hi - lo > tol {
        let mid = (lo + hi) / lit::<F>(2.0);
        if value(mid)? >= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let b = (lo + hi) / lit::<F>(2.0);
    let report = norms_at(state, order, b, F::zero(), &grid)?;
    let (achieved, which) = binding(&report);
    Ok(CalibrationResult {
        gamma: state.params.gamma,
        b,
        btilde: F::zero(),
        achieved_eps: achieved,
        binding_norm: which,
        b_max_stagnation: threshold,
    })
}

/// Selects the auxiliary parameter minimizing the order-3 residual energy
/// (sum of squared RMS norms) at fixed amplitude.
///
/// The closed-form value annihilating the surface cos q defect seeds the
/// golden-section bracket, widened 10% beyond both it and zero. By
/// convention `b = 0` selects `B̃ = 0` (every B̃ is then optimal).
pub fn select_btilde<F: Real>(state: &LaminarState<F>, b: F) -> Result<CalibrationResult<F>> {
    if !b.is_finite() || b < F::zero() {
        return Err(Error::InvalidInput(format!(
            "amplitude must be finite and non-negative, got {b}"
        )));
    }
    let grid = Grid::default_for(state.params.p0);
    if b == F::zero() {
        let report = norms_at(state, 3, b, F::zero(), &grid)?;
        let (achieved, which) = binding(&report);
        return Ok(CalibrationResult {
            gamma: state.params.gamma,
            b,
            btilde: F::zero(),
            achieved_eps: achieved,
            binding_norm: which,
            b_max_stagnation: stagnation_threshold(state, 3, F::zero())?,
        });
    }

    let coeffs3 = third_order_coeffs(state)?;
    let seed = coeffs3.btilde0 / btilde_surface_gain(state);
    let span = seed.abs().max(F::one());
    let tenth = lit::<F>(0.1);
    let mut lo = seed.min(F::zero()) - tenth * span;
    let mut hi = seed.max(F::zero()) + tenth * span;

    let energy = |btilde: F| -> Result<F> {
        let r = norms_at(state, 3, b, btilde, &grid)?;
        Ok(r.rms_interior * r.rms_interior + r.rms_surface * r.rms_surface)
    };

    let inv_gold = lit::<F>(0.618_033_988_749_894_9);
    let tol = lit::<F>(BTILDE_REL_TOLERANCE) * span;
    let mut x1 = hi - inv_gold * (hi - lo);
    let mut x2 = lo + inv_gold * (hi - lo);
    let mut f1 = energy(x1)?;
    let mut f2 = energy(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_gold * (hi - lo);
            f1 = energy(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_gold * (hi - lo);
            f2 = energy(x2)?;
        }
    }
    // Newton polish on the centered-difference gradient: the golden-section
    // width still leaves a gradient above finite-difference noise, and the
    // calibrated point should be flat to that noise level.
    let mut btilde = (lo + hi) / lit::<F>(2.0);
    let gstep = lit::<F>(1e-7);
    let cstep = span * lit::<F>(1e-5);
    for _ in 0..2 {
        let grad = (energy(btilde + gstep)? - energy(btilde - gstep)?) / (gstep + gstep);
        let here = energy(btilde)?;
        let curv = (energy(btilde + cstep)? + energy(btilde - cstep)? - here - here)
            / (cstep * cstep);
        if !(curv > F::zero()) {
            break;
        }
        let delta = grad / curv;
        btilde = btilde - delta;
        if delta.abs() <= gstep {
            break;
        }
    }
    let report = norms_at(state, 3, b, btilde, &grid)?;
    let (achieved, which) = binding(&report);
    Ok(CalibrationResult {
        gamma: state.params.gamma,
        b,
        btilde,
        achieved_eps: achieved,
        binding_norm: which,
        b_max_stagnation: stagnation_threshold(state, 3, btilde)?,
    })
}

/// Calibrates one state at one order: orders 1 and 2 select the amplitude
/// directly; order 3 takes the order-2 amplitude and then selects the
/// auxiliary parameter at that amplitude.
pub fn calibrate<F: Real>(
    state: &LaminarState<F>,
    order: usize,
    epsilon: F,
) -> Result<CalibrationResult<F>> {
    match order {
        1 | 2 => select_b(state, order, epsilon),
        3 => {
            let base = select_b(state, 2, epsilon)?;
            select_btilde(state, base.b)
        }
        _ => Err(Error::InvalidInput(format!(
            "calibration order must be 1, 2, or 3, got {order}"
        ))),
    }
}

/// One sweep record: a parameter set, an order, and the calibration outcome.
#[derive(Debug)]
pub struct SweepEntry<F> {
    pub gamma: F,
    pub order: usize,
    pub result: Result<CalibrationResult<F>>,
}

/// Calibrates every (parameter set, order) pair, recording per-pair
/// failures instead of aborting the sweep.
pub fn sweep<F: Real>(
    params_list: &[FlowParams<F>],
    epsilon: F,
    orders: &[usize],
) -> Vec<SweepEntry<F>> {
    let mut out = Vec::with_capacity(params_list.len() * orders.len());
    for params in params_list {
        for &order in orders {
            let result = LaminarState::from_params(*params)
                .and_then(|state| calibrate(&state, order, epsilon));
            out.push(SweepEntry { gamma: params.gamma, order, result });
        }
    }
    out
}
