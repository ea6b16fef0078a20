//! Assembly of the truncated height-function expansion
//! `h(q, p) = H(p) + b·cos(q)·m(p) + b²·(u₀ + cos(2q)·u₂) + b³·(cos(q)·w₁ + cos(3q)·w₃)`
//! and exact evaluation of its first and second partial derivatives.
//!
//! Each cos(n·q) mode carries a vertical profile that is a finite term list
//! (see [`crate::terms`]), so p-derivatives are exact algebra and
//! q-derivatives are exact trigonometry: no numerical differentiation enters
//! residual evaluation anywhere.

use crate::coeffs::{
    laminar_profile, m_profile, second_order_coeffs, third_order_coeffs, u_profiles, w_profiles,
    SecondOrderCoeffs, ThirdOrderCoeffs,
};
use crate::error::{Error, Result};
use crate::laminar::LaminarState;
use crate::real::{lit, Real};
use crate::terms::{diff_profile, eval_profile, Term};

/// Height value and first/second partial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials<F> {
    pub h: F,
    pub h_q: F,
    pub h_p: F,
    pub h_qq: F,
    pub h_qp: F,
    pub h_pp: F,
}

/// One cos(n·q) mode: vertical profile with precomputed exact derivatives.
#[derive(Debug, Clone)]
struct Mode<F> {
    /// Wavenumber n in cos(n·q).
    wavenumber: i32,
    /// Amplitude scale b^k carried by this mode.
    scale: F,
    profile: Vec<Term<F>>,
    d1: Vec<Term<F>>,
    d2: Vec<Term<F>>,
}

impl<F: Real> Mode<F> {
    fn new(wavenumber: i32, scale: F, profile: Vec<Term<F>>, gamma: F) -> Self {
        let d1 = diff_profile(&profile, gamma);
        let d2 = diff_profile(&d1, gamma);
        Self { wavenumber, scale, profile, d1, d2 }
    }
}

/// A truncated expansion of given order at a bifurcation state.
///
/// Construction is cheap (closed-form coefficients only) and performs no
/// stagnation check: an expansion with large `b` is a well-defined function
/// even where `h_p` changes sign. Velocity/pressure evaluation and amplitude
/// calibration are where positivity of `h_p` is enforced.
#[derive(Debug, Clone)]
pub struct Expansion<F> {
    pub state: LaminarState<F>,
    /// Truncation order, 1..=3.
    pub order: usize,
    /// Amplitude parameter (non-negative).
    pub b: F,
    /// Third-order auxiliary parameter; forced to zero below order 3.
    pub btilde: F,
    /// Second-order coefficients (present for order ≥ 2).
    pub coeffs2: Option<SecondOrderCoeffs<F>>,
    /// Third-order coefficients (present for order 3).
    pub coeffs3: Option<ThirdOrderCoeffs<F>>,
    modes: Vec<Mode<F>>,
}

impl<F: Real> Expansion<F> {
    /// Builds the order-`order` expansion with amplitude `b` and auxiliary
    /// parameter `btilde` (ignored below order 3).
    pub fn new(state: LaminarState<F>, order: usize, b: F, btilde: F) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidInput(format!(
                "expansion order must be 1, 2, or 3, got {order}"
            )));
        }
        if !b.is_finite() || b < F::zero() {
            return Err(Error::InvalidInput(format!(
                "amplitude b must be finite and non-negative, got {b}"
            )));
        }
        if !btilde.is_finite() {
            return Err(Error::InvalidInput(format!(
                "auxiliary parameter btilde must be finite, got {btilde}"
            )));
        }
        let btilde = if order == 3 { btilde } else { F::zero() };
        let gamma = state.params.gamma;

        let mut modes = Vec::with_capacity(6);
        modes.push(Mode::new(0, F::one(), laminar_profile(), gamma));
        modes.push(Mode::new(1, b, m_profile(&state), gamma));

        let mut coeffs2 = None;
        let mut coeffs3 = None;
        if order >= 2 {
            let c2 = second_order_coeffs(&state)?;
            let (u0, u2) = u_profiles(&state, &c2);
            let b2 = b * b;
            modes.push(Mode::new(0, b2, u0, gamma));
            modes.push(Mode::new(2, b2, u2, gamma));
            coeffs2 = Some(c2);
        }
        if order == 3 {
            let c3 = third_order_coeffs(&state)?;
            let (w1, w3) = w_profiles(&state, &c3, btilde);
            let b3 = b * b * b;
            modes.push(Mode::new(1, b3, w1, gamma));
            modes.push(Mode::new(3, b3, w3, gamma));
            coeffs3 = Some(c3);
        }
        Ok(Self { state, order, b, btilde, coeffs2, coeffs3, modes })
    }

    /// Precomputes per-mode values and p-derivatives at one pressure level;
    /// evaluating many q at fixed p then costs one cosine per mode per point.
    pub fn height_row(&self, p: F) -> HeightRow<F> {
        let r = self.state.r_profile(p);
        let big_h = self.state.laminar_height(p);
        let rows = self
            .modes
            .iter()
            .map(|m| RowMode {
                wavenumber: m.wavenumber,
                v: m.scale * eval_profile(&m.profile, r, big_h),
                dp: m.scale * eval_profile(&m.d1, r, big_h),
                dpp: m.scale * eval_profile(&m.d2, r, big_h),
            })
            .collect();
        HeightRow { rows }
    }

    /// Height value and all first/second partials at a point.
    pub fn partials(&self, q: F, p: F) -> Partials<F> {
        self.height_row(p).partials(q)
    }

    /// Height value at a point.
    pub fn evaluate_height(&self, q: F, p: F) -> F {
        let r = self.state.r_profile(p);
        let big_h = self.state.laminar_height(p);
        let mut acc = F::zero();
        for m in &self.modes {
            acc += m.scale
                * (lit::<F>(m.wavenumber as f64) * q).cos()
                * eval_profile(&m.profile, r, big_h);
        }
        acc
    }
}

/// Per-mode values and p-derivatives frozen at one pressure level.
#[derive(Debug, Clone)]
pub struct HeightRow<F> {
    rows: Vec<RowMode<F>>,
}

#[derive(Debug, Clone, Copy)]
struct RowMode<F> {
    wavenumber: i32,
    v: F,
    dp: F,
    dpp: F,
}

impl<F: Real> HeightRow<F> {
    /// Height value and all partials at angle `q` on this level.
    pub fn partials(&self, q: F) -> Partials<F> {
        let mut out = Partials {
            h: F::zero(),
            h_q: F::zero(),
            h_p: F::zero(),
            h_qq: F::zero(),
            h_qp: F::zero(),
            h_pp: F::zero(),
        };
        for m in &self.rows {
            let n = lit::<F>(m.wavenumber as f64);
            let (s, c) = (n * q).sin_cos();
            out.h += m.v * c;
            out.h_q -= n * m.v * s;
            out.h_p += m.dp * c;
            out.h_qq -= n * n * m.v * c;
            out.h_qp -= n * m.dp * s;
            out.h_pp += m.dpp * c;
        }
        out
    }
}

/// First-order shape cos(q)·m(p): the coefficient of b in the expansion.
pub fn first_order_term<F: Real>(state: &LaminarState<F>, q: F, p: F) -> F {
    let r = state.r_profile(p);
    let big_h = state.laminar_height(p);
    q.cos() * eval_profile(&m_profile(state), r, big_h)
}

/// Second-order shape u₀(p) + cos(2q)·u₂(p): the coefficient of b².
pub fn second_order_term<F: Real>(
    state: &LaminarState<F>,
    coeffs: &SecondOrderCoeffs<F>,
    q: F,
    p: F,
) -> F {
    let r = state.r_profile(p);
    let big_h = state.laminar_height(p);
    let (u0, u2) = u_profiles(state, coeffs);
    eval_profile(&u0, r, big_h) + (q + q).cos() * eval_profile(&u2, r, big_h)
}

/// Third-order shape cos(q)·w₁(p) + cos(3q)·w₃(p): the coefficient of b³.
pub fn third_order_term<F: Real>(
    state: &LaminarState<F>,
    coeffs: &ThirdOrderCoeffs<F>,
    btilde: F,
    q: F,
    p: F,
) -> F {
    let r = state.r_profile(p);
    let big_h = state.laminar_height(p);
    let (w1, w3) = w_profiles(state, coeffs, btilde);
    q.cos() * eval_profile(&w1, r, big_h) + (lit::<F>(3.0) * q).cos() * eval_profile(&w3, r, big_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminar::FlowParams;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn state(gamma: f64) -> LaminarState<f64> {
        let params = FlowParams::new(gamma, -2.0, 9.8).unwrap();
        LaminarState::from_params(params).unwrap()
    }

    #[test]
    fn constructor_validates_inputs() {
        let st = state(-1.5);
        assert!(Expansion::new(st, 0, 0.01, 0.0).is_err());
        assert!(Expansion::new(st, 4, 0.01, 0.0).is_err());
        assert!(Expansion::new(st, 2, -0.01, 0.0).is_err());
        assert!(Expansion::new(st, 2, f64::NAN, 0.0).is_err());
        // btilde is zeroed (not rejected) below order 3.
        let e = Expansion::new(st, 2, 0.01, 5.0).unwrap();
        assert_eq!(e.btilde, 0.0);
        let e3 = Expansion::new(st, 3, 0.01, 5.0).unwrap();
        assert_eq!(e3.btilde, 5.0);
    }

    #[test]
    fn reduces_to_laminar_at_zero_amplitude() {
        let st = state(1.5);
        let e = Expansion::new(st, 3, 0.0, 0.0).unwrap();
        for i in 0..5 {
            let p = -2.0 + 0.5 * i as f64;
            let q = 0.7 * i as f64;
            assert_relative_eq!(
                e.evaluate_height(q, p),
                st.laminar_height(p),
                max_relative = 1e-14,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn row_path_matches_direct_path() {
        let st = state(-1.5);
        let e = Expansion::new(st, 3, 0.02, 0.3).unwrap();
        for i in 0..4 {
            let p = -1.8 + 0.55 * i as f64;
            let row = e.height_row(p);
            for j in 0..5 {
                let q = -3.0 + 1.4 * j as f64;
                let a = row.partials(q);
                let b = e.partials(q, p);
                assert_eq!(a, b);
                assert_relative_eq!(a.h, e.evaluate_height(q, p), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        let st = state(2.5);
        let e = Expansion::new(st, 3, 0.03, -0.8).unwrap();
        let hq = 1e-6;
        let f = |q: f64, p: f64| e.evaluate_height(q, p);
        for (q, p) in [(0.3, -0.5), (-1.2, -1.5), (2.9, -0.1)] {
            let pt = e.partials(q, p);
            let fd_q = (f(q + hq, p) - f(q - hq, p)) / (2.0 * hq);
            let fd_p = (f(q, p + hq) - f(q, p - hq)) / (2.0 * hq);
            let fd_qq = (f(q + hq, p) - 2.0 * f(q, p) + f(q - hq, p)) / (hq * hq);
            let fd_qp =
                (f(q + hq, p + hq) - f(q + hq, p - hq) - f(q - hq, p + hq) + f(q - hq, p - hq))
                    / (4.0 * hq * hq);
            let fd_pp = (f(q, p + hq) - 2.0 * f(q, p) + f(q, p - hq)) / (hq * hq);
            assert_relative_eq!(pt.h_q, fd_q, max_relative = 1e-8, epsilon = 1e-8);
            assert_relative_eq!(pt.h_p, fd_p, max_relative = 1e-8, epsilon = 1e-8);
            assert_relative_eq!(pt.h_qq, fd_qq, max_relative = 1e-3, epsilon = 1e-3);
            assert_relative_eq!(pt.h_qp, fd_qp, max_relative = 1e-3, epsilon = 1e-3);
            assert_relative_eq!(pt.h_pp, fd_pp, max_relative = 1e-3, epsilon = 1e-3);
        }
    }

    #[test]
    fn even_in_q_and_pinned_at_bed() {
        let st = state(3.0);
        let e = Expansion::new(st, 3, 0.02, 1.2).unwrap();
        for i in 0..6 {
            let q = 0.5 + 0.45 * i as f64;
            assert_eq!(e.evaluate_height(q, -0.7), e.evaluate_height(-q, -0.7));
            assert!(e.evaluate_height(q, st.params.p0).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_content_stays_within_truncation() {
        // Project h(·, p) onto cos(nq) with the exactness of the uniform
        // trapezoid rule on the circle; modes beyond the truncation and all
        // sine content must vanish.
        let st = state(-1.5);
        let e = Expansion::new(st, 3, 0.04, 0.6).unwrap();
        let p = -0.8;
        let n_nodes = 64;
        let mut cos_amp = [0.0_f64; 8];
        let mut sin_amp = [0.0_f64; 8];
        for i in 0..n_nodes {
            let q = -PI + 2.0 * PI * i as f64 / n_nodes as f64;
            let h = e.evaluate_height(q, p);
            for n in 0..8 {
                cos_amp[n] += h * (n as f64 * q).cos();
                sin_amp[n] += h * (n as f64 * q).sin();
            }
        }
        let scale = e.evaluate_height(0.0, p).abs();
        for n in 0..8 {
            let c = cos_amp[n] * 2.0 / n_nodes as f64;
            let s = sin_amp[n] * 2.0 / n_nodes as f64;
            assert!(s.abs() <= 1e-12 * scale, "sin({n}q) content {s}");
            if n > 3 {
                assert!(c.abs() <= 1e-12 * scale, "cos({n}q) content {c}");
            }
        }
    }

    #[test]
    fn wave_height_slope_matches_first_order_mode() {
        // The crest-to-trough height h(0,0) − h(π,0) approaches 2b·m(0) as
        // b → 0; at b = 1e−5 the quadratic correction is far below 0.1%.
        for gamma in [-1.5, 0.0, 1.5] {
            let st = state(gamma);
            let b = 1e-5;
            let e = Expansion::new(st, 3, b, 0.0).unwrap();
            let height = e.evaluate_height(0.0, 0.0) - e.evaluate_height(PI, 0.0);
            let m0 = first_order_term(&st, 0.0, 0.0);
            assert_relative_eq!(height, 2.0 * b * m0, max_relative = 1e-3);
        }
    }

    #[test]
    fn order_terms_compose_the_expansion() {
        let st = state(1.5);
        let b = 0.02;
        let btilde = 0.9;
        let e = Expansion::new(st, 3, b, btilde).unwrap();
        let c2 = e.coeffs2.as_ref().unwrap();
        let c3 = e.coeffs3.as_ref().unwrap();
        for (q, p) in [(0.0, 0.0), (1.1, -0.4), (-2.3, -1.7)] {
            let composed = st.laminar_height(p)
                + b * first_order_term(&st, q, p)
                + b * b * second_order_term(&st, c2, q, p)
                + b * b * b * third_order_term(&st, c3, btilde, q, p);
            assert_relative_eq!(
                e.evaluate_height(q, p),
                composed,
                max_relative = 1e-13,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn small_vorticity_matches_zero_vorticity() {
        // The profile algebra is uniform in γ: evaluating the rotational
        // closed forms at |γ| = 1e−7 must agree with the γ = 0 evaluation
        // to the accuracy the dispersion root itself moves.
        let b = 0.02;
        let st0 = state(0.0);
        let e0 = Expansion::new(st0, 3, b, 0.0).unwrap();
        for gamma in [-1e-7, 1e-7] {
            let st = state(gamma);
            let e = Expansion::new(st, 3, b, 0.0).unwrap();
            for (q, p) in [(0.0, 0.0), (0.9, -0.3), (2.2, -1.2), (PI, -2.0)] {
                let a = e.evaluate_height(q, p);
                let z = e0.evaluate_height(q, p);
                assert!((a - z).abs() <= 1e-5 * z.abs().max(1.0), "gamma={gamma}: {a} vs {z}");
            }
        }
    }
}
