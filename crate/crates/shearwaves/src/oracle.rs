//! Independent verification machinery: finite-difference solves of the
//! vertical mode problems, numerical extraction of b-polynomial residual
//! coefficients, derivative cross-checks, and the solvability-defect
//! measurement for the third-order cos q mode.
//!
//! Nothing in this module reuses the closed-form mode profiles to produce
//! its answers — profiles enter only as the reference values being checked.
//! The two pillars are:
//!
//! * a second-order tridiagonal solver for the mode BVPs
//!   `u'' − (3γ/r²)u' − (n²/r²)u = f`, `u(p0) = 0`, with either the Robin
//!   surface condition `u'(0) − (g/λ*^{3/2})u(0) = g_n` (ghost-node
//!   discretization, globally second order) or a surface pin (for the
//!   resonant n = 1 problem, where the Robin solve is singular);
//! * exact polynomial extraction in b: every residual of a truncated
//!   expansion is a genuine polynomial in b of degree ≤ 3·order, so its
//!   coefficients are recovered from Chebyshev-spaced amplitude samples by
//!   one Vandermonde solve.

use crate::coeffs::{
    btilde_surface_gain, m_profile, second_order_coeffs, second_order_forcing,
    third_order_coeffs, u_profiles, w_profiles,
};
use crate::error::{Error, Result};
use crate::expansion::{Expansion, Partials};
use crate::laminar::{dispersion_residual, LaminarState};
use crate::real::{lit, Real};
use crate::residual::{interior_residual, surface_residual};
use crate::terms::eval_profile;

/// Default node count for single-grid mode solves.
pub const DEFAULT_MODE_NP: usize = 4096;
/// Node count (odd, for nested Richardson pairs) of defect measurements.
pub const DEFAULT_DEFECT_NP: usize = 4097;
/// Amplitude window for polynomial extraction.
pub const EXTRACT_B_MIN: f64 = 1e-3;
/// Upper end of the extraction window.
pub const EXTRACT_B_MAX: f64 = 5e-2;
/// Vandermonde solve residual above which a coefficient is flagged.
pub const CONDITIONING_WARN: f64 = 1e-8;

/// One vertical mode boundary-value problem, sampled on uniform p nodes
/// spanning `[p0, 0]` (both endpoints included).
#[derive(Debug, Clone)]
pub struct ModeBvp<F> {
    /// Fourier wavenumber n of the mode.
    pub mode: usize,
    /// Interior forcing f_n at the p nodes (length = node count ≥ 64).
    pub forcing_samples: Vec<F>,
    /// Robin datum g_n at the surface.
    pub robin_rhs: F,
}

impl<F: Real> ModeBvp<F> {
    pub fn new(mode: usize, forcing_samples: Vec<F>, robin_rhs: F) -> Result<Self> {
        if forcing_samples.len() < 64 {
            return Err(Error::InvalidInput(format!(
                "mode BVP needs at least 64 nodes, got {}",
                forcing_samples.len()
            )));
        }
        Ok(Self { mode, forcing_samples, robin_rhs })
    }

    pub fn np(&self) -> usize {
        self.forcing_samples.len()
    }
}

/// Uniform p nodes on `[p0, 0]`, both endpoints included.
pub fn uniform_p_nodes<F: Real>(p0: F, np: usize) -> Vec<F> {
    (0..np)
        .map(|j| p0 * (F::one() - lit::<F>(j as f64) / lit::<F>((np - 1) as f64)))
        .collect()
}

#[derive(Clone, Copy)]
enum SurfaceClosure<F> {
    Robin,
    Pin(F),
}

/// Solves a mode BVP with the Robin surface condition.
///
/// Discretization: centered second-order interior stencil; the Robin
/// condition is imposed through a ghost node with the interior equation
/// enforced at p = 0, keeping the scheme second order up to the boundary.
/// Returns nodal values including the pinned bed node. Errors with
/// [`Error::ResonantMode`] when the matrix is singular — expected for the
/// n = 1 mode at the bifurcation point (see [`measure_solvability_defect`]).
pub fn solve_mode_bvp<F: Real>(state: &LaminarState<F>, bvp: &ModeBvp<F>) -> Result<Vec<F>> {
    solve_with_closure(state, bvp.mode, &bvp.forcing_samples, SurfaceClosure::Robin, bvp.robin_rhs)
}

fn solve_with_closure<F: Real>(
    state: &LaminarState<F>,
    mode: usize,
    forcing: &[F],
    closure: SurfaceClosure<F>,
    robin_rhs: F,
) -> Result<Vec<F>> {
    let np = forcing.len();
    let p0 = state.params.p0;
    let gamma = state.params.gamma;
    let g = state.params.g;
    let dp = -p0 / lit::<F>((np - 1) as f64);
    let n2 = lit::<F>((mode * mode) as f64);
    let rob = g / state.sqrt_lambda().powi(3);

    // Unknowns u_1..u_{np-1}; the bed node u_0 = 0 is eliminated.
    let m = np - 1;
    let mut lo = vec![F::zero(); m];
    let mut di = vec![F::zero(); m];
    let mut up = vec![F::zero(); m];
    let mut rhs = vec![F::zero(); m];
    let inv_dp2 = F::one() / (dp * dp);
    let three_half = lit::<F>(1.5);

    for i in 0..m {
        let j = i + 1;
        let p = p0 + dp * lit::<F>(j as f64);
        let r = state.r_profile(p);
        let r2 = r * r;
        let drift = three_half * gamma / (r2 * dp);
        if j < np - 1 {
            lo[i] = inv_dp2 + drift;
            di[i] = -(inv_dp2 + inv_dp2) - n2 / r2;
            up[i] = inv_dp2 - drift;
            rhs[i] = forcing[j];
        } else {
            match closure {
                SurfaceClosure::Robin => {
                    // Ghost elimination: u_{J+1} = u_{J-1} + 2dp(rob·u_J + g_n)
                    // substituted into the interior equation at p = 0.
                    let ghost_weight = (dp + dp) * (inv_dp2 - drift);
                    lo[i] = inv_dp2 + inv_dp2;
                    di[i] = -(inv_dp2 + inv_dp2) - n2 / r2 + ghost_weight * rob;
                    rhs[i] = forcing[j] - ghost_weight * robin_rhs;
                }
                SurfaceClosure::Pin(pin) => {
                    di[i] = F::one();
                    rhs[i] = pin;
                }
            }
        }
    }

    // Elimination pivots: interior rows stay at ~0.5 of the row scale, and
    // the surviving Robin-row pivot shrinks like dp for non-resonant modes
    // but collapses like dp³ when the mode is resonant at λ*. A dp²-scaled
    // threshold therefore separates the two at every resolution.
    let pivot_rel = (dp / p0).powi(2);
    let interior = thomas(&lo, &di, &up, &rhs, mode, pivot_rel)?;
    let mut out = Vec::with_capacity(np);
    out.push(F::zero());
    out.extend(interior);
    Ok(out)
}

/// Tridiagonal (Thomas) solve with a singularity guard on the pivots.
fn thomas<F: Real>(
    lo: &[F],
    di: &[F],
    up: &[F],
    rhs: &[F],
    mode: usize,
    pivot_rel: F,
) -> Result<Vec<F>> {
    let m = di.len();
    let scale = di.iter().fold(F::zero(), |a, d| a.max(d.abs()));
    let tol = pivot_rel * scale;
    let mut c = vec![F::zero(); m];
    let mut d = vec![F::zero(); m];
    let mut piv = di[0];
    if piv.abs() <= tol {
        return Err(Error::ResonantMode { mode });
    }
    c[0] = up[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..m {
        piv = di[i] - lo[i] * c[i - 1];
        if piv.abs() <= tol {
            return Err(Error::ResonantMode { mode });
        }
        if i < m - 1 {
            c[i] = up[i] / piv;
        }
        d[i] = (rhs[i] - lo[i] * d[i - 1]) / piv;
    }
    let mut u = vec![F::zero(); m];
    u[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    Ok(u)
}

/// Robin defect `u'(0) − (g/λ*^{3/2})·u(0) − g_n` of a nodal solution,
/// using the one-sided second-order surface derivative.
pub fn robin_defect<F: Real>(state: &LaminarState<F>, solution: &[F], robin_rhs: F) -> F {
    let np = solution.len();
    let dp = -state.params.p0 / lit::<F>((np - 1) as f64);
    let j = np - 1;
    let d1 = (lit::<F>(3.0) * solution[j] - lit::<F>(4.0) * solution[j - 1] + solution[j - 2])
        / (dp + dp);
    let rob = state.params.g / state.sqrt_lambda().powi(3);
    d1 - rob * solution[j] - robin_rhs
}

// ---------------------------------------------------------------------------
// Polynomial extraction in b.
// ---------------------------------------------------------------------------

/// Which residual operator to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Interior,
    Surface,
}

/// An extracted b-coefficient with its linear-solve diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Extracted<F> {
    pub value: F,
    /// Relative residual of the Vandermonde solve.
    pub solve_residual: F,
    /// False when `solve_residual` exceeds the conditioning threshold.
    pub well_conditioned: bool,
}

/// Chebyshev-sampled Vandermonde fitter for polynomials in b, factored once
/// and applied to many right-hand sides.
struct PolyFit<F> {
    bs: Vec<F>,
    bmax: F,
    vand: Vec<Vec<F>>,
    lu: Vec<Vec<F>>,
    piv: Vec<usize>,
}

impl<F: Real> PolyFit<F> {
    /// `npts` Chebyshev points on the extraction window; fits degree
    /// `npts − 1` exactly.
    fn new(npts: usize) -> Self {
        let bmin = lit::<F>(EXTRACT_B_MIN);
        let bmax = lit::<F>(EXTRACT_B_MAX);
        let half = lit::<F>(0.5);
        let bs: Vec<F> = (0..npts)
            .map(|i| {
                let angle = F::PI() * (lit::<F>(i as f64) + half) / lit::<F>(npts as f64);
                bmin + (bmax - bmin) * half * (F::one() - angle.cos())
            })
            .collect();
        // Vandermonde in the scaled variable t = b/bmax for conditioning.
        let vand: Vec<Vec<F>> = bs
            .iter()
            .map(|&b| {
                let t = b / bmax;
                let mut row = Vec::with_capacity(npts);
                let mut tk = F::one();
                for _ in 0..npts {
                    row.push(tk);
                    tk = tk * t;
                }
                row
            })
            .collect();
        let (lu, piv) = lu_factor(vand.clone());
        Self { bs, bmax, vand, lu, piv }
    }

    /// Solves for all coefficients (in b, rescaled from t) and reports the
    /// relative residual of the solve.
    fn coefficients(&self, values: &[F]) -> (Vec<F>, F) {
        let x = lu_solve(&self.lu, &self.piv, values);
        // Residual in t-space against the unfactored matrix.
        let mut worst = F::zero();
        let mut scale = F::zero();
        for (row, &y) in self.vand.iter().zip(values) {
            let mut acc = F::zero();
            for (a, &xi) in row.iter().zip(&x) {
                acc += *a * xi;
            }
            worst = worst.max((acc - y).abs());
            scale = scale.max(y.abs());
        }
        let resid = if scale > F::zero() { worst / scale } else { worst };
        let mut coefs = Vec::with_capacity(x.len());
        let mut bk = F::one();
        for xi in x {
            coefs.push(xi / bk);
            bk = bk * self.bmax;
        }
        (coefs, resid)
    }
}

fn lu_factor<F: Real>(mut a: Vec<Vec<F>>) -> (Vec<Vec<F>>, Vec<usize>) {
    let n = a.len();
    let mut piv = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[best][k].abs() {
                best = i;
            }
        }
        a.swap(k, best);
        piv.push(best);
        let pk = a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / pk;
            a[i][k] = f;
            for j in k + 1..n {
                let upd = a[k][j];
                a[i][j] = a[i][j] - f * upd;
            }
        }
    }
    (a, piv)
}

fn lu_solve<F: Real>(lu: &[Vec<F>], piv: &[usize], rhs: &[F]) -> Vec<F> {
    let n = lu.len();
    let mut x = rhs.to_vec();
    // The stored multipliers live in final row order, so the interchanges
    // must all hit the right-hand side before the triangular solves.
    for k in 0..n {
        x.swap(k, piv[k]);
    }
    for k in 0..n {
        for i in k + 1..n {
            let xk = x[k];
            x[i] = x[i] - lu[i][k] * xk;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc = acc - lu[i][j] * x[j];
        }
        x[i] = acc / lu[i][i];
    }
    x
}

/// Extracts the coefficient of `b^power` in the pointwise residual of the
/// order-`order` expansion family at a fixed point.
///
/// The residual is an exact polynomial in b of degree ≤ 3·order, so
/// `3·order + 1` Chebyshev samples determine it completely. The surface
/// operator lives on p = 0; its `p` argument is ignored.
pub fn extract_b_coefficient<F: Real>(
    state: &LaminarState<F>,
    order: usize,
    btilde: F,
    operator: OperatorKind,
    power: usize,
    q: F,
    p: F,
) -> Result<Extracted<F>> {
    let degree = 3 * order;
    if power > degree {
        return Err(Error::InvalidInput(format!(
            "residual of an order-{order} expansion has degree {degree} in b; \
             cannot extract power {power}"
        )));
    }
    let fit = PolyFit::new(degree + 1);
    let gamma = state.params.gamma;
    let g = state.params.g;
    let q_head = state.q_star;
    let mut values = Vec::with_capacity(fit.bs.len());
    for &b in &fit.bs {
        let e = Expansion::new(*state, order, b, btilde)?;
        let v = match operator {
            OperatorKind::Interior => interior_residual(&e.partials(q, p), gamma),
            OperatorKind::Surface => {
                let pt = e.partials(q, F::zero());
                surface_residual(pt.h, pt.h_q, pt.h_p, q_head, g)
            }
        };
        values.push(v);
    }
    let (coefs, resid) = fit.coefficients(&values);
    Ok(Extracted {
        value: coefs[power],
        solve_residual: resid,
        well_conditioned: resid <= lit::<F>(CONDITIONING_WARN),
    })
}

/// Splits samples at q = 0 and q = π/3 into cos q and cos 3q amplitudes.
fn split_cos1_cos3<F: Real>(at_zero: F, at_third: F) -> (F, F) {
    let half = lit::<F>(0.5);
    let k3 = (half * at_zero - at_third) / lit::<F>(1.5);
    (at_zero - k3, k3)
}

/// Numerically reconstructs the third-order interior forcing profiles
/// (f₁, f₃) on the given p nodes: the b³ content of the interior residual
/// of the order-2 family, mode-split and sign-flipped. Together with
/// [`surface_b3_robin`] this supplies FD-solvable data for the third-order
/// modes without touching any third-order closed form.
pub fn interior_b3_forcing<F: Real>(
    state: &LaminarState<F>,
    p_nodes: &[F],
) -> Result<(Vec<F>, Vec<F>)> {
    let fit = PolyFit::new(7); // order-2 residual has degree 6
    let gamma = state.params.gamma;
    let third = F::PI() / lit::<F>(3.0);
    let nb = fit.bs.len();
    let npts = p_nodes.len();
    let mut at_zero = vec![vec![F::zero(); nb]; npts];
    let mut at_third = vec![vec![F::zero(); nb]; npts];
    for (ib, &b) in fit.bs.iter().enumerate() {
        let e = Expansion::new(*state, 2, b, F::zero())?;
        for (jp, &p) in p_nodes.iter().enumerate() {
            let row = e.height_row(p);
            at_zero[jp][ib] = interior_residual(&row.partials(F::zero()), gamma);
            at_third[jp][ib] = interior_residual(&row.partials(third), gamma);
        }
    }
    let mut f1 = Vec::with_capacity(npts);
    let mut f3 = Vec::with_capacity(npts);
    for jp in 0..npts {
        let (c0, _) = fit.coefficients(&at_zero[jp]);
        let (c3, _) = fit.coefficients(&at_third[jp]);
        let (k1, k3) = split_cos1_cos3(c0[3], c3[3]);
        f1.push(-k1);
        f3.push(-k3);
    }
    Ok((f1, f3))
}

/// Numerically reconstructs the third-order Robin data (g₁, g₃): the b³
/// content of the surface residual of the order-2 family equals
/// `2√λ*(g₁ cos q + g₃ cos 3q)`.
pub fn surface_b3_robin<F: Real>(state: &LaminarState<F>) -> Result<(F, F)> {
    let fit = PolyFit::new(7);
    let g = state.params.g;
    let q_head = state.q_star;
    let third = F::PI() / lit::<F>(3.0);
    let mut at_zero = Vec::with_capacity(fit.bs.len());
    let mut at_third = Vec::with_capacity(fit.bs.len());
    for &b in &fit.bs {
        let e = Expansion::new(*state, 2, b, F::zero())?;
        let row = e.height_row(F::zero());
        let pt0 = row.partials(F::zero());
        at_zero.push(surface_residual(pt0.h, pt0.h_q, pt0.h_p, q_head, g));
        let pt3 = row.partials(third);
        at_third.push(surface_residual(pt3.h, pt3.h_q, pt3.h_p, q_head, g));
    }
    let (c0, _) = fit.coefficients(&at_zero);
    let (c3, _) = fit.coefficients(&at_third);
    let (k1, k3) = split_cos1_cos3(c0[3], c3[3]);
    let two_sl = state.sqrt_lambda() + state.sqrt_lambda();
    Ok((k1 / two_sl, k3 / two_sl))
}

/// Measures the solvability defect of the third-order cos q mode.
///
/// The n = 1 Robin problem at the bifurcation point is resonant, so the
/// mode is solved with bed and surface pins only; the Robin functional of
/// that particular solution (invariant under adding the resonant
/// homogeneous mode) measures the obstruction. Scaled by −2√λ*, the value
/// at `b_free = 0` is −B̃₀; the auxiliary mode contributes linearly through
/// the closed-form surface gain, so the returned defect is
/// `−B̃₀ + gain·b_free`, vanishing at the annihilating parameter value.
///
/// All inputs to the solve (forcing and Robin datum) are reconstructed
/// numerically from the order-2 family, making this measurement independent
/// of every third-order closed form. Uses a nested Richardson pair, so `np`
/// must be odd (≥ 257).
pub fn measure_solvability_defect<F: Real>(
    state: &LaminarState<F>,
    b_free: F,
    np: usize,
) -> Result<F> {
    if np < 257 || np % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "defect measurement needs an odd node count ≥ 257, got {np}"
        )));
    }
    let p_fine = uniform_p_nodes(state.params.p0, np);
    let (f1_fine, _) = interior_b3_forcing(state, &p_fine)?;
    let (g1, _) = surface_b3_robin(state)?;

    let fine = solve_with_closure(state, 1, &f1_fine, SurfaceClosure::Pin(F::zero()), g1)?;
    let d_fine = robin_defect(state, &fine, g1);

    let f1_coarse: Vec<F> = f1_fine.iter().copied().step_by(2).collect();
    let coarse = solve_with_closure(state, 1, &f1_coarse, SurfaceClosure::Pin(F::zero()), g1)?;
    let d_coarse = robin_defect(state, &coarse, g1);

    let richardson = (lit::<F>(4.0) * d_fine - d_coarse) / lit::<F>(3.0);
    let sl = state.sqrt_lambda();
    Ok(-(sl + sl) * richardson + btilde_surface_gain(state) * b_free)
}

// ---------------------------------------------------------------------------
// Finite-difference partials.
// ---------------------------------------------------------------------------

/// Second-order one-sided/centered derivative of `f` at `p`, respecting the
/// strip `[p0, 0]`.
fn diff_p<F: Real>(f: impl Fn(F) -> F, p: F, step: F, p0: F) -> F {
    let two = step + step;
    if p + step <= F::zero() && p - step >= p0 {
        (f(p + step) - f(p - step)) / two
    } else if p + step > F::zero() {
        (lit::<F>(3.0) * f(p) - lit::<F>(4.0) * f(p - step) + f(p - two)) / two
    } else {
        (-lit::<F>(3.0) * f(p) + lit::<F>(4.0) * f(p + step) - f(p + two)) / two
    }
}

/// All partials by finite differences at one point.
///
/// First partials difference the height itself. Second partials difference
/// the exact first partials rather than taking second differences of the
/// height: at the mandated step sizes, second differences of h lose ~1e−4
/// of relative accuracy to cancellation, which would drown the closed forms
/// being verified. Each differentiation link (h → h_q, h_q → h_qq, …) is
/// still independently checked. q is periodic, so only p needs one-sided
/// stencils near the edges.
pub fn finite_difference_partials<F: Real>(
    expansion: &Expansion<F>,
    q: F,
    p: F,
    step: F,
) -> Partials<F> {
    let p0 = expansion.state.params.p0;
    let two = step + step;
    let h = |q: F, p: F| expansion.evaluate_height(q, p);

    let h_q = (h(q + step, p) - h(q - step, p)) / two;
    let h_p = diff_p(|pp| h(q, pp), p, step, p0);
    let h_qq =
        (expansion.partials(q + step, p).h_q - expansion.partials(q - step, p).h_q) / two;
    let h_qp = diff_p(|pp| expansion.partials(q, pp).h_q, p, step, p0);
    let h_pp = diff_p(|pp| expansion.partials(q, pp).h_p, p, step, p0);

    Partials { h: h(q, p), h_q, h_p, h_qq, h_qp, h_pp }
}

// ---------------------------------------------------------------------------
// Verification battery.
// ---------------------------------------------------------------------------

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Informational rows report reference-form discrepancies; they never
    /// fail the battery.
    pub informational: bool,
    pub detail: String,
}

/// Full verification report for one state.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub gamma: f64,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    /// True when every non-informational check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }
}

fn rel_max_err<F: Real>(fd: &[F], closed: &[F]) -> F {
    let scale = closed.iter().fold(F::zero(), |a, v| a.max(v.abs()));
    let worst = fd
        .iter()
        .zip(closed)
        .fold(F::zero(), |a, (x, y)| a.max((*x - *y).abs()));
    worst / scale
}

fn closed_mode_values<F: Real>(state: &LaminarState<F>, terms: &[crate::terms::Term<F>], p_nodes: &[F]) -> Vec<F> {
    p_nodes
        .iter()
        .map(|&p| eval_profile(terms, state.r_profile(p), state.laminar_height(p)))
        .collect()
}

/// Deterministic low-discrepancy points in the open strip (golden-ratio
/// lattice), used instead of a random source to keep reports reproducible.
fn lattice_points<F: Real>(p0: F, count: usize) -> Vec<(F, F)> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    const PHI2: f64 = 0.381_966_011_250_105_1;
    (0..count)
        .map(|i| {
            let a = ((i as f64 + 0.5) * PHI).fract();
            let b = ((i as f64 + 0.5) * PHI2).fract();
            let q = -F::PI() + (F::PI() + F::PI()) * lit::<F>(a);
            let p = p0 * lit::<F>(0.98 * b + 0.01);
            (q, p)
        })
        .collect()
}

fn check(checks: &mut Vec<CheckResult>, name: &'static str, passed: bool, detail: String) {
    checks.push(CheckResult { name, passed, informational: false, detail });
}

fn info(checks: &mut Vec<CheckResult>, name: &'static str, detail: String) {
    checks.push(CheckResult { name, passed: true, informational: true, detail });
}

/// Runs the full verification battery for one state: dispersion residual,
/// mode-BVP cross-checks against the closed second- and third-order
/// profiles, convergence-order measurement, forcing/Robin extraction against
/// the closed forms, solvability-defect measurements, finite-difference
/// derivative checks, and informational reports on the retained alternative
/// coefficient forms.
pub fn run_verification<F: Real>(state: &LaminarState<F>) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    let p0 = state.params.p0;
    let sl = state.sqrt_lambda();

    // Dispersion root closes its defining relation.
    let disp = dispersion_residual(&state.params, state.lambda_star)?.abs();
    check(
        &mut checks,
        "dispersion-root-residual",
        disp <= lit::<F>(1e-9) * state.lambda_star,
        format!("|residual| = {:.3e}", disp.as_f64()),
    );

    // Second-order modes: FD Robin solves against the closed profiles.
    // Richardson extrapolation over a step-halving pair removes the
    // leading truncation term, whose constant grows with |γ| and would
    // otherwise force a vorticity-dependent tolerance.
    let coeffs2 = second_order_coeffs(state)?;
    let forcing = second_order_forcing(state)?;
    let (u0_terms, u2_terms) = u_profiles(state, &coeffs2);
    let fine_nodes = uniform_p_nodes(p0, DEFAULT_DEFECT_NP);
    let coarse_nodes = uniform_p_nodes(p0, (DEFAULT_DEFECT_NP + 1) / 2);
    for (name, mode, terms, g_n) in [
        ("mean-mode-bvp-match", 0usize, &u0_terms, forcing.g0),
        ("cos2q-mode-bvp-match", 2usize, &u2_terms, forcing.g2),
    ] {
        let f_at = |p: &F| if mode == 0 { forcing.f0(*p) } else { forcing.f2(*p) };
        let fd_fine =
            solve_mode_bvp(state, &ModeBvp::new(mode, fine_nodes.iter().map(f_at).collect(), g_n)?)?;
        let fd_coarse = solve_mode_bvp(
            state,
            &ModeBvp::new(mode, coarse_nodes.iter().map(f_at).collect(), g_n)?,
        )?;
        let rich: Vec<F> = (0..coarse_nodes.len())
            .map(|j| (lit::<F>(4.0) * fd_fine[2 * j] - fd_coarse[j]) / lit::<F>(3.0))
            .collect();
        let closed = closed_mode_values(state, terms, &coarse_nodes);
        let err = rel_max_err(&rich, &closed);
        check(
            &mut checks,
            name,
            err <= lit::<F>(1e-6),
            format!(
                "Richardson max relative error {:.3e} (np {}/{})",
                err.as_f64(),
                DEFAULT_DEFECT_NP,
                (DEFAULT_DEFECT_NP + 1) / 2
            ),
        );
    }

    // Grid-convergence order of the mode solver (n = 2, np halving).
    {
        let mut errs = Vec::new();
        for np in [1025usize, 2049] {
            let nodes = uniform_p_nodes(p0, np);
            let f: Vec<F> = nodes.iter().map(|&p| forcing.f2(p)).collect();
            let fd = solve_mode_bvp(state, &ModeBvp::new(2, f, forcing.g2)?)?;
            let closed = closed_mode_values(state, &u2_terms, &nodes);
            errs.push(rel_max_err(&fd, &closed));
        }
        let ratio = (errs[0] / errs[1]).as_f64();
        check(
            &mut checks,
            "mode-bvp-convergence-ratio",
            (ratio - 4.0).abs() <= 0.3,
            format!("error ratio under step halving = {ratio:.3}"),
        );
    }

    // Second-order forcing and Robin data recovered by extraction.
    {
        let mut worst = F::zero();
        for &p in &[p0 * lit::<F>(0.85), p0 * lit::<F>(0.4), p0 * lit::<F>(0.05)] {
            let at0 = extract_b_coefficient(state, 1, F::zero(), OperatorKind::Interior, 2, F::zero(), p)?;
            let at2 = extract_b_coefficient(
                state,
                1,
                F::zero(),
                OperatorKind::Interior,
                2,
                F::PI() / lit::<F>(2.0),
                p,
            )?;
            // cos(0)=1 pairs f0+f2; cos(π) pairs f0−f2 at q=π/2 since the
            // b² content is f0 + f2·cos 2q.
            let k0 = (at0.value + at2.value) / lit::<F>(2.0);
            let k2 = (at0.value - at2.value) / lit::<F>(2.0);
            let scale = forcing.f0(p).abs().max(forcing.f2(p).abs());
            worst = worst
                .max((k0 + forcing.f0(p)).abs() / scale)
                .max((k2 + forcing.f2(p)).abs() / scale);
        }
        // Surface: b² content is 2√λ(g0 + g2·cos 2q).
        let s0 = extract_b_coefficient(state, 1, F::zero(), OperatorKind::Surface, 2, F::zero(), F::zero())?;
        let s2 = extract_b_coefficient(
            state,
            1,
            F::zero(),
            OperatorKind::Surface,
            2,
            F::PI() / lit::<F>(2.0),
            F::zero(),
        )?;
        let k0 = (s0.value + s2.value) / lit::<F>(2.0) / (sl + sl);
        let k2 = (s0.value - s2.value) / lit::<F>(2.0) / (sl + sl);
        let scale = forcing.g0.abs().max(forcing.g2.abs());
        worst = worst
            .max((k0 - forcing.g0).abs() / scale)
            .max((k2 - forcing.g2).abs() / scale);
        check(
            &mut checks,
            "second-order-forcing-closed-form",
            worst <= lit::<F>(1e-8),
            format!("max relative deviation {:.3e}", worst.as_f64()),
        );
    }

    // Construction kills the b⁰ and b¹ residual content.
    {
        let q = lit::<F>(0.7);
        let p = p0 * lit::<F>(0.3);
        let mut worst = F::zero();
        for power in [0usize, 1] {
            let c = extract_b_coefficient(state, 2, F::zero(), OperatorKind::Interior, power, q, p)?;
            worst = worst.max(c.value.abs());
        }
        check(
            &mut checks,
            "low-power-residual-content-vanishes",
            worst <= lit::<F>(1e-9),
            format!("max |coefficient| {:.3e}", worst.as_f64()),
        );
    }

    // Third-order machinery: numerically reconstructed forcing and Robin
    // data drive FD solves of both modes.
    let coeffs3 = third_order_coeffs(state)?;
    let np = DEFAULT_DEFECT_NP;
    let fine_nodes = uniform_p_nodes(p0, np);
    let (f1_fine, f3_fine) = interior_b3_forcing(state, &fine_nodes)?;
    let (g1_num, g3_num) = surface_b3_robin(state)?;

    // cos 3q mode: non-resonant, Robin-solvable, defect-free, and matching
    // the closed profile.
    {
        let fd_fine = solve_mode_bvp(state, &ModeBvp::new(3, f3_fine.clone(), g3_num)?)?;
        let f3_coarse: Vec<F> = f3_fine.iter().copied().step_by(2).collect();
        let fd_coarse = solve_mode_bvp(state, &ModeBvp::new(3, f3_coarse, g3_num)?)?;
        let d_fine = robin_defect(state, &fd_fine, g3_num);
        let d_coarse = robin_defect(state, &fd_coarse, g3_num);
        let defect = ((lit::<F>(4.0) * d_fine - d_coarse) / lit::<F>(3.0)).abs();
        // The defect is a linear functional of the data (f₃, g₃), whose
        // magnitude varies over six orders across the vorticity range, so
        // the check is relative to the data scale.
        let data_scale = g3_num.abs()
            + f3_fine.iter().fold(F::zero(), |a, v| a.max(v.abs()));
        check(
            &mut checks,
            "cos3q-mode-defect-free",
            defect <= lit::<F>(1e-6) * data_scale,
            format!(
                "Robin defect {:.3e} against data scale {:.3e}",
                defect.as_f64(),
                data_scale.as_f64()
            ),
        );

        let (_, w3_terms) = w_profiles(state, &coeffs3, F::zero());
        let coarse_nodes = uniform_p_nodes(p0, (np + 1) / 2);
        let closed = closed_mode_values(state, &w3_terms, &coarse_nodes);
        let rich: Vec<F> = (0..coarse_nodes.len())
            .map(|j| (lit::<F>(4.0) * fd_fine[2 * j] - fd_coarse[j]) / lit::<F>(3.0))
            .collect();
        let err = rel_max_err(&rich, &closed);
        check(
            &mut checks,
            "cos3q-profile-via-bvp",
            err <= lit::<F>(1e-6),
            format!("max relative error {:.3e}", err.as_f64()),
        );
    }

    // cos q mode: resonant through the Robin closure...
    {
        let robin_attempt =
            solve_mode_bvp(state, &ModeBvp::new(1, f1_fine.clone(), g1_num)?);
        check(
            &mut checks,
            "cosq-robin-solve-is-resonant",
            matches!(robin_attempt, Err(Error::ResonantMode { mode: 1 })),
            format!("Robin solve returned {}", match &robin_attempt {
                Err(e) => format!("error: {e}"),
                Ok(_) => "a solution".to_string(),
            }),
        );

        // ...its pinned solve matches the closed profile (pin chosen to kill
        // the homogeneous component of the difference)...
        let (w1_terms, _) = w_profiles(state, &coeffs3, F::zero());
        let pin = eval_profile(&w1_terms, sl, state.laminar_height(F::zero()));
        let fd_fine = solve_with_closure(state, 1, &f1_fine, SurfaceClosure::Pin(pin), g1_num)?;
        let f1_coarse: Vec<F> = f1_fine.iter().copied().step_by(2).collect();
        let fd_coarse = solve_with_closure(state, 1, &f1_coarse, SurfaceClosure::Pin(pin), g1_num)?;
        let m_terms = m_profile(state);
        let m0 = eval_profile(&m_terms, sl, state.laminar_height(F::zero()));
        let coarse_nodes = uniform_p_nodes(p0, (np + 1) / 2);
        let closed = closed_mode_values(state, &w1_terms, &coarse_nodes);
        let rich: Vec<F> = (0..coarse_nodes.len())
            .map(|j| (lit::<F>(4.0) * fd_fine[2 * j] - fd_coarse[j]) / lit::<F>(3.0))
            .collect();
        // The pinned solves may pick up a homogeneous multiple that the
        // surface pin suppresses only to O(dp²); project it out against the
        // resonant mode before comparing.
        let m_vals = closed_mode_values(state, &m_terms, &coarse_nodes);
        let alpha = {
            let mut num = F::zero();
            let mut den = F::zero();
            for (j, &mv) in m_vals.iter().enumerate() {
                num += (rich[j] - closed[j]) * mv;
                den += mv * mv;
            }
            num / den
        };
        let adjusted: Vec<F> = rich
            .iter()
            .zip(&m_vals)
            .map(|(&v, &mv)| v - alpha * mv)
            .collect();
        let err = rel_max_err(&adjusted, &closed);
        check(
            &mut checks,
            "cosq-profile-via-pinned-bvp",
            err <= lit::<F>(1e-6),
            format!(
                "max relative error {:.3e} (homogeneous multiple {:.3e} removed, m(0)≈{:.3})",
                err.as_f64(),
                alpha.as_f64(),
                m0.as_f64()
            ),
        );

        // ...its Robin functional is invariant under homogeneous shifts...
        let d_base = robin_defect(state, &fd_fine, g1_num);
        let shift = eval_profile(&m_terms, sl, state.laminar_height(F::zero())).abs();
        let shifted: Vec<F> = fd_fine
            .iter()
            .zip(closed_mode_values(state, &m_terms, &fine_nodes))
            .map(|(&u, mv)| u + shift * mv)
            .collect();
        let d_shift = robin_defect(state, &shifted, g1_num);
        let drift = (d_shift - d_base).abs() / d_base.abs().max(lit::<F>(1e-12));
        check(
            &mut checks,
            "robin-defect-homogeneous-invariance",
            drift <= lit::<F>(1e-3),
            format!("relative drift {:.3e} under a homogeneous shift", drift.as_f64()),
        );
    }

    // The measured defect equals −B̃₀ and is annihilated by the predicted
    // auxiliary parameter value.
    {
        let measured = measure_solvability_defect(state, F::zero(), np)?;
        let err = (measured + coeffs3.btilde0).abs() / coeffs3.btilde0.abs();
        check(
            &mut checks,
            "cosq-defect-matches-solvability-constant",
            err <= lit::<F>(0.01),
            format!(
                "measured {:.6e} vs −B̃₀ = {:.6e} (relative error {:.3e})",
                measured.as_f64(),
                -coeffs3.btilde0.as_f64(),
                err.as_f64()
            ),
        );
        let annihilating = coeffs3.btilde0 / btilde_surface_gain(state);
        let at_star = measure_solvability_defect(state, annihilating, np)?;
        check(
            &mut checks,
            "defect-linear-in-auxiliary-parameter",
            at_star.abs() <= lit::<F>(0.01) * coeffs3.btilde0.abs(),
            format!(
                "defect at annihilating parameter {:.3e} (scale {:.3e})",
                at_star.as_f64(),
                coeffs3.btilde0.as_f64()
            ),
        );
    }

    // Finite-difference partials cross-check at lattice points.
    {
        let e = Expansion::new(*state, 3, lit::<F>(0.02), coeffs3.btilde0 / btilde_surface_gain(state))?;
        let step = lit::<F>(1e-5);
        let mut worst = F::zero();
        for (q, p) in lattice_points(p0, 100) {
            let an = e.partials(q, p);
            let fd = finite_difference_partials(&e, q, p, step);
            for (a, f) in [
                (an.h_q, fd.h_q),
                (an.h_p, fd.h_p),
                (an.h_qq, fd.h_qq),
                (an.h_qp, fd.h_qp),
                (an.h_pp, fd.h_pp),
            ] {
                worst = worst.max((a - f).abs() / a.abs().max(F::one()));
            }
        }
        check(
            &mut checks,
            "derivative-stencils-match-analytic",
            worst <= lit::<F>(1e-6),
            format!("max relative error {:.3e} at step 1e-5", worst.as_f64()),
        );

        // Convergence order of the stencils themselves (truncation regime).
        let (q, p) = (lit::<F>(0.9), p0 * lit::<F>(0.45));
        let an = e.partials(q, p);
        let err_at = |s: f64| {
            let fd = finite_difference_partials(&e, q, p, lit::<F>(s));
            (fd.h_p - an.h_p).abs()
        };
        let ratio = (err_at(2e-3) / err_at(1e-3)).as_f64();
        check(
            &mut checks,
            "derivative-stencil-convergence",
            (ratio - 4.0).abs() <= 0.3,
            format!("error ratio under step halving = {ratio:.3}"),
        );
    }

    // Informational: quantify the retained alternative coefficient forms.
    {
        let rational = coeffs3.btilde0_rational_form(state);
        let dev = (rational - coeffs3.btilde0).abs() / coeffs3.btilde0.abs();
        info(
            &mut checks,
            "rational-solvability-form-report",
            format!(
                "rational form {:.6e} deviates from reconstructed B̃₀ {:.6e} by {:.3e} relative",
                rational.as_f64(),
                coeffs3.btilde0.as_f64(),
                dev.as_f64()
            ),
        );
        let (alt1, alt2) = crate::coeffs::alternate_cos3q_candidates(&state.params)?;
        let d1 = coeffs3.irrotational.d1;
        let d2 = coeffs3.irrotational.d2;
        info(
            &mut checks,
            "alternate-cos3q-candidates-report",
            format!(
                "alternates ({:.6e}, {:.6e}) vs reconstructed ({:.6e}, {:.6e})",
                alt1.as_f64(),
                alt2.as_f64(),
                d1.as_f64(),
                d2.as_f64()
            ),
        );
    }

    Ok(VerificationReport { gamma: state.params.gamma.as_f64(), checks })
}
