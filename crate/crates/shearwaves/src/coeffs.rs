//! Closed-form expansion coefficients: second-order constants, the
//! third-order coefficient tables, the solvability constant B̃₀, and the
//! irrotational reference values.
//!
//! Everything here is plain algebra in (γ, λ*, p0, g). Two conventions make
//! the formulas uniform in γ:
//!
//! * every hyperbolic argument is written via the laminar height
//!   `H(p) = −(r(p) − r0)/γ`, which removes all 0/0 expressions at γ = 0;
//! * the pair of cosh-profile coefficients that individually diverge as
//!   γ → 0 is replaced by the single finite combination stored in `b14_h`
//!   (the coefficient of `H·cosh(H)·r⁻²`), using the exact identity
//!   `b₁₃r³ + b₁₄r⁴ = −(γ b₁₄)·H·r³`.
//!
//! The solvability constant `btilde0` is computed from first principles as
//! the Robin-functional mismatch of the third-order cos q mode,
//! `B̃₀ = 2√λ*·(𝓡[w̃₁] − g₁)`, where `𝓡[P] = P′(0) − (g/λ*^{3/2})P(0)` and
//! `g₁` is the closed-form cos q Robin datum. A rational form of B̃₀
//! assembled from `d_factor` and `c_poly` circulates as well; it is retained
//! verbatim for reference and reporting, but it disagrees with the Robin
//! route (and with direct numerical reconstruction, see the oracle module),
//! so the library never evaluates expansions with it.

use crate::error::{Error, Result};
use crate::laminar::{solve_dispersion, FlowParams, LaminarState};
use crate::real::{lit, Real};
use crate::terms::{diff_profile, eval_profile, Kind, Term};

/// Relative threshold below which a coefficient denominator counts as zero.
const DENOM_REL_FLOOR: f64 = 1e-12;

/// Errors out with the denominator's name if `value` has cancelled down to
/// the rounding floor of its constituent `scale`.
fn guard<F: Real>(name: &'static str, value: F, scale: F) -> Result<F> {
    if value.abs() <= lit::<F>(DENOM_REL_FLOOR) * scale.abs() {
        Err(Error::SingularCoefficient { name })
    } else {
        Ok(value)
    }
}

/// Second-order coefficients: rotational C₀, C₂ plus the irrotational
/// reference constants A₀, A₂.
///
/// The irrotational values are evaluated at the irrotational bifurcation
/// root λ₀*(p0, g) — the only λ at which they are meaningful — so they are
/// well-defined regardless of the state's vorticity. At γ = 0 the state's
/// root coincides with λ₀* and the exact identities `C₀ = A₀` and
/// `C₂·√λ* + 1/4 = A₂` hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCoeffs<F> {
    /// Mean-mode coefficient C₀ (multiplies `H/r` in u₀).
    pub c0: F,
    /// cos 2q coefficient C₂ (multiplies `sinh(2H)/r` in u₂).
    pub c2: F,
    /// Irrotational mean-mode constant A₀ at λ₀*.
    pub a0_irr: F,
    /// Irrotational cos 2q constant A₂ at λ₀*.
    pub a2_irr: F,
}

/// Computes the second-order coefficients for a bifurcation state.
pub fn second_order_coeffs<F: Real>(state: &LaminarState<F>) -> Result<SecondOrderCoeffs<F>> {
    let FlowParams { gamma, p0, g } = state.params;
    let lam = state.lambda_star;
    let sl = state.sqrt_lambda();
    let r0 = state.r0;

    let delta = guard(
        "(g - gamma*sqrt(lambda))^2 - lambda^2",
        (g - gamma * sl).powi(2) - lam * lam,
        (g - gamma * sl).powi(2) + lam * lam,
    )?;
    let bed = guard(
        "2*g*p0 + r0*sqrt(lambda)*(r0 + sqrt(lambda))",
        (g + g) * p0 + r0 * sl * (r0 + sl),
        ((g + g) * p0).abs() + r0 * sl * (r0 + sl),
    )?;

    let c0 = sl * (lit::<F>(3.0) * g * (g - gamma * sl) + lam * (gamma * gamma - lam))
        * (r0 + sl)
        / (lit::<F>(4.0) * delta * bed);
    let c2 = (lit::<F>(3.0) * g * (g - gamma * sl)
        + lam * (gamma * gamma - lit::<F>(3.0) * lam))
        / (lit::<F>(8.0) * sl.powi(5));

    let (a0_irr, a2_irr) = irrotational_second_order(&state.params)?;
    Ok(SecondOrderCoeffs { c0, c2, a0_irr, a2_irr })
}

/// A₀, A₂ at the irrotational bifurcation root of the same (p0, g).
fn irrotational_second_order<F: Real>(params: &FlowParams<F>) -> Result<(F, F)> {
    let irr = FlowParams { gamma: F::zero(), ..*params };
    let lam = solve_dispersion(&irr)?;
    let g = params.g;
    let p0 = params.p0;
    let g2l2 = guard("g^2 - lambda^2", g * g - lam * lam, g * g + lam * lam)?;
    let gp0 = guard(
        "g*p0 + lambda^(3/2)",
        g * p0 + lam.sqrt().powi(3),
        (g * p0).abs() + lam.sqrt().powi(3),
    )?;
    let a0 = lam / lit::<F>(4.0) * (lit::<F>(3.0) * g * g - lam * lam) / (g2l2 * gp0);
    let a2 = (lit::<F>(3.0) * g * g - lam * lam) / (lit::<F>(8.0) * lam * lam);
    Ok((a0, a2))
}

/// Interior forcing profiles and Robin data of the second-order modes:
/// the right-hand sides of the mean (n = 0) and cos 2q (n = 2) boundary-value
/// problems that the closed-form u₀, u₂ solve.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderForcing<F> {
    state: LaminarState<F>,
    /// Robin datum of the mean mode.
    pub g0: F,
    /// Robin datum of the cos 2q mode.
    pub g2: F,
}

impl<F: Real> SecondOrderForcing<F> {
    /// Interior forcing of the mean mode, f₀(p).
    pub fn f0(&self, p: F) -> F {
        let gamma = self.state.params.gamma;
        let r = self.state.r_profile(p);
        let h2 = (self.state.laminar_height(p) + self.state.laminar_height(p)).sinh();
        let c2 = (self.state.laminar_height(p) + self.state.laminar_height(p)).cosh();
        let r0 = self.state.r0;
        let three = lit::<F>(3.0);
        let two = lit::<F>(2.0);
        r0 * r0 / (lit::<F>(4.0) * r.powi(7))
            * (-three * gamma.powi(3)
                + three * gamma * (gamma * gamma + two * r * r) * c2
                + two * r * (three * gamma * gamma + two * r * r) * h2)
    }

    /// Interior forcing of the cos 2q mode, f₂(p).
    pub fn f2(&self, p: F) -> F {
        let gamma = self.state.params.gamma;
        let r = self.state.r_profile(p);
        let h2 = (self.state.laminar_height(p) + self.state.laminar_height(p)).sinh();
        let c2 = (self.state.laminar_height(p) + self.state.laminar_height(p)).cosh();
        let r0 = self.state.r0;
        let three = lit::<F>(3.0);
        gamma / lit::<F>(4.0) * (r0 * r0 / r.powi(7))
            * (lit::<F>(2.0) * r * r - three * gamma * gamma
                + (three * gamma * gamma + lit::<F>(4.0) * r * r) * c2
                + lit::<F>(6.0) * gamma * r * h2)
    }
}

/// Assembles the second-order forcing data for a state.
pub fn second_order_forcing<F: Real>(state: &LaminarState<F>) -> Result<SecondOrderForcing<F>> {
    let FlowParams { gamma, g, .. } = state.params;
    let lam = state.lambda_star;
    let sl = state.sqrt_lambda();
    let r0 = state.r0;
    let delta = guard(
        "(g - gamma*sqrt(lambda))^2 - lambda^2",
        (g - gamma * sl).powi(2) - lam * lam,
        (g - gamma * sl).powi(2) + lam * lam,
    )?;
    let base = r0 * r0 / (lit::<F>(4.0) * sl.powi(3));
    let g0 = base * (lit::<F>(3.0) * g * g + lam * lam) / delta;
    let g2 = base * (lit::<F>(3.0) * g * g - lam * lam) / delta;
    Ok(SecondOrderForcing { state: *state, g0, g2 })
}

/// Irrotational third-order reference constants at λ₀*(p0, g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrrotationalCoeffs<F> {
    /// H·cosh(H) coefficient B₁ of the cos q part.
    pub b1: F,
    /// sinh(3H) coefficient B₂ of the cos q part.
    pub b2: F,
    /// sinh(H) coefficient D₁ of the cos 3q part.
    pub d1: F,
    /// sinh(3H) coefficient D₂ of the cos 3q part.
    pub d2: F,
    /// Solvability constant B₀ of the cos q surface defect.
    pub b0: F,
}

/// Third-order data: the rotational coefficient tables, the reformulated
/// cosh pair `b14_h`, the solvability constant B̃₀ (Robin route), the
/// rational-form ingredients `d_factor`/`c_poly` retained for reference,
/// and the irrotational reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrderCoeffs<F> {
    /// sinh-profile coefficients a_{j,n}: rows j = 1..4 map to
    /// (sinh(H)cos q, sinh(3H)cos q, sinh(H)cos 3q, sinh(3H)cos 3q);
    /// columns n = 0..4 are powers of r in Σ a_{j,n}·rⁿ/r⁵.
    pub a_table: [[F; 5]; 4],
    /// cosh-profile coefficients b_{j,n} with the same layout. The row-1
    /// entries at n = 3, 4 are individually singular at γ = 0 and are stored
    /// for reference only (zeroed at γ = 0); evaluation always goes through
    /// `b14_h`.
    pub b_table: [[F; 5]; 4],
    /// Coefficient of `H·cosh(H)·r⁻²` in the cos q profile: the finite
    /// reformulation γ·b₁₄ of the (b₁₃, b₁₄) pair.
    pub b14_h: F,
    /// Solvability constant B̃₀ from the Robin-functional route.
    pub btilde0: F,
    /// Prefactor D of the rational B̃₀ form (reference only).
    pub d_factor: F,
    /// Vorticity polynomial c₀..c₅ of the rational B̃₀ form (reference only).
    pub c_poly: [F; 6],
    /// Irrotational reference constants at λ₀*(p0, g).
    pub irrotational: IrrotationalCoeffs<F>,
}

impl<F: Real> ThirdOrderCoeffs<F> {
    /// Evaluates the rational form `D·(Σ c_n γⁿ)/Δ` of B̃₀.
    ///
    /// Retained for reporting: this form disagrees with the Robin route and
    /// with direct numerical reconstruction (it even fails its own γ → 0
    /// reduction to B₀), so `btilde0` is authoritative.
    pub fn btilde0_rational_form(&self, state: &LaminarState<F>) -> F {
        let FlowParams { gamma, g, .. } = state.params;
        let lam = state.lambda_star;
        let delta = (g - gamma * state.sqrt_lambda()).powi(2) - lam * lam;
        let mut horner = self.c_poly[5];
        for n in (0..5).rev() {
            horner = self.c_poly[n] + gamma * horner;
        }
        self.d_factor * horner / delta
    }
}

/// Computes the full third-order coefficient set for a state.
pub fn third_order_coeffs<F: Real>(state: &LaminarState<F>) -> Result<ThirdOrderCoeffs<F>> {
    let FlowParams { gamma, p0, g } = state.params;
    let lam = state.lambda_star;
    let sl = state.sqrt_lambda();
    let r0 = state.r0;
    let r03 = r0.powi(3);
    let sl3 = sl.powi(3); // λ^{3/2}
    let sl5 = sl.powi(5); // λ^{5/2}

    let delta = guard(
        "(g - gamma*sqrt(lambda))^2 - lambda^2",
        (g - gamma * sl).powi(2) - lam * lam,
        (g - gamma * sl).powi(2) + lam * lam,
    )?;
    let bed = guard(
        "2*g*p0 + r0*sqrt(lambda)*(r0 + sqrt(lambda))",
        (g + g) * p0 + r0 * sl * (r0 + sl),
        ((g + g) * p0).abs() + r0 * sl * (r0 + sl),
    )?;
    let gms = guard("g - gamma*sqrt(lambda)", g - gamma * sl, g)?;

    // Recurring cubic factors.
    let n_core = lit::<F>(3.0) * g * g - lit::<F>(3.0) * g * gamma * sl
        + (gamma * gamma - lam) * lam;
    let x_core = lit::<F>(3.0) * g * g - lit::<F>(3.0) * g * gamma * sl
        + (gamma * gamma - lit::<F>(3.0) * lam) * lam;

    let c = |x: f64| lit::<F>(x);
    let mut a = [[F::zero(); 5]; 4];
    let mut b = [[F::zero(); 5]; 4];

    // Row 1: sinh(H) cos q.
    a[0][0] = -c(9.0 / 32.0) * gamma * gamma * r03;
    // The n = 2 entry in the form with the γ-cancellation carried out
    // exactly (the raw quotient is 0/0 at γ = 0).
    let n12 = c(6.0) * g * p0 * (g * g - lam * lam) / (r0 + sl) - c(6.0) * g * g * lam
        + c(3.0) * g * gamma * sl3
        + r0 * (-c(15.0) * g * g * sl + c(5.0) * sl5 - c(5.0) * gamma * gamma * sl3
            + c(15.0) * g * gamma * lam);
    a[0][2] = -r03 * n12 * (r0 + sl) / (c(32.0) * bed * delta);
    a[0][3] = -r03 * x_core / (c(32.0) * sl5);
    b[0][1] = -c(9.0 / 32.0) * gamma * r03;
    b[0][2] = -gamma * r03 * x_core / (c(32.0) * sl5);
    // γ·b₁₄ with the identity g·r0 − (g + γr0)√λ = −γ·bed/(r0 + √λ) applied.
    let b14_h = -r03 * sl * n_core * (r0 + sl) / (c(4.0) * bed * delta);
    if gamma != F::zero() {
        // Raw (b₁₃, b₁₄) pair, well-defined only away from γ = 0.
        let den = c(4.0) * (g * r0 - (g + gamma * r0) * sl) * delta;
        b[0][3] = -r0.powi(4) * sl * n_core / den;
        b[0][4] = r03 * sl * n_core / den;
    }

    // Row 2: sinh(3H) cos q.
    a[1][0] = c(3.0 / 32.0) * gamma * gamma * r03;
    a[1][2] = c(9.0 / 32.0) * r03;
    a[1][3] = c(3.0) * r03 * x_core / (c(32.0) * sl5);
    b[1][1] = c(9.0 / 32.0) * gamma * r03;
    b[1][2] = gamma * r03 * x_core / (c(32.0) * sl5);

    // Row 3: sinh(H) cos 3q.
    a[2][0] = -c(3.0 / 32.0) * gamma * gamma * r03;
    a[2][2] = -r03 / c(32.0);
    a[2][3] = -r03 * x_core / (c(32.0) * sl5);
    b[2][1] = -c(3.0 / 32.0) * gamma * r03;
    b[2][2] = -gamma * r03 * x_core / (c(32.0) * sl5);

    // Row 4: sinh(3H) cos 3q.
    a[3][0] = c(1.0 / 32.0) * gamma * gamma * r03;
    a[3][2] = c(3.0 / 32.0) * r03;
    a[3][3] = c(3.0) * r03 * x_core / (c(32.0) * sl5);
    a[3][4] = r03
        * (c(9.0) * g.powi(5) - c(27.0) * g.powi(4) * gamma * sl
            + c(11.0) * g.powi(3) * (c(3.0) * gamma * gamma - c(2.0) * lam) * lam
            - g * g * gamma * (c(21.0) * gamma * gamma - c(50.0) * lam) * sl3
            + g * lam * lam
                * (c(7.0) * gamma.powi(4) - c(35.0) * gamma * gamma * lam
                    + c(13.0) * lam * lam)
            - gamma * sl5 * (gamma.powi(4) - c(9.0) * gamma * gamma * lam
                + c(15.0) * lam * lam))
        / (c(64.0) * gms * lam.powi(5));
    b[3][1] = c(3.0 / 32.0) * gamma * r03;
    b[3][2] = gamma * r03 * x_core / (c(32.0) * sl5);

    // Rational-form B̃₀ ingredients, retained verbatim for reference.
    let d_factor = -(r0 + sl) / (c(4.0) * sl.powi(7) * bed);
    let l2 = lam * lam;
    let c_poly = [
        c(3.0) * g * sl * (c(9.0) * g.powi(4) - c(14.0) * g * g * l2 + c(5.0) * l2 * l2)
            - c(4.0) * g * sl * r0
                * (c(9.0) * g.powi(4) - c(9.0) * g * g * l2 + c(4.0) * l2 * l2)
            - (p0 + p0) / (sl + r0)
                * (c(9.0) * g.powi(6) - c(12.0) * g.powi(4) * l2
                    + c(13.0) * g * g * l2 * l2
                    - c(2.0) * l2 * l2 * l2),
        -sl3 * (c(33.0) * g.powi(4) - c(39.0) * g * g * l2 + c(4.0) * l2 * l2)
            - r0 * (-c(60.0) * g.powi(4) * lam + c(45.0) * g * g * lam.powi(3)
                - c(7.0) * lam.powi(5)),
        -c(3.0)
            * (-c(7.0) * g.powi(3) * l2 + c(5.0) * g * l2 * l2
                + c(2.0) * g * r0 * sl3 * (c(9.0) * g * g - c(4.0) * l2)),
        -sl5 * (c(7.0) * g * g - c(2.0) * l2) - r0 * (-c(28.0) * g * g * l2 + c(5.0) * l2 * l2),
        -c(8.0) * g * r0 * sl5 + g * lam.powi(3),
        r0 * lam.powi(3),
    ];

    let irrotational = irrotational_third_order(&state.params)?;

    let mut coeffs = ThirdOrderCoeffs {
        a_table: a,
        b_table: b,
        b14_h,
        btilde0: F::zero(),
        d_factor,
        c_poly,
        irrotational,
    };
    coeffs.btilde0 = btilde0_robin_route(state, &coeffs)?;
    Ok(coeffs)
}

/// Irrotational reference constants, evaluated at λ₀*(p0, g).
fn irrotational_third_order<F: Real>(params: &FlowParams<F>) -> Result<IrrotationalCoeffs<F>> {
    let irr = FlowParams { gamma: F::zero(), ..*params };
    let lam = solve_dispersion(&irr)?;
    let g = params.g;
    let p0 = params.p0;
    let c = |x: f64| lit::<F>(x);
    let l2 = lam * lam;
    let g2 = g * g;

    let g2l2 = guard("g^2 - lambda^2", g2 - l2, g2 + l2)?;
    if g2l2 <= F::zero() {
        return Err(Error::Domain {
            quantity: "g^2 - lambda^2",
            detail: "irrotational constants require lambda < g".into(),
        });
    }
    let gp0 = guard(
        "g*p0 + lambda^(3/2)",
        g * p0 + lam.sqrt().powi(3),
        (g * p0).abs() + lam.sqrt().powi(3),
    )?;

    let b1 = lam / c(4.0) * (c(3.0) * g2 - l2) / (g2l2 * gp0);
    let b2 = c(9.0) * g2 / (c(32.0) * l2);
    let d1 = -(c(3.0) * g2 - c(2.0) * l2) / (c(32.0) * l2);
    let d2 = c(3.0 / 32.0) + c(9.0) * (g2 - l2) / (c(32.0) * l2)
        + (c(9.0) * g2 - c(13.0) * l2) * (g2 - l2) / (c(64.0) * l2 * l2);
    let b0 = F::one() / (lam + lam) / g2l2.sqrt().powi(3)
        * (lam * p0 * (c(3.0) * g2 - l2).powi(2) / gp0
            - g * (c(3.0) * g2 + l2).powi(2) / (lam + lam));
    Ok(IrrotationalCoeffs { b1, b2, d1, d2, b0 })
}

/// Circulated rational candidates for the irrotational cos 3q coefficients
/// (D₁, D₂), retained so the verification report can quantify their
/// deviation from the reconstructed values in `IrrotationalCoeffs`.
pub fn alternate_cos3q_candidates<F: Real>(params: &FlowParams<F>) -> Result<(F, F)> {
    let irr = FlowParams { gamma: F::zero(), ..*params };
    let lam = solve_dispersion(&irr)?;
    let g2 = params.g * params.g;
    let l2 = lam * lam;
    let c = |x: f64| lit::<F>(x);
    let d1 = -(c(3.0) * g2 - l2) / (c(32.0) * l2);
    let d2 = c(9.0) * g2 / (c(32.0) * l2) + (c(3.0) * g2 - l2) / (c(32.0) * l2);
    Ok((d1, d2))
}

// ---------------------------------------------------------------------------
// Mode-profile assembly (term lists shared by the expansion and the
// B̃₀ computation below).
// ---------------------------------------------------------------------------

/// Laminar profile H(p) as a term list.
pub(crate) fn laminar_profile<F: Real>() -> Vec<Term<F>> {
    vec![Term::new(Kind::HPow, 0, 0, F::one())]
}

/// First-order cos q profile m(p) = r0·sinh(H)/r.
pub(crate) fn m_profile<F: Real>(state: &LaminarState<F>) -> Vec<Term<F>> {
    vec![Term::new(Kind::Sinh, 1, -1, state.r0)]
}

fn push_nonzero<F: Real>(out: &mut Vec<Term<F>>, kind: Kind, k: i32, e: i32, coef: F) {
    if coef != F::zero() {
        out.push(Term::new(kind, k, e, coef));
    }
}

/// Second-order profiles (u₀, u₂): mean and cos 2q parts.
pub(crate) fn u_profiles<F: Real>(
    state: &LaminarState<F>,
    coeffs: &SecondOrderCoeffs<F>,
) -> (Vec<Term<F>>, Vec<Term<F>>) {
    let gamma = state.params.gamma;
    let r02 = state.r0 * state.r0;
    let eighth = lit::<F>(0.125);
    let common = |out: &mut Vec<Term<F>>| {
        push_nonzero(out, Kind::Pow, 0, -3, -gamma * eighth * r02);
        push_nonzero(out, Kind::Cosh, 2, -3, gamma * eighth * r02);
        push_nonzero(out, Kind::Sinh, 2, -2, r02 / lit::<F>(4.0));
    };
    let mut u0 = Vec::with_capacity(4);
    push_nonzero(&mut u0, Kind::HPow, 0, -1, coeffs.c0 * r02);
    common(&mut u0);
    let mut u2 = Vec::with_capacity(4);
    push_nonzero(&mut u2, Kind::Sinh, 2, -1, coeffs.c2 * r02);
    common(&mut u2);
    (u0, u2)
}

/// Third-order profiles (w₁, w₃): cos q and cos 3q parts, including the
/// auxiliary mode −B̃·r0²·H/r in w₁.
pub(crate) fn w_profiles<F: Real>(
    state: &LaminarState<F>,
    coeffs: &ThirdOrderCoeffs<F>,
    btilde: F,
) -> (Vec<Term<F>>, Vec<Term<F>>) {
    let a = &coeffs.a_table;
    let b = &coeffs.b_table;
    let mut w1 = Vec::with_capacity(12);
    for n in 0..5 {
        let e = n as i32 - 5;
        push_nonzero(&mut w1, Kind::Sinh, 1, e, a[0][n]);
        push_nonzero(&mut w1, Kind::Sinh, 3, e, a[1][n]);
        if n <= 2 {
            // Row-1 cosh entries beyond n = 2 are folded into b14_h.
            push_nonzero(&mut w1, Kind::Cosh, 1, e, b[0][n]);
        }
        push_nonzero(&mut w1, Kind::Cosh, 3, e, b[1][n]);
    }
    push_nonzero(&mut w1, Kind::HCosh, 1, -2, -coeffs.b14_h);
    push_nonzero(&mut w1, Kind::HPow, 0, -1, -btilde * state.r0 * state.r0);

    let mut w3 = Vec::with_capacity(10);
    for n in 0..5 {
        let e = n as i32 - 5;
        push_nonzero(&mut w3, Kind::Sinh, 1, e, a[2][n]);
        push_nonzero(&mut w3, Kind::Sinh, 3, e, a[3][n]);
        push_nonzero(&mut w3, Kind::Cosh, 1, e, b[2][n]);
        push_nonzero(&mut w3, Kind::Cosh, 3, e, b[3][n]);
    }
    (w1, w3)
}

/// Value and p-derivative of a profile at the surface p = 0.
pub(crate) fn surface_value_and_slope<F: Real>(
    state: &LaminarState<F>,
    terms: &[Term<F>],
) -> (F, F) {
    let r = state.r_profile(F::zero());
    let h = state.laminar_height(F::zero());
    let d1 = diff_profile(terms, state.params.gamma);
    (eval_profile(terms, r, h), eval_profile(&d1, r, h))
}

/// Robin functional 𝓡[P] = P′(0) − (g/λ*^{3/2})·P(0) of a profile.
pub fn robin_functional<F: Real>(state: &LaminarState<F>, terms: &[Term<F>]) -> F {
    let (value, slope) = surface_value_and_slope(state, terms);
    slope - state.params.g / state.sqrt_lambda().powi(3) * value
}

/// Closed-form Robin data (g₁, g₃) of the third-order cos q / cos 3q modes,
/// assembled from the surface values and slopes of m, u₀, u₂.
pub fn surface_robin_data<F: Real>(
    state: &LaminarState<F>,
    coeffs: &SecondOrderCoeffs<F>,
) -> (F, F) {
    let m = m_profile(state);
    let (u0, u2) = u_profiles(state, coeffs);
    let (m0, m1) = surface_value_and_slope(state, &m);
    let (e00, e01) = surface_value_and_slope(state, &u0);
    let (e20, e21) = surface_value_and_slope(state, &u2);
    let lam = state.lambda_star;
    let sl = state.sqrt_lambda();
    let g = state.params.g;
    let half = lit::<F>(0.5);
    let two = lit::<F>(2.0);

    let s1 = two * m0 * e20 - two * lam * m1 * (e01 + half * e21)
        + lit::<F>(1.5) * g * m0 * m1 * m1
        + lit::<F>(4.0) * g / sl * (m0 * (e01 + half * e21) + m1 * (e00 + half * e20));
    let s3 = -two * m0 * e20 - lam * m1 * e21 + half * g * m0 * m1 * m1
        + two * g / sl * (m0 * e21 + m1 * e20);
    (s1 / (two * sl), s3 / (two * sl))
}

/// Rate at which the auxiliary mode −B̃·r0²·H/r feeds the cos q component of
/// the surface condition at order b³; `btilde0 / gain` is the value of B̃
/// that annihilates that component.
pub fn btilde_surface_gain<F: Real>(state: &LaminarState<F>) -> F {
    let r0 = state.r0;
    let sl = state.sqrt_lambda();
    let g = state.params.g;
    let p0 = state.params.p0;
    let bed = (g + g) * p0 + r0 * sl * (r0 + sl);
    lit::<F>(2.0) * r0 * r0 * bed / (sl.powi(3) * (r0 + sl))
}

/// B̃₀ as the Robin-functional mismatch of the table-built cos q profile.
fn btilde0_robin_route<F: Real>(
    state: &LaminarState<F>,
    coeffs: &ThirdOrderCoeffs<F>,
) -> Result<F> {
    let second = second_order_coeffs(state)?;
    let (g1, _) = surface_robin_data(state, &second);
    let (w1_tilde, _) = w_profiles(state, coeffs, F::zero());
    let sl = state.sqrt_lambda();
    Ok((sl + sl) * (robin_functional(state, &w1_tilde) - g1))
}
