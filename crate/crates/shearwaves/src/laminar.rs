//! Laminar shear flows, the dispersion relation, and the bifurcation state.
//!
//! The wave problem is posed for the height function `h(q, p)` on the fixed
//! rectangle `(−π, π) × (p0, 0)`. Its trivial, q-independent solutions are the
//! laminar flows `H(p; λ)`; genuine waves bifurcate from the laminar family at
//! the value `λ*` singled out by the dispersion relation. This module owns
//! both: the laminar profile and the root solve that fixes `λ*`.

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// Resolution of the dispersion bisection, relative to the bracket size.
const DISPERSION_REL_TOL: f64 = 1e-12;
/// Number of geometric scan nodes used to bracket dispersion roots.
const DISPERSION_SCAN_NODES: usize = 600;
/// Relative margin around the singular locus `g = γ·sqrt(λ)`.
const SINGULAR_REL_MARGIN: f64 = 1e-8;

/// Physical parameters of the flow: vorticity, relative mass flux, gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams<F> {
    /// Constant vorticity γ (either sign).
    pub gamma: F,
    /// Relative mass flux p0 < 0.
    pub p0: F,
    /// Gravitational acceleration g > 0.
    pub g: F,
}

impl<F: Real> FlowParams<F> {
    /// Validates and stores the flow parameters.
    pub fn new(gamma: F, p0: F, g: F) -> Result<Self> {
        if !gamma.is_finite() || !p0.is_finite() || !g.is_finite() {
            return Err(Error::InvalidInput("flow parameters must be finite".into()));
        }
        if p0 >= F::zero() {
            return Err(Error::InvalidInput(format!(
                "relative mass flux must be negative, got p0 = {p0}"
            )));
        }
        if g <= F::zero() {
            return Err(Error::InvalidInput(format!(
                "gravity must be positive, got g = {g}"
            )));
        }
        Ok(Self { gamma, p0, g })
    }

    /// Lower admissibility bound for λ: the profile `r(p)² = λ − 2γp` must stay
    /// positive on `[p0, 0]`, i.e. λ > max(0, 2γ·p0).
    pub fn lambda_floor(&self) -> F {
        // 2γ·p0 > 0 exactly when γ < 0 (since p0 < 0).
        ((self.gamma + self.gamma) * self.p0).max(F::zero())
    }
}

/// A laminar flow pinned at the bifurcation point: the base state every
/// expansion is built on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaminarState<F> {
    /// Flow parameters.
    pub params: FlowParams<F>,
    /// Bifurcation value λ* of the laminar parameter.
    pub lambda_star: F,
    /// Hydraulic head Q(λ*) entering the free-surface condition.
    pub q_star: F,
    /// Bed value r(p0) = sqrt(λ* − 2γ·p0).
    pub r0: F,
}

impl<F: Real> LaminarState<F> {
    /// Solves the dispersion relation and assembles the bifurcation state.
    pub fn from_params(params: FlowParams<F>) -> Result<Self> {
        let lambda_star = solve_dispersion(&params)?;
        Self::with_lambda(params, lambda_star)
    }

    /// Assembles the state for an explicitly given λ (not necessarily a
    /// dispersion root) — used by laminar-exactness checks and diagnostics.
    pub fn with_lambda(params: FlowParams<F>, lambda: F) -> Result<Self> {
        let floor = params.lambda_floor();
        if !(lambda > floor) || !lambda.is_finite() {
            return Err(Error::Domain {
                quantity: "lambda",
                detail: format!(
                    "lambda = {lambda} must exceed max(0, 2*gamma*p0) = {floor}"
                ),
            });
        }
        let sqrt_lambda = lambda.sqrt();
        if (params.g - params.gamma * sqrt_lambda).abs()
            < lit::<F>(SINGULAR_REL_MARGIN) * params.g
        {
            return Err(Error::SingularCoefficient { name: "g - gamma*sqrt(lambda)" });
        }
        let r0 = (lambda - (params.gamma + params.gamma) * params.p0).sqrt();
        let q_star =
            lambda - lit::<F>(4.0) * params.g * params.p0 / (sqrt_lambda + r0);
        Ok(Self { params, lambda_star: lambda, q_star, r0 })
    }

    /// `sqrt(λ*)`, the relative surface speed of the laminar flow.
    pub fn sqrt_lambda(&self) -> F {
        self.lambda_star.sqrt()
    }

    /// `r(p) = sqrt(λ* − 2γp)`; positive for all p in `[p0, 0]`.
    pub fn r_profile(&self, p: F) -> F {
        (self.lambda_star - (self.params.gamma + self.params.gamma) * p).sqrt()
    }

    /// Laminar height profile `H(p) = 2(p − p0) / (r(p) + r0)`.
    ///
    /// This form is a rationalisation of `(r0 − r)/γ` and stays exact as
    /// γ → 0, where it reduces to `(p − p0)/sqrt(λ*)`.
    pub fn laminar_height(&self, p: F) -> F {
        let two = F::one() + F::one();
        two * (p - self.params.p0) / (self.r_profile(p) + self.r0)
    }

    /// `dH/dp = 1/r(p)`.
    pub fn laminar_height_p(&self, p: F) -> F {
        self.r_profile(p).recip()
    }

    /// `d²H/dp² = γ / r(p)³`.
    pub fn laminar_height_pp(&self, p: F) -> F {
        let r = self.r_profile(p);
        self.params.gamma / (r * r * r)
    }

    /// Mean depth of the flow, `d = H(0)`.
    pub fn depth(&self) -> F {
        self.laminar_height(F::zero())
    }
}

/// Value of the dispersion relation
/// `λ / (g − γ·sqrt(λ)) + tanh(2·p0 / (sqrt(λ) + r0(λ)))`
/// whose roots are the bifurcation values λ*.
pub fn dispersion_residual<F: Real>(params: &FlowParams<F>, lambda: F) -> Result<F> {
    if !(lambda > params.lambda_floor()) {
        return Err(Error::Domain {
            quantity: "lambda",
            detail: format!("lambda = {lambda} below admissibility floor"),
        });
    }
    let sqrt_lambda = lambda.sqrt();
    let r0 = (lambda - (params.gamma + params.gamma) * params.p0).sqrt();
    let denom = params.g - params.gamma * sqrt_lambda;
    Ok(lambda / denom + ((params.p0 + params.p0) / (sqrt_lambda + r0)).tanh())
}

/// Finds the smallest admissible root λ* of the dispersion relation.
///
/// The residual is scanned on a geometric grid over
/// `(max(0, 2γ·p0) + 1e−9, 10·(g² + |γ·p0·g|)]`; each sign change is refined by
/// bisection to `1e−12` relative accuracy. Sign changes produced by the pole
/// at `g = γ·sqrt(λ)` (γ > 0 only) are discarded; a root landing on the pole
/// itself reports a singular-coefficient error.
pub fn solve_dispersion<F: Real>(params: &FlowParams<F>) -> Result<F> {
    let floor = params.lambda_floor();
    let lo = floor + lit::<F>(1e-9);
    let hi = lit::<F>(10.0)
        * (params.g * params.g + (params.gamma * params.p0 * params.g).abs());
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!(
            "empty dispersion search interval [{lo}, {hi}]"
        )));
    }

    // Geometric grid on the shifted variable λ − floor, so the scan clusters
    // nodes near the admissibility edge where γ < 0 roots sit.
    let shift = floor;
    let a = lo - shift;
    let b = hi - shift;
    let ratio = (b / a).powf(lit::<F>(1.0 / (DISPERSION_SCAN_NODES as f64 - 1.0)));

    let mut saw_pole_collision = false;
    let mut prev_lambda = lo;
    let mut prev_value = dispersion_residual(params, prev_lambda)?;
    let mut x = a;
    for _ in 1..DISPERSION_SCAN_NODES {
        x = x * ratio;
        let lambda = (shift + x).min(hi);
        let value = dispersion_residual(params, lambda)?;
        if value == F::zero() && value.is_finite() {
            return finalize_root(params, lambda, &mut saw_pole_collision)
                .map(Ok)
                .unwrap_or_else(|| {
                    Err(Error::SingularCoefficient { name: "g - gamma*sqrt(lambda)" })
                });
        }
        if prev_value.is_finite() && value.is_finite() && (prev_value * value) < F::zero()
        {
            let root = bisect_dispersion(params, prev_lambda, lambda)?;
            if let Some(root) = finalize_root(params, root, &mut saw_pole_collision) {
                return Ok(root);
            }
        }
        prev_lambda = lambda;
        prev_value = value;
    }

    if saw_pole_collision {
        Err(Error::SingularCoefficient { name: "g - gamma*sqrt(lambda)" })
    } else {
        Err(Error::NoDispersionRoot { gamma: params.gamma.as_f64() })
    }
}

/// Accepts a bisected root unless it sits on the singular locus, in which
/// case the collision is recorded and the candidate dropped.
fn finalize_root<F: Real>(
    params: &FlowParams<F>,
    root: F,
    saw_pole_collision: &mut bool,
) -> Option<F> {
    let deno = params.g - params.gamma * root.sqrt();
    if deno.abs() < lit::<F>(SINGULAR_REL_MARGIN) * params.g {
        *saw_pole_collision = true;
        return None;
    }
    // A genuine root has a small residual; bisection onto the pole does not.
    match dispersion_residual(params, root) {
        Ok(value) if value.abs() < lit::<F>(1e-6) => Some(root),
        _ => {
            *saw_pole_collision = true;
            None
        }
    }
}

/// Bisects the dispersion residual on a sign-change bracket.
fn bisect_dispersion<F: Real>(params: &FlowParams<F>, mut lo: F, mut hi: F) -> Result<F> {
    let mut f_lo = dispersion_residual(params, lo)?;
    let tol = lit::<F>(DISPERSION_REL_TOL);
    let half = lit::<F>(0.5);
    while (hi - lo) > tol * hi.abs().max(F::one()) {
        let mid = half * (lo + hi);
        let f_mid = dispersion_residual(params, mid)?;
        if f_mid == F::zero() {
            return Ok(mid);
        }
        if (f_lo * f_mid) < F::zero() {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(half * (lo + hi))
}

/// Sign branch of the linear wave-speed formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Right-propagating branch (`+` in front of the radical).
    Plus,
    /// Left-propagating branch (`−` in front of the radical).
    Minus,
}

/// Linear-theory propagation speed of a small wave of frequency `k` on a
/// current of constant vorticity `gamma`, surface speed `u0`, mean depth `d`:
///
/// `c = u0 − γ·tanh(kd)/(2k) ± sqrt(γ²·tanh²(kd) + 4gk·tanh(kd)) / (2k)`.
pub fn linear_wave_speed<F: Real>(
    gamma: F,
    k: F,
    d: F,
    u0: F,
    g: F,
    branch: Branch,
) -> Result<F> {
    if !(k > F::zero()) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got k = {k}")));
    }
    if !(d > F::zero()) {
        return Err(Error::InvalidInput(format!("depth must be positive, got d = {d}")));
    }
    if !(g > F::zero()) {
        return Err(Error::InvalidInput(format!("gravity must be positive, got g = {g}")));
    }
    let t = (k * d).tanh();
    let two_k = k + k;
    let radical = (gamma * gamma * t * t + lit::<F>(4.0) * g * k * t).sqrt();
    let signed = match branch {
        Branch::Plus => radical,
        Branch::Minus => -radical,
    };
    Ok(u0 - gamma * t / two_k + signed / two_k)
}
