//! The governing operators of the fixed-rectangle formulation — interior
//! quasilinear operator, kinematic/dynamic surface condition, and bed
//! condition — together with grid norms and empirical order fits in b.
//!
//! For a true solution all three operators vanish identically; applied to a
//! truncated expansion they measure the defect, whose scaling in b certifies
//! the order of the construction.

use crate::error::{Error, Result};
use crate::expansion::{Expansion, Partials};
use crate::real::{lit, Real};

/// Default evaluation grid: resolves cos 3q and the cosh(3H) boundary
/// growth with headroom.
pub const DEFAULT_NQ: usize = 256;
/// Default number of pressure levels.
pub const DEFAULT_NP: usize = 128;
/// Amplitude ladder for order fits: geometric, low enough to stay
/// asymptotic, high enough to keep b⁴ defects above the rounding floor.
pub const DEFAULT_B_LADDER: [f64; 5] = [1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2];
/// RMS floor below which a log-log fit is rounding-dominated.
pub const RMS_FIT_FLOOR: f64 = 1e-14;

/// Uniform evaluation grid on `[−π, π) × [p0, 0]`.
///
/// The q nodes exclude the right endpoint (periodic direction); the p nodes
/// include both the bed and the surface. Powers of two are conventional for
/// the node counts (Fourier diagnostics) but not required.
#[derive(Debug, Clone)]
pub struct Grid<F> {
    q_nodes: Vec<F>,
    p_nodes: Vec<F>,
}

impl<F: Real> Grid<F> {
    /// Builds an `nq × np` grid over `[−π, π) × [p0, 0]`.
    pub fn new(nq: usize, np: usize, p0: F) -> Result<Self> {
        if nq < 8 || np < 8 {
            return Err(Error::InvalidInput(format!(
                "grid must have at least 8 nodes per direction, got {nq}x{np}"
            )));
        }
        if !p0.is_finite() || p0 >= F::zero() {
            return Err(Error::InvalidInput(format!(
                "grid needs a negative finite bed pressure, got {p0}"
            )));
        }
        let two_pi = F::PI() + F::PI();
        let q_nodes = (0..nq)
            .map(|i| -F::PI() + two_pi * lit::<F>(i as f64) / lit::<F>(nq as f64))
            .collect();
        let p_nodes = (0..np)
            .map(|j| p0 * (F::one() - lit::<F>(j as f64) / lit::<F>((np - 1) as f64)))
            .collect();
        Ok(Self { q_nodes, p_nodes })
    }

    /// The default 256 × 128 grid for a bed pressure.
    pub fn default_for(p0: F) -> Self {
        Self::new(DEFAULT_NQ, DEFAULT_NP, p0).expect("default grid dimensions are valid")
    }

    pub fn q_nodes(&self) -> &[F] {
        &self.q_nodes
    }

    pub fn p_nodes(&self) -> &[F] {
        &self.p_nodes
    }
}

/// Pointwise interior residual
/// `(1 + h_q²)·h_pp − 2·h_p·h_q·h_qp + h_p²·h_qq − γ·h_p³`.
pub fn interior_residual<F: Real>(pt: &Partials<F>, gamma: F) -> F {
    (F::one() + pt.h_q * pt.h_q) * pt.h_pp - (pt.h_p + pt.h_p) * pt.h_q * pt.h_qp
        + pt.h_p * pt.h_p * pt.h_qq
        - gamma * pt.h_p.powi(3)
}

/// Pointwise surface residual `1 + h_q² + (2gh − Q)·h_p²` at `p = 0`.
pub fn surface_residual<F: Real>(h: F, h_q: F, h_p: F, q_head: F, g: F) -> F {
    F::one() + h_q * h_q + ((g + g) * h - q_head) * h_p * h_p
}

/// Pointwise bed residual: the height itself at `p = p0`.
pub fn bed_residual<F: Real>(h: F) -> F {
    h
}

/// Grid norms of the three operators for one expansion.
///
/// RMS norms are node-count normalized (`sqrt(mean r²)`), so reports are
/// comparable across grid resolutions; max norms accompany each RMS. The
/// bed residual gets a max only — every implemented profile vanishes at the
/// bed, so its RMS would measure rounding noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport<F> {
    pub rms_interior: F,
    pub max_interior: F,
    pub rms_surface: F,
    pub max_surface: F,
    pub max_bed: F,
}

/// Evaluates all three operators over the grid. The hydraulic head is held
/// at the bifurcation value Q* of the expansion's state.
pub fn residual_norms<F: Real>(expansion: &Expansion<F>, grid: &Grid<F>) -> ResidualReport<F> {
    let gamma = expansion.state.params.gamma;
    let g = expansion.state.params.g;
    let q_head = expansion.state.q_star;

    let mut sum2 = F::zero();
    let mut max_interior = F::zero();
    for &p in grid.p_nodes() {
        let row = expansion.height_row(p);
        for &q in grid.q_nodes() {
            let r = interior_residual(&row.partials(q), gamma);
            sum2 += r * r;
            max_interior = max_interior.max(r.abs());
        }
    }
    let n_interior = lit::<F>((grid.p_nodes().len() * grid.q_nodes().len()) as f64);
    let rms_interior = (sum2 / n_interior).sqrt();

    let surface_row = expansion.height_row(F::zero());
    let mut sum2 = F::zero();
    let mut max_surface = F::zero();
    for &q in grid.q_nodes() {
        let pt = surface_row.partials(q);
        let r = surface_residual(pt.h, pt.h_q, pt.h_p, q_head, g);
        sum2 += r * r;
        max_surface = max_surface.max(r.abs());
    }
    let rms_surface = (sum2 / lit::<F>(grid.q_nodes().len() as f64)).sqrt();

    let bed_row = expansion.height_row(expansion.state.params.p0);
    let mut max_bed = F::zero();
    for &q in grid.q_nodes() {
        max_bed = max_bed.max(bed_residual(bed_row.partials(q).h).abs());
    }

    ResidualReport { rms_interior, max_interior, rms_surface, max_surface, max_bed }
}

/// One least-squares line through `(ln b, ln rms)` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit<F> {
    /// Fitted exponent: the empirical order of the residual in b.
    pub slope: F,
    /// Fitted log-prefactor (natural log).
    pub intercept: F,
    /// RMS of the fit's log-residuals; small values mean clean power-law
    /// scaling over the sampled window.
    pub fit_rms: F,
}

/// Order-fit report: per-operator empirical exponents over a b ladder.
#[derive(Debug, Clone)]
pub struct OrderFitReport<F> {
    pub bs: Vec<F>,
    pub reports: Vec<ResidualReport<F>>,
    pub interior: SlopeFit<F>,
    pub surface: SlopeFit<F>,
}

fn fit_line<F: Real>(xs: &[F], ys: &[F]) -> SlopeFit<F> {
    let n = lit::<F>(xs.len() as f64);
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &b| a + b) / n;
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut s2 = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (intercept + slope * x);
        s2 += e * e;
    }
    SlopeFit { slope, intercept, fit_rms: (s2 / n).sqrt() }
}

/// Fits the empirical order of the interior and surface residuals over an
/// amplitude ladder at fixed state, order, and auxiliary parameter.
///
/// Requires at least five strictly increasing positive amplitudes (use a
/// geometric ladder such as [`DEFAULT_B_LADDER`]); errors with
/// [`Error::DegenerateFit`] if any sampled RMS falls below the rounding
/// floor, where log-log slopes stop being meaningful.
pub fn fit_residual_order<F: Real>(
    state: &crate::laminar::LaminarState<F>,
    order: usize,
    btilde: F,
    bs: &[F],
    grid: &Grid<F>,
) -> Result<OrderFitReport<F>> {
    if bs.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "order fit needs at least 5 amplitudes, got {}",
            bs.len()
        )));
    }
    if bs.windows(2).any(|w| w[1] <= w[0]) || bs[0] <= F::zero() {
        return Err(Error::InvalidInput(
            "order-fit amplitudes must be positive and strictly increasing".into(),
        ));
    }
    let mut reports = Vec::with_capacity(bs.len());
    for &b in bs {
        let e = Expansion::new(*state, order, b, btilde)?;
        reports.push(residual_norms(&e, grid));
    }
    let floor = lit::<F>(RMS_FIT_FLOOR);
    for rep in &reports {
        for rms in [rep.rms_interior, rep.rms_surface] {
            if rms < floor {
                return Err(Error::DegenerateFit { rms: rms.as_f64() });
            }
        }
    }
    let xs: Vec<F> = bs.iter().map(|b| b.ln()).collect();
    let ys_int: Vec<F> = reports.iter().map(|r| r.rms_interior.ln()).collect();
    let ys_sur: Vec<F> = reports.iter().map(|r| r.rms_surface.ln()).collect();
    let interior = fit_line(&xs, &ys_int);
    let surface = fit_line(&xs, &ys_sur);
    Ok(OrderFitReport { bs: bs.to_vec(), reports, interior, surface })
}
