//! Separable vertical-profile algebra closed under differentiation in p.
//!
//! Every closed-form mode profile in the expansion is a finite sum of terms
//! of the shape `coef · [H(p)]? · base(k·H(p)) · r(p)^e`, where `r` and `H`
//! are the laminar square-root and height profiles and `base` is `sinh` or
//! `cosh` (or absent). Because `dr/dp = −γ/r` and `dH/dp = 1/r`, this family
//! is closed under d/dp, so first and second partials of the expansion are
//! obtained exactly — no symbolic engine, no numeric differentiation.
//!
//! The rules are uniform in γ (every γ appears as a plain factor), so the
//! same code path serves rotational and irrotational flows alike.

use crate::real::{lit, Real};

/// Structural shape of a term; the value also depends on `k` and `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    /// `r^e`
    Pow,
    /// `H · r^e`
    HPow,
    /// `sinh(kH) · r^e`
    Sinh,
    /// `cosh(kH) · r^e`
    Cosh,
    /// `H · sinh(kH) · r^e`
    HSinh,
    /// `H · cosh(kH) · r^e`
    HCosh,
}

/// One separable term `coef · [H]? · base(kH) · r^e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term<F> {
    pub kind: Kind,
    /// Hyperbolic multiple k (0 for the `Pow`/`HPow` kinds).
    pub k: i32,
    /// Power of r.
    pub e: i32,
    pub coef: F,
}

impl<F: Real> Term<F> {
    pub fn new(kind: Kind, k: i32, e: i32, coef: F) -> Self {
        debug_assert!(matches!(kind, Kind::Pow | Kind::HPow) == (k == 0));
        Self { kind, k, e, coef }
    }

    /// Evaluates the term at a point where the laminar profiles take the
    /// values `r` and `big_h`.
    pub fn eval(&self, r: F, big_h: F) -> F {
        let re = r.powi(self.e);
        let kh = || lit::<F>(self.k as f64) * big_h;
        match self.kind {
            Kind::Pow => self.coef * re,
            Kind::HPow => self.coef * big_h * re,
            Kind::Sinh => self.coef * kh().sinh() * re,
            Kind::Cosh => self.coef * kh().cosh() * re,
            Kind::HSinh => self.coef * big_h * kh().sinh() * re,
            Kind::HCosh => self.coef * big_h * kh().cosh() * re,
        }
    }

    /// Appends d(term)/dp to `out` as up to three terms, using
    /// `dr/dp = −γ/r` and `dH/dp = 1/r`.
    fn diff_into(&self, gamma: F, out: &mut Vec<Term<F>>) {
        let Term { kind, k, e, coef } = *self;
        // Factor produced by differentiating the r^e part.
        let ge = -lit::<F>(e as f64) * gamma;
        let kf = lit::<F>(k as f64);
        let push = |out: &mut Vec<Term<F>>, kind, k, e, c: F| {
            if c != F::zero() {
                out.push(Term::new(kind, k, e, c));
            }
        };
        match kind {
            Kind::Pow => {
                push(out, Kind::Pow, 0, e - 2, coef * ge);
            }
            Kind::HPow => {
                push(out, Kind::Pow, 0, e - 1, coef);
                push(out, Kind::HPow, 0, e - 2, coef * ge);
            }
            Kind::Sinh => {
                push(out, Kind::Cosh, k, e - 1, coef * kf);
                push(out, Kind::Sinh, k, e - 2, coef * ge);
            }
            Kind::Cosh => {
                push(out, Kind::Sinh, k, e - 1, coef * kf);
                push(out, Kind::Cosh, k, e - 2, coef * ge);
            }
            Kind::HSinh => {
                push(out, Kind::Sinh, k, e - 1, coef);
                push(out, Kind::HCosh, k, e - 1, coef * kf);
                push(out, Kind::HSinh, k, e - 2, coef * ge);
            }
            Kind::HCosh => {
                push(out, Kind::Cosh, k, e - 1, coef);
                push(out, Kind::HSinh, k, e - 1, coef * kf);
                push(out, Kind::HCosh, k, e - 2, coef * ge);
            }
        }
    }
}

/// Sum of a term list at given `(r, H)` values.
pub fn eval_profile<F: Real>(terms: &[Term<F>], r: F, big_h: F) -> F {
    let mut acc = F::zero();
    for t in terms {
        acc += t.eval(r, big_h);
    }
    acc
}

/// Exact d/dp of a term list; like terms are merged and zeros dropped.
pub fn diff_profile<F: Real>(terms: &[Term<F>], gamma: F) -> Vec<Term<F>> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for t in terms {
        t.diff_into(gamma, &mut out);
    }
    merge(out)
}

/// Combines terms with identical `(kind, k, e)` and drops exact zeros.
fn merge<F: Real>(mut terms: Vec<Term<F>>) -> Vec<Term<F>> {
    terms.sort_by(|a, b| (a.kind, a.k, a.e).cmp(&(b.kind, b.k, b.e)));
    let mut out: Vec<Term<F>> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if (last.kind, last.k, last.e) == (t.kind, t.k, t.e) => {
                last.coef += t.coef;
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coef != F::zero());
    out
}
