//! Classical phase-space side: observables, distributions, expectations,
//! Poisson brackets, and the Kullback–Leibler divergence.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::Poly2;
use crate::quad;

/// A point (x, p) in phase space, dimensional coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        if !x.is_finite() || !p.is_finite() {
            return Err(Error::InvalidInput(format!(
                "phase point must be finite, got ({x}, {p})"
            )));
        }
        Ok(Self { x, p })
    }
}

pub type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A real-valued function A(x, p): a polynomial coefficient table, a
/// black-box evaluator, or both (checked for agreement).
#[derive(Clone)]
pub struct Observable {
    poly: Option<Poly2>,
    evaluator: Option<Evaluator>,
    degree: u32,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.poly {
            Some(p) => write!(f, "Observable({p})"),
            None => write!(f, "Observable(<black box>)"),
        }
    }
}

impl Observable {
    pub fn from_poly(poly: Poly2) -> Self {
        let degree = poly.degree();
        Self {
            poly: Some(poly),
            evaluator: None,
            degree,
        }
    }

    /// Black-box observable. The caller declares sub-Gaussian growth when
    /// passing one of these to the operator lift.
    pub fn from_evaluator(evaluator: Evaluator) -> Self {
        Self {
            poly: None,
            evaluator: Some(evaluator),
            degree: 0,
        }
    }

    /// Both representations; they must agree at 100 deterministic sample
    /// points to 1e-12 relative.
    pub fn from_poly_and_evaluator(poly: Poly2, evaluator: Evaluator) -> Result<Self> {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut unit = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..100 {
            let x = 4.0 * unit() - 2.0;
            let p = 4.0 * unit() - 2.0;
            let a = poly.eval(x, p);
            let b = evaluator(x, p);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::MalformedObservable(format!(
                    "polynomial and evaluator disagree at ({x}, {p}): {a} vs {b}"
                )));
            }
        }
        let degree = poly.degree();
        Ok(Self {
            poly: Some(poly),
            evaluator: Some(evaluator),
            degree,
        })
    }

    pub fn poly(&self) -> Option<&Poly2> {
        self.poly.as_ref()
    }

    pub fn is_polynomial(&self) -> bool {
        self.poly.is_some()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// A(x, p). Prefers the polynomial table when both paths exist.
    pub fn eval(&self, pt: PhasePoint) -> Result<f64> {
        if let Some(poly) = &self.poly {
            return Ok(poly.eval(pt.x, pt.p));
        }
        if let Some(ev) = &self.evaluator {
            return Ok(ev(pt.x, pt.p));
        }
        Err(Error::MalformedObservable(
            "observable carries neither polynomial nor evaluator".into(),
        ))
    }

    fn eval_raw(&self, x: f64, p: f64) -> f64 {
        match (&self.poly, &self.evaluator) {
            (Some(poly), _) => poly.eval(x, p),
            (None, Some(ev)) => ev(x, p),
            (None, None) => f64::NAN,
        }
    }

    /// The translated observable A(x + dx, p + dp). Exact for polynomials;
    /// black boxes are wrapped.
    pub fn translate(&self, dx: f64, dp: f64) -> Self {
        let poly = self.poly.as_ref().map(|q| q.translate(dx, dp));
        let evaluator = self.evaluator.as_ref().map(|ev| {
            let ev = ev.clone();
            let shifted: Evaluator = Arc::new(move |x, p| ev(x + dx, p + dp));
            shifted
        });
        let degree = self.degree;
        Self {
            poly,
            evaluator,
            degree,
        }
    }
}

/// One mixture component: weight · N(mean, sigma^2 I), with sigma = 0
/// encoding a point mass.
#[derive(Debug, Clone, Copy)]
pub struct Component {
    pub weight: f64,
    pub mean: PhasePoint,
    pub sigma: f64,
}

/// A classical distribution: a convex mixture of isotropic Gaussians and
/// point masses over phase space.
#[derive(Debug, Clone)]
pub struct Mixture {
    components: Vec<Component>,
}

impl Mixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one component".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "component weight must be positive, got {}",
                    c.weight
                )));
            }
            if !(c.sigma >= 0.0) || !c.sigma.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "component sigma must be >= 0, got {}",
                    c.sigma
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components })
    }

    pub fn point_mass(pt: PhasePoint) -> Self {
        Self {
            components: vec![Component {
                weight: 1.0,
                mean: pt,
                sigma: 0.0,
            }],
        }
    }

    pub fn gaussian(mean: PhasePoint, sigma: f64) -> Result<Self> {
        Self::new(vec![Component {
            weight: 1.0,
            mean,
            sigma,
        }])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn all_positive_sigma(&self) -> bool {
        self.components.iter().all(|c| c.sigma > 0.0)
    }

    /// Mixture density at (x, p). Point-mass components contribute nothing
    /// to the density proper (they are atoms), so callers that need log
    /// densities must reject them first.
    pub fn density(&self, x: f64, p: f64) -> f64 {
        self.components
            .iter()
            .filter(|c| c.sigma > 0.0)
            .map(|c| {
                let d2 = (x - c.mean.x).powi(2) + (p - c.mean.p).powi(2);
                c.weight * (-d2 / (2.0 * c.sigma * c.sigma)).exp() / (2.0 * PI * c.sigma * c.sigma)
            })
            .sum()
    }

    fn log_density(&self, x: f64, p: f64) -> f64 {
        // log-sum-exp over components for stability far in the tails
        let logs: Vec<f64> = self
            .components
            .iter()
            .filter(|c| c.sigma > 0.0)
            .map(|c| {
                let d2 = (x - c.mean.x).powi(2) + (p - c.mean.p).powi(2);
                c.weight.ln() - (2.0 * PI * c.sigma * c.sigma).ln() - d2 / (2.0 * c.sigma * c.sigma)
            })
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        m + logs.iter().map(|&l| (l - m).exp()).sum::<f64>().ln()
    }
}

/// Classical measurement of A on the state pt.
pub fn eval_observable(a: &Observable, pt: PhasePoint) -> Result<f64> {
    a.eval(pt)
}

/// Gaussian expectation of A over one component, adaptive in the black-box
/// case. `sigma > 0` is required here.
fn component_expectation(a: &Observable, mean: PhasePoint, sigma: f64) -> Result<f64> {
    let scale = std::f64::consts::SQRT_2 * sigma;
    let eval = |order: usize| -> f64 {
        let rule = quad::hermite(order);
        let mut terms = Vec::with_capacity(order * order);
        for (&tx, &wx) in rule.nodes.iter().zip(&rule.weights) {
            let x = mean.x + scale * tx;
            for (&tp, &wp) in rule.nodes.iter().zip(&rule.weights) {
                let p = mean.p + scale * tp;
                terms.push(wx * wp * a.eval_raw(x, p));
            }
        }
        quad::pairwise_sum(&terms) / PI
    };
    if a.is_polynomial() {
        // order g is exact through per-axis degree 2g-1
        let order = ((a.degree() as usize) / 2 + 1).max(2);
        return Ok(eval(order));
    }
    let mut order = 8;
    let mut prev = eval(order);
    while order < 256 {
        order *= 2;
        let next = eval(order);
        let diff = (next - prev).abs();
        if diff < 1e-10 * prev.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy {
        achieved: f64::NAN,
        requested: 1e-10,
    })
}

/// E_P[A] = Σ_components weight · E_component[A].
pub fn classical_expectation(a: &Observable, dist: &Mixture) -> Result<f64> {
    let mut terms = Vec::with_capacity(dist.components().len());
    for c in dist.components() {
        let e = if c.sigma == 0.0 {
            a.eval(c.mean)?
        } else {
            component_expectation(a, c.mean, c.sigma)?
        };
        terms.push(c.weight * e);
    }
    Ok(quad::pairwise_sum(&terms))
}

/// {A1, A2} = ∂x A1 ∂p A2 − ∂p A1 ∂x A2 at pt. Exact for polynomial pairs,
/// central finite differences otherwise.
pub fn poisson_bracket(a1: &Observable, a2: &Observable, pt: PhasePoint) -> Result<f64> {
    match (a1.poly(), a2.poly()) {
        (Some(p1), Some(p2)) => {
            let val = p1.dx().eval(pt.x, pt.p) * p2.dp().eval(pt.x, pt.p)
                - p1.dp().eval(pt.x, pt.p) * p2.dx().eval(pt.x, pt.p);
            Ok(val)
        }
        _ => {
            let hx = 1e-5f64.max(1e-7 * pt.x.abs());
            let hp = 1e-5f64.max(1e-7 * pt.p.abs());
            let dx = |a: &Observable| -> Result<f64> {
                Ok((a.eval(PhasePoint { x: pt.x + hx, ..pt })? - a.eval(PhasePoint { x: pt.x - hx, ..pt })?)
                    / (2.0 * hx))
            };
            let dp = |a: &Observable| -> Result<f64> {
                Ok((a.eval(PhasePoint { p: pt.p + hp, ..pt })? - a.eval(PhasePoint { p: pt.p - hp, ..pt })?)
                    / (2.0 * hp))
            };
            Ok(dx(a1)? * dp(a2)? - dp(a1)? * dx(a2)?)
        }
    }
}

/// Closed form for a pair of single isotropic Gaussians (per-axis sigmas).
fn gaussian_kl_closed_form(c1: &Component, c2: &Component) -> f64 {
    let s12 = c1.sigma * c1.sigma;
    let s22 = c2.sigma * c2.sigma;
    let d2 = (c1.mean.x - c2.mean.x).powi(2) + (c1.mean.p - c2.mean.p).powi(2);
    (s22 / s12).ln() + (2.0 * s12 + d2) / (2.0 * s22) - 1.0
}

/// K(P1 | P2) = ∫ P1 (log P1 − log P2), by 2-D quadrature over P1's
/// components, with a closed-form fast path for single-Gaussian pairs.
pub fn kl_divergence(p1: &Mixture, p2: &Mixture) -> Result<f64> {
    if let Some(bad) = p2.components().iter().find(|c| c.sigma == 0.0) {
        return Err(Error::KlDivergence(format!(
            "P2 has a zero-sigma component at ({}, {}); log P2 diverges on P1's mass",
            bad.mean.x, bad.mean.p
        )));
    }
    if p1.components().iter().any(|c| c.sigma == 0.0) {
        return Err(Error::KlDivergence(
            "P1 has a point-mass component; divergence against a continuous density is infinite"
                .into(),
        ));
    }
    if p1.components().len() == 1 && p2.components().len() == 1 {
        return Ok(gaussian_kl_closed_form(&p1.components()[0], &p2.components()[0]));
    }
    kl_divergence_quadrature(p1, p2)
}

/// The quadrature route, exposed separately so the closed form and the
/// numeric path can be compared against each other.
pub fn kl_divergence_quadrature(p1: &Mixture, p2: &Mixture) -> Result<f64> {
    if p2.components().iter().any(|c| c.sigma == 0.0) || p1.components().iter().any(|c| c.sigma == 0.0)
    {
        return Err(Error::KlDivergence(
            "quadrature path requires strictly positive sigmas".into(),
        ));
    }
    let eval = |order: usize| -> f64 {
        let rule = quad::hermite(order);
        let mut outer = Vec::with_capacity(p1.components().len());
        for c in p1.components() {
            let scale = std::f64::consts::SQRT_2 * c.sigma;
            let mut terms = Vec::with_capacity(order * order);
            for (&tx, &wx) in rule.nodes.iter().zip(&rule.weights) {
                let x = c.mean.x + scale * tx;
                for (&tp, &wp) in rule.nodes.iter().zip(&rule.weights) {
                    let p = c.mean.p + scale * tp;
                    terms.push(wx * wp * (p1.log_density(x, p) - p2.log_density(x, p)));
                }
            }
            outer.push(c.weight * quad::pairwise_sum(&terms) / PI);
        }
        quad::pairwise_sum(&outer)
    };
    let mut order = 16;
    let mut prev = eval(order);
    let mut achieved = f64::INFINITY;
    while order < 256 {
        order *= 2;
        let next = eval(order);
        achieved = (next - prev).abs();
        if achieved < 1e-10 * prev.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy {
        achieved,
        requested: 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn obs(terms: &[(u32, u32, f64)]) -> Observable {
        Observable::from_poly(Poly2::from_terms(terms))
    }

    #[test]
    fn eval_examples() {
        let pt = PhasePoint::new(2.0, 3.0).unwrap();
        assert_eq!(eval_observable(&obs(&[(1, 0, 1.0)]), pt).unwrap(), 2.0);
        let pt = PhasePoint::new(1.0, 1.0).unwrap();
        assert_eq!(
            eval_observable(&obs(&[(2, 0, 1.0), (0, 2, 1.0)]), pt).unwrap(),
            2.0
        );
        let pt = PhasePoint::new(1.0, 2.0).unwrap();
        assert_eq!(
            eval_observable(&obs(&[(2, 1, 3.0), (0, 3, -1.0)]), pt).unwrap(),
            -2.0
        );
    }

    #[test]
    fn empty_observable_is_error() {
        let a = Observable {
            poly: None,
            evaluator: None,
            degree: 0,
        };
        assert!(matches!(
            a.eval(PhasePoint { x: 0.0, p: 0.0 }),
            Err(Error::MalformedObservable(_))
        ));
    }

    #[test]
    fn point_mass_expectation_is_pointwise() {
        let a = obs(&[(2, 1, 3.0), (0, 3, -1.0)]);
        let p = Mixture::point_mass(PhasePoint::new(1.0, 2.0).unwrap());
        assert_eq!(classical_expectation(&a, &p).unwrap(), -2.0);
    }

    #[test]
    fn gaussian_second_moment() {
        // E[x^2] over N((1,0), s^2) = 1 + s^2
        for &s in &[0.3, 1.0, 2.5] {
            let a = obs(&[(2, 0, 1.0)]);
            let p = Mixture::gaussian(PhasePoint::new(1.0, 0.0).unwrap(), s).unwrap();
            assert_abs_diff_eq!(
                classical_expectation(&a, &p).unwrap(),
                1.0 + s * s,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn unit_observable_normalization() {
        let a = obs(&[(0, 0, 1.0)]);
        let p = Mixture::new(vec![
            Component {
                weight: 0.25,
                mean: PhasePoint { x: 1.0, p: -1.0 },
                sigma: 0.5,
            },
            Component {
                weight: 0.75,
                mean: PhasePoint { x: -2.0, p: 0.3 },
                sigma: 0.0,
            },
        ])
        .unwrap();
        assert_abs_diff_eq!(classical_expectation(&a, &p).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn black_box_expectation_matches_polynomial() {
        let poly = Poly2::from_terms(&[(2, 0, 1.0), (1, 1, -0.5)]);
        let bb = Observable::from_evaluator(Arc::new(|x, p| x * x - 0.5 * x * p));
        let dist = Mixture::gaussian(PhasePoint::new(0.4, -0.2).unwrap(), 0.8).unwrap();
        let ep = classical_expectation(&Observable::from_poly(poly), &dist).unwrap();
        let eb = classical_expectation(&bb, &dist).unwrap();
        assert_abs_diff_eq!(ep, eb, epsilon = 1e-9);
    }

    #[test]
    fn bracket_examples() {
        let x = obs(&[(1, 0, 1.0)]);
        let p = obs(&[(0, 1, 1.0)]);
        let x2 = obs(&[(2, 0, 1.0)]);
        let pt = PhasePoint::new(3.0, 0.0).unwrap();
        assert_eq!(poisson_bracket(&x, &p, pt).unwrap(), 1.0);
        assert_eq!(poisson_bracket(&x2, &p, pt).unwrap(), 6.0);
        let a = obs(&[(2, 0, 1.0), (0, 1, 1.0)]);
        assert_eq!(poisson_bracket(&a, &a, pt).unwrap(), 0.0);
    }

    #[test]
    fn bracket_finite_difference_path() {
        let x2 = Observable::from_evaluator(Arc::new(|x, _| x * x));
        let p = obs(&[(0, 1, 1.0)]);
        let pt = PhasePoint::new(3.0, 1.0).unwrap();
        assert_abs_diff_eq!(poisson_bracket(&x2, &p, pt).unwrap(), 6.0, epsilon = 1e-8);
    }

    #[test]
    fn kl_identical_is_zero() {
        let p = Mixture::gaussian(PhasePoint::new(0.3, -0.7).unwrap(), 1.3).unwrap();
        assert_abs_diff_eq!(kl_divergence(&p, &p).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn kl_centered_gaussians_closed_form() {
        let p1 = Mixture::gaussian(PhasePoint::new(0.0, 0.0).unwrap(), 1.0).unwrap();
        let p2 = Mixture::gaussian(PhasePoint::new(0.0, 0.0).unwrap(), 2.0).unwrap();
        let expected = 4.0f64.ln() + 0.25 - 1.0; // 0.636294...
        assert_abs_diff_eq!(kl_divergence(&p1, &p2).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.636294, epsilon = 5e-7);
    }

    #[test]
    fn kl_quadrature_matches_closed_form() {
        let pairs = [
            ((0.0, 0.0, 1.0), (0.0, 0.0, 2.0)),
            ((0.5, -0.3, 0.8), (0.0, 0.2, 1.1)),
            ((1.0, 1.0, 1.5), (0.5, 0.5, 1.0)),
        ];
        for ((x1, q1, s1), (x2, q2, s2)) in pairs {
            let p1 = Mixture::gaussian(PhasePoint::new(x1, q1).unwrap(), s1).unwrap();
            let p2 = Mixture::gaussian(PhasePoint::new(x2, q2).unwrap(), s2).unwrap();
            let closed = kl_divergence(&p1, &p2).unwrap();
            let numeric = kl_divergence_quadrature(&p1, &p2).unwrap();
            assert_abs_diff_eq!(closed, numeric, epsilon = 1e-8);
        }
    }

    #[test]
    fn kl_zero_sigma_in_p2_is_error() {
        let p1 = Mixture::gaussian(PhasePoint::new(0.0, 0.0).unwrap(), 1.0).unwrap();
        let p2 = Mixture::point_mass(PhasePoint::new(0.0, 0.0).unwrap());
        assert!(matches!(kl_divergence(&p1, &p2), Err(Error::KlDivergence(_))));
    }

    #[test]
    fn mixture_weight_validation() {
        let bad = Mixture::new(vec![Component {
            weight: 0.9,
            mean: PhasePoint { x: 0.0, p: 0.0 },
            sigma: 1.0,
        }]);
        assert!(bad.is_err());
    }

    #[test]
    fn poly_evaluator_consistency_check() {
        let poly = Poly2::from_terms(&[(1, 1, 2.0)]);
        let ok = Observable::from_poly_and_evaluator(poly.clone(), Arc::new(|x, p| 2.0 * x * p));
        assert!(ok.is_ok());
        let bad = Observable::from_poly_and_evaluator(poly, Arc::new(|x, p| 2.0 * x * p + 1e-6));
        assert!(bad.is_err());
    }
}
