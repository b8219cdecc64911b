//! The classical→quantum lift: coherent projectors for phase-space points,
//! P-weighted projector integrals for distributions, and the operator
//! assignment A(x,p) → (1/π) ∫ dq dk A |alpha><alpha| in the truncated
//! number basis. Quantum expectations, moments, and commutator expectations
//! evaluated by dense matrix products live here too (the "Fock path").

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::classical::{Mixture, Observable, PhasePoint};
use crate::error::{Error, Result};
use crate::fock::{
    check_dims, coherent_vector_with_dim, trace_product, CoherentAmplitude, FockOperator,
    TruncationPolicy,
};
use crate::quad;

/// Everything a lift needs: hbar, the unit-fixing constant lambda, the
/// truncation policy, and optional overrides for quadrature order and basis
/// dimension. All public inputs stay dimensional (x, p); the conversion to
/// dimensionless (q, k) happens only inside this module.
#[derive(Debug, Clone)]
pub struct LiftConfig {
    pub hbar: f64,
    pub lambda: f64,
    pub policy: TruncationPolicy,
    pub quad_order: Option<usize>,
    pub dim: Option<usize>,
}

impl LiftConfig {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self {
            hbar,
            lambda: 1.0,
            policy: TruncationPolicy::default(),
            quad_order: None,
            dim: None,
        })
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn amplitude(&self, pt: PhasePoint) -> Result<CoherentAmplitude> {
        CoherentAmplitude::from_point(pt.x, pt.p, self.hbar, self.lambda)
    }

    /// Auto quadrature order for polynomial lifts. Exactness needs
    /// 2·order - 1 >= degree + 2·(dim - 1); degree + dim + 1 clears that
    /// with margin.
    fn observable_order(&self, degree: u32, dim: usize) -> usize {
        self.quad_order.unwrap_or(degree as usize + dim + 1)
    }
}

/// A density operator with its bookkept distance from unit trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub op: FockOperator,
    pub trace_defect: f64,
}

impl DensityOperator {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn purity(&self) -> f64 {
        let t = trace_product(&[&self.op, &self.op]).expect("same dim");
        t.re
    }
}

/// |alpha><alpha| for the point (x0, p0). Rank one by construction.
pub fn lift_point(pt: PhasePoint, cfg: &LiftConfig) -> Result<DensityOperator> {
    cfg.policy.validate()?;
    let amp = cfg.amplitude(pt)?;
    let alpha = amp.alpha();
    let dim = match cfg.dim {
        Some(d) => d,
        None => cfg.policy.dim_for(alpha.norm_sqr()).0,
    };
    let v = coherent_vector_with_dim(alpha, dim);
    let mut entries = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for n in m..dim {
            let e = v.amplitudes[m] * v.amplitudes[n].conj();
            entries[(m, n)] = e;
            entries[(n, m)] = e.conj();
        }
    }
    Ok(DensityOperator {
        op: FockOperator {
            entries,
            hermitian: true,
        },
        trace_defect: v.eps_tail,
    })
}

/// Basis dimension that holds one mixture component to the policy's tail
/// target: Poisson sizing at the outermost amplitude the component reaches.
fn component_dim(c: &crate::classical::Component, cfg: &LiftConfig) -> (usize, bool, usize) {
    let radius_x = c.mean.x.abs() + 6.0 * c.sigma;
    let radius_p = c.mean.p.abs() + 6.0 * c.sigma;
    let l2 = cfg.lambda * cfg.lambda;
    let alpha_sq = (l2 * radius_x * radius_x + radius_p * radius_p / l2) / cfg.hbar;
    let (dim, _, capped) = cfg.policy.dim_for(alpha_sq);
    let required = if capped {
        let wide = TruncationPolicy {
            epsilon: cfg.policy.epsilon,
            dim_cap: usize::MAX / 2,
        };
        wide.dim_for(alpha_sq).0
    } else {
        dim
    };
    (dim, capped, required)
}

/// rho_P = ∫ dx dp P(x,p) |alpha><alpha| by per-component Gauss–Hermite
/// quadrature, the component Gaussian and the coherent weight merged into a
/// single exact Gaussian factor so the residual integrand is polynomial.
pub fn lift_distribution(dist: &Mixture, cfg: &LiftConfig) -> Result<DensityOperator> {
    cfg.policy.validate()?;
    let mut dim = 0usize;
    for c in dist.components() {
        let (d, capped, required) = component_dim(c, cfg);
        if capped {
            return Err(Error::Truncation {
                dim_cap: cfg.policy.dim_cap,
                required_dim: required,
                achieved_tail: f64::NAN,
            });
        }
        dim = dim.max(d);
    }
    if let Some(d) = cfg.dim {
        dim = d;
    }

    let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
    let order = cfg.quad_order.unwrap_or(dim + 1);
    let l = cfg.lambda;
    let hbar = cfg.hbar;
    for c in dist.components() {
        if c.sigma == 0.0 {
            let amp = cfg.amplitude(c.mean)?;
            let v = coherent_vector_with_dim(amp.alpha(), dim);
            for m in 0..dim {
                for n in m..dim {
                    entries[(m, n)] += c.weight * v.amplitudes[m] * v.amplitudes[n].conj();
                }
            }
            continue;
        }
        let rule = quad::hermite(order);
        let s2 = c.sigma * c.sigma;
        // per-axis combined Gaussian: component e^{-(u-m)^2/(2s^2)} times
        // coherent magnitude e^{-u^2·w/hbar}, w = lambda^2 (x axis) or
        // 1/lambda^2 (p axis)
        let gamma_x = 1.0 / (2.0 * s2) + l * l / hbar;
        let gamma_p = 1.0 / (2.0 * s2) + 1.0 / (l * l * hbar);
        let cx = c.mean.x / (2.0 * s2 * gamma_x);
        let cp = c.mean.p / (2.0 * s2 * gamma_p);
        let const_x = gamma_x * cx * cx - c.mean.x * c.mean.x / (2.0 * s2);
        let const_p = gamma_p * cp * cp - c.mean.p * c.mean.p / (2.0 * s2);
        let prefactor = c.weight * (const_x + const_p).exp()
            / (2.0 * PI * s2 * (gamma_x * gamma_p).sqrt());
        let mut phi = vec![Complex64::new(0.0, 0.0); dim];
        for (&tx, &wx) in rule.nodes.iter().zip(&rule.weights) {
            let x = cx + tx / gamma_x.sqrt();
            for (&tp, &wp) in rule.nodes.iter().zip(&rule.weights) {
                let p = cp + tp / gamma_p.sqrt();
                let alpha = Complex64::new(l * x, p / l) / hbar.sqrt();
                // phi_n = alpha^n / sqrt(n!), exponential factor already in
                // the combined Gaussian
                let mut a = Complex64::new(1.0, 0.0);
                for (n, slot) in phi.iter_mut().enumerate() {
                    *slot = a;
                    a *= alpha / ((n + 1) as f64).sqrt();
                }
                let w = prefactor * wx * wp;
                for m in 0..dim {
                    let wm = phi[m] * w;
                    for n in m..dim {
                        entries[(m, n)] += wm * phi[n].conj();
                    }
                }
            }
        }
    }
    for m in 0..dim {
        entries[(m, m)] = Complex64::new(entries[(m, m)].re, 0.0);
        for n in (m + 1)..dim {
            entries[(n, m)] = entries[(m, n)].conj();
        }
    }
    let trace: f64 = (0..dim).map(|i| entries[(i, i)].re).sum();
    Ok(DensityOperator {
        op: FockOperator {
            entries,
            hermitian: true,
        },
        trace_defect: (1.0 - trace).abs(),
    })
}

/// The operator assigned to A(x,p):
/// <m|Â|n> = (1/pi) ∫ dq dk A(x,p) e^{-(q²+k²)} (q+ik)^m (q-ik)^n / sqrt(m! n!).
/// Exact to round-off for polynomial A at the auto order; black boxes go
/// through the doubling rule and must decay fast enough for the Gaussian
/// weight to win.
pub fn lift_observable(a: &Observable, cfg: &LiftConfig) -> Result<FockOperator> {
    let dim = cfg.dim.unwrap_or((a.degree() as usize + 2).max(16));
    if a.is_polynomial() {
        let order = cfg.observable_order(a.degree(), dim);
        return Ok(lift_observable_at_order(a, cfg, dim, order)?);
    }
    let mut order = 32usize;
    let mut prev = lift_observable_at_order(a, cfg, dim, order)?;
    while order < 256 {
        order *= 2;
        let next = lift_observable_at_order(a, cfg, dim, order)?;
        let mut diff = 0.0f64;
        let mut scale = 1.0f64;
        for (x, y) in next.entries.iter().zip(prev.entries.iter()) {
            diff = diff.max((x - y).norm());
            scale = scale.max(x.norm());
        }
        if diff < 1e-10 * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy {
        achieved: f64::NAN,
        requested: 1e-10,
    })
}

fn lift_observable_at_order(
    a: &Observable,
    cfg: &LiftConfig,
    dim: usize,
    order: usize,
) -> Result<FockOperator> {
    let rule = quad::hermite(order);
    let root = cfg.hbar.sqrt();
    let l = cfg.lambda;
    let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
    let mut phi = vec![Complex64::new(0.0, 0.0); dim];
    for (&q, &wq) in rule.nodes.iter().zip(&rule.weights) {
        let x = root * q / l;
        for (&k, &wk) in rule.nodes.iter().zip(&rule.weights) {
            let p = root * k * l;
            let val = a.eval(PhasePoint { x, p })?;
            let alpha = Complex64::new(q, k);
            let mut c = Complex64::new(1.0, 0.0);
            for (n, slot) in phi.iter_mut().enumerate() {
                *slot = c;
                c *= alpha / ((n + 1) as f64).sqrt();
            }
            let w = wq * wk * val / PI;
            for m in 0..dim {
                let wm = phi[m] * w;
                for n in m..dim {
                    entries[(m, n)] += wm * phi[n].conj();
                }
            }
        }
    }
    for m in 0..dim {
        entries[(m, m)] = Complex64::new(entries[(m, m)].re, 0.0);
        for n in (m + 1)..dim {
            entries[(n, m)] = entries[(m, n)].conj();
        }
    }
    Ok(FockOperator {
        entries,
        hermitian: true,
    })
}

/// Tr[rho O], asserted real for Hermitian O.
pub fn quantum_expectation(rho: &DensityOperator, op: &FockOperator) -> Result<f64> {
    check_dims(rho.dim(), op.dim())?;
    let t = trace_product(&[&rho.op, op])?;
    if op.hermitian && t.im.abs() > 1e-10 * t.re.abs().max(1.0) {
        return Err(Error::Numerics(format!(
            "expectation of a Hermitian operator came out complex: {t}"
        )));
    }
    Ok(t.re)
}

/// Tr[rho O^n] by repeated matrix multiplication.
pub fn quantum_moment(rho: &DensityOperator, op: &FockOperator, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("moment power must be >= 1".into()));
    }
    check_dims(rho.dim(), op.dim())?;
    let ops: Vec<&FockOperator> = std::iter::once(&rho.op)
        .chain(std::iter::repeat(op).take(n as usize))
        .collect();
    let t = trace_product(&ops)?;
    if op.hermitian && t.im.abs() > 1e-10 * t.re.abs().max(1.0) {
        return Err(Error::Numerics(format!(
            "moment of a Hermitian operator came out complex: {t}"
        )));
    }
    Ok(t.re)
}

/// Tr[rho (O1 O2 − O2 O1)]. Purely imaginary when everything is Hermitian;
/// the real part is asserted below 1e-10 and kept for the caller to see.
pub fn commutator_expectation(
    rho: &DensityOperator,
    o1: &FockOperator,
    o2: &FockOperator,
) -> Result<Complex64> {
    check_dims(rho.dim(), o1.dim())?;
    check_dims(o1.dim(), o2.dim())?;
    let t12 = trace_product(&[&rho.op, o1, o2])?;
    let t21 = trace_product(&[&rho.op, o2, o1])?;
    let c = t12 - t21;
    if o1.hermitian && o2.hermitian && rho.op.hermitian {
        let scale = c.norm().max(1.0);
        if c.re.abs() > 1e-10 * scale {
            return Err(Error::Numerics(format!(
                "commutator expectation grew a real part: {c}"
            )));
        }
    }
    Ok(c)
}
