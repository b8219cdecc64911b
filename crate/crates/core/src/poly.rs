//! Sparse bivariate polynomials in the canonical pair (x, p).
//!
//! Coefficients are kept in a `BTreeMap` keyed by `(i, j)` for the monomial
//! x^i p^j, so iteration order (and hence every accumulated sum) is
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// Polynomial Σ c_{ij} x^i p^j with real coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    coeffs: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, c);
        p
    }

    /// The monomial x.
    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    /// The monomial p.
    pub fn p() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn monomial(i: u32, j: u32, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn from_terms(terms: &[(u32, u32, f64)]) -> Self {
        let mut p = Self::zero();
        for &(i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// Adds c·x^i p^j, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, i: u32, j: u32, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.coeffs.entry((i, j)).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree max(i + j), or 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * p.powi(j as i32))
            .sum()
    }

    /// Evaluation at complex coordinates (used by contour-rotated chain
    /// quadrature, where the integration nodes live off the real plane).
    pub fn eval_complex(&self, x: Complex64, p: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&(i, j), &c)| x.powu(i) * p.powu(j) * c)
            .sum()
    }

    /// Exact partial derivative ∂/∂x.
    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            if i > 0 {
                out.add_term(i - 1, j, c * i as f64);
            }
        }
        out
    }

    /// Exact partial derivative ∂/∂p.
    pub fn dp(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            if j > 0 {
                out.add_term(i, j - 1, c * j as f64);
            }
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            out.add_term(i, j, a * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), &c) in &other.coeffs {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i1, j1), &c1) in &self.coeffs {
            for (&(i2, j2), &c2) in &other.coeffs {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    /// The translated polynomial A(x + dx, p + dp), expanded exactly via
    /// binomial coefficients.
    pub fn translate(&self, dx: f64, dp: f64) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            // (x + dx)^i = Σ_a C(i,a) x^a dx^(i-a), same for p.
            for a in 0..=i {
                let ba = binomial(i, a) * dx.powi((i - a) as i32);
                for b in 0..=j {
                    let bb = binomial(j, b) * dp.powi((j - b) as i32);
                    out.add_term(a, b, c * ba * bb);
                }
            }
        }
        out
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for t in 0..k {
        r = r * (n - t) as f64 / (t + 1) as f64;
    }
    r
}

impl fmt::Display for Poly2 {
    /// Prints in the grammar accepted by the expression parser, e.g.
    /// `3*x^2*p - p^3`, so print→parse round-trips.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), &c) in &self.coeffs {
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            let mag = c.abs();
            let mut wrote_factor = false;
            if (mag - 1.0).abs() > 0.0 || (i == 0 && j == 0) {
                write!(f, "{}", mag)?;
                wrote_factor = true;
            }
            if i > 0 {
                if wrote_factor {
                    write!(f, "*")?;
                }
                write!(f, "x")?;
                if i > 1 {
                    write!(f, "^{}", i)?;
                }
                wrote_factor = true;
            }
            if j > 0 {
                if wrote_factor {
                    write!(f, "*")?;
                }
                write!(f, "p")?;
                if j > 1 {
                    write!(f, "^{}", j)?;
                }
            }
        }
        Ok(())
    }
}
