//! Gauss–Hermite and Gauss–Laguerre rules via Golub–Welsch.
//!
//! Rules are cached per order behind a mutex; first construction wins and
//! later lookups share the same `Arc`, so concurrent first access is safe.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Nodes and weights for ∫ w(t) f(t) dt with the rule's native weight.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Eigen-decomposition of the Jacobi matrix: nodes are the eigenvalues,
/// weights are mu0 times the squared first components of the eigenvectors.
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> Rule {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = offdiag[i];
            j[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Weight e^{-t^2} on (-inf, inf); order g is exact through degree 2g-1.
fn build_hermite(order: usize) -> Rule {
    let diag = vec![0.0; order];
    let offdiag: Vec<f64> = (1..order).map(|i| (i as f64 / 2.0).sqrt()).collect();
    golub_welsch(&diag, &offdiag, std::f64::consts::PI.sqrt())
}

/// Weight e^{-t} on (0, inf).
fn build_laguerre(order: usize) -> Rule {
    let diag: Vec<f64> = (0..order).map(|i| 2.0 * i as f64 + 1.0).collect();
    let offdiag: Vec<f64> = (1..order).map(|i| i as f64).collect();
    golub_welsch(&diag, &offdiag, 1.0)
}

type Cache = Mutex<BTreeMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<Cache>, order: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let map = cache.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(build(order)))
        .clone()
}

pub fn hermite(order: usize) -> Arc<Rule> {
    assert!(order >= 1, "quadrature order must be positive");
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, order, build_hermite)
}

pub fn laguerre(order: usize) -> Arc<Rule> {
    assert!(order >= 1, "quadrature order must be positive");
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, order, build_laguerre)
}

/// Pairwise (tree) reduction: a fixed, associativity-stable summation order
/// that keeps results identical no matter how callers batch the terms.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

/// Pairwise reduction for complex accumulators.
pub fn pairwise_sum_complex(terms: &[num_complex::Complex64]) -> num_complex::Complex64 {
    match terms.len() {
        0 => num_complex::Complex64::new(0.0, 0.0),
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum_complex(&terms[..mid]) + pairwise_sum_complex(&terms[mid..])
        }
    }
}
