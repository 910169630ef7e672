use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq};
use crate::model::{reformulate, Constraint, Problem};

use super::libsvm::Dataset;

/// `−min ψ''`: the weak convexity modulus of the sigmoid loss, attained where
/// `e^ξ = 2 − √3`.
pub const RHO_PSI: f64 = 0.096_225_044_864_937_63;

/// `ψ(ξ) = 1/(1 + e^ξ)`
pub fn psi(xi: f64) -> f64 {
    1.0 / (1.0 + xi.exp())
}

pub fn psi_prime(xi: f64) -> f64 {
    let s = psi(xi);
    -s * (1.0 - s)
}

pub fn psi_second(xi: f64) -> f64 {
    let s = psi(xi);
    s * (1.0 - s) * (1.0 - 2.0 * s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpcSpec {
    /// Instances of each class, class 1 (the prioritized one) first.
    pub classes: Vec<Vec<Vec<f64>>>,
    pub lambda: f64,
    /// Thresholds `r_2, …, r_K`.
    pub thresholds: Vec<f64>,
}

impl NpcSpec {
    pub fn from_dataset(ds: &Dataset, lambda: f64, thresholds: Vec<f64>) -> Self {
        let k = ds.num_classes();
        let mut classes = vec![Vec::new(); k];
        for (c, f) in ds.classes.iter().zip(&ds.features) {
            classes[c - 1].push(f.clone());
        }
        Self {
            classes,
            lambda,
            thresholds,
        }
    }

    /// Iris with `λ = 0.3`, `r_2 = r_3 = 0.92`.
    pub fn iris_default() -> Self {
        Self::from_dataset(&super::libsvm::iris(), 0.3, vec![0.92, 0.92])
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn p(&self) -> usize {
        self.classes.first().and_then(|c| c.first()).map_or(0, |v| v.len())
    }

    pub fn eta(&self) -> f64 {
        self.k() as f64 * self.lambda * self.lambda
    }

    /// `ρ_k = (2(K − 1)/|D_k|) ρ_ψ Σ_{t ∈ D_k} ‖ζ_t‖²`
    pub fn rho(&self, k: usize) -> f64 {
        let d = &self.classes[k];
        let s: f64 = d.iter().map(|z| norm_sq(z)).sum();
        2.0 * (self.k() as f64 - 1.0) / d.len() as f64 * RHO_PSI * s
    }

    fn validate(&self) -> Result<()> {
        let k = self.k();
        let p = self.p();
        let bad = |s: String| Err(Error::DatasetMismatch(s));
        if k < 2 {
            return bad(format!("need at least two classes, got {k}"));
        }
        if p == 0 {
            return bad("empty feature vectors".into());
        }
        for (i, c) in self.classes.iter().enumerate() {
            if c.is_empty() {
                return bad(format!("class {} has no instances", i + 1));
            }
            if c.iter().any(|z| z.len() != p) {
                return bad(format!("class {} has instances of the wrong dimension", i + 1));
            }
        }
        if self.thresholds.len() != k - 1 {
            return bad(format!("expected {} thresholds, got {}", k - 1, self.thresholds.len()));
        }
        if !(self.lambda > 0.0) || self.thresholds.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter("lambda and thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// `(1/|D_k|) Σ_{ℓ≠k} Σ_{t∈D_k} ψ(x_kᵀζ_t − x_ℓᵀζ_t) + offset` over
/// `x = (x_1, …, x_K)`.
#[derive(Debug, Clone)]
pub struct ClassRisk {
    pub class: usize,
    pub num_classes: usize,
    pub p: usize,
    pub instances: Arc<Vec<Vec<f64>>>,
    pub offset: f64,
    pub a: f64,
    label: String,
}

impl ClassRisk {
    pub fn new(spec: &NpcSpec, class: usize, offset: f64) -> Self {
        Self {
            class,
            num_classes: spec.k(),
            p: spec.p(),
            instances: Arc::new(spec.classes[class].clone()),
            offset,
            a: 0.5 * spec.rho(class),
            label: format!("risk{}", class + 1),
        }
    }

    fn scores(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        (0..self.num_classes)
            .map(|j| dot(&x[j * self.p..(j + 1) * self.p], z))
            .collect()
    }

    /// `Σ ψ'(·) u_ℓ ⊗ ζ_t / |D_k|` with `u_ℓ = e_k − e_ℓ`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (k, p) = (self.class, self.p);
        let mut g = vec![0.0; self.num_classes * p];
        let w = 1.0 / self.instances.len() as f64;
        for z in self.instances.iter() {
            let s = self.scores(x, z);
            for l in (0..self.num_classes).filter(|&l| l != k) {
                let d = w * psi_prime(s[k] - s[l]);
                for (t, zt) in z.iter().enumerate() {
                    g[k * p + t] += d * zt;
                    g[l * p + t] -= d * zt;
                }
            }
        }
        g
    }
}

impl Constraint for ClassRisk {
    fn dim(&self) -> usize {
        self.num_classes * self.p
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let k = self.class;
        let mut total = 0.0;
        for z in self.instances.iter() {
            let s = self.scores(x, z);
            for l in (0..self.num_classes).filter(|&l| l != k) {
                total += psi(s[k] - s[l]);
            }
        }
        total / self.instances.len() as f64 + self.offset
    }

    fn curvature(&self) -> f64 {
        self.a
    }

    fn convexified_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = self.gradient(x);
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi += 2.0 * self.a * xi;
        }
        Some(g)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// `‖x_k‖² − λ² ≤ 0`
#[derive(Debug, Clone)]
pub struct NormCap {
    pub block: usize,
    pub p: usize,
    pub num_blocks: usize,
    pub lambda: f64,
    label: String,
}

impl NormCap {
    pub fn new(block: usize, p: usize, num_blocks: usize, lambda: f64) -> Self {
        Self {
            block,
            p,
            num_blocks,
            lambda,
            label: format!("cap{}", block + 1),
        }
    }
}

impl Constraint for NormCap {
    fn dim(&self) -> usize {
        self.p * self.num_blocks
    }

    fn eval(&self, x: &[f64]) -> f64 {
        norm_sq(&x[self.block * self.p..(self.block + 1) * self.p]) - self.lambda * self.lambda
    }

    fn curvature(&self) -> f64 {
        0.0
    }

    fn convexified_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        for t in self.block * self.p..(self.block + 1) * self.p {
            g[t] = 2.0 * x[t];
        }
        Some(g)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// The lifted classification problem in dimension `pK + 1`, constraints in
/// order: objective `F_1 + Kλ² − ‖y‖²`, risks of classes `2..K` minus their
/// thresholds, norm caps of blocks `1..K`.
///
/// The lift with `η = Kλ²`, `ρ = 2` is valid because any feasible point has
/// `‖x‖² ≤ Kλ² ≤ F_1(x) + Kλ²`.
pub fn build_npc(spec: &NpcSpec) -> Result<Problem> {
    spec.validate()?;
    let (k, p) = (spec.k(), spec.p());
    let f1: Arc<dyn Constraint> = Arc::new(ClassRisk::new(spec, 0, 0.0));
    let mut g: Vec<Arc<dyn Constraint>> = Vec::new();
    for c in 1..k {
        g.push(Arc::new(ClassRisk::new(spec, c, -spec.thresholds[c - 1])));
    }
    for b in 0..k {
        g.push(Arc::new(NormCap::new(b, p, k, spec.lambda)));
    }
    reformulate(f1, g, 2.0, spec.eta())
}

/// `F_1` at the weight block of a lifted point.
pub fn npc_f1(spec: &NpcSpec, y: &[f64]) -> f64 {
    let x = &y[..spec.k() * spec.p()];
    ClassRisk::new(spec, 0, 0.0).eval(x)
}

/// `argmax_k x_kᵀζ`, 1-based, ties to the smallest index.
pub fn npc_classify(x: &[f64], zeta: &[f64], num_classes: usize) -> usize {
    let p = zeta.len();
    let mut best = (1, f64::NEG_INFINITY);
    for k in 0..num_classes {
        let s = dot(&x[k * p..(k + 1) * p], zeta);
        if s > best.1 {
            best = (k + 1, s);
        }
    }
    best.0
}
