//! Operator convex functions on `(−1, 1)` in integral form
//!
//! ```text
//! f(t) = β0 + β1 t + ½ β2 ∫ t² (1 − α t)^{-1} dμ(α)
//! ```
//!
//! with `β2 ≥ 0` and `μ` a probability measure on `[−1, 1]`, here restricted
//! to finitely many atoms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{ConvexityTag, ScalarFunction};
use crate::interval::Interval;
use crate::sampling::rng_from_seed;
use crate::spectral::{identity, CMatrix, HermitianMatrix, RealFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub alpha: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendatShermanRep {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub atoms: Vec<Atom>,
}

/// `g_α(t) = t² / (1 − α t)`
pub fn kernel(alpha: f64, t: f64) -> f64 {
    t * t / (1.0 - alpha * t)
}

impl BendatShermanRep {
    pub fn new(beta0: f64, beta1: f64, beta2: f64, atoms: Vec<Atom>) -> Result<Self> {
        let rep = Self {
            beta0,
            beta1,
            beta2,
            atoms,
        };
        rep.validate()?;
        Ok(rep)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRepresentation(msg));
        if ![self.beta0, self.beta1, self.beta2].iter().all(|b| b.is_finite()) {
            return bad("coefficients must be finite".into());
        }
        if self.beta2 < 0.0 {
            return bad(format!("beta2 must be ≥ 0, got {}", self.beta2));
        }
        if self.atoms.is_empty() {
            return bad("measure needs at least one atom".into());
        }
        for (k, a) in self.atoms.iter().enumerate() {
            if !(-1.0..=1.0).contains(&a.alpha) {
                return bad(format!("atoms[{k}].alpha = {} is outside [-1, 1]", a.alpha));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return bad(format!("atoms[{k}].weight = {} must be positive", a.weight));
            }
        }
        let total: f64 = self.atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("weights sum to {total}, not 1"));
        }
        Ok(())
    }

    /// Scalar evaluation; `t` must lie in `(−1, 1)`.
    pub fn eval_checked(&self, t: f64) -> Result<f64> {
        if !Interval::unit_open().contains(t) {
            return Err(Error::SpectrumOutsideUnitInterval { eigenvalue: t });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        let integral: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * kernel(a.alpha, t))
            .sum();
        self.beta0 + self.beta1 * t + 0.5 * self.beta2 * integral
    }

    /// `β0·1 + β1 H + ½ β2 Σ w_j H² (1 − α_j H)^{-1}`, computed with matrix
    /// inverses rather than through the eigenbasis.
    pub fn eval_matrix(&self, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        let eig = h.eigen();
        if let Some(&bad) = eig
            .eigenvalues
            .iter()
            .find(|&&l| !Interval::unit_open().contains(l))
        {
            return Err(Error::SpectrumOutsideUnitInterval { eigenvalue: bad });
        }
        let n = h.dim();
        let hm = h.as_matrix();
        let h2 = hm * hm;
        let mut integral = CMatrix::zeros(n, n);
        for a in &self.atoms {
            let resolvent = (identity(n) - hm.scale(a.alpha))
                .try_inverse()
                .expect("1 − αH is invertible for spectrum in (−1, 1)");
            integral += (&h2 * resolvent).scale(a.weight);
        }
        let out = identity(n).scale(self.beta0) + hm.scale(self.beta1) + integral.scale(0.5 * self.beta2);
        Ok(HermitianMatrix::hermitian_part(out))
    }

    /// `λ f + (1 − λ) g` as a representation.
    pub fn mixture(&self, other: &Self, lambda: f64) -> Result<Self> {
        let beta2 = lambda * self.beta2 + (1.0 - lambda) * other.beta2;
        let mut atoms = Vec::new();
        if beta2 > 0.0 {
            let ws = lambda * self.beta2 / beta2;
            let wo = (1.0 - lambda) * other.beta2 / beta2;
            atoms.extend(self.atoms.iter().filter(|_| ws > 0.0).map(|a| Atom {
                alpha: a.alpha,
                weight: a.weight * ws,
            }));
            atoms.extend(other.atoms.iter().filter(|_| wo > 0.0).map(|a| Atom {
                alpha: a.alpha,
                weight: a.weight * wo,
            }));
        } else {
            atoms.push(Atom {
                alpha: 0.0,
                weight: 1.0,
            });
        }
        Self::new(
            lambda * self.beta0 + (1.0 - lambda) * other.beta0,
            lambda * self.beta1 + (1.0 - lambda) * other.beta1,
            beta2,
            atoms,
        )
    }

    pub fn to_function(&self, name: impl Into<String>) -> ScalarFunction {
        let rep = self.clone();
        ScalarFunction::new(
            name,
            Interval::unit_open(),
            ConvexityTag::OperatorConvexCertified,
            move |t| rep.eval_unchecked(t),
        )
    }
}

impl RealFunction for BendatShermanRep {
    fn name(&self) -> &str {
        "bendat-sherman"
    }
    fn domain(&self) -> Interval {
        Interval::unit_open()
    }
    fn eval(&self, t: f64) -> f64 {
        self.eval_unchecked(t)
    }
}

/// Random valid representation with 1 to 5 atoms.
pub fn random_bs(seed: u64) -> BendatShermanRep {
    let mut rng = rng_from_seed(seed);
    let beta0 = rng.random_range(-1.0..1.0);
    let beta1 = rng.random_range(-1.0..1.0);
    let beta2 = rng.random_range(0.0..2.0);
    let count = rng.random_range(1..=5);
    let mut atoms: Vec<Atom> = (0..count)
        .map(|_| Atom {
            alpha: rng.random_range(-1.0..=1.0),
            weight: rng.random_range(0.05..1.0),
        })
        .collect();
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    for a in &mut atoms {
        a.weight /= total;
    }
    BendatShermanRep {
        beta0,
        beta1,
        beta2,
        atoms,
    }
}
