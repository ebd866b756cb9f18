//! Scalar functions with convexity metadata.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::spectral::RealFunction;

/// What is known about a function's convexity. Metadata only: verifiers
/// never rely on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexityTag {
    OperatorConvexCertified,
    ConvexOnly,
    NonConvex,
    Unknown,
}

impl ConvexityTag {
    pub fn is_convex(self) -> bool {
        matches!(self, Self::OperatorConvexCertified | Self::ConvexOnly)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    domain: Interval,
    tag: ConvexityTag,
    eval: Evaluator,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("tag", &self.tag)
            .finish_non_exhaustive()
    }
}

impl ScalarFunction {
    pub fn new(
        name: impl Into<String>,
        domain: Interval,
        tag: ConvexityTag,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            tag,
            eval: Arc::new(eval),
        }
    }

    pub fn tag(&self) -> ConvexityTag {
        self.tag
    }

    /// Same evaluator on a narrower (or different) domain.
    pub fn restricted_to(&self, domain: Interval) -> Self {
        Self {
            domain,
            ..self.clone()
        }
    }
}

impl RealFunction for ScalarFunction {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> Interval {
        self.domain
    }
    fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

/// The built-in test corpus.
pub fn catalog() -> Vec<ScalarFunction> {
    use ConvexityTag::*;
    let line = Interval::real_line();
    vec![
        ScalarFunction::new("square", line, OperatorConvexCertified, |t| t * t),
        ScalarFunction::new("inverse", Interval::positive(), OperatorConvexCertified, |t| 1.0 / t),
        ScalarFunction::new("neglog", Interval::positive(), OperatorConvexCertified, |t| -t.ln()),
        ScalarFunction::new("affine", line, OperatorConvexCertified, |t| 2.0 * t + 3.0),
        ScalarFunction::new("abs", line, ConvexOnly, f64::abs),
        ScalarFunction::new("quartic", line, ConvexOnly, |t| t.powi(4)),
        ScalarFunction::new("exp", line, ConvexOnly, f64::exp),
        ScalarFunction::new("shifted-square", line, OperatorConvexCertified, |t| t * t + 1.0),
        ScalarFunction::new("negsquare", line, NonConvex, |t| -t * t),
    ]
}

pub fn lookup(name: &str) -> Option<ScalarFunction> {
    catalog().into_iter().find(|f| f.name() == name)
}

pub fn catalog_names() -> Vec<String> {
    catalog().iter().map(|f| f.name().to_string()).collect()
}

/// Scalar midpoint test `f((s+t)/2) ≤ (f(s)+f(t))/2` over a grid of the
/// (bounded part of the) domain. Returns the most negative gap found.
pub fn scalar_midpoint_gap(f: &dyn RealFunction, lower: f64, upper: f64, points: usize) -> f64 {
    let grid: Vec<f64> = (0..points)
        .map(|i| lower + (upper - lower) * i as f64 / (points - 1).max(1) as f64)
        .collect();
    let mut worst = f64::INFINITY;
    for &s in &grid {
        for &t in &grid {
            let gap = 0.5 * (f.eval(s) + f.eval(t)) - f.eval(0.5 * (s + t));
            worst = worst.min(gap);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contents() {
        let names = catalog_names();
        for n in [
            "square",
            "inverse",
            "abs",
            "quartic",
            "exp",
            "negsquare",
            "shifted-square",
        ] {
            assert!(names.iter().any(|m| m == n), "missing {n}");
        }
        assert_eq!(lookup("square").unwrap().tag(), ConvexityTag::OperatorConvexCertified);
        assert_eq!(lookup("quartic").unwrap().tag(), ConvexityTag::ConvexOnly);
        assert_eq!(lookup("negsquare").unwrap().tag(), ConvexityTag::NonConvex);
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn exact_evaluators() {
        assert_eq!(lookup("shifted-square").unwrap().eval(0.0), 1.0);
        assert_eq!(lookup("inverse").unwrap().eval(4.0), 0.25);
        assert_eq!(lookup("abs").unwrap().eval(-2.5), 2.5);
        assert_eq!(lookup("quartic").unwrap().eval(-2.0), 16.0);
        assert_eq!(lookup("affine").unwrap().eval(1.0), 5.0);
    }

    #[test]
    fn negsquare_fails_midpoint_test() {
        let f = lookup("negsquare").unwrap();
        assert!(scalar_midpoint_gap(&f, -1.0, 1.0, 11) < 0.0);
        for name in ["square", "abs", "quartic", "exp", "shifted-square"] {
            let f = lookup(name).unwrap();
            assert!(scalar_midpoint_gap(&f, -2.0, 2.0, 21) >= -1e-12, "{name}");
        }
    }
}
