//! Randomized search for violations of matrix convexity of a given order.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{lookup, ScalarFunction};
use crate::interval::Interval;
use crate::json::{hermitian_json, RepJson};
use crate::sampling::{mix_seed, random_hermitian_in_with, rng_from_seed};
use crate::spectral::{checked_eval, HermitianMatrix, RealFunction, SpectralDecomposition, C64};
use crate::tolerance::ToleranceProfile;
use crate::verifiers::operator_convexity_defect;

/// A catalog function by name, or a Bendat–Sherman representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FunctionSpec {
    Catalog(String),
    Rep(RepJson),
}

impl FunctionSpec {
    /// The function restricted to `interval`, after checking that it can be
    /// evaluated there.
    pub fn resolve(&self, interval: &Interval) -> Result<ScalarFunction> {
        let f = match self {
            FunctionSpec::Catalog(name) => lookup(name).ok_or_else(|| {
                Error::InvalidConfig(format!("unknown function '{name}'"))
            })?,
            FunctionSpec::Rep(rep) => rep.to_rep()?.to_function("bs"),
        };
        for t in [interval.clamp_inside(interval.lower), interval.clamp_inside(interval.upper)] {
            if !f.domain().contains(t) {
                return Err(Error::EvaluationFailure {
                    name: f.name().to_string(),
                    t,
                });
            }
        }
        Ok(f.restricted_to(*interval))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeConfig {
    pub function: FunctionSpec,
    pub interval: Interval,
    pub orders: Vec<usize>,
    pub trials: usize,
    /// Number of interior grid points for λ: `{1/(g+1), …, g/(g+1)}`.
    pub grid: usize,
    pub seed: u64,
    pub refine_budget: usize,
    /// A trial is a counterexample when `minEig < −threshold·scale`.
    pub threshold: f64,
    pub max_counterexamples: usize,
    pub tol: ToleranceProfile,
}

impl ProbeConfig {
    pub fn new(function: FunctionSpec, interval: Interval) -> Self {
        Self {
            function,
            interval,
            orders: vec![2],
            trials: 1000,
            grid: 7,
            seed: 0,
            refine_budget: 500,
            threshold: 1e-6,
            max_counterexamples: 3,
            tol: ToleranceProfile::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::InvalidConfig("orders must be non-empty and at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(self.threshold > self.tol.order) {
            return Err(Error::InvalidConfig(format!(
                "threshold {} must exceed the order tolerance {}",
                self.threshold, self.tol.order
            )));
        }
        if !self.interval.is_bounded() {
            return Err(Error::UnboundedInterval(self.interval.to_string()));
        }
        Ok(())
    }

    fn lambda(&self, trial: usize, rng: &mut impl Rng) -> f64 {
        if self.grid > 0 && trial.is_multiple_of(2) {
            let k = (trial / 2) % self.grid + 1;
            k as f64 / (self.grid + 1) as f64
        } else {
            rng.random_range(0.0..1.0)
        }
    }
}

/// A pair `(x, y)` and weight `λ` at which `λf(x) + (1−λ)f(y) − f(λx + (1−λ)y)`
/// fails to be positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Counterexample {
    pub order: usize,
    #[serde(with = "hermitian_json")]
    pub x: HermitianMatrix,
    #[serde(with = "hermitian_json")]
    pub y: HermitianMatrix,
    pub lambda: f64,
    pub min_eig: f64,
    pub scale: f64,
    /// Per-trial seed the pair was drawn from.
    pub seed: u64,
    pub trial: usize,
    /// Least eigenvalue before refinement.
    pub initial_min_eig: f64,
    pub refine_steps: usize,
}

impl Counterexample {
    pub fn from_instance<F: RealFunction + ?Sized>(
        f: &F,
        x: HermitianMatrix,
        y: HermitianMatrix,
        lambda: f64,
        seed: u64,
        trial: usize,
        tol: &ToleranceProfile,
    ) -> Result<Self> {
        let r = operator_convexity_defect(f, &x, &y, lambda, tol)?;
        Ok(Self {
            order: x.dim(),
            x,
            y,
            lambda,
            min_eig: r.min_eig,
            scale: r.scale,
            seed,
            trial,
            initial_min_eig: r.min_eig,
            refine_steps: 0,
        })
    }

    /// Recomputes the least eigenvalue of the defect from the stored data.
    pub fn revalidate<F: RealFunction + ?Sized>(&self, f: &F, tol: &ToleranceProfile) -> Result<f64> {
        Ok(operator_convexity_defect(f, &self.x, &self.y, self.lambda, tol)?.min_eig)
    }

    pub fn is_violation(&self, threshold: f64) -> bool {
        self.min_eig < -threshold * self.scale
    }

    /// The same witness one order up: `x ⊕ s`, `y ⊕ s`. The extra diagonal
    /// entry of the defect is `0`, so the least eigenvalue is unchanged.
    pub fn padded<F: RealFunction + ?Sized>(&self, f: &F, s: f64, tol: &ToleranceProfile) -> Result<Self> {
        let pad = |h: &HermitianMatrix| {
            HermitianMatrix::block_diagonal(&[h.clone(), HermitianMatrix::scalar(1, s)])
        };
        let mut c = Self::from_instance(f, pad(&self.x), pad(&self.y), self.lambda, self.seed, self.trial, tol)?;
        c.initial_min_eig = self.initial_min_eig;
        c.refine_steps = self.refine_steps;
        Ok(c)
    }
}

/// Moves every eigenvalue of `h` into `interval`.
fn clip_spectrum(h: &HermitianMatrix, interval: &Interval) -> HermitianMatrix {
    let eig = h.eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().map(|&l| interval.clamp_inside(l)).collect();
    let clipped = SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: eig.eigenvectors,
    };
    HermitianMatrix::new(clipped.reconstruct()).unwrap_or_else(|_| h.clone())
}

fn perturb<R: Rng>(h: &HermitianMatrix, step: f64, rng: &mut R) -> HermitianMatrix {
    let n = h.dim();
    let mut m = h.as_matrix().clone();
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..n);
    let delta = step * if rng.random::<bool>() { 1.0 } else { -1.0 };
    if i == j {
        m[(i, i)] += C64::new(delta, 0.0);
    } else {
        let d = if rng.random::<bool>() {
            C64::new(delta, 0.0)
        } else {
            C64::new(0.0, delta)
        };
        m[(i, j)] += d;
        m[(j, i)] += d.conj();
    }
    HermitianMatrix::new(m).unwrap_or_else(|_| h.clone())
}

/// Derivative-free descent on the least eigenvalue of the defect: random
/// single-coordinate moves on `x`, `y` or `λ`, accepted only on strict
/// improvement, with the step shrinking geometrically after each rejection.
pub fn refine<F: RealFunction + ?Sized>(
    c: &Counterexample,
    f: &F,
    interval: &Interval,
    budget: usize,
    tol: &ToleranceProfile,
) -> Counterexample {
    let mut best = c.clone();
    if budget == 0 {
        return best;
    }
    let mut rng = rng_from_seed(mix_seed(c.seed, 0x5e_ed0f_2efe));
    let width = if interval.is_bounded() { interval.width() } else { 1.0 };
    let mut step = 0.05 * width;
    for _ in 0..budget {
        let (mut x, mut y, mut lambda) = (best.x.clone(), best.y.clone(), best.lambda);
        match rng.random_range(0..5) {
            0 | 1 => x = clip_spectrum(&perturb(&x, step, &mut rng), interval),
            2 | 3 => y = clip_spectrum(&perturb(&y, step, &mut rng), interval),
            _ => {
                let delta = step / width * if rng.random::<bool>() { 1.0 } else { -1.0 };
                lambda = (lambda + delta).clamp(1e-6, 1.0 - 1e-6);
            }
        }
        best.refine_steps += 1;
        match operator_convexity_defect(f, &x, &y, lambda, tol) {
            Ok(r) if r.min_eig < best.min_eig => {
                best.x = x;
                best.y = y;
                best.lambda = lambda;
                best.min_eig = r.min_eig;
                best.scale = r.scale;
                step *= 1.2;
            }
            _ => step *= 0.97,
        }
        step = step.max(1e-12 * width);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderSummary {
    pub order: usize,
    pub trials: usize,
    pub min_defect: f64,
    pub min_defect_trial: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub orders: Vec<OrderSummary>,
    pub counterexamples: Vec<Counterexample>,
    pub trials_executed: usize,
    pub wall_clock_seconds: f64,
}

impl ProbeReport {
    pub fn found_counterexample(&self) -> bool {
        !self.counterexamples.is_empty()
    }

    pub fn min_defect(&self, order: usize) -> Option<f64> {
        self.orders.iter().find(|o| o.order == order).map(|o| o.min_defect)
    }
}

struct Trial {
    x: HermitianMatrix,
    y: HermitianMatrix,
    lambda: f64,
    seed: u64,
}

fn draw(config: &ProbeConfig, order: usize, trial: usize) -> Result<Trial> {
    let seed = mix_seed(mix_seed(config.seed, order as u64), trial as u64);
    let mut rng = rng_from_seed(seed);
    let x = random_hermitian_in_with(order, &config.interval, &mut rng)?;
    let y = random_hermitian_in_with(order, &config.interval, &mut rng)?;
    let lambda = config.lambda(trial, &mut rng);
    Ok(Trial { x, y, lambda, seed })
}

pub fn probe(config: &ProbeConfig) -> Result<ProbeReport> {
    config.validate()?;
    let start = Instant::now();
    let f = config.function.resolve(&config.interval)?;
    // Make sure the function is finite on the interval before sampling.
    for k in 0..=16 {
        let t = config.interval.clamp_inside(
            config.interval.lower + config.interval.width() * k as f64 / 16.0,
        );
        checked_eval(&f, t, 0.0)?;
    }

    let mut orders = Vec::with_capacity(config.orders.len());
    let mut counterexamples = Vec::new();
    let mut executed = 0;
    for &order in &config.orders {
        let outcomes: Vec<Result<(f64, f64)>> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let trial = draw(config, order, t)?;
                let r = operator_convexity_defect(&f, &trial.x, &trial.y, trial.lambda, &config.tol)?;
                Ok((r.min_eig, r.scale))
            })
            .collect();
        let mut summary = OrderSummary {
            order,
            trials: config.trials,
            min_defect: f64::INFINITY,
            min_defect_trial: 0,
            violations: 0,
        };
        let mut violating = Vec::new();
        for (t, outcome) in outcomes.into_iter().enumerate() {
            let (min_eig, scale) = outcome?;
            if min_eig < summary.min_defect {
                summary.min_defect = min_eig;
                summary.min_defect_trial = t;
            }
            if min_eig < -config.threshold * scale {
                summary.violations += 1;
                if violating.len() < config.max_counterexamples {
                    violating.push(t);
                }
            }
        }
        executed += config.trials;
        orders.push(summary);

        let found: Vec<Counterexample> = violating
            .par_iter()
            .map(|&t| {
                let trial = draw(config, order, t)?;
                let c = Counterexample::from_instance(
                    &f, trial.x, trial.y, trial.lambda, trial.seed, t, &config.tol,
                )?;
                Ok(refine(&c, &f, &config.interval, config.refine_budget, &config.tol))
            })
            .collect::<Result<Vec<_>>>()?;
        counterexamples.extend(found);
    }

    Ok(ProbeReport {
        config: config.clone(),
        orders,
        counterexamples,
        trials_executed: executed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: &str, lo: f64, hi: f64, orders: Vec<usize>, trials: usize) -> ProbeConfig {
        ProbeConfig {
            orders,
            trials,
            ..ProbeConfig::new(
                FunctionSpec::Catalog(name.into()),
                Interval::closed(lo, hi).unwrap(),
            )
        }
    }

    #[test]
    fn square_has_no_counterexample() {
        let r = probe(&config("square", -1.0, 1.0, vec![1, 2, 4], 2000)).unwrap();
        assert!(!r.found_counterexample());
        for o in &r.orders {
            assert!(o.min_defect >= -1e-10, "{o:?}");
        }
        assert_eq!(r.trials_executed, 6000);
    }

    #[test]
    fn abs_is_convex_at_order_one() {
        let r = probe(&config("abs", -1.0, 1.0, vec![1], 2000)).unwrap();
        assert!(!r.found_counterexample());
    }

    #[test]
    fn abs_fails_at_order_two() {
        let r = probe(&config("abs", -1.0, 1.0, vec![2], 10_000)).unwrap();
        assert!(r.found_counterexample());
        let f = lookup("abs").unwrap();
        let tol = ToleranceProfile::default();
        for c in &r.counterexamples {
            assert!(c.min_eig <= -1e-3);
            assert!(c.min_eig <= c.initial_min_eig);
            assert!((c.revalidate(&f, &tol).unwrap() - c.min_eig).abs() <= 1e-12);
            let up = c.padded(&f, 0.0, &tol).unwrap();
            assert_eq!(up.order, 3);
            assert!((up.min_eig - c.min_eig).abs() <= 1e-12);
            assert!(up.is_violation(1e-6));
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let mut c = config("quartic", -2.0, 2.0, vec![2], 500);
        c.seed = 11;
        let mut a = probe(&c).unwrap();
        let mut b = probe(&c).unwrap();
        a.wall_clock_seconds = 0.0;
        b.wall_clock_seconds = 0.0;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn refine_budget_zero_is_identity() {
        let f = lookup("quartic").unwrap();
        let tol = ToleranceProfile::default();
        let i = Interval::closed(-2.0, 2.0).unwrap();
        let c = Counterexample::from_instance(
            &f,
            HermitianMatrix::from_real_diagonal(&[1.0, -1.0]),
            HermitianMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(),
            0.5,
            3,
            0,
            &tol,
        )
        .unwrap();
        assert_eq!(refine(&c, &f, &i, 0, &tol), c);
        let r = refine(&c, &f, &i, 300, &tol);
        assert!(r.min_eig <= c.min_eig);
    }

    #[test]
    fn config_validation() {
        let mut c = config("square", -1.0, 1.0, vec![2], 10);
        c.threshold = 1e-12;
        assert!(matches!(probe(&c), Err(Error::InvalidConfig(_))));
        let c = config("square", -1.0, 1.0, vec![], 10);
        assert!(probe(&c).is_err());
        let c = config("inverse", -1.0, 1.0, vec![2], 10);
        assert!(matches!(probe(&c), Err(Error::EvaluationFailure { .. })));
        let c = config("nosuch", -1.0, 1.0, vec![2], 10);
        assert!(matches!(probe(&c), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn counterexample_json_round_trip() {
        let r = probe(&config("abs", -1.0, 1.0, vec![2], 2000)).unwrap();
        let c = &r.counterexamples[0];
        let text = serde_json::to_string(c).unwrap();
        let back: Counterexample = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, c);
    }
}
