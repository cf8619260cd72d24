//! Lyapunov exponents of the substitution-matrix cocycle.
//!
//! The cocycle is `x ↦ A(x)`, the substitution matrix of the branch taken at
//! `x`, and its forward products `M_{[0,n]} = A(x) A(Tx) ⋯ A(Tⁿx)` are the
//! matrices of the S-adic system. Their singular values are those of the
//! transposed product `A(Tⁿx)ᵀ ⋯ A(x)ᵀ`, which is what the frame is pushed
//! through. [`Cocycle::Transposed`] pushes `A` itself instead.
//!
//! Estimates are Monte Carlo over independent Lebesgue-random starting points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mcf::{Algorithm, Branch, PiecewiseProjective, SimplexPoint};

/// Orbits discarded for touching a boundary before a trial gives up.
pub const MAX_REDRAWS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cocycle {
    /// Products `M_{[0,n]}` of the substitution matrices.
    Forward,
    /// Products `A(Tⁿx) ⋯ A(x)`.
    Transposed,
    /// Identity matrices along the orbit; every exponent is exactly 0.
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleRun {
    pub algorithm: Algorithm,
    pub steps: usize,
    pub burn_in: usize,
    pub reorth_every: usize,
    pub seed: u64,
    pub cocycle: Cocycle,
}

impl CocycleRun {
    pub fn new(algorithm: Algorithm, steps: usize, seed: u64) -> Self {
        CocycleRun { algorithm, steps, burn_in: 1000.min(steps / 2), reorth_every: 1, seed, cocycle: Cocycle::Forward }
    }

    fn validate(&self) -> Result<()> {
        if self.steps <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "steps ({}) must exceed burn_in ({})",
                self.steps, self.burn_in
            )));
        }
        if self.reorth_every == 0 {
            return Err(Error::InvalidArgument("reorth_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub theta: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: usize,
    pub total_steps: usize,
}

impl ExponentEstimate {
    pub fn sum(&self) -> f64 {
        self.theta.iter().sum()
    }

    /// Three combined standard errors.
    pub fn sum_tolerance(&self) -> f64 {
        3.0 * self.stderr.iter().sum::<f64>()
    }
}

/// Dirichlet(1, …, 1) point from normalized exponentials.
fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Result<SimplexPoint<f64>> {
    let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    SimplexPoint::normalized(e)
}

struct BranchTable {
    branches: Vec<Branch>,
    /// Row-major matrices actually applied to the frame.
    applied: Vec<Vec<f64>>,
}

impl BranchTable {
    fn new(alg: Algorithm, cocycle: Cocycle) -> Result<Self> {
        let d = alg.dimension();
        let branches = alg.branches();
        let mut applied = Vec::with_capacity(branches.len());
        for &b in &branches {
            let rows = alg.branch_matrix(b)?.to_f64_rows();
            let m = (0..d * d)
                .map(|k| {
                    let (i, j) = (k / d, k % d);
                    match cocycle {
                        Cocycle::Forward => rows[j][i],
                        Cocycle::Transposed => rows[i][j],
                        Cocycle::Identity => f64::from(u8::from(i == j)),
                    }
                })
                .collect();
            applied.push(m);
        }
        Ok(BranchTable { branches, applied })
    }

    fn matrix(&self, b: Branch) -> &[f64] {
        let k = self.branches.iter().position(|&x| x == b).expect("branch of the algorithm");
        &self.applied[k]
    }
}

/// Modified Gram–Schmidt on the columns of the row-major `d × d` matrix `q`;
/// returns the diagonal of `R`.
fn orthonormalize(q: &mut [f64], d: usize) -> Result<Vec<f64>> {
    let mut r = vec![0.0; d];
    for k in 0..d {
        for j in 0..k {
            let dot: f64 = (0..d).map(|i| q[i * d + j] * q[i * d + k]).sum();
            for i in 0..d {
                q[i * d + k] -= dot * q[i * d + j];
            }
        }
        let norm = (0..d).map(|i| q[i * d + k] * q[i * d + k]).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical(format!("frame column {} collapsed (norm {})", k, norm)));
        }
        for i in 0..d {
            q[i * d + k] /= norm;
        }
        r[k] = norm;
    }
    Ok(r)
}

fn mat_mul(a: &[f64], q: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik != 0.0 {
                for j in 0..d {
                    out[i * d + j] += aik * q[k * d + j];
                }
            }
        }
    }
    out
}

enum TrialOutcome {
    Done(Vec<f64>),
    Boundary,
}

fn run_orbit(run: &CocycleRun, table: &BranchTable, start: SimplexPoint<f64>) -> Result<TrialOutcome> {
    let alg = run.algorithm;
    let d = alg.dimension();
    let mut x = start;
    let mut q: Vec<f64> = (0..d * d).map(|k| f64::from(u8::from(k / d == k % d))).collect();
    let mut logs = vec![0.0; d];
    let mut pending = 0usize;
    for n in 0..run.steps {
        if alg.on_boundary(&x) {
            return Ok(TrialOutcome::Boundary);
        }
        let Ok(step) = alg.step(&x) else {
            return Ok(TrialOutcome::Boundary);
        };
        q = mat_mul(table.matrix(step.branch), &q, d);
        x = step.point;
        pending += 1;
        let last = n + 1 == run.steps;
        if pending == run.reorth_every || last || n + 1 == run.burn_in {
            let r = orthonormalize(&mut q, d)?;
            if n >= run.burn_in {
                for (acc, rk) in logs.iter_mut().zip(&r) {
                    *acc += rk.ln();
                }
            }
            pending = 0;
        }
    }
    let span = (run.steps - run.burn_in) as f64;
    let mut theta: Vec<f64> = logs.into_iter().map(|l| l / span).collect();
    theta.sort_by(|a, b| b.total_cmp(a));
    Ok(TrialOutcome::Done(theta))
}

fn run_trial(run: &CocycleRun, table: &BranchTable, trial: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    rng.set_stream(trial as u64);
    let d = run.algorithm.dimension();
    for _ in 0..=MAX_REDRAWS {
        let start = random_point(&mut rng, d)?;
        if let TrialOutcome::Done(theta) = run_orbit(run, table, start)? {
            return Ok(theta);
        }
    }
    Err(Error::DegenerateSampling(format!(
        "trial {} hit a boundary on {} consecutive orbits",
        trial,
        MAX_REDRAWS + 1
    )))
}

/// Benettin estimate of the exponents, averaged over `trials` random orbits.
///
/// Trials run in parallel; each draws from its own stream of the seeded
/// generator and results are combined in trial order, so the estimate does
/// not depend on the number of workers.
pub fn estimate_exponents(run: &CocycleRun, trials: usize) -> Result<ExponentEstimate> {
    run.validate()?;
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {}", trials)));
    }
    let table = BranchTable::new(run.algorithm, run.cocycle)?;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(run, &table, t))
        .collect::<Result<Vec<_>>>()?;
    let d = run.algorithm.dimension();
    let k = trials as f64;
    let mut theta = vec![0.0; d];
    let mut stderr = vec![0.0; d];
    for i in 0..d {
        let mean = per_trial.iter().map(|t| t[i]).sum::<f64>() / k;
        let var = per_trial.iter().map(|t| (t[i] - mean).powi(2)).sum::<f64>() / (k - 1.0);
        theta[i] = mean;
        stderr[i] = (var / k).sqrt();
    }
    Ok(ExponentEstimate { theta, stderr, trials, total_steps: trials * run.steps })
}

/// `θ₁ > margin·stderr₁` and `θ₂ < −margin·stderr₂`.
pub fn check_pisot(e: &ExponentEstimate, margin: f64) -> bool {
    if e.theta.len() < 2 || e.stderr.len() < 2 {
        return false;
    }
    e.theta[0] > margin * e.stderr[0] && e.theta[1] < -margin * e.stderr[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(alg: Algorithm, steps: usize, seed: u64) -> CocycleRun {
        CocycleRun { burn_in: 100, ..CocycleRun::new(alg, steps, seed) }
    }

    #[test]
    fn identity_cocycle_has_zero_exponents() {
        for alg in [Algorithm::CassaigneSelmer, Algorithm::Brun] {
            let r = CocycleRun { cocycle: Cocycle::Identity, ..run(alg, 2000, 5) };
            let e = estimate_exponents(&r, 3).unwrap();
            assert!(e.theta.iter().chain(&e.stderr).all(|&x| x == 0.0), "{:?}", e);
            assert!(!check_pisot(&e, 3.0));
        }
    }

    #[test]
    fn invalid_runs_are_rejected() {
        let r = run(Algorithm::CassaigneSelmer, 100, 1);
        assert!(estimate_exponents(&r, 5).is_err());
        let r = CocycleRun { reorth_every: 0, ..run(Algorithm::CassaigneSelmer, 1000, 1) };
        assert!(estimate_exponents(&r, 5).is_err());
        assert!(estimate_exponents(&run(Algorithm::CassaigneSelmer, 1000, 1), 1).is_err());
    }

    #[test]
    fn exponents_sum_to_zero_and_are_ordered() {
        for alg in [Algorithm::CassaigneSelmer, Algorithm::Brun] {
            for cocycle in [Cocycle::Forward, Cocycle::Transposed] {
                let e = estimate_exponents(&CocycleRun { cocycle, ..run(alg, 20_000, 11) }, 4).unwrap();
                assert!(e.sum().abs() < 1e-9, "{:?}", e);
                assert!(e.theta.windows(2).all(|w| w[0] >= w[1]));
                assert!(e.theta[0] > 0.0);
            }
        }
    }

    #[test]
    fn cadence_does_not_change_the_limit_much() {
        let a = estimate_exponents(&run(Algorithm::CassaigneSelmer, 20_000, 3), 4).unwrap();
        let b = estimate_exponents(&CocycleRun { reorth_every: 4, ..run(Algorithm::CassaigneSelmer, 20_000, 3) }, 4).unwrap();
        for (x, y) in a.theta.iter().zip(&b.theta) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_in_the_seed() {
        let r = run(Algorithm::Brun, 5000, 42);
        assert_eq!(estimate_exponents(&r, 3).unwrap(), estimate_exponents(&r, 3).unwrap());
        let other = estimate_exponents(&CocycleRun { seed: 43, ..r }, 3).unwrap();
        assert_ne!(estimate_exponents(&r, 3).unwrap(), other);
    }

    #[test]
    fn forward_and_transposed_share_exponents() {
        let f = estimate_exponents(&run(Algorithm::CassaigneSelmer, 50_000, 8), 4).unwrap();
        let t = estimate_exponents(&CocycleRun { cocycle: Cocycle::Transposed, ..run(Algorithm::CassaigneSelmer, 50_000, 8) }, 4)
            .unwrap();
        for i in 0..3 {
            assert!((f.theta[i] - t.theta[i]).abs() < 5.0 * (f.stderr[i] + t.stderr[i]) + 1e-3, "{:?} {:?}", f, t);
        }
    }

    #[test]
    fn pisot_check() {
        let e = ExponentEstimate { theta: vec![0.2, -0.05, -0.15], stderr: vec![0.01, 0.01, 0.01], trials: 5, total_steps: 0 };
        assert!(check_pisot(&e, 3.0));
        assert!(!check_pisot(&e, 6.0));
        let zero = ExponentEstimate { theta: vec![0.0; 3], stderr: vec![0.0; 3], trials: 5, total_steps: 0 };
        assert!(!check_pisot(&zero, 3.0));
    }
}
