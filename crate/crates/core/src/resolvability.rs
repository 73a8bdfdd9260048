//! Random-coding simulation of channel resolvability: codes of `M` i.i.d. codewords, exact
//! evaluation of how well their uniform mixture imitates `W_p`, Monte Carlo estimates of the
//! expected quality together with the analytic bounds, and exhaustive search on tiny instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    l1_distance, relative_entropy, Channel, Distribution, EnumerationBudget, Memoryless,
};
use crate::error::{Error, Result};
use crate::exponents::phi;
use crate::numeric::{checked_pow, eta, mean_and_std_error, CompensatedSum};
use crate::rng::{stream, InverseCdf};
use crate::spectrum::{InformationSpectrum, TailPair};

/// Minimum number of Monte Carlo trials.
pub const MIN_TRIALS: usize = 100;

/// Largest number of multisets [`brute_force_min`] will visit.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// `M` codewords (input indices of the product channel), repetitions allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvabilityCode {
    pub codewords: Vec<usize>,
}

impl ResolvabilityCode {
    pub fn new(codewords: Vec<usize>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::InvalidParameter(
                "a code needs at least one codeword".into(),
            ));
        }
        Ok(Self { codewords })
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }
}

/// Draws `size` codewords i.i.d. from `p^n`, one coordinate at a time.
pub fn sample_code_with<R: rand::Rng + ?Sized>(
    model: &Memoryless,
    size: usize,
    rng: &mut R,
) -> Result<ResolvabilityCode> {
    let sampler = InverseCdf::new(model.input().probs());
    let k = model.channel().input_size();
    let codewords = (0..size)
        .map(|_| {
            let mut index = 0;
            let mut weight = 1;
            for _ in 0..model.block_length() {
                index += weight * sampler.sample(rng);
                weight *= k;
            }
            index
        })
        .collect();
    ResolvabilityCode::new(codewords)
}

/// Draws `size` codewords i.i.d. from `p` using stream 0 of `seed`.
pub fn sample_code(p: &Distribution, size: usize, seed: u64) -> Result<ResolvabilityCode> {
    let sampler = InverseCdf::new(p.probs());
    let mut rng = stream(seed, 0);
    ResolvabilityCode::new((0..size).map(|_| sampler.sample(&mut rng)).collect())
}

/// Exact quality of a code: variational distance and divergence from `W_{p^n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodeQuality {
    pub eps: f64,
    pub div: f64,
}

/// Output law of the uniform mixture of the codewords' rows.
pub fn code_output(code: &ResolvabilityCode, model: &Memoryless) -> Result<Vec<f64>> {
    let mut acc = vec![CompensatedSum::new(); model.output_size()];
    for &x in &code.codewords {
        if x >= model.input_size() {
            return Err(Error::InvalidParameter(format!(
                "codeword {x} outside the input alphabet of size {}",
                model.input_size()
            )));
        }
        for (a, v) in acc.iter_mut().zip(model.row(x)) {
            a.add(v);
        }
    }
    let m = code.size() as f64;
    Ok(acc.iter().map(|a| a.value() / m).collect())
}

pub fn eval_code(code: &ResolvabilityCode, model: &Memoryless) -> Result<CodeQuality> {
    let mixture = code_output(code, model)?;
    let target = model.output_distribution();
    Ok(CodeQuality {
        eps: l1_distance(&mixture, target),
        div: relative_entropy(&mixture, target),
    })
}

/// Sample mean of a per-trial quantity next to its analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub bound: f64,
    pub seed: u64,
}

impl McEstimate {
    /// One-sided statistical check `mean <= bound + k * std_error`.
    pub fn within(&self, k: f64) -> bool {
        self.mean <= self.bound + k * self.std_error
    }
}

/// Monte Carlo estimates of the expected code quality with their bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub tail: TailPair,
    /// Expected variational distance against `2 delta + sqrt(delta' / M)`.
    pub vd: McEstimate,
    /// Expected divergence against `eta(delta) + delta ln|Y^n| + delta' / M`.
    pub kl_eta: McEstimate,
    /// Expected divergence against `min_t ln(1 + M^t e^phi(t)) / (-t)`.
    pub kl_phi: McEstimate,
    /// The `t` achieving the divergence bound.
    pub kl_phi_t: f64,
}

impl McReport {
    /// The smaller of the two divergence bounds.
    pub fn kl_bound(&self) -> f64 {
        self.kl_eta.bound.min(self.kl_phi.bound)
    }
}

/// The grid of `t` values used by the exponential divergence bound.
pub fn kl_phi_grid() -> Vec<f64> {
    (0..11).map(|k| -0.5 + 0.045 * k as f64).collect()
}

/// `min_t ln(1 + M^t e^{n phi(t|W,p)}) / (-t)` over [`kl_phi_grid`]; returns `(bound, t)`.
pub fn kl_phi_bound(model: &Memoryless, size: usize) -> Result<(f64, f64)> {
    let n = model.block_length() as f64;
    let mut best = (f64::INFINITY, f64::NAN);
    for t in kl_phi_grid() {
        let exponent = t * (size as f64).ln() + n * phi(t, model.channel(), model.input())?;
        let value = exponent.exp().ln_1p() / (-t);
        if value < best.0 {
            best = (value, t);
        }
    }
    Ok(best)
}

/// Analytic bounds on the expected code quality for `M` codewords at threshold `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationBounds {
    pub tail: TailPair,
    pub vd: f64,
    pub kl_eta: f64,
    pub kl_phi: f64,
    pub kl_phi_t: f64,
}

pub fn expectation_bounds(
    model: &Memoryless,
    size: usize,
    threshold: f64,
    budget: &EnumerationBudget,
) -> Result<ExpectationBounds> {
    let spectrum =
        InformationSpectrum::new(model.input(), model.channel(), model.block_length(), budget)?;
    let tail = spectrum.tail_pair(threshold)?;
    let m = size as f64;
    let (kl_phi, kl_phi_t) = kl_phi_bound(model, size)?;
    Ok(ExpectationBounds {
        tail,
        vd: 2.0 * tail.delta + (tail.delta_prime / m).sqrt(),
        kl_eta: eta(tail.delta)
            + tail.delta * (model.output_size() as f64).ln()
            + tail.delta_prime / m,
        kl_phi,
        kl_phi_t,
    })
}

/// Quality of the codes drawn in trials `0..trials`, trial `i` using stream `i` of `seed`. The
/// result does not depend on the number of worker threads.
pub fn sample_qualities(
    model: &Memoryless,
    size: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<CodeQuality>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, trial as u64);
            let code = sample_code_with(model, size, &mut rng)?;
            eval_code(&code, model)
        })
        .collect()
}

pub fn mc_expectation(
    model: &Memoryless,
    size: usize,
    threshold: f64,
    trials: usize,
    seed: u64,
    budget: &EnumerationBudget,
) -> Result<McReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_TRIALS} trials are required, got {trials}"
        )));
    }
    if size == 0 {
        return Err(Error::InvalidParameter("code size must be positive".into()));
    }
    let bounds = expectation_bounds(model, size, threshold, budget)?;
    let qualities = sample_qualities(model, size, trials, seed)?;
    let eps: Vec<f64> = qualities.iter().map(|q| q.eps).collect();
    let div: Vec<f64> = qualities.iter().map(|q| q.div).collect();
    let (eps_mean, eps_se) = mean_and_std_error(&eps);
    let (div_mean, div_se) = mean_and_std_error(&div);
    let estimate = |mean, std_error, bound| McEstimate {
        mean,
        std_error,
        trials,
        bound,
        seed,
    };
    Ok(McReport {
        tail: bounds.tail,
        vd: estimate(eps_mean, eps_se, bounds.vd),
        kl_eta: estimate(div_mean, div_se, bounds.kl_eta),
        kl_phi: estimate(div_mean, div_se, bounds.kl_phi),
        kl_phi_t: bounds.kl_phi_t,
    })
}

/// Best codes over all multisets of `M` codewords, separately for each criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForce {
    pub eps_code: ResolvabilityCode,
    pub eps_min: f64,
    pub div_code: ResolvabilityCode,
    pub div_min: f64,
}

fn multiset_count(alphabet: usize, size: usize) -> Option<u128> {
    // binomial(alphabet + size - 1, size)
    let mut acc: u128 = 1;
    for i in 1..=size as u128 {
        acc = acc.checked_mul(alphabet as u128 + i - 1)? / i;
    }
    Some(acc)
}

pub fn brute_force_min(size: usize, model: &Memoryless) -> Result<BruteForce> {
    if size == 0 {
        return Err(Error::InvalidParameter("code size must be positive".into()));
    }
    let k = model.input_size();
    let count = multiset_count(k, size).unwrap_or(u128::MAX);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "number of codeword multisets",
            size: count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let rows: Vec<Vec<f64>> = (0..k).map(|x| model.row(x)).collect();
    let target = model.output_distribution();
    let m = size as f64;
    let mut current = vec![0usize; size];
    let mut best: Option<BruteForce> = None;
    loop {
        let mut mixture = vec![0.0; model.output_size()];
        for &x in &current {
            for (a, v) in mixture.iter_mut().zip(&rows[x]) {
                *a += v;
            }
        }
        mixture.iter_mut().for_each(|v| *v /= m);
        let eps = l1_distance(&mixture, target);
        let div = relative_entropy(&mixture, target);
        match &mut best {
            None => {
                best = Some(BruteForce {
                    eps_code: ResolvabilityCode {
                        codewords: current.clone(),
                    },
                    eps_min: eps,
                    div_code: ResolvabilityCode {
                        codewords: current.clone(),
                    },
                    div_min: div,
                })
            }
            Some(b) => {
                if eps < b.eps_min {
                    b.eps_min = eps;
                    b.eps_code.codewords.clone_from(&current);
                }
                if div < b.div_min {
                    b.div_min = div;
                    b.div_code.codewords.clone_from(&current);
                }
            }
        }
        // next non-decreasing sequence
        let Some(pos) = current.iter().rposition(|&x| x + 1 < k) else {
            break;
        };
        let next = current[pos] + 1;
        for v in &mut current[pos..] {
            *v = next;
        }
    }
    Ok(best.expect("at least one multiset"))
}

/// Outcome of the counting argument linking identification codes to resolvability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HvVerdict {
    /// Grid approximation of `max_p min_code eps`.
    pub eps_approx: f64,
    /// Whether `1 - mu - lambda > eps_approx`.
    pub hypothesis: bool,
    /// `|X|^M`, the implied ceiling on the number of identification messages, when the
    /// hypothesis holds.
    pub ceiling: Option<u128>,
}

pub fn hv_counting_check(
    mu: f64,
    lambda: f64,
    size: usize,
    w: &Channel,
    p_grid: &[Distribution],
) -> Result<HvVerdict> {
    if p_grid.is_empty() {
        return Err(Error::InvalidParameter("input-law grid is empty".into()));
    }
    let mut eps_approx = f64::NEG_INFINITY;
    for p in p_grid {
        let model = Memoryless::single(w.clone(), p.clone())?;
        eps_approx = eps_approx.max(brute_force_min(size, &model)?.eps_min);
    }
    let hypothesis = 1.0 - mu - lambda > eps_approx;
    Ok(HvVerdict {
        eps_approx,
        hypothesis,
        ceiling: if hypothesis {
            Some(checked_pow(w.input_size(), size).unwrap_or(u128::MAX))
        } else {
            None
        },
    })
}

/// The counting verdict for a known `eps(M, W)`.
pub fn hv_verdict_from_eps(
    mu: f64,
    lambda: f64,
    eps: f64,
    input_size: usize,
    size: usize,
) -> HvVerdict {
    let hypothesis = 1.0 - mu - lambda > eps;
    HvVerdict {
        eps_approx: eps,
        hypothesis,
        ceiling: hypothesis.then(|| checked_pow(input_size, size).unwrap_or(u128::MAX)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn single(w: Channel, p: Distribution) -> Memoryless {
        Memoryless::single(w, p).unwrap()
    }

    #[test]
    fn sample_code_examples() {
        let point = Distribution::point(2, 0);
        assert_eq!(sample_code(&point, 3, 5).unwrap().codewords, vec![0, 0, 0]);
        let p = Distribution::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(
            sample_code(&p, 20, 42).unwrap(),
            sample_code(&p, 20, 42).unwrap()
        );
        assert!(sample_code(&p, 0, 1).is_err());
    }

    #[test]
    fn eval_code_examples() {
        let u = Distribution::uniform(2);
        let id = single(Channel::identity(2), u.clone());
        let q = eval_code(&ResolvabilityCode::new(vec![0, 1]).unwrap(), &id).unwrap();
        assert_eq!((q.eps, q.div), (0.0, 0.0));
        let q = eval_code(&ResolvabilityCode::new(vec![0, 0]).unwrap(), &id).unwrap();
        assert_eq!(q.eps, 1.0);
        assert!((q.div - LN_2).abs() < 1e-15);
        let bsc = single(Channel::bsc(0.1).unwrap(), u);
        let q = eval_code(&ResolvabilityCode::new(vec![0]).unwrap(), &bsc).unwrap();
        assert!((q.eps - 0.8).abs() < 1e-15);
        assert!((q.div - 0.368_064_207_168_497).abs() < 1e-12);
        assert!(eval_code(&ResolvabilityCode::new(vec![2]).unwrap(), &bsc).is_err());
    }

    #[test]
    fn degenerate_monte_carlo() {
        let budget = EnumerationBudget::default();
        let model = single(Channel::bsc(0.1).unwrap(), Distribution::uniform(2));
        let report = mc_expectation(&model, 1, 1.9, 100, 3, &budget).unwrap();
        assert!((report.vd.mean - 0.8).abs() < 1e-15);
        assert!(report.vd.std_error < 1e-15);
        assert!((report.vd.bound - 1.64f64.sqrt()).abs() < 1e-12);
        assert!((report.kl_eta.mean - 0.368_064_207_168_497).abs() < 1e-12);
        assert!((report.kl_phi.bound - 1.648_898_922_670_098).abs() < 1e-9);
        assert_eq!(report.kl_phi_t, -0.5);
        assert!(mc_expectation(&model, 1, 1.9, 99, 3, &budget).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let u = Distribution::uniform(2);
        let id = single(Channel::identity(2), u);
        let b = brute_force_min(2, &id).unwrap();
        assert_eq!(b.eps_min, 0.0);
        assert_eq!(b.eps_code.codewords, vec![0, 1]);
        assert_eq!(brute_force_min(1, &id).unwrap().eps_min, 1.0);

        // Three multisets {0,0}, {0,1}, {1,1} scanned by hand.
        let p = Distribution::new(vec![0.75, 0.25]).unwrap();
        let model = single(Channel::bsc(0.3).unwrap(), p);
        let by_hand = [vec![0, 0], vec![0, 1], vec![1, 1]]
            .into_iter()
            .map(|c| {
                eval_code(&ResolvabilityCode::new(c).unwrap(), &model)
                    .unwrap()
                    .eps
            })
            .fold(f64::INFINITY, f64::min);
        let b = brute_force_min(2, &model).unwrap();
        assert_eq!(b.eps_min, by_hand);
        assert!((b.eps_min - 0.2).abs() < 1e-12);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let model = single(Channel::identity(30), Distribution::uniform(30));
        assert!(matches!(
            brute_force_min(8, &model),
            Err(Error::TooLarge { .. })
        ));
        assert_eq!(multiset_count(2, 2), Some(3));
        assert_eq!(multiset_count(4, 3), Some(20));
    }

    #[test]
    fn counting_check_examples() {
        let v = hv_verdict_from_eps(0.4, 0.4, 0.3, 2, 2);
        assert!(!v.hypothesis);
        assert_eq!(v.ceiling, None);
        let v = hv_verdict_from_eps(0.05, 0.05, 0.3, 2, 2);
        assert!(v.hypothesis);
        assert_eq!(v.ceiling, Some(4));
        let v = hv_counting_check(
            0.3,
            0.3,
            2,
            &Channel::identity(2),
            &[Distribution::uniform(2)],
        )
        .unwrap();
        assert_eq!(v.eps_approx, 0.0);
        assert_eq!(v.ceiling, Some(4));
        assert!(hv_counting_check(0.1, 0.1, 2, &Channel::identity(2), &[]).is_err());
    }
}
