//! Likelihood-ratio tail functionals and the finite-length information spectrum.
//!
//! For an input law `p` and channel `W` the information density is `ln W_x(y) - ln W_p(y)`. The
//! tail pair at threshold `C` splits the outputs into the strict tail (ratio `> C`), whose mass
//! is `delta`, and the inclusive body (ratio `<= C`), whose second moment is `delta_prime`.

use serde::Serialize;

use crate::channel::{Channel, Distribution, EnumerationBudget};
use crate::error::{check_len, Error, Result};
use crate::numeric::{checked_pow, CompensatedSum};

/// `delta` and `delta_prime` at a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPair {
    pub delta: f64,
    pub delta_prime: f64,
    pub threshold: f64,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && !threshold.is_nan() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "threshold",
            value: threshold,
            allowed: "(0, inf]",
        })
    }
}

/// Tail pair of `(p, W)` at threshold `C`, comparing ratios in the linear domain.
pub fn tail_pair(p: &Distribution, w: &Channel, threshold: f64) -> Result<TailPair> {
    check_len("input distribution", w.input_size(), p.len())?;
    check_threshold(threshold)?;
    let wp = w.mix(p.probs());
    let mut delta = CompensatedSum::new();
    let mut delta_prime = CompensatedSum::new();
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &wxy) in w.row(x).iter().enumerate() {
            if wxy == 0.0 || wp[y] <= 0.0 {
                continue;
            }
            let ratio = wxy / wp[y];
            if ratio > threshold {
                delta.add(px * wxy);
            } else {
                delta_prime.add(px * wxy * ratio);
            }
        }
    }
    Ok(TailPair {
        delta: delta.value().clamp(0.0, 1.0),
        delta_prime: delta_prime.value(),
        threshold,
    })
}

/// A single-letter atom of the information density: probability mass and log-ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Atom {
    mass: f64,
    density: f64,
}

/// Exact law of the information density of `(W^n, p^n)`, stored as atoms over compositions of
/// the single-letter atoms. The `n`-letter density of a sequence only depends on how many times
/// each single-letter atom occurs.
#[derive(Debug, Clone)]
pub struct InformationSpectrum {
    n: usize,
    /// `(log mass, total density)` per composition, sorted by density.
    points: Vec<(f64, f64)>,
}

impl InformationSpectrum {
    pub fn new(
        p: &Distribution,
        w: &Channel,
        n: usize,
        budget: &EnumerationBudget,
    ) -> Result<Self> {
        check_len("input distribution", w.input_size(), p.len())?;
        if n == 0 {
            return Err(Error::InvalidParameter(
                "block length must be positive".into(),
            ));
        }
        budget.admit(checked_pow(w.output_size(), n))?;
        let atoms = single_letter_atoms(p, w);
        budget.admit(composition_count(n, atoms.len()))?;
        let log_factorial: Vec<f64> = std::iter::once(0.0)
            .chain((1..=n).scan(0.0, |acc, k| {
                *acc += (k as f64).ln();
                Some(*acc)
            }))
            .collect();
        let log_masses: Vec<f64> = atoms.iter().map(|a| a.mass.ln()).collect();
        let mut points = Vec::new();
        let mut counts = vec![0usize; atoms.len()];
        enumerate_compositions(n, 0, &mut counts, &mut |counts| {
            let mut log_mass = log_factorial[n];
            let mut density = CompensatedSum::new();
            for (i, &k) in counts.iter().enumerate() {
                if k > 0 {
                    log_mass += k as f64 * log_masses[i] - log_factorial[k];
                    density.add(k as f64 * atoms[i].density);
                }
            }
            points.push((log_mass, density.value()));
        });
        points.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(Self { n, points })
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    /// Number of distinct compositions carried.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `P{ (1/n) density <= a }`.
    pub fn cdf(&self, a: f64) -> f64 {
        let level = a * self.n as f64;
        if level >= self.max_density() {
            return 1.0;
        }
        let mut acc = CompensatedSum::new();
        for &(log_mass, density) in &self.points {
            if density <= level {
                acc.add(log_mass.exp());
            }
        }
        acc.value().clamp(0.0, 1.0)
    }

    /// Tail pair at threshold `C` for the `n`-fold product, compared in the log domain.
    pub fn tail_pair(&self, threshold: f64) -> Result<TailPair> {
        check_threshold(threshold)?;
        let level = threshold.ln();
        let mut delta = CompensatedSum::new();
        let mut delta_prime = CompensatedSum::new();
        for &(log_mass, density) in &self.points {
            if density > level {
                delta.add(log_mass.exp());
            } else {
                delta_prime.add((log_mass + density).exp());
            }
        }
        Ok(TailPair {
            delta: delta.value().clamp(0.0, 1.0),
            delta_prime: delta_prime.value(),
            threshold,
        })
    }

    /// Largest density value with positive mass.
    pub fn max_density(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

/// Single-letter atoms with equal density merged, in first-occurrence order.
fn single_letter_atoms(p: &Distribution, w: &Channel) -> Vec<Atom> {
    let wp = w.mix(p.probs());
    let mut atoms: Vec<Atom> = Vec::new();
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &wxy) in w.row(x).iter().enumerate() {
            if wxy == 0.0 || wp[y] <= 0.0 {
                continue;
            }
            let density = wxy.ln() - wp[y].ln();
            match atoms.iter_mut().find(|a| a.density == density) {
                Some(a) => a.mass += px * wxy,
                None => atoms.push(Atom {
                    mass: px * wxy,
                    density,
                }),
            }
        }
    }
    atoms
}

fn composition_count(n: usize, parts: usize) -> Option<u128> {
    // binomial(n + parts - 1, parts - 1)
    let k = parts.saturating_sub(1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(n as u128 + i)? / i;
    }
    Some(acc)
}

fn enumerate_compositions<F: FnMut(&[usize])>(
    remaining: usize,
    index: usize,
    counts: &mut Vec<usize>,
    visit: &mut F,
) {
    if index + 1 == counts.len() {
        counts[index] = remaining;
        visit(counts);
        counts[index] = 0;
        return;
    }
    for k in 0..=remaining {
        counts[index] = k;
        enumerate_compositions(remaining - k, index + 1, counts, visit);
    }
    counts[index] = 0;
}

/// `P{ (1/n) ln (W^n_x / W^n_{p^n})(y) <= a }` under `p^n x W^n`.
pub fn spectrum_cdf(
    p: &Distribution,
    w: &Channel,
    a: f64,
    n: usize,
    budget: &EnumerationBudget,
) -> Result<f64> {
    Ok(InformationSpectrum::new(p, w, n, budget)?.cdf(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc() -> Channel {
        Channel::bsc(0.1).unwrap()
    }

    #[test]
    fn tail_pair_examples() {
        let u = Distribution::uniform(2);
        let t = tail_pair(&u, &bsc(), 1.0).unwrap();
        assert!((t.delta - 0.9).abs() < 1e-15);
        assert!((t.delta_prime - 0.02).abs() < 1e-15);
        let t = tail_pair(&u, &bsc(), 1.9).unwrap();
        assert_eq!(t.delta, 0.0);
        assert!((t.delta_prime - 1.64).abs() < 1e-14);
        let t = tail_pair(&u, &Channel::identity(2), 2.0).unwrap();
        assert_eq!(t.delta, 0.0);
        assert_eq!(t.delta_prime, 2.0);
        assert!(tail_pair(&u, &bsc(), 0.0).is_err());
        assert!(tail_pair(&u, &bsc(), -1.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        let budget = EnumerationBudget::default();
        let u = Distribution::uniform(2);
        let v = spectrum_cdf(&u, &bsc(), 0.0, 1, &budget).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        assert_eq!(spectrum_cdf(&u, &bsc(), 10.0, 3, &budget).unwrap(), 1.0);
        let id = Channel::identity(2);
        let v = spectrum_cdf(&u, &id, std::f64::consts::LN_2, 2, &budget).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(spectrum_cdf(&u, &id, 0.69, 2, &budget).unwrap(), 0.0);
    }

    #[test]
    fn product_tail_pair_matches_materialized() {
        let budget = EnumerationBudget::default();
        let w = Channel::new(vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.2, 0.6]]).unwrap();
        let p = Distribution::new(vec![0.35, 0.65]).unwrap();
        let spec = InformationSpectrum::new(&p, &w, 3, &budget).unwrap();
        let wn = w.product(3, &budget).unwrap();
        let pn = p.product(3, &budget).unwrap();
        for c in [0.5, 1.0, 1.7, 3.0, 10.0] {
            let a = spec.tail_pair(c).unwrap();
            let b = tail_pair(&pn, &wn, c).unwrap();
            assert!((a.delta - b.delta).abs() < 1e-12, "{c}");
            assert!((a.delta_prime - b.delta_prime).abs() < 1e-12, "{c}");
        }
    }

    #[test]
    fn composition_counts() {
        assert_eq!(composition_count(4, 1), Some(1));
        assert_eq!(composition_count(4, 2), Some(5));
        assert_eq!(composition_count(3, 3), Some(10));
    }

    #[test]
    fn budget_applies_to_output_alphabet() {
        let small = EnumerationBudget::new(8);
        let u = Distribution::uniform(2);
        assert!(spectrum_cdf(&u, &bsc(), 0.0, 3, &small).is_ok());
        assert!(matches!(
            spectrum_cdf(&u, &bsc(), 0.0, 4, &small),
            Err(Error::BudgetExceeded {
                required: 16,
                cap: 8
            })
        ));
    }
}
