//! Identification codes built from resolvability: a family of large, weakly overlapping subsets
//! of `M` well-behaved codewords, with decoding regions formed from likelihood-ratio sets.
//!
//! For a codeword `x` the region `U_x = { y : W_x(y) / W_p(y) > C }` collects the outputs that
//! strongly point at `x`. Message `i` sends a uniformly chosen codeword of its subset `A_i` and
//! is identified on `D_i = union of U_x over x in A_i`.

use std::collections::BTreeSet;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{EnumerationBudget, Memoryless};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::resolvability::sample_code_with;
use crate::rng::stream;
use crate::spectrum::InformationSpectrum;

/// Largest family size the construction will aim for.
pub const MAX_FAMILY_SIZE: usize = 1_000_000;

/// Parameters of the subset family: ground set size `M`, relative subset size `tau` and
/// overlap fraction `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdParams {
    pub size: usize,
    pub tau: f64,
    pub kappa: f64,
}

impl AdParams {
    /// Validates `0 < tau < 1/3`, `0 < kappa < 1` and `kappa ln(1/tau - 1) > ln 2 + 1`.
    pub fn new(size: usize, tau: f64, kappa: f64) -> Result<Self> {
        let params = Self { size, tau, kappa };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidParameter(
                "ground set must be non-empty".into(),
            ));
        }
        if !(self.tau > 0.0 && self.tau < 1.0 / 3.0) {
            return Err(Error::OutOfRange {
                name: "tau",
                value: self.tau,
                allowed: "(0, 1/3)",
            });
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::OutOfRange {
                name: "kappa",
                value: self.kappa,
                allowed: "(0, 1)",
            });
        }
        let lhs = self.kappa * (1.0 / self.tau - 1.0).ln();
        let rhs = std::f64::consts::LN_2 + 1.0;
        if !(lhs > rhs) {
            return Err(Error::Infeasible(format!(
                "kappa ln(1/tau - 1) = {lhs} must exceed ln 2 + 1 = {rhs}"
            )));
        }
        if self.subset_size() == 0 {
            return Err(Error::Infeasible(format!(
                "subset size floor(tau M) is zero for M = {} and tau = {}",
                self.size, self.tau
            )));
        }
        Ok(())
    }

    /// `floor(tau M)`.
    pub fn subset_size(&self) -> usize {
        (self.tau * self.size as f64).floor() as usize
    }

    /// Pairwise intersections must stay strictly below `kappa floor(tau M)`.
    pub fn intersection_cap(&self) -> f64 {
        self.kappa * self.subset_size() as f64
    }

    /// Largest intersection allowed.
    pub fn max_intersection(&self) -> usize {
        let cap = self.intersection_cap();
        let floor = cap.floor();
        if floor == cap {
            floor as usize - 1
        } else {
            floor as usize
        }
    }

    /// The guaranteed family size `floor(e^(tau M) / (M e))`, saturating at `usize::MAX`.
    pub fn guaranteed_count(&self) -> usize {
        let log = self.tau * self.size as f64 - (self.size as f64).ln() - 1.0;
        let value = log.exp().floor();
        if value >= usize::MAX as f64 {
            usize::MAX
        } else {
            value as usize
        }
    }
}

/// Subsets of `{0, .., M-1}`, each stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    pub ground_size: usize,
    pub subsets: Vec<Vec<usize>>,
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

impl SetFamily {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Largest pairwise intersection (0 for fewer than two subsets).
    pub fn max_intersection(&self) -> usize {
        (0..self.subsets.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..self.subsets.len())
                    .map(|j| intersection_size(&self.subsets[i], &self.subsets[j]))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Checks subset sizes, ranges and every pairwise intersection against `params`.
    pub fn verify(&self, params: &AdParams) -> Result<()> {
        if self.ground_size != params.size {
            return Err(Error::InvalidShape(format!(
                "family over {} elements, parameters expect {}",
                self.ground_size, params.size
            )));
        }
        let size = params.subset_size();
        for (i, subset) in self.subsets.iter().enumerate() {
            let sorted = subset.windows(2).all(|w| w[0] < w[1]);
            if subset.len() != size || !sorted || subset.iter().any(|&v| v >= self.ground_size) {
                return Err(Error::InvalidShape(format!(
                    "subset {i} is not a sorted {size}-subset of the ground set"
                )));
            }
        }
        let worst = self.max_intersection();
        if worst as f64 >= params.intersection_cap() {
            return Err(Error::InvalidShape(format!(
                "pairwise intersection {worst} reaches the cap {}",
                params.intersection_cap()
            )));
        }
        Ok(())
    }
}

/// Outcome of the randomized family construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyBuild {
    pub family: SetFamily,
    pub target: usize,
    pub complete: bool,
    pub attempts: usize,
}

/// Draws random `floor(tau M)`-subsets, rejecting any that overlaps an accepted subset too much,
/// until `target` subsets are accepted (default: the guaranteed count) or `max_attempts` draws
/// are spent. The result is verified exhaustively.
pub fn build_set_family(
    params: &AdParams,
    target: Option<usize>,
    seed: u64,
    max_attempts: usize,
) -> Result<FamilyBuild> {
    params.validate()?;
    let target = target.unwrap_or_else(|| params.guaranteed_count());
    if target == 0 {
        return Err(Error::Infeasible(format!(
            "family size target is zero (guaranteed count for M = {} is {})",
            params.size,
            params.guaranteed_count()
        )));
    }
    if target > MAX_FAMILY_SIZE {
        return Err(Error::TooLarge {
            what: "set family size",
            size: target as u128,
            limit: MAX_FAMILY_SIZE as u128,
        });
    }
    let size = params.subset_size();
    let limit = params.max_intersection();
    let mut rng = stream(seed, 0);
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(target);
    let mut attempts = 0;
    while subsets.len() < target && attempts < max_attempts {
        attempts += 1;
        let mut candidate = index::sample(&mut rng, params.size, size).into_vec();
        candidate.sort_unstable();
        if subsets
            .iter()
            .all(|s| intersection_size(s, &candidate) <= limit)
        {
            subsets.push(candidate);
        }
    }
    let family = SetFamily {
        ground_size: params.size,
        subsets,
    };
    family.verify(params)?;
    Ok(FamilyBuild {
        complete: family.len() == target,
        family,
        target,
        attempts,
    })
}

/// Constants of the identification construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdParams {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
    /// Number of codewords `M`.
    pub size: usize,
    /// Likelihood-ratio threshold `C`.
    pub threshold: f64,
}

impl IdParams {
    /// Validates `1 > 1/alpha + 1/alpha'` and `gamma = 1 - 1/beta - 1/beta' > 0`, together with
    /// positivity of `M` and `C`.
    pub fn new(
        alpha: f64,
        alpha_prime: f64,
        beta: f64,
        beta_prime: f64,
        size: usize,
        threshold: f64,
    ) -> Result<Self> {
        let params = Self {
            alpha,
            alpha_prime,
            beta,
            beta_prime,
            size,
            threshold,
        };
        params.validate()?;
        Ok(params)
    }

    /// The block-length recipe `alpha = beta = 1 + 2/n`, `alpha' = beta' = n + 2`.
    pub fn block_defaults(n: usize, size: usize, threshold: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "block length must be positive".into(),
            ));
        }
        let a = 1.0 + 2.0 / n as f64;
        let b = n as f64 + 2.0;
        Self::new(a, b, a, b, size, threshold)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("alpha_prime", self.alpha_prime),
            ("beta", self.beta),
            ("beta_prime", self.beta_prime),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    allowed: "(0, inf)",
                });
            }
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::OutOfRange {
                name: "threshold",
                value: self.threshold,
                allowed: "(0, inf)",
            });
        }
        let spread = 1.0 / self.alpha + 1.0 / self.alpha_prime;
        if !(spread < 1.0) {
            return Err(Error::Infeasible(format!(
                "1/alpha + 1/alpha' = {spread} must be below 1"
            )));
        }
        if !(self.gamma() > 0.0) {
            return Err(Error::Infeasible(format!(
                "gamma = 1 - 1/beta - 1/beta' = {} must be positive",
                self.gamma()
            )));
        }
        if self.size == 0 {
            return Err(Error::InvalidParameter("code size must be positive".into()));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        1.0 - 1.0 / self.beta - 1.0 / self.beta_prime
    }

    /// Number of candidates drawn per attempt, `ceil(M / gamma)`.
    pub fn candidates(&self) -> usize {
        let ratio = self.size as f64 / self.gamma();
        // gamma usually comes out a hair off a simple fraction, so snap before rounding up
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// `alpha' beta' ceil(M/gamma) / C`.
    pub fn cross_term(&self) -> f64 {
        self.alpha_prime * self.beta_prime * self.candidates() as f64 / self.threshold
    }
}

/// The quantities the construction guarantees against, for one channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdBounds {
    /// `E_p W_x{ W_x/W_p <= C }`.
    pub body_mass: f64,
    /// `alpha beta E_p W_x{ ratio <= C }`: bound on `mu` and on each codeword's miss mass.
    pub mu_bound: f64,
    /// `alpha' beta' ceil(M/gamma) / C`: bound on each codeword's cross mass.
    pub cross_bound: f64,
    /// `beta E_p W_x{ ratio <= C } + cross_bound`; the construction is guaranteed when below 1.
    pub feasibility: f64,
    pub feasible: bool,
}

impl IdBounds {
    /// `kappa + alpha' beta' ceil(M/gamma) / C`: the bound on `lambda` for overlap fraction
    /// `kappa`.
    pub fn lambda_bound(&self, kappa: f64) -> f64 {
        kappa + self.cross_bound
    }
}

pub fn id_bounds(
    model: &Memoryless,
    params: &IdParams,
    budget: &EnumerationBudget,
) -> Result<IdBounds> {
    params.validate()?;
    let spectrum =
        InformationSpectrum::new(model.input(), model.channel(), model.block_length(), budget)?;
    let tail = spectrum.tail_pair(params.threshold)?;
    let body_mass = (1.0 - tail.delta).max(0.0);
    let cross_bound = params.cross_term();
    let feasibility = params.beta * body_mass + cross_bound;
    Ok(IdBounds {
        body_mass,
        mu_bound: params.alpha * params.beta * body_mass,
        cross_bound,
        feasibility,
        feasible: feasibility < 1.0,
    })
}

/// The likelihood region `U_x` of a product input index, as a sorted list of outputs.
pub fn likelihood_region(model: &Memoryless, x: usize, threshold: f64) -> Vec<usize> {
    let target = model.output_distribution();
    model
        .row(x)
        .iter()
        .zip(target)
        .enumerate()
        .filter(|(_, (&w, &q))| w > 0.0 && (q <= 0.0 || w / q > threshold))
        .map(|(y, _)| y)
        .collect()
}

fn mass_on(row: &[f64], outputs: &[usize]) -> f64 {
    outputs
        .iter()
        .map(|&y| row[y])
        .collect::<CompensatedSum>()
        .value()
}

/// `M` distinct codewords with their measured miss and cross masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub codewords: Vec<usize>,
    /// `W_{x_i}(U_{x_i}^c)` per codeword.
    pub miss: Vec<f64>,
    /// `W_{x_i}(union of U_{x_j}, j != i)` per codeword.
    pub cross: Vec<f64>,
    pub bounds: IdBounds,
    pub attempts: usize,
}

/// Draws `ceil(M/gamma)` candidates from `p^n` per attempt and keeps `M` distinct candidates
/// whose miss mass is at most `alpha beta E_p W_x{ratio <= C}` and whose cross mass is at most
/// `alpha' beta' (M' - 1) / C`. The returned codewords are re-verified against both guarantees
/// on the final set.
///
/// Configurations whose feasibility value is not below 1 are refused unless `allow_infeasible`
/// is set; then the selection may fail, but anything returned is still verified.
pub fn select_codewords(
    model: &Memoryless,
    params: &IdParams,
    seed: u64,
    max_retries: usize,
    allow_infeasible: bool,
    budget: &EnumerationBudget,
) -> Result<Selection> {
    let bounds = id_bounds(model, params, budget)?;
    if !bounds.feasible && !allow_infeasible {
        return Err(Error::Infeasible(format!(
            "beta E_p W_x{{ratio <= C}} + alpha' beta' ceil(M/gamma)/C = {} is not below 1",
            bounds.feasibility
        )));
    }
    let m = params.size;
    let pool = params.candidates();
    let candidate_cross =
        params.alpha_prime * params.beta_prime * (pool as f64 - 1.0) / params.threshold;
    for attempt in 0..max_retries {
        let mut rng = stream(seed, attempt as u64);
        let candidates = sample_code_with(model, pool, &mut rng)?.codewords;
        let regions: Vec<Vec<usize>> = candidates
            .iter()
            .map(|&x| likelihood_region(model, x, params.threshold))
            .collect();
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        let mut seen = BTreeSet::new();
        for (i, &x) in candidates.iter().enumerate() {
            if chosen.len() == m {
                break;
            }
            if seen.contains(&x) {
                continue;
            }
            let row = model.row(x);
            let miss = 1.0 - mass_on(&row, &regions[i]);
            let others: BTreeSet<usize> = regions
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, r)| r.iter().copied())
                .collect();
            let cross = mass_on(&row, &others.into_iter().collect::<Vec<_>>());
            if miss <= bounds.mu_bound && cross <= candidate_cross {
                seen.insert(x);
                chosen.push(x);
            }
        }
        if chosen.len() < m {
            continue;
        }
        let (miss, cross) = selection_masses(model, &chosen, params.threshold);
        let ok = miss.iter().all(|&v| v <= bounds.mu_bound)
            && cross.iter().all(|&v| v <= bounds.cross_bound);
        if ok {
            return Ok(Selection {
                codewords: chosen,
                miss,
                cross,
                bounds,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::RetriesExhausted {
        what: "codeword selection",
        attempts: max_retries,
    })
}

/// Miss and cross masses of a final codeword set.
pub fn selection_masses(
    model: &Memoryless,
    codewords: &[usize],
    threshold: f64,
) -> (Vec<f64>, Vec<f64>) {
    let regions: Vec<Vec<usize>> = codewords
        .iter()
        .map(|&x| likelihood_region(model, x, threshold))
        .collect();
    let mut miss = Vec::with_capacity(codewords.len());
    let mut cross = Vec::with_capacity(codewords.len());
    for (i, &x) in codewords.iter().enumerate() {
        let row = model.row(x);
        miss.push(1.0 - mass_on(&row, &regions[i]));
        let others: BTreeSet<usize> = regions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        cross.push(mass_on(&row, &others.into_iter().collect::<Vec<_>>()));
    }
    (miss, cross)
}

/// An identification code: message `i` sends a uniform codeword from `subsets[i]` and is
/// identified on `regions[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdCode {
    pub codewords: Vec<usize>,
    /// Sorted indices into `codewords`.
    pub subsets: Vec<Vec<usize>>,
    /// Sorted output indices.
    pub regions: Vec<Vec<usize>>,
}

impl IdCode {
    pub fn messages(&self) -> usize {
        self.subsets.len()
    }
}

pub fn assemble_id_code(
    codewords: &[usize],
    family: &SetFamily,
    model: &Memoryless,
    threshold: f64,
) -> Result<IdCode> {
    if family.ground_size != codewords.len() {
        return Err(Error::DimensionMismatch {
            context: "set family ground size",
            expected: codewords.len(),
            found: family.ground_size,
        });
    }
    let single: Vec<Vec<usize>> = codewords
        .iter()
        .map(|&x| likelihood_region(model, x, threshold))
        .collect();
    let regions = family
        .subsets
        .iter()
        .map(|subset| {
            subset
                .iter()
                .flat_map(|&i| single[i].iter().copied())
                .collect::<BTreeSet<usize>>()
                .into_iter()
                .collect()
        })
        .collect();
    Ok(IdCode {
        codewords: codewords.to_vec(),
        subsets: family.subsets.clone(),
        regions,
    })
}

/// First- and second-kind identification errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdErrors {
    /// `max_i W_{Q_i}(D_i^c)`.
    pub mu: f64,
    /// `max_{i != j} W_{Q_j}(D_i)`, zero for a single message.
    pub lambda: f64,
}

pub fn eval_id_code(code: &IdCode, model: &Memoryless) -> Result<IdErrors> {
    for &x in &code.codewords {
        if x >= model.input_size() {
            return Err(Error::InvalidParameter(format!(
                "codeword {x} outside the input alphabet of size {}",
                model.input_size()
            )));
        }
    }
    for region in &code.regions {
        if region.iter().any(|&y| y >= model.output_size()) {
            return Err(Error::InvalidParameter(
                "region refers to an unknown output".into(),
            ));
        }
    }
    let rows: Vec<Vec<f64>> = code.codewords.iter().map(|&x| model.row(x)).collect();
    // hits[i][c] = W_{x_c}(D_i)
    let hits: Vec<Vec<f64>> = code
        .regions
        .par_iter()
        .map(|region| rows.iter().map(|row| mass_on(row, region)).collect())
        .collect();
    let uniform_mass = |i: usize, j: usize| {
        let subset = &code.subsets[j];
        subset
            .iter()
            .map(|&c| hits[i][c])
            .collect::<CompensatedSum>()
            .value()
            / subset.len() as f64
    };
    let n = code.messages();
    let mut mu: f64 = 0.0;
    let mut lambda: f64 = 0.0;
    for i in 0..n {
        mu = mu.max(1.0 - uniform_mass(i, i));
        for j in 0..n {
            if i != j {
                lambda = lambda.max(uniform_mass(i, j));
            }
        }
    }
    Ok(IdErrors {
        mu: mu.max(0.0),
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Channel, Distribution};

    #[test]
    fn family_parameters() {
        let p = AdParams::new(100, 0.1, 0.8).unwrap();
        assert_eq!(p.subset_size(), 10);
        assert_eq!(p.guaranteed_count(), 81);
        assert_eq!(p.max_intersection(), 7);
        assert!(matches!(
            AdParams::new(100, 0.1, 0.5),
            Err(Error::Infeasible(_))
        ));
        assert!(AdParams::new(100, 0.4, 0.9).is_err());
        assert!(AdParams::new(100, 0.1, 1.0).is_err());
    }

    #[test]
    fn builds_a_full_family() {
        let p = AdParams::new(100, 0.1, 0.8).unwrap();
        let build = build_set_family(&p, None, 17, 100_000).unwrap();
        assert!(build.complete);
        assert_eq!(build.family.len(), 81);
        assert!(build.family.max_intersection() <= 7);
        assert!(build.family.subsets.iter().all(|s| s.len() == 10));
    }

    #[test]
    fn single_subset_is_vacuously_valid() {
        let p = AdParams::new(20, 0.15, 0.99).unwrap();
        assert_eq!(p.guaranteed_count(), 0);
        let build = build_set_family(&p, Some(1), 0, 10).unwrap();
        assert!(build.complete);
        assert_eq!(build.family.subsets[0].len(), 3);
        assert!(build_set_family(&p, None, 0, 10).is_err());
    }

    #[test]
    fn partial_family_is_flagged() {
        // singletons must be disjoint, so at most 10 fit
        let p = AdParams::new(10, 0.15, 0.99).unwrap();
        assert_eq!(p.max_intersection(), 0);
        let build = build_set_family(&p, Some(11), 3, 500).unwrap();
        assert!(!build.complete);
        assert_eq!(build.family.len(), 10);
    }

    #[test]
    fn verification_catches_overlap() {
        let p = AdParams::new(10, 0.15, 0.99).unwrap();
        let family = SetFamily {
            ground_size: 10,
            subsets: vec![vec![4], vec![4]],
        };
        assert!(family.verify(&p).is_err());
    }

    #[test]
    fn parameter_conditions() {
        let d = IdParams::block_defaults(3, 10, 2.0).unwrap();
        assert!((d.gamma() - 0.2).abs() < 1e-15);
        assert_eq!(d.candidates(), 50);
        assert!(IdParams::new(2.0, 2.0, 4.0, 4.0, 10, 2.0).is_err());
        assert!(IdParams::new(3.0, 3.0, 2.0, 2.0, 10, 2.0).is_err());
        assert!(IdParams::new(3.0, 3.0, 4.0, 4.0, 10, 2.0).is_ok());
        assert!(IdParams::new(3.0, 3.0, 4.0, 4.0, 0, 2.0).is_err());
    }

    #[test]
    fn identity_code_is_perfect() {
        let model = Memoryless::single(Channel::identity(4), Distribution::uniform(4)).unwrap();
        let family = SetFamily {
            ground_size: 4,
            subsets: vec![vec![0, 1], vec![2, 3]],
        };
        let code = assemble_id_code(&[0, 1, 2, 3], &family, &model, 2.0).unwrap();
        assert_eq!(code.regions, vec![vec![0, 1], vec![2, 3]]);
        let e = eval_id_code(&code, &model).unwrap();
        assert_eq!((e.mu, e.lambda), (0.0, 0.0));

        let everything = IdCode {
            codewords: vec![0, 1],
            subsets: vec![vec![0], vec![1]],
            regions: vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]],
        };
        let e = eval_id_code(&everything, &model).unwrap();
        assert_eq!((e.mu, e.lambda), (0.0, 1.0));

        let single = IdCode {
            codewords: vec![0],
            subsets: vec![vec![0]],
            regions: vec![vec![0]],
        };
        assert_eq!(eval_id_code(&single, &model).unwrap().lambda, 0.0);
    }

    #[test]
    fn selection_on_identity_channel() {
        let budget = EnumerationBudget::default();
        let model = Memoryless::single(Channel::identity(4), Distribution::uniform(4)).unwrap();
        let params = IdParams::new(4.0, 4.0, 4.0, 4.0, 2, 2.0).unwrap();
        let bounds = id_bounds(&model, &params, &budget).unwrap();
        // every output is in its own region, so the miss term vanishes but the cross term is 32
        assert_eq!(bounds.body_mass, 0.0);
        assert!(!bounds.feasible);
        assert!(select_codewords(&model, &params, 1, 10, false, &budget).is_err());
        let sel = select_codewords(&model, &params, 1, 10, true, &budget).unwrap();
        assert_eq!(sel.codewords.len(), 2);
        assert_ne!(sel.codewords[0], sel.codewords[1]);
        assert_eq!(sel.miss, vec![0.0, 0.0]);
        assert_eq!(sel.cross, vec![0.0, 0.0]);
    }

    #[test]
    fn infeasible_configuration_is_refused_by_default() {
        let budget = EnumerationBudget::default();
        let constant = Channel::constant(2, &Distribution::new(vec![0.3, 0.7]).unwrap());
        let model = Memoryless::single(constant, Distribution::uniform(2)).unwrap();
        let params = IdParams::new(3.0, 3.0, 4.0, 4.0, 7, 2.0).unwrap();
        let bounds = id_bounds(&model, &params, &budget).unwrap();
        assert_eq!(bounds.body_mass, 1.0);
        assert!(!bounds.feasible);
        assert!(matches!(
            select_codewords(&model, &params, 1, 10, false, &budget),
            Err(Error::Infeasible(_))
        ));
    }
}
