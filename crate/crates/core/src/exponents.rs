//! Exponent generating functions, their worst-case versions, the exponent lower bounds built on
//! them, capacity and secrecy-rate optimization, and the small-deviation comparison.
//!
//! * `psi(s | W, p) = ln E_p sum_y W_x(y)^(1+s) W_p(y)^(-s)` for `s` in `[0, 1]`.
//! * `phi(t | W, p) = ln sum_y (E_p W_x(y)^(1/(1+t)))^(1+t)` for `t` in `[-1/2, 1]`.
//!
//! The worst-case versions maximize a power sum over the input simplex, certified by the
//! stationarity condition of the optimum.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{relative_entropy, Channel, Distribution};
use crate::error::{check_len, Error, Result};
use crate::numeric::{grid_points, refine_grid_max, stable_sum, CompensatedSum};
use crate::simplex::{PowerSum, SimplexOptimum, SolverOptions};

/// Spacing of the grid used for every one-dimensional maximization over `s` or `t`.
pub const GRID_STEP: f64 = 1e-3;

fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    allowed: &'static str,
) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            allowed,
        })
    }
}

fn check_rate(name: &'static str, rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: rate,
            allowed: "(0, inf)",
        })
    }
}

/// `psi(s | W, p)`.
pub fn psi(s: f64, w: &Channel, p: &Distribution) -> Result<f64> {
    check_range("s", s, 0.0, 1.0, "[0, 1]")?;
    check_len("input distribution", w.input_size(), p.len())?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let wp = w.mix(p.probs());
    let mut acc = CompensatedSum::new();
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &wxy) in w.row(x).iter().enumerate() {
            if wxy > 0.0 {
                acc.add(px * wxy * (wxy / wp[y]).powf(s));
            }
        }
    }
    Ok(acc.value().ln())
}

/// `phi(t | W, p)`; covers both the negative range and the positive (Gallager) range.
pub fn phi(t: f64, w: &Channel, p: &Distribution) -> Result<f64> {
    check_range("t", t, -0.5, 1.0, "[-1/2, 1]")?;
    check_len("input distribution", w.input_size(), p.len())?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let a = elementwise_power(w, 1.0 / (1.0 + t));
    Ok(PowerSum::new(&a, w.input_size(), w.output_size(), 1.0 + t)
        .value(p.probs())
        .ln())
}

/// `ln sum_y (E_p W_x(y)^(1+s))^(1-s)`, the quantity maximized by [`psi_worst`].
pub fn psi_maximand(s: f64, w: &Channel, p: &Distribution) -> Result<f64> {
    check_range("s", s, 0.0, 1.0, "[0, 1]")?;
    check_len("input distribution", w.input_size(), p.len())?;
    let a = elementwise_power(w, 1.0 + s);
    Ok(PowerSum::new(&a, w.input_size(), w.output_size(), 1.0 - s)
        .value(p.probs())
        .ln())
}

fn elementwise_power(w: &Channel, exponent: f64) -> Vec<f64> {
    w.rows()
        .flat_map(|row| {
            row.iter()
                .map(move |&v| if v > 0.0 { v.powf(exponent) } else { 0.0 })
        })
        .collect()
}

/// Maximum of an exponent maximand over input laws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub value: f64,
    pub argmax: Distribution,
    /// Relative stationarity residual `max_x D_x / lambda - 1` at `argmax`.
    pub residual: f64,
    pub iterations: usize,
}

fn worst_case(w: &Channel, a: &[f64], power: f64) -> Result<WorstCase> {
    let SimplexOptimum {
        value,
        argmax,
        residual,
        iterations,
    } = PowerSum::new(a, w.input_size(), w.output_size(), power)
        .maximize(&SolverOptions::default())?;
    Ok(WorstCase {
        value: value.ln(),
        argmax: Distribution::from_weights(&argmax)?,
        residual,
        iterations,
    })
}

/// `ln max_p sum_y (E_p W_x(y)^(1+s))^(1-s)`.
pub fn psi_worst(s: f64, w: &Channel) -> Result<WorstCase> {
    check_range("s", s, 0.0, 1.0, "[0, 1]")?;
    worst_case(w, &elementwise_power(w, 1.0 + s), 1.0 - s)
}

/// `max_p phi(t | W, p)` for `t` in `[-1/2, 0]`.
pub fn phi_worst(t: f64, w: &Channel) -> Result<WorstCase> {
    check_range("t", t, -0.5, 0.0, "[-1/2, 0]")?;
    worst_case(w, &elementwise_power(w, 1.0 / (1.0 + t)), 1.0 + t)
}

/// Stationarity residual of `p` for the `psi_worst` maximand: `max_x D_x / lambda - 1`, zero
/// exactly at a maximizer.
pub fn psi_worst_residual(s: f64, w: &Channel, p: &Distribution) -> Result<f64> {
    check_range("s", s, 0.0, 1.0, "[0, 1]")?;
    check_len("input distribution", w.input_size(), p.len())?;
    Ok(stationarity_residual(
        w,
        &elementwise_power(w, 1.0 + s),
        1.0 - s,
        p.probs(),
    ))
}

/// Stationarity residual of `p` for the `phi_worst` maximand.
pub fn phi_worst_residual(t: f64, w: &Channel, p: &Distribution) -> Result<f64> {
    check_range("t", t, -0.5, 0.0, "[-1/2, 0]")?;
    check_len("input distribution", w.input_size(), p.len())?;
    Ok(stationarity_residual(
        w,
        &elementwise_power(w, 1.0 / (1.0 + t)),
        1.0 + t,
        p.probs(),
    ))
}

fn stationarity_residual(w: &Channel, a: &[f64], power: f64, p: &[f64]) -> f64 {
    let l = w.output_size();
    let q: Vec<f64> = (0..l)
        .map(|y| stable_sum(p.iter().enumerate().map(|(x, &px)| px * a[x * l + y])))
        .collect();
    let value = stable_sum(q.iter().filter(|v| **v > 0.0).map(|v| v.powf(power)));
    let top = (0..w.input_size())
        .map(|x| {
            stable_sum((0..l).filter(|&y| a[x * l + y] > 0.0).map(|y| {
                if q[y] > 0.0 {
                    a[x * l + y] * q[y].powf(power - 1.0)
                } else {
                    f64::INFINITY
                }
            }))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (top / value - 1.0).max(0.0)
}

/// Capacity-achieving input found by alternating maximization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub argmax: Distribution,
    /// `max_x D(W_x || W_p) - I(p; W)`, an upper bound on the distance to capacity.
    pub residual: f64,
    pub iterations: usize,
}

const CAPACITY_TOLERANCE: f64 = 1e-8;
const CAPACITY_MAX_ITERATIONS: usize = 1_000_000;

/// `max_p I(p; W)`.
pub fn capacity(w: &Channel) -> Result<CapacityResult> {
    let k = w.input_size();
    let mut p = vec![1.0 / k as f64; k];
    let mut iterations = 0;
    loop {
        let wp = w.mix(&p);
        let divergences: Vec<f64> = (0..k).map(|x| relative_entropy(w.row(x), &wp)).collect();
        let info = stable_sum(p.iter().zip(&divergences).map(|(a, d)| a * d)).max(0.0);
        let top = divergences
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let residual = (top - info).max(0.0);
        if residual <= CAPACITY_TOLERANCE * 1e-2 || iterations >= CAPACITY_MAX_ITERATIONS {
            if residual > CAPACITY_TOLERANCE {
                return Err(Error::NotConverged {
                    iterations,
                    residual,
                    value: info,
                    argmax: p,
                });
            }
            return Ok(CapacityResult {
                value: info,
                argmax: Distribution::from_weights(&p)?,
                residual,
                iterations,
            });
        }
        iterations += 1;
        let weights: Vec<f64> = p
            .iter()
            .zip(&divergences)
            .map(|(a, d)| a * (d - top).exp())
            .collect();
        let total = stable_sum(weights.iter().copied());
        p = weights.iter().map(|v| v / total).collect();
    }
}

/// `I(p; W_B) - I(p; W_E)`.
pub fn secrecy_rate(bob: &Channel, eve: &Channel, p: &Distribution) -> Result<f64> {
    check_len(
        "eavesdropper input size",
        bob.input_size(),
        eve.input_size(),
    )?;
    Ok(crate::channel::mutual_information(p, bob)? - crate::channel::mutual_information(p, eve)?)
}

/// Best secrecy rate found by multi-start exponentiated-gradient ascent plus a simplex grid for
/// small input alphabets. The returned value is achieved by the returned input law.
pub fn secrecy_capacity_lb(bob: &Channel, eve: &Channel) -> Result<(f64, Distribution)> {
    check_len(
        "eavesdropper input size",
        bob.input_size(),
        eve.input_size(),
    )?;
    let k = bob.input_size();
    let objective = |p: &[f64]| -> f64 {
        let b = info_and_gradient(bob, p);
        let e = info_and_gradient(eve, p);
        b.0 - e.0
    };
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / k as f64; k]];
    for x in 0..k {
        let mut v = vec![0.1 / k as f64; k];
        v[x] += 0.9;
        starts.push(v);
    }
    if k <= 4 {
        let steps = match k {
            1 | 2 => 1000,
            3 => 100,
            _ => 40,
        };
        let grid = simplex_grid(k, steps);
        let (best, _) = grid
            .par_iter()
            .map(|p| (p, objective(p)))
            .reduce_with(|a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            })
            .expect("grid is non-empty");
        starts.push(best.clone());
    }
    let mut best_value = 0.0;
    let mut best_p = vec![0.0; k];
    best_p[0] = 1.0;
    for start in starts {
        let (p, v) = secrecy_ascent(bob, eve, start);
        if v > best_value {
            best_value = v;
            best_p = p;
        }
    }
    Ok((best_value, Distribution::from_weights(&best_p)?))
}

fn info_and_gradient(w: &Channel, p: &[f64]) -> (f64, Vec<f64>) {
    let wp = w.mix(p);
    let d: Vec<f64> = (0..w.input_size())
        .map(|x| relative_entropy(w.row(x), &wp))
        .collect();
    let info = stable_sum(p.iter().zip(&d).map(|(a, b)| a * b));
    (info, d)
}

fn secrecy_ascent(bob: &Channel, eve: &Channel, mut p: Vec<f64>) -> (Vec<f64>, f64) {
    let evaluate = |p: &[f64]| {
        let (ib, db) = info_and_gradient(bob, p);
        let (ie, de) = info_and_gradient(eve, p);
        let grad: Vec<f64> = db.iter().zip(&de).map(|(a, b)| a - b).collect();
        (ib - ie, grad)
    };
    let (mut value, mut grad) = evaluate(&p);
    let mut step = 1.0;
    for _ in 0..5000 {
        let mut improved = false;
        for _ in 0..40 {
            let top = grad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = p
                .iter()
                .zip(&grad)
                .map(|(a, g)| a * (step * (g - top)).exp())
                .collect();
            let total = stable_sum(weights.iter().copied());
            let candidate: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let (cv, cg) = evaluate(&candidate);
            if cv > value {
                improved = cv - value > 1e-15 * value.abs().max(1.0);
                p = candidate;
                value = cv;
                grad = cg;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (p, value)
}

/// All points of the simplex in `k` dimensions with coordinates in multiples of `1/steps`.
pub(crate) fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == k {
            cur.push(left as f64 / steps as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i as f64 / steps as f64);
            rec(k, left - i, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, steps, steps, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The exponent lower bounds available for channel resolvability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    /// Variational distance, `max_s (-psi(s|W,p) + sR) / (1+s)`.
    VdPsi,
    /// Divergence, `max_t -phi(t|W,p) - tR` over `t` in `[-1/2, 0]`.
    KlPhi,
    /// Variational distance through Pinsker: half of [`BoundFamily::KlPhi`].
    VdPhiHalf,
    /// Worst-case input version of [`BoundFamily::VdPsi`].
    VdPsiWorst,
    /// Worst-case input version of [`BoundFamily::KlPhi`].
    KlPhiWorst,
    /// Half of [`BoundFamily::KlPhiWorst`].
    VdPhiHalfWorst,
}

impl BoundFamily {
    pub const FIXED: [BoundFamily; 3] = [Self::VdPsi, Self::KlPhi, Self::VdPhiHalf];
    pub const WORST: [BoundFamily; 3] = [Self::VdPsiWorst, Self::KlPhiWorst, Self::VdPhiHalfWorst];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::VdPsi => "vd_psi",
            Self::KlPhi => "kl_phi",
            Self::VdPhiHalf => "vd_phi_half",
            Self::VdPsiWorst => "vd_psi_worst",
            Self::KlPhiWorst => "kl_phi_worst",
            Self::VdPhiHalfWorst => "vd_phi_half_worst",
        }
    }
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::FIXED, Self::WORST]
            .concat()
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bound family `{s}`")))
    }
}

/// One exponent lower bound at one rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub rate: f64,
    pub bound_value: f64,
    /// Maximizing `s` (psi families) or `t` (phi families).
    pub optimizer: f64,
    pub family: BoundFamily,
    /// The maximum sits at the far end of the parameter interval, so the bound is limited by
    /// the interval rather than by the objective.
    pub saturated: bool,
}

/// Input law for the resolvability exponents.
#[derive(Debug, Clone, PartialEq)]
pub enum InputLaw {
    Fixed(Distribution),
    Worst,
}

/// Cached grids of `psi` and `phi` for one channel and input law, so that many rates can be
/// evaluated without recomputing the generating functions.
pub struct ExponentEvaluator {
    channel: Channel,
    law: InputLaw,
    s_grid: Vec<f64>,
    psi_grid: Vec<f64>,
    t_grid: Vec<f64>,
    phi_grid: Vec<f64>,
}

impl ExponentEvaluator {
    pub fn new(channel: &Channel, law: InputLaw) -> Result<Self> {
        if let InputLaw::Fixed(p) = &law {
            check_len("input distribution", channel.input_size(), p.len())?;
        }
        let s_grid = grid_points(0.0, 1.0, GRID_STEP);
        let t_grid = grid_points(-0.5, 0.0, GRID_STEP);
        let mut evaluator = Self {
            channel: channel.clone(),
            law,
            s_grid,
            psi_grid: Vec::new(),
            t_grid,
            phi_grid: Vec::new(),
        };
        evaluator.psi_grid = evaluator
            .s_grid
            .par_iter()
            .map(|&s| evaluator.psi_at(s))
            .collect::<Result<_>>()?;
        evaluator.phi_grid = evaluator
            .t_grid
            .par_iter()
            .map(|&t| evaluator.phi_at(t))
            .collect::<Result<_>>()?;
        Ok(evaluator)
    }

    fn psi_at(&self, s: f64) -> Result<f64> {
        match &self.law {
            InputLaw::Fixed(p) => psi(s, &self.channel, p),
            InputLaw::Worst => Ok(psi_worst(s, &self.channel)?.value),
        }
    }

    fn phi_at(&self, t: f64) -> Result<f64> {
        match &self.law {
            InputLaw::Fixed(p) => phi(t, &self.channel, p),
            InputLaw::Worst => Ok(phi_worst(t, &self.channel)?.value),
        }
    }

    pub fn families(&self) -> [BoundFamily; 3] {
        match self.law {
            InputLaw::Fixed(_) => BoundFamily::FIXED,
            InputLaw::Worst => BoundFamily::WORST,
        }
    }

    /// The three bounds for this law at rate `rate`.
    pub fn reports(&self, rate: f64) -> Result<Vec<ExponentReport>> {
        check_rate("rate", rate)?;
        let [vd_family, kl_family, half_family] = self.families();
        let objective_psi = |s: f64, psi: f64| (-psi + s * rate) / (1.0 + s);
        let values: Vec<f64> = self
            .s_grid
            .iter()
            .zip(&self.psi_grid)
            .map(|(&s, &v)| objective_psi(s, v))
            .collect();
        let mut failure = None;
        let (s_opt, vd) = refine_grid_max(&self.s_grid, &values, |s| match self.psi_at(s) {
            Ok(v) => objective_psi(s, v),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        });
        let objective_phi = |t: f64, phi: f64| -phi - t * rate;
        let values: Vec<f64> = self
            .t_grid
            .iter()
            .zip(&self.phi_grid)
            .map(|(&t, &v)| objective_phi(t, v))
            .collect();
        let (t_opt, kl) = refine_grid_max(&self.t_grid, &values, |t| match self.phi_at(t) {
            Ok(v) => objective_phi(t, v),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let psi_saturated = s_opt == 1.0 && vd > 0.0;
        let phi_saturated = t_opt == -0.5 && kl > 0.0;
        Ok(vec![
            ExponentReport {
                rate,
                bound_value: vd,
                optimizer: s_opt,
                family: vd_family,
                saturated: psi_saturated,
            },
            ExponentReport {
                rate,
                bound_value: kl,
                optimizer: t_opt,
                family: kl_family,
                saturated: phi_saturated,
            },
            ExponentReport {
                rate,
                bound_value: kl / 2.0,
                optimizer: t_opt,
                family: half_family,
                saturated: phi_saturated,
            },
        ])
    }
}

/// The three resolvability exponent bounds at one rate (fixed input law or worst case).
pub fn resolvability_exponents(
    rate: f64,
    w: &Channel,
    law: &InputLaw,
) -> Result<Vec<ExponentReport>> {
    check_rate("rate", rate)?;
    ExponentEvaluator::new(w, law.clone())?.reports(rate)
}

/// Writes exponent reports as CSV with columns `R,family,bound_nats,optimizer`, 12 significant
/// digits.
pub fn write_sweep_csv<W: Write>(mut out: W, reports: &[ExponentReport]) -> std::io::Result<()> {
    writeln!(out, "R,family,bound_nats,optimizer")?;
    for r in reports {
        writeln!(
            out,
            "{:.11e},{},{:.11e},{:.11e}",
            r.rate, r.family, r.bound_value, r.optimizer
        )?;
    }
    Ok(())
}

/// Exponents for the superposition wire-tap code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiretapExponentReport {
    pub rate: f64,
    pub rate_prime: f64,
    /// `max_s -phi(s|W_B,p) - s(R + R')` over `s` in `[0, 1]`.
    pub error_exponent: f64,
    pub error_optimizer: f64,
    /// `max_t -phi(t|W_E,p) - t R'` over `t` in `[-1/2, 0]`.
    pub leak_kl_exponent: f64,
    pub leak_kl_optimizer: f64,
    pub leak_kl_saturated: bool,
    /// `max_s (-psi(s|W_E,p) + s R') / (1+s)`.
    pub leak_vd_exponent_psi: f64,
    pub leak_vd_psi_optimizer: f64,
    pub leak_vd_psi_saturated: bool,
    /// Half of the divergence leakage exponent.
    pub leak_vd_exponent_phi: f64,
}

pub fn wiretap_exponents(
    rate: f64,
    rate_prime: f64,
    bob: &Channel,
    eve: &Channel,
    p: &Distribution,
) -> Result<WiretapExponentReport> {
    check_rate("rate", rate)?;
    check_rate("rate_prime", rate_prime)?;
    check_len("input distribution", bob.input_size(), p.len())?;
    check_len("input distribution", eve.input_size(), p.len())?;
    let s_grid = grid_points(0.0, 1.0, GRID_STEP);
    let t_grid = grid_points(-0.5, 0.0, GRID_STEP);
    let error = |s: f64| -phi(s, bob, p).expect("checked range") - s * (rate + rate_prime);
    let leak_kl = |t: f64| -phi(t, eve, p).expect("checked range") - t * rate_prime;
    let leak_vd = |s: f64| (-psi(s, eve, p).expect("checked range") + s * rate_prime) / (1.0 + s);
    let max = |grid: &[f64], f: &(dyn Fn(f64) -> f64 + Sync)| {
        let values: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect();
        refine_grid_max(grid, &values, f)
    };
    let (error_optimizer, error_exponent) = max(&s_grid, &error);
    let (leak_kl_optimizer, leak_kl_exponent) = max(&t_grid, &leak_kl);
    let (leak_vd_psi_optimizer, leak_vd_exponent_psi) = max(&s_grid, &leak_vd);
    Ok(WiretapExponentReport {
        rate,
        rate_prime,
        error_exponent,
        error_optimizer,
        leak_kl_exponent,
        leak_kl_optimizer,
        leak_kl_saturated: leak_kl_optimizer == -0.5 && leak_kl_exponent > 0.0,
        leak_vd_exponent_psi,
        leak_vd_psi_optimizer,
        leak_vd_psi_saturated: leak_vd_psi_optimizer == 1.0 && leak_vd_exponent_psi > 0.0,
        leak_vd_exponent_phi: leak_kl_exponent / 2.0,
    })
}

/// Second-order approximations of the resolvability exponents next to their exact values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorComparison {
    /// `R - I(p; W)`.
    pub delta: f64,
    pub dispersion: f64,
    /// `max(delta, 0)^2 / (4 J)`.
    pub approx_psi: f64,
    /// `max(delta, 0)^2 / (8 J)`.
    pub approx_phi_half: f64,
    pub exact_psi_bound: f64,
    pub exact_phi_half_bound: f64,
}

pub fn taylor_compare(rate: f64, w: &Channel, p: &Distribution) -> Result<TaylorComparison> {
    let dispersion = crate::channel::dispersion(p, w)?;
    if !(dispersion > 0.0) {
        return Err(Error::Degenerate(
            "dispersion is zero, so the second-order approximation is undefined".into(),
        ));
    }
    let info = crate::channel::mutual_information(p, w)?;
    let delta = rate - info;
    let positive = delta.max(0.0);
    let approx_psi = positive * positive / (4.0 * dispersion);
    let approx_phi_half = positive * positive / (8.0 * dispersion);
    let reports = resolvability_exponents(rate, w, &InputLaw::Fixed(p.clone()))?;
    let find = |family| {
        reports
            .iter()
            .find(|r| r.family == family)
            .map(|r| r.bound_value)
            .expect("fixed-law families are always reported")
    };
    Ok(TaylorComparison {
        delta,
        dispersion,
        approx_psi,
        approx_phi_half,
        exact_psi_bound: find(BoundFamily::VdPsi),
        exact_phi_half_bound: find(BoundFamily::VdPhiHalf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn bsc(w: f64) -> Channel {
        Channel::bsc(w).unwrap()
    }

    fn binary_entropy(w: f64) -> f64 {
        -(w * w.ln() + (1.0 - w) * (1.0 - w).ln())
    }

    #[test]
    fn psi_examples() {
        let u = Distribution::uniform(2);
        assert_eq!(psi(0.0, &bsc(0.2), &u).unwrap(), 0.0);
        for s in [0.1, 0.5, 1.0] {
            let v = psi(s, &Channel::identity(2), &u).unwrap();
            assert!((v - s * LN_2).abs() < 1e-14);
        }
        let v = psi(1.0, &bsc(0.1), &u).unwrap();
        assert!((v - 1.64f64.ln()).abs() < 1e-14);
        assert!(psi(1.5, &bsc(0.1), &u).is_err());
        assert!(psi(-0.1, &bsc(0.1), &u).is_err());
    }

    #[test]
    fn phi_examples() {
        let u = Distribution::uniform(2);
        assert_eq!(phi(0.0, &bsc(0.2), &u).unwrap(), 0.0);
        for t in [-0.5, -0.2, 0.4, 1.0] {
            let v = phi(t, &Channel::identity(2), &u).unwrap();
            assert!((v + t * LN_2).abs() < 1e-14);
        }
        let v = phi(-0.5, &bsc(0.1), &u).unwrap();
        assert!((v - (2.0 * 0.41f64.sqrt()).ln()).abs() < 1e-14);
        assert!(phi(-0.6, &bsc(0.1), &u).is_err());
        assert!(phi(1.1, &bsc(0.1), &u).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let id = Channel::identity(2);
        let wc = psi_worst(0.5, &id).unwrap();
        assert!((wc.value - 0.5 * LN_2).abs() < 1e-10);
        assert!((wc.argmax.probs()[0] - 0.5).abs() < 1e-6);
        assert_eq!(psi_worst(0.0, &bsc(0.3)).unwrap().value, 0.0);
        let wc = phi_worst(-0.5, &bsc(0.1)).unwrap();
        assert!((wc.value - 0.247_348_120_918_053_6).abs() < 1e-10);
        assert!((wc.argmax.probs()[0] - 0.5).abs() < 1e-6);
        assert_eq!(phi_worst(0.0, &bsc(0.3)).unwrap().value, 0.0);
        let constant = Channel::constant(3, &Distribution::new(vec![0.2, 0.3, 0.5]).unwrap());
        for t in [-0.5, -0.25] {
            assert!(phi_worst(t, &constant).unwrap().value.abs() < 1e-12);
        }
        // A constant channel whose common row is a point mass has a trivial psi maximand.
        let point = Channel::constant(3, &Distribution::point(2, 1));
        assert!(psi_worst(0.7, &point).unwrap().value.abs() < 1e-12);
        assert!(phi_worst(0.1, &bsc(0.1)).is_err());
    }

    #[test]
    fn worst_case_beats_a_brute_force_line() {
        let w = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.05, 0.15, 0.8]]).unwrap();
        for s in [0.2, 0.6, 0.95] {
            let wc = psi_worst(s, &w).unwrap();
            assert!(wc.residual <= 1e-8);
            let mut best = f64::NEG_INFINITY;
            for i in 0..=10_000 {
                let a = i as f64 / 10_000.0;
                let p = Distribution::new(vec![a, 1.0 - a]).unwrap();
                best = best.max(psi_maximand(s, &w, &p).unwrap());
            }
            assert!(wc.value >= best - 1e-12);
            assert!(wc.value - best < 1e-7);
            assert!(psi_worst_residual(s, &w, &wc.argmax).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn capacity_examples() {
        for w in [0.05, 0.1, 0.25] {
            let c = capacity(&bsc(w)).unwrap();
            assert!((c.value - (LN_2 - binary_entropy(w))).abs() < 1e-9);
        }
        for k in 2..=4 {
            let c = capacity(&Channel::identity(k)).unwrap();
            assert!((c.value - (k as f64).ln()).abs() < 1e-12);
        }
        // Z channel: capacity ln(1 + (1-e) e^(e/(1-e)))
        let e: f64 = 0.4;
        let z = Channel::new(vec![vec![1.0, 0.0], vec![e, 1.0 - e]]).unwrap();
        let expected = (1.0 + (1.0 - e) * e.powf(e / (1.0 - e))).ln();
        assert!((capacity(&z).unwrap().value - expected).abs() < 1e-8);
    }

    #[test]
    fn secrecy_examples() {
        let u = Distribution::uniform(2);
        let v = secrecy_rate(&bsc(0.1), &bsc(0.3), &u).unwrap();
        assert!((v - (binary_entropy(0.3) - binary_entropy(0.1))).abs() < 1e-12);
        let (lb, p) = secrecy_capacity_lb(&bsc(0.1), &bsc(0.3)).unwrap();
        assert!((lb - v).abs() < 1e-9);
        assert!((secrecy_rate(&bsc(0.1), &bsc(0.3), &p).unwrap() - lb).abs() < 1e-15);
        let (lb, _) = secrecy_capacity_lb(&bsc(0.3), &bsc(0.1)).unwrap();
        assert_eq!(lb, 0.0);
    }

    #[test]
    fn resolvability_exponent_examples() {
        let u = Distribution::uniform(2);
        let id = Channel::identity(2);
        let reports =
            resolvability_exponents(2.0 * LN_2, &id, &InputLaw::Fixed(u.clone())).unwrap();
        let vd = &reports[0];
        assert_eq!(vd.family, BoundFamily::VdPsi);
        assert!((vd.bound_value - LN_2 / 2.0).abs() < 1e-12);
        assert_eq!(vd.optimizer, 1.0);
        assert!(vd.saturated);
        let kl = &reports[1];
        assert!((kl.bound_value - LN_2 / 2.0).abs() < 1e-12);
        assert_eq!(kl.optimizer, -0.5);
        assert!((reports[2].bound_value - kl.bound_value / 2.0).abs() == 0.0);

        let w = bsc(0.1);
        let info = crate::channel::mutual_information(&u, &w).unwrap();
        for r in resolvability_exponents(info, &w, &InputLaw::Fixed(u.clone())).unwrap() {
            assert!(r.bound_value.abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn reported_value_is_objective_at_optimizer() {
        let u = Distribution::uniform(2);
        let w = bsc(0.15);
        for rate in [0.3, 0.45, 0.6] {
            let reports = resolvability_exponents(rate, &w, &InputLaw::Fixed(u.clone())).unwrap();
            let s = reports[0].optimizer;
            let direct = (-psi(s, &w, &u).unwrap() + s * rate) / (1.0 + s);
            assert!((direct - reports[0].bound_value).abs() < 1e-9);
            let t = reports[1].optimizer;
            let direct = -phi(t, &w, &u).unwrap() - t * rate;
            assert!((direct - reports[1].bound_value).abs() < 1e-9);
        }
    }

    #[test]
    fn worst_case_constant_channel_bounds() {
        let constant = Channel::constant(2, &Distribution::new(vec![0.4, 0.6]).unwrap());
        let rate = 0.3;
        let reports = resolvability_exponents(rate, &constant, &InputLaw::Worst).unwrap();
        assert_eq!(reports[1].family, BoundFamily::KlPhiWorst);
        assert!((reports[1].bound_value - rate / 2.0).abs() < 1e-10);
        assert!((reports[2].bound_value - rate / 4.0).abs() < 1e-10);
    }

    #[test]
    fn wiretap_exponent_examples() {
        let u = Distribution::uniform(2);
        let r = wiretap_exponents(0.15, 0.2, &bsc(0.1), &bsc(0.3), &u).unwrap();
        assert!((r.error_exponent - 0.000_382_219).abs() < 1e-8);
        assert!((r.leak_kl_exponent - 0.028_604_4).abs() < 1e-6);
        assert!((r.leak_vd_exponent_psi - 0.028_604_4).abs() < 1e-6);
        assert_eq!(r.leak_vd_exponent_phi, r.leak_kl_exponent / 2.0);

        let constant = Channel::constant(2, &Distribution::new(vec![0.4, 0.6]).unwrap());
        let r = wiretap_exponents(0.1, 0.2, &bsc(0.1), &constant, &u).unwrap();
        assert!((r.leak_kl_exponent - 0.1).abs() < 1e-12);
        assert!(r.leak_kl_saturated);

        let r = wiretap_exponents(0.4, 0.4, &Channel::identity(2), &constant, &u).unwrap();
        assert_eq!(r.error_exponent, 0.0);
        assert_eq!(r.error_optimizer, 0.0);
    }

    #[test]
    fn taylor_examples() {
        let u = Distribution::uniform(2);
        let w = bsc(0.1);
        let info = crate::channel::mutual_information(&u, &w).unwrap();
        let c = taylor_compare(info + 0.05, &w, &u).unwrap();
        assert!((c.approx_psi - 0.002_876_859_200_313_274).abs() < 1e-12);
        assert_eq!(c.approx_psi, 2.0 * c.approx_phi_half);
        let c = taylor_compare(info, &w, &u).unwrap();
        assert_eq!(c.approx_psi, 0.0);
        assert!(matches!(
            taylor_compare(1.0, &Channel::identity(2), &u),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn csv_has_twelve_significant_digits() {
        let report = ExponentReport {
            rate: 0.5,
            bound_value: 1.0 / 3.0,
            optimizer: 1.0,
            family: BoundFamily::KlPhi,
            saturated: false,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[report]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "R,family,bound_nats,optimizer\n5.00000000000e-1,kl_phi,3.33333333333e-1,1.00000000000e0\n"
        );
    }

    #[test]
    fn family_names_round_trip() {
        for f in [BoundFamily::FIXED, BoundFamily::WORST].concat() {
            assert_eq!(f.as_str().parse::<BoundFamily>().unwrap(), f);
        }
        assert!("3-8-7".parse::<BoundFamily>().is_err());
    }
}
