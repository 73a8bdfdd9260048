//! Superposition codes for the wire-tap channel: `M` message classes of `L` codewords each. Bob
//! decodes the message; Eve's view of each message is the uniform mixture over its class, which
//! randomization makes hard to tell apart.

use serde::{Deserialize, Serialize};

use crate::channel::{l1_distance, relative_entropy, EnumerationBudget, Memoryless};
use crate::error::{check_len, Error, Result};
use crate::exponents::phi;
use crate::numeric::{eta, grid_points, refine_grid_max, CompensatedSum};
use crate::resolvability::sample_code_with;
use crate::rng::stream;
use crate::spectrum::{InformationSpectrum, TailPair};

/// Tolerance of the divergence decomposition self-check.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-9;

/// Bob's decoding rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Each output goes to the class of the most likely codeword; ties go to the codeword that
    /// comes first with `l` (position in class) varying slowest, then `m` (class).
    MaximumLikelihood,
    /// Each output goes to the class of the unique codeword whose likelihood ratio exceeds
    /// `C'`; outputs claimed by no codeword or by several are erased.
    Threshold,
}

/// Bob and Eve seen through the same input law and block length.
#[derive(Debug, Clone)]
pub struct WiretapModel {
    pub bob: Memoryless,
    pub eve: Memoryless,
}

impl WiretapModel {
    pub fn new(bob: Memoryless, eve: Memoryless) -> Result<Self> {
        check_len(
            "eavesdropper input size",
            bob.input_size(),
            eve.input_size(),
        )?;
        if bob.input() != eve.input() || bob.block_length() != eve.block_length() {
            return Err(Error::InvalidParameter(
                "Bob and Eve must share the input law and block length".into(),
            ));
        }
        Ok(Self { bob, eve })
    }
}

/// Codewords `classes[m][l]` and Bob's decoder (`None` marks an erasure).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiretapCode {
    pub classes: Vec<Vec<usize>>,
    pub decoder: Vec<Option<usize>>,
    pub decoder_kind: DecoderKind,
}

impl WiretapCode {
    /// Builds the decoder for given codeword classes.
    pub fn with_decoder(
        classes: Vec<Vec<usize>>,
        bob: &Memoryless,
        kind: DecoderKind,
        threshold_prime: f64,
    ) -> Result<Self> {
        let messages = classes.len();
        if messages == 0 || classes[0].is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one class and one codeword".into(),
            ));
        }
        let per_class = classes[0].len();
        for class in &classes {
            check_len("codewords per class", per_class, class.len())?;
            if let Some(&x) = class.iter().find(|&&x| x >= bob.input_size()) {
                return Err(Error::InvalidParameter(format!(
                    "codeword {x} outside the input alphabet of size {}",
                    bob.input_size()
                )));
            }
        }
        if kind == DecoderKind::Threshold && !(threshold_prime > 0.0) {
            return Err(Error::OutOfRange {
                name: "threshold_prime",
                value: threshold_prime,
                allowed: "(0, inf)",
            });
        }
        // (l, m) order with l slowest
        let order: Vec<(usize, usize)> = (0..per_class)
            .flat_map(|l| (0..messages).map(move |m| (l, m)))
            .collect();
        let rows: Vec<Vec<f64>> = order.iter().map(|&(l, m)| bob.row(classes[m][l])).collect();
        let target = bob.output_distribution();
        let decoder = (0..bob.output_size())
            .map(|y| match kind {
                DecoderKind::MaximumLikelihood => {
                    let mut best: Option<(f64, usize)> = None;
                    for (k, row) in rows.iter().enumerate() {
                        if row[y] > best.map_or(0.0, |b| b.0) {
                            best = Some((row[y], order[k].1));
                        }
                    }
                    best.map(|b| b.1)
                }
                DecoderKind::Threshold => {
                    let mut claims = rows.iter().enumerate().filter(|(_, row)| {
                        row[y] > 0.0 && (target[y] <= 0.0 || row[y] / target[y] > threshold_prime)
                    });
                    match (claims.next(), claims.next()) {
                        (Some((k, _)), None) => Some(order[k].1),
                        _ => None,
                    }
                }
            })
            .collect();
        Ok(Self {
            classes,
            decoder,
            decoder_kind: kind,
        })
    }

    pub fn messages(&self) -> usize {
        self.classes.len()
    }

    pub fn per_class(&self) -> usize {
        self.classes[0].len()
    }
}

/// Draws the `L M` codewords i.i.d. from `p^n`, in `(l, m)` order with `l` slowest, and builds
/// Bob's decoder.
pub fn sample_wiretap_code_with<R: rand::Rng + ?Sized>(
    bob: &Memoryless,
    messages: usize,
    per_class: usize,
    kind: DecoderKind,
    threshold_prime: f64,
    rng: &mut R,
) -> Result<WiretapCode> {
    if messages == 0 || per_class == 0 {
        return Err(Error::InvalidParameter("M and L must be positive".into()));
    }
    let draws = sample_code_with(bob, messages * per_class, rng)?.codewords;
    let mut classes = vec![Vec::with_capacity(per_class); messages];
    for (k, x) in draws.into_iter().enumerate() {
        classes[k % messages].push(x);
    }
    WiretapCode::with_decoder(classes, bob, kind, threshold_prime)
}

pub fn sample_wiretap_code(
    bob: &Memoryless,
    messages: usize,
    per_class: usize,
    kind: DecoderKind,
    threshold_prime: f64,
    seed: u64,
) -> Result<WiretapCode> {
    let mut rng = stream(seed, 0);
    sample_wiretap_code_with(bob, messages, per_class, kind, threshold_prime, &mut rng)
}

/// Exact performance of a wire-tap code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageReport {
    /// Bob's average error probability; erasures count as errors.
    pub eps_b: f64,
    /// `(1/M) sum_m D(W^E_{Q_m} || W^E_code)`.
    pub i_e: f64,
    /// Average pairwise variational distance between Eve's class outputs (0 when `M = 1`).
    pub d_e: f64,
    /// `|sum_m D(Q_m||code)/M + D(code||W_p) - sum_m D(Q_m||W_p)/M|`.
    pub decomposition_residual: f64,
    /// `2 (1/M) sum_m d(W^E_{Q_m}, W^E_p)`, an upper bound on `d_e`.
    pub d_e_triangle: f64,
}

pub fn eval_wiretap(code: &WiretapCode, model: &WiretapModel) -> Result<LeakageReport> {
    check_len(
        "decoder length",
        model.bob.output_size(),
        code.decoder.len(),
    )?;
    let m = code.messages();
    let l = code.per_class() as f64;
    let mut errors = CompensatedSum::new();
    for (class_index, class) in code.classes.iter().enumerate() {
        for &x in class {
            let row = model.bob.row(x);
            let hit: f64 = row
                .iter()
                .zip(&code.decoder)
                .filter(|(_, d)| **d == Some(class_index))
                .map(|(w, _)| *w)
                .collect::<CompensatedSum>()
                .value();
            errors.add(1.0 - hit);
        }
    }
    let eps_b = (errors.value() / (m as f64 * l)).clamp(0.0, 1.0);

    let eve_out = model.eve.output_size();
    let class_outputs: Vec<Vec<f64>> = code
        .classes
        .iter()
        .map(|class| {
            let mut acc = vec![CompensatedSum::new(); eve_out];
            for &x in class {
                for (a, v) in acc.iter_mut().zip(model.eve.row(x)) {
                    a.add(v);
                }
            }
            acc.iter().map(|a| a.value() / l).collect()
        })
        .collect();
    let code_output: Vec<f64> = (0..eve_out)
        .map(|z| {
            class_outputs
                .iter()
                .map(|c| c[z])
                .collect::<CompensatedSum>()
                .value()
                / m as f64
        })
        .collect();
    let target = model.eve.output_distribution();
    let mean = |f: &dyn Fn(&Vec<f64>) -> f64| {
        class_outputs
            .iter()
            .map(f)
            .collect::<CompensatedSum>()
            .value()
            / m as f64
    };
    let i_e = mean(&|c| relative_entropy(c, &code_output)).max(0.0);
    let to_target = mean(&|c| relative_entropy(c, target));
    let decomposition_residual = (i_e + relative_entropy(&code_output, target) - to_target).abs();
    if !(decomposition_residual <= DECOMPOSITION_TOLERANCE) {
        return Err(Error::NumericalCheck(format!(
            "divergence decomposition off by {decomposition_residual:e}"
        )));
    }
    let d_e = if m < 2 {
        0.0
    } else {
        let mut acc = CompensatedSum::new();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    acc.add(l1_distance(&class_outputs[i], &class_outputs[j]));
                }
            }
        }
        acc.value() / (m * (m - 1)) as f64
    };
    let d_e_triangle = 2.0 * mean(&|c| l1_distance(c, target));
    if d_e > d_e_triangle + 1e-12 {
        return Err(Error::NumericalCheck(format!(
            "pairwise distance {d_e} exceeds its triangle bound {d_e_triangle}"
        )));
    }
    Ok(LeakageReport {
        eps_b,
        i_e,
        d_e,
        decomposition_residual,
        d_e_triangle,
    })
}

/// The five guarantees for a wire-tap code, all already multiplied by the Markov factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WiretapBounds {
    /// `3 min_s (ML)^s e^{n phi(s|W_B,p)}`.
    pub error_gallager: f64,
    pub error_gallager_s: f64,
    /// `3 (E_p W^B_x{ratio <= C'} + ML/C')`.
    pub error_threshold: f64,
    /// `3 (eta(delta) + delta ln|Z^n| + delta'/L)` for Eve at threshold `C`.
    pub leak_eta: f64,
    /// `3 min_t ln(1 + L^t e^{n phi(t|W_E,p)}) / (-t)`.
    pub leak_phi: f64,
    pub leak_phi_t: f64,
    /// `6 (2 delta + sqrt(delta'/L))`.
    pub distance: f64,
    pub eve_tail: TailPair,
}

impl WiretapBounds {
    /// The error bound matching a decoder.
    pub fn error_bound(&self, kind: DecoderKind) -> f64 {
        match kind {
            DecoderKind::MaximumLikelihood => self.error_gallager,
            DecoderKind::Threshold => self.error_threshold,
        }
    }

    pub fn leak_bound(&self) -> f64 {
        self.leak_eta.min(self.leak_phi)
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            allowed: "(0, inf)",
        })
    }
}

/// Code dimensions and decoding thresholds: `M` classes of `L` codewords, Eve's threshold `C`
/// and Bob's threshold `C'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiretapParams {
    pub messages: usize,
    pub per_class: usize,
    pub threshold: f64,
    pub threshold_prime: f64,
}

impl WiretapParams {
    pub fn new(
        messages: usize,
        per_class: usize,
        threshold: f64,
        threshold_prime: f64,
    ) -> Result<Self> {
        let params = Self {
            messages,
            per_class,
            threshold,
            threshold_prime,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages == 0 || self.per_class == 0 {
            return Err(Error::InvalidParameter("M and L must be positive".into()));
        }
        check_positive("threshold", self.threshold)?;
        check_positive("threshold_prime", self.threshold_prime)
    }
}

pub fn wiretap_bounds(
    model: &WiretapModel,
    params: &WiretapParams,
    budget: &EnumerationBudget,
) -> Result<WiretapBounds> {
    params.validate()?;
    let WiretapParams {
        messages,
        per_class,
        threshold,
        threshold_prime,
    } = *params;
    let n = model.bob.block_length() as f64;
    let p = model.bob.input();
    let total = (messages * per_class) as f64;
    let l = per_class as f64;

    let gallager = |s: f64| -> f64 {
        let v = s * total.ln() + n * phi(s, model.bob.channel(), p).expect("s in range");
        -v.exp()
    };
    let s_grid = grid_points(0.0, 1.0, 1e-3);
    let values: Vec<f64> = s_grid.iter().map(|&s| gallager(s)).collect();
    let (error_gallager_s, neg) = refine_grid_max(&s_grid, &values, gallager);

    let bob_tail =
        InformationSpectrum::new(p, model.bob.channel(), model.bob.block_length(), budget)?
            .tail_pair(threshold_prime)?;
    let eve_tail =
        InformationSpectrum::new(p, model.eve.channel(), model.eve.block_length(), budget)?
            .tail_pair(threshold)?;

    let leak = |t: f64| -> f64 {
        let v = t * l.ln() + n * phi(t, model.eve.channel(), p).expect("t in range");
        -(v.exp().ln_1p() / (-t))
    };
    let t_grid = grid_points(-0.5, -1e-3, 1e-3);
    let values: Vec<f64> = t_grid.iter().map(|&t| leak(t)).collect();
    let (leak_phi_t, neg_leak) = refine_grid_max(&t_grid, &values, leak);

    Ok(WiretapBounds {
        error_gallager: -3.0 * neg,
        error_gallager_s,
        error_threshold: 3.0 * ((1.0 - bob_tail.delta).max(0.0) + total / threshold_prime),
        leak_eta: 3.0
            * (eta(eve_tail.delta)
                + eve_tail.delta * (model.eve.output_size() as f64).ln()
                + eve_tail.delta_prime / l),
        leak_phi: -3.0 * neg_leak,
        leak_phi_t,
        distance: 6.0 * (2.0 * eve_tail.delta + (eve_tail.delta_prime / l).sqrt()),
        eve_tail,
    })
}

/// Which of the three guarantees a code meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Satisfaction {
    pub eps_b: bool,
    pub i_e: bool,
    pub d_e: bool,
}

impl Satisfaction {
    pub fn all(&self) -> bool {
        self.eps_b && self.i_e && self.d_e
    }

    fn count(&self) -> usize {
        self.eps_b as usize + self.i_e as usize + self.d_e as usize
    }
}

pub fn check_guarantees(
    report: &LeakageReport,
    bounds: &WiretapBounds,
    kind: DecoderKind,
) -> Satisfaction {
    Satisfaction {
        eps_b: report.eps_b <= bounds.error_bound(kind),
        i_e: report.i_e <= bounds.leak_bound(),
        d_e: report.d_e <= bounds.distance,
    }
}

/// Result of the retry-until-satisfied construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Construction {
    pub code: WiretapCode,
    pub report: LeakageReport,
    pub bounds: WiretapBounds,
    pub satisfied: Satisfaction,
    /// Number of draws made (the returned code is from the last successful one, or the best
    /// draw when none succeeded).
    pub attempts: usize,
    pub seed: u64,
}

/// Draws codes (attempt `i` uses stream `i` of `seed`) until one meets the error guarantee of
/// its decoder, the better leakage guarantee and the distance guarantee simultaneously. When
/// `max_retries` draws all fail, the earliest draw meeting the most guarantees is returned with
/// its flags.
pub fn construct_until_bounds(
    model: &WiretapModel,
    params: &WiretapParams,
    kind: DecoderKind,
    seed: u64,
    max_retries: usize,
    budget: &EnumerationBudget,
) -> Result<Construction> {
    construct_observed(model, params, kind, seed, max_retries, budget, |_, _, _| {})
}

/// [`construct_until_bounds`] reporting every attempt (index, measurements, flags) as it is
/// evaluated.
pub fn construct_observed<F>(
    model: &WiretapModel,
    params: &WiretapParams,
    kind: DecoderKind,
    seed: u64,
    max_retries: usize,
    budget: &EnumerationBudget,
    mut observe: F,
) -> Result<Construction>
where
    F: FnMut(usize, &LeakageReport, Satisfaction),
{
    if max_retries == 0 {
        return Err(Error::InvalidParameter(
            "at least one attempt is required".into(),
        ));
    }
    let bounds = wiretap_bounds(model, params, budget)?;
    let mut best: Option<Construction> = None;
    for attempt in 0..max_retries {
        let mut rng = stream(seed, attempt as u64);
        let code = sample_wiretap_code_with(
            &model.bob,
            params.messages,
            params.per_class,
            kind,
            params.threshold_prime,
            &mut rng,
        )?;
        let report = eval_wiretap(&code, model)?;
        let satisfied = check_guarantees(&report, &bounds, kind);
        observe(attempt, &report, satisfied);
        let better = best
            .as_ref()
            .is_none_or(|b| satisfied.count() > b.satisfied.count());
        if better {
            best = Some(Construction {
                code,
                report,
                bounds,
                satisfied,
                attempts: attempt + 1,
                seed,
            });
        }
        if satisfied.all() {
            break;
        }
    }
    let mut out = best.expect("at least one attempt");
    if !out.satisfied.all() {
        out.attempts = max_retries;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Channel, Distribution};

    fn model(bob: Channel, eve: Channel, n: usize) -> WiretapModel {
        let budget = EnumerationBudget::default();
        let p = Distribution::uniform(bob.input_size());
        WiretapModel::new(
            Memoryless::new(bob, p.clone(), n, &budget).unwrap(),
            Memoryless::new(eve, p, n, &budget).unwrap(),
        )
        .unwrap()
    }

    fn constant_eve() -> Channel {
        Channel::constant(2, &Distribution::new(vec![0.4, 0.6]).unwrap())
    }

    #[test]
    fn two_point_example() {
        let m = model(Channel::identity(2), Channel::bsc(0.3).unwrap(), 1);
        let code = WiretapCode::with_decoder(
            vec![vec![0], vec![1]],
            &m.bob,
            DecoderKind::MaximumLikelihood,
            1.0,
        )
        .unwrap();
        let r = eval_wiretap(&code, &m).unwrap();
        assert_eq!(r.eps_b, 0.0);
        assert!((r.d_e - 0.8).abs() < 1e-15);
        assert!((r.i_e - 0.082_282_878_505_051_78).abs() < 1e-12);
    }

    #[test]
    fn constant_eve_leaks_nothing() {
        let m = model(Channel::identity(2), constant_eve(), 2);
        for seed in 0..20 {
            let code = sample_wiretap_code(&m.bob, 2, 2, DecoderKind::MaximumLikelihood, 1.0, seed)
                .unwrap();
            let r = eval_wiretap(&code, &m).unwrap();
            assert_eq!(r.i_e, 0.0);
            assert_eq!(r.d_e, 0.0);
        }
    }

    #[test]
    fn identical_classes_are_indistinguishable() {
        let m = model(Channel::bsc(0.1).unwrap(), Channel::bsc(0.2).unwrap(), 2);
        let code = WiretapCode::with_decoder(
            vec![vec![1, 2], vec![2, 1]],
            &m.bob,
            DecoderKind::MaximumLikelihood,
            1.0,
        )
        .unwrap();
        let r = eval_wiretap(&code, &m).unwrap();
        assert!(r.i_e.abs() < 1e-15);
        assert_eq!(r.d_e, 0.0);
    }

    #[test]
    fn threshold_decoder_boundaries() {
        let m = model(Channel::bsc(0.1).unwrap(), constant_eve(), 1);
        let code =
            WiretapCode::with_decoder(vec![vec![0]], &m.bob, DecoderKind::Threshold, 10.0).unwrap();
        assert_eq!(code.decoder, vec![None, None]);
        assert_eq!(eval_wiretap(&code, &m).unwrap().eps_b, 1.0);
        let code =
            WiretapCode::with_decoder(vec![vec![0]], &m.bob, DecoderKind::Threshold, 1.5).unwrap();
        assert_eq!(code.decoder, vec![Some(0), None]);
        assert!((eval_wiretap(&code, &m).unwrap().eps_b - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ml_ties_go_to_the_earliest_codeword() {
        let m = model(Channel::bsc(0.1).unwrap(), constant_eve(), 1);
        let code = WiretapCode::with_decoder(
            vec![vec![1, 0], vec![0, 1]],
            &m.bob,
            DecoderKind::MaximumLikelihood,
            1.0,
        )
        .unwrap();
        // order is (l=0,m=0)=1, (l=0,m=1)=0, ...; output 0 is most likely under input 0
        assert_eq!(code.decoder, vec![Some(1), Some(0)]);
    }

    #[test]
    fn ml_never_loses_to_threshold() {
        let m = model(Channel::bsc(0.1).unwrap(), Channel::bsc(0.3).unwrap(), 3);
        for seed in 0..50 {
            let ml = sample_wiretap_code(&m.bob, 2, 2, DecoderKind::MaximumLikelihood, 3.0, seed)
                .unwrap();
            let th = sample_wiretap_code(&m.bob, 2, 2, DecoderKind::Threshold, 3.0, seed).unwrap();
            assert_eq!(ml.classes, th.classes);
            let a = eval_wiretap(&ml, &m).unwrap().eps_b;
            let b = eval_wiretap(&th, &m).unwrap().eps_b;
            assert!(a <= b + 1e-15);
        }
    }

    #[test]
    fn bounds_for_constant_eve() {
        let budget = EnumerationBudget::default();
        let m = model(Channel::bsc(0.1).unwrap(), constant_eve(), 1);
        let b = wiretap_bounds(&m, &WiretapParams::new(2, 4, 1.5, 2.0).unwrap(), &budget).unwrap();
        assert_eq!(b.eve_tail.delta, 0.0);
        assert!((b.eve_tail.delta_prime - 1.0).abs() < 1e-15);
        assert!((b.leak_eta - 3.0 / 4.0).abs() < 1e-15);
        assert!((b.distance - 6.0 * 0.5).abs() < 1e-15);
        assert!(b.error_gallager <= 3.0 + 1e-12);
    }

    #[test]
    fn regression_fixture_bounds() {
        let budget = EnumerationBudget::default();
        let m = model(Channel::bsc(0.1).unwrap(), Channel::bsc(0.3).unwrap(), 4);
        let b = wiretap_bounds(
            &m,
            &WiretapParams::new(2, 4, 0.8f64.exp(), 2.2f64.exp()).unwrap(),
            &budget,
        )
        .unwrap();
        assert!((b.error_gallager - 3.0).abs() < 1e-12);
        assert_eq!(b.error_gallager_s, 0.0);
        assert!((b.error_threshold - 3.691).abs() < 1e-3);
        assert!((b.leak_eta - 3.691).abs() < 1e-3);
        assert!((b.leak_phi - 3.087).abs() < 1e-3);
        assert!((b.distance - 5.709).abs() < 1e-3);
        assert!((b.eve_tail.delta - 0.2401).abs() < 1e-12);
    }

    #[test]
    fn trivial_construction_succeeds_first() {
        let budget = EnumerationBudget::default();
        let m = model(Channel::identity(2), constant_eve(), 1);
        let c = construct_until_bounds(
            &m,
            &WiretapParams::new(2, 1, 1.5, 1.5).unwrap(),
            DecoderKind::MaximumLikelihood,
            4,
            50,
            &budget,
        )
        .unwrap();
        assert!(c.satisfied.all());
        assert_eq!(c.report.i_e, 0.0);
        assert_eq!(c.report.d_e, 0.0);
    }
}
