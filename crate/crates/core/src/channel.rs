//! Finite-alphabet probability primitives: distributions, channels, products, distances and
//! divergences.
//!
//! All logarithms are natural. The conventions `0 ln 0 = 0` and `0 ln (0/0) = 0` hold everywhere.
//!
//! Product alphabets are indexed little-endian: the sequence `(x_1, ..., x_n)` over an alphabet of
//! size `K` has index `x_1 + K x_2 + ... + K^{n-1} x_n`, so the first coordinate varies fastest.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::numeric::{checked_pow, stable_sum, xlogx, CompensatedSum};

/// Tolerance on row and vector sums accepted at construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

fn validate_probabilities(values: &mut [f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum = stable_sum(values.iter().copied());
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized {
            sum,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    for v in values.iter_mut() {
        *v /= sum;
    }
    Ok(())
}

/// A probability vector on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct Distribution {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    probs: Vec<f64>,
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;

    fn try_from(repr: DistributionRepr) -> Result<Self> {
        Distribution::new(repr.probs)
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        DistributionRepr { probs: d.probs }
    }
}

impl Distribution {
    /// Validates non-negativity and unit sum (within [`NORMALIZATION_TOLERANCE`]) and
    /// renormalizes once.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidShape(
                "distribution over an empty alphabet".into(),
            ));
        }
        validate_probabilities(&mut probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    /// Point mass on `symbol`.
    pub fn point(size: usize, symbol: usize) -> Self {
        assert!(symbol < size);
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Self { probs }
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total = stable_sum(weights.iter().copied());
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite, non-negative and not all zero".into(),
            ));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    /// The `n`-fold i.i.d. product, little-endian indexed.
    pub fn product(&self, n: usize, budget: &EnumerationBudget) -> Result<Distribution> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "product order must be positive".into(),
            ));
        }
        budget.admit(checked_pow(self.len(), n))?;
        let mut acc = vec![1.0];
        for _ in 0..n {
            let mut next = Vec::with_capacity(acc.len() * self.len());
            for &q in &self.probs {
                next.extend(acc.iter().map(|a| a * q));
            }
            acc = next;
        }
        Ok(Self { probs: acc })
    }
}

/// Cap on the number of states an exact enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_joint_states: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_joint_states: 1 << 24,
        }
    }
}

impl EnumerationBudget {
    pub fn new(max_joint_states: u64) -> Self {
        Self { max_joint_states }
    }

    /// Checks a state count (`None` meaning it overflowed `u128`).
    pub fn admit(&self, required: Option<u128>) -> Result<()> {
        match required {
            Some(r) if r <= self.max_joint_states as u128 => Ok(()),
            Some(r) => Err(Error::BudgetExceeded {
                required: r,
                cap: self.max_joint_states,
            }),
            None => Err(Error::BudgetExceeded {
                required: u128::MAX,
                cap: self.max_joint_states,
            }),
        }
    }
}

/// A row-stochastic matrix `W: x -> W_x` over finite input and output alphabets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    input_size: usize,
    output_size: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    input_size: usize,
    output_size: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;

    fn try_from(repr: ChannelRepr) -> Result<Self> {
        check_len("channel rows", repr.input_size, repr.rows.len())?;
        for row in &repr.rows {
            check_len("channel row length", repr.output_size, row.len())?;
        }
        Channel::new(repr.rows)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        ChannelRepr {
            input_size: c.input_size,
            output_size: c.output_size,
            rows: c.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl Channel {
    /// Builds a channel from its rows; each row is validated and renormalized once.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidShape("channel with no input symbols".into()));
        }
        let output_size = rows[0].len();
        if output_size == 0 {
            return Err(Error::InvalidShape("channel with no output symbols".into()));
        }
        let mut entries = Vec::with_capacity(input_size * output_size);
        for mut row in rows {
            check_len("channel row length", output_size, row.len())?;
            validate_probabilities(&mut row)?;
            entries.extend(row);
        }
        Ok(Self {
            input_size,
            output_size,
            entries,
        })
    }

    /// Binary symmetric channel with crossover probability `w`.
    pub fn bsc(w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange {
                name: "crossover",
                value: w,
                allowed: "[0, 1]",
            });
        }
        Channel::new(vec![vec![1.0 - w, w], vec![w, 1.0 - w]])
    }

    /// Noiseless `k`-ary channel.
    pub fn identity(k: usize) -> Self {
        let mut entries = vec![0.0; k * k];
        for x in 0..k {
            entries[x * k + x] = 1.0;
        }
        Self {
            input_size: k,
            output_size: k,
            entries,
        }
    }

    /// Channel whose every row equals `row`.
    pub fn constant(input_size: usize, row: &Distribution) -> Self {
        let mut entries = Vec::with_capacity(input_size * row.len());
        for _ in 0..input_size {
            entries.extend_from_slice(row.probs());
        }
        Self {
            input_size,
            output_size: row.len(),
            entries,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.output_size)
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.output_size + y]
    }

    /// The output distribution `W_p(y) = sum_x p(x) W_x(y)`.
    pub fn output_distribution(&self, p: &Distribution) -> Result<Distribution> {
        check_len("input distribution", self.input_size, p.len())?;
        let mut probs = self.mix(p.probs());
        let total = stable_sum(probs.iter().copied());
        probs.iter_mut().for_each(|v| *v /= total);
        Ok(Distribution { probs })
    }

    /// Unnormalized mixture of rows with the given input weights.
    pub(crate) fn mix(&self, weights: &[f64]) -> Vec<f64> {
        let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); self.output_size];
        for (row, &w) in self.rows().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (a, &v) in acc.iter_mut().zip(row) {
                a.add(w * v);
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    }

    /// The `n`-fold memoryless extension, materialized densely. The budget caps the number of
    /// matrix entries `|X|^n |Y|^n`.
    pub fn product(&self, n: usize, budget: &EnumerationBudget) -> Result<Channel> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "product order must be positive".into(),
            ));
        }
        let joint = checked_pow(self.input_size * self.output_size, n);
        budget.admit(joint)?;
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.extend_by(self);
        }
        Ok(acc)
    }

    /// Appends one more coordinate (as the most significant digit).
    fn extend_by(&self, letter: &Channel) -> Channel {
        let (ki, li) = (self.input_size, self.output_size);
        let (k, l) = (letter.input_size, letter.output_size);
        let out = li * l;
        let mut entries = vec![0.0; ki * k * out];
        for xn in 0..k {
            let lrow = letter.row(xn);
            for xo in 0..ki {
                let orow = self.row(xo);
                let base = (xo + ki * xn) * out;
                for (yn, &w) in lrow.iter().enumerate() {
                    let dst = &mut entries[base + li * yn..base + li * (yn + 1)];
                    for (d, &o) in dst.iter_mut().zip(orow) {
                        *d = o * w;
                    }
                }
            }
        }
        Channel {
            input_size: ki * k,
            output_size: out,
            entries,
        }
    }
}

/// `d(p, q) = sum_y |p(y) - q(y)|`.
pub fn variational_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_len("variational distance", p.len(), q.len())?;
    Ok(l1_distance(p.probs(), q.probs()))
}

pub(crate) fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    stable_sum(p.iter().zip(q).map(|(a, b)| (a - b).abs()))
}

/// `D(p || q)` in nats; `+inf` when `p` charges a symbol outside the support of `q`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_len("kl divergence", p.len(), q.len())?;
    Ok(relative_entropy(p.probs(), q.probs()))
}

pub(crate) fn relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc.add(a * (a.ln() - b.ln()));
        }
    }
    acc.value().max(0.0)
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -stable_sum(p.iter().map(|&v| xlogx(v)))
}

/// `I(p; W) = E_p D(W_x || W_p)`.
pub fn mutual_information(p: &Distribution, w: &Channel) -> Result<f64> {
    check_len("input distribution", w.input_size(), p.len())?;
    let wp = w.mix(p.probs());
    let mut acc = CompensatedSum::new();
    for (x, &px) in p.probs().iter().enumerate() {
        if px > 0.0 {
            acc.add(px * relative_entropy(w.row(x), &wp));
        }
    }
    Ok(acc.value().max(0.0))
}

/// `J(p; W)`: half the variance of the information density `ln W_x(y) - ln W_p(y)` under `p x W`.
pub fn dispersion(p: &Distribution, w: &Channel) -> Result<f64> {
    check_len("input distribution", w.input_size(), p.len())?;
    let wp = w.mix(p.probs());
    let mut atoms = Vec::new();
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &wxy) in w.row(x).iter().enumerate() {
            if wxy > 0.0 {
                atoms.push((px * wxy, wxy.ln() - wp[y].ln()));
            }
        }
    }
    let mean = stable_sum(atoms.iter().map(|(m, d)| m * d));
    let var = stable_sum(atoms.iter().map(|(m, d)| m * (d - mean) * (d - mean)));
    Ok(0.5 * var.max(0.0))
}

/// Both sides of `D(p||q) + 1/e >= alpha * p{ ln p/q >= alpha }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl TailCheck {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

pub fn divergence_tail_check(p: &Distribution, q: &Distribution, alpha: f64) -> Result<TailCheck> {
    check_len("divergence tail check", p.len(), q.len())?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            allowed: "(0, inf)",
        });
    }
    let lhs = relative_entropy(p.probs(), q.probs()) + std::f64::consts::E.recip();
    let mut mass = CompensatedSum::new();
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a > 0.0 && (b <= 0.0 || a.ln() - b.ln() >= alpha) {
            mass.add(a);
        }
    }
    Ok(TailCheck {
        lhs,
        rhs: alpha * mass.value(),
    })
}

/// A memoryless extension `(W^n, p^n)` whose rows are produced on demand, so that the input
/// alphabet `|X|^n` never has to be materialized. Only the output alphabet `|Y|^n` counts against
/// the budget.
#[derive(Debug, Clone)]
pub struct Memoryless {
    channel: Channel,
    input: Distribution,
    n: usize,
    input_size: usize,
    output_size: usize,
    output: Vec<f64>,
}

impl Memoryless {
    pub fn new(
        channel: Channel,
        input: Distribution,
        n: usize,
        budget: &EnumerationBudget,
    ) -> Result<Self> {
        check_len("input distribution", channel.input_size(), input.len())?;
        if n == 0 {
            return Err(Error::InvalidParameter(
                "block length must be positive".into(),
            ));
        }
        let out = checked_pow(channel.output_size(), n);
        budget.admit(out)?;
        let input_size = checked_pow(channel.input_size(), n)
            .filter(|v| *v <= usize::MAX as u128)
            .ok_or(Error::TooLarge {
                what: "input alphabet |X|^n",
                size: u128::MAX,
                limit: usize::MAX as u128,
            })? as usize;
        let letter_output = channel.mix(input.probs());
        let output = power_vector(&letter_output, n);
        Ok(Self {
            output_size: output.len(),
            channel,
            input,
            n,
            input_size,
            output,
        })
    }

    /// Single-letter model (`n = 1`).
    pub fn single(channel: Channel, input: Distribution) -> Result<Self> {
        Self::new(channel, input, 1, &EnumerationBudget::default())
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn input(&self) -> &Distribution {
        &self.input
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// `W_{p^n}` on the product output alphabet.
    pub fn output_distribution(&self) -> &[f64] {
        &self.output
    }

    /// Coordinates of a product input index (little-endian).
    pub fn digits(&self, mut x: usize) -> Vec<usize> {
        let k = self.channel.input_size();
        (0..self.n)
            .map(|_| {
                let d = x % k;
                x /= k;
                d
            })
            .collect()
    }

    /// `W^n_x` for a product input index.
    pub fn row(&self, x: usize) -> Vec<f64> {
        let digits = self.digits(x);
        let mut acc = vec![1.0];
        for &d in &digits {
            acc = kron_append(&acc, self.channel.row(d));
        }
        acc
    }

    /// `p^n(x)` for a product input index.
    pub fn input_prob(&self, x: usize) -> f64 {
        self.digits(x)
            .iter()
            .map(|&d| self.input.probs()[d])
            .product()
    }

    /// Materializes `(W^n, p^n)` as an explicit channel and distribution.
    pub fn materialize(&self, budget: &EnumerationBudget) -> Result<(Channel, Distribution)> {
        Ok((
            self.channel.product(self.n, budget)?,
            self.input.product(self.n, budget)?,
        ))
    }
}

/// `v` followed by `w` as the new most significant coordinate.
fn kron_append(v: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() * w.len());
    for &b in w {
        out.extend(v.iter().map(|a| a * b));
    }
    out
}

fn power_vector(v: &[f64], n: usize) -> Vec<f64> {
    let mut acc = vec![1.0];
    for _ in 0..n {
        acc = kron_append(&acc, v);
    }
    acc
}
