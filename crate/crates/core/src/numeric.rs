//! Small numerical helpers shared across modules.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn stable_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// `x ln x` with the convention `0 ln 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `eta(x) = -x ln x`.
pub fn eta(x: f64) -> f64 {
    -xlogx(x)
}

/// `base^exp` as u128, `None` on overflow.
pub fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}

/// Mean and standard error (sample standard deviation over sqrt(n)).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = stable_sum(values.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = stable_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Evenly spaced points covering `[lo, hi]` with spacing close to `step`; both ends included.
pub fn grid_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(hi >= lo && step > 0.0);
    let cells = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=cells)
        .map(|k| {
            if k == cells {
                hi
            } else {
                lo + (hi - lo) * (k as f64) / (cells as f64)
            }
        })
        .collect()
}

/// Given `f` already evaluated on `points`, refines the best grid point by golden-section search
/// inside the bracket formed by its neighbours. Returns `(argmax, max)` with the value exactly
/// `f(argmax)`; ties on the grid go to the earliest point.
pub fn refine_grid_max<F>(points: &[f64], values: &[f64], mut f: F) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    assert_eq!(points.len(), values.len());
    let mut best_k = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (k, &v) in values.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    let mut best_x = points[best_k];
    let a = points[best_k.saturating_sub(1)];
    let b = points[(best_k + 1).min(points.len() - 1)];
    if b > a {
        let (x, v) = golden_section_max(&mut f, a, b, 1e-12);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    (best_x, best_v)
}

/// Maximize a scalar function on `[lo, hi]`: dense grid with spacing `step`, then golden-section
/// refinement inside the bracket around the best grid point. Returns `(argmax, max)`; the value
/// is exactly `f(argmax)`.
pub fn maximize_on_interval<F>(mut f: F, lo: f64, hi: f64, step: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let points = grid_points(lo, hi, step);
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    refine_grid_max(&points, &values, f)
}

fn golden_section_max<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
