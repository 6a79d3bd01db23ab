//! Adaptive Gauss–Kronrod (7/15) integration and Gauss–Legendre rules.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One G7K15 panel: (Kronrod value, |Kronrod - Gauss|).
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Estimate {
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

/// Accepted panels of an adaptive integration, sorted by position.
#[derive(Clone, Debug)]
pub struct Partition {
    panels: Vec<Panel>,
}

impl Partition {
    pub fn total(&self) -> Estimate {
        self.panels.iter().fold(
            Estimate {
                value: 0.0,
                error: 0.0,
            },
            |acc, p| Estimate {
                value: acc.value + p.est.value,
                error: acc.error + p.est.error,
            },
        )
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }
}

/// Globally adaptive bisection on `[a, b]` with the given interior breakpoints,
/// until the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_partition(
    f: &mut impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Partition> {
    let mut heap: BinaryHeap<ByError> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            ByError(Panel {
                a: w[0],
                b: w[1],
                est: gk15(f, w[0], w[1]),
            })
        })
        .collect();
    let mut done: Vec<Panel> = Vec::new();
    let mut total = heap.iter().map(|p| p.0.est.value).sum::<f64>();
    let mut err = heap.iter().map(|p| p.0.est.error).sum::<f64>();
    loop {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            // the running sums drift; confirm with fresh ones
            total = heap.iter().map(|p| p.0.est.value).sum::<f64>()
                + done.iter().map(|p| p.est.value).sum::<f64>();
            err = heap.iter().map(|p| p.0.est.error).sum::<f64>()
                + done.iter().map(|p| p.est.error).sum::<f64>();
            if err <= abs_tol.max(rel_tol * total.abs()) {
                break;
            }
        }
        if heap.len() + done.len() >= max_panels {
            return Err(Error::NotConverged {
                last: total,
                iterations: heap.len() + done.len(),
            });
        }
        let Some(ByError(p)) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // cannot bisect further in floating point
            done.push(p);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = Panel {
            a: p.a,
            b: m,
            est: gk15(f, p.a, m),
        };
        let right = Panel {
            a: m,
            b: p.b,
            est: gk15(f, m, p.b),
        };
        total += left.est.value + right.est.value - p.est.value;
        err += left.est.error + right.est.error - p.est.error;
        heap.push(ByError(left));
        heap.push(ByError(right));
    }
    let mut panels: Vec<Panel> = heap.into_iter().map(|p| p.0).chain(done).collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Partition { panels })
}

/// Heap order on the error estimate.
struct ByError(Panel);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for ByError {}

impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByError {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .est
            .error
            .total_cmp(&other.0.est.error)
            .then(other.0.a.total_cmp(&self.0.a))
    }
}

/// `∫ f` over `[breakpoints[0], breakpoints[last]]`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    Ok(adaptive_partition(&mut f, breakpoints, abs_tol, rel_tol, 200_000)?.total())
}

/// `F(t) = ∫_{t_0}^{t} f` evaluated from a converged partition: whole panels
/// are summed from a prefix table, the partial panel by one G7K15 application.
pub struct Cumulative<F: FnMut(f64) -> f64> {
    f: F,
    starts: Vec<f64>,
    ends: Vec<f64>,
    prefix: Vec<f64>,
}

impl<F: FnMut(f64) -> f64> Cumulative<F> {
    pub fn new(mut f: F, breakpoints: &[f64], abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let part = adaptive_partition(&mut f, breakpoints, abs_tol, rel_tol, 200_000)?;
        let mut prefix = Vec::with_capacity(part.len() + 1);
        prefix.push(0.0);
        for p in &part.panels {
            prefix.push(prefix.last().unwrap() + p.est.value);
        }
        Ok(Cumulative {
            f,
            starts: part.panels.iter().map(|p| p.a).collect(),
            ends: part.panels.iter().map(|p| p.b).collect(),
            prefix,
        })
    }

    pub fn eval(&mut self, t: f64) -> f64 {
        if self.starts.is_empty() || t <= self.starts[0] {
            return 0.0;
        }
        let i = self.starts.partition_point(|&s| s <= t) - 1;
        if t >= self.ends[i] {
            return self.prefix[i + 1];
        }
        self.prefix[i] + gk15(&mut self.f, self.starts[i], t).value
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let e = gk15(&mut |x: f64| x.powi(10), 0.0, 1.0);
        assert_abs_diff_eq!(e.value, 1.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn adaptive_handles_kinks_and_peaks() {
        let e = integrate(|x: f64| (x - 0.3).abs(), &[0.0, 1.0], 1e-13, 1e-12).unwrap();
        assert_abs_diff_eq!(e.value, 0.045 + 0.245, epsilon = 1e-11);
        let e = integrate(|x: f64| 1.0 / (1e-4 + x * x), &[-1.0, 1.0], 0.0, 1e-10).unwrap();
        assert_abs_diff_eq!(e.value, 2.0 * 100.0 * (100.0f64).atan(), epsilon = 1e-7);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let mut c = Cumulative::new(|x: f64| x.cos(), &[0.0, 1.0, 3.0], 1e-14, 1e-13).unwrap();
        for t in [0.0, 0.2, 1.0, 1.7, 3.0] {
            assert_abs_diff_eq!(c.eval(t), t.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        for n in [1, 2, 5, 16, 24] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert_abs_diff_eq!(s, exact, epsilon = 1e-13);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }
}
