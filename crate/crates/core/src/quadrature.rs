//! Gauss-Legendre rules, composite panel rules and adaptive Gauss-Kronrod.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
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
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A fixed quadrature rule: nodes and weights on some interval.
#[derive(Clone, Debug, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn push_panel(&mut self, a: f64, b: f64, gl: &(Vec<f64>, Vec<f64>)) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gl.0.iter().zip(&gl.1) {
            self.nodes.push(mid + half * x);
            self.weights.push(half * w);
        }
    }

    /// `panels` equal panels on `[a, b]`, each with an `order`-point Gauss rule.
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
        let gl = gauss_legendre(order);
        let mut r = Rule::default();
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            r.push_panel(a + p as f64 * h, a + (p + 1) as f64 * h, &gl);
        }
        r
    }

    /// Like [`Rule::composite`], with the first panel replaced by `grading`
    /// geometrically halving sub-panels toward `a`. Resolves
    /// integrable endpoint singularities such as `log` or `1/sqrt`.
    pub fn composite_graded(a: f64, b: f64, panels: usize, order: usize, grading: usize) -> Rule {
        let gl = gauss_legendre(order);
        let mut r = Rule::default();
        let h = (b - a) / panels as f64;
        let mut edges = vec![a + h];
        let mut e = h;
        for _ in 0..grading {
            e *= 0.5;
            edges.push(a + e);
        }
        edges.push(a);
        edges.reverse();
        for w in edges.windows(2) {
            r.push_panel(w[0], w[1], &gl);
        }
        for p in 1..panels {
            r.push_panel(a + p as f64 * h, a + (p + 1) as f64 * h, &gl);
        }
        r
    }
}

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Global adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol * |I|)`.
/// Returns `(value, error_estimate)`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    const MAX_SEGMENTS: usize = 4000;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let (mut total, mut err) = (v, e);
    while !(err <= abs_tol.max(rel_tol * total.abs())) {
        if heap.len() >= MAX_SEGMENTS || !total.is_finite() {
            return Err(Error::Accuracy { estimate: err, tol: abs_tol.max(rel_tol * total.abs()) });
        }
        let s = heap.pop().expect("non-empty heap");
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Accuracy { estimate: err, tol: abs_tol.max(rel_tol * total.abs()) });
        }
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.err;
        heap.push(Segment { a: s.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: s.b, value: v2, err: e2 });
        if heap.len() % 64 == 0 {
            // Resum to limit drift from the incremental updates.
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.err).sum();
        }
    }
    Ok((total, err))
}

/// Integral over `[a, inf)` of an oscillatory, slowly decaying integrand.
///
/// The range is split into consecutive intervals of length `period_half`
/// starting at `first_break`, and the resulting partial sums are accelerated
/// with Wynn's epsilon algorithm.
pub fn integrate_oscillatory_tail(
    f: impl Fn(f64) -> f64,
    a: f64,
    first_break: f64,
    period_half: f64,
    tol: f64,
) -> Result<f64> {
    const MAX_TERMS: usize = 400;
    let (head, _) = integrate(&f, a, first_break, tol * 0.01, 1e-14)?;
    let mut partial = Vec::with_capacity(MAX_TERMS);
    let mut s = head;
    let mut lo = first_break;
    let mut prev_estimate = f64::NAN;
    for k in 0..MAX_TERMS {
        let hi = lo + period_half;
        let (v, _) = integrate(&f, lo, hi, tol * 1e-3, 1e-14)?;
        s += v;
        lo = hi;
        partial.push(s);
        if k >= 8 {
            let est = wynn_epsilon(&partial);
            if (est - prev_estimate).abs() < tol {
                return Ok(est);
            }
            prev_estimate = est;
        }
    }
    Err(Error::Accuracy { estimate: f64::NAN, tol })
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = *s.last().unwrap_or(&0.0);
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let base = if col == 0 { 0.0 } else { prev[i + 1] };
            next.push(if d == 0.0 { f64::INFINITY } else { base + 1.0 / d });
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}
