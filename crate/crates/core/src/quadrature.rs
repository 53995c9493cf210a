//! Composite Simpson rules on an interval and on the time-ordered triangle
//! `0 <= t2 <= t1 <= t`. These back the independent oracles for the
//! closed-form Magnus terms.

use crate::hilbert::{ComplexMatrix, C64};

/// Values that can be accumulated as weighted sums.
pub trait Accumulate: Sized {
    fn zero_like(&self) -> Self;
    /// `self += w * x`
    fn axpy(&mut self, w: f64, x: &Self);
}

impl Accumulate for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }

    fn axpy(&mut self, w: f64, x: &Self) {
        *self += x * w;
    }
}

impl Accumulate for ComplexMatrix {
    fn zero_like(&self) -> Self {
        ComplexMatrix::zeros(self.nrows(), self.ncols())
    }

    fn axpy(&mut self, w: f64, x: &Self) {
        self.zip_apply(x, |a, b| *a += b * w);
    }
}

fn even(n: usize) -> usize {
    (n.max(2) + 1) & !1
}

fn simpson_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson over `[a, b]` with `n` panels (odd `n` is rounded up).
pub fn simpson<T: Accumulate>(f: impl Fn(f64) -> T, a: f64, b: f64, n: usize) -> T {
    let n = even(n);
    let h = (b - a) / n as f64;
    let first = f(a);
    let mut acc = first.zero_like();
    acc.axpy(h / 3.0, &first);
    for k in 1..=n {
        let x = if k == n { b } else { a + k as f64 * h };
        acc.axpy(simpson_weight(k, n) * h / 3.0, &f(x));
    }
    acc
}

/// Iterated Simpson over the triangle `0 <= t2 <= t1 <= t`: `n` outer panels
/// in `t1` and, at every outer node, `n` inner panels over `[0, t1]`.
pub fn triangle_simpson<T: Accumulate>(f: impl Fn(f64, f64) -> T, t: f64, n: usize) -> T {
    simpson(|t1| simpson(|t2| f(t1, t2), 0.0, t1, n), 0.0, t, n)
}

/// Running integrals `J_i = int_0^{t_i} f` of uniformly spaced samples
/// `values[i] = f(i h)`. Even nodes use composite Simpson, odd nodes close
/// with the 3/8 rule; node 1 integrates the quadratic through nodes 0..=2.
pub fn cumulative_simpson<T: Accumulate + Clone>(values: &[T], h: f64) -> Vec<T> {
    let m = values.len();
    assert!(m >= 3, "cumulative_simpson needs at least 3 samples");
    let zero = values[0].zero_like();
    let mut out: Vec<T> = Vec::with_capacity(m);
    out.push(zero.clone());

    let mut j1 = zero.clone();
    j1.axpy(5.0 * h / 12.0, &values[0]);
    j1.axpy(8.0 * h / 12.0, &values[1]);
    j1.axpy(-h / 12.0, &values[2]);
    out.push(j1);

    for i in 2..m {
        let next = if i % 2 == 0 {
            let mut j = out[i - 2].clone();
            j.axpy(h / 3.0, &values[i - 2]);
            j.axpy(4.0 * h / 3.0, &values[i - 1]);
            j.axpy(h / 3.0, &values[i]);
            j
        } else {
            let mut j = out[i - 3].clone();
            let w = 3.0 * h / 8.0;
            j.axpy(w, &values[i - 3]);
            j.axpy(3.0 * w, &values[i - 2]);
            j.axpy(3.0 * w, &values[i - 1]);
            j.axpy(w, &values[i]);
            j
        };
        out.push(next);
    }
    out
}

/// `int_0^t dt1 int_0^{t1} dt2 [H(t1), H(t2)]` on a shared uniform grid of
/// `n` panels: the inner integral is cumulative, the outer one composite
/// Simpson.
pub fn nested_commutator_simpson(
    h: impl Fn(f64) -> ComplexMatrix,
    t: f64,
    n: usize,
) -> ComplexMatrix {
    let n = even(n);
    let step = t / n as f64;
    let samples: Vec<ComplexMatrix> = (0..=n).map(|k| h(k as f64 * step)).collect();
    let inner = cumulative_simpson(&samples, step);
    let mut acc = samples[0].zero_like();
    for (k, (hk, jk)) in samples.iter().zip(inner.iter()).enumerate() {
        let c = hk * jk - jk * hk;
        acc.axpy(simpson_weight(k, n) * step / 3.0, &c);
    }
    acc
}
