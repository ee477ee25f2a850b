use crate::scalar::{lit, Real};

/// Median of `v`; for even lengths the point of the middle interval closest to 0.
pub(crate) fn median_toward_zero<T: Real>(v: &mut [T]) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        return v[n / 2];
    }
    let (lo, hi) = (v[n / 2 - 1], v[n / 2]);
    if lo <= T::zero() && hi >= T::zero() {
        T::zero()
    } else if hi < T::zero() {
        hi
    } else {
        lo
    }
}

fn lad_cost<T: Real>(ts: &[T], ys: &[T], b: T, buf: &mut Vec<T>) -> (T, T) {
    buf.clear();
    buf.extend(ts.iter().zip(ys).map(|(&t, &y)| y - b * t));
    let a = median_toward_zero(buf);
    let cost = ts.iter().zip(ys).map(|(&t, &y)| (y - a - b * t).abs()).sum();
    (cost, a)
}

/// Least-absolute-deviation line `y = a + b t`, returned as `(b, a)`.
///
/// `ts` must be sorted. The slope is found by golden-section search over the
/// range of consecutive secants, which contains every pairwise slope.
pub fn lad_line<T: Real>(ts: &[T], ys: &[T]) -> (T, T) {
    assert_eq!(ts.len(), ys.len());
    if ts.len() < 2 {
        return (T::zero(), ys.first().copied().unwrap_or_else(T::zero));
    }
    let mut lo = T::infinity();
    let mut hi = -T::infinity();
    for i in 1..ts.len() {
        let dt = ts[i] - ts[i - 1];
        if dt > T::zero() {
            let s = (ys[i] - ys[i - 1]) / dt;
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        let mut v = ys.to_vec();
        return (T::zero(), median_toward_zero(&mut v));
    }
    let mut buf = Vec::with_capacity(ts.len());
    let g = lit::<T>(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = lad_cost(ts, ys, x1, &mut buf).0;
    let mut f2 = lad_cost(ts, ys, x2, &mut buf).0;
    for _ in 0..200 {
        if b - a <= T::epsilon() * (a.abs() + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = lad_cost(ts, ys, x1, &mut buf).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = lad_cost(ts, ys, x2, &mut buf).0;
        }
    }
    let slope = (a + b) * lit(0.5);
    let (_, icpt) = lad_cost(ts, ys, slope, &mut buf);
    (slope, icpt)
}

/// Ordinary least squares line, returned as `(b, a)`.
pub fn ols_line<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = lit::<T>(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    let b = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    (b, my - b * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lad_ignores_outliers() {
        let ts: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let mut ys: Vec<f64> = ts.iter().map(|t| 2.0 - 0.7 * t).collect();
        ys[5] += 30.0;
        ys[31] -= 12.0;
        let (b, a) = lad_line(&ts, &ys);
        assert!((b + 0.7).abs() < 1e-9 && (a - 2.0).abs() < 1e-8, "{b} {a}");
        let (b, _) = ols_line(&ts, &ts.iter().map(|t| 3.0 * t + 1.0).collect::<Vec<_>>());
        assert!((b - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let ts = [0.0, 1.0, 2.0, 3.0];
        let (b, a) = lad_line(&ts, &[1.5; 4]);
        assert_eq!(b, 0.0);
        assert_eq!(a, 1.5);
    }
}
