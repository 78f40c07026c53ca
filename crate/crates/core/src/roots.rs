//! Bracketing scans and bisection for scalar functions of one variable.

use crate::Real;

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign (or
/// one of them zero). Stops when the bracket is below `x_tol` or after 200
/// halvings. Returns `None` if the endpoints do not bracket a root.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, x_tol: T) -> Option<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if !(flo.signum() != fhi.signum()) || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    let two = T::lit(2.0);
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        if (hi - lo).abs() <= x_tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / two)
}

/// Splits `[lo, hi]` into `brackets` equal cells and bisects every cell whose
/// endpoint values change sign. Roots landing exactly on a cell boundary are
/// reported once. Non-finite samples break a bracket.
pub fn scan_roots<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, brackets: usize, x_tol: T) -> Vec<T> {
    let n = brackets.max(1);
    let step = (hi - lo) / T::from_usize(n).unwrap();
    let xs: Vec<T> = (0..=n).map(|i| if i == n { hi } else { lo + step * T::from_usize(i).unwrap() }).collect();
    let fs: Vec<T> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        let (f0, f1) = (fs[i], fs[i + 1]);
        if !f0.is_finite() || !f1.is_finite() {
            continue;
        }
        if f0 == T::zero() {
            if roots.last().is_none_or(|&r| r != xs[i]) {
                roots.push(xs[i]);
            }
            continue;
        }
        if f1 == T::zero() {
            roots.push(xs[i + 1]);
            continue;
        }
        if f0.signum() != f1.signum() {
            if let Some(r) = bisect(&mut f, xs[i], xs[i + 1], x_tol) {
                roots.push(r);
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_non_bracket() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn scan_finds_all_cubic_roots() {
        let roots = scan_roots(|x: f64| (x - 0.3) * (x + 0.7) * (x - 1.9), -2.0, 2.0, 64, 1e-13);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-0.7, 0.3, 1.9]) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn scan_root_on_grid_node_reported_once() {
        let roots = scan_roots(|x: f64| x, -1.0, 1.0, 4, 1e-12);
        assert_eq!(roots, vec![0.0]);
    }
}
