//! Adaptive Simpson quadrature with Richardson-corrected error control.

use crate::Real;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Sum of the local `|S2 - S1| / 15` estimates.
    pub error_estimate: T,
    /// True if some subinterval hit the depth limit before meeting its
    /// tolerance share.
    pub depth_exhausted: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSimpson<T> {
    pub abs_tol: T,
    pub max_depth: u32,
}

impl<T: Real> Default for AdaptiveSimpson<T> {
    fn default() -> Self {
        Self { abs_tol: T::lit(1e-10), max_depth: 60 }
    }
}

struct Panel<T> {
    a: T,
    m: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

impl<T: Real> AdaptiveSimpson<T> {
    pub fn new(abs_tol: T, max_depth: u32) -> Self {
        Self { abs_tol, max_depth }
    }

    /// Integrates `f` over `[lo, hi]`. Reversed limits negate the result and
    /// an empty interval returns zero without evaluating `f`.
    pub fn integrate<F>(&self, mut f: F, lo: T, hi: T) -> Quadrature<T>
    where
        F: FnMut(T) -> T,
    {
        if lo == hi {
            return Quadrature { value: T::zero(), error_estimate: T::zero(), depth_exhausted: false };
        }
        let two = T::lit(2.0);
        let m = (lo + hi) / two;
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        let whole = simpson(lo, hi, fa, fm, fb);
        let mut out = Quadrature { value: T::zero(), error_estimate: T::zero(), depth_exhausted: false };
        let panel = Panel { a: lo, m, b: hi, fa, fm, fb, whole };
        self.recurse(&mut f, panel, self.abs_tol, self.max_depth, &mut out);
        out
    }

    fn recurse<F>(&self, f: &mut F, p: Panel<T>, tol: T, depth: u32, out: &mut Quadrature<T>)
    where
        F: FnMut(T) -> T,
    {
        let two = T::lit(2.0);
        let fifteen = T::lit(15.0);
        let lm = (p.a + p.m) / two;
        let rm = (p.m + p.b) / two;
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, p.m, p.fa, flm, p.fm);
        let right = simpson(p.m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;

        if delta.abs() <= fifteen * tol || !delta.is_finite() || depth == 0 {
            if depth == 0 && delta.abs() > fifteen * tol {
                out.depth_exhausted = true;
            }
            out.value = out.value + left + right + delta / fifteen;
            out.error_estimate = out.error_estimate + delta.abs() / fifteen;
            return;
        }
        let half = tol / two;
        self.recurse(f, Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, half, depth - 1, out);
        self.recurse(f, Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, half, depth - 1, out);
    }
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

/// Integrates with the default tolerance (`1e-10` absolute, depth 60).
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, lo: T, hi: T) -> T {
    AdaptiveSimpson::default().integrate(f, lo, hi).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = AdaptiveSimpson::<f64>::default().integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0);
        assert!((q.value - 0.0).abs() < 1e-14);
        assert!(!q.depth_exhausted);
    }

    #[test]
    fn reversed_limits_negate() {
        let fwd = integrate(f64::exp, -1.0, 0.5);
        let back = integrate(f64::exp, 0.5, -1.0);
        assert!((fwd + back).abs() < 1e-14);
        assert!((fwd - (0.5f64.exp() - (-1.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn empty_interval_skips_evaluation() {
        let mut calls = 0;
        let q = AdaptiveSimpson::<f64>::default().integrate(
            |x| {
                calls += 1;
                x
            },
            1.0,
            1.0,
        );
        assert_eq!(q.value, 0.0);
        assert_eq!(calls, 0);
    }

    #[test]
    fn square_root_cusp() {
        // int_0^1 sqrt(x) dx = 2/3; derivative is singular at the endpoint
        let v = integrate(f64::sqrt, 0.0, 1.0);
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn single_precision() {
        let q = AdaptiveSimpson::<f32>::new(1e-5, 30).integrate(|x| x.sin(), 0.0, std::f32::consts::PI);
        assert!((q.value - 2.0).abs() < 1e-4);
    }
}
