//! The two-parameter solution family `(lambda, xi)`.
//!
//! The line element is `ds^2 = -e^{u1} dt^2 + dr^2 + e^{u2} dphi^2 + e^{u3} dz^2`
//! with `f = (u1 + u2 + u3) / 2` obeying `f'' + f'^2 = 3 lambda`. Its closed
//! form is
//!
//! ```text
//! f(r) = -k r + 1/2 log((c1 e^{2kr} - c2)^2 / (12 lambda)),   k = sqrt(3 lambda)
//! ```
//!
//! and every metric function is `u_i = 2/3 f + const` (plus an optional
//! anisotropic deformation with weights `alpha_i`). On the real-`xi` branch
//! the integration constants are fixed to `c2 = -1`, `c1 = xi^2`, which makes
//! the additive constants `beta_i = -2/3 log(-c2)` vanish.

use crate::report::{ReportMeta, VerificationReport};
use crate::{LbError, Real, Result};

/// Sign of `phi'` on the chosen scalar-field branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Physical parameters of one family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionParams<T> {
    pub lambda: T,
    /// Only `xi^2` enters the metric. `NaN` when the raw constants are off
    /// the real-`xi` branch (`-c1/c2 < 0`).
    pub xi: T,
    /// de Sitter length `sqrt(3 / lambda)`.
    pub a: T,
    pub phi_branch: Branch,
}

/// Integration constants of the general solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawConstants<T> {
    pub c1: T,
    pub c2: T,
    pub beta: [T; 3],
    /// Weights of the arctanh deformation; they must sum to zero.
    pub alpha: [T; 3],
}

impl<T: Real> RawConstants<T> {
    /// `c2 = -1`, `c1 = xi^2`, `beta_j = -2/3 log(-c2) = 0`, `alpha_i = 0`.
    pub fn canonical(xi: T) -> Self {
        let c2 = -T::one();
        let beta = -T::lit(2.0 / 3.0) * (-c2).ln();
        Self { c1: xi * xi, c2, beta: [beta; 3], alpha: [T::zero(); 3] }
    }

    /// `-c1 / c2`, which equals `xi^2` on the real-`xi` branch.
    pub fn xi_squared(&self) -> T {
        -self.c1 / self.c2
    }
}

/// A family member: physical parameters together with the integration
/// constants used to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution<T> {
    pub params: SolutionParams<T>,
    pub raw: RawConstants<T>,
}

/// `f` and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue<T> {
    pub f: T,
    pub f_p: T,
    pub f_pp: T,
}

/// Every radial profile quantity at one `r`.
///
/// `f` here is `(u1 + u2 + u3) / 2`; it differs from [`f_eval`] by the
/// constant `1/2 log(12 lambda) + (beta1 + beta2 + beta3) / 2`, which drops
/// out of every field equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample<T> {
    pub r: T,
    pub f: T,
    pub f_p: T,
    pub f_pp: T,
    pub u: [T; 3],
    pub u_p: [T; 3],
    pub u_pp: [T; 3],
    pub w: T,
    pub w_p: T,
    pub w_pp: T,
}

impl<T: Real> MetricSample<T> {
    /// Diagonal metric components `(g_tt, g_rr, g_phiphi, g_zz)`.
    pub fn metric_diagonal(&self) -> [T; 4] {
        [-self.u[0].exp(), T::one(), self.u[1].exp(), self.u[2].exp()]
    }

    /// Sum of `u_i'`.
    pub fn u_p_sum(&self) -> T {
        self.u_p[0] + self.u_p[1] + self.u_p[2]
    }
}

/// Builds the canonical family member for `(lambda, xi)`.
pub fn params_from_xi<T: Real>(lambda: T, xi: T) -> Result<Solution<T>> {
    Solution::from_raw(lambda, RawConstants::canonical(xi), Branch::Plus)
}

impl<T: Real> Solution<T> {
    /// Accepts arbitrary real constants with `c2 != 0`. Off the real-`xi`
    /// branch the printed `w(r)` has no meaning and `params.xi` is `NaN`.
    pub fn from_raw(lambda: T, raw: RawConstants<T>, phi_branch: Branch) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(LbError::Domain(format!("lambda = {lambda} must be positive and finite")));
        }
        if raw.c2 == T::zero() || !raw.c2.is_finite() || !raw.c1.is_finite() {
            return Err(LbError::Domain(format!("need finite c1 and c2 != 0, got ({}, {})", raw.c1, raw.c2)));
        }
        let xi2 = raw.xi_squared();
        let xi = if xi2 >= T::zero() { xi2.sqrt() } else { T::nan() };
        let a = (T::lit(3.0) / lambda).sqrt();
        Ok(Self { params: SolutionParams { lambda, xi, a, phi_branch }, raw })
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.params.phi_branch = branch;
        self
    }

    pub fn with_alpha(mut self, alpha: [T; 3]) -> Self {
        self.raw.alpha = alpha;
        self
    }

    pub fn lambda(&self) -> T {
        self.params.lambda
    }

    pub fn a(&self) -> T {
        self.params.a
    }

    /// `k = sqrt(3 lambda) = 3 / a`.
    pub fn k(&self) -> T {
        (T::lit(3.0) * self.params.lambda).sqrt()
    }

    pub fn is_real_xi_branch(&self) -> bool {
        self.raw.xi_squared() >= T::zero()
    }

    /// Largest `|r|` for which `e^{2k|r|}` is finite.
    pub fn r_bound(&self) -> T {
        T::max_value().ln() / (T::lit(2.0) * self.k())
    }

    /// `[-2a, 2a]`.
    pub fn default_window(&self) -> (T, T) {
        let two_a = T::lit(2.0) * self.a();
        (-two_a, two_a)
    }

    fn exp2kr(&self, r: T) -> Result<T> {
        let e = (T::lit(2.0) * self.k() * r).exp();
        if !e.is_finite() {
            return Err(LbError::Range { r: r.as_f64(), bound: self.r_bound().as_f64() });
        }
        Ok(e)
    }
}

/// The closed form of `f` with analytic derivatives:
/// `f' = k (c1 E + c2) / (c1 E - c2)`, `f'' = -4 k^2 c1 c2 E / (c1 E - c2)^2`
/// with `E = e^{2kr}`.
pub fn f_eval<T: Real>(sol: &Solution<T>, r: T) -> Result<FValue<T>> {
    let k = sol.k();
    let e = sol.exp2kr(r)?;
    let (c1, c2) = (sol.raw.c1, sol.raw.c2);
    let den = c1 * e - c2;
    if den == T::zero() {
        return Err(LbError::Pole(format!("c1 e^(2kr) = c2 at r = {r}")));
    }
    let twelve_lambda = T::lit(12.0) * sol.lambda();
    let f = -k * r + den.abs().ln() - twelve_lambda.ln() / T::lit(2.0);
    let f_p = k * (c1 * e + c2) / den;
    let f_pp = -T::lit(4.0) * k * k * c1 * c2 * e / (den * den);
    Ok(FValue { f, f_p, f_pp })
}

/// The arctanh deformation `-(alpha a / 3) / (c2 m) * artanh(m e^{kr})`,
/// `m = sqrt(c1 / c2)`, per unit `alpha`, with its first two derivatives.
/// Branches are fixed so that the first derivative is always
/// `e^{kr} / (c1 e^{2kr} - c2)`; for `c1 / c2 < 0` the arctanh continues to
/// an arctangent and stays real.
fn deformation<T: Real>(sol: &Solution<T>, r: T) -> Result<[T; 3]> {
    let (c1, c2) = (sol.raw.c1, sol.raw.c2);
    let k = sol.k();
    let a = sol.a();
    let s = (k * r).exp();
    let e = s * s;
    let den = c1 * e - c2;
    let third_a = a / T::lit(3.0);
    let ratio = c1 / c2;
    let value = if c1 == T::zero() {
        -third_a * s / c2
    } else if ratio > T::zero() {
        let m = ratio.sqrt();
        let arg = m * s;
        if arg.abs() >= T::one() {
            // m e^{kr} < 1  <=>  r < -ln(m) / k
            let bound = -m.ln() / k;
            return Err(LbError::ArctanhDomain { r: r.as_f64(), arg: arg.as_f64(), bound: bound.as_f64() });
        }
        -third_a / (c2 * m) * arg.atanh()
    } else {
        let n = (-ratio).sqrt();
        -third_a / (c2 * n) * (n * s).atan()
    };
    let d1 = s / den;
    let d2 = -k * s * (c1 * e + c2) / (den * den);
    Ok([value, d1, d2])
}

/// Evaluates every radial quantity at `r`.
///
/// `u_i = 2/3 f_closed + 1/3 log(12 lambda) + beta_i + alpha_i D(r)`, where
/// `D` is the deformation above. `w` is the printed conformal factor
/// `e^{-2r/a} (1 + xi^2 e^{6r/a})^{2/3}` on the real-`xi` branch and
/// `e^{u1}` elsewhere.
pub fn metric_eval<T: Real>(sol: &Solution<T>, r: T) -> Result<MetricSample<T>> {
    let fv = f_eval(sol, r)?;
    let two_thirds = T::lit(2.0 / 3.0);
    let shift = (T::lit(12.0) * sol.lambda()).ln() / T::lit(3.0);
    let alpha = sol.raw.alpha;
    let deformed = alpha.iter().any(|&x| x != T::zero());
    let d = if deformed { deformation(sol, r)? } else { [T::zero(); 3] };

    let mut u = [T::zero(); 3];
    let mut u_p = [T::zero(); 3];
    let mut u_pp = [T::zero(); 3];
    for i in 0..3 {
        u[i] = two_thirds * fv.f + shift + sol.raw.beta[i] + alpha[i] * d[0];
        u_p[i] = two_thirds * fv.f_p + alpha[i] * d[1];
        u_pp[i] = two_thirds * fv.f_pp + alpha[i] * d[2];
    }
    let half = T::lit(0.5);
    let f = (u[0] + u[1] + u[2]) * half;
    let f_p = (u_p[0] + u_p[1] + u_p[2]) * half;
    let f_pp = (u_pp[0] + u_pp[1] + u_pp[2]) * half;

    let (w, w_p, w_pp) = if sol.is_real_xi_branch() {
        conformal_factor(sol, r)?
    } else {
        let w = u[0].exp();
        (w, w * u_p[0], w * (u_pp[0] + u_p[0] * u_p[0]))
    };
    Ok(MetricSample { r, f, f_p, f_pp, u, u_p, u_pp, w, w_p, w_pp })
}

/// `w = e^{-2r/a} (1 + xi^2 e^{6r/a})^{2/3}` and its derivatives, from
/// `(ln w)' = (4q - 2) / a` and `(ln w)'' = 24 q (1 - q) / a^2`, with
/// `q = xi^2 e^{6r/a} / (1 + xi^2 e^{6r/a})`.
fn conformal_factor<T: Real>(sol: &Solution<T>, r: T) -> Result<(T, T, T)> {
    let a = sol.a();
    let xi2 = sol.raw.xi_squared();
    let e6 = sol.exp2kr(r)?;
    let g = T::one() + xi2 * e6;
    let w = (-T::lit(2.0) * r / a).exp() * g.powf(T::lit(2.0 / 3.0));
    let q = xi2 * e6 / g;
    let l1 = (T::lit(4.0) * q - T::lit(2.0)) / a;
    let l2 = T::lit(24.0) * q * (T::one() - q) / (a * a);
    Ok((w, w * l1, w * (l2 + l1 * l1)))
}

/// `n` equally spaced points from `lo` to `hi` inclusive (one point when
/// `n < 2` or `lo == hi`).
pub fn grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n < 2 || lo == hi {
        return vec![lo];
    }
    let step = (hi - lo) / T::from_usize(n - 1).unwrap();
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * T::from_usize(i).unwrap() }).collect()
}

/// Location of the interior minimum of `w` inside `[lo, hi]`, found as the
/// sign change of `w'` on `brackets` cells. For `xi != 0` the unique
/// minimum sits at `r = -(a/3) ln|xi|`.
pub fn w_minima<T: Real>(sol: &Solution<T>, lo: T, hi: T, brackets: usize) -> Vec<T> {
    let tol = T::epsilon() * T::lit(8.0) * sol.a();
    crate::roots::scan_roots(
        |r| metric_eval(sol, r).map(|s| s.w_p).unwrap_or(T::nan()),
        lo,
        hi,
        brackets,
        tol,
    )
    .into_iter()
    .filter(|&r| {
        metric_eval(sol, r).map(|s| s.w_pp > T::zero()).unwrap_or(false)
    })
    .collect()
}

/// Checks on the additive constants: `|sum alpha|` and
/// `|sum beta + 1/2 log(12 lambda)|`, each against `1e-12`, plus one row per
/// nonzero `alpha_i`.
pub fn validate_constants(raw: &RawConstants<f64>, lambda: f64) -> VerificationReport {
    let mut rep = VerificationReport::new(ReportMeta::new(lambda, raw.xi_squared().max(0.0).sqrt()));
    let alpha_sum: f64 = raw.alpha.iter().sum();
    rep.check("alpha-sum", "constants", alpha_sum.abs(), CONSTANT_TOL);
    let beta_sum: f64 = raw.beta.iter().sum();
    rep.check("beta-sum", "constants", (beta_sum + 0.5 * (12.0 * lambda).ln()).abs(), CONSTANT_TOL);
    for (i, a) in raw.alpha.iter().enumerate() {
        if *a != 0.0 {
            rep.record("alpha-nonzero", format!("i={}", i + 1), *a);
        }
    }
    rep
}

/// Tolerance of [`validate_constants`].
pub const CONSTANT_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_constants() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        assert_eq!((s.raw.c1, s.raw.c2), (0.0, -1.0));
        assert_eq!(s.raw.beta, [0.0; 3]);
        assert_eq!(s.raw.alpha, [0.0; 3]);
        assert!((s.a() - 1.0).abs() < 1e-15);

        let s = params_from_xi(3.0f64, 1.0).unwrap();
        assert_eq!((s.raw.c1, s.raw.c2), (1.0, -1.0));
        assert_eq!(s.raw.xi_squared(), 1.0);

        let s = params_from_xi(0.75f64, 0.5).unwrap();
        assert!((s.a() - 2.0).abs() < 1e-15);
        assert_eq!((s.raw.c1, s.raw.c2), (0.25, -1.0));
        assert!(((-s.raw.c1 / s.raw.c2).sqrt() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn a_squared_lambda_is_three() {
        for lambda in [0.01f64, 0.75, 3.0, 12.0, 1e4] {
            let s = params_from_xi(lambda, 0.3).unwrap();
            assert!((s.a() * s.a() * lambda - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_positive_lambda() {
        for lambda in [0.0f64, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(params_from_xi(lambda, 1.0), Err(LbError::Domain(_))));
        }
    }

    #[test]
    fn negative_xi_is_the_same_metric() {
        let p = params_from_xi(3.0f64, 0.7).unwrap();
        let m = params_from_xi(3.0f64, -0.7).unwrap();
        let (sp, sm) = (metric_eval(&p, 0.3).unwrap(), metric_eval(&m, 0.3).unwrap());
        assert_eq!(sp, sm);
    }

    #[test]
    fn f_prime_spot_values() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let v = f_eval(&s, 0.0).unwrap();
        assert!((v.f_p + 3.0).abs() < 1e-15);
        assert_eq!(v.f_pp, 0.0);

        let s = params_from_xi(3.0f64, 1.0).unwrap();
        let v = f_eval(&s, 0.0).unwrap();
        assert!(v.f_p.abs() < 1e-15);
        assert!((v.f_pp - 9.0).abs() < 1e-14);
    }

    #[test]
    fn overflow_reports_bound() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        match f_eval(&s, 200.0) {
            Err(LbError::Range { r, bound }) => {
                assert_eq!(r, 200.0);
                assert!((bound - f64::MAX.ln() / 6.0).abs() < 1e-12);
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn w_at_origin() {
        for lambda in [0.75f64, 3.0, 12.0] {
            let s = params_from_xi(lambda, 0.0).unwrap();
            assert!((metric_eval(&s, 0.0).unwrap().w - 1.0).abs() < 1e-15);
            let s = params_from_xi(lambda, 1.0).unwrap();
            assert!((metric_eval(&s, 0.0).unwrap().w - 2f64.powf(2.0 / 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn w_matches_exp_u() {
        let s = params_from_xi(3.0f64, 0.1).unwrap();
        let m = metric_eval(&s, 0.5).unwrap();
        let rel = (m.w - m.u[0].exp()).abs() / m.w;
        assert!(rel < 1e-12, "{rel}");
        assert!((m.w_p - m.w * m.u_p[0]).abs() < 1e-12 * m.w_p.abs().max(1.0));
    }

    #[test]
    fn f_is_half_sum_of_u() {
        let s = params_from_xi(12.0f64, 2.0).unwrap().with_alpha([0.3, -0.1, -0.2]);
        let m = metric_eval(&s, -0.2).unwrap();
        assert!((m.f - (m.u[0] + m.u[1] + m.u[2]) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_minimum_of_w() {
        for xi in [0.1f64, 0.5, 1.0, 2.0] {
            let s = params_from_xi(3.0, xi).unwrap();
            let (lo, hi) = s.default_window();
            let mins = w_minima(&s, lo, hi, 4096);
            assert_eq!(mins.len(), 1, "xi = {xi}");
            assert!((mins[0] + s.a() / 3.0 * xi.ln()).abs() < 1e-10);
        }
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        assert!(w_minima(&s, -2.0, 2.0, 4096).is_empty());
    }

    #[test]
    fn arctanh_domain_is_reported() {
        let raw = RawConstants { c1: 1.0, c2: 1.0, beta: [0.0; 3], alpha: [1.0, -1.0, 0.0] };
        let s = Solution::from_raw(3.0f64, raw, Branch::Plus).unwrap();
        assert!(!s.is_real_xi_branch());
        match metric_eval(&s, 0.1) {
            Err(LbError::ArctanhDomain { bound, .. }) => assert!(bound.abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(metric_eval(&s, -0.1).is_ok());
    }

    #[test]
    fn grid_endpoints() {
        let g = grid(-2.0f64, 2.0, 5);
        assert_eq!(g, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(grid(1.0f64, 1.0, 10), vec![1.0]);
    }

    #[test]
    fn constants_report() {
        let mut raw = RawConstants::canonical(0.0f64);
        let rep = validate_constants(&raw, 1.0 / 12.0);
        assert!(rep.all_internal_pass());
        assert_eq!(rep.rows.len(), 2);

        // canonical gauge at lambda = 3: beta = 0 leaves |0 + 1/2 log 36| = log 6
        let rep = validate_constants(&RawConstants::canonical(1.0), 3.0);
        let beta = rep.rows_named("beta-sum").next().unwrap();
        assert!((beta.value - 6f64.ln()).abs() < 1e-15);
        assert_eq!(rep.rows_named("alpha-sum").next().unwrap().value, 0.0);

        raw.alpha = [1.0, -1.0, 0.0];
        let rep = validate_constants(&raw, 1.0 / 12.0);
        assert!(rep.all_internal_pass());
        assert_eq!(rep.rows_named("alpha-nonzero").count(), 2);
    }
}
