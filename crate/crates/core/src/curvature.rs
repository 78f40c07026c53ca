//! Curvature oracle for the diagonal static ansatz.
//!
//! Two independent routes to the Ricci tensor are provided: closed-form
//! expressions in `u_i, u_i', u_i''`, and a general Christoffel-symbol
//! contraction fed with the metric components and their radial derivatives
//! (analytic or finite-difference). Both use the sign convention in which
//! the field equations read `2 u_i'' + u_i' sum u_j' - 4 lambda = 0`.

use crate::model::{f_eval, metric_eval, MetricSample, Solution};
use crate::scalar_field::phi_prime_sq_constraint;
use crate::{LbError, Real, Result};

/// Ricci sign relative to `R_mn = d_a G^a_mn - d_n G^a_ma + G G - G G`.
/// The field equations of this family are reproduced only with `-1`.
pub const RICCI_SIGN: f64 = -1.0;

/// Coordinate order used throughout: `t, r, phi, z`.
pub const R_INDEX: usize = 1;

/// Closed-form diagonal Ricci components `(R_tt, R_rr, R_phiphi, R_zz)`.
pub fn ricci_diagonal<T: Real>(s: &MetricSample<T>) -> [T; 4] {
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);
    let sum = s.u_p_sum();
    let block = |i: usize| (two * s.u_pp[i] + s.u_p[i] * sum) * quarter;
    let rr = (0..3).fold(T::zero(), |acc, i| acc + s.u_pp[i] / two + s.u_p[i] * s.u_p[i] * quarter);
    [-s.u[0].exp() * block(0), rr, s.u[1].exp() * block(1), s.u[2].exp() * block(2)]
}

/// Diagonal metric components with their first two radial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet<T> {
    pub g: [T; 4],
    pub dg: [T; 4],
    pub ddg: [T; 4],
}

impl<T: Real> MetricJet<T> {
    /// Analytic jet: `g = +-e^u`, `g' = g u'`, `g'' = g (u'' + u'^2)`.
    pub fn from_sample(s: &MetricSample<T>) -> Self {
        let g = s.metric_diagonal();
        let mut dg = [T::zero(); 4];
        let mut ddg = [T::zero(); 4];
        for (slot, i) in [(0usize, 0usize), (2, 1), (3, 2)] {
            dg[slot] = g[slot] * s.u_p[i];
            ddg[slot] = g[slot] * (s.u_pp[i] + s.u_p[i] * s.u_p[i]);
        }
        Self { g, dg, ddg }
    }

    /// Five-point central differences of `metric` around `r` with step `h`.
    pub fn finite_difference<F>(metric: F, r: T, h: T) -> Result<Self>
    where
        F: Fn(T) -> Result<[T; 4]>,
    {
        let two = T::lit(2.0);
        let gm2 = metric(r - two * h)?;
        let gm1 = metric(r - h)?;
        let g0 = metric(r)?;
        let gp1 = metric(r + h)?;
        let gp2 = metric(r + two * h)?;
        let (eight, twelve, sixteen, thirty) = (T::lit(8.0), T::lit(12.0), T::lit(16.0), T::lit(30.0));
        let mut dg = [T::zero(); 4];
        let mut ddg = [T::zero(); 4];
        for i in 0..4 {
            dg[i] = (gm2[i] - eight * gm1[i] + eight * gp1[i] - gp2[i]) / (twelve * h);
            ddg[i] = (-gm2[i] + sixteen * gm1[i] - thirty * g0[i] + sixteen * gp1[i] - gp2[i]) / (twelve * h * h);
        }
        Ok(Self { g: g0, dg, ddg })
    }
}

type Rank3<T> = [[[T; 4]; 4]; 4];

/// Christoffel symbols `G^a_bc` and their radial derivatives for a diagonal
/// metric depending on `r` only.
pub fn christoffel<T: Real>(jet: &MetricJet<T>) -> (Rank3<T>, Rank3<T>) {
    let half = T::lit(0.5);
    let mut gamma = [[[T::zero(); 4]; 4]; 4];
    let mut d_gamma = [[[T::zero(); 4]; 4]; 4];
    // d_c g_ab is nonzero only for c = r and a = b.
    let dmetric = |a: usize, b: usize, c: usize| if c == R_INDEX && a == b { jet.dg[a] } else { T::zero() };
    let ddmetric = |a: usize, b: usize, c: usize| if c == R_INDEX && a == b { jet.ddg[a] } else { T::zero() };
    for a in 0..4 {
        let inv = T::one() / jet.g[a];
        let d_inv = -jet.dg[a] * inv * inv;
        for b in 0..4 {
            for c in 0..4 {
                let comb = dmetric(a, b, c) + dmetric(a, c, b) - dmetric(b, c, a);
                let d_comb = ddmetric(a, b, c) * delta(c, R_INDEX) + ddmetric(a, c, b) * delta(b, R_INDEX)
                    - ddmetric(b, c, a) * delta(a, R_INDEX);
                gamma[a][b][c] = half * inv * comb;
                d_gamma[a][b][c] = half * (d_inv * comb + inv * d_comb);
            }
        }
    }
    (gamma, d_gamma)
}

#[inline]
fn delta<T: Real>(i: usize, j: usize) -> T {
    if i == j {
        T::one()
    } else {
        T::zero()
    }
}

/// Full Ricci tensor from Christoffel symbols, in this crate's sign
/// convention.
pub fn ricci_from_jet<T: Real>(jet: &MetricJet<T>) -> [[T; 4]; 4] {
    let (g, dg) = christoffel(jet);
    let sign = T::lit(RICCI_SIGN);
    let mut ric = [[T::zero(); 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            // only radial derivatives survive
            let mut acc = dg[R_INDEX][m][n];
            if n == R_INDEX {
                for a in 0..4 {
                    acc = acc - dg[a][m][a];
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    acc = acc + g[a][a][b] * g[b][m][n] - g[a][n][b] * g[b][m][a];
                }
            }
            ric[m][n] = sign * acc;
        }
    }
    ric
}

/// `G^a_{a r} = d_r log sqrt|g|`.
pub fn contracted_christoffel_r<T: Real>(jet: &MetricJet<T>) -> T {
    let (g, _) = christoffel(jet);
    (0..4).fold(T::zero(), |acc, a| acc + g[a][a][R_INDEX])
}

/// Finite-difference step used by [`ricci_finite_difference`]:
/// `eps^(1/6) * a`, balancing the `h^4` truncation of the five-point
/// second-derivative stencil against its `eps / h^2` round-off.
pub fn fd_step<T: Real>(sol: &Solution<T>) -> T {
    T::epsilon().powf(T::lit(1.0 / 6.0)) * sol.a()
}

/// Ricci tensor from finite differences of the metric components alone.
pub fn ricci_finite_difference<T: Real>(sol: &Solution<T>, r: T) -> Result<[[T; 4]; 4]> {
    let jet = MetricJet::finite_difference(|x| metric_eval(sol, x).map(|s| s.metric_diagonal()), r, fd_step(sol))?;
    Ok(ricci_from_jet(&jet))
}

/// Componentwise residual of `R_mn - lambda g_mn - phi_m phi_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldResidual<T> {
    pub r: T,
    pub res_tt: T,
    pub res_rr: T,
    pub res_phiphi: T,
    pub res_zz: T,
    pub max_abs: T,
    /// Largest off-diagonal residual from the Christoffel route.
    pub off_diagonal_max: T,
}

impl<T: Real> FieldResidual<T> {
    pub fn components(&self) -> [T; 4] {
        [self.res_tt, self.res_rr, self.res_phiphi, self.res_zz]
    }
}

/// Residual of the field equations for an arbitrary sample, with `phi'^2`
/// taken from the `rr` constraint of the same sample.
pub fn residual_from_sample<T: Real>(s: &MetricSample<T>, lambda: T) -> FieldResidual<T> {
    let ric = ricci_diagonal(s);
    let g = s.metric_diagonal();
    let phi_sq = phi_prime_sq_constraint(s, lambda).value;
    let mut res = [T::zero(); 4];
    for i in 0..4 {
        res[i] = ric[i] - lambda * g[i];
    }
    res[R_INDEX] = res[R_INDEX] - phi_sq;
    let full = ricci_from_jet(&MetricJet::from_sample(s));
    let mut off = T::zero();
    for m in 0..4 {
        for n in 0..4 {
            if m != n {
                off = off.max(full[m][n].abs());
            }
        }
    }
    let max_abs = res.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    FieldResidual { r: s.r, res_tt: res[0], res_rr: res[1], res_phiphi: res[2], res_zz: res[3], max_abs, off_diagonal_max: off }
}

pub fn field_residual<T: Real>(sol: &Solution<T>, r: T) -> Result<FieldResidual<T>> {
    Ok(residual_from_sample(&metric_eval(sol, r)?, sol.lambda()))
}

/// `2 u_i'' + u_i' sum u_j' - 4 lambda` for each `i`.
pub fn eq3_residual<T: Real>(s: &MetricSample<T>, lambda: T) -> [T; 3] {
    let sum = s.u_p_sum();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    [0, 1, 2].map(|i| two * s.u_pp[i] + s.u_p[i] * sum - four * lambda)
}

/// `(d/dr (u_i' e^f) - 2 lambda e^f) / e^f = u_i'' + u_i' f' - 2 lambda`.
pub fn eq5_residual<T: Real>(s: &MetricSample<T>, lambda: T) -> [T; 3] {
    let two = T::lit(2.0);
    [0, 1, 2].map(|i| s.u_pp[i] + s.u_p[i] * s.f_p - two * lambda)
}

/// `f'' + f'^2 - 3 lambda` on the closed form.
pub fn f_ode_residual<T: Real>(sol: &Solution<T>, r: T) -> Result<T> {
    let v = f_eval(sol, r)?;
    Ok(v.f_pp + v.f_p * v.f_p - T::lit(3.0) * sol.lambda())
}

/// Deformed family member `u_i -> u_i + alpha_i D(r)`; the weights must sum
/// to zero within `1e-12`.
pub fn alpha_family_residual<T: Real>(sol: &Solution<T>, alpha: [T; 3], r: T) -> Result<FieldResidual<T>> {
    let sum = alpha[0] + alpha[1] + alpha[2];
    if sum.abs() > T::lit(1e-12) {
        return Err(LbError::Domain(format!("alpha weights sum to {sum}, not 0")));
    }
    field_residual(&sol.with_alpha(alpha), r)
}

/// One RK4 node of the `f` trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdePoint<T> {
    pub r: T,
    pub f: T,
    pub f_p: T,
}

pub const MIN_RK4_STEPS: usize = 16;

/// Classical fixed-step RK4 for `f'' = 3 lambda - f'^2`, started from the
/// closed form at `r0`. Returns `steps + 1` nodes.
pub fn ode_integrate_f<T: Real>(sol: &Solution<T>, r0: T, r1: T, steps: usize) -> Result<Vec<OdePoint<T>>> {
    if steps < MIN_RK4_STEPS {
        return Err(LbError::Resolution(format!("{steps} RK4 steps, need at least {MIN_RK4_STEPS}")));
    }
    let start = f_eval(sol, r0)?;
    let three_lambda = T::lit(3.0) * sol.lambda();
    let rhs = |_f: T, fp: T| (fp, three_lambda - fp * fp);
    let h = (r1 - r0) / T::from_usize(steps).unwrap();
    let (two, six) = (T::lit(2.0), T::lit(6.0));
    let half_h = h / two;

    let mut out = Vec::with_capacity(steps + 1);
    let (mut f, mut fp) = (start.f, start.f_p);
    out.push(OdePoint { r: r0, f, f_p: fp });
    for i in 1..=steps {
        let k1 = rhs(f, fp);
        let k2 = rhs(f + half_h * k1.0, fp + half_h * k1.1);
        let k3 = rhs(f + half_h * k2.0, fp + half_h * k2.1);
        let k4 = rhs(f + h * k3.0, fp + h * k3.1);
        f = f + h / six * (k1.0 + two * k2.0 + two * k3.0 + k4.0);
        fp = fp + h / six * (k1.1 + two * k2.1 + two * k3.1 + k4.1);
        let r = if i == steps { r1 } else { r0 + h * T::from_usize(i).unwrap() };
        out.push(OdePoint { r, f, f_p: fp });
    }
    Ok(out)
}

/// Endpoint errors of RK4 against the closed form and the fitted order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub steps: Vec<usize>,
    pub errors: Vec<T>,
    /// Least-squares slope of `log(error)` against `log(step size)`.
    pub order: T,
}

pub fn rk4_convergence<T: Real>(sol: &Solution<T>, r0: T, r1: T, steps: &[usize]) -> Result<ConvergenceStudy<T>> {
    let exact = f_eval(sol, r1)?.f;
    let mut errors = Vec::with_capacity(steps.len());
    for &n in steps {
        let last = *ode_integrate_f(sol, r0, r1, n)?.last().expect("non-empty trajectory");
        errors.push((last.f - exact).abs());
    }
    let pts: Vec<(T, T)> = steps
        .iter()
        .zip(&errors)
        .map(|(&n, &e)| (((r1 - r0) / T::from_usize(n).unwrap()).abs().ln(), e.ln()))
        .collect();
    let n = T::from_usize(pts.len()).unwrap();
    let mx = pts.iter().fold(T::zero(), |acc, p| acc + p.0) / n;
    let my = pts.iter().fold(T::zero(), |acc, p| acc + p.1) / n;
    let sxy = pts.iter().fold(T::zero(), |acc, p| acc + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |acc, p| acc + (p.0 - mx) * (p.0 - mx));
    Ok(ConvergenceStudy { steps: steps.to_vec(), errors, order: sxy / sxx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params_from_xi;

    fn flat() -> MetricSample<f64> {
        MetricSample {
            r: 0.0,
            f: 0.0,
            f_p: 0.0,
            f_pp: 0.0,
            u: [0.0; 3],
            u_p: [0.0; 3],
            u_pp: [0.0; 3],
            w: 1.0,
            w_p: 0.0,
            w_pp: 0.0,
        }
    }

    #[test]
    fn flat_space_has_no_curvature() {
        assert_eq!(ricci_diagonal(&flat()), [0.0; 4]);
        let full = ricci_from_jet(&MetricJet::from_sample(&flat()));
        assert!(full.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn both_routes_agree_on_a_sample() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        let m = metric_eval(&s, 0.37).unwrap();
        let closed = ricci_diagonal(&m);
        let jet = ricci_from_jet(&MetricJet::from_sample(&m));
        for i in 0..4 {
            assert!((closed[i] - jet[i][i]).abs() < 1e-12 * closed[i].abs().max(1.0));
        }
        let fd = ricci_finite_difference(&s, 0.37).unwrap();
        for i in 0..4 {
            assert!((closed[i] - fd[i][i]).abs() < 1e-6, "{i}: {} vs {}", closed[i], fd[i][i]);
        }
    }

    #[test]
    fn rr_component_is_the_scalar_constraint() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        for r in [-0.8, 0.0, 0.4] {
            let m = metric_eval(&s, r).unwrap();
            let rr = ricci_diagonal(&m)[1] - 3.0;
            assert!((rr - phi_prime_sq_constraint(&m, 3.0).value).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_solution_residual() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        let res = field_residual(&s, 0.0).unwrap();
        assert!(res.max_abs < 1e-9, "{res:?}");
        assert_eq!(res.off_diagonal_max, 0.0);
    }

    #[test]
    fn corrupted_sample_is_detected() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        let mut m = metric_eval(&s, 0.2).unwrap();
        m.u[0] *= 1.01;
        m.u_p[0] *= 1.01;
        m.u_pp[0] *= 1.01;
        assert!(residual_from_sample(&m, 3.0).max_abs > 1e-3);
    }

    #[test]
    fn rk4_requires_resolution() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        assert!(matches!(ode_integrate_f(&s, 0.0, 1.0, 8), Err(LbError::Resolution(_))));
    }

    #[test]
    fn rk4_zero_length() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        let traj = ode_integrate_f(&s, 0.5, 0.5, 16).unwrap();
        let start = f_eval(&s, 0.5).unwrap();
        assert!(traj.iter().all(|p| p.f == start.f && p.f_p == start.f_p));
    }

    #[test]
    fn alpha_sum_must_vanish() {
        let s = params_from_xi(3.0f64, 1.0).unwrap();
        assert!(matches!(alpha_family_residual(&s, [1.0, 0.0, 0.0], 0.0), Err(LbError::Domain(_))));
        let res = alpha_family_residual(&s, [0.0; 3], 0.0).unwrap();
        assert!(res.max_abs < 1e-8);
    }
}
