//! Scalar-field profile `phi(r)`.
//!
//! `phi'^2` is taken from the `rr` field equation,
//! `phi'^2 = (2 sum u_j'' + sum u_j'^2 - 4 lambda) / 4`. The alternative
//! integrand `2 (lambda - f'^2)` is evaluated only for comparison.

use std::cell::RefCell;

use crate::model::{metric_eval, MetricSample, Solution};
use crate::quadrature::AdaptiveSimpson;
use crate::{LbError, Real, Result};

/// Relative tolerance below zero that is still read as a vanishing field.
pub const NON_REAL_REL_TOL: f64 = 1e-12;

/// `phi'^2` with a flag for values that are genuinely negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPrimeSq<T> {
    pub value: T,
    pub non_real: bool,
}

impl<T: Real> PhiPrimeSq<T> {
    /// `|phi'|`, with round-off negatives clamped to zero. `NaN` if non-real.
    pub fn magnitude(&self) -> T {
        if self.non_real {
            T::nan()
        } else {
            self.value.max(T::zero()).sqrt()
        }
    }
}

pub fn phi_prime_sq_constraint<T: Real>(s: &MetricSample<T>, lambda: T) -> PhiPrimeSq<T> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let sum_pp = s.u_pp[0] + s.u_pp[1] + s.u_pp[2];
    let sum_p_sq = s.u_p.iter().fold(T::zero(), |acc, &x| acc + x * x);
    let value = (two * sum_pp + sum_p_sq - four * lambda) / four;
    let scale = lambda + sum_p_sq + two * s.u_pp.iter().fold(T::zero(), |acc, &x| acc + x.abs());
    PhiPrimeSq { value, non_real: value < -T::lit(NON_REAL_REL_TOL) * scale }
}

/// `2 (lambda - f'^2)`; may be negative.
pub fn phi_prime_sq_eq8<T: Real>(s: &MetricSample<T>, lambda: T) -> T {
    T::lit(2.0) * (lambda - s.f_p * s.f_p)
}

/// Signed `phi'` on the solution's branch, or an error where `phi'^2 < 0`.
pub fn phi_prime<T: Real>(sol: &Solution<T>, s: &MetricSample<T>) -> Result<T> {
    let sq = phi_prime_sq_constraint(s, sol.lambda());
    if sq.non_real {
        return Err(non_real(sq.value, s.r, s.r, s.r));
    }
    Ok(sol.params.phi_branch.sign::<T>() * sq.magnitude())
}

/// First integral of the wave equation, `J = e^f phi'` with
/// `f = (u1 + u2 + u3) / 2 = log sqrt(-g)`.
pub fn noether_charge<T: Real>(sol: &Solution<T>, r: T) -> Result<T> {
    let s = metric_eval(sol, r)?;
    noether_from_sample(sol, &s)
}

pub fn noether_from_sample<T: Real>(sol: &Solution<T>, s: &MetricSample<T>) -> Result<T> {
    Ok(s.f.exp() * phi_prime(sol, s)?)
}

/// `phi(r1)` in the gauge `phi(r0) = 0`, by adaptive Simpson quadrature of
/// the signed `sqrt(phi'^2)`.
pub fn phi_accumulate<T: Real>(sol: &Solution<T>, r0: T, r1: T) -> Result<T> {
    if r0 == r1 {
        return Ok(T::zero());
    }
    let failure: RefCell<Option<LbError>> = RefCell::new(None);
    let sign = sol.params.phi_branch.sign::<T>();
    let (lo, hi) = if r0 < r1 { (r0, r1) } else { (r1, r0) };
    let q = AdaptiveSimpson::default().integrate(
        |r| match metric_eval(sol, r) {
            Ok(s) => {
                let sq = phi_prime_sq_constraint(&s, sol.lambda());
                if sq.non_real {
                    failure.borrow_mut().get_or_insert(non_real(sq.value, r, lo, hi));
                    T::zero()
                } else {
                    sign * sq.magnitude()
                }
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::zero()
            }
        },
        r0,
        r1,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

fn non_real<T: Real>(value: T, at: T, lo: T, hi: T) -> LbError {
    LbError::NonRealScalar { value: value.as_f64(), at: at.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() }
}

/// Scalar-field quantities sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProfile<T> {
    pub r: Vec<T>,
    pub phi_p_sq_constraint: Vec<T>,
    pub phi_p_sq_eq8: Vec<T>,
    /// `phi`, zero at the first grid point.
    pub phi: Vec<T>,
    pub noether: Vec<T>,
}

pub fn scalar_profile<T: Real>(sol: &Solution<T>, grid: &[T]) -> Result<ScalarProfile<T>> {
    let mut out = ScalarProfile {
        r: grid.to_vec(),
        phi_p_sq_constraint: Vec::with_capacity(grid.len()),
        phi_p_sq_eq8: Vec::with_capacity(grid.len()),
        phi: Vec::with_capacity(grid.len()),
        noether: Vec::with_capacity(grid.len()),
    };
    let mut phi = T::zero();
    for (i, &r) in grid.iter().enumerate() {
        let s = metric_eval(sol, r)?;
        out.phi_p_sq_constraint.push(phi_prime_sq_constraint(&s, sol.lambda()).value);
        out.phi_p_sq_eq8.push(phi_prime_sq_eq8(&s, sol.lambda()));
        out.noether.push(noether_from_sample(sol, &s)?);
        if i > 0 {
            phi = phi + phi_accumulate(sol, grid[i - 1], r)?;
        }
        out.phi.push(phi);
    }
    Ok(out)
}
