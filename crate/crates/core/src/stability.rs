//! Linear stability of the first-order reduction `x_i = u_i'`:
//!
//! ```text
//! 2 x_i' = 4 lambda - x_i (x_1 + x_2 + x_3)
//! ```
//!
//! The stationary point is `x_i = 2/a` and the Jacobian there is
//! `-(3/a) I - (1/a) 11^T`. The scalar gradient `y = phi'` is fixed by the
//! `rr` constraint and carries no evolution law of its own, so it is not a
//! dynamical variable here.

use nalgebra::{Complex, Matrix3, RealField};

use crate::{LbError, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<T> {
    pub x: [T; 3],
    pub y: T,
    /// `max_i |x_i sum x_j - 4 lambda|`.
    pub component_residual: T,
    /// `|sum x_j^2 - 4 lambda|`.
    pub norm_residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T: nalgebra::Scalar> {
    pub fixed_point: [T; 3],
    pub jacobian: Matrix3<T>,
    /// Sorted by decreasing real part.
    pub eigenvalues: [Complex<T>; 3],
    pub verdict: Verdict,
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(LbError::Domain(format!("lambda = {lambda} must be positive and finite")))
    }
}

/// Right-hand side `x_i' = (4 lambda - x_i sum x_j) / 2`.
pub fn vector_field<T: Real>(x: [T; 3], lambda: T) -> [T; 3] {
    let sum = x[0] + x[1] + x[2];
    let four_lambda = T::lit(4.0) * lambda;
    x.map(|xi| (four_lambda - xi * sum) / T::lit(2.0))
}

/// The stationary point `(2/a, 2/a, 2/a)`, with both stationarity conditions
/// evaluated on it.
pub fn fixed_point<T: Real>(lambda: T) -> Result<FixedPoint<T>> {
    check_lambda(lambda)?;
    let a = (T::lit(3.0) / lambda).sqrt();
    let xi = T::lit(2.0) / a;
    let x = [xi; 3];
    let sum = xi + xi + xi;
    let four_lambda = T::lit(4.0) * lambda;
    let component_residual = x.iter().fold(T::zero(), |acc, &v| acc.max((v * sum - four_lambda).abs()));
    let norm_residual = (x.iter().fold(T::zero(), |acc, &v| acc + v * v) - four_lambda).abs();
    Ok(FixedPoint { x, y: T::zero(), component_residual, norm_residual })
}

/// Analytic Jacobian of [`vector_field`] at `x`:
/// `J_ij = -(delta_ij sum x + x_i) / 2`.
pub fn jacobian_at<T: Real + RealField>(x: [T; 3]) -> Matrix3<T> {
    let sum = x[0] + x[1] + x[2];
    let two = <T as Real>::lit(2.0);
    Matrix3::from_fn(|i, j| {
        let diag = if i == j { sum } else { <T as num_traits::Zero>::zero() };
        -(diag + x[i]) / two
    })
}

pub fn jacobian_eigen<T: Real + RealField>(lambda: T) -> Result<StabilityReport<T>> {
    let fp = fixed_point(lambda)?;
    let jacobian = jacobian_at(fp.x);
    let ev = jacobian.complex_eigenvalues();
    let mut eigenvalues = [ev[0], ev[1], ev[2]];
    eigenvalues.sort_by(|p, q| {
        q.re.partial_cmp(&p.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(q.im.partial_cmp(&p.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let zero = <T as num_traits::Zero>::zero();
    let max_re = eigenvalues.iter().fold(<T as num_traits::Float>::neg_infinity(), |acc, z| {
        <T as num_traits::Float>::max(acc, z.re)
    });
    let verdict = if max_re < zero {
        Verdict::Stable
    } else if max_re > zero {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    };
    Ok(StabilityReport { fixed_point: fp.x, jacobian, eigenvalues, verdict })
}

/// `(3 lambda / 2) r^2 + c1`, the printed solution of the linearized
/// `f'' = 3 lambda`. It omits the homogeneous term `c2 r`.
pub fn linearized_profile<T: Real>(lambda: T, c1: T, r: T) -> T {
    T::lit(1.5) * lambda * r * r + c1
}

/// `f''` of [`linearized_profile`], which is `3 lambda` identically.
pub fn linearized_curvature<T: Real>(lambda: T) -> T {
    T::lit(3.0) * lambda
}
