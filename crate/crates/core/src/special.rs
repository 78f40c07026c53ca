//! Gauss hypergeometric function on the non-positive real axis.
//!
//! `F(a, b; c; z)` is summed from its defining power series when
//! `|z| <= 1/2`. For `z < -1/2` a Pfaff transformation maps the argument to
//! `x = z / (z - 1)` in `(1/3, 1)`; close to `x = 1` the series in `x` is
//! replaced by the standard `1 - x` connection formula, which keeps
//! tortoise-coordinate evaluation cheap even where `|z|` is very large.

use num_traits::Num;

use crate::{LbError, Real, Result};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 100_000;

/// Above this mapped argument the connection formula takes over.
const CONNECTION_THRESHOLD: f64 = 0.9;

/// `c - a - b` within this distance of an integer is treated as a
/// logarithmic case and the connection formula is not used.
const INTEGER_GUARD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricQuery<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub z: T,
}

impl<T: Real> HypergeometricQuery<T> {
    pub fn new(a: T, b: T, c: T, z: T) -> Self {
        Self { a, b, c, z }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.z.is_finite()) {
            return Err(LbError::Domain("hypergeometric parameters must be finite".into()));
        }
        if is_non_positive_integer(self.c) {
            return Err(LbError::Domain(format!("c = {} is a non-positive integer", self.c)));
        }
        if self.z > T::zero() {
            return Err(LbError::Domain(format!("z = {} > 0 is outside the supported range z <= 0", self.z)));
        }
        Ok(())
    }
}

fn is_non_positive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

/// Rising factorial `(a)_k = a (a + 1) ... (a + k - 1)`, with `(a)_0 = 1`.
///
/// Works for any numeric type with an exact embedding of the small
/// integers, so rationals give exact values.
pub fn pochhammer<T: Num + Clone>(a: T, k: usize) -> T {
    let mut acc = T::one();
    let mut term = a;
    for _ in 0..k {
        acc = acc * term.clone();
        term = term + T::one();
    }
    acc
}

/// Evaluates `F(a, b; c; z)` for `z <= 0`.
pub fn gauss_2f1<T: Real>(q: HypergeometricQuery<T>) -> Result<T> {
    q.validate()?;
    if q.z.abs() <= T::lit(0.5) {
        series(q.a, q.b, q.c, q.z)
    } else {
        pfaff_a(q)
    }
}

/// Direct power series, terms generated by their ratio. Valid for `|z| < 1`.
pub fn series<T: Real>(a: T, b: T, c: T, z: T) -> Result<T> {
    if is_non_positive_integer(c) {
        return Err(LbError::Domain(format!("c = {c} is a non-positive integer")));
    }
    if z.abs() >= T::one() {
        return Err(LbError::SpecialFunction(format!("series argument |z| = {} >= 1", z.abs())));
    }
    let eps = T::epsilon();
    let mut term = T::one();
    let mut sum = T::one();
    let mut small_run = 0;
    for k in 0..MAX_TERMS {
        let kf = T::from_usize(k).unwrap();
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + T::one())) * z;
        sum = sum + term;
        if term == T::zero() {
            return Ok(sum);
        }
        if term.abs() <= eps * sum.abs() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(LbError::SpecialFunction(format!(
        "series for F({a}, {b}; {c}; {z}) did not converge within {MAX_TERMS} terms"
    )))
}

/// `F(a, b; c; z) = (1 - z)^(-a) F(a, c - b; c; z / (z - 1))`.
pub fn pfaff_a<T: Real>(q: HypergeometricQuery<T>) -> Result<T> {
    q.validate()?;
    let one_minus_z = T::one() - q.z;
    let x = q.z / (q.z - T::one());
    Ok(one_minus_z.powf(-q.a) * unit_interval(q.a, q.c - q.b, q.c, x)?)
}

/// `F(a, b; c; z) = (1 - z)^(-b) F(c - a, b; c; z / (z - 1))`, the second
/// Pfaff route, used as an independent cross-check of [`pfaff_a`].
pub fn pfaff_b<T: Real>(q: HypergeometricQuery<T>) -> Result<T> {
    q.validate()?;
    let one_minus_z = T::one() - q.z;
    let x = q.z / (q.z - T::one());
    Ok(one_minus_z.powf(-q.b) * unit_interval(q.c - q.a, q.b, q.c, x)?)
}

/// `F(a, b; c; x)` for `0 <= x < 1`.
fn unit_interval<T: Real>(a: T, b: T, c: T, x: T) -> Result<T> {
    let s = c - a - b;
    let near_integer = (s - s.round()).abs() < T::lit(INTEGER_GUARD);
    if x <= T::lit(CONNECTION_THRESHOLD) || near_integer {
        return series(a, b, c, x);
    }
    // F(a,b;c;x) = G(c)G(s)/(G(c-a)G(c-b)) F(a,b;1-s;1-x)
    //            + (1-x)^s G(c)G(-s)/(G(a)G(b)) F(c-a,c-b;1+s;1-x)
    let y = T::one() - x;
    let g_c = gamma(c);
    let first = g_c * gamma(s) * rgamma(c - a) * rgamma(c - b);
    let second = g_c * gamma(-s) * rgamma(a) * rgamma(b);
    let mut value = T::zero();
    if first != T::zero() {
        value = value + first * series(a, b, T::one() - s, y)?;
    }
    if second != T::zero() {
        value = value + second * y.powf(s) * series(c - a, c - b, T::one() + s, y)?;
    }
    if !value.is_finite() {
        return Err(LbError::SpecialFunction(format!("connection formula overflow for F({a}, {b}; {c}; {x})")));
    }
    Ok(value)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos approximation with reflection below 1/2).
/// Poles at the non-positive integers return infinity.
pub fn gamma<T: Real>(x: T) -> T {
    if is_non_positive_integer(x) {
        return T::infinity();
    }
    if x < T::lit(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize(i).unwrap());
    }
    let t = x + T::lit(LANCZOS_G) + T::lit(0.5);
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(x + T::lit(0.5)) * (-t).exp() * acc
}

/// `1 / Gamma(x)`, exactly zero at the poles.
pub fn rgamma<T: Real>(x: T) -> T {
    if is_non_positive_integer(x) {
        T::zero()
    } else {
        T::one() / gamma(x)
    }
}
