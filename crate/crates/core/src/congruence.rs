//! Radial geodesic congruences of `ds^2 = dr^2 + w(r) (-dt^2 + dphi^2 + dz^2)`.
//!
//! Timelike congruences have conserved energy `E` (`u_t = -E`) and
//! `u^r = +-sqrt(E^2 / w - 1)`; they are confined to `w <= E^2` and have
//! turning points where `w = E^2`. The expansion and its proper-time rate
//! are evaluated in the printed closed forms and compared against
//! independent routes (covariant divergence, chain rule). Null congruences
//! are described through the tortoise coordinate `r* = int dr / sqrt(w)`.

use std::cell::RefCell;

use crate::curvature::{contracted_christoffel_r, MetricJet};
use crate::model::{grid, metric_eval, MetricSample, Solution};
use crate::quadrature::AdaptiveSimpson;
use crate::roots::scan_roots;
use crate::special::{gauss_2f1, HypergeometricQuery};
use crate::{LbError, Real, Result};

/// Relative half-width of the band around `w = E^2` treated as a turning
/// point.
pub const TURNING_GUARD: f64 = 1e-10;

/// Roots of `Phi_b` quoted for comparison. Never used as inputs.
pub const CLAIMED_ROOTS: [f64; 2] = [0.377, 1.178];

/// Quoted radius `r / a` associated with the root `1.178`.
pub const CLAIMED_RADIUS_OVER_A: f64 = 0.0273;

/// Brackets used by [`phi_b_roots`].
pub const ROOT_BRACKETS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Outgoing,
    Ingoing,
}

impl Direction {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::Outgoing => T::one(),
            Direction::Ingoing => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongruenceConfig<T> {
    pub e_tilde: T,
    pub direction: Direction,
}

impl<T: Real> CongruenceConfig<T> {
    pub fn new(e_tilde: T, direction: Direction) -> Result<Self> {
        if !(e_tilde.abs() >= T::one()) || !e_tilde.is_finite() {
            return Err(LbError::Domain(format!("|E| = {} must be at least 1", e_tilde.abs())));
        }
        Ok(Self { e_tilde, direction })
    }

    pub fn e2(&self) -> T {
        self.e_tilde * self.e_tilde
    }
}

/// A quantity that is either finite or genuinely divergent (turning point,
/// pole of a closed form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> Rate<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Rate::Finite(v) => Some(v),
            Rate::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Rate::Divergent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Timelike,
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsSample<T> {
    pub r: T,
    pub theta: Rate<T>,
    pub dtheta_dtau: Rate<T>,
    pub channel: Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Interior,
    Turning,
    Forbidden,
}

fn region<T: Real>(e2: T, w: T) -> Region {
    if (e2 - w).abs() <= T::lit(TURNING_GUARD) * e2 {
        Region::Turning
    } else if w > e2 {
        Region::Forbidden
    } else {
        Region::Interior
    }
}

fn forbidden<T: Real>(r: T, w: T, e2: T) -> LbError {
    LbError::ForbiddenRegion { r: r.as_f64(), w: w.as_f64(), e2: e2.as_f64() }
}

fn admissible_sample<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<(MetricSample<T>, Region)> {
    let s = metric_eval(sol, r)?;
    match region(cfg.e2(), s.w) {
        Region::Forbidden => Err(forbidden(r, s.w, cfg.e2())),
        reg => Ok((s, reg)),
    }
}

/// True if `r` lies strictly inside the allowed region, outside the
/// turning-point band.
pub fn is_admissible<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> bool {
    matches!(admissible_sample(sol, cfg, r), Ok((_, Region::Interior)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVelocity<T> {
    /// Contravariant `(u^t, u^r, u^phi, u^z)`.
    pub components: [T; 4],
    pub turning_point: bool,
}

/// `u = (E / w, +-sqrt(E^2 / w - 1), 0, 0)`.
pub fn four_velocity<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<FourVelocity<T>> {
    let (s, reg) = admissible_sample(sol, cfg, r)?;
    let ut = cfg.e_tilde / s.w;
    let ur = match reg {
        Region::Turning => T::zero(),
        _ => cfg.direction.sign::<T>() * (cfg.e2() / s.w - T::one()).sqrt(),
    };
    Ok(FourVelocity { components: [ut, ur, T::zero(), T::zero()], turning_point: reg == Region::Turning })
}

/// `g_mn u^m u^n` on the conformal metric with factor `w`.
pub fn normalization<T: Real>(w: T, u: &[T; 4]) -> T {
    -w * u[0] * u[0] + u[1] * u[1] + w * (u[2] * u[2] + u[3] * u[3])
}

/// Radial part of the potential `Phi = E t - (+-) int sqrt(E^2 / w - 1) dr`,
/// whose gradient gives `u_m = -d_m Phi`, in the gauge `Phi(r0) = 0`.
/// A turning point at either end is handled by the substitution
/// `r = r_end + (r_other - r_end) tau^2`.
pub fn hypersurface_potential<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r0: T, r1: T) -> Result<T> {
    if r0 == r1 {
        return Ok(T::zero());
    }
    let e2 = cfg.e2();
    let failure: RefCell<Option<LbError>> = RefCell::new(None);
    let integrand = |r: T| -> T {
        match metric_eval(sol, r) {
            Ok(s) => match region(e2, s.w) {
                Region::Forbidden => {
                    failure.borrow_mut().get_or_insert(forbidden(r, s.w, e2));
                    T::zero()
                }
                Region::Turning => T::zero(),
                Region::Interior => (e2 / s.w - T::one()).sqrt(),
            },
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::zero()
            }
        }
    };
    let turning = |r: T| metric_eval(sol, r).map(|s| region(e2, s.w) == Region::Turning).unwrap_or(false);
    let quad = AdaptiveSimpson::new(T::lit(1e-12), 60);
    let substituted = |from: T, to: T| {
        let span = to - from;
        quad.integrate(|tau| integrand(from + span * tau * tau) * T::lit(2.0) * span * tau, T::zero(), T::one()).value
    };
    let value = match (turning(r0), turning(r1)) {
        (false, false) => quad.integrate(integrand, r0, r1).value,
        (true, false) => substituted(r0, r1),
        (false, true) => -substituted(r1, r0),
        (true, true) => {
            let mid = (r0 + r1) / T::lit(2.0);
            substituted(r0, mid) - substituted(r1, mid)
        }
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(-cfg.direction.sign::<T>() * value)
}

/// Expansion in the printed form `+-w^{-3/2} d/dr (w sqrt(E^2 - w))`.
pub fn expansion_timelike<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<Rate<T>> {
    let (s, reg) = admissible_sample(sol, cfg, r)?;
    if reg == Region::Turning {
        return Ok(Rate::Divergent);
    }
    let d = cfg.e2() - s.w;
    let sd = d.sqrt();
    let g = s.w_p * sd - s.w * s.w_p / (T::lit(2.0) * sd);
    Ok(Rate::Finite(cfg.direction.sign::<T>() * s.w.powf(T::lit(-1.5)) * g))
}

/// Expansion as the covariant divergence `d_r u^r + G^a_{ar} u^r`, with the
/// Christoffel trace taken from the curvature oracle.
pub fn expansion_covariant<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<Rate<T>> {
    let (s, reg) = admissible_sample(sol, cfg, r)?;
    if reg == Region::Turning {
        return Ok(Rate::Divergent);
    }
    let e2 = cfg.e2();
    let root = (e2 / s.w - T::one()).sqrt();
    let sign = cfg.direction.sign::<T>();
    let ur = sign * root;
    let ur_p = sign * (-e2 * s.w_p / (s.w * s.w)) / (T::lit(2.0) * root);
    let jet = MetricJet {
        g: [-s.w, T::one(), s.w, s.w],
        dg: [-s.w_p, T::zero(), s.w_p, s.w_p],
        ddg: [-s.w_pp, T::zero(), s.w_pp, s.w_pp],
    };
    Ok(Rate::Finite(ur_p + contracted_christoffel_r(&jet) * ur))
}

/// `dtheta/dtau = sqrt(E^2 / w - 1) d/dr [w^{-3/2} d/dr (w sqrt(E^2 - w))]`
/// with analytic `w'`, `w''`. Independent of the direction sign.
pub fn dtheta_dtau_direct<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<Rate<T>> {
    let (s, reg) = admissible_sample(sol, cfg, r)?;
    if reg == Region::Turning {
        return Ok(Rate::Divergent);
    }
    Ok(Rate::Finite(direct_rate(s.w, s.w_p, s.w_pp, cfg.e2())))
}

fn direct_rate<T: Real>(w: T, w1: T, w2: T, e2: T) -> T {
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let d = e2 - w;
    let sd = d.sqrt();
    let g = w1 * sd - w * w1 / (two * sd);
    let g1 = w2 * sd - w1 * w1 / (two * sd) - (w1 * w1 + w * w2) / (two * sd) - w * w1 * w1 / (four * d * sd);
    let big_theta_p = -T::lit(1.5) * w.powf(T::lit(-2.5)) * w1 * g + w.powf(T::lit(-1.5)) * g1;
    (d / w).sqrt() * big_theta_p
}

/// Chain-rule oracle `theta'(r) u^r` with `theta'` from a five-point
/// central difference of [`expansion_timelike`]. The step shrinks with the
/// distance `(E^2 - w) / |w'|` to the nearest turning point.
pub fn dtheta_dtau_finite_difference<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<Rate<T>> {
    let (s, reg) = admissible_sample(sol, cfg, r)?;
    if reg == Region::Turning {
        return Ok(Rate::Divergent);
    }
    let reach = if s.w_p == T::zero() { sol.a() } else { ((cfg.e2() - s.w) / s.w_p.abs()).min(sol.a()) };
    let h = T::epsilon().powf(T::lit(0.2)) * reach;
    let mut th = [T::zero(); 4];
    for (slot, k) in th.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
        match expansion_timelike(sol, cfg, r + T::lit(k) * h)? {
            Rate::Finite(v) => *slot = v,
            Rate::Divergent => return Ok(Rate::Divergent),
        }
    }
    let d = (th[0] - T::lit(8.0) * th[1] + T::lit(8.0) * th[2] - th[3]) / (T::lit(12.0) * h);
    let ur = cfg.direction.sign::<T>() * (cfg.e2() / s.w - T::one()).sqrt();
    Ok(Rate::Finite(d * ur))
}

pub fn timelike_kinematics<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<KinematicsSample<T>> {
    Ok(KinematicsSample {
        r,
        theta: expansion_timelike(sol, cfg, r)?,
        dtheta_dtau: dtheta_dtau_direct(sol, cfg, r)?,
        channel: Channel::Timelike,
    })
}

/// `Phi_b(x, y)` with `y = sqrt(x^6 - 4 b^2 x^3)`, exactly as printed.
pub fn phi_b_eval<T: Real>(x: T, b: T) -> Result<T> {
    let (x2, x3) = (x * x, x * x * x);
    let b2 = b * b;
    let y2 = x3 * x3 - T::lit(4.0) * b2 * x3;
    if y2 < T::zero() {
        return Err(LbError::Domain(format!("y^2 = x^6 - 4 b^2 x^3 = {y2} < 0 at x = {x}, b = {b}")));
    }
    let y = y2.sqrt();
    let den = T::lit(3.0) * (x3 + y);
    if den == T::zero() {
        return Err(LbError::Pole(format!("x^3 + y = 0 at x = {x}, b = {b}")));
    }
    let l = T::lit;
    let num = (l(27.0) * x2 - l(45.0) * x + l(20.0)) * y - l(36.0) * b2 * x2 - l(46.0) * x2 * x2 + l(27.0) * x2 * x3
        + l(64.0) * b2 * x
        + l(20.0) * x3
        - l(32.0) * b2;
    Ok(num / den)
}

/// `Phi_0(x) = (54 x^2 - 91 x + 40) / 6`, the `b = 0` reduction.
pub fn phi_b_reduced<T: Real>(x: T) -> T {
    (T::lit(54.0) * x * x - T::lit(91.0) * x + T::lit(40.0)) / T::lit(6.0)
}

/// Discriminant of `54 x^2 - 91 x + 40`.
pub fn reduced_discriminant() -> i64 {
    91 * 91 - 4 * 54 * 40
}

/// Lower end `cbrt(4 b^2)` of the printed `x` domain.
pub fn x_domain_lower<T: Real>(b: T) -> T {
    (T::lit(4.0) * b * b).cbrt()
}

/// Closed form `(lambda / 2) Phi_b / (x (1 - x))` next to the direct
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedRate<T> {
    pub x: T,
    pub b: T,
    pub printed: Rate<T>,
    pub direct: Rate<T>,
    /// `printed - direct` when both are finite.
    pub difference: Option<T>,
}

pub fn dtheta_dtau_printed<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<PrintedRate<T>> {
    let direct = dtheta_dtau_direct(sol, cfg, r)?;
    let s = metric_eval(sol, r)?;
    let x = s.w / cfg.e2();
    let b = (sol.params.xi / cfg.e_tilde).abs();
    let one_minus = T::one() - x;
    let printed = if one_minus.abs() <= T::lit(TURNING_GUARD) {
        Rate::Divergent
    } else {
        Rate::Finite(sol.lambda() / T::lit(2.0) * phi_b_eval(x, b)? / (x * one_minus))
    };
    let difference = match (printed, direct) {
        (Rate::Finite(p), Rate::Finite(d)) => Some(p - d),
        _ => None,
    };
    Ok(PrintedRate { x, b, printed, direct, difference })
}

/// Sign structure of `Phi_b` on the open interval `(cbrt(4 b^2), 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMapRow<T> {
    pub b: T,
    pub points: usize,
    pub negative: usize,
    /// Cells with `Phi_b >= 0`, as `(x, value)`.
    pub nonnegative: Vec<(T, T)>,
    pub max: T,
    pub min: T,
}

pub fn phi_b_sign_map<T: Real>(b: T, points: usize) -> Result<SignMapRow<T>> {
    let lo = x_domain_lower(b);
    let n1 = T::from_usize(points + 1).unwrap();
    let mut row = SignMapRow { b, points, negative: 0, nonnegative: Vec::new(), max: T::neg_infinity(), min: T::infinity() };
    for j in 1..=points {
        let x = lo + (T::one() - lo) * T::from_usize(j).unwrap() / n1;
        let v = phi_b_eval(x, b)?;
        row.max = row.max.max(v);
        row.min = row.min.min(v);
        if v < T::zero() {
            row.negative += 1;
        } else {
            row.nonnegative.push((x, v));
        }
    }
    Ok(row)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedQuadratic<T> {
    pub discriminant: i64,
    pub real_roots: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport<T> {
    pub b: T,
    pub interior: Vec<T>,
    pub boundary: Vec<T>,
    /// Present for `b = 0` only.
    pub reduced: Option<ReducedQuadratic<T>>,
}

/// Roots of `Phi_b` on `[cbrt(4 b^2), 1]` by bracketing and bisection;
/// zeros at the interval ends are reported separately.
pub fn phi_b_roots<T: Real>(b: T) -> Result<RootReport<T>> {
    if !(b >= T::zero() && b <= T::lit(0.5)) {
        return Err(LbError::Domain(format!("b = {b} outside [0, 1/2]")));
    }
    let lo = x_domain_lower(b);
    let hi = T::one();
    let zero_tol = T::lit(1e-12);
    let mut boundary = Vec::new();
    for end in [lo, hi] {
        let at_end = phi_b_eval(end, b).is_ok_and(|v| v.abs() <= zero_tol);
        if at_end && !boundary.contains(&end) {
            boundary.push(end);
        }
    }
    let interior = if lo < hi {
        scan_roots(|x| phi_b_eval(x, b).unwrap_or(T::nan()), lo, hi, ROOT_BRACKETS, T::epsilon() * T::lit(4.0))
            .into_iter()
            .filter(|r| !boundary.iter().any(|e| (*e - *r).abs() <= T::epsilon() * T::lit(16.0)))
            .collect()
    } else {
        Vec::new()
    };
    let reduced = (b == T::zero()).then(|| {
        let disc = reduced_discriminant();
        let real_roots = if disc < 0 {
            Vec::new()
        } else {
            let sd = T::from_i64(disc).unwrap().sqrt();
            vec![(T::lit(91.0) - sd) / T::lit(108.0), (T::lit(91.0) + sd) / T::lit(108.0)]
        };
        ReducedQuadratic { discriminant: disc, real_roots }
    });
    Ok(RootReport { b, interior, boundary, reduced })
}

/// Two readings of a quoted root value `X`: `e^{6r/a} = X` and `w(r) = X`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusCandidates<T> {
    pub exp_channel: T,
    /// Every solution of `w(r) = X` inside the scanned window; empty when
    /// there is none.
    pub w_channel: Vec<T>,
}

pub fn radius_from_root<T: Real>(sol: &Solution<T>, x: T, window: (T, T)) -> Result<RadiusCandidates<T>> {
    if !(x > T::zero()) {
        return Err(LbError::Domain(format!("root value {x} must be positive")));
    }
    let exp_channel = sol.a() / T::lit(6.0) * x.ln();
    let w_channel = scan_roots(
        |r| metric_eval(sol, r).map(|s| s.w - x).unwrap_or(T::nan()),
        window.0,
        window.1,
        ROOT_BRACKETS,
        T::epsilon() * T::lit(8.0) * sol.a(),
    );
    Ok(RadiusCandidates { exp_channel, w_channel })
}

/// Tortoise coordinate from both routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TortoiseEval<T> {
    /// `a e^{r/a} F(1/6, 1/3; 7/6; -xi^2 e^{6r/a})`.
    pub series: T,
    /// `a int_0^1 (1 + xi^2 s^6)^{-1/3} ds + int_0^r w^{-1/2} dr`.
    pub quadrature: T,
}

pub fn tortoise_series<T: Real>(sol: &Solution<T>, r: T) -> Result<T> {
    let a = sol.a();
    let e = (r / a).exp();
    let z = -sol.raw.xi_squared() * e.powi(6);
    if !z.is_finite() {
        return Err(LbError::Range { r: r.as_f64(), bound: sol.r_bound().as_f64() });
    }
    let f = gauss_2f1(HypergeometricQuery::new(T::lit(1.0 / 6.0), T::lit(1.0 / 3.0), T::lit(7.0 / 6.0), z))?;
    Ok(a * e * f)
}

pub fn tortoise_quadrature<T: Real>(sol: &Solution<T>, r: T) -> Result<T> {
    let a = sol.a();
    let xi2 = sol.raw.xi_squared();
    let quad = AdaptiveSimpson::new(T::lit(1e-13), 60);
    let third = T::lit(1.0 / 3.0);
    let at_origin = a * quad.integrate(|s| (T::one() + xi2 * s.powi(6)).powf(-third), T::zero(), T::one()).value;
    let failure: RefCell<Option<LbError>> = RefCell::new(None);
    let tail = quad
        .integrate(
            |x| match metric_eval(sol, x) {
                Ok(s) => s.w.powf(T::lit(-0.5)),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    T::zero()
                }
            },
            T::zero(),
            r,
        )
        .value;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(at_origin + tail),
    }
}

pub fn tortoise<T: Real>(sol: &Solution<T>, r: T) -> Result<TortoiseEval<T>> {
    Ok(TortoiseEval { series: tortoise_series(sol, r)?, quadrature: tortoise_quadrature(sol, r)? })
}

/// `dr*/dr * sqrt(w)` with `dr*/dr` from a central difference of the series
/// form; equals one on an exact tortoise coordinate.
pub fn tortoise_derivative_identity<T: Real>(sol: &Solution<T>, r: T) -> Result<T> {
    let h = T::epsilon().cbrt() * sol.a();
    let d = (tortoise_series(sol, r + h)? - tortoise_series(sol, r - h)?) / (T::lit(2.0) * h);
    Ok(d * metric_eval(sol, r)?.w.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullRate<T> {
    /// `(1/w) sqrt(E^2 - w) B`.
    pub rate: T,
    /// `B = w'' - (3/2) w'^2 / w`.
    pub bracket: T,
}

pub fn null_rate_from_w<T: Real>(w: T, w_p: T, w_pp: T, e2: T) -> NullRate<T> {
    let bracket = w_pp - T::lit(1.5) * w_p * w_p / w;
    let rate = (e2 - w).max(T::zero()).sqrt() / w * bracket;
    NullRate { rate, bracket }
}

pub fn null_rate<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<NullRate<T>> {
    let (s, _) = admissible_sample(sol, cfg, r)?;
    Ok(null_rate_from_w(s.w, s.w_p, s.w_pp, cfg.e2()))
}

/// Expansion of the affinely parametrized radial null congruence
/// `k_m = -d_m (t -+ r*)`: `theta = +-(3/2) w' / w^{3/2}`.
pub fn null_expansion<T: Real>(sol: &Solution<T>, direction: Direction, r: T) -> Result<T> {
    let s = metric_eval(sol, r)?;
    Ok(direction.sign::<T>() * T::lit(1.5) * s.w_p / s.w.powf(T::lit(1.5)))
}

pub fn null_kinematics<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, r: T) -> Result<KinematicsSample<T>> {
    let rate = null_rate(sol, cfg, r)?;
    Ok(KinematicsSample {
        r,
        theta: Rate::Finite(null_expansion(sol, cfg.direction, r)?),
        dtheta_dtau: Rate::Finite(rate.rate),
        channel: Channel::Null,
    })
}

/// Sign census of the null rate over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSignScan<T> {
    pub negative: usize,
    /// Admissible points where the rate is `>= 0`, as `(r, rate)`.
    pub violations: Vec<(T, T)>,
    /// Points in the forbidden region or the turning-point band.
    pub excluded: usize,
}

pub fn null_sign_scan<T: Real>(sol: &Solution<T>, cfg: &CongruenceConfig<T>, lo: T, hi: T, samples: usize) -> Result<NullSignScan<T>> {
    let mut scan = NullSignScan { negative: 0, violations: Vec::new(), excluded: 0 };
    for r in grid(lo, hi, samples) {
        let s = metric_eval(sol, r)?;
        if region(cfg.e2(), s.w) != Region::Interior {
            scan.excluded += 1;
            continue;
        }
        let rate = null_rate_from_w(s.w, s.w_p, s.w_pp, cfg.e2()).rate;
        if rate < T::zero() {
            scan.negative += 1;
        } else {
            scan.violations.push((r, rate));
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params_from_xi;

    fn cfg(e: f64) -> CongruenceConfig<f64> {
        CongruenceConfig::new(e, Direction::Outgoing).unwrap()
    }

    #[test]
    fn energy_bound() {
        assert!(CongruenceConfig::new(0.5f64, Direction::Outgoing).is_err());
        assert!(CongruenceConfig::new(-1.0f64, Direction::Ingoing).is_ok());
    }

    #[test]
    fn four_velocity_cases() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let u = four_velocity(&s, &cfg(1.0), 0.0).unwrap();
        assert!(u.turning_point);
        assert_eq!(u.components, [1.0, 0.0, 0.0, 0.0]);

        let u = four_velocity(&s, &cfg(2.0), 0.0).unwrap();
        assert!((u.components[0] - 2.0).abs() < 1e-15);
        assert!((u.components[1] - 3f64.sqrt()).abs() < 1e-15);
        assert!((normalization(1.0, &u.components) + 1.0).abs() < 1e-12);
        let ui = four_velocity(&s, &CongruenceConfig::new(2.0, Direction::Ingoing).unwrap(), 0.0).unwrap();
        assert_eq!(ui.components[1], -u.components[1]);

        // w(-0.2) = e^{0.4} > 1
        assert!(matches!(four_velocity(&s, &cfg(1.0), -0.2), Err(LbError::ForbiddenRegion { .. })));
    }

    #[test]
    fn expansion_spot_value() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let th = expansion_timelike(&s, &cfg(2.0), 0.0).unwrap().value().unwrap();
        assert!((th + 5.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn expansion_vanishes_at_minimum_of_w() {
        let s = params_from_xi(3.0f64, 0.5).unwrap();
        let r_min = -s.a() / 3.0 * 0.5f64.ln();
        let th = expansion_timelike(&s, &cfg(2.0), r_min).unwrap().value().unwrap();
        assert!(th.abs() < 1e-14);
    }

    #[test]
    fn covariant_divergence_matches_printed_form() {
        for (xi, e, r) in [(0.0, 2.0, 0.0), (1.0, 3.0, 0.4), (0.3, 1.5, -0.2), (2.0, 5.0, -0.7)] {
            let s = params_from_xi(3.0f64, xi).unwrap();
            let c = CongruenceConfig::new(e, Direction::Ingoing).unwrap();
            let p = expansion_timelike(&s, &c, r).unwrap().value().unwrap();
            let q = expansion_covariant(&s, &c, r).unwrap().value().unwrap();
            assert!((p - q).abs() < 1e-12 * p.abs().max(1.0), "{p} {q}");
        }
    }

    #[test]
    fn turning_point_is_flagged() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        assert!(expansion_timelike(&s, &cfg(1.0), 0.0).unwrap().is_divergent());
        assert!(dtheta_dtau_direct(&s, &cfg(1.0), 0.0).unwrap().is_divergent());
    }

    #[test]
    fn vacuum_rate_closed_form() {
        // xi = 0: dtheta/dtau = -E^2 (2 E^2 - w) / (a^2 w (E^2 - w))
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let v = dtheta_dtau_direct(&s, &cfg(2.0), 0.0).unwrap().value().unwrap();
        assert!((v + 28.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn phi_b_spot_values() {
        assert!((phi_b_eval(1.0f64, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(phi_b_eval(1.0f64, 0.5).unwrap(), 0.0);
        assert!(matches!(phi_b_eval(0.5f64, 0.4), Err(LbError::Domain(_))));
        assert!(matches!(phi_b_eval(0.0f64, 0.0), Err(LbError::Pole(_))));
        assert_eq!(reduced_discriminant(), -359);
    }

    #[test]
    fn roots_for_vacuum_and_boundary() {
        let rep = phi_b_roots(0.0f64).unwrap();
        assert!(rep.interior.is_empty());
        let red = rep.reduced.unwrap();
        assert_eq!(red.discriminant, -359);
        assert!(red.real_roots.is_empty());

        let rep = phi_b_roots(0.5f64).unwrap();
        assert_eq!(rep.boundary, vec![1.0]);
        assert!(rep.interior.is_empty());
        assert!(rep.reduced.is_none());
        assert!(phi_b_roots(0.6f64).is_err());
    }

    #[test]
    fn radius_channels() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let c = radius_from_root(&s, 1.178, (-2.0, 2.0)).unwrap();
        assert!((c.exp_channel - 1.178f64.ln() / 6.0).abs() < 1e-15);
        assert!((c.exp_channel - 0.0273).abs() < 5e-4);
        let c = radius_from_root(&s, 1.0, (-2.0, 2.0)).unwrap();
        assert_eq!(c.exp_channel, 0.0);
        let c = radius_from_root(&s, 0.377, (-2.0, 2.0)).unwrap();
        assert_eq!(c.w_channel.len(), 1);
        assert!((c.w_channel[0] + 0.377f64.ln() / 2.0).abs() < 1e-12);
        let c = radius_from_root(&s, 1e6, (-2.0, 2.0)).unwrap();
        assert!(c.w_channel.is_empty());
        assert!(radius_from_root(&s, 0.0, (-2.0, 2.0)).is_err());
    }

    #[test]
    fn tortoise_vacuum_is_exponential() {
        let s = params_from_xi(0.75f64, 0.0).unwrap();
        for r in [-1.0, 0.0, 1.3] {
            let t = tortoise(&s, r).unwrap();
            let exact = s.a() * (r / s.a()).exp();
            assert!((t.series - exact).abs() < 1e-15 * exact.max(1.0));
            assert!((t.quadrature - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn null_rate_constant_w() {
        let nr = null_rate_from_w(1.3f64, 0.0, 0.0, 4.0);
        assert_eq!(nr.rate, 0.0);
        assert_eq!(nr.bracket, 0.0);
    }

    #[test]
    fn null_rate_vacuum_closed_form() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let c = cfg(2.0);
        for r in [-0.5, 0.0, 1.0] {
            let w = metric_eval(&s, r).unwrap().w;
            let nr = null_rate(&s, &c, r).unwrap();
            assert!((nr.rate + 2.0 / (s.a() * s.a()) * (4.0 - w).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_basics() {
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let c = cfg(2.0);
        assert_eq!(hypersurface_potential(&s, &c, 0.3, 0.3).unwrap(), 0.0);
        let fwd = hypersurface_potential(&s, &c, 0.0, 0.5).unwrap();
        let back = hypersurface_potential(&s, &c, 0.5, 0.0).unwrap();
        assert!((fwd + back).abs() < 1e-13);
        assert!(fwd < 0.0);
        // w(-1) = e^2 > 4 for E = 2
        assert!(matches!(hypersurface_potential(&s, &c, -1.0, 0.0), Err(LbError::ForbiddenRegion { .. })));
    }

    #[test]
    fn potential_from_turning_point() {
        // E = 1, xi = 0: turning point at r = 0, integrand sqrt(e^{2r} - 1)
        let s = params_from_xi(3.0f64, 0.0).unwrap();
        let c = cfg(1.0);
        let v = hypersurface_potential(&s, &c, 0.0, 1.0).unwrap();
        // int_0^1 sqrt(e^{2r} - 1) dr = sqrt(e^2 - 1) - atan(sqrt(e^2 - 1))
        let q = (1f64.exp().powi(2) - 1.0).sqrt();
        assert!((v + (q - q.atan())).abs() < 1e-10, "{v}");
    }
}
