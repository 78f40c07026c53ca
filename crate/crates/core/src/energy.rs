//! Orthonormal-frame stress decomposition and energy-condition margins.
//!
//! The effective stress tensor is the Einstein tensor `G_mn = R_mn - R g_mn / 2`
//! built from the curvature oracle, so the cosmological term is part of the
//! source. For this family the trace-reversed field equations give
//! `rho + p_r = phi'^2`, `rho + p_phi = rho + p_z = 0` and
//! `rho + p_r + p_phi + p_z = -2 lambda`.

use crate::curvature::ricci_diagonal;
use crate::model::{grid, metric_eval, Solution};
use crate::roots::bisect;
use crate::{LbError, Real, Result};

/// A condition holds where all of its margins are at least `-MARGIN_TOL`.
pub const MARGIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameStress<T> {
    pub rho: T,
    pub p_r: T,
    pub p_phi: T,
    pub p_z: T,
}

impl<T: Real> FrameStress<T> {
    pub fn pressures(&self) -> [T; 3] {
        [self.p_r, self.p_phi, self.p_z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionMargins<T> {
    /// `rho + p_i` for `i = r, phi, z`.
    pub nec: [T; 3],
    /// `rho`.
    pub wec_extra: T,
    /// `rho + sum p_i`.
    pub sec: T,
    /// `rho - |p_i|`.
    pub dec: [T; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Null,
    Weak,
    Strong,
    Dominant,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::Null, Condition::Weak, Condition::Strong, Condition::Dominant];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Null => "NEC",
            Condition::Weak => "WEC",
            Condition::Strong => "SEC",
            Condition::Dominant => "DEC",
        }
    }
}

fn min3<T: Real>(v: [T; 3]) -> T {
    v[0].min(v[1]).min(v[2])
}

impl<T: Real> ConditionMargins<T> {
    /// The smallest margin the condition depends on. WEC and SEC include
    /// the NEC margins.
    pub fn min_margin(&self, c: Condition) -> T {
        let nec = min3(self.nec);
        match c {
            Condition::Null => nec,
            Condition::Weak => nec.min(self.wec_extra),
            Condition::Strong => nec.min(self.sec),
            Condition::Dominant => min3(self.dec),
        }
    }

    pub fn holds(&self, c: Condition) -> bool {
        self.min_margin(c) >= -T::lit(MARGIN_TOL)
    }
}

/// `rho = G_tt / |g_tt|` and `p_i = G_ii / g_ii`.
pub fn stress_decompose<T: Real>(sol: &Solution<T>, r: T) -> Result<FrameStress<T>> {
    let s = metric_eval(sol, r)?;
    let ric = ricci_diagonal(&s);
    let g = s.metric_diagonal();
    let scalar = (0..4).fold(T::zero(), |acc, i| acc + ric[i] / g[i]);
    let half = T::lit(0.5);
    let frame = |i: usize| (ric[i] - half * scalar * g[i]) / g[i].abs();
    Ok(FrameStress { rho: frame(0), p_r: frame(1), p_phi: frame(2), p_z: frame(3) })
}

pub fn condition_margins<T: Real>(st: &FrameStress<T>) -> ConditionMargins<T> {
    let p = st.pressures();
    ConditionMargins {
        nec: p.map(|pi| st.rho + pi),
        wec_extra: st.rho,
        sec: st.rho + p[0] + p[1] + p[2],
        dec: p.map(|pi| st.rho - pi.abs()),
    }
}

/// Where one condition holds inside the scanned window.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRegions<T> {
    pub condition: Condition,
    /// Closed sub-intervals on which the condition holds.
    pub intervals: Vec<(T, T)>,
    pub min_margin: T,
    pub max_margin: T,
}

impl<T: Real> ConditionRegions<T> {
    pub fn holds_everywhere(&self) -> bool {
        self.min_margin >= -T::lit(MARGIN_TOL)
    }
}

/// Scans `[r0, r1]` on `samples` points and returns, per condition, the
/// intervals where it holds. Interval ends are refined by bisection on the
/// condition's minimum margin.
pub fn region_scan<T: Real>(sol: &Solution<T>, r0: T, r1: T, samples: usize) -> Result<Vec<ConditionRegions<T>>> {
    if samples < 2 && r0 != r1 {
        return Err(LbError::Resolution(format!("region scan needs at least 2 samples, got {samples}")));
    }
    let rs = grid(r0, r1, samples);
    let margins: Vec<ConditionMargins<T>> =
        rs.iter().map(|&r| stress_decompose(sol, r).map(|s| condition_margins(&s))).collect::<Result<_>>()?;
    let tol = T::lit(MARGIN_TOL);
    let x_tol = T::epsilon() * T::lit(16.0) * sol.a();

    let mut out = Vec::with_capacity(4);
    for c in Condition::ALL {
        let m: Vec<T> = margins.iter().map(|mg| mg.min_margin(c)).collect();
        let shifted = |r: T| {
            stress_decompose(sol, r).map(|s| condition_margins(&s).min_margin(c) + tol).unwrap_or(T::nan())
        };
        let mut intervals = Vec::new();
        let mut start: Option<T> = None;
        for i in 0..rs.len() {
            let ok = m[i] >= -tol;
            match (ok, start) {
                (true, None) => {
                    start = Some(if i == 0 { rs[0] } else { bisect(shifted, rs[i - 1], rs[i], x_tol).unwrap_or(rs[i]) });
                }
                (false, Some(s0)) => {
                    let end = bisect(shifted, rs[i - 1], rs[i], x_tol).unwrap_or(rs[i - 1]);
                    intervals.push((s0, end));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s0) = start {
            intervals.push((s0, *rs.last().unwrap()));
        }
        let min_margin = m.iter().fold(T::infinity(), |acc, &x| acc.min(x));
        let max_margin = m.iter().fold(T::neg_infinity(), |acc, &x| acc.max(x));
        out.push(ConditionRegions { condition: c, intervals, min_margin, max_margin });
    }
    Ok(out)
}
