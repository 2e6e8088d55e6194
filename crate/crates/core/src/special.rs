//! Numerical kernels behind the inferential statistics: log-gamma, the
//! regularized incomplete beta function, and the Student-t and F
//! distributions with their inverses.
//!
//! Inverses are computed by bisection on the CDF over a geometrically grown
//! bracket, which is slower than Newton iteration but cannot diverge.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Failure of a numerical kernel on an argument outside its domain.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("domain error in {function}: {message}")]
pub struct DomainError {
    pub function: &'static str,
    pub message: String,
}

impl DomainError {
    pub(crate) fn new(function: &'static str, message: impl Into<String>) -> Self {
        Self {
            function,
            message: message.into(),
        }
    }
}

/// A real number on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self, DomainError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(DomainError::new(
                "Probability::new",
                format!("{value} is not in [0, 1]"),
            ))
        }
    }

    /// Clamps tiny floating-point excursions (e.g. `1 + 1e-17`) back into range.
    pub(crate) fn clamped(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Self(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = DomainError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

// Lanczos approximation with g = 7 and nine coefficients. Relative error is
// below 1e-15 for x >= 0.5; smaller arguments go through the reflection formula.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64, DomainError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(DomainError::new(
            "ln_gamma",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let x = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<Probability, DomainError> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(DomainError::new(
            "reg_inc_beta",
            format!("shape parameters must be positive, got a = {a}, b = {b}"),
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(DomainError::new(
            "reg_inc_beta",
            format!("x must lie in [0, 1], got {x}"),
        ));
    }
    Ok(Probability::clamped(inc_beta_unchecked(a, b, x)))
}

fn inc_beta_unchecked(a: f64, b: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma_unchecked(a + b) - ln_gamma_unchecked(a) - ln_gamma_unchecked(b)
        + a * x.ln()
        + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x > (a + 1.0) / (a + b + 2.0) {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    } else {
        front * beta_continued_fraction(a, b, x) / a
    }
}

/// `1 - I_x(a, b)`, evaluated without cancellation via `I_{1-x}(b, a)`.
fn inc_beta_complement(a: f64, b: f64, x: f64) -> f64 {
    inc_beta_unchecked(b, a, 1.0 - x)
}

fn check_df(function: &'static str, df: f64) -> Result<(), DomainError> {
    if df > 0.0 && df.is_finite() {
        Ok(())
    } else {
        Err(DomainError::new(
            function,
            format!("degrees of freedom must be positive and finite, got {df}"),
        ))
    }
}

fn check_open_probability(function: &'static str, p: f64) -> Result<(), DomainError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(DomainError::new(
            function,
            format!("probability must lie in (0, 1), got {p}"),
        ))
    }
}

/// Two-sided tail mass `P(|T| >= |t|)` of a Student-t variate.
fn t_two_sided_tail(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    inc_beta_unchecked(0.5 * df, 0.5, df / (df + t * t))
}

/// Student-t cumulative distribution function.
pub fn t_cdf(t: f64, df: f64) -> Result<Probability, DomainError> {
    check_df("t_cdf", df)?;
    if t.is_nan() {
        return Err(DomainError::new("t_cdf", "t is NaN"));
    }
    let half_tail = 0.5 * t_two_sided_tail(t, df);
    let cdf = if t > 0.0 { 1.0 - half_tail } else { half_tail };
    Ok(Probability::clamped(cdf))
}

/// Upper tail `P(T > t)`; more accurate than `1 - t_cdf` far in the tail.
pub fn t_sf(t: f64, df: f64) -> Result<Probability, DomainError> {
    check_df("t_sf", df)?;
    if t.is_nan() {
        return Err(DomainError::new("t_sf", "t is NaN"));
    }
    let half_tail = 0.5 * t_two_sided_tail(t, df);
    let sf = if t > 0.0 { half_tail } else { 1.0 - half_tail };
    Ok(Probability::clamped(sf))
}

/// Quantile of the Student-t distribution.
pub fn t_inv(p: f64, df: f64) -> Result<f64, DomainError> {
    check_df("t_inv", df)?;
    check_open_probability("t_inv", p)?;
    if p == 0.5 {
        return Ok(0.0);
    }
    let cdf = |t: f64| {
        let half_tail = 0.5 * t_two_sided_tail(t, df);
        if t > 0.0 {
            1.0 - half_tail
        } else {
            half_tail
        }
    };
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while cdf(lo) > p {
        lo *= 2.0;
    }
    while cdf(hi) < p {
        hi *= 2.0;
    }
    Ok(bisect(cdf, p, lo, hi))
}

/// F-distribution cumulative distribution function.
pub fn f_cdf(f: f64, d1: f64, d2: f64) -> Result<Probability, DomainError> {
    check_df("f_cdf", d1)?;
    check_df("f_cdf", d2)?;
    if f.is_nan() {
        return Err(DomainError::new("f_cdf", "f is NaN"));
    }
    if f <= 0.0 {
        return Ok(Probability::ZERO);
    }
    if f.is_infinite() {
        return Ok(Probability::ONE);
    }
    let x = d1 * f / (d1 * f + d2);
    Ok(Probability::clamped(inc_beta_unchecked(0.5 * d1, 0.5 * d2, x)))
}

/// Upper tail `P(F > f)`.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> Result<Probability, DomainError> {
    check_df("f_sf", d1)?;
    check_df("f_sf", d2)?;
    if f.is_nan() {
        return Err(DomainError::new("f_sf", "f is NaN"));
    }
    if f <= 0.0 {
        return Ok(Probability::ONE);
    }
    if f.is_infinite() {
        return Ok(Probability::ZERO);
    }
    let x = d1 * f / (d1 * f + d2);
    Ok(Probability::clamped(inc_beta_complement(0.5 * d1, 0.5 * d2, x)))
}

/// Quantile of the F distribution.
pub fn f_inv(p: f64, d1: f64, d2: f64) -> Result<f64, DomainError> {
    check_df("f_inv", d1)?;
    check_df("f_inv", d2)?;
    check_open_probability("f_inv", p)?;
    let cdf = |f: f64| {
        if f <= 0.0 {
            0.0
        } else {
            inc_beta_unchecked(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2))
        }
    };
    let mut hi = 1.0_f64;
    while cdf(hi) < p {
        hi *= 2.0;
    }
    Ok(bisect(cdf, p, 0.0, hi))
}

const BISECT_WIDTH: f64 = 4.0 * f64::EPSILON;

/// Finds `x` in `[lo, hi]` with `cdf(x) = p` for a non-decreasing `cdf`.
/// Interval width is relative once `|x| > 1`.
fn bisect(cdf: impl Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECT_WIDTH * mid.abs().max(1.0) || mid == lo || mid == hi {
            return mid;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Standard normal quantile (Acklam's rational approximation, relative
/// error about 1.2e-9). Used for the pruning confidence deviate.
pub(crate) fn normal_inv(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_inv(1.0 - p)
    }
}
