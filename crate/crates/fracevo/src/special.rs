//! Gamma and the two-parameter Mittag-Leffler function.
//!
//! E_{a,b}(z) = sum_k z^k / Gamma(a k + b) is evaluated on the real line
//! with the negative axis as the primary regime (0 < a <= 1, b >= a,
//! z <= 0). Four coordinated paths cover it:
//!
//! 1. guarded power series (small |z|; the guard bounds cancellation plus
//!    the rounding of the Gamma argument a*k+b, which dominates near the
//!    series peak),
//! 2. the b-lowering recurrence E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a))/z
//!    for b > 1 (removes the b > 1 cases the asymptotics handle poorly),
//! 3. the algebraic asymptotic series with an explicit truncation-plus-
//!    Stokes-branch error estimate, accepted only when that estimate is
//!    below 5e-11 relative,
//! 4. otherwise the integral representation: E_{a,b}(-x) equals
//!    t^{1-b} L^{-1}[s^{a-b}/(s^a+1)](t) at t = x^{1/a}, discretized on the
//!    fixed Talbot contour.
//!
//! The only spot in the primary regime where the 1e-10 target is not met is
//! b within 0.05 of a with a >= 0.9 and 5 < -z < 45 (worst observed
//! 5.1e-10, a near-cancellation of a value ~3e-5); evaluations there carry
//! an accuracy warning.

use crate::error::{Error, Result};
use crate::laplace;
use num_complex::Complex64;

const EPS: f64 = 2.2e-16;

// Lanczos, g = 607/128, 15 coefficients (Godfrey). Worst relative error of
// the plain product form is 1.15e-15 on [1e-3, 170].
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_87e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_49e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_43e-4,
    -0.261_908_384_015_814_08e-4,
    0.368_991_826_595_316_27e-5,
];

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Largest x with Gamma(x) finite in f64.
const GAMMA_OVERFLOW: f64 = 171.624;

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x - 1.0 + k as f64);
    }
    a
}

// Gamma for x >= 0.5, no overflow guard. The split power t^{(x-0.5)/2}
// keeps intermediates below ~1e154 so arguments near 170 do not overflow
// mid-formula.
fn gamma_pos(x: f64) -> f64 {
    let t = x + LANCZOS_G - 0.5;
    let half = t.powf(0.5 * (x - 0.5));
    SQRT_TWO_PI * half * (-t).exp() * half * lanczos_sum(x)
}

fn ln_gamma_pos(x: f64) -> f64 {
    let t = x + LANCZOS_G - 0.5;
    SQRT_TWO_PI.ln() + (x - 0.5) * t.ln() - t + lanczos_sum(x).ln()
}

/// Gamma function. Relative error <= 1e-13 on [1e-3, 170]; negative
/// non-integer arguments via reflection.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Parameter(format!("gamma argument must be finite, got {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    if x >= 0.5 {
        if x > GAMMA_OVERFLOW {
            return Err(Error::Overflow(format!("gamma({x}) exceeds f64 range")));
        }
        return Ok(gamma_pos(x));
    }
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    let s = sin_pi(x);
    if 1.0 - x > GAMMA_OVERFLOW {
        // Gamma(1-x) overflows, so Gamma(x) underflows; report it as such.
        return Err(Error::Overflow(format!("gamma({x}) underflows f64 range")));
    }
    Ok(std::f64::consts::PI / (s * gamma_pos(1.0 - x)))
}

// sin(pi x) with the argument reduced first, so large x keep full accuracy.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    (std::f64::consts::PI * r).sin()
}

/// 1/Gamma as an entire function: zero at the poles and for arguments past
/// the overflow edge.
pub fn recip_gamma(x: f64) -> f64 {
    if x > GAMMA_OVERFLOW {
        return 0.0;
    }
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        return 1.0 / gamma_pos(x);
    }
    let s = sin_pi(x);
    if 1.0 - x > GAMMA_OVERFLOW {
        // |1/Gamma| grows factorially toward -inf; keep the formula total
        // via logs (signed infinity once past the f64 range).
        let ln = s.abs().ln() + ln_gamma_pos(1.0 - x) - std::f64::consts::PI.ln();
        return if ln > 709.0 { s.signum() * f64::INFINITY } else { s.signum() * ln.exp() };
    }
    s * gamma_pos(1.0 - x) / std::f64::consts::PI
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma_pos(x)
}

/// Parameters of E_{alpha,beta}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Parameter(format!(
                "Mittag-Leffler needs alpha > 0 and finite beta, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(MLParams { alpha, beta })
    }
}

/// Evaluation result; `warning` is set when the parameters or argument fall
/// outside the regime where the 1e-10 relative-error target was validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEval {
    pub value: f64,
    pub warning: Option<&'static str>,
}

const WARN_REGIME: &str =
    "outside validated accuracy regime (0 < alpha <= 1, beta >= alpha, -1e6 <= z <= 0); \
     relative error may exceed 1e-10";
const WARN_CORNER: &str =
    "near-degenerate corner beta ~ alpha with alpha >= 0.9 and 5 < -z < 45; \
     relative error up to ~5e-10";

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.
pub fn mittag_leffler(p: MLParams, z: f64) -> Result<MlEval> {
    if !(p.alpha > 0.0) || !p.alpha.is_finite() || !p.beta.is_finite() {
        return Err(Error::Parameter(format!(
            "Mittag-Leffler needs alpha > 0 and finite beta, got alpha={}, beta={}",
            p.alpha, p.beta
        )));
    }
    if !z.is_finite() {
        return Err(Error::Parameter(format!("Mittag-Leffler argument must be finite, got {z}")));
    }
    let (alpha, beta) = (p.alpha, p.beta);
    if z == 0.0 {
        return Ok(MlEval { value: recip_gamma(beta), warning: None });
    }
    if z < 0.0 {
        let x = -z;
        let primary = alpha <= 1.0 && beta >= alpha && x <= 1e6;
        let corner = alpha >= 0.9 && (beta - alpha).abs() < 0.05 && x > 5.0 && x < 45.0;
        if primary && alpha == 1.0 && beta >= 1.0 {
            return Ok(MlEval { value: ml_alpha1(beta, x), warning: None });
        }
        if primary {
            let value = ml_neg(alpha, beta, x);
            return Ok(MlEval {
                value,
                warning: if corner { Some(WARN_CORNER) } else { None },
            });
        }
        // Best effort outside the primary regime: the series where it is
        // trustworthy, the asymptotic expansion where its own error
        // estimate is good, otherwise (a <= 1 only) the contour route.
        if x < 5.0 && ml_series_feasible(alpha, beta, x) {
            if let (v, true) = ml_series(alpha, beta, z) {
                return Ok(MlEval { value: v, warning: Some(WARN_REGIME) });
            }
        }
        let (v, est) = ml_asym(alpha, beta, x);
        if est <= 5e-11 * v.abs().max(1e-300) {
            return Ok(MlEval { value: v, warning: Some(WARN_REGIME) });
        }
        if alpha <= 1.0 {
            return Ok(MlEval { value: ml_talbot(alpha, beta, x), warning: Some(WARN_REGIME) });
        }
        return Ok(MlEval { value: v, warning: Some(WARN_REGIME) });
    }
    // z > 0: all series terms are positive, so the plain series is reliable
    // whenever it converges before overflow.
    if alpha == 1.0 && beta == 1.0 {
        return Ok(MlEval {
            value: z.exp(),
            warning: if z > 700.0 { Some(WARN_REGIME) } else { None },
        });
    }
    let (v, ok) = ml_series(alpha, beta, z);
    if ok {
        return Ok(MlEval { value: v, warning: Some(WARN_REGIME) });
    }
    // Leading exponential asymptotic e^{z^{1/a}} z^{(1-b)/a} / a.
    let root = (z.ln() / alpha).exp();
    let value = root.powf(1.0 - beta) * root.exp() / alpha;
    Ok(MlEval { value, warning: Some(WARN_REGIME) })
}

/// E_{a,b}(-x) on the validated envelope (0 < a <= 1, b >= a, 0 <= x <= 1e6).
/// Internal fast path shared by kernels and solvers.
pub(crate) fn ml_neg(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(x >= 0.0 && a > 0.0 && a <= 1.0);
    if x == 0.0 {
        return recip_gamma(b);
    }
    if a == 1.0 && b >= 1.0 {
        return ml_alpha1(b, x);
    }
    if b > 1.0 && x >= 0.5 {
        // Lower b below 1 before choosing a large-x method; the asymptotic
        // series loses accuracy for b > 1 while this recurrence is exact.
        let inner = ml_neg(a, b - a, x);
        return (inner - recip_gamma(b - a)) / (-x);
    }
    if x < 5.0 && ml_series_feasible(a, b, x) {
        let (v, ok) = ml_series(a, b, -x);
        if ok {
            return v;
        }
    }
    if x >= 5.0 {
        let (v, est) = ml_asym(a, b, x);
        if est <= 5e-11 * v.abs().max(1e-300) {
            return v;
        }
    }
    ml_talbot(a, b, x)
}

// Power series with a cancellation guard. Returns (value, trustworthy).
// The guard charges the largest term with eps * cond, where cond covers
// both alternating-sum cancellation and the rounding of the Gamma argument
// a*k+b (derivative of ln Gamma ~ ln y at the peak term).
fn ml_series(a: f64, b: f64, z: f64) -> (f64, bool) {
    const KMAX: usize = 600;
    let mut val = 0.0;
    let mut term_max = 0.0;
    let mut k_at_max = 0usize;
    let mut power = 1.0;
    let mut k = 0usize;
    while k < KMAX {
        let y = a * k as f64 + b;
        let term = power * recip_gamma(y);
        val += term;
        if term.abs() > term_max {
            term_max = term.abs();
            k_at_max = k;
        }
        if term.abs() <= 1e-17 * val.abs().max(1e-300) && y > z.abs() + 2.0 {
            let ym = a * k_at_max as f64 + b;
            let cond = 4f64.max(ym * ym.max(1.1).ln().max(1.0));
            let loss = term_max * EPS * cond / val.abs().max(1e-300);
            return (val, loss < 1e-11);
        }
        k += 1;
        power *= z;
        if power.abs() > 1e280 {
            return (val, false);
        }
    }
    (val, false)
}

// Pre-check: will the series peak stay representable and will the
// convergent tail be reached within the term budget? The k_conv bisection
// finds where Gamma growth overtakes |z|^k by a factor e^40.
fn ml_series_feasible(a: f64, b: f64, x: f64) -> bool {
    if x <= 1e-12 {
        return true;
    }
    let arg = (x.ln() / a).min(500.0).exp();
    let kstar = ((arg - b) / a).max(0.0);
    if kstar > 280.0 {
        return false;
    }
    let lnmax = if kstar > 0.0 {
        kstar * x.ln() - ln_gamma((a * kstar + b).max(1e-3))
    } else {
        0.0
    };
    if lnmax >= 10.0 * std::f64::consts::LN_10 {
        return false;
    }
    let lnx = x.ln().max(0.0);
    let (mut lo, mut hi) = (1.0f64, 420.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ln_gamma(mid) >= ((mid - b) / a) * lnx + 40.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k_conv = (hi - b) / a;
    k_conv <= 550.0 && k_conv * lnx < 640.0
}

// Algebraic asymptotic expansion of E_{a,b}(-x):
//   sum_{k>=1} (-1)^{k-1} x^{-k} / Gamma(b - a k).
// Returns (value, absolute error estimate). Terms that vanish at Gamma
// poles are skipped (three in a row only happens for a = 1, where the
// expansion is exact and finite). The estimate adds a bound for the
// exponentially small Stokes branch, which exists on the negative axis
// only for a >= 2/3.
fn ml_asym(a: f64, b: f64, x: f64) -> (f64, f64) {
    const KMAX: usize = 80;
    let inv_x = 1.0 / x;
    let mut s = 0.0;
    let mut prev = f64::INFINITY;
    let mut zeros = 0;
    let mut power = 1.0;
    let trunc;
    let mut k = 1usize;
    loop {
        if k > KMAX {
            trunc = prev;
            break;
        }
        power *= inv_x;
        let rg = recip_gamma(b - a * k as f64);
        let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * power * rg;
        if term == 0.0 {
            if rg == 0.0 {
                zeros += 1;
                if zeros >= 3 {
                    trunc = 0.0;
                    break;
                }
                k += 1;
                continue;
            }
            // x^{-k} underflowed: fully converged.
            trunc = 0.0;
            break;
        }
        zeros = 0;
        if term.abs() > prev && k > 2 {
            trunc = term.abs();
            break;
        }
        s += term;
        prev = term.abs();
        if term.abs() <= 1e-15 * s.abs().max(1e-300) && k >= 3 {
            trunc = term.abs();
            break;
        }
        k += 1;
    }
    let c = (std::f64::consts::PI / a).cos();
    let expb = if a >= 0.64 && c < 0.0 {
        let root = (x.ln() / a).exp();
        10.0 * (1.0 / a) * root.powf(1.0 - b) * (c.max(-1.0) * root).exp()
    } else if a >= 0.64 {
        f64::INFINITY
    } else {
        0.0
    };
    (s, trunc + expb)
}

// E_{1,b}(-x) for b >= 1. The Kummer transformation
//   E_{1,b}(-x) = e^{-x}/Gamma(b) * sum_k (b-1)/(b-1+k) * x^k/k!
// has all-nonnegative terms, so no cancellation at any x.
fn ml_alpha1(b: f64, x: f64) -> f64 {
    if b == 1.0 {
        return (-x).exp();
    }
    if x > 600.0 {
        let (v, _) = ml_asym(1.0, b, x);
        return v;
    }
    let mut s = 0.0;
    let mut term = 1.0;
    let mut k = 0usize;
    loop {
        s += (b - 1.0) / (b - 1.0 + k as f64) * term;
        if term < 1e-17 * s.abs() && k as f64 > x {
            break;
        }
        if k > 900 {
            break;
        }
        k += 1;
        term *= x / k as f64;
    }
    (-x).exp() * s * recip_gamma(b)
}

// Integral-representation fallback: for 0 < a <= 1, G(s) = s^{a-b}/(s^a+1)
// is analytic off (-inf, 0] and E_{a,b}(-x) = t^{1-b} L^{-1}[G](t) at
// t = x^{1/a}. The Talbot discretization gives t-independent relative
// accuracy here because G is sectorial.
fn ml_talbot(a: f64, b: f64, x: f64) -> f64 {
    let t = (x.ln() / a).exp();
    let g = move |s: Complex64| s.powf(a - b) / (s.powf(a) + 1.0);
    let inv = laplace::talbot32(g, t).expect("talbot inversion of sectorial transform");
    t.powf(1.0 - b) * inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // Frozen high-precision oracles (series / reflection, computed before
    // the build at 30+ digits).
    #[test]
    fn gamma_oracle_table() {
        let table = [
            (0.5, 1.772_453_850_905_516_027_3),
            (0.001, 999.423_772_484_595_445_3),
            (0.1, 9.513_507_698_668_731_285_8),
            (1.5, 0.886_226_925_452_758_013_65),
            (24.0, 2.585_201_673_888_497_664e22),
            (101.3, 3.722_616_312_784_224_627_5e158),
            (170.0, 4.269_068_009_004_705_274_9e304),
            (-0.5, -3.544_907_701_811_032_054_6),
            (-2.5, -0.945_308_720_482_941_881_23),
        ];
        for (x, want) in table {
            let got = gamma(x).unwrap();
            assert!(rel(got, want) < 1e-13, "gamma({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn gamma_trivial_integers() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() <= 1e-15);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 24.0 * 1e-14);
    }

    #[test]
    fn gamma_rejects_poles_and_overflow() {
        assert!(matches!(gamma(0.0), Err(Error::Pole(_))));
        assert!(matches!(gamma(-3.0), Err(Error::Pole(_))));
        assert!(matches!(gamma(172.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn recip_gamma_is_entire() {
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-7.0), 0.0);
        assert_eq!(recip_gamma(200.0), 0.0);
        assert!((recip_gamma(0.5) - 1.0 / 1.772_453_850_905_516).abs() < 1e-15);
        // 1/Gamma(-0.5) = -1/3.5449...
        assert!((recip_gamma(-0.5) + 1.0 / 3.544_907_701_811_032).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.7, 1.0, 4.5, 42.0, 150.0] {
            let want = gamma(x).unwrap().ln();
            assert!((ln_gamma(x) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    fn ml(a: f64, b: f64, z: f64) -> f64 {
        mittag_leffler(MLParams { alpha: a, beta: b }, z).unwrap().value
    }

    // Frozen oracle values (25-digit series/inverse-transform computations
    // performed before the build), spanning all dispatch paths.
    #[test]
    fn ml_oracle_table() {
        let table = [
            // series region
            (0.5, 1.0, -1.0, 0.427_583_576_155_807_004_410_750_3),
            (0.3, 1.0, -3.0, 0.211_802_633_196_435_782_033_766_5),
            (0.1, 1.0, -0.5, 0.654_324_460_288_001_928_445_878),
            (0.8, 0.8, -2.0, 0.092_077_465_517_931_656_238_651_2),
            (0.95, 1.0, -4.5, 0.026_861_994_029_612_444_318_000_02),
            (0.6, 0.6, -1.0, 0.171_102_283_383_916_752_106_060_8),
            (0.4, 1.2, -2.0, 0.327_412_620_825_176_391_560_736_9),
            // asymptotic region
            (0.5, 1.0, -100.0, 0.005_641_613_782_989_432_903_556_457),
            (0.5, 1.0, -1e6, 5.641_895_835_474_741_921_563_06e-7),
            (0.25, 1.0, -50.0, 0.016_097_508_838_799_057_448_826_38),
            (0.75, 0.75, -200.0, 5.224_795_007_131_185_605_975_17e-6),
            (0.9, 1.0, -1000.0, 1.052_883_594_320_958_905_205_573e-4),
            // contour-fallback band
            (0.5, 1.0, -8.0, 0.069_985_166_200_880_927_722_752_25),
            (0.5, 0.5, -10.0, 0.002_779_656_109_530_428_372_905_579),
            (0.7, 1.0, -12.0, 0.029_761_168_325_449_356_605_928_83),
            (0.85, 0.85, -7.0, 0.004_621_966_539_422_483_113_144_597),
            (0.6, 1.0, -20.0, 0.022_946_564_273_258_376_396_293_82),
            // b-lowering recurrence
            (0.5, 1.5, -2.0, 0.372_302_161_844_747_128_067_455_7),
            (0.3, 1.3, -50.0, 0.019_695_435_969_963_706_715_786_63),
            (0.6, 1.6, -5.0, 0.180_976_430_712_249_084_325_678_2),
            (0.5, 2.0, -30.0, 0.036_522_412_113_029_771_075_979_88),
            // alpha = 1 Kummer / asymptotic
            (1.0, 1.5, -3.0, 0.237_198_341_774_779_592_167_771_4),
            (1.0, 2.0, -100.0, 0.01),
        ];
        for (a, b, z, want) in table {
            let got = ml(a, b, z);
            assert!(
                rel(got, want) < 1e-10,
                "E_({a},{b})({z}) = {got:e}, want {want:e}, rel {:.2e}",
                rel(got, want)
            );
        }
    }

    #[test]
    fn ml_known_corner_carries_warning() {
        // Documented near-degenerate corner: worst observed 5.1e-10.
        let eval = mittag_leffler(MLParams { alpha: 0.99, beta: 0.99 }, -20.0).unwrap();
        assert!(eval.warning.is_some());
        assert!(rel(eval.value, 3.130_100_920_891_225_261_483_393e-5) < 2e-9);
    }

    #[test]
    fn ml_matches_exp_on_interval() {
        // E_{1,1}(z) = e^z to 1e-12 on [-50, 5].
        let p = MLParams { alpha: 1.0, beta: 1.0 };
        let mut z = -50.0;
        while z <= 5.0 {
            let got = mittag_leffler(p, z).unwrap().value;
            assert!(rel(got, z.exp()) < 1e-12, "z={z}");
            z += 0.5;
        }
    }

    #[test]
    fn ml_trivial_cases() {
        // z=0 -> 1/Gamma(beta)
        for &(a, b) in &[(0.5, 1.0), (0.3, 0.7), (1.0, 2.5)] {
            let got = ml(a, b, 0.0);
            assert!(rel(got, recip_gamma(b)) < 1e-15);
        }
        // E_{2,1}(-x^2) = cos(x); outside the primary regime, value still
        // correct through the series.
        let eval = mittag_leffler(MLParams { alpha: 2.0, beta: 1.0 }, -1.0).unwrap();
        assert!(rel(eval.value, 1f64.cos()) < 1e-13);
        assert!(eval.warning.is_some());
    }

    #[test]
    fn ml_rejects_bad_alpha() {
        assert!(mittag_leffler(MLParams { alpha: 0.0, beta: 1.0 }, -1.0).is_err());
        assert!(mittag_leffler(MLParams { alpha: -0.5, beta: 1.0 }, -1.0).is_err());
        assert!(MLParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn ml_positive_and_nonincreasing_on_negative_axis() {
        // Complete monotonicity consequences, sampled.
        for &(a, b) in &[(0.4, 1.0), (0.7, 0.9), (1.0, 1.0), (0.5, 1.5), (0.9, 2.0)] {
            let mut prev = f64::INFINITY;
            for i in 0..60 {
                let x = 1e-2 * (10f64).powf(i as f64 * 5.0 / 59.0 * 1.6);
                let v = ml_neg(a, b, x);
                // alpha = 1 is e^{-x}, which legitimately underflows to 0.
                let underflow_ok = a == 1.0 && x > 700.0;
                assert!(v > 0.0 || underflow_ok, "E_({a},{b})(-{x}) = {v} not positive");
                assert!(v <= prev * (1.0 + 1e-12), "not nonincreasing at x={x}");
                prev = v;
            }
        }
    }

    #[test]
    fn ml_series_oracle_agreement() {
        // |z| <= 2: match a 200-term direct summation. Practical for
        // alpha >= ~0.35; smaller alpha makes the raw series itself
        // uncomputable in f64 at z near -2 (terms beyond 1e15 cancel).
        for &(a, b) in &[(0.4, 1.0), (0.6, 0.6), (0.75, 1.5), (1.0, 1.0), (2.0, 1.0)] {
            let mut z = -2.0;
            while z <= 2.0 {
                let mut oracle = 0.0;
                let mut pw = 1.0;
                for k in 0..200 {
                    oracle += pw * recip_gamma(a * k as f64 + b);
                    pw *= z;
                }
                let got = mittag_leffler(MLParams { alpha: a, beta: b }, z).unwrap().value;
                assert!(
                    rel(got, oracle) < 1e-12,
                    "a={a} b={b} z={z}: got {got:e} oracle {oracle:e}"
                );
                z += 0.25;
            }
        }
    }

    #[test]
    fn ml_positive_argument_series() {
        // Identity E_{1/2,1}(x) = e^{x^2}(1 + erf(x)) for x > 0; at x = 1
        // that is e * (1 + 0.842700792949714869...) = 5.00898008076228...
        let got = ml(0.5, 1.0, 1.0);
        let want = 5.008_980_080_762_283_4;
        assert!(rel(got, want) < 1e-10, "got {got}");
    }
}
