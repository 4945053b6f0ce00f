//! The four solution paths for the evolution problems, the subordination
//! density, and the inversion-derivative (Post-Widder) coefficient
//! machinery.
//!
//! All methods compute u(t) = S(t)a for the same problem; they share no
//! numerics beyond the symbol g, which is what makes their agreement a real
//! cross-check rather than a tautology:
//!
//! * resolvent: contour inversion of (g(s)/s) R(g(s), A) a,
//! * subordination: u(t) = int phi(t,tau) e^{tau A} a dtau,
//! * Post-Widder: scaled n-th transform derivatives, resolvent powers only,
//! * Volterra: product integration of u = a + int k(t-s) A u(s) ds.

use crate::error::{Error, Result};
use crate::generators::{eigensystem, resolvent_apply, Generator};
use crate::kernels::{k1_eval, k1_mass, k2_mass};
use crate::laplace::{contour_nodes, invert_scalar, invert_vector, ContourSpec};
use crate::quad::{gl12, gl16};
use crate::special::ln_gamma;
use crate::symbols::{g_eval, g_jet, Jet, ProblemKind, WeightSpec};
use num_complex::Complex64;
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Which solution path produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Resolvent,
    Subordination,
    PostWidder,
    Volterra,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Resolvent => "resolvent",
            Method::Subordination => "subordination",
            Method::PostWidder => "post-widder",
            Method::Volterra => "volterra",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "resolvent" => Ok(Method::Resolvent),
            "subordination" => Ok(Method::Subordination),
            "post-widder" | "postwidder" | "pw" => Ok(Method::PostWidder),
            "volterra" => Ok(Method::Volterra),
            other => Err(Error::Parse(format!(
                "unknown method {other:?}; expected resolvent, subordination, \
                 post-widder, or volterra"
            ))),
        }
    }
}

/// Time grid plus state vectors. `times[0] = 0` always holds and carries the
/// initial datum exactly; inversion-based methods never evaluate at t = 0
/// (the transforms are singular there), the origin is prepended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub kind: ProblemKind,
    pub method: Method,
    /// Sector half-angle min{(1/alpha - 1) pi/2, pi/2} - 0.01 for discrete
    /// weights; the angle budget available to HankelSector contours.
    pub theta0: Option<f64>,
}

fn theta0_of(w: &WeightSpec) -> Option<f64> {
    w.leading_alpha()
        .map(|alpha| ((1.0 / alpha - 1.0) * PI / 2.0).min(PI / 2.0) - 0.01)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Parameter("time grid is empty".into()));
    }
    for pair in times.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::Parameter(
                "time grid must be strictly increasing".into(),
            ));
        }
    }
    if !(times[0] > 0.0) || !times[times.len() - 1].is_finite() {
        return Err(Error::Parameter(
            "solver times must be finite and > 0; t = 0 is prepended automatically".into(),
        ));
    }
    Ok(())
}

fn check_problem(w: &WeightSpec, op: &Generator, a: &[f64]) -> Result<()> {
    w.ensure_valid()?;
    op.ensure_valid()?;
    if a.len() != op.dim() {
        return Err(Error::Parameter(format!(
            "initial datum has length {}, generator dimension is {}",
            a.len(),
            op.dim()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("initial datum must be finite".into()));
    }
    Ok(())
}

// Inversion drivers whose transform closures can fail (resolvent solves,
// symbol evaluation). A failure is recorded and surfaces as the original
// error instead of the generic non-finite-node contour failure.
fn invert_scalar_checked<F: Fn(Complex64) -> Result<Complex64>>(
    f: F,
    t: f64,
    c: &ContourSpec,
) -> Result<f64> {
    let captured: RefCell<Option<Error>> = RefCell::new(None);
    let wrapped = |s: Complex64| match f(s) {
        Ok(v) => v,
        Err(e) => {
            captured.borrow_mut().get_or_insert(e);
            Complex64::new(f64::NAN, 0.0)
        }
    };
    invert_scalar(wrapped, t, c).map_err(|e| captured.borrow_mut().take().unwrap_or(e))
}

fn invert_vector_checked<F: Fn(Complex64) -> Result<Vec<Complex64>>>(
    f: F,
    dim: usize,
    t: f64,
    c: &ContourSpec,
) -> Result<Vec<f64>> {
    let captured: RefCell<Option<Error>> = RefCell::new(None);
    let wrapped = |s: Complex64| match f(s) {
        Ok(v) => v,
        Err(e) => {
            captured.borrow_mut().get_or_insert(e);
            vec![Complex64::new(f64::NAN, 0.0); dim]
        }
    };
    invert_vector(wrapped, t, c).map_err(|e| captured.borrow_mut().take().unwrap_or(e))
}

/// Transform-domain solution: u(t) = L^{-1}[ (g(s)/s) R(g(s), A) a ](t).
///
/// The reference method; the others are validated against it.
pub fn solve_resolvent(
    w: &WeightSpec,
    kind: ProblemKind,
    op: &Generator,
    a: &[f64],
    times: &[f64],
    c: &ContourSpec,
) -> Result<Trajectory> {
    check_problem(w, op, a)?;
    check_times(times)?;
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut out_times = Vec::with_capacity(times.len() + 1);
    let mut states = Vec::with_capacity(times.len() + 1);
    out_times.push(0.0);
    states.push(a.to_vec());
    for &t in times {
        let u = invert_vector_checked(
            |s| {
                let g = g_eval(w, kind, s)?;
                let r = resolvent_apply(op, g, &ac)?;
                let factor = g / s;
                Ok(r.into_iter().map(|x| x * factor).collect())
            },
            a.len(),
            t,
            c,
        )?;
        out_times.push(t);
        states.push(u);
    }
    Ok(Trajectory {
        times: out_times,
        states,
        kind,
        method: Method::Resolvent,
        theta0: theta0_of(w),
    })
}

fn g_real(w: &WeightSpec, kind: ProblemKind, x: f64) -> Result<f64> {
    Ok(g_eval(w, kind, Complex64::new(x, 0.0))?.re)
}

// Smallest x with g(x) >= target; g is increasing on (0, inf) for every
// admissible weight. Log-space bisection, clamped to the bracket edges.
fn g_inverse(w: &WeightSpec, kind: ProblemKind, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-12f64, 1e12f64);
    if g_real(w, kind, lo)? >= target {
        return Ok(lo);
    }
    if g_real(w, kind, hi)? <= target {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g_real(w, kind, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

// Contour choice for inverting phi_hat(s) = (g/s) e^{-tau g(s)} at time t,
// valid across tau in [tau_lo, tau_hi].
//
// Talbot contours dive into the left half plane, where Re g can be negative
// and e^{-tau g} explodes; and even where it stays bounded, the phase
// tau Im g must be resolved by the node count. Both limits are scanned on
// the actual nodes; when no Talbot size passes, a truncated Bromwich line
// is sized instead (Re g > 0 in the open right half plane keeps e^{-tau g}
// a pure damping factor there).
fn density_plan(
    w: &WeightSpec,
    kind: ProblemKind,
    t: f64,
    tau_lo: f64,
    tau_hi: f64,
) -> Result<ContourSpec> {
    const LADDER: [usize; 8] = [32, 48, 64, 96, 128, 192, 256, 384];
    for &n in LADDER.iter() {
        let nodes = contour_nodes(&ContourSpec::FixedTalbot { nodes: n }, t)?;
        // Node noise is about eps * sum |term|; keep max |term| small enough
        // that the inverted density is trustworthy to ~1e-11 absolute.
        let threshold = (1e-11 / (2.2e-16 * 0.5 * n as f64)).ln();
        let mut worst = f64::NEG_INFINITY;
        let mut im_max = 0.0f64;
        let mut usable = true;
        for (z, coeff) in &nodes {
            let g = g_eval(w, kind, *z)?;
            if !g.re.is_finite() || !g.im.is_finite() {
                usable = false;
                break;
            }
            let base = coeff.norm().ln() + (g.norm() / z.norm()).ln();
            worst = worst.max(base - tau_lo * g.re).max(base - tau_hi * g.re);
            im_max = im_max.max(g.im.abs());
        }
        if usable && worst <= threshold && tau_hi * im_max <= 0.6 * n as f64 {
            return Ok(ContourSpec::FixedTalbot { nodes: n });
        }
    }
    // Bromwich fallback. Abscissa where tau g(sigma) ~ 9 keeps the center
    // integrand ~e^{-9} without squeezing the analyticity strip; halfheight
    // where the remaining tail integral (estimated by |integrand| * y, valid
    // for both exponential and algebraic decay of e^{-tau Re g}) is below
    // the noise floor; node spacing resolves the trapezoid strip error and
    // the oscillation t y + tau Im g.
    let sigma = g_inverse(w, kind, 9.0 / tau_hi.max(1e-12))?.clamp(1e-3, (30.0 / t).max(1.0));
    let scale = (sigma * t).exp();
    let mut y = sigma.max(1.0);
    loop {
        let s = Complex64::new(sigma, y);
        let g = g_eval(w, kind, s)?;
        let magnitude = g.norm() / s.norm() * (-tau_lo * g.re).exp() * scale;
        if magnitude * y <= 3e-12 * tau_lo.max(1.0) {
            break;
        }
        y *= 1.4;
        if y > 1e12 {
            return Err(Error::ContourFailure(
                "no workable inversion contour for the subordination density".into(),
            ));
        }
    }
    // Phase rate of tau Im g: secant to the top plus a near-axis probe
    // (the local rate at y ~ sigma is the larger one for concave symbols).
    let g_top = g_eval(w, kind, Complex64::new(sigma, y))?;
    let g_bot = g_eval(w, kind, Complex64::new(sigma, sigma))?;
    let slope = (g_top.im.abs() / y).max(g_bot.im.abs() / sigma);
    let h = (2.0 * PI * sigma / 40.0).min(PI / (2.0 * (t + tau_hi * slope * 1.6 + 0.02)));
    let half = (y / h).ceil() as usize;
    if half > 100_000 {
        return Err(Error::ContourFailure(
            "subordination density contour would need too many nodes".into(),
        ));
    }
    Ok(ContourSpec::BromwichLine {
        abscissa: sigma,
        halfheight: y,
        nodes: (2 * half).max(8),
    })
}

/// A contour on which phi_hat(s, tau) = (g(s)/s) e^{-tau g(s)} can be
/// inverted accurately at time t. Pass the result to
/// [`subordination_density`].
pub fn density_contour(
    w: &WeightSpec,
    kind: ProblemKind,
    t: f64,
    tau: f64,
) -> Result<ContourSpec> {
    w.ensure_valid()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("density needs t > 0, got {t}")));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("density needs tau >= 0, got {tau}")));
    }
    density_plan(w, kind, t, tau, tau)
}

/// Subordination density phi(t, tau): inverse transform of
/// (g(s)/s) e^{-tau g(s)}. Nonnegative and integrates to 1 over tau.
pub fn subordination_density(
    w: &WeightSpec,
    kind: ProblemKind,
    t: f64,
    tau: f64,
    c: &ContourSpec,
) -> Result<f64> {
    w.ensure_valid()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("density needs t > 0, got {t}")));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("density needs tau >= 0, got {tau}")));
    }
    invert_scalar_checked(
        |s| {
            let g = g_eval(w, kind, s)?;
            Ok(g / s * (-g * tau).exp())
        },
        t,
        c,
    )
}

// tau_max with certified tail: with lambda = g(4/t) the exponential moment
// M = int e^{lambda tau} phi dtau is finite and computable as the inverse
// transform of (g/s)/(g - lambda) (pole at s = 4/t, safely inside the
// Talbot-64 contour, which crosses the axis at 10.9/t). Chebyshev then
// gives tail(T) <= M e^{-lambda T}; tau_max makes that <= ~1e-9.
fn tau_cutoff(w: &WeightSpec, kind: ProblemKind, t: f64) -> Result<(f64, f64)> {
    let lambda = g_real(w, kind, 4.0 / t)?;
    let moment = invert_scalar_checked(
        |s| {
            let g = g_eval(w, kind, s)?;
            Ok(g / s / (g - lambda))
        },
        t,
        &ContourSpec::FixedTalbot { nodes: 64 },
    )?;
    if !(moment >= 0.99) {
        return Err(Error::TailMass(format!(
            "exponential tail moment came out {moment}, cannot certify the density tail"
        )));
    }
    if moment > 1.6e15 {
        return Err(Error::TailMass(
            "exponential tail moment too large to certify the density tail".into(),
        ));
    }
    Ok(((moment.ln().max(0.0) + 20.7) / lambda, lambda))
}

/// Quadrature grid (tau, weight) for integrals against phi(t, .): geometric
/// panels from a certified tau_max down to 0 (the density may vary fastest
/// near the origin), Gauss-Legendre inside each panel. The mass omitted
/// beyond tau_max is below 1e-8.
pub fn subordination_grid(
    w: &WeightSpec,
    kind: ProblemKind,
    t: f64,
) -> Result<Vec<(f64, f64)>> {
    w.ensure_valid()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("density grid needs t > 0, got {t}")));
    }
    let (tau_max, _) = tau_cutoff(w, kind, t)?;
    let rule = gl12();
    let levels = 60usize;
    let mut out = Vec::with_capacity(levels * rule.nodes.len());
    for j in (0..levels).rev() {
        let hi = tau_max * 0.5f64.powi(j as i32);
        let lo = if j + 1 == levels { 0.0 } else { 0.5 * hi };
        for (x, wq) in rule.nodes.iter().zip(&rule.weights) {
            out.push((lo + (hi - lo) * x, wq * (hi - lo)));
        }
    }
    Ok(out)
}

/// Subordination solution u(t) = int_0^inf phi(t, tau) e^{tau A} a dtau.
///
/// The classical semigroup is evaluated spectrally (exact for these
/// generators), so the error budget is the tau quadrature plus the density
/// inversions; contours are re-planned per panel.
pub fn solve_subordination(
    w: &WeightSpec,
    kind: ProblemKind,
    op: &Generator,
    a: &[f64],
    times: &[f64],
) -> Result<Trajectory> {
    check_problem(w, op, a)?;
    check_times(times)?;
    let eig = eigensystem(op);
    let rule = gl12();
    let levels = 60usize;
    let mut out_times = Vec::with_capacity(times.len() + 1);
    let mut states = Vec::with_capacity(times.len() + 1);
    out_times.push(0.0);
    states.push(a.to_vec());
    for &t in times {
        let (tau_max, _) = tau_cutoff(w, kind, t)?;
        let mut u = vec![0.0; a.len()];
        for j in (0..levels).rev() {
            let hi = tau_max * 0.5f64.powi(j as i32);
            let lo = if j + 1 == levels { 0.0 } else { 0.5 * hi };
            let contour = density_plan(w, kind, t, lo.max(hi * 1e-3), hi)?;
            for (x, wq) in rule.nodes.iter().zip(&rule.weights) {
                let tau = lo + (hi - lo) * x;
                let phi = invert_scalar_checked(
                    |s| {
                        let g = g_eval(w, kind, s)?;
                        Ok(g / s * (-g * tau).exp())
                    },
                    t,
                    &contour,
                )?;
                let state = eig.spectral_apply(|l| (l * tau).exp(), a);
                let scale = wq * (hi - lo) * phi;
                for (acc, v) in u.iter_mut().zip(&state) {
                    *acc += scale * v;
                }
            }
        }
        out_times.push(t);
        states.push(u);
    }
    Ok(Trajectory {
        times: out_times,
        states,
        kind,
        method: Method::Subordination,
        theta0: theta0_of(w),
    })
}

/// Table of inversion-derivative coefficients b_{n,k,p}(s): the n-th
/// derivative of the solution transform H(s) a expands as
/// (-1)^n sum_{k,p} b_{n,k,p}(s) R(g(s), A)^{p+1} a. Entries are defined
/// for 1 <= p <= k <= n plus the lone (0, 0) entry carrying the k = 0 term
/// of the product rule; all are nonnegative for s > 0 up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct PWTable {
    pub n: usize,
    pub s: f64,
    pub entries: BTreeMap<(usize, usize), f64>,
}

fn factorial(m: usize) -> f64 {
    let mut f = 1.0;
    for k in 2..=m {
        f *= k as f64;
    }
    f
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

// Truncated Cauchy product of Taylor-coefficient vectors.
fn jet_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for i in 0..a.len().min(len) {
        for j in 0..b.len().min(len - i) {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

// Taylor coefficients of the derivative; one order shorter.
fn jet_deriv(a: &[f64]) -> Vec<f64> {
    (1..a.len()).map(|j| j as f64 * a[j]).collect()
}

/// Coefficient table at s for derivative order n (n <= 40).
///
/// The chain-rule coefficients a_{k,p} obey
/// a_{k+1,p} = a_{k,p-1} g' + (a_{k,p})' with a_{1,1} = g'; each a_{k,p} is
/// carried as a jet so the derivative is a coefficient shift, and level k
/// keeps exactly the n-k+1 coefficients that later levels still consume.
pub fn postwidder_coeffs(
    w: &WeightSpec,
    kind: ProblemKind,
    s: f64,
    n: usize,
) -> Result<PWTable> {
    w.ensure_valid()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("coefficients need s > 0, got {s}")));
    }
    if n == 0 {
        return Err(Error::Parameter("derivative order n must be >= 1".into()));
    }
    if n > 40 {
        return Err(Error::JetOrder { requested: n, cap: 40 });
    }
    let g = g_jet(w, kind, s, n + 1)?;
    let gos = g.div(&Jet::identity(s, n + 1))?;
    let gp = g.derivative().coeffs;

    // a0_vals[k-1][p-1] = a_{k,p}(s).
    let mut a0_vals: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut level: Vec<Vec<f64>> = vec![gp.iter().copied().take(n).collect()];
    a0_vals.push(vec![level[0][0]]);
    for k in 1..n {
        let len = n - k; // length of level k+1 jets
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
        for p in 1..=k + 1 {
            let mut coeffs = if p >= 2 {
                jet_mul(&level[p - 2], &gp, len)
            } else {
                vec![0.0; len]
            };
            if p <= k {
                for (c, d) in coeffs.iter_mut().zip(jet_deriv(&level[p - 1])) {
                    *c += d;
                }
            }
            next.push(coeffs);
        }
        a0_vals.push(next.iter().map(|jet| jet[0]).collect());
        level = next;
    }

    let mut entries = BTreeMap::new();
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
    entries.insert((0usize, 0usize), sign_n * factorial(n) * gos.coeffs[n]);
    for k in 1..=n {
        for p in 1..=k {
            let sign = if (n + p) % 2 == 0 { 1.0 } else { -1.0 };
            let value = sign
                * binomial(n, k)
                * factorial(n - k)
                * gos.coeffs[n - k]
                * a0_vals[k - 1][p - 1]
                * factorial(p);
            entries.insert((k, p), value);
        }
    }
    if entries.values().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!(
            "coefficient table overflows at n = {n}, s = {s}"
        )));
    }
    Ok(PWTable { n, s, entries })
}

// sum over table entries of b_{n,k,p} R(g, A)^{p+1} a, via p+1 sequential
// solves and never an explicit power.
fn table_apply(
    table: &PWTable,
    g: f64,
    op: &Generator,
    a: &[f64],
) -> Result<Vec<f64>> {
    let mut by_p = vec![0.0; table.n + 1];
    for (&(_, p), &b) in &table.entries {
        by_p[p] += b;
    }
    let gz = Complex64::new(g, 0.0);
    let mut r: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut acc = vec![0.0; a.len()];
    for &wp in by_p.iter() {
        r = resolvent_apply(op, gz, &r)?;
        if wp != 0.0 {
            for (s, v) in acc.iter_mut().zip(&r) {
                *s += wp * v.re;
            }
        }
    }
    Ok(acc)
}

/// Post-Widder approximant of order n at time t:
/// u_n = (1/n!) (n/t)^{n+1} sum b_{n,k,p}(n/t) R(g(n/t), A)^{p+1} a.
/// Converges first-order in 1/n to the transform-inversion solution.
pub fn solve_postwidder(
    w: &WeightSpec,
    kind: ProblemKind,
    op: &Generator,
    a: &[f64],
    t: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_problem(w, op, a)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("approximant needs t > 0, got {t}")));
    }
    let s = n as f64 / t;
    let table = postwidder_coeffs(w, kind, s, n)?;
    let g = g_real(w, kind, s)?;
    let summed = table_apply(&table, g, op, a)?;
    // (n/t)^{n+1}/n! in log form; the sum it multiplies is O((t/n)^{n+1}).
    let ln_factor = (n as f64 + 1.0) * s.ln() - ln_gamma(n as f64 + 1.0);
    if ln_factor > 700.0 {
        return Err(Error::Overflow(format!(
            "scaling (n/t)^(n+1)/n! overflows for n = {n}, t = {t}"
        )));
    }
    let factor = ln_factor.exp();
    Ok(summed.into_iter().map(|v| factor * v).collect())
}

/// n-th derivative of the solution transform applied to a:
/// H^{(n)}(s) a = (-1)^n sum b_{n,k,p}(s) R(g(s), A)^{p+1} a.
/// Satisfies the generation-theorem bound ||H^(n)(s) a|| <= n!/s^{n+1} ||a||.
pub fn h_derivative_apply(
    w: &WeightSpec,
    kind: ProblemKind,
    op: &Generator,
    a: &[f64],
    s: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_problem(w, op, a)?;
    let table = postwidder_coeffs(w, kind, s, n)?;
    let g = g_real(w, kind, s)?;
    let summed = table_apply(&table, g, op, a)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(summed.into_iter().map(|v| sign * v).collect())
}

// Convolution weights w_m = int_{m d}^{(m+1) d} k(sigma) dsigma for the
// product-integration stepper. Closed antiderivatives where the kernel has
// them; elsewhere the singular first panel integrates the spectral form and
// the smooth panels use plain quadrature on the kernel.
fn volterra_weights(
    w: &WeightSpec,
    kind: ProblemKind,
    delta: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(steps);
    match kind {
        ProblemKind::RiemannLiouville => {
            let mut prev = 0.0;
            for m in 1..=steps {
                let cur = k2_mass(w, m as f64 * delta);
                out.push(cur - prev);
                prev = cur;
            }
        }
        ProblemKind::Caputo => {
            let closed_mass = match w {
                WeightSpec::Discrete { terms, .. } => terms.len() <= 1,
                _ => false,
            };
            if closed_mass {
                let mut prev = 0.0;
                for m in 1..=steps {
                    let cur = k1_mass(w, m as f64 * delta)?;
                    out.push(cur - prev);
                    prev = cur;
                }
            } else {
                out.push(k1_mass(w, delta)?);
                let rule = gl16();
                for m in 1..steps {
                    let failed: RefCell<Option<Error>> = RefCell::new(None);
                    let val = rule.integrate(m as f64 * delta, (m + 1) as f64 * delta, |x| {
                        match k1_eval(w, x) {
                            Ok(v) => v,
                            Err(e) => {
                                failed.borrow_mut().get_or_insert(e);
                                f64::NAN
                            }
                        }
                    });
                    if let Some(e) = failed.into_inner() {
                        return Err(e);
                    }
                    out.push(val);
                }
            }
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(
            "convolution weights did not evaluate finitely".into(),
        ));
    }
    if !(out[0] > 0.0) {
        return Err(Error::Quadrature(
            "leading convolution weight must be positive".into(),
        ));
    }
    Ok(out)
}

/// Product-integration stepper for u = a + int_0^t k(t - s) A u(s) ds with
/// k = k1 (Caputo) or k2 (Riemann-Liouville) on a uniform grid.
///
/// Piecewise-constant states give first-order convergence; each step solves
/// (I - w_0 A) u_n = a + sum_{m>=1} w_m A u_{n-m} with cached A u_j.
pub fn solve_volterra(
    w: &WeightSpec,
    kind: ProblemKind,
    op: &Generator,
    a: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_problem(w, op, a)?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Parameter(format!(
            "stepper needs t_end > 0, got {t_end}"
        )));
    }
    if steps < 2 {
        return Err(Error::Parameter("stepper needs steps >= 2".into()));
    }
    let delta = t_end / steps as f64;
    let weights = volterra_weights(w, kind, delta, steps)?;
    let z = Complex64::new(1.0 / weights[0], 0.0);
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut au: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    states.push(a.to_vec());
    au.push(op.apply(a)?);
    for n in 1..=steps {
        let mut rhs = a.to_vec();
        for m in 1..n {
            let wm = weights[m];
            for (r, v) in rhs.iter_mut().zip(&au[n - m]) {
                *r += wm * v;
            }
        }
        // (I - w0 A) u = rhs  <=>  u = (1/w0) R(1/w0, A) rhs.
        let rhs_c: Vec<Complex64> = rhs
            .iter()
            .map(|&x| Complex64::new(x / weights[0], 0.0))
            .collect();
        let u: Vec<f64> = resolvent_apply(op, z, &rhs_c)?
            .into_iter()
            .map(|v| v.re)
            .collect();
        au.push(op.apply(&u)?);
        states.push(u);
    }
    Ok(Trajectory {
        times: (0..=steps).map(|n| n as f64 * delta).collect(),
        states,
        kind,
        method: Method::Volterra,
        theta0: theta0_of(w),
    })
}
