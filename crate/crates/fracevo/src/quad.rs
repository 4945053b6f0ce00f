//! Shared quadrature plumbing: Gauss-Legendre rules and panel drivers.
//!
//! Everything here integrates smooth functions; endpoint singularities are
//! the caller's job (dyadic panels toward the singular point, plus an
//! analytic bottom term where the leftover mass is not negligible).

use num_complex::Complex64;
use std::sync::OnceLock;

/// Gauss-Legendre rule mapped to [0, 1].
pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Newton on P_n with a Chebyshev initial guess; 3-4 iterations.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = 0.5 * (x + 1.0);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        // Newton's guesses walk from +1 down; sort ascending for readability.
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
        GaussLegendre {
            nodes: idx.iter().map(|&i| nodes[i]).collect(),
            weights: idx.iter().map(|&i| weights[i]).collect(),
        }
    }

    /// Integral of f over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + len * x);
        }
        acc * len
    }

    /// Complex-valued integrand over a real interval.
    pub fn integrate_c<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let len = b - a;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(a + len * x) * *w;
        }
        acc * len
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

macro_rules! cached_rule {
    ($fn_name:ident, $n:expr) => {
        pub(crate) fn $fn_name() -> &'static GaussLegendre {
            static CELL: OnceLock<GaussLegendre> = OnceLock::new();
            CELL.get_or_init(|| GaussLegendre::new($n))
        }
    };
}

cached_rule!(gl12, 12);
cached_rule!(gl16, 16);
cached_rule!(gl64, 64);

/// Integral of f over [lo, hi] where f may have an integrable singularity
/// at lo = 0: dyadic panels [hi*2^{-k-1}, hi*2^{-k}] down to hi*2^{-levels}.
/// The mass on [0, hi*2^{-levels}] is NOT included; callers add it
/// analytically or argue it is negligible.
pub(crate) fn integrate_dyadic_down<F: FnMut(f64) -> f64>(
    hi: f64,
    levels: usize,
    rule: &GaussLegendre,
    mut f: F,
) -> f64 {
    let mut acc = 0.0;
    let mut upper = hi;
    for _ in 0..levels {
        let lower = 0.5 * upper;
        acc += rule.integrate(lower, upper, &mut f);
        upper = lower;
    }
    acc
}
