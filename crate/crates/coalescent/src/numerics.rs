//! Survival probability alpha(c), the emergence time t*(n, p), zeta
//! constants, adaptive quadrature for the two limit integrals, and exact
//! log-ratio diagnostics for the closed-form counts.

use crate::exact::{closed_form_partition_function, ln_biguint};
use crate::kernel::KernelKind;

/// Bisection tolerance for alpha; the defining identity then holds to
/// well under 1e-10 on [1.001, 50].
pub const ALPHA_TOL: f64 = 1e-12;

fn alpha_residual(c: f64, x: f64) -> f64 {
    // e^(-cx) - (1 - x), written so the value is exact near x = 0
    (-c * x).exp_m1() + x
}

/// Largest solution of e^(-cx) = 1 - x in [0, 1): zero for c <= 1, else the
/// unique positive root, found by bisection.
pub fn alpha(c: f64) -> f64 {
    assert!(c >= 0.0 && c.is_finite(), "alpha needs c >= 0");
    if c <= 1.0 {
        return 0.0;
    }
    let mut hi = -(-c).exp_m1(); // 1 - e^(-c), strictly above the root
    // the paper's lower bracket 1 - 2e^(-c) only bounds the root for large
    // c, so use it only when the residual sign confirms it
    let cand = 1.0 - 2.0 * (-c).exp();
    let mut lo = if cand > 0.0 && alpha_residual(c, cand) < 0.0 {
        cand
    } else {
        0.0
    };
    for _ in 0..200 {
        if hi - lo <= ALPHA_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if alpha_residual(c, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// 1 - alpha(c) with full relative accuracy, which 1 - alpha(c) loses once
/// the value drops near the bisection tolerance. Solves y = e^(c(y-1)) for
/// its smaller fixed point by Newton from y0 = e^(-c); that start is below
/// the root and in the region where the residual is decreasing and convex,
/// so the iterates climb monotonically and converge quadratically.
pub fn one_minus_alpha(c: f64) -> f64 {
    assert!(c >= 0.0 && c.is_finite(), "one_minus_alpha needs c >= 0");
    if c <= 1.0 {
        return 1.0;
    }
    let mut y = (-c).exp();
    if y == 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let e = (c * (y - 1.0)).exp();
        let next = y - (e - y) / (c * e - 1.0);
        if !next.is_finite() || next <= 0.0 || next >= 1.0 {
            break;
        }
        let settled = (next - y).abs() <= 4.0 * f64::EPSILON * next;
        y = next;
        if settled {
            break;
        }
    }
    y
}

/// n alpha(n ln(1/(1-p))): the asymptotic largest-component size in G(n, p).
pub fn t_star(n: u64, p: f64) -> f64 {
    assert!((0.0..1.0).contains(&p), "t_star needs 0 <= p < 1");
    let c = -(n as f64) * (-p).ln_1p(); // n ln(1/(1-p))
    n as f64 * alpha(c)
}

/// alpha(np)^2 n, the predicted susceptibility of G(n, p).
pub fn susceptibility_prediction(n: u64, p: f64) -> f64 {
    assert!(p >= 0.0);
    let a = alpha(n as f64 * p);
    a * a * n as f64
}

/// alpha(2m/n)^2 n, the predicted susceptibility after m uniform edges.
pub fn susc_exp_target(n: u64, m: u64) -> f64 {
    let a = alpha(2.0 * m as f64 / n as f64);
    a * a * n as f64
}

// ---------------------------------------------------------------------------
// Constants.
// ---------------------------------------------------------------------------

/// zeta(3) by descending series plus an Euler-Maclaurin tail; good to
/// around 1e-13, so the quadrature target has an in-repo oracle.
pub fn zeta3() -> f64 {
    const K: u64 = 1_000_000;
    let mut sum = 0.0;
    for k in (1..=K).rev() {
        let x = k as f64;
        sum += 1.0 / (x * x * x);
    }
    let x = K as f64;
    sum + 1.0 / (2.0 * x * x) - 1.0 / (2.0 * x * x * x) + 1.0 / (4.0 * x * x * x * x)
}

/// zeta(2) - 3 + ln 2 - ln^2 2, the limit constant of log Zhat_MC(n)/n
/// after removing 2 log n.
pub fn zeta_mc_constant() -> f64 {
    let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let ln2 = std::f64::consts::LN_2;
    zeta2 - 3.0 + ln2 - ln2 * ln2
}

#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub zeta3: f64,
    pub two_zeta3: f64,
    pub zeta_mc: f64,
    pub zmc_integral_target: f64,
}

pub fn constants() -> Constants {
    let z3 = zeta3();
    let zmc = zeta_mc_constant();
    Constants {
        zeta3: z3,
        two_zeta3: 2.0 * z3,
        zeta_mc: zmc,
        zmc_integral_target: 2.0 * (zmc + std::f64::consts::LN_2),
    }
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    if !(a < lm && lm < m && m < rm && rm < b) {
        return whole; // interval has collapsed to a few ulps
    }
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    assert!(delta.is_finite(), "integrand produced a non-finite value");
    // rounding floor: below it delta is noise, so refining cannot help
    let tol = tol.max(f64::EPSILON * whole.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol {
        // Richardson extrapolation knocks out the leading error term
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson integral of f over [a, b] to absolute tolerance tol.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    assert!(b >= a && tol > 0.0);
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive(&f, a, fa, m, fm, b, fb, whole, tol, 48)
}

/// Truncation point for both lambda-integrals; the integrands beyond it are
/// bounded by 4(lambda+1)e^(-lambda), so the discarded tail is under 1e-23.
pub const INTEGRAL_CUTOFF: f64 = 60.0;

/// Integral of lambda (1 - alpha(lambda)^2) over [0, inf), truncated at
/// INTEGRAL_CUTOFF; equals 2 zeta(3) in the limit. The [0, 1] piece is
/// lambda exactly (alpha = 0), contributing 1/2; quadrature starts at the
/// kink at lambda = 1.
pub fn zeta3_integral_tol(tol: f64) -> f64 {
    // 1 - alpha^2 = y(2 - y) keeps its relative accuracy out in the tail,
    // where forming it from alpha itself would cancel to noise
    let f = |l: f64| {
        let y = one_minus_alpha(l);
        l * (y * (2.0 - y))
    };
    0.5 + integrate(f, 1.0, INTEGRAL_CUTOFF, tol)
}

pub fn zeta3_integral() -> f64 {
    zeta3_integral_tol(1e-9)
}

/// Integral of (1 - alpha^2) ln(1 - alpha^2) over [0, inf), truncated;
/// equals 2(zeta_mc + ln 2). The [0, 1] piece vanishes (ln 1 = 0).
pub fn zmc_integral_tol(tol: f64) -> f64 {
    let f = |l: f64| {
        let y = one_minus_alpha(l);
        let x = y * (2.0 - y);
        x * x.ln()
    };
    integrate(f, 1.0, INTEGRAL_CUTOFF, tol)
}

pub fn zmc_integral() -> f64 {
    zmc_integral_tol(1e-8)
}

// ---------------------------------------------------------------------------
// Exact log-ratio diagnostics.
// ---------------------------------------------------------------------------

/// Exact-count comparison at the half-way truncation k = floor(n/2):
/// returns ((ln Z_MC - ln Z_AC) / (n/2), ln Z_MC / (n ln n)). The first
/// drifts to ln(e/4), the second to 1.
pub fn ratio_mc_ac(n: u64) -> (f64, f64) {
    assert!((2..=3000).contains(&n), "exact path supports n <= 3000");
    let k = (n / 2).max(1);
    let zmc = closed_form_partition_function(KernelKind::Multiplicative, n, k);
    let zac = closed_form_partition_function(KernelKind::Additive, n, k);
    let (lm, la) = (ln_biguint(&zmc), ln_biguint(&zac));
    let half = n as f64 / 2.0;
    (
        (lm - la) / half,
        lm / (n as f64 * (n as f64).ln()),
    )
}
