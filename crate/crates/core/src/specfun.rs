//! Complex-parameter special functions used by the closed-form eigenfunctions.
//!
//! All routines are pure. Non-finite results are reported as errors rather
//! than returned as NaN.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex value type used throughout the crate.
pub type ComplexValue = Complex64;

const POLE_TOL: f64 = 1e-14;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
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

fn finite(z: Complex64, what: &'static str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Returns true when `z` lies within `POLE_TOL` of 0, -1, -2, ...
pub fn is_gamma_pole(z: Complex64) -> bool {
    z.im.abs() <= POLE_TOL && z.re <= POLE_TOL && (z.re - z.re.round()).abs() <= POLE_TOL
}

/// Complex Gamma function (principal values).
///
/// Lanczos rational approximation for `Re z >= 1/2`, reflection
/// `Γ(z) Γ(1-z) = π / sin(πz)` below that.
pub fn gamma_c(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("gamma_c argument"));
    }
    if is_gamma_pole(z) {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if z.re < 0.5 {
        let s = (Complex64::from(PI) * z).sin();
        let g = lanczos(Complex64::new(1.0, 0.0) - z);
        return finite(Complex64::from(PI) / (s * g), "gamma_c");
    }
    finite(lanczos(z), "gamma_c")
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::from(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let ln = 0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln();
    ln.exp()
}

/// Principal logarithm with the argument normalised to (-π, π].
pub fn principal_ln(z: Complex64) -> Complex64 {
    let mut arg = z.im.atan2(z.re);
    if arg <= -PI {
        arg = PI;
    }
    Complex64::new(z.norm().ln(), arg)
}

/// `z^w` on the principal branch, `arg z ∈ (-π, π]`.
///
/// `0^w` is `0` for `Re w > 0` and a domain error otherwise.
pub fn complex_pow(z: Complex64, w: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        if w.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::Domain(format!(
            "0^w undefined for Re w = {} <= 0",
            w.re
        )));
    }
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    finite((w * principal_ln(z)).exp(), "complex_pow")
}

/// Jacobi polynomial `P_n^{(a,b)}(z)` for complex parameters and argument.
///
/// Forward three-term recurrence. When a recurrence denominator vanishes
/// (possible for special complex `a + b`) the explicit binomial sum is used
/// instead.
pub fn jacobi_poly(n: usize, a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    for (v, what) in [(a, "jacobi a"), (b, "jacobi b"), (z, "jacobi z")] {
        finite(v, what)?;
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let ab = a + b;
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = (a - b) * 0.5 + (ab + 2.0) * z * 0.5;
    for k in 2..=n {
        let k_f = k as f64;
        let c = ab + 2.0 * k_f;
        let den = 2.0 * k_f * (ab + k_f) * (c - 2.0);
        if den.norm() < 1e-12 {
            return jacobi_series(n, a, b, z);
        }
        let lin = (c - 1.0) * (c * (c - 2.0) * z + a * a - b * b);
        let back = 2.0 * (a + k_f - 1.0) * (b + k_f - 1.0) * c;
        let next = (lin * cur - back * prev) / den;
        prev = cur;
        cur = next;
    }
    finite(cur, "jacobi_poly")
}

// Σ_s C(n+a, n-s) C(n+b, s) ((z-1)/2)^s ((z+1)/2)^{n-s}
fn jacobi_series(n: usize, a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    let zm = (z - 1.0) * 0.5;
    let zp = (z + 1.0) * 0.5;
    let mut sum = Complex64::new(0.0, 0.0);
    for s in 0..=n {
        let term = binomial_c(a + n as f64, n - s)
            * binomial_c(b + n as f64, s)
            * zm.powu(s as u32)
            * zp.powu((n - s) as u32);
        sum += term;
    }
    finite(sum, "jacobi_poly")
}

/// Generalized binomial coefficient `C(x, j)` for complex `x`.
fn binomial_c(x: Complex64, j: usize) -> Complex64 {
    (0..j).fold(Complex64::new(1.0, 0.0), |acc, i| {
        acc * (x - i as f64) / (i as f64 + 1.0)
    })
}

/// Generalized Laguerre polynomial `L_n^{(a)}(z)` by forward recurrence.
pub fn laguerre_poly(n: usize, a: Complex64, z: Complex64) -> Result<Complex64> {
    finite(a, "laguerre a")?;
    finite(z, "laguerre z")?;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = 1.0 + a - z;
    for k in 1..n {
        let k_f = k as f64;
        let next = ((2.0 * k_f + 1.0 + a - z) * cur - (k_f + a) * prev) / (k_f + 1.0);
        prev = cur;
        cur = next;
    }
    finite(cur, "laguerre_poly")
}

/// `(sech y, tanh y)`.
pub fn sech_tanh(y: f64) -> (f64, f64) {
    (1.0 / y.cosh(), y.tanh())
}

/// Independent implementations used as test oracles.
#[cfg(any(test, feature = "oracles"))]
pub mod oracles {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    // B_2k / (2k (2k-1)), k = 1..10
    const STIRLING: [f64; 10] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
        43_867.0 / 244_188.0,
        -174_611.0 / 125_400.0,
    ];

    /// Gamma via upward shift to |z| >= 20, Stirling series, and reflection.
    pub fn gamma_stirling(z: Complex64) -> Complex64 {
        if z.re < 0.5 {
            let s = (Complex64::from(PI) * z).sin();
            return Complex64::from(PI) / (s * gamma_stirling(1.0 - z));
        }
        let mut w = z;
        let mut shift = Complex64::new(1.0, 0.0);
        while w.norm() < 20.0 {
            shift *= w;
            w += 1.0;
        }
        let mut series = Complex64::new(0.0, 0.0);
        let w2 = w * w;
        let mut pow = w;
        for c in STIRLING {
            series += c / pow;
            pow *= w2;
        }
        let ln = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
        ln.exp() / shift
    }

    fn rising_binomial(x: Complex64, j: usize) -> Complex64 {
        let mut num = Complex64::new(1.0, 0.0);
        let mut den = 1.0;
        for i in 0..j {
            num *= x - i as f64;
            den *= (i + 1) as f64;
        }
        num / den
    }

    /// Jacobi polynomial by the explicit finite binomial sum.
    pub fn jacobi_sum(n: usize, a: Complex64, b: Complex64, z: Complex64) -> Complex64 {
        let half_minus = (z - 1.0) / 2.0;
        let half_plus = (z + 1.0) / 2.0;
        (0..=n)
            .map(|k| {
                rising_binomial(a + n as f64, n - k)
                    * rising_binomial(b + n as f64, k)
                    * half_minus.powi(k as i32)
                    * half_plus.powi((n - k) as i32)
            })
            .sum()
    }

    /// Laguerre polynomial by `Σ_k (-1)^k C(n+a, n-k) z^k / k!`.
    pub fn laguerre_sum(n: usize, a: Complex64, z: Complex64) -> Complex64 {
        let mut fact = 1.0;
        let mut out = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out += sign * rising_binomial(a + n as f64, n - k) * z.powi(k as i32) / fact;
        }
        out
    }
}
