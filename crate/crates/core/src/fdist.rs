//! F-distribution CDF and upper quantile, built on the regularized
//! incomplete beta function (continued fraction) and bracketed bisection.

use crate::error::{Error, Result};
use crate::scalar::{c, from_usize, Real};

/// Lanczos approximation of ln Γ(x), x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let half = c::<T>(0.5);
    let g = c::<T>(7.0);
    let sqrt_two_pi = c::<T>((2.0 * std::f64::consts::PI).sqrt());

    let x = x - T::one();
    let mut acc = c::<T>(0.99999999999980993);
    for (i, &coef) in COEFFS.iter().enumerate() {
        acc = acc + c::<T>(coef) / (x + from_usize::<T>(i + 1));
    }
    let t = x + g + half;
    sqrt_two_pi.ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Continued-fraction kernel for the incomplete beta (Lentz's algorithm).
fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let max_iter = 300;
    let eps = c::<T>(1e-12).max(T::epsilon() * c::<T>(4.0));
    let tiny = c::<T>(1e-300).max(T::min_positive_value());

    let one = T::one();
    let two = c::<T>(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;

    let mut cc = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;

    for m in 1..=max_iter {
        let mf = from_usize::<T>(m);
        let m2 = two * mf;

        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        cc = one + aa / cc;
        if cc.abs() < tiny {
            cc = tiny;
        }
        d = one / d;
        h = h * d * cc;

        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        cc = one + aa / cc;
        if cc.abs() < tiny {
            cc = tiny;
        }
        d = one / d;
        let del = d * cc;
        h = h * del;

        if (del - one).abs() < eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_incomplete_beta<T: Real>(a: T, b: T, x: T) -> Result<T> {
    if a <= T::zero() || b <= T::zero() {
        return Err(Error::Domain("incomplete beta requires a > 0 and b > 0".into()));
    }
    if x < T::zero() || x > T::one() {
        return Err(Error::Domain("incomplete beta requires x in [0, 1]".into()));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x == T::one() {
        return Ok(T::one());
    }
    let one = T::one();
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (one - x).ln();
    let front = ln_front.exp();
    // symmetry transform keeps the continued fraction in its fast region
    let two = c::<T>(2.0);
    if x < (a + one) / (a + b + two) {
        Ok(front * beta_cf(a, b, x) / a)
    } else {
        Ok(one - front * beta_cf(b, a, one - x) / b)
    }
}

/// CDF of the F(df1, df2) distribution at `x`.
pub fn f_cdf<T: Real>(x: T, df1: usize, df2: usize) -> Result<T> {
    if df1 == 0 || df2 == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    if x <= T::zero() {
        return Ok(T::zero());
    }
    let d1 = from_usize::<T>(df1);
    let d2 = from_usize::<T>(df2);
    let t = d1 * x / (d1 * x + d2);
    regularized_incomplete_beta(d1 / c::<T>(2.0), d2 / c::<T>(2.0), t)
}

/// Upper-α quantile of F(df1, df2): the x with CDF(x) = 1 − α.
///
/// Bracketed bisection on the CDF, capped at 200 iterations.
pub fn f_critical<T: Real>(alpha: T, df1: usize, df2: usize) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain("alpha must lie in (0, 1)".into()));
    }
    if df1 == 0 || df2 == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    let target = T::one() - alpha;

    let mut lo = T::zero();
    let mut hi = T::one();
    let mut guard = 0;
    while f_cdf(hi, df1, df2)? < target {
        lo = hi;
        hi = hi * c::<T>(2.0);
        guard += 1;
        if guard > 4000 {
            return Err(Error::Domain("quantile bracket failed to close".into()));
        }
    }

    for _ in 0..200 {
        let mid = (lo + hi) / c::<T>(2.0);
        if f_cdf(mid, df1, df2)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= c::<T>(1e-9) * (T::one() + hi) {
            break;
        }
    }
    Ok((lo + hi) / c::<T>(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_at_zero_is_zero() {
        assert_eq!(f_cdf(0.0f64, 5, 19).unwrap(), 0.0);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1u64..10 {
            let fact: u64 = (1..n).product();
            let expect = (fact as f64).ln();
            assert!((ln_gamma(n as f64) - expect).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn incomplete_beta_symmetry() {
        let v = regularized_incomplete_beta(2.5f64, 3.5, 0.4).unwrap();
        let w = regularized_incomplete_beta(3.5f64, 2.5, 0.6).unwrap();
        assert!((v + w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_table_values() {
        let q = f_critical(0.05f64, 5, 19).unwrap();
        assert!((q - 2.74).abs() < 0.01, "got {q}");
        let q = f_critical(0.05f64, 1, 1).unwrap();
        assert!((q - 161.45).abs() < 0.1, "got {q}");
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &(alpha, d1, d2) in &[(0.05f64, 5, 19), (0.01, 3, 12), (0.1, 2, 30), (0.5, 7, 7)] {
            let q = f_critical(alpha, d1, d2).unwrap();
            let p = f_cdf(q, d1, d2).unwrap();
            assert!((p - (1.0 - alpha)).abs() < 1e-6);
        }
    }

    #[test]
    fn quantile_decreasing_in_alpha() {
        let mut prev = f64::INFINITY;
        for &alpha in &[0.01, 0.05, 0.1, 0.25, 0.5, 0.9] {
            let q = f_critical(alpha, 4, 20).unwrap();
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(f_critical(0.0f64, 5, 19).is_err());
        assert!(f_critical(1.0f64, 5, 19).is_err());
        assert!(f_critical(0.05f64, 0, 19).is_err());
    }
}
