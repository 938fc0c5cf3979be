//! Modified Bessel function of the first kind, fractional order, by power
//! series.

use libm::lgamma as ln_gamma;

use super::ddouble::{self, Dd};
use crate::error::{Error, Result};

const MAX_TERMS: usize = 100_000;
/// Beyond this `I_nu(x)` overflows `f64`.
const MAX_UNSCALED_X: f64 = 700.0;

/// `ln` of the leading series term plus the sum of the normalized series
/// `sum_k prod_{m<=k} (x^2/4) / (m (m + nu))`.
fn series(order: f64, x: f64) -> Result<(f64, f64)> {
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::domain("bessel_i", format!("order must be >= 0, got {order}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_i", format!("argument must be > 0, got {x}")));
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    // Rescaling keeps the partial sums finite for large x.
    let mut log_shift = 0.0;
    let mut k = 0usize;
    loop {
        k += 1;
        let ratio = q / (k as f64 * (k as f64 + order));
        term *= ratio;
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            log_shift += 250.0 * std::f64::consts::LN_10;
        }
        if ratio < 1.0 && term < 1e-17 * sum {
            break;
        }
        if k >= MAX_TERMS {
            return Err(Error::NonConvergence {
                func: "bessel_i",
                terms: k,
                partial_sum: sum,
            });
        }
    }
    let log_lead = order * (0.5 * x).ln() - ln_gamma(order + 1.0) + log_shift;
    Ok((log_lead, sum))
}

/// `I_order(x)`.
pub fn bessel_i(order: f64, x: f64) -> Result<f64> {
    if x > MAX_UNSCALED_X {
        return Err(Error::Overflow { func: "bessel_i", x });
    }
    let (log_lead, sum) = series(order, x)?;
    Ok(log_lead.exp() * sum)
}

/// `exp(-x) I_order(x)`.
pub fn bessel_i_scaled(order: f64, x: f64) -> Result<f64> {
    let (log_lead, sum) = series(order, x)?;
    Ok((log_lead - x).exp() * sum)
}

/// `exp(log_scale - x) I_order(x)` in double-double.
pub(crate) fn bessel_i_scaled_dd(order: Dd, x: Dd, log_scale: Dd) -> Dd {
    let q = x.sqr().mul_f64(0.25);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let ratio = q / (order + Dd::new(k)).mul_f64(k);
        term = term * ratio;
        sum = sum + term;
        if ratio.hi < 1.0 && term.hi < 1e-34 * sum.hi {
            break;
        }
    }
    let log_lead = order * x.mul_f64(0.5).ln() - ddouble::ln_gamma(order + Dd::ONE);
    (log_lead + log_scale - x).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn half_order_closed_forms() {
        let x: f64 = 1.0;
        let expect = (2.0 / (PI * x)).sqrt() * x.sinh();
        assert_relative_eq!(bessel_i(0.5, 1.0).unwrap(), expect, max_relative = 1e-13);
        assert_relative_eq!(
            bessel_i(0.5, 1.0).unwrap(),
            0.937_674_888_245_487_6,
            max_relative = 1e-13
        );
        let x: f64 = 2.0;
        let expect = (2.0 / (PI * x)).sqrt() * (x.cosh() - x.sinh() / x);
        assert_relative_eq!(bessel_i(1.5, 2.0).unwrap(), expect, max_relative = 1e-13);
        assert_relative_eq!(
            bessel_i(1.5, 2.0).unwrap(),
            1.099_473_188_633_110_5,
            max_relative = 1e-13
        );
    }

    #[test]
    fn integer_orders_and_scaling() {
        // I_0(1), I_1(10), exp(-50) I_0(50) to 16 digits
        assert_relative_eq!(
            bessel_i(0.0, 1.0).unwrap(),
            1.266_065_877_752_008_4,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            bessel_i(1.0, 10.0).unwrap(),
            2_670.988_303_701_254_6,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_i_scaled(0.0, 50.0).unwrap(),
            0.056_561_626_647_454_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn small_argument_leading_term() {
        let nu: f64 = 2.3;
        let x: f64 = 1e-4;
        let lead = (0.5 * x).powf(nu) / libm::tgamma(nu + 1.0);
        assert_relative_eq!(bessel_i(nu, x).unwrap(), lead, max_relative = 1e-8);
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_i(0.5, 800.0), Err(Error::Overflow { .. })));
        // exp(-x) I_{1/2}(x) = (1 - exp(-2x)) / sqrt(2 pi x)
        let s = bessel_i_scaled(0.5, 800.0).unwrap();
        assert_relative_eq!(s, 1.0 / (2.0 * PI * 800.0).sqrt(), max_relative = 1e-12);
        assert!(matches!(bessel_i(-1.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_i(1.0, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn double_double_agrees_with_f64() {
        for &(nu, x) in &[(0.5, 1.0), (3.17, 12.5), (20.2, 31.0)] {
            let f = bessel_i_scaled(nu, x).unwrap();
            let d = bessel_i_scaled_dd(Dd::new(nu), Dd::new(x), Dd::ZERO).to_f64();
            assert_relative_eq!(f, d, max_relative = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn recurrence_holds(nu in 0.0f64..20.0, x in 0.05f64..50.0) {
            // I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu, shifted to keep orders >= 0.
            let a = bessel_i_scaled(nu, x).unwrap();
            let b = bessel_i_scaled(nu + 2.0, x).unwrap();
            let c = bessel_i_scaled(nu + 1.0, x).unwrap();
            let lhs = a - b;
            let rhs = 2.0 * (nu + 1.0) / x * c;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * a.max(rhs.abs()));
        }
    }
}
