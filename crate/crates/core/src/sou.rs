//! Sum-of-uniforms chains: uniform(0,1) variates with prescribed
//! correlation between neighbours.
//!
//! `Z = Y_prev + W` with `W ~ U(0, c)` has a trapezoidal law with CDF `F`;
//! `F(Z)` is uniform again and correlated with `Y_prev`. The correlation is
//! a known function of `c`:
//!
//! ```text
//! |rho| = 1/c - 0.3/c^2            c >= 1   (|rho| <= 0.7)
//! |rho| = 1 - 0.5 c^2 + 0.2 c^3    c <= 1   (|rho| >= 0.7)
//! ```

use rand::Rng;

use crate::error::{Error, Result};

/// Below this magnitude the target is treated as zero.
pub const INDEPENDENCE_CUTOFF: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SouParam {
    /// Width of the added uniform. Infinite for an independent draw.
    pub c: f64,
    pub rho_target: f64,
    pub sign: Sign,
}

impl SouParam {
    pub fn is_independent(&self) -> bool {
        self.c.is_infinite()
    }
}

/// `|rho|` produced by width `c`.
pub fn sou_rho(c: f64) -> f64 {
    if c >= 1.0 {
        1.0 / c - 0.3 / (c * c)
    } else {
        1.0 - 0.5 * c * c + 0.2 * c * c * c
    }
}

pub fn rho_to_c(rho: f64) -> Result<SouParam> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    let sign = if rho < 0.0 { Sign::Negative } else { Sign::Positive };
    let r = rho.abs();
    let c = if r < INDEPENDENCE_CUTOFF {
        f64::INFINITY
    } else if r <= 0.7 {
        // Larger root of r c^2 - c + 0.3 = 0.
        (1.0 + (1.0 - 1.2 * r).sqrt()) / (2.0 * r)
    } else {
        // sou_rho is strictly decreasing on (0, 1].
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if sou_rho(mid) > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(SouParam {
        c,
        rho_target: rho,
        sign,
    })
}

/// CDF of `U(0,1) + U(0,c)`.
pub fn sou_cdf(z: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(
            "sou_cdf",
            format!("c must be positive and finite, got {c}"),
        ));
    }
    if !(0.0..=1.0 + c).contains(&z) {
        return Err(Error::domain("sou_cdf", format!("z = {z} outside [0, {}]", 1.0 + c)));
    }
    Ok(cdf_unchecked(z, c))
}

#[inline]
fn cdf_unchecked(z: f64, c: f64) -> f64 {
    let (lo, hi) = if c >= 1.0 { (1.0, c) } else { (c, 1.0) };
    let f = if z <= lo {
        z * z / (2.0 * c)
    } else if z <= hi {
        if c >= 1.0 {
            (2.0 * z - 1.0) / (2.0 * c)
        } else {
            (2.0 * z - c) / 2.0
        }
    } else {
        let r = 1.0 + c - z;
        1.0 - r * r / (2.0 * c)
    };
    f.clamp(0.0, 1.0)
}

/// Next chain element from the previous one and a fresh uniform `u`.
#[inline]
pub fn sou_step(y_prev: f64, param: &SouParam, u: f64) -> f64 {
    if param.is_independent() {
        return u;
    }
    let w = param.c * u;
    let z = match param.sign {
        Sign::Positive => y_prev + w,
        Sign::Negative => 1.0 - y_prev + w,
    };
    cdf_unchecked(z, param.c)
}

/// Uniform correlated with `y_prev` at (approximately) `rho`.
pub fn sou_next<R: Rng + ?Sized>(y_prev: f64, rho: f64, rng: &mut R) -> Result<f64> {
    let param = rho_to_c(rho)?;
    Ok(sou_step(y_prev, &param, rng.random::<f64>()))
}

/// Chain of `rhos.len() + 1` uniforms with adjacent correlations `rhos`.
pub fn sou_chain<R: Rng + ?Sized>(rhos: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let params = rhos.iter().map(|&r| rho_to_c(r)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(rhos.len() + 1);
    let mut y = rng.random::<f64>();
    out.push(y);
    for p in &params {
        y = sou_step(y, p, rng.random::<f64>());
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_uniform, pearson};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rho_to_c_values() {
        assert_relative_eq!(rho_to_c(0.7).unwrap().c, 1.0, epsilon = 1e-12);
        // Larger root of 0.4 c^2 - c + 0.3 = 0.
        let c = rho_to_c(0.4).unwrap().c;
        assert_relative_eq!(c, 2.151_387_818_865_997, epsilon = 1e-12);
        assert_relative_eq!(sou_rho(c), 0.4, epsilon = 1e-12);
        assert!(rho_to_c(0.999_999).unwrap().c < 1e-2);
        assert_eq!(rho_to_c(-0.4).unwrap().sign, Sign::Negative);
        assert!(rho_to_c(0.0).unwrap().is_independent());
        assert!(rho_to_c(0.004).unwrap().is_independent());
        assert!(matches!(rho_to_c(1.0), Err(Error::InvalidCorrelation(_))));
        assert!(matches!(rho_to_c(-1.5), Err(Error::InvalidCorrelation(_))));
    }

    #[test]
    fn cdf_values() {
        for &c in &[0.3, 1.0, 2.0, 7.5] {
            assert_eq!(sou_cdf(0.0, c).unwrap(), 0.0);
            assert_eq!(sou_cdf(1.0 + c, c).unwrap(), 1.0);
        }
        assert_eq!(sou_cdf(1.0, 2.0).unwrap(), 0.25);
        assert!(sou_cdf(-0.1, 2.0).is_err());
        assert!(sou_cdf(3.1, 2.0).is_err());
    }

    #[test]
    fn cdf_continuous_at_breakpoints() {
        for &c in &[0.2, 0.7, 1.0, 1.5, 3.0] {
            for &z in &[1.0f64, c] {
                let l = sou_cdf(z - 1e-13, c).unwrap();
                let r = sou_cdf(z + 1e-13, c).unwrap();
                assert!((l - r).abs() < 1e-12, "c={c} z={z}");
            }
        }
    }

    #[test]
    fn induced_correlation_and_uniform_marginals() {
        let n = 100_000;
        for (k, &rho) in [-0.7, -0.4, 0.0, 0.4, 0.7, 0.9].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(11 + k as u64);
            let mut a = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for _ in 0..n {
                let y = rng.random::<f64>();
                a.push(y);
                b.push(sou_next(y, rho, &mut rng).unwrap());
            }
            let r = pearson(&a, &b);
            assert!((r - rho).abs() < 0.03, "rho={rho} got {r}");
            let ks = ks_uniform(&mut b);
            assert!(
                ks.statistic < 1.628 / (n as f64).sqrt(),
                "rho={rho} ks={}",
                ks.statistic
            );
        }
    }

    #[test]
    fn chain_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(sou_chain(&[], &mut rng).unwrap().len(), 1);
        let n = 100_000;
        let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
        for _ in 0..n {
            let y = sou_chain(&[0.4, 0.4], &mut rng).unwrap();
            for (c, v) in cols.iter_mut().zip(y) {
                c.push(v);
            }
        }
        assert!((pearson(&cols[0], &cols[1]) - 0.4).abs() < 0.03);
        assert!((pearson(&cols[1], &cols[2]) - 0.4).abs() < 0.03);
    }

    proptest! {
        #[test]
        fn round_trip(rho in -0.999f64..0.999) {
            prop_assume!(rho.abs() >= INDEPENDENCE_CUTOFF);
            let p = rho_to_c(rho).unwrap();
            prop_assert!((sou_rho(p.c) - rho.abs()).abs() < 1e-9);
        }

        #[test]
        fn cdf_monotone(c in 0.05f64..10.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s = 1.0 + c;
            prop_assert!(sou_cdf(lo * s, c).unwrap() <= sou_cdf(hi * s, c).unwrap());
        }
    }
}
