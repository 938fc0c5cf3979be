//! Small statistical helpers shared by tests and the acceptance suite.

/// Asymptotic Kolmogorov-Smirnov coefficient at the 1% level.
pub const KS_C_01: f64 = 1.628;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

/// Standard error of the mean of `x`.
pub fn standard_error(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = mean(x);
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (v / n).sqrt()
}

/// Standard error of a binomial proportion `p` from `n` trials.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Critical value at the 1% level.
    pub critical: f64,
}

impl KsResult {
    pub fn passes(&self) -> bool {
        self.statistic <= self.critical
    }
}

/// One-sample KS against U(0,1). Sorts `x` in place.
pub fn ks_uniform(x: &mut [f64]) -> KsResult {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let v = v.clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - v).max(v - i as f64 / n);
    }
    KsResult {
        statistic: d,
        critical: KS_C_01 / n.sqrt(),
    }
}

/// Kish effective sample size of a weight vector.
pub fn effective_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Two-sample KS between weighted samples `(value, weight)`, each ECDF
/// normalized by its own total weight. The critical value uses the Kish
/// effective sizes.
pub fn ks_two_sample_weighted(a: &[(f64, f64)], b: &[(f64, f64)]) -> KsResult {
    let mut a: Vec<_> = a.to_vec();
    let mut b: Vec<_> = b.to_vec();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    b.sort_by(|x, y| x.0.total_cmp(&y.0));
    let wa: f64 = a.iter().map(|p| p.1).sum();
    let wb: f64 = b.iter().map(|p| p.1).sum();
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0, 0.0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.min(y.0),
            (Some(x), None) => x.0,
            (None, Some(y)) => y.0,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i].0 <= t {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 <= t {
            fb += b[j].1;
            j += 1;
        }
        d = d.max((fa / wa - fb / wb).abs());
    }
    let na = effective_size(&a.iter().map(|p| p.1).collect::<Vec<_>>());
    let nb = effective_size(&b.iter().map(|p| p.1).collect::<Vec<_>>());
    KsResult {
        statistic: d,
        critical: KS_C_01 * ((na + nb) / (na * nb)).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pearson_basic() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[8.0, 6.0, 4.0, 2.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_accepts_uniform_rejects_skewed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut u: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        assert!(ks_uniform(&mut u).passes());
        let mut s: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>().powf(1.1)).collect();
        assert!(!ks_uniform(&mut s).passes());
    }

    #[test]
    fn two_sample_weighted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<_> = (0..5000).map(|_| (rng.random::<f64>(), 1.0)).collect();
        let b: Vec<_> = (0..5000).map(|_| (rng.random::<f64>(), 2.0)).collect();
        assert!(ks_two_sample_weighted(&a, &b).passes());
        let c: Vec<_> = (0..5000).map(|_| (rng.random::<f64>() + 0.1, 1.0)).collect();
        assert!(!ks_two_sample_weighted(&a, &c).passes());
        assert_eq!(effective_size(&[1.0; 10]), 10.0);
    }
}
