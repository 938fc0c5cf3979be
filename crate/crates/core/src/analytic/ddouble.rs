//! Minimal double-double arithmetic (about 32 significant digits).
//!
//! Only what the joint-default series needs when the marginals are so small
//! that `1 - P_union` loses every digit of the joint probability in `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub(crate) const PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let y = self.hi.sqrt();
        let yy = Dd::new(y).sqr();
        // One Newton step doubles the f64 accuracy.
        let (hi, lo) = quick_two_sum(y, (self - yy).to_f64() / (2.0 * y));
        Dd { hi, lo }
    }

    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-10);
        // Taylor series of exp(r) - 1 for |r| < 4e-4.
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = (term * r) / Dd::new(n);
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        // (1 + s)^2 - 1 = s (2 + s), keeps the small part accurate.
        for _ in 0..10 {
            sum = sum * (sum + Dd::new(2.0));
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "ln of nonpositive double-double");
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    pub fn sin(self) -> Self {
        let two_pi = PI.mul_f64(2.0);
        let k = (self / two_pi).to_f64().round();
        let mut r = self - two_pi.mul_f64(k);
        // sin(pi - r) = sin(r) folds into [-pi/2, pi/2].
        let half = PI.mul_f64(0.5);
        if r > half {
            r = PI - r;
        } else if r < -half {
            r = -PI - r;
        }
        let r2 = r.sqr();
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2) / Dd::new((n + 1.0) * (n + 2.0));
            n += 2.0;
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        sum
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// `ln Gamma(x)` for `x > 0`: upward recurrence to `x >= 30`, then Stirling.
pub(crate) fn ln_gamma(x: Dd) -> Dd {
    assert!(x.hi > 0.0, "ln_gamma needs a positive argument");
    let mut x = x;
    let mut prod = Dd::ONE;
    while x.hi < 30.0 {
        prod = prod * x;
        x = x + Dd::ONE;
    }
    // B_2k numerators and denominators, k = 1..12.
    const BERN: [(f64, f64); 12] = [
        (1.0, 6.0),
        (-1.0, 30.0),
        (1.0, 42.0),
        (-1.0, 30.0),
        (5.0, 66.0),
        (-691.0, 2730.0),
        (7.0, 6.0),
        (-3617.0, 510.0),
        (43867.0, 798.0),
        (-174611.0, 330.0),
        (854513.0, 138.0),
        (-236364091.0, 2730.0),
    ];
    let half_ln_two_pi = PI.mul_f64(2.0).ln().mul_f64(0.5);
    let inv = Dd::ONE / x;
    let inv2 = inv.sqr();
    let mut pow = inv;
    let mut corr = Dd::ZERO;
    for (k, &(num, den)) in BERN.iter().enumerate() {
        let m = 2.0 * (k as f64 + 1.0);
        corr = corr + pow * Dd::new(num) / Dd::new(den * m * (m - 1.0));
        pow = pow * inv2;
    }
    (x - Dd::new(0.5)) * x.ln() - x + half_ln_two_pi + corr - prod.ln()
}
