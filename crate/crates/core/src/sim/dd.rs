//! Compensated double-double arithmetic used as the extended-precision
//! reference when auditing floating-point error bounds. Roughly 106 bits
//! of significand, far more than the bounds under test require.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn add_f64(self, v: f64) -> Dd {
        self.add(Dd::from(v))
    }

    pub fn mul_f64(self, v: f64) -> Dd {
        let (p, e) = two_prod(self.hi, v);
        let e = e + self.lo * v;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    /// self + a * b with the product held exactly.
    pub fn fma(self, a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        self.add(Dd { hi: p, lo: e })
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Dot product of `row` against `x` in double-double precision.
pub fn dot_dd(row: impl Iterator<Item = (f64, f64)>) -> Dd {
    let mut acc = Dd::ZERO;
    for (a, x) in row {
        acc = acc.fma(a, x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catches_cancellation_the_f64_sum_loses() {
        // 1e16 + 1 - 1e16 == 1 exactly in double-double.
        let r = Dd::from(1e16).add_f64(1.0).add_f64(-1e16);
        assert_eq!(r.to_f64(), 1.0);
    }

    #[test]
    fn product_error_term_is_exact() {
        let a = 1.0 + 2f64.powi(-30);
        let (p, e) = two_prod(a, a);
        // a*a = 1 + 2^-29 + 2^-60; the tail is below f64 resolution of p.
        assert_eq!(p, a * a);
        assert!(e != 0.0);
    }

    #[test]
    fn dot_matches_exact_small_case() {
        let r = dot_dd([(0.5, 2.0), (0.25, 4.0)].into_iter());
        assert_eq!(r.to_f64(), 2.0);
    }
}
