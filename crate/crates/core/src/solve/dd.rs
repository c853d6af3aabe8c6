//! Minimal double-double arithmetic (~31 significant digits), used by the
//! condition estimator to resolve tiny singular values that f64 cannot.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
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

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd { hi: -other.hi, lo: -other.lo })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul(Dd::from(q2)));
        let q3 = r2.hi / other.hi;
        Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_beyond_f64() {
        // (1 + 2^-60) - 1 is lost in f64 but kept in double-double
        let tiny = (2.0f64).powi(-60);
        let a = Dd::from(1.0).add(Dd::from(tiny));
        let b = a.sub(Dd::from(1.0));
        assert_eq!(b.hi, tiny);
    }

    #[test]
    fn division_round_trip() {
        let a = Dd::from(std::f64::consts::PI);
        let b = Dd::from(std::f64::consts::E);
        let c = a.div(b).mul(b);
        assert!((c.hi - a.hi).abs() < 1e-30);
        assert!((c.lo - a.lo).abs() < 1e-15);
    }
}
