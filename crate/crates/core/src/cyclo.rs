//! Exact arithmetic in the cyclotomic ring ℤ[ζ₈], ζ₈ = e^{iπ/4}.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// `c[0] + c[1]ζ + c[2]ζ² + c[3]ζ³` with ζ⁴ = −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Cyclo8 {
    pub c: [i64; 4],
}

impl Cyclo8 {
    pub const ZERO: Cyclo8 = Cyclo8 { c: [0; 4] };
    pub const ONE: Cyclo8 = Cyclo8 { c: [1, 0, 0, 0] };

    /// ζ^e for any integer exponent.
    pub fn zeta(e: i64) -> Cyclo8 {
        let e = e.rem_euclid(8) as usize;
        let mut c = [0; 4];
        if e < 4 {
            c[e] = 1;
        } else {
            c[e - 4] = -1;
        }
        Cyclo8 { c }
    }

    pub fn from_int(n: i64) -> Cyclo8 {
        Cyclo8 { c: [n, 0, 0, 0] }
    }

    pub fn is_zero(&self) -> bool {
        self.c == [0; 4]
    }

    /// Multiplication by ζ^e.
    pub fn rotate(self, e: i64) -> Cyclo8 {
        self * Cyclo8::zeta(e)
    }

    /// Returns `(n, e)` with `self = n·ζ^e`, n > 0, if `self` is a single
    /// nonzero monomial.
    pub fn as_monomial(&self) -> Option<(i64, u8)> {
        let nz: Vec<usize> = (0..4).filter(|&k| self.c[k] != 0).collect();
        if nz.len() != 1 {
            return None;
        }
        let k = nz[0];
        let v = self.c[k];
        if v > 0 {
            Some((v, k as u8))
        } else {
            Some((-v, (k + 4) as u8))
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        (0..4)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * k as f64) * self.c[k] as f64)
            .sum()
    }
}

impl Add for Cyclo8 {
    type Output = Cyclo8;
    fn add(self, o: Cyclo8) -> Cyclo8 {
        let mut c = self.c;
        for k in 0..4 {
            c[k] += o.c[k];
        }
        Cyclo8 { c }
    }
}

impl AddAssign for Cyclo8 {
    fn add_assign(&mut self, o: Cyclo8) {
        *self = *self + o;
    }
}

impl Neg for Cyclo8 {
    type Output = Cyclo8;
    fn neg(self) -> Cyclo8 {
        Cyclo8 { c: self.c.map(|v| -v) }
    }
}

impl Sub for Cyclo8 {
    type Output = Cyclo8;
    fn sub(self, o: Cyclo8) -> Cyclo8 {
        self + (-o)
    }
}

impl Mul for Cyclo8 {
    type Output = Cyclo8;
    fn mul(self, o: Cyclo8) -> Cyclo8 {
        let mut c = [0i64; 4];
        for i in 0..4 {
            for j in 0..4 {
                let v = self.c[i] * o.c[j];
                let k = i + j;
                if k < 4 {
                    c[k] += v;
                } else {
                    c[k - 4] -= v;
                }
            }
        }
        Cyclo8 { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_powers_wrap() {
        assert_eq!(Cyclo8::zeta(4), -Cyclo8::ONE);
        assert_eq!(Cyclo8::zeta(8), Cyclo8::ONE);
        assert_eq!(Cyclo8::zeta(3) * Cyclo8::zeta(6), Cyclo8::zeta(1));
        assert_eq!(Cyclo8::zeta(-1), Cyclo8::zeta(7));
    }

    #[test]
    fn monomial_detection() {
        assert_eq!((Cyclo8::zeta(5) * Cyclo8::from_int(3)).as_monomial(), Some((3, 5)));
        assert_eq!((Cyclo8::ONE + Cyclo8::zeta(1)).as_monomial(), None);
        assert_eq!(Cyclo8::ZERO.as_monomial(), None);
    }

    #[test]
    fn complex_embedding_is_a_homomorphism() {
        let a = Cyclo8 { c: [1, -2, 0, 3] };
        let b = Cyclo8 { c: [0, 1, 4, -1] };
        let lhs = (a * b).to_complex();
        let rhs = a.to_complex() * b.to_complex();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
