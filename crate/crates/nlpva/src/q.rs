//! Exact rational scalars and small combinatorial helpers.
//!
//! Everything downstream computes over `Q = BigRational`; there is no
//! floating point anywhere in the engine.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Q = num_rational::BigRational;

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational `p/q`.
pub fn qr(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

/// `n!` as a rational.
pub fn factorial(n: u32) -> Q {
    let mut acc = BigInt::one();
    for t in 2..=n as u64 {
        acc *= t;
    }
    Q::from_integer(acc)
}

/// Generalized binomial coefficient `binom(n, k) = n(n-1)...(n-k+1)/k!`
/// for an arbitrary integer upper argument, including negative `n`.
pub fn binom(n: i64, k: u32) -> Q {
    let mut num = BigInt::one();
    for t in 0..k as i64 {
        num *= BigInt::from(n - t);
    }
    Q::new(num, factorial(k).to_integer())
}

/// Renders a rational the way the expression grammar reads them:
/// `3`, `-3`, `1/2`, `-5/12`.
pub fn q_display(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// True if `x` is a (possibly negative) integer.
pub fn q_is_integer(x: &Q) -> bool {
    x.denom().is_one() || x.numer().is_zero()
}

/// Signum helper used when pretty-printing sums.
pub fn q_is_negative(x: &Q) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binom(5, 2), qi(10));
        assert_eq!(binom(0, 0), qi(1));
        assert_eq!(binom(3, 5), qi(0));
        // negative upper argument: binom(-1, k) = (-1)^k
        for k in 0..8 {
            assert_eq!(binom(-1, k), qi(if k % 2 == 0 { 1 } else { -1 }));
        }
        // binom(-2, 3) = (-2)(-3)(-4)/6 = -4
        assert_eq!(binom(-2, 3), qi(-4));
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), qi(1));
        assert_eq!(factorial(5), qi(120));
    }

    #[test]
    fn display_forms() {
        assert_eq!(q_display(&qr(-5, 10)), "-1/2");
        assert_eq!(q_display(&qi(7)), "7");
    }
}
