//! Binomial coefficients with polynomial upper argument.
//!
//! `binom_poly(m, j)` is the exact rational polynomial
//! `binom(x + m, j) = (x+m)(x+m-1)...(x+m-j+1)/j!` in the indeterminate `x`.
//! These polynomials drive the identities used when a nilpotent operator is
//! substituted for `x`, and `lemma_check` verifies the four expansion facts
//! the mode-algebra derivation relies on:
//!
//! 1. `binom(x, j) = ((-1)^{j-1}/j) x + O(x^2)` for `j > 0`;
//! 2. `binom(m + x, j) = binom(m, j) + O(x)` for `0 <= j <= m`;
//! 3. `binom(m + x, j) = ((-1)^{j+m+1}/(j binom(j-1, m))) x + O(x^2)` for
//!    `0 <= m < j`;
//! 4. `sum_{l=0}^m (-1)^l binom(m, l)/(l+n+1) = 1/((n+m+1) binom(n+m, m))`.

use crate::q::{binom, factorial, q_display, qi, Q};
use crate::report::{params, Counterexample, VerificationReport};
use num_traits::Zero;

/// Dense polynomial over `Q`; index = power of `x`. Trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(pub Vec<Q>);

impl QPoly {
    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        if c.is_zero() {
            QPoly::zero()
        } else {
            QPoly(vec![c])
        }
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    fn trim(mut self) -> Self {
        while self.0.last().map_or(false, |c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.0.is_empty() || other.0.is_empty() {
            return QPoly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly(out).trim()
    }

    pub fn scale(&self, c: &Q) -> QPoly {
        QPoly(self.0.iter().map(|a| a * c).collect()).trim()
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// `binom(x + m, j)` as an exact polynomial in `x`.
pub fn binom_poly(m: i64, j: u32) -> QPoly {
    // Product of the linear factors (x + m - t), t = 0..j-1, divided by j!.
    let mut acc = QPoly(vec![qi(1)]);
    for t in 0..j as i64 {
        acc = acc.mul(&QPoly(vec![qi(m - t), qi(1)]));
    }
    acc.scale(&factorial(j).recip())
}

/// Verifies one of the four binomial-expansion facts over the given ranges.
///
/// * item 1: all `1 <= j <= max_j`;
/// * item 2: all `0 <= j <= m <= max_m`;
/// * item 3: all `0 <= m < j <= max_j` (with `m <= max_m`);
/// * item 4: all `0 <= m <= max_m`, `0 <= n <= max_j` (reusing `max_j` as the
///   `n` bound).
pub fn lemma_check(item: u8, max_m: i64, max_j: u32) -> VerificationReport {
    let ps = params([
        ("item", item.to_string()),
        ("max_m", max_m.to_string()),
        ("max_j", max_j.to_string()),
    ]);
    let fail = |component: String, exponents: Vec<i64>, lhs: Q, rhs: Q| {
        VerificationReport::fail(
            "binom_lemma",
            "-",
            params([
                ("item", item.to_string()),
                ("max_m", max_m.to_string()),
                ("max_j", max_j.to_string()),
            ]),
            Counterexample {
                component,
                exponents,
                lhs: q_display(&lhs),
                rhs: q_display(&rhs),
            },
        )
    };
    match item {
        1 => {
            for j in 1..=max_j {
                let p = binom_poly(0, j);
                let want = qi(if j % 2 == 1 { 1 } else { -1 }) / qi(j as i64);
                if !p.coeff(0).is_zero() {
                    return fail("constant-term".into(), vec![j as i64], p.coeff(0), Q::zero());
                }
                if p.coeff(1) != want {
                    return fail("linear-term".into(), vec![j as i64], p.coeff(1), want);
                }
            }
        }
        2 => {
            for m in 0..=max_m {
                for j in 0..=(m.min(max_j as i64)) as u32 {
                    let p = binom_poly(m, j);
                    let want = binom(m, j);
                    if p.coeff(0) != want {
                        return fail("constant-term".into(), vec![m, j as i64], p.coeff(0), want);
                    }
                }
            }
        }
        3 => {
            for m in 0..=max_m {
                for j in (m + 1) as u32..=max_j {
                    let p = binom_poly(m, j);
                    if !p.coeff(0).is_zero() {
                        return fail("constant-term".into(), vec![m, j as i64], p.coeff(0), Q::zero());
                    }
                    let sign = qi(if (j as i64 + m + 1) % 2 == 0 { 1 } else { -1 });
                    let want = sign / (qi(j as i64) * binom(j as i64 - 1, m as u32));
                    if p.coeff(1) != want {
                        return fail("linear-term".into(), vec![m, j as i64], p.coeff(1), want);
                    }
                }
            }
        }
        4 => {
            for m in 0..=max_m {
                for n in 0..=max_j as i64 {
                    let mut lhs = Q::zero();
                    for l in 0..=m {
                        let sign = qi(if l % 2 == 0 { 1 } else { -1 });
                        lhs += sign * binom(m, l as u32) / qi(l + n + 1);
                    }
                    let rhs = (qi(n + m + 1) * binom(n + m, m as u32)).recip();
                    if lhs != rhs {
                        return fail("alternating-sum".into(), vec![m, n], lhs, rhs);
                    }
                }
            }
        }
        _ => {
            return fail("item-out-of-range".into(), vec![item as i64], Q::zero(), Q::zero());
        }
    }
    VerificationReport::pass("binom_lemma", "-", ps)
}
