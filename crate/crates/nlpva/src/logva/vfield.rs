//! Concrete realization of the centerless Virasoro mode relations by
//! vector fields `L_n = −t^{3+n}·(t−D)^{−2}·d/dt` acting on Laurent
//! polynomials in `t` with coefficients in `Q[D]/(D^N)`, where
//! `(t−D)^{−2} = Σ_{j=0}^{N−1}(j+1)t^{−2−j}D^j`.

use crate::q::{qi, Q};
use crate::report::{params, Counterexample, VerificationReport};
use std::collections::BTreeMap;

/// Laurent polynomial `Σ c_{i,p} t^i D^p` with `D^N = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VfState {
    pub terms: BTreeMap<(i64, u32), Q>,
    pub nil_order: u32,
}

impl VfState {
    pub fn zero(nil_order: u32) -> Self {
        VfState { terms: BTreeMap::new(), nil_order }
    }

    pub fn mono(nil_order: u32, t_exp: i64, d_pow: u32, c: Q) -> Self {
        let mut s = VfState::zero(nil_order);
        if d_pow < nil_order && c != qi(0) {
            s.terms.insert((t_exp, d_pow), c);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &VfState) -> VfState {
        assert_eq!(self.nil_order, other.nil_order);
        let mut out = self.terms.clone();
        for (m, c) in &other.terms {
            let slot = out.entry(*m).or_insert_with(|| qi(0));
            *slot += c.clone();
            if *slot == qi(0) {
                out.remove(m);
            }
        }
        VfState { terms: out, nil_order: self.nil_order }
    }

    pub fn scale(&self, q: &Q) -> VfState {
        if *q == qi(0) {
            return VfState::zero(self.nil_order);
        }
        VfState {
            terms: self.terms.iter().map(|(m, c)| (*m, c.clone() * q.clone())).collect(),
            nil_order: self.nil_order,
        }
    }

    pub fn neg(&self) -> VfState {
        self.scale(&qi(-1))
    }

    /// Multiply by `D^j` (truncating at `D^N = 0`).
    pub fn mul_d_pow(&self, j: u32) -> VfState {
        let mut out = VfState::zero(self.nil_order);
        for ((i, p), c) in &self.terms {
            if p + j < self.nil_order {
                out.terms.insert((*i, p + j), c.clone());
            }
        }
        out
    }

    /// `d/dt`.
    pub fn ddt(&self) -> VfState {
        let mut out = VfState::zero(self.nil_order);
        for ((i, p), c) in &self.terms {
            if *i != 0 {
                out.terms.insert((i - 1, *p), c.clone() * qi(*i));
            }
        }
        out
    }

    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|((i, p), c)| format!("{}*t^{}*D^{}", crate::q::q_display(c), i, p))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Apply `L_n = −t^{3+n}·Σ_{j<N}(j+1)t^{−2−j}D^j·d/dt`.
pub fn vf_l_mode(n: i64, s: &VfState) -> VfState {
    let ds = s.ddt();
    let mut out = VfState::zero(s.nil_order);
    for j in 0..s.nil_order {
        let mut term = ds.mul_d_pow(j).scale(&qi(-(j as i64 + 1)));
        term = VfState {
            terms: term.terms.into_iter().map(|((i, p), c)| ((i + 1 + n - j as i64, p), c)).collect(),
            nil_order: s.nil_order,
        };
        out = out.add(&term);
    }
    out
}

/// Verify on one state: `[L_m, L_k] = (m−k)·Σ_{j<N}(j+1)·L_{m+k−j}·D^j`
/// (the mode relation with vanishing central charge) and `[D, L_n] = 0`.
pub fn vector_field_check(m: i64, k: i64, s: &VfState) -> VerificationReport {
    let ps = params([
        ("m", m.to_string()),
        ("k", k.to_string()),
        ("state", s.display()),
        ("nil-order", s.nil_order.to_string()),
    ]);
    let lhs = vf_l_mode(m, &vf_l_mode(k, s)).add(&vf_l_mode(k, &vf_l_mode(m, s)).neg());
    let mut rhs = VfState::zero(s.nil_order);
    for j in 0..s.nil_order {
        rhs = rhs.add(&vf_l_mode(m + k - j as i64, &s.mul_d_pow(j)).scale(&qi((m - k) * (j as i64 + 1))));
    }
    if lhs != rhs {
        return VerificationReport::fail(
            "vector-field",
            "virasoro-vector-fields",
            ps,
            Counterexample {
                component: "commutator".into(),
                exponents: vec![m, k],
                lhs: lhs.display(),
                rhs: rhs.display(),
            },
        );
    }
    for n in [m, k] {
        let dl = vf_l_mode(n, s).mul_d_pow(1);
        let ld = vf_l_mode(n, &s.mul_d_pow(1));
        if dl != ld {
            return VerificationReport::fail(
                "vector-field",
                "virasoro-vector-fields",
                ps,
                Counterexample {
                    component: "d-commutes".into(),
                    exponents: vec![n],
                    lhs: dl.display(),
                    rhs: ld.display(),
                },
            );
        }
    }
    VerificationReport::pass("vector-field", "virasoro-vector-fields", ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witt_at_nil_order_one() {
        // N = 1 collapses to L_n = −t^{n+1} d/dt, the Witt realization.
        let s = VfState::mono(1, 5, 0, qi(1));
        let l = vf_l_mode(2, &s);
        assert_eq!(l, VfState::mono(1, 7, 0, qi(-5)));
        for m in -3..=3 {
            for k in -3..=3 {
                let rep = vector_field_check(m, k, &s);
                assert!(rep.is_pass(), "{}", rep.to_line());
            }
        }
    }

    #[test]
    fn nilpotent_orders() {
        for nil in 2..=4u32 {
            for a in [-2i64, 0, 3] {
                for p in 0..nil.min(2) {
                    let s = VfState::mono(nil, a, p, qi(1));
                    for (m, k) in [(1, -1), (-2, 3), (2, 2), (0, -3)] {
                        let rep = vector_field_check(m, k, &s);
                        assert!(rep.is_pass(), "{}", rep.to_line());
                    }
                }
            }
        }
    }
}
