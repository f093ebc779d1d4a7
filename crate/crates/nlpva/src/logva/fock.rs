//! Free-boson Fock space: polynomials in `K, x_0, x_1, …` with the mode
//! action of the generator `x_0`, its braiding map, and the Borcherds
//! identity checker at `n = 0`.

use crate::binom::binom_poly;
use crate::q::{qi, qr, Q};
use crate::report::{params, VerificationReport};
use std::collections::BTreeMap;

/// A monomial `K^s · Π x_n^{e_n}` (all variables even).
pub type FockMono = (u32, BTreeMap<u32, u32>);

/// Sparse rational polynomial in `K, x_0, x_1, …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockState(pub BTreeMap<FockMono, Q>);

/// Which free-boson algebra: the plain one (trivial induced bracket) or the
/// central extension with `K` adjoined at filtration degree one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FbVariant {
    Plain,
    WithK,
}

impl FockState {
    pub fn zero() -> Self {
        FockState(BTreeMap::new())
    }

    /// The vacuum `1`.
    pub fn vac() -> Self {
        FockState::mono(0, &[], qi(1))
    }

    pub fn k() -> Self {
        FockState::mono(1, &[], qi(1))
    }

    pub fn x(n: u32) -> Self {
        FockState::mono(0, &[(n, 1)], qi(1))
    }

    pub fn mono(k_pow: u32, xs: &[(u32, u32)], c: Q) -> Self {
        let mut m = BTreeMap::new();
        for &(n, e) in xs {
            if e > 0 {
                *m.entry(n).or_insert(0) += e;
            }
        }
        let mut s = BTreeMap::new();
        if c != qi(0) {
            s.insert((k_pow, m), c);
        }
        FockState(s)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &FockState) -> FockState {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            let slot = out.entry(m.clone()).or_insert_with(|| qi(0));
            *slot += c.clone();
            if *slot == qi(0) {
                out.remove(m);
            }
        }
        FockState(out)
    }

    pub fn scale(&self, q: &Q) -> FockState {
        if *q == qi(0) {
            return FockState::zero();
        }
        FockState(self.0.iter().map(|(m, c)| (m.clone(), c.clone() * q.clone())).collect())
    }

    pub fn neg(&self) -> FockState {
        self.scale(&qi(-1))
    }

    pub fn mul(&self, other: &FockState) -> FockState {
        let mut out: BTreeMap<FockMono, Q> = BTreeMap::new();
        for ((k1, xs1), c1) in &self.0 {
            for ((k2, xs2), c2) in &other.0 {
                let mut xs = xs1.clone();
                for (n, e) in xs2 {
                    *xs.entry(*n).or_insert(0) += e;
                }
                let key = (k1 + k2, xs);
                let slot = out.entry(key.clone()).or_insert_with(|| qi(0));
                *slot += c1.clone() * c2.clone();
                if *slot == qi(0) {
                    out.remove(&key);
                }
            }
        }
        FockState(out)
    }

    /// `∂/∂x_n`.
    pub fn partial_x(&self, n: u32) -> FockState {
        let mut out = FockState::zero();
        for ((k, xs), c) in &self.0 {
            if let Some(&e) = xs.get(&n) {
                let mut m = xs.clone();
                if e == 1 {
                    m.remove(&n);
                } else {
                    m.insert(n, e - 1);
                }
                out = out.add(&FockState(BTreeMap::from([((*k, m), c.clone() * qi(e as i64))])));
            }
        }
        out
    }

    /// Translation operator: `T(1) = T(K) = 0`, `T(x_n) = (n+1)x_{n+1}`,
    /// extended as a derivation.
    pub fn t_apply(&self) -> FockState {
        let mut out = FockState::zero();
        for ((k, xs), c) in &self.0 {
            for (&n, &e) in xs {
                let mut m = xs.clone();
                if e == 1 {
                    m.remove(&n);
                } else {
                    m.insert(n, e - 1);
                }
                *m.entry(n + 1).or_insert(0) += 1;
                out = out.add(&FockState(BTreeMap::from([(
                    (*k, m),
                    c.clone() * qi(e as i64) * qi(n as i64 + 1),
                )])));
            }
        }
        out
    }

    /// Filtration degree of a monomial: total degree in `{K, x_n}`.
    pub fn max_degree(&self) -> u32 {
        self.0
            .keys()
            .map(|(k, xs)| k + xs.values().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// The part of the state of exact filtration degree `d`.
    pub fn degree_part(&self, d: u32) -> FockState {
        FockState(
            self.0
                .iter()
                .filter(|((k, xs), _)| k + xs.values().sum::<u32>() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        )
    }

    /// Largest index `n` with `x_n` occurring.
    pub fn max_x_index(&self) -> u32 {
        self.0
            .keys()
            .filter_map(|(_, xs)| xs.keys().max().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn display(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for ((k, xs), c) in &self.0 {
            let mut s = crate::q::q_display(c);
            if *k > 0 {
                s.push_str(&format!("*K^{}", k));
            }
            for (n, e) in xs {
                s.push_str(&format!("*x{}^{}", n, e));
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

/// Mode action of the generator `x_0`: for `n ≤ −1` multiplication by
/// `x_{−n−1}`; for `n ≥ 0` the annihilator `−1/(n+1)·K·∂/∂x_{n+1}` (without
/// the `K` factor in the plain variant).
pub fn fb_mode_apply(variant: FbVariant, n: i64, s: &FockState) -> FockState {
    if n <= -1 {
        FockState::x((-n - 1) as u32).mul(s)
    } else {
        let d = s.partial_x(n as u32 + 1).scale(&qr(-1, n + 1));
        match variant {
            FbVariant::Plain => d,
            FbVariant::WithK => FockState::k().mul(&d),
        }
    }
}

/// The braiding map as a list of operator pairs `(φ_i, ψ_i)` acting on a
/// tensor component: `S = −½K∂_{x0}⊗∂_{x0} − ½∂_{x0}⊗K∂_{x0}` (with `K`
/// omitted in the plain variant, where `S = −∂_{x0}⊗∂_{x0}`).
pub fn fb_braiding(variant: FbVariant, a: &FockState, b: &FockState) -> Vec<(FockState, FockState)> {
    let da = a.partial_x(0);
    let db = b.partial_x(0);
    let mut out = Vec::new();
    match variant {
        FbVariant::Plain => {
            if !da.is_zero() && !db.is_zero() {
                out.push((da.neg(), db));
            }
        }
        FbVariant::WithK => {
            let k = FockState::k();
            if !da.is_zero() && !db.is_zero() {
                out.push((k.mul(&da).scale(&qr(-1, 2)), db.clone()));
                out.push((da.scale(&qr(-1, 2)), k.mul(&db)));
            }
        }
    }
    out
}

/// `μ_(n)(a⊗b)` for first-slot states that are polynomials in `K` times at
/// most one factor of `x_0`: central monomials act as `δ_{n,−1}`·multiplication
/// and `x_0` acts through `fb_mode_apply`. Other first slots are out of scope.
pub fn fb_mu(variant: FbVariant, n: i64, a: &FockState, b: &FockState) -> Result<FockState, String> {
    let mut out = FockState::zero();
    for ((k, xs), c) in &a.0 {
        let central = FockState::mono(*k, &[], c.clone());
        if xs.is_empty() {
            // K^s-multiple of the vacuum.
            if n == -1 {
                out = out.add(&central.mul(b));
            }
        } else if xs.len() == 1 && xs == &BTreeMap::from([(0u32, 1u32)]) {
            out = out.add(&central.mul(&fb_mode_apply(variant, n, b)));
        } else {
            return Err(format!(
                "mode of non-generator state K^{}·{:?} is not defined",
                k, xs
            ));
        }
    }
    Ok(out)
}

/// Coefficient of `ζ^i z^{−n−1}` in `Y(x_0, z)s`: `((−1)^i/i!)·μ_(n)(S^i(x_0⊗s))`.
pub fn fb_zeta_coeff(variant: FbVariant, i: u32, n: i64, s: &FockState) -> Result<FockState, String> {
    let mut tensors = vec![(FockState::x(0), s.clone())];
    for _ in 0..i {
        let mut next = Vec::new();
        for (a, b) in &tensors {
            next.extend(fb_braiding(variant, a, b));
        }
        tensors = next;
    }
    let mut out = FockState::zero();
    for (a, b) in &tensors {
        out = out.add(&fb_mu(variant, n, a, b)?);
    }
    let sign = if i % 2 == 0 { qi(1) } else { qi(-1) };
    Ok(out.scale(&(sign / crate::q::factorial(i))))
}

type Tensor3 = (FockState, FockState, FockState);

fn s12(variant: FbVariant, ts: &[Tensor3]) -> Vec<Tensor3> {
    let mut out = Vec::new();
    for (a, b, c) in ts {
        for (fa, fb) in fb_braiding(variant, a, b) {
            out.push((fa, fb, c.clone()));
        }
    }
    out
}

fn s13(variant: FbVariant, ts: &[Tensor3]) -> Vec<Tensor3> {
    let mut out = Vec::new();
    for (a, b, c) in ts {
        for (fa, fc) in fb_braiding(variant, a, c) {
            out.push((fa, b.clone(), fc));
        }
    }
    out
}

/// Apply the operator polynomial `binom(m + S, j)` (in the nilpotent braiding
/// action `S` on the given pair of slots) to a list of tensors.
fn binom_s_apply(
    variant: FbVariant,
    m: i64,
    j: u32,
    ts: Vec<Tensor3>,
    slots: fn(FbVariant, &[Tensor3]) -> Vec<Tensor3>,
) -> Vec<Tensor3> {
    let poly = binom_poly(m, j);
    let mut out = Vec::new();
    let mut power = ts;
    let mut i = 0usize;
    loop {
        let c = poly.coeff(i);
        if c != qi(0) {
            for (a, b, cc) in &power {
                out.push((a.scale(&c), b.clone(), cc.clone()));
            }
        }
        i += 1;
        if poly.degree().map_or(true, |d| i > d) || power.is_empty() {
            break;
        }
        power = slots(variant, &power);
    }
    out
}

/// The Borcherds identity at `n = 0` applied to `x_0 ⊗ x_0 ⊗ s`.
pub fn fb_borcherds_n0_check(
    variant: FbVariant,
    m: i64,
    k: i64,
    s: &FockState,
) -> VerificationReport {
    let name = match variant {
        FbVariant::Plain => "free-boson",
        FbVariant::WithK => "free-boson-K",
    };
    let ps = params([
        ("m", m.to_string()),
        ("k", k.to_string()),
        ("state", s.display()),
    ]);
    // A safe truncation bound for the j-sums: beyond it every annihilator
    // mode and every nilpotent braiding correction vanishes.
    let jmax = (s.max_x_index() as i64 + m.abs() + k.abs() + 4) as u32;
    let base = vec![(FockState::x(0), FockState::x(0), s.clone())];
    let run = |mu_outer_n: fn(i64, i64, u32) -> i64,
               mu_inner_n: fn(i64, i64, u32) -> i64,
               swap: bool,
               sign_j: bool|
     -> Result<FockState, String> {
        let mut acc = FockState::zero();
        for j in 0..=jmax {
            let ts = if swap {
                let swapped: Vec<Tensor3> =
                    base.iter().map(|(a, b, c)| (b.clone(), a.clone(), c.clone())).collect();
                binom_s_apply(variant, 0, j, swapped, s12)
            } else {
                binom_s_apply(variant, 0, j, base.clone(), s12)
            };
            let sgn = if sign_j && j % 2 == 1 { qi(-1) } else { qi(1) };
            for (a, b, c) in ts {
                let inner = fb_mu(variant, mu_inner_n(m, k, j), &b, &c)?;
                let outer = fb_mu(variant, mu_outer_n(m, k, j), &a, &inner)?;
                acc = acc.add(&outer.scale(&sgn));
            }
        }
        Ok(acc)
    };
    // LHS = Σ_j (−1)^j μ_(m−j)(I⊗μ_(k+j)) binom(S₁₂, j)
    //     − Σ_j (−1)^j μ_(k−j)(I⊗μ_(m+j)) binom(S₁₂, j) P₁₂.
    let lhs1 = run(|m, _, j| m - j as i64, |_, k, j| k + j as i64, false, true);
    let lhs2 = run(|_, k, j| k - j as i64, |m, _, j| m + j as i64, true, true);
    // RHS = Σ_j μ_(m+k−j)(μ_(j)⊗I) binom(m+S₁₃, j).
    let rhs = (|| -> Result<FockState, String> {
        let mut acc = FockState::zero();
        for j in 0..=jmax {
            let ts = binom_s_apply(variant, m, j, base.clone(), s13);
            for (a, b, c) in ts {
                let inner = fb_mu(variant, j as i64, &a, &b)?;
                let outer = fb_mu(variant, m + k - j as i64, &inner, &c)?;
                acc = acc.add(&outer);
            }
        }
        Ok(acc)
    })();
    match (lhs1, lhs2, rhs) {
        (Ok(l1), Ok(l2), Ok(r)) => {
            let lhs = l1.add(&l2.neg());
            if lhs == r {
                VerificationReport::pass("borcherds-n0", name, ps)
            } else {
                VerificationReport::fail(
                    "borcherds-n0",
                    name,
                    ps,
                    crate::report::Counterexample {
                        component: "identity".into(),
                        exponents: vec![m, k],
                        lhs: lhs.display(),
                        rhs: r.display(),
                    },
                )
            }
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => VerificationReport::fail(
            "borcherds-n0",
            name,
            ps,
            crate::report::Counterexample {
                component: "out-of-scope".into(),
                exponents: vec![m, k],
                lhs: e,
                rhs: String::new(),
            },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_action_basics() {
        // n = −1 on vac → x₀.
        assert_eq!(fb_mode_apply(FbVariant::WithK, -1, &FockState::vac()), FockState::x(0));
        // n = 0 on x₁ → −K; on x₀ → 0.
        assert_eq!(
            fb_mode_apply(FbVariant::WithK, 0, &FockState::x(1)),
            FockState::k().neg()
        );
        assert!(fb_mode_apply(FbVariant::WithK, 0, &FockState::x(0)).is_zero());
    }

    #[test]
    fn zeta_coefficients() {
        // i = 0 reduces to the plain mode action.
        let s = FockState::x(0).mul(&FockState::x(2));
        assert_eq!(
            fb_zeta_coeff(FbVariant::WithK, 0, -2, &s).unwrap(),
            fb_mode_apply(FbVariant::WithK, -2, &s)
        );
        // i = 1, n = −1 on x₀ → K (the ζ-term K∂_{x0} of the field).
        assert_eq!(
            fb_zeta_coeff(FbVariant::WithK, 1, -1, &FockState::x(0)).unwrap(),
            FockState::k()
        );
        // i = 2 vanishes by nilpotence of the braiding.
        assert!(fb_zeta_coeff(FbVariant::WithK, 2, -1, &FockState::x(0)).unwrap().is_zero());
    }

    #[test]
    fn translation_covariance_on_samples() {
        // [T, mode(n)]s = −n μ_(n−1)(x₀⊗s) − μ_(n−1)(S(x₀⊗s)).
        let samples = [
            FockState::vac(),
            FockState::x(0),
            FockState::x(1).mul(&FockState::x(0)),
            FockState::k().mul(&FockState::x(2)),
        ];
        for s in &samples {
            for n in -3..=3i64 {
                let lhs = fb_mode_apply(FbVariant::WithK, n, s)
                    .t_apply()
                    .add(&fb_mode_apply(FbVariant::WithK, n, &s.t_apply()).neg());
                let mut rhs = fb_mode_apply(FbVariant::WithK, n - 1, s).scale(&qi(-n));
                for (a, b) in fb_braiding(FbVariant::WithK, &FockState::x(0), s) {
                    rhs = rhs.add(&fb_mu(FbVariant::WithK, n - 1, &a, &b).unwrap().neg());
                }
                assert_eq!(lhs, rhs, "n={n} s={}", s.display());
            }
        }
    }

    #[test]
    fn borcherds_small() {
        let s = FockState::x(0);
        for (m, k) in [(0, 0), (1, -1), (-2, 1), (2, -3)] {
            let rep = fb_borcherds_n0_check(FbVariant::WithK, m, k, &s);
            assert!(rep.is_pass(), "{}", rep.to_line());
        }
    }
}
