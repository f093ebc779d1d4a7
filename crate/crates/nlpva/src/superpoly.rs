//! Differential superpolynomials over exact rationals.
//!
//! Generators carry a parity, a filtration degree and a centrality flag
//! (`∂g = 0` for central `g`). A `Variable` is a non-divided derivative
//! `∂^d g`, a `Monomial` a canonically ordered product of variables with
//! Koszul signs absorbed into coefficients, and a `DiffPoly` a sparse
//! rational linear combination of monomials.

use crate::q::{q_display, q_is_negative, Q};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn xor(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn from_odd(odd: bool) -> Parity {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorDecl {
    pub name: String,
    pub parity: Parity,
    pub central: bool,
    pub degree: u32,
}

/// Ordered list of generator declarations; the declaration index is the
/// primary sort key of the canonical monomial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    gens: Vec<GeneratorDecl>,
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("derivation rule parity mismatch on generator `{0}`")]
    DerivationParity(String),
    #[error("{0}")]
    Invalid(String),
}

impl Signature {
    pub fn new(gens: Vec<GeneratorDecl>) -> Result<Self, AlgebraError> {
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(AlgebraError::DuplicateGenerator(g.name.clone()));
            }
        }
        Ok(Signature { gens })
    }

    pub fn gens(&self) -> &[GeneratorDecl] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn decl(&self, idx: usize) -> &GeneratorDecl {
        &self.gens[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn parity(&self, idx: usize) -> Parity {
        self.gens[idx].parity
    }
}

/// `∂^order gen` (non-divided power).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Variable {
    pub gen: usize,
    pub order: u32,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Monomial {
    /// Sorted ascending by (gen, order); even variables may repeat, odd may not.
    pub vars: Vec<Variable>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial { vars: Vec::new() }
    }

    pub fn var(v: Variable) -> Self {
        Monomial { vars: vec![v] }
    }

    pub fn parity(&self, sig: &Signature) -> Parity {
        let odd = self
            .vars
            .iter()
            .filter(|v| sig.parity(v.gen).is_odd())
            .count();
        Parity::from_odd(odd % 2 == 1)
    }

    pub fn grade(&self, sig: &Signature) -> u32 {
        self.vars.iter().map(|v| sig.decl(v.gen).degree).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.vars.is_empty()
    }
}

/// Sorts a variable list into canonical order, tracking the Koszul sign.
/// Returns `None` if an odd variable repeats (the monomial vanishes).
pub fn sort_vars(mut vars: Vec<Variable>, sig: &Signature) -> Option<(Monomial, i32)> {
    let mut sign = 1i32;
    // Insertion sort; lists are short and mostly sorted.
    for i in 1..vars.len() {
        let mut j = i;
        while j > 0 && vars[j - 1] > vars[j] {
            if sig.parity(vars[j - 1].gen).is_odd() && sig.parity(vars[j].gen).is_odd() {
                sign = -sign;
            }
            vars.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in vars.windows(2) {
        if w[0] == w[1] && sig.parity(w[0].gen).is_odd() {
            return None;
        }
    }
    Some((Monomial { vars }, sign))
}

/// Merges two canonical monomials, tracking the Koszul sign of interleaving.
fn mono_mul(a: &Monomial, b: &Monomial, sig: &Signature) -> Option<(Monomial, i32)> {
    let mut vars = Vec::with_capacity(a.vars.len() + b.vars.len());
    vars.extend_from_slice(&a.vars);
    vars.extend_from_slice(&b.vars);
    sort_vars(vars, sig)
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffPoly {
    pub terms: BTreeMap<Monomial, Q>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(Monomial::unit(), c);
        p
    }

    pub fn gen(idx: usize) -> Self {
        DiffPoly::var(Variable { gen: idx, order: 0 })
    }

    pub fn var(v: Variable) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(Monomial::var(v), Q::one());
        p
    }

    pub fn from_mono(m: Monomial, c: Q) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffPoly) -> DiffPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), q * c)).collect(),
        }
    }

    pub fn mul(&self, other: &DiffPoly, sig: &Signature) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, s)) = mono_mul(ma, mb, sig) {
                    let mut c = ca * cb;
                    if s < 0 {
                        c = -c;
                    }
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    /// The derivation ∂: `(g,d) → (g,d+1)`, zero on central generators.
    pub fn partial(&self, sig: &Signature) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for i in 0..m.vars.len() {
                let v = m.vars[i];
                if sig.decl(v.gen).central {
                    continue;
                }
                let mut vars = m.vars.clone();
                vars[i] = Variable { gen: v.gen, order: v.order + 1 };
                // ∂ is even, so only the re-sorting sign (if any) applies.
                if let Some((mono, s)) = sort_vars(vars, sig) {
                    let mut q = c.clone();
                    if s < 0 {
                        q = -q;
                    }
                    out.add_term(mono, q);
                }
            }
        }
        out
    }

    pub fn partial_n(&self, n: u32, sig: &Signature) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            if p.is_zero() {
                break;
            }
            p = p.partial(sig);
        }
        p
    }

    pub fn parity(&self, sig: &Signature) -> Option<Parity> {
        let mut it = self.terms.keys();
        let first = it.next()?.parity(sig);
        for m in it {
            if m.parity(sig) != first {
                return None;
            }
        }
        Some(first)
    }

    pub fn grade(&self, sig: &Signature) -> Option<u32> {
        let mut it = self.terms.keys();
        let first = it.next()?.grade(sig);
        for m in it {
            if m.grade(sig) != first {
                return None;
            }
        }
        Some(first)
    }

    /// Keeps only the monomials of the given filtration degree.
    pub fn grade_part(&self, sig: &Signature, degree: u32) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.grade(sig) == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Quotient map specializing a central generator to a rational multiple
    /// of the unit.
    pub fn substitute_central(&self, gen: usize, value: &Q, sig: &Signature) -> DiffPoly {
        assert!(sig.decl(gen).central, "substitute_central on non-central generator");
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let count = m.vars.iter().filter(|v| v.gen == gen).count() as u32;
            let rest: Vec<Variable> = m.vars.iter().copied().filter(|v| v.gen != gen).collect();
            let mut q = c.clone();
            for _ in 0..count {
                q *= value;
            }
            out.add_term(Monomial { vars: rest }, q);
        }
        out
    }

    /// Total degree in the generators (number of variable factors of the
    /// largest monomial); used for truncation-size heuristics only.
    pub fn max_factors(&self) -> usize {
        self.terms.keys().map(|m| m.vars.len()).max().unwrap_or(0)
    }

    pub fn display(&self, sig: &Signature) -> String {
        DiffPolyDisplay { poly: self, sig }.to_string()
    }
}

/// A derivation defined by its images on generators, extended to all
/// variables by `rule(∂^d g) = ∂^d rule(g)` and to products by the
/// super-Leibniz rule with the declared operator parity.
#[derive(Clone, Debug)]
pub struct DerivationRule {
    pub parity: Parity,
    pub images: BTreeMap<usize, DiffPoly>,
}

impl DerivationRule {
    pub fn new(parity: Parity, images: BTreeMap<usize, DiffPoly>) -> Self {
        DerivationRule { parity, images }
    }

    /// Checks that every nonzero image's parity equals the generator parity
    /// shifted by the operator parity.
    pub fn validate(&self, sig: &Signature) -> Result<(), AlgebraError> {
        for (&g, img) in &self.images {
            if img.is_zero() {
                continue;
            }
            match img.parity(sig) {
                Some(p) if p == sig.parity(g).xor(self.parity) => {}
                _ => return Err(AlgebraError::DerivationParity(sig.decl(g).name.clone())),
            }
        }
        Ok(())
    }

    fn image_of_var(&self, v: Variable, sig: &Signature) -> DiffPoly {
        match self.images.get(&v.gen) {
            None => DiffPoly::zero(),
            Some(img) => img.partial_n(v.order, sig),
        }
    }
}

/// Applies a derivation rule to a polynomial by the super-Leibniz rule.
pub fn apply_derivation(rule: &DerivationRule, p: &DiffPoly, sig: &Signature) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (m, c) in &p.terms {
        for i in 0..m.vars.len() {
            let img = rule.image_of_var(m.vars[i], sig);
            if img.is_zero() {
                continue;
            }
            // Koszul sign: the odd operator crosses the factors before slot i.
            let mut sign = 1i32;
            if rule.parity.is_odd() {
                let crossed = m.vars[..i]
                    .iter()
                    .filter(|v| sig.parity(v.gen).is_odd())
                    .count();
                if crossed % 2 == 1 {
                    sign = -1;
                }
            }
            let prefix = DiffPoly::from_mono(Monomial { vars: m.vars[..i].to_vec() }, Q::one());
            let suffix =
                DiffPoly::from_mono(Monomial { vars: m.vars[i + 1..].to_vec() }, Q::one());
            let mut piece = prefix.mul(&img, sig).mul(&suffix, sig);
            let mut coeff = c.clone();
            if sign < 0 {
                coeff = -coeff;
            }
            piece = piece.scale(&coeff);
            out = out.add(&piece);
        }
    }
    out
}

struct DiffPolyDisplay<'a> {
    poly: &'a DiffPoly,
    sig: &'a Signature,
}

impl fmt::Display for DiffPolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.poly.terms {
            let neg = q_is_negative(c);
            let mag = if neg { -c } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_unit() {
                factors.push(q_display(&mag));
            }
            let mut i = 0;
            while i < m.vars.len() {
                let v = m.vars[i];
                let mut mult = 1;
                while i + mult < m.vars.len() && m.vars[i + mult] == v {
                    mult += 1;
                }
                let base = if v.order == 0 {
                    self.sig.decl(v.gen).name.clone()
                } else {
                    format!("d({},{})", self.sig.decl(v.gen).name, v.order)
                };
                if mult == 1 {
                    factors.push(base);
                } else {
                    factors.push(format!("{base}^{mult}"));
                }
                i += mult;
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q::{qi, qr};

    fn gl_like_sig() -> Signature {
        Signature::new(vec![
            GeneratorDecl { name: "L".into(), parity: Parity::Even, central: false, degree: 1 },
            GeneratorDecl { name: "xi".into(), parity: Parity::Odd, central: false, degree: 1 },
            GeneratorDecl { name: "xibar".into(), parity: Parity::Odd, central: false, degree: 2 },
            GeneratorDecl { name: "K".into(), parity: Parity::Even, central: true, degree: 2 },
        ])
        .unwrap()
    }

    #[test]
    fn odd_square_vanishes() {
        let sig = gl_like_sig();
        let xi = DiffPoly::gen(1);
        assert!(xi.mul(&xi, &sig).is_zero());
    }

    #[test]
    fn koszul_sign_on_odd_swap() {
        let sig = gl_like_sig();
        let xi = DiffPoly::gen(1);
        let xibar = DiffPoly::gen(2);
        let a = xi.mul(&xibar, &sig);
        let b = xibar.mul(&xi, &sig);
        assert_eq!(a, b.neg());
        assert!(!a.is_zero());
    }

    #[test]
    fn even_factors_commute() {
        let sig = gl_like_sig();
        let l = DiffPoly::gen(0);
        let dl = l.partial(&sig);
        assert_eq!(l.mul(&dl, &sig), dl.mul(&l, &sig));
    }

    #[test]
    fn partial_is_a_derivation_and_kills_centrals() {
        let sig = gl_like_sig();
        let k = DiffPoly::gen(3);
        assert!(k.partial(&sig).is_zero());
        let l = DiffPoly::gen(0);
        let ll = l.mul(&l, &sig);
        let expected = l.partial(&sig).mul(&l, &sig).scale(&qi(2));
        assert_eq!(ll.partial(&sig), expected);
        // chained derivative
        let dl = l.partial(&sig);
        assert_eq!(dl.partial(&sig), l.partial_n(2, &sig));
    }

    #[test]
    fn parity_and_grade() {
        let sig = gl_like_sig();
        let xi = DiffPoly::gen(1);
        let xibar = DiffPoly::gen(2);
        let p = xi.mul(&xibar, &sig);
        assert_eq!(p.parity(&sig), Some(Parity::Even));
        assert_eq!(p.grade(&sig), Some(3));
        let mixed = xi.add(&p);
        assert_eq!(mixed.parity(&sig), None);
        assert_eq!(mixed.grade(&sig), None);
        assert_eq!(p.partial(&sig).grade(&sig), Some(3));
    }

    #[test]
    fn odd_derivation_sign() {
        // η̄ with η̄(ξ) = L applied to ξ·ξ̄ must give L·ξ̄ − ξ·η̄(ξ̄).
        let sig = gl_like_sig();
        let mut images = BTreeMap::new();
        images.insert(1usize, DiffPoly::gen(0)); // η̄ξ = L
        images.insert(2usize, DiffPoly::gen(0).scale(&qi(3))); // η̄ξ̄ = 3L (arbitrary even image)
        let rule = DerivationRule::new(Parity::Odd, images);
        rule.validate(&sig).unwrap();
        let xi = DiffPoly::gen(1);
        let xibar = DiffPoly::gen(2);
        let p = xi.mul(&xibar, &sig);
        let got = apply_derivation(&rule, &p, &sig);
        let l = DiffPoly::gen(0);
        let want = l.mul(&xibar, &sig).sub(&xi.mul(&l.scale(&qi(3)), &sig));
        assert_eq!(got, want);
    }

    #[test]
    fn derivation_rule_parity_rejected() {
        let sig = gl_like_sig();
        let mut images = BTreeMap::new();
        images.insert(1usize, DiffPoly::gen(1)); // odd image under declared-odd rule: inconsistent
        let rule = DerivationRule::new(Parity::Odd, images);
        assert!(rule.validate(&sig).is_err());
    }

    #[test]
    fn substitute_central_quotient() {
        let sig = gl_like_sig();
        let k = DiffPoly::gen(3);
        let l = DiffPoly::gen(0);
        let p = k.mul(&k, &sig).mul(&l, &sig).add(&k.scale(&qi(3)));
        let got = p.substitute_central(3, &qr(1, 2), &sig);
        let want = l.scale(&qr(1, 4)).add(&DiffPoly::constant(qr(3, 2)));
        assert_eq!(got, want);
    }

    #[test]
    fn display_round_shapes() {
        let sig = gl_like_sig();
        let l = DiffPoly::gen(0);
        let p = l.mul(&l, &sig).scale(&qr(-3, 2)).add(&l.partial(&sig));
        let s = p.display(&sig);
        assert_eq!(s, "-3/2*L^2 + d(L,1)");
    }
}
