//! Truncated formal Laurent series with `DiffPoly` coefficients, the
//! non-local expansion `(λ+∂)^n`, and the seven-component canonical form of
//! the two-variable space `V_{λ,μ}` with its three iterated-expansion
//! embeddings.
//!
//! Truncation contract: every series and grid carries explicit floors; a
//! coefficient below a floor is *unknown*, not zero. Arithmetic never
//! fabricates coefficients below a floor, and comparisons are restricted to
//! the intersection of trusted windows.

use crate::q::{binom, Q};
use crate::superpoly::{DiffPoly, Signature};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Series variable tag. `Nu` stands for the composite variable λ+μ.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SVar {
    Lambda,
    Mu,
    Nu,
}

impl SVar {
    pub fn name(self) -> &'static str {
        match self {
            SVar::Lambda => "lambda",
            SVar::Mu => "mu",
            SVar::Nu => "lambda+mu",
        }
    }
}

/// One-variable truncated Laurent series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    pub var: SVar,
    pub floor: i64,
    pub coeffs: BTreeMap<i64, DiffPoly>,
}

impl LaurentSeries {
    pub fn zero(var: SVar, floor: i64) -> Self {
        LaurentSeries { var, floor, coeffs: BTreeMap::new() }
    }

    pub fn add_coeff(&mut self, exp: i64, p: DiffPoly) {
        if exp < self.floor || p.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(exp).or_insert_with(DiffPoly::zero);
        *slot = slot.add(&p);
        if slot.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: i64) -> DiffPoly {
        self.coeffs.get(&exp).cloned().unwrap_or_else(DiffPoly::zero)
    }

    pub fn top_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        assert_eq!(self.var, other.var, "series variable mismatch");
        let mut out = LaurentSeries::zero(self.var, self.floor.max(other.floor));
        for (e, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            out.add_coeff(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> LaurentSeries {
        LaurentSeries {
            var: self.var,
            floor: self.floor,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn scale(&self, q: &Q) -> LaurentSeries {
        if q.is_zero() {
            return LaurentSeries::zero(self.var, self.floor);
        }
        LaurentSeries {
            var: self.var,
            floor: self.floor,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.scale(q))).collect(),
        }
    }

    /// Coefficientwise right multiplication by a polynomial.
    pub fn mul_poly_right(&self, p: &DiffPoly, sig: &Signature) -> LaurentSeries {
        let mut out = LaurentSeries::zero(self.var, self.floor);
        for (e, c) in &self.coeffs {
            out.add_coeff(*e, c.mul(p, sig));
        }
        out
    }

    /// Coefficientwise left multiplication by a polynomial.
    pub fn mul_poly_left(&self, p: &DiffPoly, sig: &Signature) -> LaurentSeries {
        let mut out = LaurentSeries::zero(self.var, self.floor);
        for (e, c) in &self.coeffs {
            out.add_coeff(*e, p.mul(c, sig));
        }
        out
    }

    /// Multiplication by `(−λ)^d` (sesqui-linearity in the first slot).
    pub fn mul_neg_var_pow(&self, d: u32) -> LaurentSeries {
        let sign_flip = d % 2 == 1;
        let mut out = LaurentSeries::zero(self.var, self.floor + d as i64);
        for (e, c) in &self.coeffs {
            out.add_coeff(*e + d as i64, if sign_flip { c.neg() } else { c.clone() });
        }
        out
    }

    /// Multiplication by `(λ+∂)^e`. The output is trusted only down to
    /// `floor + e`; callers wanting depth `f` must supply input at `f − e`.
    pub fn mul_var_partial_pow(&self, e: u32, sig: &Signature) -> LaurentSeries {
        let mut out = LaurentSeries::zero(self.var, self.floor + e as i64);
        for (exp, c) in &self.coeffs {
            // (λ+∂)^e c λ^exp = Σ_i binom(e,i) λ^{exp+e−i} ∂^i c
            let mut dc = c.clone();
            for i in 0..=e {
                if i > 0 {
                    dc = dc.partial(sig);
                    if dc.is_zero() {
                        break;
                    }
                }
                out.add_coeff(exp + (e - i) as i64, dc.scale(&binom(e as i64, i)));
            }
        }
        out
    }

    /// The arrow expansion `Σ_m c_m (λ+∂)^m x` where ∂ applies to `x` only:
    /// coefficient of λ^{m−k} receives `binom(m,k) c_m · ∂^k x`.
    pub fn arrow_apply(&self, x: &DiffPoly, sig: &Signature) -> LaurentSeries {
        let mut out = LaurentSeries::zero(self.var, self.floor);
        for (m, c) in &self.coeffs {
            let mut dx = x.clone();
            let mut k: i64 = 0;
            while *m - k >= self.floor {
                if k > 0 {
                    dx = dx.partial(sig);
                }
                if dx.is_zero() {
                    break;
                }
                let b = binom(*m, k as u32);
                if !b.is_zero() {
                    out.add_coeff(m - k, c.mul(&dx, sig).scale(&b));
                }
                k += 1;
            }
        }
        out
    }

    /// The substitution λ ↦ −λ−∂ with ∂ acting on everything to the right:
    /// coefficient of λ^m becomes `Σ_{k≥0} binom(m+k,k) (−1)^{m+k} ∂^k c_{m+k}`.
    /// Exact on the trusted window: the output coefficient at `m ≥ floor`
    /// only consumes input coefficients at exponents `≥ m`.
    pub fn substitute_neg_var_partial(&self, sig: &Signature) -> LaurentSeries {
        let mut out = LaurentSeries::zero(self.var, self.floor);
        let top = match self.top_exp() {
            None => return out,
            Some(t) => t,
        };
        let mut m = self.floor;
        while m <= top {
            let mut acc = DiffPoly::zero();
            for k in 0..=(top - m) {
                let c = match self.coeffs.get(&(m + k)) {
                    None => continue,
                    Some(c) => c,
                };
                let sign = if (m + k) % 2 == 0 { 1 } else { -1 };
                let b = binom(m + k, k as u32) * Q::from_integer(sign.into());
                acc = acc.add(&c.partial_n(k as u32, sig).scale(&b));
            }
            out.add_coeff(m, acc);
            m += 1;
        }
        out
    }

    /// First mismatching coefficient on the common trusted window, if any.
    pub fn first_mismatch(&self, other: &LaurentSeries) -> Option<(i64, DiffPoly, DiffPoly)> {
        assert_eq!(self.var, other.var, "series variable mismatch");
        let floor = self.floor.max(other.floor);
        let mut exps: Vec<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .filter(|e| *e >= floor)
            .collect();
        exps.sort_unstable();
        exps.dedup();
        for e in exps {
            let a = self.coeff(e);
            let b = other.coeff(e);
            if a != b {
                return Some((e, a, b));
            }
        }
        None
    }

    /// Polynomial (non-negative) part as `(exponent, coefficient)` pairs.
    pub fn nonneg_part(&self) -> Vec<(i64, DiffPoly)> {
        self.coeffs
            .iter()
            .filter(|(e, _)| **e >= 0)
            .map(|(e, c)| (*e, c.clone()))
            .collect()
    }

    pub fn display(&self, sig: &Signature) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (e, c) in self.coeffs.iter().rev() {
            let var = self.var.name();
            let pow = match *e {
                0 => String::new(),
                1 => format!("{var}"),
                e => format!("{var}^{e}"),
            };
            let coeff = c.display(sig);
            let coeff = if c.terms.len() > 1 { format!("({coeff})") } else { coeff };
            if pow.is_empty() {
                parts.push(coeff);
            } else {
                parts.push(format!("{pow}*{coeff}"));
            }
        }
        parts.join(" + ")
    }
}

/// `Σ_k binom(n,k) λ^{n−k} ∂^k A`, truncated at `floor`; exact whenever the
/// sum is finite (`n ≥ 0`, or the ∂-orbit of `A` terminates).
pub fn expand_nonlocal(n: i64, a: &DiffPoly, var: SVar, floor: i64, sig: &Signature) -> LaurentSeries {
    let mut out = LaurentSeries::zero(var, floor);
    let mut da = a.clone();
    let mut k: i64 = 0;
    while n - k >= floor {
        if k > 0 {
            da = da.partial(sig);
        }
        if da.is_zero() {
            break;
        }
        if n >= 0 && k > n {
            break;
        }
        out.add_coeff(n - k, da.scale(&binom(n, k as u32)));
        k += 1;
    }
    out
}

/// Iterated-expansion regime: which variable is expanded first.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Regime {
    /// `V((λ⁻¹))((μ⁻¹))` — expand in μ outside, λ inside (left Jacobi term).
    MuThenLambda,
    /// `V((μ⁻¹))((λ⁻¹))` — expand in λ outside, μ inside (middle term).
    LambdaThenMu,
    /// `V(((λ+μ)⁻¹))((λ⁻¹))` — λ+μ outside, λ inside (right term).
    LamMuThenLambda,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::MuThenLambda => "mu-then-lambda",
            Regime::LambdaThenMu => "lambda-then-mu",
            Regime::LamMuThenLambda => "lammu-then-lambda",
        }
    }

    /// Names of the two grid axes (first, second).
    pub fn axes(self) -> (&'static str, &'static str) {
        match self {
            Regime::MuThenLambda | Regime::LambdaThenMu => ("lambda", "mu"),
            Regime::LamMuThenLambda => ("lambda", "lambda+mu"),
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("cannot compare grids of different regimes: {0} vs {1}")]
pub struct RegimeMismatch(pub &'static str, pub &'static str);

/// Result of an iterated Laurent computation in a fixed regime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleGrid {
    pub regime: Regime,
    /// Trusted minima for the two axes.
    pub floors: (i64, i64),
    pub coeffs: BTreeMap<(i64, i64), DiffPoly>,
}

impl DoubleGrid {
    pub fn zero(regime: Regime, floors: (i64, i64)) -> Self {
        DoubleGrid { regime, floors, coeffs: BTreeMap::new() }
    }

    pub fn add_coeff(&mut self, key: (i64, i64), p: DiffPoly) {
        if key.0 < self.floors.0 || key.1 < self.floors.1 || p.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(key).or_insert_with(DiffPoly::zero);
        *slot = slot.add(&p);
        if slot.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn coeff(&self, key: (i64, i64)) -> DiffPoly {
        self.coeffs.get(&key).cloned().unwrap_or_else(DiffPoly::zero)
    }

    /// First mismatching coefficient on the common trusted window.
    /// Comparing grids of different regimes is rejected outright.
    pub fn first_mismatch(
        &self,
        other: &DoubleGrid,
    ) -> Result<Option<((i64, i64), DiffPoly, DiffPoly)>, RegimeMismatch> {
        if self.regime != other.regime {
            return Err(RegimeMismatch(self.regime.name(), other.regime.name()));
        }
        let f0 = self.floors.0.max(other.floors.0);
        let f1 = self.floors.1.max(other.floors.1);
        let mut keys: Vec<(i64, i64)> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .filter(|k| k.0 >= f0 && k.1 >= f1)
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for k in keys {
            let a = self.coeff(k);
            let b = other.coeff(k);
            if a != b {
                return Ok(Some((k, a, b)));
            }
        }
        Ok(None)
    }

    /// Like [`first_mismatch`](Self::first_mismatch) but additionally
    /// restricted to keys with exponent sum at least `min_sum`. The ι
    /// substitutions preserve the total (λ,μ)-degree, so coefficients lost
    /// to storage truncation can only contaminate grid keys on low
    /// anti-diagonals; callers pass the contamination bound as `min_sum`.
    pub fn first_mismatch_min_sum(
        &self,
        other: &DoubleGrid,
        min_sum: i64,
    ) -> Result<Option<((i64, i64), DiffPoly, DiffPoly)>, RegimeMismatch> {
        if self.regime != other.regime {
            return Err(RegimeMismatch(self.regime.name(), other.regime.name()));
        }
        let f0 = self.floors.0.max(other.floors.0);
        let f1 = self.floors.1.max(other.floors.1);
        let mut keys: Vec<(i64, i64)> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .filter(|k| k.0 >= f0 && k.1 >= f1 && k.0 + k.1 >= min_sum)
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for k in keys {
            let a = self.coeff(k);
            let b = other.coeff(k);
            if a != b {
                return Ok(Some((k, a, b)));
            }
        }
        Ok(None)
    }

    /// Debug dump: lines `exp1 exp2 <expression>`, lexicographically sorted.
    pub fn dump(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for (k, c) in &self.coeffs {
            out.push_str(&format!("{} {} {}\n", k.0, k.1, c.display(sig)));
        }
        out
    }
}

/// Trusted minima for the three negative exponent directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleFloors {
    pub lambda: i64,
    pub mu: i64,
    pub nu: i64,
}

impl TripleFloors {
    pub fn uniform(f: i64) -> Self {
        TripleFloors { lambda: f, mu: f, nu: f }
    }
}

pub const COMPONENT_NAMES: [&str; 7] = ["V1", "V2", "V3", "V4", "V5", "V6", "V7"];

/// Canonical decomposition of an element of `V_{λ,μ}` into the seven direct
/// summands. Key semantics per component (first, second exponent):
///
/// * `V1`: (λ ≥ 0, μ ≥ 0) — polynomials;
/// * `V2`: (λ < 0, μ ≥ 0); `V3`: (λ ≥ 0, μ < 0); `V5`: (λ < 0, μ < 0);
/// * `V4`: (λ ≥ 0, λ+μ < 0); `V6`: (λ < 0, λ+μ < 0); `V7`: (μ < 0, λ+μ < 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SevenComponent {
    pub comps: [BTreeMap<(i64, i64), DiffPoly>; 7],
    pub floors: TripleFloors,
}

impl SevenComponent {
    pub fn zero(floors: TripleFloors) -> Self {
        SevenComponent { comps: Default::default(), floors }
    }

    fn in_range(idx: usize, key: (i64, i64)) -> bool {
        match idx {
            0 => key.0 >= 0 && key.1 >= 0,
            1 => key.0 < 0 && key.1 >= 0,
            2 => key.0 >= 0 && key.1 < 0,
            3 => key.0 >= 0 && key.1 < 0,
            4 => key.0 < 0 && key.1 < 0,
            5 => key.0 < 0 && key.1 < 0,
            6 => key.0 < 0 && key.1 < 0,
            _ => false,
        }
    }

    fn trusted(&self, idx: usize, key: (i64, i64)) -> bool {
        let f = &self.floors;
        match idx {
            0 => true,
            1 => key.0 >= f.lambda,
            2 => key.1 >= f.mu,
            3 => key.1 >= f.nu,
            4 => key.0 >= f.lambda && key.1 >= f.mu,
            5 => key.0 >= f.lambda && key.1 >= f.nu,
            6 => key.0 >= f.mu && key.1 >= f.nu,
            _ => false,
        }
    }

    pub fn add_to(&mut self, idx: usize, key: (i64, i64), p: DiffPoly) {
        debug_assert!(Self::in_range(idx, key), "component {} key {:?} out of range", idx + 1, key);
        if p.is_zero() || !self.trusted(idx, key) {
            return;
        }
        let slot = self.comps[idx].entry(key).or_insert_with(DiffPoly::zero);
        *slot = slot.add(&p);
        if slot.is_zero() {
            self.comps[idx].remove(&key);
        }
    }

    pub fn add(&self, other: &SevenComponent) -> SevenComponent {
        let floors = TripleFloors {
            lambda: self.floors.lambda.max(other.floors.lambda),
            mu: self.floors.mu.max(other.floors.mu),
            nu: self.floors.nu.max(other.floors.nu),
        };
        let mut out = SevenComponent::zero(floors);
        for src in [self, other] {
            for idx in 0..7 {
                for (k, c) in &src.comps[idx] {
                    out.add_to(idx, *k, c.clone());
                }
            }
        }
        out
    }

    pub fn neg(&self) -> SevenComponent {
        let mut out = SevenComponent::zero(self.floors);
        for idx in 0..7 {
            for (k, c) in &self.comps[idx] {
                out.add_to(idx, *k, c.neg());
            }
        }
        out
    }

    pub fn scale(&self, q: &Q) -> SevenComponent {
        let mut out = SevenComponent::zero(self.floors);
        if q.is_zero() {
            return out;
        }
        for idx in 0..7 {
            for (k, c) in &self.comps[idx] {
                out.add_to(idx, *k, c.scale(q));
            }
        }
        out
    }

    /// Zeroes all components except `k` (1-based).
    pub fn project(&self, k: usize) -> SevenComponent {
        assert!((1..=7).contains(&k), "component index out of range");
        let mut out = SevenComponent::zero(self.floors);
        out.comps[k - 1] = self.comps[k - 1].clone();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    /// First componentwise mismatch on the common trusted window.
    pub fn first_mismatch(
        &self,
        other: &SevenComponent,
    ) -> Option<(usize, (i64, i64), DiffPoly, DiffPoly)> {
        let merged = TripleFloors {
            lambda: self.floors.lambda.max(other.floors.lambda),
            mu: self.floors.mu.max(other.floors.mu),
            nu: self.floors.nu.max(other.floors.nu),
        };
        let window = SevenComponent::zero(merged);
        for idx in 0..7 {
            let mut keys: Vec<(i64, i64)> = self.comps[idx]
                .keys()
                .chain(other.comps[idx].keys())
                .copied()
                .filter(|k| window.trusted(idx, *k))
                .collect();
            keys.sort_unstable();
            keys.dedup();
            for k in keys {
                let a = self.comps[idx].get(&k).cloned().unwrap_or_else(DiffPoly::zero);
                let b = other.comps[idx].get(&k).cloned().unwrap_or_else(DiffPoly::zero);
                if a != b {
                    return Some((idx + 1, k, a, b));
                }
            }
        }
        None
    }
}

/// Rewrites `coeff · λ^a μ^b (λ+μ)^c` into the seven components by the fixed
/// terminating rule system and accumulates the result into `out`.
pub fn canonicalize(a: i64, b: i64, c: i64, coeff: &DiffPoly, out: &mut SevenComponent) {
    if coeff.is_zero() {
        return;
    }
    if c > 0 {
        // (λ+μ)^c = Σ_k binom(c,k) λ^k μ^{c−k}
        for k in 0..=c {
            canonicalize(a + k, b + c - k, 0, &coeff.scale(&binom(c, k as u32)), out);
        }
    } else if a < 0 && b < 0 && c < 0 {
        // 1/(λμ) = (1/λ + 1/μ)·1/(λ+μ)
        canonicalize(a, b + 1, c - 1, coeff, out);
        canonicalize(a + 1, b, c - 1, coeff, out);
    } else if c < 0 && b > 0 {
        // μ^b = ((λ+μ) − λ)^b
        for k in 0..=b {
            let q = binom(b, k as u32)
                * Q::from_integer(if (b - k) % 2 == 0 { 1 } else { -1 }.into());
            canonicalize(a + b - k, 0, c + k, &coeff.scale(&q), out);
        }
    } else if c < 0 && a > 0 && b < 0 {
        // λ^a = ((λ+μ) − μ)^a — the symmetric elimination for the remaining
        // mixed-sign pattern
        for k in 0..=a {
            let q = binom(a, k as u32)
                * Q::from_integer(if (a - k) % 2 == 0 { 1 } else { -1 }.into());
            canonicalize(0, b + a - k, c + k, &coeff.scale(&q), out);
        }
    } else if c < 0 {
        if b == 0 {
            if a >= 0 {
                out.add_to(3, (a, c), coeff.clone()); // V4
            } else {
                out.add_to(5, (a, c), coeff.clone()); // V6
            }
        } else {
            debug_assert!(a == 0 && b < 0);
            out.add_to(6, (b, c), coeff.clone()); // V7
        }
    } else {
        // c == 0: split the pure (λ,μ) monomial by sign pattern
        let idx = match (a >= 0, b >= 0) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 4,
        };
        out.add_to(idx, (a, b), coeff.clone());
    }
}

/// Applies the regime's ι-embedding to every stored monomial of `x`,
/// truncating outside the grid's trusted window.
pub fn iota_expand(x: &SevenComponent, regime: Regime, floors: (i64, i64)) -> DoubleGrid {
    let mut grid = DoubleGrid::zero(regime, floors);
    for idx in 0..7 {
        for (&(e1, e2), c) in &x.comps[idx] {
            match (regime, idx) {
                // Pure (λ,μ) data embeds identically in both (λ,μ)-regimes.
                (Regime::MuThenLambda | Regime::LambdaThenMu, 0..=2 | 4) => {
                    grid.add_coeff((e1, e2), c.clone());
                }
                // λ^a (λ+μ)^c under ι_{μ,λ}: (λ+μ)^c = Σ_k binom(c,k) μ^{c−k} λ^k
                (Regime::MuThenLambda, 3 | 5) => {
                    let (a, cc) = (e1, e2);
                    let mut k = 0;
                    while cc - k >= floors.1 {
                        grid.add_coeff((a + k, cc - k), c.scale(&binom(cc, k as u32)));
                        k += 1;
                    }
                }
                // μ^b (λ+μ)^c under ι_{μ,λ}
                (Regime::MuThenLambda, 6) => {
                    let (b, cc) = (e1, e2);
                    let mut k = 0;
                    while b + cc - k >= floors.1 {
                        grid.add_coeff((k, b + cc - k), c.scale(&binom(cc, k as u32)));
                        k += 1;
                    }
                }
                // λ^a (λ+μ)^c under ι_{λ,μ}: (λ+μ)^c = Σ_k binom(c,k) λ^{c−k} μ^k
                (Regime::LambdaThenMu, 3 | 5) => {
                    let (a, cc) = (e1, e2);
                    let mut k = 0;
                    while a + cc - k >= floors.0 {
                        grid.add_coeff((a + cc - k, k), c.scale(&binom(cc, k as u32)));
                        k += 1;
                    }
                }
                // μ^b (λ+μ)^c under ι_{λ,μ}
                (Regime::LambdaThenMu, 6) => {
                    let (b, cc) = (e1, e2);
                    let mut k = 0;
                    while cc - k >= floors.0 {
                        grid.add_coeff((cc - k, b + k), c.scale(&binom(cc, k as u32)));
                        k += 1;
                    }
                }
                // (λ, λ+μ) data embeds identically in the third regime.
                (Regime::LamMuThenLambda, 3 | 5) => {
                    grid.add_coeff((e1, e2), c.clone());
                }
                // λ^a μ^b under ι_{λ,λ+μ}: μ^b = Σ_k binom(b,k)(−1)^{b−k} λ^{b−k} (λ+μ)^k
                (Regime::LamMuThenLambda, 0..=2 | 4) => {
                    let (a, b) = (e1, e2);
                    if b >= 0 {
                        for k in 0..=b {
                            let q = binom(b, k as u32)
                                * Q::from_integer(if (b - k) % 2 == 0 { 1 } else { -1 }.into());
                            grid.add_coeff((a + b - k, k), c.scale(&q));
                        }
                    } else {
                        let mut k = 0;
                        while a + b - k >= floors.0 {
                            let q = binom(b, k as u32)
                                * Q::from_integer(if (b - k) % 2 == 0 { 1 } else { -1 }.into());
                            grid.add_coeff((a + b - k, k), c.scale(&q));
                            k += 1;
                        }
                    }
                }
                // μ^b (λ+μ)^c under ι_{λ,λ+μ}
                (Regime::LamMuThenLambda, 6) => {
                    let (b, cc) = (e1, e2);
                    let mut k = 0;
                    while b - k >= floors.0 {
                        let q = binom(b, k as u32)
                            * Q::from_integer(if (b - k) % 2 == 0 { 1 } else { -1 }.into());
                        grid.add_coeff((b - k, cc + k), c.scale(&q));
                        k += 1;
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    grid
}

/// Direct iterated expansion of a single monomial `λ^a μ^b (λ+μ)^c · v` in a
/// regime — the independent oracle the canonicalizer is tested against.
pub fn iterated_expand_monomial(
    a: i64,
    b: i64,
    c: i64,
    v: &DiffPoly,
    regime: Regime,
    floors: (i64, i64),
) -> DoubleGrid {
    let mut grid = DoubleGrid::zero(regime, floors);
    match regime {
        // Expand (λ+μ)^c in non-negative powers of λ (coefficients μ^{c−k});
        // every resulting monomial is already a (λ,μ) grid entry.
        Regime::MuThenLambda => {
            let mut k = 0;
            loop {
                if c >= 0 && k > c {
                    break;
                }
                if b + c - k < floors.1 {
                    break;
                }
                grid.add_coeff((a + k, b + c - k), v.scale(&binom(c, k as u32)));
                k += 1;
            }
        }
        // Expand (λ+μ)^c in non-negative powers of μ.
        Regime::LambdaThenMu => {
            let mut k = 0;
            loop {
                if c >= 0 && k > c {
                    break;
                }
                if a + c - k < floors.0 {
                    break;
                }
                grid.add_coeff((a + c - k, b + k), v.scale(&binom(c, k as u32)));
                k += 1;
            }
        }
        // Expand μ^b = ((λ+μ) − λ)^b in non-negative powers of λ+μ.
        Regime::LamMuThenLambda => {
            let mut k = 0;
            loop {
                if b >= 0 && k > b {
                    break;
                }
                if a + b - k < floors.0 {
                    break;
                }
                let q = binom(b, k as u32)
                    * Q::from_integer(if (b - k) % 2 == 0 { 1 } else { -1 }.into());
                grid.add_coeff((a + b - k, c + k), v.scale(&q));
                k += 1;
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q::qi;
    use crate::superpoly::{GeneratorDecl, Parity, Signature};

    fn sig() -> Signature {
        Signature::new(vec![
            GeneratorDecl { name: "u".into(), parity: Parity::Even, central: false, degree: 1 },
            GeneratorDecl { name: "K".into(), parity: Parity::Even, central: true, degree: 1 },
        ])
        .unwrap()
    }

    #[test]
    fn expand_nonlocal_examples() {
        let sig = sig();
        // n = −1 on the unit: exactly λ⁻¹
        let s = expand_nonlocal(-1, &DiffPoly::one(), SVar::Lambda, -6, &sig);
        assert_eq!(s.coeffs.len(), 1);
        assert_eq!(s.coeff(-1), DiffPoly::one());
        // n = 2 on u: λ²u + 2λ∂u + ∂²u
        let u = DiffPoly::gen(0);
        let s = expand_nonlocal(2, &u, SVar::Lambda, -6, &sig);
        assert_eq!(s.coeff(2), u);
        assert_eq!(s.coeff(1), u.partial(&sig).scale(&qi(2)));
        assert_eq!(s.coeff(0), u.partial_n(2, &sig));
        assert_eq!(s.coeffs.len(), 3);
        // n = −1 on u at floor −3: alternating derivatives
        let s = expand_nonlocal(-1, &u, SVar::Lambda, -3, &sig);
        assert_eq!(s.coeff(-1), u);
        assert_eq!(s.coeff(-2), u.partial(&sig).neg());
        assert_eq!(s.coeff(-3), u.partial_n(2, &sig));
        assert_eq!(s.coeffs.len(), 3);
    }

    #[test]
    fn substitution_examples() {
        let sig = sig();
        // s = −K/λ (∂K = 0) → +K/λ, so −(output) recovers −K/λ: skew-symmetry
        // of the free-boson bracket
        let mut s = LaurentSeries::zero(SVar::Lambda, -4);
        s.add_coeff(-1, DiffPoly::gen(1).neg());
        let t = s.substitute_neg_var_partial(&sig);
        assert_eq!(t.coeff(-1), DiffPoly::gen(1));
        assert_eq!(t.coeffs.len(), 1);
        // s = λ·v with ∂v = 0 → −λ·v + v·(…∂ terms vanish)
        let mut s = LaurentSeries::zero(SVar::Lambda, -4);
        s.add_coeff(1, DiffPoly::gen(1));
        let t = s.substitute_neg_var_partial(&sig);
        assert_eq!(t.coeff(1), DiffPoly::gen(1).neg());
        assert_eq!(t.coeff(0), DiffPoly::zero());
        // λ-independent term is fixed
        let mut s = LaurentSeries::zero(SVar::Lambda, -4);
        s.add_coeff(0, DiffPoly::gen(0));
        let t = s.substitute_neg_var_partial(&sig);
        assert_eq!(t.coeff(0), DiffPoly::gen(0));
    }

    #[test]
    fn substitution_is_involutive_on_polynomials() {
        let sig = sig();
        let u = DiffPoly::gen(0);
        let mut s = LaurentSeries::zero(SVar::Lambda, -6);
        s.add_coeff(0, u.partial(&sig));
        s.add_coeff(1, u.scale(&qi(2)));
        s.add_coeff(3, DiffPoly::gen(1));
        let twice = s.substitute_neg_var_partial(&sig).substitute_neg_var_partial(&sig);
        assert_eq!(twice.first_mismatch(&s), None);
    }

    #[test]
    fn mul_var_partial_pow_matches_expand() {
        // (λ+∂)^2 applied to the constant series u equals expand_nonlocal(2, u)
        let sig = sig();
        let u = DiffPoly::gen(0);
        let mut s = LaurentSeries::zero(SVar::Lambda, -8);
        s.add_coeff(0, u.clone());
        let via_mul = s.mul_var_partial_pow(2, &sig);
        let via_exp = expand_nonlocal(2, &u, SVar::Lambda, -6, &sig);
        assert_eq!(via_mul.first_mismatch(&via_exp), None);
    }

    #[test]
    fn canonicalize_triple_negative_example() {
        // λ⁻¹μ⁻¹(λ+μ)⁻¹ v → λ⁻¹(λ+μ)⁻² v (V6) + μ⁻¹(λ+μ)⁻² v (V7)
        let v = DiffPoly::gen(0);
        let mut out = SevenComponent::zero(TripleFloors::uniform(-8));
        canonicalize(-1, -1, -1, &v, &mut out);
        assert_eq!(out.comps[5].len(), 1);
        assert_eq!(out.comps[6].len(), 1);
        assert_eq!(out.comps[5][&(-1, -2)], v);
        assert_eq!(out.comps[6][&(-1, -2)], v);
        for idx in [0, 1, 2, 3, 4] {
            assert!(out.comps[idx].is_empty());
        }
    }

    #[test]
    fn canonicalize_polynomial_expansion() {
        // λ⁻¹(λ+μ) v → v (V1) + λ⁻¹μ v (V2)
        let v = DiffPoly::gen(0);
        let mut out = SevenComponent::zero(TripleFloors::uniform(-8));
        canonicalize(-1, 0, 1, &v, &mut out);
        assert_eq!(out.comps[0][&(0, 0)], v);
        assert_eq!(out.comps[1][&(-1, 1)], v);
    }

    #[test]
    fn canonicalize_mu_substitution() {
        // μ(λ+μ)⁻¹ v → v (V1) − λ(λ+μ)⁻¹ v (V4)
        let v = DiffPoly::gen(0);
        let mut out = SevenComponent::zero(TripleFloors::uniform(-8));
        canonicalize(0, 1, -1, &v, &mut out);
        assert_eq!(out.comps[0][&(0, 0)], v);
        assert_eq!(out.comps[3][&(1, -1)], v.neg());
        assert_eq!(out.comps[3].len(), 1);
    }

    #[test]
    fn canonicalizer_matches_iterated_expansion() {
        // Exactness oracle over all exponent triples in [−3,3]³, all regimes.
        let v = DiffPoly::gen(0);
        let floors = (-9i64, -9i64);
        for a in -3..=3 {
            for b in -3..=3 {
                for c in -3..=3 {
                    let mut sc = SevenComponent::zero(TripleFloors::uniform(-16));
                    canonicalize(a, b, c, &v, &mut sc);
                    for regime in
                        [Regime::MuThenLambda, Regime::LambdaThenMu, Regime::LamMuThenLambda]
                    {
                        let via_canon = iota_expand(&sc, regime, floors);
                        let direct = iterated_expand_monomial(a, b, c, &v, regime, floors);
                        let mism = via_canon.first_mismatch(&direct).unwrap();
                        assert!(
                            mism.is_none(),
                            "a={a} b={b} c={c} regime={:?}: {:?}",
                            regime,
                            mism
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cross_regime_comparison_is_an_error() {
        let g1 = DoubleGrid::zero(Regime::MuThenLambda, (-4, -4));
        let g2 = DoubleGrid::zero(Regime::LambdaThenMu, (-4, -4));
        assert!(g1.first_mismatch(&g2).is_err());
    }

    #[test]
    fn iota_regimes_differ_on_nonlocal_data() {
        // ι_{μ,λ}(λ+μ)⁻¹ and ι_{λ,μ}(λ+μ)⁻¹ have disjoint supports.
        let v = DiffPoly::one();
        let mut sc = SevenComponent::zero(TripleFloors::uniform(-8));
        canonicalize(0, 0, -1, &v, &mut sc);
        let g1 = iota_expand(&sc, Regime::MuThenLambda, (-5, -5));
        let g2 = iota_expand(&sc, Regime::LambdaThenMu, (-5, -5));
        assert_eq!(g1.coeff((0, -1)), v);
        assert_eq!(g1.coeff((1, -2)), v.neg());
        assert_eq!(g2.coeff((-1, 0)), v);
        assert_eq!(g2.coeff((-2, 1)), v.neg());
        assert!(g1.coeffs.keys().all(|k| !g2.coeffs.contains_key(k)));
    }

    #[test]
    fn projections_partition() {
        let v = DiffPoly::gen(0);
        let mut sc = SevenComponent::zero(TripleFloors::uniform(-8));
        canonicalize(-2, 3, -2, &v, &mut sc);
        let mut acc = SevenComponent::zero(sc.floors);
        for k in 1..=7 {
            acc = acc.add(&sc.project(k));
            for j in 1..=7 {
                if j != k {
                    assert!(sc.project(k).project(j).is_zero());
                }
            }
        }
        assert_eq!(acc.first_mismatch(&sc), None);
    }

    #[test]
    fn grid_dump_format() {
        let sig = sig();
        let mut g = DoubleGrid::zero(Regime::MuThenLambda, (-2, -2));
        g.add_coeff((0, -1), DiffPoly::gen(0));
        g.add_coeff((-1, 2), DiffPoly::gen(1).scale(&qi(3)));
        assert_eq!(g.dump(&sig), "-1 2 3*K\n0 -1 u\n");
    }
}
