//! The mode algebra of the logarithmic Virasoro vertex algebra: operators
//! `D`, `T` and modes `u_n` acting on the ordered-word module with basis
//! `u_{−n₁}⋯u_{−n_r}·vac` (`n₁ ≥ … ≥ n_r ≥ 1`), with a symbolic central
//! element `C` of filtration degree one.

use crate::q::{binom, qi, qr, Q};
use crate::report::{params, Counterexample, VerificationReport};
use std::collections::BTreeMap;

/// Basis element: `C^{c_pow} · u_{−n₁}⋯u_{−n_r}·vac`, word sorted descending.
pub type PbwMono = (u32, Vec<u32>);

/// Rational linear combination of basis elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbwState(pub BTreeMap<PbwMono, Q>);

/// Which rewriting route is taken for the translation bracket `[T, u_n]`
/// during normal ordering: the closed mode expansion or the recursive
/// degree-peeling relation. Both must produce identical normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Closed,
    Recursive,
}

impl PbwState {
    pub fn zero() -> Self {
        PbwState(BTreeMap::new())
    }

    pub fn vac() -> Self {
        PbwState(BTreeMap::from([((0, Vec::new()), qi(1))]))
    }

    /// `u_{−n₁}⋯u_{−n_r}·vac` for a descending word.
    pub fn word(w: &[u32]) -> Self {
        let mut v = w.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        PbwState(BTreeMap::from([((0, v), qi(1))]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &PbwState) -> PbwState {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            let slot = out.entry(m.clone()).or_insert_with(|| qi(0));
            *slot += c.clone();
            if *slot == qi(0) {
                out.remove(m);
            }
        }
        PbwState(out)
    }

    pub fn scale(&self, q: &Q) -> PbwState {
        if *q == qi(0) {
            return PbwState::zero();
        }
        PbwState(self.0.iter().map(|(m, c)| (m.clone(), c.clone() * q.clone())).collect())
    }

    pub fn neg(&self) -> PbwState {
        self.scale(&qi(-1))
    }

    /// Multiply by the central symbol `C`.
    pub fn mul_c(&self) -> PbwState {
        PbwState(self.0.iter().map(|((p, w), c)| ((p + 1, w.clone()), c.clone())).collect())
    }

    /// Substitute a rational value for `C`.
    pub fn subst_c(&self, c: &Q) -> PbwState {
        let mut out = PbwState::zero();
        for ((p, w), q) in &self.0 {
            let mut f = qi(1);
            for _ in 0..*p {
                f *= c.clone();
            }
            out = out.add(&PbwState(BTreeMap::from([((0, w.clone()), q.clone() * f)])));
        }
        out
    }

    /// Filtration degree: word length plus the power of `C`.
    pub fn max_degree(&self) -> u32 {
        self.0.keys().map(|(p, w)| p + w.len() as u32).max().unwrap_or(0)
    }

    pub fn degree_part(&self, d: u32) -> PbwState {
        PbwState(
            self.0
                .iter()
                .filter(|((p, w), _)| p + w.len() as u32 == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        )
    }

    pub fn display(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for ((p, w), c) in &self.0 {
            let mut s = crate::q::q_display(c);
            if *p > 0 {
                s.push_str(&format!("*C^{}", p));
            }
            for n in w {
                s.push_str(&format!("*u(-{})", n));
            }
            s.push_str("*vac");
            parts.push(s);
        }
        parts.join(" + ")
    }
}

/// `D`: annihilates `vac`, `T`, `C`, and satisfies `[D, u_n] = δ_{n,−1}`.
/// On a basis word it deletes one occurrence of `u_{−1}` with multiplicity.
pub fn apply_d(s: &PbwState) -> PbwState {
    let mut out = PbwState::zero();
    for ((p, w), c) in &s.0 {
        let ones = w.iter().filter(|&&n| n == 1).count();
        if ones > 0 {
            let mut v = w.clone();
            let pos = v.iter().position(|&n| n == 1).unwrap();
            v.remove(pos);
            out = out.add(&PbwState(BTreeMap::from([((*p, v), c.clone() * qi(ones as i64))])));
        }
    }
    out
}

pub fn apply_d_pow(j: u32, s: &PbwState) -> PbwState {
    let mut out = s.clone();
    for _ in 0..j {
        out = apply_d(&out);
    }
    out
}

/// `T`, defined by `T·vac = 0` and `[T, u_{−h}] = Σ_{j≥0}(h+j)·u_{−h−1−j}·D^j`.
pub fn apply_t(s: &PbwState) -> PbwState {
    let mut out = PbwState::zero();
    for ((p, w), c) in &s.0 {
        out = out.add(&t_word(w).mul_c_pow(*p).scale(c));
    }
    out
}

impl PbwState {
    fn mul_c_pow(&self, p: u32) -> PbwState {
        let mut out = self.clone();
        for _ in 0..p {
            out = out.mul_c();
        }
        out
    }
}

fn t_word(w: &[u32]) -> PbwState {
    if w.is_empty() {
        return PbwState::zero();
    }
    let h = w[0];
    let tail = &w[1..];
    // u_{−h}·T(tail) + [T, u_{−h}]·tail.
    let mut out = u_apply(-(h as i64), &t_word(tail), Strategy::Closed);
    let tail_state = PbwState::word(tail);
    for j in 0..=(tail.len() as u32) {
        let dj = apply_d_pow(j, &tail_state);
        if dj.is_zero() {
            continue;
        }
        // u_{−h−1−j} prepends directly: h+1+j exceeds every index in dj.
        let term = PbwState(
            dj.0.iter()
                .map(|((p, v), c)| {
                    let mut nv = Vec::with_capacity(v.len() + 1);
                    nv.push(h + 1 + j);
                    nv.extend_from_slice(v);
                    ((*p, nv), c.clone() * qi((h + j) as i64))
                })
                .collect(),
        );
        out = out.add(&term);
    }
    out
}

/// `[T, u_M]` applied to a state, via the closed mode expansion
/// `δ_{M≥0}·T·D^M − Σ_{j≥0}(M−j)·u_{M−1−j}·D^j`.
fn tu_bracket_closed(m: i64, s: &PbwState, strat: Strategy) -> PbwState {
    let mut out = PbwState::zero();
    if m >= 0 {
        out = out.add(&apply_t(&apply_d_pow(m as u32, s)));
    }
    let jmax = s.0.keys().map(|(_, w)| w.len()).max().unwrap_or(0) as u32;
    for j in 0..=jmax {
        let dj = apply_d_pow(j, s);
        if dj.is_zero() {
            continue;
        }
        out = out.add(&u_apply(m - 1 - j as i64, &dj, strat).scale(&qi(-(m - j as i64))));
    }
    out
}

/// `[T, u_M]` applied to a state via the recursive degree-peeling relation
/// `[T,u_M]v = −M·u_{M−1}v + δ_{M,0}·Tv + [T,u_{M−1}](Dv)`.
fn tu_bracket_recursive(m: i64, s: &PbwState) -> PbwState {
    if s.is_zero() {
        return PbwState::zero();
    }
    let mut out = u_apply(m - 1, s, Strategy::Recursive).scale(&qi(-m));
    if m == 0 {
        out = out.add(&apply_t(s));
    }
    out.add(&tu_bracket_recursive(m - 1, &apply_d(s)))
}

/// `[T, u_M]` dispatching on the strategy.
pub fn tu_bracket(m: i64, s: &PbwState, strat: Strategy) -> PbwState {
    match strat {
        Strategy::Closed => tu_bracket_closed(m, s, strat),
        Strategy::Recursive => tu_bracket_recursive(m, s),
    }
}

/// `[u_m, u_k]` applied to a state:
/// `γ·[T, u_{m+k+1}] − δ_{m+k≥0}(m−k)(m+k+1)·(C/24)·D^{m+k}` with
/// `γ = (1−δ_{k,−1})/(k+1) − (1−δ_{m,−1})/(m+1)`, i.e. the coefficient
/// `(m−k)/((m+1)(k+1))` away from the singular indices, matching the
/// classical limit `u_m ↦ −L_m/(m+1)`.
pub fn uu_bracket(m: i64, k: i64, s: &PbwState, strat: Strategy) -> PbwState {
    let gamma = |n: i64| if n == -1 { qi(0) } else { qr(1, n + 1) };
    let g = gamma(k) - gamma(m);
    let mut out = if g == qi(0) {
        PbwState::zero()
    } else {
        tu_bracket(m + k + 1, s, strat).scale(&g)
    };
    if m + k >= 0 {
        let coeff = qi(-(m - k) * (m + k + 1)) * qr(1, 24);
        out = out.add(&apply_d_pow((m + k) as u32, s).mul_c().scale(&coeff));
    }
    out
}

/// The mode `u_n` applied to a state, producing the PBW normal form.
pub fn u_apply(n: i64, s: &PbwState, strat: Strategy) -> PbwState {
    let mut out = PbwState::zero();
    for ((p, w), c) in &s.0 {
        out = out.add(&u_word(n, w, strat).mul_c_pow(*p).scale(c));
    }
    out
}

fn u_word(n: i64, w: &[u32], strat: Strategy) -> PbwState {
    if w.is_empty() {
        return if n <= -1 { PbwState::word(&[(-n) as u32]) } else { PbwState::zero() };
    }
    let h = w[0];
    if n <= -1 && (-n) as u32 >= h {
        let mut v = Vec::with_capacity(w.len() + 1);
        v.push((-n) as u32);
        v.extend_from_slice(w);
        return PbwState(BTreeMap::from([((0, v), qi(1))]));
    }
    // u_n·u_{−h} = u_{−h}·u_n + [u_n, u_{−h}].
    let tail = &w[1..];
    let inner = u_word(n, tail, strat);
    let swapped = u_apply(-(h as i64), &inner, strat);
    swapped.add(&uu_bracket(n, -(h as i64), &PbwState::word(tail), strat))
}

/// `μ_(n)(T^k u ⊗ b)` via the translation-covariance recursion; base case
/// `k = 0` is the mode `u_n`.
pub fn vm_mu_tk(n: i64, k: u32, b: &PbwState, strat: Strategy) -> PbwState {
    if b.is_zero() {
        return PbwState::zero();
    }
    if k == 0 {
        return u_apply(n, b, strat);
    }
    let mut out = vm_mu_tk(n - 1, k - 1, b, strat).scale(&qi(-n));
    if k == 1 && n == 0 {
        out = out.add(&apply_t(b));
    }
    out.add(&vm_mu_tk(n - 1, k, &apply_d(b), strat))
}

/// `μ_(n)(a ⊗ b)` for first slots that are combinations of `C^p·vac`
/// (central: `δ_{n,−1}`·multiplication) and `C^p·u_{−j}·vac = C^p·T^{j−1}u/(j−1)!`.
pub fn vm_mu(n: i64, a: &PbwState, b: &PbwState, strat: Strategy) -> Result<PbwState, String> {
    let mut out = PbwState::zero();
    for ((p, w), c) in &a.0 {
        let term = match w.len() {
            0 => {
                if n == -1 {
                    b.clone()
                } else {
                    PbwState::zero()
                }
            }
            1 => {
                let j = w[0];
                vm_mu_tk(n, j - 1, b, strat).scale(&(qi(1) / crate::q::factorial(j - 1)))
            }
            _ => return Err(format!("mode of multi-letter first slot {:?} is not defined", w)),
        };
        out = out.add(&term.mul_c_pow(*p).scale(c));
    }
    Ok(out)
}

/// The Virasoro mode `L_m = δ_{m+1≥0}·T·D^{m+1} − Σ_j(m+1−j)·u_{m−j}·D^j`,
/// i.e. the action of `[T, u_{m+1}]`.
pub fn vm_l_mode(m: i64, s: &PbwState, strat: Strategy) -> PbwState {
    tu_bracket(m + 1, s, strat)
}

/// Verify on one state: the Virasoro commutation relation
/// `[L_m, L_k] = (m−k)Σ_j(j+1)L_{m+k−j}D^j + δ_{m+k≥0}(m−k)((m−k)²−m−k−4)·
/// binom(m+k+3,3)·(C/96)·D^{m+k}`, the mode commutator `[u_m, u_k]`, and
/// `[D, L_m] = [D, L_k] = 0`. `C` stays symbolic unless `c` is given.
pub fn vm_commutator_check(m: i64, k: i64, s: &PbwState, c: Option<&Q>) -> VerificationReport {
    let ps = params([
        ("m", m.to_string()),
        ("k", k.to_string()),
        ("state", s.display()),
        ("c", c.map_or("symbolic".into(), crate::q::q_display)),
    ]);
    let strat = Strategy::Closed;
    let fix = |x: PbwState| c.map_or(x.clone(), |q| x.subst_c(q));
    let fail = |component: &str, lhs: PbwState, rhs: PbwState| {
        VerificationReport::fail(
            "vm-commutator",
            "virasoro-modes",
            ps.clone(),
            Counterexample {
                component: component.into(),
                exponents: vec![m, k],
                lhs: lhs.display(),
                rhs: rhs.display(),
            },
        )
    };

    // [L_m, L_k]s against the closed-form right-hand side.
    let lhs = fix(
        vm_l_mode(m, &vm_l_mode(k, s, strat), strat)
            .add(&vm_l_mode(k, &vm_l_mode(m, s, strat), strat).neg()),
    );
    let mut rhs = PbwState::zero();
    let jmax = s.0.keys().map(|(_, w)| w.len()).max().unwrap_or(0) as u32;
    for j in 0..=jmax {
        let dj = apply_d_pow(j, s);
        if dj.is_zero() {
            continue;
        }
        rhs = rhs.add(&vm_l_mode(m + k - j as i64, &dj, strat).scale(&qi((m - k) * (j as i64 + 1))));
    }
    if m + k >= 0 {
        let coeff = qi((m - k) * ((m - k) * (m - k) - m - k - 4)) * binom(m + k + 3, 3) * qr(1, 96);
        rhs = rhs.add(&apply_d_pow((m + k) as u32, s).mul_c().scale(&coeff));
    }
    let rhs = fix(rhs);
    if lhs != rhs {
        return fail("virasoro", lhs, rhs);
    }

    // [u_m, u_k]s computed by double mode application vs the closed form.
    let ulhs = fix(
        u_apply(m, &u_apply(k, s, strat), strat)
            .add(&u_apply(k, &u_apply(m, s, strat), strat).neg()),
    );
    let urhs = fix(uu_bracket(m, k, s, strat));
    if ulhs != urhs {
        return fail("u-modes", ulhs, urhs);
    }

    // [D, L_n]s = 0 for both exponents.
    for n in [m, k] {
        let dl = apply_d(&vm_l_mode(n, s, strat));
        let ld = vm_l_mode(n, &apply_d(s), strat);
        if dl != ld {
            return fail("d-commutes", fix(dl), fix(ld));
        }
    }
    VerificationReport::pass("vm-commutator", "virasoro-modes", ps)
}

type Tensor3 = (PbwState, PbwState, PbwState);

/// `S = −D⊗T − T⊗D` applied on slots 1,2 of a tensor list.
fn s12(ts: &[Tensor3]) -> Vec<Tensor3> {
    let mut out = Vec::new();
    for (a, b, c) in ts {
        let (da, ta) = (apply_d(a), apply_t(a));
        if !da.is_zero() {
            out.push((da.neg(), apply_t(b), c.clone()));
        }
        if !ta.is_zero() {
            out.push((ta.neg(), apply_d(b), c.clone()));
        }
    }
    out.retain(|(a, b, c)| !a.is_zero() && !b.is_zero() && !c.is_zero());
    out
}

/// `S` applied on slots 1,3.
fn s13(ts: &[Tensor3]) -> Vec<Tensor3> {
    let mut out = Vec::new();
    for (a, b, c) in ts {
        let (da, ta) = (apply_d(a), apply_t(a));
        if !da.is_zero() {
            out.push((da.neg(), b.clone(), apply_t(c)));
        }
        if !ta.is_zero() {
            out.push((ta.neg(), b.clone(), apply_d(c)));
        }
    }
    out.retain(|(a, b, c)| !a.is_zero() && !b.is_zero() && !c.is_zero());
    out
}

fn binom_s_apply(m: i64, j: u32, ts: Vec<Tensor3>, slots: fn(&[Tensor3]) -> Vec<Tensor3>) -> Vec<Tensor3> {
    let poly = crate::binom::binom_poly(m, j);
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
        power = slots(&power);
    }
    out
}

/// The Borcherds identity at `n = 0` applied to `u ⊗ u ⊗ s`.
pub fn vm_borcherds_n0_check(m: i64, k: i64, s: &PbwState) -> VerificationReport {
    let ps = params([
        ("m", m.to_string()),
        ("k", k.to_string()),
        ("state", s.display()),
    ]);
    let strat = Strategy::Closed;
    let weight = s.0.keys().map(|(_, w)| w.iter().map(|&n| n as i64).sum::<i64>()).max().unwrap_or(0);
    let jmax = (weight + m.abs() + k.abs() + 4) as u32;
    let u = PbwState::word(&[1]);
    let base = vec![(u.clone(), u.clone(), s.clone())];
    let side = |mu_outer_n: &dyn Fn(u32) -> i64,
                mu_inner_n: &dyn Fn(u32) -> i64|
     -> Result<PbwState, String> {
        let mut acc = PbwState::zero();
        for j in 0..=jmax {
            let ts = binom_s_apply(0, j, base.clone(), s12);
            let sgn = if j % 2 == 1 { qi(-1) } else { qi(1) };
            for (a, b, c) in ts {
                let inner = vm_mu(mu_inner_n(j), &b, &c, strat)?;
                acc = acc.add(&vm_mu(mu_outer_n(j), &a, &inner, strat)?.scale(&sgn));
            }
        }
        Ok(acc)
    };
    // For the swapped term `P₁₂` acts trivially on `u ⊗ u`, so both sums run
    // over the same base tensor with `m` and `k` exchanged.
    let lhs1 = side(&|j| m - j as i64, &|j| k + j as i64);
    let lhs2 = side(&|j| k - j as i64, &|j| m + j as i64);
    let rhs = (|| -> Result<PbwState, String> {
        let mut acc = PbwState::zero();
        for j in 0..=jmax {
            let ts = binom_s_apply(m, j, base.clone(), s13);
            for (a, b, c) in ts {
                let inner = vm_mu(j as i64, &a, &b, strat)?;
                acc = acc.add(&vm_mu(m + k - j as i64, &inner, &c, strat)?);
            }
        }
        Ok(acc)
    })();
    match (lhs1, lhs2, rhs) {
        (Ok(l1), Ok(l2), Ok(r)) => {
            let lhs = l1.add(&l2.neg());
            if lhs == r {
                VerificationReport::pass("borcherds-n0", "virasoro-modes", ps)
            } else {
                VerificationReport::fail(
                    "borcherds-n0",
                    "virasoro-modes",
                    ps,
                    Counterexample {
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
            "virasoro-modes",
            ps,
            Counterexample {
                component: "out-of-scope".into(),
                exponents: vec![m, k],
                lhs: e,
                rhs: String::new(),
            },
        ),
    }
}

/// Normal forms computed by the two straightening strategies must agree.
pub fn confluence_check(n: i64, s: &PbwState) -> VerificationReport {
    let ps = params([("n", n.to_string()), ("state", s.display())]);
    let a = u_apply(n, s, Strategy::Closed);
    let b = u_apply(n, s, Strategy::Recursive);
    if a == b {
        VerificationReport::pass("vm-confluence", "virasoro-modes", ps)
    } else {
        VerificationReport::fail(
            "vm-confluence",
            "virasoro-modes",
            ps,
            Counterexample {
                component: "normal-form".into(),
                exponents: vec![n],
                lhs: a.display(),
                rhs: b.display(),
            },
        )
    }
}
