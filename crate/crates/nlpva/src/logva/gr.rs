//! The bracket induced on the associated graded of a logarithmic vertex
//! algebra, realized from mode data, together with checks that the induced
//! product is the expected (super)commutative polynomial structure.
//!
//! The dictionary sends `x_n ↦ ∂^n x / n!` for the free boson and
//! `u_{−n}·vac ↦ ∂^{n−1} u / (n−1)!` for the Virasoro mode module, so the
//! resulting series can be compared coefficientwise with the tables of the
//! corresponding builtin non-local Poisson structures.

use super::fock::{fb_braiding, fb_mu, FbVariant, FockState};
use super::vm::{apply_d, apply_t, vm_mu, PbwState, Strategy};
use crate::q::{factorial, qi};
use crate::series::{LaurentSeries, SVar};
use crate::superpoly::{DiffPoly, Monomial, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Render a Fock state as a differential polynomial over the
/// `potential-free-boson` signature (`x` = generator 0, `K` = generator 1).
pub fn fock_to_diffpoly(s: &FockState) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for ((k, xs), c) in &s.0 {
        let mut vars = Vec::new();
        let mut coeff = c.clone();
        for (&n, &e) in xs {
            for _ in 0..e {
                vars.push(Variable { gen: 0, order: n });
                coeff /= factorial(n);
            }
        }
        for _ in 0..*k {
            vars.push(Variable { gen: 1, order: 0 });
        }
        out.add_term(Monomial { vars }, coeff);
    }
    out
}

/// Render a mode-module state as a differential polynomial over the
/// `potential-virasoro-magri` signature (`u` = generator 0, `C` = generator 1).
pub fn pbw_to_diffpoly(s: &PbwState) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for ((p, w), c) in &s.0 {
        let mut vars = Vec::new();
        let mut coeff = c.clone();
        for &n in w.iter().rev() {
            vars.push(Variable { gen: 0, order: n - 1 });
            coeff /= factorial(n - 1);
        }
        for _ in 0..*p {
            vars.push(Variable { gen: 1, order: 0 });
        }
        out.add_term(Monomial { vars }, coeff);
    }
    out
}

/// Induced bracket `{g_λ h}` on graded classes of free-boson states:
/// `Σ_{n≥0} (λ^n/n!)·μ_(n)(g⊗h) + Σ_{k≥0} λ^{−1−k}·μ_(−1)(S((−T)^k g ⊗ h))`,
/// keeping only the part of filtration degree `deg g + deg h − 1`.
pub fn gr_bracket_fock(
    variant: FbVariant,
    g: &FockState,
    h: &FockState,
    floor: i64,
) -> Result<LaurentSeries, String> {
    let target = g.max_degree() + h.max_degree();
    let target = if target == 0 { 0 } else { target - 1 };
    let mut out = LaurentSeries::zero(SVar::Lambda, floor);
    let nmax = h.max_x_index() as i64 + 2;
    for n in 0..=nmax {
        let part = fb_mu(variant, n, g, h)?.degree_part(target);
        if !part.is_zero() {
            out.add_coeff(n, fock_to_diffpoly(&part).scale(&(qi(1) / factorial(n as u32))));
        }
    }
    let mut a = g.clone();
    for k in 0..(-floor) {
        let mut nl = FockState::zero();
        for (p, q) in fb_braiding(variant, &a, h) {
            nl = nl.add(&fb_mu(variant, -1, &p, &q)?);
        }
        let part = nl.degree_part(target);
        if !part.is_zero() {
            out.add_coeff(-1 - k, fock_to_diffpoly(&part));
        }
        a = a.t_apply().neg();
    }
    Ok(out)
}

/// Induced bracket on graded classes of mode-module states, same formula,
/// with `S(a⊗b) = −Da⊗Tb − Ta⊗Db`.
pub fn gr_bracket_vm(g: &PbwState, h: &PbwState, floor: i64) -> Result<LaurentSeries, String> {
    let target = g.max_degree() + h.max_degree();
    let target = if target == 0 { 0 } else { target - 1 };
    let mut out = LaurentSeries::zero(SVar::Lambda, floor);
    let weight = |s: &PbwState| {
        s.0.keys().map(|(_, w)| w.iter().map(|&n| n as i64).sum::<i64>()).max().unwrap_or(0)
    };
    let nmax = weight(g) + weight(h) + 1;
    for n in 0..=nmax {
        let part = vm_mu(n, g, h, Strategy::Closed)?.degree_part(target);
        if !part.is_zero() {
            out.add_coeff(n, pbw_to_diffpoly(&part).scale(&(qi(1) / factorial(n as u32))));
        }
    }
    let mut a = g.clone();
    for k in 0..(-floor) {
        let nl = vm_mu(-1, &apply_d(&a), &apply_t(h), Strategy::Closed)?
            .add(&vm_mu(-1, &apply_t(&a), &apply_d(h), Strategy::Closed)?)
            .neg();
        let part = nl.degree_part(target);
        if !part.is_zero() {
            out.add_coeff(-1 - k, pbw_to_diffpoly(&part));
        }
        a = apply_t(&a).neg();
    }
    Ok(out)
}

fn random_fock_mono(rng: &mut ChaCha8Rng) -> FockState {
    let k_pow = rng.gen_range(0..2u32);
    let mut s = FockState::mono(k_pow, &[], qi(rng.gen_range(1..5i64)));
    for _ in 0..rng.gen_range(0..4u32) {
        s = s.mul(&FockState::x(rng.gen_range(0..4u32)));
    }
    s
}

fn random_word(rng: &mut ChaCha8Rng) -> Vec<u32> {
    (0..rng.gen_range(0..4u32)).map(|_| rng.gen_range(1..5u32)).collect()
}

/// Product structure on the associated graded: for the free boson the induced
/// product is the literal polynomial product; for the mode module it is the
/// top-filtration part of iterated creation-mode application. Verifies
/// commutativity, associativity, unit, the Leibniz rule for `T`, and the
/// identification `μ_(−2)(x_0 ⊗ b) = x_1·b`, on `samples` random states.
pub fn gr_product_check(seed: u64, samples: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let a = random_fock_mono(&mut rng);
        let b = random_fock_mono(&mut rng);
        let c = random_fock_mono(&mut rng);
        if a.mul(&b) != b.mul(&a) {
            return Err(format!("fock commutativity failed at sample {i}"));
        }
        if a.mul(&b).mul(&c) != a.mul(&b.mul(&c)) {
            return Err(format!("fock associativity failed at sample {i}"));
        }
        if a.mul(&FockState::vac()) != a {
            return Err(format!("fock unit failed at sample {i}"));
        }
        let leib = a.mul(&b).t_apply();
        if leib != a.t_apply().mul(&b).add(&a.mul(&b.t_apply())) {
            return Err(format!("fock Leibniz failed at sample {i}"));
        }
        let lhs = super::fock::fb_mode_apply(FbVariant::WithK, -2, &b);
        if lhs != FockState::x(1).mul(&b) {
            return Err(format!("mode/product identification failed at sample {i}"));
        }

        // Mode module: the top-degree part of applying a word of creation
        // modes equals the sorted concatenation (the gr polynomial product).
        let wa = random_word(&mut rng);
        let wb = random_word(&mut rng);
        let mut state = PbwState::word(&wb);
        for &n in wa.iter().rev() {
            state = super::vm::u_apply(-(n as i64), &state, Strategy::Closed);
        }
        let top = state.degree_part((wa.len() + wb.len()) as u32);
        let merged: Vec<u32> = wa.iter().chain(wb.iter()).copied().collect();
        if top != PbwState::word(&merged) {
            return Err(format!(
                "mode-module gr product failed at sample {i}: {} vs {}",
                top.display(),
                PbwState::word(&merged).display()
            ));
        }
    }
    Ok(())
}
