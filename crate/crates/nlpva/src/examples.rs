//! Built-in example algebras.
//!
//! Four non-local Poisson vertex (super)algebras used throughout the test
//! suite and available from the command line under `builtin:` names:
//!
//! * `potential-free-boson` — potential free boson: generators `x`, central
//!   `K`; `{x_λ x} = −K/λ`.
//! * `potential-virasoro-magri` — potential Virasoro–Magri: generators `u`,
//!   central `C`; `{u_λ u} = −(1/(λ+∂))u′ − (1/λ)u′ − (λ/12)C`.
//! * `potential-affine-sl2` — potential affine sl₂ at level `K`:
//!   `{a_λ b} = (1/(λ+∂))[a,b] − (1/λ)[a,b] − (1/λ)(a|b)K` with the K-term
//!   split symmetrically across the two non-local slots.
//! * `gurarie-ludwig` — the Gurarie–Ludwig algebra: even `L`, `ℓ` (written
//!   `l`), odd `xi`, `xibar`, central `K`.

use crate::bracket::{Algebra, BracketEntry};
use crate::q::{qi, qr, Q};
use crate::superpoly::{AlgebraError, DiffPoly, GeneratorDecl, Parity, Signature, Variable};
use num_traits::Zero;
use std::collections::BTreeMap;

pub const BUILTIN_NAMES: [&str; 4] = [
    "potential-free-boson",
    "potential-virasoro-magri",
    "potential-affine-sl2",
    "gurarie-ludwig",
];

/// Looks up a built-in algebra by name.
pub fn builtin(name: &str) -> Result<Algebra, AlgebraError> {
    match name {
        "potential-free-boson" => potential_free_boson(),
        "potential-virasoro-magri" => potential_virasoro_magri(),
        "potential-affine-sl2" => potential_affine_sl2(),
        "gurarie-ludwig" => gurarie_ludwig(),
        _ => Err(AlgebraError::Invalid(format!(
            "unknown builtin algebra `{name}`; available: {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

fn decl(name: &str, parity: Parity, central: bool, degree: u32) -> GeneratorDecl {
    GeneratorDecl { name: name.to_string(), parity, central, degree }
}

fn dgen(idx: usize, order: u32) -> DiffPoly {
    DiffPoly::var(Variable { gen: idx, order })
}

/// `{x_λ x} = −K/λ`, stored as the symmetric pair
/// `(−½K)⊗1 + (−½)⊗K` so the braiding is its own signed transpose.
pub fn potential_free_boson() -> Result<Algebra, AlgebraError> {
    let sig = Signature::new(vec![
        decl("x", Parity::Even, false, 1),
        decl("K", Parity::Even, true, 1),
    ])?;
    let (x, k) = (0, 1);
    let mut table = BTreeMap::new();
    table.insert(
        (x, x),
        BracketEntry {
            local: BTreeMap::new(),
            nonlocal: vec![
                (DiffPoly::gen(k).scale(&qr(-1, 2)), DiffPoly::one(), Parity::Even),
                (DiffPoly::constant(qr(-1, 2)), DiffPoly::gen(k), Parity::Even),
            ],
        },
    );
    Algebra::new("potential-free-boson", sig, table)
}

/// `{u_λ u} = −(1/(λ+∂))u′ − (1/λ)u′ − (λ/12)C`.
pub fn potential_virasoro_magri() -> Result<Algebra, AlgebraError> {
    let sig = Signature::new(vec![
        decl("u", Parity::Even, false, 1),
        decl("C", Parity::Even, true, 1),
    ])?;
    let (u, c) = (0, 1);
    let mut local = BTreeMap::new();
    local.insert(1u32, DiffPoly::gen(c).scale(&qr(-1, 12)));
    let mut table = BTreeMap::new();
    table.insert(
        (u, u),
        BracketEntry {
            local,
            nonlocal: vec![
                (DiffPoly::constant(qi(-1)), dgen(u, 1), Parity::Even),
                (dgen(u, 1).scale(&qi(-1)), DiffPoly::one(), Parity::Even),
            ],
        },
    );
    Algebra::new("potential-virasoro-magri", sig, table)
}

/// Potential affine sl₂: basis `e`, `h`, `f` with `[h,e]=2e`, `[h,f]=−2f`,
/// `[e,f]=h` and invariant form `(e|f)=(f|e)=1`, `(h|h)=2`.
pub fn potential_affine_sl2() -> Result<Algebra, AlgebraError> {
    let sig = Signature::new(vec![
        decl("e", Parity::Even, false, 1),
        decl("h", Parity::Even, false, 1),
        decl("f", Parity::Even, false, 1),
        decl("K", Parity::Even, true, 1),
    ])?;
    let (e, h, f, k) = (0usize, 1usize, 2usize, 3usize);
    // [a,b] as a polynomial in the generators.
    let lie = |a: usize, b: usize| -> DiffPoly {
        match (a, b) {
            (x, y) if x == y => DiffPoly::zero(),
            (1, 0) => DiffPoly::gen(e).scale(&qi(2)),
            (0, 1) => DiffPoly::gen(e).scale(&qi(-2)),
            (1, 2) => DiffPoly::gen(f).scale(&qi(-2)),
            (2, 1) => DiffPoly::gen(f).scale(&qi(2)),
            (0, 2) => DiffPoly::gen(h),
            (2, 0) => DiffPoly::gen(h).scale(&qi(-1)),
            _ => unreachable!(),
        }
    };
    let form = |a: usize, b: usize| -> Q {
        match (a, b) {
            (0, 2) | (2, 0) => qi(1),
            (1, 1) => qi(2),
            _ => qi(0),
        }
    };
    let mut table = BTreeMap::new();
    for a in [e, h, f] {
        for b in [e, h, f] {
            let mut nonlocal = Vec::new();
            let br = lie(a, b);
            if !br.is_zero() {
                // (1/(λ+∂) − 1/λ)[a,b]: expanding 1/λ as the bare pole gives
                // the pair ([a,b], 1) for the first term and (−1, [a,b]) for
                // the second (1/λ acts with ∂ on the right factor).
                nonlocal.push((br.clone(), DiffPoly::one(), Parity::Even));
                nonlocal.push((DiffPoly::constant(qi(-1)), br, Parity::Even));
            }
            let bf = form(a, b);
            if !bf.is_zero() {
                // −(1/λ)(a|b)K, split symmetrically across the two slots.
                let half = bf * qr(-1, 2);
                nonlocal.push((DiffPoly::gen(k).scale(&half), DiffPoly::one(), Parity::Even));
                nonlocal.push((DiffPoly::constant(half), DiffPoly::gen(k), Parity::Even));
            }
            if !nonlocal.is_empty() {
                table.insert((a, b), BracketEntry { local: BTreeMap::new(), nonlocal });
            }
        }
    }
    Algebra::new("potential-affine-sl2", sig, table)
}

/// The Gurarie–Ludwig algebra: Virasoro-like even pair `L` (degree 1) and
/// `l` (degree 2), odd pair `xi` (degree 1) and `xibar` (degree 2), central
/// `K` (degree 2).
pub fn gurarie_ludwig() -> Result<Algebra, AlgebraError> {
    let sig = Signature::new(vec![
        decl("L", Parity::Even, false, 1),
        decl("xi", Parity::Odd, false, 1),
        decl("l", Parity::Even, false, 2),
        decl("xibar", Parity::Odd, false, 2),
        decl("K", Parity::Even, true, 2),
    ])?;
    let (big_l, xi, ell, xibar, k) = (0usize, 1usize, 2usize, 3usize, 4usize);
    let mut table: BTreeMap<(usize, usize), BracketEntry> = BTreeMap::new();
    // L acts on every non-central generator as a Virasoro field of weight 1:
    // {L_λ g} = (∂ + 2λ)g, with an extra central λ³K/6 term for l.
    let primary = |g: usize, central_term: bool| -> BracketEntry {
        let mut local = BTreeMap::new();
        local.insert(0u32, dgen(g, 1));
        local.insert(1u32, DiffPoly::gen(g).scale(&qi(2)));
        if central_term {
            local.insert(3u32, DiffPoly::gen(k).scale(&qr(1, 6)));
        }
        BracketEntry { local, nonlocal: Vec::new() }
    };
    table.insert((big_l, big_l), primary(big_l, false));
    table.insert((big_l, xi), primary(xi, false));
    table.insert((big_l, ell), primary(ell, true));
    table.insert((big_l, xibar), primary(xibar, false));
    // {l_λ l} = 2(1/(λ+∂)ξ)ξ̄ − 2(1/(λ+∂)ξ̄)ξ.
    table.insert(
        (ell, ell),
        BracketEntry {
            local: BTreeMap::new(),
            nonlocal: vec![
                (DiffPoly::gen(xi).scale(&qi(2)), DiffPoly::gen(xibar), Parity::Odd),
                (DiffPoly::gen(xibar).scale(&qi(-2)), DiffPoly::gen(xi), Parity::Odd),
            ],
        },
    );
    // {l_λ xi} = (1/(λ+∂)ξ)L,  {l_λ xibar} = (1/(λ+∂)ξ̄)L.
    table.insert(
        (ell, xi),
        BracketEntry {
            local: BTreeMap::new(),
            nonlocal: vec![(DiffPoly::gen(xi), DiffPoly::gen(big_l), Parity::Odd)],
        },
    );
    table.insert(
        (ell, xibar),
        BracketEntry {
            local: BTreeMap::new(),
            nonlocal: vec![(DiffPoly::gen(xibar), DiffPoly::gen(big_l), Parity::Odd)],
        },
    );
    // {xi_λ xibar} = ½∂l + λl + (λ³/12)K − ½(1/(λ+∂)L)L.
    let mut local = BTreeMap::new();
    local.insert(0u32, dgen(ell, 1).scale(&qr(1, 2)));
    local.insert(1u32, DiffPoly::gen(ell));
    local.insert(3u32, DiffPoly::gen(k).scale(&qr(1, 12)));
    table.insert(
        (xi, xibar),
        BracketEntry {
            local,
            nonlocal: vec![(
                DiffPoly::gen(big_l).scale(&qr(-1, 2)),
                DiffPoly::gen(big_l),
                Parity::Odd,
            )],
        },
    );
    // {xi_λ xi} = {xibar_λ xibar} = 0 and all K-rows vanish; remaining
    // entries follow by skew-symmetry during validation.
    Algebra::new("gurarie-ludwig", sig, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{expand_nonlocal, LaurentSeries, SVar};
    use crate::superpoly::Parity;
    use num_traits::Zero;

    fn dp(idx: usize, order: u32) -> DiffPoly {
        dgen(idx, order)
    }

    #[test]
    fn all_builtins_load() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn free_boson_bracket_value() {
        // {x_λ x} = −K·λ⁻¹ exactly (no deeper tail: ∂K = 0).
        let alg = potential_free_boson().unwrap();
        let x = DiffPoly::gen(0);
        let k = DiffPoly::gen(1);
        let got = alg.bracket_eval(&x, &x, -6);
        let mut want = LaurentSeries::zero(SVar::Lambda, -6);
        want.add_coeff(-1, k.neg());
        assert!(got.first_mismatch(&want).is_none(), "{}", got.display(&alg.sig));
    }

    #[test]
    fn free_boson_derivative_bracket() {
        // {(∂x)_λ (∂x)} = λK: sesqui-linearity turns the pole into a polynomial.
        let alg = potential_free_boson().unwrap();
        let dx = dp(0, 1);
        let got = alg.bracket_eval(&dx, &dx, -6);
        let mut want = LaurentSeries::zero(SVar::Lambda, -6);
        want.add_coeff(1, DiffPoly::gen(1));
        assert!(got.first_mismatch(&want).is_none(), "{}", got.display(&alg.sig));
    }

    #[test]
    fn free_boson_leibniz_example() {
        // {x_λ x·x} = −2Kx·λ⁻¹.
        let alg = potential_free_boson().unwrap();
        let x = DiffPoly::gen(0);
        let xx = x.mul(&x, &alg.sig);
        let got = alg.bracket_eval(&x, &xx, -6);
        let kx = DiffPoly::gen(1).mul(&x, &alg.sig);
        let mut want = LaurentSeries::zero(SVar::Lambda, -6);
        want.add_coeff(-1, kx.scale(&qi(-2)));
        assert!(got.first_mismatch(&want).is_none(), "{}", got.display(&alg.sig));
        assert!(alg.leibniz_check(0, &x, &x, -6).is_pass());
    }

    #[test]
    fn free_boson_braiding_on_square() {
        // S(x ⊗ x²) = −K⊗x − 1⊗Kx.
        let alg = potential_free_boson().unwrap();
        let x = DiffPoly::gen(0);
        let x2 = x.mul(&x, &alg.sig);
        let pairs = alg.braiding_extend(&x, &x2);
        let mut tensor: BTreeMap<(String, String), Q> = BTreeMap::new();
        for (p, q, _) in &pairs {
            for (mp, cp) in &p.terms {
                for (mq, cq) in &q.terms {
                    let key = (
                        DiffPoly::from_mono(mp.clone(), qi(1)).display(&alg.sig),
                        DiffPoly::from_mono(mq.clone(), qi(1)).display(&alg.sig),
                    );
                    *tensor.entry(key).or_insert_with(Q::zero) += cp * cq;
                }
            }
        }
        tensor.retain(|_, v| !v.is_zero());
        let mut want = BTreeMap::new();
        want.insert(("K".to_string(), "x".to_string()), qi(-1));
        want.insert(("1".to_string(), "x*K".to_string()), qi(-1));
        assert_eq!(tensor, want);
    }

    #[test]
    fn virasoro_magri_bracket_values() {
        // {u_λ u} matches the table, and
        // {(∂u)_λ (∂u)} = (2λ+∂)(∂u) + (λ³/12)C.
        let alg = potential_virasoro_magri().unwrap();
        let u = DiffPoly::gen(0);
        let du = dp(0, 1);
        let c = DiffPoly::gen(1);
        let got = alg.bracket_eval(&u, &u, -6);
        let mut want = expand_nonlocal(-1, &du, SVar::Lambda, -6, &alg.sig).neg();
        want.add_coeff(-1, du.neg());
        want.add_coeff(1, c.scale(&qr(-1, 12)));
        assert!(got.first_mismatch(&want).is_none(), "{}", got.display(&alg.sig));

        let got2 = alg.bracket_eval(&du, &du, -6);
        let mut want2 = LaurentSeries::zero(SVar::Lambda, -6);
        want2.add_coeff(0, dp(0, 2));
        want2.add_coeff(1, du.scale(&qi(2)));
        want2.add_coeff(3, c.scale(&qr(1, 12)));
        assert!(got2.first_mismatch(&want2).is_none(), "{}", got2.display(&alg.sig));
    }

    #[test]
    fn sl2_bracket_value() {
        // {e_λ f} = (1/(λ+∂))h − (1/λ)h − (1/λ)K.
        let alg = potential_affine_sl2().unwrap();
        let (e, f) = (DiffPoly::gen(0), DiffPoly::gen(2));
        let h = DiffPoly::gen(1);
        let k = DiffPoly::gen(3);
        let got = alg.bracket_eval(&e, &f, -6);
        let sig = &alg.sig;
        let want = expand_nonlocal(-1, &h, SVar::Lambda, -6, sig)
            .add(&{
                let mut s = LaurentSeries::zero(SVar::Lambda, -6);
                s.add_coeff(-1, h.neg().sub(&k));
                s
            });
        assert!(got.first_mismatch(&want).is_none(), "{}", got.display(sig));
    }

    #[test]
    fn gurarie_ludwig_skew_derived_entries() {
        // (xibar, xi) is derived by skew-symmetry from (xi, xibar); both odd,
        // so {ξ̄_λ ξ} = +{ξ_{−λ−∂} ξ̄}. Check an explicit coefficient:
        // λ¹ of the local part must be ℓ again (weight-2 self-pairing).
        let alg = gurarie_ludwig().unwrap();
        let e = alg.entry(3, 1).expect("derived entry (xibar, xi)");
        assert!(!e.local.is_empty());
        // And the full engine-level skew check across every pair:
        for g in 0..alg.sig.len() {
            for h in 0..alg.sig.len() {
                let rep = alg.skew_check(g, h, -7);
                assert!(rep.is_pass(), "{}", rep.to_line());
            }
        }
    }

    #[test]
    fn gurarie_ludwig_braiding_values() {
        // S(ξ⊗ξ̄) = −½L⊗L (sign-absorbed pairs), S(ℓ⊗ℓ) = 2ξ⊗ξ̄ − 2ξ̄⊗ξ.
        let alg = gurarie_ludwig().unwrap();
        let pairs = alg.braid(1, 3);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0, DiffPoly::gen(0).scale(&qr(-1, 2)));
        assert_eq!(pairs[0].1, DiffPoly::gen(0));
        assert_eq!(pairs[0].2, Parity::Odd);
        let ll = alg.braid(2, 2);
        assert_eq!(ll.len(), 2);
    }

    #[test]
    fn alt_evaluator_agrees_on_products() {
        let alg = potential_virasoro_magri().unwrap();
        let u = DiffPoly::gen(0);
        let du = dp(0, 1);
        let p = u.mul(&du, &alg.sig).add(&u);
        let q = u.mul(&u, &alg.sig);
        let a = alg.bracket_eval(&p, &q, -5);
        let b = alg.bracket_eval_alt(&p, &q, -5);
        assert!(a.first_mismatch(&b).is_none());
    }

    #[test]
    fn specialize_free_boson() {
        // K → 1 turns {x_λ x} into −1/λ.
        let alg = potential_free_boson().unwrap().specialize(1, &qi(1)).unwrap();
        let x = DiffPoly::gen(0);
        let got = alg.bracket_eval(&x, &x, -4);
        let mut want = LaurentSeries::zero(SVar::Lambda, -4);
        want.add_coeff(-1, DiffPoly::one().neg());
        assert!(got.first_mismatch(&want).is_none());
    }
}
