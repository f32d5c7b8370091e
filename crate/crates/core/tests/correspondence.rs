mod common;

use std::collections::BTreeMap;

use common::{cstar, fixture, fixtures, sign, su_model};
use derlie::algebra::{AlgElement, Generator, RelativeModel};
use derlie::derivation::{der_bracket, der_differential, DerComplex, DerKind, Derivation};
use derlie::exact::{ratio, rational, Rational};
use derlie::hom::{phi, phi_tilde, verify_psi, verify_psi_with, DualBasis, Fault, HomComplex, HomElement};
use derlie::par::Exec;
use num::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dual_of(model: &RelativeModel, dual: &DualBasis, names: &[&str]) -> usize {
    let alg = model.algebra();
    let factors: Vec<(usize, u32)> = names.iter().map(|n| (alg.index_of(n).unwrap(), 1)).collect();
    dual.index_of(&alg.monomial(&factors).unwrap()).unwrap()
}

fn single(model: &RelativeModel, w: &str, value: AlgElement, degree: i64) -> Derivation {
    Derivation { degree, values: BTreeMap::from([(model.algebra().index_of(w).unwrap(), value)]) }
}

#[test]
fn coproduct_is_dual_to_multiplication() {
    for (name, model) in fixtures() {
        let dual = DualBasis::new(&model);
        let alg = model.algebra();
        for a in 0..dual.len() {
            for b in 0..dual.len() {
                let prod = alg.multiply(
                    &AlgElement::term(dual.monomials[a].clone(), Rational::one()),
                    &AlgElement::term(dual.monomials[b].clone(), Rational::one()),
                );
                for c in 0..dual.len() {
                    let lhs = dual.coproduct[c].get(&(a, b)).cloned().unwrap_or_else(Rational::zero)
                        * sign((dual.degrees[a] * dual.degrees[b]) % 2 == 1);
                    assert_eq!(lhs, prod.coefficient(&dual.monomials[c]), "{name}");
                }
            }
        }
    }
}

#[test]
fn coproduct_is_coassociative() {
    for (name, model) in fixtures() {
        let dual = DualBasis::new(&model);
        let n = dual.len();
        let get = |c: usize, a: usize, b: usize| dual.coproduct[c].get(&(a, b)).cloned().unwrap_or_else(Rational::zero);
        for c in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let lhs: Rational = (0..n).map(|e| get(c, e, z) * get(e, x, y)).sum();
                        let rhs: Rational = (0..n).map(|f| get(c, x, f) * get(f, y, z)).sum();
                        assert_eq!(lhs, rhs, "{name}");
                    }
                }
            }
        }
    }
}

#[test]
fn dual_differential_squares_to_zero() {
    for (name, model) in fixtures() {
        let dual = DualBasis::new(&model);
        for c in 0..dual.len() {
            let mut total: BTreeMap<usize, Rational> = BTreeMap::new();
            for (&b, x) in &dual.dual_differential[c] {
                for (&a, y) in &dual.dual_differential[b] {
                    *total.entry(a).or_insert_with(Rational::zero) += x * y;
                }
            }
            assert!(total.values().all(Zero::is_zero), "{name}");
        }
        if model.base_range().all(|i| model.differential(i).is_zero()) {
            assert!(dual.dual_differential.iter().all(BTreeMap::is_empty), "{name}");
        }
    }
}

#[test]
fn trivial_base_counit() {
    let m = su_model(3, 1, &BTreeMap::new());
    let trivial = RelativeModel::new(vec![], vec![derlie::algebra::FiberGenerator::new("s3", 3)]);
    let dual = DualBasis::new(&trivial);
    assert_eq!(dual.len(), 1);
    assert_eq!(dual.coproduct[0], BTreeMap::from([((0, 0), Rational::one())]));
    assert!(DualBasis::new(&m).dual_differential.iter().all(BTreeMap::is_empty));
}

#[test]
fn phi_examples() {
    let m = cstar(true);
    let dual = DualBasis::new(&m);
    let alg = m.algebra();
    let x3y3 = alg.multiply(&alg.gen_element(0), &alg.gen_element(1));
    let alpha = single(&m, "s7", x3y3, 1);
    let f = phi(&m, &dual, &alpha);
    let b = dual_of(&m, &dual, &["x3", "y3"]);
    assert_eq!(f.components.keys().copied().collect::<Vec<_>>(), [b]);
    let v = f.components[&b].value(alg.index_of("s7").unwrap());
    assert_eq!(v.len(), 1);
    assert!(v.coefficient(&alg.unit_monomial()) == Rational::one() || v.coefficient(&alg.unit_monomial()) == -Rational::one());

    let eta = single(&m, "s5", alg.one(), 5);
    let g = phi(&m, &dual, &eta);
    let unit = dual.index_of(&alg.unit_monomial()).unwrap();
    assert_eq!(g.components.keys().copied().collect::<Vec<_>>(), [unit]);
    assert_eq!(g.components[&unit].value(alg.index_of("s5").unwrap()), alg.one());
}

#[test]
fn phi_tilde_examples() {
    let zero = cstar(false);
    assert!(phi_tilde(&zero, &DualBasis::new(&zero)).is_zero());
    let check = |m: &RelativeModel, dual_names: &[&str], w: &str| {
        let dual = DualBasis::new(m);
        let t = phi_tilde(m, &dual);
        let b = dual_of(m, &dual, dual_names);
        assert_eq!(t.components.len(), 1);
        let value = t.components[&b].value(m.algebra().index_of(w).unwrap());
        let c = value.coefficient(&m.algebra().unit_monomial());
        assert!(c == Rational::one() || c == -Rational::one());
        assert_eq!(value.len(), 1);
    };
    check(&cstar(true), &["x3", "y3"], "s5");
    let su3 = fixture("su3_cp2_twisted");
    let dual = DualBasis::new(&su3);
    let t = phi_tilde(&su3, &dual);
    let x2 = dual.index_of(&su3.algebra().monomial(&[(0, 2)]).unwrap()).unwrap();
    let c = t.components[&x2].value(1).coefficient(&su3.algebra().unit_monomial());
    assert!(c == Rational::one() || c == -Rational::one());
    assert_eq!(t.components.len(), 1);
}

#[test]
fn hom_differential_examples() {
    let zero = cstar(false);
    let hom = HomComplex::new(&zero);
    let c = DerComplex::new(&zero, 8, DerKind::Full, Exec::Sequential);
    for n in 1..=8 {
        for theta in c.basis(n) {
            assert!(hom.differential(&hom.phi(&theta)).is_zero());
        }
    }
    let m = cstar(true);
    let hom = HomComplex::new(&m);
    let alg = m.algebra();
    let beta3 = single(&m, "s7", alg.gen_element(2), 2);
    let alpha = der_differential(&m, &beta3);
    assert_eq!(hom.differential(&hom.phi(&beta3)), hom.phi(&alpha));
    let c = DerComplex::new(&m, 10, DerKind::Full, Exec::Sequential);
    for n in 1..=10 {
        for theta in c.basis(n) {
            let f = hom.phi(&theta);
            assert!(hom.differential(&hom.differential(&f)).is_zero());
        }
    }
}

#[test]
fn hom_bracket_examples() {
    let m = cstar(false);
    let hom = HomComplex::new(&m);
    let alg = m.algebra();
    let beta3 = single(&m, "s7", alg.gen_element(2), 2);
    let beta1 = single(&m, "s5", alg.gen_element(0), 2);
    assert_eq!(hom.bracket(&hom.phi(&beta3), &hom.phi(&beta1)), hom.phi(&der_bracket(&m, &beta3, &beta1)));
    assert!(hom.bracket(&hom.phi(&beta3), &HomElement::zero(3)).is_zero());
}

#[test]
fn cstar_verifies() {
    for twisted in [false, true] {
        let r = verify_psi(&cstar(twisted), 10, Exec::default());
        assert!(r.success(), "{:?}", r.counterexample);
        assert!(r.slices.values().all(|&(der, hom, rank)| der == hom && hom == rank));
        assert!(r.differential_checks > 0 && r.bracket_checks > 0);
    }
}

#[test]
fn su3_cp3_verifies() {
    for c2 in [rational(0), rational(1), ratio(-3, 2)] {
        for c3 in [rational(0), rational(1), rational(4)] {
            let m = su_model(3, 3, &BTreeMap::from([(2, c2.clone()), (3, c3.clone())]));
            let r = verify_psi(&m, 12, Exec::default());
            assert!(r.success(), "c2={c2} c3={c3}: {:?}", r.counterexample);
        }
    }
}

#[test]
fn faults_are_detected() {
    for name in ["example_cstar", "su3_cp2_twisted", "mixed_nonpure"] {
        let m = fixture(name);
        for fault in [Fault::TwistSign, Fault::DualDifferentialSign] {
            if fault == Fault::DualDifferentialSign && m.base_range().all(|i| m.differential(i).is_zero()) {
                continue;
            }
            let hom = HomComplex::with_fault(&m, fault);
            assert!(!verify_psi_with(&hom, 10, Exec::Sequential).success(), "{name} {fault:?}");
        }
    }
}

#[test]
fn fixtures_verify() {
    for (name, m) in fixtures() {
        let r = verify_psi(&m, 10, Exec::default());
        assert!(r.success(), "{name}: {:?}", r.counterexample);
    }
}

#[test]
fn base_generator_lookup() {
    let m = RelativeModel::new(vec![Generator::new("x3", 3)], vec![]);
    assert_eq!(DualBasis::new(&m).len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hom_bracket_antisymmetry(seed in any::<u64>()) {
        let m = derlie::random::random_model(seed, &Default::default());
        let hom = HomComplex::new(&m);
        let c = DerComplex::new(&m, 8, DerKind::Full, Exec::Sequential);
        let pool: Vec<Derivation> = (1..=8).flat_map(|n| c.basis(n)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let (Some(a), Some(b)) = (pool.choose(&mut rng), pool.choose(&mut rng)) else { break };
            let (f, g) = (hom.phi(a), hom.phi(b));
            let s = sign(a.degree % 2 != 0 && b.degree % 2 != 0);
            prop_assert!(hom.bracket(&f, &g).add_scaled(&s, &hom.bracket(&g, &f)).is_zero());
        }
    }
}
