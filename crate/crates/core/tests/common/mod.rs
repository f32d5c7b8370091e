#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use num::{BigInt, Integer, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use derlie::algebra::{AlgElement, Algebra, FiberGenerator, Generator, Monomial, Restriction, RelativeModel};
use derlie::cochains::{cochain_presentation, FiniteDgl};
use derlie::derivation::{der_bracket, der_differential, DerComplex, DerKind, Derivation};
use derlie::dsl::parse_model;
use derlie::exact::{rational, Rational};
use derlie::hom::HomComplex;
use derlie::par::Exec;

// ---------- dense fraction-free rank ----------

/// Bareiss elimination on integer rows obtained by clearing denominators.
pub fn bareiss_rank(rows: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            r.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

pub fn random_int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> Vec<Vec<Rational>> {
    (0..rows).map(|_| (0..cols).map(|_| rational(rng.gen_range(-bound..=bound))).collect()).collect()
}

// ---------- monomial enumeration ----------

/// Every exponent vector of total degree `degree`, by brute force over all
/// exponents allowed by the truncations.
pub fn enumerate_exponents(gens: &[(u32, Option<u32>)], degree: u32) -> BTreeSet<Vec<u32>> {
    fn go(gens: &[(u32, Option<u32>)], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut BTreeSet<Vec<u32>>) {
        if i == gens.len() {
            if left == 0 {
                out.insert(cur.clone());
            }
            return;
        }
        let (d, cap) = gens[i];
        let max = match (d % 2 == 1, cap) {
            (true, _) => 1,
            (false, Some(k)) => k - 1,
            (false, None) => left / d,
        };
        for e in 0..=max {
            if e * d > left {
                break;
            }
            cur.push(e);
            go(gens, i + 1, left - e * d, cur, out);
            cur.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(gens, 0, degree, &mut Vec::new(), &mut out);
    out
}

pub fn generator_shape(alg: &Algebra) -> Vec<(u32, Option<u32>)> {
    alg.generators().iter().map(|g| (g.degree, g.truncation)).collect()
}

/// Coefficients of the Poincaré series through `top`, by polynomial products.
pub fn poincare_series(gens: &[(u32, Option<u32>)], top: u32) -> Vec<usize> {
    let mut series = vec![0usize; top as usize + 1];
    series[0] = 1;
    for &(d, cap) in gens {
        let max = if d % 2 == 1 { 1 } else { cap.map_or(u32::MAX, |k| k - 1) };
        let mut next = vec![0usize; top as usize + 1];
        for (k, &c) in series.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut e = 0u32;
            while e <= max && k as u32 + e * d <= top {
                next[k + (e * d) as usize] += c;
                e += 1;
            }
        }
        series = next;
    }
    series
}

// ---------- models ----------

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn fixtures() -> Vec<(String, RelativeModel)> {
    let mut files: Vec<_> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "dgl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let doc = parse_model(&text).unwrap_or_else(|d| panic!("{}: {:?}", p.display(), d));
            (p.file_stem().unwrap().to_string_lossy().into_owned(), doc.model)
        })
        .collect()
}

pub fn fixture(name: &str) -> RelativeModel {
    fixtures().into_iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no fixture {name}")).1
}

pub fn power(alg: &Algebra, i: usize, e: u32) -> AlgElement {
    match alg.monomial(&[(i, e)]) {
        Some(m) => AlgElement::term(m, Rational::one()),
        None => AlgElement::zero(),
    }
}

/// SU(n) over ℂP^m with `D(s_{2i−1}) = c_i x^i`; `coeffs[i]` for i = 2..=n.
pub fn su_model(n: u32, m: u32, coeffs: &BTreeMap<u32, Rational>) -> RelativeModel {
    let fiber = (2..=n).map(|i| FiberGenerator::new(format!("s{}", 2 * i - 1), 2 * i - 1)).collect();
    let mut model = RelativeModel::new(vec![Generator::truncated("x", 2, m + 1)], fiber);
    for (&i, c) in coeffs {
        let v = power(model.algebra(), 0, i).scale(c);
        model.set_differential(i as usize - 1, v);
    }
    model
}

pub fn cstar(twisted: bool) -> RelativeModel {
    fixture(if twisted { "example_cstar" } else { "example_cstar_untwisted" })
}

// ---------- classification by exhaustive enumeration ----------

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

#[derive(Debug)]
pub struct OracleResult {
    pub count: usize,
    pub patterns: Vec<BTreeSet<u32>>,
    pub classes: Vec<Vec<BTreeSet<u32>>>,
}

fn ranks(model: &RelativeModel, window: u32) -> BTreeMap<u32, usize> {
    DerComplex::new(model, window, DerKind::Full, Exec::Sequential).homology().unwrap().ranks()
}

/// `x ↦ x`, `s_i ↦ s_i − x^{i−j} s_j` for the other nonzero positions `i`.
fn substitution_is_dg_map(n: u32, m: u32, pattern: &BTreeSet<u32>) -> bool {
    let j = *pattern.iter().next().unwrap();
    let ones = |s: &BTreeSet<u32>| s.iter().map(|&i| (i, Rational::one())).collect::<BTreeMap<_, _>>();
    let source = su_model(n, m, &ones(&BTreeSet::from([j])));
    let target = su_model(n, m, &ones(pattern));
    let alg = source.algebra();
    let sj = j as usize - 1;
    let images: Vec<AlgElement> = (0..alg.len())
        .map(|g| {
            let i = g as u32 + 1;
            if g == 0 || !pattern.contains(&i) || i == j {
                alg.gen_element(g)
            } else {
                let shift = alg.multiply(&power(alg, 0, i - j), &alg.gen_element(sj));
                alg.gen_element(g).sub(&shift)
            }
        })
        .collect();
    (0..alg.len()).all(|g| {
        let lhs = target.apply_d(&images[g]);
        let rhs = alg.apply_homomorphism(&images, source.differential(g));
        lhs == rhs
    })
}

/// Enumerates every zero/nonzero pattern of the classes `c_2..c_n` (all
/// nonzero values normalized to 1), glues patterns joined by a verified
/// substitution or by identical derivation complexes, and checks that the
/// remaining classes are separated by homology ranks.
pub fn classification_oracle(n: u32, m: u32, window: u32) -> OracleResult {
    let positions: Vec<u32> = (2..=n.min(m)).collect();
    let patterns: Vec<BTreeSet<u32>> = (0..1u32 << positions.len())
        .map(|mask| positions.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect())
        .collect();
    let models: Vec<RelativeModel> = patterns
        .iter()
        .map(|p| su_model(n, m, &p.iter().map(|&i| (i, Rational::one())).collect()))
        .collect();
    for model in &models {
        assert!(model.validate().is_ok());
    }
    let complexes: Vec<DerComplex> =
        models.iter().map(|m| DerComplex::new(m, window, DerKind::Full, Exec::Sequential)).collect();
    let all_ranks: Vec<_> = models.iter().map(|m| ranks(m, window)).collect();
    let mut uf = UnionFind((0..patterns.len()).collect());
    for (a, pa) in patterns.iter().enumerate() {
        if pa.len() > 1 && substitution_is_dg_map(n, m, pa) {
            let j = *pa.iter().next().unwrap();
            let b = patterns.iter().position(|p| *p == BTreeSet::from([j])).unwrap();
            uf.union(a, b);
        }
        for (b, pb) in patterns.iter().enumerate().skip(a + 1) {
            let differ: BTreeSet<u32> = pa.symmetric_difference(pb).copied().collect();
            let top_only = differ.iter().all(|&i| i == n);
            let same_complex = (1..=window + 1).all(|k| complexes[a].differential_matrix(k) == complexes[b].differential_matrix(k));
            if top_only && same_complex && all_ranks[a] == all_ranks[b] {
                uf.union(a, b);
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<BTreeSet<u32>>> = BTreeMap::new();
    for (i, p) in patterns.iter().enumerate() {
        classes.entry(uf.find(i)).or_default().push(p.clone());
    }
    let roots: Vec<usize> = classes.keys().copied().collect();
    for (x, &a) in roots.iter().enumerate() {
        for &b in &roots[x + 1..] {
            assert_ne!(all_ranks[a], all_ranks[b], "oracle cannot separate {:?} and {:?}", patterns[a], patterns[b]);
        }
    }
    OracleResult { count: classes.len(), patterns, classes: classes.into_values().collect() }
}

// ---------- invariant suite ----------

pub fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

fn odd(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

fn basis_pool(c: &DerComplex) -> Vec<Derivation> {
    (1..=c.window()).flat_map(|n| c.basis(n)).collect()
}

/// Failures found by the full invariant list on one model; empty means all hold.
pub fn invariant_failures(model: &RelativeModel, window: u32, seed: u64) -> Vec<String> {
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alg = model.algebra();

    if !model.validate().is_ok() {
        fails.push("model does not validate".into());
        return fails;
    }
    // D² on every monomial
    for deg in 0..=window {
        for m in model.monomial_basis(deg, Restriction::Full) {
            let e = AlgElement::term(m.clone(), Rational::one());
            if !model.apply_d(&model.apply_d(&e)).is_zero() {
                fails.push(format!("D² ≠ 0 on {}", alg.format_monomial(&m)));
            }
        }
    }
    // Koszul commutativity
    let monos: Vec<Monomial> = (1..=window).flat_map(|d| model.monomial_basis(d, Restriction::Full)).collect();
    for _ in 0..40.min(monos.len() * monos.len()) {
        let a = AlgElement::term(monos.choose(&mut rng).unwrap().clone(), rational(rng.gen_range(1..4)));
        let b = AlgElement::term(monos.choose(&mut rng).unwrap().clone(), rational(rng.gen_range(-3..0)));
        let (da, db) = (alg.monomial_degree(a.terms().next().unwrap().0), alg.monomial_degree(b.terms().next().unwrap().0));
        if alg.multiply(&a, &b) != alg.multiply(&b, &a).scale(&sign(da % 2 == 1 && db % 2 == 1)) {
            fails.push(format!("Koszul commutativity fails for {} and {}", alg.format(&a), alg.format(&b)));
        }
    }

    let c = DerComplex::new(model, window, DerKind::Full, Exec::default());
    if let Err(e) = c.check_d_squared() {
        fails.push(e.to_string());
    }
    let pool = basis_pool(&c);
    for theta in &pool {
        if !der_differential(model, &der_differential(model, theta)).is_zero() {
            fails.push(format!("𝒟² ≠ 0 on {}", theta.format(model)));
        }
    }
    if model.is_pure() {
        for theta in &pool {
            let dt = der_differential(model, theta);
            for w in model.fiber_range() {
                if dt.value(w) != model.apply_d(&theta.value(w)) {
                    fails.push(format!("pure reduction fails on {}", theta.format(model)));
                }
            }
        }
    }
    if !pool.is_empty() {
        for _ in 0..25 {
            let a = pool.choose(&mut rng).unwrap();
            let b = pool.choose(&mut rng).unwrap();
            let k = pool.choose(&mut rng).unwrap();
            let ab = der_bracket(model, a, b);
            let ba = der_bracket(model, b, a);
            if !ab.add(&ba.scale(&sign(odd(a.degree) && odd(b.degree)))).is_zero() {
                fails.push(format!("antisymmetry fails for {} and {}", a.format(model), b.format(model)));
            }
            let jac = der_bracket(model, a, &der_bracket(model, b, k))
                .scale(&sign(odd(a.degree) && odd(k.degree)))
                .add(&der_bracket(model, b, &der_bracket(model, k, a)).scale(&sign(odd(b.degree) && odd(a.degree))))
                .add(&der_bracket(model, k, &ab).scale(&sign(odd(k.degree) && odd(b.degree))));
            if !jac.is_zero() {
                fails.push(format!("Jacobi fails for {}, {}, {}", a.format(model), b.format(model), k.format(model)));
            }
            let lhs = der_differential(model, &ab);
            let rhs = der_bracket(model, &der_differential(model, a), b)
                .add(&der_bracket(model, a, &der_differential(model, b)).scale(&sign(odd(a.degree))));
            if lhs != rhs {
                fails.push(format!("𝒟 is not a bracket derivation on {}, {}", a.format(model), b.format(model)));
            }
        }
    }
    // (D_φ)² on the images of a full basis
    let hom = HomComplex::new(model);
    for theta in &pool {
        let f = hom.phi(theta);
        if !hom.differential(&hom.differential(&f)).is_zero() {
            fails.push(format!("(D_φ)² ≠ 0 on Φ({})", theta.format(model)));
        }
    }
    // cochains
    match FiniteDgl::from_der_complex(&c) {
        Ok(dgl) => {
            let sq = cochain_presentation(&dgl, window).check_d_squared();
            fails.extend(sq.violations);
        }
        Err(e) => fails.push(e.to_string()),
    }
    if model.is_pure() {
        if let Some(msg) = top_change_failure(model, window) {
            fails.push(msg);
        }
    }
    fails
}

/// Changing `D` on the top fiber degree leaves homology ranks and brackets unchanged.
pub fn top_change_failure(model: &RelativeModel, window: u32) -> Option<String> {
    let top = model.top_fiber_degree();
    let mut changed = model.clone();
    let mut any = false;
    for w in model.fiber_range().filter(|&w| model.degree_of(w) == top) {
        let current = model.differential(w);
        let alt = if current.is_zero() {
            let mut v = AlgElement::zero();
            for m in model.monomial_basis(top + 1, Restriction::BaseOnly) {
                v.add_term(m, Rational::one());
            }
            v
        } else {
            AlgElement::zero()
        };
        changed.set_differential(w, alt);
        any = true;
    }
    if !any || !changed.validate().is_ok() {
        for w in model.fiber_range().filter(|&w| model.degree_of(w) == top) {
            changed.set_differential(w, AlgElement::zero());
        }
    }
    if !changed.validate().is_ok() || changed == *model {
        return None;
    }
    let summary = |m: &RelativeModel| {
        let c = DerComplex::new(m, window, DerKind::Full, Exec::default());
        let h = c.homology().unwrap();
        let t = c.homology_bracket(&h).unwrap();
        (h.ranks(), t.entries)
    };
    (summary(model) != summary(&changed)).then(|| "top-degree change altered homology or brackets".to_string())
}
