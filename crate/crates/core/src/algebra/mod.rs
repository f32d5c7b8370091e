//! Free graded-commutative algebras over ℚ with single-generator power
//! truncations, Koszul-signed multiplication and Leibniz extension of maps
//! on generators.

mod model;

pub use model::{BaseCohomology, FiberGenerator, Restriction, RelativeModel, ValidationReport, Violation};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exact::{Rational, SparseVec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
    /// `Some(k)` means `g^k = 0`; only meaningful for even generators.
    pub truncation: Option<u32>,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Self { name: name.into(), degree, truncation: None }
    }

    pub fn truncated(name: impl Into<String>, degree: u32, power: u32) -> Self {
        Self { name: name.into(), degree, truncation: Some(power) }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }

    /// Largest exponent that survives in the algebra.
    pub fn max_exponent(&self) -> Option<u32> {
        if self.is_odd() {
            Some(1)
        } else {
            self.truncation.map(|k| k.saturating_sub(1))
        }
    }
}

/// Exponent vector indexed by generator position.
///
/// Ordering is reverse-lexicographic on exponents, so within a fixed degree
/// monomials rich in early generators come first and the unit comes last.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn unit(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Total exponent over the index range (word length in those generators).
    pub fn length_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.0[range].iter().sum()
    }

    /// Keeps exponents inside `range`, zeroes the rest.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> Monomial {
        Monomial(self.0.iter().enumerate().map(|(i, &e)| if range.contains(&i) { e } else { 0 }).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse ℚ-linear combination of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlgElement {
    terms: BTreeMap<Monomial, Rational>,
}

/// Degree information of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Degree(u32),
    Mixed,
}

impl AlgElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &AlgElement) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn add(&self, other: &AlgElement) -> AlgElement {
        let mut out = self.clone();
        out.add_scaled(&Rational::one(), other);
        out
    }

    pub fn sub(&self, other: &AlgElement) -> AlgElement {
        let mut out = self.clone();
        out.add_scaled(&-Rational::one(), other);
        out
    }

    pub fn scale(&self, c: &Rational) -> AlgElement {
        let mut out = AlgElement::zero();
        out.add_scaled(c, self);
        out
    }

    pub fn neg(&self) -> AlgElement {
        self.scale(&-Rational::one())
    }

    /// Keeps only the terms satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> AlgElement {
        AlgElement {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }
}

/// An ordered list of generators; positions fix the canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    gens: Vec<Generator>,
}

impl Algebra {
    pub fn new(gens: Vec<Generator>) -> Self {
        Self { gens }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn generator(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn unit_monomial(&self) -> Monomial {
        Monomial::unit(self.gens.len())
    }

    pub fn one(&self) -> AlgElement {
        AlgElement::term(self.unit_monomial(), Rational::one())
    }

    pub fn gen_monomial(&self, i: usize) -> Monomial {
        let mut e = vec![0; self.gens.len()];
        e[i] = 1;
        Monomial(e)
    }

    pub fn gen_element(&self, i: usize) -> AlgElement {
        AlgElement::term(self.gen_monomial(i), Rational::one())
    }

    /// Monomial from `(generator index, exponent)` pairs; `None` if it vanishes.
    pub fn monomial(&self, factors: &[(usize, u32)]) -> Option<Monomial> {
        let mut e = vec![0; self.gens.len()];
        for &(i, p) in factors {
            e[i] += p;
        }
        let m = Monomial(e);
        self.is_admissible(&m).then_some(m)
    }

    pub fn is_admissible(&self, m: &Monomial) -> bool {
        m.0.iter().zip(&self.gens).all(|(&e, g)| g.max_exponent().is_none_or(|max| e <= max))
    }

    pub fn monomial_degree(&self, m: &Monomial) -> u32 {
        m.0.iter().zip(&self.gens).map(|(&e, g)| e * g.degree).sum()
    }

    pub fn homogeneity(&self, a: &AlgElement) -> Homogeneity {
        let mut degs = a.terms().map(|(m, _)| self.monomial_degree(m));
        match degs.next() {
            None => Homogeneity::Zero,
            Some(d) => {
                if degs.all(|x| x == d) {
                    Homogeneity::Degree(d)
                } else {
                    Homogeneity::Mixed
                }
            }
        }
    }

    /// `a · b` for monomials: `None` when the product vanishes, otherwise
    /// the Koszul sign (`true` = negative) and the canonical monomial.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let mut exps = Vec::with_capacity(a.0.len());
        for (i, g) in self.gens.iter().enumerate() {
            let e = a.0[i] + b.0[i];
            if g.max_exponent().is_some_and(|max| e > max) {
                return None;
            }
            exps.push(e);
        }
        // each odd factor of b moves left past the odd factors of a sitting after it
        let mut odd_after = 0u32;
        let mut swaps = 0u32;
        for i in (0..self.gens.len()).rev() {
            if !self.gens[i].is_odd() {
                continue;
            }
            if b.0[i] == 1 {
                swaps += odd_after;
            }
            if a.0[i] == 1 {
                odd_after += 1;
            }
        }
        Some((swaps % 2 == 1, Monomial(exps)))
    }

    pub fn multiply(&self, a: &AlgElement, b: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if let Some((neg, m)) = self.mul_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// All admissible monomials of `degree` using only generators with
    /// `allowed(i)`, in canonical order.
    pub fn monomials(&self, degree: u32, allowed: impl Fn(usize) -> bool) -> Vec<Monomial> {
        fn go(
            alg: &Algebra,
            allowed: &dyn Fn(usize) -> bool,
            i: usize,
            remaining: u32,
            cur: &mut Vec<u32>,
            out: &mut Vec<Monomial>,
        ) {
            if i == alg.gens.len() {
                if remaining == 0 {
                    out.push(Monomial(cur.clone()));
                }
                return;
            }
            let g = &alg.gens[i];
            let mut max = if allowed(i) { remaining / g.degree.max(1) } else { 0 };
            if let Some(m) = g.max_exponent() {
                max = max.min(m);
            }
            for e in 0..=max {
                cur[i] = e;
                go(alg, allowed, i + 1, remaining - e * g.degree, cur, out);
            }
            cur[i] = 0;
        }
        let mut out = Vec::new();
        if self.gens.iter().any(|g| g.degree == 0) {
            // degree-0 generators make degree slices infinite; callers validate first
            return out;
        }
        go(self, &allowed, 0, degree, &mut vec![0; self.gens.len()], &mut out);
        out.sort();
        out
    }

    /// Leibniz extension of a map given on generators:
    /// θ(ab) = θ(a)b + (−1)^{n|a|} a θ(b), with `n` the amount the map lowers degree.
    /// Generators absent from `values` map to zero.
    pub fn extend_derivation(
        &self,
        values: &BTreeMap<usize, AlgElement>,
        map_degree: i64,
        target: &AlgElement,
    ) -> Result<AlgElement, Error> {
        for (&i, v) in values {
            let expected = self.gens[i].degree as i64 - map_degree;
            match self.homogeneity(v) {
                Homogeneity::Zero => {}
                Homogeneity::Degree(d) if d as i64 == expected => {}
                Homogeneity::Degree(d) => {
                    return Err(Error::InhomogeneousValue {
                        generator: self.gens[i].name.clone(),
                        expected,
                        found: Some(d as i64),
                    })
                }
                Homogeneity::Mixed => {
                    return Err(Error::InhomogeneousValue {
                        generator: self.gens[i].name.clone(),
                        expected,
                        found: None,
                    })
                }
            }
        }
        Ok(self.apply_derivation(values, map_degree, target))
    }

    /// [`Algebra::extend_derivation`] without the homogeneity check.
    pub fn apply_derivation(
        &self,
        values: &BTreeMap<usize, AlgElement>,
        map_degree: i64,
        target: &AlgElement,
    ) -> AlgElement {
        let odd_map = map_degree.rem_euclid(2) == 1;
        let mut out = AlgElement::zero();
        for (m, c) in target.terms() {
            let mut prefix_deg = 0u32;
            for i in 0..self.gens.len() {
                let e = m.0[i];
                if e == 0 {
                    continue;
                }
                if let Some(v) = values.get(&i).filter(|v| !v.is_zero()) {
                    let mut pre = vec![0; self.gens.len()];
                    pre[..i].copy_from_slice(&m.0[..i]);
                    let mut post = m.0.clone();
                    post[..i].iter_mut().for_each(|x| *x = 0);
                    post[i] = e - 1;
                    let pre = AlgElement::term(Monomial(pre), Rational::one());
                    let post = AlgElement::term(Monomial(post), Rational::one());
                    let mut coef = c * Rational::from_integer(e.into());
                    if odd_map && prefix_deg % 2 == 1 {
                        coef = -coef;
                    }
                    let piece = self.multiply(&self.multiply(&pre, v), &post);
                    out.add_scaled(&coef, &piece);
                }
                prefix_deg += e * self.gens[i].degree;
            }
        }
        out
    }

    /// Algebra map determined by the images of the generators. Monomials are
    /// products of generators in canonical order, so no reordering signs arise.
    pub fn apply_homomorphism(&self, images: &[AlgElement], a: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for (m, c) in a.terms() {
            let mut acc = self.one();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    acc = self.multiply(&acc, &images[i]);
                }
            }
            out.add_scaled(c, &acc);
        }
        out
    }

    /// Coordinates of `a` in the given monomial basis.
    pub fn coordinates(&self, a: &AlgElement, index: &BTreeMap<Monomial, usize>) -> Option<SparseVec> {
        let mut pairs = Vec::with_capacity(a.len());
        for (m, c) in a.terms() {
            pairs.push((*index.get(m)?, c.clone()));
        }
        Some(SparseVec::from_pairs(pairs))
    }

    pub fn from_coordinates(&self, v: &SparseVec, basis: &[Monomial]) -> AlgElement {
        let mut out = AlgElement::zero();
        for (i, c) in v.iter() {
            out.add_term(basis[i].clone(), c.clone());
        }
        out
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".to_string();
        }
        let parts: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    self.gens[i].name.clone()
                } else {
                    format!("{}^{}", self.gens[i].name, e)
                }
            })
            .collect();
        parts.join(" ")
    }

    pub fn format(&self, a: &AlgElement) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in a.terms().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_unit() {
                s.push_str(&mag.to_string());
            } else if mag.is_one() {
                s.push_str(&self.format_monomial(m));
            } else {
                s.push_str(&format!("{} {}", mag, self.format_monomial(m)));
            }
        }
        s
    }

    pub fn display<'a>(&'a self, a: &'a AlgElement) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Algebra, &'a AlgElement);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.format(self.1))
            }
        }
        D(self, a)
    }
}

/// Index map for a monomial basis.
pub fn basis_index(basis: &[Monomial]) -> BTreeMap<Monomial, usize> {
    basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect()
}
