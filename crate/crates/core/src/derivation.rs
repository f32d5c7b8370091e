//! Truncated derivation DG Lie algebra of a relative model: derivations of
//! `B ⊗ ΛW` vanishing on `B`, with differential `[D, -]` and the commutator
//! bracket. Degree 1 keeps cycles only.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::algebra::{basis_index, AlgElement, Monomial, Restriction, RelativeModel};
use crate::error::Error;
use crate::exact::{image_basis, kernel_basis, quotient_rank, Echelon, Quotient, Rational, SparseMatrix, SparseVec, SubspaceBasis};
use crate::par::Exec;

/// A `B`-linear derivation lowering degree by `degree`, stored by its values
/// on fiber generators (indices into the model's algebra).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub degree: i64,
    pub values: BTreeMap<usize, AlgElement>,
}

impl Derivation {
    pub fn zero(degree: i64) -> Self {
        Self { degree, values: BTreeMap::new() }
    }

    /// `(w, μ)`: sends `w` to `μ` and every other generator to zero.
    pub fn elementary(model: &RelativeModel, w: usize, mu: Monomial) -> Self {
        let degree = model.degree_of(w) as i64 - model.algebra().monomial_degree(&mu) as i64;
        let mut values = BTreeMap::new();
        values.insert(w, AlgElement::term(mu, Rational::one()));
        Self { degree, values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(AlgElement::is_zero)
    }

    pub fn value(&self, w: usize) -> AlgElement {
        self.values.get(&w).cloned().unwrap_or_default()
    }

    fn normalized(mut self) -> Self {
        self.values.retain(|_, v| !v.is_zero());
        self
    }

    pub fn add_scaled(&self, c: &Rational, other: &Derivation) -> Derivation {
        let mut values = self.values.clone();
        for (w, v) in &other.values {
            values.entry(*w).or_default().add_scaled(c, v);
        }
        Derivation { degree: self.degree, values }.normalized()
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        self.add_scaled(&Rational::one(), other)
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        self.add_scaled(&-Rational::one(), other)
    }

    pub fn scale(&self, c: &Rational) -> Derivation {
        Derivation { degree: self.degree, values: self.values.iter().map(|(w, v)| (*w, v.scale(c))).collect() }
            .normalized()
    }

    pub fn neg(&self) -> Derivation {
        self.scale(&-Rational::one())
    }

    pub fn apply(&self, model: &RelativeModel, target: &AlgElement) -> AlgElement {
        model.algebra().apply_derivation(&self.values, self.degree, target)
    }

    /// Sum of elementary derivations, e.g. `(s5,x3) - 2 (s7,s5)`.
    pub fn format(&self, model: &RelativeModel) -> String {
        let alg = model.algebra();
        let mut terms = Vec::new();
        for (w, v) in &self.values {
            for (m, c) in v.terms() {
                terms.push((format!("({},{})", alg.generator(*w).name, alg.format_monomial(m)), c.clone()));
            }
        }
        if terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (t, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mag = c.abs();
            if !mag.is_one() {
                s.push_str(&format!("{mag} "));
            }
            s.push_str(t);
        }
        s
    }
}

/// `𝒟θ = D∘θ − (−1)^n θ∘D`, evaluated on every fiber generator.
pub fn der_differential(model: &RelativeModel, theta: &Derivation) -> Derivation {
    let alg = model.algebra();
    let dmap = model.differential_map();
    let sign = if theta.degree.rem_euclid(2) == 0 { -Rational::one() } else { Rational::one() };
    let mut values = BTreeMap::new();
    for w in model.fiber_range() {
        let mut v = alg.apply_derivation(&dmap, -1, &theta.value(w));
        let dw = model.differential(w);
        if !dw.is_zero() {
            v.add_scaled(&sign, &theta.apply(model, dw));
        }
        if !v.is_zero() {
            values.insert(w, v);
        }
    }
    Derivation { degree: theta.degree - 1, values }
}

/// `[θ₁, θ₂] = θ₁∘θ₂ − (−1)^{|θ₁||θ₂|} θ₂∘θ₁`.
pub fn der_bracket(model: &RelativeModel, a: &Derivation, b: &Derivation) -> Derivation {
    let sign = if (a.degree * b.degree).rem_euclid(2) == 0 { -Rational::one() } else { Rational::one() };
    let mut values = BTreeMap::new();
    for w in model.fiber_range() {
        let mut v = a.apply(model, &b.value(w));
        v.add_scaled(&sign, &b.apply(model, &a.value(w)));
        if !v.is_zero() {
            values.insert(w, v);
        }
    }
    Derivation { degree: a.degree + b.degree, values }
}

/// Which elementary derivations a complex is built from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerKind {
    #[default]
    Full,
    /// Values in positive degrees only: drops every `(w, 1)`.
    Based,
}

/// Elementary derivations `(w, μ)` of one degree, ordered by fiber generator then monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerSlice {
    pub degree: i64,
    pub elements: Vec<(usize, Monomial)>,
    index: BTreeMap<(usize, Monomial), usize>,
}

impl DerSlice {
    fn build(model: &RelativeModel, degree: i64, kind: DerKind) -> Self {
        let mut elements = Vec::new();
        for w in model.fiber_range() {
            let target = model.degree_of(w) as i64 - degree;
            if target < 0 {
                continue;
            }
            for m in model.monomial_basis(target as u32, Restriction::Full) {
                if kind == DerKind::Based && m.is_unit() {
                    continue;
                }
                elements.push((w, m));
            }
        }
        let index = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Self { degree, elements, index }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, model: &RelativeModel, i: usize) -> Derivation {
        let (w, m) = &self.elements[i];
        Derivation::elementary(model, *w, m.clone())
    }

    /// `None` when a value leaves the slice (wrong degree or dropped element).
    pub fn coordinates(&self, theta: &Derivation) -> Option<SparseVec> {
        let mut pairs = Vec::new();
        for (w, v) in &theta.values {
            for (m, c) in v.terms() {
                pairs.push((*self.index.get(&(*w, m.clone()))?, c.clone()));
            }
        }
        Some(SparseVec::from_pairs(pairs))
    }

    pub fn derivation(&self, v: &SparseVec) -> Derivation {
        let mut values: BTreeMap<usize, AlgElement> = BTreeMap::new();
        for (i, c) in v.iter() {
            let (w, m) = &self.elements[i];
            values.entry(*w).or_default().add_term(m.clone(), c.clone());
        }
        Derivation { degree: self.degree, values }.normalized()
    }
}

/// The derivation complex through a degree window: slices `0..=N+1` and
/// the matrices of `𝒟` between them.
#[derive(Clone, Debug)]
pub struct DerComplex {
    model: RelativeModel,
    window: u32,
    kind: DerKind,
    exec: Exec,
    slices: Vec<DerSlice>,
    /// `differentials[n]`: slice `n` → slice `n−1`, for `n ≥ 1`
    differentials: Vec<SparseMatrix>,
}

impl DerComplex {
    pub fn new(model: &RelativeModel, window: u32, kind: DerKind, exec: Exec) -> Self {
        let top = window as usize + 1;
        let slices: Vec<DerSlice> = exec.map_range(0..top + 1, |n| DerSlice::build(model, n as i64, kind));
        let mut differentials = vec![SparseMatrix::zeros(0, slices[0].len())];
        for n in 1..=top {
            let (src, dst) = (&slices[n], &slices[n - 1]);
            let cols = exec.map_range(0..src.len(), |i| {
                let image = der_differential(model, &src.element(model, i));
                dst.coordinates(&image).expect("𝒟 leaves the elementary basis")
            });
            differentials.push(SparseMatrix::from_columns(dst.len(), &cols));
        }
        Self { model: model.clone(), window, kind, exec, slices, differentials }
    }

    pub fn model(&self) -> &RelativeModel {
        &self.model
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn kind(&self) -> DerKind {
        self.kind
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// Elementary slice of a degree in `0..=N+1`.
    pub fn slice(&self, n: u32) -> &DerSlice {
        &self.slices[n as usize]
    }

    /// Matrix of `𝒟` from degree `n` to `n−1`, `1 ≤ n ≤ N+1`.
    pub fn differential_matrix(&self, n: u32) -> &SparseMatrix {
        &self.differentials[n as usize]
    }

    /// Basis of the truncated complex in degree `n ≥ 1`: elementary
    /// derivations for `n ≥ 2`, a basis of the cycles for `n = 1`.
    pub fn basis(&self, n: u32) -> Vec<Derivation> {
        let slice = self.slice(n);
        if n == 1 {
            self.cycles(1).vectors.iter().map(|v| slice.derivation(v)).collect()
        } else {
            (0..slice.len()).map(|i| slice.element(&self.model, i)).collect()
        }
    }

    pub fn cycles(&self, n: u32) -> SubspaceBasis {
        kernel_basis(self.differential_matrix(n))
    }

    pub fn boundaries(&self, n: u32) -> SubspaceBasis {
        image_basis(self.differential_matrix(n + 1))
    }

    /// `𝒟∘𝒟 = 0` between every pair of consecutive matrices.
    pub fn check_d_squared(&self) -> Result<(), Error> {
        for n in 2..self.differentials.len() {
            if !self.differentials[n - 1].mul(&self.differentials[n]).is_zero() {
                return Err(Error::Invariant(format!("𝒟² ≠ 0 from degree {n}")));
            }
        }
        Ok(())
    }

    pub fn homology(&self) -> Result<HomologyReport, Error> {
        let degrees = self.exec.map_range(1..self.window as usize + 1, |n| {
            let n = n as u32;
            let q = quotient_rank(&self.cycles(n), &self.boundaries(n))?;
            let slice = self.slice(n);
            let reps = q.representatives.iter().map(|v| slice.derivation(v)).collect();
            Ok((n, HomologyDegree { rank: q.rank, representatives: reps, quotient: q }))
        });
        Ok(HomologyReport { window: self.window, kind: self.kind, degrees: degrees.into_iter().collect::<Result<_, Error>>()? })
    }

    /// Class of a cycle in representative coordinates.
    pub fn class_of(&self, report: &HomologyReport, theta: &Derivation) -> Result<Vec<Rational>, Error> {
        let n = u32::try_from(theta.degree).ok().filter(|n| (1..=self.window).contains(n));
        let n = n.ok_or_else(|| Error::Invariant(format!("degree {} outside the window", theta.degree)))?;
        let v = self
            .slice(n)
            .coordinates(theta)
            .ok_or_else(|| Error::Invariant("derivation leaves the elementary basis".into()))?;
        report.degrees[&n]
            .quotient
            .coordinates(&v)
            .ok_or_else(|| Error::Invariant(format!("{} is not a cycle", theta.format(&self.model))))
    }

    /// Brackets of homology representatives `(p,i) ≤ (q,j)` with `p + q ≤ N`.
    pub fn homology_bracket(&self, report: &HomologyReport) -> Result<BracketTable, Error> {
        let mut pairs = Vec::new();
        for (&p, hp) in &report.degrees {
            for (&q, hq) in report.degrees.range(p..) {
                if p + q > self.window {
                    break;
                }
                for i in 0..hp.rank {
                    let start = if p == q { i } else { 0 };
                    for j in start..hq.rank {
                        pairs.push(((p, i), (q, j)));
                    }
                }
            }
        }
        let entries = self.exec.map(&pairs, |&((p, i), (q, j))| {
            let a = &report.degrees[&p].representatives[i];
            let b = &report.degrees[&q].representatives[j];
            let c = self.class_of(report, &der_bracket(&self.model, a, b))?;
            Ok(BracketEntry { left: (p, i), right: (q, j), coefficients: c })
        });
        let entries: Vec<BracketEntry> = entries.into_iter().collect::<Result<_, Error>>()?;
        Ok(BracketTable {
            window: self.window,
            pairs_checked: entries.len(),
            entries: entries.into_iter().filter(|e| !e.is_zero()).collect(),
        })
    }

    /// First triple of representatives whose iterated bracket `[[ξ₁,ξ₂],ξ₃]`
    /// is nonzero in homology, if any.
    pub fn first_nonzero_triple(&self, report: &HomologyReport) -> Result<Option<TripleWitness>, Error> {
        let reps: Vec<(u32, usize)> =
            report.degrees.iter().flat_map(|(&n, h)| (0..h.rank).map(move |i| (n, i))).collect();
        let mut triples = Vec::new();
        for &a in &reps {
            for &b in &reps {
                for &c in &reps {
                    if a.0 + b.0 + c.0 <= self.window {
                        triples.push([a, b, c]);
                    }
                }
            }
        }
        let found = self.exec.map(&triples, |t| {
            let r = |(n, i): (u32, usize)| &report.degrees[&n].representatives[i];
            let inner = der_bracket(&self.model, r(t[0]), r(t[1]));
            let outer = der_bracket(&self.model, &inner, r(t[2]));
            if outer.is_zero() {
                return Ok(None);
            }
            let c = self.class_of(report, &outer)?;
            Ok(c.iter().any(|x| !x.is_zero()).then_some(TripleWitness { indices: *t, coefficients: c }))
        });
        for f in found {
            if let Some(w) = f? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug)]
pub struct HomologyDegree {
    pub rank: usize,
    pub representatives: Vec<Derivation>,
    pub quotient: Quotient,
}

/// Homology of the truncated complex in degrees `1..=N`.
#[derive(Clone, Debug)]
pub struct HomologyReport {
    pub window: u32,
    pub kind: DerKind,
    pub degrees: BTreeMap<u32, HomologyDegree>,
}

impl HomologyReport {
    /// Nonzero ranks by degree.
    pub fn ranks(&self) -> BTreeMap<u32, usize> {
        self.degrees.iter().filter(|(_, h)| h.rank > 0).map(|(&n, h)| (n, h.rank)).collect()
    }

    pub fn rank(&self, n: u32) -> usize {
        self.degrees.get(&n).map_or(0, |h| h.rank)
    }
}

/// `[ξ_{p,i}, ξ_{q,j}] = Σ_k coefficients[k] ξ_{p+q,k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketEntry {
    pub left: (u32, usize),
    pub right: (u32, usize),
    pub coefficients: Vec<Rational>,
}

impl BracketEntry {
    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> u32 {
        self.left.0 + self.right.0
    }
}

/// Nonzero structure constants of the homology bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTable {
    pub window: u32,
    pub pairs_checked: usize,
    pub entries: Vec<BracketEntry>,
}

impl BracketTable {
    pub fn is_abelian(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleWitness {
    pub indices: [(u32, usize); 3],
    pub coefficients: Vec<Rational>,
}

pub fn homology(model: &RelativeModel, window: u32) -> Result<HomologyReport, Error> {
    DerComplex::new(model, window, DerKind::Full, Exec::default()).homology()
}

/// Homology of the sub-DGL of derivations with values in `(B ⊗ ΛW)₊`.
pub fn based_variant_complex(model: &RelativeModel, window: u32) -> Result<HomologyReport, Error> {
    DerComplex::new(model, window, DerKind::Based, Exec::default()).homology()
}

/// Smallest degree of a fiber generator with nonzero differential, or the
/// top fiber degree when `D` vanishes on `W`.
pub fn n_invariant(model: &RelativeModel) -> Result<u32, Error> {
    if !model.is_pure() {
        return Err(Error::NotPure);
    }
    Ok(model
        .fiber_range()
        .filter(|&w| !model.differential(w).is_zero())
        .map(|w| model.degree_of(w))
        .min()
        .unwrap_or_else(|| model.top_fiber_degree()))
}

/// Fiber elements whose differential is a coboundary below their own degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelReport {
    /// per fiber degree: basis of the kernel as combinations of that degree's generators
    pub kernel: BTreeMap<u32, Vec<AlgElement>>,
    /// per fiber degree: dimension of the kernel (the rank of the image of J)
    pub j_ranks: BTreeMap<u32, usize>,
}

impl KernelReport {
    pub fn dim(&self) -> usize {
        self.j_ranks.values().sum()
    }

    /// Whether the kernel is zero in every degree below `degree`.
    pub fn vanishes_below(&self, degree: u32) -> bool {
        self.j_ranks.range(..degree).all(|(_, &r)| r == 0)
    }
}

pub fn ker_dw_and_j(model: &RelativeModel) -> Result<KernelReport, Error> {
    if !model.is_pure() {
        return Err(Error::NotPure);
    }
    let alg = model.algebra();
    let dmap = model.differential_map();
    let mut kernel = BTreeMap::new();
    let mut j_ranks = BTreeMap::new();
    for k in model.fiber_degrees() {
        let gens: Vec<usize> = model.fiber_range().filter(|&w| model.degree_of(w) == k).collect();
        let below = |i: usize| model.is_base(i) || model.degree_of(i) < k;
        let src = alg.monomials(k, below);
        let dst = alg.monomials(k + 1, below);
        let dst_index = basis_index(&dst);
        let mut coboundaries = Echelon::new(dst.len());
        for m in &src {
            let image = alg.apply_derivation(&dmap, -1, &AlgElement::term(m.clone(), Rational::one()));
            coboundaries.insert(&alg.coordinates(&image, &dst_index).expect("restricted D stays below"));
        }
        let residues: Vec<SparseVec> = gens
            .iter()
            .map(|&w| {
                let v = alg.coordinates(model.differential(w), &dst_index).expect("pure differential lies in B");
                coboundaries.reduce(&v).remainder
            })
            .collect();
        let ker = kernel_basis(&SparseMatrix::from_columns(dst.len(), &residues));
        let elems: Vec<AlgElement> = ker
            .vectors
            .iter()
            .map(|v| {
                let mut e = AlgElement::zero();
                for (i, c) in v.iter() {
                    e.add_scaled(c, &alg.gen_element(gens[i]));
                }
                e
            })
            .collect();
        j_ranks.insert(k, elems.len());
        kernel.insert(k, elems);
    }
    Ok(KernelReport { kernel, j_ranks })
}

/// Whether every `D(w)` is a decomposable class in `H(B)`.
pub fn whitehead_trivial(model: &RelativeModel) -> Result<bool, Error> {
    if !model.is_pure() {
        return Err(Error::NotPure);
    }
    Ok(model.fiber_range().all(|w| model.is_decomposable_class(model.differential(w))))
}
