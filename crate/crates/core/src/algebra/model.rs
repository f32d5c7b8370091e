//! Relative Sullivan models `B, d_B → B ⊗ ΛW, D`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{basis_index, AlgElement, Algebra, Generator, Homogeneity, Monomial};
use crate::error::Error;
use crate::exact::{kernel_basis, quotient_rank, Echelon, SparseMatrix, SparseVec, SubspaceBasis};

/// A fiber generator with an optional explicit nilpotence stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberGenerator {
    pub generator: Generator,
    pub stage: Option<u32>,
}

impl FiberGenerator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Self { generator: Generator::new(name, degree), stage: None }
    }

    pub fn staged(name: impl Into<String>, degree: u32, stage: u32) -> Self {
        Self { generator: Generator::new(name, degree), stage: Some(stage) }
    }
}

/// Which monomials of `B ⊗ ΛW` a basis enumeration keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restriction {
    Full,
    BaseOnly,
    FiberOnly,
    /// `B₊ ⊗ ΛW`
    BasePositive,
}

/// `B ⊗ ΛW` with `D = d_B + d_W + d_T`. Base generators come first in the
/// canonical order, fiber generators after them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeModel {
    algebra: Algebra,
    base_count: usize,
    stages: Vec<u32>,
    differential: Vec<AlgElement>,
}

impl RelativeModel {
    /// A model with zero differential. Fiber stages default to the degree.
    pub fn new(base: Vec<Generator>, fiber: Vec<FiberGenerator>) -> Self {
        let base_count = base.len();
        let stages = fiber.iter().map(|f| f.stage.unwrap_or(f.generator.degree)).collect();
        let mut gens = base;
        gens.extend(fiber.into_iter().map(|f| f.generator));
        let n = gens.len();
        Self { algebra: Algebra::new(gens), base_count, stages, differential: vec![AlgElement::zero(); n] }
    }

    pub fn set_differential(&mut self, generator: usize, value: AlgElement) {
        self.differential[generator] = value;
    }

    /// Builder form of [`RelativeModel::set_differential`], by generator name.
    pub fn with_differential(mut self, name: &str, value: AlgElement) -> Self {
        let i = self.algebra.index_of(name).unwrap_or_else(|| panic!("unknown generator `{name}`"));
        self.differential[i] = value;
        self
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn base_count(&self) -> usize {
        self.base_count
    }

    pub fn base_range(&self) -> Range<usize> {
        0..self.base_count
    }

    pub fn fiber_range(&self) -> Range<usize> {
        self.base_count..self.algebra.len()
    }

    pub fn fiber_count(&self) -> usize {
        self.algebra.len() - self.base_count
    }

    pub fn is_base(&self, i: usize) -> bool {
        i < self.base_count
    }

    pub fn stage(&self, fiber_index: usize) -> u32 {
        self.stages[fiber_index - self.base_count]
    }

    pub fn generator(&self, i: usize) -> &Generator {
        self.algebra.generator(i)
    }

    pub fn degree_of(&self, i: usize) -> u32 {
        self.algebra.generator(i).degree
    }

    pub fn differential(&self, i: usize) -> &AlgElement {
        &self.differential[i]
    }

    /// `D` as a map on generators, for Leibniz extension.
    pub fn differential_map(&self) -> BTreeMap<usize, AlgElement> {
        self.differential
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i, v.clone()))
            .collect()
    }

    pub fn apply_d(&self, a: &AlgElement) -> AlgElement {
        self.algebra.apply_derivation(&self.differential_map(), -1, a)
    }

    pub fn fiber_degrees(&self) -> BTreeSet<u32> {
        self.fiber_range().map(|i| self.degree_of(i)).collect()
    }

    pub fn top_fiber_degree(&self) -> u32 {
        self.fiber_degrees().into_iter().max().unwrap_or(0)
    }

    /// Default degree bound for whole-algebra traversals.
    pub fn default_window(&self) -> u32 {
        2 * self.top_fiber_degree() + 2
    }

    pub fn base_part(&self, m: &Monomial) -> Monomial {
        m.restrict(self.base_range())
    }

    pub fn fiber_part(&self, m: &Monomial) -> Monomial {
        m.restrict(self.fiber_range())
    }

    pub fn is_base_monomial(&self, m: &Monomial) -> bool {
        m.length_in(self.fiber_range()) == 0
    }

    pub fn monomial_basis(&self, degree: u32, restriction: Restriction) -> Vec<Monomial> {
        let base = self.base_range();
        let fiber = self.fiber_range();
        let all = match restriction {
            Restriction::BaseOnly => return self.algebra.monomials(degree, |i| base.contains(&i)),
            Restriction::FiberOnly => return self.algebra.monomials(degree, |i| fiber.contains(&i)),
            _ => self.algebra.monomials(degree, |_| true),
        };
        match restriction {
            Restriction::BasePositive => all.into_iter().filter(|m| m.length_in(self.base_range()) > 0).collect(),
            _ => all,
        }
    }

    /// `d_W`: the part of `D(w)` without base factors.
    pub fn fiber_differential(&self, i: usize) -> AlgElement {
        self.differential[i].filter(|m| m.length_in(self.base_range()) == 0)
    }

    /// `d_T`: the part of `D(w)` with a positive-degree base factor.
    pub fn twisted_differential(&self, i: usize) -> AlgElement {
        self.differential[i].filter(|m| m.length_in(self.base_range()) > 0)
    }

    /// Same generators, differential replaced on the fiber.
    pub fn with_fiber_differential(&self, values: &BTreeMap<usize, AlgElement>) -> Self {
        let mut out = self.clone();
        for i in self.fiber_range() {
            out.differential[i] = values.get(&i).cloned().unwrap_or_default();
        }
        out
    }

    pub fn is_pure(&self) -> bool {
        self.fiber_range().all(|i| self.differential[i].terms().all(|(m, _)| self.is_base_monomial(m)))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let alg = &self.algebra;
        let mut seen = BTreeSet::new();
        for (i, g) in alg.generators().iter().enumerate() {
            let name = g.name.clone();
            if !seen.insert(g.name.as_str()) {
                v.push(Violation::DuplicateName { generator: name.clone() });
            }
            if g.degree == 0 {
                v.push(Violation::ZeroDegree { generator: name.clone() });
            }
            match g.truncation {
                Some(_) if g.is_odd() => v.push(Violation::TruncationOnOdd { generator: name.clone() }),
                Some(_) if !self.is_base(i) => v.push(Violation::TruncatedFiber { generator: name.clone() }),
                Some(k) if k < 2 => v.push(Violation::TruncationTooSmall { generator: name.clone() }),
                None if self.is_base(i) && !g.is_odd() => {
                    v.push(Violation::InfiniteBase { generator: name.clone() })
                }
                _ => {}
            }
        }
        if !v.is_empty() {
            // enumeration below needs positive degrees and sane truncations
            return ValidationReport { violations: v };
        }

        let dmap = self.differential_map();
        for i in 0..alg.len() {
            let g = alg.generator(i);
            let dg = &self.differential[i];
            match alg.homogeneity(dg) {
                Homogeneity::Zero => {}
                Homogeneity::Degree(d) if d == g.degree + 1 => {}
                other => v.push(Violation::DegreeMismatch {
                    generator: g.name.clone(),
                    expected: g.degree + 1,
                    found: match other {
                        Homogeneity::Degree(d) => Some(d),
                        _ => None,
                    },
                }),
            }
            if self.is_base(i) {
                if dg.terms().any(|(m, _)| !self.is_base_monomial(m)) {
                    v.push(Violation::BaseDifferentialLeavesBase { generator: g.name.clone() });
                }
                if let Some(k) = g.truncation {
                    // d(g^k) = k g^{k-1} dg must vanish in the quotient
                    let gk1 = AlgElement::term(
                        Monomial::from_exponents(
                            (0..alg.len()).map(|j| if j == i { k - 1 } else { 0 }).collect(),
                        ),
                        crate::exact::rational(1),
                    );
                    if !dg.is_zero() && !alg.multiply(&gk1, dg).is_zero() {
                        v.push(Violation::TruncationIdeal { generator: g.name.clone() });
                    }
                }
            } else {
                let fr = self.fiber_range();
                if dg.terms().any(|(m, _)| m.length_in(self.base_range()) == 0 && m.length_in(fr.clone()) < 2) {
                    v.push(Violation::LinearFiberTerm { generator: g.name.clone() });
                }
                let stage = self.stage(i);
                let mut offenders = BTreeSet::new();
                for (m, _) in dg.terms() {
                    for j in self.fiber_range() {
                        if m.exponent(j) > 0 && self.stage(j) >= stage {
                            offenders.insert(alg.generator(j).name.clone());
                        }
                    }
                }
                for off in offenders {
                    v.push(Violation::Nilpotence { generator: g.name.clone(), offending: off });
                }
            }
            let dd = alg.apply_derivation(&dmap, -1, dg);
            if !dd.is_zero() {
                v.push(Violation::DSquared { generator: g.name.clone() });
            }
        }
        ValidationReport { violations: v }
    }

    /// Validates and returns the model, or every violation found.
    pub fn validated(self) -> Result<Self, Error> {
        let report = self.validate();
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(report.violations))
        }
    }

    fn base_d_matrix(&self, from: &[Monomial], to_index: &BTreeMap<Monomial, usize>, to_len: usize) -> SparseMatrix {
        let alg = &self.algebra;
        let dmap = self.differential_map();
        let cols: Vec<SparseVec> = from
            .iter()
            .map(|m| {
                let img = alg.apply_derivation(&dmap, -1, &AlgElement::term(m.clone(), crate::exact::rational(1)));
                alg.coordinates(&img, to_index).expect("d_B leaves the base")
            })
            .collect();
        SparseMatrix::from_columns(to_len, &cols)
    }

    /// Cocycles and coboundaries of `(B, d_B)` in one degree, in base-monomial coordinates.
    fn base_cycles_and_boundaries(&self, degree: u32) -> (Vec<Monomial>, SubspaceBasis, SubspaceBasis) {
        let basis = self.monomial_basis(degree, Restriction::BaseOnly);
        let idx = basis_index(&basis);
        let up = self.monomial_basis(degree + 1, Restriction::BaseOnly);
        let up_idx = basis_index(&up);
        let cycles = kernel_basis(&self.base_d_matrix(&basis, &up_idx, up.len()));
        let boundaries = if degree == 0 {
            SubspaceBasis::new(basis.len(), vec![])
        } else {
            let down = self.monomial_basis(degree - 1, Restriction::BaseOnly);
            crate::exact::image_basis(&self.base_d_matrix(&down, &idx, basis.len()))
        };
        (basis, cycles, boundaries)
    }

    /// Coordinates of the decomposable cocycles `Z⁺·Z⁺` in a degree, plus coboundaries.
    fn decomposable_span(&self, degree: u32) -> (Vec<Monomial>, Echelon, SubspaceBasis) {
        let (basis, _, boundaries) = self.base_cycles_and_boundaries(degree);
        let idx = basis_index(&basis);
        let alg = &self.algebra;
        let mut ech = Echelon::new(basis.len());
        for b in &boundaries.vectors {
            ech.insert(b);
        }
        for i in 1..degree {
            let (bi, zi, _) = self.base_cycles_and_boundaries(i);
            let (bj, zj, _) = self.base_cycles_and_boundaries(degree - i);
            for u in &zi.vectors {
                for w in &zj.vectors {
                    let p = alg.multiply(&alg.from_coordinates(u, &bi), &alg.from_coordinates(w, &bj));
                    ech.insert(&alg.coordinates(&p, &idx).expect("product stays in base"));
                }
            }
        }
        (basis, ech, boundaries)
    }

    pub fn base_cohomology(&self, degree: u32) -> BaseCohomology {
        let (basis, cycles, boundaries) = self.base_cycles_and_boundaries(degree);
        let q = quotient_rank(&cycles, &boundaries).expect("d_B squares to zero");
        let reps = q.representatives.iter().map(|v| self.algebra.from_coordinates(v, &basis)).collect();
        let (_, ech, bnd) = self.decomposable_span(degree);
        BaseCohomology { degree, rank: q.rank, representatives: reps, decomposable_rank: ech.rank() - bnd.dim() }
    }

    /// Whether a base cocycle is cohomologous to a sum of products of positive-degree cocycles.
    pub fn is_decomposable_class(&self, cocycle: &AlgElement) -> bool {
        let degree = match self.algebra.homogeneity(cocycle) {
            Homogeneity::Zero => return true,
            Homogeneity::Degree(d) => d,
            Homogeneity::Mixed => return false,
        };
        let (basis, ech, _) = self.decomposable_span(degree);
        match self.algebra.coordinates(cocycle, &basis_index(&basis)) {
            Some(v) => ech.contains(&v),
            None => false,
        }
    }
}

/// `H^k(B, d_B)` with the rank of the decomposable part `H⁺·H⁺`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseCohomology {
    pub degree: u32,
    pub rank: usize,
    pub representatives: Vec<AlgElement>,
    pub decomposable_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DuplicateName { generator: String },
    ZeroDegree { generator: String },
    TruncationOnOdd { generator: String },
    TruncatedFiber { generator: String },
    TruncationTooSmall { generator: String },
    InfiniteBase { generator: String },
    DegreeMismatch { generator: String, expected: u32, found: Option<u32> },
    BaseDifferentialLeavesBase { generator: String },
    TruncationIdeal { generator: String },
    LinearFiberTerm { generator: String },
    Nilpotence { generator: String, offending: String },
    DSquared { generator: String },
}

impl Violation {
    pub fn generator(&self) -> &str {
        match self {
            Violation::DuplicateName { generator }
            | Violation::ZeroDegree { generator }
            | Violation::TruncationOnOdd { generator }
            | Violation::TruncatedFiber { generator }
            | Violation::TruncationTooSmall { generator }
            | Violation::InfiniteBase { generator }
            | Violation::DegreeMismatch { generator, .. }
            | Violation::BaseDifferentialLeavesBase { generator }
            | Violation::TruncationIdeal { generator }
            | Violation::LinearFiberTerm { generator }
            | Violation::Nilpotence { generator, .. }
            | Violation::DSquared { generator } => generator,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName { generator } => write!(f, "generator `{generator}` declared twice"),
            Violation::ZeroDegree { generator } => write!(f, "generator `{generator}` has degree 0"),
            Violation::TruncationOnOdd { generator } => {
                write!(f, "odd generator `{generator}` cannot carry a truncation")
            }
            Violation::TruncatedFiber { generator } => {
                write!(f, "fiber generator `{generator}` cannot be truncated")
            }
            Violation::TruncationTooSmall { generator } => {
                write!(f, "truncation of `{generator}` must be at least 2")
            }
            Violation::InfiniteBase { generator } => {
                write!(f, "even base generator `{generator}` needs a truncation (base must be finite-dimensional)")
            }
            Violation::DegreeMismatch { generator, expected, found } => match found {
                Some(d) => write!(f, "d {generator} has degree {d}, expected {expected}"),
                None => write!(f, "d {generator} is not homogeneous (expected degree {expected})"),
            },
            Violation::BaseDifferentialLeavesBase { generator } => {
                write!(f, "d {generator} involves fiber generators")
            }
            Violation::TruncationIdeal { generator } => {
                write!(f, "d {generator} does not preserve the truncation ideal")
            }
            Violation::LinearFiberTerm { generator } => {
                write!(f, "d {generator} has a term of word length < 2 in the fiber with no base factor")
            }
            Violation::Nilpotence { generator, offending } => {
                write!(f, "d {generator} involves `{offending}` from the same or a later stage")
            }
            Violation::DSquared { generator } => write!(f, "D² {generator} ≠ 0"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}
