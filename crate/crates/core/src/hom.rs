//! The convolution complex `Hom(B^♯, Der(ΛW))` with perturbed differential
//! `D_φ`, and the map `Ψ` from base-linear derivations into it.
//!
//! Grading: the dual `β_b` of a base monomial `b` has degree `−|b|`, so the
//! component of a degree-`n` element at `β_b` lowers fiber degree by `n + |b|`.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::algebra::{basis_index, AlgElement, Monomial, Restriction, RelativeModel};
use crate::derivation::{der_bracket, der_differential, Derivation, DerComplex, DerKind};
use crate::exact::{kernel_basis, rank, Rational, SparseMatrix, SparseVec};
use crate::par::Exec;

fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Dual basis of the base monomials with coproduct and dual differential.
#[derive(Clone, Debug)]
pub struct DualBasis {
    pub monomials: Vec<Monomial>,
    pub degrees: Vec<u32>,
    index: BTreeMap<Monomial, usize>,
    /// `Δβ_c = Σ coproduct[c][(a, b)] β_a ⊗ β_b`
    pub coproduct: Vec<BTreeMap<(usize, usize), Rational>>,
    /// `d^♯β_c = Σ dual_differential[c][b] β_b`
    pub dual_differential: Vec<BTreeMap<usize, Rational>>,
}

impl DualBasis {
    pub fn new(model: &RelativeModel) -> Self {
        let alg = model.algebra();
        let top = base_top_degree(model);
        let monomials: Vec<Monomial> =
            (0..=top).flat_map(|k| model.monomial_basis(k, Restriction::BaseOnly)).collect();
        let degrees: Vec<u32> = monomials.iter().map(|m| alg.monomial_degree(m)).collect();
        let index = basis_index(&monomials);
        let n = monomials.len();
        let mut coproduct = vec![BTreeMap::new(); n];
        for (a, ma) in monomials.iter().enumerate() {
            for (b, mb) in monomials.iter().enumerate() {
                if let Some((neg, c)) = alg.mul_monomials(ma, mb) {
                    let koszul = (degrees[a] * degrees[b]) % 2 == 1;
                    coproduct[index[&c]].insert((a, b), sign(neg != koszul));
                }
            }
        }
        let dmap = model.differential_map();
        let mut dual_differential = vec![BTreeMap::new(); n];
        for (b, mb) in monomials.iter().enumerate() {
            let db = alg.apply_derivation(&dmap, -1, &AlgElement::term(mb.clone(), Rational::one()));
            for (mc, coef) in db.terms() {
                let c = index[mc];
                dual_differential[c].insert(b, sign(degrees[b] % 2 == 1) * coef);
            }
        }
        Self { monomials, degrees, index, coproduct, dual_differential }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// `⟨β_a ⊗ β_b, a' ⊗ b'⟩` with the Koszul sign from moving `β_b` past `a'`.
    pub fn pair_tensor(&self, (a, b): (usize, usize), (a2, b2): (usize, usize)) -> Rational {
        if a != a2 || b != b2 {
            return Rational::zero();
        }
        sign((self.degrees[a] * self.degrees[b]) % 2 == 1)
    }
}

fn base_top_degree(model: &RelativeModel) -> u32 {
    model
        .base_range()
        .map(|i| {
            let g = model.generator(i);
            g.degree * g.max_exponent().unwrap_or(0)
        })
        .sum()
}

/// Element of the convolution complex: a fiber derivation for each dual element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomElement {
    pub degree: i64,
    pub components: BTreeMap<usize, Derivation>,
}

impl HomElement {
    pub fn zero(degree: i64) -> Self {
        Self { degree, components: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(Derivation::is_zero)
    }

    pub fn component(&self, b: usize, dual: &DualBasis) -> Derivation {
        self.components
            .get(&b)
            .cloned()
            .unwrap_or_else(|| Derivation::zero(self.degree + dual.degrees[b] as i64))
    }

    fn add_component(&mut self, b: usize, c: &Rational, x: &Derivation) {
        if c.is_zero() || x.is_zero() {
            return;
        }
        let entry = self.components.entry(b).or_insert_with(|| Derivation::zero(x.degree));
        *entry = entry.add_scaled(c, x);
        if entry.is_zero() {
            self.components.remove(&b);
        }
    }

    pub fn add_scaled(&self, c: &Rational, other: &HomElement) -> HomElement {
        let mut out = self.clone();
        for (b, x) in &other.components {
            out.add_component(*b, c, x);
        }
        out
    }

    pub fn sub(&self, other: &HomElement) -> HomElement {
        self.add_scaled(&-Rational::one(), other)
    }
}

/// Deliberate sign faults for negative-control runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of the `{φ̃, f}` term of `D_φ`.
    TwistSign,
    /// Flip the sign of the `f∘d^♯` term of `D_φ`.
    DualDifferentialSign,
}

/// Everything needed to evaluate `D_φ` and the convolution bracket.
#[derive(Clone, Debug)]
pub struct HomComplex {
    model: RelativeModel,
    pub dual: DualBasis,
    /// `d_W` as a fiber derivation of degree −1
    fiber_differential: Derivation,
    pub phi_tilde: HomElement,
    fault: Fault,
}

impl HomComplex {
    pub fn new(model: &RelativeModel) -> Self {
        Self::with_fault(model, Fault::None)
    }

    pub fn with_fault(model: &RelativeModel, fault: Fault) -> Self {
        let dual = DualBasis::new(model);
        let fiber_differential = Derivation {
            degree: -1,
            values: model
                .fiber_range()
                .map(|w| (w, model.fiber_differential(w)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        };
        let phi_tilde = phi_tilde(model, &dual);
        Self { model: model.clone(), dual, fiber_differential, phi_tilde, fault }
    }

    pub fn model(&self) -> &RelativeModel {
        &self.model
    }

    pub fn phi(&self, theta: &Derivation) -> HomElement {
        phi(&self.model, &self.dual, theta)
    }

    /// `D_φ f = [d_W, f] − (−1)^n f∘d^♯ + {φ̃, f}`.
    pub fn differential(&self, f: &HomElement) -> HomElement {
        let n = f.degree;
        let mut out = HomElement::zero(n - 1);
        for (&b, x) in &f.components {
            // [d_W, X] = d_W X − (−1)^{|X|} X d_W, which is 𝒟 for the fiber-only differential
            let dx = fiber_commutator(&self.model, &self.fiber_differential, x);
            out.add_component(b, &Rational::one(), &dx);
        }
        let mut dual_sign = -sign(n.rem_euclid(2) == 1);
        if self.fault == Fault::DualDifferentialSign {
            dual_sign = -dual_sign;
        }
        for c in 0..self.dual.len() {
            for (&b, coef) in &self.dual.dual_differential[c] {
                if let Some(x) = f.components.get(&b) {
                    out.add_component(c, &(&dual_sign * coef), x);
                }
            }
        }
        let twist = self.bracket(&self.phi_tilde, f);
        let twist_sign = if self.fault == Fault::TwistSign { -Rational::one() } else { Rational::one() };
        out.add_scaled(&twist_sign, &twist)
    }

    /// `{f, g}(β_c) = Σ Δ^c_{ab} (−1)^{|g||a|} [f(β_a), g(β_b)]`.
    pub fn bracket(&self, f: &HomElement, g: &HomElement) -> HomElement {
        let mut out = HomElement::zero(f.degree + g.degree);
        for (c, terms) in self.dual.coproduct.iter().enumerate() {
            for (&(a, b), coef) in terms {
                let (Some(x), Some(y)) = (f.components.get(&a), g.components.get(&b)) else { continue };
                let s = sign((g.degree.rem_euclid(2) as u32 * self.dual.degrees[a]) % 2 == 1);
                out.add_component(c, &(coef * s), &der_bracket(&self.model, x, y));
            }
        }
        out
    }
}

fn fiber_commutator(model: &RelativeModel, dw: &Derivation, x: &Derivation) -> Derivation {
    let s = if x.degree.rem_euclid(2) == 1 { Rational::one() } else { -Rational::one() };
    let mut values = BTreeMap::new();
    for w in model.fiber_range() {
        let mut v = dw.apply(model, &x.value(w));
        v.add_scaled(&s, &x.apply(model, &dw.value(w)));
        if !v.is_zero() {
            values.insert(w, v);
        }
    }
    Derivation { degree: x.degree - 1, values }
}

/// `Φ(θ)(β_b)(w) = (−1)^{n|b|} θ_b(w)` where `θ(w) = Σ_b b·θ_b(w)`.
pub fn phi(model: &RelativeModel, dual: &DualBasis, theta: &Derivation) -> HomElement {
    let n = theta.degree;
    let mut out = HomElement::zero(n);
    for (&w, value) in &theta.values {
        for (m, c) in value.terms() {
            let b = dual.index_of(&model.base_part(m)).expect("base part is a base monomial");
            let v = model.fiber_part(m);
            let s = sign((n.rem_euclid(2) as u32 * dual.degrees[b]) % 2 == 1);
            let mut values = BTreeMap::new();
            values.insert(w, AlgElement::term(v, c * s));
            let x = Derivation { degree: n + dual.degrees[b] as i64, values };
            out.add_component(b, &Rational::one(), &x);
        }
    }
    out
}

/// `Φ(d_T)`: the degree −1 twisting element, supported on positive-degree duals.
pub fn phi_tilde(model: &RelativeModel, dual: &DualBasis) -> HomElement {
    let twist = Derivation {
        degree: -1,
        values: model
            .fiber_range()
            .map(|w| (w, model.twisted_differential(w)))
            .filter(|(_, v)| !v.is_zero())
            .collect(),
    };
    phi(model, dual, &twist)
}

/// Basis `(β_b, w, v)` of the convolution complex in one degree, enumerated
/// directly from the dual basis and fiber monomials.
#[derive(Clone, Debug)]
pub struct HomSlice {
    pub degree: i64,
    pub elements: Vec<(usize, usize, Monomial)>,
    index: BTreeMap<(usize, usize, Monomial), usize>,
}

impl HomSlice {
    pub fn new(model: &RelativeModel, dual: &DualBasis, degree: i64) -> Self {
        let mut elements = Vec::new();
        for b in 0..dual.len() {
            for w in model.fiber_range() {
                let target = model.degree_of(w) as i64 - degree - dual.degrees[b] as i64;
                if target < 0 {
                    continue;
                }
                for v in model.monomial_basis(target as u32, Restriction::FiberOnly) {
                    elements.push((b, w, v));
                }
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

    pub fn element(&self, dual: &DualBasis, i: usize) -> HomElement {
        let (b, w, v) = &self.elements[i];
        let mut values = BTreeMap::new();
        values.insert(*w, AlgElement::term(v.clone(), Rational::one()));
        let mut out = HomElement::zero(self.degree);
        out.components.insert(*b, Derivation { degree: self.degree + dual.degrees[*b] as i64, values });
        out
    }

    pub fn coordinates(&self, f: &HomElement) -> Option<SparseVec> {
        let mut pairs = Vec::new();
        for (&b, x) in &f.components {
            for (&w, v) in &x.values {
                for (m, c) in v.terms() {
                    pairs.push((*self.index.get(&(b, w, m.clone()))?, c.clone()));
                }
            }
        }
        Some(SparseVec::from_pairs(pairs))
    }
}

/// Outcome of checking that `Ψ` is an isomorphism of DG Lie algebras through a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiReport {
    pub window: u32,
    /// per degree: (dim Der^n, dim Hom^n, rank of Ψ on the slice)
    pub slices: BTreeMap<u32, (usize, usize, usize)>,
    pub differential_checks: usize,
    pub bracket_checks: usize,
    pub square_checks: usize,
    pub degree_one_cycles: (usize, usize),
    pub counterexample: Option<String>,
}

impl PsiReport {
    pub fn success(&self) -> bool {
        self.counterexample.is_none()
    }
}

pub fn verify_psi(model: &RelativeModel, window: u32, exec: Exec) -> PsiReport {
    verify_psi_with(&HomComplex::new(model), window, exec)
}

pub fn verify_psi_with(hom: &HomComplex, window: u32, exec: Exec) -> PsiReport {
    let model = hom.model();
    let der = DerComplex::new(model, window, DerKind::Full, exec);
    let hom_slices: Vec<HomSlice> =
        exec.map_range(0..window as usize + 2, |n| HomSlice::new(model, &hom.dual, n as i64));
    let mut report = PsiReport {
        window,
        slices: BTreeMap::new(),
        differential_checks: 0,
        bracket_checks: 0,
        square_checks: 0,
        degree_one_cycles: (0, 0),
        counterexample: None,
    };
    let mut first_failure: Option<String> = None;
    let mut fail = |msg: String| {
        if first_failure.is_none() {
            first_failure = Some(msg);
        }
    };

    // bijectivity on each slice
    for n in 1..=window {
        let ds = der.slice(n);
        let hs = &hom_slices[n as usize];
        let cols: Vec<Option<SparseVec>> = (0..ds.len()).map(|i| hs.coordinates(&hom.phi(&ds.element(model, i)))).collect();
        if cols.iter().any(Option::is_none) {
            fail(format!("Ψ leaves the degree {n} slice"));
            continue;
        }
        let cols: Vec<SparseVec> = cols.into_iter().flatten().collect();
        let r = rank(&SparseMatrix::from_columns(hs.len(), &cols));
        report.slices.insert(n, (ds.len(), hs.len(), r));
        if r != ds.len() || r != hs.len() {
            fail(format!("Ψ is not bijective in degree {n}: dims {} → {}, rank {r}", ds.len(), hs.len()));
        }
    }

    // Ψ𝒟 = D_φΨ on every elementary derivation
    let elements: Vec<Derivation> =
        (1..=window).flat_map(|n| (0..der.slice(n).len()).map(move |i| (n, i))).map(|(n, i)| der.slice(n).element(model, i)).collect();
    let diffs = exec.map(&elements, |t| {
        let lhs = hom.phi(&der_differential(model, t));
        let rhs = hom.differential(&hom.phi(t));
        (lhs != rhs).then(|| format!("Ψ𝒟 ≠ D_φΨ on {}", t.format(model)))
    });
    report.differential_checks = diffs.len();
    for d in diffs.into_iter().flatten() {
        fail(d);
    }

    // Ψ[θ₁,θ₂] = {Ψθ₁,Ψθ₂}
    let mut pairs = Vec::new();
    for (i, a) in elements.iter().enumerate() {
        for b in &elements[i..] {
            if a.degree + b.degree <= window as i64 {
                pairs.push((a, b));
            }
        }
    }
    let brackets = exec.map(&pairs, |(a, b)| {
        let lhs = hom.phi(&der_bracket(model, a, b));
        let rhs = hom.bracket(&hom.phi(a), &hom.phi(b));
        (lhs != rhs).then(|| format!("Ψ[θ₁,θ₂] ≠ {{Ψθ₁,Ψθ₂}} for {} and {}", a.format(model), b.format(model)))
    });
    report.bracket_checks = brackets.len();
    for b in brackets.into_iter().flatten() {
        fail(b);
    }

    // (D_φ)² = 0 on the independently enumerated basis
    let hom_elems: Vec<(u32, usize)> =
        (2..=window + 1).flat_map(|n| (0..hom_slices[n as usize].len()).map(move |i| (n, i))).collect();
    let squares = exec.map(&hom_elems, |&(n, i)| {
        let f = hom_slices[n as usize].element(&hom.dual, i);
        (!hom.differential(&hom.differential(&f)).is_zero()).then(|| format!("D_φ² ≠ 0 in degree {n}"))
    });
    report.square_checks = squares.len();
    for s in squares.into_iter().flatten() {
        fail(s);
    }

    // Z Hom¹ against Z Der¹
    let h1 = &hom_slices[1];
    let h0 = &hom_slices[0];
    let cols: Vec<Option<SparseVec>> =
        (0..h1.len()).map(|i| h0.coordinates(&hom.differential(&h1.element(&hom.dual, i)))).collect();
    if cols.iter().any(Option::is_none) {
        fail("D_φ leaves the degree 0 slice".into());
    } else {
        let cols: Vec<SparseVec> = cols.into_iter().flatten().collect();
        let z_hom = kernel_basis(&SparseMatrix::from_columns(h0.len(), &cols)).dim();
        let z_der = der.cycles(1).dim();
        report.degree_one_cycles = (z_der, z_hom);
        if z_der != z_hom {
            fail(format!("dim Z Der¹ = {z_der} but dim Z Hom¹ = {z_hom}"));
        }
    }

    report.counterexample = first_failure;
    report
}
