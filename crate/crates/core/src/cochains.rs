//! Chevalley–Eilenberg cochains of a finite DG Lie algebra, presented as a
//! free graded-commutative algebra with differential `d₁ + d₂`.

use std::collections::BTreeMap;

use num::One;

use crate::algebra::{AlgElement, Algebra, Generator};
use crate::derivation::{der_bracket, DerComplex, HomologyReport, BracketTable};
use crate::error::Error;
use crate::exact::{ratio, Echelon, Rational, SparseVec};

/// A DG Lie algebra given by a named basis in degrees `1..=top`, the matrix
/// of its differential and its bracket structure constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDgl {
    pub names: Vec<String>,
    pub degrees: Vec<u32>,
    /// highest degree in which the basis is complete
    pub top: u32,
    /// `δ x_j = Σ differential[j]_i x_i`
    pub differential: Vec<SparseVec>,
    /// `[x_i, x_j]` for `i ≤ j` with nonzero result
    pub bracket: BTreeMap<(usize, usize), SparseVec>,
}

impl FiniteDgl {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `[x_i, x_j]` for any order, via graded antisymmetry.
    pub fn bracket_of(&self, i: usize, j: usize) -> SparseVec {
        if i <= j {
            return self.bracket.get(&(i, j)).cloned().unwrap_or_default();
        }
        let v = self.bracket.get(&(j, i)).cloned().unwrap_or_default();
        let odd = (self.degrees[i] * self.degrees[j]) % 2 == 1;
        if odd {
            v
        } else {
            v.scale(&-Rational::one())
        }
    }

    /// The truncated derivation DGL: cycles in degree 1, elementary
    /// derivations in degrees `2..=N`.
    pub fn from_der_complex(c: &DerComplex) -> Result<Self, Error> {
        let model = c.model();
        let top = c.window();
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        let mut elems = Vec::new();
        let mut offsets = BTreeMap::new();
        for n in 1..=top {
            offsets.insert(n, elems.len());
            for d in c.basis(n) {
                names.push(d.format(model));
                degrees.push(n);
                elems.push(d);
            }
        }
        let cycles = c.cycles(1);
        let mut cycle_ech = Echelon::new(cycles.ambient);
        for v in &cycles.vectors {
            cycle_ech.insert(v);
        }
        let coords = |theta: &crate::derivation::Derivation| -> Result<SparseVec, Error> {
            let n = theta.degree as u32;
            let v = c.slice(n).coordinates(theta).ok_or_else(|| Error::Invariant("value outside slice".into()))?;
            let off = offsets[&n];
            if n == 1 {
                let red = cycle_ech.reduce(&v);
                if !red.remainder.is_zero() {
                    return Err(Error::Invariant("𝒟 image in degree 1 is not a cycle".into()));
                }
                Ok(SparseVec::from_pairs(red.combo.iter().map(|(i, x)| (off + i, x.clone()))))
            } else {
                Ok(SparseVec::from_pairs(v.iter().map(|(i, x)| (off + i, x.clone()))))
            }
        };
        let mut differential = Vec::with_capacity(elems.len());
        for t in &elems {
            if t.degree <= 1 {
                differential.push(SparseVec::new());
            } else {
                differential.push(coords(&crate::derivation::der_differential(model, t))?);
            }
        }
        let mut bracket = BTreeMap::new();
        for i in 0..elems.len() {
            for j in i..elems.len() {
                if degrees[i] + degrees[j] > top {
                    continue;
                }
                let b = der_bracket(model, &elems[i], &elems[j]);
                if !b.is_zero() {
                    bracket.insert((i, j), coords(&b)?);
                }
            }
        }
        Ok(Self { names, degrees, top, differential, bracket })
    }

    /// The homology Lie algebra on the chosen representatives, zero differential.
    pub fn from_homology(c: &DerComplex, report: &HomologyReport, table: &BracketTable) -> Self {
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        let mut offsets = BTreeMap::new();
        for (&n, h) in &report.degrees {
            offsets.insert(n, names.len());
            for r in &h.representatives {
                names.push(r.format(c.model()));
                degrees.push(n);
            }
        }
        let mut bracket = BTreeMap::new();
        for e in &table.entries {
            let i = offsets[&e.left.0] + e.left.1;
            let j = offsets[&e.right.0] + e.right.1;
            let off = offsets[&e.degree()];
            let v = SparseVec::from_pairs(e.coefficients.iter().enumerate().map(|(k, x)| (off + k, x.clone())));
            bracket.insert((i, j), v);
        }
        let differential = vec![SparseVec::new(); names.len()];
        Self { names, degrees, top: report.window, differential, bracket }
    }
}

/// `Λ(u_z), d` with one generator of degree `|z| + 1` per basis element `z`.
#[derive(Clone, Debug)]
pub struct CochainPresentation {
    pub algebra: Algebra,
    pub window: u32,
    /// DGL basis index of each generator
    pub sources: Vec<usize>,
    pub differential: Vec<AlgElement>,
    /// generators whose linear part needs DGL elements beyond the window
    pub truncated: Vec<bool>,
}

/// Generators of cochain degree `≤ N`, sorted by degree then name, with
/// `d₁u_z = −Σ ⟨z, δx⟩ u_x` and `d₂u_z = Σ_{i<j} (−1)^{|x_i|} c^z_{ij} u_i u_j + ½ Σ_i (−1)^{|x_i|} c^z_{ii} u_i²`.
pub fn cochain_presentation(dgl: &FiniteDgl, window: u32) -> CochainPresentation {
    let mut sources: Vec<usize> = (0..dgl.len()).filter(|&i| dgl.degrees[i] < window).collect();
    sources.sort_by(|&a, &b| (dgl.degrees[a], &dgl.names[a]).cmp(&(dgl.degrees[b], &dgl.names[b])));
    let gen_of: BTreeMap<usize, usize> = sources.iter().enumerate().map(|(g, &s)| (s, g)).collect();
    let gens: Vec<Generator> = sources.iter().map(|&s| Generator::new(dgl.names[s].clone(), dgl.degrees[s] + 1)).collect();
    let algebra = Algebra::new(gens);
    let mut differential = vec![AlgElement::zero(); sources.len()];
    let mut truncated = vec![false; sources.len()];

    for (x, dx) in dgl.differential.iter().enumerate() {
        for (z, c) in dx.iter() {
            let Some(&gz) = gen_of.get(&z) else { continue };
            match gen_of.get(&x) {
                Some(&gx) => differential[gz].add_scaled(&-c.clone(), &algebra.gen_element(gx)),
                None => truncated[gz] = true,
            }
        }
    }
    for (gz, &z) in sources.iter().enumerate() {
        if dgl.degrees[z] + 1 > dgl.top {
            truncated[gz] = true;
        }
    }
    for gi in 0..sources.len() {
        for gj in gi..sources.len() {
            let (xi, xj) = (sources[gi], sources[gj]);
            let b = dgl.bracket_of(xi, xj);
            let s = if dgl.degrees[xi] % 2 == 1 { -Rational::one() } else { Rational::one() };
            let half = if gi == gj { ratio(1, 2) } else { Rational::one() };
            for (z, c) in b.iter() {
                let Some(&gz) = gen_of.get(&z) else { continue };
                let prod = algebra.multiply(&algebra.gen_element(gi), &algebra.gen_element(gj));
                differential[gz].add_scaled(&(c * &s * &half), &prod);
            }
        }
    }
    CochainPresentation { algebra, window, sources, differential, truncated }
}

/// Result of applying `d` twice to every generator whose square is computable in the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareReport {
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<String>,
}

impl SquareReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl CochainPresentation {
    pub fn len(&self) -> usize {
        self.differential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.differential.is_empty()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.algebra.generators().iter().map(|g| g.degree).collect()
    }

    pub fn name(&self, g: usize) -> &str {
        &self.algebra.generator(g).name
    }

    pub fn d(&self, g: usize) -> &AlgElement {
        &self.differential[g]
    }

    pub fn apply_d(&self, a: &AlgElement) -> AlgElement {
        let map: BTreeMap<usize, AlgElement> =
            self.differential.iter().cloned().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        self.algebra.apply_derivation(&map, -1, a)
    }

    pub fn check_d_squared(&self) -> SquareReport {
        let mut report = SquareReport { checked: 0, skipped: 0, violations: Vec::new() };
        for g in 0..self.len() {
            let dg = &self.differential[g];
            let involved_truncated = dg.terms().any(|(m, _)| {
                m.exponents().iter().enumerate().any(|(i, &e)| e > 0 && self.truncated[i])
            });
            if self.truncated[g] || involved_truncated {
                report.skipped += 1;
                continue;
            }
            report.checked += 1;
            let dd = self.apply_d(dg);
            if !dd.is_zero() {
                report.violations.push(format!("d² {} = {}", self.name(g), self.algebra.format(&dd)));
            }
        }
        report
    }

    /// Copy with the sign of one quadratic term of generator `g` flipped,
    /// for negative controls. `None` if there is no such term.
    pub fn with_flipped_term(&self, g: usize, term: usize) -> Option<Self> {
        let (_, quadratic) = self.parts(g);
        let (m, c) = quadratic.terms().nth(term)?;
        let mut out = self.clone();
        out.differential[g].add_term(m.clone(), -(c.clone() + c.clone()));
        Some(out)
    }

    /// `Λ(a, b, …), d` followed by one `d g = …` line per generator.
    pub fn to_text(&self) -> String {
        let names: Vec<&str> = (0..self.len()).map(|g| self.name(g)).collect();
        let mut s = format!("Λ({}), d\n", names.join(", "));
        for g in 0..self.len() {
            let suffix = if self.truncated[g] { "  + (beyond window)" } else { "" };
            s.push_str(&format!(
                "d {} = {}{}\n",
                self.name(g),
                self.algebra.format(&self.differential[g]),
                suffix
            ));
        }
        s
    }

    /// Each generator's differential split into linear and quadratic parts.
    pub fn parts(&self, g: usize) -> (AlgElement, AlgElement) {
        let d = &self.differential[g];
        let len = |m: &crate::algebra::Monomial| m.exponents().iter().sum::<u32>();
        (d.filter(|m| len(m) == 1), d.filter(|m| len(m) == 2))
    }
}

/// Whether every generator of a presentation is closed.
pub fn is_zero_differential(p: &CochainPresentation) -> bool {
    p.differential.iter().all(|d| d.is_zero()) && p.truncated.iter().all(|t| !t)
}
