//! Principal SU(n)-bundle families over ℂP^m and sphere products: model
//! construction, classification by the first nonzero twisting degree,
//! H-space verdicts and homotopy rank tables.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::algebra::{AlgElement, FiberGenerator, Generator, RelativeModel};
use crate::derivation::{ker_dw_and_j, n_invariant, whitehead_trivial, DerComplex, DerKind, Derivation, HomologyReport};
use crate::error::Error;
use crate::exact::Rational;
use crate::par::Exec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseSpec {
    /// `Λx/(x^{m+1})`, `|x| = 2`
    ProjectiveSpace { m: u32 },
    /// One generator per sphere: exterior when odd, `x² = 0` when even.
    SphereProduct { degrees: Vec<u32> },
}

impl BaseSpec {
    fn generators(&self) -> Vec<Generator> {
        match self {
            BaseSpec::ProjectiveSpace { m } => vec![Generator::truncated("x", 2, m + 1)],
            BaseSpec::SphereProduct { degrees } => {
                let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
                degrees
                    .iter()
                    .map(|&d| {
                        let k = seen.entry(d).or_default();
                        *k += 1;
                        let name = if *k == 1 { format!("x{d}") } else { format!("x{d}_{k}") };
                        if d % 2 == 0 {
                            Generator::truncated(name, d, 2)
                        } else {
                            Generator::new(name, d)
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Base polynomial given by `(coefficient, exponents over the base generators)`.
pub type BasePolynomial = Vec<(Rational, Vec<u32>)>;

/// SU(n) fiber `W = (s₃, s₅, …, s_{2n−1})` over a base, with `D(s_{2j−1})`
/// given per `j` as a base polynomial of degree `2j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleFamilySpec {
    pub n: u32,
    pub base: BaseSpec,
    pub classes: BTreeMap<u32, BasePolynomial>,
}

impl BundleFamilySpec {
    /// Over ℂP^m with `D(s_{2j−1}) = c_j x^j`; `coefficients[k]` is `c_{k+2}`.
    pub fn projective(n: u32, m: u32, coefficients: &[Rational]) -> Self {
        let classes = coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32 + 2, vec![(c.clone(), vec![k as u32 + 2])]))
            .collect();
        Self { n, base: BaseSpec::ProjectiveSpace { m }, classes }
    }
}

pub fn su_bundle_model(spec: &BundleFamilySpec) -> Result<RelativeModel, Error> {
    if spec.n < 1 {
        return Err(Error::InvalidSpec("n must be at least 1".into()));
    }
    match &spec.base {
        BaseSpec::ProjectiveSpace { m } if *m < 1 => return Err(Error::InvalidSpec("m must be at least 1".into())),
        BaseSpec::SphereProduct { degrees } if degrees.contains(&0) => {
            return Err(Error::InvalidSpec("sphere of dimension 0".into()))
        }
        _ => {}
    }
    let base = spec.base.generators();
    let nb = base.len();
    let fiber: Vec<FiberGenerator> = (2..=spec.n).map(|j| FiberGenerator::new(format!("s{}", 2 * j - 1), 2 * j - 1)).collect();
    let mut model = RelativeModel::new(base, fiber);
    let alg = model.algebra().clone();
    for (&j, poly) in &spec.classes {
        if j < 2 || j > spec.n {
            return Err(Error::InvalidSpec(format!("no fiber generator s{}", 2 * j as i64 - 1)));
        }
        let mut value = AlgElement::zero();
        let mut any_nonzero = false;
        for (c, exps) in poly {
            if c.is_zero() {
                continue;
            }
            any_nonzero = true;
            if exps.len() > nb {
                return Err(Error::InvalidSpec(format!("class for s{} has too many exponents", 2 * j - 1)));
            }
            let factors: Vec<(usize, u32)> = exps.iter().enumerate().map(|(i, &e)| (i, e)).collect();
            let degree: u32 = factors.iter().map(|&(i, e)| e * alg.generator(i).degree).sum();
            if degree != 2 * j {
                return Err(Error::InvalidSpec(format!("class for s{} must have degree {}", 2 * j - 1, 2 * j)));
            }
            if let Some(m) = alg.monomial(&factors) {
                value.add_term(m, c.clone());
            }
        }
        if any_nonzero && value.is_zero() {
            return Err(Error::InvalidSpec(format!("class for s{} vanishes in the base", 2 * j - 1)));
        }
        model.set_differential(nb + j as usize - 2, value);
    }
    model.validated().map_err(|e| Error::InvalidSpec(e.to_string()))
}

/// `SU(n)` over `ℂP^m` with a single nonzero class `x^j` (or none).
pub fn projective_model(n: u32, m: u32, first_nonzero: Option<u32>) -> Result<RelativeModel, Error> {
    let mut coeffs = vec![Rational::zero(); n.saturating_sub(1) as usize];
    if let Some(j) = first_nonzero {
        if j < 2 || j > n {
            return Err(Error::InvalidSpec(format!("position {j} out of range")));
        }
        coeffs[j as usize - 2] = Rational::one();
    }
    su_bundle_model(&BundleFamilySpec::projective(n, m, &coeffs))
}

/// One equivalence class of the family, named by its first nonzero position.
#[derive(Clone, Debug)]
pub struct TypeRepresentative {
    /// `None` for `D = 0`
    pub first_nonzero: Option<u32>,
    pub model: RelativeModel,
    pub n_invariant: u32,
    pub ranks: BTreeMap<u32, usize>,
}

/// Homology degree where two types have different ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discriminator {
    pub left: Option<u32>,
    pub right: Option<u32>,
    pub degree: u32,
    pub ranks: (usize, usize),
}

/// A generator substitution verified to be a DG isomorphism from the
/// normalized model to a model with extra nonzero classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub first_nonzero: u32,
    pub coefficients: Vec<Rational>,
    pub images: Vec<String>,
    pub verified: bool,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub n: u32,
    pub m: u32,
    pub window: u32,
    pub count: usize,
    pub representatives: Vec<TypeRepresentative>,
    /// positions whose type coincides with `D = 0` (identical `𝒟`)
    pub merged_with_zero: Vec<u32>,
    pub merge_verified: bool,
    pub discriminators: Vec<Discriminator>,
    pub substitutions: Vec<Substitution>,
    /// `max{1, n−1, m}` as literally stated for this family
    pub literal_formula: u32,
    pub formula_disagrees: bool,
}

impl ClassificationReport {
    /// Every pair of representatives is separated and every merge is certified.
    pub fn is_consistent(&self) -> bool {
        let k = self.representatives.len();
        self.merge_verified
            && self.discriminators.len() == k * (k - 1) / 2
            && self.substitutions.iter().all(|s| s.verified)
    }
}

/// `ψ(s_j) = s_j / c_j`, `ψ(s_i) = s_i − (c_i/c_j) x^{i−j} s_j` for `i > j`,
/// identity on the base; checks `D'∘ψ = ψ∘D` on every generator.
pub fn normalizing_substitution(n: u32, m: u32, coefficients: &[Rational]) -> Result<Substitution, Error> {
    let target = su_bundle_model(&BundleFamilySpec::projective(n, m, coefficients))?;
    let j = coefficients
        .iter()
        .position(|c| !c.is_zero())
        .map(|k| k as u32 + 2)
        .ok_or_else(|| Error::InvalidSpec("all classes vanish".into()))?;
    let source = projective_model(n, m, Some(j))?;
    let alg = target.algebra();
    let cj = coefficients[j as usize - 2].clone();
    let sj = 1 + j as usize - 2;
    let mut images: Vec<AlgElement> = (0..alg.len()).map(|i| alg.gen_element(i)).collect();
    images[sj] = alg.gen_element(sj).scale(&cj.recip());
    for i in (j + 1)..=n {
        let ci = &coefficients[i as usize - 2];
        if ci.is_zero() {
            continue;
        }
        let si = 1 + i as usize - 2;
        match alg.monomial(&[(0, i - j)]) {
            Some(xp) => {
                let correction = alg.multiply(&AlgElement::term(xp, ci / &cj), &alg.gen_element(sj));
                images[si] = alg.gen_element(si).sub(&correction);
            }
            None => {
                // x^{i−j} = 0 forces c_i x^i = 0, which validation already excludes
                return Err(Error::Invariant("substitution needs a vanishing power".into()));
            }
        }
    }
    let verified = (0..alg.len()).all(|g| {
        let lhs = target.apply_d(&images[g]);
        let rhs = alg.apply_homomorphism(&images, source.differential(g));
        lhs == rhs
    });
    Ok(Substitution {
        first_nonzero: j,
        coefficients: coefficients.to_vec(),
        images: (0..alg.len()).map(|g| format!("{} ↦ {}", alg.generator(g).name, alg.format(&images[g]))).collect(),
        verified,
    })
}

fn ranks_of(model: &RelativeModel, window: u32, exec: Exec) -> Result<(DerComplex, HomologyReport), Error> {
    let c = DerComplex::new(model, window, DerKind::Full, exec);
    let h = c.homology()?;
    Ok((c, h))
}

pub fn classify_su_family(n: u32, m: u32, window: u32, exec: Exec) -> Result<ClassificationReport, Error> {
    let positions: Vec<u32> = (2..=n.min(m)).collect();
    let zero = projective_model(n, m, None)?;
    let zero_n = n_invariant(&zero)?;
    let (zero_complex, _) = ranks_of(&zero, window, exec)?;

    let mut merged_with_zero = Vec::new();
    let mut merge_verified = true;
    let mut kept: Vec<Option<u32>> = Vec::new();
    for &j in &positions {
        let model = projective_model(n, m, Some(j))?;
        if n_invariant(&model)? == zero_n {
            merged_with_zero.push(j);
            let c = DerComplex::new(&model, window, DerKind::Full, exec);
            merge_verified &= (1..=window + 1).all(|k| c.differential_matrix(k) == zero_complex.differential_matrix(k));
        } else {
            kept.push(Some(j));
        }
    }
    kept.push(None);

    let reps: Vec<TypeRepresentative> = exec
        .map(&kept, |&j| -> Result<TypeRepresentative, Error> {
            let model = projective_model(n, m, j)?;
            let (_, h) = ranks_of(&model, window, Exec::Sequential)?;
            Ok(TypeRepresentative { first_nonzero: j, n_invariant: n_invariant(&model)?, ranks: h.ranks(), model })
        })
        .into_iter()
        .collect::<Result<_, _>>()?;

    let mut discriminators = Vec::new();
    for a in 0..reps.len() {
        for b in a + 1..reps.len() {
            let (ra, rb) = (&reps[a], &reps[b]);
            let j = [ra.first_nonzero, rb.first_nonzero].into_iter().flatten().min().unwrap_or(n);
            let predicted = 2 * (n - j);
            let rank = |r: &TypeRepresentative, k: u32| r.ranks.get(&k).copied().unwrap_or(0);
            let degree = std::iter::once(predicted)
                .chain(1..=window)
                .filter(|&k| (1..=window).contains(&k))
                .find(|&k| rank(ra, k) != rank(rb, k));
            if let Some(k) = degree {
                discriminators.push(Discriminator {
                    left: ra.first_nonzero,
                    right: rb.first_nonzero,
                    degree: k,
                    ranks: (rank(ra, k), rank(rb, k)),
                });
            }
        }
    }

    // certify the normalization for every position with all later classes switched on
    let mut substitutions = Vec::new();
    for &j in &positions {
        let mut coeffs = vec![Rational::zero(); n as usize - 1];
        coeffs[j as usize - 2] = Rational::from_integer(2.into());
        for i in (j + 1)..=n.min(m) {
            coeffs[i as usize - 2] = Rational::from_integer(i64::from(i).into());
        }
        substitutions.push(normalizing_substitution(n, m, &coeffs)?);
    }

    let literal = 1.max(n.saturating_sub(1)).max(m);
    Ok(ClassificationReport {
        n,
        m,
        window,
        count: reps.len(),
        representatives: reps,
        merged_with_zero,
        merge_verified,
        discriminators,
        substitutions,
        literal_formula: literal,
        formula_disagrees: literal as usize != kept.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// abelian homology brackets and W in at most two degrees
    HSpaceCertified,
    /// abelian homology brackets only
    HSpaceBracketLevel,
    NotHSpace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketWitness {
    pub left: String,
    pub right: String,
    pub result: String,
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSpaceVerdict {
    pub window: u32,
    pub bracket_abelian: bool,
    pub coformal_certified: bool,
    pub verdict: Verdict,
    pub witness: Option<BracketWitness>,
    pub caveat: Option<String>,
}

pub fn hspace_decision(model: &RelativeModel, window: u32, exec: Exec) -> Result<HSpaceVerdict, Error> {
    let c = DerComplex::new(model, window, DerKind::Full, exec);
    let h = c.homology()?;
    let table = c.homology_bracket(&h)?;
    let two_degrees = model.fiber_degrees().len() <= 2;
    let witness = table.entries.iter().max_by_key(|e| (e.degree(), std::cmp::Reverse((e.left, e.right)))).map(|e| {
        let rep = |(n, i): (u32, usize)| &h.degrees[&n].representatives[i];
        let reps = &h.degrees[&e.degree()].representatives;
        let mut result = Derivation::zero(e.degree() as i64);
        for (k, coef) in e.coefficients.iter().enumerate() {
            result = result.add_scaled(coef, &reps[k]);
        }
        BracketWitness {
            left: rep(e.left).format(model),
            right: rep(e.right).format(model),
            result: result.format(model),
            degree: e.degree(),
        }
    });
    let abelian = table.is_abelian();
    let verdict = match (abelian, two_degrees) {
        (true, true) => Verdict::HSpaceCertified,
        (true, false) => Verdict::HSpaceBracketLevel,
        (false, _) => Verdict::NotHSpace,
    };
    let caveat = (verdict == Verdict::HSpaceBracketLevel).then(|| {
        format!("brackets vanish through degree {window}; fiber generators span more than two degrees, so higher brackets are not ruled out")
    });
    Ok(HSpaceVerdict { window, bracket_abelian: abelian, coformal_certified: two_degrees, verdict, witness, caveat })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example2Report {
    pub j_ranks: BTreeMap<u32, usize>,
    pub top_degree: u32,
    pub j_vanishes_below_top: bool,
    pub formal_asserted: bool,
    /// `Some(true)` when the hypotheses hold and an H-space is predicted
    pub prediction: Option<bool>,
    pub verdict: HSpaceVerdict,
    pub discrepancy: bool,
}

pub fn example2_check(model: &RelativeModel, formal: bool, window: u32, exec: Exec) -> Result<Example2Report, Error> {
    if !model.is_pure() {
        return Err(Error::NotPure);
    }
    if !whitehead_trivial(model)? {
        return Err(Error::NotWhiteheadTrivial);
    }
    let k = ker_dw_and_j(model)?;
    let top = model.top_fiber_degree();
    let vanishes = k.vanishes_below(top);
    let prediction = (vanishes && formal).then_some(true);
    let verdict = hspace_decision(model, window, exec)?;
    let discrepancy = prediction == Some(true) && verdict.verdict == Verdict::NotHSpace;
    Ok(Example2Report {
        j_ranks: k.j_ranks,
        top_degree: top,
        j_vanishes_below_top: vanishes,
        formal_asserted: formal,
        prediction,
        verdict,
        discrepancy,
    })
}

/// `rank π_k ⊗ ℚ = rank H_{k−1}` for `2 ≤ k ≤ N+1`.
pub fn homotopy_report(model: &RelativeModel, window: u32, exec: Exec) -> Result<BTreeMap<u32, usize>, Error> {
    let h = DerComplex::new(model, window, DerKind::Full, exec).homology()?;
    Ok((2..=window + 1).map(|k| (k, h.rank(k - 1))).collect())
}
