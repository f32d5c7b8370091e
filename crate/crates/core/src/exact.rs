//! Exact rational scalars and sparse linear algebra over ℚ.
//!
//! Everything downstream (homology ranks, structure constants, containment
//! checks) is decided here, so no floating point appears anywhere.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `p/q` rendering used by the JSON emitter; integers keep the `/1`.
pub fn format_pq(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Sparse vector: strictly increasing indices, no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(index: usize) -> Self {
        Self { entries: vec![(index, Rational::one())] }
    }

    /// Builds from arbitrary (index, value) pairs, summing duplicates.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert_with(Rational::zero) += v;
        }
        Self { entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn get(&self, index: usize) -> Rational {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn leading(&self) -> Option<(usize, &Rational)> {
        self.entries.first().map(|(i, v)| (*i, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        Self { entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect() }
    }

    /// `self + c * other`
    pub fn axpy(&self, c: &Rational, other: &SparseVec) -> Self {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, c * y));
                        b.next();
                    } else {
                        let s = x + c * y;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, c * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> Self {
        self.axpy(&Rational::one(), other)
    }

    pub fn sub(&self, other: &SparseVec) -> Self {
        self.axpy(&-Rational::one(), other)
    }

    pub fn dot(&self, other: &SparseVec) -> Rational {
        let mut acc = Rational::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some((i, x)), Some((j, y))) = (a.peek(), b.peek()) {
            if i < j {
                a.next();
            } else if j < i {
                b.next();
            } else {
                acc += x * y;
                a.next();
                b.next();
            }
        }
        acc
    }
}

impl fmt::Display for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, (i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{v}")?;
        }
        write!(f, "]")
    }
}

/// Sparse matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![SparseVec::new(); rows] }
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVec>) -> Self {
        assert!(rows.iter().all(|r| r.max_index().is_none_or(|m| m < cols)), "column index out of range");
        Self { rows: rows.len(), cols, data: rows }
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[SparseVec]) -> Self {
        let mut buckets: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter() {
                assert!(i < rows, "row index out of range");
                buckets[i].push((j, v.clone()));
            }
        }
        Self {
            rows,
            cols: columns.len(),
            data: buckets.into_iter().map(|entries| SparseVec { entries }).collect(),
        }
    }

    pub fn from_dense(values: &[Vec<Rational>]) -> Self {
        let cols = values.first().map_or(0, |r| r.len());
        Self::from_rows(cols, values.iter().map(|r| SparseVec::from_dense(r)).collect())
    }

    pub fn from_i64(values: &[&[i64]]) -> Self {
        let dense: Vec<Vec<Rational>> = values.iter().map(|r| r.iter().map(|&x| rational(x)).collect()).collect();
        Self::from_dense(&dense)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.data[i].get(j)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(SparseVec::nnz).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut buckets: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row.iter() {
                buckets[j].push((i, v.clone()));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data: buckets.into_iter().map(|entries| SparseVec { entries }).collect(),
        }
    }

    pub fn columns(&self) -> Vec<SparseVec> {
        self.transpose().data
    }

    pub fn mul_vec(&self, v: &SparseVec) -> SparseVec {
        SparseVec::from_pairs(
            self.data.iter().enumerate().map(|(i, row)| (i, row.dot(v))).filter(|(_, x)| !x.is_zero()),
        )
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let rows = self
            .data
            .iter()
            .map(|row| {
                row.iter().fold(SparseVec::new(), |acc, (k, a)| acc.axpy(a, &other.data[k]))
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: other.cols, data: rows }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(SparseVec::is_zero)
    }
}

/// Row-echelon basis built incrementally. Every inserted vector gets an id;
/// reduction reports the remainder plus the combination of inserted vectors
/// that was subtracted, so callers can read off coordinates.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<SparseVec>,
    combos: Vec<SparseVec>,
    pivots: BTreeMap<usize, usize>,
    inserted: usize,
}

/// Result of reducing a vector against an [`Echelon`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub remainder: SparseVec,
    /// `original = remainder + Σ combo[id] · inserted[id]`
    pub combo: SparseVec,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new(), combos: Vec::new(), pivots: BTreeMap::new(), inserted: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &SparseVec) -> Reduction {
        let mut rem = v.clone();
        let mut combo = SparseVec::new();
        let mut start = 0usize;
        loop {
            let next = rem.iter().find(|(c, _)| *c >= start && self.pivots.contains_key(c)).map(|(c, x)| (c, x.clone()));
            let Some((col, coef)) = next else { break };
            let r = self.pivots[&col];
            rem = rem.axpy(&-coef.clone(), &self.rows[r]);
            combo = combo.axpy(&coef, &self.combos[r]);
            start = col + 1;
        }
        Reduction { remainder: rem, combo }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).remainder.is_zero()
    }

    /// Inserts a vector; returns `true` when it was independent of the span so far.
    /// The vector consumes an id either way.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let id = self.inserted;
        self.inserted += 1;
        let red = self.reduce(v);
        if red.remainder.is_zero() {
            return false;
        }
        let (lead, lc) = red.remainder.leading().map(|(c, x)| (c, x.clone())).unwrap();
        let inv = lc.recip();
        // row = (v - Σ combo·inserted) / lc, tracked as combination of inserted ids
        let combo = SparseVec::unit(id).axpy(&-Rational::one(), &red.combo).scale(&inv);
        self.pivots.insert(lead, self.rows.len());
        self.rows.push(red.remainder.scale(&inv));
        self.combos.push(combo);
        true
    }
}

pub fn rank(m: &SparseMatrix) -> usize {
    let mut ech = Echelon::new(m.cols());
    for i in 0..m.rows() {
        ech.insert(m.row(i));
    }
    ech.rank()
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
fn rref(m: &SparseMatrix) -> (Vec<SparseVec>, Vec<usize>) {
    let mut ech = Echelon::new(m.cols());
    for i in 0..m.rows() {
        ech.insert(m.row(i));
    }
    let mut order: Vec<(usize, usize)> = ech.pivots.iter().map(|(c, r)| (*c, *r)).collect();
    order.sort();
    let mut rows: Vec<SparseVec> = order.iter().map(|(_, r)| ech.rows[*r].clone()).collect();
    let pivots: Vec<usize> = order.iter().map(|(c, _)| *c).collect();
    // back substitution: clear pivot columns above each pivot
    for k in (0..rows.len()).rev() {
        let (pk, row_k) = (pivots[k], rows[k].clone());
        for r in rows.iter_mut().take(k) {
            let c = r.get(pk);
            if !c.is_zero() {
                *r = r.axpy(&-c, &row_k);
            }
        }
    }
    (rows, pivots)
}

/// Linearly independent vectors of a fixed ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    pub ambient: usize,
    pub vectors: Vec<SparseVec>,
}

impl SubspaceBasis {
    pub fn new(ambient: usize, vectors: Vec<SparseVec>) -> Self {
        Self { ambient, vectors }
    }

    /// Spanning set → independent subset, keeping first-found vectors.
    pub fn spanned_by(ambient: usize, vectors: impl IntoIterator<Item = SparseVec>) -> Self {
        let mut ech = Echelon::new(ambient);
        let kept = vectors.into_iter().filter(|v| ech.insert(v)).collect();
        Self { ambient, vectors: kept }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.ambient);
        for v in &self.vectors {
            e.insert(v);
        }
        e
    }

    pub fn is_independent(&self) -> bool {
        self.echelon().rank() == self.vectors.len()
    }
}

pub fn kernel_basis(m: &SparseMatrix) -> SubspaceBasis {
    let (rows, pivots) = rref(m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let vectors = (0..m.cols())
        .filter(|c| !pivot_set.contains(c))
        .map(|free| {
            let mut pairs = vec![(free, Rational::one())];
            for (row, &p) in rows.iter().zip(&pivots) {
                let c = row.get(free);
                if !c.is_zero() {
                    pairs.push((p, -c));
                }
            }
            SparseVec::from_pairs(pairs)
        })
        .collect();
    SubspaceBasis::new(m.cols(), vectors)
}

/// Column span of `m`, as an independent basis in first-found order.
pub fn image_basis(m: &SparseMatrix) -> SubspaceBasis {
    SubspaceBasis::spanned_by(m.rows(), m.columns())
}

/// Rank of `cycles / boundaries` together with representatives completing the
/// boundaries to a basis of the cycles.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub rank: usize,
    pub representatives: Vec<SparseVec>,
    /// boundaries inserted first (ids `0..b`), then representatives.
    pub echelon: Echelon,
    pub boundary_count: usize,
    /// echelon id of each representative
    pub representative_ids: Vec<usize>,
}

impl Quotient {
    /// Coordinates of a cycle in the representative basis, modulo boundaries.
    /// Returns `None` if the vector is not in the span of the cycles.
    pub fn coordinates(&self, v: &SparseVec) -> Option<Vec<Rational>> {
        let red = self.echelon.reduce(v);
        if !red.remainder.is_zero() {
            return None;
        }
        Some(self.representative_ids.iter().map(|id| red.combo.get(*id)).collect())
    }

    pub fn is_boundary(&self, v: &SparseVec) -> Option<bool> {
        self.coordinates(v).map(|c| c.iter().all(Zero::is_zero))
    }
}

pub fn quotient_rank(cycles: &SubspaceBasis, boundaries: &SubspaceBasis) -> Result<Quotient, Error> {
    let cyc = cycles.echelon();
    if let Some(pos) = boundaries.vectors.iter().position(|b| !cyc.contains(b)) {
        return Err(Error::ContainmentViolation { index: pos });
    }
    let mut ech = Echelon::new(cycles.ambient);
    for b in &boundaries.vectors {
        ech.insert(b);
    }
    let boundary_count = boundaries.vectors.len();
    let mut reps = Vec::new();
    let mut ids = Vec::new();
    for (k, c) in cycles.vectors.iter().enumerate() {
        if ech.insert(c) {
            reps.push(c.clone());
            ids.push(boundary_count + k);
        }
    }
    // ids must match insertion order: boundaries 0..b, cycles b..b+c
    Ok(Quotient { rank: reps.len(), representatives: reps, echelon: ech, boundary_count, representative_ids: ids })
}

pub fn is_negative(q: &Rational) -> bool {
    q.is_negative()
}
