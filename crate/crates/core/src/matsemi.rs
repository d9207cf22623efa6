//! Finitely generated matrix semigroups: invariant subspaces, block
//! triangularization, trace-form data for blocks spanning the full matrix
//! algebra, and the finiteness decision pipeline.
//!
//! For a block whose monoid `S` spans `M_d(K)`, pick `s_1, ..., s_{d²}` in `S`
//! forming a basis, set `D = (tr(s_i s_j))` and `C = D⁻¹`. Every `s` in `S`
//! is recovered from its traces,
//!
//! ```text
//! s = Σ_i a_i s_i,   a_i = Σ_j c_ij tr(s s_j),
//! ```
//!
//! so `|S| ≤ |T|^{d²}` where `T` is the set of traces of `S`.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::echelon::Echelon;
use crate::error::{AlgebraError, Error, LimitReport, Result};
use crate::field::{Field, Scalar, MAX_FIELD_ORDER};
use crate::kernel::{finiteness_via_kernel, BlockContext, KernelFiniteness};
use crate::mat::{Mat, PowerPeriod};
use crate::numtheory::{cyclotomic, orders_with_totient_at_most};
use crate::semigroup::{closure_enumeration, Enumeration, Limits, TraceClass};

const SEARCH_SEED: u64 = 0x6d61_7472_6978;
const RANDOM_PROBES: usize = 8;
/// Fields up to this order try every scalar as an eigenvalue.
const SMALL_FIELD: u64 = 16;
/// Arrow budget for the kernel-category cross-check.
pub const KERNEL_ARROW_BUDGET: usize = 20_000;

/// Field and size shared by a nonempty list of square matrices.
pub fn system(gens: &[Mat]) -> Result<(Field, usize)> {
    let first = gens
        .first()
        .ok_or_else(|| Error::InvalidMonoid("no generators".into()))?;
    let n = first.rows();
    if n == 0 {
        return Err(AlgebraError::ShapeMismatch("matrices must be at least 1x1".into()).into());
    }
    for g in gens {
        if !g.is_square() || g.rows() != n {
            return Err(AlgebraError::ShapeMismatch("generators must be square of equal size".into()).into());
        }
        if g.field() != first.field() {
            return Err(AlgebraError::FieldMismatch.into());
        }
    }
    Ok((first.field().clone(), n))
}

#[derive(Clone, Debug)]
pub struct SpanningCheck {
    pub spans: bool,
    pub dim: usize,
    /// Products of generators forming a basis of the algebra, identity first.
    pub basis: Vec<Mat>,
}

/// Dimension of the unital algebra generated by `gens`.
pub fn spanning_check(field: &Field, n: usize, gens: &[Mat]) -> SpanningCheck {
    let mut ech = Echelon::new(field, n * n);
    let id = Mat::identity(field, n);
    ech.insert(&id.flatten());
    let mut basis = vec![id];
    let mut i = 0;
    while i < basis.len() && basis.len() < n * n {
        for g in gens {
            let p = &basis[i] * g;
            if ech.insert(&p.flatten()) {
                basis.push(p);
            }
        }
        i += 1;
    }
    SpanningCheck {
        spans: basis.len() == n * n,
        dim: basis.len(),
        basis,
    }
}

#[derive(Clone, Copy)]
enum Side {
    Column,
    Row,
}

/// Smallest subspace containing `seed` and closed under the generators.
fn spin(field: &Field, n: usize, gens: &[Mat], seed: &[Scalar], side: Side) -> Vec<Vec<Scalar>> {
    let mut ech = Echelon::new(field, n);
    if !ech.insert(seed) {
        return Vec::new();
    }
    let mut i = 0;
    while i < ech.dim() && ech.dim() < n {
        let v = ech.basis()[i].clone();
        for g in gens {
            let w = match side {
                Side::Column => g.apply(&v),
                Side::Row => g.apply_left(&v),
            };
            ech.insert(&w);
        }
        i += 1;
    }
    ech.basis().to_vec()
}

fn random_scalar(field: &Field, rng: &mut ChaCha8Rng) -> Scalar {
    match field.order() {
        Some(q) => Scalar::Finite(rng.gen_range(0..q) as u32),
        None => field.from_i64(rng.gen_range(-3..=3)),
    }
}

fn unit_vector(field: &Field, n: usize, i: usize) -> Vec<Scalar> {
    let mut e = vec![field.zero(); n];
    e[i] = field.one();
    e
}

/// Column seeds and row seeds for the subspace search.
fn seeds(field: &Field, n: usize, gens: &[Mat], algebra: &[Mat]) -> (Vec<Vec<Scalar>>, Vec<Vec<Scalar>>) {
    let mut cols = Vec::new();
    let mut rows = Vec::new();
    for i in 0..n {
        cols.push(unit_vector(field, n, i));
        rows.push(unit_vector(field, n, i));
    }
    for g in gens {
        for j in 0..n {
            cols.push(g.column(j));
            rows.push(g.row(j).to_vec());
        }
    }
    let lambdas: BTreeSet<Scalar> = match field.order() {
        Some(q) if q <= SMALL_FIELD => field.elements().into_iter().flatten().collect(),
        _ => [0, 1, -1].into_iter().map(|v| field.from_i64(v)).collect(),
    };
    let id = Mat::identity(field, n);
    for g in gens {
        for l in &lambdas {
            let shifted = g.checked_sub(&id.scale(l)).expect("same shape");
            cols.extend(shifted.nullspace());
            rows.extend(shifted.transpose().nullspace());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    for _ in 0..RANDOM_PROBES {
        let mut a = Mat::zeros(field, n, n);
        for b in algebra {
            a = a.checked_add(&b.scale(&random_scalar(field, &mut rng))).expect("same shape");
        }
        cols.extend(a.nullspace());
        rows.extend(a.transpose().nullspace());
    }
    for _ in 0..RANDOM_PROBES {
        cols.push((0..n).map(|_| random_scalar(field, &mut rng)).collect());
        rows.push((0..n).map(|_| random_scalar(field, &mut rng)).collect());
    }
    (cols, rows)
}

#[derive(Clone, Debug)]
pub struct InvariantSearch {
    /// Basis of a proper nonzero subspace mapped into itself by every
    /// generator, of least dimension among those found.
    pub subspace: Option<Vec<Vec<Scalar>>>,
    pub algebra_dim: usize,
}

/// Search for a common invariant subspace of column vectors.
///
/// Spins up seed vectors under the generators; row seeds are spun under the
/// transposed action and contribute their annihilators. When the generated
/// algebra is all of `M_n`, no proper invariant subspace exists and the search
/// is skipped.
pub fn invariant_subspace(field: &Field, n: usize, gens: &[Mat]) -> InvariantSearch {
    let span = spanning_check(field, n, gens);
    if span.spans {
        return InvariantSearch {
            subspace: None,
            algebra_dim: span.dim,
        };
    }
    let (cols, rows) = seeds(field, n, gens, &span.basis);
    let mut best: Option<Vec<Vec<Scalar>>> = None;
    let improves = |best: &Option<Vec<Vec<Scalar>>>, w: &[Vec<Scalar>]| {
        !w.is_empty() && w.len() < n && best.as_ref().is_none_or(|b| w.len() < b.len())
    };
    for v in &cols {
        let w = spin(field, n, gens, v, Side::Column);
        if improves(&best, &w) {
            best = Some(w);
        }
    }
    for u in &rows {
        let up = spin(field, n, gens, u, Side::Row);
        if up.is_empty() || up.len() == n {
            continue;
        }
        let w = Mat::from_rows(field, up).expect("rows of equal length").nullspace();
        if improves(&best, &w) {
            best = Some(w);
        }
    }
    InvariantSearch {
        subspace: best,
        algebra_dim: span.dim,
    }
}

/// Basis change putting every generator in block upper-triangular form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagDecomposition {
    pub q: Mat,
    pub block_sizes: Vec<usize>,
    /// `Q⁻¹ g Q` for each generator.
    pub conjugated: Vec<Mat>,
}

impl FlagDecomposition {
    pub fn offsets(&self) -> Vec<usize> {
        block_offsets(&self.block_sizes)
    }

    /// Diagonal block `b` of every conjugated generator.
    pub fn block_generators(&self, b: usize) -> Vec<Mat> {
        let off = self.offsets()[b];
        let d = self.block_sizes[b];
        self.conjugated.iter().map(|g| g.submatrix(off, off, d, d)).collect()
    }
}

pub fn block_offsets(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0, |acc, &d| {
            let off = *acc;
            *acc += d;
            Some(off)
        })
        .collect()
}

/// Whether every entry below the diagonal blocks is zero.
pub fn is_block_upper(m: &Mat, sizes: &[usize]) -> bool {
    if sizes.iter().sum::<usize>() != m.rows() || !m.is_square() {
        return false;
    }
    let mut off = 0;
    for &d in sizes {
        for i in off + d..m.rows() {
            for j in off..off + d {
                if !m.field().is_zero(m.get(i, j)) {
                    return false;
                }
            }
        }
        off += d;
    }
    true
}

/// Columns: `w`, then the first standard vectors completing a basis.
fn complete_basis(field: &Field, n: usize, w: &[Vec<Scalar>]) -> Mat {
    let mut ech = Echelon::new(field, n);
    for v in w {
        ech.insert(v);
    }
    for i in 0..n {
        ech.insert(&unit_vector(field, n, i));
    }
    Mat::from_columns(field, n, ech.basis())
}

fn flag(field: &Field, n: usize, gens: &[Mat]) -> (Mat, Vec<usize>) {
    let Some(w) = invariant_subspace(field, n, gens).subspace else {
        return (Mat::identity(field, n), vec![n]);
    };
    let m = w.len();
    let q0 = complete_basis(field, n, &w);
    let qi = q0.inverse().expect("completed basis is invertible");
    let conj: Vec<Mat> = gens.iter().map(|g| &(&qi * g) * &q0).collect();
    let top: Vec<Mat> = conj.iter().map(|g| g.submatrix(0, 0, m, m)).collect();
    let bottom: Vec<Mat> = conj.iter().map(|g| g.submatrix(m, m, n - m, n - m)).collect();
    let (qa, mut sizes) = flag(field, m, &top);
    let (qc, sc) = flag(field, n - m, &bottom);
    sizes.extend(sc);
    (&q0 * &Mat::block_diagonal(field, &[qa, qc]), sizes)
}

pub fn triangularize(gens: &[Mat]) -> Result<FlagDecomposition> {
    let (field, n) = system(gens)?;
    let (q, block_sizes) = flag(&field, n, gens);
    let qi = q.inverse()?;
    let conjugated: Vec<Mat> = gens.iter().map(|g| &(&qi * g) * &q).collect();
    if let Some(i) = conjugated.iter().position(|c| !is_block_upper(c, &block_sizes)) {
        return Err(Error::Soundness(format!(
            "conjugated generator {i} is not block upper triangular"
        )));
    }
    Ok(FlagDecomposition {
        q,
        block_sizes,
        conjugated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BurnsideBasisData {
    pub field: Field,
    pub n: usize,
    pub elements: Vec<Mat>,
    pub words: Vec<Vec<usize>>,
    /// `d_ij = tr(s_i s_j)`.
    pub gram: Mat,
    /// `C = D⁻¹`.
    pub dual: Mat,
}

pub fn gram_matrix(field: &Field, elements: &[Mat]) -> Result<Mat> {
    let k = elements.len();
    let mut d = Mat::zeros(field, k, k);
    for i in 0..k {
        for j in 0..k {
            d.set(i, j, elements[i].trace_form(&elements[j])?);
        }
    }
    Ok(d)
}

/// First `n²` linearly independent elements of `stream` and their trace-form
/// Gram matrix with its inverse.
pub fn burnside_basis(
    field: &Field,
    n: usize,
    stream: impl IntoIterator<Item = (Mat, Vec<usize>)>,
) -> Result<BurnsideBasisData> {
    let full = n * n;
    let mut ech = Echelon::new(field, full);
    let mut elements = Vec::new();
    let mut words = Vec::new();
    for (s, w) in stream {
        if elements.len() == full {
            break;
        }
        if ech.insert(&s.flatten()) {
            elements.push(s);
            words.push(w);
        }
    }
    if elements.len() < full {
        return Err(Error::DoesNotSpan {
            dim: elements.len(),
            full,
        });
    }
    let gram = gram_matrix(field, &elements)?;
    let dual = match gram.inverse() {
        Ok(c) => c,
        Err(_) => {
            let kernel = gram.nullspace().into_iter().next().unwrap_or_default();
            return Err(Error::DegenerateGram {
                kernel: kernel.iter().map(|x| field.render(x)).collect(),
            });
        }
    };
    Ok(BurnsideBasisData {
        field: field.clone(),
        n,
        elements,
        words,
        gram,
        dual,
    })
}

impl BurnsideBasisData {
    /// `s_i* = Σ_j c_ij s_j`.
    pub fn dual_elements(&self) -> Vec<Mat> {
        let k = self.elements.len();
        (0..k)
            .map(|i| {
                (0..k).fold(Mat::zeros(&self.field, self.n, self.n), |acc, j| {
                    acc.checked_add(&self.elements[j].scale(self.dual.get(i, j)))
                        .expect("same shape")
                })
            })
            .collect()
    }

    /// `C·D = I` and `tr(s_i* s_j) = δ_ij`.
    pub fn check_duality(&self) -> bool {
        let k = self.elements.len();
        if !(&self.dual * &self.gram).is_identity() {
            return false;
        }
        let duals = self.dual_elements();
        (0..k).all(|i| {
            (0..k).all(|j| {
                let t = duals[i].trace_form(&self.elements[j]).expect("same shape");
                t == if i == j { self.field.one() } else { self.field.zero() }
            })
        })
    }
}

/// Coefficients `a_i = Σ_j c_ij tr(s s_j)`, checked to reproduce `s`.
pub fn reconstruct_coeffs(s: &Mat, data: &BurnsideBasisData) -> Result<Vec<Scalar>> {
    let f = &data.field;
    let k = data.elements.len();
    let t = data
        .elements
        .iter()
        .map(|sj| s.trace_form(sj))
        .collect::<Result<Vec<_>, _>>()?;
    let a: Vec<Scalar> = (0..k)
        .map(|i| (0..k).fold(f.zero(), |acc, j| f.add(&acc, &f.mul(data.dual.get(i, j), &t[j]))))
        .collect();
    let mut sum = Mat::zeros(f, data.n, data.n);
    for (ai, si) in a.iter().zip(&data.elements) {
        sum = sum.checked_add(&si.scale(ai))?;
    }
    if sum != *s {
        return Err(Error::NotInSpan);
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissibleRange {
    /// Integers in `[-bound, bound]`.
    Integers { bound: u64 },
    PrimeField { p: u64 },
    WholeField { order: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceSet {
    Enumerated(BTreeSet<Scalar>),
    /// What traces of a periodic semigroup can be, before enumerating it.
    Admissible {
        range: AdmissibleRange,
        /// Possible orders of root-of-unity eigenvalues over the rationals.
        root_orders: Vec<u64>,
    },
}

impl TraceSet {
    pub fn len(&self) -> u64 {
        match self {
            TraceSet::Enumerated(v) => v.len() as u64,
            TraceSet::Admissible { range, .. } => match *range {
                AdmissibleRange::Integers { bound } => 2 * bound + 1,
                AdmissibleRange::PrimeField { p } => p,
                AdmissibleRange::WholeField { order } => order,
            },
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, field: &Field, s: &Scalar) -> bool {
        match self {
            TraceSet::Enumerated(v) => v.contains(s),
            TraceSet::Admissible { range, .. } => match *range {
                AdmissibleRange::Integers { bound } => field
                    .as_integer(s)
                    .is_some_and(|i| i.magnitude() <= &BigUint::from(bound)),
                AdmissibleRange::PrimeField { .. } => field.in_prime_field(s),
                AdmissibleRange::WholeField { .. } => true,
            },
        }
    }

    /// Whether every enumerated value lies in `other`.
    pub fn is_subset_of(&self, other: &TraceSet, field: &Field) -> bool {
        match self {
            TraceSet::Enumerated(v) => v.iter().all(|s| other.contains(field, s)),
            TraceSet::Admissible { .. } => self == other,
        }
    }
}

pub fn trace_set<'a>(elements: impl IntoIterator<Item = &'a Mat>) -> Result<TraceSet> {
    let mut out = BTreeSet::new();
    for s in elements {
        out.insert(s.trace()?);
    }
    Ok(TraceSet::Enumerated(out))
}

/// Traces a periodic semigroup of `n x n` matrices can have.
///
/// Over the rationals, eigenvalues are 0 or roots of unity of order `k` with
/// `φ(k) ≤ n`, and a rational sum of at most `n` of them is an integer of
/// absolute value at most `n`.
pub fn admissible_traces(n: usize, field: &Field, prime_entries: bool) -> TraceSet {
    if field.is_rationals() {
        return TraceSet::Admissible {
            range: AdmissibleRange::Integers { bound: n as u64 },
            root_orders: orders_with_totient_at_most(n as u64),
        };
    }
    let range = if prime_entries || field.degree() == 1 {
        AdmissibleRange::PrimeField {
            p: field.characteristic(),
        }
    } else {
        AdmissibleRange::WholeField {
            order: field.order().expect("finite field"),
        }
    };
    TraceSet::Admissible {
        range,
        root_orders: Vec::new(),
    }
}

/// `|T|^{n²}`.
pub fn irreducible_bound(n: usize, traces: &TraceSet) -> BigUint {
    BigUint::from(traces.len()).pow((n * n) as u32)
}

/// `X B V` for `m = [[A, B], [0, C]]` in the stabilizer of `n1 = (X, Y)`,
/// `n2 = (U, V)`.
pub fn block_trace_embedding(m: &Mat, top: usize, n1: (&Mat, &Mat), n2: (&Mat, &Mat)) -> Result<Mat> {
    let n = m.rows();
    if !m.is_square() || top == 0 || top >= n {
        return Err(AlgebraError::ShapeMismatch(format!("split {top} of a {}x{} matrix", m.rows(), m.cols())).into());
    }
    let r = n - top;
    let (x, y) = n1;
    let (u, v) = n2;
    for (name, mat, d) in [("X", x, top), ("Y", y, r), ("U", u, top), ("V", v, r)] {
        if mat.rows() != d || mat.cols() != d || mat.field() != m.field() {
            return Err(AlgebraError::ShapeMismatch(format!("{name} must be {d}x{d} over the same field")).into());
        }
    }
    if !m.submatrix(top, 0, r, top).is_zero() {
        return Err(Error::NotInStabilizer("lower-left block = 0"));
    }
    let a = m.submatrix(0, 0, top, top);
    let b = m.submatrix(0, top, top, r);
    let c = m.submatrix(top, top, r, r);
    if &(x * &a) != x {
        return Err(Error::NotInStabilizer("XA = X"));
    }
    if &(y * &c) != y {
        return Err(Error::NotInStabilizer("YC = Y"));
    }
    if &(&a * u) != u {
        return Err(Error::NotInStabilizer("AU = U"));
    }
    if &(&c * v) != v {
        return Err(Error::NotInStabilizer("CV = V"));
    }
    Ok(&(x * &b) * v)
}

/// Periodic subgroups of the additive group of `m x r` matrices.
pub fn trace_classification(field: &Field, _shape: (usize, usize)) -> TraceClass {
    match field.characteristic() {
        0 => TraceClass::Trivial,
        p => TraceClass::ElementaryAbelianP(p),
    }
}

fn rational(s: &Scalar) -> BigRational {
    match s {
        Scalar::Rational(r) => r.clone(),
        Scalar::Finite(_) => panic!("rational scalar expected"),
    }
}

/// Characteristic polynomial over the rationals, lowest degree first.
fn rational_charpoly(s: &Mat) -> Vec<BigRational> {
    let n = s.rows();
    let f = s.field();
    let id = Mat::identity(f, n);
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::from_integer(1.into());
    let mut m = Mat::zeros(f, n, n);
    for k in 1..=n {
        m = (s * &m)
            .checked_add(&id.scale(&Scalar::Rational(c[n - k + 1].clone())))
            .expect("same shape");
        let t = rational(&(s * &m).trace().expect("square"));
        c[n - k] = -t / BigRational::from_integer((k as i64).into());
    }
    c
}

/// Quotient of `p` by the monic integer polynomial `d`, if exact.
fn divide_exact(p: &[BigRational], d: &[i64]) -> Option<Vec<BigRational>> {
    if p.len() < d.len() {
        return None;
    }
    let dd = d.len() - 1;
    let mut r = p.to_vec();
    let mut q = vec![BigRational::zero(); r.len() - dd];
    for i in (0..q.len()).rev() {
        let c = r[i + dd].clone();
        for (j, &b) in d.iter().enumerate() {
            r[i + j] -= &c * BigRational::from_integer(b.into());
        }
        q[i] = c;
    }
    r.iter().all(Zero::is_zero).then_some(q)
}

fn eval_poly(s: &Mat, coeffs: &[i64]) -> Mat {
    let f = s.field();
    let id = Mat::identity(f, s.rows());
    coeffs.iter().rev().fold(Mat::zeros(f, s.rows(), s.rows()), |acc, &c| {
        (&acc * s).checked_add(&id.scale(&f.from_i64(c))).expect("same shape")
    })
}

/// Whether some power of `s` repeats. Always true over a finite field.
///
/// Over the rationals `s` is periodic iff its characteristic polynomial is
/// `x^a` times cyclotomic factors and `s^n Π Φ_k(s) = 0` over the distinct
/// factors, i.e. the minimal polynomial is `x^j` times a squarefree product
/// of cyclotomic polynomials.
pub fn is_periodic(s: &Mat) -> bool {
    if !s.field().is_rationals() {
        return true;
    }
    let n = s.rows();
    let mut p = rational_charpoly(s);
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
    }
    if p.iter().any(|c| !c.is_integer()) {
        return false;
    }
    let mut factors = Vec::new();
    for k in orders_with_totient_at_most(n as u64) {
        if p.len() == 1 {
            break;
        }
        let phi = cyclotomic(k);
        let mut used = false;
        while let Some(q) = divide_exact(&p, &phi) {
            p = q;
            used = true;
        }
        if used {
            factors.push(phi);
        }
    }
    if p.len() != 1 {
        return false;
    }
    factors
        .iter()
        .fold(s.pow(n as u64), |acc, phi| &acc * &eval_poly(s, phi))
        .is_zero()
}

/// `g1*g3*g2` for generator positions `[0, 2, 1]`; `1` for the empty word.
pub fn word_label(word: &[usize]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter().map(|i| format!("g{}", i + 1)).collect::<Vec<_>>().join("*")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Order of the monoid generated, identity included.
    Finite { order: usize },
    NonPeriodicWitness { element: Mat, word: Vec<usize> },
    Inconclusive { limit: LimitReport },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrreducibleBlock {
    pub basis: BurnsideBasisData,
    pub traces: TraceSet,
    pub admissible: TraceSet,
    pub bound: BigUint,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockPath {
    Spanning(Box<IrreducibleBlock>),
    /// Over GF(p), a block whose algebra is a proper subalgebra, split again
    /// over the extension field its centre suggests.
    Lifted {
        field: Field,
        flag: FlagDecomposition,
        parts: Vec<BlockPath>,
    },
    Unavailable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockAnalysis {
    pub offset: usize,
    pub size: usize,
    pub algebra_dim: usize,
    pub order: Option<usize>,
    pub path: BlockPath,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorPeriodicity {
    pub periodic: bool,
    pub power_period: Option<PowerPeriod>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub elements: usize,
    pub steps: u64,
    pub arrows: usize,
    pub millis: u64,
}

#[derive(Clone, Debug)]
pub struct FinitenessReport {
    pub field: Field,
    pub generators: Vec<Mat>,
    pub verdict: Verdict,
    pub periodicity: Vec<GeneratorPeriodicity>,
    pub flag: Option<FlagDecomposition>,
    pub blocks: Vec<BlockAnalysis>,
    pub kernel: Option<KernelFiniteness>,
    pub kernel_note: Option<String>,
    pub counters: Counters,
}

pub fn entries_in_prime_field(gens: &[Mat]) -> bool {
    gens.iter()
        .all(|g| g.entries().iter().all(|x| g.field().in_prime_field(x)))
}

fn irreducible_block(field: &Field, d: usize, en: &Enumeration<Mat>, prime_entries: bool) -> Result<IrreducibleBlock> {
    let stream = en.elements.iter().enumerate().map(|(i, m)| (m.clone(), en.word(i)));
    let basis = burnside_basis(field, d, stream)?;
    if !basis.check_duality() {
        return Err(Error::Soundness("trace-form dual basis fails C·D = I".into()));
    }
    let traces = trace_set(&en.elements)?;
    let admissible = admissible_traces(d, field, prime_entries);
    if !traces.is_subset_of(&admissible, field) {
        return Err(Error::Soundness("an enumerated trace is not admissible".into()));
    }
    for (i, s) in en.elements.iter().enumerate() {
        if reconstruct_coeffs(s, &basis).is_err() {
            return Err(Error::Soundness(format!("element {i} is not recovered from its traces")));
        }
    }
    let bound = irreducible_bound(d, &traces);
    let order = en.elements.len();
    if BigUint::from(order) > bound {
        return Err(Error::Soundness(format!("block order {order} exceeds the trace bound {bound}")));
    }
    Ok(IrreducibleBlock {
        basis,
        traces,
        admissible,
        bound,
        order,
    })
}

/// Same entries, read in `GF(p^e)`.
pub fn lift_matrix(m: &Mat, ext: &Field) -> Mat {
    Mat::new(ext, m.rows(), m.cols(), m.entries().to_vec()).expect("prime field embeds")
}

fn lift_block(field: &Field, gens: &[Mat], dim: usize, limits: &Limits) -> Result<BlockPath> {
    let d = gens[0].rows();
    let p = field.characteristic();
    let unavailable = |reason: String| Ok(BlockPath::Unavailable { reason });
    if !(d * d).is_multiple_of(dim) {
        return unavailable(format!("algebra dimension {dim} does not divide {}", d * d));
    }
    let e = (d * d / dim) as u32;
    if e < 2 || p.checked_pow(e).is_none_or(|q| q > MAX_FIELD_ORDER) {
        return unavailable(format!("GF({p}^{e}) is out of range"));
    }
    let ext = Field::extension(p, e)?;
    let lifted: Vec<Mat> = gens.iter().map(|g| lift_matrix(g, &ext)).collect();
    let flag = triangularize(&lifted)?;
    if flag.block_sizes.len() == 1 {
        return unavailable(format!("no invariant subspace found over GF({p}^{e})"));
    }
    let mut parts = Vec::new();
    for b in 0..flag.block_sizes.len() {
        let bg = flag.block_generators(b);
        parts.push(analyze_block(&ext, &bg, limits, false)?.2);
    }
    Ok(BlockPath::Lifted { field: ext, flag, parts })
}

fn analyze_block(field: &Field, gens: &[Mat], limits: &Limits, lift: bool) -> Result<(usize, Option<usize>, BlockPath)> {
    let d = gens[0].rows();
    let span = spanning_check(field, d, gens);
    let en = closure_enumeration(gens, limits)?;
    if !en.complete {
        let reason = format!("block closure stopped: {}", en.limit_report("block closure"));
        return Ok((span.dim, None, BlockPath::Unavailable { reason }));
    }
    let order = en.elements.len();
    let path = if span.spans {
        BlockPath::Spanning(Box::new(irreducible_block(field, d, &en, entries_in_prime_field(gens))?))
    } else if field.is_rationals() {
        BlockPath::Unavailable {
            reason: format!("bound path unavailable over Q: block algebra has dimension {} < {}", span.dim, d * d),
        }
    } else if field.degree() == 1 && lift {
        lift_block(field, gens, span.dim, limits)?
    } else {
        BlockPath::Unavailable {
            reason: format!("block algebra has dimension {} < {} over a non-prime field", span.dim, d * d),
        }
    };
    Ok((span.dim, Some(order), path))
}

/// First element of a partial closure, in closure order, with no repeating power.
pub fn witness_scan(en: &Enumeration<Mat>) -> Option<usize> {
    en.elements.iter().position(|m| !is_periodic(m))
}

/// Closure in rounds of growing size, stopping early once a prefix holds a
/// non-periodic element. Closure order does not depend on the limits, so the
/// witness found is the one a full run would give.
fn staged_closure(gens: &[Mat], limits: &Limits) -> Result<Enumeration<Mat>> {
    let mut cap = 256usize;
    loop {
        let round = Limits {
            max_elements: cap.min(limits.max_elements),
            ..*limits
        };
        let en = closure_enumeration(gens, &round)?;
        if en.complete || round.max_elements == limits.max_elements || witness_scan(&en).is_some() {
            return Ok(en);
        }
        cap = cap.saturating_mul(8);
    }
}

/// Decide finiteness of the monoid generated by `gens`.
///
/// Order of work: per-generator periodicity, triangularization, direct
/// closure, then per-block trace data and the kernel-category cross-check.
/// Cross-check failures are reported as [`Error::Soundness`].
pub fn mcnaughton_zalcstein(gens: &[Mat], limits: &Limits) -> Result<FinitenessReport> {
    let started = Instant::now();
    let (field, _) = system(gens)?;
    let mut report = FinitenessReport {
        field: field.clone(),
        generators: gens.to_vec(),
        verdict: Verdict::Finite { order: 0 },
        periodicity: Vec::new(),
        flag: None,
        blocks: Vec::new(),
        kernel: None,
        kernel_note: None,
        counters: Counters::default(),
    };
    let finish = |mut r: FinitenessReport| {
        r.counters.millis = started.elapsed().as_millis() as u64;
        Ok(r)
    };

    for (i, g) in gens.iter().enumerate() {
        let periodic = is_periodic(g);
        let power_period = if periodic { g.power_period(limits.power_cap).ok() } else { None };
        report.periodicity.push(GeneratorPeriodicity { periodic, power_period });
        if !periodic {
            report.verdict = Verdict::NonPeriodicWitness {
                element: g.clone(),
                word: vec![i],
            };
            return finish(report);
        }
    }

    let flag = triangularize(gens)?;
    report.flag = Some(flag.clone());

    let direct = if field.is_rationals() {
        staged_closure(gens, limits)?
    } else {
        closure_enumeration(gens, limits)?
    };
    report.counters.elements = direct.elements.len();
    report.counters.steps = direct.steps;
    if !direct.complete {
        let scan = if field.is_rationals() { witness_scan(&direct) } else { None };
        report.verdict = match scan {
            Some(i) => Verdict::NonPeriodicWitness {
                element: direct.elements[i].clone(),
                word: direct.word(i),
            },
            None => Verdict::Inconclusive {
                limit: direct.limit_report("closure"),
            },
        };
        return finish(report);
    }
    let order = direct.elements.len();
    drop(direct);

    for (b, offset) in flag.offsets().into_iter().enumerate() {
        let (algebra_dim, block_order, path) = analyze_block(&field, &flag.block_generators(b), limits, true)?;
        if block_order.is_some_and(|o| o > order) {
            return Err(Error::Soundness(format!("block {b} is larger than the semigroup")));
        }
        report.blocks.push(BlockAnalysis {
            offset,
            size: flag.block_sizes[b],
            algebra_dim,
            order: block_order,
            path,
        });
    }

    let conj = closure_enumeration(&flag.conjugated, limits)?;
    if !conj.complete || conj.elements.len() != order {
        return Err(Error::Soundness(format!(
            "conjugated generators give order {} instead of {order}",
            conj.elements.len()
        )));
    }

    if flag.block_sizes.len() < 2 {
        report.kernel_note = Some("single diagonal block".into());
    } else {
        let budget = Limits {
            max_elements: limits.max_elements.min(KERNEL_ARROW_BUDGET),
            ..*limits
        };
        let run = BlockContext::new(&flag.conjugated, flag.block_sizes[0], &budget)
            .and_then(|ctx| finiteness_via_kernel(&ctx, &budget, Some(order)));
        match run {
            Ok(k) => {
                report.counters.steps += k.steps;
                report.counters.arrows = k.arrow_count;
                if !k.complete {
                    report.kernel_note = Some("kernel category exceeded its arrow budget".into());
                }
                report.kernel = Some(k);
            }
            Err(Error::LimitExceeded(r)) => report.kernel_note = Some(format!("kernel cross-check skipped: {r}")),
            Err(e) => return Err(e),
        }
    }
    report.verdict = Verdict::Finite { order };
    finish(report)
}
