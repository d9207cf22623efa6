//! The kernel category of a monoid homomorphism `φ: M → N`.
//!
//! Objects are pairs `(n1, n2)` of elements of `N`. An arrow is the class of a
//! triple `[n1, m, n2]`, running from `(n1, φ(m) n2)` to `(n1 φ(m), n2)`. Two
//! triples with the same `n1`, `n2` are identified when they agree on
//! `n1 φ(m)`, on `φ(m) n2`, and on every product `m1 m m2` with `m1` over
//! `n1` and `m2` over `n2`. Composition is `[n1, m, φ(m') n2][n1 φ(m), m', n2] = [n1, m m', n2]`.
//!
//! Arrow keys come from a [`KernelContext`]: either the full table of triple
//! products ([`EnumeratedContext`], for enumerated `M`), or the single
//! off-diagonal product `X B V` for block upper-triangular matrix monoids
//! projected to their diagonal ([`BlockContext`]).

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, LimitReport, Result};
use crate::field::Field;
use crate::mat::Mat;
use crate::semigroup::{enumerate, triple_signature, Carrier, FinMonoid, Limits, MonoidHom};

/// Representative words longer than this are not stored.
pub const WORD_CAP: usize = 64;
const EXHAUSTIVE_AXIOM_LIMIT: usize = 500;
const AXIOM_SAMPLES: usize = 20_000;

pub type Object = (usize, usize);

/// What the kernel-category engine needs to know about `φ: M → N`.
pub trait KernelContext {
    /// An element of `M`.
    type Rep: Clone + Debug;
    /// The part of an arrow key that depends on `m` beyond its image.
    type Data: Clone + Eq + Hash + Ord + Debug;

    fn codomain(&self) -> &FinMonoid;
    fn generators(&self) -> &[Self::Rep];
    fn identity_rep(&self) -> Self::Rep;
    /// Index of `φ(m)` in the codomain.
    fn image(&self, m: &Self::Rep) -> Result<usize>;
    fn compose(&self, a: &Self::Rep, b: &Self::Rep) -> Self::Rep;
    fn data(&self, n1: usize, m: &Self::Rep, n2: usize) -> Result<Self::Data>;
    fn data_bytes(&self, d: &Self::Data) -> Vec<u8>;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrowKey<D> {
    pub n1: usize,
    pub n2: usize,
    /// `n1 φ(m)`
    pub left: usize,
    /// `φ(m) n2`
    pub right: usize,
    pub data: D,
}

impl<D> ArrowKey<D> {
    pub fn source(&self) -> Object {
        (self.n1, self.right)
    }

    pub fn target(&self) -> Object {
        (self.left, self.n2)
    }
}

#[derive(Clone, Debug)]
pub struct KernelArrow<R, D> {
    pub source: Object,
    pub target: Object,
    pub rep: R,
    /// Generator positions spelling `rep`, dropped past [`WORD_CAP`].
    pub word: Option<Vec<usize>>,
    pub key: ArrowKey<D>,
}

pub fn arrow_key<C: KernelContext>(ctx: &C, n1: usize, m: &C::Rep, n2: usize) -> Result<ArrowKey<C::Data>> {
    let cod = ctx.codomain();
    for n in [n1, n2] {
        if n >= cod.order() {
            return Err(Error::IndexOutOfRange { index: n, size: cod.order() });
        }
    }
    let v = ctx.image(m)?;
    Ok(ArrowKey {
        n1,
        n2,
        left: cod.mul(n1, v),
        right: cod.mul(v, n2),
        data: ctx.data(n1, m, n2)?,
    })
}

fn make_arrow<C: KernelContext>(
    ctx: &C,
    n1: usize,
    rep: C::Rep,
    n2: usize,
    word: Option<Vec<usize>>,
) -> Result<KernelArrow<C::Rep, C::Data>> {
    let key = arrow_key(ctx, n1, &rep, n2)?;
    Ok(KernelArrow {
        source: key.source(),
        target: key.target(),
        rep,
        word,
        key,
    })
}

/// The identity arrow `[n1, 1, n2]`.
pub fn identity_arrow<C: KernelContext>(ctx: &C, obj: Object) -> Result<KernelArrow<C::Rep, C::Data>> {
    make_arrow(ctx, obj.0, ctx.identity_rep(), obj.1, Some(Vec::new()))
}

/// The generating arrow `[n1, x, n2]` for generator position `j`.
pub fn generating_arrow<C: KernelContext>(
    ctx: &C,
    n1: usize,
    j: usize,
    n2: usize,
) -> Result<KernelArrow<C::Rep, C::Data>> {
    make_arrow(ctx, n1, ctx.generators()[j].clone(), n2, Some(vec![j]))
}

/// Diagrammatic composite: `f` first, then `g`.
pub fn arrow_compose<C: KernelContext>(
    ctx: &C,
    f: &KernelArrow<C::Rep, C::Data>,
    g: &KernelArrow<C::Rep, C::Data>,
) -> Result<KernelArrow<C::Rep, C::Data>> {
    if f.target != g.source {
        return Err(Error::NonComposable {
            target: f.target,
            source_obj: g.source,
        });
    }
    let word = match (&f.word, &g.word) {
        (Some(a), Some(b)) if a.len() + b.len() <= WORD_CAP => {
            Some(a.iter().chain(b).copied().collect())
        }
        _ => None,
    };
    make_arrow(ctx, f.key.n1, ctx.compose(&f.rep, &g.rep), g.key.n2, word)
}

/// An enumerated (possibly partial) kernel category.
#[derive(Clone, Debug)]
pub struct KernelCat<R, D> {
    pub objects: Vec<Object>,
    object_index: HashMap<Object, usize>,
    pub arrows: Vec<KernelArrow<R, D>>,
    index: HashMap<ArrowKey<D>, usize>,
    /// Arrow indices of the generating arrows `[n1, x, n2]`.
    pub generating: Vec<usize>,
    /// Identity arrow index per object.
    pub identities: Vec<usize>,
    pub steps: u64,
    /// `Some` when enumeration stopped at a limit; the category is then not a certificate.
    pub limit: Option<LimitReport>,
}

impl<R: Clone + Debug, D: Clone + Eq + Hash + Ord + Debug> KernelCat<R, D> {
    pub fn is_complete(&self) -> bool {
        self.limit.is_none()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn object_id(&self, obj: Object) -> Option<usize> {
        self.object_index.get(&obj).copied()
    }

    pub fn lookup(&self, key: &ArrowKey<D>) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Arrows from `obj` to itself.
    pub fn endo_arrows(&self, obj: Object) -> Vec<usize> {
        (0..self.arrows.len())
            .filter(|&i| self.arrows[i].source == obj && self.arrows[i].target == obj)
            .collect()
    }

    fn by_source(&self) -> HashMap<Object, Vec<usize>> {
        let mut out: HashMap<Object, Vec<usize>> = HashMap::new();
        for (i, a) in self.arrows.iter().enumerate() {
            out.entry(a.source).or_default().push(i);
        }
        out
    }

    fn insert(&mut self, arrow: KernelArrow<R, D>) -> Option<usize> {
        if self.index.contains_key(&arrow.key) {
            return None;
        }
        let i = self.arrows.len();
        self.index.insert(arrow.key.clone(), i);
        self.arrows.push(arrow);
        Some(i)
    }
}

/// Enumerate `K_φ` as the closure of the generating arrows `[n1, x, n2]`
/// (`x` a generator of `M`, `(n1, n2)` ranging over `N × N`) together with
/// the identities. Stops with a partial, non-certifying category at the limits.
pub fn kernel_category<C: KernelContext>(ctx: &C, limits: &Limits) -> Result<KernelCat<C::Rep, C::Data>> {
    let cod = ctx.codomain();
    let n = cod.order();
    let gens = ctx.generators().len();
    let mut cat = KernelCat {
        objects: Vec::new(),
        object_index: HashMap::new(),
        arrows: Vec::new(),
        index: HashMap::new(),
        generating: Vec::new(),
        identities: Vec::new(),
        steps: 0,
        limit: None,
    };
    let generating_count = n.saturating_mul(n).saturating_mul(gens);
    if generating_count > limits.max_elements {
        cat.limit = Some(LimitReport {
            what: "kernel category generating arrows",
            elements: 0,
            steps: 0,
            frontier: generating_count,
        });
        return Ok(cat);
    }
    let mut generating = Vec::with_capacity(generating_count);
    for n1 in 0..n {
        for n2 in 0..n {
            for j in 0..gens {
                generating.push(generating_arrow(ctx, n1, j, n2)?);
            }
        }
    }
    cat.objects = (0..n).flat_map(|n1| (0..n).map(move |n2| (n1, n2))).collect();
    cat.object_index = cat.objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let mut layer = Vec::new();
    for i in 0..cat.objects.len() {
        let id = identity_arrow(ctx, cat.objects[i])?;
        let idx = cat.insert(id).expect("identities at distinct objects have distinct keys");
        cat.identities.push(idx);
    }
    for a in generating {
        let key = a.key.clone();
        match cat.insert(a) {
            Some(i) => {
                cat.generating.push(i);
                layer.push(i);
            }
            None => cat.generating.push(cat.index[&key]),
        }
    }
    let mut gen_by_source: HashMap<Object, Vec<usize>> = HashMap::new();
    for &g in &cat.generating {
        let list = gen_by_source.entry(cat.arrows[g].source).or_default();
        if !list.contains(&g) {
            list.push(g);
        }
    }
    loop {
        layer.sort_by(|&a, &b| {
            let (x, y) = (&cat.arrows[a], &cat.arrows[b]);
            (cat.object_index[&x.source], &x.key).cmp(&(cat.object_index[&y.source], &y.key))
        });
        let mut next = Vec::new();
        for &f in &layer {
            let Some(exts) = gen_by_source.get(&cat.arrows[f].target) else {
                continue;
            };
            for &g in exts {
                if cat.steps >= limits.max_steps || cat.arrows.len() >= limits.max_elements {
                    cat.limit = Some(LimitReport {
                        what: "kernel category closure",
                        elements: cat.arrows.len(),
                        steps: cat.steps,
                        frontier: layer.len() + next.len(),
                    });
                    return Ok(cat);
                }
                cat.steps += 1;
                let h = arrow_compose(ctx, &cat.arrows[f], &cat.arrows[g])?;
                if let Some(i) = cat.insert(h) {
                    next.push(i);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    Ok(cat)
}

/// Endomorphism monoid at `obj`, with the identity arrow as element 0 and
/// elements in arrow-store order.
pub fn endo_monoid<C: KernelContext>(ctx: &C, cat: &KernelCat<C::Rep, C::Data>, obj: Object) -> Result<FinMonoid> {
    let oid = cat
        .object_id(obj)
        .ok_or_else(|| Error::InvalidMonoid(format!("object {obj:?} is not materialized")))?;
    let id = cat.identities[oid];
    let mut elems = vec![id];
    elems.extend(cat.endo_arrows(obj).into_iter().filter(|&i| i != id));
    let local: HashMap<usize, usize> = elems.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let k = elems.len();
    let mut table = vec![0u32; k * k];
    for a in 0..k {
        for b in 0..k {
            let h = arrow_compose(ctx, &cat.arrows[elems[a]], &cat.arrows[elems[b]])?;
            let gi = cat.lookup(&h.key).ok_or_else(|| {
                Error::Soundness("composite of stored arrows missing from the store".into())
            })?;
            table[a * k + b] = local[&gi] as u32;
        }
    }
    FinMonoid::from_table(k, 0, (1..k).collect(), table)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub exhaustive: bool,
    pub triples_checked: u64,
    pub identities_checked: u64,
}

/// Check identity laws at every object and associativity on composable
/// triples: exhaustively up to 500 arrows, on 20000 sampled triples above.
pub fn check_axioms<C: KernelContext>(ctx: &C, cat: &KernelCat<C::Rep, C::Data>, seed: u64) -> Result<AxiomReport> {
    let mut report = AxiomReport {
        exhaustive: cat.arrow_count() <= EXHAUSTIVE_AXIOM_LIMIT,
        ..AxiomReport::default()
    };
    let compose_key = |f: usize, g: usize| -> Result<usize> {
        let h = arrow_compose(ctx, &cat.arrows[f], &cat.arrows[g])?;
        cat.lookup(&h.key)
            .ok_or_else(|| Error::Soundness(format!("composite of arrows {f} and {g} is not stored")))
    };
    for (i, a) in cat.arrows.iter().enumerate() {
        let s = cat.identities[cat.object_index[&a.source]];
        let t = cat.identities[cat.object_index[&a.target]];
        if compose_key(s, i)? != i || compose_key(i, t)? != i {
            return Err(Error::Soundness(format!("identity law fails at arrow {i}")));
        }
        report.identities_checked += 1;
    }
    let by_source = cat.by_source();
    let empty = Vec::new();
    let outgoing = |i: usize| by_source.get(&cat.arrows[i].target).unwrap_or(&empty);
    let mut check = |f: usize, g: usize, h: usize| -> Result<()> {
        let left = compose_key(compose_key(f, g)?, h)?;
        let right = compose_key(f, compose_key(g, h)?)?;
        if left != right {
            return Err(Error::Soundness(format!("associativity fails at ({f}, {g}, {h})")));
        }
        report.triples_checked += 1;
        Ok(())
    };
    if report.exhaustive {
        for f in 0..cat.arrow_count() {
            for &g in outgoing(f) {
                for &h in outgoing(g) {
                    check(f, g, h)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..AXIOM_SAMPLES {
            let f = rng.gen_range(0..cat.arrow_count());
            let gs = outgoing(f);
            let g = gs[rng.gen_range(0..gs.len())];
            let hs = outgoing(g);
            let h = hs[rng.gen_range(0..hs.len())];
            check(f, g, h)?;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub checked: usize,
    pub distinct: usize,
    /// Pairs of element positions sharing the key of `[1, m, 1]`.
    pub collisions: Vec<(usize, usize)>,
}

impl EmbedReport {
    pub fn injective(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Check that `m ↦ [1, m, 1]` separates the supplied elements.
pub fn embed_via_unit<C: KernelContext>(ctx: &C, elements: &[C::Rep]) -> Result<EmbedReport> {
    let e = ctx.codomain().identity();
    let mut seen: HashMap<ArrowKey<C::Data>, usize> = HashMap::new();
    let mut collisions = Vec::new();
    for (i, m) in elements.iter().enumerate() {
        let key = arrow_key(ctx, e, m, e)?;
        if let Some(&j) = seen.get(&key) {
            collisions.push((j, i));
        } else {
            seen.insert(key, i);
        }
    }
    Ok(EmbedReport {
        checked: elements.len(),
        distinct: seen.len(),
        collisions,
    })
}

/// Outcome of the kernel-category finiteness engine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFiniteness {
    pub codomain_order: usize,
    pub objects: usize,
    pub arrow_count: usize,
    /// Arrows `[1, m, 1]`; `|M|` is at most this many.
    pub unit_arrows: usize,
    pub complete: bool,
    pub steps: u64,
    /// Order of `M` from an independent closure, when supplied.
    pub direct_order: Option<usize>,
}

impl KernelFiniteness {
    /// Upper bound on `|M|`, available only when the category was fully enumerated.
    pub fn bound(&self) -> Option<usize> {
        self.complete.then_some(self.unit_arrows)
    }

    /// Whether the independent order respects the bound.
    pub fn consistent(&self) -> Option<bool> {
        match (self.bound(), self.direct_order) {
            (Some(b), Some(d)) => Some(d <= b && b <= self.arrow_count),
            _ => None,
        }
    }
}

/// Enumerate `K_φ` and bound `|M|` through the injective map `m ↦ [1, m, 1]`.
pub fn finiteness_via_kernel<C: KernelContext>(
    ctx: &C,
    limits: &Limits,
    direct_order: Option<usize>,
) -> Result<KernelFiniteness> {
    let cat = kernel_category(ctx, limits)?;
    let e = ctx.codomain().identity();
    let unit_arrows = cat
        .arrows
        .iter()
        .filter(|a| a.key.n1 == e && a.key.n2 == e)
        .count();
    let report = KernelFiniteness {
        codomain_order: ctx.codomain().order(),
        objects: cat.objects.len(),
        arrow_count: cat.arrow_count(),
        unit_arrows,
        complete: cat.is_complete(),
        steps: cat.steps,
        direct_order,
    };
    if report.consistent() == Some(false) {
        return Err(Error::Soundness(format!(
            "kernel bound {} is below the direct order {:?}",
            unit_arrows, direct_order
        )));
    }
    Ok(report)
}

/// Arrow keys from the table of triple products, for enumerated `M`.
pub struct EnumeratedContext<'a> {
    hom: &'a MonoidHom,
    generators: Vec<usize>,
}

impl<'a> EnumeratedContext<'a> {
    pub fn new(hom: &'a MonoidHom) -> EnumeratedContext<'a> {
        EnumeratedContext {
            generators: hom.domain().generators().to_vec(),
            hom,
        }
    }

    pub fn hom(&self) -> &MonoidHom {
        self.hom
    }
}

impl KernelContext for EnumeratedContext<'_> {
    type Rep = usize;
    type Data = Vec<u32>;

    fn codomain(&self) -> &FinMonoid {
        self.hom.codomain()
    }

    fn generators(&self) -> &[usize] {
        &self.generators
    }

    fn identity_rep(&self) -> usize {
        self.hom.domain().identity()
    }

    fn image(&self, m: &usize) -> Result<usize> {
        Ok(self.hom.image(*m))
    }

    fn compose(&self, a: &usize, b: &usize) -> usize {
        self.hom.domain().mul(*a, *b)
    }

    fn data(&self, n1: usize, m: &usize, n2: usize) -> Result<Vec<u32>> {
        for n in [n1, n2] {
            if self.hom.preimage(n).is_empty() {
                return Err(Error::EmptyPreimage(n));
            }
        }
        Ok(triple_signature(self.hom, n1, *m, n2))
    }

    fn data_bytes(&self, d: &Vec<u32>) -> Vec<u8> {
        d.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

/// Arrow keys `X B V` for a monoid of block upper-triangular matrices
/// `[[A, B], [0, C]]` projected onto its diagonal `(A, C)`.
///
/// For `n1 = (X, Y)` and `n2 = (U, V)` the corner of a triple product
/// `[[X, Z], [0, Y]] m [[U, W], [0, V]]` is `X A W + X B V + Z C V`, where
/// `X A` and `C V` are fixed by the key's image components; so `X B V`
/// decides the class of `m`.
#[derive(Clone, Debug)]
pub struct BlockContext {
    field: Field,
    top: usize,
    bottom: usize,
    generators: Vec<Mat>,
    codomain: FinMonoid,
    diagonal_index: HashMap<Mat, usize>,
}

impl BlockContext {
    /// `generators` must be block upper triangular with a `top x top` leading block.
    pub fn new(generators: &[Mat], top: usize, limits: &Limits) -> Result<BlockContext> {
        let first = generators
            .first()
            .ok_or_else(|| Error::ModeUnavailable("no generators".into()))?;
        let n = first.rows();
        if top == 0 || top >= n {
            return Err(Error::ModeUnavailable(format!(
                "split {top} does not give two nonempty diagonal blocks of a {n}x{n} matrix"
            )));
        }
        for (i, g) in generators.iter().enumerate() {
            if !g.is_square() || g.rows() != n || g.field() != first.field() {
                return Err(Error::ModeUnavailable(format!("generator {i} has the wrong shape or field")));
            }
            if !g.submatrix(top, 0, n - top, top).is_zero() {
                return Err(Error::ModeUnavailable(format!(
                    "generator {i} is not block upper triangular for split {top}"
                )));
            }
        }
        let field = first.field().clone();
        let diagonals: Vec<Mat> = generators.iter().map(|g| diagonal_part(g, top)).collect();
        let en = enumerate(Mat::identity(&field, n), &diagonals, |a, b| a * b, limits);
        if !en.complete {
            return Err(Error::LimitExceeded(en.limit_report("diagonal image closure")));
        }
        let codomain = FinMonoid::from_enumeration(en, Carrier::Matrices);
        let diagonal_index = codomain
            .matrices()
            .expect("matrix carrier")
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Ok(BlockContext {
            field,
            top,
            bottom: n - top,
            generators: generators.to_vec(),
            codomain,
            diagonal_index,
        })
    }

    pub fn split(&self) -> (usize, usize) {
        (self.top, self.bottom)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// `(X, Y)` blocks of codomain element `n`.
    pub fn diagonal_blocks(&self, n: usize) -> (Mat, Mat) {
        let d = &self.codomain.matrices().expect("matrix carrier")[n];
        (
            d.submatrix(0, 0, self.top, self.top),
            d.submatrix(self.top, self.top, self.bottom, self.bottom),
        )
    }
}

/// Zero out the off-diagonal block of a block upper-triangular matrix.
pub fn diagonal_part(m: &Mat, top: usize) -> Mat {
    let n = m.rows();
    let mut d = m.clone();
    for i in 0..top {
        for j in top..n {
            d.set(i, j, m.field().zero());
        }
    }
    d
}

impl KernelContext for BlockContext {
    type Rep = Mat;
    type Data = Mat;

    fn codomain(&self) -> &FinMonoid {
        &self.codomain
    }

    fn generators(&self) -> &[Mat] {
        &self.generators
    }

    fn identity_rep(&self) -> Mat {
        Mat::identity(&self.field, self.top + self.bottom)
    }

    fn image(&self, m: &Mat) -> Result<usize> {
        self.diagonal_index
            .get(&diagonal_part(m, self.top))
            .copied()
            .ok_or_else(|| Error::ModeUnavailable("diagonal of representative lies outside the enumerated image".into()))
    }

    fn compose(&self, a: &Mat, b: &Mat) -> Mat {
        a * b
    }

    fn data(&self, n1: usize, m: &Mat, n2: usize) -> Result<Mat> {
        let (x, _) = self.diagonal_blocks(n1);
        let (_, v) = self.diagonal_blocks(n2);
        let b = m.submatrix(0, self.top, self.top, self.bottom);
        Ok(&(&x * &b) * &v)
    }

    fn data_bytes(&self, d: &Mat) -> Vec<u8> {
        d.canonical_bytes()
    }
}

/// Stable digest of an arrow key.
pub fn key_digest<C: KernelContext>(ctx: &C, key: &ArrowKey<C::Data>) -> String {
    let mut h = Sha256::new();
    for v in [key.n1, key.n2, key.left, key.right] {
        h.update((v as u64).to_le_bytes());
    }
    h.update(ctx.data_bytes(&key.data));
    hex::encode(&h.finalize()[..12])
}

/// Category dump interchange document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDump {
    pub objects: Vec<Object>,
    pub arrows: Vec<ArrowDump>,
    pub spot_check_seed: u64,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowDump {
    pub source: Object,
    pub target: Object,
    pub key: String,
    pub word: Option<Vec<usize>>,
}

pub fn dump<C: KernelContext>(ctx: &C, cat: &KernelCat<C::Rep, C::Data>, seed: u64) -> CategoryDump {
    CategoryDump {
        objects: cat.objects.clone(),
        arrows: cat
            .arrows
            .iter()
            .map(|a| ArrowDump {
                source: a.source,
                target: a.target,
                key: key_digest(ctx, &a.key),
                word: a.word.clone(),
            })
            .collect(),
        spot_check_seed: seed,
        complete: cat.is_complete(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{closure, find_isomorphism, trace_monoid};

    fn upper_triangular_gf2() -> FinMonoid {
        let f = Field::prime(2).unwrap();
        let gens = [
            Mat::from_i64(&f, &[&[1, 1], &[0, 1]]),
            Mat::from_i64(&f, &[&[0, 0], &[0, 1]]),
            Mat::from_i64(&f, &[&[1, 0], &[0, 0]]),
        ];
        closure(&gens, &Limits::default()).unwrap()
    }

    fn projection(m: &FinMonoid) -> MonoidHom {
        MonoidHom::from_matrix_map(m, |x| diagonal_part(x, 1)).unwrap()
    }

    fn gf2_block_context() -> BlockContext {
        let m = upper_triangular_gf2();
        let gens: Vec<Mat> = m.generators().iter().map(|&g| m.matrices().unwrap()[g].clone()).collect();
        BlockContext::new(&gens, 1, &Limits::default()).unwrap()
    }

    fn codomain_index(ctx: &BlockContext, a: i64, c: i64) -> usize {
        let f = Field::prime(2).unwrap();
        ctx.image(&Mat::from_i64(&f, &[&[a, 0], &[0, c]])).unwrap()
    }

    #[test]
    fn block_keys() {
        let ctx = gf2_block_context();
        let f = Field::prime(2).unwrap();
        let one = codomain_index(&ctx, 1, 1);
        let zero = codomain_index(&ctx, 0, 0);
        let id = ctx.identity_rep();
        assert!(arrow_key(&ctx, one, &id, one).unwrap().data.is_zero());
        let u = Mat::from_i64(&f, &[&[1, 1], &[0, 1]]);
        let k0 = arrow_key(&ctx, one, &id, one).unwrap();
        let k1 = arrow_key(&ctx, one, &u, one).unwrap();
        assert_ne!(k0, k1);
        assert_eq!(
            arrow_key(&ctx, zero, &id, zero).unwrap(),
            arrow_key(&ctx, zero, &u, zero).unwrap()
        );
    }

    #[test]
    fn composition_adds_corner_entries() {
        let ctx = gf2_block_context();
        let f = Field::prime(2).unwrap();
        let one = codomain_index(&ctx, 1, 1);
        let u = Mat::from_i64(&f, &[&[1, 1], &[0, 1]]);
        let a = make_arrow(&ctx, one, u.clone(), one, None).unwrap();
        assert_eq!(a.key.data, Mat::from_i64(&f, &[&[1]]));
        let aa = arrow_compose(&ctx, &a, &a).unwrap();
        assert!(aa.key.data.is_zero());
        let id = identity_arrow(&ctx, a.target).unwrap();
        assert_eq!(arrow_compose(&ctx, &a, &id).unwrap().key, a.key);
    }

    #[test]
    fn composition_matches_product_key_exhaustively() {
        let m = upper_triangular_gf2();
        let hom = projection(&m);
        let ctx = EnumeratedContext::new(&hom);
        let n = hom.codomain().order();
        for x in 0..m.order() {
            for y in 0..m.order() {
                for n1 in 0..n {
                    for n2 in 0..n {
                        let f = make_arrow(&ctx, n1, x, hom.codomain().mul(hom.image(y), n2), None).unwrap();
                        let g = make_arrow(&ctx, hom.codomain().mul(n1, hom.image(x)), y, n2, None).unwrap();
                        let h = arrow_compose(&ctx, &f, &g).unwrap();
                        assert_eq!(h.key, arrow_key(&ctx, n1, &m.mul(x, y), n2).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn non_composable_is_an_error() {
        let m = upper_triangular_gf2();
        let hom = projection(&m);
        let ctx = EnumeratedContext::new(&hom);
        let a = identity_arrow(&ctx, (0, 0)).unwrap();
        let b = identity_arrow(&ctx, (1, 1)).unwrap();
        assert!(matches!(arrow_compose(&ctx, &a, &b), Err(Error::NonComposable { .. })));
    }

    #[test]
    fn two_element_group_identity_hom() {
        let q = Field::rationals();
        let p = Mat::from_i64(&q, &[&[0, 1], &[1, 0]]);
        let m = closure(&[p], &Limits::default()).unwrap();
        let hom = MonoidHom::identity_on(&m);
        let ctx = EnumeratedContext::new(&hom);
        let cat = kernel_category(&ctx, &Limits::default()).unwrap();
        assert!(cat.is_complete());
        let mut homsets: HashMap<(Object, Object), usize> = HashMap::new();
        for a in &cat.arrows {
            *homsets.entry((a.source, a.target)).or_default() += 1;
        }
        assert!(homsets.values().all(|&c| c <= 2));
        check_axioms(&ctx, &cat, 1).unwrap();
    }

    #[test]
    fn endomorphisms_match_traces() {
        let m = upper_triangular_gf2();
        let hom = projection(&m);
        let ctx = EnumeratedContext::new(&hom);
        let cat = kernel_category(&ctx, &Limits::default()).unwrap();
        assert!(cat.is_complete());
        check_axioms(&ctx, &cat, 7).unwrap();
        for &obj in &cat.objects {
            let endo = endo_monoid(&ctx, &cat, obj).unwrap();
            let tr = trace_monoid(&hom, obj.0, obj.1).unwrap();
            assert!(find_isomorphism(&endo, &tr.as_monoid()).is_some(), "object {obj:?}");
        }
        let block = gf2_block_context();
        let bcat = kernel_category(&block, &Limits::default()).unwrap();
        let one = codomain_index(&block, 1, 1);
        let zero = codomain_index(&block, 0, 0);
        assert_eq!(endo_monoid(&block, &bcat, (one, one)).unwrap().order(), 2);
        assert_eq!(endo_monoid(&block, &bcat, (zero, zero)).unwrap().order(), 1);
    }

    #[test]
    fn unit_embedding_and_bound() {
        let m = upper_triangular_gf2();
        let hom = projection(&m);
        let ctx = EnumeratedContext::new(&hom);
        let all: Vec<usize> = (0..m.order()).collect();
        let rep = embed_via_unit(&ctx, &all).unwrap();
        assert_eq!(rep.distinct, 8);
        assert!(rep.injective());
        let fin = finiteness_via_kernel(&ctx, &Limits::default(), Some(8)).unwrap();
        assert!(fin.bound().unwrap() >= 8);
        assert_eq!(fin.consistent(), Some(true));

        let block = gf2_block_context();
        let mats = m.matrices().unwrap().to_vec();
        assert!(embed_via_unit(&block, &mats).unwrap().injective());
        let bfin = finiteness_via_kernel(&block, &Limits::default(), Some(8)).unwrap();
        assert_eq!(bfin.consistent(), Some(true));
    }

    #[test]
    fn trivial_codomain_counts_two_sided_classes() {
        let q = Field::rationals();
        let t = Mat::from_i64(&q, &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        let c = Mat::from_i64(&q, &[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        let s3 = closure(&[t, c], &Limits::default()).unwrap();
        let hom = MonoidHom::from_keys(&s3, |_| ()).unwrap();
        let ctx = EnumeratedContext::new(&hom);
        let fin = finiteness_via_kernel(&ctx, &Limits::default(), Some(6)).unwrap();
        assert_eq!(fin.arrow_count, 6);
        assert_eq!(fin.bound(), Some(6));
    }

    #[test]
    fn heisenberg_type_block_monoid_hits_limits() {
        let q = Field::rationals();
        let g = Mat::from_i64(&q, &[&[1, 1], &[0, 1]]);
        let ctx = BlockContext::new(&[g], 1, &Limits::default()).unwrap();
        let limits = Limits {
            max_elements: 200,
            ..Limits::default()
        };
        let cat = kernel_category(&ctx, &limits).unwrap();
        assert!(!cat.is_complete());
        let fin = finiteness_via_kernel(&ctx, &limits, None).unwrap();
        assert_eq!(fin.bound(), None);
    }

    #[test]
    fn mode_unavailable_for_non_triangular_generators() {
        let q = Field::rationals();
        let p = Mat::from_i64(&q, &[&[0, 1], &[1, 0]]);
        assert!(matches!(
            BlockContext::new(std::slice::from_ref(&p), 1, &Limits::default()),
            Err(Error::ModeUnavailable(_))
        ));
        assert!(matches!(
            BlockContext::new(&[p], 2, &Limits::default()),
            Err(Error::ModeUnavailable(_))
        ));
    }
}
