//! Finite monoids by generator closure, homomorphisms between them,
//! stabilizer submonoids and trace quotients.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, LimitReport, Result};
use crate::field::{Field, FieldDescriptor, ScalarText};
use crate::mat::{Mat, DEFAULT_POWER_CAP};
use crate::numtheory::prime_factors;

/// Monoids up to this order keep a full Cayley table; larger ones multiply
/// by walking generator words through the right Cayley graph.
pub const FULL_TABLE_LIMIT: usize = 2048;
const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 200;
const ASSOCIATIVITY_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_elements: usize,
    pub max_steps: u64,
    pub power_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_elements: 200_000,
            max_steps: 10_000_000,
            power_cap: DEFAULT_POWER_CAP,
        }
    }
}

/// Raw output of a breadth-first closure.
#[derive(Clone, Debug)]
pub struct Enumeration<T> {
    pub elements: Vec<T>,
    /// `(left factor, generator position)` that first produced each element.
    pub parents: Vec<Option<(u32, u32)>>,
    /// Right Cayley graph, `elements.len() x generators`, `u32::MAX` where unexplored.
    pub right: Vec<u32>,
    pub generator_count: usize,
    /// Some nonempty product of generators equals the identity.
    pub identity_in_semigroup: bool,
    pub steps: u64,
    pub complete: bool,
    /// Elements not yet multiplied by every generator.
    pub frontier: usize,
}

impl<T> Enumeration<T> {
    pub fn limit_report(&self, what: &'static str) -> LimitReport {
        LimitReport {
            what,
            elements: self.elements.len(),
            steps: self.steps,
            frontier: self.frontier,
        }
    }

    /// Generator positions spelling element `i` along the closure tree.
    pub fn word(&self, i: usize) -> Vec<usize> {
        word_from_parents(&self.parents, i)
    }
}

fn word_from_parents(parents: &[Option<(u32, u32)>], mut i: usize) -> Vec<usize> {
    let mut w = Vec::new();
    while let Some((p, g)) = parents[i] {
        w.push(g as usize);
        i = p as usize;
    }
    w.reverse();
    w
}

/// Breadth-first closure of `generators` under right multiplication,
/// starting from `identity` as element 0.
///
/// Elements are numbered in discovery order: by word length, then by
/// (left factor index, generator position).
pub fn enumerate<T, F>(identity: T, generators: &[T], mut mul: F, limits: &Limits) -> Enumeration<T>
where
    T: Clone + Eq + Hash,
    F: FnMut(&T, &T) -> T,
{
    let g = generators.len();
    let mut index: HashMap<T, u32> = HashMap::new();
    index.insert(identity.clone(), 0);
    let mut en = Enumeration {
        elements: vec![identity],
        parents: vec![None],
        right: vec![u32::MAX; g],
        generator_count: g,
        identity_in_semigroup: false,
        steps: 0,
        complete: false,
        frontier: 1,
    };
    let mut next = 0usize;
    while next < en.elements.len() {
        for (j, gen) in generators.iter().enumerate() {
            if en.steps >= limits.max_steps {
                en.frontier = en.elements.len() - next;
                return en;
            }
            en.steps += 1;
            let prod = mul(&en.elements[next], gen);
            let idx = match index.get(&prod) {
                Some(&idx) => idx,
                None => {
                    if en.elements.len() >= limits.max_elements {
                        en.frontier = en.elements.len() - next;
                        return en;
                    }
                    let idx = en.elements.len() as u32;
                    index.insert(prod.clone(), idx);
                    en.elements.push(prod);
                    en.parents.push(Some((next as u32, j as u32)));
                    en.right.extend(std::iter::repeat_n(u32::MAX, g));
                    idx
                }
            };
            if idx == 0 {
                en.identity_in_semigroup = true;
            }
            en.right[next * g + j] = idx;
        }
        next += 1;
    }
    en.frontier = 0;
    en.complete = true;
    en
}

/// Elements of a monoid: abstract indices, or matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum Carrier {
    Abstract,
    Matrices(Vec<Mat>),
}

/// A finite monoid with numbered elements.
#[derive(Clone, Debug)]
pub struct FinMonoid {
    order: usize,
    identity: usize,
    generators: Vec<usize>,
    right: Vec<u32>,
    table: Option<Vec<u32>>,
    parents: Vec<Option<(u32, u32)>>,
    carrier: Carrier,
    identity_in_semigroup: bool,
}

impl FinMonoid {
    /// Finish a complete enumeration.
    pub fn from_enumeration<T>(en: Enumeration<T>, carrier: impl FnOnce(Vec<T>) -> Carrier) -> FinMonoid {
        assert!(en.complete, "enumeration is partial");
        let generators = (0..en.generator_count).map(|j| en.right[j] as usize).collect();
        let mut m = FinMonoid {
            order: en.elements.len(),
            identity: 0,
            generators,
            right: en.right,
            table: None,
            parents: en.parents,
            carrier: carrier(en.elements),
            identity_in_semigroup: en.identity_in_semigroup,
        };
        m.fill_table();
        m
    }

    /// Build from an explicit multiplication table, validating identity,
    /// associativity and generation.
    pub fn from_table(order: usize, identity: usize, generators: Vec<usize>, table: Vec<u32>) -> Result<FinMonoid> {
        let m = FinMonoid::from_table_unchecked(order, identity, generators, table)?;
        m.validate()?;
        Ok(m)
    }

    /// As [`FinMonoid::from_table`] but trusting associativity.
    pub(crate) fn from_table_unchecked(
        order: usize,
        identity: usize,
        generators: Vec<usize>,
        table: Vec<u32>,
    ) -> Result<FinMonoid> {
        if order == 0 {
            return Err(Error::InvalidMonoid("a monoid has at least one element".into()));
        }
        if table.len() != order * order {
            return Err(Error::InvalidMonoid(format!(
                "table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v as usize >= order) {
            return Err(Error::IndexOutOfRange {
                index: bad as usize,
                size: order,
            });
        }
        for &i in generators.iter().chain(std::iter::once(&identity)) {
            if i >= order {
                return Err(Error::IndexOutOfRange { index: i, size: order });
            }
        }
        let g = generators.len();
        let mut right = vec![0u32; order * g];
        for x in 0..order {
            for (j, &gen) in generators.iter().enumerate() {
                right[x * g + j] = table[x * order + gen];
            }
        }
        let mut parents = vec![None; order];
        let mut seen = vec![false; order];
        seen[identity] = true;
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for j in 0..g {
                let y = right[x * g + j] as usize;
                if !seen[y] {
                    seen[y] = true;
                    parents[y] = Some((x as u32, j as u32));
                    queue.push_back(y);
                }
            }
        }
        if let Some(unreached) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidMonoid(format!(
                "element {unreached} is not a product of generators"
            )));
        }
        let identity_in_semigroup = right.iter().any(|&v| v as usize == identity);
        Ok(FinMonoid {
            order,
            identity,
            generators,
            right,
            table: Some(table),
            parents,
            carrier: Carrier::Abstract,
            identity_in_semigroup,
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.order;
        let e = self.identity;
        for x in 0..n {
            if self.mul(e, x) != x || self.mul(x, e) != x {
                return Err(Error::InvalidMonoid(format!(
                    "element {e} is not a two-sided identity (fails at {x})"
                )));
            }
        }
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::InvalidMonoid(format!(
                    "multiplication is not associative at ({a}, {b}, {c})"
                )));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..ASSOCIATIVITY_SAMPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }

    fn fill_table(&mut self) {
        if self.order > FULL_TABLE_LIMIT {
            return;
        }
        let n = self.order;
        let g = self.generators.len();
        let mut table = vec![0u32; n * n];
        // Parents precede children in closure order, so one pass suffices.
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = match self.parents[b] {
                    None => a as u32,
                    Some((p, j)) => self.right[table[a * n + p as usize] as usize * g + j as usize],
                };
            }
        }
        self.table = Some(table);
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn matrices(&self) -> Option<&[Mat]> {
        match &self.carrier {
            Carrier::Matrices(ms) => Some(ms),
            Carrier::Abstract => None,
        }
    }

    pub fn identity_in_semigroup(&self) -> bool {
        self.identity_in_semigroup
    }

    /// Order of the subsemigroup generated (without an adjoined identity).
    pub fn semigroup_order(&self) -> usize {
        if self.identity_in_semigroup {
            self.order
        } else {
            self.order - 1
        }
    }

    pub fn has_full_table(&self) -> bool {
        self.table.is_some()
    }

    /// `x * generators[j]`.
    pub fn mul_generator(&self, x: usize, j: usize) -> usize {
        self.right[x * self.generators.len() + j] as usize
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        if let Some(t) = &self.table {
            return t[a * self.order + b] as usize;
        }
        self.word(b).into_iter().fold(a, |x, j| self.mul_generator(x, j))
    }

    /// Generator positions spelling element `i`.
    pub fn word(&self, i: usize) -> Vec<usize> {
        word_from_parents(&self.parents, i)
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.order).all(|a| (a..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Flattened multiplication table, `None` above [`FULL_TABLE_LIMIT`].
    pub fn table(&self) -> Option<&[u32]> {
        self.table.as_deref()
    }

    pub fn to_doc(&self) -> MonoidDoc {
        let carrier = self.matrices().and_then(|ms| {
            ms.first().map(|m0| CarrierDoc {
                field: m0.field().descriptor(),
                matrices: ms.iter().map(Mat::to_text).collect(),
            })
        });
        MonoidDoc {
            order: self.order,
            identity: self.identity,
            generators: self.generators.clone(),
            table: self.table.clone(),
            carrier,
        }
    }

    pub fn from_doc(doc: &MonoidDoc) -> Result<FinMonoid> {
        let table = doc
            .table
            .clone()
            .ok_or_else(|| Error::InvalidMonoid("interchange document lacks a table".into()))?;
        let mut m = FinMonoid::from_table(doc.order, doc.identity, doc.generators.clone(), table)?;
        if let Some(c) = &doc.carrier {
            let field = Field::new(&c.field)?;
            let mats = c
                .matrices
                .iter()
                .map(|rows| Mat::parse(&field, rows))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if mats.len() != m.order {
                return Err(Error::InvalidMonoid("carrier length differs from order".into()));
            }
            for a in 0..m.order {
                for b in 0..m.order {
                    if &mats[a] * &mats[b] != mats[m.mul(a, b)] {
                        return Err(Error::InvalidMonoid(format!(
                            "carrier product of {a} and {b} disagrees with the table"
                        )));
                    }
                }
            }
            m.carrier = Carrier::Matrices(mats);
        }
        Ok(m)
    }
}

/// Monoid interchange document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoidDoc {
    pub order: usize,
    pub identity: usize,
    pub generators: Vec<usize>,
    /// Row-major `order x order` table; omitted for large monoids on output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<CarrierDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierDoc {
    pub field: FieldDescriptor,
    pub matrices: Vec<Vec<Vec<ScalarText>>>,
}

/// Returned with [`Error::LimitExceeded`] context by [`closure`].
#[derive(Clone, Debug)]
pub struct PartialClosure {
    pub enumeration: Enumeration<Mat>,
}

/// Monoid generated by square matrices, identity adjoined as element 0.
pub fn closure(generators: &[Mat], limits: &Limits) -> std::result::Result<FinMonoid, ClosureError> {
    let en = closure_enumeration(generators, limits)?;
    if !en.complete {
        return Err(ClosureError::Limit(Box::new(PartialClosure { enumeration: en })));
    }
    Ok(FinMonoid::from_enumeration(en, Carrier::Matrices))
}

pub fn closure_enumeration(generators: &[Mat], limits: &Limits) -> std::result::Result<Enumeration<Mat>, ClosureError> {
    let first = generators
        .first()
        .ok_or_else(|| ClosureError::Invalid(Error::InvalidMonoid("no generators".into())))?;
    let n = first.rows();
    for g in generators {
        if !g.is_square() || g.rows() != n {
            return Err(ClosureError::Invalid(
                crate::AlgebraError::ShapeMismatch("generators must be square of equal size".into()).into(),
            ));
        }
        if g.field() != first.field() {
            return Err(ClosureError::Invalid(crate::AlgebraError::FieldMismatch.into()));
        }
    }
    Ok(enumerate(
        Mat::identity(first.field(), n),
        generators,
        |a, b| a * b,
        limits,
    ))
}

#[derive(Debug, Clone)]
pub enum ClosureError {
    Invalid(Error),
    Limit(Box<PartialClosure>),
}

impl From<ClosureError> for Error {
    fn from(e: ClosureError) -> Error {
        match e {
            ClosureError::Invalid(e) => e,
            ClosureError::Limit(p) => Error::LimitExceeded(p.enumeration.limit_report("closure")),
        }
    }
}

/// Submonoid of `m` generated by `gens`, renumbered by closure order; also
/// returns each new element's index in `m`.
pub fn submonoid(m: &FinMonoid, gens: &[usize], limits: &Limits) -> Result<(FinMonoid, Vec<usize>)> {
    for &g in gens {
        if g >= m.order() {
            return Err(Error::IndexOutOfRange { index: g, size: m.order() });
        }
    }
    let en = enumerate(m.identity(), gens, |&a, &b| m.mul(a, b), limits);
    if !en.complete {
        return Err(Error::LimitExceeded(en.limit_report("submonoid closure")));
    }
    let mut origin = Vec::new();
    let carrier_src = m.matrices().map(<[Mat]>::to_vec);
    let sub = FinMonoid::from_enumeration(en, |elems| {
        origin = elems.clone();
        match &carrier_src {
            Some(ms) => Carrier::Matrices(elems.iter().map(|&i| ms[i].clone()).collect()),
            None => Carrier::Abstract,
        }
    });
    Ok((sub, origin))
}

/// A homomorphism of finite monoids with its fibres.
#[derive(Clone, Debug)]
pub struct MonoidHom {
    domain: FinMonoid,
    codomain: FinMonoid,
    image: Vec<usize>,
    preimages: Vec<Vec<usize>>,
}

impl MonoidHom {
    pub fn domain(&self) -> &FinMonoid {
        &self.domain
    }

    pub fn codomain(&self) -> &FinMonoid {
        &self.codomain
    }

    pub fn image(&self, m: usize) -> usize {
        self.image[m]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn preimage(&self, n: usize) -> &[usize] {
        &self.preimages[n]
    }

    /// Identity endomorphism of `m`.
    pub fn identity_on(m: &FinMonoid) -> MonoidHom {
        let n = m.order();
        MonoidHom {
            domain: m.clone(),
            codomain: m.clone(),
            image: (0..n).collect(),
            preimages: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Homomorphism into an independently given codomain, checked on every pair.
    pub fn to_codomain(domain: &FinMonoid, codomain: &FinMonoid, image: Vec<usize>) -> Result<MonoidHom> {
        if image.len() != domain.order() {
            return Err(Error::InvalidMonoid("image map length differs from domain order".into()));
        }
        if let Some(&bad) = image.iter().find(|&&i| i >= codomain.order()) {
            return Err(Error::IndexOutOfRange { index: bad, size: codomain.order() });
        }
        if image[domain.identity()] != codomain.identity() {
            return Err(Error::NotAHomomorphism {
                x: domain.identity(),
                y: domain.identity(),
            });
        }
        for x in 0..domain.order() {
            for y in 0..domain.order() {
                if image[domain.mul(x, y)] != codomain.mul(image[x], image[y]) {
                    return Err(Error::NotAHomomorphism { x, y });
                }
            }
        }
        let mut preimages = vec![Vec::new(); codomain.order()];
        for (m, &n) in image.iter().enumerate() {
            preimages[n].push(m);
        }
        Ok(MonoidHom {
            domain: domain.clone(),
            codomain: codomain.clone(),
            image,
            preimages,
        })
    }

    /// Homomorphism whose fibres are the level sets of `key`; the codomain is
    /// enumerated as the image. Fails unless the fibres form a congruence.
    pub fn from_keys<K: Clone + Eq + Hash>(domain: &FinMonoid, key: impl Fn(usize) -> K) -> Result<MonoidHom> {
        Self::from_keys_with_carrier(domain, key, |_| None)
    }

    /// Homomorphism induced by a map on matrix carriers, such as a projection
    /// onto diagonal blocks. The codomain carries the image matrices.
    pub fn from_matrix_map(domain: &FinMonoid, f: impl Fn(&Mat) -> Mat) -> Result<MonoidHom> {
        let mats = domain
            .matrices()
            .ok_or_else(|| Error::InvalidMonoid("domain has no matrix carrier".into()))?;
        let images: Vec<Mat> = mats.iter().map(f).collect();
        Self::from_keys_with_carrier(domain, |i| images[i].clone(), |reps| {
            Some(Carrier::Matrices(reps.iter().map(|&r| images[r].clone()).collect()))
        })
    }

    fn from_keys_with_carrier<K: Clone + Eq + Hash>(
        domain: &FinMonoid,
        key: impl Fn(usize) -> K,
        carrier: impl FnOnce(&[usize]) -> Option<Carrier>,
    ) -> Result<MonoidHom> {
        let n = domain.order();
        let mut class_of_key: HashMap<K, usize> = HashMap::new();
        let mut image = vec![0usize; n];
        let mut reps = Vec::new();
        // Identity first so it becomes element 0 of the codomain.
        let mut visit: Vec<usize> = vec![domain.identity()];
        visit.extend((0..n).filter(|&i| i != domain.identity()));
        for &m in &visit {
            let k = key(m);
            let next = class_of_key.len();
            let c = *class_of_key.entry(k).or_insert_with(|| {
                reps.push(m);
                next
            });
            image[m] = c;
        }
        // The fibres must be a congruence: compatible with multiplication by
        // generators on both sides.
        for (j, &g) in domain.generators().iter().enumerate() {
            for x in 0..n {
                let r = reps[image[x]];
                if image[domain.mul_generator(x, j)] != image[domain.mul_generator(r, j)] {
                    return Err(Error::NotAHomomorphism { x, y: g });
                }
                if image[domain.mul(g, x)] != image[domain.mul(g, r)] {
                    return Err(Error::NotAHomomorphism { x: g, y: x });
                }
            }
        }
        let c = reps.len();
        let mut table = vec![0u32; c * c];
        for a in 0..c {
            for b in 0..c {
                table[a * c + b] = image[domain.mul(reps[a], reps[b])] as u32;
            }
        }
        let gens = domain.generators().iter().map(|&g| image[g]).collect();
        let mut codomain = FinMonoid::from_table_unchecked(c, 0, gens, table)?;
        if let Some(car) = carrier(&reps) {
            codomain.carrier = car;
        }
        let mut preimages = vec![Vec::new(); c];
        for (m, &k) in image.iter().enumerate() {
            preimages[k].push(m);
        }
        Ok(MonoidHom {
            domain: domain.clone(),
            codomain,
            image,
            preimages,
        })
    }
}

/// `{m : n1 φ(m) = n1, φ(m) n2 = n2}`.
pub fn stabilizer_pair(hom: &MonoidHom, n1: usize, n2: usize) -> Vec<usize> {
    let cod = hom.codomain();
    (0..hom.domain().order())
        .filter(|&m| {
            let v = hom.image(m);
            cod.mul(n1, v) == n1 && cod.mul(v, n2) == n2
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum TraceClass {
    Trivial,
    ElementaryAbelianP(u64),
    GeneralFinite,
}

/// Quotient of a stabilizer submonoid by the triple-product congruence.
#[derive(Clone, Debug)]
pub struct TraceMonoid {
    pub stabilizer: Vec<usize>,
    /// Partition of the stabilizer; class 0 contains the identity.
    pub classes: Vec<Vec<usize>>,
    pub class_of: HashMap<usize, usize>,
    /// `classes.len()` squared, row-major.
    pub table: Vec<u32>,
    pub classification: TraceClass,
}

impl TraceMonoid {
    pub fn order(&self) -> usize {
        self.classes.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b] as usize
    }

    pub fn as_monoid(&self) -> FinMonoid {
        let c = self.order();
        FinMonoid::from_table_unchecked(c, 0, (1..c).collect(), self.table.clone())
            .expect("trace quotient is a monoid")
    }
}

/// Products `m1 m m2` for all `m1` in the fibre over `n1` and `m2` in the fibre over `n2`.
pub(crate) fn triple_signature(hom: &MonoidHom, n1: usize, m: usize, n2: usize) -> Vec<u32> {
    let dom = hom.domain();
    let mut sig = Vec::with_capacity(hom.preimage(n1).len() * hom.preimage(n2).len());
    for &m1 in hom.preimage(n1) {
        let left = dom.mul(m1, m);
        for &m2 in hom.preimage(n2) {
            sig.push(dom.mul(left, m2) as u32);
        }
    }
    sig
}

pub fn trace_monoid(hom: &MonoidHom, n1: usize, n2: usize) -> Result<TraceMonoid> {
    let size = hom.codomain().order();
    for n in [n1, n2] {
        if n >= size {
            return Err(Error::IndexOutOfRange { index: n, size });
        }
        if hom.preimage(n).is_empty() {
            return Err(Error::EmptyPreimage(n));
        }
    }
    let dom = hom.domain();
    let stabilizer = stabilizer_pair(hom, n1, n2);
    let mut by_sig: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = HashMap::new();
    // Identity first so it heads class 0.
    let mut visit = vec![dom.identity()];
    visit.extend(stabilizer.iter().copied().filter(|&m| m != dom.identity()));
    for m in visit {
        let sig = triple_signature(hom, n1, m, n2);
        let next = classes.len();
        let c = *by_sig.entry(sig).or_insert_with(|| {
            classes.push(Vec::new());
            next
        });
        classes[c].push(m);
        class_of.insert(m, c);
    }
    let c = classes.len();
    let mut table = vec![0u32; c * c];
    for a in 0..c {
        for b in 0..c {
            let prod = dom.mul(classes[a][0], classes[b][0]);
            let cls = *class_of
                .get(&prod)
                .ok_or_else(|| Error::Soundness("stabilizer is not closed under products".into()))?;
            table[a * c + b] = cls as u32;
        }
    }
    let classification = classify_quotient(c, &table);
    Ok(TraceMonoid {
        stabilizer,
        classes,
        class_of,
        table,
        classification,
    })
}

fn classify_quotient(c: usize, table: &[u32]) -> TraceClass {
    if c == 1 {
        return TraceClass::Trivial;
    }
    let factors = prime_factors(c as u64);
    if factors.len() != 1 {
        return TraceClass::GeneralFinite;
    }
    let p = factors[0];
    let mul = |a: usize, b: usize| table[a * c + b] as usize;
    let commutative = (0..c).all(|a| (0..c).all(|b| mul(a, b) == mul(b, a)));
    let exponent_p = (0..c).all(|a| (1..p).fold(a, |acc, _| mul(acc, a)) == 0);
    if commutative && exponent_p {
        TraceClass::ElementaryAbelianP(p)
    } else {
        TraceClass::GeneralFinite
    }
}

/// An isomorphism `a -> b` as an index map, found by trying images of a
/// small generating set of `a`.
pub fn find_isomorphism(a: &FinMonoid, b: &FinMonoid) -> Option<Vec<usize>> {
    if a.order() != b.order() {
        return None;
    }
    let n = a.order();
    // Greedy generating set of `a`.
    let mut gens: Vec<usize> = Vec::new();
    let mut span = vec![false; n];
    span[a.identity()] = true;
    for x in 0..n {
        if span[x] {
            continue;
        }
        gens.push(x);
        let mut list: Vec<usize> = (0..n).filter(|&i| span[i]).collect();
        let mut k = 0;
        while k < list.len() {
            for &g in &gens {
                let y = a.mul(list[k], g);
                if !span[y] {
                    span[y] = true;
                    list.push(y);
                }
            }
            k += 1;
        }
    }
    // Each element of `a` as a word in `gens`.
    let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
    words[a.identity()] = Some(Vec::new());
    let mut queue = VecDeque::from([a.identity()]);
    while let Some(x) = queue.pop_front() {
        for (j, &g) in gens.iter().enumerate() {
            let y = a.mul(x, g);
            if words[y].is_none() {
                let mut w = words[x].clone().unwrap();
                w.push(j);
                words[y] = Some(w);
                queue.push_back(y);
            }
        }
    }
    let mut choice = vec![0usize; gens.len()];
    loop {
        let map: Vec<usize> = words
            .iter()
            .map(|w| {
                w.as_ref()
                    .unwrap()
                    .iter()
                    .fold(b.identity(), |acc, &j| b.mul(acc, choice[j]))
            })
            .collect();
        let mut hit = vec![false; n];
        let bijective = map.iter().all(|&y| !std::mem::replace(&mut hit[y], true));
        if bijective && (0..n).all(|x| (0..n).all(|y| map[a.mul(x, y)] == b.mul(map[x], map[y]))) {
            return Some(map);
        }
        // Next assignment of generator images.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return None;
            }
            choice[k] += 1;
            if choice[k] < n {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
