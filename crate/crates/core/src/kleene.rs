//! Images of hom-sets of the free category on a finite labeled graph.
//!
//! A functor from the free category `Γ*` is fixed by its edge labels. The
//! image of all paths from `v` to `w` is computed by eliminating vertices one
//! at a time: with `P_X(v, w)` the images of nonempty paths whose interior
//! vertices lie in `X`,
//!
//! ```text
//! P_X(v, w) = P_{X-x}(v, w) ∪ P_{X-x}(v, x) · P_{X-x}(x, x)* · P_{X-x}(x, w)
//! ```
//!
//! where `*` is submonoid closure at `x`. A breadth-first path enumeration is
//! provided as an independent oracle.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, LimitReport, Result};
use crate::field::Field;
use crate::mat::Mat;
use crate::semigroup::{FinMonoid, Limits};

/// The target category of the labeling functor.
pub trait PathCategory {
    type Value: Clone + Eq + Hash + Ord + Debug;

    fn identity(&self, vertex: usize) -> Self::Value;
    /// Diagrammatic composite: `f` then `g`.
    fn compose(&self, f: &Self::Value, g: &Self::Value) -> Self::Value;
    /// Whether `label` can sit on an edge `source -> target`.
    fn accepts(&self, source: usize, target: usize, label: &Self::Value) -> bool;
}

/// One-object category: every vertex maps to the single object of a monoid.
pub struct MonoidLabels<'a>(pub &'a FinMonoid);

impl PathCategory for MonoidLabels<'_> {
    type Value = usize;

    fn identity(&self, _: usize) -> usize {
        self.0.identity()
    }

    fn compose(&self, f: &usize, g: &usize) -> usize {
        self.0.mul(*f, *g)
    }

    fn accepts(&self, _: usize, _: usize, label: &usize) -> bool {
        *label < self.0.order()
    }
}

/// Matrices with vertex `v` sent to dimension `dims[v]`. An edge `s -> t`
/// carries a `dims[s] x dims[t]` matrix so that paths multiply left to right.
pub struct MatrixLabels {
    pub field: Field,
    pub dims: Vec<usize>,
}

impl PathCategory for MatrixLabels {
    type Value = Mat;

    fn identity(&self, vertex: usize) -> Mat {
        Mat::identity(&self.field, self.dims[vertex])
    }

    fn compose(&self, f: &Mat, g: &Mat) -> Mat {
        f * g
    }

    fn accepts(&self, source: usize, target: usize, label: &Mat) -> bool {
        label.field() == &self.field
            && label.rows() == self.dims[source]
            && label.cols() == self.dims[target]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge<V> {
    pub source: usize,
    pub target: usize,
    pub label: V,
}

#[derive(Clone, Debug)]
pub struct LabeledGraph<V> {
    vertices: usize,
    edges: Vec<Edge<V>>,
}

impl<V: Clone> LabeledGraph<V> {
    pub fn new<C: PathCategory<Value = V>>(cat: &C, vertices: usize, edges: Vec<Edge<V>>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.source >= vertices || e.target >= vertices {
                return Err(Error::InvalidGraph(format!("edge {i} leaves the vertex range")));
            }
            if !cat.accepts(e.source, e.target, &e.label) {
                return Err(Error::InvalidGraph(format!("edge {i} has an ill-typed label")));
            }
        }
        Ok(LabeledGraph { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge<V>] {
        &self.edges
    }
}

/// Image sets indexed by `(source, target)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathImageTable<V> {
    pub vertices: usize,
    pub sets: Vec<BTreeSet<V>>,
    /// Elimination order; empty for the path-enumeration oracle.
    pub order: Vec<usize>,
}

impl<V: Ord> PathImageTable<V> {
    pub fn get(&self, v: usize, w: usize) -> &BTreeSet<V> {
        &self.sets[v * self.vertices + w]
    }

    /// Whether both tables hold the same sets, regardless of elimination order.
    pub fn same_sets(&self, other: &PathImageTable<V>) -> bool {
        self.vertices == other.vertices && self.sets == other.sets
    }

    pub fn sizes(&self) -> Vec<Vec<usize>> {
        (0..self.vertices)
            .map(|v| (0..self.vertices).map(|w| self.get(v, w).len()).collect())
            .collect()
    }
}

/// One vertex elimination, for inspecting intermediate states.
pub struct Stage<'a, V> {
    pub eliminated: usize,
    pub star: &'a BTreeSet<V>,
    pub before: &'a [BTreeSet<V>],
    pub after: &'a [BTreeSet<V>],
}

struct Budget<'l> {
    limits: &'l Limits,
    steps: u64,
}

impl Budget<'_> {
    fn tick(&mut self, what: &'static str, size: usize) -> Result<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps || size > self.limits.max_elements {
            return Err(Error::LimitExceeded(LimitReport {
                what,
                elements: size,
                steps: self.steps,
                frontier: 0,
            }));
        }
        Ok(())
    }
}

/// Smallest product-closed set containing `seed` and the identity at `vertex`.
pub fn submonoid_closure<C: PathCategory>(
    cat: &C,
    vertex: usize,
    seed: &BTreeSet<C::Value>,
    limits: &Limits,
) -> Result<BTreeSet<C::Value>> {
    let mut budget = Budget { limits, steps: 0 };
    closure_with(cat, vertex, seed, &mut budget)
}

fn closure_with<C: PathCategory>(
    cat: &C,
    vertex: usize,
    seed: &BTreeSet<C::Value>,
    budget: &mut Budget<'_>,
) -> Result<BTreeSet<C::Value>> {
    let mut out = BTreeSet::new();
    out.insert(cat.identity(vertex));
    let gens: Vec<&C::Value> = seed.iter().collect();
    let mut frontier: Vec<C::Value> = vec![cat.identity(vertex)];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            budget.tick("submonoid closure", out.len())?;
            let y = cat.compose(&x, g);
            if out.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    Ok(out)
}

/// Image hom-sets by vertex elimination in ascending vertex order.
pub fn image_homsets<C: PathCategory>(
    cat: &C,
    graph: &LabeledGraph<C::Value>,
    limits: &Limits,
) -> Result<PathImageTable<C::Value>> {
    let order: Vec<usize> = (0..graph.vertices()).collect();
    image_homsets_ordered(cat, graph, &order, limits, |_| {})
}

/// Image hom-sets by vertex elimination in the given order, reporting each stage.
pub fn image_homsets_ordered<C: PathCategory>(
    cat: &C,
    graph: &LabeledGraph<C::Value>,
    order: &[usize],
    limits: &Limits,
    mut on_stage: impl FnMut(&Stage<'_, C::Value>),
) -> Result<PathImageTable<C::Value>> {
    let k = graph.vertices();
    let mut seen = vec![false; k];
    if order.len() != k || order.iter().any(|&v| v >= k || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::InvalidGraph("elimination order is not a permutation of the vertices".into()));
    }
    let mut budget = Budget { limits, steps: 0 };
    // No interior vertices allowed: just the edges.
    let mut sets: Vec<BTreeSet<C::Value>> = vec![BTreeSet::new(); k * k];
    for e in graph.edges() {
        sets[e.source * k + e.target].insert(e.label.clone());
    }
    for &x in order {
        let star = closure_with(cat, x, &sets[x * k + x], &mut budget)?;
        let mut next = sets.clone();
        for v in 0..k {
            let into_x = &sets[v * k + x];
            if into_x.is_empty() {
                continue;
            }
            let mut prefix = BTreeSet::new();
            for a in into_x {
                for s in &star {
                    budget.tick("vertex elimination", prefix.len())?;
                    prefix.insert(cat.compose(a, s));
                }
            }
            for w in 0..k {
                let out_of_x = &sets[x * k + w];
                for a in &prefix {
                    for b in out_of_x {
                        budget.tick("vertex elimination", next[v * k + w].len())?;
                        next[v * k + w].insert(cat.compose(a, b));
                    }
                }
            }
        }
        on_stage(&Stage {
            eliminated: x,
            star: &star,
            before: &sets,
            after: &next,
        });
        sets = next;
    }
    for v in 0..k {
        sets[v * k + v].insert(cat.identity(v));
    }
    Ok(PathImageTable {
        vertices: k,
        sets,
        order: order.to_vec(),
    })
}

/// Oracle: extend paths edge by edge, keeping only new images, until a full
/// sweep adds nothing.
pub fn image_homsets_bruteforce<C: PathCategory>(
    cat: &C,
    graph: &LabeledGraph<C::Value>,
    limits: &Limits,
) -> Result<PathImageTable<C::Value>> {
    let k = graph.vertices();
    let mut budget = Budget { limits, steps: 0 };
    let mut sets: Vec<BTreeSet<C::Value>> = vec![BTreeSet::new(); k * k];
    let mut out_edges: Vec<Vec<&Edge<C::Value>>> = vec![Vec::new(); k];
    let mut frontier = Vec::new();
    let mut total = 0usize;
    for e in graph.edges() {
        out_edges[e.source].push(e);
        if sets[e.source * k + e.target].insert(e.label.clone()) {
            total += 1;
            frontier.push((e.source, e.target, e.label.clone()));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (s, t, val) in frontier {
            for e in &out_edges[t] {
                budget.tick("path enumeration", total)?;
                let ext = cat.compose(&val, &e.label);
                if sets[s * k + e.target].insert(ext.clone()) {
                    total += 1;
                    next.push((s, e.target, ext));
                }
            }
        }
        frontier = next;
    }
    for v in 0..k {
        sets[v * k + v].insert(cat.identity(v));
    }
    Ok(PathImageTable {
        vertices: k,
        sets,
        order: Vec::new(),
    })
}
