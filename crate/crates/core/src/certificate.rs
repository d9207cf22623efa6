//! Finiteness certificates: a versioned JSON document and an independent
//! re-checker.
//!
//! The checker recomputes everything it can from the generators and never
//! trusts a stored value it can derive: conjugation by `Q`, zeros below the
//! diagonal blocks, Gram matrices from basis words, `C·D = I`, trace sets,
//! reconstructions of every block element, bounds, orders and the kernel
//! arrow counts.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::field::{Field, FieldDescriptor, ScalarText};
use crate::kernel::{finiteness_via_kernel, BlockContext};
use crate::mat::{Mat, PowerPeriod};
use crate::matsemi::{
    admissible_traces, entries_in_prime_field, irreducible_bound, is_block_upper, is_periodic,
    lift_matrix, reconstruct_coeffs, spanning_check, system, trace_set, word_label, AdmissibleRange,
    BlockPath, BurnsideBasisData, FinitenessReport, TraceSet, Verdict, KERNEL_ARROW_BUDGET,
};
use crate::semigroup::{closure_enumeration, Enumeration, Limits};

pub const CERTIFICATE_VERSION: u32 = 1;

pub type MatText = Vec<Vec<ScalarText>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub version: u32,
    pub field: FieldDescriptor,
    pub generators: Vec<MatText>,
    pub verdict: VerdictDoc,
    /// Per generator, `(index, period)` of its powers when found.
    pub power_periods: Vec<Option<PowerPeriod>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<FlagDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictDoc {
    Finite {
        order: usize,
    },
    NonPeriodicWitness {
        element: MatText,
        word: Vec<usize>,
        label: String,
    },
    Inconclusive {
        what: String,
        elements: usize,
        steps: u64,
        frontier: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagDoc {
    pub q: MatText,
    pub block_sizes: Vec<usize>,
    pub conjugated: Vec<MatText>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub offset: usize,
    pub size: usize,
    pub algebra_dim: usize,
    pub order: Option<usize>,
    pub path: PathDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathDoc {
    Spanning {
        basis_words: Vec<Vec<usize>>,
        gram: MatText,
        dual: MatText,
        traces: Vec<ScalarText>,
        admissible: AdmissibleRange,
        root_orders: Vec<u64>,
        /// `|T|^{d²}` in decimal.
        bound: String,
        order: usize,
    },
    Lifted {
        field: FieldDescriptor,
        q: MatText,
        block_sizes: Vec<usize>,
        conjugated: Vec<MatText>,
        parts: Vec<PathDoc>,
    },
    Unavailable {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub split: usize,
    pub objects: usize,
    pub arrow_count: usize,
    pub unit_arrows: usize,
    pub complete: bool,
}

fn text_all(ms: &[Mat]) -> Vec<MatText> {
    ms.iter().map(Mat::to_text).collect()
}

fn path_doc(path: &BlockPath) -> PathDoc {
    match path {
        BlockPath::Spanning(b) => {
            let f = &b.basis.field;
            let TraceSet::Enumerated(values) = &b.traces else {
                unreachable!("block traces are enumerated")
            };
            let TraceSet::Admissible { range, root_orders } = &b.admissible else {
                unreachable!("admissible traces are a priori")
            };
            PathDoc::Spanning {
                basis_words: b.basis.words.clone(),
                gram: b.basis.gram.to_text(),
                dual: b.basis.dual.to_text(),
                traces: values.iter().map(|t| f.format(t)).collect(),
                admissible: *range,
                root_orders: root_orders.clone(),
                bound: b.bound.to_string(),
                order: b.order,
            }
        }
        BlockPath::Lifted { field, flag, parts } => PathDoc::Lifted {
            field: field.descriptor(),
            q: flag.q.to_text(),
            block_sizes: flag.block_sizes.clone(),
            conjugated: text_all(&flag.conjugated),
            parts: parts.iter().map(path_doc).collect(),
        },
        BlockPath::Unavailable { reason } => PathDoc::Unavailable { reason: reason.clone() },
    }
}

impl Certificate {
    pub fn from_report(r: &FinitenessReport) -> Certificate {
        let verdict = match &r.verdict {
            Verdict::Finite { order } => VerdictDoc::Finite { order: *order },
            Verdict::NonPeriodicWitness { element, word } => VerdictDoc::NonPeriodicWitness {
                element: element.to_text(),
                word: word.clone(),
                label: word_label(word),
            },
            Verdict::Inconclusive { limit } => VerdictDoc::Inconclusive {
                what: limit.what.to_string(),
                elements: limit.elements,
                steps: limit.steps,
                frontier: limit.frontier,
            },
        };
        Certificate {
            version: CERTIFICATE_VERSION,
            field: r.field.descriptor(),
            generators: text_all(&r.generators),
            verdict,
            power_periods: r.periodicity.iter().map(|p| p.power_period).collect(),
            flag: r.flag.as_ref().map(|f| FlagDoc {
                q: f.q.to_text(),
                block_sizes: f.block_sizes.clone(),
                conjugated: text_all(&f.conjugated),
            }),
            blocks: r
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    offset: b.offset,
                    size: b.size,
                    algebra_dim: b.algebra_dim,
                    order: b.order,
                    path: path_doc(&b.path),
                })
                .collect(),
            kernel: r.kernel.as_ref().map(|k| KernelDoc {
                split: r.flag.as_ref().map_or(0, |f| f.block_sizes[0]),
                objects: k.objects,
                arrow_count: k.arrow_count,
                unit_arrows: k.unit_arrows,
                complete: k.complete,
            }),
        }
    }
}

/// Outcome of [`verify`]. Valid iff no check failed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> bool {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
        ok
    }

    fn fail(&mut self, what: String) {
        self.check(false, || what);
    }

    fn parse(&mut self, field: &Field, text: &MatText, what: &str) -> Option<Mat> {
        match Mat::parse(field, text) {
            Ok(m) => Some(m),
            Err(e) => {
                self.fail(format!("{what}: {e}"));
                None
            }
        }
    }

    fn parse_all(&mut self, field: &Field, texts: &[MatText], what: &str) -> Option<Vec<Mat>> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| self.parse(field, t, &format!("{what}[{i}]")))
            .collect()
    }

    /// The closure of `gens` if it has exactly `order` elements. Stops one
    /// element past the claim.
    fn closure_of_order(&mut self, gens: &[Mat], limits: &Limits, order: usize, what: &str) -> Option<Enumeration<Mat>> {
        let capped = Limits {
            max_elements: limits.max_elements.min(order.saturating_add(1)),
            ..*limits
        };
        match closure_enumeration(gens, &capped) {
            Ok(en) if en.complete && en.elements.len() == order => Some(en),
            Ok(en) if en.complete || en.elements.len() > order => {
                let found = en.elements.len();
                let at_least = if en.complete { "" } else { "at least " };
                self.fail(format!("{what}: closure has {at_least}{found} elements, not {order}"));
                None
            }
            Ok(en) => {
                self.fail(format!("{what}: closure stopped at {}", en.limit_report("closure")));
                None
            }
            Err(e) => {
                self.fail(format!("{what}: {}", crate::Error::from(e)));
                None
            }
        }
    }
}

fn evaluate(gens: &[Mat], word: &[usize]) -> Option<Mat> {
    let first = gens.first()?;
    word.iter().try_fold(Mat::identity(first.field(), first.rows()), |acc, &i| {
        gens.get(i).map(|g| &acc * g)
    })
}

/// Check conjugation of `gens` by `q` and return the diagonal block systems.
fn check_flag(
    v: &mut Verification,
    field: &Field,
    gens: &[Mat],
    q: &MatText,
    sizes: &[usize],
    conjugated: &[MatText],
    what: &str,
) -> Option<(Vec<Mat>, Vec<Vec<Mat>>)> {
    let n = gens[0].rows();
    let q = v.parse(field, q, &format!("{what}.q"))?;
    let conj = v.parse_all(field, conjugated, &format!("{what}.conjugated"))?;
    if !v.check(sizes.iter().sum::<usize>() == n && !sizes.contains(&0), || {
        format!("{what}: block sizes {sizes:?} do not partition {n}")
    }) {
        return None;
    }
    if !v.check(q.rows() == n && q.cols() == n, || format!("{what}: Q has the wrong shape")) {
        return None;
    }
    let Ok(qi) = q.inverse() else {
        v.fail(format!("{what}: Q is singular"));
        return None;
    };
    if !v.check(conj.len() == gens.len(), || format!("{what}: conjugated generator count")) {
        return None;
    }
    let mut ok = true;
    for (i, (g, c)) in gens.iter().zip(&conj).enumerate() {
        ok &= v.check(&(&qi * g) * &q == *c, || format!("{what}: conjugated[{i}] is not Q⁻¹ g Q"));
        ok &= v.check(is_block_upper(c, sizes), || {
            format!("{what}: conjugated[{i}] has nonzero entries below the blocks")
        });
    }
    if !ok {
        return None;
    }
    let mut off = 0;
    let blocks = sizes
        .iter()
        .map(|&d| {
            let b = conj.iter().map(|c| c.submatrix(off, off, d, d)).collect();
            off += d;
            b
        })
        .collect();
    Some((conj, blocks))
}

fn check_path(v: &mut Verification, field: &Field, gens: &[Mat], path: &PathDoc, limits: &Limits, what: &str) {
    let d = gens[0].rows();
    match path {
        PathDoc::Spanning {
            basis_words,
            gram,
            dual,
            traces,
            admissible,
            root_orders,
            bound,
            order,
        } => {
            if !v.check(basis_words.len() == d * d, || format!("{what}: expected {} basis words", d * d)) {
                return;
            }
            let Some(elements) = basis_words.iter().map(|w| evaluate(gens, w)).collect::<Option<Vec<_>>>() else {
                v.fail(format!("{what}: basis word refers to a missing generator"));
                return;
            };
            let Some(gram_m) = v.parse(field, gram, &format!("{what}.gram")) else { return };
            let Some(dual_m) = v.parse(field, dual, &format!("{what}.dual")) else { return };
            let recomputed = match crate::matsemi::gram_matrix(field, &elements) {
                Ok(g) => g,
                Err(e) => return v.fail(format!("{what}: {e}")),
            };
            v.check(recomputed == gram_m, || format!("{what}: Gram matrix does not match tr(s_i s_j)"));
            let square = dual_m.rows() == d * d && dual_m.cols() == d * d;
            if !v.check(square && (&dual_m * &recomputed).is_identity(), || format!("{what}: C·D is not the identity")) {
                return;
            }
            let Some(en) = v.closure_of_order(gens, limits, *order, what) else { return };
            let data = BurnsideBasisData {
                field: field.clone(),
                n: d,
                elements,
                words: basis_words.clone(),
                gram: recomputed,
                dual: dual_m,
            };
            let bad = en.elements.iter().filter(|s| reconstruct_coeffs(s, &data).is_err()).count();
            v.check(bad == 0, || format!("{what}: {bad} elements are not recovered from their traces"));
            let Ok(TraceSet::Enumerated(t)) = trace_set(&en.elements) else { unreachable!() };
            let claimed: Result<BTreeSet<_>, _> = traces.iter().map(|x| field.parse(x)).collect();
            v.check(claimed.as_ref().ok() == Some(&t), || format!("{what}: trace set does not match"));
            let adm = admissible_traces(d, field, entries_in_prime_field(gens));
            let expected = TraceSet::Admissible {
                range: *admissible,
                root_orders: root_orders.clone(),
            };
            v.check(adm == expected, || format!("{what}: admissible traces do not match"));
            v.check(t.iter().all(|x| adm.contains(field, x)), || format!("{what}: inadmissible trace"));
            let b = irreducible_bound(d, &TraceSet::Enumerated(t));
            v.check(b.to_string() == *bound, || format!("{what}: bound is {b}, not {bound}"));
            v.check(BigUint::from(en.elements.len()) <= b, || format!("{what}: order exceeds |T|^(d^2)"));
        }
        PathDoc::Lifted {
            field: desc,
            q,
            block_sizes,
            conjugated,
            parts,
        } => {
            let ext = match Field::new(desc) {
                Ok(f) if f.characteristic() == field.characteristic() && field.degree() == 1 => f,
                _ => return v.fail(format!("{what}: lift field is not an extension of the block field")),
            };
            let lifted: Vec<Mat> = gens.iter().map(|g| lift_matrix(g, &ext)).collect();
            let Some((_, blocks)) = check_flag(v, &ext, &lifted, q, block_sizes, conjugated, what) else {
                return;
            };
            if !v.check(parts.len() == blocks.len(), || format!("{what}: part count")) {
                return;
            }
            for (i, (bg, part)) in blocks.iter().zip(parts).enumerate() {
                if matches!(part, PathDoc::Lifted { .. }) {
                    v.fail(format!("{what}.parts[{i}]: nested lift"));
                    continue;
                }
                check_path(v, &ext, bg, part, limits, &format!("{what}.parts[{i}]"));
            }
        }
        PathDoc::Unavailable { .. } => {
            v.check(!spanning_check(field, d, gens).spans, || {
                format!("{what}: block spans the full algebra but carries no trace data")
            });
        }
    }
}

/// Re-check every assertion of a certificate.
pub fn verify(cert: &Certificate, limits: &Limits) -> Verification {
    let mut v = Verification::default();
    if !v.check(cert.version == CERTIFICATE_VERSION, || format!("unsupported version {}", cert.version)) {
        return v;
    }
    let field = match Field::new(&cert.field) {
        Ok(f) => f,
        Err(e) => {
            v.fail(format!("field: {e}"));
            return v;
        }
    };
    let Some(gens) = v.parse_all(&field, &cert.generators, "generators") else { return v };
    if let Err(e) = system(&gens) {
        v.fail(format!("generators: {e}"));
        return v;
    }
    if v.check(cert.power_periods.len() <= gens.len(), || "too many power periods".into()) {
        for (i, pp) in cert.power_periods.iter().enumerate() {
            if let Some(pp) = pp {
                // The claim is the least pair, so recomputing up to it decides it.
                let claimed = pp.index.saturating_add(pp.period);
                let ok = claimed <= limits.power_cap.saturating_add(1)
                    && gens[i].power_period(claimed.saturating_sub(1)).ok() == Some(*pp);
                v.check(ok, || format!("generator {i}: powers do not repeat as claimed"));
            }
        }
    }

    match &cert.verdict {
        VerdictDoc::NonPeriodicWitness { element, word, label } => {
            let Some(e) = v.parse(&field, element, "witness") else { return v };
            v.check(evaluate(&gens, word).as_ref() == Some(&e), || "witness word does not evaluate to the element".into());
            v.check(*label == word_label(word), || "witness label does not match its word".into());
            v.check(field.is_rationals() && !is_periodic(&e), || "witness element is periodic".into());
        }
        VerdictDoc::Inconclusive { .. } => {}
        VerdictDoc::Finite { order } => {
            v.closure_of_order(&gens, limits, *order, "closure");
            v.check(cert.flag.is_some(), || "finite verdict without a flag decomposition".into());
        }
    }

    let Some(flag) = &cert.flag else { return v };
    let Some((conj, blocks)) = check_flag(&mut v, &field, &gens, &flag.q, &flag.block_sizes, &flag.conjugated, "flag")
    else {
        return v;
    };
    let VerdictDoc::Finite { order } = cert.verdict else { return v };
    v.closure_of_order(&conj, limits, order, "conjugated closure");

    if !v.check(cert.blocks.len() == blocks.len(), || "block analysis count".into()) {
        return v;
    }
    let offsets = crate::matsemi::block_offsets(&flag.block_sizes);
    for (b, (doc, bg)) in cert.blocks.iter().zip(&blocks).enumerate() {
        let what = format!("blocks[{b}]");
        if !v.check(doc.offset == offsets[b] && doc.size == flag.block_sizes[b], || format!("{what}: position")) {
            continue;
        }
        let dim = spanning_check(&field, doc.size, bg).dim;
        v.check(dim == doc.algebra_dim, || format!("{what}: algebra dimension is {dim}"));
        if let Some(o) = doc.order {
            v.closure_of_order(bg, limits, o, &what);
        }
        check_path(&mut v, &field, bg, &doc.path, limits, &what);
    }

    if let Some(k) = &cert.kernel {
        if !v.check(flag.block_sizes.len() >= 2 && k.split == flag.block_sizes[0], || "kernel split".into()) {
            return v;
        }
        let budget = Limits {
            max_elements: limits.max_elements.min(KERNEL_ARROW_BUDGET),
            ..*limits
        };
        match BlockContext::new(&conj, k.split, &budget).and_then(|ctx| finiteness_via_kernel(&ctx, &budget, Some(order))) {
            Ok(r) => {
                let same = (r.objects, r.arrow_count, r.unit_arrows, r.complete)
                    == (k.objects, k.arrow_count, k.unit_arrows, k.complete);
                v.check(same, || "kernel category counts do not match".into());
                v.check(!k.complete || order <= k.unit_arrows, || "order exceeds the kernel bound".into());
            }
            Err(e) => v.fail(format!("kernel: {e}")),
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matsemi::mcnaughton_zalcstein;

    fn s3_cert() -> Certificate {
        let q = Field::rationals();
        let a = Mat::from_i64(&q, &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        let b = Mat::from_i64(&q, &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]);
        Certificate::from_report(&mcnaughton_zalcstein(&[a, b], &Limits::default()).unwrap())
    }

    #[test]
    fn emitted_certificate_verifies() {
        let c = s3_cert();
        let v = verify(&c, &Limits::default());
        assert!(v.is_valid(), "{:?}", v.failures);
        assert!(v.checks > 10);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Certificate>(&json).unwrap(), c);
    }

    #[test]
    fn tampered_gram_entry_is_rejected() {
        let mut c = s3_cert();
        let PathDoc::Spanning { gram, .. } = &mut c.blocks[1].path else { panic!() };
        gram[0][0] = ScalarText::Text("5".into());
        assert!(!verify(&c, &Limits::default()).is_valid());
    }

    #[test]
    fn tampered_order_is_rejected() {
        let mut c = s3_cert();
        c.verdict = VerdictDoc::Finite { order: 7 };
        assert!(!verify(&c, &Limits::default()).is_valid());
    }
}
