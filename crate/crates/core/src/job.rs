//! Job documents, the command runner shared by the CLI and the C ABI, and the
//! on-disk result cache.
//!
//! A job is one JSON document:
//!
//! ```json
//! {
//!   "field": {"kind": "rationals"},
//!   "n": 2,
//!   "generators": [[["1", "1"], ["0", "1"]]],
//!   "limits": {"max_elements": 1000}
//! }
//! ```
//!
//! Rational entries are strings (`"-3/4"`); prime-field entries are integers
//! in `[0, p)`; extension-field entries are integers (packed codes) or
//! coefficient lists, lowest degree first.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::certificate::{verify, Certificate, MatText, VerdictDoc};
use crate::error::Error;
use crate::field::{Field, FieldDescriptor};
use crate::kernel::{check_axioms, dump, kernel_category, BlockContext, EnumeratedContext, KernelContext};
use crate::kleene::{image_homsets_bruteforce, image_homsets_ordered, Edge, LabeledGraph, MatrixLabels, MonoidLabels, PathCategory};
use crate::mat::Mat;
use crate::matsemi::{mcnaughton_zalcstein, spanning_check, triangularize, word_label, Counters, Verdict};
use crate::semigroup::{closure_enumeration, Carrier, FinMonoid, Limits, MonoidDoc, MonoidHom, FULL_TABLE_LIMIT};

pub const TOOL: &str = "semifin";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_WITNESS: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_INVALID_CERTIFICATE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// Reports list individual elements or arrows only below these sizes.
const LIST_ELEMENTS: usize = 256;
const LIST_ARROWS: usize = 512;
const LIST_LABELS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobInput {
    pub field: FieldDescriptor,
    pub n: usize,
    #[serde(default)]
    pub generators: Vec<MatText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kleene: Option<KleeneOptions>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_elements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_powers: Option<u64>,
}

impl LimitOverrides {
    pub fn apply(&self, base: Limits) -> Limits {
        Limits {
            max_elements: self.max_elements.unwrap_or(base.max_elements),
            max_steps: self.max_steps.unwrap_or(base.max_steps),
            power_cap: self.cap_powers.unwrap_or(base.power_cap),
        }
    }
}

/// Graph for the `kleene` command. Labels are monoid elements when `monoid`
/// is given, matrices over the job field otherwise; an edge `s -> t` then
/// carries a `dims[s] x dims[t]` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KleeneOptions {
    pub vertices: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monoid: Option<MonoidDoc>,
    pub edges: Vec<KleeneEdge>,
    /// Elimination order; ascending when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KleeneEdge {
    pub source: usize,
    pub target: usize,
    pub label: EdgeLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeLabel {
    Element(usize),
    Matrix(MatText),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Closure,
    Triangularize,
    Kernelcat,
    Kleene,
    Verify,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Check,
        Command::Closure,
        Command::Triangularize,
        Command::Kernelcat,
        Command::Kleene,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Closure => "closure",
            Command::Triangularize => "triangularize",
            Command::Kernelcat => "kernelcat",
            Command::Kleene => "kleene",
            Command::Verify => "verify",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Finite,
    Witness,
    Inconclusive,
    Ok,
    CertificateValid,
    CertificateInvalid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub input_digest: String,
    pub limits: Limits,
    pub status: Status,
    pub exit_code: i32,
    pub payload: Value,
    pub counters: Counters,
    pub cache_hit: bool,
}

impl JobReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Malformed job input, located by line/column and document path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        if !self.path.is_empty() {
            write!(f, "{}: ", self.path)?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for InputError {}

impl InputError {
    pub fn at(path: impl Into<String>, message: impl ToString) -> InputError {
        InputError {
            path: path.into(),
            line: None,
            column: None,
            message: message.to_string(),
        }
    }

    fn from_json(path: String, e: &serde_json::Error) -> InputError {
        let mut message = e.to_string();
        if let Some(i) = message.rfind(" at line ") {
            message.truncate(i);
        }
        let located = e.line() > 0;
        InputError {
            path,
            line: located.then(|| e.line()),
            column: located.then(|| e.column()),
            message,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum JobError {
    #[error("invalid input: {0}")]
    Input(#[from] InputError),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Input(_) => EXIT_INPUT,
            JobError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn library_error(e: Error) -> JobError {
    match e {
        Error::Soundness(s) => JobError::Internal(s),
        e => JobError::Input(InputError::at("", e)),
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        InputError::from_json(path, e.inner())
    })?;
    de.end().map_err(|e| InputError::from_json(String::new(), &e))?;
    Ok(value)
}

pub fn parse_input(text: &str) -> Result<JobInput, InputError> {
    parse_json(text)
}

pub enum KleeneLabels {
    Monoid(FinMonoid, Vec<usize>),
    Matrices(Vec<usize>, Vec<Mat>),
}

/// A job with every matrix parsed, plus its canonical document.
pub struct Prepared {
    pub canonical: JobInput,
    pub field: Field,
    pub generators: Vec<Mat>,
    pub kleene: Option<KleeneLabels>,
}

fn parse_matrix(field: &Field, text: &MatText, rows: usize, cols: usize, path: &str) -> Result<Mat, InputError> {
    if text.len() != rows {
        return Err(InputError::at(path, format!("expected {rows} rows, found {}", text.len())));
    }
    let mut data = Vec::with_capacity(rows);
    for (j, row) in text.iter().enumerate() {
        if row.len() != cols {
            return Err(InputError::at(
                format!("{path}[{j}]"),
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(k, x)| field.parse(x).map_err(|e| InputError::at(format!("{path}[{j}][{k}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        data.push(parsed);
    }
    Ok(Mat::from_rows(field, data).expect("rectangular"))
}

pub fn prepare(input: &JobInput) -> Result<Prepared, InputError> {
    let field = Field::new(&input.field).map_err(|e| InputError::at("field", e))?;
    let n = input.n;
    if n == 0 {
        return Err(InputError::at("n", "must be at least 1"));
    }
    let generators = input
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| parse_matrix(&field, g, n, n, &format!("generators[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut canonical = JobInput {
        field: field.descriptor(),
        n,
        generators: generators.iter().map(Mat::to_text).collect(),
        limits: input.limits,
        kleene: None,
    };
    let mut kleene = None;
    if let Some(k) = &input.kleene {
        let mut ck = k.clone();
        for (e, edge) in k.edges.iter().enumerate() {
            if edge.source >= k.vertices || edge.target >= k.vertices {
                return Err(InputError::at(format!("kleene.edges[{e}]"), "endpoint outside the vertex range"));
            }
        }
        if let Some(order) = &k.order {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..k.vertices).collect::<Vec<_>>() {
                return Err(InputError::at("kleene.order", "not a permutation of the vertices"));
            }
        }
        let labels = if let Some(doc) = &k.monoid {
            let m = FinMonoid::from_doc(doc).map_err(|e| InputError::at("kleene.monoid", e))?;
            let mut elems = Vec::new();
            for (e, edge) in k.edges.iter().enumerate() {
                match edge.label {
                    EdgeLabel::Element(x) if x < m.order() => elems.push(x),
                    _ => {
                        return Err(InputError::at(
                            format!("kleene.edges[{e}].label"),
                            format!("expected an element index below {}", m.order()),
                        ))
                    }
                }
            }
            KleeneLabels::Monoid(m, elems)
        } else {
            let dims = k.dims.clone().unwrap_or_else(|| vec![n; k.vertices]);
            if dims.len() != k.vertices || dims.contains(&0) {
                return Err(InputError::at("kleene.dims", "one positive dimension per vertex"));
            }
            let mut mats = Vec::new();
            for (e, edge) in k.edges.iter().enumerate() {
                let path = format!("kleene.edges[{e}].label");
                let EdgeLabel::Matrix(t) = &edge.label else {
                    return Err(InputError::at(path, "expected a matrix label"));
                };
                mats.push(parse_matrix(&field, t, dims[edge.source], dims[edge.target], &path)?);
            }
            for (edge, m) in ck.edges.iter_mut().zip(&mats) {
                edge.label = EdgeLabel::Matrix(m.to_text());
            }
            ck.dims = Some(dims.clone());
            KleeneLabels::Matrices(dims, mats)
        };
        canonical.kleene = Some(ck);
        kleene = Some(labels);
    }
    Ok(Prepared {
        canonical,
        field,
        generators,
        kleene,
    })
}

/// Canonical compact JSON of an input document.
pub fn canonicalize(text: &str) -> Result<String, InputError> {
    let p = prepare(&parse_input(text)?)?;
    Ok(serde_json::to_string(&p.canonical).expect("input serializes"))
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Applied over the limits in the input document.
    pub overrides: LimitOverrides,
    pub cache: Option<PathBuf>,
}

pub struct Outcome {
    pub report: JobReport,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// Run one command on one input document.
pub fn run(command: Command, text: &str, opts: &RunOptions) -> Result<Outcome, JobError> {
    let (canonical, prepared, cert) = if command == Command::Verify {
        let value: Value = parse_json(text)?;
        let doc = match value.get("payload").and_then(|p| p.get("certificate")) {
            Some(c) => c.clone(),
            None => value,
        };
        let canonical = serde_json::to_string(&doc).expect("value serializes");
        (canonical, None, Some(serde_json::from_value::<Certificate>(doc)))
    } else {
        let p = prepare(&parse_input(text)?)?;
        (serde_json::to_string(&p.canonical).expect("input serializes"), Some(p), None)
    };
    let file_limits = prepared
        .as_ref()
        .and_then(|p| p.canonical.limits)
        .unwrap_or_default();
    let limits = opts.overrides.apply(file_limits.apply(Limits::default()));
    let limits_json = serde_json::to_string(&limits).expect("limits serialize");
    let input_digest = digest(&[canonical.as_bytes()]);
    let key = digest(&[TOOL.as_bytes(), VERSION.as_bytes(), command.name().as_bytes(), canonical.as_bytes(), limits_json.as_bytes()]);

    let mut warnings = Vec::new();
    if let Some(dir) = &opts.cache {
        if let Ok(bytes) = fs::read(cache_path(dir, &key)) {
            match serde_json::from_slice::<JobReport>(&bytes) {
                Ok(mut report) => {
                    report.cache_hit = true;
                    return Ok(Outcome { report, warnings });
                }
                Err(e) => warnings.push(format!("ignoring unreadable cache entry {key}: {e}")),
            }
        }
    }

    let (status, exit_code, payload, counters) = match (command, prepared, cert) {
        (Command::Verify, _, Some(cert)) => run_verify(cert, &limits),
        (_, Some(p), _) => match command {
            Command::Check => run_check(&p, &limits)?,
            Command::Closure => run_closure(&p, &limits)?,
            Command::Triangularize => run_triangularize(&p)?,
            Command::Kernelcat => run_kernelcat(&p, &limits)?,
            Command::Kleene => run_kleene(&p, &limits)?,
            Command::Verify => unreachable!(),
        },
        _ => unreachable!(),
    };
    let report = JobReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command,
        input_digest,
        limits,
        status,
        exit_code,
        payload,
        counters,
        cache_hit: false,
    };
    if let Some(dir) = &opts.cache {
        let written = fs::create_dir_all(dir).and_then(|_| fs::write(cache_path(dir, &key), report.to_json()));
        if let Err(e) = written {
            warnings.push(format!("could not write cache entry {key}: {e}"));
        }
    }
    Ok(Outcome { report, warnings })
}

type Ran = (Status, i32, Value, Counters);

fn need_generators(p: &Prepared) -> Result<(), JobError> {
    if p.generators.is_empty() {
        return Err(InputError::at("generators", "at least one generator is required").into());
    }
    Ok(())
}

fn run_check(p: &Prepared, limits: &Limits) -> Result<Ran, JobError> {
    need_generators(p)?;
    let r = mcnaughton_zalcstein(&p.generators, limits).map_err(library_error)?;
    let (status, code) = match r.verdict {
        Verdict::Finite { .. } => (Status::Finite, EXIT_OK),
        Verdict::NonPeriodicWitness { .. } => (Status::Witness, EXIT_WITNESS),
        Verdict::Inconclusive { .. } => (Status::Inconclusive, EXIT_INCONCLUSIVE),
    };
    let cert = Certificate::from_report(&r);
    let payload = json!({
        "verdict": cert.verdict,
        "kernel_note": r.kernel_note,
        "certificate": cert,
    });
    Ok((status, code, payload, r.counters))
}

fn run_closure(p: &Prepared, limits: &Limits) -> Result<Ran, JobError> {
    need_generators(p)?;
    let en = closure_enumeration(&p.generators, limits).map_err(|e| library_error(e.into()))?;
    let counters = Counters {
        elements: en.elements.len(),
        steps: en.steps,
        ..Counters::default()
    };
    if !en.complete {
        let limit = en.limit_report("closure");
        let payload = json!({
            "complete": false,
            "limit": {"what": limit.what, "elements": limit.elements, "steps": limit.steps, "frontier": limit.frontier},
        });
        return Ok((Status::Inconclusive, EXIT_INCONCLUSIVE, payload, counters));
    }
    let m = FinMonoid::from_enumeration(en, Carrier::Matrices);
    let mut payload = json!({
        "complete": true,
        "order": m.order(),
        "semigroup_order": m.semigroup_order(),
        "identity_in_semigroup": m.identity_in_semigroup(),
    });
    if m.order() <= FULL_TABLE_LIMIT {
        payload["commutative"] = json!(m.is_commutative());
    }
    if m.order() <= LIST_ELEMENTS {
        let ms = m.matrices().expect("matrix carrier");
        payload["elements"] = (0..m.order())
            .map(|i| json!({"word": word_label(&m.word(i)), "matrix": ms[i].to_text()}))
            .collect();
    }
    Ok((Status::Ok, EXIT_OK, payload, counters))
}

fn run_triangularize(p: &Prepared) -> Result<Ran, JobError> {
    need_generators(p)?;
    let flag = triangularize(&p.generators).map_err(library_error)?;
    let blocks: Vec<Value> = flag
        .offsets()
        .into_iter()
        .enumerate()
        .map(|(b, offset)| {
            let size = flag.block_sizes[b];
            let s = spanning_check(&p.field, size, &flag.block_generators(b));
            json!({"offset": offset, "size": size, "algebra_dim": s.dim, "spans": s.spans})
        })
        .collect();
    let payload = json!({
        "q": flag.q.to_text(),
        "block_sizes": flag.block_sizes,
        "conjugated": flag.conjugated.iter().map(Mat::to_text).collect::<Vec<_>>(),
        "blocks": blocks,
    });
    Ok((Status::Ok, EXIT_OK, payload, Counters::default()))
}

fn kernel_summary<C: KernelContext>(ctx: &C, limits: &Limits, mut payload: Value) -> Result<Ran, JobError> {
    let cat = kernel_category(ctx, limits).map_err(library_error)?;
    let e = ctx.codomain().identity();
    let unit_arrows = cat.arrows.iter().filter(|a| a.key.n1 == e && a.key.n2 == e).count();
    let counters = Counters {
        elements: ctx.codomain().order(),
        steps: cat.steps,
        arrows: cat.arrow_count(),
        ..Counters::default()
    };
    payload["objects"] = json!(cat.objects.len());
    payload["arrow_count"] = json!(cat.arrow_count());
    payload["unit_arrows"] = json!(unit_arrows);
    payload["codomain_order"] = json!(ctx.codomain().order());
    payload["complete"] = json!(cat.is_complete());
    if !cat.is_complete() {
        let limit = cat.limit.as_ref().map(ToString::to_string);
        payload["limit"] = json!(limit);
        return Ok((Status::Inconclusive, EXIT_INCONCLUSIVE, payload, counters));
    }
    let axioms = check_axioms(ctx, &cat, 0).map_err(library_error)?;
    payload["axioms"] = json!(axioms);
    if cat.arrow_count() <= LIST_ARROWS {
        payload["dump"] = json!(dump(ctx, &cat, 0));
    }
    Ok((Status::Ok, EXIT_OK, payload, counters))
}

fn run_kernelcat(p: &Prepared, limits: &Limits) -> Result<Ran, JobError> {
    need_generators(p)?;
    let flag = triangularize(&p.generators).map_err(library_error)?;
    if flag.block_sizes.len() >= 2 {
        let split = flag.block_sizes[0];
        let ctx = match BlockContext::new(&flag.conjugated, split, limits) {
            Ok(ctx) => ctx,
            Err(Error::LimitExceeded(r)) => {
                let payload = json!({"mode": "block", "split": split, "complete": false, "limit": r.to_string()});
                return Ok((Status::Inconclusive, EXIT_INCONCLUSIVE, payload, Counters::default()));
            }
            Err(e) => return Err(library_error(e)),
        };
        return kernel_summary(&ctx, limits, json!({"mode": "block", "split": split}));
    }
    // A single block: the kernel category of the map onto the trivial monoid.
    let en = closure_enumeration(&p.generators, limits).map_err(|e| library_error(e.into()))?;
    if !en.complete {
        let payload = json!({"mode": "enumerated", "complete": false, "limit": en.limit_report("closure").to_string()});
        return Ok((Status::Inconclusive, EXIT_INCONCLUSIVE, payload, Counters::default()));
    }
    let m = FinMonoid::from_enumeration(en, Carrier::Matrices);
    let hom = MonoidHom::from_keys(&m, |_| ()).map_err(library_error)?;
    kernel_summary(&EnumeratedContext::new(&hom), limits, json!({"mode": "enumerated"}))
}

fn kleene_payload<C: PathCategory>(
    cat: &C,
    vertices: usize,
    edges: Vec<Edge<C::Value>>,
    order: &[usize],
    limits: &Limits,
    render: impl Fn(&C::Value) -> Value,
) -> Result<Ran, JobError> {
    let graph = LabeledGraph::new(cat, vertices, edges).map_err(library_error)?;
    let elim = image_homsets_ordered(cat, &graph, order, limits, |_| {});
    let brute = image_homsets_bruteforce(cat, &graph, limits);
    let (table, oracle) = match (elim, brute) {
        (Ok(t), Ok(o)) => (t, o),
        (Err(Error::LimitExceeded(r)), _) | (_, Err(Error::LimitExceeded(r))) => {
            let payload = json!({"vertices": vertices, "complete": false, "limit": r.to_string()});
            return Ok((Status::Inconclusive, EXIT_INCONCLUSIVE, payload, Counters::default()));
        }
        (Err(e), _) | (_, Err(e)) => return Err(library_error(e)),
    };
    if !table.same_sets(&oracle) {
        return Err(JobError::Internal("vertex elimination disagrees with path enumeration".into()));
    }
    let total: usize = table.sets.iter().map(|s| s.len()).sum();
    let mut payload = json!({
        "vertices": vertices,
        "complete": true,
        "order": table.order,
        "sizes": table.sizes(),
        "oracle_agrees": true,
    });
    if total <= LIST_LABELS {
        payload["sets"] = (0..vertices)
            .map(|v| (0..vertices).map(|w| table.get(v, w).iter().map(&render).collect::<Value>()).collect::<Value>())
            .collect();
    }
    let counters = Counters {
        elements: total,
        ..Counters::default()
    };
    Ok((Status::Ok, EXIT_OK, payload, counters))
}

fn run_kleene(p: &Prepared, limits: &Limits) -> Result<Ran, JobError> {
    let (Some(labels), Some(k)) = (&p.kleene, &p.canonical.kleene) else {
        return Err(InputError::at("kleene", "the kleene command needs a graph").into());
    };
    let order: Vec<usize> = k.order.clone().unwrap_or_else(|| (0..k.vertices).collect());
    match labels {
        KleeneLabels::Monoid(m, elems) => {
            let edges = k
                .edges
                .iter()
                .zip(elems)
                .map(|(e, &label)| Edge { source: e.source, target: e.target, label })
                .collect();
            kleene_payload(&MonoidLabels(m), k.vertices, edges, &order, limits, |&x| json!(x))
        }
        KleeneLabels::Matrices(dims, mats) => {
            let cat = MatrixLabels {
                field: p.field.clone(),
                dims: dims.clone(),
            };
            let edges = k
                .edges
                .iter()
                .zip(mats)
                .map(|(e, m)| Edge { source: e.source, target: e.target, label: m.clone() })
                .collect();
            kleene_payload(&cat, k.vertices, edges, &order, limits, |m| json!(m.to_text()))
        }
    }
}

fn run_verify(cert: Result<Certificate, serde_json::Error>, limits: &Limits) -> Ran {
    let v = match cert {
        Ok(c) => verify(&c, limits),
        Err(e) => crate::certificate::Verification {
            checks: 1,
            failures: vec![format!("not a certificate: {e}")],
        },
    };
    let (status, code) = if v.is_valid() {
        (Status::CertificateValid, EXIT_OK)
    } else {
        (Status::CertificateInvalid, EXIT_INVALID_CERTIFICATE)
    };
    (status, code, json!(v), Counters::default())
}

/// Verdict of a `check` report, if it has one.
pub fn report_verdict(report: &JobReport) -> Option<VerdictDoc> {
    serde_json::from_value(report.payload.get("verdict")?.clone()).ok()
}
