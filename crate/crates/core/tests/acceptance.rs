//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use semifin::certificate::VerdictDoc;
use semifin::job::{self, Command, JobInput, LimitOverrides, RunOptions, EXIT_INVALID_CERTIFICATE, EXIT_OK};
use semifin::kernel::{
    arrow_compose, arrow_key, embed_via_unit, endo_monoid, kernel_category, diagonal_part, EnumeratedContext,
};
use semifin::kleene::{image_homsets, image_homsets_bruteforce, image_homsets_ordered, Edge, LabeledGraph, MonoidLabels};
use semifin::matsemi::{
    admissible_traces, block_trace_embedding, burnside_basis, irreducible_bound, is_block_upper, mcnaughton_zalcstein,
    reconstruct_coeffs, trace_set, triangularize, BlockPath, FlagDecomposition, TraceSet, Verdict,
};
use semifin::numtheory::{gcd, orders_with_totient_at_most};
use semifin::semigroup::{closure, enumerate, find_isomorphism, trace_monoid, Carrier, FinMonoid, Limits, MonoidHom};
use semifin::{Field, Mat};

struct Fixture {
    name: &'static str,
    gens: Vec<Mat>,
}

impl Fixture {
    fn field(&self) -> &Field {
        self.gens[0].field()
    }

    fn n(&self) -> usize {
        self.gens[0].rows()
    }

    fn job_text(&self) -> String {
        let input = JobInput {
            field: self.field().descriptor(),
            n: self.n(),
            generators: self.gens.iter().map(Mat::to_text).collect(),
            limits: None,
            kleene: None,
        };
        serde_json::to_string(&input).unwrap()
    }
}

fn fx(name: &'static str, field: &Field, gens: &[&[&[i64]]]) -> Fixture {
    Fixture {
        name,
        gens: gens.iter().map(|g| Mat::from_i64(field, g)).collect(),
    }
}

fn q() -> Field {
    Field::rationals()
}

fn gf(p: u64) -> Field {
    Field::prime(p).unwrap()
}

fn conjugate_by(t: &Mat, g: &Mat) -> Mat {
    &(&t.inverse().unwrap() * g) * t
}

/// Periodic fixtures with their monoid orders.
fn finite_fixtures() -> Vec<(Fixture, usize)> {
    let s3: &[&[&[i64]]] = &[
        &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]],
        &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]],
    ];
    let t = Mat::from_i64(&q(), &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
    let s3_skew = Fixture {
        name: "s3 conjugated over Q",
        gens: fx("", &q(), s3).gens.iter().map(|g| conjugate_by(&t, g)).collect(),
    };
    let gf4 = Field::extension(2, 2).unwrap();
    let w = gf4.from_coeffs(&[0, 1]).unwrap();
    let mut dw = Mat::identity(&gf4, 2);
    dw.set(0, 0, w);
    let gf4_fixture = Fixture {
        name: "monomial over GF(4)",
        gens: vec![dw, Mat::from_i64(&gf4, &[&[0, 1], &[1, 0]])],
    };
    vec![
        (fx("s3 permutations over Q", &q(), s3), 6),
        (fx("s4 permutations over Q", &q(), &[
            &[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]],
            &[&[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0]],
        ]), 24),
        (s3_skew, 6),
        (fx("unipotent over GF(3)", &gf(3), &[&[&[1, 1], &[0, 1]]]), 3),
        (fx("M2(GF(2))", &gf(2), &[
            &[&[0, 1], &[1, 0]],
            &[&[1, 1], &[0, 1]],
            &[&[1, 0], &[0, 0]],
        ]), 16),
        (fx("rotation over Q", &q(), &[&[&[0, -1], &[1, 0]]]), 4),
        (fx("order three over Q", &q(), &[&[&[0, -1], &[1, -1]]]), 3),
        (fx("dihedral over Q", &q(), &[&[&[1, 0], &[0, -1]], &[&[0, 1], &[1, 0]]]), 8),
        (fx("rook monoid over Q", &q(), &[&[&[1, 0], &[0, 0]], &[&[0, 1], &[1, 0]]]), 7),
        (fx("companion over GF(2)", &gf(2), &[&[&[0, 1], &[1, 1]]]), 3),
        (fx("triangular over GF(5)", &gf(5), &[
            &[&[1, 1, 0], &[0, 2, 1], &[0, 0, 4]],
            &[&[2, 0, 0], &[0, 1, 0], &[0, 0, 3]],
        ]), 400),
        (fx("idempotent and shear over GF(3)", &gf(3), &[
            &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]],
            &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]],
        ]), 6),
        (gf4_fixture, 18),
    ]
}

fn infinite_fixtures() -> Vec<Fixture> {
    vec![
        fx("unipotent over Q", &q(), &[&[&[1, 1], &[0, 1]]]),
        fx("two reflections over Q", &q(), &[&[&[1, 0], &[0, -1]], &[&[-1, 2], &[0, 1]]]),
        fx("doubling over Q", &q(), &[&[&[2]]]),
    ]
}

fn closure_order(gens: &[Mat]) -> usize {
    closure(gens, &Limits::default()).unwrap().order()
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let f = finite_fixtures();
    let s3 = &f[0].0;
    let u3 = &f[3].0;
    let uq = &infinite_fixtures()[0];
    let lim = Limits::default();
    let r = mcnaughton_zalcstein(&s3.gens, &lim).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Finite { order: 6 }, || format!("S3: {:?}", r.verdict))?;
    let r = mcnaughton_zalcstein(&u3.gens, &lim).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Finite { order: 3 }, || format!("GF(3) unipotent: {:?}", r.verdict))?;
    let r = mcnaughton_zalcstein(&uq.gens, &lim).map_err(|e| e.to_string())?;
    match r.verdict {
        Verdict::NonPeriodicWitness { element, word } => {
            ensure(element == uq.gens[0] && word == vec![0], || "witness is not the generator".into())?;
        }
        v => return Err(format!("Q unipotent: {v:?}")),
    }
    Ok("S3 -> 6, GF(3) unipotent -> 3, Q unipotent -> witness g1".into())
}

fn criterion_2() -> Outcome {
    let f = &finite_fixtures()[4].0;
    let m = closure(&f.gens, &Limits::default()).map_err(|e| format!("{e:?}"))?;
    ensure(m.order() == 16, || format!("closure has {} elements", m.order()))?;
    let mats = m.matrices().unwrap();
    let stream = mats.iter().enumerate().map(|(i, x)| (x.clone(), m.word(i)));
    let basis = burnside_basis(f.field(), 2, stream).map_err(|e| e.to_string())?;
    ensure(basis.check_duality(), || "C.D != I".into())?;
    let traces = trace_set(mats).map_err(|e| e.to_string())?;
    let enumerated_bound = irreducible_bound(2, &traces);
    let a_priori = irreducible_bound(2, &admissible_traces(2, f.field(), true));
    ensure(enumerated_bound == 16u32.into() && a_priori == 16u32.into(), || {
        format!("bounds {enumerated_bound} / {a_priori}")
    })?;
    Ok(format!("|S| = 16, |T| = {}, |T|^4 = {enumerated_bound}", traces.len()))
}

/// Generators of each part of a block path, paired with the spanning data.
fn spanning_parts<'a>(path: &'a BlockPath, gens: Vec<Mat>, out: &mut Vec<(Vec<Mat>, &'a semifin::matsemi::IrreducibleBlock)>) {
    match path {
        BlockPath::Spanning(b) => out.push((gens, b)),
        BlockPath::Lifted { flag, parts, .. } => {
            for (i, p) in parts.iter().enumerate() {
                spanning_parts(p, flag.block_generators(i), out);
            }
        }
        BlockPath::Unavailable { .. } => {}
    }
}

fn criterion_3() -> Outcome {
    let mut blocks = 0;
    let mut elements = 0;
    for (f, _) in finite_fixtures() {
        let r = mcnaughton_zalcstein(&f.gens, &Limits::default()).map_err(|e| format!("{}: {e}", f.name))?;
        let flag = r.flag.as_ref().ok_or_else(|| format!("{}: no flag", f.name))?;
        for (b, block) in r.blocks.iter().enumerate() {
            let mut parts = Vec::new();
            spanning_parts(&block.path, flag.block_generators(b), &mut parts);
            for (gens, ib) in parts {
                blocks += 1;
                let data = &ib.basis;
                ensure((&data.dual * &data.gram).is_identity(), || format!("{}: C.D != I", f.name))?;
                let m = closure(&gens, &Limits::default()).map_err(|e| format!("{e:?}"))?;
                for s in m.matrices().unwrap() {
                    let a = reconstruct_coeffs(s, data).map_err(|e| format!("{}: {e}", f.name))?;
                    let mut sum = Mat::zeros(&data.field, data.n, data.n);
                    for (ai, si) in a.iter().zip(&data.elements) {
                        sum = sum.checked_add(&si.scale(ai)).unwrap();
                    }
                    ensure(&sum == s, || format!("{}: reconstruction differs", f.name))?;
                    elements += 1;
                }
            }
        }
    }
    ensure(blocks >= 5, || format!("only {blocks} spanning blocks"))?;
    Ok(format!("{blocks} spanning blocks, {elements} elements reconstructed exactly"))
}

fn random_block_triangular(rng: &mut ChaCha8Rng, field: &Field, top: usize, bottom: usize) -> Mat {
    let n = top + bottom;
    let p = field.characteristic() as i64;
    let mut m = Mat::zeros(field, n, n);
    for i in 0..n {
        for j in 0..n {
            if i >= top && j < top {
                continue;
            }
            // Sparse diagonal blocks keep the monoids small.
            let diag = (i < top) == (j < top);
            let v = if diag && i != j && rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..p) };
            m.set(i, j, field.from_i64(v));
        }
    }
    m
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lim = Limits {
        max_elements: 1500,
        ..Limits::default()
    };
    let (mut pairs, mut nontrivial, mut products) = (0usize, 0usize, 0usize);
    let mut attempts = 0;
    while pairs < 120 {
        attempts += 1;
        if attempts > 5000 {
            return Err(format!("only {pairs} pairs after {attempts} attempts"));
        }
        let field = gf([2, 3, 5][attempts % 3]);
        let (top, bottom) = [(1, 1), (1, 2), (2, 1)][rng.gen_range(0..3)];
        let gens: Vec<Mat> = (0..2).map(|_| random_block_triangular(&mut rng, &field, top, bottom)).collect();
        let Ok(m) = closure(&gens, &lim) else { continue };
        let hom = MonoidHom::from_matrix_map(&m, |x| diagonal_part(x, top)).map_err(|e| e.to_string())?;
        let cod = hom.codomain();
        let mats = m.matrices().unwrap();
        let cod_mats = cod.matrices().unwrap();
        let blocks = |k: usize| {
            let d = &cod_mats[k];
            (d.submatrix(0, 0, top, top), d.submatrix(top, top, bottom, bottom))
        };
        for _ in 0..3 {
            let (n1, n2) = (rng.gen_range(0..cod.order()), rng.gen_range(0..cod.order()));
            let tm = trace_monoid(&hom, n1, n2).map_err(|e| e.to_string())?;
            let ((x, y), (u, v)) = (blocks(n1), blocks(n2));
            let psi = |s: usize| block_trace_embedding(&mats[s], top, (&x, &y), (&u, &v));
            let zero = psi(m.identity()).map_err(|e| e.to_string())?;
            ensure(zero.is_zero(), || "psi(1) != 0".into())?;
            let values: HashMap<usize, Mat> = tm
                .stabilizer
                .iter()
                .map(|&s| psi(s).map(|p| (s, p)).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let stab = &tm.stabilizer;
            for _ in 0..stab.len().min(60) {
                let (a, b) = (stab[rng.gen_range(0..stab.len())], stab[rng.gen_range(0..stab.len())]);
                let ab = m.mul(a, b);
                let sum = values[&a].checked_add(&values[&b]).unwrap();
                ensure(values[&ab] == sum, || format!("psi(ab) != psi(a) + psi(b) over {}", field))?;
                products += 1;
            }
            // psi and the congruence must induce the same partition.
            let mut class_of_value: HashMap<&Mat, usize> = HashMap::new();
            for &s in stab {
                let c = tm.class_of[&s];
                let prev = *class_of_value.entry(&values[&s]).or_insert(c);
                ensure(prev == c, || "psi merges two congruence classes".into())?;
            }
            ensure(class_of_value.len() == tm.order(), || "psi splits a congruence class".into())?;
            pairs += 1;
            nontrivial += usize::from(tm.order() > 1);
        }
    }
    ensure(nontrivial >= 30, || format!("only {nontrivial} pairs with a nontrivial quotient"))?;
    Ok(format!(
        "{pairs} stabilizer pairs ({nontrivial} nontrivial), {products} products checked"
    ))
}

type Transformation = Vec<u8>;

fn random_transformation_monoid(rng: &mut ChaCha8Rng, points: u8, gens: usize, max: usize) -> Option<FinMonoid> {
    let gs: Vec<Transformation> = (0..gens).map(|_| (0..points).map(|_| rng.gen_range(0..points)).collect()).collect();
    let id: Transformation = (0..points).collect();
    let lim = Limits {
        max_elements: max,
        ..Limits::default()
    };
    let en = enumerate(id, &gs, |a, b| a.iter().map(|&i| b[i as usize]).collect(), &lim);
    en.complete.then(|| FinMonoid::from_enumeration(en, |_| Carrier::Abstract))
}

fn small_homomorphisms() -> Vec<(String, MonoidHom)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut out = Vec::new();
    let lim = Limits {
        max_elements: 24,
        ..Limits::default()
    };
    let mut tries = 0;
    while out.len() < 14 && tries < 2000 {
        tries += 1;
        let field = gf([2, 3][tries % 2]);
        let top = 1 + tries % 2;
        let gens: Vec<Mat> = (0..2).map(|_| random_block_triangular(&mut rng, &field, top, 1)).collect();
        let Ok(m) = closure(&gens, &lim) else { continue };
        if m.order() < 4 {
            continue;
        }
        let hom = MonoidHom::from_matrix_map(&m, |x| diagonal_part(x, top)).unwrap();
        out.push((format!("block projection over {field}, |M| = {}", m.order()), hom));
    }
    let mut k = 0;
    while k < 10 {
        let Some(m) = random_transformation_monoid(&mut rng, 3, 2, 12) else { continue };
        if m.order() < 3 {
            continue;
        }
        let hom = if k % 2 == 0 {
            MonoidHom::identity_on(&m)
        } else {
            MonoidHom::from_keys(&m, |_| ()).unwrap()
        };
        out.push((format!("transformations, |M| = {}", m.order()), hom));
        k += 1;
    }
    out
}

fn criterion_5() -> Outcome {
    let homs = small_homomorphisms();
    ensure(homs.len() >= 20, || format!("only {} homomorphisms", homs.len()))?;
    let mut triples = 0u64;
    let mut total_objects = 0;
    for (name, hom) in &homs {
        let ctx = EnumeratedContext::new(hom);
        let cat = kernel_category(&ctx, &Limits::default()).map_err(|e| e.to_string())?;
        ensure(cat.is_complete(), || format!("{name}: kernel category incomplete"))?;
        let dom = hom.domain();
        let cod = hom.codomain();
        // Every class [n1, m, n2] is reached from the generating arrows.
        let mut all = HashSet::new();
        for n1 in 0..cod.order() {
            for n2 in 0..cod.order() {
                for mm in 0..dom.order() {
                    all.insert(arrow_key(&ctx, n1, &mm, n2).unwrap());
                }
            }
        }
        let stored: HashSet<_> = cat.arrows.iter().map(|a| a.key.clone()).collect();
        ensure(stored == all, || {
            format!("{name}: {} arrows generated, {} classes exist", stored.len(), all.len())
        })?;
        // Identity and associativity on every composable pair and triple.
        let compose = |f: usize, g: usize| {
            let h = arrow_compose(&ctx, &cat.arrows[f], &cat.arrows[g]).unwrap();
            cat.lookup(&h.key).expect("composite is stored")
        };
        let mut by_source: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, a) in cat.arrows.iter().enumerate() {
            by_source.entry(a.source).or_default().push(i);
        }
        for (i, a) in cat.arrows.iter().enumerate() {
            let s = cat.identities[cat.object_id(a.source).unwrap()];
            let t = cat.identities[cat.object_id(a.target).unwrap()];
            ensure(compose(s, i) == i && compose(i, t) == i, || format!("{name}: identity law"))?;
        }
        let mut composites: HashMap<(usize, usize), usize> = HashMap::new();
        for f in 0..cat.arrow_count() {
            for &g in &by_source[&cat.arrows[f].target] {
                composites.insert((f, g), compose(f, g));
            }
        }
        for (&(f, g), &fg) in &composites {
            for &h in &by_source[&cat.arrows[g].target] {
                ensure(composites[&(fg, h)] == composites[&(f, composites[&(g, h)])], || {
                    format!("{name}: associativity at ({f}, {g}, {h})")
                })?;
                triples += 1;
            }
        }
        for &obj in &cat.objects {
            let endo = endo_monoid(&ctx, &cat, obj).map_err(|e| e.to_string())?;
            let tm = trace_monoid(hom, obj.0, obj.1).map_err(|e| e.to_string())?.as_monoid();
            ensure(find_isomorphism(&endo, &tm).is_some(), || format!("{name}: endo monoid at {obj:?}"))?;
        }
        total_objects += cat.objects.len();
        let elements: Vec<usize> = (0..dom.order()).collect();
        let embed = embed_via_unit(&ctx, &elements).map_err(|e| e.to_string())?;
        ensure(embed.injective(), || format!("{name}: [1, m, 1] not injective"))?;
        ensure(dom.order() <= cat.arrow_count(), || format!("{name}: |M| above the arrow count"))?;
    }
    Ok(format!(
        "{} homomorphisms, {total_objects} objects, {triples} triples associative",
        homs.len()
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lim = Limits::default();
    let mut graphs = 0;
    let mut nonempty = 0;
    while graphs < 200 {
        let gens = rng.gen_range(1..=2);
        let Some(m) = random_transformation_monoid(&mut rng, 3, gens, 12) else { continue };
        let cat = MonoidLabels(&m);
        let k = rng.gen_range(1..=5);
        let edges: Vec<Edge<usize>> = (0..rng.gen_range(0..=8))
            .map(|_| Edge {
                source: rng.gen_range(0..k),
                target: rng.gen_range(0..k),
                label: rng.gen_range(0..m.order()),
            })
            .collect();
        let g = LabeledGraph::new(&cat, k, edges).map_err(|e| e.to_string())?;
        let oracle = image_homsets_bruteforce(&cat, &g, &lim).map_err(|e| e.to_string())?;
        let eliminated = image_homsets(&cat, &g, &lim).map_err(|e| e.to_string())?;
        ensure(eliminated.same_sets(&oracle), || format!("graph {graphs}: elimination differs from paths"))?;
        for _ in 0..3 {
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(&mut rng);
            let t = image_homsets_ordered(&cat, &g, &order, &lim, |_| {}).map_err(|e| e.to_string())?;
            ensure(t.same_sets(&oracle), || format!("graph {graphs}: order {order:?} differs"))?;
        }
        nonempty += usize::from(!g.edges().is_empty());
        graphs += 1;
    }
    Ok(format!("{graphs} graphs ({nonempty} with edges), 4 elimination orders each"))
}

fn totient_by_counting(k: u64) -> u64 {
    (1..=k).filter(|&i| gcd(i, k) == 1).count() as u64
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    for (f, _) in finite_fixtures() {
        if !f.field().is_rationals() || f.n() > 4 {
            continue;
        }
        let n = f.n() as i64;
        let m = closure(&f.gens, &Limits::default()).map_err(|e| format!("{e:?}"))?;
        for s in m.matrices().unwrap() {
            let t = s.trace().unwrap();
            let v = f
                .field()
                .as_integer(&t)
                .ok_or_else(|| format!("{}: trace {} is not an integer", f.name, f.field().render(&t)))?;
            ensure(v >= (-n).into() && v <= n.into(), || format!("{}: trace {v} outside [-{n}, {n}]", f.name))?;
            ensure(admissible_traces(f.n(), f.field(), true).contains(f.field(), &t), || {
                format!("{}: trace {v} not admissible", f.name)
            })?;
            checked += 1;
        }
    }
    for n in 1..=4u64 {
        // phi(k) >= sqrt(k / 2), so k <= 2n^2 covers every order.
        let oracle: Vec<u64> = (1..=2 * n * n + 1).filter(|&k| totient_by_counting(k) <= n).collect();
        ensure(orders_with_totient_at_most(n) == oracle, || format!("root orders for n = {n}"))?;
        let TraceSet::Admissible { root_orders, .. } = admissible_traces(n as usize, &q(), true) else {
            return Err("admissible traces are not a priori".into());
        };
        ensure(root_orders == oracle, || format!("admissible root orders for n = {n}"))?;
    }
    ensure(orders_with_totient_at_most(2) == vec![1, 2, 3, 4, 6], || "n = 2 orders".into())?;
    Ok(format!("{checked} traces integral and bounded, root orders for n = 2 are {{1, 2, 3, 4, 6}}"))
}

fn zeros_below_blocks(m: &Mat, sizes: &[usize]) -> bool {
    let mut start = 0;
    for &s in sizes {
        let end = start + s;
        for i in end..m.rows() {
            for j in start..end {
                if !m.field().is_zero(m.get(i, j)) {
                    return false;
                }
            }
        }
        start = end;
    }
    true
}

fn check_flag(name: &str, gens: &[Mat], flag: &FlagDecomposition) -> Result<(), String> {
    let qi = flag.q.inverse().map_err(|_| format!("{name}: Q singular"))?;
    ensure(flag.block_sizes.iter().sum::<usize>() == gens[0].rows(), || format!("{name}: sizes"))?;
    for (g, c) in gens.iter().zip(&flag.conjugated) {
        ensure(&(&qi * g) * &flag.q == *c, || format!("{name}: conjugated generator differs"))?;
        ensure(zeros_below_blocks(c, &flag.block_sizes), || format!("{name}: nonzero entry below the blocks"))?;
        ensure(is_block_upper(c, &flag.block_sizes), || format!("{name}: not block upper"))?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut split = 0;
    let lim = Limits::default();
    for (f, order) in finite_fixtures() {
        ensure(closure_order(&f.gens) == order, || format!("{}: order is not {order}", f.name))?;
    }
    let all: Vec<Fixture> = finite_fixtures().into_iter().map(|(f, _)| f).chain(infinite_fixtures()).collect();
    for f in &all {
        let flag = triangularize(&f.gens).map_err(|e| format!("{}: {e}", f.name))?;
        check_flag(f.name, &f.gens, &flag)?;
        split += usize::from(flag.block_sizes.len() > 1);
        let before = mcnaughton_zalcstein(&f.gens, &lim).map_err(|e| e.to_string())?;
        let after = mcnaughton_zalcstein(&flag.conjugated, &lim).map_err(|e| e.to_string())?;
        let same = match (&before.verdict, &after.verdict) {
            (Verdict::Finite { order: a }, Verdict::Finite { order: b }) => a == b,
            (Verdict::NonPeriodicWitness { .. }, Verdict::NonPeriodicWitness { .. }) => true,
            _ => false,
        };
        ensure(same, || format!("{}: {:?} then {:?}", f.name, before.verdict, after.verdict))?;
        if let Verdict::Finite { order } = before.verdict {
            ensure(closure_order(&flag.conjugated) == order, || format!("{}: conjugated order", f.name))?;
        }
        for b in &before.blocks {
            if let BlockPath::Lifted { flag: inner, .. } = &b.path {
                let outer = before.flag.as_ref().unwrap();
                let ext = inner.q.field().clone();
                let lifted: Vec<Mat> = outer
                    .block_generators(before.blocks.iter().position(|x| x == b).unwrap())
                    .iter()
                    .map(|g| semifin::matsemi::lift_matrix(g, &ext))
                    .collect();
                check_flag(f.name, &lifted, inner)?;
            }
        }
    }
    Ok(format!("{} fixtures, {split} split into several blocks", all.len()))
}

/// Every leaf of `v` with a changed value, skipping free-text fields.
fn tamperings(v: &Value, path: &mut Vec<String>, out: &mut Vec<(String, Value)>, root: &Value) {
    let mut replace = |new: Value, path: &[String]| {
        let mut doc = root.clone();
        let mut cur = &mut doc;
        for p in path {
            cur = match cur {
                Value::Array(a) => &mut a[p.parse::<usize>().unwrap()],
                Value::Object(o) => o.get_mut(p).unwrap(),
                _ => unreachable!(),
            };
        }
        *cur = new;
        out.push((path.join("."), doc));
    };
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                if k == "reason" || k == "label" {
                    continue;
                }
                path.push(k.clone());
                tamperings(x, path, out, root);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                path.push(i.to_string());
                tamperings(x, path, out, root);
                path.pop();
            }
        }
        Value::Number(n) => replace(Value::from(n.as_u64().map_or(7, |x| x + 1)), path),
        Value::Bool(b) => replace(Value::Bool(!b), path),
        Value::String(s) => {
            let new = match s.parse::<i64>() {
                Ok(x) => (x + 1).to_string(),
                Err(_) if s.contains('/') => format!("{s}1"),
                Err(_) => format!("{s}x"),
            };
            replace(Value::String(new), path)
        }
        Value::Null => replace(Value::from(1), path),
    }
}

fn flag_doc_holds(f: &Fixture, flag: &Value) -> bool {
    let parse = |v: &Value| Mat::parse(f.field(), &serde_json::from_value::<Vec<Vec<_>>>(v.clone()).ok()?).ok();
    let (Some(q), Some(conjugated)) = (
        parse(&flag["q"]),
        flag["conjugated"].as_array().and_then(|a| a.iter().map(parse).collect::<Option<Vec<_>>>()),
    ) else {
        return false;
    };
    let Ok(block_sizes) = serde_json::from_value::<Vec<usize>>(flag["block_sizes"].clone()) else { return false };
    let flag = FlagDecomposition {
        q,
        block_sizes,
        conjugated,
    };
    check_flag(f.name, &f.gens, &flag).is_ok()
}

fn criterion_9() -> Outcome {
    let opts = RunOptions::default();
    let fixtures = finite_fixtures();
    let mut accepted = 0;
    let mut rejected = 0;
    let mut equivalent = 0;
    for (f, _) in &fixtures {
        let out = job::run(Command::Check, &f.job_text(), &opts).map_err(|e| format!("{}: {e}", f.name))?;
        let cert = out.report.payload["certificate"].clone();
        let v = job::run(Command::Verify, &cert.to_string(), &opts).map_err(|e| e.to_string())?;
        ensure(v.exit_code() == EXIT_OK, || format!("{}: emitted certificate rejected: {}", f.name, v.report.payload))?;
        accepted += 1;
    }
    for i in [0, 3, 4, 5, 9] {
        let (f, _) = &fixtures[i];
        let out = job::run(Command::Check, &f.job_text(), &opts).unwrap();
        let cert = out.report.payload["certificate"].clone();
        let mut cases = Vec::new();
        tamperings(&cert, &mut Vec::new(), &mut cases, &cert);
        for (where_, doc) in cases {
            let code = match job::run(Command::Verify, &doc.to_string(), &opts) {
                Ok(o) => o.exit_code(),
                Err(e) => e.exit_code(),
            };
            if code != EXIT_INVALID_CERTIFICATE {
                // Another basis may conjugate just as well; then the edit is not a falsification.
                let still_true = where_.starts_with("flag.q.") && code == EXIT_OK && flag_doc_holds(f, &doc["flag"]);
                ensure(still_true, || format!("{}: tampered {where_} gives exit {code}", f.name))?;
                equivalent += 1;
                continue;
            }
            rejected += 1;
        }
    }
    Ok(format!(
        "{accepted} certificates accepted, {rejected} single-field tamperings rejected, {equivalent} still-valid bases accepted"
    ))
}

fn stable(report: &job::JobReport) -> Value {
    let mut v: Value = serde_json::from_str(&report.to_json()).unwrap();
    v["counters"]["millis"] = Value::Null;
    v
}

fn criterion_10() -> Outcome {
    let opts = RunOptions {
        overrides: LimitOverrides {
            max_elements: Some(20_000),
            ..LimitOverrides::default()
        },
        cache: None,
    };
    let mut runs = 0;
    let all: Vec<Fixture> = finite_fixtures().into_iter().map(|(f, _)| f).chain(infinite_fixtures()).collect();
    for f in &all {
        let text = f.job_text();
        for command in [Command::Check, Command::Triangularize, Command::Closure] {
            let a = job::run(command, &text, &opts).map_err(|e| e.to_string())?;
            let b = job::run(command, &text, &opts).map_err(|e| e.to_string())?;
            ensure(stable(&a.report) == stable(&b.report), || {
                format!("{}: {} differs between runs", f.name, command.name())
            })?;
            runs += 2;
        }
        let base = job::report_verdict(&job::run(Command::Check, &text, &opts).unwrap().report);
        let mut rev = Fixture {
            name: f.name,
            gens: f.gens.clone(),
        };
        rev.gens.reverse();
        let permuted = job::report_verdict(&job::run(Command::Check, &rev.job_text(), &opts).unwrap().report);
        let agree = match (&base, &permuted) {
            (Some(VerdictDoc::Finite { order: a }), Some(VerdictDoc::Finite { order: b })) => a == b,
            (Some(VerdictDoc::NonPeriodicWitness { .. }), Some(VerdictDoc::NonPeriodicWitness { .. })) => true,
            _ => false,
        };
        ensure(agree, || format!("{}: permuted generators give {permuted:?}", f.name))?;
        runs += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut kleene = 0;
    while kleene < 20 {
        let Some(m) = random_transformation_monoid(&mut rng, 3, 2, 12) else { continue };
        let cat = MonoidLabels(&m);
        let edges: Vec<Edge<usize>> = (0..6)
            .map(|_| Edge {
                source: rng.gen_range(0..4),
                target: rng.gen_range(0..4),
                label: rng.gen_range(0..m.order()),
            })
            .collect();
        let g = LabeledGraph::new(&cat, 4, edges).unwrap();
        let a = image_homsets(&cat, &g, &Limits::default()).unwrap();
        let b = image_homsets(&cat, &g, &Limits::default()).unwrap();
        let sets = |t: &semifin::kleene::PathImageTable<usize>| -> Vec<BTreeSet<usize>> {
            (0..4).flat_map(|v| (0..4).map(move |w| (v, w))).map(|(v, w)| t.get(v, w).clone()).collect()
        };
        ensure(sets(&a) == sets(&b), || "kleene tables differ between runs".into())?;
        kleene += 1;
    }
    Ok(format!("{runs} job runs and {kleene} elimination runs reproducible"))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, run) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {k}: PASS ({detail}; {ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("criterion {k}: FAIL ({why}; {ms} ms)");
            }
        }
    }
    println!("acceptance: {}/10 passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
