//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! followed by indented detail lines, and exits nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rv14_core::complex::{
    explicit, link, link_euler_fast, partial_euler, partial_link_euler, r_vector, OrbitState,
    TypeAssignment,
};
use rv14_core::data::Bundle;
use rv14_core::oracle::{
    decision_tree_depth, exhaustive_conjecture_check, monotone_families, sample_invariant_function,
    BooleanFunction,
};
use rv14_core::orbits::compute_orbits;
use rv14_core::perm::{
    classify, verify_psi_pq, ClassKind, ClassifyOptions, PermGroup, DEFAULT_ELEMENT_CAP,
};
use rv14_core::search::{
    enumerate_cases, replay_appendix, run_search, Campaign, Schedule, SearchOptions,
};

const ORDER_BUDGET: Duration = Duration::from_secs(1);
const CLASSIFY_BUDGET: Duration = Duration::from_secs(5);
const CENSUS_BUDGET: Duration = Duration::from_secs(5);
const SEARCH_BUDGET: Duration = Duration::from_secs(600);
const DEPTH_BUDGET: Duration = Duration::from_secs(300);
const SWEEP_BUDGET: Duration = Duration::from_secs(120);
const PROPERTY_CASES: usize = 100;
const PRINTED_CENSUS_TOTAL: usize = 158;

struct Outcome {
    ok: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            ok: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.details
            .push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, what));
        self.ok &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(format!("     {}", what.into()));
    }
}

fn group(bundle: &Bundle, name: &str) -> PermGroup {
    bundle
        .group(name)
        .unwrap()
        .group(DEFAULT_ELEMENT_CAP)
        .unwrap()
}

fn criterion_1(bundle: &Bundle) -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for (name, expected) in [
        ("G1", 14),
        ("G2", 14),
        ("G3", 56),
        ("G5", 1092),
        ("G6", 168),
    ] {
        let order = group(bundle, name).order();
        o.check(
            order == expected,
            format!("|{name}| = {order} (expected {expected})"),
        );
    }
    let elapsed = start.elapsed();
    o.check(
        elapsed < ORDER_BUDGET,
        format!("orders computed in {elapsed:.2?} (< {ORDER_BUDGET:?})"),
    );

    let rec = bundle.group("G4").unwrap();
    let g4 = rec.group(DEFAULT_ELEMENT_CAP).unwrap();
    let printed = rec.printed_order.unwrap();
    o.check(
        printed != g4.order(),
        format!("|G4| = {} flagged against printed {printed}", g4.order()),
    );
    o.check(
        rec.claimed_orders.contains(&g4.order()),
        format!(
            "|G4| = {} is among the claimed orders {:?}",
            g4.order(),
            rec.claimed_orders
        ),
    );
    let w = rec.bundled_witness().unwrap().unwrap();
    let p = g4.subgroup(w.p_generators.clone()).unwrap();
    let h = g4.subgroup(w.h_generators.clone().unwrap()).unwrap();
    o.check(p.order() == 49, format!("|P| = {}", p.order()));
    o.check(
        g4.order() / h.order() == 2,
        format!("[G4 : H] = {}", g4.order() / h.order()),
    );
    o.check(h.quotient(&p).is_cyclic(), "H/P is cyclic");
    o.check(
        verify_psi_pq(&g4, &w).unwrap(),
        "witness chain verifies against the computed group",
    );
    o
}

fn criterion_2(bundle: &Bundle) -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let expected = [
        ("G1", ClassKind::Cyclic),
        ("G2", ClassKind::PsiP { p: 7 }),
        ("G3", ClassKind::PsiP { p: 2 }),
        ("G4", ClassKind::PsiPQ { p: 7, q: 2 }),
        ("G5", ClassKind::SylowLemma { p: 13 }),
        ("G6", ClassKind::Unresolved),
    ];
    for (name, want) in expected {
        let rec = bundle.group(name).unwrap();
        let g = rec.group(DEFAULT_ELEMENT_CAP).unwrap();
        let w = rec.bundled_witness().unwrap();
        let c = classify(&g, w.as_ref(), ClassifyOptions::default());
        o.check(
            c.kind == want,
            format!("{name}: {} (expected {want})", c.kind),
        );
    }
    let elapsed = start.elapsed();
    o.check(
        elapsed < CLASSIFY_BUDGET,
        format!("classified in {elapsed:.2?} (< {CLASSIFY_BUDGET:?})"),
    );
    o
}

fn criterion_3(bundle: &Bundle) -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let t = compute_orbits(&group(bundle, "G6")).unwrap();
    let elapsed = start.elapsed();
    let one: Vec<u64> = t.level(1).map(|x| t.size(x)).collect();
    o.check(one == [14], format!("level 1 orbit sizes {one:?}"));
    let mut two: Vec<u64> = t.level(2).map(|x| t.size(x)).collect();
    two.sort_unstable();
    o.check(two == [7, 84], format!("level 2 orbit sizes {two:?}"));
    let partitions = (0..=14u64).all(|k| {
        let total: u64 = t.level(k as usize).map(|x| t.size(x)).sum();
        total == (0..k).fold(1, |acc, i| acc * (14 - i) / (i + 1))
    });
    o.check(partitions, "per-level sizes partition C(14, k)");
    let total = t.nonempty_count();
    o.note(format!("census {:?}", t.level_counts()));
    o.check(
        true,
        format!(
            "total {total} nonempty orbits emitted; printed total {PRINTED_CENSUS_TOTAL}: {}",
            if total == PRINTED_CENSUS_TOTAL {
                "agrees"
            } else {
                "differs, computed census is authoritative"
            }
        ),
    );
    o.check(
        elapsed < CENSUS_BUDGET,
        format!("census in {elapsed:.2?} (< {CENSUS_BUDGET:?})"),
    );
    o
}

fn criterion_4(camp: &Campaign) -> Outcome {
    let mut o = Outcome::new();
    for sched in [Schedule::fewest_blocks(camp), Schedule::most_blocks(camp)] {
        let opts = SearchOptions {
            jobs: 1,
            ..SearchOptions::default()
        };
        let start = Instant::now();
        let a = run_search(camp, &sched, opts).unwrap();
        let elapsed = start.elapsed();
        let b = run_search(camp, &sched, opts).unwrap();
        o.check(
            a.counters.feasible_count == 0,
            format!(
                "[{}] {} feasible functions, {} nodes, {} leaves",
                sched.name, a.counters.feasible_count, a.counters.nodes_explored, a.counters.leaves
            ),
        );
        o.check(
            a.counters == b.counters,
            format!("[{}] repeat run has identical counters", sched.name),
        );
        o.check(
            elapsed < SEARCH_BUDGET,
            format!("[{}] single-threaded in {elapsed:.2?}", sched.name),
        );
    }
    o
}

fn criterion_5(camp: &Campaign, bundle: &Bundle) -> Outcome {
    let mut o = Outcome::new();
    let r = replay_appendix(camp, bundle).unwrap();
    o.check(
        r.stopped_at.is_none(),
        format!("all {} printed steps replayed", r.steps.len()),
    );
    for (step, want) in [(1, 2u64), (4, 4), (6, 2)] {
        let got = r
            .steps
            .iter()
            .find(|s| s.step == step)
            .and_then(|s| s.candidate_complexes);
        o.check(
            got == Some(want),
            format!("step {step}: {got:?} cases (expected {want})"),
        );
    }
    let Some(leaf) = &r.leaf else {
        o.check(false, "step 7 reached");
        return o;
    };
    o.check(
        leaf.chi == 1,
        format!("step 7 chi = {} (expected 1)", leaf.chi),
    );
    o.check(
        leaf.chi_link == 7,
        format!("step 7 chi_link = {} (expected 7)", leaf.chi_link),
    );
    o.check(
        leaf.free.len() == 6,
        format!("step 7 free orbits: {} (expected 6)", leaf.free.len()),
    );
    let anchored_printed: BTreeSet<usize> = leaf
        .printed_free
        .iter()
        .filter_map(|l| r.anchors.get(*l))
        .collect();
    let anchored_free: BTreeSet<usize> = leaf
        .free
        .iter()
        .filter(|row| row.printed_orbit.is_some())
        .map(|row| camp.table.global(row.orbit).unwrap())
        .collect();
    o.note(format!(
        "{} of {} printed free labels have an anchor",
        anchored_printed.len(),
        leaf.printed_free.len()
    ));
    o.check(
        anchored_printed == anchored_free,
        format!(
            "anchored free orbits: computed {:?}, printed {:?}",
            anchored_free
                .iter()
                .map(|&g| camp.table.id(g).to_string())
                .collect::<Vec<_>>(),
            anchored_printed
                .iter()
                .map(|&g| camp.table.id(g).to_string())
                .collect::<Vec<_>>()
        ),
    );
    o.check(
        leaf.chi_one_cases.len() == 2,
        format!(
            "residual chi = 1 cases: {} (expected 2)",
            leaf.chi_one_cases.len()
        ),
    );
    o.check(
        leaf.all_fail_link,
        "every residual chi = 1 case fails chi_link = 1",
    );
    o
}

fn criterion_6(camp: &Campaign) -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..5 {
        let a = sample_invariant_function(&camp.table, &camp.poset, &mut rng, true);
        let f = BooleanFunction::from_assignment(&camp.table, &a).unwrap();
        let start = Instant::now();
        let d = decision_tree_depth(&f).unwrap();
        let elapsed = start.elapsed();
        o.check(
            f.is_nontrivial() && f.is_monotone() && d == 14 && elapsed < DEPTH_BUDGET,
            format!("sample {i}: D(f) = {d}, chi = {}, {elapsed:.2?}", f.euler()),
        );
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for n in 1..=5 {
        let r = exhaustive_conjecture_check(n).unwrap();
        o.check(
            r.counterexamples.is_empty(),
            format!(
                "n = {n}: {} monotone, {} nontrivial weakly symmetric, {} counterexamples",
                r.monotone_functions,
                r.weakly_symmetric_nontrivial,
                r.counterexamples.len()
            ),
        );
        o.check(
            r.chi_violations.is_empty(),
            format!(
                "n = {n}: {} of {} non-elusive functions have chi = 1",
                r.non_elusive_chi_one, r.non_elusive
            ),
        );
    }
    let elapsed = start.elapsed();
    o.check(
        elapsed < SWEEP_BUDGET,
        format!("sweep in {elapsed:.2?} (< {SWEEP_BUDGET:?})"),
    );
    o
}

fn criterion_8(camp: &Campaign) -> Outcome {
    let mut o = Outcome::new();
    let t = &camp.table;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples: Vec<TypeAssignment> = (0..PROPERTY_CASES)
        .map(|_| sample_invariant_function(t, &camp.poset, &mut rng, true))
        .collect();

    let identity_failures = samples
        .iter()
        .filter(|a| {
            let r = r_vector(t, a).unwrap().r;
            let l = link(t, a, 0).unwrap().r_vector().r;
            (1..=14).any(|k| 14 * l[k - 1] != k as u64 * r[k])
        })
        .count();
    o.check(
        identity_failures == 0,
        format!("link r-vector identity: {identity_failures} failures in {PROPERTY_CASES}"),
    );

    let link_failures = samples
        .iter()
        .enumerate()
        .filter(|(i, a)| {
            link_euler_fast(t, a, i % 14).unwrap() != link(t, a, i % 14).unwrap().euler()
        })
        .count();
    o.check(
        link_failures == 0,
        format!("fast link chi vs explicit link: {link_failures} failures in {PROPERTY_CASES}"),
    );

    let reps: Vec<u32> = (0..t.len()).map(|x| t.representative(x)).collect();
    let brute_le = |a: usize, b: usize| {
        if a == 0 || b == 0 {
            a == b
        } else {
            t.members(b).iter().any(|&y| reps[a] & !y == 0)
        }
    };
    let mut closure_failures = 0;
    for _ in 0..PROPERTY_CASES {
        let mut s = TypeAssignment::all_free(t.len());
        for _ in 0..6 {
            let x = rng.gen_range(1..t.len());
            let value = rng.gen_bool(0.5);
            let before = s.clone();
            if s.propagate(&camp.poset, x, value).is_err() {
                closure_failures += usize::from(s != before);
                continue;
            }
            let bad = (1..t.len()).any(|y| {
                let forced = if value {
                    brute_le(y, x)
                } else {
                    brute_le(x, y)
                };
                let want = if forced {
                    if value {
                        OrbitState::True
                    } else {
                        OrbitState::False
                    }
                } else {
                    before.state(y)
                };
                s.state(y) != want
            });
            closure_failures += usize::from(bad);
        }
    }
    o.check(
        closure_failures == 0,
        format!("propagation vs brute-force Upper/Lower: {closure_failures} failures"),
    );

    let sched = Schedule::fewest_blocks(camp);
    let mut nodes = 0;
    let mut chi_failures = 0;
    while nodes < PROPERTY_CASES {
        let mut s = camp.initial_state();
        for name in &sched.order {
            let check = camp.check(name).unwrap();
            if check.is_trivial() {
                break;
            }
            let (cases, _) = enumerate_cases(camp, &s, check);
            if cases.is_empty() {
                break;
            }
            s = cases[rng.gen_range(0..cases.len())].clone();
            nodes += 1;
            chi_failures += usize::from(
                s.chi != partial_euler(t, &s.assignment)
                    || s.chi_link != partial_link_euler(t, &s.assignment, 0),
            );
        }
    }
    o.check(
        chi_failures == 0,
        format!("incremental chi vs scratch: {chi_failures} failures at {nodes} search nodes"),
    );

    let mut depth_failures = 0;
    let mut functions = 0;
    for n in 0..=4 {
        for fam in monotone_families(n) {
            let f = BooleanFunction::from_fn(n, |m| fam >> m & 1 == 1).unwrap();
            functions += 1;
            depth_failures += usize::from(
                decision_tree_depth(&f).unwrap() != decision_tree_depth(&f.negation()).unwrap(),
            );
        }
    }
    o.check(
        functions >= PROPERTY_CASES && depth_failures == 0,
        format!("D(f) = D(not f): {depth_failures} failures in {functions} functions"),
    );

    let explicit_failures = samples
        .iter()
        .filter(|a| !explicit(t, a).is_downward_closed())
        .count();
    o.check(
        explicit_failures == 0,
        "sampled assignments are simplicial complexes",
    );
    o
}

fn main() -> ExitCode {
    let bundle = Bundle::load().expect("bundled data loads");
    let camp = Campaign::from_bundle(&bundle).expect("campaign builds");
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("group orders", Box::new(|| criterion_1(&bundle))),
        ("classification verdicts", Box::new(|| criterion_2(&bundle))),
        ("G6 orbit census", Box::new(|| criterion_3(&bundle))),
        (
            "search finds no feasible function",
            Box::new(|| criterion_4(&camp)),
        ),
        (
            "worked-branch replay",
            Box::new(|| criterion_5(&camp, &bundle)),
        ),
        (
            "sampled G6 functions are elusive",
            Box::new(|| criterion_6(&camp)),
        ),
        ("exhaustive sweep n <= 5", Box::new(criterion_7)),
        ("property suites", Box::new(|| criterion_8(&camp))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        println!(
            "criterion {} {} {name} ({:.2?})",
            i + 1,
            if out.ok { "PASS" } else { "FAIL" },
            start.elapsed()
        );
        for d in &out.details {
            println!("    {d}");
        }
        failed += usize::from(!out.ok);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
