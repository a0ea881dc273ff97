mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{maximal_cosets, naive_maximal_cliques, PrimeGl};
use ekrlab::ekr::{
    classify, find_bases, hm_bound, is_intersecting_set, kneser_pair_cocliques,
    minimal_fixed_point_free_subsets, DerangementGraph, IntersectingSet,
};
use ekrlab::ff::FieldSpec;
use ekrlab::geometry::ProjLine;
use ekrlab::group::{singer_cycle, GroupTable, DEFAULT_LATTICE_CAP};
use ekrlab::linalg::{EigenSpace, Mat, Vect};
use ekrlab::search::{
    self, check_bases, enumerate_maximal_intersecting, gl3_probe, verify_ekr_bound,
    verify_main_theorem, SearchOptions,
};

const CAP: usize = 6_000;

type Criterion = fn() -> Result<String, String>;

fn gl(q: u32) -> GroupTable {
    GroupTable::gl2(&FieldSpec::of_order(q).unwrap()).unwrap()
}

fn opts() -> SearchOptions {
    SearchOptions::with_timeout(Duration::from_secs(600))
}

fn id(g: &GroupTable, a: u32, b: u32, c: u32, d: u32) -> u32 {
    g.id_of(&Mat::m2(a, b, c, d)).unwrap()
}

fn entries(g: &GroupTable, ids: &[u32]) -> Vec<[u32; 4]> {
    let mut v: Vec<[u32; 4]> = ids
        .iter()
        .map(|&i| {
            let e = g.mat(i).entries();
            [e[0].idx(), e[1].idx(), e[2].idx(), e[3].idx()]
        })
        .collect();
    v.sort_unstable();
    v
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {t:?}, limit {limit:?}"))
}

fn ekr_bound() -> Result<String, String> {
    let start = Instant::now();
    for (q, want) in [(3, 6), (4, 12), (5, 20)] {
        let g = gl(q);
        let graph = DerangementGraph::of_group(&g, CAP).unwrap();
        let r = verify_ekr_bound(&g, &graph, opts());
        ensure(r.complete, format!("q={q}: search incomplete"))?;
        ensure(
            r.max_intersecting == want,
            format!("q={q}: maximum {} != {want}", r.max_intersecting),
        )?;
    }
    within(start, Duration::from_secs(10))?;
    Ok("maximum cliques 6, 12, 20".into())
}

fn main_theorem() -> Result<String, String> {
    let mut notes = Vec::new();
    for q in [3, 4, 5] {
        let start = Instant::now();
        let c = verify_main_theorem(&gl(q), CAP, opts()).unwrap();
        let r = &c.report;
        let size = (q * (q - 1)) as usize;
        ensure(r.complete, format!("q={q}: incomplete"))?;
        ensure(
            r.neither == 0,
            format!("q={q}: {} sets in neither family", r.neither),
        )?;
        ensure(
            r.histogram.keys().all(|&s| s == size),
            format!("q={q}: sizes {:?}", r.histogram),
        )?;
        // orbit counting: (q²−1)(q+1) distinct cosets per family
        let per_family = ((q * q - 1) * (q + 1)) as usize;
        ensure(
            r.point_coset == per_family && r.line_coset == per_family,
            format!("q={q}: {} point, {} line", r.point_coset, r.line_coset),
        )?;
        if q != 4 {
            let (points, lines) = maximal_cosets(&PrimeGl::new(q));
            ensure(
                points.len() == r.point_coset && lines.len() == r.line_coset,
                format!(
                    "q={q}: reference cosets {} and {}",
                    points.len(),
                    lines.len()
                ),
            )?;
        }
        let limit = if q == 5 { 300 } else { 30 };
        within(start, Duration::from_secs(limit))?;
        notes.push(format!("q={q}: {}+{}", r.point_coset, r.line_coset));
    }
    Ok(format!(
        "all maximal sets maximum and canonical-family ({})",
        notes.join(", ")
    ))
}

fn refutation() -> Result<String, String> {
    for q in [3, 4, 5] {
        let r = verify_main_theorem(&gl(q), CAP, opts()).unwrap().report;
        ensure(
            r.complete && r.neither == 0 && r.non_family_of_claimed_size == 0,
            format!("q={q}: non-family maximal sets exist"),
        )?;
    }
    Ok("no maximal set outside both families at sizes 3, 7, 13 or any other".into())
}

fn fixed_points() -> Result<String, String> {
    let start = Instant::now();
    for q in [3, 4, 5, 7] {
        let g = gl(q);
        let f = g.field();
        for x in g.ids().filter(|&x| x != g.identity()) {
            let m = g.mat(x);
            let fixed = g.points().iter().filter(|v| m.mul_vec(v, f) == **v).count();
            ensure(
                fixed == 0 || fixed == (q - 1) as usize,
                format!("q={q}: {m} fixes {fixed} points"),
            )?;
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok("every non-identity element fixes 0 or q-1 points".into())
}

fn bases() -> Result<String, String> {
    let mut total = 0;
    for q in [3, 4] {
        let g = gl(q);
        let c = verify_main_theorem(&g, CAP, opts()).unwrap();
        for s in &c.sets {
            let (norm, _) = IntersectingSet::new(&g, s).unwrap().normalize(&g);
            let canonical = classify(&g, norm.members())
                .point_witnesses
                .iter()
                .any(|(a, b)| a == b);
            if canonical {
                continue;
            }
            total += 1;
            let found = find_bases(&g, &norm).unwrap();
            ensure(!found.is_empty(), format!("q={q}: no base"))?;
            ensure(
                found.iter().all(|b| b.common_line.is_some()),
                format!("q={q}: base without a common line through 0"),
            )?;
            let minimal = minimal_fixed_point_free_subsets(&g, &norm, 1 << 22)
                .ok_or(format!("q={q}: minimal subset search over budget"))?;
            ensure(
                minimal.iter().all(|m| m.len() == 2),
                format!("q={q}: minimal fixed-point-free subset of size > 2"),
            )?;
        }
        let lemmas = check_bases(&g, &c.sets);
        ensure(
            lemmas.iter().all(|l| l.passed),
            format!("q={q}: {:?}", lemmas.iter().find(|l| !l.passed)),
        )?;
    }
    Ok(format!(
        "{total} non-canonical maximal sets: bases exist, fix a line through 0, have size 2"
    ))
}

fn worked_example() -> Result<String, String> {
    let g = gl(5);
    let f = g.field();
    let a1 = id(&g, 2, 1, 0, 1);
    let a2 = id(&g, 1, 1, 0, 1);
    let a3 = id(&g, 3, 1, 0, 1);
    let set = IntersectingSet::new(&g, &[g.identity(), a1, a2, a3]).map_err(|e| e.to_string())?;
    let c = classify(&g, set.members());
    ensure(
        c.point_witnesses.is_empty(),
        "example lies in a point coset",
    )?;
    let pairs: Vec<(u32, u32)> = find_bases(&g, &set)
        .unwrap()
        .iter()
        .map(|b| (b.pair.0.min(b.pair.1), b.pair.0.max(b.pair.1)))
        .collect();
    for other in [a2, a3] {
        ensure(
            pairs.contains(&(a1.min(other), a1.max(other))),
            "a printed base is missing",
        )?;
    }
    let one = f.elem(1).unwrap();
    let line = g
        .mat(a1)
        .eigen_lines(f)
        .into_iter()
        .find(|(l, _)| *l == one)
        .map(|(_, s)| s);
    let expected = ProjLine::from_dir(&Vect::xy(1, 4), f);
    ensure(
        line == Some(EigenSpace::Line(expected)),
        format!("eigenline {line:?}"),
    )?;
    Ok(format!(
        "intersecting, non-canonical ({}), {} bases, eigenline {}",
        c.describe(&g),
        pairs.len(),
        expected
    ))
}

fn singer() -> Result<String, String> {
    let start = Instant::now();
    for q in [3, 4, 5, 7, 8, 9] {
        let g = gl(q);
        let s = g.id_of(&singer_cycle(g.field())).unwrap();
        let order = (q * q - 1) as usize;
        ensure(g.element_order(s) == order, format!("q={q}: order"))?;
        let cyclic = g.subgroup_closure(&[s]);
        let mut images: Vec<usize> = cyclic.members.iter().map(|&x| g.act(x, 0)).collect();
        images.sort_unstable();
        images.dedup();
        ensure(
            cyclic.order() == order && images.len() == g.points().len(),
            format!("q={q}: not regular"),
        )?;
        let clique = cyclic.members.iter().all(|&a| {
            cyclic
                .members
                .iter()
                .all(|&b| a == b || !g.intersects(a, b))
        });
        ensure(clique, format!("q={q}: not a clique"))?;
        ensure(
            order * (q * (q - 1)) as usize == g.order(),
            format!("q={q}: clique-coclique product"),
        )?;
    }
    within(start, Duration::from_secs(10))?;
    Ok("orders q^2-1, regular, cliques, tight product".into())
}

fn hilton_milner() -> Result<String, String> {
    for q in 3..=16u64 {
        ensure(
            hm_bound(q + 1, 2) == Ok(3),
            format!("hm_bound({},2)", q + 1),
        )?;
    }
    for n in 4..=6 {
        let s = kneser_pair_cocliques(n);
        ensure(
            s.max_coclique == n - 1 && s.max_non_canonical == 3,
            format!("K({n},2): {s:?}"),
        )?;
    }
    Ok("hm_bound(q+1,2)=3; K(4..6,2) scans agree".into())
}

fn main2() -> Result<String, String> {
    let start = Instant::now();
    let g = gl(3);
    let lattice = g.all_subgroups(DEFAULT_LATTICE_CAP).unwrap();
    let named: Vec<(String, _)> = lattice
        .into_iter()
        .enumerate()
        .map(|(i, h)| (format!("H{i}"), h))
        .collect();
    let r = search::verify_main2(&g, &named, CAP, opts()).unwrap();
    ensure(
        r.passed(),
        format!("{:?}", r.checks.iter().find(|c| !c.passed())),
    )?;
    let transitive: Vec<_> = r.checks.iter().filter(|c| c.skipped.is_none()).collect();
    ensure(!transitive.is_empty(), "no transitive subgroup")?;
    ensure(
        transitive.iter().all(|c| c.transitive_on_o2),
        "a transitive subgroup is not transitive on O2",
    )?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} subgroups, {} transitive, all with the EKR property",
        r.subgroups_examined,
        transitive.len()
    ))
}

fn gl3() -> Result<String, String> {
    let start = Instant::now();
    let r = gl3_probe(CAP, opts()).unwrap();
    ensure(r.complete, "probe incomplete")?;
    let witness = r
        .witness
        .clone()
        .ok_or("no witness outside both families")?;
    // Re-check the witness from its matrices.
    let g = GroupTable::gl3_2();
    let ids: Vec<u32> = witness
        .iter()
        .map(|s| g.id_of(&Mat::parse(s, g.field()).unwrap()).unwrap())
        .collect();
    ensure(is_intersecting_set(&g, &ids), "witness not intersecting")?;
    ensure(
        g.ids()
            .filter(|x| !ids.contains(x))
            .all(|x| ids.iter().any(|&m| !g.intersects(m, x))),
        "witness not maximal",
    )?;
    let npts = g.points().len();
    let in_point_coset = (0..npts).any(|w| ids.iter().all(|&m| g.act(m, w) == g.act(ids[0], w)));
    ensure(!in_point_coset, "witness is in a point coset")?;
    let in_plane_coset = g.points().iter().any(|w| {
        let plane = |m: u32| -> Vec<usize> {
            let mut v: Vec<usize> = (0..npts)
                .filter(|&p| {
                    let u = g.points()[p].coords();
                    let s = (0..3).fold(0, |acc, i| acc ^ (u[i].idx() & w.coords()[i].idx()));
                    s == 0
                })
                .map(|p| g.act(m, p))
                .collect();
            v.sort_unstable();
            v
        };
        ids.iter().all(|&m| plane(m) == plane(ids[0]))
    });
    ensure(!in_plane_coset, "witness is in a hyperplane coset")?;
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{} maximal sets, {} outside both families; witness of size {}",
        r.total,
        r.outside_both,
        ids.len()
    ))
}

fn oracle_equivalence() -> Result<String, String> {
    let g = gl(3);
    let graph = DerangementGraph::of_group(&g, CAP).unwrap();
    let (sets, complete) = enumerate_maximal_intersecting(&graph, opts());
    ensure(complete, "incomplete")?;
    let reference = PrimeGl::new(3);
    let naive = naive_maximal_cliques(&reference.adjacency());
    let mut ours: Vec<Vec<[u32; 4]>> = sets.iter().map(|s| entries(&g, s)).collect();
    ours.sort_unstable();
    let mut theirs: Vec<Vec<[u32; 4]>> = naive
        .iter()
        .map(|c| {
            let mut v: Vec<[u32; 4]> = c.iter().map(|&i| reference.elems[i]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    theirs.sort_unstable();
    ensure(
        ours == theirs,
        format!("{} vs {} sets", ours.len(), theirs.len()),
    )?;
    Ok(format!("{} maximal sets, identical", ours.len()))
}

fn determinism() -> Result<String, String> {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_ekrlab"))
            .args(["verify", "--q", "4", "--which", "all"])
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    ensure(a.status.success(), format!("exit {:?}", a.status.code()))?;
    ensure(a.stdout == b.stdout, "reports differ")?;
    Ok(format!("{} bytes, identical", a.stdout.len()))
}

fn main() {
    let criteria: [(&str, Criterion); 12] = [
        ("EKR bound", ekr_bound),
        ("main theorem", main_theorem),
        ("refutation", refutation),
        ("fixed points", fixed_points),
        ("base machinery", bases),
        ("worked example", worked_example),
        ("Singer clique-coclique", singer),
        ("Hilton-Milner arithmetic", hilton_milner),
        ("transitive subgroups at q=3", main2),
        ("GL(3,2) probe", gl3),
        ("oracle equivalence", oracle_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
