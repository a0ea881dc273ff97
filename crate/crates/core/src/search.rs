//! Exhaustive clique search on the intersecting graph (the complement of the
//! derangement graph) and the verification campaigns built on top of it.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bitset::BitSet;
use crate::ekr::{
    base_common_lines, classify, clique_coclique_check, common_o1_lines, common_o2_lines,
    find_bases, hm_bound, is_intersecting_set, kneser_pair_cocliques, kneser_project,
    minimal_fixed_point_free_subsets, DerangementGraph, EkrError, IntersectingSet, Verdict,
};
use crate::geometry::{line_stabilizer, o1_lines, o2_lines, AffLine, ProjLine};
use crate::group::{singer_cycle, Domain, GroupTable, Subgroup};
use crate::linalg::{Mat, Vect};

/// Default wall-clock budget per campaign.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    pub deadline: Option<Instant>,
}

impl SearchOptions {
    pub fn with_timeout(timeout: Duration) -> SearchOptions {
        SearchOptions {
            deadline: Some(Instant::now() + timeout),
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Maximal cliques as sorted local vertex lists, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueEnumeration {
    pub cliques: Vec<Vec<usize>>,
    pub complete: bool,
}

struct Ctx<'a> {
    rows: &'a [BitSet],
    opts: SearchOptions,
    aborted: &'a AtomicBool,
    ticks: usize,
}

impl Ctx<'_> {
    fn should_stop(&mut self) -> bool {
        self.ticks += 1;
        if self.ticks % 1024 == 1 && self.opts.expired() {
            self.aborted.store(true, Ordering::Relaxed);
        }
        self.aborted.load(Ordering::Relaxed)
    }
}

/// Pivot: the vertex of P ∪ X with most neighbours in P, smallest index on ties.
fn choose_pivot(rows: &[BitSet], p: &BitSet, x: &BitSet) -> usize {
    let mut best: Option<(usize, usize)> = None;
    for u in p.iter().chain(x.iter()) {
        let score = rows[u].and_count(p);
        match best {
            Some((s, b)) if score < s || (score == s && u > b) => {}
            _ => best = Some((score, u)),
        }
    }
    best.map_or(0, |(_, u)| u)
}

fn expand(
    ctx: &mut Ctx,
    r: &mut Vec<usize>,
    mut p: BitSet,
    mut x: BitSet,
    emit: &mut dyn FnMut(&[usize]),
) {
    if ctx.should_stop() {
        return;
    }
    if p.is_empty() {
        if x.is_empty() {
            let mut clique = r.clone();
            clique.sort_unstable();
            emit(&clique);
        }
        return;
    }
    let pivot = choose_pivot(ctx.rows, &p, &x);
    let branch: Vec<usize> = p.and_not(&ctx.rows[pivot]).iter().collect();
    for v in branch {
        r.push(v);
        let row = &ctx.rows[v];
        expand(ctx, r, p.and(row), x.and(row), emit);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// Bron–Kerbosch with pivoting, folding each maximal clique (sorted) into a
/// per-branch accumulator. Top-level branches run in parallel; accumulators
/// come back in branch order and each branch is searched sequentially, so
/// the result does not depend on scheduling.
pub fn fold_maximal_cliques<A, I, V>(
    rows: &[BitSet],
    opts: SearchOptions,
    init: I,
    visit: V,
) -> (Vec<A>, bool)
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[usize]) + Sync,
{
    let n = rows.len();
    let aborted = AtomicBool::new(false);
    if n == 0 {
        let mut acc = init();
        visit(&mut acc, &[]);
        return (vec![acc], true);
    }
    let mut p = BitSet::full(n);
    let mut x = BitSet::new(n);
    let pivot = choose_pivot(rows, &p, &x);
    let mut branches = Vec::new();
    for v in p.and_not(&rows[pivot]).iter().collect::<Vec<_>>() {
        branches.push((v, p.and(&rows[v]), x.and(&rows[v])));
        p.remove(v);
        x.insert(v);
    }
    let accs = branches
        .into_par_iter()
        .map(|(v, p, x)| {
            let mut ctx = Ctx {
                rows,
                opts,
                aborted: &aborted,
                ticks: 0,
            };
            let mut acc = init();
            expand(&mut ctx, &mut vec![v], p, x, &mut |c| visit(&mut acc, c));
            acc
        })
        .collect();
    (accs, !aborted.load(Ordering::Relaxed))
}

/// All maximal cliques, sorted lexicographically.
pub fn maximal_cliques(rows: &[BitSet], opts: SearchOptions) -> CliqueEnumeration {
    let (parts, complete) =
        fold_maximal_cliques(rows, opts, Vec::new, |out: &mut Vec<Vec<usize>>, c| {
            out.push(c.to_vec())
        });
    let mut cliques: Vec<Vec<usize>> = parts.into_iter().flatten().collect();
    cliques.sort_unstable();
    CliqueEnumeration { cliques, complete }
}

/// Greedy sequential colouring; returns vertices with colour numbers, ascending by colour.
fn colour_order(rows: &[BitSet], p: &BitSet) -> Vec<(usize, usize)> {
    let mut uncoloured = p.clone();
    let mut order = Vec::with_capacity(p.count());
    let mut colour = 0;
    while !uncoloured.is_empty() {
        colour += 1;
        let mut q = uncoloured.clone();
        while let Some(v) = q.first() {
            q.remove(v);
            q = q.and_not(&rows[v]);
            uncoloured.remove(v);
            order.push((v, colour));
        }
    }
    order
}

fn bnb(ctx: &mut Ctx, r: &mut Vec<usize>, mut p: BitSet, best: &mut Vec<usize>, stop_at: usize) {
    if ctx.should_stop() || best.len() >= stop_at {
        return;
    }
    let order = colour_order(ctx.rows, &p);
    for &(v, colour) in order.iter().rev() {
        if r.len() + colour <= best.len() || best.len() >= stop_at {
            return;
        }
        r.push(v);
        let next = p.and(&ctx.rows[v]);
        if next.is_empty() {
            if r.len() > best.len() {
                *best = r.clone();
            }
        } else {
            bnb(ctx, r, next, best, stop_at);
        }
        r.pop();
        p.remove(v);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxClique {
    pub clique: Vec<usize>,
    pub complete: bool,
}

/// Branch-and-bound maximum clique with a colouring bound. With
/// `root = Some(v)` the search is restricted to cliques through `v`, which is
/// exhaustive for vertex-transitive graphs. `stop_at` ends the search once a
/// clique of that size is found.
pub fn max_clique(
    rows: &[BitSet],
    root: Option<usize>,
    stop_at: Option<usize>,
    opts: SearchOptions,
) -> MaxClique {
    let aborted = AtomicBool::new(false);
    let mut ctx = Ctx {
        rows,
        opts,
        aborted: &aborted,
        ticks: 0,
    };
    let (mut r, p) = match root {
        Some(v) => (vec![v], rows[v].clone()),
        None => (Vec::new(), BitSet::full(rows.len())),
    };
    let mut best = r.clone();
    bnb(
        &mut ctx,
        &mut r,
        p,
        &mut best,
        stop_at.unwrap_or(usize::MAX),
    );
    best.sort_unstable();
    MaxClique {
        clique: best,
        complete: !aborted.load(Ordering::Relaxed),
    }
}

/// Maximal intersecting sets of a group or subgroup, as sorted group ids.
pub fn enumerate_maximal_intersecting(
    graph: &DerangementGraph,
    opts: SearchOptions,
) -> (Vec<Vec<u32>>, bool) {
    let rows = graph.intersecting_rows();
    let result = maximal_cliques(&rows, opts);
    let sets = result
        .cliques
        .into_iter()
        .map(|c| c.into_iter().map(|v| graph.vertices()[v]).collect())
        .collect();
    (sets, result.complete)
}

/// Whether no vertex outside `set` (local indices) is adjacent to all of it.
pub fn is_maximal_clique(rows: &[BitSet], set: &[usize]) -> bool {
    let mut common = BitSet::full(rows.len());
    for &v in set {
        common = common.and(&rows[v]);
    }
    common.is_empty()
}

fn digest_sets(sets: &[Vec<u32>]) -> String {
    let mut h = Sha256::new();
    for s in sets {
        for id in s {
            h.update(id.to_le_bytes());
        }
        h.update(u32::MAX.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn matrices(g: &GroupTable, ids: &[u32]) -> Vec<String> {
    ids.iter().map(|&id| g.mat(id).to_string()).collect()
}

pub fn group_name(g: &GroupTable) -> String {
    format!("GL({},{})", g.n(), g.q())
}

/// Outcome of the maximal-intersecting-set campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueReport {
    pub group: String,
    pub q: u32,
    pub group_order: usize,
    pub expected_size: usize,
    pub total: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub point_coset: usize,
    pub line_coset: usize,
    pub neither: usize,
    /// LineCoset sets lying in a plain line stabilizer (a subgroup), not just a coset.
    pub line_stabilizer_plain: usize,
    pub oracle_point_cosets: usize,
    pub oracle_line_cosets: usize,
    pub oracle_agrees: bool,
    /// Size (q−1)(q−2)+1 of the previously claimed non-canonical bound.
    pub claimed_bound_size: usize,
    pub non_family_of_claimed_size: usize,
    pub neither_witnesses: Vec<Vec<String>>,
    pub wrong_size_witnesses: Vec<Vec<String>>,
    pub complete: bool,
    pub output_hash: String,
}

impl CliqueReport {
    pub fn passed(&self) -> bool {
        self.complete
            && self.neither == 0
            && self.wrong_size_witnesses.is_empty()
            && self.histogram.keys().all(|&s| s == self.expected_size)
            && self.oracle_agrees
    }
}

/// All maximal intersecting sets of GL(2,q), with their classification.
pub struct MainCampaign {
    pub graph: DerangementGraph,
    pub sets: Vec<Vec<u32>>,
    pub report: CliqueReport,
}

/// Distinct cosets V_{ω,ω′} and line cosets built directly from the action.
pub fn coset_families(g: &GroupTable) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let f = g.field();
    let mut points: HashMap<(usize, usize), Vec<u32>> = HashMap::new();
    for id in g.ids() {
        for w in 0..g.points().len() {
            points.entry((w, g.act(id, w))).or_default().push(id);
        }
    }
    let mut lines: HashMap<(usize, usize), Vec<u32>> = HashMap::new();
    let o2 = o2_lines(f);
    for id in g.ids() {
        for l in &o2 {
            lines
                .entry((l.index(), l.image(g.mat(id), f).index()))
                .or_default()
                .push(id);
        }
    }
    let dedup = |m: HashMap<(usize, usize), Vec<u32>>| {
        let mut v: Vec<Vec<u32>> = m.into_values().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    (dedup(points), dedup(lines))
}

pub fn verify_main_theorem(
    g: &GroupTable,
    vertex_cap: usize,
    opts: SearchOptions,
) -> Result<MainCampaign, EkrError> {
    let graph = DerangementGraph::of_group(g, vertex_cap)?;
    let (sets, complete) = enumerate_maximal_intersecting(&graph, opts);
    let q = g.q() as usize;
    let expected_size = q * (q - 1);
    let claimed_bound_size = (q - 1) * (q.saturating_sub(2)) + 1;

    let classes: Vec<_> = sets.par_iter().map(|s| classify(g, s)).collect();
    let mut report = CliqueReport {
        group: group_name(g),
        q: g.q(),
        group_order: g.order(),
        expected_size,
        total: sets.len(),
        histogram: BTreeMap::new(),
        point_coset: 0,
        line_coset: 0,
        neither: 0,
        line_stabilizer_plain: 0,
        oracle_point_cosets: 0,
        oracle_line_cosets: 0,
        oracle_agrees: false,
        claimed_bound_size,
        non_family_of_claimed_size: 0,
        neither_witnesses: Vec::new(),
        wrong_size_witnesses: Vec::new(),
        complete,
        output_hash: digest_sets(&sets),
    };
    let mut found_points = Vec::new();
    let mut found_lines = Vec::new();
    for (s, c) in sets.iter().zip(&classes) {
        *report.histogram.entry(s.len()).or_default() += 1;
        if s.len() != expected_size {
            report.wrong_size_witnesses.push(matrices(g, s));
        }
        match c.verdict {
            Verdict::PointCoset { .. } => {
                report.point_coset += 1;
                found_points.push(s.clone());
            }
            Verdict::LineCoset { .. } => {
                report.line_coset += 1;
                found_lines.push(s.clone());
                if c.in_line_stabilizer() {
                    report.line_stabilizer_plain += 1;
                }
            }
            Verdict::Neither => {
                report.neither += 1;
                report.neither_witnesses.push(matrices(g, s));
                if s.len() == claimed_bound_size {
                    report.non_family_of_claimed_size += 1;
                }
            }
        }
    }

    // Independent count: build every coset directly and keep the maximal ones.
    let rows = graph.intersecting_rows();
    let (point_family, line_family) = coset_families(g);
    let maximal = |family: Vec<Vec<u32>>| -> Vec<Vec<u32>> {
        family
            .into_iter()
            .filter(|s| {
                let local: Vec<usize> =
                    s.iter().map(|&id| graph.local_index(id).unwrap()).collect();
                is_intersecting_set(g, s) && is_maximal_clique(&rows, &local)
            })
            .collect()
    };
    let oracle_points = maximal(point_family);
    let oracle_lines = maximal(line_family);
    report.oracle_point_cosets = oracle_points.len();
    report.oracle_line_cosets = oracle_lines.len();
    report.oracle_agrees = oracle_points == found_points && oracle_lines == found_lines;

    Ok(MainCampaign {
        graph,
        sets,
        report,
    })
}

/// Maximum intersecting set size against the clique–coclique certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EkrBoundReport {
    pub group: String,
    pub q: u32,
    pub group_order: usize,
    pub expected: usize,
    pub max_intersecting: usize,
    pub witness: Vec<String>,
    pub singer: String,
    pub singer_clique_size: usize,
    pub singer_clique_valid: bool,
    /// |G| / |Singer subgroup|, an upper bound on intersecting sets.
    pub certificate_bound: usize,
    pub complete: bool,
}

impl EkrBoundReport {
    pub fn passed(&self) -> bool {
        self.complete
            && self.singer_clique_valid
            && self.max_intersecting == self.expected
            && self.certificate_bound == self.expected
    }
}

pub fn verify_ekr_bound(
    g: &GroupTable,
    graph: &DerangementGraph,
    opts: SearchOptions,
) -> EkrBoundReport {
    let q = g.q() as usize;
    let rows = graph.intersecting_rows();
    // The graph is a Cayley graph, so some maximum clique contains the identity.
    let root = graph.local_index(g.identity());
    let found = max_clique(&rows, root, None, opts);
    let witness: Vec<u32> = found.clique.iter().map(|&v| graph.vertices()[v]).collect();
    let singer = singer_cycle(g.field());
    let s = g.id_of(&singer).expect("Singer cycle is invertible");
    let cyclic = g.subgroup_closure(&[s]);
    let singer_clique_valid = cyclic.order() == q * q - 1
        && clique_coclique_check(g, &cyclic.members, &witness).is_ok_and(|ok| ok);
    EkrBoundReport {
        group: group_name(g),
        q: g.q(),
        group_order: g.order(),
        expected: q * (q - 1),
        max_intersecting: witness.len(),
        witness: matrices(g, &witness),
        singer: singer.to_string(),
        singer_clique_size: cyclic.order(),
        singer_clique_valid,
        certificate_bound: g.order() / cyclic.order(),
        complete: found.complete,
    }
}

/// Singer cycle facts for one field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingerReport {
    pub q: u32,
    pub matrix: String,
    pub order: usize,
    pub expected_order: usize,
    pub regular: bool,
    /// Distinct elements of the cyclic group pairwise fail to intersect.
    pub clique: bool,
    /// (q²−1)·q(q−1) = |GL(2,q)|.
    pub tight: bool,
}

impl SingerReport {
    pub fn passed(&self) -> bool {
        self.order == self.expected_order && self.regular && self.clique && self.tight
    }
}

pub fn singer_report(g: &GroupTable) -> SingerReport {
    let q = g.q() as usize;
    let m = singer_cycle(g.field());
    let s = g.id_of(&m).expect("invertible");
    let cyclic = g.subgroup_closure(&[s]);
    let regular = cyclic.order() == g.points().len() && g.is_transitive(&cyclic, Domain::Points);
    let clique = cyclic
        .members
        .iter()
        .enumerate()
        .all(|(i, &a)| cyclic.members[i + 1..].iter().all(|&b| !g.intersects(a, b)));
    SingerReport {
        q: g.q(),
        matrix: m.to_string(),
        order: g.element_order(s),
        expected_order: q * q - 1,
        regular,
        clique,
        tight: (q * q - 1) * q * (q - 1) == g.order(),
    }
}

/// Check of one transitive (or skipped) subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCheck {
    pub name: String,
    pub order: usize,
    pub generators: Vec<String>,
    pub transitive_on_points: bool,
    pub transitive_on_o2: bool,
    pub bound: usize,
    pub maximal_sets: usize,
    pub max_size: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub all_in_families: bool,
    pub complete: bool,
    pub skipped: Option<String>,
}

impl SubgroupCheck {
    pub fn passed(&self) -> bool {
        self.skipped.is_some()
            || (self.complete
                && self.transitive_on_o2
                && self.max_size <= self.bound
                && self.all_in_families)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Main2Report {
    pub q: u32,
    pub subgroups_examined: usize,
    pub transitive: usize,
    pub checks: Vec<SubgroupCheck>,
}

impl Main2Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(SubgroupCheck::passed)
    }
}

/// Subgroups examined when no lattice is available: SL(2,q), the Singer
/// cycle, its normalizer and the whole group.
pub fn builtin_subgroups(g: &GroupTable) -> Vec<(String, Subgroup)> {
    let s = g.id_of(&singer_cycle(g.field())).expect("invertible");
    vec![
        ("Singer cycle".to_string(), g.subgroup_closure(&[s])),
        ("Singer normalizer".to_string(), g.cyclic_normalizer(s)),
        ("SL(2,q)".to_string(), g.special_linear()),
        ("GL(2,q)".to_string(), g.whole()),
    ]
}

pub fn check_subgroup(
    g: &GroupTable,
    name: &str,
    h: &Subgroup,
    vertex_cap: usize,
    opts: SearchOptions,
) -> Result<SubgroupCheck, EkrError> {
    let q = g.q() as usize;
    let mut check = SubgroupCheck {
        name: name.to_string(),
        order: h.order(),
        generators: matrices(g, &h.generators),
        transitive_on_points: g.is_transitive(h, Domain::Points),
        transitive_on_o2: g.is_transitive(h, Domain::O2),
        bound: h.order() / (q * q - 1),
        maximal_sets: 0,
        max_size: 0,
        histogram: BTreeMap::new(),
        all_in_families: true,
        complete: true,
        skipped: None,
    };
    if !check.transitive_on_points {
        check.skipped = Some("not transitive on nonzero vectors".to_string());
        return Ok(check);
    }
    let graph = DerangementGraph::new(g, h, vertex_cap)?;
    let (sets, complete) = enumerate_maximal_intersecting(&graph, opts);
    check.complete = complete;
    check.maximal_sets = sets.len();
    for s in &sets {
        *check.histogram.entry(s.len()).or_default() += 1;
        check.max_size = check.max_size.max(s.len());
        // A GL-coset containing s meets H in a coset of the H-stabilizer.
        if classify(g, s).verdict == Verdict::Neither {
            check.all_in_families = false;
        }
    }
    Ok(check)
}

pub fn verify_main2(
    g: &GroupTable,
    subgroups: &[(String, Subgroup)],
    vertex_cap: usize,
    opts: SearchOptions,
) -> Result<Main2Report, EkrError> {
    let checks = subgroups
        .iter()
        .map(|(name, h)| check_subgroup(g, name, h, vertex_cap, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Main2Report {
        q: g.q(),
        subgroups_examined: subgroups.len(),
        transitive: checks.iter().filter(|c| c.skipped.is_none()).count(),
        checks,
    })
}

/// Maximal intersecting sets of GL(3,2) against point and hyperplane cosets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub group_order: usize,
    pub point_stabilizer_order: usize,
    pub hyperplane_stabilizer_order: usize,
    pub total: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub max_size: usize,
    pub in_point_family: usize,
    pub in_hyperplane_family: usize,
    pub outside_both: usize,
    pub witness: Option<Vec<String>>,
    pub witness_size: Option<usize>,
    pub complete: bool,
    pub output_hash: String,
}

/// The hyperplane {v : w·v = 0}, indexed by its nonzero normal w, maps under
/// g to the hyperplane with normal g⁻ᵀw.
fn hyperplane_image(g: &GroupTable, id: u32, normal: usize) -> usize {
    let inv_t = g.mat(g.inv(id)).transpose();
    let w = inv_t.mul_vec(&g.points()[normal], g.field());
    w.code(g.q()) as usize - 1
}

#[derive(Default)]
struct ProbeTally {
    histogram: BTreeMap<usize, usize>,
    total: usize,
    in_point_family: usize,
    in_hyperplane_family: usize,
    outside_both: usize,
    witness: Option<Vec<u32>>,
    digest: Sha256,
}

/// Streams the maximal sets of GL(3,2) through per-branch tallies; the set
/// count is in the millions, so the sets themselves are never stored.
pub fn gl3_probe(vertex_cap: usize, opts: SearchOptions) -> Result<ProbeReport, EkrError> {
    let g = GroupTable::gl3_2();
    let graph = DerangementGraph::of_group(&g, vertex_cap)?;
    let rows = graph.intersecting_rows();
    let npts = g.points().len();
    let mut hyperplane = vec![0usize; g.order() * npts];
    for id in g.ids() {
        for w in 0..npts {
            hyperplane[id as usize * npts + w] = hyperplane_image(&g, id, w);
        }
    }
    let plane_image = |id: u32, w: usize| hyperplane[id as usize * npts + w];
    let point_image = |id: u32, w: usize| g.act(id, w);
    let in_family = |s: &[u32], image: &dyn Fn(u32, usize) -> usize| {
        (0..npts).any(|w| {
            let target = image(s[0], w);
            s.iter().all(|&m| image(m, w) == target)
        })
    };
    let (tallies, complete) = fold_maximal_cliques(&rows, opts, ProbeTally::default, |t, c| {
        let s: Vec<u32> = c.iter().map(|&v| graph.vertices()[v]).collect();
        *t.histogram.entry(s.len()).or_default() += 1;
        t.total += 1;
        for id in &s {
            t.digest.update(id.to_le_bytes());
        }
        t.digest.update(u32::MAX.to_le_bytes());
        let p = in_family(&s, &point_image);
        let h = in_family(&s, &plane_image);
        t.in_point_family += p as usize;
        t.in_hyperplane_family += h as usize;
        if !p && !h {
            t.outside_both += 1;
            if t.witness.as_ref().is_none_or(|w| s < *w) {
                t.witness = Some(s);
            }
        }
    });
    let mut report = ProbeReport {
        group_order: g.order(),
        point_stabilizer_order: g.coset_v_idx(0, 0).len(),
        hyperplane_stabilizer_order: g.ids().filter(|&id| plane_image(id, 0) == 0).count(),
        total: 0,
        histogram: BTreeMap::new(),
        max_size: 0,
        in_point_family: 0,
        in_hyperplane_family: 0,
        outside_both: 0,
        witness: None,
        witness_size: None,
        complete,
        output_hash: String::new(),
    };
    let mut digest = Sha256::new();
    let mut witness: Option<Vec<u32>> = None;
    for t in tallies {
        for (size, count) in t.histogram {
            *report.histogram.entry(size).or_default() += count;
        }
        report.total += t.total;
        report.in_point_family += t.in_point_family;
        report.in_hyperplane_family += t.in_hyperplane_family;
        report.outside_both += t.outside_both;
        if let Some(w) = t.witness {
            if witness.as_ref().is_none_or(|best| w < *best) {
                witness = Some(w);
            }
        }
        digest.update(t.digest.finalize());
    }
    report.max_size = report.histogram.keys().copied().max().unwrap_or(0);
    report.witness_size = witness.as_ref().map(Vec::len);
    report.witness = witness.map(|w| matrices(&g, &w));
    report.output_hash = hex::encode(digest.finalize());
    Ok(report)
}

/// One lemma-level check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub anchor: String,
    pub passed: bool,
    pub detail: String,
}

fn lemma(name: &str, anchor: &str, passed: bool, detail: String) -> LemmaCheck {
    LemmaCheck {
        name: name.to_string(),
        anchor: anchor.to_string(),
        passed,
        detail,
    }
}

/// Fixed-point counts of non-identity elements: always 0 or q−1.
pub fn check_fixed_point_counts(g: &GroupTable) -> LemmaCheck {
    let q = g.q() as usize;
    let mut bad = Vec::new();
    let mut with_fixed = 0;
    for id in g.ids().filter(|&id| id != g.identity()) {
        let count = (0..g.points().len()).filter(|&w| g.act(id, w) == w).count();
        if count != 0 && count != q - 1 {
            bad.push(g.mat(id).to_string());
        } else if count > 0 {
            with_fixed += 1;
        }
    }
    lemma(
        "fixed-point counts",
        "prop:fixed-points",
        bad.is_empty(),
        format!(
            "{with_fixed} non-identity elements fix exactly {} points, the rest none; {} exceptions",
            q - 1,
            bad.len()
        ),
    )
}

/// Intersection is invariant under simultaneous conjugation.
pub fn check_change_of_basis(g: &GroupTable) -> LemmaCheck {
    let f = g.field();
    let conjugators: Vec<u32> = g.ids().step_by((g.order() / 7).max(1)).collect();
    let elements: Vec<u32> = g.ids().step_by((g.order() / 60).max(1)).collect();
    let mut checked = 0usize;
    let mut bad = 0usize;
    for &p in &conjugators {
        let pm = g.mat(p);
        let conj = |id: u32| {
            g.id_of(&g.mat(id).conjugate(pm, f).expect("invertible"))
                .unwrap()
        };
        for &a in &elements {
            for &b in &elements {
                checked += 1;
                if g.intersects(a, b) != g.intersects(conj(a), conj(b)) {
                    bad += 1;
                }
            }
        }
    }
    lemma(
        "change of basis preserves intersection",
        "lem:change-of-basis",
        bad == 0,
        format!("{checked} conjugated pairs, {bad} mismatches"),
    )
}

/// Line orbits, transitivity, orbit–stabilizer, and the stabilizer of the
/// line y = 1 as the intersecting subgroup of matrices [[k,a],[0,1]].
pub fn check_line_geometry(g: &GroupTable) -> LemmaCheck {
    let f = g.field();
    let q = g.q() as usize;
    let o1 = o1_lines(f).len() == q + 1;
    let o2 = o2_lines(f).len() == (q - 1) * (q + 1);
    let whole = g.whole();
    let transitive = g.is_transitive(&whole, Domain::O1) && g.is_transitive(&whole, Domain::O2);
    let base = ProjLine::from_dir(&Vect::xy(1, 0), f);
    let shifted = AffLine::through(base, &Vect::xy(0, 1), f).expect("[0,1] is off <[1,0]>");
    let stab = line_stabilizer(g, &shifted);
    let orbit_stabilizer = stab.len() * o2_lines(f).len() == g.order();
    let m: Vec<u32> = {
        let mut v: Vec<u32> = f
            .units()
            .flat_map(|k| f.elements().map(move |a| (k, a)))
            .map(|(k, a)| g.id_of(&Mat::m2(k.idx(), a.idx(), 0, 1)).unwrap())
            .collect();
        v.sort_unstable();
        v
    };
    let m_sub = Subgroup {
        members: m.clone(),
        generators: Vec::new(),
    };
    let m_ok = m == stab && m_sub.is_closed(g) && is_intersecting_set(g, &m);
    // stabilizers of O2 lines are conjugate: some element conjugates N_ℓ′ onto N_ℓ for each ℓ
    let conjugate_ok = o2_lines(f).iter().all(|l| {
        let target = line_stabilizer(g, l);
        let c = g
            .ids()
            .find(|&c| shifted.image(g.mat(c), f) == *l)
            .expect("transitive on O2");
        let mut conj: Vec<u32> = stab.iter().map(|&s| g.mul(g.mul(c, s), g.inv(c))).collect();
        conj.sort_unstable();
        conj == target
    });
    let passed = o1 && o2 && transitive && orbit_stabilizer && m_ok && conjugate_ok;
    lemma(
        "line orbits and stabilizers",
        "thm:EKR-GL",
        passed,
        format!(
            "|O1|={}, |O2|={}, transitive={transitive}, stabilizer of y=1 has order {} and equals the intersecting group [[k,a],[0,1]]: {m_ok}, stabilizers conjugate={conjugate_ok}",
            q + 1,
            (q - 1) * (q + 1),
            stab.len()
        ),
    )
}

/// Hilton–Milner arithmetic and a brute-force Kneser scan.
pub fn check_hilton_milner(q: u32) -> LemmaCheck {
    let arithmetic = (3..=16u64).all(|q| hm_bound(q + 1, 2) == Ok(3));
    let scans: Vec<_> = (4..=6).map(|n| (n, kneser_pair_cocliques(n))).collect();
    let scans_ok = scans
        .iter()
        .all(|(n, s)| s.max_coclique == n - 1 && s.max_non_canonical == 3);
    let this_q = hm_bound(q as u64 + 1, 2);
    lemma(
        "Hilton–Milner bound for K(q+1,2)",
        "eq:HM",
        arithmetic && scans_ok && (q < 3 || this_q == Ok(3)),
        format!(
            "hm_bound(q+1,2)=3 for q in 3..=16: {arithmetic}; Kneser scans {:?}",
            scans
                .iter()
                .map(|(n, s)| (n, s.max_coclique, s.max_non_canonical))
                .collect::<Vec<_>>()
        ),
    )
}

/// Intersecting subsets of the stabilizer of <[1,0]> that contain I: those
/// outside every point coset must fix a line of O2. Exhaustive for q ≤ 3,
/// subsets of size ≤ 3 otherwise. Also counts sets that fix an O1 line but no
/// O2 line (all of them canonical).
pub fn check_fix_line_line(g: &GroupTable) -> (LemmaCheck, usize) {
    let f = g.field();
    let base = ProjLine::from_dir(&Vect::xy(1, 0), f);
    let borel: Vec<u32> = g
        .ids()
        .filter(|&id| id != g.identity() && base.image(g.mat(id), f) == base)
        .filter(|&id| g.fixes_some_point(id))
        .collect();
    let exhaustive = g.q() <= 3;
    let mut subsets: Vec<Vec<u32>> = Vec::new();
    if exhaustive {
        for mask in 0u64..(1 << borel.len()) {
            subsets.push(
                (0..borel.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| borel[i])
                    .collect(),
            );
        }
    } else {
        for i in 0..borel.len() {
            subsets.push(vec![borel[i]]);
            for j in i + 1..borel.len() {
                subsets.push(vec![borel[i], borel[j]]);
            }
        }
        let pairs: Vec<(usize, usize)> = (0..borel.len())
            .flat_map(|i| (i + 1..borel.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| g.intersects(borel[i], borel[j]))
            .collect();
        for &(i, j) in &pairs {
            for k in j + 1..borel.len() {
                if g.intersects(borel[i], borel[k]) && g.intersects(borel[j], borel[k]) {
                    subsets.push(vec![borel[i], borel[j], borel[k]]);
                }
            }
        }
    }
    let results: Vec<(bool, bool)> = subsets
        .par_iter()
        .filter_map(|s| {
            let mut set = s.clone();
            set.push(g.identity());
            if !is_intersecting_set(g, &set) {
                return None;
            }
            let canonical = classify(g, &set)
                .point_witnesses
                .iter()
                .any(|(a, b)| a == b);
            let fixes_o2 = !common_o2_lines(g, &set).is_empty();
            Some((canonical, fixes_o2))
        })
        .collect();
    let examined = results.len();
    let violations = results.iter().filter(|(c, o2)| !c && !o2).count();
    let broader = results.iter().filter(|(_, o2)| !o2).count();
    (
        lemma(
            "fixing an O1 line forces an O2 line (non-canonical sets)",
            "lem:fix-line-line",
            violations == 0,
            format!(
                "{examined} intersecting sets containing I inside the stabilizer of <[1,0]> ({}); {violations} non-canonical without a common O2 line; {broader} canonical sets fix <[1,0]> but no O2 line",
                if exhaustive { "exhaustive" } else { "subsets of size at most 3 plus I" }
            ),
        ),
        broader,
    )
}

/// Base-related checks over a list of maximal intersecting sets.
pub fn check_bases(g: &GroupTable, sets: &[Vec<u32>]) -> Vec<LemmaCheck> {
    let q = g.q() as u64;
    let hm = hm_bound(q + 1, 2).unwrap_or(1) as usize;
    let mut base_iff_canonical = true;
    let mut non_canonical = 0;
    let mut bases_nonempty = true;
    let mut common_lines = true;
    let mut base_count = 0;
    let mut minimal_size_two = true;
    let mut minimal_checked = 0;
    let mut kneser_ok = true;
    for s in sets {
        let set = IntersectingSet::new(g, s).expect("maximal sets are intersecting");
        let (norm, _) = set.normalize(g);
        let canonical = classify(g, norm.members())
            .point_witnesses
            .iter()
            .any(|(a, b)| a == b);
        let bases = find_bases(g, &norm).expect("normalized");
        if bases.is_empty() != canonical {
            base_iff_canonical = false;
        }
        if canonical {
            continue;
        }
        non_canonical += 1;
        bases_nonempty &= !bases.is_empty();
        for b in &bases {
            base_count += 1;
            common_lines &= !base_common_lines(g, b.pair.0, b.pair.1).is_empty();
        }
        if let Some(minimal) = minimal_fixed_point_free_subsets(g, &norm, 1 << 22) {
            minimal_checked += 1;
            minimal_size_two &= minimal.iter().all(|m| m.len() == 2);
        }
        let diagonalizable: Vec<u32> = norm
            .members()
            .iter()
            .copied()
            .filter(|&m| m == g.identity() || g.mat(m).is_diagonalizable(g.field()))
            .collect();
        let sub = IntersectingSet::new(g, &diagonalizable).expect("subset of intersecting set");
        match kneser_project(g, &sub) {
            Ok(p) => {
                let forced = p.distinct.len() < 4 || p.common_line.is_some();
                let hm_ok = p.common_line.is_some() || p.distinct.len() <= hm;
                kneser_ok &= p.coclique && forced && hm_ok;
            }
            Err(_) => kneser_ok = false,
        }
    }
    // Cross-check: the whole non-canonical set fixes an O1 line.
    let whole_fix = sets.iter().all(|s| {
        let (norm, _) = IntersectingSet::new(g, s).unwrap().normalize(g);
        let canonical = classify(g, norm.members())
            .point_witnesses
            .iter()
            .any(|(a, b)| a == b);
        canonical || !common_o1_lines(g, norm.members()).is_empty()
    });
    vec![
        lemma(
            "no base iff canonical",
            "lem:base",
            base_iff_canonical,
            format!("{} maximal sets, {non_canonical} non-canonical after normalization", sets.len()),
        ),
        lemma(
            "bases fix a common O1 line",
            "thm:bases",
            bases_nonempty && common_lines && whole_fix,
            format!("{base_count} bases in {non_canonical} non-canonical sets; every base and every such set fixes a line through 0"),
        ),
        lemma(
            "minimal fixed-point-free subsets have size two",
            "lem:base-of-size2",
            minimal_size_two && minimal_checked == non_canonical,
            format!("{minimal_checked} of {non_canonical} sets searched exhaustively"),
        ),
        lemma(
            "eigenline pairs form a Kneser coclique",
            "thm:main",
            kneser_ok,
            format!("diagonalizable parts of {non_canonical} sets project to cocliques of K(q+1,2); Hilton–Milner bound {hm}"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldSpec;
    use proptest::prelude::*;

    fn gl(q: u32) -> GroupTable {
        GroupTable::gl2(&FieldSpec::of_order(q).unwrap()).unwrap()
    }

    fn random_rows(n: usize, edges: &[bool]) -> Vec<BitSet> {
        let mut rows = vec![BitSet::new(n); n];
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                if edges[k] {
                    rows[a].insert(b);
                    rows[b].insert(a);
                }
                k += 1;
            }
        }
        rows
    }

    fn brute_maximal(rows: &[BitSet]) -> Vec<Vec<usize>> {
        let n = rows.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let clique = set
                .iter()
                .enumerate()
                .all(|(i, &a)| set[i + 1..].iter().all(|&b| rows[a].contains(b)));
            if clique && is_maximal_clique(rows, &set) {
                out.push(set);
            }
        }
        out.sort_unstable();
        out
    }

    proptest! {
        #[test]
        fn pivoted_search_matches_brute_force(n in 1usize..11, seed in proptest::collection::vec(any::<bool>(), 45)) {
            let rows = random_rows(n, &seed);
            let found = maximal_cliques(&rows, SearchOptions::default());
            prop_assert!(found.complete);
            let expected = brute_maximal(&rows);
            prop_assert_eq!(&found.cliques, &expected);
            let best = max_clique(&rows, None, None, SearchOptions::default());
            prop_assert_eq!(best.clique.len(), expected.iter().map(Vec::len).max().unwrap());
        }
    }

    #[test]
    fn pivot_prefers_smallest_on_ties() {
        let rows = random_rows(4, &[false; 6]);
        assert_eq!(choose_pivot(&rows, &BitSet::full(4), &BitSet::new(4)), 0);
    }

    #[test]
    fn expired_deadline_reports_incomplete() {
        let g = gl(4);
        let graph = DerangementGraph::of_group(&g, 1000).unwrap();
        let opts = SearchOptions {
            deadline: Some(Instant::now()),
        };
        let (_, complete) = enumerate_maximal_intersecting(&graph, opts);
        assert!(!complete);
    }

    #[test]
    fn main_campaign_at_three() {
        let g = gl(3);
        let c = verify_main_theorem(&g, 1000, SearchOptions::default()).unwrap();
        assert!(c.report.passed(), "{:?}", c.report);
        assert_eq!(
            c.report.histogram.into_iter().collect::<Vec<_>>(),
            vec![(6, 64)]
        );
        assert_eq!(c.report.point_coset, 32);
        assert_eq!(c.report.line_coset, 32);
        assert_eq!(c.report.claimed_bound_size, 3);
    }

    #[test]
    fn ekr_bound_at_three_and_four() {
        for q in [3, 4] {
            let g = gl(q);
            let graph = DerangementGraph::of_group(&g, 1000).unwrap();
            let r = verify_ekr_bound(&g, &graph, SearchOptions::default());
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn singer_reports() {
        for q in [2, 3, 4, 5] {
            assert!(singer_report(&gl(q)).passed());
        }
    }

    #[test]
    fn regular_subgroup_has_trivial_bound() {
        let g = gl(3);
        let subs = builtin_subgroups(&g);
        let r = verify_main2(&g, &subs, 1000, SearchOptions::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        let singer = &r.checks[0];
        assert_eq!((singer.order, singer.bound, singer.max_size), (8, 1, 1));
        let sl = &r.checks[2];
        assert_eq!((sl.order, sl.bound, sl.max_size), (24, 3, 3));
    }

    #[test]
    fn lemma_checks_pass_at_three() {
        let g = gl(3);
        assert!(check_fixed_point_counts(&g).passed);
        assert!(check_change_of_basis(&g).passed);
        assert!(check_line_geometry(&g).passed);
        assert!(check_hilton_milner(3).passed);
        let (fix, broader) = check_fix_line_line(&g);
        assert!(fix.passed, "{fix:?}");
        assert!(broader > 0);
    }

    #[test]
    fn digest_depends_on_grouping() {
        assert_ne!(digest_sets(&[vec![1, 2]]), digest_sets(&[vec![1], vec![2]]));
    }
}
