//! Intersecting sets of GL(2,q): the derangement graph, normalization,
//! classification into point-stabilizer and line-stabilizer cosets, bases,
//! the eigenline projection to a Kneser graph, and the Hilton–Milner bound.

use rayon::prelude::*;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::geometry::{o1_lines, o2_lines, AffLine, ProjLine};
use crate::group::{GroupTable, Subgroup};
use crate::linalg::{EigenSpace, Vect};

/// Default cap on derangement-graph vertices.
pub const DEFAULT_VERTEX_CAP: usize = 6_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EkrError {
    #[error("graph with {vertices} vertices exceeds the cap {cap}")]
    BoundExceeded { vertices: usize, cap: usize },
    #[error("elements {0} and {1} do not intersect")]
    NotIntersecting(u32, u32),
    #[error("set does not contain the identity")]
    NotNormalized,
    #[error("element {0} is not diagonalizable with eigenvalue 1")]
    NotDiagonalizable(u32),
    #[error("Hilton–Milner bound needs n ≥ 2k and k ≥ 1, got n={n}, k={k}")]
    DomainError { n: u64, k: u64 },
    #[error("empty set")]
    Empty,
    #[error("clique members {0} and {1} intersect")]
    InvalidClique(u32, u32),
    #[error("coclique members {0} and {1} do not intersect")]
    InvalidCoclique(u32, u32),
}

/// Vertices are group elements; g ~ h iff g⁻¹h fixes no point.
#[derive(Debug, Clone)]
pub struct DerangementGraph {
    vertices: Vec<u32>,
    rows: Vec<BitSet>,
}

impl DerangementGraph {
    pub fn new(g: &GroupTable, h: &Subgroup, cap: usize) -> Result<DerangementGraph, EkrError> {
        let n = h.order();
        if n > cap {
            return Err(EkrError::BoundExceeded { vertices: n, cap });
        }
        let mut local = vec![u32::MAX; g.order()];
        for (i, &id) in h.members.iter().enumerate() {
            local[id as usize] = i as u32;
        }
        let derangements: Vec<u32> = h
            .members
            .iter()
            .copied()
            .filter(|&d| g.is_derangement(d))
            .collect();
        // Left translation: the neighbours of v are v·D.
        let rows = h
            .members
            .par_iter()
            .map(|&v| {
                let mut row = BitSet::new(n);
                for &d in &derangements {
                    row.insert(local[g.mul(v, d) as usize] as usize);
                }
                row
            })
            .collect();
        Ok(DerangementGraph {
            vertices: h.members.clone(),
            rows,
        })
    }

    pub fn of_group(g: &GroupTable, cap: usize) -> Result<DerangementGraph, EkrError> {
        Self::new(g, &g.whole(), cap)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Group id of each vertex, ascending.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn local_index(&self, id: u32) -> Option<usize> {
        self.vertices.binary_search(&id).ok()
    }

    pub fn row(&self, v: usize) -> &BitSet {
        &self.rows[v]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count()
    }

    /// Rows of the complement without loops: a ~ b iff a ≠ b intersect.
    pub fn intersecting_rows(&self) -> Vec<BitSet> {
        let full = BitSet::full(self.len());
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = full.and_not(row);
                r.remove(i);
                r
            })
            .collect()
    }

    /// Whether no two of the given vertices (local indices) are adjacent.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.adjacent(a, b)))
    }
}

/// A pairwise-intersecting set of group elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectingSet {
    members: Vec<u32>,
    normalized: bool,
}

impl IntersectingSet {
    pub fn new(g: &GroupTable, members: &[u32]) -> Result<IntersectingSet, EkrError> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(EkrError::Empty);
        }
        if let Some((a, b)) = first_non_intersecting_pair(g, &members) {
            return Err(EkrError::NotIntersecting(a, b));
        }
        let normalized = members.binary_search(&g.identity()).is_ok();
        Ok(IntersectingSet {
            members,
            normalized,
        })
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Left-multiplies by the inverse of the smallest member, so the identity
    /// becomes a member. Returns the normalized set and the shift used.
    pub fn normalize(&self, g: &GroupTable) -> (IntersectingSet, u32) {
        let shift = g.inv(self.members[0]);
        let mut members: Vec<u32> = self.members.iter().map(|&m| g.mul(shift, m)).collect();
        members.sort_unstable();
        (
            IntersectingSet {
                members,
                normalized: true,
            },
            shift,
        )
    }
}

pub fn first_non_intersecting_pair(g: &GroupTable, members: &[u32]) -> Option<(u32, u32)> {
    members.iter().enumerate().find_map(|(i, &a)| {
        members[i + 1..]
            .iter()
            .find(|&&b| !g.intersects(a, b))
            .map(|&b| (a, b))
    })
}

pub fn is_intersecting_set(g: &GroupTable, members: &[u32]) -> bool {
    first_non_intersecting_pair(g, members).is_none()
}

/// Which canonical family contains a set, with every witness found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Point pairs (ω, ω′), as point indices, with the set inside V_{ω,ω′}.
    pub point_witnesses: Vec<(usize, usize)>,
    /// Line pairs (ℓ, ℓ′) of O2, as line indices, with every member mapping ℓ to ℓ′.
    pub line_witnesses: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PointCoset { from: usize, to: usize },
    LineCoset { from: usize, to: usize },
    Neither,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::PointCoset { .. } => "PointCoset",
            Verdict::LineCoset { .. } => "LineCoset",
            Verdict::Neither => "Neither",
        }
    }
}

impl Classification {
    /// Some line witness maps a line to itself, so the set lies in a plain stabilizer.
    pub fn in_line_stabilizer(&self) -> bool {
        self.line_witnesses.iter().any(|(a, b)| a == b)
    }

    /// Human-readable verdict, e.g. `PointCoset([1,0] -> [1,2])`.
    pub fn describe(&self, g: &GroupTable) -> String {
        let f = g.field();
        match self.verdict {
            Verdict::PointCoset { from, to } => {
                format!("PointCoset({} -> {})", g.points()[from], g.points()[to])
            }
            Verdict::LineCoset { from, to } => format!(
                "LineCoset({} -> {})",
                AffLine::from_index(from, f),
                AffLine::from_index(to, f)
            ),
            Verdict::Neither => "Neither".to_string(),
        }
    }
}

/// Point-coset witnesses: the candidate image of each ω is forced by the first member.
pub fn point_coset_witnesses(g: &GroupTable, members: &[u32]) -> Vec<(usize, usize)> {
    let Some(&first) = members.first() else {
        return Vec::new();
    };
    (0..g.points().len())
        .filter_map(|w| {
            let target = g.act(first, w);
            members
                .iter()
                .all(|&m| g.act(m, w) == target)
                .then_some((w, target))
        })
        .collect()
}

pub fn line_coset_witnesses(g: &GroupTable, members: &[u32]) -> Vec<(usize, usize)> {
    let Some(&first) = members.first() else {
        return Vec::new();
    };
    let f = g.field();
    o2_lines(f)
        .into_iter()
        .filter_map(|l| {
            let target = l.image(g.mat(first), f);
            members
                .iter()
                .all(|&m| l.image(g.mat(m), f) == target)
                .then_some((l.index(), target.index()))
        })
        .collect()
}

/// Classifies a set of GL(2,q) elements against both coset families.
pub fn classify(g: &GroupTable, members: &[u32]) -> Classification {
    let point_witnesses = point_coset_witnesses(g, members);
    let line_witnesses = line_coset_witnesses(g, members);
    let verdict = if let Some(&(from, to)) = point_witnesses.first() {
        Verdict::PointCoset { from, to }
    } else if let Some(&(from, to)) = line_witnesses.first() {
        Verdict::LineCoset { from, to }
    } else {
        Verdict::Neither
    };
    Classification {
        verdict,
        point_witnesses,
        line_witnesses,
    }
}

/// A pair of members with no common fixed point, plus a line fixed by both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseCertificate {
    pub pair: (u32, u32),
    pub common_line: Option<ProjLine>,
}

fn fixed_set(g: &GroupTable, id: u32) -> BitSet {
    let mut s = BitSet::new(g.points().len());
    for p in 0..g.points().len() {
        if g.act(id, p) == p {
            s.insert(p);
        }
    }
    s
}

/// All pairs of non-identity members with disjoint fixed-point sets.
pub fn find_bases(g: &GroupTable, set: &IntersectingSet) -> Result<Vec<BaseCertificate>, EkrError> {
    if !set.is_normalized() {
        return Err(EkrError::NotNormalized);
    }
    let others: Vec<u32> = set
        .members()
        .iter()
        .copied()
        .filter(|&m| m != g.identity())
        .collect();
    let fixed: Vec<BitSet> = others.iter().map(|&m| fixed_set(g, m)).collect();
    let mut bases = Vec::new();
    for i in 0..others.len() {
        for j in i + 1..others.len() {
            if !fixed[i].intersects(&fixed[j]) {
                let common_line = base_common_lines(g, others[i], others[j])
                    .into_iter()
                    .next();
                bases.push(BaseCertificate {
                    pair: (others[i], others[j]),
                    common_line,
                });
            }
        }
    }
    Ok(bases)
}

/// Lines through the origin mapped onto themselves by both elements.
pub fn base_common_lines(g: &GroupTable, a: u32, b: u32) -> Vec<ProjLine> {
    common_o1_lines(g, &[a, b])
}

/// Lines through the origin fixed setwise by every member.
pub fn common_o1_lines(g: &GroupTable, members: &[u32]) -> Vec<ProjLine> {
    let f = g.field();
    o1_lines(f)
        .into_iter()
        .filter(|l| members.iter().all(|&m| l.image(g.mat(m), f) == *l))
        .collect()
}

/// Lines avoiding the origin fixed setwise by every member.
pub fn common_o2_lines(g: &GroupTable, members: &[u32]) -> Vec<AffLine> {
    let f = g.field();
    o2_lines(f)
        .into_iter()
        .filter(|l| members.iter().all(|&m| l.image(g.mat(m), f) == *l))
        .collect()
}

/// Inclusion-minimal subsets of the non-identity members with no common
/// fixed point. Returns `None` if the search exceeds `node_budget` subsets.
pub fn minimal_fixed_point_free_subsets(
    g: &GroupTable,
    set: &IntersectingSet,
    node_budget: usize,
) -> Option<Vec<Vec<u32>>> {
    let others: Vec<u32> = set
        .members()
        .iter()
        .copied()
        .filter(|&m| m != g.identity())
        .collect();
    let fixed: Vec<BitSet> = others.iter().map(|&m| fixed_set(g, m)).collect();
    let mut out = Vec::new();
    let mut budget = node_budget;
    let mut chosen = Vec::new();
    let all = BitSet::full(g.points().len());
    if !mfpf_walk(&others, &fixed, 0, &all, &mut chosen, &mut out, &mut budget) {
        return None;
    }
    Some(out)
}

fn mfpf_walk(
    ids: &[u32],
    fixed: &[BitSet],
    start: usize,
    common: &BitSet,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<u32>>,
    budget: &mut usize,
) -> bool {
    for i in start..ids.len() {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let next = common.and(&fixed[i]);
        chosen.push(i);
        if next.is_empty() {
            // minimal iff dropping any one member restores a common fixed point
            let minimal = (0..chosen.len()).all(|skip| {
                chosen
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .fold(None::<BitSet>, |acc, (_, &idx)| {
                        Some(match acc {
                            Some(c) => c.and(&fixed[idx]),
                            None => fixed[idx].clone(),
                        })
                    })
                    .is_none_or(|c| !c.is_empty())
            });
            if minimal {
                out.push(chosen.iter().map(|&k| ids[k]).collect());
            }
        } else if !mfpf_walk(ids, fixed, i + 1, &next, chosen, out, budget) {
            chosen.pop();
            return false;
        }
        chosen.pop();
    }
    true
}

/// The unordered pair of eigenlines of a diagonalizable member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KneserVertex {
    pub lines: (usize, usize),
}

impl KneserVertex {
    pub fn meets(&self, other: &KneserVertex) -> bool {
        let (a, b) = self.lines;
        let (c, d) = other.lines;
        a == c || a == d || b == c || b == d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KneserProjection {
    /// (member id, vertex) for every non-identity member.
    pub images: Vec<(u32, KneserVertex)>,
    pub distinct: Vec<KneserVertex>,
    /// All vertex pairs share a line, i.e. the image is a coclique of K(q+1,2).
    pub coclique: bool,
    /// A line (O1 index) in every distinct vertex, if one exists.
    pub common_line: Option<usize>,
}

/// Maps each non-identity member to its pair of eigenlines.
pub fn kneser_project(g: &GroupTable, set: &IntersectingSet) -> Result<KneserProjection, EkrError> {
    if !set.is_normalized() {
        return Err(EkrError::NotNormalized);
    }
    let f = g.field();
    let mut images = Vec::new();
    for &m in set.members() {
        if m == g.identity() {
            continue;
        }
        let lines: Vec<usize> = g
            .mat(m)
            .eigen_lines(f)
            .into_iter()
            .filter_map(|(_, s)| match s {
                EigenSpace::Line(l) => Some(l.index()),
                EigenSpace::Whole => None,
            })
            .collect();
        if lines.len() != 2 || !g.mat(m).has_eigenvalue_one(f) {
            return Err(EkrError::NotDiagonalizable(m));
        }
        let pair = (lines[0].min(lines[1]), lines[0].max(lines[1]));
        images.push((m, KneserVertex { lines: pair }));
    }
    let mut distinct: Vec<KneserVertex> = images.iter().map(|(_, v)| *v).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let coclique = distinct
        .iter()
        .enumerate()
        .all(|(i, a)| distinct[i + 1..].iter().all(|b| a.meets(b)));
    let common_line = (0..=f.q() as usize).find(|&l| {
        !distinct.is_empty() && distinct.iter().all(|v| v.lines.0 == l || v.lines.1 == l)
    });
    Ok(KneserProjection {
        images,
        distinct,
        coclique,
        common_line,
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// 1 + C(n−1,k−1) − C(n−k−1,k−1).
pub fn hm_bound(n: u64, k: u64) -> Result<u64, EkrError> {
    if k == 0 || n < 2 * k {
        return Err(EkrError::DomainError { n, k });
    }
    Ok(1 + binomial(n - 1, k - 1) - binomial(n - k - 1, k - 1))
}

/// Brute-force coclique sizes of the Kneser graph K(n,2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KneserScan {
    pub max_coclique: usize,
    /// Largest coclique not contained in a star.
    pub max_non_canonical: usize,
}

/// Scans every subset of the 2-subsets of an n-set (n ≤ 7).
pub fn kneser_pair_cocliques(n: usize) -> KneserScan {
    assert!((2..=7).contains(&n), "exhaustive scan is limited to n ≤ 7");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let m = pairs.len();
    let disjoint: Vec<u32> = pairs
        .iter()
        .map(|&(a, b)| {
            pairs
                .iter()
                .enumerate()
                .filter(|(_, &(c, d))| a != c && a != d && b != c && b != d)
                .fold(0u32, |acc, (j, _)| acc | 1 << j)
        })
        .collect();
    let mut scan = KneserScan {
        max_coclique: 0,
        max_non_canonical: 0,
    };
    for subset in 0u32..(1 << m) {
        let ok = (0..m).all(|i| subset >> i & 1 == 0 || disjoint[i] & subset == 0);
        if !ok {
            continue;
        }
        let size = subset.count_ones() as usize;
        scan.max_coclique = scan.max_coclique.max(size);
        let in_star = (0..n)
            .any(|x| (0..m).all(|i| subset >> i & 1 == 0 || pairs[i].0 == x || pairs[i].1 == x));
        if !in_star {
            scan.max_non_canonical = scan.max_non_canonical.max(size);
        }
    }
    scan
}

/// Checks |clique|·|coclique| ≤ |G| after validating both sets.
pub fn clique_coclique_check(
    g: &GroupTable,
    clique: &[u32],
    coclique: &[u32],
) -> Result<bool, EkrError> {
    for (i, &a) in clique.iter().enumerate() {
        if let Some(&b) = clique[i + 1..].iter().find(|&&b| g.intersects(a, b)) {
            return Err(EkrError::InvalidClique(a, b));
        }
    }
    if let Some((a, b)) = first_non_intersecting_pair(g, coclique) {
        return Err(EkrError::InvalidCoclique(a, b));
    }
    Ok(clique.len() * coclique.len() <= g.order())
}

/// Point index of a vector in the group's action domain.
pub fn point_of(g: &GroupTable, v: &Vect) -> usize {
    g.point_index(v).expect("nonzero vector")
}
