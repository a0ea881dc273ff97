//! Reference computations for GL(2,p), p prime, written with plain modular
//! arithmetic and no library code.

#![allow(dead_code)]

use std::collections::BTreeSet;

pub type M2 = [u32; 4];
pub type V2 = [u32; 2];

pub struct PrimeGl {
    pub p: u32,
    /// Invertible matrices [a,b,c,d] in ascending order of a·p³+b·p²+c·p+d.
    pub elems: Vec<M2>,
    pub points: Vec<V2>,
}

impl PrimeGl {
    pub fn new(p: u32) -> PrimeGl {
        let mut elems = Vec::new();
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if !(a * d + p * p - b * c % p).is_multiple_of(p) {
                            elems.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        let points = (0..p)
            .flat_map(|x| (0..p).map(move |y| [x, y]))
            .filter(|v| *v != [0, 0])
            .collect();
        PrimeGl { p, elems, points }
    }

    pub fn apply(&self, m: &M2, v: &V2) -> V2 {
        let p = self.p;
        [
            (m[0] * v[0] + m[1] * v[1]) % p,
            (m[2] * v[0] + m[3] * v[1]) % p,
        ]
    }

    pub fn intersects(&self, a: &M2, b: &M2) -> bool {
        self.points
            .iter()
            .any(|v| self.apply(a, v) == self.apply(b, v))
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        self.elems
            .iter()
            .enumerate()
            .map(|(i, a)| {
                self.elems
                    .iter()
                    .enumerate()
                    .map(|(j, b)| i != j && self.intersects(a, b))
                    .collect()
            })
            .collect()
    }

    /// Lines avoiding the origin, each as its sorted point list.
    pub fn affine_lines_off_origin(&self) -> Vec<Vec<V2>> {
        let p = self.p;
        let mut lines = BTreeSet::new();
        for base in &self.points {
            for dir in &self.points {
                let mut pts: Vec<V2> = (0..p)
                    .map(|t| [(base[0] + t * dir[0]) % p, (base[1] + t * dir[1]) % p])
                    .collect();
                pts.sort_unstable();
                pts.dedup();
                if pts.len() == p as usize && !pts.contains(&[0, 0]) {
                    lines.insert(pts);
                }
            }
        }
        lines.into_iter().collect()
    }
}

/// Every maximal clique, found by depth-first search over all cliques in
/// increasing vertex order with no pivoting.
pub fn naive_maximal_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn walk(adj: &[Vec<bool>], r: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
        let n = adj.len();
        let extendable = (0..n).any(|v| !r.contains(&v) && r.iter().all(|&u| adj[u][v]));
        if !extendable {
            out.push(r.clone());
        }
        for v in start..n {
            if r.iter().all(|&u| adj[u][v]) {
                r.push(v);
                walk(adj, r, v + 1, out);
                r.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(adj, &mut Vec::new(), 0, &mut out);
    out.sort_unstable();
    out
}

fn is_maximal(g: &PrimeGl, set: &[usize]) -> bool {
    let intersecting = set.iter().all(|&a| {
        set.iter()
            .all(|&b| a == b || g.intersects(&g.elems[a], &g.elems[b]))
    });
    intersecting
        && (0..g.elems.len())
            .filter(|v| !set.contains(v))
            .all(|v| set.iter().any(|&u| !g.intersects(&g.elems[u], &g.elems[v])))
}

/// Distinct point cosets and line cosets that are maximal intersecting sets,
/// as sorted element index lists.
pub fn maximal_cosets(g: &PrimeGl) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut point = BTreeSet::new();
    for w in &g.points {
        for w2 in &g.points {
            let coset: Vec<usize> = (0..g.elems.len())
                .filter(|&i| g.apply(&g.elems[i], w) == *w2)
                .collect();
            point.insert(coset);
        }
    }
    let lines = g.affine_lines_off_origin();
    let image = |m: &M2, l: &[V2]| {
        let mut im: Vec<V2> = l.iter().map(|v| g.apply(m, v)).collect();
        im.sort_unstable();
        im
    };
    let mut line = BTreeSet::new();
    for l in &lines {
        for l2 in &lines {
            let coset: Vec<usize> = (0..g.elems.len())
                .filter(|&i| image(&g.elems[i], l) == *l2)
                .collect();
            line.insert(coset);
        }
    }
    let keep = |s: BTreeSet<Vec<usize>>| -> Vec<Vec<usize>> {
        s.into_iter()
            .filter(|c| !c.is_empty() && is_maximal(g, c))
            .collect()
    };
    (keep(point), keep(line))
}
