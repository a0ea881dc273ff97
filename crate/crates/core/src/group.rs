//! Enumerated matrix groups GL(n,q) acting on nonzero vectors, with
//! stabilizers, Singer cycles, subgroup closure and the subgroup lattice.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::OnceLock;

use thiserror::Error;

use crate::ff::{Fe, FieldSpec};
use crate::geometry::{o1_lines, o2_lines};
use crate::linalg::{nonzero_vectors, LinalgError, Mat, Vect};

/// Default cap on the number of group elements to enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 100_000;
/// Default cap on the group order for the subgroup lattice.
pub const DEFAULT_LATTICE_CAP: usize = 1_000;
/// Groups up to this order get a full multiplication table on first use.
const PRODUCT_TABLE_CAP: usize = 2_048;
/// Largest |G|·|Ω| for which the action is tabulated.
const ACTION_TABLE_CAP: usize = 1 << 22;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group of order {order} exceeds the cap {cap}")]
    BoundExceeded { order: usize, cap: usize },
    #[error("the zero vector is not in the action domain")]
    ZeroVector,
    #[error("matrix {0} is not a group element")]
    NotMember(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// GL(n,q) with elements in row-major lexicographic order of entry indices.
pub struct GroupTable {
    field: FieldSpec,
    n: usize,
    elements: Vec<Mat>,
    lookup: Vec<u32>,
    inverse: Vec<u32>,
    identity: u32,
    points: Vec<Vect>,
    action: Option<Vec<u32>>,
    fixes_point: Vec<bool>,
    products: OnceLock<Vec<u32>>,
}

impl std::fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "GL({},{}) of order {}",
            self.n,
            self.field.q(),
            self.order()
        )
    }
}

/// |GL(n,q)| = Π (qⁿ − qⁱ).
pub fn gl_order(n: usize, q: u32) -> u128 {
    let qn = (q as u128).pow(n as u32);
    (0..n as u32).map(|i| qn - (q as u128).pow(i)).product()
}

impl GroupTable {
    pub fn gl2(field: &FieldSpec) -> Result<GroupTable, GroupError> {
        Self::gl(2, field, DEFAULT_ENUMERATION_CAP)
    }

    /// GL(3,2) acting on the seven nonzero vectors of GF(2)³.
    pub fn gl3_2() -> GroupTable {
        let f = FieldSpec::of_order(2).expect("GF(2)");
        Self::gl(3, &f, DEFAULT_ENUMERATION_CAP).expect("GL(3,2) is small")
    }

    pub fn gl(n: usize, field: &FieldSpec, cap: usize) -> Result<GroupTable, GroupError> {
        if !matches!(n, 2 | 3) {
            return Err(LinalgError::UnsupportedDimension(n).into());
        }
        let q = field.q();
        let order = gl_order(n, q);
        if order > cap as u128 {
            return Err(GroupError::BoundExceeded {
                order: order.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let codes = (q as usize).pow((n * n) as u32);
        let mut lookup = vec![NONE; codes];
        let mut elements = Vec::with_capacity(order as usize);
        for code in 0..codes as u32 {
            let m = Mat::from_code(code, n, q);
            if !m.det(field).is_zero() {
                lookup[code as usize] = elements.len() as u32;
                elements.push(m);
            }
        }
        debug_assert_eq!(elements.len() as u128, order);
        let id_of = |m: &Mat| lookup[m.code(q) as usize];
        let inverse: Vec<u32> = elements
            .iter()
            .map(|m| id_of(&m.inv(field).expect("invertible")))
            .collect();
        let identity = id_of(&Mat::identity(n));
        let points = nonzero_vectors(n, q);
        let action = (elements.len() * points.len() <= ACTION_TABLE_CAP).then(|| {
            elements
                .iter()
                .flat_map(|m| points.iter().map(|v| m.mul_vec(v, field).code(q) - 1))
                .collect()
        });
        let fixes_point = elements
            .iter()
            .map(|m| m.has_eigenvalue_one(field))
            .collect();
        Ok(GroupTable {
            field: field.clone(),
            n,
            elements,
            lookup,
            inverse,
            identity,
            points,
            action,
            fixes_point,
            products: OnceLock::new(),
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + Clone {
        0..self.elements.len() as u32
    }

    pub fn mat(&self, id: u32) -> &Mat {
        &self.elements[id as usize]
    }

    pub fn id_of(&self, m: &Mat) -> Option<u32> {
        if m.n() != self.n || m.entries().iter().any(|e| e.idx() >= self.q()) {
            return None;
        }
        let id = self.lookup[m.code(self.q()) as usize];
        (id != NONE).then_some(id)
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn inv(&self, id: u32) -> u32 {
        self.inverse[id as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let order = self.order();
        if order <= PRODUCT_TABLE_CAP {
            let table = self.products.get_or_init(|| {
                let mut t = Vec::with_capacity(order * order);
                for x in self.ids() {
                    for y in self.ids() {
                        t.push(self.mul_direct(x, y));
                    }
                }
                t
            });
            table[a as usize * order + b as usize]
        } else {
            self.mul_direct(a, b)
        }
    }

    fn mul_direct(&self, a: u32, b: u32) -> u32 {
        let m = self.mat(a).mul(self.mat(b), &self.field);
        self.lookup[m.code(self.q()) as usize]
    }

    /// The nonzero vectors of GF(q)ⁿ in code order; point index = code − 1.
    pub fn points(&self) -> &[Vect] {
        &self.points
    }

    pub fn point_index(&self, v: &Vect) -> Result<usize, GroupError> {
        if v.is_zero() {
            return Err(GroupError::ZeroVector);
        }
        Ok(v.code(self.q()) as usize - 1)
    }

    /// Image of point `pt` under element `id`.
    #[inline]
    pub fn act(&self, id: u32, pt: usize) -> usize {
        match &self.action {
            Some(t) => t[id as usize * self.points.len() + pt] as usize,
            None => {
                let v = self.mat(id).mul_vec(&self.points[pt], &self.field);
                v.code(self.q()) as usize - 1
            }
        }
    }

    /// Whether the element fixes at least one nonzero vector.
    #[inline]
    pub fn fixes_some_point(&self, id: u32) -> bool {
        self.fixes_point[id as usize]
    }

    pub fn is_derangement(&self, id: u32) -> bool {
        !self.fixes_some_point(id)
    }

    /// Whether g and h agree on some point, i.e. g⁻¹h is not a derangement.
    pub fn intersects(&self, g: u32, h: u32) -> bool {
        self.fixes_some_point(self.mul(self.inv(g), h))
    }

    pub fn element_order(&self, id: u32) -> usize {
        let mut x = id;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, id);
            k += 1;
        }
        k
    }

    pub fn point_stabilizer(&self, u: &Vect) -> Result<Subgroup, GroupError> {
        let pt = self.point_index(u)?;
        let members: Vec<u32> = self.ids().filter(|&g| self.act(g, pt) == pt).collect();
        Ok(Subgroup {
            members,
            generators: Vec::new(),
        })
    }

    /// V_{ω,ω′}: elements sending ω to ω′.
    pub fn coset_v(&self, from: &Vect, to: &Vect) -> Result<Vec<u32>, GroupError> {
        let (a, b) = (self.point_index(from)?, self.point_index(to)?);
        Ok(self.coset_v_idx(a, b))
    }

    pub fn coset_v_idx(&self, from: usize, to: usize) -> Vec<u32> {
        self.ids().filter(|&g| self.act(g, from) == to).collect()
    }

    pub fn subgroup_closure(&self, generators: &[u32]) -> Subgroup {
        let mut seen = vec![false; self.order()];
        seen[self.identity as usize] = true;
        let mut members = vec![self.identity];
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in generators {
                let y = self.mul(x, g);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        members.sort_unstable();
        let mut generators = generators.to_vec();
        generators.sort_unstable();
        generators.dedup();
        Subgroup {
            members,
            generators,
        }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            members: self.ids().collect(),
            generators: Vec::new(),
        }
    }

    pub fn special_linear(&self) -> Subgroup {
        let members = self
            .ids()
            .filter(|&g| self.mat(g).det(&self.field) == Fe::ONE)
            .collect();
        Subgroup {
            members,
            generators: Vec::new(),
        }
    }

    /// Normalizer of the cyclic group generated by `id`.
    pub fn cyclic_normalizer(&self, id: u32) -> Subgroup {
        let cyclic = self.subgroup_closure(&[id]);
        let members = self
            .ids()
            .filter(|&g| cyclic.contains(self.mul(self.mul(g, id), self.inv(g))))
            .collect();
        Subgroup {
            members,
            generators: Vec::new(),
        }
    }

    /// Every subgroup, found by extending known subgroups one element at a time.
    pub fn all_subgroups(&self, cap: usize) -> Result<Vec<Subgroup>, GroupError> {
        if self.order() > cap {
            return Err(GroupError::BoundExceeded {
                order: self.order(),
                cap,
            });
        }
        let trivial = self.subgroup_closure(&[]);
        let mut seen: HashSet<Vec<u32>> = HashSet::from([trivial.members.clone()]);
        let mut found = vec![trivial];
        let mut next = 0;
        while next < found.len() {
            let base = found[next].clone();
            next += 1;
            for g in self.ids() {
                if base.contains(g) {
                    continue;
                }
                let mut gens = base.generators.clone();
                gens.push(g);
                let ext = self.subgroup_closure(&gens);
                if seen.insert(ext.members.clone()) {
                    found.push(ext);
                }
            }
        }
        found.sort_by(|a, b| a.order().cmp(&b.order()).then(a.members.cmp(&b.members)));
        Ok(found)
    }

    /// Whether the subgroup acts transitively on the given domain.
    pub fn is_transitive(&self, h: &Subgroup, domain: Domain) -> bool {
        self.orbit_of_first(h, domain) == self.domain_size(domain)
    }

    pub fn domain_size(&self, domain: Domain) -> usize {
        let q = self.q() as usize;
        match domain {
            Domain::Points => self.points.len(),
            Domain::O1 => q + 1,
            Domain::O2 => (q - 1) * (q + 1),
        }
    }

    fn orbit_of_first(&self, h: &Subgroup, domain: Domain) -> usize {
        let f = &self.field;
        match domain {
            Domain::Points => {
                let orbit: BTreeSet<usize> = h.members.iter().map(|&g| self.act(g, 0)).collect();
                orbit.len()
            }
            Domain::O1 => {
                assert_eq!(self.n, 2);
                let start = o1_lines(f)[0];
                let orbit: BTreeSet<usize> = h
                    .members
                    .iter()
                    .map(|&g| start.image(self.mat(g), f).index())
                    .collect();
                orbit.len()
            }
            Domain::O2 => {
                assert_eq!(self.n, 2);
                let start = o2_lines(f)[0];
                let orbit: BTreeSet<usize> = h
                    .members
                    .iter()
                    .map(|&g| start.image(self.mat(g), f).index())
                    .collect();
                orbit.len()
            }
        }
    }
}

/// The action domains used for transitivity tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Points,
    O1,
    O2,
}

/// A subgroup, as sorted member ids of its parent table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub members: Vec<u32>,
    pub generators: Vec<u32>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn is_closed(&self, g: &GroupTable) -> bool {
        self.members.iter().all(|&a| {
            self.contains(g.inv(a)) && self.members.iter().all(|&b| self.contains(g.mul(a, b)))
        })
    }
}

/// Companion matrix [[0,−c₀],[1,−c₁]] of the first primitive x²+c₁x+c₀,
/// scanning (c₀, c₁) lexicographically.
pub fn singer_cycle(f: &FieldSpec) -> Mat {
    let target = (f.q() as u64).pow(2) - 1;
    for c0 in f.units() {
        for c1 in f.elements() {
            let m = Mat::m2(0, f.neg(c0).idx(), 1, f.neg(c1).idx());
            if matrix_order(&m, f) == target {
                return m;
            }
        }
    }
    unreachable!("GF(q²)* is cyclic, so a primitive quadratic exists")
}

/// Multiplicative order of an invertible matrix, without a group table.
pub fn matrix_order(m: &Mat, f: &FieldSpec) -> u64 {
    let id = Mat::identity(m.n());
    let mut x = *m;
    let mut k = 1;
    while x != id {
        x = x.mul(m, f);
        k += 1;
    }
    k
}
