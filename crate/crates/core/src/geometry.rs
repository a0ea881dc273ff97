//! Lines of the affine plane AG(2,q) and the GL(2,q) action on them.
//!
//! Lines through the origin (`ProjLine`, the orbit O1) and lines avoiding it
//! (`AffLine`, the orbit O2) are kept as separate types. A line avoiding the
//! origin is identified by its direction and the nonzero value `c` of the
//! linear form that vanishes on that direction:
//!
//! * direction `[1,t]`: form `y − t·x`, canonical offset `[0,c]`
//! * direction `[0,1]`: form `x`, canonical offset `[c,0]`
//!
//! In both cases the offset is the smallest point of the line in code order.

use std::fmt;

use crate::ff::{Fe, FieldSpec};
use crate::group::GroupTable;
use crate::linalg::{LinalgError, Mat, Vect};

/// A one-dimensional subspace of GF(q)², with normalized direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProjLine {
    dir: Vect,
    index: usize,
}

impl ProjLine {
    /// The line spanned by a nonzero vector.
    pub fn from_dir(v: &Vect, f: &FieldSpec) -> ProjLine {
        assert!(!v.is_zero(), "a line needs a nonzero direction");
        let dir = v.normalized(f);
        let index = if dir.coords()[0] == Fe::ONE {
            dir.coords()[1].idx() as usize
        } else {
            f.q() as usize
        };
        ProjLine { dir, index }
    }

    pub fn from_index(index: usize, f: &FieldSpec) -> ProjLine {
        let q = f.q() as usize;
        assert!(index <= q);
        let dir = if index == q {
            Vect::xy(0, 1)
        } else {
            Vect::xy(1, index as u32)
        };
        ProjLine { dir, index }
    }

    pub fn dir(&self) -> &Vect {
        &self.dir
    }

    /// Position in `o1_lines` order.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn contains(&self, v: &Vect, f: &FieldSpec) -> bool {
        self.form(v, f).is_zero()
    }

    /// The linear form vanishing on this line.
    fn form(&self, v: &Vect, f: &FieldSpec) -> Fe {
        let (x, y) = (v.coords()[0], v.coords()[1]);
        if self.index == f.q() as usize {
            x
        } else {
            f.sub(y, f.mul(self.dir.coords()[1], x))
        }
    }

    /// All q points, including the origin, in code order.
    pub fn points(&self, f: &FieldSpec) -> Vec<Vect> {
        let mut pts: Vec<Vect> = f.elements().map(|t| self.dir.scale(t, f)).collect();
        pts.sort_by_key(|v| v.code(f.q()));
        pts
    }

    pub fn image(&self, a: &Mat, f: &FieldSpec) -> ProjLine {
        ProjLine::from_dir(&a.mul_vec(&self.dir, f), f)
    }

    /// Parses `<[x,y]>`.
    pub fn parse(s: &str, f: &FieldSpec) -> Result<ProjLine, LinalgError> {
        let inner = s
            .trim()
            .strip_prefix('<')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(|| LinalgError::Parse(s.to_string()))?;
        let v = checked_vect(inner, f)?;
        if v.is_zero() {
            return Err(LinalgError::Parse(s.to_string()));
        }
        Ok(ProjLine::from_dir(&v, f))
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.dir)
    }
}

fn checked_vect(s: &str, f: &FieldSpec) -> Result<Vect, LinalgError> {
    let v = Vect::parse(s)?;
    if v.n() != 2 {
        return Err(LinalgError::Parse(s.to_string()));
    }
    for c in v.coords() {
        f.elem(c.idx())?;
    }
    Ok(v)
}

/// A line of AG(2,q) not containing the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffLine {
    dir: ProjLine,
    offset: Vect,
    index: usize,
}

impl AffLine {
    /// The line with direction `dir` through `point`; `None` if it passes through 0.
    pub fn through(dir: ProjLine, point: &Vect, f: &FieldSpec) -> Option<AffLine> {
        let c = dir.form(point, f);
        (!c.is_zero()).then(|| AffLine::from_form_value(dir, c, f))
    }

    fn from_form_value(dir: ProjLine, c: Fe, f: &FieldSpec) -> AffLine {
        let q = f.q() as usize;
        let offset = if dir.index == q {
            Vect::xy(c.idx(), 0)
        } else {
            Vect::xy(0, c.idx())
        };
        AffLine {
            dir,
            offset,
            index: dir.index * (q - 1) + c.idx() as usize - 1,
        }
    }

    pub fn from_index(index: usize, f: &FieldSpec) -> AffLine {
        let q = f.q() as usize;
        let dir = ProjLine::from_index(index / (q - 1), f);
        AffLine::from_form_value(dir, Fe((index % (q - 1) + 1) as u32), f)
    }

    pub fn dir(&self) -> &ProjLine {
        &self.dir
    }

    /// Canonical representative: the smallest point on the line.
    pub fn offset(&self) -> &Vect {
        &self.offset
    }

    /// Position in `o2_lines` order.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn contains(&self, v: &Vect, f: &FieldSpec) -> bool {
        self.dir.form(v, f) == self.dir.form(&self.offset, f)
    }

    pub fn points(&self, f: &FieldSpec) -> Vec<Vect> {
        let mut pts: Vec<Vect> = f
            .elements()
            .map(|t| self.dir.dir.scale(t, f).add(&self.offset, f))
            .collect();
        pts.sort_by_key(|v| v.code(f.q()));
        pts
    }

    pub fn image(&self, a: &Mat, f: &FieldSpec) -> AffLine {
        let dir = self.dir.image(a, f);
        AffLine::through(dir, &a.mul_vec(&self.offset, f), f)
            .expect("an invertible map sends lines avoiding 0 to lines avoiding 0")
    }

    /// Parses `[x,y]+<[u,v]>`.
    pub fn parse(s: &str, f: &FieldSpec) -> Result<AffLine, LinalgError> {
        let bad = || LinalgError::Parse(s.to_string());
        let (point, line) = s.trim().split_once('+').ok_or_else(bad)?;
        let point = checked_vect(point, f)?;
        let dir = ProjLine::parse(line, f)?;
        AffLine::through(dir, &point, f).ok_or_else(bad)
    }
}

impl fmt::Display for AffLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.offset, self.dir)
    }
}

/// Any line of AG(2,q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Line {
    Through0(ProjLine),
    Avoiding0(AffLine),
}

impl Line {
    pub fn points(&self, f: &FieldSpec) -> Vec<Vect> {
        match self {
            Line::Through0(l) => l.points(f),
            Line::Avoiding0(l) => l.points(f),
        }
    }

    pub fn contains(&self, v: &Vect, f: &FieldSpec) -> bool {
        match self {
            Line::Through0(l) => l.contains(v, f),
            Line::Avoiding0(l) => l.contains(v, f),
        }
    }

    pub fn image(&self, a: &Mat, f: &FieldSpec) -> Line {
        match self {
            Line::Through0(l) => Line::Through0(l.image(a, f)),
            Line::Avoiding0(l) => Line::Avoiding0(l.image(a, f)),
        }
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Line::Through0(l) => l.fmt(f),
            Line::Avoiding0(l) => l.fmt(f),
        }
    }
}

/// The q+1 lines through the origin: `<[1,0]>, <[1,1]>, …, <[1,q−1]>, <[0,1]>`.
pub fn o1_lines(f: &FieldSpec) -> Vec<ProjLine> {
    (0..=f.q() as usize)
        .map(|i| ProjLine::from_index(i, f))
        .collect()
}

/// The (q−1)(q+1) lines avoiding the origin, direction-major.
pub fn o2_lines(f: &FieldSpec) -> Vec<AffLine> {
    let count = (f.q() as usize - 1) * (f.q() as usize + 1);
    (0..count).map(|i| AffLine::from_index(i, f)).collect()
}

/// `ℓ` together with its q−1 translates.
pub fn parallel_class(l: &ProjLine, f: &FieldSpec) -> Vec<Line> {
    std::iter::once(Line::Through0(*l))
        .chain(
            f.units()
                .map(|c| Line::Avoiding0(AffLine::from_form_value(*l, c, f))),
        )
        .collect()
}

/// Group elements mapping `l` onto itself, ascending by id.
pub fn line_stabilizer(g: &GroupTable, l: &AffLine) -> Vec<u32> {
    line_coset(g, l, l)
}

/// Group elements mapping `from` onto `to`, ascending by id.
pub fn line_coset(g: &GroupTable, from: &AffLine, to: &AffLine) -> Vec<u32> {
    let f = g.field();
    g.ids()
        .filter(|&id| from.image(g.mat(id), f) == *to)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u32) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(o1_lines(&gf(3)).len(), 4);
        assert_eq!(o1_lines(&gf(5)).len(), 6);
        assert_eq!(o2_lines(&gf(3)).len(), 8);
        assert_eq!(o2_lines(&gf(4)).len(), 15);
        let f = gf(5);
        let first: Vec<String> = o1_lines(&f).iter().map(|l| l.to_string()).collect();
        assert_eq!(first[0], "<[1,0]>");
        assert_eq!(first[5], "<[0,1]>");
    }

    #[test]
    fn o1_partitions_nonzero_points() {
        for q in [2, 3, 4, 5, 7] {
            let f = gf(q);
            for v in crate::linalg::nonzero_vectors(2, q) {
                let hits = o1_lines(&f).iter().filter(|l| l.contains(&v, &f)).count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn o2_lines_avoid_origin_and_are_canonical() {
        for q in [3, 4, 5] {
            let f = gf(q);
            let zero = Vect::xy(0, 0);
            for (i, l) in o2_lines(&f).iter().enumerate() {
                assert_eq!(l.index(), i);
                assert!(!l.contains(&zero, &f));
                assert_eq!(l.points(&f)[0], *l.offset());
                assert_eq!(l.points(&f).len(), q as usize);
            }
        }
    }

    #[test]
    fn parallel_classes() {
        let f = gf(3);
        let class = parallel_class(&ProjLine::from_dir(&Vect::xy(1, 0), &f), &f);
        assert_eq!(class.len(), 3);
        let mut covered: Vec<u32> = class
            .iter()
            .flat_map(|l| l.points(&f))
            .map(|v| v.code(3))
            .collect();
        covered.sort_unstable();
        assert_eq!(covered, (0..9).collect::<Vec<_>>());
        for q in [4, 5, 7] {
            let f = gf(q);
            for l in o1_lines(&f) {
                assert_eq!(parallel_class(&l, &f).len(), q as usize);
            }
        }
    }

    #[test]
    fn affine_plane_axioms() {
        for q in [2, 3, 4, 5, 7] {
            let f = gf(q);
            let mut lines: Vec<Line> = o1_lines(&f).into_iter().map(Line::Through0).collect();
            lines.extend(o2_lines(&f).into_iter().map(Line::Avoiding0));
            assert_eq!(lines.len() as u32, q * q + q);
            let point_sets: Vec<Vec<u32>> = lines
                .iter()
                .map(|l| l.points(&f).iter().map(|v| v.code(q)).collect())
                .collect();
            assert!(point_sets.iter().all(|s| s.len() == q as usize));
            for a in 0..q * q {
                for b in a + 1..q * q {
                    let common = point_sets
                        .iter()
                        .filter(|s| s.contains(&a) && s.contains(&b))
                        .count();
                    assert_eq!(common, 1, "points {a},{b} over GF({q})");
                }
            }
        }
    }

    #[test]
    fn line_image_examples() {
        let f = gf(5);
        let l = ProjLine::from_dir(&Vect::xy(1, 0), &f);
        let shifted = AffLine::through(l, &Vect::xy(0, 1), &f).unwrap();
        assert_eq!(shifted.image(&Mat::identity(2), &f), shifted);
        assert_eq!(l.image(&Mat::m2(2, 1, 0, 1), &f), l);
        assert_eq!(shifted.image(&Mat::m2(1, 1, 0, 1), &f), shifted);
        // (A − I)[0,1] = [0,2] is not on <[1,0]>, so this element moves the line.
        assert_ne!(shifted.image(&Mat::m2(1, 0, 0, 3), &f), shifted);
    }

    #[test]
    fn text_format() {
        let f = gf(5);
        let l = ProjLine::parse("<[1,4]>", &f).unwrap();
        assert_eq!(l.to_string(), "<[1,4]>");
        assert_eq!(ProjLine::parse("<[2,3]>", &f).unwrap(), l);
        let a = AffLine::parse("[0,1]+<[1,0]>", &f).unwrap();
        assert_eq!(a.to_string(), "[0,1]+<[1,0]>");
        assert_eq!(AffLine::parse("[3,1]+<[1,0]>", &f).unwrap(), a);
        assert!(AffLine::parse("[3,0]+<[1,0]>", &f).is_err());
        assert!(ProjLine::parse("<[0,0]>", &f).is_err());
    }
}
