//! The Bruhat-Tits tree of `GL2(Q_p)`.
//!
//! A vertex at distance `n` from the root `[Z_p ⊕ Z_p]` is encoded by a point
//! of `P^1(Z/p^n)`: the lattice `Z_p u + p^n Z_p^2` for a primitive vector `u`
//! reducing to that point. Points are written `(1 : y)` with `0 <= y < p^n` or
//! `(x : 1)` with `p | x`. Reducing the point mod `p^(n-1)` gives the parent.

use std::fmt;

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::PadicConfig;
use crate::projline::GL2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Root,
    /// `(1 : y)`
    Row(u64),
    /// `(x : 1)` with `p | x`
    Col(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub n: u32,
    pub coord: Coord,
}

impl Vertex {
    pub const ROOT: Vertex = Vertex { n: 0, coord: Coord::Root };

    pub fn row(n: u32, y: u64) -> Vertex {
        if n == 0 {
            Vertex::ROOT
        } else {
            Vertex { n, coord: Coord::Row(y) }
        }
    }

    pub fn col(n: u32, x: u64) -> Vertex {
        if n == 0 {
            Vertex::ROOT
        } else {
            Vertex { n, coord: Coord::Col(x) }
        }
    }

    /// `[(p^i) ⊕ Z_p]`, the `i`-th vertex of the standard ray.
    pub fn standard(i: u32) -> Vertex {
        Vertex::col(i, 0)
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn coord_string(&self, p: u32) -> String {
        let digits = |mut v: u64| -> String {
            (0..self.n)
                .map(|_| {
                    let d = (v % p as u64) as u32;
                    v /= p as u64;
                    std::char::from_digit(d, 36).unwrap()
                })
                .collect()
        };
        match self.coord {
            Coord::Root => "*".to_string(),
            Coord::Row(y) => format!("1:{}", digits(y)),
            Coord::Col(x) => format!("{}:1", digits(x)),
        }
    }

    pub fn label(&self, p: u32) -> String {
        format!("({}; {})", self.n, self.coord_string(p))
    }
}

/// An ordered pair of adjacent vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrientedEdge {
    pub src: Vertex,
    pub dst: Vertex,
}

impl OrientedEdge {
    pub fn reversed(&self) -> OrientedEdge {
        OrientedEdge { src: self.dst, dst: self.src }
    }
}

/// Chooses one orientation of every edge: from the endpoint nearer the root
/// to the farther one.
#[derive(Debug, Clone, Copy, Default)]
pub struct Orientation;

impl Orientation {
    pub fn orient(&self, a: Vertex, b: Vertex) -> OrientedEdge {
        if a.n < b.n {
            OrientedEdge { src: a, dst: b }
        } else {
            OrientedEdge { src: b, dst: a }
        }
    }

    /// `+1` at the source of the chosen orientation, `-1` at its target.
    pub fn sign(&self, e: &OrientedEdge, v: &Vertex) -> i32 {
        let e = self.orient(e.src, e.dst);
        if *v == e.src {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Simplex {
    Vertex(Vertex),
    Edge(OrientedEdge),
}

impl Simplex {
    pub fn vertices(&self) -> Vec<Vertex> {
        match self {
            Simplex::Vertex(v) => vec![*v],
            Simplex::Edge(e) => vec![e.src, e.dst],
        }
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Vertex", 2)?;
        st.serialize_field("n", &self.n)?;
        let coord = match self.coord {
            Coord::Root => vec![1u64, 1],
            Coord::Row(y) => vec![1, y],
            Coord::Col(x) => vec![x, 1],
        };
        st.serialize_field("coord", &coord)?;
        st.end()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coord {
            Coord::Root => write!(f, "(0; *)"),
            Coord::Row(y) => write!(f, "({}; 1:{y})", self.n),
            Coord::Col(x) => write!(f, "({}; {x}:1)", self.n),
        }
    }
}

/// Which congruence pattern to test in the standard frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pattern {
    Vertex,
    Edge,
}

/// `g = target_part * source_part` with `target_part` in the group of the
/// edge's target vertex and `source_part` in that of its source.
#[derive(Debug, Clone, Copy)]
pub struct EdgeFactors {
    pub target_part: GL2,
    pub source_part: GL2,
}

#[derive(Debug, Clone, Copy)]
pub struct BtTree {
    cfg: PadicConfig,
}

impl BtTree {
    pub fn new(cfg: PadicConfig) -> Self {
        BtTree { cfg }
    }

    pub fn config(&self) -> PadicConfig {
        self.cfg
    }

    pub fn p(&self) -> u32 {
        self.cfg.p()
    }

    fn pn(&self, n: u32) -> u64 {
        self.cfg.pow_p(n)
    }

    /// Columns of a basis of a lattice in the class of `v`.
    pub fn basis(&self, v: &Vertex) -> GL2 {
        let c = self.cfg;
        let pn = c.p_power(v.n as i64);
        match v.coord {
            Coord::Root => GL2::identity(c),
            Coord::Row(y) => GL2::new(c.one(), c.zero(), c.int(y as i64), pn),
            Coord::Col(x) => GL2::new(c.int(x as i64), pn, c.one(), c.zero()),
        }
    }

    /// The vertex of the lattice spanned by the columns of `m`.
    pub fn vertex_canonical(&self, m: &GL2) -> Result<Vertex> {
        let det = m.det();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let s = m.min_val();
        let m = m.scale(self.cfg.p_power(-s));
        let n = m.det().val();
        if n == 0 {
            return Ok(Vertex::ROOT);
        }
        let n = n as u32;
        let cols = [(m.a, m.c), (m.b, m.d)];
        for (x, y) in cols {
            if x.is_unit() {
                let t = y.checked_div(&x)?;
                return Ok(Vertex::row(n, t.to_u64_mod(n)?));
            }
            if y.is_unit() {
                let t = x.checked_div(&y)?;
                return Ok(Vertex::col(n, t.to_u64_mod(n)?));
            }
        }
        Err(Error::Invalid("no primitive column after scaling".into()))
    }

    pub fn act(&self, g: &GL2, v: &Vertex) -> Result<Vertex> {
        self.vertex_canonical(&(*g * self.basis(v)))
    }

    pub fn act_edge(&self, g: &GL2, e: &OrientedEdge) -> Result<OrientedEdge> {
        Ok(OrientedEdge { src: self.act(g, &e.src)?, dst: self.act(g, &e.dst)? })
    }

    /// Distance from the elementary divisors of the relative basis matrix.
    pub fn distance(&self, v: &Vertex, w: &Vertex) -> Result<u32> {
        let rel = self.basis(v).inverse()? * self.basis(w);
        let det = rel.det();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        Ok((det.val() - 2 * rel.min_val()).unsigned_abs() as u32)
    }

    pub fn parent(&self, v: &Vertex) -> Option<Vertex> {
        if v.n == 0 {
            return None;
        }
        let m = self.pn(v.n - 1);
        Some(match v.coord {
            Coord::Root => unreachable!(),
            Coord::Row(y) => Vertex::row(v.n - 1, y % m),
            Coord::Col(x) => Vertex::col(v.n - 1, x % m),
        })
    }

    pub fn children(&self, v: &Vertex) -> Vec<Vertex> {
        let p = self.p() as u64;
        let step = self.pn(v.n);
        match v.coord {
            Coord::Root => (0..p).map(|y| Vertex::row(1, y)).chain([Vertex::col(1, 0)]).collect(),
            Coord::Row(y) => (0..p).map(|j| Vertex::row(v.n + 1, y + j * step)).collect(),
            Coord::Col(x) => (0..p).map(|j| Vertex::col(v.n + 1, x + j * step)).collect(),
        }
    }

    pub fn neighbors(&self, v: &Vertex) -> Vec<Vertex> {
        self.parent(v).into_iter().chain(self.children(v)).collect()
    }

    pub fn is_adjacent(&self, v: &Vertex, w: &Vertex) -> bool {
        self.parent(v) == Some(*w) || self.parent(w) == Some(*v)
    }

    pub fn edge(&self, src: Vertex, dst: Vertex) -> Result<OrientedEdge> {
        if !self.is_adjacent(&src, &dst) {
            return Err(Error::NotAdjacent);
        }
        Ok(OrientedEdge { src, dst })
    }

    /// All vertices at distance exactly `n` from the root.
    pub fn sphere(&self, n: u32) -> Vec<Vertex> {
        if n == 0 {
            return vec![Vertex::ROOT];
        }
        let pn = self.pn(n);
        let p = self.p() as u64;
        (0..pn).map(|y| Vertex::row(n, y)).chain((0..pn / p).map(|j| Vertex::col(n, p * j))).collect()
    }

    /// Vertices within distance `n` of the root, by depth.
    pub fn ball(&self, n: u32) -> Vec<Vertex> {
        (0..=n).flat_map(|i| self.sphere(i)).collect()
    }

    /// Edges within depth `n`, each oriented away from the root.
    pub fn edges(&self, n: u32) -> Vec<OrientedEdge> {
        (1..=n).flat_map(|i| self.sphere(i)).map(|v| OrientedEdge { src: self.parent(&v).unwrap(), dst: v }).collect()
    }

    /// The unique geodesic from `v` to `w`.
    pub fn path(&self, v: &Vertex, w: &Vertex) -> Vec<Vertex> {
        let (mut a, mut b) = (*v, *w);
        let mut up = vec![a];
        let mut down = vec![b];
        while a.n > b.n {
            a = self.parent(&a).unwrap();
            up.push(a);
        }
        while b.n > a.n {
            b = self.parent(&b).unwrap();
            down.push(b);
        }
        while a != b {
            a = self.parent(&a).unwrap();
            b = self.parent(&b).unwrap();
            up.push(a);
            down.push(b);
        }
        down.pop();
        up.extend(down.into_iter().rev());
        up
    }

    pub fn check_geodesic(&self, path: &[Vertex]) -> Result<()> {
        for i in 1..path.len() {
            if !self.is_adjacent(&path[i - 1], &path[i]) {
                return Err(Error::NotGeodesic(i));
            }
            if i >= 2 && path[i] == path[i - 2] {
                return Err(Error::NotGeodesic(i));
            }
        }
        Ok(())
    }

    /// The element sending the standard path `[v_0, ..., v_n]` to `path`.
    fn frame_of_path(&self, path: &[Vertex]) -> Result<GL2> {
        self.check_geodesic(path)?;
        let c = self.cfg;
        let mut g = self.basis(&path[0]);
        for (i, next) in path.iter().enumerate().skip(1) {
            let u = self.act(&g.inverse()?, next)?;
            let h = match (i, u.coord) {
                (_, Coord::Col(alpha)) if u.n as usize == i => {
                    GL2::new(c.one(), c.int(alpha as i64), c.zero(), c.one())
                }
                (1, Coord::Row(0)) => GL2::from_ints(c, [[0, 1], [1, 0]]),
                (1, Coord::Row(y)) => {
                    let alpha = c.int(y as i64).checked_inv()?.to_u64_mod(1)?;
                    GL2::new(c.one(), c.int(alpha as i64), c.zero(), c.one())
                }
                _ => return Err(Error::NotGeodesic(i)),
            };
            g = g * h;
        }
        Ok(g)
    }

    /// An element `g` with `g . from[i] = to[i]` for every `i`.
    pub fn map_path(&self, from: &[Vertex], to: &[Vertex]) -> Result<GL2> {
        if from.len() != to.len() {
            return Err(Error::PathLength(from.len(), to.len()));
        }
        if from.is_empty() {
            return Err(Error::PathLength(0, 0));
        }
        let gp = self.frame_of_path(from)?;
        let gq = self.frame_of_path(to)?;
        Ok(gq * gp.inverse()?)
    }

    /// An element carrying the standard simplex (`v_0` or the edge `(v_0, v_1)`) to `s`.
    pub fn frame(&self, s: &Simplex) -> Result<GL2> {
        match s {
            Simplex::Vertex(v) => self.frame_of_path(&[*v]),
            Simplex::Edge(e) => self.frame_of_path(&[e.src, e.dst]),
        }
    }

    fn matches(&self, g: &GL2, k: u32, pattern: Pattern) -> Result<bool> {
        let k = k as i64;
        let one = self.cfg.one();
        let lower = if pattern == Pattern::Edge { k - 1 } else { k };
        Ok((g.a - one).val_at_least(k)?
            && g.b.val_at_least(k)?
            && g.c.val_at_least(lower)?
            && (g.d - one).val_at_least(k)?)
    }

    /// Membership in the level-`k` congruence subgroup of a vertex or edge.
    pub fn in_group(&self, g: &GL2, s: &Simplex, k: u32) -> Result<bool> {
        if k == 0 {
            return Err(Error::BadLevel);
        }
        let h = self.frame(s)?;
        let g0 = h.inverse()? * *g * h;
        let pattern = match s {
            Simplex::Vertex(_) => Pattern::Vertex,
            Simplex::Edge(_) => Pattern::Edge,
        };
        self.matches(&g0, k, pattern)
    }

    /// Splits an element of the edge group into vertex-group factors.
    pub fn factor_edge_group(&self, g: &GL2, e: &OrientedEdge, k: u32) -> Result<EdgeFactors> {
        let s = Simplex::Edge(*e);
        if !self.in_group(g, &s, k)? {
            return Err(Error::NotInGroup);
        }
        let c = self.cfg;
        let h = self.frame(&s)?;
        let hi = h.inverse()?;
        let g0 = hi * *g * h;
        let a = g0.a;
        let lower = GL2::new(a, c.zero(), g0.c, c.one());
        let b1 = g0.b.checked_div(&a)?;
        let upper = GL2::new(c.one(), b1, c.zero(), g0.d - g0.c * b1);
        Ok(EdgeFactors { target_part: h * lower * hi, source_part: h * upper * hi })
    }

    /// A pseudorandom element of the level-`k` group of `s`.
    pub fn sample_group_element<R: Rng>(&self, rng: &mut R, s: &Simplex, k: u32) -> Result<GL2> {
        let c = self.cfg;
        let bound = c.pow_p(c.prec().min(8)) as i64;
        let mut e = || c.int(rng.random_range(0..bound));
        let (a, b, cc, d) = (e(), e(), e(), e());
        let pk = c.p_power(k as i64);
        let lower_shift = match s {
            Simplex::Vertex(_) => k as i64,
            Simplex::Edge(_) => k as i64 - 1,
        };
        let g0 = GL2::new(c.one() + pk * a, pk * b, c.p_power(lower_shift) * cc, c.one() + pk * d);
        let h = self.frame(s)?;
        Ok(h * g0 * h.inverse()?)
    }

    /// Graphviz rendering of the ball of radius `n`, edges pointing away from the root.
    pub fn to_dot(&self, n: u32) -> String {
        let p = self.p();
        let mut out = format!("digraph bt_p{p}_n{n} {{\n");
        for v in self.ball(n) {
            out.push_str(&format!("  \"{}\";\n", v.label(p)));
        }
        for e in self.edges(n) {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", e.src.label(p), e.dst.label(p)));
        }
        out.push_str("}\n");
        out
    }
}
