//! The projective line over `Q_p`, the right Möbius action of `GL2` and
//! closed discs.
//!
//! Discs come in two shapes. `Z(c, m)` is the ordinary closed disc
//! `{x : v(x - c) >= m}`. `W(c, m)` is the closed disc of radius `p^-m` around
//! infinity in the coordinate `1 / (x - c)`, i.e. `{inf} ∪ {x : v(x - c) <= -m}`.
//! Every closed disc of `P^1(Q_p)` is exactly one of these, and the complement
//! of a disc of one shape is a disc of the other.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{PadicConfig, PadicNum};

/// `[[a, b], [c, d]]` acting on the right: `z.g = (a z + c) / (b z + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GL2 {
    pub a: PadicNum,
    pub b: PadicNum,
    pub c: PadicNum,
    pub d: PadicNum,
}

impl GL2 {
    pub fn new(a: PadicNum, b: PadicNum, c: PadicNum, d: PadicNum) -> Self {
        GL2 { a, b, c, d }
    }

    pub fn from_ints(cfg: PadicConfig, m: [[i64; 2]; 2]) -> Self {
        GL2::new(cfg.int(m[0][0]), cfg.int(m[0][1]), cfg.int(m[1][0]), cfg.int(m[1][1]))
    }

    pub fn identity(cfg: PadicConfig) -> Self {
        GL2::from_ints(cfg, [[1, 0], [0, 1]])
    }

    pub fn diag(a: PadicNum, d: PadicNum) -> Self {
        let z = a.config().zero();
        GL2::new(a, z, z, d)
    }

    pub fn config(&self) -> PadicConfig {
        self.a.config()
    }

    pub fn det(&self) -> PadicNum {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Result<GL2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let inv = det.checked_inv()?;
        Ok(GL2::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    /// `det * g^-1`; the same Möbius map as the inverse, without division.
    pub fn adjugate(&self) -> GL2 {
        GL2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn scale(&self, s: PadicNum) -> GL2 {
        GL2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Smallest valuation among the entries.
    pub fn min_val(&self) -> i64 {
        [self.a, self.b, self.c, self.d].iter().map(|x| x.val()).min().unwrap()
    }

    /// Left action on a column vector.
    pub fn apply_column(&self, v: [PadicNum; 2]) -> [PadicNum; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// True when every entry differs from `other`'s by something invisible at working precision.
    pub fn coincides(&self, other: &GL2) -> bool {
        (self.a - other.a).is_zero()
            && (self.b - other.b).is_zero()
            && (self.c - other.c).is_zero()
            && (self.d - other.d).is_zero()
    }

    pub fn apply(&self, z: &ProjPoint) -> ProjPoint {
        z.act(self)
    }
}

impl Mul for GL2 {
    type Output = GL2;
    fn mul(self, o: GL2) -> GL2 {
        GL2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Display for GL2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.b, self.c, self.d)
    }
}

/// A point `[x : y]` of `P^1(Q_p)`, stored as `[z : 1]` when `|z| <= 1` and
/// as `[1 : 1/z]` otherwise. Infinity is `[1 : 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    x: PadicNum,
    y: PadicNum,
}

impl ProjPoint {
    pub fn finite(z: PadicNum) -> Self {
        let one = z.config().one();
        if z.is_zero() || z.val() >= 0 {
            ProjPoint { x: z, y: one }
        } else {
            ProjPoint { x: one, y: z.checked_inv().expect("nonzero") }
        }
    }

    pub fn infinity(cfg: PadicConfig) -> Self {
        ProjPoint { x: cfg.one(), y: cfg.zero() }
    }

    pub fn from_homogeneous(x: PadicNum, y: PadicNum) -> Result<Self> {
        if x.is_zero() && y.is_zero() {
            return Err(Error::Invalid("both homogeneous coordinates vanish".into()));
        }
        if y.is_zero() || (!x.is_zero() && x.val() < y.val()) {
            let w = y.checked_div(&x)?;
            return Ok(ProjPoint { x: x.config().one(), y: w });
        }
        Ok(ProjPoint::finite(x.checked_div(&y)?))
    }

    pub fn coords(&self) -> (PadicNum, PadicNum) {
        (self.x, self.y)
    }

    pub fn is_infinity(&self) -> bool {
        self.y.is_zero()
    }

    /// The affine coordinate `z`, or `None` at infinity.
    pub fn affine(&self) -> Option<PadicNum> {
        if self.y.is_zero() {
            None
        } else {
            Some(self.x.checked_div(&self.y).expect("nonzero"))
        }
    }

    pub fn act(&self, g: &GL2) -> ProjPoint {
        let x = g.a * self.x + g.c * self.y;
        let y = g.b * self.x + g.d * self.y;
        ProjPoint::from_homogeneous(x, y).expect("invertible matrix keeps points projective")
    }

    /// Equality up to working precision.
    pub fn coincides(&self, other: &ProjPoint) -> bool {
        let z_form = |p: &ProjPoint| p.y.is_unit() && p.y.unit() == 1 && p.y.val() == 0;
        match (z_form(self), z_form(other)) {
            (true, true) => (self.x - other.x).is_zero(),
            (false, false) => (self.y - other.y).is_zero(),
            _ => false,
        }
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {}]", self.x, self.y)
    }
}

/// Class of a point in `P^1(Z/p^M)`: `Finite(r)` for `z ≡ r mod p^M` with
/// `z` integral, `Inverted(r)` for `1/z ≡ r mod p^M` with `|z| > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResidueClass {
    Finite(u64),
    Inverted(u64),
}

/// Every class of `P^1(Z/p^depth)`, `(p + 1) p^(depth - 1)` of them.
pub fn residue_classes(cfg: PadicConfig, depth: u32) -> Vec<ResidueClass> {
    let pm = cfg.pow_p(depth);
    let p = cfg.p() as u64;
    (0..pm).map(ResidueClass::Finite).chain((0..pm / p).map(|j| ResidueClass::Inverted(p * j))).collect()
}

pub fn class_of(pt: &ProjPoint, depth: u32) -> Result<ResidueClass> {
    let (x, y) = pt.coords();
    match pt.affine() {
        Some(z) if z.is_zero() || z.val() >= 0 => Ok(ResidueClass::Finite(z.to_u64_mod(depth)?)),
        _ => Ok(ResidueClass::Inverted(y.checked_div(&x)?.to_u64_mod(depth)?)),
    }
}

pub fn class_representative(cfg: PadicConfig, class: ResidueClass) -> ProjPoint {
    match class {
        ResidueClass::Finite(r) => ProjPoint::finite(cfg.int(r as i64)),
        ResidueClass::Inverted(0) => ProjPoint::infinity(cfg),
        ResidueClass::Inverted(r) => ProjPoint::from_homogeneous(cfg.one(), cfg.int(r as i64)).unwrap(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Chart {
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "w")]
    W,
}

/// Closed disc of `P^1(Q_p)` with canonical center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ball {
    chart: Chart,
    center: PadicNum,
    m: i64,
}

fn radius_bound(cfg: PadicConfig) -> i64 {
    cfg.prec() as i64 - 2
}

impl Ball {
    pub fn new(chart: Chart, center: PadicNum, m: i64) -> Result<Ball> {
        let max = radius_bound(center.config());
        if m.abs() > max {
            return Err(Error::RadiusOutOfRange { m, max });
        }
        let modulus = match chart {
            Chart::Z => m,
            Chart::W => 1 - m,
        };
        let center = center.residue_mod(modulus)?;
        Ok(Ball { chart, center, m })
    }

    /// `{x : v(x - c) >= m}`.
    pub fn z(center: PadicNum, m: i64) -> Result<Ball> {
        Ball::new(Chart::Z, center, m)
    }

    /// `{inf} ∪ {x : v(x - c) <= -m}`.
    pub fn w(center: PadicNum, m: i64) -> Result<Ball> {
        Ball::new(Chart::W, center, m)
    }

    /// `{x : v(1/x - u) >= m}`, the disc of radius `p^-m` around `u` in the
    /// coordinate `w = 1/z`.
    pub fn w_chart(u: PadicNum, m: i64) -> Result<Ball> {
        if u.is_zero() || u.val() >= m {
            return Ball::w(u.config().zero(), m);
        }
        Ball::z(u.checked_inv()?, m - 2 * u.val())
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn center(&self) -> PadicNum {
        self.center
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn config(&self) -> PadicConfig {
        self.center.config()
    }

    pub fn complement(&self) -> Ball {
        let chart = match self.chart {
            Chart::Z => Chart::W,
            Chart::W => Chart::Z,
        };
        Ball { chart, center: self.center, m: 1 - self.m }
    }

    pub fn contains(&self, pt: &ProjPoint) -> Result<bool> {
        match self.chart {
            Chart::Z => match pt.affine() {
                None => Ok(false),
                Some(z) => Ok((z - self.center).val_at_least(self.m)?),
            },
            Chart::W => Ok(!self.complement().contains(pt)?),
        }
    }

    pub fn contains_infinity(&self) -> bool {
        self.chart == Chart::W
    }

    pub fn is_disjoint(&self, other: &Ball) -> Result<bool> {
        match (self.chart, other.chart) {
            (Chart::Z, Chart::Z) => {
                let m = self.m.min(other.m);
                Ok(!(self.center - other.center).val_at_least(m)?)
            }
            (Chart::Z, Chart::W) => self.is_subset(&other.complement()),
            (Chart::W, Chart::Z) => other.is_subset(&self.complement()),
            (Chart::W, Chart::W) => Ok(false),
        }
    }

    pub fn is_subset(&self, other: &Ball) -> Result<bool> {
        match (self.chart, other.chart) {
            (Chart::Z, Chart::Z) => Ok(self.m >= other.m && (self.center - other.center).val_at_least(other.m)?),
            (Chart::Z, Chart::W) => self.is_disjoint(&other.complement()),
            (Chart::W, Chart::Z) => Ok(false),
            (Chart::W, Chart::W) => other.complement().is_subset(&self.complement()),
        }
    }

    pub fn is_proper_subset(&self, other: &Ball) -> Result<bool> {
        Ok(self != other && self.is_subset(other)?)
    }

    /// The image `B.g = {x.g : x in B}`.
    pub fn image(&self, g: &GL2) -> Result<Ball> {
        match self.chart {
            Chart::Z => image_z(g, self.center, self.m, 0),
            Chart::W => image_w(g, self.center, self.m, 0),
        }
    }

    /// Smallest `D >= 1` such that the disc is a union of classes of `P^1(Z/p^D)`.
    pub fn residue_depth(&self) -> u32 {
        match self.chart {
            Chart::W => self.complement().residue_depth(),
            Chart::Z => {
                let c = self.center;
                let d = if c.is_exact_zero() {
                    if self.m >= 0 {
                        self.m
                    } else {
                        1 - self.m
                    }
                } else if c.val() >= 0 {
                    self.m
                } else {
                    self.m - 2 * c.val()
                };
                d.max(1) as u32
            }
        }
    }

    /// The classes of `P^1(Z/p^depth)` whose points lie in the disc.
    pub fn classes(&self, depth: u32) -> Result<Vec<ResidueClass>> {
        if depth < self.residue_depth() {
            return Err(Error::Invalid(format!("depth {depth} is too coarse for {self}")));
        }
        let cfg = self.config();
        let mut out = Vec::new();
        for cl in residue_classes(cfg, depth) {
            if self.contains(&class_representative(cfg, cl))? {
                out.push(cl);
            }
        }
        Ok(out)
    }

    /// Mass for the `GL2(Z_p)`-invariant probability measure on `P^1(Q_p)`.
    pub fn measure(&self) -> Ratio<i128> {
        let p = self.config().p() as i128;
        let pow = |e: i64| -> Ratio<i128> {
            if e >= 0 {
                Ratio::from_integer(p.pow(e as u32))
            } else {
                Ratio::new(1, p.pow((-e) as u32))
            }
        };
        match self.chart {
            Chart::W => Ratio::from_integer(1) - self.complement().measure(),
            Chart::Z => {
                let c = self.center;
                let depth = if c.is_exact_zero() {
                    if self.m < 0 {
                        return Ratio::from_integer(1) - pow(self.m) / (p + 1);
                    }
                    self.m
                } else if c.val() >= 0 {
                    self.m
                } else {
                    self.m - 2 * c.val()
                };
                pow(1 - depth) / (p + 1)
            }
        }
    }

    /// Deterministic ordering key.
    pub fn key(&self) -> (Chart, i64, (i64, u64, u32)) {
        (self.chart, self.m, self.center.sort_key())
    }

    /// Digits of the center needed to pin the disc down.
    pub fn center_string(&self) -> String {
        let c = self.center;
        if c.is_exact_zero() {
            return c.to_string();
        }
        let modulus = match self.chart {
            Chart::Z => self.m,
            Chart::W => 1 - self.m,
        };
        c.with_rel_precision((modulus - c.val()) as u32).to_string()
    }
}

fn image_z(g: &GL2, c0: PadicNum, m: i64, depth: u8) -> Result<Ball> {
    let den = g.b * c0 + g.d;
    let pole_inside = !g.b.is_exact_zero() && den.val_at_least(m + g.b.val())?;
    if !pole_inside {
        let fc = (g.a * c0 + g.c).checked_div(&den)?;
        return Ball::z(fc, m + g.det().val() - 2 * den.val());
    }
    if depth > 1 {
        return Err(Error::Invalid("disc image did not stabilize".into()));
    }
    Ok(image_w(g, c0, 1 - m, depth + 1)?.complement())
}

fn image_w(g: &GL2, c0: PadicNum, m: i64, depth: u8) -> Result<Ball> {
    // x = c0 + 1/w turns the map into a Möbius map in w on v(w) >= m
    let h = GL2::new(g.a * c0 + g.c, g.b * c0 + g.d, g.a, g.b);
    image_z(&h, c0.config().zero(), m, depth)
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ball {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chart = match self.chart {
            Chart::Z => "Z",
            Chart::W => "W",
        };
        write!(f, "{chart}({}, {})", self.center_string(), self.m)
    }
}

impl Serialize for Ball {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Ball", 3)?;
        st.serialize_field("chart", &self.chart)?;
        st.serialize_field("center", &self.center_string())?;
        st.serialize_field("m", &self.m)?;
        st.end()
    }
}
