//! Truncated analytic functions on discs.
//!
//! A function on a disc is a polynomial of degree `<= d` in the disc's
//! normalized coordinate `t`:
//!
//! * inside `Z_p`: `z = c + p^m t`;
//! * inside `{|z| > 1} ∪ {inf}`: `1/z = u + p^m t`;
//! * for discs meeting both halves: the raw coordinate `z`, read as the
//!   homogeneous form `F(x, y) = Σ a_j x^j y^(d-j)` so that its values on the
//!   far half are `Σ a_j w^(d-j)` with `w = 1/z`.

use crate::error::{Error, Result};
use crate::padic::{PadicConfig, PadicNum};
use crate::projline::{Ball, Chart, ProjPoint, GL2};

/// Coordinate system attached to a disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `z = center + p^m t`
    Near { center: PadicNum, m: i64 },
    /// `1/z = center + p^m t`
    Far { center: PadicNum, m: i64 },
    /// Raw `z`, homogenized on the far half.
    Global,
}

impl Frame {
    pub fn of(ball: &Ball) -> Frame {
        let c = ball.center();
        let m = ball.m();
        match ball.chart() {
            Chart::Z if c.is_exact_zero() => {
                if m >= 0 {
                    Frame::Near { center: c, m }
                } else {
                    Frame::Global
                }
            }
            Chart::Z if c.val() >= 0 => Frame::Near { center: c, m },
            Chart::Z => Frame::Far { center: c.checked_inv().expect("nonzero"), m: m - 2 * c.val() },
            Chart::W if c.is_exact_zero() && m >= 1 => Frame::Far { center: c, m },
            Chart::W => Frame::Global,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncFun {
    pub ball: Ball,
    pub coeffs: Vec<PadicNum>,
}

/// `Σ a_j (s + r t)^j` as a polynomial in `t`.
pub fn compose_affine(coeffs: &[PadicNum], s: PadicNum, r: PadicNum) -> Vec<PadicNum> {
    let zero = s.config().zero();
    let mut out = vec![zero; coeffs.len()];
    for a in coeffs.iter().rev() {
        // out = out * (s + r t) + a
        let mut next = vec![zero; coeffs.len()];
        for (i, &o) in out.iter().enumerate() {
            if o.is_exact_zero() {
                continue;
            }
            next[i] = next[i] + o * s;
            if i + 1 < next.len() {
                next[i + 1] = next[i + 1] + o * r;
            }
        }
        next[0] = next[0] + *a;
        out = next;
    }
    out
}

fn series_mul(x: &[PadicNum], y: &[PadicNum], len: usize) -> Vec<PadicNum> {
    let zero = x[0].config().zero();
    let mut out = vec![zero; len];
    for (i, &a) in x.iter().enumerate().take(len) {
        if a.is_exact_zero() {
            continue;
        }
        for (j, &b) in y.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j] + a * b;
        }
    }
    out
}

fn series_inv(x: &[PadicNum], len: usize) -> Result<Vec<PadicNum>> {
    let inv0 = x[0].checked_inv()?;
    let zero = x[0].config().zero();
    let mut out = vec![zero; len];
    out[0] = inv0;
    for n in 1..len {
        let mut acc = zero;
        for i in 1..=n.min(x.len() - 1) {
            acc = acc + x[i] * out[n - i];
        }
        out[n] = -(acc * inv0);
    }
    Ok(out)
}

fn series_pow(x: &[PadicNum], e: i64, len: usize) -> Result<Vec<PadicNum>> {
    let cfg = x[0].config();
    let base = if e < 0 { series_inv(x, len)? } else { x.to_vec() };
    let mut out = vec![cfg.zero(); len];
    out[0] = cfg.one();
    for _ in 0..e.unsigned_abs() {
        out = series_mul(&out, &base, len);
    }
    Ok(out)
}

pub const DEFAULT_GUARD: usize = 4;

/// Smallest valuation among coefficients with a known nonzero digit.
fn tail_valuation(tail: &[PadicNum]) -> i64 {
    tail.iter().filter(|x| !x.is_zero()).map(|x| x.val()).min().unwrap_or(i64::MAX)
}

/// Result of acting on a truncated function: the degree-`<= d` part and the
/// smallest valuation among the discarded guard coefficients that are
/// nonzero at working precision.
#[derive(Debug, Clone)]
pub struct ActionResult {
    pub fun: TruncFun,
    pub guard_valuation: i64,
}

/// Integer-weight character `diag(a, d) -> (ad)^m1 d^m2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Character {
    pub m1: i32,
    pub m2: i32,
}

impl Character {
    pub fn new(m1: i32, m2: i32) -> Self {
        Character { m1, m2 }
    }

    pub fn trivial() -> Self {
        Character { m1: 0, m2: 0 }
    }

    pub fn eval_diag(&self, a: PadicNum, d: PadicNum) -> Result<PadicNum> {
        Ok((a * d).pow(self.m1 as i64)? * d.pow(self.m2 as i64)?)
    }
}

impl TruncFun {
    pub fn zero(ball: Ball, d: usize) -> Self {
        TruncFun { ball, coeffs: vec![ball.config().zero(); d + 1] }
    }

    pub fn constant(ball: Ball, d: usize, c: PadicNum) -> Self {
        let mut f = TruncFun::zero(ball, d);
        f.coeffs[0] = c;
        f
    }

    pub fn monomial(ball: Ball, d: usize, j: usize) -> Self {
        let mut f = TruncFun::zero(ball, d);
        f.coeffs[j] = ball.config().one();
        f
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn config(&self) -> PadicConfig {
        self.ball.config()
    }

    pub fn frame(&self) -> Frame {
        Frame::of(&self.ball)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Same disc and equal coefficients at working precision.
    pub fn agrees(&self, other: &TruncFun) -> bool {
        self.ball == other.ball
            && self.coeffs.len() == other.coeffs.len()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| (*a - *b).is_zero())
    }

    pub fn add(&self, other: &TruncFun) -> TruncFun {
        debug_assert_eq!(self.ball, other.ball);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect();
        TruncFun { ball: self.ball, coeffs }
    }

    pub fn scale(&self, s: PadicNum) -> TruncFun {
        TruncFun { ball: self.ball, coeffs: self.coeffs.iter().map(|a| *a * s).collect() }
    }

    pub fn scale_sign(&self, sign: i32) -> TruncFun {
        if sign >= 0 {
            self.clone()
        } else {
            self.scale(-self.config().one())
        }
    }

    /// Value at a point of the disc.
    pub fn eval(&self, pt: &ProjPoint) -> Result<PadicNum> {
        if !self.ball.contains(pt)? {
            return Err(Error::NotSubset);
        }
        let cfg = self.config();
        let horner = |cs: &mut dyn Iterator<Item = &PadicNum>, t: PadicNum| cs.fold(cfg.zero(), |acc, a| acc * t + *a);
        let w_of = |pt: &ProjPoint| match pt.affine() {
            None => Ok(cfg.zero()),
            Some(z) => z.checked_inv(),
        };
        match self.frame() {
            Frame::Near { center, m } => {
                let t = (pt.affine().unwrap() - center).shift(-m);
                Ok(horner(&mut self.coeffs.iter().rev(), t))
            }
            Frame::Far { center, m } => {
                let t = (w_of(pt)? - center).shift(-m);
                Ok(horner(&mut self.coeffs.iter().rev(), t))
            }
            Frame::Global => match pt.affine() {
                Some(z) if z.is_zero() || z.val() >= 0 => Ok(horner(&mut self.coeffs.iter().rev(), z)),
                _ => Ok(horner(&mut self.coeffs.iter(), w_of(pt)?)),
            },
        }
    }

    /// The restriction to a smaller disc, in that disc's coordinate.
    pub fn restrict(&self, target: &Ball) -> Result<TruncFun> {
        if *target == self.ball {
            return Ok(self.clone());
        }
        if !target.is_subset(&self.ball)? {
            return Err(Error::NotSubset);
        }
        let cfg = self.config();
        let coeffs = match (self.frame(), Frame::of(target)) {
            (Frame::Global, Frame::Global) => self.coeffs.clone(),
            (Frame::Near { center: c, m }, Frame::Near { center: c2, m: m2 })
            | (Frame::Far { center: c, m }, Frame::Far { center: c2, m: m2 }) => {
                let s = (c2 - c).shift(-m);
                compose_affine(&self.coeffs, s, cfg.p_power(m2 - m))
            }
            (Frame::Global, Frame::Near { center, m }) => compose_affine(&self.coeffs, center, cfg.p_power(m)),
            (Frame::Global, Frame::Far { center, m }) => {
                let rev: Vec<_> = self.coeffs.iter().rev().copied().collect();
                compose_affine(&rev, center, cfg.p_power(m))
            }
            _ => return Err(Error::NotSubset),
        };
        Ok(TruncFun { ball: *target, coeffs })
    }

    /// `(g.f)(z) = chi1(det g) chi2(bz + d) f(z.g)` expanded to `guard` extra degrees.
    pub fn act(&self, g: &GL2, chi: &Character, guard: usize) -> Result<ActionResult> {
        let (g, center, m) = match self.frame() {
            Frame::Near { center, m } => (*g, center, m),
            // in the far chart the map reads w -> (b + d w) / (a + c w)
            Frame::Far { center, m } => (GL2::new(g.d, g.c, g.b, g.a), center, m),
            Frame::Global => return self.act_homogeneous(g, chi, guard),
        };
        let cfg = self.config();
        let len = self.coeffs.len() + guard;
        let scale = cfg.p_power(m);
        let d0 = g.b * center + g.d;
        let d1 = g.b * scale;
        if !d1.is_exact_zero() && !d0.is_zero() && d1.val() <= d0.val() || d0.is_zero() {
            return Err(Error::NotAnalytic);
        }
        let den = vec![d0, d1];
        let a0 = (g.a * center + g.c - center * d0).shift(-m);
        let a1 = g.a - center * g.b;
        let inner = series_mul(&[a0, a1], &series_inv(&den, len)?, len);
        // f(inner) by Horner
        let mut comp = vec![cfg.zero(); len];
        for a in self.coeffs.iter().rev() {
            comp = series_mul(&comp, &inner, len);
            comp[0] = comp[0] + *a;
        }
        let weight = series_pow(&den, chi.m2 as i64, len)?;
        let det_factor = g.det().pow(chi.m1 as i64)?;
        let full: Vec<PadicNum> = series_mul(&weight, &comp, len).into_iter().map(|x| x * det_factor).collect();
        let keep = self.coeffs.len();
        let guard_valuation = tail_valuation(&full[keep..]);
        Ok(ActionResult { fun: TruncFun { ball: self.ball, coeffs: full[..keep].to_vec() }, guard_valuation })
    }
}

impl TruncFun {
    /// `act` with the default guard of 4, failing unless every discarded
    /// coefficient vanishes at working precision.
    pub fn act_strict(&self, g: &GL2, chi: &Character) -> Result<TruncFun> {
        let r = self.act(g, chi, DEFAULT_GUARD)?;
        let needed = self.config().prec() as i64;
        if r.guard_valuation < needed {
            return Err(Error::InsufficientGuard { valuation: r.guard_valuation, needed });
        }
        Ok(r.fun)
    }
}

impl TruncFun {
    /// Global frame: `chi1(det) (bz + d)^(m2 - deg) F(az + c, bz + d)` with the
    /// rational factor expanded around `z = 0`.
    fn act_homogeneous(&self, g: &GL2, chi: &Character, guard: usize) -> Result<ActionResult> {
        let cfg = self.config();
        let deg = self.degree_bound();
        let len = deg + 1 + guard;
        let num = [g.c, g.a];
        let den = [g.d, g.b];
        let dominant = !g.d.is_zero() && (g.b.is_zero() || g.b.val() > g.d.val());
        if (chi.m2 as i64) < deg as i64 && !dominant {
            return Err(Error::NotAnalytic);
        }
        let mut form = vec![cfg.zero(); len];
        for (j, a) in self.coeffs.iter().enumerate() {
            let term = series_mul(&series_pow(&num, j as i64, len)?, &series_pow(&den, (deg - j) as i64, len)?, len);
            for (acc, t) in form.iter_mut().zip(term) {
                *acc = *acc + *a * t;
            }
        }
        let weight = series_pow(&den, chi.m2 as i64 - deg as i64, len)?;
        let det_factor = g.det().pow(chi.m1 as i64)?;
        let full: Vec<PadicNum> = series_mul(&weight, &form, len).into_iter().map(|x| x * det_factor).collect();
        let guard_valuation = tail_valuation(&full[deg + 1..]);
        Ok(ActionResult { fun: TruncFun { ball: self.ball, coeffs: full[..=deg].to_vec() }, guard_valuation })
    }
}

/// `s(z)`: `[1 0; z 1]` for `|z| <= 1`, `[0 -1; 1 1/z]` otherwise.
pub fn section_s(z: &ProjPoint) -> GL2 {
    let (x, _) = z.coords();
    let cfg = x.config();
    match z.affine() {
        Some(v) if v.is_zero() || v.val() >= 0 => GL2::new(cfg.one(), cfg.zero(), v, cfg.one()),
        _ => {
            let w = z.coords().1;
            GL2::new(cfg.zero(), -cfg.one(), cfg.one(), w)
        }
    }
}

/// `ξ(z, g) = s(z) g s(z.g)^-1`, an upper triangular matrix.
pub fn cocycle_xi(z: &ProjPoint, g: &GL2) -> Result<GL2> {
    Ok(section_s(z) * *g * section_s(&z.act(g)).inverse()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(p: u32) -> PadicConfig {
        PadicConfig::new(p, 30).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let c = cfg(3);
        let parent = Ball::z(c.zero(), 1).unwrap();
        let t = TruncFun::monomial(parent, 2, 1);
        let r = t.restrict(&Ball::z(c.zero(), 2).unwrap()).unwrap();
        assert_eq!(r.coeffs, vec![c.zero(), c.int(3), c.zero()]);
        let r = t.restrict(&Ball::z(c.int(3), 2).unwrap()).unwrap();
        assert_eq!(r.coeffs, vec![c.one(), c.int(3), c.zero()]);
        let k = TruncFun::constant(parent, 2, c.int(7));
        assert_eq!(k.restrict(&Ball::z(c.int(6), 4).unwrap()).unwrap().coeffs, k.coeffs);
        assert!(t.restrict(&Ball::z(c.one(), 2).unwrap()).is_err());
    }

    #[test]
    fn restriction_agrees_with_evaluation() {
        let c = cfg(2);
        let big = Ball::w(c.one(), 0).unwrap();
        let f = TruncFun { ball: big, coeffs: vec![c.int(3), c.int(-1), c.int(5)] };
        for (small, pt) in [
            (Ball::z(c.zero(), 2).unwrap(), ProjPoint::finite(c.int(4))),
            (Ball::w(c.zero(), 2).unwrap(), ProjPoint::finite(c.rational(1, 8).unwrap())),
            (Ball::w(c.zero(), 2).unwrap(), ProjPoint::infinity(c)),
        ] {
            let r = f.restrict(&small).unwrap();
            assert!((r.eval(&pt).unwrap() - f.eval(&pt).unwrap()).is_zero());
        }
    }

    #[test]
    fn action_examples() {
        let c = cfg(3);
        let ball = Ball::z(c.zero(), 1).unwrap();
        let f = TruncFun { ball, coeffs: vec![c.int(2), c.int(5)] };
        let id = f.act(&GL2::identity(c), &Character::new(2, -1), 4).unwrap();
        assert_eq!(id.fun.coeffs, f.coeffs);
        assert!(id.guard_valuation > 30);
        // translation by c = 3 recenters: t -> t + 1
        let tr = GL2::from_ints(c, [[1, 0], [3, 1]]);
        let r = f.act(&tr, &Character::trivial(), 4).unwrap();
        assert_eq!(r.fun.coeffs, vec![c.int(7), c.int(5)]);
        // diagonal on the monomial z
        let zf = TruncFun { ball, coeffs: vec![c.zero(), c.int(3)] };
        let (a, d) = (c.int(4), c.int(7));
        let chi = Character::new(1, 2);
        let r = zf.act(&GL2::diag(a, d), &chi, 4).unwrap();
        let want = chi.eval_diag(a, d).unwrap() * a.checked_div(&d).unwrap() * c.int(3);
        assert!((r.fun.coeffs[1] - want).is_zero());
        assert!(r.fun.coeffs[0].is_zero());
    }

    #[test]
    fn section_and_cocycle() {
        let c = cfg(3);
        assert_eq!(section_s(&ProjPoint::finite(c.zero())), GL2::identity(c));
        let z = ProjPoint::finite(c.rational(1, 9).unwrap());
        let s = section_s(&z);
        assert_eq!(s, GL2::new(c.zero(), -c.one(), c.one(), c.int(9)));
    }

    proptest! {
        #[test]
        fn cocycle_law(e in prop::array::uniform4(-20i64..20), f in prop::array::uniform4(-20i64..20), z in -300i64..300, s in -2i64..3) {
            let c = cfg(3);
            prop_assume!(e[0] * e[3] != e[1] * e[2] && f[0] * f[3] != f[1] * f[2]);
            let g = GL2::from_ints(c, [[e[0], e[1]], [e[2], e[3]]]);
            let h = GL2::from_ints(c, [[f[0], f[1]], [f[2], f[3]]]);
            let pt = ProjPoint::finite(c.int(z) * c.p_power(s));
            let x1 = cocycle_xi(&pt, &g).unwrap();
            prop_assert!(x1.c.is_zero());
            let lhs = cocycle_xi(&pt, &(g * h)).unwrap();
            let rhs = x1 * cocycle_xi(&pt.act(&g), &h).unwrap();
            prop_assert!(lhs.coincides(&rhs));
        }

        #[test]
        fn restriction_is_functorial(coeffs in prop::collection::vec(-50i64..50, 3), c1 in 0i64..9, c2 in 0i64..27, far in any::<bool>()) {
            let c = cfg(3);
            let (b0, b1, b2) = if far {
                (Ball::w(c.one(), 0).unwrap(), Ball::w(c.zero(), 1).unwrap(), Ball::w_chart(c.int(3 * c1), 3).unwrap())
            } else {
                (Ball::z(c.zero(), 0).unwrap(), Ball::z(c.int(c1), 2).unwrap(), Ball::z(c.int(c1 + 9 * (c2 % 3)), 3).unwrap())
            };
            prop_assume!(b2.is_subset(&b1).unwrap());
            let f = TruncFun { ball: b0, coeffs: coeffs.iter().map(|&x| c.int(x)).collect() };
            let direct = f.restrict(&b2).unwrap();
            let staged = f.restrict(&b1).unwrap().restrict(&b2).unwrap();
            prop_assert!(direct.coeffs.iter().zip(&staged.coeffs).all(|(a, b)| (*a - *b).is_zero()));
        }
    }
}
