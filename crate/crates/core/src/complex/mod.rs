//! The truncated chain complex `C_1 -> C_0 -> V` of a principal series on the
//! tree ball of radius `n`, at level `k` and truncation degree `d`.
//!
//! `C_1` has one function space per edge orbit record, `C_0` one per vertex
//! orbit record, and `V` is modelled by functions on the partition of
//! `P^1(Q_p)` into minimal orbit discs.

mod exactness;
mod matrix;
mod trunc;

use std::collections::HashMap;

use num_rational::Ratio;
use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::orbits::OrbitRegistry;
use crate::padic::{PadicConfig, PadicNum};
use crate::projline::Ball;
use crate::tree::{Orientation, Simplex};

pub use exactness::{
    check_action_stability, verify_exactness, Check, Dims, ExactnessReport, Params, Ranks, StabilityFailure,
    StabilityReport,
};
pub use matrix::{Block, BlockKind, BoundaryMatrix};
pub use trunc::{cocycle_xi, compose_affine, section_s, ActionResult, Character, Frame, TruncFun, DEFAULT_GUARD};

/// A function on the whole line, given piecewise on a partition into discs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalFun {
    pub pieces: Vec<TruncFun>,
}

impl LocalFun {
    pub fn agrees(&self, other: &LocalFun) -> bool {
        self.pieces.len() == other.pieces.len() && self.pieces.iter().zip(&other.pieces).all(|(a, b)| a.agrees(b))
    }
}

/// Functions indexed by vertex orbit records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain0(pub Vec<TruncFun>);

/// Functions indexed by edge orbit records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain1(pub Vec<TruncFun>);

impl Serialize for TruncFun {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TruncFun", 2)?;
        st.serialize_field("ball", &self.ball)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

/// One term of the boundary of an edge orbit: the target vertex record,
/// the sign, and whether the term is the record itself or a restriction.
#[derive(Debug, Clone, Copy)]
struct EdgeTerm {
    pos: usize,
    sign: i32,
    same_disc: bool,
}

/// Index bookkeeping for the truncated complex over a registry.
#[derive(Debug, Clone)]
pub struct ComplexModel {
    reg: OrbitRegistry,
    d: usize,
    vrecs: Vec<usize>,
    erecs: Vec<usize>,
    mins: Vec<usize>,
    vpos: HashMap<usize, usize>,
    cover: Vec<Vec<usize>>,
    edge_terms: Vec<Vec<EdgeTerm>>,
    order: Vec<usize>,
    order_pos: HashMap<usize, usize>,
    owner_edge: HashMap<usize, usize>,
}

impl ComplexModel {
    pub fn new(reg: OrbitRegistry, d: usize) -> Result<ComplexModel> {
        if reg.n == 0 {
            return Err(Error::Invalid("the complex needs n >= 1".into()));
        }
        let vrecs: Vec<usize> = reg.vertex_records().map(|r| r.id).collect();
        let erecs: Vec<usize> = reg.edge_records().map(|r| r.id).collect();
        let mins: Vec<usize> = reg.minimal_orbits().iter().map(|r| r.id).collect();
        let vpos: HashMap<usize, usize> = vrecs.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut cover = Vec::with_capacity(mins.len());
        for &mu in &mins {
            let b = reg.records[mu].ball;
            let mut list = Vec::new();
            for (pos, &id) in vrecs.iter().enumerate() {
                if b.is_subset(&reg.records[id].ball)? {
                    list.push(pos);
                }
            }
            cover.push(list);
        }

        let orient = Orientation;
        let mut edge_terms = Vec::with_capacity(erecs.len());
        let mut owner_edge = HashMap::new();
        for (epos, &eid) in erecs.iter().enumerate() {
            let rec = &reg.records[eid];
            let Simplex::Edge(e) = rec.simplex else { unreachable!() };
            let owner = rec.owner.expect("edge records have owners");
            let owner_v = reg.records[owner].vertex().unwrap();
            let other = if owner_v == e.src { e.dst } else { e.src };
            owner_edge.insert(owner, epos);
            let mut terms = vec![EdgeTerm { pos: vpos[&owner], sign: orient.sign(&e, &owner_v), same_disc: true }];
            let mut mass = Ratio::from_integer(0);
            for &j in reg.records_of(&Simplex::Vertex(other)) {
                let bj = reg.records[j].ball;
                if bj.is_subset(&rec.ball)? {
                    mass += bj.measure();
                    terms.push(EdgeTerm { pos: vpos[&j], sign: orient.sign(&e, &other), same_disc: false });
                }
            }
            if mass != rec.ball.measure() {
                return Err(Error::Invalid(format!("orbits over {other} do not tile {}", rec.ball)));
            }
            edge_terms.push(terms);
        }
        let order = reg.nonminimal_order();
        let order_pos = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Ok(ComplexModel { reg, d, vrecs, erecs, mins, vpos, cover, edge_terms, order, order_pos, owner_edge })
    }

    pub fn registry(&self) -> &OrbitRegistry {
        &self.reg
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn config(&self) -> PadicConfig {
        self.reg.config()
    }

    /// Record ids indexing `C_0`.
    pub fn vertex_record_ids(&self) -> &[usize] {
        &self.vrecs
    }

    /// Record ids indexing `C_1`.
    pub fn edge_record_ids(&self) -> &[usize] {
        &self.erecs
    }

    /// Record ids of the minimal orbits, indexing the pieces of a `LocalFun`.
    pub fn minimal_record_ids(&self) -> &[usize] {
        &self.mins
    }

    /// Non-minimal vertex record ids in the total order used for the boundary matrix.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn ball_of(&self, id: usize) -> Ball {
        self.reg.records[id].ball
    }

    pub fn zero_chain0(&self) -> Chain0 {
        Chain0(self.vrecs.iter().map(|&id| TruncFun::zero(self.ball_of(id), self.d)).collect())
    }

    pub fn zero_chain1(&self) -> Chain1 {
        Chain1(self.erecs.iter().map(|&id| TruncFun::zero(self.ball_of(id), self.d)).collect())
    }

    pub fn zero_local(&self) -> LocalFun {
        LocalFun { pieces: self.mins.iter().map(|&id| TruncFun::zero(self.ball_of(id), self.d)).collect() }
    }

    fn check_chain(&self, got: &[TruncFun], ids: &[usize]) -> Result<()> {
        if got.len() != ids.len() {
            return Err(Error::IndexMismatch { got: got.len(), expected: ids.len() });
        }
        for (f, &id) in got.iter().zip(ids) {
            if f.ball != self.ball_of(id) || f.coeffs.len() != self.d + 1 {
                return Err(Error::Invalid(format!("component on {} does not match record {id}", f.ball)));
            }
        }
        Ok(())
    }

    /// `f` on an edge orbit goes to `+f` at the edge's source and `-f` at its target.
    pub fn partial1(&self, c: &Chain1) -> Result<Chain0> {
        self.check_chain(&c.0, &self.erecs)?;
        let mut out = self.zero_chain0();
        for (f, terms) in c.0.iter().zip(&self.edge_terms) {
            if f.is_zero() {
                continue;
            }
            for t in terms {
                let piece = if t.same_disc { f.clone() } else { f.restrict(&out.0[t.pos].ball)? };
                out.0[t.pos] = out.0[t.pos].add(&piece.scale_sign(t.sign));
            }
        }
        Ok(out)
    }

    /// Sum of all components, extended by zero, on the minimal partition.
    pub fn partial0(&self, c: &Chain0) -> Result<LocalFun> {
        self.check_chain(&c.0, &self.vrecs)?;
        let mut out = self.zero_local();
        for (piece, cover) in out.pieces.iter_mut().zip(&self.cover) {
            for &pos in cover {
                if !c.0[pos].is_zero() {
                    *piece = piece.add(&c.0[pos].restrict(&piece.ball)?);
                }
            }
        }
        Ok(out)
    }

    /// Components of a kernel element on the non-minimal records, in `order()`.
    pub fn kernel_project(&self, c: &Chain0) -> Result<Vec<TruncFun>> {
        if !self.partial0(c)?.pieces.iter().all(|f| f.is_zero()) {
            return Err(Error::NotInKernel);
        }
        Ok(self.order.iter().map(|id| c.0[self.vpos[id]].clone()).collect())
    }

    /// The unique kernel element with the given non-minimal components.
    pub fn kernel_lift(&self, nonmin: &[TruncFun]) -> Result<Chain0> {
        self.check_chain(nonmin, &self.order)?;
        let mut out = self.zero_chain0();
        for (f, id) in nonmin.iter().zip(&self.order) {
            out.0[self.vpos[id]] = f.clone();
        }
        for (k, &mu) in self.mins.iter().enumerate() {
            let pos = self.vpos[&mu];
            let ball = self.ball_of(mu);
            let mut acc = TruncFun::zero(ball, self.d);
            for &q in &self.cover[k] {
                if q != pos {
                    acc = acc.add(&out.0[q].restrict(&ball)?);
                }
            }
            out.0[pos] = acc.scale_sign(-1);
        }
        Ok(out)
    }

    /// A preimage under `partial0`. Each piece goes to a vertex record with the
    /// same disc, of smallest depth; pieces matching no record are split over
    /// the minimal discs they contain.
    pub fn surjective_lift(&self, f: &LocalFun) -> Result<Chain0> {
        let mut out = self.zero_chain0();
        for piece in &f.pieces {
            let same = self
                .vrecs
                .iter()
                .filter(|&&id| self.ball_of(id) == piece.ball)
                .min_by_key(|&&id| (self.reg.records[id].vertex().unwrap().n, id));
            match same {
                Some(&id) => {
                    let pos = self.vpos[&id];
                    out.0[pos] = out.0[pos].add(piece);
                }
                None => {
                    for &mu in &self.mins {
                        let b = self.ball_of(mu);
                        if b.is_subset(&piece.ball)? {
                            let pos = self.vpos[&mu];
                            out.0[pos] = out.0[pos].add(&piece.restrict(&b)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn random_fun<R: Rng>(&self, rng: &mut R, ball: Ball) -> TruncFun {
        let cfg = self.config();
        let bound = (cfg.p() as i64).pow(4);
        TruncFun { ball, coeffs: (0..=self.d).map(|_| cfg.int(rng.random_range(-bound..=bound))).collect() }
    }

    pub fn random_local<R: Rng>(&self, rng: &mut R) -> LocalFun {
        LocalFun { pieces: self.mins.iter().map(|&id| self.random_fun(rng, self.ball_of(id))).collect() }
    }

    pub fn random_chain1<R: Rng>(&self, rng: &mut R) -> Chain1 {
        Chain1(self.erecs.iter().map(|&id| self.random_fun(rng, self.ball_of(id))).collect())
    }

    pub fn random_nonmin<R: Rng>(&self, rng: &mut R) -> Vec<TruncFun> {
        self.order.iter().map(|&id| self.random_fun(rng, self.ball_of(id))).collect()
    }

    /// Matrix of restriction from `from` to `to` on coefficient vectors.
    pub fn restriction_matrix(&self, from: &Ball, to: &Ball) -> Result<Vec<Vec<PadicNum>>> {
        let columns = (0..=self.d)
            .map(|i| TruncFun::monomial(*from, self.d, i).restrict(to).map(|r| r.coeffs))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..=self.d).map(|j| columns.iter().map(|col| col[j]).collect()).collect())
    }

    fn place(&self, m: &mut Matrix, row: usize, col: usize, block: &[Vec<PadicNum>], sign: i32) {
        let neg = -self.config().one();
        for (j, line) in block.iter().enumerate() {
            for (i, x) in line.iter().enumerate() {
                if !x.is_exact_zero() {
                    m.add_at(row + j, col + i, if sign < 0 { *x * neg } else { *x });
                }
            }
        }
    }

    fn identity_block(&self) -> Vec<Vec<PadicNum>> {
        let cfg = self.config();
        (0..=self.d).map(|j| (0..=self.d).map(|i| if i == j { cfg.one() } else { cfg.zero() }).collect()).collect()
    }

    /// Dense matrix of `partial1` on coefficient vectors.
    pub fn d1_matrix(&self) -> Result<Matrix> {
        let b = self.d + 1;
        let mut m = Matrix::zeros(self.config(), b * self.vrecs.len(), b * self.erecs.len());
        let id = self.identity_block();
        for (epos, terms) in self.edge_terms.iter().enumerate() {
            let eball = self.ball_of(self.erecs[epos]);
            for t in terms {
                let block = if t.same_disc {
                    id.clone()
                } else {
                    self.restriction_matrix(&eball, &self.ball_of(self.vrecs[t.pos]))?
                };
                self.place(&mut m, b * t.pos, b * epos, &block, t.sign);
            }
        }
        Ok(m)
    }

    /// Dense matrix of `partial0` on coefficient vectors.
    pub fn d0_matrix(&self) -> Result<Matrix> {
        let b = self.d + 1;
        let mut m = Matrix::zeros(self.config(), b * self.mins.len(), b * self.vrecs.len());
        for (k, cover) in self.cover.iter().enumerate() {
            let mb = self.ball_of(self.mins[k]);
            for &pos in cover {
                let block = self.restriction_matrix(&self.ball_of(self.vrecs[pos]), &mb)?;
                self.place(&mut m, b * k, b * pos, &block, 1);
            }
        }
        Ok(m)
    }

    /// `partial1` followed by projection onto the non-minimal records, as a
    /// block matrix over `order()` (columns via the edge record owning each disc).
    pub fn assemble_dbar1(&self) -> Result<BoundaryMatrix> {
        let mut blocks = Vec::new();
        for (col, id) in self.order.iter().enumerate() {
            let epos =
                *self.owner_edge.get(id).ok_or_else(|| Error::Invalid(format!("record {id} owns no edge orbit")))?;
            let eball = self.ball_of(self.erecs[epos]);
            for t in &self.edge_terms[epos] {
                let vid = self.vrecs[t.pos];
                let Some(&row) = self.order_pos.get(&vid) else { continue };
                let (kind, entries) = if t.same_disc {
                    (BlockKind::Identity, self.identity_block())
                } else {
                    (BlockKind::Restriction, self.restriction_matrix(&eball, &self.ball_of(vid))?)
                };
                blocks.push(Block { row, col, kind, sign: t.sign, entries });
            }
        }
        blocks.sort_by_key(|b| (b.col, b.row));
        Ok(BoundaryMatrix::new(self.order.clone(), self.d, blocks))
    }

    /// `r = 2 q^(k-1) (q + 1) (q^n - 1) / (q - 1)`.
    pub fn expected_rank_blocks(&self) -> usize {
        let q = self.reg.q() as usize;
        let (k, n) = (self.reg.k, self.reg.n);
        2 * q.pow(k - 1) * (q + 1) * (q.pow(n) - 1) / (q - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::BtTree;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(p: u32, k: u32, n: u32, d: usize) -> ComplexModel {
        let cfg = PadicConfig::new(p, PadicConfig::max_precision(p).min(30)).unwrap();
        let reg = OrbitRegistry::build(&BtTree::new(cfg), n, k).unwrap();
        ComplexModel::new(reg, d).unwrap()
    }

    #[test]
    fn single_edge_chain() {
        let m = model(3, 1, 1, 1);
        let mut c = m.zero_chain1();
        c.0[0].coeffs[0] = m.config().one();
        let out = m.partial1(&c).unwrap();
        let terms = &m.edge_terms[0];
        for t in terms {
            let f = &out.0[t.pos];
            if t.same_disc {
                assert_eq!(f.coeffs[0], if t.sign > 0 { m.config().one() } else { -m.config().one() });
            } else {
                assert!((f.coeffs[0] - m.config().int(t.sign as i64)).is_zero());
            }
        }
        let touched: usize = out.0.iter().filter(|f| !f.is_zero()).count();
        assert_eq!(touched, terms.len());
        assert!(m.partial0(&out).unwrap().pieces.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn kernel_round_trip() {
        let m = model(3, 1, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero: Vec<TruncFun> = m.order.iter().map(|&id| TruncFun::zero(m.ball_of(id), 1)).collect();
        assert!(m.kernel_lift(&zero).unwrap().0.iter().all(|f| f.is_zero()));
        let x = m.random_nonmin(&mut rng);
        let lifted = m.kernel_lift(&x).unwrap();
        assert!(m.partial0(&lifted).unwrap().pieces.iter().all(|f| f.is_zero()));
        let back = m.kernel_project(&lifted).unwrap();
        assert_eq!(back, x);
        let mut bad = lifted.clone();
        bad.0[0].coeffs[0] = bad.0[0].coeffs[0] + m.config().one();
        assert!(matches!(m.kernel_project(&bad), Err(Error::NotInKernel)));
    }

    #[test]
    fn single_nonminimal_disc_lift() {
        let m = model(2, 1, 1, 0);
        let id = m.order[0];
        let f = TruncFun::constant(m.ball_of(id), 0, m.config().int(5));
        let mut x: Vec<TruncFun> = m.order.iter().map(|&i| TruncFun::zero(m.ball_of(i), 0)).collect();
        x[0] = f.clone();
        let lifted = m.kernel_lift(&x).unwrap();
        for (k, &mu) in m.mins.iter().enumerate() {
            let b = m.ball_of(mu);
            let want = if b.is_subset(&f.ball).unwrap() { -m.config().int(5) } else { m.config().zero() };
            assert!((lifted.0[m.vpos[&mu]].coeffs[0] - want).is_zero(), "piece {k}");
        }
    }

    #[test]
    fn matrices_agree_with_chain_maps() {
        let m = model(2, 2, 1, 1);
        let d1 = m.d1_matrix().unwrap();
        let d0 = m.d0_matrix().unwrap();
        assert!(d0.mul(&d1).is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = m.random_chain1(&mut rng);
        let img = m.partial1(&c).unwrap();
        let b = m.d + 1;
        for (pos, f) in img.0.iter().enumerate() {
            for j in 0..b {
                let mut acc = m.config().zero();
                for (epos, g) in c.0.iter().enumerate() {
                    for i in 0..b {
                        acc = acc + d1.get(b * pos + j, b * epos + i) * g.coeffs[i];
                    }
                }
                assert!((acc - f.coeffs[j]).is_zero());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn boundary_of_boundary_vanishes_and_d1_is_injective(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3]), d in 0usize..=2) {
            let m = model(p, 1, 1, d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = m.random_chain1(&mut rng);
            prop_assume!(!c.0.iter().all(|f| f.is_zero()));
            let b = m.partial1(&c).unwrap();
            prop_assert!(!b.0.iter().all(|f| f.is_zero()));
            prop_assert!(m.partial0(&b).unwrap().pieces.iter().all(|f| f.is_zero()));
        }
    }
}
