//! Orbits of congruence subgroups on `P^1(Q_p)`, realized as discs, and the
//! registries of all such orbits over the simplices of a tree ball.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::PadicConfig;
use crate::projline::{class_representative, residue_classes, Ball, ProjPoint};
use crate::tree::{BtTree, OrientedEdge, Simplex, Vertex};

/// An orbit of the level-`k` group of a simplex, as a disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orbit {
    pub simplex: Simplex,
    pub k: u32,
    pub ball: Ball,
}

fn check_level(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::BadLevel)
    } else {
        Ok(())
    }
}

/// Orbits of the standard vertex group (`is_edge = false`) or standard edge group.
pub fn standard_orbits(cfg: PadicConfig, k: u32, is_edge: bool) -> Result<Vec<Ball>> {
    check_level(k)?;
    let p = cfg.p() as u64;
    let finite_level = if is_edge { k - 1 } else { k };
    let mut out = Vec::new();
    for c in 0..cfg.pow_p(finite_level) {
        out.push(Ball::z(cfg.int(c as i64), finite_level as i64)?);
    }
    for j in 0..cfg.pow_p(k - 1) {
        out.push(Ball::w_chart(cfg.int((p * j) as i64), k as i64)?);
    }
    Ok(out)
}

fn standard_orbit_of(pt: &ProjPoint, k: u32, is_edge: bool) -> Result<Ball> {
    let finite_level = if is_edge { k - 1 } else { k } as i64;
    match pt.affine() {
        Some(z) if z.is_zero() || z.val() >= 0 => Ball::z(z, finite_level),
        Some(z) => Ball::w_chart(z.checked_inv()?, k as i64),
        None => Ball::w_chart(pt.coords().0.config().zero(), k as i64),
    }
}

/// The orbit through `z` of the level-`k` group of `s`.
pub fn orbit_of_point(tree: &BtTree, s: &Simplex, k: u32, z: &ProjPoint) -> Result<Orbit> {
    check_level(k)?;
    let h = tree.frame(s)?;
    let is_edge = matches!(s, Simplex::Edge(_));
    let std = standard_orbit_of(&z.act(&h), k, is_edge)?;
    Ok(Orbit { simplex: *s, k, ball: std.image(&h.inverse()?)? })
}

/// All orbits of the level-`k` group of `s`, sorted by disc.
pub fn enumerate_orbits(tree: &BtTree, s: &Simplex, k: u32) -> Result<Vec<Orbit>> {
    let h = tree.frame(s)?;
    let hi = h.inverse()?;
    let is_edge = matches!(s, Simplex::Edge(_));
    let mut out = standard_orbits(tree.config(), k, is_edge)?
        .into_iter()
        .map(|b| Ok(Orbit { simplex: *s, k, ball: b.image(&hi)? }))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|o| o.ball);
    Ok(out)
}

/// True iff the discs are pairwise disjoint and cover `P^1(Q_p)`, decided on
/// the classes of `P^1(Z/p^D)` for `D` one more than the finest disc depth.
pub fn check_partition(balls: &[Ball]) -> Result<bool> {
    let Some(first) = balls.first() else { return Ok(false) };
    let cfg = first.config();
    let depth = balls.iter().map(|b| b.residue_depth()).max().unwrap() + 1;
    for cl in residue_classes(cfg, depth) {
        let pt = class_representative(cfg, cl);
        let mut hits = 0;
        for b in balls {
            if b.contains(&pt)? {
                hits += 1;
                if hits > 1 {
                    return Ok(false);
                }
            }
        }
        if hits != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub id: usize,
    pub simplex: Simplex,
    pub ball: Ball,
    pub minimal: bool,
    /// For minimal records: a record over the root-ward neighbor containing this one.
    pub witness: Option<usize>,
    /// For edge records: the vertex record with the same disc.
    pub owner: Option<usize>,
    /// Vertex records over adjacent vertices properly containing this disc.
    pub parents: Vec<usize>,
    /// Vertex records over adjacent vertices properly contained in this disc.
    pub children: Vec<usize>,
}

impl OrbitRecord {
    pub fn vertex(&self) -> Option<Vertex> {
        match self.simplex {
            Simplex::Vertex(v) => Some(v),
            Simplex::Edge(_) => None,
        }
    }

    pub fn is_vertex_record(&self) -> bool {
        matches!(self.simplex, Simplex::Vertex(_))
    }
}

/// All orbit records over the vertices and (root-outward) edges within depth `n`.
#[derive(Debug, Clone)]
pub struct OrbitRegistry {
    tree: BtTree,
    pub n: u32,
    pub k: u32,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<OrientedEdge>,
    pub records: Vec<OrbitRecord>,
    by_simplex: BTreeMap<Simplex, Vec<usize>>,
    by_vertex_ball: HashMap<(Vertex, Ball), usize>,
}

impl OrbitRegistry {
    pub fn build(tree: &BtTree, n: u32, k: u32) -> Result<OrbitRegistry> {
        check_level(k)?;
        let vertices = tree.ball(n);
        let edges = tree.edges(n);
        let mut records = Vec::new();
        let mut by_simplex: BTreeMap<Simplex, Vec<usize>> = BTreeMap::new();
        let simplices = vertices.iter().map(|v| Simplex::Vertex(*v)).chain(edges.iter().map(|e| Simplex::Edge(*e)));
        for s in simplices {
            for o in enumerate_orbits(tree, &s, k)? {
                let id = records.len();
                by_simplex.entry(s).or_default().push(id);
                records.push(OrbitRecord {
                    id,
                    simplex: s,
                    ball: o.ball,
                    minimal: false,
                    witness: None,
                    owner: None,
                    parents: Vec::new(),
                    children: Vec::new(),
                });
            }
        }
        let by_vertex_ball = records.iter().filter_map(|r| r.vertex().map(|v| ((v, r.ball), r.id))).collect();
        let mut reg = OrbitRegistry { tree: *tree, n, k, vertices, edges, records, by_simplex, by_vertex_ball };
        reg.link_containment()?;
        reg.flag_minimal()?;
        reg.assign_owners()?;
        Ok(reg)
    }

    pub fn tree(&self) -> &BtTree {
        &self.tree
    }

    pub fn config(&self) -> PadicConfig {
        self.tree.config()
    }

    pub fn q(&self) -> u64 {
        self.tree.p() as u64
    }

    pub fn records_of(&self, s: &Simplex) -> &[usize] {
        self.by_simplex.get(s).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn vertex_record(&self, v: &Vertex, ball: &Ball) -> Option<usize> {
        self.by_vertex_ball.get(&(*v, *ball)).copied()
    }

    fn link_containment(&mut self) -> Result<()> {
        for v in self.vertices.clone() {
            for w in self.tree.neighbors(&v) {
                if w.n > self.n {
                    continue;
                }
                for &i in self.records_of(&Simplex::Vertex(v)).to_vec().iter() {
                    for &j in self.records_of(&Simplex::Vertex(w)).to_vec().iter() {
                        let (bi, bj) = (self.records[i].ball, self.records[j].ball);
                        if bi.is_proper_subset(&bj)? {
                            self.records[i].parents.push(j);
                            self.records[j].children.push(i);
                        }
                    }
                }
            }
        }
        for r in &mut self.records {
            r.parents.sort_unstable();
            r.parents.dedup();
            r.children.sort_unstable();
            r.children.dedup();
        }
        Ok(())
    }

    fn flag_minimal(&mut self) -> Result<()> {
        if self.n == 0 {
            return Ok(());
        }
        for i in 0..self.records.len() {
            let Some(v) = self.records[i].vertex() else { continue };
            if v.n != self.n {
                continue;
            }
            let parent = self.tree.parent(&v).unwrap();
            let ball = self.records[i].ball;
            for &j in self.records_of(&Simplex::Vertex(parent)) {
                if ball.is_subset(&self.records[j].ball)? {
                    self.records[i].minimal = true;
                    self.records[i].witness = Some(j);
                    break;
                }
            }
        }
        Ok(())
    }

    fn assign_owners(&mut self) -> Result<()> {
        for i in 0..self.records.len() {
            if let Simplex::Edge(e) = self.records[i].simplex {
                let b = self.records[i].ball;
                let hits: Vec<usize> = [e.src, e.dst].iter().filter_map(|v| self.vertex_record(v, &b)).collect();
                if hits.len() != 1 {
                    return Err(Error::Invalid(format!(
                        "edge orbit {b} over {}-{} matches {} endpoint orbits",
                        e.src,
                        e.dst,
                        hits.len()
                    )));
                }
                self.records[i].owner = Some(hits[0]);
            }
        }
        Ok(())
    }

    /// The endpoint whose group has the edge record's disc as an orbit.
    pub fn edge_orbit_owner(&self, id: usize) -> Result<Vertex> {
        let r = &self.records[id];
        match (r.simplex, r.owner) {
            (Simplex::Edge(_), Some(o)) => Ok(self.records[o].vertex().unwrap()),
            _ => Err(Error::Invalid(format!("record {id} is not an edge record"))),
        }
    }

    pub fn minimal_orbits(&self) -> Vec<&OrbitRecord> {
        self.records.iter().filter(|r| r.minimal).collect()
    }

    pub fn vertex_records(&self) -> impl Iterator<Item = &OrbitRecord> {
        self.records.iter().filter(|r| r.is_vertex_record())
    }

    pub fn edge_records(&self) -> impl Iterator<Item = &OrbitRecord> {
        self.records.iter().filter(|r| !r.is_vertex_record())
    }

    /// Non-minimal vertex records, larger discs first: by invariant measure
    /// (descending), then disc, then vertex.
    pub fn nonminimal_order(&self) -> Vec<usize> {
        let mut ids: Vec<(Ratio<i128>, usize)> =
            self.vertex_records().filter(|r| !r.minimal).map(|r| (r.ball.measure(), r.id)).collect();
        ids.sort_by(|(ma, a), (mb, b)| {
            let (ra, rb) = (&self.records[*a], &self.records[*b]);
            mb.cmp(ma).then(ra.ball.cmp(&rb.ball)).then(ra.simplex.cmp(&rb.simplex))
        });
        ids.into_iter().map(|(_, id)| id).collect()
    }

    /// Checks the counting formulas and the identification of edge orbits
    /// with non-minimal vertex orbits.
    pub fn verify_counts(&self) -> Result<CountReport> {
        let q = self.q() as i64;
        let k = self.k;
        let n = self.n;
        let mut rows = Vec::new();
        let mut counterexample = None;
        let per_vertex = (q + 1) * q.pow(k - 1);
        let per_edge = 2 * q.pow(k - 1);
        for v in &self.vertices {
            let got = self.records_of(&Simplex::Vertex(*v)).len() as i64;
            if got != per_vertex && counterexample.is_none() {
                counterexample = Some(format!("vertex {v} has {got} orbits"));
            }
        }
        for e in &self.edges {
            let got = self.records_of(&Simplex::Edge(*e)).len() as i64;
            if got != per_edge && counterexample.is_none() {
                counterexample = Some(format!("edge {}-{} has {got} orbits", e.src, e.dst));
            }
        }
        rows.push(CountRow::new("orbits per vertex", per_vertex, self.min_max_per(true).0));
        rows.push(CountRow::new("orbits per edge", per_edge, self.min_max_per(false).0));
        let boundary = self.vertices.iter().filter(|v| v.n == n).count() as i64;
        if n >= 1 {
            for v in self.vertices.iter() {
                let got =
                    self.records_of(&Simplex::Vertex(*v)).iter().filter(|&&i| self.records[i].minimal).count() as i64;
                let want = if v.n == n { q.pow(k) } else { 0 };
                if got != want && counterexample.is_none() {
                    counterexample = Some(format!("vertex {v} has {got} minimal orbits, expected {want}"));
                }
            }
            rows.push(CountRow::new("minimal orbits", boundary * q.pow(k), self.minimal_orbits().len() as i64));
        }
        let r = if n == 0 { 0 } else { 2 * q.pow(k - 1) * (q + 1) * (q.pow(n) - 1) / (q - 1) };
        let nonmin = self.vertex_records().filter(|x| !x.minimal).count() as i64;
        let edge_recs = self.edge_records().count() as i64;
        rows.push(CountRow::new("non-minimal vertex orbits", r, nonmin));
        rows.push(CountRow::new("edge orbits", r, edge_recs));
        // every edge record is a non-minimal vertex record, and distinct edge records
        // have distinct owners
        let mut owners: Vec<usize> = self.edge_records().map(|x| x.owner.unwrap()).collect();
        if let Some(bad) = owners.iter().find(|&&o| self.records[o].minimal) {
            counterexample.get_or_insert(format!("edge orbit owned by minimal record {bad}"));
        }
        owners.sort_unstable();
        let before = owners.len();
        owners.dedup();
        if owners.len() != before {
            counterexample.get_or_insert("two edge orbits share an owner".to_string());
        }
        rows.push(CountRow::new("distinct edge-orbit owners", r, owners.len() as i64));
        let ok = counterexample.is_none() && rows.iter().all(|r| r.expected == r.actual);
        Ok(CountReport { p: self.tree.p(), k, n, rows, ok, counterexample })
    }

    fn min_max_per(&self, vertex: bool) -> (i64, i64) {
        let counts: Vec<i64> = self
            .by_simplex
            .iter()
            .filter(|(s, _)| matches!(s, Simplex::Vertex(_)) == vertex)
            .map(|(_, ids)| ids.len() as i64)
            .collect();
        (counts.iter().copied().min().unwrap_or(0), counts.iter().copied().max().unwrap_or(0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub name: String,
    pub expected: i64,
    pub actual: i64,
}

impl CountRow {
    fn new(name: &str, expected: i64, actual: i64) -> Self {
        CountRow { name: name.to_string(), expected, actual }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub p: u32,
    pub k: u32,
    pub n: u32,
    pub rows: Vec<CountRow>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}
