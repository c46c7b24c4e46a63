//! Components of the stable Auslander–Reiten quiver explored by iterated almost
//! split sequences, tube detection, the subadditive rank function and export.

use crate::ars::{almost_split_sequence_with, tau_agreement, AssCertificate, AssOptions};
use crate::finalg::{decompose_with, is_indecomposable, DecomposeOptions};
use crate::lattice::{iso_test_with, IsoOptions, IsoResult, Lattice, LatticeInvariants, LatticeJson};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

pub const SCHEMA: &str = "arq-component/1";

#[derive(Clone, Debug)]
pub struct Vertex {
    pub id: usize,
    pub lattice: Lattice,
    pub invariants: LatticeInvariants,
    /// BFS round in which the vertex was discovered (the seed has round 0).
    pub round: usize,
    pub expanded: bool,
}

/// An arrow `src → tgt` with value `(a, b)`: `a` is the multiplicity of `src` in the
/// middle term ending at `tgt`, `b` that of `tgt` in the middle term starting at `src`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub src: usize,
    pub tgt: usize,
    pub a: Option<usize>,
    pub b: Option<usize>,
}

/// A projective summand of a middle term, kept out of the stable quiver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectiveSummand {
    pub middle_of: usize,
    pub rank: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct ARComponent {
    pub n: usize,
    pub p: u32,
    pub precision: usize,
    pub seed: usize,
    pub depth: usize,
    pub vertices: Vec<Vertex>,
    pub arrows: Vec<Arrow>,
    pub tau: BTreeMap<usize, usize>,
    pub projectives: Vec<ProjectiveSummand>,
    /// Some vertex was separated from another only by `ProbablyNotIso`.
    pub confidence_qualified: bool,
    pub certificates: BTreeMap<usize, AssCertificate>,
    /// Result of the `D Coker Hom(p, A)` cross-check of τ per expanded vertex, when requested.
    pub tau_agreement: BTreeMap<usize, bool>,
    /// Middle term not isomorphic to `τM ⊕ M`, decided from its decomposition, when requested.
    pub miyata: BTreeMap<usize, bool>,
}

#[derive(Clone, Copy, Debug)]
pub struct ComponentOptions {
    pub max_vertices: usize,
    pub ass: AssOptions,
    pub iso: IsoOptions,
    pub cross_check_tau: bool,
    pub check_miyata: bool,
}

impl Default for ComponentOptions {
    fn default() -> Self {
        ComponentOptions {
            max_vertices: 200,
            ass: AssOptions { check_section: false },
            iso: IsoOptions::default(),
            cross_check_tau: false,
            check_miyata: false,
        }
    }
}

pub fn build_component(seed: &Lattice, depth: usize) -> Result<ARComponent> {
    build_component_with(seed, depth, &ComponentOptions::default())
}

pub fn build_component_with(seed: &Lattice, depth: usize, opts: &ComponentOptions) -> Result<ARComponent> {
    if !is_indecomposable(seed)? {
        return Err(Error::NotLocal);
    }
    if seed.is_projective()? {
        return Err(Error::ProjectiveInput);
    }
    if !seed.is_projective_over_k()? {
        return Err(Error::PropertyStarFails);
    }
    let ctx = seed.context();
    let mut c = ARComponent {
        n: seed.n(),
        p: ctx.p(),
        precision: ctx.precision(),
        seed: 0,
        depth,
        vertices: vec![Vertex {
            id: 0,
            lattice: seed.clone(),
            invariants: seed.invariants()?,
            round: 0,
            expanded: false,
        }],
        arrows: vec![],
        tau: BTreeMap::new(),
        projectives: vec![],
        confidence_qualified: false,
        certificates: BTreeMap::new(),
        tau_agreement: BTreeMap::new(),
        miyata: BTreeMap::new(),
    };
    let mut frontier = vec![0usize];
    for round in 1..=depth {
        let mut next = Vec::new();
        for &v in &frontier {
            if c.vertices[v].expanded {
                continue;
            }
            let found = c.expand(v, round, opts)?;
            next.extend(found);
        }
        next.sort();
        next.dedup();
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(c)
}

impl ARComponent {
    fn find_or_add(&mut self, l: &Lattice, round: usize, opts: &ComponentOptions, new: &mut Vec<usize>) -> Result<usize> {
        let inv = l.invariants()?;
        for v in &self.vertices {
            if v.invariants != inv {
                continue;
            }
            match iso_test_with(&v.lattice, l, &opts.iso)? {
                IsoResult::ProvenIso(_) => return Ok(v.id),
                IsoResult::ProbablyNotIso { .. } => self.confidence_qualified = true,
                IsoResult::NotIso(_) => {}
            }
        }
        if self.vertices.len() >= opts.max_vertices {
            return Err(Error::BudgetExceeded(opts.max_vertices));
        }
        let id = self.vertices.len();
        let label = l.label().map(str::to_string).unwrap_or_else(|| format!("V{id}"));
        self.vertices.push(Vertex { id, lattice: l.with_label(label), invariants: inv, round, expanded: false });
        new.push(id);
        Ok(id)
    }

    fn arrow_mut(&mut self, src: usize, tgt: usize) -> &mut Arrow {
        let pos = match self.arrows.iter().position(|a| a.src == src && a.tgt == tgt) {
            Some(pos) => pos,
            None => {
                self.arrows.push(Arrow { src, tgt, a: None, b: None });
                self.arrows.len() - 1
            }
        };
        &mut self.arrows[pos]
    }

    /// Compute the almost split sequence ending at `v`; returns newly discovered vertices.
    fn expand(&mut self, v: usize, round: usize, opts: &ComponentOptions) -> Result<Vec<usize>> {
        let m = self.vertices[v].lattice.clone();
        let ass = almost_split_sequence_with(&m, &opts.ass)?;
        if opts.cross_check_tau {
            let agree = tau_agreement(&m)?.is_iso();
            self.tau_agreement.insert(v, agree);
        }
        let mut new = Vec::new();
        let t = self.find_or_add(&ass.seq.left, round, opts, &mut new)?;
        self.tau.insert(v, t);
        // Known vertices and A are split off first; the remainder is decomposed generically.
        let middle = &ass.seq.middle;
        let mut hints = vec![Lattice::regular(m.context(), m.n())];
        let mdiv = middle.invariants()?;
        for x in &self.vertices {
            if x.lattice.rank() < middle.rank() && fits_inside(&x.invariants, &mdiv) {
                hints.push(x.lattice.clone());
            }
        }
        let dec = decompose_with(middle, &hints, &DecomposeOptions { seed: 0, iso: opts.iso })?;
        let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
        let mut proj = 0usize;
        let mut proj_rank = 0usize;
        for part in &dec.parts {
            if part.lattice.is_projective()? {
                proj += 1;
                proj_rank = part.lattice.rank();
                continue;
            }
            if !is_indecomposable(&part.lattice)? {
                return Err(Error::AlgorithmFailure("middle-term summand is not indecomposable".into()));
            }
            let id = self.find_or_add(&part.lattice, round, opts, &mut new)?;
            *mult.entry(id).or_insert(0) += 1;
        }
        if opts.check_miyata {
            // Krull–Schmidt: E ≅ τM ⊕ M iff its summands are exactly τM and M.
            let mut split = BTreeMap::new();
            *split.entry(t).or_insert(0) += 1;
            *split.entry(v).or_insert(0) += 1;
            self.miyata.insert(v, proj > 0 || mult != split);
        }
        if proj > 0 {
            self.projectives.push(ProjectiveSummand { middle_of: v, rank: proj_rank, multiplicity: proj });
        }
        for (&y, &k) in &mult {
            self.arrow_mut(y, v).a = Some(k);
            self.arrow_mut(t, y).b = Some(k);
        }
        self.vertices[v].expanded = true;
        self.certificates.insert(v, ass.cert);
        Ok(new)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn predecessors(&self, x: usize) -> BTreeMap<usize, Option<usize>> {
        self.arrows.iter().filter(|a| a.tgt == x).map(|a| (a.src, a.a)).collect()
    }

    fn successors(&self, x: usize) -> BTreeMap<usize, Option<usize>> {
        self.arrows.iter().filter(|a| a.src == x).map(|a| (a.tgt, a.b)).collect()
    }

    /// Vertices whose neighbourhoods (and those of `τx`) are completely computed.
    pub fn interior_vertices(&self) -> Vec<usize> {
        let expanded = |x: usize| self.vertices[x].expanded;
        (0..self.vertices.len())
            .filter(|&x| {
                let Some(&t) = self.tau.get(&x) else { return false };
                if !expanded(x) || !expanded(t) {
                    return false;
                }
                let near: BTreeSet<usize> = self
                    .arrows
                    .iter()
                    .filter(|a| [x, t].contains(&a.src) || [x, t].contains(&a.tgt))
                    .flat_map(|a| [a.src, a.tgt])
                    .collect();
                near.iter().all(|&y| expanded(y))
            })
            .collect()
    }

    /// `{y → x}` equals `{τx → y}` as valued multisets at every interior vertex.
    pub fn check_translation_quiver(&self) -> (usize, bool) {
        let interior = self.interior_vertices();
        let ok = interior.iter().all(|&x| {
            let t = self.tau[&x];
            let into = self.predecessors(x);
            into == self.successors(t)
        });
        (interior.len(), ok)
    }

    /// `v(x→y) = (a, b)` implies `v(τy→x) = (b, a)`; returns (pairs compared, all agree).
    pub fn check_valuation_duality(&self) -> (usize, bool) {
        let mut compared = 0;
        let mut ok = true;
        for arr in &self.arrows {
            let Some(&ty) = self.tau.get(&arr.tgt) else { continue };
            let Some(dual) = self.arrows.iter().find(|b| b.src == ty && b.tgt == arr.src) else { continue };
            if let (Some(a), Some(b), Some(da), Some(db)) = (arr.a, arr.b, dual.a, dual.b) {
                compared += 1;
                ok &= a == db && b == da;
            }
        }
        (compared, ok)
    }

    pub fn has_loops(&self) -> bool {
        self.arrows.iter().any(|a| a.src == a.tgt)
    }

    /// Minimal `k` with `τ^k x = x`, if the orbit closes inside the computed τ-map.
    pub fn tau_period(&self, x: usize) -> Option<usize> {
        let mut y = x;
        for k in 1..=self.vertices.len() {
            y = *self.tau.get(&y)?;
            if y == x {
                return Some(k);
            }
        }
        None
    }

    /// `f(x)`: average rank over the τ-orbit, as (numerator, denominator).
    pub fn f_value(&self, x: usize) -> Option<(usize, usize)> {
        let k = self.tau_period(x)?;
        let mut y = x;
        let mut total = 0;
        for _ in 0..k {
            total += self.vertices[y].lattice.rank();
            y = self.tau[&y];
        }
        Some((total, k))
    }

    /// Levels as `1 + distance` to the mouth (vertices with a single non-projective predecessor).
    pub fn levels(&self) -> BTreeMap<usize, usize> {
        let mouth: Vec<usize> = (0..self.vertices.len())
            .filter(|&x| self.vertices[x].expanded && self.predecessors(x).len() == 1)
            .collect();
        let mut level = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &x in &mouth {
            level.insert(x, 1);
            queue.push_back(x);
        }
        while let Some(x) = queue.pop_front() {
            let l = level[&x];
            let nbrs: Vec<usize> = self
                .arrows
                .iter()
                .filter_map(|a| if a.src == x { Some(a.tgt) } else if a.tgt == x { Some(a.src) } else { None })
                .collect();
            for y in nbrs {
                if let std::collections::btree_map::Entry::Vacant(e) = level.entry(y) {
                    e.insert(l + 1);
                    queue.push_back(y);
                }
            }
        }
        level
    }

    pub fn to_json(&self) -> ComponentJson {
        ComponentJson {
            schema: SCHEMA.to_string(),
            n: self.n,
            p: self.p,
            precision: self.precision,
            seed: self.seed,
            depth: self.depth,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexJson { id: v.id, round: v.round, expanded: v.expanded, lattice: v.lattice.to_json() })
                .collect(),
            arrows: self.arrows.clone(),
            tau: self.tau.iter().map(|(&a, &b)| (a, b)).collect(),
            projectives: self.projectives.clone(),
            confidence_qualified: self.confidence_qualified,
        }
    }

    pub fn from_json(j: &ComponentJson) -> Result<Self> {
        if j.schema != SCHEMA {
            return Err(Error::Parse(format!("unknown schema {}", j.schema)));
        }
        let mut vertices = Vec::new();
        for (k, v) in j.vertices.iter().enumerate() {
            if v.id != k {
                return Err(Error::Parse("vertex ids must be 0, 1, …".into()));
            }
            let lattice = Lattice::from_json(&v.lattice)?;
            vertices.push(Vertex {
                id: v.id,
                invariants: lattice.invariants()?,
                lattice,
                round: v.round,
                expanded: v.expanded,
            });
        }
        let nv = vertices.len();
        if j.arrows.iter().any(|a| a.src >= nv || a.tgt >= nv) || j.tau.iter().any(|&(a, b)| a >= nv || b >= nv) {
            return Err(Error::Parse("arrow or τ endpoint out of range".into()));
        }
        Ok(ARComponent {
            n: j.n,
            p: j.p,
            precision: j.precision,
            seed: j.seed,
            depth: j.depth,
            vertices,
            arrows: j.arrows.clone(),
            tau: j.tau.iter().copied().collect(),
            projectives: j.projectives.clone(),
            confidence_qualified: j.confidence_qualified,
            certificates: BTreeMap::new(),
            tau_agreement: BTreeMap::new(),
            miyata: BTreeMap::new(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph component {\n  rankdir=BT;\n");
        for v in &self.vertices {
            let shape = if v.expanded { "ellipse" } else { "box" };
            let _ = writeln!(
                s,
                "  v{} [label=\"{} (rank {})\", shape={}];",
                v.id,
                v.lattice.name().replace('"', "'"),
                v.lattice.rank(),
                shape
            );
        }
        let show = |x: Option<usize>| x.map_or("?".to_string(), |v| v.to_string());
        for a in &self.arrows {
            let _ = writeln!(s, "  v{} -> v{} [label=\"({},{})\"];", a.src, a.tgt, show(a.a), show(a.b));
        }
        for (&x, &t) in &self.tau {
            let _ = writeln!(s, "  v{x} -> v{t} [style=dashed, label=\"τ\", constraint=false];");
        }
        s.push_str("}\n");
        s
    }
}

/// Whether the `X^k` elementary divisors of `small` can occur inside those of `big`.
fn fits_inside(small: &LatticeInvariants, big: &LatticeInvariants) -> bool {
    small.xpow_divisors.iter().zip(&big.xpow_divisors).all(|(s, b)| {
        let mut counts: BTreeMap<_, i64> = BTreeMap::new();
        for v in b {
            *counts.entry(*v).or_insert(0) += 1;
        }
        for v in s {
            *counts.entry(*v).or_insert(0) -= 1;
        }
        counts.values().all(|&c| c >= 0)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub round: usize,
    pub expanded: bool,
    pub lattice: LatticeJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub schema: String,
    pub n: usize,
    pub p: u32,
    pub precision: usize,
    pub seed: usize,
    pub depth: usize,
    pub vertices: Vec<VertexJson>,
    pub arrows: Vec<Arrow>,
    pub tau: Vec<(usize, usize)>,
    pub projectives: Vec<ProjectiveSummand>,
    pub confidence_qualified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TubeReport {
    pub is_tube: bool,
    pub tau_period: Option<usize>,
    pub depth: usize,
    pub vertices: usize,
    /// Ranks of the vertices at each level, from the mouth upwards.
    pub ranks_by_level: Vec<Vec<usize>>,
    /// `f(x)` as (numerator, denominator) per vertex with a closed τ-orbit.
    pub f_values: BTreeMap<usize, (usize, usize)>,
    pub mouth_orbits: usize,
    pub notes: Vec<String>,
}

impl TubeReport {
    pub fn summary_line(&self) -> String {
        match (self.is_tube, self.tau_period) {
            (true, Some(k)) => format!("tube period={k} depth={} vertices={}", self.depth, self.vertices),
            _ => format!("inconclusive depth={} vertices={}", self.depth, self.vertices),
        }
    }
}

pub fn tube_report(c: &ARComponent) -> Result<TubeReport> {
    let mut notes = Vec::new();
    let expanded: Vec<usize> = (0..c.vertices.len()).filter(|&x| c.vertices[x].expanded).collect();
    let periods: Vec<Option<usize>> = expanded.iter().map(|&x| c.tau_period(x)).collect();
    let closed: BTreeSet<usize> = periods.iter().flatten().copied().collect();
    // An orbit may stay open because exploration stopped; only a τ-chain falling
    // into a cycle that avoids its start contradicts periodicity.
    let injective = c.tau.values().collect::<BTreeSet<_>>().len() == c.tau.len();
    let levels = c.levels();
    let max_level = levels.values().copied().max().unwrap_or(0);
    let mut ranks_by_level = vec![Vec::new(); max_level];
    for (&x, &l) in &levels {
        ranks_by_level[l - 1].push(c.vertices[x].lattice.rank());
    }
    for r in &mut ranks_by_level {
        r.sort();
    }
    let mouth: BTreeSet<usize> = levels.iter().filter(|(_, &l)| l == 1).map(|(&x, _)| x).collect();
    let mut mouth_orbits = 0;
    let mut seen = BTreeSet::new();
    for &x in &mouth {
        if seen.contains(&x) {
            continue;
        }
        mouth_orbits += 1;
        let mut y = x;
        while seen.insert(y) {
            match c.tau.get(&y) {
                Some(&t) => y = t,
                None => break,
            }
        }
    }
    // Tube shape: at most two neighbours below/above apart from τ.
    let shape_ok = expanded.iter().all(|&x| c.predecessors(x).len() <= 2);
    let mut f_values = BTreeMap::new();
    for x in 0..c.vertices.len() {
        if let Some(f) = c.f_value(x) {
            f_values.insert(x, f);
        }
    }
    if c.depth < 2 || expanded.len() < 2 {
        notes.push(format!("depth {} too small to witness periodicity", c.depth));
    }
    if !injective {
        notes.push("τ identifies two vertices".into());
    }
    if closed.len() > 1 {
        notes.push(format!("τ-periods differ: {closed:?}"));
    }
    let conclusive = c.depth >= 2 && injective && closed.len() == 1;
    let is_tube = conclusive && mouth_orbits == 1 && shape_ok && !c.has_loops();
    let tau_period = if closed.len() == 1 { closed.iter().next().copied() } else { None };
    Ok(TubeReport {
        is_tube,
        tau_period: if conclusive { tau_period } else { None },
        depth: c.depth,
        vertices: c.vertices.len(),
        ranks_by_level,
        f_values,
        mouth_orbits,
        notes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubadditiveEntry {
    pub vertex: usize,
    /// `2 f(x)` and `Σ_{y→x} a_{yx} f(y)` as rationals over a common denominator.
    pub lhs: (usize, usize),
    pub rhs: (usize, usize),
    pub holds: bool,
}

/// `2 f(x) ≥ Σ_{y→x} a_{yx} f(y)` at every interior vertex with known `f` values.
pub fn subadditive_check(c: &ARComponent) -> Vec<SubadditiveEntry> {
    let mut out = Vec::new();
    for x in c.interior_vertices() {
        let Some((fx, dx)) = c.f_value(x) else { continue };
        let preds = c.predecessors(x);
        let mut terms = Vec::new();
        let mut complete = true;
        for (&y, &a) in &preds {
            match (c.f_value(y), a) {
                (Some(f), Some(a)) => terms.push((a * f.0, f.1)),
                _ => complete = false,
            }
        }
        if !complete {
            continue;
        }
        let den = terms.iter().fold(dx, |acc, &(_, d)| lcm(acc, d));
        let rhs: usize = terms.iter().map(|&(num, d)| num * (den / d)).sum();
        let lhs = 2 * fx * (den / dx);
        out.push(SubadditiveEntry { vertex: x, lhs: (lhs, den), rhs: (rhs, den), holds: lhs >= rhs });
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::DvrContext;
    use crate::heller::closed_form_zi;

    #[test]
    fn small_components() {
        let c = DvrContext::for_n(101, 3).unwrap();
        let comp = build_component(&closed_form_zi(c, 3, 1).unwrap(), 3).unwrap();
        assert!(!comp.projectives.is_empty());
        let rep = tube_report(&comp).unwrap();
        assert!(rep.is_tube, "{rep:?}");
        assert_eq!(rep.tau_period, Some(2));
        assert!(comp.check_translation_quiver().1);
        assert!(!comp.has_loops());
        assert!(subadditive_check(&comp).iter().all(|e| e.holds));

        let c = DvrContext::for_n(101, 4).unwrap();
        let comp = build_component(&closed_form_zi(c, 4, 2).unwrap(), 3).unwrap();
        let rep = tube_report(&comp).unwrap();
        assert_eq!(rep.tau_period, Some(1));
    }

    #[test]
    fn insufficient_depth_is_inconclusive() {
        let c = DvrContext::for_n(101, 3).unwrap();
        let comp = build_component(&closed_form_zi(c, 3, 1).unwrap(), 1).unwrap();
        let rep = tube_report(&comp).unwrap();
        assert!(!rep.is_tube);
        assert!(rep.summary_line().starts_with("inconclusive"));
    }

    #[test]
    fn export_round_trip() {
        let c = DvrContext::for_n(101, 3).unwrap();
        let comp = build_component(&closed_form_zi(c, 3, 1).unwrap(), 2).unwrap();
        let j = comp.to_json();
        let back = ARComponent::from_json(&j).unwrap();
        assert_eq!(back.to_json(), j);
        let dot = comp.to_dot();
        assert!(dot.contains("style=dashed"));
        assert_eq!(dot, back.to_dot());
    }
}
