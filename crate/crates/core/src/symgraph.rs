//! Joint skeleton/theory symmetry detection via colored-graph automorphism.
//!
//! The skeleton formula and its atom bindings are encoded as one
//! vertex-colored undirected graph whose color-preserving automorphisms are
//! candidate symmetries: simultaneous permutations of skeleton variables and
//! theory variables that map the problem to itself. Candidates come out of a
//! refinement-guided backtracking search; each is projected onto the two
//! variable families and accepted only after an end-to-end check that the
//! renamed assertion, the permuted skeleton, and the permuted atom bindings
//! all normalize back to the originals. That verification is the soundness
//! gate — encoding artifacts may admit spurious graph automorphisms, and
//! anything the gate rejects is dropped (counted, never used).
//!
//! Vertex schema: one hub per skeleton variable (one shared color), one hub
//! per theory variable (one color per sort), one hub per distinct integer
//! constant (unique color per value, so constants can only map to equal
//! constants); operator applications get per-occurrence vertices colored by
//! operator. Commutative operators reach shared hubs through interposed
//! occurrence vertices (preserving child multiplicity, e.g. `x + x`);
//! non-commutative binary operators order their arguments with two position
//! vertices; unary negation links directly. Each skeleton hub is tied to its
//! atom's root vertex, and a uniquely colored anchor marks the assertion
//! root.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::ast::{Atom, Relation, Script, Sort, Term};
use crate::deadline::Deadline;
use crate::normalize::{normalize, normalize_atom};
use crate::skeleton::{AtomMap, SkelFormula, SkeletonVar};

/// A verified symmetry: a simultaneous permutation of skeleton variables and
/// theory variables. Maps store only moved points (identity entries
/// omitted) and are bijections on their supports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Permutation {
    pub skeleton_map: BTreeMap<SkeletonVar, SkeletonVar>,
    pub theory_map: BTreeMap<String, String>,
}

impl Permutation {
    pub fn new(
        skeleton_map: BTreeMap<SkeletonVar, SkeletonVar>,
        theory_map: BTreeMap<String, String>,
    ) -> Permutation {
        let mut skeleton_map = skeleton_map;
        skeleton_map.retain(|k, v| k != v);
        let mut theory_map = theory_map;
        theory_map.retain(|k, v| k != v);
        let keys: Vec<_> = skeleton_map.keys().copied().collect();
        let mut vals: Vec<_> = skeleton_map.values().copied().collect();
        vals.sort();
        assert_eq!(keys, vals, "skeleton map must permute its support");
        let keys: Vec<_> = theory_map.keys().cloned().collect();
        let mut vals: Vec<_> = theory_map.values().cloned().collect();
        vals.sort();
        assert_eq!(keys, vals, "theory map must permute its support");
        Permutation { skeleton_map, theory_map }
    }

    pub fn identity() -> Permutation {
        Permutation { skeleton_map: BTreeMap::new(), theory_map: BTreeMap::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.skeleton_map.is_empty() && self.theory_map.is_empty()
    }

    pub fn apply_skeleton(&self, v: SkeletonVar) -> SkeletonVar {
        self.skeleton_map.get(&v).copied().unwrap_or(v)
    }

    pub fn apply_theory<'a>(&'a self, name: &'a str) -> &'a str {
        self.theory_map.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Moved skeleton variables, ascending by id.
    pub fn skeleton_support(&self) -> impl Iterator<Item = SkeletonVar> + '_ {
        self.skeleton_map.keys().copied()
    }

    /// `self` applied first, then `other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let mut smap = BTreeMap::new();
        for &v in self.skeleton_map.keys().chain(other.skeleton_map.keys()) {
            smap.insert(v, other.apply_skeleton(self.apply_skeleton(v)));
        }
        let mut tmap = BTreeMap::new();
        for name in self.theory_map.keys().chain(other.theory_map.keys()) {
            tmap.insert(name.clone(), other.apply_theory(self.apply_theory(name)).to_string());
        }
        Permutation::new(smap, tmap)
    }

    pub fn inverse(&self) -> Permutation {
        Permutation::new(
            self.skeleton_map.iter().map(|(k, v)| (*v, *k)).collect(),
            self.theory_map.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
        )
    }

    /// Canonical cycle notation, skeleton cycles first: `(Q R)(x y)`. Each
    /// cycle starts at its smallest element; the identity renders as `()`.
    pub fn cycles(&self) -> String {
        let mut out = String::new();
        for cycle in cycle_decomposition(&self.skeleton_map) {
            let names: Vec<String> = cycle.iter().map(|v| v.label()).collect();
            out.push_str(&format!("({})", names.join(" ")));
        }
        for cycle in cycle_decomposition(&self.theory_map) {
            out.push_str(&format!("({})", cycle.join(" ")));
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

/// Splits a support-only bijection into cycles. Keys ascend, so every cycle
/// is met first at its minimum element and cycles come out sorted by it.
fn cycle_decomposition<T: Ord + Clone>(map: &BTreeMap<T, T>) -> Vec<Vec<T>> {
    let mut seen: BTreeSet<T> = BTreeSet::new();
    let mut cycles = Vec::new();
    for start in map.keys() {
        if seen.contains(start) {
            continue;
        }
        let mut cycle = vec![start.clone()];
        seen.insert(start.clone());
        let mut cur = &map[start];
        while cur != start {
            cycle.push(cur.clone());
            seen.insert(cur.clone());
            cur = &map[cur];
        }
        cycles.push(cycle);
    }
    cycles
}

/// Where a graph vertex came from; used to project vertex permutations back
/// onto variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOrigin {
    SkeletonVar(SkeletonVar),
    TheoryVar(String),
    Constant(BigInt),
    Operator(&'static str),
    Position(u8),
    Occurrence,
    Anchor,
}

/// Vertex-colored undirected graph. Color ids are dense from 0; edges are
/// stored once with the smaller endpoint first, sorted; no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    pub num_vertices: u32,
    pub edges: Vec<(u32, u32)>,
    pub colors: Vec<u32>,
    pub origins: Vec<VertexOrigin>,
}

impl ColoredGraph {
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.num_vertices as usize];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }
}

/// Registry key determining a vertex's color class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum ColorKey {
    SkeletonHub,
    TheoryHub(Sort),
    ConstHub(BigInt),
    BoolLeaf(bool),
    Op(&'static str),
    Rel(&'static str),
    Occurrence,
    Position(u8),
    Anchor,
}

struct GraphBuilder {
    colors: Vec<u32>,
    origins: Vec<VertexOrigin>,
    edges: Vec<(u32, u32)>,
    color_ids: BTreeMap<ColorKey, u32>,
    theory_hubs: BTreeMap<String, u32>,
    const_hubs: BTreeMap<BigInt, u32>,
    skeleton_hubs: Vec<u32>,
}

impl GraphBuilder {
    fn new() -> GraphBuilder {
        GraphBuilder {
            colors: Vec::new(),
            origins: Vec::new(),
            edges: Vec::new(),
            color_ids: BTreeMap::new(),
            theory_hubs: BTreeMap::new(),
            const_hubs: BTreeMap::new(),
            skeleton_hubs: Vec::new(),
        }
    }

    fn vertex(&mut self, key: ColorKey, origin: VertexOrigin) -> u32 {
        let next = self.color_ids.len() as u32;
        let color = *self.color_ids.entry(key).or_insert(next);
        let v = self.colors.len() as u32;
        self.colors.push(color);
        self.origins.push(origin);
        v
    }

    fn edge(&mut self, a: u32, b: u32) {
        debug_assert_ne!(a, b, "self-loop");
        self.edges.push((a.min(b), a.max(b)));
    }

    fn theory_hub(&mut self, name: &str, sort: Sort) -> u32 {
        if let Some(&v) = self.theory_hubs.get(name) {
            return v;
        }
        let v = self.vertex(
            ColorKey::TheoryHub(sort),
            VertexOrigin::TheoryVar(name.to_string()),
        );
        self.theory_hubs.insert(name.to_string(), v);
        v
    }

    fn const_hub(&mut self, value: &BigInt) -> u32 {
        if let Some(&v) = self.const_hubs.get(value) {
            return v;
        }
        let v = self.vertex(
            ColorKey::ConstHub(value.clone()),
            VertexOrigin::Constant(value.clone()),
        );
        self.const_hubs.insert(value.clone(), v);
        v
    }

    /// Connects a parent to an unordered child; shared hubs go through a
    /// fresh occurrence vertex so repeated children stay distinguishable.
    fn attach_unordered(&mut self, parent: u32, child: u32, child_is_hub: bool) {
        if child_is_hub {
            let occ = self.vertex(ColorKey::Occurrence, VertexOrigin::Occurrence);
            self.edge(parent, occ);
            self.edge(occ, child);
        } else {
            self.edge(parent, child);
        }
    }

    /// Connects a parent to the child in argument slot `slot` through a
    /// position vertex, fixing argument order for non-commutative operators.
    fn attach_positional(&mut self, parent: u32, slot: u8, child: u32) {
        let pos = self.vertex(ColorKey::Position(slot), VertexOrigin::Position(slot));
        self.edge(parent, pos);
        self.edge(pos, child);
    }

    /// Returns the subterm's root vertex and whether it is a shared hub.
    fn term_vertex(&mut self, t: &Term) -> (u32, bool) {
        match t {
            Term::IntConst(c) => (self.const_hub(c), true),
            Term::Var { name, sort } => (self.theory_hub(name, *sort), true),
            Term::Add(ts) | Term::Mul(ts) => {
                let op = if matches!(t, Term::Add(_)) { "+" } else { "*" };
                let v = self.vertex(ColorKey::Op(op), VertexOrigin::Operator(op));
                for child in ts {
                    let (cv, hub) = self.term_vertex(child);
                    self.attach_unordered(v, cv, hub);
                }
                (v, false)
            }
            Term::Sub(a, b) => {
                let v = self.vertex(ColorKey::Op("-"), VertexOrigin::Operator("-"));
                let (av, _) = self.term_vertex(a);
                self.attach_positional(v, 0, av);
                let (bv, _) = self.term_vertex(b);
                self.attach_positional(v, 1, bv);
                (v, false)
            }
            Term::Neg(a) => {
                let v = self.vertex(ColorKey::Op("neg"), VertexOrigin::Operator("neg"));
                let (av, _) = self.term_vertex(a);
                self.edge(v, av);
                (v, false)
            }
        }
    }

    fn atom_vertex(&mut self, a: &Atom) -> u32 {
        let (name, ordered) = match a.rel {
            Relation::Lt => ("<", true),
            Relation::Le => ("<=", true),
            Relation::Gt => (">", true),
            Relation::Ge => (">=", true),
            Relation::Eq => ("=", false),
            Relation::Neq => ("distinct", false),
        };
        let v = self.vertex(ColorKey::Rel(name), VertexOrigin::Operator(name));
        let (lv, lhub) = self.term_vertex(&a.lhs);
        let (rv, rhub) = self.term_vertex(&a.rhs);
        if ordered {
            self.attach_positional(v, 0, lv);
            self.attach_positional(v, 1, rv);
        } else {
            self.attach_unordered(v, lv, lhub);
            self.attach_unordered(v, rv, rhub);
        }
        v
    }

    fn formula_vertex(&mut self, f: &SkelFormula) -> (u32, bool) {
        match f {
            SkelFormula::Var(v) => (self.skeleton_hubs[v.0 as usize], true),
            SkelFormula::Const(b) => (
                self.vertex(ColorKey::BoolLeaf(*b), VertexOrigin::Operator(if *b { "true" } else { "false" })),
                false,
            ),
            SkelFormula::And(fs) | SkelFormula::Or(fs) => {
                let op = if matches!(f, SkelFormula::And(_)) { "and" } else { "or" };
                let v = self.vertex(ColorKey::Op(op), VertexOrigin::Operator(op));
                for child in fs {
                    let (cv, hub) = self.formula_vertex(child);
                    self.attach_unordered(v, cv, hub);
                }
                (v, false)
            }
            SkelFormula::Not(f) => {
                let v = self.vertex(ColorKey::Op("not"), VertexOrigin::Operator("not"));
                let (cv, _) = self.formula_vertex(f);
                self.edge(v, cv);
                (v, false)
            }
            SkelFormula::Implies(a, b) => {
                let v = self.vertex(ColorKey::Op("=>"), VertexOrigin::Operator("=>"));
                let (av, _) = self.formula_vertex(a);
                self.attach_positional(v, 0, av);
                let (bv, _) = self.formula_vertex(b);
                self.attach_positional(v, 1, bv);
                (v, false)
            }
        }
    }
}

/// Encodes the skeleton formula plus atom bindings as a colored graph whose
/// color-preserving automorphisms are candidate symmetries.
pub fn build_colored_graph(psi: &SkelFormula, atoms: &AtomMap) -> ColoredGraph {
    let mut b = GraphBuilder::new();
    for i in 0..atoms.len() as u32 {
        let v = b.vertex(
            ColorKey::SkeletonHub,
            VertexOrigin::SkeletonVar(SkeletonVar(i)),
        );
        b.skeleton_hubs.push(v);
    }
    for (sv, atom) in atoms.iter() {
        let root = b.atom_vertex(atom);
        let hub = b.skeleton_hubs[sv.0 as usize];
        b.edge(hub, root);
    }
    let (psi_root, _) = b.formula_vertex(psi);
    let anchor = b.vertex(ColorKey::Anchor, VertexOrigin::Anchor);
    b.edge(anchor, psi_root);
    let mut edges = b.edges;
    edges.sort_unstable();
    debug_assert!(edges.windows(2).all(|w| w[0] != w[1]), "duplicate edge");
    ColoredGraph {
        num_vertices: b.colors.len() as u32,
        edges,
        colors: b.colors,
        origins: b.origins,
    }
}

/// Iterative color refinement: vertices are repeatedly re-partitioned by
/// (own color, sorted multiset of neighbor colors) until the number of
/// classes stops growing. The result refines the input coloring, and any
/// color-preserving automorphism also preserves the refined classes.
pub fn refine_colors(g: &ColoredGraph) -> Vec<u32> {
    let n = g.num_vertices as usize;
    let adj = g.adjacency();
    let mut colors = g.colors.clone();
    let mut class_count = colors.iter().collect::<BTreeSet<_>>().len();
    loop {
        let mut ids: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
        let sigs: Vec<(u32, Vec<u32>)> = (0..n)
            .map(|v| {
                let mut around: Vec<u32> =
                    adj[v].iter().map(|&u| colors[u as usize]).collect();
                around.sort_unstable();
                (colors[v], around)
            })
            .collect();
        for sig in &sigs {
            let next = ids.len() as u32;
            ids.entry(sig.clone()).or_insert(next);
        }
        if ids.len() == class_count {
            return colors;
        }
        class_count = ids.len();
        colors = sigs.iter().map(|sig| ids[sig]).collect();
    }
}

/// Outcome of the generator search.
#[derive(Clone, Debug)]
pub struct AutSearchReport {
    /// Vertex permutations, each verified to preserve colors and adjacency.
    pub generators: Vec<Vec<u32>>,
    /// True when the search proved the generators generate the full
    /// color-preserving automorphism group (no budget/limit/deadline cut).
    pub complete: bool,
    pub nodes_used: u64,
}

const NO_IMAGE: u32 = u32::MAX;

struct MapSearch<'a> {
    n: usize,
    adj: &'a [Vec<u32>],
    adj_bits: Vec<u64>,
    words: usize,
    refined: &'a [u32],
    class_members: Vec<Vec<u32>>,
    /// Neighbors of v among 0..v (the already-assigned set at v's turn).
    prefix_deg: Vec<u32>,
    budget: u64,
    nodes: u64,
    deadline: &'a Deadline,
    out_of_budget: bool,
}

enum MapOutcome {
    Found(Vec<u32>),
    NotFound,
    Out,
}

impl<'a> MapSearch<'a> {
    fn new(
        g: &ColoredGraph,
        adj: &'a [Vec<u32>],
        refined: &'a [u32],
        budget: u64,
        deadline: &'a Deadline,
    ) -> MapSearch<'a> {
        let n = g.num_vertices as usize;
        let words = n.div_ceil(64);
        let mut adj_bits = vec![0u64; n * words];
        for &(a, b) in &g.edges {
            let (a, b) = (a as usize, b as usize);
            adj_bits[a * words + b / 64] |= 1 << (b % 64);
            adj_bits[b * words + a / 64] |= 1 << (a % 64);
        }
        let classes = refined.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut class_members = vec![Vec::new(); classes];
        for v in 0..n {
            class_members[refined[v] as usize].push(v as u32);
        }
        let prefix_deg = (0..n)
            .map(|v| adj[v].iter().filter(|&&u| (u as usize) < v).count() as u32)
            .collect();
        MapSearch {
            n,
            adj,
            adj_bits,
            words,
            refined,
            class_members,
            prefix_deg,
            budget,
            nodes: 0,
            deadline,
            out_of_budget: false,
        }
    }

    fn has_edge(&self, a: u32, b: u32) -> bool {
        let (a, b) = (a as usize, b as usize);
        self.adj_bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    /// Complete backtracking search for an automorphism fixing `0..base`
    /// pointwise and mapping `base` to `image`. `NotFound` is a proof of
    /// absence; `Out` means the node budget or deadline cut the search.
    fn find_mapping(&mut self, base: u32, image: u32) -> MapOutcome {
        let mut pi = vec![NO_IMAGE; self.n];
        let mut used = vec![false; self.n];
        // img_deg[w]: how many images of assigned vertices neighbor w.
        let mut img_deg = vec![0u32; self.n];
        match self.extend(0, base, image, &mut pi, &mut used, &mut img_deg) {
            Some(true) => MapOutcome::Found(pi),
            Some(false) => MapOutcome::NotFound,
            None => MapOutcome::Out,
        }
    }

    fn assign(&self, v: u32, w: u32, pi: &mut [u32], used: &mut [bool], img_deg: &mut [u32]) {
        pi[v as usize] = w;
        used[w as usize] = true;
        for &x in &self.adj[w as usize] {
            img_deg[x as usize] += 1;
        }
    }

    fn unassign(&self, v: u32, w: u32, pi: &mut [u32], used: &mut [bool], img_deg: &mut [u32]) {
        pi[v as usize] = NO_IMAGE;
        used[w as usize] = false;
        for &x in &self.adj[w as usize] {
            img_deg[x as usize] -= 1;
        }
    }

    /// `w` is a consistent image for `v` given the assignment of all
    /// vertices below `v`: same refined class, unused, assigned-neighbor
    /// count preserved, and every assigned neighbor of `v` maps to a
    /// neighbor of `w`. The count equality makes the edge checks exact in
    /// both directions.
    fn consistent(&self, v: u32, w: u32, pi: &[u32], used: &[bool], img_deg: &[u32]) -> bool {
        if used[w as usize] || self.refined[v as usize] != self.refined[w as usize] {
            return false;
        }
        if img_deg[w as usize] != self.prefix_deg[v as usize] {
            return false;
        }
        self.adj[v as usize]
            .iter()
            .take_while(|&&u| u < v)
            .all(|&u| self.has_edge(pi[u as usize], w))
    }

    /// Some(true)=mapping completed, Some(false)=subtree exhausted,
    /// None=budget/deadline.
    fn extend(
        &mut self,
        v: u32,
        base: u32,
        image: u32,
        pi: &mut [u32],
        used: &mut [bool],
        img_deg: &mut [u32],
    ) -> Option<bool> {
        if v as usize == self.n {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget
            || (self.nodes.is_multiple_of(256) && self.deadline.expired())
        {
            self.out_of_budget = true;
            return None;
        }
        let forced: Option<u32> = if v < base {
            Some(v)
        } else if v == base {
            Some(image)
        } else {
            None
        };
        match forced {
            Some(w) => {
                if !self.consistent(v, w, pi, used, img_deg) {
                    return Some(false);
                }
                self.assign(v, w, pi, used, img_deg);
                let r = self.extend(v + 1, base, image, pi, used, img_deg);
                if r != Some(true) {
                    self.unassign(v, w, pi, used, img_deg);
                }
                r
            }
            None => {
                let members = self.class_members[self.refined[v as usize] as usize].clone();
                for w in members {
                    if !self.consistent(v, w, pi, used, img_deg) {
                        continue;
                    }
                    self.assign(v, w, pi, used, img_deg);
                    match self.extend(v + 1, base, image, pi, used, img_deg) {
                        Some(true) => return Some(true),
                        Some(false) => self.unassign(v, w, pi, used, img_deg),
                        None => return None,
                    }
                }
                Some(false)
            }
        }
    }
}

/// True iff `pi` is a color- and adjacency-preserving bijection of `g`.
pub fn is_automorphism(g: &ColoredGraph, pi: &[u32]) -> bool {
    let n = g.num_vertices as usize;
    if pi.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &w in pi {
        if w as usize >= n || seen[w as usize] {
            return false;
        }
        seen[w as usize] = true;
    }
    if (0..n).any(|v| g.colors[v] != g.colors[pi[v] as usize]) {
        return false;
    }
    let edge_set: BTreeSet<(u32, u32)> =
        g.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    g.edges.iter().all(|&(a, b)| {
        let (x, y) = (pi[a as usize], pi[b as usize]);
        edge_set.contains(&(x.min(y), x.max(y)))
    })
}

/// Searches for generators of the color-preserving automorphism group:
/// color refinement first, then base-point backtracking — for each base
/// vertex in turn, every same-class image not already in the base's orbit
/// under the generators found at that base is tried with a complete
/// prefix-fixing sub-search. With `complete=true` the generators generate
/// the full group; a budget, deadline, or generator-limit cut clears the
/// flag. Deterministic for a given graph.
pub fn find_automorphism_generators(
    g: &ColoredGraph,
    limit: usize,
    budget: u64,
    deadline: &Deadline,
) -> AutSearchReport {
    let n = g.num_vertices as usize;
    if n == 0 || limit == 0 {
        return AutSearchReport { generators: Vec::new(), complete: limit > 0, nodes_used: 0 };
    }
    let refined = refine_colors(g);
    let adj = g.adjacency();
    let mut search = MapSearch::new(g, &adj, &refined, budget, deadline);
    let mut generators: Vec<Vec<u32>> = Vec::new();
    let mut complete = true;
    'bases: for b in 0..n as u32 {
        let base_gens_start = generators.len();
        let mut orbit = vec![false; n];
        orbit[b as usize] = true;
        for c in (b + 1)..n as u32 {
            if refined[c as usize] != refined[b as usize] || orbit[c as usize] {
                continue;
            }
            match search.find_mapping(b, c) {
                MapOutcome::Found(pi) => {
                    assert!(is_automorphism(g, &pi), "search returned a non-automorphism");
                    generators.push(pi);
                    if generators.len() >= limit {
                        complete = false;
                        break 'bases;
                    }
                    close_orbit(&mut orbit, &generators[base_gens_start..]);
                }
                MapOutcome::NotFound => {}
                MapOutcome::Out => {
                    complete = false;
                    break 'bases;
                }
            }
        }
    }
    AutSearchReport { generators, complete, nodes_used: search.nodes }
}

fn close_orbit(orbit: &mut [bool], gens: &[Vec<u32>]) {
    let mut queue: Vec<usize> = (0..orbit.len()).filter(|&v| orbit[v]).collect();
    while let Some(p) = queue.pop() {
        for g in gens {
            let q = g[p] as usize;
            if !orbit[q] {
                orbit[q] = true;
                queue.push(q);
            }
        }
    }
}

/// All color-preserving automorphisms (identity included), by exhaustive
/// backtracking over the raw colors — the reference the generator search is
/// checked against. Only for small graphs.
pub fn brute_force_automorphisms(g: &ColoredGraph) -> Vec<Vec<u32>> {
    let n = g.num_vertices as usize;
    let adj = g.adjacency();
    let mut result = Vec::new();
    let mut pi = vec![NO_IMAGE; n];
    let mut used = vec![false; n];
    enumerate_all(g, &adj, 0, &mut pi, &mut used, &mut result);
    result
}

fn enumerate_all(
    g: &ColoredGraph,
    adj: &[Vec<u32>],
    v: usize,
    pi: &mut Vec<u32>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<u32>>,
) {
    let n = g.num_vertices as usize;
    if v == n {
        out.push(pi.clone());
        return;
    }
    'cand: for w in 0..n {
        if used[w] || g.colors[v] != g.colors[w] {
            continue;
        }
        // Both edge directions must be consistent with the prefix.
        for (u, &piu) in pi.iter().enumerate().take(v) {
            let e1 = adj[v].binary_search(&(u as u32)).is_ok();
            let e2 = adj[w].binary_search(&piu).is_ok();
            if e1 != e2 {
                continue 'cand;
            }
        }
        pi[v] = w as u32;
        used[w] = true;
        enumerate_all(g, adj, v + 1, pi, used, out);
        pi[v] = NO_IMAGE;
        used[w] = false;
    }
}

/// Closes a generator set under composition. `None` if the group has more
/// than `cap` elements.
pub fn generated_group(n: usize, gens: &[Vec<u32>], cap: usize) -> Option<BTreeSet<Vec<u32>>> {
    let identity: Vec<u32> = (0..n as u32).collect();
    let mut group = BTreeSet::new();
    group.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q: Vec<u32> = p.iter().map(|&x| g[x as usize]).collect();
            if group.insert(q.clone()) {
                if group.len() > cap {
                    return None;
                }
                frontier.push(q);
            }
        }
    }
    Some(group)
}

/// Projects a vertex permutation onto the skeleton and theory variables and
/// verifies it end-to-end: the renamed assertion, the permuted skeleton,
/// and each permuted atom binding must all normalize back to the originals.
/// Returns `None` (a normal, counted outcome) on the identity or on any
/// failed check — this is the soundness gate for accepted symmetries.
pub fn lift_and_verify(
    script: &Script,
    psi: &SkelFormula,
    atoms: &AtomMap,
    graph: &ColoredGraph,
    vertex_perm: &[u32],
) -> Option<Permutation> {
    let mut smap = BTreeMap::new();
    let mut tmap = BTreeMap::new();
    for (v, origin) in graph.origins.iter().enumerate() {
        let image = &graph.origins[vertex_perm[v] as usize];
        match origin {
            VertexOrigin::SkeletonVar(sv) => match image {
                VertexOrigin::SkeletonVar(sv2) => {
                    smap.insert(*sv, *sv2);
                }
                _ => return None,
            },
            VertexOrigin::TheoryVar(name) => match image {
                VertexOrigin::TheoryVar(name2) => {
                    tmap.insert(name.clone(), name2.clone());
                }
                _ => return None,
            },
            _ => {}
        }
    }
    let perm = Permutation::new(smap, tmap);
    if perm.is_identity() {
        return None;
    }
    // The assertion itself must be invariant under the theory renaming.
    let renamed = script.assertion.rename_vars(&perm.theory_map);
    if normalize(&renamed) != normalize(&script.assertion) {
        return None;
    }
    // The skeleton must be invariant under the skeleton-variable map.
    let mapped = psi.map_vars(&|v| perm.apply_skeleton(v));
    if mapped.normalized() != psi.normalized() {
        return None;
    }
    // Atom bindings must be equivariant: the renamed atom of every skeleton
    // variable must be exactly the atom bound to its image.
    for (sv, atom) in atoms.iter() {
        let renamed = normalize_atom(&atom.rename_vars(&perm.theory_map));
        let target = normalize_atom(atoms.atom(perm.apply_skeleton(sv)));
        if renamed != target {
            return None;
        }
    }
    Some(perm)
}

/// Detection statistics plus the accepted generators.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub generators: Vec<Permutation>,
    /// Raw graph automorphisms found, before lifting.
    pub candidates: usize,
    /// Candidates the verification gate rejected.
    pub rejected: usize,
    pub complete: bool,
    pub nodes_used: u64,
    pub graph_vertices: u32,
}

/// Full pipeline: build the graph, search for automorphism generators, lift
/// each onto the variables, keep the verified, deduplicated survivors.
pub fn detect_symmetries(
    script: &Script,
    psi: &SkelFormula,
    atoms: &AtomMap,
    limit: usize,
    budget: u64,
    deadline: &Deadline,
) -> SymmetryReport {
    let graph = build_colored_graph(psi, atoms);
    let search = find_automorphism_generators(&graph, limit, budget, deadline);
    let mut generators: Vec<Permutation> = Vec::new();
    let mut rejected = 0;
    for vp in &search.generators {
        match lift_and_verify(script, psi, atoms, &graph, vp) {
            Some(p) if !generators.contains(&p) => generators.push(p),
            Some(_) => {}
            None => rejected += 1,
        }
    }
    SymmetryReport {
        generators,
        candidates: search.generators.len(),
        rejected,
        complete: search.complete,
        nodes_used: search.nodes_used,
        graph_vertices: graph.num_vertices,
    }
}
