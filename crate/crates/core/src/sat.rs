//! CDCL SAT solver: two-watched-literal propagation, first-UIP clause
//! learning, and a decaying variable-activity heuristic. Decisions assign
//! `false` first, ties in activity break toward the lower variable id, and no
//! restarts happen unless a restart policy is configured, so runs are fully
//! deterministic given the same clause history.

use serde::Serialize;

use crate::deadline::Deadline;
use crate::skeleton::{Cnf, Lit};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// Total satisfying assignment, indexed by variable id.
    Sat(Vec<bool>),
    Unsat,
    /// The deadline expired mid-search.
    Cancelled,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SatStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub learned_clauses: u64,
    pub restarts: u64,
}

/// When to abandon the current search and restart from decision level zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartPolicy {
    #[default]
    Never,
    /// Restart after `unit * luby(i)` conflicts, for i = 1, 2, ...
    Luby { unit: u64 },
}

const NO_REASON: u32 = u32::MAX;
const NOT_IN_HEAP: u32 = u32::MAX;

/// How often (in propagations) the cooperative deadline is polled.
const DEADLINE_CHECK_INTERVAL: u64 = 1024;

pub struct SatSolver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    seen: Vec<bool>,
    ok: bool,
    cancelled: bool,
    restart: RestartPolicy,
    stats: SatStats,
}

impl SatSolver {
    pub fn new(num_vars: u32) -> SatSolver {
        let n = num_vars as usize;
        SatSolver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![None; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            heap: VarHeap::with_all(n),
            seen: vec![false; n],
            ok: true,
            cancelled: false,
            restart: RestartPolicy::Never,
            stats: SatStats::default(),
        }
    }

    /// Builds a solver pre-loaded with every clause of the CNF.
    pub fn from_cnf(cnf: &Cnf) -> SatSolver {
        let mut s = SatSolver::new(cnf.num_vars);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        s
    }

    pub fn set_restart_policy(&mut self, policy: RestartPolicy) {
        self.restart = policy;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn stats(&self) -> SatStats {
        self.stats
    }

    /// True until an empty clause is derived or added; once false the solver
    /// answers Unsat forever.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var() as usize].map(|v| v == l.is_pos())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause, simplifying against the level-0 assignment. The solver
    /// backtracks to level 0 first, so this is safe between `solve` calls.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0].var() == w[1].var()) {
            return; // tautology
        }
        c.retain(|&l| self.value(l) != Some(false));
        if c.iter().any(|&l| self.value(l) == Some(true)) {
            return; // already satisfied at level 0
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate(&Deadline::none()).is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let ci = self.clauses.len() as u32;
                self.watches[c[0].index()].push(ci);
                self.watches[c[1].index()].push(ci);
                self.clauses.push(c);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var() as usize;
        debug_assert!(self.assign[v].is_none());
        self.assign[v] = Some(l.is_pos());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation. Returns the index of a conflicting clause, or None.
    /// Sets `self.cancelled` if the deadline expires (polled every
    /// `DEADLINE_CHECK_INTERVAL` propagations).
    fn propagate(&mut self, deadline: &Deadline) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            if self.stats.propagations.is_multiple_of(DEADLINE_CHECK_INTERVAL) && deadline.expired() {
                self.cancelled = true;
                return None;
            }
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut kept = 0;
            let mut i = 0;
            let mut conflict = None;
            'clauses: while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci as usize];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                debug_assert_eq!(clause[1], false_lit);
                let first = clause[0];
                if self.assign[first.var() as usize] == Some(first.is_pos()) {
                    ws[kept] = ci;
                    kept += 1;
                    continue;
                }
                for k in 2..clause.len() {
                    let l = clause[k];
                    if self.assign[l.var() as usize] != Some(!l.is_pos()) {
                        clause.swap(1, k);
                        self.watches[clause[1].index()].push(ci);
                        continue 'clauses;
                    }
                }
                // No replacement watch: unit or conflict on `first`.
                ws[kept] = ci;
                kept += 1;
                if self.value(first) == Some(false) {
                    while i < ws.len() {
                        ws[kept] = ws[i];
                        kept += 1;
                        i += 1;
                    }
                    conflict = Some(ci);
                } else {
                    self.enqueue(first, ci);
                }
            }
            ws.truncate(kept);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first) and the level to backtrack to.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        let mut learnt: Vec<Lit> = vec![Lit::positive(0)]; // slot 0 = UIP, patched below
        let mut path = 0u32;
        let mut index = self.trail.len();
        let mut p: Option<Lit> = None;
        let mut to_clear: Vec<u32> = Vec::new();

        loop {
            let clause = &self.clauses[confl as usize];
            let start = usize::from(p.is_some());
            for &q in &clause[start..] {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    to_clear.push(q.var());
                    self.activity[v] += self.var_inc;
                    if self.level[v] == current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Walk back to the next marked trail literal.
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let pl = self.trail[index];
            self.seen[pl.var() as usize] = false;
            path -= 1;
            if path == 0 {
                learnt[0] = !pl;
                break;
            }
            confl = self.reason[pl.var() as usize];
            debug_assert_ne!(confl, NO_REASON);
            p = Some(pl);
        }
        for v in to_clear {
            self.seen[v as usize] = false;
        }
        self.rescale_activity_if_needed();

        let blevel = if learnt.len() == 1 {
            0
        } else {
            // Move the literal with the highest level to slot 1; that level
            // is the backjump target, and slot 1 must be watched.
            let mut max_k = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var() as usize] > self.level[learnt[max_k].var() as usize]
                {
                    max_k = k;
                }
            }
            learnt.swap(1, max_k);
            self.level[learnt[1].var() as usize]
        };
        (learnt, blevel)
    }

    fn rescale_activity_if_needed(&mut self) {
        if self.var_inc > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target as usize];
        while self.trail.len() > keep {
            let l = self.trail.pop().unwrap();
            let v = l.var() as usize;
            self.assign[v] = None;
            self.reason[v] = NO_REASON;
            self.heap.push(l.var(), &self.activity);
        }
        self.trail_lim.truncate(target as usize);
        self.qhead = self.trail.len();
    }

    fn next_decision_var(&mut self) -> Option<u32> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v as usize].is_none() {
                return Some(v);
            }
        }
        None
    }

    /// Runs the CDCL loop until a model, a refutation, or the deadline.
    pub fn solve(&mut self, deadline: &Deadline) -> SatOutcome {
        if !self.ok {
            return SatOutcome::Unsat;
        }
        self.cancelled = false;
        let mut conflicts_since_restart = 0u64;
        let mut restart_index = 1u64;
        loop {
            if let Some(confl) = self.propagate(deadline) {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatOutcome::Unsat;
                }
                let (learnt, blevel) = self.analyze(confl);
                self.cancel_until(blevel);
                self.record_learnt(learnt);
                self.var_inc /= 0.95;
                conflicts_since_restart += 1;
                if let RestartPolicy::Luby { unit } = self.restart {
                    if conflicts_since_restart >= unit * luby(restart_index) {
                        self.cancel_until(0);
                        conflicts_since_restart = 0;
                        restart_index += 1;
                        self.stats.restarts += 1;
                    }
                }
            } else if self.cancelled {
                self.cancel_until(0);
                return SatOutcome::Cancelled;
            } else {
                match self.next_decision_var() {
                    None => {
                        let model: Vec<bool> =
                            self.assign.iter().map(|v| v.expect("assignment is total")).collect();
                        debug_assert!(self
                            .clauses
                            .iter()
                            .all(|c| c.iter().any(|&l| l.eval(&model))));
                        self.cancel_until(0);
                        return SatOutcome::Sat(model);
                    }
                    Some(v) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        // Polarity heuristic: try false first.
                        self.enqueue(Lit::negative(v), NO_REASON);
                    }
                }
            }
        }
    }

    fn record_learnt(&mut self, learnt: Vec<Lit>) {
        self.stats.learned_clauses += 1;
        if learnt.len() == 1 {
            self.enqueue(learnt[0], NO_REASON);
        } else {
            let ci = self.clauses.len() as u32;
            self.watches[learnt[0].index()].push(ci);
            self.watches[learnt[1].index()].push(ci);
            let asserting = learnt[0];
            self.clauses.push(learnt);
            self.enqueue(asserting, ci);
        }
    }
}

/// The Luby restart sequence 1,1,2,1,1,2,4,... (1-based index).
fn luby(mut i: u64) -> u64 {
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

/// Indexed binary max-heap ordered by activity, ties broken toward the lower
/// variable id.
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<u32>,
}

impl VarHeap {
    fn with_all(n: usize) -> VarHeap {
        VarHeap { heap: (0..n as u32).collect(), pos: (0..n as u32).collect() }
    }

    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (aa, ab) = (act[a as usize], act[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn push(&mut self, v: u32, act: &[f64]) {
        if self.pos[v as usize] != NOT_IN_HEAP {
            return;
        }
        self.pos[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && Self::better(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::better(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = i as u32;
        self.pos[self.heap[j] as usize] = j as u32;
    }
}
