//! Deterministic instance generation for benchmarks and property tests.
//!
//! Instances come from templates instantiated over blocks of
//! interchangeable or cyclically-arranged variables, which plants a
//! nontrivial joint symmetry by construction: every atom schema is applied
//! uniformly across the block, so permuting the block maps the atom set to
//! itself. The asymmetric profile does the opposite — every atom gets its
//! own variable and its own constants, so only the identity survives.
//!
//! All randomness flows through one stream-cipher generator per instance,
//! keyed by (seed, index): the same seed always yields byte-identical
//! instances, independent of how many are requested.

use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ast::{Atom, Decl, Formula, Relation, Script, Sort, Term};
use crate::printer::serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Planted block symmetry, satisfiable at the default bounds.
    SymmetricSat,
    /// Planted block symmetry, unsatisfiable at any bound.
    SymmetricUnsat,
    /// One variable and distinct constants per atom; no symmetries.
    Asymmetric,
    /// Draws from the other profiles, roughly half satisfiable.
    Mixed,
}

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::SymmetricSat,
        Profile::SymmetricUnsat,
        Profile::Asymmetric,
        Profile::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::SymmetricSat => "symmetric-sat",
            Profile::SymmetricUnsat => "symmetric-unsat",
            Profile::Asymmetric => "asymmetric",
            Profile::Mixed => "mixed",
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Profile, String> {
        Profile::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown profile '{s}' (expected one of: symmetric-sat, symmetric-unsat, asymmetric, mixed)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedInstance {
    /// Suggested file name, unique within the corpus.
    pub name: String,
    /// Complete problem text, parseable by the frontend.
    pub text: String,
}

/// Generates `count` instances of the profile. Instance `i` depends only
/// on `(seed, i)`, so corpora of different sizes share a common prefix.
pub fn generate_corpus(seed: u64, count: usize, profile: Profile) -> Vec<GeneratedInstance> {
    (0..count)
        .map(|index| {
            let mut rng = instance_rng(seed, index as u64);
            let script = match profile {
                Profile::SymmetricSat => symmetric_sat(&mut rng),
                Profile::SymmetricUnsat => symmetric_unsat(&mut rng),
                Profile::Asymmetric => asymmetric(&mut rng),
                Profile::Mixed => mixed(&mut rng),
            };
            GeneratedInstance {
                name: format!("{}-{index:04}.smt2", profile.name()),
                text: serialize(&script),
            }
        })
        .collect()
}

/// Instances whose only symmetries leave the skeleton fixed and permute
/// theory variables: every atom is itself invariant under swapping the two
/// variables (sums, products, sums of squares), while no two atoms can map
/// to one another.
pub fn generate_theory_symmetric_corpus(seed: u64, count: usize) -> Vec<GeneratedInstance> {
    (0..count)
        .map(|index| {
            let mut rng = instance_rng(seed ^ 0x7468656f72790a, index as u64);
            let script = theory_symmetric(&mut rng);
            GeneratedInstance {
                name: format!("theory-symmetric-{index:04}.smt2"),
                text: serialize(&script),
            }
        })
        .collect()
}

fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}

fn block(prefix: &str, m: usize) -> Vec<String> {
    (0..m).map(|i| format!("{prefix}{i}")).collect()
}

fn script_over(names: Vec<String>, assertion: Formula) -> Script {
    let decls = names
        .into_iter()
        .map(|name| Decl { name, sort: Sort::Int })
        .collect();
    let mut script = Script::new(decls, assertion);
    script.meta.logic = Some("QF_NIA".to_string());
    script
}

fn atom(rel: Relation, lhs: Term, rhs: Term) -> Formula {
    Formula::Atom(Atom::new(rel, lhs, rhs))
}

fn sum(names: &[String]) -> Term {
    Term::Add(names.iter().map(|n| Term::var(n)).collect())
}

/// Block of interchangeable variables with uniform per-variable range
/// clauses plus one shared sum cap; satisfied by setting every variable to
/// `c - 1`.
fn interchangeable_sat(rng: &mut ChaCha8Rng, names: &[String]) -> Formula {
    let m = names.len() as i64;
    let c = rng.gen_range(-4..=4);
    let d = c + rng.gen_range(2..=5);
    let mut conjuncts: Vec<Formula> = names
        .iter()
        .map(|n| {
            Formula::Or(vec![
                atom(Relation::Lt, Term::var(n), Term::int(c)),
                atom(Relation::Gt, Term::var(n), Term::int(d)),
            ])
        })
        .collect();
    conjuncts.push(atom(Relation::Le, sum(names), Term::int(m * c)));
    Formula::And(conjuncts)
}

/// Cyclic block: one clause per adjacent pair around the ring; satisfied
/// by setting every variable to `max(c, 0) + 1`.
fn cyclic_sat(rng: &mut ChaCha8Rng, names: &[String]) -> Formula {
    let c = rng.gen_range(-3..=5);
    let d = rng.gen_range(1..=9);
    let conjuncts: Vec<Formula> = (0..names.len())
        .map(|i| {
            let a = Term::var(&names[i]);
            let b = Term::var(&names[(i + 1) % names.len()]);
            Formula::Or(vec![
                atom(Relation::Gt, Term::Add(vec![a.clone(), b.clone()]), Term::int(c)),
                atom(Relation::Lt, Term::Mul(vec![a, b]), Term::int(d)),
            ])
        })
        .collect();
    Formula::And(conjuncts)
}

fn symmetric_sat(rng: &mut ChaCha8Rng) -> Script {
    let m = rng.gen_range(2..=3);
    let names = block("x", m);
    let assertion = if rng.gen_bool(0.5) {
        interchangeable_sat(rng, &names)
    } else {
        cyclic_sat(rng, &names)
    };
    script_over(names, assertion)
}

/// Every variable must equal `t` (two-sided bounds) yet differ from `t`
/// (the disjunction); each pair clause triples the skeleton model count,
/// so plain search walks many spurious models that the block symmetry
/// prunes.
fn punctured_point_unsat(rng: &mut ChaCha8Rng, names: &[String]) -> Formula {
    let t = rng.gen_range(-3..=3);
    let nonlinear = rng.gen_bool(0.3);
    let mut conjuncts = Vec::new();
    for n in names {
        conjuncts.push(Formula::Or(vec![
            atom(Relation::Lt, Term::var(n), Term::int(t)),
            atom(Relation::Gt, Term::var(n), Term::int(t)),
        ]));
        if nonlinear {
            let offset = Term::Sub(Box::new(Term::var(n)), Box::new(Term::int(t)));
            conjuncts.push(atom(
                Relation::Lt,
                Term::Mul(vec![offset.clone(), offset]),
                Term::int(1),
            ));
        } else {
            conjuncts.push(atom(Relation::Gt, Term::var(n), Term::int(t - 1)));
            conjuncts.push(atom(Relation::Lt, Term::var(n), Term::int(t + 1)));
        }
    }
    Formula::And(conjuncts)
}

/// m variables, pairwise distinct, confined to m-1 values.
fn pigeonhole_unsat(rng: &mut ChaCha8Rng, names: &[String]) -> Formula {
    let m = names.len() as i64;
    let r = rng.gen_range(-4..=4);
    let mut conjuncts = Vec::new();
    for n in names {
        conjuncts.push(atom(Relation::Gt, Term::var(n), Term::int(r - 1)));
        conjuncts.push(atom(Relation::Lt, Term::var(n), Term::int(r + m - 1)));
    }
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            conjuncts.push(atom(Relation::Neq, Term::var(&names[i]), Term::var(&names[j])));
        }
    }
    Formula::And(conjuncts)
}

fn symmetric_unsat(rng: &mut ChaCha8Rng) -> Script {
    let m = rng.gen_range(2..=3);
    let names = block("x", m);
    let assertion = if rng.gen_bool(0.7) {
        punctured_point_unsat(rng, &names)
    } else {
        pigeonhole_unsat(rng, &names)
    };
    script_over(names, assertion)
}

/// One fresh variable and strictly separated constants per atom, glued by
/// a random And/Or tree: no permutation can map any atom to another.
fn asymmetric(rng: &mut ChaCha8Rng) -> Script {
    let k = rng.gen_range(2..=4);
    let names = block("x", k);
    let base = rng.gen_range(-6..=0);
    let atoms: Vec<Formula> = names
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let c = base + 5 * j as i64 + rng.gen_range(0..=2);
            let rel = if rng.gen_bool(0.5) { Relation::Lt } else { Relation::Gt };
            let lhs = if rng.gen_bool(0.25) {
                Term::Mul(vec![Term::int(2), Term::var(n)])
            } else {
                Term::var(n)
            };
            atom(rel, lhs, Term::int(c))
        })
        .collect();
    let assertion = random_tree(rng, atoms);
    script_over(names, assertion)
}

/// Folds the leaves into a random binary And/Or shape.
fn random_tree(rng: &mut ChaCha8Rng, mut leaves: Vec<Formula>) -> Formula {
    while leaves.len() > 1 {
        let right = leaves.pop().unwrap();
        let left = leaves.pop().unwrap();
        let node = if rng.gen_bool(0.5) {
            Formula::And(vec![left, right])
        } else {
            Formula::Or(vec![left, right])
        };
        leaves.push(node);
    }
    leaves.pop().unwrap_or(Formula::Const(true))
}

fn mixed(rng: &mut ChaCha8Rng) -> Script {
    let draw = rng.gen_range(0..100);
    if draw < 45 {
        symmetric_sat(rng)
    } else if draw < 90 {
        symmetric_unsat(rng)
    } else {
        asymmetric(rng)
    }
}

/// Two variables, atoms each invariant under swapping them.
fn theory_symmetric(rng: &mut ChaCha8Rng) -> Script {
    let names = vec!["x".to_string(), "y".to_string()];
    let x = || Term::var("x");
    let y = || Term::var("y");
    let mut pool: Vec<Formula> = vec![
        atom(Relation::Gt, Term::Add(vec![x(), y()]), Term::int(rng.gen_range(-6..=6))),
        atom(Relation::Lt, Term::Mul(vec![x(), y()]), Term::int(rng.gen_range(-6..=12))),
        atom(
            Relation::Le,
            Term::Add(vec![Term::Mul(vec![x(), x()]), Term::Mul(vec![y(), y()])]),
            Term::int(rng.gen_range(0..=30)),
        ),
        atom(Relation::Neq, Term::Add(vec![x(), y()]), Term::int(rng.gen_range(-4..=4))),
    ];
    let keep = rng.gen_range(2..=3);
    while pool.len() > keep {
        let drop = rng.gen_range(0..pool.len());
        pool.remove(drop);
    }
    let assertion = random_tree(rng, pool);
    script_over(names, assertion)
}
