//! Weak and strong behavioural equivalence by partition refinement.
//!
//! Weak bisimilarity is decided on the saturated system: the rows compared
//! are the saturation's columns summed into the current partition's blocks
//! (the double-arrow construction), so weak equivalence on `α` is strong
//! equivalence on `α*`. Strong equivalence uses the unsaturated rows. Both
//! refine from a single block (or a caller-supplied seed encoding state
//! observations) by splitting blocks whose rows disagree, which terminates in
//! at most `|X|` rounds.
//!
//! Two independent oracles back the refiner: exhaustive partition
//! enumeration for small systems, and the rule-based τ-closure for boolean
//! systems.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::error::Error;
use crate::saturation::{saturate, SolveConfig, SolveStatus};
use crate::semiring::{numeric_delta, SemiringKind, Weight};
use crate::wlts::{KleisliMap, Label, StateSpace, System};
use crate::Result;

/// An equivalence on states as disjoint blocks covering the state space.
/// Canonical form: members ascending, blocks ordered by least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Partition> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            b.sort_unstable();
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &s in b.iter() {
                if s >= n {
                    return Err(Error::InvalidPartition(format!(
                        "state index {s} out of range"
                    )));
                }
                if seen[s] {
                    return Err(Error::InvalidPartition(format!(
                        "state index {s} appears twice"
                    )));
                }
                seen[s] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition(
                "blocks do not cover the state space".into(),
            ));
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![0; n];
        for (i, b) in blocks.iter().enumerate() {
            for &s in b {
                block_of[s] = i;
            }
        }
        Ok(Partition { blocks, block_of })
    }

    /// The single-block partition.
    pub fn coarsest(n: usize) -> Partition {
        Partition::new(vec![(0..n).collect()], n).expect("coarsest partition")
    }

    /// The identity partition (all singletons).
    pub fn identity(n: usize) -> Partition {
        Partition::new((0..n).map(|s| vec![s]).collect(), n).expect("identity partition")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, s: usize) -> usize {
        self.block_of[s]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn state_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// Quotient map as a function table.
    pub fn quotient(&self) -> Vec<usize> {
        self.block_of.clone()
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&s| other.block_of[s] == other.block_of[b[0]]))
    }

    /// Join in the partition lattice: the finest partition coarser than both.
    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.block_of.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in [self, other] {
            for b in &p.blocks {
                for w in b.windows(2) {
                    let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for s in 0..n {
            let r = find(&mut parent, s);
            groups.entry(r).or_default().push(s);
        }
        Partition::new(groups.into_values().collect(), n).expect("join partition")
    }

    /// Display name of a block: its member names, lexicographically sorted,
    /// joined with `+`.
    pub fn block_name(&self, states: &StateSpace, block: usize) -> String {
        let mut names: Vec<&str> = self.blocks[block]
            .iter()
            .map(|&s| states.name(s))
            .collect();
        names.sort_unstable();
        names.join("+")
    }

    /// The block state space of the quotient system.
    pub fn block_space(&self, states: &StateSpace) -> Result<std::sync::Arc<StateSpace>> {
        let names: Vec<String> = (0..self.blocks.len())
            .map(|b| self.block_name(states, b))
            .collect();
        StateSpace::new(&names)
    }

    /// Blocks as sorted lists of sorted state names (report form).
    pub fn named_blocks(&self, states: &StateSpace) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut names: Vec<String> =
                    b.iter().map(|&s| states.name(s).to_string()).collect();
                names.sort_unstable();
                names
            })
            .collect();
        out.sort();
        out
    }
}

/// Options for the equivalence deciders: the solver configuration plus the
/// row-comparison threshold used when the solver is not exact. By default
/// `delta = 1000 · epsilon`.
#[derive(Debug, Clone)]
pub struct BisimOptions {
    pub solve: SolveConfig,
    pub delta: BigRational,
}

impl Default for BisimOptions {
    fn default() -> Self {
        BisimOptions::from_solve(SolveConfig::default())
    }
}

impl BisimOptions {
    pub fn from_solve(solve: SolveConfig) -> BisimOptions {
        let delta = &solve.epsilon * BigRational::from_integer(1000.into());
        BisimOptions { solve, delta }
    }
}

/// How trustworthy a verdict is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BisimStatus {
    Exact,
    /// Rows were compared up to `delta` because the solver converged
    /// approximately or capped out.
    Approximate { delta: BigRational },
}

impl BisimStatus {
    pub fn is_exact(&self) -> bool {
        matches!(self, BisimStatus::Exact)
    }
}

/// A cell distinguishing two states: their rows disagree at `(label, block)`
/// of the partition current when they split.
#[derive(Debug, Clone)]
pub struct Witness {
    pub left: usize,
    pub right: usize,
    pub label: Label,
    pub block: Vec<usize>,
    pub left_weight: Weight,
    pub right_weight: Weight,
}

/// Verdict of a greatest-equivalence computation.
#[derive(Debug, Clone)]
pub struct BisimVerdict {
    pub partition: Partition,
    pub status: BisimStatus,
    /// Present for pair queries (`compare`) when the pair is split.
    pub witness: Option<Witness>,
}

/// Sums the target columns of `m` into the blocks of `p`; this equals
/// `embed(quotient) ∙ m` because the embedding carries weight one on τ.
fn block_rows(m: &KleisliMap, p: &Partition) -> Result<KleisliMap> {
    let target = p.block_space(m.target())?;
    let mut out = KleisliMap::zero(
        m.semiring(),
        m.algebra().clone(),
        m.source().clone(),
        target,
    );
    for ((x, a, y), w) in m.entries() {
        out.accumulate(x, a, p.block_of(y), w.clone());
    }
    Ok(out)
}

/// The weak row map: the saturation's columns summed into `P`'s blocks.
/// Weak bisimilarity on `α` is strong bisimilarity on these rows.
pub fn weak_rows(alpha: &System, p: &Partition, cfg: &SolveConfig) -> Result<KleisliMap> {
    check_partition(alpha, p)?;
    let sat = saturate(alpha, cfg)?;
    block_rows(&sat.value, p)
}

/// The strong row map: `α`'s own columns summed into `P`'s blocks.
pub fn strong_rows(alpha: &System, p: &Partition) -> Result<KleisliMap> {
    check_partition(alpha, p)?;
    block_rows(alpha.map(), p)
}

fn check_partition(alpha: &System, p: &Partition) -> Result<()> {
    if p.state_count() != alpha.states().len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} states, system has {}",
            p.state_count(),
            alpha.states().len()
        )));
    }
    Ok(())
}

/// Row comparison: exact equality, or entrywise numeric agreement within
/// `delta` when the backing solve was inexact.
#[derive(Debug, Clone)]
enum RowCmp {
    Exact,
    Delta(BigRational),
}

impl RowCmp {
    fn rows_equal(&self, rows: &KleisliMap, x: usize, y: usize) -> bool {
        match self {
            RowCmp::Exact => {
                let rx: Vec<_> = rows.row(x).map(|(a, t, w)| (a, t, w.clone())).collect();
                let ry: Vec<_> = rows.row(y).map(|(a, t, w)| (a, t, w.clone())).collect();
                rx == ry
            }
            RowCmp::Delta(delta) => {
                let cells: BTreeSet<(Label, usize)> = rows
                    .row(x)
                    .chain(rows.row(y))
                    .map(|(a, t, _)| (a, t))
                    .collect();
                cells.into_iter().all(|(a, t)| {
                    match numeric_delta(&rows.get(x, a, t), &rows.get(y, a, t)) {
                        Some(d) => d <= *delta,
                        None => false,
                    }
                })
            }
        }
    }

    /// First cell (canonical order) where the rows disagree.
    fn first_difference(
        &self,
        rows: &KleisliMap,
        x: usize,
        y: usize,
    ) -> Option<(Label, usize, Weight, Weight)> {
        let cells: BTreeSet<(Label, usize)> = rows
            .row(x)
            .chain(rows.row(y))
            .map(|(a, t, _)| (a, t))
            .collect();
        for (a, t) in cells {
            let wx = rows.get(x, a, t);
            let wy = rows.get(y, a, t);
            let differ = match self {
                RowCmp::Exact => wx != wy,
                RowCmp::Delta(delta) => numeric_delta(&wx, &wy).is_none_or(|d| d > *delta),
            };
            if differ {
                return Some((a, t, wx, wy));
            }
        }
        None
    }
}

/// Splits every block of `p` by row agreement. Returns the refined partition
/// and, if `watch` was split in this round, the distinguishing cell.
fn refine_once(
    rows: &KleisliMap,
    p: &Partition,
    cmp: &RowCmp,
    watch: Option<(usize, usize)>,
) -> Result<(Partition, Option<Witness>)> {
    let mut new_blocks: Vec<Vec<usize>> = Vec::new();
    for block in p.blocks() {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &s in block {
            match groups.iter_mut().find(|g| cmp.rows_equal(rows, g[0], s)) {
                Some(g) => g.push(s),
                None => groups.push(vec![s]),
            }
        }
        new_blocks.extend(groups);
    }
    let next = Partition::new(new_blocks, p.state_count())?;
    let witness = watch.and_then(|(a, b)| {
        if p.same_block(a, b) && !next.same_block(a, b) {
            let (label, t, wl, wr) = cmp
                .first_difference(rows, a, b)
                .expect("split pair must have a differing cell");
            Some(Witness {
                left: a,
                right: b,
                label,
                block: p.blocks()[t].clone(),
                left_weight: wl,
                right_weight: wr,
            })
        } else {
            None
        }
    });
    Ok((next, witness))
}

/// Refinement loop from `seed`, splitting by the given row map builder.
fn refine_to_fixpoint(
    seed: Partition,
    cmp: &RowCmp,
    watch: Option<(usize, usize)>,
    mut rows_of: impl FnMut(&Partition) -> Result<KleisliMap>,
) -> Result<(Partition, Option<Witness>)> {
    let mut p = seed;
    let mut witness = None;
    loop {
        let rows = rows_of(&p)?;
        let (next, w) = refine_once(&rows, &p, cmp, watch)?;
        if witness.is_none() {
            witness = w;
        }
        if next == p {
            return Ok((p, witness));
        }
        p = next;
    }
}

/// Is `p` a weak bisimulation: are weak rows constant on every block?
pub fn is_weak_bisim(alpha: &System, p: &Partition, opts: &BisimOptions) -> Result<bool> {
    check_partition(alpha, p)?;
    let sat = saturate(alpha, &opts.solve)?;
    let cmp = row_cmp(&sat.status, opts);
    let rows = block_rows(&sat.value, p)?;
    Ok(blocks_constant(&rows, p, &cmp))
}

/// Is `p` a strong bisimulation: are `α`'s own block rows constant?
pub fn is_strong_bisim(alpha: &System, p: &Partition) -> Result<bool> {
    check_partition(alpha, p)?;
    let rows = block_rows(alpha.map(), p)?;
    Ok(blocks_constant(&rows, p, &RowCmp::Exact))
}

fn blocks_constant(rows: &KleisliMap, p: &Partition, cmp: &RowCmp) -> bool {
    p.blocks()
        .iter()
        .all(|b| b.iter().all(|&s| cmp.rows_equal(rows, b[0], s)))
}

fn row_cmp(status: &SolveStatus, opts: &BisimOptions) -> RowCmp {
    if status.is_exact() {
        RowCmp::Exact
    } else {
        RowCmp::Delta(opts.delta.clone())
    }
}

fn bisim_status(status: &SolveStatus, opts: &BisimOptions) -> BisimStatus {
    if status.is_exact() {
        BisimStatus::Exact
    } else {
        BisimStatus::Approximate {
            delta: opts.delta.clone(),
        }
    }
}

/// The greatest weak bisimulation, by refinement from the single block.
pub fn greatest_weak_bisim(alpha: &System, opts: &BisimOptions) -> Result<BisimVerdict> {
    greatest_weak_bisim_seeded(alpha, Partition::coarsest(alpha.states().len()), opts, None)
}

/// Refinement from a caller-supplied seed partition (e.g. state labels).
/// `watch` asks for a distinguishing witness if that pair ends up split.
pub fn greatest_weak_bisim_seeded(
    alpha: &System,
    seed: Partition,
    opts: &BisimOptions,
    watch: Option<(usize, usize)>,
) -> Result<BisimVerdict> {
    check_partition(alpha, &seed)?;
    let sat = saturate(alpha, &opts.solve)?;
    let cmp = row_cmp(&sat.status, opts);
    let (partition, witness) =
        refine_to_fixpoint(seed, &cmp, watch, |p| block_rows(&sat.value, p))?;
    Ok(BisimVerdict {
        partition,
        status: bisim_status(&sat.status, opts),
        witness,
    })
}

/// The greatest strong bisimulation: the same refinement against the
/// unsaturated rows.
pub fn greatest_strong_bisim(alpha: &System) -> Result<BisimVerdict> {
    let seed = Partition::coarsest(alpha.states().len());
    let (partition, witness) =
        refine_to_fixpoint(seed, &RowCmp::Exact, None, |p| block_rows(alpha.map(), p))?;
    Ok(BisimVerdict {
        partition,
        status: BisimStatus::Exact,
        witness,
    })
}

/// Verdict of a two-system comparison.
#[derive(Debug, Clone)]
pub struct CompareVerdict {
    pub bisimilar: bool,
    pub status: BisimStatus,
    pub witness: Option<Witness>,
    /// The coproduct system the refinement ran on (states `1:x`, `2:y`).
    pub system: System,
    pub partition: Partition,
}

/// Compares the initial states of two systems by running the weak refinement
/// on their disjoint union.
pub fn compare(alpha1: &System, alpha2: &System, opts: &BisimOptions) -> Result<CompareVerdict> {
    let i1 = alpha1
        .initial()
        .ok_or_else(|| Error::MissingInitial("the first system".into()))?;
    let i2 = alpha2
        .initial()
        .ok_or_else(|| Error::MissingInitial("the second system".into()))?;
    let (sum, offset) = System::coproduct(alpha1, alpha2)?;
    let watch = (i1, i2 + offset);
    let verdict = greatest_weak_bisim_seeded(
        &sum,
        Partition::coarsest(sum.states().len()),
        opts,
        Some(watch),
    )?;
    let bisimilar = verdict.partition.same_block(watch.0, watch.1);
    Ok(CompareVerdict {
        bisimilar,
        status: verdict.status,
        witness: verdict.witness,
        system: sum,
        partition: verdict.partition,
    })
}

/// Quotient system on the blocks of the greatest weak bisimulation:
/// `β([x]) = weak_rows(α, P)(x)`, well defined by block-constancy. Refuses
/// non-exact verdicts.
pub fn minimize(alpha: &System, opts: &BisimOptions) -> Result<System> {
    let sat = saturate(alpha, &opts.solve)?;
    if !sat.status.is_exact() {
        return Err(Error::ApproximateVerdict {
            op: "minimize",
            status: format!("{:?}", sat.status),
        });
    }
    let seed = Partition::coarsest(alpha.states().len());
    let (partition, _) =
        refine_to_fixpoint(seed, &RowCmp::Exact, None, |p| block_rows(&sat.value, p))?;
    let rows = block_rows(&sat.value, &partition)?;
    let blocks = partition.block_space(alpha.states())?;
    let mut m = KleisliMap::zero(
        alpha.semiring(),
        alpha.algebra().clone(),
        blocks.clone(),
        blocks,
    );
    for (b, members) in partition.blocks().iter().enumerate() {
        let rep = members[0];
        for (a, t, w) in rows.row(rep) {
            m.set(b, a, t, w.clone())?;
        }
    }
    let sys = System::new(m)?;
    match alpha.initial() {
        Some(i) => sys.with_initial(partition.block_of(i)),
        None => Ok(sys),
    }
}

/// Largest state count the exhaustive oracle accepts (Bell(8) = 4140).
pub const ORACLE_STATE_LIMIT: usize = 8;

/// Exhaustive oracle: enumerates every partition, keeps the weak
/// bisimulations, and returns their join after checking the join is itself
/// accepted (the kept set must be closed under coarsest-join on this
/// instance, otherwise the instance is flagged).
pub fn brute_force_oracle(alpha: &System, opts: &BisimOptions) -> Result<Partition> {
    let n = alpha.states().len();
    if n > ORACLE_STATE_LIMIT {
        return Err(Error::StateBound {
            states: n,
            limit: ORACLE_STATE_LIMIT,
        });
    }
    let sat = saturate(alpha, &opts.solve)?;
    let cmp = row_cmp(&sat.status, opts);
    let mut kept: Vec<Partition> = Vec::new();
    for p in all_partitions(n) {
        let rows = block_rows(&sat.value, &p)?;
        if blocks_constant(&rows, &p, &cmp) {
            kept.push(p);
        }
    }
    // the identity partition is always accepted, so kept is non-empty
    let mut join = kept[0].clone();
    for p in &kept[1..] {
        join = join.join(p);
    }
    let rows = block_rows(&sat.value, &join)?;
    if !blocks_constant(&rows, &join, &cmp) {
        return Err(Error::OracleAmbiguity(format!(
            "join of {} accepted partitions is not accepted",
            kept.len()
        )));
    }
    Ok(join)
}

/// All set partitions of `{0, …, n-1}` in a deterministic order.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn go(n: usize, s: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Partition>) {
        if s == n {
            out.push(Partition::new(blocks.clone(), n).expect("enumerated partition"));
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(s);
            go(n, s + 1, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![s]);
        go(n, s + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(n, 0, &mut Vec::new(), &mut out);
    out
}

/// Rule-based saturation oracle for boolean systems over τ-absorption:
/// the least transition set containing `α` and closed under reflexive τ,
/// τ-transitivity, and absorption of τ on either side of an observable,
/// by naive rule application to a fixpoint.
pub fn milner_closure_oracle(alpha: &System) -> Result<System> {
    if alpha.semiring().kind() != SemiringKind::Boolean {
        return Err(Error::WrongSemiring {
            op: "milner_closure_oracle",
            expected: "boolean",
            actual: alpha.semiring().kind().to_string(),
        });
    }
    let alg = alpha.algebra();
    let tau_absorbing = alg.labels().all(|a| {
        alg.concat(a, Label::TAU) == Some(a)
            && alg.concat(Label::TAU, a) == Some(a)
            && alg
                .observables()
                .all(|b| a.is_tau() || alg.concat(a, b).is_none())
    });
    if !tau_absorbing {
        return Err(Error::ShapeMismatch(
            "milner_closure_oracle needs the τ-absorption label algebra".into(),
        ));
    }
    let n = alpha.states().len();
    let mut rel: BTreeSet<(usize, Label, usize)> =
        alpha.map().entries().map(|(c, _)| c).collect();
    for x in 0..n {
        rel.insert((x, Label::TAU, x));
    }
    loop {
        let mut added = Vec::new();
        for &(x, a, y) in &rel {
            for &(_, b, z) in rel.range((y, Label::TAU, 0)..(y + 1, Label::TAU, 0)) {
                let c = match (a.is_tau(), b.is_tau()) {
                    (_, true) => a,
                    (true, false) => b,
                    (false, false) => continue,
                };
                if !rel.contains(&(x, c, z)) {
                    added.push((x, c, z));
                }
            }
        }
        if added.is_empty() {
            break;
        }
        rel.extend(added);
    }
    let mut m = KleisliMap::zero(
        alpha.semiring(),
        alpha.algebra().clone(),
        alpha.states().clone(),
        alpha.states().clone(),
    );
    for (x, a, y) in rel {
        m.set(x, a, y, Weight::Bool(true))?;
    }
    let sys = System::new(m)?;
    match alpha.initial() {
        Some(i) => sys.with_initial(i),
        None => Ok(sys),
    }
}
