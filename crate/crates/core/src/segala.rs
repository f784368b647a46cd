//! Convex-branching (Segala-style) systems: each state maps to a finitely
//! generated convex set of finite-support rational weight functions over
//! `A_τ × Y`, in V-representation with exact rational arithmetic.
//!
//! Composition enumerates pure selections — one generator choice per support
//! cell — whose convex hull is the monadic composite; membership of a
//! generator in a hull is decided by an exact phase-one simplex over the
//! generator simplex, so stabilization of the Kleene iteration is detected
//! exactly. The iteration need not stabilize (geometric τ-loops), hence the
//! three-valued verdict: a pair is bisimilar exactly, distinguished at some
//! finite depth, or unknown at the iteration cap.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bisim::Partition;
use crate::error::Error;
use crate::semiring::{SemiringKind, Weight};
use crate::wlts::{KleisliMap, Label, LabelAlgebra, StateSpace};
use crate::Result;

/// One generator: a finite-support weight function over `(label, state)`
/// cells. Entries are strictly positive; the empty map is the zero function
/// (legal as a generator, e.g. for a terminal state).
pub type Gen = BTreeMap<(Label, usize), BigRational>;

fn scale_into(
    acc: &mut Gen,
    coef: &BigRational,
    gen: &Gen,
    relabel: impl Fn(Label) -> Option<Label>,
) {
    for ((b, z), v) in gen {
        if let Some(c) = relabel(*b) {
            let entry = acc.entry((c, *z)).or_insert_with(BigRational::zero);
            *entry += coef * v;
        }
    }
}

fn prune(gen: Gen) -> Gen {
    gen.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// A map `X -> CM(A_τ × Y)`: per state, a non-empty list of generators whose
/// convex hull is the state's row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexArrow {
    algebra: Arc<LabelAlgebra>,
    source: Arc<StateSpace>,
    target: Arc<StateSpace>,
    rows: Vec<Vec<Gen>>,
}

impl ConvexArrow {
    pub fn new(
        algebra: Arc<LabelAlgebra>,
        source: Arc<StateSpace>,
        target: Arc<StateSpace>,
        rows: Vec<Vec<Gen>>,
    ) -> Result<ConvexArrow> {
        if rows.len() != source.len() {
            return Err(Error::ShapeMismatch(format!(
                "convex arrow: {} rows for {} states",
                rows.len(),
                source.len()
            )));
        }
        for (x, gens) in rows.iter().enumerate() {
            if gens.is_empty() {
                return Err(Error::ShapeMismatch(format!(
                    "convex arrow: state {} has an empty generator list (rows are non-empty convex sets)",
                    source.name(x)
                )));
            }
            for g in gens {
                for ((l, y), v) in g {
                    if l.index() >= algebra.label_count() || *y >= target.len() {
                        return Err(Error::ShapeMismatch(
                            "convex arrow: generator cell out of range".into(),
                        ));
                    }
                    if v.is_negative() {
                        return Err(Error::ShapeMismatch(
                            "convex arrow: negative generator weight".into(),
                        ));
                    }
                }
            }
        }
        let rows = rows
            .into_iter()
            .map(|gens| gens.into_iter().map(prune).collect())
            .collect();
        Ok(ConvexArrow {
            algebra,
            source,
            target,
            rows,
        })
    }

    /// The unit: `x ↦ {1·(τ, x)}`.
    pub fn unit(algebra: Arc<LabelAlgebra>, states: Arc<StateSpace>) -> ConvexArrow {
        let rows = states
            .indices()
            .map(|x| {
                let mut g = Gen::new();
                g.insert((Label::TAU, x), BigRational::one());
                vec![g]
            })
            .collect();
        ConvexArrow {
            algebra,
            source: states.clone(),
            target: states,
            rows,
        }
    }

    /// Embeds a plain function as single point-mass generators.
    pub fn embed(
        algebra: Arc<LabelAlgebra>,
        source: Arc<StateSpace>,
        target: Arc<StateSpace>,
        p: &[usize],
    ) -> Result<ConvexArrow> {
        if p.len() != source.len() {
            return Err(Error::ShapeMismatch(
                "convex embed: function table size mismatch".into(),
            ));
        }
        let rows = p
            .iter()
            .map(|&y| {
                let mut g = Gen::new();
                g.insert((Label::TAU, y), BigRational::one());
                vec![g]
            })
            .collect();
        ConvexArrow::new(algebra, source, target, rows)
    }

    /// A deterministic weighted arrow (finite arith weights) as a convex
    /// arrow with one generator per state.
    pub fn from_weighted(map: &KleisliMap) -> Result<ConvexArrow> {
        if map.semiring().kind() != SemiringKind::Arith {
            return Err(Error::WrongSemiring {
                op: "from_weighted",
                expected: "arith",
                actual: map.semiring().kind().to_string(),
            });
        }
        let mut rows: Vec<Vec<Gen>> = map.source().indices().map(|_| vec![Gen::new()]).collect();
        for ((x, a, y), w) in map.entries() {
            match w {
                Weight::Rat(r) => {
                    rows[x][0].insert((a, y), r.clone());
                }
                _ => {
                    return Err(Error::ShapeMismatch(
                        "from_weighted: only finite weights embed into convex rows".into(),
                    ))
                }
            }
        }
        ConvexArrow::new(
            map.algebra().clone(),
            map.source().clone(),
            map.target().clone(),
            rows,
        )
    }

    pub fn algebra(&self) -> &Arc<LabelAlgebra> {
        &self.algebra
    }

    pub fn source(&self) -> &Arc<StateSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<StateSpace> {
        &self.target
    }

    pub fn generators(&self, x: usize) -> &[Gen] {
        &self.rows[x]
    }

    pub fn is_endo(&self) -> bool {
        self.source == self.target
    }

    fn check_parallel(&self, other: &ConvexArrow, op: &str) -> Result<()> {
        if self.algebra != other.algebra
            || self.source != other.source
            || self.target != other.target
        {
            return Err(Error::ShapeMismatch(format!(
                "{op}: convex arrows disagree on alphabet or state spaces"
            )));
        }
        Ok(())
    }

    /// Removes generators expressible as convex combinations of the rest.
    pub fn reduce(mut self) -> ConvexArrow {
        for gens in &mut self.rows {
            reduce_gens(gens);
        }
        self
    }

    /// Hull inclusion per state: every generator of `self` lies in the hull
    /// of `other`'s generators.
    pub fn leq(&self, other: &ConvexArrow) -> Result<bool> {
        self.check_parallel(other, "convex leq")?;
        for x in self.source.indices() {
            for g in &self.rows[x] {
                if !in_hull(g, &other.rows[x]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Hull of the union of generators, reduced.
    pub fn join(&self, other: &ConvexArrow) -> Result<ConvexArrow> {
        self.check_parallel(other, "convex join")?;
        let mut out = self.clone();
        for x in self.source.indices() {
            out.rows[x].extend(other.rows[x].iter().cloned());
            reduce_gens(&mut out.rows[x]);
        }
        Ok(out)
    }

    /// Do two states have the same row hull?
    pub fn rows_equivalent(&self, x: usize, y: usize) -> bool {
        // reduced rows are vertex sets, so listwise equality decides most
        // comparisons without touching the simplex
        self.rows[x] == self.rows[y]
            || (self.rows[x].iter().all(|g| in_hull(g, &self.rows[y]))
                && self.rows[y].iter().all(|g| in_hull(g, &self.rows[x])))
    }

    /// A generator of one row outside the other's hull, if any.
    pub fn separating_generator(&self, x: usize, y: usize) -> Option<(usize, Gen)> {
        for g in &self.rows[x] {
            if !in_hull(g, &self.rows[y]) {
                return Some((x, g.clone()));
            }
        }
        for g in &self.rows[y] {
            if !in_hull(g, &self.rows[x]) {
                return Some((y, g.clone()));
            }
        }
        None
    }
}

/// Kleisli composition in the convex setting: for each generator `φ` of
/// `f(x)` and each choice of a generator `ψ` of `g(y)` per support cell
/// `(a, y)` of `φ`, the pure selection `Σ φ(a,y) · (a·ψ)` is a generator of
/// the composite, with annihilated label pairs contributing no mass. The
/// hull of all pure selections is the monadic composite.
pub fn cm_compose(g: &ConvexArrow, f: &ConvexArrow) -> Result<ConvexArrow> {
    if f.algebra != g.algebra {
        return Err(Error::ShapeMismatch(
            "convex compose: different alphabets".into(),
        ));
    }
    if f.target != g.source {
        return Err(Error::ShapeMismatch(
            "convex compose: inner state spaces differ".into(),
        ));
    }
    let mut rows: Vec<Vec<Gen>> = Vec::with_capacity(f.source.len());
    for x in f.source.indices() {
        let mut gens: Vec<Gen> = Vec::new();
        for phi in &f.rows[x] {
            let cells: Vec<(&(Label, usize), &BigRational)> = phi.iter().collect();
            let radices: Vec<usize> = cells.iter().map(|((_, y), _)| g.rows[*y].len()).collect();
            // mixed-radix counter over per-cell generator choices
            let mut choice = vec![0usize; cells.len()];
            loop {
                let mut sel = Gen::new();
                for (k, ((a, y), coef)) in cells.iter().enumerate() {
                    let psi = &g.rows[*y][choice[k]];
                    scale_into(&mut sel, coef, psi, |b| f.algebra.concat(*a, b));
                }
                gens.push(prune(sel));
                let mut k = 0;
                loop {
                    if k == cells.len() {
                        break;
                    }
                    choice[k] += 1;
                    if choice[k] < radices[k] {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == cells.len() {
                    break;
                }
            }
        }
        reduce_gens(&mut gens);
        rows.push(gens);
    }
    ConvexArrow::new(f.algebra.clone(), f.source.clone(), g.target.clone(), rows)
}

/// Drops duplicate generators, then any generator that is a convex
/// combination of the remaining ones. The survivors are exactly the hull's
/// vertices, which are unique — so two reduced lists describe the same hull
/// if and only if they are equal as sorted lists.
///
/// Rows supported on at most two cells (the common case along saturation
/// chains) are reduced geometrically; higher dimensions fall back to the
/// per-point feasibility check.
fn reduce_gens(gens: &mut Vec<Gen>) {
    gens.sort();
    gens.dedup();
    if gens.len() <= 2 {
        return;
    }
    let mut cells: BTreeSet<(Label, usize)> = BTreeSet::new();
    for g in gens.iter() {
        cells.extend(g.keys().copied());
    }
    match cells.len() {
        0 => (), // dedup already left the single zero generator
        1 => {
            // a segment: only the endpoints are vertices
            let cell = *cells.iter().next().unwrap();
            let zero = BigRational::zero();
            let value = |g: &Gen| g.get(&cell).cloned().unwrap_or_else(|| zero.clone());
            let min = gens.iter().map(&value).min().unwrap();
            let max = gens.iter().map(&value).max().unwrap();
            gens.retain(|g| value(g) == min || value(g) == max);
            gens.dedup();
        }
        2 => {
            let mut it = cells.iter();
            let (c1, c2) = (*it.next().unwrap(), *it.next().unwrap());
            let hull = planar_hull(gens, c1, c2);
            *gens = hull;
        }
        _ => {
            let mut i = 0;
            while i < gens.len() && gens.len() > 1 {
                if hull_membership(&gens[i], gens, Some(i)) {
                    gens.remove(i);
                } else {
                    i += 1;
                }
            }
        }
    }
}

/// Andrew's monotone chain over exact rationals: the vertices of the planar
/// hull of generators supported on two cells, collinear interior points
/// dropped. Returns the vertex generators in sorted order.
fn planar_hull(gens: &[Gen], c1: (Label, usize), c2: (Label, usize)) -> Vec<Gen> {
    let zero = BigRational::zero();
    let coord = |g: &Gen| -> (BigRational, BigRational) {
        (
            g.get(&c1).cloned().unwrap_or_else(|| zero.clone()),
            g.get(&c2).cloned().unwrap_or_else(|| zero.clone()),
        )
    };
    // gens are sorted and deduped, and two cells determine the generator, so
    // points are distinct and already in lexicographic coordinate order of
    // the map representation; re-sort by (u, v) to be explicit
    let mut pts: Vec<((BigRational, BigRational), usize)> =
        gens.iter().enumerate().map(|(i, g)| (coord(g), i)).collect();
    pts.sort();
    let cross = |o: &(BigRational, BigRational),
                 a: &(BigRational, BigRational),
                 b: &(BigRational, BigRational)| {
        (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
    };
    let mut keep = vec![false; gens.len()];
    let mut chain = |iter: &mut dyn Iterator<Item = &((BigRational, BigRational), usize)>| {
        let mut stack: Vec<&((BigRational, BigRational), usize)> = Vec::new();
        for p in iter {
            while stack.len() >= 2 {
                let o = &stack[stack.len() - 2].0;
                let a = &stack[stack.len() - 1].0;
                if cross(o, a, &p.0) <= zero {
                    stack.pop();
                } else {
                    break;
                }
            }
            stack.push(p);
        }
        for p in stack {
            keep[p.1] = true;
        }
    };
    chain(&mut pts.iter());
    chain(&mut pts.iter().rev());
    gens.iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, g)| g.clone())
        .collect()
}

/// Exact membership of `target` in the convex hull of `gens`: a phase-one
/// simplex with Bland's rule deciding `Σ λ_j gen_j = target, Σ λ_j = 1,
/// λ ≥ 0`.
pub fn in_hull(target: &Gen, gens: &[Gen]) -> bool {
    hull_membership(target, gens, None)
}

#[allow(clippy::needless_range_loop)] // simplex pivoting over parallel rows
fn hull_membership(target: &Gen, all: &[Gen], skip: Option<usize>) -> bool {
    let gens: Vec<&Gen> = all
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, g)| g)
        .collect();
    if gens.is_empty() {
        return false;
    }
    if gens.contains(&target) {
        return true;
    }
    // necessary conditions, much cheaper than the simplex: every cell of a
    // hull point is bounded by the generators' cell maximum, and its total
    // mass lies between the generators' mass extremes
    let zero = BigRational::zero();
    for (cell, v) in target {
        let max = gens
            .iter()
            .map(|g| g.get(cell).unwrap_or(&zero))
            .max()
            .unwrap();
        if v > max {
            return false;
        }
    }
    let mass = |g: &Gen| -> BigRational { g.values().sum() };
    let t_mass = mass(target);
    let masses: Vec<BigRational> = gens.iter().map(|g| mass(g)).collect();
    if masses.iter().all(|m| *m < t_mass) || masses.iter().all(|m| *m > t_mass) {
        return false;
    }
    let mut cells: BTreeSet<(Label, usize)> = target.keys().copied().collect();
    for g in &gens {
        cells.extend(g.keys().copied());
    }
    let cells: Vec<(Label, usize)> = cells.into_iter().collect();
    let m = cells.len() + 1; // per-cell equalities plus the simplex constraint
    let n = gens.len();

    // tableau columns: [λ_1..λ_n | artificials | rhs]; last row is the
    // phase-one objective (reduced costs)
    let cols = n + m + 1;
    let mut t = vec![vec![BigRational::zero(); cols]; m + 1];
    for (i, cell) in cells.iter().enumerate() {
        for (j, g) in gens.iter().enumerate() {
            if let Some(v) = g.get(cell) {
                t[i][j] = v.clone();
            }
        }
        if let Some(v) = target.get(cell) {
            t[i][n + m] = v.clone();
        }
    }
    for j in 0..n {
        t[m - 1][j] = BigRational::one();
    }
    t[m - 1][n + m] = BigRational::one();
    for i in 0..m {
        t[i][n + i] = BigRational::one();
    }
    for j in 0..n {
        let s: BigRational = (0..m).map(|i| t[i][j].clone()).sum();
        t[m][j] = -s;
    }
    let rhs_sum: BigRational = (0..m).map(|i| t[i][n + m].clone()).sum();
    t[m][n + m] = -rhs_sum;

    let mut basis: Vec<usize> = (n..n + m).collect();
    // Bland's rule: lowest-index entering column, lowest basis index on
    // ratio ties — no cycling
    while let Some(enter) = (0..n + m).find(|&j| t[m][j].is_negative()) {
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][n + m] / &t[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return false;
        };
        let pivot = t[leave][enter].clone();
        for v in t[leave].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..m + 1 {
            if i == leave || t[i][enter].is_zero() {
                continue;
            }
            let factor = t[i][enter].clone();
            for j in 0..cols {
                let sub = &factor * &t[leave][j];
                t[i][j] -= sub;
            }
        }
        basis[leave] = enter;
    }
    t[m][n + m].is_zero()
}

/// A convex endo-system with an optional initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexSystem {
    arrow: ConvexArrow,
    initial: Option<usize>,
}

impl ConvexSystem {
    pub fn new(arrow: ConvexArrow) -> Result<ConvexSystem> {
        if !arrow.is_endo() {
            return Err(Error::ShapeMismatch(
                "a convex system needs identical source and target state lists".into(),
            ));
        }
        if !arrow.algebra.is_valid() {
            return Err(Error::ShapeMismatch(
                "refusing to build a system over a label algebra that fails its laws".into(),
            ));
        }
        Ok(ConvexSystem {
            arrow,
            initial: None,
        })
    }

    pub fn with_initial(mut self, initial: usize) -> Result<ConvexSystem> {
        if initial >= self.arrow.source.len() {
            return Err(Error::ShapeMismatch("initial state out of range".into()));
        }
        self.initial = Some(initial);
        Ok(self)
    }

    pub fn arrow(&self) -> &ConvexArrow {
        &self.arrow
    }

    pub fn states(&self) -> &Arc<StateSpace> {
        &self.arrow.source
    }

    pub fn algebra(&self) -> &Arc<LabelAlgebra> {
        &self.arrow.algebra
    }

    pub fn initial(&self) -> Option<usize> {
        self.initial
    }

    /// Disjoint union, states renamed `1:x` / `2:y`.
    pub fn coproduct(a: &ConvexSystem, b: &ConvexSystem) -> Result<(ConvexSystem, usize)> {
        if a.arrow.algebra != b.arrow.algebra {
            return Err(Error::ShapeMismatch(
                "coproduct: systems over different alphabets".into(),
            ));
        }
        let mut names = Vec::new();
        names.extend(a.states().names().iter().map(|n| format!("1:{n}")));
        names.extend(b.states().names().iter().map(|n| format!("2:{n}")));
        let states = StateSpace::new(&names)?;
        let offset = a.states().len();
        let mut rows = a.arrow.rows.clone();
        for gens in &b.arrow.rows {
            rows.push(
                gens.iter()
                    .map(|g| {
                        g.iter()
                            .map(|((l, y), v)| ((*l, y + offset), v.clone()))
                            .collect()
                    })
                    .collect(),
            );
        }
        let arrow = ConvexArrow::new(a.arrow.algebra.clone(), states.clone(), states, rows)?;
        Ok((ConvexSystem::new(arrow)?, offset))
    }
}

/// Outcome of a convex Kleene solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CmStatus {
    /// The iteration stabilized: the value is the least fixed point.
    Exact,
    /// The cap was reached first; the value is the depth-`cap` approximant.
    Capped { depth: usize },
}

impl CmStatus {
    pub fn is_exact(&self) -> bool {
        matches!(self, CmStatus::Exact)
    }
}

/// Kleene iteration `x_{k+1} = f ∨ (x_k ∘ α)` in the convex setting, with
/// exact stabilization detection by mutual hull inclusion. Returns the
/// value, the status, and the reached depth.
pub fn cm_ps_solve(
    alpha: &ConvexSystem,
    f: &ConvexArrow,
    cap: usize,
) -> Result<(ConvexArrow, CmStatus, usize)> {
    if f.algebra != alpha.arrow.algebra || f.source != *alpha.states() {
        return Err(Error::ShapeMismatch(
            "convex solver: arrow does not match the system".into(),
        ));
    }
    if cap == 0 {
        return Err(Error::InvalidConfig("cap must be positive".into()));
    }
    let mut x = f.clone().reduce();
    for k in 1..=cap {
        let step = f.join(&cm_compose(&x, &alpha.arrow)?)?;
        // both sides are reduced to their (unique) vertex sets, so hull
        // equality is plain equality of the sorted generator lists
        if step == x {
            return Ok((x, CmStatus::Exact, k));
        }
        x = step;
    }
    Ok((x, CmStatus::Capped { depth: cap }, cap))
}

/// Saturation in the convex setting: `cm_ps_solve` against the unit.
pub fn cm_saturate(alpha: &ConvexSystem, cap: usize) -> Result<(ConvexArrow, CmStatus, usize)> {
    let unit = ConvexArrow::unit(alpha.arrow.algebra.clone(), alpha.states().clone());
    cm_ps_solve(alpha, &unit, cap)
}

/// A separating generator: a point of one state's row hull that is not in
/// the other's, over block-space cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexWitness {
    pub left: usize,
    pub right: usize,
    /// Which of the two states owns the generator.
    pub owner: usize,
    pub generator: Gen,
    /// Names of the block cells the generator refers to.
    pub block_names: Vec<String>,
}

/// Per-pair answer of the convex equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairAnswer {
    /// Same block and every row solve stabilized.
    BisimilarExact,
    /// Row hulls differ at the reached depth; carries the separating
    /// generator. A finite-depth certificate, not a claim about the limit.
    Distinguished { depth: usize, witness: ConvexWitness },
    /// Same block but some row solve was capped: equality not established.
    Unknown { cap: usize },
}

/// Verdict of the convex partition refinement.
#[derive(Debug, Clone)]
pub struct ConvexVerdict {
    pub partition: Partition,
    /// Every row solve along the refinement stabilized.
    pub exact: bool,
    pub cap: usize,
    /// First-split certificates `(left, right, depth, witness)` for every
    /// pair that ended up separated.
    pub distinguished: Vec<(usize, usize, usize, ConvexWitness)>,
}

impl ConvexVerdict {
    /// The three-valued answer for a pair of states.
    pub fn answer(&self, a: usize, b: usize) -> PairAnswer {
        let (a, b) = (a.min(b), a.max(b));
        if self.partition.same_block(a, b) {
            if self.exact {
                PairAnswer::BisimilarExact
            } else {
                PairAnswer::Unknown { cap: self.cap }
            }
        } else {
            let (_, _, depth, witness) = self
                .distinguished
                .iter()
                .find(|(x, y, _, _)| (*x, *y) == (a, b))
                .expect("split pair carries a certificate")
                .clone();
            PairAnswer::Distinguished { depth, witness }
        }
    }
}

/// Partition refinement for convex systems. Rows toward the current blocks
/// are the convex saturations of the block embedding; blocks split where the
/// row hulls differ (mutual inclusion fails). With capped solves a split is
/// a depth certificate, not a limit claim, and pairs still merged are
/// reported unknown.
pub fn weak_convex_bisim(alpha: &ConvexSystem, cap: usize) -> Result<ConvexVerdict> {
    convex_bisim(alpha, cap, true)
}

/// Strong variant: rows are `α` itself projected onto the blocks, no
/// saturation, always exact.
pub fn strong_convex_bisim(alpha: &ConvexSystem) -> Result<ConvexVerdict> {
    convex_bisim(alpha, 1, false)
}

fn block_projection(alpha: &ConvexSystem, p: &Partition) -> Result<ConvexArrow> {
    let embed = ConvexArrow::embed(
        alpha.arrow.algebra.clone(),
        alpha.states().clone(),
        p.block_space(alpha.states())?,
        &p.quotient(),
    )?;
    // the embedding is deterministic, so this is exactly the relabelling of
    // every generator into block cells
    cm_compose(&embed, &alpha.arrow)
}

fn convex_bisim(alpha: &ConvexSystem, cap: usize, saturating: bool) -> Result<ConvexVerdict> {
    let n = alpha.states().len();
    let mut p = Partition::coarsest(n);
    let mut exact = true;
    let mut distinguished: Vec<(usize, usize, usize, ConvexWitness)> = Vec::new();
    loop {
        let (rows, status, depth) = if saturating {
            let embed = ConvexArrow::embed(
                alpha.arrow.algebra.clone(),
                alpha.states().clone(),
                p.block_space(alpha.states())?,
                &p.quotient(),
            )?;
            cm_ps_solve(alpha, &embed, cap)?
        } else {
            (block_projection(alpha, &p)?, CmStatus::Exact, 0)
        };
        exact &= status.is_exact();
        let mut new_blocks: Vec<Vec<usize>> = Vec::new();
        for block in p.blocks() {
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for &s in block {
                match groups.iter_mut().find(|g| rows.rows_equivalent(g[0], s)) {
                    Some(g) => g.push(s),
                    None => groups.push(vec![s]),
                }
            }
            for (i, gi) in groups.iter().enumerate() {
                for gj in groups.iter().skip(i + 1) {
                    for &a in gi {
                        for &b in gj {
                            let (a, b) = (a.min(b), a.max(b));
                            if distinguished.iter().any(|(x, y, _, _)| (*x, *y) == (a, b)) {
                                continue;
                            }
                            let (owner, generator) = rows
                                .separating_generator(a, b)
                                .expect("split states have a separating generator");
                            distinguished.push((
                                a,
                                b,
                                depth,
                                ConvexWitness {
                                    left: a,
                                    right: b,
                                    owner,
                                    generator,
                                    block_names: rows.target().names().to_vec(),
                                },
                            ));
                        }
                    }
                }
            }
            new_blocks.extend(groups);
        }
        let next = Partition::new(new_blocks, n)?;
        if next == p {
            return Ok(ConvexVerdict {
                partition: p,
                exact,
                cap,
                distinguished,
            });
        }
        p = next;
    }
}

/// Is `p` a weak convex bisimulation at the given cap: are the row hulls
/// toward `p`'s blocks equal within every block? Returns the answer and
/// whether the row solve was exact.
pub fn is_weak_convex_bisim(
    alpha: &ConvexSystem,
    p: &Partition,
    cap: usize,
) -> Result<(bool, bool)> {
    if p.state_count() != alpha.states().len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} states, system has {}",
            p.state_count(),
            alpha.states().len()
        )));
    }
    let embed = ConvexArrow::embed(
        alpha.arrow.algebra.clone(),
        alpha.states().clone(),
        p.block_space(alpha.states())?,
        &p.quotient(),
    )?;
    let (rows, status, _) = cm_ps_solve(alpha, &embed, cap)?;
    let accepted = p
        .blocks()
        .iter()
        .all(|b| b.iter().all(|&s| rows.rows_equivalent(b[0], s)));
    Ok((accepted, status.is_exact()))
}

/// Quotient convex system on the blocks of the weak convex bisimulation.
/// Refuses when any row solve was capped.
pub fn cm_minimize(alpha: &ConvexSystem, cap: usize) -> Result<ConvexSystem> {
    let verdict = weak_convex_bisim(alpha, cap)?;
    if !verdict.exact {
        return Err(Error::ApproximateVerdict {
            op: "minimize",
            status: format!("capped at {}", verdict.cap),
        });
    }
    let p = &verdict.partition;
    let embed = ConvexArrow::embed(
        alpha.arrow.algebra.clone(),
        alpha.states().clone(),
        p.block_space(alpha.states())?,
        &p.quotient(),
    )?;
    let (rows, _, _) = cm_ps_solve(alpha, &embed, cap)?;
    let blocks = p.block_space(alpha.states())?;
    let quotient_rows: Vec<Vec<Gen>> = p
        .blocks()
        .iter()
        .map(|members| rows.generators(members[0]).to_vec())
        .collect();
    let arrow = ConvexArrow::new(
        alpha.arrow.algebra.clone(),
        blocks.clone(),
        blocks,
        quotient_rows,
    )?;
    let sys = ConvexSystem::new(arrow)?;
    match alpha.initial() {
        Some(i) => sys.with_initial(p.block_of(i)),
        None => Ok(sys),
    }
}
