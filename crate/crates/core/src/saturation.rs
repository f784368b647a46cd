//! Least solutions of `x = f ∨ x ∘ α` and the free monad `α*` (saturation),
//! with one solving strategy per weight algebra.
//!
//! The supremum `⋁_n F^n(f)` stabilizes in finitely many steps for boolean
//! and tropical weights, so those run an exact closure. `ℕ ∪ {∞}` gets Kleene
//! iteration with divergence promotion. The arithmetic semiring converges
//! only in the limit (geometric τ-loops), so an exact policy-iteration solver
//! resolves each cell's join against the linear part and solves the linear
//! subsystems by star-closure elimination over `[0,∞]` in exact rationals.
//! An ε-approximate Kleene mode is available for every algebra.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::semiring::{numeric_delta, parse_rational, Semiring, SemiringKind, SemiringOps, Weight};
use crate::wlts::{compose, Cell, KleisliMap, Label, System};
use crate::Result;

/// Solver strategy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// boolean/tropical → closure, nat_inf → divergence-promoting Kleene,
    /// arith → policy iteration.
    #[default]
    Auto,
    /// Exact Kleene iteration to stabilization (with squaring acceleration
    /// for plain saturation). Terminates on boolean/tropical; caps out on
    /// instances whose supremum is a proper limit.
    Closure,
    /// Exact policy iteration; arith only.
    Policy,
    /// Kleene iteration with entrywise ε-stop.
    Iterate,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveMode::Auto => "auto",
            SolveMode::Closure => "closure",
            SolveMode::Policy => "policy",
            SolveMode::Iterate => "iterate",
        };
        write!(f, "{s}")
    }
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolveMode::Auto),
            "closure" => Ok(SolveMode::Closure),
            "policy" => Ok(SolveMode::Policy),
            "iterate" => Ok(SolveMode::Iterate),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub mode: SolveMode,
    /// Iterate-mode convergence threshold; must be positive there.
    pub epsilon: BigRational,
    /// Iteration cap.
    pub cap: usize,
    /// Iterate-mode promotion bound: a finite cell growing past this is set
    /// to `inf`, recorded in `infinite_cells`.
    pub overflow: BigRational,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: SolveMode::Auto,
            epsilon: parse_rational("1e-12").unwrap(),
            cap: 10_000,
            overflow: parse_rational("1e30").unwrap(),
        }
    }
}

impl SolveConfig {
    pub fn with_mode(mode: SolveMode) -> SolveConfig {
        SolveConfig {
            mode,
            ..SolveConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cap == 0 {
            return Err(Error::InvalidConfig("cap must be positive".into()));
        }
        if self.epsilon.is_negative() {
            return Err(Error::InvalidConfig("epsilon must be >= 0".into()));
        }
        if self.mode == SolveMode::Iterate && self.epsilon.is_zero() {
            return Err(Error::InvalidConfig(
                "iterate mode needs a positive epsilon; use closure or policy for exact solves"
                    .into(),
            ));
        }
        if !self.overflow.is_positive() {
            return Err(Error::InvalidConfig("overflow bound must be positive".into()));
        }
        Ok(())
    }
}

/// How a solve finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    /// The returned value satisfies the equation with equality.
    Exact,
    /// Iterate mode stopped with every last-step delta at most `residual`.
    Converged { residual: BigRational },
    /// The iteration cap was hit before stabilization.
    Capped { depth: usize },
}

impl SolveStatus {
    pub fn is_exact(&self) -> bool {
        matches!(self, SolveStatus::Exact)
    }
}

/// Result of a saturation/fixed-point solve.
#[derive(Debug, Clone)]
pub struct SaturationResult {
    pub value: KleisliMap,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Cells whose value is the point at infinity (divergent suprema).
    pub infinite_cells: BTreeSet<Cell>,
}

fn infinite_cells_of(map: &KleisliMap) -> BTreeSet<Cell> {
    map.entries()
        .filter(|(_, w)| w.is_inf())
        .map(|(c, _)| c)
        .collect()
}

fn check_inputs(alpha: &System, f: &KleisliMap) -> Result<()> {
    if f.semiring() != alpha.semiring() || f.algebra() != alpha.algebra() {
        return Err(Error::ShapeMismatch(
            "solver: system and arrow over different semirings or alphabets".into(),
        ));
    }
    if f.source() != alpha.states() {
        return Err(Error::ShapeMismatch(
            "solver: arrow source differs from the system's state space".into(),
        ));
    }
    Ok(())
}

/// Least solution of `x = f ∨ x ∘ α`.
pub fn ps_solve(alpha: &System, f: &KleisliMap, cfg: &SolveConfig) -> Result<SaturationResult> {
    cfg.validate()?;
    check_inputs(alpha, f)?;
    let kind = alpha.semiring().kind();
    match cfg.mode {
        SolveMode::Auto => match kind {
            SemiringKind::Boolean | SemiringKind::Tropical => closure_solve(alpha, f, cfg),
            SemiringKind::NatInf => nat_inf_solve(alpha, f),
            SemiringKind::Arith => policy_solve_or_fallback(alpha, f, cfg),
        },
        SolveMode::Closure => closure_solve(alpha, f, cfg),
        SolveMode::Policy => {
            if kind != SemiringKind::Arith {
                return Err(Error::WrongSemiring {
                    op: "policy_solve",
                    expected: "arith",
                    actual: kind.to_string(),
                });
            }
            policy_solve_or_fallback(alpha, f, cfg)
        }
        SolveMode::Iterate => iterate_solve(alpha, f, cfg),
    }
}

/// The free monad `α* = ⋁_n (id ∨ α)^n`, i.e. `ps_solve` against the unit.
pub fn saturate(alpha: &System, cfg: &SolveConfig) -> Result<SaturationResult> {
    let unit = KleisliMap::unit(
        alpha.semiring(),
        alpha.algebra().clone(),
        alpha.states().clone(),
    );
    ps_solve(alpha, &unit, cfg)
}

fn is_unit(f: &KleisliMap) -> bool {
    f.is_endo()
        && f.support() == f.source().len()
        && f.source()
            .indices()
            .all(|x| f.semiring().is_one(&f.get(x, Label::TAU, x)))
}

/// Exact Kleene iteration. Saturation itself (`f` = unit) is accelerated by
/// squaring: the powers `(id ∨ α)^(2^k)` are cofinal in the defining chain,
/// so the limit is unchanged.
fn closure_solve(alpha: &System, f: &KleisliMap, cfg: &SolveConfig) -> Result<SaturationResult> {
    if is_unit(f) {
        let mut s = f.join(alpha.map())?;
        for iterations in 1..=cfg.cap {
            let next = s.join(&compose(&s, &s)?)?;
            if next == s {
                return Ok(SaturationResult {
                    infinite_cells: infinite_cells_of(&s),
                    value: s,
                    status: SolveStatus::Exact,
                    iterations,
                });
            }
            s = next;
        }
        return Ok(SaturationResult {
            infinite_cells: infinite_cells_of(&s),
            value: s,
            status: SolveStatus::Capped { depth: cfg.cap },
            iterations: cfg.cap,
        });
    }
    let mut x = f.clone();
    for iterations in 1..=cfg.cap {
        let next = f.join(&compose(&x, alpha.map())?)?;
        if next == x {
            return Ok(SaturationResult {
                infinite_cells: infinite_cells_of(&x),
                value: x,
                status: SolveStatus::Exact,
                iterations,
            });
        }
        x = next;
    }
    Ok(SaturationResult {
        infinite_cells: infinite_cells_of(&x),
        value: x,
        status: SolveStatus::Capped { depth: cfg.cap },
        iterations: cfg.cap,
    })
}

/// Kleene iteration with an entrywise ε-stop. Finite cells that climb past
/// the overflow bound are promoted to `inf` and recorded.
fn iterate_solve(alpha: &System, f: &KleisliMap, cfg: &SolveConfig) -> Result<SaturationResult> {
    let mut x = f.clone();
    let mut promoted = BTreeSet::new();
    for iterations in 1..=cfg.cap {
        let mut next = f.join(&compose(&x, alpha.map())?)?;
        let over: Vec<Cell> = next
            .entries()
            .filter(|(_, w)| matches!(w, Weight::Rat(r) if r > &cfg.overflow))
            .map(|(c, _)| c)
            .collect();
        for c in over {
            next.set(c.0, c.1, c.2, Weight::Inf)?;
            promoted.insert(c);
        }
        // residual: the largest entrywise move of this step (None = infinite)
        let mut residual = Some(BigRational::zero());
        for (c, w) in next.entries() {
            let prev = x.get(c.0, c.1, c.2);
            match (numeric_delta(w, &prev), &mut residual) {
                (Some(d), Some(r)) => {
                    if d > *r {
                        *r = d;
                    }
                }
                _ => residual = None,
            }
        }
        let done = residual.as_ref().is_some_and(|r| *r <= cfg.epsilon);
        x = next;
        if done {
            let mut infinite_cells = infinite_cells_of(&x);
            infinite_cells.extend(promoted);
            return Ok(SaturationResult {
                value: x,
                status: SolveStatus::Converged {
                    residual: residual.unwrap(),
                },
                iterations,
                infinite_cells,
            });
        }
    }
    let mut infinite_cells = infinite_cells_of(&x);
    infinite_cells.extend(promoted);
    Ok(SaturationResult {
        value: x,
        status: SolveStatus::Capped { depth: cfg.cap },
        iterations: cfg.cap,
        infinite_cells,
    })
}

/// Exact least fixed point over `ℕ ∪ {∞}`.
///
/// Every cell whose supremum is finite takes its final value within
/// `|X|·|A_τ|·|Y|` rounds (the number of cells bounds the depth of a best
/// derivation), so any cell still strictly increasing after that bound is
/// divergent and is promoted to `inf`; iteration then resumes with `inf`
/// absorbing until the table stabilizes.
pub fn nat_inf_solve(alpha: &System, f: &KleisliMap) -> Result<SaturationResult> {
    check_inputs(alpha, f)?;
    if alpha.semiring().kind() != SemiringKind::NatInf {
        return Err(Error::WrongSemiring {
            op: "nat_inf_solve",
            expected: "nat_inf",
            actual: alpha.semiring().kind().to_string(),
        });
    }
    let cells = alpha.states().len() * alpha.algebra().label_count() * f.target().len();
    let bound = cells.max(1);
    let hard_cap = bound + cells + 4;
    let mut x = f.clone();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next = f.join(&compose(&x, alpha.map())?)?;
        if iterations > bound {
            let grew: Vec<Cell> = next
                .entries()
                .filter(|((s, a, t), w)| !w.is_inf() && **w != x.get(*s, *a, *t))
                .map(|(c, _)| c)
                .collect();
            for (s, a, t) in grew {
                next.set(s, a, t, Weight::Inf)?;
            }
        }
        if next == x {
            return Ok(SaturationResult {
                infinite_cells: infinite_cells_of(&x),
                value: x,
                status: SolveStatus::Exact,
                iterations,
            });
        }
        x = next;
        assert!(
            iterations <= hard_cap,
            "nat_inf_solve failed to stabilize within its provable bound"
        );
    }
}

/// Exact arith least fixed point by policy iteration.
///
/// Each cell of the equation `v = f ∨ (v ∘ α)` chooses between its base value
/// and the linear part. Starting all-base, a cell switches to linear when the
/// linear part strictly beats its current value; the chosen linear subsystem
/// is then solved exactly (least solution above the current vector) by
/// star-closure Gaussian elimination over `[0,∞]`. Cells never switch back,
/// so the number of policy rounds is bounded by the cell count, values climb
/// monotonically below the least fixed point, and the final stable vector is
/// the least fixed point itself. Divergent linear subsystems (a τ-cycle of
/// weight ≥ 1 feeding positive mass) surface as `inf` cells.
pub fn policy_solve(alpha: &System, f: &KleisliMap) -> Result<SaturationResult> {
    check_inputs(alpha, f)?;
    if alpha.semiring().kind() != SemiringKind::Arith {
        return Err(Error::WrongSemiring {
            op: "policy_solve",
            expected: "arith",
            actual: alpha.semiring().kind().to_string(),
        });
    }
    policy_solve_inner(alpha, f).map(|(value, iterations)| SaturationResult {
        infinite_cells: infinite_cells_of(&value),
        value,
        status: SolveStatus::Exact,
        iterations,
    })
}

fn policy_solve_or_fallback(
    alpha: &System,
    f: &KleisliMap,
    cfg: &SolveConfig,
) -> Result<SaturationResult> {
    match policy_solve_inner(alpha, f) {
        Ok((value, iterations)) => Ok(SaturationResult {
            infinite_cells: infinite_cells_of(&value),
            value,
            status: SolveStatus::Exact,
            iterations,
        }),
        Err(Error::InvalidConfig(msg)) if msg.contains("policy cycle") => {
            let mut fallback = cfg.clone();
            fallback.mode = SolveMode::Iterate;
            if fallback.epsilon.is_zero() {
                fallback.epsilon = SolveConfig::default().epsilon;
            }
            iterate_solve(alpha, f, &fallback)
        }
        Err(e) => Err(e),
    }
}

/// One linear-part term: cell `(x, c)` receives `coef · v(z, a)`.
struct LinearTerm {
    coef: Weight,
    var: usize,
}

fn policy_solve_inner(alpha: &System, f: &KleisliMap) -> Result<(KleisliMap, usize)> {
    let sr = alpha.semiring();
    let labels = alpha.algebra().label_count();
    let nx = alpha.states().len();
    let vars = nx * labels;
    let var = |x: usize, c: Label| x * labels + c_index(c);

    // linear map for one target column: A[(x,c)] = Σ α(x)(b,z) · v(z,a)
    // over all b,a with b·a = c — independent of the target state, so built
    // once and reused for every column.
    let mut linear: Vec<Vec<LinearTerm>> = (0..vars).map(|_| Vec::new()).collect();
    for ((x, b, z), w) in alpha.map().entries() {
        for a in alpha.algebra().labels() {
            if let Some(c) = alpha.algebra().concat(b, a) {
                push_term(&mut linear[var(x, c)], w.clone(), var(z, a), &sr);
            }
        }
    }

    let mut out = KleisliMap::zero(
        sr,
        alpha.algebra().clone(),
        alpha.states().clone(),
        f.target().clone(),
    );
    let mut rounds_total = 0;
    for y in f.target().indices() {
        let mut base = vec![sr.zero(); vars];
        for x in alpha.states().indices() {
            for c in alpha.algebra().labels() {
                base[var(x, c)] = f.get(x, c, y);
            }
        }
        let rounds = policy_column(&sr, &linear, &mut base, vars)?;
        rounds_total = rounds_total.max(rounds);
        for x in alpha.states().indices() {
            for c in alpha.algebra().labels() {
                let w = base[var(x, c)].clone();
                if !sr.is_zero(&w) {
                    out.set(x, c, y, w)?;
                }
            }
        }
    }
    Ok((out, rounds_total))
}

fn c_index(c: Label) -> usize {
    c.index()
}

fn push_term(terms: &mut Vec<LinearTerm>, coef: Weight, var: usize, sr: &Semiring) {
    if let Some(t) = terms.iter_mut().find(|t| t.var == var) {
        t.coef = sr.add(&t.coef, &coef);
    } else {
        terms.push(LinearTerm { coef, var });
    }
}

/// Policy iteration on one column; `v` starts as the base vector and is
/// updated in place to the least fixed point. Returns the number of policy
/// rounds.
fn policy_column(
    sr: &Semiring,
    linear: &[Vec<LinearTerm>],
    v: &mut [Weight],
    vars: usize,
) -> Result<usize> {
    let mut is_linear = vec![false; vars];
    let eval = |v: &[Weight], i: usize| -> Weight {
        let mut acc = sr.zero();
        for t in &linear[i] {
            acc = sr.add(&acc, &sr.mul(&t.coef, &v[t.var]));
        }
        acc
    };
    for round in 1.. {
        if round > vars + 2 {
            // cells only ever switch base → linear, so this cannot happen;
            // kept as an honest escape hatch for the iterate fallback
            return Err(Error::InvalidConfig("policy cycle detected".into()));
        }
        let mut switched = Vec::new();
        let mut deltas = vec![sr.zero(); vars];
        for i in 0..vars {
            let av = eval(v, i);
            if sr.leq(&av, &v[i]) {
                continue;
            }
            // strict improvement: adopt the linear choice
            is_linear[i] = true;
            deltas[i] = sub_weight(&av, &v[i]);
            switched.push(i);
        }
        if switched.is_empty() {
            return Ok(round);
        }
        // least solution above v: v' = v + w with w = A_LL w + d on the
        // linear cells (base rows are constant, their delta is zero)
        let lin_vars: Vec<usize> = (0..vars).filter(|&i| is_linear[i]).collect();
        let index_of: std::collections::BTreeMap<usize, usize> = lin_vars
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, k))
            .collect();
        let n = lin_vars.len();
        let mut a = vec![vec![sr.zero(); n]; n];
        let mut d = vec![sr.zero(); n];
        for (k, &i) in lin_vars.iter().enumerate() {
            d[k] = deltas[i].clone();
            for t in &linear[i] {
                if let Some(&j) = index_of.get(&t.var) {
                    a[k][j] = sr.add(&a[k][j], &t.coef);
                }
            }
        }
        let w = star_eliminate(sr, &mut a, &mut d);
        for (k, &i) in lin_vars.iter().enumerate() {
            v[i] = sr.add(&v[i], &w[k]);
        }
    }
    unreachable!()
}

/// `a − b` for arith weights with `a ≥ b`; `inf − finite = inf`.
fn sub_weight(a: &Weight, b: &Weight) -> Weight {
    match (a, b) {
        (Weight::Inf, _) => Weight::Inf,
        (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x - y),
        _ => panic!("sub_weight: malformed arith weights"),
    }
}

/// Least solution of `w = A·w + d` over `[0,∞]` by star-closure
/// Gauss–Jordan elimination: pivot `k` resolves `w_k` through the scalar
/// star `A[k][k]* = 1/(1−a)` below one and `inf` from one on, which is where
/// singular subsystems with positive mass turn into `inf` cells.
#[allow(clippy::needless_range_loop)] // elimination over parallel rows
fn star_eliminate(sr: &Semiring, a: &mut [Vec<Weight>], d: &mut [Weight]) -> Vec<Weight> {
    let n = d.len();
    for k in 0..n {
        let s = sr.star(&a[k][k]);
        a[k][k] = sr.zero();
        for j in 0..n {
            a[k][j] = sr.mul(&s, &a[k][j]);
        }
        d[k] = sr.mul(&s, &d[k]);
        for i in 0..n {
            if i == k || sr.is_zero(&a[i][k]) {
                continue;
            }
            let c = std::mem::replace(&mut a[i][k], sr.zero());
            for j in 0..n {
                let add = sr.mul(&c, &a[k][j]);
                a[i][j] = sr.add(&a[i][j], &add);
            }
            let add = sr.mul(&c, &d[k]);
            d[i] = sr.add(&d[i], &add);
        }
    }
    d.to_vec()
}
