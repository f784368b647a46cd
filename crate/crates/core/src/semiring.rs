//! Weight algebras: exact representations of the four shipped ω-continuous
//! positively ordered semirings, plus the law validator used by `validate`
//! commands and the test suites.
//!
//! All weights are exact: booleans, arbitrary-precision rationals, or the
//! distinguished `inf`. No floating point enters the algebra, so fixed-point
//! stabilization checks are exact equality.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// An exact weight: a boolean, a rational, or the point at infinity.
///
/// Which variants are legal depends on the semiring kind; see
/// [`Semiring::check_weight`]. `Rat` may hold negative rationals so that the
/// law validator can exercise deliberately broken algebras, but the four
/// shipped kinds only admit non-negative values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weight {
    Bool(bool),
    Rat(BigRational),
    Inf,
}

impl Weight {
    pub fn rat(num: i64, den: i64) -> Weight {
        Weight::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Weight {
        Weight::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Weight::Rat(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Weight::Inf)
    }

    /// Parses the shared literal syntax: `"3/4"`, `"2"`, `"0.25"`, `"1e-12"`,
    /// `"inf"`, `"true"`, `"false"`.
    pub fn parse(s: &str) -> Result<Weight> {
        match s.trim() {
            "inf" | "∞" => Ok(Weight::Inf),
            "true" => Ok(Weight::Bool(true)),
            "false" => Ok(Weight::Bool(false)),
            t => parse_rational(t)
                .map(Weight::Rat)
                .ok_or_else(|| Error::WeightSyntax(s.to_string())),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Bool(b) => write!(f, "{b}"),
            Weight::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Weight::Inf => write!(f, "inf"),
        }
    }
}

/// Parses an exact rational from integer, fraction, decimal or scientific
/// notation. Returns `None` on malformed input.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    // decimal with optional exponent: [+-]?digits[.digits]?[eE[+-]?digits]?
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, i64::from_str(e).ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "+" || digits == "-" {
        return None;
    }
    let numer = BigInt::from_str(&digits).ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let pow = ten.pow(scale.unsigned_abs() as u32);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    })
}

/// The four shipped weight algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiringKind {
    /// `({ff,tt}, ∨, ∧)` — plain labelled transition systems.
    Boolean,
    /// `([0,∞], +, ·)` — weighted/fully-probabilistic systems.
    Arith,
    /// `(ℕ ∪ {∞}, +, ·)` — resource counting.
    NatInf,
    /// `([0,∞], min, +)` with the positive order reversed numerically.
    Tropical,
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SemiringKind::Boolean => "boolean",
            SemiringKind::Arith => "arith",
            SemiringKind::NatInf => "nat_inf",
            SemiringKind::Tropical => "tropical",
        };
        write!(f, "{name}")
    }
}

impl FromStr for SemiringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boolean" => Ok(SemiringKind::Boolean),
            "arith" => Ok(SemiringKind::Arith),
            "nat_inf" => Ok(SemiringKind::NatInf),
            "tropical" => Ok(SemiringKind::Tropical),
            other => Err(Error::document(
                "semiring",
                format!("unknown kind {other:?}"),
            )),
        }
    }
}

/// Operation table of a weight algebra, as seen by the law validator.
///
/// The shipped [`Semiring`] implements this; tests may implement it for
/// deliberately broken algebras to exercise failure reporting.
pub trait SemiringOps {
    fn zero(&self) -> Weight;
    fn one(&self) -> Weight;
    fn add(&self, a: &Weight, b: &Weight) -> Weight;
    fn mul(&self, a: &Weight, b: &Weight) -> Weight;
    /// The positive order (zero is bottom).
    fn leq(&self, a: &Weight, b: &Weight) -> bool;
    /// Binary join, the `leq`-least upper bound.
    fn join(&self, a: &Weight, b: &Weight) -> Weight;
}

/// One of the four shipped semirings. Construction is [`Semiring::new`]; all
/// operations are pure and the value is freely copyable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Semiring {
    kind: SemiringKind,
}

fn expect_bool(w: &Weight, op: &str) -> bool {
    match w {
        Weight::Bool(b) => *b,
        other => panic!("{op}: expected boolean weight, got {other}"),
    }
}

impl Semiring {
    pub fn new(kind: SemiringKind) -> Semiring {
        Semiring { kind }
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    /// Checks the kind-specific carrier constraints of a weight.
    pub fn check_weight(&self, w: &Weight) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidWeight {
                value: w.to_string(),
                kind: self.kind.to_string(),
                reason: reason.to_string(),
            })
        };
        match (self.kind, w) {
            (SemiringKind::Boolean, Weight::Bool(_)) => Ok(()),
            (SemiringKind::Boolean, _) => fail("expected true or false"),
            (_, Weight::Bool(_)) => fail("booleans only belong to the boolean semiring"),
            (_, Weight::Inf) => Ok(()),
            (SemiringKind::NatInf, Weight::Rat(r)) => {
                if r.is_negative() {
                    fail("must be non-negative")
                } else if !r.denom().is_one() {
                    fail("must be an integer")
                } else {
                    Ok(())
                }
            }
            (_, Weight::Rat(r)) => {
                if r.is_negative() {
                    fail("must be non-negative")
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_zero(&self, w: &Weight) -> bool {
        *w == self.zero()
    }

    pub fn is_one(&self, w: &Weight) -> bool {
        *w == self.one()
    }

    /// Kleene star `a* = 1 ∨ a ∨ a·a ∨ …`, the supremum of the geometric
    /// chain. For `arith` this is `1/(1-a)` below one and `inf` from one on.
    pub fn star(&self, a: &Weight) -> Weight {
        match self.kind {
            SemiringKind::Boolean => Weight::Bool(true),
            SemiringKind::Tropical => self.one(),
            SemiringKind::NatInf => {
                if self.is_zero(a) {
                    self.one()
                } else {
                    Weight::Inf
                }
            }
            SemiringKind::Arith => match a {
                Weight::Inf => Weight::Inf,
                Weight::Rat(r) => {
                    if r < &BigRational::one() {
                        Weight::Rat(BigRational::one() / (BigRational::one() - r))
                    } else {
                        Weight::Inf
                    }
                }
                Weight::Bool(_) => panic!("star: boolean weight in arith"),
            },
        }
    }
}

impl SemiringOps for Semiring {
    fn zero(&self) -> Weight {
        match self.kind {
            SemiringKind::Boolean => Weight::Bool(false),
            SemiringKind::Tropical => Weight::Inf,
            _ => Weight::Rat(BigRational::zero()),
        }
    }

    fn one(&self) -> Weight {
        match self.kind {
            SemiringKind::Boolean => Weight::Bool(true),
            SemiringKind::Tropical => Weight::Rat(BigRational::zero()),
            _ => Weight::Rat(BigRational::one()),
        }
    }

    fn add(&self, a: &Weight, b: &Weight) -> Weight {
        match self.kind {
            SemiringKind::Boolean => Weight::Bool(expect_bool(a, "add") | expect_bool(b, "add")),
            SemiringKind::Arith | SemiringKind::NatInf => match (a, b) {
                (Weight::Inf, _) | (_, Weight::Inf) => Weight::Inf,
                (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x + y),
                _ => panic!("add: boolean weight in {}", self.kind),
            },
            // tropical addition is numeric min; inf is the neutral element
            SemiringKind::Tropical => match (a, b) {
                (Weight::Inf, w) | (w, Weight::Inf) => w.clone(),
                (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x.min(y).clone()),
                _ => panic!("add: boolean weight in tropical"),
            },
        }
    }

    fn mul(&self, a: &Weight, b: &Weight) -> Weight {
        match self.kind {
            SemiringKind::Boolean => Weight::Bool(expect_bool(a, "mul") & expect_bool(b, "mul")),
            // 0 · inf = 0, forced by chain continuity
            SemiringKind::Arith | SemiringKind::NatInf => match (a, b) {
                (Weight::Inf, w) | (w, Weight::Inf) => {
                    if self.is_zero(w) {
                        self.zero()
                    } else {
                        Weight::Inf
                    }
                }
                (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x * y),
                _ => panic!("mul: boolean weight in {}", self.kind),
            },
            // tropical multiplication is numeric addition; inf absorbs
            SemiringKind::Tropical => match (a, b) {
                (Weight::Inf, _) | (_, Weight::Inf) => Weight::Inf,
                (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x + y),
                _ => panic!("mul: boolean weight in tropical"),
            },
        }
    }

    fn leq(&self, a: &Weight, b: &Weight) -> bool {
        match self.kind {
            SemiringKind::Boolean => !expect_bool(a, "leq") | expect_bool(b, "leq"),
            SemiringKind::Arith | SemiringKind::NatInf => match (a, b) {
                (_, Weight::Inf) => true,
                (Weight::Inf, _) => false,
                (Weight::Rat(x), Weight::Rat(y)) => x <= y,
                _ => panic!("leq: boolean weight in {}", self.kind),
            },
            // the positive order of the tropical semiring is the reversed
            // numeric order: inf (= zero) is bottom
            SemiringKind::Tropical => match (a, b) {
                (Weight::Inf, _) => true,
                (_, Weight::Inf) => false,
                (Weight::Rat(x), Weight::Rat(y)) => y <= x,
                _ => panic!("leq: boolean weight in tropical"),
            },
        }
    }

    fn join(&self, a: &Weight, b: &Weight) -> Weight {
        match self.kind {
            SemiringKind::Boolean => Weight::Bool(expect_bool(a, "join") | expect_bool(b, "join")),
            SemiringKind::Arith | SemiringKind::NatInf => match (a, b) {
                (Weight::Inf, _) | (_, Weight::Inf) => Weight::Inf,
                (Weight::Rat(x), Weight::Rat(y)) => Weight::Rat(x.max(y).clone()),
                _ => panic!("join: boolean weight in {}", self.kind),
            },
            SemiringKind::Tropical => self.add(a, b),
        }
    }
}

/// Names of the laws checked by the validators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    AddAssociative,
    MulAssociative,
    AddCommutative,
    AddUnit,
    MulUnit,
    MulAbsorbsZero,
    Distributive,
    ZeroSumFree,
    ZeroIsBottom,
    AddMonotone,
    MulMonotone,
    JoinIsLub,
    ChainContinuity,
    ConcatUnit,
    ConcatAssociative,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Law::AddAssociative => "add_associative",
            Law::MulAssociative => "mul_associative",
            Law::AddCommutative => "add_commutative",
            Law::AddUnit => "add_unit",
            Law::MulUnit => "mul_unit",
            Law::MulAbsorbsZero => "mul_absorbs_zero",
            Law::Distributive => "distributive",
            Law::ZeroSumFree => "zerosumfree",
            Law::ZeroIsBottom => "zero_is_bottom",
            Law::AddMonotone => "add_monotone",
            Law::MulMonotone => "mul_monotone",
            Law::JoinIsLub => "join_is_lub",
            Law::ChainContinuity => "chain_continuity",
            Law::ConcatUnit => "concat_unit",
            Law::ConcatAssociative => "concat_associative",
        };
        write!(f, "{name}")
    }
}

/// Outcome of a single law check, with a witness when it failed.
#[derive(Debug, Clone, Serialize)]
pub struct LawCheck {
    pub law: Law,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Pass/fail record for every law checked on a sample set. Failures are data,
/// not errors.
#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    pub checks: Vec<LawCheck>,
}

impl LawReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub(crate) fn push(&mut self, law: Law, witness: Option<String>) {
        self.checks.push(LawCheck {
            law,
            passed: witness.is_none(),
            witness,
        });
    }
}

/// Numeric distance between two weights of the same kind: `None` stands for
/// an infinite delta (`inf` against a finite value). Booleans are 0 or 1
/// apart, so any threshold below one forces exact agreement.
pub fn numeric_delta(a: &Weight, b: &Weight) -> Option<BigRational> {
    match (a, b) {
        (Weight::Inf, Weight::Inf) => Some(BigRational::zero()),
        (Weight::Inf, _) | (_, Weight::Inf) => None,
        (Weight::Bool(x), Weight::Bool(y)) => Some(if x == y {
            BigRational::zero()
        } else {
            BigRational::one()
        }),
        (Weight::Rat(x), Weight::Rat(y)) => Some((x - y).abs()),
        _ => None,
    }
}

/// Default law-check samples for each kind: small, closed enough under the
/// operations to make the checks meaningful.
pub fn default_samples(kind: SemiringKind) -> Vec<Weight> {
    match kind {
        SemiringKind::Boolean => vec![Weight::Bool(false), Weight::Bool(true)],
        SemiringKind::Arith => vec![
            Weight::int(0),
            Weight::rat(1, 2),
            Weight::int(1),
            Weight::int(2),
            Weight::Inf,
        ],
        SemiringKind::NatInf => vec![
            Weight::int(0),
            Weight::int(1),
            Weight::int(2),
            Weight::int(3),
            Weight::Inf,
        ],
        SemiringKind::Tropical => vec![
            Weight::Inf,
            Weight::int(0),
            Weight::rat(1, 2),
            Weight::int(1),
            Weight::int(3),
        ],
    }
}

/// Checks the semiring axioms on the given samples and reports each law with
/// a witness on failure.
pub fn validate_semiring<S: SemiringOps>(spec: &S, samples: &[Weight]) -> LawReport {
    assert!(!samples.is_empty(), "validate_semiring: empty sample set");
    let mut report = LawReport { checks: Vec::new() };
    let zero = spec.zero();
    let one = spec.one();

    let mut assoc_add = None;
    let mut assoc_mul = None;
    let mut comm = None;
    let mut distr = None;
    for a in samples {
        for b in samples {
            if comm.is_none() && spec.add(a, b) != spec.add(b, a) {
                comm = Some(format!("{a} + {b} != {b} + {a}"));
            }
            for c in samples {
                if assoc_add.is_none() {
                    let l = spec.add(&spec.add(a, b), c);
                    let r = spec.add(a, &spec.add(b, c));
                    if l != r {
                        assoc_add = Some(format!("({a} + {b}) + {c} = {l} != {r}"));
                    }
                }
                if assoc_mul.is_none() {
                    let l = spec.mul(&spec.mul(a, b), c);
                    let r = spec.mul(a, &spec.mul(b, c));
                    if l != r {
                        assoc_mul = Some(format!("({a} * {b}) * {c} = {l} != {r}"));
                    }
                }
                if distr.is_none() {
                    let l = spec.mul(a, &spec.add(b, c));
                    let r = spec.add(&spec.mul(a, b), &spec.mul(a, c));
                    let l2 = spec.mul(&spec.add(b, c), a);
                    let r2 = spec.add(&spec.mul(b, a), &spec.mul(c, a));
                    if l != r {
                        distr = Some(format!("{a} * ({b} + {c}) = {l} != {r}"));
                    } else if l2 != r2 {
                        distr = Some(format!("({b} + {c}) * {a} = {l2} != {r2}"));
                    }
                }
            }
        }
    }
    report.push(Law::AddAssociative, assoc_add);
    report.push(Law::MulAssociative, assoc_mul);
    report.push(Law::AddCommutative, comm);
    report.push(Law::Distributive, distr);

    let mut unit_add = None;
    let mut unit_mul = None;
    let mut absorb = None;
    for a in samples {
        if unit_add.is_none() && spec.add(a, &zero) != *a {
            unit_add = Some(format!("{a} + 0 != {a}"));
        }
        if unit_mul.is_none() && (spec.mul(a, &one) != *a || spec.mul(&one, a) != *a) {
            unit_mul = Some(format!("unit law fails at {a}"));
        }
        if absorb.is_none() && (spec.mul(a, &zero) != zero || spec.mul(&zero, a) != zero) {
            absorb = Some(format!("{a} * 0 != 0"));
        }
    }
    report.push(Law::AddUnit, unit_add);
    report.push(Law::MulUnit, unit_mul);
    report.push(Law::MulAbsorbsZero, absorb);

    let mut zsf = None;
    for a in samples {
        for b in samples {
            if spec.add(a, b) == zero && (*a != zero || *b != zero) {
                zsf = Some(format!("{a} + {b} = 0 with ({a}, {b}) != (0, 0)"));
                break;
            }
        }
    }
    report.push(Law::ZeroSumFree, zsf);

    let bottom = samples
        .iter()
        .find(|a| !spec.leq(&zero, a))
        .map(|a| format!("0 is not below {a}"));
    report.push(Law::ZeroIsBottom, bottom);

    let mut mono_add = None;
    let mut mono_mul = None;
    for a in samples {
        for b in samples {
            if !spec.leq(a, b) {
                continue;
            }
            for c in samples {
                if mono_add.is_none()
                    && (!spec.leq(&spec.add(a, c), &spec.add(b, c))
                        || !spec.leq(&spec.add(c, a), &spec.add(c, b)))
                {
                    mono_add = Some(format!("{a} <= {b} but addition by {c} is not monotone"));
                }
                if mono_mul.is_none()
                    && (!spec.leq(&spec.mul(a, c), &spec.mul(b, c))
                        || !spec.leq(&spec.mul(c, a), &spec.mul(c, b)))
                {
                    mono_mul = Some(format!(
                        "{a} <= {b} but multiplication by {c} is not monotone"
                    ));
                }
            }
        }
    }
    report.push(Law::AddMonotone, mono_add);
    report.push(Law::MulMonotone, mono_mul);

    let mut lub = None;
    'lub: for a in samples {
        for b in samples {
            let j = spec.join(a, b);
            if !spec.leq(a, &j) || !spec.leq(b, &j) {
                lub = Some(format!("join({a}, {b}) = {j} is not an upper bound"));
                break 'lub;
            }
            for u in samples {
                if spec.leq(a, u) && spec.leq(b, u) && !spec.leq(&j, u) {
                    lub = Some(format!(
                        "join({a}, {b}) = {j} is not below the upper bound {u}"
                    ));
                    break 'lub;
                }
            }
        }
    }
    report.push(Law::JoinIsLub, lub);

    // Continuity on the finitely generated ascending chains obtained as
    // prefix joins of the samples; the full axiom is not runtime-checkable.
    let mut chain = Vec::with_capacity(samples.len());
    let mut acc = samples[0].clone();
    chain.push(acc.clone());
    for s in &samples[1..] {
        acc = spec.join(&acc, s);
        chain.push(acc.clone());
    }
    let sup = chain.last().unwrap().clone();
    let mut cont = None;
    for c in samples {
        let add_sup = spec.add(c, &sup);
        let mul_sup = spec.mul(c, &sup);
        let add_chain_sup = chain
            .iter()
            .map(|x| spec.add(c, x))
            .reduce(|l, r| spec.join(&l, &r))
            .unwrap();
        let mul_chain_sup = chain
            .iter()
            .map(|x| spec.mul(c, x))
            .reduce(|l, r| spec.join(&l, &r))
            .unwrap();
        if add_sup != add_chain_sup {
            cont = Some(format!("{c} + sup(chain) != sup({c} + chain)"));
            break;
        }
        if mul_sup != mul_chain_sup {
            cont = Some(format!("{c} * sup(chain) != sup({c} * chain)"));
            break;
        }
    }
    report.push(Law::ChainContinuity, cont);

    report
}
