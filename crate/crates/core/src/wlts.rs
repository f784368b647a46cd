//! Systems as Kleisli arrows: finite-support weight matrices
//! `X -> W^(A_τ × Y)` with composition, pointwise order and joins, the unit,
//! and the embedding of plain functions.
//!
//! The way consecutive labels concatenate is data: a [`LabelAlgebra`] carries
//! the full `A_τ × A_τ` table, with `None` meaning the pair annihilates (the
//! zero morphism clause). The shipped τ-absorption table recovers the usual
//! rules — τ·a = a·τ = a, observable pairs annihilate — and a groupoidal
//! table for reversible moves (a·a⁻¹ = τ) is constructible but fails the
//! associativity check, so systems cannot be built over it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::Error;
use crate::semiring::{Law, LawReport, Semiring, SemiringOps, Weight};
use crate::Result;

/// A label of `A_τ`: index 0 is τ, observables follow in alphabet order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(u32);

impl Label {
    pub const TAU: Label = Label(0);

    pub fn is_tau(&self) -> bool {
        self.0 == 0
    }

    /// Dense index into the owning algebra's label list (0 = τ).
    pub fn index(&self) -> usize {
        self.0 as usize
    }
}

/// Name of the reserved unobservable label.
pub const TAU_NAME: &str = "tau";

/// A finite alphabet together with the concatenation table of its monad
/// multiplication. `concat(first, second)` follows temporal order; `None`
/// means the pair annihilates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAlgebra {
    names: Vec<String>,
    table: Vec<Option<Label>>,
    valid: bool,
}

impl LabelAlgebra {
    fn build(names: Vec<String>, fill: impl Fn(Label, Label) -> Option<Label>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if n == TAU_NAME {
                return Err(Error::ReservedLabel);
            }
            if !seen.insert(n.clone()) {
                return Err(Error::DuplicateLabel(n.clone()));
            }
        }
        let n = names.len() + 1;
        let mut table = vec![None; n * n];
        for a in 0..n as u32 {
            for b in 0..n as u32 {
                table[(a as usize) * n + b as usize] = fill(Label(a), Label(b));
            }
        }
        let mut alg = LabelAlgebra {
            names,
            table,
            valid: false,
        };
        alg.valid = alg.validate().all_passed();
        Ok(alg)
    }

    /// The τ-absorption algebra: `a·τ = τ·a = a`, observable pairs annihilate.
    pub fn tau_absorption<S: AsRef<str>>(alphabet: &[S]) -> Result<Self> {
        let names: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        Self::build(names, |a, b| match (a.is_tau(), b.is_tau()) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ => None,
        })
    }

    /// Groupoidal table for reversible moves: τ-absorption plus
    /// `a·a⁻¹ = a⁻¹·a = τ` for each inverse pair. `plain` labels have no
    /// inverse. The resulting table fails associativity (witness
    /// `(a·a⁻¹)·c ≠ a·(a⁻¹·c)`) and is therefore flagged invalid; it exists
    /// so the failure is checkable as data.
    pub fn groupoidal<S: AsRef<str>>(pairs: &[(S, S)], plain: &[S]) -> Result<Self> {
        let mut names = Vec::new();
        for (a, b) in pairs {
            names.push(a.as_ref().to_string());
            names.push(b.as_ref().to_string());
        }
        names.extend(plain.iter().map(|s| s.as_ref().to_string()));
        // label ids: τ = 0, then names in order; pair (2k+1, 2k+2)
        let inverse = |l: Label| -> Option<Label> {
            let i = l.0 as usize;
            if i == 0 || i > 2 * pairs.len() {
                return None;
            }
            Some(if i % 2 == 1 { Label(l.0 + 1) } else { Label(l.0 - 1) })
        };
        Self::build(names, |a, b| match (a.is_tau(), b.is_tau()) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ if inverse(a) == Some(b) => Some(Label::TAU),
            _ => None,
        })
    }

    /// Number of labels including τ.
    pub fn label_count(&self) -> usize {
        self.names.len() + 1
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.label_count() as u32).map(Label)
    }

    pub fn observables(&self) -> impl Iterator<Item = Label> + '_ {
        (1..self.label_count() as u32).map(Label)
    }

    pub fn label(&self, name: &str) -> Option<Label> {
        if name == TAU_NAME {
            return Some(Label::TAU);
        }
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Label(i as u32 + 1))
    }

    pub fn name(&self, l: Label) -> &str {
        if l.is_tau() {
            TAU_NAME
        } else {
            &self.names[l.0 as usize - 1]
        }
    }

    pub fn observable_names(&self) -> &[String] {
        &self.names
    }

    pub fn concat(&self, first: Label, second: Label) -> Option<Label> {
        let n = self.label_count();
        self.table[(first.0 as usize) * n + second.0 as usize]
    }

    /// Whether the exhaustive unit/associativity check passed at build time.
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// Exhaustively checks the unit laws and associativity (with annihilation
    /// absorbing) over all label pairs and triples.
    pub fn validate(&self) -> LawReport {
        let mut report = LawReport { checks: Vec::new() };
        let mut unit = None;
        for a in self.labels() {
            if self.concat(Label::TAU, a) != Some(a) {
                unit = Some(format!("tau·{} != {}", self.name(a), self.name(a)));
                break;
            }
            if self.concat(a, Label::TAU) != Some(a) {
                unit = Some(format!("{}·tau != {}", self.name(a), self.name(a)));
                break;
            }
        }
        report.push(Law::ConcatUnit, unit);

        let ext = |l: Option<Label>, r: Label| l.and_then(|l| self.concat(l, r));
        let ext_r = |l: Label, r: Option<Label>| r.and_then(|r| self.concat(l, r));
        let show = |l: Option<Label>| match l {
            Some(l) => self.name(l).to_string(),
            None => "annihilated".to_string(),
        };
        let mut assoc = None;
        'outer: for a in self.labels() {
            for b in self.labels() {
                for c in self.labels() {
                    let left = ext(self.concat(a, b), c);
                    let right = ext_r(a, self.concat(b, c));
                    if left != right {
                        assoc = Some(format!(
                            "(({}·{})·{}) = {} but ({}·({}·{})) = {}",
                            self.name(a),
                            self.name(b),
                            self.name(c),
                            show(left),
                            self.name(a),
                            self.name(b),
                            self.name(c),
                            show(right),
                        ));
                        break 'outer;
                    }
                }
            }
        }
        report.push(Law::ConcatAssociative, assoc);
        report
    }
}

/// An ordered finite list of named states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    names: Vec<String>,
}

impl StateSpace {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<StateSpace>> {
        let mut seen = std::collections::BTreeSet::new();
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::DuplicateState(n.clone()));
            }
        }
        Ok(Arc::new(StateSpace { names }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }
}

/// A sparse cell key: (source state, label, target state).
pub type Cell = (usize, Label, usize);

/// A finite-support weight matrix `X -> W^(A_τ × Y)`. Absent cells are the
/// semiring zero; zero weights are never stored, so equality of the sparse
/// tables is equality of the arrows.
#[derive(Debug, Clone)]
pub struct KleisliMap {
    semiring: Semiring,
    algebra: Arc<LabelAlgebra>,
    source: Arc<StateSpace>,
    target: Arc<StateSpace>,
    weights: BTreeMap<Cell, Weight>,
}

impl PartialEq for KleisliMap {
    fn eq(&self, other: &Self) -> bool {
        self.semiring == other.semiring
            && self.algebra == other.algebra
            && self.source == other.source
            && self.target == other.target
            && self.weights == other.weights
    }
}

impl Eq for KleisliMap {}

impl KleisliMap {
    pub fn zero(
        semiring: Semiring,
        algebra: Arc<LabelAlgebra>,
        source: Arc<StateSpace>,
        target: Arc<StateSpace>,
    ) -> KleisliMap {
        KleisliMap {
            semiring,
            algebra,
            source,
            target,
            weights: BTreeMap::new(),
        }
    }

    /// The Kleisli unit: weight one at `(τ, x)` for every `x`.
    pub fn unit(
        semiring: Semiring,
        algebra: Arc<LabelAlgebra>,
        states: Arc<StateSpace>,
    ) -> KleisliMap {
        let mut m = KleisliMap::zero(semiring, algebra, states.clone(), states);
        let one = m.semiring.one();
        for x in m.source.indices() {
            m.weights.insert((x, Label::TAU, x), one.clone());
        }
        m
    }

    /// Embeds a plain function `p: X -> Y` as `x ↦ one·(τ, p(x))`.
    pub fn embed(
        semiring: Semiring,
        algebra: Arc<LabelAlgebra>,
        source: Arc<StateSpace>,
        target: Arc<StateSpace>,
        p: &[usize],
    ) -> Result<KleisliMap> {
        if p.len() != source.len() {
            return Err(Error::ShapeMismatch(format!(
                "embed: function table has {} entries for {} states",
                p.len(),
                source.len()
            )));
        }
        let mut m = KleisliMap::zero(semiring, algebra, source, target);
        let one = m.semiring.one();
        for (x, &y) in p.iter().enumerate() {
            if y >= m.target.len() {
                return Err(Error::ShapeMismatch(format!(
                    "embed: image {y} outside the target space"
                )));
            }
            m.weights.insert((x, Label::TAU, y), one.clone());
        }
        Ok(m)
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
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

    pub fn is_endo(&self) -> bool {
        self.source == self.target
    }

    pub fn get(&self, x: usize, a: Label, y: usize) -> Weight {
        self.weights
            .get(&(x, a, y))
            .cloned()
            .unwrap_or_else(|| self.semiring.zero())
    }

    /// Sets a cell, pruning zeros so the table stays canonical.
    pub fn set(&mut self, x: usize, a: Label, y: usize, w: Weight) -> Result<()> {
        if x >= self.source.len() || y >= self.target.len() {
            return Err(Error::ShapeMismatch(format!(
                "cell ({x}, {}, {y}) outside {}x{}",
                self.algebra.name(a),
                self.source.len(),
                self.target.len()
            )));
        }
        if (a.0 as usize) >= self.algebra.label_count() {
            return Err(Error::ShapeMismatch("label outside the alphabet".into()));
        }
        self.semiring.check_weight(&w)?;
        if self.semiring.is_zero(&w) {
            self.weights.remove(&(x, a, y));
        } else {
            self.weights.insert((x, a, y), w);
        }
        Ok(())
    }

    /// Adds (semiring addition) a weight into a cell.
    pub fn accumulate(&mut self, x: usize, a: Label, y: usize, w: Weight) {
        let cur = self.get(x, a, y);
        let sum = self.semiring.add(&cur, &w);
        if self.semiring.is_zero(&sum) {
            self.weights.remove(&(x, a, y));
        } else {
            self.weights.insert((x, a, y), sum);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (Cell, &Weight)> {
        self.weights.iter().map(|(k, v)| (*k, v))
    }

    pub fn support(&self) -> usize {
        self.weights.len()
    }

    pub fn row(&self, x: usize) -> impl Iterator<Item = (Label, usize, &Weight)> {
        self.weights
            .range((x, Label::TAU, 0)..(x + 1, Label::TAU, 0))
            .map(|(&(_, a, y), w)| (a, y, w))
    }

    fn check_parallel(&self, other: &KleisliMap, op: &str) -> Result<()> {
        if self.semiring != other.semiring
            || self.algebra != other.algebra
            || self.source != other.source
            || self.target != other.target
        {
            return Err(Error::ShapeMismatch(format!(
                "{op}: arrows disagree on semiring, alphabet or state spaces"
            )));
        }
        Ok(())
    }

    /// Entrywise join.
    pub fn join(&self, other: &KleisliMap) -> Result<KleisliMap> {
        self.check_parallel(other, "join")?;
        let mut out = self.clone();
        for (k, w) in &other.weights {
            let cur = out
                .weights
                .get(k)
                .cloned()
                .unwrap_or_else(|| out.semiring.zero());
            let j = out.semiring.join(&cur, w);
            if out.semiring.is_zero(&j) {
                out.weights.remove(k);
            } else {
                out.weights.insert(*k, j);
            }
        }
        Ok(out)
    }

    /// Entrywise positive order.
    pub fn leq(&self, other: &KleisliMap) -> Result<bool> {
        self.check_parallel(other, "leq")?;
        let zero = self.semiring.zero();
        for (k, w) in &self.weights {
            let rhs = other.weights.get(k).unwrap_or(&zero);
            if !self.semiring.leq(w, rhs) {
                return Ok(false);
            }
        }
        // cells present only on the right: zero <= w always, since zero is
        // the bottom of the positive order
        Ok(true)
    }
}

impl fmt::Display for KleisliMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((x, a, y), w) in &self.weights {
            writeln!(
                f,
                "{} --{},{}--> {}",
                self.source.name(*x),
                self.algebra.name(*a),
                w,
                self.target.name(*y)
            )?;
        }
        Ok(())
    }
}

/// Kleisli composition `g ∙ f` (`f` first, then `g`): for every pair of steps
/// `x -a-> y` in `f` and `y -b-> z` in `g`, the product weight lands on the
/// concatenated label `a·b`, and annihilated pairs contribute nothing. For
/// the τ-absorption algebra this is exactly
/// `(g∙f)(x)(a,z) = Σ_y g(y)(a,z)·f(x)(τ,y) + Σ_y g(y)(τ,z)·f(x)(a,y)`.
pub fn compose(g: &KleisliMap, f: &KleisliMap) -> Result<KleisliMap> {
    if f.semiring != g.semiring || f.algebra != g.algebra {
        return Err(Error::ShapeMismatch(
            "compose: arrows over different semirings or alphabets".into(),
        ));
    }
    if f.target != g.source {
        return Err(Error::ShapeMismatch(
            "compose: inner state spaces differ".into(),
        ));
    }
    let mut out = KleisliMap::zero(
        f.semiring,
        f.algebra.clone(),
        f.source.clone(),
        g.target.clone(),
    );
    for ((x, a, y), wf) in &f.weights {
        for (b, z, wg) in g.row(*y) {
            if let Some(c) = f.algebra.concat(*a, b) {
                out.accumulate(*x, c, z, f.semiring.mul(wf, wg));
            }
        }
    }
    Ok(out)
}

/// An endo-arrow `X -> W^(A_τ × X)`, optionally with a designated initial
/// state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    map: KleisliMap,
    initial: Option<usize>,
}

impl System {
    pub fn new(map: KleisliMap) -> Result<System> {
        if !map.is_endo() {
            return Err(Error::ShapeMismatch(
                "a system needs identical source and target state lists".into(),
            ));
        }
        if !map.algebra.is_valid() {
            return Err(Error::ShapeMismatch(
                "refusing to build a system over a label algebra that fails its laws".into(),
            ));
        }
        Ok(System { map, initial: None })
    }

    pub fn with_initial(mut self, initial: usize) -> Result<System> {
        if initial >= self.map.source.len() {
            return Err(Error::ShapeMismatch("initial state out of range".into()));
        }
        self.initial = Some(initial);
        Ok(self)
    }

    pub fn map(&self) -> &KleisliMap {
        &self.map
    }

    pub fn into_map(self) -> KleisliMap {
        self.map
    }

    pub fn states(&self) -> &Arc<StateSpace> {
        &self.map.source
    }

    pub fn semiring(&self) -> Semiring {
        self.map.semiring
    }

    pub fn algebra(&self) -> &Arc<LabelAlgebra> {
        &self.map.algebra
    }

    pub fn initial(&self) -> Option<usize> {
        self.initial
    }

    /// Disjoint union of two systems over the same semiring and alphabet;
    /// states are renamed `1:x` and `2:y`. Returns the new system and the
    /// index offset of the second component.
    pub fn coproduct(a: &System, b: &System) -> Result<(System, usize)> {
        if a.map.semiring != b.map.semiring || a.map.algebra != b.map.algebra {
            return Err(Error::ShapeMismatch(
                "coproduct: systems over different semirings or alphabets".into(),
            ));
        }
        let mut names = Vec::with_capacity(a.states().len() + b.states().len());
        names.extend(a.states().names().iter().map(|n| format!("1:{n}")));
        names.extend(b.states().names().iter().map(|n| format!("2:{n}")));
        let states = StateSpace::new(&names)?;
        let offset = a.states().len();
        let mut m = KleisliMap::zero(
            a.map.semiring,
            a.map.algebra.clone(),
            states.clone(),
            states,
        );
        for ((x, l, y), w) in a.map.entries() {
            m.weights.insert((x, l, y), w.clone());
        }
        for ((x, l, y), w) in b.map.entries() {
            m.weights.insert((x + offset, l, y + offset), w.clone());
        }
        Ok((System { map: m, initial: None }, offset))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::SemiringKind;

    fn boolean() -> Semiring {
        Semiring::new(SemiringKind::Boolean)
    }

    fn arith() -> Semiring {
        Semiring::new(SemiringKind::Arith)
    }

    #[test]
    fn tau_absorption_table() {
        let alg = LabelAlgebra::tau_absorption(&["a", "b"]).unwrap();
        let a = alg.label("a").unwrap();
        let b = alg.label("b").unwrap();
        assert_eq!(alg.concat(a, Label::TAU), Some(a));
        assert_eq!(alg.concat(Label::TAU, a), Some(a));
        assert_eq!(alg.concat(Label::TAU, Label::TAU), Some(Label::TAU));
        assert_eq!(alg.concat(a, b), None);
        assert_eq!(alg.concat(a, a), None);
        assert!(alg.is_valid());
        // 27 triples checked exhaustively
        assert!(alg.validate().all_passed());
    }

    #[test]
    fn tau_only_algebra_is_valid() {
        let alg = LabelAlgebra::tau_absorption::<&str>(&[]).unwrap();
        assert!(alg.validate().all_passed());
    }

    #[test]
    fn groupoidal_fails_associativity_with_witness() {
        let alg = LabelAlgebra::groupoidal(&[("a", "a^-1")], &["c"]).unwrap();
        let a = alg.label("a").unwrap();
        let ainv = alg.label("a^-1").unwrap();
        assert_eq!(alg.concat(a, ainv), Some(Label::TAU));
        assert_eq!(alg.concat(ainv, a), Some(Label::TAU));
        assert!(!alg.is_valid());
        let report = alg.validate();
        let assoc = report
            .checks
            .iter()
            .find(|c| c.law == Law::ConcatAssociative)
            .unwrap();
        assert!(!assoc.passed);
        // (a·a⁻¹)·c = c but a·(a⁻¹·c) annihilates
        let w = assoc.witness.as_deref().unwrap();
        assert!(w.contains("annihilated"), "witness: {w}");
    }

    #[test]
    fn reserved_and_duplicate_labels_rejected() {
        assert!(matches!(
            LabelAlgebra::tau_absorption(&["a", "tau"]),
            Err(Error::ReservedLabel)
        ));
        assert!(matches!(
            LabelAlgebra::tau_absorption(&["a", "a"]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn boolean_composition_absorbs_tau() {
        let alg = Arc::new(LabelAlgebra::tau_absorption(&["a", "b"]).unwrap());
        let s = StateSpace::new(&["x", "y", "z"]).unwrap();
        let a = alg.label("a").unwrap();
        let b = alg.label("b").unwrap();
        let tt = Weight::Bool(true);

        // f: x -a-> y, g: y -tau-> z  =>  g∙f: x -a-> z
        let mut f = KleisliMap::zero(boolean(), alg.clone(), s.clone(), s.clone());
        f.set(0, a, 1, tt.clone()).unwrap();
        let mut g = KleisliMap::zero(boolean(), alg.clone(), s.clone(), s.clone());
        g.set(1, Label::TAU, 2, tt.clone()).unwrap();
        let gf = compose(&g, &f).unwrap();
        assert_eq!(gf.get(0, a, 2), tt);
        assert_eq!(gf.support(), 1);

        // f: x -a-> y, g: y -b-> z  =>  empty
        let mut g2 = KleisliMap::zero(boolean(), alg.clone(), s.clone(), s.clone());
        g2.set(1, b, 2, tt.clone()).unwrap();
        let g2f = compose(&g2, &f).unwrap();
        assert_eq!(g2f.support(), 0);
    }

    #[test]
    fn arith_composition_multiplies() {
        let alg = Arc::new(LabelAlgebra::tau_absorption(&["a"]).unwrap());
        let s = StateSpace::new(&["x", "y", "z"]).unwrap();
        let a = alg.label("a").unwrap();
        let mut f = KleisliMap::zero(arith(), alg.clone(), s.clone(), s.clone());
        f.set(0, Label::TAU, 1, Weight::rat(1, 2)).unwrap();
        let mut g = KleisliMap::zero(arith(), alg.clone(), s.clone(), s.clone());
        g.set(1, a, 2, Weight::rat(2, 5)).unwrap();
        let gf = compose(&g, &f).unwrap();
        assert_eq!(gf.get(0, a, 2), Weight::rat(1, 5));
    }

    #[test]
    fn unit_laws() {
        let alg = Arc::new(LabelAlgebra::tau_absorption(&["a"]).unwrap());
        let s = StateSpace::new(&["x", "y"]).unwrap();
        let a = alg.label("a").unwrap();
        let mut f = KleisliMap::zero(arith(), alg.clone(), s.clone(), s.clone());
        f.set(0, a, 1, Weight::rat(2, 3)).unwrap();
        f.set(1, Label::TAU, 0, Weight::rat(1, 3)).unwrap();
        let unit = KleisliMap::unit(arith(), alg.clone(), s.clone());
        assert_eq!(compose(&unit, &f).unwrap(), f);
        assert_eq!(compose(&f, &unit).unwrap(), f);
    }

    #[test]
    fn embed_functoriality() {
        let alg = Arc::new(LabelAlgebra::tau_absorption(&["a"]).unwrap());
        let s3 = StateSpace::new(&["x", "y", "z"]).unwrap();
        let s2 = StateSpace::new(&["u", "v"]).unwrap();
        let s1 = StateSpace::new(&["w"]).unwrap();
        let p = [0usize, 1, 0]; // s3 -> s2
        let q = [0usize, 0]; // s2 -> s1
        let ep = KleisliMap::embed(arith(), alg.clone(), s3.clone(), s2.clone(), &p).unwrap();
        let eq = KleisliMap::embed(arith(), alg.clone(), s2.clone(), s1.clone(), &q).unwrap();
        let qp: Vec<usize> = p.iter().map(|&i| q[i]).collect();
        let eqp = KleisliMap::embed(arith(), alg.clone(), s3.clone(), s1.clone(), &qp).unwrap();
        assert_eq!(compose(&eq, &ep).unwrap(), eqp);
        // embed(identity) = unit
        let id = KleisliMap::embed(arith(), alg.clone(), s3.clone(), s3.clone(), &[0, 1, 2])
            .unwrap();
        assert_eq!(id, KleisliMap::unit(arith(), alg, s3));
    }

    #[test]
    fn join_and_order() {
        let alg = Arc::new(LabelAlgebra::tau_absorption(&["a"]).unwrap());
        let s = StateSpace::new(&["x", "y"]).unwrap();
        let a = alg.label("a").unwrap();
        let mut f = KleisliMap::zero(arith(), alg.clone(), s.clone(), s.clone());
        f.set(0, a, 1, Weight::rat(1, 2)).unwrap();
        let mut g = KleisliMap::zero(arith(), alg.clone(), s.clone(), s.clone());
        g.set(0, a, 1, Weight::rat(3, 4)).unwrap();
        let j = f.join(&g).unwrap();
        assert_eq!(j.get(0, a, 1), Weight::rat(3, 4));
        assert!(f.leq(&j).unwrap());
        assert!(g.leq(&j).unwrap());
        assert!(!j.leq(&f).unwrap());
        // join with the zero map is the identity
        let zero = KleisliMap::zero(arith(), alg, s.clone(), s);
        assert_eq!(f.join(&zero).unwrap(), f);
    }

    #[test]
    fn system_rejects_invalid_algebra() {
        let alg = Arc::new(LabelAlgebra::groupoidal(&[("a", "a^-1")], &[]).unwrap());
        let s = StateSpace::new(&["x"]).unwrap();
        let m = KleisliMap::zero(boolean(), alg, s.clone(), s);
        assert!(System::new(m).is_err());
    }
}
