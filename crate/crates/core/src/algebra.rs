//! Noncommutative polynomials over the measurement operators of two black boxes.
//!
//! Generators are the projectors `E(x, a)` of each party (the last outcome of
//! every setting is eliminated through completeness) and optional auxiliary
//! unitaries `U` with their adjoints `U*`. Words are kept in a normal form
//! under the rewrite system
//!
//! * `E(x,a) E(x,b) -> δ_ab E(x,a)` (orthogonal projectors),
//! * symbols of different parties commute, so party A is always written first,
//! * `U U* -> 1` and `U* U -> 1`.
//!
//! Nothing else is rewritten: within a party the algebra is free, and powers of
//! `U` are kept as literal words.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients whose magnitude falls below this are dropped from polynomials.
pub const COEFFICIENT_EPSILON: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::A, Party::B];

    pub fn index(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 1,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => f.write_str("A"),
            Party::B => f.write_str("B"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Projector { setting: u8, outcome: u8 },
    Aux(u8),
    AuxAdjoint(u8),
}

/// A single generator of the operator algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub party: Party,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn projector(party: Party, setting: usize, outcome: usize) -> Self {
        Symbol {
            party,
            kind: SymbolKind::Projector {
                setting: setting as u8,
                outcome: outcome as u8,
            },
        }
    }

    pub fn aux(party: Party, index: usize) -> Self {
        Symbol {
            party,
            kind: SymbolKind::Aux(index as u8),
        }
    }

    pub fn aux_adjoint(party: Party, index: usize) -> Self {
        Symbol {
            party,
            kind: SymbolKind::AuxAdjoint(index as u8),
        }
    }

    pub fn is_hermitian(self) -> bool {
        matches!(self.kind, SymbolKind::Projector { .. })
    }

    pub fn adjoint(self) -> Self {
        let kind = match self.kind {
            SymbolKind::Aux(i) => SymbolKind::AuxAdjoint(i),
            SymbolKind::AuxAdjoint(i) => SymbolKind::Aux(i),
            k => k,
        };
        Symbol { kind, ..self }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.party {
            Party::A => ('E', 'P'),
            Party::B => ('F', 'Q'),
        };
        match self.kind {
            SymbolKind::Projector { setting, outcome } => {
                write!(f, "{}{}|{}", letter.0, setting, outcome)
            }
            SymbolKind::Aux(0) => write!(f, "{}", letter.1),
            SymbolKind::AuxAdjoint(0) => write!(f, "{}*", letter.1),
            SymbolKind::Aux(i) => write!(f, "{}{}", letter.1, i),
            SymbolKind::AuxAdjoint(i) => write!(f, "{}{}*", letter.1, i),
        }
    }
}

/// Relation between two adjacent symbols of the same party.
enum Adjacent {
    Keep,
    /// The right symbol is absorbed (idempotent projector).
    Absorb,
    /// The pair cancels to the identity.
    Cancel,
    /// The product vanishes.
    Zero,
}

fn adjacent(left: Symbol, right: Symbol) -> Adjacent {
    use SymbolKind::*;
    match (left.kind, right.kind) {
        (
            Projector {
                setting: x,
                outcome: a,
            },
            Projector {
                setting: y,
                outcome: b,
            },
        ) if x == y => {
            if a == b {
                Adjacent::Absorb
            } else {
                Adjacent::Zero
            }
        }
        (Aux(i), AuxAdjoint(j)) | (AuxAdjoint(i), Aux(j)) if i == j => Adjacent::Cancel,
        _ => Adjacent::Keep,
    }
}

/// Appends `symbol` to an already reduced single-party word. Returns `false`
/// when the word becomes zero.
fn push_reduced(word: &mut Vec<Symbol>, symbol: Symbol) -> bool {
    match word.last() {
        None => word.push(symbol),
        Some(&top) => match adjacent(top, symbol) {
            Adjacent::Keep => word.push(symbol),
            Adjacent::Absorb => {}
            Adjacent::Cancel => {
                word.pop();
            }
            Adjacent::Zero => return false,
        },
    }
    true
}

/// A word in normal form: all A symbols first, no reducible adjacent pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<Symbol>);

impl Monomial {
    pub fn identity() -> Self {
        Monomial(Vec::new())
    }

    /// Reduces an arbitrary sequence of kept generators. `None` means the word
    /// is zero.
    pub fn reduce<I: IntoIterator<Item = Symbol>>(symbols: I) -> Option<Monomial> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for s in symbols {
            let word = match s.party {
                Party::A => &mut a,
                Party::B => &mut b,
            };
            if !push_reduced(word, s) {
                return None;
            }
        }
        a.extend(b);
        Some(Monomial(a))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    fn split_index(&self) -> usize {
        self.0.partition_point(|s| s.party == Party::A)
    }

    /// The factor acting on one party.
    pub fn party_word(&self, party: Party) -> &[Symbol] {
        let k = self.split_index();
        match party {
            Party::A => &self.0[..k],
            Party::B => &self.0[k..],
        }
    }

    pub fn party_len(&self, party: Party) -> usize {
        self.party_word(party).len()
    }

    /// Builds `a · b` from two single-party words already in normal form.
    pub fn from_parts(a: &[Symbol], b: &[Symbol]) -> Option<Monomial> {
        Monomial::reduce(a.iter().chain(b.iter()).copied())
    }

    pub fn adjoint(&self) -> Monomial {
        let k = self.split_index();
        let mut word = Vec::with_capacity(self.0.len());
        word.extend(self.0[..k].iter().rev().map(|s| s.adjoint()));
        word.extend(self.0[k..].iter().rev().map(|s| s.adjoint()));
        Monomial(word)
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        Monomial::reduce(self.0.iter().chain(other.0.iter()).copied())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Real linear combination of monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn identity() -> Self {
        Polynomial::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::term(Monomial::identity(), c)
    }

    pub fn term(m: Monomial, c: f64) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(m, c);
        p
    }

    pub fn monomial(m: Monomial) -> Self {
        Polynomial::term(m, 1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v.abs() <= COEFFICIENT_EPSILON {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, v) in self.terms() {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Distributes the product and reduces every word.
    pub fn multiply(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, a) in self.terms() {
            for (n, b) in other.terms() {
                if let Some(w) = m.mul(n) {
                    out.add_term(w, a * b);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms() {
            out.add_term(m.adjoint(), c);
        }
        out
    }

    pub fn pow(&self, k: usize) -> Polynomial {
        (0..k).fold(Polynomial::identity(), |acc, _| acc.multiply(self))
    }

    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        (self - other).terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    /// Largest single-party word length appearing in any term.
    pub fn party_degree(&self, party: Party) -> usize {
        self.monomials().map(|m| m.party_len(party)).max().unwrap_or(0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            } else if c < 0.0 {
                f.write_str("-")?;
            }
            write!(f, "{}·{}", c.abs(), m)?;
        }
        Ok(())
    }
}

impl From<Monomial> for Polynomial {
    fn from(m: Monomial) -> Self {
        Polynomial::monomial(m)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.multiply(rhs)
    }
}

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: &Polynomial) -> Polynomial {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Mul<f64> for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Measurement layout of one party.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySpec {
    pub settings: usize,
    pub outcomes: usize,
    pub aux_unitaries: usize,
}

/// Two-party Bell scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    parties: [PartySpec; 2],
}

impl Scenario {
    pub fn new(a: PartySpec, b: PartySpec) -> Result<Self> {
        for (p, spec) in Party::BOTH.iter().zip([a, b]) {
            if spec.settings < 1 || spec.outcomes < 2 {
                return Err(Error::InvalidScenario(format!(
                    "party {p} needs at least one setting and two outcomes"
                )));
            }
            if spec.settings > u8::MAX as usize
                || spec.outcomes > u8::MAX as usize
                || spec.aux_unitaries > u8::MAX as usize
            {
                return Err(Error::InvalidScenario(format!("party {p} is too large")));
            }
        }
        Ok(Scenario { parties: [a, b] })
    }

    /// Two settings, two outcomes, no auxiliary unitaries.
    pub fn chsh() -> Self {
        let p = PartySpec {
            settings: 2,
            outcomes: 2,
            aux_unitaries: 0,
        };
        Scenario { parties: [p, p] }
    }

    /// Two settings, three outcomes, one auxiliary unitary per party.
    pub fn cglmp() -> Self {
        let p = PartySpec {
            settings: 2,
            outcomes: 3,
            aux_unitaries: 1,
        };
        Scenario { parties: [p, p] }
    }

    pub fn party(&self, party: Party) -> PartySpec {
        self.parties[party.index()]
    }

    pub fn is_chsh(&self) -> bool {
        *self == Scenario::chsh()
    }

    pub fn is_cglmp(&self) -> bool {
        *self == Scenario::cglmp()
    }

    /// Checks a symbol as it may appear in user input (the eliminated last
    /// outcome is accepted here).
    pub fn check_symbol(&self, s: Symbol) -> Result<()> {
        let spec = self.party(s.party);
        match s.kind {
            SymbolKind::Projector { setting, outcome } => {
                let (x, a) = (setting as usize, outcome as usize);
                if x >= spec.settings || a >= spec.outcomes {
                    return Err(Error::IndexOutOfRange {
                        party: s.party,
                        setting: x,
                        outcome: a,
                    });
                }
            }
            SymbolKind::Aux(i) | SymbolKind::AuxAdjoint(i) => {
                if i as usize >= spec.aux_unitaries {
                    return Err(Error::UnknownSymbol {
                        symbol: s.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    fn is_eliminated(&self, s: Symbol) -> bool {
        match s.kind {
            SymbolKind::Projector { outcome, .. } => {
                outcome as usize + 1 == self.party(s.party).outcomes
            }
            _ => false,
        }
    }

    /// Checks that every word of `p` uses only kept generators of this scenario.
    pub fn validate(&self, p: &Polynomial) -> Result<()> {
        for m in p.monomials() {
            for &s in m.symbols() {
                self.check_symbol(s)?;
                if self.is_eliminated(s) {
                    return Err(Error::UnknownSymbol {
                        symbol: s.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Kept generators of one party, in symbol order.
    pub fn alphabet(&self, party: Party) -> Vec<Symbol> {
        let spec = self.party(party);
        let mut out = Vec::new();
        for x in 0..spec.settings {
            for a in 0..spec.outcomes - 1 {
                out.push(Symbol::projector(party, x, a));
            }
        }
        for i in 0..spec.aux_unitaries {
            out.push(Symbol::aux(party, i));
            out.push(Symbol::aux_adjoint(party, i));
        }
        out
    }

    /// The generator as a polynomial; the last outcome becomes
    /// `1 - Σ_{a < d-1} E(x, a)`.
    pub fn symbol_polynomial(&self, s: Symbol) -> Result<Polynomial> {
        self.check_symbol(s)?;
        if let SymbolKind::Projector { setting, .. } = s.kind {
            if self.is_eliminated(s) {
                let spec = self.party(s.party);
                let mut p = Polynomial::identity();
                for a in 0..spec.outcomes - 1 {
                    p.add_term(
                        Monomial(vec![Symbol::projector(s.party, setting as usize, a)]),
                        -1.0,
                    );
                }
                return Ok(p);
            }
        }
        Ok(Polynomial::monomial(Monomial(vec![s])))
    }

    pub fn projector(&self, party: Party, setting: usize, outcome: usize) -> Result<Polynomial> {
        self.symbol_polynomial(Symbol::projector(party, setting, outcome))
    }

    pub fn aux(&self, party: Party, index: usize) -> Result<Polynomial> {
        self.symbol_polynomial(Symbol::aux(party, index))
    }

    pub fn aux_adjoint(&self, party: Party, index: usize) -> Result<Polynomial> {
        self.symbol_polynomial(Symbol::aux_adjoint(party, index))
    }

    /// Normal form of a raw word; may be a sum once eliminated outcomes are
    /// substituted.
    pub fn canonicalize(&self, word: &[Symbol]) -> Result<Polynomial> {
        let mut acc = Polynomial::identity();
        for &s in word {
            let p = self.symbol_polynomial(s)?;
            acc = acc.multiply(&p);
        }
        Ok(acc)
    }

    /// `2 E(x, 0) - 1`, the ±1-valued observable of a two-outcome setting.
    pub fn dichotomic(&self, party: Party, setting: usize) -> Result<Polynomial> {
        let spec = self.party(party);
        if spec.outcomes != 2 {
            return Err(Error::NotDichotomic {
                party,
                outcomes: spec.outcomes,
            });
        }
        let e = self.projector(party, setting, 0)?;
        Ok(&e.scale(2.0) - &Polynomial::identity())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ea(x: usize, a: usize) -> Symbol {
        Symbol::projector(Party::A, x, a)
    }
    fn fb(y: usize, b: usize) -> Symbol {
        Symbol::projector(Party::B, y, b)
    }
    fn mono(s: &[Symbol]) -> Monomial {
        Monomial::reduce(s.iter().copied()).unwrap()
    }

    #[test]
    fn projector_idempotence() {
        let sc = Scenario::chsh();
        let p = sc.canonicalize(&[ea(0, 0), ea(0, 0)]).unwrap();
        assert_eq!(p, Polynomial::monomial(mono(&[ea(0, 0)])));
    }

    #[test]
    fn orthogonal_outcomes_vanish() {
        let sc = Scenario::cglmp();
        let p = sc.canonicalize(&[ea(0, 0), ea(0, 1)]).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn parties_commute() {
        let sc = Scenario::chsh();
        let p = sc.canonicalize(&[fb(0, 0), ea(1, 0)]).unwrap();
        assert_eq!(p.len(), 1);
        let (m, c) = p.terms().next().unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(m.symbols(), &[ea(1, 0), fb(0, 0)]);
    }

    #[test]
    fn aux_unitarity() {
        let sc = Scenario::cglmp();
        let u = Symbol::aux(Party::A, 0);
        assert_eq!(
            sc.canonicalize(&[u, u.adjoint()]).unwrap(),
            Polynomial::identity()
        );
        assert_eq!(
            sc.canonicalize(&[u.adjoint(), u]).unwrap(),
            Polynomial::identity()
        );
        // cascades through nested pairs
        assert_eq!(
            sc.canonicalize(&[u, u, u.adjoint(), ea(0, 0), ea(0, 0)])
                .unwrap(),
            Polynomial::monomial(mono(&[u, ea(0, 0)]))
        );
    }

    #[test]
    fn aux_powers_stay_literal() {
        let sc = Scenario::cglmp();
        let u = Symbol::aux(Party::A, 0);
        let p = sc.canonicalize(&[u, u, u]).unwrap();
        assert_eq!(p.terms().next().unwrap().0.len(), 3);
    }

    #[test]
    fn last_outcome_is_eliminated() {
        let sc = Scenario::chsh();
        let p = sc.canonicalize(&[ea(0, 1)]).unwrap();
        let expect = &Polynomial::identity() - &Polynomial::monomial(mono(&[ea(0, 0)]));
        assert_eq!(p, expect);
        // E(0,1) E(0,0) = 0 survives the substitution
        assert!(sc.canonicalize(&[ea(0, 1), ea(0, 0)]).unwrap().is_zero());
    }

    #[test]
    fn out_of_range_symbols_are_rejected() {
        let sc = Scenario::chsh();
        assert!(matches!(
            sc.canonicalize(&[ea(2, 0)]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            sc.canonicalize(&[ea(0, 2)]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            sc.canonicalize(&[Symbol::aux(Party::B, 0)]),
            Err(Error::UnknownSymbol { .. })
        ));
    }

    #[test]
    fn dichotomic_squares_to_identity() {
        let sc = Scenario::chsh();
        let a0 = sc.dichotomic(Party::A, 0).unwrap();
        let expect = &Polynomial::monomial(mono(&[ea(0, 0)])).scale(2.0) - &Polynomial::identity();
        assert_eq!(a0, expect);
        assert_eq!(a0.multiply(&a0), Polynomial::identity());
        assert!(matches!(
            Scenario::cglmp().dichotomic(Party::A, 0),
            Err(Error::NotDichotomic { outcomes: 3, .. })
        ));
    }

    #[test]
    fn zero_annihilates() {
        let sc = Scenario::chsh();
        let p = sc.dichotomic(Party::B, 1).unwrap();
        assert!(Polynomial::zero().multiply(&p).is_zero());
        assert_eq!(Polynomial::identity().multiply(&p), p);
    }

    #[test]
    fn adjoint_examples() {
        let sc = Scenario::cglmp();
        let p = Polynomial::monomial(mono(&[ea(0, 0), ea(1, 0)]));
        assert_eq!(p.adjoint(), Polynomial::monomial(mono(&[ea(1, 0), ea(0, 0)])));
        let u = sc.aux(Party::A, 0).unwrap();
        assert_eq!(u.adjoint(), sc.aux_adjoint(Party::A, 0).unwrap());
        assert_eq!(Polynomial::identity().adjoint(), Polynomial::identity());
    }

    #[test]
    fn validate_rejects_eliminated_outcomes() {
        let sc = Scenario::chsh();
        let bad = Polynomial::monomial(Monomial(vec![ea(0, 1)]));
        assert!(sc.validate(&bad).is_err());
        assert!(sc.validate(&sc.dichotomic(Party::A, 1).unwrap()).is_ok());
    }
}
