//! Moment variables and the symbolic moment / localizing matrices of the NPA
//! relaxation.
//!
//! Every canonical monomial `m` gets a real variable standing for
//! `Re tr(ρ m)`. Since `Re tr(ρ m) = Re tr(ρ m*)`, a monomial and its adjoint
//! share a variable. Variable `0` is the identity and is pinned to one, so it
//! never appears as a free variable: [`LinearFunctional`] keeps it in the
//! constant term.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;

use crate::algebra::{Monomial, Party, Polynomial, Scenario, Symbol};
use crate::error::{Error, Result};

/// Identifier of a moment variable.
pub type VarId = usize;

/// Interns canonical moment keys.
#[derive(Clone, Debug)]
pub struct MomentIndex {
    ids: HashMap<Monomial, VarId>,
    keys: Vec<Monomial>,
}

impl Default for MomentIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl MomentIndex {
    /// Id of the identity moment, pinned to 1.
    pub const IDENTITY: VarId = 0;

    pub fn new() -> Self {
        let mut ids = HashMap::new();
        ids.insert(Monomial::identity(), Self::IDENTITY);
        MomentIndex {
            ids,
            keys: vec![Monomial::identity()],
        }
    }

    /// The smaller of `m` and its adjoint.
    pub fn key(m: &Monomial) -> Monomial {
        let adj = m.adjoint();
        if adj < *m {
            adj
        } else {
            m.clone()
        }
    }

    /// Number of ids handed out, including the identity.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn register(&mut self, m: &Monomial) -> VarId {
        let key = Self::key(m);
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.keys.len();
        self.ids.insert(key.clone(), id);
        self.keys.push(key);
        id
    }

    pub fn get(&self, m: &Monomial) -> Option<VarId> {
        self.ids.get(&Self::key(m)).copied()
    }

    pub fn monomial(&self, id: VarId) -> &Monomial {
        &self.keys[id]
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.keys
    }

    /// Translates `p` into a functional, registering unseen moments.
    pub fn moment_of(&mut self, p: &Polynomial) -> LinearFunctional {
        let mut f = LinearFunctional::zero();
        for (m, c) in p.terms() {
            let id = self.register(m);
            f.add(id, c);
        }
        f
    }

    /// Like [`MomentIndex::moment_of`] but fails on unregistered moments.
    pub fn try_moment_of(&self, p: &Polynomial) -> Result<LinearFunctional> {
        let mut f = LinearFunctional::zero();
        for (m, c) in p.terms() {
            let id = self.get(m).ok_or_else(|| {
                Error::Assembly(format!("moment {m} is not registered"))
            })?;
            f.add(id, c);
        }
        Ok(f)
    }
}

/// Affine function `constant + Σ coeff[v] · y[v]` of the moment variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearFunctional {
    pub constant: f64,
    terms: BTreeMap<VarId, f64>,
}

impl LinearFunctional {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinearFunctional {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn variable(id: VarId, c: f64) -> Self {
        let mut f = Self::zero();
        f.add(id, c);
        f
    }

    /// Adds `c · y[id]`; the identity id folds into the constant.
    pub fn add(&mut self, id: VarId, c: f64) {
        if id == MomentIndex::IDENTITY {
            self.constant += c;
            return;
        }
        if c == 0.0 {
            return;
        }
        let v = self.terms.entry(id).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&id);
        }
    }

    pub fn add_scaled(&mut self, other: &LinearFunctional, s: f64) {
        self.constant += s * other.constant;
        for (&id, &c) in &other.terms {
            self.add(id, s * c);
        }
    }

    pub fn scaled(&self, s: f64) -> LinearFunctional {
        let mut out = LinearFunctional::zero();
        out.add_scaled(self, s);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn coefficient(&self, id: VarId) -> f64 {
        if id == MomentIndex::IDENTITY {
            self.constant
        } else {
            self.terms.get(&id).copied().unwrap_or(0.0)
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0.0
    }

    /// Evaluates on an assignment indexed by variable id. Entry 0 is ignored
    /// in favour of the pinned constant.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.constant + self.terms().map(|(id, c)| c * values[id]).sum::<f64>()
    }

    /// Largest coefficient difference, constant included.
    pub fn max_abs_diff(&self, other: &LinearFunctional) -> f64 {
        let mut d = self.clone();
        d.add_scaled(other, -1.0);
        d.terms()
            .map(|(_, c)| c.abs())
            .fold(d.constant.abs(), f64::max)
    }

    /// Drops coefficients below `eps` in magnitude.
    pub fn pruned(&self, eps: f64) -> LinearFunctional {
        LinearFunctional {
            constant: if self.constant.abs() <= eps {
                0.0
            } else {
                self.constant
            },
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > eps)
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }
}

/// Symbolic moment matrix `Γ(Q)_{ij} = y(m_i* Q m_j)`, symmetrized.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    basis: Vec<Monomial>,
    weight: Polynomial,
    entries: Vec<LinearFunctional>,
}

impl MomentMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn weight(&self) -> &Polynomial {
        &self.weight
    }

    pub fn entry(&self, i: usize, j: usize) -> &LinearFunctional {
        &self.entries[i * self.basis.len() + j]
    }

    pub fn entries(&self) -> &[LinearFunctional] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<LinearFunctional> {
        self.entries
    }

    /// Dense numeric matrix for a given moment assignment (row-major).
    pub fn evaluate(&self, values: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|f| f.evaluate(values)).collect()
    }

    /// Ids of all variables referenced by some entry.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.entries
            .iter()
            .flat_map(|f| f.terms().map(|(id, _)| id))
            .collect()
    }

    /// Writes one `block row col var coeff` line per nonzero coefficient of
    /// the upper triangle. The pinned constant is written as variable 0.
    pub fn write_triplets<W: Write>(&self, block: usize, out: &mut W) -> Result<()> {
        write_block_triplets(block, self.dim(), &self.entries, out)
    }
}

/// Sparse triplet text export of a symmetric block of functionals.
pub fn write_block_triplets<W: Write>(
    block: usize,
    dim: usize,
    entries: &[LinearFunctional],
    out: &mut W,
) -> Result<()> {
    let mut line = String::new();
    for i in 0..dim {
        for j in i..dim {
            let f = &entries[i * dim + j];
            if f.constant != 0.0 {
                line.clear();
                writeln!(line, "{block} {i} {j} 0 {:e}", f.constant).ok();
                out.write_all(line.as_bytes())?;
            }
            for (id, c) in f.terms() {
                line.clear();
                writeln!(line, "{block} {i} {j} {id} {c:e}").ok();
                out.write_all(line.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Parses the triplet format back into `(block, row, col, var, coeff)` rows.
pub fn read_triplets(text: &str) -> Result<Vec<(usize, usize, usize, VarId, f64)>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::InvalidParameter(format!("malformed triplet on line {}", n + 1));
        if fields.len() != 5 {
            return Err(bad());
        }
        rows.push((
            fields[0].parse().map_err(|_| bad())?,
            fields[1].parse().map_err(|_| bad())?,
            fields[2].parse().map_err(|_| bad())?,
            fields[3].parse().map_err(|_| bad())?,
            fields[4].parse().map_err(|_| bad())?,
        ));
    }
    Ok(rows)
}

/// Builds `Γ(Q)` on `basis`, registering its moments in `index`. Entries are
/// `(y(m_i* Q m_j) + y(m_j* Q m_i)) / 2`, which is a no-op for hermitian `Q`.
pub fn build_moment_matrix(
    basis: &[Monomial],
    weight: &Polynomial,
    index: &mut MomentIndex,
) -> MomentMatrix {
    let n = basis.len();
    let adjoints: Vec<Polynomial> = basis
        .iter()
        .map(|m| Polynomial::monomial(m.adjoint()))
        .collect();
    let kets: Vec<Polynomial> = basis.iter().cloned().map(Polynomial::monomial).collect();
    let left: Vec<Polynomial> = adjoints.iter().map(|a| a.multiply(weight)).collect();
    let hermitian_weight = weight.adjoint() == *weight;

    let mut entries = vec![LinearFunctional::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let f = if hermitian_weight {
                index.moment_of(&left[i].multiply(&kets[j]))
            } else {
                let mut f = index.moment_of(&left[i].multiply(&kets[j]));
                let g = index.moment_of(&left[j].multiply(&kets[i]));
                f.add_scaled(&g, 1.0);
                f.scaled(0.5)
            };
            entries[j * n + i] = f.clone();
            entries[i * n + j] = f;
        }
    }
    MomentMatrix {
        basis: basis.to_vec(),
        weight: weight.clone(),
        entries,
    }
}

/// How to choose the monomial basis indexing `Γ`.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelSpec {
    /// All words of total length at most `n`.
    Npa(usize),
    /// Level `n` plus every product `a · b` of single-party words with
    /// `|a|, |b| ≤ n` (e.g. "1+AB" for `n = 1`).
    LocalProduct(usize),
    /// A basis making every target representable as `m_i* m_j`.
    Coverage(CoverageRequest),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRequest {
    /// Moments that must appear in some entry of `Γ`.
    pub targets: Vec<Monomial>,
    /// Words included up front (e.g. an NPA level or an operator hint).
    pub seed: Vec<Monomial>,
    /// Cap on the per-party length of basis words.
    pub max_word_len: usize,
}

impl CoverageRequest {
    pub const DEFAULT_MAX_WORD_LEN: usize = 6;

    pub fn new(targets: Vec<Monomial>) -> Self {
        CoverageRequest {
            targets,
            seed: Vec::new(),
            max_word_len: Self::DEFAULT_MAX_WORD_LEN,
        }
    }
}

/// Canonical single-party words of length at most `max_len`.
pub fn party_words(scenario: &Scenario, party: Party, max_len: usize) -> Vec<Vec<Symbol>> {
    let alphabet = scenario.alphabet(party);
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<Symbol>> = vec![Vec::new()];
    for len in 1..=max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &s in &alphabet {
                let mut cand = w.clone();
                cand.push(s);
                if let Some(m) = Monomial::reduce(cand.iter().copied()) {
                    if m.len() == len {
                        next.push(cand);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn sort_basis(set: HashSet<Monomial>) -> Vec<Monomial> {
    let mut v: Vec<Monomial> = set.into_iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    v
}

/// Deduplicated canonical basis, identity first.
pub fn build_basis(scenario: &Scenario, spec: &LevelSpec) -> Result<Vec<Monomial>> {
    match spec {
        LevelSpec::Npa(n) => Ok(npa_level(scenario, *n)),
        LevelSpec::LocalProduct(n) => {
            let mut set: HashSet<Monomial> = npa_level(scenario, *n).into_iter().collect();
            let a = party_words(scenario, Party::A, *n);
            let b = party_words(scenario, Party::B, *n);
            for wa in &a {
                for wb in &b {
                    if let Some(m) = Monomial::from_parts(wa, wb) {
                        set.insert(m);
                    }
                }
            }
            Ok(sort_basis(set))
        }
        LevelSpec::Coverage(req) => coverage_basis(scenario, req),
    }
}

fn npa_level(scenario: &Scenario, n: usize) -> Vec<Monomial> {
    let a = party_words(scenario, Party::A, n);
    let b = party_words(scenario, Party::B, n);
    let mut set = HashSet::new();
    for wa in &a {
        for wb in &b {
            if wa.len() + wb.len() <= n {
                if let Some(m) = Monomial::from_parts(wa, wb) {
                    set.insert(m);
                }
            }
        }
    }
    sort_basis(set)
}

/// Keys of all products `m_i* m_j` available in a growing basis.
struct Coverage {
    basis: Vec<Monomial>,
    members: HashSet<Monomial>,
    covered: HashSet<Monomial>,
}

impl Coverage {
    fn new() -> Self {
        Coverage {
            basis: Vec::new(),
            members: HashSet::new(),
            covered: HashSet::new(),
        }
    }

    fn insert(&mut self, m: Monomial) {
        if self.members.contains(&m) {
            return;
        }
        let adj = m.adjoint();
        for other in self.basis.iter().chain(std::iter::once(&m)) {
            if let Some(p) = adj.mul(other) {
                self.covered.insert(MomentIndex::key(&p));
            }
        }
        self.members.insert(m.clone());
        self.basis.push(m);
    }

    fn covers(&self, target: &Monomial) -> bool {
        target.is_identity() || self.covered.contains(&MomentIndex::key(target))
    }
}

fn coverage_basis(scenario: &Scenario, req: &CoverageRequest) -> Result<Vec<Monomial>> {
    let mut cov = Coverage::new();
    cov.insert(Monomial::identity());
    for m in &req.seed {
        scenario.validate(&Polynomial::monomial(m.clone()))?;
        cov.insert(m.clone());
    }
    let mut targets: Vec<Monomial> = req.targets.iter().map(MomentIndex::key).collect();
    targets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    targets.dedup();
    for t in &targets {
        scenario.validate(&Polynomial::monomial(t.clone()))?;
        if cov.covers(t) {
            continue;
        }
        let (left, right) = best_split(t, &cov, req.max_word_len).ok_or_else(|| {
            Error::CoverageUnsatisfiable(format!(
                "moment {t} needs words longer than {} per party",
                req.max_word_len
            ))
        })?;
        cov.insert(left);
        cov.insert(right);
        debug_assert!(cov.covers(t));
    }
    let set: HashSet<Monomial> = cov.basis.into_iter().collect();
    Ok(sort_basis(set))
}

/// Picks `t = l* r` adding the fewest new basis words, then the most
/// balanced split.
fn best_split(t: &Monomial, cov: &Coverage, cap: usize) -> Option<(Monomial, Monomial)> {
    let a = t.party_word(Party::A);
    let b = t.party_word(Party::B);
    let mut best: Option<((usize, usize), (Monomial, Monomial))> = None;
    for sa in 0..=a.len() {
        for sb in 0..=b.len() {
            let longest = [sa, a.len() - sa, sb, b.len() - sb]
                .into_iter()
                .max()
                .unwrap_or(0);
            if sa.max(sb) > cap || (a.len() - sa).max(b.len() - sb) > cap {
                continue;
            }
            let Some(head) = Monomial::from_parts(&a[..sa], &b[..sb]) else {
                continue;
            };
            let Some(right) = Monomial::from_parts(&a[sa..], &b[sb..]) else {
                continue;
            };
            let left = head.adjoint();
            let new = usize::from(!cov.members.contains(&left))
                + usize::from(!cov.members.contains(&right) && left != right);
            let score = (new, longest);
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, (left, right)));
            }
        }
    }
    best.map(|(_, pair)| pair)
}

/// Functionals `y(m_i* Q m_j) − y(m_j* Q m_i)`, `i < j`, that vanish when
/// `Γ(Q)` is symmetric before symmetrization. Identically zero ones are
/// skipped.
pub fn localizing_asymmetry(
    basis: &[Monomial],
    weight: &Polynomial,
    index: &mut MomentIndex,
) -> Vec<(usize, usize, LinearFunctional)> {
    let left: Vec<Polynomial> = basis
        .iter()
        .map(|m| Polynomial::monomial(m.adjoint()).multiply(weight))
        .collect();
    let kets: Vec<Polynomial> = basis.iter().cloned().map(Polynomial::monomial).collect();
    let mut out = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let mut f = index.moment_of(&left[i].multiply(&kets[j]));
            f.add_scaled(&index.moment_of(&left[j].multiply(&kets[i])), -1.0);
            let f = f.pruned(1e-12);
            if !f.is_zero() {
                out.push((i, j, f));
            }
        }
    }
    out
}

/// True when every variable in `functional` occurs in some entry of the
/// given blocks.
pub fn is_covered_by(functional: &LinearFunctional, blocks: &[&[LinearFunctional]]) -> bool {
    let present: HashSet<VarId> = blocks
        .iter()
        .flat_map(|b| b.iter())
        .flat_map(|f| f.terms().map(|(id, _)| id))
        .collect();
    functional.terms().all(|(id, _)| present.contains(&id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Symbol;

    fn chsh_ab_products(sc: &Scenario) -> Polynomial {
        let a0 = sc.dichotomic(Party::A, 0).unwrap();
        let b0 = sc.dichotomic(Party::B, 0).unwrap();
        a0.multiply(&b0)
    }

    #[test]
    fn chsh_level_one_basis() {
        let sc = Scenario::chsh();
        let basis = build_basis(&sc, &LevelSpec::Npa(1)).unwrap();
        assert_eq!(basis.len(), 5);
        assert!(basis[0].is_identity());
        let expect = [
            Symbol::projector(Party::A, 0, 0),
            Symbol::projector(Party::A, 1, 0),
            Symbol::projector(Party::B, 0, 0),
            Symbol::projector(Party::B, 1, 0),
        ];
        for (m, s) in basis[1..].iter().zip(expect) {
            assert_eq!(m.symbols(), &[s]);
        }
    }

    #[test]
    fn local_product_adds_cross_terms() {
        let sc = Scenario::chsh();
        let basis = build_basis(&sc, &LevelSpec::LocalProduct(1)).unwrap();
        assert_eq!(basis.len(), 9);
    }

    #[test]
    fn gamma_diagonal_and_corner() {
        let sc = Scenario::chsh();
        let basis = build_basis(&sc, &LevelSpec::Npa(1)).unwrap();
        let mut index = MomentIndex::new();
        let g = build_moment_matrix(&basis, &Polynomial::identity(), &mut index);
        assert_eq!(g.dim(), 5);
        assert_eq!(*g.entry(0, 0), LinearFunctional::constant(1.0));
        // projector idempotence: <E E> = <E> = entry (0, i)
        for i in 1..5 {
            assert_eq!(g.entry(i, i), g.entry(0, i));
        }
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(g.entry(i, j), g.entry(j, i));
            }
        }
    }

    #[test]
    fn moment_of_expansions() {
        let sc = Scenario::chsh();
        let mut index = MomentIndex::new();
        assert_eq!(
            index.moment_of(&Polynomial::identity()),
            LinearFunctional::constant(1.0)
        );
        assert!(index.moment_of(&Polynomial::zero()).is_zero());

        let f = index.moment_of(&chsh_ab_products(&sc));
        let e = Monomial::reduce([Symbol::projector(Party::A, 0, 0)]).unwrap();
        let g = Monomial::reduce([Symbol::projector(Party::B, 0, 0)]).unwrap();
        let eg = Monomial::reduce([
            Symbol::projector(Party::A, 0, 0),
            Symbol::projector(Party::B, 0, 0),
        ])
        .unwrap();
        assert_eq!(f.constant, 1.0);
        assert_eq!(f.coefficient(index.get(&eg).unwrap()), 4.0);
        assert_eq!(f.coefficient(index.get(&e).unwrap()), -2.0);
        assert_eq!(f.coefficient(index.get(&g).unwrap()), -2.0);
        assert_eq!(f.num_terms(), 3);
    }

    #[test]
    fn monomial_and_adjoint_share_an_id() {
        let mut index = MomentIndex::new();
        let m = Monomial::reduce([
            Symbol::projector(Party::A, 0, 0),
            Symbol::projector(Party::A, 1, 0),
        ])
        .unwrap();
        let a = index.register(&m);
        let b = index.register(&m.adjoint());
        assert_eq!(a, b);
        assert_eq!(index.len(), 2);
    }

    #[test]
    fn empty_coverage_is_identity() {
        let sc = Scenario::chsh();
        let basis = build_basis(&sc, &LevelSpec::Coverage(CoverageRequest::new(vec![]))).unwrap();
        assert_eq!(basis, vec![Monomial::identity()]);
    }

    #[test]
    fn coverage_reaches_long_words() {
        let sc = Scenario::chsh();
        let e0 = Symbol::projector(Party::A, 0, 0);
        let e1 = Symbol::projector(Party::A, 1, 0);
        let f0 = Symbol::projector(Party::B, 0, 0);
        let f1 = Symbol::projector(Party::B, 1, 0);
        let t = Monomial::reduce([e0, e1, e0, e1, e0, f1, f0, f1]).unwrap();
        let req = CoverageRequest::new(vec![t.clone()]);
        let basis = build_basis(&sc, &LevelSpec::Coverage(req)).unwrap();
        let mut index = MomentIndex::new();
        let g = build_moment_matrix(&basis, &Polynomial::identity(), &mut index);
        let id = index.get(&t).expect("target moment registered");
        assert!(g.variables().contains(&id));
    }

    #[test]
    fn coverage_cap_is_enforced() {
        let sc = Scenario::chsh();
        let e0 = Symbol::projector(Party::A, 0, 0);
        let e1 = Symbol::projector(Party::A, 1, 0);
        let t = Monomial::reduce([e0, e1, e0, e1, e0]).unwrap();
        let mut req = CoverageRequest::new(vec![t]);
        req.max_word_len = 2;
        assert!(matches!(
            build_basis(&sc, &LevelSpec::Coverage(req)),
            Err(Error::CoverageUnsatisfiable(_))
        ));
    }

    #[test]
    fn localizing_matrix_is_symmetrized() {
        let sc = Scenario::cglmp();
        let q = sc
            .aux_adjoint(Party::A, 0)
            .unwrap()
            .multiply(&sc.projector(Party::A, 0, 0).unwrap());
        let basis = build_basis(&sc, &LevelSpec::Npa(1)).unwrap();
        let mut index = MomentIndex::new();
        let l = build_moment_matrix(&basis, &q, &mut index);
        for i in 0..l.dim() {
            for j in 0..l.dim() {
                assert_eq!(l.entry(i, j), l.entry(j, i));
            }
        }
        assert!(!l.entry(0, 0).is_constant());
    }

    #[test]
    fn triplets_round_trip() {
        let sc = Scenario::chsh();
        let basis = build_basis(&sc, &LevelSpec::Npa(1)).unwrap();
        let mut index = MomentIndex::new();
        let g = build_moment_matrix(&basis, &Polynomial::identity(), &mut index);
        let mut buf = Vec::new();
        g.write_triplets(0, &mut buf).unwrap();
        let rows = read_triplets(std::str::from_utf8(&buf).unwrap()).unwrap();
        // upper triangle of a 5x5 with one coefficient per entry
        assert_eq!(rows.len(), 15);
        assert_eq!(rows[0], (0, 0, 0, 0, 1.0));
        assert!(read_triplets("0 1 2").is_err());
    }
}
