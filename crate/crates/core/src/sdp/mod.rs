//! Certification SDPs: a moment matrix, optional localizing and swapped-state
//! blocks, and a Bell value pinned by an equality.

pub mod solver;
pub mod sweep;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{Monomial, Party, Polynomial, Scenario};
use crate::error::{Error, Result};
use crate::moments::{
    build_basis, build_moment_matrix, localizing_asymmetry, CoverageRequest, LevelSpec, LinearFunctional, MomentIndex,
    MomentMatrix,
};
use crate::swap::{
    localizing_constraints_cglmp, measurement_tau_polynomials, ReferenceState, SwapSpec,
};

pub use solver::{ConicSolver, InteriorPointSolver, Solution, SolverOptions};
pub use sweep::{sweep, SweepPoint, SweepResult};

/// Which side of the classical bound counts as a violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Above,
    Below,
}

/// A Bell expression as a polynomial in the box operators.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    pub name: String,
    pub polynomial: Polynomial,
    pub classical_bound: f64,
    pub quantum_extremum: f64,
    pub direction: Direction,
}

impl BellFunctional {
    /// `<A0B0> + <A1B0> + <A0B1> − <A1B1>`.
    pub fn chsh(scenario: &Scenario) -> Result<Self> {
        if !scenario.is_chsh() {
            return Err(Error::WrongScenario { expected: "CHSH" });
        }
        let mut p = Polynomial::zero();
        for (x, y, s) in [(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, -1.0)] {
            let c = scenario
                .dichotomic(Party::A, x)?
                .multiply(&scenario.dichotomic(Party::B, y)?);
            p = &p + &c.scale(s);
        }
        Ok(BellFunctional {
            name: "CHSH".into(),
            polynomial: p,
            classical_bound: 2.0,
            quantum_extremum: 2.0 * std::f64::consts::SQRT_2,
            direction: Direction::Above,
        })
    }

    /// `p(a<b|1,1) + p(a>b|0,1) + p(a≥b|1,0) + p(a<b|0,0)`.
    pub fn cglmp(scenario: &Scenario) -> Result<Self> {
        if !scenario.is_cglmp() {
            return Err(Error::WrongScenario { expected: "CGLMP" });
        }
        let d = 3;
        let mut p = Polynomial::zero();
        let terms: [(usize, usize, fn(usize, usize) -> bool); 4] = [
            (1, 1, |a, b| a < b),
            (0, 1, |a, b| a > b),
            (1, 0, |a, b| a >= b),
            (0, 0, |a, b| a < b),
        ];
        for (x, y, keep) in terms {
            for a in 0..d {
                for b in 0..d {
                    if keep(a, b) {
                        let e = scenario.projector(Party::A, x, a)?;
                        let f = scenario.projector(Party::B, y, b)?;
                        p = &p + &e.multiply(&f);
                    }
                }
            }
        }
        Ok(BellFunctional {
            name: "CGLMP".into(),
            polynomial: p,
            classical_bound: 1.0,
            quantum_extremum: crate::swap::cglmp_quantum_minimum(),
            direction: Direction::Below,
        })
    }

    pub fn for_scenario(scenario: &Scenario) -> Result<Self> {
        if scenario.is_chsh() {
            Self::chsh(scenario)
        } else if scenario.is_cglmp() {
            Self::cglmp(scenario)
        } else {
            Err(Error::InvalidScenario(
                "no Bell functional for this scenario".into(),
            ))
        }
    }

    /// True when `value` is within `tol` of the quantum extremum.
    pub fn is_extremal(&self, value: f64, tol: f64) -> bool {
        (value - self.quantum_extremum).abs() <= tol
    }
}

/// Square block of affine entries required to be PSD, row-major.
#[derive(Clone, Debug)]
pub struct PsdBlock {
    pub name: String,
    pub dim: usize,
    pub entries: Vec<LinearFunctional>,
}

/// `functional = value`.
#[derive(Clone, Debug)]
pub struct Equality {
    pub label: String,
    pub functional: LinearFunctional,
    pub value: f64,
}

/// Minimize `objective` subject to PSD blocks and equalities.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    /// Number of moment variables including the identity.
    pub num_vars: usize,
    pub objective: LinearFunctional,
    pub blocks: Vec<PsdBlock>,
    pub equalities: Vec<Equality>,
}

impl SdpProblem {
    /// Variables present in no PSD block.
    pub fn uncovered_variables(&self) -> BTreeSet<usize> {
        let present: BTreeSet<usize> = self
            .blocks
            .iter()
            .flat_map(|b| b.entries.iter().flat_map(|f| f.terms().map(|(id, _)| id)))
            .collect();
        let mut used: BTreeSet<usize> = self.objective.terms().map(|(id, _)| id).collect();
        for e in &self.equalities {
            used.extend(e.functional.terms().map(|(id, _)| id));
        }
        used.difference(&present).copied().collect()
    }

    pub fn solve(&self, options: &SolverOptions) -> Result<Solution> {
        InteriorPointSolver::new(options.clone()).solve(self)
    }

    /// Objective, smallest eigenvalue of every block and largest equality
    /// residual at an explicit moment vector.
    pub fn evaluate(&self, values: &[f64]) -> PointReport {
        PointReport {
            objective: self.objective.evaluate(values),
            min_eigenvalues: self
                .blocks
                .iter()
                .map(|b| {
                    let e: Vec<f64> = b.entries.iter().map(|f| f.evaluate(values)).collect();
                    crate::oracle::min_eigenvalue_real(b.dim, &e)
                })
                .collect(),
            max_equality_residual: self
                .equalities
                .iter()
                .map(|e| (e.functional.evaluate(values) - e.value).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// [`SdpProblem::evaluate`] at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointReport {
    pub objective: f64,
    pub min_eigenvalues: Vec<f64>,
    pub max_equality_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
        })
    }
}

/// Optional constraint families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// `ρ_swap ⪰ 0` and `tr ρ_swap = 1`.
    pub rho_psd: bool,
    /// CGLMP localizing matrices for the auxiliary unitaries.
    pub localizing: bool,
    /// CHSH isotropic correlations with unbiased marginals.
    pub isotropic: bool,
}

impl Flags {
    pub fn defaults_for(scenario: &Scenario) -> Self {
        let cglmp = scenario.is_cglmp();
        Flags {
            rho_psd: cglmp,
            localizing: cglmp,
            isotropic: false,
        }
    }

    /// Rejects flags that do not apply to `scenario`.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.isotropic && !scenario.is_chsh() {
            return Err(Error::InvalidParameter(
                "isotropic constraints are defined for CHSH only".into(),
            ));
        }
        if self.localizing && !scenario.is_cglmp() {
            return Err(Error::InvalidParameter(
                "localizing constraints are defined for CGLMP only".into(),
            ));
        }
        Ok(())
    }
}

/// Objective of a certification run.
#[derive(Clone, Debug)]
pub enum Target {
    /// `<ψ̄|ρ_swap|ψ̄>`.
    Fidelity {
        swap: SwapSpec,
        reference: ReferenceState,
    },
    /// Bob's measurement quality τ.
    Tau,
}

/// Everything but the Bell equality, built once and reused across a sweep.
#[derive(Clone, Debug)]
pub struct Template {
    pub scenario: Scenario,
    pub bell: BellFunctional,
    pub flags: Flags,
    pub basis_size: usize,
    bell_functional: LinearFunctional,
    problem: SdpProblem,
    index: MomentIndex,
}

/// Words every default basis starts from: NPA level four for τ, "2+AB" for
/// the CHSH fidelity, NPA level two otherwise.
pub fn default_seed(scenario: &Scenario, target: &Target) -> LevelSpec {
    match target {
        Target::Tau => LevelSpec::Npa(4),
        Target::Fidelity { .. } if scenario.is_chsh() => LevelSpec::LocalProduct(2),
        Target::Fidelity { .. } => LevelSpec::Npa(2),
    }
}

/// Default basis: [`default_seed`] plus whatever words are needed to cover
/// every moment of the objective and constraints.
pub fn default_level(scenario: &Scenario, target: &Target, needed: &[Monomial]) -> LevelSpec {
    let mut req = CoverageRequest::new(needed.to_vec());
    req.seed = build_basis(scenario, &default_seed(scenario, target)).unwrap_or_default();
    LevelSpec::Coverage(req)
}

fn isotropic_equalities(
    scenario: &Scenario,
    index: &mut MomentIndex,
) -> Result<(Vec<Equality>, Vec<Polynomial>)> {
    let corr = |x, y, index: &mut MomentIndex| -> Result<(Polynomial, LinearFunctional)> {
        let p = scenario
            .dichotomic(Party::A, x)?
            .multiply(&scenario.dichotomic(Party::B, y)?);
        let f = index.moment_of(&p);
        Ok((p, f))
    };
    let mut polys = Vec::new();
    let mut eqs = Vec::new();
    let (p00, c00) = corr(0, 0, index)?;
    polys.push(p00);
    for (x, y, s) in [(1, 0, 1.0), (0, 1, 1.0), (1, 1, -1.0)] {
        let (p, c) = corr(x, y, index)?;
        polys.push(p);
        let mut f = c.scaled(s);
        f.add_scaled(&c00, -1.0);
        eqs.push(Equality {
            label: format!("isotropic-{x}{y}"),
            functional: f,
            value: 0.0,
        });
    }
    for party in Party::BOTH {
        for s in 0..2 {
            let p = scenario.dichotomic(party, s)?;
            eqs.push(Equality {
                label: format!("marginal-{party}{s}"),
                functional: index.moment_of(&p),
                value: 0.0,
            });
            polys.push(p);
        }
    }
    Ok((eqs, polys))
}

/// `diag(1 − <m_i* m_i>) ⪰ 0` over the non-identity basis words. Every word
/// is a product of projectors and unitaries, so `‖m_i‖ ≤ 1`; without this,
/// moments that only sit on the diagonal of Γ are unbounded above.
fn word_norm_block(gamma: &MomentMatrix) -> Option<PsdBlock> {
    let n = gamma.dim();
    let rows: Vec<usize> = (0..n).filter(|&i| !gamma.basis()[i].is_identity()).collect();
    if rows.is_empty() {
        return None;
    }
    let k = rows.len();
    let mut entries = vec![LinearFunctional::zero(); k * k];
    for (r, &i) in rows.iter().enumerate() {
        let mut f = gamma.entry(i, i).scaled(-1.0);
        f.constant += 1.0;
        entries[r * k + r] = f;
    }
    Some(PsdBlock {
        name: "word-norms".into(),
        dim: k,
        entries,
    })
}

/// Bases used by [`Template::build`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BuildOptions {
    /// Basis of Γ; `None` selects [`default_level`].
    pub level: Option<LevelSpec>,
    /// Basis of the localizing matrices; `None` uses the level attached to
    /// each constraint.
    pub localizing_level: Option<LevelSpec>,
    /// Also put the monomials of each localizing weight in its basis.
    pub localizing_weight_words: bool,
}

impl Template {
    /// Builds Γ on `level` (or the default coverage basis), the requested
    /// optional blocks and the objective.
    pub fn new(
        scenario: &Scenario,
        target: &Target,
        bell: BellFunctional,
        flags: Flags,
        level: Option<&LevelSpec>,
    ) -> Result<Self> {
        let options = BuildOptions {
            level: level.cloned(),
            ..BuildOptions::default()
        };
        Self::build(scenario, target, bell, flags, &options)
    }

    /// [`Template::new`] with control over the localizing matrices.
    pub fn build(
        scenario: &Scenario,
        target: &Target,
        bell: BellFunctional,
        flags: Flags,
        options: &BuildOptions,
    ) -> Result<Self> {
        let level = options.level.as_ref();
        flags.check(scenario)?;
        if let Target::Fidelity { swap, reference } = target {
            if swap.scenario != *scenario {
                return Err(Error::Assembly("swap built for a different scenario".into()));
            }
            if reference.amplitudes.len() != swap.dim * swap.dim {
                return Err(Error::Dimension(format!(
                    "reference state has {} amplitudes, swap register needs {}",
                    reference.amplitudes.len(),
                    swap.dim * swap.dim
                )));
            }
        }

        // polynomials whose moments must be defined by Γ
        let objective_poly = match target {
            Target::Fidelity { swap, reference } => swap.fidelity_polynomial(reference)?,
            Target::Tau => measurement_tau_polynomials(scenario)?.1,
        };
        let rho_polys = match (target, flags.rho_psd) {
            (Target::Fidelity { swap, .. }, true) => swap.state_polynomials(),
            _ => Vec::new(),
        };
        let mut scratch = MomentIndex::new();
        let (_, iso_polys) = if flags.isotropic {
            isotropic_equalities(scenario, &mut scratch)?
        } else {
            (Vec::new(), Vec::new())
        };
        let mut needed: BTreeSet<Monomial> = BTreeSet::new();
        for p in std::iter::once(&objective_poly)
            .chain(std::iter::once(&bell.polynomial))
            .chain(&rho_polys)
            .chain(&iso_polys)
        {
            needed.extend(p.monomials().filter(|m| !m.is_identity()).cloned());
        }
        let needed: Vec<Monomial> = needed.into_iter().collect();
        let level = match level {
            Some(l) => l.clone(),
            None => default_level(scenario, target, &needed),
        };
        let basis = build_basis(scenario, &level)?;

        let mut index = MomentIndex::new();
        let gamma = build_moment_matrix(&basis, &Polynomial::identity(), &mut index);
        let norms = word_norm_block(&gamma);
        let mut blocks = vec![PsdBlock {
            name: "moment".into(),
            dim: gamma.dim(),
            entries: gamma.into_entries(),
        }];
        blocks.extend(norms);
        let mut equalities = Vec::new();

        if flags.localizing {
            for c in localizing_constraints_cglmp(scenario)? {
                let mut basis = match &options.localizing_level {
                    Some(l) => build_basis(scenario, l)?,
                    None => build_basis(scenario, &LevelSpec::Npa(c.basis_level))?,
                };
                if options.localizing_weight_words {
                    for m in c.weight.monomials() {
                        if !basis.contains(m) {
                            basis.push(m.clone());
                        }
                    }
                }
                let m = build_moment_matrix(&basis, &c.weight, &mut index);
                for (i, j, f) in localizing_asymmetry(&basis, &c.weight, &mut index) {
                    equalities.push(Equality {
                        label: format!("{}-symmetric-{i}-{j}", c.label),
                        functional: f,
                        value: 0.0,
                    });
                }
                blocks.push(PsdBlock {
                    name: c.label,
                    dim: m.dim(),
                    entries: m.into_entries(),
                });
            }
        }
        if let (Target::Fidelity { swap, .. }, true) = (target, flags.rho_psd) {
            let rho = swap.state_functional(&mut index);
            equalities.push(Equality {
                label: "trace".into(),
                functional: rho.trace(),
                value: 1.0,
            });
            blocks.push(PsdBlock {
                name: "swapped-state".into(),
                dim: rho.dim(),
                entries: rho.entries().to_vec(),
            });
        }
        if flags.isotropic {
            equalities.extend(isotropic_equalities(scenario, &mut index)?.0);
        }
        let objective = index.moment_of(&objective_poly);
        let bell_functional = index.moment_of(&bell.polynomial);

        let problem = SdpProblem {
            num_vars: index.len(),
            objective,
            blocks,
            equalities,
        };
        let missing = problem.uncovered_variables();
        if !missing.is_empty() {
            let names: Vec<String> = missing
                .iter()
                .take(5)
                .map(|&id| index.monomial(id).to_string())
                .collect();
            return Err(Error::Assembly(format!(
                "moments not defined by any PSD block at this level: {}",
                names.join(", ")
            )));
        }
        let mut probe = problem.clone();
        probe.objective = bell_functional.clone();
        if !probe.uncovered_variables().is_empty() {
            return Err(Error::Assembly(
                "Bell functional not defined by the moment matrix".into(),
            ));
        }

        Ok(Template {
            scenario: *scenario,
            bell,
            flags,
            basis_size: basis.len(),
            bell_functional,
            problem,
            index,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.problem.num_vars
    }

    pub fn index(&self) -> &MomentIndex {
        &self.index
    }

    /// Constraints and objective without the Bell equality.
    pub fn problem(&self) -> &SdpProblem {
        &self.problem
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.problem.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn objective(&self) -> &LinearFunctional {
        &self.problem.objective
    }

    pub fn bell_functional(&self) -> &LinearFunctional {
        &self.bell_functional
    }

    /// The problem with the Bell equality `B = bell_value`.
    pub fn at(&self, bell_value: f64) -> SdpProblem {
        let mut p = self.problem.clone();
        p.equalities.push(Equality {
            label: "bell".into(),
            functional: self.bell_functional.clone(),
            value: bell_value,
        });
        p
    }

    /// Same constraints with the objective replaced (e.g. zero for a pure
    /// feasibility check).
    pub fn with_objective(&self, bell_value: f64, objective: LinearFunctional) -> SdpProblem {
        let mut p = self.at(bell_value);
        p.objective = objective;
        p
    }

    /// The problem with the one-sided constraint "at least as much violation
    /// as `bell_value − slack`". Its minimum lower-bounds the one at the exact
    /// value and, unlike the equality, keeps a strictly feasible point when
    /// `bell_value` is the relaxation's extremum.
    pub fn at_least(&self, bell_value: f64, slack: f64) -> SdpProblem {
        let mut p = self.problem.clone();
        let entry = match self.bell.direction {
            Direction::Above => {
                let mut f = self.bell_functional.clone();
                f.constant -= bell_value - slack;
                f
            }
            Direction::Below => {
                let mut f = self.bell_functional.scaled(-1.0);
                f.constant += bell_value + slack;
                f
            }
        };
        p.blocks.push(PsdBlock {
            name: "bell".into(),
            dim: 1,
            entries: vec![entry],
        });
        p
    }

    /// Solves at `bell_value`. Within [`EXTREMAL_WINDOW`] of the quantum
    /// extremum the equality is replaced by [`Template::at_least`] with that
    /// slack and the tolerances are tightened.
    pub fn solve_at(&self, bell_value: f64, options: &SolverOptions) -> Result<Solution> {
        if self.bell.is_extremal(bell_value, EXTREMAL_WINDOW) {
            self.at_least(bell_value, EXTREMAL_WINDOW)
                .solve(&options.tightened())
        } else {
            self.at(bell_value).solve(options)
        }
    }
}

/// Distance from the quantum extremum treated as extremal.
pub const EXTREMAL_WINDOW: f64 = 1e-6;

/// Fidelity SDP at one Bell value.
pub fn assemble_fidelity_sdp(
    scenario: &Scenario,
    swap: &SwapSpec,
    reference: &ReferenceState,
    bell: &BellFunctional,
    bell_value: f64,
    flags: Flags,
    level: Option<&LevelSpec>,
) -> Result<SdpProblem> {
    let target = Target::Fidelity {
        swap: swap.clone(),
        reference: reference.clone(),
    };
    Ok(Template::new(scenario, &target, bell.clone(), flags, level)?.at(bell_value))
}

/// τ SDP at one Bell value.
pub fn assemble_tau_sdp(
    scenario: &Scenario,
    bell: &BellFunctional,
    bell_value: f64,
    isotropic: bool,
    level: Option<&LevelSpec>,
) -> Result<SdpProblem> {
    let flags = Flags {
        rho_psd: false,
        localizing: false,
        isotropic,
    };
    Ok(Template::new(scenario, &Target::Tau, bell.clone(), flags, level)?.at(bell_value))
}

/// Maximum of the Bell functional (minimum for `Direction::Below`) over
/// Γ ⪰ 0 at `level`.
pub fn bell_extremum(
    scenario: &Scenario,
    bell: &BellFunctional,
    level: &LevelSpec,
    options: &SolverOptions,
) -> Result<(f64, SolveStatus)> {
    let basis = build_basis(scenario, level)?;
    let mut index = MomentIndex::new();
    let gamma = build_moment_matrix(&basis, &Polynomial::identity(), &mut index);
    let f = index.moment_of(&bell.polynomial);
    let sign = match bell.direction {
        Direction::Above => -1.0,
        Direction::Below => 1.0,
    };
    let problem = SdpProblem {
        num_vars: index.len(),
        objective: f.scaled(sign),
        blocks: vec![PsdBlock {
            name: "moment".into(),
            dim: gamma.dim(),
            entries: gamma.into_entries(),
        }],
        equalities: Vec::new(),
    };
    if !problem.uncovered_variables().is_empty() {
        return Err(Error::Assembly(
            "Bell functional not defined by the moment matrix".into(),
        ));
    }
    let s = problem.solve(options)?;
    Ok((sign * s.value, s.status))
}
