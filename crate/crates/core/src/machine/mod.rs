//! Guess-and-check machines compiled from instances, their step-accounted
//! simulation, and the completion reduction.
//!
//! A machine guesses a set `A` of at most `k0` universe elements, checks the
//! weight, and then runs its checker on `A`. Every operation is charged a
//! number of steps; the budget is fixed at compile time from the parameters
//! alone.

mod appearance;
mod completion;
mod cw;

pub use appearance::{reduce_appearance, AppearanceChecker};
pub use completion::{
    normalize_cw, pipeline_machine, reduce_completion, run_wd_pipeline, solve_wd_pipeline, CompletionReduction,
    PipelineMachine, PipelineRun,
};
pub use cw::{
    build_cw_tables, cw_step_counts, cw_weight_bound, delta_set, inclusion_exclusion_union,
    lambda_value, reduce_cw, CwEntry, CwTables,
};

use crate::error::{Error, Result};
use crate::instances::{Assignment, WeightMode, WeightParameter};
use crate::subset::{walk_lex, Walk};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Checker {
    AlwaysReject,
    Appearance(AppearanceChecker),
    Cw(CwTables),
    Combined(Box<GuessCheckMachine>, Box<GuessCheckMachine>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessCheckMachine {
    universe: Vec<String>,
    weight: WeightParameter,
    budget: u64,
    checker: Checker,
}

/// Outcome of one branch of the guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchRun {
    pub accepted: bool,
    pub steps: u64,
}

impl GuessCheckMachine {
    /// Assembles a machine from parts; used by the document reader. The
    /// checker is trusted to match the universe.
    pub fn from_parts(universe: Vec<String>, weight: WeightParameter, budget: u64, checker: Checker) -> Result<Self> {
        match &checker {
            Checker::Appearance(a) if a.num_vars() != universe.len() => {
                return Err(Error::Usage("appearance checker does not match the universe".into()))
            }
            Checker::Cw(t) if t.num_vars() != universe.len() => {
                return Err(Error::Usage("cw tables do not match the universe".into()))
            }
            Checker::Combined(a, b) if a.universe != universe || b.universe != universe => {
                return Err(Error::Usage("combined components do not match the universe".into()))
            }
            _ => {}
        }
        Ok(GuessCheckMachine { universe, weight, budget, checker })
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn weight(&self) -> WeightParameter {
        self.weight
    }

    pub fn guess_bound(&self) -> usize {
        self.weight.k
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn checker(&self) -> &Checker {
        &self.checker
    }

    pub fn kind_name(&self) -> &'static str {
        match self.checker {
            Checker::AlwaysReject => "always-reject",
            Checker::Appearance(_) => "appearance",
            Checker::Cw(_) => "cw",
            Checker::Combined(..) => "combined",
        }
    }

    /// Runs the branch that guessed `guess` (sorted universe indices).
    pub fn run_branch(&self, guess: &[usize]) -> BranchRun {
        let a = guess.len() as u64;
        match &self.checker {
            Checker::AlwaysReject => BranchRun { accepted: false, steps: 0 },
            Checker::Combined(m1, m2) => {
                let r1 = m1.run_branch(guess);
                if !r1.accepted {
                    return r1;
                }
                let r2 = m2.run_branch(guess);
                // compare the two guesses element by element
                BranchRun { accepted: r2.accepted, steps: r1.steps + r2.steps + a }
            }
            checker => {
                let mut steps = a + 1;
                if !self.weight.admits(guess.len()) {
                    return BranchRun { accepted: false, steps };
                }
                let (accepted, more) = match checker {
                    Checker::Appearance(c) => c.check(guess),
                    Checker::Cw(t) => t.check(guess),
                    _ => unreachable!("handled above"),
                };
                steps += more;
                BranchRun { accepted, steps }
            }
        }
    }

    /// True only if no branch guessing `prefix` or a lexicographic
    /// extension of it can accept.
    pub fn refutes_prefix(&self, prefix: &[usize]) -> bool {
        match &self.checker {
            Checker::AlwaysReject => true,
            Checker::Appearance(c) => c.refutes(prefix),
            Checker::Cw(t) => t.refutes(prefix),
            Checker::Combined(m1, m2) => m1.refutes_prefix(prefix) || m2.refutes_prefix(prefix),
        }
    }
}

/// Machine accepting `A` iff both `m1` and `m2` accept `A`.
pub fn combine_machines(m1: GuessCheckMachine, m2: GuessCheckMachine) -> Result<GuessCheckMachine> {
    if m1.universe != m2.universe {
        return Err(Error::Usage("machines have different universes".into()));
    }
    if m1.weight != m2.weight {
        return Err(Error::Usage(format!(
            "machines have different guess bounds ({} vs {})",
            m1.weight, m2.weight
        )));
    }
    let budget = m1.budget + m2.budget + m1.weight.k as u64;
    Ok(GuessCheckMachine {
        universe: m1.universe.clone(),
        weight: m1.weight,
        budget,
        checker: Checker::Combined(Box::new(m1), Box::new(m2)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Run every branch up to the first accepting one.
    #[default]
    Exhaustive,
    /// Skip subtrees whose prefix is already refuted. Returns the same
    /// witness; `max_branch_steps` then covers only the branches run.
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationResult {
    pub accepted: bool,
    pub witness: Option<Assignment>,
    pub max_branch_steps: u64,
    pub branches: u64,
    /// Branches that needed more steps than the budget; they count as
    /// rejecting.
    pub overruns: u64,
}

pub fn simulate(m: &GuessCheckMachine) -> SimulationResult {
    simulate_with(m, Strategy::Exhaustive)
}

/// Explores guesses in lexicographic order and stops at the first accepting
/// branch.
pub fn simulate_with(m: &GuessCheckMachine, strategy: Strategy) -> SimulationResult {
    let mut res = SimulationResult {
        accepted: false,
        witness: None,
        max_branch_steps: 0,
        branches: 0,
        overruns: 0,
    };
    if matches!(m.checker, Checker::AlwaysReject) {
        return res;
    }
    let n = m.universe.len();
    let k = m.weight.k;
    let exact = m.weight.mode == WeightMode::Exact;
    walk_lex(n, k, |prefix| {
        if strategy == Strategy::Pruned {
            let remaining = n - prefix.last().map_or(0, |&l| l + 1);
            if exact && prefix.len() + remaining < k {
                return Walk::Skip;
            }
            if m.refutes_prefix(prefix) {
                return Walk::Skip;
            }
        }
        let run = m.run_branch(prefix);
        res.branches += 1;
        res.max_branch_steps = res.max_branch_steps.max(run.steps);
        if run.steps > m.budget {
            res.overruns += 1;
        } else if run.accepted {
            res.accepted = true;
            res.witness = Some(Assignment::from_indices(prefix));
            return Walk::Stop;
        }
        Walk::Descend
    });
    res
}
