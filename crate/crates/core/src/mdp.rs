//! Markov decision processes with an absorbing target state.
//!
//! [`Mdp<Rational>`] is a standard MDP; [`Pmdp`] carries [`LinearTerm`]
//! weights over a parameter set. The direct path computes a minimal expected
//! cost policy by policy iteration ([`mdp_pi`]); the inverse path
//! ([`p_mdp_pi`]) derives a constraint on the parameters under which the
//! policy optimal at a reference instantiation stays optimal.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linsolve::{self, RationalMatrix, SolveError};
use crate::param::{self, Constraint, Inequality, Instantiation, LinearTerm, ParamError, ParamSet, Rational};
use crate::weight::Weight;

/// Default bound on the number of policies enumerated by [`brute_force_optimal`].
pub const DEFAULT_POLICY_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ProbabilityOutOfRange {
        state: String,
        action: String,
        target: String,
    },
    RowSum {
        state: String,
        action: String,
        sum: Rational,
    },
    NoEnabledAction {
        state: String,
    },
    AbsorbingActionCount {
        count: usize,
    },
    AbsorbingNotSelfLoop,
    AbsorbingWeight,
    /// Some policy keeps these states away from the absorbing state forever.
    AbsorbingUnreachable {
        states: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ProbabilityOutOfRange { state, action, target } => {
                write!(f, "probability of {state} --{action}--> {target} is outside [0, 1]")
            }
            Violation::RowSum { state, action, sum } => {
                write!(f, "probabilities of ({state}, {action}) sum to {sum}, expected 1")
            }
            Violation::NoEnabledAction { state } => write!(f, "state {state} has no enabled action"),
            Violation::AbsorbingActionCount { count } => {
                write!(f, "absorbing state must have exactly one action, found {count}")
            }
            Violation::AbsorbingNotSelfLoop => write!(f, "absorbing action is not a probability-1 self-loop"),
            Violation::AbsorbingWeight => write!(f, "absorbing self-loop must have weight 0"),
            Violation::AbsorbingUnreachable { states } => write!(
                f,
                "some policy never reaches the absorbing state from {{{}}}",
                states.join(", ")
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("invalid model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("policy chooses a disabled action in state {state}")]
    InvalidPolicy { state: String },
    #[error("{count} policies exceed the enumeration cap of {cap}")]
    TooManyPolicies { count: u128, cap: usize },
    #[error("policy iteration revisited a policy")]
    PolicyRepeated,
    #[error("reference instantiation violates the synthesized constraint; the policy is not optimal there")]
    OptimalityViolation,
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("transition ({state}, {action}) defined twice")]
    DuplicateTransition { state: String, action: String },
}

/// Outcome of taking one action: a weight and a distribution over successors.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice<W> {
    pub weight: W,
    /// `(successor, probability)` with positive probabilities, sorted by successor.
    pub successors: Vec<(usize, Rational)>,
}

/// MDP over named states and actions. `W` is [`Rational`] for a standard MDP
/// or [`LinearTerm`] for a parametric one.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp<W> {
    params: ParamSet,
    states: Vec<String>,
    actions: Vec<String>,
    absorbing: usize,
    /// `choices[state][action]`, `None` when the action is not enabled.
    choices: Vec<Vec<Option<Choice<W>>>>,
}

pub type Pmdp = Mdp<LinearTerm>;

/// Per-state action choice. The absorbing state's entry is its self-loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MdpPolicy {
    pub choice: Vec<usize>,
}

impl MdpPolicy {
    pub fn action(&self, state: usize) -> usize {
        self.choice[state]
    }
}

impl<W: Weight> Mdp<W> {
    pub fn new(params: ParamSet, states: Vec<String>, actions: Vec<String>, absorbing: usize) -> Self {
        let choices = vec![vec![None; actions.len()]; states.len()];
        Mdp {
            params,
            states,
            actions,
            absorbing,
            choices,
        }
    }

    /// Defines action `action` in state `from`. Zero-probability successors are
    /// dropped; repeated successors are summed.
    pub fn add_transition(
        &mut self,
        from: usize,
        action: usize,
        weight: W,
        to: Vec<(usize, Rational)>,
    ) -> Result<(), MdpError> {
        if self.choices[from][action].is_some() {
            return Err(MdpError::DuplicateTransition {
                state: self.states[from].clone(),
                action: self.actions[action].clone(),
            });
        }
        let mut successors: Vec<(usize, Rational)> = Vec::new();
        for (s, p) in to {
            match successors.iter_mut().find(|(t, _)| *t == s) {
                Some((_, q)) => *q += p,
                None => successors.push((s, p)),
            }
        }
        successors.retain(|(_, p)| !p.is_zero());
        successors.sort_by_key(|(s, _)| *s);
        if !successors.is_empty() {
            self.choices[from][action] = Some(Choice { weight, successors });
        }
        Ok(())
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn absorbing(&self) -> usize {
        self.absorbing
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn choice(&self, state: usize, action: usize) -> Option<&Choice<W>> {
        self.choices[state][action].as_ref()
    }

    /// Enabled actions of `state`, in ascending index order.
    pub fn enabled(&self, state: usize) -> Vec<usize> {
        self.choices[state]
            .iter()
            .enumerate()
            .filter_map(|(a, c)| c.as_ref().map(|_| a))
            .collect()
    }

    pub fn transient_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(move |&s| s != self.absorbing)
    }

    /// Number of enabled `(state, action)` pairs over all states.
    pub fn num_transitions(&self) -> usize {
        self.choices
            .iter()
            .flatten()
            .flatten()
            .map(|c| c.successors.len())
            .sum()
    }

    /// Checks every structural assumption the solvers rely on.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for (s, row) in self.choices.iter().enumerate() {
            for (a, choice) in row.iter().enumerate() {
                let Some(choice) = choice else { continue };
                let mut sum = Rational::zero();
                for (t, p) in &choice.successors {
                    if p.is_negative() || p > &Rational::one() {
                        out.push(Violation::ProbabilityOutOfRange {
                            state: self.states[s].clone(),
                            action: self.actions[a].clone(),
                            target: self.states[*t].clone(),
                        });
                    }
                    sum += p;
                }
                if !sum.is_one() {
                    out.push(Violation::RowSum {
                        state: self.states[s].clone(),
                        action: self.actions[a].clone(),
                        sum,
                    });
                }
            }
        }
        for s in 0..self.states.len() {
            if s != self.absorbing && self.enabled(s).is_empty() {
                out.push(Violation::NoEnabledAction {
                    state: self.states[s].clone(),
                });
            }
        }
        let absorbing = self.enabled(self.absorbing);
        if absorbing.len() != 1 {
            out.push(Violation::AbsorbingActionCount { count: absorbing.len() });
        }
        if let [a] = absorbing[..] {
            let choice = self.choice(self.absorbing, a).unwrap();
            if choice.successors != [(self.absorbing, Rational::one())] {
                out.push(Violation::AbsorbingNotSelfLoop);
            }
            if !choice.weight.is_origin() {
                out.push(Violation::AbsorbingWeight);
            }
        }
        let trapped = self.states_avoiding_absorbing();
        if !trapped.is_empty() {
            out.push(Violation::AbsorbingUnreachable {
                states: trapped.into_iter().map(|s| self.states[s].clone()).collect(),
            });
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Largest set of transient states that some policy never leaves: every
    /// member has an action whose support stays inside the set. Empty iff the
    /// absorbing state is reached with probability 1 under every policy.
    fn states_avoiding_absorbing(&self) -> Vec<usize> {
        let mut inside: Vec<bool> = (0..self.states.len()).map(|s| s != self.absorbing).collect();
        loop {
            let mut changed = false;
            for s in 0..self.states.len() {
                if !inside[s] {
                    continue;
                }
                let can_stay = self.choices[s]
                    .iter()
                    .flatten()
                    .any(|c| c.successors.iter().all(|(t, _)| inside[*t]));
                if !can_stay {
                    inside[s] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..self.states.len()).filter(|&s| inside[s]).collect()
    }

    fn ensure_valid(&self) -> Result<(), MdpError> {
        self.validate().map_err(MdpError::Invalid)
    }

    fn check_policy(&self, mu: &MdpPolicy) -> Result<(), MdpError> {
        for s in 0..self.states.len() {
            let ok = mu
                .choice
                .get(s)
                .is_some_and(|&a| a < self.actions.len() && self.choices[s][a].is_some());
            if !ok {
                return Err(MdpError::InvalidPolicy {
                    state: self.states[s].clone(),
                });
            }
        }
        Ok(())
    }

    /// Lowest-index enabled action in every state.
    pub fn first_policy(&self) -> MdpPolicy {
        MdpPolicy {
            choice: (0..self.states.len())
                .map(|s| self.enabled(s).first().copied().unwrap_or(0))
                .collect(),
        }
    }

    /// `W_a(s) + Σ Prob(s, a, s')·v[s']`
    fn action_value(&self, state: usize, action: usize, values: &[W]) -> W {
        let choice = self.choices[state][action].as_ref().expect("enabled action");
        choice
            .successors
            .iter()
            .fold(choice.weight.clone(), |acc, (t, p)| acc.plus(&values[*t].times(p)))
    }

    /// Transition matrix restricted to transient states under `mu`, plus the
    /// weight vector and the transient index map.
    fn policy_system(&self, mu: &MdpPolicy) -> (RationalMatrix, Vec<W>, Vec<usize>) {
        let transient: Vec<usize> = self.transient_states().collect();
        let mut position = vec![usize::MAX; self.states.len()];
        for (i, &s) in transient.iter().enumerate() {
            position[s] = i;
        }
        let mut a = RationalMatrix::zeros(transient.len());
        let mut b = Vec::with_capacity(transient.len());
        for (i, &s) in transient.iter().enumerate() {
            let choice = self.choices[s][mu.choice[s]].as_ref().expect("enabled action");
            for (t, p) in &choice.successors {
                if *t != self.absorbing {
                    a.set(i, position[*t], p.clone());
                }
            }
            b.push(choice.weight.clone());
        }
        (a, b, transient)
    }

    pub fn policy_display<'a>(&'a self, mu: &'a MdpPolicy) -> PolicyDisplay<'a, W> {
        PolicyDisplay { mdp: self, policy: mu }
    }
}

pub struct PolicyDisplay<'a, W> {
    mdp: &'a Mdp<W>,
    policy: &'a MdpPolicy,
}

impl<W: Weight> fmt::Display for PolicyDisplay<'_, W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .mdp
            .transient_states()
            .map(|s| format!("{}->{}", self.mdp.states[s], self.mdp.actions[self.policy.choice[s]]))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Mdp<Rational> {
    /// The same model with constant [`LinearTerm`] weights.
    pub fn to_parametric(&self) -> Pmdp {
        self.map_weights(|w| LinearTerm::constant(w.clone()))
    }
}

impl<W> Mdp<W> {
    fn map_weights<V>(&self, mut f: impl FnMut(&W) -> V) -> Mdp<V> {
        Mdp {
            params: self.params.clone(),
            states: self.states.clone(),
            actions: self.actions.clone(),
            absorbing: self.absorbing,
            choices: self
                .choices
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| {
                            c.as_ref().map(|c| Choice {
                                weight: f(&c.weight),
                                successors: c.successors.clone(),
                            })
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// `M[π]`: every weight evaluated at `pi`; probabilities unchanged.
pub fn instantiate(m: &Pmdp, pi: &Instantiation) -> Result<Mdp<Rational>, ParamError> {
    let mut err = None;
    let out = m.map_weights(|w| match w.evaluate(pi) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            Rational::zero()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn value_determination_unchecked(m: &Mdp<Rational>, mu: &MdpPolicy) -> Result<Vec<Rational>, MdpError> {
    let (a, b, transient) = m.policy_system(mu);
    let solved = linsolve::solve_rational_fixpoint(&a, &b)?;
    let mut v = vec![Rational::zero(); m.num_states()];
    for (i, s) in transient.into_iter().enumerate() {
        v[s] = solved[i].clone();
    }
    Ok(v)
}

/// Expected total weight to absorption under `mu`, per state.
pub fn mdp_vd(m: &Mdp<Rational>, mu: &MdpPolicy) -> Result<Vec<Rational>, MdpError> {
    m.ensure_valid()?;
    m.check_policy(mu)?;
    value_determination_unchecked(m, mu)
}

/// Parametric value of every state under `mu`; each entry is a linear term.
pub fn p_mdp_vd(m: &Pmdp, mu: &MdpPolicy) -> Result<Vec<LinearTerm>, MdpError> {
    m.ensure_valid()?;
    m.check_policy(mu)?;
    p_value_determination_unchecked(m, mu)
}

fn p_value_determination_unchecked(m: &Pmdp, mu: &MdpPolicy) -> Result<Vec<LinearTerm>, MdpError> {
    let (a, b, transient) = m.policy_system(mu);
    let solved = linsolve::solve_affine_fixpoint(&a, &b)?;
    let mut v = vec![LinearTerm::zero(); m.num_states()];
    for (i, s) in transient.into_iter().enumerate() {
        v[s] = solved[i].clone();
    }
    Ok(v)
}

/// One round of policy iteration: the evaluated policy and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpIterate {
    pub policy: MdpPolicy,
    pub values: Vec<Rational>,
}

/// Policy iteration from the lowest-index policy; returns every evaluated
/// policy, the last one being optimal.
pub fn mdp_pi_trace(m: &Mdp<Rational>) -> Result<Vec<MdpIterate>, MdpError> {
    m.ensure_valid()?;
    let mut mu = m.first_policy();
    let mut seen = HashSet::new();
    let mut trace = Vec::new();
    loop {
        if !seen.insert(mu.clone()) {
            return Err(MdpError::PolicyRepeated);
        }
        let v = value_determination_unchecked(m, &mu)?;
        let mut next = mu.clone();
        let mut fixpoint = true;
        for s in m.transient_states() {
            let mut optimum = v[s].clone();
            for a in m.enabled(s) {
                let q = m.action_value(s, a, &v);
                if q < optimum {
                    optimum = q;
                    next.choice[s] = a;
                    fixpoint = false;
                }
            }
        }
        trace.push(MdpIterate { policy: mu, values: v });
        if fixpoint {
            return Ok(trace);
        }
        mu = next;
    }
}

/// Optimal (minimal expected cost) policy and its value vector.
pub fn mdp_pi(m: &Mdp<Rational>) -> Result<(MdpPolicy, Vec<Rational>), MdpError> {
    let last = mdp_pi_trace(m)?.pop().expect("at least one iterate");
    Ok((last.policy, last.values))
}

/// Result of the inverse method on a parametric MDP.
#[derive(Debug, Clone)]
pub struct MdpInverse {
    /// Simplified constraint `K₀`.
    pub constraint: Constraint,
    /// Inequalities as generated, one per non-chosen enabled action.
    pub raw: Vec<Inequality>,
    /// The policy `μ₀`, optimal at the reference instantiation.
    pub policy: MdpPolicy,
    /// Parametric values of `μ₀`.
    pub values: Vec<LinearTerm>,
}

/// Inverse method: computes `μ₀` optimal for `M[π₀]` and a constraint `K₀`
/// with `π₀ ⊨ K₀` such that `μ₀` stays optimal for every `π ⊨ K₀`.
pub fn p_mdp_pi(m: &Pmdp, pi0: &Instantiation) -> Result<MdpInverse, MdpError> {
    m.ensure_valid()?;
    let reference = instantiate(m, pi0)?;
    let (mu0, _) = mdp_pi(&reference)?;
    inverse_for_policy(m, pi0, mu0)
}

/// Like [`p_mdp_pi`] with a caller-supplied `μ₀`. Fails with
/// [`MdpError::OptimalityViolation`] if `μ₀` is not optimal at `π₀`.
pub fn p_mdp_pi_with_policy(m: &Pmdp, pi0: &Instantiation, mu0: MdpPolicy) -> Result<MdpInverse, MdpError> {
    m.ensure_valid()?;
    m.check_policy(&mu0)?;
    instantiate(m, pi0)?;
    inverse_for_policy(m, pi0, mu0)
}

fn inverse_for_policy(m: &Pmdp, pi0: &Instantiation, mu0: MdpPolicy) -> Result<MdpInverse, MdpError> {
    let values = p_value_determination_unchecked(m, &mu0)?;
    let mut raw = Vec::new();
    for s in m.transient_states() {
        for a in m.enabled(s) {
            if a == mu0.choice[s] {
                continue;
            }
            raw.push(Inequality::ge(m.action_value(s, a, &values), values[s].clone()));
        }
    }
    let constraint = param::simplify(raw.iter().cloned()).map_err(|_| MdpError::OptimalityViolation)?;
    if !constraint.satisfies(pi0)? {
        return Err(MdpError::OptimalityViolation);
    }
    Ok(MdpInverse {
        constraint,
        raw,
        policy: mu0,
        values,
    })
}

/// All optimal policies and the component-wise minimal value vector, found
/// by exhaustive enumeration.
pub fn brute_force_optimal(m: &Mdp<Rational>, cap: usize) -> Result<(Vec<Rational>, Vec<MdpPolicy>), MdpError> {
    m.ensure_valid()?;
    let options: Vec<Vec<usize>> = (0..m.num_states()).map(|s| m.enabled(s)).collect();
    let count = options.iter().map(|o| o.len() as u128).product::<u128>();
    if count > cap as u128 {
        return Err(MdpError::TooManyPolicies { count, cap });
    }
    let mut evaluated = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; options.len()];
    loop {
        let mu = MdpPolicy {
            choice: digits.iter().zip(&options).map(|(&d, o)| o[d]).collect(),
        };
        let v = value_determination_unchecked(m, &mu)?;
        evaluated.push((mu, v));
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(select_minimal(evaluated));
            }
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn select_minimal(evaluated: Vec<(MdpPolicy, Vec<Rational>)>) -> (Vec<Rational>, Vec<MdpPolicy>) {
    let n = evaluated[0].1.len();
    let min: Vec<Rational> = (0..n)
        .map(|s| evaluated.iter().map(|(_, v)| &v[s]).min().unwrap().clone())
        .collect();
    let optimal = evaluated
        .into_iter()
        .filter(|(_, v)| *v == min)
        .map(|(mu, _)| mu)
        .collect();
    (min, optimal)
}
