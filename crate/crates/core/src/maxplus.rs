//! Maximal circuit mean of a weighted digraph in max-plus algebra.
//!
//! A [`MaxPlusMatrix`] stores `M[i][j] = w(i, j)` for edges and `ε` (`None`)
//! otherwise. [`max_pi`] is Howard-style policy iteration alternating value
//! determination ([`max_vd`]) and policy improvement ([`max_pimpr`]).
//! [`p_max_pi`] runs the same machinery over linear-term weights and emits a
//! constraint under which the reference optimal circuit stays maximal.
//!
//! All "arbitrary" choices are fixed: circuits are found by walking the policy
//! from the smallest remaining state, the anchor is the smallest state of the
//! circuit with `x := 0`, and improvement ties go to the smallest target.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::param::{self, Constraint, Inequality, Instantiation, LinearTerm, ParamError, ParamSet, Rational};
use crate::weight::Weight;

/// Default bound on the dimension accepted by [`brute_force_mcm`].
pub const DEFAULT_CIRCUIT_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum MaxPlusError {
    #[error("state {state} has no outgoing edge")]
    EmptyRow { state: String },
    #[error("policy picks a missing edge out of state {state}")]
    InvalidPolicy { state: String },
    #[error("graph has more than one final strongly connected class")]
    SeveralFinalClasses,
    #[error("policy iteration did not converge within {0} rounds")]
    NonConvergence(u128),
    #[error("{n} states exceed the circuit enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("reference instantiation violates the synthesized constraint")]
    OptimalityViolation,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("edge ({from}, {to}) defined twice")]
    DuplicateEdge { from: String, to: String },
}

/// Square max-plus matrix; `None` is `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlusMatrix<W> {
    params: ParamSet,
    states: Vec<String>,
    entries: Vec<Option<W>>,
}

pub type PMaxPlusMatrix = MaxPlusMatrix<LinearTerm>;

/// Successor choice per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaxPolicy {
    pub successor: Vec<usize>,
}

impl MaxPolicy {
    pub fn new(successor: Vec<usize>) -> Self {
        MaxPolicy { successor }
    }

    /// Circuits of the functional graph `i ↦ successor[i]`, each listed from
    /// its smallest state, in ascending order of that state.
    pub fn circuits(&self) -> Vec<Vec<usize>> {
        let n = self.successor.len();
        let mut color = vec![0u8; n];
        let mut out = Vec::new();
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = start;
            while color[cur] == 0 {
                color[cur] = 1;
                path.push(cur);
                cur = self.successor[cur];
            }
            if color[cur] == 1 {
                let from = path.iter().position(|&s| s == cur).unwrap();
                let mut c = path[from..].to_vec();
                let m = c.iter().enumerate().min_by_key(|(_, &s)| s).unwrap().0;
                c.rotate_left(m);
                out.push(c);
            }
            for s in path {
                color[s] = 2;
            }
        }
        out.sort();
        out
    }
}

/// Generalized eigenmode `(η, x)`: growth rate and bias per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenmode<W> {
    pub eta: Vec<W>,
    pub x: Vec<W>,
}

/// `(H, X)`, the eigenmode with linear-term entries.
pub type ParamEigenmode = Eigenmode<LinearTerm>;

impl Eigenmode<LinearTerm> {
    pub fn evaluate(&self, pi: &Instantiation) -> Result<Eigenmode<Rational>, ParamError> {
        let eval = |v: &[LinearTerm]| v.iter().map(|t| t.evaluate(pi)).collect::<Result<Vec<_>, _>>();
        Ok(Eigenmode {
            eta: eval(&self.eta)?,
            x: eval(&self.x)?,
        })
    }
}

impl<W: Weight> MaxPlusMatrix<W> {
    /// All-`ε` matrix over `states`.
    pub fn new(params: ParamSet, states: Vec<String>) -> Self {
        let n = states.len();
        MaxPlusMatrix {
            params,
            states,
            entries: vec![None; n * n],
        }
    }

    pub fn from_rows(params: ParamSet, rows: Vec<Vec<Option<W>>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        MaxPlusMatrix {
            params,
            states: (1..=n).map(|i| i.to_string()).collect(),
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&W> {
        self.entries[i * self.dim() + j].as_ref()
    }

    pub fn set(&mut self, i: usize, j: usize, w: Option<W>) {
        let n = self.dim();
        self.entries[i * n + j] = w;
    }

    /// Outgoing edges of `i` in ascending target order.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = (usize, &W)> {
        let n = self.dim();
        self.entries[i * n..(i + 1) * n]
            .iter()
            .enumerate()
            .filter_map(|(j, w)| w.as_ref().map(|w| (j, w)))
    }

    /// All edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &W)> {
        (0..self.dim()).flat_map(move |i| self.successors(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn validate(&self) -> Result<(), MaxPlusError> {
        for i in 0..self.dim() {
            if self.successors(i).next().is_none() {
                return Err(MaxPlusError::EmptyRow {
                    state: self.states[i].clone(),
                });
            }
        }
        Ok(())
    }

    fn reachable(&self, from: usize, forward: bool) -> Vec<bool> {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for (v, seen_v) in seen.iter_mut().enumerate() {
                let edge = if forward { self.get(u, v) } else { self.get(v, u) };
                if edge.is_some() && !*seen_v {
                    *seen_v = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.dim() == 0
            || (self.reachable(0, true).into_iter().all(|b| b) && self.reachable(0, false).into_iter().all(|b| b))
    }

    /// Whether the graph has a single final strongly connected class, i.e.
    /// some state is reachable from every state.
    pub fn has_single_final_class(&self) -> bool {
        let n = self.dim();
        if n == 0 {
            return true;
        }
        let mut v = 0;
        loop {
            let from_v = self.reachable(v, true);
            let to_v = self.reachable(v, false);
            match (0..n).find(|&u| from_v[u] && !to_v[u]) {
                Some(u) => v = u,
                None => return to_v.into_iter().all(|b| b),
            }
        }
    }

    /// Smallest-index successor of every state.
    pub fn first_policy(&self) -> MaxPolicy {
        MaxPolicy::new(
            (0..self.dim())
                .map(|i| self.successors(i).next().map(|(j, _)| j).unwrap_or(i))
                .collect(),
        )
    }

    fn check_policy(&self, mu: &MaxPolicy) -> Result<(), MaxPlusError> {
        for i in 0..self.dim() {
            let ok = mu
                .successor
                .get(i)
                .is_some_and(|&j| j < self.dim() && self.get(i, j).is_some());
            if !ok {
                return Err(MaxPlusError::InvalidPolicy {
                    state: self.states[i].clone(),
                });
            }
        }
        Ok(())
    }

    /// Number of distinct policies, saturating.
    pub fn policy_count(&self) -> u128 {
        (0..self.dim()).fold(1u128, |acc, i| acc.saturating_mul(self.successors(i).count() as u128))
    }

    fn edge_weight(&self, i: usize, j: usize) -> &W {
        self.get(i, j).expect("policy edge exists")
    }
}

impl<W> MaxPlusMatrix<W> {
    fn map_entries<V>(&self, mut f: impl FnMut(&W) -> V) -> MaxPlusMatrix<V> {
        MaxPlusMatrix {
            params: self.params.clone(),
            states: self.states.clone(),
            entries: self.entries.iter().map(|e| e.as_ref().map(&mut f)).collect(),
        }
    }
}

impl MaxPlusMatrix<Rational> {
    pub fn to_parametric(&self) -> PMaxPlusMatrix {
        self.map_entries(|w| LinearTerm::constant(w.clone()))
    }

    /// Mean weight of a circuit given by its state sequence.
    pub fn circuit_mean(&self, circuit: &[usize]) -> Rational {
        let total: Rational = (0..circuit.len())
            .map(|k| self.edge_weight(circuit[k], circuit[(k + 1) % circuit.len()]).clone())
            .sum();
        total / Rational::from_integer(BigInt::from(circuit.len()))
    }
}

/// Text dump in matrix layout, `eps` for missing edges.
impl<W> MaxPlusMatrix<W> {
    pub fn dump(&self, render: impl Fn(&W) -> String) -> String {
        let n = self.states.len();
        let cells: Vec<String> = self
            .entries
            .iter()
            .map(|e| e.as_ref().map(&render).unwrap_or_else(|| "eps".to_string()))
            .collect();
        let width = cells.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:>width$}", cells[i * n + j])).collect();
            out.push_str(&format!("[ {} ]\n", row.join("  ")));
        }
        out
    }
}

/// `M[π]`; `ε` entries stay `ε`.
pub fn instantiate(m: &PMaxPlusMatrix, pi: &Instantiation) -> Result<MaxPlusMatrix<Rational>, ParamError> {
    let mut err = None;
    let out = m.map_entries(|w| match w.evaluate(pi) {
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

/// Value determination over any weight type: finds a circuit of the policy
/// graph, sets `η̄` to its mean, anchors `x := 0` at its smallest state,
/// propagates `x_j = w(j, μ(j)) − η̄ + x_μ(j)` to every state with access to
/// the anchor, then repeats on the states left over.
fn value_determination<W: Weight>(m: &MaxPlusMatrix<W>, mu: &MaxPolicy) -> Eigenmode<W> {
    value_determination_anchored(m, mu, &W::origin())
}

fn value_determination_anchored<W: Weight>(m: &MaxPlusMatrix<W>, mu: &MaxPolicy, anchor_value: &W) -> Eigenmode<W> {
    let n = m.dim();
    let succ = &mu.successor;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &j) in succ.iter().enumerate() {
        preds[j].push(k);
    }
    let mut eta: Vec<Option<W>> = vec![None; n];
    let mut x: Vec<Option<W>> = vec![None; n];
    let mut remaining = vec![true; n];

    while let Some(start) = (0..n).find(|&i| remaining[i]) {
        let mut position = vec![usize::MAX; n];
        let mut path = Vec::new();
        let mut cur = start;
        while position[cur] == usize::MAX {
            position[cur] = path.len();
            path.push(cur);
            cur = succ[cur];
        }
        let circuit = &path[position[cur]..];
        let anchor = *circuit.iter().min().unwrap();
        let total = circuit
            .iter()
            .fold(W::origin(), |acc, &s| acc.plus(m.edge_weight(s, succ[s])));
        let mean = total.times(&(Rational::from_integer(BigInt::from(circuit.len()))).recip());

        eta[anchor] = Some(mean.clone());
        x[anchor] = Some(anchor_value.clone());
        remaining[anchor] = false;
        // depth-first over the reversed policy graph, smaller states first;
        // a state is reached only after its successor has its value
        let mut stack: Vec<usize> = preds[anchor].iter().rev().copied().collect();
        while let Some(j) = stack.pop() {
            if !remaining[j] {
                continue;
            }
            remaining[j] = false;
            let next = succ[j];
            let xj = m
                .edge_weight(j, next)
                .minus(&mean)
                .plus(x[next].as_ref().expect("successor visited first"));
            eta[j] = Some(mean.clone());
            x[j] = Some(xj);
            stack.extend(preds[j].iter().rev().copied().filter(|&k| remaining[k]));
        }
    }
    Eigenmode {
        eta: eta.into_iter().map(|v| v.unwrap()).collect(),
        x: x.into_iter().map(|v| v.unwrap()).collect(),
    }
}

/// Eigenmode of `M^μ`.
pub fn max_vd(m: &MaxPlusMatrix<Rational>, mu: &MaxPolicy) -> Result<Eigenmode<Rational>, MaxPlusError> {
    m.check_policy(mu)?;
    Ok(value_determination(m, mu))
}

/// Like [`max_vd`], with every anchor set to `anchor_value` instead of 0.
pub fn max_vd_anchored(
    m: &MaxPlusMatrix<Rational>,
    mu: &MaxPolicy,
    anchor_value: &Rational,
) -> Result<Eigenmode<Rational>, MaxPlusError> {
    m.check_policy(mu)?;
    Ok(value_determination_anchored(m, mu, anchor_value))
}

/// Parametric eigenmode `(H, X)` of `M^μ`, with the same choices as [`max_vd`].
pub fn p_max_vd(m: &PMaxPlusMatrix, mu: &MaxPolicy) -> Result<ParamEigenmode, MaxPlusError> {
    m.check_policy(mu)?;
    Ok(value_determination(m, mu))
}

/// The sets computed by policy improvement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovementSets {
    /// States with a successor of larger `η`.
    pub j: Vec<usize>,
    /// Per state, the successors of maximal `η`.
    pub k: Vec<Vec<usize>>,
    /// States where some successor in `K(i)` strictly improves the bias.
    pub i: Vec<usize>,
    /// Per state, the successors in `K(i)` maximizing `w − η_j + x_j`.
    pub l: Vec<Vec<usize>>,
}

pub fn improvement_sets(m: &MaxPlusMatrix<Rational>, em: &Eigenmode<Rational>) -> ImprovementSets {
    let n = m.dim();
    let mut sets = ImprovementSets {
        j: Vec::new(),
        k: vec![Vec::new(); n],
        i: Vec::new(),
        l: vec![Vec::new(); n],
    };
    for i in 0..n {
        let best_eta = m.successors(i).map(|(j, _)| &em.eta[j]).max().expect("non-empty row");
        if best_eta > &em.eta[i] {
            sets.j.push(i);
        }
        sets.k[i] = m
            .successors(i)
            .filter(|(j, _)| &em.eta[*j] == best_eta)
            .map(|(j, _)| j)
            .collect();
        let bias = |j: usize| m.edge_weight(i, j) - &em.eta[j] + &em.x[j];
        let best_bias = sets.k[i].iter().map(|&j| bias(j)).max().unwrap();
        if best_bias > em.x[i] {
            sets.i.push(i);
        }
        sets.l[i] = sets.k[i].iter().copied().filter(|&j| bias(j) == best_bias).collect();
    }
    sets
}

/// Result of one improvement step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Improvement {
    /// `I = J = ∅`: the eigenmode is an eigenmode of the whole matrix.
    Fixpoint,
    /// `J ≠ ∅`: states in `J` move to a successor of larger `η`.
    Eta(MaxPolicy),
    /// `J = ∅, I ≠ ∅`: states in `I` move to a successor of larger bias.
    Bias(MaxPolicy),
}

pub fn max_pimpr(m: &MaxPlusMatrix<Rational>, mu: &MaxPolicy, em: &Eigenmode<Rational>) -> Improvement {
    let sets = improvement_sets(m, em);
    let mut next = mu.clone();
    if !sets.j.is_empty() {
        for &i in &sets.j {
            next.successor[i] = sets.k[i][0];
        }
        Improvement::Eta(next)
    } else if !sets.i.is_empty() {
        for &i in &sets.i {
            next.successor[i] = sets.l[i][0];
        }
        Improvement::Bias(next)
    } else {
        Improvement::Fixpoint
    }
}

/// One round of max-plus policy iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxIterate {
    pub policy: MaxPolicy,
    pub eigenmode: Eigenmode<Rational>,
    pub improvement: Improvement,
}

/// Policy iteration from `initial`; every evaluated policy in order, the last
/// one at its fixpoint.
pub fn max_pi_trace(m: &MaxPlusMatrix<Rational>, initial: MaxPolicy) -> Result<Vec<MaxIterate>, MaxPlusError> {
    m.validate()?;
    m.check_policy(&initial)?;
    let cap = m.policy_count();
    let mut seen = HashSet::new();
    let mut mu = initial;
    let mut trace = Vec::new();
    loop {
        if !seen.insert(mu.clone()) || seen.len() as u128 > cap {
            return Err(MaxPlusError::NonConvergence(cap));
        }
        let em = value_determination(m, &mu);
        let improvement = max_pimpr(m, &mu, &em);
        let next = match &improvement {
            Improvement::Fixpoint => None,
            Improvement::Eta(p) | Improvement::Bias(p) => Some(p.clone()),
        };
        trace.push(MaxIterate {
            policy: mu,
            eigenmode: em,
            improvement,
        });
        match next {
            Some(p) => mu = p,
            None => return Ok(trace),
        }
    }
}

pub fn max_pi(
    m: &MaxPlusMatrix<Rational>,
    initial: MaxPolicy,
) -> Result<(Eigenmode<Rational>, MaxPolicy), MaxPlusError> {
    let last = max_pi_trace(m, initial)?.pop().expect("at least one iterate");
    Ok((last.eigenmode, last.policy))
}

/// An inequality of `K₀` together with the edge that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInequality {
    pub edge: (usize, usize),
    pub inequality: Inequality,
}

#[derive(Debug, Clone)]
pub struct MaxInverse {
    pub constraint: Constraint,
    pub raw: Vec<GeneratedInequality>,
    pub policy: MaxPolicy,
    pub eigenmode: Eigenmode<Rational>,
    pub param_eigenmode: ParamEigenmode,
}

/// Inverse method for the maximal circuit mean. Every state of `M` must
/// reach a common final class; policy iteration on `M[π₀]` starts from the smallest-index
/// successor policy.
pub fn p_max_pi(m: &PMaxPlusMatrix, pi0: &Instantiation) -> Result<MaxInverse, MaxPlusError> {
    m.validate()?;
    if !m.has_single_final_class() {
        return Err(MaxPlusError::SeveralFinalClasses);
    }
    let reference = instantiate(m, pi0)?;
    let (em, mu0) = max_pi(&reference, reference.first_policy())?;
    let pem = value_determination(m, &mu0);

    let mut raw = Vec::new();
    for (i, j, w) in m.edges() {
        let (eta_i, eta_j) = (&em.eta[i], &em.eta[j]);
        let (h_i, h_j) = (pem.eta[i].clone(), pem.eta[j].clone());
        let growth = if eta_j > eta_i {
            Inequality::gt(h_j.clone(), h_i)
        } else {
            Inequality::le(h_j.clone(), h_i)
        };
        raw.push(GeneratedInequality {
            edge: (i, j),
            inequality: growth,
        });
        if eta_j <= eta_i {
            let bias = &(w - &h_j) + &pem.x[j];
            let numeric = reference.edge_weight(i, j) - eta_j + &em.x[j];
            let ineq = if numeric > em.x[i] {
                Inequality::gt(bias, pem.x[i].clone())
            } else {
                Inequality::le(bias, pem.x[i].clone())
            };
            raw.push(GeneratedInequality {
                edge: (i, j),
                inequality: ineq,
            });
        }
    }
    let constraint =
        param::simplify(raw.iter().map(|g| g.inequality.clone())).map_err(|_| MaxPlusError::OptimalityViolation)?;
    if !constraint.satisfies(pi0)? {
        return Err(MaxPlusError::OptimalityViolation);
    }
    Ok(MaxInverse {
        constraint,
        raw,
        policy: mu0,
        eigenmode: em,
        param_eigenmode: pem,
    })
}

/// Maximal circuit mean by enumerating every simple circuit, with all
/// circuits attaining it (each listed from its smallest state).
pub fn brute_force_mcm(m: &MaxPlusMatrix<Rational>, cap: usize) -> Result<(Rational, Vec<Vec<usize>>), MaxPlusError> {
    let n = m.dim();
    if n > cap {
        return Err(MaxPlusError::TooLarge { n, cap });
    }
    m.validate()?;
    let mut best: Option<(Rational, Vec<Vec<usize>>)> = None;
    let mut record = |circuit: &[usize]| {
        let mean = m.circuit_mean(circuit);
        match &mut best {
            Some((b, cs)) if *b == mean => cs.push(circuit.to_vec()),
            Some((b, _)) if *b > mean => {}
            _ => best = Some((mean, vec![circuit.to_vec()])),
        }
    };
    for start in 0..n {
        // simple paths from `start` through larger states only
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut cursors = vec![0usize];
        while let Some(cursor) = cursors.last_mut() {
            let u = *path.last().unwrap();
            let next = (*cursor..n).find(|&v| m.get(u, v).is_some() && (v == start || (v > start && !on_path[v])));
            match next {
                Some(v) => {
                    *cursor = v + 1;
                    if v == start {
                        record(&path);
                    } else {
                        path.push(v);
                        on_path[v] = true;
                        cursors.push(0);
                    }
                }
                None => {
                    cursors.pop();
                    let u = path.pop().unwrap();
                    on_path[u] = false;
                }
            }
        }
    }
    let (rho, mut circuits) = best.expect("every state has an outgoing edge, so a circuit exists");
    circuits.sort();
    Ok((rho, circuits))
}

impl fmt::Display for MaxPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.successor.iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}
