#![allow(dead_code)]

use num_bigint::BigInt;
use polypol::maxplus::{MaxPlusMatrix, PMaxPlusMatrix};
use polypol::mdp::{Mdp, Pmdp};
use polypol::param::{Constraint, Instantiation, LinearTerm, ParamId, ParamSet, Rational};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A rational with a small denominator in roughly `[lo, hi]`.
pub fn random_rational(rng: &mut TestRng, lo: i64, hi: i64) -> Rational {
    let den = rng.gen_range(1..=6);
    rat(rng.gen_range(lo * den..=hi * den), den)
}

pub fn param_names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// Affine term with a few nonzero coefficients.
pub fn random_term(rng: &mut TestRng, params: &ParamSet) -> LinearTerm {
    let mut coeffs: Vec<(ParamId, Rational)> = Vec::new();
    for p in params.ids() {
        if rng.gen_bool(0.5) {
            coeffs.push((p, rat(rng.gen_range(-3..=3), rng.gen_range(1..=2))));
        }
    }
    LinearTerm::from_parts(coeffs, random_rational(rng, -4, 8))
}

pub fn random_instantiation(rng: &mut TestRng, params: &ParamSet, lo: i64, hi: i64) -> Instantiation {
    Instantiation::from_pairs(params.ids().map(|p| (p, random_rational(rng, lo, hi))))
}

/// Parametric MDP with up to `max_transient` transient states plus one
/// absorbing state (the last), up to `max_actions` real actions and a
/// separate self-loop action. Every action from state `s` reaches a state of
/// larger index with positive probability, so every policy terminates.
pub fn random_pmdp(rng: &mut TestRng, max_transient: usize, max_actions: usize, max_params: usize) -> Pmdp {
    let transient = rng.gen_range(1..=max_transient);
    let n = transient + 1;
    let params = ParamSet::new(param_names("p", rng.gen_range(1..=max_params))).unwrap();
    let mut actions = param_names("a", max_actions);
    actions.push("stay".into());
    let mut m = Mdp::new(params.clone(), param_names("s", n), actions, transient);
    for s in 0..transient {
        let mut enabled: Vec<usize> = (0..max_actions).filter(|_| rng.gen_bool(0.6)).collect();
        if enabled.is_empty() {
            enabled.push(rng.gen_range(0..max_actions));
        }
        for a in enabled {
            let forward = rng.gen_range(s + 1..n);
            let mut support = vec![forward];
            for t in 0..n {
                if t != forward && rng.gen_bool(0.35) {
                    support.push(t);
                }
            }
            let raw: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=5)).collect();
            let total: i64 = raw.iter().sum();
            let to = support.iter().zip(&raw).map(|(&t, &r)| (t, rat(r, total))).collect();
            m.add_transition(s, a, random_term(rng, &params), to).unwrap();
        }
    }
    m.add_transition(transient, max_actions, LinearTerm::zero(), vec![(transient, rat(1, 1))])
        .unwrap();
    m.validate().expect("generator produces valid models");
    m
}

/// Strongly connected parametric matrix of dimension at most `max_n`: a
/// random Hamiltonian circuit plus extra edges. Half of the instances use
/// one parameter per edge, the others share a few parameters.
pub fn random_pmatrix(rng: &mut TestRng, max_n: usize) -> PMaxPlusMatrix {
    let n = rng.gen_range(1..=max_n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = vec![vec![false; n]; n];
    for k in 0..n {
        edges[order[k]][order[(k + 1) % n]] = true;
    }
    for row in edges.iter_mut() {
        for e in row.iter_mut() {
            if rng.gen_bool(0.35) {
                *e = true;
            }
        }
    }
    let per_edge = rng.gen_bool(0.5);
    let count = edges.iter().flatten().filter(|&&e| e).count();
    let params = if per_edge {
        ParamSet::new(param_names("w", count)).unwrap()
    } else {
        ParamSet::new(param_names("q", rng.gen_range(1..=3))).unwrap()
    };
    let states = (1..=n).map(|i| i.to_string()).collect();
    let mut m = MaxPlusMatrix::new(params.clone(), states);
    let present = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| edges[i][j]);
    for (k, (i, j)) in present.enumerate() {
        let w = if per_edge {
            LinearTerm::param(ParamId(k))
        } else {
            random_term(rng, &params)
        };
        m.set(i, j, Some(w));
    }
    m
}

/// Up to `want` instantiations satisfying `k`, drawn from a box of radius
/// `radius` around `center`; a rejected point is pulled halfway toward the
/// center a few times before it is discarded.
pub fn sample_satisfying(
    rng: &mut TestRng,
    k: &Constraint,
    params: &ParamSet,
    center: &Instantiation,
    radius: i64,
    want: usize,
    max_draws: usize,
) -> Vec<Instantiation> {
    let mut out = Vec::new();
    for _ in 0..max_draws {
        if out.len() == want {
            break;
        }
        let offset: Vec<(ParamId, Rational)> = params
            .ids()
            .map(|p| (p, random_rational(rng, -radius, radius)))
            .collect();
        let mut scale = Rational::from_integer(1.into());
        for _ in 0..6 {
            let pi = Instantiation::from_pairs(offset.iter().map(|(p, d)| (*p, center.get(*p).unwrap() + d * &scale)));
            if k.satisfies(&pi).unwrap() {
                out.push(pi);
                break;
            }
            scale /= Rational::from_integer(2.into());
        }
    }
    out
}

pub fn oracle_constraint(text: &str) -> (ParamSet, Constraint) {
    polypol::io::parse_constraint(text).unwrap()
}
