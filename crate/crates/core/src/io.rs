//! Text formats: linear terms, instantiations, constraints, and the JSON
//! model documents for parametric MDPs (`"pmdp"`) and weighted digraphs
//! (`"pdwg"`).
//!
//! Term grammar:
//!
//! ```text
//! term     := addend (('+' | '-') addend)*
//! addend   := rational ('*' ident)? | ident
//! rational := integer ('/' positive-integer)?
//! ```
//!
//! A constraint file holds one normalized inequality per line
//! (`term <= 0` or `term < 0`); lines starting with `#` are comments, and a
//! `# parameters: a b c` header fixes the parameter order. No inequality
//! means `True`.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maxplus::{MaxPlusMatrix, PMaxPlusMatrix};
use crate::mdp::{Mdp, Pmdp};
use crate::param::{
    simplify, Constraint, Inequality, Instantiation, LinearTerm, ParamError, ParamId, ParamSet, Rational, Relation,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },
    #[error("invalid model: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Param(#[from] ParamError),
}

fn syntax(location: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Syntax {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, (usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Token::Plus)),
            '-' => out.push((start, Token::Minus)),
            '*' => out.push((start, Token::Star)),
            '/' => out.push((start, Token::Slash)),
            '0'..='9' => {
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..=i].iter().collect();
                out.push((start, Token::Int(digits.parse().unwrap())));
            }
            c if c.is_alphabetic() || c == '_' => {
                while i + 1 < chars.len() && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_') {
                    i += 1;
                }
                out.push((start, Token::Ident(chars[start..=i].iter().collect())));
            }
            other => return Err((start, format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    Ok(out)
}

struct TermParser<'a, F> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    resolve: &'a mut F,
}

impl<F: FnMut(&str) -> Result<ParamId, String>> TermParser<'_, F> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, (usize, String)> {
        Err((self.offset(), msg.into()))
    }

    fn rational(&mut self, negative: bool) -> Result<Rational, (usize, String)> {
        let Some(Token::Int(n)) = self.peek().cloned() else {
            return self.fail("expected a number");
        };
        self.pos += 1;
        let mut value = Rational::from_integer(n);
        if self.peek() == Some(&Token::Slash) {
            self.pos += 1;
            let Some(Token::Int(d)) = self.peek().cloned() else {
                return self.fail("expected a denominator");
            };
            if d.is_zero() {
                return self.fail("zero denominator");
            }
            self.pos += 1;
            value /= Rational::from_integer(d);
        }
        Ok(if negative { -value } else { value })
    }

    fn addend(&mut self, negative: bool) -> Result<LinearTerm, (usize, String)> {
        match self.peek().cloned() {
            Some(Token::Ident(name)) => {
                let at = self.offset();
                self.pos += 1;
                let id = (self.resolve)(&name).map_err(|m| (at, m))?;
                let sign = if negative { -1 } else { 1 };
                Ok(LinearTerm::monomial(Rational::from_integer(BigInt::from(sign)), id))
            }
            Some(Token::Int(_)) => {
                let coeff = self.rational(negative)?;
                if self.peek() == Some(&Token::Star) {
                    self.pos += 1;
                    let at = self.offset();
                    let Some(Token::Ident(name)) = self.peek().cloned() else {
                        return self.fail("expected a parameter name after `*`");
                    };
                    self.pos += 1;
                    let id = (self.resolve)(&name).map_err(|m| (at, m))?;
                    Ok(LinearTerm::monomial(coeff, id))
                } else {
                    Ok(LinearTerm::constant(coeff))
                }
            }
            _ => self.fail("expected a number or a parameter name"),
        }
    }

    fn term(&mut self) -> Result<LinearTerm, (usize, String)> {
        let mut negative = false;
        if self.peek() == Some(&Token::Minus) {
            negative = true;
            self.pos += 1;
        }
        let mut acc = self.addend(negative)?;
        loop {
            let negative = match self.peek() {
                Some(Token::Plus) => false,
                Some(Token::Minus) => true,
                None => return Ok(acc),
                _ => return self.fail("expected `+` or `-`"),
            };
            self.pos += 1;
            let next = self.addend(negative)?;
            acc = &acc + &next;
        }
    }
}

fn parse_term_with<F>(text: &str, resolve: &mut F) -> Result<LinearTerm, (usize, String)>
where
    F: FnMut(&str) -> Result<ParamId, String>,
{
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err((0, "empty term".into()));
    }
    let mut parser = TermParser {
        tokens,
        pos: 0,
        end: text.len(),
        resolve,
    };
    parser.term()
}

/// Parses a term over declared parameters; unknown names are an error.
pub fn parse_term(text: &str, params: &ParamSet) -> Result<LinearTerm, IoError> {
    parse_term_with(text, &mut |name: &str| {
        params.id(name).ok_or_else(|| format!("unknown parameter `{name}`"))
    })
    .map_err(|(col, msg)| syntax(format!("column {}", col + 1), msg))
}

/// Parses a rational literal such as `7`, `-1/2` or `4/5`.
pub fn parse_rational(text: &str) -> Result<Rational, IoError> {
    let t = parse_term_with(text.trim(), &mut |name: &str| Err(format!("unexpected name `{name}`")))
        .map_err(|(col, msg)| syntax(format!("column {}", col + 1), msg))?;
    match t.as_constant() {
        Some(c) => Ok(c.clone()),
        None => Err(syntax("column 1", "expected a rational")),
    }
}

/// Parses `name=rational` pairs separated by commas and/or newlines;
/// `#` starts a comment line.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, Rational)>, IoError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for pair in line.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let location = format!("line {}", lineno + 1);
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| syntax(location.clone(), format!("expected name=value, got `{pair}`")))?;
            let value = parse_rational(value).map_err(|e| match e {
                IoError::Syntax { message, .. } => syntax(location.clone(), message),
                other => other,
            })?;
            out.push((name.trim().to_string(), value));
        }
    }
    Ok(out)
}

/// Parses an instantiation and binds it to `params`.
pub fn parse_instantiation(text: &str, params: &ParamSet) -> Result<Instantiation, IoError> {
    let mut pi = Instantiation::new();
    for (name, value) in parse_assignments(text)? {
        let id = params
            .id(&name)
            .ok_or(IoError::Param(ParamError::UnknownParameter(name)))?;
        pi.set(id, value);
    }
    Ok(pi)
}

pub fn render_instantiation(pi: &Instantiation, params: &ParamSet) -> String {
    pi.iter()
        .map(|(p, v)| format!("{}={}", params.name(p), v))
        .collect::<Vec<_>>()
        .join(",")
}

const PARAMETERS_HEADER: &str = "# parameters:";

/// One normalized inequality per line, after a `# parameters:` header.
pub fn render_constraint(k: &Constraint, params: &ParamSet) -> String {
    let mut out = String::from(PARAMETERS_HEADER);
    for name in params.names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for ineq in k {
        writeln!(out, "{}", ineq.display(params)).unwrap();
    }
    out
}

/// Parses constraint text. Parameter order comes from the header when
/// present, then from first appearance. Each line is `term op term` with
/// `op` one of `<=`, `<`, `>=`, `>`.
pub fn parse_constraint(text: &str) -> Result<(ParamSet, Constraint), IoError> {
    let mut params = ParamSet::default();
    let mut inequalities = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let location = |col: usize| format!("line {}, column {}", lineno + 1, col + 1);
        if let Some(rest) = line.strip_prefix(PARAMETERS_HEADER) {
            for name in rest.split_whitespace() {
                if params.id(name).is_some() {
                    return Err(IoError::Param(ParamError::DuplicateParameter(name.to_string())));
                }
                params.intern(name);
            }
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (at, op_len, rel, flipped) = find_relation(line).ok_or_else(|| syntax(location(0), "missing relation"))?;
        let mut resolve = |name: &str| Ok(params.intern(name));
        let lhs = parse_term_with(&line[..at], &mut resolve).map_err(|(c, m)| syntax(location(c), m))?;
        let rhs_start = at + op_len;
        let rhs =
            parse_term_with(&line[rhs_start..], &mut resolve).map_err(|(c, m)| syntax(location(rhs_start + c), m))?;
        inequalities.push(if flipped {
            Inequality::new(rhs, rel, lhs)
        } else {
            Inequality::new(lhs, rel, rhs)
        });
    }
    let k = simplify(inequalities)?;
    Ok((params, k))
}

fn find_relation(line: &str) -> Option<(usize, usize, Relation, bool)> {
    let at = line.find(['<', '>'])?;
    let bytes = line.as_bytes();
    let non_strict = bytes.get(at + 1) == Some(&b'=');
    let rel = if non_strict { Relation::Le } else { Relation::Lt };
    Some((at, if non_strict { 2 } else { 1 }, rel, bytes[at] == b'>'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDoc {
    pub state: String,
    pub prob: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub action: String,
    pub weight: String,
    pub to: Vec<TargetDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmdpDoc {
    pub parameters: Vec<String>,
    pub states: Vec<String>,
    pub absorbing: String,
    pub actions: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdwgDoc {
    pub parameters: Vec<String>,
    pub states: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

/// A model file as written on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelDocument {
    Pmdp(PmdpDoc),
    Pdwg(PdwgDoc),
}

/// A parsed and validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Pmdp(Pmdp),
    Pdwg(PMaxPlusMatrix),
}

impl Model {
    pub fn params(&self) -> &ParamSet {
        match self {
            Model::Pmdp(m) => m.params(),
            Model::Pdwg(m) => m.params(),
        }
    }
}

fn unique_names(kind: &str, names: &[String], errors: &mut Vec<String>) {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            errors.push(format!("{kind}: duplicate name `{n}`"));
        }
    }
}

fn lookup(kind: &str, field: &str, names: &[String], name: &str, errors: &mut Vec<String>) -> Option<usize> {
    let found = names.iter().position(|n| n == name);
    if found.is_none() {
        errors.push(format!("{field}: unknown {kind} `{name}`"));
    }
    found
}

fn field_term(field: &str, text: &str, params: &ParamSet, errors: &mut Vec<String>) -> Option<LinearTerm> {
    parse_term(text, params)
        .map_err(|e| errors.push(format!("{field}: {e}")))
        .ok()
}

fn pmdp_from_doc(doc: &PmdpDoc) -> Result<Pmdp, IoError> {
    let mut errors = Vec::new();
    unique_names("parameters", &doc.parameters, &mut errors);
    unique_names("states", &doc.states, &mut errors);
    unique_names("actions", &doc.actions, &mut errors);
    if !errors.is_empty() {
        return Err(IoError::Validation(errors));
    }
    let params = ParamSet::new(doc.parameters.iter().cloned())?;
    let Some(absorbing) = lookup("state", "absorbing", &doc.states, &doc.absorbing, &mut errors) else {
        return Err(IoError::Validation(errors));
    };
    let mut m = Mdp::new(params.clone(), doc.states.clone(), doc.actions.clone(), absorbing);
    for (k, t) in doc.transitions.iter().enumerate() {
        let field = format!("transitions[{k}]");
        let from = lookup("state", &format!("{field}.from"), &doc.states, &t.from, &mut errors);
        let action = lookup(
            "action",
            &format!("{field}.action"),
            &doc.actions,
            &t.action,
            &mut errors,
        );
        let weight = field_term(&format!("{field}.weight"), &t.weight, &params, &mut errors);
        let mut to = Vec::new();
        for (q, target) in t.to.iter().enumerate() {
            let tf = format!("{field}.to[{q}]");
            let state = lookup("state", &format!("{tf}.state"), &doc.states, &target.state, &mut errors);
            let prob = parse_rational(&target.prob)
                .map_err(|e| errors.push(format!("{tf}.prob: {e}")))
                .ok();
            if let (Some(s), Some(p)) = (state, prob) {
                to.push((s, p));
            }
        }
        if let (Some(from), Some(action), Some(weight)) = (from, action, weight) {
            if let Err(e) = m.add_transition(from, action, weight, to) {
                errors.push(format!("{field}: {e}"));
            }
        }
    }
    if !errors.is_empty() {
        return Err(IoError::Validation(errors));
    }
    m.validate()
        .map_err(|vs| IoError::Validation(vs.iter().map(|v| v.to_string()).collect()))?;
    Ok(m)
}

fn pdwg_from_doc(doc: &PdwgDoc) -> Result<PMaxPlusMatrix, IoError> {
    let mut errors = Vec::new();
    unique_names("parameters", &doc.parameters, &mut errors);
    unique_names("states", &doc.states, &mut errors);
    if !errors.is_empty() {
        return Err(IoError::Validation(errors));
    }
    let params = ParamSet::new(doc.parameters.iter().cloned())?;
    let mut m = MaxPlusMatrix::new(params.clone(), doc.states.clone());
    for (k, e) in doc.edges.iter().enumerate() {
        let field = format!("edges[{k}]");
        let from = lookup("state", &format!("{field}.from"), &doc.states, &e.from, &mut errors);
        let to = lookup("state", &format!("{field}.to"), &doc.states, &e.to, &mut errors);
        let weight = field_term(&format!("{field}.weight"), &e.weight, &params, &mut errors);
        if let (Some(i), Some(j), Some(w)) = (from, to, weight) {
            if m.get(i, j).is_some() {
                errors.push(format!("{field}: edge {} -> {} defined twice", e.from, e.to));
            }
            m.set(i, j, Some(w));
        }
    }
    if !errors.is_empty() {
        return Err(IoError::Validation(errors));
    }
    m.validate().map_err(|e| IoError::Validation(vec![e.to_string()]))?;
    Ok(m)
}

/// Parses and validates a JSON model document.
pub fn parse_model(text: &str) -> Result<Model, IoError> {
    let doc: ModelDocument = serde_json::from_str(text)
        .map_err(|e| syntax(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    match &doc {
        ModelDocument::Pmdp(d) => pmdp_from_doc(d).map(Model::Pmdp),
        ModelDocument::Pdwg(d) => pdwg_from_doc(d).map(Model::Pdwg),
    }
}

fn term_string(t: &LinearTerm, params: &ParamSet) -> String {
    t.display(params).to_string()
}

pub fn model_to_document(model: &Model) -> ModelDocument {
    match model {
        Model::Pmdp(m) => {
            let params = m.params();
            let mut transitions = Vec::new();
            for s in 0..m.num_states() {
                for a in m.enabled(s) {
                    let c = m.choice(s, a).unwrap();
                    transitions.push(TransitionDoc {
                        from: m.states()[s].clone(),
                        action: m.actions()[a].clone(),
                        weight: term_string(&c.weight, params),
                        to: c
                            .successors
                            .iter()
                            .map(|(t, p)| TargetDoc {
                                state: m.states()[*t].clone(),
                                prob: p.to_string(),
                            })
                            .collect(),
                    });
                }
            }
            ModelDocument::Pmdp(PmdpDoc {
                parameters: params.names().to_vec(),
                states: m.states().to_vec(),
                absorbing: m.states()[m.absorbing()].clone(),
                actions: m.actions().to_vec(),
                transitions,
            })
        }
        Model::Pdwg(m) => ModelDocument::Pdwg(PdwgDoc {
            parameters: m.params().names().to_vec(),
            states: m.states().to_vec(),
            edges: m
                .edges()
                .map(|(i, j, w)| EdgeDoc {
                    from: m.states()[i].clone(),
                    to: m.states()[j].clone(),
                    weight: term_string(w, m.params()),
                })
                .collect(),
        }),
    }
}

pub fn render_model(model: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&model_to_document(model)).expect("documents always serialize");
    s.push('\n');
    s
}

/// Renders a rational as a decimal with up to `digits` fractional digits,
/// marking truncation with `...`.
pub fn decimal(r: &Rational, digits: usize) -> String {
    let neg = r.is_negative();
    let r = r.abs();
    let int_part = r.numer() / r.denom();
    let mut rem = r.numer() % r.denom();
    let mut out = format!("{}{}", if neg { "-" } else { "" }, int_part);
    if !rem.is_zero() {
        out.push('.');
        let ten = BigInt::from(10);
        let mut n = 0;
        while !rem.is_zero() && n < digits {
            rem *= &ten;
            out.push_str(&(&rem / r.denom()).to_string());
            rem %= r.denom();
            n += 1;
        }
        if !rem.is_zero() {
            out.push_str("...");
        }
    }
    out
}
