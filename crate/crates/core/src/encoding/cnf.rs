use std::collections::HashMap;
use std::fmt::Write;

use super::formula::Formula;
use super::solver::{Lit, SatSolver};
use crate::fsm::{Fsm, TransitionId};

/// Clausal form of a formula. Transition variables come first (in the
/// order they were registered); Tseitin auxiliaries follow.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    clauses: Vec<Vec<Lit>>,
    vars: HashMap<TransitionId, usize>,
    names: Vec<Option<TransitionId>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers the transitions of `fsm` as variables 0..n in declaration
    /// order.
    pub fn for_machine(fsm: &Fsm) -> Self {
        let mut cnf = Self::new();
        for id in fsm.transition_ids() {
            cnf.var(id);
        }
        cnf
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn var(&mut self, id: &TransitionId) -> usize {
        if let Some(&v) = self.vars.get(id) {
            return v;
        }
        let v = self.names.len();
        self.names.push(Some(id.clone()));
        self.vars.insert(id.clone(), v);
        v
    }

    pub fn lookup(&self, id: &TransitionId) -> Option<usize> {
        self.vars.get(id).copied()
    }

    pub fn name(&self, var: usize) -> Option<&TransitionId> {
        self.names.get(var).and_then(Option::as_ref)
    }

    fn aux(&mut self) -> usize {
        self.names.push(None);
        self.names.len() - 1
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        self.clauses.push(clause);
    }

    /// Conjoins `f`. Top-level clauses and exactly-one blocks are emitted
    /// directly; anything deeper goes through Tseitin definitions.
    pub fn assert_formula(&mut self, f: &Formula) {
        for part in f.conjuncts() {
            match part {
                Formula::True => {}
                Formula::False => self.clauses.push(Vec::new()),
                Formula::ExactlyOne(vs) => {
                    let lits: Vec<Lit> = vs.iter().map(|v| Lit::new(self.var(v), true)).collect();
                    for i in 0..lits.len() {
                        for j in i + 1..lits.len() {
                            self.clauses.push(vec![!lits[i], !lits[j]]);
                        }
                    }
                    self.clauses.push(lits);
                }
                Formula::Or(children) if children.iter().all(|c| self.literal(c).is_some()) => {
                    let clause = children.iter().map(|c| self.literal(c).unwrap()).collect();
                    self.clauses.push(clause);
                }
                other => {
                    let l = self.define(other);
                    self.clauses.push(vec![l]);
                }
            }
        }
    }

    fn literal(&mut self, f: &Formula) -> Option<Lit> {
        match f {
            Formula::Var(v) => Some(Lit::new(self.var(v), true)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Var(v) => Some(Lit::new(self.var(v), false)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Returns a literal equivalent to `f`.
    fn define(&mut self, f: &Formula) -> Lit {
        if let Some(l) = self.literal(f) {
            return l;
        }
        match f {
            Formula::True | Formula::False => {
                let a = Lit::new(self.aux(), true);
                self.clauses
                    .push(vec![if matches!(f, Formula::True) { a } else { !a }]);
                a
            }
            Formula::Not(inner) => !self.define(inner),
            Formula::And(children) => {
                let lits: Vec<Lit> = children.iter().map(|c| self.define(c)).collect();
                let a = Lit::new(self.aux(), true);
                let mut back = vec![a];
                for &l in &lits {
                    self.clauses.push(vec![!a, l]);
                    back.push(!l);
                }
                self.clauses.push(back);
                a
            }
            Formula::Or(children) => {
                let lits: Vec<Lit> = children.iter().map(|c| self.define(c)).collect();
                let a = Lit::new(self.aux(), true);
                let mut forward = vec![!a];
                for &l in &lits {
                    self.clauses.push(vec![a, !l]);
                    forward.push(l);
                }
                self.clauses.push(forward);
                a
            }
            Formula::ExactlyOne(_) => self.define(&f.expand()),
            Formula::Var(_) => unreachable!(),
        }
    }

    pub fn solver(&self) -> SatSolver {
        let mut s = SatSolver::new();
        s.ensure_vars(self.num_vars());
        for c in &self.clauses {
            if !s.add_clause(c) {
                break;
            }
        }
        s
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars(), self.clauses.len());
        for c in &self.clauses {
            for l in c {
                write!(out, "{} ", l.to_dimacs()).unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// Sidecar for [`Cnf::to_dimacs`]: one `var_index transition_id` line
    /// per transition variable, 1-based like DIMACS.
    pub fn var_map(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            if let Some(id) = name {
                writeln!(out, "{} {}", i + 1, id).unwrap();
            }
        }
        out
    }
}
