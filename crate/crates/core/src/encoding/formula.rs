use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::fsm::{Fsm, TransitionId};

/// Propositional formula over transition variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Var(TransitionId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// Exactly one of at least two variables holds.
    ExactlyOne(Vec<TransitionId>),
}

impl Formula {
    pub fn var(id: impl Into<TransitionId>) -> Self {
        Formula::Var(id.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction with nested conjunctions flattened and constants folded.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with nested disjunctions flattened and constants folded.
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// `ξ_τ`: exactly one variable of `vars` is true. A single variable is
    /// returned bare.
    pub fn exactly_one(vars: impl IntoIterator<Item = TransitionId>) -> Result<Self> {
        let mut vars: Vec<TransitionId> = vars.into_iter().collect();
        let mut seen = BTreeSet::new();
        vars.retain(|v| seen.insert(v.clone()));
        match vars.len() {
            0 => Err(Error::Empty("variable set")),
            1 => Ok(Formula::Var(vars.pop().unwrap())),
            _ => Ok(Formula::ExactlyOne(vars)),
        }
    }

    pub fn eval(&self, value: &impl Fn(&TransitionId) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(v) => value(v),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
            Formula::ExactlyOne(vs) => vs.iter().filter(|v| value(v)).count() == 1,
        }
    }

    pub fn vars(&self) -> BTreeSet<TransitionId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<TransitionId>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::ExactlyOne(vs) => out.extend(vs.iter().cloned()),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> &[Formula] {
        match self {
            Formula::And(fs) => fs,
            other => std::slice::from_ref(other),
        }
    }

    /// Rewrites exactly-one blocks into the clause form
    /// `⋀_k (¬t_k ∨ ⋀_{j>k} ¬t_j) ∧ ⋁_k t_k`.
    pub fn expand(&self) -> Formula {
        match self {
            Formula::ExactlyOne(vs) => {
                let mut parts = Vec::new();
                for k in 0..vs.len() - 1 {
                    let rest = Formula::and(
                        vs[k + 1..]
                            .iter()
                            .map(|v| Formula::not(Formula::Var(v.clone()))),
                    );
                    parts.push(Formula::Or(vec![
                        Formula::not(Formula::Var(vs[k].clone())),
                        rest,
                    ]));
                }
                parts.push(Formula::Or(vs.iter().cloned().map(Formula::Var).collect()));
                Formula::And(parts)
            }
            Formula::Not(f) => Formula::not(f.expand()),
            Formula::And(fs) => Formula::And(fs.iter().map(Formula::expand).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(Formula::expand).collect()),
            other => other.clone(),
        }
    }

    /// Specialises the formula to the variables of `fsm`: variables of
    /// transitions `fsm` lacks are false, and exactly-one blocks left with
    /// no variable of `fsm` are dropped.
    ///
    /// Used when a formula built over an imprecise machine is solved over
    /// one of its reductions: dropped blocks belong to states the reduced
    /// machine no longer reaches.
    pub fn restrict_to(&self, fsm: &Fsm) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Var(v) => {
                if fsm.has_transition(v) {
                    self.clone()
                } else {
                    Formula::False
                }
            }
            Formula::Not(f) => Formula::not(f.restrict_to(fsm)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.restrict_to(fsm))),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.restrict_to(fsm))),
            Formula::ExactlyOne(vs) => {
                let kept: Vec<TransitionId> = vs
                    .iter()
                    .filter(|v| fsm.has_transition(v))
                    .cloned()
                    .collect();
                if kept.is_empty() {
                    Formula::True
                } else {
                    Formula::exactly_one(kept).expect("non-empty")
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) | Formula::ExactlyOne(_) => 2,
            _ => 3,
        }
    }

    fn fmt_child(child: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < 3 {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Var(v) => write!(f, "{v}"),
            Formula::Not(inner) => {
                if inner.precedence() < 3 {
                    write!(f, "¬({inner})")
                } else {
                    write!(f, "¬{inner}")
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " ∧ "
                } else {
                    " ∨ "
                };
                for (i, child) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    Self::fmt_child(child, f)?;
                }
                Ok(())
            }
            Formula::ExactlyOne(_) => write!(f, "{}", self.expand()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<TransitionId> {
        names.iter().map(|&n| TransitionId::from(n)).collect()
    }

    #[test]
    fn exactly_one_renders_as_clause_form() {
        let f = Formula::exactly_one(ids(&["t7", "t8"])).unwrap();
        assert_eq!(f.to_string(), "(¬t7 ∨ ¬t8) ∧ (t7 ∨ t8)");
        assert_eq!(
            Formula::exactly_one(ids(&["t1"])).unwrap(),
            Formula::var("t1")
        );
        assert!(Formula::exactly_one(Vec::new()).is_err());
    }

    #[test]
    fn exactly_one_of_three_has_three_models() {
        let vars = ids(&["a", "b", "c"]);
        let f = Formula::exactly_one(vars.clone()).unwrap();
        let expanded = f.expand();
        let mut models = 0;
        for bits in 0u8..8 {
            let value =
                |v: &TransitionId| bits >> vars.iter().position(|x| x == v).unwrap() & 1 == 1;
            assert_eq!(f.eval(&value), expanded.eval(&value));
            models += f.eval(&value) as usize;
        }
        assert_eq!(models, 3);
    }

    #[test]
    fn constants_fold() {
        assert_eq!(Formula::and([Formula::True, Formula::True]), Formula::True);
        assert_eq!(
            Formula::or([Formula::var("a"), Formula::True]),
            Formula::True
        );
        assert_eq!(
            Formula::and([Formula::var("a"), Formula::False]),
            Formula::False
        );
        assert_eq!(Formula::or(Vec::new()), Formula::False);
    }

    #[test]
    fn display_parenthesises_by_precedence() {
        let f = Formula::or([
            Formula::and([Formula::var("t5"), Formula::var("t9")]),
            Formula::and([Formula::var("t5"), Formula::var("t10")]),
        ]);
        assert_eq!(f.to_string(), "(t5 ∧ t9) ∨ (t5 ∧ t10)");
    }
}
