//! Model-language abstract syntax and its canonical printer.
//!
//! The language is a typed STRIPS subset written as s-expressions:
//!
//! ```text
//! (define (domain blocks)
//!   (:requirements :strips :typing)
//!   (:types block)
//!   (:predicates (on ?x - block ?y - block) (clear ?x - block) (handempty))
//!   (:action stack
//!     :parameters (?x - block ?y - block)
//!     :precondition (and (holding ?x) (clear ?y))
//!     :effect (and (on ?x ?y) (not (holding ?x)) (not (clear ?y)))))
//! ```
//!
//! Problems list typed objects, the initial facts, and the goal hypotheses with
//! their priors:
//!
//! ```text
//! (define (problem p1) (:domain blocks)
//!   (:objects a b - block)
//!   (:init (clear a) (clear b) (handempty))
//!   (:hypotheses (0.8 (and (on a b))) (0.2 (and (on b a))))
//!   (:true-goal 0))
//! ```
//!
//! A plain `(:goal ...)` section is accepted as a single hypothesis with prior 1.
//! Distinct action parameters always bind distinct objects.

use std::fmt;

/// Root of the type hierarchy; every declared type without a parent derives from it.
pub const OBJECT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A variable-free atom, as used in problem files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new<P: Into<String>, A: AsRef<str>>(predicate: P, args: &[A]) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.as_ref().to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Atom>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSchema {
    pub name: String,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateSchema>,
    pub actions: Vec<ActionSchema>,
}

impl DomainSchema {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == OBJECT_TYPE || self.types.iter().any(|t| t.name == name)
    }

    /// True if `ty` equals `ancestor` or derives from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        // bounded walk: a malformed cyclic hierarchy must not hang
        for _ in 0..=self.types.len() + 1 {
            if cur == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = &t.parent,
                None => return false,
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub prior: f64,
    pub facts: Vec<GroundAtom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtom>,
    pub hypotheses: Vec<Hypothesis>,
    pub true_goal: Option<usize>,
}

fn write_typed_list(f: &mut fmt::Formatter<'_>, items: &[TypedName], var: bool) -> fmt::Result {
    let mut first = true;
    let mut i = 0;
    while i < items.len() {
        let ty = &items[i].ty;
        let mut j = i;
        while j < items.len() && &items[j].ty == ty {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if var {
                write!(f, "?{}", items[j].name)?;
            } else {
                f.write_str(&items[j].name)?;
            }
            j += 1;
        }
        write!(f, " - {ty}")?;
        i = j;
    }
    Ok(())
}

fn write_conjunction(f: &mut fmt::Formatter<'_>, atoms: &[Atom], negated: &[Atom]) -> fmt::Result {
    f.write_str("(and")?;
    for a in atoms {
        write!(f, " {a}")?;
    }
    for a in negated {
        write!(f, " (not {a})")?;
    }
    f.write_str(")")
}

impl fmt::Display for DomainSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        writeln!(f, "  (:requirements :strips :typing)")?;
        if !self.types.is_empty() {
            f.write_str("  (:types")?;
            for t in &self.types {
                write!(f, " {} - {}", t.name, t.parent)?;
            }
            writeln!(f, ")")?;
        }
        if !self.constants.is_empty() {
            f.write_str("  (:constants ")?;
            write_typed_list(f, &self.constants, false)?;
            writeln!(f, ")")?;
        }
        f.write_str("  (:predicates")?;
        for p in &self.predicates {
            write!(f, "\n    ({}", p.name)?;
            if !p.params.is_empty() {
                f.write_str(" ")?;
                write_typed_list(f, &p.params, true)?;
            }
            f.write_str(")")?;
        }
        writeln!(f, ")")?;
        for a in &self.actions {
            writeln!(f, "  (:action {}", a.name)?;
            f.write_str("    :parameters (")?;
            write_typed_list(f, &a.params, true)?;
            writeln!(f, ")")?;
            f.write_str("    :precondition ")?;
            write_conjunction(f, &a.precondition, &[])?;
            f.write_str("\n    :effect ")?;
            write_conjunction(f, &a.add, &a.delete)?;
            writeln!(f, ")")?;
        }
        f.write_str(")\n")
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {}) (:domain {})", self.name, self.domain)?;
        if !self.objects.is_empty() {
            f.write_str("  (:objects ")?;
            write_typed_list(f, &self.objects, false)?;
            writeln!(f, ")")?;
        }
        f.write_str("  (:init")?;
        for a in &self.init {
            write!(f, "\n    {a}")?;
        }
        writeln!(f, ")")?;
        f.write_str("  (:hypotheses")?;
        for h in &self.hypotheses {
            write!(f, "\n    ({:?} (and", h.prior)?;
            for a in &h.facts {
                write!(f, " {a}")?;
            }
            f.write_str("))")?;
        }
        f.write_str(")")?;
        if let Some(t) = self.true_goal {
            write!(f, "\n  (:true-goal {t})")?;
        }
        f.write_str(")\n")
    }
}
