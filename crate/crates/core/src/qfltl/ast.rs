//! Formula syntax tree for LTL over numerical traces.
//!
//! Atoms compare a trace observable against a threshold, which is either a
//! numeric constant or a free variable `y1, y2, ...`. A formula without
//! variables is closed and can be evaluated directly; variables arise from
//! [`abstract_formula`](super::abstract_formula).

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Right-hand side of an atom: a constant or the free variable with the
/// given zero-based index (displayed one-based as `y1`, `y2`, ...).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Const(f64),
    Var(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Atom { observable: String, op: CmpOp, threshold: Threshold },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(observable: impl Into<String>, op: CmpOp, value: f64) -> Formula {
        Formula::Atom { observable: observable.into(), op, threshold: Threshold::Const(value) }
    }

    /// Calls `f` on every atom, in left-to-right syntactic order.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a str, CmpOp, Threshold)) {
        match self {
            Formula::True => {}
            Formula::Atom { observable, op, threshold } => f(observable, *op, *threshold),
            Formula::Not(a) | Formula::Next(a) | Formula::Finally(a) | Formula::Globally(a) => {
                a.for_each_atom(f)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    /// Number of distinct free variables, assuming the dense numbering that
    /// abstraction produces (max index + 1).
    pub fn variable_count(&self) -> usize {
        let mut max: Option<usize> = None;
        self.for_each_atom(&mut |_, _, th| {
            if let Threshold::Var(k) = th {
                max = Some(max.map_or(k, |m| m.max(k)));
            }
        });
        max.map_or(0, |m| m + 1)
    }

    pub fn is_closed(&self) -> bool {
        self.variable_count() == 0
    }

    /// Replaces every variable `y(k+1)` by `values[k]`, yielding a closed
    /// formula. Panics if a variable index is out of range.
    pub fn substitute(&self, values: &[f64]) -> Formula {
        let map = |f: &Formula| Box::new(f.substitute(values));
        match self {
            Formula::True => Formula::True,
            Formula::Atom { observable, op, threshold } => {
                let threshold = match threshold {
                    Threshold::Const(v) => Threshold::Const(*v),
                    Threshold::Var(k) => Threshold::Const(values[*k]),
                };
                Formula::Atom { observable: observable.clone(), op: *op, threshold }
            }
            Formula::Not(a) => Formula::Not(map(a)),
            Formula::And(a, b) => Formula::And(map(a), map(b)),
            Formula::Or(a, b) => Formula::Or(map(a), map(b)),
            Formula::Implies(a, b) => Formula::Implies(map(a), map(b)),
            Formula::Next(a) => Formula::Next(map(a)),
            Formula::Finally(a) => Formula::Finally(map(a)),
            Formula::Globally(a) => Formula::Globally(map(a)),
            Formula::Until(a, b) => Formula::Until(map(a), map(b)),
        }
    }
}

// Binding strength, loosest first: -> | & U unary.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Until(..) => 3,
        _ => 4,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(out: &mut fmt::Formatter<'_>, f: &Formula, min: u8) -> fmt::Result {
            if precedence(f) < min {
                write!(out, "({f})")
            } else {
                write!(out, "{f}")
            }
        }
        match self {
            Formula::True => write!(out, "true"),
            Formula::Atom { observable, op, threshold } => {
                write!(out, "[{observable}] {} ", op.symbol())?;
                match threshold {
                    Threshold::Const(v) => write!(out, "{v}"),
                    Threshold::Var(k) => write!(out, "y{}", k + 1),
                }
            }
            Formula::Not(a) => {
                write!(out, "!")?;
                child(out, a, 4)
            }
            Formula::And(a, b) => {
                child(out, a, 2)?;
                write!(out, " & ")?;
                // & is associative; still parenthesize nested | and -> only.
                child(out, b, 2)
            }
            Formula::Or(a, b) => {
                child(out, a, 1)?;
                write!(out, " | ")?;
                child(out, b, 1)
            }
            Formula::Implies(a, b) => {
                // Right-associative: the left side needs strictly tighter
                // binding.
                child(out, a, 1)?;
                write!(out, " -> ")?;
                child(out, b, 0)
            }
            Formula::Next(a) => {
                write!(out, "X(")?;
                write!(out, "{a}")?;
                write!(out, ")")
            }
            Formula::Finally(a) => write!(out, "F({a})"),
            Formula::Globally(a) => write!(out, "G({a})"),
            Formula::Until(a, b) => {
                child(out, a, 4)?;
                write!(out, " U ")?;
                // Right-associative.
                child(out, b, 3)
            }
        }
    }
}
