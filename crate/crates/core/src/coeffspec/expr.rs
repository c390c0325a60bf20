//! Expression trees for the coefficient language and their evaluation.
//!
//! Evaluation returns an `f64` in which `NaN` is the *undefined marker*:
//! division by an exact zero, the logarithm of a non-positive number and
//! `0/0`-type forms all produce it. Infinities are ordinary values, so
//! `x^(-1)` at `x = 0` is `+inf` while `1/x` at `x = 0` is undefined.

use std::fmt;

/// Binary operators, in the order they bind (loosest first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Built-in functions. There are no user-defined names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
    /// `indicator(a, b)` is 1 on the open interval `(a, b)` and 0 elsewhere.
    Indicator,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Sqrt,
        Func::Min,
        Func::Max,
        Func::Indicator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Indicator => "indicator",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Exp | Func::Log | Func::Abs | Func::Sqrt => 1,
            Func::Min | Func::Max | Func::Indicator => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Abstract syntax tree of a coefficient expression in the single free
/// variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Evaluates the expression at `x`. `NaN` is the undefined marker.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Binary(op, a, b) => {
                let a = a.eval(x);
                let b = b.eval(x);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            f64::NAN
                        } else {
                            a / b
                        }
                    }
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(func, args) => match func {
                Func::Exp => args[0].eval(x).exp(),
                Func::Log => {
                    let a = args[0].eval(x);
                    if a > 0.0 {
                        a.ln()
                    } else {
                        f64::NAN
                    }
                }
                Func::Abs => args[0].eval(x).abs(),
                Func::Sqrt => args[0].eval(x).sqrt(),
                Func::Min => {
                    let (a, b) = (args[0].eval(x), args[1].eval(x));
                    if a.is_nan() || b.is_nan() {
                        f64::NAN
                    } else {
                        a.min(b)
                    }
                }
                Func::Max => {
                    let (a, b) = (args[0].eval(x), args[1].eval(x));
                    if a.is_nan() || b.is_nan() {
                        f64::NAN
                    } else {
                        a.max(b)
                    }
                }
                Func::Indicator => {
                    let (a, b) = (args[0].eval(x), args[1].eval(x));
                    if a.is_nan() || b.is_nan() {
                        f64::NAN
                    } else if a < x && x < b {
                        1.0
                    } else {
                        0.0
                    }
                }
            },
        }
    }

    /// True when the expression is a literal zero, possibly negated or
    /// parenthesised. Used to skip drift integrals entirely.
    pub fn is_literal_zero(&self) -> bool {
        match self {
            Expr::Num(v) => *v == 0.0,
            Expr::Neg(a) => a.is_literal_zero(),
            _ => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var => 1,
            Expr::Neg(a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        if a == 0.0 && b < 0.0 {
            return f64::INFINITY;
        }
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// Prints a form that the parser maps back to the same tree: every compound
/// node is parenthesised and literals use the shortest round-tripping form.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var => f.write_str("x"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::coeffspec::parse_expr;

    fn ev(s: &str, x: f64) -> f64 {
        parse_expr(s).unwrap().eval(x)
    }

    #[test]
    fn basic_values() {
        assert_eq!(ev("x^2", 3.0), 9.0);
        assert_eq!(ev("exp(x)", 0.0), 1.0);
        assert!(ev("1/x", 0.0).is_nan());
        assert_eq!(ev("x^(-1)", 0.0), f64::INFINITY);
        assert_eq!(ev("1/x", 1e-320), f64::INFINITY);
    }

    #[test]
    fn undefined_forms() {
        assert!(ev("log(x)", 0.0).is_nan());
        assert!(ev("log(x)", -1.0).is_nan());
        assert!(ev("sqrt(x)", -1.0).is_nan());
        assert!(ev("x/x", 0.0).is_nan());
        assert!(ev("min(1, log(x))", -2.0).is_nan());
    }

    #[test]
    fn indicator_is_open_interval() {
        assert_eq!(ev("indicator(0, 1)", 0.0), 0.0);
        assert_eq!(ev("indicator(0, 1)", 0.5), 1.0);
        assert_eq!(ev("indicator(0, 1)", 1.0), 0.0);
    }

    #[test]
    fn negative_base_integer_power() {
        assert_eq!(ev("x^3", -2.0), -8.0);
        assert_eq!(ev("x^0.5", 4.0), 2.0);
        assert!(ev("x^0.5", -4.0).is_nan());
    }

    #[test]
    fn literal_zero_detection() {
        assert!(parse_expr("0").unwrap().is_literal_zero());
        assert!(parse_expr("-(0.0)").unwrap().is_literal_zero());
        assert!(!parse_expr("0*x").unwrap().is_literal_zero());
    }
}
