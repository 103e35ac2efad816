use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Literals are non-negative; a leading minus is `Neg`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    Var(Variable),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
    Pow(Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

impl Expression {
    pub fn constant(c: f64) -> Self {
        Expression::Const(c)
    }

    pub fn x() -> Self {
        Expression::Var(Variable::X)
    }

    pub fn y() -> Self {
        Expression::Var(Variable::Y)
    }

    pub fn call(func: Func, arg: Expression) -> Self {
        Expression::Call(func, Box::new(arg))
    }

    pub fn uses(&self, var: Variable) -> bool {
        use Expression::*;
        match self {
            Const(_) => false,
            Var(v) => *v == var,
            Neg(e) | Call(_, e) => e.uses(var),
            Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r) | Pow(l, r) => l.uses(var) || r.uses(var),
        }
    }

    pub fn depth(&self) -> usize {
        use Expression::*;
        match self {
            Const(_) | Var(_) => 1,
            Neg(e) | Call(_, e) => 1 + e.depth(),
            Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r) | Pow(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Polynomial degree in `x` when the tree is a polynomial (non-negative
    /// integer powers only), `None` otherwise.
    pub fn polynomial_degree(&self) -> Option<usize> {
        use Expression::*;
        match self {
            Const(_) => Some(0),
            Var(Variable::X) => Some(1),
            Var(Variable::Y) => None,
            Neg(e) => e.polynomial_degree(),
            Add(l, r) | Sub(l, r) => Some(l.polynomial_degree()?.max(r.polynomial_degree()?)),
            Mul(l, r) => Some(l.polynomial_degree()? + r.polynomial_degree()?),
            Div(l, r) => match **r {
                Const(c) if c != 0.0 => l.polynomial_degree(),
                _ => None,
            },
            Pow(b, e) => match **e {
                Const(p) if p >= 0.0 && p.fract() == 0.0 && p <= 64.0 => {
                    Some(b.polynomial_degree()? * p as usize)
                }
                _ => None,
            },
            Call(..) => None,
        }
    }

    fn precedence(&self) -> u8 {
        use Expression::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(..) => 3,
            Pow(..) => 4,
            Const(_) | Var(_) | Call(..) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_bare(f)?;
            f.write_str(")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expression::*;
        match self {
            Const(c) => write!(f, "{c:?}"),
            Var(Variable::X) => f.write_str("x"),
            Var(Variable::Y) => f.write_str("y"),
            Neg(e) => {
                f.write_str("-")?;
                e.write_at(f, 3)
            }
            Add(l, r) => binary(f, l, " + ", r, 1, 2),
            Sub(l, r) => binary(f, l, " - ", r, 1, 2),
            Mul(l, r) => binary(f, l, " * ", r, 2, 3),
            Div(l, r) => binary(f, l, " / ", r, 2, 3),
            Pow(b, e) => binary(f, b, "^", e, 5, 3),
            Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.write_bare(f)?;
                f.write_str(")")
            }
        }
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    l: &Expression,
    op: &str,
    r: &Expression,
    lmin: u8,
    rmin: u8,
) -> fmt::Result {
    l.write_at(f, lmin)?;
    f.write_str(op)?;
    r.write_at(f, rmin)
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_bare(f)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::Neg(Box::new(self))
    }
}

impl Expression {
    pub fn pow(self, exponent: Expression) -> Expression {
        Expression::Pow(Box::new(self), Box::new(exponent))
    }
}
