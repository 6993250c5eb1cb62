//! A small arithmetic expression language for user-defined Lagrangians and
//! exact solutions: recursive-descent parser, evaluator, and pretty-printer
//! over the variables t, x, dax, dx.

use crate::model::Lagrangian;
use crate::special;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
    Dax,
    Dx,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::Dax => "dax",
            Var::Dx => "dx",
        }
    }

    fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "dax" => Some(Var::Dax),
            "dx" => Some(Var::Dx),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Gamma,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "gamma" => Some(Func::Gamma),
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "abs" => Some(Func::Abs),
            "pow" => Some(Func::Pow),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Gamma => "gamma",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Expression tree. `^` is right-associative; precedence from loosest to
/// tightest is {+, −}, {*, /}, unary minus, `^`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
    },
}

impl Expr {
    /// Whether the tree references `var` anywhere.
    pub fn contains_var(&self, var: Var) -> bool {
        match self {
            Expr::Number(_) | Expr::Pi => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) => e.contains_var(var),
            Expr::Binary { lhs, rhs, .. } => lhs.contains_var(var) || rhs.contains_var(var),
            Expr::Call { args, .. } => args.iter().any(|a| a.contains_var(var)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Number(_) | Expr::Pi | Expr::Var(_) | Expr::Call { .. } => 5,
            Expr::Binary { op: BinOp::Pow, .. } => 4,
            Expr::Neg(_) => 3,
            Expr::Binary {
                op: BinOp::Mul | BinOp::Div,
                ..
            } => 2,
            Expr::Binary {
                op: BinOp::Add | BinOp::Sub,
                ..
            } => 1,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parenthesize = self.precedence() < min;
        if parenthesize {
            write!(f, "(")?;
        }
        match self {
            Expr::Number(v) => write!(f, "{v}")?,
            Expr::Pi => write!(f, "pi")?,
            Expr::Var(v) => write!(f, "{}", v.name())?,
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3)?;
            }
            Expr::Binary { op, lhs, rhs } => {
                let (prec, symbol, rhs_min) = match op {
                    BinOp::Add => (1, "+", 2),
                    BinOp::Sub => (1, "-", 2),
                    BinOp::Mul => (2, "*", 3),
                    BinOp::Div => (2, "/", 3),
                    BinOp::Pow => (4, "^", 3),
                };
                let lhs_min = if *op == BinOp::Pow { 5 } else { prec };
                lhs.fmt_prec(f, lhs_min)?;
                write!(f, "{symbol}")?;
                rhs.fmt_prec(f, rhs_min)?;
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    arg.fmt_prec(f, 0)?;
                }
                write!(f, ")")?;
            }
        }
        if parenthesize {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    /// Prints with the minimal parentheses needed to re-parse to the same
    /// tree (for finite, non-negative literals, the ones `parse` produces).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalContext {
    pub t: f64,
    pub x: f64,
    pub dax: f64,
    pub dx: f64,
}

/// Parse failure with the character offset it occurred at.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Evaluation failure naming the offending subexpression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot evaluate `{node}`: {message}")]
pub struct EvalError {
    pub node: String,
    pub message: String,
}

const MAX_DEPTH: usize = 256;

struct Parser {
    chars: Vec<char>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            offset,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, expected: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(expected) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nests too deeply"));
        }
        Ok(())
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.parse_term()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            self.pos += 1;
            self.enter()?;
            let operand = self.parse_unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(operand)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.parse_unary()?;
            return Ok(Expr::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exponent),
            });
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("expected expression, found end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.parse_ident(),
            Some(c) => Err(self.error(format!("unexpected character `{c}`"))),
        }
    }

    fn parse_number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(self.error("malformed exponent"));
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: f64 = text
            .parse()
            .map_err(|_| self.error_at(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.error_at(start, format!("numeric literal `{text}` overflows")));
        }
        Ok(Expr::Number(value))
    }

    fn parse_ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            self.enter()?;
            let mut args = vec![self.parse_expr()?];
            while self.eat(',') {
                args.push(self.parse_expr()?);
            }
            self.depth -= 1;
            if !self.eat(')') {
                return Err(self.error("expected `)` or `,` in argument list"));
            }
            let Some(func) = Func::from_name(&name) else {
                return Err(self.error_at(start, format!("unknown function `{name}`")));
            };
            if args.len() != func.arity() {
                return Err(self.error_at(
                    start,
                    format!(
                        "{name} expects {} argument(s), got {}",
                        func.arity(),
                        args.len()
                    ),
                ));
            }
            return Ok(Expr::Call { func, args });
        }
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        if let Some(var) = Var::from_name(&name) {
            return Ok(Expr::Var(var));
        }
        if Func::from_name(&name).is_some() {
            return Err(self.error_at(start, format!("function `{name}` needs parentheses")));
        }
        Err(self.error_at(start, format!("unknown identifier `{name}`")))
    }
}

/// Parses a source string into an expression tree.
///
/// Grammar: expr := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*;
/// unary := '-' unary | power; power := atom ('^' unary)?;
/// atom := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'.
/// Whitespace is insignificant; there is no implicit multiplication.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        chars: source.chars().collect(),
        pos: 0,
        depth: 0,
    };
    let expr = parser.parse_expr()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        let found = parser.chars[parser.pos];
        return Err(parser.error(format!("trailing input starting at `{found}`")));
    }
    Ok(expr)
}

fn eval_error(node: &Expr, message: impl Into<String>) -> EvalError {
    EvalError {
        node: node.to_string(),
        message: message.into(),
    }
}

fn checked_pow(node: &Expr, base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(eval_error(
            node,
            "negative base raised to a non-integer power",
        ));
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(eval_error(node, "zero raised to a negative power"));
    }
    Ok(base.powf(exponent))
}

/// Evaluates an expression under the given variable bindings.
///
/// Domain violations (division by zero, gamma poles, log of a non-positive
/// value, square root of a negative value, fractional powers of negative
/// bases) are reported as errors naming the offending subexpression.
pub fn eval(expr: &Expr, ctx: &EvalContext) -> Result<f64, EvalError> {
    match expr {
        Expr::Number(v) => Ok(*v),
        Expr::Pi => Ok(PI),
        Expr::Var(v) => Ok(match v {
            Var::T => ctx.t,
            Var::X => ctx.x,
            Var::Dax => ctx.dax,
            Var::Dx => ctx.dx,
        }),
        Expr::Neg(e) => Ok(-eval(e, ctx)?),
        Expr::Binary { op, lhs, rhs } => {
            let l = eval(lhs, ctx)?;
            let r = eval(rhs, ctx)?;
            match op {
                BinOp::Add => Ok(l + r),
                BinOp::Sub => Ok(l - r),
                BinOp::Mul => Ok(l * r),
                BinOp::Div => {
                    if r == 0.0 {
                        Err(eval_error(expr, "division by zero"))
                    } else {
                        Ok(l / r)
                    }
                }
                BinOp::Pow => checked_pow(expr, l, r),
            }
        }
        Expr::Call { func, args } => {
            let mut values = Vec::with_capacity(args.len());
            for arg in args {
                values.push(eval(arg, ctx)?);
            }
            match func {
                Func::Gamma => special::gamma(values[0])
                    .map_err(|e| eval_error(expr, e.to_string())),
                Func::Sqrt => {
                    if values[0] < 0.0 {
                        Err(eval_error(expr, "square root of a negative value"))
                    } else {
                        Ok(values[0].sqrt())
                    }
                }
                Func::Exp => Ok(values[0].exp()),
                Func::Log => {
                    if values[0] <= 0.0 {
                        Err(eval_error(expr, "logarithm of a non-positive value"))
                    } else {
                        Ok(values[0].ln())
                    }
                }
                Func::Sin => Ok(values[0].sin()),
                Func::Cos => Ok(values[0].cos()),
                Func::Abs => Ok(values[0].abs()),
                Func::Pow => checked_pow(expr, values[0], values[1]),
            }
        }
    }
}

fn eval_or_nan(ast: &Expr, args: [f64; 4]) -> f64 {
    let ctx = EvalContext {
        t: args[0],
        x: args[1],
        dax: args[2],
        dx: args[3],
    };
    eval(ast, &ctx).unwrap_or(f64::NAN)
}

fn fd_partial(
    ast: Arc<Expr>,
    slot: usize,
) -> impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static {
    move |t, x, dax, dx| {
        let mut args = [t, x, dax, dx];
        let v = args[slot];
        let step = 1e-6 * v.abs().max(1.0);
        args[slot] = v + step;
        let plus = eval_or_nan(&ast, args);
        args[slot] = v - step;
        let minus = eval_or_nan(&ast, args);
        (plus - minus) / (2.0 * step)
    }
}

/// Compiles a Lagrangian from source. Its partials are central finite
/// differences of the expression with step 1e−6·max(1, |argument|);
/// uses_xdot is set iff the variable dx occurs. Evaluation errors at
/// runtime surface as NaN.
pub fn to_lagrangian(source: &str) -> Result<Lagrangian, ParseError> {
    let ast = Arc::new(parse(source)?);
    let eval_ast = Arc::clone(&ast);
    let eval_fn = move |t, x, dax, dx| eval_or_nan(&eval_ast, [t, x, dax, dx]);
    let d_x = fd_partial(Arc::clone(&ast), 1);
    let d_dax = fd_partial(Arc::clone(&ast), 2);
    if ast.contains_var(Var::Dx) {
        let d_dx = fd_partial(Arc::clone(&ast), 3);
        Ok(Lagrangian::new(eval_fn, d_x, d_dax, d_dx))
    } else {
        Ok(Lagrangian::without_xdot(eval_fn, d_x, d_dax))
    }
}
