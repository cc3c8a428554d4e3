//! A small expression language for scalar fields over chart coordinates.
//!
//! Expressions use the coordinates `x1 .. x{2n}`, decimal literals, the binary
//! operators `+ - * / ^`, unary minus and the functions `sin cos exp log sqrt`.
//! `^` binds tightest and associates to the right; unary minus binds tighter
//! than `*` and `/` but looser than `^`, so `-x1^2` is `-(x1^2)`.

mod expr;
mod field;
mod parser;

pub use expr::{BinOp, EvalError, Expr, Func};
pub use field::{build_manifold, FieldSpec};
pub use parser::{parse, ParseError, Pos};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("x1*x3").unwrap(),
            Expr::bin(BinOp::Mul, Expr::var(1), Expr::var(3))
        );
        assert_eq!(
            parse("sin(x1)+x3^2").unwrap(),
            Expr::bin(
                BinOp::Add,
                Expr::call(Func::Sin, Expr::var(1)),
                Expr::bin(BinOp::Pow, Expr::var(3), Expr::num(2.0))
            )
        );
        let err = parse("x1+*x2").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 1, column: 4 });
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("2^3^2").unwrap().eval(&[]).unwrap(), 512.0);
        assert_eq!(parse("-2^2").unwrap().eval(&[]).unwrap(), -4.0);
        assert_eq!(parse("8/4/2").unwrap().eval(&[]).unwrap(), 1.0);
        assert_eq!(parse("5-3-1").unwrap().eval(&[]).unwrap(), 1.0);
        assert_eq!(parse("2*-3").unwrap().eval(&[]).unwrap(), -6.0);
        assert_eq!(parse("2^-1").unwrap().eval(&[]).unwrap(), 0.5);
    }

    #[test]
    fn structured_errors() {
        assert!(matches!(
            parse("foo(x1)"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse("x0"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse("sin(x1, x2)"),
            Err(ParseError::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(matches!(parse("2x1"), Err(ParseError::Syntax { .. })));
        let err = parse("x1 +\n  (x2 * )").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 2, column: 9 });
        assert!(matches!(parse(""), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(x1"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn eval_domain_errors() {
        let e = parse("1/ (x1-x1)").unwrap();
        match e.eval(&[0.3]) {
            Err(EvalError::DivisionByZero { subexpr }) => assert_eq!(subexpr, "1 / (x1 - x1)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("log(x1)").unwrap().eval(&[-1.0]),
            Err(EvalError::LogDomain { .. })
        ));
        assert!(matches!(
            parse("sqrt(x1 - 2)").unwrap().eval(&[1.0]),
            Err(EvalError::SqrtDomain { .. })
        ));
        assert!(matches!(
            parse("exp(1000)").unwrap().eval(&[]),
            Err(EvalError::NonFinite { .. })
        ));
        assert!(matches!(
            parse("x3").unwrap().eval(&[1.0, 2.0]),
            Err(EvalError::Unbound { index: 3, .. })
        ));
    }

    #[test]
    fn printer_is_canonical() {
        for (src, canon) in [
            ("x1*x3", "x1 * x3"),
            ("(x1+x2)*x3", "(x1 + x2) * x3"),
            ("x1-(x2-x3)", "x1 - (x2 - x3)"),
            ("(x1-x2)-x3", "x1 - x2 - x3"),
            ("(x1^x2)^x3", "(x1^x2)^x3"),
            ("x1^(x2^x3)", "x1^x2^x3"),
            ("(-x1)^2", "(-x1)^2"),
            ("-(x1^2)", "-x1^2"),
            ("exp(  -0.5 )", "exp(-0.5)"),
            ("2.50e1", "25"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), canon, "{src}");
        }
    }
}
