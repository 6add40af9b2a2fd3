use super::*;
use crate::monomial::Level;
use crate::scalar::{int, rat};
use crate::series::Term;

fn show(text: &str) -> String {
    let env = Env::default();
    format_value(&eval_str(text, &env).unwrap(), &env).unwrap()
}

fn fails(text: &str) -> Error {
    eval_str(text, &Env::default()).unwrap_err()
}

#[test]
fn grammar() {
    let m = parse_monomial("exp^-1 * log^(-1/2)").unwrap();
    assert_eq!(m, Monomial::from_pairs([(Level::EXP, int(-1)), (Level::LOG, rat(-1, 2))]));
    let canon = parse_monomial("exp^-1 * x^2 * log[2]^-1/2").unwrap();
    assert_eq!(canon.to_string(), "exp^-1 * x^2 * log[2]^-1/2");
    assert_eq!(parse_monomial("1").unwrap(), Monomial::one());
    assert_eq!(parse_expr("1/(1 - x^-1)").unwrap().to_string(), "1 / (1 - x^(-1))");
    assert_eq!(parse_expr("-x^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::X), int(2)))));
    assert_eq!(parse_expr("x^2 / 3").unwrap().to_string(), "x^2 / 3");
    assert_eq!(parse_expr("x^2/3").unwrap().to_string(), "x^(2/3)");
    assert_eq!(parse_expr("2*x·x").unwrap().to_string(), "2 * x * x");
}

#[test]
fn syntax_errors_have_locations() {
    match parse_program("let a = 1\nlet b = (x + \n").unwrap_err() {
        Error::Syntax { line, column, .. } => assert_eq!((line, column), (2, 14)),
        e => panic!("{e:?}"),
    }
    match parse_expr("exp(x)").unwrap_err() {
        Error::Syntax { line, column, message } => {
            assert_eq!((line, column), (1, 1));
            assert!(message.contains("expof"));
        }
        e => panic!("{e:?}"),
    }
    for bad in ["", "x^", "x^y", "log[0]", "1 +", "(((", "let x = 1", "f(1,", "x^1/0", "$"] {
        assert!(parse_program(bad).is_err() || bad.is_empty(), "{bad}");
    }
    assert!(parse_expr(&"(".repeat(10_000)).is_err());
    assert!(parse_expr(&"-".repeat(10_000)).is_err());
}

#[test]
fn elaboration_examples() {
    assert_eq!(fails("complog(f, x^2)").root().kind(), "UnboundName");
    assert_eq!(show("ord(exp^-2*(1+x^-1))"), "2");
    assert_eq!(show("cmp(exp^-1, x^-1)"), "less");
    assert_eq!(show("terms(D(log), 1)"), "x^-1");
    assert_eq!(show("terms(1/(1-x^-1), 4)"), "1 + x^-1 + x^-2 + x^-3 + ...");
    let mut env = Env::default();
    let mut out = Vec::new();
    let mut err = Vec::new();
    run_source(
        &mut env,
        "let g = x^2*(1+x^-1); terms(complog(exp^-1, g), 3); terms(pow(g, -1), 3)",
        Output::default(),
        &mut out,
        &mut err,
    )
    .unwrap();
    let out = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x^-2 - x^-3 + x^-4 + ...");
    assert_eq!(lines[0], lines[1]);
    assert!(err.is_empty());
}

#[test]
fn values_and_errors() {
    assert_eq!(show("1/2 + 1/3"), "5/6");
    assert_eq!(show("logof(4)"), "2*logof(2)");
    assert_eq!(show("expof(0)"), "1");
    assert_eq!(show("(x + 1)^2"), "x^2 + 2*x + 1");
    assert_eq!(show("trunc(geom(x^-1), x^-2)"), "1 + x^-1 + x^-2");
    assert_eq!(show("D(x^3, 2)"), "6*x");
    assert_eq!(show("rlog(x^2)"), "log^2");
    assert_eq!(show("almost_regular([0, 1], [1, 0, 2])"), "1 + 2*exp^-1 * x");
    assert_eq!(show("taylor(exp, log, x^-1, 2)"), "x + 1 + 1/2*x^-1");
    assert_eq!(show("at(germ(log), 1)"), "0e0");
    assert_eq!(show("at(numeric(1 + x^-1, 2), 10)"), "1.1e0");
    assert_eq!(fails("geom(x)").root().kind(), "NotSmall");
    assert_eq!(fails("2^(1/2)").kind(), "IrrationalScalar");
    assert_eq!(fails("1/0").kind(), "DivisionByZero");
    assert_eq!(fails("terms(x, 1/2)").kind(), "TypeError");
    assert_eq!(fails("D(1, 2, 3)").kind(), "TypeError");
    assert_eq!(fails("germ(tan)").kind(), "MalformedInput");
    let e = fails("logof(x - x^2)");
    assert!(e.to_string().starts_with("logof: "), "{e}");
}

#[test]
fn rebinding_warns() {
    let mut env = Env::default();
    let mut out = Vec::new();
    let mut err = Vec::new();
    run_source(&mut env, "let a = 1\nlet a = x # again", Output::default(), &mut out, &mut err).unwrap();
    assert!(String::from_utf8(err).unwrap().contains("rebound"));
    assert!(matches!(env.get("a"), Some(Value::Mono(_))));
    assert!(env.bind("terms", Value::Rat(int(1))).is_err());
}

#[test]
fn repl_session() {
    let mut env = Env::default();
    let mut input: &[u8] = b":terms 3\nlet f = 1/(1 - x^-1)\nf\nbogus\n:q\nf\n";
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let failures = repl(&mut env, &mut input, None, Output::default(), &mut out, &mut err).unwrap();
    assert_eq!(failures, 1);
    assert_eq!(String::from_utf8(out).unwrap(), "1 + x^-1 + x^-2 + ...\n");
    assert!(String::from_utf8(err).unwrap().contains("unbound name `bogus`"));
}

#[test]
fn round_trip_of_printed_values() {
    let env = Env::default();
    for text in [
        "3/4*exp^-1 * log^-1/2 - x^-1/3",
        "(1 + logof(2))*x + expof(-1/2)",
        "-2*log[3]^5 + 7",
        "logof(6)^2",
        "0",
    ] {
        let once = format_value(&eval_str(text, &env).unwrap(), &env).unwrap();
        let twice = format_value(&eval_str(&once, &env).unwrap(), &env).unwrap();
        assert_eq!(once, twice, "{text}");
    }
    let s = parse_scalar("2*logof(2) - expof(1)").unwrap();
    assert_eq!(parse_scalar(&s.to_string()).unwrap(), s);
    assert_eq!(
        parse_series("1/2*x^-2", &env).unwrap().terms_prefix(2, &Budget::default()).unwrap(),
        vec![Term::new(rat(1, 2), Monomial::factor(Level::X, int(-2)))]
    );
}
