use logfield::calculus::{derivative, nth_derivative};
use logfield::dsl::{self, Env};
use logfield::series::{format_terms, Budget};

fn main() -> logfield::error::Result<()> {
    let env = Env::default();
    let b = Budget::default();
    for text in ["log", "log[2]", "x^(1/2)*log^-1", "exp^-1*x^3", "1/(1 - x^-1)"] {
        let f = dsl::parse_series(text, &env)?;
        println!("D({text}) = {}", format_terms(&derivative(&f).terms_prefix(4, &b)?, false));
    }
    let f = dsl::parse_series("x^3*log", &env)?;
    for i in 0..=4 {
        println!("D^{i}(x^3*log) = {}", format_terms(&nth_derivative(&f, i).terms_prefix(4, &b)?, false));
    }
    Ok(())
}
