//! Division and real powers.

use logfield::dsl::{self, Env};
use logfield::field::{divide, power, reciprocal};
use logfield::scalar::rat;
use logfield::series::{format_terms, Budget};

fn main() -> logfield::error::Result<()> {
    let env = Env::default();
    let b = Budget::default();
    let f = dsl::parse_series("x + log", &env)?;
    let g = dsl::parse_series("x^2*log - exp^-1", &env)?;
    let show = |s: &logfield::series::Series| -> logfield::error::Result<String> {
        Ok(format_terms(&s.terms_prefix(6, &b)?, false))
    };
    println!("1/G     = {}", show(&reciprocal(&g, &b)?)?);
    println!("F/G     = {}", show(&divide(&f, &g, &b)?)?);
    println!("G^(1/2) = {}", show(&power(&g, &rat(1, 2), &b)?)?);
    println!("G^(-3)  = {}", show(&power(&g, &rat(-3, 1), &b)?)?);
    Ok(())
}
