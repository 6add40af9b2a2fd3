//! `1/(1 − ε)` for small `ε`, including `ε` spread over several levels.

use logfield::dsl::{self, Env};
use logfield::field::{compose_ps1, PowerSeries1};
use logfield::series::{format_terms, Budget};

fn main() -> logfield::error::Result<()> {
    let env = Env::default();
    let b = Budget::default();
    for text in ["x^-1", "x^-1 + log^-1", "exp^-1*x + x^-1/2", "log^-1*log[2]"] {
        let eps = dsl::parse_series(text, &env)?;
        let g = compose_ps1(&PowerSeries1::geom(), &eps, &b)?;
        println!("1/(1 - ({text})) = {}", format_terms(&g.terms_prefix(8, &b)?, false));
    }
    let eps = dsl::parse_series("x^-1 + log^-1", &env)?;
    let log1p = compose_ps1(&PowerSeries1::log(), &eps, &b)?;
    println!("log(1 + x^-1 + log^-1) = {}", format_terms(&log1p.terms_prefix(6, &b)?, false));
    Ok(())
}
