//! Partial Taylor sums of `F ∘ (G + H)` against the full composition.

use logfield::composition::{compose_with_log, exp_of, taylor_partial};
use logfield::dsl::{self, Env};
use logfield::series::{format_terms, Budget};

fn main() -> logfield::error::Result<()> {
    let env = Env::default();
    let b = Budget::default();
    let f = dsl::parse_series("x^2 + exp^-1", &env)?;
    let g = dsl::parse_series("log", &env)?;
    let h = dsl::parse_series("geom(log^-1) - 1", &env)?;
    let full = compose_with_log(&f, &exp_of(&g.add(&h), &b)?, &b)?;
    println!("exact: {}", format_terms(&full.terms_prefix(6, &b)?, false));
    for n in 0..4 {
        let t = taylor_partial(&f, &g, &h, n, &b)?;
        println!("N = {n}: {}", format_terms(&t.terms_prefix(6, &b)?, false));
    }
    Ok(())
}
