//! `F ∘ log ∘ G`, `log G` and `exp F`.

use logfield::composition::{compose_with_log, exp_of, log_of};
use logfield::dsl::{self, Env};
use logfield::series::{format_terms, Budget, Series};

fn main() -> logfield::error::Result<()> {
    let env = Env::default();
    let b = Budget::default();
    let g = dsl::parse_series("x^2*geom(x^-1)", &env)?;
    let show = |s: &Series| -> logfield::error::Result<String> {
        let p = s.observe(5, &b)?;
        Ok(format_terms(&p.terms, p.exhausted))
    };
    println!("G          = {}", show(&g)?);
    println!("log G      = {}", show(&log_of(&g, &b)?)?);
    println!("exp(log G) = {}", show(&exp_of(&log_of(&g, &b)?, &b)?)?);
    for f in ["exp^-1", "x", "exp^-1/2 + x^-1", "exp*log"] {
        let fs = dsl::parse_series(f, &env)?;
        println!("({f}) ∘ log ∘ G = {}", show(&compose_with_log(&fs, &g, &b)?)?);
    }
    Ok(())
}
