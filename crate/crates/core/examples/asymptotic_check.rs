//! Ratios `|f(x) − F_n(x)| / n(x)` for a few germs and their expansions.

use logfield::dsl::{self, Env};
use logfield::numeric::{check_o, EvalGrid, NumericGerm};

fn main() -> logfield::error::Result<()> {
    let env = Env::default();
    let b = env.budget;
    let grid = EvalGrid::parse("100,1000,10000")?;
    for (germ, series, mono) in [
        ("geom", "geom(x^-1)", "x^-3"),
        ("expinv", "expof(x^-1)", "x^-4"),
        ("sqrt1p", "pow(x + 1, 1/2)", "x^-2"),
        ("geom", "1 + x^-1", "x^-1"),
    ] {
        let f = NumericGerm::builtin(germ)?;
        let s = dsl::parse_series(series, &env)?;
        let n = dsl::parse_monomial(mono)?;
        let report = check_o(&f, &s, &n, &grid, &b)?;
        println!("{germ} vs {series} at {mono}: {}", report.to_json());
    }
    Ok(())
}
