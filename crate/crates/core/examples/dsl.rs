//! Runs a short script through the expression language.

use logfield::dsl::{self, Env, Output};

const SCRIPT: &str = "
let g = x^2*(1 + x^-1)
terms(complog(exp^-1, g), 3)
cmp(exp^-1, x^-1)
D(log[2])
let e = geom(x^-1 + log^-1)
trunc(e, log^-2)
";

fn main() -> logfield::error::Result<()> {
    let mut env = Env::default();
    env.display_terms = 6;
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    dsl::run_source(&mut env, SCRIPT, Output { json: false }, &mut out, &mut err)?;
    dsl::run_source(&mut env, "terms(e, 2)", Output { json: true }, &mut out, &mut err)
}
