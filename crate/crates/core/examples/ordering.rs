//! Sorting monomials over `exp`, `x` and the iterated logarithms.

use logfield::monomial::{Level, Monomial};
use logfield::scalar::{int, rat};

fn main() {
    let mut ms = vec![
        Monomial::x(),
        Monomial::exp_power(int(-1)),
        Monomial::factor(Level::LOG, int(5)),
        Monomial::factor(Level::X, rat(1, 2)).mul(&Monomial::factor(Level::log(2), int(-3))),
        Monomial::factor(Level::X, int(-2)),
        Monomial::one(),
        Monomial::exp_power(rat(1, 3)),
    ];
    ms.sort();
    for m in ms.iter().rev() {
        let kind = if m.is_large() { "large" } else if m.is_small() { "small" } else { "one" };
        println!("{m:>24}  {kind}");
    }
}
