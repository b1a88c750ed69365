//! A small library of named automata used by tests, the CLI and the bindings.

use crate::dfao::{parse_dfao, Dfao};

pub const PAPERFOLDING: &str = "\
base 2
states a b c d
initial a
output a=1 b=1 c=0 d=0
delta a 0 a
delta a 1 b
delta b 0 c
delta b 1 b
delta c 0 a
delta c 1 d
delta d 0 c
delta d 1 d
";

/// Pure 3-automaton whose value depends on the parity of `n` and the
/// leading base-3 digit; it has no density along the primes.
pub const THREE_STATE: &str = "\
base 3
states a b c
initial a
output a=a b=b c=c
delta a 0 a
delta a 1 b
delta a 2 b
delta b 0 b
delta b 1 c
delta b 2 b
delta c 0 c
delta c 1 b
delta c 2 c
";

/// Indicator of integers whose base-3 expansion starts with `10..01`.
pub const ONE_ZEROS_ONE: &str = "\
base 3
states a b c d
initial a
output a=0 b=0 c=0 d=1
delta a 0 a
delta a 1 b
delta a 2 c
delta b 0 b
delta b 1 d
delta b 2 c
delta c 0 c
delta c 1 c
delta c 2 c
delta d 0 d
delta d 1 d
delta d 2 d
";

/// Five-state binary automaton whose Müllner group is `Sym(3)`; the initial
/// state loops on digit 1, not 0.
pub const SYM3: &str = "\
base 2
states q0 q1 q2 q3 q4
initial q0
output q0=q0 q1=q1 q2=q2 q3=q3 q4=q4
delta q0 0 q1
delta q0 1 q0
delta q1 0 q0
delta q1 1 q4
delta q2 0 q2
delta q2 1 q3
delta q3 0 q0
delta q3 1 q1
delta q4 0 q2
delta q4 1 q2
";

pub fn paperfolding() -> Dfao {
    parse_dfao(PAPERFOLDING).expect("corpus automaton")
}

pub fn three_state() -> Dfao {
    parse_dfao(THREE_STATE).expect("corpus automaton")
}

pub fn one_zeros_one() -> Dfao {
    parse_dfao(ONE_ZEROS_ONE).expect("corpus automaton")
}

pub fn sym3() -> Dfao {
    parse_dfao(SYM3).expect("corpus automaton")
}

/// Thue–Morse: parity of the binary digit sum.
pub fn thue_morse() -> Dfao {
    Dfao::from_fn(2, &["A", "B"], 0, |q, d| q ^ d as usize, &["0", "1"]).expect("corpus automaton")
}

/// Parity of `n` read in base 3 (the parity of the number of odd digits).
pub fn parity_base3() -> Dfao {
    Dfao::from_fn(3, &["e", "o"], 0, |q, d| q ^ (d as usize & 1), &["0", "1"])
        .expect("corpus automaton")
}

/// Parity of `n` read in base 9.
pub fn parity_base9() -> Dfao {
    Dfao::from_fn(9, &["e", "o"], 0, |q, d| q ^ (d as usize & 1), &["0", "1"])
        .expect("corpus automaton")
}

/// Rudin–Shapiro: parity of the number of `11` blocks.
pub fn rudin_shapiro() -> Dfao {
    // states: (parity, last digit was 1)
    Dfao::from_fn(
        2,
        &["p0", "p0x", "p1", "p1x"],
        0,
        |q, d| {
            let (par, last) = (q / 2, q % 2);
            let par = if last == 1 && d == 1 { par ^ 1 } else { par };
            par * 2 + d as usize
        },
        &["0", "0", "1", "1"],
    )
    .expect("corpus automaton")
}

/// Constant sequence with symbol `sym` in base `k`.
pub fn constant(k: u32, sym: &str) -> Dfao {
    Dfao::from_fn(k, &["z"], 0, |_, _| 0, &[sym]).expect("corpus automaton")
}

/// Leading base-`k` digit of `n`, with `0` for `n = 0`.
pub fn leading_digit(k: u32) -> Dfao {
    let names: Vec<String> = (0..k).map(|d| if d == 0 { "s".into() } else { format!("l{d}") }).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let outs: Vec<String> = (0..k).map(|d| d.to_string()).collect();
    let out_refs: Vec<&str> = outs.iter().map(String::as_str).collect();
    Dfao::from_fn(
        k,
        &name_refs,
        0,
        |q, d| if q == 0 { d as usize } else { q },
        &out_refs,
    )
    .expect("corpus automaton")
}

/// Every corpus automaton, for property sweeps.
pub fn all() -> Vec<Dfao> {
    vec![
        paperfolding(),
        three_state(),
        one_zeros_one(),
        sym3(),
        thue_morse(),
        parity_base3(),
        parity_base9(),
        rudin_shapiro(),
        constant(2, "x"),
        leading_digit(3),
    ]
}

/// Corpus automata that are primitive and prolongable as given.
pub fn primitive() -> Vec<Dfao> {
    vec![
        paperfolding(),
        thue_morse(),
        parity_base3(),
        parity_base9(),
        rudin_shapiro(),
        constant(3, "x"),
    ]
}
