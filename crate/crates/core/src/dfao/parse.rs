use std::collections::HashMap;

use super::Dfao;
use crate::error::ParseError;

/// Reads the line-oriented automaton format:
///
/// ```text
/// base 2
/// states a b
/// initial a
/// output a=0 b=1
/// delta a 0 a
/// ...
/// ```
///
/// `#` starts a comment. `output` may be split across several lines. Every
/// `(state, digit)` pair needs exactly one `delta` line.
pub fn parse_dfao(text: &str) -> Result<Dfao, ParseError> {
    let mut base: Option<u32> = None;
    let mut names: Option<Vec<String>> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut initial: Option<usize> = None;
    let mut outputs: HashMap<usize, String> = HashMap::new();
    let mut delta: Vec<Option<usize>> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        let syntax = |msg: &str| ParseError::Syntax {
            line: line_no,
            msg: msg.to_string(),
        };
        let need_states = |index: &HashMap<String, usize>, s: &str| {
            index.get(s).copied().ok_or_else(|| ParseError::UndeclaredState {
                line: line_no,
                state: s.to_string(),
            })
        };
        match key {
            "base" => {
                let [b] = rest.as_slice() else {
                    return Err(syntax("expected `base <k>`"));
                };
                let b: u32 = b.parse().map_err(|_| syntax("base must be an integer"))?;
                if b < 2 {
                    return Err(syntax("base must be at least 2"));
                }
                if base.replace(b).is_some() {
                    return Err(syntax("duplicate base"));
                }
            }
            "states" => {
                if names.is_some() {
                    return Err(syntax("duplicate states declaration"));
                }
                if rest.is_empty() {
                    return Err(syntax("no states declared"));
                }
                let b = base.ok_or_else(|| syntax("`base` must precede `states`"))?;
                for (j, s) in rest.iter().enumerate() {
                    if index.insert(s.to_string(), j).is_some() {
                        return Err(syntax(&format!("duplicate state `{s}`")));
                    }
                }
                names = Some(rest.iter().map(|s| s.to_string()).collect());
                delta = vec![None; rest.len() * b as usize];
            }
            "initial" => {
                let [s] = rest.as_slice() else {
                    return Err(syntax("expected `initial <state>`"));
                };
                if names.is_none() {
                    return Err(syntax("`states` must precede `initial`"));
                }
                initial = Some(need_states(&index, s)?);
            }
            "output" => {
                if names.is_none() {
                    return Err(syntax("`states` must precede `output`"));
                }
                if rest.is_empty() {
                    return Err(syntax("empty output declaration"));
                }
                for item in rest {
                    let (s, o) = item
                        .split_once('=')
                        .ok_or_else(|| syntax("output entries are `state=symbol`"))?;
                    if o.is_empty() {
                        return Err(syntax("empty output symbol"));
                    }
                    let q = need_states(&index, s)?;
                    if outputs.insert(q, o.to_string()).is_some() {
                        return Err(syntax(&format!("duplicate output for `{s}`")));
                    }
                }
            }
            "delta" => {
                let [from, d, to] = rest.as_slice() else {
                    return Err(syntax("expected `delta <state> <digit> <state>`"));
                };
                let b = base.ok_or_else(|| syntax("`base` must precede `delta`"))?;
                if names.is_none() {
                    return Err(syntax("`states` must precede `delta`"));
                }
                let from = need_states(&index, from)?;
                let digit: u64 = d.parse().map_err(|_| syntax("digit must be an integer"))?;
                if digit >= b as u64 {
                    return Err(ParseError::DigitOutOfRange {
                        line: line_no,
                        digit,
                        base: b,
                    });
                }
                let to = need_states(&index, to)?;
                let slot = &mut delta[from * b as usize + digit as usize];
                if slot.is_some() {
                    return Err(syntax("duplicate transition"));
                }
                *slot = Some(to);
            }
            other => return Err(syntax(&format!("unknown directive `{other}`"))),
        }
    }

    let base = base.ok_or(ParseError::MissingDeclaration("base"))?;
    let names = names.ok_or(ParseError::MissingDeclaration("states"))?;
    let initial = initial.ok_or(ParseError::MissingDeclaration("initial"))?;
    let mut table = Vec::with_capacity(delta.len());
    for (i, t) in delta.iter().enumerate() {
        let q = i / base as usize;
        let d = (i % base as usize) as u32;
        table.push(t.ok_or_else(|| ParseError::MissingTransition {
            state: names[q].clone(),
            digit: d,
        })?);
    }
    let mut out = Vec::with_capacity(names.len());
    for (q, n) in names.iter().enumerate() {
        out.push(
            outputs
                .remove(&q)
                .ok_or_else(|| ParseError::MissingOutput(n.clone()))?,
        );
    }
    Ok(Dfao {
        base,
        names,
        initial,
        delta: table,
        output: out,
    })
}
