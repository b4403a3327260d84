//! SMT-LIB v2 printing and parsing.
//!
//! The printer emits a self-contained `QF_ABV` script. Subterms with more
//! than one parent are bound once with `define-fun`. The parser reads that
//! dialect back (used for round-trip checks) and the `get-value` responses of
//! external solvers.

use std::collections::HashMap;
use std::fmt::Write;

use crate::eval::Value;
use crate::term::{Node, Sort, Term, TermStore};
use crate::SolverError;

/// Quotes a symbol when it is not a valid simple SMT-LIB symbol.
pub fn quote_symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

pub struct Script {
    pub text: String,
    /// Bit-vector and Boolean symbols in declaration order.
    pub value_symbols: Vec<String>,
}

/// Prints `assertions` as a complete script. Named assertions get
/// `:named` attributes. When `get_values` is set a `get-value` for every
/// non-array symbol follows the `get-model` command.
pub fn print_script(
    store: &TermStore,
    assertions: &[(Term, Option<String>)],
    get_values: bool,
) -> Script {
    let roots: Vec<Term> = assertions.iter().map(|(t, _)| *t).collect();
    let order = store.topo_order(&roots);
    let mut parents: HashMap<Term, u32> = HashMap::new();
    for &t in &order {
        for c in store.children(t) {
            *parents.entry(c).or_default() += 1;
        }
    }
    let mut out = String::new();
    out.push_str("(set-logic QF_ABV)\n(set-option :produce-models true)\n");
    let mut value_symbols = Vec::new();
    for &t in &order {
        if let Node::Symbol { name, sort } = store.node(t) {
            let _ = writeln!(out, "(declare-fun {} () {})", quote_symbol(name), sort);
            if !matches!(sort, Sort::Array(..)) {
                value_symbols.push(name.to_string());
            }
        }
    }
    let mut names: HashMap<Term, String> = HashMap::new();
    for &t in &order {
        let shared = parents.get(&t).copied().unwrap_or(0) > 1;
        if shared && !store.children(t).is_empty() {
            let body = print_term(store, t, &names);
            let n = format!("t!{}", t.index());
            let _ = writeln!(out, "(define-fun {} () {} {})", n, store.sort(t), body);
            names.insert(t, n);
        }
    }
    for (t, name) in assertions {
        let body = names
            .get(t)
            .cloned()
            .unwrap_or_else(|| print_term(store, *t, &names));
        match name {
            Some(n) => {
                let _ = writeln!(out, "(assert (! {} :named {}))", body, quote_symbol(n));
            }
            None => {
                let _ = writeln!(out, "(assert {})", body);
            }
        }
    }
    out.push_str("(check-sat)\n(get-model)\n");
    if get_values && !value_symbols.is_empty() {
        out.push_str("(get-value (");
        for (i, s) in value_symbols.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&quote_symbol(s));
        }
        out.push_str("))\n");
    }
    out.push_str("(exit)\n");
    Script {
        text: out,
        value_symbols,
    }
}

/// Prints one term, referring to already-named subterms by name.
pub fn print_term(store: &TermStore, root: Term, names: &HashMap<Term, String>) -> String {
    let mut out = String::new();
    emit(store, root, names, &mut out, true);
    out
}

fn emit(store: &TermStore, t: Term, names: &HashMap<Term, String>, out: &mut String, top: bool) {
    if !top {
        if let Some(n) = names.get(&t) {
            out.push_str(n);
            return;
        }
    }
    let app = |op: &str, args: &[Term], out: &mut String| {
        out.push('(');
        out.push_str(op);
        for &a in args {
            out.push(' ');
            emit(store, a, names, out, false);
        }
        out.push(')');
    };
    match store.node(t) {
        Node::True => out.push_str("true"),
        Node::False => out.push_str("false"),
        Node::BvConst { width, value } => {
            let _ = write!(out, "(_ bv{value} {width})");
        }
        Node::Symbol { name, .. } => out.push_str(&quote_symbol(name)),
        Node::Not(a) => app("not", &[*a], out),
        Node::And(xs) => app("and", xs, out),
        Node::Or(xs) => app("or", xs, out),
        Node::Ite(c, a, b) => app("ite", &[*c, *a, *b], out),
        Node::Eq(a, b) => app("=", &[*a, *b], out),
        Node::BvNeg(a) => app("bvneg", &[*a], out),
        Node::BvAdd(a, b) => app("bvadd", &[*a, *b], out),
        Node::BvSub(a, b) => app("bvsub", &[*a, *b], out),
        Node::BvMul(a, b) => app("bvmul", &[*a, *b], out),
        Node::BvSdiv(a, b) => app("bvsdiv", &[*a, *b], out),
        Node::BvSrem(a, b) => app("bvsrem", &[*a, *b], out),
        Node::BvUdiv(a, b) => app("bvudiv", &[*a, *b], out),
        Node::BvUrem(a, b) => app("bvurem", &[*a, *b], out),
        Node::BvSlt(a, b) => app("bvslt", &[*a, *b], out),
        Node::BvSle(a, b) => app("bvsle", &[*a, *b], out),
        Node::BvUlt(a, b) => app("bvult", &[*a, *b], out),
        Node::BvUle(a, b) => app("bvule", &[*a, *b], out),
        Node::Extract { hi, lo, arg } => app(&format!("(_ extract {hi} {lo})"), &[*arg], out),
        Node::Concat(a, b) => app("concat", &[*a, *b], out),
        Node::ZeroExt { by, arg } => app(&format!("(_ zero_extend {by})"), &[*arg], out),
        Node::SignExt { by, arg } => app(&format!("(_ sign_extend {by})"), &[*arg], out),
        Node::Select(a, i) => app("select", &[*a, *i], out),
        Node::Store(a, i, v) => app("store", &[*a, *i, *v], out),
        Node::ConstArray { sort, value } => app(&format!("(as const {sort})"), &[*value], out),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            SExpr::List(_) => None,
        }
    }
    fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            SExpr::Atom(_) => None,
        }
    }
}

/// Parses a sequence of s-expressions. `|quoted|` symbols are returned
/// without bars, string literals keep their quotes, comments are skipped.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, SolverError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().unwrap();
                let Some(top) = stack.last_mut() else {
                    return Err(SolverError::Parse("unbalanced `)`".into()));
                };
                top.push(SExpr::List(done));
                i += 1;
            }
            '|' => {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(SolverError::Parse("unterminated quoted symbol".into()));
                }
                let s: String = chars[start..i].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(s));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    if chars[i] == '"' {
                        if i + 1 < chars.len() && chars[i + 1] == '"' {
                            i += 2;
                            continue;
                        }
                        break;
                    }
                    i += 1;
                }
                i += 1;
                let s: String = chars[start..i.min(chars.len())].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|;\"".contains(chars[i])
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SolverError::Parse("unbalanced `(`".into()));
    }
    Ok(stack.pop().unwrap())
}

fn perr<T>(msg: impl Into<String>) -> Result<T, SolverError> {
    Err(SolverError::Parse(msg.into()))
}

fn parse_sort(e: &SExpr) -> Result<Sort, SolverError> {
    match e {
        SExpr::Atom(a) if a == "Bool" => Ok(Sort::Bool),
        SExpr::List(l) => match l.as_slice() {
            [SExpr::Atom(u), SExpr::Atom(bv), SExpr::Atom(w)] if u == "_" && bv == "BitVec" => {
                Ok(Sort::BitVec(w.parse().map_err(|_| SolverError::Parse(format!("bad width {w}")))?))
            }
            [SExpr::Atom(arr), i, e] if arr == "Array" => {
                let (Sort::BitVec(iw), Sort::BitVec(ew)) = (parse_sort(i)?, parse_sort(e)?) else {
                    return perr("array sorts must map bit-vectors to bit-vectors");
                };
                Ok(Sort::Array(iw, ew))
            }
            _ => perr(format!("unknown sort {e:?}")),
        },
        _ => perr(format!("unknown sort {e:?}")),
    }
}

/// Parses a bit-vector or Boolean literal: `#b..`, `#x..`, `(_ bvN w)`,
/// `true`, `false`.
pub fn parse_value(e: &SExpr) -> Result<Value, SolverError> {
    match e {
        SExpr::Atom(a) if a == "true" => Ok(Value::Bool(true)),
        SExpr::Atom(a) if a == "false" => Ok(Value::Bool(false)),
        SExpr::Atom(a) if a.starts_with("#b") => {
            let digits = &a[2..];
            let value = u64::from_str_radix(digits, 2)
                .map_err(|_| SolverError::Parse(format!("bad binary literal {a}")))?;
            Ok(Value::Bv {
                width: digits.len() as u32,
                value,
            })
        }
        SExpr::Atom(a) if a.starts_with("#x") => {
            let digits = &a[2..];
            let value = u64::from_str_radix(digits, 16)
                .map_err(|_| SolverError::Parse(format!("bad hex literal {a}")))?;
            Ok(Value::Bv {
                width: 4 * digits.len() as u32,
                value,
            })
        }
        SExpr::List(l) => match l.as_slice() {
            [SExpr::Atom(u), SExpr::Atom(bv), SExpr::Atom(w)] if u == "_" && bv.starts_with("bv") => {
                let value = bv[2..]
                    .parse()
                    .map_err(|_| SolverError::Parse(format!("bad literal {bv}")))?;
                let width = w
                    .parse()
                    .map_err(|_| SolverError::Parse(format!("bad width {w}")))?;
                Ok(Value::Bv { width, value })
            }
            _ => perr(format!("unsupported value {e:?}")),
        },
        _ => perr(format!("unsupported value {e:?}")),
    }
}

/// Parses a `get-value` response `((sym val) ...)`.
pub fn parse_get_value(e: &SExpr) -> Result<HashMap<String, Value>, SolverError> {
    let Some(pairs) = e.list() else {
        return perr("get-value response is not a list");
    };
    let mut out = HashMap::new();
    for p in pairs {
        match p.list() {
            Some([SExpr::Atom(name), v]) => {
                out.insert(name.clone(), parse_value(v)?);
            }
            _ => return perr(format!("malformed get-value entry {p:?}")),
        }
    }
    Ok(out)
}

/// A script parsed back into a term store.
pub struct ParsedScript {
    pub assertions: Vec<(Term, Option<String>)>,
}

/// Parses scripts in the dialect produced by [`print_script`]. Symbols are
/// created in `store`; unknown commands are ignored.
pub fn parse_script(store: &mut TermStore, text: &str) -> Result<ParsedScript, SolverError> {
    let mut defs: HashMap<String, Term> = HashMap::new();
    let mut assertions = Vec::new();
    for cmd in parse_sexprs(text)? {
        let Some(l) = cmd.list() else {
            return perr("expected a command");
        };
        match l.first().and_then(SExpr::atom) {
            Some("declare-fun") => {
                let [_, SExpr::Atom(name), SExpr::List(args), sort] = l else {
                    return perr("malformed declare-fun");
                };
                if !args.is_empty() {
                    return perr("functions with arguments are not supported");
                }
                let t = store.symbol(name, parse_sort(sort)?);
                defs.insert(name.clone(), t);
            }
            Some("define-fun") => {
                let [_, SExpr::Atom(name), SExpr::List(args), _sort, body] = l else {
                    return perr("malformed define-fun");
                };
                if !args.is_empty() {
                    return perr("functions with arguments are not supported");
                }
                let t = parse_term(store, &defs, body)?;
                defs.insert(name.clone(), t);
            }
            Some("assert") => {
                let [_, body] = l else {
                    return perr("malformed assert");
                };
                let (body, name) = match body.list() {
                    Some([SExpr::Atom(bang), inner, SExpr::Atom(key), SExpr::Atom(n)])
                        if bang == "!" && key == ":named" =>
                    {
                        (inner, Some(n.clone()))
                    }
                    _ => (body, None),
                };
                let t = parse_term(store, &defs, body)?;
                assertions.push((t, name));
            }
            _ => {}
        }
    }
    Ok(ParsedScript { assertions })
}

fn parse_term(
    store: &mut TermStore,
    defs: &HashMap<String, Term>,
    e: &SExpr,
) -> Result<Term, SolverError> {
    match e {
        SExpr::Atom(a) => {
            if let Some(&t) = defs.get(a) {
                return Ok(t);
            }
            match parse_value(e) {
                Ok(Value::Bool(b)) => Ok(store.bool_const(b)),
                Ok(Value::Bv { width, value }) => Ok(store.bv(width, value)),
                _ => perr(format!("unknown symbol {a}")),
            }
        }
        SExpr::List(l) => {
            if let Ok(Value::Bv { width, value }) = parse_value(e) {
                return Ok(store.bv(width, value));
            }
            let Some((head, rest)) = l.split_first() else {
                return perr("empty application");
            };
            let args = rest
                .iter()
                .map(|a| parse_term(store, defs, a))
                .collect::<Result<Vec<_>, _>>()?;
            let arity = |n: usize| -> Result<(), SolverError> {
                if args.len() == n {
                    Ok(())
                } else {
                    perr(format!("{head:?} expects {n} arguments"))
                }
            };
            if let SExpr::List(h) = head {
                let num = |i: usize| -> Result<u32, SolverError> {
                    h.get(i)
                        .and_then(SExpr::atom)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| SolverError::Parse(format!("bad indexed operator {h:?}")))
                };
                return match h.first().and_then(SExpr::atom) {
                    Some("_") => {
                        arity(1)?;
                        match h.get(1).and_then(SExpr::atom) {
                            Some("extract") => Ok(store.extract(num(2)?, num(3)?, args[0])),
                            Some("zero_extend") => Ok(store.zero_ext(num(2)?, args[0])),
                            Some("sign_extend") => Ok(store.sign_ext(num(2)?, args[0])),
                            _ => perr(format!("unknown indexed operator {h:?}")),
                        }
                    }
                    Some("as") => {
                        arity(1)?;
                        let Some(Sort::Array(iw, _)) = h.get(2).map(parse_sort).transpose()? else {
                            return perr("bad constant array");
                        };
                        Ok(store.const_array(iw, args[0]))
                    }
                    _ => perr(format!("unknown operator {h:?}")),
                };
            }
            let op = head.atom().unwrap();
            let bin = |store: &mut TermStore, f: fn(&mut TermStore, Term, Term) -> Term| {
                arity(2)?;
                Ok(f(store, args[0], args[1]))
            };
            match op {
                "not" => {
                    arity(1)?;
                    Ok(store.not(args[0]))
                }
                "and" => Ok(store.and(&args)),
                "or" => Ok(store.or(&args)),
                "=>" => bin(store, TermStore::implies),
                "ite" => {
                    arity(3)?;
                    Ok(store.ite(args[0], args[1], args[2]))
                }
                "=" => bin(store, TermStore::eq),
                "distinct" => bin(store, TermStore::neq),
                "bvneg" => {
                    arity(1)?;
                    Ok(store.bv_neg(args[0]))
                }
                "bvadd" => bin(store, TermStore::bv_add),
                "bvsub" => bin(store, TermStore::bv_sub),
                "bvmul" => bin(store, TermStore::bv_mul),
                "bvsdiv" => bin(store, TermStore::bv_sdiv),
                "bvsrem" => bin(store, TermStore::bv_srem),
                "bvudiv" => bin(store, TermStore::bv_udiv),
                "bvurem" => bin(store, TermStore::bv_urem),
                "bvslt" => bin(store, TermStore::bv_slt),
                "bvsle" => bin(store, TermStore::bv_sle),
                "bvult" => bin(store, TermStore::bv_ult),
                "bvule" => bin(store, TermStore::bv_ule),
                "concat" => bin(store, TermStore::concat),
                "select" => bin(store, TermStore::select),
                "store" => {
                    arity(3)?;
                    Ok(store.store(args[0], args[1], args[2]))
                }
                _ => perr(format!("unknown operator {op}")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_with;
    use proptest::prelude::*;

    #[test]
    fn quoting() {
        assert_eq!(quote_symbol("x!1"), "x!1");
        assert_eq!(quote_symbol("main::p#2"), "|main::p#2|");
        assert_eq!(quote_symbol("1x"), "|1x|");
    }

    #[test]
    fn parses_values() {
        let es = parse_sexprs("((x #b0101) (|a b| #xff) (y (_ bv7 32)) (c true))").unwrap();
        let m = parse_get_value(&es[0]).unwrap();
        assert_eq!(m["x"], Value::Bv { width: 4, value: 5 });
        assert_eq!(m["a b"], Value::Bv { width: 8, value: 255 });
        assert_eq!(m["y"], Value::Bv { width: 32, value: 7 });
        assert_eq!(m["c"], Value::Bool(true));
    }

    #[test]
    fn shared_subterms_are_defined_once() {
        let mut s = TermStore::new();
        let x = s.symbol("x", Sort::BitVec(32));
        let one = s.bv(32, 1);
        let y = s.bv_add(x, one);
        let sq = s.bv_mul(y, y);
        let zero = s.bv(32, 0);
        let a = s.eq(sq, zero);
        let script = print_script(&s, &[(a, Some("p".into()))], true);
        assert_eq!(script.text.matches("bvadd").count(), 1);
        assert!(script.text.contains("(define-fun t!"));
        assert!(script.text.contains(":named p"));
        assert!(script.text.contains("(get-value (x))"));
    }

    proptest! {
        /// Printing and re-parsing yields terms with identical values.
        #[test]
        fn round_trip_preserves_meaning(ops in proptest::collection::vec((0u8..10, 0usize..8, 0usize..8), 1..20),
                                        xv in any::<u16>(), yv in any::<u16>()) {
            let mut s = TermStore::new();
            let x = s.symbol("x", Sort::BitVec(16));
            let y = s.symbol("y|q", Sort::BitVec(16));
            let zero = s.bv(16, 0);
            let mem0 = s.const_array(16, zero);
            let mut pool = vec![x, y, s.bv(16, 3)];
            for (op, i, j) in ops {
                let a = pool[i % pool.len()];
                let b = pool[j % pool.len()];
                let t = match op {
                    0 => s.bv_add(a, b),
                    1 => s.bv_mul(a, b),
                    2 => s.bv_sdiv(a, b),
                    3 => s.bv_urem(a, b),
                    4 => { let c = s.bv_slt(a, b); s.ite(c, a, b) }
                    5 => { let m = s.store(mem0, a, b); s.select(m, b) }
                    6 => { let e = s.extract(7, 0, a); s.sign_ext(8, e) }
                    7 => s.bv_neg(a),
                    8 => { let e = s.extract(15, 8, a); let f = s.extract(7, 0, b); s.concat(e, f) }
                    _ => s.bv_sub(a, b),
                };
                pool.push(t);
            }
            let last = *pool.last().unwrap();
            let probe = s.symbol("r", Sort::BitVec(16));
            let eq = s.eq(last, probe);
            let script = print_script(&s, &[(eq, None)], false);
            let mut s2 = TermStore::new();
            let parsed = parse_script(&mut s2, &script.text).unwrap();
            let env = HashMap::from([
                ("x".to_string(), Value::Bv { width: 16, value: xv as u64 }),
                ("y_q".to_string(), Value::Bv { width: 16, value: yv as u64 }),
                ("y|q".to_string(), Value::Bv { width: 16, value: yv as u64 }),
            ]);
            let v1 = eval_with(&s, &env, last);
            let r = Value::Bv { width: 16, value: v1.as_u64() };
            let mut env2 = env.clone();
            env2.insert("r".into(), r);
            prop_assert!(eval_with(&s2, &env2, parsed.assertions[0].0).as_bool());
        }
    }
}
