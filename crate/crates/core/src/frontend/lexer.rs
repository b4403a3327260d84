use std::rc::Rc;

use super::ast::SourceLoc;
use crate::diag::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Keyword(&'static str),
    Int(u64),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokKind,
    pub loc: SourceLoc,
}

impl Token {
    /// Source spelling, used for assertion texts and error messages.
    pub fn spelling(&self) -> String {
        match &self.kind {
            TokKind::Ident(s) => s.clone(),
            TokKind::Keyword(k) => k.to_string(),
            TokKind::Int(v) => v.to_string(),
            TokKind::Punct(p) => p.to_string(),
        }
    }

    pub fn is_wordlike(&self) -> bool {
        !matches!(self.kind, TokKind::Punct(_))
    }
}

pub const KEYWORDS: &[&str] = &[
    "int", "bool", "void", "true", "false", "class", "struct", "public", "private",
    "protected", "virtual", "override", "template", "typename", "friend", "typedef", "const",
    "return", "if", "else", "while", "for", "do", "break", "continue", "new", "delete", "this",
    "assert", "nullptr", "try", "catch", "throw", "unsigned", "signed", "long", "short", "char",
    "float", "double", "static", "namespace", "using", "operator", "goto", "switch", "case",
    "inline", "explicit",
];

// Longest first so that maximal munch works by prefix test.
const PUNCTS: &[&str] = &[
    "::", "->", "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=", "&&", "||",
    "<", ">", "=", "+", "-", "*", "/", "%", "!", "&", "(", ")", "{", "}", "[", "]", ";", ",",
    ".", ":", "?", "~",
];

const ACCEPTED_INCLUDES: &[&str] = &["<cassert>", "<assert.h>"];

/// Splits MiniC++ source into tokens. Comments and the accepted
/// `#include` lines are skipped.
pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, Diagnostic> {
    let file: Rc<str> = Rc::from(file);
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut line_start = true;
    let loc = |line, col| SourceLoc::new(file.clone(), line, col);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
                line_start = true;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' || c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let start = loc(line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(Diagnostic::error(start, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c == '#' {
            let start = loc(line, col);
            if !line_start {
                return Err(Diagnostic::error(start, "stray `#` in program"));
            }
            let mut text = String::new();
            while i < chars.len() && chars[i] != '\n' {
                text.push(chars[i]);
                bump!();
            }
            let words: Vec<&str> = text[1..].split_whitespace().collect();
            let ok = match words.as_slice() {
                ["include", h] => ACCEPTED_INCLUDES.contains(h),
                [inc, ..] if inc.starts_with("include<") => {
                    ACCEPTED_INCLUDES.contains(&&inc["include".len()..])
                }
                _ => false,
            };
            if !ok {
                return Err(Diagnostic::error(
                    start,
                    format!("unsupported preprocessor directive `{}`", text.trim()),
                ));
            }
            continue;
        }
        line_start = false;
        let here = loc(line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            let kind = match KEYWORDS.iter().find(|k| **k == s) {
                Some(k) => TokKind::Keyword(k),
                None => TokKind::Ident(s),
            };
            toks.push(Token { kind, loc: here });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                u64::from_str_radix(hex, 16)
            } else {
                s.parse::<u64>()
            };
            let value = match parsed {
                Ok(v) => v,
                Err(e) if *e.kind() == std::num::IntErrorKind::PosOverflow => {
                    return Err(Diagnostic::error(here, format!("integer literal `{s}` is too large")))
                }
                Err(_) => {
                    return Err(Diagnostic::error(here, format!("invalid integer literal `{s}`")))
                }
            };
            toks.push(Token {
                kind: TokKind::Int(value),
                loc: here,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.len() {
                    bump!();
                }
                toks.push(Token {
                    kind: TokKind::Punct(p),
                    loc: here,
                });
            }
            None => {
                return Err(Diagnostic::error(here, format!("illegal character `{c}`")));
            }
        }
    }
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_tokens_of_minimal_program() {
        let t = tokenize("a.cpp", "int main(){return 0;}").unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!(t.last().unwrap().kind, TokKind::Punct("}"));
    }

    #[test]
    fn illegal_character_location() {
        let e = tokenize("a.cpp", "int x = @;").unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (1, 9));
    }

    #[test]
    fn closing_angles_stay_separate() {
        let t = tokenize("a.cpp", "A<B<int>> x; a >= b").unwrap();
        let ps: Vec<_> = t
            .iter()
            .filter_map(|t| match t.kind {
                TokKind::Punct(p) => Some(p),
                _ => None,
            })
            .collect();
        assert_eq!(ps, vec!["<", "<", ">", ">", ";", ">="]);
    }

    #[test]
    fn include_and_comments() {
        let src = "#include <cassert>\n/* x\n y */ int // z\nmain";
        let t = tokenize("a.cpp", src).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].loc.line, t[0].loc.column), (3, 7));
        assert!(tokenize("a.cpp", "#include <vector>\n").is_err());
        assert!(tokenize("a.cpp", "/* open").is_err());
    }

    #[test]
    fn literal_range() {
        assert!(tokenize("a.cpp", "18446744073709551615").is_ok());
        assert!(tokenize("a.cpp", "18446744073709551616").is_err());
    }
}
