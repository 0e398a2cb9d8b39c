//! S-expressions in solver responses.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    /// `|...|` symbol, stored without the bars.
    Quoted(String),
    Str(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s) | Sexpr::Quoted(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(s) => write!(f, "{s}"),
            Sexpr::Quoted(s) => write!(f, "|{s}|"),
            Sexpr::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Sexpr::List(items) => {
                write!(f, "(")?;
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_space(&chars, &mut pos);
        if pos == chars.len() {
            return Ok(out);
        }
        out.push(parse_one(&chars, &mut pos)?);
    }
}

pub fn parse(text: &str) -> Result<Sexpr, String> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(format!("expected one expression, found {n}")),
    }
}

/// True when `text` holds only complete expressions (balanced parentheses
/// outside of quoted symbols and strings).
pub fn is_complete(text: &str) -> bool {
    let mut depth = 0i64;
    let mut in_bar = false;
    let mut in_str = false;
    let mut seen = false;
    for c in text.chars() {
        if in_bar {
            in_bar = c != '|';
            continue;
        }
        if in_str {
            in_str = c != '"';
            continue;
        }
        match c {
            '(' => {
                depth += 1;
                seen = true;
            }
            ')' => depth -= 1,
            '|' => in_bar = true,
            '"' => in_str = true,
            c if !c.is_whitespace() => seen = true,
            _ => {}
        }
    }
    seen && depth == 0 && !in_bar && !in_str
}

fn skip_space(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() {
        if chars[*pos].is_whitespace() {
            *pos += 1;
        } else if chars[*pos] == ';' {
            while *pos < chars.len() && chars[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn parse_one(chars: &[char], pos: &mut usize) -> Result<Sexpr, String> {
    skip_space(chars, pos);
    let Some(&c) = chars.get(*pos) else {
        return Err("unexpected end of input".into());
    };
    match c {
        '(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_space(chars, pos);
                match chars.get(*pos) {
                    None => return Err("unclosed parenthesis".into()),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    Some(_) => items.push(parse_one(chars, pos)?),
                }
            }
        }
        ')' => Err(format!("unexpected `)` at offset {pos}")),
        '|' => {
            let start = *pos + 1;
            let end = (start..chars.len()).find(|&k| chars[k] == '|').ok_or("unclosed `|`")?;
            *pos = end + 1;
            Ok(Sexpr::Quoted(chars[start..end].iter().collect()))
        }
        '"' => {
            let mut s = String::new();
            let mut k = *pos + 1;
            loop {
                match chars.get(k) {
                    None => return Err("unclosed string".into()),
                    Some('"') if chars.get(k + 1) == Some(&'"') => {
                        s.push('"');
                        k += 2;
                    }
                    Some('"') => break,
                    Some(&c) => {
                        s.push(c);
                        k += 1;
                    }
                }
            }
            *pos = k + 1;
            Ok(Sexpr::Str(s))
        }
        _ => {
            let start = *pos;
            while *pos < chars.len() && !chars[*pos].is_whitespace() && !matches!(chars[*pos], '(' | ')' | '|' | '"') {
                *pos += 1;
            }
            Ok(Sexpr::Atom(chars[start..*pos].iter().collect()))
        }
    }
}
