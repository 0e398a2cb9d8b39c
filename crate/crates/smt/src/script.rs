//! SMT-LIB2 scripts, identifiers and literals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use wfsound_core::rational::Rational;

use crate::sexpr::Sexpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
            Sort::Real => "Real",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub variable: String,
    pub minimize: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtScript {
    pub logic: String,
    pub declarations: Vec<String>,
    pub assertions: Vec<String>,
    pub objective: Option<Objective>,
}

impl SmtScript {
    pub fn new(logic: impl Into<String>) -> Self {
        SmtScript {
            logic: logic.into(),
            declarations: Vec::new(),
            assertions: Vec::new(),
            objective: None,
        }
    }

    pub fn declare(&mut self, name: &str, sort: Sort) {
        self.declarations.push(format!("(declare-const {name} {sort})"));
    }

    pub fn assert(&mut self, term: impl Into<String>) {
        self.assertions.push(format!("(assert {})", term.into()));
    }

    /// Everything up to, not including, `(check-sat)`.
    pub fn render(&self) -> String {
        let mut out = format!("(set-logic {})\n", self.logic);
        for d in &self.declarations {
            out.push_str(d);
            out.push('\n');
        }
        for a in &self.assertions {
            out.push_str(a);
            out.push('\n');
        }
        if let Some(obj) = &self.objective {
            let verb = if obj.minimize { "minimize" } else { "maximize" };
            out.push_str(&format!("({verb} {})\n", obj.variable));
        }
        out
    }
}

/// Quoted symbol `|{stem}{k}.{name}|`. The index keeps symbols distinct when
/// names collide after replacing characters that quoted symbols cannot hold.
pub fn symbol(stem: &str, k: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c == '|' || c == '\\' { '_' } else { c })
        .collect();
    format!("|{stem}{k}.{clean}|")
}

/// Symbol text without surrounding bars, as it appears in parsed responses.
pub fn unquoted(symbol: &str) -> &str {
    symbol
        .strip_prefix('|')
        .and_then(|s| s.strip_suffix('|'))
        .unwrap_or(symbol)
}

fn decimal(n: &BigInt) -> String {
    format!("{n}.0")
}

/// Real literal, e.g. `2.0`, `(- 2.0)`, `(/ 1.0 3.0)`.
pub fn real(value: &Rational) -> String {
    let body = |v: &Rational| {
        if v.denom().is_one() {
            decimal(v.numer())
        } else {
            format!("(/ {} {})", decimal(v.numer()), decimal(v.denom()))
        }
    };
    if value.is_negative() {
        format!("(- {})", body(&-value.clone()))
    } else {
        body(value)
    }
}

pub fn int_literal(value: i64) -> String {
    if value < 0 {
        format!("(- {})", value.unsigned_abs())
    } else {
        value.to_string()
    }
}

/// `(and ...)` with the usual simplifications for zero or one conjunct.
pub fn and(terms: Vec<String>) -> String {
    match terms.len() {
        0 => "true".into(),
        1 => terms.into_iter().next().expect("one term"),
        _ => format!("(and {})", terms.join(" ")),
    }
}

pub fn or(terms: Vec<String>) -> String {
    match terms.len() {
        0 => "false".into(),
        1 => terms.into_iter().next().expect("one term"),
        _ => format!("(or {})", terms.join(" ")),
    }
}

/// Σ c·v over real-valued terms; `0.0` when empty.
pub fn linear_sum(terms: &[(Rational, String)]) -> String {
    let parts: Vec<String> = terms
        .iter()
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, v)| {
            if c.is_one() {
                v.clone()
            } else {
                format!("(* {} {v})", real(c))
            }
        })
        .collect();
    match parts.len() {
        0 => "0.0".into(),
        1 => parts.into_iter().next().expect("one term"),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Number(Rational),
    Bool(bool),
}

impl Value {
    pub fn as_number(&self) -> Option<&Rational> {
        match self {
            Value::Number(r) => Some(r),
            Value::Bool(_) => None,
        }
    }
}

/// Values returned by `get-value`, keyed by unquoted symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SmtModel {
    pub values: BTreeMap<String, Value>,
}

impl SmtModel {
    pub fn get(&self, symbol: &str) -> Option<&Value> {
        self.values.get(unquoted(symbol))
    }

    pub fn number(&self, symbol: &str) -> Result<Rational, String> {
        self.get(symbol)
            .and_then(Value::as_number)
            .cloned()
            .ok_or_else(|| format!("model has no numeric value for {symbol}"))
    }

    pub fn from_response(response: &Sexpr) -> Result<SmtModel, String> {
        let pairs = response.as_list().ok_or("get-value response is not a list")?;
        let mut values = BTreeMap::new();
        for pair in pairs {
            match pair.as_list() {
                Some([name, value]) => {
                    let name = name.as_symbol().ok_or_else(|| format!("unexpected key {name}"))?;
                    values.insert(name.to_string(), parse_value(value)?);
                }
                _ => return Err(format!("malformed model entry {pair}")),
            }
        }
        Ok(SmtModel { values })
    }
}

/// Numerals, decimals, `(- v)`, `(/ a b)`, `true` and `false`.
pub fn parse_value(e: &Sexpr) -> Result<Value, String> {
    match e {
        Sexpr::Atom(a) if a == "true" => Ok(Value::Bool(true)),
        Sexpr::Atom(a) if a == "false" => Ok(Value::Bool(false)),
        Sexpr::Atom(a) => wfsound_core::rational::parse(a)
            .map(Value::Number)
            .ok_or_else(|| format!("cannot parse number `{a}`")),
        Sexpr::List(items) => {
            let op = items.first().and_then(Sexpr::as_symbol);
            let num = |k: usize| -> Result<Rational, String> {
                match parse_value(items.get(k).ok_or("missing operand")?)? {
                    Value::Number(r) => Ok(r),
                    Value::Bool(_) => Err(format!("boolean operand in {e}")),
                }
            };
            match (op, items.len()) {
                (Some("-"), 2) => Ok(Value::Number(-num(1)?)),
                (Some("/"), 3) => {
                    let d = num(2)?;
                    if d.is_zero() {
                        return Err(format!("division by zero in {e}"));
                    }
                    Ok(Value::Number(num(1)? / d))
                }
                _ => Err(format!("unsupported value {e}")),
            }
        }
        _ => Err(format!("unsupported value {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse;
    use wfsound_core::rational::{int, ratio};

    #[test]
    fn literals() {
        assert_eq!(real(&int(2)), "2.0");
        assert_eq!(real(&int(-2)), "(- 2.0)");
        assert_eq!(real(&ratio(-1, 3)), "(- (/ 1.0 3.0))");
        assert_eq!(int_literal(-4), "(- 4)");
        assert_eq!(symbol("x", 3, "a|b"), "|x3.a_b|");
    }

    #[test]
    fn values_round_trip() {
        for v in [int(0), int(5), ratio(7, 3), ratio(-1, 3), int(-9)] {
            assert_eq!(parse_value(&parse(&real(&v)).unwrap()).unwrap(), Value::Number(v));
        }
        let model = SmtModel::from_response(&parse("((k 2) (|x0.t| (- (/ 1.0 3.0))) (b true))").unwrap()).unwrap();
        assert_eq!(model.number("k").unwrap(), int(2));
        assert_eq!(model.number("|x0.t|").unwrap(), ratio(-1, 3));
        assert_eq!(model.get("b"), Some(&Value::Bool(true)));
    }

    #[test]
    fn rendering_is_stable() {
        let mut a = SmtScript::new("QF_LRA");
        a.declare("x", Sort::Real);
        a.assert("(> x 0.0)");
        assert_eq!(
            a.render(),
            "(set-logic QF_LRA)\n(declare-const x Real)\n(assert (> x 0.0))\n"
        );
        assert_eq!(a.render(), a.clone().render());
        assert_eq!(
            linear_sum(&[(int(1), "a".into()), (int(-2), "b".into()), (int(0), "c".into())]),
            "(+ a (* (- 2.0) b))"
        );
    }
}
