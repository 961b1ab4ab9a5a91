//! Number formatting and structured report values.

use morsecover::{MorseSet, Shape};
use serde_yaml::{Mapping, Value};

/// `%.12g`: twelve significant digits, trailing zeros dropped.
pub fn sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mant = trim(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{v:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A float rounded to twelve significant digits.
pub fn num(v: f64) -> Value {
    let r: f64 = sig12(v).parse().unwrap_or(v);
    Value::from(r)
}

pub fn point(p: &[f64]) -> Value {
    Value::Sequence(p.iter().map(|c| num(*c)).collect())
}

/// Ordered mapping builder.
#[derive(Default)]
pub struct Map(Mapping);

impl Map {
    pub fn new() -> Self {
        Map(Mapping::new())
    }

    pub fn put(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.0.insert(Value::from(k), v.into());
        self
    }

    pub fn num(self, k: &str, v: f64) -> Self {
        self.put(k, num(v))
    }
}

impl From<Map> for Value {
    fn from(m: Map) -> Value {
        Value::Mapping(m.0)
    }
}

/// `{kind, tag, r, lambda, payload}` record of a tagged set.
pub fn shape_record(s: &MorseSet) -> Value {
    let payload = match s.shape() {
        Shape::Ball { center, radius, closed } => {
            Map::new().put("center", point(center)).num("radius", *radius).put("closed", *closed)
        }
        Shape::Interval { anchor, edges, closed } => {
            Map::new().put("anchor", point(anchor)).put("edges", point(edges)).put("closed", *closed)
        }
        Shape::Polytope { template, scale } => Map::new()
            .num("scale", *scale)
            .put("vertices", Value::Sequence(template.vertices().iter().map(|v| point(&s.tag().axpy(*scale, v))).collect())),
    };
    Map::new()
        .put("kind", s.kind())
        .put("tag", point(s.tag()))
        .num("r", s.inner_radius())
        .num("lambda", s.lambda())
        .put("payload", payload)
        .into()
}

pub fn to_yaml(v: &Value) -> String {
    serde_yaml::to_string(v).expect("yaml values serialize")
}

/// Left-aligned text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            w[i] = w[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let s: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<width$}", width = w[i])).collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}
