//! Report records and their JSON and CSV renderings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One checked quantity. `gap` is signed so that `gap ≥ −tolerance` passes
/// for inequality checks; `value`/`bound` carry the two sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub suite: String,
    pub anchor: String,
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    /// Exact decimal or fraction when the quantity is rational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Record {
    pub fn new(suite: &str, anchor: &str, seed: u64) -> Self {
        Self {
            suite: suite.into(),
            anchor: anchor.into(),
            params: BTreeMap::new(),
            value: None,
            gap: None,
            bound: None,
            tolerance: 0.0,
            pass: true,
            seed,
            exact: None,
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn gap(mut self, v: f64) -> Self {
        self.gap = Some(v);
        self
    }

    pub fn bound(mut self, v: f64) -> Self {
        self.bound = Some(v);
        self
    }

    pub fn tolerance(mut self, v: f64) -> Self {
        self.tolerance = v;
        self
    }

    pub fn pass(mut self, v: bool) -> Self {
        self.pass = v;
        self
    }

    pub fn exact(mut self, v: String) -> Self {
        self.exact = Some(v);
        self
    }

    /// Sets `gap` and passes iff `gap ≥ −tolerance`.
    pub fn at_least(self, gap: f64, tolerance: f64) -> Self {
        self.gap(gap).tolerance(tolerance).pass(gap >= -tolerance)
    }

    /// Sets `gap = |value − bound|` and passes iff it is within `tolerance`.
    pub fn close(self, value: f64, target: f64, tolerance: f64) -> Self {
        let gap = (value - target).abs();
        self.value(value).bound(target).gap(gap).tolerance(tolerance).pass(gap <= tolerance)
    }

    pub fn param_u64(&self, key: &str) -> Option<u64> {
        self.params.get(key).and_then(Value::as_u64)
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(Value::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub records: Vec<Record>,
    /// Suite-specific CSV body replacing the generic record table.
    #[serde(skip)]
    pub csv: Option<String>,
}

impl Report {
    pub fn new(suite: &str, seed: u64, records: Vec<Record>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Self { suite: suite.into(), seed, pass, records, csv: None }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn anchored<'a>(&'a self, anchor: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.anchor == anchor)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        if let Some(csv) = &self.csv {
            return csv.clone();
        }
        let mut out = String::from("suite,anchor,seed,params,value,gap,bound,tolerance,pass\n");
        for r in &self.records {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.suite,
                r.anchor,
                r.seed,
                params.join(";"),
                opt(r.value),
                opt(r.gap),
                opt(r.bound),
                r.tolerance,
                r.pass
            );
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Terminating decimal expansion when the denominator is `2^a 5^b`,
/// otherwise `num/den`.
pub fn exact_decimal(x: &BigRational) -> String {
    let den = x.denom().clone();
    let mut rest = den.clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if rest != BigInt::from(1) {
        return format!("{}/{}", x.numer(), den);
    }
    let digits = twos.max(fives);
    let scaled = x.numer().abs() * BigInt::from(10).pow(digits) / den;
    let text = scaled.to_string();
    let sign = if x.is_negative() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{text}");
    }
    let width = digits as usize + 1;
    let padded = format!("{text:0>width$}");
    let (int, frac) = padded.split_at(padded.len() - digits as usize);
    format!("{sign}{int}.{frac}")
}

/// Parses a plain decimal literal such as `0.5`, `-2` or `1.25e-3` exactly.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_expansion() {
        let r = parse_decimal("0.95").unwrap();
        let mut p = BigRational::from_integer(1.into());
        for _ in 0..10 {
            p *= &r;
        }
        assert_eq!(exact_decimal(&p), "0.59873693923837890625");
        assert_eq!(exact_decimal(&BigRational::new(1.into(), 3.into())), "1/3");
        assert_eq!(exact_decimal(&parse_decimal("-2").unwrap()), "-2");
        assert_eq!(exact_decimal(&parse_decimal("1.25e-3").unwrap()), "0.00125");
        assert!(parse_decimal("abc").is_none());
    }

    #[test]
    fn csv_header_and_rows() {
        let r = Record::new("s", "a", 3).param("n", 2).value(0.5).tolerance(1e-9);
        let csv = Report::new("s", 3, vec![r]).to_csv();
        assert_eq!(csv, "suite,anchor,seed,params,value,gap,bound,tolerance,pass\ns,a,3,n=2,0.5,,,0.000000001,true\n");
    }
}
