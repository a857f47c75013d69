//! Reports printed as `key: value` text or as a JSON object with the same
//! keys, numbers and order.

use serde_json::{Map, Number, Value};

/// Rounds to six significant digits.
pub fn round6(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.5e}").parse().unwrap_or(x)
    } else {
        x
    }
}

fn number(x: f64) -> Value {
    Number::from_f64(round6(x)).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Default)]
pub struct Report {
    fields: Map<String, Value>,
    warnings: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.fields.insert(key.into(), number(x));
        self
    }

    pub fn int(&mut self, key: &str, x: u64) -> &mut Self {
        self.fields.insert(key.into(), Value::from(x));
        self
    }

    pub fn text(&mut self, key: &str, s: impl Into<String>) -> &mut Self {
        self.fields.insert(key.into(), Value::String(s.into()));
        self
    }

    pub fn warn(&mut self, w: impl Into<String>) -> &mut Self {
        self.warnings.push(w.into());
        self
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let shown = match v {
                Value::String(s) => s.clone(),
                Value::Null => "NaN".into(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {shown}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut obj = self.fields.clone();
        obj.insert(
            "warnings".into(),
            Value::Array(self.warnings.iter().cloned().map(Value::String).collect()),
        );
        serde_json::to_string_pretty(&Value::Object(obj)).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round6(1.234_567_89), 1.234_57);
        assert_eq!(round6(-0.000_123_456_78), -0.000_123_457);
        assert_eq!(round6(0.0), 0.0);
        assert!(round6(f64::NAN).is_nan());
    }

    #[test]
    fn text_mirrors_json() {
        let mut r = Report::new();
        r.num("estimate", 10.500_062_3).int("replicates", 200).text("method", "circular");
        assert_eq!(r.to_text(), "estimate: 10.5001\nreplicates: 200\nmethod: circular\n");
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["estimate"].to_string(), "10.5001");
    }
}
