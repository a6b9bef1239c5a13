use serde_json::json;
use sha2::{Digest, Sha256};

use crate::csd::Value;

/// One point of a configuration space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    /// Position in index order.
    pub index: u64,
    /// One value tuple per knob, aligned with the knob's value sets.
    pub assignments: Vec<Vec<Value>>,
    /// Knob lines with their chosen values, joined by `|`.
    pub key_text: String,
    /// SHA-256 of `key_text`, lowercase hex.
    pub config_key: String,
    headers: Vec<String>,
}

impl Configuration {
    pub(crate) fn new(index: u64, assignments: Vec<Vec<Value>>, headers: &[String]) -> Self {
        let key_text = headers
            .iter()
            .zip(&assignments)
            .map(|(h, values)| {
                let mut line = h.clone();
                for v in values {
                    line.push(';');
                    line.push_str(&v.to_string());
                }
                line
            })
            .collect::<Vec<_>>()
            .join("|");
        let config_key = hex::encode(Sha256::digest(key_text.as_bytes()));
        Configuration { index, assignments, key_text, config_key, headers: headers.to_vec() }
    }

    /// `[{"knob": "<header>", "values": [...]}, ...]`
    pub fn to_json(&self) -> serde_json::Value {
        self.headers
            .iter()
            .zip(&self.assignments)
            .map(|(h, values)| json!({ "knob": h, "values": values.iter().map(Value::to_json).collect::<Vec<_>>() }))
            .collect()
    }

    pub fn knob_headers(&self) -> &[String] {
        &self.headers
    }
}

#[cfg(test)]
mod tests {
    use crate::csd::parse_csd;
    use crate::space::build_index;

    #[test]
    fn key_and_json() {
        let csd = parse_csd("unroll;f;l;{1,2}\nresource;f;a;{R}\nclock;{10}").unwrap();
        let c = build_index(&csd).unwrap().decode(1).unwrap();
        assert_eq!(c.key_text, "unroll;f;l;2|resource;f;a;R|clock;10");
        assert_eq!(c.config_key.len(), 64);
        assert_eq!(
            c.to_json(),
            serde_json::json!([
                {"knob": "unroll;f;l", "values": [2]},
                {"knob": "resource;f;a", "values": ["R"]},
                {"knob": "clock", "values": [10]},
            ])
        );
    }
}
