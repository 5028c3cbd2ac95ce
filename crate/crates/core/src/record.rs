//! Flat key-value records used for reports and summaries.

use std::fmt::Write as _;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    entries: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.entries.push((key.to_string(), format!("{v:.12e}")));
        self
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.entries.push((key.to_string(), v.to_string()));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.entries.push((key.to_string(), v.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, v: &str) -> &mut Self {
        self.entries.push((key.to_string(), v.to_string()));
        self
    }

    pub fn extend(&mut self, prefix: &str, other: &Record) -> &mut Self {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}{k}"), v.clone()));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Flat JSON object; numbers and booleans unquoted.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n");
        for (i, (k, v)) in self.entries.iter().enumerate() {
            let bare = v.parse::<f64>().map(|x| x.is_finite()).unwrap_or(false) || v == "true" || v == "false";
            let val = if bare { v.clone() } else { format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\"")) };
            let sep = if i + 1 < self.entries.len() { "," } else { "" };
            let _ = writeln!(s, "  \"{k}\": {val}{sep}");
        }
        s.push('}');
        s.push('\n');
        s
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_text(src: &str) -> Self {
        let mut r = Record::new();
        for line in src.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some((k, v)) = line.split_once('=') {
                r.entries.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut r = Record::new();
        r.num("T", 0.5).flag("ok", true).text("mode", "physical");
        let back = Record::parse_text(&r.to_text());
        assert_eq!(back.get_f64("T"), Some(0.5));
        assert_eq!(back.get("mode"), Some("physical"));
        assert!(r.to_json().contains("\"ok\": true"));
        assert!(r.to_json().contains("\"mode\": \"physical\""));
    }
}
