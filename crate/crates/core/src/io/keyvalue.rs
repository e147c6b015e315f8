//! Plain-text key-value format shared by material, stack and campaign files.
//!
//! ```text
//! # comment
//! top_level_key = value
//! [section]
//! key = value
//! 0.5 12.3        # numeric row
//! ```

use crate::error::{Error, Result};
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct KvSection {
    pub name: String,
    pub line: usize,
    pub entries: Vec<(String, String)>,
    pub rows: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct KvDocument {
    /// Section "" holds keys that precede the first header.
    pub sections: Vec<KvSection>,
}

impl KvSection {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("[{}] {key}: cannot parse '{v}'", self.name))),
        }
    }

    pub fn parse_req<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse_opt(key)?
            .ok_or_else(|| Error::Config(format!("[{}] missing key '{key}'", self.name)))
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![KvSection { name: String::new(), line: 0, ..Default::default() }];
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse { line: lineno, msg: "unterminated section header".into() })?
                    .trim();
                if name.is_empty() {
                    return Err(Error::Parse { line: lineno, msg: "empty section name".into() });
                }
                sections.push(KvSection { name: name.to_string(), line: lineno, ..Default::default() });
                continue;
            }
            let cur = sections.last_mut().unwrap();
            if let Some((k, v)) = line.split_once('=') {
                let k = k.trim();
                if k.is_empty() {
                    return Err(Error::Parse { line: lineno, msg: "empty key".into() });
                }
                cur.entries.push((k.to_string(), v.trim().to_string()));
                continue;
            }
            let nums: Vec<&str> = line.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(Error::Parse { line: lineno, msg: format!("expected 'key = value' or two numbers, got '{line}'") });
            }
            let a = nums[0].parse::<f64>();
            let b = nums[1].parse::<f64>();
            match (a, b) {
                (Ok(a), Ok(b)) => cur.rows.push((a, b)),
                _ => return Err(Error::Parse { line: lineno, msg: format!("non-numeric row '{line}'") }),
            }
        }
        Ok(Self { sections })
    }

    pub fn global(&self) -> &KvSection {
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&KvSection> {
        self.sections.iter().skip(1).find(|s| s.name == name)
    }

    pub fn named_sections(&self) -> impl Iterator<Item = &KvSection> {
        self.sections.iter().skip(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_keys_and_rows() {
        let doc = KvDocument::parse(
            "seed = 7\n# c\n[au]\nmodel = table # trailing\n0.1 2.5\n1e3 1e-3\n[ito]\nmodel=drude\n",
        )
        .unwrap();
        assert_eq!(doc.global().parse_req::<u64>("seed").unwrap(), 7);
        let au = doc.section("au").unwrap();
        assert_eq!(au.get("model"), Some("table"));
        assert_eq!(au.rows, vec![(0.1, 2.5), (1e3, 1e-3)]);
        assert_eq!(doc.section("ito").unwrap().get("model"), Some("drude"));
        assert_eq!(doc.named_sections().count(), 2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(KvDocument::parse("[x]\nfoo bar baz"), Err(Error::Parse { line: 2, .. })));
        assert!(KvDocument::parse("[x\n").is_err());
        assert!(KvDocument::parse("[x]\n1.0 abc\n").is_err());
    }
}
