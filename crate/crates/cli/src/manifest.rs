use std::path::Path;

use crate::error::CliError;

/// `key=value` lines in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Manifest {
        let mut m = Manifest::default();
        m.set("tool", format!("collapse-lab {}", env!("CARGO_PKG_VERSION")));
        m.set("command", command.into());
        m
    }

    /// Replaces an existing key in place.
    pub fn set(&mut self, key: &str, value: String) {
        let value = value.replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Manifest, CliError> {
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Other(format!("manifest line {}: missing '='", i + 1)))?;
            m.set(k, v.to_string());
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut m = Manifest::new("theory");
        m.set("seed", "3".into());
        m.set("a.b", "x=y".into());
        m.set("seed", "4".into());
        let back = Manifest::parse(&m.render()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("seed"), Some("4"));
        assert_eq!(back.get("a.b"), Some("x=y"));
    }
}
