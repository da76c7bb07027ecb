use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Low,
    High,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Low => "low",
            Label::High => "high",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("line {line}: expected `name = high|low`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: `{name}` is labeled twice")]
    Duplicate { line: usize, name: String },
}

/// Variables classified high or low. Anything unlabeled is low.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SecurityLabeling {
    labels: BTreeMap<String, Label>,
}

impl SecurityLabeling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn high<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut l = Self::new();
        for n in names {
            l.set(n, Label::High);
        }
        l
    }

    pub fn set(&mut self, name: impl Into<String>, label: Label) {
        self.labels.insert(name.into(), label);
    }

    /// The label of `name`. A binder renamed apart by the parser (`x_2`)
    /// inherits the label of its source name unless it has its own.
    pub fn label_of(&self, name: &str) -> Label {
        if let Some(&l) = self.labels.get(name) {
            return l;
        }
        match name.rsplit_once('_') {
            Some((base, k)) if !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) => {
                self.label_of(base)
            }
            _ => Label::Low,
        }
    }

    pub fn is_high(&self, name: &str) -> bool {
        self.label_of(name) == Label::High
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Label)> {
        self.labels.iter()
    }
}

impl FromStr for SecurityLabeling {
    type Err = LabelError;

    /// One `name = high|low` entry per line; blank lines and `#` comments
    /// are skipped.
    fn from_str(s: &str) -> Result<Self, LabelError> {
        let mut out = SecurityLabeling::new();
        for (i, raw) in s.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let Some((name, label)) = text.split_once('=') else {
                return Err(LabelError::Malformed { line, text: text.into() });
            };
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(LabelError::Malformed { line, text: text.into() });
            }
            let label = match label.trim() {
                "high" => Label::High,
                "low" => Label::Low,
                other => {
                    return Err(LabelError::UnknownLabel {
                        line,
                        label: other.into(),
                    })
                }
            };
            if out.labels.insert(name.to_string(), label).is_some() {
                return Err(LabelError::Duplicate {
                    line,
                    name: name.into(),
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let l: SecurityLabeling = "# secrets\nh = high\n\nl = low  # public\n".parse().unwrap();
        assert!(l.is_high("h"));
        assert!(!l.is_high("l"));
        assert!(!l.is_high("other"));
        assert!(l.is_high("h_3"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            "h high".parse::<SecurityLabeling>(),
            Err(LabelError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            "h = secret".parse::<SecurityLabeling>(),
            Err(LabelError::UnknownLabel { .. })
        ));
        assert!(matches!(
            "h = high\nh = low".parse::<SecurityLabeling>(),
            Err(LabelError::Duplicate { line: 2, .. })
        ));
    }

    #[test]
    fn own_label_wins_over_source_name() {
        let l: SecurityLabeling = "x = high\nx_1 = low".parse().unwrap();
        assert!(l.is_high("x_2"));
        assert!(!l.is_high("x_1"));
    }
}
