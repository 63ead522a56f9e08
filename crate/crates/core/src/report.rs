//! Check reports: per-identity entries with canonical residual strings.

use std::fmt::Write as _;

use serde::Serialize;

/// One checked relation at one location.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub tag: String,
    pub location: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monomial: Option<String>,
    pub pass: bool,
    pub residual: String,
    /// Advisory entries are reported but do not affect the verdict.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub advisory: bool,
}

impl Entry {
    pub fn new(tag: &str, location: &str, monomial: Option<String>, residual: String, pass: bool) -> Self {
        Entry { tag: tag.to_string(), location: location.to_string(), monomial, pass, residual, advisory: false }
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }
}

/// A named output value (a cochain, a class, a splitting component).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Output {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub entries: Vec<Entry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<Output>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), pass: true, entries: Vec::new(), outputs: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, e: Entry) {
        if !e.pass && !e.advisory {
            self.pass = false;
        }
        self.entries.push(e);
    }

    pub fn extend(&mut self, other: Report) {
        for e in other.entries {
            self.push(e);
        }
        self.outputs.extend(other.outputs);
        self.notes.extend(other.notes);
    }

    pub fn output(&mut self, name: &str, value: String) {
        self.outputs.push(Output { name: name.to_string(), value });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Force a failing verdict (used when a command fails without entries).
    pub fn fail(&mut self) {
        self.pass = false;
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable rendering: failures in full, passes summarized per tag.
    pub fn render_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {}", self.command, if self.pass { "PASS" } else { "FAIL" });
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let mut tags: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !tags.contains(&e.tag.as_str()) {
                tags.push(&e.tag);
            }
        }
        for t in tags {
            let all: Vec<&Entry> = self.entries.iter().filter(|e| e.tag == t).collect();
            let bad: Vec<&&Entry> = all.iter().filter(|e| !e.pass).collect();
            let adv = if all.iter().any(|e| e.advisory) { " (advisory)" } else { "" };
            let _ = writeln!(s, "  {t}{adv}: {}/{} pass", all.len() - bad.len(), all.len());
            for e in bad {
                let mon = e.monomial.as_deref().map(|m| format!(" [{m}]")).unwrap_or_default();
                let _ = writeln!(s, "    {}{}: residual {}", e.location, mon, e.residual);
            }
        }
        for o in &self.outputs {
            let _ = writeln!(s, "{} = {}", o.name, o.value);
        }
        s
    }
}
