//! The `partint` config file: flat `key = value` lines under `[section]`
//! headers.
//!
//! The format is line-oriented so experiment records diff cleanly:
//!
//! ```text
//! # full-line comments start with `#` or `;`
//! [run]
//! command = simulate
//! seed = 42
//!
//! [model]
//! name = central-force
//!
//! [integrator]
//! scheme = implicit-midpoint
//! dt = 1e-3
//! steps = 1000
//!
//! [initial]
//! r = 1.0
//! phi = 0.0
//!
//! [output]
//! path = trajectory.tsv
//! ```
//!
//! Sections and their keys are validated against a fixed schema — except
//! `[initial]`, whose keys are chart coordinates and are checked against
//! the chosen model later. Every diagnostic carries the offending line
//! number. Duplicate keys and duplicate section headers are rejected
//! rather than silently resolved.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Recognized sections; `None` means free-form keys (validated downstream).
const SCHEMA: &[(&str, Option<&[&str]>)] = &[
    (
        "run",
        Some(&["command", "seed", "samples", "f", "g", "h", "family", "symbolic"]),
    ),
    (
        "model",
        Some(&[
            "name",
            "n",
            "dim",
            "mass",
            "masses",
            "charge",
            "field",
            "potential",
            "volume-potential",
        ]),
    ),
    ("integrator", Some(&["scheme", "dt", "steps"])),
    ("initial", None),
    ("output", Some(&["path", "observables"])),
];

/// One `key = value` line.
#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// A parsed config file; sections keep their entries in file order.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, Vec<Entry>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        ConfigFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        let mut sections: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
        let mut section_lines: BTreeMap<String, usize> = BTreeMap::new();
        let mut current: Option<String> = None;

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(CliError::Validation(format!(
                        "config line {lineno}: unterminated section header `{line}`"
                    )));
                };
                let name = name.trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    let known: Vec<&str> = SCHEMA.iter().map(|(s, _)| *s).collect();
                    return Err(CliError::Validation(format!(
                        "config line {lineno}: unknown section [{name}]; known sections: {}",
                        known.join(", ")
                    )));
                }
                if let Some(&prev) = section_lines.get(name) {
                    return Err(CliError::Validation(format!(
                        "config line {lineno}: section [{name}] already opened at line {prev}"
                    )));
                }
                section_lines.insert(name.to_string(), lineno);
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let Some(section) = &current else {
                return Err(CliError::Validation(format!(
                    "config line {lineno}: `{line}` appears before any [section] header"
                )));
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Validation(format!(
                    "config line {lineno}: expected `key = value`, got `{line}`"
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Validation(format!(
                    "config line {lineno}: `{key}` is not a valid key"
                )));
            }
            if let Some(allowed) = SCHEMA
                .iter()
                .find(|(s, _)| s == section)
                .and_then(|(_, keys)| *keys)
            {
                if !allowed.contains(&key) {
                    return Err(CliError::Validation(format!(
                        "config line {lineno}: unknown key `{key}` in [{section}]; \
                         allowed: {}",
                        allowed.join(", ")
                    )));
                }
            }
            let entries = sections.get_mut(section).expect("section opened above");
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(CliError::Validation(format!(
                    "config line {lineno}: key `{key}` in [{section}] already set at line {}",
                    prev.line
                )));
            }
            entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: lineno,
            });
        }
        Ok(ConfigFile { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)?
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    /// All entries of a section, in file order; empty when absent.
    pub fn entries(&self, section: &str) -> &[Entry] {
        self.sections.get(section).map_or(&[], Vec::as_slice)
    }

    /// Parse a value with a line-numbered diagnostic on failure.
    pub fn parsed<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        let Some(entry) = self
            .sections
            .get(section)
            .and_then(|es| es.iter().find(|e| e.key == key))
        else {
            return Ok(None);
        };
        entry.value.parse().map(Some).map_err(|e| {
            CliError::Validation(format!(
                "config [{section}] {key} (line {}): {e}: `{}`",
                entry.line, entry.value
            ))
        })
    }
}

/// Flag value, else config value, else nothing — the override order every
/// setting follows.
pub(crate) fn pick_string(
    flag: &Option<String>,
    cfg: Option<&ConfigFile>,
    section: &str,
    key: &str,
) -> Option<String> {
    flag.clone()
        .or_else(|| cfg.and_then(|c| c.get(section, key).map(str::to_string)))
}

/// Same override order for values that parse out of the config text.
pub(crate) fn pick_parsed<T: FromStr>(
    flag: Option<T>,
    cfg: Option<&ConfigFile>,
    section: &str,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => match cfg {
            Some(c) => c.parsed(section, key),
            None => Ok(None),
        },
    }
}
