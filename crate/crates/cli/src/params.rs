//! Parameter tables, config-file parsing and value resolution.
//!
//! Every command declares its parameters with a default. Values are taken
//! from the default, then from the config file, then from the command line.
//! A config file is flat `key = value` text; `[group]` sections (`[simulate]`)
//! apply to every command in the group and `[group.kind]` sections
//! (`[simulate.uniform]`) to one command. Keys before any section apply
//! everywhere. Lines starting with `#` or `;` are comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn p(key: &'static str, default: &'static str, help: &'static str) -> Param {
    Param { key, default, help }
}

/// Where a resolved value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    CommandLine,
}

impl Source {
    fn label(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "config",
            Source::CommandLine => "cli",
        }
    }
}

/// Sections of a parsed config file.
#[derive(Debug, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::Config(format!("config line {}: unterminated section", n + 1))
                })?;
                current = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key = value", n + 1))
            })?;
            sections
                .entry(current.clone())
                .or_default()
                .insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values for `command` (e.g. `simulate.uniform`), least specific first.
    /// Keys in the command's own section must be known parameters.
    fn values_for(
        &self,
        command: &str,
        params: &[Param],
    ) -> Result<Vec<(String, String)>, CliError> {
        let group = command.split('.').next().unwrap_or(command);
        let mut out = vec![];
        for section in ["", group, command] {
            let Some(map) = self.sections.get(section) else {
                continue;
            };
            for (k, v) in map {
                let known = params.iter().any(|p| p.key == k);
                if !known && section == command {
                    return Err(CliError::Config(format!(
                        "config section [{command}]: unknown key '{k}'"
                    )));
                }
                if known {
                    out.push((k.clone(), v.clone()));
                }
            }
            if section == group && group == command {
                break;
            }
        }
        Ok(out)
    }
}

/// Effective parameters of one command.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: String,
    values: Vec<(&'static str, String, Source)>,
}

impl Resolved {
    pub fn new(
        command: &str,
        params: &[Param],
        file: Option<&ConfigFile>,
        cli: &[(&str, String)],
    ) -> Result<Self, CliError> {
        let mut values: Vec<(&'static str, String, Source)> = params
            .iter()
            .map(|p| (p.key, p.default.to_string(), Source::Default))
            .collect();
        let mut set = |k: &str, v: String, s: Source| {
            if let Some(slot) = values.iter_mut().find(|(key, _, _)| *key == k) {
                slot.1 = v;
                slot.2 = s;
            }
        };
        if let Some(f) = file {
            for (k, v) in f.values_for(command, params)? {
                set(&k, v, Source::File);
            }
        }
        for (k, v) in cli {
            set(k, v.clone(), Source::CommandLine);
        }
        Ok(Self {
            command: command.to_string(),
            values,
        })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .iter()
            .find(|(k, _, _)| *k == key)
            .map(|(_, v, _)| v.as_str())
            .unwrap_or_else(|| panic!("parameter '{key}' not declared for {}", self.command))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| CliError::Config(format!("parameter '{key}' = '{raw}': {e}")))
    }

    /// A number, also accepting fractions such as `1/9`.
    pub fn real(&self, key: &str) -> Result<f64, CliError> {
        parse_real(self.raw(key))
            .map_err(|e| CliError::Config(format!("parameter '{key}' = '{}': {e}", self.raw(key))))
    }

    /// Comma-separated list of numbers; empty means an empty list.
    pub fn reals(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.raw(key);
        if raw.trim().is_empty() {
            return Ok(vec![]);
        }
        raw.split(',')
            .map(|s| {
                parse_real(s)
                    .map_err(|e| CliError::Config(format!("parameter '{key}' = '{raw}': {e}")))
            })
            .collect()
    }

    /// `# key = value` provenance lines.
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec![
            format!("trimlab {}", env!("CARGO_PKG_VERSION")),
            format!("command = {}", self.command.replace('.', " ")),
        ];
        out.extend(
            self.values
                .iter()
                .map(|(k, v, s)| format!("{k} = {v} ({})", s.label())),
        );
        out
    }
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            if b == 0.0 {
                return Err("division by zero".into());
            }
            a / b
        }
        None => s.parse().map_err(|e| format!("{e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err("not a finite number".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: &[Param] = &[p("q", "0.1", ""), p("u", "1000", ""), p("seed", "7", "")];

    #[test]
    fn fractions() {
        assert_eq!(parse_real("1/9").unwrap(), 1.0 / 9.0);
        assert_eq!(parse_real(" 0.25 ").unwrap(), 0.25);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
    }

    #[test]
    fn precedence_default_file_cli() {
        let file =
            ConfigFile::parse("seed = 3\n[analyze]\nq = 0.2\nfoo = 1\n[analyze.pdf]\nu = 50\n")
                .unwrap();
        let r = Resolved::new("analyze.pdf", PARAMS, Some(&file), &[("q", "0.3".into())]).unwrap();
        assert_eq!(r.raw("q"), "0.3");
        assert_eq!(r.raw("u"), "50");
        assert_eq!(r.raw("seed"), "3");
        let echo = r.echo();
        assert!(echo.contains(&"q = 0.3 (cli)".to_string()));
        assert!(echo.contains(&"u = 50 (config)".to_string()));
    }

    #[test]
    fn unknown_key_in_own_section_is_an_error() {
        let file = ConfigFile::parse("[analyze.pdf]\nbogus = 1\n").unwrap();
        assert!(Resolved::new("analyze.pdf", PARAMS, Some(&file), &[]).is_err());
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigFile::parse("[open\n").is_err());
        assert!(ConfigFile::parse("novalue\n").is_err());
        assert!(ConfigFile::parse("# comment\n; other\n\n").is_ok());
    }

    #[test]
    fn typed_errors_name_the_parameter() {
        let r = Resolved::new("analyze.pdf", PARAMS, None, &[("u", "ten".into())]).unwrap();
        let e = r.get::<usize>("u").unwrap_err();
        assert!(e.to_string().contains("'u'"));
    }
}
