use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{usage, CliError};

pub const CONFIG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Simulate,
    Deviations,
    Lyapunov,
    SelfsimSearch,
    SelfsimVerify,
    Qcheck,
}

impl CommandName {
    pub const ALL: [CommandName; 6] = [
        CommandName::Simulate,
        CommandName::Deviations,
        CommandName::Lyapunov,
        CommandName::SelfsimSearch,
        CommandName::SelfsimVerify,
        CommandName::Qcheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Simulate => "simulate",
            CommandName::Deviations => "deviations",
            CommandName::Lyapunov => "lyapunov",
            CommandName::SelfsimSearch => "selfsim-search",
            CommandName::SelfsimVerify => "selfsim-verify",
            CommandName::Qcheck => "qcheck",
        }
    }

    pub fn parse(s: &str) -> Option<CommandName> {
        CommandName::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Parameter keys the command understands.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            CommandName::Simulate => &["arcs", "tau", "x0", "nmax", "out", "reanchor"],
            CommandName::Deviations => &["arcs", "tau", "x0", "nmax", "seed", "out", "samples", "d", "jobs"],
            CommandName::Lyapunov => &["d", "nmax", "seed", "out"],
            CommandName::SelfsimSearch => &["d", "maxlen", "out"],
            CommandName::SelfsimVerify => &["system", "index", "aN", "tau", "x0", "nmax", "out"],
            CommandName::Qcheck => &["arcs", "samples", "seed"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub command: CommandName,
    /// Raw values, keyed as the flags are named (without dashes).
    pub params: BTreeMap<String, String>,
    pub format_version: u32,
}

impl ExperimentConfig {
    pub fn new(command: CommandName) -> Self {
        ExperimentConfig { command, params: BTreeMap::new(), format_version: CONFIG_FORMAT_VERSION }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut command = None;
        let mut version = None;
        let mut params = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "command" => {
                    command = Some(
                        CommandName::parse(v)
                            .ok_or_else(|| usage(format!("config line {}: unknown command `{v}`", i + 1)))?,
                    )
                }
                "format_version" => {
                    version = Some(
                        v.parse::<u32>()
                            .map_err(|_| usage(format!("config line {}: format_version must be an integer", i + 1)))?,
                    )
                }
                _ => match k.strip_prefix("params.") {
                    Some(p) if !p.is_empty() => {
                        if params.insert(p.to_string(), v.to_string()).is_some() {
                            return Err(usage(format!("config line {}: `{k}` given twice", i + 1)));
                        }
                    }
                    _ => return Err(usage(format!("config line {}: unknown key `{k}`", i + 1))),
                },
            }
        }
        let command = command.ok_or_else(|| usage("config file has no `command` line"))?;
        let format_version = version.unwrap_or(CONFIG_FORMAT_VERSION);
        if format_version != CONFIG_FORMAT_VERSION {
            return Err(usage(format!("unsupported config format_version {format_version}")));
        }
        Ok(ExperimentConfig { command, params, format_version })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("format_version = {}\ncommand = {}\n", self.format_version, self.command.as_str());
        for (k, v) in &self.params {
            let _ = writeln!(s, "params.{k} = {v}");
        }
        s
    }

    /// Rejects keys the command does not take.
    pub fn validate(&self) -> Result<(), CliError> {
        let allowed = self.command.keys();
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(usage(format!(
                    "`{}` does not accept --{k} (accepted: {})",
                    self.command.as_str(),
                    allowed.iter().map(|a| format!("--{a}")).collect::<Vec<_>>().join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn text(&self, key: &str) -> Result<&str, CliError> {
        self.params
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| usage(format!("missing required flag --{key}")))
    }

    pub fn real(&self, key: &str) -> Result<f64, CliError> {
        let v = self.text(key)?;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(usage(format!("--{key}: `{v}` is not a finite number"))),
        }
    }

    /// Nonnegative integer; exponent forms such as `1e6` are accepted when
    /// they denote an integer.
    pub fn count(&self, key: &str) -> Result<u64, CliError> {
        let v = self.text(key)?;
        parse_count(v).ok_or_else(|| usage(format!("--{key}: `{v}` is not a nonnegative integer")))
    }

    pub fn count_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        if self.params.contains_key(key) {
            self.count(key)
        } else {
            Ok(default)
        }
    }

    pub fn arcs(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.text(key)?;
        v.split(',')
            .map(|t| match t.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(usage(format!("--{key}: `{}` is not a number", t.trim()))),
            })
            .collect()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.params.get(key).map(String::as_str) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(usage(format!("--{key}: expected true or false, got `{v}`"))),
        }
    }
}

fn parse_count(v: &str) -> Option<u64> {
    if let Ok(n) = v.parse::<u64>() {
        return Some(n);
    }
    let x = v.parse::<f64>().ok()?;
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9_007_199_254_740_992.0).then_some(x as u64)
}
