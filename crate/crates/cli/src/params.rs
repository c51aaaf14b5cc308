//! Flag/config-file resolution and the small value parsers shared by the
//! subcommands. Flags take precedence over config-file entries, which take
//! precedence over defaults.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use chbell::{ExponentQuad, Strategy};

use crate::CliError;

/// Flat `key = value` config file; keys match the long flag names.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("config {}: {e}", path.display())))?;
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config {}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Flag value if present, else config-file value, else default.
pub fn resolve<T: FromStr + Clone>(
    key: &str,
    flag: Option<T>,
    file: &FileConfig,
    default: T,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`"))),
        None => Ok(default),
    }
}

pub fn resolve_string(key: &str, flag: Option<String>, file: &FileConfig) -> Option<String> {
    flag.or_else(|| file.get(key).map(str::to_string))
}

/// `start:stop:count` into an inclusive linear grid.
pub fn parse_grid(spec: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let err = || CliError::Usage(format!("{what} `{spec}`: expected start:stop:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![single.parse::<f64>().map_err(|_| err())?]),
        [start, stop, count] => {
            let start: f64 = start.parse().map_err(|_| err())?;
            let stop: f64 = stop.parse().map_err(|_| err())?;
            let count: usize = count.parse().map_err(|_| err())?;
            if count == 0 {
                return Err(err());
            }
            if count == 1 {
                return Ok(vec![start]);
            }
            // Pin the endpoint: start + (stop−start) need not equal stop in
            // floating point.
            Ok((0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (count - 1) as f64
                    }
                })
                .collect())
        }
        _ => Err(err()),
    }
}

/// `a,b,c,d` into an exponent quad.
pub fn parse_quad(spec: &str) -> Result<ExponentQuad, CliError> {
    let parts: Result<Vec<u32>, _> = spec.split(',').map(|p| p.trim().parse::<u32>()).collect();
    let parts =
        parts.map_err(|_| CliError::Usage(format!("--k `{spec}`: expected four integers")))?;
    if parts.len() != 4 {
        return Err(CliError::Usage(format!("--k `{spec}`: expected four integers")));
    }
    ExponentQuad::new(parts[0], parts[1], parts[2], parts[3])
        .map_err(|e| CliError::Usage(format!("--k `{spec}`: {e}")))
}

/// A strategy name plus its parameter flags into a [`Strategy`].
pub fn parse_strategy(
    name: &str,
    n: Option<u32>,
    m: Option<u32>,
    k: Option<&str>,
) -> Result<Strategy, CliError> {
    match name {
        "hardy" => Ok(Strategy::Hardy),
        "nm" => {
            let (Some(n), Some(m)) = (n, m) else {
                return Err(CliError::Usage("strategy nm requires --n and --m".into()));
            };
            Ok(Strategy::Nm { n, m })
        }
        "k" => {
            let Some(spec) = k else {
                return Err(CliError::Usage("strategy k requires --k a,b,c,d".into()));
            };
            Ok(Strategy::K(parse_quad(spec)?))
        }
        "ksearch" => Ok(Strategy::KSearch),
        "maxq" => Ok(Strategy::MaxQ),
        "mineta" => Ok(Strategy::MinEta),
        other => Err(CliError::Usage(format!(
            "unknown strategy `{other}` (expected hardy|nm|k|ksearch|maxq|mineta)"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Q,
    Eta,
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "q" => Ok(Metric::Q),
            "eta" => Ok(Metric::Eta),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}
