//! Run configuration: flat `key = value` text, then the `AVBOUNDS_CACHE`
//! environment variable, then command-line flags, each overriding the last.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::auxbound::{default_tolerance, MIN_TOLERANCE};
use crate::enumerate::MAX_DEGREE;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, rational_to_string};
use crate::lpopt::{DEFAULT_MESH_SIZE, MIN_MESH_SIZE};
use crate::paperlab::DEFAULT_DEGREE_CAP;

pub const CACHE_ENV: &str = "AVBOUNDS_CACHE";
/// Looked up in the working directory when no path is given.
pub const DEFAULT_CONFIG_FILE: &str = "avbounds.conf";
pub const DEFAULT_CACHE_DIR: &str = ".avbounds-cache";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!("output format must be text or json, not {s:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Text => "text",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub tolerance: BigRational,
    pub mesh_size: usize,
    pub degree_cap: usize,
    pub cache_dir: PathBuf,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: default_tolerance(),
            mesh_size: DEFAULT_MESH_SIZE,
            degree_cap: DEFAULT_DEGREE_CAP,
            cache_dir: PathBuf::from(DEFAULT_CACHE_DIR),
            output_format: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    /// Applies `key = value` lines on top of the current values. Blank lines
    /// and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                Error::InvalidInput(m) => Error::parse(i + 1, m),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Sets one key after validating its value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tolerance" => {
                let t = parse_rational(value)?;
                if t.to_f64().is_none_or(|v| !(MIN_TOLERANCE..1.0).contains(&v)) {
                    return Err(Error::invalid(format!(
                        "tolerance must lie in [{MIN_TOLERANCE}, 1), got {value}"
                    )));
                }
                self.tolerance = t;
            }
            "mesh_size" => {
                let m: usize = value
                    .parse()
                    .map_err(|_| Error::invalid(format!("mesh_size is not an integer: {value:?}")))?;
                if !(MIN_MESH_SIZE..=1 << 20).contains(&m) {
                    return Err(Error::invalid(format!("mesh_size must lie in {MIN_MESH_SIZE}..=1048576")));
                }
                self.mesh_size = m;
            }
            "degree_cap" => {
                let d: usize = value
                    .parse()
                    .map_err(|_| Error::invalid(format!("degree_cap is not an integer: {value:?}")))?;
                if !(1..=MAX_DEGREE).contains(&d) {
                    return Err(Error::invalid(format!("degree_cap must lie in 1..={MAX_DEGREE}")));
                }
                self.degree_cap = d;
            }
            "cache_dir" => {
                if value.is_empty() {
                    return Err(Error::invalid("cache_dir is empty"));
                }
                self.cache_dir = PathBuf::from(value);
            }
            "output_format" => self.output_format = value.parse()?,
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Reads a config file; a missing file at the default location is not
    /// an error.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut c = RunConfig::default();
        let (path, required) = match path {
            Some(p) => (p.to_path_buf(), true),
            None => (PathBuf::from(DEFAULT_CONFIG_FILE), false),
        };
        match std::fs::read_to_string(&path) {
            Ok(text) => c.apply_text(&text)?,
            Err(e) if !required && e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(path, e)),
        }
        Ok(c)
    }

    /// Lets `AVBOUNDS_CACHE` override the cache directory.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            self.cache_dir = PathBuf::from(dir);
        }
    }

    /// The configuration as `key = value` text that `parse` reads back.
    pub fn to_text(&self) -> String {
        format!(
            "tolerance = {}\nmesh_size = {}\ndegree_cap = {}\ncache_dir = {}\noutput_format = {}\n",
            rational_to_string(&self.tolerance),
            self.mesh_size,
            self.degree_cap,
            self.cache_dir.display(),
            self.output_format
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        let c = RunConfig::parse("# comment\ntolerance = 1e-5\nmesh_size=128\noutput_format = json\n").unwrap();
        assert_eq!(c.tolerance, parse_rational("0.00001").unwrap());
        assert_eq!(c.mesh_size, 128);
        assert_eq!(c.output_format, OutputFormat::Json);
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn bad_values_report_lines() {
        for (text, line) in [
            ("mesh_size = 8", 1),
            ("\ntolerance = 2", 2),
            ("degree_cap = 9", 1),
            ("colour = red", 1),
            ("noequals", 1),
            ("output_format = yaml", 1),
        ] {
            match RunConfig::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn explicit_missing_file_is_an_error() {
        assert!(RunConfig::load(Some(Path::new("/nonexistent/avbounds.conf"))).is_err());
    }
}
