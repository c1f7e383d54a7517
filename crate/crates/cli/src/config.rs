//! Flat `key = value` run configuration merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`, got `{raw}`", no + 1)))?;
        let key = normalize(k);
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config key `{key}` given twice")));
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Resolves each parameter as flag, else config file, else default, and
/// records the result for the output header.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.file.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_file {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: cannot parse `{text}`: {e}"))),
        }
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self
            .lookup(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required key `{key}`")))?;
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    /// A boolean switch: present flag, else `true`/`false` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        self.get(key, flag.then_some(true), false)
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Fails on config keys no parameter consumed.
    pub fn finish(self) -> Result<BTreeMap<String, String>, CliError> {
        if let Some(k) = self.file.keys().next() {
            return Err(CliError::Usage(format!("unknown config key `{k}`")));
        }
        Ok(self.resolved)
    }
}

/// Comma-separated floats.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim())))
            .collect::<Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

impl Display for FloatList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let m = parse_config("# run\nmodel = logistic\n eta=0.5 # inline\n\nn-outer = 4\n").unwrap();
        assert_eq!(m["model"], "logistic");
        assert_eq!(m["eta"], "0.5");
        assert_eq!(m["n_outer"], "4");
        assert!(parse_config("eta 0.5").is_err());
        assert!(parse_config("eta = 1\neta = 2").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut r = Resolver::new(parse_config("eta = 0.5\nrho = 2").unwrap());
        assert_eq!(r.get("eta", Some(0.7), 1.0).unwrap(), 0.7);
        assert_eq!(r.get("rho", None, 1.0).unwrap(), 2.0);
        assert_eq!(r.get("steps", None::<usize>, 8).unwrap(), 8);
        let resolved = r.finish().unwrap();
        assert_eq!(resolved["eta"], "0.7");
        assert_eq!(resolved["steps"], "8");
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        let mut r = Resolver::new(parse_config("eta = 0.5\nbogus = 1").unwrap());
        r.get("eta", None, 1.0).unwrap();
        let err = r.finish().unwrap_err();
        assert!(err.to_string().contains("bogus"));

        let mut r = Resolver::new(parse_config("eta = abc").unwrap());
        let err = r.get("eta", None, 1.0).unwrap_err();
        assert!(err.to_string().contains("eta"));

        let mut r = Resolver::default();
        let err = r.require::<f64>("values", None).unwrap_err();
        assert!(err.to_string().contains("values"));
    }

    #[test]
    fn float_lists() {
        assert_eq!("1, 2.5,-3".parse::<FloatList>().unwrap().0, vec![1.0, 2.5, -3.0]);
        assert!("1,,2".parse::<FloatList>().is_err());
        assert_eq!(FloatList(vec![1.0, 0.25]).to_string(), "1,0.25");
    }
}
