//! Flat key-value configuration with sections, schema validation, and the
//! run manifest.
//!
//! Precedence: command-line overrides > config file > schema defaults.
//! Unknown keys are rejected. Config files are INI-style (`[section]`
//! headers turn into `section.` key prefixes) or a flat JSON object; a
//! manifest written by a previous run is accepted directly, which is what
//! makes reruns byte-for-byte reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

/// Error constructor for command code.
pub fn err_from<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

/// One schema entry: key, default (None = required), help text.
pub struct Entry {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn entry(key: &'static str, default: Option<&'static str>, help: &'static str) -> Entry {
    Entry { key, default, help }
}

/// The keys every subcommand understands.
pub const COMMON: &[Entry] = &[
    entry("seed", Some("1"), "base seed; all randomness derives from it"),
    entry("replicates", Some("1000"), "number of Monte Carlo replicates"),
    entry("out", Some("out"), "output directory"),
    entry("workers", Some("0"), "worker threads (0 = all cores)"),
];

/// Resolved configuration: every schema key has a value.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub command: &'static str,
    map: BTreeMap<String, String>,
}

impl Resolved {
    pub fn get(&self, key: &str) -> &str {
        self.map
            .get(key)
            .unwrap_or_else(|| panic!("key {key} missing from schema"))
    }

    pub fn get_f64(&self, key: &str) -> ConfigResult<f64> {
        self.get(key)
            .parse()
            .map_err(|_| ConfigError(format!("key {key}: expected a number, got '{}'", self.get(key))))
    }

    pub fn get_u64(&self, key: &str) -> ConfigResult<u64> {
        self.get(key)
            .parse()
            .map_err(|_| ConfigError(format!("key {key}: expected an integer, got '{}'", self.get(key))))
    }

    pub fn get_u32(&self, key: &str) -> ConfigResult<u32> {
        self.get(key)
            .parse()
            .map_err(|_| ConfigError(format!("key {key}: expected an integer, got '{}'", self.get(key))))
    }

    pub fn get_i64(&self, key: &str) -> ConfigResult<i64> {
        self.get(key)
            .parse()
            .map_err(|_| ConfigError(format!("key {key}: expected an integer, got '{}'", self.get(key))))
    }

    pub fn get_bool(&self, key: &str) -> ConfigResult<bool> {
        match self.get(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => err(format!("key {key}: expected a boolean, got '{v}'")),
        }
    }

    pub fn get_f64_list(&self, key: &str) -> ConfigResult<Vec<f64>> {
        self.get(key)
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("key {key}: bad number '{s}'")))
            })
            .collect()
    }

    pub fn get_i64_list(&self, key: &str) -> ConfigResult<Vec<i64>> {
        self.get(key)
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("key {key}: bad integer '{s}'")))
            })
            .collect()
    }

    pub fn seed(&self) -> ConfigResult<u64> {
        self.get_u64("seed")
    }

    pub fn replicates(&self) -> ConfigResult<u64> {
        self.get_u64("replicates")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out"))
    }

    pub fn workers(&self) -> ConfigResult<usize> {
        let w = self.get_u64("workers")? as usize;
        Ok(if w == 0 {
            sixv::parallel::default_workers()
        } else {
            w
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.map.iter()
    }
}

/// Parses an INI-style document into flat keys.
fn parse_ini(text: &str) -> ConfigResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("config line {}: expected key = value", lineno + 1));
        };
        let key = if section.is_empty() {
            k.trim().to_string()
        } else {
            format!("{}.{}", section, k.trim())
        };
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_json_flat(text: &str) -> ConfigResult<BTreeMap<String, String>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError(format!("bad JSON config: {e}")))?;
    // A manifest nests the resolved keys under "config".
    let obj = match &value {
        serde_json::Value::Object(o) if o.contains_key("config") => match &o["config"] {
            serde_json::Value::Object(inner) => inner,
            _ => return err("manifest 'config' field is not an object"),
        },
        serde_json::Value::Object(o) => o,
        _ => return err("JSON config must be an object"),
    };
    let mut map = BTreeMap::new();
    for (k, v) in obj {
        let s = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            _ => return err(format!("key {k}: unsupported JSON value")),
        };
        map.insert(k.clone(), s);
    }
    Ok(map)
}

pub fn load_file(path: &Path) -> ConfigResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_json_flat(&text)
    } else {
        parse_ini(&text)
    }
}

/// Resolves the configuration for one subcommand: schema defaults, then the
/// file, then `key=value` overrides. Rejects unknown and missing keys.
pub fn resolve(
    command: &'static str,
    schema: &[Entry],
    file: Option<&Path>,
    overrides: &[String],
) -> ConfigResult<Resolved> {
    let known: Vec<&Entry> = COMMON.iter().chain(schema.iter()).collect();
    let mut map = BTreeMap::new();
    for e in &known {
        if let Some(d) = e.default {
            map.insert(e.key.to_string(), d.to_string());
        }
    }
    let mut apply = |k: &str, v: String, source: &str| -> ConfigResult<()> {
        // A manifest may carry bookkeeping keys; only schema keys are live,
        // anything else is rejected by name.
        if !known.iter().any(|e| e.key == k) {
            return err(format!("unknown key '{k}' (from {source}) for command {command}"));
        }
        map.insert(k.to_string(), v);
        Ok(())
    };
    if let Some(path) = file {
        for (k, v) in load_file(path)? {
            apply(&k, v, &path.display().to_string())?;
        }
    }
    for item in overrides {
        let Some((k, v)) = item.split_once('=') else {
            return err(format!("override '{item}' is not key=value"));
        };
        apply(k.trim(), v.trim().to_string(), "command line")?;
    }
    for e in &known {
        if !map.contains_key(e.key) {
            return err(format!(
                "missing required key '{}' for command {command} ({})",
                e.key, e.help
            ));
        }
    }
    Ok(Resolved { command, map })
}

/// Writes the manifest that makes the run reproducible.
pub fn write_manifest(cfg: &Resolved, artifacts: &[String]) -> ConfigResult<PathBuf> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))?;
    let mut config = serde_json::Map::new();
    for (k, v) in cfg.entries() {
        config.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    let manifest = serde_json::json!({
        "command": cfg.command,
        "generator_version": sixv::noise::GENERATOR_VERSION,
        "config": config,
        "artifacts": artifacts,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_artifact(cfg: &Resolved, name: &str, contents: &str) -> ConfigResult<()> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))?;
    std::fs::write(dir.join(name), contents)
        .map_err(|e| ConfigError(format!("cannot write {name}: {e}")))
}

pub fn write_artifact_bytes(cfg: &Resolved, name: &str, contents: &[u8]) -> ConfigResult<()> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))?;
    std::fs::write(dir.join(name), contents)
        .map_err(|e| ConfigError(format!("cannot write {name}: {e}")))
}
