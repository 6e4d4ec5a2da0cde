//! The flat, namespaced configuration document.
//!
//! ```json
//! { "engine.keyword_duration_ms": 4000, "gesture.pinch_on": 0.06,
//!   "markers.specs": [...], "server.port": 8765 }
//! ```
//!
//! Missing keys take their defaults; unknown keys are rejected.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::gesture::GestureConfig;
use crate::mapping::{FixtureProvider, HttpProvider, SuggestionProvider};
use crate::marker::{default_specs, ColorMarkerSpec};
use crate::scene::EngineConfig;

/// Environment variable naming a config file; overrides the CLI flag.
pub const CONFIG_ENV: &str = "LIVECUE_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config must be a JSON object of namespaced keys")]
    NotAnObject,
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config section {section}: {message}")]
    Section { section: &'static str, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerConfig {
    pub specs: Vec<ColorMarkerSpec>,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        Self {
            specs: default_specs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Fixture,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// Base seed; each session derives its own from this and its id.
    pub seed: u64,
    pub tick_ms: u64,
    pub suggest_provider: ProviderKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggest_endpoint: Option<String>,
    pub suggest_timeout_ms: u64,
    pub suggest_limit: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8765,
            seed: 0,
            tick_ms: 50,
            suggest_provider: ProviderKind::Fixture,
            suggest_endpoint: None,
            suggest_timeout_ms: 2_000,
            suggest_limit: crate::mapping::DEFAULT_SUGGESTION_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub engine: EngineConfig,
    pub gesture: GestureConfig,
    pub markers: MarkerConfig,
    pub server: ServerConfig,
}

fn section<T: for<'de> Deserialize<'de>>(
    name: &'static str,
    fields: Map<String, Value>,
) -> Result<T, ConfigError> {
    serde_json::from_value(Value::Object(fields)).map_err(|e| ConfigError::Section {
        section: name,
        message: e.to_string(),
    })
}

fn flatten_into(out: &mut Map<String, Value>, prefix: &str, section: &impl Serialize) {
    let v = serde_json::to_value(section).expect("config sections serialize");
    if let Value::Object(fields) = v {
        for (k, v) in fields {
            out.insert(format!("{prefix}.{k}"), v);
        }
    }
}

impl Config {
    pub fn from_json(src: &str) -> Result<Self, ConfigError> {
        Self::from_value(serde_json::from_str(src)?)
    }

    pub fn from_value(doc: Value) -> Result<Self, ConfigError> {
        let Value::Object(doc) = doc else {
            return Err(ConfigError::NotAnObject);
        };
        let mut parts: [Map<String, Value>; 4] = Default::default();
        for (key, value) in doc {
            let idx = match key.split_once('.') {
                Some(("engine", _)) => 0,
                Some(("gesture", _)) => 1,
                Some(("markers", _)) => 2,
                Some(("server", _)) => 3,
                _ => return Err(ConfigError::UnknownKey(key)),
            };
            let (_, field) = key.split_once('.').expect("matched above");
            parts[idx].insert(field.to_string(), value);
        }
        let [engine, gesture, markers, server] = parts;
        let cfg = Self {
            engine: section("engine", engine)?,
            gesture: section("gesture", gesture)?,
            markers: section("markers", markers)?,
            server: section("server", server)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&src)
    }

    /// `$LIVECUE_CONFIG`, else `path`, else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self, ConfigError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => path.map_or_else(|| Ok(Self::default()), Self::load),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.engine.validate().map_err(ConfigError::Invalid)?;
        self.gesture.validate().map_err(ConfigError::Invalid)?;
        for spec in &self.markers.specs {
            spec.validate()
                .map_err(|e| ConfigError::Invalid(format!("markers.specs: {e}")))?;
        }
        if self.server.tick_ms == 0 {
            return Err(ConfigError::Invalid("server.tick_ms must be positive".into()));
        }
        if self.server.suggest_provider == ProviderKind::Http {
            let endpoint = self.server.suggest_endpoint.as_deref().unwrap_or_default();
            url::Url::parse(endpoint).map_err(|e| {
                ConfigError::Invalid(format!("server.suggest_endpoint {endpoint:?}: {e}"))
            })?;
        }
        Ok(())
    }

    /// The flat document form, with every key present.
    pub fn to_value(&self) -> Value {
        let mut out = Map::new();
        flatten_into(&mut out, "engine", &self.engine);
        flatten_into(&mut out, "gesture", &self.gesture);
        flatten_into(&mut out, "markers", &self.markers);
        flatten_into(&mut out, "server", &self.server);
        Value::Object(out)
    }

    pub fn marker_names(&self) -> Vec<String> {
        self.markers.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn suggestion_provider(&self) -> Box<dyn SuggestionProvider> {
        match (&self.server.suggest_provider, &self.server.suggest_endpoint) {
            (ProviderKind::Http, Some(endpoint)) => {
                let timeout = Duration::from_millis(self.server.suggest_timeout_ms);
                match HttpProvider::new(endpoint, timeout) {
                    Ok(p) => Box::new(p),
                    Err(_) => Box::new(FixtureProvider::bundled()),
                }
            }
            _ => Box::new(FixtureProvider::bundled()),
        }
    }
}
