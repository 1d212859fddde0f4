//! TOML configuration for `gen-pairs`. Every key is optional; command-line
//! flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seeds: Option<PathBuf>,
    pub rules: Option<String>,
    pub depth: Option<usize>,
    #[serde(default)]
    pub disable: Vec<String>,
    pub ratio: Option<String>,
    pub train: Option<usize>,
    pub dev: Option<usize>,
    pub test: Option<usize>,
    pub fractions: Option<[f64; 3]>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub mode: Option<String>,
    pub fallback_template: Option<bool>,
    pub audit: Option<bool>,
    pub max_states: Option<usize>,
    pub llm: Option<LlmSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub key: Option<String>,
    pub temperature: Option<f64>,
    pub max_retries: Option<u32>,
    pub max_in_flight: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub backoff_ms: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.seeds, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(rules) = &mut cfg.rules {
            let candidate = base.join(&*rules);
            if candidate.is_file() {
                *rules = candidate.to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg: FileConfig = toml::from_str(
            r#"
            seeds = "seeds.txt"
            depth = 2
            disable = ["I1"]
            ratio = "1:1"
            fractions = [0.8, 0.1, 0.1]
            seed = 7
            mode = "llm"
            [llm]
            endpoint = "http://localhost:9/v1"
            model = "m"
            max_retries = 1
            "#,
        )
        .unwrap();
        assert_eq!(cfg.depth, Some(2));
        assert_eq!(cfg.disable, ["I1"]);
        assert_eq!(cfg.llm.unwrap().max_retries, Some(1));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("dept = 2").is_err());
    }

    #[test]
    fn paths_resolve_against_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "seeds = \"s.txt\"\nout = \"/abs\"\n").unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.seeds.unwrap(), dir.path().join("s.txt"));
        assert_eq!(cfg.out.unwrap(), PathBuf::from("/abs"));
        assert!(FileConfig::load(&dir.path().join("missing.toml")).is_err());
    }
}
