//! Output files tagged with the run's seed and config hash, plus manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct Run {
    seed: u64,
    config_hash: String,
    manifest: Value,
    out: PathBuf,
    outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    /// `config` is the resolved configuration; `inputs` maps input paths to
    /// content hashes so the config hash tracks file contents too.
    pub fn new(seed: u64, argv: &[String], config: Value, inputs: Vec<(String, String)>, out: &Path) -> Result<Self> {
        let inputs: serde_json::Map<String, Value> = inputs.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
        let hashed = json!({ "config": config, "inputs": inputs });
        let config_hash = sha256_hex(serde_json::to_string(&hashed)?.as_bytes())[..16].to_string();
        fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
        let manifest = json!({
            "tool": "qkp-tn",
            "version": env!("CARGO_PKG_VERSION"),
            "argv": argv,
            "seed": seed,
            "config_hash": config_hash,
            "config": hashed["config"],
            "inputs": hashed["inputs"],
        });
        Ok(Self {
            seed,
            config_hash,
            manifest,
            out: out.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    #[cfg(test)]
    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn header(&self) -> String {
        format!("# seed: {}\n# config_hash: {}\n", self.seed, self.config_hash)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    /// Writes a JSON document with a `run` object holding seed and hash.
    pub fn json(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let mut doc: Value = serde_json::from_str(text)?;
        if let Value::Object(map) = &mut doc {
            map.insert("run".into(), json!({ "seed": self.seed, "config_hash": self.config_hash }));
        }
        self.write(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    /// Writes text (CSV or a rendered table) behind `#` comment lines.
    pub fn commented(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let text = self.header() + body;
        self.write(name, &text)
    }

    /// Writes `<stem>.manifest.json` listing everything written so far.
    pub fn finish(mut self, stem: &str) -> Result<PathBuf> {
        self.manifest["outputs"] = json!(self.outputs);
        let name = format!("{stem}.manifest.json");
        let path = self.out.join(&name);
        fs::write(&path, serde_json::to_string_pretty(&self.manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_config_and_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let argv = vec!["qkp-tn".to_string()];
        let a = Run::new(1, &argv, json!({"n": 3}), vec![], dir.path()).unwrap();
        let b = Run::new(1, &argv, json!({"n": 3}), vec![], dir.path()).unwrap();
        let c = Run::new(1, &argv, json!({"n": 4}), vec![], dir.path()).unwrap();
        let d = Run::new(1, &argv, json!({"n": 3}), vec![("x".into(), "ab".into())], dir.path()).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_ne!(a.config_hash(), d.config_hash());
        assert_eq!(a.config_hash().len(), 16);
    }

    #[test]
    fn files_carry_seed_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::new(9, &["qkp-tn".to_string()], json!({}), vec![], dir.path()).unwrap();
        let hash = run.config_hash().to_string();
        let csv = run.commented("a.csv", "x\n1\n").unwrap();
        let js = run.json("a.json", r#"{"k": 1}"#).unwrap();
        let manifest = run.finish("a").unwrap();
        let csv = fs::read_to_string(csv).unwrap();
        assert!(csv.starts_with(&format!("# seed: 9\n# config_hash: {hash}\nx\n")));
        let js: Value = serde_json::from_str(&fs::read_to_string(js).unwrap()).unwrap();
        assert_eq!(js["run"]["seed"], 9);
        assert_eq!(js["k"], 1);
        let m: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
        assert_eq!(m["outputs"], json!(["a.csv", "a.json"]));
    }
}
