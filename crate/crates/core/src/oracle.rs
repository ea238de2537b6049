//! Behavior oracle: decides whether a PDF retains malicious functionality.
//!
//! The synthetic oracle is a deterministic stand-in for a sandbox: a file is
//! malicious iff some reduced-tree node carries the payload marker at a path
//! matching a trigger pattern, and the trigger's execution requirements hold
//! (the dispatch entry and a viable page tree, mirroring what a real viewer
//! needs before the payload runs). Names are decoded before matching, so
//! hex-obfuscation does not change verdicts. The external adapter shells out
//! to a configured command instead.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::featurizer::hex_normalize_bytes;
use crate::pdf::{parse_document, PdfValue};
use crate::structure::{build_reduced_tree, value_at_location, value_at_path};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Malicious(Vec<String>),
    Benign,
    Error(String),
}

impl Verdict {
    pub fn is_malicious(&self) -> bool {
        matches!(self, Verdict::Malicious(_))
    }
}

/// Execution requirement attached to a trigger pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerRequirement {
    /// The structural path must exist.
    PathPresent(String),
    /// The value at the path must be the given decoded Name.
    NameAt { path: String, value: String },
    /// The value at the path must resolve to a dictionary.
    DictAt(String),
}

/// A structural-path glob ("/OpenAction/JS" exact, or "/Names/JavaScript/**"
/// prefix) plus the requirements for the payload to actually execute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerPattern {
    pub pattern: String,
    #[serde(default)]
    pub requires: Vec<TriggerRequirement>,
}

impl TriggerPattern {
    pub fn exact(pattern: &str) -> Self {
        TriggerPattern {
            pattern: pattern.to_string(),
            requires: Vec::new(),
        }
    }

    fn matches(&self, path: &str) -> bool {
        if let Some(prefix) = self.pattern.strip_suffix("/**") {
            path == prefix || path.starts_with(&format!("{prefix}/"))
        } else {
            path == self.pattern
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticOracleConfig {
    pub marker: Vec<u8>,
    pub triggers: Vec<TriggerPattern>,
}

impl SyntheticOracleConfig {
    /// Default trigger semantics used by the synthetic corpus: an OpenAction
    /// JavaScript chain (requires the /S dispatch and a page tree) and a
    /// Names-tree JavaScript chain (requires a page tree).
    pub fn default_config(marker: &[u8]) -> Self {
        SyntheticOracleConfig {
            marker: marker.to_vec(),
            triggers: vec![
                TriggerPattern {
                    pattern: "/OpenAction/JS".to_string(),
                    requires: vec![
                        TriggerRequirement::NameAt {
                            path: "/OpenAction/S".to_string(),
                            value: "/JavaScript".to_string(),
                        },
                        TriggerRequirement::DictAt("/Pages".to_string()),
                    ],
                },
                TriggerPattern {
                    pattern: "/Names/JavaScript/Names/JS".to_string(),
                    requires: vec![TriggerRequirement::DictAt("/Pages".to_string())],
                },
            ],
        }
    }
}

/// External-command adapter: `{file}` is replaced with the candidate path;
/// exit 0 = benign, 1 = malicious (signatures on stdout, one per line),
/// anything else = error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalOracleConfig {
    pub command: String,
    pub timeout_secs: u64,
}

#[derive(Debug, Clone)]
pub enum Oracle {
    Synthetic(SyntheticOracleConfig),
    External(ExternalOracleConfig),
}

impl Oracle {
    pub fn synthetic(config: SyntheticOracleConfig) -> Self {
        Oracle::Synthetic(config)
    }

    pub fn external(command: &str) -> Self {
        Oracle::External(ExternalOracleConfig {
            command: command.to_string(),
            timeout_secs: 60,
        })
    }

    /// Never fails: unassessable input yields `Verdict::Error`, which every
    /// attack treats as non-evasive.
    pub fn assess(&self, bytes: &[u8]) -> Verdict {
        match self {
            Oracle::Synthetic(config) => assess_synthetic(config, bytes),
            Oracle::External(config) => assess_external(config, bytes),
        }
    }
}

fn assess_synthetic(config: &SyntheticOracleConfig, bytes: &[u8]) -> Verdict {
    let (doc, _diags) = match parse_document(bytes) {
        Ok(parsed) => parsed,
        Err(e) => return Verdict::Error(e.to_string()),
    };
    let tree = match build_reduced_tree(&doc) {
        Ok(t) => t,
        Err(e) => return Verdict::Error(e.to_string()),
    };
    let mut signatures = Vec::new();
    for trigger in &config.triggers {
        let mut fired = false;
        for node in tree.nodes.iter().skip(1) {
            if !trigger.matches(&node.path) {
                continue;
            }
            let payload = value_at_location(&doc, &node.location)
                .and_then(|v| doc.resolve(v))
                .and_then(|v| match v {
                    PdfValue::Stream(s) => Some(s.data.clone()),
                    PdfValue::String(s) => Some(s.clone()),
                    _ => None,
                });
            let Some(payload) = payload else { continue };
            let decoded = hex_normalize_bytes(&payload);
            if contains(&decoded, &config.marker) && requirements_hold(&doc, &trigger.requires) {
                fired = true;
                break;
            }
        }
        if fired {
            signatures.push(trigger.pattern.clone());
        }
    }
    if signatures.is_empty() {
        Verdict::Benign
    } else {
        Verdict::Malicious(signatures)
    }
}

fn requirements_hold(doc: &crate::pdf::PdfDocument, reqs: &[TriggerRequirement]) -> bool {
    reqs.iter().all(|req| match req {
        TriggerRequirement::PathPresent(path) => value_at_path(doc, path).is_some(),
        TriggerRequirement::NameAt { path, value } => value_at_path(doc, path)
            .and_then(|v| doc.resolve(v))
            .and_then(|v| v.as_name())
            .map(|n| n.decoded() == value)
            .unwrap_or(false),
        TriggerRequirement::DictAt(path) => matches!(
            value_at_path(doc, path).and_then(|v| doc.resolve(v)),
            Some(PdfValue::Dictionary(_))
        ),
    })
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

fn assess_external(config: &ExternalOracleConfig, bytes: &[u8]) -> Verdict {
    let mut file = match tempfile::Builder::new().suffix(".pdf").tempfile() {
        Ok(f) => f,
        Err(e) => return Verdict::Error(format!("tempfile: {e}")),
    };
    if let Err(e) = file.write_all(bytes) {
        return Verdict::Error(format!("tempfile write: {e}"));
    }
    let path = file.path().to_string_lossy().to_string();
    let command = config.command.replace("{file}", &path);
    let mut child = match std::process::Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return Verdict::Error(format!("spawn: {e}")),
    };
    let deadline = Instant::now() + Duration::from_secs(config.timeout_secs);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Verdict::Error("oracle command timed out".to_string());
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Verdict::Error(format!("wait: {e}")),
        }
    };
    let mut stdout = String::new();
    if let Some(mut out) = child.stdout.take() {
        use std::io::Read;
        let _ = out.read_to_string(&mut stdout);
    }
    match status.code() {
        Some(0) => Verdict::Benign,
        Some(1) => {
            let mut sigs: Vec<String> = stdout
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect();
            if sigs.is_empty() {
                sigs.push("external".to_string());
            }
            Verdict::Malicious(sigs)
        }
        other => Verdict::Error(format!("oracle command exit {other:?}")),
    }
}
