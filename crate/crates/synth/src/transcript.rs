use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::SynthError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Message {
        Message {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Message {
        Message {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Message {
        Message {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

/// SHA-256 over the length-prefixed role and content of every message.
pub fn request_digest(messages: &[Message]) -> String {
    let mut h = Sha256::new();
    for m in messages {
        for part in [&m.role, &m.content] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
    }
    format!("{:x}", h.finalize())
}

/// One request/response pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub stage: String,
    pub attempt: usize,
    pub request_digest: String,
    pub request: Vec<Message>,
    pub response: String,
    pub timestamp: String,
}

/// Exchanges of one pipeline run, optionally mirrored line by line to a file
/// so a failed run leaves its partial transcript behind.
#[derive(Debug, Default)]
pub struct Transcript {
    pub exchanges: Vec<Exchange>,
    sink: Option<File>,
}

impl Transcript {
    pub fn in_memory() -> Transcript {
        Transcript::default()
    }

    pub fn to_file(path: &Path) -> Result<Transcript, SynthError> {
        let f =
            File::create(path).map_err(|e| SynthError::Io(format!("{}: {e}", path.display())))?;
        Ok(Transcript {
            exchanges: vec![],
            sink: Some(f),
        })
    }

    pub fn append(&mut self, ex: Exchange) -> Result<(), SynthError> {
        if let Some(f) = &mut self.sink {
            let line = serde_json::to_string(&ex).expect("exchange serializes");
            writeln!(f, "{line}")
                .and_then(|_| f.flush())
                .map_err(|e| SynthError::Io(format!("transcript: {e}")))?;
        }
        self.exchanges.push(ex);
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        self.exchanges
            .iter()
            .map(|e| serde_json::to_string(e).expect("exchange serializes") + "\n")
            .collect()
    }

    pub fn load(path: &Path) -> Result<Vec<Exchange>, SynthError> {
        let f = File::open(path).map_err(|e| SynthError::Io(format!("{}: {e}", path.display())))?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| SynthError::Io(format!("{}: {e}", path.display())))?;
            if line.trim().is_empty() {
                continue;
            }
            let ex = serde_json::from_str(&line)
                .map_err(|e| SynthError::Io(format!("{} line {}: {e}", path.display(), i + 1)))?;
            out.push(ex);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_separates_fields() {
        let a = request_digest(&[Message::user("ab"), Message::user("c")]);
        let b = request_digest(&[Message::user("a"), Message::user("bc")]);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
        assert_eq!(
            a,
            request_digest(&[Message::user("ab"), Message::user("c")])
        );
        assert_ne!(
            request_digest(&[Message::user("x")]),
            request_digest(&[Message::system("x")])
        );
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut t = Transcript::to_file(&path).unwrap();
        let req = vec![Message::user("hi\nthere")];
        let ex = Exchange {
            stage: "design".into(),
            attempt: 0,
            request_digest: request_digest(&req),
            request: req,
            response: "```\nx\n```".into(),
            timestamp: "2026-01-01T00:00:00.000Z".into(),
        };
        t.append(ex.clone()).unwrap();
        t.append(ex.clone()).unwrap();
        let back = Transcript::load(&path).unwrap();
        assert_eq!(back, [ex.clone(), ex]);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), t.to_jsonl());
    }
}
