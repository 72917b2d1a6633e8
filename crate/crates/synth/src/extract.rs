use std::sync::LazyLock;

use metactl_core::blueprint::{Blueprint, Section};
use regex::Regex;

use crate::SynthError;

static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<([A-Za-z_][A-Za-z0-9_]*)>").unwrap());
static FENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\A[ \t]*\r?\n?[ \t]*```[^\n]*\n").unwrap());

/// One `<step_name>` tag and the fenced block following it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedBlock {
    pub step_name: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extraction {
    pub blocks: Vec<ExtractedBlock>,
    /// Tags skipped because no fenced block followed them.
    pub notes: Vec<String>,
}

/// Scans for `<name>` tags each directly followed by a fenced block. Blocks
/// are returned in document order; text inside a block is not scanned.
pub fn extract_blocks(response: &str) -> Extraction {
    let mut out = Extraction::default();
    let mut pos = 0;
    while let Some(m) = TAG.captures_at(response, pos) {
        let tag = m.get(0).unwrap();
        let name = m[1].to_string();
        let rest = &response[tag.end()..];
        let Some(open) = FENCE.find(rest) else {
            out.notes.push(format!(
                "tag <{name}> is not followed by a fenced block; skipped"
            ));
            pos = tag.end();
            continue;
        };
        let body_start = tag.end() + open.end();
        let tail = &response[body_start..];
        let (body, next) = match tail
            .find("\n```")
            .map(|i| (i, i + 4))
            .or_else(|| tail.starts_with("```").then_some((0, 3)))
        {
            Some((end, skip)) => (&tail[..end], body_start + skip),
            None => {
                out.notes
                    .push(format!("block after <{name}> is never closed; skipped"));
                break;
            }
        };
        out.blocks.push(ExtractedBlock {
            step_name: name,
            body: body.to_string(),
        });
        pos = next;
    }
    out
}

/// Replaces only the named sections; on any error the input is returned
/// untouched through the error path.
pub fn partial_update(bp: &Blueprint, blocks: &[ExtractedBlock]) -> Result<Blueprint, SynthError> {
    let mut out = bp.clone();
    let mut errors = Vec::new();
    for b in blocks {
        match Section::parse(&b.step_name) {
            None => errors.push(format!("unknown step <{}>", b.step_name)),
            Some(section) => {
                if let Err(e) = out.replace_section(section, &b.body) {
                    errors.push(format!("<{}>: {e}", b.step_name));
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(SynthError::Update(errors))
    }
}
