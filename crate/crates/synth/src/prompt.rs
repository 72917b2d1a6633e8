use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::SynthError;

static MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{\{([A-Za-z_][A-Za-z0-9_]*)\}\}").unwrap());

/// A prompt body with `{{name}}` placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub stage: String,
    pub body: String,
    pub required: Vec<String>,
}

impl PromptTemplate {
    /// Fails if a required placeholder does not occur in the body.
    pub fn new(stage: &str, body: &str, required: &[&str]) -> Result<PromptTemplate, SynthError> {
        let absent: Vec<String> = required
            .iter()
            .filter(|r| !body.contains(&format!("{{{{{r}}}}}")))
            .map(|r| r.to_string())
            .collect();
        if !absent.is_empty() {
            return Err(SynthError::Template(format!(
                "{stage} template lacks placeholders: {}",
                absent.join(", ")
            )));
        }
        Ok(PromptTemplate {
            stage: stage.into(),
            body: body.into(),
            required: required.iter().map(|r| r.to_string()).collect(),
        })
    }

    /// Every placeholder name in the body, in order of first occurrence.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in MARKER.captures_iter(&self.body) {
            if !out.iter().any(|n| n == &c[1]) {
                out.push(c[1].to_string());
            }
        }
        out
    }
}

/// Substitutes every marker in one pass; inserted text is not re-expanded.
pub fn render_prompt(
    tpl: &PromptTemplate,
    bindings: &BTreeMap<String, String>,
) -> Result<String, SynthError> {
    let mut missing: Vec<String> = tpl
        .required
        .iter()
        .chain(&tpl.placeholders())
        .filter(|n| !bindings.contains_key(*n))
        .cloned()
        .collect();
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        return Err(SynthError::MissingBindings(missing));
    }
    Ok(MARKER
        .replace_all(&tpl.body, |c: &regex::Captures| bindings[&c[1]].clone())
        .into_owned())
}

/// Convenience for literal binding lists.
pub fn bindings<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

const FILES: [(&str, &str); 11] = [
    (
        "prompts/system.txt",
        include_str!("../assets/prompts/system.txt"),
    ),
    (
        "prompts/design.txt",
        include_str!("../assets/prompts/design.txt"),
    ),
    (
        "prompts/dataflow.txt",
        include_str!("../assets/prompts/dataflow.txt"),
    ),
    (
        "prompts/tune.txt",
        include_str!("../assets/prompts/tune.txt"),
    ),
    (
        "prompts/tune_followup.txt",
        include_str!("../assets/prompts/tune_followup.txt"),
    ),
    (
        "prompts/reflection.txt",
        include_str!("../assets/prompts/reflection.txt"),
    ),
    (
        "prompts/summary.txt",
        include_str!("../assets/prompts/summary.txt"),
    ),
    (
        "prompts/converter_language.txt",
        include_str!("../assets/prompts/converter_language.txt"),
    ),
    (
        "checklists/design.txt",
        include_str!("../assets/checklists/design.txt"),
    ),
    (
        "checklists/dataflow.txt",
        include_str!("../assets/checklists/dataflow.txt"),
    ),
    (
        "checklists/tune.txt",
        include_str!("../assets/checklists/tune.txt"),
    ),
];

/// All prompt templates and checklists used by the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub system: String,
    pub design: PromptTemplate,
    pub dataflow: PromptTemplate,
    pub tune: PromptTemplate,
    pub tune_followup: PromptTemplate,
    pub reflection: PromptTemplate,
    pub summary: PromptTemplate,
    pub converter_language: String,
    pub checklists: BTreeMap<String, String>,
}

impl PromptSet {
    /// The assets compiled into the binary.
    pub fn builtin() -> PromptSet {
        Self::from_files(|name| {
            Ok(FILES
                .iter()
                .find(|(n, _)| *n == name)
                .expect("listed asset")
                .1
                .to_string())
        })
        .expect("built-in assets are well formed")
    }

    /// Loads the same layout (`prompts/*.txt`, `checklists/*.txt`) from a directory.
    pub fn load_dir(dir: &Path) -> Result<PromptSet, SynthError> {
        Self::from_files(|name| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| SynthError::Io(format!("{}: {e}", p.display())))
        })
    }

    /// Relative names of every asset file.
    pub fn asset_names() -> impl Iterator<Item = &'static str> {
        FILES.iter().map(|(n, _)| *n)
    }

    fn from_files(
        read: impl Fn(&str) -> Result<String, SynthError>,
    ) -> Result<PromptSet, SynthError> {
        let t = |stage: &str, req: &[&str]| {
            PromptTemplate::new(stage, &read(&format!("prompts/{stage}.txt"))?, req)
        };
        let mut checklists = BTreeMap::new();
        for stage in ["design", "dataflow", "tune"] {
            checklists.insert(stage.to_string(), read(&format!("checklists/{stage}.txt"))?);
        }
        Ok(PromptSet {
            system: read("prompts/system.txt")?,
            design: t(
                "design",
                &["task", "schema", "samples", "library", "checklist"],
            )?,
            dataflow: t(
                "dataflow",
                &[
                    "task",
                    "design_summary",
                    "design",
                    "schema",
                    "converter_language",
                    "checklist",
                ],
            )?,
            tune: t(
                "tune",
                &["task", "summaries", "params", "trajectory", "checklist"],
            )?,
            tune_followup: t("tune_followup", &["outcome", "trajectory"])?,
            reflection: t("reflection", &["errors", "checklist"])?,
            summary: t("summary", &["stage"])?,
            converter_language: read("prompts/converter_language.txt")?,
            checklists,
        })
    }

    pub fn checklist(&self, stage: &str) -> &str {
        self.checklists.get(stage).map(String::as_str).unwrap_or("")
    }
}
