use std::fmt;
use std::str::FromStr;

use super::document::{Blueprint, Section};
use super::BlueprintError;

/// Address of one scalar inside a template section, e.g. `task_controller.Q[2][2]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamPath {
    pub section: Section,
    pub param: String,
    pub index: Vec<usize>,
}

impl FromStr for ParamPath {
    type Err = BlueprintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| BlueprintError::Path(format!("'{s}': {m}"));
        let (section, rest) = s
            .split_once('.')
            .ok_or_else(|| bad("expected section.param"))?;
        let section = Section::parse(section).ok_or_else(|| bad("unknown section"))?;
        if section.template_kind().is_none() {
            return Err(bad("only model and controller sections hold parameters"));
        }
        let (param, mut tail) = match rest.find('[') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        if param.is_empty() || !param.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad("invalid parameter name"));
        }
        let mut index = Vec::new();
        while !tail.is_empty() {
            let close = tail.find(']').ok_or_else(|| bad("unclosed '['"))?;
            if !tail.starts_with('[') {
                return Err(bad("expected '['"));
            }
            index.push(
                tail[1..close]
                    .parse()
                    .map_err(|_| bad("index is not an integer"))?,
            );
            tail = &tail[close + 1..];
        }
        if index.len() > 2 {
            return Err(bad("at most two indices"));
        }
        Ok(ParamPath {
            section,
            param: param.to_string(),
            index,
        })
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.section, self.param)?;
        for i in &self.index {
            write!(f, "[{i}]")?;
        }
        Ok(())
    }
}

impl serde::Serialize for ParamPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ParamPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Blueprint {
    pub fn get_param(&self, path: &ParamPath) -> Option<f64> {
        self.template(path.section)?
            .params
            .get(&path.param)?
            .element(&path.index)
    }

    /// Sets one scalar. Symmetric weight matrices (`Q`, `R`) are kept
    /// symmetric by writing the mirrored entry too.
    pub fn set_param(&mut self, path: &ParamPath, value: f64) -> Result<(), BlueprintError> {
        let slot = self
            .template_mut(path.section)
            .and_then(|t| t.params.get_mut(&path.param))
            .ok_or_else(|| BlueprintError::Path(format!("'{path}' does not exist")))?;
        *slot
            .element_mut(&path.index)
            .ok_or_else(|| BlueprintError::Path(format!("'{path}' is out of range")))? = value;
        if let [i, j] = path.index[..] {
            if i != j && (path.param == "Q" || path.param == "R") {
                if let Some(m) = slot.element_mut(&[j, i]) {
                    *m = value;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let p: ParamPath = "task_controller.Q[2][2]".parse().unwrap();
        assert_eq!(p.section, Section::TaskController);
        assert_eq!(p.param, "Q");
        assert_eq!(p.index, vec![2, 2]);
        assert_eq!(p.to_string(), "task_controller.Q[2][2]");
        let p: ParamPath = "task_model.m_cart".parse().unwrap();
        assert!(p.index.is_empty());
        assert!("rates.tracking_dt".parse::<ParamPath>().is_err());
        assert!("task_controller.Q[x]".parse::<ParamPath>().is_err());
        assert!("task_controller".parse::<ParamPath>().is_err());
    }
}
