//! Named measurement channels (`y`) and the flat bundles environments emit.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub dim: usize,
    pub unit: String,
}

impl ChannelSpec {
    pub fn new(name: &str, dim: usize, unit: &str) -> Self {
        Self {
            name: name.to_string(),
            dim,
            unit: unit.to_string(),
        }
    }
}

/// Ordered channel list plus the actuation dimension of an environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "SchemaDoc", into = "SchemaDoc")]
pub struct MeasurementSchema {
    channels: Vec<ChannelSpec>,
    actuation_dim: usize,
    offsets: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct SchemaDoc {
    channels: Vec<ChannelSpec>,
    actuation_dim: usize,
}

impl From<SchemaDoc> for MeasurementSchema {
    fn from(d: SchemaDoc) -> Self {
        Self::new(d.channels, d.actuation_dim)
    }
}

impl From<MeasurementSchema> for SchemaDoc {
    fn from(s: MeasurementSchema) -> Self {
        Self {
            channels: s.channels,
            actuation_dim: s.actuation_dim,
        }
    }
}

impl MeasurementSchema {
    /// Later duplicates of a channel name shadow nothing: the first wins.
    pub fn new(channels: Vec<ChannelSpec>, actuation_dim: usize) -> Self {
        let mut offsets = Vec::with_capacity(channels.len());
        let mut index = HashMap::new();
        let mut off = 0;
        for (i, c) in channels.iter().enumerate() {
            offsets.push(off);
            off += c.dim;
            index.entry(c.name.clone()).or_insert(i);
        }
        Self {
            channels,
            actuation_dim,
            offsets,
            index,
        }
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn actuation_dim(&self) -> usize {
        self.actuation_dim
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelSpec> {
        self.index.get(name).map(|&i| &self.channels[i])
    }

    /// Flat offset and dimension of a channel.
    pub fn locate(&self, name: &str) -> Option<(usize, usize)> {
        self.index
            .get(name)
            .map(|&i| (self.offsets[i], self.channels[i].dim))
    }

    pub fn total_dim(&self) -> usize {
        self.channels.iter().map(|c| c.dim).sum()
    }

    /// Column labels `name[i]` in flat order.
    pub fn labels(&self) -> Vec<String> {
        self.channels
            .iter()
            .flat_map(|c| (0..c.dim).map(move |i| format!("{}[{i}]", c.name)))
            .collect()
    }
}

impl fmt::Display for MeasurementSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.channels {
            writeln!(f, "- {} (dim {}, {})", c.name, c.dim, c.unit)?;
        }
        write!(f, "actuation: {} joint torques", self.actuation_dim)
    }
}

/// One sample of every channel, stored flat in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBundle {
    schema: Arc<MeasurementSchema>,
    values: Vec<f64>,
}

impl MeasurementBundle {
    pub fn zeros(schema: Arc<MeasurementSchema>) -> Self {
        let n = schema.total_dim();
        Self {
            schema,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(schema: Arc<MeasurementSchema>, values: Vec<f64>) -> Option<Self> {
        (values.len() == schema.total_dim()).then_some(Self { schema, values })
    }

    pub fn schema(&self) -> &Arc<MeasurementSchema> {
        &self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.schema
            .locate(name)
            .map(|(o, d)| &self.values[o..o + d])
    }

    /// Writes a channel; panics if the channel is unknown or the length differs
    /// (environment wiring bug, not a runtime condition).
    pub fn set(&mut self, name: &str, v: &[f64]) {
        let (o, d) = self
            .schema
            .locate(name)
            .unwrap_or_else(|| panic!("unknown channel {name}"));
        assert_eq!(d, v.len(), "channel {name} dimension");
        self.values[o..o + d].copy_from_slice(v);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `name=[..]` lines for diagnostics.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for c in self.schema.channels() {
            let v = self.get(&c.name).unwrap_or(&[]);
            s.push_str(&format!("{} = {:?}\n", c.name, v));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Arc<MeasurementSchema> {
        Arc::new(MeasurementSchema::new(
            vec![
                ChannelSpec::new("a", 1, "m"),
                ChannelSpec::new("b", 3, "rad"),
            ],
            2,
        ))
    }

    #[test]
    fn offsets_and_access() {
        let s = schema();
        assert_eq!(s.locate("b"), Some((1, 3)));
        assert_eq!(s.total_dim(), 4);
        assert_eq!(s.labels(), vec!["a[0]", "b[0]", "b[1]", "b[2]"]);
        let mut b = MeasurementBundle::zeros(s);
        b.set("b", &[1.0, 2.0, 3.0]);
        assert_eq!(b.get("b"), Some(&[1.0, 2.0, 3.0][..]));
        assert_eq!(b.get("zz"), None);
    }

    #[test]
    fn serde_round_trip() {
        let s = schema();
        let j = serde_json::to_string(&*s).unwrap();
        let back: MeasurementSchema = serde_json::from_str(&j).unwrap();
        assert_eq!(back, *s);
    }
}
