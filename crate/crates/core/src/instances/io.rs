use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::submodular::json::{FunctionRepr, NumText};

use super::model::{CapacityDistribution, Instance, Normalization};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemRepr {
    size: serde_json::Number,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionRepr {
    p: BTreeMap<String, NumText>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRepr {
    items: Vec<ItemRepr>,
    function: FunctionRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distribution: Option<DistributionRepr>,
}

/// Options for reading instance files.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub normalization: Normalization,
    /// When false, explicit tables are loaded without the structural check so
    /// that they can be audited afterwards.
    pub verify_tables: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            normalization: Normalization::Reject,
            verify_tables: true,
        }
    }
}

impl<S: Scalar> Instance<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let repr = InstanceRepr {
            items: self
                .items()
                .iter()
                .map(|it| ItemRepr { size: it.size.into() })
                .collect(),
            function: FunctionRepr::of(self.function()),
            distribution: self.distribution().map(|d| DistributionRepr {
                p: d
                    .support()
                    .map(|(t, v)| (t.to_string(), NumText::of(v)))
                    .collect(),
            }),
        };
        serde_json::to_value(repr).expect("instance repr serializes")
    }

    pub fn from_json(value: &serde_json::Value, options: LoadOptions) -> Result<Self> {
        let repr: InstanceRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::parse("instance", e.to_string()))?;
        let mut sizes = Vec::with_capacity(repr.items.len());
        for (i, item) in repr.items.iter().enumerate() {
            match item.size.as_u64() {
                Some(s) if s >= 1 => sizes.push(s),
                _ => {
                    return Err(Error::parse(
                        format!("items[{i}].size"),
                        format!("size must be a positive integer, got {}", item.size),
                    ))
                }
            }
        }
        let f = repr.function.build::<S>("function", options.verify_tables)?;
        let inst = Instance::new(sizes, f).map_err(|e| Error::parse("instance", e.to_string()))?;
        let Some(dist) = repr.distribution else {
            return Ok(inst);
        };
        let horizon = inst.total_size();
        let mut points = Vec::with_capacity(dist.p.len());
        for (key, v) in &dist.p {
            let location = format!("distribution.p.{key}");
            let t: u64 = key
                .trim()
                .parse()
                .map_err(|_| Error::parse(&location, "capacity keys must be nonnegative integers"))?;
            if t > horizon {
                return Err(Error::parse(
                    &location,
                    format!("capacity {t} lies beyond the total size {horizon}"),
                ));
            }
            points.push((t, v.parse::<S>(&location)?));
        }
        let dist = CapacityDistribution::from_points(horizon, &points, options.normalization)
            .map_err(|e| Error::parse("distribution.p", e.to_string()))?;
        inst.with_distribution(dist)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("json value prints")
    }
}

pub fn load_instance<S: Scalar>(path: impl AsRef<Path>, options: LoadOptions) -> Result<Instance<S>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })?;
    Instance::from_json(&value, options)
}

pub fn save_instance<S: Scalar>(inst: &Instance<S>, path: impl AsRef<Path>) -> Result<()> {
    let mut text = inst.to_json_string();
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
