use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::function::{ConcaveMap, SubmodularFunction};

/// A number in JSON: either a `"p/q"` / decimal string or a bare number.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum NumText {
    Text(String),
    Number(serde_json::Number),
}

impl NumText {
    pub(crate) fn parse<S: Scalar>(&self, location: &str) -> Result<S> {
        let text = match self {
            NumText::Text(s) => s.clone(),
            NumText::Number(n) => n.to_string(),
        };
        S::parse_scalar(&text)
            .ok_or_else(|| Error::parse(location, format!("`{text}` is not a number")))
    }

    pub(crate) fn of<S: Scalar>(v: &S) -> Self {
        NumText::Text(v.render())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub(crate) enum FunctionRepr {
    Modular {
        weights: Vec<NumText>,
    },
    Coverage {
        element_weights: Vec<NumText>,
        covers: Vec<Vec<usize>>,
    },
    ConcaveModular {
        weights: Vec<NumText>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<MapRepr>,
    },
    Table {
        values: Vec<NumText>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub(crate) enum MapRepr {
    Sqrt,
    PiecewiseLinear {
        knots: Vec<NumText>,
        slopes: Vec<NumText>,
    },
}

fn parse_all<S: Scalar>(values: &[NumText], location: &str) -> Result<Vec<S>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v.parse(&format!("{location}[{i}]")))
        .collect()
}

fn render_all<S: Scalar>(values: &[S]) -> Vec<NumText> {
    values.iter().map(NumText::of).collect()
}

impl FunctionRepr {
    pub(crate) fn of<S: Scalar>(f: &SubmodularFunction<S>) -> Self {
        match f {
            SubmodularFunction::Modular { weights } => FunctionRepr::Modular {
                weights: render_all(weights),
            },
            SubmodularFunction::Coverage {
                element_weights,
                covers,
            } => FunctionRepr::Coverage {
                element_weights: render_all(element_weights),
                covers: covers.clone(),
            },
            SubmodularFunction::ConcaveOfModular { weights, map } => FunctionRepr::ConcaveModular {
                weights: render_all(weights),
                map: Some(match map {
                    ConcaveMap::Sqrt => MapRepr::Sqrt,
                    ConcaveMap::PiecewiseLinear { knots, slopes } => MapRepr::PiecewiseLinear {
                        knots: render_all(knots),
                        slopes: render_all(slopes),
                    },
                }),
            },
            SubmodularFunction::Table { values, .. } => FunctionRepr::Table {
                values: render_all(values),
            },
        }
    }

    /// Builds the function; tables are verified unless `verify_tables` is false.
    pub(crate) fn build<S: Scalar>(
        &self,
        location: &str,
        verify_tables: bool,
    ) -> Result<SubmodularFunction<S>> {
        let wrap = |e: Error| match e {
            Error::InvalidParameter(m) => Error::parse(location, m),
            other => other,
        };
        match self {
            FunctionRepr::Modular { weights } => {
                SubmodularFunction::modular(parse_all(weights, &format!("{location}.weights"))?)
                    .map_err(wrap)
            }
            FunctionRepr::Coverage {
                element_weights,
                covers,
            } => SubmodularFunction::coverage(
                parse_all(element_weights, &format!("{location}.element_weights"))?,
                covers.clone(),
            )
            .map_err(wrap),
            FunctionRepr::ConcaveModular { weights, map } => {
                let map = match map {
                    None | Some(MapRepr::Sqrt) => ConcaveMap::Sqrt,
                    Some(MapRepr::PiecewiseLinear { knots, slopes }) => {
                        ConcaveMap::PiecewiseLinear {
                            knots: parse_all(knots, &format!("{location}.map.knots"))?,
                            slopes: parse_all(slopes, &format!("{location}.map.slopes"))?,
                        }
                    }
                };
                SubmodularFunction::concave_of_modular(
                    parse_all(weights, &format!("{location}.weights"))?,
                    map,
                )
                .map_err(wrap)
            }
            FunctionRepr::Table { values } => {
                let values = parse_all(values, &format!("{location}.values"))?;
                if verify_tables {
                    SubmodularFunction::table(values).map_err(wrap)
                } else {
                    SubmodularFunction::table_unverified(values).map_err(wrap)
                }
            }
        }
    }
}

impl<S: Scalar> SubmodularFunction<S> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FunctionRepr::of(self)).expect("function repr serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let repr: FunctionRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::parse("function", e.to_string()))?;
        repr.build("function", true)
    }
}
