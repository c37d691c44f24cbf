use std::path::Path;

use nalgebra::Vector3;
use serde::Deserialize;

use super::VerifyError;
use crate::geometry::Polytope;

/// Static obstacle a body part can be clamped against.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentElement {
    pub name: String,
    pub polytope: Polytope,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Environment {
    pub elements: Vec<EnvironmentElement>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    name: String,
    #[serde(rename = "box")]
    aabb: Option<BoxDoc>,
    /// Rows `[nx, ny, nz, d]` of `n·p ≤ d`; normals are normalized on load.
    halfspaces: Option<Vec<[f64; 4]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentDoc {
    #[serde(default)]
    element: Vec<ElementDoc>,
}

impl Environment {
    pub fn new(elements: Vec<EnvironmentElement>) -> Self {
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn push_box(&mut self, name: &str, min: [f64; 3], max: [f64; 3]) -> Result<(), VerifyError> {
        let polytope = Polytope::aabb(min, max).map_err(|e| VerifyError::Config(format!("element {name}: {e}")))?;
        self.elements.push(EnvironmentElement { name: name.to_owned(), polytope });
        Ok(())
    }

    /// Parses a TOML environment:
    ///
    /// ```toml
    /// [[element]]
    /// name = "table"
    /// box = { min = [0.3, -0.5, -0.05], max = [1.1, 0.5, 0.0] }
    ///
    /// [[element]]
    /// name = "wall"
    /// halfspaces = [[-1.0, 0.0, 0.0, -1.4]]
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self, VerifyError> {
        let doc: EnvironmentDoc = toml::from_str(text).map_err(|e| VerifyError::Config(e.to_string()))?;
        let mut env = Self::default();
        for el in doc.element {
            match (el.aabb, el.halfspaces) {
                (Some(b), None) => env.push_box(&el.name, b.min, b.max)?,
                (None, Some(rows)) => {
                    let mut normals = Vec::with_capacity(rows.len());
                    let mut offsets = Vec::with_capacity(rows.len());
                    for [x, y, z, d] in rows {
                        let n = Vector3::new(x, y, z);
                        let norm = n.norm();
                        if !(norm > 0.0 && norm.is_finite()) {
                            return Err(VerifyError::Config(format!("element {}: zero or non-finite normal", el.name)));
                        }
                        normals.push(n / norm);
                        offsets.push(d / norm);
                    }
                    let polytope =
                        Polytope::new(normals, offsets).map_err(|e| VerifyError::Config(format!("element {}: {e}", el.name)))?;
                    env.elements.push(EnvironmentElement { name: el.name, polytope });
                }
                _ => {
                    return Err(VerifyError::Config(format!(
                        "element {} needs exactly one of `box` or `halfspaces`",
                        el.name
                    )))
                }
            }
        }
        Ok(env)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, VerifyError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| VerifyError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}
