use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::human::BodyKind;
use crate::robot::GeometryClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactType {
    Clamp,
    Free,
}

impl ContactType {
    pub fn name(self) -> &'static str {
        match self {
            Self::Clamp => "clamp",
            Self::Free => "free",
        }
    }
}

/// Rows of admissible energies (J) in blunt, wedge, edge, sheet order.
const CLAMP_ROWS: [(BodyKind, [f64; 4]); 5] = [
    (BodyKind::Hand, [0.49, 0.05, 0.02, 0.11]),
    (BodyKind::LowerArm, [1.3, 0.05, 0.02, 0.11]),
    (BodyKind::UpperArm, [1.5, 0.05, 0.02, 0.11]),
    (BodyKind::Torso, [1.6, 0.05, 0.02, 0.11]),
    (BodyKind::Head, [0.11, 0.05, 0.02, 0.11]),
];

const FREE_ROWS: [(BodyKind, [f64; 4]); 5] = [
    (BodyKind::Hand, [0.49, 2.0, 0.375, 0.9]),
    (BodyKind::LowerArm, [1.3, 2.0, 0.375, 0.9]),
    (BodyKind::UpperArm, [1.5, 0.5, 0.2, 0.5]),
    (BodyKind::Torso, [1.6, 0.5, 0.2, 0.5]),
    (BodyKind::Head, [0.11, 0.11, 0.11, 0.11]),
];

/// Admissible contact energy per body kind, link geometry and contact type.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactEnergyTable {
    entries: BTreeMap<(BodyKind, GeometryClass, ContactType), f64>,
}

impl Default for ContactEnergyTable {
    /// The published table; parts of unlisted kind get the column minimum.
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for (ct, rows) in [(ContactType::Clamp, &CLAMP_ROWS), (ContactType::Free, &FREE_ROWS)] {
            for (col, geom) in GeometryClass::ALL.into_iter().enumerate() {
                let mut lowest = f64::INFINITY;
                for (kind, values) in rows {
                    entries.insert((*kind, geom, ct), values[col]);
                    lowest = lowest.min(values[col]);
                }
                entries.insert((BodyKind::Other, geom, ct), lowest);
            }
        }
        Self { entries }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideEntry {
    kind: BodyKind,
    geometry: GeometryClass,
    clamp: Option<f64>,
    free: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideFile {
    #[serde(default)]
    entry: Vec<OverrideEntry>,
}

impl ContactEnergyTable {
    /// Table with no entries; every lookup fails until entries are set.
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn set(&mut self, kind: BodyKind, geometry: GeometryClass, contact: ContactType, energy: f64) -> Result<(), VerifyError> {
        if !(energy.is_finite() && energy >= 0.0) {
            return Err(VerifyError::Config(format!(
                "threshold for {}/{}/{} must be a non-negative number",
                kind.name(),
                geometry.name(),
                contact.name()
            )));
        }
        self.entries.insert((kind, geometry, contact), energy);
        Ok(())
    }

    pub fn get(&self, kind: BodyKind, geometry: GeometryClass, contact: ContactType) -> Result<f64, VerifyError> {
        self.entries.get(&(kind, geometry, contact)).copied().ok_or(VerifyError::MissingThreshold {
            kind: kind.name(),
            geometry: geometry.name(),
            contact: contact.name(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Default table with the entries of a TOML override applied:
    ///
    /// ```toml
    /// [[entry]]
    /// kind = "hand"
    /// geometry = "edge"
    /// clamp = 0.02
    /// free = 0.375
    /// ```
    pub fn from_override_str(text: &str) -> Result<Self, VerifyError> {
        let file: OverrideFile = toml::from_str(text).map_err(|e| VerifyError::Config(e.to_string()))?;
        let mut table = Self::default();
        for e in file.entry {
            if let Some(v) = e.clamp {
                table.set(e.kind, e.geometry, ContactType::Clamp, v)?;
            }
            if let Some(v) = e.free {
                table.set(e.kind, e.geometry, ContactType::Free, v)?;
            }
        }
        Ok(table)
    }

    pub fn from_override_file(path: impl AsRef<Path>) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| VerifyError::Config(e.to_string()))?;
        Self::from_override_str(&text)
    }
}

/// Peak transient force (N) a contact of the given energy (J) produces on a
/// body region of the given stiffness (N/m).
pub fn force_from_energy(stiffness: f64, energy: f64) -> Result<f64, VerifyError> {
    if !(stiffness > 0.0 && stiffness.is_finite()) {
        return Err(VerifyError::Config(format!("stiffness must be positive, got {stiffness}")));
    }
    if !(energy >= 0.0) {
        return Err(VerifyError::Config(format!("energy must be non-negative, got {energy}")));
    }
    Ok((2.0 * stiffness * energy).sqrt())
}
