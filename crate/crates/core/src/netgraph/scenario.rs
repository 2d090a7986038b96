//! Scenario files: the immutable world a single geocast runs in.
//!
//! ```json
//! {"radius":1.0,"field":[10.0,10.0],"devices":[[0.5,1.25],...],
//!  "source":0,"region":[2.0,2.0,5.0,5.0],"seed":7}
//! ```
//!
//! Floats are written in shortest round-trip form, so saving and loading is
//! lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DeviceId, GeocastInstance, NetError, Network};
use crate::geometry::{Point, Rect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub radius: f64,
    pub field: [f64; 2],
    pub devices: Vec<Point>,
    pub source: DeviceId,
    pub region: Rect,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Network(#[from] NetError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field,
        message: message.into(),
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        let [w, h] = self.field;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return Err(invalid("field", "width and height must be positive"));
        }
        let field = Rect::new(Point::new(0.0, 0.0), Point::new(w, h)).expect("positive field");
        if let Some(i) = self.devices.iter().position(|p| !field.contains(*p)) {
            return Err(invalid("devices", format!("device {i} lies outside the field")));
        }
        if self.source.index() >= self.devices.len() {
            return Err(invalid(
                "source",
                format!("index {} out of range for {} devices", self.source, self.devices.len()),
            ));
        }
        if !(field.contains(self.region.min) && field.contains(self.region.max)) {
            return Err(invalid("region", "must lie within the field"));
        }
        Ok(())
    }

    pub fn unit_disk(&self) -> Result<Network, NetError> {
        Network::unit_disk(&self.devices, self.radius)
    }

    pub fn instance(&self, net: &Network) -> GeocastInstance {
        GeocastInstance::new(net, self.source, self.region)
    }
}
