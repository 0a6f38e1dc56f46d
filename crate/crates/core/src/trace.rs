//! Trace records shared by the simulator and the analysis stage.

use serde::{Deserialize, Serialize};

/// One sensing report. `r == None` is a NO DETECTION report; a lost report
/// is simply absent from the trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    #[serde(rename = "sensor")]
    pub sensor_id: u32,
    pub t: f64,
    pub r: Option<f64>,
}

/// What bounds a linear piece of `r(t)` on either side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Event {
    /// Continuous joint with a neighbouring piece of different slope.
    SlopeChange,
    /// `r` drops discontinuously: a nearer edge starts occluding.
    JumpDown,
    /// `r` rises discontinuously: an occluding edge ends.
    JumpUp,
    /// Neighbouring report is NO DETECTION and the reading here is in range.
    FromEmptyBelowMax,
    ToEmptyBelowMax,
    /// The piece enters or leaves through the maximum sensing range.
    RangeBoundary,
    /// The neighbouring reading is 0: the sensor is inside the target.
    ZeroContact,
    /// Start or end of the available reports (including lost reports).
    TraceEdge,
}

impl Event {
    pub fn qualifies_start(self) -> bool {
        matches!(self, Event::SlopeChange | Event::JumpDown | Event::FromEmptyBelowMax)
    }

    pub fn qualifies_end(self) -> bool {
        matches!(self, Event::SlopeChange | Event::JumpUp | Event::ToEmptyBelowMax)
    }
}

/// Group a flat sample list by sensor id, keeping per-sensor order.
pub fn split_by_sensor(samples: &[TraceSample]) -> Vec<(u32, Vec<TraceSample>)> {
    let mut map: std::collections::BTreeMap<u32, Vec<TraceSample>> = Default::default();
    for s in samples {
        map.entry(s.sensor_id).or_default().push(*s);
    }
    map.into_iter().collect()
}

/// Parameters the estimator is allowed to know. There are deliberately no
/// fields for headings, line offsets or positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownParams {
    pub r_max: f64,
    /// Perimeter of the monitored convex region.
    pub omega_perimeter: f64,
    pub report_period: f64,
    pub sensors: Vec<KnownSensor>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownSensor {
    pub id: u32,
    /// Sensing direction relative to the direction of motion.
    pub theta: f64,
    /// Speed.
    pub v: f64,
}

impl KnownParams {
    pub fn sensor(&self, id: u32) -> Option<&KnownSensor> {
        // ids are dense and sorted when produced by the simulator
        match self.sensors.get(id as usize) {
            Some(s) if s.id == id => Some(s),
            _ => self.sensors.iter().find(|s| s.id == id),
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.sensors.iter().map(|s| s.theta).collect()
    }
}
