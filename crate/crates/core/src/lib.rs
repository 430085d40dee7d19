//! Fuzzy reward and punishment for RSU-arbitrated trust in vehicular
//! networks, with a discrete-event simulator to exercise it.

pub mod behaviour;
pub mod dispute;
pub mod fuzzy;
pub mod presets;
pub mod report;
pub mod sim;
pub mod trust;

pub use behaviour::{BehaviourProfile, BehaviourState, StateRanges};
pub use dispute::{AssessmentMode, DisputePolicy, Party, SeverityTable, Verdict};
pub use fuzzy::{AssessmentKind, Assessor, FuzzyConfig, FuzzyEngine, FuzzyError, LookupGrid, LookupTable};
pub use presets::{preset, ScenarioPreset, PRESET_NAMES};
pub use report::{DriverSummary, SummaryReport};
pub use sim::{run, SimConfig, SimError, Trace};
pub use trust::TrustScore;
