//! poisonscan — offline feasibility auditing for poisoning attacks on
//! web-scale training datasets.
//!
//! Two attack families are quantified. *Split-view* poisoning exploits the
//! gap between a dataset's published index (URL + content hash) and what
//! those URLs serve later: expired domains can be bought and re-pointed at
//! attacker content. *Snapshot frontrunning* exploits predictable capture
//! schedules of periodic dumps (wiki-style sites): malicious edits timed
//! just before an article's capture are baked into the snapshot even if
//! moderators revert them soon after.
//!
//! Everything here operates offline on dataset indices, edit logs, snapshot
//! metadata, and web-server access logs. A discrete-event simulator
//! ([`sim`]) provides ground truth for validating the analytic estimates.

pub mod error;

pub mod attack;
pub mod defense;
pub mod domains;
pub mod index;
pub mod reversion;
pub mod sim;
pub mod timing;
pub mod traffic;

pub use error::{Error, Result};
