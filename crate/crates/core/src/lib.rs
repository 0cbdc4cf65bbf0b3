//! Self-organizing maps with spiking, recurrent and leaky-integrator
//! variants for speech-sequence classification, plus the MFCC front-end,
//! TIMIT-layout corpus reader and evaluation harness around them.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod lin;
pub mod mfcc;
pub mod model;
pub mod rssom;
pub mod som;
pub mod ssom;
pub mod stdp;

pub use codec::{decode_latency, encode_latency, EncodedInput, FeatureRanges};
pub use corpus::{SequenceSample, SynthSpec};
pub use error::{Error, Result};
pub use eval::{ClassMap, EvalOptions, EvalReport, UnitLabelMap};
pub use lin::LinParams;
pub use mfcc::{AudioBuffer, MfccConfig};
pub use model::{train_model, Model, ModelKind, TrainSettings, WinnerModel};
pub use som::{find_bmu, Lattice, Schedule, TrainingLog, UnitIndex};
pub use ssom::{LateralGains, SpikingParams, SsomConfig};
pub use stdp::{StdpRule, StdpVariant, StdpWindow};
