//! WiFi-CSI people counting and localization toolkit.
//!
//! The crate is organized around the measurement-to-report pipeline:
//!
//! * [`sim`] synthesizes labeled channel state information packets from a
//!   parametric multipath scene and corrupts them with interference,
//!   transceiver offsets, and noise.
//! * [`preprocess`] removes the per-packet amplitude and phase offsets
//!   without any cross-packet filtering, producing the three real matrices
//!   (amplitude, real part, imaginary part) consumed by the models.
//! * [`nn`] is a small convolutional/dense network with exact analytic
//!   gradients, a softmax classification head and a linear regression head.
//! * [`train`] holds the training engines: first-order MAML meta-training,
//!   plain pre-training with Adam, SGD adaptation, and FC-only fine-tuning.
//! * [`exp`] provides dataset splits, metrics, complexity estimates, dataset
//!   and checkpoint persistence, experiment configuration, and the
//!   orchestrator behind the `metacsi` command line tool.

pub mod exp;
pub mod nn;
pub mod preprocess;
pub mod rng;
pub mod sim;
pub mod train;

pub use preprocess::{PreprocessConfig, PreprocessedSample};
pub use sim::{CsiPacket, Label};
