//! Link-level simulation and union-bound analysis of receive generalized
//! spatial modulation through a reconfigurable intelligent surface.
//!
//! The surface of `N` elements is split into `N_a` groups. Each channel use
//! selects `N_a` of the `N_R` receive antennas from a combination table; group
//! `l` co-phases its elements towards antenna `c_l` and, for the multiplexing
//! schemes, adds a PSK or APSK symbol as a common phase and active-element
//! count. The receiver runs joint ML detection over the codebook.

pub mod channel;
pub mod config;
pub mod curve;
pub mod detector;
pub mod encoder;
pub mod mapping;
pub mod rng;
pub mod sim;
pub mod sweep;
pub mod theory;

pub use channel::{sample_channel, ChannelMatrix, GroupLayout};
pub use config::{ConfigError, DetectorModel, Scheme, SystemConfig, SystemParams};
pub use curve::{BerCurve, BerPoint};
pub use detector::{EquivalentChannel, MlDetector};
pub use encoder::{encode, ReflectionVector};
pub use mapping::{Bits, Codebook, Codeword, CombinationTable};
pub use sim::{run_simulation, SimOptions};
pub use sweep::{compare, run_theory, SweepManifest};
