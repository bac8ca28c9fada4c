//! Resource estimation and simulation for modular trapped-ion quantum
//! computers linked by heralded photonic entanglement.

pub mod arch;
pub mod device;
pub mod cluster;
pub mod error;
pub mod hypercell;
pub mod netsim;
pub mod rng;
pub mod steane;

pub use arch::{ArchLayout, LayoutKind, LinkSchedule, MusiqcLayout, NnLayout, QlaLayout};
pub use device::{DeviceParams, EluPhysics, LinkKind, LinkModel};
pub use error::{Error, Result};
pub use steane::{LogicalCostTable, LogicalOptions, PrimitiveKind, Repetitions};
