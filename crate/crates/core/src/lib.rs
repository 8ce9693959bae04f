//! Analysis of global asymptotic synchronization for identical nonlinear
//! circuits coupled through passive LTI electrical networks.
//!
//! The pipeline: parse a netlist, assemble its admittance matrix, Kron-reduce
//! away the interior nodes, classify the network (uniform lines, homogeneous,
//! with or without shunts), evaluate the small-gain H-infinity certificate
//! over the reduced Laplacian spectrum, and validate with time-domain
//! simulation of coupled Chua's circuits.
//!
//! Modules:
//! - [`numerics`]: polynomials, rational functions, complex dense linear algebra
//! - [`network`]: netlist model, JSON schema, admittance assembly
//! - [`reduction`]: Kron reduction, effective impedances, classification
//! - [`oscillator`]: the nonlinear circuit model and Chua preset
//! - [`certificate`]: loop gains, H-infinity sweep, certificates, ξ surface
//! - [`simulator`]: coupling realization and RK4/RK45 integration
//! - [`presets`]: stock benchmark fixtures

pub mod certificate;
pub mod network;
pub mod numerics;
pub mod oscillator;
pub mod presets;
pub mod reduction;
pub mod simulator;

pub use certificate::{certify, hinf_scalar, lft_scalar, xi_surface, GainReport, SweepConfig, Verdict};
pub use network::{assemble_admittance, parse_netlist, Netlist, SymbolicAdmittance};
pub use numerics::{ComplexMatrix, Polynomial, RationalFunction, Tolerances};
pub use oscillator::{chua_default, chua_preset, OscillatorModel};
pub use reduction::{classify, default_probes, kron_reduce, NetworkClass, NetworkKind};
pub use simulator::{integrate, realize_coupling, CoupledSystem, Method, SimOptions, Trajectory};
