//! Numerical toolkit for the Hessian geometry of G2 moduli.
//!
//! The crate is layered bottom-up:
//!
//! * [`exterior7`]: exact exterior algebra on an oriented 7-space.
//! * [`g2_point`]: positivity, induced metric, dual 4-form and type splitting.
//! * [`torus_moduli`]: the flat 7-torus testbed, the potential −3 log Vol and
//!   its first and second derivatives.
//! * [`path_geometry`]: energies and lengths of paths, the boundary-term
//!   energy formula and calibration bounds on 4-cycles.
//! * [`kummer_cert`]: finite energy/length certificates for gluing families.
//! * [`kahler_cone`]: the Kähler-cone analogue driven by an intersection form.
//! * [`cli_io`]: scenario files and report emission for the command line.

pub mod cli_io;
pub mod error;
pub mod exterior7;
pub mod g2_point;
pub mod kahler_cone;
pub mod kummer_cert;
pub mod path_geometry;
pub mod quadrature;
pub mod torus_moduli;

pub use error::{Error, Result};
pub use exterior7::{Form, Metric7, Vector7};
pub use g2_point::G2PointData;
