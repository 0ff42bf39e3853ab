//! Independent numerical machinery used to check the closed forms: special
//! functions, quadrature, RK4, 1-D maximization and the discrete transform.
//!
//! Nothing in this module evaluates a protocol formula.

pub mod area_ode;
pub mod ode;
pub mod optimize;
pub mod quadrature;
pub mod special;
pub mod transform;

pub use ode::{integrate_area_ode, AreaProfile};
pub use optimize::{maximize_1d, Maximum};
pub use quadrature::{adaptive_simpson, QuadratureResult};
pub use special::{dawson, erfi, scaled_erfi};
pub use transform::{dft_roundtrip, Grid, TransformConvention};
