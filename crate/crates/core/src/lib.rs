//! Level curves of a surface near a point of its tangent plane, their
//! vertices and inflexions, and the symmetry sets they carry.

pub mod error;
pub mod family;
pub mod features;
pub mod field;
pub mod io;
pub mod levelcurve;
pub mod loci;
pub mod poly;
pub mod surface;
pub mod svg;
pub mod symmetry;

pub use error::{Error, Result};
pub use field::{ScalarField, Vec2};
pub use poly::Poly2;
pub use surface::{classify_origin, normalize_umbilic, MongeSurface, PointClass};
