pub mod assembly;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linsolve;
pub mod norms;
pub mod oracle;
pub mod pml;
pub mod quadrature;
pub mod specialfun;
