//! Flat metrics with prescribed cone singularities.
//!
//! Every numerical type is generic over [`scalar::Scalar`]; the aliases
//! below fix it to `f64`.

pub mod abelian;
pub mod curvature;
pub mod cutoff;
pub mod dd;
pub mod develop;
pub mod flatten;
pub mod laplacian;
pub mod mesh;
pub mod motion;
pub mod normal_form;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod sparse;

pub use dd::DoubleDouble;
pub use scalar::{Cplx, Scalar};

pub type Complex64 = Cplx<f64>;
pub type Mesh = mesh::TriangleMesh<f64>;
pub type Prescription = flatten::ConePrescription<f64>;
pub type Factor = flatten::ConformalFactor<f64>;
pub type Series = series::PowerSeries<f64>;
pub type NormalForm = normal_form::NormalForm<f64>;
pub type Cutoff = cutoff::CutoffProfile<f64>;
pub type Poly = poly::Polynomial<f64>;
pub type Form = abelian::MeromorphicForm<f64>;
pub type Analysis = abelian::FormAnalysis<f64>;
pub type Layout = develop::DevelopedLayout<f64>;
pub type Motion = motion::RigidMotion<f64>;
