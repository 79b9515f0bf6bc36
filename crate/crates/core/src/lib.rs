pub mod accel;
pub mod bench;
pub mod krylov;
pub mod linalg;
pub mod problems;
pub mod rng;
