pub mod algebra;
pub mod exterior;
pub mod group;
pub mod linalg;
pub mod opcalc;
pub mod poly;
pub mod rumin;
pub mod scalar;
pub mod numerics;
