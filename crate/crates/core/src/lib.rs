pub mod geometry;
pub mod human;
pub mod robot;
pub mod trajectory;
pub mod verification;
pub mod baselines;
