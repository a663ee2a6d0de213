pub mod abstraction;
pub mod bdd;
pub mod games;
pub mod interface;
pub mod interval;
pub mod laws;
pub mod spaces;
