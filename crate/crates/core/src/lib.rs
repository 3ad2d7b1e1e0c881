pub mod action;
pub mod catalog;
pub mod error;
pub mod genfun;
pub mod geometry;
pub mod prospector;
pub mod rotation;
pub mod solve;
pub mod winding;
