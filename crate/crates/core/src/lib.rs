pub mod combine;
pub mod controls;
pub mod diagnostic;
pub mod expr;
pub mod mini;
pub mod osc;
pub mod pattern;
pub mod rhythm;
pub mod scheduler;
pub mod time;
