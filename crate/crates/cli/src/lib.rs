//! Command-line and HTTP front ends for `dgonlab`.

pub mod commands;
pub mod input;
pub mod server;
pub mod views;
