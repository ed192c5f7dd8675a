//! Command-line front end: instance files, subcommands and contour export.

pub mod commands;
pub mod contour;
pub mod instance;
