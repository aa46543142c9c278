//! IO, file formats, and the command-line front end for the counting and
//! circle-method kernels.

pub mod cli;
pub mod formats;
pub mod manifest;
pub mod run;
