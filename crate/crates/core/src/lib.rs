//! LDPC-coded two-dimensional interference channels: channel model, iterative
//! 2D detection, sum-product decoding, joint iterative detection/decoding and
//! density evolution.

pub mod channel;
pub mod code;
pub mod config;
pub mod de;
pub mod decoder;
pub mod detector;
pub mod jidds;
pub mod neighborhood;
pub mod report;
pub mod seed;
