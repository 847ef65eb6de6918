//! Finite-dimensional simulation of a superposed source, a mediating field
//! and a distant probe, with numerical checks that operations on the
//! field and probe never change the source's reduced state.

pub mod channels;
pub mod gedanken;
pub mod nosignal;
pub mod packets;
pub mod qcore;
