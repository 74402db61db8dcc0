//! Abstraction logic toolkit: bounded trace semantics, resource algebras,
//! specifications, abstraction modules and a small imperative language.

pub mod abspec;
pub mod behavior;
pub mod cli;
pub mod examples;
pub mod imp;
pub mod kernel;
pub mod pcm;
pub mod simulation;
pub mod speclang;
pub mod values;
