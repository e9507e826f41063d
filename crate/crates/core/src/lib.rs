//! Mod-2 Hecke eigenpackets and the Galois representations apparently attached to them.

pub(crate) mod arith;
pub mod characters;
pub mod cli;
pub mod finder;
pub mod gf2k;
pub mod heckepoly;
pub mod matf2k;
pub mod newforms;
pub mod numberfield;
pub mod sharbly;
