#![allow(dead_code)]

use std::path::PathBuf;

use mfpencil::io::{load_pencil, LoadedPencil};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> LoadedPencil {
    load_pencil(&fixture(name), None).expect("fixture loads")
}

pub mod oracles;
pub mod generated;
