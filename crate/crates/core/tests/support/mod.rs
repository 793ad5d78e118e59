#![allow(dead_code)]

pub mod dense;
pub mod random;
