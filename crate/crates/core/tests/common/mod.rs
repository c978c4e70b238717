#![allow(dead_code)]

pub mod criteria;
pub mod gen;
pub mod oracle;
pub mod service;
