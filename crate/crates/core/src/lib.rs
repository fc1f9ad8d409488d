pub mod ast;
pub mod backend;
pub mod bench;
pub mod cli;
pub mod dialect;
pub mod frame;
pub mod wisconsin;
