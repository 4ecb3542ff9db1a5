pub mod eval;
pub mod lpt;
pub mod output;
pub mod parser;
pub mod pattern;
pub mod relation;
pub mod rules;
pub mod transform;
pub mod tree;
