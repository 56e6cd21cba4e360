pub mod driver;
pub mod error;
pub mod par;
pub mod phase1;
pub mod phase2;
pub mod problems;
pub mod subproblems;
