//! Word problem decision engine for finitely generated just infinite groups
//! given by recursively enumerable presentations.

pub mod certcheck;
pub mod certificate;
pub mod cli;
pub mod derivation;
pub mod freegroup;
pub mod oracle;
pub mod presentation;
pub mod quotient;
pub mod scheduler;
pub mod tables;
