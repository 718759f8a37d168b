pub mod baseval;
pub mod cli;
pub mod coeffield;
pub mod engine;
pub mod keychain;
pub mod ordgroup;
pub mod polygon;
pub mod report;
