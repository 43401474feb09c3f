pub mod domains;
pub mod gbt;
pub mod harness;
pub mod landmarks;
pub mod planner;
pub mod recognizer;
pub mod seq;
pub mod strips;

#[cfg(test)]
pub(crate) mod testutil;
