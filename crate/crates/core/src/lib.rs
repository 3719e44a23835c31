//! Conversational product search that narrows ambiguous shopping demands
//! with multi-choice clarification questions, plus a simulated-user
//! benchmark for measuring per-turn retrieval quality.

pub mod catalog;
pub mod agent;
pub mod llm_bridge;
pub mod retrieval;
pub mod simbench;
