//! Evaluation harness for individualized-reasoning tasks built on six-player
//! Avalon sessions.
//!
//! The crate is organised around the data flow of a full evaluation run:
//!
//! - [`game`] — deterministic six-player Avalon rules engine;
//! - [`session`] — the annotated session model, its JSON schema, mention
//!   masking, and transcript rendering;
//! - [`sim`] — scripted-persona simulator that generates annotated corpora;
//! - [`protocol`] — two-stage protocol: strategy-profile construction and the
//!   four task builders, plus the task runner;
//! - [`parse`] — strict parsers for the three model response grammars;
//! - [`backend`] — chat-completion backends (HTTP plus deterministic mocks);
//! - [`baseline`] — embedding-similarity ranking baseline;
//! - [`score`] — scoring schemes and aggregate metrics;
//! - [`report`] — CSV/JSON/markdown report emission;
//! - [`pipeline`] — run-directory layout, manifests, and the command-level
//!   entry points used by the CLI.

pub mod backend;
pub mod baseline;
pub mod game;
pub mod parse;
pub mod pipeline;
pub mod protocol;
pub mod report;
pub mod score;
pub mod session;
pub mod sim;

pub use game::{GameOutcome, GameState, PlayerId, Role, RoleAssignment};
pub use session::Session;
