//! Acceptance checks for the workspace; see `tests/acceptance.rs`.
