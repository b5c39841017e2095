//! Acceptance checks for `reinfect`. The checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p reinfect-validation --test acceptance`.
