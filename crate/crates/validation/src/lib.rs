//! End-to-end acceptance suite for `levarray-core`; everything lives in
//! `tests/acceptance.rs`. Kept as its own package so the long-running suite
//! is the last test binary of a workspace run.
