//! End-to-end acceptance checks for `sparsereg`. The checks live in
//! `tests/acceptance.rs`; this package keeps them apart so they run after the
//! library's own suites.
