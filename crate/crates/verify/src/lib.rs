//! End-to-end acceptance checks for the rv14 verifier. The checks live in
//! `tests/acceptance.rs` and print one line per criterion.
