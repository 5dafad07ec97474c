//! Holds the `acceptance` test target; run it with `cargo test -p pelab-verify --test acceptance`.
