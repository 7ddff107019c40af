//! Holds the `acceptance` test target, which checks the simulator against
//! reference sweep results and prints one line per criterion. Run it with
//! `cargo test -p arbc-validation --test acceptance`.
