//! Small systems used by tests, the command-line tool and the browser demo.

use crate::model::{text, Smpds};

pub const EXAMPLE_ONE: &str = include_str!("../fixtures/example1.smpds");

/// The four-state system whose run switches from `th0` to `th1` after
/// three steps.
pub fn example_one() -> Smpds {
    text::parse(EXAMPLE_ONE).expect("bundled fixture parses")
}
