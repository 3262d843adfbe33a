//! One module per subcommand. Each takes its validated config plus the
//! effective-config hash, writes outputs, and reports how many solves ran
//! and how many ended without a convergence certificate.

pub mod bounds;
pub mod lower;
pub mod phase;
pub mod recover;

/// Solve tally for the process-level convergence gate.
pub struct Outcome {
    pub solves: usize,
    pub nonconverged: usize,
}

impl Outcome {
    pub fn none() -> Outcome {
        Outcome {
            solves: 0,
            nonconverged: 0,
        }
    }
}
