use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Solver(#[from] mfrf_core::Error),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("writing {}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    /// 2 configuration, 3 infeasible scenario, 4 numerical failure, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        use mfrf_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Solver(e) => match e {
                E::Domain(_) | E::Usage(_) | E::TooLarge(_) => 2,
                E::InfeasibleEnergy { .. } | E::MatchingInfeasible { .. } => 3,
                E::IllConditioned { .. } | E::Numerical(_) | E::DegenerateSecular => 4,
            },
            Self::Io { .. } | Self::Csv { .. } => 1,
        }
    }

    /// Extra advice printed after the error message.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            Self::Solver(mfrf_core::Error::InfeasibleEnergy { .. }) => {
                Some("raise scenario.e_t or lower the desired-signal energies")
            }
            Self::Solver(mfrf_core::Error::MatchingInfeasible { .. }) => {
                Some("the matching tolerances are too tight for the PAPR constraint; raise solver.eps")
            }
            Self::Solver(mfrf_core::Error::IllConditioned { .. }) => {
                Some("two constrained directions have (nearly) identical steering vectors")
            }
            _ => None,
        }
    }
}
