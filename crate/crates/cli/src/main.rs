mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::{run, CliError};

/// Parses argv into a command. Help and version requests print and exit 0;
/// anything clap rejects exits 2.
fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "usage error",
                CliError::Failed(_) => "error",
            };
            eprintln!("{kind}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use args::{Algo, Command};

    #[test]
    fn crossval_flags_map_directly() {
        let cli = parse_args(["advisory-miner", "crossval", "--data", "c.csv", "--algo", "c45", "--folds", "10", "--seed", "7"]).unwrap();
        let Command::Crossval(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!((a.algo, a.folds, a.seed), (vec![Algo::C45], 10, 7));
        assert_eq!(a.input.data, "c.csv");
    }

    #[test]
    fn unknown_algorithm_lists_valid_ones() {
        let err = parse_args(["advisory-miner", "train", "--data", "c.csv", "--algo", "svm"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("c45") && msg.contains("nb") && msg.contains("knn"), "{msg}");
    }

    #[test]
    fn folds_below_two_rejected() {
        let err = parse_args(["advisory-miner", "crossval", "--data", "c.csv", "--folds", "1", "--seed", "1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_flag_rejected() {
        assert!(parse_args(["advisory-miner", "rules", "--data", "c.csv", "--bogus"]).is_err());
    }
}
