//! Library side of the `nosig` binary: scenario files, commands and output.

pub mod commands;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub use commands::{run, Command, CommandError, RunOptions};
pub use report::{Outcome, Table};
pub use scenario::{parse_scenario, serialize_scenario, ParseError, ScenarioFile};

/// Environment variable naming the directory for default CSV paths.
pub const OUT_DIR_VAR: &str = "NOSIG_OUT_DIR";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `--out` if given, else `<command>.csv` in `$NOSIG_OUT_DIR` or the
/// working directory.
pub fn csv_path(cmd: Command, explicit: Option<&Path>, out_dir: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => out_dir
            .unwrap_or(Path::new("."))
            .join(format!("{}.csv", cmd.name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn default_paths_follow_the_command() {
        assert_eq!(
            csv_path(Command::Ntrap, None, None),
            Path::new("./ntrap.csv")
        );
        assert_eq!(
            csv_path(Command::ComExample, None, Some(Path::new("/tmp/o"))),
            Path::new("/tmp/o/com-example.csv")
        );
        assert_eq!(
            csv_path(
                Command::Ntrap,
                Some(Path::new("x.csv")),
                Some(Path::new("/tmp"))
            ),
            Path::new("x.csv")
        );
    }
}
