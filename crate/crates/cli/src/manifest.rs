//! Run manifest, written atomically into every run directory.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    CheckFailed,
    ConfigError,
    Aborted,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Passed => 0,
            Status::CheckFailed => 1,
            Status::ConfigError => 2,
            Status::Aborted => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Advisory checks are reported but do not change the exit status.
    pub gating: bool,
    pub detail: String,
}

impl Check {
    pub fn gating(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            gating: true,
            detail,
        }
    }

    pub fn advisory(name: &str, passed: bool, detail: String) -> Self {
        Self {
            gating: false,
            ..Self::gating(name, passed, detail)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub domain: &'static str,
    pub layout: &'static str,
    pub transform: &'static str,
    pub wavenumbers: &'static str,
    pub sobolev: &'static str,
    pub dealiasing: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    domain: "periodic T x [-L, L); x1_i = 2 pi i / n1, x2_j = -L + 2 L j / n2",
    layout: "row-major, x1 fastest",
    transform: "unitary: c = sqrt(4 pi L) / (n1 n2) * DFT * (-1)^m, so sum |c|^2 = integral of f^2",
    wavenumbers: "n integer, xi = pi m / L; Nyquist modes zeroed in derivatives and velocity",
    sobolev: "||f||_{H^k}^2 = ||f||_{L2}^2 + sum (|n|^{2k} + |xi|^{2k}) |c|^2; at k = 0 the homogeneous part is the L2 norm, so ||f||_{H^0} = sqrt(2) ||f||_{L2}",
    dealiasing: "2/3 rule: keep 3|n| <= n1 and 3|m| <= n2",
};

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub status: Status,
    pub exit_code: u8,
    pub command: &'static str,
    pub code_version: &'static str,
    pub seed: u64,
    pub config: serde_json::Value,
    pub conventions: Conventions,
    pub wall_time_seconds: f64,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    pub results: serde_json::Value,
    pub message: Option<String>,
}

/// Writes `manifest.json` via a temporary file and a rename.
pub fn write_atomic(dir: &Path, manifest: &Manifest) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{MANIFEST_NAME}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        serde_json::to_writer_pretty(&mut f, manifest)?;
        f.write_all(b"\n")?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(MANIFEST_NAME))
}
