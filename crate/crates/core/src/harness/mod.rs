//! Config-driven study harness: runs a study, writes its artifacts and
//! verdicts, and maps the outcome to a process exit code.

pub mod config;
pub mod fit;
pub mod output;
pub mod study;

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};

pub use config::{RunConfig, StudyKind};
pub use fit::{fit_order, Fit};
pub use output::OutputDir;
pub use study::{Status, StudyTable, Verdict};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub table: StudyTable,
    pub out_dir: PathBuf,
    /// extra JSON for stdout
    pub stdout: Option<serde_json::Value>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.table.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    study: StudyKind,
    passed: bool,
    verdicts: &'a [Verdict],
}

/// Run `kind` with `cfg`. Artifacts go to `out` if given, else to
/// `cfg.out.dir`.
pub fn run(cfg: &RunConfig, kind: StudyKind, out: Option<PathBuf>) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    cfg.study.kind = Some(kind);
    cfg.validate()?;
    let dir = OutputDir::create(out.unwrap_or_else(|| cfg.out.dir.clone()))?;
    std::fs::write(dir.path().join("config.toml"), cfg.to_toml())?;
    let (table, extras) = match kind {
        StudyKind::Simulate => (study::simulate(&cfg, &dir)?, Default::default()),
        StudyKind::RelaxStudy => (study::relax_study(&cfg, &dir)?, Default::default()),
        StudyKind::EpsStudy => (study::eps_study(&cfg, &dir)?, Default::default()),
        StudyKind::MmsVerify => (study::mms_verify(&cfg, &dir)?, Default::default()),
        StudyKind::BcAnalyze => study::bc_analyze(&cfg, &dir)?,
        StudyKind::EntropyReport => (study::entropy_study(&cfg, &dir)?, Default::default()),
    };
    let extras: study::Extras = extras;
    dir.write_csv("table.csv", &table.rows)?;
    dir.write_json("fits.json", &table.fits)?;
    dir.write_json(
        "verdicts.json",
        &VerdictFile { study: kind, passed: table.passed(), verdicts: &table.verdicts },
    )?;
    std::fs::write(dir.path().join("summary.txt"), table.summary_text())?;
    Ok(Outcome { table, out_dir: dir.path().to_path_buf(), stdout: extras.stdout })
}
