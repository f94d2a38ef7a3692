//! Staged, resumable pipeline over one output directory.
//!
//! Each stage records a fingerprint (its config section, upstream
//! fingerprints and input checksums) and the checksum of every file it
//! wrote in `manifest.json`. A stage whose fingerprint and outputs still
//! match is skipped; a stage whose upstream no longer matches refuses to
//! run.

mod config;
mod manifest;
pub mod report;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{
    profit_loss_axis, ExportConfig, IngestConfig, Paths, PipelineConfig, ReportConfig,
    ValidateConfig,
};
pub use manifest::{
    is_ignored, list_files, sha256_file, sha256_hex, write_atomic, DirLock, RunManifest,
    StageEntry, IGNORED, LOCK_FILE, MANIFEST_FILE, TIMES_FILE,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Train,
    Atoms,
    Measure,
    Validate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Train,
        Stage::Atoms,
        Stage::Measure,
        Stage::Validate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Train => "train",
            Stage::Atoms => "atoms",
            Stage::Measure => "measure",
            Stage::Validate => "validate",
            Stage::Report => "report",
        }
    }

    /// Every stage this one depends on, directly or not.
    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Train => &[Stage::Ingest],
            Stage::Atoms => &[Stage::Ingest, Stage::Train],
            Stage::Measure => &[Stage::Ingest, Stage::Train, Stage::Atoms],
            Stage::Validate => &[Stage::Ingest, Stage::Train, Stage::Atoms, Stage::Measure],
            Stage::Report => &[
                Stage::Ingest,
                Stage::Train,
                Stage::Atoms,
                Stage::Measure,
                Stage::Validate,
            ],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    UpToDate,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) => 2,
        Error::Stale(_) => 3,
        Error::Config(_) => 4,
        _ => 1,
    }
}

pub struct Pipeline {
    cfg: PipelineConfig,
}

impl Pipeline {
    pub fn new(mut cfg: PipelineConfig, overrides: Overrides) -> Self {
        if overrides.seed.is_some() {
            cfg.seed = overrides.seed;
        }
        if let Some(out) = overrides.out {
            cfg.paths.out = out;
        }
        Pipeline { cfg }
    }

    pub fn open(config_path: &Path, overrides: Overrides) -> Result<Self> {
        Ok(Self::new(PipelineConfig::load(config_path)?, overrides))
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.cfg.paths.out
    }

    /// Hash of every setting except file locations.
    pub fn config_hash(&self) -> Result<String> {
        let mut v = serde_json::to_value(&self.cfg)?;
        v.as_object_mut()
            .expect("config is a table")
            .remove("paths");
        v["seed_effective"] = json!([self.cfg.train_config().seed, self.cfg.atom_config().seed]);
        Ok(sha256_hex(v.to_string().as_bytes()))
    }

    pub fn run(&self, stage: Stage) -> Result<StageStatus> {
        let _lock = self.lock()?;
        let mut fps = BTreeMap::new();
        self.run_locked(stage, &mut fps)
    }

    /// Runs every stage in order, stopping at the first failure.
    pub fn run_all(&self) -> Result<Vec<(Stage, StageStatus)>> {
        let _lock = self.lock()?;
        let mut fps = BTreeMap::new();
        Stage::ALL
            .iter()
            .map(|&s| self.run_locked(s, &mut fps).map(|st| (s, st)))
            .collect()
    }

    fn lock(&self) -> Result<DirLock> {
        let lock = DirLock::acquire(self.out_dir())?;
        let n = manifest::clean_temp_files(self.out_dir())?;
        if n > 0 {
            log::warn!("removed {n} partial file(s) left by an interrupted run");
        }
        Ok(lock)
    }

    fn inputs(&self, stage: Stage) -> Result<BTreeMap<String, String>> {
        let p = &self.cfg.paths;
        let mut out = BTreeMap::new();
        match stage {
            Stage::Ingest => {
                out.insert(
                    "corpus".into(),
                    sha256_file(p.require("corpus", &p.corpus)?)?,
                );
            }
            Stage::Measure => {
                out.insert(
                    "companies".into(),
                    sha256_file(p.require("companies", &p.companies)?)?,
                );
                out.insert("cpi".into(), sha256_file(p.require("cpi", &p.cpi)?)?);
                for (name, path) in [
                    ("general_freq", &p.general_freq),
                    ("patent_freq", &p.patent_freq),
                ] {
                    if path.is_some() {
                        out.insert(name.into(), sha256_file(p.require(name, path)?)?);
                    }
                }
                for (i, t) in p.terms.iter().enumerate() {
                    let t = Some(t.clone());
                    out.insert(format!("terms/{i}"), sha256_file(p.require("terms", &t)?)?);
                }
            }
            _ => {}
        }
        Ok(out)
    }

    fn section(&self, stage: Stage) -> Result<serde_json::Value> {
        let c = &self.cfg;
        Ok(match stage {
            Stage::Ingest => json!({"tokens": c.tokens, "ingest": c.ingest}),
            Stage::Train => json!({"train": c.train_config(), "export": c.export}),
            Stage::Atoms => json!({"atoms": c.atom_config()}),
            Stage::Measure => json!({"measures": c.measures, "tokens": c.tokens}),
            Stage::Validate => serde_json::to_value(&c.validate)?,
            Stage::Report => serde_json::to_value(&c.report)?,
        })
    }

    /// Fingerprint the stage would have if run now, with its inputs.
    fn expected(
        &self,
        stage: Stage,
        fps: &mut BTreeMap<Stage, (String, BTreeMap<String, String>)>,
    ) -> Result<(String, BTreeMap<String, String>)> {
        if let Some(v) = fps.get(&stage) {
            return Ok(v.clone());
        }
        let upstream: Vec<String> = stage
            .upstream()
            .iter()
            .map(|&u| self.expected(u, fps).map(|x| x.0))
            .collect::<Result<_>>()?;
        let inputs = self.inputs(stage)?;
        let doc = json!({
            "stage": stage.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.section(stage)?,
            "upstream": upstream,
            "inputs": inputs,
        });
        let v = (sha256_hex(doc.to_string().as_bytes()), inputs);
        fps.insert(stage, v.clone());
        Ok(v)
    }

    fn run_locked(
        &self,
        stage: Stage,
        fps: &mut BTreeMap<Stage, (String, BTreeMap<String, String>)>,
    ) -> Result<StageStatus> {
        let out = self.out_dir();
        let mut manifest =
            RunManifest::load(out)?.unwrap_or_else(|| RunManifest::new(String::new()));
        manifest.config_hash = self.config_hash()?;

        for &u in stage.upstream() {
            let (fp, _) = self.expected(u, fps)?;
            match manifest.stages.get(u.name()) {
                None => return Err(Error::Stale(format!("`{u}` has not run; run `{u}` before `{stage}`"))),
                Some(e) if e.fingerprint != fp => {
                    return Err(Error::Stale(format!(
                        "`{u}` outputs were built from a different configuration or inputs; rerun `{u}` before `{stage}`"
                    )))
                }
                Some(_) => {
                    if let Some(why) = manifest.verify_outputs(out, u.name())? {
                        return Err(Error::Stale(format!("`{u}` output {why}; rerun `{u}`")));
                    }
                }
            }
        }

        let (fp, inputs) = self.expected(stage, fps)?;
        let previous = manifest.stages.get(stage.name()).cloned();
        if let Some(prev) = &previous {
            if prev.fingerprint == fp && manifest.verify_outputs(out, stage.name())?.is_none() {
                log::info!("{stage}: up to date");
                if !prev.failures.is_empty() {
                    return Err(Error::Validation(prev.failures.join("; ")));
                }
                return Ok(StageStatus::UpToDate);
            }
            // No longer trusted while it is being rebuilt.
            manifest.stages.remove(stage.name());
            manifest.save(out)?;
        }

        let started = chrono::Utc::now().to_rfc3339();
        log::info!("{stage}: running");
        let mut ctx = stages::StageCtx::new(out);
        if let Err(e) = stages::run(stage, &self.cfg, &mut ctx) {
            ctx.discard();
            for rel in previous.iter().flat_map(|p| p.outputs.keys()) {
                let _ = fs::remove_file(out.join(rel));
            }
            return Err(e);
        }
        if let Some(prev) = previous {
            for rel in prev
                .outputs
                .keys()
                .filter(|r| !ctx.outputs.contains_key(*r))
            {
                let _ = fs::remove_file(out.join(rel));
            }
        }
        let failures = std::mem::take(&mut ctx.failures);
        manifest.stages.insert(
            stage.name().to_string(),
            StageEntry {
                fingerprint: fp,
                inputs,
                outputs: std::mem::take(&mut ctx.outputs),
                warnings: std::mem::take(&mut ctx.warnings),
                failures: failures.clone(),
            },
        );
        manifest.save(out)?;
        manifest::record_time(
            out,
            stage.name(),
            &started,
            &chrono::Utc::now().to_rfc3339(),
        )?;
        if !failures.is_empty() {
            return Err(Error::Validation(failures.join("; ")));
        }
        Ok(StageStatus::Ran)
    }
}
