use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::atoms::AtomConfig;
use crate::corpus::{CooccurConfig, SourceWeights, TokenRules};
use crate::embedding::TrainConfig;
use crate::error::{Error, Result};
use crate::measures::MeasureConfig;
use crate::validation::SemanticAxis;

/// Input and output locations. Relative paths are taken relative to the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub companies: Option<PathBuf>,
    /// Plain-text technology term lists, one term per line.
    pub terms: Vec<PathBuf>,
    pub general_freq: Option<PathBuf>,
    pub patent_freq: Option<PathBuf>,
    pub cpi: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: None,
            companies: None,
            terms: Vec::new(),
            general_freq: None,
            patent_freq: None,
            cpi: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Defaults to the earliest document year.
    pub year_min: Option<i32>,
    /// Defaults to the latest document year.
    pub year_max: Option<i32>,
    pub slice_width: u32,
    pub min_count: u64,
    pub ppmi_shift: f64,
    pub window: usize,
    pub distance_decay: bool,
    pub weights: SourceWeights,
}

impl Default for IngestConfig {
    fn default() -> Self {
        let c = CooccurConfig::default();
        IngestConfig {
            year_min: None,
            year_max: None,
            slice_width: 1,
            min_count: 10,
            ppmi_shift: 1.0,
            window: c.window,
            distance_decay: c.distance_decay,
            weights: c.weights,
        }
    }
}

impl IngestConfig {
    pub fn cooccur(&self) -> CooccurConfig {
        CooccurConfig {
            window: self.window,
            weights: self.weights,
            distance_decay: self.distance_decay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    /// Also write `embeddings.tsv` next to the binary tensor.
    pub embeddings_tsv: bool,
}

fn words(w: &[&str]) -> Vec<String> {
    w.iter().map(|s| s.to_string()).collect()
}

pub fn profit_loss_axis() -> SemanticAxis {
    SemanticAxis {
        name: "profit_loss".into(),
        positive: words(&[
            "gain",
            "win",
            "profit",
            "bull",
            "optimistic",
            "worthy",
            "profitable",
        ]),
        negative: words(&[
            "lose",
            "loss",
            "default",
            "bear",
            "pessimistic",
            "worthless",
            "unprofitable",
        ]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Neighbors per slice in drift traces and analogy answers.
    pub neighbors: usize,
    pub drift_words: Vec<String>,
    /// Words projected onto every axis in every slice, besides the seeds.
    pub probes: Vec<String>,
    pub axes: Vec<SemanticAxis>,
    /// `[a, b, c]` triples answered as `a - b + c` in every slice.
    pub analogies: Vec<[String; 3]>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            neighbors: 10,
            drift_words: Vec::new(),
            probes: Vec::new(),
            axes: vec![profit_loss_axis()],
            analogies: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Equal-size groups in the outcome-rate tables.
    pub quantiles: usize,
    /// Neighbors per slice quoted from each drift trace.
    pub drift_excerpt: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            quantiles: 10,
            drift_excerpt: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Overrides the seeds of `[train]` and `[atoms]` when set.
    pub seed: Option<u64>,
    pub paths: Paths,
    pub tokens: TokenRules,
    pub ingest: IngestConfig,
    pub train: TrainConfig,
    pub atoms: AtomConfig,
    pub measures: MeasureConfig,
    pub validate: ValidateConfig,
    pub report: ReportConfig,
    pub export: ExportConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.resolve(base);
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let as_config = |e: Error| Error::Config(e.to_string());
        self.train.validate().map_err(as_config)?;
        if self.atoms.num_atoms == 0 || self.atoms.iterations == 0 {
            return Err(Error::Config("atoms: K and iterations must be >= 1".into()));
        }
        if let (Some(a), Some(b)) = (self.ingest.year_min, self.ingest.year_max) {
            if a > b {
                return Err(Error::Config("ingest: year_min > year_max".into()));
            }
        }
        if self.ingest.slice_width == 0 || self.ingest.window == 0 {
            return Err(Error::Config(
                "ingest: slice_width and window must be >= 1".into(),
            ));
        }
        if self.ingest.ppmi_shift.is_nan() || self.ingest.ppmi_shift < 1.0 {
            return Err(Error::Config("ingest: ppmi_shift must be >= 1".into()));
        }
        if self.measures.min_module_size == 0 {
            return Err(Error::Config(
                "measures: min_module_size must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.measures.rare_percentile) {
            return Err(Error::Config(
                "measures: rare_percentile must lie in [0, 1]".into(),
            ));
        }
        if self.report.quantiles == 0 {
            return Err(Error::Config("report: quantiles must be >= 1".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed.unwrap_or(self.train.seed),
            ..self.train
        }
    }

    pub fn atom_config(&self) -> AtomConfig {
        AtomConfig {
            seed: self.seed.unwrap_or(self.atoms.seed),
            ..self.atoms
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.corpus,
            &mut self.companies,
            &mut self.general_freq,
            &mut self.patent_freq,
            &mut self.cpi,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.terms.iter_mut().for_each(fix);
        fix(&mut self.out);
    }

    /// Fails with a config error when a required input is unset or missing.
    pub(crate) fn require<'a>(&self, name: &str, p: &'a Option<PathBuf>) -> Result<&'a Path> {
        let p = p
            .as_deref()
            .ok_or_else(|| Error::Config(format!("paths.{name} is not set")))?;
        if !p.is_file() {
            return Err(Error::Config(format!(
                "paths.{name}: {} does not exist",
                p.display()
            )));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn edited_config_round_trips() {
        let text = r#"
seed = 7
[paths]
corpus = "corpus.jsonl"
terms = ["a.txt", "b.txt"]
[ingest]
year_min = 2001
min_count = 3
weights = { news = 1.0, patent = 2.5 }
[train]
k = 8
order = "jacobi"
[atoms]
K = 12
method = "kmeans"
[measures]
pooling = "regions"
censor_date = "2020-06-30"
[[validate.axes]]
name = "x"
positive = ["up"]
negative = ["down"]
"#;
        let cfg = PipelineConfig::from_toml(text).unwrap();
        assert_eq!(cfg.atoms.num_atoms, 12);
        assert_eq!(cfg.ingest.weights.patent, 2.5);
        assert_eq!(cfg.ingest.weights.other, 1.0);
        assert_eq!(cfg.train_config().seed, 7);
        assert_eq!(cfg.validate.axes.len(), 1);
        let again = PipelineConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            PipelineConfig::from_toml("[train]\nkk = 3"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PipelineConfig::from_toml("[train]\nk = 0"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PipelineConfig::from_toml("[ingest]\nppmi_shift = 0.5"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn default_axis_is_seven_by_seven() {
        let a = &ValidateConfig::default().axes[0];
        assert_eq!((a.positive.len(), a.negative.len()), (7, 7));
        assert!(
            a.positive.contains(&"optimistic".to_string())
                && a.negative.contains(&"unprofitable".to_string())
        );
    }
}
