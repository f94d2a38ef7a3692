use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::PipelineConfig;
use super::manifest::{self, sha256_hex, write_atomic, FAILED_DIR};
use super::report::{
    describe, outcome_shares, quantile_table, PanelTable, QUANTILE_COLUMNS, SUMMARY_COLUMNS,
};
use super::Stage;
use crate::atoms::{
    assign_words, read_assignments_tsv, read_dictionary, train_atoms, write_assignments_tsv,
    write_dictionary, Assignment,
};
use crate::corpus::{
    build_ppmi, build_vocab, count_cooccurrence, read_documents, read_ppmi_triplets, read_vocab,
    tokenize_corpus, write_ppmi_triplets, write_vocab, SliceSpec, Vocabulary,
};
use crate::embedding::{
    read_embeddings, write_embeddings, write_embeddings_tsv, EmbeddingTensor, Trainer,
};
use crate::error::{Error, Result};
use crate::measures::{
    build_panel, panel_json_schema, read_companies, read_cpi, read_frequency_csv, read_term_list,
    write_panel_csv, LexiconSet, PanelInputs,
};
use crate::validation::{
    analogy_query, build_axis, drift_trace, project_on_axis, write_drift_long_csv, write_drift_tsv,
    DriftReport,
};

/// Files written so far by one stage attempt.
pub(crate) struct StageCtx {
    out: PathBuf,
    pub outputs: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

impl StageCtx {
    pub fn new(out: &Path) -> Self {
        StageCtx {
            out: out.to_path_buf(),
            outputs: BTreeMap::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(rel), bytes)?;
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn write_with(&mut self, rel: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(rel, &buf)
    }

    fn write_json(&mut self, rel: &str, v: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    /// Removes everything this attempt wrote.
    pub fn discard(&mut self) {
        for rel in self.outputs.keys() {
            let _ = fs::remove_file(self.out.join(rel));
        }
        self.outputs.clear();
    }
}

pub(crate) fn run(stage: Stage, cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    match stage {
        Stage::Ingest => ingest(cfg, ctx),
        Stage::Train => train(cfg, ctx),
        Stage::Atoms => atoms(cfg, ctx),
        Stage::Measure => measure(cfg, ctx),
        Stage::Validate => validate(cfg, ctx),
        Stage::Report => report(cfg, ctx),
    }
}

fn ppmi_path(year: i32) -> String {
    format!("ppmi/{year}.tsv")
}

fn atoms_path(year: i32) -> String {
    format!("atoms/{year}.tsv")
}

fn dictionary_path(year: i32) -> String {
    format!("atoms/{year}.bin")
}

fn ingest(cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    let p = &cfg.paths;
    let docs = read_documents(p.require("corpus", &p.corpus)?)?;
    let ic = &cfg.ingest;
    let year_min = ic.year_min.or_else(|| docs.iter().map(|d| d.year).min());
    let year_max = ic.year_max.or_else(|| docs.iter().map(|d| d.year).max());
    let (Some(year_min), Some(year_max)) = (year_min, year_max) else {
        return Err(Error::Config(
            "corpus is empty and no year range is configured".into(),
        ));
    };
    let slices = SliceSpec::new(year_min, year_max, ic.slice_width)
        .map_err(|e| Error::Config(e.to_string()))?;
    let corpus = tokenize_corpus(&docs, &cfg.tokens, slices);
    if corpus.skipped_out_of_range > 0 {
        ctx.warn(format!(
            "{} document(s) outside {year_min}..={year_max} skipped",
            corpus.skipped_out_of_range
        ));
    }
    if corpus.skipped_empty > 0 {
        ctx.warn(format!(
            "{} document(s) empty after tokenizing skipped",
            corpus.skipped_empty
        ));
    }
    let vocab = build_vocab(&corpus, ic.min_count)?;
    let counts = count_cooccurrence(&corpus, &vocab, &ic.cooccur())?;
    let mut slice_stats = Vec::new();
    for c in &counts {
        let y = build_ppmi(c, ic.ppmi_shift)?;
        let year = slices.label(c.slice);
        ctx.write_with(&ppmi_path(year), |w| write_ppmi_triplets(w, year, &y))?;
        slice_stats.push(json!({
            "year": year,
            "tokens": vocab.slice_total(c.slice),
            "ppmi_nnz": y.values.nnz_upper(),
        }));
    }
    ctx.write_with("vocab.tsv", |w| write_vocab(w, &vocab))?;
    ctx.write_json(
        "ingest.json",
        &json!({
            "documents": docs.len(),
            "skipped_out_of_range": corpus.skipped_out_of_range,
            "skipped_empty": corpus.skipped_empty,
            "vocabulary": vocab.len(),
            "slices": slice_stats,
        }),
    )
}

fn load_vocab(ctx: &StageCtx) -> Result<Vocabulary> {
    read_vocab(&ctx.path("vocab.tsv"))
}

fn load_embeddings(ctx: &StageCtx) -> Result<EmbeddingTensor> {
    read_embeddings(&mut BufReader::new(File::open(ctx.path("embeddings.bin"))?))
}

fn train(cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    let vocab = load_vocab(ctx)?;
    let years = vocab.slices().labels();
    let ys = years
        .iter()
        .enumerate()
        .map(|(t, &year)| read_ppmi_triplets(&ctx.path(&ppmi_path(year)), t).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    let mut trainer = Trainer::new(&ys, years, cfg.train_config())?;
    let converged = match trainer.advance() {
        Ok(c) => c,
        Err(e @ Error::Diverged { .. }) => {
            let dump = ctx.path(FAILED_DIR).join("embeddings_at_divergence.bin");
            let mut buf = Vec::new();
            write_embeddings(&mut buf, &trainer.current()?)?;
            write_atomic(&dump, &buf)?;
            log::error!("last finite iterate written to {}", dump.display());
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    if !converged {
        ctx.warn(format!(
            "training stopped after {} sweeps without reaching tol",
            cfg.train.sweeps
        ));
    }
    let u = trainer.current()?;
    ctx.write_with("embeddings.bin", |w| write_embeddings(w, &u))?;
    if cfg.export.embeddings_tsv {
        ctx.write_with("embeddings.tsv", |w| {
            write_embeddings_tsv(w, &u, vocab.words())
        })?;
    }
    ctx.write_json(
        "train.json",
        &json!({
            "converged": converged,
            "sweeps": trainer.trace().len() - 1,
            "objective": trainer.trace(),
            "mean_adjacent_distance": u.mean_adjacent_distance(),
        }),
    )
}

fn atoms(cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    let vocab = load_vocab(ctx)?;
    let u = load_embeddings(ctx)?;
    let acfg = cfg.atom_config();
    acfg.validate(u.n())
        .map_err(|e| Error::Config(e.to_string()))?;
    let dicts = (0..u.num_slices())
        .into_par_iter()
        .map(|t| train_atoms(u.slice(t), u.years()[t], &acfg))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Vec::new();
    for d in &dicts {
        ctx.write_with(&atoms_path(d.year), |w| {
            write_assignments_tsv(w, d, vocab.words())
        })?;
        ctx.write_with(&dictionary_path(d.year), |w| write_dictionary(w, d))?;
        summary.push(json!({
            "year": d.year,
            "atoms": d.num_atoms(),
            "unassigned": d.assignment.unassigned().len(),
            "trace": d.trace,
        }));
    }
    ctx.write_json("atoms.json", &summary)
}

fn word_index(vocab: &Vocabulary) -> HashMap<String, usize> {
    vocab
        .words()
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect()
}

fn load_assignments(ctx: &StageCtx, vocab: &Vocabulary) -> Result<Vec<Assignment>> {
    let index = word_index(vocab);
    vocab
        .slices()
        .labels()
        .into_iter()
        .map(|y| read_assignments_tsv(&ctx.path(&atoms_path(y)), &index).map(|r| r.1))
        .collect()
}

fn measure(cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    let p = &cfg.paths;
    let companies = read_companies(p.require("companies", &p.companies)?)?;
    let cpi = read_cpi(p.require("cpi", &p.cpi)?, cfg.measures.cpi_base_year)?;
    let mut terms = Vec::new();
    for t in &p.terms {
        terms.extend(read_term_list(t)?);
    }
    let freq = |name: &str, path: &Option<PathBuf>| -> Result<HashMap<String, u64>> {
        match path {
            Some(_) => read_frequency_csv(p.require(name, path)?),
            None => Ok(HashMap::new()),
        }
    };
    let lexicon = LexiconSet::new(
        terms,
        freq("general_freq", &p.general_freq)?,
        freq("patent_freq", &p.patent_freq)?,
    );
    let vocab = load_vocab(ctx)?;
    let u = load_embeddings(ctx)?;
    let assignments = load_assignments(ctx, &vocab)?;
    let panel = build_panel(
        &companies,
        &PanelInputs {
            embeddings: &u,
            vocab: &vocab,
            assignments: &assignments,
            lexicon: &lexicon,
            cpi: &cpi,
            rules: &cfg.tokens,
            config: &cfg.measures,
        },
    )?;
    for (id, reason) in &panel.rejected {
        // already logged by build_panel
        ctx.warnings
            .push(format!("company {id} rejected: {reason}"));
    }
    ctx.write_with("panel.csv", |w| write_panel_csv(w, &panel.rows))?;
    ctx.write_json("panel.schema.json", &panel_json_schema())?;
    ctx.write_with("panel_rejected.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        wr.write_record(["company_id", "reason"]).map_err(fmt)?;
        for (id, reason) in &panel.rejected {
            wr.write_record([id, reason]).map_err(fmt)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    ctx.write_json(
        "measure.json",
        &json!({
            "companies": companies.len(),
            "rows": panel.rows.len(),
            "rejected": panel.rejected.len(),
            "dropped_events": panel.dropped_events,
        }),
    )
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn check(name: &str, problems: Vec<String>) -> Check {
    Check {
        name: name.to_string(),
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            "ok".into()
        } else {
            let more = if problems.len() > 5 {
                format!(" (+{} more)", problems.len() - 5)
            } else {
                String::new()
            };
            format!("{}{more}", problems[..problems.len().min(5)].join("; "))
        },
    }
}

fn structural_checks(
    ctx: &StageCtx,
    u: &EmbeddingTensor,
    vocab: &Vocabulary,
    assignments: &[Assignment],
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let bad: Vec<String> = (0..u.num_slices())
        .filter(|&t| u.slice(t).iter().any(|v| !v.is_finite()))
        .map(|t| format!("slice {} has non-finite values", u.years()[t]))
        .collect();
    checks.push(check("embeddings_finite", bad));

    let mut norm_issues = Vec::new();
    let mut argmax_issues = Vec::new();
    for (t, stored) in assignments.iter().enumerate() {
        let year = u.years()[t];
        let (_, dict): (i32, DMatrix<f64>) = read_dictionary(&mut BufReader::new(File::open(
            ctx.path(&dictionary_path(year)),
        )?))?;
        for a in 0..dict.nrows() {
            let norm = dict.row(a).norm();
            if (norm - 1.0).abs() > 1e-8 {
                norm_issues.push(format!("{year} atom {a} has norm {norm}"));
            }
        }
        let fresh = assign_words(&dict, u.slice(t));
        for i in 0..vocab.len() {
            if fresh.atom[i] != stored.atom[i] {
                argmax_issues.push(format!(
                    "{year} word `{}` stored {:?}, argmax {:?}",
                    vocab.word(i),
                    stored.atom[i],
                    fresh.atom[i]
                ));
            }
        }
    }
    checks.push(check("atoms_unit_norm", norm_issues));
    checks.push(check("assignment_is_argmax", argmax_issues));

    let panel = PanelTable::from_csv(File::open(ctx.path("panel.csv"))?)?;
    let eps = 1e-12;
    let mut range_issues = Vec::new();
    for (col, lo, hi) in [
        ("local_distance", 0.0, 2.0),
        ("global_distance", 0.0, 2.0),
        ("tech_app_local_distance", 0.0, 2.0),
        ("centroid_spread", 0.0, 2.0),
        ("negentropy", -1.0, 0.0),
        ("vc_diversity", 0.0, 1.0),
        ("element_familiarity", 0.0, f64::INFINITY),
    ] {
        for (row, v) in panel.columns[col].iter().enumerate() {
            if let Some(v) = v {
                if !(v.is_finite() && *v >= lo - eps && *v <= hi + eps) {
                    range_issues.push(format!("row {} {col}={v}", row + 1));
                }
            }
        }
    }
    checks.push(check("panel_ranges", range_issues));

    // Validation outputs are being rebuilt; everything else must be tracked.
    let m = manifest::RunManifest::load(&ctx.out)?.unwrap_or_default();
    let untracked: Vec<String> = manifest::list_files(&ctx.out)?
        .into_iter()
        .filter(|f| !manifest::is_ignored(f) && !f.starts_with("validation/"))
        .filter(|f| !m.stages.values().any(|e| e.outputs.contains_key(f)))
        .collect();
    checks.push(check("manifest_complete", untracked));
    Ok(checks)
}

fn validate(cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    let vcfg = &cfg.validate;
    let vocab = load_vocab(ctx)?;
    let u = load_embeddings(ctx)?;
    let assignments = load_assignments(ctx, &vocab)?;
    let checks = structural_checks(ctx, &u, &vocab, &assignments)?;
    for c in checks.iter().filter(|c| !c.passed) {
        ctx.failures.push(format!("{}: {}", c.name, c.detail));
    }

    let mut reports: Vec<DriftReport> = Vec::new();
    for w in &vcfg.drift_words {
        match drift_trace(&u, &vocab, w, vcfg.neighbors) {
            Ok(r) => reports.push(r),
            Err(e) => ctx.warn(format!("drift `{w}` skipped: {e}")),
        }
    }
    for r in &reports {
        ctx.write_with(&format!("validation/drift/{}.tsv", r.word), |w| {
            write_drift_tsv(w, r)
        })?;
    }
    ctx.write_json("validation/drift.json", &reports)?;
    ctx.write_with("validation/drift_long.csv", |w| {
        write_drift_long_csv(w, &reports)
    })?;

    let mut axis_rows = String::from("axis\tyear\tword\trole\tprojection\n");
    let mut axis_summary = Vec::new();
    for axis in &vcfg.axes {
        for t in 0..u.num_slices() {
            let year = u.years()[t];
            let built = match build_axis(&u, &vocab, t, &axis.positive, &axis.negative) {
                Ok(a) => a,
                Err(e) => {
                    ctx.warn(format!("axis `{}` in {year} skipped: {e}", axis.name));
                    continue;
                }
            };
            let mut pole_means = BTreeMap::new();
            let roles = [
                ("positive", &axis.positive),
                ("negative", &axis.negative),
                ("probe", &vcfg.probes),
            ];
            for (role, words) in roles {
                let mut vals = Vec::new();
                for w in words.iter() {
                    let Some(id) = vocab.id(w) else { continue };
                    let proj = project_on_axis(&u.vector(t, id), &built);
                    let cell = proj.map(|p| p.to_string()).unwrap_or_default();
                    axis_rows.push_str(&format!("{}\t{year}\t{w}\t{role}\t{cell}\n", axis.name));
                    vals.extend(proj);
                }
                pole_means.insert(role, describe(&vals).mean);
            }
            axis_summary.push(json!({
                "axis": axis.name,
                "year": year,
                "dropped_seeds": built.dropped,
                "mean_projection": pole_means,
            }));
        }
    }
    ctx.write("validation/axes.tsv", axis_rows.as_bytes())?;
    ctx.write_json("validation/axes.json", &axis_summary)?;

    let mut analogy_rows = String::from("year\ta\tb\tc\trank\tword\tsimilarity\n");
    for [a, b, c] in &vcfg.analogies {
        for t in 0..u.num_slices() {
            match analogy_query(&u, &vocab, t, (a, b, c), vcfg.neighbors, true) {
                Ok(ns) => {
                    for (r, n) in ns.iter().enumerate() {
                        analogy_rows.push_str(&format!(
                            "{}\t{a}\t{b}\t{c}\t{}\t{}\t{}\n",
                            u.years()[t],
                            r + 1,
                            vocab.word(n.id),
                            n.similarity
                        ));
                    }
                }
                Err(e) => {
                    ctx.warn(format!("analogy {a} - {b} + {c} skipped: {e}"));
                    break;
                }
            }
        }
    }
    ctx.write("validation/analogies.tsv", analogy_rows.as_bytes())?;
    ctx.write_json("validation/checks.json", &checks)
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn report(cfg: &PipelineConfig, ctx: &mut StageCtx) -> Result<()> {
    let rcfg = &cfg.report;
    let panel = PanelTable::from_csv(File::open(ctx.path("panel.csv"))?)?;
    let empty = panel.is_empty();

    let mut stats = serde_json::Map::new();
    let mut summary = String::from("variable,n,mean,std,min,max\n");
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for col in SUMMARY_COLUMNS {
        let d = describe(&panel.present(col));
        summary.push_str(&format!(
            "{col},{},{},{},{},{}\n",
            d.n,
            cell(d.mean),
            cell(d.std),
            cell(d.min),
            cell(d.max)
        ));
        stats.insert(col.to_string(), serde_json::to_value(&d)?);
    }

    let outcome_names: Vec<&str> = crate::measures::Outcome::ALL
        .iter()
        .map(|o| o.as_str())
        .collect();
    let mut quantiles = serde_json::Map::new();
    let mut qcsv = format!("measure,group,n,mean,{}\n", outcome_names.join(","));
    for col in QUANTILE_COLUMNS {
        let values: Vec<f64> = panel.columns[col]
            .iter()
            .map(|v| v.unwrap_or(0.0))
            .collect();
        let table = quantile_table(&values, &panel.outcomes, rcfg.quantiles);
        for g in &table {
            let rates: Vec<String> = outcome_names
                .iter()
                .map(|o| g.rates[*o].to_string())
                .collect();
            qcsv.push_str(&format!(
                "{col},{},{},{},{}\n",
                g.group,
                g.n,
                cell(g.mean),
                rates.join(",")
            ));
        }
        quantiles.insert(col.to_string(), serde_json::to_value(&table)?);
    }

    let drift = read_json(&ctx.path("validation/drift.json"))?;
    let drift_excerpt: Vec<Value> = drift
        .as_array()
        .map(|reports| {
            reports
                .iter()
                .map(|r| {
                    let slices: Vec<Value> = r["slices"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(|s| {
                            let top: Vec<Value> = s["neighbors"]
                                .as_array()
                                .into_iter()
                                .flatten()
                                .take(rcfg.drift_excerpt)
                                .map(|n| n["word"].clone())
                                .collect();
                            json!({"year": s["year"], "neighbors": top})
                        })
                        .collect();
                    json!({"word": r["word"], "slices": slices})
                })
                .collect()
        })
        .unwrap_or_default();

    let companies: std::collections::BTreeSet<&String> = panel.company_ids.iter().collect();
    let doc = json!({
        "panel": {"rows": panel.len(), "companies": companies.len(), "empty": empty},
        "descriptive": stats,
        "outcomes": outcome_shares(&panel.outcomes),
        "quantile_groups": rcfg.quantiles,
        "quantiles": quantiles,
        "validation": {
            "checks": read_json(&ctx.path("validation/checks.json"))?,
            "drift": drift_excerpt,
            "axes": read_json(&ctx.path("validation/axes.json"))?,
        },
    });
    ctx.write("summary.csv", summary.as_bytes())?;
    ctx.write("quantiles.csv", qcsv.as_bytes())?;
    ctx.write_json("report.json", &doc)
}
