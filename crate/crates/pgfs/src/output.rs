//! CSV writers, quantile summaries and route export.
//!
//! Every CSV starts with a `#schema=<name>/<version>` comment line followed
//! by the header row.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use pgfs_core::env::{EpisodeRecord, StepRecord};

use crate::error::{Error, Result};

pub const EPISODE_SCHEMA: &str = "pgfs-episodes/1";
pub const EPISODE_HEADER: [&str; 9] = ["episode", "step", "r1", "template", "r2", "product", "reward", "done", "reason"];
pub const METRICS_SCHEMA: &str = "pgfs-metrics/1";
pub const METRICS_HEADER: [&str; 5] = ["step", "critic_loss", "actor_loss", "f_ce_loss", "mean_inference_reward"];
pub const QUANTILE_SCHEMA: &str = "pgfs-quantiles/1";
pub const QUANTILE_HEADER: [&str; 9] = ["step", "n", "min", "q05", "q25", "q50", "q75", "q95", "max"];
pub const SUMMARY_SCHEMA: &str = "pgfs-summary/1";
pub const SUMMARY_HEADER: [&str; 5] = ["episode", "start", "steps", "max_reward", "final_product"];
pub const SCORE_SCHEMA: &str = "pgfs-scores/1";

/// A CSV file with a schema line and header.
pub struct CsvOut {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, schema: &str, header: &[&str]) -> Result<CsvOut> {
        let mut file = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        writeln!(file, "#schema={schema}").map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header).map_err(|e| Error::runtime(e.to_string()))?;
        Ok(CsvOut { writer })
    }

    /// Opens for appending, creating the file with its header when missing.
    pub fn append(path: &Path, schema: &str, header: &[&str]) -> Result<CsvOut> {
        if !path.exists() {
            return CsvOut::create(path, schema, header);
        }
        let file = OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(CsvOut {
            writer: csv::Writer::from_writer(BufWriter::new(file)),
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| Error::runtime(e.to_string()))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::runtime(e.to_string()))
    }
}

impl Drop for CsvOut {
    fn drop(&mut self) {
        let _ = self.writer.flush();
    }
}

/// Round-trippable decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One episode-CSV row; `step` is 1-based.
pub fn episode_row(episode: usize, step: usize, r: &StepRecord) -> [String; 9] {
    [
        episode.to_string(),
        step.to_string(),
        r.r1.clone(),
        r.template.clone(),
        r.r2.clone().unwrap_or_default(),
        r.product.clone().unwrap_or_default(),
        num(r.reward),
        (r.done as u8).to_string(),
        r.reason.map(|x| x.as_str().to_string()).unwrap_or_default(),
    ]
}

pub fn write_episodes(out: &mut CsvOut, first_id: usize, episodes: &[EpisodeRecord]) -> Result<()> {
    for (e, ep) in episodes.iter().enumerate() {
        for (k, s) in ep.steps.iter().enumerate() {
            out.row(episode_row(first_id + e, k + 1, s))?;
        }
    }
    Ok(())
}

/// Quantile with linear interpolation between order statistics of `sorted`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-step reward distribution across episodes: `(step, sorted rewards)`.
pub fn rewards_by_step(episodes: &[EpisodeRecord]) -> Vec<(usize, Vec<f64>)> {
    let depth = episodes.iter().map(|e| e.steps.len()).max().unwrap_or(0);
    (0..depth)
        .map(|k| {
            let mut v: Vec<f64> = episodes.iter().filter_map(|e| e.steps.get(k)).map(|s| s.reward).collect();
            v.sort_by(f64::total_cmp);
            (k + 1, v)
        })
        .collect()
}

pub fn write_quantiles(path: &Path, episodes: &[EpisodeRecord]) -> Result<()> {
    let mut out = CsvOut::create(path, QUANTILE_SCHEMA, &QUANTILE_HEADER)?;
    for (step, v) in rewards_by_step(episodes) {
        let mut row = vec![step.to_string(), v.len().to_string()];
        for q in [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0] {
            row.push(num(quantile(&v, q)));
        }
        out.row(row)?;
    }
    out.flush()
}

pub fn write_summary(path: &Path, episodes: &[EpisodeRecord]) -> Result<()> {
    let mut out = CsvOut::create(path, SUMMARY_SCHEMA, &SUMMARY_HEADER)?;
    for (e, ep) in episodes.iter().enumerate() {
        let last = ep.steps.iter().rev().find_map(|s| s.product.clone()).unwrap_or_default();
        out.row([
            e.to_string(),
            ep.start().unwrap_or("").to_string(),
            ep.steps.len().to_string(),
            opt_num(ep.max_reward()),
            last,
        ])?;
    }
    out.flush()
}

/// Human-readable synthesis routes.
pub fn routes_text(episodes: &[EpisodeRecord]) -> String {
    let mut out = String::new();
    for (e, ep) in episodes.iter().enumerate() {
        let _ = writeln!(
            out,
            "episode {e}: start {}  max reward {}",
            ep.start().unwrap_or("?"),
            ep.max_reward().map_or_else(|| String::from("-"), |r| format!("{r:.4}"))
        );
        for (k, s) in ep.steps.iter().enumerate() {
            let partner = s.r2.as_deref().map(|r| format!(" + {r}")).unwrap_or_default();
            let product = s.product.as_deref().unwrap_or("(no product)");
            let _ = writeln!(
                out,
                "  {}. {}{} --[{}]--> {}  reward {:.4}",
                k + 1,
                s.r1,
                partner,
                s.template,
                product,
                s.reward
            );
        }
        if let Some(reason) = ep.reason() {
            let _ = writeln!(out, "  end: {}", reason.as_str());
        }
        out.push('\n');
    }
    out
}
