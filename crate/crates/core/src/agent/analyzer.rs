//! Trajectory statistics computed locally, interpreted in analysis.txt.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::prompts::ANALYZER_PROMPT;
use crate::gateway::{ChatBackend, Message};
use crate::md::xvg::Curve;
use crate::sandbox::{Sandbox, SandboxError};

pub const ANALYSIS_FILE: &str = "analysis.txt";
/// A curve is stable when its last-half slope is below this fraction of its
/// mean per nanosecond.
pub const STABLE_SLOPE_FRACTION: f64 = 0.05;
/// Relative Rg rise (last tenth vs first tenth) flagged as possible unfolding.
pub const UNFOLDING_RISE: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum AnalyzerError {
    #[error("{}", .0.iter().map(|f| format!("{f} not found")).collect::<Vec<_>>().join("; "))]
    Missing(Vec<String>),
    #[error("{file}: {message}")]
    Malformed { file: String, message: String },
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: f64,
    pub std: f64,
    /// Means of the first and last tenth of the frames.
    pub initial: f64,
    pub last: f64,
    pub drift: f64,
    pub last_half_slope_per_ns: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsfStats {
    pub residues: usize,
    pub mean: f64,
    pub min_residue: f64,
    pub min: f64,
    pub max_residue: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisStats {
    pub rmsd: SeriesStats,
    pub rmsf: RmsfStats,
    pub gyrate: SeriesStats,
    pub rg_rise_fraction: f64,
    pub possible_unfolding: bool,
    pub hbond_mean: f64,
    pub hbond_std: f64,
}

/// Who writes the interpretation paragraph.
#[derive(Clone)]
pub enum Prose {
    Template,
    Model(Arc<dyn ChatBackend>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub stats: AnalysisStats,
    pub text: String,
}

impl AnalysisReport {
    /// One-line digest for exit reports.
    pub fn headline(&self) -> String {
        let s = &self.stats;
        format!(
            "RMSD mean {:.3} nm ({}), Rg mean {:.3} nm{}, max RMSF {:.3} nm at residue {}, {:.1} hydrogen bonds on average",
            s.rmsd.mean,
            if s.rmsd.stable { "stable" } else { "still drifting" },
            s.gyrate.mean,
            if s.possible_unfolding { " (possible unfolding)" } else { "" },
            s.rmsf.max,
            s.rmsf.max_residue,
            s.hbond_mean
        )
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Least-squares slope of y against x.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx
}

fn time_in_ns(curve: &Curve) -> Vec<(f64, f64)> {
    let scale = if curve.x_label.contains("ps") { 1e-3 } else { 1.0 };
    curve.points.iter().map(|&(x, y)| (x * scale, y)).collect()
}

pub fn series_stats(points: &[(f64, f64)]) -> SeriesStats {
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mean, std) = mean_std(&ys);
    let tenth = (ys.len() / 10).max(1).min(ys.len());
    let initial = mean_std(&ys[..tenth]).0;
    let last = mean_std(&ys[ys.len() - tenth..]).0;
    let half = &points[points.len() / 2..];
    let s = slope(half);
    SeriesStats {
        mean,
        std,
        initial,
        last,
        drift: last - initial,
        last_half_slope_per_ns: s,
        stable: s.abs() < STABLE_SLOPE_FRACTION * mean.abs(),
    }
}

fn load(sandbox: &Sandbox, file: &str) -> Result<Curve, AnalyzerError> {
    let text = sandbox.read_string(file)?;
    let curve = Curve::parse(&text).map_err(|message| AnalyzerError::Malformed { file: file.to_string(), message })?;
    if curve.points.is_empty() {
        return Err(AnalyzerError::Malformed { file: file.to_string(), message: "no data rows".to_string() });
    }
    Ok(curve)
}

pub fn compute_stats(sandbox: &Sandbox) -> Result<AnalysisStats, AnalyzerError> {
    let files = ["rmsd.xvg", "rmsf.xvg", "gyrate.xvg", "hbond.xvg"];
    let missing: Vec<String> = files.iter().filter(|f| !sandbox.nonempty(f)).map(|f| f.to_string()).collect();
    if !missing.is_empty() {
        return Err(AnalyzerError::Missing(missing));
    }
    let rmsd = series_stats(&time_in_ns(&load(sandbox, "rmsd.xvg")?));
    let gyrate = series_stats(&time_in_ns(&load(sandbox, "gyrate.xvg")?));
    let rmsf_curve = load(sandbox, "rmsf.xvg")?;
    let rmsf_vals = rmsf_curve.ys();
    let min = rmsf_curve.points.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or_default();
    let max = rmsf_curve.points.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or_default();
    let (hbond_mean, hbond_std) = mean_std(&load(sandbox, "hbond.xvg")?.ys());
    let rg_rise_fraction = if gyrate.initial.abs() > 0.0 { gyrate.drift / gyrate.initial } else { 0.0 };
    Ok(AnalysisStats {
        rmsf: RmsfStats {
            residues: rmsf_vals.len(),
            mean: mean_std(&rmsf_vals).0,
            min_residue: min.0,
            min: min.1,
            max_residue: max.0,
            max: max.1,
        },
        possible_unfolding: rg_rise_fraction > UNFOLDING_RISE,
        rg_rise_fraction,
        rmsd,
        gyrate,
        hbond_mean,
        hbond_std,
    })
}

pub fn render_stats(s: &AnalysisStats) -> String {
    let series = |name: &str, st: &SeriesStats| {
        format!(
            "{name}: mean {:.3} nm, std {:.3} nm, initial {:.3} nm, final {:.3} nm, drift {:+.3} nm; last-half slope {:+.4} nm/ns ({})",
            st.mean,
            st.std,
            st.initial,
            st.last,
            st.drift,
            st.last_half_slope_per_ns,
            if st.stable { "stable" } else { "not stable" }
        )
    };
    [
        series("RMSD", &s.rmsd),
        format!(
            "RMSF: {} residues, mean {:.3} nm, minimum {:.3} nm at residue {}, maximum {:.3} nm at residue {}",
            s.rmsf.residues, s.rmsf.mean, s.rmsf.min, s.rmsf.min_residue, s.rmsf.max, s.rmsf.max_residue
        ),
        format!(
            "{}; Rg change {:+.1}%{}",
            series("Radius of gyration", &s.gyrate),
            100.0 * s.rg_rise_fraction,
            if s.possible_unfolding { " (possible unfolding)" } else { "" }
        ),
        format!("Hydrogen bonds: mean {:.1}, std {:.1}", s.hbond_mean, s.hbond_std),
    ]
    .join("\n")
}

pub fn template_interpretation(s: &AnalysisStats) -> String {
    let mut out = Vec::new();
    if s.rmsd.stable {
        out.push(format!(
            "The RMSD reaches a plateau with a mean of {:.3} nm, so the structure is stable over the production run.",
            s.rmsd.mean
        ));
    } else {
        out.push(format!(
            "The RMSD is still changing ({:+.4} nm/ns over the second half, mean {:.3} nm), so the structure has not converged; a longer run is advisable.",
            s.rmsd.last_half_slope_per_ns, s.rmsd.mean
        ));
    }
    out.push(format!(
        "Residue fluctuations range from {:.3} nm (residue {}) to {:.3} nm (residue {}); the most mobile regions are likely loops or termini.",
        s.rmsf.min, s.rmsf.min_residue, s.rmsf.max, s.rmsf.max_residue
    ));
    if s.possible_unfolding {
        out.push(format!(
            "The radius of gyration rises by {:.1}%, which indicates possible unfolding.",
            100.0 * s.rg_rise_fraction
        ));
    } else {
        out.push(format!(
            "The radius of gyration stays near {:.3} nm ({:+.1}%), so the fold remains compact.",
            s.gyrate.mean,
            100.0 * s.rg_rise_fraction
        ));
    }
    out.push(format!(
        "On average {:.1} hydrogen bonds are present (std {:.1}).",
        s.hbond_mean, s.hbond_std
    ));
    out.join(" ")
}

fn model_interpretation(backend: &dyn ChatBackend, stats_text: &str) -> Result<String, String> {
    let history = [Message::system(ANALYZER_PROMPT.trim()), Message::user(stats_text.to_string())];
    let reply = backend.complete(&history, &[]).map_err(|e| e.to_string())?;
    let text = reply.content.trim().to_string();
    if text.is_empty() {
        return Err("analyzer model returned no text".to_string());
    }
    Ok(text)
}

/// Computes the statistics, writes analysis.txt and returns its content.
pub fn analyze(sandbox: &Sandbox, prose: &Prose) -> Result<AnalysisReport, AnalyzerError> {
    let stats = compute_stats(sandbox)?;
    let stats_text = render_stats(&stats);
    let interpretation = match prose {
        Prose::Template => template_interpretation(&stats),
        Prose::Model(backend) => model_interpretation(backend.as_ref(), &stats_text).unwrap_or_else(|e| {
            log::warn!("analyzer model failed, using template interpretation: {e}");
            template_interpretation(&stats)
        }),
    };
    let text = format!(
        "Trajectory analysis for {}\n\nStatistics\n{stats_text}\n\nInterpretation\n{interpretation}\n",
        sandbox.run_id()
    );
    sandbox.write(ANALYSIS_FILE, &text)?;
    Ok(AnalysisReport { stats, text })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(sb: &Sandbox, name: &str, x: &str, points: Vec<(f64, f64)>) {
        sb.write(name, Curve::new(name, x, "y", points).render("test")).unwrap();
    }

    fn fixture(rg: impl Fn(f64) -> f64) -> (tempfile::TempDir, Sandbox) {
        let dir = tempfile::tempdir().unwrap();
        let sb = Sandbox::create(dir.path(), "r").unwrap();
        let n = 500;
        let t = |i: usize| i as f64 / n as f64;
        let wiggle = |i: usize| 0.02 * ((i * 7919 % 101) as f64 / 100.0 - 0.5);
        write(
            &sb,
            "rmsd.xvg",
            "Time (ns)",
            (0..n).map(|i| (t(i), if t(i) < 0.2 { 0.75 * t(i) } else { 0.15 + wiggle(i) })).collect(),
        );
        write(&sb, "gyrate.xvg", "Time (ns)", (0..n).map(|i| (t(i), rg(t(i)))).collect());
        write(&sb, "hbond.xvg", "Time (ns)", (0..n).map(|i| (t(i), 180.0 + (i % 5) as f64)).collect());
        write(&sb, "rmsf.xvg", "Residue", (1..=20).map(|r| (r as f64, 0.05 + 0.01 * r as f64)).collect());
        (dir, sb)
    }

    #[test]
    fn flat_rmsd_is_stable() {
        let (_d, sb) = fixture(|_| 1.4);
        let report = analyze(&sb, &Prose::Template).unwrap();
        assert!(report.stats.rmsd.stable);
        assert!((report.stats.rmsd.mean - 0.135).abs() < 0.01);
        assert!(report.text.contains("stable"));
        assert!(report.text.contains(&format!("{:.3}", report.stats.rmsd.mean)));
        assert_eq!(report.stats.rmsf.max_residue, 20.0);
        assert!(!report.stats.possible_unfolding);
        assert!(sb.nonempty(ANALYSIS_FILE));
    }

    #[test]
    fn rising_rg_flags_unfolding() {
        let (_d, sb) = fixture(|t| 1.4 * (1.0 + 0.2 * t));
        let report = analyze(&sb, &Prose::Template).unwrap();
        assert!(report.stats.possible_unfolding);
        assert!(report.text.contains("possible unfolding"));
    }

    #[test]
    fn missing_curve_is_named() {
        let (_d, sb) = fixture(|_| 1.4);
        sb.remove("rmsf.xvg").unwrap();
        let err = analyze(&sb, &Prose::Template).unwrap_err();
        assert_eq!(err.to_string(), "rmsf.xvg not found");
        assert!(!sb.exists(ANALYSIS_FILE));
    }

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!((slope(&pts) - 2.0).abs() < 1e-12);
    }
}
