//! Cross-dataset comparison: paired permutation tests, average ranks, the
//! Nemenyi critical difference, and mean percentage improvements.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::Report;
use crate::error::{Error, Result};
use crate::rng;

/// Sample sizes up to this are tested by full enumeration of sign flips.
pub const EXACT_LIMIT: usize = 20;
pub const DEFAULT_PERMUTATIONS: usize = 1_000_000;
const CHUNK: usize = 1 << 16;

/// Nemenyi `q_alpha` for `k = 2..=10` methods.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    /// Mean of `a - b`.
    pub statistic: f64,
    pub p_value: f64,
    pub exact: bool,
    /// Sign patterns counted, including the observed one.
    pub patterns: u64,
    pub two_sided: bool,
}

/// Two-sided paired sign-flip test of `mean(a - b) = 0`.
///
/// With at most [`EXACT_LIMIT`] pairs every sign pattern is enumerated.
/// Otherwise `permutations` random patterns are drawn from seeded chunks and
/// the observed pattern is counted once more, so `p = (1 + hits) / (1 + draws)`.
pub fn paired_permutation_test(
    a: &[f64],
    b: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<PermutationTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidSpec(
            "permutation test needs two paired vectors of length >= 2".into(),
        ));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let statistic = diffs.iter().sum::<f64>() / n as f64;
    let observed = diffs.iter().sum::<f64>().abs();
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(PermutationTest {
            statistic,
            p_value: 1.0,
            exact: n <= EXACT_LIMIT,
            patterns: 0,
            two_sided: true,
        });
    }
    // Sums that differ from the observed one only by rounding count as ties.
    let scale: f64 = diffs.iter().map(|d| d.abs()).sum();
    let threshold = observed - 1e-12 * scale;
    let flipped_sum = |mask: u64| -> f64 {
        diffs
            .iter()
            .enumerate()
            .map(|(i, &d)| if mask >> i & 1 == 1 { -d } else { d })
            .sum()
    };
    if n <= EXACT_LIMIT {
        let total = 1u64 << n;
        let hits: u64 = (0..total)
            .into_par_iter()
            .filter(|&m| flipped_sum(m).abs() >= threshold)
            .count() as u64;
        return Ok(PermutationTest {
            statistic,
            p_value: hits as f64 / total as f64,
            exact: true,
            patterns: total,
            two_sided: true,
        });
    }
    let chunks = permutations.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, &[0x9E, c as u64]);
            let draws = CHUNK.min(permutations - c * CHUNK);
            let mut hits = 0u64;
            for _ in 0..draws {
                let s: f64 = diffs
                    .iter()
                    .map(|&d| if r.random::<bool>() { -d } else { d })
                    .sum();
                if s.abs() >= threshold {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(PermutationTest {
        statistic,
        p_value: (1 + hits) as f64 / (1 + permutations) as f64,
        exact: false,
        patterns: permutations as u64 + 1,
        two_sided: true,
    })
}

/// Scores of several methods on a common set of datasets. Rows are datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(datasets: Vec<String>, methods: Vec<String>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if methods.len() < 2 {
            return Err(Error::InvalidSpec(
                "a comparison needs at least two methods".into(),
            ));
        }
        if scores.len() != datasets.len() || scores.iter().any(|r| r.len() != methods.len()) {
            return Err(Error::InvalidSpec(
                "score matrix shape does not match its labels".into(),
            ));
        }
        if scores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("score matrix has non-finite cells".into()));
        }
        Ok(ScoreMatrix {
            datasets,
            methods,
            scores,
        })
    }

    /// Builds the matrix from report rows keyed by `dataset/setting`. Rows
    /// missing any method are dropped and returned separately.
    pub fn from_reports(reports: &[Report]) -> Result<(Self, Vec<String>)> {
        let mut methods: Vec<String> = reports.iter().map(|r| r.method.clone()).collect();
        methods.sort();
        methods.dedup();
        let mut cells: BTreeMap<String, BTreeMap<&str, f64>> = BTreeMap::new();
        for r in reports {
            let key = if r.setting.is_empty() {
                r.dataset.clone()
            } else {
                format!("{}/{}", r.dataset, r.setting)
            };
            cells.entry(key).or_default().insert(&r.method, r.score);
        }
        let mut datasets = Vec::new();
        let mut scores = Vec::new();
        let mut incomplete = Vec::new();
        for (key, row) in cells {
            if row.len() == methods.len() {
                scores.push(methods.iter().map(|m| row[m.as_str()]).collect());
                datasets.push(key);
            } else {
                incomplete.push(key);
            }
        }
        Ok((ScoreMatrix::new(datasets, methods, scores)?, incomplete))
    }

    pub fn column(&self, method: usize) -> Vec<f64> {
        self.scores.iter().map(|r| r[method]).collect()
    }

    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == name)
    }
}

/// Ranks of one dataset's scores, 1 for the highest, tied scores sharing
/// their mean rank.
pub fn rank_row(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// Mean rank per method over datasets.
pub fn average_ranks(matrix: &ScoreMatrix) -> Vec<f64> {
    let k = matrix.methods.len();
    let mut sums = vec![0.0; k];
    for row in &matrix.scores {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    let n = matrix.scores.len().max(1) as f64;
    sums.into_iter().map(|s| s / n).collect()
}

/// Nemenyi critical difference `q_alpha(k) * sqrt(k (k + 1) / (6 n))` for
/// `alpha` of 0.05 or 0.10 and `k <= 10`.
pub fn critical_difference(k: usize, n: usize, alpha: f64) -> Result<f64> {
    if k < 2 || n == 0 {
        return Err(Error::InvalidSpec(
            "critical difference needs k >= 2 and n >= 1".into(),
        ));
    }
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::InvalidSpec(format!(
            "no Nemenyi table for alpha = {alpha}"
        )));
    };
    let q = table
        .get(k - 2)
        .ok_or_else(|| Error::InvalidSpec(format!("no Nemenyi constant for k = {k}")))?;
    Ok(q * ((k * (k + 1)) as f64 / (6 * n) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub method: String,
    /// Mean over datasets of `100 (ref - base) / base`.
    pub mean_percent: f64,
    pub datasets_used: usize,
    /// Datasets skipped because the baseline scored 0.
    pub excluded: usize,
}

/// Mean percentage improvement of `reference` over every other method.
pub fn improvement_report(matrix: &ScoreMatrix, reference: &str) -> Result<Vec<Improvement>> {
    let r = matrix
        .method_index(reference)
        .ok_or_else(|| Error::InvalidSpec(format!("reference method '{reference}' is not in the matrix")))?;
    Ok((0..matrix.methods.len())
        .filter(|&m| m != r)
        .map(|m| {
            let mut sum = 0.0;
            let mut used = 0;
            let mut excluded = 0;
            for row in &matrix.scores {
                if row[m] == 0.0 {
                    excluded += 1;
                    continue;
                }
                sum += 100.0 * (row[r] - row[m]) / row[m];
                used += 1;
            }
            Improvement {
                method: matrix.methods[m].clone(),
                mean_percent: if used > 0 { sum / used as f64 } else { f64::NAN },
                datasets_used: used,
                excluded,
            }
        })
        .collect())
}

/// Everything needed to draw a critical-difference diagram elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub ranks: Vec<f64>,
    pub cd: Option<f64>,
    pub alpha: f64,
    /// `pairwise_p[i][j]` compares methods `i` and `j`; the diagonal is 1.
    pub pairwise_p: Vec<Vec<f64>>,
    pub two_sided: bool,
    pub permutations: usize,
    pub exact: bool,
    pub reference: Option<String>,
    pub improvements: Vec<Improvement>,
    pub incomplete_datasets: Vec<String>,
}

#[allow(clippy::needless_range_loop)]
pub fn summarize(
    matrix: &ScoreMatrix,
    reference: Option<&str>,
    permutations: usize,
    seed: u64,
    incomplete: Vec<String>,
) -> Result<BenchSummary> {
    let k = matrix.methods.len();
    let n = matrix.datasets.len();
    let mut pairwise = vec![vec![1.0; k]; k];
    if n >= 2 {
        for i in 0..k {
            for j in i + 1..k {
                let p = paired_permutation_test(&matrix.column(i), &matrix.column(j), permutations, seed)?
                    .p_value;
                pairwise[i][j] = p;
                pairwise[j][i] = p;
            }
        }
    }
    let reference = reference.filter(|r| matrix.method_index(r).is_some());
    Ok(BenchSummary {
        methods: matrix.methods.clone(),
        datasets: matrix.datasets.clone(),
        ranks: average_ranks(matrix),
        cd: critical_difference(k, n, 0.05).ok(),
        alpha: 0.05,
        pairwise_p: pairwise,
        two_sided: true,
        permutations,
        exact: n <= EXACT_LIMIT,
        reference: reference.map(String::from),
        improvements: match reference {
            Some(r) => improvement_report(matrix, r)?,
            None => Vec::new(),
        },
        incomplete_datasets: incomplete,
    })
}

impl BenchSummary {
    pub fn to_markdown(&self, matrix: &ScoreMatrix) -> String {
        let mut md = String::new();
        let _ = writeln!(md, "# Benchmark summary\n");
        let _ = writeln!(
            md,
            "{} datasets, {} methods.\n",
            self.datasets.len(),
            self.methods.len()
        );
        let _ = writeln!(md, "| dataset | {} |", self.methods.join(" | "));
        let _ = writeln!(md, "|---|{}", "---|".repeat(self.methods.len()));
        for (d, row) in matrix.datasets.iter().zip(&matrix.scores) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            let _ = writeln!(md, "| {d} | {} |", cells.join(" | "));
        }
        let _ = writeln!(md, "\n## Average ranks\n");
        let _ = writeln!(md, "| method | rank |\n|---|---|");
        for (m, r) in self.methods.iter().zip(&self.ranks) {
            let _ = writeln!(md, "| {m} | {r:.3} |");
        }
        match self.cd {
            Some(cd) => {
                let _ = writeln!(
                    md,
                    "\nCritical difference (Nemenyi, alpha = {}): {cd:.4}",
                    self.alpha
                );
            }
            None => {
                let _ = writeln!(md, "\nCritical difference unavailable for this shape.");
            }
        }
        let _ = writeln!(md, "\n## Pairwise p-values (two-sided paired permutation test)\n");
        let _ = writeln!(md, "| | {} |", self.methods.join(" | "));
        let _ = writeln!(md, "|---|{}", "---|".repeat(self.methods.len()));
        for (m, row) in self.methods.iter().zip(&self.pairwise_p) {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.4}")).collect();
            let _ = writeln!(md, "| {m} | {} |", cells.join(" | "));
        }
        if let Some(r) = &self.reference {
            let _ = writeln!(md, "\n## Improvement of {r}\n");
            let _ = writeln!(md, "| over | mean % | datasets | excluded |\n|---|---|---|---|");
            for imp in &self.improvements {
                let _ = writeln!(
                    md,
                    "| {} | {:+.2} | {} | {} |",
                    imp.method, imp.mean_percent, imp.datasets_used, imp.excluded
                );
            }
        }
        if !self.incomplete_datasets.is_empty() {
            let _ = writeln!(
                md,
                "\nSkipped (missing methods): {}",
                self.incomplete_datasets.join(", ")
            );
        }
        md
    }

    /// `summary.md`, `ranks.csv` and `stats.json` in `dir`.
    pub fn write_bundle(&self, matrix: &ScoreMatrix, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        write("summary.md", self.to_markdown(matrix))?;
        let mut csv = String::from("method,average_rank\n");
        for (m, r) in self.methods.iter().zip(&self.ranks) {
            let _ = writeln!(csv, "{m},{r}");
        }
        write("ranks.csv", csv)?;
        write("stats.json", serde_json::to_string_pretty(self)? + "\n")
    }
}
