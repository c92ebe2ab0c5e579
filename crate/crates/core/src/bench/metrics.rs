use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::recognizer::{solve_problem, Environment, RecognitionError, RecognitionProblem};
use crate::RankedDistribution;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Also score every intermediate observation step.
    pub per_step: bool,
}

/// Recognition quality of one argmax set against the true goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub f1: f64,
}

impl StepMetrics {
    pub fn from_argmax<S: AsRef<str>>(step: usize, argmax: &[S], truth: &str, intentions: usize) -> Self {
        let hit = argmax.iter().any(|a| a.as_ref() == truth);
        let tpr = if hit { 1.0 } else { 0.0 };
        let false_positives = argmax.len() - usize::from(hit);
        let fpr = if intentions > 1 { false_positives as f64 / (intentions - 1) as f64 } else { 0.0 };
        let precision = if argmax.is_empty() { 0.0 } else { tpr / argmax.len() as f64 };
        let f1 = if precision + tpr > 0.0 { 2.0 * precision * tpr / (precision + tpr) } else { 0.0 };
        Self { step, tpr, fpr, precision, f1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMetrics {
    pub problem_id: String,
    pub intentions: usize,
    pub observations: usize,
    pub truth: String,
    pub argmax: Vec<String>,
    #[serde(flatten)]
    pub last: StepMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_step: Option<Vec<StepMetrics>>,
}

#[derive(Debug, Clone)]
pub struct ProblemEvaluation {
    pub metrics: ProblemMetrics,
    pub distributions: Vec<RankedDistribution>,
}

/// Scores a problem at its final observation.
pub fn final_step_metrics(problem: &RecognitionProblem, distributions: &[RankedDistribution]) -> Result<StepMetrics, RecognitionError> {
    let truth = problem.intent_label().ok_or_else(|| RecognitionError::IntentNotInIntentions(problem.intent_location.label()))?;
    let last = distributions.last().ok_or(RecognitionError::NoObservations)?;
    Ok(StepMetrics::from_argmax(last.observation_count, &last.argmax_labels(), &truth, problem.intentions.len()))
}

pub fn evaluate_problem(problem: &RecognitionProblem, env: &Environment, opts: EvalOptions) -> Result<ProblemEvaluation, BenchError> {
    let wrap = |source| BenchError::Problem { problem_id: problem.problem_id.clone(), source };
    if problem.observations.is_empty() {
        return Err(wrap(RecognitionError::NoObservations));
    }
    let distributions = solve_problem(problem, env).map_err(wrap)?;
    let last = final_step_metrics(problem, &distributions).map_err(wrap)?;
    let truth = problem.intent_label().expect("validated by solve_problem");
    let per_step = opts.per_step.then(|| {
        distributions
            .iter()
            .map(|d| StepMetrics::from_argmax(d.observation_count, &d.argmax_labels(), &truth, problem.intentions.len()))
            .collect()
    });
    let argmax = distributions.last().unwrap().argmax_labels().into_iter().map(str::to_string).collect();
    Ok(ProblemEvaluation {
        metrics: ProblemMetrics {
            problem_id: problem.problem_id.clone(),
            intentions: problem.intentions.len(),
            observations: problem.observations.len(),
            truth,
            argmax,
            last,
            per_step,
        },
        distributions,
    })
}

/// Averages of per-problem metrics over one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    /// |Obs| or |I| of the group; absent for the overall row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    pub tpr: f64,
    pub fpr: f64,
    pub f1: f64,
    pub problems: usize,
}

impl MetricsRow {
    fn average<'a>(group: Option<usize>, rows: impl IntoIterator<Item = &'a ProblemMetrics>) -> Self {
        let (mut tpr, mut fpr, mut f1, mut n) = (0.0, 0.0, 0.0, 0usize);
        for m in rows {
            tpr += m.last.tpr;
            fpr += m.last.fpr;
            f1 += m.last.f1;
            n += 1;
        }
        let d = n.max(1) as f64;
        Self { group, tpr: tpr / d, fpr: fpr / d, f1: f1 / d, problems: n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub overall: MetricsRow,
    pub by_observations: Vec<MetricsRow>,
    pub by_intentions: Vec<MetricsRow>,
}

impl MetricsReport {
    pub fn observation_group(&self, n: usize) -> Option<&MetricsRow> {
        self.by_observations.iter().find(|r| r.group == Some(n))
    }

    pub fn intention_group(&self, n: usize) -> Option<&MetricsRow> {
        self.by_intentions.iter().find(|r| r.group == Some(n))
    }
}

fn grouped(metrics: &[ProblemMetrics], key: impl Fn(&ProblemMetrics) -> usize) -> Vec<MetricsRow> {
    let mut groups: BTreeMap<usize, Vec<&ProblemMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(key(m)).or_default().push(m);
    }
    groups.into_iter().map(|(k, rows)| MetricsRow::average(Some(k), rows)).collect()
}

pub fn aggregate(metrics: &[ProblemMetrics]) -> MetricsReport {
    MetricsReport {
        overall: MetricsRow::average(None, metrics),
        by_observations: grouped(metrics, |m| m.observations),
        by_intentions: grouped(metrics, |m| m.intentions),
    }
}

#[derive(Debug, Clone)]
pub struct DatasetEvaluation {
    pub problems: Vec<ProblemEvaluation>,
    pub report: MetricsReport,
}

/// Evaluates problems in parallel; results keep the input order.
pub fn evaluate_dataset(problems: &[RecognitionProblem], env: &Environment, opts: EvalOptions) -> Result<DatasetEvaluation, BenchError> {
    if problems.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    let evaluated = problems
        .par_iter()
        .map(|p| evaluate_problem(p, env, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let metrics: Vec<ProblemMetrics> = evaluated.iter().map(|e| e.metrics.clone()).collect();
    Ok(DatasetEvaluation { report: aggregate(&metrics), problems: evaluated })
}

fn row_cells(out: &mut String, row: &MetricsRow) {
    let _ = write!(out, " {:>6.2} {:>6.2} {:>6.2}", row.tpr, row.fpr, row.f1);
}

fn section(out: &mut String, label: &str, rows: &[Vec<&MetricsRow>]) {
    for (i, cols) in rows.iter().enumerate() {
        let key = match cols[0].group {
            Some(g) => g.to_string(),
            None => "all".to_string(),
        };
        let _ = write!(out, "{:>5} {:>5}", if i == 0 { label } else { "" }, key);
        for row in cols {
            row_cells(out, row);
        }
        let _ = writeln!(out, " {:>5}", cols[0].problems);
    }
}

/// Aligned plain-text table: one block per grouping plus the overall row.
pub fn render_table(report: &MetricsReport) -> String {
    render_comparison(&[("", report)])
}

/// Side-by-side table of several runs over the same dataset, grouped rows
/// first by |Obs|, then by |I|.
pub fn render_comparison(runs: &[(&str, &MetricsReport)]) -> String {
    let mut out = String::new();
    if runs.is_empty() {
        return out;
    }
    if runs.iter().any(|(name, _)| !name.is_empty()) {
        let _ = write!(out, "{:11}", "");
        for (name, _) in runs {
            let _ = write!(out, " {:^20}", name);
        }
        out.push('\n');
    }
    let _ = write!(out, "{:>5} {:>5}", "", "group");
    for _ in runs {
        let _ = write!(out, " {:>6} {:>6} {:>6}", "TPR", "FPR", "F1");
    }
    let _ = writeln!(out, " {:>5}", "n");

    let columns = |pick: &dyn Fn(&MetricsReport) -> &[MetricsRow]| -> Vec<Vec<&MetricsRow>> {
        let first = pick(runs[0].1);
        (0..first.len())
            .map(|i| runs.iter().filter_map(|(_, r)| pick(r).get(i)).collect())
            .collect()
    };
    section(&mut out, "|Obs|", &columns(&|r| &r.by_observations));
    section(&mut out, "|I|", &columns(&|r| &r.by_intentions));
    let overall: Vec<&MetricsRow> = runs.iter().map(|(_, r)| &r.overall).collect();
    section(&mut out, "", &[overall]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn perfect_recognition() {
        let m = StepMetrics::from_argmax(3, &["g"], "g", 5);
        assert_eq!((m.tpr, m.fpr, m.precision, m.f1), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn full_tie() {
        let m = StepMetrics::from_argmax(3, &["a", "b", "g", "c", "d"], "g", 5);
        assert_eq!((m.tpr, m.fpr), (1.0, 1.0));
        assert!(close(m.precision, 0.2));
        assert!(close(m.f1, 1.0 / 3.0));
    }

    #[test]
    fn wrong_singleton() {
        let m = StepMetrics::from_argmax(3, &["a"], "g", 5);
        assert_eq!((m.tpr, m.fpr, m.f1), (0.0, 0.25, 0.0));
    }

    fn pm(id: &str, i: usize, o: usize, tpr: f64, fpr: f64) -> ProblemMetrics {
        let f1 = if tpr > 0.0 { 1.0 } else { 0.0 };
        ProblemMetrics {
            problem_id: id.into(),
            intentions: i,
            observations: o,
            truth: "g".into(),
            argmax: vec!["g".into()],
            last: StepMetrics { step: o, tpr, fpr, precision: tpr, f1 },
            per_step: None,
        }
    }

    #[test]
    fn overall_is_weighted_mean_of_groups() {
        let ms = vec![pm("a", 2, 1, 1.0, 0.0), pm("b", 5, 1, 0.0, 0.5), pm("c", 5, 3, 1.0, 0.0), pm("d", 2, 3, 1.0, 0.0), pm("e", 2, 3, 0.0, 1.0)];
        let r = aggregate(&ms);
        assert_eq!(r.by_observations.len(), 2);
        let weighted: f64 = r.by_observations.iter().map(|g| g.tpr * g.problems as f64).sum::<f64>() / 5.0;
        assert!(close(weighted, r.overall.tpr));
        assert!(close(r.overall.tpr, 0.6));
        assert_eq!(r.intention_group(2).unwrap().problems, 3);
        assert!(close(r.observation_group(3).unwrap().fpr, 1.0 / 3.0));
    }

    #[test]
    fn report_json_layout() {
        let r = aggregate(&[pm("a", 2, 1, 1.0, 0.0)]);
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["overall"].get("group").is_none());
        assert_eq!(v["by_observations"][0]["group"], 1);
        assert_eq!(v["by_intentions"][0]["problems"], 1);
        let back: MetricsReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn table_is_aligned() {
        let r = aggregate(&[pm("a", 2, 1, 1.0, 0.0), pm("b", 15, 10, 1.0, 0.0)]);
        let table = render_comparison(&[("same", &r), ("perturbed", &r)]);
        let widths: Vec<usize> = table.lines().skip(1).map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{table}");
        assert!(table.contains("|Obs|") && table.contains("all"));
        assert!(table.contains("  1.00   0.00   1.00"));
    }
}
