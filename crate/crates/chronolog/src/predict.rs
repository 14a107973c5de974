//! Execution-time prediction and accuracy evaluation.
//!
//! An estimate is the dot product of fitted per-event constants with the
//! predicate's event counts at the given input sizes. Head-metric
//! constants come from the regression; builtin and operator constants are
//! measured directly and added on top. Accuracy is summarized per
//! benchmark as a relative error and per model as the root mean square of
//! those errors.

use std::collections::BTreeMap;
use std::time::Instant;

use num::ToPrimitive;

use crate::analysis::{AnalysisError, Analyzer, BoundKind, PredCostSet};
use crate::bench::Benchmark;
use crate::calibrate::{ModelFit, PlatformProfile};
use crate::metric::{CostModel, Metric};
use crate::vm::{profile, TimingError};

#[derive(Debug, thiserror::Error)]
pub enum PredictError {
    #[error("observed duration must be positive, got {0}")]
    NonPositiveObserved(f64),
    #[error("cannot aggregate an empty error list")]
    EmptyErrors,
    #[error("no benchmarks to evaluate")]
    EmptySuite,
    #[error("profile has no fit for model `{0}`")]
    MissingFit(String),
    #[error("no measured constant for builtin {0}")]
    MissingBuiltin(String),
    #[error("cost evaluation failed: {0}")]
    Cost(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Timing(#[from] TimingError),
}

/// K̄ · C̄.
pub fn predict_dot(k: &[f64], c: &[f64]) -> f64 {
    assert_eq!(k.len(), c.len());
    k.iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Estimated nanoseconds for one call, from fitted head-metric constants
/// plus measured constants for every builtin the predicate touches.
pub fn predict_time(
    model: &CostModel,
    k: &[f64],
    builtins: &BTreeMap<String, f64>,
    costs: &PredCostSet,
    sizes: &[Option<i64>],
) -> Result<f64, PredictError> {
    assert_eq!(model.len(), k.len(), "constants must align with the model");
    let eval = |m: &Metric| -> Result<f64, PredictError> {
        let v = costs
            .cost(m)
            .eval(sizes)
            .map_err(|e| PredictError::Cost(e.to_string()))?;
        v.to_f64()
            .ok_or_else(|| PredictError::Cost(format!("count {v} does not fit in f64")))
    };

    let mut total = 0.0;
    for (comp, &ki) in model.components.iter().zip(k) {
        total += ki * eval(comp)?;
    }
    for metric in costs.per_metric.keys() {
        let Metric::Call(sig) = metric else { continue };
        if model.index_of(metric).is_some() {
            continue;
        }
        let kc = builtins
            .get(&sig.to_string())
            .copied()
            .ok_or_else(|| PredictError::MissingBuiltin(sig.to_string()))?;
        total += kc * eval(metric)?;
    }
    Ok(total)
}

/// 100·|estimate − observed| / observed.
pub fn relative_error(estimate: f64, observed: f64) -> Result<f64, PredictError> {
    if observed <= 0.0 {
        return Err(PredictError::NonPositiveObserved(observed));
    }
    Ok(100.0 * (estimate - observed).abs() / observed)
}

/// Root of the mean of squared per-benchmark errors.
pub fn global_error(errors: &[f64]) -> Result<f64, PredictError> {
    if errors.is_empty() {
        return Err(PredictError::EmptyErrors);
    }
    let mean_sq = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    Ok(mean_sq.sqrt())
}

/// Ascending by S; ties go to the model with fewer components.
pub fn rank_models(mut fits: Vec<ModelFit>) -> Vec<ModelFit> {
    fits.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.v.cmp(&b.v)));
    fits
}

#[derive(Debug, Clone)]
pub struct ModelEstimate {
    pub estimate_ns: f64,
    pub rel_error_pct: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub id: String,
    pub size: i64,
    pub observed_ns: f64,
    pub analysis_seconds: f64,
    /// Aligned with the report's model list.
    pub estimates: Vec<ModelEstimate>,
}

#[derive(Debug, Clone)]
pub struct AccuracyReport {
    /// Model signatures, step-only baseline always included.
    pub models: Vec<String>,
    pub rows: Vec<BenchmarkRow>,
    /// Per-model global error, aligned with `models`.
    pub global_error_pct: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Random inputs per benchmark.
    pub inputs_per_program: usize,
    /// Timing samples per input.
    pub runs_per_input: usize,
    /// Goal executions inside each timing sample.
    pub inner_iters: u64,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            inputs_per_program: 10,
            runs_per_input: 5,
            inner_iters: 64,
            seed: 0,
        }
    }
}

/// Runs the observation protocol over the benchmarks and scores every
/// requested model against the measurements. The step-only model is
/// always scored as a baseline.
pub fn evaluate(
    benchmarks: &[Benchmark],
    platform: &PlatformProfile,
    models: &[CostModel],
    opts: &EvalOptions,
) -> Result<AccuracyReport, PredictError> {
    if benchmarks.is_empty() {
        return Err(PredictError::EmptySuite);
    }
    let mut model_list: Vec<CostModel> = models.to_vec();
    if !model_list.iter().any(|m| *m == CostModel::step_only()) {
        model_list.push(CostModel::step_only());
    }
    let fits: Vec<&crate::calibrate::StoredFit> = model_list
        .iter()
        .map(|m| {
            platform
                .find_fit(m)
                .ok_or_else(|| PredictError::MissingFit(m.signature()))
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for bench in benchmarks {
        let t0 = Instant::now();
        let mut analyzer = Analyzer::new(&bench.program, BoundKind::Exact)?;
        let costs = analyzer.cost_set(&bench.entry)?;
        let analysis_seconds = t0.elapsed().as_secs_f64();

        let n = bench.default_size;
        let mut samples = Vec::new();
        for i in 0..opts.inputs_per_program {
            let seed = opts
                .seed
                .wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let goal = bench.goal(n, seed);
            let timing = profile(&bench.program, &goal, opts.runs_per_input, opts.inner_iters)?;
            samples.extend(timing.per_exec_ns);
        }
        let observed_ns = samples.iter().sum::<f64>() / samples.len() as f64;

        let sizes = bench.size_args(n);
        let mut estimates = Vec::new();
        for (model, fit) in model_list.iter().zip(&fits) {
            let estimate_ns =
                predict_time(model, &fit.k, &platform.builtins, &costs, &sizes)?;
            let rel_error_pct = relative_error(estimate_ns, observed_ns)?;
            estimates.push(ModelEstimate {
                estimate_ns,
                rel_error_pct,
            });
        }
        rows.push(BenchmarkRow {
            id: bench.id.to_string(),
            size: n,
            observed_ns,
            analysis_seconds,
            estimates,
        });
    }

    let mut global_error_pct = Vec::new();
    for mi in 0..model_list.len() {
        let errs: Vec<f64> = rows.iter().map(|r| r.estimates[mi].rel_error_pct).collect();
        global_error_pct.push(global_error(&errs)?);
    }
    Ok(AccuracyReport {
        models: model_list.iter().map(|m| m.signature()).collect(),
        rows,
        global_error_pct,
        seed: opts.seed,
    })
}

impl AccuracyReport {
    /// Fixed-width rendering, one block per model.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("benchmark        size   observed      analysis\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<16} {:>4}   {:>10}   {:>8.3}s\n",
                r.id,
                r.size,
                fmt_ns(r.observed_ns),
                r.analysis_seconds
            ));
        }
        for (mi, sig) in self.models.iter().enumerate() {
            out.push_str(&format!("\nmodel: {sig}\n"));
            out.push_str("  benchmark        estimate      observed      error\n");
            for r in &self.rows {
                let e = &r.estimates[mi];
                out.push_str(&format!(
                    "  {:<16} {:>10}   {:>10}   {:>6.1}%\n",
                    r.id,
                    fmt_ns(e.estimate_ns),
                    fmt_ns(r.observed_ns),
                    e.rel_error_pct
                ));
            }
            out.push_str(&format!(
                "  global error: {:.1}%\n",
                self.global_error_pct[mi]
            ));
        }
        out
    }

    /// Line-oriented rendering: one record per line, `key=value` fields.
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("seed={}\n", self.seed));
        for r in &self.rows {
            out.push_str(&format!(
                "benchmark={} size={} observed_ns={:.1} analysis_s={:.6}\n",
                r.id, r.size, r.observed_ns, r.analysis_seconds
            ));
        }
        for (mi, sig) in self.models.iter().enumerate() {
            for r in &self.rows {
                let e = &r.estimates[mi];
                out.push_str(&format!(
                    "estimate benchmark={} model=\"{}\" estimate_ns={:.1} observed_ns={:.1} error_pct={:.2}\n",
                    r.id, sig, e.estimate_ns, r.observed_ns, e.rel_error_pct
                ));
            }
            out.push_str(&format!(
                "global model=\"{}\" error_pct={:.2}\n",
                sig, self.global_error_pct[mi]
            ));
        }
        out
    }
}

fn fmt_ns(ns: f64) -> String {
    if ns >= 1_000_000.0 {
        format!("{:.2} ms", ns / 1_000_000.0)
    } else if ns >= 1_000.0 {
        format!("{:.2} µs", ns / 1_000.0)
    } else {
        format!("{ns:.0} ns")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::predicate_cost;
    use crate::bench::bundled_benchmarks;
    use crate::lang::term::PredSig;
    use crate::vm::builtin_time_targets;

    #[test]
    fn estimate_is_the_dot_product() {
        let k = [26.56, 10.81, 8.60, 6.17, 6.39];
        let c = [100.0, 50.0, 30.0, 20.0, 20.0];
        assert!((predict_dot(&k, &c) - 3705.7).abs() < 1e-9);
        assert_eq!(predict_dot(&k, &[0.0; 5]), 0.0);
        // Linearity.
        let c2 = [7.0, 1.0, 9.0, 2.0, 4.0];
        let mixed: Vec<f64> = c.iter().zip(c2).map(|(a, b)| 3.0 * a + b).collect();
        let lhs = predict_dot(&k, &mixed);
        let rhs = 3.0 * predict_dot(&k, &c) + predict_dot(&k, &c2);
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn relative_error_is_symmetric_in_magnitude() {
        assert_eq!(relative_error(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(relative_error(150.0, 100.0).unwrap(), 50.0);
        assert_eq!(relative_error(50.0, 100.0).unwrap(), 50.0);
        assert!(relative_error(1.0, 0.0).is_err());
        assert!(relative_error(1.0, -3.0).is_err());
    }

    #[test]
    fn global_error_matches_published_aggregates() {
        // Step-model errors: the aggregate lands near the published 58.45.
        let g = global_error(&[45.0, 38.0, 80.0, 43.0, 38.0, 85.0]).unwrap();
        assert!((g - 58.29).abs() < 0.05, "got {g}");
        assert!((g - 58.45).abs() < 1.0);
        // Four-component model errors, published aggregate 21.48.
        let g = global_error(&[35.0, 14.0, 18.0, 24.0, 5.0, 22.0]).unwrap();
        assert!((g - 21.72).abs() < 0.05, "got {g}");
        assert!((g - 21.48).abs() < 1.0);

        assert_eq!(global_error(&[7.5]).unwrap(), 7.5);
        let c = global_error(&[4.0, 4.0, 4.0]).unwrap();
        assert!((c - 4.0).abs() < 1e-12);
        assert!(global_error(&[]).is_err());
    }

    fn fit_with(s: f64, v: usize) -> ModelFit {
        ModelFit {
            model: CostModel::new(vec![Metric::Step; v.max(1)]),
            k: vec![1.0; v.max(1)],
            rss: 0.0,
            mrss: s * s,
            s,
            m: 100,
            v,
            warnings: vec![],
        }
    }

    #[test]
    fn models_rank_by_standard_error_then_size() {
        let fits = vec![
            fit_with(13.7, 4),
            fit_with(6.2, 5),
            fit_with(68.3, 1),
            fit_with(9.4, 3),
        ];
        let ranked = rank_models(fits);
        let order: Vec<f64> = ranked.iter().map(|f| f.s).collect();
        assert_eq!(order, vec![6.2, 9.4, 13.7, 68.3]);

        let tied = rank_models(vec![fit_with(5.0, 5), fit_with(5.0, 3)]);
        assert_eq!(tied[0].v, 3);
        assert_eq!(tied.len(), 2);
    }

    #[test]
    fn predicted_time_merges_fitted_and_measured_constants() {
        let benches = bundled_benchmarks();
        let append = benches.iter().find(|b| b.id == "append").unwrap();
        let costs =
            predicate_cost(&append.program, &PredSig::new("app", 3), BoundKind::Exact).unwrap();
        let model = CostModel::new(vec![Metric::Step, Metric::Giunif]);
        let builtins = BTreeMap::new();
        let est = predict_time(
            &model,
            &[10.0, 1.0],
            &builtins,
            &costs,
            &[Some(10), Some(10), None],
        )
        .unwrap();
        // step = n+1 at 10 ns, giunif = 3n+1 at 1 ns.
        assert!((est - (110.0 + 31.0)).abs() < 1e-9);

        let evpol = benches.iter().find(|b| b.id == "evpol").unwrap();
        let costs =
            predicate_cost(&evpol.program, &PredSig::new("evpol", 3), BoundKind::Exact).unwrap();
        let model = CostModel::step_only();
        let err = predict_time(&model, &[10.0], &builtins, &costs, &[Some(10), None, None])
            .unwrap_err();
        assert!(matches!(err, PredictError::MissingBuiltin(_)));

        let mut builtins = BTreeMap::new();
        builtins.insert("is/2".into(), 5.0);
        builtins.insert("*/2".into(), 2.0);
        builtins.insert("+/2".into(), 3.0);
        let est = predict_time(&model, &[10.0], &builtins, &costs, &[Some(10), None, None])
            .unwrap();
        // step = n+1; is, *, + each fire n times.
        assert!((est - (110.0 + 50.0 + 20.0 + 30.0)).abs() < 1e-9);
    }

    #[test]
    fn evaluation_reports_every_model_with_a_baseline() {
        let mut platform = PlatformProfile::new("test", 3);
        platform.add_fit(&ModelFit {
            model: CostModel::step_only(),
            k: vec![100.0],
            rss: 0.0,
            mrss: 0.0,
            s: 1.0,
            m: 50,
            v: 1,
            warnings: vec![],
        });
        for sig in builtin_time_targets() {
            platform.builtins.insert(sig.to_string(), 20.0);
        }
        let benches: Vec<_> = bundled_benchmarks()
            .into_iter()
            .filter(|b| b.id == "append" || b.id == "evpol")
            .collect();
        let opts = EvalOptions {
            inputs_per_program: 2,
            runs_per_input: 2,
            inner_iters: 16,
            seed: 5,
        };
        let report = evaluate(&benches, &platform, &[], &opts).unwrap();
        assert_eq!(report.models, vec![CostModel::step_only().signature()]);
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.global_error_pct.len(), 1);
        for row in &report.rows {
            assert!(row.observed_ns > 0.0);
            assert!(row.estimates[0].estimate_ns > 0.0);
        }
        let table = report.render_table();
        assert!(table.contains("global error"));
        let records = report.render_records();
        assert!(records.lines().any(|l| l.starts_with("estimate benchmark=append")));

        assert!(matches!(
            evaluate(&[], &platform, &[], &opts),
            Err(PredictError::EmptySuite)
        ));
        let missing = evaluate(&benches, &platform, &[CostModel::full()], &opts);
        assert!(matches!(missing, Err(PredictError::MissingFit(_))));
    }
}
