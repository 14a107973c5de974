//! Sample collection and least-squares fitting of per-event constants.

use std::collections::BTreeMap;

use crate::calibrate::matrix::{least_squares, residual_stats, Mat, MatrixError};
use crate::calibrate::suite::{cost_row, CalibrationProgram};
use crate::calibrate::CalibrateError;
use crate::metric::CostModel;
use crate::vm::{builtin_time_targets, profile, time_builtin};

/// Provenance of one sample row.
#[derive(Debug, Clone)]
pub struct SampleRow {
    pub program: String,
    pub size: i64,
    pub seed: u64,
}

/// The overdetermined system: one row per (program, input), one column per
/// model component, one observed duration per row.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    pub model: CostModel,
    pub c: Mat,
    pub t: Vec<f64>,
    pub rows: Vec<SampleRow>,
    /// Rows excluded because their timing carried a resolution warning.
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct CollectOptions {
    pub sizes: Vec<i64>,
    /// Timing samples per cell; the median is kept.
    pub reps: usize,
    /// Goal executions per timing sample.
    pub inner_iters: u64,
    pub seed: u64,
}

impl Default for CollectOptions {
    fn default() -> Self {
        CollectOptions {
            sizes: crate::calibrate::suite::default_sizes(),
            reps: 10,
            inner_iters: 256,
            seed: 0,
        }
    }
}

/// Runs every suite program at every size and pairs cost rows with
/// measured durations. Rows whose timing hit the clock-resolution
/// diagnostic are dropped and counted.
pub fn collect_samples(
    suite: &[CalibrationProgram],
    model: &CostModel,
    opts: &CollectOptions,
) -> Result<SampleMatrix, CalibrateError> {
    let mut rows = Vec::new();
    let mut t = Vec::new();
    let mut meta = Vec::new();
    let mut dropped = 0usize;

    let mut row_index = 0u64;
    for prog in suite {
        for &n in &opts.sizes {
            let seed = opts
                .seed
                .wrapping_add(row_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            row_index += 1;
            let goal = prog.goal(n, seed);
            let timing = profile(&prog.program, &goal, opts.reps, opts.inner_iters)?;
            if timing
                .warnings
                .iter()
                .any(|w| w.contains("timer resolution"))
            {
                dropped += 1;
                continue;
            }
            rows.push(cost_row(prog, model, n)?);
            t.push(timing.median_ns);
            meta.push(SampleRow {
                program: prog.id.to_string(),
                size: n,
                seed,
            });
        }
    }

    let m = rows.len();
    let v = model.len();
    if m <= v || (dropped > 0 && m <= 4 * v) {
        return Err(CalibrateError::InsufficientSamples { m, v, dropped });
    }
    Ok(SampleMatrix {
        model: model.clone(),
        c: Mat::from_rows(&rows),
        t,
        rows: meta,
        dropped,
    })
}

/// A fitted cost model: nanoseconds per event for each component, with
/// residual diagnostics.
#[derive(Debug, Clone)]
pub struct ModelFit {
    pub model: CostModel,
    /// ns per event, aligned with `model.components`.
    pub k: Vec<f64>,
    pub rss: f64,
    pub mrss: f64,
    pub s: f64,
    pub m: usize,
    pub v: usize,
    pub warnings: Vec<String>,
}

/// Fits `model` (a subset of the sampled components) against the sampled
/// durations.
pub fn fit_model(samples: &SampleMatrix, model: &CostModel) -> Result<ModelFit, CalibrateError> {
    let cols: Vec<usize> = model
        .components
        .iter()
        .map(|comp| {
            samples
                .model
                .index_of(comp)
                .ok_or_else(|| CalibrateError::ComponentMissing {
                    metric: comp.to_string(),
                })
        })
        .collect::<Result<_, _>>()?;

    let m = samples.c.rows();
    let mut proj = Mat::zeros(m, cols.len());
    for i in 0..m {
        for (jp, &j) in cols.iter().enumerate() {
            proj.set(i, jp, samples.c.get(i, j));
        }
    }

    let k = least_squares(&proj, &samples.t).map_err(|err| match err {
        MatrixError::RankDeficient { column, .. } => CalibrateError::Redundant {
            metric: model.components[column].to_string(),
            detail: err.to_string(),
        },
        other => CalibrateError::Matrix(other),
    })?;
    let stats = residual_stats(&proj, &samples.t, &k)?;

    let mut warnings = Vec::new();
    for (comp, &ki) in model.components.iter().zip(&k) {
        if ki < 0.0 {
            warnings.push(format!(
                "fitted constant for {comp} is negative ({ki:.2} ns); \
                 the model likely misattributes that component's work"
            ));
        }
    }

    Ok(ModelFit {
        model: model.clone(),
        k,
        rss: stats.rss,
        mrss: stats.mrss,
        s: stats.s,
        m,
        v: cols.len(),
        warnings,
    })
}

/// Measures every registered builtin and arithmetic operator directly.
/// These constants never enter the regression; predictions add them in.
pub fn calibrate_builtins(reps: u64) -> Result<BTreeMap<String, f64>, CalibrateError> {
    let mut out = BTreeMap::new();
    for sig in builtin_time_targets() {
        let k = time_builtin(&sig, reps)?;
        out.insert(sig.to_string(), k);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::suite::builtin_calibration_suite;
    use crate::metric::Metric;

    /// Synthetic sample matrix built from real suite cost rows, with
    /// durations manufactured from a known constant vector.
    fn synthetic_samples(k_true: &[f64]) -> SampleMatrix {
        let suite = builtin_calibration_suite().unwrap();
        let model = CostModel::full();
        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for prog in &suite {
            for n in [2_i64, 5, 9, 14, 20] {
                rows.push(cost_row(prog, &model, n).unwrap());
                meta.push(SampleRow {
                    program: prog.id.to_string(),
                    size: n,
                    seed: 0,
                });
            }
        }
        let c = Mat::from_rows(&rows);
        let t = c.mul_vec(k_true);
        SampleMatrix {
            model,
            c,
            t,
            rows: meta,
            dropped: 0,
        }
    }

    #[test]
    fn suite_rows_recover_known_constants() {
        let k_true = [20.0, 10.0, 10.0, 8.0, 6.0, 6.0];
        let samples = synthetic_samples(&k_true);
        let fit = fit_model(&samples, &CostModel::full()).unwrap();
        assert_eq!(fit.m, 50);
        assert_eq!(fit.v, 6);
        for (kh, kt) in fit.k.iter().zip(k_true) {
            assert!(((kh - kt) / kt).abs() <= 1e-9, "{kh} vs {kt}");
        }
        assert!(fit.s < 1e-6);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn negative_constants_are_flagged() {
        let k_true = [20.0, -5.0, 10.0, 8.0, 6.0, 6.0];
        let samples = synthetic_samples(&k_true);
        let fit = fit_model(&samples, &CostModel::full()).unwrap();
        assert!((fit.k[1] + 5.0).abs() <= 1e-6);
        assert_eq!(fit.warnings.len(), 1);
        assert!(fit.warnings[0].contains("nargs"));
    }

    #[test]
    fn submodels_project_columns() {
        let k_true = [20.0, 0.0, 10.0, 8.0, 6.0, 6.0];
        let samples = synthetic_samples(&k_true);
        let fit = fit_model(&samples, &CostModel::five_component()).unwrap();
        assert_eq!(fit.v, 5);
        // nargs carried no signal, so the five-component fit is exact.
        assert!(fit.s < 1e-6);
        assert!((fit.k[0] - 20.0).abs() < 1e-6);
    }

    #[test]
    fn missing_component_is_an_error() {
        let samples = synthetic_samples(&[20.0, 10.0, 10.0, 8.0, 6.0, 6.0]);
        let model = CostModel::new(vec![Metric::Step, Metric::call("is", 2)]);
        assert!(matches!(
            fit_model(&samples, &model),
            Err(CalibrateError::ComponentMissing { .. })
        ));
    }

    #[test]
    fn real_timing_collection_produces_a_fit() {
        let suite = builtin_calibration_suite().unwrap();
        let opts = CollectOptions {
            sizes: vec![6, 14, 22],
            reps: 4,
            inner_iters: 64,
            seed: 7,
        };
        let samples = collect_samples(&suite, &CostModel::full(), &opts).unwrap();
        assert_eq!(samples.c.cols(), 6);
        assert!(samples.c.rows() + samples.dropped == 30);
        if samples.dropped == 0 {
            let fit = fit_model(&samples, &CostModel::full()).unwrap();
            assert!(fit.k.iter().all(|k| k.is_finite()));
        }
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let suite = builtin_calibration_suite().unwrap();
        let opts = CollectOptions {
            sizes: vec![5],
            reps: 2,
            inner_iters: 16,
            seed: 1,
        };
        // 10 programs × 1 size = 10 rows; needs strictly more than v.
        let thin = &suite[..3];
        assert!(matches!(
            collect_samples(thin, &CostModel::full(), &opts),
            Err(CalibrateError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn builtin_constants_cover_the_operator_set() {
        let map = calibrate_builtins(64).unwrap();
        for key in ["is/2", "+/2", "*/2", "=:=/2", ">/2"] {
            assert!(map.contains_key(key), "missing {key}");
        }
        assert!(map.values().all(|k| k.is_finite() && *k >= 0.0));
    }
}
