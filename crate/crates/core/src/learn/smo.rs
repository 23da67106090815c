//! Soft-margin RBF support vector machine trained by sequential minimal
//! optimization.
//!
//! The dual problem solved is
//!
//! ```text
//! min_α  ½ αᵀQα − Σα    s.t.  yᵀα = 0,  0 ≤ α ≤ C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each iteration picks the maximal violating pair
//! `i = argmax_{I_up} −y_t G_t`, `j = argmin_{I_low} −y_t G_t` and solves the
//! two-variable subproblem analytically. Training stops once
//! `max_{I_up} − min_{I_low}` drops to the tolerance.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::{standardize_fit, Dataset, Standardizer};
use super::kernel::squared_distance;
use crate::features::{FeatureVector, N_FEATURES};
use crate::seed;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Above this many rows kernel rows are computed on demand instead of
/// caching the full Gram matrix.
const FULL_GRAM_LIMIT: usize = 3000;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
    pub tolerance: f64,
    /// Cap on pair updates.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: 0.125, tolerance: 1e-3, max_passes: 1_000_000 }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.c) || !positive(self.gamma) || !positive(self.tolerance) {
            return Err(Error::Validation("C, gamma and tolerance must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(Error::Validation("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// Raw solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ α_i y_i K(x_i, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final `m(α) − M(α)`.
    pub violation: f64,
    /// `Σα − ½ αᵀQα` (the dual objective in maximization form).
    pub objective: f64,
}

enum Gram<'a> {
    Full { n: usize, k: Vec<f64> },
    Lazy { rows: &'a [Vec<f64>], gamma: f64 },
}

impl Gram<'_> {
    fn row(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Gram::Full { n, k } => out.extend_from_slice(&k[i * n..(i + 1) * n]),
            Gram::Lazy { rows, gamma } => {
                out.extend(rows.iter().map(|r| (-gamma * squared_distance(&rows[i], r)).exp()))
            }
        }
    }
}

fn gram<'a>(rows: &'a [Vec<f64>], gamma: f64) -> Gram<'a> {
    let n = rows.len();
    if n > FULL_GRAM_LIMIT {
        return Gram::Lazy { rows, gamma };
    }
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = (-gamma * squared_distance(&rows[i], &rows[j])).exp();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    Gram::Full { n, k }
}

fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// Maximal violating pair and the gap `m − M`.
fn select_pair(order: &[usize], alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> Option<(usize, usize, f64)> {
    let (mut i, mut gmax) = (None, f64::NEG_INFINITY);
    let (mut j, mut gmin) = (None, f64::INFINITY);
    for &t in order {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && v > gmax {
            gmax = v;
            i = Some(t);
        }
        if in_low(alpha[t], y[t], c) && v < gmin {
            gmin = v;
            j = Some(t);
        }
    }
    Some((i?, j?, gmax - gmin))
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Solves the dual for `rows` with labels `y ∈ {−1, +1}`. The seed fixes
/// the scan order used to break ties during pair selection.
pub fn solve_dual(rows: &[Vec<f64>], y: &[f64], params: &SvmParams, seed: u64) -> Result<DualSolution> {
    params.validate()?;
    let n = rows.len();
    if y.len() != n {
        return Err(Error::Dimension { expected: n, found: y.len() });
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::ClassMissing("SVM training needs both classes".into()));
    }
    let c = params.c;
    let k = gram(rows, params.gamma);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let (mut ki, mut kj) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut iterations = 0;
    let violation = loop {
        let (i, j, gap) = select_pair(&order, &alpha, &grad, y, c).expect("both classes present");
        if gap <= params.tolerance {
            break gap;
        }
        if iterations >= params.max_passes {
            return Err(Error::Convergence { iterations, violation: gap });
        }
        iterations += 1;
        k.row(i, &mut ki);
        k.row(j, &mut kj);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        // Q_it = y_i y_t K_it
        let (di, dj) = ((alpha[i] - old_i) * y[i], (alpha[j] - old_j) * y[j]);
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    };
    let rho = compute_rho(&alpha, &grad, y, c);
    // ½ αᵀQα − Σα = ½ Σ α_t (G_t − 1)
    let primal_form: f64 = alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;
    Ok(DualSolution { alpha, rho, iterations, violation, objective: -primal_form })
}

/// A trained classifier. Inputs are projected onto `selected_features`,
/// standardized, and scored by the RBF expansion over the support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub format_version: u32,
    pub params: SvmParams,
    pub selected_features: Vec<usize>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    /// α_i y_i per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn standardizer(&self) -> Standardizer {
        Standardizer { means: self.feature_means.clone(), stds: self.feature_stds.clone() }
    }

    pub fn decision(&self, x: &FeatureVector) -> f64 {
        let z = self.standardizer().transform(&x.project(&self.selected_features));
        self.decision_standardized(&z)
    }

    /// Score for an already projected and standardized input.
    pub fn decision_standardized(&self, z: &[f64]) -> f64 {
        let gamma = self.params.gamma;
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * (-gamma * squared_distance(sv, z)).exp())
            .sum::<f64>()
            + self.bias
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        let k = model.selected_features.len();
        if k == 0 || model.feature_means.len() != k || model.feature_stds.len() != k {
            return Err(Error::Validation("inconsistent feature parameters in model".into()));
        }
        if model.support_vectors.len() != model.dual_coefs.len()
            || model.support_vectors.iter().any(|sv| sv.len() != k)
        {
            return Err(Error::Validation("inconsistent support vectors in model".into()));
        }
        Ok(model)
    }
}

/// Trains on the standardized `features` columns of `d`.
pub fn svm_train(d: &Dataset, params: &SvmParams, features: &[usize], seed: u64) -> Result<SvmModel> {
    d.require_both_classes()?;
    let mut selected = features.to_vec();
    selected.sort_unstable();
    selected.dedup();
    if selected.is_empty() {
        return Err(Error::Validation("no features selected".into()));
    }
    if let Some(&bad) = selected.iter().find(|&&f| f >= N_FEATURES) {
        return Err(Error::Range(format!("feature index {bad} out of range")));
    }
    let scaler = standardize_fit(d, &selected);
    let rows: Vec<Vec<f64>> =
        d.rows().iter().map(|r| scaler.transform(&r.features.project(&selected))).collect();
    let y: Vec<f64> = d.rows().iter().map(|r| r.label.sign()).collect();
    let sol = solve_dual(&rows, &y, params, seed)?;
    let (support_vectors, dual_coefs) = rows
        .into_iter()
        .zip(sol.alpha.iter().zip(&y))
        .filter(|(_, (a, _))| **a > 0.0)
        .map(|(row, (a, yi))| (row, a * yi))
        .unzip();
    Ok(SvmModel {
        format_version: MODEL_FORMAT_VERSION,
        params: *params,
        selected_features: selected,
        feature_means: scaler.means,
        feature_stds: scaler.stds,
        support_vectors,
        dual_coefs,
        bias: -sol.rho,
    })
}

pub fn svm_decision(m: &SvmModel, x: &FeatureVector) -> f64 {
    m.decision(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::dataset::{Label, Row};

    fn row(x: f64, y: f64, label: Label) -> Row {
        let mut f = [0.0; N_FEATURES];
        f[0] = x;
        f[1] = y;
        Row { features: FeatureVector(f), label, participant: "p".into(), question: format!("{x},{y}") }
    }

    fn separable() -> Dataset {
        let pos = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let mut rows: Vec<Row> = pos.iter().map(|&(x, y)| row(x, y, Label::Confident)).collect();
        rows.extend(pos.iter().map(|&(x, y)| row(x + 4.0, y + 4.0, Label::Unconfident)));
        Dataset::new(rows).unwrap()
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let d = separable();
        let m = svm_train(&d, &SvmParams::default(), &[0, 1], 0).unwrap();
        for r in d.rows() {
            assert_eq!(m.decision(&r.features) > 0.0, r.label.is_confident());
        }
        assert!(m.decision(&row(-0.5, -0.5, Label::Confident).features) > 0.0);
        let sum: f64 = m.dual_coefs.iter().sum();
        assert!(sum.abs() < 1e-9);
        assert!(m.dual_coefs.iter().all(|c| c.abs() <= m.params.c + 1e-12));
        assert!(!m.support_vectors.is_empty());
    }

    #[test]
    fn single_class_rejected() {
        let rows = (0..4).map(|i| row(i as f64, 0.0, Label::Confident)).collect();
        let d = Dataset::new(rows).unwrap();
        assert!(matches!(svm_train(&d, &SvmParams::default(), &[0], 0), Err(Error::ClassMissing(_))));
    }

    #[test]
    fn iteration_cap_reports_convergence_error() {
        let params = SvmParams { max_passes: 1, tolerance: 1e-12, ..SvmParams::default() };
        match svm_train(&separable(), &params, &[0, 1], 0) {
            Err(Error::Convergence { iterations: 1, violation }) => assert!(violation > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn model_json_round_trip() {
        let m = svm_train(&separable(), &SvmParams::default(), &[1, 0], 3).unwrap();
        assert_eq!(m.selected_features, [0, 1]);
        let back = SvmModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let broken = m.to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(SvmModel::from_json(&broken).is_err());
    }

    #[test]
    fn duplicating_a_non_support_row_keeps_decision() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [3.0, 3.0], [4.0, 3.0], [3.0, 4.0], [4.0, 4.0]];
        let y = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        let params = SvmParams { tolerance: 1e-10, ..SvmParams::default() };
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
        let a = solve_dual(&rows, &y, &params, 0).unwrap();
        // (0, 0) lies deepest in the positive class
        assert_eq!(a.alpha[0], 0.0);
        let mut rows2 = rows.clone();
        rows2.push(rows[0].clone());
        let mut y2 = y.to_vec();
        y2.push(1.0);
        let b = solve_dual(&rows2, &y2, &params, 0).unwrap();
        let decide = |sol: &DualSolution, rows: &[Vec<f64>], ys: &[f64], x: &[f64]| {
            rows.iter()
                .zip(sol.alpha.iter().zip(ys))
                .map(|(r, (a, yi))| a * yi * (-params.gamma * squared_distance(r, x)).exp())
                .sum::<f64>()
                - sol.rho
        };
        for x in [[0.0, 0.0], [2.0, 2.0], [5.0, 1.0], [-1.0, 3.0]] {
            let da = decide(&a, &rows, &y, &x);
            let db = decide(&b, &rows2, &y2, &x);
            assert!((da - db).abs() < 1e-6, "{da} vs {db}");
        }
    }
}
