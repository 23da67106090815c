use crate::features::N_FEATURES;
use crate::learn::Dataset;
use crate::{Error, Result};

/// Pearson r between each feature column and the label (confident = 1,
/// unconfident = 0). A constant column gets r = 0.
pub fn pearson_correlations(d: &Dataset) -> Result<[f64; N_FEATURES]> {
    if d.len() < 2 {
        return Err(Error::NoVariance);
    }
    let (c, u) = d.class_counts();
    if c == 0 || u == 0 {
        return Err(Error::NoVariance);
    }
    let n = d.len() as f64;
    let y: Vec<f64> = d.rows().iter().map(|r| if r.label.is_confident() { 1.0 } else { 0.0 }).collect();
    let y_mean = c as f64 / n;
    let syy: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let mut out = [0.0; N_FEATURES];
    for (f, r) in out.iter_mut().enumerate() {
        let x: Vec<f64> = d.rows().iter().map(|row| row.features[f]).collect();
        if x.iter().all(|&v| v == x[0]) {
            continue;
        }
        let x_mean = x.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - x_mean) * (b - y_mean)).sum();
        let sxx: f64 = x.iter().map(|a| (a - x_mean).powi(2)).sum();
        *r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::learn::{Label, Row};

    fn dataset(labels: &[bool], f0: impl Fn(bool, usize) -> f64) -> Dataset {
        Dataset::new(
            labels
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    let mut v = [0.0; N_FEATURES];
                    v[0] = f0(l, i);
                    v[1] = 7.0;
                    Row {
                        features: FeatureVector(v),
                        label: Label::from_confident(l),
                        participant: "p".into(),
                        question: format!("q{i}"),
                    }
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_and_negation() {
        let labels = [true, false, true, true, false];
        let r = pearson_correlations(&dataset(&labels, |l, _| if l { 1.0 } else { 0.0 })).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert_eq!(r[1], 0.0);
        let r = pearson_correlations(&dataset(&labels, |l, _| if l { -3.0 } else { 2.0 })).unwrap();
        assert!((r[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_textbook_formula() {
        let labels = [true, false, true, false, false, true];
        let xs = [2.0, 5.0, 1.0, 4.0, 6.0, 3.0];
        let r = pearson_correlations(&dataset(&labels, |_, i| xs[i])).unwrap()[0];
        // Direct computation of r with y = 1,0,1,0,0,1.
        let ys = [1.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let n = 6.0;
        let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let sxx: f64 = xs.iter().map(|a| a * a).sum();
        let syy: f64 = ys.iter().map(|a| a * a).sum();
        let expected = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn single_label_has_no_variance() {
        let d = dataset(&[true, true, true], |_, i| i as f64);
        assert!(matches!(pearson_correlations(&d), Err(Error::NoVariance)));
    }
}
