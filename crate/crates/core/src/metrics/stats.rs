//! Rank statistics used to summarize sweep results.

use crate::error::{Error, Result};

/// Average ranks (1-based); tied values share the mean of the ranks they
/// occupy.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j (0-based) hold equal values; average their 1-based ranks.
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling.
///
/// Fails on length mismatch, fewer than 2 points, non-finite values, or a
/// constant side (correlation undefined).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Data(format!(
            "spearman needs equal-length series, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Data("spearman needs at least 2 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Data("spearman input contains a non-finite value".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mean_x = rx.iter().sum::<f64>() / n;
    let mean_y = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..rx.len() {
        let dx = rx[i] - mean_x;
        let dy = ry[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::Data("spearman undefined for a constant series".into()));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_opposed_series_give_minus_one() {
        let r = spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_increasing_gives_plus_one() {
        let r = spearman(&[1.0, 5.0, 9.0], &[2.0, 3.0, 100.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tied_values_share_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
        // Hand-computed Pearson over ranks [1, 2.5, 2.5, 4] vs [1, 2, 3, 4]:
        // sqrt(0.9).
        let r = spearman(&[10.0, 20.0, 20.0, 30.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - 0.9_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(spearman(&[1.0], &[2.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[2.0]).is_err());
        assert!(spearman(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(spearman(&[1.0, f64::NAN], &[2.0, 3.0]).is_err());
    }
}
