use crate::data::LabeledExample;

/// Fits `w` for `x ↦ 1{x > w}` on the first feature by minimizing training
/// 0-1 error.
///
/// Candidate cuts sit between consecutive distinct feature values. Among
/// minimizers the leftmost cut wins. An interior cut returns the midpoint
/// of its gap; predicting everything 1 returns 0.0 and predicting
/// everything 0 returns 1.0. A zero-error cut, when one exists, is unique.
pub fn threshold_erm_fit(train: &[&LabeledExample]) -> f64 {
    let mut pts: Vec<(f64, usize)> = train.iter().map(|e| (e.x[0], e.y)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total_zeros = pts.iter().filter(|p| p.1 == 0).count();

    // Cut at k: the first k points are predicted 0.
    // errors(k) = ones among the first k + zeros among the rest.
    let mut best_k = 0;
    let mut best_err = total_zeros;
    let (mut ones_left, mut zeros_left) = (0, 0);
    for k in 1..=pts.len() {
        if pts[k - 1].1 == 0 {
            zeros_left += 1;
        } else {
            ones_left += 1;
        }
        if k < pts.len() && pts[k].0 == pts[k - 1].0 {
            continue;
        }
        let err = ones_left + (total_zeros - zeros_left);
        if err < best_err {
            best_err = err;
            best_k = k;
        }
    }
    match best_k {
        0 => 0.0,
        k if k == pts.len() => 1.0,
        k => 0.5 * (pts[k - 1].0 + pts[k].0),
    }
}

pub(super) fn predict(w: f64, queries: &[&[f64]]) -> Vec<usize> {
    queries.iter().map(|q| (q[0] > w) as usize).collect()
}
