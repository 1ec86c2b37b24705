use crate::data::LabeledExample;

/// Label of the first training example whose features equal the query
/// exactly; class 0 otherwise.
pub(super) fn predict(train: &[&LabeledExample], queries: &[&[f64]]) -> Vec<usize> {
    queries
        .iter()
        .map(|q| {
            train
                .iter()
                .find(|e| e.x.as_slice() == *q)
                .map_or(0, |e| e.y)
        })
        .collect()
}
