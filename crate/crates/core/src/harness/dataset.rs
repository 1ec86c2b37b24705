use std::path::{Path, PathBuf};

use rand::seq::index;

use crate::data::{LabeledExample, Supersample};
use crate::error::{Error, Result};
use crate::seeding::{rng_for, stream};

/// A labeled dataset loaded from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub num_classes: usize,
}

/// Reads a CSV with header `x_0, …, x_{p-1}, y`; labels are class indices.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let csv_err = |message: String| Error::Csv {
        path: PathBuf::from(path),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            ),
            _ => csv_err(e.to_string()),
        })?;
    let header = reader.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    let p = header.len().saturating_sub(1);
    let expected: Vec<String> = (0..p).map(|j| format!("x_{j}")).chain(["y".into()]).collect();
    if p == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(csv_err(format!(
            "header must be {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut examples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        let line = row + 2;
        let x = record
            .iter()
            .take(p)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|f| f.is_finite())
                    .ok_or_else(|| csv_err(format!("line {line}: bad feature `{v}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let y = record[p]
            .parse::<usize>()
            .map_err(|_| csv_err(format!("line {line}: bad label `{}`", &record[p])))?;
        examples.push(LabeledExample::new(x, y));
    }
    if examples.is_empty() {
        return Err(csv_err("no data rows".into()));
    }
    let num_classes = examples.iter().map(|e| e.y).max().unwrap_or(0) + 1;
    Ok(Dataset {
        examples,
        num_classes: num_classes.max(2),
    })
}

impl Dataset {
    /// `2n` distinct rows drawn without replacement, paired in draw order.
    pub fn sample_supersample(&self, n: usize, seed: u64) -> Result<Supersample> {
        if 2 * n > self.examples.len() {
            return Err(Error::Config(format!(
                "dataset has {} rows, a supersample of n = {n} needs {}",
                self.examples.len(),
                2 * n
            )));
        }
        let mut rng = rng_for(&[seed, stream::SUPERSAMPLE]);
        let picked = index::sample(&mut rng, self.examples.len(), 2 * n);
        Supersample::from_examples(
            picked.iter().map(|i| self.examples[i].clone()).collect(),
            self.num_classes,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_and_samples() {
        let f = write("x_0,x_1,y\n0.1,0.2,0\n0.3,0.4,1\n0.5,0.6,1\n0.7,0.8,0\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.examples.len(), 4);
        assert_eq!(d.examples[1], LabeledExample::new(vec![0.3, 0.4], 1));
        let z = d.sample_supersample(2, 1).unwrap();
        assert_eq!(z.n(), 2);
        let mut xs: Vec<f64> = z.examples().map(|e| e.x[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.1, 0.3, 0.5, 0.7]);
        assert!(d.sample_supersample(3, 1).is_err());
    }

    #[test]
    fn rejects_bad_files() {
        let f = write("a,b\n1,0\n");
        assert!(matches!(load_csv(f.path()), Err(Error::Csv { .. })));
        let f = write("x_0,y\n0.1,zero\n");
        let err = load_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(load_csv(Path::new("/nonexistent/data.csv")).is_err());
    }
}
