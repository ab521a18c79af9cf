//! Target functions, grid sampling, and CSV ingestion for train/test data.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

/// One training or test example: a network input and the desired output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub target: f64,
}

/// An ordered collection of samples.
///
/// Order is preserved and significant: the gradient phase visits samples
/// in stored order, so two datasets with the same points in different
/// orders are different training inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    label: String,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset is empty")]
    Empty,
    #[error("target function is undefined at x = {x}")]
    UndefinedAt { x: f64 },
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },
    #[error("unknown builtin function {0:?}")]
    UnknownBuiltin(String),
    #[error("{path}, line {line}: {reason}")]
    Malformed {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, label: impl Into<String>) -> Self {
        Dataset {
            samples,
            label: label.into(),
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Writes the dataset as two-column CSV (`x,y` header) using the shortest
    /// round-trip decimal form, so a reload reproduces the values bit-exactly.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = String::from("x,y\n");
        for s in &self.samples {
            out.push_str(&format!("{},{}\n", s.x, s.target));
        }
        fs::File::create(path)?.write_all(out.as_bytes())
    }
}

/// The benchmark target: `10·arctan((x−0.2)(x−0.7)(x+0.8)/(x+1.4))`.
///
/// Undefined at the pole of the inner rational, x = −1.4.
pub fn g2_eval(x: f64) -> Result<f64, DataError> {
    if x == -1.4 {
        return Err(DataError::UndefinedAt { x });
    }
    Ok(10.0 * ((x - 0.2) * (x - 0.7) * (x + 0.8) / (x + 1.4)).atan())
}

/// Looks up a builtin target function by name.
pub fn builtin_function(name: &str) -> Result<fn(f64) -> Result<f64, DataError>, DataError> {
    match name {
        "g2" => Ok(g2_eval),
        other => Err(DataError::UnknownBuiltin(other.to_string())),
    }
}

/// Samples `f` on `n` equally spaced points over `[lo, hi]`, endpoints included.
///
/// The first and last grid points are exactly `lo` and `hi`.
pub fn sample_uniform<F>(f: F, lo: f64, hi: f64, n: usize, label: &str) -> Result<Dataset, DataError>
where
    F: Fn(f64) -> Result<f64, DataError>,
{
    if !(lo < hi) {
        return Err(DataError::InvalidGrid {
            reason: format!("lower bound {lo} must be below upper bound {hi}"),
        });
    }
    if n < 2 {
        return Err(DataError::InvalidGrid {
            reason: format!("need at least 2 points, got {n}"),
        });
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let x = if i == 0 {
            lo
        } else if i == n - 1 {
            hi
        } else {
            lo + i as f64 * step
        };
        samples.push(Sample {
            x,
            target: f(x)?,
        });
    }
    Ok(Dataset::new(samples, label))
}

/// Samples `f` at one point per cell of an even `n`-cell partition of
/// `[lo, hi]`, each offset by the irrational fraction 1/sqrt(2) of a cell.
///
/// The offset keeps the points away from every uniform grid over the same
/// interval (midpoints would coincide with grid nodes whenever the counts
/// share a rational ratio), which makes this a natural held-out test set.
pub fn sample_interleaved<F>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    label: &str,
) -> Result<Dataset, DataError>
where
    F: Fn(f64) -> Result<f64, DataError>,
{
    if !(lo < hi) {
        return Err(DataError::InvalidGrid {
            reason: format!("lower bound {lo} must be below upper bound {hi}"),
        });
    }
    if n == 0 {
        return Err(DataError::InvalidGrid {
            reason: "need at least 1 point".to_string(),
        });
    }
    let step = (hi - lo) / n as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + (i as f64 + std::f64::consts::FRAC_1_SQRT_2) * step;
        samples.push(Sample {
            x,
            target: f(x)?,
        });
    }
    Ok(Dataset::new(samples, label))
}

/// Loads a two-column numeric CSV (`x,y`), with an optional single header line.
///
/// Accepts LF or CRLF line endings and scientific notation. The dataset label
/// is the file stem.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: display.clone(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| display.clone());

    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        match parse_row(line) {
            Ok(sample) => samples.push(sample),
            Err(reason) => {
                // A single non-numeric first row is a header.
                if idx == 0 {
                    continue;
                }
                return Err(DataError::Malformed {
                    path: display,
                    line: idx + 1,
                    reason,
                });
            }
        }
    }
    if samples.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(Dataset::new(samples, label))
}

fn parse_row(line: &str) -> Result<Sample, String> {
    let mut fields = line.split(',');
    let x_field = fields.next().unwrap_or("").trim();
    let y_field = fields.next().ok_or("expected two comma-separated columns")?.trim();
    if fields.next().is_some() {
        return Err("expected exactly two columns".to_string());
    }
    let x: f64 = x_field
        .parse()
        .map_err(|_| format!("cannot parse {x_field:?} as a number"))?;
    let target: f64 = y_field
        .parse()
        .map_err(|_| format!("cannot parse {y_field:?} as a number"))?;
    Ok(Sample { x, target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn g2_is_zero_at_numerator_roots() {
        for x in [0.2, 0.7, -0.8] {
            assert_eq!(g2_eval(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn g2_at_origin() {
        // 10·arctan(0.112/1.4) = 10·arctan(0.08)
        assert_relative_eq!(g2_eval(0.0).unwrap(), 10.0 * 0.08f64.atan(), max_relative = 1e-15);
        assert_relative_eq!(g2_eval(0.0).unwrap(), 0.798299, epsilon = 1e-6);
    }

    #[test]
    fn g2_rejects_the_pole() {
        assert!(matches!(g2_eval(-1.4), Err(DataError::UndefinedAt { .. })));
    }

    #[test]
    fn uniform_grid_three_points() {
        let ds = sample_uniform(|x| Ok(x), 0.0, 1.0, 3, "id").unwrap();
        let xs: Vec<f64> = ds.iter().map(|s| s.x).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn uniform_grid_two_points_is_the_endpoints() {
        let ds = sample_uniform(|x| Ok(x), -3.0, 7.0, 2, "id").unwrap();
        assert_eq!(ds.samples()[0].x, -3.0);
        assert_eq!(ds.samples()[1].x, 7.0);
    }

    #[test]
    fn uniform_grid_matches_benchmark_spacing() {
        let ds = sample_uniform(g2_eval, -1.0, 1.0, 201, "g2").unwrap();
        assert_eq!(ds.len(), 201);
        assert_eq!(ds.samples()[0].x, -1.0);
        assert_eq!(ds.samples()[200].x, 1.0);
        for w in ds.samples().windows(2) {
            assert_relative_eq!(w[1].x - w[0].x, 0.01, max_relative = 1e-12);
        }
    }

    #[test]
    fn uniform_grid_surfaces_domain_errors_with_the_offending_x() {
        let err = sample_uniform(g2_eval, -1.5, -1.3, 3, "bad").unwrap_err();
        match err {
            DataError::UndefinedAt { x } => assert_eq!(x, -1.4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn interleaved_grid_avoids_uniform_grid() {
        let train = sample_uniform(|x| Ok(x), -1.0, 1.0, 201, "train").unwrap();
        let test = sample_interleaved(|x| Ok(x), -1.0, 1.0, 126, "test").unwrap();
        assert_eq!(test.len(), 126);
        for t in test.iter() {
            assert!(train.iter().all(|s| s.x != t.x));
            assert!(t.x > -1.0 && t.x < 1.0);
        }
        // points stay ordered and one-per-cell
        for w in test.samples().windows(2) {
            assert!(w[1].x > w[0].x);
        }
    }

    #[test]
    fn csv_round_trip_and_header_handling() {
        let dir = std::env::temp_dir().join("bbfnn_data_tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pair.csv");
        fs::write(&path, "0,1\n1,2\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.samples()[0], Sample { x: 0.0, target: 1.0 });
        assert_eq!(ds.samples()[1], Sample { x: 1.0, target: 2.0 });
        assert_eq!(ds.label(), "pair");

        let with_header = dir.join("with_header.csv");
        fs::write(&with_header, "x,y\r\n0.25,-3e-2\r\n").unwrap();
        let ds = load_csv(&with_header).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.samples()[0], Sample { x: 0.25, target: -0.03 });

        // Round trip: written decimal forms reparse to identical values.
        let out = dir.join("round_trip.csv");
        let original = sample_uniform(g2_eval, -1.0, 1.0, 31, "rt").unwrap();
        original.write_csv(&out).unwrap();
        let reloaded = load_csv(&out).unwrap();
        assert_eq!(original.samples(), reloaded.samples());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = std::env::temp_dir().join("bbfnn_data_tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        fs::write(&path, "0,1\na,b\n").unwrap();
        match load_csv(&path).unwrap_err() {
            DataError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }

        let empty = dir.join("empty.csv");
        fs::write(&empty, "").unwrap();
        assert!(matches!(load_csv(&empty), Err(DataError::Empty)));
    }
}
