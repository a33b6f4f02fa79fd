//! Discretized joint spectral amplitudes: the central exchange format.
//!
//! A [`JsaGrid`] holds complex amplitudes on a rectangular `(w_s, w_i)` grid
//! with strictly increasing, uniform axes. On disk it is a `jsa-grid v1` CSV:
//!
//! ```text
//! # jsa-grid v1
//! # axis_s_ev: 1.75,1.7625,...
//! # axis_i_ev: 1.75,1.7625,...
//! re+imj,re+imj,...          <- one row per w_s node, row-major [s][i]
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips `f64`
//! bit-exactly.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex;
use thiserror::Error;

use crate::config::GridSpec;
use crate::float::Float;
use crate::input::InputJsa;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("axis `{axis}` must be strictly increasing at index {index}")]
    NotIncreasing { axis: &'static str, index: usize },
    #[error("axis `{axis}` is not uniform at index {index} (relative deviation {deviation:.3e})")]
    NonUniformAxis {
        axis: &'static str,
        index: usize,
        deviation: f64,
    },
    #[error("amplitude at [{s}][{i}] is not finite")]
    NonFiniteAmplitude { s: usize, i: usize },
    #[error("amplitude matrix is {rows}x{cols} but axes have {s} x {i} nodes")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        s: usize,
        i: usize,
    },
    #[error("axis `{axis}` needs at least 2 nodes")]
    TooFewNodes { axis: &'static str },
    #[error("malformed jsa-grid file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Relative tolerance for the uniform-axis check, required by the SVD
/// discretization downstream.
pub const AXIS_UNIFORMITY_TOL: f64 = 1.0e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid<T: Float> {
    axis_s: Vec<T>,
    axis_i: Vec<T>,
    amplitudes: Array2<Complex<T>>,
    pub metadata: BTreeMap<String, String>,
}

fn validate_axis<T: Float>(name: &'static str, axis: &[T]) -> Result<(), GridError> {
    if axis.len() < 2 {
        return Err(GridError::TooFewNodes { axis: name });
    }
    let step = axis[axis.len() - 1] - axis[0];
    let nominal = step / T::from_usize(axis.len() - 1).unwrap();
    for k in 1..axis.len() {
        let d = axis[k] - axis[k - 1];
        if d <= T::zero() {
            return Err(GridError::NotIncreasing {
                axis: name,
                index: k,
            });
        }
        let dev = ((d - nominal) / nominal).abs();
        if dev > T::lit(AXIS_UNIFORMITY_TOL) {
            return Err(GridError::NonUniformAxis {
                axis: name,
                index: k,
                deviation: dev.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

impl<T: Float> JsaGrid<T> {
    /// Build a grid, validating axes and amplitude finiteness.
    pub fn new(
        axis_s: Vec<T>,
        axis_i: Vec<T>,
        amplitudes: Array2<Complex<T>>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, GridError> {
        validate_axis("axis_s", &axis_s)?;
        validate_axis("axis_i", &axis_i)?;
        let (rows, cols) = amplitudes.dim();
        if rows != axis_s.len() || cols != axis_i.len() {
            return Err(GridError::ShapeMismatch {
                rows,
                cols,
                s: axis_s.len(),
                i: axis_i.len(),
            });
        }
        for ((s, i), a) in amplitudes.indexed_iter() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(GridError::NonFiniteAmplitude { s, i });
            }
        }
        Ok(Self {
            axis_s,
            axis_i,
            amplitudes,
            metadata,
        })
    }

    pub fn axis_s(&self) -> &[T] {
        &self.axis_s
    }

    pub fn axis_i(&self) -> &[T] {
        &self.axis_i
    }

    pub fn amplitudes(&self) -> &Array2<Complex<T>> {
        &self.amplitudes
    }

    pub fn axis_s_range(&self) -> (T, T) {
        (self.axis_s[0], self.axis_s[self.axis_s.len() - 1])
    }

    pub fn axis_i_range(&self) -> (T, T) {
        (self.axis_i[0], self.axis_i[self.axis_i.len() - 1])
    }

    pub fn is_square(&self) -> bool {
        self.axis_s.len() == self.axis_i.len()
    }

    /// Element-wise axis equality within `tol`, a precondition for
    /// symmetrization and the Schmidt decomposition.
    pub fn axes_match(&self, tol: T) -> bool {
        self.is_square()
            && self
                .axis_s
                .iter()
                .zip(self.axis_i.iter())
                .all(|(a, b)| (*a - *b).abs() <= tol)
    }

    /// Bilinear interpolation inside the bounding box, exactly zero outside.
    /// Real and imaginary parts interpolate independently.
    pub fn sample(&self, omega_s: T, omega_i: T) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let (Some((is0, ts)), Some((ii0, ti))) = (
            locate(&self.axis_s, omega_s),
            locate(&self.axis_i, omega_i),
        ) else {
            return zero;
        };
        let is1 = (is0 + 1).min(self.axis_s.len() - 1);
        let ii1 = (ii0 + 1).min(self.axis_i.len() - 1);
        let a00 = self.amplitudes[(is0, ii0)];
        let a01 = self.amplitudes[(is0, ii1)];
        let a10 = self.amplitudes[(is1, ii0)];
        let a11 = self.amplitudes[(is1, ii1)];
        let one = T::one();
        let w00 = (one - ts) * (one - ti);
        let w01 = (one - ts) * ti;
        let w10 = ts * (one - ti);
        let w11 = ts * ti;
        let lerp = |f: fn(&Complex<T>) -> T| {
            f(&a00) * w00 + f(&a01) * w01 + f(&a10) * w10 + f(&a11) * w11
        };
        Complex::new(lerp(|z| z.re), lerp(|z| z.im))
    }

    /// Write in the `jsa-grid v1` format.
    pub fn write_csv(&self, path: &Path) -> Result<(), GridError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# jsa-grid v1")?;
        writeln!(out, "# axis_s_ev: {}", join_reals(&self.axis_s))?;
        writeln!(out, "# axis_i_ev: {}", join_reals(&self.axis_i))?;
        for row in self.amplitudes.rows() {
            let cells: Vec<String> = row.iter().map(|z| format_complex(z)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Load a measured grid from the `jsa-grid v1` format. Metadata records
    /// the source path and a checksum of the file contents.
    pub fn read_csv(path: &Path) -> Result<Self, GridError> {
        let file = std::fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| GridError::Format("empty file".into()))??;
        if header.trim() != "# jsa-grid v1" {
            return Err(GridError::Format(format!(
                "unexpected header line `{header}` (want `# jsa-grid v1`)"
            )));
        }
        let axis_s = parse_axis_line(lines.next(), "axis_s_ev")?;
        let axis_i = parse_axis_line(lines.next(), "axis_i_ev")?;
        let mut rows: Vec<Vec<Complex<T>>> = Vec::with_capacity(axis_s.len());
        let mut checksum: u64 = 0xcbf2_9ce4_8422_2325;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for b in line.bytes() {
                checksum = (checksum ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
            }
            let row: Result<Vec<Complex<T>>, GridError> =
                line.split(',').map(parse_complex::<T>).collect();
            rows.push(row?);
        }
        if rows.len() != axis_s.len() {
            return Err(GridError::Format(format!(
                "{} amplitude rows for {} axis_s nodes",
                rows.len(),
                axis_s.len()
            )));
        }
        let cols = axis_i.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(GridError::Format(format!(
                "row {bad} has {} cells for {cols} axis_i nodes",
                rows[bad].len()
            )));
        }
        let flat: Vec<Complex<T>> = rows.into_iter().flatten().collect();
        let amplitudes = Array2::from_shape_vec((axis_s.len(), cols), flat)
            .expect("shape checked above");
        let mut metadata = BTreeMap::new();
        metadata.insert("source".into(), path.display().to_string());
        metadata.insert("checksum_fnv1a".into(), format!("{checksum:016x}"));
        Self::new(axis_s, axis_i, amplitudes, metadata)
    }
}

fn locate<T: Float>(axis: &[T], x: T) -> Option<(usize, T)> {
    let n = axis.len();
    if x < axis[0] || x > axis[n - 1] {
        return None;
    }
    // Uniform axis: direct index.
    let step = (axis[n - 1] - axis[0]) / T::from_usize(n - 1).unwrap();
    let t = (x - axis[0]) / step;
    let k = t
        .floor()
        .to_f64_lossy()
        .max(0.0)
        .min((n - 2) as f64) as usize;
    let frac = ((x - axis[k]) / step).max(T::zero()).min(T::one());
    Some((k, frac))
}

fn join_reals<T: Float>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| format_real(*x))
        .collect::<Vec<_>>()
        .join(",")
}

fn format_real<T: Float>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

fn format_complex<T: Float>(z: &Complex<T>) -> String {
    let im = z.im.to_f64_lossy();
    if im.is_sign_negative() {
        format!("{:.16e}-{:.16e}j", z.re.to_f64_lossy(), -im)
    } else {
        format!("{:.16e}+{:.16e}j", z.re.to_f64_lossy(), im)
    }
}

fn parse_axis_line<T: Float>(
    line: Option<std::io::Result<String>>,
    key: &str,
) -> Result<Vec<T>, GridError> {
    let line = line.ok_or_else(|| GridError::Format(format!("missing `# {key}:` line")))??;
    let prefix = format!("# {key}:");
    let rest = line
        .strip_prefix(&prefix)
        .ok_or_else(|| GridError::Format(format!("expected `{prefix} ...`, got `{line}`")))?;
    rest.split(',')
        .map(|tok| {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| GridError::Format(format!("bad axis value `{tok}` in {key}")))?;
            if !v.is_finite() {
                return Err(GridError::Format(format!("non-finite axis value in {key}")));
            }
            Ok(T::lit(v))
        })
        .collect()
}

/// Parse `re+imj` / `re-imj`. The split point is the last sign that is not an
/// exponent sign.
fn parse_complex<T: Float>(cell: &str) -> Result<Complex<T>, GridError> {
    let s = cell.trim();
    let body = s
        .strip_suffix(['j', 'J'])
        .ok_or_else(|| GridError::Format(format!("cell `{s}` lacks trailing j")))?;
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let k = split.ok_or_else(|| GridError::Format(format!("cell `{s}` has no imaginary part")))?;
    let re: f64 = body[..k]
        .parse()
        .map_err(|_| GridError::Format(format!("bad real part in `{s}`")))?;
    let im_str = &body[k..];
    let im: f64 = im_str
        .parse()
        .map_err(|_| GridError::Format(format!("bad imaginary part in `{s}`")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(GridError::Format(format!("non-finite amplitude `{s}`")));
    }
    Ok(Complex::new(T::lit(re), T::lit(im)))
}

/// Tabulate an input source on a uniform square grid.
pub fn evaluate_on_grid<T: Float>(
    source: &impl InputJsa<T>,
    spec: &GridSpec<T>,
) -> Result<JsaGrid<T>, GridError> {
    let axis = spec.axis();
    let n = axis.len();
    let amplitudes =
        Array2::from_shape_fn((n, n), |(s, i)| source.eval_real(axis[s], axis[i]));
    JsaGrid::new(axis.clone(), axis, amplitudes, BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PumpParams;
    use crate::input::SpdcJsa;
    use num_complex::Complex64;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_grid() -> JsaGrid<f64> {
        let axis = vec![1.0, 1.5, 2.0];
        let amps = Array2::from_shape_fn((3, 3), |(s, i)| c64(s as f64, i as f64 * 0.5 - 1.0));
        JsaGrid::new(axis.clone(), axis, amps, BTreeMap::new()).unwrap()
    }

    #[test]
    fn node_sampling_is_exact() {
        let g = small_grid();
        for (si, &ws) in g.axis_s().to_vec().iter().enumerate() {
            for (ii, &wi) in g.axis_i().to_vec().iter().enumerate() {
                assert_eq!(g.sample(ws, wi), g.amplitudes()[(si, ii)]);
            }
        }
    }

    #[test]
    fn constant_grid_interpolates_to_constant() {
        let axis = vec![0.0, 1.0, 2.0, 3.0];
        let amps = Array2::from_elem((4, 4), c64(2.5, -0.5));
        let g = JsaGrid::new(axis.clone(), axis, amps, BTreeMap::new()).unwrap();
        assert_eq!(g.sample(0.5, 2.75), c64(2.5, -0.5));
        assert_eq!(g.sample(1.25, 1.25), c64(2.5, -0.5));
    }

    #[test]
    fn outside_bounding_box_is_zero() {
        let g = small_grid();
        assert_eq!(g.sample(0.99, 1.5), c64(0.0, 0.0));
        assert_eq!(g.sample(1.5, 2.01), c64(0.0, 0.0));
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        let pump = PumpParams::<f64> {
            omega_p: 3.62,
            sigma_p: 0.010,
            crystal_length_mm: 0.1,
            theta1_deg: 3.5,
            theta2_deg: 3.5,
            refractive_index: 1.0,
        };
        let spec = GridSpec {
            omega_min: 1.75,
            omega_max: 1.87,
            n_points: 16,
        };
        let g = evaluate_on_grid(&SpdcJsa::new(pump), &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        g.write_csv(&path).unwrap();
        let back = JsaGrid::<f64>::read_csv(&path).unwrap();
        assert_eq!(g.axis_s(), back.axis_s());
        assert_eq!(g.axis_i(), back.axis_i());
        assert_eq!(g.amplitudes(), back.amplitudes());
        assert!(back.metadata.contains_key("checksum_fnv1a"));
    }

    #[test]
    fn shuffled_axis_rejected() {
        let axis = vec![1.0, 2.0, 1.5];
        let amps = Array2::from_elem((3, 3), c64(0.0, 0.0));
        match JsaGrid::new(axis.clone(), axis, amps, BTreeMap::new()) {
            Err(GridError::NotIncreasing { .. }) => {}
            other => panic!("expected not-increasing error, got {other:?}"),
        }
    }

    #[test]
    fn non_uniform_axis_rejected() {
        let axis = vec![0.0, 1.0, 2.5];
        let amps = Array2::from_elem((3, 3), c64(0.0, 0.0));
        match JsaGrid::new(axis.clone(), axis, amps, BTreeMap::new()) {
            Err(GridError::NonUniformAxis { .. }) => {}
            other => panic!("expected non-uniform error, got {other:?}"),
        }
    }

    #[test]
    fn nan_amplitude_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "# jsa-grid v1\n# axis_s_ev: 0,1\n# axis_i_ev: 0,1\nnan+0j,0+0j\n0+0j,0+0j\n",
        )
        .unwrap();
        match JsaGrid::<f64>::read_csv(&path) {
            Err(GridError::Format(msg)) => assert!(msg.contains("non-finite"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        match JsaGrid::<f64>::read_csv(Path::new("/nonexistent/grid.csv")) {
            Err(GridError::Io(_)) => {}
            other => panic!("expected io error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "jsa grid\n").unwrap();
        assert!(matches!(
            JsaGrid::<f64>::read_csv(&path),
            Err(GridError::Format(_))
        ));
    }

    #[test]
    fn resample_onto_own_axes_is_identity() {
        let g = small_grid();
        let spec = GridSpec {
            omega_min: 1.0,
            omega_max: 2.0,
            n_points: 3,
        };
        let resampled = evaluate_on_grid(&g, &spec).unwrap();
        assert_eq!(g.amplitudes(), resampled.amplitudes());
    }
}
