use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::OrderError;
use crate::expr::{DomainBox, Interval};

pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_SEED: u64 = 42;
/// Relative: values `a`, `b` count as equal when
/// `max|a - b| <= tol * max(1, max|a|, max|b|)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    BoxUniform,
    /// Some coordinates jointly on the unit sphere, the rest in the box.
    Sphere,
    Grid,
    UserFile,
}

/// Points over a fixed variable list.
///
/// Random sets are drawn in groups of four: a base point, two siblings
/// that keep one or two of its coordinates and redraw the rest, and a copy
/// reflected in one coordinate. Independent draws almost never share a
/// coordinate value, so without siblings no pair could tell `x1` apart
/// from `(x1, x2)`. The kept coordinate rotates from group to group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub vars: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub source: SampleSource,
    pub seed: u64,
    pub tolerance: f64,
}

struct Sampler<'a> {
    domain: &'a DomainBox,
    vars: &'a [String],
    on_sphere: Vec<bool>,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    fn interval(&self, k: usize) -> Interval {
        self.domain.get(&self.vars[k])
    }

    /// Redraws every coordinate outside `keep`, preserving the unit norm
    /// of the sphere block.
    fn redraw(&mut self, p: &mut [f64], keep: &[usize]) {
        let mut kept_sq = 0.0;
        let mut free_sphere = Vec::new();
        for (k, pk) in p.iter_mut().enumerate() {
            let kept = keep.contains(&k);
            if self.on_sphere[k] {
                if kept {
                    kept_sq += *pk * *pk;
                } else {
                    free_sphere.push(k);
                }
            } else if !kept {
                let iv = self.interval(k);
                *pk = iv.lo + iv.width() * self.rng.random::<f64>();
            }
        }
        if free_sphere.is_empty() {
            return;
        }
        let radius = (1.0 - kept_sq).max(0.0).sqrt();
        loop {
            let g: Vec<f64> = free_sphere.iter().map(|_| self.rng.sample(StandardNormal)).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for (&k, v) in free_sphere.iter().zip(g) {
                    p[k] = radius * v / norm;
                }
                return;
            }
        }
    }

    fn reflect(&self, p: &mut [f64], k: usize) {
        p[k] = if self.on_sphere[k] {
            -p[k]
        } else {
            let iv = self.interval(k);
            (iv.lo + iv.hi - p[k]).clamp(iv.lo, iv.hi)
        };
    }
}

impl SampleSet {
    /// Uniform in `domain`, except for `sphere` variables, which are drawn
    /// jointly on the unit sphere.
    pub fn random(
        vars: &[String],
        domain: &DomainBox,
        sphere: &[String],
        n: usize,
        seed: u64,
    ) -> Result<SampleSet, OrderError> {
        if n == 0 || vars.is_empty() {
            return Err(OrderError::EmptySamples);
        }
        let on_sphere: Vec<bool> = vars.iter().map(|v| sphere.contains(v)).collect();
        let any_sphere = on_sphere.iter().any(|&s| s);
        for v in sphere {
            if !vars.contains(v) {
                return Err(OrderError::InvalidSamples(format!(
                    "sphere variable `{v}` is not sampled"
                )));
            }
        }
        for (k, v) in vars.iter().enumerate() {
            let iv = domain.get(v);
            if !on_sphere[k] && !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                return Err(OrderError::InvalidSamples(format!("invalid interval for `{v}`")));
            }
        }
        let mut s = Sampler {
            domain,
            vars,
            on_sphere,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let dim = vars.len();
        let mut points = Vec::with_capacity(n);
        let mut group = 0;
        while points.len() < n {
            let pivot = group % dim;
            let next = (pivot + 1) % dim;
            let mut base = vec![0.0; dim];
            s.redraw(&mut base, &[]);
            let mut one = base.clone();
            s.redraw(&mut one, &[pivot]);
            let mut two = base.clone();
            s.redraw(&mut two, &[pivot, next]);
            let mut mirrored = base.clone();
            s.reflect(&mut mirrored, pivot);
            points.extend([base, one, two, mirrored]);
            group += 1;
        }
        points.truncate(n);
        Ok(SampleSet {
            vars: vars.to_vec(),
            points,
            source: if any_sphere {
                SampleSource::Sphere
            } else {
                SampleSource::BoxUniform
            },
            seed,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// Product grid with `per_axis` evenly spaced values per variable,
    /// endpoints included.
    pub fn grid(vars: &[String], domain: &DomainBox, per_axis: usize) -> Result<SampleSet, OrderError> {
        if per_axis == 0 || vars.is_empty() {
            return Err(OrderError::EmptySamples);
        }
        let axes: Vec<Vec<f64>> = vars
            .iter()
            .map(|v| {
                let iv = domain.get(v);
                if per_axis == 1 {
                    vec![0.5 * (iv.lo + iv.hi)]
                } else {
                    (0..per_axis)
                        .map(|k| iv.lo + iv.width() * k as f64 / (per_axis - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let total = per_axis
            .checked_pow(vars.len() as u32)
            .filter(|&t| t <= 1 << 24)
            .ok_or_else(|| OrderError::InvalidSamples("grid too large".into()))?;
        let points = (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; vars.len()];
                for k in (0..vars.len()).rev() {
                    p[k] = axes[k][idx % per_axis];
                    idx /= per_axis;
                }
                p
            })
            .collect();
        Ok(SampleSet {
            vars: vars.to_vec(),
            points,
            source: SampleSource::Grid,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// Reads a CSV whose header names the variables.
    pub fn from_csv(reader: impl Read) -> Result<SampleSet, OrderError> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let vars: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut points = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let p = rec
                .iter()
                .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| OrderError::InvalidSamples(format!("row {} has a non-numeric value", row + 1)))?;
            points.push(p);
        }
        if points.is_empty() {
            return Err(OrderError::EmptySamples);
        }
        Ok(SampleSet {
            vars,
            points,
            source: SampleSource::UserFile,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), OrderError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.vars)?;
        for p in &self.points {
            w.write_record(p.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> SampleSet {
        self.tolerance = tolerance;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> BTreeMap<String, f64> {
        self.vars
            .iter()
            .cloned()
            .zip(self.points[index].iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(vs: &[&str]) -> Vec<String> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let v = names(&["x1", "x2", "x3", "x4"]);
        let s = SampleSet::random(&v, &DomainBox::new(), &v, 512, 42).unwrap();
        assert_eq!(s.len(), 512);
        assert_eq!(s.source, SampleSource::Sphere);
        for p in &s.points {
            let n: f64 = p.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12, "{n}");
        }
    }

    #[test]
    fn box_points_stay_inside() {
        let v = names(&["a", "b"]);
        let d = DomainBox::new().with("a", 0.0, 1.0).with("b", 2.0, 5.0);
        let s = SampleSet::random(&v, &d, &[], 333, 7).unwrap();
        assert_eq!(s.len(), 333);
        for p in &s.points {
            assert!((0.0..=1.0).contains(&p[0]) && (2.0..=5.0).contains(&p[1]));
        }
    }

    #[test]
    fn siblings_share_coordinates() {
        let v = names(&["a", "b", "c"]);
        let s = SampleSet::random(&v, &DomainBox::new(), &[], 8, 1).unwrap();
        assert_eq!(s.points[0][0], s.points[1][0]);
        assert_ne!(s.points[0][1], s.points[1][1]);
        assert_eq!(s.points[0][..2], s.points[2][..2]);
        assert_eq!(s.points[3][0], -s.points[0][0]);
        // second group pivots on `b`
        assert_eq!(s.points[4][1], s.points[5][1]);
    }

    #[test]
    fn seeded_and_reproducible() {
        let v = names(&["a"]);
        let a = SampleSet::random(&v, &DomainBox::new(), &[], 50, 9).unwrap();
        let b = SampleSet::random(&v, &DomainBox::new(), &[], 50, 9).unwrap();
        let c = SampleSet::random(&v, &DomainBox::new(), &[], 50, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn grid_includes_corners() {
        let v = names(&["a", "b"]);
        let g = SampleSet::grid(&v, &DomainBox::new().with("a", 0.0, 1.0), 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.points[0], [0.0, -1.0]);
        assert_eq!(g.points[8], [1.0, 1.0]);
    }

    #[test]
    fn csv_round_trip() {
        let v = names(&["x", "y"]);
        let s = SampleSet::random(&v, &DomainBox::new(), &[], 10, 3).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = SampleSet::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.vars, s.vars);
        assert_eq!(back.points, s.points);
        assert!(SampleSet::from_csv("x,y\n1,nan\n".as_bytes()).is_err());
    }
}
