//! Linear query workloads over a finite universe.
//!
//! A workload is an `m x |U|` matrix with entries in `[0, 1]`: rows are
//! queries, columns are universe elements, and the answer vector on a
//! database is the column average. The sensitivity polytope is the symmetric
//! hull of the columns; scaled by `1/sqrt(m)` it sits inside the unit ball
//! and is the mean-point domain used by the reduction.

mod carath;

pub use carath::{sample_signed_databases, SignedCombination};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;

/// Cap on the attribute count of generated marginal workloads (universe
/// size `2^d`).
pub const MARGINALS_CAP: usize = 16;

/// A workload of `m` linear queries over a universe of size `|U|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    matrix: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

/// A database: a multiset of universe indices (query-release side) or of
/// points in a convex body (mean-point side).
#[derive(Debug, Clone, PartialEq)]
pub enum Database {
    Elements(Vec<usize>),
    Points(Vec<DVector<f64>>),
}

impl Database {
    pub fn len(&self) -> usize {
        match self {
            Database::Elements(e) => e.len(),
            Database::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Check that all points lie in `body` to gauge tolerance 1e-9.
    pub fn validate_points(&self, body: &ConvexBody) -> Result<()> {
        let Database::Points(points) = self else {
            return Err(Error::InvalidParameter(
                "expected a point database".into(),
            ));
        };
        for p in points {
            let gauge = body.minkowski_norm(p)?;
            if gauge > 1.0 + 1e-9 {
                return Err(Error::PointOutsideBody { gauge });
            }
        }
        Ok(())
    }
}

impl Workload {
    /// Build a workload from its query-by-element matrix.
    pub fn new(matrix: DMatrix<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "workload needs at least one query and one universe element".into(),
            ));
        }
        for x in matrix.iter() {
            if !x.is_finite() || !(0.0..=1.0).contains(x) {
                return Err(Error::InvalidParameter(format!(
                    "workload entries must lie in [0, 1], got {x}"
                )));
            }
        }
        if let Some(l) = &labels {
            if l.len() != matrix.ncols() {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {} universe elements",
                    l.len(),
                    matrix.ncols()
                )));
            }
        }
        Ok(Workload { matrix, labels })
    }

    /// The 1-way marginal workload on `d` binary attributes: universe
    /// `{0,1}^d`, query `j` reads bit `j` of the element.
    pub fn one_way_marginals(d: usize) -> Result<Self> {
        if d == 0 || d > MARGINALS_CAP {
            return Err(Error::InvalidParameter(format!(
                "attribute count {d} outside 1..={MARGINALS_CAP}"
            )));
        }
        let universe = 1usize << d;
        let matrix = DMatrix::from_fn(d, universe, |j, e| ((e >> j) & 1) as f64);
        Workload::new(matrix, None)
    }

    pub fn query_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn universe_size(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Answer vector of the single-element database `{e}`.
    pub fn column(&self, e: usize) -> Result<DVector<f64>> {
        if e >= self.universe_size() {
            return Err(Error::IndexOutOfRange {
                index: e,
                size: self.universe_size(),
            });
        }
        Ok(self.matrix.column(e).into_owned())
    }

    /// Scaled column `Q({e}) / sqrt(m)`: a vertex of the mean-point domain.
    pub fn scaled_point(&self, e: usize) -> Result<DVector<f64>> {
        Ok(self.column(e)? / (self.query_count() as f64).sqrt())
    }

    /// Per-query average answer vector over an element database.
    ///
    /// Computed from element multiplicities with weights `count/n`, so the
    /// result is exactly invariant under permutation and duplication of the
    /// database.
    pub fn evaluate(&self, db: &Database) -> Result<DVector<f64>> {
        let Database::Elements(elements) = db else {
            return Err(Error::InvalidParameter(
                "evaluate expects an element database".into(),
            ));
        };
        if elements.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for &e in elements {
            if e >= self.universe_size() {
                return Err(Error::IndexOutOfRange {
                    index: e,
                    size: self.universe_size(),
                });
            }
            *counts.entry(e).or_insert(0) += 1;
        }
        let n = elements.len() as f64;
        let mut out = DVector::zeros(self.query_count());
        for (e, c) in counts {
            out += self.matrix.column(e) * (c as f64 / n);
        }
        Ok(out)
    }

    /// The sensitivity polytope: symmetric hull of the columns, optionally
    /// scaled by `1/sqrt(m)` so it fits in the unit ball.
    pub fn sensitivity_polytope(&self, scaled: bool) -> ConvexBody {
        let factor = if scaled {
            1.0 / (self.query_count() as f64).sqrt()
        } else {
            1.0
        };
        let vertices = (0..self.universe_size())
            .map(|e| self.matrix.column(e) * factor)
            .collect();
        ConvexBody::vpolytope(vertices).expect("workload columns form a valid vertex list")
    }
}

// JSON forms:
//   workload: {"m": ..., "universe": ..., "matrix": [[row], ...], "labels": [...]}
//   database: {"elements": [...]} or {"points": [[...], ...]}
#[derive(Serialize, Deserialize)]
struct WorkloadRepr {
    m: usize,
    universe: usize,
    matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Serialize for Workload {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.query_count())
            .map(|i| self.matrix.row(i).iter().cloned().collect())
            .collect();
        WorkloadRepr {
            m: self.query_count(),
            universe: self.universe_size(),
            matrix: rows,
            labels: self.labels.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Workload {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = WorkloadRepr::deserialize(deserializer)?;
        if repr.matrix.len() != repr.m {
            return Err(DeError::custom(format!(
                "declared m {} does not match {} matrix rows",
                repr.m,
                repr.matrix.len()
            )));
        }
        for row in &repr.matrix {
            if row.len() != repr.universe {
                return Err(DeError::custom(format!(
                    "declared universe {} does not match row of length {}",
                    repr.universe,
                    row.len()
                )));
            }
        }
        let matrix = DMatrix::from_fn(repr.m, repr.universe, |i, j| repr.matrix[i][j]);
        Workload::new(matrix, repr.labels).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
enum DatabaseRepr {
    #[serde(rename = "elements")]
    Elements(Vec<usize>),
    #[serde(rename = "points")]
    Points(Vec<Vec<f64>>),
}

impl Serialize for Database {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Database::Elements(e) => DatabaseRepr::Elements(e.clone()),
            Database::Points(p) => {
                DatabaseRepr::Points(p.iter().map(|v| v.iter().cloned().collect()).collect())
            }
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Database {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        Ok(match DatabaseRepr::deserialize(deserializer)? {
            DatabaseRepr::Elements(e) => Database::Elements(e),
            DatabaseRepr::Points(p) => {
                for v in &p {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(DeError::custom("non-finite database point"));
                    }
                }
                Database::Points(p.into_iter().map(DVector::from_vec).collect())
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BodyKind;
    use nalgebra::dvector;

    fn two_query() -> Workload {
        Workload::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn singleton_database_returns_column() {
        let w = two_query();
        let ans = w.evaluate(&Database::Elements(vec![1])).unwrap();
        assert_eq!(ans, w.column(1).unwrap());
    }

    #[test]
    fn duplication_is_exactly_invariant() {
        let w = two_query();
        let a = w.evaluate(&Database::Elements(vec![0, 1])).unwrap();
        let b = w
            .evaluate(&Database::Elements(vec![0, 1, 0, 1]))
            .unwrap();
        let c = w
            .evaluate(&Database::Elements(vec![1, 0, 0, 1]))
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn hand_computed_average() {
        let w = two_query();
        let ans = w.evaluate(&Database::Elements(vec![0, 1])).unwrap();
        assert_eq!(ans, dvector![0.5, 0.5]);
    }

    #[test]
    fn empty_database_rejected() {
        let w = two_query();
        assert!(matches!(
            w.evaluate(&Database::Elements(vec![])),
            Err(Error::EmptyDatabase)
        ));
    }

    #[test]
    fn identity_workload_gives_cross_polytope_supports() {
        let w = Workload::new(DMatrix::identity(2, 2), None).unwrap();
        let k = w.sensitivity_polytope(false);
        let reference = ConvexBody::cross_polytope(2).unwrap();
        let mut rng = crate::rng::stream(2, 0);
        for _ in 0..60 {
            let d = DVector::from_fn(2, |_, _| {
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
            });
            let a: f64 = k.support_value(&d).unwrap();
            let b: f64 = reference.support_value(&d).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_binary_query_gives_segment() {
        let w = Workload::new(DMatrix::from_row_slice(1, 2, &[0.0, 1.0]), None).unwrap();
        let k = w.sensitivity_polytope(false);
        assert_eq!(k.kind(), BodyKind::VPolytope);
        assert!((k.support_value(&dvector![1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((k.support_value(&dvector![-2.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn marginals_small_cases() {
        let w1 = Workload::one_way_marginals(1).unwrap();
        assert_eq!(w1.matrix(), &DMatrix::from_row_slice(1, 2, &[0.0, 1.0]));
        let w2 = Workload::one_way_marginals(2).unwrap();
        assert_eq!(
            w2.matrix(),
            &DMatrix::from_row_slice(2, 4, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0])
        );
        assert!(Workload::one_way_marginals(17).is_err());
        assert!(Workload::one_way_marginals(0).is_err());
    }

    #[test]
    fn marginals_polytope_sits_between_half_cube_and_cube() {
        // The symmetric hull of the bit-pattern columns agrees with the cube
        // on uniform-sign directions and is sandwiched between the half cube
        // and the cube in general.
        let d = 4;
        let w = Workload::one_way_marginals(d).unwrap();
        let k = w.sensitivity_polytope(true);
        let cube = ConvexBody::scaled_cube(d).unwrap();
        let mut rng = crate::rng::stream(5, 0);
        for trial in 0..100 {
            let dir = DVector::from_fn(d, |_, _| {
                rand_distr::Distribution::sample::<f64, _, _>(
                    &rand_distr::StandardNormal,
                    &mut rng,
                )
            });
            let hk: f64 = k.support_value(&dir).unwrap();
            let hq: f64 = cube.support_value(&dir).unwrap();
            assert!(hk <= hq + 1e-12, "trial {trial}: hull exceeds cube");
            assert!(hk >= 0.5 * hq - 1e-12, "trial {trial}: hull below half cube");
            let uniform = dir.map(|x| x.abs());
            let hk_u: f64 = k.support_value(&uniform).unwrap();
            let hq_u: f64 = cube.support_value(&uniform).unwrap();
            assert!((hk_u - hq_u).abs() < 1e-12, "uniform-sign directions agree");
        }
    }

    #[test]
    fn neighbor_difference_stays_in_polytope() {
        let w = two_query();
        let k = w.sensitivity_polytope(false);
        let d1 = Database::Elements(vec![0, 1, 1]);
        let d2 = Database::Elements(vec![0, 1]);
        let diff = w.evaluate(&d1).unwrap() * 3.0 - w.evaluate(&d2).unwrap() * 2.0;
        assert!(k.minkowski_norm(&diff).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn workload_json_round_trip() {
        let w = Workload::new(
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.25, 0.5, 0.5, 1.0]),
            Some(vec!["a".into(), "b".into(), "c".into()]),
        )
        .unwrap();
        let js = serde_json::to_string(&w).unwrap();
        assert!(js.contains("\"m\":2"));
        let back: Workload = serde_json::from_str(&js).unwrap();
        assert_eq!(w, back);

        let db = Database::Elements(vec![0, 2, 2]);
        let js = serde_json::to_string(&db).unwrap();
        assert_eq!(js, r#"{"elements":[0,2,2]}"#);
        let back: Database = serde_json::from_str(&js).unwrap();
        assert_eq!(db, back);

        let pts: Database = serde_json::from_str(r#"{"points":[[0.1,0.2]]}"#).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(serde_json::from_str::<Workload>(
            r#"{"m":1,"universe":2,"matrix":[[0.0,1.5]]}"#
        )
        .is_err());
    }
}
