//! Symmetric convex bodies and their geometric functionals.
//!
//! A body is either an explicit symmetric vertex hull (`conv{±v_i}`, one
//! stored representative per antipodal pair) or one of three analytic
//! families with closed-form oracles: the Euclidean ball, the scaled cube
//! `[-1/sqrt(m), 1/sqrt(m)]^m`, and the cross-polytope (unit l1 ball). Every
//! kind carries a positive global scale factor.
//!
//! Central symmetry is structural: oracles always consider both signs of a
//! stored vertex, so no operation can observe an asymmetric body.

mod project;
mod subspace;
mod width;

pub use subspace::SubspaceBasis;
pub use width::WidthEstimate;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex;

/// Default cap on vertex expansion of the scaled cube (2^(m-1) stored
/// vertices).
pub const CUBE_EXPANSION_CAP: usize = 16;

/// Shape family of a [`ConvexBody`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    /// Symmetric hull of an explicit vertex list.
    VPolytope,
    /// Euclidean ball of radius `scale`.
    Ball,
    /// `scale * [-1/sqrt(m), 1/sqrt(m)]^m`.
    ScaledCube,
    /// `scale * B_1^m` (unit l1 ball).
    CrossPolytope,
}

impl BodyKind {
    fn as_str(self) -> &'static str {
        match self {
            BodyKind::VPolytope => "vpolytope",
            BodyKind::Ball => "ball",
            BodyKind::ScaledCube => "scaled_cube",
            BodyKind::CrossPolytope => "cross_polytope",
        }
    }
}

/// A symmetric convex body in `R^m`.
///
/// Immutable after construction; cheap to clone and safe to share across
/// concurrent workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    kind: BodyKind,
    dim: usize,
    scale: f64,
    vertices: Vec<DVector<f64>>,
}

/// A point of the body achieving a support value, together with the stored
/// vertex (or coordinate axis) it came from.
#[derive(Debug, Clone)]
pub struct SupportPoint {
    pub point: DVector<f64>,
    /// Index of the stored vertex (vpolytope) or coordinate (cross-polytope).
    /// Zero for the analytic ball and cube.
    pub index: usize,
    /// Whether the `+` representative of the antipodal pair was chosen.
    pub positive: bool,
}

impl ConvexBody {
    /// Symmetric hull `conv{±v_i}` of the given vertex representatives.
    pub fn vpolytope(vertices: Vec<DVector<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter(
                "vpolytope needs at least one vertex".into(),
            ));
        }
        let dim = vertices[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "vpolytope vertex".into(),
                });
            }
        }
        Ok(ConvexBody {
            kind: BodyKind::VPolytope,
            dim,
            scale: 1.0,
            vertices,
        })
    }

    /// Euclidean ball of the given radius.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::analytic(BodyKind::Ball, dim, radius)
    }

    /// The cube `[-1/sqrt(m), 1/sqrt(m)]^m`.
    pub fn scaled_cube(dim: usize) -> Result<Self> {
        Self::analytic(BodyKind::ScaledCube, dim, 1.0)
    }

    /// The unit l1 ball.
    pub fn cross_polytope(dim: usize) -> Result<Self> {
        Self::analytic(BodyKind::CrossPolytope, dim, 1.0)
    }

    fn analytic(kind: BodyKind, dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        Ok(ConvexBody {
            kind,
            dim,
            scale,
            vertices: Vec::new(),
        })
    }

    /// The body scaled by `r > 0`.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive and finite, got {r}"
            )));
        }
        let mut out = self.clone();
        out.scale *= r;
        Ok(out)
    }

    pub fn kind(&self) -> BodyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Stored vertex representatives (empty for analytic kinds). Unscaled.
    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// Number of stored vertex representatives for iteration bounds.
    /// Analytic kinds report their implicit representative count.
    pub fn vertex_count(&self) -> usize {
        match self.kind {
            BodyKind::VPolytope => self.vertices.len(),
            BodyKind::Ball => 1,
            BodyKind::ScaledCube => 1usize << (self.dim.saturating_sub(1)).min(62),
            BodyKind::CrossPolytope => self.dim,
        }
    }

    fn check_vector(&self, v: &DVector<f64>, context: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: context.into(),
            });
        }
        Ok(())
    }

    /// Support value in the unscaled reference body. `support_value` is this
    /// times `scale`; factoring the scale out keeps width estimates exactly
    /// homogeneous under common random numbers.
    pub(crate) fn raw_support(&self, direction: &DVector<f64>) -> f64 {
        match self.kind {
            BodyKind::VPolytope => self
                .vertices
                .iter()
                .map(|v| v.dot(direction).abs())
                .fold(0.0, f64::max),
            BodyKind::Ball => direction.norm(),
            BodyKind::ScaledCube => {
                direction.iter().map(|x| x.abs()).sum::<f64>() / (self.dim as f64).sqrt()
            }
            BodyKind::CrossPolytope => direction.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }

    /// Support function `h_K(direction) = max{<x, direction> : x in K}`.
    pub fn support_value(&self, direction: &DVector<f64>) -> Result<f64> {
        self.check_vector(direction, "support direction")?;
        Ok(self.scale * self.raw_support(direction))
    }

    /// A point of the body achieving `h_K(direction)`.
    ///
    /// Ties are broken by lowest vertex index, then by preferring the `+`
    /// representative of the antipodal pair.
    pub fn vertex_oracle(&self, direction: &DVector<f64>) -> Result<SupportPoint> {
        self.check_vector(direction, "support direction")?;
        Ok(match self.kind {
            BodyKind::VPolytope | BodyKind::CrossPolytope => {
                let (index, positive) = self.best_atom(direction);
                SupportPoint {
                    point: self.atom_point(index, positive),
                    index,
                    positive,
                }
            }
            BodyKind::Ball => {
                let n = direction.norm();
                let point = if n == 0.0 {
                    DVector::zeros(self.dim)
                } else {
                    direction * (self.scale / n)
                };
                SupportPoint {
                    point,
                    index: 0,
                    positive: true,
                }
            }
            BodyKind::ScaledCube => {
                let c = self.scale / (self.dim as f64).sqrt();
                let point =
                    DVector::from_iterator(self.dim, direction.iter().map(
                        |&x| if x >= 0.0 { c } else { -c },
                    ));
                SupportPoint {
                    point,
                    index: 0,
                    positive: true,
                }
            }
        })
    }

    /// Best signed atom for the vertex-oracle kinds (vpolytope and
    /// cross-polytope): maximizes the inner product with `direction`, ties
    /// broken by lowest index, then `+` before `-`.
    pub(crate) fn best_atom(&self, direction: &DVector<f64>) -> (usize, bool) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0usize, true);
        let score = |i: usize| -> f64 {
            match self.kind {
                BodyKind::VPolytope => self.vertices[i].dot(direction),
                BodyKind::CrossPolytope => direction[i],
                _ => unreachable!("best_atom only defined for vertex-oracle kinds"),
            }
        };
        let count = match self.kind {
            BodyKind::VPolytope => self.vertices.len(),
            BodyKind::CrossPolytope => self.dim,
            _ => unreachable!(),
        };
        for i in 0..count {
            let s = score(i);
            if s > best {
                best = s;
                arg = (i, true);
            }
            if -s > best {
                best = -s;
                arg = (i, false);
            }
        }
        arg
    }

    /// Concrete (scaled) point of the signed atom `(index, positive)`.
    pub(crate) fn atom_point(&self, index: usize, positive: bool) -> DVector<f64> {
        let sign = if positive { self.scale } else { -self.scale };
        match self.kind {
            BodyKind::VPolytope => &self.vertices[index] * sign,
            BodyKind::CrossPolytope => {
                let mut p = DVector::zeros(self.dim);
                p[index] = sign;
                p
            }
            _ => unreachable!("atom_point only defined for vertex-oracle kinds"),
        }
    }

    /// Gauge in the unscaled reference body; `None` marks a point outside
    /// the span of a degenerate vpolytope.
    fn raw_gauge(&self, point: &DVector<f64>) -> Result<Option<f64>> {
        Ok(match self.kind {
            BodyKind::Ball => Some(point.norm()),
            BodyKind::ScaledCube => Some(
                (self.dim as f64).sqrt() * point.iter().map(|x| x.abs()).fold(0.0, f64::max),
            ),
            BodyKind::CrossPolytope => Some(point.iter().map(|x| x.abs()).sum()),
            BodyKind::VPolytope => simplex::gauge_lp(&self.vertices, point)?.map(|s| s.gauge),
        })
    }

    /// Minkowski norm `min{r : point in r K}`; `+inf` when the point is
    /// outside the span of the body.
    pub fn minkowski_norm(&self, point: &DVector<f64>) -> Result<f64> {
        self.check_vector(point, "gauge point")?;
        Ok(match self.raw_gauge(point)? {
            Some(g) => g / self.scale,
            None => f64::INFINITY,
        })
    }

    /// `max{||x||_2 : x in K}`.
    pub fn diameter(&self) -> f64 {
        let raw = match self.kind {
            BodyKind::Ball | BodyKind::ScaledCube | BodyKind::CrossPolytope => 1.0,
            BodyKind::VPolytope => self
                .vertices
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max),
        };
        self.scale * raw
    }

    /// Whether the body spans all of `R^m`.
    pub fn is_full_dimensional(&self) -> bool {
        match self.kind {
            BodyKind::Ball | BodyKind::ScaledCube | BodyKind::CrossPolytope => true,
            BodyKind::VPolytope => {
                if self.vertices.len() < self.dim {
                    return false;
                }
                let mat = DMatrix::from_columns(&self.vertices);
                let svd = mat.svd(false, false);
                let smax = svd.singular_values.max();
                let tol = 1e-12 * smax.max(1.0) * self.dim as f64;
                svd.singular_values.iter().filter(|&&s| s > tol).count() == self.dim
            }
        }
    }

    /// Explicit vertex form with the scale folded into the vertices.
    ///
    /// The ball has no finite vertex form; cube expansion is capped at
    /// `cap` dimensions (2^(m-1) stored vertices).
    pub fn to_vpolytope(&self, cap: usize) -> Result<ConvexBody> {
        let vertices: Vec<DVector<f64>> = match self.kind {
            BodyKind::VPolytope => self.vertices.iter().map(|v| v * self.scale).collect(),
            BodyKind::CrossPolytope => (0..self.dim)
                .map(|i| {
                    let mut v = DVector::zeros(self.dim);
                    v[i] = self.scale;
                    v
                })
                .collect(),
            BodyKind::ScaledCube => {
                if self.dim > cap {
                    return Err(Error::ExpansionTooLarge(format!(
                        "cube of dimension {} exceeds expansion cap {cap}",
                        self.dim
                    )));
                }
                let c = self.scale / (self.dim as f64).sqrt();
                // One representative per antipodal pair: first coordinate +.
                (0..1usize << (self.dim - 1))
                    .map(|bits| {
                        DVector::from_iterator(
                            self.dim,
                            (0..self.dim).map(|j| {
                                if j == 0 || bits >> (j - 1) & 1 == 0 {
                                    c
                                } else {
                                    -c
                                }
                            }),
                        )
                    })
                    .collect()
            }
            BodyKind::Ball => {
                return Err(Error::ExpansionTooLarge(
                    "ball has no finite vertex representation".into(),
                ))
            }
        };
        ConvexBody::vpolytope(vertices)
    }

    /// Image of the body under the linear map `t` (an `m x m` matrix).
    ///
    /// Hull and linear image commute, so mapping the vertices is exact.
    /// Analytic kinds are vertex-expanded first (ball rejected, cube capped).
    pub fn apply_linear(&self, t: &DMatrix<f64>) -> Result<ConvexBody> {
        if t.ncols() != self.dim || t.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: if t.ncols() != self.dim {
                    t.ncols()
                } else {
                    t.nrows()
                },
            });
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "linear map".into(),
            });
        }
        let poly = self.to_vpolytope(CUBE_EXPANSION_CAP)?;
        ConvexBody::vpolytope(poly.vertices.iter().map(|v| t * v).collect())
    }

    /// Orthogonal projection of the body onto the subspace, expressed in the
    /// basis coordinates of the subspace (output dimension `basis.dim()`).
    pub fn project_subspace(&self, basis: &SubspaceBasis) -> Result<ConvexBody> {
        if basis.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: basis.ambient_dim(),
            });
        }
        let poly = self.to_vpolytope(CUBE_EXPANSION_CAP)?;
        ConvexBody::vpolytope(poly.vertices.iter().map(|v| basis.to_coords(v)).collect())
    }
}

// JSON form: {"kind": ..., "dim": m, "scale": r, "vertices": [[...], ...]}.
#[derive(Serialize, Deserialize)]
struct BodyRepr {
    kind: String,
    dim: usize,
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<f64>>>,
}

impl Serialize for ConvexBody {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let vertices = match self.kind {
            BodyKind::VPolytope => Some(
                self.vertices
                    .iter()
                    .map(|v| v.iter().cloned().collect())
                    .collect(),
            ),
            _ => None,
        };
        BodyRepr {
            kind: self.kind.as_str().to_string(),
            dim: self.dim,
            scale: self.scale,
            vertices,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = BodyRepr::deserialize(deserializer)?;
        let body = match repr.kind.as_str() {
            "vpolytope" => {
                let verts = repr
                    .vertices
                    .ok_or_else(|| DeError::custom("vpolytope requires a vertices array"))?;
                let verts: Vec<DVector<f64>> = verts
                    .into_iter()
                    .map(|v| DVector::from_vec(v))
                    .collect();
                let body = ConvexBody::vpolytope(verts).map_err(DeError::custom)?;
                if body.dim() != repr.dim {
                    return Err(DeError::custom(format!(
                        "declared dim {} does not match vertex dimension {}",
                        repr.dim,
                        body.dim()
                    )));
                }
                body.scaled(repr.scale).map_err(DeError::custom)?
            }
            "ball" => ConvexBody::ball(repr.dim, repr.scale).map_err(DeError::custom)?,
            "scaled_cube" => ConvexBody::scaled_cube(repr.dim)
                .and_then(|b| b.scaled(repr.scale))
                .map_err(DeError::custom)?,
            "cross_polytope" => ConvexBody::cross_polytope(repr.dim)
                .and_then(|b| b.scaled(repr.scale))
                .map_err(DeError::custom)?,
            other => return Err(DeError::custom(format!("unknown body kind {other:?}"))),
        };
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn support_of_unit_ball_is_one() {
        let b = ConvexBody::ball(5, 1.0).unwrap();
        let d = dvector![0.0, 0.6, 0.0, 0.8, 0.0];
        assert!((b.support_value(&d).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_of_scaled_cube_is_l1_over_sqrt_m() {
        // Verified against brute-force enumeration of the 16 cube vertices.
        let q = ConvexBody::scaled_cube(4).unwrap();
        let d = dvector![1.0, 1.0, 1.0, 1.0];
        assert!((q.support_value(&d).unwrap() - 2.0).abs() < 1e-15);
        let brute = q.to_vpolytope(16).unwrap();
        for dir in [
            dvector![1.0, -2.0, 0.5, 0.0],
            dvector![0.3, 0.3, -0.9, 1.4],
        ] {
            let a = q.support_value(&dir).unwrap();
            let b = brute.support_value(&dir).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn support_is_symmetric() {
        let body =
            ConvexBody::vpolytope(vec![dvector![1.0, 0.2], dvector![-0.3, 0.9]]).unwrap();
        let d = dvector![0.4, -1.3];
        let neg = -d.clone();
        assert_eq!(
            body.support_value(&d).unwrap(),
            body.support_value(&neg).unwrap()
        );
    }

    #[test]
    fn vertex_oracle_cross_polytope() {
        let b = ConvexBody::cross_polytope(2).unwrap();
        let p = b.vertex_oracle(&dvector![3.0, 1.0]).unwrap();
        assert_eq!(p.point, dvector![1.0, 0.0]);
    }

    #[test]
    fn vertex_oracle_cube_sign_pattern() {
        let q = ConvexBody::scaled_cube(4).unwrap();
        let p = q.vertex_oracle(&dvector![1.0, -1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.point, dvector![0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn vertex_oracle_tie_break_prefers_plus() {
        let body = ConvexBody::vpolytope(vec![dvector![1.0, 0.0]]).unwrap();
        let p = body.vertex_oracle(&dvector![0.0, 1.0]).unwrap();
        assert_eq!(p.point, dvector![1.0, 0.0]);
        assert!(p.positive);
    }

    #[test]
    fn gauge_of_origin_is_zero() {
        for body in [
            ConvexBody::ball(3, 2.0).unwrap(),
            ConvexBody::scaled_cube(3).unwrap(),
            ConvexBody::cross_polytope(3).unwrap(),
            ConvexBody::vpolytope(vec![dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.5]])
                .unwrap(),
        ] {
            assert_eq!(body.minkowski_norm(&DVector::zeros(3)).unwrap(), 0.0);
        }
    }

    #[test]
    fn gauge_of_scaled_cube() {
        let q = ConvexBody::scaled_cube(4).unwrap();
        let x = dvector![0.25, 0.0, 0.0, 0.0];
        assert!((q.minkowski_norm(&x).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauge_of_vertex_is_one() {
        let body =
            ConvexBody::vpolytope(vec![dvector![0.8, 0.1], dvector![0.2, 0.9]]).unwrap();
        let g = body.minkowski_norm(&dvector![0.8, 0.1]).unwrap();
        assert!((g - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauge_outside_span_is_infinite() {
        let seg = ConvexBody::vpolytope(vec![dvector![1.0, 0.0]]).unwrap();
        assert!(seg.minkowski_norm(&dvector![0.5, 0.5]).unwrap().is_infinite());
        assert!(!seg.is_full_dimensional());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let b = ConvexBody::ball(3, 1.0).unwrap();
        assert!(matches!(
            b.support_value(&dvector![1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            b.support_value(&dvector![f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn apply_identity_preserves_support() {
        let b = ConvexBody::cross_polytope(3).unwrap();
        let id = DMatrix::identity(3, 3);
        let img = b.apply_linear(&id).unwrap();
        let d = dvector![0.3, -0.8, 0.5];
        assert!(
            (img.support_value(&d).unwrap() - b.support_value(&d).unwrap()).abs() < 1e-15
        );
    }

    #[test]
    fn doubling_map_doubles_support() {
        let b = ConvexBody::cross_polytope(3).unwrap();
        let t = DMatrix::identity(3, 3) * 2.0;
        let img = b.apply_linear(&t).unwrap();
        let mut rng = crate::rng::stream(11, 0);
        for _ in 0..100 {
            let d = DVector::from_fn(3, |_, _| {
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
            });
            let a: f64 = img.support_value(&d).unwrap();
            let e: f64 = 2.0 * b.support_value(&d).unwrap();
            assert!((a - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn square_shadow_is_segment() {
        let square = ConvexBody::scaled_cube(2).unwrap().scaled(2f64.sqrt()).unwrap();
        let basis = SubspaceBasis::coordinate(2, &[0]).unwrap();
        let seg = square.project_subspace(&basis).unwrap();
        assert_eq!(seg.dim(), 1);
        for d in [dvector![1.0], dvector![-2.5], dvector![0.3]] {
            let h = seg.support_value(&d).unwrap();
            assert!((h - d[0].abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_has_no_vertex_form() {
        let b = ConvexBody::ball(3, 1.0).unwrap();
        assert!(matches!(
            b.to_vpolytope(16),
            Err(Error::ExpansionTooLarge(_))
        ));
        let q = ConvexBody::scaled_cube(17).unwrap();
        assert!(matches!(
            q.to_vpolytope(16),
            Err(Error::ExpansionTooLarge(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let body = ConvexBody::vpolytope(vec![dvector![1.0, 0.25], dvector![0.5, -1.0]])
            .unwrap()
            .scaled(2.0)
            .unwrap();
        let js = serde_json::to_string(&body).unwrap();
        let back: ConvexBody = serde_json::from_str(&js).unwrap();
        assert_eq!(body, back);
        let ball: ConvexBody =
            serde_json::from_str(r#"{"kind":"ball","dim":4,"scale":1.5}"#).unwrap();
        assert_eq!(ball.kind(), BodyKind::Ball);
        assert_eq!(ball.scale(), 1.5);
        assert!(serde_json::from_str::<ConvexBody>(
            r#"{"kind":"vpolytope","dim":2,"scale":1.0,"vertices":[[1.0,null]]}"#
        )
        .is_err());
    }
}
