//! Euclidean projection onto a body.
//!
//! Ball and cube project in closed form (radial and coordinate clamps). The
//! vertex-oracle kinds run a pairwise conditional-gradient scheme whose
//! duality gap certifies the result: for f(z) = ||z - y||^2 the gap g at an
//! iterate bounds f(z) - f*, and f(z) - f* >= ||z - z*||^2 by 2-strong
//! convexity, so stopping at gap <= tol yields a point within sqrt(tol) of
//! the true projection.

use nalgebra::DVector;

use super::{BodyKind, ConvexBody};
use crate::error::{Error, Result};

/// Default absolute duality-gap tolerance.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;

/// Iterations between rebuilds of the iterate from its atom weights, to keep
/// accumulated drift below the gap tolerance.
const REFRESH_INTERVAL: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Atom {
    index: usize,
    negative: bool, // false (+) sorts before true (-)
}

impl ConvexBody {
    /// Euclidean projection of `point` onto the body, certified to satisfy
    /// `||result - P_K(point)||^2 <= tol`.
    pub fn euclid_project(&self, point: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "projection tolerance must be positive, got {tol}"
            )));
        }
        self.support_value(point)?; // dimension and finiteness checks
        match self.kind() {
            BodyKind::Ball => {
                let n = point.norm();
                Ok(if n <= self.scale() {
                    point.clone()
                } else {
                    point * (self.scale() / n)
                })
            }
            BodyKind::ScaledCube => {
                let c = self.scale() / (self.dim() as f64).sqrt();
                Ok(DVector::from_iterator(
                    self.dim(),
                    point.iter().map(|&x| x.clamp(-c, c)),
                ))
            }
            BodyKind::CrossPolytope | BodyKind::VPolytope => {
                if self.minkowski_norm(point)? <= 1.0 + 1e-12 {
                    return Ok(point.clone());
                }
                self.conditional_gradient_project(point, tol)
            }
        }
    }

    fn conditional_gradient_project(
        &self,
        target: &DVector<f64>,
        tol: f64,
    ) -> Result<DVector<f64>> {
        let max_iter = 50 * self.dim() * self.vertex_count();

        let (i0, p0) = self.best_atom(target);
        let start = Atom {
            index: i0,
            negative: !p0,
        };
        // Active atoms with convex weights, kept sorted for deterministic
        // away-step tie-breaking.
        let mut active: Vec<(Atom, f64)> = vec![(start, 1.0)];
        let mut z = self.atom_point(i0, p0);
        let mut last_gap = f64::INFINITY;

        for it in 0..max_iter {
            if it > 0 && it % REFRESH_INTERVAL == 0 {
                z = self.combination(&active);
            }
            let grad = 2.0 * (&z - target);
            let toward = -&grad;
            let (fi, fp) = self.best_atom(&toward);
            let fw_point = self.atom_point(fi, fp);
            let gap = grad.dot(&z) - grad.dot(&fw_point);
            last_gap = gap;
            if gap <= tol {
                return Ok(z);
            }

            // Away atom: active atom with the largest gradient inner product.
            let mut away_idx = 0usize;
            let mut away_score = f64::NEG_INFINITY;
            for (i, (atom, _)) in active.iter().enumerate() {
                let p = self.atom_point(atom.index, !atom.negative);
                let s = grad.dot(&p);
                if s > away_score {
                    away_score = s;
                    away_idx = i;
                }
            }
            let (away_atom, away_weight) = active[away_idx];
            let away_point = self.atom_point(away_atom.index, !away_atom.negative);

            let dir = &fw_point - &away_point;
            let dd = dir.norm_squared();
            if dd == 0.0 {
                break; // fw and away coincide: gap is numerical noise
            }
            let step = ((target - &z).dot(&dir) / dd).clamp(0.0, away_weight);
            if step <= 0.0 {
                break;
            }
            z += &dir * step;

            active[away_idx].1 -= step;
            if active[away_idx].1 <= 1e-15 {
                active.remove(away_idx);
            }
            let fw_atom = Atom {
                index: fi,
                negative: !fp,
            };
            match active.binary_search_by(|(a, _)| a.cmp(&fw_atom)) {
                Ok(i) => active[i].1 += step,
                Err(i) => active.insert(i, (fw_atom, step)),
            }
        }
        Err(Error::ProjectionNonConvergence {
            gap: last_gap,
            iterations: max_iter,
        })
    }

    fn combination(&self, active: &[(Atom, f64)]) -> DVector<f64> {
        let mut z = DVector::zeros(self.dim());
        for (atom, w) in active {
            z += self.atom_point(atom.index, !atom.negative) * *w;
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn interior_point_is_fixed() {
        let b = ConvexBody::cross_polytope(3).unwrap();
        let x = dvector![0.2, -0.1, 0.3];
        assert_eq!(b.euclid_project(&x, 1e-10).unwrap(), x);
    }

    #[test]
    fn ball_projection_is_radial() {
        let b = ConvexBody::ball(4, 1.0).unwrap();
        let x = dvector![2.0, 0.0, 0.0, 0.0];
        let p = b.euclid_project(&x, 1e-10).unwrap();
        assert!((p - dvector![1.0, 0.0, 0.0, 0.0]).norm() < 1e-15);
    }

    #[test]
    fn cube_projection_clamps_coordinates() {
        let sq = ConvexBody::scaled_cube(2).unwrap().scaled(2f64.sqrt()).unwrap();
        let p = sq.euclid_project(&dvector![2.0, 0.5], 1e-10).unwrap();
        assert!((p - dvector![1.0, 0.5]).norm() < 1e-12);
    }

    #[test]
    fn cross_polytope_projection_matches_soft_threshold() {
        // Independent oracle: l1-ball projection by sorting and thresholding.
        fn soft_threshold(y: &DVector<f64>) -> DVector<f64> {
            let l1: f64 = y.iter().map(|x| x.abs()).sum();
            if l1 <= 1.0 {
                return y.clone();
            }
            let mut mags: Vec<f64> = y.iter().map(|x| x.abs()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mut acc = 0.0;
            let mut theta = 0.0;
            for (k, &u) in mags.iter().enumerate() {
                acc += u;
                let t = (acc - 1.0) / (k + 1) as f64;
                if u - t > 0.0 {
                    theta = t;
                }
            }
            y.map(|x| x.signum() * (x.abs() - theta).max(0.0))
        }

        let b = ConvexBody::cross_polytope(6).unwrap();
        let mut rng = crate::rng::stream(77, 0);
        for _ in 0..50 {
            let y = DVector::from_fn(6, |_, _| {
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
            });
            let got = b.euclid_project(&y, 1e-12).unwrap();
            let want = soft_threshold(&y);
            assert!(
                (&got - &want).norm() <= 2e-6,
                "{} vs {}",
                (&got - &want).norm(),
                want
            );
        }
    }

    #[test]
    fn vpolytope_projection_contracts_toward_vertices() {
        let verts = vec![dvector![1.0, 0.3], dvector![-0.2, 0.9]];
        let body = ConvexBody::vpolytope(verts.clone()).unwrap();
        let y = dvector![1.7, 1.4];
        let p = body.euclid_project(&y, 1e-12).unwrap();
        for v in &verts {
            for s in [1.0, -1.0] {
                let z = v * s;
                assert!((&p - &z).norm() <= (&y - &z).norm() + 1e-6);
            }
        }
        assert!(body.minkowski_norm(&p).unwrap() <= 1.0 + 1e-7);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        assert!(b.euclid_project(&dvector![0.0, 0.0], 0.0).is_err());
        assert!(b.euclid_project(&dvector![0.0, 0.0], -1.0).is_err());
    }
}
