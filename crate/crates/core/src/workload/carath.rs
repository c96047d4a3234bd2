//! Signed Caratheodory decompositions over the scaled sensitivity polytope.
//!
//! Every point of `K' = (1/sqrt(m)) K` is written as a signed combination of
//! scaled columns with total mass exactly one and support at most `m + 1`.
//! The construction is a fixed deterministic function of the point: a gauge
//! LP under Bland's rule, mass padding on the first universe element, and a
//! null-space elimination pass when padding overflows the support budget.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Database, Workload};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::simplex;

const MASS_TOL: f64 = 1e-12;
const GAUGE_TOL: f64 = 1e-9;

/// A point of `K'` written as `(1/sqrt(m)) * sum alpha_j Q({e_j})` with
/// `sum |alpha_j| = 1` and at most `m + 1` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedCombination {
    /// `(universe element, signed weight)` pairs, sorted by element with the
    /// positive term first when an element appears with both signs.
    pub terms: Vec<(usize, f64)>,
    /// The decomposed point.
    pub target: Vec<f64>,
}

impl SignedCombination {
    pub fn target_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.target)
    }

    /// Total signed mass `sum |alpha_j|`.
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.abs()).sum()
    }

    /// Rebuild the point from the terms: `(1/sqrt(m)) sum alpha_j Q({e_j})`.
    pub fn reconstruct(&self, workload: &Workload) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(workload.query_count());
        for &(e, a) in &self.terms {
            out += workload.scaled_point(e)? * a;
        }
        Ok(out)
    }
}

impl Workload {
    /// Decompose a point of `K'` into a [`SignedCombination`].
    ///
    /// Deterministic: bit-identical inputs give bit-identical outputs.
    /// Rejects points whose gauge in `K'` exceeds `1 + 1e-9`.
    pub fn caratheodory_decompose(&self, point: &DVector<f64>) -> Result<SignedCombination> {
        let m = self.query_count();
        if point.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: point.len(),
            });
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "decomposition point".into(),
            });
        }
        let vertices: Vec<DVector<f64>> = (0..self.universe_size())
            .map(|e| self.scaled_point(e))
            .collect::<Result<_>>()?;

        let Some(sol) = simplex::gauge_lp(&vertices, point)? else {
            return Err(Error::PointOutsideBody { gauge: f64::INFINITY });
        };
        if sol.gauge > 1.0 + GAUGE_TOL {
            return Err(Error::PointOutsideBody { gauge: sol.gauge });
        }

        let mut terms: Vec<(usize, f64)> = sol.weights;

        // Pad the mass up to one with a cancelling pair on element 0.
        let deficit = 1.0 - sol.gauge;
        if deficit > MASS_TOL {
            let t = deficit / 2.0;
            if let Some(entry) = terms.iter_mut().find(|(e, _)| *e == 0) {
                let sign = if entry.1 >= 0.0 { 1.0 } else { -1.0 };
                entry.1 += sign * t;
                terms.push((0, -sign * t));
            } else {
                terms.push((0, t));
                terms.push((0, -t));
            }
        }

        while terms.len() > m + 1 {
            eliminate_one_term(&vertices, &mut terms, m);
        }

        terms.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
        Ok(SignedCombination {
            terms,
            target: point.iter().cloned().collect(),
        })
    }
}

/// One null-space elimination step: move along a direction that fixes both
/// the reconstruction and the signed mass until some weight reaches zero.
/// Ties in the step length eliminate the highest-index term.
fn eliminate_one_term(vertices: &[DVector<f64>], terms: &mut Vec<(usize, f64)>, m: usize) {
    let t = terms.len();
    // Columns [v_e ; sign(alpha)]: any null vector preserves the point and,
    // while no sign flips, the total mass.
    let mut mat = DMatrix::zeros(m + 1, t);
    for (j, &(e, a)) in terms.iter().enumerate() {
        for i in 0..m {
            mat[(i, j)] = vertices[e][i];
        }
        mat[(m, j)] = a.signum();
    }
    let svd = mat.svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let z: Vec<f64> = (0..t).map(|j| vt[(vt.nrows() - 1, j)]).collect();

    // Smallest |step| zeroing a term; ties prefer the highest index.
    let mut best: Option<(f64, usize)> = None;
    for (j, &(_, a)) in terms.iter().enumerate() {
        if z[j].abs() > 1e-12 {
            let tau = -a / z[j];
            let better = match best {
                None => true,
                Some((bt, _)) => tau.abs() <= bt.abs(),
            };
            if better {
                best = Some((tau, j));
            }
        }
    }
    let (tau, _) = best.expect("null vector has a nonzero entry");
    for (j, term) in terms.iter_mut().enumerate() {
        term.1 += tau * z[j];
    }
    terms.retain(|&(_, a)| a.abs() > 1e-15);
}

/// Sample a pair of signed element databases from decompositions.
///
/// For each combination independently, one term is drawn with probability
/// proportional to its absolute weight; its element goes to the plus
/// database when the weight is nonnegative and to the minus database
/// otherwise. Point `i` uses the RNG stream `(seed, i)`, so the output is
/// independent of scheduling.
pub fn sample_signed_databases(
    combos: &[SignedCombination],
    seed: u64,
) -> (Database, Database) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (i, combo) in combos.iter().enumerate() {
        let total = combo.total_mass();
        let mut rng = stream(seed, i as u64);
        let u: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = combo.terms.len() - 1;
        for (j, &(_, a)) in combo.terms.iter().enumerate() {
            acc += a.abs();
            if u < acc {
                chosen = j;
                break;
            }
        }
        let (e, a) = combo.terms[chosen];
        if a >= 0.0 {
            plus.push(e);
        } else {
            minus.push(e);
        }
    }
    (Database::Elements(plus), Database::Elements(minus))
}
