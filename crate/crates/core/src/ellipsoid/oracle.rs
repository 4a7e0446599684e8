//! Brute-force solver for the sup-inf weight design problem.
//!
//! For weights `w ≥ 0` with `Σ w² = 1/2` the inner problem
//! `inf Σ w_j s_j` over `s_j = σ_j² ≥ 0`, `Σ s_j ≥ ψ²`, `Σ a_j s_j ≤ L` is a
//! linear program whose optimum sits on a vertex of the feasible polytope;
//! every vertex has at most two nonzero coordinates, so the program is
//! solved exactly by enumeration. The outer maximization alternates with
//! it: the current mixture `s̄` of inner solutions is projected onto the
//! weight sphere (`w = s̄ / (√2 |s̄|)`), the inner LP answers, and `s̄` takes
//! a pairwise Frank–Wolfe step toward the answer. The weight value
//! `inf_s w·s` and `|s̄|/√2` bracket the saddle value.

use super::{EllipsoidSpec, WeightPlan};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;
const RELATIVE_GAP: f64 = 1e-6;
const MAX_INDEX_RANGE: usize = 4000;

/// Output of [`extremal_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// `inf_s Σ w_j s_j` attained by `weights` (lower end of the bracket).
    pub value: f64,
    /// `|s̄|/√2` for the final mixture (upper end of the bracket).
    pub upper_bound: f64,
    /// Weights over lags `1..=index_range`, `Σ w² = 1/2`.
    pub weights: Vec<f64>,
    pub index_range: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    i: usize,
    vi: f64,
    k: usize,
    vk: f64,
}

impl Vertex {
    fn dot(&self, x: &[f64]) -> f64 {
        self.vi * x[self.i] + self.vk * x[self.k]
    }

    fn norm_sq(&self) -> f64 {
        self.vi * self.vi + self.vk * self.vk
    }
}

fn vertices(penalty: &[f64], psi_sq: f64, l: f64) -> Vec<Vertex> {
    let mut out = Vec::new();
    for (i, &a) in penalty.iter().enumerate() {
        if a * psi_sq <= l {
            out.push(Vertex {
                i,
                vi: psi_sq,
                k: i,
                vk: 0.0,
            });
        }
        if l / a >= psi_sq {
            out.push(Vertex {
                i,
                vi: l / a,
                k: i,
                vk: 0.0,
            });
        }
    }
    for (i, &ai) in penalty.iter().enumerate() {
        if ai * psi_sq > l {
            break;
        }
        for (k, &ak) in penalty.iter().enumerate().skip(i + 1) {
            if ak <= ai || ak * psi_sq < l {
                continue;
            }
            let d = ak - ai;
            out.push(Vertex {
                i,
                vi: (ak * psi_sq - l) / d,
                k,
                vk: (l - ai * psi_sq) / d,
            });
        }
    }
    out
}

/// Solves the weight design problem numerically over lags
/// `1..=max(grid_size, 3T)`. Test oracle for [`super::solve_weight_plan`].
pub fn extremal_oracle(spec: &EllipsoidSpec, grid_size: usize) -> Result<OracleSolution> {
    spec.validate()?;
    if grid_size < 50 {
        return Err(Error::Parameter(format!(
            "oracle grid must have at least 50 lags, got {grid_size}"
        )));
    }
    let t_real = spec.class.truncation_real(spec.psi).floor();
    if !(t_real < MAX_INDEX_RANGE as f64 / 3.0) {
        return Err(Error::Parameter(format!(
            "truncation {t_real} too large for the brute-force oracle"
        )));
    }
    let index_range = grid_size.max(3 * t_real as usize);
    if index_range > MAX_INDEX_RANGE {
        return Err(Error::Parameter(format!(
            "oracle grid of {index_range} lags exceeds {MAX_INDEX_RANGE}"
        )));
    }

    let psi_sq = spec.psi * spec.psi;
    let l = spec.class.l();
    let penalty: Vec<f64> = (1..=index_range)
        .map(|j| spec.class.penalty(j))
        .take_while(|a| a.is_finite())
        .collect();
    let verts = vertices(&penalty, psi_sq, l);
    if verts.is_empty() {
        return Err(Error::Parameter(
            "alternative set is empty: no sequence in the class reaches the radius".into(),
        ));
    }

    // Start from the shortest vertex.
    let start = (0..verts.len())
        .min_by(|&a, &b| verts[a].norm_sq().total_cmp(&verts[b].norm_sq()))
        .unwrap_or(0);
    let mut active: Vec<(usize, f64)> = vec![(start, 1.0)];
    let mut mix = vec![0.0; index_range];
    mix[verts[start].i] += verts[start].vi;
    mix[verts[start].k] += verts[start].vk;

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut gap = f64::INFINITY;
    for iteration in 0..MAX_ITERATIONS {
        let norm = mix.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (best, best_val) = verts
            .iter()
            .enumerate()
            .map(|(idx, v)| (idx, v.dot(&mix)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty vertex set");
        let lower = best_val / (sqrt2 * norm);
        let upper = norm / sqrt2;
        gap = (upper - lower) / upper;
        if gap < RELATIVE_GAP {
            return Ok(OracleSolution {
                value: lower,
                upper_bound: upper,
                weights: mix.iter().map(|x| x.max(0.0) / (sqrt2 * norm)).collect(),
                index_range,
                iterations: iteration,
            });
        }

        // Pairwise step: move mass from the worst active vertex to `best`.
        let (slot, _) = active
            .iter()
            .enumerate()
            .max_by(|a, b| verts[a.1 .0].dot(&mix).total_cmp(&verts[b.1 .0].dot(&mix)))
            .expect("active set is never empty");
        let (away, away_mass) = active[slot];
        let (fw, aw) = (verts[best], verts[away]);
        let mut dir = vec![0.0; index_range];
        dir[fw.i] += fw.vi;
        dir[fw.k] += fw.vk;
        dir[aw.i] -= aw.vi;
        dir[aw.k] -= aw.vk;
        let dd: f64 = dir.iter().map(|d| d * d).sum();
        if dd == 0.0 {
            break;
        }
        let slope: f64 = dir.iter().zip(&mix).map(|(d, m)| d * m).sum();
        let step = (-slope / dd).clamp(0.0, away_mass);
        for (m, d) in mix.iter_mut().zip(&dir) {
            *m += step * d;
        }
        active[slot].1 -= step;
        match active.iter_mut().find(|(idx, _)| *idx == best) {
            Some(entry) => entry.1 += step,
            None => active.push((best, step)),
        }
        active.retain(|&(_, mass)| mass > 1e-15);
    }
    Err(Error::OracleDivergence {
        iterations: MAX_ITERATIONS,
        gap,
    })
}

impl OracleSolution {
    /// Relative distance between the oracle's saddle value and a plan's `b_discrete`.
    pub fn relative_gap_to(&self, plan: &WeightPlan) -> f64 {
        (plan.b_discrete - self.value).abs() / self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipsoid::solve_weight_plan;

    // Frozen from an independent KKT solve (s_j = (μ − ν a_j)₊, bisection
    // on ν and μ) over the same index range.
    const POLY_01: f64 = 0.001_673_850_257_244_275;
    const POLY_02: f64 = 0.009_688_748_239_234_572;
    const EXP_01: f64 = 0.002_876_755_093_107_222;
    const EXP_02: f64 = 0.013_626_030_915_652_608;

    fn oracle(spec: EllipsoidSpec) -> OracleSolution {
        extremal_oracle(&spec, 50).unwrap()
    }

    #[test]
    fn matches_kkt_reference_values() {
        let cases = [
            (EllipsoidSpec::polynomial(1.0, 1.0, 0.1).unwrap(), POLY_01),
            (EllipsoidSpec::polynomial(1.0, 1.0, 0.2).unwrap(), POLY_02),
            (EllipsoidSpec::exponential(0.5, 1.0, 0.1).unwrap(), EXP_01),
            (EllipsoidSpec::exponential(0.5, 1.0, 0.2).unwrap(), EXP_02),
        ];
        for (spec, reference) in cases {
            let sol = oracle(spec);
            assert!(
                ((sol.value - reference) / reference).abs() < 1e-5,
                "{spec:?}: {} vs {reference}",
                sol.value
            );
            assert!(sol.value <= sol.upper_bound);
            let sq: f64 = sol.weights.iter().map(|w| w * w).sum();
            assert!((sq - 0.5).abs() < 1e-12);
            assert!(sol.weights.iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn closed_form_weights_attain_oracle_value() {
        // The plan's own guarantee inf_s w*·s sits at the saddle value even
        // though b_discrete = w*·σ*² does not (σ* is not in the feasible set
        // at finite ψ).
        let cases = [
            (EllipsoidSpec::polynomial(1.0, 1.0, 0.1).unwrap(), POLY_01),
            (EllipsoidSpec::polynomial(1.0, 1.0, 0.2).unwrap(), POLY_02),
        ];
        for (spec, reference) in cases {
            let plan = solve_weight_plan(&spec, 1000).unwrap();
            let sol = oracle(spec);
            let penalty: Vec<f64> = (1..=sol.index_range)
                .map(|j| spec.class.penalty(j))
                .collect();
            let mut w = plan.weights.clone();
            w.resize(sol.index_range, 0.0);
            let inner = vertices(&penalty, spec.psi * spec.psi, 1.0)
                .iter()
                .map(|v| v.dot(&w))
                .fold(f64::INFINITY, f64::min);
            assert!(
                ((inner - reference) / reference).abs() < 1e-3,
                "{inner} vs {reference}"
            );
            assert!(inner <= reference * (1.0 + 1e-12));
            let sigma_sq: f64 = plan.sigma_star.iter().map(|s| s * s).sum();
            assert!(sigma_sq < spec.psi * spec.psi);
        }
    }

    #[test]
    fn closed_form_gap_shrinks_with_radius_but_exceeds_two_percent() {
        let gap = |psi: f64| {
            let spec = EllipsoidSpec::polynomial(1.0, 1.0, psi).unwrap();
            let plan = solve_weight_plan(&spec, 10_000).unwrap();
            oracle(spec).relative_gap_to(&plan)
        };
        let (g20, g10) = (gap(0.2), gap(0.1));
        assert!(g20 > g10);
        // 0.0927 and 0.0502 by the KKT reference
        assert!((g20 - 0.092_67).abs() < 1e-3 && (g10 - 0.050_21).abs() < 1e-3);
        assert!(g10 > 0.02);
    }

    #[test]
    fn rejects_invalid_input() {
        let bad = EllipsoidSpec {
            class: crate::ellipsoid::EllipsoidClass::Polynomial { alpha: 1.0, l: 1.0 },
            psi: 1.0,
        };
        assert!(matches!(
            extremal_oracle(&bad, 50),
            Err(Error::Parameter(_))
        ));
        let ok = EllipsoidSpec::polynomial(1.0, 1.0, 0.2).unwrap();
        assert!(matches!(extremal_oracle(&ok, 49), Err(Error::Parameter(_))));
        // e^{2·3·1}·0.81 > L: nothing in the class reaches the radius
        let empty = EllipsoidSpec::exponential(3.0, 1.0, 0.9).unwrap();
        assert!(matches!(
            extremal_oracle(&empty, 50),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn budget_exhaustion_reports_divergence() {
        let spec = EllipsoidSpec::polynomial(1.0, 1.0, 0.02).unwrap();
        assert!(matches!(
            extremal_oracle(&spec, 50),
            Err(Error::OracleDivergence {
                iterations: 500,
                ..
            })
        ));
    }
}
