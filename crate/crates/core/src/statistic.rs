//! The weighted U-statistic `Â_n`, its moments, and the Frobenius-norm baseline.
//!
//! `Â_n` is an average over ordered pairs `k ≠ l` of observations of
//! `Σ_j w*_j S_{k,j} S_{l,j}`, where `S_{k,j} = Σ_{i=T+1}^{p} X_{k,i} X_{k,i−j}`
//! is the lag-`j` sum of row `k`. Because the kernel factorizes through the
//! lag sums, the pair sum reduces to `(Σ_k S_{k,j})² − Σ_k S_{k,j}²`, which
//! costs `O(nTp)` instead of `O(n²Tp²)`.

use crate::ellipsoid::WeightPlan;
use crate::error::{Error, Result};
use crate::toeplitz::{SampleMatrix, ToeplitzSpec};

/// Decision of the test `1(Â_n > t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    /// `Â_n`.
    pub statistic: f64,
    /// `n(p − T)·Â_n`, approximately standard normal under the null.
    pub normalized: f64,
    pub threshold: f64,
    pub reject: bool,
    pub plan_t: usize,
}

/// Null mean and variance of `Â_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Lag sums `S[k][j−1] = Σ_{i=T+1}^{p} X_{k,i}·X_{k,i−j}` for `j = 1..=T`, row-major `n × T`.
pub fn lag_sums(x: &SampleMatrix, t: usize) -> Result<Vec<f64>> {
    let p = x.p();
    if t == 0 || t >= p {
        return Err(Error::Parameter(format!(
            "lag sums need 1 <= T < p, got T = {t}, p = {p}"
        )));
    }
    let mut out = vec![0.0; x.n() * t];
    for (row, sums) in x.rows().zip(out.chunks_exact_mut(t)) {
        for (j, s) in sums.iter_mut().enumerate() {
            let lag = j + 1;
            // 0-based i from T to p−1 pairs with i − lag
            *s = row[t..]
                .iter()
                .zip(&row[t - lag..p - lag])
                .map(|(a, b)| a * b)
                .sum();
        }
    }
    Ok(out)
}

fn check_pairs(x: &SampleMatrix, plan: &WeightPlan) -> Result<()> {
    if x.n() < 2 {
        return Err(Error::Parameter(format!(
            "the U-statistic needs n >= 2 observations, got {}",
            x.n()
        )));
    }
    if plan.t >= x.p() {
        return Err(Error::Parameter(format!(
            "plan truncation T = {} must be below p = {}",
            plan.t,
            x.p()
        )));
    }
    Ok(())
}

/// `Â_n` evaluated through lag sums in `O(nTp)`.
pub fn u_statistic(x: &SampleMatrix, plan: &WeightPlan) -> Result<f64> {
    check_pairs(x, plan)?;
    let t = plan.t;
    let sums = lag_sums(x, t)?;
    let mut col_sum = vec![0.0; t];
    let mut col_sq = vec![0.0; t];
    for row in sums.chunks_exact(t) {
        for (j, &s) in row.iter().enumerate() {
            col_sum[j] += s;
            col_sq[j] += s * s;
        }
    }
    let pairs: f64 = plan
        .weights
        .iter()
        .zip(col_sum.iter().zip(&col_sq))
        .map(|(w, (s, sq))| w * (s * s - sq))
        .sum();
    Ok(pairs / normalizer(x.n(), x.p(), t))
}

/// Literal quadruple sum over `k ≠ l`, `j`, `i_1`, `i_2`. Test oracle only:
/// costs `O(n² T p²)`.
pub fn u_statistic_naive(x: &SampleMatrix, plan: &WeightPlan) -> Result<f64> {
    check_pairs(x, plan)?;
    let (n, p, t) = (x.n(), x.p(), plan.t);
    let mut total = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let (xk, xl) = (x.row(k), x.row(l));
            for j in 1..=t {
                let w = plan.weights[j - 1];
                for i1 in t..p {
                    for i2 in t..p {
                        total += w * xk[i1] * xk[i1 - j] * xl[i2] * xl[i2 - j];
                    }
                }
            }
        }
    }
    Ok(total / normalizer(n, p, t))
}

fn normalizer(n: usize, p: usize, t: usize) -> f64 {
    let m = (p - t) as f64;
    n as f64 * (n as f64 - 1.0) * m * m
}

/// `E_I Â_n = 0` and `Var_I Â_n = 1 / (n(n−1)(p−T)²)`.
pub fn null_moments(n: usize, p: usize, plan: &WeightPlan) -> Result<NullMoments> {
    if n < 2 || plan.t >= p {
        return Err(Error::Parameter(format!(
            "null moments need n >= 2 and T < p, got n = {n}, T = {}, p = {p}",
            plan.t
        )));
    }
    Ok(NullMoments {
        mean: 0.0,
        variance: 1.0 / normalizer(n, p, plan.t),
    })
}

/// `E_Σ Â_n = Σ_{j=1}^T w*_j σ_j²`.
pub fn alternative_mean(spec: &ToeplitzSpec, plan: &WeightPlan) -> Result<f64> {
    if plan.t >= spec.p() {
        return Err(Error::Parameter(format!(
            "plan truncation T = {} must be below p = {}",
            plan.t,
            spec.p()
        )));
    }
    Ok(plan.weighted_energy(spec.lags()))
}

/// Computes `Â_n` and rejects when it strictly exceeds `threshold`.
pub fn run_test(x: &SampleMatrix, plan: &WeightPlan, threshold: f64) -> Result<TestOutcome> {
    let statistic = u_statistic(x, plan)?;
    Ok(TestOutcome {
        statistic,
        normalized: normalized_factor(x.n(), x.p(), plan.t) * statistic,
        threshold,
        reject: statistic > threshold,
        plan_t: plan.t,
    })
}

/// `n(p − T)`.
pub fn normalized_factor(n: usize, p: usize, t: usize) -> f64 {
    n as f64 * (p - t) as f64
}

/// Level-`w` threshold `t^w = z_{1−w} / (n p)`.
pub fn level_threshold(n: usize, p: usize, level: f64) -> Result<f64> {
    Ok(crate::normal::normal_quantile(1.0 - level)? / (n as f64 * p as f64))
}

/// Total-error threshold `t* = b/2`, using the plan's discrete `b`.
pub fn total_error_threshold(plan: &WeightPlan) -> f64 {
    plan.b_discrete / 2.0
}

/// Frobenius-norm U-statistic of the pairwise Gram entries, divided by `p`:
/// `(2/(n(n−1))) Σ_{k<l} ((X_kᵀX_l)² − X_kᵀX_k − X_lᵀX_l + p) / p`.
pub fn cm_statistic(x: &SampleMatrix) -> Result<f64> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::Parameter(format!(
            "the CM statistic needs n >= 2 observations, got {n}"
        )));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let norms: Vec<f64> = x.rows().map(|r| dot(r, r)).collect();
    let pf = p as f64;
    let mut total = 0.0;
    for k in 0..n {
        for l in k + 1..n {
            let g = dot(x.row(k), x.row(l));
            total += g * g - norms[k] - norms[l] + pf;
        }
    }
    Ok(2.0 * total / (n as f64 * (n as f64 - 1.0)) / pf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipsoid::{solve_weight_plan, EllipsoidSpec};
    use crate::seed::rng_for;
    use proptest::prelude::*;
    use rand::Rng;

    fn plan_with(t: usize, weights: Vec<f64>) -> WeightPlan {
        let mut plan =
            solve_weight_plan(&EllipsoidSpec::polynomial(1.0, 1.0, 0.5).unwrap(), 100).unwrap();
        plan.t = t;
        plan.weights = weights;
        plan
    }

    fn random_matrix(n: usize, p: usize, seed: u64) -> SampleMatrix {
        let mut rng = rng_for(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        SampleMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn lag_sums_examples() {
        let x = SampleMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(lag_sums(&x, 1).unwrap(), vec![8.0]);
        assert!(lag_sums(&SampleMatrix::zeros(3, 5), 2)
            .unwrap()
            .iter()
            .all(|&s| s == 0.0));
        assert!(lag_sums(&x, 3).is_err());

        let x = random_matrix(4, 10, 1);
        let t = 3;
        let s = lag_sums(&x, t).unwrap();
        for k in 0..4 {
            for j in 1..=t {
                let mut direct = 0.0;
                for i in (t + 1)..=10 {
                    direct += x.row(k)[i - 1] * x.row(k)[i - 1 - j];
                }
                assert_eq!(s[k * t + j - 1], direct);
            }
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let plan = plan_with(2, vec![0.5, 0.5]);
        let x = SampleMatrix::zeros(3, 6);
        assert_eq!(u_statistic(&x, &plan).unwrap(), 0.0);
        assert_eq!(u_statistic_naive(&x, &plan).unwrap(), 0.0);
        let out = run_test(&x, &plan, 1e-9).unwrap();
        assert!(!out.reject);
    }

    #[test]
    fn naive_hand_computation() {
        // n = 2, p = 6, T = 2, w = (1, 1/2).
        // Row 1 = (1,0,2,1,0,1): S_1 = 2·0 + 1·2 + 0·1 + 1·0 = 2, S_2 = 2·1 + 1·0 + 0·2 + 1·1 = 3.
        // Row 2 = (1,1,1,1,1,1): S_1 = S_2 = 4.
        // Σ_{k≠l} = 2·(1·2·4 + 0.5·3·4) = 28; divided by 2·1·4² = 32.
        let plan = plan_with(2, vec![1.0, 0.5]);
        let x =
            SampleMatrix::from_rows(&[vec![1.0, 0.0, 2.0, 1.0, 0.0, 1.0], vec![1.0; 6]]).unwrap();
        assert_eq!(u_statistic_naive(&x, &plan).unwrap(), 28.0 / 32.0);
        assert_eq!(u_statistic(&x, &plan).unwrap(), 28.0 / 32.0);
    }

    #[test]
    fn requires_two_observations() {
        let plan = plan_with(2, vec![0.5, 0.5]);
        let x = SampleMatrix::zeros(1, 6);
        assert!(u_statistic(&x, &plan).is_err());
        assert!(cm_statistic(&x).is_err());
        assert!(u_statistic(&SampleMatrix::zeros(3, 2), &plan).is_err());
    }

    #[test]
    fn null_moment_examples() {
        let plan = plan_with(4, vec![0.5, 0.5, 0.0, 0.0]);
        let m = null_moments(10, 50, &plan).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.0 / 190_440.0);
        let m = null_moments(2, 30, &plan).unwrap();
        assert_eq!(m.variance, 1.0 / (2.0 * 26.0 * 26.0));
        assert!(null_moments(1, 30, &plan).is_err());
    }

    #[test]
    fn alternative_mean_examples() {
        let spec = EllipsoidSpec::polynomial(1.0, 1.0, 0.3).unwrap();
        let plan = solve_weight_plan(&spec, 60).unwrap();
        let id = ToeplitzSpec::identity(60).unwrap();
        assert_eq!(alternative_mean(&id, &plan).unwrap(), 0.0);
        let star = crate::toeplitz::critical_sigma_star(&plan, 60).unwrap();
        assert!((alternative_mean(&star, &plan).unwrap() - plan.b_discrete).abs() < 1e-15);
        let tri = ToeplitzSpec::from_lags(&[0.3], 60).unwrap();
        assert_eq!(
            alternative_mean(&tri, &plan).unwrap(),
            plan.weights[0] * 0.09
        );
    }

    #[test]
    fn thresholds() {
        let z = crate::normal::normal_quantile(0.95).unwrap();
        assert_eq!(level_threshold(40, 60, 0.05).unwrap(), z / 2400.0);
        let plan = plan_with(2, vec![0.5, 0.5]);
        assert_eq!(total_error_threshold(&plan), plan.b_discrete / 2.0);
    }

    #[test]
    fn strict_rejection_rule() {
        let plan = plan_with(2, vec![1.0, 0.5]);
        let x =
            SampleMatrix::from_rows(&[vec![1.0, 0.0, 2.0, 1.0, 0.0, 1.0], vec![1.0; 6]]).unwrap();
        let at = run_test(&x, &plan, 28.0 / 32.0).unwrap();
        assert!(!at.reject);
        assert!(run_test(&x, &plan, 28.0 / 32.0 - 1e-12).unwrap().reject);
        assert_eq!(at.normalized, 2.0 * 4.0 * 28.0 / 32.0);
    }

    fn cm_naive(x: &SampleMatrix) -> f64 {
        let (n, p) = (x.n(), x.p());
        let mut total = 0.0;
        for k in 0..n {
            for l in 0..n {
                if k < l {
                    let mut g = 0.0;
                    let mut nk = 0.0;
                    let mut nl = 0.0;
                    for i in 0..p {
                        g += x.row(k)[i] * x.row(l)[i];
                        nk += x.row(k)[i] * x.row(k)[i];
                        nl += x.row(l)[i] * x.row(l)[i];
                    }
                    total += g * g - nk - nl + p as f64;
                }
            }
        }
        total * 2.0 / (n * (n - 1)) as f64 / p as f64
    }

    #[test]
    fn cm_examples() {
        assert_eq!(cm_statistic(&SampleMatrix::zeros(5, 7)).unwrap(), 1.0);
        let x = SampleMatrix::from_rows(&[
            vec![1.0, -2.0, 0.0, 3.0],
            vec![2.0, 1.0, 1.0, -1.0],
            vec![0.0, 4.0, -3.0, 2.0],
        ])
        .unwrap();
        assert_eq!(cm_statistic(&x).unwrap(), cm_naive(&x));
        // Gram entries: x1·x2 = -3, x1·x3 = -2, x2·x3 = -1; norms 14, 7, 29.
        // Σ (g² − n_k − n_l + 4) = (9−21+4) + (4−43+4) + (1−36+4) = −74
        assert!((cm_statistic(&x).unwrap() - (-74.0 / 3.0 / 4.0)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn factored_matches_naive(
            n in 2usize..=6,
            p in 3usize..=12,
            t_raw in 1usize..=4,
            seed in any::<u64>(),
        ) {
            let t = t_raw.min(p - 1);
            let mut rng = rng_for(seed);
            let weights: Vec<f64> = (0..t).map(|_| rng.random_range(0.0..1.0)).collect();
            let plan = plan_with(t, weights);
            let x = random_matrix(n, p, seed ^ 0xabcdef);
            let fast = u_statistic(&x, &plan).unwrap();
            let slow = u_statistic_naive(&x, &plan).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-10 * (1.0 + slow.abs()));
        }

        #[test]
        fn cm_is_row_permutation_invariant(seed in any::<u64>(), shift in 1usize..5) {
            let x = random_matrix(5, 7, seed);
            let rows: Vec<Vec<f64>> = (0..5).map(|k| x.row((k + shift) % 5).to_vec()).collect();
            let y = SampleMatrix::from_rows(&rows).unwrap();
            let (a, b) = (cm_statistic(&x).unwrap(), cm_statistic(&y).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn decision_depends_only_on_sign(seed in any::<u64>(), c in 0.1f64..10.0) {
            let plan = plan_with(2, vec![0.6, 0.3]);
            let x = random_matrix(4, 8, seed);
            let stat = u_statistic(&x, &plan).unwrap();
            let t = stat * 0.9 + 0.01;
            let direct = run_test(&x, &plan, t).unwrap().reject;
            prop_assert_eq!(direct, (stat - t) > 0.0);
            prop_assert_eq!(direct, c * stat > c * t);
        }
    }
}
