//! Toeplitz covariance matrices, alternative families and Gaussian sampling.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ellipsoid::WeightPlan;
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Relative pivot floor: pivots must exceed `PIVOT_FLOOR · p`.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// First row `(σ_0 = 1, σ_1, …, σ_{p−1})` of a symmetric Toeplitz correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    first_row: Vec<f64>,
}

impl ToeplitzSpec {
    pub fn new(first_row: Vec<f64>) -> Result<Self> {
        match first_row.first() {
            None => return Err(Error::Parameter("Toeplitz spec needs p >= 1".into())),
            Some(&s0) if s0 != 1.0 => {
                return Err(Error::Parameter(format!("sigma_0 must equal 1, got {s0}")))
            }
            _ => {}
        }
        if let Some((j, s)) = first_row
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, s)| !(s.abs() < 1.0))
        {
            return Err(Error::Parameter(format!(
                "correlation sigma_{j} = {s} must satisfy |sigma_j| < 1"
            )));
        }
        Ok(Self { first_row })
    }

    pub fn identity(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Parameter("Toeplitz spec needs p >= 1".into()));
        }
        let mut row = vec![0.0; p];
        row[0] = 1.0;
        Self::new(row)
    }

    /// Builds `(1, σ_1, …, σ_k, 0, …, 0)` of length `p` from lag correlations.
    pub fn from_lags(lags: &[f64], p: usize) -> Result<Self> {
        if lags.len() >= p {
            return Err(Error::Parameter(format!(
                "{} lags do not fit into dimension {p}",
                lags.len()
            )));
        }
        let mut row = vec![0.0; p];
        row[0] = 1.0;
        row[1..=lags.len()].copy_from_slice(lags);
        Self::new(row)
    }

    pub fn p(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// `σ_1, …, σ_{p−1}`.
    pub fn lags(&self) -> &[f64] {
        &self.first_row[1..]
    }

    /// Dense `p × p` matrix with entries `σ_{|i−j|}`.
    pub fn build_matrix(&self) -> Vec<Vec<f64>> {
        let p = self.p();
        (0..p)
            .map(|i| (0..p).map(|j| self.first_row[i.abs_diff(j)]).collect())
            .collect()
    }

    /// `1 − 2 Σ_{j≥1} |σ_j|`; a positive value certifies positive definiteness.
    pub fn gershgorin_bound(&self) -> f64 {
        1.0 - 2.0 * self.lags().iter().map(|s| s.abs()).sum::<f64>()
    }

    /// `Σ_{j≥1} σ_j²`.
    pub fn energy(&self) -> f64 {
        self.lags().iter().map(|s| s * s).sum()
    }

    pub fn is_positive_definite(&self) -> PdCheck {
        match CholeskyFactor::new(self) {
            Ok(f) => PdCheck {
                positive_definite: true,
                min_pivot: f.min_pivot,
            },
            Err(Error::PdViolation { min_pivot, .. }) => PdCheck {
                positive_definite: false,
                min_pivot,
            },
            Err(_) => unreachable!("factorization only fails with a pivot violation"),
        }
    }

    /// CSV line `p,σ_0,…,σ_{p−1}`.
    pub fn to_csv_line(&self) -> String {
        let mut line = self.p().to_string();
        for s in &self.first_row {
            write!(line, ",{s}").expect("writing to a String");
        }
        line
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let mut fields = line.trim().split(',').map(str::trim);
        let p: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Parameter(format!("bad Toeplitz CSV line: {line:?}")))?;
        let row = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("bad correlation value {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != p {
            return Err(Error::Parameter(format!(
                "Toeplitz CSV line declares p = {p} but has {} values",
                row.len()
            )));
        }
        Self::new(row)
    }
}

/// Verdict of the factorization-based positive-definiteness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdCheck {
    pub positive_definite: bool,
    /// Smallest pivot met before completion or failure.
    pub min_pivot: f64,
}

/// Lower-triangular factor `L` with `L Lᵀ = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    p: usize,
    /// Half-bandwidth: the largest lag with a nonzero covariance. The factor
    /// of a banded matrix keeps the same band.
    band: usize,
    /// Row `i` holds columns `i − band ..= i` at offsets `0 ..= band`.
    lower: Vec<f64>,
    min_pivot: f64,
}

impl CholeskyFactor {
    pub fn new(spec: &ToeplitzSpec) -> Result<Self> {
        let p = spec.p();
        let floor = PIVOT_FLOOR * p as f64;
        let row = spec.first_row();
        let band = row.iter().rposition(|&v| v != 0.0).unwrap_or(0);
        let width = band + 1;
        let mut lower = vec![0.0; p * width];
        let mut min_pivot = f64::INFINITY;
        for i in 0..p {
            let lo = i.saturating_sub(band);
            for j in lo..=i {
                // Columns shared by rows i and j inside both bands.
                let start = lo.max(j.saturating_sub(band));
                let dot: f64 = (start..j)
                    .map(|k| lower[i * width + k + band - i] * lower[j * width + k + band - j])
                    .sum();
                let entry = row[i - j] - dot;
                if i == j {
                    min_pivot = min_pivot.min(entry);
                    if !(entry > floor) {
                        return Err(Error::PdViolation { min_pivot, row: i });
                    }
                    lower[i * width + band] = entry.sqrt();
                } else {
                    lower[i * width + j + band - i] = entry / lower[j * width + band];
                }
            }
        }
        Ok(Self {
            p,
            band,
            lower,
            min_pivot,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn bandwidth(&self) -> usize {
        self.band
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.band {
            return 0.0;
        }
        self.lower[i * (self.band + 1) + j + self.band - i]
    }

    /// Writes `L z` into `out`.
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let width = self.band + 1;
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.band);
            let row = &self.lower[i * width + lo + self.band - i..(i + 1) * width];
            *o = row.iter().zip(&z[lo..=i]).map(|(l, z)| l * z).sum();
        }
    }
}

/// `n × p` observations, one row per independent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    n: usize,
    p: usize,
    seed: u64,
}

impl SampleMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if n == 0 || p == 0 || rows.iter().any(|r| r.len() != p) {
            return Err(Error::Parameter(
                "sample matrix needs at least one non-empty row and equal row lengths".into(),
            ));
        }
        Ok(Self {
            data: rows.concat(),
            n,
            p,
            seed: 0,
        })
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            data: vec![0.0; n * p],
            n,
            p,
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.p..(k + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    /// Raw row-major data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Sampler for `N(0, Σ)` holding the factor of `Σ`. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    spec: ToeplitzSpec,
    factor: CholeskyFactor,
}

impl GaussianSampler {
    pub fn new(spec: &ToeplitzSpec) -> Result<Self> {
        Ok(Self {
            factor: CholeskyFactor::new(spec)?,
            spec: spec.clone(),
        })
    }

    pub fn spec(&self) -> &ToeplitzSpec {
        &self.spec
    }

    /// Draws `n` independent rows; deterministic in `(seed, n, Σ)`.
    pub fn sample(&self, n: usize, seed: u64) -> SampleMatrix {
        let p = self.factor.p();
        let mut rng = rng_for(seed);
        let mut data = vec![0.0; n * p];
        let mut z = vec![0.0; p];
        for row in data.chunks_exact_mut(p) {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            self.factor.apply(&z, row);
        }
        SampleMatrix { data, n, p, seed }
    }
}

/// One-shot sampling; factorizes `spec` on every call.
pub fn sample_gaussian(spec: &ToeplitzSpec, n: usize, seed: u64) -> Result<SampleMatrix> {
    Ok(GaussianSampler::new(spec)?.sample(n, seed))
}

fn require_pd(spec: ToeplitzSpec) -> Result<ToeplitzSpec> {
    CholeskyFactor::new(&spec)?;
    Ok(spec)
}

/// Least-favorable matrix `Σ*` with first row `(1, σ*_1, …, σ*_T, 0, …)`.
pub fn critical_sigma_star(plan: &WeightPlan, p: usize) -> Result<ToeplitzSpec> {
    if plan.t >= p {
        return Err(Error::Parameter(format!(
            "plan truncation T = {} must be below p = {p}",
            plan.t
        )));
    }
    require_pd(ToeplitzSpec::from_lags(&plan.sigma_star, p)?)
}

/// Member of the sign-flipped family: lag `k ≤ T−1` gets `signs[k−1]·σ*_k`,
/// lag `T` and beyond are zero.
pub fn random_sign_family_with_signs(
    plan: &WeightPlan,
    p: usize,
    signs: &[bool],
) -> Result<ToeplitzSpec> {
    if plan.t >= p {
        return Err(Error::Parameter(format!(
            "plan truncation T = {} must be below p = {p}",
            plan.t
        )));
    }
    if signs.len() != plan.t - 1 {
        return Err(Error::Parameter(format!(
            "expected {} signs, got {}",
            plan.t - 1,
            signs.len()
        )));
    }
    let lags: Vec<f64> = plan.sigma_star[..plan.t - 1]
        .iter()
        .zip(signs)
        .map(|(s, &plus)| if plus { *s } else { -*s })
        .collect();
    require_pd(ToeplitzSpec::from_lags(&lags, p)?)
}

/// Random member of the sign-flipped family; signs are i.i.d. fair draws from `seed`.
pub fn random_sign_family(plan: &WeightPlan, p: usize, seed: u64) -> Result<ToeplitzSpec> {
    let mut rng = rng_for(seed);
    let signs: Vec<bool> = (1..plan.t).map(|_| rng.random()).collect();
    random_sign_family_with_signs(plan, p, &signs)
}

/// `σ_j = j^{−2}/M` with `ψ(M) = (Σ_{j<p} j^{−4})^{1/2} / M`.
pub fn family_poly(m: f64, p: usize) -> Result<(ToeplitzSpec, f64)> {
    let lags = poly_lags(m, p)?;
    let psi = (1..p).map(|j| (j as f64).powi(-4)).sum::<f64>().sqrt() / m;
    Ok((require_pd(ToeplitzSpec::from_lags(&lags, p)?)?, psi))
}

/// Lags `σ_j = j^{−2}/M` for `j = 1..p−1`, without a definiteness check.
pub fn poly_lags(m: f64, p: usize) -> Result<Vec<f64>> {
    if !(m > 0.0 && m.is_finite()) || p < 2 {
        return Err(Error::Parameter(format!(
            "polynomial family needs M > 0 and p >= 2, got M = {m}, p = {p}"
        )));
    }
    Ok((1..p).map(|j| (j as f64).powi(-2) / m).collect())
}

/// Tridiagonal `σ_1 = ρ`, other lags zero; `ψ(ρ) = ρ`.
pub fn family_tridiag(rho: f64, p: usize) -> Result<(ToeplitzSpec, f64)> {
    if !(rho > 0.0 && rho < 1.0) || p < 2 {
        return Err(Error::Parameter(format!(
            "tridiagonal family needs 0 < rho < 1 and p >= 2, got rho = {rho}, p = {p}"
        )));
    }
    Ok((require_pd(ToeplitzSpec::from_lags(&[rho], p)?)?, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipsoid::{solve_weight_plan, EllipsoidSpec};
    use proptest::prelude::*;

    fn tridiag(rho: f64, p: usize) -> ToeplitzSpec {
        ToeplitzSpec::from_lags(&[rho], p).unwrap()
    }

    /// Smallest eigenvalue of the tridiagonal Toeplitz matrix: 1 + 2ρ cos(pπ/(p+1)).
    fn tridiag_min_eigenvalue(rho: f64, p: usize) -> f64 {
        (1..=p)
            .map(|k| 1.0 + 2.0 * rho * (k as f64 * std::f64::consts::PI / (p as f64 + 1.0)).cos())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn build_matrix_examples() {
        let id = ToeplitzSpec::identity(4).unwrap().build_matrix();
        for (i, row) in id.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
        let m = ToeplitzSpec::new(vec![1.0, 0.5, 0.25])
            .unwrap()
            .build_matrix();
        assert_eq!(
            m,
            vec![
                vec![1.0, 0.5, 0.25],
                vec![0.5, 1.0, 0.5],
                vec![0.25, 0.5, 1.0]
            ]
        );
        let t = tridiag(0.3, 5).build_matrix();
        for i in 0..5usize {
            for j in 0..5usize {
                let expect = match i.abs_diff(j) {
                    0 => 1.0,
                    1 => 0.3,
                    _ => 0.0,
                };
                assert_eq!(t[i][j], expect);
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ToeplitzSpec::new(vec![]).is_err());
        assert!(ToeplitzSpec::new(vec![0.9, 0.1]).is_err());
        assert!(ToeplitzSpec::new(vec![1.0, 1.0]).is_err());
        assert!(ToeplitzSpec::new(vec![1.0, f64::NAN]).is_err());
        assert!(ToeplitzSpec::from_lags(&[0.1, 0.1], 2).is_err());
    }

    #[test]
    fn positive_definiteness_examples() {
        let id = ToeplitzSpec::identity(6).unwrap().is_positive_definite();
        assert!(id.positive_definite);
        assert_eq!(id.min_pivot, 1.0);
        assert!(tridiag_min_eigenvalue(0.9, 10) < 0.0);
        assert!(!tridiag(0.9, 10).is_positive_definite().positive_definite);
        assert!(tridiag_min_eigenvalue(0.3, 10) > 0.0);
        assert!(tridiag(0.3, 10).is_positive_definite().positive_definite);
    }

    #[test]
    fn factor_reproduces_matrix() {
        let banded = ToeplitzSpec::from_lags(&[0.3, -0.1, 0.05], 15).unwrap();
        for spec in [family_poly(3.0, 12).unwrap().0, banded] {
            let f = CholeskyFactor::new(&spec).unwrap();
            let m = spec.build_matrix();
            let p = spec.p();
            for i in 0..p {
                for j in 0..p {
                    let v: f64 = (0..p).map(|k| f.entry(i, k) * f.entry(j, k)).sum();
                    assert!((v - m[i][j]).abs() < 1e-13);
                }
            }
        }
        let f =
            CholeskyFactor::new(&ToeplitzSpec::from_lags(&[0.3, -0.1, 0.05], 15).unwrap()).unwrap();
        assert_eq!(f.bandwidth(), 3);
        assert_eq!(
            CholeskyFactor::new(&ToeplitzSpec::identity(4).unwrap())
                .unwrap()
                .bandwidth(),
            0
        );
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(ToeplitzSpec::identity(5).unwrap().gershgorin_bound(), 1.0);
        assert!((tridiag(0.2, 8).gershgorin_bound() - 0.6).abs() < 1e-15);
        let plan =
            solve_weight_plan(&EllipsoidSpec::exponential(0.5, 1.0, 0.05).unwrap(), 60).unwrap();
        let star = critical_sigma_star(&plan, 60).unwrap();
        assert!(star.gershgorin_bound() > 0.0);
    }

    #[test]
    fn critical_matrix_examples() {
        let plan =
            solve_weight_plan(&EllipsoidSpec::polynomial(1.0, 1.0, 0.1).unwrap(), 60).unwrap();
        assert_eq!(plan.t, 22);
        let star = critical_sigma_star(&plan, 60).unwrap();
        let nonzero = star.lags().iter().filter(|&&s| s != 0.0).count();
        assert_eq!(nonzero, 21); // σ*_T is exactly zero
        assert_eq!(&star.lags()[..22], plan.sigma_star.as_slice());
        assert!(star.lags()[22..].iter().all(|&s| s == 0.0));

        let plan =
            solve_weight_plan(&EllipsoidSpec::exponential(0.5, 1.0, 0.05).unwrap(), 60).unwrap();
        assert_eq!(plan.t, 5);
        let star = critical_sigma_star(&plan, 60).unwrap();
        assert_eq!(&star.lags()[..5], plan.sigma_star.as_slice());

        let mut zero = plan.clone();
        zero.sigma_star.iter_mut().for_each(|s| *s = 0.0);
        assert_eq!(
            critical_sigma_star(&zero, 60).unwrap(),
            ToeplitzSpec::identity(60).unwrap()
        );
        assert!(critical_sigma_star(&plan, 5).is_err());
    }

    #[test]
    fn random_sign_examples() {
        let plan =
            solve_weight_plan(&EllipsoidSpec::polynomial(1.0, 1.0, 0.1).unwrap(), 60).unwrap();
        let plus = random_sign_family_with_signs(&plan, 60, &vec![true; plan.t - 1]).unwrap();
        let mut truncated = plan.sigma_star.clone();
        truncated[plan.t - 1] = 0.0;
        assert_eq!(plus, ToeplitzSpec::from_lags(&truncated, 60).unwrap());

        let a = random_sign_family(&plan, 60, 7).unwrap();
        let b = random_sign_family(&plan, 60, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.is_positive_definite().positive_definite);
        assert!(a.lags().iter().any(|&s| s < 0.0));
        assert_eq!(a.energy(), plus.energy());
    }

    #[test]
    fn family_examples() {
        let (spec, psi) = family_poly(2.0, 60).unwrap();
        assert_eq!(spec.lags()[0], 0.5);
        assert_eq!(spec.lags()[1], 0.125);
        let partial: f64 = (1..60).map(|j| (j as f64).powi(-4)).sum();
        assert!((psi - partial.sqrt() / 2.0).abs() < 1e-15);
        assert!((psi - 0.5202).abs() < 1e-4);
        assert!((partial - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-5);

        let (spec, psi) = family_tridiag(0.3, 10).unwrap();
        assert_eq!(psi, 0.3);
        assert_eq!(spec.lags()[0], 0.3);
        assert!(matches!(
            family_tridiag(0.9, 10),
            Err(Error::PdViolation { .. })
        ));

        let (far, psi_far) = family_poly(1e9, 30).unwrap();
        assert!(psi_far < 1e-8);
        assert!(far.lags().iter().all(|s| s.abs() < 1e-8));
    }

    #[test]
    fn csv_line_round_trip() {
        let (spec, _) = family_poly(3.0, 7).unwrap();
        let line = spec.to_csv_line();
        assert!(line.starts_with("7,1,"));
        assert_eq!(ToeplitzSpec::from_csv_line(&line).unwrap(), spec);
        assert!(ToeplitzSpec::from_csv_line("3,1,0.5").is_err());
        assert!(ToeplitzSpec::from_csv_line("2,1,x").is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = tridiag(0.3, 10);
        let a = sample_gaussian(&spec, 20, 99).unwrap();
        let b = sample_gaussian(&spec, 20, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_gaussian(&spec, 20, 100).unwrap());
        assert!(sample_gaussian(&tridiag(0.9, 10), 5, 1).is_err());
    }

    fn lag_correlation(x: &SampleMatrix, lag: usize) -> f64 {
        let (n, p) = (x.n(), x.p());
        let mut sum = 0.0;
        for row in x.rows() {
            for i in lag..p {
                sum += row[i] * row[i - lag];
            }
        }
        sum / (n * (p - lag)) as f64
    }

    #[test]
    fn sampled_lag_covariances() {
        let spec = tridiag(0.3, 10);
        let x = sample_gaussian(&spec, 5000, 3).unwrap();
        assert!((lag_correlation(&x, 1) - 0.3).abs() < 0.02);

        let (spec, _) = family_poly(2.0, 8).unwrap();
        let n = 10_000;
        let x = sample_gaussian(&spec, n, 11).unwrap();
        let tol = 4.0 / (n as f64).sqrt();
        for j in 1..=5 {
            // single column pair (0, j)
            let c: f64 = x.rows().map(|r| r[0] * r[j]).sum::<f64>() / n as f64;
            assert!((c - spec.first_row()[j]).abs() < tol, "lag {j}: {c}");
        }

        let id = ToeplitzSpec::identity(4).unwrap();
        let x = sample_gaussian(&id, 20_000, 5).unwrap();
        let c: f64 = x.rows().map(|r| r[1] * r[3]).sum::<f64>() / 20_000.0;
        assert!(c.abs() < 4.0 / (20_000f64).sqrt());
    }

    #[test]
    fn tridiagonal_oracle_agrees() {
        for p in [5, 10, 25] {
            for k in 1..=9 {
                let rho = k as f64 / 10.0;
                let expected = tridiag_min_eigenvalue(rho, p) > 0.0;
                assert_eq!(
                    tridiag(rho, p).is_positive_definite().positive_definite,
                    expected
                );
            }
        }
    }

    proptest! {
        #[test]
        fn matrix_is_symmetric_toeplitz(lags in proptest::collection::vec(-0.99f64..0.99, 0..12)) {
            let spec = ToeplitzSpec::from_lags(&lags, lags.len() + 1).unwrap();
            let m = spec.build_matrix();
            let p = spec.p();
            for d in 0..p {
                for i in 0..p - d {
                    prop_assert_eq!(m[i][i + d], spec.first_row()[d]);
                    prop_assert_eq!(m[i + d][i], spec.first_row()[d]);
                }
            }
        }

        #[test]
        fn gershgorin_implies_pd(
            lags in proptest::collection::vec(-0.3f64..0.3, 1..20),
            extra in 0usize..10,
        ) {
            let spec = ToeplitzSpec::from_lags(&lags, lags.len() + 1 + extra).unwrap();
            if spec.gershgorin_bound() > 0.0 {
                prop_assert!(spec.is_positive_definite().positive_definite);
            }
        }

        #[test]
        fn csv_round_trip(lags in proptest::collection::vec(-0.999f64..0.999, 0..15)) {
            let spec = ToeplitzSpec::from_lags(&lags, lags.len() + 1).unwrap();
            prop_assert_eq!(ToeplitzSpec::from_csv_line(&spec.to_csv_line()).unwrap(), spec);
        }
    }
}
