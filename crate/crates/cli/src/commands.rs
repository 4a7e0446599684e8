//! Subcommand implementations. Each returns the one-line summary printed on success.

use std::path::Path;

use toeplitz_minimax::ellipsoid::{
    separation_rate, solve_weight_plan, EllipsoidClass, EllipsoidSpec,
};
use toeplitz_minimax::montecarlo::{
    compare_tests, estimate_null_percentile, normality_check, power_curve, Comparison, Family,
    PowerCurve, SimulationConfig, TestKind,
};
use toeplitz_minimax::toeplitz::{
    family_poly, family_tridiag, poly_lags, CholeskyFactor, ToeplitzSpec,
};

use crate::error::CliError;
use crate::output::{num, write_file, Table};
use crate::params::{FamilyName, Params};
use crate::svg::{self, Marker, Panel, Series};

pub fn weights(params: &Params) -> Result<String, CliError> {
    let spec = params.spec()?;
    let p = params.require_p()?;
    let plan = solve_weight_plan(&spec, p)?;
    let mut table = Table::new(&["j", "w", "sigma_star"]);
    table
        .meta("command", "weights")
        .extend_meta(params.class_echo()?)
        .meta("psi", spec.psi)
        .meta("p", p)
        .meta("T", plan.t)
        .meta("clamped", plan.clamped)
        .meta("lambda", plan.lambda)
        .meta("b_discrete", plan.b_discrete)
        .meta("b_closed", plan.b_closed);
    for (j, (w, s)) in plan.weights.iter().zip(&plan.sigma_star).enumerate() {
        table.push(vec![(j + 1).to_string(), num(*w), num(*s)]);
    }
    let path = params.output_or("weights.csv");
    table.write(&path)?;
    Ok(format!(
        "weights: T={} b_discrete={} b_closed={} -> {}",
        plan.t,
        plan.b_discrete,
        plan.b_closed,
        path.display()
    ))
}

fn class_params(class: &EllipsoidClass) -> (&'static str, String) {
    match *class {
        EllipsoidClass::Polynomial { alpha, l } => ("poly", format!("alpha={alpha};L={l}")),
        EllipsoidClass::Exponential { a, l } => ("exp", format!("A={a};L={l}")),
    }
}

pub fn rate(params: &Params) -> Result<String, CliError> {
    let class = params.class()?;
    let (n, p) = (params.require_n()?, params.require_p()?);
    let psi = separation_rate(&class, n, p)?;
    let (name, desc) = class_params(&class);
    let mut table = Table::new(&["class", "params", "n", "p", "psi_tilde"]);
    table
        .meta("command", "rate")
        .extend_meta(params.class_echo()?)
        .meta("n", n)
        .meta("p", p);
    table.push(vec![
        name.into(),
        desc,
        n.to_string(),
        p.to_string(),
        num(psi),
    ]);
    let path = params.output_or("rate.csv");
    table.write(&path)?;
    Ok(format!("rate: psi_tilde={psi} -> {}", path.display()))
}

/// Spec under test: explicit lags, a study family member, or the critical matrix.
fn pd_candidate(
    params: &Params,
    p: usize,
) -> Result<(ToeplitzSpec, Vec<(String, String)>), CliError> {
    let mut echo = vec![("p".to_string(), p.to_string())];
    if let Some(lags) = &params.lags {
        echo.push((
            "lags".into(),
            lags.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        ));
        return Ok((ToeplitzSpec::from_lags(lags, p)?, echo));
    }
    if let Some(family) = params.family {
        let value = params.value.ok_or_else(|| CliError::missing("value"))?;
        let lags = match family {
            FamilyName::Poly => poly_lags(value, p)?,
            FamilyName::Tridiag => vec![value],
        };
        echo.push(("family".into(), format!("{family:?}").to_lowercase()));
        echo.push(("value".into(), value.to_string()));
        return Ok((ToeplitzSpec::from_lags(&lags, p)?, echo));
    }
    let spec = params.spec()?;
    let plan = solve_weight_plan(&spec, p)?;
    echo.extend(params.class_echo()?);
    echo.push(("psi".into(), spec.psi.to_string()));
    echo.push(("matrix".into(), "critical".into()));
    let mut row = vec![1.0];
    row.extend(&plan.sigma_star);
    row.resize(p, 0.0);
    Ok((ToeplitzSpec::new(row)?, echo))
}

pub fn check_pd(params: &Params) -> Result<String, CliError> {
    let p = params.require_p()?;
    let (spec, echo) = pd_candidate(params, p)?;
    let check = spec.is_positive_definite();
    let mut header = vec!["p".to_string()];
    header.extend((0..p).map(|j| format!("sigma_{j}")));
    let mut text = String::new();
    text.push_str("# command=check-pd\n");
    for (k, v) in &echo {
        text.push_str(&format!("# {k}={v}\n"));
    }
    text.push_str(&format!("# gershgorin_bound={}\n", spec.gershgorin_bound()));
    text.push_str(&format!("# min_pivot={}\n", check.min_pivot));
    text.push_str(&format!(
        "# positive_definite={}\n",
        check.positive_definite
    ));
    text.push_str(&header.join(","));
    text.push('\n');
    text.push_str(&spec.to_csv_line());
    text.push('\n');
    let path = params.output_or("check-pd.csv");
    write_file(&path, text.as_bytes())?;
    if !check.positive_definite {
        CholeskyFactor::new(&spec)?;
    }
    Ok(format!(
        "check-pd: positive definite, min_pivot={} gershgorin_bound={} -> {}",
        check.min_pivot,
        spec.gershgorin_bound(),
        path.display()
    ))
}

fn simulation_config(params: &Params, psi: f64) -> Result<SimulationConfig, CliError> {
    let spec = EllipsoidSpec::new(params.class()?, psi)?;
    let config = SimulationConfig::new(
        params.require_n()?,
        params.require_p()?,
        params.replicates(),
        params.seed(),
        spec,
    )
    .with_test(params.test())
    .with_level(params.level());
    config.validate()?;
    Ok(config)
}

fn sim_echo(params: &Params, config: &SimulationConfig) -> Result<Vec<(String, String)>, CliError> {
    let mut echo = params.class_echo()?;
    echo.extend([
        ("n".to_string(), config.n.to_string()),
        ("p".to_string(), config.p.to_string()),
        ("replicates".to_string(), config.replicates.to_string()),
        ("seed".to_string(), config.master_seed.to_string()),
        ("level".to_string(), config.alpha_level.to_string()),
    ]);
    Ok(echo)
}

fn test_name(kind: TestKind) -> &'static str {
    match kind {
        TestKind::Chi => "chi",
        TestKind::Cm => "cm",
    }
}

pub fn simulate_null(params: &Params) -> Result<String, CliError> {
    let config = simulation_config(params, params.require_psi()?)?;
    let calibration = estimate_null_percentile(&config)?;
    let (t, ks) = match config.test_kind {
        TestKind::Chi => (
            config.plan()?.t.to_string(),
            num(normality_check(&config)?.ks_statistic),
        ),
        TestKind::Cm => (String::new(), String::new()),
    };
    let mut table = Table::new(&[
        "test",
        "n",
        "p",
        "t",
        "replicates",
        "level",
        "threshold",
        "mean",
        "variance",
        "ks_statistic",
    ]);
    table
        .meta("command", "simulate-null")
        .extend_meta(sim_echo(params, &config)?)
        .meta("psi", config.plan_spec.psi);
    let s = calibration.summary;
    table.push(vec![
        test_name(config.test_kind).into(),
        config.n.to_string(),
        config.p.to_string(),
        t,
        config.replicates.to_string(),
        num(config.alpha_level),
        num(calibration.threshold),
        num(s.mean),
        num(s.variance),
        ks,
    ]);
    let path = params.output_or("simulate-null.csv");
    table.write(&path)?;
    Ok(format!(
        "simulate-null: threshold={} mean={} variance={} -> {}",
        calibration.threshold,
        s.mean,
        s.variance,
        path.display()
    ))
}

/// Radius of the first family member; only used to seed a valid plan spec.
fn placeholder_psi(family: &Family, p: usize) -> Result<f64, CliError> {
    let first = match family {
        Family::PolyM(g) => g.first().map(|&m| family_poly(m, p).map(|r| r.1)),
        Family::Tridiag(g) => g.first().map(|&r| family_tridiag(r, p).map(|r| r.1)),
    };
    Ok(first.transpose()?.filter(|&psi| psi < 1.0).unwrap_or(0.5))
}

pub fn family_echo(family: &Family) -> Vec<(String, String)> {
    let (name, grid) = match family {
        Family::PolyM(g) => ("poly", g),
        Family::Tridiag(g) => ("tridiag", g),
    };
    vec![
        ("family".into(), name.into()),
        (
            "grid".into(),
            grid.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        ),
    ]
}

pub fn study_config(params: &Params, family: &Family) -> Result<SimulationConfig, CliError> {
    let psi = placeholder_psi(family, params.require_p()?)?;
    simulation_config(params, psi)
}

pub fn power_rows(table: &mut Table, prefix: &[String], curve: &PowerCurve) {
    for pt in &curve.points {
        let mut row = prefix.to_vec();
        row.extend([
            num(pt.psi),
            pt.label.clone(),
            num(pt.power_hat),
            num(pt.mc_stderr),
            num(pt.threshold_used),
        ]);
        table.push(row);
    }
}

pub fn compare_rows(table: &mut Table, prefix: &[String], cmp: &Comparison) {
    for (chi, cm) in cmp.chi.points.iter().zip(&cmp.cm.points) {
        let mut row = prefix.to_vec();
        row.extend([
            num(chi.psi),
            chi.label.clone(),
            num(chi.power_hat),
            num(chi.mc_stderr),
            num(cm.power_hat),
            num(cm.mc_stderr),
        ]);
        table.push(row);
    }
}

pub const POWER_COLUMNS: [&str; 5] = ["psi", "label", "power", "stderr", "threshold"];
pub const COMPARE_COLUMNS: [&str; 6] = [
    "psi",
    "label",
    "power_chi",
    "stderr_chi",
    "power_cm",
    "stderr_cm",
];

pub fn series(name: impl Into<String>, curve: &PowerCurve) -> Series {
    Series {
        name: name.into(),
        points: curve
            .points
            .iter()
            .map(|pt| (pt.psi, pt.power_hat, pt.mc_stderr))
            .collect(),
    }
}

pub fn rate_marker(class: &EllipsoidClass, n: usize, p: usize) -> Result<Marker, CliError> {
    let x = separation_rate(class, n, p)?;
    Ok(Marker {
        x,
        label: format!("psi_tilde(n={n},p={p})"),
    })
}

pub fn power_panel(title: String, x_label: &str) -> Panel {
    Panel {
        title,
        x_label: x_label.into(),
        y_label: "power".into(),
        y_range: Some((0.0, 1.0)),
        ..Panel::default()
    }
}

pub fn x_label(family: &Family) -> &'static str {
    match family {
        Family::PolyM(_) => "psi(M)",
        Family::Tridiag(_) => "psi(rho)",
    }
}

pub fn write_svg(
    params: &Params,
    csv_path: &Path,
    panels: &[Panel],
) -> Result<Option<String>, CliError> {
    if !params.svg() {
        return Ok(None);
    }
    let path = csv_path.with_extension("svg");
    write_file(&path, svg::render(panels).as_bytes())?;
    Ok(Some(path.display().to_string()))
}

fn with_svg(summary: String, svg: Option<String>) -> String {
    match svg {
        Some(path) => format!("{summary}, {path}"),
        None => summary,
    }
}

pub fn power(params: &Params) -> Result<String, CliError> {
    let family = params.family();
    let config = study_config(params, &family)?;
    let curve = power_curve(&config, &family)?;
    let mut table = Table::new(&POWER_COLUMNS);
    table
        .meta("command", "power")
        .meta("test", test_name(config.test_kind))
        .extend_meta(sim_echo(params, &config)?)
        .extend_meta(family_echo(&family));
    power_rows(&mut table, &[], &curve);
    let path = params.output_or("power.csv");
    table.write(&path)?;
    let mut panel = power_panel(format!("n={}, p={}", config.n, config.p), x_label(&family));
    panel
        .series
        .push(series(test_name(config.test_kind), &curve));
    panel
        .markers
        .push(rate_marker(&config.plan_spec.class, config.n, config.p)?);
    let svg = write_svg(params, &path, &[panel])?;
    Ok(with_svg(
        format!("power: {} points -> {}", curve.points.len(), path.display()),
        svg,
    ))
}

pub fn compare(params: &Params) -> Result<String, CliError> {
    let family = params.family();
    let config = study_config(params, &family)?;
    let cmp = compare_tests(&config, &family)?;
    let mut table = Table::new(&COMPARE_COLUMNS);
    table
        .meta("command", "compare")
        .extend_meta(sim_echo(params, &config)?)
        .extend_meta(family_echo(&family));
    compare_rows(&mut table, &[], &cmp);
    let path = params.output_or("compare.csv");
    table.write(&path)?;
    let mut panel = power_panel(format!("n={}, p={}", config.n, config.p), x_label(&family));
    panel.series.push(series("chi", &cmp.chi));
    panel.series.push(series("cm", &cmp.cm));
    let svg = write_svg(params, &path, &[panel])?;
    Ok(with_svg(
        format!(
            "compare: {} points -> {}",
            cmp.chi.points.len(),
            path.display()
        ),
        svg,
    ))
}
