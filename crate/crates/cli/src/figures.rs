//! One-command reproductions of the simulation figures.

use toeplitz_minimax::ellipsoid::{EllipsoidClass, EllipsoidSpec};
use toeplitz_minimax::montecarlo::{
    compare_tests, power_curve, rho_grid, statistic_samples, Family, SimulationConfig, M_GRID,
};
use toeplitz_minimax::toeplitz::{family_poly, ToeplitzSpec};

use crate::commands::{
    compare_rows, family_echo, power_panel, power_rows, rate_marker, series, write_svg, x_label,
    COMPARE_COLUMNS, POWER_COLUMNS,
};
use crate::error::CliError;
use crate::output::{num, Table};
use crate::params::Params;
use crate::svg::{Panel, Series};

pub const NAMES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

const CLASS: EllipsoidClass = EllipsoidClass::Polynomial { alpha: 1.0, l: 1.0 };
/// `M` values whose statistic distributions are shown next to the null.
const FIG1_M: [f64; 5] = [2.0, 3.0, 4.0, 8.0, 80.0];
/// Radius used for the null series of the distribution figure.
const FIG1_NULL_M: f64 = 8.0;
const FIG1_BINS: usize = 40;
const FIG2_P: [usize; 4] = [10, 30, 50, 70];
/// `(n, p)` panels of the comparison figures: `n > p`, `n = p`, `n < p`.
const COMPARE_PANELS: [(usize, usize); 3] = [(30, 10), (30, 30), (10, 70)];

struct Preset {
    table: Table,
    panels: Vec<Panel>,
}

fn config(params: &Params, n: usize, p: usize, psi: f64) -> Result<SimulationConfig, CliError> {
    let config = SimulationConfig::new(
        n,
        p,
        params.replicates(),
        params.seed(),
        EllipsoidSpec::new(CLASS, psi)?,
    );
    config.validate()?;
    Ok(config)
}

fn base_table(columns: &[&str], name: &str, params: &Params) -> Table {
    let mut table = Table::new(columns);
    table
        .meta("command", "figure")
        .meta("name", name)
        .meta("class", "poly")
        .meta("alpha", 1)
        .meta("L", 1)
        .meta("replicates", params.replicates())
        .meta("seed", params.seed());
    table
}

/// Histograms of `n(p−T)Â_n` under the null and several `Σ(M)` at `n = 40, p = 60`.
fn fig1(params: &Params) -> Result<Preset, CliError> {
    let (n, p) = (40, 60);
    let mut series_data: Vec<(String, Vec<f64>)> = Vec::new();
    let null_psi = family_poly(FIG1_NULL_M, p)?.1;
    let null_cfg = config(params, n, p, null_psi)?;
    series_data.push((
        "M=0".into(),
        statistic_samples(&null_cfg, &ToeplitzSpec::identity(p)?, 0)?,
    ));
    for (i, &m) in FIG1_M.iter().enumerate() {
        let (spec, psi) = family_poly(m, p)?;
        let cfg = config(params, n, p, psi)?;
        series_data.push((
            format!("M={m}"),
            statistic_samples(&cfg, &spec, i as u64 + 1)?,
        ));
    }

    let (lo, hi) = series_data
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    let width = (hi - lo) / FIG1_BINS as f64;
    let edge = |k: usize| {
        if k == FIG1_BINS {
            hi
        } else {
            lo + width * k as f64
        }
    };

    let mut table = base_table(
        &["label", "bin_lower", "bin_upper", "count"],
        "fig1",
        params,
    );
    table
        .meta("n", n)
        .meta("p", p)
        .meta("null_plan_M", FIG1_NULL_M);
    let mut panel = Panel {
        title: format!("A(M) = n(p-T)A_n, n={n}, p={p}"),
        x_label: "A(M)".into(),
        y_label: "density".into(),
        ..Panel::default()
    };
    for (label, samples) in &series_data {
        let mut counts = vec![0usize; FIG1_BINS];
        for &v in samples {
            let k = (((v - lo) / width) as usize).min(FIG1_BINS - 1);
            counts[k] += 1;
        }
        let total = samples.len() as f64;
        let mut points = Vec::with_capacity(FIG1_BINS);
        for (k, &c) in counts.iter().enumerate() {
            table.push(vec![
                label.clone(),
                num(edge(k)),
                num(edge(k + 1)),
                c.to_string(),
            ]);
            points.push((
                lo + width * (k as f64 + 0.5),
                c as f64 / (total * width),
                0.0,
            ));
        }
        panel.series.push(Series {
            name: label.clone(),
            points,
        });
    }
    Ok(Preset {
        table,
        panels: vec![panel],
    })
}

/// Chi-test power against `Σ(M)` at `n = 10` for four dimensions.
fn fig2(params: &Params) -> Result<Preset, CliError> {
    let n = 10;
    let family = Family::PolyM(M_GRID.to_vec());
    let mut columns = vec!["n", "p"];
    columns.extend(POWER_COLUMNS);
    let mut table = base_table(&columns, "fig2", params);
    table.extend_meta(family_echo(&family));
    let mut panel = power_panel(format!("chi-test power, n={n}"), x_label(&family));
    for p in FIG2_P {
        let cfg = config(params, n, p, family_poly(M_GRID[0], p)?.1)?;
        let curve = power_curve(&cfg, &family)?;
        power_rows(&mut table, &[n.to_string(), p.to_string()], &curve);
        panel.series.push(series(format!("p={p}"), &curve));
        panel.markers.push(rate_marker(&CLASS, n, p)?);
    }
    Ok(Preset {
        table,
        panels: vec![panel],
    })
}

/// Chi versus CM power on common datasets, three `(n, p)` panels.
fn comparison(params: &Params, name: &str, family: Family) -> Result<Preset, CliError> {
    let mut columns = vec!["n", "p"];
    columns.extend(COMPARE_COLUMNS);
    let mut table = base_table(&columns, name, params);
    table.extend_meta(family_echo(&family));
    let mut panels = Vec::new();
    for (n, p) in COMPARE_PANELS {
        let psi = match &family {
            Family::PolyM(g) => family_poly(g[0], p)?.1,
            Family::Tridiag(g) => g[0],
        };
        let cmp = compare_tests(&config(params, n, p, psi)?, &family)?;
        compare_rows(&mut table, &[n.to_string(), p.to_string()], &cmp);
        let mut panel = power_panel(format!("n={n}, p={p}"), x_label(&family));
        panel.series.push(series("chi", &cmp.chi));
        panel.series.push(series("cm", &cmp.cm));
        panels.push(panel);
    }
    Ok(Preset { table, panels })
}

pub fn figure(params: &Params) -> Result<String, CliError> {
    let name = params
        .name
        .clone()
        .ok_or_else(|| CliError::missing("name"))?;
    let preset = match name.as_str() {
        "fig1" => fig1(params)?,
        "fig2" => fig2(params)?,
        "fig3" => comparison(params, "fig3", Family::PolyM(M_GRID.to_vec()))?,
        "fig4" => comparison(params, "fig4", Family::Tridiag(rho_grid()))?,
        other => {
            return Err(CliError::Validation(format!(
                "unknown figure {other:?}; expected one of {}",
                NAMES.join(", ")
            )))
        }
    };
    let path = params.output_or(&format!("{name}.csv"));
    preset.table.write(&path)?;
    let svg = write_svg(params, &path, &preset.panels)?;
    let mut summary = format!(
        "figure {name}: {} rows -> {}",
        preset.table.rows.len(),
        path.display()
    );
    if let Some(svg) = svg {
        summary.push_str(&format!(", {svg}"));
    }
    Ok(summary)
}
