//! Series ingestion and plot-grid emission (two-column CSV).

use anyhow::{bail, Context};

use statinc::increments::IncrementSpec;
use statinc::interpolate::ObservationSeries;
use statinc::minimax::LeastFavorablePair;
use statinc::InterpolationSolution;

use crate::report::fmt_f64;

/// Parse a `t,value` CSV (optional header, `#` comments allowed). Gap rows
/// must be absent.
pub fn parse_series(text: &str, spec: &IncrementSpec) -> anyhow::Result<ObservationSeries> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            bail!("line {}: expected `t,value`", lineno + 1);
        };
        if cols.next().is_some() {
            bail!("line {}: expected exactly two columns", lineno + 1);
        }
        let t: i64 = match a.trim().parse() {
            Ok(t) => t,
            Err(_) if lineno == 0 => continue, // header row
            Err(e) => bail!("line {}: bad time index: {e}", lineno + 1),
        };
        let value: f64 = b
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad value", lineno + 1))?;
        pairs.push((t, value));
    }
    Ok(ObservationSeries::new(spec, pairs)?)
}

/// CSV of (λ, f, g, |h|, arg h) over a midpoint grid, for plotting.
pub fn characteristic_grid_csv(
    sol: &InterpolationSolution,
    points: usize,
) -> anyhow::Result<String> {
    let mut out = String::from("lambda,f,g,h_abs,h_arg\n");
    for j in 0..points {
        let lambda = statinc::quad::node(j, points);
        let f = sol.model().f().eval(lambda)?;
        let g = sol.model().noise_value(lambda)?;
        let h = sol.spectral_characteristic(lambda)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(lambda),
            fmt_f64(f),
            fmt_f64(g),
            fmt_f64(h.norm()),
            fmt_f64(h.arg()),
        ));
    }
    Ok(out)
}

/// CSV of the least favorable pair (and γ when present) on its grid.
pub fn least_favorable_csv(pair: &LeastFavorablePair) -> anyhow::Result<String> {
    let nodes = pair.nodes();
    let mut out = if pair.cointegrated {
        String::from("lambda,f0,p0,gamma\n")
    } else {
        String::from("lambda,f0,g0,gamma\n")
    };
    for (j, &lambda) in nodes.iter().enumerate() {
        let f0 = pair.f0.eval(lambda)?;
        let g0 = pair.g0.eval(lambda)?;
        let gamma = pair.gamma.get(j).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(lambda),
            fmt_f64(f0),
            fmt_f64(g0),
            if gamma.is_finite() {
                fmt_f64(gamma)
            } else {
                String::new()
            },
        ));
    }
    Ok(out)
}
