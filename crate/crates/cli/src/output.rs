use selout::inference::AnalysisReport;
use selout::simulation::SimReport;

/// Left-aligned columns separated by two spaces.
fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    for row in rows {
        out.push_str(&line(row.clone()));
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x}"))
}

/// Numbers use `{}`, the shortest form that parses back to the same `f64`
/// as the JSON output.
pub fn fit_table(r: &AnalysisReport) -> String {
    let outliers = if r.detection.outliers.is_empty() {
        "none".to_string()
    } else {
        r.detection.outliers.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
    };
    let mut out = format!(
        "detection: {} (cutoff {})\noutliers: {}\nobservations: {} kept of {}\nadjusted R²: {}\nσ: {}",
        r.detection.method, r.detection.cutoff, outliers, r.fit.kept, r.fit.n, r.fit.adj_r2, r.fit.sigma.method,
    );
    if let Some(v) = r.fit.sigma.value {
        out.push_str(&format!(" = {v}"));
    }
    out.push_str(&format!(" (refit {})\nα: {}\n\n", r.fit.sigma.refit, r.fit.alpha));
    let rows: Vec<Vec<String>> = r
        .fit
        .coefficients
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                format!("{}", c.estimate),
                format!("{}", c.naive_p),
                format!("{}", c.selective_p),
                opt(c.ci_lo),
                opt(c.ci_hi),
                c.truncation_set.to_string(),
            ]
        })
        .collect();
    out + &render_table(&["coefficient", "estimate", "naiveP", "selectiveP", "ciLo", "ciHi", "truncationSet"], &rows)
}

pub fn sim_table(r: &SimReport) -> String {
    let mut out = format!(
        "{}: {} replications ({} excluded, {} failed), seed {}\n",
        r.kind, r.replications, r.excluded, r.failed, r.seed
    );
    if let Some(rate) = r.acceptance_rate {
        out.push_str(&format!("acceptance rate: {rate}\n"));
    }
    if let Some(t) = &r.target_outliers {
        let list: Vec<String> = t.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("conditioning outliers: [{}]\n", list.join(", ")));
    }
    out.push('\n');
    if !r.metrics.is_empty() {
        let rows: Vec<Vec<String>> = r
            .metrics
            .iter()
            .map(|m| {
                vec![
                    m.name.clone(),
                    opt(m.beta1),
                    format!("{}", m.rate),
                    format!("{}", m.se),
                    format!("{}/{}", m.successes, m.trials),
                ]
            })
            .collect();
        out.push_str(&render_table(&["metric", "beta1", "rate", "se", "count"], &rows));
    }
    if !r.ks.is_empty() {
        let rows: Vec<Vec<String>> = r
            .ks
            .iter()
            .map(|k| vec![k.name.clone(), k.result.n.to_string(), format!("{}", k.result.statistic), format!("{}", k.result.p_value)])
            .collect();
        out.push_str(&render_table(&["ks", "n", "statistic", "pValue"], &rows));
    }
    out
}
