//! CSV, metadata and plot-script rendering.
//!
//! Numbers use Rust's shortest round-trip formatting, which is locale
//! independent, so identical runs produce identical bytes.

use std::fmt::Write;

use crate::stats::EstimatorSeries;

/// `t,mean,stderr,frac_n0,...,frac_n{n_max}`.
pub fn series_csv(series: &EstimatorSeries) -> String {
    let mut out = String::from("t,mean,stderr");
    for k in 0..series.fractions.len() {
        write!(out, ",frac_n{k}").unwrap();
    }
    out.push('\n');
    for i in 0..series.times.len() {
        write!(out, "{},{},{}", series.times[i], series.mean[i], series.stderr[i]).unwrap();
        for f in &series.fractions {
            write!(out, ",{}", f[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Sidecar describing how a series was produced.
pub fn meta_text(series: &EstimatorSeries, extra: &[(String, String)]) -> String {
    let meta = &series.meta;
    let mut out = String::new();
    writeln!(out, "# sstp run metadata").unwrap();
    writeln!(out, "version = {}", env!("CARGO_PKG_VERSION")).unwrap();
    for (k, v) in &meta.config {
        writeln!(out, "{k} = {v}").unwrap();
    }
    writeln!(out, "n_samples = {}", series.n_samples).unwrap();
    writeln!(out, "n_paths = {}", series.n_paths).unwrap();
    writeln!(out, "aborted = {}", meta.aborted).unwrap();
    writeln!(out, "error_bars = standard error of the mean (unbiased sd / sqrt(n_samples))").unwrap();
    writeln!(out, "stderr_single_sample = {}", series.single_sample()).unwrap();
    writeln!(out, "max_imag_z = {}", series.max_imag_z()).unwrap();
    for (k, v) in extra {
        writeln!(out, "{k} = {v}").unwrap();
    }
    writeln!(out, "wall_time_s = {}", meta.wall_time_s).unwrap();
    out
}

/// Side-by-side means and errors of the two schemes.
pub fn compare_csv(primitive: &EstimatorSeries, generalized: &EstimatorSeries) -> String {
    let mut out = String::from("t,mean_primitive,stderr_primitive,mean_generalized,stderr_generalized\n");
    for i in 0..primitive.times.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            primitive.times[i],
            primitive.mean[i],
            primitive.stderr[i],
            generalized.mean[i],
            generalized.stderr[i]
        )
        .unwrap();
    }
    out
}

/// Gnuplot script plotting a comparison CSV with error bars.
pub fn gnuplot_script(csv_file: &str, title: &str, image_file: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set output '{image_file}'\n\
         set title '{title}'\n\
         set xlabel 't'\n\
         set ylabel '<sigma_z(t)>'\n\
         set yrange [-1.5:1.5]\n\
         set key top right\n\
         plot '{csv_file}' skip 1 using 1:2:3 with yerrorbars pt 8 lc rgb '#c03030' title 'primitive', \\\n     \
         '{csv_file}' skip 1 using 1:4:5 with yerrorbars pt 7 lc rgb '#202020' title 'generalized'\n"
    )
}

/// One row of the threshold-sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c_e: f64,
    /// Stderr at each probe time (NaN when the probe lies off the grid).
    pub stderr_at: Vec<f64>,
    /// Largest `|mean - mean_ref|` over grid times `t ≤ 4`, relative to the
    /// smallest threshold.
    pub max_dev_short: f64,
}

pub fn sweep_summary_csv(probe_times: &[f64], rows: &[SweepRow]) -> String {
    let mut out = String::from("c_e");
    for t in probe_times {
        write!(out, ",stderr_t{t}").unwrap();
    }
    out.push_str(",max_dev_t_le_4\n");
    for row in rows {
        write!(out, "{}", row.c_e).unwrap();
        for s in &row.stderr_at {
            write!(out, ",{s}").unwrap();
        }
        writeln!(out, ",{}", row.max_dev_short).unwrap();
    }
    out
}

/// Value of `values` at the grid time nearest `t`, if within half a spacing.
pub fn value_at(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let spacing = if times.len() > 1 { times[1] - times[0] } else { f64::INFINITY };
    times
        .iter()
        .zip(values)
        .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
        .filter(|(ti, _)| (*ti - t).abs() <= 0.5 * spacing)
        .map(|(_, v)| *v)
}
