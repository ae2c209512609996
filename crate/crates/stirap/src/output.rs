//! Result serialization: plot-ready CSV files, JSON metadata sidecars,
//! gnuplot script stubs, and the failure manifest.
//!
//! Every file starts with (or contains) the SHA-256 hash of the config
//! that produced it, so outputs can always be traced back to their
//! inputs. Formatting is fixed-precision scientific notation and row
//! order follows the (deterministic) sweep grids, so identical config and
//! code produce bit-identical CSV.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::experiments::{
    FockCurve, P0Estimate, RabiStirapComparison, SweepResult, ThermalScan,
};

/// Fixed float formatting for CSV cells; NaN (failed points) prints as
/// `nan`, which gnuplot skips.
fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9e}")
    }
}

/// Scale factor from SI to the display unit of an axis tag.
fn unit_scale(unit: &str) -> (f64, &'static str) {
    match unit {
        "us" => (1e6, "_us"),
        "s_factor" => (1.0, ""),
        "fock_n" => (1.0, ""),
        _ => (1.0, ""),
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}

/// Writes all artifacts of one run into a single output directory.
pub struct OutputWriter {
    dir: PathBuf,
    hash: String,
}

impl OutputWriter {
    pub fn new(dir: &Path, config_hash: &str) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: config_hash.to_string(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn csv_header(&self, columns: &[String]) -> String {
        format!("# config_hash: {}\n{}\n", self.hash, columns.join(","))
    }

    fn write(&self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }

    /// Long-format CSV for a sweep: one row per grid point with axis
    /// values (times in µs), efficiency, optional smoothed efficiency,
    /// diagnostics, and the error text of failed points.
    pub fn write_sweep(&self, stem: &str, result: &SweepResult) -> io::Result<PathBuf> {
        let scales: Vec<(f64, &str)> = result.axes.iter().map(|a| unit_scale(a.unit)).collect();
        let mut columns: Vec<String> = result
            .axes
            .iter()
            .zip(&scales)
            .map(|(a, (_, suffix))| format!("{}{}", a.name, suffix))
            .collect();
        columns.push("efficiency".into());
        if result.smoothed.is_some() {
            columns.push("efficiency_smoothed".into());
        }
        columns.extend(
            ["trace_error", "purity_drift", "truncation_population", "error"]
                .map(String::from),
        );
        let mut out = self.csv_header(&columns);
        for (i, p) in result.points.iter().enumerate() {
            let mut row: Vec<String> = p
                .coords
                .iter()
                .zip(&scales)
                .map(|(&c, (scale, _))| fmt(c * scale))
                .collect();
            row.push(fmt(p.efficiency));
            if let Some(sm) = &result.smoothed {
                row.push(fmt(sm[i]));
            }
            row.push(fmt(p.diag.trace_error));
            row.push(fmt(p.diag.purity_drift));
            row.push(fmt(p.diag.truncation_population));
            row.push(p.error.as_deref().map(sanitize).unwrap_or_default());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        self.write(&format!("{stem}.csv"), &out)
    }

    /// Time-resolved Fock-state transfer curves in long format
    /// (`n, t_us, transfer`).
    pub fn write_fock_curves(&self, stem: &str, curves: &[FockCurve]) -> io::Result<PathBuf> {
        let mut out = self.csv_header(&["n".into(), "t_us".into(), "transfer".into()]);
        for c in curves {
            for (t, p) in c.t.iter().zip(&c.transfer) {
                out.push_str(&format!("{},{},{}\n", c.n, fmt(t * 1e6), fmt(*p)));
            }
        }
        self.write(&format!("{stem}.csv"), &out)
    }

    /// Rabi-vs-STIRAP comparison in long format: a `series` tag
    /// (`rabi` | `stirap`), the transfer time in µs, and the thermal
    /// transfer efficiency. STIRAP rows use the effective transfer time
    /// `(1 + s)·t_pulse`.
    pub fn write_comparison(
        &self,
        stem: &str,
        cmp: &RabiStirapComparison,
    ) -> io::Result<PathBuf> {
        let mut out = self.csv_header(&[
            "series".into(),
            "time_us".into(),
            "efficiency".into(),
        ]);
        for (t, p) in cmp.rabi.times.iter().zip(&cmp.rabi.thermal) {
            out.push_str(&format!("rabi,{},{}\n", fmt(t * 1e6), fmt(*p)));
        }
        for (t, p) in cmp.t_trans.iter().zip(&cmp.stirap.thermal) {
            out.push_str(&format!("stirap,{},{}\n", fmt(t * 1e6), fmt(*p)));
        }
        self.write(&format!("{stem}.csv"), &out)
    }

    /// Thermometry result bundle: the sideband scans, the extracted
    /// ground-state population, and the inferred temperature (in Doppler
    /// units).
    pub fn write_thermometry(
        &self,
        stem: &str,
        bsb: &ThermalScan,
        rsb: &ThermalScan,
        p0: &P0Estimate,
        temperature_doppler: f64,
        window_us: (f64, f64),
    ) -> io::Result<PathBuf> {
        let doc = serde_json::json!({
            "config_hash": self.hash,
            "t_pulse_us": bsb.t_pulses.iter().map(|t| t * 1e6).collect::<Vec<_>>(),
            "bsb_thermal": bsb.thermal,
            "rsb_thermal": rsb.thermal,
            "bsb_ground": bsb.ground,
            "rsb_ground": rsb.ground,
            "extraction_window_us": [window_us.0, window_us.1],
            "p0": p0.p0,
            "p0_uncertainty": p0.uncertainty,
            "window_points": p0.window_points,
            "temperature_doppler_units": temperature_doppler,
        });
        self.write(
            &format!("{stem}.json"),
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )
    }

    /// JSON metadata sidecar: config hash, full resolved configuration,
    /// code version, wall time, warnings and worst-case diagnostics.
    pub fn write_metadata(
        &self,
        stem: &str,
        config: &RunConfig,
        wall_time_s: f64,
        warnings: &[String],
        diagnostics: serde_json::Value,
        failed_points: usize,
    ) -> io::Result<PathBuf> {
        let doc = serde_json::json!({
            "config_hash": self.hash,
            "experiment": config.kind.name(),
            "code_version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": wall_time_s,
            "config": config,
            "warnings": warnings,
            "diagnostics": diagnostics,
            "failed_points": failed_points,
        });
        self.write(
            &format!("{stem}.meta.json"),
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )
    }

    /// Minimal gnuplot script stub for a figure. `plot_cmds` are full
    /// gnuplot `plot` expressions (without the leading keyword).
    pub fn write_gnuplot(
        &self,
        stem: &str,
        title: &str,
        xlabel: &str,
        ylabel: &str,
        plot_cmds: &[String],
    ) -> io::Result<PathBuf> {
        let mut out = format!(
            "# {stem}.gp — config {hash}\nset datafile separator ','\nset title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset key top right\n",
            hash = self.hash,
        );
        out.push_str(&format!("plot {}\n", plot_cmds.join(", \\\n     ")));
        self.write(&format!("{stem}.gp"), &out)
    }

    /// Machine-readable manifest of grid points that failed numerically;
    /// written next to the (partial) results when exit code 3 is used.
    pub fn write_failure_manifest(
        &self,
        entries: &[serde_json::Value],
    ) -> io::Result<PathBuf> {
        let doc = serde_json::json!({
            "config_hash": self.hash,
            "failures": entries,
        });
        self.write(
            "failure_manifest.json",
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )
    }
}
