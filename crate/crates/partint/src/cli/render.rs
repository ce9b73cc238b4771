//! Text output: trajectory tables and the machine-readable report block.
//!
//! Everything rendered here is byte-deterministic for a given run: floats
//! are always written with 17 significant digits in scientific notation,
//! columns and keys keep fixed orders, and nothing time- or path-dependent
//! enters the output.

use crate::dynamics::Trajectory;

/// Canonical float rendering: 17 significant digits, scientific notation.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// The `#machine` block closing every report: stable `key=value` lines a
/// script can parse without touching the prose above it.
pub(crate) struct Machine {
    lines: Vec<(String, String)>,
}

impl Machine {
    pub fn new(command: &str) -> Machine {
        Machine {
            lines: vec![("command".to_string(), command.to_string())],
        }
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push((key.to_string(), value.into()));
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.push(key, num(value));
    }

    pub fn render(&self) -> String {
        let mut out = String::from("#machine\n");
        for (k, v) in &self.lines {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Tab-separated trajectory table: time, every chart coordinate, then every
/// recorded observable (the energy always leads them), one row per state.
pub(crate) fn trajectory_table(trajectory: &Trajectory) -> String {
    let chart = trajectory.chart().clone();
    let observables = trajectory.observable_names();
    let mut header: Vec<&str> = vec!["t"];
    header.extend(chart.coord_names());
    header.extend(observables.iter().map(String::as_str));

    let series: Vec<&[f64]> = observables
        .iter()
        .map(|name| {
            trajectory
                .observable(name)
                .expect("every listed observable has a series")
        })
        .collect();

    let mut out = header.join("\t");
    out.push('\n');
    for (k, t) in trajectory.times().iter().enumerate() {
        out.push_str(&num(*t));
        for v in trajectory.states()[k].coords() {
            out.push('\t');
            out.push_str(&num(*v));
        }
        for s in &series {
            out.push('\t');
            out.push_str(&num(s[k]));
        }
        out.push('\n');
    }
    out
}
