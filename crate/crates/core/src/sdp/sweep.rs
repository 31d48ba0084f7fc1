//! Bell-value sweeps and their CSV/JSON forms.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Flags, SolveStatus, SolverOptions, Template};
use crate::error::{Error, Result};

/// One solved point. `bound` is NaN when the solve did not succeed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub bell_value: f64,
    pub bound: f64,
    pub status: SolveStatus,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: String,
    pub level: String,
    pub flags: Flags,
    pub points: Vec<SweepPoint>,
}

/// `points` evenly spaced values from `from` to `to` inclusive.
pub fn bell_values(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::InvalidParameter("a sweep needs at least one point".into()));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    if !(from < to) {
        return Err(Error::InvalidParameter(format!(
            "sweep range needs from < to, got [{from}, {to}]"
        )));
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { to } else { from + step * k as f64 })
        .collect())
}

/// Solves the template at every value. Points are independent and are spread
/// over `threads` workers; failures are recorded per point.
pub fn sweep(
    template: &Template,
    values: &[f64],
    options: &SolverOptions,
    threads: usize,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty sweep range".into()));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "sweep values must be strictly increasing".into(),
        ));
    }
    let solve = |b: f64| -> SweepPoint {
        let start = Instant::now();
        let (bound, status) = match template.solve_at(b, options) {
            Ok(s) => (s.value, s.status),
            Err(e) => {
                log::warn!("point {b}: {e}");
                (f64::NAN, SolveStatus::NumericalFailure)
            }
        };
        SweepPoint {
            bell_value: b,
            bound,
            status,
            seconds: start.elapsed().as_secs_f64(),
        }
    };
    let threads = threads.clamp(1, values.len());
    let points = if threads == 1 {
        values.iter().map(|&b| solve(b)).collect()
    } else {
        let mut slots: Vec<Option<SweepPoint>> = vec![None; values.len()];
        std::thread::scope(|s| {
            for (k, chunk) in slots.chunks_mut(values.len().div_ceil(threads)).enumerate() {
                let offset = k * values.len().div_ceil(threads);
                let solve = &solve;
                s.spawn(move || {
                    for (j, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(solve(values[offset + j]));
                    }
                });
            }
        });
        slots.into_iter().map(|p| p.expect("every point solved")).collect()
    };
    Ok(SweepResult {
        scenario: template.bell.name.clone(),
        level: format!("basis of {} words", template.basis_size),
        flags: template.flags,
        points,
    })
}

impl SweepResult {
    pub fn all_failed(&self) -> bool {
        self.points.iter().all(|p| !p.status.is_solved())
    }

    /// CSV with columns `bell_value,bound,status,seconds`. With
    /// `timing = false` the seconds column is zeroed so reruns are
    /// byte-identical.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            let mut p = p.clone();
            if !timing {
                p.seconds = 0.0;
            }
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, timing: bool) -> Result<String> {
        let mut r = self.clone();
        if !timing {
            for p in &mut r.points {
                p.seconds = 0.0;
            }
        }
        Ok(serde_json::to_string_pretty(&r)?)
    }

    pub fn read_csv(text: &str) -> Result<Vec<SweepPoint>> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        r.deserialize()
            .map(|row| row.map_err(Error::from))
            .collect()
    }
}
