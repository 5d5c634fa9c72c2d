//! Dark-period (entanglement sudden death) detection on sampled concurrence.

/// Default floor below which concurrence counts as dead.
pub const DEFAULT_ESD_THRESHOLD: f64 = 1e-6;

/// Maximal run of samples with `C ≤ threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkInterval {
    /// Time of the first sample in the run.
    pub death: f64,
    /// Time of the first sample back above the threshold; `None` if the
    /// series ends while still dark.
    pub revival: Option<f64>,
    /// Number of dark samples in the run.
    pub samples: usize,
}

impl DarkInterval {
    pub fn is_open(&self) -> bool {
        self.revival.is_none()
    }
}

/// Finds every maximal interval where `values ≤ threshold`.
///
/// `times` and `values` are parallel, uniformly sampled series.
pub fn detect_esd_intervals(times: &[f64], values: &[f64], threshold: f64) -> Vec<DarkInterval> {
    assert_eq!(times.len(), values.len(), "times and values must have equal length");
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v <= threshold {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            out.push(DarkInterval { death: times[s], revival: Some(times[i]), samples: i - s });
        }
    }
    if let Some(s) = start {
        out.push(DarkInterval { death: times[s], revival: None, samples: values.len() - s });
    }
    out
}

/// Intervals that end with a revival.
pub fn finite_intervals(intervals: &[DarkInterval]) -> impl Iterator<Item = &DarkInterval> {
    intervals.iter().filter(|iv| !iv.is_open())
}

/// Onset of the first dark interval, if any.
pub fn death_time(intervals: &[DarkInterval]) -> Option<f64> {
    intervals.first().map(|iv| iv.death)
}
