//! Sweeps over spontaneous-emission rate and initial-state weight, producing
//! the `(t, α²)` concurrence surfaces.

pub mod esd;
pub mod io;
pub mod settings;

use rayon::prelude::*;

use crate::dynamics::{evolve, Diagnostics, EvolveConfig, FullState, Method, MAX_EXCITATIONS};
use crate::entanglement::{concurrence_general, concurrence_x_state, ConcurrencePath};
use crate::error::{Error, Result};
use crate::operators::{build_space, SystemParams};
use crate::states::{make_initial, InitialStateSpec, StateFamily};

pub use esd::{detect_esd_intervals, DarkInterval, DEFAULT_ESD_THRESHOLD};
pub use io::load_raw_state;

/// Largest population tolerated outside the ≤2-excitation sector.
pub const SECTOR_TOL: f64 = 1e-12;
/// Agreement required between the two concurrence paths before the X-state
/// path is trusted for a cell.
pub const SPOT_CHECK_TOL: f64 = 1e-10;

/// Unit in which spontaneous-emission rates are entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateUnit {
    Gamma0,
    Omega,
}

impl std::str::FromStr for RateUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma0" => Ok(RateUnit::Gamma0),
            "omega" => Ok(RateUnit::Omega),
            other => Err(Error::InvalidParameter(format!("unknown rate unit '{other}'"))),
        }
    }
}

/// Where each cell's initial state comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSource {
    Family { family: StateFamily, theta: f64, r: f64 },
    /// A user-supplied density matrix; the α² axis is unused (reported as NaN).
    Raw(FullState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub initial: InitialSource,
    pub alpha2: Vec<f64>,
    pub gamma_s: Vec<f64>,
    pub rate_unit: RateUnit,
    pub omega: f64,
    pub gamma_cavity: f64,
    pub gamma0: f64,
    pub n_fock: usize,
    pub t_max: f64,
    /// Number of output intervals; the time grid has `steps + 1` points.
    pub steps: usize,
    pub method: Method,
    pub keep_full: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SweepConfig {
    /// Strong-coupling reference rates for the given family and grids.
    pub fn reference(
        family: StateFamily,
        alpha2: Vec<f64>,
        gamma_s: Vec<f64>,
        rate_unit: RateUnit,
        t_max: f64,
        steps: usize,
    ) -> Self {
        let p = SystemParams::reference(0.0);
        Self {
            initial: InitialSource::Family { family, theta: 0.0, r: 1.0 },
            alpha2,
            gamma_s,
            rate_unit,
            omega: p.omega,
            gamma_cavity: p.gamma_cavity,
            gamma0: p.gamma0,
            n_fock: p.n_fock,
            t_max,
            steps,
            method: Method::default(),
            keep_full: false,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.gamma_s.is_empty() {
            return bad("gamma_s list is empty".into());
        }
        if matches!(self.initial, InitialSource::Family { .. }) && self.alpha2.is_empty() {
            return bad("alpha2 grid is empty".into());
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad(format!("t_max = {} must be > 0", self.t_max));
        }
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        for &g in &self.gamma_s {
            self.params(g).validate()?;
        }
        match &self.initial {
            InitialSource::Family { family, theta, r } => {
                for &alpha2 in &self.alpha2 {
                    InitialStateSpec { family: *family, alpha2, theta: *theta, r: *r }.validate()?;
                }
            }
            InitialSource::Raw(state) => {
                if state.dim() != 4 * self.n_fock {
                    return bad(format!(
                        "raw state dimension {} does not match fock cutoff {}",
                        state.dim(),
                        self.n_fock
                    ));
                }
                state.validate()?;
            }
        }
        Ok(())
    }

    /// Spontaneous-emission rate in units of γ₀.
    pub fn gamma_s_in_gamma0(&self, value: f64) -> f64 {
        match self.rate_unit {
            RateUnit::Gamma0 => value,
            RateUnit::Omega => value * self.omega,
        }
    }

    pub fn params(&self, gamma_s_entered: f64) -> SystemParams {
        let gamma_s = self.gamma_s_in_gamma0(gamma_s_entered);
        SystemParams {
            omega: self.omega,
            gamma_cavity: self.gamma_cavity,
            gamma_a: gamma_s,
            gamma_b: gamma_s,
            gamma0: self.gamma0,
            n_fock: self.n_fock,
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.t_max * k as f64 / self.steps as f64).collect()
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        let alphas: Vec<f64> = match self.initial {
            InitialSource::Family { .. } => self.alpha2.clone(),
            InitialSource::Raw(_) => vec![f64::NAN],
        };
        self.gamma_s.iter().flat_map(|&g| alphas.iter().map(move |&a| (g, a))).collect()
    }
}

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// In units of γ₀.
    pub gamma_s: f64,
    pub alpha2: f64,
    pub t_scaled: f64,
    pub concurrence: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub path: ConcurrencePath,
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub gamma_s: f64,
    pub alpha2: f64,
    pub first_row: usize,
    pub n_samples: usize,
    pub diagnostics: Diagnostics,
    /// `|C_general - C_x|` at the spot-check samples, when both were computed.
    pub spot_check: Option<f64>,
    /// Full states per sample, when the snapshot policy keeps them.
    pub snapshots: Option<Vec<FullState>>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub cells: Vec<CellSummary>,
}

impl SweepResult {
    pub fn cell_rows(&self, cell: &CellSummary) -> &[SweepRow] {
        &self.rows[cell.first_row..cell.first_row + cell.n_samples]
    }

    pub fn times(&self, cell: &CellSummary) -> Vec<f64> {
        self.cell_rows(cell).iter().map(|r| r.t_scaled).collect()
    }

    pub fn concurrence(&self, cell: &CellSummary) -> Vec<f64> {
        self.cell_rows(cell).iter().map(|r| r.concurrence).collect()
    }
}

struct CellOutput {
    rows: Vec<SweepRow>,
    summary: CellSummary,
}

fn run_cell(config: &SweepConfig, gamma_s_entered: f64, alpha2: f64, grid: &[f64]) -> Result<CellOutput> {
    let params = config.params(gamma_s_entered);
    let gamma_s = params.gamma_a;
    let fail = |reason: String| Error::CellFailed { gamma_s, alpha2, reason };
    let space = build_space(config.n_fock)?;
    let initial = match &config.initial {
        InitialSource::Family { family, theta, r } => {
            make_initial(&InitialStateSpec { family: *family, alpha2, theta: *theta, r: *r }, &space)?
        }
        InitialSource::Raw(state) => state.clone(),
    };
    let evolve_cfg = EvolveConfig { method: config.method, keep_full: config.keep_full };
    let traj = evolve(&initial, &params, grid, &evolve_cfg).map_err(|e| fail(e.to_string()))?;
    let diag = traj.diagnostics.clone();
    if diag.max_out_of_sector > SECTOR_TOL {
        return Err(fail(format!(
            "population {:e} outside the <= {MAX_EXCITATIONS} excitation sector",
            diag.max_out_of_sector
        )));
    }

    // Trust the closed form only after both paths agree on this cell.
    let mut spot_check: Option<f64> = None;
    for idx in [0, traj.samples.len() - 1] {
        let red = &traj.samples[idx].reduced;
        if red.is_x_form() {
            let g = concurrence_general(red).map_err(|e| fail(e.to_string()))?.c;
            let x = concurrence_x_state(red).map_err(|e| fail(e.to_string()))?.c;
            let d = (g - x).abs();
            spot_check = Some(spot_check.map_or(d, |s: f64| s.max(d)));
        }
    }
    let use_x = spot_check.is_some_and(|d| d <= SPOT_CHECK_TOL);

    let mut rows = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let rep = if use_x && s.reduced.is_x_form() {
            concurrence_x_state(&s.reduced)
        } else {
            concurrence_general(&s.reduced)
        }
        .map_err(|e| fail(format!("t = {}: {e}", s.time)))?;
        rows.push(SweepRow {
            gamma_s,
            alpha2,
            t_scaled: s.time,
            concurrence: rep.c,
            c1: rep.c1,
            c2: rep.c2,
            trace_error: s.trace_error,
            min_eigenvalue: s.min_eigenvalue,
            path: rep.path,
        });
    }
    let snapshots = config
        .keep_full
        .then(|| traj.samples.iter().map(|s| FullState::new(s.full.clone().unwrap(), s.time)).collect());
    Ok(CellOutput {
        summary: CellSummary {
            gamma_s,
            alpha2,
            first_row: 0,
            n_samples: rows.len(),
            diagnostics: diag,
            spot_check,
            snapshots,
        },
        rows,
    })
}

/// Runs every `(γ_S, α²)` cell and assembles rows in grid order
/// (γ_S outer, α² inner, time innermost) independent of scheduling.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.time_grid();
    let cells = config.cells();
    let work = || -> Vec<Result<CellOutput>> {
        cells.par_iter().map(|&(g, a)| run_cell(config, g, a, &grid)).collect()
    };
    let outputs = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut rows = Vec::with_capacity(cells.len() * grid.len());
    let mut summaries = Vec::with_capacity(cells.len());
    for out in outputs {
        let mut out = out?;
        out.summary.first_row = rows.len();
        rows.append(&mut out.rows);
        summaries.push(out.summary);
    }
    Ok(SweepResult { rows, cells: summaries })
}
