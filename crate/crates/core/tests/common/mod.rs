#![allow(dead_code)]

use cavity_esd::dynamics::{evolve, Diagnostics, EvolveConfig, Method};
use cavity_esd::entanglement::concurrence;
use cavity_esd::operators::{build_space, SystemParams};
use cavity_esd::states::{make_initial, InitialStateSpec};

/// Compact record of one trajectory.
#[derive(Debug, Clone)]
pub struct Run {
    pub times: Vec<f64>,
    pub c: Vec<f64>,
    pub purity: Vec<f64>,
    pub excitations: Vec<f64>,
    pub max_x_deviation: f64,
    pub diag: Diagnostics,
}

impl Run {
    /// Values on samples with `lo < t ≤ hi` (or `lo ≤ t` when `lo` is 0).
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.c.iter().copied())
            .filter(move |&(t, _)| (t > lo || (lo == 0.0 && t == 0.0)) && t <= hi)
    }
}

/// Uniform grid of `n + 1` times on `[0, t_max]`.
pub fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

pub fn simulate(spec: InitialStateSpec, params: &SystemParams, times: &[f64], method: Method) -> Run {
    let space = build_space(params.n_fock).unwrap();
    let initial = make_initial(&spec, &space).unwrap();
    let traj = evolve(&initial, params, times, &EvolveConfig { method, keep_full: false })
        .unwrap_or_else(|e| panic!("{spec:?} with {params:?}: {e}"));
    let mut run = Run {
        times: Vec::with_capacity(times.len()),
        c: Vec::with_capacity(times.len()),
        purity: Vec::with_capacity(times.len()),
        excitations: Vec::with_capacity(times.len()),
        max_x_deviation: 0.0,
        diag: traj.diagnostics.clone(),
    };
    for s in &traj.samples {
        run.times.push(s.time);
        run.c.push(concurrence(&s.reduced).unwrap().c);
        run.purity.push(s.purity);
        run.excitations.push(s.excitations);
        run.max_x_deviation = run.max_x_deviation.max(s.reduced.x_deviation());
    }
    run
}

/// Concurrence of `α|00⟩ + e^{iθ}√(1-α²)|11⟩` when each qubit is
/// independently amplitude damped with excited-state survival `p`.
///
/// The damped state has `ρ₁₁,₁₁ = β²p²`, `ρ₁₀,₁₀ = ρ₀₁,₀₁ = β²p(1-p)` and
/// coherence `αβp`, so only the `|00⟩↔|11⟩` branch can be positive.
pub fn amplitude_damping_oracle(alpha2: f64, survival: f64) -> f64 {
    let alpha = alpha2.sqrt();
    let beta2 = 1.0 - alpha2;
    let beta = beta2.sqrt();
    let p = survival;
    (2.0 * p * (alpha * beta - beta2 * (1.0 - p))).max(0.0)
}

/// Time at which the oracle first reaches zero, for `α² < 1/2`.
pub fn amplitude_damping_death(alpha2: f64, gamma: f64) -> Option<f64> {
    let alpha = alpha2.sqrt();
    let beta = (1.0 - alpha2).sqrt();
    let ratio = alpha / beta;
    (ratio < 1.0).then(|| -(1.0 - ratio).ln() / gamma)
}
