//! Centralized numerical tolerances — one knob for all modules and tests.

use serde::{Deserialize, Serialize};

/// Tolerance bundle threaded through every operation that needs a
/// numerical decision.
///
/// * `algebraic` — relative tolerance for algebraic identities and rank
///   decisions (default `1e-9`);
/// * `rank_gap` — width of the hard gap on projection eigenvalues: values
///   inside `[rank_gap/2, 1 − rank_gap/2]` are errors, not guesses
///   (default `0.5`, i.e. window `[0.25, 0.75]`);
/// * `transport_cap` — largest admissible projection distance for a single
///   transport step (default `0.9`, strictly below the local-triviality
///   radius 1);
/// * `gap_min` — smallest admissible distance from a spectral level to the
///   spectrum when forming spectral projections.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub algebraic: f64,
    pub rank_gap: f64,
    pub transport_cap: f64,
    pub gap_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-9,
            rank_gap: 0.5,
            transport_cap: 0.9,
            gap_min: 1e-6,
        }
    }
}

impl Tolerances {
    /// Reads the `RGL_TOL` environment variable as an override for the
    /// algebraic tolerance, keeping the other knobs at their defaults.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        if let Ok(s) = std::env::var("RGL_TOL") {
            if let Ok(v) = s.parse::<f64>() {
                if v > 0.0 {
                    t.algebraic = v;
                }
            }
        }
        t
    }

    /// Window `[lo, hi]` of forbidden projection eigenvalues.
    pub fn rank_window(&self) -> (f64, f64) {
        (self.rank_gap / 2.0, 1.0 - self.rank_gap / 2.0)
    }

    pub fn validate(&self) -> bool {
        self.algebraic > 0.0
            && self.rank_gap > 0.0
            && self.transport_cap > 0.0
            && self.transport_cap < 1.0
            && self.gap_min > 0.0
    }
}
