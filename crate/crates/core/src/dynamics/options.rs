use serde::{Deserialize, Serialize};

/// Tolerances and limits for the section dynamics.
///
/// Lengths are in radians of the torus; `tol_h` is in units of the height
/// `unit·x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SectionOptions {
    /// `|f - E|` target after projection.
    pub tol_f: f64,
    /// plane drift target after projection.
    pub tol_p: f64,
    /// closure residual accepted when an orbit returns to its start.
    pub tol_close: f64,
    /// local error per integrator step (radians).
    pub rtol: f64,
    pub max_step: f64,
    /// critical point seed grid per axis, and the cross-check grid.
    pub seed_grid: usize,
    pub seed_grid_check: usize,
    pub newton_residual: f64,
    pub dedup_tol: f64,
    pub tol_g: f64,
    pub tol_d: f64,
    pub tol_h: f64,
    pub capture_radius: f64,
    pub eps_branch: f64,
    pub saddle_exclusion: f64,
    /// Arc-length limit; `None` means `10^3 · |h| · 2π`.
    pub max_len: Option<f64>,
    pub levels_per_gap: usize,
    /// closed scanlines per lattice direction of each section plane.
    pub scanlines_per_axis: usize,
    /// sampling step along scanlines (radians).
    pub scan_step: f64,
    /// start points tried per orbit when following the carrier upwards.
    pub flow_attempts: usize,
    /// critical phases closer than this are treated as one level when
    /// placing sample levels.
    pub gap_min: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self {
            tol_f: 1e-10,
            tol_p: 1e-10,
            tol_close: 1e-6,
            rtol: 1e-9,
            max_step: 0.2,
            seed_grid: 24,
            seed_grid_check: 30,
            newton_residual: 1e-10,
            dedup_tol: 1e-6,
            tol_g: 1e-8,
            tol_d: 1e-8,
            tol_h: 1e-9,
            capture_radius: 1e-4,
            eps_branch: 1e-3,
            saddle_exclusion: 1e-3,
            max_len: None,
            levels_per_gap: 2,
            scanlines_per_axis: 3,
            scan_step: 0.03,
            flow_attempts: 8,
            gap_min: 1e-7,
        }
    }
}

impl SectionOptions {
    pub fn max_len_for(&self, h_norm: f64) -> f64 {
        self.max_len
            .unwrap_or(1e3 * h_norm * std::f64::consts::TAU)
    }
}
