//! Runners that check each quantitative claim at desk scale and emit
//! [`ExperimentReport`]s.

mod continuity;
mod covering;
mod decay;
mod distortion;
mod inversion;
mod norm;
mod pointwise;
mod report;
mod weak;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::GridSpec;
use crate::point::Point;

pub use continuity::{run_continuity_in_s, ContinuityConfig};
pub use covering::run_covering_demo;
pub use decay::{run_c_alpha, run_h_n_decay, CAlphaConfig, DecayConfig};
pub use distortion::{run_distortion_sweep, DistortionConfig};
pub use inversion::{run_invert_check, InvertCheckConfig};
pub use norm::{run_norm_convergence, NormConvergenceConfig};
pub use pointwise::{run_pointwise, PointwiseConfig};
pub use report::{Cell, ExperimentReport, Provenance, Verdict};
pub use weak::{run_weak_type, WeakTypeConfig};

/// Midpoints of a uniform partition of `[−T/2, T/2]` into `count` pieces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SGrid {
    pub t_bound: f64,
    pub count: usize,
}

impl SGrid {
    pub fn new(t_bound: f64, count: usize) -> Result<Self> {
        if !(t_bound > 0.0 && t_bound.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: format!("must be positive, got {t_bound}"),
            });
        }
        if count < 3 {
            return Err(Error::InvalidParameter {
                name: "s_grid.count",
                reason: format!("must be at least 3, got {count}"),
            });
        }
        Ok(Self { t_bound, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.t_bound / self.count as f64;
        (0..self.count)
            .map(|i| -0.5 * self.t_bound + (i as f64 + 0.5) * h)
            .collect()
    }

    /// Midpoint-rule mean `(1/T)∫ g(s) ds`.
    pub fn mean(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / self.count as f64
    }

    /// Same interval, doubled count.
    pub fn refined(&self) -> Self {
        Self {
            t_bound: self.t_bound,
            count: 2 * self.count,
        }
    }
}

/// Independent generator for task `stream` under `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Component sums of `term` over the cell centers inside the mask. Chunks
/// are fixed, so the summation order does not depend on the thread count.
fn grid_sum<const K: usize, F>(grid: &GridSpec, term: F) -> [f64; K]
where
    F: Fn(&Point) -> [f64; K] + Sync,
{
    const CHUNK: usize = 4096;
    let cells = grid.cell_count();
    let partial: Vec<[f64; K]> = (0..cells.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(cells) {
                let x = grid.cell_center(i);
                if grid.in_mask(&x) {
                    for (a, t) in acc.iter_mut().zip(term(&x)) {
                        *a += t;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; K];
    for p in partial {
        for (a, t) in total.iter_mut().zip(p) {
            *a += t;
        }
    }
    total
}

fn check_t_bound(t_bound: f64, k: f64) -> Result<()> {
    let tk = t_bound * k;
    if !(t_bound > 0.0) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: format!("must be positive, got {t_bound}"),
        });
    }
    if tk > crate::perturb::MAX_SHIFT_CONTRACTION {
        return Err(Error::ShiftBound {
            tk,
            limit: crate::perturb::MAX_SHIFT_CONTRACTION,
        });
    }
    Ok(())
}
