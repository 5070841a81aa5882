use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::uniform_in_box;
use crate::point::{validate_dim, BoxRegion, Point};

pub const MIN_RESOLUTION: usize = 16;

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489004;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallMask {
    pub center: Point,
    pub radius: f64,
}

impl BallMask {
    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        x.dist(&self.center) <= self.radius
    }
}

/// Uniform grid of `resolution^n` cells over `bounds`, optionally restricted
/// to a ball (the window `‖X‖ ≤ N`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub bounds: BoxRegion,
    pub resolution: usize,
    pub mask: Option<BallMask>,
}

impl GridSpec {
    pub fn new(bounds: BoxRegion, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::InvalidParameter {
                name: "grid.resolution",
                reason: format!("must be at least {MIN_RESOLUTION}, got {resolution}"),
            });
        }
        let total = (resolution as f64).powi(bounds.dim() as i32);
        if total > 4.0e9 {
            return Err(Error::InvalidParameter {
                name: "grid.resolution",
                reason: format!("{total:e} cells is too many"),
            });
        }
        Ok(Self {
            bounds,
            resolution,
            mask: None,
        })
    }

    /// Box `[−N, N]^n` masked to the ball `‖X‖ ≤ N`.
    pub fn window(dim: usize, radius: f64, resolution: usize) -> Result<Self> {
        validate_dim(dim)?;
        let mut g = Self::new(BoxRegion::centered(dim, radius)?, resolution)?;
        g.mask = Some(BallMask {
            center: Point::zeros(dim),
            radius,
        });
        Ok(g)
    }

    pub fn with_mask(mut self, center: Point, radius: f64) -> Self {
        self.mask = Some(BallMask { center, radius });
        self
    }

    /// Same box and mask at another resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        let mut g = Self::new(self.bounds, resolution)?;
        g.mask = self.mask;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.bounds.hi[axis] - self.bounds.lo[axis]) / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_width(a)).product()
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    fn node_count(&self) -> usize {
        (self.resolution + 1).pow(self.dim() as u32)
    }

    /// Center of the cell with flat index `i` (axis 0 varies slowest).
    #[inline]
    pub fn cell_center(&self, mut i: usize) -> Point {
        let n = self.dim();
        let mut p = self.bounds.lo;
        let out = p.as_mut_slice();
        for axis in (0..n).rev() {
            let k = i % self.resolution;
            i /= self.resolution;
            out[axis] = self.bounds.lo[axis] + (k as f64 + 0.5) * self.cell_width(axis);
        }
        p
    }

    #[inline]
    fn node(&self, mut i: usize) -> Point {
        let n = self.dim();
        let base = self.resolution + 1;
        let mut p = self.bounds.lo;
        let out = p.as_mut_slice();
        for axis in (0..n).rev() {
            let k = i % base;
            i /= base;
            out[axis] = if k == self.resolution {
                self.bounds.hi[axis]
            } else {
                self.bounds.lo[axis] + k as f64 * self.cell_width(axis)
            };
        }
        p
    }

    /// Flat node index of the lower corner of cell `i`.
    #[inline]
    fn lower_node(&self, mut i: usize) -> usize {
        let base = self.resolution + 1;
        let mut node = 0;
        let mut stride = 1;
        for _ in 0..self.dim() {
            let k = i % self.resolution;
            i /= self.resolution;
            node += k * stride;
            stride *= base;
        }
        node
    }

    fn corner_offsets(&self) -> Vec<usize> {
        let base = self.resolution + 1;
        let n = self.dim();
        (0..1usize << n)
            .map(|bits| {
                let mut off = 0;
                let mut stride = 1;
                for axis in 0..n {
                    if bits & (1 << axis) != 0 {
                        off += stride;
                    }
                    stride *= base;
                }
                off
            })
            .collect()
    }

    #[inline]
    pub fn in_mask(&self, x: &Point) -> bool {
        self.mask.map_or(true, |m| m.contains(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    GridCount,
    MonteCarlo,
}

impl MeasureMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureMethod::GridCount => "grid_count",
            MeasureMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub method: MeasureMethod,
    /// Grid: volume of boundary cells. Monte Carlo: 99% half-width.
    pub error_bound: f64,
    pub samples_or_cells: u64,
}

impl MeasureEstimate {
    pub fn zero(method: MeasureMethod, samples_or_cells: u64) -> Self {
        Self {
            value: 0.0,
            method,
            error_bound: 0.0,
            samples_or_cells,
        }
    }
}

/// Values of a function at every cell center and every grid node.
/// Points outside the mask hold `−∞`.
#[derive(Clone, Debug)]
pub struct SampledGrid {
    grid: GridSpec,
    centers: Vec<f64>,
    nodes: Vec<f64>,
}

impl SampledGrid {
    pub fn sample<F>(grid: &GridSpec, f: F) -> Self
    where
        F: Fn(&Point) -> f64 + Sync,
    {
        let eval = |x: Point| {
            if grid.in_mask(&x) {
                f(&x)
            } else {
                f64::NEG_INFINITY
            }
        };
        let centers = (0..grid.cell_count())
            .into_par_iter()
            .map(|i| eval(grid.cell_center(i)))
            .collect();
        let nodes = (0..grid.node_count())
            .into_par_iter()
            .map(|i| eval(grid.node(i)))
            .collect();
        Self {
            grid: *grid,
            centers,
            nodes,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn center_values(&self) -> &[f64] {
        &self.centers
    }

    /// Estimate of `μ{value > λ}`.
    pub fn superlevel(&self, lambda: f64) -> MeasureEstimate {
        classify(&self.grid, &self.centers, &self.nodes, |v| *v > lambda)
    }

    /// Measure of cells whose center value lies in `(lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64) -> f64 {
        let count = self.centers.iter().filter(|&&v| v > lo && v <= hi).count();
        count as f64 * self.grid.cell_volume()
    }

    pub fn max_value(&self) -> f64 {
        self.centers
            .iter()
            .chain(&self.nodes)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn classify<T: Sync>(grid: &GridSpec, centers: &[T], nodes: &[T], member: impl Fn(&T) -> bool + Sync) -> MeasureEstimate {
    let offsets = grid.corner_offsets();
    let (inside, boundary) = (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            let c = member(&centers[i]);
            let base = grid.lower_node(i);
            let split = offsets.iter().any(|&o| member(&nodes[base + o]) != c);
            (c as u64, split as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let vol = grid.cell_volume();
    MeasureEstimate {
        value: inside as f64 * vol,
        method: MeasureMethod::GridCount,
        error_bound: boundary as f64 * vol,
        samples_or_cells: grid.cell_count() as u64,
    }
}

/// Grid estimate of the measure of `{indicator}` (within the mask, if any):
/// cell volume times the number of member centers; cells whose corners and
/// center do not all agree count toward the error bound.
pub fn measure_set<F>(indicator: F, grid: &GridSpec) -> MeasureEstimate
where
    F: Fn(&Point) -> bool + Sync,
{
    let eval = |x: Point| grid.in_mask(&x) && indicator(&x);
    let centers: Vec<bool> = (0..grid.cell_count())
        .into_par_iter()
        .map(|i| eval(grid.cell_center(i)))
        .collect();
    let nodes: Vec<bool> = (0..grid.node_count())
        .into_par_iter()
        .map(|i| eval(grid.node(i)))
        .collect();
    classify(grid, &centers, &nodes, |b| *b)
}

/// Monte Carlo estimate over `region` with a 99% confidence half-width.
pub fn measure_set_monte_carlo<F>(indicator: F, region: &BoxRegion, samples: usize, seed: u64) -> MeasureEstimate
where
    F: Fn(&Point) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        if indicator(&uniform_in_box(region, &mut rng)) {
            hits += 1;
        }
    }
    let n = samples.max(1) as f64;
    let p = hits as f64 / n;
    let vol = region.volume();
    MeasureEstimate {
        value: vol * p,
        method: MeasureMethod::MonteCarlo,
        error_bound: Z99 * vol * (p * (1.0 - p) / n).sqrt(),
        samples_or_cells: samples as u64,
    }
}
