//! Points of ℝⁿ and axis-aligned boxes.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported ambient dimension. Points are stored inline.
pub const MAX_DIM: usize = 8;

/// A point (or vector) in ℝⁿ, 1 ≤ n ≤ [`MAX_DIM`].
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        check_dim(dim)?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut inline = [0.0; MAX_DIM];
        inline[..dim].copy_from_slice(coords);
        Ok(Self { coords: inline, dim })
    }

    /// Panics on an empty, oversized or non-finite slice. For literals in code and tests.
    pub fn from_slice(coords: &[f64]) -> Self {
        Self::new(coords).expect("valid point literal")
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self::from_slice(&[x, y])
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension out of range");
        Self {
            coords: [0.0; MAX_DIM],
            dim,
        }
    }

    /// Unit vector along axis `axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.coords[axis] = 1.0;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.as_slice().iter().map(|c| c * c).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    /// `self + k * dir`
    #[inline]
    pub fn offset(&self, k: f64, dir: &Point) -> Point {
        let mut out = *self;
        for i in 0..self.dim {
            out.coords[i] += k * dir.coords[i];
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            got: dim,
            reason: "dimension must be at least 1",
        });
    }
    if dim > MAX_DIM {
        return Err(Error::InvalidDimension {
            got: dim,
            reason: "dimension exceeds MAX_DIM",
        });
    }
    Ok(())
}

pub(crate) fn validate_dim(dim: usize) -> Result<()> {
    check_dim(dim)
}

impl Index<usize> for Point {
    type Output = f64;

    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for Point {
    type Output = Point;

    #[inline]
    fn add(mut self, rhs: Point) -> Point {
        for i in 0..self.dim {
            self.coords[i] += rhs.coords[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;

    #[inline]
    fn sub(mut self, rhs: Point) -> Point {
        for i in 0..self.dim {
            self.coords[i] -= rhs.coords[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;

    #[inline]
    fn mul(mut self, k: f64) -> Point {
        for c in self.as_mut_slice() {
            *c *= k;
        }
        self
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

/// Closed axis-aligned box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxRegion {
    pub lo: Point,
    pub hi: Point,
}

impl BoxRegion {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        if lo.as_slice().iter().zip(hi.as_slice()).any(|(a, b)| a >= b) {
            return Err(Error::InvalidParameter {
                name: "box",
                reason: format!("degenerate box {lo:?}..{hi:?}"),
            });
        }
        Ok(Self { lo, hi })
    }

    /// `[-half, half]^dim`
    pub fn centered(dim: usize, half: f64) -> Result<Self> {
        validate_dim(dim)?;
        let lo = Point::new(&vec![-half; dim])?;
        let hi = Point::new(&vec![half; dim])?;
        Self::new(lo, hi)
    }

    /// The unit cube `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        validate_dim(dim)?;
        Self::new(Point::zeros(dim), Point::new(&vec![1.0; dim])?)
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .as_slice()
            .iter()
            .zip(self.hi.as_slice())
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.as_slice()
            .iter()
            .zip(self.lo.as_slice().iter().zip(self.hi.as_slice()))
            .all(|(c, (a, b))| *a <= *c && *c <= *b)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    /// Euclidean distance from `x` to the box (0 inside).
    pub fn distance(&self, x: &Point) -> f64 {
        x.as_slice()
            .iter()
            .zip(self.lo.as_slice().iter().zip(self.hi.as_slice()))
            .map(|(c, (a, b))| {
                let d = if c < a {
                    a - c
                } else if c > b {
                    c - b
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from an interior point to the boundary, negative outside.
    pub fn signed_depth(&self, x: &Point) -> f64 {
        if self.contains(x) {
            x.as_slice()
                .iter()
                .zip(self.lo.as_slice().iter().zip(self.hi.as_slice()))
                .map(|(c, (a, b))| (c - a).min(b - c))
                .fold(f64::INFINITY, f64::min)
        } else {
            -self.distance(x)
        }
    }

    pub fn inflate(&self, margin: f64) -> BoxRegion {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for c in lo.as_mut_slice() {
            *c -= margin;
        }
        for c in hi.as_mut_slice() {
            *c += margin;
        }
        BoxRegion { lo, hi }
    }

    pub fn center(&self) -> Point {
        (self.lo + self.hi) * 0.5
    }
}
