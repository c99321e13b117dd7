//! Uniform node-centred lattice over an axis-aligned box.
//!
//! Node `(ix, iy, it)` is stored at `ix + nx * (iy + ny * it)`. Every integral
//! is the Riemann sum with cell weight `w = hx * hy * ht`, accumulated in
//! storage order so reductions are reproducible bit for bit.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::heisenberg::{fk_norm, group_mul, AnalyticFunction, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: Point,
    upper: Point,
    dims: [usize; 3],
    spacing: [f64; 3],
}

impl Grid {
    pub fn new(lower: Point, upper: Point, dims: [usize; 3]) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::NonFinite("box corner"));
        }
        let (lo, hi) = (lower.as_array(), upper.as_array());
        if (0..3).any(|k| !(hi[k] > lo[k])) {
            return Err(Error::DegenerateBox);
        }
        if dims.iter().any(|&n| n < 3) {
            return Err(Error::UndersizedResolution(dims));
        }
        let spacing = [0, 1, 2].map(|k| (hi[k] - lo[k]) / (dims[k] - 1) as f64);
        Ok(Grid {
            lower,
            upper,
            dims,
            spacing,
        })
    }

    /// The cube `[-half, half]³` with `n` nodes per axis.
    pub fn cube(half: f64, n: usize) -> Result<Self> {
        Grid::new(
            Point::new(-half, -half, -half),
            Point::new(half, half, half),
            [n; 3],
        )
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn cell_weight(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        ix + self.dims[0] * (iy + self.dims[1] * it)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let ix = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [ix, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn coord(&self, ix: usize, iy: usize, it: usize) -> Point {
        Point::new(
            self.axis_coord(0, ix),
            self.axis_coord(1, iy),
            self.axis_coord(2, it),
        )
    }

    #[inline]
    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        let lo = self.lower.as_array()[axis];
        if i + 1 == self.dims[axis] {
            self.upper.as_array()[axis]
        } else {
            lo + i as f64 * self.spacing[axis]
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let [ix, iy, it] = self.unravel(idx);
        self.coord(ix, iy, it)
    }

    /// Distance, in lattice steps, from a node to the nearest box face.
    pub fn face_distance(&self, idx: usize) -> usize {
        let ijk = self.unravel(idx);
        (0..3)
            .map(|k| ijk[k].min(self.dims[k] - 1 - ijk[k]))
            .min()
            .unwrap()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.face_distance(idx) == 0
    }

    pub fn boundary_mask(&self) -> Mask {
        Mask::from_fn(self, |i| self.is_boundary(i))
    }

    pub fn interior_mask(&self) -> Mask {
        Mask::from_fn(self, |i| !self.is_boundary(i))
    }

    /// Interior nodes at least `layers` steps away from every face.
    pub fn inner_mask(&self, layers: usize) -> Mask {
        Mask::from_fn(self, |i| self.face_distance(i) >= layers)
    }

    /// Node-counts of the forward-difference support (all but the last layer
    /// along each axis).
    pub fn support_dims(&self) -> [usize; 3] {
        self.dims.map(|n| n - 1)
    }

    pub fn support_len(&self) -> usize {
        let [a, b, c] = self.support_dims();
        a * b * c
    }

    /// Node index of the support point stored at `sidx`.
    #[inline]
    pub fn support_node(&self, sidx: usize) -> usize {
        let [sx, sy, _] = self.support_dims();
        let ix = sidx % sx;
        let rest = sidx / sx;
        self.index(ix, rest % sy, rest / sy)
    }
}

/// One value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub(crate) values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField {
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldSize {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(ScalarField { values })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(usize, Point) -> f64) -> Self {
        ScalarField {
            values: (0..grid.len()).map(|i| f(i, grid.point(i))).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn write_csv(&self, grid: &Grid, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        self.write_csv_to(grid, &mut file)
            .and_then(|_| file.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// `ix,iy,it,x,y,t,value`, rows in storage order.
    pub fn write_csv_to<W: Write>(&self, grid: &Grid, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "ix,iy,it,x,y,t,value")?;
        for (idx, v) in self.values.iter().enumerate() {
            let [ix, iy, it] = grid.unravel(idx);
            let p = grid.coord(ix, iy, it);
            writeln!(out, "{ix},{iy},{it},{},{},{},{}", p.x, p.y, p.t, v)?;
        }
        Ok(())
    }
}

/// Node-wise exact evaluation of a preset.
pub fn sample(f: &AnalyticFunction, grid: &Grid) -> ScalarField {
    ScalarField::from_fn(grid, |_, p| f.eval(p))
}

/// Two components `(X, Y)` per forward-difference support node.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalField {
    pub(crate) x: Vec<f64>,
    pub(crate) y: Vec<f64>,
}

impl HorizontalField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.support_len();
        HorizontalField {
            x: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    pub fn from_components(grid: &Grid, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = grid.support_len();
        for c in [&x, &y] {
            if c.len() != n {
                return Err(Error::FieldSize {
                    expected: n,
                    got: c.len(),
                });
            }
        }
        Ok(HorizontalField { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn at(&self, sidx: usize) -> [f64; 2] {
        [self.x[sidx], self.y[sidx]]
    }

    /// Pointwise Euclidean length, placed on the owning node (zero on the
    /// last layer along each axis, which carries no support point).
    pub fn magnitude(&self, grid: &Grid) -> ScalarField {
        let mut out = ScalarField::zeros(grid);
        for s in 0..self.len() {
            out.values[grid.support_node(s)] = self.x[s].hypot(self.y[s]);
        }
        out
    }

    /// `⟨F, G⟩_w`.
    pub fn inner(&self, other: &HorizontalField, w: f64) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.len() {
            acc += self.x[s] * other.x[s] + self.y[s] * other.y[s];
        }
        acc * w
    }

    pub fn sub(&self, other: &HorizontalField) -> HorizontalField {
        HorizontalField {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a - b).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub(crate) bits: Vec<bool>,
}

impl Mask {
    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> bool) -> Self {
        Mask {
            bits: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn all(grid: &Grid) -> Self {
        Mask {
            bits: vec![true; grid.len()],
        }
    }

    pub fn none(grid: &Grid) -> Self {
        Mask {
            bits: vec![false; grid.len()],
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter_true(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn and(&self, other: &Mask) -> Mask {
        Mask {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn or(&self, other: &Mask) -> Mask {
        Mask {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}

/// Nodes `ξ` with `‖center⁻¹ ∘ ξ‖ < radius`.
pub fn fk_ball_mask(grid: &Grid, center: Point, radius: f64) -> Mask {
    let inv = center.inverse();
    Mask::from_fn(grid, |i| fk_norm(group_mul(inv, grid.point(i))) < radius)
}

/// `Σ_mask |f|^p · w`, the p-th power of the masked L^p norm.
pub fn lp_norm_p(grid: &Grid, values: &[f64], p: f64, mask: &Mask) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::param("p", format!("norm exponent must be ≥ 1, got {p}")));
    }
    let mut acc = 0.0;
    for i in mask.iter_true() {
        acc += values[i].abs().powf(p);
    }
    Ok(acc * grid.cell_weight())
}

/// `Σ_mask f w / (#mask · w)`.
pub fn ball_average(field: &ScalarField, mask: &Mask) -> Result<f64> {
    let n = mask.count();
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let mut acc = 0.0;
    let mut all_equal = true;
    let first = mask.iter_true().next().map(|i| field.values[i]).unwrap();
    for i in mask.iter_true() {
        let v = field.values[i];
        all_equal &= v == first;
        acc += v;
    }
    // The plain sum of a constant is not exactly n·c in floating point.
    if all_equal {
        return Ok(first);
    }
    Ok(acc / n as f64)
}
