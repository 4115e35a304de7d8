use super::SimError;

/// Uniform tensor grid on `(0, L₁)` or `(0, L₁)×(0, L₂)`, boundary nodes included.
/// Node `(i, j)` has flat index `i + nx·j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    extent: [f64; 2],
    points: [usize; 2],
    spacing: [f64; 2],
}

impl Grid {
    pub fn new_1d(extent: f64, points: usize) -> Result<Self, SimError> {
        Self::build(1, [extent, 0.0], [points, 1])
    }

    pub fn new_2d(extent: [f64; 2], points: [usize; 2]) -> Result<Self, SimError> {
        Self::build(2, extent, points)
    }

    pub fn new(dim: usize, extent: [f64; 2], points: [usize; 2]) -> Result<Self, SimError> {
        match dim {
            1 => Self::new_1d(extent[0], points[0]),
            2 => Self::new_2d(extent, points),
            _ => Err(SimError::InvalidGrid(format!("dimension must be 1 or 2, got {dim}"))),
        }
    }

    fn build(dim: usize, extent: [f64; 2], points: [usize; 2]) -> Result<Self, SimError> {
        let mut spacing = [0.0; 2];
        for axis in 0..dim {
            if points[axis] < 3 {
                return Err(SimError::InvalidGrid(format!(
                    "axis {axis} needs at least 3 points, got {}",
                    points[axis]
                )));
            }
            if !(extent[axis] > 0.0 && extent[axis].is_finite()) {
                return Err(SimError::InvalidGrid(format!("axis {axis} extent must be positive")));
            }
            spacing[axis] = extent[axis] / (points[axis] - 1) as f64;
        }
        Ok(Grid { dim, extent, points, spacing })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing[..self.dim].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.points[0] * self.points[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    /// Volume element `h₁` or `h₁h₂`.
    pub fn cell(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.points[0] * j
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx % self.points[0], idx / self.points[0])
    }

    /// Coordinate of index `i` along `axis`, computed as `L·i/(n−1)`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.extent[axis] * i as f64 / (self.points[axis] - 1) as f64
    }

    pub fn position(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.split(idx);
        if self.dim == 1 {
            [self.coord(0, i), 0.0]
        } else {
            [self.coord(0, i), self.coord(1, j)]
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.split(idx);
        let edge = |k: usize, n: usize| k == 0 || k == n - 1;
        edge(i, self.points[0]) || (self.dim == 2 && edge(j, self.points[1]))
    }

    /// Distance to `∂Ω`, symmetric in the index so mirrored nodes agree exactly.
    pub fn dist_to_boundary(&self, idx: usize) -> f64 {
        let (i, j) = self.split(idx);
        let axis_dist = |axis: usize, k: usize| {
            let n = self.points[axis];
            self.coord(axis, k).min(self.coord(axis, n - 1 - k))
        };
        let d = axis_dist(0, i);
        if self.dim == 1 {
            d
        } else {
            d.min(axis_dist(1, j))
        }
    }

    /// Trapezoidal quadrature weight (without the cell volume).
    pub fn weight(&self, idx: usize) -> f64 {
        let (i, j) = self.split(idx);
        let w = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        if self.dim == 1 {
            w(i, self.points[0])
        } else {
            w(i, self.points[0]) * w(j, self.points[1])
        }
    }
}
