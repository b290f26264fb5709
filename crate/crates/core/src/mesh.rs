//! Uniform 1-D grid, the discrete spaces (cell constants and nodal P1
//! functions), the projection/interpolation operators and trapezoid
//! quadrature.

use crate::{Error, Result, Scalar};

/// Uniform space-time grid on `[0, length]` x `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    length: T,
    cells: usize,
    steps: usize,
    t_final: T,
}

impl<T: Scalar> Grid1D<T> {
    pub fn new(length: T, cells: usize, steps: usize, t_final: T) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidGrid("need at least one cell".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one time step".into()));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("domain length {length} must be positive")));
        }
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!("final time {t_final} must be positive")));
        }
        Ok(Self {
            length,
            cells,
            steps,
            t_final,
        })
    }

    /// Unit interval in space, for tests and small examples.
    pub fn unit(cells: usize, steps: usize, t_final: T) -> Result<Self> {
        Self::new(T::one(), cells, steps, t_final)
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    /// Cell width.
    pub fn h(&self) -> T {
        self.length / T::from_usize(self.cells).unwrap()
    }

    /// Time step size.
    pub fn tau(&self) -> T {
        self.t_final / T::from_usize(self.steps).unwrap()
    }

    /// Coordinate of node `i`; the last node is exactly `length`.
    pub fn node(&self, i: usize) -> T {
        if i == self.cells {
            self.length
        } else {
            T::from_usize(i).unwrap() * self.h()
        }
    }

    /// Time level `n`; the last level is exactly `t_final`.
    pub fn time(&self, n: usize) -> T {
        if n == self.steps {
            self.t_final
        } else {
            T::from_usize(n).unwrap() * self.tau()
        }
    }

    /// Cell containing `x` together with the local coordinate in `[0, 1]`.
    pub fn locate(&self, x: T) -> Result<(usize, T)> {
        if !(x >= T::zero() && x <= self.length) {
            return Err(Error::OutOfDomain {
                x: x.as_f64(),
                length: self.length.as_f64(),
            });
        }
        let s = x / self.h();
        let cell = s.floor().to_usize().unwrap_or(0).min(self.cells - 1);
        let local = s - T::from_usize(cell).unwrap();
        Ok((cell, local.max(T::zero()).min(T::one())))
    }

    /// Composite trapezoid rule over the grid. The integrand is called as
    /// `f(cell, node)` for both endpoints of every cell, so cell constants can
    /// be indexed by `cell` and nodal values by `node`.
    pub fn trapezoid(&self, mut f: impl FnMut(usize, usize) -> T) -> T {
        let mut sum = T::zero();
        for c in 0..self.cells {
            sum += f(c, c) + f(c, c + 1);
        }
        sum * self.h() * T::half()
    }
}

/// Element of the piecewise-constant space: one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T> {
    values: Vec<T>,
}

impl<T: Scalar> CellField<T> {
    pub fn new(grid: &Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::LengthMismatch {
                expected: grid.cells(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn constant(grid: &Grid1D<T>, value: T) -> Self {
        Self {
            values: vec![value; grid.cells()],
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

impl<T> std::ops::Index<usize> for CellField<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// Continuous piecewise-linear function stored by its nodal values.
///
/// When `left_constrained` is set, the value at `x = 0` is a boundary datum
/// rather than a free degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField<T> {
    values: Vec<T>,
    left_constrained: bool,
}

impl<T: Scalar> NodalField<T> {
    pub fn new(grid: &Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.nodes(),
                found: values.len(),
            });
        }
        Ok(Self {
            values,
            left_constrained: false,
        })
    }

    pub fn constant(grid: &Grid1D<T>, value: T) -> Self {
        Self {
            values: vec![value; grid.nodes()],
            left_constrained: false,
        }
    }

    /// Pins the value at `x = 0` to `boundary`.
    pub fn with_left_boundary(mut self, boundary: T) -> Self {
        self.values[0] = boundary;
        self.left_constrained = true;
        self
    }

    pub fn left_constrained(&self) -> bool {
        self.left_constrained
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Slope on each cell.
    pub fn slopes(&self, grid: &Grid1D<T>) -> Vec<T> {
        let h = grid.h();
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

impl<T> std::ops::Index<usize> for NodalField<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// Projection onto cell constants, approximating each cell average by the
/// trapezoid rule `(f(x_i) + f(x_{i+1})) / 2`. Exact for affine `f`.
pub fn project_piecewise_constant<T: Scalar>(f: impl Fn(T) -> T, grid: &Grid1D<T>) -> CellField<T> {
    let nodal: Vec<T> = (0..grid.nodes()).map(|i| f(grid.node(i))).collect();
    CellField {
        values: nodal.windows(2).map(|w| T::half() * (w[0] + w[1])).collect(),
    }
}

/// Nodal interpolation onto continuous piecewise linears.
pub fn interpolate_nodal<T: Scalar>(f: impl Fn(T) -> T, grid: &Grid1D<T>) -> NodalField<T> {
    NodalField {
        values: (0..grid.nodes()).map(|i| f(grid.node(i))).collect(),
        left_constrained: false,
    }
}

/// Evaluates the piecewise-linear function at `x`.
pub fn eval_nodal<T: Scalar>(field: &NodalField<T>, grid: &Grid1D<T>, x: T) -> Result<T> {
    if field.len() != grid.nodes() {
        return Err(Error::LengthMismatch {
            expected: grid.nodes(),
            found: field.len(),
        });
    }
    let (c, s) = grid.locate(x)?;
    Ok((T::one() - s) * field[c] + s * field[c + 1])
}

/// Nodal velocity `m / rho`, with the nodal density taken as the mean of
/// the adjacent cells (a single cell at the boundary nodes).
pub fn velocity_at_nodes<T: Scalar>(rho: &CellField<T>, m: &NodalField<T>) -> NodalField<T> {
    let cells = rho.len();
    let values = (0..=cells)
        .map(|i| {
            let r = if i == 0 {
                rho[0]
            } else if i == cells {
                rho[cells - 1]
            } else {
                T::half() * (rho[i - 1] + rho[i])
            };
            m[i] / r
        })
        .collect();
    NodalField {
        values,
        left_constrained: false,
    }
}

/// Trapezoid L2 distance between the discrete state `(rho_cells, v_nodes)`
/// and the functions `(rho_ref, v_ref)`. Within each cell the density
/// difference uses the cell value at both endpoints.
pub fn l2_error_trapezoid<T: Scalar>(
    rho_cells: &CellField<T>,
    v_nodes: &NodalField<T>,
    rho_ref: impl Fn(T) -> T,
    v_ref: impl Fn(T) -> T,
    grid: &Grid1D<T>,
) -> Result<T> {
    check_lengths(grid, rho_cells, v_nodes)?;
    let rho_nodes: Vec<T> = (0..grid.nodes()).map(|i| rho_ref(grid.node(i))).collect();
    let v_ref_nodes: Vec<T> = (0..grid.nodes()).map(|i| v_ref(grid.node(i))).collect();
    let sq = grid.trapezoid(|c, n| {
        let dr = rho_cells[c] - rho_nodes[n];
        let dv = v_nodes[n] - v_ref_nodes[n];
        dr * dr + dv * dv
    });
    Ok(sq.sqrt())
}

/// Trapezoid L2 distance between two discrete states.
pub fn l2_distance<T: Scalar>(
    rho_a: &CellField<T>,
    v_a: &NodalField<T>,
    rho_b: &CellField<T>,
    v_b: &NodalField<T>,
    grid: &Grid1D<T>,
) -> Result<T> {
    check_lengths(grid, rho_a, v_a)?;
    check_lengths(grid, rho_b, v_b)?;
    let sq = grid.trapezoid(|c, n| {
        let dr = rho_a[c] - rho_b[c];
        let dv = v_a[n] - v_b[n];
        dr * dr + dv * dv
    });
    Ok(sq.sqrt())
}

pub(crate) fn check_lengths<T: Scalar>(
    grid: &Grid1D<T>,
    rho: &CellField<T>,
    nodal: &NodalField<T>,
) -> Result<()> {
    if rho.len() != grid.cells() {
        return Err(Error::LengthMismatch {
            expected: grid.cells(),
            found: rho.len(),
        });
    }
    if nodal.len() != grid.nodes() {
        return Err(Error::LengthMismatch {
            expected: grid.nodes(),
            found: nodal.len(),
        });
    }
    Ok(())
}
