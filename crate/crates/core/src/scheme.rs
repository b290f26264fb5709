//! Fully discrete observer: mixed finite elements in space, implicit Euler
//! in time, one Newton solve per step.
//!
//! Unknowns per step are the cell densities `rho_0..rho_{M-1}` and the nodal
//! momenta `m_1..m_M`; `m_0` carries the inflow boundary datum. They are
//! interleaved as `[rho_0, m_1, rho_1, m_2, ..., rho_{M-1}, m_M]`, which keeps
//! the Jacobian within two diagonals on either side.
//!
//! Mass rows are tested against cell indicators, momentum rows against hat
//! functions; both are divided by `h`. Nonlinear momentum terms use the
//! trapezoid rule on each cell with `v = m / rho` evaluated from that cell's
//! density.

use crate::banded::BandedMatrix;
use crate::gas::{check_assumption_a1h, BoundsReport, GasLaw, IdealGas, StateBounds};
use crate::mesh::{
    interpolate_nodal, project_piecewise_constant, velocity_at_nodes, CellField, Grid1D, NodalField,
};
use crate::newton::{self, default_tolerance, max_norm, NewtonOptions, NonlinearSystem};
use crate::reference::{ManufacturedSolution, NoiseModel};
use crate::{Error, Result, Scalar};

/// Lower/upper bandwidth of the step Jacobian.
pub const JACOBIAN_BANDWIDTH: usize = 2;

/// Observer state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState<T> {
    pub rho: CellField<T>,
    /// Nodal momentum; `m[0]` is the boundary datum.
    pub m: NodalField<T>,
    pub t: T,
}

impl<T: Scalar> DiscreteState<T> {
    pub fn new(grid: &Grid1D<T>, rho: CellField<T>, m: NodalField<T>, t: T) -> Result<Self> {
        crate::mesh::check_lengths(grid, &rho, &m)?;
        if let Some((cell, &value)) = rho.values().iter().enumerate().find(|(_, r)| !(**r > T::zero())) {
            return Err(Error::NonPositiveDensity {
                cell,
                value: value.as_f64(),
            });
        }
        let boundary = m[0];
        Ok(Self {
            rho,
            m: m.with_left_boundary(boundary),
            t,
        })
    }

    /// Nodal velocity using the adjacent-cell mean density.
    pub fn nodal_velocity(&self) -> NodalField<T> {
        velocity_at_nodes(&self.rho, &self.m)
    }

    pub fn check_bounds(&self, bounds: &StateBounds<T>) -> BoundsReport<T> {
        check_assumption_a1h(&self.rho, &self.nodal_velocity(), bounds)
    }

    /// Free unknowns in interleaved order.
    pub fn pack(&self) -> Vec<T> {
        let cells = self.rho.len();
        let mut x = Vec::with_capacity(2 * cells);
        for c in 0..cells {
            x.push(self.rho[c]);
            x.push(self.m[c + 1]);
        }
        x
    }

    fn unpack(grid: &Grid1D<T>, x: &[T], m_boundary: T, t: T) -> Self {
        let cells = grid.cells();
        let rho = (0..cells).map(|c| x[2 * c]).collect();
        let mut m = Vec::with_capacity(cells + 1);
        m.push(m_boundary);
        m.extend((1..=cells).map(|j| x[2 * j - 1]));
        Self {
            rho: CellField::new(grid, rho).expect("length"),
            m: NodalField::new(grid, m).expect("length").with_left_boundary(m_boundary),
            t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams<T, L = IdealGas> {
    /// Nudging gain.
    pub mu: T,
    /// Friction coefficient.
    pub gamma: T,
    pub newton_tol: T,
    pub newton_max_iter: usize,
    pub law: L,
}

impl<T: Scalar> SchemeParams<T, IdealGas> {
    pub fn new(mu: T, gamma: T) -> Result<Self> {
        let p = Self {
            mu,
            gamma,
            newton_tol: default_tolerance(),
            newton_max_iter: 50,
            law: IdealGas,
        };
        p.validate()?;
        Ok(p)
    }
}

impl<T: Scalar, L: GasLaw<T>> SchemeParams<T, L> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= T::zero()) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu = {} must be >= 0", self.mu)));
        }
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.newton_tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("newton_tol = {} must be > 0", self.newton_tol)));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParameter("newton_max_iter must be >= 1".into()));
        }
        Ok(())
    }

    fn newton_options(&self) -> NewtonOptions<T> {
        NewtonOptions {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
            ..NewtonOptions::default()
        }
    }
}

/// Data entering one step, all evaluated at the new time level.
#[derive(Debug, Clone, PartialEq)]
pub struct StepData<T> {
    /// Interpolated measurement `v_h + eta_h`.
    pub measured: NodalField<T>,
    /// Cell-projected mass source.
    pub source_mass: CellField<T>,
    /// Nodal momentum source, integrated by the trapezoid rule.
    pub source_momentum: NodalField<T>,
    /// Momentum at `x = 0`, imposed strongly.
    pub momentum_boundary: T,
    /// Enthalpy at `x = l`, imposed weakly.
    pub enthalpy_boundary: T,
}

impl<T: Scalar> StepData<T> {
    pub fn from_reference(
        reference: &ManufacturedSolution<T>,
        grid: &Grid1D<T>,
        t: T,
        noise: &NoiseModel<T>,
    ) -> Self {
        let (momentum_boundary, enthalpy_boundary) = reference.boundary_data(t);
        Self {
            measured: reference.measured_velocity(grid, t, noise),
            source_mass: project_piecewise_constant(|x| reference.eval_sources(x, t).0, grid),
            source_momentum: interpolate_nodal(|x| reference.eval_sources(x, t).1, grid),
            momentum_boundary,
            enthalpy_boundary,
        }
    }

    /// Zero sources and measurements with the given boundary data.
    pub fn quiescent(grid: &Grid1D<T>, momentum_boundary: T, enthalpy_boundary: T) -> Self {
        Self {
            measured: NodalField::constant(grid, T::zero()),
            source_mass: CellField::constant(grid, T::zero()),
            source_momentum: NodalField::constant(grid, T::zero()),
            momentum_boundary,
            enthalpy_boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    pub newton_iterations: usize,
    pub final_residual_max_norm: T,
    pub converged: bool,
}

struct StepSystem<'a, T, L> {
    grid: &'a Grid1D<T>,
    previous: &'a DiscreteState<T>,
    data: &'a StepData<T>,
    params: &'a SchemeParams<T, L>,
}

impl<T: Scalar, L: GasLaw<T>> StepSystem<'_, T, L> {
    fn assemble(&self, x: &[T], mut jac: Option<&mut BandedMatrix<T>>) -> Result<Vec<T>> {
        let grid = self.grid;
        let cells = grid.cells();
        if x.len() != 2 * cells {
            return Err(Error::LengthMismatch {
                expected: 2 * cells,
                found: x.len(),
            });
        }
        for c in 0..cells {
            if !(x[2 * c] > T::zero()) {
                return Err(Error::NonPositiveDensity {
                    cell: c,
                    value: x[2 * c].as_f64(),
                });
            }
        }
        let (h, tau) = (grid.h(), grid.tau());
        let (inv_h, inv_tau) = (h.recip(), tau.recip());
        let half = T::half();
        let (mu, gamma, law) = (self.params.mu, self.params.gamma, &self.params.law);
        let prev = self.previous;
        let data = self.data;
        let m_at = |j: usize| if j == 0 { data.momentum_boundary } else { x[2 * j - 1] };
        let m_col = |j: usize| 2 * j - 1;

        let mut r = vec![T::zero(); 2 * cells];
        let add = |jac: &mut Option<&mut BandedMatrix<T>>, i: usize, j: usize, v: T| {
            if let Some(a) = jac.as_deref_mut() {
                a.add(i, j, v);
            }
        };

        // mass: (rho - rho_prev) / tau + d_x m = Pi s1
        for c in 0..cells {
            let row = 2 * c;
            r[row] = (x[row] - prev.rho[c]) * inv_tau + (m_at(c + 1) - m_at(c)) * inv_h - data.source_mass[c];
            add(&mut jac, row, row, inv_tau);
            add(&mut jac, row, m_col(c + 1), inv_h);
            if c > 0 {
                add(&mut jac, row, m_col(c), -inv_h);
            }
        }

        // momentum, cell by cell
        for c in 0..cells {
            let rho = x[2 * c];
            let rho_col = 2 * c;
            for node in [c, c + 1] {
                if node == 0 {
                    continue;
                }
                let row = m_col(node);
                let v = m_at(node) / rho;
                let v_prev = prev.m[node] / prev.rho[c];
                let local = (v - v_prev) * inv_tau + gamma * v.abs() * v + mu * (v - data.measured[node]);
                r[row] += half * local;
                let dv = half * (inv_tau + T::lit(2.0) * gamma * v.abs() + mu);
                add(&mut jac, row, m_col(node), dv / rho);
                add(&mut jac, row, rho_col, -dv * v / rho);
            }

            // -<enthalpy, r'> / h; r' = -1/h on the left node's hat, +1/h on the right's
            let (ma, mb) = (m_at(c), m_at(c + 1));
            let (va, vb) = (ma / rho, mb / rho);
            let mean = half * (half * (va * va + vb * vb)) + law.potential_d1(rho);
            let d_ma = half * ma / (rho * rho);
            let d_mb = half * mb / (rho * rho);
            let d_rho = -half * (va * va + vb * vb) / rho + law.potential_d2(rho);
            let right = m_col(c + 1);
            r[right] -= mean * inv_h;
            add(&mut jac, right, rho_col, -d_rho * inv_h);
            add(&mut jac, right, m_col(c + 1), -d_mb * inv_h);
            if c > 0 {
                add(&mut jac, right, m_col(c), -d_ma * inv_h);
                let left = m_col(c);
                r[left] += mean * inv_h;
                add(&mut jac, left, rho_col, d_rho * inv_h);
                add(&mut jac, left, m_col(c + 1), d_mb * inv_h);
                add(&mut jac, left, m_col(c), d_ma * inv_h);
            }
        }

        for j in 1..=cells {
            let weight = if j == cells { half } else { T::one() };
            r[m_col(j)] -= weight * data.source_momentum[j];
        }
        r[m_col(cells)] += data.enthalpy_boundary * inv_h;
        Ok(r)
    }
}

impl<T: Scalar, L: GasLaw<T>> NonlinearSystem<T> for StepSystem<'_, T, L> {
    fn residual(&self, x: &[T]) -> Result<Vec<T>> {
        self.assemble(x, None)
    }

    fn jacobian(&self, x: &[T]) -> Result<BandedMatrix<T>> {
        let n = 2 * self.grid.cells();
        let mut a = BandedMatrix::zeros(n, JACOBIAN_BANDWIDTH, JACOBIAN_BANDWIDTH);
        self.assemble(x, Some(&mut a))?;
        Ok(a)
    }
}

/// Residual of the step equations at `candidate`, in packed order.
pub fn assemble_residual<T: Scalar, L: GasLaw<T>>(
    grid: &Grid1D<T>,
    candidate: &DiscreteState<T>,
    previous: &DiscreteState<T>,
    data: &StepData<T>,
    params: &SchemeParams<T, L>,
) -> Result<Vec<T>> {
    let sys = StepSystem {
        grid,
        previous,
        data,
        params,
    };
    sys.residual(&candidate.pack())
}

/// Analytic Jacobian of [`assemble_residual`] with respect to the free unknowns.
pub fn assemble_jacobian<T: Scalar, L: GasLaw<T>>(
    grid: &Grid1D<T>,
    candidate: &DiscreteState<T>,
    previous: &DiscreteState<T>,
    data: &StepData<T>,
    params: &SchemeParams<T, L>,
) -> Result<BandedMatrix<T>> {
    let sys = StepSystem {
        grid,
        previous,
        data,
        params,
    };
    sys.jacobian(&candidate.pack())
}

/// Largest entrywise gap between the analytic Jacobian and central finite
/// differences with step `eps`, relative to the largest analytic entry.
pub fn jacobian_fd_discrepancy<T: Scalar, L: GasLaw<T>>(
    grid: &Grid1D<T>,
    candidate: &DiscreteState<T>,
    previous: &DiscreteState<T>,
    data: &StepData<T>,
    params: &SchemeParams<T, L>,
    eps: T,
) -> Result<T> {
    let sys = StepSystem {
        grid,
        previous,
        data,
        params,
    };
    let x = candidate.pack();
    let jac = sys.jacobian(&x)?;
    let n = x.len();
    let mut scale = T::zero();
    let mut worst = T::zero();
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += eps;
        xm[j] -= eps;
        let rp = sys.residual(&xp)?;
        let rm = sys.residual(&xm)?;
        for i in 0..n {
            let fd = (rp[i] - rm[i]) / (T::lit(2.0) * eps);
            let an = jac.get(i, j);
            scale = scale.max(an.abs());
            worst = worst.max((fd - an).abs());
        }
    }
    Ok(worst / scale.max(T::min_positive_value()))
}

/// Cellwise defect of `(rho - rho_prev) / tau + d_x m - Pi s1`.
pub fn mass_balance_defect<T: Scalar>(
    grid: &Grid1D<T>,
    state: &DiscreteState<T>,
    previous: &DiscreteState<T>,
    data: &StepData<T>,
) -> T {
    let slopes = state.m.slopes(grid);
    (0..grid.cells())
        .map(|c| ((state.rho[c] - previous.rho[c]) / grid.tau() + slopes[c] - data.source_mass[c]).abs())
        .fold(T::zero(), T::max)
}

/// Advances `previous` to time `t_n`. The Newton iteration starts from the
/// previous state with the boundary momentum reset.
pub fn newton_step_solve<T: Scalar, L: GasLaw<T>>(
    grid: &Grid1D<T>,
    previous: &DiscreteState<T>,
    t_n: T,
    data: &StepData<T>,
    params: &SchemeParams<T, L>,
) -> Result<(DiscreteState<T>, StepReport<T>)> {
    let sys = StepSystem {
        grid,
        previous,
        data,
        params,
    };
    let mut x = previous.pack();
    let rep = newton::solve(&sys, &mut x, &params.newton_options())?;
    let state = DiscreteState::unpack(grid, &x, data.momentum_boundary, t_n);
    Ok((
        state,
        StepReport {
            newton_iterations: rep.iterations,
            final_residual_max_norm: rep.residual,
            converged: rep.converged,
        },
    ))
}

/// How the initial momentum is chosen when only the density is prescribed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialMomentum {
    /// Initial density times the measured velocity.
    #[default]
    Measured,
    /// Interpolated reference momentum.
    Exact,
    Zero,
}

impl std::str::FromStr for InitialMomentum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(Self::Measured),
            "exact" => Ok(Self::Exact),
            "zero" => Ok(Self::Zero),
            _ => Err(Error::InvalidParameter(format!("unknown initial momentum policy `{s}`"))),
        }
    }
}

impl std::fmt::Display for InitialMomentum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Measured => "measured",
            Self::Exact => "exact",
            Self::Zero => "zero",
        })
    }
}

/// Constant initial density `rho_init` with momentum chosen by `policy`.
pub fn initial_state<T: Scalar>(
    grid: &Grid1D<T>,
    reference: &ManufacturedSolution<T>,
    noise: &NoiseModel<T>,
    rho_init: T,
    policy: InitialMomentum,
) -> Result<DiscreteState<T>> {
    let rho = CellField::constant(grid, rho_init);
    let (m0, _) = reference.boundary_data(T::zero());
    let m = match policy {
        InitialMomentum::Measured => {
            let v = reference.measured_velocity(grid, T::zero(), noise);
            NodalField::new(grid, v.values().iter().map(|&vi| rho_init * vi).collect())?
        }
        InitialMomentum::Exact => interpolate_nodal(|x| reference.momentum(x, T::zero()), grid),
        InitialMomentum::Zero => NodalField::constant(grid, T::zero()),
    };
    DiscreteState::new(grid, rho, m.with_left_boundary(m0), T::zero())
}

/// Projected reference state at time `t`, as an observer state.
pub fn projected_state<T: Scalar>(
    grid: &Grid1D<T>,
    reference: &ManufacturedSolution<T>,
    t: T,
) -> Result<DiscreteState<T>> {
    let p = reference.projected_reference(grid, t);
    DiscreteState::new(grid, p.rho, p.m, t)
}

#[derive(Debug, Clone)]
pub struct SimulationConfig<T, L = IdealGas> {
    pub grid: Grid1D<T>,
    pub params: SchemeParams<T, L>,
    pub reference: ManufacturedSolution<T>,
    pub noise: NoiseModel<T>,
    pub initial: DiscreteState<T>,
    /// Compare the analytic Jacobian with finite differences every this many
    /// accepted steps.
    pub jacobian_check_every: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome<T> {
    pub final_state: DiscreteState<T>,
    pub reports: Vec<StepReport<T>>,
}

/// Relative tolerance of the periodic Jacobian spot check.
pub const JACOBIAN_CHECK_TOL: f64 = 1e-5;

/// Runs all `grid.steps()` steps. `on_step` sees the initial state with
/// `None` and every accepted state with its report.
pub fn run_simulation<T: Scalar, L: GasLaw<T>>(
    config: &SimulationConfig<T, L>,
    mut on_step: impl FnMut(usize, &DiscreteState<T>, Option<&StepReport<T>>) -> Result<()>,
) -> Result<SimulationOutcome<T>> {
    run_steps(config, config.grid.steps(), &mut on_step)
}

/// Per-step callback: step index, accepted state and its report (`None` for
/// the initial state).
pub type StepHook<'a, T> = dyn FnMut(usize, &DiscreteState<T>, Option<&StepReport<T>>) -> Result<()> + 'a;

/// Like [`run_simulation`] but stops after `steps` steps (possibly zero).
pub fn run_steps<T: Scalar, L: GasLaw<T>>(
    config: &SimulationConfig<T, L>,
    steps: usize,
    on_step: &mut StepHook<'_, T>,
) -> Result<SimulationOutcome<T>> {
    config.params.validate()?;
    if config.params.gamma != config.reference.gamma {
        return Err(Error::InvalidParameter(format!(
            "scheme friction {} differs from the reference friction {}",
            config.params.gamma, config.reference.gamma
        )));
    }
    let grid = &config.grid;
    let mut state = config.initial.clone();
    crate::mesh::check_lengths(grid, &state.rho, &state.m)?;
    on_step(0, &state, None)?;
    let mut reports = Vec::with_capacity(steps);
    for n in 1..=steps {
        let t = grid.time(n);
        let fail = |e: Error| Error::StepFailed {
            step: n,
            time: t.as_f64(),
            source: Box::new(e),
        };
        let data = StepData::from_reference(&config.reference, grid, t, &config.noise);
        let (next, report) = newton_step_solve(grid, &state, t, &data, &config.params).map_err(fail)?;
        if let Some(every) = config.jacobian_check_every {
            if every > 0 && n % every == 0 {
                let gap = jacobian_fd_discrepancy(grid, &next, &state, &data, &config.params, T::lit(1e-7))
                    .map_err(fail)?;
                if !(gap < T::lit(JACOBIAN_CHECK_TOL)) {
                    return Err(fail(Error::Analysis(format!(
                        "Jacobian differs from finite differences by {gap:e}"
                    ))));
                }
            }
        }
        on_step(n, &next, Some(&report))?;
        reports.push(report);
        state = next;
    }
    Ok(SimulationOutcome {
        final_state: state,
        reports,
    })
}

/// Residual max-norm of an accepted state, re-assembled from scratch.
pub fn step_residual_norm<T: Scalar, L: GasLaw<T>>(
    grid: &Grid1D<T>,
    state: &DiscreteState<T>,
    previous: &DiscreteState<T>,
    data: &StepData<T>,
    params: &SchemeParams<T, L>,
) -> Result<T> {
    Ok(max_norm(&assemble_residual(grid, state, previous, data, params)?))
}
