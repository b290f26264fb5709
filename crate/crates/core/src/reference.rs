//! Manufactured reference solution on the unit interval, its source terms
//! and boundary data, and the measurement channel fed to the observer.
//!
//! The reference state is
//! `rho(x, t) = 2 + sin(pi (x + t))`, `v(x, t) = sin(pi x) cos(pi t) / 10`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gas::{GasLaw, IdealGas};
use crate::mesh::{interpolate_nodal, project_piecewise_constant, CellField, Grid1D, NodalField};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution<T> {
    /// Friction coefficient; the source `s2` depends on it.
    pub gamma: T,
}

impl<T: Scalar> Default for ManufacturedSolution<T> {
    fn default() -> Self {
        Self { gamma: T::lit(0.1) }
    }
}

/// Reference state projected onto the discrete spaces at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedReference<T> {
    pub rho: CellField<T>,
    pub m: NodalField<T>,
    pub v: NodalField<T>,
}

impl<T: Scalar> ManufacturedSolution<T> {
    pub fn new(gamma: T) -> Self {
        Self { gamma }
    }

    pub fn density(&self, x: T, t: T) -> T {
        T::lit(2.0) + (T::pi() * (x + t)).sin()
    }

    pub fn velocity(&self, x: T, t: T) -> T {
        T::lit(0.1) * (T::pi() * x).sin() * (T::pi() * t).cos()
    }

    pub fn momentum(&self, x: T, t: T) -> T {
        self.density(x, t) * self.velocity(x, t)
    }

    /// `(rho, v)` at `(x, t)`.
    pub fn eval_state(&self, x: T, t: T) -> (T, T) {
        (self.density(x, t), self.velocity(x, t))
    }

    /// Source terms `(s1, s2)` that make the reference state an exact
    /// solution of the friction-damped barotropic Euler system.
    pub fn eval_sources(&self, x: T, t: T) -> (T, T) {
        let pi = T::pi();
        let (sx, cx) = (pi * x).sin_cos();
        let (st, ct) = (pi * t).sin_cos();
        let (sxt, cxt) = (pi * (t + x)).sin_cos();
        let s1 = pi * cxt + T::lit(0.1) * pi * ct * ((pi * (t + T::lit(2.0) * x)).sin() + T::lit(2.0) * cx);
        let s2 = T::lit(0.01) * sx * (self.gamma * ct * (ct * sx).abs() + pi * ct * ct * cx - T::lit(10.0) * pi * st)
            + pi * cxt / (sxt + T::lit(2.0));
        (s1, s2)
    }

    /// Boundary data `(m at x = 0, enthalpy at x = 1)`.
    pub fn boundary_data(&self, t: T) -> (T, T) {
        let enthalpy = T::one() + (T::lit(2.0) + (T::pi() * (T::one() + t)).sin()).ln();
        (T::zero(), enthalpy)
    }

    /// Interpolated reference velocity plus the noise model's perturbation.
    pub fn measured_velocity(&self, grid: &Grid1D<T>, t: T, noise: &NoiseModel<T>) -> NodalField<T> {
        let mut v = interpolate_nodal(|x| self.velocity(x, t), grid);
        if let Some(eta) = noise.perturbation(grid, t) {
            for (vi, ei) in v.values_mut().iter_mut().zip(eta) {
                *vi += ei;
            }
        }
        v
    }

    pub fn projected_reference(&self, grid: &Grid1D<T>, t: T) -> ProjectedReference<T> {
        ProjectedReference {
            rho: project_piecewise_constant(|x| self.density(x, t), grid),
            m: interpolate_nodal(|x| self.momentum(x, t), grid),
            v: interpolate_nodal(|x| self.velocity(x, t), grid),
        }
    }

    /// Enthalpy of the reference state, for the ideal gas.
    pub fn enthalpy(&self, x: T, t: T) -> T {
        let (rho, v) = self.eval_state(x, t);
        T::half() * v * v + GasLaw::<T>::potential_d1(&IdealGas, rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind<T> {
    None,
    /// Independent uniform values in `[-amplitude, amplitude]` at every node,
    /// reproducible from `(seed, t)`.
    Random { seed: u64 },
    /// `amplitude * sin(2 pi frequency (x - t))`.
    Sinusoidal { frequency: T },
}

/// Measurement error model. Values are generated at nodes; the observer only
/// ever sees their piecewise-linear interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    pub kind: NoiseKind<T>,
    pub amplitude: T,
}

impl<T: Scalar> Default for NoiseModel<T> {
    fn default() -> Self {
        Self::none()
    }
}

impl<T: Scalar> NoiseModel<T> {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            amplitude: T::zero(),
        }
    }

    pub fn random(amplitude: T, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Random { seed },
            amplitude,
        }
    }

    pub fn sinusoidal(amplitude: T, frequency: T) -> Self {
        Self {
            kind: NoiseKind::Sinusoidal { frequency },
            amplitude,
        }
    }

    /// Nodal perturbation at time `t`, or `None` when the model is silent.
    pub fn perturbation(&self, grid: &Grid1D<T>, t: T) -> Option<Vec<T>> {
        if self.amplitude == T::zero() {
            return None;
        }
        let eps = self.amplitude;
        match self.kind {
            NoiseKind::None => None,
            NoiseKind::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ t.as_f64().to_bits());
                Some(
                    (0..grid.nodes())
                        .map(|_| eps * T::lit(rng.gen_range(-1.0..=1.0)))
                        .collect(),
                )
            }
            NoiseKind::Sinusoidal { frequency } => Some(
                (0..grid.nodes())
                    .map(|i| eps * (T::lit(2.0) * T::pi() * frequency * (grid.node(i) - t)).sin())
                    .collect(),
            ),
        }
    }
}

impl<T: Scalar> FromStr for NoiseModel<T> {
    type Err = Error;

    /// Parses `none`, `random:<amplitude>:<seed>` or `sin:<amplitude>:<frequency>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::InvalidParameter(format!("unrecognised noise spec `{s}`"));
        let num = |p: &str| -> Result<T> {
            let x: f64 = p.parse().map_err(|_| bad())?;
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidParameter(format!("noise parameter `{p}` must be finite and >= 0")));
            }
            Ok(T::lit(x))
        };
        match parts.as_slice() {
            ["none"] => Ok(Self::none()),
            ["random", eps, seed] => Ok(Self::random(num(eps)?, seed.parse().map_err(|_| bad())?)),
            ["sin", eps, freq] => Ok(Self::sinusoidal(num(eps)?, num(freq)?)),
            _ => Err(bad()),
        }
    }
}

impl<T: Scalar> fmt::Display for NoiseModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::None => write!(f, "none"),
            NoiseKind::Random { seed } => write!(f, "random:{}:{}", self.amplitude, seed),
            NoiseKind::Sinusoidal { frequency } => write!(f, "sin:{}:{}", self.amplitude, frequency),
        }
    }
}
