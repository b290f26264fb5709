//! Newton's method with a backtracking safeguard for banded systems.

use crate::banded::BandedMatrix;
use crate::{Error, Result, Scalar};

pub trait NonlinearSystem<T: Scalar> {
    /// Residual at `x`; an error marks `x` as inadmissible.
    fn residual(&self, x: &[T]) -> Result<Vec<T>>;

    fn jacobian(&self, x: &[T]) -> Result<BandedMatrix<T>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions<T> {
    /// Max-norm residual tolerance.
    pub tol: T,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// A trial step whose residual exceeds `growth_limit` times the current
    /// one is halved.
    pub growth_limit: T,
}

impl<T: Scalar> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            tol: default_tolerance(),
            max_iter: 50,
            max_halvings: 30,
            growth_limit: T::lit(10.0),
        }
    }
}

/// `1e-12`, or a few hundred ulps when the scalar cannot resolve that.
pub fn default_tolerance<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(1e3))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport<T> {
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
    /// Total number of step halvings over all iterations.
    pub halvings: usize,
}

pub fn max_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| {
        // propagate NaN
        if x.is_nan() {
            T::nan()
        } else {
            acc.max(x.abs())
        }
    })
}

/// Runs Newton from `x`, updating it in place.
pub fn solve<T: Scalar, S: NonlinearSystem<T>>(
    system: &S,
    x: &mut Vec<T>,
    opts: &NewtonOptions<T>,
) -> Result<NewtonReport<T>> {
    let mut r = system.residual(x)?;
    let mut norm = max_norm(&r);
    let mut halvings = 0;
    for it in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(NewtonReport {
                iterations: it,
                residual: norm,
                converged: true,
                halvings,
            });
        }
        let rhs: Vec<T> = r.iter().map(|&v| -v).collect();
        let delta = system.jacobian(x)?.solve(&rhs)?;

        let mut alpha = T::one();
        let mut accepted = false;
        for attempt in 0..=opts.max_halvings {
            let trial: Vec<T> = x.iter().zip(&delta).map(|(&xi, &di)| xi + alpha * di).collect();
            if let Ok(rt) = system.residual(&trial) {
                let nt = max_norm(&rt);
                if nt.is_finite() && nt <= opts.growth_limit * norm {
                    *x = trial;
                    r = rt;
                    norm = nt;
                    halvings += attempt;
                    accepted = true;
                    break;
                }
            }
            alpha *= T::half();
        }
        if !accepted {
            return Err(Error::LineSearchFailed {
                halvings: opts.max_halvings,
                residual: norm.as_f64(),
            });
        }
    }
    if norm <= opts.tol {
        return Ok(NewtonReport {
            iterations: opts.max_iter,
            residual: norm,
            converged: true,
            halvings,
        });
    }
    Err(Error::NewtonDiverged {
        iterations: opts.max_iter,
        residual: norm.as_f64(),
    })
}
