//! Pressure laws and the energy functionals built on them: enthalpy, total
//! energy, relative energy, the auxiliary functional `G`, the relative
//! dissipation `D` and the a-posteriori bound check.
//!
//! Energies are integrated with the grid's trapezoid rule. The energy
//! density is `rho v^2 / 2 + P(rho)`, whose variational derivatives are the
//! co-state `(enthalpy, momentum)`.

use std::fmt::Debug;

use serde::Serialize;

use crate::mesh::{check_lengths, CellField, Grid1D, NodalField};
use crate::{Error, Result, Scalar};

/// Poincare constant used for the bound on `G`: `||f|| <= (2 l / pi) ||f'||`
/// for `f` vanishing at `x = 0` only.
pub const POINCARE_CONSTANT: f64 = 2.0 / std::f64::consts::PI;

/// Barotropic pressure law described through its pressure potential `P`,
/// related to the pressure by `p'(rho) = rho P''(rho)`.
pub trait GasLaw<T: Scalar>: Debug + Clone + Send + Sync {
    fn pressure(&self, rho: T) -> T;
    fn potential(&self, rho: T) -> T;
    fn potential_d1(&self, rho: T) -> T;
    fn potential_d2(&self, rho: T) -> T;
}

/// Isothermal ideal gas with unit sound speed: `p(rho) = rho`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IdealGas;

impl<T: Scalar> GasLaw<T> for IdealGas {
    fn pressure(&self, rho: T) -> T {
        rho
    }

    fn potential(&self, rho: T) -> T {
        rho * rho.ln()
    }

    fn potential_d1(&self, rho: T) -> T {
        rho.ln() + T::one()
    }

    fn potential_d2(&self, rho: T) -> T {
        rho.recip()
    }
}

/// Uniform bounds `rho_lower <= rho <= rho_upper`, `|v| <= v_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateBounds<T> {
    pub rho_lower: T,
    pub rho_upper: T,
    pub v_bound: T,
}

impl<T: Scalar> StateBounds<T> {
    pub fn new(rho_lower: T, rho_upper: T, v_bound: T) -> Result<Self> {
        if !(rho_lower > T::zero() && rho_lower <= rho_upper) {
            return Err(Error::InvalidParameter(format!(
                "density bounds must satisfy 0 < {rho_lower} <= {rho_upper}"
            )));
        }
        if !(v_bound > T::zero()) {
            return Err(Error::InvalidParameter(format!("velocity bound {v_bound} must be positive")));
        }
        Ok(Self {
            rho_lower,
            rho_upper,
            v_bound,
        })
    }
}

fn positive<T: Scalar>(rho: T, cell: usize) -> Result<T> {
    if rho > T::zero() {
        Ok(rho)
    } else {
        Err(Error::NonPositiveDensity {
            cell,
            value: rho.as_f64(),
        })
    }
}

/// `v^2 / 2 + P'(rho)`.
pub fn enthalpy<T: Scalar, L: GasLaw<T>>(rho: T, v: T, law: &L) -> Result<T> {
    let rho = positive(rho, 0)?;
    Ok(T::half() * v * v + law.potential_d1(rho))
}

/// Density and velocity sampled at both endpoints of every cell, which is
/// all the trapezoid rule needs. Cell constants repeat their value at both
/// ends; continuous fields share values across cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledState<T> {
    rho: Vec<[T; 2]>,
    v: Vec<[T; 2]>,
}

impl<T: Scalar> SampledState<T> {
    pub fn from_discrete(grid: &Grid1D<T>, rho: &CellField<T>, v: &NodalField<T>) -> Result<Self> {
        check_lengths(grid, rho, v)?;
        Ok(Self {
            rho: rho.values().iter().map(|&r| [r, r]).collect(),
            v: v.values().windows(2).map(|w| [w[0], w[1]]).collect(),
        })
    }

    pub fn from_functions(grid: &Grid1D<T>, rho: impl Fn(T) -> T, v: impl Fn(T) -> T) -> Self {
        let cells = 0..grid.cells();
        Self {
            rho: cells
                .clone()
                .map(|c| [rho(grid.node(c)), rho(grid.node(c + 1))])
                .collect(),
            v: cells.map(|c| [v(grid.node(c)), v(grid.node(c + 1))]).collect(),
        }
    }

    fn check(&self, grid: &Grid1D<T>) -> Result<()> {
        if self.rho.len() != grid.cells() || self.v.len() != grid.cells() {
            return Err(Error::LengthMismatch {
                expected: grid.cells(),
                found: self.rho.len(),
            });
        }
        for (c, r) in self.rho.iter().enumerate() {
            positive(r[0], c)?;
            positive(r[1], c)?;
        }
        Ok(())
    }

    fn at(&self, cell: usize, node: usize) -> (T, T) {
        let side = node - cell;
        (self.rho[cell][side], self.v[cell][side])
    }
}

/// Total energy `int rho v^2 / 2 + P(rho)`.
pub fn energy<T: Scalar, L: GasLaw<T>>(state: &SampledState<T>, grid: &Grid1D<T>, law: &L) -> Result<T> {
    state.check(grid)?;
    Ok(grid.trapezoid(|c, n| {
        let (rho, v) = state.at(c, n);
        T::half() * rho * v * v + law.potential(rho)
    }))
}

/// Relative energy `H(u) - H(u_ref) - <H'(u_ref), u - u_ref>` with co-state
/// `H'(u_ref) = (enthalpy_ref, rho_ref v_ref)`.
pub fn relative_energy<T: Scalar, L: GasLaw<T>>(
    state: &SampledState<T>,
    reference: &SampledState<T>,
    grid: &Grid1D<T>,
    law: &L,
) -> Result<T> {
    state.check(grid)?;
    reference.check(grid)?;
    Ok(grid.trapezoid(|c, n| {
        let (rho, v) = state.at(c, n);
        let (rho_r, v_r) = reference.at(c, n);
        let e = T::half() * rho * v * v + law.potential(rho);
        let e_r = T::half() * rho_r * v_r * v_r + law.potential(rho_r);
        let enth_r = T::half() * v_r * v_r + law.potential_d1(rho_r);
        let m_r = rho_r * v_r;
        e - e_r - enth_r * (rho - rho_r) - m_r * (v - v_r)
    }))
}

/// Nodal values of `M(x) = -int_0^x rho`, integrated exactly.
pub fn negative_mass_antiderivative<T: Scalar>(grid: &Grid1D<T>, rho: &CellField<T>) -> Vec<T> {
    let h = grid.h();
    let mut out = Vec::with_capacity(grid.nodes());
    let mut acc = T::zero();
    out.push(acc);
    for &r in rho.values() {
        acc -= h * r;
        out.push(acc);
    }
    out
}

/// Auxiliary functional `G = <M - M_ref, v - v_ref>`.
pub fn auxiliary_functional<T: Scalar>(
    grid: &Grid1D<T>,
    rho: &CellField<T>,
    v: &NodalField<T>,
    rho_ref: &CellField<T>,
    v_ref: &NodalField<T>,
) -> Result<T> {
    check_lengths(grid, rho, v)?;
    check_lengths(grid, rho_ref, v_ref)?;
    let mm = negative_mass_antiderivative(grid, rho);
    let mm_ref = negative_mass_antiderivative(grid, rho_ref);
    Ok(grid.trapezoid(|_, n| (mm[n] - mm_ref[n]) * (v[n] - v_ref[n])))
}

/// Upper bound `C_poin l (||v - v_ref||^2 + ||rho - rho_ref||^2) / 2` on `|G|`.
pub fn auxiliary_functional_bound<T: Scalar>(
    grid: &Grid1D<T>,
    rho: &CellField<T>,
    v: &NodalField<T>,
    rho_ref: &CellField<T>,
    v_ref: &NodalField<T>,
) -> Result<T> {
    check_lengths(grid, rho, v)?;
    check_lengths(grid, rho_ref, v_ref)?;
    let dv2 = grid.trapezoid(|_, n| (v[n] - v_ref[n]).powi(2));
    let drho2 = grid.trapezoid(|c, _| (rho[c] - rho_ref[c]).powi(2));
    Ok(T::half() * T::lit(POINCARE_CONSTANT) * grid.length() * (dv2 + drho2))
}

/// Relative dissipation `D = gamma/4 <rho_ref (v - v_ref), (v - v_ref)(|v| + |v_ref|)>`.
pub fn relative_dissipation<T: Scalar>(
    grid: &Grid1D<T>,
    v: &NodalField<T>,
    rho_ref: &CellField<T>,
    v_ref: &NodalField<T>,
    gamma: T,
) -> Result<T> {
    check_lengths(grid, rho_ref, v)?;
    check_lengths(grid, rho_ref, v_ref)?;
    let integral = grid.trapezoid(|c, n| {
        let dv = v[n] - v_ref[n];
        rho_ref[c] * dv * dv * (v[n].abs() + v_ref[n].abs())
    });
    Ok(T::lit(0.25) * gamma * integral)
}

/// Outcome of the a-posteriori bound check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport<T> {
    pub pass: bool,
    pub min_rho: T,
    pub max_rho: T,
    pub max_abs_v: T,
    /// Cells whose density leaves `[rho_lower, rho_upper]`.
    pub density_violations: Vec<usize>,
    /// Nodes where `|v| > v_bound`.
    pub velocity_violations: Vec<usize>,
}

/// Checks cellwise density and nodal velocity against `bounds`.
pub fn check_assumption_a1h<T: Scalar>(
    rho: &CellField<T>,
    v: &NodalField<T>,
    bounds: &StateBounds<T>,
) -> BoundsReport<T> {
    let density_violations: Vec<usize> = rho
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &r)| !(r >= bounds.rho_lower && r <= bounds.rho_upper))
        .map(|(i, _)| i)
        .collect();
    let velocity_violations: Vec<usize> = v
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &x)| !(x.abs() <= bounds.v_bound))
        .map(|(i, _)| i)
        .collect();
    BoundsReport {
        pass: density_violations.is_empty() && velocity_violations.is_empty(),
        min_rho: rho.min(),
        max_rho: rho.max(),
        max_abs_v: v.max_abs(),
        density_violations,
        velocity_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn unit(m: usize) -> Grid1D<f64> {
        Grid1D::unit(m, 1, 1.0).unwrap()
    }

    #[test]
    fn ideal_gas_consistency() {
        let law = IdealGas;
        for &rho in &[0.5f64, 1.0, 2.0, 4.9] {
            // p'(rho) = rho P''(rho)
            assert_abs_diff_eq!(rho * GasLaw::<f64>::potential_d2(&law, rho), 1.0, epsilon = 1e-15);
            assert!(GasLaw::<f64>::potential_d2(&law, rho) > 0.0);
            assert_eq!(GasLaw::<f64>::pressure(&law, rho), rho);
        }
    }

    #[test]
    fn enthalpy_examples() {
        assert_eq!(enthalpy(1.0, 0.0, &IdealGas).unwrap(), 1.0);
        assert_abs_diff_eq!(enthalpy(2.0, 0.0, &IdealGas).unwrap(), 1.693_147_180_559_945, epsilon = 1e-15);
        assert_abs_diff_eq!(enthalpy(1.0, 0.2, &IdealGas).unwrap(), 1.02, epsilon = 1e-15);
        assert!(matches!(enthalpy(0.0, 0.0, &IdealGas), Err(Error::NonPositiveDensity { .. })));
        assert!(enthalpy(-1.0, 0.0, &IdealGas).is_err());
    }

    #[test]
    fn energy_examples() {
        let g = unit(5);
        let e = |rho: f64, v: f64| energy(&SampledState::from_functions(&g, |_| rho, |_| v), &g, &IdealGas).unwrap();
        assert_abs_diff_eq!(e(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(e(E, 0.0), E, epsilon = 1e-14);
        assert_abs_diff_eq!(e(1.0, 2.0), 2.0, epsilon = 1e-14);
        let bad = SampledState::from_functions(&g, |x| x - 0.5, |_| 0.0);
        assert!(energy(&bad, &g, &IdealGas).is_err());
    }

    #[test]
    fn relative_energy_examples() {
        let g = unit(3);
        let s = |rho: f64, v: f64| SampledState::from_functions(&g, move |_| rho, move |_| v);
        let u = SampledState::from_functions(&g, |x| 2.0 + x, |x| 0.1 * x);
        assert_abs_diff_eq!(relative_energy(&u, &u, &g, &IdealGas).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            relative_energy(&s(2.0, 0.0), &s(1.0, 0.0), &g, &IdealGas).unwrap(),
            2.0 * 2f64.ln() - 1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            relative_energy(&s(1.0, 1.0), &s(1.0, 0.0), &g, &IdealGas).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn auxiliary_functional_examples() {
        let g = unit(16);
        let rho = CellField::constant(&g, 2.0);
        let v = NodalField::constant(&g, 0.3);
        assert_eq!(auxiliary_functional(&g, &rho, &v, &rho, &v).unwrap(), 0.0);

        let rho1 = CellField::constant(&g, 3.0);
        let v1 = NodalField::constant(&g, 1.3);
        // M - M_ref = -x is linear, so the trapezoid rule is exact
        assert_abs_diff_eq!(auxiliary_functional(&g, &rho1, &v1, &rho, &v).unwrap(), -0.5, epsilon = 1e-14);

        let v2 = crate::mesh::interpolate_nodal(|x: f64| (5.0 * x).sin(), &g);
        assert_eq!(auxiliary_functional(&g, &rho, &v2, &rho, &v).unwrap(), 0.0);
    }

    #[test]
    fn poincare_constant_covers_worst_linear_case() {
        // d_rho = 1, d_v = -sqrt(3) x gives G = 1/sqrt(3) > (1/pi)(1 + 1)
        let g = unit(2000);
        let rho = CellField::constant(&g, 2.0);
        let rho_ref = CellField::constant(&g, 1.0);
        let v = crate::mesh::interpolate_nodal(|x: f64| -(3f64.sqrt()) * x, &g);
        let zero = NodalField::constant(&g, 0.0);
        let gval = auxiliary_functional(&g, &rho, &v, &rho_ref, &zero).unwrap();
        let bound = auxiliary_functional_bound(&g, &rho, &v, &rho_ref, &zero).unwrap();
        assert_abs_diff_eq!(gval, 1.0 / 3f64.sqrt(), epsilon = 1e-6);
        assert!(gval.abs() <= bound);
        assert!(gval.abs() > 2.0 / std::f64::consts::PI * 0.5);
    }

    #[test]
    fn relative_dissipation_examples() {
        let g = unit(4);
        let rho = CellField::constant(&g, 1.0);
        let one = NodalField::constant(&g, 1.0);
        let zero = NodalField::constant(&g, 0.0);
        assert_eq!(relative_dissipation(&g, &one, &rho, &one, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(relative_dissipation(&g, &one, &rho, &zero, 1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(relative_dissipation(&g, &one, &rho, &zero, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bounds_check_examples() {
        let g = unit(4);
        let b = StateBounds::new(1.0, 4.0, 1.0).unwrap();
        let r = check_assumption_a1h(&CellField::constant(&g, 2.5), &NodalField::constant(&g, 0.0), &b);
        assert!(r.pass);
        assert_eq!((r.min_rho, r.max_rho, r.max_abs_v), (2.5, 2.5, 0.0));

        let rho = CellField::new(&g, vec![2.5, 0.5, 2.5, 2.5]).unwrap();
        let r = check_assumption_a1h(&rho, &NodalField::constant(&g, 0.0), &b);
        assert!(!r.pass);
        assert_eq!(r.density_violations, vec![1]);
        assert_eq!(r.min_rho, 0.5);

        let v = NodalField::new(&g, vec![0.0, 0.3, -1.2, 0.0, 0.0]).unwrap();
        let r = check_assumption_a1h(&CellField::constant(&g, 2.0), &v, &b);
        assert!(!r.pass);
        assert_eq!(r.velocity_violations, vec![2]);
        assert_eq!(r.max_abs_v, 1.2);

        assert!(StateBounds::new(0.0, 1.0, 1.0).is_err());
        assert!(StateBounds::new(2.0, 1.0, 1.0).is_err());
        assert!(StateBounds::new(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid1D::<f32>::unit(4, 1, 1.0).unwrap();
        let s = SampledState::from_functions(&g, |_| 2.0f32, |_| 0.0);
        let r = SampledState::from_functions(&g, |_| 1.0f32, |_| 0.0);
        let h = relative_energy(&s, &r, &g, &IdealGas).unwrap();
        assert!((h - (2.0 * 2f32.ln() - 1.0)).abs() < 1e-6);
    }
}
