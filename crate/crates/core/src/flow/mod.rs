//! Taylor jets of the Hamiltonian flow at a totally degenerate critical
//! point, the Hamilton–Jacobi generating function, and checks of their
//! structure.
//!
//! Because the Hessian of `p₀` vanishes, `dΦ_t(z₀) = Id` for all `t`, and
//! `Φ_t(z) = z + ∫₀^t H_{p₀}(Φ_s(z)) ds` can be solved one spatial degree
//! at a time: the degree-`d` part of the integrand involves only parts of
//! `Φ_s` of degree `< d`, and it is a polynomial in `s`, so the time
//! integral is exact.

mod generating;
pub mod ode;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{Jet, TimeJet, VectorJet};
use crate::symbols::{hamiltonian_field, SymbolModel};

pub use generating::{
    implicit_relation_residual, generating_jet, generating_time_jet, normal_form_jacobian, phase_structure_check,
    GeneratingJet, GeneratingTimeJet, PhaseStructureReport,
};

/// Taylor data of `Φ_t` at `z₀` in the initial condition, at a fixed time.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowJet {
    pub t: f64,
    pub jet: VectorJet,
}

/// `Φ_t` through spatial degree `m` with exact polynomial dependence on `t`.
pub fn flow_time_jet(s: &SymbolModel, m: usize) -> Result<Vec<TimeJet>> {
    if m == 0 || m + 1 > s.taylor_order() {
        return Err(Error::Domain(format!(
            "flow jet degree {m} needs symbol data through degree {} (have {})",
            m + 1,
            s.taylor_order()
        )));
    }
    let dim = s.phase_dim();
    let field = hamiltonian_field(s, m + 1)?;
    let field: Vec<TimeJet> = field.components().iter().map(|c| TimeJet::from_jet(c.clone())).collect();
    let mut phi: Vec<TimeJet> = (0..dim).map(|i| TimeJet::from_jet(Jet::variable(dim, m, i))).collect();
    for d in 2..=m {
        let rhs = TimeJet::compose_many(&field, dim, &phi)?;
        for (p, r) in phi.iter_mut().zip(rhs) {
            *p = p.add(&r.homogeneous_part(d).integrate());
        }
    }
    Ok(phi)
}

/// `Φ_t` through degree `m` at time `t`.
pub fn flow_jet(s: &SymbolModel, m: usize, t: f64) -> Result<FlowJet> {
    let phi = flow_time_jet(s, m)?;
    let jet = VectorJet::new(phi.iter().map(|p| p.eval(t)).collect())?;
    Ok(FlowJet { t, jet })
}

/// Trajectory of `ż = H_{p₀}(z)` from `z` over time `t`.
pub fn flow_numeric(s: &SymbolModel, z: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    if z.len() != s.phase_dim() {
        return Err(Error::Structural(format!("phase point has {} entries, expected {}", z.len(), s.phase_dim())));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("ODE tolerance must be positive".into()));
    }
    let field = hamiltonian_field(s, s.taylor_order())?;
    ode::dopri45(
        |y, dy| {
            for (d, c) in dy.iter_mut().zip(field.components()) {
                *d = c.eval(y);
            }
        },
        z,
        t,
        tol,
    )
}

/// Outcome of the flow/Hamilton–Jacobi structure checks.
#[derive(Clone, Debug, Serialize)]
pub struct FlowCheckReport {
    /// Degrees `2..=k−2` of every flow jet on the grid are exactly zero.
    pub degeneracy_ok: bool,
    /// Largest deviation of the degree-`(k−1)` part from `t·H_{𝔭_k}`.
    pub first_jet_residual: f64,
    /// Largest coefficient of `Φ_{t+s} − Φ_t∘Φ_s` over the grid pairs.
    pub group_law_residual: f64,
    /// Largest coefficient of the implicit-relation residual
    /// `Φ_t(∂_ηS, η) − (x, ∂_xS)`, all powers of `t`.
    pub hj_residual: f64,
    /// Largest deviation of the degree-`k` part of `S` from `−t𝔭_k`.
    pub sk_residual: f64,
    /// Largest spread of the normal-form Jacobian across the grid.
    pub jacobian_spread: f64,
    /// Highest power of `t` in the generating function at each spatial
    /// degree.
    pub time_degree_by_spatial_degree: Vec<(usize, usize)>,
}

/// Runs the structural checks for degree `m` on a grid of times.
pub fn flow_check(s: &SymbolModel, m: usize, t_grid: &[f64]) -> Result<FlowCheckReport> {
    let k = s.k();
    let phi = flow_time_jet(s, m)?;
    let dim = s.phase_dim();

    let first = if k - 1 <= m {
        let field = hamiltonian_field(s, m + 1)?;
        Some(VectorJet::new(field.components().iter().map(|c| c.homogeneous_part(k - 1).with_order(m)).collect())?)
    } else {
        None
    };

    let mut degeneracy_ok = true;
    let mut first_res: f64 = 0.0;
    for &t in t_grid {
        let fj = VectorJet::new(phi.iter().map(|p| p.eval(t)).collect())?;
        for d in 2..=(k - 2).min(m) {
            degeneracy_ok &= fj.homogeneous_part(d).components().iter().all(|c| c.is_zero());
        }
        if let Some(h) = &first {
            let got = fj.homogeneous_part(k - 1);
            first_res = first_res.max(got.max_abs_diff(&h.scale(t)));
        }
    }

    let mut group: f64 = 0.0;
    for &t in t_grid {
        for &u in t_grid {
            let a = VectorJet::new(phi.iter().map(|p| p.eval(t)).collect())?;
            let b = VectorJet::new(phi.iter().map(|p| p.eval(u)).collect())?;
            let ab = VectorJet::new(phi.iter().map(|p| p.eval(t + u)).collect())?;
            group = group.max(a.compose(&b)?.max_abs_diff(&ab));
        }
    }

    let n_hj = m + 1;
    let gen = generating_time_jet(s, n_hj)?;
    let hj = implicit_relation_residual(s, &gen)?;
    let pk = s.leading().with_order(n_hj);
    let sk = gen.w.homogeneous_part(k);
    let mut sk_res: f64 = 0.0;
    for &t in t_grid {
        sk_res = sk_res.max(sk.eval(t).max_abs_diff(&pk.scale(-t)));
    }

    let mut jac_spread: f64 = 0.0;
    let dirs: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let a = 0.37 + i as f64 * 0.71;
            (0..dim).map(|j| (a * (j as f64 + 1.0)).cos()).collect()
        })
        .collect();
    for th in &dirs {
        let vals: Vec<f64> = t_grid.iter().map(|&t| normal_form_jacobian(s, t, th)).collect::<Result<_>>()?;
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        jac_spread = jac_spread.max(hi - lo);
    }

    Ok(FlowCheckReport {
        degeneracy_ok,
        first_jet_residual: first_res,
        group_law_residual: group,
        hj_residual: hj,
        sk_residual: sk_res,
        jacobian_spread: jac_spread,
        time_degree_by_spatial_degree: gen.time_degree_by_spatial_degree(),
    })
}

/// Error of the degree-`m` flow jet against the integrator at radii
/// `r, r/2, r/4, …` along `dir`, and the observed orders
/// `log₂(err(r)/err(r/2))`.
pub fn jet_vs_ode(
    s: &SymbolModel,
    m: usize,
    dir: &[f64],
    t: f64,
    r0: f64,
    levels: usize,
) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
    let fj = flow_jet(s, m, t)?;
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut errs = Vec::with_capacity(levels);
    for l in 0..levels {
        let r = r0 / 2f64.powi(l as i32);
        let z: Vec<f64> = dir.iter().map(|x| r * x / norm).collect();
        let num = flow_numeric(s, &z, t, 1e-15)?;
        let jet = fj.jet.eval(&z);
        let e = num.iter().zip(&jet).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        errs.push((r, e));
    }
    let orders = errs.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    Ok((errs, orders))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{make_symbol, Extremum};

    fn osc2() -> SymbolModel {
        SymbolModel::osc_power(1, 2, Extremum::Minimum, 0.0, 0.0).unwrap()
    }

    fn quartic_plus_quintic() -> SymbolModel {
        let p4 = Jet::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0), (vec![2, 2], 0.5)]).unwrap();
        let p5 = Jet::from_terms(2, 5, &[(vec![3, 2], 0.3), (vec![0, 5], -0.2)]).unwrap();
        make_symbol(1, 0.0, vec![p4, p5], 0.0).unwrap()
    }

    #[test]
    fn degree3_jet_for_osc2() {
        let s = osc2().with_taylor_order(6).unwrap();
        for &t in &[0.0, 0.5, -1.7] {
            let fj = flow_jet(&s, 3, t).unwrap();
            let d2 = fj.jet.homogeneous_part(2);
            assert!(d2.components().iter().all(|c| c.is_zero()));
            let d3 = fj.jet.homogeneous_part(3);
            let e0 = Jet::from_terms(2, 3, &[(vec![2, 1], 4.0 * t), (vec![0, 3], 4.0 * t)]).unwrap();
            let e1 = Jet::from_terms(2, 3, &[(vec![3, 0], -4.0 * t), (vec![1, 2], -4.0 * t)]).unwrap();
            assert_eq!(d3.components()[0], e0);
            assert_eq!(d3.components()[1], e1);
        }
    }

    #[test]
    fn linear_part_is_identity() {
        let s = quartic_plus_quintic().with_taylor_order(7).unwrap();
        for &t in &[0.0, 1.3, -2.0] {
            let fj = flow_jet(&s, 6, t).unwrap();
            assert_eq!(fj.jet.homogeneous_part(1), VectorJet::identity(2, 6).homogeneous_part(1));
        }
        let at0 = flow_jet(&s, 6, 0.0).unwrap();
        assert_eq!(at0.jet, VectorJet::identity(2, 6));
    }

    #[test]
    fn too_high_degree_is_domain_error() {
        assert!(matches!(flow_jet(&osc2(), 4, 1.0).unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn circle_orbit_and_period() {
        let s = osc2();
        let e: f64 = 0.3;
        let r = e.powf(0.25);
        let z = [r, 0.0];
        let period = std::f64::consts::PI / (2.0 * e.sqrt());
        let end = flow_numeric(&s, &z, period, 1e-12).unwrap();
        assert!((end[0] - r).abs() < 1e-9 && end[1].abs() < 1e-9, "{end:?}");
        for &t in &[0.3, 1.1, -0.8] {
            let w = flow_numeric(&s, &z, t, 1e-12).unwrap();
            let rad = (w[0] * w[0] + w[1] * w[1]).sqrt();
            assert!((rad - r).abs() < 1e-10);
            // explicit solution: rotation at angular speed 4 q
            let ang = -4.0 * e.sqrt() * t;
            assert!((w[0] - r * ang.cos()).abs() < 1e-9 && (w[1] - r * ang.sin()).abs() < 1e-9);
        }
        assert_eq!(flow_numeric(&s, &z, 0.0, 1e-10).unwrap(), z.to_vec());
    }

    #[test]
    fn energy_conserved_by_integrator() {
        let s = quartic_plus_quintic();
        let z = [0.4, -0.3];
        let tol = 1e-11;
        let w = flow_numeric(&s, &z, 1.5, tol).unwrap();
        assert!((s.p0(&w) - s.p0(&z)).abs() <= 10.0 * tol);
    }

    #[test]
    fn group_law_and_ladder() {
        let s = quartic_plus_quintic().with_taylor_order(8).unwrap();
        let rep = flow_check(&s, 7, &[-1.0, -0.3, 0.0, 0.6, 1.2]).unwrap();
        assert!(rep.degeneracy_ok);
        assert_eq!(rep.first_jet_residual, 0.0);
        assert!(rep.group_law_residual < 1e-12, "{}", rep.group_law_residual);
        assert!(rep.hj_residual < 1e-12, "{}", rep.hj_residual);
        assert_eq!(rep.sk_residual, 0.0);
        assert_eq!(rep.jacobian_spread, 0.0);
    }

    #[test]
    fn jet_matches_integrator_to_expected_order() {
        let s = quartic_plus_quintic().with_taylor_order(6).unwrap();
        for m in [3usize, 4, 5] {
            let (errs, orders) = jet_vs_ode(&s, m, &[0.6, -0.8], 1.3, 2e-2, 3).unwrap();
            for o in &orders {
                assert!(*o >= m as f64 + 1.0 - 0.15, "m={m}: orders {orders:?}, errs {errs:?}");
            }
        }
    }
}
