//! AC load flow in polar form.
//!
//! [`solve_ac`] runs full Newton-Raphson on the bus power balance
//! equations: active-power mismatch equations at every PV and PQ bus,
//! reactive mismatches at every PQ bus, the slack bus absorbing the
//! remainder. Voltages start from a flat profile (1.0 p.u., 0 rad; setpoint
//! magnitudes at regulated buses) and the iteration stops when the largest
//! mismatch drops below `tol` in per-unit.
//!
//! Buses are classified per call: the declared slack bus stays slack, any
//! other bus with an online generator is PV at that generator's `v_set`,
//! everything else is PQ. Switching a solar unit offline therefore turns
//! its bus back into an ordinary zero-injection PQ bus.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{admittance_matrix, GridError, Network};

/// Scheduled net bus injections (generation minus load), system units.
#[derive(Debug, Clone, PartialEq)]
pub struct Injections {
    pub p_mw: Vec<f64>,
    pub q_mvar: Vec<f64>,
}

/// Net scheduled injections for a network with every load scaled by
/// `load_scale`: online generator setpoints minus scaled base loads.
pub fn injections_at(net: &Network, load_scale: f64) -> Injections {
    let n = net.bus_count();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for g in net.generators.iter().filter(|g| g.online) {
        p[g.bus] += g.p_set_mw;
    }
    for l in &net.loads {
        p[l.bus] -= l.p_base_mw * load_scale;
        q[l.bus] -= l.q_base_mvar * load_scale;
    }
    Injections { p_mw: p, q_mvar: q }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    /// Bus voltage magnitudes, p.u.
    pub voltage_mag: Vec<f64>,
    /// Bus voltage angles, radians, slack at 0.
    pub voltage_ang: Vec<f64>,
    /// Apparent power per branch, MVA: the larger of the two line ends.
    pub branch_flow_mva: Vec<f64>,
    /// Net active injection the slack bus settled at, MW.
    pub p_slack_mw: f64,
    /// Total series losses, MW.
    pub losses_mw: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute power mismatch at exit, p.u.
    pub residual: f64,
    /// Mismatch infinity-norm before each Newton correction, ending with
    /// the exit residual.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum PowerFlowError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian {
        iteration: usize,
        /// State at the failure point so callers can still inspect it.
        last: Box<PowerFlowSolution>,
    },
}

/// Full Newton-Raphson AC load flow.
///
/// Returns `Ok` with `converged = false` when `max_iter` runs out; the
/// solution then carries the last iterate. A singular Jacobian is an error.
pub fn solve_ac(
    net: &Network,
    inj: &Injections,
    tol: f64,
    max_iter: usize,
) -> Result<PowerFlowSolution, PowerFlowError> {
    let n = net.bus_count();
    assert_eq!(inj.p_mw.len(), n, "injection vector length");
    assert_eq!(inj.q_mvar.len(), n, "injection vector length");
    let y = admittance_matrix(net)?;

    // Per-call bus classification.
    let slack = net.slack_bus();
    let mut is_pv = vec![false; n];
    let mut v_target = vec![1.0; n];
    for g in net.generators.iter().filter(|g| g.online) {
        if g.bus != slack {
            is_pv[g.bus] = true;
        }
        v_target[g.bus] = g.v_set;
    }
    let pvpq: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| i != slack && !is_pv[i]).collect();

    // Flat start.
    let mut vm: Vec<f64> = (0..n)
        .map(|i| if i == slack || is_pv[i] { v_target[i] } else { 1.0 })
        .collect();
    let mut va = vec![0.0; n];

    let p_sched: Vec<f64> = inj.p_mw.iter().map(|p| p / net.base_mva).collect();
    let q_sched: Vec<f64> = inj.q_mvar.iter().map(|q| q / net.base_mva).collect();

    let calc = |vm: &[f64], va: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let v: Vec<Complex64> =
            (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += y[(i, k)] * v[k];
            }
            let s = v[i] * acc.conj();
            p[i] = s.re;
            q[i] = s.im;
        }
        (p, q)
    };

    let mismatch = |p_calc: &[f64], q_calc: &[f64]| -> DVector<f64> {
        let mut f = DVector::zeros(pvpq.len() + pq.len());
        for (r, &i) in pvpq.iter().enumerate() {
            f[r] = p_sched[i] - p_calc[i];
        }
        for (r, &i) in pq.iter().enumerate() {
            f[pvpq.len() + r] = q_sched[i] - q_calc[i];
        }
        f
    };

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let (mut p_calc, mut q_calc) = calc(&vm, &va);
    let mut f = mismatch(&p_calc, &q_calc);
    let mut residual = f.amax();
    history.push(residual);

    while iterations < max_iter {
        if residual < tol {
            converged = true;
            break;
        }

        // evaluate J(x)
        let m = pvpq.len() + pq.len();
        let mut jac = DMatrix::<f64>::zeros(m, m);
        let col_of_theta = |b: usize| pvpq.iter().position(|&x| x == b);
        let col_of_vm = |b: usize| pq.iter().position(|&x| x == b).map(|c| pvpq.len() + c);
        for (r, &i) in pvpq.iter().enumerate() {
            for k in 0..n {
                let g = y[(i, k)].re;
                let b = y[(i, k)].im;
                if g == 0.0 && b == 0.0 && k != i {
                    continue;
                }
                let tik = va[i] - va[k];
                let (s, c) = tik.sin_cos();
                if k == i {
                    if let Some(col) = col_of_theta(i) {
                        jac[(r, col)] = -q_calc[i] - b * vm[i] * vm[i];
                    }
                    if let Some(col) = col_of_vm(i) {
                        jac[(r, col)] = p_calc[i] / vm[i] + g * vm[i];
                    }
                } else {
                    if let Some(col) = col_of_theta(k) {
                        jac[(r, col)] = vm[i] * vm[k] * (g * s - b * c);
                    }
                    if let Some(col) = col_of_vm(k) {
                        jac[(r, col)] = vm[i] * (g * c + b * s);
                    }
                }
            }
        }
        for (rq, &i) in pq.iter().enumerate() {
            let r = pvpq.len() + rq;
            for k in 0..n {
                let g = y[(i, k)].re;
                let b = y[(i, k)].im;
                if g == 0.0 && b == 0.0 && k != i {
                    continue;
                }
                let tik = va[i] - va[k];
                let (s, c) = tik.sin_cos();
                if k == i {
                    if let Some(col) = col_of_theta(i) {
                        jac[(r, col)] = p_calc[i] - g * vm[i] * vm[i];
                    }
                    if let Some(col) = col_of_vm(i) {
                        jac[(r, col)] = q_calc[i] / vm[i] - b * vm[i];
                    }
                } else {
                    if let Some(col) = col_of_theta(k) {
                        jac[(r, col)] = -vm[i] * vm[k] * (g * c + b * s);
                    }
                    if let Some(col) = col_of_vm(k) {
                        jac[(r, col)] = vm[i] * (g * s - b * c);
                    }
                }
            }
        }

        // solve J dx = f and apply the correction
        let lu = jac.lu();
        let dx = match lu.solve(&f) {
            Some(dx) => dx,
            None => {
                let sol = assemble(net, &y, &vm, &va, false, iterations, residual, history);
                return Err(PowerFlowError::SingularJacobian {
                    iteration: iterations,
                    last: Box::new(sol),
                });
            }
        };
        for (r, &i) in pvpq.iter().enumerate() {
            va[i] += dx[r];
        }
        for (r, &i) in pq.iter().enumerate() {
            vm[i] += dx[pvpq.len() + r];
        }
        iterations += 1;

        let pq_next = calc(&vm, &va);
        p_calc = pq_next.0;
        q_calc = pq_next.1;
        f = mismatch(&p_calc, &q_calc);
        residual = f.amax();
        history.push(residual);
    }
    if residual < tol {
        converged = true;
    }

    Ok(assemble(net, &y, &vm, &va, converged, iterations, residual, history))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    net: &Network,
    y: &DMatrix<Complex64>,
    vm: &[f64],
    va: &[f64],
    converged: bool,
    iterations: usize,
    residual: f64,
    residual_history: Vec<f64>,
) -> PowerFlowSolution {
    let n = net.bus_count();
    let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
    let mut p_total = 0.0;
    let mut p_slack = 0.0;
    let slack = net.slack_bus();
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            acc += y[(i, k)] * v[k];
        }
        let p = (v[i] * acc.conj()).re;
        p_total += p;
        if i == slack {
            p_slack = p;
        }
    }
    PowerFlowSolution {
        branch_flow_mva: branch_flows(net, vm, va),
        voltage_mag: vm.to_vec(),
        voltage_ang: va.to_vec(),
        p_slack_mw: p_slack * net.base_mva,
        losses_mw: p_total * net.base_mva,
        converged,
        iterations,
        residual,
        residual_history,
    }
}

/// Apparent power on every branch in MVA, taking the larger of the two
/// line-end flows of the pi model.
pub fn branch_flows(net: &Network, vm: &[f64], va: &[f64]) -> Vec<f64> {
    net.branches
        .iter()
        .map(|br| {
            let vf = Complex64::from_polar(vm[br.from_bus], va[br.from_bus]);
            let vt = Complex64::from_polar(vm[br.to_bus], va[br.to_bus]);
            let ys = Complex64::new(br.resistance, br.reactance).inv();
            let yc = Complex64::new(0.0, br.charging_susceptance / 2.0);
            let sf = vf * ((vf - vt) * ys + vf * yc).conj();
            let st = vt * ((vt - vf) * ys + vt * yc).conj();
            sf.norm().max(st.norm()) * net.base_mva
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongestionReport {
    pub congested: bool,
    /// Branch indices whose loading exceeds `threshold * mva_rating`.
    pub overloaded_branches: Vec<usize>,
}

/// Flags branches loaded beyond `threshold` times their rating.
///
/// Expects a converged solution; a non-converged one is reported as
/// congested outright (an operating point the grid cannot support), in
/// which case the overload list reflects the last iterate and may be
/// empty.
pub fn detect_congestion(net: &Network, sol: &PowerFlowSolution, threshold: f64) -> CongestionReport {
    let overloaded: Vec<usize> = sol
        .branch_flow_mva
        .iter()
        .enumerate()
        .filter(|(i, &flow)| flow > threshold * net.branches[*i].mva_rating)
        .map(|(i, _)| i)
        .collect();
    CongestionReport {
        congested: !sol.converged || !overloaded.is_empty(),
        overloaded_branches: overloaded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::tests::two_bus;
    use crate::grid::{reference_network, Load};
    use approx::assert_relative_eq;

    const TOL: f64 = 1e-8;
    const MAX_ITER: usize = 30;

    #[test]
    fn zero_injection_network_is_already_solved() {
        let net = two_bus(0.0, 0.1);
        let inj = Injections { p_mw: vec![0.0, 0.0], q_mvar: vec![0.0, 0.0] };
        let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.voltage_mag, vec![1.0, 1.0]);
        assert_eq!(sol.voltage_ang, vec![0.0, 0.0]);
    }

    #[test]
    fn two_bus_matches_closed_form() {
        // Lossless line x = 0.1 p.u., 50 MW drawn at the far end. The
        // polar balance collapses to sin(2*theta2) = -2 P x, V2 = cos(theta2).
        let mut net = two_bus(0.0, 0.1);
        net.loads.push(Load { bus: 1, p_base_mw: 50.0, q_base_mvar: 0.0 });
        let inj = injections_at(&net, 1.0);
        let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
        assert!(sol.converged);

        let theta2 = 0.5 * (-2.0f64 * 0.5 * 0.1).asin();
        let v2 = theta2.cos();
        assert_relative_eq!(sol.voltage_ang[1], theta2, epsilon = 1e-9);
        assert_relative_eq!(sol.voltage_mag[1], v2, epsilon = 1e-9);

        // Sending end carries the 50 MW plus the line's reactive demand.
        let q1 = 10.0 * theta2.sin() * theta2.sin();
        let s1 = (0.25f64 + q1 * q1).sqrt() * 100.0;
        assert_relative_eq!(sol.branch_flow_mva[0], s1, epsilon = 1e-6);
        assert_relative_eq!(sol.losses_mw, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn reference_grid_solves_at_every_level() {
        let net = reference_network();
        for scale in [0.7, 1.0, 1.3] {
            let inj = injections_at(&net, scale);
            let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
            assert!(sol.converged, "level {scale} did not converge");
            assert!(sol.iterations < 10);
            assert!(sol.losses_mw >= 0.0);
            for &v in &sol.voltage_mag {
                assert!(v > 0.8 && v < 1.1, "implausible voltage {v}");
            }
        }
    }

    #[test]
    fn power_balance_closes() {
        let net = reference_network();
        let inj = injections_at(&net, 1.3);
        let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
        // Scheduled non-slack injections plus the slack pickup equal the
        // losses; everything else cancels by construction.
        let slack = net.slack_bus();
        let sched: f64 = (0..net.bus_count())
            .filter(|&i| i != slack)
            .map(|i| inj.p_mw[i])
            .sum();
        assert!((sched + sol.p_slack_mw - sol.losses_mw).abs() < 1e-4);
    }

    #[test]
    fn residual_shrinks_monotonically_at_the_end() {
        let net = reference_network();
        let inj = injections_at(&net, 1.0);
        let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
        let h = &sol.residual_history;
        assert!(h.len() >= 3, "expected at least three residuals");
        for w in h[h.len() - 3..].windows(2) {
            assert!(w[1] < w[0], "residual went up: {h:?}");
        }
    }

    #[test]
    fn offline_solar_bus_reverts_to_pq() {
        let mut net = reference_network();
        let solar_bus = 11; // bus 12 in file ids
        net.generators
            .iter_mut()
            .filter(|g| g.bus == solar_bus)
            .for_each(|g| g.online = false);
        let inj = injections_at(&net, 1.0);
        let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
        assert!(sol.converged);
        // No longer pinned at its setpoint.
        assert!((sol.voltage_mag[solar_bus] - 1.0).abs() > 1e-6);
    }

    #[test]
    fn overload_detection_and_threshold_monotonicity() {
        let mut net = reference_network();
        for g in &mut net.generators {
            if g.source == crate::grid::EnergySource::Solar {
                g.online = false;
            }
        }
        let inj = injections_at(&net, 1.3);
        let sol = solve_ac(&net, &inj, TOL, MAX_ITER).unwrap();
        assert!(sol.converged);
        let tight = detect_congestion(&net, &sol, 1.0);
        let loose = detect_congestion(&net, &sol, 1.5);
        for b in &loose.overloaded_branches {
            assert!(tight.overloaded_branches.contains(b));
        }
        assert_eq!(tight.congested, !tight.overloaded_branches.is_empty());
    }

    #[test]
    fn non_converged_counts_as_congested() {
        // An absurd 20 p.u. draw over a weak line cannot be supported.
        let mut net = two_bus(0.0, 0.5);
        net.loads.push(Load { bus: 1, p_base_mw: 2000.0, q_base_mvar: 600.0 });
        let inj = injections_at(&net, 1.0);
        match solve_ac(&net, &inj, TOL, 10) {
            Ok(sol) => {
                assert!(!sol.converged);
                let report = detect_congestion(&net, &sol, 1.0);
                assert!(report.congested);
            }
            Err(PowerFlowError::SingularJacobian { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
