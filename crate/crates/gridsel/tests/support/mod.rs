//! Shared helpers for integration tests, most importantly an independent
//! Gauss-Seidel load-flow used to cross-check the Newton solver. It builds
//! its own admittance terms straight from the branch list and iterates the
//! classic single-bus update, so it shares no code path with the
//! implementation under test.

use gridsel::grid::{BusKind, Network};
use gridsel::powerflow::Injections;
use num_complex::Complex64;

pub struct GsSolution {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub converged: bool,
    #[allow(dead_code)] // read by some test targets, not all
    pub sweeps: usize,
}

/// Textbook Gauss-Seidel with PV-bus magnitude correction.
///
/// Runs until the largest scheduled-power mismatch falls below `tol`
/// (per-unit) or `max_sweeps` is exhausted.
pub fn gauss_seidel(net: &Network, inj: &Injections, tol: f64, max_sweeps: usize) -> GsSolution {
    let n = net.buses.len();

    // Admittance terms, assembled independently of the library.
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for br in &net.branches {
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.resistance, br.reactance);
        let yc = Complex64::new(0.0, br.charging_susceptance / 2.0);
        y[br.from_bus][br.from_bus] += ys + yc;
        y[br.to_bus][br.to_bus] += ys + yc;
        y[br.from_bus][br.to_bus] -= ys;
        y[br.to_bus][br.from_bus] -= ys;
    }
    for b in &net.buses {
        y[b.id][b.id] += Complex64::new(0.0, b.shunt_susceptance);
    }

    let slack = net
        .buses
        .iter()
        .position(|b| b.kind == BusKind::Slack)
        .expect("slack bus");
    let mut is_pv = vec![false; n];
    let mut v_target = vec![1.0; n];
    for g in net.generators.iter().filter(|g| g.online) {
        if g.bus != slack {
            is_pv[g.bus] = true;
        }
        v_target[g.bus] = g.v_set;
    }

    let s_sched: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(inj.p_mw[i] / net.base_mva, inj.q_mvar[i] / net.base_mva))
        .collect();

    let mut v: Vec<Complex64> = (0..n)
        .map(|i| {
            if i == slack || is_pv[i] {
                Complex64::new(v_target[i], 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();

    let injected = |v: &[Complex64], i: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            acc += y[i][k] * v[k];
        }
        v[i] * acc.conj()
    };
    let mismatch = |v: &[Complex64]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            if i == slack {
                continue;
            }
            let s = injected(v, i);
            worst = worst.max((s.re - s_sched[i].re).abs());
            if !is_pv[i] {
                worst = worst.max((s.im - s_sched[i].im).abs());
            }
        }
        worst
    };

    let mut sweeps = 0;
    while sweeps < max_sweeps {
        if mismatch(&v) < tol {
            return GsSolution {
                vm: v.iter().map(|x| x.norm()).collect(),
                va: v.iter().map(|x| x.arg()).collect(),
                converged: true,
                sweeps,
            };
        }
        for i in 0..n {
            if i == slack {
                continue;
            }
            let s_i = if is_pv[i] {
                // Hold scheduled P, take whatever Q the current voltages imply.
                Complex64::new(s_sched[i].re, injected(&v, i).im)
            } else {
                s_sched[i]
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k != i {
                    sum += y[i][k] * v[k];
                }
            }
            let mut v_new = ((s_i / v[i]).conj() - sum) / y[i][i];
            if is_pv[i] {
                v_new *= v_target[i] / v_new.norm();
            }
            v[i] = v_new;
        }
        sweeps += 1;
    }
    GsSolution {
        vm: v.iter().map(|x| x.norm()).collect(),
        va: v.iter().map(|x| x.arg()).collect(),
        converged: mismatch(&v) < tol,
        sweeps,
    }
}
