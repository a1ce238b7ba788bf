//! Validates the test-side Gauss-Seidel reference solver itself before it
//! is trusted to judge the Newton implementation.

mod support;

use gridsel::grid::{load_network_str, reference_network};
use gridsel::powerflow::{injections_at, Injections};

/// Two-bus network text: slack feeding a 50 MW load over x = 0.1 p.u.
const TWO_BUS: &str = "
[meta]
100, 50
[buses]
1, slack, 1, 0, 0
2, pq, 1, 0, 0
[branches]
1, 2, 0, 0.1, 0, 100, 0
[generators]
1, coal, 0, 0, 1000, 1, 20, 1
[loads]
2, 50, 0
";

#[test]
fn oracle_reproduces_two_bus_closed_form() {
    let net = load_network_str(TWO_BUS).unwrap();
    let inj = injections_at(&net, 1.0);
    let gs = support::gauss_seidel(&net, &inj, 1e-12, 100_000);
    assert!(gs.converged, "oracle did not converge");

    // sin(2 theta2) = -2 P x with V2 = cos(theta2), P = 0.5 p.u., x = 0.1.
    let theta2 = 0.5 * (-2.0f64 * 0.5 * 0.1).asin();
    assert!((gs.va[1] - theta2).abs() < 1e-8, "angle {} vs {}", gs.va[1], theta2);
    assert!((gs.vm[1] - theta2.cos()).abs() < 1e-8);
    assert_eq!(gs.vm[0], 1.0);
    assert_eq!(gs.va[0], 0.0);
}

#[test]
fn oracle_converges_on_the_reference_grid() {
    let net = reference_network();
    let inj = injections_at(&net, 1.0);
    let gs = support::gauss_seidel(&net, &inj, 1e-10, 100_000);
    assert!(gs.converged, "oracle stalled after {} sweeps", gs.sweeps);
    for &v in &gs.vm {
        assert!(v > 0.9 && v < 1.05);
    }
}

#[test]
fn oracle_flags_zero_injection_case_immediately() {
    let net = load_network_str(TWO_BUS).unwrap();
    let inj = Injections { p_mw: vec![0.0, 0.0], q_mvar: vec![0.0, 0.0] };
    let gs = support::gauss_seidel(&net, &inj, 1e-12, 10);
    assert!(gs.converged);
    assert_eq!(gs.sweeps, 0);
    assert_eq!(gs.vm, vec![1.0, 1.0]);
}
