//! Grid data model: buses, branches, generators, loads.
//!
//! Quantities follow the usual transmission conventions: power in MW/MVAr
//! at the interface, impedances and susceptances in per-unit on the system
//! MVA base, bus ids 0-based internally (the file format is 1-based, see
//! [`file`]).

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub mod file;

pub use file::{load_network, load_network_str, serialize_network};

/// Role a bus plays in the load-flow problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    /// Angle reference; absorbs the system power imbalance.
    Slack,
    /// Voltage-controlled generator bus.
    Pv,
    /// Plain load/transit bus with fixed P and Q injection.
    Pq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Nominal voltage magnitude in p.u. (initial guess, not a solve result).
    pub voltage_mag: f64,
    /// Nominal voltage angle in radians.
    pub voltage_ang: f64,
    /// Fixed shunt susceptance at the bus, p.u.
    pub shunt_susceptance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    /// Series resistance, p.u.
    pub resistance: f64,
    /// Series reactance, p.u.
    pub reactance: f64,
    /// Total line charging susceptance, p.u. (split half per end).
    pub charging_susceptance: f64,
    /// Thermal limit used for congestion labeling, MVA.
    pub mva_rating: f64,
    /// Marks the two corridors joining the generation and load regions.
    pub is_tie_line: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergySource {
    Solar,
    Coal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: usize,
    pub source: EnergySource,
    /// Scheduled active output, MW. Overwritten per scenario for solar units.
    pub p_set_mw: f64,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    /// Voltage magnitude held at the bus while the unit is online, p.u.
    pub v_set: f64,
    /// $/MWh, only used to order sources economically.
    pub marginal_cost: f64,
    /// An offline unit injects nothing and stops regulating its bus.
    pub online: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub bus: usize,
    pub p_base_mw: f64,
    pub q_base_mvar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub base_frequency_hz: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Network {
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Index of the (unique, validated) slack bus.
    pub fn slack_bus(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated network has a slack bus")
    }

    /// The online generator controlling `bus`, if any.
    pub fn online_generator_at(&self, bus: usize) -> Option<&Generator> {
        self.generators.iter().find(|g| g.bus == bus && g.online)
    }

    /// Indices of branches flagged as tie-lines.
    pub fn tie_lines(&self) -> Vec<usize> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_tie_line)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks every structural invariant; returns the first violation.
    // Positivity checks are written negated so NaN fails them too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), GridError> {
        let n = self.buses.len();
        let fail = |msg: String| Err(GridError::Invalid(msg));
        if n == 0 {
            return fail("network has no buses".into());
        }
        if !(self.base_mva > 0.0) {
            return fail("base_mva must be positive".into());
        }
        if !(self.base_frequency_hz > 0.0) {
            return fail("base_frequency must be positive".into());
        }
        for (i, b) in self.buses.iter().enumerate() {
            if b.id != i {
                return fail(format!("bus ids must be contiguous; bus {} out of order", b.id));
            }
            if !(b.voltage_mag > 0.0) {
                return fail(format!("bus {}: voltage_mag must be positive", b.id));
            }
        }
        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 {
            return fail(format!("exactly one slack bus required, found {slacks}"));
        }
        for (i, br) in self.branches.iter().enumerate() {
            if br.from_bus >= n || br.to_bus >= n {
                return fail(format!("branch {i}: endpoint out of range"));
            }
            if br.from_bus == br.to_bus {
                return fail(format!("branch {i}: from_bus equals to_bus"));
            }
            if br.resistance == 0.0 && br.reactance == 0.0 {
                return fail(format!(
                    "branch {i} ({}-{}): zero impedance",
                    br.from_bus + 1,
                    br.to_bus + 1
                ));
            }
            if br.resistance < 0.0 {
                return fail(format!("branch {i}: negative resistance"));
            }
            if !(br.mva_rating > 0.0) {
                return fail(format!("branch {i}: mva_rating must be positive"));
            }
            if br.charging_susceptance < 0.0 {
                return fail(format!("branch {i}: negative charging susceptance"));
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.bus >= n {
                return fail(format!("generator {i}: bus out of range"));
            }
            if !(g.p_min_mw <= g.p_set_mw && g.p_set_mw <= g.p_max_mw) {
                return fail(format!(
                    "generator {i}: p_set {} outside [{}, {}]",
                    g.p_set_mw, g.p_min_mw, g.p_max_mw
                ));
            }
            if !(g.v_set > 0.0) {
                return fail(format!("generator {i}: v_set must be positive"));
            }
            let kind = self.buses[g.bus].kind;
            if kind == BusKind::Pq {
                return fail(format!(
                    "generator {i}: bus {} is PQ; generator buses must be slack or PV",
                    g.bus + 1
                ));
            }
            if self.generators.iter().enumerate().any(|(j, o)| j != i && o.bus == g.bus) {
                return fail(format!("bus {}: more than one generator", g.bus + 1));
            }
        }
        for b in &self.buses {
            if b.kind == BusKind::Pv && !self.generators.iter().any(|g| g.bus == b.id) {
                return fail(format!("bus {}: declared PV but hosts no generator", b.id + 1));
            }
            if b.kind == BusKind::Slack && !self.generators.iter().any(|g| g.bus == b.id) {
                return fail(format!("bus {}: slack bus hosts no generator", b.id + 1));
            }
        }
        for (i, l) in self.loads.iter().enumerate() {
            if l.bus >= n {
                return fail(format!("load {i}: bus out of range"));
            }
            if l.p_base_mw < 0.0 {
                return fail(format!("load {i}: negative p_base"));
            }
        }
        let coal_min = self
            .generators
            .iter()
            .filter(|g| g.source == EnergySource::Coal)
            .map(|g| g.marginal_cost)
            .fold(f64::INFINITY, f64::min);
        for g in &self.generators {
            if g.source == EnergySource::Solar && g.marginal_cost >= coal_min {
                return fail(format!(
                    "solar generator at bus {} not cheaper than every coal unit",
                    g.bus + 1
                ));
            }
        }
        if !self.is_connected() {
            return fail("branch graph is not connected".into());
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.buses.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for br in &self.branches {
                let v = if br.from_bus == u {
                    br.to_bus
                } else if br.to_bus == u {
                    br.from_bus
                } else {
                    continue;
                };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Bus admittance matrix of the pi-model network.
///
/// Off-diagonals are the negated series admittance of each branch;
/// diagonals collect incident series admittances plus half the line
/// charging per end plus any bus shunt. With no shunts or charging each
/// row sums to zero.
pub fn admittance_matrix(net: &Network) -> Result<DMatrix<Complex64>, GridError> {
    let n = net.bus_count();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (i, br) in net.branches.iter().enumerate() {
        let z = Complex64::new(br.resistance, br.reactance);
        if z.norm_sqr() == 0.0 {
            return Err(GridError::Invalid(format!("branch {i}: zero impedance")));
        }
        let ys = z.inv();
        let yc = Complex64::new(0.0, br.charging_susceptance / 2.0);
        let (f, t) = (br.from_bus, br.to_bus);
        y[(f, f)] += ys + yc;
        y[(t, t)] += ys + yc;
        y[(f, t)] -= ys;
        y[(t, f)] -= ys;
    }
    for b in &net.buses {
        y[(b.id, b.id)] += Complex64::new(0.0, b.shunt_susceptance);
    }
    Ok(y)
}

/// The 20-bus study network: coal units on buses 1-3 feed eight loads,
/// six of them across two tie-lines in a ring that also hosts the three
/// solar units (buses 12, 15, 18).
///
/// Tie-line ratings are sized so that the grid runs clean at Medium
/// loading with everything online, while High loading with little or no
/// solar infeed overloads a corridor.
pub fn reference_network() -> Network {
    let text = include_str!("../../../../grids/reference20.grid");
    let net = load_network_str(text).expect("reference grid parses");
    net.validate().expect("reference grid validates");
    net
}
