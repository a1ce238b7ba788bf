//! Plain-text grid file format.
//!
//! Line oriented, five sections. `#` starts a comment, blank lines are
//! ignored, fields are comma separated in the order of the struct
//! definitions, and bus ids are 1-based in the file (0-based in memory):
//!
//! ```text
//! [meta]
//! # base_mva, base_frequency_hz
//! 100, 50
//!
//! [buses]
//! # id, kind, voltage_mag, voltage_ang, shunt_susceptance
//! 1, slack, 1.02, 0, 0
//!
//! [branches]
//! # from, to, resistance, reactance, charging_susceptance, mva_rating, is_tie_line
//! 1, 2, 0.02, 0.08, 0.02, 300, 0
//!
//! [generators]
//! # bus, source, p_set_mw, p_min_mw, p_max_mw, v_set, marginal_cost, online
//! 1, coal, 80, 20, 260, 1.02, 24, 1
//!
//! [loads]
//! # bus, p_base_mw, q_base_mvar
//! 2, 30, 9
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Branch, Bus, BusKind, EnergySource, Generator, GridError, Load, Network};

/// Reads and validates a network from a grid file on disk.
pub fn load_network(path: &Path) -> Result<Network, GridError> {
    let text = std::fs::read_to_string(path)?;
    let net = load_network_str(&text)?;
    net.validate()?;
    Ok(net)
}

/// Parses a network from grid-file text. Does not validate; callers that
/// accept untrusted input should run [`Network::validate`] afterwards.
pub fn load_network_str(text: &str) -> Result<Network, GridError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Meta,
        Buses,
        Branches,
        Generators,
        Loads,
    }

    let err = |line: usize, msg: String| GridError::Parse { line, msg };
    let mut section = Section::None;
    let mut meta: Option<(f64, f64)> = None;
    let mut buses = Vec::new();
    let mut branches = Vec::new();
    let mut generators = Vec::new();
    let mut loads = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name {
                "meta" => Section::Meta,
                "buses" => Section::Buses,
                "branches" => Section::Branches,
                "generators" => Section::Generators,
                "loads" => Section::Loads,
                other => return Err(err(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let want = |n: usize| -> Result<(), GridError> {
            if fields.len() == n {
                Ok(())
            } else {
                Err(err(line_no, format!("expected {n} fields, got {}", fields.len())))
            }
        };
        let num = |s: &str| -> Result<f64, GridError> {
            s.parse::<f64>().map_err(|_| err(line_no, format!("bad number {s:?}")))
        };
        let bus_ref = |s: &str| -> Result<usize, GridError> {
            let id: usize =
                s.parse().map_err(|_| err(line_no, format!("bad bus id {s:?}")))?;
            if id == 0 {
                return Err(err(line_no, "bus ids are 1-based".into()));
            }
            Ok(id - 1)
        };
        let flag = |s: &str| -> Result<bool, GridError> {
            match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(err(line_no, format!("expected 0 or 1, got {s:?}"))),
            }
        };
        match section {
            Section::None => {
                return Err(err(line_no, "data before first section header".into()));
            }
            Section::Meta => {
                want(2)?;
                meta = Some((num(fields[0])?, num(fields[1])?));
            }
            Section::Buses => {
                want(5)?;
                let kind = match fields[1] {
                    "slack" => BusKind::Slack,
                    "pv" => BusKind::Pv,
                    "pq" => BusKind::Pq,
                    other => return Err(err(line_no, format!("unknown bus kind {other:?}"))),
                };
                buses.push(Bus {
                    id: bus_ref(fields[0])?,
                    kind,
                    voltage_mag: num(fields[2])?,
                    voltage_ang: num(fields[3])?,
                    shunt_susceptance: num(fields[4])?,
                });
            }
            Section::Branches => {
                want(7)?;
                branches.push(Branch {
                    from_bus: bus_ref(fields[0])?,
                    to_bus: bus_ref(fields[1])?,
                    resistance: num(fields[2])?,
                    reactance: num(fields[3])?,
                    charging_susceptance: num(fields[4])?,
                    mva_rating: num(fields[5])?,
                    is_tie_line: flag(fields[6])?,
                });
            }
            Section::Generators => {
                want(8)?;
                let source = match fields[1] {
                    "solar" => EnergySource::Solar,
                    "coal" => EnergySource::Coal,
                    other => return Err(err(line_no, format!("unknown source {other:?}"))),
                };
                generators.push(Generator {
                    bus: bus_ref(fields[0])?,
                    source,
                    p_set_mw: num(fields[2])?,
                    p_min_mw: num(fields[3])?,
                    p_max_mw: num(fields[4])?,
                    v_set: num(fields[5])?,
                    marginal_cost: num(fields[6])?,
                    online: flag(fields[7])?,
                });
            }
            Section::Loads => {
                want(3)?;
                loads.push(Load {
                    bus: bus_ref(fields[0])?,
                    p_base_mw: num(fields[1])?,
                    q_base_mvar: num(fields[2])?,
                });
            }
        }
    }

    let (base_mva, base_frequency_hz) =
        meta.ok_or_else(|| err(text.lines().count(), "missing [meta] section".into()))?;
    buses.sort_by_key(|b| b.id);
    Ok(Network {
        base_mva,
        base_frequency_hz,
        buses,
        branches,
        generators,
        loads,
    })
}

/// Canonical text form of a network; `load_network_str` inverts it exactly.
pub fn serialize_network(net: &Network) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[meta]");
    let _ = writeln!(s, "# base_mva, base_frequency_hz");
    let _ = writeln!(s, "{}, {}", net.base_mva, net.base_frequency_hz);
    let _ = writeln!(s, "\n[buses]");
    let _ = writeln!(s, "# id, kind, voltage_mag, voltage_ang, shunt_susceptance");
    for b in &net.buses {
        let kind = match b.kind {
            BusKind::Slack => "slack",
            BusKind::Pv => "pv",
            BusKind::Pq => "pq",
        };
        let _ = writeln!(
            s,
            "{}, {}, {}, {}, {}",
            b.id + 1,
            kind,
            b.voltage_mag,
            b.voltage_ang,
            b.shunt_susceptance
        );
    }
    let _ = writeln!(s, "\n[branches]");
    let _ = writeln!(
        s,
        "# from, to, resistance, reactance, charging_susceptance, mva_rating, is_tie_line"
    );
    for br in &net.branches {
        let _ = writeln!(
            s,
            "{}, {}, {}, {}, {}, {}, {}",
            br.from_bus + 1,
            br.to_bus + 1,
            br.resistance,
            br.reactance,
            br.charging_susceptance,
            br.mva_rating,
            br.is_tie_line as u8
        );
    }
    let _ = writeln!(s, "\n[generators]");
    let _ = writeln!(
        s,
        "# bus, source, p_set_mw, p_min_mw, p_max_mw, v_set, marginal_cost, online"
    );
    for g in &net.generators {
        let source = match g.source {
            EnergySource::Solar => "solar",
            EnergySource::Coal => "coal",
        };
        let _ = writeln!(
            s,
            "{}, {}, {}, {}, {}, {}, {}, {}",
            g.bus + 1,
            source,
            g.p_set_mw,
            g.p_min_mw,
            g.p_max_mw,
            g.v_set,
            g.marginal_cost,
            g.online as u8
        );
    }
    let _ = writeln!(s, "\n[loads]");
    let _ = writeln!(s, "# bus, p_base_mw, q_base_mvar");
    for l in &net.loads {
        let _ = writeln!(s, "{}, {}, {}", l.bus + 1, l.p_base_mw, l.q_base_mvar);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::reference_network;
    use proptest::prelude::*;

    #[test]
    fn round_trip_is_identity_on_reference() {
        let net = reference_network();
        let text = serialize_network(&net);
        let back = load_network_str(&text).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn checked_in_reference_file_is_canonical() {
        // Regenerating the file from the parsed network must not change a
        // byte, so the file and `reference_network()` cannot drift apart.
        let text = include_str!("../../../../grids/reference20.grid");
        let net = load_network_str(text).unwrap();
        assert_eq!(serialize_network(&net), text);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "[buses]\n1, slack, 1.0, 0, 0\n2, pq, oops, 0, 0\n";
        match load_network_str(text) {
            Err(GridError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(load_network_str("[nonsense]\n1\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "\n# leading comment\n[meta]\n100, 50  # trailing\n\n[buses]\n1, slack, 1, 0, 0\n";
        let net = load_network_str(text).unwrap();
        assert_eq!(net.base_mva, 100.0);
        assert_eq!(net.buses.len(), 1);
    }

    proptest! {
        #[test]
        fn round_trip_arbitrary_two_bus(r in 0.0f64..0.1, x in 0.01f64..0.5,
                                        p in 0.0f64..100.0, q in -30.0f64..30.0) {
            let mut net = crate::grid::tests::two_bus(r, x);
            net.loads.push(crate::grid::Load { bus: 1, p_base_mw: p, q_base_mvar: q });
            let back = load_network_str(&serialize_network(&net)).unwrap();
            prop_assert_eq!(net, back);
        }
    }
}
