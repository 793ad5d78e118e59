//! Exact symmetry checks on small lattices: strong/weak symmetry of the
//! initial state, the channel and the maximally decohered state, the
//! order/disorder table, and the XZ-loop SSB parameters.

use serde::{Deserialize, Serialize};

use crate::channel::{apply_maximal, pattern_kraus, DecoherencePattern};
use crate::error::Result;
use crate::lattice::{Direction, InitialState, LinkShift, Plaquette, TorusLattice, Vertex};
use crate::observables::{
    ci_by_loop, cii_by_string_direct, default_probes, is_channel_strong_symmetric,
    is_channel_weak_symmetric, is_strong_symmetric, is_weak_symmetric, symmetry_diagnostics,
};
use crate::stabilizer::Membership;

/// One binary check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub expected: bool,
    pub actual: bool,
    pub pass: bool,
}

/// Quantities reported but not checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoItem {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub lx: usize,
    pub ly: usize,
    pub shift: LinkShift,
    pub cells: Vec<Cell>,
    pub info: Vec<InfoItem>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.pass)
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.name == name)
    }

    fn check(&mut self, name: &str, expected: bool, actual: bool) {
        self.cells.push(Cell {
            name: name.to_string(),
            expected,
            actual,
            pass: expected == actual,
        });
    }

    fn note(&mut self, name: &str, value: impl ToString) {
        self.info.push(InfoItem {
            name: name.to_string(),
            value: value.to_string(),
        });
    }
}

/// Runs every check on `lattice` (6×6 is the reference size). The lattice
/// needs `Lx, Ly ≥ 5` for the probe loops and strings.
pub fn validate(lattice: &TorusLattice) -> Result<ValidationReport> {
    let mut report = ValidationReport {
        lx: lattice.lx(),
        ly: lattice.ly(),
        shift: lattice.shift(),
        cells: Vec::new(),
        info: Vec::new(),
    };

    let rho_tc = lattice.build_initial_state(InitialState::Pure);
    let mut rho_f = rho_tc.clone();
    apply_maximal(lattice, &mut rho_f)?;
    let kraus = pattern_kraus(lattice, &DecoherencePattern::full(lattice))?;

    let zx = lattice.zx_loop(&lattice.square_vertices(Vertex::new(1, 1), 2))?;
    report.check(
        "table1.rho_tc.strong",
        true,
        is_strong_symmetric(&rho_tc, &zx)?,
    );
    report.check("table1.rho_tc.weak", true, is_weak_symmetric(&rho_tc, &zx)?);
    report.check(
        "table1.channel.strong",
        false,
        is_channel_strong_symmetric(&kraus, &zx)?,
    );
    report.check(
        "table1.channel.weak",
        true,
        is_channel_weak_symmetric(&kraus, &zx)?,
    );
    report.check(
        "table1.rho_d.strong",
        false,
        is_strong_symmetric(&rho_f, &zx)?,
    );
    report.check("table1.rho_d.weak", true, is_weak_symmetric(&rho_f, &zx)?);

    let ci_tc = ci_by_loop(lattice, &rho_tc)?;
    let cii_tc = cii_by_string_direct(lattice, &rho_tc)?;
    let ci_f = ci_by_loop(lattice, &rho_f)?;
    let cii_f = cii_by_string_direct(lattice, &rho_f)?;
    let all = |v: &[bool]| v.iter().all(|&b| b);
    let none = |v: &[bool]| v.iter().all(|&b| !b);
    report.check("table2.rho_tc.c_i", true, all(&ci_tc));
    report.check("table2.rho_tc.c_ii", false, !none(&cii_tc));
    report.check("table2.rho_tc.weak_ssb", true, all(&ci_tc) && none(&cii_tc));
    report.check("table2.rho_d.c_i", false, !none(&ci_f));
    report.check("table2.rho_d.c_ii", true, all(&cii_f));
    report.check(
        "table2.rho_d.weak_symmetric",
        true,
        none(&ci_f) && all(&cii_f),
    );

    let (wilson, thooft, xz_open) = default_probes(lattice)?;
    for (label, probe) in [("wilson", &wilson), ("thooft", &thooft)] {
        let f = symmetry_diagnostics(&rho_f, probe, &xz_open)?;
        let tc = symmetry_diagnostics(&rho_tc, probe, &xz_open)?;
        report.check(&format!("appb.rho_f.{label}.o2"), true, f.o2);
        report.check(&format!("appb.rho_f.{label}.d1"), false, f.d1);
        report.check(&format!("appb.rho_f.{label}.o1"), false, f.o1);
        report.check(&format!("appb.rho_f.{label}.d2"), false, f.d2);
        report.check(&format!("appb.rho_tc.{label}.o1"), true, tc.o1);
        report.check(&format!("appb.rho_tc.{label}.d2"), false, tc.d2);
        report.check(&format!("appb.rho_tc.{label}.o2"), true, tc.o2);
        report.check(&format!("appb.rho_tc.{label}.d1"), false, tc.d1);
    }

    let xz = lattice.xz_loop(&lattice.dual_square_plaquettes(Plaquette::new(1, 1), 2))?;
    report.check(
        "appb.xz_loop.channel.strong",
        true,
        is_channel_strong_symmetric(&kraus, &xz)?,
    );
    report.check(
        "appb.xz_loop.rho_f.strong",
        true,
        rho_f.contains(&xz)? == Membership::PlusMember,
    );
    report.check(
        "appb.xz_loop.rho_tc.strong",
        true,
        rho_tc.contains(&xz)? == Membership::PlusMember,
    );

    for (label, dir) in [("x", Direction::X), ("y", Direction::Y)] {
        let w = lattice.xz_string(&lattice.logical_loop(dir))?;
        let w_nc = rho_f.contains(&w)?;
        report.note(
            &format!("xz_noncontractible_{label}.rho_f"),
            format!("{w_nc:?}"),
        );
        report.note(
            &format!("xz_noncontractible_{label}.channel_strong"),
            is_channel_strong_symmetric(&kraus, &w)?,
        );
    }
    report.note("rho_f.k", rho_f.k());
    report.note("rho_f.logical_dead", format!("{:?}", rho_f.logical_dead()?));
    Ok(report)
}

/// The standard 6×6 run.
pub fn validate_default() -> Result<ValidationReport> {
    validate(&TorusLattice::new(6, 6)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_cell_passes_on_6x6() {
        let report = validate_default().unwrap();
        let failing: Vec<_> = report.failing().map(|c| c.name.clone()).collect();
        assert!(failing.is_empty(), "failing cells: {failing:?}");
    }

    #[test]
    fn corrupted_shift_fails_channel_cell() {
        let lat = TorusLattice::new(6, 6)
            .unwrap()
            .with_shift(LinkShift::Identity);
        let report = validate(&lat).unwrap();
        assert!(!report.passed());
        assert!(!report.cell("table1.channel.strong").unwrap().pass);
    }
}
