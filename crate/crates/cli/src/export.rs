//! Path export.

use gchaos_core::BrownianPath;

use crate::report::{Cell, Table};

/// Columns `t, B, qv_realized, sigma`. `sigma` is the volatility of the step
/// starting at `t`, so it is empty on the final row.
pub fn path_table(path: &BrownianPath) -> Table {
    let mut t = Table::new("path", &["t", "B", "qv_realized", "sigma"]);
    let sigma = path.scenario().sigma();
    for (i, time) in path.grid().times().enumerate() {
        t.push(vec![
            Cell::num(time),
            Cell::num(path.values()[i]),
            Cell::num(path.qv_realized()[i]),
            sigma.get(i).map_or(Cell::text(""), |s| Cell::num(*s)),
        ]);
    }
    t
}
