//! Plain-text rendering for `--format table`.

use std::fmt::Write;

use arrsheaf::cech::CohomologyTable;
use arrsheaf::diagnostics::{DiagnosticsReport, KunnethReport};

use crate::{DerivationsOutput, FreenessOutput, LatticeOutput, OracleOutput};

pub trait Table {
    fn table(&self) -> String;
}

/// Rows `n`, columns `d`; `mark` decorates a cell.
fn grid(title: &str, rows: usize, window: [i64; 2], cell: impl Fn(usize, i64) -> String) -> String {
    let degrees: Vec<i64> = (window[0]..=window[1]).collect();
    let cells: Vec<Vec<String>> = (0..rows).map(|n| degrees.iter().map(|&d| cell(n, d)).collect()).collect();
    let width = degrees
        .iter()
        .map(|d| d.to_string().len())
        .chain(cells.iter().flatten().map(String::len))
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    let _ = write!(out, "{title:>6}");
    for d in &degrees {
        let _ = write!(out, " {d:>width$}");
    }
    out.push('\n');
    for (n, row) in cells.iter().enumerate() {
        let _ = write!(out, "{:>6}", format!("H^{n}"));
        for c in row {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
    }
    out
}

fn header(out: &mut String, arrangement: &str, field: &str, ell: usize) {
    let _ = writeln!(out, "arrangement: {arrangement}  field: {field}  ell: {ell}");
}

impl Table for LatticeOutput {
    fn table(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.arrangement, &self.field, self.ell);
        let _ = writeln!(out, "rank counts: {:?}", self.summary.rank_counts);
        let _ = writeln!(out, "characteristic polynomial (low to high): {:?}", self.summary.characteristic_polynomial);
        let _ = writeln!(out, "{:>5} {:>5} {:>7}  members", "index", "codim", "mobius");
        for e in &self.summary.elements {
            let _ = writeln!(out, "{:>5} {:>5} {:>7}  {:?}", e.index, e.codim, e.mobius, e.members);
        }
        out
    }
}

impl Table for DerivationsOutput {
    fn table(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.arrangement, &self.field, self.ell);
        let _ = writeln!(out, "flat {} with hyperplanes {:?}", self.flat, self.members);
        for row in &self.degrees {
            let _ = writeln!(out, "d = {:>3}  dim = {}", row.d, row.dim);
            for theta in row.basis.iter().flatten() {
                let _ = writeln!(out, "    ({})", theta.join(", "));
            }
        }
        out
    }
}

impl Table for CohomologyTable {
    fn table(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.arrangement, &self.field, self.ell);
        let _ = writeln!(
            out,
            "functor: {:?}  cover: {:?}  engine: {:?}  window: {}:{}{}",
            self.functor,
            self.cover,
            self.engine,
            self.window[0],
            self.window[1],
            self.k_max.map(|k| format!("  kmax: {k}")).unwrap_or_default()
        );
        out += &grid("d", self.ell, self.window, |n, d| {
            let e = self.entry(n, d);
            let mark = if e.and_then(|e| e.stable) == Some(false) { "?" } else { "" };
            format!("{}{mark}", e.map_or(0, |e| e.dim))
        });
        out
    }
}

impl Table for OracleOutput {
    fn table(&self) -> String {
        let r = &self.punctured;
        let mut out = String::new();
        header(&mut out, &r.arrangement, &r.field, r.ell);
        let _ = writeln!(out, "module: {:?}  cover: {:?}  window: {}:{}  kmax: {}", r.module, r.cover, r.window[0], r.window[1], r.k_max);
        out += &grid("d", r.ell, r.window, |n, d| {
            let c = r.cell(n, d).expect("cell in window");
            format!("{}{}", c.dim, if c.stable { "" } else { "?" })
        });
        if let Some(pd) = &self.projective_dimension {
            let _ = writeln!(out, "projective dimension: {}{}", pd.value, if pd.lower_bound_only { " (lower bound)" } else { "" });
        }
        out
    }
}

impl Table for FreenessOutput {
    fn table(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.arrangement, &self.field, self.ell);
        let v = &self.verdict;
        let _ = writeln!(out, "free: {}", v.free);
        if let Some(e) = &v.exponents {
            let _ = writeln!(out, "exponents: {e:?}");
        }
        let _ = writeln!(out, "middle cohomology vanishes on {}:{}: {}", v.window[0], v.window[1], v.middle_vanishing);
        if let Some(w) = &v.witness {
            let _ = writeln!(out, "witness: H^{}_{} has dimension {}", w.n, w.d, w.dim);
        }
        let _ = writeln!(out, "factorization: {:?}", self.factorization.status);
        out
    }
}

impl Table for KunnethReport {
    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "window: {}:{}  kmax: {}  cover: {:?}", self.window[0], self.window[1], self.k_max, self.oracle.cover);
        let _ = writeln!(out, "{:>3} {:>4} {:>6} {:>6} {:>9} {:>6} {:>6}", "n", "d", "lhs", "rhs", "relation", "holds", "level");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:>3} {:>4} {:>6} {:>6} {:>9} {:>6} {:>5}{}",
                c.n,
                c.d,
                c.lhs,
                c.rhs,
                format!("{:?}", c.relation),
                c.holds,
                c.oracle_level,
                if c.oracle_stable { " " } else { "?" }
            );
        }
        let _ = writeln!(
            out,
            "compared: {}  mismatches: {}  unstable: {}  top-degree failures: {}",
            self.compared,
            self.mismatches.len(),
            self.unstable.len(),
            self.top_degree_failures.len()
        );
        out
    }
}

impl Table for DiagnosticsReport {
    fn table(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.arrangement, &self.field, self.ell);
        let s = &self.settings;
        let _ = writeln!(
            out,
            "window: {}:{}  lattice cover: {:?}  oracle cover: {:?}  kmax: {}",
            s.window[0], s.window[1], s.cech.cover, s.oracle.cover, s.oracle.k_max
        );
        let f = &self.freeness;
        let exponents = f.exponents.as_ref().map_or("-".to_string(), |e| format!("{e:?}"));
        let _ = writeln!(out, "free: {}  exponents: {exponents}  middle vanishing: {}", f.free, f.middle_vanishing);
        for v in &self.lattice_vanishing {
            match v.first_nonzero_degree {
                Some(d) => writeln!(out, "H^{}(L0, D): {} nonzero cells, lowest degree {d}", v.n, v.nonzero_cells),
                None => writeln!(out, "H^{}(L0, D): zero on the window", v.n),
            }
            .expect("writing to a string");
        }
        let _ = writeln!(out, "pd via lattice: {}", self.pd_via_lattice.value);
        let _ = writeln!(
            out,
            "pd via oracle: {}{}",
            self.pd_via_oracle.value,
            if self.pd_via_oracle.lower_bound_only { " (lower bound)" } else { "" }
        );
        let k = &self.kunneth;
        let _ = writeln!(out, "oracle vs lattice: {} compared, {} mismatches, {} unstable", k.compared, k.mismatches.len(), k.unstable.len());
        let _ = writeln!(out, "factorization: {:?}", self.factorization.status);
        if self.consistency.is_empty() {
            out.push_str("consistent\n");
        }
        for c in &self.consistency {
            let _ = writeln!(out, "INCONSISTENT: {c}");
        }
        out
    }
}
