//! Trajectory CSV: header `t,y_out,y_mid`, one row per sample.

use std::io::{self, Write};

use ltv_commute::sim::Trajectory;

pub const HEADER: &str = "t,y_out,y_mid";

/// Writes `tr` with 16 significant digits per value.
pub fn write_trajectory<W: Write>(out: &mut W, tr: &Trajectory) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for s in &tr.samples {
        writeln!(out, "{:.15e},{:.15e},{:.15e}", s.t, s.y_out, s.y_mid)?;
    }
    Ok(())
}

pub fn to_string(tr: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, tr).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses a trajectory CSV back into `(t, y_out, y_mid)` rows.
pub fn read_rows(text: &str) -> Result<Vec<[f64; 3]>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(HEADER) => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut row = [0.0; 3];
            let mut fields = line.split(',');
            for cell in row.iter_mut() {
                let f = fields.next().ok_or_else(|| format!("row {}: too few fields", i + 2))?;
                *cell = f.parse().map_err(|_| format!("row {}: bad number `{f}`", i + 2))?;
            }
            if fields.next().is_some() {
                return Err(format!("row {}: too many fields", i + 2));
            }
            Ok(row)
        })
        .collect()
}
