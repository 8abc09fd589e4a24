//! Plain-text export helpers shared by the CSV writers.

/// Fixed 17-significant-digit scientific notation.
///
/// The format is stable across runs and platforms, so exported files can
/// be diffed byte for byte.
pub fn fmt_f64(value: f64) -> String {
    if value == 0.0 {
        // Fold -0 into +0 so mirrored data prints identically.
        return format!("{:.16e}", 0.0);
    }
    format!("{value:.16e}")
}

/// Joins already formatted cells into one CSV line (without newline).
pub fn csv_line<I, S>(cells: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = String::new();
    for (i, cell) in cells.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(cell.as_ref());
    }
    line
}
