use ris_scb::pathloss::{table2, table2_csv};

use crate::CliError;

/// Reference minimal RIS sizes for the six exponent and scenario combinations.
pub const GOLDEN: &str = include_str!("../golden/table2.csv");

/// Computes the table and, unless `check` is false, compares it with [`GOLDEN`].
pub fn run(check: bool) -> Result<String, CliError> {
    let csv = table2_csv(&table2());
    if check {
        compare(&csv, GOLDEN)?;
    }
    Ok(csv)
}

fn compare(actual: &str, golden: &str) -> Result<(), CliError> {
    let a: Vec<&str> = actual.lines().collect();
    let g: Vec<&str> = golden.lines().filter(|l| !l.trim().is_empty()).collect();
    if a.len() != g.len() {
        return Err(CliError::Golden(format!("{} rows, expected {}", a.len(), g.len())));
    }
    match a.iter().zip(&g).position(|(x, y)| x.trim() != y.trim()) {
        None => Ok(()),
        Some(i) => Err(CliError::Golden(format!(
            "line {}: got `{}`, expected `{}`",
            i + 1,
            a[i],
            g[i]
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_golden() {
        assert_eq!(run(true).unwrap().trim(), GOLDEN.trim());
    }

    #[test]
    fn mismatch_is_golden_error() {
        let tampered = GOLDEN.replace("1449", "1448");
        let err = compare(&table2_csv(&table2()), &tampered).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("line 2"));
    }
}
