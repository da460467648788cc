use std::io::{Read, Write};

use super::matrix::{check_ssd_inequalities, classify_matrix, CellEstimate, EmpiricalPayoffMatrix};
use super::EgtaError;

pub const REPORT_HEADER: &str = "cell,mean,se,n";

/// Four CSV rows (R, P, S, T) and a `#` summary line.
pub fn write_payoff_report<W: Write>(
    m: &EmpiricalPayoffMatrix,
    budget_exhausted: bool,
    mut out: W,
) -> Result<(), EgtaError> {
    writeln!(out, "{REPORT_HEADER}")?;
    for (name, c) in m.cells() {
        writeln!(out, "{name},{},{},{}", c.mean, c.se, c.n)?;
    }
    writeln!(out, "{}", summary_line(m, budget_exhausted))?;
    Ok(())
}

pub fn summary_line(m: &EmpiricalPayoffMatrix, budget_exhausted: bool) -> String {
    let v = check_ssd_inequalities(m);
    let verdicts: Vec<String> = v
        .conditions
        .iter()
        .enumerate()
        .map(|(i, &ok)| format!("c{}={}", i + 1, if ok { "pass" } else { "fail" }))
        .collect();
    format!(
        "# fear={} greed={} class={} {} budget_exhausted={}",
        m.fear(),
        m.greed(),
        classify_matrix(m),
        verdicts.join(" "),
        budget_exhausted
    )
}

/// Reads the cell rows back; the summary line is ignored since it is a
/// function of the cells.
pub fn read_payoff_report<R: Read>(input: R) -> Result<EmpiricalPayoffMatrix, EgtaError> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    if lines.next().map(str::trim) != Some(REPORT_HEADER) {
        return Err(EgtaError::Report(format!("expected header {REPORT_HEADER:?}")));
    }
    let mut cells: [Option<CellEstimate>; 4] = [None; 4];
    for line in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(EgtaError::Report(format!("bad row {line:?}")));
        }
        let bad = || EgtaError::Report(format!("bad row {line:?}"));
        let c = CellEstimate {
            mean: f[1].parse().map_err(|_| bad())?,
            se: f[2].parse().map_err(|_| bad())?,
            n: f[3].parse().map_err(|_| bad())?,
        };
        let slot = match f[0] {
            "R" => 0,
            "P" => 1,
            "S" => 2,
            "T" => 3,
            _ => return Err(bad()),
        };
        if cells[slot].replace(c).is_some() {
            return Err(EgtaError::Report(format!("duplicate cell {}", f[0])));
        }
    }
    match cells {
        [Some(r), Some(p), Some(s), Some(t)] => Ok(EmpiricalPayoffMatrix { r, p, s, t }),
        _ => Err(EgtaError::Report("report needs all of R, P, S, T".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip() {
        let mut m = EmpiricalPayoffMatrix::exact(3.0, 1.0, 0.0, 4.0);
        m.r.se = 0.25;
        m.r.n = 12;
        let mut buf = Vec::new();
        write_payoff_report(&m, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with(
            "# fear=1 greed=1 class=PrisonersDilemma c1=pass c2=pass c3=pass c4=pass budget_exhausted=false\n"
        ));
        assert_eq!(read_payoff_report(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn incomplete_report_is_rejected() {
        assert!(read_payoff_report("cell,mean,se,n\nR,1,0,1\n".as_bytes()).is_err());
        assert!(read_payoff_report("x,y\n".as_bytes()).is_err());
    }
}
