//! Trajectory CSV format.
//!
//! One header row with the canonical coordinate names of the space
//! (`t,q1..qn,v1..vn` for jet-space curves, `t,q1..qn,p1..pn` for
//! restricted-momentum curves, `t,q1..qn,p0,p1..pn` for extended ones), one
//! data row per sample, every value printed with 17 significant digits so
//! the parse round-trips bit-exactly. Lines starting with `#` are comments;
//! an aborted integration ends with an `# aborted ...` trailer.

use std::io::{self, BufRead, Write};

use jetmech_core::mechanics::Trajectory;
use jetmech_core::space::SpaceId;

pub fn write_trajectory(out: &mut impl Write, traj: &Trajectory) -> io::Result<()> {
    writeln!(out, "{}", traj.space().coord_names().join(","))?;
    for sample in traj.samples() {
        let row: Vec<String> = sample.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug)]
pub enum CsvError {
    Io(io::Error),
    Format(String),
}

impl From<io::Error> for CsvError {
    fn from(e: io::Error) -> Self {
        CsvError::Io(e)
    }
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsvError::Io(e) => write!(f, "io error: {e}"),
            CsvError::Format(m) => write!(f, "csv format error: {m}"),
        }
    }
}

impl std::error::Error for CsvError {}

/// Reads a trajectory written by [`write_trajectory`], validating the header
/// against the space's coordinate names. Comment lines are skipped.
pub fn read_trajectory(reader: impl BufRead, space: SpaceId) -> Result<Trajectory, CsvError> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if line.starts_with('#') || line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => return Err(CsvError::Format("missing header".into())),
        }
    };
    let expected = space.coord_names().join(",");
    if header.trim() != expected {
        return Err(CsvError::Format(format!(
            "header '{header}' does not match '{expected}'"
        )));
    }

    let mut samples: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = trimmed.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| CsvError::Format(format!("bad number: {e}")))?;
        if row.len() != space.dim() {
            return Err(CsvError::Format(format!(
                "row has {} fields, expected {}",
                row.len(),
                space.dim()
            )));
        }
        samples.push(row);
    }
    if samples.len() < 2 {
        return Err(CsvError::Format("need at least two samples".into()));
    }
    let t0 = samples[0][0];
    let step = samples[1][0] - t0;
    Trajectory::new(space, t0, step, samples)
        .map_err(|e| CsvError::Format(format!("inconsistent trajectory: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetmech_core::space::SpaceTag;
    use std::io::BufReader;

    #[test]
    fn round_trip_is_bit_exact() {
        let space = SpaceId::new(SpaceTag::VStar, 1);
        let traj = Trajectory::from_fn(space, 0.0, 1e-3, 7, |t| vec![t.sin() / 3.0, t.cos() * 7.0])
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,q1,p1\n"));
        let back = read_trajectory(BufReader::new(buf.as_slice()), space).unwrap();
        assert_eq!(back.samples(), traj.samples());
    }

    #[test]
    fn header_mismatch_is_reported() {
        let text = "t,q1,v1\n0,0,0\n1,1,1\n";
        let err = read_trajectory(
            BufReader::new(text.as_bytes()),
            SpaceId::new(SpaceTag::VStar, 1),
        )
        .unwrap_err();
        assert!(matches!(err, CsvError::Format(_)));
    }

    #[test]
    fn aborted_trailer_is_ignored_by_the_reader() {
        let space = SpaceId::new(SpaceTag::M, 1);
        let text = "t,q1\n0.0e0,1.0e0\n1.0e-1,2.0e0\n# aborted at step 2: singular\n";
        let traj = read_trajectory(BufReader::new(text.as_bytes()), space).unwrap();
        assert_eq!(traj.len(), 2);
    }
}
