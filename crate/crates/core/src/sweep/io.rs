//! File formats: sweep CSV, dense (t, α²) grid, raw density matrices.
//!
//! Sweep CSV: a schema line `# schema=cavity-esd/sweep-v1`, then the header
//! `gamma_s,alpha2,t_scaled,concurrence,c1,c2,trace_error,min_eigenvalue,path`.
//! Floats carry 17 significant digits; `c1`/`c2` are empty on rows computed
//! with the general concurrence algorithm. `gamma_s` is in units of γ₀.
//!
//! Raw state: plain text, the dimension on the first line, then dimension²
//! lines `re im` in row-major order over the flat basis documented in
//! [`crate::operators`]. Blank lines and `#` comments are ignored.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::dynamics::FullState;
use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;
use crate::sweep::SweepResult;
use crate::C64;

pub const SWEEP_SCHEMA: &str = "cavity-esd/sweep-v1";
pub const GRID_SCHEMA: &str = "cavity-esd/grid-v1";
pub const SWEEP_COLUMNS: [&str; 9] = [
    "gamma_s",
    "alpha2",
    "t_scaled",
    "concurrence",
    "c1",
    "c2",
    "trace_error",
    "min_eigenvalue",
    "path",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# schema={SWEEP_SCHEMA}")?;
    writeln!(out, "{}", SWEEP_COLUMNS.join(","))?;
    for row in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(row.gamma_s),
            num(row.alpha2),
            num(row.t_scaled),
            num(row.concurrence),
            opt(row.c1),
            opt(row.c2),
            num(row.trace_error),
            num(row.min_eigenvalue),
            row.path.as_str()
        )?;
    }
    Ok(())
}

/// Dense surface: one line per `(gamma_s, t)`, one concurrence column per α².
pub fn write_grid<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# schema={GRID_SCHEMA}")?;
    let alphas: Vec<f64> = {
        let mut seen = Vec::new();
        for cell in &result.cells {
            if !seen.iter().any(|a: &f64| a.to_bits() == cell.alpha2.to_bits()) {
                seen.push(cell.alpha2);
            }
        }
        seen
    };
    let header: Vec<String> = alphas.iter().map(|a| format!("alpha2={}", num(*a))).collect();
    writeln!(out, "gamma_s,t_scaled,{}", header.join(","))?;
    let n_alpha = alphas.len();
    for block in result.cells.chunks(n_alpha) {
        let n_t = block[0].n_samples;
        for k in 0..n_t {
            let first = &result.rows[block[0].first_row + k];
            let values: Vec<String> =
                block.iter().map(|cell| num(result.rows[cell.first_row + k].concurrence)).collect();
            writeln!(out, "{},{},{}", num(first.gamma_s), num(first.t_scaled), values.join(","))?;
        }
    }
    Ok(())
}

pub fn save_raw_state<W: Write>(state: &FullState, mut out: W) -> Result<()> {
    let d = state.dim();
    writeln!(out, "{d}")?;
    for i in 0..d {
        for j in 0..d {
            let z = state.rho[(i, j)];
            // shortest round-trip representation
            writeln!(out, "{:e} {:e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn read_raw_state<R: BufRead>(input: R) -> Result<FullState> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#')).unwrap_or(true));
    let (line_no, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let first = first?;
    let dim: usize = first.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("expected dimension, got '{}'", first.trim()),
    })?;
    if dim == 0 || !dim.is_multiple_of(4) {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("dimension {dim} is not 4 * n_fock"),
        });
    }
    let mut flat = Vec::with_capacity(dim * dim);
    for (line_no, line) in lines {
        let line = line?;
        let mut parts = line.split_whitespace();
        let mut field = |name: &str| -> Result<f64> {
            let tok = parts.next().ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("missing {name} part"),
            })?;
            tok.parse().map_err(|_| Error::Parse { line: line_no, msg: format!("bad number '{tok}'") })
        };
        let re = field("real")?;
        let im = field("imaginary")?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: line_no, msg: "expected exactly two numbers".into() });
        }
        if flat.len() == dim * dim {
            return Err(Error::Parse { line: line_no, msg: "more entries than dimension²".into() });
        }
        flat.push(C64::new(re, im));
    }
    if flat.len() != dim * dim {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {} entries, found {}", dim * dim, flat.len()),
        });
    }
    Ok(FullState::new(OperatorMatrix::from_row_slice(dim, dim, &flat), 0.0))
}

/// Reads a raw state file and checks the density-matrix invariants.
pub fn load_raw_state(path: impl AsRef<Path>) -> Result<FullState> {
    let file = std::fs::File::open(path)?;
    let state = read_raw_state(std::io::BufReader::new(file))?;
    state.validate()?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_space;
    use crate::states::{make_initial, InitialStateSpec};
    use proptest::prelude::*;

    fn roundtrip(state: &FullState) -> FullState {
        let mut buf = Vec::new();
        save_raw_state(state, &mut buf).unwrap();
        read_raw_state(&buf[..]).unwrap()
    }

    proptest! {
        #[test]
        fn raw_state_roundtrip(alpha2 in 0.0f64..=1.0, theta in 0.0f64..std::f64::consts::TAU, r in 0.0f64..=1.0) {
            let s = build_space(3).unwrap();
            let st = make_initial(&InitialStateSpec::werner(alpha2, theta, r), &s).unwrap();
            let back = roundtrip(&st);
            prop_assert_eq!(back.rho, st.rho);
        }
    }

    #[test]
    fn rejects_bad_trace() {
        let s = build_space(3).unwrap();
        let mut st = make_initial(&InitialStateSpec::psi(0.3, 0.0), &s).unwrap();
        st.rho *= C64::new(0.9, 0.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        save_raw_state(&st, std::fs::File::create(&path).unwrap()).unwrap();
        match load_raw_state(&path) {
            Err(Error::InvalidTrace(t)) => assert!((t - 0.9).abs() < 1e-12),
            other => panic!("expected trace error, got {other:?}"),
        }
    }

    #[test]
    fn accepts_valid_file() {
        let s = build_space(3).unwrap();
        let st = make_initial(&InitialStateSpec::werner(0.4, 1.0, 0.7), &s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ok.txt");
        save_raw_state(&st, std::fs::File::create(&path).unwrap()).unwrap();
        let back = load_raw_state(&path).unwrap();
        assert_eq!(back.dim(), 12);
    }

    #[test]
    fn malformed_files() {
        for text in ["", "abc\n", "3\n", "4\n1 0\n", "4\n1 0 0\n", "4\nx 0\n"] {
            assert!(read_raw_state(text.as_bytes()).is_err(), "{text:?}");
        }
        let mut text = String::from("# comment\n4\n");
        for i in 0..16 {
            text.push_str(if i % 5 == 0 { "0.25 0\n" } else { "0 0\n" });
        }
        let st = read_raw_state(text.as_bytes()).unwrap();
        st.validate().unwrap();
        text.push_str("0 0\n");
        assert!(read_raw_state(text.as_bytes()).is_err());
    }
}
