//! On-disk formats: per-step trace CSV and the binary fixed-point state.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64`. Fixed-point traces additionally carry the exact integer
//! quadratic forms, so they are byte-identical on every platform.
//!
//! Fixed-point state layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "LQDSTATE"
//! 8       4     format version (u32, currently 1)
//! 12      4     scale exponent s (u32)
//! 16      4     coefficient exponent p (u32)
//! 20      4     reserved, zero
//! 24      8     step counter l (i64)
//! 32      8     site count M (u64)
//! 40      8M    R_{2l}      (i64 each)
//!         8M    I_{2l+1}    (i64 each)
//!         8M    I_{2l−1}    (i64 each)
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::lattice::FixedPointField;
use crate::reversible::{EvolutionTrace, FixedState};

pub const STATE_MAGIC: &[u8; 8] = b"LQDSTATE";
pub const STATE_VERSION: u32 = 1;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `l,P_l,invariant` rows. Fixed-point traces add
/// `P_raw,invariant_raw,raw_scale_exp`; traces with snapshots add a
/// `snapshot` column holding the snapshot's ordinal (empty when absent).
pub fn write_trace_csv<W: Write>(trace: &EvolutionTrace, mut out: W) -> Result<()> {
    let records = trace.records();
    let exact = records.iter().any(|r| r.exact.is_some());
    let snapshots = records.iter().any(|r| r.snapshot.is_some());
    let mut header = String::from("l,P_l,invariant");
    if exact {
        header.push_str(",P_raw,invariant_raw,raw_scale_exp");
    }
    if snapshots {
        header.push_str(",snapshot");
    }
    writeln!(out, "{header}")?;
    let mut ordinal = 0usize;
    for r in records {
        let mut line = format!("{},{},{}", r.l, fmt_f64(r.probability), fmt_f64(r.invariant));
        if exact {
            match r.exact {
                Some(q) => line.push_str(&format!(",{},{},{}", q.probability, q.invariant, q.scale_exp)),
                None => line.push_str(",,,"),
            }
        }
        if snapshots {
            line.push(',');
            if r.snapshot.is_some() {
                line.push_str(&ordinal.to_string());
                ordinal += 1;
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Writes snapshots as `snapshot,l,site,r_even,i_odd` rows.
pub fn write_snapshots_csv<W: Write>(trace: &EvolutionTrace, mut out: W) -> Result<()> {
    writeln!(out, "snapshot,l,site,r_even,i_odd")?;
    for (k, r) in trace.records().iter().filter(|r| r.snapshot.is_some()).enumerate() {
        let snap = r.snapshot.as_ref().expect("filtered");
        for (m, (re, im)) in snap.r_even.iter().zip(&snap.i_odd).enumerate() {
            writeln!(out, "{k},{},{m},{},{}", r.l, fmt_f64(*re), fmt_f64(*im))?;
        }
    }
    Ok(())
}

/// Serializes a fixed-point state with the coefficient exponent of its kernel.
pub fn write_fixed_state<W: Write>(state: &FixedState, coef_exp: u32, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(40 + 24 * state.sites());
    buf.extend_from_slice(STATE_MAGIC);
    buf.extend_from_slice(&STATE_VERSION.to_le_bytes());
    buf.extend_from_slice(&state.r_even().scale_exp.to_le_bytes());
    buf.extend_from_slice(&coef_exp.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&state.step_count().to_le_bytes());
    buf.extend_from_slice(&(state.sites() as u64).to_le_bytes());
    for field in [state.r_even(), state.i_odd(), state.i_prev()] {
        for v in &field.ints {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated state file".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

/// Reads a state written by [`write_fixed_state`]; returns it with its
/// coefficient exponent.
pub fn read_fixed_state<R: Read>(mut input: R) -> Result<(FixedState, u32)> {
    let magic: [u8; 8] = read_array(&mut input)?;
    if &magic != STATE_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != STATE_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let scale_exp = u32::from_le_bytes(read_array(&mut input)?);
    let coef_exp = u32::from_le_bytes(read_array(&mut input)?);
    let _reserved = u32::from_le_bytes(read_array(&mut input)?);
    let l = i64::from_le_bytes(read_array(&mut input)?);
    let sites = u64::from_le_bytes(read_array(&mut input)?);
    let sites = usize::try_from(sites).map_err(|_| Error::Format(format!("site count {sites} too large")))?;
    let mut read_field = || -> Result<FixedPointField> {
        let ints = (0..sites)
            .map(|_| Ok(i64::from_le_bytes(read_array(&mut input)?)))
            .collect::<Result<_>>()?;
        FixedPointField::new(ints, scale_exp).map_err(|e| Error::Format(e.to_string()))
    };
    let r_even = read_field()?;
    let i_odd = read_field()?;
    let i_prev = read_field()?;
    if input.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after state".into()));
    }
    Ok((FixedState::from_parts(r_even, i_odd, i_prev, l)?, coef_exp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeConfig, PotentialProfile};
    use crate::reversible::{evolve, FixedKernel, StaggeredState, TraceOptions};

    fn small_state() -> FixedState {
        let config = LatticeConfig::with_epsilon(4, 1.0, 0.2).unwrap();
        let kernel = FixedKernel::new(&config, &PotentialProfile::zeros(4), 20).unwrap();
        StaggeredState::from_history(
            FixedPointField::new(vec![1 << 20, -(1 << 19), 7, 0], 20).unwrap(),
            FixedPointField::zeros(4, 20).unwrap(),
            &kernel,
        )
        .unwrap()
    }

    #[test]
    fn state_roundtrip() {
        let state = small_state();
        let mut bytes = Vec::new();
        write_fixed_state(&state, 20, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 40 + 3 * 4 * 8);
        assert_eq!(&bytes[..8], STATE_MAGIC);
        let (back, p) = read_fixed_state(bytes.as_slice()).unwrap();
        assert_eq!(back, state);
        assert_eq!(p, 20);
    }

    #[test]
    fn state_rejects_corruption() {
        let mut bytes = Vec::new();
        write_fixed_state(&small_state(), 20, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_fixed_state(bad.as_slice()), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[8] = 2;
        assert!(matches!(read_fixed_state(bad.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_fixed_state(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(read_fixed_state(long.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn trace_csv_layout() {
        let config = LatticeConfig::with_epsilon(4, 1.0, 0.2).unwrap();
        let kernel = FixedKernel::new(&config, &PotentialProfile::zeros(4), 20).unwrap();
        let opts = TraceOptions {
            record_every: 1,
            snapshot_every: Some(2),
        };
        let (_, trace) = evolve(&small_state(), &kernel, 2, &opts).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&trace, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "l,P_l,invariant,P_raw,invariant_raw,raw_scale_exp,snapshot");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[1].ends_with(",40,0"));
        assert!(lines[2].ends_with(",40,"));
        assert!(lines[3].ends_with(",40,1"));

        let mut snaps = Vec::new();
        write_snapshots_csv(&trace, &mut snaps).unwrap();
        assert_eq!(String::from_utf8(snaps).unwrap().lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0).parse::<f64>().unwrap(), 1.0);
    }
}
