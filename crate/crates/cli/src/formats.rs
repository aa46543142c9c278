//! On-disk formats: the binary count-table container, its audit extension,
//! CSV emission with fixed 12-significant-digit floats, and LEB128 varints.
//!
//! Layouts are documented byte-for-byte in docs/formats.md. Everything here
//! is deterministic: same content in, same bytes out.

use std::io::{self, Read, Write};

use waring_core::arith::{RepParams, RepTable};
use waring_core::audit::{AuditRow, AuditTable};

pub const MAGIC: &[u8; 4] = b"WLRT";
pub const VERSION_REPS: u64 = 1;
pub const VERSION_AUDIT: u64 = 2;

/// Unsigned LEB128.
pub fn write_varint(out: &mut impl Write, mut v: u128) -> io::Result<()> {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.write_all(&[byte])?;
            return Ok(());
        }
        out.write_all(&[byte | 0x80])?;
    }
}

pub fn read_varint(input: &mut impl Read) -> io::Result<u128> {
    let mut v: u128 = 0;
    let mut shift = 0u32;
    loop {
        let mut byte = [0u8; 1];
        input.read_exact(&mut byte)?;
        if shift >= 128 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "varint exceeds 128 bits",
            ));
        }
        v |= u128::from(byte[0] & 0x7f) << shift;
        if byte[0] & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

fn write_header(out: &mut impl Write, version: u64, params: &RepParams) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&version.to_le_bytes())?;
    out.write_all(&u64::from(params.s).to_le_bytes())?;
    out.write_all(&u64::from(params.k).to_le_bytes())?;
    out.write_all(&params.limit.to_le_bytes())?;
    Ok(())
}

fn read_u64(input: &mut impl Read) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(input: &mut impl Read) -> io::Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_header(input: &mut impl Read, expect_version: u64) -> anyhow::Result<RepParams> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    anyhow::ensure!(&magic == MAGIC, "bad magic {magic:?}");
    let version = read_u64(input)?;
    anyhow::ensure!(
        version == expect_version,
        "unsupported version {version}, expected {expect_version}"
    );
    let s = read_u64(input)?;
    let k = read_u64(input)?;
    let limit = read_u64(input)?;
    Ok(RepParams::new(s as u32, k as u32, limit)?)
}

/// Count table: header then N varint counts for n = 1..=N.
pub fn write_rep_table(out: &mut impl Write, table: &RepTable) -> io::Result<()> {
    write_header(out, VERSION_REPS, &table.params)?;
    for n in 1..=table.params.limit {
        write_varint(out, table.count(n))?;
    }
    Ok(())
}

pub fn read_rep_table(input: &mut impl Read) -> anyhow::Result<RepTable> {
    let params = read_header(input, VERSION_REPS)?;
    let mut counts = vec![0u128; params.limit as usize + 1];
    for n in 1..=params.limit {
        counts[n as usize] = read_varint(input)?;
    }
    Ok(RepTable::from_raw(params, counts)?)
}

/// Audit table: the count-table layout extended per row with
/// (series, mainTerm, E) as binary64, plus the series truncation in the
/// header after N.
pub fn write_audit_table(out: &mut impl Write, audit: &AuditTable) -> io::Result<()> {
    write_header(out, VERSION_AUDIT, &audit.params)?;
    out.write_all(&audit.series_q.to_le_bytes())?;
    for row in audit.rows() {
        write_varint(out, row.count)?;
        out.write_all(&row.series.to_le_bytes())?;
        out.write_all(&row.main_term.to_le_bytes())?;
        out.write_all(&row.error.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the audit extension back. Per-row truncation bands are not
/// persisted (they are derivable diagnostics); reloaded rows carry a zero
/// band and the table's fitted tail slope is absent.
pub fn read_audit_table(input: &mut impl Read) -> anyhow::Result<AuditTable> {
    let params = read_header(input, VERSION_AUDIT)?;
    let series_q = read_u64(input)?;
    let mut rows = Vec::with_capacity(params.limit as usize);
    for n in 1..=params.limit {
        let count = read_varint(input)?;
        let series = read_f64(input)?;
        let main_term = read_f64(input)?;
        let error = read_f64(input)?;
        rows.push(AuditRow {
            n,
            count,
            series,
            main_term,
            error,
            tail_main: 0.0,
        });
    }
    Ok(AuditTable::from_rows(params, series_q, None, rows)?)
}

/// Fixed 12-significant-digit float formatting: fixed point when the
/// magnitude allows it, scientific otherwise. Deterministic for any finite
/// input; the output is what every CSV and text report prints.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// A CSV writer with LF endings and a fixed header row.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
