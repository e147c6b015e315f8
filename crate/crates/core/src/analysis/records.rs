use crate::error::{Error, Result};
use std::io::{Read, Write};

/// Settled lock-in outputs at one set point (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemodRecord {
    pub run_id: usize,
    pub t_unix: f64,
    pub d_pz: f64,
    pub v_ac: f64,
    pub v_dc: f64,
    pub s0: f64,
    pub s_w1: f64,
    pub s_2w1: f64,
    pub s_4w1: f64,
    pub s_w2_i: f64,
    pub s_w2_q: f64,
    /// Output noise of the AC channels (σ of I or Q).
    pub noise_ac: f64,
    /// Output noise of the DC channel.
    pub noise_dc: f64,
}

const RECORD_HEADER: [&str; 11] =
    ["run_id", "t_unix", "d_pz_nm", "V_AC_V", "V_DC_V", "S0_V", "S_w1_V", "S_2w1_V", "S_4w1_V", "S_w2I_V", "S_w2Q_V"];

pub fn write_records<W: Write>(w: W, records: &[DemodRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RECORD_HEADER)?;
    for r in records {
        wr.write_record(&[
            r.run_id.to_string(),
            format!("{:.3}", r.t_unix),
            format!("{:.6}", r.d_pz * 1e9),
            format!("{:.9e}", r.v_ac),
            format!("{:.9e}", r.v_dc),
            format!("{:.9e}", r.s0),
            format!("{:.9e}", r.s_w1),
            format!("{:.9e}", r.s_2w1),
            format!("{:.9e}", r.s_4w1),
            format!("{:.9e}", r.s_w2_i),
            format!("{:.9e}", r.s_w2_q),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let s = rec.get(i).ok_or_else(|| Error::Parse { line, msg: format!("missing column {}", RECORD_HEADER[i]) })?;
    s.trim().parse().map_err(|_| Error::Parse { line, msg: format!("bad value '{s}'") })
}

/// Reads a record CSV; the channel noise is not part of the file and is supplied by the caller.
pub fn read_records<R: Read>(r: R, noise_ac: f64, noise_dc: f64) -> Result<Vec<DemodRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let hdr = rd.headers()?.clone();
    if hdr.iter().map(str::trim).ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: "unexpected record header".into() });
    }
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        out.push(DemodRecord {
            run_id: field(&rec, 0, line)?,
            t_unix: field(&rec, 1, line)?,
            d_pz: field::<f64>(&rec, 2, line)? * 1e-9,
            v_ac: field(&rec, 3, line)?,
            v_dc: field(&rec, 4, line)?,
            s0: field(&rec, 5, line)?,
            s_w1: field(&rec, 6, line)?,
            s_2w1: field(&rec, 7, line)?,
            s_4w1: field(&rec, 8, line)?,
            s_w2_i: field(&rec, 9, line)?,
            s_w2_q: field(&rec, 10, line)?,
            noise_ac,
            noise_dc,
        });
    }
    Ok(out)
}

/// One row of the fit CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRow {
    pub run_id: usize,
    pub d0_nm: f64,
    pub d0_err_nm: f64,
    pub kappa_nm_per_v: f64,
    pub kappa_err_rel: f64,
    pub chi2: f64,
}

const FIT_HEADER: [&str; 6] = ["run_id", "d0_nm", "d0_err_nm", "kappa_nm_per_V", "kappa_err_rel", "chi2"];

pub fn write_fits<W: Write>(w: W, rows: &[FitRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(FIT_HEADER)?;
    for r in rows {
        wr.write_record(&[
            r.run_id.to_string(),
            format!("{:.6}", r.d0_nm),
            format!("{:.6}", r.d0_err_nm),
            format!("{:.6}", r.kappa_nm_per_v),
            format!("{:.6e}", r.kappa_err_rel),
            format!("{:.6}", r.chi2),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_fits<R: Read>(r: R) -> Result<Vec<FitRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let f = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line, msg: format!("bad or missing {}", FIT_HEADER[i]) })
        };
        out.push(FitRow {
            run_id: f(0)? as usize,
            d0_nm: f(1)?,
            d0_err_nm: f(2)?,
            kappa_nm_per_v: f(3)?,
            kappa_err_rel: f(4)?,
            chi2: f(5)?,
        });
    }
    Ok(out)
}
