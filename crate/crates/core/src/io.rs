//! Text formats for tensors, training operators, path sets and estimates.
//!
//! Tensor CSV layout:
//!
//! ```text
//! # nfirs tensor v1
//! # dims Q=16 T_a=16 P=16
//! # order: q fastest, then t, then p (indices 1-based)
//! # sigma2=0.0125
//! # snr_linear=99.7
//! q,t,p,re,im
//! 1,1,1,0.25,-1.5
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::PathParams;
use crate::crlb::CrlbReport;
use crate::error::{Error, Result};
use crate::estimator::EstimationResult;
use crate::measurement::TrainingOperators;
use crate::tensor::Tensor3;
use crate::{CMat, CVec, C64};

/// A tensor read back from CSV with its noise metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub data: Tensor3,
    pub sigma2: f64,
    pub snr_linear: f64,
}

pub fn write_tensor_csv<W: Write>(mut w: W, t: &Tensor3, sigma2: f64, snr_linear: f64) -> Result<()> {
    let (q, ta, p) = t.dims();
    writeln!(w, "# nfirs tensor v1")?;
    writeln!(w, "# dims Q={q} T_a={ta} P={p}")?;
    writeln!(w, "# order: q fastest, then t, then p (indices 1-based)")?;
    writeln!(w, "# sigma2={sigma2}")?;
    writeln!(w, "# snr_linear={snr_linear}")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["q", "t", "p", "re", "im"])?;
    for ip in 0..p {
        for it in 0..ta {
            for iq in 0..q {
                let z = t.get(iq, it, ip);
                csv.write_record([
                    (iq + 1).to_string(),
                    (it + 1).to_string(),
                    (ip + 1).to_string(),
                    z.re.to_string(),
                    z.im.to_string(),
                ])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

pub fn read_tensor_csv<R: Read>(mut r: R) -> Result<TensorFile> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut dims = None;
    let mut sigma2 = 0.0;
    let mut snr_linear = f64::INFINITY;
    for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("dims") {
            let mut d = [0usize; 3];
            for (slot, key) in d.iter_mut().zip(["Q=", "T_a=", "P="]) {
                let tok = rest
                    .split_whitespace()
                    .find_map(|tok| tok.strip_prefix(key))
                    .ok_or_else(|| Error::Parse(format!("missing {key} in dims line")))?;
                *slot = parse_usize(tok, "dimension")?;
            }
            dims = Some((d[0], d[1], d[2]));
        } else if let Some(v) = line.strip_prefix("sigma2=") {
            sigma2 = parse_f64(v, "sigma2")?;
        } else if let Some(v) = line.strip_prefix("snr_linear=") {
            snr_linear = parse_f64(v, "snr_linear")?;
        }
    }
    let dims = dims.ok_or_else(|| Error::Parse("missing '# dims' header line".into()))?;
    let mut out = Tensor3::zeros(dims);
    let mut seen = vec![false; out.len()];
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Parse(format!("expected 5 fields, got {}", rec.len())));
        }
        let q = parse_usize(&rec[0], "q")?;
        let t = parse_usize(&rec[1], "t")?;
        let p = parse_usize(&rec[2], "p")?;
        if q == 0 || t == 0 || p == 0 || q > dims.0 || t > dims.1 || p > dims.2 {
            return Err(Error::IndexOutOfRange { q, t, p, dims });
        }
        let z = C64::new(parse_f64(&rec[3], "re")?, parse_f64(&rec[4], "im")?);
        let i = out.linear_index(q - 1, t - 1, p - 1);
        seen[i] = true;
        out.set(q - 1, t - 1, p - 1, z);
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Parse(format!(
            "tensor entry {missing} (linear, 0-based) missing from file"
        )));
    }
    Ok(TensorFile {
        data: out,
        sigma2,
        snr_linear,
    })
}

pub fn save_tensor(path: impl AsRef<Path>, t: &Tensor3, sigma2: f64, snr_linear: f64) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_tensor_csv(f, t, sigma2, snr_linear)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<TensorFile> {
    read_tensor_csv(std::fs::File::open(path)?)
}

/// JSON form of [`TrainingOperators`]; complex numbers are `[re, im]` and
/// matrices are lists of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorsFile {
    w: Vec<[f64; 2]>,
    f: Vec<Vec<[f64; 2]>>,
    v: Vec<Vec<[f64; 2]>>,
    h_tilde: Vec<[f64; 2]>,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(pair).collect()).collect()
}

fn from_rows(rows: &[Vec<[f64; 2]>], what: &str) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("ragged rows in {what}")));
    }
    Ok(CMat::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn operators_to_json(ops: &TrainingOperators) -> String {
    let file = OperatorsFile {
        w: ops.w.iter().map(pair).collect(),
        f: rows(&ops.f),
        v: rows(&ops.v),
        h_tilde: ops.h_tilde.iter().map(pair).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn operators_from_json(text: &str) -> Result<TrainingOperators> {
    let file: OperatorsFile = serde_json::from_str(text)?;
    let vec = |v: &[[f64; 2]]| CVec::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im)));
    TrainingOperators::new(
        vec(&file.w),
        from_rows(&file.f, "f")?,
        from_rows(&file.v, "v")?,
        vec(&file.h_tilde),
    )
}

const TRUTH_HEADER: [&str; 7] = ["theta", "phi", "psi", "tau", "distance", "gain_re", "gain_im"];

/// Path set as CSV, one row per path.
pub fn paths_to_csv(paths: &[PathParams]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRUTH_HEADER).expect("in-memory write");
    for p in paths {
        w.write_record(
            [p.theta, p.phi, p.psi, p.delay(), p.distance, p.gain.re, p.gain.im].map(|x| x.to_string()),
        )
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn paths_from_csv(text: &str) -> Result<Vec<PathParams>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != TRUTH_HEADER.len() {
            return Err(Error::Parse(format!("expected 7 fields, got {}", rec.len())));
        }
        let x: Vec<f64> = rec
            .iter()
            .zip(TRUTH_HEADER)
            .map(|(s, name)| parse_f64(s, name))
            .collect::<Result<_>>()?;
        out.push(PathParams {
            theta: x[0],
            phi: x[1],
            psi: x[2],
            distance: x[4],
            gain: C64::new(x[5], x[6]),
        });
    }
    Ok(out)
}

/// Estimate as CSV: diagnostics as `#` comment lines, then one row per path.
pub fn estimate_to_csv(est: &EstimationResult) -> String {
    let d = &est.diagnostics;
    let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    out.push_str(&format!("# singular_values {}\n", list(&d.singular_values)));
    out.push_str(&format!("# eigenvalue_moduli {}\n", list(&d.eigenvalue_moduli)));
    out.push_str(&format!("# eigvec_cond {}\n", d.eigvec_cond));
    out.push_str(&format!("# irs_peaks {}\n", list(&d.irs_peaks)));
    out.push_str(&format!("# ue_peaks {}\n", list(&d.ue_peaks)));
    out.push_str(&format!("# gain_leakage {}\n", d.gain_leakage));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "phi", "psi", "tau", "distance", "gain_re", "gain_im"])
        .expect("in-memory write");
    for p in &est.paths {
        w.write_record([p.theta, p.phi, p.psi, p.delay, p.distance, p.gain.re, p.gain.im].map(|x| x.to_string()))
            .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output"));
    out
}

pub const CRLB_HEADER: [&str; 9] = [
    "snr_db",
    "sigma2",
    "crlb_total",
    "crlb_theta",
    "crlb_phi",
    "crlb_psi",
    "crlb_tau",
    "crlb_gamma",
    "crlb_channel",
];

/// CRLB rows as CSV, one per `(snr_db, report)`.
pub fn crlb_to_csv(rows: &[(f64, CrlbReport)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CRLB_HEADER).expect("in-memory write");
    for (snr, r) in rows {
        w.write_record(
            [*snr, r.sigma2, r.total, r.theta, r.phi, r.psi, r.tau, r.gamma, r.channel].map(|x| x.to_string()),
        )
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
