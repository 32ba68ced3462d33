//! Realised models and their on-disk form.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::cellparams::Electrode;
use crate::error::{Error, Result};
use crate::tfgen::{OutputKind, OutputLabel};

pub const MAGIC: &[u8; 4] = b"CIDR";
pub const FORMAT_VERSION: u32 = 1;
pub const MODEL_EXTENSION: &str = "cidr";
pub const LABELS_EXTENSION: &str = "labels";

/// Discrete model `x' = A x + B u`, `y = C x + D u + res0 q`, where `q` is
/// the bilinear-discretised charge integral of `u` (see
/// [`crate::simulate::step`]).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
    pub res0: DVector<f64>,
    pub labels: Vec<OutputLabel>,
    pub soc: f64,
    pub temp: f64,
    pub t_s: f64,
}

impl StateSpaceModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn check(&self) -> Result<()> {
        let (m, p) = (self.order(), self.outputs());
        let ok = self.a.ncols() == m
            && self.b.len() == m
            && self.c.ncols() == m
            && self.d.len() == p
            && self.res0.len() == p
            && self.labels.len() == p;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "model matrices inconsistent with order {m} and {p} outputs"
            )))
        }
    }

    pub fn find(&self, kind: OutputKind, electrode: Option<Electrode>, location: f64) -> Option<usize> {
        self.labels.iter().position(|l| {
            l.kind == kind
                && l.electrode == electrode
                && (l.location - location).abs() <= 1e-9 * location.abs().max(1e-12)
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (m, p) = (self.order(), self.outputs());
        let mut out = Vec::with_capacity(48 + 8 * (m * m + m + p * m + 2 * p));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(m as u64).to_le_bytes());
        out.extend_from_slice(&(p as u64).to_le_bytes());
        for v in [self.t_s, self.soc, self.temp] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut put = |x: f64| out.extend_from_slice(&x.to_le_bytes());
        for r in 0..m {
            for c in 0..m {
                put(self.a[(r, c)]);
            }
        }
        self.b.iter().for_each(|&x| put(x));
        for r in 0..p {
            for c in 0..m {
                put(self.c[(r, c)]);
            }
        }
        self.d.iter().for_each(|&x| put(x));
        self.res0.iter().for_each(|&x| put(x));
        out
    }

    /// Parse the binary body; labels come from the sidecar.
    pub fn from_bytes(bytes: &[u8], labels: Vec<OutputLabel>, path: &Path) -> Result<Self> {
        let bad = |message: String| Error::ModelFormat {
            path: path.to_path_buf(),
            message,
        };
        if bytes.len() < 48 || &bytes[..4] != MAGIC {
            return Err(bad("missing CIDR header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let (m, p) = (u64_at(8) as usize, u64_at(16) as usize);
        let (t_s, soc, temp) = (f64_at(24), f64_at(32), f64_at(40));
        let count = m * m + m + p * m + 2 * p;
        if bytes.len() != 48 + 8 * count {
            return Err(bad(format!(
                "expected {} bytes for order {m} with {p} outputs, found {}",
                48 + 8 * count,
                bytes.len()
            )));
        }
        if labels.len() != p {
            return Err(bad(format!("sidecar lists {} labels for {p} outputs", labels.len())));
        }
        let mut at = 48;
        let mut next = || {
            let v = f64_at(at);
            at += 8;
            v
        };
        let mut a = DMatrix::zeros(m, m);
        for r in 0..m {
            for c in 0..m {
                a[(r, c)] = next();
            }
        }
        let b = DVector::from_fn(m, |_, _| next());
        let mut c = DMatrix::zeros(p, m);
        for r in 0..p {
            for k in 0..m {
                c[(r, k)] = next();
            }
        }
        let d = DVector::from_fn(p, |_, _| next());
        let res0 = DVector::from_fn(p, |_, _| next());
        Ok(Self {
            a,
            b,
            c,
            d,
            res0,
            labels,
            soc,
            temp,
            t_s,
        })
    }

    /// Human-readable sidecar: one output per line.
    pub fn labels_text(&self) -> String {
        let mut s = String::from("# index\tlabel\tkind\telectrode\tlocation\n");
        for (i, l) in self.labels.iter().enumerate() {
            let e = l.electrode.map_or("-", |e| e.tag());
            s.push_str(&format!("{i}\t{l}\t{}\t{e}\t{:e}\n", l.kind.tag(), l.location));
        }
        s
    }

    /// Writes `<stem>.cidr` and `<stem>.labels` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{stem}.{MODEL_EXTENSION}"));
        fs::write(&path, self.to_bytes()).map_err(|e| Error::io(&path, e))?;
        let side = path.with_extension(LABELS_EXTENSION);
        fs::write(&side, self.labels_text()).map_err(|e| Error::io(&side, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let side = path.with_extension(LABELS_EXTENSION);
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let labels = parse_labels(&text, &side)?;
        Self::from_bytes(&bytes, labels, path)
    }

    /// File stem encoding the setpoint.
    pub fn stem(&self) -> String {
        format!("model_soc{:.4}_T{:.2}", self.soc, self.temp)
    }
}

fn parse_labels(text: &str, path: &Path) -> Result<Vec<OutputLabel>> {
    let bad = |line: usize, message: &str| Error::ModelFormat {
        path: path.to_path_buf(),
        message: format!("line {}: {message}", line + 1),
    };
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(bad(n, "expected 5 tab-separated fields"));
        }
        let kind = OutputKind::parse(f[2]).ok_or_else(|| bad(n, "unknown output kind"))?;
        let electrode = match f[3] {
            "-" => None,
            "neg" => Some(Electrode::Negative),
            "pos" => Some(Electrode::Positive),
            _ => return Err(bad(n, "unknown electrode")),
        };
        let location = f[4].parse().map_err(|_| bad(n, "bad location"))?;
        out.push(OutputLabel {
            kind,
            electrode,
            location,
        });
    }
    Ok(out)
}
