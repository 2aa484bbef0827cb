use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square probability matrix whose Kronecker powers define edge probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InitiatorFile", into = "InitiatorFile")]
pub struct InitiatorMatrix {
    n: usize,
    theta: Vec<f64>,
    directed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct InitiatorFile {
    n: usize,
    directed: bool,
    theta: Vec<Vec<f64>>,
}

impl InitiatorMatrix {
    pub fn new(rows: Vec<Vec<f64>>, directed: bool) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::config("theta", "initiator must have at least one row"));
        }
        let mut theta = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::config(
                    format!("theta[{i}]"),
                    format!("row has {} entries; matrix must be {n}x{n}", row.len()),
                ));
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config(format!("theta[{i}][{j}]"), format!("{p} is outside [0, 1]")));
                }
            }
            theta.extend_from_slice(row);
        }
        if !directed {
            for i in 0..n {
                for j in (i + 1)..n {
                    if theta[i * n + j] != theta[j * n + i] {
                        return Err(Error::config(
                            format!("theta[{i}][{j}]"),
                            "undirected initiator must be symmetric",
                        ));
                    }
                }
            }
        }
        Ok(Self { n, theta, directed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.theta[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.theta
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.theta.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn sum(&self) -> f64 {
        self.theta.iter().sum()
    }

    /// Expected number of edges of the `k`-th Kronecker power: `(Σθ)^k`.
    pub fn expected_edge_count(&self, k: u32) -> f64 {
        libm::pow(self.sum(), f64::from(k))
    }

    /// `n^k`, or a parameter error when it does not fit in 64 bits.
    pub fn node_count(&self, k: u32) -> Result<u64> {
        (self.n as u64)
            .checked_pow(k)
            .ok_or_else(|| Error::param(format!("{}^{k} nodes overflows 64 bits", self.n)))
    }

    /// Same model with node labels permuted so the diagonal is in
    /// descending order; two initiators that differ only by relabelling
    /// compare equal after this.
    pub fn canonical(&self) -> InitiatorMatrix {
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.get(b, b).total_cmp(&self.get(a, a)).then(a.cmp(&b)));
        let mut theta = Vec::with_capacity(n * n);
        for &i in &order {
            for &j in &order {
                theta.push(self.get(i, j));
            }
        }
        InitiatorMatrix {
            n,
            theta,
            directed: self.directed,
        }
    }

    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_reader(reader);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json_reader(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
        Self::from_json_reader(BufReader::new(f))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("initiator serializes")
    }
}

impl TryFrom<InitiatorFile> for InitiatorMatrix {
    type Error = Error;

    fn try_from(f: InitiatorFile) -> Result<Self> {
        if f.n != f.theta.len() {
            return Err(Error::config(
                "n",
                format!("n = {} but theta has {} rows", f.n, f.theta.len()),
            ));
        }
        InitiatorMatrix::new(f.theta, f.directed)
    }
}

impl From<InitiatorMatrix> for InitiatorFile {
    fn from(m: InitiatorMatrix) -> Self {
        InitiatorFile {
            n: m.n,
            directed: m.directed,
            theta: m.rows(),
        }
    }
}
