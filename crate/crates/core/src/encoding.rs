//! Circuit-to-tensor encoding for external learning pipelines.
//!
//! A circuit becomes an `n × d_max × 10` tensor. Row `k` is the qubit at
//! position `k` of `circuit.qubits`; column `t` is layer `t`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

pub const CHANNELS: usize = 10;

pub const CHANNEL_LEGEND: [&str; CHANNELS] = [
    "idle",
    "1q-class-A",
    "1q-class-B",
    "1q-class-C",
    "2q-partner-lower",
    "2q-partner-higher",
    "readout-row marker",
    "2q partner offset |i-j|/n",
    "2q direction (1 on first listed qubit)",
    "per-qubit gate count / d_max (layer 0 only)",
];

const IDLE: usize = 0;
const LOWER: usize = 4;
const HIGHER: usize = 5;
const READOUT: usize = 6;
const OFFSET: usize = 7;
const DIRECTION: usize = 8;
const DENSITY: usize = 9;

/// Dense row-major `f32` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: [usize; 3],
    pub values: Vec<f32>,
}

impl Tensor {
    pub fn zeros(shape: [usize; 3]) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.iter().product()],
        }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.values[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f32) {
        let at = self.idx(i, j, k);
        self.values[at] = v;
    }
}

/// Which 1q class (0, 1, 2 for A, B, C) each gate name belongs to.
/// Names in `readout` set the readout-row marker instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    pub classes: BTreeMap<String, u8>,
    pub readout: BTreeSet<String>,
}

impl Default for ClassMap {
    /// Paulis, Hadamard, phase gates.
    fn default() -> Self {
        let classes = [
            ("I", 0),
            ("X", 0),
            ("Y", 0),
            ("Z", 0),
            ("H", 1),
            ("S", 2),
            ("Sdg", 2),
        ]
        .into_iter()
        .map(|(g, c)| (g.to_owned(), c))
        .collect();
        Self {
            classes,
            readout: ["Measure".to_owned()].into(),
        }
    }
}

impl ClassMap {
    /// The default map if it covers every 1q gate in `circuits`, else one
    /// class per distinct 1q gate name.
    pub fn for_circuits<'a>(circuits: impl IntoIterator<Item = &'a Circuit>) -> Result<Self> {
        let base = Self::default();
        let names: BTreeSet<&str> = circuits
            .into_iter()
            .flat_map(|c| c.gates())
            .filter(|g| g.arity() == 1 && !base.readout.contains(&g.name))
            .map(|g| g.name.as_str())
            .collect();
        if names.iter().all(|n| base.classes.contains_key(*n)) {
            return Ok(base);
        }
        if names.len() > 3 {
            return Err(Error::Capacity(format!(
                "{} distinct one-qubit gates ({}) do not fit 3 classes; supply a wider class map",
                names.len(),
                names.iter().copied().collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(Self {
            classes: names
                .into_iter()
                .enumerate()
                .map(|(k, n)| (n.to_owned(), k as u8))
                .collect(),
            readout: base.readout,
        })
    }
}

/// What occupies one (row, layer) cell, recoverable from a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Idle,
    OneQubit(u8),
    Readout,
    /// Two-qubit gate: rows of the first and second listed qubit.
    TwoQubit {
        first: usize,
        second: usize,
    },
}

/// Per-layer, per-row occupancy of `c` under `map`. Layer-major.
pub fn placement(c: &Circuit, map: &ClassMap) -> Result<Vec<Vec<Slot>>> {
    let n = c.width();
    c.layers
        .iter()
        .map(|layer| {
            let mut row = vec![Slot::Idle; n];
            for g in layer {
                let pos: Vec<usize> = g
                    .qubits
                    .iter()
                    .map(|&q| c.position(q).expect("validated circuit"))
                    .collect();
                match pos[..] {
                    [p] if map.readout.contains(&g.name) => row[p] = Slot::Readout,
                    [p] => {
                        let class = *map.classes.get(&g.name).ok_or_else(|| {
                            Error::Capacity(format!(
                                "gate `{}` has no class in the class map",
                                g.name
                            ))
                        })?;
                        row[p] = Slot::OneQubit(class);
                    }
                    [a, b] => {
                        let s = Slot::TwoQubit {
                            first: a,
                            second: b,
                        };
                        row[a] = s;
                        row[b] = s;
                    }
                    _ => unreachable!("validated circuit"),
                }
            }
            Ok(row)
        })
        .collect()
}

/// Encodes `c` as an `n × d_max × 10` tensor.
pub fn encode_circuit(c: &Circuit, n: usize, d_max: usize, map: &ClassMap) -> Result<Tensor> {
    if c.width() > n || c.depth() > d_max {
        return Err(Error::Size(format!(
            "circuit `{}` is {}×{}, tensor holds {n}×{d_max}",
            c.id,
            c.width(),
            c.depth()
        )));
    }
    let mut t = Tensor::zeros([n, d_max, CHANNELS]);
    let mut gate_count = vec![0usize; c.width()];
    for (j, row) in placement(c, map)?.into_iter().enumerate() {
        for (i, slot) in row.into_iter().enumerate() {
            match slot {
                Slot::Idle => t.set(i, j, IDLE, 1.0),
                Slot::OneQubit(k) => t.set(i, j, 1 + k as usize, 1.0),
                Slot::Readout => t.set(i, j, READOUT, 1.0),
                Slot::TwoQubit { first, second } => {
                    let lower = first.min(second);
                    t.set(i, j, if i == lower { LOWER } else { HIGHER }, 1.0);
                    t.set(
                        i,
                        j,
                        OFFSET,
                        (first.abs_diff(second) as f64 / n as f64) as f32,
                    );
                    if i == first {
                        t.set(i, j, DIRECTION, 1.0);
                    }
                }
            }
            if slot != Slot::Idle {
                gate_count[i] += 1;
            }
        }
    }
    if d_max > 0 {
        for (i, &k) in gate_count.iter().enumerate() {
            t.set(i, 0, DENSITY, (k as f64 / d_max as f64) as f32);
        }
    }
    Ok(t)
}

/// Encodes a batch in order, in parallel.
pub fn encode_batch(
    circuits: &[Circuit],
    n: usize,
    d_max: usize,
    map: &ClassMap,
) -> Result<Vec<Tensor>> {
    circuits
        .par_iter()
        .map(|c| encode_circuit(c, n, d_max, map))
        .collect()
}

/// Recovers the placement of a tensor produced by [`encode_circuit`] for a
/// circuit of the given `width` and `depth`.
pub fn decode(t: &Tensor, width: usize, depth: usize) -> Result<Vec<Vec<Slot>>> {
    let [n, d_max, h] = t.shape;
    if h != CHANNELS || width > n || depth > d_max {
        return Err(Error::Format(format!(
            "cannot decode {width}×{depth} from tensor of shape {:?}",
            t.shape
        )));
    }
    let bad = |i, j| Error::Format(format!("cell ({i}, {j}) is not one-hot"));
    (0..depth)
        .map(|j| {
            (0..width)
                .map(|i| {
                    let hot: Vec<usize> =
                        (0..=READOUT).filter(|&k| t.get(i, j, k) == 1.0).collect();
                    Ok(match hot[..] {
                        [IDLE] => Slot::Idle,
                        [k @ 1..=3] => Slot::OneQubit(k as u8 - 1),
                        [READOUT] => Slot::Readout,
                        [k @ (LOWER | HIGHER)] => {
                            let off = (t.get(i, j, OFFSET) as f64 * n as f64).round() as usize;
                            let other = if k == LOWER {
                                i + off
                            } else {
                                i.checked_sub(off).ok_or_else(|| bad(i, j))?
                            };
                            if t.get(i, j, DIRECTION) == 1.0 {
                                Slot::TwoQubit {
                                    first: i,
                                    second: other,
                                }
                            } else {
                                Slot::TwoQubit {
                                    first: other,
                                    second: i,
                                }
                            }
                        }
                        _ => return Err(bad(i, j)),
                    })
                })
                .collect()
        })
        .collect()
}

/// Default reshape target: `(n, ceil(10·d_max/3), 3)`.
pub fn default_three_channel_shape(n: usize, d_max: usize) -> [usize; 3] {
    [n, (CHANNELS * d_max).div_ceil(3), 3]
}

/// Flattens channel-major (then depth, then qubit), zero-pads and reshapes
/// to `(n', d', 3)`.
pub fn reshape_to_three_channels(t: &Tensor, target: Option<(usize, usize)>) -> Result<Tensor> {
    let [n, d, h] = t.shape;
    let shape = match target {
        Some((n2, d2)) => [n2, d2, 3],
        None => default_three_channel_shape(n, d),
    };
    let len: usize = shape.iter().product();
    if n * d * h > len {
        return Err(Error::Size(format!(
            "{n}×{d}×{h} values do not fit target {}×{}×3",
            shape[0], shape[1]
        )));
    }
    let mut values = Vec::with_capacity(len);
    for k in 0..h {
        for j in 0..d {
            for i in 0..n {
                values.push(t.get(i, j, k));
            }
        }
    }
    values.resize(len, 0.0);
    Ok(Tensor { shape, values })
}

/// Inverse of [`reshape_to_three_channels`] given the original shape.
pub fn unreshape(r: &Tensor, original: [usize; 3]) -> Result<Tensor> {
    let [n, d, h] = original;
    if n * d * h > r.values.len() {
        return Err(Error::Size(format!(
            "shape {original:?} holds more values than the reshaped tensor"
        )));
    }
    let mut t = Tensor::zeros(original);
    let mut it = r.values.iter();
    for k in 0..h {
        for j in 0..d {
            for i in 0..n {
                t.set(i, j, k, *it.next().expect("length checked"));
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    count: usize,
    shape: [usize; 3],
    dtype: String,
    order: String,
}

/// One JSON header line, then `count·n·d·h` little-endian `f32`s.
pub fn write_tensors(
    mut w: impl Write,
    shape: [usize; 3],
    tensors: &[Tensor],
) -> std::io::Result<()> {
    for t in tensors {
        if t.shape != shape {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!(
                    "tensor shape {:?} differs from batch shape {shape:?}",
                    t.shape
                ),
            ));
        }
    }
    let header = Header {
        count: tensors.len(),
        shape,
        dtype: "f32".into(),
        order: "row-major".into(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for t in tensors {
        for v in &t.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

/// Reads a tensor stream; `expect` rejects a different header shape.
pub fn read_tensors(r: impl Read, expect: Option<[usize; 3]>) -> Result<(Header3, Vec<Tensor>)> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)
        .map_err(|e| Error::Format(format!("header: {e}")))?;
    let h: Header =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(format!("header: {e}")))?;
    if h.dtype != "f32" || h.order != "row-major" {
        return Err(Error::Format(format!(
            "unsupported dtype/order {}/{}",
            h.dtype, h.order
        )));
    }
    if let Some(s) = expect {
        if s != h.shape {
            return Err(Error::Format(format!(
                "header shape {:?}, expected {s:?}",
                h.shape
            )));
        }
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Format(format!("body: {e}")))?;
    let per: usize = h.shape.iter().product();
    if bytes.len() != h.count * per * 4 {
        return Err(Error::Format(format!(
            "body has {} bytes, header implies {}",
            bytes.len(),
            h.count * per * 4
        )));
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let tensors = if per == 0 {
        (0..h.count).map(|_| Tensor::zeros(h.shape)).collect()
    } else {
        floats
            .chunks_exact(per)
            .map(|v| Tensor {
                shape: h.shape,
                values: v.to_vec(),
            })
            .collect()
    };
    Ok((h.shape, tensors))
}

/// Batch shape as stored in a tensor file header.
pub type Header3 = [usize; 3];

pub fn write_tensor_file(path: &Path, shape: [usize; 3], tensors: &[Tensor]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_tensors(std::io::BufWriter::new(f), shape, tensors).map_err(|e| Error::io(path, e))
}

pub fn read_tensor_file(path: &Path, expect: Option<[usize; 3]>) -> Result<(Header3, Vec<Tensor>)> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tensors(f, expect)
}
