//! One-hidden-layer sigmoid perceptron.
//!
//! Each layer's weight matrix carries one extra trailing column for a bias
//! unit whose input is fixed at 1. Networks built with `bias = false` feed 0
//! into that column instead, which leaves its weights inert.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Logistic function. The exponent argument is clamped to ±500 so `exp` never overflows.
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z.clamp(-500.0, 500.0)).exp())
}

/// The network: input → hidden → output, sigmoid units throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    seed: u64,
    bias: bool,
    /// `n_hidden × (n_in + 1)`, last column is the bias weight.
    pub(crate) w_hidden: Matrix,
    /// `n_out × (n_hidden + 1)`, last column is the bias weight.
    pub(crate) w_out: Matrix,
}

/// Unit outputs recorded during one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Activations {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Mlp {
    /// Weights drawn independently from uniform[−0.5, 0.5] by a ChaCha8 stream seeded with `seed`.
    pub fn init(n_in: usize, n_hidden: usize, n_out: usize, seed: u64) -> Result<Self> {
        Mlp::init_with_bias(n_in, n_hidden, n_out, seed, true)
    }

    pub fn init_with_bias(
        n_in: usize,
        n_hidden: usize,
        n_out: usize,
        seed: u64,
        bias: bool,
    ) -> Result<Self> {
        if n_in == 0 || n_hidden == 0 || n_out == 0 {
            return Err(Error::invalid(format!(
                "layer sizes must be positive, got {n_in}-{n_hidden}-{n_out}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |rows, cols| {
            let data = (0..rows * cols).map(|_| rng.gen_range(-0.5..=0.5)).collect();
            Matrix { rows, cols, data }
        };
        let w_hidden = draw(n_hidden, n_in + 1);
        let w_out = draw(n_out, n_hidden + 1);
        Ok(Mlp {
            n_in,
            n_hidden,
            n_out,
            seed,
            bias,
            w_hidden,
            w_out,
        })
    }

    /// Assemble a network from explicit weight matrices (bias column last).
    pub fn from_weights(w_hidden: Matrix, w_out: Matrix, seed: u64, bias: bool) -> Result<Self> {
        let (n_hidden, in_cols) = w_hidden.shape();
        let (n_out, hid_cols) = w_out.shape();
        if n_hidden == 0 || n_out == 0 || in_cols < 2 || hid_cols != n_hidden + 1 {
            return Err(Error::invalid(format!(
                "incompatible weight shapes {n_hidden}x{in_cols} and {n_out}x{hid_cols}"
            )));
        }
        if w_hidden.data.iter().chain(&w_out.data).any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(Mlp {
            n_in: in_cols - 1,
            n_hidden,
            n_out,
            seed,
            bias,
            w_hidden,
            w_out,
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    pub fn w_hidden(&self) -> &Matrix {
        &self.w_hidden
    }

    pub fn w_out(&self) -> &Matrix {
        &self.w_out
    }

    pub fn w_hidden_mut(&mut self) -> &mut Matrix {
        &mut self.w_hidden
    }

    pub fn w_out_mut(&mut self) -> &mut Matrix {
        &mut self.w_out
    }

    /// Value presented on the bias input.
    pub(crate) fn bias_input(&self) -> f64 {
        if self.bias {
            1.0
        } else {
            0.0
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Activations> {
        if x.len() != self.n_in {
            return Err(Error::invalid(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.n_in
            )));
        }
        let hidden = layer(&self.w_hidden, x, self.bias_input());
        let output = layer(&self.w_out, &hidden, self.bias_input());
        Ok(Activations {
            input: x.to_vec(),
            hidden,
            output,
        })
    }

    /// Serialize as the `mlp v1` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "mlp v1 {} {} {} {}",
            self.n_in, self.n_hidden, self.n_out, self.seed
        );
        if !self.bias {
            out.push_str(" nobias");
        }
        out.push('\n');
        for m in [&self.w_hidden, &self.w_out] {
            for r in 0..m.rows {
                let mut line = String::with_capacity(m.cols * 25);
                for (i, w) in m.row(r).iter().enumerate() {
                    if i > 0 {
                        line.push(' ');
                    }
                    // 17 significant digits round-trip every f64 exactly.
                    write!(line, "{w:.16e}").unwrap();
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty model file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 6 || fields[0] != "mlp" || fields[1] != "v1" {
            return Err(Error::parse(1, format!("bad model header {header:?}")));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(1, format!("bad header field {s:?}")))
        };
        let (n_in, n_hidden, n_out) = (num(fields[2])?, num(fields[3])?, num(fields[4])?);
        let seed: u64 = fields[5]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad seed {:?}", fields[5])))?;
        let bias = match fields.get(6) {
            None => true,
            Some(&"nobias") if fields.len() == 7 => false,
            Some(_) => return Err(Error::parse(1, format!("bad model header {header:?}"))),
        };
        if n_in == 0 || n_hidden == 0 || n_out == 0 {
            return Err(Error::parse(1, "layer sizes must be positive"));
        }

        let expected = n_hidden * (n_in + 1) + n_out * (n_hidden + 1);
        let mut values = Vec::with_capacity(expected);
        let mut last_line = 1;
        for (i, line) in lines {
            last_line = i + 1;
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad weight {tok:?}")))?;
                if !v.is_finite() {
                    return Err(Error::parse(i + 1, format!("non-finite weight {tok:?}")));
                }
                values.push(v);
            }
        }
        if values.len() != expected {
            return Err(Error::parse(
                last_line,
                format!("expected {expected} weights, found {}", values.len()),
            ));
        }
        let w_out = values.split_off(n_hidden * (n_in + 1));
        Ok(Mlp {
            n_in,
            n_hidden,
            n_out,
            seed,
            bias,
            w_hidden: Matrix::from_vec(n_hidden, n_in + 1, values)?,
            w_out: Matrix::from_vec(n_out, n_hidden + 1, w_out)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Mlp::from_text(&fs::read_to_string(path)?)
    }
}

fn layer(weights: &Matrix, input: &[f64], bias_input: f64) -> Vec<f64> {
    (0..weights.rows)
        .map(|j| {
            let row = weights.row(j);
            let (w, b) = row.split_at(input.len());
            let net: f64 = w.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b[0] * bias_input;
            sigmoid(net)
        })
        .collect()
}
