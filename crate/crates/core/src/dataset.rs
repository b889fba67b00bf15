//! Labeled glyph samples, the 32-letter label space and its 5-bit output code.
//!
//! Corpora live in `.fds` files, one sample per line:
//!
//! ```text
//! label_index|writer|source|<900 row-major 0/1 characters>
//! ```

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::skeleton::{Glyph, GLYPH_SIDE};

/// Number of output units, one per code bit.
pub const CODE_BITS: usize = 5;
pub const NUM_LABELS: usize = 32;

/// The Farsi alphabet in conventional order with Latin transliterations.
pub const ALPHABET: [(&str, &str); NUM_LABELS] = [
    ("\u{0627}", "alef"),
    ("\u{0628}", "be"),
    ("\u{067E}", "pe"),
    ("\u{062A}", "te"),
    ("\u{062B}", "se"),
    ("\u{062C}", "jim"),
    ("\u{0686}", "che"),
    ("\u{062D}", "he-jimi"),
    ("\u{062E}", "khe"),
    ("\u{062F}", "dal"),
    ("\u{0630}", "zal"),
    ("\u{0631}", "re"),
    ("\u{0632}", "ze"),
    ("\u{0698}", "zhe"),
    ("\u{0633}", "sin"),
    ("\u{0634}", "shin"),
    ("\u{0635}", "sad"),
    ("\u{0636}", "zad"),
    ("\u{0637}", "ta"),
    ("\u{0638}", "za"),
    ("\u{0639}", "eyn"),
    ("\u{063A}", "gheyn"),
    ("\u{0641}", "fe"),
    ("\u{0642}", "ghaf"),
    ("\u{06A9}", "kaf"),
    ("\u{06AF}", "gaf"),
    ("\u{0644}", "lam"),
    ("\u{0645}", "mim"),
    ("\u{0646}", "nun"),
    ("\u{0648}", "vav"),
    ("\u{0647}", "he"),
    ("\u{06CC}", "ye"),
];

/// One of the 32 letters, by alphabetical index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(u8);

impl Label {
    pub fn new(index: usize) -> Result<Self> {
        if index < NUM_LABELS {
            Ok(Label(index as u8))
        } else {
            Err(Error::invalid(format!("label index {index} out of range 0..=31")))
        }
    }

    pub fn all() -> impl Iterator<Item = Label> {
        (0..NUM_LABELS as u8).map(Label)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn letter(self) -> &'static str {
        ALPHABET[self.index()].0
    }

    pub fn name(self) -> &'static str {
        ALPHABET[self.index()].1
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.letter(), self.name())
    }
}

/// Big-endian 5-bit binary code of the label index.
pub fn encode_label(label: Label) -> [f64; CODE_BITS] {
    let mut code = [0.0; CODE_BITS];
    for (bit, slot) in code.iter_mut().enumerate() {
        *slot = ((label.0 >> (CODE_BITS - 1 - bit)) & 1) as f64;
    }
    code
}

/// The label whose code lies nearest (Euclidean) to `outputs`; ties go to the lowest index.
pub fn decode_output(outputs: &[f64]) -> Result<Label> {
    if outputs.len() != CODE_BITS {
        return Err(Error::invalid(format!(
            "expected {CODE_BITS} outputs, got {}",
            outputs.len()
        )));
    }
    let mut best = (Label(0), f64::INFINITY);
    for label in Label::all() {
        let dist: f64 = encode_label(label)
            .iter()
            .zip(outputs)
            .map(|(c, o)| (c - o) * (c - o))
            .sum();
        if dist < best.1 {
            best = (label, dist);
        }
    }
    Ok(best.0)
}

/// Where a sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Scan,
    Canvas,
    Synthetic,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Scan => "scan",
            Source::Canvas => "canvas",
            Source::Synthetic => "synthetic",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scan" => Ok(Source::Scan),
            "canvas" => Ok(Source::Canvas),
            "synthetic" => Ok(Source::Synthetic),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub label: Label,
    /// Always 30×30 with at least one set bit.
    pub glyph: Glyph,
    pub writer: Option<String>,
    pub source: Source,
}

impl Sample {
    pub fn new(label: Label, glyph: Glyph, writer: Option<String>, source: Source) -> Result<Self> {
        if glyph.side() != GLYPH_SIDE {
            return Err(Error::invalid(format!(
                "sample glyphs must be {GLYPH_SIDE}x{GLYPH_SIDE}, got side {}",
                glyph.side()
            )));
        }
        if glyph.is_blank() {
            return Err(Error::EmptyGlyph);
        }
        if let Some(w) = &writer {
            if w.contains(['|', '\n', '\r']) {
                return Err(Error::invalid("writer may not contain '|' or line breaks"));
            }
        }
        let writer = writer.filter(|w| !w.is_empty());
        Ok(Sample {
            label,
            glyph,
            writer,
            source,
        })
    }

    /// The `.fds` line for this sample, without the trailing newline.
    pub fn to_record(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.label.index(),
            self.writer.as_deref().unwrap_or(""),
            self.source.as_str(),
            self.glyph.to_bit_string()
        )
    }

    /// Parse one `.fds` line; `line_no` is used in error messages.
    pub fn from_record(record: &str, line_no: usize) -> Result<Self> {
        let fields: Vec<&str> = record.split('|').collect();
        let [label, writer, source, bits] = fields[..] else {
            return Err(Error::parse(
                line_no,
                format!("expected 4 '|'-separated fields, found {}", fields.len()),
            ));
        };
        let index: u64 = label
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad label index {label:?}")))?;
        if index >= NUM_LABELS as u64 {
            return Err(Error::LabelRange {
                line: line_no,
                index,
            });
        }
        let source: Source = source.parse().map_err(|e: String| Error::parse(line_no, e))?;
        if bits.len() != GLYPH_SIDE * GLYPH_SIDE {
            return Err(Error::parse(
                line_no,
                format!("glyph has {} bits, expected {}", bits.len(), GLYPH_SIDE * GLYPH_SIDE),
            ));
        }
        let bits = bits
            .bytes()
            .map(|b| match b {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::parse(line_no, format!("bad glyph character {:?}", b as char))),
            })
            .collect::<Result<Vec<u8>>>()?;
        let glyph = Glyph::new(GLYPH_SIDE, bits)?;
        let writer = (!writer.is_empty()).then(|| writer.to_string());
        Sample::new(Label(index as u8), glyph, writer, source)
            .map_err(|e| Error::parse(line_no, e.to_string()))
    }
}

/// An ordered list of samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        Dataset { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * (GLYPH_SIDE * GLYPH_SIDE + 24));
        for s in &self.samples {
            out.push_str(&s.to_record());
            out.push('\n');
        }
        out
    }

    /// Parse `.fds` text; blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            samples.push(Sample::from_record(line, i + 1)?);
        }
        Ok(Dataset { samples })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Dataset::from_text(&fs::read_to_string(path)?)
    }

    /// Seeded shuffle, then the first `round(fraction · len)` samples (half up) form the train side.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::invalid(format!("split fraction {fraction} outside (0, 1)")));
        }
        if self.is_empty() {
            return Err(Error::invalid("cannot split an empty dataset"));
        }
        let mut shuffled = self.samples.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = ((fraction * shuffled.len() as f64) + 0.5).floor() as usize;
        let test = shuffled.split_off(n_train.min(shuffled.len()));
        Ok((Dataset::new(shuffled), Dataset::new(test)))
    }
}
