//! Seeded synthetic handwriting corpus.
//!
//! Each letter is a template of pen strokes in the unit square (x to the
//! right, y down). A sample is drawn by jittering the template with a random
//! affine map, occasionally trimming a stroke end, and rendering it with a
//! round pen onto a noisy light background. The rendered page then goes
//! through the regular preprocessing chain.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Label, Sample, Source, NUM_LABELS};
use crate::error::Result;
use crate::pipeline::{self, Input};
use crate::raster::{BinaryImage, GrayImage, Threshold};

/// Canvas side of a rendered page.
pub const CANVAS: usize = 44;
/// Nominal glyph extent on the canvas before jitter.
const GLYPH_EXTENT: f64 = 26.0;

#[derive(Clone, Debug)]
enum Stroke {
    Line(Vec<(f64, f64)>),
    Dot(f64, f64),
}

fn line(points: &[(f64, f64)]) -> Stroke {
    Stroke::Line(points.to_vec())
}

/// Elliptical arc from `a0` to `a1` (radians, y down so positive angles turn clockwise on screen).
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, a0: f64, a1: f64) -> Stroke {
    let n = 16;
    Stroke::Line(
        (0..=n)
            .map(|i| {
                let a = a0 + (a1 - a0) * i as f64 / n as f64;
                (cx + rx * a.cos(), cy + ry * a.sin())
            })
            .collect(),
    )
}

fn dots(points: &[(f64, f64)]) -> Vec<Stroke> {
    points.iter().map(|&(x, y)| Stroke::Dot(x, y)).collect()
}

fn with(mut base: Vec<Stroke>, extra: Vec<Stroke>) -> Vec<Stroke> {
    base.extend(extra);
    base
}

fn bowl() -> Vec<Stroke> {
    vec![line(&[
        (0.95, 0.40),
        (0.93, 0.62),
        (0.78, 0.72),
        (0.22, 0.72),
        (0.07, 0.62),
        (0.05, 0.42),
    ])]
}

fn jim_body() -> Vec<Stroke> {
    vec![
        line(&[(0.15, 0.22), (0.55, 0.16), (0.85, 0.22), (0.30, 0.45)]),
        arc(0.55, 0.68, 0.35, 0.27, -2.3, 1.6),
    ]
}

fn dal_body() -> Vec<Stroke> {
    vec![line(&[(0.40, 0.25), (0.80, 0.62), (0.70, 0.78), (0.20, 0.78)])]
}

fn re_body() -> Vec<Stroke> {
    vec![line(&[(0.75, 0.20), (0.78, 0.50), (0.62, 0.75), (0.22, 0.92)])]
}

fn sin_body() -> Vec<Stroke> {
    vec![line(&[
        (1.00, 0.32),
        (0.96, 0.52),
        (0.86, 0.52),
        (0.82, 0.34),
        (0.77, 0.52),
        (0.67, 0.52),
        (0.62, 0.34),
        (0.56, 0.52),
        (0.50, 0.76),
        (0.30, 0.86),
        (0.10, 0.76),
        (0.05, 0.56),
    ])]
}

fn sad_body() -> Vec<Stroke> {
    vec![
        line(&[(0.52, 0.52), (0.62, 0.30), (0.85, 0.28), (0.98, 0.42), (0.90, 0.52), (0.52, 0.52)]),
        line(&[(0.52, 0.52), (0.48, 0.76), (0.30, 0.86), (0.10, 0.76), (0.05, 0.56)]),
    ]
}

fn ta_body() -> Vec<Stroke> {
    vec![
        line(&[(0.30, 0.78), (0.58, 0.50), (0.88, 0.56), (0.90, 0.74), (0.30, 0.78)]),
        line(&[(0.36, 0.08), (0.36, 0.76)]),
    ]
}

fn eyn_body() -> Vec<Stroke> {
    vec![
        arc(0.58, 0.30, 0.20, 0.14, -0.3, -3.0),
        line(&[(0.40, 0.36), (0.30, 0.62), (0.40, 0.88), (0.85, 0.90)]),
    ]
}

fn kaf_body() -> Vec<Stroke> {
    vec![line(&[(0.95, 0.12), (0.38, 0.46), (0.90, 0.70), (0.88, 0.78), (0.08, 0.80), (0.05, 0.62)])]
}

fn letter_strokes(label: Label) -> Vec<Stroke> {
    match label.index() {
        0 => vec![line(&[(0.50, 0.05), (0.52, 0.95)])],
        1 => with(bowl(), dots(&[(0.50, 0.90)])),
        2 => with(bowl(), dots(&[(0.35, 0.88), (0.65, 0.88), (0.50, 1.02)])),
        3 => with(bowl(), dots(&[(0.36, 0.22), (0.64, 0.22)])),
        4 => with(bowl(), dots(&[(0.36, 0.26), (0.64, 0.26), (0.50, 0.10)])),
        5 => with(jim_body(), dots(&[(0.55, 0.68)])),
        6 => with(jim_body(), dots(&[(0.42, 0.66), (0.66, 0.66), (0.54, 0.80)])),
        7 => jim_body(),
        8 => with(jim_body(), dots(&[(0.50, 0.02)])),
        9 => dal_body(),
        10 => with(dal_body(), dots(&[(0.38, 0.05)])),
        11 => re_body(),
        12 => with(re_body(), dots(&[(0.78, 0.02)])),
        13 => with(re_body(), dots(&[(0.66, 0.05), (0.90, 0.05), (0.78, -0.10)])),
        14 => sin_body(),
        15 => with(sin_body(), dots(&[(0.66, 0.14), (0.88, 0.14), (0.77, -0.02)])),
        16 => sad_body(),
        17 => with(sad_body(), dots(&[(0.75, 0.10)])),
        18 => ta_body(),
        19 => with(ta_body(), dots(&[(0.65, 0.28)])),
        20 => eyn_body(),
        21 => with(eyn_body(), dots(&[(0.58, -0.02)])),
        22 => with(
            vec![
                arc(0.80, 0.45, 0.13, 0.12, 0.0, 2.0 * PI),
                line(&[(0.80, 0.57), (0.10, 0.62), (0.05, 0.45)]),
            ],
            dots(&[(0.80, 0.14)]),
        ),
        23 => with(
            vec![
                arc(0.68, 0.38, 0.14, 0.12, 0.0, 2.0 * PI),
                line(&[(0.82, 0.42), (0.80, 0.74), (0.50, 0.90), (0.20, 0.78), (0.18, 0.55)]),
            ],
            dots(&[(0.56, 0.10), (0.80, 0.10)]),
        ),
        24 => kaf_body(),
        25 => with(kaf_body(), vec![line(&[(0.98, 0.00), (0.55, 0.24)])]),
        26 => vec![line(&[(0.78, 0.05), (0.78, 0.66), (0.58, 0.90), (0.26, 0.90), (0.10, 0.70)])],
        27 => vec![
            arc(0.66, 0.40, 0.16, 0.14, 0.0, 2.0 * PI),
            line(&[(0.50, 0.46), (0.30, 0.55), (0.30, 0.96)]),
        ],
        28 => with(vec![arc(0.50, 0.42, 0.40, 0.42, 0.1, PI - 0.1)], dots(&[(0.50, 0.30)])),
        29 => vec![
            arc(0.58, 0.34, 0.16, 0.15, 0.0, 2.0 * PI),
            line(&[(0.74, 0.38), (0.70, 0.70), (0.35, 0.95)]),
        ],
        30 => vec![
            arc(0.50, 0.50, 0.36, 0.36, 0.0, 2.0 * PI),
            line(&[(0.32, 0.30), (0.62, 0.62)]),
        ],
        31 => vec![line(&[
            (0.72, 0.12),
            (0.42, 0.28),
            (0.70, 0.48),
            (0.90, 0.62),
            (0.70, 0.86),
            (0.22, 0.86),
            (0.05, 0.70),
        ])],
        _ => unreachable!("label index is below 32"),
    }
}

/// Strength of the per-sample distortions.
#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    /// Relative size change, drawn from `1 ± scale`.
    pub scale: f64,
    /// Relative width/height imbalance, drawn from `1 ± aspect`.
    pub aspect: f64,
    pub rotation_deg: f64,
    pub shear: f64,
    /// Probability that a stroke loses part of one end.
    pub dropout: f64,
    /// Largest fraction of a stroke's points removed by dropout.
    pub dropout_fraction: f64,
    /// Pen radius range in pixels.
    pub pen: (f64, f64),
    /// Uniform pixel noise amplitude in gray levels.
    pub noise: f64,
    /// Place glyphs at fractional pixel offsets rather than whole pixels.
    pub subpixel: bool,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            scale: 0.08,
            aspect: 0.05,
            rotation_deg: 3.0,
            shear: 0.05,
            dropout: 0.1,
            dropout_fraction: 0.1,
            pen: (1.6, 2.1),
            noise: 12.0,
            subpixel: false,
        }
    }
}

fn symmetric(rng: &mut impl Rng, amplitude: f64) -> f64 {
    if amplitude > 0.0 {
        rng.gen_range(-amplitude..amplitude)
    } else {
        0.0
    }
}

/// Random linear jitter: rotation · shear · anisotropic scale, about the template centre.
struct Jitter {
    m: [[f64; 2]; 2],
}

impl Jitter {
    fn sample(rng: &mut impl Rng, style: &Style) -> Self {
        let scale = GLYPH_EXTENT * (1.0 + symmetric(rng, style.scale));
        let aspect = 1.0 + symmetric(rng, style.aspect);
        let theta = symmetric(rng, style.rotation_deg).to_radians();
        let shear = symmetric(rng, style.shear);
        let (sx, sy) = (scale * aspect, scale / aspect);
        let (c, s) = (theta.cos(), theta.sin());
        Jitter {
            m: [[c * sx, (c * shear - s) * sy], [s * sx, (s * shear + c) * sy]],
        }
    }

    fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (u, v) = (x - 0.5, y - 0.5);
        (self.m[0][0] * u + self.m[0][1] * v, self.m[1][0] * u + self.m[1][1] * v)
    }
}

/// Pen path piece: two end points and the pen radius.
type Segment = ((f64, f64), (f64, f64), f64);

/// Ink coverage mask of the jittered letter.
fn ink_mask(label: Label, rng: &mut impl Rng, style: &Style) -> Vec<bool> {
    let jitter = Jitter::sample(rng, style);
    let radius: f64 = rng.gen_range(style.pen.0..=style.pen.1);
    let mut segments: Vec<Segment> = Vec::new();
    for stroke in letter_strokes(label) {
        match stroke {
            Stroke::Dot(x, y) => {
                let p = jitter.apply((x, y));
                segments.push((p, p, radius * 1.25));
            }
            Stroke::Line(points) => {
                let mut pts: Vec<(f64, f64)> = points.into_iter().map(|p| jitter.apply(p)).collect();
                if pts.len() > 2 && rng.gen_bool(style.dropout) {
                    let most = (pts.len() as f64 * style.dropout_fraction) as usize;
                    let cut = rng.gen_range(0..=most.min(pts.len() - 2));
                    if rng.gen_bool(0.5) {
                        pts.drain(..cut);
                    } else {
                        pts.truncate(pts.len() - cut);
                    }
                }
                segments.extend(pts.windows(2).map(|w| (w[0], w[1], radius)));
            }
        }
    }

    // Random placement that keeps every stroke at least one pixel off the border.
    let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
    for &(a, b, rad) in &segments {
        for p in [a, b] {
            lo = (lo.0.min(p.0 - rad), lo.1.min(p.1 - rad));
            hi = (hi.0.max(p.0 + rad), hi.1.max(p.1 + rad));
        }
    }
    let mut place = |lo: f64, hi: f64| {
        let (min, max) = (1.5 - lo, CANVAS as f64 - 1.5 - hi);
        if min < max {
            rng.gen_range(min..max)
        } else {
            (min + max) / 2.0
        }
    };
    let (mut dx, mut dy) = (place(lo.0, hi.0), place(lo.1, hi.1));
    if !style.subpixel {
        (dx, dy) = (dx.round(), dy.round());
    }
    for (a, b, _) in &mut segments {
        *a = (a.0 + dx, a.1 + dy);
        *b = (b.0 + dx, b.1 + dy);
    }

    let mut mask = vec![false; CANVAS * CANVAS];
    for r in 0..CANVAS {
        for c in 0..CANVAS {
            let p = (c as f64 + 0.5, r as f64 + 0.5);
            mask[r * CANVAS + c] = segments
                .iter()
                .any(|&(a, b, rad)| segment_distance(p, a, b) <= rad);
        }
    }
    mask
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Render one jittered letter as a grayscale page: dark ink on light, noisy paper.
pub fn render_gray(label: Label, rng: &mut impl Rng, style: &Style) -> GrayImage {
    let mask = ink_mask(label, rng, style);
    let paper: f64 = rng.gen_range(205.0..245.0);
    let ink: f64 = rng.gen_range(15.0..70.0);
    let pixels = mask
        .iter()
        .map(|&on| {
            let base = if on { ink } else { paper };
            (base + symmetric(rng, style.noise)).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(CANVAS, CANVAS, pixels).expect("canvas dimensions are fixed")
}

/// Render one jittered letter directly as a binary ink mask.
pub fn render_binary(label: Label, rng: &mut impl Rng, style: &Style) -> BinaryImage {
    let bits = ink_mask(label, rng, style).into_iter().map(u8::from).collect();
    BinaryImage::new(CANVAS, CANVAS, bits).expect("canvas dimensions are fixed")
}

/// `per_class` samples of each of the 32 letters, class-major, fully preprocessed.
pub fn corpus(per_class: usize, seed: u64) -> Result<Dataset> {
    corpus_with_style(per_class, seed, &Style::default())
}

pub fn corpus_with_style(per_class: usize, seed: u64, style: &Style) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset::default();
    for label in Label::all() {
        for i in 0..per_class {
            let page = render_gray(label, &mut rng, style);
            let glyph = pipeline::preprocess(&Input::Gray(page), Threshold::Otsu)?;
            let writer = format!("synth-{seed}-{i}");
            ds.push(Sample::new(label, glyph, Some(writer), Source::Synthetic)?);
        }
    }
    Ok(ds)
}

/// Binary pages of random letters, for exercising the thinning stage.
pub fn binary_pages(count: usize, seed: u64) -> Vec<BinaryImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let label = Label::new(rng.gen_range(0..NUM_LABELS)).expect("in range");
            render_binary(label, &mut rng, &Style::default())
        })
        .collect()
}
