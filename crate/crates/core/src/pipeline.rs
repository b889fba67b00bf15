//! End-to-end recognition: smooth → binarize → thin → normalize → (pool) → classify.

use crate::dataset::{self, Label};
use crate::error::{Error, Result};
use crate::mlp::Mlp;
use crate::raster::{self, BinaryImage, GrayImage, Threshold};
use crate::skeleton::{self, Glyph, GLYPH_SIDE, POOLED_SIDE};

/// A raster entering the pipeline. Binary input (canvas, PBM) skips smoothing and thresholding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Gray(GrayImage),
    Binary(BinaryImage),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig<'a> {
    pub threshold: Threshold,
    /// Feed the 10×10 pooled glyph instead of the 30×30 one.
    pub use_pool: bool,
    pub model: &'a Mlp,
}

impl<'a> PipelineConfig<'a> {
    /// Pooling follows the model's input width; grayscale input is thresholded with Otsu.
    pub fn for_model(model: &'a Mlp) -> Result<Self> {
        let cfg = PipelineConfig {
            threshold: Threshold::Otsu,
            use_pool: model.n_in() == POOLED_SIDE * POOLED_SIDE,
            model,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let side = if self.use_pool { POOLED_SIDE } else { GLYPH_SIDE };
        if self.model.n_in() != side * side {
            return Err(Error::invalid(format!(
                "model takes {} inputs but the pipeline produces {side}x{side} glyphs",
                self.model.n_in()
            )));
        }
        if self.model.n_out() != dataset::CODE_BITS {
            return Err(Error::invalid(format!(
                "model has {} outputs, expected {}",
                self.model.n_out(),
                dataset::CODE_BITS
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recognition {
    pub label: Label,
    pub outputs: Vec<f64>,
    /// The glyph actually presented to the network.
    pub glyph: Glyph,
}

/// Binarize grayscale input (after smoothing); binary input passes through.
pub fn binarized(input: &Input, threshold: Threshold) -> BinaryImage {
    match input {
        Input::Gray(img) => raster::binarize(&raster::gaussian_smooth(img), threshold),
        Input::Binary(img) => img.clone(),
    }
}

/// Everything up to the 30×30 normalized glyph.
pub fn preprocess(input: &Input, threshold: Threshold) -> Result<Glyph> {
    skeleton::normalize(&skeleton::thin(&binarized(input, threshold)))
}

/// Network input for a 30×30 glyph, pooled when the network takes 100 inputs.
pub fn network_input(glyph: &Glyph, n_in: usize) -> Result<Vec<f64>> {
    match (glyph.side(), n_in) {
        (GLYPH_SIDE, n) if n == GLYPH_SIDE * GLYPH_SIDE => Ok(glyph.to_input()),
        (GLYPH_SIDE, n) if n == POOLED_SIDE * POOLED_SIDE => Ok(skeleton::pool(glyph)?.to_input()),
        (side, n) if n == side * side => Ok(glyph.to_input()),
        (side, n) => Err(Error::invalid(format!(
            "a {side}x{side} glyph cannot feed a network with {n} inputs"
        ))),
    }
}

pub fn recognize(input: &Input, cfg: &PipelineConfig<'_>) -> Result<Recognition> {
    cfg.check()?;
    let normalized = preprocess(input, cfg.threshold)?;
    let glyph = if cfg.use_pool {
        skeleton::pool(&normalized)?
    } else {
        normalized
    };
    let outputs = cfg.model.forward(&glyph.to_input())?.output;
    let label = dataset::decode_output(&outputs)?;
    Ok(Recognition {
        label,
        outputs,
        glyph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stroke_image() -> GrayImage {
        let mut img = GrayImage::filled(40, 40, 230).unwrap();
        for r in 8..32 {
            for c in 18..23 {
                img.set(r, c, 20);
            }
        }
        for c in 10..30 {
            for r in 28..32 {
                img.set(r, c, 20);
            }
        }
        img
    }

    #[test]
    fn blank_input_is_nothing_written() {
        let net = Mlp::init(900, 4, 5, 0).unwrap();
        let cfg = PipelineConfig::for_model(&net).unwrap();
        let blank = Input::Gray(GrayImage::filled(20, 20, 255).unwrap());
        let err = recognize(&blank, &cfg).unwrap_err();
        assert!(matches!(err, Error::EmptyGlyph));
        assert_eq!(err.to_string(), "nothing written");
        let blank = Input::Binary(BinaryImage::blank(30, 30).unwrap());
        assert!(matches!(recognize(&blank, &cfg), Err(Error::EmptyGlyph)));
    }

    #[test]
    fn stages_compose_in_order() {
        let img = stroke_image();
        let net = Mlp::init(900, 4, 5, 1).unwrap();
        let cfg = PipelineConfig::for_model(&net).unwrap();
        let rec = recognize(&Input::Gray(img.clone()), &cfg).unwrap();
        let by_hand = skeleton::normalize(&skeleton::thin(&raster::binarize(
            &raster::gaussian_smooth(&img),
            Threshold::Otsu,
        )))
        .unwrap();
        assert_eq!(rec.glyph, by_hand);
        assert_eq!(rec.outputs, net.forward(&by_hand.to_input()).unwrap().output);
        assert_eq!(recognize(&Input::Gray(img), &cfg).unwrap(), rec);
    }

    #[test]
    fn pooled_model_gets_pooled_glyph() {
        let img = stroke_image();
        let net = Mlp::init(100, 4, 5, 1).unwrap();
        let cfg = PipelineConfig::for_model(&net).unwrap();
        assert!(cfg.use_pool);
        let rec = recognize(&Input::Gray(img.clone()), &cfg).unwrap();
        assert_eq!(rec.glyph.side(), 10);
        let full = preprocess(&Input::Gray(img), Threshold::Otsu).unwrap();
        assert_eq!(rec.glyph, skeleton::pool(&full).unwrap());
    }

    #[test]
    fn mismatched_model_rejected() {
        let net = Mlp::init(64, 4, 5, 1).unwrap();
        assert!(PipelineConfig::for_model(&net).is_err());
        let net = Mlp::init(900, 4, 3, 1).unwrap();
        assert!(PipelineConfig::for_model(&net).is_err());
        let net = Mlp::init(900, 4, 5, 1).unwrap();
        let cfg = PipelineConfig { threshold: Threshold::Otsu, use_pool: true, model: &net };
        assert!(recognize(&Input::Gray(stroke_image()), &cfg).is_err());
    }

    #[test]
    fn network_input_sizes() {
        let g = Glyph::blank(30);
        assert_eq!(network_input(&g, 900).unwrap().len(), 900);
        assert_eq!(network_input(&g, 100).unwrap().len(), 100);
        assert!(network_input(&g, 50).is_err());
    }
}
