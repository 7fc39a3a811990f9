//! Camera frames to label masks.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CameraConfig, CameraSource, WorldConfig};
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::segnet::{
    generate_synthetic_scene, load_checkpoint, predict_mask, Class, LabelMask, SceneSpec,
    SegNetParams, NUM_CLASSES,
};
use crate::vision::{build_channel_stack, list_images, load_rgb, otsu_vegetation_mask, Channel, ChannelStack, RgbImage};

/// Produces a label mask from a channel stack.
pub trait Segmenter: Send {
    fn name(&self) -> &'static str;
    fn segment(&self, stack: &ChannelStack) -> Result<LabelMask>;
}

#[derive(Debug, Clone, Default)]
pub struct SegmenterArgs {
    pub params: Option<SegNetParams>,
}

pub type SegmenterRegistry = Registry<dyn Segmenter, SegmenterArgs>;

/// `segnet` (needs parameters) and `otsu` (ExG threshold, vegetation as crop).
pub fn segmenter_registry() -> SegmenterRegistry {
    let mut reg = SegmenterRegistry::new("segmenter");
    reg.register("segnet", |a: &SegmenterArgs| {
        let params = a
            .params
            .clone()
            .ok_or_else(|| Error::invalid("segnet segmenter needs a checkpoint"))?;
        Ok(Box::new(SegNetSegmenter { params }))
    });
    reg.register("otsu", |_| Ok(Box::new(OtsuSegmenter)));
    reg
}

pub struct SegNetSegmenter {
    params: SegNetParams,
}

impl SegNetSegmenter {
    pub fn new(params: SegNetParams) -> Self {
        Self { params }
    }
}

impl Segmenter for SegNetSegmenter {
    fn name(&self) -> &'static str {
        "segnet"
    }

    fn segment(&self, stack: &ChannelStack) -> Result<LabelMask> {
        predict_mask(&self.params, stack)
    }
}

/// Classical baseline. It cannot tell crop from weed, so all vegetation is
/// labelled crop.
#[derive(Debug, Clone, Copy, Default)]
pub struct OtsuSegmenter;

impl Segmenter for OtsuSegmenter {
    fn name(&self) -> &'static str {
        "otsu"
    }

    fn segment(&self, stack: &ChannelStack) -> Result<LabelMask> {
        let (w, h) = (stack.width(), stack.height());
        let veg = otsu_vegetation_mask(stack.plane(Channel::ExG), w, h);
        let data = veg
            .data
            .iter()
            .map(|&v| if v != 0 { Class::Crop as u8 } else { Class::Soil as u8 })
            .collect();
        LabelMask::new(w, h, data)
    }
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub index: usize,
    pub name: String,
    pub image: RgbImage,
    /// Ground truth when the source knows it.
    pub truth: Option<LabelMask>,
}

#[derive(Debug, Clone)]
pub enum FrameSource {
    Synthetic { seed: u64, spec: SceneSpec, next: usize },
    Directory { paths: Vec<PathBuf>, next: usize },
}

impl FrameSource {
    pub fn from_config(source: &CameraSource, seed: u64) -> Result<Self> {
        Ok(match source {
            CameraSource::Synthetic {
                width,
                height,
                weed_fraction,
            } => FrameSource::Synthetic {
                seed,
                spec: SceneSpec {
                    width: *width,
                    height: *height,
                    weed_fraction: *weed_fraction,
                },
                next: 0,
            },
            CameraSource::Directory { path } => {
                let paths = list_images(path)?;
                if paths.is_empty() {
                    return Err(Error::Empty("image directory"));
                }
                FrameSource::Directory { paths, next: 0 }
            }
        })
    }

    /// Next frame, or `None` once a directory source is exhausted.
    /// Synthetic sources never run dry.
    pub fn next_frame(&mut self) -> Result<Option<Frame>> {
        match self {
            FrameSource::Synthetic { seed, spec, next } => {
                let index = *next;
                *next += 1;
                let scene_seed = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let (image, truth) = generate_synthetic_scene(scene_seed, spec)?;
                Ok(Some(Frame {
                    index,
                    name: format!("synthetic-{index:05}"),
                    image,
                    truth: Some(truth),
                }))
            }
            FrameSource::Directory { paths, next } => {
                let Some(path) = paths.get(*next) else {
                    return Ok(None);
                };
                let index = *next;
                *next += 1;
                Ok(Some(Frame {
                    index,
                    name: path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    image: load_rgb(path)?,
                    truth: None,
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassFractions {
    pub soil: f64,
    pub crop: f64,
    pub weed: f64,
}

impl From<[f64; NUM_CLASSES]> for ClassFractions {
    fn from(f: [f64; NUM_CLASSES]) -> Self {
        Self {
            soil: f[Class::Soil as usize],
            crop: f[Class::Crop as usize],
            weed: f[Class::Weed as usize],
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrameResult {
    pub index: usize,
    pub name: String,
    pub mask: LabelMask,
    pub fractions: ClassFractions,
    pub truth: Option<LabelMask>,
}

pub struct SegmentationPipeline {
    source: FrameSource,
    segmenter: Box<dyn Segmenter>,
    pixel_noise: f64,
    rng: ChaCha8Rng,
    exhausted: bool,
}

impl SegmentationPipeline {
    pub fn new(source: FrameSource, segmenter: Box<dyn Segmenter>, pixel_noise: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(5);
        Self {
            source,
            segmenter,
            pixel_noise,
            rng,
            exhausted: false,
        }
    }

    /// Builds source and segmenter from the camera section. `params` wins
    /// over `camera.checkpoint` when both are present.
    pub fn from_config(camera: &CameraConfig, seed: u64, params: Option<SegNetParams>) -> Result<Self> {
        let params = match (params, &camera.checkpoint) {
            (Some(p), _) => Some(p),
            (None, Some(path)) if camera.segmenter == "segnet" => Some(load_checkpoint(path)?),
            (None, _) => None,
        };
        let segmenter = segmenter_registry().create(&camera.segmenter, &SegmenterArgs { params })?;
        let source = FrameSource::from_config(&camera.source, seed)?;
        Ok(Self::new(source, segmenter, camera.pixel_noise, seed))
    }

    pub fn segmenter_name(&self) -> &'static str {
        self.segmenter.name()
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Processes one frame. Returns `None` and raises the exhausted flag
    /// when the source has nothing left.
    pub fn process_next(&mut self) -> Result<Option<FrameResult>> {
        if self.exhausted {
            return Ok(None);
        }
        let Some(mut frame) = self.source.next_frame()? else {
            self.exhausted = true;
            return Ok(None);
        };
        frame.image.add_pixel_noise(self.pixel_noise, &mut self.rng);
        let stack = build_channel_stack(&frame.image);
        let mask = self.segmenter.segment(&stack)?;
        let fractions = mask.class_fractions().into();
        Ok(Some(FrameResult {
            index: frame.index,
            name: frame.name,
            mask,
            fractions,
            truth: frame.truth,
        }))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub frames: Vec<FrameResult>,
    pub exhausted: bool,
}

/// Runs the camera over the configured duration: one frame at t = 0 and
/// every `camera.interval` after, stopping early if the source runs out.
pub fn run_segmentation_pipeline(cfg: &WorldConfig, params: Option<SegNetParams>) -> Result<PipelineRun> {
    let mut pipe = SegmentationPipeline::from_config(&cfg.camera, cfg.seed, params)?;
    let slots = (cfg.sim.duration / cfg.camera.interval + 1e-9).floor() as usize + 1;
    let mut frames = Vec::new();
    for _ in 0..slots {
        match pipe.process_next()? {
            Some(f) => frames.push(f),
            None => break,
        }
    }
    Ok(PipelineRun {
        frames,
        exhausted: pipe.is_exhausted(),
    })
}
