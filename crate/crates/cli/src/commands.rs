//! Subcommand bodies, kept out of `main` so tests can call them directly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use agrobench::config::load_config;
use agrobench::estimation::{filter_registry, wrap_angle, FilterParams};
use agrobench::metrics::{report_csv, report_table, ConfusionMatrix};
use agrobench::pipeline::{segmenter_registry, SegmenterArgs};
use agrobench::plot::{emit_plot_data, segmentation_csv};
use agrobench::segnet::{
    class_weights_from_frequency, generate_synthetic_scene, load_checkpoint, loss_registry,
    predict_mask, save_checkpoint, synthetic_dataset, train, LabelMask, LossArgs, Sample, SceneSpec,
    SegNetParams, TrainConfig,
};
use agrobench::sim::{run_to_end, Simulation};
use agrobench::vision::{
    build_channel_stack, load_dataset, load_rgb, save_label_mask, save_mask_color, save_rgb,
};
use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub struct SimulateSummary {
    pub ticks: usize,
    pub done: bool,
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Runs the configured world and writes its logs into `out`.
pub fn simulate(config: &Path, out: &Path) -> Result<SimulateSummary> {
    let cfg = load_config(config)?;
    let mut sim = Simulation::new(&cfg)?;
    let records = run_to_end(&mut sim)?;
    if records.is_empty() {
        bail!("simulation produced no ticks (sim.duration is shorter than sim.dt)");
    }
    let plot = emit_plot_data(&records, out)?;
    let mut files = vec![plot.heading, plot.trajectory, plot.ticks];
    if cfg.camera.enabled {
        let path = out.join("segmentation.csv");
        write_file(&path, &segmentation_csv(&records))?;
        files.push(path);
    }
    Ok(SimulateSummary {
        ticks: records.len(),
        done: records.last().is_some_and(|r| r.done),
        files,
    })
}

#[derive(Debug, Clone)]
pub struct FiltersDemo {
    pub truth: f64,
    pub sigma: f64,
    pub steps: usize,
    pub seed: u64,
    pub params: FilterParams,
    pub out: Option<PathBuf>,
}

impl Default for FiltersDemo {
    fn default() -> Self {
        let sigma = 0.1;
        Self {
            truth: 3.0,
            sigma,
            steps: 10_000,
            seed: 0,
            params: FilterParams {
                kalman_q: 1e-5,
                kalman_r: sigma * sigma,
                ..FilterParams::default()
            },
            out: None,
        }
    }
}

/// Feeds a noisy constant heading through every registered filter and
/// returns the RMSE of each, wrapped errors included.
pub fn filters_demo(d: &FiltersDemo) -> Result<Vec<(String, f64)>> {
    anyhow::ensure!(d.steps > 0, "steps must be >= 1");
    let reg = filter_registry();
    let names: Vec<&str> = reg.names().collect();
    let mut filters = names
        .iter()
        .map(|n| reg.create(n, &d.params))
        .collect::<agrobench::Result<Vec<_>>>()?;
    let noise = Normal::new(0.0, d.sigma).context("sigma must be >= 0")?;
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);

    let mut sq = vec![0.0; filters.len()];
    let mut csv = format!("step,truth,{}\n", names.join(","));
    for k in 0..d.steps {
        let z = wrap_angle(d.truth + noise.sample(&mut rng));
        let _ = write!(csv, "{k},{}", d.truth);
        for (f, acc) in filters.iter_mut().zip(&mut sq) {
            let est = f.update(z);
            *acc += wrap_angle(est - d.truth).powi(2);
            let _ = write!(csv, ",{est}");
        }
        csv.push('\n');
    }
    if let Some(dir) = &d.out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("filters_demo.csv"), &csv)?;
    }
    Ok(names
        .into_iter()
        .zip(sq)
        .map(|(n, s)| (n.to_owned(), (s / d.steps as f64).sqrt()))
        .collect())
}

/// Where training or evaluation images come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic { seed: u64, count: usize, spec: SceneSpec },
    Directory(PathBuf),
}

impl DataSource {
    /// `synthetic` selects the generator, anything else is a dataset
    /// directory with `images/` and `masks/`.
    pub fn parse(arg: &str, seed: u64, count: usize, spec: SceneSpec) -> Self {
        if arg == "synthetic" {
            DataSource::Synthetic { seed, count, spec }
        } else {
            DataSource::Directory(PathBuf::from(arg))
        }
    }

    pub fn load(&self) -> Result<Vec<(String, Sample)>> {
        match self {
            DataSource::Synthetic { seed, count, spec } => Ok(synthetic_dataset(*seed, *count, spec)?
                .into_iter()
                .enumerate()
                .map(|(i, s)| (format!("synthetic-{i:04}"), s))
                .collect()),
            DataSource::Directory(dir) => load_dataset(dir)?
                .into_iter()
                .map(|li| Ok((li.name, Sample::from_image(&li.image, li.mask)?)))
                .collect(),
        }
    }
}

pub struct TrainReport {
    pub params: SegNetParams,
    pub history: Vec<f64>,
    pub class_weights: Option<[f64; 3]>,
}

/// Trains from scratch and writes the checkpoint to `out`.
pub fn train_model(data: &DataSource, loss: &str, cfg: &TrainConfig, out: &Path) -> Result<TrainReport> {
    let samples: Vec<Sample> = data.load()?.into_iter().map(|(_, s)| s).collect();
    let masks: Vec<LabelMask> = samples.iter().map(|s| s.target.clone()).collect();
    let class_weights = match class_weights_from_frequency(&masks) {
        Ok(w) => Some(w),
        Err(e) if loss == "wcce" => return Err(e.into()),
        Err(_) => None,
    };
    let loss_fn = loss_registry().create(loss, &LossArgs { class_weights })?;
    let outcome = train(&samples, cfg, loss_fn.as_ref())?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save_checkpoint(&outcome.params, out)?;
    Ok(TrainReport {
        params: outcome.params,
        history: outcome.history,
        class_weights: class_weights.map(|w| [0, 1, 2].map(|c| w.get(c))),
    })
}

pub fn confusion(params: &SegNetParams, samples: &[Sample]) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new();
    for s in samples {
        let pred = predict_mask(params, &s.input)?;
        cm.accumulate(&pred, &s.target)?;
    }
    Ok(cm)
}

/// Table-format report of a checkpoint on a dataset.
pub fn eval_model(ckpt: &Path, data: &DataSource, label: &str, csv_out: Option<&Path>) -> Result<String> {
    let params = load_checkpoint(ckpt)?;
    let samples: Vec<Sample> = data.load()?.into_iter().map(|(_, s)| s).collect();
    let summary = confusion(&params, &samples)?.summary()?;
    if let Some(path) = csv_out {
        write_file(path, &report_csv(label, &summary))?;
    }
    Ok(report_table(label, &summary))
}

/// Segments one image. Writes the class-index mask and a colour rendering
/// when paths are given, and returns the soil/crop/weed fractions.
pub fn segment_image(
    ckpt: Option<&Path>,
    segmenter: &str,
    image: &Path,
    mask_out: Option<&Path>,
    color_out: Option<&Path>,
) -> Result<[f64; 3]> {
    let params = ckpt.map(load_checkpoint).transpose()?;
    let seg = segmenter_registry().create(segmenter, &SegmenterArgs { params })?;
    let img = load_rgb(image)?;
    let mask = seg.segment(&build_channel_stack(&img))?;
    if let Some(p) = mask_out {
        save_label_mask(&mask, p)?;
    }
    if let Some(p) = color_out {
        save_mask_color(&mask, p)?;
    }
    Ok(mask.class_fractions())
}

/// Writes `count` synthetic scenes as a dataset directory.
pub fn generate_dataset(out: &Path, first_seed: u64, count: usize, spec: &SceneSpec) -> Result<()> {
    fs::create_dir_all(out.join("images"))?;
    fs::create_dir_all(out.join("masks"))?;
    for i in 0..count {
        let (img, mask) = generate_synthetic_scene(first_seed + i as u64, spec)?;
        let stem = format!("scene_{i:04}");
        save_rgb(&img, &out.join("images").join(format!("{stem}.png")))?;
        save_label_mask(&mask, &out.join("masks").join(format!("{stem}.png")))?;
    }
    Ok(())
}
