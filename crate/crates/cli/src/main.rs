use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use agrobench::config::load_config;
use agrobench::estimation::FilterParams;
use agrobench::segnet::{SceneSpec, TrainConfig};
use agrobench_cli::commands::{self, DataSource, FiltersDemo};
use agrobench_cli::server::{self, ServeOptions};
use anyhow::Result;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agrobench", version, about = "Field-robot simulation, heading filters and crop/weed segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SceneArgs {
    /// Number of synthetic scenes.
    #[arg(long)]
    count: Option<usize>,
    /// Seed of the first synthetic scene.
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 48)]
    height: usize,
    #[arg(long, default_value_t = 0.02)]
    weed_fraction: f64,
}

impl SceneArgs {
    fn source(&self, data: &str, default_seed: u64, default_count: usize) -> DataSource {
        let spec = SceneSpec {
            width: self.width,
            height: self.height,
            weed_fraction: self.weed_fraction,
        };
        DataSource::parse(
            data,
            self.data_seed.unwrap_or(default_seed),
            self.count.unwrap_or(default_count),
            spec,
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a world config and write heading.csv, trajectory.csv and ticks.jsonl.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the heading filters on a noisy constant heading.
    FiltersDemo {
        #[arg(long, default_value_t = 3.0)]
        truth: f64,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 1e-5)]
        q: f64,
        /// Measurement variance; defaults to sigma^2.
        #[arg(long)]
        r: Option<f64>,
        /// Directory for filters_demo.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the segmentation network from scratch.
    Train {
        /// `synthetic` or a directory with images/ and masks/.
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "wcce")]
        loss: String,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 4)]
        batch: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
    },
    /// Evaluate a checkpoint and print the metrics table.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        /// `synthetic` or a directory with images/ and masks/.
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "SegNet 10-ch")]
        label: String,
        /// Also write the row as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        scenes: SceneArgs,
    },
    /// Segment one image.
    Segment {
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value = "segnet")]
        segmenter: String,
        /// Class-index mask PNG (0 soil, 1 crop, 2 weed).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Colour rendering (soil blue, crop green, weed red).
        #[arg(long)]
        color: Option<PathBuf>,
    },
    /// Write synthetic scenes as a dataset directory.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
    },
    /// Run the simulation live with HTTP and WebSocket telemetry.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, out } => {
            let s = commands::simulate(&config, &out)?;
            println!("{} ticks, route done: {}", s.ticks, s.done);
            for f in s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::FiltersDemo {
            truth,
            sigma,
            steps,
            seed,
            window,
            q,
            r,
            out,
        } => {
            let demo = FiltersDemo {
                truth,
                sigma,
                steps,
                seed,
                params: FilterParams {
                    median_window: window,
                    kalman_q: q,
                    kalman_r: r.unwrap_or(sigma * sigma),
                    angular: true,
                },
                out,
            };
            println!("filter\trmse [rad]");
            for (name, rmse) in commands::filters_demo(&demo)? {
                println!("{name}\t{rmse:.5}");
            }
        }
        Command::Train {
            data,
            loss,
            epochs,
            seed,
            lr,
            batch,
            out,
            scenes,
        } => {
            let source = scenes.source(&data, 1000, 32);
            let cfg = TrainConfig {
                epochs,
                learning_rate: lr,
                batch_size: batch,
                seed,
            };
            let report = commands::train_model(&source, &loss, &cfg, &out)?;
            if let Some(w) = report.class_weights {
                println!("class weights soil/crop/weed: {:.4} {:.4} {:.4}", w[0], w[1], w[2]);
            }
            for (i, l) in report.history.iter().enumerate() {
                println!("epoch {:>3}  loss {l:.5}", i + 1);
            }
            println!("wrote {}", out.display());
        }
        Command::Eval {
            ckpt,
            data,
            label,
            csv,
            scenes,
        } => {
            let source = scenes.source(&data, 2000, 16);
            print!("{}", commands::eval_model(&ckpt, &source, &label, csv.as_deref())?);
        }
        Command::Segment {
            ckpt,
            image,
            segmenter,
            out,
            color,
        } => {
            let f = commands::segment_image(ckpt.as_deref(), &segmenter, &image, out.as_deref(), color.as_deref())?;
            println!("soil {:.4}  crop {:.4}  weed {:.4}", f[0], f[1], f[2]);
        }
        Command::GenData { out, scenes } => {
            let spec = SceneSpec {
                width: scenes.width,
                height: scenes.height,
                weed_fraction: scenes.weed_fraction,
            };
            let count = scenes.count.unwrap_or(16);
            commands::generate_dataset(&out, scenes.data_seed.unwrap_or(2000), count, &spec)?;
            println!("wrote {count} scenes to {}", out.display());
        }
        Command::Serve {
            config,
            port,
            host,
            speed,
        } => {
            let cfg = load_config(&config)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let srv = server::start(cfg, SocketAddr::new(host, port), ServeOptions { speed }).await?;
                println!("serving on http://{}  (GET /config, GET /state, /ws)", srv.addr());
                srv.wait().await
            })?;
        }
    }
    Ok(())
}
