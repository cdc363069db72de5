use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lplc2::config::ModelConfig;
use lplc2::io::{dump_motion_fields, emit_events, field_to_png, ingest};
use lplc2::pipeline::Detector;
use lplc2::stimulus::{render, scenario, StimulusSpec};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "lplc2", version, about = "Multi-target looming detection on grayscale frame streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the detector over a frame sequence and write detection events.
    Detect(DetectArgs),
    /// Render a synthetic stimulus to numbered grayscale images.
    RenderStimulus(RenderArgs),
    /// Render a built-in scenario and detect on it in one step.
    RunScenario(RunScenarioArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration document (flat TOML key/value).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. --set t_a=0.65.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Input frame rate in Hz; sets the model's frame interval.
    #[arg(long)]
    fps: Option<f64>,
    /// Ensemble variant.
    #[arg(long)]
    variant: Option<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<ModelConfig> {
        let doc = match &self.config {
            Some(path) => {
                Some(std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
            }
            None => None,
        };
        let mut overrides = Vec::new();
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(fps) = self.fps {
            if fps <= 0.0 {
                bail!("--fps must be positive");
            }
            overrides.push(("frame_interval_ms".into(), format!("{}", 1000.0 / fps)));
        }
        if let Some(variant) = &self.variant {
            overrides.push(("variant".into(), variant.clone()));
        }
        Ok(ModelConfig::load(doc.as_deref(), &overrides)?)
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Directory of numbered images, or a raw concatenated-frame file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for events.jsonl and per-field CSVs.
    #[arg(long)]
    out: PathBuf,
    /// Frame dimensions for raw input, e.g. 320x240.
    #[arg(long, value_name = "WxH")]
    raw_dims: Option<String>,
    /// Also dump the per-frame local-motion maps.
    #[arg(long)]
    dump_fields: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct RenderArgs {
    /// Built-in scenario name (see run-scenario --list).
    #[arg(long, conflicts_with = "spec")]
    scenario: Option<String>,
    /// Stimulus spec document (TOML).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunScenarioArgs {
    /// Built-in scenario name.
    #[arg(long, required_unless_present = "list")]
    scenario: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// List the built-in scenario names and exit.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    dump_fields: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X']).context("--raw-dims expects WIDTHxHEIGHT")?;
    Ok((w.parse().context("bad width")?, h.parse().context("bad height")?))
}

fn load_spec(args: &RenderArgs) -> Result<StimulusSpec> {
    match (&args.scenario, &args.spec) {
        (Some(name), None) => scenario(name).with_context(|| format!("unknown scenario `{name}`")),
        (None, Some(path)) => {
            let doc = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(StimulusSpec::from_toml_str(&doc)?)
        }
        _ => bail!("give exactly one of --scenario or --spec"),
    }
}

fn detect_frames(frames: &[lplc2::ScalarField], config: ModelConfig, out: &PathBuf, dump: bool) -> Result<()> {
    let mut detector = Detector::new(config);
    let mut events = Vec::new();
    for frame in frames {
        if let Some((event, motion)) = detector.process_frame_detailed(frame)? {
            if dump {
                dump_motion_fields(out, event.frame_index, &motion)?;
            }
            events.push(event);
        }
    }
    emit_events(&events, out)?;
    let live = events.last().map_or(0, |ev| ev.afs.len());
    let total_ids = events.iter().map(|ev| ev.created.len()).sum::<usize>();
    println!(
        "processed {} frames: {} events, {} attention fields created, {} live at end",
        frames.len(),
        events.len(),
        total_ids,
        live
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Detect(args) => {
            let raw_dims = args.raw_dims.as_deref().map(parse_dims).transpose()?;
            let frames = ingest(&args.input, raw_dims)?;
            let config = args.config.build()?;
            detect_frames(&frames, config, &args.out, args.dump_fields)
        }
        Command::RenderStimulus(args) => {
            let spec = load_spec(&args)?;
            let frames = render(&spec)?;
            std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
            for (t, frame) in frames.iter().enumerate() {
                field_to_png(frame, &args.out.join(format!("frame_{t:05}.png")))?;
            }
            println!("wrote {} frames to {}", frames.len(), args.out.display());
            Ok(())
        }
        Command::RunScenario(args) => {
            if args.list {
                for name in lplc2::builtin_scenarios().keys() {
                    println!("{name}");
                }
                return Ok(());
            }
            let name = args.scenario.as_deref().expect("clap enforces presence");
            let spec = scenario(name).with_context(|| format!("unknown scenario `{name}`"))?;
            let mut config = args.config.build()?;
            if args.config.fps.is_none() {
                config.frame_interval_ms = 1000.0 / spec.fps;
            }
            let frames = render(&spec)?;
            let out = args.out.clone().context("--out is required to run a scenario")?;
            detect_frames(&frames, config, &out, args.dump_fields)
        }
    }
}
