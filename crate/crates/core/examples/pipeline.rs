//! The whole batch run for a config file, as the command-line tool does it.
//!
//! ```text
//! cargo run --release --example pipeline -- fixtures/demo/config.json /tmp/demo-out
//! ```

use std::path::{Path, PathBuf};

use skybeam::config::RunConfig;
use skybeam::pipeline::{run_choice, run_coverage, run_schedule, validate};

fn main() -> skybeam::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/config.json"));
    let mut cfg = RunConfig::load(&config)?;
    cfg.out_dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("skybeam-pipeline"));

    let v = validate(&cfg)?;
    println!("config {}", v["config_hash"].as_str().unwrap_or_default());
    let mut files = run_coverage(&cfg)?.files;
    files.extend(run_schedule(&cfg)?.files);
    files.extend(run_choice(&cfg)?.files);
    println!("{} artifacts in {}", files.len(), cfg.out_path().display());
    Ok(())
}
