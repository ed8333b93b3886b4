//! The file-producing commands behind the `chpd` binary, driven from code.
//!
//! ```bash
//! cargo run --release --example run_harness -- /tmp/chp-run
//! ```

use std::path::PathBuf;

use chp_dispatch::config::Config;
use chp_dispatch::harness::{cmd_evaluate, cmd_gen_profiles, cmd_train, PolicyKind, RunContext};

/// Writes profiles, trained value functions and one evaluation into `out`.
pub fn run_example_in(out: PathBuf) -> chp_dispatch::Result<Vec<String>> {
    let mut config = Config::default();
    config.training.iterations = 20;
    let ctx = RunContext::new(config, None, out.clone());
    cmd_gen_profiles(&ctx, 2)?;
    cmd_train(&ctx)?;
    let summary = cmd_evaluate(&ctx, PolicyKind::Adp, 2, None)?;
    println!("adp on 2 days: mean cost {:.2} $", summary.mean_cost);

    let mut files: Vec<String> = std::fs::read_dir(&out)
        .map_err(|source| chp_dispatch::Error::Io {
            path: out.display().to_string(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("wrote {}", files.join(", "));
    Ok(files)
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/example".into());
    run_example_in(out.into()).map(|_| ())
}
