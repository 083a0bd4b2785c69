use std::path::PathBuf;
use std::time::Instant;

use topcov::stability::{aucdc_stability, instance_stability, refset_stability};

use crate::commands::load_matcher;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt6, fmt6_opt, Meta, Table};
use crate::pool::{load_models, load_refset};
use crate::StabilityArgs;

fn parse_set(s: &str) -> CliResult<(String, Vec<PathBuf>)> {
    let (name, files) = s.split_once('=').ok_or_else(|| CliError::usage(format!("instance set {s:?} is not name=file,file,...")))?;
    let files: Vec<PathBuf> = files.split(',').filter(|f| !f.is_empty()).map(PathBuf::from).collect();
    if name.is_empty() || files.len() < 2 {
        return Err(CliError::usage(format!("instance set {s:?} needs a name and at least two models")));
    }
    Ok((name.to_owned(), files))
}

/// Wall time of `f` in whole milliseconds.
fn timed<T>(f: impl FnOnce() -> T) -> (T, u128) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_millis())
}

pub fn run(cfg: &RunConfig, args: &StabilityArgs) -> CliResult<()> {
    let sets = args.sets.iter().map(|s| parse_set(s)).collect::<CliResult<Vec<_>>>()?;
    let refset = args.refset.as_deref().map(load_refset).transpose()?;
    let matcher = args.matcher.as_deref().map(load_matcher).transpose()?;
    if refset.is_some() != matcher.is_some() {
        return Err(CliError::usage("reference-set stability needs both --refset and --matcher"));
    }

    let mut table = Table::new(&[
        "set_id",
        "n_instances",
        "instance_stabil",
        "refset_stabil",
        "aucdc_stabil",
        "wall_ms_instance",
        "wall_ms_aucdc",
    ]);
    for (name, files) in &sets {
        let models: Vec<_> = load_models(files)?.into_iter().map(|m| m.model).collect();
        let (inst, ms_inst) = timed(|| instance_stability(&models));
        let (au, ms_au) = timed(|| aucdc_stability(&models));
        let rs = match (&refset, &matcher) {
            (Some(r), Some(m)) => Some(refset_stability(&models, r, m)?),
            _ => None,
        };
        table.push(vec![
            name.clone(),
            models.len().to_string(),
            fmt6(inst?),
            fmt6_opt(rs),
            fmt6(au?),
            ms_inst.to_string(),
            ms_au.to_string(),
        ]);
    }

    ensure_dir(&args.out)?;
    let _ = cfg;
    let mut meta = Meta::new("stability", vec![], &serde_json::json!({}))?;
    meta.input("sets", &args.sets)?;
    meta.input("refset", &args.refset)?;
    meta.input("matcher", &args.matcher)?;
    let path = args.out.join("stability.csv");
    table.write(&path)?;
    meta.output(&path);
    meta.write(&args.out)
}
