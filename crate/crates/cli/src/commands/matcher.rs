use topcov::coverage::pair_features;
use topcov::matcher::{nested_crossvalidate, read_annotations, train_matcher, LogisticModel};

use crate::config::RunConfig;
use crate::error::{with_path, CliError, CliResult};
use crate::output::{ensure_dir, fmt6, write_file, write_json, Meta, Table};
use crate::pool::{load_models, load_refset, TopicPool};
use crate::MatcherTrainArgs;

pub fn run(cfg: &RunConfig, args: &MatcherTrainArgs) -> CliResult<()> {
    let mut c = cfg.matcher.clone();
    c.features = args.features.unwrap_or(c.features);
    c.folds = args.folds.unwrap_or(c.folds);
    let grid = c.grid();

    let models = load_models(&args.models)?;
    let refset = args.refset.as_deref().map(load_refset).transpose()?;
    let pool = TopicPool::new(&models, refset.as_ref())?;
    let file = with_path(&args.annotations, std::fs::File::open(&args.annotations))?;
    let pairs = with_path(&args.annotations, read_annotations(file))?;
    if pairs.is_empty() {
        return Err(CliError::new("parse", "no annotated pairs").at(&args.annotations));
    }

    let names = c.features.names();
    let mut header = vec!["pair_id"];
    header.extend(&names);
    header.push("label");
    let mut table = Table::new(&header);
    let mut x = Vec::with_capacity(pairs.len());
    let mut y = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let f = pair_features(pool.resolve(&p.topic_a)?, pool.resolve(&p.topic_b)?)?.select(c.features);
        let mut row = vec![p.pair_id.clone()];
        row.extend(f.iter().map(|&v| fmt6(v)));
        row.push(u8::from(p.binary).to_string());
        table.push(row);
        x.push(f);
        y.push(p.binary);
    }

    let report = nested_crossvalidate(&x, &y, &grid, c.folds, cfg.seed)?;
    let (mut model, selection) = train_matcher(&x, &y, &grid, c.folds, cfg.seed)?;
    model.feature_set = c.features;

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("matcher-train", vec![cfg.seed], &c)?;
    meta.input("annotations", &args.annotations)?;
    meta.input("models", &args.models)?;
    meta.input("refset", &args.refset)?;
    meta.input("positives", y.iter().filter(|&&b| b).count())?;
    meta.input("pairs", y.len())?;

    let features_path = args.out.join("pair_features.csv");
    table.write(&features_path)?;
    let matcher_path = args.out.join("matcher.json");
    write_file(&matcher_path, &model.to_json()?)?;
    let back = with_path(&matcher_path, LogisticModel::from_json(&with_path(&matcher_path, std::fs::read(&matcher_path))?))?;
    if back.weights.len() != c.features.len() {
        return Err(CliError::new("validation", "matcher does not read back").at(&matcher_path));
    }
    let report_path = args.out.join("cv_report.json");
    write_json(&report_path, &serde_json::json!({ "nested": report, "selection": selection }))?;
    for p in [&features_path, &matcher_path, &report_path] {
        meta.output(p);
    }
    meta.write(&args.out)
}

