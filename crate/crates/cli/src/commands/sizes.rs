use serde::Serialize;
use topcov::analysis::{coverage_by_group, quartile_split, GroupMeasure};
use topcov::models::{topic_sizes, train_fixed_lda, FixedLdaConfig, FixedTopicSpec};

use crate::commands::load_matcher;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_file, write_json, Meta, Table};
use crate::pool::{check_against_corpus, load_corpus, load_models, load_refset};
use crate::SizesArgs;

#[derive(Serialize)]
struct GroupCoverage {
    model_id: String,
    aucdc: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup: Option<Vec<Option<f64>>>,
}

#[derive(Serialize)]
struct QuartileReport {
    /// Reference-topic indices per quartile, smallest sizes first.
    groups: Vec<Vec<usize>>,
    size_ranges: Vec<Option<(usize, usize)>>,
    coverage: Vec<GroupCoverage>,
}

pub fn run(cfg: &RunConfig, args: &SizesArgs) -> CliResult<()> {
    let mut c = cfg.sizes.clone();
    c.extra_topics = args.extra_topics.unwrap_or(c.extra_topics);
    c.iters = args.iters.unwrap_or(c.iters);
    c.eta = args.eta.unwrap_or(c.eta);

    let corpus = load_corpus(&args.corpus)?;
    let refset = load_refset(&args.refset)?;
    let models = load_models(&args.models)?;
    check_against_corpus(&models, Some(&refset), &corpus)?;
    let matcher = args.matcher.as_deref().map(load_matcher).transpose()?;
    if matcher.is_some() && models.is_empty() {
        return Err(CliError::usage("--matcher given without --models"));
    }

    let mut spec = FixedTopicSpec::from_reference(&refset, c.eta)?;
    if !c.doc_prior {
        spec.theta_prior.clear();
    }
    let fit = train_fixed_lda(&corpus, &spec, &FixedLdaConfig { extra_topics: c.extra_topics, beta: c.beta, iters: c.iters, seed: cfg.seed })?;
    let sizes = topic_sizes(&fit.theta, c.threshold);
    let groups = quartile_split(&sizes)?;
    let mut quartile_of = vec![0; sizes.len()];
    for (q, g) in groups.iter().enumerate() {
        for &i in g {
            quartile_of[i] = q + 1;
        }
    }

    let mut table = Table::new(&["ref_index", "label", "size", "quartile"]);
    for (i, &s) in sizes.iter().enumerate() {
        let label = refset.topics[i].label.clone().unwrap_or_default();
        table.push(vec![i.to_string(), label, s.to_string(), quartile_of[i].to_string()]);
    }

    let mut coverage = Vec::new();
    for m in &models {
        let aucdc = coverage_by_group(&m.model, &refset, &groups, GroupMeasure::AuCdc)?;
        let sup = matcher.as_ref().map(|mt| coverage_by_group(&m.model, &refset, &groups, GroupMeasure::Supervised(mt))).transpose()?;
        coverage.push(GroupCoverage { model_id: m.id.clone(), aucdc, sup });
    }
    let size_ranges = groups
        .iter()
        .map(|g| {
            let s: Vec<usize> = g.iter().map(|&i| sizes[i]).collect();
            Some((*s.iter().min()?, *s.iter().max()?))
        })
        .collect();
    let report = QuartileReport { groups: groups.to_vec(), size_ranges, coverage };

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("sizes", vec![cfg.seed], &c)?;
    meta.input("corpus", &args.corpus)?;
    meta.input("refset", &args.refset)?;
    meta.input("models", &args.models)?;
    meta.input("matcher", &args.matcher)?;

    let path = args.out.join("sizes.csv");
    table.write(&path)?;
    meta.output(&path);
    let path = args.out.join("refset_sized.json");
    write_file(&path, &refset.clone().with_sizes(sizes)?.to_json()?)?;
    if load_refset(&path)?.sizes.is_none() {
        return Err(CliError::new("validation", "sizes did not read back").at(&path));
    }
    meta.output(&path);
    let path = args.out.join("quartiles.json");
    write_json(&path, &report)?;
    meta.output(&path);
    meta.write(&args.out)
}
