use topcov::coverage::{aucdc, build_cdc_curve, render_svg, supervised_coverage, topic_score_cos, topic_score_sup, CdcCurve};
use topcov::matcher::Matcher;

use crate::commands::load_matcher;
use crate::config::{CoverageMeasure, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt6, fmt6_opt, write_file, Meta, Table, NA};
use crate::pool::{check_dims, load_models, load_refset};
use crate::CoverageArgs;

pub fn run(cfg: &RunConfig, args: &CoverageArgs) -> CliResult<()> {
    let mut c = cfg.coverage.clone();
    if let Some(m) = &args.measures {
        c.measures = m.clone();
    }
    if c.measures.is_empty() {
        return Err(CliError::usage("no coverage measures requested"));
    }
    let want_aucdc = c.measures.contains(&CoverageMeasure::Aucdc);
    let want_sup = c.measures.contains(&CoverageMeasure::Sup);
    let matcher = match (&args.matcher, want_sup) {
        (Some(p), _) => Some(load_matcher(p)?),
        (None, true) => return Err(CliError::usage("supervised coverage needs --matcher")),
        (None, false) => None,
    };
    let matcher = matcher.as_ref().filter(|_| want_sup).map(|m| m as &dyn Matcher);

    let models = load_models(&args.models)?;
    let refset = load_refset(&args.refset)?;
    if refset.is_empty() {
        return Err(CliError::incompatible("empty reference set").at(&args.refset));
    }
    let (v, n) = (refset.topics[0].word_weights().dim(), refset.topics[0].doc_weights().dim());
    for m in &models {
        check_dims(&m.id, &m.model.topics, v, n)?;
    }

    let mut summary = Table::new(&["model_id", "model_type", "num_topics", "aucdc", "sup"]);
    let mut per_topic = Table::new(&["model_id", "topic_index", "cos", "sup"]);
    let mut curves: Vec<(String, CdcCurve)> = Vec::new();
    for m in &models {
        let curve = build_cdc_curve(&m.model, &refset)?;
        let au = want_aucdc.then(|| aucdc(&curve));
        let sup = matcher.map(|mt| supervised_coverage(&m.model, &refset, mt)).transpose()?;
        summary.push(vec![m.id.clone(), m.model.model_type.to_string(), m.model.num_topics().to_string(), fmt6_opt(au), fmt6_opt(sup)]);
        for (i, t) in m.model.topics.iter().enumerate() {
            let cos = topic_score_cos(t, &refset)?;
            let s = match matcher {
                Some(mt) => topic_score_sup(t, &refset, mt)?.to_string(),
                None => NA.into(),
            };
            per_topic.push(vec![m.id.clone(), i.to_string(), fmt6(cos), s]);
        }
        curves.push((m.id.clone(), curve));
    }

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("coverage", vec![], &c)?;
    meta.input("models", &args.models)?;
    meta.input("refset", &args.refset)?;
    meta.input("matcher", &args.matcher)?;
    let path = args.out.join("coverage.csv");
    summary.write(&path)?;
    meta.output(&path);
    let path = args.out.join("topic_scores.csv");
    per_topic.write(&path)?;
    meta.output(&path);
    for (id, curve) in &curves {
        let path = args.out.join(format!("cdc_{id}.csv"));
        write_file(&path, curve.to_csv().as_bytes())?;
        meta.output(&path);
    }
    let labelled: Vec<(&str, &CdcCurve)> = curves.iter().map(|(id, c)| (id.as_str(), c)).collect();
    let path = args.out.join("cdc.svg");
    write_file(&path, render_svg(&labelled).as_bytes())?;
    meta.output(&path);
    meta.write(&args.out)
}
