use topcov::coherence::CoherenceEvaluator;
use topcov::Topic;

use crate::config::{CoherenceMeasure, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt6_opt, Meta, Table};
use crate::pool::{check_against_corpus, load_corpus, load_models};
use crate::CoherenceArgs;

pub fn run(cfg: &RunConfig, args: &CoherenceArgs) -> CliResult<()> {
    let mut c = cfg.coherence.clone();
    if let Some(m) = &args.measures {
        c.measures = m.clone();
    }
    c.top_n = args.top_n.unwrap_or(c.top_n);
    if let Some(w) = &args.windows {
        [c.window_npmi, c.window_cp, c.window_cv] = [w[0], w[1], w[2]];
    }
    if c.measures.is_empty() {
        return Err(CliError::usage("no coherence measures requested"));
    }

    let corpus = load_corpus(&args.corpus)?;
    let models = load_models(&args.models)?;
    check_against_corpus(&models, None, &corpus)?;
    let all: Vec<&Topic> = models.iter().flat_map(|m| m.model.topics.iter()).collect();
    let eval = CoherenceEvaluator::new(&corpus, &all, c.top_n, [c.window_npmi, c.window_cp, c.window_cv])?;

    let keep = |m: CoherenceMeasure, v: Option<f64>| if c.measures.contains(&m) { fmt6_opt(v) } else { fmt6_opt(None) };
    let mut table = Table::new(&["model_id", "topic_index", "npmi", "cp", "cv"]);
    for m in &models {
        for (i, s) in eval.score_all(&m.model.topics).into_iter().enumerate() {
            table.push(vec![
                m.id.clone(),
                i.to_string(),
                keep(CoherenceMeasure::Npmi, s.npmi),
                keep(CoherenceMeasure::Cp, s.cp),
                keep(CoherenceMeasure::Cv, s.cv),
            ]);
        }
    }

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("coherence", vec![], &c)?;
    meta.input("corpus", &args.corpus)?;
    meta.input("models", &args.models)?;
    let path = args.out.join("coherence.csv");
    table.write(&path)?;
    meta.output(&path);
    meta.write(&args.out)
}
