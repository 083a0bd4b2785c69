use topcov::corpus::tfidf;
use topcov::models::{train_lda_seeds, train_nmf_seeds, LdaConfig, NmfConfig};
use topcov::TopicModel;

use crate::config::{ModelKind, RunConfig};
use crate::error::{with_path, CliError, CliResult};
use crate::output::{ensure_dir, write_file, Meta};
use crate::pool::load_corpus;
use crate::TrainArgs;

pub fn run(cfg: &RunConfig, args: &TrainArgs) -> CliResult<()> {
    let mut c = cfg.train.clone();
    c.model = args.model.unwrap_or(c.model);
    c.topics = args.topics.unwrap_or(c.topics);
    c.iters = args.iters.unwrap_or(c.iters);
    if let Some(s) = &args.seeds {
        c.seeds = s.clone();
    }
    if args.alpha.is_some() {
        c.alpha = args.alpha;
    }
    let seeds = if c.seeds.is_empty() { vec![cfg.seed] } else { c.seeds.clone() };
    let mut unique = seeds.clone();
    unique.sort_unstable();
    unique.dedup();
    if unique.len() != seeds.len() {
        return Err(CliError::usage("duplicate seeds"));
    }

    let corpus = load_corpus(&args.corpus)?;
    let models = match c.model {
        ModelKind::Lda => {
            let lda = LdaConfig { num_topics: c.topics, alpha: c.alpha, beta: c.beta, warmup: c.warmup, iters: c.iters, seed: 0 };
            train_lda_seeds(&corpus, &lda, &seeds)?
        }
        ModelKind::Nmf => {
            let nmf = NmfConfig { num_topics: c.topics, max_iters: c.nmf_max_iters, tol: c.nmf_tol, seed: 0 };
            train_nmf_seeds(&tfidf(&corpus), &nmf, &seeds)?
        }
    };

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("train", seeds.clone(), &c)?;
    meta.input("corpus", &args.corpus)?;
    for (m, seed) in models.iter().zip(&seeds) {
        let path = args.out.join(format!("{}-t{}-s{seed}.json", c.model.name(), c.topics));
        write_file(&path, &m.to_json()?)?;
        let back = with_path(&path, TopicModel::load(&path))?;
        if back.num_topics() != c.topics {
            return Err(CliError::new("validation", "model file does not read back").at(&path));
        }
        meta.output(&path);
    }
    meta.write(&args.out)
}
