use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use omnigraph::analysis::{feature_to_dot, rank_features, ranking_tsv};
use omnigraph::ingest::{build_corpus, pair_records, EntityLexicon, PriceSeries};
use omnigraph::io::{read_instances, write_instances};
use omnigraph::kernel::node_edge::explain;
use omnigraph::kernel::store;
use omnigraph::kernel::wl::instance_feature_maps;
use omnigraph::learn::bow::bow_features;
use omnigraph::learn::grid::{kernel_gram, BOW_NGRAM, MIN_GRID_INSTANCES};
use omnigraph::learn::{
    grid_search, stratified_split, train_svm_unchecked, ConfigScore, EvalReport, GridSpec, KernelKind, Split,
    SvmModel,
};
use omnigraph::synth::{generate, PlantSpec};
use omnigraph::{Instance, KindMask, Label, WeightConfig};

use crate::output::{
    prepare_dir, read_json, read_text, runtime, usage, write_json, write_run_config, write_text, Outcome,
};
use crate::{BuildArgs, Cli, ConfigArgs, EvalArgs, GridArgs, KernelArgs, RankArgs, SynthArgs, TrainArgs};

pub const CORPUS: &str = "corpus.jsonl";
pub const GRID: &str = "grid.json";
pub const MODEL: &str = "model.json";

fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}

fn load_corpus(path: &Path) -> Outcome<Vec<Instance>> {
    read_instances(path).map_err(usage)
}

fn load_config(args: &ConfigArgs, kernel: KernelKind) -> Outcome<WeightConfig> {
    let cfg = match &args.config {
        Some(p) => read_json::<WeightConfig>(p)?,
        None => WeightConfig::uniform(args.depth).with_walk_origin(args.walk_origin.into()),
    };
    check_config(&cfg, kernel)?;
    Ok(cfg)
}

fn check_config(cfg: &WeightConfig, kernel: KernelKind) -> Outcome {
    cfg.validate().map_err(usage)?;
    if kernel == KernelKind::Wl {
        cfg.validate_binary().map_err(usage)?;
    }
    Ok(())
}

/// Per-entity groups in entity order, or one pooled group.
fn groups(instances: Vec<Instance>, pooled: bool) -> Vec<(Option<String>, Vec<Instance>)> {
    if pooled {
        return vec![(None, instances)];
    }
    let mut by: BTreeMap<String, Vec<Instance>> = BTreeMap::new();
    for inst in instances {
        by.entry(inst.entity_id.clone()).or_default().push(inst);
    }
    by.into_iter().map(|(e, v)| (Some(e), v)).collect()
}

fn group_name(entity: &Option<String>) -> &str {
    entity.as_deref().unwrap_or("(pooled)")
}

fn labels_of(instances: &[Instance]) -> Vec<Label> {
    instances.iter().map(|i| i.label).collect()
}

fn load_prices(path: &Path, entities: &[String]) -> Outcome<BTreeMap<String, PriceSeries>> {
    let mut out = BTreeMap::new();
    if path.is_dir() {
        for e in entities {
            let file = path.join(format!("{e}.csv"));
            let f = File::open(&file).map_err(|err| usage(format!("{}: {err}", file.display())))?;
            let series = PriceSeries::from_csv(e.clone(), f).map_err(|err| usage(format!("{}: {err}", file.display())))?;
            out.insert(e.clone(), series);
        }
    } else {
        let [e] = entities else {
            return Err(usage(format!(
                "{} is a single price file; pass exactly one --entity or a directory of <entity>.csv files",
                path.display()
            )));
        };
        let f = File::open(path).map_err(|err| usage(format!("{}: {err}", path.display())))?;
        let series = PriceSeries::from_csv(e.clone(), f).map_err(|err| usage(format!("{}: {err}", path.display())))?;
        out.insert(e.clone(), series);
    }
    Ok(out)
}

pub fn build(cli: &Cli, a: &BuildArgs) -> Outcome {
    let conll = read_text(&a.conll)?;
    let frames = read_text(&a.frames)?;
    let records = pair_records(&conll, &a.conll.display().to_string(), &frames, &a.frames.display().to_string())
        .map_err(usage)?;
    let lexicon: EntityLexicon = read_json(&a.lexicon)?;
    lexicon.validate().map_err(|e| usage(format!("{}: {e}", a.lexicon.display())))?;
    let entities: Vec<String> = if a.entity.is_empty() {
        lexicon.entries.keys().cloned().collect()
    } else {
        a.entity.clone()
    };
    if let Some(e) = entities.iter().find(|e| !lexicon.contains(e)) {
        return Err(usage(format!("entity `{e}` is not in {}", a.lexicon.display())));
    }
    if !(a.threshold >= 0.0 && a.threshold.is_finite()) {
        return Err(usage(format!("threshold must be non-negative, got {}", a.threshold)));
    }
    let prices = load_prices(&a.prices, &entities)?;

    let (instances, log) = build_corpus(&records, &lexicon, &prices, Some(&entities), a.threshold);
    for e in &entities {
        if !log.per_entity.contains_key(e) {
            warn(format!("no instances for entity `{e}`"));
        }
    }
    prepare_dir(&a.out)?;
    write_instances(&a.out.join(CORPUS), &instances).map_err(runtime)?;
    write_json(&a.out.join("build_log.json"), &log)?;
    write_run_config(&a.out, cli)?;
    eprintln!("{} instances from {} sentences", log.instances, log.sentences);
    Ok(())
}

#[derive(Serialize)]
struct PairReport<'a> {
    first: String,
    second: String,
    report: &'a omnigraph::kernel::node_edge::BasisKernelReport,
}

pub fn kernel(cli: &Cli, a: &KernelArgs) -> Outcome {
    let kind: KernelKind = a.kernel.into();
    let instances = load_corpus(&a.corpus)?;
    let cfg = load_config(&a.cfg, kind)?;
    let gram = kernel_gram(&instances, kind, &cfg).map_err(usage)?;

    prepare_dir(&a.out)?;
    store::save(&a.out.join("kernel.ogkm"), &gram).map_err(runtime)?;
    if kind != KernelKind::Bow {
        write_json(&a.out.join("config.json"), &cfg)?;
    }
    if a.explain {
        let path = a.out.join("explain.jsonl");
        let mut w = BufWriter::new(File::create(&path).map_err(|e| runtime(format!("{}: {e}", path.display())))?);
        let mut line = |v: serde_json::Value| -> Outcome {
            writeln!(w, "{v}").map_err(|e| runtime(format!("{}: {e}", path.display())))
        };
        match kind {
            KernelKind::New => {
                let graphs: Vec<_> = instances.iter().map(Instance::union_graph).collect();
                for i in 0..graphs.len() {
                    for j in i..graphs.len() {
                        let report = explain(&graphs[i], &graphs[j], &cfg).map_err(usage)?;
                        let pr = PairReport {
                            first: instances[i].id(),
                            second: instances[j].id(),
                            report: &report,
                        };
                        line(serde_json::to_value(&pr).map_err(runtime)?)?;
                    }
                }
            }
            KernelKind::Wl => {
                let mask = KindMask::from_config(&cfg).map_err(usage)?;
                let (ctx, maps) = instance_feature_maps(&instances, cfg.max_depth, mask);
                let strings = ctx.dictionary().label_strings();
                for (inst, m) in instances.iter().zip(&maps) {
                    line(serde_json::json!({ "id": inst.id(), "features": m.explicit(&strings) }))?;
                }
            }
            KernelKind::Bow => {
                for (inst, f) in instances.iter().zip(bow_features(&instances, BOW_NGRAM)) {
                    line(serde_json::json!({ "id": inst.id(), "ngrams": f }))?;
                }
            }
        }
        w.flush().map_err(runtime)?;
    }
    write_run_config(&a.out, cli)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct GridGroup {
    entity: Option<String>,
    n: usize,
    split: Split,
    best: ConfigScore,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridFile {
    kernel: KernelKind,
    split_seed: u64,
    test_fraction: f64,
    pooled: bool,
    groups: Vec<GridGroup>,
    /// Entities with too few instances to search.
    skipped: Vec<String>,
}

#[derive(Serialize)]
struct ScoreLine<'a> {
    entity: &'a Option<String>,
    #[serde(flatten)]
    score: &'a ConfigScore,
}

pub fn gridsearch(cli: &Cli, a: &GridArgs) -> Outcome {
    let kind: KernelKind = a.kernel.into();
    let spec = match &a.grid {
        Some(p) => read_json::<GridSpec>(p)?,
        None => GridSpec::default(),
    };
    spec.validate().map_err(usage)?;
    let instances = load_corpus(&a.corpus)?;

    let mut file = GridFile {
        kernel: kind,
        split_seed: cli.seed,
        test_fraction: spec.test_fraction,
        pooled: a.pooled,
        groups: Vec::new(),
        skipped: Vec::new(),
    };
    let mut score_lines = String::new();
    let mut summary = String::from("entity\tn\tdepth\tC\tcorrect\tloo_accuracy\n");
    for (entity, insts) in groups(instances, a.pooled) {
        if insts.len() < MIN_GRID_INSTANCES {
            if a.pooled {
                return Err(usage(format!(
                    "grid search needs at least {MIN_GRID_INSTANCES} instances, corpus has {}",
                    insts.len()
                )));
            }
            warn(format!("skipping `{}`: {} instances", group_name(&entity), insts.len()));
            file.skipped.extend(entity);
            continue;
        }
        let outcome = grid_search(&insts, &spec, kind, cli.seed).map_err(runtime)?;
        for s in &outcome.scores {
            let line = serde_json::to_string(&ScoreLine { entity: &entity, score: s }).map_err(runtime)?;
            score_lines.push_str(&line);
            score_lines.push('\n');
        }
        let b = &outcome.best;
        let _ = writeln!(
            summary,
            "{}\t{}\t{}\t{}\t{}/{}\t{:.4}",
            group_name(&entity),
            insts.len(),
            b.config.max_depth,
            b.c,
            b.correct,
            b.n,
            b.accuracy
        );
        file.groups.push(GridGroup {
            entity,
            n: insts.len(),
            split: outcome.split,
            best: outcome.best,
        });
    }
    prepare_dir(&a.out)?;
    write_json(&a.out.join(GRID), &file)?;
    write_text(&a.out.join("scores.jsonl"), &score_lines)?;
    write_text(&a.out.join("summary.tsv"), &summary)?;
    write_run_config(&a.out, cli)?;
    print!("{summary}");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupModel {
    entity: Option<String>,
    config: WeightConfig,
    model: SvmModel,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    kernel: KernelKind,
    split_seed: u64,
    test_fraction: f64,
    pooled: bool,
    models: Vec<GroupModel>,
}

fn fit_group(insts: &[Instance], kind: KernelKind, cfg: &WeightConfig, c: f64, split: &Split) -> Outcome<SvmModel> {
    let gram = kernel_gram(insts, kind, cfg).map_err(usage)?;
    let labels = labels_of(insts);
    let train_labels: Vec<Label> = split.train.iter().map(|&i| labels[i]).collect();
    train_svm_unchecked(&gram.submatrix(&split.train), &train_labels, c).map_err(runtime)
}

pub fn train(cli: &Cli, a: &TrainArgs) -> Outcome {
    let instances = load_corpus(&a.corpus)?;
    let file = if let Some(dir) = &a.grid_dir {
        let path = dir.join(GRID);
        if !path.is_file() {
            return Err(usage(format!("{} not found; run gridsearch first", path.display())));
        }
        let grid: GridFile = read_json(&path)?;
        let mut by: BTreeMap<Option<String>, Vec<Instance>> = groups(instances, grid.pooled).into_iter().collect();
        let mut models = Vec::new();
        for g in &grid.groups {
            let Some(insts) = by.remove(&g.entity) else {
                return Err(usage(format!("corpus has no instances for `{}`", group_name(&g.entity))));
            };
            let split = stratified_split(&labels_of(&insts), grid.test_fraction, grid.split_seed);
            if split != g.split {
                return Err(usage(format!("corpus does not match the grid search for `{}`", group_name(&g.entity))));
            }
            let model = fit_group(&insts, grid.kernel, &g.best.config, g.best.c, &split)?;
            models.push(GroupModel {
                entity: g.entity.clone(),
                config: g.best.config.clone(),
                model,
            });
        }
        ModelFile {
            kernel: grid.kernel,
            split_seed: grid.split_seed,
            test_fraction: grid.test_fraction,
            pooled: grid.pooled,
            models,
        }
    } else {
        let kind: KernelKind = a.kernel.expect("clap requires --kernel without --grid-dir").into();
        if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
            return Err(usage(format!("test fraction must lie in (0, 1), got {}", a.test_fraction)));
        }
        let cfg = match &a.config {
            Some(p) => read_json::<WeightConfig>(p)?,
            None => WeightConfig::uniform(1),
        };
        check_config(&cfg, kind)?;
        let mut models = Vec::new();
        for (entity, insts) in groups(instances, a.pooled) {
            let split = stratified_split(&labels_of(&insts), a.test_fraction, cli.seed);
            if split.train.is_empty() {
                warn(format!("skipping `{}`: empty training part", group_name(&entity)));
                continue;
            }
            let model = fit_group(&insts, kind, &cfg, a.c, &split)?;
            models.push(GroupModel {
                entity,
                config: cfg.clone(),
                model,
            });
        }
        ModelFile {
            kernel: kind,
            split_seed: cli.seed,
            test_fraction: a.test_fraction,
            pooled: a.pooled,
            models,
        }
    };
    prepare_dir(&a.out)?;
    write_json(&a.out.join(MODEL), &file)?;
    write_run_config(&a.out, cli)?;
    eprintln!("trained {} model(s)", file.models.len());
    Ok(())
}

#[derive(Serialize)]
struct GroupReport {
    entity: Option<String>,
    report: EvalReport,
}

#[derive(Serialize)]
struct EvalSummary {
    groups: usize,
    n_test: usize,
    correct: usize,
    /// Pooled over all test instances.
    accuracy: f64,
    /// Mean of the per-group accuracies.
    mean_group_accuracy: f64,
    baseline_accuracy: f64,
}

#[derive(Serialize)]
struct EvalFile {
    kernel: KernelKind,
    split_seed: u64,
    groups: Vec<GroupReport>,
    summary: EvalSummary,
}

pub fn eval(cli: &Cli, a: &EvalArgs) -> Outcome {
    let path = a.model_dir.join(MODEL);
    if !path.is_file() {
        return Err(usage(format!("{} not found; run train first", path.display())));
    }
    let file: ModelFile = read_json(&path)?;
    let instances = load_corpus(&a.corpus)?;
    let mut by: BTreeMap<Option<String>, Vec<Instance>> = groups(instances, file.pooled).into_iter().collect();

    let mut reports = Vec::new();
    for gm in &file.models {
        let Some(insts) = by.remove(&gm.entity) else {
            return Err(usage(format!("corpus has no instances for `{}`", group_name(&gm.entity))));
        };
        let labels = labels_of(&insts);
        let split = stratified_split(&labels, file.test_fraction, file.split_seed);
        let gram = kernel_gram(&insts, file.kernel, &gm.config).map_err(usage)?;
        let train_ids: Vec<String> = split.train.iter().map(|&i| insts[i].id()).collect();
        if train_ids != gm.model.training_ids {
            return Err(usage(format!("corpus does not match the model for `{}`", group_name(&gm.entity))));
        }
        let mut preds = Vec::with_capacity(split.test.len());
        for &t in &split.test {
            let row: Vec<f64> = split.train.iter().map(|&j| gram.get(t, j)).collect();
            preds.push(gm.model.predict(&row).map_err(runtime)?.0);
        }
        let train_labels: Vec<Label> = split.train.iter().map(|&i| labels[i]).collect();
        let truth: Vec<Label> = split.test.iter().map(|&i| labels[i]).collect();
        let report = EvalReport::from_predictions(
            file.kernel,
            gm.config.clone(),
            gm.model.c,
            file.split_seed,
            &train_labels,
            &truth,
            &preds,
        );
        reports.push(GroupReport {
            entity: gm.entity.clone(),
            report,
        });
    }

    let n_test: usize = reports.iter().map(|r| r.report.n_test).sum();
    let correct: usize = reports.iter().map(|r| r.report.confusion.correct()).sum();
    let base: f64 = reports
        .iter()
        .map(|r| r.report.baseline_accuracy * r.report.n_test as f64)
        .sum();
    let scored: Vec<&GroupReport> = reports.iter().filter(|r| r.report.n_test > 0).collect();
    let summary = EvalSummary {
        groups: reports.len(),
        n_test,
        correct,
        accuracy: if n_test == 0 { 0.0 } else { correct as f64 / n_test as f64 },
        mean_group_accuracy: if scored.is_empty() {
            0.0
        } else {
            scored.iter().map(|r| r.report.accuracy).sum::<f64>() / scored.len() as f64
        },
        baseline_accuracy: if n_test == 0 { 0.0 } else { base / n_test as f64 },
    };

    let mut table = String::new();
    for r in &reports {
        let _ = writeln!(table, "[{}]", group_name(&r.entity));
        table.push_str(&r.report.to_table());
        table.push('\n');
    }
    let _ = writeln!(
        table,
        "overall: {}/{} correct, accuracy {:.4} (mean per group {:.4}, baseline {:.4})",
        summary.correct, summary.n_test, summary.accuracy, summary.mean_group_accuracy, summary.baseline_accuracy
    );

    prepare_dir(&a.out)?;
    write_json(
        &a.out.join("eval.json"),
        &EvalFile {
            kernel: file.kernel,
            split_seed: file.split_seed,
            groups: reports,
            summary,
        },
    )?;
    write_text(&a.out.join("eval.txt"), &table)?;
    write_run_config(&a.out, cli)?;
    print!("{table}");
    Ok(())
}

pub fn rank(cli: &Cli, a: &RankArgs) -> Outcome {
    let instances = load_corpus(&a.corpus)?;
    let mask = match &a.config {
        Some(p) => {
            let cfg: WeightConfig = read_json(p)?;
            cfg.validate().map_err(usage)?;
            KindMask::from_nonzero(&cfg)
        }
        None => KindMask::all(),
    };
    let ranked = rank_features(&instances, a.depth, mask, a.top_k, a.min_support);

    prepare_dir(&a.out)?;
    let tsv = ranking_tsv(&ranked);
    write_text(&a.out.join("ranking.tsv"), &tsv)?;
    let dots = a.out.join("features");
    prepare_dir(&dots)?;
    for (i, r) in ranked.iter().enumerate() {
        let dot = feature_to_dot(&r.feature).map_err(runtime)?;
        write_text(&dots.join(format!("feature_{:03}.dot", i + 1)), &dot)?;
    }
    write_run_config(&a.out, cli)?;
    print!("{tsv}");
    Ok(())
}

pub fn synth(cli: &Cli, a: &SynthArgs) -> Outcome {
    let spec = PlantSpec {
        p_plus: a.p_plus,
        p_minus: a.p_minus,
        positive_fraction: a.positive_fraction,
        sentences: (a.min_sentences, a.max_sentences),
        entities: a.entities,
        seed: cli.seed,
        ..PlantSpec::default()
    };
    let corpus = generate(&spec, a.n).map_err(usage)?;
    prepare_dir(&a.out)?;
    write_instances(&a.out.join(CORPUS), &corpus.instances).map_err(runtime)?;
    write_json(&a.out.join("manifest.json"), &corpus.manifest)?;
    write_run_config(&a.out, cli)?;
    eprintln!("{} instances, {} positive", corpus.manifest.n_instances, corpus.manifest.n_positive);
    Ok(())
}
