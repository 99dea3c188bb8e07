use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use resgraph::descriptors::format_real;
use resgraph::reference::write_atomic;
use resgraph::synth::{self, ChainShape};
use resgraph::{
    build_db, build_graph, classify, compute_features, graph_stats, load_manifest, loo_accuracy,
    parse_pdb_file, rfe, score_attributes, DistanceMeasure, Exec, FeatureMask, FeatureVector,
    GraphBuildParams, IngestOptions, MeasureKind, ReferenceDb, ScanView, ATTRIBUTE_NAMES,
};

use crate::timing::{TimingReport, ATTRIBUTE_COMPUTATION, CLASSIFICATION, GRAPH_BUILDING};
use crate::{
    AddArgs, BenchArgs, BuildDbArgs, ClassifyArgs, Command, EvaluateArgs, RfeArgs, ScoreArgs, StatsArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildDb(a) => build_db_cmd(a),
        Command::Add(a) => add_cmd(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Rfe(a) => rfe_cmd(a),
        Command::ScoreAttributes(a) => score_cmd(a),
        Command::Stats(a) => stats_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn exec_for_jobs(jobs: usize) -> Result<Exec> {
    if jobs <= 1 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("could not start worker threads")?;
        Ok(Exec::Parallel)
    }
    #[cfg(not(feature = "parallel"))]
    {
        eprintln!("warning: built without the `parallel` feature; --jobs {jobs} runs sequentially");
        Ok(Exec::Sequential)
    }
}

fn measure(kind: MeasureKind, minkowski_p: f64) -> Result<DistanceMeasure> {
    Ok(DistanceMeasure::new(kind).with_minkowski_order(minkowski_p)?)
}

fn load_db(path: &Path) -> Result<ReferenceDb> {
    ReferenceDb::load(path).with_context(|| format!("loading database {}", path.display()))
}

/// Writes a finished report to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => Ok(write_atomic(path, bytes)?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn mask_string(mask: &FeatureMask) -> String {
    if mask.is_full() {
        "all".to_string()
    } else {
        mask.to_string()
    }
}

fn build_db_cmd(a: BuildDbArgs) -> Result<()> {
    let exec = exec_for_jobs(a.jobs)?;
    let params = GraphBuildParams::new(a.delta)?;
    let entries = load_manifest(&a.manifest).with_context(|| format!("reading manifest {}", a.manifest.display()))?;
    let (db, report) = build_db(&entries, params, exec)?;
    for f in &report.failures {
        eprintln!("warning: skipped {}: {}", f.path.display(), f.error);
    }
    db.save(&a.out)?;
    if let Some(path) = &a.report {
        let added = report.added.iter().map(|id| vec![id.clone(), "added".into(), String::new()]);
        let failed = report
            .failures
            .iter()
            .map(|f| vec![f.path.display().to_string(), "failed".into(), f.error.clone()]);
        write_atomic(path, &csv_bytes(&["item", "status", "detail"], added.chain(failed))?)?;
    }
    Ok(())
}

fn add_cmd(a: AddArgs) -> Result<()> {
    let exec = exec_for_jobs(a.jobs)?;
    let mut db = load_db(&a.db)?;
    let entries = load_manifest(&a.manifest).with_context(|| format!("reading manifest {}", a.manifest.display()))?;
    let params = db.params();
    let report = db.add_structures(&entries, params, exec)?;
    for f in &report.failures {
        eprintln!("warning: skipped {}: {}", f.path.display(), f.error);
    }
    db.save(a.out.as_ref().unwrap_or(&a.db))?;
    Ok(())
}

fn query_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).with_context(|| format!("reading {}", path.display()))? {
        let p = entry?.path();
        let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if p.is_file() && matches!(ext.as_deref(), Some("pdb" | "ent")) {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        bail!("no .pdb or .ent files in {}", path.display());
    }
    Ok(files)
}

/// Parses and featurizes queries, timing graph building and attribute
/// computation separately.
fn featurize_queries(
    files: &[PathBuf],
    params: GraphBuildParams,
    exec: Exec,
    timing: &mut TimingReport,
) -> Result<Vec<FeatureVector>> {
    let options = IngestOptions::default();
    let started = Instant::now();
    let graphs = exec.map(files, |p| -> Result<_> {
        let record = parse_pdb_file(p, &options)?;
        Ok(build_graph(&record, params)?)
    });
    timing.add(GRAPH_BUILDING, started.elapsed());
    let graphs = graphs
        .into_iter()
        .zip(files)
        .map(|(g, p)| g.with_context(|| format!("query {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let started = Instant::now();
    let features = exec.map(&graphs, compute_features);
    timing.add(ATTRIBUTE_COMPUTATION, started.elapsed());
    Ok(features.into_iter().collect::<Result<Vec<_>, _>>()?)
}

fn classify_cmd(a: ClassifyArgs) -> Result<()> {
    let exec = exec_for_jobs(a.jobs)?;
    let db = load_db(&a.db)?;
    let m = measure(a.measure.distance, a.measure.minkowski_p)?;
    let files = query_files(&a.query)?;
    let mut timing = TimingReport::new(files.len());
    let queries = featurize_queries(&files, db.params(), exec, &mut timing)?;
    let started = Instant::now();
    let view = ScanView::new(&db, a.mask.unwrap_or_else(FeatureMask::all))?;
    let predictions = queries
        .iter()
        .map(|q| view.classify(q, a.k, &m))
        .collect::<Result<Vec<_>, _>>()?;
    timing.add(CLASSIFICATION, started.elapsed());
    let rows = predictions.iter().map(|p| {
        let top = &p.neighbors[0];
        vec![
            p.query_id.clone(),
            p.predicted_class.clone(),
            top.structure_id.clone(),
            format_real(top.distance),
            p.votes_string(),
        ]
    });
    let bytes = csv_bytes(&["query_id", "predicted_class", "top1_id", "top1_distance", "votes"], rows)?;
    emit(a.out.as_deref(), &bytes)?;
    if a.timing {
        eprint!("{}", timing.to_csv());
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let db = load_db(&a.db)?;
    let mask = a.mask.unwrap_or_else(FeatureMask::all);
    let mut summary = Vec::new();
    let mut per_query = Vec::new();
    for &kind in &a.distance {
        let m = measure(kind, a.minkowski_p)?;
        for &k in &a.k {
            let r = loo_accuracy(&db, k, &m, Some(&mask), Exec::Sequential)?;
            summary.push(vec![
                r.dataset_id.clone(),
                m.to_string(),
                k.to_string(),
                mask_string(&mask),
                r.correct.to_string(),
                r.total().to_string(),
                format_real(r.accuracy),
            ]);
            for o in &r.per_query {
                per_query.push(vec![
                    r.dataset_id.clone(),
                    m.to_string(),
                    k.to_string(),
                    o.query_id.clone(),
                    o.true_class.clone(),
                    o.predicted_class.clone(),
                    u8::from(o.correct()).to_string(),
                ]);
            }
        }
    }
    let header = ["dataset", "measure", "k", "mask", "correct", "total", "accuracy"];
    emit(a.out.as_deref(), &csv_bytes(&header, summary)?)?;
    if let Some(path) = &a.per_query {
        let header = ["dataset", "measure", "k", "query_id", "true_class", "predicted_class", "correct"];
        write_atomic(path, &csv_bytes(&header, per_query)?)?;
    }
    Ok(())
}

fn rfe_cmd(a: RfeArgs) -> Result<()> {
    let db = load_db(&a.db)?;
    let m = measure(a.measure.distance, a.measure.minkowski_p)?;
    let result = rfe(&db, a.k, &m, Exec::Sequential)?;
    let mut rows = vec![vec![
        "0".to_string(),
        String::new(),
        format_real(result.initial_accuracy),
        ATTRIBUTE_NAMES.len().to_string(),
    ]];
    for (i, step) in result.elimination_trace.iter().enumerate() {
        rows.push(vec![
            (i + 1).to_string(),
            ATTRIBUTE_NAMES[step.removed_attribute].to_string(),
            format_real(step.accuracy_after_removal),
            (ATTRIBUTE_NAMES.len() - i - 1).to_string(),
        ]);
    }
    let bytes = csv_bytes(&["step", "removed_attribute", "accuracy", "remaining"], rows)?;
    emit(a.out.as_deref(), &bytes)
}

fn score_cmd(a: ScoreArgs) -> Result<()> {
    let dbs = a.dbs.iter().map(|p| load_db(p)).collect::<Result<Vec<_>>>()?;
    let measures = a
        .measures
        .iter()
        .map(|&k| measure(k, a.minkowski_p))
        .collect::<Result<Vec<_>>>()?;
    let score = score_attributes(&dbs, &measures, &a.ks, Exec::Sequential)?;
    let rows = (0..ATTRIBUTE_NAMES.len()).map(|j| {
        vec![
            ATTRIBUTE_NAMES[j].to_string(),
            resgraph::descriptors::ATTRIBUTE_DESCRIPTIONS[j].to_string(),
            score.counts[j].to_string(),
            score.experiments.to_string(),
            format_real(score.scores[j]),
            score.ranks[j].to_string(),
        ]
    });
    let header = ["attribute", "description", "count", "experiments", "score", "rank"];
    emit(a.out.as_deref(), &csv_bytes(&header, rows)?)
}

fn stats_cmd(a: StatsArgs) -> Result<()> {
    let bytes = if let Some(pdb) = &a.source.pdb {
        let record = parse_pdb_file(pdb, &IngestOptions::default())?;
        let graph = build_graph(&record, GraphBuildParams::new(a.delta)?)?;
        if let Some(path) = &a.dump_graph {
            write_atomic(path, graph.to_dump().as_bytes())?;
        }
        let s = graph_stats(&graph);
        let row = vec![
            record.structure_id.clone(),
            format_real(a.delta),
            s.nodes.to_string(),
            s.edges.to_string(),
            s.components.to_string(),
        ];
        csv_bytes(&["structure_id", "delta", "nodes", "edges", "components"], [row])?
    } else {
        let path = a.source.db.as_ref().expect("clap requires --pdb or --db");
        let db = load_db(path)?;
        let s = db.stats();
        let rows = (0..ATTRIBUTE_NAMES.len()).map(|j| {
            vec![
                ATTRIBUTE_NAMES[j].to_string(),
                s.count.to_string(),
                format_real(s.min[j]),
                format_real(s.max[j]),
                format_real(s.mean[j]),
                format_real(s.variance[j]),
            ]
        });
        csv_bytes(&["attribute", "rows", "min", "max", "mean", "variance"], rows)?
    };
    emit(a.out.as_deref(), &bytes)
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let mut rng = synth::rng(a.seed);
    let db = match (&a.reference.db, a.reference.synthetic_rows) {
        (Some(path), _) => load_db(path)?,
        (None, Some(rows)) => {
            let rows = synth::random_feature_rows(&mut rng, rows, 10);
            ReferenceDb::from_rows(rows, GraphBuildParams::default())?.with_name("synthetic")
        }
        (None, None) => unreachable!("clap requires --db or --synthetic-rows"),
    };
    let params = match a.delta {
        Some(d) => GraphBuildParams::new(d)?,
        None => db.params(),
    };
    let m = measure(a.measure.distance, a.measure.minkowski_p)?;
    let shape = ChainShape {
        residues: a.residues,
        ..Default::default()
    };
    let chains: Vec<_> = (0..a.queries)
        .map(|i| synth::random_chain(&mut rng, &format!("q{i:05}"), shape))
        .collect();

    let mut timing = TimingReport::new(a.queries);
    let started = Instant::now();
    let graphs = chains
        .iter()
        .map(|c| build_graph(c, params))
        .collect::<Result<Vec<_>, _>>()?;
    timing.add(GRAPH_BUILDING, started.elapsed());

    let started = Instant::now();
    let features = graphs.iter().map(compute_features).collect::<Result<Vec<_>, _>>()?;
    timing.add(ATTRIBUTE_COMPUTATION, started.elapsed());

    let started = Instant::now();
    for q in &features {
        std::hint::black_box(classify(q, &db, a.k, &m, None)?);
    }
    timing.add(CLASSIFICATION, started.elapsed());

    emit(a.out.as_deref(), timing.to_csv().as_bytes())
}
