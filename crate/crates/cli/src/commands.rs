use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use shipfc::config::RunConfig;
use shipfc::eval::{advanced_protocol, baseline_protocol, grid_search, kfold_split, mae, r2, rmse, adjusted_r2};
use shipfc::models::{forest_feature_importance, forest_fit, Family, ModelSpec, SavedModel};
use shipfc::pipeline::{run_pipeline, write_fused_csv, PipelineOutput};
use shipfc::report::VoyageRecord;
use shipfc::synth::{generate_voyage, inject_defects};
use shipfc::{Error, Matrix};

type Outputs = Result<Vec<PathBuf>, Error>;

fn json_err(e: serde_json::Error) -> Error {
    Error::Config(format!("serialization: {e}"))
}

fn write_file(cfg: &RunConfig, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(&cfg.paths.output_dir)?;
    let path = cfg.paths.output_dir.join(name);
    std::fs::write(&path, contents)?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn write_json<T: Serialize + ?Sized>(cfg: &RunConfig, name: &str, value: &T) -> Result<PathBuf, Error> {
    write_file(cfg, name, serde_json::to_string_pretty(value).map_err(json_err)? + "\n")
}

fn records(cfg: &RunConfig) -> Result<(Vec<VoyageRecord>, usize), Error> {
    let parsed = cfg.load_reports()?;
    for r in &parsed.rejected {
        log::warn!("rejected {r}");
    }
    Ok((parsed.records, parsed.rejected.len()))
}

fn pipeline(cfg: &RunConfig) -> Result<(PipelineOutput, usize), Error> {
    let (recs, rejected) = records(cfg)?;
    let grids = cfg.load_grids()?;
    Ok((run_pipeline(recs, &grids, &cfg.pipeline)?, rejected))
}

fn design(cfg: &RunConfig) -> Result<Matrix, Error> {
    let (out, _) = pipeline(cfg)?;
    Ok(out.dataset.to_design_matrix()?)
}

pub fn parse(cfg: &RunConfig) -> Outputs {
    let parsed = cfg.load_reports()?;
    Ok(vec![write_json(cfg, "records.json", &parsed.records)?, write_json(cfg, "rejected.json", &parsed.rejected)?])
}

pub fn fuse(cfg: &RunConfig) -> Outputs {
    let (out, rejected) = pipeline(cfg)?;
    let mut csv = Vec::new();
    write_fused_csv(&out.dataset, &mut csv)?;
    let coverage = json!({ "rejected_rows": rejected, "pipeline": out.coverage });
    Ok(vec![write_file(cfg, "fused.csv", csv)?, write_json(cfg, "coverage.json", &coverage)?])
}

pub fn train(cfg: &RunConfig, family: Family) -> Outputs {
    let d = design(cfg)?;
    let spec = cfg.spec_for(family);
    let model = spec.fit(&d, cfg.seed)?;
    let saved = SavedModel {
        spec,
        features: d.names().to_vec(),
        response: shipfc::pipeline::RESPONSE.to_string(),
        seed: cfg.seed,
        model,
    };
    let text = saved.to_json()? + "\n";
    Ok(vec![write_file(cfg, &format!("model_{}.json", family.label()), text)?])
}

pub fn evaluate(cfg: &RunConfig, model: Option<&Path>) -> Outputs {
    let d = design(cfg)?;
    let proto = cfg.protocol();
    let base = baseline_protocol(&d, &proto)?;
    let adv = advanced_protocol(&d, &proto)?;
    let mut out = vec![
        write_file(cfg, "baseline.csv", base.rpm.to_csv())?,
        write_file(cfg, "baseline.txt", base.rpm.to_text_table())?,
    ];
    if let Some(sog) = &base.sog {
        out.push(write_file(cfg, "baseline_sog.csv", sog.to_csv())?);
    }
    out.push(write_file(cfg, "advanced.csv", adv.to_csv())?);
    out.push(write_file(cfg, "advanced.txt", adv.to_text_table())?);
    let folds = json!({ "baseline": base, "advanced": adv });
    out.push(write_json(cfg, "folds.json", &folds)?);
    print!("baseline ({}):\n{}\nadvanced ({} features):\n{}", proto.rpm_column, base.rpm.to_text_table(), d.p(), adv.to_text_table());

    if let Some(path) = model {
        let saved = SavedModel::from_json(&std::fs::read_to_string(path)?)?;
        let cols = saved
            .features
            .iter()
            .map(|f| d.column_index(f).ok_or_else(|| Error::Config(format!("model feature {f:?} not in fused data"))))
            .collect::<Result<Vec<_>, _>>()?;
        let sub = d.select_columns(&cols)?;
        let yhat = saved.model.predict(&sub)?;
        let y = sub.y();
        let adj = adjusted_r2(y, &yhat, sub.p()).ok();
        let scores = json!({
            "model": saved.spec.family().label(),
            "n": y.len(),
            "r2": r2(y, &yhat)?,
            "adj_r2": adj,
            "rmse": rmse(y, &yhat)?,
            "mae": mae(y, &yhat)?,
        });
        out.push(write_json(cfg, "model_scores.json", &scores)?);
    }
    Ok(out)
}

pub fn importance(cfg: &RunConfig, exclude_rpm: bool) -> Outputs {
    let d = design(cfg)?;
    let ModelSpec::Forest(params) = cfg.spec_for(Family::Forest) else {
        unreachable!("spec_for(Forest) is a forest spec");
    };
    let forest = forest_fit(&d, &params, cfg.seed)?;
    let imp = forest_feature_importance(&forest, &d)?;
    let mut ranked: Vec<(&str, f64)> = d.names().iter().map(String::as_str).zip(imp).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if exclude_rpm {
        ranked.retain(|(n, _)| *n != cfg.evaluation.rpm_column);
    }
    let mut csv = String::from("rank,feature,importance\n");
    for (i, (n, v)) in ranked.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{:.6}", i + 1, n, v);
    }
    Ok(vec![write_file(cfg, "importance.csv", csv)?])
}

pub fn gridsearch(cfg: &RunConfig, family: Family) -> Outputs {
    let d = design(cfg)?;
    let folds = kfold_split(d.n(), cfg.evaluation.k, cfg.seed)?;
    let res = grid_search(&cfg.spec_for(family), &cfg.hypergrid(family), &d, &folds, cfg.evaluation.objective, cfg.seed)?;
    let best = res.best_point();
    let summary = json!({
        "family": family.label(),
        "objective": res.objective,
        "score": best.score,
        "params": best.params,
        "spec": best.spec,
        "r2_mean": best.cv.r2_mean(),
        "rmse_mean": best.cv.rmse_mean(),
    });
    Ok(vec![
        write_file(cfg, &format!("gridsearch_{}.csv", family.label()), res.to_csv())?,
        write_json(cfg, &format!("best_{}.json", family.label()), &summary)?,
    ])
}

pub fn synth(cfg: &RunConfig) -> Outputs {
    let s = &cfg.synth;
    let law = s.law(cfg.seed);
    let mut corpus = generate_voyage(&law, s.n_days, &shipfc::synth::default_route(), &s.options)?;
    if let Some(spec) = s.defect_spec(cfg.seed) {
        let (recs, log) = inject_defects(std::mem::take(&mut corpus.records), &spec)?;
        corpus.records = recs;
        corpus.manifest.defects = Some((spec, log));
    }
    let dir = &cfg.paths.output_dir;
    corpus.write_to_dir(dir)?;
    // a ready-to-run config next to the data
    let toml = format!(
        "seed = {seed}\n\n\
         [paths]\n\
         reports = \"reports.csv\"\n\
         output_dir = \"results\"\n\n\
         [[paths.grids]]\n\
         name = \"ocean\"\n\
         path = \"ocean.csv\"\n\n\
         [[paths.grids]]\n\
         name = \"atmos\"\n\
         path = \"atmos.bin\"\n",
        seed = cfg.seed
    );
    let mut out: Vec<PathBuf> =
        ["reports.csv", "ocean.csv", "atmos.bin", "truth.csv", "manifest.json"].iter().map(|f| dir.join(f)).collect();
    out.push(write_file(cfg, "config.toml", toml)?);
    Ok(out)
}

pub fn track_export(cfg: &RunConfig) -> Outputs {
    let (recs, _) = records(cfg)?;
    let mut csv = String::from("row,timestamp_utc,lat,lon,next_port\n");
    let mut points = Vec::with_capacity(recs.len());
    for r in &recs {
        let ts = r.timestamp_utc.format("%Y-%m-%dT%H:%M:%SZ").to_string();
        let port = r.next_port.get().unwrap_or_default();
        let quoted = if port.contains([',', '"']) { format!("\"{}\"", port.replace('"', "\"\"")) } else { port.clone() };
        let _ = writeln!(csv, "{},{},{:.6},{:.6},{}", r.row, ts, r.position.lat, r.position.lon, quoted);
        points.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": [r.position.lon, r.position.lat] },
            "properties": { "row": r.row, "timestamp_utc": ts, "next_port": port },
        }));
    }
    let line: Vec<[f64; 2]> = recs.iter().map(|r| [r.position.lon, r.position.lat]).collect();
    let mut features = vec![json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": line },
        "properties": { "kind": "track" },
    })];
    features.extend(points);
    let geo = json!({ "type": "FeatureCollection", "features": features });
    Ok(vec![write_file(cfg, "track.csv", csv)?, write_json(cfg, "track.geojson", &geo)?])
}
