use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use incomefit::analysis::{
    gini_empirical, gini_minimizer, gini_singularity, per_capita_css, percent_change_linear, GiniProfile,
};
use incomefit::data::{bin_density, clean, load_csv, WeightedSample};
use incomefit::distributions::{Model, ModelFamily, Params};
use incomefit::estimation::{bootstrap_se, fit as fit_family, BootstrapResult, FittedModel};
use incomefit::reduction::{
    estimate_proportional_variant, normalize_series, normalized_contrasts, predict_scale_shift, reduction_pipeline,
    ProportionalVariant, ReductionOptions,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

type CmdResult = Result<(), Failure>;

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::runtime("output", format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_failure(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_failure(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Write CSV rows of already formatted fields.
fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CmdResult {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| io_failure(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_failure(path, e))?;
    }
    w.flush().map_err(|e| io_failure(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn load(cfg: &RunConfig, path: &Path) -> Result<WeightedSample, Failure> {
    let raw = load_csv(path, &cfg.data.income_column, cfg.data.weight_column.as_deref())?;
    Ok(clean(&raw, cfg.data.trim_lower, cfg.data.trim_upper)?)
}

fn label_of(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Serialize)]
struct FitDoc<'a> {
    command: &'static str,
    input: String,
    config: &'a RunConfig,
    model: FittedModel,
    bootstrap: Option<BootstrapResult>,
}

pub fn fit(cfg: &RunConfig, out: &Path, data: &Path, family: ModelFamily, label: Option<String>) -> CmdResult {
    let sample = load(cfg, data)?;
    let model = fit_family(family, &sample, &cfg.fit)?.with_label(label.unwrap_or_else(|| label_of(data)));
    let bootstrap = match cfg.bootstrap.replicates {
        0 => None,
        r => Some(bootstrap_se(family, &sample, &cfg.fit, r, cfg.seed)?),
    };

    let binned = bin_density(&sample, cfg.bins)?;
    let bins_path = out.join("bins.csv");
    binned.write_csv(create(&bins_path)?)?;
    println!("wrote {}", bins_path.display());

    let density = Model::new(model.parameters)?;
    let mut grid: Vec<(f64, &str)> = binned.midpoints().into_iter().map(|x| (x, "bin")).collect();
    let top = binned.bins.last().map(|b| b.upper).unwrap_or(sample.max());
    if top > 0.0 {
        let (n, factor) = (cfg.density.tail_points, cfg.density.tail_factor);
        grid.extend((1..=n).map(|i| (top * factor.powf(i as f64 / n as f64), "tail")));
    }
    write_rows(
        &out.join(format!("density-{family}.csv")),
        &["x", "density", "grid"],
        grid.iter().map(|&(x, g)| vec![x.to_string(), density.pdf(x).to_string(), g.to_string()]),
    )?;

    println!("{family}: ks = {}, log-likelihood = {}", model.ks_stat, model.log_likelihood);
    write_json(
        &out.join(format!("fit-{family}.json")),
        &FitDoc { command: "fit", input: data.display().to_string(), config: cfg, model, bootstrap },
    )
}

#[derive(Serialize)]
struct CompareRow {
    family: ModelFamily,
    parameters: Option<Params>,
    ks_stat: Option<f64>,
    log_likelihood: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct CompareDoc<'a> {
    command: &'static str,
    input: String,
    config: &'a RunConfig,
    rows: Vec<CompareRow>,
}

fn parse_families(spec: &str, cfg: &RunConfig) -> Result<Vec<ModelFamily>, Failure> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelFamily::ALL
            .into_iter()
            .filter(|f| *f != ModelFamily::CssInverseGamma || cfg.fit.css.year.is_some())
            .collect());
    }
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let f: ModelFamily = name.parse().map_err(|e: incomefit::Error| Failure::usage(e.to_string()))?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Failure::usage("no families requested"));
    }
    Ok(out)
}

pub fn compare(cfg: &RunConfig, out: &Path, data: &Path, families: &str) -> CmdResult {
    let families = parse_families(families, cfg)?;
    let sample = load(cfg, data)?;
    let rows: Vec<CompareRow> = families
        .par_iter()
        .map(|&family| match fit_family(family, &sample, &cfg.fit) {
            Ok(m) => CompareRow {
                family,
                parameters: Some(m.parameters),
                ks_stat: Some(m.ks_stat),
                log_likelihood: Some(m.log_likelihood),
                error: None,
            },
            Err(e) => {
                CompareRow { family, parameters: None, ks_stat: None, log_likelihood: None, error: Some(e.to_string()) }
            }
        })
        .collect();

    for r in &rows {
        match (&r.ks_stat, &r.error) {
            (Some(ks), _) => {
                println!("{:<26} ks = {ks:.6}  log-likelihood = {}", r.family.name(), opt(r.log_likelihood))
            }
            (_, Some(e)) => println!("{:<26} failed: {e}", r.family.name()),
            _ => {}
        }
    }
    write_rows(
        &out.join("compare.csv"),
        &["family", "ks_stat", "log_likelihood", "parameters", "error"],
        rows.iter().map(|r| {
            let params = r
                .parameters
                .map(|p| p.named_values().iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default();
            vec![
                r.family.to_string(),
                opt(r.ks_stat),
                opt(r.log_likelihood),
                params,
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    let all_failed = rows.iter().all(|r| r.error.is_some());
    write_json(
        &out.join("compare.json"),
        &CompareDoc { command: "compare", input: data.display().to_string(), config: cfg, rows },
    )?;
    if all_failed {
        return Err(Failure::runtime("fit", "every requested family failed"));
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct ManifestRow {
    year: i32,
    path: PathBuf,
}

#[derive(Serialize)]
struct YearAnalytics {
    year: i32,
    css_alpha: f64,
    predicted_beta: f64,
    predicted_c: f64,
    per_capita: Option<f64>,
    percent_change_linear: Option<f64>,
}

#[derive(Serialize)]
struct ReduceDoc<'a> {
    command: &'static str,
    input: String,
    config: &'a RunConfig,
    result: incomefit::reduction::ReductionResult,
    proportional_variant: Result<ProportionalVariant, String>,
    analytics: Vec<YearAnalytics>,
}

pub fn reduce(cfg: &RunConfig, out: &Path, manifest: &Path) -> CmdResult {
    let file = File::open(manifest).map_err(|e| Failure::runtime("input", format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let rows = rdr
        .deserialize::<ManifestRow>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Failure::runtime("input", format!("manifest row {}: {e}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    if rows.len() < 3 {
        return Err(Failure::runtime(
            "precondition",
            format!("the manifest lists {} years; at least 3 are needed", rows.len()),
        ));
    }
    let panel = rows
        .iter()
        .map(|r| {
            let path = if r.path.is_absolute() { r.path.clone() } else { base.join(&r.path) };
            load(cfg, &path)
                .map(|s| (r.year, s))
                .map_err(|f| Failure::runtime(f.kind, format!("year {}: {}", r.year, f.message)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let options = ReductionOptions { fit: cfg.fit.clone(), psi: cfg.reduce.psi };
    let result = reduction_pipeline(&panel, &options)?;
    let constants = result.regression.constants;

    result.series.write_csv(create(&out.join("series.csv"))?).map_err(Failure::from)?;
    println!("wrote {}", out.join("series.csv").display());
    let normalized = normalize_series(&result.series)?;
    write_rows(
        &out.join("normalized.csv"),
        &["year", "alpha", "beta", "c"],
        normalized.iter().map(|e| vec![e.year.to_string(), e.alpha.to_string(), e.beta.to_string(), e.c.to_string()]),
    )?;
    write_rows(
        &out.join("contrasts.csv"),
        &["year", "beta_minus_alpha", "c_minus_alpha", "beta_over_alpha", "c_over_alpha"],
        normalized_contrasts(&normalized).iter().map(|e| {
            vec![
                e.year.to_string(),
                e.beta_minus_alpha.to_string(),
                e.c_minus_alpha.to_string(),
                e.beta_over_alpha.to_string(),
                e.c_over_alpha.to_string(),
            ]
        }),
    )?;
    write_rows(
        &out.join("css-alpha.csv"),
        &["year", "css_alpha", "ks_css", "ks_inverse_gamma", "failure"],
        result.years.iter().map(|y| {
            vec![
                y.year.to_string(),
                opt(y.css_alpha),
                opt(y.ks_css),
                opt(y.ks_inverse_gamma),
                y.failure.clone().unwrap_or_default(),
            ]
        }),
    )?;

    let analytics = result
        .years
        .iter()
        .filter_map(|y| {
            let alpha = y.css_alpha?;
            let (beta, c) = predict_scale_shift(&constants, y.year as f64, alpha);
            Some(YearAnalytics {
                year: y.year,
                css_alpha: alpha,
                predicted_beta: beta,
                predicted_c: c,
                per_capita: per_capita_css(&constants, y.year as f64, alpha).ok(),
                percent_change_linear: percent_change_linear(
                    beta,
                    constants.psi1,
                    constants.phi,
                    cfg.reduce.percent_change,
                )
                .ok(),
            })
        })
        .collect();

    println!("phi = {}, psi = ({}, {}, {})", constants.phi, constants.psi0, constants.psi1, constants.psi2);
    write_json(
        &out.join("constants.json"),
        &ReduceDoc {
            command: "reduce",
            input: manifest.display().to_string(),
            config: cfg,
            proportional_variant: estimate_proportional_variant(&result.series).map_err(|e| e.to_string()),
            result,
            analytics,
        },
    )
}

fn parse_params(family: ModelFamily, spec: &str, cfg: &RunConfig) -> Result<Params, Failure> {
    let mut pairs = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) =
            item.split_once('=').ok_or_else(|| Failure::usage(format!("parameter '{item}' is not name=value")))?;
        let v: f64 =
            value.trim().parse().map_err(|_| Failure::usage(format!("parameter {name}: cannot parse '{value}'")))?;
        pairs.push((name.trim().to_string(), v));
    }
    let get = |name: &str| pairs.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
    let allowed: Vec<&str> = match family {
        ModelFamily::CssInverseGamma => vec!["alpha", "year"],
        _ => family.parameter_names().to_vec(),
    };
    if let Some((n, _)) = pairs.iter().find(|(n, _)| !allowed.contains(&n.as_str())) {
        return Err(Failure::usage(format!("{family} has no parameter '{n}' (expected {})", allowed.join(", "))));
    }
    let missing = |n: &str| Failure::usage(format!("{family}: missing parameter '{n}'"));
    let params = match family {
        ModelFamily::CssInverseGamma => {
            let year = get("year").ok_or_else(|| missing("year"))?;
            if year.fract() != 0.0 || year.abs() > i32::MAX as f64 {
                return Err(Failure::usage(format!("year {year} is not an integer")));
            }
            let p = Params::CssInverseGamma {
                alpha: get("alpha").ok_or_else(|| missing("alpha"))?,
                year: year as i32,
                constants: cfg.fit.css.constants,
            };
            p.validate()?;
            p
        }
        ModelFamily::LognormalParetoCutoff if get("x_m").is_none() => {
            let v = ["mu", "sigma2", "alpha", "c", "k"]
                .iter()
                .map(|n| get(n).ok_or_else(|| missing(n)))
                .collect::<Result<Vec<_>, _>>()?;
            Params::from_values(family, &v)?
        }
        _ => {
            let v = family
                .parameter_names()
                .iter()
                .map(|n| get(n).ok_or_else(|| missing(n)))
                .collect::<Result<Vec<_>, _>>()?;
            Params::from_values(family, &v)?
        }
    };
    Ok(params)
}

pub fn sample(cfg: &RunConfig, out: &Path, family: ModelFamily, params: &str, n: usize) -> CmdResult {
    let params = parse_params(family, params, cfg)?;
    let draws = Model::new(params)?.sample(n, cfg.seed)?;
    write_rows(
        &out.join(format!("sample-{family}.csv")),
        &["income", "weight"],
        draws.iter().map(|x| vec![x.to_string(), "1".to_string()]),
    )
}

#[derive(Serialize)]
struct GiniProfileDoc<'a> {
    command: &'static str,
    config: &'a RunConfig,
    phi: f64,
    singularity: Option<f64>,
    singularity_in_range: bool,
    stationary_points: Vec<f64>,
    minimizer: Option<f64>,
    points: usize,
}

#[derive(Serialize)]
struct GiniDataDoc<'a> {
    command: &'static str,
    input: String,
    config: &'a RunConfig,
    gini: f64,
}

pub fn gini(cfg: &RunConfig, out: &Path, data: Option<&Path>) -> CmdResult {
    if let Some(path) = data {
        let sample = load(cfg, path)?;
        let g = gini_empirical(&sample)?;
        println!("gini = {g}");
        return write_json(
            &out.join("gini.json"),
            &GiniDataDoc { command: "gini", input: path.display().to_string(), config: cfg, gini: g },
        );
    }
    let g = cfg.gini;
    let steps = ((g.alpha_max - g.alpha_min) / g.alpha_step + 1e-9).floor() as usize;
    let mut alphas: Vec<f64> = (0..=steps).map(|i| g.alpha_min + g.alpha_step * i as f64).collect();
    let pole = gini_singularity(g.phi);
    let in_range = pole.filter(|&p| p > g.alpha_min && p < g.alpha_max);
    if let Some(p) = in_range {
        let at = alphas.partition_point(|&a| a < p);
        if alphas.get(at) != Some(&p) {
            alphas.insert(at, p);
        }
    }
    let profile = GiniProfile::new(g.phi, &alphas)?;
    let csv_path = out.join("gini-profile.csv");
    profile.write_csv(create(&csv_path)?)?;
    println!("wrote {}", csv_path.display());
    let upper = in_range.unwrap_or(g.alpha_max);
    let minimizer = gini_minimizer(g.phi, g.alpha_min, upper);
    if let Some(p) = in_range {
        println!("gini diverges at alpha = {p}");
    }
    write_json(
        &out.join("gini.json"),
        &GiniProfileDoc {
            command: "gini",
            config: cfg,
            phi: g.phi,
            singularity: pole,
            singularity_in_range: in_range.is_some(),
            stationary_points: profile.stationary_points.clone(),
            minimizer,
            points: profile.points.len(),
        },
    )
}

pub fn bins(cfg: &RunConfig, out: &Path, data: &Path) -> CmdResult {
    let sample = load(cfg, data)?;
    let binned = bin_density(&sample, cfg.bins)?;
    let path = out.join("bins.csv");
    let mut w = create(&path)?;
    binned.write_csv(&mut w)?;
    w.flush().map_err(|e| io_failure(&path, e))?;
    println!("wrote {} ({} bins)", path.display(), binned.bins.len());
    Ok(())
}
