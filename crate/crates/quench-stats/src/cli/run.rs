//! Subcommand execution and file emission.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::*;
use crate::charfun::{
    characteristic_function, cumulants_from_weights, pdf_from_charfun, uniform_grid,
    DistributionTable, WeightVector,
};
use crate::error::{Error, Result};
use crate::loschmidt::{self, SpectralWeights};
use crate::model_xy::{quench_modes, small_quench_check, CriticalExponents};
use crate::perturbation::{self, MatrixJson};
use crate::timeseries::{
    analytic_moments, empirical_stats, histogram, merge_frequency_classes, sample_trajectory,
    Histogram, HistogramExport, NormalizationRule, SamplingPlan,
};
use crate::universal::{
    epstein_zeta, limit_distribution, scaling_fit, truncation_law, universal_ratios, ZetaSpec,
};

/// Flag overrides applied on top of the config document.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

struct Emitter {
    out_dir: PathBuf,
    format: OutputFormat,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(out_dir: &Path, format: OutputFormat) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            format,
            files: Vec::new(),
        })
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(value)?)?;
        self.files.push(path);
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    /// A columnar table as CSV or JSON, honoring --format.
    fn write_table(&mut self, base: &str, headers: &[&str], cols: &[&[f64]]) -> Result<()> {
        match self.format {
            OutputFormat::Csv => {
                let mut text = String::new();
                text.push_str(&headers.join(","));
                text.push('\n');
                let rows = cols.first().map_or(0, |c| c.len());
                for i in 0..rows {
                    let row: Vec<String> =
                        cols.iter().map(|c| format!("{:.16e}", c[i])).collect();
                    text.push_str(&row.join(","));
                    text.push('\n');
                }
                self.write_text(&format!("{base}.csv"), &text)
            }
            OutputFormat::Json => {
                let obj: serde_json::Map<String, serde_json::Value> = headers
                    .iter()
                    .zip(cols)
                    .map(|(h, c)| ((*h).to_string(), serde_json::json!(c)))
                    .collect();
                self.write_json(&format!("{base}.json"), &obj)
            }
        }
    }

    fn write_distribution(&mut self, base: &str, t: &DistributionTable) -> Result<()> {
        self.write_table(base, &["x", "pdf", "cdf"], &[&t.x, &t.pdf, &t.cdf])
    }

    fn manifest<T: Serialize>(&mut self, subcommand: &str, config: &T) -> Result<()> {
        let mut value = serde_json::to_value(config)?;
        let obj = value
            .as_object_mut()
            .expect("configs serialize to objects");
        obj.insert(
            "artifact_version".into(),
            serde_json::json!(env!("CARGO_PKG_VERSION")),
        );
        obj.insert("subcommand".into(), serde_json::json!(subcommand));
        self.write_json("manifest.json", &value)
    }

    fn finish(self) -> RunOutcome {
        RunOutcome {
            out_dir: self.out_dir,
            files: self.files,
        }
    }
}

/// Execute one subcommand against a parsed config document.
pub fn run(
    subcommand: &str,
    doc: &ConfigDocument,
    overrides: &CliOverrides,
) -> Result<RunOutcome> {
    let out_dir = overrides
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("quench-out"));
    let format = overrides.format.unwrap_or_default();
    let mut em = Emitter::new(&out_dir, format)?;
    match subcommand {
        "modes" => run_modes(doc.parse::<ModesConfig>(subcommand)?, &mut em)?,
        "sim" => {
            let mut cfg = doc.parse::<SimConfig>(subcommand)?;
            if let Some(seed) = overrides.seed {
                cfg.seed = seed;
            }
            run_sim(cfg, &mut em)?
        }
        "charfun" => run_charfun(doc.parse::<CharfunConfig>(subcommand)?, &mut em)?,
        "universal" => run_universal(doc.parse::<UniversalConfig>(subcommand)?, &mut em)?,
        "le" => run_le(doc.parse::<LeConfig>(subcommand)?, &mut em)?,
        "quasifree" => run_quasifree(doc.parse::<QuasifreeConfig>(subcommand)?, &mut em)?,
        "exactdiag" => run_exactdiag(doc.parse::<ExactDiagConfig>(subcommand)?, &mut em)?,
        "scalingfit" => run_scalingfit(doc.parse::<ScalingFitConfig>(subcommand)?, &mut em)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown subcommand `{other}`"
            )))
        }
    }
    Ok(em.finish())
}

fn run_modes(cfg: ModesConfig, em: &mut Emitter) -> Result<()> {
    let qm = quench_modes(&cfg.protocol)?;
    let mut buf = Vec::new();
    qm.write_csv(&mut buf)?;
    em.write_text("modes.csv", &String::from_utf8(buf).expect("utf8 csv"))?;
    let exponents = CriticalExponents::ising_magnetization(cfg.protocol.bc_offset);
    let report = small_quench_check(&cfg.protocol, &exponents, 1.0)?;
    em.write_json("regime.json", &report)?;
    em.manifest("modes", &cfg)
}

#[derive(Serialize)]
struct SimStats {
    stats: crate::timeseries::EmpiricalStats,
    analytic_mean: f64,
    analytic_variance: f64,
    rescale: Rescale,
    scale_divisor: f64,
    n_dropped_modes: usize,
}

fn run_sim(cfg: SimConfig, em: &mut Emitter) -> Result<()> {
    let qm = quench_modes(&cfg.protocol)?;
    let am = analytic_moments(&qm.modes, 2)?;
    let plan = SamplingPlan {
        t_max: cfg.t_max,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        n_chunks: cfg.n_chunks,
    };
    let raw = sample_trajectory(&qm.modes, &plan)?;
    let (offset, divisor) = match cfg.rescale {
        Rescale::None => (0.0, 1.0),
        Rescale::Centered => (am.mean, 1.0),
        Rescale::PerSiteField => {
            let dh = cfg.protocol.h2 - cfg.protocol.h1;
            if dh == 0.0 {
                return Err(Error::InvalidArgument(
                    "per-site-field rescale needs h2 != h1".into(),
                ));
            }
            (am.mean, cfg.protocol.l as f64 * dh)
        }
        Rescale::UnitVariance => {
            if am.variance <= 0.0 {
                return Err(Error::InvalidArgument(
                    "unit-variance rescale needs a nonzero quench".into(),
                ));
            }
            (am.mean, am.variance.sqrt())
        }
    };
    let values: Vec<f64> = raw.iter().map(|&(_, v)| (v - offset) / divisor).collect();
    let stats = empirical_stats(&values);
    let range = cfg.range.unwrap_or_else(|| {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = 1e-9 * (hi - lo).max(1e-300);
        [lo - pad, hi + pad]
    });
    let edges = uniform_grid(range[0], range[1], cfg.bins + 1);
    let hist: Histogram = histogram(&values, &edges, NormalizationRule::Density)?;
    em.write_json(
        "histogram.json",
        &HistogramExport {
            histogram: &hist,
            seed: cfg.seed,
            t_max: cfg.t_max,
        },
    )?;
    em.write_json(
        "stats.json",
        &SimStats {
            stats,
            analytic_mean: am.mean,
            analytic_variance: am.variance / (divisor * divisor),
            rescale: cfg.rescale,
            scale_divisor: divisor,
            n_dropped_modes: qm.dropped.len(),
        },
    )?;
    if cfg.dump_samples {
        let rescaled: Vec<(f64, f64)> = raw
            .iter()
            .zip(&values)
            .map(|(&(t, _), &v)| (t, v))
            .collect();
        let mut buf = Vec::new();
        crate::timeseries::write_samples_csv(&rescaled, &mut buf)?;
        em.write_text("samples.csv", &String::from_utf8(buf).expect("utf8 csv"))?;
    }
    em.manifest("sim", &cfg)
}

fn charfun_scales(source: &WeightsSource) -> Result<Vec<f64>> {
    match source {
        WeightsSource::Inline { values } => Ok(values.clone()),
        WeightsSource::Protocol { protocol, rescale } => {
            let qm = quench_modes(protocol)?;
            let classes = merge_frequency_classes(&qm.modes);
            let mut scales: Vec<f64> = classes.iter().map(|c| c.amplitude.abs()).collect();
            if *rescale {
                let am = analytic_moments(&qm.modes, 1)?;
                if am.variance <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "rescale needs a nonzero quench".into(),
                    ));
                }
                let dm = am.variance.sqrt();
                for s in scales.iter_mut() {
                    *s /= dm;
                }
            }
            Ok(scales)
        }
    }
}

fn run_charfun(cfg: CharfunConfig, em: &mut Emitter) -> Result<()> {
    let scales = charfun_scales(&cfg.weights)?;
    let wv = WeightVector::new(scales)?;
    let s_grid = uniform_grid(0.0, cfg.s_max, cfg.s_points);
    let chi = characteristic_function(&wv, &s_grid);
    em.write_table("chi", &["s", "chi"], &[&s_grid, &chi])?;
    let x_grid = uniform_grid(-cfg.x_max, cfg.x_max, cfg.x_points);
    let scales = wv.as_slice().to_vec();
    let table = pdf_from_charfun(move |s| crate::charfun::chi_product(&scales, s), &x_grid)?;
    em.write_distribution("pdf", &table)?;
    // half-amplitude cumulants of the same weights
    let halves = WeightVector::new(wv.as_slice().iter().map(|c| c / 2.0).collect())?;
    let cum = cumulants_from_weights(&halves, 4)?;
    em.write_json(
        "cumulants.json",
        &serde_json::json!({"q": cum.q, "kappa": cum.kappa}),
    )?;
    em.manifest("charfun", &cfg)
}

fn run_universal(cfg: UniversalConfig, em: &mut Emitter) -> Result<()> {
    let ratios = universal_ratios(cfg.alpha, cfg.d, &cfg.b, cfg.p_max)?;
    let mut zeta_values = serde_json::Map::new();
    for p in 1..=cfg.p_max {
        let arg = 2.0 * p as f64 * cfg.alpha;
        if arg > cfg.d as f64 {
            let v = epstein_zeta(&ZetaSpec {
                alpha: arg,
                d: cfg.d,
                b: cfg.b.clone(),
                l: None,
            })?;
            zeta_values.insert(format!("zeta({arg})"), serde_json::json!(v));
        }
    }
    em.write_json(
        "ratios.json",
        &serde_json::json!({"ratios": ratios, "zeta": zeta_values}),
    )?;
    if let Some(sizes) = &cfg.truncation_sizes {
        let spec = ZetaSpec {
            alpha: cfg.alpha,
            d: cfg.d,
            b: cfg.b.clone(),
            l: None,
        };
        let fit = truncation_law(&spec, sizes)?;
        em.write_json("truncation.json", &fit)?;
    }
    if let Some(variable) = cfg.limit_variable {
        let table = limit_distribution(cfg.alpha, cfg.d, &cfg.b, variable)?;
        em.write_distribution("limit_pdf", &table)?;
    }
    em.manifest("universal", &cfg)
}

fn le_weights(source: &LeWeightsSource) -> Result<SpectralWeights> {
    match source {
        LeWeightsSource::Inline { p } => SpectralWeights::new(p.clone()),
        LeWeightsSource::File { path } => {
            let text = fs::read_to_string(path)?;
            SpectralWeights::from_csv(&text)
        }
        LeWeightsSource::Critical {
            nu,
            d,
            b,
            n_modes,
            delta_lambda,
        } => loschmidt::critical_weights(*nu, *d, b, *n_modes, *delta_lambda),
    }
}

fn run_le(cfg: LeConfig, em: &mut Emitter) -> Result<()> {
    let weights = le_weights(&cfg.weights)?;
    let mut buf = Vec::new();
    weights.write_csv(&mut buf)?;
    em.write_text("weights.csv", &String::from_utf8(buf).expect("utf8 csv"))?;
    let purities = loschmidt::purities(&weights, cfg.m_max)?;
    em.write_json("purities.json", &purities)?;
    let sum = weights.sum();
    let x_hi = cfg.x_max.unwrap_or((sum * sum * 1.02).min(40.0));
    let grid = uniform_grid(0.0, x_hi, cfg.x_points);
    let w = weights.clone();
    let table = match cfg.window_sigma {
        Some(sigma) => loschmidt::le_pdf_windowed(
            move |rho| loschmidt::le_charfun_at(&w, rho),
            &grid,
            sigma,
        )?,
        None => loschmidt::le_pdf(move |rho| loschmidt::le_charfun_at(&w, rho), &grid)?,
    };
    em.write_distribution("le_pdf", &table)?;
    em.manifest("le", &cfg)
}

fn run_quasifree(cfg: QuasifreeConfig, em: &mut Emitter) -> Result<()> {
    let (alpha, epsilon) = match &cfg.modes {
        QuasifreeModes::Inline { alpha, epsilon } => (alpha.clone(), epsilon.clone()),
        QuasifreeModes::File { path } => {
            let text = fs::read_to_string(path)?;
            loschmidt::quasifree::read_modes_csv(&text)?
        }
    };
    if alpha.len() != epsilon.len() {
        return Err(Error::InvalidArgument(
            "alpha and epsilon must have equal length".into(),
        ));
    }
    let t_grid = uniform_grid(0.0, cfg.t_max, cfg.t_points);
    let le: Vec<f64> = t_grid
        .iter()
        .map(|&t| loschmidt::product_le(&alpha, &epsilon, t))
        .collect();
    em.write_table("echo", &["t", "le"], &[&t_grid, &le])?;
    let lambda_grid = uniform_grid(-cfg.lambda_max, cfg.lambda_max, cfg.lambda_points);
    let chi = loschmidt::g_charfun(&alpha, &lambda_grid)?;
    let re: Vec<f64> = chi.iter().map(|c| c.re).collect();
    let im: Vec<f64> = chi.iter().map(|c| c.im).collect();
    em.write_table("g_chi", &["lambda", "re", "im"], &[&lambda_grid, &re, &im])?;
    let cumulants = loschmidt::ln_le_cumulants(&alpha)?;
    em.write_json("g_cumulants.json", &cumulants)?;
    em.manifest("quasifree", &cfg)
}

#[derive(Serialize)]
struct ExactDiagReport {
    q: Vec<f64>,
    chi_ab: f64,
    diam_a: f64,
    n_gap_warnings: usize,
    gap_warnings: Vec<perturbation::GapClass>,
    variance: Option<f64>,
    delta_lambda: Option<f64>,
}

fn run_exactdiag(cfg: ExactDiagConfig, em: &mut Emitter) -> Result<()> {
    let sys = match &cfg.system {
        ExactDiagSource::XyDense { l, h, gamma } => {
            let (h0, m) = perturbation::build_xy_dense(*l, *h, *gamma)?;
            perturbation::DenseSystem::new(h0, m.clone(), m)?
        }
        ExactDiagSource::Files { h0, a, b } => {
            let load = |p: &PathBuf| -> Result<_> {
                let json: MatrixJson = serde_json::from_str(&fs::read_to_string(p)?)?;
                json.to_matrix()
            };
            perturbation::DenseSystem::new(load(h0)?, load(a)?, load(b)?)?
        }
    };
    let w = perturbation::perturbative_weights(&sys)?;
    let mut buf = String::from("n,gap,abs_z\n");
    for (i, (g, z)) in w.gaps.iter().zip(&w.z).enumerate() {
        buf.push_str(&format!("{},{:.16e},{:.16e}\n", i + 1, g, z.norm()));
    }
    em.write_text("zweights.csv", &buf)?;
    em.write_json(
        "report.json",
        &ExactDiagReport {
            q: w.q.clone(),
            chi_ab: w.chi_ab,
            diam_a: w.diam_a,
            n_gap_warnings: w.gap_warnings.len(),
            gap_warnings: w.gap_warnings.clone(),
            variance: cfg.delta_lambda.map(|dl| w.variance(dl)),
            delta_lambda: cfg.delta_lambda,
        },
    )?;
    em.manifest("exactdiag", &cfg)
}

fn run_scalingfit(cfg: ScalingFitConfig, em: &mut Emitter) -> Result<()> {
    let (sizes, values) = match (&cfg.sizes, &cfg.values, &cfg.input) {
        (Some(s), Some(v), None) => (s.clone(), v.clone()),
        (None, None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            let mut sizes = Vec::new();
            let mut values = Vec::new();
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || (ln == 0 && line.chars().next().is_some_and(char::is_alphabetic)) {
                    continue;
                }
                let mut fields = line.split(',');
                let parse = |f: Option<&str>| -> Result<f64> {
                    f.ok_or_else(|| {
                        Error::InvalidArgument(format!("fit csv line {} malformed", ln + 1))
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| {
                        Error::InvalidArgument(format!("fit csv line {}: {e}", ln + 1))
                    })
                };
                sizes.push(parse(fields.next())?);
                values.push(parse(fields.next())?);
            }
            (sizes, values)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "scalingfit needs either inline sizes+values or an input file".into(),
            ))
        }
    };
    let fit = scaling_fit(&sizes, &values)?;
    em.write_json("fit.json", &fit)?;
    em.manifest("scalingfit", &cfg)
}
