//! Executes a configuration and writes its outputs.
//!
//! Layout of a run directory:
//!
//! ```text
//! config.toml            effective configuration (output = ".")
//! summary.json           per-outcome scalars and flags
//! manifest.json          checksums, deficits, flags, timings
//! plot_recipe.txt        presets only
//! <resource>_phase<φ>/   one directory per source
//!     distribution.csv   m, probability
//!     counts.csv         m, probability, parity, mean_photons, unreliable
//!     state_m<m>.csv     n, re, im
//!     wigner_m<m>.csv    x, p, W
//!     evidence.csv       v, P(V)                      with a detector
//!     posterior_<tag>.csv m, prior, posterior
//!     density_<tag>.csv  row, col, re, im
//!     wigner_<tag>.csv
//! monte_carlo.csv        m, worst_sd                 when sampling is on
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use mesoherald::detector::sampling::sample_response;
use mesoherald::fock::{epr_state_tol, split_squeezed_state_tol};
use mesoherald::phasespace::write_csv;
use mesoherald::{
    bin_for_posterior_mode, detector_response, herald_mixed, negativity_metrics, posterior, wigner, DensityMatrix,
    DetectorModel, Error, FockVector, HeraldedEnsemble, NegativityMetrics, Resource, ResponseMatrix, SourceDescriptor,
    TwoModeState,
};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Conditioning, ExperimentConfig, Source};
use crate::error::{CliError, Result};
use crate::manifest::{record, sha256_hex, Flag, FlagKind, RunManifest, SourceRecord};

/// Wigner normalization tolerance before a flag is raised.
const WIGNER_NORM_TOL: f64 = 1e-3;
/// Monte-Carlo agreement threshold, in binomial standard deviations per bin.
const MC_SD_LIMIT: f64 = 5.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub sources: Vec<SourceSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub label: String,
    pub resource: Resource,
    pub alpha: [f64; 2],
    pub r: f64,
    pub truncation_deficit: f64,
    pub tail_probability: f64,
    pub modal_m: usize,
    pub outcomes: Vec<OutcomeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub tag: String,
    /// Ideal count, or the posterior mode for detector outcomes.
    pub m: usize,
    /// Detector output value; absent for ideal counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// `P(m)` for ideal counts, `P(V)` per bin for detector outcomes.
    pub probability: f64,
    pub parity: f64,
    pub purity: f64,
    pub mean_photons: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negativity: Option<NegativityMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wigner_integral: Option<f64>,
}

/// Writes files under one directory and remembers their relative paths.
struct Sink<'a> {
    root: &'a Path,
    prefix: String,
    written: Vec<String>,
}

impl<'a> Sink<'a> {
    fn new(root: &'a Path, prefix: &str) -> Result<Self> {
        let dir = root.join(prefix);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            root,
            prefix: prefix.to_string(),
            written: Vec::new(),
        })
    }

    fn rel(&self, name: &str) -> String {
        if self.prefix.is_empty() {
            name.to_string()
        } else {
            format!("{}/{name}", self.prefix)
        }
    }

    fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let rel = self.rel(name);
        let path = self.root.join(&rel);
        let io = |e: csv::Error| CliError::io(&path, e.into());
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(rel);
        Ok(())
    }

    fn wigner(&mut self, name: &str, map: &mesoherald::WignerMap) -> Result<()> {
        let rel = self.rel(name);
        let path = self.root.join(&rel);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_csv(map, BufWriter::new(file)).map_err(|e| CliError::io(&path, e))?;
        self.written.push(rel);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let rel = self.rel(name);
        let path = self.root.join(&rel);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.written.push(rel);
        Ok(())
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

struct SourceResult {
    summary: Option<SourceSummary>,
    record: SourceRecord,
    written: Vec<String>,
    flags: Vec<Flag>,
}

fn build_resource(cfg: &ExperimentConfig, resource: Resource) -> mesoherald::Result<TwoModeState> {
    let c = &cfg.cutoffs;
    let r = cfg.r();
    match resource {
        Resource::SplitSqueezed => split_squeezed_state_tol(r, 0.0, c.signal, c.ancilla, c.deficit_tolerance),
        Resource::Epr => epr_state_tol(r, c.signal, c.ancilla, c.deficit_tolerance),
    }
}

/// State-level scalars, the Wigner map if enabled, and any flags.
fn characterise(
    cfg: &ExperimentConfig,
    rho: &DensityMatrix,
    scope: &str,
    wigner_name: &str,
    sink: &mut Sink,
    flags: &mut Vec<Flag>,
) -> Result<(Option<NegativityMetrics>, Option<f64>)> {
    if !cfg.wigner.enabled {
        return Ok((None, None));
    }
    let grid = cfg.wigner.grid_for(rho);
    let map = wigner(rho, &grid, cfg.wigner.convention)?;
    let neg = negativity_metrics(&map);
    let integral = map.integral();
    if neg.min_on_boundary {
        flags.push(Flag {
            scope: scope.to_string(),
            kind: FlagKind::WignerBoundary,
            detail: format!("minimum {:.3e} at the grid edge", neg.min_value),
        });
    }
    if (integral - 1.0).abs() > WIGNER_NORM_TOL {
        flags.push(Flag {
            scope: scope.to_string(),
            kind: FlagKind::WignerNormalization,
            detail: format!("integral {integral:.6}"),
        });
    }
    sink.wigner(wigner_name, &map)?;
    Ok((Some(neg), Some(integral)))
}

fn density_rows(rho: &DensityMatrix) -> Vec<Vec<String>> {
    let m = rho.matrix();
    let mut rows = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > 0.0 {
                rows.push(vec![i.to_string(), j.to_string(), f(z.re), f(z.im)]);
            }
        }
    }
    rows
}

fn state_rows(psi: &FockVector) -> Vec<Vec<String>> {
    (0..=psi.cutoff())
        .map(|n| {
            let a = psi.amplitude(n);
            vec![n.to_string(), f(a.re), f(a.im)]
        })
        .collect()
}

fn run_source(
    cfg: &ExperimentConfig,
    source: Source,
    detector: Option<&(DetectorModel, ResponseMatrix)>,
    root: &Path,
) -> Result<SourceResult> {
    let start = Instant::now();
    let label = source.label();
    let mut flags = Vec::new();
    let mut sink = Sink::new(root, &label)?;
    let alpha = cfg.alpha(source.phase);

    let state = match build_resource(cfg, source.resource) {
        Ok(s) => s,
        Err(e) => {
            flags.push(Flag {
                scope: label.clone(),
                kind: FlagKind::Failed,
                detail: e.to_string(),
            });
            return Ok(SourceResult {
                summary: None,
                record: SourceRecord {
                    label,
                    truncation_deficit: f64::NAN,
                    tail_probability: f64::NAN,
                    seconds: start.elapsed().as_secs_f64(),
                },
                written: sink.written,
                flags,
            });
        }
    };
    let descriptor = SourceDescriptor {
        resource: source.resource,
        r: cfg.r(),
        alpha,
        signal_cutoff: cfg.cutoffs.signal,
        ancilla_cutoff: cfg.cutoffs.ancilla,
    };
    let ensemble = HeraldedEnsemble::build(&state, descriptor, cfg.cutoffs.m_max);
    let probs = ensemble.probabilities();
    sink.csv(
        "distribution.csv",
        &["m", "probability"],
        probs.iter().enumerate().map(|(m, p)| vec![m.to_string(), f(*p)]),
    )?;

    let counts = cfg.counts();
    sink.csv(
        "counts.csv",
        &["m", "probability", "parity", "mean_photons", "unreliable"],
        counts.iter().map(|&m| {
            let h = ensemble.get(m).expect("m within m_max");
            vec![
                m.to_string(),
                f(h.probability),
                f(h.state.parity()),
                f(h.state.mean_photon_number()),
                u8::from(h.unreliable).to_string(),
            ]
        }),
    )?;

    let mut outcomes = Vec::new();
    for &m in &counts {
        let h = ensemble.get(m).expect("m within m_max");
        let scope = format!("{label}/m{m}");
        if h.unreliable {
            flags.push(Flag {
                scope: scope.clone(),
                kind: FlagKind::Unreliable,
                detail: format!("P({m}) = {:.3e}", h.probability),
            });
        }
        let rho = h.state.to_density();
        sink.csv(&format!("state_m{m}.csv"), &["n", "re", "im"], state_rows(&h.state))?;
        let (negativity, wigner_integral) = if h.unreliable {
            (None, None)
        } else {
            characterise(cfg, &rho, &scope, &format!("wigner_m{m}.csv"), &mut sink, &mut flags)?
        };
        outcomes.push(OutcomeSummary {
            tag: format!("m{m}"),
            m,
            v: None,
            probability: h.probability,
            parity: h.state.parity(),
            purity: 1.0,
            mean_photons: h.state.mean_photon_number(),
            negativity,
            wigner_integral,
        });
    }

    if let Some((model, resp)) = detector {
        let evidence = resp.evidence(&probs);
        sink.csv(
            "evidence.csv",
            &["v", "p_v"],
            evidence.iter().enumerate().map(|(b, p)| vec![f(resp.v(b)), f(*p)]),
        )?;
        for cond in &cfg.conditioning {
            let (tag, bin) = match *cond {
                Conditioning::PosteriorMode(m) => (format!("mode{m}"), bin_for_posterior_mode(resp, &probs, m)),
                Conditioning::V(v) => (format!("v{v:.3}"), model.bin_of(v)),
                _ => continue,
            };
            let scope = format!("{label}/{tag}");
            let Some(bin) = bin else {
                flags.push(Flag {
                    scope,
                    kind: FlagKind::NoMatchingBin,
                    detail: format!("{cond:?}"),
                });
                continue;
            };
            let post = match posterior(resp, &probs, bin) {
                Ok(p) => p,
                Err(Error::ZeroEvidence { bin }) => {
                    flags.push(Flag {
                        scope,
                        kind: FlagKind::ZeroEvidence,
                        detail: format!("v = {}", resp.v(bin)),
                    });
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let mode = (0..post.len())
                .max_by(|&a, &b| post[a].total_cmp(&post[b]))
                .unwrap_or(0);
            sink.csv(
                &format!("posterior_{tag}.csv"),
                &["m", "prior", "posterior"],
                post.iter()
                    .enumerate()
                    .map(|(m, p)| vec![m.to_string(), f(probs[m]), f(*p)]),
            )?;
            let rho = herald_mixed(&ensemble, resp, bin)?;
            sink.csv(
                &format!("density_{tag}.csv"),
                &["row", "col", "re", "im"],
                density_rows(&rho),
            )?;
            let (negativity, wigner_integral) =
                characterise(cfg, &rho, &scope, &format!("wigner_{tag}.csv"), &mut sink, &mut flags)?;
            outcomes.push(OutcomeSummary {
                tag,
                m: mode,
                v: Some(resp.v(bin)),
                probability: evidence[bin],
                parity: rho.parity(),
                purity: rho.purity(),
                mean_photons: rho.mean_photon_number(),
                negativity,
                wigner_integral,
            });
        }
    }

    let summary = SourceSummary {
        label: label.clone(),
        resource: source.resource,
        alpha: [alpha.re, alpha.im],
        r: cfg.r(),
        truncation_deficit: state.truncation_deficit(),
        tail_probability: ensemble.tail_probability(),
        modal_m: ensemble.modal_m(),
        outcomes,
    };
    Ok(SourceResult {
        record: SourceRecord {
            label,
            truncation_deficit: summary.truncation_deficit,
            tail_probability: summary.tail_probability,
            seconds: start.elapsed().as_secs_f64(),
        },
        summary: Some(summary),
        written: sink.written,
        flags,
    })
}

/// Compares analytic response columns with direct sampling at the requested
/// posterior modes (or the middle of the count range).
fn monte_carlo(
    cfg: &ExperimentConfig,
    model: &DetectorModel,
    resp: &ResponseMatrix,
    sink: &mut Sink,
) -> Result<Vec<Flag>> {
    let samples = cfg.detector.as_ref().map_or(0, |d| d.monte_carlo_samples);
    if samples == 0 {
        return Ok(Vec::new());
    }
    let mut ms: Vec<usize> = cfg
        .conditioning
        .iter()
        .filter_map(|c| match c {
            Conditioning::PosteriorMode(m) => Some(*m),
            _ => None,
        })
        .collect();
    if ms.is_empty() {
        ms.push(cfg.cutoffs.m_max / 2);
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for m in ms {
        let hist = sample_response(model, m, samples, &mut rng);
        let worst = resp
            .column(m)
            .iter()
            .zip(&hist)
            .map(|(p, q)| {
                let sd = (p.max(1.0 / samples as f64) * (1.0 - p) / samples as f64).sqrt();
                (p - q).abs() / sd
            })
            .fold(0.0, f64::max);
        if worst > MC_SD_LIMIT {
            flags.push(Flag {
                scope: "detector".into(),
                kind: FlagKind::MonteCarlo,
                detail: format!("m = {m}: worst bin {worst:.2} sd"),
            });
        }
        rows.push(vec![m.to_string(), f(worst)]);
    }
    sink.csv("monte_carlo.csv", &["m", "worst_sd"], rows)?;
    Ok(flags)
}

/// Runs `cfg`, writing everything under `out`. Numeric problems are recorded
/// as flags in the manifest; the caller decides what they mean for the exit
/// status.
pub fn run(cfg: &ExperimentConfig, out: &Path, plot_recipe: Option<&str>) -> Result<RunManifest> {
    cfg.validate()?;
    let start = Instant::now();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let mut stored = cfg.clone();
    stored.output = ".".into();
    let config_text = stored.to_toml();

    let detector = match &cfg.detector {
        Some(d) => {
            let model = d.model(cfg.cutoffs.m_max)?;
            let resp = detector_response(&model, cfg.cutoffs.m_max)?;
            Some((model, resp))
        }
        None => None,
    };

    let results: Vec<SourceResult> = cfg
        .sources()
        .into_par_iter()
        .map(|s| run_source(cfg, s, detector.as_ref(), out))
        .collect::<Result<_>>()?;

    let mut top = Sink::new(out, "")?;
    top.text("config.toml", &config_text)?;
    if let Some(recipe) = plot_recipe {
        top.text("plot_recipe.txt", recipe)?;
    }
    let mut flags = Vec::new();
    if let Some((model, resp)) = &detector {
        flags.extend(monte_carlo(cfg, model, resp, &mut top)?);
    }
    let summary = RunSummary {
        sources: results.iter().filter_map(|r| r.summary.clone()).collect(),
    };
    top.text(
        "summary.json",
        &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )?;

    let mut paths = top.written;
    let mut sources = Vec::new();
    for r in results {
        paths.extend(r.written);
        flags.extend(r.flags);
        sources.push(r.record);
    }
    paths.sort();
    let outputs = paths.iter().map(|p| record(out, p)).collect::<Result<_>>()?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: sha256_hex(config_text.as_bytes()),
        config: stored,
        outputs,
        sources,
        flags,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.write(out)?;
    Ok(manifest)
}
