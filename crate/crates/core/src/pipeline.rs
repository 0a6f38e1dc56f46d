//! Command orchestration: simulate → analyze → estimate, probability
//! validation and plotting. Each `cmd_*` writes its outputs plus a
//! `manifest.json` into an output directory.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_traces, AnalysisConfig, Observations, SegmentationConfig};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimationReport, EstimatorConfig};
use crate::io::{self, RunManifest};
use crate::mc::{mc_edge, mc_edge_concave, mc_vertex, McSetup};
use crate::prob::{q_d_edge, q_d_edge_concave, q_d_vertex};
use crate::render::{chart_svg, placeholder_svg, polygon_svg, shape_svg, Series};
use crate::sim::{simulate_all, LineMode, Scenario};
use crate::trace::{split_by_sensor, KnownParams, TraceSample};

/// Every tunable threshold of analysis and estimation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub segmentation: SegmentationConfig,
    pub estimator: EstimatorConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })
    }
}

/// Command-line overrides of scenario and estimator settings.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<LineMode>,
    pub epsilon_s: Option<f64>,
    pub epsilon_l: Option<f64>,
    pub min_support: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, sc: &mut Scenario) -> Result<()> {
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        if let Some(m) = self.mode {
            sc.line_mode = m;
        }
        if let Some(e) = self.epsilon_s {
            sc.epsilon_s = e;
        }
        if let Some(e) = self.epsilon_l {
            sc.epsilon_l = e;
        }
        sc.validate()
    }

    pub fn apply_config(&self, cfg: &mut PipelineConfig) {
        if let Some(m) = self.min_support {
            cfg.estimator.min_support = Some(m);
        }
        if let Some(e) = self.epsilon_s {
            cfg.estimator.slope_noise = e;
        }
    }
}

/// Everything one in-memory run produces.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub traces: Vec<Vec<TraceSample>>,
    pub known: KnownParams,
    pub observations: Observations,
    pub report: EstimationReport,
}

pub fn analysis_config(sc: &Scenario, cfg: &PipelineConfig) -> AnalysisConfig {
    AnalysisConfig {
        segmentation: cfg.segmentation,
        epsilon_s: sc.epsilon_s,
        noise_seed: sc.seed,
    }
}

/// The estimator settings for sensors with the scenario's slope noise.
pub fn estimator_config(sc: &Scenario, cfg: &PipelineConfig) -> EstimatorConfig {
    EstimatorConfig {
        slope_noise: sc.epsilon_s,
        ..cfg.estimator
    }
}

/// Simulate, analyze and estimate `sc` in memory; the report is compared
/// with the scenario polygon.
pub fn run_pipeline(sc: &Scenario, cfg: &PipelineConfig) -> Result<PipelineRun> {
    sc.validate()?;
    let traces = simulate_all(sc);
    let known = sc.known_params();
    let observations = analyze_traces(&traces, &known, &analysis_config(sc, cfg));
    let mut report = estimate(&observations, &known, &estimator_config(sc, cfg))?;
    report.compare_with(&sc.polygon);
    Ok(PipelineRun {
        traces,
        known,
        observations,
        report,
    })
}

fn prepare_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn load_scenario(path: &Path, ov: &Overrides, m: &mut RunManifest) -> Result<Scenario> {
    let mut sc = io::load_scenario(path)?;
    ov.apply(&mut sc)?;
    m.input(path)?;
    m.seed = Some(sc.seed);
    m.scenario_sha256 = Some(io::sha256_hex(io::scenario_to_toml(&sc).as_bytes()));
    Ok(sc)
}

fn write_text(path: &Path, text: &str, m: &mut RunManifest) -> Result<()> {
    std::fs::write(path, text)?;
    m.output(path)
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// The estimation report, for commands that produce one.
    pub report: Option<EstimationReport>,
}

impl Outcome {
    fn from_manifest(m: &RunManifest) -> Self {
        Outcome {
            outputs: m.outputs.iter().map(|d| d.path.clone()).collect(),
            ..Default::default()
        }
    }
}

fn write_simulation(sc: &Scenario, out: &Path, m: &mut RunManifest) -> Result<(Vec<Vec<TraceSample>>, KnownParams)> {
    let traces = simulate_all(sc);
    let known = sc.known_params();
    let p = out.join("traces.jsonl");
    io::write_traces(&p, &traces)?;
    m.output(&p)?;
    let p = out.join("known.json");
    io::write_json(&p, &known)?;
    m.output(&p)?;
    let p = out.join("scenario.toml");
    write_text(&p, &io::scenario_to_toml(sc), m)?;
    Ok((traces, known))
}

/// Traces, known parameters and the resolved scenario.
pub fn cmd_simulate(scenario: &Path, ov: &Overrides, out: &Path, args: Vec<String>) -> Result<Outcome> {
    let mut m = RunManifest::start("simulate", args);
    let sc = load_scenario(scenario, ov, &mut m)?;
    prepare_dir(out)?;
    write_simulation(&sc, out, &mut m)?;
    m.finish(&out.join("manifest.json"))?;
    let mut o = Outcome::from_manifest(&m);
    if sc.n_s == 0 {
        o.warnings.push("n_s = 0: the trace file is empty".into());
    }
    Ok(o)
}

fn write_analysis(
    traces: &[Vec<TraceSample>],
    known: &KnownParams,
    acfg: &AnalysisConfig,
    out: &Path,
    m: &mut RunManifest,
) -> Result<Observations> {
    let obs = analyze_traces(traces, known, acfg);
    let p = out.join("observations.jsonl");
    io::write_observations(&p, &obs)?;
    m.output(&p)?;
    Ok(obs)
}

/// Observations from a trace file. Slope noise uses `--noise-eps-s` and
/// `--seed`.
pub fn cmd_analyze(
    traces: &Path,
    known: &Path,
    cfg: &PipelineConfig,
    ov: &Overrides,
    out: &Path,
    args: Vec<String>,
) -> Result<Outcome> {
    let mut m = RunManifest::start("analyze", args);
    let samples = io::read_traces(traces)?;
    m.input(traces)?;
    let kp: KnownParams = io::read_json(known)?;
    m.input(known)?;
    m.seed = ov.seed;
    prepare_dir(out)?;
    let grouped: Vec<Vec<TraceSample>> = split_by_sensor(&samples).into_iter().map(|x| x.1).collect();
    let acfg = AnalysisConfig {
        segmentation: cfg.segmentation,
        epsilon_s: ov.epsilon_s.unwrap_or(0.0),
        noise_seed: ov.seed.unwrap_or(1),
    };
    write_analysis(&grouped, &kp, &acfg, out, &mut m)?;
    m.finish(&out.join("manifest.json"))?;
    Ok(Outcome::from_manifest(&m))
}

fn write_report(report: &EstimationReport, truth: Option<&Scenario>, out: &Path, m: &mut RunManifest) -> Result<()> {
    write_text(&out.join("report.txt"), &report.to_text(), m)?;
    let p = out.join("report.json");
    io::write_json(&p, report)?;
    m.output(&p)?;
    let svg = match report.shapes.first() {
        Some(s) => shape_svg(s, truth.map(|t| &t.polygon), "estimated shape"),
        None => placeholder_svg(report.diagnostics.last().map_or("no shape assembled", |d| d.as_str())),
    };
    write_text(&out.join("shape.svg"), &svg, m)
}

/// Estimation report (text and JSON) and the best shape as SVG. `truth`
/// adds relative errors and an overlay.
pub fn cmd_estimate(
    observations: &Path,
    known: &Path,
    truth: Option<&Path>,
    cfg: &PipelineConfig,
    ov: &Overrides,
    out: &Path,
    args: Vec<String>,
) -> Result<Outcome> {
    let mut m = RunManifest::start("estimate", args);
    let obs = io::read_observations(observations)?;
    m.input(observations)?;
    let kp: KnownParams = io::read_json(known)?;
    m.input(known)?;
    let truth = truth
        .map(|p| load_scenario(p, &Overrides::default(), &mut m))
        .transpose()?;
    let mut cfg = *cfg;
    ov.apply_config(&mut cfg);
    prepare_dir(out)?;
    let mut report = estimate(&obs, &kp, &cfg.estimator)?;
    if let Some(t) = &truth {
        report.compare_with(&t.polygon);
    }
    write_report(&report, truth.as_ref(), out, &mut m)?;
    m.finish(&out.join("manifest.json"))?;
    let mut o = Outcome::from_manifest(&m);
    o.report = Some(report);
    Ok(o)
}

/// All three stages from a scenario file, writing every intermediate file.
pub fn cmd_pipeline(
    scenario: &Path,
    cfg: &PipelineConfig,
    ov: &Overrides,
    out: &Path,
    args: Vec<String>,
) -> Result<Outcome> {
    let mut m = RunManifest::start("pipeline", args);
    let sc = load_scenario(scenario, ov, &mut m)?;
    let mut cfg = *cfg;
    ov.apply_config(&mut cfg);
    prepare_dir(out)?;
    let (traces, known) = write_simulation(&sc, out, &mut m)?;
    let obs = write_analysis(&traces, &known, &analysis_config(&sc, &cfg), out, &mut m)?;
    let mut report = estimate(&obs, &known, &estimator_config(&sc, &cfg))?;
    report.compare_with(&sc.polygon);
    write_report(&report, Some(&sc), out, &mut m)?;
    write_text(
        &out.join("truth.svg"),
        &polygon_svg(&sc.polygon, "ground truth"),
        &mut m,
    )?;
    m.finish(&out.join("manifest.json"))?;
    let mut o = Outcome::from_manifest(&m);
    o.report = Some(report);
    Ok(o)
}

/// One closed-form versus Monte Carlo comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbRow {
    /// `edge`, `vertex` or `concave_edge`.
    pub kind: String,
    /// Edge length or inner angle.
    pub param: f64,
    pub delta_xi: Option<f64>,
    pub theta: f64,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub sigma: f64,
    pub z: f64,
}

impl ProbRow {
    pub fn flagged(&self) -> bool {
        self.z.abs() > 3.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbValidation {
    pub setup: McSetup,
    /// Interior θ grid points in `(0, π)`.
    pub grid: usize,
}

impl Default for ProbValidation {
    fn default() -> Self {
        Self {
            setup: McSetup::new(20_000, 1),
            grid: 11,
        }
    }
}

/// Monte Carlo frequencies against the closed forms over a θ grid.
pub fn validate_prob(v: &ProbValidation) -> Result<Vec<ProbRow>> {
    let arena = v.setup.arena();
    let thetas: Vec<f64> = (1..=v.grid).map(|k| k as f64 * PI / (v.grid + 1) as f64).collect();
    let mut rows = Vec::new();
    for &theta in &thetas {
        let mut push = |kind: &str, param: f64, dx: Option<f64>, q: f64, est: crate::mc::McEstimate| {
            rows.push(ProbRow {
                kind: kind.into(),
                param,
                delta_xi: dx,
                theta,
                closed_form: q,
                monte_carlo: est.fraction(),
                sigma: est.sigma_at(q),
                z: est.z(q),
            })
        };
        for lambda in [100.0, 50.0] {
            push(
                "edge",
                lambda,
                None,
                q_d_edge(lambda, theta, &arena),
                mc_edge(lambda, theta, &v.setup)?,
            );
        }
        for gamma in [FRAC_PI_2, 3.0 * FRAC_PI_2] {
            push(
                "vertex",
                gamma,
                None,
                q_d_vertex(gamma, theta, &arena)?,
                mc_vertex(gamma, theta, &v.setup)?,
            );
        }
        for (lambda, dx) in [(50.0, FRAC_PI_2), (200.0, FRAC_PI_4)] {
            push(
                "concave_edge",
                lambda,
                Some(dx),
                q_d_edge_concave(lambda, theta, dx, &arena),
                mc_edge_concave(lambda, theta, dx, &v.setup)?,
            );
        }
    }
    Ok(rows)
}

pub fn prob_table_csv(rows: &[ProbRow]) -> String {
    let mut s = String::from("kind,param,delta_xi,theta,closed_form,monte_carlo,sigma,z,flag\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.3},{}",
            r.kind,
            r.param,
            r.delta_xi.map_or(String::new(), |d| format!("{d:.6}")),
            r.theta,
            r.closed_form,
            r.monte_carlo,
            r.sigma,
            r.z,
            if r.flagged() { "OUTSIDE_3SIGMA" } else { "" }
        );
    }
    s
}

/// `q_d` of whole edges (λ = 50, 100) and a right-angle vertex on a fine θ
/// grid over `[0, π]`.
pub fn qd_curve(setup: &McSetup, points: usize) -> Vec<[f64; 4]> {
    let arena = setup.arena();
    (0..points)
        .map(|k| {
            let t = k as f64 * PI / (points - 1).max(1) as f64;
            [
                t,
                q_d_edge(50.0, t, &arena),
                q_d_edge(100.0, t, &arena),
                q_d_vertex(FRAC_PI_2, t, &arena).unwrap_or(0.0),
            ]
        })
        .collect()
}

pub fn cmd_validate_prob(v: &ProbValidation, out: &Path, args: Vec<String>) -> Result<Outcome> {
    let mut m = RunManifest::start("validate-prob", args);
    m.seed = Some(v.setup.seed);
    let rows = validate_prob(v)?;
    prepare_dir(out)?;
    write_text(&out.join("prob_table.csv"), &prob_table_csv(&rows), &mut m)?;
    let curve = qd_curve(&v.setup, 64);
    let mut csv = String::from("theta,q_edge_50,q_edge_100,q_vertex_right\n");
    for c in &curve {
        let _ = writeln!(csv, "{:.6},{:.8},{:.8},{:.8}", c[0], c[1], c[2], c[3]);
    }
    write_text(&out.join("qd_theta.csv"), &csv, &mut m)?;
    let line = |name: &str, i: usize| Series {
        name: name.into(),
        points: curve.iter().map(|c| (c[0], c[i])).collect(),
        markers: false,
    };
    let dots = |name: &str, lambda: f64| Series {
        name: name.into(),
        points: rows
            .iter()
            .filter(|r| r.kind == "edge" && r.param == lambda)
            .map(|r| (r.theta, r.monte_carlo))
            .collect(),
        markers: true,
    };
    let svg = chart_svg(
        "whole-edge detection probability against sensing direction",
        "theta (rad)",
        "q_d",
        &[
            line("edge 50", 1),
            line("edge 100", 2),
            dots("edge 50, MC", 50.0),
            dots("edge 100, MC", 100.0),
        ],
    );
    write_text(&out.join("qd_theta.svg"), &svg, &mut m)?;
    m.finish(&out.join("manifest.json"))?;
    let mut o = Outcome::from_manifest(&m);
    for r in rows.iter().filter(|r| r.flagged()) {
        o.warnings.push(format!(
            "{} {} at theta {:.4}: Monte Carlo {:.6} vs {:.6} (z = {:.2})",
            r.kind, r.param, r.theta, r.monte_carlo, r.closed_form, r.z
        ));
    }
    Ok(o)
}

/// SVG of a report's best shape, a scenario polygon or a shape list.
/// `truth` overlays a scenario polygon on a report's shape.
pub fn cmd_plot(input: &Path, truth: Option<&Path>, out: &Path) -> Result<()> {
    let is_toml = input.extension().is_some_and(|e| e == "toml");
    let svg = if is_toml {
        let sc = io::load_scenario(input)?;
        polygon_svg(&sc.polygon, &input.display().to_string())
    } else {
        let report: EstimationReport = io::read_json(input)?;
        let truth = truth.map(io::load_scenario).transpose()?;
        match report.shapes.first() {
            Some(s) => shape_svg(s, truth.as_ref().map(|t| &t.polygon), "estimated shape"),
            None => placeholder_svg("report contains no assembled shape"),
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, svg)?;
    Ok(())
}
