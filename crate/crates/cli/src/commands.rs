use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context as _, Result};
use potgraph::capacity::{
    boundary_cap_upper, cap_finite, cap_tail_sequence, classify_graph, recurrence_classifier, schedule_exhaustion,
    Classification, ClassifierConfig, NeighborhoodBasis,
};
use potgraph::energy::energy_value;
use potgraph::generate::{generate, Family, GeneratorConfig};
use potgraph::graph::{EdgeFunction, Exhaustion, Potential, VertexId, VertexSet, WeightedGraph};
use potgraph::harmonic::{harmonic_rank, phi_pipeline, royden_limit, BoundaryTarget, HarmonicFamily};
use potgraph::io::{
    fmt_scalar, parse_edge_function, parse_paths, parse_potential, records, write_edge_function, write_edge_list,
    write_potential,
};
use potgraph::metrics::{
    disc_top_metric, edge_load, idempotence_check, is_intrinsic, sigma_from_potential, IntrinsicReport, MetricObject,
};
use potgraph::packing::{
    circle_anchors, contact_graph, hex_packing, layered_exhaustion, packing_metric_measure,
    packing_sigma, parse_packing, resolvability_report, BoundaryAnchor, CirclePacking, ContactWeights,
    ResolvabilityConfig, ScaleSchedule,
};
use potgraph::paths::{
    lattice_rays, null_witness_from_potential, random_paths, tree_boundary_potential, verify_null_witness,
    yamasaki_witness, PathSample,
};
use potgraph::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::context::{origin_or_first, sha256_hex, write_file, Context};

/// Result of one command before it is wrapped in the report envelope.
pub struct Outcome {
    pub result: Value,
    /// `false` maps to the "inconclusive" exit code.
    pub decided: bool,
    /// Sequence rendering for `--csv`.
    pub csv: Option<String>,
    /// Replaces the JSON report entirely (contact-only output).
    pub raw: Option<String>,
}

impl Outcome {
    fn new(result: impl Serialize, decided: bool) -> Result<Self> {
        Ok(Self {
            result: serde_json::to_value(result)?,
            decided,
            csv: None,
            raw: None,
        })
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_scalar).unwrap_or_default()
}

pub fn gen(ctx: &mut Context, a: &GenArgs) -> Result<Outcome> {
    let family = ctx.family()?.ok_or_else(|| anyhow!("gen needs --gen FAMILY"))?;
    let size = match a.size {
        Some(s) => s,
        None => ctx.max_radius().context("gen needs --size or --radii")?,
    };
    let spec = family.at(size);
    let graph = generate(spec, a.weight)?;
    let text = write_edge_list(&graph);
    if let Some(path) = &a.edges {
        write_file(path, &text)?;
    }
    Outcome::new(
        json!({
            "spec": spec,
            "report": potgraph::graph::validate_graph(&graph),
            "edge_list_sha256": sha256_hex(text.as_bytes()),
        }),
        true,
    )
}

pub fn recur(ctx: &mut Context, a: &RecurArgs) -> Result<Outcome> {
    let radii = ctx.global.radii.clone();
    let config = ClassifierConfig {
        certify_flow: !a.no_flow,
        solver: ctx.solver(),
        ..ClassifierConfig::default()
    };
    let verdict = match ctx.family()? {
        Some(family) if ctx.global.graph.is_none() => {
            recurrence_classifier(family, &radii, a.weight, &config, GeneratorConfig::default())?
        }
        _ => {
            let (graph, _) = ctx.graph(None)?;
            let seed = origin_or_first(&graph, a.origin)?;
            let name = ctx.global.graph.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            classify_graph(&graph, seed, &radii, &config, format!("recurrence of {name}"))?
        }
    };
    let mut csv = String::from("n,value,residual,vertices\n");
    for l in &verdict.levels {
        let _ = writeln!(csv, "{},{},{},{}", l.n, fmt_scalar(l.value), fmt_scalar(l.residual), l.vertices);
    }
    let decided = verdict.classification != Classification::Inconclusive;
    Ok(Outcome::new(&verdict, decided)?.with_csv(csv))
}

/// `{0, 1}`, `0 1` or `file:PATH`.
fn parse_vertex_set(ctx: &mut Context, spec: &str) -> Result<VertexSet> {
    let text = match spec.strip_prefix("file:") {
        Some(path) => ctx.read("set", std::path::Path::new(path))?,
        None => spec.replace(['{', '}', ','], " "),
    };
    let mut set = VertexSet::new();
    for (_, fields) in records(&text.replace(',', " ")) {
        for f in fields {
            set.insert(f.parse().with_context(|| format!("bad vertex id {f:?}"))?);
        }
    }
    Ok(set)
}

fn unit_path_load(graph: &WeightedGraph<f64>) -> Vec<f64> {
    edge_load(graph, &vec![1.0; graph.edge_count()])
}

pub fn capacity(ctx: &mut Context, a: &CapacityArgs) -> Result<Outcome> {
    let modes = [a.set.is_some(), a.tail, a.infinity].iter().filter(|b| **b).count();
    if modes != 1 {
        bail!("capacity needs exactly one of --set, --tail, --infinity");
    }
    let (graph, source) = ctx.graph(None)?;
    let m = ctx.measure(&graph, || unit_path_load(&graph))?;
    let solver = ctx.solver();
    if let Some(spec) = &a.set {
        let set = parse_vertex_set(ctx, spec)?;
        let cap = cap_finite(&graph, &m, &set, &solver)?;
        if let Some(path) = &a.potential_out {
            write_file(path, &write_potential(&graph, cap.optimizer.values()))?;
        }
        return Outcome::new(json!({ "source": source, "set": set, "capacity": cap }), true);
    }
    if ctx.global.radii.is_empty() {
        bail!("--tail and --infinity need --radii");
    }
    let seed = origin_or_first(&graph, a.origin)?;
    let ex = schedule_exhaustion(&graph, seed, &ctx.global.radii)?;
    if a.tail {
        let seq = cap_tail_sequence(&graph, &m, &ex, &solver)?;
        let mut csv = String::from("n,radius,tail,effective,residual\n");
        for l in &seq.levels {
            let _ = writeln!(csv, "{},{},{},{},{}", l.n, l.radius, opt(l.tail), opt(l.effective), fmt_scalar(l.residual));
        }
        return Ok(Outcome::new(json!({ "source": source, "seed": seed, "sequence": seq }), true)?.with_csv(csv));
    }
    let basis = NeighborhoodBasis::complements(&graph, &ex)?;
    let entries = boundary_cap_upper(&graph, &m, &basis, &solver)?;
    let mut csv = String::from("k,size,value\n");
    for e in &entries {
        let _ = writeln!(csv, "{},{},{}", e.k, e.size, opt(e.value));
    }
    Ok(Outcome::new(json!({ "source": source, "seed": seed, "bounds": entries }), true)?.with_csv(csv))
}

fn royden_potential(ctx: &mut Context, graph: &WeightedGraph<f64>, seed: VertexId, rule: &str) -> Result<Potential<f64>> {
    let (name, param) = rule.split_once(':').unwrap_or((rule, ""));
    match name {
        "file" => {
            let text = ctx.read("f", std::path::Path::new(param))?;
            Ok(parse_potential(&text, graph)?)
        }
        "const" => Ok(Potential::constant(graph.len(), param.parse().context("bad constant")?)),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
            Ok(Potential::new((0..graph.len()).map(|_| rng.gen::<f64>()).collect()))
        }
        "hop-clamp" => {
            let k: usize = param.parse().context("bad clamp level")?;
            let hops = graph.hop_distances(&[graph.require(seed)?]);
            Ok(Potential::new(
                hops.iter().map(|h| h.map_or(k, |h| h.min(k)) as f64).collect(),
            ))
        }
        other => bail!("unknown potential rule {other:?}"),
    }
}

pub fn royden(ctx: &mut Context, a: &RoydenArgs) -> Result<Outcome> {
    if ctx.global.radii.is_empty() {
        bail!("royden needs --radii");
    }
    let size = match ctx.family()? {
        Some(_) => Some(ctx.max_radius()? + 1),
        None => None,
    };
    let (graph, source) = ctx.graph(size)?;
    let seed = origin_or_first(&graph, a.origin)?;
    let f = royden_potential(ctx, &graph, seed, &a.f)?;
    let ex = Exhaustion::balls(&graph, seed, &ctx.global.radii)?;
    let window = Exhaustion::balls(&graph, seed, &[a.window])?.levels.remove(0).interior;
    let report = royden_limit(&graph, &ex, &f, &window, a.stab_tol, &ctx.solver())?;
    let last = report.last.as_ref().map(|(g, split)| {
        if let Some(path) = &a.fh_out {
            write_file(path, &write_potential(g, split.fh.values()))?;
        }
        Ok::<_, anyhow::Error>(json!({ "split": split, "orthogonality_defect": split.orthogonality_defect() }))
    });
    let last = last.transpose()?;
    let mut csv = String::from("n,vertices,qh,sup_diff,energy_diff\n");
    for l in &report.levels {
        let _ = writeln!(csv, "{},{},{},{},{}", l.n, l.vertices, fmt_scalar(l.qh), opt(l.sup_diff), opt(l.energy_diff));
    }
    let decided = report.stabilized;
    Ok(Outcome::new(json!({ "source": source, "seed": seed, "report": report, "last": last }), decided)?.with_csv(csv))
}

#[derive(Serialize)]
struct IntrinsicSummary {
    intrinsic: bool,
    total_load: f64,
    min_slack: f64,
    measure_total: f64,
}

fn summarize(r: &IntrinsicReport<f64>, m: &[f64]) -> IntrinsicSummary {
    IntrinsicSummary {
        intrinsic: r.intrinsic,
        total_load: r.total_load,
        min_slack: r.slack.iter().copied().fold(f64::INFINITY, f64::min),
        measure_total: potgraph::scalar::csum(m.iter().copied()),
    }
}

pub fn metric(ctx: &mut Context, a: &MetricArgs) -> Result<Outcome> {
    let (graph, source) = ctx.graph(None)?;
    match a.mode {
        MetricMode::Potential => {
            let path = a.potential.as_ref().ok_or_else(|| anyhow!("--mode potential needs --potential"))?;
            let text = ctx.read("potential", path)?;
            let f = parse_potential(&text, &graph)?;
            let (sigma, mf) = sigma_from_potential(&graph, &f)?;
            let m = ctx.measure(&graph, || mf.clone())?;
            let against_mf = is_intrinsic(&graph, &sigma, &mf);
            let against_m = is_intrinsic(&graph, &sigma, m.values());
            let exact = against_mf.slack.iter().all(|s| *s == 0.0);
            Outcome::new(
                json!({
                    "source": source,
                    "energy": energy_value(&graph, f.values()),
                    "against_mf": summarize(&against_mf, &mf),
                    "mf_slack_exactly_zero": exact,
                    "against_m": summarize(&against_m, m.values()),
                }),
                against_m.intrinsic,
            )
        }
        MetricMode::DiscTop => {
            let (dense, cert) = disc_top_metric(&graph, graph.ids())?;
            let sigma = MetricObject::Explicit(dense);
            let load = is_intrinsic(&graph, &sigma, &vec![0.0; graph.len()]).load;
            let m = ctx.measure(&graph, || load.clone())?;
            let report = is_intrinsic(&graph, &sigma, m.values());
            let bounded = cert.all_positive && cert.pair_sum <= 2.0;
            Outcome::new(
                json!({
                    "source": source,
                    "certificate": cert,
                    "against_m": summarize(&report, m.values()),
                }),
                bounded,
            )
        }
        MetricMode::Path => {
            let w = match &a.weights {
                Some(path) => {
                    let text = ctx.read("weights", path)?;
                    parse_edge_function(&text, &graph)?
                }
                None => EdgeFunction::constant(&graph, 1.0)?,
            };
            let idem = idempotence_check(&graph, &w)?;
            let sigma = MetricObject::Path { graph: &graph, w: w.clone() };
            let load = edge_load(&graph, &sigma.edge_values(&graph));
            let m = ctx.measure(&graph, || load.clone())?;
            let report = is_intrinsic(&graph, &sigma, m.values());
            Outcome::new(
                json!({
                    "source": source,
                    "idempotence": idem,
                    "against_m": summarize(&report, m.values()),
                }),
                idem.holds,
            )
        }
    }
}

fn path_samples(ctx: &mut Context, a: &PathsArgs, graph: &WeightedGraph<f64>, seed: VertexId) -> Result<Vec<PathSample>> {
    let mut out = Vec::new();
    if let Some(path) = &a.paths_file {
        let text = ctx.read("paths", path)?;
        for p in parse_paths(&text)? {
            out.push(PathSample::new(graph, p)?);
        }
    }
    if a.rays {
        match ctx.family()? {
            Some(Family::Lattice { dim }) if ctx.global.graph.is_none() => {
                out.extend(lattice_rays(graph, dim, ctx.max_radius()?)?);
            }
            _ => bail!("--rays needs --gen lattice:D"),
        }
    }
    if let Some(spec) = &a.random {
        let (count, steps) = spec.split_once(':').ok_or_else(|| anyhow!("--random expects COUNT:STEPS"))?;
        out.extend(random_paths(graph, seed, steps.parse()?, count.parse()?, ctx.global.seed)?);
    }
    Ok(out)
}

pub fn paths(ctx: &mut Context, a: &PathsArgs) -> Result<Outcome> {
    let (graph, source) = ctx.graph(None)?;
    let seed = origin_or_first(&graph, a.origin)?;
    if let Some(path) = &a.tree_weights {
        let text = ctx.read("tree_weights", path)?;
        let w = parse_edge_function(&text, &graph)?;
        let tp = tree_boundary_potential(&graph, &w, seed)?;
        let exact = graph.edges().iter().enumerate().all(|(e, &(i, j, _))| tp.exact_increment(i, j) == w.on_edge(e));
        if let Some(out) = &a.witness_out {
            write_file(out, &write_potential(&graph, tp.values.values()))?;
        }
        return Outcome::new(
            json!({
                "source": source,
                "root": seed,
                "exponent": tp.exponent,
                "reproduces_weights": exact,
                "energy": energy_value(&graph, tp.values.values()),
            }),
            exact,
        );
    }
    let samples = path_samples(ctx, a, &graph, seed)?;
    let threshold = a.threshold;
    let (witness, extra) = if a.yamasaki {
        if ctx.global.radii.is_empty() {
            bail!("--yamasaki needs --radii");
        }
        let config = ClassifierConfig {
            solver: ctx.solver(),
            ..ClassifierConfig::default()
        };
        let verdict = classify_graph(&graph, seed, &ctx.global.radii, &config, "recurrence".into())?;
        match yamasaki_witness(&graph, seed, &verdict, &ctx.solver(), a.eps, ctx.global.seed) {
            Ok(y) => {
                let extra = json!({
                    "verdict": verdict.classification,
                    "certificate_energy": y.certificate_energy,
                    "energy_bound": y.energy_bound,
                    "ball_sizes": y.ball_sizes,
                });
                (y.witness, extra)
            }
            Err(Error::NotRecurrent(c)) => {
                return Outcome::new(
                    json!({ "source": source, "verdict": c, "note": "no witness: the verdict is not Recurrent" }),
                    false,
                );
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        let path = a.potential.as_ref().ok_or_else(|| anyhow!("paths needs --potential, --yamasaki or --tree-weights"))?;
        let text = ctx.read("potential", path)?;
        let f = parse_potential(&text, &graph)?;
        let w = null_witness_from_potential(&graph, &f, a.eps, ctx.global.seed)?;
        let q = energy_value(&graph, f.values());
        (w, json!({ "energy": q, "total_bound": 2.0 * q }))
    };
    if let Some(out) = &a.witness_out {
        write_file(out, &write_edge_function(&graph, &witness.w))?;
    }
    let report = verify_null_witness(&witness, &samples, threshold);
    let mut csv = String::from("path,length,reaches_threshold\n");
    for (k, (l, r)) in report.lengths.iter().zip(&report.reaches_threshold).enumerate() {
        let _ = writeln!(csv, "{k},{},{r}", fmt_scalar(*l));
    }
    Ok(Outcome::new(
        json!({ "source": source, "seed": seed, "witness": witness, "details": extra, "paths": report }),
        true,
    )?
    .with_csv(csv))
}

/// Points `(x,y)` in order, each optionally followed by `=value`.
fn parse_points(spec: &str) -> Result<Vec<([f64; 2], Option<f64>)>> {
    let mut out = Vec::new();
    let mut rest = spec.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| anyhow!("expected '(' in {spec:?}"))?;
        let close = open.find(')').ok_or_else(|| anyhow!("unclosed '(' in {spec:?}"))?;
        let (x, y) = open[..close].split_once(',').ok_or_else(|| anyhow!("expected x,y in {spec:?}"))?;
        let point = [x.trim().parse()?, y.trim().parse()?];
        rest = open[close + 1..].trim_start();
        let value = match rest.strip_prefix('=') {
            Some(v) => {
                let end = v.find(',').unwrap_or(v.len());
                let value = v[..end].trim().parse()?;
                rest = &v[end..];
                Some(value)
            }
            None => None,
        };
        out.push((point, value));
        rest = rest.trim_start().strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(out)
}

fn anchors(spec: &str) -> Result<Vec<[f64; 2]>> {
    match spec.strip_prefix("circle:") {
        Some(k) => Ok(circle_anchors(k.parse()?)),
        None => Ok(parse_points(spec)?.into_iter().map(|(p, _)| p).collect()),
    }
}

fn harmonic_section(
    packing: &CirclePacking<f64>,
    graph: &WeightedGraph<f64>,
    m: &[f64],
    spec: &str,
    a: &PackingArgs,
    ctx: &Context,
) -> Result<(Value, bool)> {
    let data = parse_points(spec)?;
    let mut targets = Vec::with_capacity(data.len());
    for (p, v) in data {
        let value = v.ok_or_else(|| anyhow!("--harmonic needs a value for every point"))?;
        let anchor = BoundaryAnchor::new(packing, p)?;
        targets.push(BoundaryTarget {
            label: format!("({},{})", p[0], p[1]),
            value,
            region: anchor.closed_ball(packing, anchor.nearest_distance(packing)),
        });
    }
    let sigma = packing_sigma(packing)?;
    let ex = layered_exhaustion(packing, graph, [0.0, 0.0], a.levels)?;
    let window = ex.levels[0].interior.clone();
    let phi = phi_pipeline(graph, &sigma, m, &targets, None, &ex, &window, a.stab_tol, &ctx.solver())?;
    let (g, fh) = phi.harmonic().ok_or_else(|| anyhow!("no exhaustion level was solved"))?;
    if let Some(path) = &a.fh_out {
        write_file(path, &write_potential(g, fh.values()))?;
    }
    let family = HarmonicFamily::new(g, vec![Potential::constant(g.len(), 1.0), fh.clone()], ex.seed)?;
    let rank = harmonic_rank(&family, a.rank_tol);
    let stabilized = phi.report.stabilized;
    let value = json!({
        "targets": targets.iter().map(|t| json!({ "label": t.label, "value": t.value, "region_size": t.region.len() })).collect::<Vec<_>>(),
        "pipeline": phi,
        "rank": {
            "family": ["constant", "f_h"],
            "gram": family.gram,
            "eigenvalues": family.eigenvalues(),
            "tol": a.rank_tol,
            "rank": rank,
        },
    });
    Ok((value, stabilized && rank == 2))
}

pub fn packing(ctx: &mut Context, a: &PackingArgs) -> Result<Outcome> {
    let packing = match (&a.hex, &a.file) {
        (Some(rho), None) => hex_packing(*rho)?,
        (None, Some(path)) => {
            let text = ctx.read("packing", path)?;
            parse_packing(&text)?
        }
        _ => bail!("packing needs exactly one of --hex RHO or --file PATH"),
    };
    let graph = contact_graph(&packing, a.tangency_tol, &ContactWeights::Unit)?;
    let edges = write_edge_list(&graph);
    if let Some(path) = &a.contact_out {
        write_file(path, &edges)?;
    }
    if a.contact_only {
        return Ok(Outcome {
            result: Value::Null,
            decided: true,
            csv: None,
            raw: Some(if a.contact_out.is_some() { String::new() } else { edges }),
        });
    }
    let metric = packing_metric_measure(&packing, &graph)?;
    let sigma = MetricObject::Explicit(metric.sigma(&packing)?);
    let intrinsic = is_intrinsic(&graph, &sigma, &metric.m);
    let schedule = match a.ratio {
        Some(ratio) => ScaleSchedule::Geometric { r1: a.r1, ratio },
        None => ScaleSchedule::Fitted { r1: a.r1 },
    };
    let config = ResolvabilityConfig {
        schedule,
        depth: a.depth,
        decay_ratio: a.decay_ratio,
        ..ResolvabilityConfig::default()
    };
    let report = resolvability_report(&packing, &graph, &anchors(&a.anchors)?, &config)?;
    let mut decided = report.consistent_with_strong_resolvability;
    let harmonic = match &a.harmonic {
        Some(spec) => {
            let (value, ok) = harmonic_section(&packing, &graph, &metric.m, spec, a, ctx)?;
            decided &= ok;
            Some(value)
        }
        None => None,
    };
    let mut csv = String::from("anchor_x,anchor_y,n,r,qf,mf,cesaro\n");
    for ar in &report.anchors {
        if let Some(r) = &ar.report {
            for (s, c) in r.per_scale.iter().zip(&r.cesaro) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    fmt_scalar(ar.anchor[0]),
                    fmt_scalar(ar.anchor[1]),
                    c.n,
                    fmt_scalar(s.r),
                    fmt_scalar(s.qf),
                    fmt_scalar(s.mf),
                    fmt_scalar(c.value)
                );
            }
        }
    }
    let result = json!({
        "discs": packing.len(),
        "contact_edges": graph.edge_count(),
        "contact_sha256": sha256_hex(edges.as_bytes()),
        "metric": {
            "omega": metric.omega,
            "total": metric.total,
            "area_bound": metric.area_bound,
            "tangency_defect": metric.tangency_defect,
            "intrinsic": intrinsic.intrinsic,
            "max_abs_slack": intrinsic.slack.iter().fold(0.0f64, |acc, s| acc.max(s.abs())),
        },
        "resolvability": report,
        "harmonic": harmonic,
    });
    Ok(Outcome::new(result, decided)?.with_csv(csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_with_values() {
        let p = parse_points("(1,0)=0,(-1,0)=1").unwrap();
        assert_eq!(p, vec![([1.0, 0.0], Some(0.0)), ([-1.0, 0.0], Some(1.0))]);
        let q = parse_points("(0.5, 0.5), (0,-1)").unwrap();
        assert_eq!(q, vec![([0.5, 0.5], None), ([0.0, -1.0], None)]);
        assert!(parse_points("(1,0").is_err());
        assert!(parse_points("1,0").is_err());
    }

    #[test]
    fn circle_anchor_spec() {
        assert_eq!(anchors("circle:4").unwrap().len(), 4);
        assert_eq!(anchors("(1,0)").unwrap(), vec![[1.0, 0.0]]);
    }
}
