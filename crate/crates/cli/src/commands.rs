//! One function per subcommand. Each resolves its schema, runs the module
//! operations, writes CSV/JSON artifacts plus the manifest, and reports
//! whether an acceptance-style check failed.

use crate::config::{entry, err_from, write_artifact, write_artifact_bytes, write_manifest, ConfigResult, Entry, Resolved};
use sixv::oracle::BigRational;
use sixv::analytics::{
    asep_step_constants, characteristic_point, expected_height, rains_ejs_mgf, stationary_pair,
    step_constants, CharacteristicQuery,
};
use sixv::asep::{asep_second_class, asep_simulate, AsepConfig};
use sixv::couplings::{concavity_couple, exit_point, weakly_southeast};
use sixv::model::{derive_params, sample_ensemble, AxisLaw, BoundarySlot, BoundarySpec};
use sixv::noise::NoiseField;
use sixv::oracle::{
    exact_height_dist, exact_joint_counts, exact_mgf, exact_two_point, exact_vertex_config_dist,
    Weight,
};
use sixv::parallel::par_map_indexed;
use sixv::stats::{
    check_tail_bound, degeneration_distances, estimate_tail, log_tail_fit, sample_trace,
    step_tail_check, test_stationarity, two_point_estimate, BoundShape, BoundTemplate, Observable,
    TailSide, TraceMode,
};
use sixv::Params;

/// Whether the run's acceptance-style check passed.
pub enum Outcome {
    Pass,
    CheckFailed(String),
}

fn params_schema() -> Vec<Entry> {
    vec![
        entry("model.delta1", None, "vertical pass probability delta1"),
        entry("model.delta2", None, "horizontal pass probability delta2"),
        entry("model.frak-a", Some(""), "assumption constant (empty = unset)"),
    ]
}

fn boundary_schema() -> Vec<Entry> {
    vec![
        entry("boundary.kind", Some("two-sided"), "two-sided | step | empty"),
        entry("boundary.b1", Some("0.5"), "west entry density"),
        entry("boundary.b2", Some("0.5"), "south entry density"),
        entry(
            "boundary.force",
            Some(""),
            "forced slots, e.g. 'south:1=absent;west:2=present'",
        ),
    ]
}

pub fn parse_params(cfg: &Resolved) -> ConfigResult<Params> {
    let d1 = cfg.get_f64("model.delta1")?;
    let d2 = cfg.get_f64("model.delta2")?;
    for (name, v) in [("model.delta1", d1), ("model.delta2", d2)] {
        if !(0.0..=1.0).contains(&v) {
            return err_from(format!("{name} = {v} outside [0, 1]"));
        }
    }
    let frak_a = match cfg.get("model.frak-a") {
        "" => None,
        s => Some(
            s.parse()
                .map_err(|_| crate::config::ConfigError(format!("model.frak-a: bad number '{s}'")))?,
        ),
    };
    Ok(derive_params(d1, d2, frak_a))
}

fn parse_slot(text: &str) -> ConfigResult<BoundarySlot> {
    let Some((side, idx)) = text.split_once(':') else {
        return err_from(format!("boundary slot '{text}' is not side:index"));
    };
    let idx: u32 = idx
        .parse()
        .map_err(|_| crate::config::ConfigError(format!("boundary slot index '{idx}'")))?;
    match side {
        "south" => Ok(BoundarySlot::South(idx)),
        "west" => Ok(BoundarySlot::West(idx)),
        _ => err_from(format!("boundary slot side '{side}' (want south|west)")),
    }
}

pub fn parse_boundary(cfg: &Resolved) -> ConfigResult<BoundarySpec> {
    let mut spec = match cfg.get("boundary.kind") {
        "two-sided" => {
            BoundarySpec::two_sided(cfg.get_f64("boundary.b1")?, cfg.get_f64("boundary.b2")?)
        }
        "step" => BoundarySpec::step(),
        "empty" => BoundarySpec::new(AxisLaw::absent(), AxisLaw::absent()),
        k => return err_from(format!("boundary.kind '{k}' (want two-sided|step|empty)")),
    };
    let force = cfg.get("boundary.force");
    if !force.is_empty() {
        for item in force.split(';') {
            let Some((slot, state)) = item.split_once('=') else {
                return err_from(format!("boundary.force item '{item}' is not slot=state"));
            };
            let present = match state.trim() {
                "present" => true,
                "absent" => false,
                s => return err_from(format!("boundary.force state '{s}'")),
            };
            spec = spec.with_override(parse_slot(slot.trim())?, present);
        }
    }
    Ok(spec)
}

/// Writes a JSON summary with the generator version stamped in.
fn json_out(cfg: &Resolved, name: &str, value: &serde_json::Value) -> ConfigResult<()> {
    let mut stamped = value.clone();
    if let serde_json::Value::Object(map) = &mut stamped {
        map.insert(
            "generator_version".into(),
            serde_json::Value::String(sixv::noise::GENERATOR_VERSION.into()),
        );
    }
    write_artifact(
        cfg,
        name,
        &format!("{}\n", serde_json::to_string_pretty(&stamped).unwrap()),
    )
}

// ---------------------------------------------------------------- sample --

pub fn sample_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.extend(boundary_schema());
    s.push(entry("dims.x", None, "lattice width"));
    s.push(entry("dims.y", None, "lattice height"));
    s.push(entry("text", Some("false"), "also write the debug text grid"));
    s
}

pub fn run_sample(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let boundary = parse_boundary(cfg)?;
    let dims = (cfg.get_u32("dims.x")?, cfg.get_u32("dims.y")?);
    let base = NoiseField::new(cfg.seed()?);
    let text = cfg.get_bool("text")?;
    let mut artifacts = Vec::new();
    for r in 0..cfg.replicates()? {
        let ens = sample_ensemble(&params, &boundary, dims, &base.replicate(r))
            .map_err(|e| crate::config::ConfigError(e.to_string()))?;
        let name = format!("ensemble_{r}.s6v");
        write_artifact_bytes(cfg, &name, &ens.to_bytes())?;
        artifacts.push(name);
        if text {
            let name = format!("ensemble_{r}.txt");
            write_artifact(cfg, &name, &ens.text_grid())?;
            artifacts.push(name);
        }
    }
    write_manifest(cfg, &artifacts)?;
    Ok(Outcome::Pass)
}

// ---------------------------------------------------------------- oracle --

pub fn oracle_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.extend(boundary_schema());
    s.push(entry("dims.x", None, "lattice width (x * y <= 16)"));
    s.push(entry("dims.y", None, "lattice height"));
    s.push(entry(
        "observable",
        Some("height"),
        "height | joint | vertex-config",
    ));
    s.push(entry("at.i", Some("1"), "vertex column for vertex-config"));
    s.push(entry("at.j", Some("1"), "vertex row for vertex-config"));
    s
}

pub fn run_oracle(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let boundary = parse_boundary(cfg)?;
    let (x, y) = (cfg.get_u32("dims.x")?, cfg.get_u32("dims.y")?);
    let gen_line = format!("# generator={}\n", sixv::noise::GENERATOR_VERSION);
    let name = match cfg.get("observable") {
        "height" => {
            let dist = exact_height_dist::<BigRational>(&params, &boundary, x, y)
                .map_err(|e| crate::config::ConfigError(e.to_string()))?;
            let mut csv = gen_line + "h,probability\n";
            for (h, p) in dist.support.iter().zip(&dist.probs) {
                csv.push_str(&format!("{h},{}\n", p.to_f64()));
            }
            write_artifact(cfg, "pmf.csv", &csv)?;
            "pmf.csv"
        }
        "joint" => {
            let joint = exact_joint_counts::<BigRational>(&params, &boundary, x, y)
                .map_err(|e| crate::config::ConfigError(e.to_string()))?;
            let mut csv = gen_line + "w,n,e,s,h,probability\n";
            for (d, p) in &joint {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    d.w,
                    d.n,
                    d.e,
                    d.s,
                    d.h,
                    p.to_f64()
                ));
            }
            write_artifact(cfg, "joint.csv", &csv)?;
            "joint.csv"
        }
        "vertex-config" => {
            let at = (cfg.get_u32("at.i")?, cfg.get_u32("at.j")?);
            let probs = exact_vertex_config_dist::<BigRational>(&params, &boundary, (x, y), at)
                .map_err(|e| crate::config::ConfigError(e.to_string()))?;
            let labels = [
                "empty",
                "vertical-pass",
                "vertical-turn",
                "horizontal-pass",
                "horizontal-turn",
                "both",
            ];
            let mut csv = gen_line + "config,probability\n";
            for (l, p) in labels.iter().zip(&probs) {
                csv.push_str(&format!("{l},{}\n", p.to_f64()));
            }
            write_artifact(cfg, "vertex_config.csv", &csv)?;
            "vertex_config.csv"
        }
        o => return err_from(format!("observable '{o}' (want height|joint|vertex-config)")),
    };
    write_manifest(cfg, &[name.to_string()])?;
    Ok(Outcome::Pass)
}

// ------------------------------------------------------------- analytics --

pub fn analytics_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.push(entry(
        "query",
        None,
        "stationary-pair | mgf | expected-height | characteristic-x0 | characteristic-y0 | invert-beta | step-constants | asep-step-constants",
    ));
    s.push(entry("b1", Some("0.5"), "west density"));
    s.push(entry("b2", Some("0.5"), "south density"));
    s.push(entry("a1", Some("0.5"), "west density of the tilted law"));
    s.push(entry("a2", Some("0.5"), "south density of the tilted law"));
    s.push(entry("x", Some("1"), "column / ASEP site"));
    s.push(entry("y", Some("1"), "row"));
    s.push(entry("beta1", Some("1"), "west odds"));
    s.push(entry("beta2", Some("1"), "south odds"));
    s.push(entry("x1", Some("1"), "inversion target"));
    s.push(entry("asep.l", Some("1"), "leftward rate"));
    s.push(entry("asep.r", Some("0.5"), "rightward rate"));
    s.push(entry("t", Some("1"), "ASEP horizon"));
    s
}

pub fn run_analytics(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let fail = |e: sixv::Error| crate::config::ConfigError(e.to_string());
    let value = match cfg.get("query") {
        "stationary-pair" => {
            let b1 = stationary_pair(cfg.get_f64("b2")?, &params).map_err(fail)?;
            serde_json::json!({ "b1": b1 })
        }
        "mgf" => {
            let (eps, log_mgf) = rains_ejs_mgf(
                cfg.get_f64("a1")?,
                cfg.get_f64("a2")?,
                &params,
                cfg.get_u32("x")?,
                cfg.get_u32("y")?,
            )
            .map_err(fail)?;
            serde_json::json!({ "epsilon": eps, "log_mgf": log_mgf })
        }
        "expected-height" => {
            let v = expected_height(
                cfg.get_f64("b1")?,
                cfg.get_f64("b2")?,
                cfg.get_u32("x")?,
                cfg.get_u32("y")?,
            );
            serde_json::json!({ "expected_height": v })
        }
        "characteristic-x0" => {
            let x0 = characteristic_point(
                CharacteristicQuery::X0OfY {
                    y: cfg.get_f64("y")?,
                    beta1: cfg.get_f64("beta1")?,
                },
                &params,
            )
            .map_err(fail)?;
            serde_json::json!({ "x0": x0 })
        }
        "characteristic-y0" => {
            let y0 = characteristic_point(
                CharacteristicQuery::Y0OfX {
                    x: cfg.get_f64("x")?,
                    beta2: cfg.get_f64("beta2")?,
                },
                &params,
            )
            .map_err(fail)?;
            serde_json::json!({ "y0": y0 })
        }
        "invert-beta" => {
            let beta = characteristic_point(
                CharacteristicQuery::InvertBeta {
                    x1: cfg.get_f64("x1")?,
                    y: cfg.get_f64("y")?,
                },
                &params,
            )
            .map_err(fail)?;
            serde_json::json!({ "beta": beta })
        }
        "step-constants" => {
            let c = step_constants(cfg.get_f64("x")?, cfg.get_f64("y")?, &params).map_err(fail)?;
            serde_json::json!({ "h_script": c.h_script, "sigma": c.sigma })
        }
        "asep-step-constants" => {
            let c = asep_step_constants(
                cfg.get_f64("x")?,
                cfg.get_f64("t")?,
                cfg.get_f64("asep.l")?,
                cfg.get_f64("asep.r")?,
            )
            .map_err(fail)?;
            serde_json::json!({ "j_script": c.j_script, "nu": c.nu })
        }
        q => return err_from(format!("unknown analytics query '{q}'")),
    };
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    json_out(cfg, "analytics.json", &value)?;
    write_manifest(cfg, &["analytics.json".into()])?;
    Ok(Outcome::Pass)
}

// -------------------------------------------------------------- mgf-check --

pub fn mgf_check_schema() -> Vec<Entry> {
    vec![
        entry("max.x", Some("3"), "largest x"),
        entry("max.y", Some("3"), "largest y"),
        entry("a-grid", Some("0.2,0.5,0.8"), "densities for both axes"),
        entry(
            "delta-pairs",
            Some("0.6:0.2,0.5:0.1,0.9:0.3"),
            "delta1:delta2 pairs",
        ),
        entry("tol", Some("1e-12"), "log-space tolerance"),
    ]
}

pub fn run_mgf_check(cfg: &Resolved) -> ConfigResult<Outcome> {
    let max_x = cfg.get_u32("max.x")?;
    let max_y = cfg.get_u32("max.y")?;
    let a_grid = cfg.get_f64_list("a-grid")?;
    let tol = cfg.get_f64("tol")?;
    let mut delta_pairs = Vec::new();
    for item in cfg.get("delta-pairs").split(',') {
        let Some((d1, d2)) = item.split_once(':') else {
            return err_from(format!("delta pair '{item}' is not delta1:delta2"));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| crate::config::ConfigError(format!("bad delta '{s}'")))
        };
        delta_pairs.push((parse(d1)?, parse(d2)?));
    }
    let mut worst: f64 = 0.0;
    let mut cases = 0u64;
    for &(d1, d2) in &delta_pairs {
        let params = derive_params(d1, d2, None);
        for &a1 in &a_grid {
            for &a2 in &a_grid {
                for x in 1..=max_x {
                    for y in 1..=max_y {
                        if x as u64 * y as u64 > sixv::oracle::ENUMERATION_CAP {
                            continue;
                        }
                        let (eps, log_closed) = rains_ejs_mgf(a1, a2, &params, x, y)
                            .map_err(|e| crate::config::ConfigError(e.to_string()))?;
                        let dist = exact_height_dist::<BigRational>(
                            &params,
                            &BoundarySpec::two_sided(a1, a2),
                            x,
                            y,
                        )
                        .map_err(|e| crate::config::ConfigError(e.to_string()))?;
                        let log_exact = exact_mgf(&dist, eps).ln();
                        worst = worst.max((log_closed - log_exact).abs());
                        cases += 1;
                    }
                }
            }
        }
    }
    let pass = worst <= tol;
    let value = serde_json::json!({
        "cases": cases,
        "max_abs_log_error": worst,
        "tolerance": tol,
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    json_out(cfg, "mgf_check.json", &value)?;
    write_manifest(cfg, &["mgf_check.json".into()])?;
    Ok(if pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed(format!("max |log error| {worst} above {tol}"))
    })
}

// ---------------------------------------------------------- stationarity --

pub fn stationarity_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.push(entry("b2", Some("0.5"), "south density (b1 derived)"));
    s.push(entry("x", None, "family column"));
    s.push(entry("y", None, "family row"));
    s.push(entry("dims.x", None, "sampled width"));
    s.push(entry("dims.y", None, "sampled height"));
    s.push(entry("level", Some("1e-3"), "family significance level"));
    s
}

pub fn run_stationarity(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let b2 = cfg.get_f64("b2")?;
    let b1 = stationary_pair(b2, &params).map_err(|e| crate::config::ConfigError(e.to_string()))?;
    let report = test_stationarity(
        &params,
        b1,
        b2,
        cfg.get_u32("x")?,
        cfg.get_u32("y")?,
        (cfg.get_u32("dims.x")?, cfg.get_u32("dims.y")?),
        cfg.replicates()?,
        &NoiseField::new(cfg.seed()?),
        cfg.workers()?,
        cfg.get_f64("level")?,
    )
    .map_err(|e| crate::config::ConfigError(e.to_string()))?;
    let value = serde_json::to_value(&report).unwrap();
    json_out(cfg, "stationarity.json", &value)?;
    write_manifest(cfg, &["stationarity.json".into()])?;
    println!(
        "stationarity: {} marginal and {} pairwise tests, min threshold {}, pass = {}",
        report.marginals.len(),
        report.pairwise.len(),
        report.per_test_level,
        report.all_pass
    );
    Ok(if report.all_pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed("a stationarity test fell below the corrected level".into())
    })
}

// ---------------------------------------------------------- second-class --

pub fn second_class_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.push(entry("b1", Some("0.4"), "west density"));
    s.push(entry("b2", Some("0.4"), "south density"));
    s.push(entry("dims.x", None, "box width"));
    s.push(entry("dims.y", None, "box height"));
    s.push(entry("v0", Some("south:1"), "entry slot of the particle"));
    s.push(entry(
        "mode",
        Some("direct"),
        "direct | antiparticle | discrepancy | concavity",
    ));
    s.push(entry("sparse.b1", Some("0.2"), "sparse west density (concavity)"));
    s.push(entry("sparse.b2", Some("0.2"), "sparse south density (concavity)"));
    s.push(entry("dump-trace", Some("false"), "write replicate 0's trace"));
    s
}

pub fn run_second_class(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let (b1, b2) = (cfg.get_f64("b1")?, cfg.get_f64("b2")?);
    let dims = (cfg.get_u32("dims.x")?, cfg.get_u32("dims.y")?);
    let v0 = parse_slot(cfg.get("v0"))?;
    let base = NoiseField::new(cfg.seed()?);
    let n = cfg.replicates()?;
    let workers = cfg.workers()?;
    let gen_line = format!("# generator={}\n", sixv::noise::GENERATOR_VERSION);
    let fail = |e: sixv::Error| crate::config::ConfigError(e.to_string());
    let mut artifacts = Vec::new();
    let mode = cfg.get("mode");
    let outcome = if mode == "concavity" {
        let dense = BoundarySpec::two_sided(b1, b2).with_override(v0, false);
        let sparse =
            BoundarySpec::two_sided(cfg.get_f64("sparse.b1")?, cfg.get_f64("sparse.b2")?)
                .with_override(v0, false);
        let rows: Vec<ConfigResult<(String, bool)>> = par_map_indexed(workers, n, |k| {
            let (qa, qb) =
                concavity_couple(&params, &dense, &sparse, v0, dims, &base.replicate(k))
                    .map_err(fail)?;
            let (sa, ca) = exit_point(&qa, dims).map_err(fail)?;
            let (sb, cb) = exit_point(&qb, dims).map_err(fail)?;
            let ordered = weakly_southeast(&qa, &qb);
            Ok((
                format!("{k},{sa:?},{ca},{sb:?},{cb},{ordered}").to_lowercase(),
                ordered,
            ))
        });
        let mut csv = gen_line.clone()
            + "seed,side_dense,coord_dense,side_sparse,coord_sparse,ordered\n";
        let mut violations = 0u64;
        for row in rows {
            let (line, ordered) = row?;
            csv.push_str(&line);
            csv.push('\n');
            violations += u64::from(!ordered);
        }
        write_artifact(cfg, "concavity_exits.csv", &csv)?;
        artifacts.push("concavity_exits.csv".to_string());
        if violations == 0 {
            Outcome::Pass
        } else {
            Outcome::CheckFailed(format!("{violations} ordering violations"))
        }
    } else {
        let mode = match mode {
            "direct" => TraceMode::Direct,
            "antiparticle" => TraceMode::Antiparticle,
            "discrepancy" => TraceMode::Discrepancy,
            m => return err_from(format!("mode '{m}'")),
        };
        let rows: Vec<ConfigResult<String>> = par_map_indexed(workers, n, |k| {
            let trace = sample_trace(&params, b1, b2, dims, v0, mode, &base.replicate(k))
                .map_err(fail)?;
            let (side, coord) = exit_point(&trace, dims).map_err(fail)?;
            Ok(format!("{k},{side:?},{coord}").to_lowercase())
        });
        let mut csv = gen_line.clone() + "seed,side,coordinate\n";
        for row in rows {
            csv.push_str(&row?);
            csv.push('\n');
        }
        write_artifact(cfg, "exits.csv", &csv)?;
        artifacts.push("exits.csv".to_string());
        if cfg.get_bool("dump-trace")? {
            let trace =
                sample_trace(&params, b1, b2, dims, v0, mode, &base.replicate(0)).map_err(fail)?;
            let mut csv = gen_line + "n,i,j,label\n";
            for &(i, j) in &trace.vertices {
                csv.push_str(&format!("{},{i},{j},0\n", i + j));
            }
            write_artifact(cfg, "trace.csv", &csv)?;
            artifacts.push("trace.csv".to_string());
        }
        Outcome::Pass
    };
    write_manifest(cfg, &artifacts)?;
    Ok(outcome)
}

// ------------------------------------------------------------ height-tail --

pub fn height_tail_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.push(entry("b2", Some("0.5"), "south density (b1 derived)"));
    s.push(entry("y", None, "row of the observation point"));
    s.push(entry("x", Some(""), "column (empty = characteristic point)"));
    s.push(entry("u-grid", Some("0.5,1,1.5,2"), "thresholds in scale units"));
    s.push(entry("side", Some("both"), "upper | lower | both"));
    s.push(entry("bound.shape", Some("none"), "none | three-halves | theta | quadratic | cubic"));
    s.push(entry("bound.scale", Some("0"), "scale in the bound shape (0 = y(1-kappa))"));
    s.push(entry("bound.c-front", Some("1"), "constant C of the template"));
    s.push(entry("bound.c-rate", Some("1"), "constant c of the template"));
    s
}

pub fn run_height_tail(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let fail = |e: sixv::Error| crate::config::ConfigError(e.to_string());
    let b2 = cfg.get_f64("b2")?;
    let b1 = stationary_pair(b2, &params).map_err(fail)?;
    let y = cfg.get_u32("y")?;
    let x = match cfg.get("x") {
        "" => {
            let beta1 = b1 / (1.0 - b1);
            characteristic_point(CharacteristicQuery::X0OfY { y: y as f64, beta1 }, &params)
                .map_err(fail)?
                .round() as u32
        }
        s => s
            .parse()
            .map_err(|_| crate::config::ConfigError(format!("x: bad integer '{s}'")))?,
    };
    let scale = (y as f64 * (1.0 - params.kappa)).cbrt();
    let obs = Observable::CenteredHeight {
        params,
        b1,
        b2,
        x,
        y,
        scale,
    };
    let u_grid = cfg.get_f64_list("u-grid")?;
    let n = cfg.replicates()?;
    let base = NoiseField::new(cfg.seed()?);
    let workers = cfg.workers()?;
    let sides: Vec<TailSide> = match cfg.get("side") {
        "upper" => vec![TailSide::Upper],
        "lower" => vec![TailSide::Lower],
        "both" => vec![TailSide::Upper, TailSide::Lower],
        s => return err_from(format!("side '{s}'")),
    };
    let mut artifacts = Vec::new();
    let mut summary = serde_json::Map::new();
    summary.insert("x".into(), serde_json::json!(x));
    summary.insert("scale".into(), serde_json::json!(scale));
    let mut outcome = Outcome::Pass;
    for side in sides {
        let curve = estimate_tail(&obs, side, &u_grid, n, &base, workers).map_err(fail)?;
        let name = format!("tail_{side:?}.csv").to_lowercase();
        write_artifact(cfg, &name, &curve.to_csv())?;
        artifacts.push(name);
        let side_key = format!("{side:?}").to_lowercase();
        if let Some(fit) = log_tail_fit(&curve, 1.5) {
            summary.insert(
                format!("{side_key}_log_tail_fit"),
                serde_json::json!({
                    "power": 1.5,
                    "slope": fit.slope,
                    "r_squared": fit.r_squared,
                }),
            );
        }
        let shape = match cfg.get("bound.shape") {
            "none" => None,
            "three-halves" => Some(BoundShape::ThreeHalvesOverSqrtScale {
                scale: bound_scale(cfg, &params, y)?,
            }),
            "theta" => Some(BoundShape::LinearTheta {
                theta: params.theta,
            }),
            "quadratic" => Some(BoundShape::QuadraticOverScale {
                scale: bound_scale(cfg, &params, y)?,
            }),
            "cubic" => Some(BoundShape::CubicOverScaleSq {
                scale: bound_scale(cfg, &params, y)?,
            }),
            s => return err_from(format!("bound.shape '{s}'")),
        };
        if let Some(shape) = shape {
            let template = BoundTemplate {
                shape,
                c_front: cfg.get_f64("bound.c-front")?,
                c_rate: cfg.get_f64("bound.c-rate")?,
            };
            let check = check_tail_bound(&curve, &template, 3.0);
            if !check.all_pass {
                outcome = Outcome::CheckFailed(format!("{side_key} tail exceeds the template"));
            }
            summary.insert(
                format!("{side_key}_bound"),
                serde_json::to_value(&check).unwrap(),
            );
        }
    }
    let value = serde_json::Value::Object(summary);
    json_out(cfg, "height_tail.json", &value)?;
    artifacts.push("height_tail.json".into());
    write_manifest(cfg, &artifacts)?;
    Ok(outcome)
}

fn bound_scale(cfg: &Resolved, params: &Params, y: u32) -> ConfigResult<f64> {
    let s = cfg.get_f64("bound.scale")?;
    Ok(if s == 0.0 {
        y as f64 * (1.0 - params.kappa)
    } else {
        s
    })
}

// -------------------------------------------------------------- step-tail --

pub fn step_tail_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.push(entry("x", None, "column"));
    s.push(entry("y", None, "row"));
    s.push(entry("u-grid", Some("1,2,3,4"), "thresholds in sigma units"));
    s.push(entry("c-quad", Some(""), "quadratic constant (empty = fit on train half)"));
    s
}

pub fn run_step_tail(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let c_quad = match cfg.get("c-quad") {
        "" => None,
        s => Some(
            s.parse()
                .map_err(|_| crate::config::ConfigError(format!("c-quad: bad number '{s}'")))?,
        ),
    };
    let report = step_tail_check(
        &params,
        cfg.get_u32("x")?,
        cfg.get_u32("y")?,
        &cfg.get_f64_list("u-grid")?,
        cfg.replicates()?,
        c_quad,
        &NoiseField::new(cfg.seed()?),
        cfg.workers()?,
    )
    .map_err(|e| crate::config::ConfigError(e.to_string()))?;
    let value = serde_json::to_value(&report).unwrap();
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    json_out(cfg, "step_tail.json", &value)?;
    write_manifest(cfg, &["step_tail.json".into()])?;
    Ok(if report.all_pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed("step tail exceeds the template".into())
    })
}

// ------------------------------------------------------------------- asep --

pub fn asep_schema() -> Vec<Entry> {
    vec![
        entry("asep.l", None, "leftward jump rate"),
        entry("asep.r", None, "rightward jump rate"),
        entry("asep.b", Some("0.5"), "initial density"),
        entry("asep.t", None, "horizon"),
        entry("x-list", Some("0"), "observation sites"),
        entry("mode", Some("current"), "current | second-class"),
        entry("margin", Some("64"), "window margin beyond the influence cone"),
    ]
}

pub fn run_asep(cfg: &Resolved) -> ConfigResult<Outcome> {
    let l = cfg.get_f64("asep.l")?;
    let r = cfg.get_f64("asep.r")?;
    let b = cfg.get_f64("asep.b")?;
    let t = cfg.get_f64("asep.t")?;
    let xs = cfg.get_i64_list("x-list")?;
    let config = AsepConfig::with_window_for(l, r, b, t, xs.clone(), cfg.get_i64("margin")?);
    let base = NoiseField::new(cfg.seed()?);
    let n = cfg.replicates()?;
    let workers = cfg.workers()?;
    let fail = |e: sixv::Error| crate::config::ConfigError(e.to_string());
    let second_class = match cfg.get("mode") {
        "current" => false,
        "second-class" => true,
        m => return err_from(format!("mode '{m}' (want current|second-class)")),
    };
    let rows: Vec<ConfigResult<String>> = par_map_indexed(workers, n, |k| {
        let nf = base.replicate(k);
        let mut out = String::new();
        if second_class {
            let run = asep_second_class(&config, &nf).map_err(fail)?;
            for &x in &xs {
                out.push_str(&format!("{k},{t},{x},{},{}\n", run.base.current(x), run.q));
            }
        } else {
            let s = asep_simulate(&config, &nf).map_err(fail)?;
            for &x in &xs {
                out.push_str(&format!("{k},{t},{x},{},\n", s.current(x)));
            }
        }
        Ok(out)
    });
    let mut csv = format!("# generator={}\nseed,T,x,J,Q\n", sixv::noise::GENERATOR_VERSION);
    for row in rows {
        csv.push_str(&row?);
    }
    write_artifact(cfg, "asep.csv", &csv)?;
    write_manifest(cfg, &["asep.csv".into()])?;
    Ok(Outcome::Pass)
}

// ------------------------------------------------------------- degenerate --

pub fn degenerate_schema() -> Vec<Entry> {
    vec![
        entry("eps-list", Some("0.1,0.05,0.02"), "degeneration steps"),
        entry("asep.l", Some("1"), "leftward jump rate"),
        entry("asep.r", Some("0.3"), "rightward jump rate"),
        entry("asep.b", Some("0.5"), "density"),
        entry("t", Some("5"), "time horizon"),
        entry("x", Some("0"), "current offset"),
    ]
}

pub fn run_degenerate(cfg: &Resolved) -> ConfigResult<Outcome> {
    let report = degeneration_distances(
        &cfg.get_f64_list("eps-list")?,
        cfg.get_f64("asep.l")?,
        cfg.get_f64("asep.r")?,
        cfg.get_f64("asep.b")?,
        cfg.get_f64("t")?,
        cfg.get_i64("x")?,
        cfg.replicates()?,
        &NoiseField::new(cfg.seed()?),
        cfg.workers()?,
    )
    .map_err(|e| crate::config::ConfigError(e.to_string()))?;
    let mut csv = format!(
        "# generator={}\nepsilon,ks_distance\n",
        sixv::noise::GENERATOR_VERSION
    );
    for (e, d) in report.epsilons.iter().zip(&report.distances) {
        csv.push_str(&format!("{e},{d}\n"));
    }
    write_artifact(cfg, "degeneration.csv", &csv)?;
    let value = serde_json::to_value(&report).unwrap();
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    json_out(cfg, "degeneration.json", &value)?;
    write_manifest(cfg, &["degeneration.csv".into(), "degeneration.json".into()])?;
    Ok(if report.monotone_decreasing {
        Outcome::Pass
    } else {
        Outcome::CheckFailed("degeneration distance is not monotone".into())
    })
}

// -------------------------------------------------------------- two-point --

pub fn two_point_schema() -> Vec<Entry> {
    let mut s = params_schema();
    s.push(entry("b2", Some("0.5"), "south density (b1 derived)"));
    s.push(entry("x", None, "Laplacian center column (x >= 2)"));
    s.push(entry("y", None, "row"));
    s.push(entry("mode", Some("mc"), "mc | exact"));
    s
}

pub fn run_two_point(cfg: &Resolved) -> ConfigResult<Outcome> {
    let params = parse_params(cfg)?;
    let fail = |e: sixv::Error| crate::config::ConfigError(e.to_string());
    let b2 = cfg.get_f64("b2")?;
    let b1 = stationary_pair(b2, &params).map_err(fail)?;
    let (x, y) = (cfg.get_u32("x")?, cfg.get_u32("y")?);
    match cfg.get("mode") {
        "exact" => {
            let tp = exact_two_point::<BigRational>(&params, b1, b2, x, y).map_err(fail)?;
            let residual = tp.residual.to_f64();
            let pass = residual.abs() <= 1e-12;
            let value = serde_json::json!({
                "s_value": tp.s_value.to_f64(),
                "laplacian": tp.laplacian.to_f64(),
                "residual": residual,
                "pass": pass,
            });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
            json_out(cfg, "two_point.json", &value)?;
            write_manifest(cfg, &["two_point.json".into()])?;
            Ok(if pass {
                Outcome::Pass
            } else {
                Outcome::CheckFailed(format!("Laplacian residual {residual}"))
            })
        }
        "mc" => {
            let est = two_point_estimate(
                &params,
                b1,
                b2,
                x,
                y,
                cfg.replicates()?,
                &NoiseField::new(cfg.seed()?),
                cfg.workers()?,
            )
            .map_err(fail)?;
            let value = serde_json::to_value(&est).unwrap();
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
            json_out(cfg, "two_point.json", &value)?;
            write_manifest(cfg, &["two_point.json".into()])?;
            Ok(if est.agree_3sigma {
                Outcome::Pass
            } else {
                Outcome::CheckFailed("two-point routes disagree beyond joint 3 sigma".into())
            })
        }
        m => err_from(format!("mode '{m}' (want mc|exact)")),
    }
}
