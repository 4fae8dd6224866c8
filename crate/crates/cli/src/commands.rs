use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use gcnlab_core::applications::{
    clustering_accuracy, scc_affinities, spectral_cluster, volume_sample_flat,
    volume_sampling_distribution, volume_sampling_expected_error, SccConfig,
};
use gcnlab_core::estimators::{
    certify_separation, concentration_experiment, integrate, moment_identity_check, verify_bound,
    BoundParams, BoundStatus, ConcentrationConfig, IntegralSpec, Mode, SeparationFlavor,
};
use gcnlab_core::fixtures::{self, two_lines};
use gcnlab_core::gcn::c_vol_mu;
use gcnlab_core::{simplex, DiscreteMeasure, GcnKind};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ingest::ingest;
use crate::report::Report;
use crate::{
    Cli, Command, FlavorArg, GlobalArgs, ModeArg, SamplingArgs, EXIT_BOUND_FAILED, EXIT_OK,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

struct Loaded {
    measure: DiscreteMeasure,
    source: Value,
    warnings: Vec<String>,
}

fn load(g: &GlobalArgs) -> Result<Loaded> {
    let (measure, warnings) = match &g.input {
        Some(path) => {
            let ing = ingest(path, g.weighted)?;
            (ing.measure, ing.warnings)
        }
        None => {
            let m = fixtures::by_name(&g.fixture)
                .ok_or_else(|| anyhow!("unknown fixture '{}'", g.fixture))?;
            (m, Vec::new())
        }
    };
    let source = json!({ "atoms": measure.len(), "ambient_dim": measure.dim() });
    Ok(Loaded {
        measure,
        source,
        warnings,
    })
}

fn mode(s: &SamplingArgs) -> Mode {
    match s.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Mc => Mode::MonteCarlo {
            samples: s.samples,
            seed: s.seed,
        },
    }
}

fn mode_seed(s: &SamplingArgs) -> Option<u64> {
    (s.mode == ModeArg::Mc).then_some(s.seed)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

fn flavor(f: FlavorArg, tau: Option<f64>) -> Result<SeparationFlavor> {
    Ok(match f {
        FlavorArg::Plain => SeparationFlavor::Plain,
        FlavorArg::Central => SeparationFlavor::Central,
        FlavorArg::Robust => SeparationFlavor::Robust,
        FlavorArg::Simplex => SeparationFlavor::SimplexWrt {
            tau: tau.ok_or_else(|| anyhow!("--flavor simplex requires --tau"))?,
        },
    })
}

/// Runs one command; errors map to exit code 1 in the binary.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let start = Instant::now();
    let g = &cli.global;
    let mut exit_code = EXIT_OK;
    let mut seed = None;
    let mut warnings = Vec::new();
    let scc_without_input = matches!(cli.command, Command::Scc(_)) && g.input.is_none();
    let loaded = if scc_without_input {
        None
    } else {
        Some(load(g)?)
    };
    let mut source = Value::Null;
    if let Some(l) = &loaded {
        source = l.source.clone();
        warnings.extend(l.warnings.iter().cloned());
    }
    let mu = || {
        loaded
            .as_ref()
            .map(|l| &l.measure)
            .expect("measure is loaded for this command")
    };

    let (args, outputs) = match &cli.command {
        Command::LsError(a) => {
            let mu = mu();
            let fit = mu.ls_flat(a.dim, None)?;
            let summary = mu.spectral_summary()?;
            let out = json!({
                "e2": fit.e2,
                "e2_sq": fit.e2_sq(),
                "unique": fit.unique,
                "flat": to_value(&fit.flat),
                "singular_values": summary.spectrum.values,
                "x_cm": summary.x_cm,
                "total_variance": summary.total_variance,
            });
            (to_value(a), out)
        }
        Command::GcnEval(a) => {
            let x: Vec<&[f64]> = mu().atoms().iter().map(Vec::as_slice).collect();
            if x.len() < 2 {
                bail!("a simplex needs at least 2 vertices, got {}", x.len());
            }
            let diam = simplex::diam(&x);
            let diam_mu = a.diam_mu.unwrap_or(diam);
            let kinds: Vec<GcnKind> = match a.gcn {
                Some(k) => vec![k],
                None => GcnKind::ALL.to_vec(),
            };
            let mut gcns = serde_json::Map::new();
            for k in kinds {
                let v = match k {
                    GcnKind::VolMu => c_vol_mu(&x, diam_mu)?,
                    _ => k.eval(&x, diam_mu),
                };
                gcns.insert(k.name().to_string(), json!(v));
            }
            let out = json!({
                "d": x.len() - 2,
                "volume": simplex::volume(&x),
                "diam": diam,
                "diam_mu": diam_mu,
                "min_edge": simplex::min_edge(&x),
                "scale_at0": simplex::scale_at0(&x).ok(),
                "heights": (0..x.len()).map(|i| simplex::height(&x, i)).collect::<Vec<_>>(),
                "polar_sines": (0..x.len()).map(|i| simplex::polar_sine(&x, i)).collect::<Vec<_>>(),
                "gcns": gcns,
            });
            (to_value(a), out)
        }
        Command::Integral(a) => {
            let mut spec = IntegralSpec::new(a.gcn, a.dim)
                .with_p(a.p)
                .with_anchor(a.anchor.into())
                .with_mode(mode(&a.sampling))
                .with_cap(g.cap);
            if let Some(t) = a.tau {
                spec = spec.with_tau(t);
            }
            seed = mode_seed(&a.sampling);
            let est = integrate(mu(), &spec)?;
            (
                to_value(a),
                json!({ "spec": to_value(&spec), "estimate": to_value(&est) }),
            )
        }
        Command::Moments(a) => {
            let id = moment_identity_check(mu(), a.dim, g.cap)?;
            (to_value(a), to_value(&id))
        }
        Command::Certify(a) => {
            let fl = flavor(a.flavor, a.tau)?;
            let cert = certify_separation(mu(), a.dim, fl, a.budget, g.cap)?;
            let strength = cert.as_ref().map(|c| c.strength(fl.arity(a.dim)));
            let out = json!({
                "found": cert.is_some(),
                "certificate": to_value(&cert),
                "strength": strength,
            });
            (to_value(a), out)
        }
        Command::Verify(a) => {
            let params = BoundParams {
                search_budget: a.budget,
                cap: g.cap,
                tau: a.tau,
                pol_constant: a.pol_constant,
                mode: mode(&a.sampling),
                ..BoundParams::default()
            };
            seed = mode_seed(&a.sampling);
            let r = verify_bound(a.theorem, mu(), a.dim, &params)?;
            if r.status == BoundStatus::Fail {
                exit_code = EXIT_BOUND_FAILED;
            }
            (to_value(a), to_value(&r))
        }
        Command::Concentration(a) => {
            let cfg = ConcentrationConfig {
                d: a.dim,
                n: a.n,
                trials: a.trials,
                delta: a.delta,
                seed: a.seed,
                search_budget: a.budget,
                cap: g.cap,
                certificate: None,
            };
            seed = Some(a.seed);
            let s = concentration_experiment(mu(), &cfg)?;
            let mut out = to_value(&s);
            out["consistent"] = json!(s.consistent());
            if !s.consistent() {
                exit_code = EXIT_BOUND_FAILED;
            }
            (to_value(a), out)
        }
        Command::Scc(a) => {
            let (points, truth) = match &loaded {
                Some(l) => (l.measure.atoms().to_vec(), None),
                None => {
                    let (p, t) = two_lines(a.seed, a.per_line, a.noise);
                    source =
                        json!({ "generated": "two_lines", "atoms": p.len(), "ambient_dim": 2 });
                    (p, Some(t))
                }
            };
            let cfg = SccConfig {
                d: a.dim,
                sigma: a.sigma,
                tuples_per_point: a.tuples_per_point,
                seed: a.seed,
            };
            seed = Some(a.seed);
            let w = scc_affinities(&points, &cfg)?;
            let c = spectral_cluster(&w, a.k, a.seed)?;
            if let Some(msg) = &c.warning {
                warnings.push(msg.clone());
            }
            let accuracy = truth
                .as_ref()
                .map(|t| clustering_accuracy(&c.labels, t, a.k));
            let out = json!({
                "sigma": w.sigma,
                "sampled_tuples": w.sampled_tuples,
                "labels": c.labels,
                "empty_clusters": c.empty_clusters,
                "accuracy": accuracy,
            });
            (to_value(a), out)
        }
        Command::Volsample(a) => {
            let mu = mu();
            let dist = volume_sampling_distribution(mu, a.dim, g.cap)?;
            let sample = volume_sample_flat(mu, a.dim, a.seed, g.cap)?;
            let err = volume_sampling_expected_error(mu, a.dim, g.cap)?;
            seed = Some(a.seed);
            let out = json!({
                "distribution": dist.iter().map(|(t, p)| json!({"tuple": t, "probability": p})).collect::<Vec<_>>(),
                "sample": to_value(&sample),
                "expected_error": err,
            });
            (to_value(a), out)
        }
    };

    let mut inputs = to_value(g);
    if let (Value::Object(m), Value::Object(extra)) = (&mut inputs, args) {
        m.extend(extra);
        m.insert("measure".into(), source);
    }
    if scc_without_input {
        if let Value::Object(m) = &mut inputs {
            m.remove("fixture");
            m.remove("weighted");
        }
    }
    Ok(Outcome {
        report: Report {
            command: cli.command.name().to_string(),
            inputs,
            outputs,
            seed,
            warnings,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        exit_code,
    })
}
