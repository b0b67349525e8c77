use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use elldensity::catalog::{catalog_entries, catalog_entry, serre_galois_spec};
use elldensity::density::{artin_classical, density, DensityProblem, DEFAULT_L_CYCLIC};
use elldensity::verifier::{cache_dir, census, compare, CensusOptions};
use elldensity::{CurveGalois, EntanglementSpec, Error, WeierstrassCurve, DEFAULT_CAP};

#[derive(Parser)]
#[command(
    name = "elldensity",
    version,
    about = "Entanglement corrections and prime densities for elliptic curves"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Conjectural density constant.
    Density {
        #[arg(value_enum)]
        problem: ProblemKind,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        params: ProblemArgs,
        /// Euler product truncation.
        #[arg(long = "L", value_parser = parse_count)]
        l: Option<u64>,
        /// Use the character-sum path even for Serre curves.
        #[arg(long)]
        generic: bool,
    },
    /// Census of reductions up to x, compared with the constant when known.
    Verify {
        #[arg(value_enum)]
        problem: ProblemKind,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        params: ProblemArgs,
        #[arg(long, default_value = "1000000", value_parser = parse_count)]
        x: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV of every good prime.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Resumable checkpoint file (defaults under ELLDENSITY_CACHE).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long = "L", value_parser = parse_count)]
        l: Option<u64>,
    },
    /// Built-in curves.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Goursat decomposition and normality of a materialized Galois image.
    Goursat {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Artin's primitive root constant for g.
    Artin {
        #[arg(long, allow_hyphen_values = true)]
        g: i64,
        #[arg(long = "L", default_value_t = DEFAULT_L_CYCLIC, value_parser = parse_count)]
        l: u64,
        /// Terms in the Moebius sum.
        #[arg(long, default_value = "1000000", value_parser = parse_count)]
        terms: u64,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show {
        id: String,
    },
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Cyclic,
    CyclicAp,
    Koblitz,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    #[arg(long)]
    f: Option<u64>,
    #[arg(long, default_value_t = 1)]
    t: u64,
}

#[derive(Args)]
struct Source {
    /// Catalog id.
    #[arg(long, conflicts_with = "curve")]
    catalog: Option<String>,
    /// Coefficients a1,a2,a3,a4,a6.
    #[arg(long, allow_hyphen_values = true)]
    curve: Option<String>,
    /// EntanglementSpec JSON for --curve.
    #[arg(long, requires = "curve", conflicts_with = "serre")]
    spec: Option<PathBuf>,
    /// Treat --curve as a Serre curve.
    #[arg(long, requires = "curve")]
    serre: bool,
}

struct Resolved {
    curve: WeierstrassCurve,
    galois: Option<CurveGalois>,
    inputs: Value,
}

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_curve(s: &str) -> Result<[i64; 5], Error> {
    let parts: Vec<&str> = s
        .trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .collect();
    if parts.len() != 5 {
        return Err(Error::Invalid(
            "--curve needs five comma-separated coefficients".into(),
        ));
    }
    let mut a = [0i64; 5];
    for (slot, p) in a.iter_mut().zip(parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad coefficient {p:?}")))?;
    }
    Ok(a)
}

impl Source {
    fn resolve(&self) -> Result<Resolved, Error> {
        if let Some(id) = &self.catalog {
            let e = catalog_entry(id)?;
            let text = e.to_json_value().to_string();
            return Ok(Resolved {
                curve: e.curve,
                galois: Some(e.galois),
                inputs: json!({ "catalog": id, "entry_sha256": sha(text.as_bytes()) }),
            });
        }
        let Some(c) = &self.curve else {
            return Err(Error::Invalid("give --catalog or --curve".into()));
        };
        let a = parse_curve(c)?;
        let curve = WeierstrassCurve::new(a)?;
        let mut inputs = json!({ "curve": a, "curve_sha256": sha(format!("{a:?}").as_bytes()) });
        let galois = if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)?;
            inputs["spec_sha256"] = json!(sha(text.as_bytes()));
            Some(CurveGalois::Spec(EntanglementSpec::from_json(&text)?))
        } else if self.serre {
            inputs["serre"] = json!(true);
            Some(CurveGalois::Serre(curve.serre_data()?))
        } else {
            None
        };
        Ok(Resolved {
            curve,
            galois,
            inputs,
        })
    }
}

impl ProblemArgs {
    fn problem(&self, kind: ProblemKind) -> Result<DensityProblem, Error> {
        match kind {
            ProblemKind::Cyclic => Ok(DensityProblem::Cyclic),
            ProblemKind::CyclicAp => match (self.a, self.f) {
                (Some(a), Some(f)) => DensityProblem::cyclic_ap(a, f),
                _ => Err(Error::Invalid("cyclic-ap needs --a and --f".into())),
            },
            ProblemKind::Koblitz => DensityProblem::koblitz(self.t),
        }
    }
}

fn envelope(command: &str, inputs: Value, result: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "inputs": inputs,
        "result": result,
    })
}

fn run(cli: Cli) -> Result<Value, Error> {
    match cli.command {
        Command::Density {
            problem,
            source,
            params,
            l,
            generic,
        } => {
            let problem = params.problem(problem)?;
            let src = source.resolve()?;
            let galois = src.galois.ok_or_else(|| {
                Error::Invalid("density needs --catalog, --spec or --serre".into())
            })?;
            let l = l.unwrap_or_else(|| problem.default_truncation());
            let r = density(&problem, &galois, l, generic)?;
            let mut inputs = src.inputs;
            inputs["truncation_L"] = json!(l);
            Ok(envelope("density", inputs, serde_json::to_value(&r)?))
        }
        Command::Verify {
            problem,
            source,
            params,
            x,
            threads,
            seed,
            dump,
            checkpoint,
            l,
        } => {
            let problem = params.problem(problem)?;
            let src = source.resolve()?;
            let checkpoint = checkpoint.or_else(|| {
                let key = format!(
                    "{:?}|{}|{x}|{seed}",
                    src.curve.a,
                    serde_json::to_string(&problem).ok()?
                );
                Some(cache_dir()?.join(format!("census-{}.json", &sha(key.as_bytes())[..16])))
            });
            let opts = CensusOptions {
                threads,
                seed,
                dump,
                checkpoint,
            };
            let report = census(&src.curve, &problem, x, &opts)?;
            let mut out = json!({ "census": report });
            if let Some(g) = &src.galois {
                let l = l.unwrap_or_else(|| problem.default_truncation());
                match density(&problem, g, l, false) {
                    Ok(r) => {
                        out["density"] = json!({
                            "constant": r.constant,
                            "correction": elldensity::arith::rat_to_string(&r.correction),
                            "truncation_L": r.truncation_l,
                        });
                        out["comparison"] = serde_json::to_value(compare(&report, &r)?)?;
                    }
                    Err(e) if !e.is_resource() => {
                        out["prediction_unavailable"] = json!(e.to_string())
                    }
                    Err(e) => return Err(e),
                }
            } else {
                out["prediction_unavailable"] =
                    json!("no Galois data: pass --catalog, --spec or --serre");
            }
            let mut inputs = src.inputs;
            inputs["seed"] = json!(seed);
            Ok(envelope("verify", inputs, out))
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                let list: Vec<Value> = catalog_entries()?
                    .iter()
                    .map(|e| json!({ "id": e.id, "curve": e.curve.a, "m_e": e.m_e }))
                    .collect();
                Ok(envelope("catalog list", json!({}), json!(list)))
            }
            CatalogAction::Show { id } => {
                let e = catalog_entry(&id)?;
                Ok(envelope(
                    "catalog show",
                    json!({ "catalog": id }),
                    e.to_json_value(),
                ))
            }
            CatalogAction::Export { out } => {
                let all: Vec<Value> = catalog_entries()?
                    .iter()
                    .map(|e| e.to_json_value())
                    .collect();
                let text = serde_json::to_string_pretty(&all)?;
                if let Some(path) = out {
                    std::fs::write(&path, &text)?;
                    Ok(envelope(
                        "catalog export",
                        json!({}),
                        json!({ "written": path, "sha256": sha(text.as_bytes()), "entries": all.len() }),
                    ))
                } else {
                    Ok(envelope("catalog export", json!({}), json!(all)))
                }
            }
        },
        Command::Goursat { source, cap } => {
            let src = source.resolve()?;
            let h = match src.galois {
                Some(CurveGalois::Spec(s)) => s.materialize(cap)?,
                Some(CurveGalois::Serre(s)) => serre_galois_spec(&s, cap)?.materialize(cap)?,
                Some(CurveGalois::NonAbelian(m)) => m.subgroup().clone(),
                None => {
                    return Err(Error::Invalid(
                        "goursat needs --catalog, --spec or --serre".into(),
                    ))
                }
            };
            let levels: Vec<u32> = h.factors().iter().map(|g| g.level()).collect();
            let mut parts = Vec::new();
            for j in 0..h.factors().len() {
                let q = h.partition_quotient(j)?;
                parts.push(json!({
                    "factor_level": levels[j],
                    "quotient_order": q.group.order(),
                    "quotient_abelian": q.group.is_abelian(),
                }));
            }
            let mut result = json!({
                "levels": levels,
                "order": h.order(),
                "subdirect": h.is_subdirect(),
                "normal_in_product": h.is_normal_in_product(),
                "abelian_entanglements": h.has_abelian_entanglements()?,
                "partitions": parts,
            });
            if h.factors().len() == 2 {
                let g = h.goursat_data()?;
                result["goursat"] = json!({
                    "n1_order": g.n1.order(),
                    "n2_order": g.n2.order(),
                    "quotient_order": g.quotient.order(),
                    "quotient_abelian": g.quotient.is_abelian(),
                    "reconstructs": g.reconstruct() == h.packed(),
                });
            }
            Ok(envelope("goursat", src.inputs, result))
        }
        Command::Artin { g, l, terms } => {
            let r = artin_classical(g, l, terms)?;
            Ok(envelope(
                "artin",
                json!({ "g": g, "truncation_L": l, "terms": terms }),
                serde_json::to_value(&r)?,
            ))
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("json"),
        Format::Table => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, v)| format!("{k:<w$}  {v}\n"))
                .collect()
        }
    }
}

/// Counts like 1000000 or 1e6.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let (m, e) = s
        .split_once(['e', 'E'])
        .ok_or_else(|| format!("not a count: {s}"))?;
    let m: u64 = m.parse().map_err(|_| format!("not a count: {s}"))?;
    let e: u32 = e.parse().map_err(|_| format!("not a count: {s}"))?;
    10u64
        .checked_pow(e)
        .and_then(|t| t.checked_mul(m))
        .ok_or_else(|| format!("too large: {s}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(v) => {
            let mut out = std::io::stdout().lock();
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(out, "{}", render(&v, format).trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { 3 } else { 2 })
        }
    }
}
