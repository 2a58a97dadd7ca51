use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::json;

use metric_distortion::election::parse_election;
use metric_distortion::instances::{self, GeneratedInstance};

use crate::{CliResult, Failure};

/// Where the instance comes from: a file, or a generator with parameters.
#[derive(Args, Debug, Clone, Serialize)]
pub struct InstanceArgs {
    /// Election text file. A sidecar with the same stem and a .json
    /// extension is read when present.
    #[arg(long, conflicts_with = "generator")]
    pub input: Option<PathBuf>,
    /// impartial-culture, euclidean, chain, dr-lower-bound, ktop-lower-bound,
    /// missing-voters-tight, veto, decisive or hidden-star.
    #[arg(long)]
    pub generator: Option<String>,
    /// Generator parameter as key=value; repeatable.
    #[arg(short = 'p', long = "param", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("`{s}` is not key=value"))
}

impl InstanceArgs {
    pub fn is_generated(&self) -> bool {
        self.generator.is_some()
    }

    /// The instance, with generator seed `seed + offset`.
    pub fn load(&self, offset: u64) -> CliResult<GeneratedInstance> {
        match (&self.input, &self.generator) {
            (Some(path), _) => load_file(path),
            (None, Some(name)) => generate(name, &self.params, self.seed.wrapping_add(offset)),
            (None, None) => Err(Failure::Config("either --input or --generator is required".into())),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn load_file(path: &Path) -> CliResult<GeneratedInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let election = parse_election(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let side = sidecar_path(path);
    let mut inst = if side.exists() && side != path {
        let raw = std::fs::read_to_string(&side)?;
        serde_json::from_str::<GeneratedInstance>(&raw)
            .map_err(|e| Failure::Data(format!("{}: {e}", side.display())))?
    } else {
        GeneratedInstance::plain(Default::default(), "file", json!({}))
    };
    if let Some(w) = &inst.witness {
        if (w.n(), w.m()) != (election.n(), election.m()) {
            return Err(Failure::Data(format!(
                "{}: witness does not match the election size",
                side.display()
            )));
        }
    }
    inst.election = election;
    inst.verify()?;
    Ok(inst)
}

struct Params<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn get<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> CliResult<T> {
        match self.map.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| Failure::Config(format!("parameter {key} = `{v}` is malformed"))),
            None => default.ok_or_else(|| Failure::Config(format!("parameter {key} is required"))),
        }
    }
}

pub fn generate(name: &str, params: &[(String, String)], seed: u64) -> CliResult<GeneratedInstance> {
    let p = Params {
        map: params.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
    };
    let inst = match name {
        "impartial-culture" => instances::impartial_culture(p.get("n", Some(50))?, p.get("m", Some(10))?, seed)?,
        "euclidean" => instances::euclidean(
            p.get("n", Some(50))?,
            p.get("m", Some(10))?,
            p.get("dim", Some(2))?,
            seed,
        )?,
        "chain" => instances::chain(p.get("ell", None)?)?,
        "dr-lower-bound" => instances::dr_lower_bound(p.get("m", None)?)?,
        "ktop-lower-bound" => {
            instances::ktop_lower_bound(p.get("m", None)?, p.get("k", None)?, p.get("ratio", Some(1e-6))?)?
        }
        "missing-voters-tight" => instances::missing_voters_tight(p.get("epsilon", None)?)?,
        "veto" => instances::veto_instance(p.get("m", None)?)?,
        "decisive" => instances::decisive_instance(p.get("alpha", None)?)?,
        "hidden-star" => {
            let m = p.get("m", None)?;
            let far = p.get("far", Some(instances::FAR_RATIO))?;
            let chosen = p.get("chosen", Some(0))?;
            let rest: Vec<usize> = (0..m).filter(|&c| c != chosen).collect();
            instances::hidden_star_with_order(m, chosen, &rest, far)?
        }
        _ => return Err(Failure::Config(format!("unknown generator `{name}`"))),
    };
    Ok(inst)
}
