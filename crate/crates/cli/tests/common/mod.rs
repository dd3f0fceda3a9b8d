#![allow(dead_code)]

use std::path::{Path, PathBuf};

use compdyn::dynam::{oapply_undirected, undirected_state_map, ResourceSharer};
use compdyn::modelspec::{Model, ModelSpec};
use compdyn::wiring::{Diagram, UWDiagram};
use compdyn_cli::files::{read_diagram, read_model, Labels};
use compdyn_cli::sim::{assemble, simulate, Assembled, Scheme, SimConfig, System, Trajectory};

pub const ECO_BOXES: [&str; 9] =
    ["growth", "fox_pred", "fox_decline", "hawk_pred", "hawk_decline", "little_growth", "big_little", "hawk_big", "big_decline"];
pub const ECO_SPECIES: [&str; 5] = ["rabbits", "foxes", "hawks", "little_fish", "big_fish"];

pub fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn eco_model_paths() -> Vec<PathBuf> {
    ECO_BOXES.iter().map(|m| data(&format!("ecosystem/{m}.json"))).collect()
}

pub fn config(rel: &str) -> SimConfig {
    serde_json::from_str(&std::fs::read_to_string(data(rel)).unwrap()).unwrap()
}

pub fn model(rel: &str) -> ModelSpec {
    read_model(&data(rel)).unwrap()
}

pub fn diagram(rel: &str) -> Diagram {
    read_diagram(&data(rel)).unwrap()
}

fn uwd(rel: &str) -> UWDiagram {
    match diagram(rel) {
        Diagram::Uwd(d) => d,
        _ => panic!("{rel} is undirected"),
    }
}

/// Runs a shipped diagram exactly as `compdyn simulate` does.
pub fn run_shipped(diagram_rel: &str, models: &[&str], config_rel: &str, labels_rel: Option<&str>) -> Trajectory {
    let specs: Vec<ModelSpec> = models.iter().map(|m| model(m)).collect();
    let labels = labels_rel.map_or(Labels::default(), |l| Labels::read(&data(l)).unwrap());
    let assembled = assemble(&diagram(diagram_rel), &specs, &labels).unwrap();
    simulate(&assembled, &config(config_rel), Scheme::Euler).unwrap().0
}

/// The flattened ecosystem, composed once and then populated with models.
pub fn eco_flat(config_rel: &str) -> Trajectory {
    let models: Vec<String> = ECO_BOXES.iter().map(|m| format!("ecosystem/{m}.json")).collect();
    let models: Vec<&str> = models.iter().map(String::as_str).collect();
    run_shipped("ecosystem/eco.json", &models, config_rel, Some("ecosystem/eco_labels.json"))
}

/// Land and river populated and composed on their own, then glued by the
/// total diagram.
pub fn eco_nested(config_rel: &str) -> Trajectory {
    let sharers: Vec<ResourceSharer> = eco_model_paths()
        .iter()
        .map(|m| match read_model(m).unwrap().instantiate().unwrap() {
            Model::Sharer(s) => s,
            Model::Machine(_) => panic!("ecosystem models are sharers"),
        })
        .collect();
    let land = oapply_undirected(&uwd("ecosystem/land.json"), &sharers[..5]).unwrap();
    let river = oapply_undirected(&uwd("ecosystem/river.json"), &sharers[5..]).unwrap();
    let total = uwd("ecosystem/total.json");
    let parts = [land, river];
    let eco = oapply_undirected(&total, &parts).unwrap();
    let mut names = vec![String::new(); eco.n_states()];
    for (j, &t) in undirected_state_map(&total, &parts).unwrap().inj_right.as_slice().iter().enumerate() {
        names[t] = ECO_SPECIES[j].to_string();
    }
    let assembled = Assembled { system: System::Undirected(eco), names };
    simulate(&assembled, &config(config_rel), Scheme::Euler).unwrap().0
}

/// Largest per-cell difference after matching columns by name.
pub fn max_cell_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    assert_eq!(a.states.len(), b.states.len());
    let perm: Vec<usize> = a.names.iter().map(|n| b.names.iter().position(|m| m == n).expect("same columns")).collect();
    a.states
        .iter()
        .zip(&b.states)
        .flat_map(|(x, y)| perm.iter().enumerate().map(move |(i, &j)| (x[i] - y[j]).abs()))
        .fold(0.0, f64::max)
}
