//! `pbisim gen`: instances from the hardness constructions, each written
//! with a manifest of expected verdicts.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use pbisim_core::format::{write_plts, write_ppda};
use pbisim_core::gadgets::{afa_to_poca, and_gadget, game_to_pvpda, or_gadget, prime, solve_reach_game_finite, OneLetterAfa, Player};
use pbisim_core::random::{random_afa, random_plts, random_reach_game, rng, PltsParams};
use pbisim_core::{bisim_finite, Config, Ppda, PltsBuilder, StateId};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::args::{GadgetKind, GenKind, OutArgs};
use crate::model::Model;
use crate::CliError;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    Bisimilar,
    NotBisimilar,
}

impl Expected {
    pub fn from_bool(bisimilar: bool) -> Self {
        if bisimilar {
            Expected::Bisimilar
        } else {
            Expected::NotBisimilar
        }
    }
}

/// One expected verdict: `left` and `right` are state names or
/// configurations in `pbisim check` syntax.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestCheck {
    pub left: String,
    pub right: String,
    pub expected: Expected,
    pub provenance: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    /// File name of the instance, relative to the manifest.
    pub instance: String,
    pub source: String,
    pub checks: Vec<ManifestCheck>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

/// A configuration as space-separated tokens, runs of four or more symbols
/// written with an exponent.
pub fn config_text(m: &Ppda, c: &Config) -> String {
    let mut out = vec![m.control_name(c.control).to_string()];
    for (x, n) in c.stack.runs_top_first() {
        let name = m.symbol_name(x);
        if n >= 4 {
            out.push(format!("{name}^{n}"));
        } else {
            out.extend((0..n).map(|_| name.to_string()));
        }
    }
    out.join(" ")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &OutArgs, default_name: String, ext: &str, text: &str, mut manifest: Manifest) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&out.out).map_err(|source| CliError::Io {
        path: out.out.clone(),
        source,
    })?;
    let name = out.name.clone().unwrap_or(default_name);
    let instance = format!("{name}.{ext}");
    manifest.instance = instance.clone();
    let inst_path = out.out.join(&instance);
    let man_path = out.out.join(format!("{name}.manifest.json"));
    write_file(&inst_path, text)?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&man_path, &(json + "\n"))?;
    Ok(vec![inst_path, man_path])
}

pub fn generate(kind: &GenKind) -> Result<Vec<PathBuf>, CliError> {
    match kind {
        GenKind::Afa {
            input,
            states,
            seed,
            max_n,
            out,
        } => {
            let (afa, source) = match input {
                Some(path) => match Model::load(path)? {
                    Model::Afa(a) => (a, path.display().to_string()),
                    _ => return Err(CliError::usage("--input must be a .afa file")),
                },
                None => (random_afa(&mut rng(*seed), *states), format!("random afa, {states} states, seed {seed}")),
            };
            let (text, manifest) = afa_instance(&afa, source, *max_n)?;
            emit(out, format!("afa-{seed}"), "ppda", &text, manifest)
        }
        GenKind::Game {
            controls,
            symbols,
            seed,
            budget,
            out,
        } => {
            let g = random_reach_game(&mut rng(*seed), *controls, *symbols, *budget);
            let winner = solve_reach_game_finite(&g, budget.saturating_mul(4).max(1000))?;
            let red = game_to_pvpda(&g)?;
            let m = &red.machine;
            let owners: Vec<&str> = g
                .pda
                .control_ids()
                .filter(|q| g.player1[q.index()])
                .map(|q| g.pda.control_name(q))
                .collect();
            let manifest = Manifest {
                kind: "game".into(),
                instance: String::new(),
                source: format!("random reachability game, {controls} controls, {symbols} symbols, seed {seed}"),
                checks: vec![ManifestCheck {
                    left: config_text(m, &red.left),
                    right: config_text(m, &red.right),
                    expected: Expected::from_bool(winner == Player::Player0),
                    provenance: format!("attractor winner: {winner}"),
                }],
                details: serde_json::json!({
                    "winner": winner,
                    "player1_controls": owners,
                    "initial": config_text(&g.pda, &g.initial),
                    "game": write_ppda(&g.pda),
                }),
            };
            emit(out, format!("game-{seed}"), "ppda", &write_ppda(m), manifest)
        }
        GenKind::Gadget { kind, states, seed, out } => {
            let (text, manifest) = gadget_instance(*kind, *states, *seed)?;
            let tag = match kind {
                GadgetKind::And => "and",
                GadgetKind::Or => "or",
            };
            emit(out, format!("{tag}-{seed}"), "plts", &text, manifest)
        }
    }
}

/// The acceptance vectors `Acc(·, n)` for `n = 0, 1, …` until one repeats;
/// later vectors repeat the same cycle.
fn acc_vectors(afa: &OneLetterAfa) -> Vec<Vec<bool>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut v = afa.accepting.clone();
    while seen.insert(v.clone()) {
        out.push(v.clone());
        v = afa
            .delta
            .iter()
            .map(|&(op, a, b)| match op {
                pbisim_core::gadgets::AfaOp::And => v[a] && v[b],
                pbisim_core::gadgets::AfaOp::Or => v[a] || v[b],
            })
            .collect();
    }
    out
}

pub fn afa_instance(afa: &OneLetterAfa, source: String, max_n: u64) -> Result<(String, Manifest), CliError> {
    let red = afa_to_poca(afa)?;
    let m = &red.machine;
    let table = afa.acc_table(max_n as usize);
    let mut checks = Vec::new();
    for (qi, q) in afa.states.iter().enumerate() {
        for n in 0..=max_n {
            let cfg = |c: &str| config_text(m, &red.config(c, n).expect("reduction control"));
            checks.push(ManifestCheck {
                left: cfg(q),
                right: cfg(&prime(q)),
                expected: Expected::from_bool(!table[n as usize][qi]),
                provenance: format!("acc table: Acc({q}, {n}) = {}", table[n as usize][qi]),
            });
        }
    }
    let empty = !acc_vectors(afa).iter().any(|v| v[afa.initial]);
    checks.push(ManifestCheck {
        left: config_text(m, &red.left),
        right: config_text(m, &red.right),
        expected: Expected::from_bool(empty),
        provenance: format!(
            "acc table: the language from {} is {}",
            afa.states[afa.initial],
            if empty { "empty" } else { "nonempty" }
        ),
    });
    let manifest = Manifest {
        kind: "afa".into(),
        instance: String::new(),
        source,
        checks,
        details: serde_json::json!({
            "afa": afa.to_string(),
            "acc_table": table,
        }),
    };
    Ok((write_ppda(m), manifest))
}

fn gadget_instance(kind: GadgetKind, states: usize, seed: u64) -> Result<(String, Manifest), CliError> {
    let mut r = rng(seed);
    loop {
        let base = random_plts(
            &mut r,
            &PltsParams {
                states: states.max(2),
                actions: 1,
                max_support: 2,
                density: 0.8,
                nondeterministic: false,
            },
        );
        let classes = bisim_finite(&base);
        let k = base.num_states() as u32;
        let pick = |r: &mut rand_chacha::ChaCha8Rng| StateId(r.gen_range(0..k));
        let (t1, t2) = (pick(&mut r), pick(&mut r));
        let t1p = if r.gen_bool(0.5) { t1 } else { pick(&mut r) };
        let t2p = if r.gen_bool(0.5) { t2 } else { pick(&mut r) };
        let eq = |x: StateId, y: StateId| classes.same_block(x, y);
        if kind == GadgetKind::And && eq(t1, t2p) {
            continue;
        }
        let mut b = PltsBuilder::from_plts(&base);
        let a = b.action("a");
        let s = b.fresh_state("s")?;
        let s2 = b.fresh_state("s_prime")?;
        let (expected, rule) = match kind {
            GadgetKind::And => {
                and_gadget(&mut b, a, s, s2, t1, t1p, t2, t2p);
                (eq(t1, t1p) && eq(t2, t2p), "and")
            }
            GadgetKind::Or => {
                or_gadget(&mut b, a, s, s2, t1, t1p, t2, t2p, "g")?;
                (eq(t1, t1p) || eq(t2, t2p), "or")
            }
        };
        let l = b.build();
        let name = |x: StateId| l.state_name(x).to_string();
        let manifest = Manifest {
            kind: format!("{rule}-gadget"),
            instance: String::new(),
            source: format!("random pLTS, {states} states, seed {seed}"),
            checks: vec![ManifestCheck {
                left: name(s),
                right: name(s2),
                expected: Expected::from_bool(expected),
                provenance: format!(
                    "{rule} of t1 ~ t1' ({}) and t2 ~ t2' ({}) on the base pLTS",
                    eq(t1, t1p),
                    eq(t2, t2p)
                ),
            }],
            details: serde_json::json!({
                "t1": name(t1), "t1_prime": name(t1p), "t2": name(t2), "t2_prime": name(t2p),
            }),
        };
        return Ok((write_plts(&l), manifest));
    }
}
