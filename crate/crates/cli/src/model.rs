//! Loading model files by extension or header.

use std::fmt::Write as _;
use std::path::Path;

use pbisim_core::format::{parse_config, parse_plts, parse_ppda};
use pbisim_core::gadgets::OneLetterAfa;
use pbisim_core::{Config, Plts, Ppda, StateId};

use crate::CliError;

#[derive(Clone, Debug)]
pub enum Model {
    Plts(Plts),
    Ppda(Ppda),
    Afa(OneLetterAfa),
}

fn header(text: &str) -> Option<&str> {
    text.lines()
        .map(|l| l.split("//").next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
}

impl Model {
    pub fn load(path: &Path) -> Result<Model, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Model::parse(&text)
    }

    /// Parses text whose kind is given by its header line.
    pub fn parse(text: &str) -> Result<Model, CliError> {
        match header(text) {
            Some("plts") => Ok(Model::Plts(parse_plts(text)?)),
            Some("ppda") => Ok(Model::Ppda(parse_ppda(text)?)),
            Some("afa") => Ok(Model::Afa(OneLetterAfa::parse(text)?)),
            Some(h) => Err(CliError::usage(format!("unknown model header `{h}`; expected plts, ppda or afa"))),
            None => Err(CliError::usage("empty model file")),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Plts(_) => "plts",
            Model::Ppda(_) => "ppda",
            Model::Afa(_) => "afa",
        }
    }

    pub fn into_plts(self) -> Result<Plts, CliError> {
        match self {
            Model::Plts(l) => Ok(l),
            other => Err(CliError::usage(format!("expected a .plts model, got {}", other.kind()))),
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        match self {
            Model::Plts(l) => {
                let _ = writeln!(s, "plts: {} states, {} actions, {} transitions", l.num_states(), l.num_actions(), l.transitions().len());
                let _ = writeln!(s, "fully probabilistic: {}", l.is_fully_probabilistic());
                let _ = writeln!(s, "standard: {}", l.is_standard());
            }
            Model::Ppda(m) => {
                let _ = writeln!(
                    s,
                    "ppda: {} controls, {} stack symbols, {} actions, {} rules",
                    m.controls().len(),
                    m.symbols().len(),
                    m.actions().len(),
                    m.rules().len()
                );
                let _ = write!(s, "{}", m.classify());
            }
            Model::Afa(a) => {
                let _ = writeln!(s, "afa: {} states, initial {}", a.states.len(), a.states[a.initial]);
            }
        }
        s
    }
}

pub fn plts_state(l: &Plts, name: &str) -> Result<StateId, CliError> {
    l.state_id(name)
        .ok_or_else(|| CliError::usage(format!("no state `{name}` in the pLTS")))
}

pub fn ppda_config(m: &Ppda, text: &str) -> Result<Config, CliError> {
    Ok(parse_config(m, text)?)
}
