//! Loading actions from builtins or JSON documents.

use serde::Deserialize;
use serde_json::Value;

use selfsim::mealy::MachineDocument;
use selfsim::zd::ZdDocument;
use selfsim::{Caps, Error, MealyAction, MealyMachine, Result, ZdAction};

pub enum LoadedAction {
    Mealy(MealyAction),
    Zd(ZdAction),
}

/// Optional cap overrides stored in an action document.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsOverride {
    pub max_elems: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_iterations: Option<usize>,
}

impl CapsOverride {
    pub fn apply(&self, caps: &mut Caps) {
        if let Some(v) = self.max_elems {
            caps.max_elems = v;
        }
        if let Some(v) = self.max_depth {
            caps.max_depth = v;
        }
        if let Some(v) = self.max_iterations {
            caps.max_iterations = v;
        }
    }
}

pub struct ActionDocument {
    pub name: Option<String>,
    pub caps: CapsOverride,
    pub action: LoadedAction,
}

/// Parses a Mealy machine document or a `{"type": "zd", ...}` document, each
/// optionally carrying `name` and `caps`.
pub fn parse_document(text: &str) -> Result<ActionDocument> {
    let mut value: Value =
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| Error::Document("action document must be a JSON object".into()))?;
    let name = match object.remove("name") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(other) => {
            return Err(Error::Document(format!(
                "name must be a string, got {other}"
            )))
        }
    };
    let caps = match object.remove("caps") {
        None => CapsOverride::default(),
        Some(v) => serde_json::from_value(v).map_err(|e| Error::Document(format!("caps: {e}")))?,
    };
    let action = if object.contains_key("type") {
        let doc: ZdDocument =
            serde_json::from_value(value).map_err(|e| Error::Document(e.to_string()))?;
        LoadedAction::Zd(ZdAction::from_document(&doc)?)
    } else {
        let doc: MachineDocument =
            serde_json::from_value(value).map_err(|e| Error::Document(e.to_string()))?;
        LoadedAction::Mealy(MealyAction::new(MealyMachine::from_document(&doc)?)?)
    };
    Ok(ActionDocument { name, caps, action })
}
