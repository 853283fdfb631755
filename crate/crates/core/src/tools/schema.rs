use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::gateway::json_kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    String,
    Number,
    Integer,
    Boolean,
    Array,
    Object,
}

impl ParamType {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamType::String => "string",
            ParamType::Number => "number",
            ParamType::Integer => "integer",
            ParamType::Boolean => "boolean",
            ParamType::Array => "array",
            ParamType::Object => "object",
        }
    }

    /// Strict check: no coercion between strings and numbers, and an
    /// integer must be written without a fractional part.
    pub fn accepts(self, value: &Value) -> bool {
        match self {
            ParamType::String => value.is_string(),
            ParamType::Number => value.is_number(),
            ParamType::Integer => value.is_i64() || value.is_u64(),
            ParamType::Boolean => value.is_boolean(),
            ParamType::Array => value.is_array(),
            ParamType::Object => value.is_object(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    #[serde(rename = "type")]
    pub kind: ParamType,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub required: bool,
    #[serde(default, rename = "enum", skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<ParamType>,
}

/// Ordered property map: parameter name to definition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSchema {
    pub properties: Vec<(String, ParamDef)>,
}

impl ParamSchema {
    pub fn get(&self, name: &str) -> Option<&ParamDef> {
        self.properties
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
    }

    pub fn required(&self) -> impl Iterator<Item = &str> {
        self.properties
            .iter()
            .filter(|(_, d)| d.required)
            .map(|(n, _)| n.as_str())
    }

    /// Validates a parsed argument document. Returns the first violation.
    pub fn validate(&self, args: &Map<String, Value>) -> Result<(), String> {
        for name in self.required() {
            if !args.contains_key(name) {
                return Err(format!("missing required parameter '{name}'"));
            }
        }
        for (name, value) in args {
            let Some(def) = self.get(name) else {
                let known: Vec<&str> = self.properties.iter().map(|(n, _)| n.as_str()).collect();
                return Err(format!(
                    "unexpected parameter '{name}' (accepted: {})",
                    known.join(", ")
                ));
            };
            if value.is_null() && !def.required {
                continue;
            }
            if !def.kind.accepts(value) {
                return Err(format!(
                    "parameter '{name}' must be {}, got {}",
                    def.kind.as_str(),
                    json_kind(value)
                ));
            }
            if let (Some(allowed), Some(s)) = (&def.allowed, value.as_str()) {
                if !allowed.iter().any(|a| a == s) {
                    return Err(format!(
                        "parameter '{name}' must be one of [{}], got '{s}'",
                        allowed.join(", ")
                    ));
                }
            }
            if let (Some(item_kind), Some(items)) = (def.items, value.as_array()) {
                if let Some(bad) = items.iter().position(|v| !item_kind.accepts(v)) {
                    return Err(format!(
                        "parameter '{name}[{bad}]' must be {}, got {}",
                        item_kind.as_str(),
                        json_kind(&items[bad])
                    ));
                }
            }
        }
        Ok(())
    }
}

impl Serialize for ParamSchema {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = Map::new();
        for (name, def) in &self.properties {
            map.insert(name.clone(), serde_json::to_value(def).map_err(serde::ser::Error::custom)?);
        }
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ParamSchema {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = Map::<String, Value>::deserialize(deserializer)?;
        let mut properties = Vec::with_capacity(map.len());
        for (name, value) in map {
            let def: ParamDef = serde_json::from_value(value)
                .map_err(|e| D::Error::custom(format!("parameter '{name}': {e}")))?;
            properties.push((name, def));
        }
        Ok(Self { properties })
    }
}

/// A tool declaration as loaded from its schema document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub parameters: ParamSchema,
}

impl ToolSpec {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let spec: ToolSpec = serde_json::from_str(text).map_err(|e| e.to_string())?;
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Loads every `*.json` schema in a directory, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>, String> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| format!("cannot list {}: {e}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| Self::load(p)).collect()
    }

    fn check(&self) -> Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("tool name must not be empty".into());
        }
        let mut seen = std::collections::HashSet::new();
        for (name, _) in &self.parameters.properties {
            if !seen.insert(name) {
                return Err(format!("duplicate parameter '{name}'"));
            }
        }
        Ok(())
    }

    /// Function-calling document sent to the model.
    pub fn to_wire(&self) -> Value {
        let mut properties = Map::new();
        for (name, def) in &self.parameters.properties {
            let mut prop = Map::new();
            prop.insert("type".into(), json!(def.kind.as_str()));
            prop.insert("description".into(), json!(def.description));
            if let Some(allowed) = &def.allowed {
                prop.insert("enum".into(), json!(allowed));
            }
            if let Some(items) = def.items {
                prop.insert("items".into(), json!({"type": items.as_str()}));
            }
            properties.insert(name.clone(), Value::Object(prop));
        }
        let required: Vec<&str> = self.parameters.required().collect();
        json!({
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                    "additionalProperties": false,
                },
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fetch_spec() -> ToolSpec {
        ToolSpec::from_json(
            r#"{"name":"fetch_pdb","description":"Download a structure",
                "parameters":{"pdb_id":{"type":"string","description":"4-character id","required":true},
                              "format":{"type":"string","enum":["pdb","cif"]},
                              "chains":{"type":"array","items":"string"},
                              "retries":{"type":"integer"}}}"#,
        )
        .unwrap()
    }

    fn args(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn missing_required_is_named() {
        let err = fetch_spec().parameters.validate(&Map::new()).unwrap_err();
        assert_eq!(err, "missing required parameter 'pdb_id'");
    }

    #[test]
    fn no_coercion_between_strings_and_numbers() {
        let schema = fetch_spec().parameters;
        assert!(schema.validate(&args(json!({"pdb_id": 7}))).is_err());
        assert!(schema
            .validate(&args(json!({"pdb_id": "1AKI", "retries": "7"})))
            .is_err());
        assert!(schema
            .validate(&args(json!({"pdb_id": "1AKI", "retries": 7.5})))
            .is_err());
        assert!(schema
            .validate(&args(json!({"pdb_id": "1AKI", "retries": 7})))
            .is_ok());
    }

    #[test]
    fn enums_items_and_unknown_names() {
        let schema = fetch_spec().parameters;
        assert!(schema
            .validate(&args(json!({"pdb_id": "1AKI", "format": "mmtf"})))
            .unwrap_err()
            .contains("one of"));
        assert!(schema
            .validate(&args(json!({"pdb_id": "1AKI", "chains": ["A", 2]})))
            .unwrap_err()
            .contains("chains[1]"));
        assert!(schema
            .validate(&args(json!({"pdb_id": "1AKI", "colour": "red"})))
            .unwrap_err()
            .contains("unexpected parameter 'colour'"));
    }

    #[test]
    fn wire_form_lists_required_in_order() {
        let wire = fetch_spec().to_wire();
        assert_eq!(wire["function"]["name"], "fetch_pdb");
        assert_eq!(wire["function"]["parameters"]["required"], json!(["pdb_id"]));
        let keys: Vec<&String> = wire["function"]["parameters"]["properties"]
            .as_object()
            .unwrap()
            .keys()
            .collect();
        assert_eq!(keys, ["pdb_id", "format", "chains", "retries"]);
    }
}
