//! Structural validator for the JSON and CSV outputs against the schema
//! files shipped in `schemas/`. Supports the subset of JSON Schema the
//! shipped files use: type, required, properties, items, enum.

use serde_json::Value;

use crate::HarnessError;

pub fn validate_json(schema: &Value, value: &Value, path: &str) -> Result<(), HarnessError> {
    let fail = |reason: String| {
        Err(HarnessError::Schema {
            reason: format!("{path}: {reason}"),
        })
    };
    if let Some(allowed) = schema.get("enum").and_then(|e| e.as_array()) {
        if !allowed.contains(value) {
            return fail(format!("value {value} not in enum"));
        }
    }
    if let Some(ty) = schema.get("type").and_then(|t| t.as_str()) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => return fail(format!("unknown schema type {other}")),
        };
        if !ok {
            return fail(format!("expected {ty}, got {value}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required {
            let key = key.as_str().unwrap_or_default();
            if value.get(key).is_none() {
                return fail(format!("missing required key {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate_json(sub, v, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate_json(items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

/// CSV schema: {"columns": [{"name": .., "type": "string|integer|number"}]}
pub fn validate_csv(schema: &Value, csv: &str) -> Result<(), HarnessError> {
    let cols = schema
        .get("columns")
        .and_then(|c| c.as_array())
        .ok_or_else(|| HarnessError::Schema {
            reason: "csv schema missing columns".into(),
        })?;
    let names: Vec<&str> = cols
        .iter()
        .map(|c| c.get("name").and_then(|n| n.as_str()).unwrap_or(""))
        .collect();
    let types: Vec<&str> = cols
        .iter()
        .map(|c| c.get("type").and_then(|n| n.as_str()).unwrap_or("string"))
        .collect();
    let mut lines = csv.lines();
    let header = lines.next().ok_or_else(|| HarnessError::Schema {
        reason: "empty csv".into(),
    })?;
    let got: Vec<&str> = header.split(',').collect();
    if got != names {
        return Err(HarnessError::Schema {
            reason: format!("csv header {got:?} does not match schema {names:?}"),
        });
    }
    for (li, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(HarnessError::Schema {
                reason: format!("row {li}: field count {}", fields.len()),
            });
        }
        for ((f, ty), name) in fields.iter().zip(&types).zip(&names) {
            let ok = match *ty {
                "integer" => f.parse::<i64>().is_ok(),
                "number" => f.parse::<f64>().is_ok(),
                _ => true,
            };
            if !ok {
                return Err(HarnessError::Schema {
                    reason: format!("row {li}, column {name}: {f} is not {ty}"),
                });
            }
        }
    }
    Ok(())
}

/// Loads a schema shipped with the crate.
pub fn shipped_schema(name: &str) -> Result<Value, HarnessError> {
    let text = match name {
        "run_report" => include_str!("../schemas/run_report.schema.json"),
        "comparison" => include_str!("../schemas/comparison.schema.json"),
        "comparison_csv" => include_str!("../schemas/comparison_csv.schema.json"),
        "bound_report" => include_str!("../schemas/bound_report.schema.json"),
        "verdict" => include_str!("../schemas/verdict.schema.json"),
        other => {
            return Err(HarnessError::Schema {
                reason: format!("unknown schema {other}"),
            })
        }
    };
    serde_json::from_str(text).map_err(|e| HarnessError::Schema {
        reason: format!("schema parse: {e}"),
    })
}
