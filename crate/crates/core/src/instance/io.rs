use std::fs;
use std::path::Path;

use super::Instance;
use crate::error::{Error, Result};

/// Parses a canonical instance document, reporting the failing field path.
pub fn from_json_str(text: &str, origin: &str) -> Result<Instance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path: origin.to_string(),
            message: format!(
                "line {} column {}, at `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ),
        }
    })
}

pub fn to_json_string(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instance serializes")
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json_str(&text, &path.display().to_string())
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json_string(inst);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth;

    #[test]
    fn missing_tanks_field_is_named() {
        let inst = synth::toy();
        let mut v = serde_json::to_value(&inst).unwrap();
        v.as_object_mut().unwrap().remove("tanks");
        let err = from_json_str(&v.to_string(), "mem").unwrap_err().to_string();
        assert!(err.contains("tanks"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let inst = synth::toy();
        let mut v = serde_json::to_value(&inst).unwrap();
        v["tanks"][0]["colour"] = serde_json::json!("red");
        let err = from_json_str(&v.to_string(), "mem").unwrap_err().to_string();
        assert!(err.contains("tanks[0]"), "{err}");
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn barge_type_one_parses() {
        let text = r#"{
            "specs": [{"id": "S1"}],
            "barges": [{"id": "type1", "volume": 1240, "specs": {"S1": 50},
                        "window": [0, 3], "unload_penalty": 1000, "allowed_tanks": ["T1"]}],
            "tanks": [{"id": "T1", "v_max": 1179, "v_min": 158, "v_init": 600,
                       "specs_init": {"S1": 40}, "min_feed_pct": 0.1}],
            "runs": [],
            "ops": {"max_unloads_per_day": 2, "max_unloads_per_barge": 2, "max_unload_gap": 7,
                    "min_daily_unload_pct": 0.1, "horizon": 5}
        }"#;
        let inst = from_json_str(text, "mem").unwrap();
        assert_eq!(inst.barges[0].volume, 1240.0);
        assert_eq!(inst.barges[0].unload_penalty, 1000.0);
        assert_eq!(inst.specs[0].unit, "pct");
        assert_eq!(inst.schema, crate::instance::SCHEMA);
    }

    #[test]
    fn file_round_trip() {
        let inst = synth::reference_three_tank();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("inst.json");
        write_instance(&inst, &p).unwrap();
        assert_eq!(read_instance(&p).unwrap(), inst);
    }
}
