//! Minimal `key = value` configuration text.
//!
//! One assignment per line; blank lines and lines starting with `#` are
//! ignored, as is anything after a `#` on an assignment line. Keys are
//! case-sensitive and may appear at most once.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::protocols::{CvParams, CvScenario, DecoyParams};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::validation(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::validation(
                    format!("line {}", lineno + 1),
                    "empty key",
                ));
            }
            if entries.iter().any(|(k, _)| k == key) {
                return Err(Error::validation(key, "duplicate key"));
            }
            entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    /// Rejects any key not in `allowed`.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) => Err(Error::validation(
                k,
                format!("unknown key; expected one of {}", allowed.join(", ")),
            )),
            None => Ok(()),
        }
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::validation(key, format!("cannot parse `{v}`")))
            })
            .transpose()
    }
}

const DECOY_KEYS: [&str; 5] = [
    "visibility",
    "bob_transmittance",
    "detector_efficiency",
    "dark_count",
    "ec_inefficiency",
];

const CV_KEYS: [&str; 4] = [
    "reconciliation",
    "excess_noise",
    "detector_efficiency",
    "electronic_noise",
];

/// Decoy device parameters, starting from the reference preset and
/// overriding whichever keys are present.
pub fn decoy_params_from_str(text: &str) -> Result<DecoyParams> {
    let kv = KeyValues::parse(text)?;
    kv.expect_keys(&DECOY_KEYS)?;
    let mut p = DecoyParams::methods();
    for (key, slot) in [
        ("visibility", &mut p.visibility),
        ("bob_transmittance", &mut p.bob_transmittance),
        ("detector_efficiency", &mut p.detector_efficiency),
        ("dark_count", &mut p.dark_count),
        ("ec_inefficiency", &mut p.ec_inefficiency),
    ] {
        if let Some(v) = kv.parse_value(key)? {
            *slot = v;
        }
    }
    p.validate()?;
    Ok(p)
}

/// GG02 device parameters for `scenario`, starting from the reference preset.
pub fn cv_params_from_str(text: &str, scenario: CvScenario) -> Result<CvParams> {
    let kv = KeyValues::parse(text)?;
    kv.expect_keys(&CV_KEYS)?;
    let mut p = CvParams::methods(scenario);
    for (key, slot) in [
        ("reconciliation", &mut p.reconciliation),
        ("excess_noise", &mut p.excess_noise),
        ("detector_efficiency", &mut p.detector_efficiency),
        ("electronic_noise", &mut p.electronic_noise),
    ] {
        if let Some(v) = kv.parse_value(key)? {
            *slot = v;
        }
    }
    p.validate()?;
    Ok(p)
}
